use vectomo::analytic::*;
use vectomo::fields::VectorField3;
use vectomo::mbir::{mbir3d, Mbir3dOptions, ReconConfig};
use vectomo::metrics::{planar_nrmse_vector, CENTRAL_BAND};
use vectomo::phantom::{vector_potential, PhantomConfig};
use vectomo::projector::tilt_angles;

fn main() {
    let wedge = tilt_angles(-70.0, 70.0, 2.0);
    for scale in [1.0 / (2.0 * std::f64::consts::PI), 0.05] {
        println!("=== phantom scale {scale:.4}");
        for (name, cfg) in [
            ("prism", PhantomConfig::reference_prism(64).unwrap()),
            ("cylinder", PhantomConfig::reference_cylinder(64).unwrap()),
        ] {
            let mut truth = vector_potential(&cfg).unwrap();
            for c in 0..3 {
                truth.component_mut(c).values.iter_mut().for_each(|v| *v *= scale);
            }
            let _ = VectorField3::zeros(truth.grid);
            let ps = project_both_series(&truth, &wedge, &wedge).unwrap();
            let rec_vfet = vfet_reconstruct(&ps, &VfetOptions::default()).unwrap();
            let pw = planar_nrmse_vector(&rec_vfet, &truth, CENTRAL_BAND).unwrap();
            let opts = Mbir3dOptions {
                recon: ReconConfig { cost_tol: 0.0, ..ReconConfig::vector() },
                ..Default::default()
            };
            let (rec_mbir, trace) = mbir3d(&ps, &opts).unwrap();
            let pm = planar_nrmse_vector(&rec_mbir, &truth, CENTRAL_BAND).unwrap();
            print!("{name} (monotone {}):", trace.is_monotone(1e-9));
            for c in 0..3 {
                let mut le = 0;
                let mut imp = 0.0;
                let n = pm[c].len();
                for ((_, v), (_, m)) in pw[c].iter().zip(&pm[c]) {
                    if m <= v { le += 1; }
                    imp += (v - m) / v;
                }
                print!("  c{c}: {}/{} {:+.3}", le, n, imp / n as f64);
            }
            println!();
        }
    }
}
