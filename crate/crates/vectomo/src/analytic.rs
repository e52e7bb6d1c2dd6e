//! Analytic (non-iterative and classically iterative) reconstructions:
//! 2D back projection / filtered back projection / SIRT, and the 3D
//! gauge-constrained filtered back projection that recovers all three
//! vector-potential components from the two tilt series.
//!
//! The 3D path filters each phase image in 2D frequency space with a
//! three-component kernel before smearing it back along its tilt rays.
//! For the x series at tilt β the kernel is
//!
//! ```text
//! |f_v| / (sinβ·(f_u²+f_v²)) · [ f_u·f_v·cosβ,  -(f_u² + f_v²·sin²β),  f_v²·cosβ·sinβ ]
//! ```
//!
//! and the y series mirrors u↔v with |f_u| as ramp and the first two
//! entries swapped. One published form of the second entry carries sinβ to
//! the first power instead of sin²β; both are available behind
//! [`KernelVariant`], and the squared form is the default — it is the only
//! one consistent with the direct Fourier-inversion relations and with the
//! half-turn mapping of negative tilts (see docs/calibration.md for the
//! round-trip comparison).
//!
//! Tilt series span [-90°, +90°] but the reconstruction integral runs over
//! [0°, 180°); negative tilts map through the half-turn identity
//! `φ(u,v; θ−180°) = −φ(u,−v; θ)`, which the projective geometry of the
//! slice theorem provides. The 1/sinβ singularity near β ∈ {0°, 180°} is
//! clamped at sin(Δβ/2) by default.

use crate::fields::fft::{freq, C64};
use crate::fields::{Grid3, Image2, ScalarField3, VectorField3};
use crate::metrics::nrmse;
use crate::projector::{
    image_spectrum, profile_spectrum, project_sinogram, ProjectionSet, Sinogram2,
    SmearAccumulator, SmearAccumulator2, TiltAxis, TiltSeries,
};
use crate::{Error, Result};
use std::f64::consts::PI;

/// 1D sinogram filter selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Band limit as a fraction of the Nyquist frequency, in (0, 1].
    pub cutoff: f64,
    pub dc: DcPolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterKind {
    /// No filtering: plain back projection.
    None,
    /// Band-limited ramp |f|.
    RamLak,
}

/// DC treatment of the discrete ramp. The classic kernel's response is
/// nearly zero at DC, which reproduces the familiar standalone FBP
/// behavior (slight mean droop). Iterative schemes that use the filtered
/// back projection as an approximate inverse need the mean-preserving
/// value instead, otherwise the projection mean is (almost) a null mode
/// of the composite operator and the iterations crawl at DC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DcPolicy {
    #[default]
    Classic,
    MeanPreserving,
}

impl FilterSpec {
    pub fn ram_lak() -> Self {
        FilterSpec {
            kind: FilterKind::RamLak,
            cutoff: 1.0,
            dc: DcPolicy::Classic,
        }
    }

    /// Ramp with the mean-preserving DC response, for use as the
    /// approximate-inverse back projection inside iterative loops.
    pub fn ram_lak_mean_preserving() -> Self {
        FilterSpec {
            kind: FilterKind::RamLak,
            cutoff: 1.0,
            dc: DcPolicy::MeanPreserving,
        }
    }

    pub fn none() -> Self {
        FilterSpec {
            kind: FilterKind::None,
            cutoff: 1.0,
            dc: DcPolicy::Classic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
            return Err(Error::Config(format!(
                "filter cutoff must be in (0,1], got {}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

/// SIRT relaxation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SirtParams {
    pub lambda: f64,
    pub iterations: usize,
}

impl SirtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::Config("SIRT lambda must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("SIRT needs at least one iteration".into()));
        }
        Ok(())
    }
}

/// Frequency response of the band-limited ramp on an n-point circular
/// profile: the transform of the periodized discrete ramp kernel
/// (h[0] = 1/4, h[±odd n] = -1/(πn)², zero otherwise). Away from DC this
/// is |f| to rounding; at DC it keeps the small positive value of the
/// discrete kernel instead of zero, so the projection mean is not
/// discarded. An additional hard window applies the cutoff.
fn ramp_response(n: usize, cutoff: f64, dc: DcPolicy) -> Vec<f64> {
    let mut h = vec![0.0f64; n];
    // Periodize the infinite kernel; the 1/n² tails make a handful of
    // periods plenty.
    for rep in -8i64..=8 {
        for m in 0..n as i64 {
            let k = m + rep * n as i64;
            let val = if k == 0 {
                0.25
            } else if k.rem_euclid(2) != 0 {
                -1.0 / (PI * PI * (k * k) as f64)
            } else {
                0.0
            };
            h[m as usize] += val;
        }
    }
    let mut spec: Vec<C64> = h.iter().map(|&v| C64::new(v, 0.0)).collect();
    crate::fields::fft::fft1(&mut spec, crate::fields::fft::Direction::Forward);
    let fmax = 0.5 * cutoff;
    (0..n)
        .map(|m| {
            let f = freq(m, n).abs();
            if m == 0 {
                match dc {
                    DcPolicy::Classic => spec[0].re.max(0.0),
                    // Unit composite gain at DC for an n-sample parallel
                    // geometry: R(0) = 1/(π·n).
                    DcPolicy::MeanPreserving => 1.0 / (PI * n as f64),
                }
            } else if f <= fmax + 1e-15 {
                spec[m].re.max(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Apply the (band-limited) ramp to a centered profile spectrum in place.
fn apply_ramp(spec: &mut [C64], filter: &FilterSpec) {
    let n = spec.len();
    let response = ramp_response(n, filter.cutoff, filter.dc);
    for (v, r) in spec.iter_mut().zip(&response) {
        *v *= r;
    }
}

/// Filtered back projection of a parallel-beam sinogram. `FilterKind::None`
/// yields plain back projection. Per-angle profiles are ramp-filtered in
/// 1D frequency space, smeared back along their rays and scaled by
/// π/(number of angles).
pub fn fbp2d(sino: &Sinogram2, filter: &FilterSpec) -> Result<Image2> {
    filter.validate()?;
    if sino.len() < 2 {
        return Err(Error::Config(format!(
            "filtered back projection needs at least 2 angles, got {}",
            sino.len()
        )));
    }
    let n = sino.n;
    let weight = PI / sino.len() as f64;
    let mut acc = SmearAccumulator2::new(n, sino.pitch);
    for (t, &theta) in sino.angles.iter().enumerate() {
        let mut spec = profile_spectrum(sino.profile(t));
        if filter.kind == FilterKind::RamLak {
            apply_ramp(&mut spec, filter);
        }
        acc.add_profile_spectrum(&spec, theta, weight);
    }
    acc.finish()
}

/// SIRT: relaxed residual iteration `x ← x + λ·Hᵀ(y − Hx)` from a zero
/// start, run for exactly `params.iterations` sweeps.
///
/// The back projection uses the same ramp-filtered smear as [`fbp2d`]
/// (the operational reading of Hᵀ = H⁻¹ for this forward model): with the
/// plain adjoint the iteration gain spans three orders of magnitude across
/// frequencies and λ = 0.25 either diverges (view-normalized adjoint) or
/// crawls (ray-length normalization) — neither reproduces the reference
/// reconstruction quality after ten sweeps.
pub fn sirt2d(sino: &Sinogram2, params: &SirtParams) -> Result<Image2> {
    params.validate()?;
    let n = sino.n;
    let filter = FilterSpec::ram_lak_mean_preserving();
    let mut x = Image2::zeros(n, n, sino.pitch);
    for _ in 0..params.iterations {
        let est = project_sinogram(&x, &sino.angles)?;
        let residual = Sinogram2 {
            angles: sino.angles.clone(),
            n,
            pitch: sino.pitch,
            data: sino
                .data
                .iter()
                .zip(&est.data)
                .map(|(y, e)| y - e)
                .collect(),
        };
        let update = fbp2d(&residual, &filter)?;
        for (xv, uv) in x.values.iter_mut().zip(&update.values) {
            *xv += params.lambda * uv;
        }
    }
    Ok(x)
}

/// Selects the power of sinβ in the second kernel entry. `SinSquared` is
/// self-consistent under the half-turn mapping of negative tilts and
/// matches the direct inversion relations; `SinTheta` reproduces the other
/// published form. Default: `SinSquared` (see docs/calibration.md).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KernelVariant {
    SinTheta,
    #[default]
    SinSquared,
}

/// Lower clamp on the 1/sinβ singularity of the gauge kernels.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ClampPolicy {
    /// No clamping: kernels at near-axial tilts are a hard error.
    Disabled,
    /// Clamp at sin(Δβ/2) of the series' angular step.
    #[default]
    AutoFromStep,
    /// Clamp sinβ at the given value.
    Fixed(f64),
}

impl ClampPolicy {
    fn resolve(&self, series_step_deg: f64) -> Option<f64> {
        match self {
            ClampPolicy::Disabled => None,
            ClampPolicy::AutoFromStep => {
                Some((series_step_deg.to_radians() / 2.0).sin().max(1e-9))
            }
            ClampPolicy::Fixed(v) => Some(*v),
        }
    }
}

/// Options of the gauge-constrained filtered back projection.
#[derive(Clone, Copy, Debug)]
pub struct VfetOptions {
    pub variant: KernelVariant,
    /// Include the |f| ramp in the kernels (the reconstruction filter).
    pub ramp: bool,
    pub clamp: ClampPolicy,
}

impl Default for VfetOptions {
    fn default() -> Self {
        VfetOptions {
            variant: KernelVariant::default(),
            ramp: true,
            clamp: ClampPolicy::default(),
        }
    }
}

/// Map a tilt angle into [0°, 180°): non-negative angles pass through;
/// negative ones gain a half turn, which flips the image's v axis and its
/// sign. Returns (β in degrees, whether the flip applies).
fn map_half_turn(theta_deg: f64) -> (f64, bool) {
    if theta_deg >= 0.0 {
        (theta_deg, false)
    } else {
        (theta_deg + 180.0, true)
    }
}

/// Apply the half-turn data transform to a centered image spectrum: negate
/// and flip the mixed frequency axis of the series (v for the x series,
/// u for the y series).
fn flip_spectrum(spec: &[C64], nu: usize, nv: usize, axis: TiltAxis) -> Vec<C64> {
    let mut out = vec![C64::default(); spec.len()];
    match axis {
        TiltAxis::X => {
            for v in 0..nv {
                let src_v = (nv - v) % nv;
                for u in 0..nu {
                    out[u + nu * v] = -spec[u + nu * src_v];
                }
            }
        }
        TiltAxis::Y => {
            for v in 0..nv {
                for u in 0..nu {
                    let src_u = (nu - u) % nu;
                    out[u + nu * v] = -spec[src_u + nu * v];
                }
            }
        }
    }
    out
}

/// Three-component gauge kernel value at one frequency bin. `clamp` is
/// the resolved sinβ floor (`None` = clamping disabled).
fn kernel_factors(
    axis: TiltAxis,
    beta_rad: f64,
    fu: f64,
    fv: f64,
    variant: KernelVariant,
    ramp_on: bool,
    clamp: Option<f64>,
) -> Result<[f64; 3]> {
    let k2 = fu * fu + fv * fv;
    if k2 == 0.0 {
        return Ok([0.0; 3]);
    }
    let (s, c) = beta_rad.sin_cos();
    let s_eff = match clamp {
        Some(v) => s.max(v),
        None => {
            if s < 1e-12 {
                return Err(Error::Singularity(format!(
                    "gauge kernel at β = {:.3}° with clamping disabled",
                    beta_rad.to_degrees()
                )));
            }
            s
        }
    };
    let sin_term = match variant {
        KernelVariant::SinTheta => s,
        KernelVariant::SinSquared => s * s,
    };
    let ramp = if ramp_on {
        match axis {
            TiltAxis::X => fv.abs(),
            TiltAxis::Y => fu.abs(),
        }
    } else {
        1.0
    };
    let common = ramp / (s_eff * k2);
    Ok(match axis {
        TiltAxis::X => [
            common * fu * fv * c,
            -common * (fu * fu + fv * fv * sin_term),
            common * fv * fv * c * s,
        ],
        TiltAxis::Y => [
            -common * (fv * fv + fu * fu * sin_term),
            common * fu * fv * c,
            common * fu * fu * c * s,
        ],
    })
}

/// Hermitian-symmetrize the self-mirrored Nyquist row and column of a
/// centered spectrum in place. Kernel entries with odd powers of a single
/// frequency are ambiguous on these lines (the Nyquist frequency stands
/// for ±½ at once); symmetrizing restores the conjugate symmetry that
/// keeps filtered images real. Self-adjoint, and inert where the spectrum
/// already is Hermitian.
fn hermitian_symmetrize_lines(spec: &mut [C64], nu: usize, nv: usize) {
    use crate::fields::fft::nyquist_bin;
    if let Some(q) = nyquist_bin(nv) {
        for mu in 0..=nu / 2 {
            let mirror = (nu - mu) % nu;
            let a = spec[mu + nu * q];
            let b = spec[mirror + nu * q];
            let m = (a + b.conj()) * 0.5;
            spec[mu + nu * q] = m;
            spec[mirror + nu * q] = m.conj();
        }
    }
    if let Some(q) = nyquist_bin(nu) {
        for mv in 0..=nv / 2 {
            let mirror = (nv - mv) % nv;
            let a = spec[q + nu * mv];
            let b = spec[q + nu * mirror];
            let m = (a + b.conj()) * 0.5;
            spec[q + nu * mv] = m;
            spec[q + nu * mirror] = m.conj();
        }
    }
}

/// Multiply a centered image spectrum by the three gauge kernels of
/// (axis, β), producing the three per-component filtered spectra.
fn gauge_kernel_spectra(
    spec: &[C64],
    nu: usize,
    nv: usize,
    axis: TiltAxis,
    beta_deg: f64,
    opts: &VfetOptions,
    clamp: Option<f64>,
) -> Result<[Vec<C64>; 3]> {
    let beta = beta_deg.to_radians();
    let mut out = [
        vec![C64::default(); spec.len()],
        vec![C64::default(); spec.len()],
        vec![C64::default(); spec.len()],
    ];
    for mv in 0..nv {
        let fv = freq(mv, nv);
        for mu in 0..nu {
            let fu = freq(mu, nu);
            let k = kernel_factors(axis, beta, fu, fv, opts.variant, opts.ramp, clamp)?;
            let v = spec[mu + nu * mv];
            out[0][mu + nu * mv] = v * k[0];
            out[1][mu + nu * mv] = v * k[1];
            out[2][mu + nu * mv] = v * k[2];
        }
    }
    for comp in out.iter_mut() {
        hermitian_symmetrize_lines(comp, nu, nv);
    }
    Ok(out)
}

/// Gauge-filter one projection of a tilt series into its three
/// per-component contribution images (the deconvolution step of the
/// analytic pipeline). Negative tilts are mapped by the half turn first.
pub fn vfet_gauge_filter(
    series: &TiltSeries,
    theta_index: usize,
    opts: &VfetOptions,
) -> Result<[Image2; 3]> {
    if theta_index >= series.len() {
        return Err(Error::Input(format!(
            "angle index {theta_index} out of range ({} angles)",
            series.len()
        )));
    }
    let img = &series.images[theta_index];
    let (nu, nv) = (img.nu, img.nv);
    let (beta, flip) = map_half_turn(series.angles[theta_index]);
    let mut spec = image_spectrum(img);
    if flip {
        spec = flip_spectrum(&spec, nu, nv, series.axis);
    }
    let clamp = opts.clamp.resolve(series.step_deg());
    let filtered = gauge_kernel_spectra(&spec, nu, nv, series.axis, beta, opts, clamp)?;
    let floor = crate::projector::spectrum_image_scale(&spec);
    let mut out = Vec::with_capacity(3);
    for f in filtered {
        out.push(crate::projector::image_from_spectrum(
            f, nu, nv, img.pitch, 1e-6, floor,
        )?);
    }
    let [a, b, c] = <[Image2; 3]>::try_from(out).map_err(|_| Error::Input("".into()))?;
    Ok([a, b, c])
}

/// Cached per-angle mapped spectra of one series, shared across the three
/// component accumulation passes.
fn mapped_spectra(series: &TiltSeries) -> Vec<(f64, Vec<C64>)> {
    let (nu, nv) = series.dims();
    series
        .angles
        .iter()
        .zip(&series.images)
        .map(|(&theta, img)| {
            let (beta, flip) = map_half_turn(theta);
            let mut spec = image_spectrum(img);
            if flip {
                spec = flip_spectrum(&spec, nu, nv, series.axis);
            }
            (beta, spec)
        })
        .collect()
}

/// Gauge-constrained filtered back projection: for each angle of each
/// series, filter the phase image with the three-component kernels and
/// smear each result back along its tilt rays, Δβ-weighted.
pub fn vfet_reconstruct(ps: &ProjectionSet, opts: &VfetOptions) -> Result<VectorField3> {
    if ps.sx.is_empty() || ps.sy.is_empty() {
        return Err(Error::Config("projection set has an empty series".into()));
    }
    let (nu, nv) = ps.sx.dims();
    if nu != nv {
        return Err(Error::Config("reconstruction needs square projections".into()));
    }
    let grid = Grid3::cube(nu, ps.sx.pitch)?;
    let mut out = VectorField3::zeros(grid);
    for series in [&ps.sx, &ps.sy] {
        let clamp = opts.clamp.resolve(series.step_deg());
        let dbeta = series.step_deg().to_radians();
        let specs = mapped_spectra(series);
        for comp in 0..3 {
            let mut acc = SmearAccumulator::new(grid, series.axis);
            for (beta, spec) in &specs {
                let beta_rad = beta.to_radians();
                let mut filtered = vec![C64::default(); spec.len()];
                for mv in 0..nv {
                    let fv = freq(mv, nv);
                    for mu in 0..nu {
                        let fu = freq(mu, nu);
                        let k = kernel_factors(
                            series.axis, beta_rad, fu, fv, opts.variant, opts.ramp, clamp,
                        )?;
                        filtered[mu + nu * mv] = spec[mu + nu * mv] * k[comp];
                    }
                }
                hermitian_symmetrize_lines(&mut filtered, nu, nv);
                acc.add_spectrum(&filtered, *beta, dbeta);
            }
            let contribution = acc.finish()?;
            let dst = out.component_mut(comp);
            for (d, s) in dst.values.iter_mut().zip(&contribution.values) {
                *d += s;
            }
        }
    }
    Ok(out)
}

/// Squared norm of the gauge-filtered (deconvolved) projection set,
/// summed over both series, all angles, all three component kernels:
/// `Σ ‖D(φ)‖²` in image space (evaluated spectrally via Parseval). This is
/// the data-misfit building block of the vector MAP objective when fed
/// the error projections.
pub fn deconvolved_energy(ps: &ProjectionSet, opts: &VfetOptions) -> Result<f64> {
    let (nu, nv) = ps.sx.dims();
    let m2 = (nu * nv) as f64;
    let mut total = 0.0;
    for series in [&ps.sx, &ps.sy] {
        let clamp = opts.clamp.resolve(series.step_deg());
        let specs = mapped_spectra(series);
        for (beta, spec) in &specs {
            let filtered = gauge_kernel_spectra(spec, nu, nv, series.axis, *beta, opts, clamp)?;
            for comp in &filtered {
                total += comp.iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
        }
    }
    Ok(total / m2)
}

/// Convenience: forward-project a vector potential into a full projection
/// set over the given angle lists.
pub fn project_both_series(
    a: &VectorField3,
    angles_x: &[f64],
    angles_y: &[f64],
) -> Result<ProjectionSet> {
    let sx = crate::projector::project_series(a, angles_x, TiltAxis::X)?;
    let sy = crate::projector::project_series(a, angles_y, TiltAxis::Y)?;
    ProjectionSet::new(sx, sy)
}

/// Round-trip NRMSE of the analytic pipeline on a known field: project,
/// reconstruct, compare per component (mean of the three component
/// NRMSEs). Used for kernel-variant calibration and regression tests.
pub fn roundtrip_nrmse(
    truth: &VectorField3,
    angles: &[f64],
    opts: &VfetOptions,
) -> Result<f64> {
    let ps = project_both_series(truth, angles, angles)?;
    let rec = vfet_reconstruct(&ps, opts)?;
    let mut sum = 0.0;
    for c in 0..3 {
        sum += nrmse(&rec.component(c).values, &truth.component(c).values)?;
    }
    Ok(sum / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{shepp_logan, vector_potential, PhantomConfig};
    use crate::projector::tilt_angles;

    fn rms(v: &[f64]) -> f64 {
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    }

    #[test]
    fn fbp_of_zero_sinogram_is_zero() {
        let img = Image2::zeros(32, 32, 1.0);
        let sino = project_sinogram(&img, &tilt_angles(-90.0, 88.0, 2.0)).unwrap();
        let rec = fbp2d(&sino, &FilterSpec::ram_lak()).unwrap();
        assert!(rec.values.iter().all(|&v| v.abs() < 1e-12));
        assert!(fbp2d(
            &Sinogram2 {
                angles: vec![0.0],
                n: 32,
                pitch: 1.0,
                data: vec![0.0; 32]
            },
            &FilterSpec::ram_lak()
        )
        .is_err());
    }

    #[test]
    fn fbp_localizes_point_source() {
        let n = 64;
        let mut img = Image2::zeros(n, n, 1.0);
        let (u0, v0) = (40, 25);
        img.values[u0 + n * v0] = 1.0;
        let sino = project_sinogram(&img, &tilt_angles(-90.0, 89.0, 1.0)).unwrap();
        let rec = fbp2d(&sino, &FilterSpec::ram_lak()).unwrap();
        let (mut bi, mut bv) = (0usize, f64::MIN);
        for (i, &v) in rec.values.iter().enumerate() {
            if v > bv {
                bv = v;
                bi = i;
            }
        }
        let (bu, bw) = (bi % n, bi / n);
        assert!(
            bu.abs_diff(u0) <= 1 && bw.abs_diff(v0) <= 1,
            "peak at ({bu},{bw}), expected ({u0},{v0})"
        );
    }

    #[test]
    fn fbp_is_linear_in_the_sinogram() {
        let angles = tilt_angles(-90.0, 85.0, 5.0);
        let img = shepp_logan(32).unwrap();
        let s1 = project_sinogram(&img, &angles).unwrap();
        let mut s2 = s1.clone();
        for (i, v) in s2.data.iter_mut().enumerate() {
            *v = (i % 7) as f64 * 0.1 - 0.3;
        }
        let (al, be) = (1.7, -0.4);
        let mut combo = s1.clone();
        for i in 0..combo.data.len() {
            combo.data[i] = al * s1.data[i] + be * s2.data[i];
        }
        let f = FilterSpec::ram_lak();
        let r1 = fbp2d(&s1, &f).unwrap();
        let r2 = fbp2d(&s2, &f).unwrap();
        let rc = fbp2d(&combo, &f).unwrap();
        let scale = rms(&rc.values).max(1e-30);
        for i in 0..rc.values.len() {
            assert!(
                (rc.values[i] - (al * r1.values[i] + be * r2.values[i])).abs() < 1e-12 * scale
            );
        }
    }

    #[test]
    fn sirt_zero_data_stays_zero_and_first_step_scales_with_lambda() {
        let n = 32;
        let angles = tilt_angles(-90.0, 88.0, 2.0);
        let zero = Sinogram2 {
            angles: angles.clone(),
            n,
            pitch: 1.0,
            data: vec![0.0; n * angles.len()],
        };
        let x = sirt2d(
            &zero,
            &SirtParams {
                lambda: 0.25,
                iterations: 5,
            },
        )
        .unwrap();
        assert!(x.values.iter().all(|&v| v == 0.0));

        let img = shepp_logan(n).unwrap();
        let sino = project_sinogram(&img, &angles).unwrap();
        let x1 = sirt2d(
            &sino,
            &SirtParams {
                lambda: 0.1,
                iterations: 1,
            },
        )
        .unwrap();
        let x2 = sirt2d(
            &sino,
            &SirtParams {
                lambda: 0.01,
                iterations: 1,
            },
        )
        .unwrap();
        // One step from zero is exactly linear in λ.
        let scale = rms(&x1.values).max(1e-30);
        for (a, b) in x1.values.iter().zip(&x2.values) {
            assert!((a - 10.0 * b).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn sirt_residual_decreases_monotonically() {
        let n = 64;
        let angles = tilt_angles(-90.0, 86.0, 4.0);
        let img = shepp_logan(n).unwrap();
        let sino = project_sinogram(&img, &angles).unwrap();
        let mut prev = f64::MAX;
        for iters in 1..=10 {
            let x = sirt2d(
                &sino,
                &SirtParams {
                    lambda: 0.1,
                    iterations: iters,
                },
            )
            .unwrap();
            let est = project_sinogram(&x, &angles).unwrap();
            let r: f64 = sino
                .data
                .iter()
                .zip(&est.data)
                .map(|(y, e)| (y - e) * (y - e))
                .sum::<f64>()
                .sqrt();
            assert!(r < prev, "residual {r} did not decrease at iter {iters}");
            prev = r;
        }
    }

    #[test]
    fn gauge_filter_of_zero_image_is_zero() {
        let n = 16;
        let series = TiltSeries::new(
            TiltAxis::X,
            vec![-10.0, 0.0, 10.0],
            vec![Image2::zeros(n, n, 1.0); 3],
        )
        .unwrap();
        let opts = VfetOptions::default();
        for idx in 0..3 {
            let out = vfet_gauge_filter(&series, idx, &opts).unwrap();
            for img in out {
                assert!(img.values.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn kernel_parity_under_half_turn() {
        // Oracle: the naturally continued kernel at a negative tilt (sign
        // preserved in the 1/sinθ factor) must equal the half-turn mapped
        // evaluation −K(180°+θ)(fu,−fv). The squared-sine variant satisfies
        // the identity entry by entry; the first-power form breaks it in
        // its second entry.
        let continued = |variant: KernelVariant, theta_deg: f64, fu: f64, fv: f64| -> [f64; 3] {
            let (s, c) = theta_deg.to_radians().sin_cos();
            let k2 = fu * fu + fv * fv;
            let sin_term = match variant {
                KernelVariant::SinTheta => s,
                KernelVariant::SinSquared => s * s,
            };
            let common = fv.abs() / (s * k2);
            [
                common * fu * fv * c,
                -common * (fu * fu + fv * fv * sin_term),
                common * fv * fv * c * s,
            ]
        };
        for variant in [KernelVariant::SinSquared, KernelVariant::SinTheta] {
            let opts = VfetOptions {
                variant,
                ..Default::default()
            };
            let clamp = Some(1e-9);
            let mut worst = 0.0f64;
            for theta in [-10.0f64, -35.0, -62.0, -80.0] {
                for (fu, fv) in [(0.1, 0.2), (0.3, -0.05), (-0.25, 0.4)] {
                    let direct = continued(variant, theta, fu, fv);
                    let mapped = kernel_factors(
                        TiltAxis::X,
                        (180.0 + theta).to_radians(),
                        fu,
                        -fv,
                        opts.variant,
                        opts.ramp,
                        clamp,
                    )
                    .unwrap();
                    for c in 0..3 {
                        let rel = (direct[c] + mapped[c]).abs()
                            / direct[c].abs().max(mapped[c].abs()).max(1e-12);
                        worst = worst.max(rel);
                    }
                }
            }
            match variant {
                KernelVariant::SinSquared => {
                    assert!(worst < 1e-12, "squared-sine parity residue {worst}")
                }
                KernelVariant::SinTheta => {
                    assert!(worst > 0.01, "first-power variant unexpectedly parity-clean")
                }
            }
        }
    }

    #[test]
    fn singularity_clamp_policy() {
        let series = TiltSeries::new(
            TiltAxis::X,
            vec![0.0],
            vec![Image2::new(8, 8, 1.0, (0..64).map(|i| i as f64).collect()).unwrap()],
        )
        .unwrap();
        let no_clamp = VfetOptions {
            clamp: ClampPolicy::Disabled,
            ..Default::default()
        };
        assert!(matches!(
            vfet_gauge_filter(&series, 0, &no_clamp),
            Err(Error::Singularity(_))
        ));
        let clamped = VfetOptions::default();
        assert!(vfet_gauge_filter(&series, 0, &clamped).is_ok());
    }

    #[test]
    fn vfet_of_zero_projections_is_zero() {
        let n = 16;
        let angles = tilt_angles(-70.0, 70.0, 10.0);
        let imgs = vec![Image2::zeros(n, n, 1.5); angles.len()];
        let sx = TiltSeries::new(TiltAxis::X, angles.clone(), imgs.clone()).unwrap();
        let sy = TiltSeries::new(TiltAxis::Y, angles, imgs).unwrap();
        let ps = ProjectionSet::new(sx, sy).unwrap();
        let rec = vfet_reconstruct(&ps, &VfetOptions::default()).unwrap();
        assert_eq!(rec.max_abs(), 0.0);
    }

    #[test]
    fn vfet_roundtrip_recovers_phantom() {
        // Full-range reconstruction of the prism phantom: the pipeline must
        // land close to the ground truth in range-normalized error and the
        // squared-sine kernel must beat the first-power form.
        let cfg = PhantomConfig::reference_prism(64).unwrap();
        let truth = vector_potential(&cfg).unwrap();
        let angles = tilt_angles(-90.0, 90.0, 2.0);
        let sym = roundtrip_nrmse(&truth, &angles, &VfetOptions::default()).unwrap();
        let lit = roundtrip_nrmse(
            &truth,
            &angles,
            &VfetOptions {
                variant: KernelVariant::SinTheta,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(sym < 0.15, "squared-sine roundtrip NRMSE {sym}");
        assert!(
            sym < lit,
            "expected squared-sine ({sym}) below first-power ({lit})"
        );
    }

    #[test]
    fn vfet_reprojection_correlates_with_input() {
        let cfg = PhantomConfig::reference_cylinder(64).unwrap();
        let truth = vector_potential(&cfg).unwrap();
        let angles = tilt_angles(-90.0, 90.0, 3.0);
        let ps = project_both_series(&truth, &angles, &angles).unwrap();
        let rec = vfet_reconstruct(&ps, &VfetOptions::default()).unwrap();
        let ps2 = project_both_series(&rec, &angles, &angles).unwrap();
        let mut dot = 0.0;
        let mut n1 = 0.0;
        let mut n2 = 0.0;
        for (s1, s2) in [(&ps.sx, &ps2.sx), (&ps.sy, &ps2.sy)] {
            for (i1, i2) in s1.images.iter().zip(&s2.images) {
                for (a, b) in i1.values.iter().zip(&i2.values) {
                    dot += a * b;
                    n1 += a * a;
                    n2 += b * b;
                }
            }
        }
        let corr = dot / (n1.sqrt() * n2.sqrt());
        assert!(corr >= 0.95, "cycle-consistency correlation {corr}");
    }

    #[test]
    fn vfet_output_is_nearly_divergence_free() {
        // Gauge consistency of the discrete pipeline, measured as the RMS
        // of the spectral combination k·Ã (cycles per voxel, i.e. the
        // per-voxel divergence without the 2π angular factor) relative to
        // the RMS field magnitude.
        let cfg = PhantomConfig::reference_prism(64).unwrap();
        let truth = vector_potential(&cfg).unwrap();
        let angles = tilt_angles(-90.0, 90.0, 2.0);
        let ps = project_both_series(&truth, &angles, &angles).unwrap();
        let rec = vfet_reconstruct(&ps, &VfetOptions::default()).unwrap();
        let div = crate::fields::divergence_spectral(&rec).unwrap();
        let n = rec.grid.len() as f64;
        let rms_div = (div.values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let rms_a = ((0..rec.grid.len())
            .map(|i| {
                rec.ax.values[i].powi(2) + rec.ay.values[i].powi(2) + rec.az.values[i].powi(2)
            })
            .sum::<f64>()
            / n)
            .sqrt();
        let rel = rms_div / (2.0 * PI * rms_a);
        assert!(rel < 0.05, "relative spectral divergence {rel}");
    }
}
