//! Ground-truth generators: magnetized nanoparticle phantoms with analytic
//! vector potentials, and the 2D Shepp-Logan phantom for scalar studies.
//!
//! The vector potential of a magnetized particle is built in reciprocal
//! space from the shape-function relation
//!
//! ```text
//! Ã(k) = -i·B0 · (m̃(k) × k) / k²
//! ```
//!
//! where `m̃` is the spectrum of the (shape-masked) magnetization direction
//! field and `k` is in cycles per voxel. For a uniformly magnetized particle
//! `m̃(k) = D(k)·m̂ / pitch³` with `D` the analytic shape amplitude, so the
//! uniform case is evaluated without any rasterization error; vortex states
//! are rasterized and transformed. The construction is divergence-free by
//! the triple-product identity `k·(m̃ × k) = 0`, which is what the Coulomb
//! gauge requires of the reconstruction modules downstream.

use crate::fields::fft::{
    fft3, freq, imag_residue, nyquist_bin, to_complex, Direction, C64,
};
use crate::fields::{Grid3, Image2, ScalarField3, VectorField3};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Geometric primitive carried by a phantom. Dimensions and center are in
/// nanometers; the center is measured from the grid center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapeKind {
    /// Rectangular prism with the given half-extents along x, y, z.
    Prism { half_extents: [f64; 3] },
    /// Circular cylinder with axis along z.
    Cylinder { radius: f64, half_height: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// Offset of the shape center from the grid center, nm.
    pub center: [f64; 3],
}

impl ShapeSpec {
    pub fn prism(extents_nm: [f64; 3]) -> Self {
        ShapeSpec {
            kind: ShapeKind::Prism {
                half_extents: [extents_nm[0] / 2.0, extents_nm[1] / 2.0, extents_nm[2] / 2.0],
            },
            center: [0.0; 3],
        }
    }

    pub fn cylinder(diameter_nm: f64, height_nm: f64) -> Self {
        ShapeSpec {
            kind: ShapeKind::Cylinder {
                radius: diameter_nm / 2.0,
                half_height: height_nm / 2.0,
            },
            center: [0.0; 3],
        }
    }

    pub fn with_center(mut self, center_nm: [f64; 3]) -> Self {
        self.center = center_nm;
        self
    }

    /// Volume of the shape, nm³.
    pub fn volume(&self) -> f64 {
        match self.kind {
            ShapeKind::Prism { half_extents: h } => 8.0 * h[0] * h[1] * h[2],
            ShapeKind::Cylinder {
                radius,
                half_height,
            } => PI * radius * radius * 2.0 * half_height,
        }
    }

    /// Half-extents of the axis-aligned bounding box, nm.
    fn bbox_half(&self) -> [f64; 3] {
        match self.kind {
            ShapeKind::Prism { half_extents } => half_extents,
            ShapeKind::Cylinder {
                radius,
                half_height,
            } => [radius, radius, half_height],
        }
    }

    fn validate(&self) -> Result<()> {
        let h = self.bbox_half();
        if h.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("shape extents must be positive".into()));
        }
        Ok(())
    }

    /// Whether the physical point `r` (nm, relative to the grid center)
    /// lies inside the shape.
    pub fn contains(&self, r: [f64; 3]) -> bool {
        let d = [
            r[0] - self.center[0],
            r[1] - self.center[1],
            r[2] - self.center[2],
        ];
        match self.kind {
            ShapeKind::Prism { half_extents: h } => {
                d[0].abs() <= h[0] && d[1].abs() <= h[1] && d[2].abs() <= h[2]
            }
            ShapeKind::Cylinder {
                radius,
                half_height,
            } => d[0].hypot(d[1]) <= radius && d[2].abs() <= half_height,
        }
    }
}

/// Chirality of an in-plane vortex state, viewed from +z.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chirality {
    Ccw,
    Cw,
}

/// Magnetization state of the particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MagnetizationKind {
    /// Uniform magnetization along a unit direction.
    Uniform { direction: [f64; 3] },
    /// Rigid azimuthal vortex about the shape's z axis; the on-axis core
    /// voxel(s) are zeroed.
    Vortex { chirality: Chirality },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagnetizationSpec {
    pub kind: MagnetizationKind,
    /// Saturation induction, tesla.
    pub b0: f64,
}

impl MagnetizationSpec {
    pub fn uniform(direction: [f64; 3], b0: f64) -> Result<Self> {
        let n = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "magnetization direction must be unit length, |m| = {n}"
            )));
        }
        if !(b0 > 0.0) {
            return Err(Error::Config("b0 must be positive".into()));
        }
        Ok(MagnetizationSpec {
            kind: MagnetizationKind::Uniform { direction },
            b0,
        })
    }

    pub fn vortex(chirality: Chirality, b0: f64) -> Result<Self> {
        if !(b0 > 0.0) {
            return Err(Error::Config("b0 must be positive".into()));
        }
        Ok(MagnetizationSpec {
            kind: MagnetizationKind::Vortex { chirality },
            b0,
        })
    }
}

/// A complete phantom description: grid, shape and magnetization.
#[derive(Clone, Copy, Debug)]
pub struct PhantomConfig {
    pub grid: Grid3,
    pub shape: ShapeSpec,
    pub magnetization: MagnetizationSpec,
}

impl PhantomConfig {
    pub fn new(grid: Grid3, shape: ShapeSpec, magnetization: MagnetizationSpec) -> Result<Self> {
        shape.validate()?;
        // The shape must fit with at least a two-voxel margin so that its
        // potential decays inside the periodic box.
        let h = shape.bbox_half();
        let half_extent = [
            grid.nx as f64 / 2.0 * grid.pitch,
            grid.ny as f64 / 2.0 * grid.pitch,
            grid.nz as f64 / 2.0 * grid.pitch,
        ];
        for a in 0..3 {
            if shape.center[a].abs() + h[a] > half_extent[a] - 2.0 * grid.pitch {
                return Err(Error::Config(format!(
                    "shape exceeds grid along axis {a}: |center|+half {} vs limit {}",
                    shape.center[a].abs() + h[a],
                    half_extent[a] - 2.0 * grid.pitch
                )));
            }
        }
        Ok(PhantomConfig {
            grid,
            shape,
            magnetization,
        })
    }

    /// Uniformly magnetized 50x50x30 nm prism, in-plane direction 30° from
    /// x, B0 = 1 T, on an n³ grid spanning 96 nm.
    pub fn reference_prism(n: usize) -> Result<Self> {
        let grid = Grid3::cube(n, 96.0 / n as f64)?;
        let shape = ShapeSpec::prism([50.0, 50.0, 30.0]);
        let m = MagnetizationSpec::uniform([(PI / 6.0).cos(), (PI / 6.0).sin(), 0.0], 1.0)?;
        PhantomConfig::new(grid, shape, m)
    }

    /// Counter-clockwise vortex disk, 60 nm diameter, 30 nm height,
    /// B0 = 1 T, on an n³ grid spanning 96 nm.
    pub fn reference_cylinder(n: usize) -> Result<Self> {
        let grid = Grid3::cube(n, 96.0 / n as f64)?;
        let shape = ShapeSpec::cylinder(60.0, 30.0);
        let m = MagnetizationSpec::vortex(Chirality::Ccw, 1.0)?;
        PhantomConfig::new(grid, shape, m)
    }
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-12 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Analytic shape amplitude `D(k) = ∫_shape exp(-i2πk·r) d³r` in nm³,
/// sampled on the grid's wraparound frequency lattice (physical frequencies,
/// cycles/nm). Positions are measured from the grid center, so an off-center
/// shape contributes a linear phase. `D(0)` equals the shape volume.
pub fn shape_amplitude(shape: &ShapeSpec, grid: &Grid3) -> Result<Vec<C64>> {
    shape.validate()?;
    let (nx, ny, nz) = grid.dims();
    let mut out = vec![C64::default(); grid.len()];
    let p = grid.pitch;
    let mut idx = 0usize;
    for k in 0..nz {
        let fz = freq(k, nz) / p;
        for j in 0..ny {
            let fy = freq(j, ny) / p;
            for i in 0..nx {
                let fx = freq(i, nx) / p;
                let mag = match shape.kind {
                    ShapeKind::Prism { half_extents: h } => {
                        8.0 * h[0] * h[1] * h[2]
                            * sinc(2.0 * h[0] * fx)
                            * sinc(2.0 * h[1] * fy)
                            * sinc(2.0 * h[2] * fz)
                    }
                    ShapeKind::Cylinder {
                        radius,
                        half_height,
                    } => {
                        let kr = fx.hypot(fy);
                        let radial = if kr < 1e-12 {
                            PI * radius * radius
                        } else {
                            radius * libm::j1(2.0 * PI * radius * kr) / kr
                        };
                        radial * 2.0 * half_height * sinc(2.0 * half_height * fz)
                    }
                };
                let phase = -2.0
                    * PI
                    * (fx * shape.center[0] + fy * shape.center[1] + fz * shape.center[2]);
                out[idx] = C64::from_polar(1.0, phase) * mag;
                idx += 1;
            }
        }
    }
    Ok(out)
}

/// Rasterized magnetization direction field `m(r)` on the voxel lattice:
/// `m̂` inside the shape for the uniform case, the unit azimuthal field for
/// the vortex case (zero on the core axis), zero outside the shape.
pub fn rasterize_magnetization(config: &PhantomConfig) -> VectorField3 {
    let g = config.grid;
    let mut m = VectorField3::zeros(g);
    let core = 0.5 * g.pitch;
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let r = g.physical(i, j, k);
                if !config.shape.contains(r) {
                    continue;
                }
                let idx = g.idx(i, j, k);
                match config.magnetization.kind {
                    MagnetizationKind::Uniform { direction } => {
                        m.ax.values[idx] = direction[0];
                        m.ay.values[idx] = direction[1];
                        m.az.values[idx] = direction[2];
                    }
                    MagnetizationKind::Vortex { chirality } => {
                        let dx = r[0] - config.shape.center[0];
                        let dy = r[1] - config.shape.center[1];
                        let rho = dx.hypot(dy);
                        if rho < core {
                            continue; // sharp-core voxel stays zero
                        }
                        let s = match chirality {
                            Chirality::Ccw => 1.0,
                            Chirality::Cw => -1.0,
                        };
                        m.ax.values[idx] = -s * dy / rho;
                        m.ay.values[idx] = s * dx / rho;
                    }
                }
            }
        }
    }
    m
}

/// Spectrum of the shape-masked magnetization direction field, in the
/// unnormalized-DFT convention (what `fft3` of the rasterized field yields,
/// with the shape placed at the grid's center voxel).
///
/// The uniform case is exact: `D(k)·m̂ / pitch³` times the center-placement
/// phase. The vortex case transforms the rasterized azimuthal field.
pub fn magnetization_spectrum(config: &PhantomConfig) -> Result<[Vec<C64>; 3]> {
    let g = config.grid;
    match config.magnetization.kind {
        MagnetizationKind::Uniform { direction } => {
            let d = shape_amplitude(&config.shape, &g)?;
            let s = 1.0 / g.pitch.powi(3);
            let c = g.center();
            let (nx, ny, nz) = g.dims();
            // Linear phase that moves the shape from index origin to the
            // grid center, matching the rasterized layout.
            let mut placed = vec![C64::default(); g.len()];
            let mut idx = 0usize;
            for k in 0..nz {
                let fz = freq(k, nz);
                for j in 0..ny {
                    let fy = freq(j, ny);
                    for i in 0..nx {
                        let fx = freq(i, nx);
                        let ph = -2.0
                            * PI
                            * (fx * c.0 as f64 + fy * c.1 as f64 + fz * c.2 as f64);
                        placed[idx] = d[idx] * s * C64::from_polar(1.0, ph);
                        idx += 1;
                    }
                }
            }
            let mk = |cmp: f64| placed.iter().map(|&v| v * cmp).collect::<Vec<C64>>();
            Ok([mk(direction[0]), mk(direction[1]), mk(direction[2])])
        }
        MagnetizationKind::Vortex { .. } => {
            let m = rasterize_magnetization(config);
            let dims = g.dims();
            let mut mx = to_complex(&m.ax.values);
            let mut my = to_complex(&m.ay.values);
            let mut mz = to_complex(&m.az.values);
            fft3(&mut mx, dims, Direction::Forward);
            fft3(&mut my, dims, Direction::Forward);
            fft3(&mut mz, dims, Direction::Forward);
            Ok([mx, my, mz])
        }
    }
}

/// Analytic magnetic vector potential of the configured particle.
///
/// Evaluates `Ã(k) = -i·B0·(m̃(k) × k)/k²` with `k` in cycles per voxel,
/// zeroes the k = 0 bin (the mean of A is not gauge-observable) and the
/// self-conjugate Nyquist planes (odd multiplier), inverse transforms and
/// returns the real part. Construction fails if the imaginary residue
/// exceeds 1e-10 of the field magnitude.
pub fn vector_potential(config: &PhantomConfig) -> Result<VectorField3> {
    let g = config.grid;
    let dims = g.dims();
    let m = magnetization_spectrum(config)?;
    let b0 = config.magnetization.b0;
    let (qx, qy, qz) = (nyquist_bin(g.nx), nyquist_bin(g.ny), nyquist_bin(g.nz));

    let mut ax = vec![C64::default(); g.len()];
    let mut ay = vec![C64::default(); g.len()];
    let mut az = vec![C64::default(); g.len()];
    let mut idx = 0usize;
    for k in 0..g.nz {
        let fz = freq(k, g.nz);
        for j in 0..g.ny {
            let fy = freq(j, g.ny);
            for i in 0..g.nx {
                let fx = freq(i, g.nx);
                let k2 = fx * fx + fy * fy + fz * fz;
                let nyq = Some(i) == qx || Some(j) == qy || Some(k) == qz;
                if k2 == 0.0 || nyq {
                    idx += 1;
                    continue;
                }
                // -i*B0/k^2 * (m x k)
                let c = C64::new(0.0, -b0 / k2);
                ax[idx] = c * (m[1][idx] * fz - m[2][idx] * fy);
                ay[idx] = c * (m[2][idx] * fx - m[0][idx] * fz);
                az[idx] = c * (m[0][idx] * fy - m[1][idx] * fx);
                idx += 1;
            }
        }
    }
    fft3(&mut ax, dims, Direction::Inverse);
    fft3(&mut ay, dims, Direction::Inverse);
    fft3(&mut az, dims, Direction::Inverse);

    for (name, buf) in [("ax", &ax), ("ay", &ay), ("az", &az)] {
        let res = imag_residue(buf);
        if res > 1e-10 {
            return Err(Error::Input(format!(
                "vector potential {name} has imaginary residue {res:.3e}"
            )));
        }
    }

    VectorField3::new(
        ScalarField3::new(g, ax.iter().map(|c| c.re).collect())?,
        ScalarField3::new(g, ay.iter().map(|c| c.re).collect())?,
        ScalarField3::new(g, az.iter().map(|c| c.re).collect())?,
    )
}

/// The ten-ellipse table of the standard high-contrast Shepp-Logan head
/// phantom: (amplitude, a, b, x0, y0, rotation°). Summed values lie in
/// [0, 1] with the skull ring at 1 and the background exactly 0.
pub const SHEPP_LOGAN_ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
];

/// Shepp-Logan head phantom on an n×n grid, sampled at pixel centers of
/// [-1,1]². Row index v maps to ascending y. Pixel pitch is reported as 1.
pub fn shepp_logan(n: usize) -> Result<Image2> {
    if n < 16 {
        return Err(Error::Config(format!("phantom size {n} too small, need >= 16")));
    }
    let mut values = vec![0.0f64; n * n];
    let step = 2.0 / n as f64;
    for v in 0..n {
        let y = -1.0 + (v as f64 + 0.5) * step;
        for u in 0..n {
            let x = -1.0 + (u as f64 + 0.5) * step;
            let mut sum = 0.0;
            for &(amp, a, b, x0, y0, phi_deg) in &SHEPP_LOGAN_ELLIPSES {
                let phi = phi_deg.to_radians();
                let (st, ct) = phi.sin_cos();
                let dx = x - x0;
                let dy = y - y0;
                let xr = dx * ct + dy * st;
                let yr = -dx * st + dy * ct;
                if (xr / a).powi(2) + (yr / b).powi(2) <= 1.0 {
                    sum += amp;
                }
            }
            // The decimal amplitudes cancel exactly on paper but leave
            // ~1e-17 residue in binary; keep the advertised [0,1] range.
            values[u + n * v] = sum.clamp(0.0, 1.0);
        }
    }
    Image2::new(n, n, 1.0, values)
}
