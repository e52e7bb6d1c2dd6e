//! Voxel-grid containers and the differential / interpolation utilities
//! shared by the phantom, projector and reconstruction modules.
//!
//! Index order is x-fastest and is normative for file I/O and for the
//! coordinate-descent raster order: element `(i,j,k)` of an `(nx,ny,nz)`
//! grid lives at `i + nx*(j + ny*k)`. All field types are immutable values
//! once built; operations here are pure functions.

pub mod fft;

use crate::{Error, Result};
use fft::{fft3, freq, nyquist_bin, to_complex, Direction, C64};

/// A 3D voxel lattice with isotropic physical pitch in nanometers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Nanometers per voxel, identical along all three axes.
    pub pitch: f64,
}

impl Grid3 {
    pub fn new(nx: usize, ny: usize, nz: usize, pitch: f64) -> Result<Self> {
        if nx < 2 || ny < 2 || nz < 2 {
            return Err(Error::Config(format!(
                "grid dims must be >= 2, got {nx}x{ny}x{nz}"
            )));
        }
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::Config(format!("pitch must be positive, got {pitch}")));
        }
        Ok(Grid3 { nx, ny, nz, pitch })
    }

    pub fn cube(n: usize, pitch: f64) -> Result<Self> {
        Self::new(n, n, n, pitch)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny && k < self.nz);
        i + self.nx * (j + self.ny * k)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    /// Center voxel index used as the rotation / centering origin.
    pub fn center(&self) -> (usize, usize, usize) {
        (self.nx / 2, self.ny / 2, self.nz / 2)
    }

    /// Physical coordinate of voxel `(i,j,k)` relative to the grid center, nm.
    pub fn physical(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let c = self.center();
        [
            (i as f64 - c.0 as f64) * self.pitch,
            (j as f64 - c.1 as f64) * self.pitch,
            (k as f64 - c.2 as f64) * self.pitch,
        ]
    }
}

/// A scalar sample per voxel, stored x-fastest as `f64`.
#[derive(Clone, Debug)]
pub struct ScalarField3 {
    pub grid: Grid3,
    pub values: Vec<f64>,
}

impl ScalarField3 {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "value count {} does not match grid {}x{}x{}",
                values.len(),
                grid.nx,
                grid.ny,
                grid.nz
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Input("non-finite value in scalar field".into()));
        }
        Ok(ScalarField3 { grid, values })
    }

    pub fn zeros(grid: Grid3) -> Self {
        ScalarField3 {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid3, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for k in 0..grid.nz {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    values[grid.idx(i, j, k)] = f(i, j, k);
                }
            }
        }
        ScalarField3 { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.idx(i, j, k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Three scalar components on one shared grid.
#[derive(Clone, Debug)]
pub struct VectorField3 {
    pub grid: Grid3,
    pub ax: ScalarField3,
    pub ay: ScalarField3,
    pub az: ScalarField3,
}

impl VectorField3 {
    pub fn new(ax: ScalarField3, ay: ScalarField3, az: ScalarField3) -> Result<Self> {
        if ax.grid != ay.grid || ay.grid != az.grid {
            return Err(Error::Input("vector components on mismatched grids".into()));
        }
        Ok(VectorField3 {
            grid: ax.grid,
            ax,
            ay,
            az,
        })
    }

    pub fn zeros(grid: Grid3) -> Self {
        VectorField3 {
            grid,
            ax: ScalarField3::zeros(grid),
            ay: ScalarField3::zeros(grid),
            az: ScalarField3::zeros(grid),
        }
    }

    pub fn component(&self, c: usize) -> &ScalarField3 {
        match c {
            0 => &self.ax,
            1 => &self.ay,
            2 => &self.az,
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut ScalarField3 {
        match c {
            0 => &mut self.ax,
            1 => &mut self.ay,
            2 => &mut self.az,
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.ax.max_abs().max(self.ay.max_abs()).max(self.az.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.ax.values.iter().all(|v| v.is_finite())
            && self.ay.values.iter().all(|v| v.is_finite())
            && self.az.values.iter().all(|v| v.is_finite())
    }
}

/// A 2D image with square pixels, stored u-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Image2 {
    pub nu: usize,
    pub nv: usize,
    /// Nanometers per pixel.
    pub pitch: f64,
    pub values: Vec<f64>,
}

impl Image2 {
    pub fn new(nu: usize, nv: usize, pitch: f64, values: Vec<f64>) -> Result<Self> {
        if nu == 0 || nv == 0 {
            return Err(Error::Config("image dims must be positive".into()));
        }
        if values.len() != nu * nv {
            return Err(Error::Input(format!(
                "value count {} does not match image {nu}x{nv}",
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Input("non-finite value in image".into()));
        }
        Ok(Image2 {
            nu,
            nv,
            pitch,
            values,
        })
    }

    pub fn zeros(nu: usize, nv: usize, pitch: f64) -> Self {
        Image2 {
            nu,
            nv,
            pitch,
            values: vec![0.0; nu * nv],
        }
    }

    #[inline]
    pub fn idx(&self, u: usize, v: usize) -> usize {
        debug_assert!(u < self.nu && v < self.nv);
        u + self.nu * v
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.values[self.idx(u, v)]
    }
}

/// Trilinear interpolation of `field` at a point given in voxel units.
///
/// The valid domain is the lattice hull `[0, n-1]` along each axis (the
/// half-voxel skin between the hull and the grid's physical boundary is
/// intentionally outside the domain — there are no samples beyond the hull
/// to interpolate against). Out-of-domain points are a domain error;
/// callers that want zero padding wrap the call explicitly.
///
/// Exact at lattice points and for globally affine fields.
pub fn sample_trilinear(field: &ScalarField3, point: [f64; 3]) -> Result<f64> {
    let g = field.grid;
    let dims = [g.nx, g.ny, g.nz];
    for a in 0..3 {
        if !point[a].is_finite() || point[a] < 0.0 || point[a] > (dims[a] - 1) as f64 {
            return Err(Error::Input(format!(
                "sample point {:?} outside lattice hull [0,{}]x[0,{}]x[0,{}]",
                point,
                g.nx - 1,
                g.ny - 1,
                g.nz - 1
            )));
        }
    }
    let lo = |p: f64, n: usize| -> (usize, f64) {
        let f = p.floor();
        // Clamp so that points exactly on the upper face use the last cell.
        let i = (f as usize).min(n - 2);
        (i, p - i as f64)
    };
    let (i0, tx) = lo(point[0], g.nx);
    let (j0, ty) = lo(point[1], g.ny);
    let (k0, tz) = lo(point[2], g.nz);
    let v = |i, j, k| field.at(i, j, k);
    let c00 = v(i0, j0, k0) * (1.0 - tx) + v(i0 + 1, j0, k0) * tx;
    let c10 = v(i0, j0 + 1, k0) * (1.0 - tx) + v(i0 + 1, j0 + 1, k0) * tx;
    let c01 = v(i0, j0, k0 + 1) * (1.0 - tx) + v(i0 + 1, j0, k0 + 1) * tx;
    let c11 = v(i0, j0 + 1, k0 + 1) * (1.0 - tx) + v(i0 + 1, j0 + 1, k0 + 1) * tx;
    let c0 = c00 * (1.0 - ty) + c10 * ty;
    let c1 = c01 * (1.0 - ty) + c11 * ty;
    Ok(c0 * (1.0 - tz) + c1 * tz)
}

/// Trilinear sample with zero padding outside the lattice hull.
/// Convenience wrapper used by the real-space rotation oracles.
pub fn sample_trilinear_zero(field: &ScalarField3, point: [f64; 3]) -> f64 {
    let g = field.grid;
    let dims = [g.nx as f64, g.ny as f64, g.nz as f64];
    for a in 0..3 {
        if point[a] < 0.0 || point[a] > dims[a] - 1.0 {
            return 0.0;
        }
    }
    sample_trilinear(field, point).unwrap_or(0.0)
}

/// Spectral divergence: the inverse transform of
/// `i·2π·(fx·Ãx + fy·Ãy + fz·Ãz)` with frequencies in cycles per voxel,
/// so the result is a per-voxel derivative (divide by pitch for physical
/// units). The zero-frequency bin and the self-conjugate Nyquist planes of
/// even dims are set to zero (the multiplier is odd in k).
pub fn divergence_spectral(a: &VectorField3) -> Result<ScalarField3> {
    if !a.is_finite() {
        return Err(Error::Input("non-finite vector field".into()));
    }
    let g = a.grid;
    let dims = g.dims();
    let mut sx = to_complex(&a.ax.values);
    let mut sy = to_complex(&a.ay.values);
    let mut sz = to_complex(&a.az.values);
    fft3(&mut sx, dims, Direction::Forward);
    fft3(&mut sy, dims, Direction::Forward);
    fft3(&mut sz, dims, Direction::Forward);

    let tau = 2.0 * std::f64::consts::PI;
    let (qx, qy, qz) = (nyquist_bin(g.nx), nyquist_bin(g.ny), nyquist_bin(g.nz));
    let mut out = vec![C64::default(); g.len()];
    let mut idx = 0usize;
    for k in 0..g.nz {
        let fz = freq(k, g.nz);
        for j in 0..g.ny {
            let fy = freq(j, g.ny);
            for i in 0..g.nx {
                let fx = freq(i, g.nx);
                let nyq =
                    Some(i) == qx || Some(j) == qy || Some(k) == qz;
                if nyq || (i == 0 && j == 0 && k == 0) {
                    idx += 1;
                    continue;
                }
                let dot = sx[idx] * fx + sy[idx] * fy + sz[idx] * fz;
                out[idx] = C64::new(0.0, tau) * dot;
                idx += 1;
            }
        }
    }
    fft3(&mut out, dims, Direction::Inverse);
    ScalarField3::new(g, out.iter().map(|c| c.re).collect())
}

/// Finite-difference curl: central differences in the interior, one-sided
/// at the boundary faces. Units of the input per voxel pitch.
pub fn curl_fd(a: &VectorField3) -> Result<VectorField3> {
    let g = a.grid;
    if g.nx < 3 || g.ny < 3 || g.nz < 3 {
        return Err(Error::Config("curl needs at least 3 voxels per axis".into()));
    }
    // d(field)/d(axis) at (i,j,k), per voxel.
    let diff = |f: &ScalarField3, i: usize, j: usize, k: usize, axis: usize| -> f64 {
        let n = [g.nx, g.ny, g.nz][axis];
        let p = [i, j, k][axis];
        let get = |q: usize| {
            let mut c = [i, j, k];
            c[axis] = q;
            f.at(c[0], c[1], c[2])
        };
        if p == 0 {
            get(1) - get(0)
        } else if p == n - 1 {
            get(n - 1) - get(n - 2)
        } else {
            0.5 * (get(p + 1) - get(p - 1))
        }
    };
    let mut bx = ScalarField3::zeros(g);
    let mut by = ScalarField3::zeros(g);
    let mut bz = ScalarField3::zeros(g);
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let idx = g.idx(i, j, k);
                bx.values[idx] = diff(&a.az, i, j, k, 1) - diff(&a.ay, i, j, k, 2);
                by.values[idx] = diff(&a.ax, i, j, k, 2) - diff(&a.az, i, j, k, 0);
                bz.values[idx] = diff(&a.ay, i, j, k, 0) - diff(&a.ax, i, j, k, 1);
            }
        }
    }
    VectorField3::new(bx, by, bz)
}
