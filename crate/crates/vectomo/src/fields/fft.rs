//! Discrete Fourier transforms and frequency-grid helpers.
//!
//! Conventions used throughout the crate:
//!
//! * forward transform: `X[m] = Σ_n x[n]·exp(-i2π m·n/N)`, unnormalized;
//! * inverse transform carries the `1/N` factor, so `inverse(forward(x)) = x`;
//! * frequencies are reported in cycles per sample with standard wraparound
//!   ordering: bin `m` holds `m/N` for `m < ⌈N/2⌉` and `(m-N)/N` above
//!   (for even `N` the bin at `N/2` is the negative Nyquist frequency);
//! * physical frequencies in cycles/nm are obtained by dividing by the
//!   grid pitch.
//!
//! Real-space storage is x-fastest: element `(i,j,k)` of an `(nx,ny,nz)`
//! volume lives at `i + nx*(j + ny*k)`. Spectra use the same layout with
//! bin indices in place of sample indices.
//!
//! Odd-in-k spectral multipliers (derivatives, cross products with k) are
//! not Hermitian on the self-conjugate Nyquist planes of even-sized grids;
//! operators built from such multipliers zero those planes so that real
//! fields stay real. See [`nyquist_bin`].

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

pub type C64 = Complex<f64>;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Forward,
    Inverse,
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap();
    match dir {
        Direction::Forward => p.plan_fft_forward(n),
        Direction::Inverse => p.plan_fft_inverse(n),
    }
}

/// Wraparound frequency of bin `m` in cycles per sample.
#[inline]
pub fn freq(m: usize, n: usize) -> f64 {
    if m < n.div_ceil(2) {
        m as f64 / n as f64
    } else {
        (m as f64 - n as f64) / n as f64
    }
}

/// Signed bin index of bin `m`: `freq(m,n) * n`, exact in integer form.
#[inline]
pub fn signed_bin(m: usize, n: usize) -> f64 {
    if m < n.div_ceil(2) {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// The self-conjugate Nyquist bin of an even length, if any.
#[inline]
pub fn nyquist_bin(n: usize) -> Option<usize> {
    (n % 2 == 0).then_some(n / 2)
}

/// In-place 1D transform. `data.len()` must equal the planned length.
pub fn fft1(data: &mut [C64], dir: Direction) {
    let n = data.len();
    let fft = plan(n, dir);
    fft.process(data);
    if dir == Direction::Inverse {
        let s = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// In-place 2D transform of a `(nu, nv)` u-fastest buffer.
pub fn fft2(data: &mut [C64], nu: usize, nv: usize, dir: Direction) {
    assert_eq!(data.len(), nu * nv);
    let fu = plan(nu, dir);
    let fv = plan(nv, dir);
    // rows (contiguous in u)
    for row in data.chunks_exact_mut(nu) {
        fu.process(row);
    }
    // columns (stride nu)
    let mut line = vec![C64::default(); nv];
    for i in 0..nu {
        for j in 0..nv {
            line[j] = data[i + nu * j];
        }
        fv.process(&mut line);
        for j in 0..nv {
            data[i + nu * j] = line[j];
        }
    }
    if dir == Direction::Inverse {
        let s = 1.0 / (nu * nv) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// In-place 3D transform of an `(nx, ny, nz)` x-fastest buffer.
pub fn fft3(data: &mut [C64], dims: (usize, usize, usize), dir: Direction) {
    let (nx, ny, nz) = dims;
    assert_eq!(data.len(), nx * ny * nz);
    let fx = plan(nx, dir);
    let fy = plan(ny, dir);
    let fz = plan(nz, dir);

    for line in data.chunks_exact_mut(nx) {
        fx.process(line);
    }

    let mut line = vec![C64::default(); ny.max(nz)];
    for slab in data.chunks_exact_mut(nx * ny) {
        for i in 0..nx {
            for j in 0..ny {
                line[j] = slab[i + nx * j];
            }
            fy.process(&mut line[..ny]);
            for j in 0..ny {
                slab[i + nx * j] = line[j];
            }
        }
    }

    let plane = nx * ny;
    for p in 0..plane {
        for k in 0..nz {
            line[k] = data[p + plane * k];
        }
        fz.process(&mut line[..nz]);
        for k in 0..nz {
            data[p + plane * k] = line[k];
        }
    }

    if dir == Direction::Inverse {
        let s = 1.0 / (nx * ny * nz) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Circularly shift a buffer so that element `(s.0, s.1, s.2)` of the input
/// moves to the origin (i.e. a shift by `-s` in each axis, modulo dims).
/// Used to re-center compactly supported volumes before interpolating their
/// spectra; the matching inverse shift is `circshift3` with the same `s` on
/// the opposite side of the transform chain.
pub fn circshift3_to_origin<T: Copy + Default>(
    data: &[T],
    dims: (usize, usize, usize),
    s: (usize, usize, usize),
) -> Vec<T> {
    let (nx, ny, nz) = dims;
    assert_eq!(data.len(), nx * ny * nz);
    let mut out = vec![T::default(); data.len()];
    for k in 0..nz {
        let ks = (k + s.2) % nz;
        for j in 0..ny {
            let js = (j + s.1) % ny;
            let src_row = nx * (js + ny * ks);
            let dst_row = nx * (j + ny * k);
            for i in 0..nx {
                out[dst_row + i] = data[src_row + (i + s.0) % nx];
            }
        }
    }
    out
}

/// Inverse of [`circshift3_to_origin`]: moves the origin back to `(s.0, s.1, s.2)`.
pub fn circshift3_from_origin<T: Copy + Default>(
    data: &[T],
    dims: (usize, usize, usize),
    s: (usize, usize, usize),
) -> Vec<T> {
    let (nx, ny, nz) = dims;
    let inv = (
        (nx - s.0 % nx) % nx,
        (ny - s.1 % ny) % ny,
        (nz - s.2 % nz) % nz,
    );
    circshift3_to_origin(data, dims, inv)
}

/// 2D counterparts of the volume shifts.
pub fn circshift2_to_origin<T: Copy + Default>(
    data: &[T],
    nu: usize,
    nv: usize,
    s: (usize, usize),
) -> Vec<T> {
    circshift3_to_origin(data, (nu, nv, 1), (s.0, s.1, 0))
}

pub fn circshift2_from_origin<T: Copy + Default>(
    data: &[T],
    nu: usize,
    nv: usize,
    s: (usize, usize),
) -> Vec<T> {
    circshift3_from_origin(data, (nu, nv, 1), (s.0, s.1, 0))
}

/// Lift a real buffer into complex.
pub fn to_complex(data: &[f64]) -> Vec<C64> {
    data.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// Real parts of a complex buffer.
pub fn re(data: &[C64]) -> Vec<f64> {
    data.iter().map(|c| c.re).collect()
}

/// Largest |imaginary| over largest |value|; 0 for an all-zero buffer.
pub fn imag_residue(data: &[C64]) -> f64 {
    let mut max_im = 0.0f64;
    let mut max_abs = 0.0f64;
    for c in data {
        max_im = max_im.max(c.im.abs());
        max_abs = max_abs.max(c.norm_sqr());
    }
    let max_abs = max_abs.sqrt();
    if max_abs == 0.0 {
        0.0
    } else {
        max_im / max_abs
    }
}
