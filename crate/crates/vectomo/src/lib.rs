//! Vector-field electron tomography toolkit.
//!
//! Reconstructs the three components of a 3D magnetic vector potential from
//! two orthogonal tilt series of phase projections. Two reconstruction
//! families are provided:
//!
//! * an analytic pipeline — filtered back projection with gauge-constraint
//!   kernels that split each phase image into per-component contributions
//!   ([`analytic::vfet_reconstruct`]), plus the usual 2D scalar methods
//!   (BP/FBP/SIRT) for reference studies;
//! * a model-based pipeline — MAP estimation with a q-generalized Gaussian
//!   Markov random field prior, minimized by iterative coordinate descent
//!   ([`mbir::mbir2d`], [`mbir::mbir3d`]).
//!
//! Supporting modules supply voxel-grid containers and spectral calculus
//! ([`fields`]), analytic phantoms ([`phantom`]), Fourier-slice forward
//! models and their exact adjoints ([`projector`]), error metrics
//! ([`metrics`]), binary file formats ([`io`]), artifact rendering
//! ([`render`]) and the command-line front end ([`cli`]).
//!
//! The `examples/` directory of this crate walks through every major
//! capability; `cargo run --example scalar_pipeline` is a good place to
//! start.

pub mod analytic;
pub mod cli;
pub mod fields;
pub mod io;
pub mod mbir;
pub mod metrics;
pub mod phantom;
pub mod prior;
pub mod projector;
pub mod render;

mod error;

pub use error::{Error, Result};

/// Initialize the global worker pool from the `VECTOMO_THREADS` environment
/// variable. Call once at process start; later calls are no-ops. Without the
/// variable the pool uses one thread per core.
pub fn init_threads() {
    let threads = std::env::var("VECTOMO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    if let Some(n) = threads {
        // Ignore the error if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
