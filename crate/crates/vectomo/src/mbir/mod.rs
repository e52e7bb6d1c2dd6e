//! MAP reconstruction by iterative coordinate descent, for 2D scalar
//! sinograms and for 3D vector potentials from two tilt series.
//!
//! Both drivers share the same outer structure: a data-anchored ICD sweep
//! over every unknown using the quadratic surrogate of the q-GGMRF prior,
//! followed by a residual-projection consistency update through the
//! ramp-filtered back projection (the approximate inverse of the forward
//! model; see [`crate::analytic`]). The error sinogram is refreshed once
//! per outer iteration, after all unknowns have been updated — not per
//! pixel — which is what makes the Fourier-slice forward model usable
//! inside the loop.
//!
//! The per-iteration cost (data misfit plus prior) is recorded in a
//! [`CostTrace`]; the data term is evaluated at the post-sweep state whose
//! forward projection the iteration computes anyway.

mod scalar;
mod vector;

pub use scalar::{icd_update_scalar, map_cost_2d, mbir2d};
pub use vector::{icd_update_vector, map_cost_3d, mbir3d, Mbir3dOptions};

use crate::prior::QggmrfParams;
use crate::{Error, Result};

/// Initialization of the iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    Zero,
    /// Filtered back projection of the data (2D driver).
    Fbp,
    /// Gauge-constrained filtered back projection of the data (3D driver).
    Vfet,
}

/// Iteration and convergence controls shared by both drivers.
#[derive(Clone, Copy, Debug)]
pub struct ReconConfig {
    pub prior: QggmrfParams,
    pub max_iters: usize,
    /// Relative per-iteration cost decrease below which the run stops.
    /// Zero disables the early stop.
    pub cost_tol: f64,
    pub init: InitMode,
    /// Retained for interface stability; the drivers are sequential and
    /// bitwise deterministic regardless.
    pub deterministic: bool,
}

impl ReconConfig {
    /// Defaults of the bundled 2D scalar study.
    pub fn scalar() -> Self {
        ReconConfig {
            prior: QggmrfParams::scalar_study(),
            max_iters: 35,
            cost_tol: 1e-6,
            init: InitMode::Fbp,
            deterministic: true,
        }
    }

    /// Defaults of the bundled 3D vector studies.
    pub fn vector() -> Self {
        ReconConfig {
            prior: QggmrfParams::vector_study(),
            max_iters: 35,
            cost_tol: 1e-6,
            init: InitMode::Vfet,
            deterministic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.cost_tol >= 0.0) {
            return Err(Error::Config("cost_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-iteration objective values of one reconstruction run.
#[derive(Clone, Debug, Default)]
pub struct CostTrace {
    pub cost: Vec<f64>,
    pub converged: bool,
    pub iterations_run: usize,
}

impl CostTrace {
    pub(crate) fn push(&mut self, value: f64) {
        self.cost.push(value);
        self.iterations_run = self.cost.len();
    }

    /// Whether the trace is non-increasing within the given relative slack.
    pub fn is_monotone(&self, rel_tol: f64) -> bool {
        self.cost
            .windows(2)
            .all(|w| w[1] <= w[0] + rel_tol * w[0].abs().max(1e-300))
    }
}
