//! Scalar 2D MAP reconstruction.
//!
//! Each outer iteration refreshes the error sinogram once, applies half of
//! its filtered back projection directly to the iterate and carries the
//! other half into the data anchor of the raster ICD sweep:
//!
//! ```text
//! e ← y − Hu
//! u ← u + ½·Q(e)          (consistency step, Q = ramp-filtered BP)
//! w ← u + ½·Q(e)          (residual-corrected data anchor)
//! u_i ← (w_i + 2Σ b̃·u_j)/(1 + 2Σ b̃)   for every pixel, x fastest
//! ```
//!
//! At a fixed point the residual correction vanishes and the sweep
//! stationarity is exactly the MAP balance between the preconditioned
//! data gradient and the surrogate prior gradient. The split relaxation
//! keeps the update non-expansive for this discrete operator pair (the
//! unit-step correction measurably overshoots and oscillates).

use super::{CostTrace, InitMode, ReconConfig};
use crate::analytic::{fbp2d, FilterSpec};
use crate::fields::Image2;
use crate::prior::{neighbor_weights, NeighborWeights, PriorEval, QggmrfParams, StencilDim};
use crate::projector::{project_sinogram, Sinogram2};
use crate::{Error, Result};

/// Fraction of the residual back projection applied directly to the
/// iterate; the remainder extrapolates the sweep anchor.
const CONSISTENCY_RELAX: f64 = 0.5;

/// Closed-form pixel update: `(v_i + 2Σ b̃·u_j) / (1 + 2Σ b̃)` with the
/// surrogate coefficients computed from the current neighbor differences.
/// `v_i` is the pixel's data-anchor value.
pub fn icd_update_scalar(
    i: (usize, usize),
    v_i: f64,
    u: &Image2,
    weights: &NeighborWeights,
    params: &QggmrfParams,
) -> f64 {
    let eval = PriorEval::new(params);
    pixel_update(i, v_i, u, weights, &eval)
}

#[inline]
fn pixel_update(
    i: (usize, usize),
    v_i: f64,
    u: &Image2,
    weights: &NeighborWeights,
    eval: &PriorEval,
) -> f64 {
    let ui = u.at(i.0, i.1);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((nj, nk, _), b) in weights.at((i.0, i.1, 0), (u.nu, u.nv, 1)) {
        let uj = u.at(nj, nk);
        let bt = b * eval.coeff(ui - uj);
        num += bt * uj;
        den += bt;
    }
    (v_i + 2.0 * num) / (1.0 + 2.0 * den)
}

fn prior_cost(u: &Image2, weights: &NeighborWeights, eval: &PriorEval) -> f64 {
    let (nu, nv) = (u.nu, u.nv);
    let mut prior = 0.0;
    for v in 0..nv {
        for x in 0..nu {
            let ui = u.at(x, v);
            for ((nj, nk, _), b) in weights.at((x, v, 0), (nu, nv, 1)) {
                prior += 0.5 * b * eval.rho(ui - u.at(nj, nk));
            }
        }
    }
    prior
}

/// MAP objective `½‖y − Hu‖² + Σ b·ρ(u_i − u_j)`, the prior summed over
/// each unordered neighbor pair once (half-weight ordered sum).
pub fn map_cost_2d(
    u: &Image2,
    sino: &Sinogram2,
    weights: &NeighborWeights,
    params: &QggmrfParams,
) -> Result<f64> {
    let est = project_sinogram(u, &sino.angles)?;
    if est.data.len() != sino.data.len() {
        return Err(Error::Input("sinogram shape mismatch".into()));
    }
    let data: f64 = sino
        .data
        .iter()
        .zip(&est.data)
        .map(|(y, e)| (y - e) * (y - e))
        .sum();
    let eval = PriorEval::new(params);
    Ok(0.5 * data + prior_cost(u, weights, &eval))
}

/// MAP reconstruction of a 2D image from its sinogram. Returns the
/// estimate and the per-iteration objective trace.
pub fn mbir2d(sino: &Sinogram2, config: &ReconConfig) -> Result<(Image2, CostTrace)> {
    config.validate()?;
    if sino.is_empty() {
        return Err(Error::Config("empty sinogram".into()));
    }
    let n = sino.n;
    let filter = FilterSpec::ram_lak_mean_preserving();

    let mut u = match config.init {
        InitMode::Zero => Image2::zeros(n, n, sino.pitch),
        InitMode::Fbp => fbp2d(sino, &filter)?,
        InitMode::Vfet => {
            return Err(Error::Config(
                "2D reconstruction cannot initialize from a 3D pipeline".into(),
            ))
        }
    };

    let weights = neighbor_weights(StencilDim::Two);
    let eval = PriorEval::new(&config.prior);
    let mut trace = CostTrace::default();
    let mut anchor = vec![0.0f64; n * n];

    let cost_of = |est: &Sinogram2, u: &Image2| -> f64 {
        let data: f64 = sino
            .data
            .iter()
            .zip(&est.data)
            .map(|(y, e)| (y - e) * (y - e))
            .sum();
        0.5 * data + prior_cost(u, &weights, &eval)
    };

    let mut est = project_sinogram(&u, &sino.angles)?;
    let mut prev_cost = cost_of(&est, &u);
    // Step scale; halved whenever a full step would raise the objective.
    let mut scale = 1.0f64;

    for _ in 0..config.max_iters {
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
        let corr = fbp2d(&residual, &filter)?;
        let saved = u.values.clone();
        let mut accepted = false;
        for _attempt in 0..6 {
            u.values.copy_from_slice(&saved);
            for ((uv, av), cv) in u.values.iter_mut().zip(anchor.iter_mut()).zip(&corr.values)
            {
                *uv += scale * CONSISTENCY_RELAX * cv;
                *av = *uv + scale * (1.0 - CONSISTENCY_RELAX) * cv;
            }
            for y in 0..n {
                for x in 0..n {
                    let new = pixel_update((x, y), anchor[x + n * y], &u, &weights, &eval);
                    u.values[x + n * y] = new;
                }
            }
            let est_new = project_sinogram(&u, &sino.angles)?;
            let cost = cost_of(&est_new, &u);
            if cost <= prev_cost * (1.0 + 1e-12) {
                est = est_new;
                trace.push(cost);
                let decrease = (prev_cost - cost) / prev_cost.abs().max(1e-300);
                prev_cost = cost;
                accepted = true;
                if config.cost_tol > 0.0 && decrease < config.cost_tol {
                    trace.converged = true;
                    return Ok((u, trace));
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // no acceptable step at the smallest scale: hold the state
            u.values.copy_from_slice(&saved);
            trace.push(prev_cost);
        }
    }
    Ok((u, trace))
}
