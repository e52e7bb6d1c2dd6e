//! Vector 3D MAP reconstruction from two tilt series.
//!
//! State: the three vector-potential components on a cubic grid. The data
//! anchor F is the gauge-constrained filtered back projection of the
//! measured phases; each iteration sweeps every voxel in raster order,
//! updating the three components simultaneously from their pre-update
//! neighborhood, then forward-projects the new estimate, gauge-filters the
//! error sinograms of both series into per-component error images and adds
//! their back projection to the estimate.

use super::{CostTrace, InitMode, ReconConfig};
use crate::analytic::{deconvolved_energy, vfet_reconstruct, VfetOptions};
use crate::fields::{Grid3, Image2, VectorField3};
use crate::prior::{neighbor_weights, NeighborWeights, PriorEval, QggmrfParams, StencilDim};
use crate::projector::{project_series, ProjectionSet, TiltAxis, TiltSeries};
use crate::{Error, Result};

/// Options of the vector MAP driver.
#[derive(Clone, Copy, Debug)]
pub struct Mbir3dOptions {
    pub recon: ReconConfig,
    /// Kernel options of the initialization / data-anchor reconstruction.
    pub vfet: VfetOptions,
    /// Include the |f| ramp when the gauge kernels are applied to the
    /// error sinograms inside the loop (the same operator as the
    /// initialization). Disabling drops the ramp from the in-loop filter.
    pub error_filter_ramp: bool,
}

impl Default for Mbir3dOptions {
    fn default() -> Self {
        Mbir3dOptions {
            recon: ReconConfig::vector(),
            vfet: VfetOptions::default(),
            error_filter_ramp: true,
        }
    }
}

/// Closed-form simultaneous update of the three components of one voxel:
/// each component c gets `(f_c + 2Σ b̃·a_c(j)) / (1 + 2Σ b̃)` with its own
/// surrogate coefficients from the current neighbor differences. All three
/// read the same pre-update neighborhood.
pub fn icd_update_vector(
    i: (usize, usize, usize),
    f: [f64; 3],
    a: &VectorField3,
    weights: &NeighborWeights,
    params: &QggmrfParams,
) -> [f64; 3] {
    let eval = PriorEval::new(params);
    let g = a.grid;
    let neighbors = weights.at(i, g.dims());
    let mut out = [0.0; 3];
    for c in 0..3 {
        let comp = a.component(c);
        let ui = comp.at(i.0, i.1, i.2);
        let mut num = 0.0;
        let mut den = 0.0;
        for &((nj, nk, nl), b) in &neighbors {
            let uj = comp.at(nj, nk, nl);
            let bt = b * eval.coeff(ui - uj);
            num += bt * uj;
            den += bt;
        }
        out[c] = (f[c] + 2.0 * num) / (1.0 + 2.0 * den);
    }
    out
}

/// Prior part of the vector MAP objective: Σ over components of
/// `½ Σ_i Σ_{j∈N(i)} b·ρ(Δ)` (each unordered pair once via the half-weight
/// ordered sum). Renormalized boundary weights are symmetrized by the
/// ordered sum automatically.
fn prior_cost(a: &VectorField3, weights: &NeighborWeights, eval: &PriorEval) -> f64 {
    let g = a.grid;
    let (nx, ny, nz) = g.dims();
    // Per-voxel renormalization factor of the boundary-trimmed stencil.
    let mut renorm = vec![1.0f64; g.len()];
    let full: f64 = weights.total();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if i > 0 && i < nx - 1 && j > 0 && j < ny - 1 && k > 0 && k < nz - 1 {
                    continue;
                }
                let sum: f64 = weights
                    .offsets()
                    .iter()
                    .filter(|((dx, dy, dz), _)| {
                        let (a, b, c) = (
                            i as i64 + *dx as i64,
                            j as i64 + *dy as i64,
                            k as i64 + *dz as i64,
                        );
                        a >= 0
                            && b >= 0
                            && c >= 0
                            && a < nx as i64
                            && b < ny as i64
                            && c < nz as i64
                    })
                    .map(|(_, w)| w)
                    .sum();
                renorm[g.idx(i, j, k)] = full / sum;
            }
        }
    }
    // Positive-direction offsets: each unordered pair visited once.
    let positive: Vec<((i32, i32, i32), f64)> = weights
        .offsets()
        .iter()
        .copied()
        .filter(|((dx, dy, dz), _)| (*dz, *dy, *dx) > (0, 0, 0))
        .collect();
    let mut total = 0.0;
    for c in 0..3 {
        let vals = &a.component(c).values;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let idx = g.idx(i, j, k);
                    let ui = vals[idx];
                    for &((dx, dy, dz), w) in &positive {
                        let (qi, qj, qk) = (
                            i as i64 + dx as i64,
                            j as i64 + dy as i64,
                            k as i64 + dz as i64,
                        );
                        if qi < 0
                            || qj < 0
                            || qk < 0
                            || qi >= nx as i64
                            || qj >= ny as i64
                            || qk >= nz as i64
                        {
                            continue;
                        }
                        let qidx = g.idx(qi as usize, qj as usize, qk as usize);
                        let pair_w = 0.5 * w * (renorm[idx] + renorm[qidx]);
                        total += pair_w * eval.rho(ui - vals[qidx]);
                    }
                }
            }
        }
    }
    total
}

fn error_set(data: &ProjectionSet, est: &ProjectionSet) -> Result<ProjectionSet> {
    let diff_series = |d: &TiltSeries, e: &TiltSeries| -> Result<TiltSeries> {
        let images = d
            .images
            .iter()
            .zip(&e.images)
            .map(|(di, ei)| {
                Image2::new(
                    di.nu,
                    di.nv,
                    di.pitch,
                    di.values
                        .iter()
                        .zip(&ei.values)
                        .map(|(a, b)| a - b)
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        TiltSeries::new(d.axis, d.angles.clone(), images)
    };
    ProjectionSet::new(
        diff_series(&data.sx, &est.sx)?,
        diff_series(&data.sy, &est.sy)?,
    )
}

/// Vector MAP objective: `½‖D(φ) − D(HA)‖²` over both series plus the
/// q-GGMRF prior summed per component. D is the gauge-filter bank used by
/// the reconstruction loop (ramp included per `error_filter_ramp`).
pub fn map_cost_3d(
    a: &VectorField3,
    ps: &ProjectionSet,
    weights: &NeighborWeights,
    params: &QggmrfParams,
    opts: &Mbir3dOptions,
) -> Result<f64> {
    let est = ProjectionSet::new(
        project_series(a, &ps.sx.angles, TiltAxis::X)?,
        project_series(a, &ps.sy.angles, TiltAxis::Y)?,
    )?;
    let err = error_set(ps, &est)?;
    let enf = VfetOptions {
        ramp: opts.error_filter_ramp,
        ..opts.vfet
    };
    let eval = PriorEval::new(params);
    Ok(0.5 * deconvolved_energy(&err, &enf)? + prior_cost(a, weights, &eval))
}

/// Fraction of the residual back projection applied directly to the
/// iterate; the remainder extrapolates the sweep anchor (the same split
/// stabilization as the scalar driver).
const CONSISTENCY_RELAX: f64 = 0.5;

/// MAP reconstruction of the vector potential from a two-axis projection
/// set. Each iteration refreshes the error sinograms of both series once,
/// applies half of their gauge-filtered back projection to the estimate,
/// anchors the raster ICD sweep at the residual-corrected state and
/// updates all three components of every voxel in place.
pub fn mbir3d(ps: &ProjectionSet, opts: &Mbir3dOptions) -> Result<(VectorField3, CostTrace)> {
    opts.recon.validate()?;
    let (nu, nv) = ps.sx.dims();
    if nu != nv {
        return Err(Error::Config("reconstruction needs square projections".into()));
    }
    if ps.sx.is_empty() || ps.sy.is_empty() {
        return Err(Error::Config("projection set has an empty series".into()));
    }
    let grid = Grid3::cube(nu, ps.sx.pitch)?;
    let enf = VfetOptions {
        ramp: opts.error_filter_ramp,
        ..opts.vfet
    };

    let mut a = match opts.recon.init {
        InitMode::Vfet => vfet_reconstruct(ps, &opts.vfet)?,
        InitMode::Zero => VectorField3::zeros(grid),
        InitMode::Fbp => {
            return Err(Error::Config(
                "3D reconstruction initializes from zero or the gauge-filtered back projection"
                    .into(),
            ))
        }
    };

    let weights = neighbor_weights(StencilDim::Three);
    let eval = PriorEval::new(&opts.recon.prior);
    let (nx, ny, nz) = grid.dims();
    let offsets = weights.offsets().to_vec();
    let full_weight: f64 = weights.total();

    let mut trace = CostTrace::default();
    let mut anchor = VectorField3::zeros(grid);

    let project_both = |a: &VectorField3| -> Result<ProjectionSet> {
        ProjectionSet::new(
            project_series(a, &ps.sx.angles, TiltAxis::X)?,
            project_series(a, &ps.sy.angles, TiltAxis::Y)?,
        )
    };
    let cost_of = |a: &VectorField3, err: &ProjectionSet| -> Result<f64> {
        Ok(0.5 * deconvolved_energy(err, &enf)? + prior_cost(a, &weights, &eval))
    };

    let est0 = project_both(&a)?;
    let mut err = error_set(ps, &est0)?;
    let mut prev_cost = cost_of(&a, &err)?;
    // Step scale; halved whenever a full step would raise the objective.
    let mut scale = 1.0f64;

    for _ in 0..opts.recon.max_iters {
        let corr = vfet_reconstruct(&err, &enf)?;
        let saved: Vec<Vec<f64>> = (0..3).map(|c| a.component(c).values.clone()).collect();
        let mut accepted = false;
        for _attempt in 0..6 {
            for c in 0..3 {
                a.component_mut(c).values.copy_from_slice(&saved[c]);
            }
            // consistency correction split between the iterate and anchor
            for c in 0..3 {
                let corr_vals = &corr.component(c).values;
                let av = &mut a.component_mut(c).values;
                for (dst, cv) in av.iter_mut().zip(corr_vals) {
                    *dst += scale * CONSISTENCY_RELAX * cv;
                }
            }
            for c in 0..3 {
                let corr_vals = &corr.component(c).values;
                let a_vals = a.component(c).values.clone();
                let anc = &mut anchor.component_mut(c).values;
                for ((w, av), cv) in anc.iter_mut().zip(&a_vals).zip(corr_vals) {
                    *w = av + scale * (1.0 - CONSISTENCY_RELAX) * cv;
                }
            }

            // raster ICD sweep: simultaneous three-component voxel updates
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        let idx = grid.idx(i, j, k);
                        let interior =
                            i > 0 && i < nx - 1 && j > 0 && j < ny - 1 && k > 0 && k < nz - 1;
                        let mut wsum = full_weight;
                        if !interior {
                            wsum = 0.0;
                            for &((dx, dy, dz), w) in &offsets {
                                let (qi, qj, qk) = (
                                    i as i64 + dx as i64,
                                    j as i64 + dy as i64,
                                    k as i64 + dz as i64,
                                );
                                if qi >= 0
                                    && qj >= 0
                                    && qk >= 0
                                    && qi < nx as i64
                                    && qj < ny as i64
                                    && qk < nz as i64
                                {
                                    wsum += w;
                                }
                            }
                        }
                        let rescale = full_weight / wsum;
                        let mut new = [0.0f64; 3];
                        for c in 0..3 {
                            let vals = &a.component(c).values;
                            let ui = vals[idx];
                            let mut num = 0.0;
                            let mut den = 0.0;
                            for &((dx, dy, dz), w) in &offsets {
                                let (qi, qj, qk) = (
                                    i as i64 + dx as i64,
                                    j as i64 + dy as i64,
                                    k as i64 + dz as i64,
                                );
                                if qi < 0
                                    || qj < 0
                                    || qk < 0
                                    || qi >= nx as i64
                                    || qj >= ny as i64
                                    || qk >= nz as i64
                                {
                                    continue;
                                }
                                let uj =
                                    vals[grid.idx(qi as usize, qj as usize, qk as usize)];
                                let bt = w * rescale * eval.coeff(ui - uj);
                                num += bt * uj;
                                den += bt;
                            }
                            new[c] = (anchor.component(c).values[idx] + 2.0 * num)
                                / (1.0 + 2.0 * den);
                        }
                        for c in 0..3 {
                            a.component_mut(c).values[idx] = new[c];
                        }
                    }
                }
            }

            let est_new = project_both(&a)?;
            let err_new = error_set(ps, &est_new)?;
            let cost = cost_of(&a, &err_new)?;
            if cost <= prev_cost * (1.0 + 1e-12) {
                err = err_new;
                trace.push(cost);
                let decrease = (prev_cost - cost) / prev_cost.abs().max(1e-300);
                prev_cost = cost;
                accepted = true;
                if opts.recon.cost_tol > 0.0 && decrease < opts.recon.cost_tol {
                    trace.converged = true;
                    return Ok((a, trace));
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            for c in 0..3 {
                a.component_mut(c).values.copy_from_slice(&saved[c]);
            }
            trace.push(prev_cost);
        }
    }
    Ok((a, trace))
}
