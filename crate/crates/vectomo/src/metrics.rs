//! Error metrics for reconstruction studies: RMSE, range-normalized RMSE,
//! and per-plane NRMSE profiles.

use crate::fields::{ScalarField3, VectorField3};
use crate::{Error, Result};

/// Root mean square error between two equally shaped sample sets.
pub fn rmse(est: &[f64], truth: &[f64]) -> Result<f64> {
    if est.len() != truth.len() || est.is_empty() {
        return Err(Error::Input(format!(
            "rmse shape mismatch: {} vs {}",
            est.len(),
            truth.len()
        )));
    }
    let sum: f64 = est
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sum / est.len() as f64).sqrt())
}

/// RMSE normalized by the ground-truth value range (max − min).
pub fn nrmse(est: &[f64], truth: &[f64]) -> Result<f64> {
    let r = rmse(est, truth)?;
    let max = truth.iter().cloned().fold(f64::MIN, f64::max);
    let min = truth.iter().cloned().fold(f64::MAX, f64::min);
    if !(max > min) {
        return Err(Error::DegenerateNormalization(
            "ground truth has zero value range".into(),
        ));
    }
    Ok(r / (max - min))
}

/// Per-plane NRMSE profile of one scalar component along the y axis,
/// restricted to the central band of planes (fraction of the grid height
/// centered on the middle). Every plane's RMSE is normalized by the
/// component's global truth range — a per-plane range would be degenerate
/// on symmetry planes where the truth component is nearly constant.
/// Returns (plane index, NRMSE) pairs.
pub fn planar_nrmse(
    est: &ScalarField3,
    truth: &ScalarField3,
    central_fraction: f64,
) -> Result<Vec<(usize, f64)>> {
    if est.grid != truth.grid {
        return Err(Error::Input("planar_nrmse grids differ".into()));
    }
    if !(0.0 < central_fraction && central_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "central_fraction must be in (0,1], got {central_fraction}"
        )));
    }
    let max = truth.values.iter().cloned().fold(f64::MIN, f64::max);
    let min = truth.values.iter().cloned().fold(f64::MAX, f64::min);
    if !(max > min) {
        return Err(Error::DegenerateNormalization(
            "ground truth has zero value range".into(),
        ));
    }
    let range = max - min;
    let g = est.grid;
    let half_span = (g.ny as f64 * central_fraction / 2.0).floor() as usize;
    let c = g.ny / 2;
    let lo = c.saturating_sub(half_span);
    let hi = (c + half_span).min(g.ny - 1);
    let mut out = Vec::with_capacity(hi - lo + 1);
    for j in lo..=hi {
        let mut e = Vec::with_capacity(g.nx * g.nz);
        let mut t = Vec::with_capacity(g.nx * g.nz);
        for k in 0..g.nz {
            for i in 0..g.nx {
                e.push(est.at(i, j, k));
                t.push(truth.at(i, j, k));
            }
        }
        out.push((j, rmse(&e, &t)? / range));
    }
    Ok(out)
}

/// Planar NRMSE profiles for all three components of a vector field.
pub fn planar_nrmse_vector(
    est: &VectorField3,
    truth: &VectorField3,
    central_fraction: f64,
) -> Result<[Vec<(usize, f64)>; 3]> {
    Ok([
        planar_nrmse(&est.ax, &truth.ax, central_fraction)?,
        planar_nrmse(&est.ay, &truth.ay, central_fraction)?,
        planar_nrmse(&est.az, &truth.az, central_fraction)?,
    ])
}

/// Default central-plane band used by the bundled studies: 55% of the
/// grid height around the middle.
pub const CENTRAL_BAND: f64 = 0.55;

/// Summary metrics of one reconstruction run.
#[derive(Clone, Debug, Default)]
pub struct MetricReport {
    pub rmse: f64,
    pub nrmse: f64,
    /// Per-plane NRMSE per component; one entry for scalar runs.
    pub planar: Vec<Vec<(usize, f64)>>,
    /// Free-form run parameters for provenance.
    pub metadata: Vec<(String, String)>,
}
