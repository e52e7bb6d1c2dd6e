//! q-generalized Gaussian Markov random field prior: potential function,
//! derivative, quadratic-surrogate coefficients, and the neighborhood
//! weight tables used by the coordinate-descent reconstructions.
//!
//! The potential of a neighbor difference Δ is
//!
//! ```text
//! ρ(Δ) = |Δ|^p / (p·σ^p) · r/(1+r),   r = |Δ/(T·σ)|^(q-p)
//! ```
//!
//! convex and even for 1 ≤ p ≤ q ≤ 2. A surrogate quadratic matched to the
//! gradient at the current difference Δ′ gives closed-form pixel updates;
//! its coefficient is `b̃ = b·ρ′(Δ′)/(2Δ′)` with the stated limit at Δ′ = 0.

use crate::{Error, Result};
use std::collections::BTreeMap;

/// Prior parameters. `q` is kept as a parameter for forward compatibility
/// but every shipped configuration uses q = 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QggmrfParams {
    pub p: f64,
    pub q: f64,
    /// Transition threshold between low- and high-contrast behavior.
    pub t: f64,
    /// Prior scale.
    pub sigma_x: f64,
}

impl QggmrfParams {
    pub fn new(p: f64, q: f64, t: f64, sigma_x: f64) -> Result<Self> {
        if !(1.0 <= p && p <= q && q <= 2.0) {
            return Err(Error::Config(format!(
                "need 1 <= p <= q <= 2 for strict convexity, got p={p}, q={q}"
            )));
        }
        if !(t > 0.0) || !(sigma_x > 0.0) {
            return Err(Error::Config("T and sigma_x must be positive".into()));
        }
        Ok(QggmrfParams { p, q, t, sigma_x })
    }

    /// Parameters of the bundled 2D scalar study.
    pub fn scalar_study() -> Self {
        QggmrfParams {
            p: 1.1,
            q: 2.0,
            t: 0.001,
            sigma_x: 0.8,
        }
    }

    /// Parameters of the bundled 3D vector studies.
    pub fn vector_study() -> Self {
        QggmrfParams {
            p: 1.001,
            q: 2.0,
            t: 0.01,
            sigma_x: 0.8,
        }
    }
}

/// Potential ρ(Δ). Even, ρ(0) = 0.
pub fn rho(delta: f64, params: &QggmrfParams) -> f64 {
    let ad = delta.abs();
    if ad == 0.0 {
        return 0.0;
    }
    let (p, q, t, s) = (params.p, params.q, params.t, params.sigma_x);
    let r = (ad / (t * s)).powf(q - p);
    ad.powf(p) / (p * s.powf(p)) * (r / (1.0 + r))
}

/// Analytic derivative ρ′(Δ). Odd, ρ′(0) = 0.
pub fn rho_prime(delta: f64, params: &QggmrfParams) -> f64 {
    let ad = delta.abs();
    if ad == 0.0 {
        return 0.0;
    }
    let (p, q, t, s) = (params.p, params.q, params.t, params.sigma_x);
    let r = (ad / (t * s)).powf(q - p);
    let mag = ad.powf(p - 1.0) * r * (q / p + r) / (s.powf(p) * (1.0 + r) * (1.0 + r));
    if delta > 0.0 {
        mag
    } else {
        -mag
    }
}

/// Surrogate coefficient b̃ = b·ρ′(Δ′)/(2Δ′) for the quadratic majorizer,
/// with the closed form expanded to avoid the 0/0 at tiny |Δ′|:
///
/// ```text
/// b̃ = b · |Δ′|^(p-2)/(2σ^p) · r·(q/p + r)/(1+r)²
/// ```
///
/// For |Δ′| below 1e-12 the b/(p·σ^p) limit branch is used. For q = 2 the
/// general branch simplifies so that only one power is evaluated; both
/// arrangements are algebraically identical.
pub fn surrogate_coeff(delta_prime: f64, params: &QggmrfParams, b: f64) -> f64 {
    let ad = delta_prime.abs();
    let (p, q, t, s) = (params.p, params.q, params.t, params.sigma_x);
    if ad < 1e-12 {
        return b / (p * s.powf(p));
    }
    if q == 2.0 {
        // |Δ′|^(p-2)·r = |Δ′|^(q-2)/(Tσ)^(q-p), which for q = 2 collapses
        // to the constant (Tσ)^(p-2); only one power remains.
        let r = (ad / (t * s)).powf(q - p);
        let c = (t * s).powf(p - 2.0) / (2.0 * s.powf(p));
        return b * c * (q / p + r) / ((1.0 + r) * (1.0 + r));
    }
    let r = (ad / (t * s)).powf(q - p);
    b * ad.powf(p - 2.0) / (2.0 * s.powf(p)) * r * (q / p + r) / ((1.0 + r) * (1.0 + r))
}

/// Precomputed-constant evaluator for the potential and its surrogate
/// coefficient. The coordinate-descent sweeps call these per neighbor per
/// voxel, so the parameter powers are hoisted out; for q = 2 a single
/// power evaluation remains per call. Results are bit-identical to
/// [`rho`] and [`surrogate_coeff`].
#[derive(Clone, Copy, Debug)]
pub struct PriorEval {
    p: f64,
    q: f64,
    qp: f64,
    inv_ts: f64,
    sigma_p: f64,
    /// (Tσ)^(p-2) / (2σ^p), the collapsed q = 2 surrogate prefactor.
    c_q2: f64,
    /// 1/(p·σ^p), the Δ′ = 0 limit.
    limit: f64,
    q_over_p: f64,
    rho_c_q2: f64,
}

impl PriorEval {
    pub fn new(params: &QggmrfParams) -> Self {
        let (p, q, t, s) = (params.p, params.q, params.t, params.sigma_x);
        let sigma_p = s.powf(p);
        PriorEval {
            p,
            q,
            qp: q - p,
            inv_ts: 1.0 / (t * s),
            sigma_p,
            c_q2: (t * s).powf(p - 2.0) / (2.0 * sigma_p),
            limit: 1.0 / (p * sigma_p),
            q_over_p: q / p,
            rho_c_q2: (t * s).powf(p - 2.0) / (p * sigma_p),
        }
    }

    /// Surrogate coefficient for b = 1; multiply by the neighborhood
    /// weight for b̃.
    #[inline]
    pub fn coeff(&self, delta_prime: f64) -> f64 {
        let ad = delta_prime.abs();
        if ad < 1e-12 {
            return self.limit;
        }
        if self.q == 2.0 {
            let r = (ad * self.inv_ts).powf(self.qp);
            return self.c_q2 * (self.q_over_p + r) / ((1.0 + r) * (1.0 + r));
        }
        let r = (ad * self.inv_ts).powf(self.qp);
        ad.powf(self.p - 2.0) / (2.0 * self.sigma_p) * r * (self.q_over_p + r)
            / ((1.0 + r) * (1.0 + r))
    }

    /// Potential ρ(Δ), single power evaluation for q = 2:
    /// ρ = Δ²·(Tσ)^(p-2)/(p·σ^p) · r/(1+r)² ... collapsed as
    /// |Δ|^p·r/(1+r)/(pσ^p) with |Δ|^p·r = Δ²·(Tσ)^(p-2)·r².
    #[inline]
    pub fn rho(&self, delta: f64) -> f64 {
        let ad = delta.abs();
        if ad == 0.0 {
            return 0.0;
        }
        let r = (ad * self.inv_ts).powf(self.qp);
        if self.q == 2.0 {
            // |Δ|^p = Δ² · (Tσ)^(p-2) / r  when q = 2.
            return ad * ad * self.rho_c_q2 / (1.0 + r);
        }
        ad.powf(self.p) / (self.p * self.sigma_p) * (r / (1.0 + r))
    }
}

/// Stencil dimensionality of a neighborhood table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilDim {
    Two,
    Three,
}

/// Normalized neighborhood weights over a full 3×3(×3) stencil.
///
/// 2D: the 4 edge neighbors carry 1/6 each and the 4 diagonal neighbors
/// 1/12 each. 3D: 6 face neighbors at 9/132, 12 edge neighbors at 9/264,
/// 8 corner neighbors at 9/396. Both tables sum to exactly one and are
/// symmetric under offset negation.
#[derive(Clone, Debug)]
pub struct NeighborWeights {
    pub dim: StencilDim,
    /// Offset → weight, offsets in (dx, dy, dz) with dz = 0 for 2D.
    pub table: BTreeMap<(i32, i32, i32), f64>,
    offsets: Vec<((i32, i32, i32), f64)>,
}

impl NeighborWeights {
    pub fn offsets(&self) -> &[((i32, i32, i32), f64)] {
        &self.offsets
    }

    /// Sum of the full-stencil weights (1 by construction).
    pub fn total(&self) -> f64 {
        self.offsets.iter().map(|(_, w)| w).sum()
    }

    /// Neighbors of a lattice site with out-of-grid offsets dropped and the
    /// surviving weights renormalized to sum to one. `dims.2` is ignored
    /// for the 2D stencil (pass 1).
    pub fn at(
        &self,
        pos: (usize, usize, usize),
        dims: (usize, usize, usize),
    ) -> Vec<((usize, usize, usize), f64)> {
        let mut kept = Vec::with_capacity(self.offsets.len());
        let mut sum = 0.0;
        for &((dx, dy, dz), w) in &self.offsets {
            let ni = pos.0 as i64 + dx as i64;
            let nj = pos.1 as i64 + dy as i64;
            let nk = pos.2 as i64 + dz as i64;
            if ni < 0
                || nj < 0
                || nk < 0
                || ni >= dims.0 as i64
                || nj >= dims.1 as i64
                || nk >= dims.2 as i64
            {
                continue;
            }
            kept.push(((ni as usize, nj as usize, nk as usize), w));
            sum += w;
        }
        for (_, w) in kept.iter_mut() {
            *w /= sum;
        }
        kept
    }
}

/// Build the normalized weight table for the requested dimensionality.
pub fn neighbor_weights(dim: StencilDim) -> NeighborWeights {
    let mut table = BTreeMap::new();
    match dim {
        StencilDim::Two => {
            for dx in -1i32..=1 {
                for dy in -1i32..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let w = if dx.abs() + dy.abs() == 1 { 1.0 / 6.0 } else { 1.0 / 12.0 };
                    table.insert((dx, dy, 0), w);
                }
            }
        }
        StencilDim::Three => {
            for dx in -1i32..=1 {
                for dy in -1i32..=1 {
                    for dz in -1i32..=1 {
                        let dist = dx.abs() + dy.abs() + dz.abs();
                        if dist == 0 {
                            continue;
                        }
                        let w = match dist {
                            1 => 9.0 / 132.0,
                            2 => 9.0 / 264.0,
                            _ => 9.0 / 396.0,
                        };
                        table.insert((dx, dy, dz), w);
                    }
                }
            }
        }
    }
    let offsets: Vec<_> = table.iter().map(|(&o, &w)| (o, w)).collect();
    NeighborWeights {
        dim,
        table,
        offsets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn params_scalar() -> QggmrfParams {
        QggmrfParams::scalar_study()
    }

    #[test]
    fn rho_basics() {
        let p = params_scalar();
        assert_eq!(rho(0.0, &p), 0.0);
        // Quadratic reduction: p = q = 2, σ = 1 gives Δ²/(4σ²).
        let quad = QggmrfParams::new(2.0, 2.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(rho(2.0, &quad), 1.0, epsilon = 1e-15);
        // Even function.
        for d in [0.03, 0.7, 5.0] {
            assert_abs_diff_eq!(rho(d, &p), rho(-d, &p), epsilon = 1e-15);
        }
    }

    #[test]
    fn rho_matches_high_precision_oracle() {
        // Frozen from a 60-digit evaluation of the closed form.
        let p = params_scalar();
        let want = 0.042042942068436654522;
        assert_abs_diff_eq!(rho(0.05, &p), want, epsilon = 1e-15);
        let p3 = QggmrfParams::vector_study();
        assert_abs_diff_eq!(rho(0.02, &p3), 0.017768963741705873862, epsilon = 1e-15);
    }

    #[test]
    fn rho_prime_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(1);
        for &params in &[
            params_scalar(),
            QggmrfParams::vector_study(),
            QggmrfParams::new(2.0, 2.0, 1.0, 0.7).unwrap(),
        ] {
            for _ in 0..1000 {
                let d: f64 = rng.gen_range(-3.0f64..3.0);
                if d.abs() < 1e-3 {
                    continue;
                }
                let h = 1e-6 * d.abs().max(0.1);
                let fd = (rho(d + h, &params) - rho(d - h, &params)) / (2.0 * h);
                let an = rho_prime(d, &params);
                assert!(
                    (an - fd).abs() <= 1e-6 * an.abs().max(fd.abs()).max(1e-12),
                    "params {params:?}, delta {d}: analytic {an} vs fd {fd}"
                );
            }
        }
        // Frozen derivative value.
        assert_abs_diff_eq!(
            rho_prime(0.05, &params_scalar()),
            0.94282159024870034764,
            epsilon = 1e-14
        );
    }

    #[test]
    fn rho_prime_sign_and_zero() {
        let p = params_scalar();
        assert_eq!(rho_prime(0.0, &p), 0.0);
        for d in [1e-6, 0.01, 0.5, 10.0] {
            assert!(rho_prime(d, &p) > 0.0);
            assert!(rho_prime(-d, &p) < 0.0);
        }
    }

    #[test]
    fn rho_is_convex_on_dense_grid() {
        for &params in &[
            params_scalar(),
            QggmrfParams::vector_study(),
            QggmrfParams::new(1.001, 2.0, 0.001, 0.8).unwrap(),
        ] {
            let h = 1e-4;
            let mut d = -4.0;
            while d < 4.0 {
                let second = rho(d + h, &params) - 2.0 * rho(d, &params) + rho(d - h, &params);
                assert!(
                    second >= -1e-12,
                    "negative curvature at {d} for {params:?}: {second}"
                );
                d += 0.01;
            }
        }
    }

    #[test]
    fn surrogate_limit_and_consistency() {
        // Δ′ = 0, p = 2, σ = 1, b = 1 → 1/(p·σ^p) = 0.5.
        let quad = QggmrfParams::new(2.0, 2.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(surrogate_coeff(0.0, &quad, 1.0), 0.5, epsilon = 1e-15);
        // General branch against the defining ratio ρ′(Δ′)/(2Δ′).
        let p = params_scalar();
        for d in [1e-9, 1e-4, 0.05, 0.8, 3.0] {
            let want = rho_prime(d, &p) / (2.0 * d);
            let got = surrogate_coeff(d, &p, 1.0);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs(),
                "delta {d}: {got} vs {want}"
            );
            // b̃ depends on |Δ′| only.
            assert_eq!(got, surrogate_coeff(-d, &p, 1.0));
        }
        // Frozen value at Δ′ = 0.05.
        assert_abs_diff_eq!(
            surrogate_coeff(0.05, &p, 1.0),
            9.4282159024870034764,
            epsilon = 1e-13
        );
    }

    #[test]
    fn surrogate_majorizes_potential() {
        // Value-anchored majorization: b̃·Δ² - b̃·Δ′² + ρ(Δ′) ≥ ρ(Δ), with
        // equality at Δ = ±Δ′, over 10⁴ sampled pairs per parameter set.
        let mut rng = StdRng::seed_from_u64(7);
        for p_exp in [1.001, 1.1, 2.0] {
            let params = QggmrfParams::new(p_exp, 2.0, 0.01, 0.8).unwrap();
            for _ in 0..10_000 {
                let d: f64 = rng.gen_range(-4.0f64..4.0);
                let dp: f64 = rng.gen_range(-4.0f64..4.0);
                let bt = surrogate_coeff(dp, &params, 1.0);
                let surrogate = bt * d * d - bt * dp * dp + rho(dp, &params);
                let direct = rho(d, &params);
                assert!(
                    surrogate >= direct - 1e-10 * direct.abs().max(1.0),
                    "majorization fails at ({d}, {dp}) for p={p_exp}: {surrogate} < {direct}"
                );
                // Equality at Δ = ±Δ′.
                let eq = bt * dp * dp - bt * dp * dp + rho(dp, &params);
                assert!((eq - rho(dp, &params)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn fast_evaluator_matches_reference() {
        let mut rng = StdRng::seed_from_u64(3);
        for &params in &[
            params_scalar(),
            QggmrfParams::vector_study(),
            QggmrfParams::new(1.5, 1.8, 0.05, 1.3).unwrap(),
        ] {
            let eval = PriorEval::new(&params);
            for _ in 0..2000 {
                let d: f64 = rng.gen_range(-5.0f64..5.0);
                let want_c = surrogate_coeff(d, &params, 1.0);
                let got_c = eval.coeff(d);
                assert!(
                    (got_c - want_c).abs() <= 1e-12 * want_c.abs().max(1e-300),
                    "coeff mismatch at {d} for {params:?}"
                );
                let want_r = rho(d, &params);
                let got_r = eval.rho(d);
                assert!(
                    (got_r - want_r).abs() <= 1e-12 * want_r.abs().max(1e-300),
                    "rho mismatch at {d} for {params:?}"
                );
            }
        }
    }

    #[test]
    fn weight_tables_sum_to_one() {
        let w2 = neighbor_weights(StencilDim::Two);
        assert_eq!(w2.offsets().len(), 8);
        assert_abs_diff_eq!(w2.total(), 1.0, epsilon = 1e-15);
        // 4·(1/6) + 4·(1/12) = 1
        assert_abs_diff_eq!(
            4.0 * (1.0 / 6.0) + 4.0 * (1.0 / 12.0),
            1.0,
            epsilon = 1e-15
        );
        let w3 = neighbor_weights(StencilDim::Three);
        assert_eq!(w3.offsets().len(), 26);
        assert_abs_diff_eq!(w3.total(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            6.0 * (9.0 / 132.0) + 12.0 * (9.0 / 264.0) + 8.0 * (9.0 / 396.0),
            1.0,
            epsilon = 1e-15
        );
        // Symmetry under negation.
        for (&(dx, dy, dz), &w) in &w3.table {
            assert_eq!(w3.table[&(-dx, -dy, -dz)], w);
        }
    }

    #[test]
    fn corner_voxel_renormalizes() {
        let w3 = neighbor_weights(StencilDim::Three);
        let n = w3.at((0, 0, 0), (8, 8, 8));
        assert_eq!(n.len(), 7);
        let sum: f64 = n.iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        // Interior voxel keeps the full 26-stencil unrenormalized.
        let interior = w3.at((4, 4, 4), (8, 8, 8));
        assert_eq!(interior.len(), 26);
        let sum: f64 = interior.iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);

        let w2 = neighbor_weights(StencilDim::Two);
        let edge = w2.at((0, 3, 0), (8, 8, 1));
        assert_eq!(edge.len(), 5);
        let sum: f64 = edge.iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }
}
