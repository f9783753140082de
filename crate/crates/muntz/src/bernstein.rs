//! Bernstein-number machinery: lacunary exponent construction, the
//! partial-sum sup-norm inequality, the Abel ℓ¹ bound, and min-max estimation
//! of the inner infimum `inf { ‖T(f)‖_∞ : f ∈ E, ‖f‖₁ = 1 }` over chosen
//! subspaces.
//!
//! The outer supremum over subspaces is not searched; one fast-growing
//! exponent subspace already realizes the `(1−ε)/(2n−1)` lower bound, and the
//! optimizer value is always an upper estimate of the true infimum (it never
//! undercuts any probed point).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::norms::{l1_norm, sup_norm};
use crate::operators::OpKind;
use crate::poly::{ExponentRule, MuntzPoly};
use crate::sampling::derive_rng;
use crate::{Error, Result};

/// A lacunary exponent sequence `λ'₁ < … < λ'ₙ` whose growth factors
/// `1 − 2λ'ⱼ²(1+ln λ'ⱼ₊₁)/λ'ⱼ₊₁` multiply to at least `1 − ε`.
#[derive(Debug, Clone, Serialize)]
pub struct NewmanSequence {
    pub exponents: Vec<f64>,
    pub eps: f64,
    pub factors: Vec<f64>,
}

fn newman_factor(prev: f64, next: f64) -> f64 {
    1.0 - 2.0 * prev * prev * (1.0 + next.ln()) / next
}

/// Smallest integer `λ > prev` with `2·prev²·(1+ln λ)/λ ≤ tau`. The left side
/// is decreasing in `λ`, so bisection finds the threshold; at magnitudes
/// where consecutive integers stop being representable the smallest
/// representable admissible value is returned.
fn smallest_admissible_integer(prev: f64, tau: f64) -> Result<f64> {
    let excess = |lam: f64| 2.0 * prev * prev * (1.0 + lam.ln()) / lam;
    let first = prev.floor() + 1.0;
    if excess(first) <= tau {
        return Ok(first);
    }
    let mut lo = first;
    let mut hi = first.max(2.0);
    while excess(hi) > tau {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::InvalidParameter(format!(
                "no admissible exponent below 1e300 for prev = {prev}, tau = {tau}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) <= tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut candidate = hi.ceil();
    while excess(candidate) > tau {
        let next = candidate + 1.0;
        candidate = if next > candidate {
            next
        } else {
            candidate.next_up()
        };
    }
    Ok(candidate)
}

/// Builds the sequence greedily: `λ'₁ = seed`, and each successor is the
/// smallest candidate (next integer, or next pool member when a pool is
/// given) whose factor stays at or above `(1−ε)^{1/(n−1)}`, so the product
/// condition holds by construction.
pub fn newman_sequence(
    seed: f64,
    eps: f64,
    n: usize,
    pool: Option<&ExponentRule>,
) -> Result<NewmanSequence> {
    if !(seed >= 1.0) || !seed.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "seed exponent must be >= 1, got {seed}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let pool_members = pool.map(|rule| rule.materialize());
    if let Some(rule) = pool {
        if !rule.contains(seed) {
            return Err(Error::ExponentNotInRule(seed));
        }
    }

    let mut exponents = vec![seed];
    let mut factors = Vec::with_capacity(n.saturating_sub(1));
    if n > 1 {
        let threshold = (1.0 - eps).powf(1.0 / (n - 1) as f64);
        let tau = 1.0 - threshold;
        for step in 1..n {
            let prev = *exponents.last().expect("nonempty");
            let next = match &pool_members {
                Some(members) => members
                    .iter()
                    .copied()
                    .find(|&m| m > prev && newman_factor(prev, m) >= threshold)
                    .ok_or(Error::PoolExhausted {
                        built: step,
                        wanted: n,
                    })?,
                None => smallest_admissible_integer(prev, tau)?,
            };
            factors.push(newman_factor(prev, next));
            exponents.push(next);
        }
        let product: f64 = factors.iter().product();
        assert!(
            factors.iter().all(|&f| f >= threshold - 1e-12) && product >= 1.0 - eps - 1e-9,
            "constructed factors {factors:?} violate the product condition"
        );
    }
    Ok(NewmanSequence {
        exponents,
        eps,
        factors,
    })
}

/// Outcome of fuzzing the partial-sum inequality
/// `‖Σ aₖ x^{λ'ₖ}‖_∞ ≥ (1−ε)·max_m |Σ_{k≤m} aₖ|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewmanStats {
    pub trials: usize,
    pub violations: usize,
    pub skipped: usize,
    pub min_ratio: f64,
}

/// Draws random coefficient vectors and reports how often the sup norm drops
/// below `1−ε` times the best partial sum. Trials whose partial sums all
/// vanish are skipped and counted separately.
pub fn newman_inequality_stats(
    seq: &NewmanSequence,
    trials: usize,
    master_seed: u64,
) -> NewmanStats {
    let results: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(master_seed, 1, i);
            let coeffs: Vec<f64> = seq
                .exponents
                .iter()
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let mut partial = 0.0_f64;
            let mut max_partial = 0.0_f64;
            for &a in &coeffs {
                partial += a;
                max_partial = max_partial.max(partial.abs());
            }
            if max_partial == 0.0 {
                return None;
            }
            let poly =
                MuntzPoly::from_terms(seq.exponents.iter().copied().zip(coeffs.iter().copied()))
                    .expect("valid exponents");
            if poly.is_zero() {
                return None;
            }
            Some(sup_norm(&poly).value / max_partial)
        })
        .collect();

    let mut stats = NewmanStats {
        trials,
        violations: 0,
        skipped: 0,
        min_ratio: f64::INFINITY,
    };
    for r in results {
        match r {
            None => stats.skipped += 1,
            Some(ratio) => {
                stats.min_ratio = stats.min_ratio.min(ratio);
                if ratio < 1.0 - seq.eps {
                    stats.violations += 1;
                }
            }
        }
    }
    if stats.min_ratio == f64::INFINITY {
        stats.min_ratio = f64::NAN;
    }
    stats
}

/// One Abel partial-sum check: `Σ|aₖ| ≤ (2n−1)·max_m |s_m|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AbelCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The ℓ¹ telescoping bound through partial sums; holds for every real
/// vector.
pub fn abel_bound_check(a: &[f64]) -> AbelCheck {
    if a.is_empty() {
        return AbelCheck {
            lhs: 0.0,
            rhs: 0.0,
            holds: true,
        };
    }
    let lhs: f64 = a.iter().map(|x| x.abs()).sum();
    let mut partial = 0.0_f64;
    let mut max_partial = 0.0_f64;
    for &x in a {
        partial += x;
        max_partial = max_partial.max(partial.abs());
    }
    let rhs = (2.0 * a.len() as f64 - 1.0) * max_partial;
    AbelCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    }
}

/// Budget for the multi-start inner-infimum descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerBudget {
    pub starts: usize,
    pub max_evals: usize,
    pub tol: f64,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self {
            starts: 32,
            max_evals: 10_000,
            tol: 1e-10,
        }
    }
}

/// Result of the inner-infimum search over one exponent subspace.
#[derive(Debug, Clone, Serialize)]
pub struct InnerInfResult {
    /// Best ratio found; an upper estimate of the true infimum.
    pub value: f64,
    /// Monomial coefficients of the L¹-normalized witness.
    pub witness: Vec<f64>,
    pub witness_poly: MuntzPoly,
    pub evals: usize,
    pub converged: bool,
}

/// Hyperspherical coordinates: `n−1` angles to a unit vector in Rⁿ.
fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut coords = vec![0.0; n];
    let mut sin_product = 1.0;
    for (i, &theta) in angles.iter().enumerate() {
        coords[i] = sin_product * theta.cos();
        sin_product *= theta.sin();
    }
    coords[n - 1] = sin_product;
    coords
}

struct StartOutcome {
    value: f64,
    angles: Vec<f64>,
    evals: usize,
    converged: bool,
}

/// Minimizes the 0-homogeneous ratio `‖op(f)‖_∞ / ‖f‖₁` over nonzero
/// coefficient vectors on one subspace `span{x^{λ₁}, …, x^{λₙ}}` by
/// multi-start coordinate descent on sphere angles.
///
/// The returned value never undercuts the ratio at any probed point, so it is
/// an upper estimate of the inner infimum. Identical seeds reproduce the
/// value bit for bit, independent of the worker count.
pub fn inner_inf(
    op: OpKind,
    exponents: &[f64],
    budget: &OptimizerBudget,
    master_seed: u64,
) -> Result<InnerInfResult> {
    if exponents.is_empty() {
        return Err(Error::InvalidParameter("exponent list is empty".into()));
    }
    if exponents.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "exponents must be strictly increasing".into(),
        ));
    }
    if exponents.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParameter(
            "exponents must be finite and >= 0".into(),
        ));
    }
    if budget.starts == 0 || budget.max_evals == 0 || !(budget.tol > 0.0) {
        return Err(Error::InvalidParameter(
            "optimizer budget must be positive".into(),
        ));
    }

    // Coordinates act in the mass-normalized basis gₖ = (λₖ+1)x^{λₖ}: each
    // basis member carries unit L¹ mass, so the sphere covers the useful
    // directions evenly. In raw monomial coordinates the optimum hides in a
    // sliver of width ~1/λₙ.
    let ratio = |coords: &[f64]| -> f64 {
        let pairs = exponents
            .iter()
            .copied()
            .zip(coords.iter().copied())
            .filter(|(_, c)| *c != 0.0)
            .map(|(lambda, c)| (lambda, c * (lambda + 1.0)));
        let f = MuntzPoly::from_terms(pairs).expect("valid exponents");
        if f.is_zero() {
            return f64::INFINITY;
        }
        sup_norm(&op.apply(&f)).value / l1_norm(&f).value
    };

    let n = exponents.len();
    if n == 1 {
        // the unit sphere is {±x^λ} and the ratio is sign-invariant
        let value = ratio(&[1.0]);
        let poly = MuntzPoly::monomial(1.0, exponents[0]).expect("valid exponent");
        let norm = l1_norm(&poly).value;
        let witness_poly = poly.scale(1.0 / norm);
        return Ok(InnerInfResult {
            value,
            witness: vec![1.0 / norm],
            witness_poly,
            evals: 1,
            converged: true,
        });
    }

    const SCAN_POINTS: usize = 16;
    const REFINE_STEPS: usize = 28;

    let run_start = |start: usize| -> StartOutcome {
        let mut rng = derive_rng(master_seed, 2, start as u64);
        let mut angles: Vec<f64> = (0..n - 1)
            .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
            .collect();
        let mut evals = 0usize;
        let mut best = ratio(&sphere_point(&angles));
        evals += 1;
        let mut converged = false;

        'sweeps: for _ in 0..400 {
            let sweep_start = best;
            for dim in 0..n - 1 {
                let center = angles[dim];
                let half = std::f64::consts::FRAC_PI_2;
                // coarse scan over the half period, then ternary refinement
                let mut local_best = best;
                let mut local_theta = center;
                for k in 0..SCAN_POINTS {
                    let theta =
                        center - half + (k as f64 + 0.5) * (2.0 * half / SCAN_POINTS as f64);
                    angles[dim] = theta;
                    let v = ratio(&sphere_point(&angles));
                    evals += 1;
                    if v < local_best {
                        local_best = v;
                        local_theta = theta;
                    }
                }
                let mut lo = local_theta - half / SCAN_POINTS as f64;
                let mut hi = local_theta + half / SCAN_POINTS as f64;
                for _ in 0..REFINE_STEPS {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    angles[dim] = m1;
                    let v1 = ratio(&sphere_point(&angles));
                    angles[dim] = m2;
                    let v2 = ratio(&sphere_point(&angles));
                    evals += 2;
                    if v1 < local_best {
                        local_best = v1;
                        local_theta = m1;
                    }
                    if v2 < local_best {
                        local_best = v2;
                        local_theta = m2;
                    }
                    if v1 <= v2 {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                angles[dim] = local_theta;
                best = local_best;
                if evals >= budget.max_evals {
                    break 'sweeps;
                }
            }
            if sweep_start - best < budget.tol {
                converged = true;
                break;
            }
        }
        StartOutcome {
            value: best,
            angles,
            evals,
            converged,
        }
    };

    let outcomes: Vec<StartOutcome> = (0..budget.starts).into_par_iter().map(run_start).collect();

    let mut winner = 0usize;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[winner].value {
            winner = i;
        }
    }
    let total_evals: usize = outcomes.iter().map(|o| o.evals).sum();
    let best = &outcomes[winner];

    let coords = sphere_point(&best.angles);
    let pairs = exponents
        .iter()
        .copied()
        .zip(coords.iter().copied())
        .filter(|(_, c)| *c != 0.0)
        .map(|(lambda, c)| (lambda, c * (lambda + 1.0)));
    let f = MuntzPoly::from_terms(pairs).expect("valid exponents");
    let norm = l1_norm(&f).value;
    let witness_poly = f.scale(1.0 / norm);
    let witness = exponents
        .iter()
        .zip(coords.iter())
        .map(|(lambda, c)| c * (lambda + 1.0) / norm)
        .collect();

    Ok(InnerInfResult {
        value: best.value,
        witness,
        witness_poly,
        evals: total_evals,
        converged: best.converged,
    })
}

/// A full Bernstein-number estimate for one dimension.
#[derive(Debug, Clone, Serialize)]
pub struct BernsteinReport {
    pub operator: &'static str,
    pub n: usize,
    pub exponents: Vec<f64>,
    /// Inner-infimum estimate on the chosen subspace (upper estimate of the
    /// true infimum, lower witness for the Bernstein number).
    pub value: f64,
    /// Monomial coefficients of the L¹-normalized witness.
    pub witness: Vec<f64>,
    /// ℓ¹ norm of the witness in the averaged parameterization
    /// `f = Σ aₖ (λₖ+1) x^{λₖ}`; dominates `‖f‖₁`.
    pub witness_abel_l1: f64,
    /// Recomputed `‖f‖₁` of the witness (should be 1).
    pub witness_f_l1: f64,
    pub theory_lower: f64,
    pub theory_value: f64,
    pub converged: bool,
}

/// Builds the lacunary subspace from the pool, runs the inner-infimum search,
/// and reports the estimate next to `(1−ε)/(2n−1)` and `1/(2n−1)`.
pub fn bernstein_estimate(
    op: OpKind,
    n: usize,
    eps: f64,
    pool: &ExponentRule,
    budget: &OptimizerBudget,
    master_seed: u64,
) -> Result<BernsteinReport> {
    let seed = pool
        .materialize()
        .iter()
        .copied()
        .find(|&x| x >= 1.0)
        .ok_or_else(|| Error::InvalidParameter("pool materializes no exponent >= 1".into()))?;
    let seq = newman_sequence(seed, eps, n, Some(pool))?;
    let inner = inner_inf(op, &seq.exponents, budget, master_seed)?;
    let witness_abel_l1 = inner
        .witness
        .iter()
        .zip(&seq.exponents)
        .map(|(c, lambda)| (c / (lambda + 1.0)).abs())
        .sum();
    let witness_f_l1 = l1_norm(&inner.witness_poly).value;
    Ok(BernsteinReport {
        operator: op.name(),
        n,
        exponents: seq.exponents,
        value: inner.value,
        witness: inner.witness,
        witness_abel_l1,
        witness_f_l1,
        theory_lower: (1.0 - eps) / (2.0 * n as f64 - 1.0),
        theory_value: 1.0 / (2.0 * n as f64 - 1.0),
        converged: inner.converged,
    })
}
