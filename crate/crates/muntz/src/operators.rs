//! Closed-form application of the Volterra and Cesàro operators, their
//! weighted variants `H_q`, the rank-one approximants `S`, `R`, `R₁`, the
//! truncated operator `T_ρ`, and the coefficient functionals `e_λ`.
//!
//! Everything maps finite Müntz polynomials to finite Müntz polynomials
//! exactly, term by term; no quadrature is involved anywhere.

use serde::Serialize;

use crate::norms;
use crate::poly::{ExponentRule, MuntzPoly, Term, EXPONENT_MERGE_TOL};
use crate::{Error, Result};

/// Tag for the two operators the experiments run against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    Volterra,
    Cesaro,
}

impl OpKind {
    pub fn apply(&self, f: &MuntzPoly) -> MuntzPoly {
        match self {
            OpKind::Volterra => volterra(f),
            OpKind::Cesaro => cesaro(f),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OpKind::Volterra => "volterra",
            OpKind::Cesaro => "cesaro",
        }
    }
}

/// `V(f)(x) = ∫₀ˣ f`; shifts every exponent up by one.
pub fn volterra(f: &MuntzPoly) -> MuntzPoly {
    f.antiderivative()
}

/// `Γ(f)(x) = (1/x)∫₀ˣ f`, the running average. Fixes the exponent set and
/// scales each coefficient by `1/(λ+1)`, so the value at the origin is
/// preserved.
pub fn cesaro(f: &MuntzPoly) -> MuntzPoly {
    let terms = f
        .terms()
        .iter()
        .map(|t| Term {
            exponent: t.exponent,
            coefficient: t.coefficient / (t.exponent + 1.0),
        })
        .collect();
    MuntzPoly::from_raw_terms(terms)
}

/// The division operator `Q(f) = f/x`, defined when every exponent is ≥ 1.
/// `division_q(volterra(f))` recovers `cesaro(f)`.
pub fn division_q(f: &MuntzPoly) -> Result<MuntzPoly> {
    if let Some(least) = f.least_exponent() {
        if least < 1.0 {
            return Err(Error::DivisionUndefined(least));
        }
    }
    let terms = f
        .terms()
        .iter()
        .map(|t| Term {
            exponent: t.exponent - 1.0,
            coefficient: t.coefficient,
        })
        .collect();
    Ok(MuntzPoly::from_raw_terms(terms))
}

/// A continuous weight on `[0, 1]` in Müntz-polynomial form.
///
/// Restricting weights to polynomials keeps every weighted operator closed
/// form; `q = 1` and `q = x` recover the Cesàro and Volterra operators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight {
    poly: MuntzPoly,
}

impl Weight {
    pub fn new(poly: MuntzPoly) -> Self {
        Self { poly }
    }

    /// The constant weight `q = 1`.
    pub fn one() -> Self {
        Self::new(MuntzPoly::constant(1.0))
    }

    /// The identity weight `q = x`.
    pub fn x() -> Self {
        Self::new(MuntzPoly::monomial(1.0, 1.0).expect("x is a valid monomial"))
    }

    pub fn poly(&self) -> &MuntzPoly {
        &self.poly
    }

    /// `q(1)`.
    pub fn at_one(&self) -> f64 {
        self.poly.value(1.0)
    }

    /// `‖q‖_∞` on `[0, 1]`.
    pub fn sup(&self) -> f64 {
        norms::sup_norm(&self.poly).value
    }
}

impl From<MuntzPoly> for Weight {
    fn from(poly: MuntzPoly) -> Self {
        Self::new(poly)
    }
}

/// `H_q(f) = q · Γ(f)`, i.e. `(q(x)/x)∫₀ˣ f` on `(0, 1]` and `q(0)f(0)` at
/// the origin — the closed form produces the boundary value automatically.
pub fn weighted_hq(q: &Weight, f: &MuntzPoly) -> MuntzPoly {
    q.poly.multiply(&cesaro(f))
}

/// Rank-one approximants used in the essential-norm experiments.
///
/// All variants send `f` to a multiple of a fixed function scaled by `∫₀¹ f`,
/// so each induces a rank-one operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum FiniteRankSpec {
    /// `S(f) = ½∫₀¹ f`, a constant function.
    S,
    /// `R(f)(x) = q(x) x^λ/2 · ∫₀¹ f` with `λ` from the active exponent set.
    R { q: Weight, lambda: f64 },
    /// `R₁(f) = q(1)/2 · ∫₀¹ f`, a constant function.
    R1 { q: Weight },
}

impl FiniteRankSpec {
    /// Builds the `R` variant, checking that `λ` is a materialized member of
    /// the rule.
    pub fn rank_one_r(q: Weight, lambda: f64, rule: &ExponentRule) -> Result<Self> {
        if !rule.contains(lambda) {
            return Err(Error::ExponentNotInRule(lambda));
        }
        Ok(FiniteRankSpec::R { q, lambda })
    }

    pub fn rank_one_r1(q: Weight) -> Self {
        FiniteRankSpec::R1 { q }
    }

    /// The weight carried by the variant, if any.
    pub fn weight(&self) -> Option<&Weight> {
        match self {
            FiniteRankSpec::S => None,
            FiniteRankSpec::R { q, .. } | FiniteRankSpec::R1 { q } => Some(q),
        }
    }
}

/// Applies a rank-one approximant; `∫₀¹ f` is computed exactly through the
/// antiderivative.
pub fn finite_rank_apply(spec: &FiniteRankSpec, f: &MuntzPoly) -> MuntzPoly {
    let integral = f.integral_01();
    match spec {
        FiniteRankSpec::S => MuntzPoly::constant(0.5 * integral),
        FiniteRankSpec::R { q, lambda } => {
            if integral == 0.0 {
                return MuntzPoly::zero();
            }
            let monomial = MuntzPoly::monomial(0.5 * integral, *lambda)
                .expect("lambda validated at construction");
            q.poly.multiply(&monomial)
        }
        FiniteRankSpec::R1 { q } => MuntzPoly::constant(0.5 * q.at_one() * integral),
    }
}

/// `T_ρ(f) = (q(x)/x)∫₀^{ρx} f` in closed form:
/// `q · Σ aₙ ρ^{λₙ+1} x^{λₙ} / (λₙ+1)`, which is exactly the partial sum of
/// the rank-one expansion through the coefficient functionals.
pub fn t_rho_apply(q: &Weight, rho: f64, f: &MuntzPoly) -> Result<MuntzPoly> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::RhoOutOfRange(rho));
    }
    let pairs = f.terms().iter().map(|t| {
        (
            t.exponent,
            t.coefficient * rho.powf(t.exponent + 1.0) / (t.exponent + 1.0),
        )
    });
    let truncated = MuntzPoly::from_terms(pairs).expect("terms stay valid under scaling");
    Ok(q.poly.multiply(&truncated))
}

/// The coefficient functional `e_λ`: the coefficient of `x^λ` in the
/// expansion of `f`, or 0 when the exponent is absent.
pub fn erdos_functional(f: &MuntzPoly, lambda: f64) -> f64 {
    let tol = EXPONENT_MERGE_TOL.max(1e-15 * lambda.abs());
    f.terms()
        .iter()
        .find(|t| (t.exponent - lambda).abs() <= tol)
        .map_or(0.0, |t| t.coefficient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{l1_norm, normalize_l1, sup_norm};

    fn poly(pairs: &[(f64, f64)]) -> MuntzPoly {
        MuntzPoly::from_terms(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn volterra_maps_normalized_monomials() {
        // (γ+1) x^γ ↦ x^{γ+1}
        let gamma = 9.0;
        let g = poly(&[(gamma, gamma + 1.0)]);
        assert_eq!(volterra(&g), poly(&[(gamma + 1.0, 1.0)]));
        assert_eq!(volterra(&poly(&[(1.0, 2.0)])), poly(&[(2.0, 1.0)]));
        assert!(volterra(&MuntzPoly::zero()).is_zero());
    }

    #[test]
    fn cesaro_fixes_exponents() {
        // (λ+1) x^λ ↦ x^λ
        let lambda = 4.0;
        let f = poly(&[(lambda, lambda + 1.0)]);
        assert_eq!(cesaro(&f), poly(&[(lambda, 1.0)]));

        assert_eq!(cesaro(&MuntzPoly::constant(3.0)), MuntzPoly::constant(3.0));

        // x + x² ↦ x/2 + x²/3
        let g = poly(&[(1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(cesaro(&g), poly(&[(1.0, 0.5), (2.0, 1.0 / 3.0)]));
    }

    #[test]
    fn division_shifts_down() {
        assert_eq!(division_q(&poly(&[(2.0, 1.0)])).unwrap(), poly(&[(1.0, 1.0)]));
        let gamma = 6.0;
        assert_eq!(
            division_q(&poly(&[(gamma + 1.0, 1.0)])).unwrap(),
            poly(&[(gamma, 1.0)])
        );
        assert!(matches!(
            division_q(&poly(&[(0.0, 1.0), (1.0, 1.0)])),
            Err(Error::DivisionUndefined(_))
        ));
        assert!(division_q(&MuntzPoly::zero()).unwrap().is_zero());
    }

    #[test]
    fn factorization_through_division() {
        let f = poly(&[(0.5, 1.0), (2.0, -3.0), (7.25, 0.5)]);
        let via_division = division_q(&volterra(&f)).unwrap();
        let direct = cesaro(&f);
        assert_eq!(via_division.num_terms(), direct.num_terms());
        for (a, b) in via_division.terms().iter().zip(direct.terms()) {
            assert!((a.exponent - b.exponent).abs() < EXPONENT_MERGE_TOL);
            assert_eq!(a.coefficient, b.coefficient);
        }
    }

    #[test]
    fn hq_recovers_cesaro_and_volterra() {
        let f = poly(&[(1.0, 0.3), (3.5, -1.2), (8.0, 2.0)]);
        assert_eq!(weighted_hq(&Weight::one(), &f), cesaro(&f));
        assert_eq!(weighted_hq(&Weight::x(), &f), volterra(&f));
    }

    #[test]
    fn hq_with_quadratic_weight() {
        // q = x², f = 2x: (x²/x)·x² = x³
        let q = Weight::new(poly(&[(2.0, 1.0)]));
        let f = poly(&[(1.0, 2.0)]);
        assert_eq!(weighted_hq(&q, &f), poly(&[(3.0, 1.0)]));
    }

    #[test]
    fn finite_rank_variants() {
        let gamma = 12.0;
        let unit_mass = poly(&[(gamma, gamma + 1.0)]);
        assert_eq!(
            finite_rank_apply(&FiniteRankSpec::S, &unit_mass),
            MuntzPoly::constant(0.5)
        );
        assert_eq!(
            finite_rank_apply(&FiniteRankSpec::S, &poly(&[(1.0, 2.0)])),
            MuntzPoly::constant(0.5)
        );

        // R1 with q = x²: q(1) = 1 and ∫ 2x = 1 give the constant 1/2
        let q = Weight::new(poly(&[(2.0, 1.0)]));
        assert_eq!(
            finite_rank_apply(&FiniteRankSpec::rank_one_r1(q), &poly(&[(1.0, 2.0)])),
            MuntzPoly::constant(0.5)
        );
    }

    #[test]
    fn rank_one_r_requires_pool_membership() {
        let rule = ExponentRule::geometric(1.0, 2.0, 6).unwrap();
        assert!(FiniteRankSpec::rank_one_r(Weight::one(), 4.0, &rule).is_ok());
        assert!(matches!(
            FiniteRankSpec::rank_one_r(Weight::one(), 3.0, &rule),
            Err(Error::ExponentNotInRule(_))
        ));
    }

    #[test]
    fn rank_one_r_applies_closed_form() {
        let rule = ExponentRule::geometric(1.0, 2.0, 6).unwrap();
        let spec = FiniteRankSpec::rank_one_r(Weight::one(), 2.0, &rule).unwrap();
        // f = 2x integrates to 1, so R(f) = x²/2
        assert_eq!(
            finite_rank_apply(&spec, &poly(&[(1.0, 2.0)])),
            poly(&[(2.0, 0.5)])
        );
    }

    #[test]
    fn t_rho_closed_form() {
        // q = 1, ρ = 1/2, f = 2x: (1/x)∫₀^{x/2} 2t dt = x/4
        let f = poly(&[(1.0, 2.0)]);
        let got = t_rho_apply(&Weight::one(), 0.5, &f).unwrap();
        assert_eq!(got, poly(&[(1.0, 0.25)]));

        // f = 1: (1/x)·(ρx) = ρ
        let one = MuntzPoly::constant(1.0);
        assert_eq!(
            t_rho_apply(&Weight::one(), 0.5, &one).unwrap(),
            MuntzPoly::constant(0.5)
        );

        assert!(matches!(
            t_rho_apply(&Weight::one(), 1.0, &f),
            Err(Error::RhoOutOfRange(_))
        ));
        assert!(t_rho_apply(&Weight::one(), 0.25, &MuntzPoly::zero())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn t_rho_approaches_cesaro() {
        let f = poly(&[(1.0, 1.0), (3.0, -0.5)]);
        let near_one = t_rho_apply(&Weight::one(), 1.0 - 1e-12, &f).unwrap();
        let target = cesaro(&f);
        for (a, b) in near_one.terms().iter().zip(target.terms()) {
            assert!((a.coefficient - b.coefficient).abs() < 1e-10);
        }
    }

    #[test]
    fn erdos_functional_reads_coefficients() {
        let f = poly(&[(2.0, 3.0), (7.0, 5.0)]);
        assert_eq!(erdos_functional(&f, 2.0), 3.0);
        assert_eq!(erdos_functional(&f, 4.0), 0.0);

        // normalize_l1(x²) = 3x² since ∫₀¹ t² dt = 1/3
        let g = normalize_l1(&poly(&[(2.0, 1.0)])).unwrap();
        assert!((erdos_functional(&g, 2.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn volterra_is_isometry_on_positive_functions() {
        let f = poly(&[(0.5, 0.3), (2.0, 1.7), (9.0, 0.01)]);
        let lhs = sup_norm(&volterra(&f)).value;
        let rhs = l1_norm(&f).value;
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
