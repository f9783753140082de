//! Exact representation and closed-form calculus of finite Müntz polynomials
//! `Σ aₖ x^{λₖ}` on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponents closer than this are treated as equal when merging terms.
///
/// Exponent arithmetic in [`MuntzPoly::multiply`] introduces roundoff, so
/// merges compare with this tolerance instead of bit equality.
pub const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// One monomial `coefficient * x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponent: f64,
    pub coefficient: f64,
}

/// A finite Müntz polynomial on `[0, 1]`.
///
/// Terms are kept sorted by strictly increasing exponent and never store a
/// zero coefficient; the empty term list is the zero function. All operations
/// are pure, so values can be shared freely across threads.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct MuntzPoly {
    terms: Vec<Term>,
}

impl MuntzPoly {
    /// The zero function.
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            terms: vec![Term {
                exponent: 0.0,
                coefficient: c,
            }],
        }
    }

    /// The single monomial `coefficient * x^exponent`.
    pub fn monomial(coefficient: f64, exponent: f64) -> Result<Self> {
        Self::from_terms([(exponent, coefficient)])
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs.
    ///
    /// Pairs are sorted, exponents within [`EXPONENT_MERGE_TOL`] of each other
    /// are merged, and terms whose coefficient is exactly zero are dropped.
    pub fn from_terms<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut collected: Vec<Term> = Vec::new();
        for (exponent, coefficient) in pairs {
            if !exponent.is_finite() || exponent < 0.0 {
                return Err(Error::InvalidTerm(format!(
                    "exponent must be finite and >= 0, got {exponent}"
                )));
            }
            if !coefficient.is_finite() {
                return Err(Error::InvalidTerm(format!(
                    "coefficient must be finite, got {coefficient}"
                )));
            }
            collected.push(Term {
                exponent,
                coefficient,
            });
        }
        collected.sort_by(|a, b| a.exponent.partial_cmp(&b.exponent).expect("finite exponents"));

        let mut terms: Vec<Term> = Vec::with_capacity(collected.len());
        for term in collected {
            match terms.last_mut() {
                Some(last) if term.exponent - last.exponent < EXPONENT_MERGE_TOL => {
                    last.coefficient += term.coefficient;
                }
                _ => terms.push(term),
            }
        }
        terms.retain(|t| t.coefficient != 0.0);
        Ok(Self { terms })
    }

    /// Internal constructor for term lists that already satisfy the
    /// invariants (sorted, strictly increasing, nonzero coefficients).
    pub(crate) fn from_raw_terms(terms: Vec<Term>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].exponent < w[1].exponent));
        debug_assert!(terms.iter().all(|t| t.coefficient != 0.0 && t.exponent >= 0.0));
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn least_exponent(&self) -> Option<f64> {
        self.terms.first().map(|t| t.exponent)
    }

    pub fn max_exponent(&self) -> Option<f64> {
        self.terms.last().map(|t| t.exponent)
    }

    /// `Σ |aₖ|`, an upper bound for `sup |f|` on `[0, 1]`.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Evaluates `Σ aₖ x^{λₖ}` at `x ∈ [0, 1]`, with the convention `0⁰ = 1`
    /// so the constant term survives at the origin.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutsideDomain(x));
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation; callers guarantee `x ∈ [0, 1]`.
    pub(crate) fn value(&self, x: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x));
        self.terms
            .iter()
            .map(|t| {
                if t.exponent == 0.0 {
                    t.coefficient
                } else {
                    t.coefficient * x.powf(t.exponent)
                }
            })
            .sum()
    }

    /// Value at the origin under the analytic-extension convention:
    /// the coefficient of `x⁰` when present, otherwise 0.
    pub fn value_at_zero(&self) -> f64 {
        match self.terms.first() {
            Some(t) if t.exponent == 0.0 => t.coefficient,
            _ => 0.0,
        }
    }

    /// Exact antiderivative with value 0 at the origin:
    /// `Σ aₖ x^{λₖ+1} / (λₖ+1)`.
    pub fn antiderivative(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                exponent: t.exponent + 1.0,
                coefficient: t.coefficient / (t.exponent + 1.0),
            })
            .collect();
        Self::from_raw_terms(terms)
    }

    /// `∫₀¹ f`, evaluated exactly through the antiderivative.
    pub fn integral_01(&self) -> f64 {
        self.antiderivative().value(1.0)
    }

    /// Scales every coefficient by `c`.
    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                exponent: t.exponent,
                coefficient: t.coefficient * c,
            })
            .collect();
        Self::from_raw_terms(terms)
    }

    /// Exact merge `α·f + β·g`; cancellations drop terms.
    pub fn linear_combine(alpha: f64, f: &Self, beta: f64, g: &Self) -> Self {
        let pairs = f
            .terms
            .iter()
            .map(move |t| (t.exponent, alpha * t.coefficient))
            .chain(g.terms.iter().map(move |t| (t.exponent, beta * t.coefficient)))
            .filter(|(_, c)| *c != 0.0);
        Self::from_terms(pairs).expect("terms of valid polynomials remain valid")
    }

    /// Exact product with exponent sums.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut pairs = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                pairs.push((a.exponent + b.exponent, a.coefficient * b.coefficient));
            }
        }
        Self::from_terms(pairs).expect("products of valid terms remain valid")
    }
}

/// Generator for strictly increasing exponent sequences `λ₀ < λ₁ < …`.
///
/// The geometric rule materializes `λₖ = base·ratioᵏ` and the power rule
/// `λₖ = (k+1)^p`; both satisfy `Σ 1/λₖ < ∞` for the full infinite sequence
/// whenever `ratio > 1` resp. `p > 1`, which the constructors enforce.
/// Explicit finite lists satisfy the summability condition vacuously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRule {
    #[serde(flatten)]
    kind: RuleKind,
    length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "lowercase")]
pub enum RuleKind {
    Explicit { exponents: Vec<f64> },
    Geometric { base: f64, ratio: f64 },
    Power { exponent: f64 },
}

impl ExponentRule {
    /// A finite explicit list; `length` is the list length.
    pub fn explicit(exponents: Vec<f64>) -> Result<Self> {
        let rule = Self {
            length: exponents.len(),
            kind: RuleKind::Explicit { exponents },
        };
        rule.validate()?;
        Ok(rule)
    }

    /// `λₖ = base·ratioᵏ` for `k = 0..length`.
    pub fn geometric(base: f64, ratio: f64, length: usize) -> Result<Self> {
        let rule = Self {
            kind: RuleKind::Geometric { base, ratio },
            length,
        };
        rule.validate()?;
        Ok(rule)
    }

    /// `λₖ = (k+1)^exponent` for `k = 0..length`.
    pub fn power(exponent: f64, length: usize) -> Result<Self> {
        let rule = Self {
            kind: RuleKind::Power { exponent },
            length,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Checks the rule parameters, including the analytic summability
    /// condition for the generator kinds.
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidRule("length must be at least 1".into()));
        }
        match &self.kind {
            RuleKind::Explicit { exponents } => {
                if exponents.len() != self.length {
                    return Err(Error::InvalidRule(format!(
                        "length {} does not match explicit list of {} exponents",
                        self.length,
                        exponents.len()
                    )));
                }
                for w in exponents.windows(2) {
                    if !(w[1] > w[0]) {
                        return Err(Error::InvalidRule(
                            "explicit exponents must be strictly increasing".into(),
                        ));
                    }
                }
                if let Some(first) = exponents.first() {
                    if !first.is_finite() || *first < 0.0 {
                        return Err(Error::InvalidRule(
                            "exponents must be finite and >= 0".into(),
                        ));
                    }
                }
                if exponents.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidRule("exponents must be finite".into()));
                }
            }
            RuleKind::Geometric { base, ratio } => {
                if !(*base > 0.0) || !base.is_finite() {
                    return Err(Error::InvalidRule(format!("base must be > 0, got {base}")));
                }
                if !(*ratio > 1.0) || !ratio.is_finite() {
                    return Err(Error::InvalidRule(format!(
                        "ratio must be > 1 for summability, got {ratio}"
                    )));
                }
            }
            RuleKind::Power { exponent } => {
                if !(*exponent > 1.0) || !exponent.is_finite() {
                    return Err(Error::InvalidRule(format!(
                        "power exponent must be > 1 for summability, got {exponent}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Materializes the first `length` exponents, strictly increasing.
    pub fn materialize(&self) -> Vec<f64> {
        match &self.kind {
            RuleKind::Explicit { exponents } => exponents.clone(),
            RuleKind::Geometric { base, ratio } => (0..self.length)
                .map(|k| base * ratio.powi(k as i32))
                .collect(),
            RuleKind::Power { exponent } => (0..self.length)
                .map(|k| ((k + 1) as f64).powf(*exponent))
                .collect(),
        }
    }

    /// Membership test against the materialized set, tolerant to roundoff.
    pub fn contains(&self, lambda: f64) -> bool {
        self.materialize()
            .iter()
            .any(|&m| (m - lambda).abs() <= EXPONENT_MERGE_TOL.max(1e-15 * lambda.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pairs: &[(f64, f64)]) -> MuntzPoly {
        MuntzPoly::from_terms(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn eval_single_term() {
        // f = 2x at 0.5
        let f = poly(&[(1.0, 2.0)]);
        assert_eq!(f.eval(0.5).unwrap(), 1.0);
    }

    #[test]
    fn eval_constant_term_at_zero() {
        // f = 3 + x²; the 0⁰ = 1 convention keeps the constant at x = 0
        let f = poly(&[(0.0, 3.0), (2.0, 1.0)]);
        assert_eq!(f.eval(0.0).unwrap(), 3.0);
    }

    #[test]
    fn eval_cancellation() {
        // f = x - 2x² at 0.5, direct arithmetic oracle: 0.5 - 2*0.25 = 0
        let f = poly(&[(1.0, 1.0), (2.0, -2.0)]);
        assert_eq!(f.eval(0.5).unwrap(), 0.0);
    }

    #[test]
    fn eval_outside_domain_is_error() {
        let f = poly(&[(1.0, 1.0)]);
        assert!(matches!(f.eval(1.5), Err(Error::PointOutsideDomain(_))));
        assert!(matches!(f.eval(-0.1), Err(Error::PointOutsideDomain(_))));
    }

    #[test]
    fn value_at_zero_conventions() {
        let f = poly(&[(0.0, 3.0), (7.0, 5.0)]);
        assert_eq!(f.value_at_zero(), 3.0);
        let g = poly(&[(0.5, 1.0)]);
        assert_eq!(g.value_at_zero(), 0.0);
        assert_eq!(MuntzPoly::zero().value_at_zero(), 0.0);
    }

    #[test]
    fn antiderivative_power_rule() {
        let f = poly(&[(1.0, 2.0)]);
        assert_eq!(f.antiderivative(), poly(&[(2.0, 1.0)]));

        // (γ+1) x^γ integrates to x^{γ+1}, exactly
        let gamma = 5.0;
        let g = poly(&[(gamma, gamma + 1.0)]);
        assert_eq!(g.antiderivative(), poly(&[(gamma + 1.0, 1.0)]));

        let one = MuntzPoly::constant(1.0);
        assert_eq!(one.antiderivative(), poly(&[(1.0, 1.0)]));
    }

    #[test]
    fn linear_combine_merges_and_cancels() {
        let x = poly(&[(1.0, 1.0)]);
        assert_eq!(MuntzPoly::linear_combine(1.0, &x, 1.0, &x), poly(&[(1.0, 2.0)]));

        let f = poly(&[(1.0, 1.0), (2.0, 1.0)]);
        let g = poly(&[(2.0, 1.0)]);
        assert_eq!(MuntzPoly::linear_combine(1.0, &f, -1.0, &g), x);

        assert!(MuntzPoly::linear_combine(0.0, &f, 0.0, &g).is_zero());
    }

    #[test]
    fn multiply_exponent_sums() {
        let x = poly(&[(1.0, 1.0)]);
        let x2 = poly(&[(2.0, 1.0)]);
        assert_eq!(x.multiply(&x2), poly(&[(3.0, 1.0)]));

        let a = poly(&[(0.0, 1.0), (1.0, 1.0)]);
        let b = poly(&[(0.0, 1.0), (1.0, -1.0)]);
        assert_eq!(a.multiply(&b), poly(&[(0.0, 1.0), (2.0, -1.0)]));

        // x^{0.5} · x^{0.5} = x, exponent-sum oracle
        let h = poly(&[(0.5, 1.0)]);
        assert_eq!(h.multiply(&h), poly(&[(1.0, 1.0)]));
    }

    #[test]
    fn term_count_bound_after_multiply() {
        let f = poly(&[(0.0, 1.0), (1.0, 2.0), (2.5, -1.0)]);
        let g = poly(&[(0.5, 1.0), (1.0, -2.0)]);
        assert!(f.multiply(&g).num_terms() <= f.num_terms() * g.num_terms());
    }

    #[test]
    fn from_terms_rejects_bad_input() {
        assert!(MuntzPoly::from_terms([(-1.0, 1.0)]).is_err());
        assert!(MuntzPoly::from_terms([(f64::NAN, 1.0)]).is_err());
        assert!(MuntzPoly::from_terms([(1.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn geometric_rule_materializes_powers() {
        let rule = ExponentRule::geometric(1.0, 2.0, 5).unwrap();
        assert_eq!(rule.materialize(), vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        assert!(rule.contains(8.0));
        assert!(!rule.contains(3.0));
    }

    #[test]
    fn power_rule_materializes() {
        let rule = ExponentRule::power(2.0, 4).unwrap();
        assert_eq!(rule.materialize(), vec![1.0, 4.0, 9.0, 16.0]);
    }

    #[test]
    fn rule_validation() {
        assert!(ExponentRule::geometric(1.0, 1.0, 4).is_err());
        assert!(ExponentRule::geometric(-1.0, 2.0, 4).is_err());
        assert!(ExponentRule::power(1.0, 4).is_err());
        assert!(ExponentRule::explicit(vec![1.0, 1.0]).is_err());
        assert!(ExponentRule::explicit(vec![]).is_err());
        assert!(ExponentRule::explicit(vec![0.0, 0.5, 2.0]).is_ok());
    }
}
