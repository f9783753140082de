//! Certified sup norms and exact L¹ norms on `[0, 1]`, built on sign-change
//! isolation for generalized polynomials.
//!
//! Isolation works on the *sign polynomial*: dividing `f` by `x^{λ₀}` shifts
//! every exponent down by the least one without changing signs on `(0, 1)`,
//! so differentiating never produces negative exponents. Sign changes are then
//! isolated recursively: the critical points of a sign polynomial come from
//! its derivative (one term fewer), and between consecutive critical brackets
//! the function is monotone, so a sign flip there brackets exactly one root.
//! The recursion terminates because each derivative drops the constant term,
//! and it certifies completeness structurally — at most `terms − 1` sign
//! changes can exist, matching the generalized Descartes bound.

use serde::Serialize;

use crate::poly::{MuntzPoly, Term};
use crate::{Error, Result};

/// A bracket `[lo, hi]` containing exactly one sign change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
}

impl RootBracket {
    /// Midpoint, used as the root estimate.
    pub fn point(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Ordered interior sign changes of a polynomial on `(0, 1)`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RootList {
    brackets: Vec<RootBracket>,
}

impl RootList {
    pub fn brackets(&self) -> &[RootBracket] {
        &self.brackets
    }

    pub fn points(&self) -> Vec<f64> {
        self.brackets.iter().map(RootBracket::point).collect()
    }

    pub fn len(&self) -> usize {
        self.brackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brackets.is_empty()
    }

    pub fn max_width(&self) -> f64 {
        self.brackets.iter().map(RootBracket::width).fold(0.0, f64::max)
    }
}

/// A norm value with extremizer location and a certified error radius.
///
/// `argmax` is populated for sup norms only and reports the leftmost
/// maximizer. `error_radius` bounds `|reported − true|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub argmax: Option<f64>,
    pub error_radius: f64,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Shifts exponents so the least becomes zero. Multiplying by the positive
/// factor `x^{-λ₀}` preserves the sign pattern on `(0, 1)`.
fn sign_poly(f: &MuntzPoly) -> MuntzPoly {
    let shift = f.least_exponent().unwrap_or(0.0);
    if shift == 0.0 {
        return f.clone();
    }
    let terms = f
        .terms()
        .iter()
        .map(|t| Term {
            exponent: t.exponent - shift,
            coefficient: t.coefficient,
        })
        .collect();
    MuntzPoly::from_raw_terms(terms)
}

/// Sign polynomial of `f'`: the term `a x^λ` (λ > 0) contributes `a λ` at
/// exponent `λ − shift`, with `shift` chosen so the least exponent is zero.
/// Constant terms vanish. Signs of `f'` on `(0, 1)` are preserved.
fn derivative_sign_poly(f: &MuntzPoly) -> MuntzPoly {
    let mut shift = None;
    for t in f.terms() {
        if t.exponent > 0.0 {
            shift = Some(t.exponent - 1.0);
            break;
        }
    }
    let Some(shift) = shift else {
        return MuntzPoly::zero();
    };
    let terms = f
        .terms()
        .iter()
        .filter(|t| t.exponent > 0.0)
        .map(|t| Term {
            exponent: t.exponent - 1.0 - shift,
            coefficient: t.coefficient * t.exponent,
        })
        .collect();
    MuntzPoly::from_raw_terms(terms)
}

/// Shrinks a sign flip on `[a, b]` to the floating-point grid (adjacent
/// floats). Sign changes of interest can sit within `1/λ` of 1, far below
/// any fixed x-tolerance, and a bracket left wider than the boundary layer
/// loses L¹ mass; running to the representable floor costs ~50 evaluations
/// and keeps the split error one-sided.
fn bisect(p: &MuntzPoly, a: f64, b: f64, sign_a: i8) -> RootBracket {
    let (mut lo, mut hi) = (a, b);
    let mut s_lo = sign_a;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = sign_of(p.value(mid));
        if s == 0 {
            return RootBracket { lo: mid, hi: mid };
        }
        if s == s_lo {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
        }
    }
    RootBracket { lo, hi }
}

/// Recursive Rolle isolation of all sign changes of `p` on `(0, 1)`.
/// `p` must be a sign polynomial (least exponent zero).
fn isolate_sign_changes(p: &MuntzPoly) -> Vec<RootBracket> {
    if p.num_terms() <= 1 {
        return Vec::new();
    }
    let critical = isolate_sign_changes(&derivative_sign_poly(p));

    // Edges: endpoints plus every critical bracket boundary and midpoint.
    // Between consecutive critical brackets p is monotone; inside a bracket
    // the midpoint catches the double-crossing case.
    let mut edges = Vec::with_capacity(3 * critical.len() + 2);
    edges.push(0.0);
    for b in &critical {
        edges.push(b.lo);
        if b.width() > 0.0 {
            edges.push(b.point());
        }
        edges.push(b.hi);
    }
    edges.push(1.0);
    edges.dedup();

    let mut out = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for &x in &edges {
        let s = sign_of(p.value(x));
        if s == 0 {
            // Exact zero at an edge: a flip across it shows up when the next
            // nonzero sign differs from the last one.
            continue;
        }
        if let Some((px, ps)) = last {
            if ps != s {
                out.push(bisect(p, px, x, ps));
            }
        }
        last = Some((x, s));
    }
    out
}

/// Isolates every sign change of `f` on `(0, 1)` into brackets of width at
/// most `tol` (narrower when the floating-point grid allows it; brackets are
/// always driven to adjacent floats).
///
/// Completeness is structural: with `m` terms the recursion admits at most
/// `m − 1` sign changes, the generalized Descartes budget.
pub fn isolate_zeros(f: &MuntzPoly, tol: f64) -> Result<RootList> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    let brackets = isolate_sign_changes(&sign_poly(f));
    assert!(
        brackets.len() < f.num_terms(),
        "root count {} exceeds the Descartes budget for {} terms",
        brackets.len(),
        f.num_terms()
    );
    debug_assert!(brackets.iter().all(|b| b.width() <= tol || b.width() <= 4.0 * f64::EPSILON));
    Ok(RootList { brackets })
}

/// Total variation of `f` over `[lo, hi]`, bounded term by term via the
/// monotonicity of each monomial. Finite even where `f'` is unbounded.
fn variation_bound(f: &MuntzPoly, lo: f64, hi: f64) -> f64 {
    f.terms()
        .iter()
        .map(|t| {
            if t.exponent == 0.0 {
                0.0
            } else {
                t.coefficient.abs() * (hi.powf(t.exponent) - lo.powf(t.exponent))
            }
        })
        .sum()
}

fn sup_norm_with_candidates(f: &MuntzPoly, hi_end: f64) -> NormResult {
    if f.is_zero() {
        return NormResult {
            value: 0.0,
            argmax: Some(0.0),
            error_radius: 0.0,
        };
    }
    let dsp = derivative_sign_poly(f);
    let brackets = if dsp.num_terms() >= 2 {
        isolate_sign_changes(&dsp)
    } else {
        Vec::new()
    };

    // |f| on [0, hi_end] is maximized at an endpoint or at a sign change of
    // f'; evaluating bracket edges too keeps the error radius honest.
    let mut candidates = Vec::with_capacity(3 * brackets.len() + 2);
    candidates.push(0.0);
    for b in &brackets {
        if b.lo < hi_end {
            candidates.push(b.lo);
            candidates.push(b.point().min(hi_end));
            candidates.push(b.hi.min(hi_end));
        }
    }
    candidates.push(hi_end);
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite candidates"));
    candidates.dedup();

    let mut value = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    for &x in &candidates {
        let v = f.value(x).abs();
        if v > value {
            value = v;
            argmax = x;
        }
    }

    let eval_slop = 8.0 * f64::EPSILON * f.coefficient_l1();
    let bracket_err = brackets
        .iter()
        .filter(|b| b.lo < hi_end)
        .map(|b| variation_bound(f, b.lo, b.hi.min(hi_end)))
        .fold(0.0, f64::max);
    NormResult {
        value,
        argmax: Some(argmax),
        error_radius: bracket_err + eval_slop,
    }
}

/// `max_{[0,1]} |f|` from the endpoints and every interior critical point,
/// reporting the leftmost maximizer.
pub fn sup_norm(f: &MuntzPoly) -> NormResult {
    sup_norm_with_candidates(f, 1.0)
}

/// `max_{[0,c]} |f|` for `c ∈ (0, 1]`, same method restricted to the prefix.
pub fn sup_norm_on(f: &MuntzPoly, c: f64) -> Result<NormResult> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "prefix end must lie in (0, 1], got {c}"
        )));
    }
    Ok(sup_norm_with_candidates(f, c))
}

/// `∫₀¹ |f|` as an alternating sum of the exact antiderivative between
/// consecutive sign changes.
pub fn l1_norm(f: &MuntzPoly) -> NormResult {
    if f.is_zero() {
        return NormResult {
            value: 0.0,
            argmax: None,
            error_radius: 0.0,
        };
    }
    let brackets = isolate_sign_changes(&sign_poly(f));
    let anti = f.antiderivative();

    let mut value = 0.0;
    let mut prev = 0.0; // antiderivative vanishes at 0
    for b in &brackets {
        let v = anti.value(b.point());
        value += (v - prev).abs();
        prev = v;
    }
    value += (anti.value(1.0) - prev).abs();

    let width_sum: f64 = brackets.iter().map(RootBracket::width).sum();
    let error_radius = width_sum * f.coefficient_l1()
        + 8.0 * f64::EPSILON * anti.coefficient_l1() * (brackets.len() as f64 + 2.0);
    NormResult {
        value,
        argmax: None,
        error_radius,
    }
}

/// `f / ‖f‖₁`; the result has unit L¹ norm.
pub fn normalize_l1(f: &MuntzPoly) -> Result<MuntzPoly> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let norm = l1_norm(f).value;
    if norm <= 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    Ok(f.scale(1.0 / norm))
}
