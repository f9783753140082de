//! Shared test oracles, independent of the library's evaluation paths.
#![allow(dead_code)] // each test binary uses a subset

use muntz::MuntzPoly;

/// Adaptive Simpson quadrature with an absolute tolerance; the independent
/// integration oracle for the L¹ checks.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1) + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    recurse(&f, a, b, simpson(&f, a, m, b), tol, 40)
}

/// Dense-grid maximum of |f| with the grid point attaining it.
pub fn grid_sup(f: &MuntzPoly, points: usize) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    for k in 0..=points {
        let x = k as f64 / points as f64;
        let v = f.eval(x).unwrap().abs();
        if v > best.0 {
            best = (v, x);
        }
    }
    best
}

/// A small deterministic generator for test polynomials (xorshift-based, no
/// dependency on the library's sampling paths).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// A polynomial with `terms` distinct exponents in [0, max_exp] and
    /// coefficients in [-1, 1] bounded away from zero.
    pub fn poly(&mut self, terms: usize, max_exp: f64) -> MuntzPoly {
        loop {
            let mut exps: Vec<f64> = (0..terms).map(|_| self.range(0.0, max_exp)).collect();
            exps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if exps.windows(2).any(|w| w[1] - w[0] < 1e-6) {
                continue;
            }
            let pairs: Vec<(f64, f64)> = exps
                .into_iter()
                .map(|e| {
                    let mut c = self.range(-1.0, 1.0);
                    if c.abs() < 1e-3 {
                        c = if c >= 0.0 { 1e-3 } else { -1e-3 };
                    }
                    (e, c)
                })
                .collect();
            return MuntzPoly::from_terms(pairs).unwrap();
        }
    }
}
