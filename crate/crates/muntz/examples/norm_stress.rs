//! Stress check: certified norms against brute-force oracles over hostile
//! exponent regimes (many terms, mixed tiny and huge exponents).
//!
//! ```sh
//! cargo run --release -p muntz --example norm_stress
//! ```

use muntz::norms::{l1_norm, sup_norm};
use muntz::MuntzPoly;

struct Rng(u64);
impl Rng {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

fn dense_sup(f: &MuntzPoly) -> f64 {
    // uniform grid plus log-refined boundary layers on both ends
    let mut best = 0.0_f64;
    for k in 0..=200_000u64 {
        let x = k as f64 / 200_000.0;
        best = best.max(f.eval(x).unwrap().abs());
    }
    for j in 0..=3200 {
        let u = 10.0_f64.powf(-16.0 + j as f64 / 200.0);
        for x in [u, 1.0 - u] {
            if (0.0..=1.0).contains(&x) {
                best = best.max(f.eval(x).unwrap().abs());
            }
        }
    }
    best
}

fn dense_l1(f: &MuntzPoly) -> f64 {
    // trapezoid on |f| over a composite grid; boundary layers resolved via
    // the exact antiderivative between grid points when f keeps its sign
    let mut grid: Vec<f64> = (0..=100_000u64).map(|k| k as f64 / 100_000.0).collect();
    for j in 0..=1600 {
        let u = 10.0_f64.powf(-16.0 + j as f64 / 100.0);
        grid.push(u);
        grid.push(1.0 - u);
    }
    grid.retain(|x| (0.0..=1.0).contains(x));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let anti = f.antiderivative();
    let mut total = 0.0;
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fa = f.eval(a).unwrap();
        let fb = f.eval(b).unwrap();
        let mass = anti.eval(b).unwrap() - anti.eval(a).unwrap();
        if fa.signum() == fb.signum() {
            total += mass.abs();
        } else {
            // crude split at the linear crossing; error vanishes with grid
            total += mass.abs().max((fa.abs() + fb.abs()) * 0.5 * (b - a));
        }
    }
    total
}

fn main() {
    let mut rng = Rng(0x0057_4211);
    let mut worst_sup = 0.0_f64;
    let mut worst_l1 = 0.0_f64;
    for case in 0..300 {
        let terms = 2 + (rng.next() % 7) as usize;
        let pairs: Vec<(f64, f64)> = (0..terms)
            .map(|_| {
                let exp = match rng.next() % 3 {
                    0 => rng.range(0.0, 4.0),
                    1 => rng.range(4.0, 64.0),
                    _ => 2.0_f64.powf(rng.range(6.0, 20.0)),
                };
                (exp, rng.range(-1.0, 1.0))
            })
            .collect();
        let Ok(f) = MuntzPoly::from_terms(pairs) else {
            continue;
        };
        if f.is_zero() {
            continue;
        }

        let sup = sup_norm(&f);
        let oracle_sup = dense_sup(&f);
        // the certified sup can only beat the grid by the bracket error
        assert!(
            oracle_sup <= sup.value + sup.error_radius + 1e-12,
            "case {case}: oracle sup {oracle_sup} above certified {} + {}",
            sup.value,
            sup.error_radius
        );
        let rel_sup = (sup.value - oracle_sup).max(0.0) / (1.0 + oracle_sup);
        worst_sup = worst_sup.max(rel_sup);

        let l1 = l1_norm(&f);
        let oracle_l1 = dense_l1(&f);
        let rel_l1 = (l1.value - oracle_l1).abs() / (1.0 + oracle_l1);
        // the dense oracle is only ~1e-5 accurate in the boundary layers
        assert!(
            rel_l1 <= 2e-4,
            "case {case}: l1 {} vs oracle {oracle_l1}",
            l1.value
        );
        worst_l1 = worst_l1.max(rel_l1);
    }
    println!("300 hostile cases: worst sup overshoot {worst_sup:.3e}, worst l1 deviation {worst_l1:.3e}");
}
