//! Deterministic sampling of the unit ball of the Müntz span.
//!
//! Random polynomials alone miss the near-extremal spike functions the
//! operator-norm experiments hinge on, so every sample stream starts with the
//! deterministic members `gₙ = (γₙ+1)x^{γₙ}` for each materialized exponent
//! and appends random combinations after them. Per-sample generators are
//! derived from `(master seed, index)`, so results do not depend on how the
//! samples are distributed over worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;

use crate::norms;
use crate::poly::{ExponentRule, MuntzPoly};
use crate::Result;

/// At most this many exponents carry a nonzero coefficient in one sample.
pub const MAX_ACTIVE_TERMS: usize = 6;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A generator seeded from `(master, stream, index)`; identical inputs give
/// identical streams on every platform and worker count.
pub(crate) fn derive_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut state = master;
    let _ = splitmix64(&mut state);
    state ^= stream.wrapping_mul(0xa076_1d64_78bd_642f);
    let _ = splitmix64(&mut state);
    state ^= index.wrapping_mul(0xe703_7ed1_a0b4_28db);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Source of unit-L¹ polynomials over a materialized exponent rule.
#[derive(Debug, Clone)]
pub struct UnitBallSampler {
    rule: ExponentRule,
    exponents: Vec<f64>,
    master_seed: u64,
}

impl UnitBallSampler {
    pub fn new(rule: &ExponentRule, master_seed: u64) -> Result<Self> {
        rule.validate()?;
        Ok(Self {
            rule: rule.clone(),
            exponents: rule.materialize(),
            master_seed,
        })
    }

    pub fn rule(&self) -> &ExponentRule {
        &self.rule
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// The deterministic near-extremal members `gₙ = (γₙ+1)x^{γₙ}`; each has
    /// exact unit L¹ norm.
    pub fn extremal_members(&self) -> Vec<MuntzPoly> {
        self.exponents
            .iter()
            .map(|&gamma| {
                MuntzPoly::monomial(gamma + 1.0, gamma).expect("materialized exponents are valid")
            })
            .collect()
    }

    /// The random member at `index`: coefficients uniform on `[-1, 1]` over a
    /// random subset of at most [`MAX_ACTIVE_TERMS`] exponents, normalized to
    /// unit L¹ norm. Deterministic in `(master seed, index)`.
    pub fn random_member(&self, index: u64) -> MuntzPoly {
        let mut rng = derive_rng(self.master_seed, 0, index);
        let n = self.exponents.len();
        loop {
            let k = rng.gen_range(1..=MAX_ACTIVE_TERMS.min(n));
            let mut chosen = BTreeSet::new();
            while chosen.len() < k {
                chosen.insert(rng.gen_range(0..n));
            }
            let pairs: Vec<(f64, f64)> = chosen
                .iter()
                .map(|&i| (self.exponents[i], rng.gen_range(-1.0..1.0)))
                .collect();
            if pairs.iter().all(|(_, c)| c.abs() < 1e-3) {
                continue;
            }
            let poly = MuntzPoly::from_terms(pairs).expect("sampled terms are valid");
            if poly.is_zero() {
                continue;
            }
            let norm = norms::l1_norm(&poly).value;
            // degenerate cancellation: draw again from the same stream
            if norm <= 1e-9 {
                continue;
            }
            return poly.scale(1.0 / norm);
        }
    }

    /// The extremal members followed by `random_count` random ones. The
    /// random part is evaluated in parallel; ordering is by index and does
    /// not depend on the worker count.
    pub fn members(&self, random_count: usize) -> Vec<MuntzPoly> {
        let mut out = self.extremal_members();
        let random: Vec<MuntzPoly> = (0..random_count as u64)
            .into_par_iter()
            .map(|i| self.random_member(i))
            .collect();
        out.extend(random);
        out
    }
}
