//! Shared helpers for the integration tests.

#![allow(dead_code)]

use proptest::prelude::*;

use netiv::engine::Budget;
use netiv::field::{ContextExt, ParameterContext, Rational};
use netiv::ifs::{Ifs, Similarity};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Random hull-normalized systems of 2 or 3 maps with ratios `±b^-1`,
/// `±b^-2` and lattice offsets.
pub fn arb_ifs() -> impl Strategy<Value = Ifs> {
    let base = prop_oneof![Just(2i64), Just(3i64)];
    (base, 2usize..=3, 1i64..=6)
        .prop_flat_map(|(b, n, d)| {
            let maps = prop::collection::vec((0u32..=1, any::<bool>(), 0i64..=d), n);
            let weights = prop::collection::vec(1i64..=5, n);
            (Just(b), Just(d), maps, weights)
        })
        .prop_filter_map("degenerate system", |(b, d, maps, weights)| {
            let ctx = ParameterContext::rationals();
            let sims: Vec<Similarity> = maps
                .iter()
                .map(|(k, neg, off)| {
                    let r = q(1, b.pow(k + 1));
                    let r = if *neg { -r } else { r };
                    // offsets on a lattice keep the system of finite type
                    let o = q(*off, d * b * b);
                    Similarity::new(ctx.rational(r), ctx.rational(o))
                })
                .collect();
            let mut uniq = sims.clone();
            uniq.dedup();
            if uniq.len() != sims.len() || sims.iter().skip(1).all(|m| *m == sims[0]) {
                return None;
            }
            let total: i64 = weights.iter().sum();
            let probs = weights.iter().map(|w| q(*w, total)).collect();
            let ifs = Ifs::new(ctx, sims, probs).ok()?;
            ifs.normalize_hull().ok()
        })
}

pub fn small_budget() -> Budget {
    Budget {
        max_vertices: 40,
        max_oracle_states: 20_000,
    }
}
