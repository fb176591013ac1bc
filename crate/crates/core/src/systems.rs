//! Ready-made systems used by tests, benches and the CLI's fixtures.

use std::sync::Arc;

use crate::field::{ContextExt, ParameterContext, Rational, UPoly};
use crate::ifs::{Ifs, Similarity};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `{ρx, rx + ρ(1−r), rx + 1 − r}` with generic `ρ`, `r` at the given
/// witnesses.
pub fn overlapping_three_map(rho: Rational, r: Rational, probs: Vec<Rational>) -> Ifs {
    let c = ParameterContext::builder()
        .generic("rho", rho)
        .generic("r", r)
        .assume("rho + 2*r - rho*r <= 1")
        .assume("rho^2 < r < rho")
        .build()
        .expect("valid context");
    overlapping_three_map_in(&c, probs)
}

pub fn overlapping_three_map_in(c: &Arc<ParameterContext>, probs: Vec<Rational>) -> Ifs {
    let rho = c.generator("rho").expect("rho declared");
    let r = c.generator("r").expect("r declared");
    let maps = vec![
        Similarity::new(rho.clone(), c.zero()),
        Similarity::new(r.clone(), &rho * &(&c.one() - &r)),
        Similarity::new(r.clone(), &c.one() - &r),
    ];
    Ifs::new(c.clone(), maps, probs).expect("valid IFS")
}

/// The worked example at ρ = 1/2, r = 3/10 with uniform weights.
pub fn worked_example() -> Ifs {
    overlapping_three_map(q(1, 2), q(3, 10), vec![q(1, 3); 3])
}

pub fn cantor(p1: Rational) -> Ifs {
    let c = ParameterContext::rationals();
    let p2 = Rational::from_integer(1.into()) - &p1;
    Ifs::new(
        c.clone(),
        vec![
            Similarity::new(c.frac(1, 3), c.zero()),
            Similarity::new(c.frac(1, 3), c.frac(2, 3)),
        ],
        vec![p1, p2],
    )
    .expect("valid IFS")
}

/// `{x/2, x/2 + 1/4, x/2 + 1/2}`.
pub fn cantor_convolution() -> Ifs {
    let c = ParameterContext::rationals();
    Ifs::new(
        c.clone(),
        vec![
            Similarity::new(c.frac(1, 2), c.zero()),
            Similarity::new(c.frac(1, 2), c.frac(1, 4)),
            Similarity::new(c.frac(1, 2), c.frac(1, 2)),
        ],
        vec![q(1, 4), q(1, 2), q(1, 4)],
    )
    .expect("valid IFS")
}

/// `{ρx, ρx + 1 − ρ}` with `ρ² + ρ − 1 = 0`, the reciprocal of the golden mean.
pub fn golden_bernoulli() -> Ifs {
    let c = ParameterContext::builder()
        .algebraic(
            "rho",
            UPoly::new(vec![q(-1, 1), q(1, 1), q(1, 1)]),
            q(3, 5),
            q(7, 10),
        )
        .build()
        .expect("valid context");
    let rho = c.generator("rho").unwrap();
    Ifs::new(
        c.clone(),
        vec![
            Similarity::new(rho.clone(), c.zero()),
            Similarity::new(rho.clone(), &c.one() - &rho),
        ],
        vec![q(1, 2), q(1, 2)],
    )
    .expect("valid IFS")
}
