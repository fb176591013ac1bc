//! Neighbour sets and the children construction. Everything here works in
//! the normalized coordinates of a net interval, so the output of
//! [`Engine::children`] depends on the neighbour set alone.

mod brute;
mod oracle;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::field::{ContextExt, FieldError, ParamValue};
use crate::graph::matrix::{TransitionMatrix, Weight};
use crate::ifs::{try_sort_by, Ifs, IfsError, Similarity};

pub use brute::{global_net_intervals, NetInterval};
pub use oracle::Oracle;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("attractor oracle exceeded {0} states without closing")]
    OracleBudgetExceeded(usize),
    #[error("the IFS must have convex hull [0,1]; normalize it first")]
    NotNormalized,
    #[error(transparent)]
    Ifs(#[from] IfsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_vertices: usize,
    pub max_oracle_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_vertices: 10_000,
            max_oracle_states: 200_000,
        }
    }
}

/// Normalized neighbour maps, sorted by (offset, ratio) and deduplicated.
#[derive(Clone)]
pub struct NeighbourSet {
    maps: Vec<Similarity>,
    lm: ParamValue,
}

impl PartialEq for NeighbourSet {
    fn eq(&self, other: &Self) -> bool {
        self.maps == other.maps
    }
}

impl Eq for NeighbourSet {}

impl Hash for NeighbourSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.maps.hash(state);
    }
}

impl fmt::Debug for NeighbourSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.maps).finish()
    }
}

impl NeighbourSet {
    pub fn new(mut maps: Vec<Similarity>) -> Result<Self, FieldError> {
        assert!(!maps.is_empty(), "neighbour sets are non-empty");
        try_sort_by(&mut maps, Similarity::canonical_cmp)?;
        maps.dedup();
        let mut lm = maps[0].abs_ratio()?;
        for m in &maps[1..] {
            lm = lm.max(&m.abs_ratio()?)?;
        }
        Ok(NeighbourSet { maps, lm })
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    /// Largest neighbour contraction, `max |R|`.
    pub fn lm(&self) -> &ParamValue {
        &self.lm
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    fn index(&self) -> HashMap<&Similarity, usize> {
        self.maps.iter().enumerate().map(|(i, m)| (m, i)).collect()
    }
}

/// Covering neighbours: normalized maps whose image of `[0,1]` contains
/// `[0,1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoveringSet {
    maps: Vec<Similarity>,
}

impl CoveringSet {
    pub fn new(mut maps: Vec<Similarity>) -> Result<Self, FieldError> {
        try_sort_by(&mut maps, Similarity::canonical_cmp)?;
        maps.dedup();
        Ok(CoveringSet { maps })
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ChildRecord {
    pub neighbours: NeighbourSet,
    /// Left endpoint of the child in the parent's normalized coordinates.
    pub q: ParamValue,
    pub rel_diam: ParamValue,
    /// `tg(child)/tg(parent)`.
    pub length: ParamValue,
    pub matrix: TransitionMatrix,
}

pub struct Engine {
    ifs: Ifs,
    oracle: Oracle,
}

impl Engine {
    pub fn new(ifs: Ifs, budget: Budget) -> Result<Self, EngineError> {
        if !ifs.is_hull_normalized()? {
            return Err(EngineError::NotNormalized);
        }
        let oracle = Oracle::new(ifs.clone(), budget.max_oracle_states);
        Ok(Engine { ifs, oracle })
    }

    pub fn ifs(&self) -> &Ifs {
        &self.ifs
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn meets_attractor(&self, a: &ParamValue, b: &ParamValue) -> Result<bool, EngineError> {
        self.oracle.meets(a, b)
    }

    /// Whether `g(K)` meets the open interval `(a, b)`.
    fn image_meets(&self, g: &Similarity, a: &ParamValue, b: &ParamValue) -> Result<bool, EngineError> {
        let (x, y) = g.preimage_interval(a, b)?;
        self.oracle.meets(&x, &y)
    }

    pub fn root(&self) -> NeighbourSet {
        NeighbourSet::new(vec![Similarity::identity(self.ifs.context())]).expect("identity")
    }

    pub fn root_covering(&self) -> CoveringSet {
        CoveringSet {
            maps: vec![Similarity::identity(self.ifs.context())],
        }
    }

    /// Candidate maps one transition generation below `v`, each with the
    /// row it came from and the extending letter (`None` when carried).
    fn candidates(&self, v: &NeighbourSet) -> Result<Vec<(Similarity, usize, Option<usize>)>, EngineError> {
        let ctx = self.ifs.context();
        let (zero, one) = (ctx.zero(), ctx.one());
        let mut out = Vec::new();
        for (i, f) in v.maps.iter().enumerate() {
            if f.abs_ratio()? == v.lm {
                for (j, s) in self.ifs.maps().iter().enumerate() {
                    out.push((f.compose(s), i, Some(j)));
                }
            } else {
                out.push((f.clone(), i, None));
            }
        }
        let mut kept = Vec::with_capacity(out.len());
        for c in out {
            if self.image_meets(&c.0, &zero, &one)? {
                kept.push(c);
            }
        }
        Ok(kept)
    }

    pub fn children(&self, v: &NeighbourSet) -> Result<Vec<ChildRecord>, EngineError> {
        let ctx = self.ifs.context();
        let (zero, one) = (ctx.zero(), ctx.one());
        let nprobs = self.ifs.len();
        let cands = self.candidates(v)?;
        let mut h = vec![zero.clone(), one.clone()];
        for (g, _, _) in &cands {
            for x in [g.offset.clone(), &g.ratio + &g.offset] {
                if zero.le(&x)? && x.le(&one)? {
                    h.push(x);
                }
            }
        }
        try_sort_by(&mut h, ParamValue::try_cmp)?;
        h.dedup();
        let mut out = Vec::new();
        for w in h.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            let mut rescaled = Vec::new();
            for (g, row, letter) in &cands {
                if self.image_meets(g, lo, hi)? {
                    rescaled.push((g.rescale(lo, hi)?, *row, *letter));
                }
            }
            // the local attractor in these coordinates is the union of the
            // candidate images of K
            if rescaled.is_empty() {
                continue;
            }
            let neighbours = NeighbourSet::new(rescaled.iter().map(|r| r.0.clone()).collect())?;
            let index = neighbours.index();
            let mut matrix = TransitionMatrix::zeros(nprobs, v.len(), neighbours.len());
            for (g, row, letter) in &rescaled {
                let w = match letter {
                    Some(l) => Weight::prob(nprobs, *l),
                    None => Weight::one(nprobs),
                };
                matrix.add_to(*row, index[g], &w);
            }
            let rel_diam = hi - lo;
            let length = (&neighbours.lm * &rel_diam).checked_div(&v.lm)?;
            out.push(ChildRecord {
                neighbours,
                q: lo.clone(),
                rel_diam,
                length,
                matrix,
            });
        }
        Ok(out)
    }

    /// Covering sets of the children of a net interval whose covering set is
    /// `c` and neighbour set is `v`.
    pub fn covering_children(
        &self,
        c: &CoveringSet,
        v: &NeighbourSet,
        kids: &[ChildRecord],
    ) -> Result<Vec<CoveringSet>, EngineError> {
        let mut work: Vec<Similarity> = c.maps.clone();
        let mut settled = Vec::new();
        while let Some(f) = work.pop() {
            if f.abs_ratio()?.lt(&v.lm)? {
                settled.push(f);
            } else {
                work.extend(self.ifs.maps().iter().map(|s| f.compose(s)));
            }
        }
        kids.iter()
            .map(|k| {
                let hi = &k.q + &k.rel_diam;
                let mut maps = Vec::new();
                for f in &settled {
                    let (a, b) = f.image(&self.ifs.context().zero(), &self.ifs.context().one())?;
                    if a.le(&k.q)? && hi.le(&b)? {
                        maps.push(f.rescale(&k.q, &hi)?);
                    }
                }
                Ok(CoveringSet::new(maps)?)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ParameterContext, Rational};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn cantor() -> Engine {
        let c = ParameterContext::rationals();
        let ifs = Ifs::new(
            c.clone(),
            vec![
                Similarity::new(c.frac(1, 3), c.zero()),
                Similarity::new(c.frac(1, 3), c.frac(2, 3)),
            ],
            vec![q(1, 2), q(1, 2)],
        )
        .unwrap();
        Engine::new(ifs, Budget::default()).unwrap()
    }

    #[test]
    fn cantor_oracle() {
        let e = cantor();
        let c = e.ifs().context().clone();
        assert!(!e.meets_attractor(&c.frac(1, 3), &c.frac(2, 3)).unwrap());
        assert!(e.meets_attractor(&c.frac(1, 4), &c.frac(1, 3)).unwrap());
        // (1/3, 2/3) minus the endpoints has no points; 1/4 is in K (ternary 0.0202…)
        assert!(e.meets_attractor(&c.frac(1, 5), &c.frac(3, 10)).unwrap());
        assert!(!e.meets_attractor(&c.frac(7, 9), &c.frac(8, 9)).unwrap());
    }

    #[test]
    fn cantor_children() {
        let e = cantor();
        let kids = e.children(&e.root()).unwrap();
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].q.as_rational(), Some(q(0, 1)));
        assert_eq!(kids[1].q.as_rational(), Some(q(2, 3)));
        for k in &kids {
            assert_eq!(k.neighbours, e.root());
            assert_eq!(k.length.as_rational(), Some(q(1, 3)));
        }
        assert_eq!(kids[0].matrix.symbolic(), "[[p1]]");
        assert_eq!(kids[1].matrix.symbolic(), "[[p2]]");
        let cov = e.covering_children(&e.root_covering(), &e.root(), &kids).unwrap();
        assert!(cov.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn unnormalized_ifs_rejected() {
        let c = ParameterContext::rationals();
        let ifs = Ifs::new(
            c.clone(),
            vec![
                Similarity::new(c.frac(1, 2), c.zero()),
                Similarity::new(c.frac(1, 2), c.one()),
            ],
            vec![q(1, 2), q(1, 2)],
        )
        .unwrap();
        assert!(matches!(
            Engine::new(ifs, Budget::default()),
            Err(EngineError::NotNormalized)
        ));
    }
}
