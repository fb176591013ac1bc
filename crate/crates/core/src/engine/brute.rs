//! Net intervals of a fixed generation straight from the definitions:
//! enumerate the word cut, collect endpoints, keep gaps that meet the
//! attractor and read off neighbour sets. Exponential; used to
//! cross-check the children recursion.

use crate::field::{ContextExt, ParamValue};
use crate::ifs::{try_sort_by, Similarity};

use super::{Engine, EngineError, NeighbourSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetInterval {
    pub lo: ParamValue,
    pub hi: ParamValue,
    pub neighbours: NeighbourSet,
}

pub fn global_net_intervals(
    engine: &Engine,
    t: &ParamValue,
    max_words: usize,
) -> Result<Vec<NetInterval>, EngineError> {
    let ifs = engine.ifs();
    let ctx = ifs.context();
    let maps: Vec<Similarity> = ifs
        .generation_cut_bounded(t, max_words)?
        .iter()
        .map(|w| ifs.compose(w))
        .collect();
    let mut ends = vec![ctx.zero(), ctx.one()];
    for s in &maps {
        ends.push(s.offset.clone());
        ends.push(&s.ratio + &s.offset);
    }
    try_sort_by(&mut ends, ParamValue::try_cmp)?;
    ends.dedup();
    let hulls: Vec<(ParamValue, ParamValue)> = maps
        .iter()
        .map(|s| s.image(&ctx.zero(), &ctx.one()))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for w in ends.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        if !engine.meets_attractor(lo, hi)? {
            continue;
        }
        let mut nb = Vec::new();
        for (s, (a, b)) in maps.iter().zip(&hulls) {
            if b.le(lo)? || hi.le(a)? {
                continue;
            }
            let (x, y) = s.preimage_interval(lo, hi)?;
            if engine.meets_attractor(&x, &y)? {
                nb.push(s.rescale(lo, hi)?);
            }
        }
        out.push(NetInterval {
            lo: lo.clone(),
            hi: hi.clone(),
            neighbours: NeighbourSet::new(nb)?,
        });
    }
    Ok(out)
}
