use std::collections::BTreeSet;

use crate::exec::{map_ordered, Execution};
use crate::field::{ContextExt, ParamValue, Rational};
use crate::graph::{RatMatrix, TransitionGraph};

use super::path::path_data;
use super::spectral::{dimension_from, DimensionEstimate};
use super::AnalysisError;

const MAX_CYCLES: usize = 200_000;
const MAX_PUMP_PAIRS: usize = 50_000;

struct Johnson<'a> {
    adj: &'a [Vec<usize>],
    start: usize,
    in_comp: Vec<bool>,
    blocked: Vec<bool>,
    b: Vec<BTreeSet<usize>>,
    stack: Vec<usize>,
    max_len: usize,
    out: Vec<Vec<usize>>,
}

impl Johnson<'_> {
    fn unblock(&mut self, v: usize) {
        let mut work = vec![v];
        while let Some(u) = work.pop() {
            if self.blocked[u] {
                self.blocked[u] = false;
                work.extend(std::mem::take(&mut self.b[u]));
            }
        }
    }

    fn circuit(&mut self, v: usize) -> bool {
        if self.out.len() >= MAX_CYCLES {
            return true;
        }
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        let adj = self.adj;
        for &w in &adj[v] {
            if !self.in_comp[w] {
                continue;
            }
            if w == self.start {
                self.out.push(self.stack.clone());
                found = true;
            } else if !self.blocked[w] {
                if self.stack.len() < self.max_len {
                    found |= self.circuit(w);
                } else {
                    // pruned by length; never block on a pruned branch
                    found = true;
                }
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &adj[v] {
                if self.in_comp[w] {
                    self.b[w].insert(v);
                }
            }
        }
        self.stack.pop();
        found
    }
}

/// Elementary circuits of a simple digraph (Johnson), as vertex sequences
/// starting at their least vertex, of at most `max_len` vertices.
fn vertex_cycles(adj: &[Vec<usize>], max_len: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut out = Vec::new();
    for s in 0..n {
        // component of s in the subgraph induced on vertices ≥ s
        let sub: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if v < s {
                    Vec::new()
                } else {
                    adj[v].iter().copied().filter(|w| *w >= s).collect()
                }
            })
            .collect();
        let comps = crate::graph::strongly_connected_components(&sub);
        let comp = comps.into_iter().find(|c| c.contains(&s)).unwrap();
        let mut in_comp = vec![false; n];
        for v in &comp {
            in_comp[*v] = true;
        }
        if comp.len() == 1 && !adj[s].contains(&s) {
            continue;
        }
        let mut j = Johnson {
            adj,
            start: s,
            in_comp,
            blocked: vec![false; n],
            b: vec![BTreeSet::new(); n],
            stack: Vec::new(),
            max_len,
            out: Vec::new(),
        };
        j.circuit(s);
        out.extend(j.out);
        if out.len() >= MAX_CYCLES {
            break;
        }
    }
    out
}

/// Simple cycles as edge-id sequences, expanding parallel edges, with at
/// most `max_len` edges each. Order is deterministic.
pub fn simple_cycles(g: &TransitionGraph, max_len: usize) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut between: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; n];
    for e in g.edges() {
        between[e.source][e.target].push(e.id);
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|v| (0..n).filter(|w| !between[v][*w].is_empty()).collect())
        .collect();
    let mut out = Vec::new();
    for vc in vertex_cycles(&adj, max_len) {
        let hops: Vec<&Vec<usize>> = (0..vc.len())
            .map(|i| &between[vc[i]][vc[(i + 1) % vc.len()]])
            .collect();
        let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
        for h in hops {
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    h.iter().map(move |e| {
                        let mut q = p.clone();
                        q.push(*e);
                        q
                    })
                })
                .collect();
        }
        out.extend(partial);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum CycleKind {
    Simple,
    /// `first^a · second^b` where exactly one exponent is `n > 1`.
    Pumped {
        first: usize,
        second: usize,
        n: u32,
        pump_second: bool,
    },
}

#[derive(Clone, Debug)]
pub struct CycleDimension {
    pub edges: Vec<usize>,
    pub kind: CycleKind,
    pub dimension: DimensionEstimate,
}

/// Attained local dimensions over enumerated cycles. `alpha_min` is an
/// upper bound for the true minimum and `alpha_max` a lower bound for the
/// true maximum.
#[derive(Clone, Debug)]
pub struct DimensionBounds {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub argmin: usize,
    pub argmax: usize,
    pub candidates: Vec<CycleDimension>,
    pub nilpotent_cycles: usize,
    pub complete: bool,
}

struct Evaluated {
    mats: Vec<RatMatrix>,
    lengths: Vec<ParamValue>,
}

impl Evaluated {
    fn new(g: &TransitionGraph, probs: &[Rational]) -> Self {
        Evaluated {
            mats: g.edges().iter().map(|e| e.matrix.eval(probs)).collect(),
            lengths: g.edges().iter().map(|e| e.length.clone()).collect(),
        }
    }

    fn dimension(&self, g: &TransitionGraph, edges: &[usize]) -> Result<DimensionEstimate, AnalysisError> {
        let mut m = self.mats[edges[0]].clone();
        let mut l = g.ifs().context().one();
        for (i, e) in edges.iter().enumerate() {
            if i > 0 {
                m = m.mul(&self.mats[*e]);
            }
            l = &l * &self.lengths[*e];
        }
        dimension_from(&l, &m)
    }
}

fn rotate_to(cycle: &[usize], g: &TransitionGraph, v: usize) -> Option<Vec<usize>> {
    let k = cycle.iter().position(|e| g.edge(*e).source == v)?;
    Some(cycle[k..].iter().chain(&cycle[..k]).copied().collect())
}

fn repeat(c: &[usize], n: u32) -> Vec<usize> {
    (0..n).flat_map(|_| c.iter().copied()).collect()
}

pub fn dimension_bounds(
    g: &TransitionGraph,
    probs: &[Rational],
    max_cycle_len: usize,
    pump_depth: u32,
    exec: Execution,
) -> Result<DimensionBounds, AnalysisError> {
    g.require_closed()?;
    let ev = Evaluated::new(g, probs);
    let simple = simple_cycles(g, max_cycle_len);
    let mut complete = simple.len() < MAX_CYCLES;
    let mut jobs: Vec<(Vec<usize>, CycleKind)> =
        simple.iter().map(|c| (c.clone(), CycleKind::Simple)).collect();
    if pump_depth >= 2 {
        let verts: Vec<BTreeSet<usize>> = simple
            .iter()
            .map(|c| c.iter().map(|e| g.edge(*e).source).collect())
            .collect();
        let mut pairs = 0;
        'outer: for i in 0..simple.len() {
            for j in i + 1..simple.len() {
                let Some(&w) = verts[i].intersection(&verts[j]).next() else {
                    continue;
                };
                pairs += 1;
                if pairs > MAX_PUMP_PAIRS {
                    complete = false;
                    break 'outer;
                }
                let a = rotate_to(&simple[i], g, w).unwrap();
                let b = rotate_to(&simple[j], g, w).unwrap();
                for n in 2..=pump_depth {
                    for pump_second in [true, false] {
                        let (x, y) = if pump_second {
                            (a.clone(), repeat(&b, n))
                        } else {
                            (repeat(&a, n), b.clone())
                        };
                        jobs.push((
                            x.into_iter().chain(y).collect(),
                            CycleKind::Pumped {
                                first: i,
                                second: j,
                                n,
                                pump_second,
                            },
                        ));
                    }
                }
                // the plain concatenation
                jobs.push((
                    a.iter().chain(&b).copied().collect(),
                    CycleKind::Pumped {
                        first: i,
                        second: j,
                        n: 1,
                        pump_second: true,
                    },
                ));
            }
        }
    }
    let results = map_ordered(exec, &jobs, |(edges, _)| ev.dimension(g, edges));
    let mut candidates = Vec::new();
    let mut nilpotent = 0;
    for ((edges, kind), r) in jobs.into_iter().zip(results) {
        match r {
            Ok(d) => candidates.push(CycleDimension {
                edges,
                kind,
                dimension: d,
            }),
            Err(AnalysisError::ZeroSpectralRadius) => nilpotent += 1,
            Err(e) => return Err(e),
        }
    }
    if candidates.is_empty() {
        return Err(AnalysisError::InvalidOption(
            "no cycles with positive spectral radius within the length bound".into(),
        ));
    }
    let mut argmin = 0;
    let mut argmax = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.dimension.value < candidates[argmin].dimension.value {
            argmin = i;
        }
        if c.dimension.value > candidates[argmax].dimension.value {
            argmax = i;
        }
    }
    Ok(DimensionBounds {
        alpha_min: candidates[argmin].dimension.value,
        alpha_max: candidates[argmax].dimension.value,
        argmin,
        argmax,
        candidates,
        nilpotent_cycles: nilpotent,
        complete,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Constant,
    Increasing,
    Decreasing,
    Mixed,
}

#[derive(Clone, Debug)]
pub struct PumpedFamily {
    pub points: Vec<(u32, DimensionEstimate)>,
    pub trend: Trend,
}

/// Dimensions of the cycles `prefix · pumpⁿ · suffix`.
pub fn pumped_family(
    g: &TransitionGraph,
    prefix: &[usize],
    pump: &[usize],
    suffix: &[usize],
    ns: &[u32],
    probs: &[Rational],
) -> Result<PumpedFamily, AnalysisError> {
    let ev = Evaluated::new(g, probs);
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let edges: Vec<usize> = prefix
            .iter()
            .copied()
            .chain(repeat(pump, n))
            .chain(suffix.iter().copied())
            .collect();
        if !path_data(g, &edges)?.is_cycle() {
            return Err(AnalysisError::NotAdmissible(format!("n = {n} does not give a cycle")));
        }
        points.push((n, ev.dimension(g, &edges)?));
    }
    let diffs: Vec<f64> = points.windows(2).map(|w| w[1].1.value - w[0].1.value).collect();
    let eps = 1e-12;
    let trend = if diffs.iter().all(|d| d.abs() <= eps) {
        Trend::Constant
    } else if diffs.iter().all(|d| *d >= -eps) {
        Trend::Increasing
    } else if diffs.iter().all(|d| *d <= eps) {
        Trend::Decreasing
    } else {
        Trend::Mixed
    };
    Ok(PumpedFamily { points, trend })
}
