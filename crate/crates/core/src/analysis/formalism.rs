use std::collections::VecDeque;

use crate::field::Rational;
use crate::graph::{essential_class, strongly_connected_components, TransitionGraph};

use super::path::path_data;
use super::AnalysisError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalismVerdict {
    pub guaranteed: bool,
    /// Shortest cycle (edge ids) avoiding the essential class.
    pub witness: Option<Vec<usize>>,
    pub essential: Vec<usize>,
    pub note: String,
}

/// The combinatorial sufficient condition: every cycle lies in the
/// essential class.
pub fn mf_formalism_check(g: &TransitionGraph) -> Result<FormalismVerdict, AnalysisError> {
    let essential = essential_class(g)?;
    let n = g.vertex_count();
    let mut outside = vec![true; n];
    for v in &essential {
        outside[*v] = false;
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if !outside[v] {
                return Vec::new();
            }
            g.out_edges(v)
                .iter()
                .map(|e| g.edge(*e).target)
                .filter(|w| outside[*w])
                .collect()
        })
        .collect();
    let cyclic = strongly_connected_components(&adj)
        .iter()
        .any(|c| c.len() > 1 || adj[c[0]].contains(&c[0]));
    if !cyclic {
        return Ok(FormalismVerdict {
            guaranteed: true,
            witness: None,
            essential,
            note: "every cycle lies in the essential class, so the complete multifractal formalism holds for every probability vector".into(),
        });
    }
    let mut best: Option<Vec<usize>> = None;
    for s in (0..n).filter(|v| outside[*v]) {
        if let Some(c) = shortest_cycle_from(g, s, &outside) {
            if best.as_ref().is_none_or(|b| c.len() < b.len()) {
                best = Some(c);
            }
        }
    }
    Ok(FormalismVerdict {
        guaranteed: false,
        witness: best,
        essential,
        note: "a cycle lies outside the essential class; the sufficient condition fails, which does not show that the formalism fails".into(),
    })
}

fn shortest_cycle_from(g: &TransitionGraph, s: usize, allowed: &[bool]) -> Option<Vec<usize>> {
    // BFS over edges; parent[v] = edge used to reach v
    let n = g.vertex_count();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    while let Some(v) = queue.pop_front() {
        for &e in g.out_edges(v) {
            let w = g.edge(e).target;
            if !allowed[w] {
                continue;
            }
            if w == s {
                let mut path = vec![e];
                let mut at = v;
                while at != s {
                    let pe = parent[at].unwrap();
                    path.push(pe);
                    at = g.edge(pe).source;
                }
                path.reverse();
                return Some(path);
            }
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Row vector `(1) · T*(η)` for a path starting at the root.
pub fn vector_form(
    g: &TransitionGraph,
    path: &[usize],
    probs: &[Rational],
) -> Result<Vec<Rational>, AnalysisError> {
    let p = path_data(g, path)?;
    if p.source != g.root() {
        return Err(AnalysisError::NotAdmissible("path does not start at the root".into()));
    }
    let m = p.matrix.eval(probs);
    debug_assert_eq!(m.rows, 1);
    Ok(m.data)
}
