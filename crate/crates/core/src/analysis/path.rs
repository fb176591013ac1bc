use crate::field::{ContextExt, ParamValue};
use crate::graph::{TransitionGraph, TransitionMatrix};

use super::AnalysisError;

/// An admissible edge sequence with its length `L(η)` and matrix `T*(η)`.
#[derive(Clone, Debug)]
pub struct PathData {
    pub edges: Vec<usize>,
    pub source: usize,
    pub target: usize,
    pub length: ParamValue,
    pub matrix: TransitionMatrix,
}

impl PathData {
    pub fn is_cycle(&self) -> bool {
        !self.edges.is_empty() && self.source == self.target
    }
}

/// The empty path sits at the root.
pub fn path_data(g: &TransitionGraph, edges: &[usize]) -> Result<PathData, AnalysisError> {
    let nprobs = g.ifs().len();
    let ctx = g.ifs().context();
    let Some(&first) = edges.first() else {
        let root = g.root();
        return Ok(PathData {
            edges: Vec::new(),
            source: root,
            target: root,
            length: ctx.one(),
            matrix: TransitionMatrix::identity(nprobs, g.vertices()[root].len()),
        });
    };
    let mut at = None;
    let mut length = ctx.one();
    let mut matrix: Option<TransitionMatrix> = None;
    for &id in edges {
        let e = g
            .edges()
            .get(id)
            .ok_or_else(|| AnalysisError::NotAdmissible(format!("no edge {id}")))?;
        if let Some(v) = at {
            if v != e.source {
                return Err(AnalysisError::NotAdmissible(format!(
                    "edge {id} leaves v{} but the path is at v{v}",
                    e.source
                )));
            }
        }
        at = Some(e.target);
        length = &length * &e.length;
        matrix = Some(match matrix {
            Some(m) => m.mul(&e.matrix),
            None => e.matrix.clone(),
        });
    }
    Ok(PathData {
        edges: edges.to_vec(),
        source: g.edge(first).source,
        target: at.unwrap(),
        length,
        matrix: matrix.unwrap(),
    })
}
