//! The transition graph: breadth-first exploration of neighbour sets from
//! the root, with labelled multi-edges.

mod contract;
mod export;
pub mod matrix;
mod scc;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::engine::{Budget, CoveringSet, Engine, EngineError, NeighbourSet};
use crate::field::{FieldError, ParamValue};
use crate::ifs::{Ifs, IfsError};

pub use contract::contract_single_child;
pub use export::{rational_string, to_dot, to_json, to_json_value, value_json};
pub use matrix::{RatMatrix, TransitionMatrix, Weight};
pub use scc::{essential_class, strongly_connected_components};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("the graph was truncated ({0}); this analysis needs a closed graph")]
    TruncatedGraph(String),
    #[error("{n} sink components found, expected exactly one: {0:?}", n = .0.len())]
    MultipleSinkComponents(Vec<Vec<usize>>),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl From<FieldError> for GraphError {
    fn from(e: FieldError) -> Self {
        GraphError::Engine(e.into())
    }
}

impl From<IfsError> for GraphError {
    fn from(e: IfsError) -> Self {
        GraphError::Engine(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    /// Every vertex's children are vertices: the finite neighbour condition holds.
    Closed,
    Truncated(String),
}

impl Status {
    pub fn is_closed(&self) -> bool {
        matches!(self, Status::Closed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Closed => "CLOSED",
            Status::Truncated(_) => "TRUNCATED",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: usize,
    pub source: usize,
    pub target: usize,
    pub q: ParamValue,
    pub rel_diam: ParamValue,
    pub length: ParamValue,
    pub matrix: TransitionMatrix,
    /// Ids of the edges of the originally built graph this edge composes.
    pub provenance: Vec<usize>,
}

/// Largest covering set seen along the first realization of each vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WscStatistic {
    pub max_covering: usize,
    /// Bounded within the explored region; not a certificate beyond it.
    pub bounded_within_explored: bool,
}

#[derive(Clone, Debug)]
pub struct TransitionGraph {
    ifs: Ifs,
    vertices: Vec<NeighbourSet>,
    /// Vertex id in the originally built graph.
    labels: Vec<usize>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    root: usize,
    status: Status,
    wsc: WscStatistic,
}

impl TransitionGraph {
    pub(crate) fn from_parts(
        ifs: Ifs,
        vertices: Vec<NeighbourSet>,
        labels: Vec<usize>,
        edges: Vec<Edge>,
        root: usize,
        status: Status,
        wsc: WscStatistic,
    ) -> Self {
        let mut out = vec![Vec::new(); vertices.len()];
        for e in &edges {
            out[e.source].push(e.id);
        }
        TransitionGraph {
            ifs,
            vertices,
            labels,
            edges,
            out,
            root,
            status,
            wsc,
        }
    }

    /// The hull-normalized IFS the graph was built from.
    pub fn ifs(&self) -> &Ifs {
        &self.ifs
    }

    pub fn vertices(&self) -> &[NeighbourSet] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn wsc(&self) -> WscStatistic {
        self.wsc
    }

    pub fn find_vertex(&self, v: &NeighbourSet) -> Option<usize> {
        self.vertices.iter().position(|w| w == v)
    }

    pub fn require_closed(&self) -> Result<(), GraphError> {
        match &self.status {
            Status::Closed => Ok(()),
            Status::Truncated(r) => Err(GraphError::TruncatedGraph(r.clone())),
        }
    }

    /// Adjacency by target vertex, one entry per edge.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        self.out
            .iter()
            .map(|es| es.iter().map(|e| self.edges[*e].target).collect())
            .collect()
    }
}

/// Builds the transition graph of `ifs` (hull-normalized first).
pub fn build_graph(ifs: &Ifs, budget: Budget) -> Result<TransitionGraph, GraphError> {
    let ifs = ifs.normalize_hull()?;
    let engine = Engine::new(ifs.clone(), budget)?;
    build_with_engine(&engine, budget)
}

pub fn build_with_engine(engine: &Engine, budget: Budget) -> Result<TransitionGraph, GraphError> {
    let root = engine.root();
    let mut vertices = vec![root.clone()];
    let mut covering: Vec<CoveringSet> = vec![engine.root_covering()];
    let mut index: HashMap<NeighbourSet, usize> = HashMap::from([(root, 0)]);
    let mut edges: Vec<Edge> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut status = Status::Closed;
    let mut max_covering = 1;
    'bfs: while let Some(v) = queue.pop_front() {
        let kids = match engine.children(&vertices[v]) {
            Ok(k) => k,
            Err(EngineError::OracleBudgetExceeded(n)) => {
                status = Status::Truncated(format!("attractor oracle exceeded {n} states"));
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let covers = engine.covering_children(&covering[v], &vertices[v], &kids)?;
        let mut pending = Vec::with_capacity(kids.len());
        let mut fresh = Vec::new();
        for (k, cov) in kids.into_iter().zip(covers) {
            max_covering = max_covering.max(cov.len());
            let target = match index.get(&k.neighbours) {
                Some(t) => *t,
                None => {
                    let id = vertices.len() + fresh.len();
                    if id >= budget.max_vertices {
                        status = Status::Truncated(format!(
                            "vertex budget of {} exhausted",
                            budget.max_vertices
                        ));
                        break 'bfs;
                    }
                    index.insert(k.neighbours.clone(), id);
                    fresh.push((k.neighbours.clone(), cov));
                    id
                }
            };
            debug_assert!(k.matrix.columns_positive());
            let id = edges.len() + pending.len();
            pending.push(Edge {
                id,
                source: v,
                target,
                q: k.q,
                rel_diam: k.rel_diam,
                length: k.length,
                matrix: k.matrix,
                provenance: vec![id],
            });
        }
        for (nb, cov) in fresh {
            queue.push_back(vertices.len());
            vertices.push(nb);
            covering.push(cov);
        }
        edges.extend(pending);
    }
    if !status.is_closed() {
        // drop edges into vertices that were never created
        let n = vertices.len();
        edges.retain(|e| e.target < n);
        for (i, e) in edges.iter_mut().enumerate() {
            e.id = i;
            e.provenance = vec![i];
        }
    }
    let labels = (0..vertices.len()).collect();
    let wsc = WscStatistic {
        max_covering,
        bounded_within_explored: status.is_closed(),
    };
    Ok(TransitionGraph::from_parts(
        engine.ifs().clone(),
        vertices,
        labels,
        edges,
        0,
        status,
        wsc,
    ))
}
