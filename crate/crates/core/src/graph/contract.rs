use super::{Edge, TransitionGraph};

/// Removes non-root vertices with a single outgoing edge (not a self-loop)
/// and at least one incoming edge, composing each incoming edge with the
/// outgoing one. `only` restricts contraction to the given vertex ids; `None`
/// contracts every eligible vertex, repeating until none is left.
pub fn contract_single_child(g: &TransitionGraph, only: Option<&[usize]>) -> TransitionGraph {
    let mut vertices: Vec<usize> = (0..g.vertex_count()).collect();
    let mut edges: Vec<Edge> = g.edges.clone();
    loop {
        let pick = vertices.iter().copied().find(|&v| {
            if v == g.root || only.is_some_and(|o| !o.contains(&g.labels[v])) {
                return false;
            }
            let outs: Vec<&Edge> = edges.iter().filter(|e| e.source == v).collect();
            outs.len() == 1
                && outs[0].target != v
                && edges.iter().any(|e| e.target == v)
        });
        let Some(v) = pick else { break };
        let out = edges.iter().find(|e| e.source == v).unwrap().clone();
        let mut next = Vec::with_capacity(edges.len());
        for e in edges {
            if e.source == v {
                continue;
            }
            if e.target == v {
                let mut provenance = e.provenance.clone();
                provenance.extend(&out.provenance);
                next.push(Edge {
                    id: e.id,
                    source: e.source,
                    target: out.target,
                    q: &e.q + &(&e.rel_diam * &out.q),
                    rel_diam: &e.rel_diam * &out.rel_diam,
                    length: &e.length * &out.length,
                    matrix: e.matrix.mul(&out.matrix),
                    provenance,
                });
            } else {
                next.push(e);
            }
        }
        edges = next;
        vertices.retain(|w| *w != v);
    }
    // renumber vertices and edges densely, keeping order
    let mut new_id = vec![usize::MAX; g.vertex_count()];
    for (i, v) in vertices.iter().enumerate() {
        new_id[*v] = i;
    }
    edges.sort_by_key(|e| e.id);
    for (i, e) in edges.iter_mut().enumerate() {
        e.id = i;
        e.source = new_id[e.source];
        e.target = new_id[e.target];
    }
    TransitionGraph::from_parts(
        g.ifs.clone(),
        vertices.iter().map(|v| g.vertices[*v].clone()).collect(),
        vertices.iter().map(|v| g.labels[*v]).collect(),
        edges,
        new_id[g.root],
        g.status.clone(),
        g.wsc,
    )
}
