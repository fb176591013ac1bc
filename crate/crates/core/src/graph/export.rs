use std::fmt::Write;

use serde_json::{json, Value};

use crate::field::{fmt_sig12, ParamValue, Rational};
use crate::ifs::Similarity;

use super::{Edge, TransitionGraph};

pub fn value_json(v: &ParamValue) -> Value {
    json!({ "exact": v.to_string(), "decimal": fmt_sig12(v.to_f64()) })
}

pub fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn map_json(m: &Similarity) -> Value {
    json!({ "ratio": value_json(&m.ratio), "offset": value_json(&m.offset) })
}

/// Edges ordered by (source, target, q).
fn sorted_edges(g: &TransitionGraph) -> Vec<&Edge> {
    let mut es: Vec<&Edge> = g.edges().iter().collect();
    es.sort_by(|a, b| {
        a.source
            .cmp(&b.source)
            .then(a.target.cmp(&b.target))
            .then_with(|| a.q.try_cmp(&b.q).unwrap_or_else(|_| a.id.cmp(&b.id)))
            .then(a.id.cmp(&b.id))
    });
    es
}

pub fn to_json_value(g: &TransitionGraph) -> Value {
    let ifs = g.ifs();
    let vertices: Vec<Value> = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            json!({
                "id": i,
                "label": g.labels()[i],
                "lm": value_json(v.lm()),
                "neighbours": v.maps().iter().map(map_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<Value> = sorted_edges(g)
        .into_iter()
        .map(|e| {
            let m = &e.matrix;
            let rows: Vec<Vec<String>> = (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect())
                .collect();
            json!({
                "id": e.id,
                "source": e.source,
                "target": e.target,
                "q": value_json(&e.q),
                "relative_diameter": value_json(&e.rel_diam),
                "length": value_json(&e.length),
                "matrix": rows,
                "provenance": e.provenance,
            })
        })
        .collect();
    json!({
        "format_version": 1,
        "status": g.status().label(),
        "root": g.root(),
        "maps": ifs.maps().iter().map(map_json).collect::<Vec<_>>(),
        "probabilities": ifs.probabilities().iter().map(rational_string).collect::<Vec<_>>(),
        "vertices": vertices,
        "edges": edges,
        "wsc": {
            "max_covering_set": g.wsc().max_covering,
            "bounded_within_explored_region": g.wsc().bounded_within_explored,
        },
    })
}

pub fn to_json(g: &TransitionGraph) -> String {
    serde_json::to_string_pretty(&to_json_value(g)).expect("serializable")
}

pub fn to_dot(g: &TransitionGraph) -> String {
    let mut s = String::from("digraph transition_graph {\n  rankdir=LR;\n");
    for (i, v) in g.vertices().iter().enumerate() {
        let shape = if i == g.root() { "doublecircle" } else { "circle" };
        let _ = writeln!(
            s,
            "  v{i} [label=\"v{}\\n#{}\", shape={shape}];",
            g.labels()[i],
            v.len()
        );
    }
    for e in sorted_edges(g) {
        let _ = writeln!(
            s,
            "  v{} -> v{} [label=\"e{} q={} L={} {}x{}\"];",
            e.source,
            e.target,
            e.id,
            fmt_sig12(e.q.to_f64()),
            fmt_sig12(e.length.to_f64()),
            e.matrix.rows(),
            e.matrix.cols()
        );
    }
    s.push_str("}\n");
    s
}
