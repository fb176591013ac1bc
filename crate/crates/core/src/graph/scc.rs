use super::{GraphError, TransitionGraph};

/// Tarjan's algorithm, iterative. Components come out in reverse
/// topological order of the condensation.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for s in 0..n {
        if index[s] != usize::MAX {
            continue;
        }
        // (vertex, next child position)
        let mut call: Vec<(usize, usize)> = vec![(s, 0)];
        index[s] = counter;
        low[s] = counter;
        counter += 1;
        stack.push(s);
        on_stack[s] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Components with no edge leaving them.
pub fn sink_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = strongly_connected_components(adj);
    let mut comp_of = vec![0; adj.len()];
    for (c, vs) in comps.iter().enumerate() {
        for v in vs {
            comp_of[*v] = c;
        }
    }
    let mut sinks: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(c, vs)| vs.iter().all(|v| adj[*v].iter().all(|w| comp_of[*w] == *c)))
        .map(|(_, vs)| vs.clone())
        .collect();
    sinks.sort();
    sinks
}

/// The unique sink component of the condensation.
pub fn essential_class(g: &TransitionGraph) -> Result<Vec<usize>, GraphError> {
    g.require_closed()?;
    let mut sinks = sink_components(&g.successors());
    if sinks.len() != 1 {
        return Err(GraphError::MultipleSinkComponents(sinks));
    }
    Ok(sinks.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycles_and_a_tail() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3 -> 3
        let adj = vec![vec![1], vec![2], vec![1, 3], vec![3]];
        let mut comps = strongly_connected_components(&adj);
        comps.sort();
        assert_eq!(comps, vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(sink_components(&adj), vec![vec![3]]);
    }

    #[test]
    fn two_sinks() {
        let adj = vec![vec![1, 2], vec![1], vec![2]];
        assert_eq!(sink_components(&adj), vec![vec![1], vec![2]]);
    }
}
