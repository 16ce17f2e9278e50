//! Graph utilities: strongly connected components and bottom components.

use std::collections::BTreeSet;

/// Iterative Tarjan over an adjacency list. Components are returned with
/// their vertex lists sorted, ordered by least vertex.
pub fn tarjan_sccs(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    #[derive(Clone, Copy)]
    struct Entry {
        index: u32,
        lowlink: u32,
        on_stack: bool,
        visited: bool,
    }
    let mut entries = vec![
        Entry {
            index: 0,
            lowlink: 0,
            on_stack: false,
            visited: false,
        };
        n
    ];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0u32;
    let mut components: Vec<Vec<usize>> = Vec::new();

    for root in 0..n {
        if entries[root].visited {
            continue;
        }
        // explicit DFS stack of (vertex, next adjacency position)
        let mut call_stack: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut pos)) = call_stack.last_mut() {
            if *pos == 0 {
                entries[v].visited = true;
                entries[v].index = next_index;
                entries[v].lowlink = next_index;
                next_index += 1;
                entries[v].on_stack = true;
                stack.push(v);
            }
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if !entries[w].visited {
                    call_stack.push((w, 0));
                } else if entries[w].on_stack {
                    entries[v].lowlink = entries[v].lowlink.min(entries[w].index);
                }
            } else {
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    let low = entries[v].lowlink;
                    entries[parent].lowlink = entries[parent].lowlink.min(low);
                }
                if entries[v].lowlink == entries[v].index {
                    let mut component = Vec::new();
                    while let Some(w) = stack.pop() {
                        entries[w].on_stack = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// SCCs with no edge leaving them, ordered by least vertex.
pub fn bottom_sccs(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let sccs = tarjan_sccs(n, adj);
    sccs.into_iter()
        .filter(|component| {
            let members: BTreeSet<usize> = component.iter().copied().collect();
            component
                .iter()
                .all(|&v| adj[v].iter().all(|w| members.contains(w)))
        })
        .collect()
}

/// Vertices from which `targets` is reachable (including the targets).
pub fn co_reachable(n: usize, adj: &[Vec<usize>], targets: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut rev = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            rev[w].push(v);
        }
    }
    let mut seen: BTreeSet<usize> = targets.clone();
    let mut queue: Vec<usize> = targets.iter().copied().collect();
    while let Some(v) = queue.pop() {
        for &u in &rev[v] {
            if seen.insert(u) {
                queue.push(u);
            }
        }
    }
    seen
}

/// Vertices reachable from `sources` (including the sources).
pub fn reachable(adj: &[Vec<usize>], sources: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = sources.clone();
    let mut queue: Vec<usize> = sources.iter().copied().collect();
    while let Some(v) = queue.pop() {
        for &w in &adj[v] {
            if seen.insert(w) {
                queue.push(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_graph() {
        let adj = vec![vec![1], vec![2], vec![]];
        let sccs = tarjan_sccs(3, &adj);
        assert_eq!(sccs.len(), 3);
        let bsccs = bottom_sccs(3, &adj);
        assert_eq!(bsccs, vec![vec![2]]);
    }

    #[test]
    fn cycle_plus_tail() {
        // 0 → 1 → 2 → 1, 0 → 3
        let adj = vec![vec![1, 3], vec![2], vec![1], vec![]];
        let bsccs = bottom_sccs(4, &adj);
        assert_eq!(bsccs, vec![vec![1, 2], vec![3]]);
    }

    #[test]
    fn two_absorbing() {
        let adj = vec![vec![1, 2], vec![1], vec![2]];
        let bsccs = bottom_sccs(3, &adj);
        assert_eq!(bsccs, vec![vec![1], vec![2]]);
    }

    #[test]
    fn co_reach() {
        let adj = vec![vec![1], vec![2], vec![], vec![3]];
        let co = co_reachable(4, &adj, &BTreeSet::from([2]));
        assert_eq!(co, BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn deep_recursion_safe() {
        // long path: iterative Tarjan must not overflow the stack
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| if i + 1 < n { vec![i + 1] } else { vec![] })
            .collect();
        let sccs = tarjan_sccs(n, &adj);
        assert_eq!(sccs.len(), n);
    }
}
