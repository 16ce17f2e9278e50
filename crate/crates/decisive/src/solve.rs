//! Exact reachability values on finite chains via sparse Gaussian
//! elimination, plus derived until and repeated-reachability values.
//!
//! These solvers are the golden oracles against which the approximation
//! schemes are validated, so they stay exact whenever the chain is exact.

use crate::chain::{MarkovChain, SparseDistribution, StateId, StateSet};
use crate::error::{Error, Result};
use crate::graph;
use crate::prob::Prob;
use std::collections::{BTreeMap, BTreeSet};

fn adjacency(chain: &MarkovChain) -> Result<Vec<Vec<usize>>> {
    let n = chain
        .num_states()
        .ok_or_else(|| Error::HypothesisViolated("finite chain required".into()))?;
    (0..n)
        .map(|i| {
            Ok(chain
                .successors(StateId(i as u64))?
                .entries()
                .iter()
                .map(|(s, _)| s.0 as usize)
                .collect())
        })
        .collect()
}

/// Sparse linear system x_i = Σ_j A[i][j]·x_j + c_i solved by Gaussian
/// elimination with a min-degree pivot heuristic (linear on path-shaped
/// systems such as truncated walks).
fn solve_hitting_system(mut rows: Vec<BTreeMap<usize, Prob>>, mut c: Vec<Prob>) -> Vec<Prob> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let m = rows.len();
    // occurrences[j] = active equations referencing variable j;
    // degree[j] = |occurrences[j]|, tracked for lazy heap entries
    let mut occurrences: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for (i, row) in rows.iter().enumerate() {
        for (&j, _) in row.iter() {
            occurrences[j].insert(i);
        }
    }
    let mut degree: Vec<usize> = occurrences.iter().map(|o| o.len()).collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..m)
        .map(|j| Reverse((degree[j], j)))
        .collect();
    let mut alive = vec![true; m];
    let mut eliminated: Vec<usize> = Vec::with_capacity(m);
    let mut solved_row: Vec<Option<(BTreeMap<usize, Prob>, Prob)>> = vec![None; m];

    while let Some(Reverse((d, k))) = heap.pop() {
        if !alive[k] || d != degree[k] {
            continue; // stale heap entry
        }
        alive[k] = false;
        // normalize equation k: x_k = (Σ_{j≠k} a_j x_j + c_k) / (1 − a_kk)
        let mut row = std::mem::take(&mut rows[k]);
        let self_coeff = row.remove(&k).unwrap_or_else(Prob::zero);
        let denom = Prob::one() - self_coeff;
        let mut norm: BTreeMap<usize, Prob> = BTreeMap::new();
        for (j, a) in row {
            // equation k is no longer active
            occurrences[j].remove(&k);
            degree[j] = occurrences[j].len();
            heap.push(Reverse((degree[j], j)));
            norm.insert(j, a / denom.clone());
        }
        let ck = std::mem::replace(&mut c[k], Prob::zero()) / denom;
        // substitute into every remaining equation referencing x_k
        let refs: Vec<usize> = occurrences[k].iter().copied().filter(|&i| alive[i]).collect();
        for i in refs {
            let coeff = match rows[i].remove(&k) {
                Some(a) => a,
                None => continue,
            };
            for (j, a) in &norm {
                let add = coeff.clone() * a.clone();
                match rows[i].get_mut(j) {
                    Some(existing) => *existing += add,
                    None => {
                        rows[i].insert(*j, add);
                        if occurrences[*j].insert(i) {
                            degree[*j] = occurrences[*j].len();
                            heap.push(Reverse((degree[*j], *j)));
                        }
                    }
                }
            }
            c[i] += coeff * ck.clone();
        }
        occurrences[k].clear();
        solved_row[k] = Some((norm, ck));
        eliminated.push(k);
    }

    // back substitution in reverse elimination order
    let mut values: Vec<Prob> = vec![Prob::zero(); m];
    for &k in eliminated.iter().rev() {
        let (row, ck) = solved_row[k].take().expect("eliminated row");
        let mut v = ck;
        for (j, a) in row {
            v += a * values[j].clone();
        }
        values[k] = v;
    }
    values
}

/// Exact hitting probabilities x_s = P_{δ_s}(F B) for every state of a
/// finite chain, via the standard linear system restricted to states that
/// can reach B.
pub fn exact_reachability_finite(chain: &MarkovChain, b: &StateSet) -> Result<Vec<Prob>> {
    exact_until_finite(chain, &StateSet::full(), b)
}

/// Exact values x_s = P_{δ_s}(B' U B) on a finite chain.
pub fn exact_until_finite(
    chain: &MarkovChain,
    bprime: &StateSet,
    b: &StateSet,
) -> Result<Vec<Prob>> {
    let n = chain
        .num_states()
        .ok_or_else(|| Error::HypothesisViolated("finite chain required".into()))?;
    let adj = adjacency(chain)?;
    let mut in_b = vec![false; n];
    let mut in_bprime = vec![false; n];
    for i in 0..n {
        in_b[i] = b.contains(StateId(i as u64))?;
        in_bprime[i] = bprime.contains(StateId(i as u64))?;
    }
    // restrict to paths through B'-states: drop edges leaving ¬B' ∖ B
    let restricted: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            if in_bprime[i] && !in_b[i] {
                adj[i].clone()
            } else {
                Vec::new()
            }
        })
        .collect();
    let targets: BTreeSet<usize> = (0..n).filter(|&i| in_b[i]).collect();
    let alive = graph::co_reachable(n, &restricted, &targets);

    // unknowns: states in B' ∖ B from which B is reachable within B'
    let unknowns: Vec<usize> = (0..n)
        .filter(|&i| !in_b[i] && in_bprime[i] && alive.contains(&i))
        .collect();
    let var_of: BTreeMap<usize, usize> = unknowns
        .iter()
        .enumerate()
        .map(|(v, &s)| (s, v))
        .collect();

    let mut rows: Vec<BTreeMap<usize, Prob>> = vec![BTreeMap::new(); unknowns.len()];
    let mut consts: Vec<Prob> = vec![Prob::zero(); unknowns.len()];
    for (v, &s) in unknowns.iter().enumerate() {
        for (t, p) in chain.successors(StateId(s as u64))?.entries() {
            let t = t.0 as usize;
            if in_b[t] {
                consts[v] += p.clone();
            } else if let Some(&w) = var_of.get(&t) {
                match rows[v].get_mut(&w) {
                    Some(existing) => *existing += p.clone(),
                    None => {
                        rows[v].insert(w, p.clone());
                    }
                }
            }
        }
    }
    let solution = solve_hitting_system(rows, consts);
    let mut values = vec![Prob::zero(); n];
    for i in 0..n {
        if in_b[i] {
            values[i] = Prob::one();
        } else if let Some(&v) = var_of.get(&i) {
            values[i] = clamp_unit(solution[v].clone());
        }
    }
    Ok(values)
}

fn clamp_unit(p: Prob) -> Prob {
    match p {
        Prob::Approx(v) => Prob::Approx(v.clamp(0.0, 1.0)),
        exact => exact,
    }
}

/// Exact P_μ(F B) on a finite chain.
pub fn reach_value(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    b: &StateSet,
) -> Result<Prob> {
    let values = exact_reachability_finite(chain, b)?;
    Ok(mu
        .entries()
        .iter()
        .map(|(s, p)| p.clone() * values[s.0 as usize].clone())
        .sum())
}

/// Exact P_μ(B' U B) on a finite chain.
pub fn until_value(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    bprime: &StateSet,
    b: &StateSet,
) -> Result<Prob> {
    let values = exact_until_finite(chain, bprime, b)?;
    Ok(mu
        .entries()
        .iter()
        .map(|(s, p)| p.clone() * values[s.0 as usize].clone())
        .sum())
}

/// Exact P_μ(G F B) on a finite chain: the probability of reaching a bottom
/// component that intersects B.
pub fn repeated_reach_value(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    b: &StateSet,
) -> Result<Prob> {
    let n = chain
        .num_states()
        .ok_or_else(|| Error::HypothesisViolated("finite chain required".into()))?;
    let adj = adjacency(chain)?;
    let bsccs = graph::bottom_sccs(n, &adj);
    let mut target = BTreeSet::new();
    for component in &bsccs {
        let mut touches = false;
        for &s in component {
            if b.contains(StateId(s as u64))? {
                touches = true;
                break;
            }
        }
        if touches {
            target.extend(component.iter().map(|&s| StateId(s as u64)));
        }
    }
    reach_value(chain, mu, &StateSet::Explicit(target))
}
