//! Seeded random model generators shared by the property and acceptance
//! suites. Proptest supplies seeds; construction is deterministic per seed.

#![allow(dead_code)]

use decisive::abstraction::{AbstractionHandle, AlphaMap};
use decisive::chain::{LabelSet, MarkovChain, SparseDistribution, StateId, StateSet};
use decisive::omega::{Completion, MullerAutomaton};
use decisive::prob::Prob;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeSet;

/// Random rational distribution over the given targets: positive numerators
/// over a common denominator.
fn random_row(rng: &mut StdRng, targets: &[u64]) -> SparseDistribution {
    let weights: Vec<i64> = targets.iter().map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = weights.iter().sum();
    SparseDistribution::new(
        targets
            .iter()
            .zip(&weights)
            .map(|(t, w)| (StateId(*t), Prob::from_ratio(*w, total)))
            .collect(),
    )
    .expect("random row")
}

/// Random finite chain with rational kernel rows and labels over one
/// proposition `a`.
pub fn random_chain(seed: u64, max_states: usize) -> MarkovChain {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_states.max(2));
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let degree = rng.gen_range(1..=3.min(n));
        let mut targets = BTreeSet::new();
        while targets.len() < degree {
            targets.insert(rng.gen_range(0..n as u64));
        }
        let targets: Vec<u64> = targets.into_iter().collect();
        rows.push(random_row(&mut rng, &targets));
    }
    let labels: Vec<LabelSet> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                LabelSet::singleton(0)
            } else {
                LabelSet::EMPTY
            }
        })
        .collect();
    MarkovChain::finite(
        (0..n).map(|i| format!("s{i}")).collect(),
        rows,
        vec!["a".into()],
        labels,
    )
    .expect("random chain")
}

/// Random nonempty subset of the chain's states.
pub fn random_subset(seed: u64, chain: &MarkovChain) -> StateSet {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5e75);
    let n = chain.num_states().expect("finite");
    loop {
        let states: BTreeSet<StateId> = (0..n as u64)
            .filter(|_| rng.gen_bool(0.4))
            .map(StateId)
            .collect();
        if !states.is_empty() {
            return StateSet::Explicit(states);
        }
    }
}

/// Random subset, possibly empty.
pub fn random_subset_maybe_empty(seed: u64, chain: &MarkovChain) -> StateSet {
    let mut rng = StdRng::seed_from_u64(seed ^ 0xe3b7);
    let n = chain.num_states().expect("finite");
    StateSet::Explicit(
        (0..n as u64)
            .filter(|_| rng.gen_bool(0.4))
            .map(StateId)
            .collect(),
    )
}

/// Random rational initial distribution.
pub fn random_init(seed: u64, chain: &MarkovChain) -> SparseDistribution {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x1717);
    let n = chain.num_states().expect("finite") as u64;
    let support = rng.gen_range(1..=n.min(3));
    let mut targets = BTreeSet::new();
    while (targets.len() as u64) < support {
        targets.insert(rng.gen_range(0..n));
    }
    let targets: Vec<u64> = targets.into_iter().collect();
    random_row(&mut rng, &targets)
}

/// Random deterministic complete Muller automaton over {a} with 2–3
/// locations and a random family.
pub fn random_dma(seed: u64) -> MullerAutomaton {
    let mut rng = StdRng::seed_from_u64(seed ^ 0xd31a);
    let q = rng.gen_range(2..=3usize);
    let locations: Vec<String> = (0..q).map(|i| format!("q{i}")).collect();
    let mut edges = Vec::new();
    for from in 0..q {
        for label in [LabelSet::EMPTY, LabelSet::singleton(0)] {
            let to = rng.gen_range(0..q);
            edges.push((locations[from].clone(), label, locations[to].clone()));
        }
    }
    // random family over the location subsets
    let mut muller = Vec::new();
    for bits in 1u32..(1 << q) {
        if rng.gen_bool(0.35) {
            muller.push(
                (0..q)
                    .filter(|i| bits & (1 << i) != 0)
                    .map(|i| locations[i].clone())
                    .collect::<Vec<_>>(),
            );
        }
    }
    MullerAutomaton::new(
        locations,
        "q0",
        vec!["a".into()],
        edges,
        muller,
        Completion::Reject,
    )
    .expect("random dma")
}

/// A random handle satisfying the strong per-state abstraction condition:
/// every concrete fiber state realizes exactly the abstract successor
/// support of its image. These handles make the per-Dirac transfer lemmas
/// exact.
pub fn random_strict_handle(seed: u64) -> AbstractionHandle {
    let mut rng = StdRng::seed_from_u64(seed ^ 0xab5);
    let n_abs = rng.gen_range(2..=4usize);
    // random abstract chain
    let mut abs_rows = Vec::new();
    for _ in 0..n_abs {
        let degree = rng.gen_range(1..=2.min(n_abs));
        let mut targets = BTreeSet::new();
        while targets.len() < degree {
            targets.insert(rng.gen_range(0..n_abs as u64));
        }
        let targets: Vec<u64> = targets.into_iter().collect();
        abs_rows.push(random_row(&mut rng, &targets));
    }
    let abstract_chain = MarkovChain::finite(
        (0..n_abs).map(|i| format!("t{i}")).collect(),
        abs_rows,
        vec!["a".into()],
        vec![LabelSet::singleton(0); n_abs],
    )
    .expect("abstract chain");

    // fibers of sizes 1..=3
    let fiber_sizes: Vec<usize> = (0..n_abs).map(|_| rng.gen_range(1..=3)).collect();
    let mut table = Vec::new();
    let mut fiber_members: Vec<Vec<u64>> = vec![Vec::new(); n_abs];
    for (abs, size) in fiber_sizes.iter().enumerate() {
        for _ in 0..*size {
            fiber_members[abs].push(table.len() as u64);
            table.push(StateId(abs as u64));
        }
    }
    let n_conc = table.len();
    // each concrete state gets, per abstract successor, one or more
    // concrete successors inside that fiber
    let mut conc_rows: Vec<SparseDistribution> = Vec::with_capacity(n_conc);
    for c in 0..n_conc {
        let abs = table[c].0 as usize;
        let abs_support: Vec<u64> = abstract_chain
            .successors(StateId(abs as u64))
            .unwrap()
            .support()
            .map(|s| s.0)
            .collect();
        let mut targets = BTreeSet::new();
        for t_abs in abs_support {
            let members = &fiber_members[t_abs as usize];
            let picks = rng.gen_range(1..=members.len());
            for _ in 0..picks {
                targets.insert(members[rng.gen_range(0..members.len())]);
            }
        }
        let targets: Vec<u64> = targets.into_iter().collect();
        conc_rows.push(random_row(&mut rng, &targets));
    }
    let concrete = MarkovChain::finite(
        (0..n_conc).map(|i| format!("c{i}")).collect(),
        conc_rows,
        vec!["a".into()],
        vec![LabelSet::singleton(0); n_conc],
    )
    .expect("concrete chain");
    AbstractionHandle::new(
        concrete,
        abstract_chain,
        AlphaMap::from_table(table),
        format!("strict-{seed}"),
    )
}

/// Random sequence of subsets for cylinder laws.
pub fn random_set_sequence(seed: u64, chain: &MarkovChain, len: usize) -> Vec<StateSet> {
    (0..len)
        .map(|i| random_subset_maybe_empty(seed.wrapping_add(i as u64 * 7919), chain))
        .collect()
}
