//! Deterministic complete Muller automata and the chain–automaton product.

use crate::chain::{LabelSet, MarkovChain, SparseDistribution, StateId, StateSet};
use crate::error::{Error, Result};
use crate::graph;
use crate::prob::Prob;
use crate::solve;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::sync::Arc;

/// Whether construction may add a rejecting sink to complete the automaton.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Completion {
    Reject,
    AddSink,
}

/// A deterministic, complete Muller automaton over 2^AP.
#[derive(Clone, Debug)]
pub struct MullerAutomaton {
    locations: Vec<String>,
    initial: usize,
    ap: Vec<String>,
    /// transition[q][u] for every label bitset u < 2^|AP|
    transitions: Vec<Vec<usize>>,
    muller: Vec<BTreeSet<usize>>,
}

impl MullerAutomaton {
    pub fn new(
        locations: Vec<String>,
        initial: &str,
        ap: Vec<String>,
        edges: Vec<(String, LabelSet, String)>,
        muller: Vec<Vec<String>>,
        completion: Completion,
    ) -> Result<Self> {
        if ap.len() > 16 {
            return Err(Error::InvalidModel(
                "at most 16 atomic propositions in an automaton".into(),
            ));
        }
        let mut locations = locations;
        let find = |locs: &[String], name: &str| -> Result<usize> {
            locs.iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::InvalidModel(format!("unknown location {name:?}")))
        };
        let initial = find(&locations, initial)?;
        let alphabet = 1usize << ap.len();
        let mut transitions: Vec<Vec<Option<usize>>> = vec![vec![None; alphabet]; locations.len()];
        for (from, label, to) in &edges {
            let f = find(&locations, from)?;
            let t = find(&locations, to)?;
            let u = label.0 as usize;
            if u >= alphabet {
                return Err(Error::InvalidModel(format!(
                    "edge label {label:?} mentions undeclared propositions"
                )));
            }
            if let Some(prev) = transitions[f][u] {
                if prev != t {
                    return Err(Error::InvalidModel(format!(
                        "nondeterministic edges from {from:?} on label {label:?}"
                    )));
                }
            }
            transitions[f][u] = Some(t);
        }
        let incomplete = transitions
            .iter()
            .any(|row| row.iter().any(|t| t.is_none()));
        let mut sink = None;
        if incomplete {
            match completion {
                Completion::Reject => {
                    return Err(Error::InvalidModel(
                        "automaton is not complete (pass AddSink to auto-complete)".into(),
                    ))
                }
                Completion::AddSink => {
                    let s = locations.len();
                    locations.push("__sink".into());
                    transitions.push(vec![Some(s); alphabet]);
                    sink = Some(s);
                    log::info!("added rejecting sink location to complete the automaton");
                }
            }
        }
        let transitions: Vec<Vec<usize>> = transitions
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|t| t.or(sink).expect("complete after sink"))
                    .collect()
            })
            .collect();
        if locations.len() > 32 {
            return Err(Error::InvalidModel(
                "at most 32 automaton locations (product labels are bitsets)".into(),
            ));
        }
        let muller = muller
            .into_iter()
            .map(|set| {
                set.iter()
                    .map(|name| find(&locations, name))
                    .collect::<Result<BTreeSet<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MullerAutomaton {
            locations,
            initial,
            ap,
            transitions,
            muller,
        })
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn step(&self, q: usize, label: LabelSet) -> usize {
        self.transitions[q][label.0 as usize]
    }

    pub fn muller_family(&self) -> &[BTreeSet<usize>] {
        &self.muller
    }

    pub fn accepts_inf_set(&self, inf: &BTreeSet<usize>) -> bool {
        self.muller.iter().any(|f| f == inf)
    }

    /// Replace the Muller family (used to explore variants of a property).
    pub fn with_muller(&self, muller: Vec<BTreeSet<usize>>) -> Self {
        let mut m = self.clone();
        m.muller = muller;
        m
    }
}

/// The product chain T ⋉ M over pair states (s, q), labelled by q.
pub struct ProductChain {
    chain: MarkovChain,
    q_count: u64,
    muller: Vec<BTreeSet<usize>>,
    initial_location: usize,
}

impl ProductChain {
    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    pub fn q_count(&self) -> usize {
        self.q_count as usize
    }

    pub fn muller_family(&self) -> &[BTreeSet<usize>] {
        &self.muller
    }

    pub fn encode(&self, s: StateId, q: usize) -> StateId {
        StateId(s.0 * self.q_count + q as u64)
    }

    pub fn decode(&self, pair: StateId) -> (StateId, usize) {
        (StateId(pair.0 / self.q_count), (pair.0 % self.q_count) as usize)
    }

    /// μ × δ_{q_0} lifted to pair states.
    pub fn lift_initial(&self, mu: &SparseDistribution) -> Result<SparseDistribution> {
        let q0 = self.initial_location;
        SparseDistribution::new(
            mu.entries()
                .iter()
                .map(|(s, p)| (self.encode(*s, q0), p.clone()))
                .collect(),
        )
    }

    /// Automaton locations of a set of pair states.
    pub fn location_projection(&self, states: &BTreeSet<StateId>) -> BTreeSet<usize> {
        states.iter().map(|s| self.decode(*s).1).collect()
    }
}

/// Build the product of a labelled chain with a DMA. The automaton successor
/// of (s, q) is the unique q' with (q, L(s), q') ∈ E; the chain component
/// moves by κ(s, ·).
pub fn product(chain: &MarkovChain, dma: &MullerAutomaton) -> Result<ProductChain> {
    if chain.ap() != dma.ap() {
        return Err(Error::AlphabetMismatch);
    }
    let q_count = dma.num_locations() as u64;
    let product_ap: Vec<String> = dma.locations().to_vec();
    let muller = dma.muller_family().to_vec();
    let initial_location = dma.initial();

    let pair_chain = if let Some(n) = chain.num_states() {
        let mut names = Vec::with_capacity(n * q_count as usize);
        let mut rows = Vec::with_capacity(n * q_count as usize);
        let mut labels = Vec::with_capacity(n * q_count as usize);
        for s in 0..n as u64 {
            let base_row = chain.successors(StateId(s))?;
            let label = chain.label(StateId(s));
            for q in 0..q_count as usize {
                let q_next = dma.step(q, label);
                names.push(format!(
                    "({},{})",
                    chain.state_name(StateId(s)),
                    dma.locations()[q]
                ));
                rows.push(SparseDistribution::new(
                    base_row
                        .entries()
                        .iter()
                        .map(|(t, p)| (StateId(t.0 * q_count + q_next as u64), p.clone()))
                        .collect(),
                )?);
                labels.push(LabelSet::singleton(q));
            }
        }
        MarkovChain::finite(names, rows, product_ap, labels)?
    } else {
        let base = chain.clone();
        let dma = Arc::new(dma.clone());
        let qc = q_count;
        MarkovChain::lazy(
            move |pair: StateId| {
                let s = StateId(pair.0 / qc);
                let q = (pair.0 % qc) as usize;
                let row = base.successors(s).ok()?;
                let q_next = dma.step(q, base.label(s));
                Some(
                    SparseDistribution::new(
                        row.entries()
                            .iter()
                            .map(|(t, p)| (StateId(t.0 * qc + q_next as u64), p.clone()))
                            .collect(),
                    )
                    .expect("product row"),
                )
            },
            move |pair: StateId| LabelSet::singleton((pair.0 % qc) as usize),
            product_ap,
            crate::chain::DEFAULT_EXPLORATION_CAP,
        )
    };
    Ok(ProductChain {
        chain: pair_chain,
        q_count,
        muller,
        initial_location,
    })
}

/// Standard finite-chain Muller probability: the combined reachability value
/// of all bottom components whose location set belongs to the Muller family.
pub fn muller_probability_exact(
    product: &ProductChain,
    mu_pair: &SparseDistribution,
) -> Result<Prob> {
    let n = product
        .chain
        .num_states()
        .ok_or_else(|| Error::HypothesisViolated("finite product required".into()))?;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            Ok(product
                .chain
                .successors(StateId(i as u64))?
                .entries()
                .iter()
                .map(|(s, _)| s.0 as usize)
                .collect())
        })
        .collect::<Result<_>>()?;
    let bsccs = graph::bottom_sccs(n, &adj);
    let mut good_states = BTreeSet::new();
    for component in &bsccs {
        let inf: BTreeSet<usize> = component
            .iter()
            .map(|&i| product.decode(StateId(i as u64)).1)
            .collect();
        if product.muller.iter().any(|f| *f == inf) {
            good_states.extend(component.iter().map(|&i| StateId(i as u64)));
        }
    }
    solve::reach_value(&product.chain, mu_pair, &StateSet::Explicit(good_states))
}


#[derive(Deserialize)]
struct DmaEdgeJson {
    from: String,
    label: Vec<String>,
    to: String,
}

#[derive(Deserialize)]
struct DmaJson {
    locations: Vec<String>,
    initial: String,
    #[serde(default)]
    ap: Option<Vec<String>>,
    edges: Vec<DmaEdgeJson>,
    muller: Vec<Vec<String>>,
    #[serde(default)]
    complete_with_sink: bool,
}

/// Parse the DMA JSON format. Edge labels are exact subsets of AP.
pub fn parse_dma(text: &str) -> Result<MullerAutomaton> {
    let json: DmaJson = serde_json::from_str(text)?;
    let ap = json.ap.clone().unwrap_or_else(|| {
        let mut seen = Vec::new();
        for e in &json.edges {
            for a in &e.label {
                if !seen.contains(a) {
                    seen.push(a.clone());
                }
            }
        }
        seen
    });
    let edges = json
        .edges
        .iter()
        .map(|e| {
            let mut bits = LabelSet::EMPTY;
            for a in &e.label {
                let i = ap
                    .iter()
                    .position(|x| x == a)
                    .ok_or_else(|| Error::InvalidModel(format!("undeclared proposition {a:?}")))?;
                bits = LabelSet(bits.0 | (1 << i));
            }
            Ok((e.from.clone(), bits, e.to.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    MullerAutomaton::new(
        json.locations,
        &json.initial,
        ap,
        edges,
        json.muller,
        if json.complete_with_sink {
            Completion::AddSink
        } else {
            Completion::Reject
        },
    )
}
