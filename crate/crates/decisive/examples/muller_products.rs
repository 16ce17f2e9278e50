//! ω-regular analysis through the chain–automaton product: build a
//! deterministic Muller automaton, form the product, classify the good
//! bottom components of its attractor graph, and approximate the acceptance
//! probability with a per-component breakdown.
//!
//! Run with: `cargo run --example muller_products`

use decisive::chain::{LabelSet, SparseDistribution, StateId};
use decisive::families;
use decisive::omega::{muller_probability_exact, parse_dma, product};
use decisive::prob::Prob;
use decisive::qualitative::{almost_sure_omega, attractor_graph, good_bsccs};
use decisive::quantitative::{quant_omega_attractor, ProbabilityEstimator, SchemeParams};
use decisive::report::attractor_graph_dot;
use std::collections::BTreeSet;

const DMA: &str = r#"{
    "locations": ["q0", "q1", "q2"],
    "initial": "q0",
    "ap": ["a"],
    "edges": [
        {"from": "q0", "label": ["a"], "to": "q1"},
        {"from": "q1", "label": ["a"], "to": "q2"},
        {"from": "q2", "label": ["a"], "to": "q1"}
    ],
    "muller": [["q1", "q2"]],
    "complete_with_sink": true
}"#;

fn main() {
    // the automaton alternates q1/q2 forever once it has read one `a`;
    // acceptance asks for exactly {q1, q2} recurring
    let dma = parse_dma(DMA).unwrap();

    // finite case first: a reflecting truncation of the walk, all states
    // labelled `a`
    let chain = families::truncated_walk(Prob::from_ratio(1, 3), 40).unwrap();
    let prod = product(&chain, &dma).unwrap();
    let mu = prod
        .lift_initial(&SparseDistribution::dirac(StateId(0)))
        .unwrap();
    let exact = muller_probability_exact(&prod, &mu).unwrap();
    println!("exact Muller probability on the truncation: {exact}");
    assert!(exact.is_one());

    // the attractor graph over all product states, with its good components
    let vertices: BTreeSet<StateId> = prod.chain().states().unwrap().into_iter().collect();
    let graph = attractor_graph(&prod, &vertices, None).unwrap();
    let good = good_bsccs(&graph, prod.muller_family());
    println!(
        "attractor graph: {} vertices, {} bottom components, {} good",
        graph.vertices().len(),
        graph.bsccs().len(),
        good.len()
    );
    let dot = attractor_graph_dot(&prod, &graph, &good);
    println!("(DOT output: {} lines, good components double-bordered)", dot.lines().count());

    // the interval scheme recovers the same value with a breakdown
    let result = quant_omega_attractor(
        &prod,
        &mu,
        &vertices,
        None,
        &ProbabilityEstimator::Exact,
        &SchemeParams::with_eps(1e-6),
    )
    .unwrap();
    println!(
        "scheme interval [{:.9}, {:.9}] in {} iterations",
        result.lo.to_f64(),
        result.hi.to_f64(),
        result.iterations
    );
    for (name, mass) in &result.breakdown {
        println!("  component {name}: lower mass {}", mass.to_f64());
    }
    assert!(result.contains(exact.to_f64()));

    // countable case: the full walk with the declared attractor {0, 1};
    // reachability between attractor states is certified to depth 16
    let walk = families::random_walk(Prob::from_ratio(1, 3));
    let prod = product(&walk, &dma).unwrap();
    let lifted: BTreeSet<StateId> = [StateId(0), StateId(1)]
        .into_iter()
        .flat_map(|s| (0..prod.q_count()).map(move |q| prod.encode(s, q)))
        .collect();
    let mu = prod
        .lift_initial(&SparseDistribution::dirac(StateId(0)))
        .unwrap();
    let holds = almost_sure_omega(&prod, &mu, &lifted, Some(16)).unwrap();
    println!("countable walk satisfies the property almost surely: {holds}");
    assert!(holds);

    // sanity: every product state keeps the out-degree of its chain factor
    let sample = prod.encode(StateId(3), 1);
    assert_eq!(
        prod.chain().successors(sample).unwrap().entries().len(),
        walk.successors(StateId(3)).unwrap().entries().len()
    );
    let _ = LabelSet::EMPTY;
}
