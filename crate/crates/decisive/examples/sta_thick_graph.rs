//! The thick graph of a timed automaton, its bisimulation quotient, and
//! the refusal machinery for automata outside the certified classes.
//!
//! The model is a two-clock automaton with two guarded loops; each return
//! to the hub squeezes the free clock upward, so the probability of the
//! right loop shrinks to zero and the right-loop location is reached with
//! probability strictly below one. Its thick graph is a perfectly fine
//! finite abstraction of the *step* behaviour, but it is not sound for
//! almost-sure properties — which is exactly why the analysis pipelines
//! classify the automaton as General and refuse it.
//!
//! Run with: `cargo run --example sta_thick_graph`

use decisive::omega::parse_dma;
use decisive::prob::Prob;
use decisive::quantitative::{run_sampled_paths, Class, MonteCarloConfig, SchemeParams};
use decisive::qualitative::DecisivenessEvidence;
use decisive::sta::pipeline::sta_check_qualitative;
use decisive::sta::sim::sample_step;
use decisive::sta::thick::thick_graph;
use decisive::sta::{classify, fixtures, Configuration, StaClass};
use decisive::StateId;
use std::collections::BTreeSet;

fn main() {
    let sta = fixtures::two_clock_convergent();
    println!("classification: {:?}", classify(&sta));
    assert!(matches!(classify(&sta), StaClass::General { .. }));

    // the full region-level graph: six nodes, because the left loop is
    // entered through two distinct clock regions
    let graph = thick_graph(&sta).unwrap();
    println!("\nthick graph ({} nodes):", graph.nodes.len());
    for i in 0..graph.nodes.len() {
        let id = StateId(i as u64);
        let row = graph.chain.successors(id).unwrap();
        let succs: Vec<String> = row
            .entries()
            .iter()
            .map(|(t, p)| format!("{} ({p})", graph.describe_node(&sta, *t)))
            .collect();
        println!("  {} -> {}", graph.describe_node(&sta, id), succs.join(", "));
    }
    assert_eq!(graph.nodes.len(), 6);

    // the bisimulation quotient collapses the two left-entry regions and
    // is the canonical minimal presentation: five classes, 1/2 branching
    let quotient = graph.bisimulation_quotient().unwrap();
    println!("\nbisimulation quotient: {} classes", quotient.members.len());
    assert_eq!(quotient.members.len(), 5);
    let init_class = StateId(quotient.class[0] as u64);
    let row = quotient.chain.successors(init_class).unwrap();
    for (_, p) in row.entries() {
        assert_eq!(*p, Prob::from_ratio(1, 2));
    }
    println!("initial class branches 1/2 – 1/2 over the two loops");

    let dot = graph.to_dot(&sta, &BTreeSet::new());
    println!("\nDOT rendering has {} lines (also via the CLI: sta-thick-graph)", dot.lines().count());

    // the qualitative pipeline refuses: the thick graph is not sound here
    let dma = parse_dma(
        r#"{
        "locations": ["q"], "initial": "q", "ap": ["right", "left"],
        "edges": [], "muller": [["q"]], "complete_with_sink": true
    }"#,
    )
    .unwrap();
    match sta_check_qualitative(&sta, &dma) {
        Err(e) => println!("\npipeline refusal: {e}"),
        Ok(_) => panic!("the General class must be refused"),
    }

    // what simulation actually says about reaching the right loop: the
    // estimate settles well below 1
    let init = Configuration {
        location: 0,
        valuation: vec![0.0, 0.5],
    };
    let target = sta.location_by_name("l2").unwrap();
    let result = run_sampled_paths(
        |rng, horizon| {
            let mut config = init.clone();
            for step in 1..=horizon {
                match sample_step(&sta, &config, rng) {
                    Ok((next, _)) => config = next,
                    Err(decisive::Error::ResolutionExhausted(_))
                    | Err(decisive::Error::DeadlockedConfiguration) => return Ok(None),
                    Err(e) => return Err(e),
                }
                if config.location == target {
                    return Ok(Some((Class::Yes, step, None)));
                }
            }
            Ok(None)
        },
        0,
        &MonteCarloConfig::new(100_000, 0.99, 7).threads(2),
        &SchemeParams {
            eps: 0.0,
            budget: 200,
            stall_window: 50,
            stall_tolerance: 0.0,
        },
        &DecisivenessEvidence::Assumed {
            note: "bounded-horizon simulation outside the certified classes".into(),
        },
        vec![],
    )
    .unwrap();
    let h = result.sampling.as_ref().unwrap().half_width;
    let p_hat = result.lo.to_f64() + h;
    println!("\nsimulated P(reach right loop) ≈ {p_hat:.4} ± {h:.4} — strictly below 1,");
    println!("while the thick graph would claim 1; hence the refusal above");
    assert!(p_hat + h < 0.95);
}
