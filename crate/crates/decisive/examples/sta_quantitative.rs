//! End-to-end quantitative analysis of single-clock and reactive timed
//! automata: classify, build the thick graph and its class attractor,
//! analyse the finite product, and estimate the concrete probability by
//! simulation with a Hoeffding interval.
//!
//! Run with: `cargo run --example sta_quantitative`

use decisive::omega::parse_dma;
use decisive::quantitative::{MonteCarloConfig, SchemeParams};
use decisive::sta::pipeline::{sta_approx_quantitative, sta_check_qualitative};
use decisive::sta::{classify, parse_sta, StaClass};

/// One clock; from `start`, disjoint delay windows of equal length race
/// into two absorbing sinks.
const RACE: &str = r#"{
    "clocks": ["x"],
    "locations": [
        {"name": "start", "labels": [], "dist": {"kind": "uniform"}},
        {"name": "sinka", "labels": ["a"], "dist": {"kind": "uniform"}},
        {"name": "sinkb", "labels": ["b"], "dist": {"kind": "uniform"}}
    ],
    "initial": {"location": "start"},
    "edges": [
        {"from": "start", "guard": "x<1", "to": "sinka", "resets": ["x"]},
        {"from": "start", "guard": "x>1 && x<2", "to": "sinkb", "resets": ["x"]},
        {"from": "sinka", "guard": "x<1", "to": "sinka", "resets": ["x"]},
        {"from": "sinkb", "guard": "x<1", "to": "sinkb", "resets": ["x"]}
    ],
    "ap": ["a", "b"]
}"#;

/// Accepts the runs whose labels are ultimately always `a`.
const DMA: &str = r#"{
    "locations": ["q0", "qa", "qb"],
    "initial": "q0",
    "ap": ["a", "b"],
    "edges": [
        {"from": "q0", "label": [], "to": "q0"},
        {"from": "q0", "label": ["a"], "to": "qa"},
        {"from": "q0", "label": ["b"], "to": "qb"},
        {"from": "qa", "label": ["a"], "to": "qa"},
        {"from": "qa", "label": [], "to": "q0"},
        {"from": "qa", "label": ["b"], "to": "qb"},
        {"from": "qb", "label": ["b"], "to": "qb"},
        {"from": "qb", "label": [], "to": "q0"},
        {"from": "qb", "label": ["a"], "to": "qa"}
    ],
    "muller": [["qa"]],
    "complete_with_sink": true
}"#;

fn main() {
    let sta = parse_sta(RACE).unwrap();
    let dma = parse_dma(DMA).unwrap();
    println!("classification: {:?}", classify(&sta));
    assert_eq!(classify(&sta), StaClass::OneClock);

    // qualitative: absorption in `sinka` is possible but not almost sure
    let verdict = sta_check_qualitative(&sta, &dma).unwrap();
    println!("almost sure: {}", verdict.satisfied);
    for line in &verdict.evidence {
        println!("  evidence: {line}");
    }
    assert!(!verdict.satisfied);

    // quantitative: both windows have length one, so the race is even
    let init = [(sta.initial.clone(), 1.0)];
    let result = sta_approx_quantitative(
        &sta,
        &init,
        &dma,
        &MonteCarloConfig::new(50_000, 0.99, 17).threads(2),
        &SchemeParams::with_eps(0.05).budget(200),
    )
    .unwrap();
    println!(
        "P(ultimately always a) ∈ [{:.4}, {:.4}] after {} iterations ({:?})",
        result.lo.to_f64(),
        result.hi.to_f64(),
        result.iterations,
        result.status
    );
    for (name, mass) in &result.breakdown {
        println!("  abstract component {name}: lower mass {:.4}", mass.to_f64());
    }
    assert!(result.contains(0.5));
    assert!(!result.tainted, "class soundness keeps the result untainted");
}
