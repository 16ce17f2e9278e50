//! Exact analysis of finite chains: loading a JSON model, hitting
//! probabilities by rational linear solve, until values, bottom components
//! and repeated reachability, and qualitative verdicts with their evidence.
//!
//! Run with: `cargo run --example finite_chain_exact`

use decisive::chain::{SparseDistribution, StateId, StateSet};
use decisive::model_json::parse_model;
use decisive::qualitative::{avoid_set, bsccs, qualitative_repeated, DecisivenessEvidence, Verdict};
use decisive::solve::{exact_reachability_finite, repeated_reach_value, until_value};

const MODEL: &str = r#"{
    "states": ["try", "retry", "done", "fail"],
    "init": {"try": "1"},
    "edges": [
        {"from": "try",   "to": "done",  "prob": "1/2"},
        {"from": "try",   "to": "retry", "prob": "1/2"},
        {"from": "retry", "to": "try",   "prob": "2/3"},
        {"from": "retry", "to": "fail",  "prob": "1/3"},
        {"from": "done",  "to": "done",  "prob": "1"},
        {"from": "fail",  "to": "fail",  "prob": "1"}
    ],
    "labels": {"done": ["ok"]},
    "ap": ["ok"]
}"#;

fn main() {
    let model = parse_model(MODEL).unwrap();
    let chain = model.chain;
    let mu = model.init.unwrap();

    // exact hitting probabilities of "done" for every state
    let done = chain.state_by_name("done").unwrap();
    let target = StateSet::explicit([done]);
    let values = exact_reachability_finite(&chain, &target).unwrap();
    println!("P(F done) per state:");
    for (i, v) in values.iter().enumerate() {
        println!("  {:<6} {}", chain.state_name(StateId(i as u64)), v);
    }
    // from "try": x = 1/2 + 1/2·2/3·x, so x = 3/4
    assert_eq!(values[0], decisive::prob::Prob::from_ratio(3, 4));

    // an until value: stay out of "fail" until "done"
    let no_fail = {
        let fail = chain.state_by_name("fail").unwrap();
        StateSet::predicate(move |s| Ok(s != fail), None, "not fail")
    };
    let u = until_value(&chain, &mu, &no_fail, &target).unwrap();
    println!("P(¬fail U done) from init = {u}");

    // bottom components and the avoid-set of the target
    let components = bsccs(&chain).unwrap();
    println!("bottom components:");
    for c in &components {
        let names: Vec<String> = c.iter().map(|s| chain.state_name(*s)).collect();
        println!("  {{{}}}", names.join(", "));
    }
    let avoid = avoid_set(&chain, &target).unwrap();
    println!("avoid-set of done: {:?}", avoid.set());

    // repeated reachability: ending up in the "done" component
    let gf = repeated_reach_value(&chain, &mu, &target).unwrap();
    println!("P(G F done) from init = {gf}");
    assert_eq!(gf, values[0]);

    // the qualitative verdict carries its justification
    let report = qualitative_repeated(&chain, &mu, &target, &DecisivenessEvidence::FiniteChain)
        .unwrap();
    println!("verdict: {:?} (evidence: {})", report.verdict, report.evidence.describe());
    assert_eq!(report.verdict, Verdict::Positive);
}
