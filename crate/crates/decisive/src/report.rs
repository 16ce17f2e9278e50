//! Report emission: JSON for every analysis result, DOT for graphs.
//!
//! Reports are deterministic for fixed inputs and seed: probabilities
//! print as exact rationals in exact mode and as 12-significant-digit
//! decimals otherwise, and JSON keys are emitted in sorted order.

use crate::omega::ProductChain;
use crate::prob::Prob;
use crate::qualitative::{AttractorGraph, QualitativeReport};
use crate::quantitative::{ApproxResult, ApproxStatus};
use serde_json::{json, Value};
use std::collections::BTreeSet;

pub fn prob_string(p: &Prob) -> String {
    p.to_string()
}

pub fn approx_report(property: &str, result: &ApproxResult, seed: Option<u64>) -> Value {
    let status = match &result.status {
        ApproxStatus::Converged { eps } => json!({"kind": "converged", "eps": eps}),
        ApproxStatus::Stalled { residual_gap } => {
            json!({"kind": "stalled", "residual_gap": residual_gap})
        }
        ApproxStatus::BudgetExhausted { residual_gap } => {
            json!({"kind": "budget-exhausted", "residual_gap": residual_gap})
        }
    };
    let mut report = json!({
        "property": property,
        "interval": [prob_string(&result.lo), prob_string(&result.hi)],
        "iterations": result.iterations,
        "status": status,
        "evidence": result.evidence.describe(),
        "tainted": result.tainted,
    });
    if let Some(seed) = seed {
        report["seed"] = json!(seed);
    }
    if let Some(s) = &result.sampling {
        report["sampling"] = json!({
            "samples": s.samples,
            "confidence": s.confidence,
            "seed": s.seed,
            "half_width": s.half_width,
        });
    }
    if !result.breakdown.is_empty() {
        report["breakdown"] = Value::Object(
            result
                .breakdown
                .iter()
                .map(|(name, p)| (name.clone(), Value::String(prob_string(p))))
                .collect(),
        );
    }
    report
}

pub fn verdict_report(property: &str, report: &QualitativeReport) -> Value {
    json!({
        "property": property,
        "verdict": format!("{:?}", report.verdict),
        "evidence": report.evidence.describe(),
        "tainted": report.tainted,
        "notes": report.notes,
    })
}

/// DOT rendering of an attractor graph; good bottom components get a
/// double border and a `good` label.
pub fn attractor_graph_dot(
    product: &ProductChain,
    graph: &AttractorGraph,
    good: &[usize],
) -> String {
    let good_vertices: BTreeSet<usize> = good
        .iter()
        .flat_map(|&c| graph.bsccs()[c].iter().copied())
        .collect();
    let in_bscc: BTreeSet<usize> = graph
        .bsccs()
        .iter()
        .flatten()
        .copied()
        .collect();
    let mut out = String::from("digraph attractor {\n  rankdir=LR;\n");
    for (i, v) in graph.vertices().iter().enumerate() {
        let name = product.chain().state_name(*v);
        let attrs = if good_vertices.contains(&i) {
            "shape=doubleoctagon,color=forestgreen"
        } else if in_bscc.contains(&i) {
            "shape=octagon"
        } else {
            "shape=box"
        };
        out.push_str(&format!("  v{i} [{attrs},label=\"{name}\"];\n"));
    }
    for (i, targets) in graph.edges().iter().enumerate() {
        for &j in targets {
            if i != j {
                out.push_str(&format!("  v{i} -> v{j};\n"));
            } else {
                out.push_str(&format!("  v{i} -> v{i};\n"));
            }
        }
    }
    for (c, component) in graph.bsccs().iter().enumerate() {
        let locations: Vec<String> = graph.recurring_sets()[c]
            .iter()
            .map(|q| q.to_string())
            .collect();
        out.push_str(&format!(
            "  // bscc {c}: vertices {:?}, recurring locations {{{}}}{}\n",
            component,
            locations.join(","),
            if good.contains(&c) { " (good)" } else { "" }
        ));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a finite chain.
pub fn chain_dot(chain: &crate::chain::MarkovChain) -> crate::error::Result<String> {
    let n = chain.num_states().ok_or_else(|| {
        crate::error::Error::HypothesisViolated("DOT output needs a finite chain".into())
    })?;
    let mut out = String::from("digraph chain {\n  rankdir=LR;\n");
    for i in 0..n {
        let s = crate::chain::StateId(i as u64);
        out.push_str(&format!(
            "  s{i} [shape=circle,label=\"{}\"];\n",
            chain.state_name(s)
        ));
    }
    for i in 0..n {
        let s = crate::chain::StateId(i as u64);
        for (t, p) in chain.successors(s)?.entries() {
            out.push_str(&format!(
                "  s{i} -> s{} [label=\"{}\"];\n",
                t.0,
                prob_string(p)
            ));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{SparseDistribution, StateId, StateSet};
    use crate::families;
    use crate::qualitative::DecisivenessEvidence;
    use crate::quantitative::{approx_reach, ProbabilityEstimator, SchemeParams};

    #[test]
    fn approx_report_round_trips() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 3), 10).unwrap();
        let b = StateSet::explicit([StateId(0)]);
        let avoid = crate::qualitative::avoid_set(&chain, &b).unwrap();
        let result = approx_reach(
            &chain,
            &SparseDistribution::dirac(StateId(1)),
            &b,
            &avoid,
            &ProbabilityEstimator::Exact,
            &SchemeParams::with_eps(1e-6),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        let report = approx_report("reach {0}", &result, Some(42));
        let text = serde_json::to_string_pretty(&report).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["property"], "reach {0}");
        assert_eq!(parsed["seed"], 42);
        assert!(parsed["interval"].as_array().unwrap().len() == 2);
    }

    #[test]
    fn chain_dot_is_balanced() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 2)).unwrap();
        let dot = chain_dot(&chain).unwrap();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches('[').count(), dot.matches(']').count());
        assert_eq!(dot.matches('{').count(), dot.matches('}').count());
        assert!(dot.contains("1/2"));
    }
}
