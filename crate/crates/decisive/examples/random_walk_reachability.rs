//! Interval approximation of reachability on a countable chain: the random
//! walk over the naturals, analysed for both drift directions.
//!
//! With downward drift (p = 1/3) the walk is attracted to {0}; the adjacent
//! sequences close and the scheme converges. With upward drift (p = 2/3)
//! the avoid-set of {0} is empty while the reachability probability is only
//! 1/2, so no decisiveness holds: the scheme detects the stall and reports
//! the residual gap instead of pretending to converge.
//!
//! Run with: `cargo run --example random_walk_reachability`

use decisive::chain::{SparseDistribution, StateId, StateSet};
use decisive::families;
use decisive::prob::Prob;
use decisive::qualitative::{AvoidSet, DecisivenessEvidence};
use decisive::quantitative::{approx_reach, ApproxStatus, ProbabilityEstimator, SchemeParams};

fn main() {
    // ---- downward drift: almost-sure reachability, certified convergence
    let walk = families::random_walk(Prob::from_ratio(1, 3));
    let target = StateSet::explicit([StateId(0)]);
    // the chain is strongly connected, so the avoid-set of {0} is empty;
    // we declare it and the toolkit validates the sink property
    let avoid = AvoidSet::user_supplied(&walk, StateSet::empty()).unwrap();
    let evidence = DecisivenessEvidence::FiniteAttractor {
        description: "downward drift reaches {0} almost surely (gambler's ruin)".into(),
    };
    let result = approx_reach(
        &walk,
        &SparseDistribution::dirac(StateId(1)),
        &target,
        &avoid,
        &ProbabilityEstimator::Exact,
        &SchemeParams::with_eps(1e-6),
        &evidence,
    )
    .unwrap();
    println!("p = 1/3, from state 1, target {{0}}:");
    println!("  interval  [{}, {}]", result.lo, result.hi);
    println!("  ≈ [{:.9}, {:.9}]", result.lo.to_f64(), result.hi.to_f64());
    println!("  status    {:?} after {} iterations", result.status, result.iterations);
    assert!(matches!(result.status, ApproxStatus::Converged { .. }));
    assert!(result.contains(1.0));

    // ---- upward drift: the same question, honestly left open
    let walk = families::random_walk(Prob::from_ratio(2, 3));
    let avoid = AvoidSet::user_supplied(&walk, StateSet::empty()).unwrap();
    let result = approx_reach(
        &walk,
        &SparseDistribution::dirac(StateId(1)),
        &target,
        &avoid,
        &ProbabilityEstimator::Exact,
        &SchemeParams::with_eps(1e-6).budget(5_000),
        &DecisivenessEvidence::Assumed {
            note: "no attractor: the upward walk diverges".into(),
        },
    )
    .unwrap();
    println!("\np = 2/3, from state 1, target {{0}}:");
    println!(
        "  lower sequence settled at {:.9} (the true value is (1-p)/p = 1/2)",
        result.lo.to_f64()
    );
    match result.status {
        ApproxStatus::Stalled { residual_gap } => {
            println!("  stalled with residual gap {residual_gap:.6}: the gap itself");
            println!("  lower-bounds how badly decisiveness fails for this target");
        }
        other => println!("  unexpected status {other:?}"),
    }
    assert!(result.tainted, "assumed evidence taints the result");
    assert!((result.lo.to_f64() - 0.5).abs() < 1e-6);
}
