//! Why the repeated-reachability scheme demands evidence: a countable chain
//! whose hub-return probabilities vanish along an escaping ray.
//!
//! From the hub the ray restarts at a_1; from a_n the hub is re-entered
//! with probability 3^{-n} only. The probability of climbing forever from
//! a_1 is Π (1 − 3^{-n}) ≈ 0.56 > 0, so each excursion returns with
//! probability < 1 and the hub is almost surely visited finitely often:
//! P(G F hub) = 0.
//!
//! The avoid-set of the hub is empty (every a_n can still reach it), so the
//! naive adjacent sequences close instantly around 1. The toolkit runs the
//! scheme only under decisiveness evidence; passing `Assumed` evidence
//! taints the result, and this example shows exactly how wrong a tainted
//! answer can be.
//!
//! Run with: `cargo run --example unfair_repeated_reachability`

use decisive::chain::{SparseDistribution, StateId, StateSet};
use decisive::families;
use decisive::qualitative::{AvoidSet, DecisivenessEvidence};
use decisive::quantitative::{approx_repeated, ProbabilityEstimator, SchemeParams};

fn main() {
    let ray = families::escaping_ray();

    // the avoid-set of the hub is empty, and the double avoid-set is
    // therefore everything; both sink properties hold trivially
    let avoid = AvoidSet::user_supplied(&ray, StateSet::empty()).unwrap();
    let double = AvoidSet::user_supplied(&ray, StateSet::full()).unwrap();

    let result = approx_repeated(
        &ray,
        &SparseDistribution::dirac(StateId(0)),
        &avoid,
        &double,
        &ProbabilityEstimator::Exact,
        &SchemeParams::with_eps(1e-9),
        &DecisivenessEvidence::Assumed {
            note: "persistence of the dichotomy is NOT established for this chain".into(),
        },
    )
    .unwrap();

    println!("scheme interval: [{}, {}]", result.lo, result.hi);
    println!("tainted: {}", result.tainted);
    println!("evidence: {}", result.evidence.describe());
    assert!(result.lo.is_one(), "the scheme is certain — and wrong");
    assert!(result.tainted);

    // the independent oracle: the per-cycle return probability is
    // 1 − Π(1 − 3^{-n}) < 1, so the hub recurs with probability zero
    let never_return = families::escaping_ray_never_return(1e-12);
    println!(
        "oracle: climb-forever probability Π(1 − 3^-n) = {:.12}",
        never_return.to_f64()
    );
    println!("        per-cycle return probability {:.12} < 1", 1.0 - never_return.to_f64());
    println!("        hence P(G F hub) = 0, not 1");
    assert!(never_return.to_f64() > 0.56);

    println!();
    println!("the interval is valid only under the evidence it names;");
    println!("tainted results must never be consumed as verified bounds");
}
