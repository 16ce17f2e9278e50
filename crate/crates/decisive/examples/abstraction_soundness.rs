//! Quotients of countable chains and what can be trusted about them: the
//! one-step abstraction check, completeness for free on finite quotients,
//! soundness certification from fiber-uniform bounds, attractor transfer,
//! and the statistical search for unsoundness counterexamples.
//!
//! The running pair is the random walk and its three-state quotient
//! (0 ↦ s0, 1 ↦ s1, n ≥ 2 ↦ s2). The quotient is always a complete
//! abstraction; it is sound exactly when the walk drifts downward.
//!
//! Run with: `cargo run --example abstraction_soundness`

use decisive::abstraction::{
    certify_complete, certify_sound_via_decisiveness, check_abstraction,
    soundness_witness_search, transfer_attractor, AbstractionHandle, AlphaMap, Soundness,
    SoundnessEvidence, WitnessSearchConfig,
};
use decisive::chain::{SparseDistribution, StateId, StateSet};
use decisive::families;
use decisive::prob::Prob;
use std::collections::BTreeSet;

fn handle(p: Prob) -> AbstractionHandle {
    AbstractionHandle::new(
        families::random_walk(p.clone()),
        families::three_state_quotient(p).unwrap(),
        AlphaMap::walk_quotient(12),
        "walk-to-quotient",
    )
}

fn main() {
    // ---- the downward walk: everything certifies
    let mut down = handle(Prob::from_ratio(1, 3));
    assert!(check_abstraction(&mut down, Some(12)).unwrap());
    let check = down.abstraction_check().unwrap();
    println!("downward walk: abstraction holds (fiber-uniform: {})", check.fiber_uniform);
    // state 3 cannot reach the fiber of s1 in one step, so the strong
    // per-state reading fails while the aggregated one holds — coarse
    // hand-made quotients look like this, region graphs do not

    assert!(certify_complete(&mut down, None).unwrap());
    println!("completeness: certified ({})", down.completeness().unwrap().1);

    // soundness via fiber-uniform bounds: {s0, s1} is a finite abstract
    // attractor whose fibers {0} and {1} are singletons, so the required
    // step/probability floors are verified exactly
    let evidence = SoundnessEvidence::FiberUniformBounds {
        abstract_attractor: BTreeSet::from([StateId(0), StateId(1)]),
        attractor_justification: "p = 1/3 drifts down; {0,1} attracts (gambler's ruin)".into(),
        step_bound: 2,
        prob_floor: 0.3,
        catalogue: vec![
            StateSet::explicit([StateId(0)]),
            StateSet::explicit([StateId(1)]),
            StateSet::explicit([StateId(2)]),
        ],
        search_bound: 8,
    };
    assert!(certify_sound_via_decisiveness(&mut down, &evidence).unwrap());
    match down.soundness() {
        Soundness::Certified { evidence } => println!("soundness: certified ({evidence})"),
        other => panic!("expected certification, got {other:?}"),
    }

    // a certified handle transfers attractors downward: the abstract
    // attractor {s0} pulls back to the concrete attractor {0}
    let transferred =
        transfer_attractor(&down, &StateSet::explicit([StateId(0)]), Some(32)).unwrap();
    assert!(transferred.contains(StateId(0)).unwrap());
    assert!(!transferred.contains(StateId(7)).unwrap());
    println!("attractor transfer: preimage of {{s0}} is {{0}}");

    // ---- the upward walk: the same quotient is witnessed unsound
    let mut up = handle(Prob::from_ratio(2, 3));
    assert!(check_abstraction(&mut up, Some(12)).unwrap());
    let witness = soundness_witness_search(
        &mut up,
        &SparseDistribution::dirac(StateId(1)),
        None,
        &WitnessSearchConfig {
            samples: 50_000,
            confidence: 0.99,
            seed: 11,
            ..Default::default()
        },
    )
    .unwrap()
    .expect("upward walk must be witnessed unsound");
    println!(
        "upward walk: unsoundness witness on {} — abstract value {}, concrete ≈ {:.4} ± {:.4}",
        witness.target, witness.abstract_value, witness.concrete_estimate, witness.half_width
    );
    assert!(witness.concrete_estimate + witness.half_width < 0.95);
    assert!(matches!(up.soundness(), Soundness::WitnessedUnsound { .. }));

    // the clean handle finds nothing over the same catalogue
    let clean = soundness_witness_search(
        &mut down,
        &SparseDistribution::dirac(StateId(1)),
        None,
        &WitnessSearchConfig {
            samples: 20_000,
            confidence: 0.99,
            seed: 13,
            horizon: 400,
            ..Default::default()
        },
    )
    .unwrap();
    println!("downward walk: witness search found {:?}", clean);
    assert!(clean.is_none());
}
