//! α-abstractions between chains: pushforward of measures, one-step
//! abstraction checking, completeness and soundness certification, witness
//! search for unsoundness, and transfer of attractors.
//!
//! Soundness is deliberately three-valued (certified / witnessed-unsound /
//! unknown); the ω-regular pipelines refuse to run on anything but a
//! certified handle unless the caller explicitly overrides.

use crate::chain::{MarkovChain, SparseDistribution, StateId, StateSet};
use crate::error::{Error, Result};
use crate::formula::{bounded_event_probability, Bound, PathFormula};
use crate::prob::Prob;
use crate::qualitative::{avoid_set, is_attractor};
use crate::solve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// A fiber enumeration: the concrete states mapping to one abstract state.
/// `exhaustive` is false when the fiber is infinite and only a certified
/// prefix is listed.
#[derive(Clone, Debug)]
pub struct FiberSample {
    pub states: Vec<StateId>,
    pub exhaustive: bool,
}

type MapFn = Arc<dyn Fn(StateId) -> StateId + Send + Sync>;
type FiberFn = Arc<dyn Fn(StateId) -> FiberSample + Send + Sync>;

/// A total measurable map from concrete to abstract states, together with a
/// fiber enumerator consistent with it.
#[derive(Clone)]
pub struct AlphaMap {
    map: MapFn,
    fiber: FiberFn,
}

impl AlphaMap {
    pub fn new<M, F>(map: M, fiber: F) -> Self
    where
        M: Fn(StateId) -> StateId + Send + Sync + 'static,
        F: Fn(StateId) -> FiberSample + Send + Sync + 'static,
    {
        AlphaMap {
            map: Arc::new(map),
            fiber: Arc::new(fiber),
        }
    }

    /// Explicit table for a finite concrete chain.
    pub fn from_table(table: Vec<StateId>) -> Self {
        let mut fibers: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        for (i, s) in table.iter().enumerate() {
            fibers.entry(*s).or_default().push(StateId(i as u64));
        }
        let table = Arc::new(table);
        let fibers = Arc::new(fibers);
        AlphaMap {
            map: Arc::new(move |s: StateId| table[s.0 as usize]),
            fiber: Arc::new(move |s: StateId| FiberSample {
                states: fibers.get(&s).cloned().unwrap_or_default(),
                exhaustive: true,
            }),
        }
    }

    pub fn identity() -> Self {
        AlphaMap {
            map: Arc::new(|s| s),
            fiber: Arc::new(|s| FiberSample {
                states: vec![s],
                exhaustive: true,
            }),
        }
    }

    /// The quotient of the random walk onto the three-state chain:
    /// 0 ↦ s0, 1 ↦ s1, n ≥ 2 ↦ s2 (the s2 fiber is enumerated up to
    /// `fiber_prefix` states).
    pub fn walk_quotient(fiber_prefix: usize) -> Self {
        AlphaMap {
            map: Arc::new(|n: StateId| StateId(n.0.min(2))),
            fiber: Arc::new(move |s: StateId| match s.0 {
                0 | 1 => FiberSample {
                    states: vec![s],
                    exhaustive: true,
                },
                2 => FiberSample {
                    states: (2..2 + fiber_prefix as u64).map(StateId).collect(),
                    exhaustive: false,
                },
                _ => FiberSample {
                    states: vec![],
                    exhaustive: true,
                },
            }),
        }
    }

    pub fn apply(&self, s: StateId) -> StateId {
        (self.map)(s)
    }

    pub fn fiber(&self, s: StateId) -> FiberSample {
        (self.fiber)(s)
    }

    /// Image measure: α#(μ)(A) = μ(α^{-1}(A)).
    pub fn pushforward(&self, mu: &SparseDistribution) -> Result<SparseDistribution> {
        let mut acc: BTreeMap<StateId, Prob> = BTreeMap::new();
        for (s, p) in mu.entries() {
            let t = self.apply(*s);
            match acc.get_mut(&t) {
                Some(existing) => *existing += p.clone(),
                None => {
                    acc.insert(t, p.clone());
                }
            }
        }
        SparseDistribution::new(acc.into_iter().collect())
    }

    /// The preimage α^{-1}(A) of an abstract set as a predicate set.
    pub fn preimage(&self, abstract_set: &StateSet, certificate: Option<usize>) -> StateSet {
        let map = self.map.clone();
        let a = abstract_set.clone();
        StateSet::predicate(
            move |s| a.contains(map(s)),
            certificate,
            "alpha-preimage",
        )
    }
}

/// Soundness status of a handle.
#[derive(Clone, Debug, Serialize)]
pub enum Soundness {
    Unknown,
    Certified { evidence: String },
    WitnessedUnsound { witness: UnsoundnessWitness },
}

/// Outcome of the one-step abstraction check.
#[derive(Clone, Debug, Serialize, Default)]
pub struct AbstractionCheck {
    pub holds: bool,
    /// Every enumerated fiber state realizes every abstract edge (the
    /// strong per-state reading; region-style quotients satisfy it, coarse
    /// hand-made quotients often only satisfy the aggregated reading).
    pub fiber_uniform: bool,
    /// Some checked fiber was only a certified prefix.
    pub qualified_by_bound: bool,
    pub checked_pairs: usize,
    pub offending: Option<String>,
}

/// A pair (B, μ) on which almost-sure reachability fails to transfer from
/// the abstraction down to the concrete chain.
#[derive(Clone, Debug, Serialize)]
pub struct UnsoundnessWitness {
    pub target: String,
    pub abstract_value: Prob,
    pub concrete_estimate: f64,
    pub half_width: f64,
    pub horizon: usize,
    pub samples: usize,
    pub confidence: f64,
    pub stalled: bool,
}

/// A concrete chain, an abstract chain and the α-map connecting them, with
/// certification flags that are only ever set by the checking operations.
pub struct AbstractionHandle {
    pub concrete: MarkovChain,
    pub abstract_chain: MarkovChain,
    pub alpha: AlphaMap,
    pub name: String,
    abstraction: Option<AbstractionCheck>,
    complete: Option<(bool, String)>,
    soundness: Soundness,
}

impl AbstractionHandle {
    pub fn new(
        concrete: MarkovChain,
        abstract_chain: MarkovChain,
        alpha: AlphaMap,
        name: impl Into<String>,
    ) -> Self {
        AbstractionHandle {
            concrete,
            abstract_chain,
            alpha,
            name: name.into(),
            abstraction: None,
            complete: None,
            soundness: Soundness::Unknown,
        }
    }

    pub fn abstraction_check(&self) -> Option<&AbstractionCheck> {
        self.abstraction.as_ref()
    }

    pub fn completeness(&self) -> Option<&(bool, String)> {
        self.complete.as_ref()
    }

    pub fn soundness(&self) -> &Soundness {
        &self.soundness
    }

    pub fn is_certified_sound(&self) -> bool {
        matches!(self.soundness, Soundness::Certified { .. })
    }
}

/// One-step abstraction check against the DMC characterization: over every
/// enumerated fiber, (a) no concrete step leaves the abstract successor
/// support, and (b) every abstract edge is realized by some fiber state.
/// The per-state uniform reading is reported in `fiber_uniform`.
pub fn check_abstraction(handle: &mut AbstractionHandle, bound: Option<usize>) -> Result<bool> {
    let abs = &handle.abstract_chain;
    let n = abs.num_states().ok_or_else(|| {
        Error::CertificateRequired("abstraction check needs a finite abstract chain".into())
    })?;
    let mut report = AbstractionCheck {
        holds: true,
        fiber_uniform: true,
        ..Default::default()
    };
    let _ = bound;
    for s in (0..n as u64).map(StateId) {
        let fiber = handle.alpha.fiber(s);
        if !fiber.exhaustive {
            report.qualified_by_bound = true;
        }
        if fiber.states.is_empty() {
            continue; // nothing of the fiber is enumerable; cannot refute
        }
        let abstract_support: BTreeSet<StateId> =
            abs.successors(s)?.support().collect();
        let mut witnessed: BTreeSet<StateId> = BTreeSet::new();
        for c in &fiber.states {
            if handle.alpha.apply(*c) != s {
                return Err(Error::InvalidModel(format!(
                    "fiber enumeration of {s} lists {c}, which maps elsewhere"
                )));
            }
            let image: BTreeSet<StateId> = handle
                .concrete
                .successors(*c)?
                .support()
                .map(|t| handle.alpha.apply(t))
                .collect();
            report.checked_pairs += image.len();
            if let Some(extra) = image.difference(&abstract_support).next() {
                report.holds = false;
                report.fiber_uniform = false;
                report.offending = Some(format!(
                    "concrete {c} steps into the fiber of {extra}, but the abstract chain has no edge {s} -> {extra}"
                ));
                handle.abstraction = Some(report.clone());
                return Ok(false);
            }
            if !abstract_support.iter().all(|t| image.contains(t)) {
                report.fiber_uniform = false;
            }
            witnessed.extend(image);
        }
        if let Some(missing) = abstract_support.difference(&witnessed).next() {
            report.holds = false;
            report.offending = Some(format!(
                "abstract edge {s} -> {missing} has no concrete counterpart on the enumerated fiber"
            ));
            handle.abstraction = Some(report.clone());
            return Ok(false);
        }
    }
    let holds = report.holds;
    handle.abstraction = Some(report);
    Ok(holds)
}

/// Completeness certification: a finite abstract chain is complete; a
/// countable one needs a verified finite attractor (which makes it
/// decisive). Returns false with the reason recorded when undetermined.
pub fn certify_complete(
    handle: &mut AbstractionHandle,
    abstract_attractor: Option<&StateSet>,
) -> Result<bool> {
    if !matches!(handle.abstraction, Some(AbstractionCheck { holds: true, .. })) {
        return Err(Error::HypothesisViolated(
            "certify the abstraction property before completeness".into(),
        ));
    }
    let (ok, reason) = if handle.abstract_chain.is_finite() {
        (true, "abstract chain is finite, hence decisive".to_string())
    } else if let Some(a) = abstract_attractor {
        if is_attractor(&handle.abstract_chain, a, None)? {
            (true, "abstract chain has a verified finite attractor".into())
        } else {
            (false, "declared abstract attractor failed verification".into())
        }
    } else {
        (
            false,
            "unknown: countable abstract chain without attractor evidence".into(),
        )
    };
    handle.complete = Some((ok, reason));
    Ok(ok)
}

/// Evidence for soundness certification: decisiveness of the concrete chain
/// w.r.t. α-closed sets, in one of the accepted forms.
pub enum SoundnessEvidence {
    /// The concrete chain is finite (hence decisive for everything).
    ConcreteFinite,
    /// Fiber-uniform bound evidence: a finite abstract attractor whose
    /// preimage attracts the concrete chain, with per-fiber step/probability
    /// floors spot-checked on the enumerated fiber states.
    FiberUniformBounds {
        abstract_attractor: BTreeSet<StateId>,
        /// Caller's justification that the preimage attracts the concrete
        /// chain (not mechanically checkable on countable chains).
        attractor_justification: String,
        /// Bounded-step floor: from every attractor fiber state, every
        /// catalogue set is reached within `step_bound` steps with
        /// probability at least `prob_floor`, or is unreachable.
        step_bound: u32,
        prob_floor: f64,
        catalogue: Vec<StateSet>,
        search_bound: usize,
    },
    /// A per-class theorem discharged structurally (for instance the
    /// thick-graph soundness of reactive or single-clock timed automata).
    StructuralTheorem { note: String },
}

/// Certify soundness from decisiveness evidence for the concrete chain with
/// respect to α-closed sets.
pub fn certify_sound_via_decisiveness(
    handle: &mut AbstractionHandle,
    evidence: &SoundnessEvidence,
) -> Result<bool> {
    if !matches!(handle.abstraction, Some(AbstractionCheck { holds: true, .. })) {
        return Err(Error::HypothesisViolated(
            "certify the abstraction property before soundness".into(),
        ));
    }
    match evidence {
        SoundnessEvidence::ConcreteFinite => {
            if !handle.concrete.is_finite() {
                return Err(Error::HypothesisViolated(
                    "concrete chain is not finite".into(),
                ));
            }
            handle.soundness = Soundness::Certified {
                evidence: "finite concrete chain is decisive w.r.t. every set".into(),
            };
            Ok(true)
        }
        SoundnessEvidence::StructuralTheorem { note } => {
            handle.soundness = Soundness::Certified {
                evidence: format!("structural theorem: {note}"),
            };
            Ok(true)
        }
        SoundnessEvidence::FiberUniformBounds {
            abstract_attractor,
            attractor_justification,
            step_bound,
            prob_floor,
            catalogue,
            search_bound,
        } => {
            let attractor_set = StateSet::Explicit(abstract_attractor.clone());
            if !is_attractor(&handle.abstract_chain, &attractor_set, None)? {
                return Err(Error::HypothesisViolated(
                    "declared abstract attractor failed verification".into(),
                ));
            }
            for s in abstract_attractor {
                let fiber = handle.alpha.fiber(*s);
                for b in catalogue {
                    let target = handle.alpha.preimage(b, Some(*search_bound));
                    let mut reach_probs = Vec::new();
                    for c in &fiber.states {
                        let mu = SparseDistribution::dirac(*c);
                        let phi =
                            PathFormula::eventually(PathFormula::set(0), Bound::AtMost(*step_bound));
                        let p = bounded_event_probability(
                            &handle.concrete,
                            &mu,
                            &phi,
                            std::slice::from_ref(&target),
                            *step_bound,
                        )?;
                        reach_probs.push(p.to_f64());
                    }
                    let all_floor = reach_probs.iter().all(|p| *p >= *prob_floor);
                    let all_zero = {
                        let mut zero = true;
                        for c in &fiber.states {
                            let reached = handle
                                .concrete
                                .reachable_from(&[*c], Some(*search_bound))?;
                            let mut hits = false;
                            for t in reached {
                                if target.contains(t)? {
                                    hits = true;
                                    break;
                                }
                            }
                            if hits {
                                zero = false;
                                break;
                            }
                        }
                        zero
                    };
                    if !all_floor && !all_zero {
                        handle.soundness = Soundness::Unknown;
                        return Ok(false);
                    }
                }
            }
            handle.soundness = Soundness::Certified {
                evidence: format!(
                    "fiber-uniform bounds (k={step_bound}, p>={prob_floor}) spot-checked on {} attractor fibers; concrete attractor justification: {attractor_justification}",
                    abstract_attractor.len()
                ),
            };
            Ok(true)
        }
    }
}

/// Configuration of the statistical witness search.
#[derive(Clone, Debug)]
pub struct WitnessSearchConfig {
    pub samples: usize,
    pub confidence: f64,
    pub seed: u64,
    pub horizon: usize,
    pub stall_window: usize,
    /// Declare a witness only when the bounded estimate plus its half-width
    /// stays below 1 by at least this margin.
    pub margin: f64,
}

impl Default for WitnessSearchConfig {
    fn default() -> Self {
        WitnessSearchConfig {
            samples: 100_000,
            confidence: 0.99,
            seed: 0,
            horizon: 512,
            stall_window: 64,
            margin: 0.05,
        }
    }
}

/// Search for an unsoundness counterexample: an abstract set reached
/// almost-surely in the abstraction whose preimage is, statistically,
/// not reached almost-surely in the concrete chain. The default catalogue
/// is the abstract singletons plus their avoid-sets.
pub fn soundness_witness_search(
    handle: &mut AbstractionHandle,
    mu: &SparseDistribution,
    catalogue: Option<Vec<(String, StateSet)>>,
    cfg: &WitnessSearchConfig,
) -> Result<Option<UnsoundnessWitness>> {
    let abs = &handle.abstract_chain;
    let n = abs.num_states().ok_or_else(|| {
        Error::CertificateRequired("witness search needs a finite abstract chain".into())
    })?;
    let catalogue = match catalogue {
        Some(c) => c,
        None => {
            let mut sets: Vec<(String, StateSet)> = Vec::new();
            for s in (0..n as u64).map(StateId) {
                sets.push((
                    format!("{{{}}}", abs.state_name(s)),
                    StateSet::explicit([s]),
                ));
                let avoid = avoid_set(abs, &StateSet::explicit([s]))?;
                if let Some(states) = avoid.set().as_explicit() {
                    if !states.is_empty() {
                        sets.push((
                            format!("avoid({})", abs.state_name(s)),
                            StateSet::Explicit(states.clone()),
                        ));
                    }
                }
            }
            sets
        }
    };
    let mu_abs = handle.alpha.pushforward(mu)?;
    for (name, b) in catalogue {
        let abstract_value = solve::reach_value(abs, &mu_abs, &b)?;
        if !abstract_value.is_one() {
            continue;
        }
        let estimate = estimate_concrete_reach(handle, mu, &b, cfg)?;
        let h = hoeffding_half_width(cfg.samples, cfg.confidence);
        if estimate.upper_with(h) < 1.0 - cfg.margin {
            let witness = UnsoundnessWitness {
                target: name,
                abstract_value,
                concrete_estimate: estimate.p_hat,
                half_width: h,
                horizon: cfg.horizon,
                samples: cfg.samples,
                confidence: cfg.confidence,
                stalled: estimate.stalled,
            };
            handle.soundness = Soundness::WitnessedUnsound {
                witness: witness.clone(),
            };
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

fn hoeffding_half_width(samples: usize, confidence: f64) -> f64 {
    let delta = 1.0 - confidence;
    ((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt()
}

struct BoundedEstimate {
    p_hat: f64,
    stalled: bool,
}

impl BoundedEstimate {
    fn upper_with(&self, h: f64) -> f64 {
        if self.stalled {
            self.p_hat + h
        } else {
            // without a stall the tail beyond the horizon is unassessed
            1.0
        }
    }
}

/// Sampled estimate of P_μ(F^{≤horizon} α^{-1}(B)), with stall detection:
/// the estimate is only trusted as an upper-bound certificate when hits have
/// stopped arriving for a full window before the horizon.
fn estimate_concrete_reach(
    handle: &AbstractionHandle,
    mu: &SparseDistribution,
    b: &StateSet,
    cfg: &WitnessSearchConfig,
) -> Result<BoundedEstimate> {
    let mut hit_at: Vec<u64> = vec![0; cfg.horizon + 1];
    let mut hits_total = 0u64;
    for path in 0..cfg.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(path as u64 + 1);
        let mut s = sample(mu, &mut rng);
        if b.contains(handle.alpha.apply(s))? {
            hit_at[0] += 1;
            hits_total += 1;
            continue;
        }
        for step in 1..=cfg.horizon {
            let row = handle.concrete.successors(s)?;
            s = sample(&row, &mut rng);
            if b.contains(handle.alpha.apply(s))? {
                hit_at[step] += 1;
                hits_total += 1;
                break;
            }
        }
    }
    let last_hit = hit_at.iter().rposition(|&c| c > 0).unwrap_or(0);
    let stalled = cfg.horizon - last_hit >= cfg.stall_window;
    Ok(BoundedEstimate {
        p_hat: hits_total as f64 / cfg.samples as f64,
        stalled,
    })
}

fn sample(dist: &SparseDistribution, rng: &mut ChaCha8Rng) -> StateId {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (s, p) in dist.entries() {
        acc += p.to_f64();
        if r < acc {
            return *s;
        }
    }
    dist.entries().last().expect("nonempty").0
}

/// Transfer a verified abstract attractor down through a certified-sound
/// handle: the preimage of an abstract attractor is a concrete attractor.
pub fn transfer_attractor(
    handle: &AbstractionHandle,
    abstract_attractor: &StateSet,
    certificate: Option<usize>,
) -> Result<StateSet> {
    if !handle.is_certified_sound() {
        return Err(Error::HypothesisViolated(
            "attractor transfer requires certified soundness".into(),
        ));
    }
    if !is_attractor(&handle.abstract_chain, abstract_attractor, None)? {
        return Err(Error::HypothesisViolated(
            "declared abstract attractor failed verification".into(),
        ));
    }
    Ok(handle.alpha.preimage(abstract_attractor, certificate))
}

/// Lift an α-map to pair states of the products with a common automaton:
/// (s, q) ↦ (α(s), q). The abstraction property of the lifted map must be
/// re-checked, not assumed.
pub fn lift_alpha_to_product(
    alpha: &AlphaMap,
    concrete_product: &crate::omega::ProductChain,
    abstract_product: &crate::omega::ProductChain,
) -> Result<AlphaMap> {
    let qc = concrete_product.q_count();
    if qc != abstract_product.q_count() {
        return Err(Error::AlphabetMismatch);
    }
    let qc = qc as u64;
    let base_map = alpha.clone();
    let base_fiber = alpha.clone();
    Ok(AlphaMap::new(
        move |pair: StateId| {
            let s = StateId(pair.0 / qc);
            let q = pair.0 % qc;
            StateId(base_map.apply(s).0 * qc + q)
        },
        move |pair: StateId| {
            let s = StateId(pair.0 / qc);
            let q = pair.0 % qc;
            let fiber = base_fiber.fiber(s);
            FiberSample {
                states: fiber
                    .states
                    .iter()
                    .map(|c| StateId(c.0 * qc + q))
                    .collect(),
                exhaustive: fiber.exhaustive,
            }
        },
    ))
}
