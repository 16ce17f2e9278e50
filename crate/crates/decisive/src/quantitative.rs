//! Interval approximation schemes built from adjacent lower/upper
//! sequences, for reachability, until, repeated reachability, ω-regular
//! properties and time-bounded properties.
//!
//! An exact run keeps one forward frontier with three absorption classes
//! (hit the target, hit the avoid-set, still undecided); a sampled run
//! simulates seeded paths and folds the Hoeffding half-width into the
//! reported interval. Convergence is guaranteed only under the decisiveness
//! evidence attached to the result: when the hypothesis fails the scheme
//! stalls and says so instead of spinning to the budget.

use crate::chain::{MarkovChain, SparseDistribution, StateId, StateSet};
use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::qualitative::{avoid_set, avoid_set_bounded, AvoidSet, DecisivenessEvidence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Shared scheme controls.
#[derive(Clone, Debug)]
pub struct SchemeParams {
    /// Interval width below which the scheme terminates.
    pub eps: f64,
    /// Maximum number of scheme iterations (frontier steps).
    pub budget: usize,
    /// Iterations without progress after which the scheme reports stalling.
    pub stall_window: usize,
    /// Minimal gap decrease over a window counting as progress.
    pub stall_tolerance: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            eps: 1e-6,
            budget: 10_000,
            stall_window: 50,
            stall_tolerance: 1e-12,
        }
    }
}

impl SchemeParams {
    pub fn with_eps(eps: f64) -> Self {
        SchemeParams {
            eps,
            ..Default::default()
        }
    }

    pub fn budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ApproxStatus {
    Converged { eps: f64 },
    Stalled { residual_gap: f64 },
    BudgetExhausted { residual_gap: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplingInfo {
    pub samples: usize,
    pub confidence: f64,
    pub seed: u64,
    pub half_width: f64,
}

/// Result of an approximation run: a bracketing interval, the iteration
/// count, the termination status and the evidence that justifies reading
/// the interval as bounds on the limit value.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxResult {
    pub lo: Prob,
    pub hi: Prob,
    pub iterations: usize,
    pub status: ApproxStatus,
    pub evidence: DecisivenessEvidence,
    pub tainted: bool,
    pub sampling: Option<SamplingInfo>,
    /// Lower-bound mass attributed to named target components (per good
    /// BSCC in the ω-regular pipelines). Sound by pairwise disjointness.
    pub breakdown: Vec<(String, Prob)>,
}

impl ApproxResult {
    pub fn width(&self) -> f64 {
        self.hi.to_f64() - self.lo.to_f64()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo.to_f64() <= value && value <= self.hi.to_f64()
    }
}

/// How the bounded-event probabilities behind a scheme are obtained.
#[derive(Clone, Debug)]
pub enum ProbabilityEstimator {
    /// Exact forward propagation of the (possibly rational) frontier.
    Exact,
    /// Seeded path sampling with a Hoeffding confidence interval.
    MonteCarlo(MonteCarloConfig),
}

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub samples: usize,
    /// Confidence level 1 − δ of the reported interval.
    pub confidence: f64,
    pub seed: u64,
    pub threads: usize,
}

impl MonteCarloConfig {
    pub fn new(samples: usize, confidence: f64, seed: u64) -> Self {
        MonteCarloConfig {
            samples,
            confidence,
            seed,
            threads: 1,
        }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    /// Hoeffding half-width √(ln(2/δ) / 2N).
    pub fn half_width(&self) -> f64 {
        let delta = 1.0 - self.confidence;
        ((2.0 / delta).ln() / (2.0 * self.samples as f64)).sqrt()
    }
}

/// The three absorption classes of the shared frontier.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Class {
    Yes,
    No,
    Undecided,
}

struct Absorber<'a> {
    chain: &'a MarkovChain,
    target: &'a StateSet,
    avoid: &'a AvoidSet,
    /// Until-style constraint: leaving it (outside the target) absorbs as No.
    constraint: Option<&'a StateSet>,
    sink_checked: BTreeSet<StateId>,
}

impl<'a> Absorber<'a> {
    fn classify(&mut self, s: StateId) -> Result<Class> {
        let in_target = self.target.contains(s)?;
        let in_avoid = self.avoid.contains(s)?;
        if in_target && in_avoid {
            return Err(Error::HypothesisViolated(format!(
                "state {s} lies in both the target and the declared avoid-set"
            )));
        }
        if in_target {
            return Ok(Class::Yes);
        }
        if in_avoid {
            if self.sink_checked.insert(s) {
                self.avoid.check_sink_at(self.chain, s)?;
            }
            return Ok(Class::No);
        }
        if let Some(constraint) = self.constraint {
            if !constraint.contains(s)? {
                return Ok(Class::No);
            }
        }
        Ok(Class::Undecided)
    }
}

#[derive(Clone)]
struct SchemeSpec<'a> {
    chain: &'a MarkovChain,
    mu: &'a SparseDistribution,
    target: &'a StateSet,
    avoid: &'a AvoidSet,
    constraint: Option<&'a StateSet>,
    /// Named components of the target for per-component attribution.
    attribution: &'a [(String, StateSet)],
}

fn attribute(
    attribution: &[(String, StateSet)],
    acc: &mut [Prob],
    s: StateId,
    mass: &Prob,
) -> Result<()> {
    for (i, (_, states)) in attribution.iter().enumerate() {
        if states.contains(s)? {
            acc[i] += mass.clone();
            return Ok(());
        }
    }
    Ok(())
}

/// Exact adjacent-sequence run. `p_yes` collects mass reaching the target,
/// `p_no` mass provably never reaching it; the frontier carries the rest.
fn run_exact(
    spec: &SchemeSpec<'_>,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
) -> Result<ApproxResult> {
    let mut absorber = Absorber {
        chain: spec.chain,
        target: spec.target,
        avoid: spec.avoid,
        constraint: spec.constraint,
        sink_checked: BTreeSet::new(),
    };
    let mut p_yes = Prob::zero();
    let mut p_no = Prob::zero();
    let mut breakdown = vec![Prob::zero(); spec.attribution.len()];
    let mut frontier: BTreeMap<StateId, Prob> = BTreeMap::new();

    for (s, mass) in spec.mu.entries() {
        match absorber.classify(*s)? {
            Class::Yes => {
                attribute(spec.attribution, &mut breakdown, *s, mass)?;
                p_yes += mass.clone();
            }
            Class::No => p_no += mass.clone(),
            Class::Undecided => {
                let slot = frontier.entry(*s).or_insert_with(Prob::zero);
                *slot += mass.clone();
            }
        }
    }

    let mut gap_history: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let status = loop {
        let gap = 1.0 - p_yes.to_f64() - p_no.to_f64();
        if gap < params.eps {
            break ApproxStatus::Converged { eps: params.eps };
        }
        gap_history.push(gap);
        if gap_history.len() > params.stall_window {
            let before = gap_history[gap_history.len() - 1 - params.stall_window];
            if before - gap < params.stall_tolerance {
                break ApproxStatus::Stalled { residual_gap: gap };
            }
        }
        if iterations >= params.budget {
            break ApproxStatus::BudgetExhausted { residual_gap: gap };
        }
        let mut next: BTreeMap<StateId, Prob> = BTreeMap::new();
        for (s, mass) in &frontier {
            let row = spec.chain.successors(*s)?;
            for (t, p) in row.entries() {
                let w = mass.clone() * p.clone();
                match absorber.classify(*t)? {
                    Class::Yes => {
                        attribute(spec.attribution, &mut breakdown, *t, &w)?;
                        p_yes += w;
                    }
                    Class::No => p_no += w,
                    Class::Undecided => {
                        let slot = next.entry(*t).or_insert_with(Prob::zero);
                        *slot += w;
                    }
                }
            }
        }
        frontier = next;
        iterations += 1;
    };

    Ok(ApproxResult {
        lo: p_yes,
        hi: Prob::one() - p_no,
        iterations,
        status,
        evidence: evidence.clone(),
        tainted: evidence.is_assumed(),
        sampling: None,
        breakdown: spec
            .attribution
            .iter()
            .map(|(name, _)| name.clone())
            .zip(breakdown)
            .collect(),
    })
}

/// Per-path record of a sampled run: the absorption class and the step at
/// which it occurred, or `None` when the path stayed undecided.
type PathRecord = Option<(Class, usize, StateId)>;

fn simulate_chain_path(
    spec: &SchemeSpec<'_>,
    absorber_sets: (&StateSet, &AvoidSet, Option<&StateSet>),
    rng: &mut ChaCha8Rng,
    horizon: usize,
) -> Result<PathRecord> {
    let (target, avoid, constraint) = absorber_sets;
    let classify = |s: StateId| -> Result<Class> {
        if target.contains(s)? {
            Ok(Class::Yes)
        } else if avoid.contains(s)? {
            Ok(Class::No)
        } else if let Some(c) = constraint {
            if !c.contains(s)? {
                Ok(Class::No)
            } else {
                Ok(Class::Undecided)
            }
        } else {
            Ok(Class::Undecided)
        }
    };
    // sample the initial state
    let mut s = sample_distribution(spec.mu, rng);
    match classify(s)? {
        Class::Undecided => {}
        c => return Ok(Some((c, 0, s))),
    }
    for step in 1..=horizon {
        let row = spec.chain.successors(s)?;
        s = sample_distribution(&row, rng);
        match classify(s)? {
            Class::Undecided => {}
            c => return Ok(Some((c, step, s))),
        }
    }
    Ok(None)
}

fn sample_distribution(dist: &SparseDistribution, rng: &mut ChaCha8Rng) -> StateId {
    let r: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (s, p) in dist.entries() {
        acc += p.to_f64();
        if r < acc {
            return *s;
        }
    }
    dist.entries().last().expect("nonempty distribution").0
}

/// Aggregated counts of decided paths per step, plus per-component yes
/// attributions, mergeable across workers.
#[derive(Clone)]
struct Tally {
    yes_at: Vec<u64>,
    no_at: Vec<u64>,
    component_yes: Vec<u64>,
}

impl Tally {
    fn new(horizon: usize, components: usize) -> Self {
        Tally {
            yes_at: vec![0; horizon + 1],
            no_at: vec![0; horizon + 1],
            component_yes: vec![0; components],
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.yes_at.iter_mut().zip(&other.yes_at) {
            *a += b;
        }
        for (a, b) in self.no_at.iter_mut().zip(&other.no_at) {
            *a += b;
        }
        for (a, b) in self.component_yes.iter_mut().zip(&other.component_yes) {
            *a += b;
        }
    }

}

/// Generic seeded path runner: `simulate_one` plays one path against its
/// own RNG stream (derived from the seed and the path index) up to the
/// horizon and reports how it was absorbed, at which step, and into which
/// named component. Integer tallies merge deterministically, so results are
/// bitwise reproducible for a fixed seed regardless of the thread count.
pub fn run_sampled_paths<F>(
    simulate_one: F,
    components: usize,
    cfg: &MonteCarloConfig,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
    component_names: Vec<String>,
) -> Result<ApproxResult>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<Option<(Class, usize, Option<usize>)>> + Send + Sync,
{
    let horizon = params.budget;
    let n = cfg.samples;
    let workers = cfg.threads.min(n.max(1));
    let simulate_one = &simulate_one;
    let tally = std::thread::scope(|scope| -> Result<Tally> {
        let mut handles = Vec::new();
        for w in 0..workers {
            let lo = w * n / workers;
            let hi = (w + 1) * n / workers;
            let seed = cfg.seed;
            handles.push(scope.spawn(move || -> Result<Tally> {
                let mut local = Tally::new(horizon, components);
                for path in lo..hi {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(path as u64 + 1);
                    if let Some((class, step, component)) = simulate_one(&mut rng, horizon)? {
                        match class {
                            Class::Yes => {
                                local.yes_at[step] += 1;
                                if let Some(c) = component {
                                    local.component_yes[c] += 1;
                                }
                            }
                            Class::No => local.no_at[step] += 1,
                            Class::Undecided => {}
                        }
                    }
                }
                Ok(local)
            }));
        }
        let mut total = Tally::new(horizon, components);
        for h in handles {
            total.merge(&h.join().expect("worker panicked")?);
        }
        Ok(total)
    })?;
    Ok(summarize_tally(
        &tally,
        n,
        cfg,
        params,
        evidence,
        component_names.into_iter(),
    ))
}

fn run_monte_carlo(
    spec: &SchemeSpec<'_>,
    cfg: &MonteCarloConfig,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
) -> Result<ApproxResult> {
    let names: Vec<String> = spec.attribution.iter().map(|(n, _)| n.clone()).collect();
    run_sampled_paths(
        |rng, horizon| {
            let record = simulate_chain_path(
                spec,
                (spec.target, spec.avoid, spec.constraint),
                rng,
                horizon,
            )?;
            match record {
                Some((class, step, state)) => {
                    let mut component = None;
                    if class == Class::Yes {
                        for (i, (_, states)) in spec.attribution.iter().enumerate() {
                            if states.contains(state)? {
                                component = Some(i);
                                break;
                            }
                        }
                    }
                    Ok(Some((class, step, component)))
                }
                None => Ok(None),
            }
        },
        spec.attribution.len(),
        cfg,
        params,
        evidence,
        names,
    )
}

fn summarize_tally(
    tally: &Tally,
    n: usize,
    cfg: &MonteCarloConfig,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
    component_names: impl Iterator<Item = String>,
) -> ApproxResult {
    let h = cfg.half_width();
    let horizon = tally.yes_at.len() - 1;
    let mut yes_cum = 0u64;
    let mut no_cum = 0u64;
    let mut chosen: Option<(usize, ApproxStatus, u64, u64)> = None;
    let mut undecided_history: Vec<u64> = Vec::with_capacity(horizon + 1);
    for step in 0..=horizon {
        yes_cum += tally.yes_at[step];
        no_cum += tally.no_at[step];
        let undecided = n as u64 - yes_cum - no_cum;
        undecided_history.push(undecided);
        let gap = undecided as f64 / n as f64;
        if gap + 2.0 * h < params.eps {
            chosen = Some((
                step,
                ApproxStatus::Converged { eps: params.eps },
                yes_cum,
                no_cum,
            ));
            break;
        }
        if step >= params.stall_window
            && undecided_history[step - params.stall_window] == undecided
        {
            chosen = Some((
                step,
                ApproxStatus::Stalled {
                    residual_gap: gap + 2.0 * h,
                },
                yes_cum,
                no_cum,
            ));
            break;
        }
    }
    let (iterations, status, yes, no) = chosen.unwrap_or_else(|| {
        let gap = (n as u64 - yes_cum - no_cum) as f64 / n as f64;
        (
            horizon,
            ApproxStatus::BudgetExhausted {
                residual_gap: gap + 2.0 * h,
            },
            yes_cum,
            no_cum,
        )
    });
    let p_yes = yes as f64 / n as f64;
    let p_no = no as f64 / n as f64;
    let lo = (p_yes - h).max(0.0);
    let hi = (1.0 - p_no + h).min(1.0);
    ApproxResult {
        lo: Prob::approx(lo),
        hi: Prob::approx(hi),
        iterations,
        status,
        evidence: evidence.clone(),
        tainted: evidence.is_assumed(),
        sampling: Some(SamplingInfo {
            samples: n,
            confidence: cfg.confidence,
            seed: cfg.seed,
            half_width: h,
        }),
        breakdown: component_names
            .zip(&tally.component_yes)
            .map(|(name, &c)| (name, Prob::approx(c as f64 / n as f64)))
            .collect(),
    }
}

fn run_scheme(
    spec: &SchemeSpec<'_>,
    estimator: &ProbabilityEstimator,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
) -> Result<ApproxResult> {
    match estimator {
        ProbabilityEstimator::Exact => run_exact(spec, params, evidence),
        ProbabilityEstimator::MonteCarlo(cfg) => run_monte_carlo(spec, cfg, params, evidence),
    }
}

/// Approximate P_μ(F B) by the adjacent sequences
/// p_n^yes = P(F^{≤n} B) and p_n^no = P(¬B U^{≤n} B̃). Under decisiveness
/// evidence the returned interval brackets the reachability probability;
/// without it the residual gap lower-bounds the decisiveness defect.
pub fn approx_reach(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    b: &StateSet,
    btilde: &AvoidSet,
    estimator: &ProbabilityEstimator,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
) -> Result<ApproxResult> {
    let spec = SchemeSpec {
        chain,
        mu,
        target: b,
        avoid: btilde,
        constraint: None,
        attribution: &[],
    };
    run_scheme(&spec, estimator, params, evidence)
}

/// Approximate P_μ(B' U B) with the until-adapted sequences: leaving B'
/// outside B absorbs negatively, exactly like reaching the avoid-set.
pub fn approx_until(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    bprime: &StateSet,
    b: &StateSet,
    btilde: &AvoidSet,
    estimator: &ProbabilityEstimator,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
) -> Result<ApproxResult> {
    let spec = SchemeSpec {
        chain,
        mu,
        target: b,
        avoid: btilde,
        constraint: Some(bprime),
        attribution: &[],
    };
    run_scheme(&spec, estimator, params, evidence)
}

/// Approximate P_μ(G F B) by q_n^yes = P(F^{≤n} B̃̃) and
/// q_n^no = P(F^{≤n} B̃). Sound under persistent decisiveness w.r.t. B and
/// decisiveness w.r.t. B̃; with merely `Assumed` evidence the result is
/// tainted and may diverge from the true value.
pub fn approx_repeated(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    btilde: &AvoidSet,
    btilde_tilde: &AvoidSet,
    estimator: &ProbabilityEstimator,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
) -> Result<ApproxResult> {
    let spec = SchemeSpec {
        chain,
        mu,
        target: btilde_tilde.set(),
        avoid: btilde,
        constraint: None,
        attribution: &[],
    };
    run_scheme(&spec, estimator, params, evidence)
}

/// ω-regular probability of a product chain with a (verified) finite
/// attractor: classify the good bottom components of the attractor graph
/// and approximate the reachability of their union, reporting a per-
/// component breakdown.
pub fn quant_omega_attractor(
    product: &crate::omega::ProductChain,
    mu_pair: &SparseDistribution,
    attractor_vertices: &BTreeSet<StateId>,
    bound: Option<usize>,
    estimator: &ProbabilityEstimator,
    params: &SchemeParams,
) -> Result<ApproxResult> {
    let graph = crate::qualitative::attractor_graph(product, attractor_vertices, bound)?;
    let good = crate::qualitative::good_bsccs(&graph, product.muller_family());
    let mut union = BTreeSet::new();
    let mut attribution: Vec<(String, StateSet)> = Vec::new();
    for &i in &good {
        let states: BTreeSet<StateId> = graph.bscc_states(i).into_iter().collect();
        union.extend(states.iter().copied());
        attribution.push((format!("bscc-{i}"), StateSet::Explicit(states)));
    }
    let target = StateSet::Explicit(union);
    let chain = product.chain();
    let avoid = if chain.is_finite() {
        avoid_set(chain, &target)?
    } else {
        let depth = bound.ok_or_else(|| {
            Error::CertificateRequired("lazy product needs an exploration bound".into())
        })?;
        avoid_set_bounded(chain, &target, depth)?
    };
    let evidence = DecisivenessEvidence::FiniteAttractor {
        description: format!("{} attractor vertices in the product", attractor_vertices.len()),
    };
    let spec = SchemeSpec {
        chain,
        mu: mu_pair,
        target: &target,
        avoid: &avoid,
        constraint: None,
        attribution: &attribution,
    };
    run_scheme(&spec, estimator, params, &evidence)
}

/// Good-component analysis of a finite abstract product: the union of the
/// good bottom components, their avoid-set in the abstract product, and a
/// per-component split. Consumed by the abstraction pipelines, which pull
/// these sets back through the α-map.
pub struct OmegaAbstractTargets {
    pub good_union: BTreeSet<StateId>,
    pub avoid: BTreeSet<StateId>,
    pub per_component: Vec<(String, BTreeSet<StateId>)>,
}

pub fn omega_abstract_targets(
    abstract_product: &crate::omega::ProductChain,
    attractor_vertices: &BTreeSet<StateId>,
) -> Result<OmegaAbstractTargets> {
    let graph = crate::qualitative::attractor_graph(abstract_product, attractor_vertices, None)?;
    let good = crate::qualitative::good_bsccs(&graph, abstract_product.muller_family());
    let mut good_union = BTreeSet::new();
    let mut per_component = Vec::new();
    for &i in &good {
        let states: BTreeSet<StateId> = graph.bscc_states(i).into_iter().collect();
        good_union.extend(states.iter().copied());
        per_component.push((format!("bscc-{i}"), states));
    }
    let avoid = avoid_set(
        abstract_product.chain(),
        &StateSet::Explicit(good_union.clone()),
    )?;
    let avoid_states = avoid
        .set()
        .as_explicit()
        .expect("finite avoid-set is explicit")
        .clone();
    Ok(OmegaAbstractTargets {
        good_union,
        avoid: avoid_states,
        per_component,
    })
}

/// ω-regular probability of a concrete chain through a certified-sound
/// abstraction with a finite attractor: good components are classified in
/// the finite abstract product, and the reachability of their α-preimage is
/// approximated directly in the concrete product. The avoid-set used by the
/// scheme is the preimage of the abstract avoid-set, which equals the
/// concrete avoid-set for α-closed targets.
#[allow(clippy::too_many_arguments)]
pub fn quant_omega_abstraction(
    handle: &crate::abstraction::AbstractionHandle,
    mu: &SparseDistribution,
    dma: &crate::omega::MullerAutomaton,
    abstract_attractor: &BTreeSet<StateId>,
    bound: Option<usize>,
    estimator: &ProbabilityEstimator,
    params: &SchemeParams,
) -> Result<ApproxResult> {
    if !handle.is_certified_sound() {
        return Err(Error::HypothesisViolated(format!(
            "handle {:?} lacks certified soundness; refuse the abstraction pipeline",
            handle.name
        )));
    }
    let concrete_product = crate::omega::product(&handle.concrete, dma)?;
    let abstract_product = crate::omega::product(&handle.abstract_chain, dma)?;
    let alpha_m = crate::abstraction::lift_alpha_to_product(
        &handle.alpha,
        &concrete_product,
        &abstract_product,
    )?;
    // the lifted map must itself be an abstraction; re-check, never assume
    let mut lifted_handle = crate::abstraction::AbstractionHandle::new(
        concrete_product.chain().clone(),
        abstract_product.chain().clone(),
        alpha_m.clone(),
        format!("{}-product", handle.name),
    );
    if !crate::abstraction::check_abstraction(&mut lifted_handle, bound)? {
        return Err(Error::HypothesisViolated(
            "lifted product map failed the abstraction check".into(),
        ));
    }
    let vertices: BTreeSet<StateId> = abstract_attractor
        .iter()
        .flat_map(|s| {
            (0..abstract_product.q_count())
                .map(|q| abstract_product.encode(*s, q))
                .collect::<Vec<_>>()
        })
        .collect();
    let targets = omega_abstract_targets(&abstract_product, &vertices)?;
    let target = alpha_m.preimage(&StateSet::Explicit(targets.good_union.clone()), bound);
    let avoid_pre = alpha_m.preimage(&StateSet::Explicit(targets.avoid.clone()), bound);
    let avoid = AvoidSet::user_supplied(concrete_product.chain(), avoid_pre)?;
    let attribution: Vec<(String, StateSet)> = targets
        .per_component
        .iter()
        .map(|(name, states)| {
            (
                name.clone(),
                alpha_m.preimage(&StateSet::Explicit(states.clone()), bound),
            )
        })
        .collect();
    let evidence = DecisivenessEvidence::SoundAbstractionOfDecisive {
        handle: handle.name.clone(),
    };
    let mu_pair = concrete_product.lift_initial(mu)?;
    let spec = SchemeSpec {
        chain: concrete_product.chain(),
        mu: &mu_pair,
        target: &target,
        avoid: &avoid,
        constraint: None,
        attribution: &attribution,
    };
    run_scheme(&spec, estimator, params, &evidence)
}

/// A bounded interval of time points with rational-valued endpoints,
/// possibly open on either side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeInterval {
    pub lo: f64,
    pub lo_strict: bool,
    pub hi: f64,
    pub hi_strict: bool,
}

impl TimeInterval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        TimeInterval {
            lo,
            lo_strict: false,
            hi,
            hi_strict: false,
        }
    }

    pub fn left_open(lo: f64, hi: f64) -> Self {
        TimeInterval {
            lo,
            lo_strict: true,
            hi,
            hi_strict: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_strict || self.hi_strict))
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_strict { t > self.lo } else { t >= self.lo };
        let below = if self.hi_strict { t < self.hi } else { t <= self.hi };
        above && below
    }

    pub fn sup(&self) -> f64 {
        self.hi
    }
}

/// Sampled interface of a real-time system: states carry an absolute time
/// coordinate that increases along every transition.
pub struct TimedSampler<'a, St> {
    pub init: &'a (dyn Fn(&mut ChaCha8Rng) -> St + Send + Sync),
    pub step: &'a (dyn Fn(&St, &mut ChaCha8Rng) -> Result<St> + Send + Sync),
    pub time: &'a (dyn Fn(&St) -> f64 + Send + Sync),
    pub in_target_space: &'a (dyn Fn(&St) -> bool + Send + Sync),
    pub in_avoid_space: &'a (dyn Fn(&St) -> bool + Send + Sync),
}

/// Time-bounded reachability of (spatial target) × interval for an
/// almost-surely non-Zeno real-time system: once the time coordinate passes
/// `delta` > sup(interval) the target is out of reach, so {time > delta}
/// together with the spatial avoid territory acts as the avoid-set and the
/// reachability scheme converges.
pub fn time_bounded_reach<St>(
    sampler: &TimedSampler<'_, St>,
    interval: &TimeInterval,
    delta: f64,
    cfg: &MonteCarloConfig,
    params: &SchemeParams,
    evidence: &DecisivenessEvidence,
) -> Result<ApproxResult> {
    if interval.is_empty() {
        return Ok(ApproxResult {
            lo: Prob::zero(),
            hi: Prob::zero(),
            iterations: 0,
            status: ApproxStatus::Converged { eps: params.eps },
            evidence: evidence.clone(),
            tainted: evidence.is_assumed(),
            sampling: None,
            breakdown: vec![],
        });
    }
    if delta <= interval.sup() {
        return Err(Error::HypothesisViolated(format!(
            "delta {delta} must exceed the interval supremum {}",
            interval.sup()
        )));
    }
    run_sampled_paths(
        |rng, horizon| {
            let mut st = (sampler.init)(rng);
            let classify = |st: &St| {
                let t = (sampler.time)(st);
                if (sampler.in_target_space)(st) && interval.contains(t) {
                    Class::Yes
                } else if t > delta || (sampler.in_avoid_space)(st) {
                    Class::No
                } else {
                    Class::Undecided
                }
            };
            match classify(&st) {
                Class::Undecided => {}
                c => return Ok(Some((c, 0, None))),
            }
            for step in 1..=horizon {
                st = (sampler.step)(&st, rng)?;
                match classify(&st) {
                    Class::Undecided => {}
                    c => return Ok(Some((c, step, None))),
                }
            }
            Ok(None)
        },
        0,
        cfg,
        params,
        evidence,
        vec![],
    )
}

/// Exact value of a bounded step-window reachability on a discrete chain
/// with its step counter as the time coordinate (the degenerate real-time
/// case where time advances by one per transition).
pub fn discrete_time_bounded(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    b: &StateSet,
    window: u32,
) -> Result<Prob> {
    let sets = vec![b.clone()];
    let phi = crate::formula::PathFormula::eventually(
        crate::formula::PathFormula::set(0),
        crate::formula::Bound::AtMost(window),
    );
    crate::formula::bounded_event_probability(chain, mu, &phi, &sets, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::solve;

    fn exact() -> ProbabilityEstimator {
        ProbabilityEstimator::Exact
    }

    #[test]
    fn gamblers_ruin_converges() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        let b = StateSet::explicit([StateId(0)]);
        let btilde = AvoidSet::user_supplied(&walk, StateSet::empty()).unwrap();
        let result = approx_reach(
            &walk,
            &SparseDistribution::dirac(StateId(1)),
            &b,
            &btilde,
            &exact(),
            &SchemeParams::with_eps(1e-3),
            &DecisivenessEvidence::FiniteAttractor {
                description: "downward-drifting walk attracted to {0}".into(),
            },
        )
        .unwrap();
        assert!(matches!(result.status, ApproxStatus::Converged { .. }));
        assert!(result.contains(1.0));
        assert!(result.width() < 1e-3);
        assert!(result.lo.is_exact());
    }

    #[test]
    fn diverging_walk_stalls() {
        let walk = families::random_walk(Prob::from_ratio(2, 3));
        let b = StateSet::explicit([StateId(0)]);
        let btilde = AvoidSet::user_supplied(&walk, StateSet::empty()).unwrap();
        let result = approx_reach(
            &walk,
            &SparseDistribution::dirac(StateId(1)),
            &b,
            &btilde,
            &exact(),
            &SchemeParams::with_eps(1e-3),
            &DecisivenessEvidence::Assumed {
                note: "no decisiveness holds for the upward-drifting walk".into(),
            },
        )
        .unwrap();
        match result.status {
            ApproxStatus::Stalled { residual_gap } => {
                assert!(residual_gap > 0.5 - 1e-3, "gap {residual_gap}")
            }
            other => panic!("expected stall, got {other:?}"),
        }
        // p_yes converges to the escape probability (1−p)/p = 1/2
        let lo = result.lo.to_f64();
        assert!((lo - 0.5).abs() < 1e-3, "lo {lo}");
        assert!(result.tainted);
    }

    #[test]
    fn support_inside_target_converges_immediately() {
        let walk = families::random_walk(Prob::from_ratio(1, 2));
        let b = StateSet::explicit([StateId(4)]);
        let btilde = AvoidSet::user_supplied(&walk, StateSet::empty()).unwrap();
        let result = approx_reach(
            &walk,
            &SparseDistribution::dirac(StateId(4)),
            &b,
            &btilde,
            &exact(),
            &SchemeParams::with_eps(1e-9),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(result.iterations, 0);
        assert!(result.lo.is_one() && result.hi.is_one());
    }

    #[test]
    fn until_scheme_matches_exact_solve() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 3), 12).unwrap();
        let mu = SparseDistribution::dirac(StateId(1));
        let bprime = StateSet::explicit([StateId(1), StateId(2)]);
        let b = StateSet::explicit([StateId(0)]);
        let btilde = avoid_set(&chain, &b).unwrap();
        let result = approx_until(
            &chain,
            &mu,
            &bprime,
            &b,
            &btilde,
            &exact(),
            &SchemeParams::with_eps(1e-9),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        let oracle = solve::until_value(&chain, &mu, &bprime, &b).unwrap();
        assert_eq!(oracle, Prob::from_ratio(6, 7));
        assert!(result.lo <= oracle && oracle <= result.hi);
        assert!(result.width() < 1e-9);
    }

    #[test]
    fn until_with_trivial_constraint_equals_reach() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 2), 8).unwrap();
        let mu = SparseDistribution::dirac(StateId(3));
        let b = StateSet::explicit([StateId(0)]);
        let btilde = avoid_set(&chain, &b).unwrap();
        let params = SchemeParams::with_eps(1e-9);
        let r1 = approx_reach(
            &chain,
            &mu,
            &b,
            &btilde,
            &exact(),
            &params,
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        let r2 = approx_until(
            &chain,
            &mu,
            &StateSet::full(),
            &b,
            &btilde,
            &exact(),
            &params,
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(r1.lo, r2.lo);
        assert_eq!(r1.hi, r2.hi);
    }

    #[test]
    fn until_disjoint_start_is_zero() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 2), 8).unwrap();
        let mu = SparseDistribution::dirac(StateId(5));
        let b = StateSet::explicit([StateId(0)]);
        let btilde = avoid_set(&chain, &b).unwrap();
        let result = approx_until(
            &chain,
            &mu,
            &StateSet::explicit([StateId(1)]),
            &b,
            &btilde,
            &exact(),
            &SchemeParams::with_eps(1e-9),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert!(result.lo.is_zero() && result.hi.is_zero());
    }

    #[test]
    fn repeated_reach_on_quotient_chain() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 2)).unwrap();
        let b = StateSet::explicit([StateId(0)]);
        let btilde = avoid_set(&chain, &b).unwrap();
        let btt = crate::qualitative::double_avoid_set(&chain, &b).unwrap();
        let result = approx_repeated(
            &chain,
            &SparseDistribution::dirac(StateId(1)),
            &btilde,
            &btt,
            &exact(),
            &SchemeParams::with_eps(1e-6),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert!(result.contains(1.0));
        assert!(result.width() < 1e-6);
    }

    #[test]
    fn repeated_reach_two_absorbing() {
        let chain = MarkovChain::finite(
            vec!["c".into(), "a".into(), "b".into()],
            vec![
                SparseDistribution::uniform(&[StateId(1), StateId(2)]).unwrap(),
                SparseDistribution::dirac(StateId(1)),
                SparseDistribution::dirac(StateId(2)),
            ],
            vec![],
            vec![Default::default(); 3],
        )
        .unwrap();
        let b = StateSet::explicit([StateId(1)]);
        let btilde = avoid_set(&chain, &b).unwrap();
        let btt = crate::qualitative::double_avoid_set(&chain, &b).unwrap();
        let result = approx_repeated(
            &chain,
            &SparseDistribution::dirac(StateId(0)),
            &btilde,
            &btt,
            &exact(),
            &SchemeParams::with_eps(1e-9),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert!(result.contains(0.5));
        assert!(result.width() < 1e-9);
        let oracle = solve::repeated_reach_value(
            &chain,
            &SparseDistribution::dirac(StateId(0)),
            &b,
        )
        .unwrap();
        assert_eq!(oracle, Prob::from_ratio(1, 2));
    }

    #[test]
    fn assumed_evidence_taints_and_diverges() {
        // the escaping ray: the scheme believes P(GF hub)=1 while the truth
        // is 0; only the Assumed taint warns the caller
        let ray = families::escaping_ray();
        let hub = StateSet::explicit([StateId(0)]);
        let btilde = AvoidSet::user_supplied(&ray, StateSet::empty()).unwrap();
        let btt = AvoidSet::user_supplied(&ray, StateSet::full()).unwrap();
        let _ = hub;
        let result = approx_repeated(
            &ray,
            &SparseDistribution::dirac(StateId(0)),
            &btilde,
            &btt,
            &exact(),
            &SchemeParams::with_eps(1e-6),
            &DecisivenessEvidence::Assumed {
                note: "no persistent decisiveness: hub-return probabilities vanish".into(),
            },
        )
        .unwrap();
        assert!(result.tainted);
        assert!(result.lo.is_one());
        // oracle: P(GF hub) = 0 because the per-cycle return probability is
        // 1 − Π(1 − 3^{-n}) < 1
        let never = families::escaping_ray_never_return(1e-12).to_f64();
        assert!(never > 0.0);
    }

    #[test]
    fn monte_carlo_brackets_known_value() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 3), 30).unwrap();
        let b = StateSet::explicit([StateId(0)]);
        let btilde = avoid_set(&chain, &b).unwrap();
        let cfg = MonteCarloConfig::new(4000, 0.99, 7);
        let result = approx_reach(
            &chain,
            &SparseDistribution::dirac(StateId(1)),
            &b,
            &btilde,
            &ProbabilityEstimator::MonteCarlo(cfg),
            &SchemeParams::with_eps(0.2).budget(2000),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert!(result.contains(1.0));
        assert!(result.sampling.is_some());
    }

    #[test]
    fn monte_carlo_reproducible_across_threads() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 2), 20).unwrap();
        let b = StateSet::explicit([StateId(0)]);
        let btilde = avoid_set(&chain, &b).unwrap();
        let run = |threads: usize| {
            let cfg = MonteCarloConfig::new(2000, 0.95, 42).threads(threads);
            approx_reach(
                &chain,
                &SparseDistribution::dirac(StateId(5)),
                &b,
                &btilde,
                &ProbabilityEstimator::MonteCarlo(cfg),
                &SchemeParams::with_eps(0.3).budget(3000),
                &DecisivenessEvidence::FiniteChain,
            )
            .unwrap()
        };
        let a = run(1);
        let b2 = run(4);
        assert_eq!(format!("{:?}", a.lo), format!("{:?}", b2.lo));
        assert_eq!(format!("{:?}", a.hi), format!("{:?}", b2.hi));
        assert_eq!(a.iterations, b2.iterations);
    }

    #[test]
    fn budget_monotonicity() {
        let walk = families::random_walk(Prob::from_ratio(2, 3));
        let b = StateSet::explicit([StateId(0)]);
        let btilde = AvoidSet::user_supplied(&walk, StateSet::empty()).unwrap();
        let run = |budget: usize| {
            approx_reach(
                &walk,
                &SparseDistribution::dirac(StateId(1)),
                &b,
                &btilde,
                &exact(),
                &SchemeParams {
                    eps: 1e-9,
                    budget,
                    stall_window: usize::MAX,
                    stall_tolerance: 0.0,
                },
                &DecisivenessEvidence::Assumed { note: "test".into() },
            )
            .unwrap()
        };
        let small = run(50);
        let big = run(100);
        assert!(big.lo >= small.lo);
        assert!(big.hi <= small.hi);
    }

    #[test]
    fn omega_pipeline_matches_exact_muller() {
        use crate::omega::{muller_probability_exact, product, Completion, MullerAutomaton};
        let chain = families::truncated_walk(Prob::from_ratio(1, 3), 25).unwrap();
        let dma = MullerAutomaton::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            "q0",
            vec!["a".into()],
            vec![
                ("q0".into(), crate::chain::LabelSet::singleton(0), "q1".into()),
                ("q1".into(), crate::chain::LabelSet::singleton(0), "q2".into()),
                ("q2".into(), crate::chain::LabelSet::singleton(0), "q1".into()),
            ],
            vec![vec!["q1".into(), "q2".into()]],
            Completion::AddSink,
        )
        .unwrap();
        let prod = product(&chain, &dma).unwrap();
        let mu = prod
            .lift_initial(&SparseDistribution::dirac(StateId(0)))
            .unwrap();
        let vertices: BTreeSet<StateId> = prod.chain().states().unwrap().into_iter().collect();
        let result = quant_omega_attractor(
            &prod,
            &mu,
            &vertices,
            None,
            &exact(),
            &SchemeParams::with_eps(1e-6),
        )
        .unwrap();
        let oracle = muller_probability_exact(&prod, &mu).unwrap();
        assert!(oracle.is_one());
        assert!(result.contains(1.0));
        assert!(result.width() < 1e-6);
        assert!(!result.breakdown.is_empty());
    }

    #[test]
    fn abstraction_pipeline_on_walk() {
        use crate::abstraction::{
            check_abstraction, certify_sound_via_decisiveness, AbstractionHandle, AlphaMap,
            SoundnessEvidence,
        };
        use crate::omega::{Completion, MullerAutomaton};
        let dma = MullerAutomaton::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            "q0",
            vec!["a".into()],
            vec![
                ("q0".into(), crate::chain::LabelSet::singleton(0), "q1".into()),
                ("q1".into(), crate::chain::LabelSet::singleton(0), "q2".into()),
                ("q2".into(), crate::chain::LabelSet::singleton(0), "q1".into()),
            ],
            vec![vec!["q1".into(), "q2".into()]],
            Completion::AddSink,
        )
        .unwrap();
        let mut handle = AbstractionHandle::new(
            families::random_walk(Prob::from_ratio(1, 3)),
            families::three_state_quotient(Prob::from_ratio(1, 3)).unwrap(),
            AlphaMap::walk_quotient(12),
            "walk-to-quotient",
        );
        // refusal before soundness certification
        let refused = quant_omega_abstraction(
            &handle,
            &SparseDistribution::dirac(StateId(0)),
            &dma,
            &BTreeSet::from([StateId(0), StateId(1)]),
            Some(16),
            &exact(),
            &SchemeParams::with_eps(1e-3),
        );
        assert!(refused.is_err());

        check_abstraction(&mut handle, Some(12)).unwrap();
        certify_sound_via_decisiveness(
            &mut handle,
            &SoundnessEvidence::FiberUniformBounds {
                abstract_attractor: BTreeSet::from([StateId(0), StateId(1)]),
                attractor_justification: "downward drift".into(),
                step_bound: 2,
                prob_floor: 0.3,
                catalogue: vec![
                    StateSet::explicit([StateId(0)]),
                    StateSet::explicit([StateId(1)]),
                    StateSet::explicit([StateId(2)]),
                ],
                search_bound: 8,
            },
        )
        .unwrap();
        let result = quant_omega_abstraction(
            &handle,
            &SparseDistribution::dirac(StateId(0)),
            &dma,
            &BTreeSet::from([StateId(0), StateId(1)]),
            Some(16),
            &exact(),
            &SchemeParams::with_eps(1e-3).budget(5000),
        )
        .unwrap();
        assert!(matches!(result.status, ApproxStatus::Converged { .. }));
        assert!(result.contains(1.0));
        assert!(!result.tainted);
    }

    #[test]
    fn identity_abstraction_agrees_with_attractor_route() {
        use crate::abstraction::{
            check_abstraction, certify_sound_via_decisiveness, AbstractionHandle, AlphaMap,
            SoundnessEvidence,
        };
        use crate::omega::{product, Completion, MullerAutomaton};
        let chain = families::truncated_walk(Prob::from_ratio(1, 3), 15).unwrap();
        let dma = MullerAutomaton::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            "q0",
            vec!["a".into()],
            vec![
                ("q0".into(), crate::chain::LabelSet::singleton(0), "q1".into()),
                ("q1".into(), crate::chain::LabelSet::singleton(0), "q2".into()),
                ("q2".into(), crate::chain::LabelSet::singleton(0), "q1".into()),
            ],
            vec![vec!["q1".into(), "q2".into()]],
            Completion::AddSink,
        )
        .unwrap();
        let mut handle = AbstractionHandle::new(
            chain.clone(),
            chain.clone(),
            AlphaMap::identity(),
            "identity",
        );
        check_abstraction(&mut handle, None).unwrap();
        certify_sound_via_decisiveness(&mut handle, &SoundnessEvidence::ConcreteFinite).unwrap();
        let attractor: BTreeSet<StateId> = chain.states().unwrap().into_iter().collect();
        let mu = SparseDistribution::dirac(StateId(0));
        let via_abstraction = quant_omega_abstraction(
            &handle,
            &mu,
            &dma,
            &attractor,
            None,
            &exact(),
            &SchemeParams::with_eps(1e-6),
        )
        .unwrap();
        let prod = product(&chain, &dma).unwrap();
        let vertices: BTreeSet<StateId> = prod.chain().states().unwrap().into_iter().collect();
        let via_attractor = quant_omega_attractor(
            &prod,
            &prod.lift_initial(&mu).unwrap(),
            &vertices,
            None,
            &exact(),
            &SchemeParams::with_eps(1e-6),
        )
        .unwrap();
        assert!((via_abstraction.lo.to_f64() - via_attractor.lo.to_f64()).abs() < 1e-6);
        assert!((via_abstraction.hi.to_f64() - via_attractor.hi.to_f64()).abs() < 1e-6);
    }

    #[test]
    fn discrete_window_equals_bounded_formula() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 3), 10).unwrap();
        let mu = SparseDistribution::dirac(StateId(2));
        let b = StateSet::explicit([StateId(0)]);
        let direct = discrete_time_bounded(&chain, &mu, &b, 6).unwrap();
        let phi = crate::formula::PathFormula::eventually(
            crate::formula::PathFormula::set(0),
            crate::formula::Bound::AtMost(6),
        );
        let via_formula = crate::formula::bounded_event_probability(
            &chain,
            &mu,
            &phi,
            &[b.clone()],
            6,
        )
        .unwrap();
        assert_eq!(direct, via_formula);
    }
}
