//! End-to-end analyses of stochastic timed automata: almost-sure ω-regular
//! verdicts and interval approximations through the thick-graph
//! abstraction, plus time-bounded reachability for non-Zeno automata.
//!
//! Every pipeline starts by classifying the automaton; the General class is
//! refused because its thick graph can be an unsound abstraction (the
//! two-clock convergent fixture is the canonical example).

use super::sim::sample_step;
use super::thick::{oneclock_terminal_nodes, thick_graph, ThickGraph};
use super::{classify, Configuration, StaClass, StaModel};
use crate::chain::StateId;
use crate::error::{Error, Result};
use crate::omega::{product, MullerAutomaton, ProductChain};
use crate::prob::Prob;
use crate::quantitative::{
    omega_abstract_targets, run_sampled_paths, time_bounded_reach, ApproxResult, ApproxStatus,
    Class, MonteCarloConfig, SchemeParams, TimeInterval, TimedSampler,
};
use crate::qualitative::{almost_sure_omega, DecisivenessEvidence};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// A set of thick-graph nodes together with the structural argument that
/// makes it an attractor of the underlying automaton.
pub struct CertifiedAttractor {
    pub nodes: BTreeSet<StateId>,
    pub justification: String,
}

/// The memoryless-region attractor of a reactive automaton.
pub fn memoryless_attractor(sta: &StaModel, graph: &ThickGraph) -> Result<CertifiedAttractor> {
    match classify(sta) {
        StaClass::Reactive => Ok(CertifiedAttractor {
            nodes: graph.memoryless_nodes(),
            justification:
                "reactive automaton: a delay beyond the maximal constant has probability \
                 bounded from below at every configuration, so memoryless regions recur"
                    .into(),
        }),
        other => Err(Error::HypothesisViolated(format!(
            "memoryless-region attractor needs the reactive class, got {other:?}"
        ))),
    }
}

/// The reset/terminal-region attractor of a single-clock automaton.
pub fn oneclock_attractor(sta: &StaModel, graph: &ThickGraph) -> Result<CertifiedAttractor> {
    match classify(sta) {
        StaClass::OneClock => Ok(CertifiedAttractor {
            nodes: oneclock_terminal_nodes(graph)?,
            justification:
                "single-clock automaton: runs either reset infinitely often (reaching the \
                 zero region) or settle into a final region whose descendants never leave it"
                    .into(),
        }),
        other => Err(Error::HypothesisViolated(format!(
            "single-clock attractor needs the one-clock class, got {other:?}"
        ))),
    }
}

/// Prepared analysis context: classification, thick graph and the class
/// attractor, with the soundness argument recorded.
pub struct StaAnalysis {
    pub class: StaClass,
    pub graph: ThickGraph,
    pub attractor: CertifiedAttractor,
    pub soundness_note: String,
}

pub fn prepare(sta: &StaModel) -> Result<StaAnalysis> {
    let class = classify(sta);
    let graph = thick_graph(sta)?;
    let (attractor, soundness_note) = match &class {
        StaClass::Reactive => (
            memoryless_attractor(sta, &graph)?,
            "thick graph sound for the reactive class: the memoryless-region attractor \
             transfers and fiber-uniform step bounds hold from memoryless regions"
                .to_string(),
        ),
        StaClass::OneClock => (
            oneclock_attractor(sta, &graph)?,
            "thick graph sound for the single-clock class: the reset/terminal-region \
             attractor transfers and the automaton ultimately behaves like a finite chain"
                .to_string(),
        ),
        StaClass::General { reason } => {
            return Err(Error::HypothesisViolated(format!(
                "thick graph unsound: automaton class General ({reason}); refusing analysis"
            )))
        }
    };
    Ok(StaAnalysis {
        class,
        graph,
        attractor,
        soundness_note,
    })
}

#[derive(Debug, Serialize)]
pub struct StaQualitativeReport {
    pub satisfied: bool,
    pub class: String,
    pub evidence: Vec<String>,
}

fn attractor_pair_vertices(
    product: &ProductChain,
    attractor: &BTreeSet<StateId>,
) -> BTreeSet<StateId> {
    attractor
        .iter()
        .flat_map(|s| {
            (0..product.q_count())
                .map(|q| product.encode(*s, q))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Decide almost-sure satisfaction of a Muller property: the abstract
/// product of the thick graph is analysed through its attractor graph, and
/// the verdict transfers by the class soundness theorem.
pub fn sta_check_qualitative(
    sta: &StaModel,
    dma: &MullerAutomaton,
) -> Result<StaQualitativeReport> {
    let analysis = prepare(sta)?;
    let prod = product(&analysis.graph.chain, dma)?;
    let initial_node = analysis
        .graph
        .node_of_configuration(&sta.initial)
        .ok_or_else(|| Error::UnknownState("initial configuration".into()))?;
    let mu = prod.lift_initial(&crate::chain::SparseDistribution::dirac(initial_node))?;
    let vertices = attractor_pair_vertices(&prod, &analysis.attractor.nodes);
    let satisfied = almost_sure_omega(&prod, &mu, &vertices, None)?;
    Ok(StaQualitativeReport {
        satisfied,
        class: format!("{:?}", analysis.class),
        evidence: vec![
            analysis.attractor.justification.clone(),
            analysis.soundness_note.clone(),
            "almost-sure transfer: the property holds almost surely in the automaton iff \
             it does in the abstraction"
                .into(),
        ],
    })
}

/// A finite mixture of configuration atoms, the initial distributions the
/// quantitative pipelines accept.
pub type InitMixture = [(Configuration, f64)];

fn sample_mixture(init: &InitMixture, rng: &mut ChaCha8Rng) -> Configuration {
    if init.len() == 1 {
        return init[0].0.clone();
    }
    let total: f64 = init.iter().map(|(_, w)| *w).sum();
    let mut u = rng.gen::<f64>() * total;
    for (c, w) in init {
        if u < *w {
            return c.clone();
        }
        u -= *w;
    }
    init.last().expect("nonempty mixture").0.clone()
}

/// Approximate the probability of a Muller property: good components are
/// classified in the finite abstract product and the reachability of their
/// preimage is estimated by simulating the automaton, with the Hoeffding
/// half-width folded into the interval.
pub fn sta_approx_quantitative(
    sta: &StaModel,
    init: &InitMixture,
    dma: &MullerAutomaton,
    cfg: &MonteCarloConfig,
    params: &SchemeParams,
) -> Result<ApproxResult> {
    if init.is_empty() {
        return Err(Error::HypothesisViolated("empty initial mixture".into()));
    }
    let analysis = prepare(sta)?;
    let evidence = DecisivenessEvidence::SoundAbstractionOfDecisive {
        handle: format!("thick graph ({:?} class)", analysis.class),
    };
    if params.eps > 1.0 {
        return Ok(ApproxResult {
            lo: Prob::approx(0.0),
            hi: Prob::approx(1.0),
            iterations: 0,
            status: ApproxStatus::Converged { eps: params.eps },
            evidence,
            tainted: false,
            sampling: None,
            breakdown: vec![],
        });
    }
    let prod = product(&analysis.graph.chain, dma)?;
    let vertices = attractor_pair_vertices(&prod, &analysis.attractor.nodes);
    let targets = omega_abstract_targets(&prod, &vertices)?;
    let component_names: Vec<String> =
        targets.per_component.iter().map(|(n, _)| n.clone()).collect();
    let graph = &analysis.graph;
    let dma_ref = dma;
    let simulate = |rng: &mut ChaCha8Rng, horizon: usize| -> Result<Option<(Class, usize, Option<usize>)>> {
        let mut config = sample_mixture(init, rng);
        let mut q = dma_ref.initial();
        let classify_pair = |config: &Configuration, q: usize| -> Option<(Class, Option<usize>)> {
            let node = graph.node_of_configuration(config)?;
            let pair = prod.encode(node, q);
            if targets.good_union.contains(&pair) {
                let component = targets
                    .per_component
                    .iter()
                    .position(|(_, states)| states.contains(&pair));
                Some((Class::Yes, component))
            } else if targets.avoid.contains(&pair) {
                Some((Class::No, None))
            } else {
                Some((Class::Undecided, None))
            }
        };
        if let Some((class, component)) = classify_pair(&config, q) {
            if class != Class::Undecided {
                return Ok(Some((class, 0, component)));
            }
        }
        for step in 1..=horizon {
            let label = sta.label_set(config.location);
            q = dma_ref.step(q, label);
            match sample_step(sta, &config, rng) {
                Ok((next, _)) => config = next,
                // paths wedged below float resolution stay undecided; the
                // thick graph already proved every reachable region
                // deadlock-free, so a runtime deadlock is the same
                // measure-zero rounding artifact
                Err(Error::ResolutionExhausted(_)) | Err(Error::DeadlockedConfiguration) => {
                    return Ok(None)
                }
                Err(e) => return Err(e),
            }
            if let Some((class, component)) = classify_pair(&config, q) {
                if class != Class::Undecided {
                    return Ok(Some((class, step, component)));
                }
            }
        }
        Ok(None)
    };
    run_sampled_paths(
        simulate,
        targets.per_component.len(),
        cfg,
        params,
        &evidence,
        component_names,
    )
}

/// How non-Zenoness (time divergence) is justified.
pub enum NonZenoEvidence {
    /// Reactive automata are almost surely non-Zeno.
    AutoReactive,
    /// Declared by the caller; the result is tainted accordingly.
    Declared(String),
}

/// Time-bounded reachability P(F (B_locations × I)): runs the reachability
/// scheme with the time attractor {t > Δ}, Δ = sup I + 1, as avoid
/// territory. Requires non-Zenoness: automatic for the reactive class,
/// declared otherwise.
pub fn sta_time_bounded(
    sta: &StaModel,
    init: &InitMixture,
    target_locations: &BTreeSet<usize>,
    interval: &TimeInterval,
    non_zeno: &NonZenoEvidence,
    cfg: &MonteCarloConfig,
    params: &SchemeParams,
) -> Result<ApproxResult> {
    if init.is_empty() {
        return Err(Error::HypothesisViolated("empty initial mixture".into()));
    }
    let evidence = match non_zeno {
        NonZenoEvidence::AutoReactive => {
            if classify(sta) != StaClass::Reactive {
                return Err(Error::HypothesisViolated(
                    "automatic non-Zenoness only holds for the reactive class".into(),
                ));
            }
            DecisivenessEvidence::FiniteAttractor {
                description: format!(
                    "time attractor {{t > {}}} of the almost-surely non-Zeno automaton",
                    interval.sup() + 1.0
                ),
            }
        }
        NonZenoEvidence::Declared(note) => DecisivenessEvidence::Assumed {
            note: format!("declared non-Zeno: {note}"),
        },
    };
    let delta = interval.sup() + 1.0;
    let init_fn = |rng: &mut ChaCha8Rng| -> (Configuration, f64) {
        (sample_mixture(init, rng), 0.0)
    };
    let step_fn = |st: &(Configuration, f64), rng: &mut ChaCha8Rng| -> Result<(Configuration, f64)> {
        match sample_step(sta, &st.0, rng) {
            Ok((next, d)) => Ok((next, st.1 + d)),
            // a wedged or deadlocked path can never hit the target within
            // the window; pushing its clock past Δ classifies it negatively
            Err(Error::ResolutionExhausted(_)) | Err(Error::DeadlockedConfiguration) => {
                Ok((st.0.clone(), f64::INFINITY))
            }
            Err(e) => Err(e),
        }
    };
    let time_fn = |st: &(Configuration, f64)| st.1;
    let target_fn = |st: &(Configuration, f64)| target_locations.contains(&st.0.location);
    let avoid_fn = |_: &(Configuration, f64)| false;
    let sampler = TimedSampler {
        init: &init_fn,
        step: &step_fn,
        time: &time_fn,
        in_target_space: &target_fn,
        in_avoid_space: &avoid_fn,
    };
    time_bounded_reach(&sampler, interval, delta, cfg, params, &evidence)
}
