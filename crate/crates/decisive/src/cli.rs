//! Batch command-line front-end: load models and automata from JSON, run
//! the analyses, emit JSON/DOT/text reports.
//!
//! Exit codes: 0 on success, 2 on a refusal with diagnostic (violated
//! hypothesis, missing certificate, parse error), 3 when a scheme stopped
//! on its budget or stalled with a residual gap.

use crate::abstraction::{
    check_abstraction, soundness_witness_search, AbstractionHandle, AlphaMap,
    WitnessSearchConfig,
};
use crate::chain::{MarkovChain, SparseDistribution, StateId, StateSet};
use crate::error::{Error, Result};
use crate::model_json::{parse_init, parse_model_with_p, parse_set};
use crate::omega::{parse_dma, product, ProductChain};
use crate::prob::Prob;
use crate::qualitative::{
    attractor_graph, avoid_set, avoid_set_bounded, good_bsccs, qualitative_reachability,
    qualitative_repeated, AvoidSet, DecisivenessEvidence,
};
use crate::quantitative::{
    approx_reach, approx_repeated, approx_until, quant_omega_attractor, ApproxResult,
    ApproxStatus, MonteCarloConfig, ProbabilityEstimator, SchemeParams, TimeInterval,
};
use crate::report;
use crate::sta::pipeline::{
    sta_approx_quantitative, sta_check_qualitative, sta_time_bounded, NonZenoEvidence,
};
use crate::sta::thick::thick_graph;
use crate::sta::{parse_sta, StaModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUSAL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser)]
#[command(
    name = "decisive",
    about = "Qualitative and approximate quantitative verification of Markov chains and stochastic timed automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum OutFormat {
    Json,
    Dot,
    Text,
}

#[derive(Args, Clone)]
struct SchemeFlags {
    /// Target interval width.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Iteration budget of the scheme.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Sample count; switches the estimator to Monte Carlo.
    #[arg(long)]
    samples: Option<usize>,
    /// Confidence level of sampled intervals.
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// RNG seed (falls back to DECISIVE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sampling (falls back to DECISIVE_THREADS, then 1).
    #[arg(long)]
    threads: Option<usize>,
    /// Force exact propagation even when samples are given.
    #[arg(long)]
    exact: bool,
}

impl SchemeFlags {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("DECISIVE_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(0)
        })
    }

    fn threads(&self) -> usize {
        self.threads.unwrap_or_else(|| {
            std::env::var("DECISIVE_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(1)
        })
    }

    fn params(&self) -> SchemeParams {
        SchemeParams {
            eps: self.eps,
            budget: self.budget,
            ..Default::default()
        }
    }

    fn estimator(&self) -> ProbabilityEstimator {
        match (self.samples, self.exact) {
            (Some(samples), false) => ProbabilityEstimator::MonteCarlo(
                MonteCarloConfig::new(samples, self.confidence, self.seed())
                    .threads(self.threads()),
            ),
            _ => ProbabilityEstimator::Exact,
        }
    }

    fn mc_config(&self, default_samples: usize) -> MonteCarloConfig {
        MonteCarloConfig::new(
            self.samples.unwrap_or(default_samples),
            self.confidence,
            self.seed(),
        )
        .threads(self.threads())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the product of a chain with a Muller automaton.
    Product {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dma: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Compute the avoid-set of a target set.
    AvoidSet {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        target: String,
        /// Certified exploration depth for countable chains.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Attractor graph of a product over declared attractor states.
    AttractorGraph {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dma: PathBuf,
        /// Chain states whose product lift forms the attractor.
        #[arg(long)]
        attractor: String,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutFormat::Dot)]
        out: OutFormat,
    },
    /// Qualitative verdict for (repeated) reachability.
    CheckQualitative {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        init: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        repeated: bool,
        /// Decisiveness evidence: finite | assumed:NOTE.
        #[arg(long, default_value = "finite")]
        evidence: String,
    },
    /// Interval approximation of a reachability probability.
    ApproxReach {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        init: String,
        #[arg(long)]
        target: String,
        /// Explicit avoid-set states ("" for the empty set).
        #[arg(long)]
        avoid: Option<String>,
        /// Compute the avoid-set by bounded exploration at this depth.
        #[arg(long)]
        avoid_bound: Option<usize>,
        #[command(flatten)]
        scheme: SchemeFlags,
    },
    /// Interval approximation of an until probability.
    ApproxUntil {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        init: String,
        #[arg(long)]
        constraint: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        avoid: Option<String>,
        #[arg(long)]
        avoid_bound: Option<usize>,
        #[command(flatten)]
        scheme: SchemeFlags,
    },
    /// Interval approximation of a repeated-reachability probability.
    ApproxRepeated {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        init: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        avoid_bound: Option<usize>,
        /// Decisiveness evidence: finite | assumed:NOTE.
        #[arg(long, default_value = "finite")]
        evidence: String,
        #[command(flatten)]
        scheme: SchemeFlags,
    },
    /// Interval approximation of a Muller-property probability.
    ApproxOmega {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dma: PathBuf,
        #[arg(long)]
        init: String,
        #[arg(long)]
        attractor: String,
        #[arg(long)]
        bound: Option<usize>,
        #[command(flatten)]
        scheme: SchemeFlags,
    },
    /// One-step abstraction check of a handle description.
    CheckAbstraction {
        #[arg(long)]
        handle: PathBuf,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Statistical search for an unsoundness counterexample.
    WitnessUnsound {
        #[arg(long)]
        handle: PathBuf,
        #[arg(long)]
        init: String,
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        scheme: SchemeFlags,
    },
    /// Thick graph of a stochastic timed automaton.
    StaThickGraph {
        #[arg(long)]
        model: PathBuf,
        /// Emit the bisimulation quotient instead of the full graph.
        #[arg(long)]
        reduce: bool,
        #[arg(long, value_enum, default_value_t = OutFormat::Dot)]
        out: OutFormat,
    },
    /// Almost-sure Muller verdict for an automaton.
    StaCheck {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dma: PathBuf,
    },
    /// Interval approximation of a Muller probability for an automaton.
    StaApprox {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dma: PathBuf,
        #[command(flatten)]
        scheme: SchemeFlags,
    },
    /// Time-bounded reachability of locations within a time interval.
    StaTimeBounded {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated target locations.
        #[arg(long)]
        target: String,
        /// Interval such as "[0,1]" or "(0,0.5]".
        #[arg(long)]
        interval: String,
        /// Non-Zenoness declaration (reactive automata need none).
        #[arg(long)]
        non_zeno_note: Option<String>,
        #[command(flatten)]
        scheme: SchemeFlags,
    },
}

/// Run the CLI on explicit arguments, collecting output; returns the exit
/// code. `main` wraps this with the process environment.
pub fn run_with_args<I, S>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let mut out = String::new();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return (EXIT_REFUSAL, e.to_string());
        }
    };
    match dispatch(cli.command, &mut out) {
        Ok(code) => (code, out),
        Err(e) => {
            let _ = writeln!(out, "refused: {e}");
            (EXIT_REFUSAL, out)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::Io)
}

fn load_model(path: &Path, p: Option<&str>) -> Result<(MarkovChain, Option<SparseDistribution>)> {
    let p = p.map(Prob::parse).transpose().map_err(Error::Parse)?;
    let model = parse_model_with_p(&read(path)?, p)?;
    Ok((model.chain, model.init))
}

fn initial(
    chain: &MarkovChain,
    declared: Option<SparseDistribution>,
    init: &str,
) -> Result<SparseDistribution> {
    if init.is_empty() {
        declared.ok_or_else(|| Error::Parse("no initial distribution given".into()))
    } else {
        parse_init(chain, init)
    }
}

fn explicit_set(chain: &MarkovChain, text: &str) -> Result<StateSet> {
    if text.trim().is_empty() {
        Ok(StateSet::empty())
    } else {
        Ok(StateSet::explicit(parse_set(chain, text)?))
    }
}

fn resolve_avoid(
    chain: &MarkovChain,
    target: &StateSet,
    avoid: Option<&str>,
    avoid_bound: Option<usize>,
    budget: usize,
) -> Result<AvoidSet> {
    match (avoid, avoid_bound) {
        (Some(states), _) => AvoidSet::user_supplied(chain, explicit_set(chain, states)?),
        (None, Some(bound)) => avoid_set_bounded(chain, target, bound),
        (None, None) if chain.is_finite() => avoid_set(chain, target),
        (None, None) => {
            // frontier states after n scheme steps sit within n steps of the
            // initial support, so exploring one budget further decides their
            // membership on every chain whose distances grow at unit speed;
            // the result is marked Assumed either way
            let bound = budget + 16;
            log::info!("no avoid-set given; using bounded exploration at depth {bound}");
            avoid_set_bounded(chain, target, bound)
        }
    }
}

fn parse_evidence(text: &str) -> Result<DecisivenessEvidence> {
    if text == "finite" {
        Ok(DecisivenessEvidence::FiniteChain)
    } else if let Some(note) = text.strip_prefix("assumed:") {
        Ok(DecisivenessEvidence::Assumed { note: note.into() })
    } else {
        Err(Error::Parse(format!(
            "evidence must be 'finite' or 'assumed:NOTE', got {text:?}"
        )))
    }
}

fn emit_approx(
    out: &mut String,
    property: &str,
    result: &ApproxResult,
    seed: Option<u64>,
) -> i32 {
    let report = report::approx_report(property, result, seed);
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap());
    match result.status {
        ApproxStatus::Converged { .. } => EXIT_OK,
        ApproxStatus::Stalled { .. } | ApproxStatus::BudgetExhausted { .. } => EXIT_BUDGET,
    }
}

fn lifted_vertices(prod: &ProductChain, states: &[StateId]) -> BTreeSet<StateId> {
    states
        .iter()
        .flat_map(|s| {
            (0..prod.q_count())
                .map(|q| prod.encode(*s, q))
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Deserialize)]
struct HandleJson {
    concrete: String,
    #[serde(rename = "abstract")]
    abstract_ref: String,
    map: HandleMapJson,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum HandleMapJson {
    Builtin {
        builtin: String,
        #[serde(default)]
        fiber_prefix: Option<usize>,
    },
    Table {
        table: std::collections::BTreeMap<String, String>,
    },
}

fn load_handle(path: &Path) -> Result<AbstractionHandle> {
    let text = read(path)?;
    let json: HandleJson = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let concrete = parse_model_with_p(&read(&base.join(&json.concrete))?, None)?.chain;
    let abstract_chain = parse_model_with_p(&read(&base.join(&json.abstract_ref))?, None)?.chain;
    let alpha = match &json.map {
        HandleMapJson::Builtin { builtin, fiber_prefix } => match builtin.as_str() {
            "walk-to-quotient" => AlphaMap::walk_quotient(fiber_prefix.unwrap_or(16)),
            "identity" => AlphaMap::identity(),
            other => {
                return Err(Error::InvalidModel(format!(
                    "unknown builtin map {other:?}"
                )))
            }
        },
        HandleMapJson::Table { table } => {
            let n = concrete.num_states().ok_or_else(|| {
                Error::InvalidModel("explicit map tables need a finite concrete chain".into())
            })?;
            let mut image = vec![StateId(0); n];
            for (from, to) in table {
                let c = concrete
                    .state_by_name(from)
                    .ok_or_else(|| Error::UnknownState(from.clone()))?;
                let a = abstract_chain
                    .state_by_name(to)
                    .ok_or_else(|| Error::UnknownState(to.clone()))?;
                image[c.0 as usize] = a;
            }
            AlphaMap::from_table(image)
        }
    };
    Ok(AbstractionHandle::new(
        concrete,
        abstract_chain,
        alpha,
        path.display().to_string(),
    ))
}

fn parse_interval(text: &str) -> Result<TimeInterval> {
    let text = text.trim();
    let (lo_strict, rest) = match text.chars().next() {
        Some('(') => (true, &text[1..]),
        Some('[') => (false, &text[1..]),
        _ => return Err(Error::Parse(format!("interval must start with ( or [: {text:?}"))),
    };
    let (hi_strict, body) = match rest.chars().last() {
        Some(')') => (true, &rest[..rest.len() - 1]),
        Some(']') => (false, &rest[..rest.len() - 1]),
        _ => return Err(Error::Parse(format!("interval must end with ) or ]: {text:?}"))),
    };
    let (lo, hi) = body
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("interval needs two endpoints: {text:?}")))?;
    let lo: f64 = lo.trim().parse().map_err(|_| Error::Parse("bad lower endpoint".into()))?;
    let hi: f64 = hi.trim().parse().map_err(|_| Error::Parse("bad upper endpoint".into()))?;
    Ok(TimeInterval {
        lo,
        lo_strict,
        hi,
        hi_strict,
    })
}

fn sta_targets(sta: &StaModel, text: &str) -> Result<BTreeSet<usize>> {
    text.split(',')
        .map(|name| {
            sta.location_by_name(name.trim())
                .ok_or_else(|| Error::UnknownState(name.trim().into()))
        })
        .collect()
}

fn dispatch(command: Command, out: &mut String) -> Result<i32> {
    match command {
        Command::Product { model, dma, out: format } => {
            let (chain, _) = load_model(&model, None)?;
            let automaton = parse_dma(&read(&dma)?)?;
            let prod = product(&chain, &automaton)?;
            match format {
                OutFormat::Dot => {
                    let _ = writeln!(out, "{}", report::chain_dot(prod.chain())?);
                }
                OutFormat::Json | OutFormat::Text => {
                    let states = prod
                        .chain()
                        .num_states()
                        .map(|n| n.to_string())
                        .unwrap_or_else(|| "countable (lazy)".into());
                    let _ = writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "product_states": states,
                            "automaton_locations": prod.q_count(),
                        }))
                        .unwrap()
                    );
                }
            }
            Ok(EXIT_OK)
        }
        Command::AvoidSet { model, p, target, bound } => {
            let (chain, _) = load_model(&model, p.as_deref())?;
            let target_set = explicit_set(&chain, &target)?;
            let avoid = match bound {
                Some(b) => avoid_set_bounded(&chain, &target_set, b)?,
                None => avoid_set(&chain, &target_set)?,
            };
            match avoid.set().as_explicit() {
                Some(states) => {
                    let names: Vec<String> =
                        states.iter().map(|s| chain.state_name(*s)).collect();
                    let _ = writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "avoid_set": names,
                            "provenance": format!("{:?}", avoid.provenance()),
                        }))
                        .unwrap()
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "avoid_set": "predicate (bounded exploration)",
                            "provenance": format!("{:?}", avoid.provenance()),
                        }))
                        .unwrap()
                    );
                }
            }
            Ok(EXIT_OK)
        }
        Command::AttractorGraph { model, dma, attractor, bound, out: format } => {
            let (chain, _) = load_model(&model, None)?;
            let automaton = parse_dma(&read(&dma)?)?;
            let prod = product(&chain, &automaton)?;
            let states = parse_set(&chain, &attractor)?;
            let vertices = lifted_vertices(&prod, &states);
            let graph = attractor_graph(&prod, &vertices, bound)?;
            let good = good_bsccs(&graph, prod.muller_family());
            match format {
                OutFormat::Dot => {
                    let _ = writeln!(out, "{}", report::attractor_graph_dot(&prod, &graph, &good));
                }
                OutFormat::Json | OutFormat::Text => {
                    let bsccs: Vec<Vec<String>> = (0..graph.bsccs().len())
                        .map(|c| {
                            graph
                                .bscc_states(c)
                                .iter()
                                .map(|s| prod.chain().state_name(*s))
                                .collect()
                        })
                        .collect();
                    let _ = writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "vertices": graph.vertices().len(),
                            "bsccs": bsccs,
                            "good": good,
                        }))
                        .unwrap()
                    );
                }
            }
            Ok(EXIT_OK)
        }
        Command::CheckQualitative { model, p, init, target, repeated, evidence } => {
            let (chain, declared) = load_model(&model, p.as_deref())?;
            let mu = initial(&chain, declared, &init)?;
            let target_set = explicit_set(&chain, &target)?;
            let evidence = parse_evidence(&evidence)?;
            let report_data = if repeated {
                qualitative_repeated(&chain, &mu, &target_set, &evidence)?
            } else {
                qualitative_reachability(&chain, &mu, &target_set, &evidence)?
            };
            let property = format!(
                "{}{{{}}}",
                if repeated { "repeated " } else { "" },
                target
            );
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&report::verdict_report(&property, &report_data))
                    .unwrap()
            );
            Ok(EXIT_OK)
        }
        Command::ApproxReach { model, p, init, target, avoid, avoid_bound, scheme } => {
            let (chain, declared) = load_model(&model, p.as_deref())?;
            let mu = initial(&chain, declared, &init)?;
            let target_set = explicit_set(&chain, &target)?;
            let avoid_set = resolve_avoid(&chain, &target_set, avoid.as_deref(), avoid_bound, scheme.budget)?;
            let evidence = if chain.is_finite() {
                DecisivenessEvidence::FiniteChain
            } else {
                DecisivenessEvidence::Assumed {
                    note: "countable chain: decisiveness not verified by the CLI".into(),
                }
            };
            let result = approx_reach(
                &chain,
                &mu,
                &target_set,
                &avoid_set,
                &scheme.estimator(),
                &scheme.params(),
                &evidence,
            )?;
            Ok(emit_approx(out, &format!("F {{{target}}}"), &result, Some(scheme.seed())))
        }
        Command::ApproxUntil { model, p, init, constraint, target, avoid, avoid_bound, scheme } => {
            let (chain, declared) = load_model(&model, p.as_deref())?;
            let mu = initial(&chain, declared, &init)?;
            let constraint_set = explicit_set(&chain, &constraint)?;
            let target_set = explicit_set(&chain, &target)?;
            let avoid_set = resolve_avoid(&chain, &target_set, avoid.as_deref(), avoid_bound, scheme.budget)?;
            let evidence = if chain.is_finite() {
                DecisivenessEvidence::FiniteChain
            } else {
                DecisivenessEvidence::Assumed {
                    note: "countable chain: decisiveness not verified by the CLI".into(),
                }
            };
            let result = approx_until(
                &chain,
                &mu,
                &constraint_set,
                &target_set,
                &avoid_set,
                &scheme.estimator(),
                &scheme.params(),
                &evidence,
            )?;
            Ok(emit_approx(
                out,
                &format!("{{{constraint}}} U {{{target}}}"),
                &result,
                Some(scheme.seed()),
            ))
        }
        Command::ApproxRepeated { model, p, init, target, avoid_bound, evidence, scheme } => {
            let (chain, declared) = load_model(&model, p.as_deref())?;
            let mu = initial(&chain, declared, &init)?;
            let target_set = explicit_set(&chain, &target)?;
            let evidence = parse_evidence(&evidence)?;
            let (avoid, double) = match avoid_bound {
                Some(b) => (
                    avoid_set_bounded(&chain, &target_set, b)?,
                    {
                        let inner = avoid_set_bounded(&chain, &target_set, b)?;
                        let inner_set = inner.set().clone();
                        avoid_set_bounded(
                            &chain,
                            &StateSet::predicate(
                                move |s| inner_set.contains(s),
                                Some(b),
                                "inner avoid-set",
                            ),
                            b,
                        )?
                    },
                ),
                None => (
                    avoid_set(&chain, &target_set)?,
                    crate::qualitative::double_avoid_set(&chain, &target_set)?,
                ),
            };
            let result = approx_repeated(
                &chain,
                &mu,
                &avoid,
                &double,
                &scheme.estimator(),
                &scheme.params(),
                &evidence,
            )?;
            Ok(emit_approx(out, &format!("G F {{{target}}}"), &result, Some(scheme.seed())))
        }
        Command::ApproxOmega { model, dma, init, attractor, bound, scheme } => {
            let (chain, declared) = load_model(&model, None)?;
            let automaton = parse_dma(&read(&dma)?)?;
            let prod = product(&chain, &automaton)?;
            let mu = initial(&chain, declared, &init)?;
            let mu_pair = prod.lift_initial(&mu)?;
            let states = parse_set(&chain, &attractor)?;
            let vertices = lifted_vertices(&prod, &states);
            let result = quant_omega_attractor(
                &prod,
                &mu_pair,
                &vertices,
                bound,
                &scheme.estimator(),
                &scheme.params(),
            )?;
            Ok(emit_approx(out, "muller acceptance", &result, Some(scheme.seed())))
        }
        Command::CheckAbstraction { handle, bound } => {
            let mut h = load_handle(&handle)?;
            let holds = check_abstraction(&mut h, bound)?;
            let check = h.abstraction_check().unwrap();
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({
                    "abstraction": holds,
                    "fiber_uniform": check.fiber_uniform,
                    "qualified_by_bound": check.qualified_by_bound,
                    "offending": check.offending,
                }))
                .unwrap()
            );
            Ok(EXIT_OK)
        }
        Command::WitnessUnsound { handle, init, horizon, scheme } => {
            let mut h = load_handle(&handle)?;
            check_abstraction(&mut h, None)?;
            let mu = parse_init(&h.concrete, &init)?;
            let cfg = WitnessSearchConfig {
                samples: scheme.samples.unwrap_or(100_000),
                confidence: scheme.confidence,
                seed: scheme.seed(),
                horizon: horizon.unwrap_or(512),
                ..Default::default()
            };
            let witness = soundness_witness_search(&mut h, &mu, None, &cfg)?;
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({
                    "witness": witness,
                    "seed": cfg.seed,
                }))
                .unwrap()
            );
            Ok(EXIT_OK)
        }
        Command::StaThickGraph { model, reduce, out: format } => {
            let sta = parse_sta(&read(&model)?)?;
            let graph = thick_graph(&sta)?;
            match (format, reduce) {
                (OutFormat::Dot, false) => {
                    let _ = writeln!(out, "{}", graph.to_dot(&sta, &BTreeSet::new()));
                }
                (OutFormat::Dot, true) => {
                    let quotient = graph.bisimulation_quotient()?;
                    let _ = writeln!(out, "{}", report::chain_dot(&quotient.chain)?);
                }
                _ => {
                    let quotient = graph.bisimulation_quotient()?;
                    let nodes: Vec<String> = (0..graph.nodes.len())
                        .map(|i| graph.describe_node(&sta, StateId(i as u64)))
                        .collect();
                    let _ = writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "nodes": nodes,
                            "quotient_classes": quotient.members,
                        }))
                        .unwrap()
                    );
                }
            }
            Ok(EXIT_OK)
        }
        Command::StaCheck { model, dma } => {
            let sta = parse_sta(&read(&model)?)?;
            let automaton = parse_dma(&read(&dma)?)?;
            let report_data = sta_check_qualitative(&sta, &automaton)?;
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({
                    "almost_sure": report_data.satisfied,
                    "class": report_data.class,
                    "evidence": report_data.evidence,
                }))
                .unwrap()
            );
            Ok(EXIT_OK)
        }
        Command::StaApprox { model, dma, scheme } => {
            let sta = parse_sta(&read(&model)?)?;
            let automaton = parse_dma(&read(&dma)?)?;
            let init = [(sta.initial.clone(), 1.0)];
            let result = sta_approx_quantitative(
                &sta,
                &init,
                &automaton,
                &scheme.mc_config(100_000),
                &scheme.params(),
            )?;
            Ok(emit_approx(out, "muller acceptance", &result, Some(scheme.seed())))
        }
        Command::StaTimeBounded { model, target, interval, non_zeno_note, scheme } => {
            let sta = parse_sta(&read(&model)?)?;
            let targets = sta_targets(&sta, &target)?;
            let interval = parse_interval(&interval)?;
            let non_zeno = match non_zeno_note {
                Some(note) => NonZenoEvidence::Declared(note),
                None => NonZenoEvidence::AutoReactive,
            };
            let init = [(sta.initial.clone(), 1.0)];
            let result = sta_time_bounded(
                &sta,
                &init,
                &targets,
                &interval,
                &non_zeno,
                &scheme.mc_config(100_000),
                &scheme.params(),
            )?;
            Ok(emit_approx(
                out,
                &format!("F ({target} x {interval:?})"),
                &result,
                Some(scheme.seed()),
            ))
        }
    }
}
