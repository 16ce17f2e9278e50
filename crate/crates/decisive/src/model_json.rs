//! JSON formats for chains and initial distributions.
//!
//! Explicit chains:
//! ```json
//! {"states": ["s0", "s1"],
//!  "init": {"s0": "1"},
//!  "edges": [{"from": "s0", "to": "s1", "prob": "2/3"}, ...],
//!  "labels": {"s0": ["a"]},
//!  "ap": ["a"]}
//! ```
//! Probabilities are decimal or `"num/den"` strings (or JSON numbers).
//! Built-in lazily-enumerated families are referenced by name:
//! ```json
//! {"family": "random-walk", "p": "1/3", "init": {"1": "1"}}
//! ```

use crate::chain::{LabelSet, MarkovChain, SparseDistribution, StateId};
use crate::error::{Error, Result};
use crate::families;
use crate::prob::Prob;
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Deserialize)]
struct EdgeJson {
    from: String,
    to: String,
    prob: serde_json::Value,
}

#[derive(Deserialize)]
struct ModelJson {
    #[serde(default)]
    family: Option<String>,
    #[serde(default)]
    p: Option<serde_json::Value>,
    #[serde(default)]
    states: Vec<String>,
    #[serde(default)]
    init: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    edges: Vec<EdgeJson>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    ap: Vec<String>,
}

fn parse_prob(v: &serde_json::Value) -> Result<Prob> {
    match v {
        serde_json::Value::String(s) => Prob::parse(s).map_err(Error::Parse),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Prob::from_ratio(i, 1))
            } else {
                Ok(Prob::approx(n.as_f64().unwrap_or(f64::NAN)))
            }
        }
        other => Err(Error::Parse(format!("expected probability, got {other}"))),
    }
}

/// A parsed model: the chain plus its optional initial distribution.
#[derive(Debug)]
pub struct LoadedModel {
    pub chain: MarkovChain,
    pub init: Option<SparseDistribution>,
}

pub fn parse_model(text: &str) -> Result<LoadedModel> {
    parse_model_with_p(text, None)
}

/// Parse a model, overriding the family parameter (the CLI's `--p` flag).
pub fn parse_model_with_p(text: &str, p_override: Option<Prob>) -> Result<LoadedModel> {
    let json: ModelJson = serde_json::from_str(text)?;
    let chain = if let Some(family) = &json.family {
        let p = match p_override {
            Some(p) => Some(p),
            None => json.p.as_ref().map(parse_prob).transpose()?,
        };
        families::by_name(family, p)?
    } else {
        build_explicit(&json)?
    };
    let init = if json.init.is_empty() {
        None
    } else {
        let mut entries = Vec::new();
        for (name, prob) in &json.init {
            let s = chain
                .state_by_name(name)
                .ok_or_else(|| Error::UnknownState(name.clone()))?;
            entries.push((s, parse_prob(prob)?));
        }
        Some(SparseDistribution::new(entries)?)
    };
    Ok(LoadedModel { chain, init })
}

fn build_explicit(json: &ModelJson) -> Result<MarkovChain> {
    if json.states.is_empty() {
        return Err(Error::InvalidModel(
            "explicit model needs a nonempty \"states\" array".into(),
        ));
    }
    let index: BTreeMap<&str, u64> = json
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i as u64))
        .collect();
    let mut rows: Vec<Vec<(StateId, Prob)>> = vec![Vec::new(); json.states.len()];
    for e in &json.edges {
        let from = *index
            .get(e.from.as_str())
            .ok_or_else(|| Error::UnknownState(e.from.clone()))?;
        let to = *index
            .get(e.to.as_str())
            .ok_or_else(|| Error::UnknownState(e.to.clone()))?;
        rows[from as usize].push((StateId(to), parse_prob(&e.prob)?));
    }
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(i, entries)| {
            SparseDistribution::new(entries).map_err(|e| {
                Error::InvalidModel(format!("kernel row of state {:?}: {e}", json.states[i]))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut labels = vec![LabelSet::EMPTY; json.states.len()];
    for (state, aps) in &json.labels {
        let s = *index
            .get(state.as_str())
            .ok_or_else(|| Error::UnknownState(state.clone()))?;
        let mut set = LabelSet::EMPTY;
        for ap in aps {
            let i = json
                .ap
                .iter()
                .position(|a| a == ap)
                .ok_or_else(|| Error::InvalidModel(format!("undeclared proposition {ap:?}")))?;
            set = LabelSet(set.0 | (1 << i));
        }
        labels[s as usize] = set;
    }
    MarkovChain::finite(json.states.clone(), rows, json.ap.clone(), labels)
}

/// Parse an initial-distribution string of the form `"state:prob,state:prob"`.
pub fn parse_init(chain: &MarkovChain, text: &str) -> Result<SparseDistribution> {
    let mut entries = Vec::new();
    for part in text.split(',') {
        let (name, prob) = part
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected state:prob, got {part:?}")))?;
        let s = chain
            .state_by_name(name.trim())
            .ok_or_else(|| Error::UnknownState(name.trim().into()))?;
        entries.push((s, Prob::parse(prob.trim()).map_err(Error::Parse)?));
    }
    SparseDistribution::new(entries)
}

/// Parse a state-set string: comma-separated state names.
pub fn parse_set(chain: &MarkovChain, text: &str) -> Result<Vec<StateId>> {
    text.split(',')
        .map(|name| {
            chain
                .state_by_name(name.trim())
                .ok_or_else(|| Error::UnknownState(name.trim().into()))
        })
        .collect()
}
