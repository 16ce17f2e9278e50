//! Exact-inverse-CDF sampling of automaton steps: a delay drawn from the
//! location's distribution restricted to the enabled delay set, then an
//! edge drawn by weight among the edges enabled after that delay.

use super::{Configuration, DelayKind, StaModel};
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A delay window [lo, hi] with strictness flags; `hi` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayWindow {
    pub lo: f64,
    pub lo_strict: bool,
    pub hi: f64,
    pub hi_strict: bool,
}

impl DelayWindow {
    fn everything() -> Self {
        DelayWindow {
            lo: 0.0,
            lo_strict: false,
            hi: f64::INFINITY,
            hi_strict: false,
        }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_strict || self.hi_strict))
    }

    fn is_point(&self) -> bool {
        !self.is_empty() && self.lo == self.hi
    }

    fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    fn tighten_lower(&mut self, lo: f64, strict: bool) {
        if lo > self.lo || (lo == self.lo && strict) {
            self.lo = lo;
            self.lo_strict = strict;
        }
    }

    fn tighten_upper(&mut self, hi: f64, strict: bool) {
        if hi < self.hi || (hi == self.hi && strict) {
            self.hi = hi;
            self.hi_strict = strict;
        }
    }
}

/// Enabled delay window of one edge from the given valuation.
pub fn edge_delay_window(
    sta: &StaModel,
    edge_index: usize,
    valuation: &[f64],
) -> Option<DelayWindow> {
    let mut window = DelayWindow::everything();
    for (clock, cmp, c) in &sta.edges[edge_index].guard.conjuncts {
        let shift = *c as f64 - valuation[*clock];
        match cmp {
            super::Cmp::Lt => window.tighten_upper(shift, true),
            super::Cmp::Le => window.tighten_upper(shift, false),
            super::Cmp::Eq => {
                window.tighten_lower(shift, false);
                window.tighten_upper(shift, false);
            }
            super::Cmp::Ge => window.tighten_lower(shift, false),
            super::Cmp::Gt => window.tighten_lower(shift, true),
        }
    }
    if window.is_empty() {
        None
    } else {
        Some(window)
    }
}

/// The enabled delay set I(γ) as disjoint windows in increasing order.
pub fn enabled_delays(sta: &StaModel, config: &Configuration) -> Vec<DelayWindow> {
    let mut windows: Vec<DelayWindow> = sta
        .edges_from(config.location)
        .filter_map(|(i, _)| edge_delay_window(sta, i, &config.valuation))
        .collect();
    windows.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    let mut merged: Vec<DelayWindow> = Vec::new();
    for w in windows {
        let joins = merged.last().is_some_and(|prev| {
            w.lo < prev.hi || (w.lo == prev.hi && !(w.lo_strict && prev.hi_strict))
        });
        match merged.last_mut() {
            Some(prev) if joins => {
                if w.hi > prev.hi || (w.hi == prev.hi && !w.hi_strict) {
                    prev.hi = w.hi;
                    prev.hi_strict = w.hi_strict;
                }
            }
            _ => merged.push(w),
        }
    }
    merged
}

fn sample_delay(
    sta: &StaModel,
    config: &Configuration,
    windows: &[DelayWindow],
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let total_length: f64 = windows.iter().map(|w| w.length()).sum();
    match &sta.locations[config.location].kind {
        DelayKind::UniformOverEnabled => {
            if total_length > 0.0 {
                if total_length.is_infinite() {
                    return Err(Error::InvalidModel(format!(
                        "uniform delay over an unbounded enabled set at {:?}",
                        sta.locations[config.location].name
                    )));
                }
                let mut u = rng.gen::<f64>() * total_length;
                for w in windows {
                    if u < w.length() {
                        return Ok(w.lo + u);
                    }
                    u -= w.length();
                }
                Ok(windows.last().unwrap().hi)
            } else {
                // enabled set is a finite union of points: uniform atoms
                let atoms: Vec<f64> = windows.iter().filter(|w| w.is_point()).map(|w| w.lo).collect();
                Ok(atoms[rng.gen_range(0..atoms.len())])
            }
        }
        DelayKind::Exponential(rate) => {
            // inverse CDF over the union, weighting each window by its
            // exponential measure
            let weight = |w: &DelayWindow| -> f64 {
                (-rate * w.lo).exp() - if w.hi.is_finite() { (-rate * w.hi).exp() } else { 0.0 }
            };
            let total: f64 = windows.iter().map(weight).sum();
            if total <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "exponential delay with a measure-zero enabled set at {:?}",
                    sta.locations[config.location].name
                )));
            }
            let mut u = rng.gen::<f64>() * total;
            for w in windows {
                let mass = weight(w);
                if u < mass || w == windows.last().unwrap() {
                    let upper = (-rate * w.lo).exp();
                    let target = (upper - u).max(f64::MIN_POSITIVE);
                    return Ok(-target.ln() / rate);
                }
                u -= mass;
            }
            unreachable!("window selection covers the total mass")
        }
        DelayKind::DiracAt => {
            if total_length > 0.0 {
                return Err(Error::InvalidModel(format!(
                    "deterministic-delay location {:?} enables a positive-length delay set",
                    sta.locations[config.location].name
                )));
            }
            let atoms: Vec<f64> = windows.iter().filter(|w| w.is_point()).map(|w| w.lo).collect();
            Ok(atoms[rng.gen_range(0..atoms.len())])
        }
    }
}

/// One probabilistic step: sample a delay from the location's distribution
/// restricted to the enabled set, then an edge by weight among the edges
/// enabled after that delay. Deterministic for a fixed RNG state.
pub fn sample_step(
    sta: &StaModel,
    config: &Configuration,
    rng: &mut ChaCha8Rng,
) -> Result<(Configuration, f64)> {
    let windows = enabled_delays(sta, config);
    if windows.is_empty() {
        return Err(Error::DeadlockedConfiguration);
    }
    let mut delay = sample_delay(sta, config, &windows, rng)?;
    let mut delayed: Vec<f64>;
    let mut enabled: Vec<usize>;
    let mut retries = 0;
    loop {
        delayed = config.valuation.iter().map(|v| v + delay).collect();
        enabled = sta
            .edges_from(config.location)
            .filter(|(_, e)| e.guard.satisfied_by_valuation(&delayed))
            .map(|(i, _)| i)
            .collect();
        if !enabled.is_empty() {
            break;
        }
        // float rounding pushed the delay off an open boundary; resample.
        // Persistent misses mean the enabled window is narrower than the
        // float grid (convergent automata reach such corners): report it so
        // the caller can truncate the path instead of spinning.
        retries += 1;
        if retries > 100 {
            return Err(Error::ResolutionExhausted(format!(
                "enabled delay window at {:?} is below float resolution (valuation {:?})",
                sta.locations[config.location].name, config.valuation
            )));
        }
        delay = sample_delay(sta, config, &windows, rng)?;
    }
    let total_weight: u32 = enabled.iter().map(|&i| sta.edges[i].weight).sum();
    let mut pick = rng.gen_range(0..total_weight);
    let mut chosen = enabled[0];
    for &i in &enabled {
        let w = sta.edges[i].weight;
        if pick < w {
            chosen = i;
            break;
        }
        pick -= w;
    }
    let edge = &sta.edges[chosen];
    let mut valuation = delayed;
    for &clock in &edge.resets {
        valuation[clock] = 0.0;
    }
    Ok((
        Configuration {
            location: edge.target,
            valuation,
        },
        delay,
    ))
}
