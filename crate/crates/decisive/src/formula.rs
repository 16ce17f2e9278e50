//! Path formulas over state-set atoms, with exact evaluation of bounded
//! events by forward propagation.
//!
//! Formulas reference their atoms by index into a separate table of
//! [`StateSet`]s so they can serve as ordered map keys during propagation.

use crate::chain::{MarkovChain, SparseDistribution, StateId, StateSet};
use crate::error::{Error, Result};
use crate::prob::Prob;
use std::collections::BTreeMap;

/// Step-bound comparison of an until operator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Bound {
    AtMost(u32),
    Exactly(u32),
    AtLeast(u32),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PathFormula {
    True,
    False,
    /// Atom: the first state of the path lies in the referenced set.
    Set(usize),
    Until(Box<PathFormula>, Box<PathFormula>, Bound),
    And(Box<PathFormula>, Box<PathFormula>),
    Or(Box<PathFormula>, Box<PathFormula>),
    Not(Box<PathFormula>),
}

impl PathFormula {
    pub fn set(i: usize) -> Self {
        PathFormula::Set(i)
    }

    pub fn until(a: PathFormula, b: PathFormula, bound: Bound) -> Self {
        PathFormula::Until(Box::new(a), Box::new(b), bound)
    }

    /// F⋈k φ, as ⊤ U[⋈k] φ.
    pub fn eventually(phi: PathFormula, bound: Bound) -> Self {
        PathFormula::until(PathFormula::True, phi, bound)
    }

    /// G≤k φ, as ¬F≤k ¬φ.
    pub fn globally(phi: PathFormula, bound: Bound) -> Self {
        PathFormula::not(PathFormula::eventually(PathFormula::not(phi), bound))
    }

    pub fn and(a: PathFormula, b: PathFormula) -> Self {
        match (a, b) {
            (PathFormula::True, x) | (x, PathFormula::True) => x,
            (PathFormula::False, _) | (_, PathFormula::False) => PathFormula::False,
            (a, b) => PathFormula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: PathFormula, b: PathFormula) -> Self {
        match (a, b) {
            (PathFormula::False, x) | (x, PathFormula::False) => x,
            (PathFormula::True, _) | (_, PathFormula::True) => PathFormula::True,
            (a, b) => PathFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn not(a: PathFormula) -> Self {
        match a {
            PathFormula::True => PathFormula::False,
            PathFormula::False => PathFormula::True,
            PathFormula::Not(inner) => *inner,
            a => PathFormula::Not(Box::new(a)),
        }
    }

    /// Number of steps after which satisfaction is decided, when bounded.
    pub fn window(&self) -> Result<u32> {
        match self {
            PathFormula::True | PathFormula::False | PathFormula::Set(_) => Ok(0),
            PathFormula::And(a, b) | PathFormula::Or(a, b) => {
                Ok(a.window()?.max(b.window()?))
            }
            PathFormula::Not(a) => a.window(),
            PathFormula::Until(a, b, bound) => match bound {
                Bound::AtMost(k) | Bound::Exactly(k) => {
                    Ok(k + a.window()?.max(b.window()?))
                }
                Bound::AtLeast(k) => Err(Error::UnboundedFormula(format!(
                    "until with bound >= {k}"
                ))),
            },
        }
    }
}

enum Step {
    Decided(bool),
    Next(PathFormula),
}

fn combine_and(a: Step, b: Step) -> Step {
    match (a, b) {
        (Step::Decided(false), _) | (_, Step::Decided(false)) => Step::Decided(false),
        (Step::Decided(true), x) | (x, Step::Decided(true)) => x,
        (Step::Next(a), Step::Next(b)) => Step::Next(PathFormula::and(a, b)),
    }
}

fn combine_or(a: Step, b: Step) -> Step {
    match (a, b) {
        (Step::Decided(true), _) | (_, Step::Decided(true)) => Step::Decided(true),
        (Step::Decided(false), x) | (x, Step::Decided(false)) => x,
        (Step::Next(a), Step::Next(b)) => Step::Next(PathFormula::or(a, b)),
    }
}

/// Partially evaluate `phi` against the current state `s`. The returned
/// residual, if any, is an obligation on the path suffix starting at the
/// next state.
fn step_formula(phi: &PathFormula, s: StateId, sets: &[StateSet]) -> Result<Step> {
    Ok(match phi {
        PathFormula::True => Step::Decided(true),
        PathFormula::False => Step::Decided(false),
        PathFormula::Set(i) => {
            let set = sets
                .get(*i)
                .ok_or_else(|| Error::UnresolvableSet(format!("missing set atom {i}")))?;
            Step::Decided(set.contains(s)?)
        }
        PathFormula::Not(a) => match step_formula(a, s, sets)? {
            Step::Decided(v) => Step::Decided(!v),
            Step::Next(r) => Step::Next(PathFormula::not(r)),
        },
        PathFormula::And(a, b) => {
            combine_and(step_formula(a, s, sets)?, step_formula(b, s, sets)?)
        }
        PathFormula::Or(a, b) => {
            combine_or(step_formula(a, s, sets)?, step_formula(b, s, sets)?)
        }
        PathFormula::Until(a, b, bound) => match bound {
            Bound::AtMost(0) | Bound::Exactly(0) => step_formula(b, s, sets)?,
            Bound::AtMost(k) => {
                let cont = combine_and(
                    step_formula(a, s, sets)?,
                    Step::Next(PathFormula::until(
                        (**a).clone(),
                        (**b).clone(),
                        Bound::AtMost(k - 1),
                    )),
                );
                combine_or(step_formula(b, s, sets)?, cont)
            }
            Bound::Exactly(k) => combine_and(
                step_formula(a, s, sets)?,
                Step::Next(PathFormula::until(
                    (**a).clone(),
                    (**b).clone(),
                    Bound::Exactly(k - 1),
                )),
            ),
            Bound::AtLeast(k) => {
                return Err(Error::UnboundedFormula(format!("until with bound >= {k}")))
            }
        },
    })
}

/// Exact probability of a bounded path formula by forward propagation with
/// absorption at decided states. Errors on unbounded operators or when the
/// formula's decision window exceeds `horizon`.
pub fn bounded_event_probability(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    phi: &PathFormula,
    sets: &[StateSet],
    horizon: u32,
) -> Result<Prob> {
    let window = phi.window()?;
    if window > horizon {
        return Err(Error::UnboundedFormula(format!(
            "formula needs {window} steps but horizon is {horizon}"
        )));
    }
    let mut satisfied = Prob::zero();
    let mut frontier: BTreeMap<(StateId, PathFormula), Prob> = BTreeMap::new();
    let push = |frontier: &mut BTreeMap<(StateId, PathFormula), Prob>,
                    satisfied: &mut Prob,
                    s: StateId,
                    step: Step,
                    mass: Prob| {
        match step {
            Step::Decided(true) => *satisfied += mass,
            Step::Decided(false) => {}
            Step::Next(residual) => {
                let slot = frontier
                    .entry((s, residual))
                    .or_insert_with(Prob::exact_zero);
                *slot += mass;
            }
        }
    };
    for (s, p) in mu.entries() {
        let step = step_formula(phi, *s, sets)?;
        push(&mut frontier, &mut satisfied, *s, step, p.clone());
    }
    while !frontier.is_empty() {
        let mut next = BTreeMap::new();
        for ((s, residual), mass) in frontier {
            let row = chain.successors(s)?;
            for (t, q) in row.entries() {
                let step = step_formula(&residual, *t, sets)?;
                push(&mut next, &mut satisfied, *t, step, mass.clone() * q.clone());
            }
        }
        frontier = next;
    }
    Ok(satisfied)
}
