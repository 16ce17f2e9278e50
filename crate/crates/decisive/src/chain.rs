//! Labelled Markov chains over countable state spaces.
//!
//! Chains come in two flavours: finite explicit chains (kernel rows stored
//! up front) and lazily-enumerated countable chains (kernel rows produced on
//! demand by a successor function, memoized, with a hard exploration cap).
//! Distributions are sparse and carry either exact rational or float64
//! entries; see [`crate::prob::Prob`].

use crate::error::{Error, Result};
use crate::prob::{Prob, MASS_TOLERANCE, PRUNE_THRESHOLD};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

/// Opaque state identifier. For lazily-enumerated countable chains the
/// wrapped integer is the canonical encoding of the state.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub u64);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Subset of the (at most 32) atomic propositions of a chain, as a bitset.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LabelSet(pub u32);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn singleton(ap_index: usize) -> Self {
        LabelSet(1 << ap_index)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        LabelSet(indices.iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn contains(&self, ap_index: usize) -> bool {
        self.0 & (1 << ap_index) != 0
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..32).filter(|i| self.contains(*i)).collect()
    }
}

/// A sparse probability distribution over states.
///
/// Entries are kept sorted by state, all strictly positive, and must sum to
/// one: identically in exact mode, within [`MASS_TOLERANCE`] otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseDistribution {
    entries: Vec<(StateId, Prob)>,
    exact: bool,
}

impl SparseDistribution {
    pub fn new(mut entries: Vec<(StateId, Prob)>) -> Result<Self> {
        entries.retain(|(_, p)| !p.is_zero());
        entries.sort_by_key(|(s, _)| *s);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidModel(format!(
                    "duplicate entry for state {}",
                    w[0].0
                )));
            }
        }
        let exact = entries.iter().all(|(_, p)| p.is_exact());
        let mut dist = SparseDistribution { entries, exact };
        if !exact {
            dist.prune();
        }
        dist.check_mass()?;
        Ok(dist)
    }

    pub fn dirac(s: StateId) -> Self {
        SparseDistribution {
            entries: vec![(s, Prob::one())],
            exact: true,
        }
    }

    pub fn uniform(states: &[StateId]) -> Result<Self> {
        let n = states.len() as i64;
        Self::new(
            states
                .iter()
                .map(|s| (*s, Prob::from_ratio(1, n)))
                .collect(),
        )
    }

    fn check_mass(&self) -> Result<()> {
        for (s, p) in &self.entries {
            if !p.is_positive() {
                return Err(Error::InvalidModel(format!(
                    "non-positive probability for state {s}"
                )));
            }
        }
        let mass: Prob = self.entries.iter().map(|(_, p)| p.clone()).sum();
        if self.exact {
            if !mass.is_one() {
                return Err(Error::InvalidModel(format!(
                    "exact distribution has mass {mass}"
                )));
            }
        } else if (mass.to_f64() - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "distribution mass {} deviates from 1",
                mass.to_f64()
            )));
        }
        Ok(())
    }

    fn prune(&mut self) {
        let before = self.entries.len();
        self.entries.retain(|(_, p)| p.to_f64() >= PRUNE_THRESHOLD);
        let pruned = before - self.entries.len();
        if pruned > 0 {
            let mass: f64 = self.entries.iter().map(|(_, p)| p.to_f64()).sum();
            if mass > 0.0 {
                for (_, p) in &mut self.entries {
                    *p = Prob::approx(p.to_f64() / mass);
                }
            }
            log::debug!("pruned {pruned} entries below {PRUNE_THRESHOLD}, renormalized");
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn entries(&self) -> &[(StateId, Prob)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries.iter().map(|(s, _)| *s)
    }

    pub fn get(&self, s: StateId) -> Prob {
        self.entries
            .binary_search_by_key(&s, |(t, _)| *t)
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_else(|_| Prob::zero())
    }

    pub fn mass(&self) -> Prob {
        self.entries.iter().map(|(_, p)| p.clone()).sum()
    }

    /// Probability assigned to a measurable set.
    pub fn measure(&self, set: &StateSet) -> Result<Prob> {
        let mut total = Prob::zero();
        for (s, p) in &self.entries {
            if set.contains(*s)? {
                total += p.clone();
            }
        }
        Ok(total)
    }

    /// Conditional distribution given a set of positive mass.
    pub fn conditional(&self, set: &StateSet) -> Result<SparseDistribution> {
        let mass = self.measure(set)?;
        if !mass.is_positive() {
            return Err(Error::ZeroMass);
        }
        let mut entries = Vec::new();
        for (s, p) in &self.entries {
            if set.contains(*s)? {
                entries.push((*s, p.clone() / mass.clone()));
            }
        }
        SparseDistribution::new(entries)
    }
}

/// A measurable set of states: explicit (finite) or given by a membership
/// predicate. Predicate sets may carry a closure certificate — a depth bound
/// asserting that bounded exploration decides every query made against them.
#[derive(Clone)]
pub enum StateSet {
    Explicit(BTreeSet<StateId>),
    Predicate {
        test: Arc<dyn Fn(StateId) -> Result<bool> + Send + Sync>,
        certificate: Option<usize>,
        desc: String,
    },
}

impl StateSet {
    pub fn explicit<I: IntoIterator<Item = StateId>>(states: I) -> Self {
        StateSet::Explicit(states.into_iter().collect())
    }

    pub fn empty() -> Self {
        StateSet::Explicit(BTreeSet::new())
    }

    pub fn predicate<F>(test: F, certificate: Option<usize>, desc: impl Into<String>) -> Self
    where
        F: Fn(StateId) -> Result<bool> + Send + Sync + 'static,
    {
        StateSet::Predicate {
            test: Arc::new(test),
            certificate,
            desc: desc.into(),
        }
    }

    pub fn full() -> Self {
        StateSet::predicate(|_| Ok(true), None, "all states")
    }

    pub fn contains(&self, s: StateId) -> Result<bool> {
        match self {
            StateSet::Explicit(set) => Ok(set.contains(&s)),
            StateSet::Predicate { test, .. } => test(s),
        }
    }

    pub fn certificate(&self) -> Option<usize> {
        match self {
            StateSet::Explicit(_) => None,
            StateSet::Predicate { certificate, .. } => *certificate,
        }
    }

    pub fn as_explicit(&self) -> Option<&BTreeSet<StateId>> {
        match self {
            StateSet::Explicit(set) => Some(set),
            StateSet::Predicate { .. } => None,
        }
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        match (self, other) {
            (StateSet::Explicit(a), StateSet::Explicit(b)) => {
                StateSet::Explicit(a.union(b).copied().collect())
            }
            _ => {
                let a = self.clone();
                let b = other.clone();
                StateSet::predicate(
                    move |s| Ok(a.contains(s)? || b.contains(s)?),
                    None,
                    "union",
                )
            }
        }
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSet::Explicit(set) => write!(f, "Explicit({:?})", set),
            StateSet::Predicate { desc, certificate, .. } => {
                write!(f, "Predicate({desc:?}, certificate={certificate:?})")
            }
        }
    }
}

type SuccessorFn = Arc<dyn Fn(StateId) -> Option<SparseDistribution> + Send + Sync>;
type LabelFn = Arc<dyn Fn(StateId) -> LabelSet + Send + Sync>;

/// Default exploration cap for lazily-enumerated chains.
pub const DEFAULT_EXPLORATION_CAP: usize = 1_000_000;

struct FiniteData {
    names: Vec<String>,
    rows: Vec<SparseDistribution>,
    labels: Vec<LabelSet>,
}

struct LazyData {
    succ: SuccessorFn,
    labels: LabelFn,
    cache: Mutex<LazyCache>,
    cap: usize,
}

#[derive(Clone)]
enum ChainKind {
    Finite(Arc<FiniteData>),
    Lazy(Arc<LazyData>),
}

#[derive(Default)]
struct LazyCache {
    rows: HashMap<u64, SparseDistribution>,
}

/// A labelled Markov chain, finite-explicit or lazily-enumerated countable.
/// Clones share the underlying kernel (and memo cache) and are cheap.
#[derive(Clone)]
pub struct MarkovChain {
    kind: ChainKind,
    ap: Vec<String>,
}

impl MarkovChain {
    /// Build a finite explicit chain. `labels` maps state index to the set
    /// of propositions holding there (missing entries mean no labels).
    pub fn finite(
        names: Vec<String>,
        rows: Vec<SparseDistribution>,
        ap: Vec<String>,
        labels: Vec<LabelSet>,
    ) -> Result<Self> {
        if rows.len() != names.len() || labels.len() != names.len() {
            return Err(Error::InvalidModel(
                "states, kernel rows and labels must have equal length".into(),
            ));
        }
        if ap.len() > 32 {
            return Err(Error::InvalidModel("at most 32 atomic propositions".into()));
        }
        let n = names.len() as u64;
        for (i, row) in rows.iter().enumerate() {
            for (s, _) in row.entries() {
                if s.0 >= n {
                    return Err(Error::InvalidModel(format!(
                        "row {i} mentions undeclared state {s}"
                    )));
                }
            }
        }
        Ok(MarkovChain {
            kind: ChainKind::Finite(Arc::new(FiniteData { names, rows, labels })),
            ap,
        })
    }

    /// Build a lazily-enumerated countable chain from a successor function.
    /// The function returns `None` for states outside the chain.
    pub fn lazy<S, L>(succ: S, labels: L, ap: Vec<String>, cap: usize) -> Self
    where
        S: Fn(StateId) -> Option<SparseDistribution> + Send + Sync + 'static,
        L: Fn(StateId) -> LabelSet + Send + Sync + 'static,
    {
        MarkovChain {
            kind: ChainKind::Lazy(Arc::new(LazyData {
                succ: Arc::new(succ),
                labels: Arc::new(labels),
                cache: Mutex::new(LazyCache::default()),
                cap,
            })),
            ap,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, ChainKind::Finite(_))
    }

    /// Number of states of a finite chain.
    pub fn num_states(&self) -> Option<usize> {
        match &self.kind {
            ChainKind::Finite(data) => Some(data.names.len()),
            ChainKind::Lazy(_) => None,
        }
    }

    pub fn states(&self) -> Option<Vec<StateId>> {
        self.num_states()
            .map(|n| (0..n as u64).map(StateId).collect())
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn ap_index(&self, name: &str) -> Option<usize> {
        self.ap.iter().position(|a| a == name)
    }

    pub fn state_name(&self, s: StateId) -> String {
        match &self.kind {
            ChainKind::Finite(data) => data
                .names
                .get(s.0 as usize)
                .cloned()
                .unwrap_or_else(|| s.to_string()),
            ChainKind::Lazy(_) => s.to_string(),
        }
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        match &self.kind {
            ChainKind::Finite(data) => data
                .names
                .iter()
                .position(|n| n == name)
                .map(|i| StateId(i as u64)),
            ChainKind::Lazy(_) => name.parse::<u64>().ok().map(StateId),
        }
    }

    pub fn label(&self, s: StateId) -> LabelSet {
        match &self.kind {
            ChainKind::Finite(data) => {
                data.labels.get(s.0 as usize).copied().unwrap_or_default()
            }
            ChainKind::Lazy(data) => (data.labels)(s),
        }
    }

    /// The kernel row κ(s, ·).
    pub fn successors(&self, s: StateId) -> Result<SparseDistribution> {
        match &self.kind {
            ChainKind::Finite(data) => data
                .rows
                .get(s.0 as usize)
                .cloned()
                .ok_or_else(|| Error::UnknownState(s.to_string())),
            ChainKind::Lazy(data) => {
                let mut guard = data.cache.lock().unwrap();
                if let Some(row) = guard.rows.get(&s.0) {
                    return Ok(row.clone());
                }
                if guard.rows.len() >= data.cap {
                    return Err(Error::ResourceExhausted { cap: data.cap });
                }
                let row = (data.succ)(s).ok_or_else(|| Error::UnknownState(s.to_string()))?;
                guard.rows.insert(s.0, row.clone());
                Ok(row)
            }
        }
    }

    /// One application of the measure transformer: result(A) = Σ_s μ(s)·κ(s, A).
    pub fn step_transform(&self, mu: &SparseDistribution) -> Result<SparseDistribution> {
        let mut acc: BTreeMap<StateId, Prob> = BTreeMap::new();
        for (s, p) in mu.entries() {
            let row = self.successors(*s)?;
            for (t, q) in row.entries() {
                let w = p.clone() * q.clone();
                match acc.get_mut(t) {
                    Some(existing) => *existing += w,
                    None => {
                        acc.insert(*t, w);
                    }
                }
            }
        }
        SparseDistribution::new(acc.into_iter().collect())
    }

    /// Probability of the cylinder Cyl(A_0, …, A_n) from the initial
    /// distribution `mu`, by forward propagation of the restricted measure.
    pub fn cylinder_probability(
        &self,
        mu: &SparseDistribution,
        sets: &[StateSet],
    ) -> Result<Prob> {
        let Some((first, rest)) = sets.split_first() else {
            return Err(Error::HypothesisViolated(
                "cylinder needs a nonempty sequence of sets".into(),
            ));
        };
        // unnormalized frontier: mass of paths consistent with the prefix
        let mut frontier: Vec<(StateId, Prob)> = mu
            .entries()
            .iter()
            .filter_map(|(s, p)| match first.contains(*s) {
                Ok(true) => Some(Ok((*s, p.clone()))),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?;
        for set in rest {
            if frontier.is_empty() {
                return Ok(Prob::zero());
            }
            let mut acc: BTreeMap<StateId, Prob> = BTreeMap::new();
            for (s, p) in &frontier {
                let row = self.successors(*s)?;
                for (t, q) in row.entries() {
                    if set.contains(*t)? {
                        let w = p.clone() * q.clone();
                        match acc.get_mut(t) {
                            Some(existing) => *existing += w,
                            None => {
                                acc.insert(*t, w);
                            }
                        }
                    }
                }
            }
            frontier = acc.into_iter().collect();
        }
        Ok(frontier.into_iter().map(|(_, p)| p).sum())
    }

    /// Clone of this finite chain with all kernel entries demoted to float64.
    pub fn demote(&self) -> Result<MarkovChain> {
        match &self.kind {
            ChainKind::Finite(data) => {
                let rows = data
                    .rows
                    .iter()
                    .map(|r| {
                        SparseDistribution::new(
                            r.entries()
                                .iter()
                                .map(|(s, p)| (*s, p.demote()))
                                .collect(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                MarkovChain::finite(
                    data.names.clone(),
                    rows,
                    self.ap.clone(),
                    data.labels.clone(),
                )
            }
            ChainKind::Lazy(_) => Err(Error::HypothesisViolated(
                "only finite chains can be demoted".into(),
            )),
        }
    }

    /// States reachable from `from` (graph reachability, positive-probability
    /// edges), exploring at most `bound` BFS layers when given.
    pub fn reachable_from(
        &self,
        from: &[StateId],
        bound: Option<usize>,
    ) -> Result<BTreeSet<StateId>> {
        let mut seen: BTreeSet<StateId> = from.iter().copied().collect();
        let mut layer: Vec<StateId> = from.to_vec();
        let mut depth = 0usize;
        while !layer.is_empty() {
            if let Some(b) = bound {
                if depth >= b {
                    break;
                }
            }
            let mut next = Vec::new();
            for s in layer {
                for (t, _) in self.successors(s)?.entries() {
                    if seen.insert(*t) {
                        next.push(*t);
                    }
                }
            }
            layer = next;
            depth += 1;
        }
        Ok(seen)
    }
}

impl fmt::Debug for MarkovChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ChainKind::Finite(data) => {
                write!(f, "MarkovChain::Finite({} states)", data.names.len())
            }
            ChainKind::Lazy(data) => write!(f, "MarkovChain::Lazy(cap={})", data.cap),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn walk_successors() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        let row = walk.successors(StateId(0)).unwrap();
        assert_eq!(row.entries(), &[(StateId(1), Prob::one())]);
        let row = walk.successors(StateId(4)).unwrap();
        assert_eq!(row.get(StateId(5)), Prob::from_ratio(1, 3));
        assert_eq!(row.get(StateId(3)), Prob::from_ratio(2, 3));
    }

    #[test]
    fn absorbing_self_loop() {
        let chain = MarkovChain::finite(
            vec!["s".into()],
            vec![SparseDistribution::dirac(StateId(0))],
            vec![],
            vec![LabelSet::EMPTY],
        )
        .unwrap();
        let row = chain.successors(StateId(0)).unwrap();
        assert_eq!(row.entries(), &[(StateId(0), Prob::one())]);
    }

    #[test]
    fn unknown_state_is_reported() {
        let chain = MarkovChain::finite(
            vec!["a".into()],
            vec![SparseDistribution::dirac(StateId(0))],
            vec![],
            vec![LabelSet::EMPTY],
        )
        .unwrap();
        assert!(matches!(
            chain.successors(StateId(7)),
            Err(Error::UnknownState(_))
        ));
    }

    #[test]
    fn step_transform_on_walk() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        let d0 = SparseDistribution::dirac(StateId(0));
        assert_eq!(
            walk.step_transform(&d0).unwrap(),
            SparseDistribution::dirac(StateId(1))
        );
        let d1 = SparseDistribution::dirac(StateId(1));
        let out = walk.step_transform(&d1).unwrap();
        assert_eq!(out.get(StateId(0)), Prob::from_ratio(2, 3));
        assert_eq!(out.get(StateId(2)), Prob::from_ratio(1, 3));
        // uniform over {0,1}: {1 ↦ 1/2, 0 ↦ 1/3, 2 ↦ 1/6}
        let mu = SparseDistribution::uniform(&[StateId(0), StateId(1)]).unwrap();
        let out = walk.step_transform(&mu).unwrap();
        assert_eq!(out.get(StateId(1)), Prob::from_ratio(1, 2));
        assert_eq!(out.get(StateId(0)), Prob::from_ratio(1, 3));
        assert_eq!(out.get(StateId(2)), Prob::from_ratio(1, 6));
    }

    #[test]
    fn cylinder_probabilities() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        let d0 = SparseDistribution::dirac(StateId(0));
        let all = StateSet::full();
        let one = StateSet::explicit([StateId(1)]);
        assert!(walk
            .cylinder_probability(&d0, &[all, one])
            .unwrap()
            .is_one());

        let d1 = SparseDistribution::dirac(StateId(1));
        let p = walk
            .cylinder_probability(
                &d1,
                &[
                    StateSet::explicit([StateId(1)]),
                    StateSet::explicit([StateId(2)]),
                    StateSet::explicit([StateId(1)]),
                ],
            )
            .unwrap();
        assert_eq!(p, Prob::from_ratio(2, 9));

        let p = walk
            .cylinder_probability(&d1, &[StateSet::empty()])
            .unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn dirac_cylinder_consistency() {
        let walk = families::random_walk(Prob::from_ratio(1, 2));
        let d = SparseDistribution::dirac(StateId(3));
        assert!(walk
            .cylinder_probability(&d, &[StateSet::explicit([StateId(3)])])
            .unwrap()
            .is_one());
        assert!(walk
            .cylinder_probability(&d, &[StateSet::explicit([StateId(4)])])
            .unwrap()
            .is_zero());
    }

    #[test]
    fn conditional_distributions() {
        let mu = SparseDistribution::uniform(&[StateId(0), StateId(1), StateId(2)]).unwrap();
        let cond = mu
            .conditional(&StateSet::explicit([StateId(0), StateId(1)]))
            .unwrap();
        assert_eq!(
            cond,
            SparseDistribution::uniform(&[StateId(0), StateId(1)]).unwrap()
        );

        let mu = SparseDistribution::new(vec![
            (StateId(0), Prob::from_ratio(1, 4)),
            (StateId(1), Prob::from_ratio(3, 4)),
        ])
        .unwrap();
        assert_eq!(
            mu.conditional(&StateSet::explicit([StateId(1)])).unwrap(),
            SparseDistribution::dirac(StateId(1))
        );

        let mu = SparseDistribution::new(vec![
            (StateId(0), Prob::from_ratio(1, 3)),
            (StateId(1), Prob::from_ratio(1, 6)),
            (StateId(2), Prob::from_ratio(1, 2)),
        ])
        .unwrap();
        let cond = mu
            .conditional(&StateSet::explicit([StateId(1), StateId(2)]))
            .unwrap();
        assert_eq!(cond.get(StateId(1)), Prob::from_ratio(1, 4));
        assert_eq!(cond.get(StateId(2)), Prob::from_ratio(3, 4));

        assert!(matches!(
            mu.conditional(&StateSet::explicit([StateId(9)])),
            Err(Error::ZeroMass)
        ));
    }

    #[test]
    fn mass_violations_rejected() {
        let r = SparseDistribution::new(vec![(StateId(0), Prob::from_ratio(1, 2))]);
        assert!(r.is_err());
    }

    #[test]
    fn exploration_cap() {
        let chain = MarkovChain::lazy(
            |s| Some(SparseDistribution::dirac(StateId(s.0 + 1))),
            |_| LabelSet::EMPTY,
            vec![],
            10,
        );
        let mut s = StateId(0);
        let mut hit_cap = false;
        for _ in 0..20 {
            match chain.successors(s) {
                Ok(row) => s = row.entries()[0].0,
                Err(Error::ResourceExhausted { cap }) => {
                    assert_eq!(cap, 10);
                    hit_cap = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(hit_cap);
    }
}

