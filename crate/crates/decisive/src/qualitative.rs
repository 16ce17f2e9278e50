//! Avoid-sets, decisiveness evidence, attractor certification, bottom
//! components of attractor graphs and qualitative verdicts.

use crate::chain::{MarkovChain, SparseDistribution, StateId, StateSet};
use crate::error::{Error, Result};
use crate::graph;
use crate::omega::ProductChain;
use crate::solve;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

/// How an avoid-set was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AvoidProvenance {
    ExactFiniteGraph,
    BoundedExploration { depth: usize },
    UserSupplied,
}

/// The avoid-set B̃ of a target set B: states from which B is reached with
/// probability zero. It is a probabilistic sink: kernel mass from a B̃ state
/// stays inside B̃.
#[derive(Clone, Debug)]
pub struct AvoidSet {
    set: StateSet,
    provenance: AvoidProvenance,
}

impl AvoidSet {
    pub fn set(&self) -> &StateSet {
        &self.set
    }

    pub fn provenance(&self) -> &AvoidProvenance {
        &self.provenance
    }

    pub fn contains(&self, s: StateId) -> Result<bool> {
        self.set.contains(s)
    }

    /// Wrap a user-supplied avoid-set. Explicit sets have their sink
    /// property checked immediately; predicate sets are checked lazily by
    /// the consumers, one absorbed state at a time.
    pub fn user_supplied(chain: &MarkovChain, set: StateSet) -> Result<AvoidSet> {
        if let StateSet::Explicit(states) = &set {
            for s in states {
                for (t, _) in chain.successors(*s)?.entries() {
                    if !states.contains(t) {
                        return Err(Error::HypothesisViolated(format!(
                            "sink property fails: {s} leaves the declared avoid-set via {t}"
                        )));
                    }
                }
            }
        }
        Ok(AvoidSet {
            set,
            provenance: AvoidProvenance::UserSupplied,
        })
    }

    /// Check the sink property at one state (used by schemes when absorbing
    /// mass into a lazily-validated avoid-set).
    pub fn check_sink_at(&self, chain: &MarkovChain, s: StateId) -> Result<()> {
        for (t, _) in chain.successors(s)?.entries() {
            if !self.set.contains(*t)? {
                return Err(Error::HypothesisViolated(format!(
                    "sink property fails: {s} leaves the avoid-set via {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Compute the avoid-set of `b`. On finite chains this is the exact
/// complement of the states co-reachable to `b`. On countable chains a
/// closure certificate is required (taken from `b` or passed explicitly via
/// [`avoid_set_bounded`]): membership is then decided by forward search
/// truncated at the certified depth.
pub fn avoid_set(chain: &MarkovChain, b: &StateSet) -> Result<AvoidSet> {
    if chain.is_finite() {
        return avoid_set_finite(chain, b);
    }
    match b.certificate() {
        Some(depth) => avoid_set_bounded(chain, b, depth),
        None => Err(Error::CertificateRequired(
            "avoid-set on a countable chain needs a closure certificate".into(),
        )),
    }
}

fn avoid_set_finite(chain: &MarkovChain, b: &StateSet) -> Result<AvoidSet> {
    let n = chain.num_states().expect("finite");
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            Ok(chain
                .successors(StateId(i as u64))?
                .entries()
                .iter()
                .map(|(s, _)| s.0 as usize)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut targets = BTreeSet::new();
    for i in 0..n {
        if b.contains(StateId(i as u64))? {
            targets.insert(i);
        }
    }
    let can_reach = graph::co_reachable(n, &adj, &targets);
    let avoid: BTreeSet<StateId> = (0..n)
        .filter(|i| !can_reach.contains(i))
        .map(|i| StateId(i as u64))
        .collect();
    Ok(AvoidSet {
        set: StateSet::Explicit(avoid),
        provenance: AvoidProvenance::ExactFiniteGraph,
    })
}

/// Avoid-set over a countable chain with an explicit certificate: a state
/// belongs to it when forward exploration bounded by `depth` does not hit
/// `b`. The certificate is the caller's assertion that `depth` layers decide
/// reachability to `b` from every queried state.
pub fn avoid_set_bounded(chain: &MarkovChain, b: &StateSet, depth: usize) -> Result<AvoidSet> {
    let chain = chain.clone();
    let b = b.clone();
    let memo: Arc<Mutex<HashMap<u64, bool>>> = Arc::new(Mutex::new(HashMap::new()));
    let test = move |s: StateId| -> Result<bool> {
        if let Some(&v) = memo.lock().unwrap().get(&s.0) {
            return Ok(v);
        }
        let mut seen = BTreeSet::from([s]);
        let mut layer = vec![s];
        let mut found = b.contains(s)?;
        let mut d = 0usize;
        while !found && !layer.is_empty() && d < depth {
            let mut next = Vec::new();
            for v in layer {
                for (t, _) in chain.successors(v)?.entries() {
                    if seen.insert(*t) {
                        if b.contains(*t)? {
                            found = true;
                        }
                        next.push(*t);
                    }
                }
                if found {
                    break;
                }
            }
            layer = next;
            d += 1;
        }
        let in_avoid = !found;
        memo.lock().unwrap().insert(s.0, in_avoid);
        Ok(in_avoid)
    };
    Ok(AvoidSet {
        set: StateSet::predicate(test, Some(depth), "bounded-exploration avoid-set"),
        provenance: AvoidProvenance::BoundedExploration { depth },
    })
}

/// The avoid-set of the avoid-set of `b`.
pub fn double_avoid_set(chain: &MarkovChain, b: &StateSet) -> Result<AvoidSet> {
    let inner = avoid_set(chain, b)?;
    let inner_set = match (&inner.set, b.certificate()) {
        (StateSet::Explicit(_), _) => inner.set.clone(),
        (StateSet::Predicate { .. }, Some(depth)) => {
            // carry the certificate so the outer computation stays bounded
            let s = inner.set.clone();
            StateSet::predicate(move |x| s.contains(x), Some(depth), "inner avoid-set")
        }
        (StateSet::Predicate { .. }, None) => inner.set.clone(),
    };
    avoid_set(chain, &inner_set)
}

/// Decide whether `a` is an attractor: reached almost surely from `from`
/// (or from every state when `from` is `None`). Exact on finite chains; on
/// countable chains this validates the necessary graph conditions within the
/// certificate depth, the sufficiency being the caller's obligation.
pub fn is_attractor(
    chain: &MarkovChain,
    a: &StateSet,
    from: Option<&SparseDistribution>,
) -> Result<bool> {
    if chain.is_finite() {
        let values = solve::exact_reachability_finite(chain, a)?;
        return Ok(match from {
            Some(mu) => mu
                .entries()
                .iter()
                .all(|(s, _)| values[s.0 as usize].is_one()),
            None => values.iter().all(|v| v.is_one()),
        });
    }
    let depth = a.certificate().ok_or_else(|| {
        Error::CertificateRequired("attractor check on a countable chain needs a certificate".into())
    })?;
    let mu = from.ok_or_else(|| {
        Error::CertificateRequired(
            "attractor check on a countable chain needs an initial distribution".into(),
        )
    })?;
    let avoid = avoid_set_bounded(chain, a, depth)?;
    let support: Vec<StateId> = mu.support().collect();
    let explored = chain.reachable_from(&support, Some(depth))?;
    for s in explored {
        if avoid.contains(s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bottom strongly connected components of a finite chain, ordered by least
/// state, each sorted.
pub fn bsccs(chain: &MarkovChain) -> Result<Vec<Vec<StateId>>> {
    let n = chain
        .num_states()
        .ok_or_else(|| Error::HypothesisViolated("finite chain required".into()))?;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            Ok(chain
                .successors(StateId(i as u64))?
                .entries()
                .iter()
                .map(|(s, _)| s.0 as usize)
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(graph::bottom_sccs(n, &adj)
        .into_iter()
        .map(|c| c.into_iter().map(|i| StateId(i as u64)).collect())
        .collect())
}

/// Why a decisiveness hypothesis (or an attractor hypothesis) is believed
/// to hold. `Assumed` evidence taints every downstream result.
#[derive(Clone, Debug, Serialize)]
pub enum DecisivenessEvidence {
    /// The chain is finite, hence decisive for every target.
    FiniteChain,
    /// A verified finite attractor exists, hence the chain is decisive.
    FiniteAttractor { description: String },
    /// The chain is a sound abstraction target of a decisive chain.
    SoundAbstractionOfDecisive { handle: String },
    /// Declared by the user without verification; results are tainted.
    Assumed { note: String },
}

impl DecisivenessEvidence {
    pub fn is_assumed(&self) -> bool {
        matches!(self, DecisivenessEvidence::Assumed { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            DecisivenessEvidence::FiniteChain => "finite chain".into(),
            DecisivenessEvidence::FiniteAttractor { description } => {
                format!("finite attractor: {description}")
            }
            DecisivenessEvidence::SoundAbstractionOfDecisive { handle } => {
                format!("sound abstraction of a decisive chain: {handle}")
            }
            DecisivenessEvidence::Assumed { note } => format!("ASSUMED (unverified): {note}"),
        }
    }
}

/// Qualitative outcome of a reachability-style query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    AlmostSure,
    Positive,
    Zero,
}

/// A verdict together with the evidence chain that justifies the
/// characterization used to compute it.
#[derive(Clone, Debug, Serialize)]
pub struct QualitativeReport {
    pub verdict: Verdict,
    pub evidence: DecisivenessEvidence,
    pub tainted: bool,
    pub notes: Vec<String>,
}

fn search_bound(chain: &MarkovChain, sets: &[&StateSet]) -> Option<usize> {
    if chain.is_finite() {
        None // full exploration terminates
    } else {
        sets.iter().filter_map(|s| s.certificate()).max().or(None)
    }
}

/// Is some state of `goal` reachable from `from` through states satisfying
/// `through` (the start states themselves must satisfy `through`)?
fn constrained_reachable(
    chain: &MarkovChain,
    from: &[StateId],
    through: impl Fn(StateId) -> Result<bool>,
    goal: impl Fn(StateId) -> Result<bool>,
    bound: Option<usize>,
) -> Result<bool> {
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut layer: Vec<StateId> = Vec::new();
    for &s in from {
        if !through(s)? {
            continue;
        }
        if goal(s)? {
            return Ok(true);
        }
        if seen.insert(s) {
            layer.push(s);
        }
    }
    let mut depth = 0usize;
    while !layer.is_empty() {
        if let Some(b) = bound {
            if depth >= b {
                break;
            }
        }
        let mut next = Vec::new();
        for s in layer {
            for (t, _) in chain.successors(s)?.entries() {
                if seen.contains(t) {
                    continue;
                }
                if goal(*t)? {
                    return Ok(true);
                }
                if through(*t)? {
                    seen.insert(*t);
                    next.push(*t);
                }
            }
        }
        layer = next;
        depth += 1;
    }
    Ok(false)
}

/// Qualitative reachability verdict for P_μ(F B), justified by a
/// decisiveness hypothesis: almost-sure holds exactly when no ¬B-path from
/// the support of μ reaches the avoid-set of B.
pub fn qualitative_reachability(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    b: &StateSet,
    evidence: &DecisivenessEvidence,
) -> Result<QualitativeReport> {
    let avoid = avoid_set(chain, b)?;
    let support: Vec<StateId> = mu.support().collect();
    let mut all_in_avoid = true;
    for &s in &support {
        if !avoid.contains(s)? {
            all_in_avoid = false;
            break;
        }
    }
    let verdict = if all_in_avoid {
        Verdict::Zero
    } else {
        let bound = search_bound(chain, &[b]);
        let hits_avoid = constrained_reachable(
            chain,
            &support,
            |s| Ok(!b.contains(s)?),
            |s| avoid.contains(s),
            bound,
        )?;
        if hits_avoid {
            Verdict::Positive
        } else {
            Verdict::AlmostSure
        }
    };
    Ok(QualitativeReport {
        verdict,
        evidence: evidence.clone(),
        tainted: evidence.is_assumed(),
        notes: vec![format!("avoid-set provenance: {:?}", avoid.provenance())],
    })
}

/// Qualitative repeated reachability verdict for P_μ(G F B): almost-sure
/// when the avoid-set is unreachable, positive when the double avoid-set is
/// reachable, zero otherwise. Requires strong (resp. persistent)
/// decisiveness evidence.
pub fn qualitative_repeated(
    chain: &MarkovChain,
    mu: &SparseDistribution,
    b: &StateSet,
    evidence: &DecisivenessEvidence,
) -> Result<QualitativeReport> {
    let avoid = avoid_set(chain, b)?;
    let double = double_avoid_set(chain, b)?;
    let support: Vec<StateId> = mu.support().collect();
    let bound = search_bound(chain, &[b]);
    let avoid_reachable = constrained_reachable(
        chain,
        &support,
        |_| Ok(true),
        |s| avoid.contains(s),
        bound,
    )?;
    let verdict = if !avoid_reachable {
        Verdict::AlmostSure
    } else {
        let double_reachable = constrained_reachable(
            chain,
            &support,
            |_| Ok(true),
            |s| double.contains(s),
            bound,
        )?;
        if double_reachable {
            Verdict::Positive
        } else {
            Verdict::Zero
        }
    };
    Ok(QualitativeReport {
        verdict,
        evidence: evidence.clone(),
        tainted: evidence.is_assumed(),
        notes: vec![format!(
            "avoid-set provenance: {:?}; double avoid-set provenance: {:?}",
            avoid.provenance(),
            double.provenance()
        )],
    })
}

/// The finite graph over attractor states of a product chain: an edge
/// records the existence of a path in the product, bottom components carry
/// the set of automaton locations reachable from them.
#[derive(Clone, Debug)]
pub struct AttractorGraph {
    vertices: Vec<StateId>,
    edges: Vec<Vec<usize>>,
    bsccs: Vec<Vec<usize>>,
    recurring: Vec<BTreeSet<usize>>,
}

impl AttractorGraph {
    pub fn vertices(&self) -> &[StateId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Bottom components as lists of vertex indices.
    pub fn bsccs(&self) -> &[Vec<usize>] {
        &self.bsccs
    }

    /// Automaton locations reachable from each bottom component.
    pub fn recurring_sets(&self) -> &[BTreeSet<usize>] {
        &self.recurring
    }

    pub fn bscc_states(&self, index: usize) -> Vec<StateId> {
        self.bsccs[index].iter().map(|&i| self.vertices[i]).collect()
    }
}

/// Build the attractor graph of a product chain over the given (finite)
/// vertex set. Finite products are explored exactly; lazy products require
/// `bound`, a certified exploration depth deciding reachability between
/// vertices and the recurring location sets.
pub fn attractor_graph(
    product: &ProductChain,
    vertices: &BTreeSet<StateId>,
    bound: Option<usize>,
) -> Result<AttractorGraph> {
    if !product.chain().is_finite() && bound.is_none() {
        return Err(Error::CertificateRequired(
            "attractor graph over a lazy product needs an exploration bound".into(),
        ));
    }
    let vertices: Vec<StateId> = vertices.iter().copied().collect();
    let index_of: HashMap<StateId, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i))
        .collect();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    let mut closures: Vec<BTreeSet<StateId>> = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let closure = product.chain().reachable_from(&[*v], bound)?;
        for t in &closure {
            if let Some(&j) = index_of.get(t) {
                edges[i].push(j);
            }
        }
        edges[i].sort_unstable();
        edges[i].dedup();
        closures.push(closure);
    }
    let bscc_list = graph::bottom_sccs(vertices.len(), &edges);
    let recurring = bscc_list
        .iter()
        .map(|component| {
            let mut locations = BTreeSet::new();
            for &i in component {
                for t in &closures[i] {
                    locations.insert(product.decode(*t).1);
                }
            }
            locations
        })
        .collect();
    Ok(AttractorGraph {
        vertices,
        edges,
        bsccs: bscc_list,
        recurring,
    })
}

/// Bottom components whose recurring location set belongs to the Muller
/// family (returned as indices into `graph.bsccs()`).
pub fn good_bsccs(graph: &AttractorGraph, muller: &[BTreeSet<usize>]) -> Vec<usize> {
    (0..graph.bsccs.len())
        .filter(|&i| muller.iter().any(|f| *f == graph.recurring[i]))
        .collect()
}

/// Definitional route for good bottom components: some accepting set F of
/// the family is (a) an upper bound for every location reachable from the
/// component and (b) entirely realized by reachable states. Quadratic;
/// kept as a redundant checker for the direct recurring-set test.
pub fn good_bsccs_by_definition(
    product: &ProductChain,
    graph: &AttractorGraph,
    muller: &[BTreeSet<usize>],
    bound: Option<usize>,
) -> Result<Vec<usize>> {
    let mut good = Vec::new();
    for (i, component) in graph.bsccs.iter().enumerate() {
        let states: Vec<StateId> = component.iter().map(|&v| graph.vertices[v]).collect();
        let closure = product.chain().reachable_from(&states, bound)?;
        let reachable_locations: BTreeSet<usize> =
            closure.iter().map(|s| product.decode(*s).1).collect();
        let is_good = muller.iter().any(|f| {
            let upper = reachable_locations.iter().all(|q| f.contains(q));
            let realized = f.iter().all(|q| reachable_locations.contains(q));
            upper && realized
        });
        if is_good {
            good.push(i);
        }
    }
    Ok(good)
}

/// Almost-sure satisfaction of the product's Muller condition: every bottom
/// component of the attractor graph reachable from the lifted initial
/// distribution must be good.
pub fn almost_sure_omega(
    product: &ProductChain,
    mu_pair: &SparseDistribution,
    attractor_vertices: &BTreeSet<StateId>,
    bound: Option<usize>,
) -> Result<bool> {
    let graph = attractor_graph(product, attractor_vertices, bound)?;
    let good: BTreeSet<usize> = good_bsccs(&graph, product.muller_family())
        .into_iter()
        .collect();
    let support: Vec<StateId> = mu_pair.support().collect();
    let reachable = product.chain().reachable_from(&support, bound)?;
    for (i, component) in graph.bsccs().iter().enumerate() {
        if good.contains(&i) {
            continue;
        }
        let touched = component
            .iter()
            .any(|&v| reachable.contains(&graph.vertices()[v]));
        if touched {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::LabelSet;
    use crate::families;
    use crate::omega::{product, Completion, MullerAutomaton};
    use crate::prob::Prob;

    fn two_absorbing() -> MarkovChain {
        // c → a,b with 1/2 each, a and b absorbing
        MarkovChain::finite(
            vec!["c".into(), "a".into(), "b".into()],
            vec![
                SparseDistribution::uniform(&[StateId(1), StateId(2)]).unwrap(),
                SparseDistribution::dirac(StateId(1)),
                SparseDistribution::dirac(StateId(2)),
            ],
            vec![],
            vec![LabelSet::EMPTY; 3],
        )
        .unwrap()
    }

    #[test]
    fn avoid_set_on_strongly_connected_chain_is_empty() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 2)).unwrap();
        for target in 0..3u64 {
            let avoid = avoid_set(&chain, &StateSet::explicit([StateId(target)])).unwrap();
            assert_eq!(avoid.set().as_explicit().unwrap().len(), 0);
        }
    }

    #[test]
    fn avoid_set_of_everything_is_empty() {
        let chain = two_absorbing();
        let avoid = avoid_set(&chain, &StateSet::full()).unwrap();
        assert!(avoid.set().as_explicit().unwrap().is_empty());
    }

    #[test]
    fn double_avoid_on_two_absorbing() {
        let chain = two_absorbing();
        let b = StateSet::explicit([StateId(1)]);
        let avoid = avoid_set(&chain, &b).unwrap();
        assert_eq!(
            avoid.set().as_explicit().unwrap(),
            &BTreeSet::from([StateId(2)])
        );
        let double = double_avoid_set(&chain, &b).unwrap();
        assert_eq!(
            double.set().as_explicit().unwrap(),
            &BTreeSet::from([StateId(1)])
        );
    }

    #[test]
    fn double_avoid_of_empty_avoid_is_everything() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 3)).unwrap();
        let double = double_avoid_set(&chain, &StateSet::explicit([StateId(2)])).unwrap();
        assert_eq!(double.set().as_explicit().unwrap().len(), 3);
    }

    #[test]
    fn bounded_avoid_set_on_walk() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        // every state reaches 0 (downward moves), so the avoid-set is empty
        let avoid =
            avoid_set_bounded(&walk, &StateSet::explicit([StateId(0)]), 64).unwrap();
        for s in [0u64, 1, 5, 30] {
            assert!(!avoid.contains(StateId(s)).unwrap());
        }
    }

    #[test]
    fn certificate_required_on_lazy() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        assert!(matches!(
            avoid_set(&walk, &StateSet::explicit([StateId(0)])),
            Err(Error::CertificateRequired(_))
        ));
    }

    #[test]
    fn user_supplied_sink_validation() {
        let chain = two_absorbing();
        assert!(AvoidSet::user_supplied(&chain, StateSet::explicit([StateId(2)])).is_ok());
        // {c} is not a sink: it leaks to a and b
        assert!(AvoidSet::user_supplied(&chain, StateSet::explicit([StateId(0)])).is_err());
    }

    #[test]
    fn attractor_checks() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 2)).unwrap();
        assert!(is_attractor(&chain, &StateSet::explicit([StateId(0)]), None).unwrap());
        assert!(is_attractor(&chain, &StateSet::full(), None).unwrap());
        let truncated = families::truncated_walk(Prob::from_ratio(1, 3), 40).unwrap();
        assert!(is_attractor(&truncated, &StateSet::explicit([StateId(0)]), None).unwrap());
        let chain = two_absorbing();
        assert!(!is_attractor(&chain, &StateSet::explicit([StateId(1)]), None).unwrap());
    }

    #[test]
    fn bscc_shapes() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 2)).unwrap();
        assert_eq!(
            bsccs(&chain).unwrap(),
            vec![vec![StateId(0), StateId(1), StateId(2)]]
        );
        let chain = two_absorbing();
        assert_eq!(
            bsccs(&chain).unwrap(),
            vec![vec![StateId(1)], vec![StateId(2)]]
        );
    }

    #[test]
    fn reachability_verdicts() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 2)).unwrap();
        let report = qualitative_reachability(
            &chain,
            &SparseDistribution::dirac(StateId(1)),
            &StateSet::explicit([StateId(0)]),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::AlmostSure);
        assert!(!report.tainted);

        let chain = two_absorbing();
        let report = qualitative_reachability(
            &chain,
            &SparseDistribution::dirac(StateId(0)),
            &StateSet::explicit([StateId(1)]),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Positive);

        // support inside the avoid-set
        let report = qualitative_reachability(
            &chain,
            &SparseDistribution::dirac(StateId(2)),
            &StateSet::explicit([StateId(1)]),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Zero);
    }

    #[test]
    fn repeated_verdicts() {
        let chain = families::three_state_quotient(Prob::from_ratio(1, 2)).unwrap();
        let report = qualitative_repeated(
            &chain,
            &SparseDistribution::dirac(StateId(0)),
            &StateSet::explicit([StateId(0)]),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::AlmostSure);

        let chain = two_absorbing();
        let report = qualitative_repeated(
            &chain,
            &SparseDistribution::dirac(StateId(0)),
            &StateSet::explicit([StateId(1)]),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Positive);

        let report = qualitative_repeated(
            &chain,
            &SparseDistribution::dirac(StateId(2)),
            &StateSet::explicit([StateId(1)]),
            &DecisivenessEvidence::FiniteChain,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Zero);
    }

    fn cycle_dma() -> MullerAutomaton {
        MullerAutomaton::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            "q0",
            vec!["a".into()],
            vec![
                ("q0".into(), LabelSet::singleton(0), "q1".into()),
                ("q1".into(), LabelSet::singleton(0), "q2".into()),
                ("q2".into(), LabelSet::singleton(0), "q1".into()),
            ],
            vec![vec!["q1".into(), "q2".into()]],
            Completion::AddSink,
        )
        .unwrap()
    }

    #[test]
    fn attractor_graph_on_lazy_walk_product() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        let dma = cycle_dma();
        let prod = product(&walk, &dma).unwrap();
        // attractor {0,1} of the walk, lifted over the traversed locations
        let vertices = BTreeSet::from([
            prod.encode(StateId(0), 0),
            prod.encode(StateId(0), 2),
            prod.encode(StateId(1), 1),
        ]);
        let graph = attractor_graph(&prod, &vertices, Some(16)).unwrap();
        assert_eq!(graph.bsccs().len(), 1);
        let bscc: BTreeSet<StateId> = graph.bscc_states(0).into_iter().collect();
        assert_eq!(
            bscc,
            BTreeSet::from([prod.encode(StateId(0), 2), prod.encode(StateId(1), 1)])
        );
        assert_eq!(graph.recurring_sets()[0], BTreeSet::from([1, 2]));
        let good = good_bsccs(&graph, prod.muller_family());
        assert_eq!(good, vec![0]);

        assert!(almost_sure_omega(
            &prod,
            &prod
                .lift_initial(&SparseDistribution::dirac(StateId(0)))
                .unwrap(),
            &vertices,
            Some(16)
        )
        .unwrap());
    }

    #[test]
    fn attractor_graph_requires_bound_on_lazy() {
        let walk = families::random_walk(Prob::from_ratio(1, 3));
        let prod = product(&walk, &cycle_dma()).unwrap();
        let vertices = BTreeSet::from([prod.encode(StateId(0), 0)]);
        assert!(matches!(
            attractor_graph(&prod, &vertices, None),
            Err(Error::CertificateRequired(_))
        ));
    }

    #[test]
    fn singleton_absorbing_vertex() {
        let chain = two_absorbing();
        let dma = MullerAutomaton::new(
            vec!["q".into()],
            "q",
            vec![],
            vec![("q".into(), LabelSet::EMPTY, "q".into())],
            vec![vec!["q".into()]],
            Completion::Reject,
        )
        .unwrap();
        let prod = product(&chain, &dma).unwrap();
        let vertices = BTreeSet::from([prod.encode(StateId(1), 0)]);
        let graph = attractor_graph(&prod, &vertices, None).unwrap();
        assert_eq!(graph.bsccs().len(), 1);
        assert_eq!(graph.edges()[0], vec![0]);
        assert_eq!(graph.recurring_sets()[0], BTreeSet::from([0]));
    }

    #[test]
    fn good_bscc_family_variants() {
        let chain = families::truncated_walk(Prob::from_ratio(1, 3), 20).unwrap();
        let prod = product(&chain, &cycle_dma()).unwrap();
        let vertices: BTreeSet<StateId> = (0..2u64)
            .flat_map(|s| (0..4).map(move |q| StateId(s * 4 + q)))
            .collect();
        let graph = attractor_graph(&prod, &vertices, None).unwrap();
        assert!(!good_bsccs(&graph, prod.muller_family()).is_empty());
        assert!(good_bsccs(&graph, &[]).is_empty());
        let by_def =
            good_bsccs_by_definition(&prod, &graph, prod.muller_family(), None).unwrap();
        assert_eq!(by_def, good_bsccs(&graph, prod.muller_family()));
    }

    #[test]
    fn bad_bscc_detected() {
        // two absorbing states with different labels; accepting only {a-loc}
        let chain = MarkovChain::finite(
            vec!["c".into(), "a".into(), "b".into()],
            vec![
                SparseDistribution::uniform(&[StateId(1), StateId(2)]).unwrap(),
                SparseDistribution::dirac(StateId(1)),
                SparseDistribution::dirac(StateId(2)),
            ],
            vec!["win".into()],
            vec![LabelSet::EMPTY, LabelSet::singleton(0), LabelSet::EMPTY],
        )
        .unwrap();
        let dma = MullerAutomaton::new(
            vec!["no".into(), "yes".into()],
            "no",
            vec!["win".into()],
            vec![
                ("no".into(), LabelSet::EMPTY, "no".into()),
                ("no".into(), LabelSet::singleton(0), "yes".into()),
                ("yes".into(), LabelSet::singleton(0), "yes".into()),
                ("yes".into(), LabelSet::EMPTY, "no".into()),
            ],
            vec![vec!["yes".into()]],
            Completion::Reject,
        )
        .unwrap();
        let prod = product(&chain, &dma).unwrap();
        let vertices: BTreeSet<StateId> = prod
            .chain()
            .states()
            .unwrap()
            .into_iter()
            .collect();
        let mu = prod
            .lift_initial(&SparseDistribution::dirac(StateId(0)))
            .unwrap();
        // one good (absorb in a: location stays "yes"), one bad component
        assert!(!almost_sure_omega(&prod, &mu, &vertices, None).unwrap());
    }
}
