//! The thick graph: the finite region-level chain abstracting an automaton,
//! with an edge wherever one step of the automaton moves some configuration
//! of the source region into the target region with positive probability,
//! and uniform distributions over the successors of each node.

use super::region::{delay_successors, region_of, reset_region, Region};
use super::{DelayKind, StaModel};
use crate::chain::{LabelSet, MarkovChain, SparseDistribution, StateId};
use crate::error::{Error, Result};
use crate::prob::Prob;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// The thick graph of an automaton, reachable from its initial region.
pub struct ThickGraph {
    pub chain: MarkovChain,
    /// Node index → (location, region).
    pub nodes: Vec<(usize, Region)>,
    index: HashMap<(usize, Region), usize>,
    max_const: u32,
}

impl ThickGraph {
    pub fn node_of(&self, location: usize, region: &Region) -> Option<StateId> {
        self.index
            .get(&(location, region.clone()))
            .map(|&i| StateId(i as u64))
    }

    /// The thick-graph node of a concrete configuration.
    pub fn node_of_configuration(&self, config: &super::Configuration) -> Option<StateId> {
        let region = region_of(&config.valuation, self.max_const);
        self.node_of(config.location, &region)
    }

    pub fn max_const(&self) -> u32 {
        self.max_const
    }

    pub fn describe_node(&self, sta: &StaModel, id: StateId) -> String {
        let (location, region) = &self.nodes[id.0 as usize];
        format!(
            "({},{})",
            sta.locations[*location].name,
            region.describe(&sta.clocks)
        )
    }

    /// Nodes whose region is memoryless.
    pub fn memoryless_nodes(&self) -> BTreeSet<StateId> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, (_, r))| r.is_memoryless())
            .map(|(i, _)| StateId(i as u64))
            .collect()
    }

    /// Quotient by strong graph bisimulation refined from location labels:
    /// two nodes are merged when they share a location and, recursively,
    /// the same set of successor classes. The quotient is again a valid
    /// abstraction of the automaton (the composed map is still
    /// region-constant) and is the canonical minimal presentation of the
    /// thick graph.
    pub fn bisimulation_quotient(&self) -> Result<QuotientThickGraph> {
        let n = self.nodes.len();
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                Ok(self
                    .chain
                    .successors(StateId(i as u64))?
                    .entries()
                    .iter()
                    .map(|(s, _)| s.0 as usize)
                    .collect())
            })
            .collect::<Result<_>>()?;
        // initial partition by location
        let mut class: Vec<usize> = self.nodes.iter().map(|(l, _)| *l).collect();
        normalize_classes(&mut class);
        loop {
            let mut signature: Vec<(usize, BTreeSet<usize>)> = Vec::with_capacity(n);
            for i in 0..n {
                let targets: BTreeSet<usize> = succ[i].iter().map(|&j| class[j]).collect();
                signature.push((class[i], targets));
            }
            let mut seen: BTreeMap<(usize, BTreeSet<usize>), usize> = BTreeMap::new();
            let mut next: Vec<usize> = Vec::with_capacity(n);
            for sig in &signature {
                let fresh = seen.len();
                next.push(*seen.entry(sig.clone()).or_insert(fresh));
            }
            if next == class {
                break;
            }
            class = next;
        }
        let class_count = class.iter().max().map_or(0, |m| m + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); class_count];
        for (i, &c) in class.iter().enumerate() {
            members[c].push(i);
        }
        let mut rows = Vec::with_capacity(class_count);
        let mut names = Vec::with_capacity(class_count);
        let mut labels = Vec::with_capacity(class_count);
        for c in 0..class_count {
            let representative = members[c][0];
            let targets: BTreeSet<usize> =
                succ[representative].iter().map(|&j| class[j]).collect();
            let states: Vec<StateId> = targets.iter().map(|&t| StateId(t as u64)).collect();
            rows.push(SparseDistribution::uniform(&states)?);
            names.push(format!("class{c}"));
            labels.push(self.chain.label(StateId(representative as u64)));
        }
        let chain = MarkovChain::finite(names, rows, self.chain.ap().to_vec(), labels)?;
        Ok(QuotientThickGraph {
            chain,
            members,
            class,
        })
    }

    /// DOT rendering; `highlight` nodes are drawn with a double border.
    pub fn to_dot(&self, sta: &StaModel, highlight: &BTreeSet<StateId>) -> String {
        let mut out = String::from("digraph thick {\n  rankdir=LR;\n");
        for (i, (location, region)) in self.nodes.iter().enumerate() {
            let shape = if highlight.contains(&StateId(i as u64)) {
                "doubleoctagon"
            } else {
                "box"
            };
            out.push_str(&format!(
                "  n{i} [shape={shape},label=\"{}\\n{}\"];\n",
                sta.locations[*location].name,
                region.describe(&sta.clocks)
            ));
        }
        for i in 0..self.nodes.len() {
            if let Ok(row) = self.chain.successors(StateId(i as u64)) {
                for (t, p) in row.entries() {
                    out.push_str(&format!(
                        "  n{i} -> n{} [label=\"{}\"];\n",
                        t.0,
                        format_branch(p)
                    ));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn format_branch(p: &Prob) -> String {
    match p {
        Prob::Exact(_) => p.to_string(),
        Prob::Approx(v) => format!("{v:.4}"),
    }
}

fn normalize_classes(class: &mut [usize]) {
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    for c in class.iter_mut() {
        let fresh = remap.len();
        *c = *remap.entry(*c).or_insert(fresh);
    }
}

/// The quotient of a thick graph under bisimulation.
pub struct QuotientThickGraph {
    pub chain: MarkovChain,
    /// Class index → member node indices of the full graph.
    pub members: Vec<Vec<usize>>,
    /// Full-graph node index → class index.
    pub class: Vec<usize>,
}

/// Build the thick graph reachable from the initial configuration.
///
/// For each source node the delay-successor chain of its region is
/// intersected with the guards; whether punctual delay regions contribute
/// edges is decided by the location's distribution kind: continuous kinds
/// put no mass on single time points unless the whole enabled set is a
/// finite union of points, while deterministic-delay locations require it
/// to be one.
pub fn thick_graph(sta: &StaModel) -> Result<ThickGraph> {
    sta.validate()?;
    let max_const = sta.max_constant();
    let initial = (
        sta.initial.location,
        region_of(&sta.initial.valuation, max_const),
    );
    let mut nodes: Vec<(usize, Region)> = vec![initial.clone()];
    let mut index: HashMap<(usize, Region), usize> = HashMap::from([(initial, 0)]);
    let mut rows: Vec<Vec<StateId>> = Vec::new();
    let mut worklist = vec![0usize];
    while let Some(current) = worklist.pop() {
        let (location, region) = nodes[current].clone();
        let mut successors: BTreeSet<(usize, Region)> = BTreeSet::new();
        let mut punctual_successors: BTreeSet<(usize, Region)> = BTreeSet::new();
        let mut has_open = false;
        for (delay_region, punctual) in delay_successors(&region, max_const) {
            for (_, edge) in sta.edges_from(location) {
                if !edge.guard.satisfied_by_region(&delay_region) {
                    continue;
                }
                let landed = reset_region(&delay_region, &edge.resets, max_const);
                if punctual {
                    punctual_successors.insert((edge.target, landed));
                } else {
                    has_open = true;
                    successors.insert((edge.target, landed));
                }
            }
        }
        let chosen = match sta.locations[location].kind {
            DelayKind::UniformOverEnabled | DelayKind::Exponential(_) => {
                // continuous kinds degrade to uniform-over-points when the
                // enabled set is punctual
                if has_open {
                    successors
                } else {
                    punctual_successors
                }
            }
            DelayKind::DiracAt => {
                if has_open {
                    return Err(Error::InvalidModel(format!(
                        "location {:?} declares a deterministic delay but enables a positive-length delay set from region {}",
                        sta.locations[location].name,
                        region.describe(&sta.clocks)
                    )));
                }
                punctual_successors
            }
        };
        if chosen.is_empty() {
            return Err(Error::DeadlockedConfiguration);
        }
        let mut row = Vec::new();
        for target in chosen {
            let id = match index.get(&target) {
                Some(&i) => i,
                None => {
                    let i = nodes.len();
                    nodes.push(target.clone());
                    index.insert(target, i);
                    worklist.push(i);
                    i
                }
            };
            row.push(StateId(id as u64));
        }
        if rows.len() <= current {
            rows.resize(current + 1, Vec::new());
        }
        rows[current] = row;
    }
    let names: Vec<String> = nodes
        .iter()
        .map(|(l, r)| format!("({},{})", sta.locations[*l].name, r.describe(&sta.clocks)))
        .collect();
    let labels: Vec<LabelSet> = nodes.iter().map(|(l, _)| sta.label_set(*l)).collect();
    let distributions = rows
        .iter()
        .map(|row| SparseDistribution::uniform(row))
        .collect::<Result<Vec<_>>>()?;
    let chain = MarkovChain::finite(names, distributions, sta.ap.clone(), labels)?;
    Ok(ThickGraph {
        chain,
        nodes,
        index,
        max_const,
    })
}

/// A_max for single-clock automata: every node whose region is the zero
/// region, plus every node all of whose thick-graph descendants stay in the
/// same region.
pub fn oneclock_terminal_nodes(graph: &ThickGraph) -> Result<BTreeSet<StateId>> {
    let zero = Region::zero(1);
    let n = graph.nodes.len();
    let mut attractor = BTreeSet::new();
    for i in 0..n {
        let (_, region) = &graph.nodes[i];
        if *region == zero {
            attractor.insert(StateId(i as u64));
            continue;
        }
        let reachable = graph.chain.reachable_from(&[StateId(i as u64)], None)?;
        if reachable
            .iter()
            .all(|s| graph.nodes[s.0 as usize].1 == *region)
        {
            attractor.insert(StateId(i as u64));
        }
    }
    Ok(attractor)
}
