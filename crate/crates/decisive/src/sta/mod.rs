//! Stochastic timed automata: guarded-edge timed automata whose delays are
//! drawn from per-location distributions and whose edges are drawn by
//! weight among the enabled ones.

pub mod pipeline;
pub mod region;
pub mod sim;
pub mod thick;

use crate::chain::LabelSet;
use crate::error::{Error, Result};
use region::{delay_successors, ClockPart, Region};
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

/// A conjunction of clock–constant comparisons with integer constants.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Guard {
    pub conjuncts: Vec<(usize, Cmp, u32)>,
}

impl Guard {
    pub fn parse(text: &str, clocks: &[String]) -> Result<Guard> {
        let text = text.trim();
        if text.is_empty() || text == "true" {
            return Ok(Guard::default());
        }
        let mut conjuncts = Vec::new();
        for part in text.split("&&") {
            let part = part.trim();
            let (op_at, op_len, cmp) = ["<=", ">=", "==", "<", ">", "="]
                .iter()
                .find_map(|op| part.find(op).map(|i| (i, op.len(), *op)))
                .ok_or_else(|| Error::Parse(format!("no comparison operator in {part:?}")))?;
            let clock_name = part[..op_at].trim();
            let constant = part[op_at + op_len..].trim();
            let clock = clocks
                .iter()
                .position(|c| c == clock_name)
                .ok_or_else(|| Error::Parse(format!("unknown clock {clock_name:?}")))?;
            let constant: u32 = constant
                .parse()
                .map_err(|_| Error::Parse(format!("guard constant must be a natural: {part:?}")))?;
            let cmp = match cmp {
                "<" => Cmp::Lt,
                "<=" => Cmp::Le,
                "=" | "==" => Cmp::Eq,
                ">=" => Cmp::Ge,
                ">" => Cmp::Gt,
                _ => unreachable!(),
            };
            conjuncts.push((clock, cmp, constant));
        }
        Ok(Guard { conjuncts })
    }

    /// Guards never split regions: a region either wholly satisfies a
    /// conjunct or wholly avoids it.
    pub fn satisfied_by_region(&self, region: &Region) -> bool {
        self.conjuncts.iter().all(|(clock, cmp, c)| {
            let part = region.parts()[*clock];
            match (cmp, part) {
                (Cmp::Lt, ClockPart::At(k)) => k < *c,
                (Cmp::Lt, ClockPart::In(k)) => k + 1 <= *c,
                (Cmp::Lt, ClockPart::Above) => false,
                (Cmp::Le, ClockPart::At(k)) => k <= *c,
                (Cmp::Le, ClockPart::In(k)) => k + 1 <= *c,
                (Cmp::Le, ClockPart::Above) => false,
                (Cmp::Eq, ClockPart::At(k)) => k == *c,
                (Cmp::Eq, _) => false,
                (Cmp::Ge, ClockPart::At(k)) => k >= *c,
                (Cmp::Ge, ClockPart::In(k)) => k >= *c,
                (Cmp::Ge, ClockPart::Above) => true,
                (Cmp::Gt, ClockPart::At(k)) => k > *c,
                (Cmp::Gt, ClockPart::In(k)) => k >= *c,
                (Cmp::Gt, ClockPart::Above) => true,
            }
        })
    }

    /// Strict comparisons are evaluated raw so that arbitrarily small
    /// enabled windows stay enabled; only (non-)strict equality gets a
    /// tolerance, for delays pinned to integer boundaries.
    pub fn satisfied_by_valuation(&self, v: &[f64]) -> bool {
        const EPS: f64 = 1e-9;
        self.conjuncts.iter().all(|(clock, cmp, c)| {
            let x = v[*clock];
            let c = *c as f64;
            match cmp {
                Cmp::Lt => x < c,
                Cmp::Le => x <= c + EPS,
                Cmp::Eq => (x - c).abs() <= EPS,
                Cmp::Ge => x >= c - EPS,
                Cmp::Gt => x > c,
            }
        })
    }

    pub fn max_constant(&self) -> u32 {
        self.conjuncts.iter().map(|(_, _, c)| *c).max().unwrap_or(0)
    }
}

/// Per-location delay distribution kind.
#[derive(Clone, PartialEq, Debug)]
pub enum DelayKind {
    /// Uniform over the enabled delay set (uniform over its atoms when the
    /// set is a finite union of points).
    UniformOverEnabled,
    /// Exponential with the given rate, over an unbounded enabled set.
    Exponential(f64),
    /// The enabled delay set is a single point; the delay is deterministic.
    DiracAt,
}

#[derive(Clone, Debug)]
pub struct StaLocation {
    pub name: String,
    pub labels: Vec<String>,
    pub kind: DelayKind,
}

#[derive(Clone, Debug)]
pub struct StaEdge {
    pub source: usize,
    pub guard: Guard,
    pub resets: Vec<usize>,
    pub target: usize,
    pub weight: u32,
}

/// A configuration: a location together with a clock valuation.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub location: usize,
    pub valuation: Vec<f64>,
}

/// A stochastic timed automaton.
#[derive(Clone, Debug)]
pub struct StaModel {
    pub clocks: Vec<String>,
    pub locations: Vec<StaLocation>,
    pub initial: Configuration,
    pub edges: Vec<StaEdge>,
    pub ap: Vec<String>,
}

impl StaModel {
    /// The maximal constant appearing in a guard (at least 1, so the region
    /// machinery always has a boundary to work with).
    pub fn max_constant(&self) -> u32 {
        self.edges
            .iter()
            .map(|e| e.guard.max_constant())
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn location_by_name(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn label_set(&self, location: usize) -> LabelSet {
        let mut set = LabelSet::EMPTY;
        for ap in &self.locations[location].labels {
            if let Some(i) = self.ap.iter().position(|a| a == ap) {
                set = LabelSet(set.0 | (1 << i));
            }
        }
        set
    }

    pub fn edges_from(&self, location: usize) -> impl Iterator<Item = (usize, &StaEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == location)
    }

    pub fn validate(&self) -> Result<()> {
        if self.locations.is_empty() {
            return Err(Error::InvalidModel("no locations".into()));
        }
        if self.initial.valuation.len() != self.clocks.len() {
            return Err(Error::InvalidModel(
                "initial valuation must cover every clock".into(),
            ));
        }
        if self.ap.len() > 32 {
            return Err(Error::InvalidModel("at most 32 atomic propositions".into()));
        }
        for e in &self.edges {
            if e.weight == 0 {
                return Err(Error::InvalidModel("edge weights must be positive".into()));
            }
            if e.source >= self.locations.len() || e.target >= self.locations.len() {
                return Err(Error::InvalidModel("edge references unknown location".into()));
            }
        }
        for l in &self.locations {
            if let DelayKind::Exponential(rate) = l.kind {
                if !(rate > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "exponential rate at {:?} must be positive",
                        l.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Structural class of an automaton, driving which pipeline hypotheses are
/// discharged automatically.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StaClass {
    /// Every configuration admits every delay and distributions are
    /// location-determined: the memoryless regions form an attractor.
    Reactive,
    /// Single clock with uniform-on-bounded / exponential-on-unbounded
    /// delay distributions: the reset/terminal regions form an attractor.
    OneClock,
    /// No structural hypothesis applies; the thick graph may be unsound.
    General { reason: String },
}

/// Enumerate every region over `clocks` clocks with constants up to
/// `max_const`; `None` when the region space exceeds the cap.
pub fn enumerate_regions(clocks: usize, max_const: u32, cap: usize) -> Option<Vec<Region>> {
    // parts per clock, then ordered set partitions of the fractional clocks
    let mut per_clock: Vec<Vec<ClockPart>> = Vec::new();
    for _ in 0..clocks {
        let mut parts = vec![ClockPart::Above];
        for k in 0..=max_const {
            parts.push(ClockPart::At(k));
        }
        for k in 0..max_const {
            parts.push(ClockPart::In(k));
        }
        per_clock.push(parts);
    }
    let mut regions = Vec::new();
    let mut assignment = vec![0usize; clocks];
    loop {
        let parts: Vec<ClockPart> = assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| per_clock[i][j])
            .collect();
        let fractional: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, ClockPart::In(_)))
            .map(|(i, _)| i)
            .collect();
        for order in ordered_partitions(&fractional) {
            regions.push(Region::from_raw(parts.clone(), order));
            if regions.len() > cap {
                return None;
            }
        }
        // advance the mixed-radix assignment
        let mut i = 0;
        loop {
            if i == clocks {
                return Some(regions);
            }
            assignment[i] += 1;
            if assignment[i] < per_clock[i].len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn ordered_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let (first, rest) = items.split_first().unwrap();
    let mut out = Vec::new();
    for partition in ordered_partitions(rest) {
        // join an existing group
        for g in 0..partition.len() {
            let mut p = partition.clone();
            p[g].push(*first);
            p[g].sort_unstable();
            out.push(p);
        }
        // or open a new group at any position
        for g in 0..=partition.len() {
            let mut p = partition.clone();
            p.insert(g, vec![*first]);
            out.push(p);
        }
    }
    out
}

/// Classify an automaton. Conservative: anything outside the two certified
/// classes is `General`, and an oversized region space also degrades to
/// `General`.
pub fn classify(sta: &StaModel) -> StaClass {
    let max_const = sta.max_constant();
    let Some(regions) = enumerate_regions(sta.clocks.len(), max_const, 200_000) else {
        return StaClass::General {
            reason: "region space too large for structural classification".into(),
        };
    };
    let all_exponential = sta
        .locations
        .iter()
        .all(|l| matches!(l.kind, DelayKind::Exponential(_)));
    if all_exponential {
        // reactive requires every delay from every configuration enabled
        let mut covered = true;
        'outer: for location in 0..sta.locations.len() {
            for r in &regions {
                for (dr, _) in delay_successors(r, max_const) {
                    let enabled = sta
                        .edges_from(location)
                        .any(|(_, e)| e.guard.satisfied_by_region(&dr));
                    if !enabled {
                        covered = false;
                        break 'outer;
                    }
                }
            }
        }
        if covered {
            return StaClass::Reactive;
        }
        return StaClass::General {
            reason: "exponential delays but some configuration disables some delay".into(),
        };
    }
    if sta.clocks.len() == 1 {
        let kinds_ok = sta.locations.iter().all(|l| {
            matches!(
                l.kind,
                DelayKind::UniformOverEnabled | DelayKind::Exponential(_)
            )
        });
        if !kinds_ok {
            return StaClass::General {
                reason: "single clock but a location uses a deterministic delay".into(),
            };
        }
        // exponential locations need unbounded enabled sets everywhere,
        // uniform locations bounded ones: decided by whether the final
        // (all-above) delay region enables an edge
        for (li, l) in sta.locations.iter().enumerate() {
            for r in &regions {
                let chain = delay_successors(r, max_const);
                let (final_region, _) = chain.last().expect("chain ends all-above");
                let unbounded = sta
                    .edges_from(li)
                    .any(|(_, e)| e.guard.satisfied_by_region(final_region));
                match l.kind {
                    DelayKind::Exponential(_) if !unbounded => {
                        return StaClass::General {
                            reason: format!(
                                "exponential location {:?} has a bounded enabled delay set",
                                l.name
                            ),
                        }
                    }
                    DelayKind::UniformOverEnabled if unbounded => {
                        return StaClass::General {
                            reason: format!(
                                "uniform location {:?} has an unbounded enabled delay set",
                                l.name
                            ),
                        }
                    }
                    _ => {}
                }
            }
        }
        return StaClass::OneClock;
    }
    StaClass::General {
        reason: "multiple clocks with non-exponential delay distributions".into(),
    }
}

#[derive(Deserialize)]
struct DistJson {
    kind: String,
    #[serde(default)]
    rate: Option<f64>,
}

#[derive(Deserialize)]
struct LocationJson {
    name: String,
    #[serde(default)]
    labels: Vec<String>,
    dist: DistJson,
}

#[derive(Deserialize)]
struct InitialJson {
    location: String,
    #[serde(default)]
    valuation: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct EdgeJson {
    from: String,
    #[serde(default)]
    guard: String,
    #[serde(default)]
    resets: Vec<String>,
    to: String,
    #[serde(default = "default_weight")]
    weight: u32,
}

fn default_weight() -> u32 {
    1
}

#[derive(Deserialize)]
struct StaJson {
    clocks: Vec<String>,
    locations: Vec<LocationJson>,
    initial: InitialJson,
    edges: Vec<EdgeJson>,
    #[serde(default)]
    ap: Option<Vec<String>>,
}

/// Parse the STA JSON format.
pub fn parse_sta(text: &str) -> Result<StaModel> {
    let json: StaJson = serde_json::from_str(text)?;
    let clocks = json.clocks;
    let loc_index = |name: &str| -> Result<usize> {
        json.locations
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::InvalidModel(format!("unknown location {name:?}")))
    };
    let locations = json
        .locations
        .iter()
        .map(|l| {
            let kind = match l.dist.kind.as_str() {
                "uniform" => DelayKind::UniformOverEnabled,
                "exponential" => DelayKind::Exponential(l.dist.rate.ok_or_else(|| {
                    Error::InvalidModel(format!("exponential at {:?} needs a rate", l.name))
                })?),
                "dirac" => DelayKind::DiracAt,
                other => {
                    return Err(Error::InvalidModel(format!(
                        "unknown distribution kind {other:?}"
                    )))
                }
            };
            Ok(StaLocation {
                name: l.name.clone(),
                labels: l.labels.clone(),
                kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = json
        .edges
        .iter()
        .map(|e| {
            Ok(StaEdge {
                source: loc_index(&e.from)?,
                guard: Guard::parse(&e.guard, &clocks)?,
                resets: e
                    .resets
                    .iter()
                    .map(|r| {
                        clocks
                            .iter()
                            .position(|c| c == r)
                            .ok_or_else(|| Error::InvalidModel(format!("unknown clock {r:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                target: loc_index(&e.to)?,
                weight: e.weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut valuation = vec![0.0; clocks.len()];
    for (clock, value) in &json.initial.valuation {
        let i = clocks
            .iter()
            .position(|c| c == clock)
            .ok_or_else(|| Error::InvalidModel(format!("unknown clock {clock:?}")))?;
        valuation[i] = *value;
    }
    let ap = json.ap.unwrap_or_else(|| {
        let mut seen = Vec::new();
        for l in &json.locations {
            for a in &l.labels {
                if !seen.contains(a) {
                    seen.push(a.clone());
                }
            }
        }
        seen
    });
    let sta = StaModel {
        clocks,
        locations,
        initial: Configuration {
            location: loc_index(&json.initial.location)?,
            valuation,
        },
        edges,
        ap,
    };
    sta.validate()?;
    Ok(sta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_parsing() {
        let clocks = vec!["x".to_string(), "y".to_string()];
        let g = Guard::parse("x<1 && y>=2", &clocks).unwrap();
        assert_eq!(
            g.conjuncts,
            vec![(0, Cmp::Lt, 1), (1, Cmp::Ge, 2)]
        );
        assert!(Guard::parse("", &clocks).unwrap().conjuncts.is_empty());
        assert!(Guard::parse("z<1", &clocks).is_err());
        assert!(Guard::parse("x<1.5", &clocks).is_err());
    }

    #[test]
    fn guards_on_regions() {
        let clocks = vec!["x".to_string(), "y".to_string()];
        let g = Guard::parse("x>1 && y<1", &clocks).unwrap();
        assert!(g.satisfied_by_region(&region::region_of(&[1.5, 0.5], 2)));
        assert!(!g.satisfied_by_region(&region::region_of(&[0.5, 0.5], 2)));
        assert!(!g.satisfied_by_region(&region::region_of(&[1.0, 0.5], 2)));
        let eq = Guard::parse("y=1", &clocks).unwrap();
        assert!(eq.satisfied_by_region(&region::region_of(&[0.5, 1.0], 2)));
        assert!(!eq.satisfied_by_region(&region::region_of(&[0.5, 0.9], 2)));
        let above = Guard::parse("x>2", &clocks).unwrap();
        assert!(above.satisfied_by_region(&region::region_of(&[2.5, 0.5], 2)));
    }

    #[test]
    fn ordered_partition_counts() {
        assert_eq!(ordered_partitions(&[]).len(), 1);
        assert_eq!(ordered_partitions(&[1]).len(), 1);
        assert_eq!(ordered_partitions(&[1, 2]).len(), 3); // {12}, {1}<{2}, {2}<{1}
        assert_eq!(ordered_partitions(&[1, 2, 3]).len(), 13);
    }

    #[test]
    fn region_enumeration_is_exhaustive_for_one_clock() {
        // M=2: At(0),At(1),At(2),In(0),In(1),Above = 6 regions
        let regions = enumerate_regions(1, 2, 10_000).unwrap();
        assert_eq!(regions.len(), 6);
    }

    #[test]
    fn classify_reactive() {
        let sta = parse_sta(
            r#"{
            "clocks": ["x"],
            "locations": [{"name": "l0", "labels": ["a"], "dist": {"kind": "exponential", "rate": 2.0}}],
            "initial": {"location": "l0"},
            "edges": [{"from": "l0", "to": "l0", "resets": ["x"]}]
        }"#,
        )
        .unwrap();
        assert_eq!(classify(&sta), StaClass::Reactive);
    }

    #[test]
    fn classify_one_clock() {
        let sta = parse_sta(
            r#"{
            "clocks": ["x"],
            "locations": [
                {"name": "l0", "labels": ["a"], "dist": {"kind": "uniform"}},
                {"name": "l1", "labels": [], "dist": {"kind": "uniform"}}
            ],
            "initial": {"location": "l0"},
            "edges": [
                {"from": "l0", "guard": "x<1", "to": "l1", "resets": ["x"]},
                {"from": "l1", "guard": "x<2", "to": "l0", "resets": ["x"]}
            ]
        }"#,
        )
        .unwrap();
        assert_eq!(classify(&sta), StaClass::OneClock);
    }

    #[test]
    fn classify_general_two_clock_bounded() {
        let sta = fixtures::two_clock_convergent();
        assert!(matches!(classify(&sta), StaClass::General { .. }));
    }
}

/// Built-in automata used by the examples, the CLI and the test-suite.
pub mod fixtures {
    use super::*;

    /// A two-clock automaton with an unfair convergence behaviour: two
    /// guarded loops through l1/l2 (right) and l3/l4 (left). Each return to
    /// l0 squeezes the y-clock upward, so the right loop is taken with
    /// vanishing probability and l2 is reached with probability strictly
    /// below one — the thick graph is not a sound abstraction here, which
    /// is why the pipelines refuse the General class.
    pub fn two_clock_convergent() -> StaModel {
        parse_sta(
            r#"{
            "clocks": ["x", "y"],
            "locations": [
                {"name": "l0", "labels": [], "dist": {"kind": "uniform"}},
                {"name": "l1", "labels": [], "dist": {"kind": "dirac"}},
                {"name": "l2", "labels": ["right"], "dist": {"kind": "uniform"}},
                {"name": "l3", "labels": [], "dist": {"kind": "dirac"}},
                {"name": "l4", "labels": ["left"], "dist": {"kind": "uniform"}}
            ],
            "initial": {"location": "l0", "valuation": {"x": 0, "y": 0.5}},
            "edges": [
                {"from": "l0", "guard": "y<1", "to": "l1"},
                {"from": "l1", "guard": "y=1", "resets": ["y"], "to": "l2"},
                {"from": "l2", "guard": "x>1 && y<1", "resets": ["x"], "to": "l0"},
                {"from": "l0", "guard": "y>1 && y<2", "to": "l3"},
                {"from": "l3", "guard": "y=2", "resets": ["y"], "to": "l4"},
                {"from": "l4", "guard": "x>2 && y<1", "resets": ["x"], "to": "l0"}
            ],
            "ap": ["right", "left"]
        }"#,
        )
        .unwrap()
    }

    /// Single location with an exponential delay and an unguarded
    /// self-loop: a Poisson jump process with the given rate.
    pub fn exponential_self_loop(rate: f64) -> StaModel {
        parse_sta(&format!(
            r#"{{
            "clocks": ["x"],
            "locations": [{{"name": "l0", "labels": ["tick"], "dist": {{"kind": "exponential", "rate": {rate}}}}}],
            "initial": {{"location": "l0"}},
            "edges": [{{"from": "l0", "to": "l0", "resets": ["x"]}}]
        }}"#
        ))
        .unwrap()
    }
}
