//! Independent correctness authority: full constraint checking over solution
//! documents, spectral metrics, and a brute-force optimum oracle for small
//! instances. Deliberately shares no routing or search code with the solvers
//! it cross-checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::Instance;
use crate::solution::{Coupling, Mode, Solution, SolutionDoc, SolveConfig};
use crate::topology::{NodeId, Topology};

/// Rules enforced on a provisioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleId {
    /// Routes are simple paths over existing arcs.
    R1,
    /// Wavelength uniqueness: an (arc, wavelength) pair carries one lightpath.
    R2,
    /// Wavelength continuity. Structural for lightpath records; enforced on
    /// raw flow variables during MILP decoding.
    R3,
    /// Lightpath endpoints match the demand they serve.
    R4,
    /// The computing node differs from the destination.
    R5,
    /// All segments of a computing demand share one wavelength.
    R6,
    /// Every demand is served exactly once.
    R7,
    /// Wavelength indexes stay within the budget.
    R8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: RuleId,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { ok: violations.is_empty(), violations }
    }

    pub fn has_rule(&self, rule: RuleId) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Spectral cost of a provisioning: number of distinct wavelengths used and
/// total wavelength-link units (sum of route hop counts).
pub fn metrics(solution: &Solution) -> (usize, usize) {
    let mut used: Vec<usize> = solution.lightpaths().map(|lp| lp.wavelength).collect();
    used.sort_unstable();
    used.dedup();
    let units = solution.lightpaths().map(|lp| lp.route.hops()).sum();
    (used.len(), units)
}

/// Checks a solution document against every provisioning rule. Total: any
/// structurally well-formed document yields a report, never an error.
pub fn validate(doc: &SolutionDoc, instance: &Instance, cfg: &SolveConfig) -> ValidationReport {
    let topo = &instance.topology;
    let budget = cfg.budget(instance);
    let mut violations = Vec::new();

    // (R1) route shape, collecting resolvable hops for the clash check
    let mut hops: Vec<(usize, usize, String)> = Vec::new(); // (arc, lambda, owner)
    for served in &doc.assignments {
        let owner = format!("{}:{}", served.demand.kind, served.demand.index);
        for (si, lp) in served.segments.iter().enumerate() {
            let label = format!("{owner} segment {si}");
            if lp.route.len() < 2 {
                violations.push(Violation {
                    rule: RuleId::R1,
                    detail: format!("{label}: route needs at least two nodes"),
                });
                continue;
            }
            let mut seen = std::collections::HashSet::new();
            for &v in &lp.route {
                if v == 0 || v > topo.node_count() {
                    violations.push(Violation {
                        rule: RuleId::R1,
                        detail: format!("{label}: node {v} out of range"),
                    });
                } else if !seen.insert(v) {
                    violations.push(Violation {
                        rule: RuleId::R1,
                        detail: format!("{label}: node {v} repeats; route must be simple"),
                    });
                }
            }
            for pair in lp.route.windows(2) {
                let (u, v) = (pair[0], pair[1]);
                if u == 0 || v == 0 || u > topo.node_count() || v > topo.node_count() {
                    continue;
                }
                match topo.arc_between(NodeId(u - 1), NodeId(v - 1)) {
                    Some(arc) => hops.push((arc, lp.lambda, label.clone())),
                    None => violations.push(Violation {
                        rule: RuleId::R1,
                        detail: format!("{label}: no arc {u}->{v} in the topology"),
                    }),
                }
            }
        }
    }

    // (R2) wavelength uniqueness per directed arc
    let mut occupancy: HashMap<(usize, usize), &str> = HashMap::new();
    for (arc, lambda, owner) in &hops {
        if let Some(prev) = occupancy.insert((*arc, *lambda), owner) {
            let a = topo.arc(*arc);
            violations.push(Violation {
                rule: RuleId::R2,
                detail: format!(
                    "wavelength {lambda} reused on arc {}->{} by {prev} and {owner}",
                    a.tail, a.head
                ),
            });
        }
    }

    // (R3) continuity is structural here: each lightpath record carries
    // exactly one wavelength. The flow-level check lives in MILP decoding.

    // (R4/R5/R6) endpoints, computing-node placement, coupling
    for served in &doc.assignments {
        let owner = format!("{}:{}", served.demand.kind, served.demand.index);
        let routes: Vec<Option<(usize, usize)>> = served
            .segments
            .iter()
            .map(|lp| {
                if lp.route.len() >= 2 {
                    Some((lp.route[0], *lp.route.last().unwrap()))
                } else {
                    None
                }
            })
            .collect();
        match served.demand.kind.as_str() {
            "comm" => {
                let Some(d) = instance.comm.get(served.demand.index) else { continue };
                if served.segments.len() != 1 {
                    violations.push(Violation {
                        rule: RuleId::R4,
                        detail: format!(
                            "{owner}: expected one lightpath, found {}",
                            served.segments.len()
                        ),
                    });
                    continue;
                }
                if routes[0] != Some((d.src.external(), d.dst.external())) {
                    violations.push(Violation {
                        rule: RuleId::R4,
                        detail: format!(
                            "{owner}: lightpath must run {}->{}",
                            d.src, d.dst
                        ),
                    });
                }
            }
            "comp" => {
                let Some(q) = instance.comp.get(served.demand.index) else { continue };
                let Some(x) = served.computing_node else {
                    violations.push(Violation {
                        rule: RuleId::R4,
                        detail: format!("{owner}: missing computing node"),
                    });
                    continue;
                };
                let (s1, s2, dst) = (q.src1.external(), q.src2.external(), q.dst.external());
                if cfg.mode == Mode::Occin && x == dst {
                    violations.push(Violation {
                        rule: RuleId::R5,
                        detail: format!("{owner}: computing node equals destination {dst}"),
                    });
                }
                if cfg.mode == Mode::Bypass && x != dst {
                    violations.push(Violation {
                        rule: RuleId::R4,
                        detail: format!(
                            "{owner}: bypass provisioning reports the destination as \
                             computing node, found {x}"
                        ),
                    });
                }
                let expected: Vec<(usize, usize)> = match cfg.mode {
                    Mode::Bypass => vec![(s1, dst), (s2, dst)],
                    Mode::Occin => {
                        let mut segs = Vec::new();
                        if x != s1 {
                            segs.push((s1, x));
                        }
                        if x != s2 {
                            segs.push((s2, x));
                        }
                        segs.push((x, dst));
                        segs
                    }
                };
                let mut want = expected.clone();
                let mut got: Vec<(usize, usize)> = routes.iter().flatten().copied().collect();
                want.sort_unstable();
                got.sort_unstable();
                if got != want || routes.iter().any(Option::is_none) {
                    violations.push(Violation {
                        rule: RuleId::R4,
                        detail: format!(
                            "{owner}: segments {got:?} do not match required {want:?}"
                        ),
                    });
                }
                if cfg.mode == Mode::Occin && cfg.coupling == Coupling::PerDemand {
                    let mut lambdas: Vec<usize> =
                        served.segments.iter().map(|lp| lp.lambda).collect();
                    lambdas.dedup();
                    if lambdas.len() > 1 {
                        violations.push(Violation {
                            rule: RuleId::R6,
                            detail: format!(
                                "{owner}: segments use wavelengths {lambdas:?}, coupling \
                                 requires one"
                            ),
                        });
                    }
                }
            }
            other => {
                violations.push(Violation {
                    rule: RuleId::R7,
                    detail: format!("unknown demand kind {other:?}"),
                });
            }
        }
    }

    // (R7) every instance demand served exactly once
    let mut comm_served = vec![0usize; instance.comm.len()];
    let mut comp_served = vec![0usize; instance.comp.len()];
    for served in &doc.assignments {
        match served.demand.kind.as_str() {
            "comm" => match comm_served.get_mut(served.demand.index) {
                Some(n) => *n += 1,
                None => violations.push(Violation {
                    rule: RuleId::R7,
                    detail: format!("comm:{} is not an instance demand", served.demand.index),
                }),
            },
            "comp" => match comp_served.get_mut(served.demand.index) {
                Some(n) => *n += 1,
                None => violations.push(Violation {
                    rule: RuleId::R7,
                    detail: format!("comp:{} is not an instance demand", served.demand.index),
                }),
            },
            _ => {}
        }
    }
    for (i, &n) in comm_served.iter().enumerate() {
        if n != 1 {
            violations.push(Violation {
                rule: RuleId::R7,
                detail: format!("comm:{i} served {n} times"),
            });
        }
    }
    for (i, &n) in comp_served.iter().enumerate() {
        if n != 1 {
            violations.push(Violation {
                rule: RuleId::R7,
                detail: format!("comp:{i} served {n} times"),
            });
        }
    }

    // (R8) wavelength range
    for served in &doc.assignments {
        let owner = format!("{}:{}", served.demand.kind, served.demand.index);
        for lp in &served.segments {
            if lp.lambda < 1 || lp.lambda > budget {
                violations.push(Violation {
                    rule: RuleId::R8,
                    detail: format!(
                        "{owner}: wavelength {} outside 1..={budget}",
                        lp.lambda
                    ),
                });
            }
        }
    }

    ValidationReport::from_violations(violations)
}

/// Size guard for the brute-force oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_demands: usize,
    pub max_wavelengths: usize,
    pub max_route_hops: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_nodes: 6, max_demands: 4, max_wavelengths: 3, max_route_hops: 5 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {0}")]
    LimitsExceeded(String),
}

/// Exhaustive minimum wavelength count for a small instance, or `None` when
/// no provisioning fits the budget. Enumerates computing nodes, simple route
/// tuples and canonical wavelength assignments outright; the only pruning is
/// an incumbent bound, so the result is an independent ground truth.
pub fn brute_force_optimum(
    instance: &Instance,
    cfg: &SolveConfig,
    lim: &OracleLimits,
) -> Result<Option<usize>, OracleError> {
    let topo = &instance.topology;
    if topo.node_count() > lim.max_nodes {
        return Err(OracleError::LimitsExceeded(format!(
            "{} nodes > {}",
            topo.node_count(),
            lim.max_nodes
        )));
    }
    if instance.demand_count() > lim.max_demands {
        return Err(OracleError::LimitsExceeded(format!(
            "{} demands > {}",
            instance.demand_count(),
            lim.max_demands
        )));
    }
    let budget = cfg.budget(instance);
    if budget > lim.max_wavelengths {
        return Err(OracleError::LimitsExceeded(format!(
            "{budget} wavelengths > {}",
            lim.max_wavelengths
        )));
    }
    if topo.arcs().len() > 64 {
        return Err(OracleError::LimitsExceeded(format!(
            "{} arcs > 64",
            topo.arcs().len()
        )));
    }

    let effective = match cfg.mode {
        Mode::Bypass => instance.decomposed(),
        Mode::Occin => instance.clone(),
    };

    let mut routes = RouteTable::new(lim.max_route_hops);

    // Options for one demand: every way to realize it as wavelength-colored
    // arc masks. A group is colored with one wavelength and must be
    // internally arc-disjoint; a demand may span several groups.
    let mut demands: Vec<Vec<Vec<u64>>> = Vec::new();
    for d in &effective.comm {
        let masks = routes.simple_route_masks(topo, d.src, d.dst);
        demands.push(masks.into_iter().map(|m| vec![m]).collect());
    }
    for q in &effective.comp {
        let mut options: Vec<Vec<u64>> = Vec::new();
        for x in topo.nodes() {
            if x == q.dst {
                continue;
            }
            let mut seg_masks: Vec<Vec<u64>> = Vec::new();
            for (from, to) in [(q.src1, x), (q.src2, x), (x, q.dst)] {
                if from == to {
                    continue;
                }
                seg_masks.push(routes.simple_route_masks(topo, from, to));
            }
            if seg_masks.iter().any(|m| m.is_empty()) {
                continue;
            }
            // cartesian product of segment routes
            let mut combos: Vec<Vec<u64>> = vec![Vec::new()];
            for masks in &seg_masks {
                let mut next = Vec::with_capacity(combos.len() * masks.len());
                for combo in &combos {
                    for &m in masks {
                        let mut c = combo.clone();
                        c.push(m);
                        next.push(c);
                    }
                }
                combos = next;
            }
            match cfg.coupling {
                Coupling::PerDemand => {
                    for combo in combos {
                        let union = combo.iter().fold(0u64, |acc, m| acc | m);
                        let bits: u32 = combo.iter().map(|m| m.count_ones()).sum();
                        if union.count_ones() == bits {
                            options.push(vec![union]);
                        }
                    }
                }
                Coupling::PerSegment => options.extend(combos),
            }
        }
        demands.push(options);
    }

    if demands.iter().any(|opts| opts.is_empty()) {
        return Ok(None);
    }

    // most-constrained demands first keeps the exhaustive tree shallow
    let mut order: Vec<usize> = (0..demands.len()).collect();
    order.sort_by_key(|&i| (demands[i].len(), i));

    let mut search = OracleSearch {
        demands: &demands,
        order: &order,
        occupied: vec![0u64; budget],
        budget,
        best: budget + 1,
    };
    search.descend(0, 0);

    Ok(if search.best <= budget { Some(search.best) } else { None })
}

struct OracleSearch<'a> {
    demands: &'a [Vec<Vec<u64>>],
    order: &'a [usize],
    occupied: Vec<u64>,
    budget: usize,
    best: usize,
}

impl OracleSearch<'_> {
    fn descend(&mut self, pos: usize, used: usize) {
        if used >= self.best {
            return;
        }
        if pos == self.order.len() {
            self.best = used;
            return;
        }
        let options = &self.demands[self.order[pos]];
        for option in options {
            self.color_groups(pos, option, 0, used);
        }
    }

    /// Assigns canonical wavelengths (reuse an occupied index or open the
    /// next fresh one) to each arc-mask group of one demand option, then
    /// moves to the next demand.
    fn color_groups(&mut self, pos: usize, groups: &[u64], gi: usize, used: usize) {
        if used >= self.best {
            return;
        }
        if gi == groups.len() {
            self.descend(pos + 1, used);
            return;
        }
        let mask = groups[gi];
        let limit = (used + 1).min(self.budget);
        for color in 0..limit {
            if self.occupied[color] & mask != 0 {
                continue;
            }
            self.occupied[color] |= mask;
            self.color_groups(pos, groups, gi + 1, used.max(color + 1));
            self.occupied[color] &= !mask;
        }
    }
}

/// Naive memoized enumeration of simple routes as arc bitmasks.
struct RouteTable {
    max_hops: usize,
    cache: HashMap<(NodeId, NodeId), Vec<u64>>,
}

impl RouteTable {
    fn new(max_hops: usize) -> Self {
        RouteTable { max_hops, cache: HashMap::new() }
    }

    fn simple_route_masks(&mut self, topo: &Topology, src: NodeId, dst: NodeId) -> Vec<u64> {
        if let Some(cached) = self.cache.get(&(src, dst)) {
            return cached.clone();
        }
        let mut acc = Vec::new();
        let mut visited = vec![false; topo.node_count()];
        visited[src.0] = true;
        walk(topo, src, dst, self.max_hops, &mut visited, 0u64, &mut acc);
        self.cache.insert((src, dst), acc.clone());
        acc
    }
}

fn walk(
    topo: &Topology,
    at: NodeId,
    dst: NodeId,
    hops_left: usize,
    visited: &mut Vec<bool>,
    mask: u64,
    acc: &mut Vec<u64>,
) {
    if at == dst {
        acc.push(mask);
        return;
    }
    if hops_left == 0 {
        return;
    }
    for &a in topo.out_arcs(at) {
        let head = topo.arc(a).head;
        if visited[head.0] {
            continue;
        }
        visited[head.0] = true;
        walk(topo, head, dst, hops_left - 1, visited, mask | (1u64 << a), acc);
        visited[head.0] = false;
    }
}
