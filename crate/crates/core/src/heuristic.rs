//! Constructive first-fit heuristic. Fast, deterministic, never claims
//! optimality; the exact solver uses it as an upper-bound provider.

use std::time::Instant;

use thiserror::Error;

use crate::demand::{decompose_bypass, CompDemand, Instance};
use crate::solution::{
    Coupling, DemandOrdering, DemandRef, Lightpath, Mode, ServedDemand, Solution, SolveConfig,
    SolverStats, Status,
};
use crate::topology::{k_shortest_simple_paths, NodeId, Path, Topology};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("no reachable computing node for demand ({0}, {1}) -> {2}")]
    Unreachable(NodeId, NodeId, NodeId),
}

/// Ranks candidate computing nodes for `q` by total hop count of the three
/// segments, cheapest first. Ties prefer a source node (the one closer to
/// the destination first), then the lowest node id. Unreachable candidates
/// are dropped.
pub(crate) fn ranked_computing_nodes(
    topo: &Topology,
    q: &CompDemand,
) -> Vec<(NodeId, usize)> {
    let from_s1 = topo.dist_from(q.src1);
    let from_s2 = topo.dist_from(q.src2);
    let to_dst = topo.dist_to(q.dst);
    let mut ranked: Vec<(NodeId, usize)> = Vec::new();
    for x in topo.nodes() {
        if x == q.dst {
            continue;
        }
        let (Some(a), Some(b), Some(c)) = (from_s1[x.0], from_s2[x.0], to_dst[x.0]) else {
            continue;
        };
        ranked.push((x, (a + b + c) as usize));
    }
    ranked.sort_by_key(|&(x, score)| {
        let is_source = x == q.src1 || x == q.src2;
        let source_pull = if is_source { to_dst[x.0].unwrap_or(u32::MAX) } else { 0 };
        (score, !is_source, source_pull, x.0)
    });
    ranked
}

/// Picks the computing node minimizing SP(s1,x) + SP(s2,x) + SP(x,dst).
pub fn choose_computing_node(topo: &Topology, q: &CompDemand) -> Result<NodeId, HeuristicError> {
    ranked_computing_nodes(topo, q)
        .first()
        .map(|&(x, _)| x)
        .ok_or(HeuristicError::Unreachable(q.src1, q.src2, q.dst))
}

/// Wavelength-occupancy grid shared by placements; 1-based wavelengths.
struct Grid {
    arc_count: usize,
    used: Vec<bool>,
}

impl Grid {
    fn new(arc_count: usize, budget: usize) -> Self {
        Grid { arc_count, used: vec![false; arc_count * budget] }
    }

    fn route_free(&self, route: &Path, lambda: usize) -> bool {
        route.arcs().iter().all(|&a| !self.used[(lambda - 1) * self.arc_count + a])
    }

    fn occupy(&mut self, route: &Path, lambda: usize) {
        for &a in route.arcs() {
            self.used[(lambda - 1) * self.arc_count + a] = true;
        }
    }
}

/// One placement unit: a single lightpath, or all segments of a computing
/// demand when they must share a wavelength.
enum Unit {
    Single { demand: DemandRef, slot: usize, src: NodeId, dst: NodeId },
    CoupledComp { index: usize, x: NodeId, segments: Vec<(NodeId, NodeId)> },
    SplitComp { index: usize, x: NodeId, segments: Vec<(NodeId, NodeId)> },
}

/// Greedy first-fit provisioning. Demands are ordered by decreasing
/// shortest-path cost (computing demands use the three-segment cost at the
/// chosen node), then each takes the lowest wavelength on which any of its
/// candidate routes fits. No exhaustive fallback: when the candidates are
/// exhausted the result is Infeasible even if the exact solver would find a
/// provisioning.
pub fn solve_heuristic(instance: &Instance, cfg: &SolveConfig) -> Solution {
    let start = Instant::now();
    let topo = &instance.topology;
    let budget = cfg.budget(instance);
    let k = cfg.k_routes.max(1);

    // (unit, cost) pairs in input order; sorted below per cfg.ordering
    let mut units: Vec<(Unit, usize)> = Vec::new();
    for (i, d) in instance.comm.iter().enumerate() {
        let Some(cost) = topo.dist_from(d.src)[d.dst.0] else {
            return Solution::empty(Status::Infeasible);
        };
        units.push((
            Unit::Single { demand: DemandRef::Comm(i), slot: 0, src: d.src, dst: d.dst },
            cost as usize,
        ));
    }
    for (i, q) in instance.comp.iter().enumerate() {
        match cfg.mode {
            Mode::Bypass => {
                let (a, b) = decompose_bypass(q);
                for (slot, d) in [(0, a), (1, b)] {
                    let Some(cost) = topo.dist_from(d.src)[d.dst.0] else {
                        return Solution::empty(Status::Infeasible);
                    };
                    units.push((
                        Unit::Single {
                            demand: DemandRef::Comp(i),
                            slot,
                            src: d.src,
                            dst: d.dst,
                        },
                        cost as usize,
                    ));
                }
            }
            Mode::Occin => {
                let Ok(x) = choose_computing_node(topo, q) else {
                    return Solution::empty(Status::Infeasible);
                };
                let cost = ranked_computing_nodes(topo, q)[0].1;
                let mut segments = Vec::new();
                for (from, to) in [(q.src1, x), (q.src2, x), (x, q.dst)] {
                    if from != to {
                        segments.push((from, to));
                    }
                }
                let unit = match cfg.coupling {
                    Coupling::PerDemand => Unit::CoupledComp { index: i, x, segments },
                    Coupling::PerSegment => Unit::SplitComp { index: i, x, segments },
                };
                units.push((unit, cost));
            }
        }
    }

    if cfg.ordering == DemandOrdering::LongestFirst {
        units.sort_by_key(|&(_, cost)| std::cmp::Reverse(cost));
    }

    let mut grid = Grid::new(topo.arcs().len(), budget);
    let mut comm_paths: Vec<Option<Lightpath>> = vec![None; instance.comm.len()];
    let mut comp_paths: Vec<(Option<NodeId>, Vec<Option<Lightpath>>)> =
        vec![(None, vec![None, None, None]); instance.comp.len()];

    for (unit, _) in &units {
        match unit {
            Unit::Single { demand, slot, src, dst } => {
                let routes = k_shortest_simple_paths(topo, *src, *dst, k);
                let Some((route, lambda)) = first_fit_single(&grid, &routes, budget) else {
                    return Solution::empty(Status::Infeasible);
                };
                grid.occupy(&route, lambda);
                let lp = Lightpath { route, wavelength: lambda };
                match demand {
                    DemandRef::Comm(i) => comm_paths[*i] = Some(lp),
                    DemandRef::Comp(i) => comp_paths[*i].1[*slot] = Some(lp),
                }
            }
            Unit::CoupledComp { index, x, segments } => {
                let candidates: Vec<Vec<Path>> = segments
                    .iter()
                    .map(|&(s, t)| k_shortest_simple_paths(topo, s, t, k))
                    .collect();
                let Some((combo, lambda)) = first_fit_coupled(&grid, &candidates, budget)
                else {
                    return Solution::empty(Status::Infeasible);
                };
                for route in &combo {
                    grid.occupy(route, lambda);
                }
                comp_paths[*index].0 = Some(*x);
                for (slot, route) in combo.into_iter().enumerate() {
                    comp_paths[*index].1[slot] = Some(Lightpath { route, wavelength: lambda });
                }
            }
            Unit::SplitComp { index, x, segments } => {
                comp_paths[*index].0 = Some(*x);
                for (slot, &(s, t)) in segments.iter().enumerate() {
                    let routes = k_shortest_simple_paths(topo, s, t, k);
                    let Some((route, lambda)) = first_fit_single(&grid, &routes, budget)
                    else {
                        return Solution::empty(Status::Infeasible);
                    };
                    grid.occupy(&route, lambda);
                    comp_paths[*index].1[slot] = Some(Lightpath { route, wavelength: lambda });
                }
            }
        }
    }

    let mut assignments = Vec::with_capacity(instance.demand_count());
    for (i, lp) in comm_paths.into_iter().enumerate() {
        assignments.push(ServedDemand {
            demand: DemandRef::Comm(i),
            computing_node: None,
            segments: vec![lp.expect("placed above")],
        });
    }
    for (i, (x, segs)) in comp_paths.into_iter().enumerate() {
        let computing_node = match cfg.mode {
            Mode::Bypass => Some(instance.comp[i].dst),
            Mode::Occin => x,
        };
        assignments.push(ServedDemand {
            demand: DemandRef::Comp(i),
            computing_node,
            segments: segs.into_iter().flatten().collect(),
        });
    }

    let mut solution = Solution {
        assignments,
        wavelength_count: 0,
        wavelength_link_units: 0,
        status: Status::Feasible,
        stats: SolverStats {
            nodes_expanded: 0,
            time_ms: if cfg.deterministic { 0 } else { start.elapsed().as_millis() as u64 },
        },
    };
    solution.refresh_metrics();
    solution
}

/// Lowest wavelength on which any candidate route fits; ties take the
/// earliest candidate.
fn first_fit_single(grid: &Grid, routes: &[Path], budget: usize) -> Option<(Path, usize)> {
    for lambda in 1..=budget {
        for route in routes {
            if grid.route_free(route, lambda) {
                return Some((route.clone(), lambda));
            }
        }
    }
    None
}

/// Lowest wavelength carrying some arc-disjoint combination of one route per
/// segment; ties take the lexicographically earliest combination.
fn first_fit_coupled(
    grid: &Grid,
    candidates: &[Vec<Path>],
    budget: usize,
) -> Option<(Vec<Path>, usize)> {
    for lambda in 1..=budget {
        let mut combo: Vec<&Path> = Vec::with_capacity(candidates.len());
        if pick_disjoint(grid, candidates, 0, lambda, &mut combo) {
            return Some((combo.into_iter().cloned().collect(), lambda));
        }
    }
    None
}

fn pick_disjoint<'a>(
    grid: &Grid,
    candidates: &'a [Vec<Path>],
    seg: usize,
    lambda: usize,
    combo: &mut Vec<&'a Path>,
) -> bool {
    if seg == candidates.len() {
        return true;
    }
    'next: for route in &candidates[seg] {
        if !grid.route_free(route, lambda) {
            continue;
        }
        for earlier in combo.iter() {
            for a in route.arcs() {
                if earlier.arcs().contains(a) {
                    continue 'next;
                }
            }
        }
        combo.push(route);
        if pick_disjoint(grid, candidates, seg + 1, lambda, combo) {
            return true;
        }
        combo.pop();
    }
    false
}
