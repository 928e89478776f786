//! Shared fixtures and random-instance generation for the test suites.
//! Not part of the public API.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::demand::{CommDemand, CompDemand, Instance};
use crate::topology::{NodeId, Topology};

/// The 5-node aggregation toy: sources A and B feed X, which reaches the
/// destination C through I.
pub fn toy5() -> Topology {
    let labels = ["A", "B", "C", "I", "X"].iter().map(|s| s.to_string()).collect();
    Topology::from_undirected_edges(5, &[(0, 4), (1, 4), (4, 3), (3, 2)], "toy5")
        .unwrap()
        .with_labels(labels)
        .unwrap()
}

/// The toy computing demand (A, B -> C).
pub fn toy5_instance(max_wavelengths: usize) -> Instance {
    let t = toy5();
    let comp = vec![CompDemand::new(NodeId(0), NodeId(1), NodeId(2)).unwrap()];
    Instance::new(t, Vec::new(), comp, max_wavelengths).unwrap()
}

/// The bundled COST239 benchmark instance: five computing demands toward
/// destination 1 with source pairs (2,3), (4,10), (5,7), (6,11), (8,9).
pub fn cost239_dest1_instance(max_wavelengths: usize) -> Instance {
    let t = crate::topology::builtin_cost239();
    let pairs = [(2, 3), (4, 10), (5, 7), (6, 11), (8, 9)];
    let comp = pairs
        .iter()
        .map(|&(a, b)| CompDemand::new(NodeId(a - 1), NodeId(b - 1), NodeId(0)).unwrap())
        .collect();
    Instance::new(t, Vec::new(), comp, max_wavelengths).unwrap()
}

/// A known optimal provisioning of the COST239 benchmark instance in
/// integrated mode: each computing node sits at the source closer to the
/// destination, and only the (4,10) pair needs the second wavelength.
pub fn cost239_dest1_reference_solution() -> crate::solution::Solution {
    use crate::solution::{DemandRef, Lightpath, ServedDemand, Solution, SolverStats, Status};
    let t = crate::topology::builtin_cost239();
    let route = |nodes: &[usize]| {
        crate::topology::Path::from_nodes(
            &t,
            nodes.iter().map(|&n| NodeId(n - 1)).collect(),
        )
        .unwrap()
    };
    #[allow(clippy::type_complexity)]
    let rows: Vec<(usize, Vec<(Vec<usize>, usize)>)> = vec![
        (2, vec![(vec![3, 2], 1), (vec![2, 1], 1)]),
        (10, vec![(vec![4, 10], 2), (vec![10, 2, 1], 2)]),
        (7, vec![(vec![5, 7], 1), (vec![7, 1], 1)]),
        (6, vec![(vec![11, 6], 1), (vec![6, 1], 1)]),
        (8, vec![(vec![9, 8], 1), (vec![8, 1], 1)]),
    ];
    let assignments = rows
        .into_iter()
        .enumerate()
        .map(|(i, (x, segments))| ServedDemand {
            demand: DemandRef::Comp(i),
            computing_node: Some(NodeId(x - 1)),
            segments: segments
                .into_iter()
                .map(|(nodes, wavelength)| Lightpath { route: route(&nodes), wavelength })
                .collect(),
        })
        .collect();
    let mut solution = Solution {
        assignments,
        wavelength_count: 0,
        wavelength_link_units: 0,
        status: Status::Feasible,
        stats: SolverStats::default(),
    };
    solution.refresh_metrics();
    solution
}

/// Parameters for [`random_small_instance`]. All bounds are inclusive.
#[derive(Debug, Clone, Copy)]
pub struct SmallInstanceSpec {
    pub max_nodes: usize,
    pub max_extra_edges: usize,
    pub max_comm: usize,
    pub max_comp: usize,
    pub max_wavelengths: usize,
}

impl Default for SmallInstanceSpec {
    fn default() -> Self {
        SmallInstanceSpec {
            max_nodes: 6,
            max_extra_edges: 3,
            max_comm: 2,
            max_comp: 2,
            max_wavelengths: 3,
        }
    }
}

/// A seeded random connected instance small enough for the brute-force
/// oracle: a random spanning tree plus a few extra edges, and one to four
/// demands with distinct endpoints.
pub fn random_small_instance(seed: u64, spec: &SmallInstanceSpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=spec.max_nodes);

    // random spanning tree keeps every endpoint reachable
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let extra = rng.gen_range(0..=spec.max_extra_edges);
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == key) {
            edges.push(key);
        }
    }

    let topology = Topology::from_undirected_edges(n, &edges, "fuzz").unwrap();

    let mut comm = Vec::new();
    let mut comp = Vec::new();
    let comm_n = rng.gen_range(0..=spec.max_comm);
    let comp_n = rng.gen_range(0..=spec.max_comp);
    for _ in 0..comm_n {
        let src = rng.gen_range(0..n);
        let mut dst = rng.gen_range(0..n);
        while dst == src {
            dst = rng.gen_range(0..n);
        }
        comm.push(CommDemand::new(NodeId(src), NodeId(dst)).unwrap());
    }
    for _ in 0..comp_n {
        let mut picks = Vec::new();
        while picks.len() < 3 {
            let v = rng.gen_range(0..n);
            if !picks.contains(&v) {
                picks.push(v);
            }
        }
        comp.push(CompDemand::new(NodeId(picks[0]), NodeId(picks[1]), NodeId(picks[2])).unwrap());
    }
    if comm.is_empty() && comp.is_empty() {
        comm.push(CommDemand::new(NodeId(0), NodeId(n - 1)).unwrap());
    }

    let w = rng.gen_range(2..=spec.max_wavelengths);
    Instance::new(topology, comm, comp, w).unwrap()
}
