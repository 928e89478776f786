//! Communication and computing demands, instance generation and I/O.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::topology::{NodeId, Topology};

/// A point-to-point transmission demand carrying one wavelength of traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommDemand {
    pub src: NodeId,
    pub dst: NodeId,
}

impl CommDemand {
    pub fn new(src: NodeId, dst: NodeId) -> Result<Self, DemandError> {
        if src == dst {
            return Err(DemandError::EqualEndpoints(src));
        }
        Ok(CommDemand { src, dst })
    }
}

/// A computing demand: traffic from two sources is combined at some
/// intermediate node and the result is delivered to the destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompDemand {
    pub src1: NodeId,
    pub src2: NodeId,
    pub dst: NodeId,
}

impl CompDemand {
    pub fn new(src1: NodeId, src2: NodeId, dst: NodeId) -> Result<Self, DemandError> {
        if src1 == src2 || src1 == dst || src2 == dst {
            let dup = if src1 == src2 { src1 } else { dst };
            return Err(DemandError::EqualEndpoints(dup));
        }
        Ok(CompDemand { src1, src2, dst })
    }
}

/// Splits a computing demand into the two transmission demands that serve it
/// when the combination happens electrically at the destination.
pub fn decompose_bypass(q: &CompDemand) -> (CommDemand, CommDemand) {
    (
        CommDemand { src: q.src1, dst: q.dst },
        CommDemand { src: q.src2, dst: q.dst },
    )
}

/// A planning problem: a topology, the demand sets and the wavelength budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub topology: Topology,
    pub comm: Vec<CommDemand>,
    pub comp: Vec<CompDemand>,
    pub max_wavelengths: usize,
}

impl Instance {
    pub fn new(
        topology: Topology,
        comm: Vec<CommDemand>,
        comp: Vec<CompDemand>,
        max_wavelengths: usize,
    ) -> Result<Self, DemandError> {
        if max_wavelengths < 1 {
            return Err(DemandError::BadWavelengthBudget);
        }
        for d in &comm {
            for v in [d.src, d.dst] {
                if !topology.contains(v) {
                    return Err(DemandError::UnknownNode(v));
                }
            }
        }
        for q in &comp {
            for v in [q.src1, q.src2, q.dst] {
                if !topology.contains(v) {
                    return Err(DemandError::UnknownNode(v));
                }
            }
        }
        Ok(Instance { topology, comm, comp, max_wavelengths })
    }

    /// One wavelength per lightpath always suffices, so this budget makes any
    /// instance with reachable endpoints feasible.
    pub fn default_budget(comm: usize, comp: usize) -> usize {
        (comm + 2 * comp).max(1)
    }

    /// Rewrites every computing demand as its two transmission demands.
    /// Decomposed demands follow the original transmission demands in order:
    /// demand q contributes entries comm_len + 2q and comm_len + 2q + 1.
    pub fn decomposed(&self) -> Instance {
        let mut comm = self.comm.clone();
        for q in &self.comp {
            let (a, b) = decompose_bypass(q);
            comm.push(a);
            comm.push(b);
        }
        Instance {
            topology: self.topology.clone(),
            comm,
            comp: Vec::new(),
            max_wavelengths: self.max_wavelengths,
        }
    }

    pub fn demand_count(&self) -> usize {
        self.comm.len() + self.comp.len()
    }

    /// Serializes to the demand file format with 1-based node indices.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("wavelengths {}\n", self.max_wavelengths));
        for d in &self.comm {
            out.push_str(&format!("comm {} {}\n", d.src.external(), d.dst.external()));
        }
        for q in &self.comp {
            out.push_str(&format!(
                "comp {} {} {}\n",
                q.src1.external(),
                q.src2.external(),
                q.dst.external()
            ));
        }
        out
    }

    /// Parses the demand file format against a topology. Without a
    /// `wavelengths` header the budget defaults to one wavelength per
    /// lightpath of the instance.
    pub fn parse(text: &str, topology: &Topology) -> Result<Instance, DemandError> {
        let mut comm = Vec::new();
        let mut comp = Vec::new();
        let mut budget: Option<usize> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap();
            let node = |tokens: &mut dyn Iterator<Item = &str>| -> Result<NodeId, DemandError> {
                let tok = tokens
                    .next()
                    .ok_or(DemandError::Parse { line: lineno, msg: "missing node index".into() })?;
                let idx: usize = tok.parse().map_err(|_| DemandError::Parse {
                    line: lineno,
                    msg: format!("bad node index {tok:?}"),
                })?;
                if idx == 0 || idx > topology.node_count() {
                    return Err(DemandError::Parse {
                        line: lineno,
                        msg: format!("node {idx} out of range 1..={}", topology.node_count()),
                    });
                }
                Ok(NodeId(idx - 1))
            };
            match keyword {
                "wavelengths" => {
                    let tok = tokens.next().ok_or(DemandError::Parse {
                        line: lineno,
                        msg: "missing wavelength count".into(),
                    })?;
                    let n: usize = tok.parse().map_err(|_| DemandError::Parse {
                        line: lineno,
                        msg: format!("bad wavelength count {tok:?}"),
                    })?;
                    if n == 0 {
                        return Err(DemandError::Parse {
                            line: lineno,
                            msg: "wavelength count must be at least 1".into(),
                        });
                    }
                    budget = Some(n);
                }
                "comm" => {
                    let src = node(&mut tokens)?;
                    let dst = node(&mut tokens)?;
                    let d = CommDemand::new(src, dst).map_err(|e| DemandError::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })?;
                    comm.push(d);
                }
                "comp" => {
                    let src1 = node(&mut tokens)?;
                    let src2 = node(&mut tokens)?;
                    let dst = node(&mut tokens)?;
                    let q =
                        CompDemand::new(src1, src2, dst).map_err(|e| DemandError::Parse {
                            line: lineno,
                            msg: e.to_string(),
                        })?;
                    comp.push(q);
                }
                other => {
                    return Err(DemandError::Parse {
                        line: lineno,
                        msg: format!("unknown keyword {other:?}"),
                    });
                }
            }
        }

        let budget = budget.unwrap_or_else(|| Instance::default_budget(comm.len(), comp.len()));
        Instance::new(topology.clone(), comm, comp, budget)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DemandError {
    #[error("demand endpoints must be distinct (node {0})")]
    EqualEndpoints(NodeId),
    #[error("node {0} is not in the topology")]
    UnknownNode(NodeId),
    #[error("wavelength budget must be at least 1")]
    BadWavelengthBudget,
    #[error("cannot pair an odd number of remaining nodes ({0})")]
    OddRemainder(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Parameters for the star instance generator.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorSpec {
    pub destination: NodeId,
    pub seed: u64,
}

/// Seed whose matching reproduces the bundled COST239 benchmark pairing
/// {(2,3), (4,10), (5,7), (6,11), (8,9)} toward destination 1.
pub const COST239_DEST1_SEED: u64 = 826;

/// Draws a uniform random perfect matching of all non-destination nodes and
/// turns every pair into a computing demand toward the chosen destination.
///
/// The shuffle is an explicit Fisher-Yates over a ChaCha8 stream so the same
/// (topology, destination, seed) triple yields the same instance on every
/// platform.
pub fn generate_star_instance(
    topology: &Topology,
    spec: &GeneratorSpec,
) -> Result<Instance, DemandError> {
    if !topology.contains(spec.destination) {
        return Err(DemandError::UnknownNode(spec.destination));
    }
    let mut rest: Vec<NodeId> =
        topology.nodes().filter(|&v| v != spec.destination).collect();
    if !rest.len().is_multiple_of(2) {
        return Err(DemandError::OddRemainder(rest.len()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in (1..rest.len()).rev() {
        let j = rng.gen_range(0..=i);
        rest.swap(i, j);
    }

    let mut pairs: Vec<(NodeId, NodeId)> = rest
        .chunks_exact(2)
        .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
        .collect();
    pairs.sort_unstable();

    let comp: Vec<CompDemand> = pairs
        .into_iter()
        .map(|(a, b)| CompDemand { src1: a, src2: b, dst: spec.destination })
        .collect();
    let budget = Instance::default_budget(0, comp.len());
    Instance::new(topology.clone(), Vec::new(), comp, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::builtin_cost239;

    fn toy5() -> Topology {
        let labels = ["A", "B", "C", "I", "X"].iter().map(|s| s.to_string()).collect();
        Topology::from_undirected_edges(5, &[(0, 4), (1, 4), (4, 3), (3, 2)], "toy5")
            .unwrap()
            .with_labels(labels)
            .unwrap()
    }

    #[test]
    fn star_instance_is_a_perfect_matching() {
        let t = builtin_cost239();
        for seed in 0..20 {
            let inst = generate_star_instance(
                &t,
                &GeneratorSpec { destination: NodeId(0), seed },
            )
            .unwrap();
            assert!(inst.comm.is_empty());
            assert_eq!(inst.comp.len(), 5);
            let mut seen: Vec<usize> = Vec::new();
            for q in &inst.comp {
                assert_eq!(q.dst, NodeId(0));
                seen.push(q.src1.0);
                seen.push(q.src2.0);
            }
            seen.sort_unstable();
            assert_eq!(seen, (1..11).collect::<Vec<_>>());
        }
    }

    #[test]
    fn calibration_seed_reproduces_benchmark_pairing() {
        let t = builtin_cost239();
        let inst = generate_star_instance(
            &t,
            &GeneratorSpec { destination: NodeId(0), seed: COST239_DEST1_SEED },
        )
        .unwrap();
        let pairs: Vec<(usize, usize)> = inst
            .comp
            .iter()
            .map(|q| (q.src1.external(), q.src2.external()))
            .collect();
        assert_eq!(pairs, vec![(2, 3), (4, 10), (5, 7), (6, 11), (8, 9)]);
    }

    // one-off search used to pin COST239_DEST1_SEED; kept for reproducibility
    #[test]
    #[ignore]
    fn find_calibration_seed() {
        let t = builtin_cost239();
        let want = vec![(2, 3), (4, 10), (5, 7), (6, 11), (8, 9)];
        for seed in 0..1_000_000u64 {
            let inst =
                generate_star_instance(&t, &GeneratorSpec { destination: NodeId(0), seed })
                    .unwrap();
            let pairs: Vec<(usize, usize)> = inst
                .comp
                .iter()
                .map(|q| (q.src1.external(), q.src2.external()))
                .collect();
            if pairs == want {
                println!("calibration seed: {seed}");
                return;
            }
        }
        panic!("no seed found in range");
    }

    #[test]
    fn generator_is_deterministic() {
        let t = builtin_cost239();
        let spec = GeneratorSpec { destination: NodeId(0), seed: 7 };
        let a = generate_star_instance(&t, &spec).unwrap();
        let b = generate_star_instance(&t, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn five_node_star_pairs_remaining_four() {
        let t = toy5();
        let inst = generate_star_instance(
            &t,
            &GeneratorSpec { destination: NodeId(0), seed: 3 },
        )
        .unwrap();
        assert_eq!(inst.comp.len(), 2);
        let mut seen: Vec<usize> = inst
            .comp
            .iter()
            .flat_map(|q| [q.src1.0, q.src2.0])
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![1, 2, 3, 4]);
    }

    #[test]
    fn odd_remainder_is_rejected() {
        let t = Topology::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3)], "p4").unwrap();
        let err =
            generate_star_instance(&t, &GeneratorSpec { destination: NodeId(0), seed: 1 })
                .unwrap_err();
        assert_eq!(err, DemandError::OddRemainder(3));
    }

    #[test]
    fn decompose_preserves_endpoints() {
        let q = CompDemand::new(NodeId(1), NodeId(2), NodeId(0)).unwrap();
        let (a, b) = decompose_bypass(&q);
        assert_eq!(a, CommDemand { src: NodeId(1), dst: NodeId(0) });
        assert_eq!(b, CommDemand { src: NodeId(2), dst: NodeId(0) });
    }

    #[test]
    fn parse_demand_lines() {
        let t = builtin_cost239();
        let inst = Instance::parse("# demo\nwavelengths 4\ncomp 2 3 1\ncomm 5 1\n", &t).unwrap();
        assert_eq!(inst.max_wavelengths, 4);
        assert_eq!(inst.comp, vec![CompDemand::new(NodeId(1), NodeId(2), NodeId(0)).unwrap()]);
        assert_eq!(inst.comm, vec![CommDemand::new(NodeId(4), NodeId(0)).unwrap()]);
    }

    #[test]
    fn parse_rejects_equal_endpoints_with_line_number() {
        let t = builtin_cost239();
        match Instance::parse("comm 4 4\n", &t) {
            Err(DemandError::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_out_of_range_node() {
        let t = toy5();
        match Instance::parse("comm 1 6\n", &t) {
            Err(DemandError::Parse { line: 1, .. }) => {}
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn instance_round_trip() {
        let t = builtin_cost239();
        let inst = generate_star_instance(
            &t,
            &GeneratorSpec { destination: NodeId(0), seed: COST239_DEST1_SEED },
        )
        .unwrap();
        let text = inst.serialize();
        let back = Instance::parse(&text, &t).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn comp_demand_requires_distinct_nodes() {
        assert!(CompDemand::new(NodeId(1), NodeId(1), NodeId(0)).is_err());
        assert!(CompDemand::new(NodeId(1), NodeId(2), NodeId(2)).is_err());
        assert!(CompDemand::new(NodeId(0), NodeId(2), NodeId(0)).is_err());
    }
}
