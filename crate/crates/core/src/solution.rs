//! Provisioning results: lightpaths, per-demand assignments, metrics, and the
//! JSON-shaped document they serialize to.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::Instance;
use crate::topology::{NodeId, Path, Topology};

/// Which provisioning discipline to plan for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Lightpaths run source to destination; computing happens electrically
    /// at the destination.
    Bypass,
    /// An intermediate node combines the two source lightpaths optically.
    Occin,
}

/// Wavelength coupling for the lightpaths of one computing demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// All segments of a computing demand share one wavelength.
    #[serde(rename = "demand")]
    PerDemand,
    /// Each segment picks its wavelength independently.
    #[serde(rename = "segment")]
    PerSegment,
}

/// How the heuristic orders demands before first-fit placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandOrdering {
    LongestFirst,
    InputOrder,
}

/// Solver knobs shared by the exact and heuristic solvers.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub mode: Mode,
    pub coupling: Coupling,
    /// Overrides the instance wavelength budget when set; must be >= 1.
    pub max_wavelengths: Option<usize>,
    /// Search-node budget for the exact solver; 0 = unlimited.
    pub node_limit: u64,
    /// Wall-clock budget in seconds; 0 = unlimited.
    pub time_limit: f64,
    /// Forces sequential exploration and suppresses wall-time in reports so
    /// repeated runs are byte-identical.
    pub deterministic: bool,
    /// Sibling subtrees explored concurrently at the search root; values
    /// below 2 keep the search sequential.
    pub parallel_width: usize,
    /// Candidate routes per demand segment before the exhaustive fallback.
    pub k_routes: usize,
    pub ordering: DemandOrdering,
}

impl SolveConfig {
    pub fn new(mode: Mode) -> Self {
        SolveConfig {
            mode,
            coupling: Coupling::PerDemand,
            max_wavelengths: None,
            node_limit: 0,
            time_limit: 0.0,
            deterministic: false,
            parallel_width: 1,
            k_routes: 8,
            ordering: DemandOrdering::LongestFirst,
        }
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn deterministic(mut self) -> Self {
        self.deterministic = true;
        self
    }

    /// The wavelength budget in force for `instance`.
    pub fn budget(&self, instance: &Instance) -> usize {
        self.max_wavelengths.unwrap_or(instance.max_wavelengths)
    }
}

/// One all-optical connection: a simple route and the wavelength it occupies.
/// Wavelength indexes are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lightpath {
    pub route: Path,
    pub wavelength: usize,
}

/// Identifies the instance demand an assignment serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandRef {
    Comm(usize),
    Comp(usize),
}

/// The lightpaths provisioned for one demand. Computing demands also carry
/// the node where their sources are combined; degenerate zero-length
/// segments (computing node equal to a source) are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServedDemand {
    pub demand: DemandRef,
    pub computing_node: Option<NodeId>,
    pub segments: Vec<Lightpath>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes_expanded: u64,
    pub time_ms: u64,
}

/// A complete provisioning with its spectral metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub assignments: Vec<ServedDemand>,
    pub wavelength_count: usize,
    pub wavelength_link_units: usize,
    pub status: Status,
    pub stats: SolverStats,
}

impl Solution {
    pub fn empty(status: Status) -> Self {
        Solution {
            assignments: Vec::new(),
            wavelength_count: 0,
            wavelength_link_units: 0,
            status,
            stats: SolverStats::default(),
        }
    }

    pub fn lightpaths(&self) -> impl Iterator<Item = &Lightpath> {
        self.assignments.iter().flat_map(|a| a.segments.iter())
    }

    /// Recomputes (wavelength_count, wavelength_link_units) from the
    /// assignments and stores them.
    pub fn refresh_metrics(&mut self) {
        let mut used: Vec<usize> = self.lightpaths().map(|lp| lp.wavelength).collect();
        used.sort_unstable();
        used.dedup();
        self.wavelength_count = used.len();
        self.wavelength_link_units = self.lightpaths().map(|lp| lp.route.hops()).sum();
    }

    /// Converts to the serializable document, resolving demand endpoints
    /// against the instance.
    pub fn to_doc(&self, instance: &Instance, cfg: &SolveConfig) -> SolutionDoc {
        let assignments = self
            .assignments
            .iter()
            .map(|served| {
                let demand = match served.demand {
                    DemandRef::Comm(i) => {
                        let d = &instance.comm[i];
                        DemandDoc {
                            kind: "comm".into(),
                            index: i,
                            endpoints: vec![d.src.external(), d.dst.external()],
                        }
                    }
                    DemandRef::Comp(i) => {
                        let q = &instance.comp[i];
                        DemandDoc {
                            kind: "comp".into(),
                            index: i,
                            endpoints: vec![
                                q.src1.external(),
                                q.src2.external(),
                                q.dst.external(),
                            ],
                        }
                    }
                };
                ServedDemandDoc {
                    demand,
                    computing_node: served.computing_node.map(|v| v.external()),
                    segments: served
                        .segments
                        .iter()
                        .map(|lp| LightpathDoc {
                            route: lp.route.nodes().iter().map(|v| v.external()).collect(),
                            lambda: lp.wavelength,
                        })
                        .collect(),
                }
            })
            .collect();
        SolutionDoc {
            schema: SOLUTION_SCHEMA.into(),
            topology: instance.topology.name().into(),
            mode: cfg.mode,
            coupling: cfg.coupling,
            max_wavelengths: cfg.budget(instance),
            status: self.status,
            assignments,
            metrics: MetricsDoc {
                wavelength_count: self.wavelength_count,
                wavelength_link_units: self.wavelength_link_units,
            },
            stats: self.stats,
        }
    }
}

pub const SOLUTION_SCHEMA: &str = "rwca-solution/1";

/// Serializable form of a [`Solution`]. Node ids are 1-based. This is also
/// the shape the validator consumes, so malformed routes survive parsing and
/// are reported as rule violations instead of I/O errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub schema: String,
    pub topology: String,
    pub mode: Mode,
    pub coupling: Coupling,
    pub max_wavelengths: usize,
    pub status: Status,
    pub assignments: Vec<ServedDemandDoc>,
    pub metrics: MetricsDoc,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServedDemandDoc {
    pub demand: DemandDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computing_node: Option<usize>,
    pub segments: Vec<LightpathDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandDoc {
    pub kind: String,
    pub index: usize,
    pub endpoints: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightpathDoc {
    pub route: Vec<usize>,
    pub lambda: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub wavelength_count: usize,
    pub wavelength_link_units: usize,
}

impl SolutionDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SolutionParseError> {
        if text.trim().is_empty() {
            return Err(SolutionParseError::Empty);
        }
        let doc: SolutionDoc = serde_json::from_str(text)?;
        if doc.schema != SOLUTION_SCHEMA {
            return Err(SolutionParseError::Schema(doc.schema));
        }
        Ok(doc)
    }

    /// Rebuilds a typed solution; fails if any route is not a valid simple
    /// path of `topology`. Use the validator for diagnostics instead of this.
    pub fn to_solution(&self, topology: &Topology) -> Result<Solution, SolutionParseError> {
        let mut assignments = Vec::with_capacity(self.assignments.len());
        for served in &self.assignments {
            let demand = match served.demand.kind.as_str() {
                "comm" => DemandRef::Comm(served.demand.index),
                "comp" => DemandRef::Comp(served.demand.index),
                other => return Err(SolutionParseError::DemandKind(other.to_string())),
            };
            let mut segments = Vec::with_capacity(served.segments.len());
            for lp in &served.segments {
                let nodes: Vec<NodeId> = lp
                    .route
                    .iter()
                    .map(|&i| {
                        if i == 0 || i > topology.node_count() {
                            Err(SolutionParseError::Node(i))
                        } else {
                            Ok(NodeId(i - 1))
                        }
                    })
                    .collect::<Result<_, _>>()?;
                let route = Path::from_nodes(topology, nodes)
                    .map_err(|e| SolutionParseError::Route(e.to_string()))?;
                segments.push(Lightpath { route, wavelength: lp.lambda });
            }
            assignments.push(ServedDemand {
                demand,
                computing_node: served.computing_node.map(|i| NodeId(i - 1)),
                segments,
            });
        }
        let mut solution = Solution {
            assignments,
            wavelength_count: 0,
            wavelength_link_units: 0,
            status: self.status,
            stats: self.stats,
        };
        solution.refresh_metrics();
        Ok(solution)
    }
}

#[derive(Debug, Error)]
pub enum SolutionParseError {
    #[error("empty solution document")]
    Empty,
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("unknown demand kind {0:?}")]
    DemandKind(String),
    #[error("node index {0} out of range")]
    Node(usize),
    #[error("invalid route: {0}")]
    Route(String),
}
