//! Link-flow MILP encodings of the two planning problems, LP-file export for
//! external solvers, and decoding of solver assignments back into
//! provisionings.
//!
//! Variable-name grammar (all indices 1-based in names):
//! `f_d<d>_s<k>_w<w>_e<e>` flow of demand d, segment k, wavelength w, arc e;
//! `a_d<d>(_s<k>)_w<w>` wavelength assignment (per segment only under
//! per-segment coupling); `u_<w>` wavelength w used anywhere;
//! `c_q<q>_v<v>` computing-node choice; `z_q<q>(_s<k>)_w<w>_v<v>`
//! linearization of a*c. Segment k is 0 for plain transmission demands and
//! 1..3 for the source-1, source-2 and delivery segments of computing
//! demands.

use std::collections::HashMap;

use thiserror::Error;

use crate::demand::Instance;
use crate::solution::{
    Coupling, DemandRef, Lightpath, ServedDemand, Solution, SolverStats, Status,
};
use crate::topology::{NodeId, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKey {
    /// Demand `demand` (combined comm+comp numbering) routes over `arc` on
    /// `wavelength` within segment `segment`.
    Flow { demand: usize, segment: u8, wavelength: usize, arc: usize },
    /// Demand `demand` is assigned `wavelength` (optionally per segment).
    Assign { demand: usize, segment: Option<u8>, wavelength: usize },
    /// Wavelength `wavelength` is used somewhere in the network.
    Use { wavelength: usize },
    /// Computing demand `comp` combines its sources at `node`.
    CompNode { comp: usize, node: usize },
    /// Product a * c for computing demand `comp`.
    Linearize { comp: usize, segment: Option<u8>, wavelength: usize, node: usize },
}

impl VarKey {
    pub fn render(&self) -> String {
        match *self {
            VarKey::Flow { demand, segment, wavelength, arc } => {
                format!("f_d{}_s{}_w{}_e{}", demand + 1, segment, wavelength, arc + 1)
            }
            VarKey::Assign { demand, segment: None, wavelength } => {
                format!("a_d{}_w{}", demand + 1, wavelength)
            }
            VarKey::Assign { demand, segment: Some(k), wavelength } => {
                format!("a_d{}_s{}_w{}", demand + 1, k, wavelength)
            }
            VarKey::Use { wavelength } => format!("u_{wavelength}"),
            VarKey::CompNode { comp, node } => format!("c_q{}_v{}", comp + 1, node + 1),
            VarKey::Linearize { comp, segment: None, wavelength, node } => {
                format!("z_q{}_w{}_v{}", comp + 1, wavelength, node + 1)
            }
            VarKey::Linearize { comp, segment: Some(k), wavelength, node } => {
                format!("z_q{}_s{}_w{}_v{}", comp + 1, k, wavelength, node + 1)
            }
        }
    }

    /// Inverse of [`VarKey::render`].
    pub fn parse(name: &str) -> Option<VarKey> {
        let mut parts = name.split('_');
        let kind = parts.next()?;
        let fields: Vec<&str> = parts.collect();
        let tag = |field: &str, tag: char| -> Option<usize> {
            field.strip_prefix(tag)?.parse().ok()
        };
        match kind {
            "u" => {
                if fields.len() != 1 {
                    return None;
                }
                let wavelength: usize = fields[0].parse().ok()?;
                Some(VarKey::Use { wavelength })
            }
            "f" => {
                if fields.len() != 4 {
                    return None;
                }
                Some(VarKey::Flow {
                    demand: tag(fields[0], 'd')?.checked_sub(1)?,
                    segment: tag(fields[1], 's')? as u8,
                    wavelength: tag(fields[2], 'w')?,
                    arc: tag(fields[3], 'e')?.checked_sub(1)?,
                })
            }
            "a" => match fields.len() {
                2 => Some(VarKey::Assign {
                    demand: tag(fields[0], 'd')?.checked_sub(1)?,
                    segment: None,
                    wavelength: tag(fields[1], 'w')?,
                }),
                3 => Some(VarKey::Assign {
                    demand: tag(fields[0], 'd')?.checked_sub(1)?,
                    segment: Some(tag(fields[1], 's')? as u8),
                    wavelength: tag(fields[2], 'w')?,
                }),
                _ => None,
            },
            "c" => {
                if fields.len() != 2 {
                    return None;
                }
                Some(VarKey::CompNode {
                    comp: tag(fields[0], 'q')?.checked_sub(1)?,
                    node: tag(fields[1], 'v')?.checked_sub(1)?,
                })
            }
            "z" => match fields.len() {
                3 => Some(VarKey::Linearize {
                    comp: tag(fields[0], 'q')?.checked_sub(1)?,
                    segment: None,
                    wavelength: tag(fields[1], 'w')?,
                    node: tag(fields[2], 'v')?.checked_sub(1)?,
                }),
                4 => Some(VarKey::Linearize {
                    comp: tag(fields[0], 'q')?.checked_sub(1)?,
                    segment: Some(tag(fields[1], 's')? as u8),
                    wavelength: tag(fields[2], 'w')?,
                    node: tag(fields[3], 'v')?.checked_sub(1)?,
                }),
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarKey, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A pure-binary linear model, minimized.
#[derive(Debug, Clone)]
pub struct IlpModel {
    pub variables: Vec<VarKey>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(VarKey, f64)>,
    index: HashMap<VarKey, usize>,
}

impl IlpModel {
    fn new() -> Self {
        IlpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn add_var(&mut self, key: VarKey) {
        debug_assert!(!self.index.contains_key(&key), "duplicate variable");
        self.index.insert(key, self.variables.len());
        self.variables.push(key);
    }

    pub fn var_index(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    fn constrain(&mut self, name: String, terms: Vec<(VarKey, f64)>, sense: Sense, rhs: f64) {
        debug_assert!(
            terms.iter().all(|(k, _)| self.index.contains_key(k)),
            "constraint {name} references undeclared variable"
        );
        self.constraints.push(Constraint { name, terms, sense, rhs });
    }
}

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("model needs a wavelength budget of at least 1")]
    NoWavelengths,
    #[error("computing demands must be decomposed before the RWA encoding")]
    CompNotDecomposed,
    #[error("empty assignment text")]
    EmptyAssignment,
    #[error("assignment line {0}: cannot parse {1:?}")]
    AssignmentSyntax(usize, String),
    #[error("assignment names unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0} has non-binary value {1}")]
    NotBinary(String, f64),
    #[error("assignment violates constraint {0}")]
    ConstraintViolated(String),
    #[error("no lightpath can be extracted for {0}")]
    Extract(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
}

struct DemandView {
    /// combined demand id for flow/assign naming
    id: usize,
    src: NodeId,
    dst: NodeId,
}

/// Encodes the plain routing-and-wavelength-assignment problem: one flow
/// system per demand and wavelength, a clash constraint per (wavelength,
/// arc), wavelength-use indicators with nonincreasing symmetry breaking, and
/// the used-wavelength count as objective.
pub fn encode_rwa(instance: &Instance, budget: usize) -> Result<IlpModel, MilpError> {
    if budget < 1 {
        return Err(MilpError::NoWavelengths);
    }
    if !instance.comp.is_empty() {
        return Err(MilpError::CompNotDecomposed);
    }
    let demands: Vec<DemandView> = instance
        .comm
        .iter()
        .enumerate()
        .map(|(i, d)| DemandView { id: i, src: d.src, dst: d.dst })
        .collect();
    Ok(build_model(instance, budget, &demands, &[], Coupling::PerDemand))
}

/// Encodes the extended problem with computing-node selection. Transmission
/// demands keep the RWA structure; every computing demand adds a
/// computing-node choice, three flow segments whose conservation is driven
/// by the linearized product of assignment and choice variables, and shares
/// the clash constraint with everything else.
pub fn encode_rwca(
    instance: &Instance,
    budget: usize,
    coupling: Coupling,
) -> Result<IlpModel, MilpError> {
    if budget < 1 {
        return Err(MilpError::NoWavelengths);
    }
    let demands: Vec<DemandView> = instance
        .comm
        .iter()
        .enumerate()
        .map(|(i, d)| DemandView { id: i, src: d.src, dst: d.dst })
        .collect();
    Ok(build_model(instance, budget, &demands, &instance.comp, coupling))
}

fn segments_of(coupling: Coupling) -> [u8; 3] {
    let _ = coupling;
    [1, 2, 3]
}

fn build_model(
    instance: &Instance,
    budget: usize,
    comm: &[DemandView],
    comp: &[crate::demand::CompDemand],
    coupling: Coupling,
) -> IlpModel {
    let topo = &instance.topology;
    let arcs = topo.arcs();
    let node_count = topo.node_count();
    let comm_len = comm.len();
    let mut m = IlpModel::new();

    // variables, in a fixed declaration order
    for d in comm {
        for w in 1..=budget {
            for arc in arcs {
                m.add_var(VarKey::Flow { demand: d.id, segment: 0, wavelength: w, arc: arc.id });
            }
        }
    }
    for (q, _) in comp.iter().enumerate() {
        for k in segments_of(coupling) {
            for w in 1..=budget {
                for arc in arcs {
                    m.add_var(VarKey::Flow {
                        demand: comm_len + q,
                        segment: k,
                        wavelength: w,
                        arc: arc.id,
                    });
                }
            }
        }
    }
    for d in comm {
        for w in 1..=budget {
            m.add_var(VarKey::Assign { demand: d.id, segment: None, wavelength: w });
        }
    }
    for (q, _) in comp.iter().enumerate() {
        match coupling {
            Coupling::PerDemand => {
                for w in 1..=budget {
                    m.add_var(VarKey::Assign {
                        demand: comm_len + q,
                        segment: None,
                        wavelength: w,
                    });
                }
            }
            Coupling::PerSegment => {
                for k in segments_of(coupling) {
                    for w in 1..=budget {
                        m.add_var(VarKey::Assign {
                            demand: comm_len + q,
                            segment: Some(k),
                            wavelength: w,
                        });
                    }
                }
            }
        }
    }
    for w in 1..=budget {
        m.add_var(VarKey::Use { wavelength: w });
    }
    for (q, _) in comp.iter().enumerate() {
        for v in 0..node_count {
            m.add_var(VarKey::CompNode { comp: q, node: v });
        }
    }
    for (q, _) in comp.iter().enumerate() {
        match coupling {
            Coupling::PerDemand => {
                for w in 1..=budget {
                    for v in 0..node_count {
                        m.add_var(VarKey::Linearize {
                            comp: q,
                            segment: None,
                            wavelength: w,
                            node: v,
                        });
                    }
                }
            }
            Coupling::PerSegment => {
                for k in segments_of(coupling) {
                    for w in 1..=budget {
                        for v in 0..node_count {
                            m.add_var(VarKey::Linearize {
                                comp: q,
                                segment: Some(k),
                                wavelength: w,
                                node: v,
                            });
                        }
                    }
                }
            }
        }
    }

    // continuity: one wavelength per demand (or per segment)
    for d in comm {
        let terms = (1..=budget)
            .map(|w| (VarKey::Assign { demand: d.id, segment: None, wavelength: w }, 1.0))
            .collect();
        m.constrain(format!("cont_d{}", d.id + 1), terms, Sense::Eq, 1.0);
    }
    for (q, _) in comp.iter().enumerate() {
        let id = comm_len + q;
        match coupling {
            Coupling::PerDemand => {
                let terms = (1..=budget)
                    .map(|w| (VarKey::Assign { demand: id, segment: None, wavelength: w }, 1.0))
                    .collect();
                m.constrain(format!("cont_d{}", id + 1), terms, Sense::Eq, 1.0);
            }
            Coupling::PerSegment => {
                for k in segments_of(coupling) {
                    let terms = (1..=budget)
                        .map(|w| {
                            (VarKey::Assign { demand: id, segment: Some(k), wavelength: w }, 1.0)
                        })
                        .collect();
                    m.constrain(format!("cont_d{}_s{k}", id + 1), terms, Sense::Eq, 1.0);
                }
            }
        }
    }

    // computing-node choice: exactly one node, never the destination
    for (q, demand) in comp.iter().enumerate() {
        let terms = (0..node_count)
            .map(|v| (VarKey::CompNode { comp: q, node: v }, 1.0))
            .collect();
        m.constrain(format!("one_node_q{}", q + 1), terms, Sense::Eq, 1.0);
        m.constrain(
            format!("not_dst_q{}", q + 1),
            vec![(VarKey::CompNode { comp: q, node: demand.dst.0 }, 1.0)],
            Sense::Eq,
            0.0,
        );
    }

    // linearization: z = a * c
    for (q, _) in comp.iter().enumerate() {
        let id = comm_len + q;
        let seg_tags: Vec<Option<u8>> = match coupling {
            Coupling::PerDemand => vec![None],
            Coupling::PerSegment => segments_of(coupling).iter().map(|&k| Some(k)).collect(),
        };
        for seg in seg_tags {
            let stag = seg.map(|k| format!("_s{k}")).unwrap_or_default();
            for w in 1..=budget {
                for v in 0..node_count {
                    let z = VarKey::Linearize { comp: q, segment: seg, wavelength: w, node: v };
                    let a = VarKey::Assign { demand: id, segment: seg, wavelength: w };
                    let c = VarKey::CompNode { comp: q, node: v };
                    m.constrain(
                        format!("lin_a_q{}{stag}_w{w}_v{}", q + 1, v + 1),
                        vec![(z, 1.0), (a, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                    m.constrain(
                        format!("lin_c_q{}{stag}_w{w}_v{}", q + 1, v + 1),
                        vec![(z, 1.0), (c, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                    m.constrain(
                        format!("lin_b_q{}{stag}_w{w}_v{}", q + 1, v + 1),
                        vec![(a, 1.0), (c, 1.0), (z, -1.0)],
                        Sense::Le,
                        1.0,
                    );
                }
            }
        }
    }

    // flow conservation per demand, wavelength and node
    for d in comm {
        for w in 1..=budget {
            for v in 0..node_count {
                let mut terms: Vec<(VarKey, f64)> = Vec::new();
                for &a in topo.out_arcs(NodeId(v)) {
                    terms.push((
                        VarKey::Flow { demand: d.id, segment: 0, wavelength: w, arc: a },
                        1.0,
                    ));
                }
                for &a in topo.in_arcs(NodeId(v)) {
                    terms.push((
                        VarKey::Flow { demand: d.id, segment: 0, wavelength: w, arc: a },
                        -1.0,
                    ));
                }
                let assign = VarKey::Assign { demand: d.id, segment: None, wavelength: w };
                if v == d.src.0 {
                    terms.push((assign, -1.0));
                } else if v == d.dst.0 {
                    terms.push((assign, 1.0));
                }
                m.constrain(
                    format!("cons_d{}_s0_w{w}_v{}", d.id + 1, v + 1),
                    terms,
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }
    for (q, demand) in comp.iter().enumerate() {
        let id = comm_len + q;
        for k in segments_of(coupling) {
            let seg_tag = match coupling {
                Coupling::PerDemand => None,
                Coupling::PerSegment => Some(k),
            };
            for w in 1..=budget {
                for v in 0..node_count {
                    let mut terms: Vec<(VarKey, f64)> = Vec::new();
                    for &a in topo.out_arcs(NodeId(v)) {
                        terms.push((
                            VarKey::Flow { demand: id, segment: k, wavelength: w, arc: a },
                            1.0,
                        ));
                    }
                    for &a in topo.in_arcs(NodeId(v)) {
                        terms.push((
                            VarKey::Flow { demand: id, segment: k, wavelength: w, arc: a },
                            -1.0,
                        ));
                    }
                    let assign = VarKey::Assign { demand: id, segment: seg_tag, wavelength: w };
                    let z = VarKey::Linearize {
                        comp: q,
                        segment: seg_tag,
                        wavelength: w,
                        node: v,
                    };
                    match k {
                        // sources 1 and 2 flow toward the computing node
                        1 | 2 => {
                            let src = if k == 1 { demand.src1 } else { demand.src2 };
                            if v == src.0 {
                                terms.push((assign, -1.0));
                            }
                            terms.push((z, 1.0));
                        }
                        // the delivery segment starts at the computing node
                        _ => {
                            terms.push((z, -1.0));
                            if v == demand.dst.0 {
                                terms.push((assign, 1.0));
                            }
                        }
                    }
                    m.constrain(
                        format!("cons_d{}_s{k}_w{w}_v{}", id + 1, v + 1),
                        terms,
                        Sense::Eq,
                        0.0,
                    );
                }
            }
        }
    }

    // wavelength uniqueness: every flow over (wavelength, arc) summed
    for w in 1..=budget {
        for arc in arcs {
            let mut terms: Vec<(VarKey, f64)> = Vec::new();
            for d in comm {
                terms.push((
                    VarKey::Flow { demand: d.id, segment: 0, wavelength: w, arc: arc.id },
                    1.0,
                ));
            }
            for (q, _) in comp.iter().enumerate() {
                for k in segments_of(coupling) {
                    terms.push((
                        VarKey::Flow {
                            demand: comm_len + q,
                            segment: k,
                            wavelength: w,
                            arc: arc.id,
                        },
                        1.0,
                    ));
                }
            }
            m.constrain(format!("clash_w{w}_e{}", arc.id + 1), terms, Sense::Le, 1.0);
        }
    }

    // a wavelength carrying any flow counts as used
    for d in comm {
        for w in 1..=budget {
            for arc in arcs {
                let f = VarKey::Flow { demand: d.id, segment: 0, wavelength: w, arc: arc.id };
                m.constrain(
                    format!("used_d{}_s0_w{w}_e{}", d.id + 1, arc.id + 1),
                    vec![(f, 1.0), (VarKey::Use { wavelength: w }, -1.0)],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }
    for (q, _) in comp.iter().enumerate() {
        let id = comm_len + q;
        for k in segments_of(coupling) {
            for w in 1..=budget {
                for arc in arcs {
                    let f = VarKey::Flow { demand: id, segment: k, wavelength: w, arc: arc.id };
                    m.constrain(
                        format!("used_d{}_s{k}_w{w}_e{}", id + 1, arc.id + 1),
                        vec![(f, 1.0), (VarKey::Use { wavelength: w }, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
    }

    // symmetry breaking: used wavelengths form a prefix
    for w in 1..budget {
        m.constrain(
            format!("sym_w{w}"),
            vec![
                (VarKey::Use { wavelength: w + 1 }, 1.0),
                (VarKey::Use { wavelength: w }, -1.0),
            ],
            Sense::Le,
            0.0,
        );
    }

    m.objective = (1..=budget).map(|w| (VarKey::Use { wavelength: w }, 1.0)).collect();
    m
}

/// Renders the model in the industry-standard LP text format, deterministic
/// down to the byte.
pub fn export_lp(m: &IlpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj: ");
    out.push_str(&render_terms(&m.objective, false));
    out.push_str("\nSubject To\n");
    for c in &m.constraints {
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        out.push_str(&format!(
            " {}: {} {} {}\n",
            c.name,
            render_terms(&c.terms, false),
            sense,
            format_num(c.rhs)
        ));
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for key in &m.variables {
        let name = key.render();
        if line.len() + name.len() + 1 > 76 {
            out.push(' ');
            out.push_str(line.trim_end());
            out.push('\n');
            line.clear();
        }
        line.push_str(&name);
        line.push(' ');
    }
    if !line.is_empty() {
        out.push(' ');
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

fn render_terms(terms: &[(VarKey, f64)], _parenthesize: bool) -> String {
    let mut out = String::new();
    for (i, (key, coeff)) in terms.iter().enumerate() {
        let mag = coeff.abs();
        let sign = if *coeff < 0.0 { "-" } else { "+" };
        if i == 0 {
            if *coeff < 0.0 {
                out.push_str("- ");
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if (mag - 1.0).abs() > 1e-12 {
            out.push_str(&format!("{} ", format_num(mag)));
        }
        out.push_str(&key.render());
    }
    out
}

fn format_num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Parses external solver output: one `<variable> <value>` pair per line,
/// `#` comments. Variables absent from the text default to zero; unknown
/// names are rejected so an assignment for a different instance cannot slip
/// through.
pub fn parse_assignment(m: &IlpModel, text: &str) -> Result<Vec<bool>, MilpError> {
    let mut values = vec![false; m.variables.len()];
    let mut any = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(name), Some(value)) = (tokens.next(), tokens.next()) else {
            return Err(MilpError::AssignmentSyntax(lineno + 1, line.to_string()));
        };
        if tokens.next().is_some() {
            return Err(MilpError::AssignmentSyntax(lineno + 1, line.to_string()));
        }
        let key = VarKey::parse(name)
            .ok_or_else(|| MilpError::UnknownVariable(name.to_string()))?;
        let idx = m
            .var_index(&key)
            .ok_or_else(|| MilpError::UnknownVariable(name.to_string()))?;
        let v: f64 = value
            .parse()
            .map_err(|_| MilpError::AssignmentSyntax(lineno + 1, line.to_string()))?;
        if (v - 0.0).abs() <= 1e-4 {
            values[idx] = false;
        } else if (v - 1.0).abs() <= 1e-4 {
            values[idx] = true;
        } else {
            return Err(MilpError::NotBinary(name.to_string(), v));
        }
        any = true;
    }
    if !any {
        return Err(MilpError::EmptyAssignment);
    }
    Ok(values)
}

fn value(m: &IlpModel, values: &[bool], key: &VarKey) -> f64 {
    m.var_index(key).map(|i| if values[i] { 1.0 } else { 0.0 }).unwrap_or(0.0)
}

/// Checks every constraint and walks the flow variables into lightpaths.
/// Flow cycles that satisfy conservation but are disconnected from the
/// source-to-sink walk are stripped. The combined demand numbering of
/// `instance` (transmission demands first) must match the one the model was
/// built from.
pub fn decode_solution(
    m: &IlpModel,
    values: &[bool],
    instance: &Instance,
) -> Result<Solution, MilpError> {
    for c in &m.constraints {
        let lhs: f64 = c.terms.iter().map(|(k, coeff)| coeff * value(m, values, k)).sum();
        let ok = match c.sense {
            Sense::Le => lhs <= c.rhs + 1e-6,
            Sense::Ge => lhs >= c.rhs - 1e-6,
            Sense::Eq => (lhs - c.rhs).abs() <= 1e-6,
        };
        if !ok {
            return Err(MilpError::ConstraintViolated(c.name.clone()));
        }
    }

    let budget = {
        let mut w = 0;
        while m.var_index(&VarKey::Use { wavelength: w + 1 }).is_some() {
            w += 1;
        }
        w
    };
    let comm_len = instance.comm.len();
    let coupling = if instance.comp.is_empty()
        || m.var_index(&VarKey::Assign { demand: comm_len, segment: Some(1), wavelength: 1 })
            .is_some()
    {
        Coupling::PerSegment
    } else {
        Coupling::PerDemand
    };

    let mut assignments = Vec::with_capacity(instance.demand_count());
    for (i, d) in instance.comm.iter().enumerate() {
        let label = format!("comm:{i}");
        let w = (1..=budget)
            .find(|&w| {
                value(m, values, &VarKey::Assign { demand: i, segment: None, wavelength: w })
                    > 0.5
            })
            .ok_or_else(|| MilpError::Extract(label.clone()))?;
        let route = extract_route(m, values, instance, i, 0, w, d.src, d.dst, &label)?;
        assignments.push(ServedDemand {
            demand: DemandRef::Comm(i),
            computing_node: None,
            segments: vec![Lightpath { route, wavelength: w }],
        });
    }
    for (q, demand) in instance.comp.iter().enumerate() {
        let id = comm_len + q;
        let label = format!("comp:{q}");
        let x = (0..instance.topology.node_count())
            .find(|&v| value(m, values, &VarKey::CompNode { comp: q, node: v }) > 0.5)
            .map(NodeId)
            .ok_or_else(|| MilpError::Extract(label.clone()))?;
        let mut segments = Vec::new();
        for k in [1u8, 2, 3] {
            let (from, to) = match k {
                1 => (demand.src1, x),
                2 => (demand.src2, x),
                _ => (x, demand.dst),
            };
            if from == to {
                continue; // degenerate segment: computing node at a source
            }
            let seg_tag = match coupling {
                Coupling::PerDemand => None,
                Coupling::PerSegment => Some(k),
            };
            let w = (1..=budget)
                .find(|&w| {
                    value(
                        m,
                        values,
                        &VarKey::Assign { demand: id, segment: seg_tag, wavelength: w },
                    ) > 0.5
                })
                .ok_or_else(|| MilpError::Extract(format!("{label} segment {k}")))?;
            let route = extract_route(m, values, instance, id, k, w, from, to, &label)?;
            segments.push(Lightpath { route, wavelength: w });
        }
        assignments.push(ServedDemand {
            demand: DemandRef::Comp(q),
            computing_node: Some(x),
            segments,
        });
    }

    let mut solution = Solution {
        assignments,
        wavelength_count: 0,
        wavelength_link_units: 0,
        status: Status::Feasible,
        stats: SolverStats::default(),
    };
    solution.refresh_metrics();
    Ok(solution)
}

/// Shortest walk from `src` to `dst` over the arcs whose flow variable is
/// set; breadth-first, so the result is simple and any flow cycles hanging
/// off the walk are ignored.
#[allow(clippy::too_many_arguments)]
fn extract_route(
    m: &IlpModel,
    values: &[bool],
    instance: &Instance,
    demand: usize,
    segment: u8,
    wavelength: usize,
    src: NodeId,
    dst: NodeId,
    label: &str,
) -> Result<Path, MilpError> {
    let topo = &instance.topology;
    let mut parent: Vec<Option<usize>> = vec![None; topo.node_count()];
    let mut seen = vec![false; topo.node_count()];
    seen[src.0] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(src);
    while let Some(v) = queue.pop_front() {
        if v == dst {
            break;
        }
        for &a in topo.out_arcs(v) {
            let key = VarKey::Flow { demand, segment, wavelength, arc: a };
            if value(m, values, &key) < 0.5 {
                continue;
            }
            let head = topo.arc(a).head;
            if seen[head.0] {
                continue;
            }
            seen[head.0] = true;
            parent[head.0] = Some(a);
            queue.push_back(head);
        }
    }
    if !seen[dst.0] {
        return Err(MilpError::Extract(label.to_string()));
    }
    let mut nodes = vec![dst];
    let mut arcs = Vec::new();
    let mut cur = dst;
    while cur != src {
        let a = parent[cur.0].expect("parent chain reaches src");
        arcs.push(a);
        cur = topo.arc(a).tail;
        nodes.push(cur);
    }
    nodes.reverse();
    arcs.reverse();
    Ok(Path::from_walk_unchecked(nodes, arcs))
}

/// Builds the assignment an exact MILP solver would report for a known
/// provisioning. Used for workflow tests and as a reference for the
/// assignment text format.
pub fn assignment_from_solution(
    m: &IlpModel,
    instance: &Instance,
    solution: &Solution,
    coupling: Coupling,
) -> Vec<bool> {
    let comm_len = instance.comm.len();
    let mut values = vec![false; m.variables.len()];
    let set = |key: VarKey, values: &mut Vec<bool>| {
        if let Some(i) = m.var_index(&key) {
            values[i] = true;
        }
    };
    let mut max_w = 0;

    for served in &solution.assignments {
        match served.demand {
            DemandRef::Comm(i) => {
                let lp = &served.segments[0];
                max_w = max_w.max(lp.wavelength);
                set(
                    VarKey::Assign { demand: i, segment: None, wavelength: lp.wavelength },
                    &mut values,
                );
                for &a in lp.route.arcs() {
                    set(
                        VarKey::Flow {
                            demand: i,
                            segment: 0,
                            wavelength: lp.wavelength,
                            arc: a,
                        },
                        &mut values,
                    );
                }
            }
            DemandRef::Comp(qi) => {
                let id = comm_len + qi;
                let q = &instance.comp[qi];
                let x = served.computing_node.expect("computing demand has a node");
                set(VarKey::CompNode { comp: qi, node: x.0 }, &mut values);
                for lp in &served.segments {
                    let (from, to) = (lp.route.src(), lp.route.dst());
                    let k: u8 = if from == q.src1 && to == x && x != q.src1 {
                        1
                    } else if from == q.src2 && to == x {
                        2
                    } else {
                        3
                    };
                    max_w = max_w.max(lp.wavelength);
                    let seg_tag = match coupling {
                        Coupling::PerDemand => None,
                        Coupling::PerSegment => Some(k),
                    };
                    set(
                        VarKey::Assign { demand: id, segment: seg_tag, wavelength: lp.wavelength },
                        &mut values,
                    );
                    set(
                        VarKey::Linearize {
                            comp: qi,
                            segment: seg_tag,
                            wavelength: lp.wavelength,
                            node: x.0,
                        },
                        &mut values,
                    );
                    for &a in lp.route.arcs() {
                        set(
                            VarKey::Flow {
                                demand: id,
                                segment: k,
                                wavelength: lp.wavelength,
                                arc: a,
                            },
                            &mut values,
                        );
                    }
                }
                // degenerate segments still carry an assignment; reuse the
                // delivery wavelength so the linearization stays consistent
                if coupling == Coupling::PerSegment {
                    for (k, from) in [(1u8, q.src1), (2u8, q.src2)] {
                        if from == x {
                            let w = served
                                .segments
                                .last()
                                .map(|lp| lp.wavelength)
                                .unwrap_or(1);
                            set(
                                VarKey::Assign { demand: id, segment: Some(k), wavelength: w },
                                &mut values,
                            );
                            set(
                                VarKey::Linearize {
                                    comp: qi,
                                    segment: Some(k),
                                    wavelength: w,
                                    node: x.0,
                                },
                                &mut values,
                            );
                        }
                    }
                }
            }
        }
    }
    for w in 1..=max_w {
        set(VarKey::Use { wavelength: w }, &mut values);
    }
    values
}

/// Renders an assignment as the `<variable> <value>` text understood by
/// [`parse_assignment`]. Zero entries are omitted, matching common solver
/// output.
pub fn render_assignment(m: &IlpModel, values: &[bool]) -> String {
    let mut out = String::new();
    for (i, key) in m.variables.iter().enumerate() {
        if values[i] {
            out.push_str(&format!("{} 1\n", key.render()));
        }
    }
    out
}
