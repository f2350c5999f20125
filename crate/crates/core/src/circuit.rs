//! Circuit intermediate representation, the ADIQP / ADIQP* validators and
//! CZ-graph extraction.
//!
//! A [`Circuit`] is a gate list over colored qubits. When `sandwich` is set the
//! circuit means `H^n · body · H^n` and the body must be diagonal. Measurement
//! is always in the Z basis; `postselect` pins outcomes, and `outcome_flip`
//! records qubits whose reported bit is inverted (an `X` folded into the
//! measurement).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

/// Register membership of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Output,
    /// Both input and output register (no relocation happened).
    #[serde(rename = "io")]
    InputOutput,
    Ancilla,
    None,
}

impl Role {
    pub fn is_output(self) -> bool {
        matches!(self, Role::Output | Role::InputOutput)
    }

    pub fn is_input(self) -> bool {
        matches!(self, Role::Input | Role::InputOutput)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitDecl {
    pub color: Color,
    pub index: usize,
    pub prep: u8,
    pub role: Role,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    /// `T^d` with `d` in `0..8`.
    TPower(u8),
    S,
    SDagger,
    Z,
    X,
    CZ,
    CCZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CZ => 2,
            GateKind::CCZ => 3,
            _ => 1,
        }
    }

    pub fn is_diagonal(self) -> bool {
        !matches!(self, GateKind::H | GateKind::X)
    }

    /// Exponent `d` such that the gate equals `T^d`, for single-qubit phases.
    pub fn t_exponent(self) -> Option<u8> {
        match self {
            GateKind::TPower(d) => Some(d % 8),
            GateKind::S => Some(2),
            GateKind::Z => Some(4),
            GateKind::SDagger => Some(6),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::TPower(_) => "T",
            GateKind::S => "S",
            GateKind::SDagger => "SDG",
            GateKind::Z => "Z",
            GateKind::X => "X",
            GateKind::CZ => "CZ",
            GateKind::CCZ => "CCZ",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Self {
        Self {
            kind,
            targets: targets.to_vec(),
        }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, &[q])
    }

    pub fn t(q: usize, power: u8) -> Self {
        Self::new(GateKind::TPower(power % 8), &[q])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::CZ, &[a, b])
    }

    pub fn ccz(a: usize, b: usize, c: usize) -> Self {
        Self::new(GateKind::CCZ, &[a, b, c])
    }

    fn check(&self, qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::InputShape(format!(
                "{} takes {} target(s), got {}",
                self.kind.name(),
                self.kind.arity(),
                self.targets.len()
            )));
        }
        if let Some(&q) = self.targets.iter().find(|&&q| q >= qubits) {
            return Err(Error::InputShape(format!(
                "{} targets qubit {q}, circuit has {qubits}",
                self.kind.name()
            )));
        }
        let distinct: BTreeSet<_> = self.targets.iter().collect();
        if distinct.len() != self.targets.len() {
            return Err(Error::InputShape(format!(
                "{} has repeated targets {:?}",
                self.kind.name(),
                self.targets
            )));
        }
        if let GateKind::TPower(d) = self.kind {
            if d > 7 {
                return Err(Error::InputShape(format!("T power {d} outside 0..8")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    pub qubits: Vec<QubitDecl>,
    pub sandwich: bool,
    pub body: Vec<Gate>,
    pub postselect: BTreeMap<usize, u8>,
    pub outcome_flip: BTreeSet<usize>,
}

impl Circuit {
    /// An empty sandwich circuit with no qubits.
    pub fn sandwich() -> Self {
        Self {
            sandwich: true,
            ..Self::default()
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Appends a qubit and returns its index.
    pub fn add_qubit(&mut self, color: Color, prep: u8, role: Role) -> usize {
        let index = self.qubits.len();
        self.qubits.push(QubitDecl {
            color,
            index,
            prep,
            role,
        });
        index
    }

    pub fn push(&mut self, gate: Gate) {
        self.body.push(gate);
    }

    pub fn color(&self, q: usize) -> Color {
        self.qubits[q].color
    }

    pub fn count(&self, color: Color) -> usize {
        self.qubits.iter().filter(|q| q.color == color).count()
    }

    /// Qubits of the output register, in index order.
    pub fn output_register(&self) -> Vec<usize> {
        self.qubits
            .iter()
            .filter(|q| q.role.is_output())
            .map(|q| q.index)
            .collect()
    }

    /// The qubits whose outcomes a distribution reports: the output register
    /// when one is declared, otherwise every qubit that is not postselected.
    pub fn reported_qubits(&self) -> Vec<usize> {
        let outputs = self.output_register();
        if !outputs.is_empty() {
            return outputs;
        }
        (0..self.num_qubits())
            .filter(|q| !self.postselect.contains_key(q))
            .collect()
    }

    /// Checks structural well-formedness (indices, arities, bit values).
    pub fn check_well_formed(&self) -> Result<()> {
        for (i, q) in self.qubits.iter().enumerate() {
            if q.index != i {
                return Err(Error::InputShape(format!(
                    "qubit declaration {i} carries index {}",
                    q.index
                )));
            }
            if q.prep > 1 {
                return Err(Error::InputShape(format!("qubit {i} prep {} is not a bit", q.prep)));
            }
        }
        for g in &self.body {
            g.check(self.num_qubits())?;
        }
        for (&q, &b) in &self.postselect {
            if q >= self.num_qubits() || b > 1 {
                return Err(Error::InputShape(format!("bad postselection {q} -> {b}")));
            }
        }
        if let Some(&q) = self.outcome_flip.iter().find(|&&q| q >= self.num_qubits()) {
            return Err(Error::InputShape(format!("outcome flip on missing qubit {q}")));
        }
        Ok(())
    }

    /// Number of CZ gates in the body touching `q`, for any color.
    fn cz_touches(&self, q: usize) -> usize {
        self.body
            .iter()
            .filter(|g| g.kind == GateKind::CZ && g.targets.contains(&q))
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitJson::from(self)).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CircuitJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Circuit::try_from(raw)
    }

    /// Renames qubit `q` to `perm[q]`; `perm` must be a permutation.
    pub fn relabel(&self, perm: &[usize]) -> Result<Circuit> {
        let n = self.num_qubits();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Argument("relabeling is not a permutation".into()));
        }
        let mut qubits = self.qubits.clone();
        for q in &self.qubits {
            qubits[perm[q.index]] = QubitDecl {
                index: perm[q.index],
                ..*q
            };
        }
        Ok(Circuit {
            qubits,
            sandwich: self.sandwich,
            body: self
                .body
                .iter()
                .map(|g| Gate {
                    kind: g.kind,
                    targets: g.targets.iter().map(|&t| perm[t]).collect(),
                })
                .collect(),
            postselect: self.postselect.iter().map(|(&q, &b)| (perm[q], b)).collect(),
            outcome_flip: self.outcome_flip.iter().map(|&q| perm[q]).collect(),
        })
    }
}

/// Count of CZ gates in the body touching the black qubit `black`.
pub fn cz_degree(c: &Circuit, black: usize) -> Result<usize> {
    match c.qubits.get(black) {
        None => Err(Error::Argument(format!("qubit {black} does not exist"))),
        Some(q) if q.color != Color::Black => {
            Err(Error::Argument(format!("qubit {black} is white")))
        }
        Some(_) => Ok(c.cz_touches(black)),
    }
}

/// Machine-readable violation codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    /// The circuit is not of the `H^n · diagonal · H^n` form.
    NotSandwich,
    /// A non-diagonal gate (H or X) sits in the body.
    NonDiagonal,
    /// A CZ joins two qubits of the same color.
    CzMonochrome,
    /// A black qubit touches more than two CZ gates.
    BlackDegree,
    /// A phase gate acts on a white qubit.
    TOnWhite,
    /// A black qubit is not prepared in `|0>`.
    BlackPrep,
    /// A black qubit is part of the input or output register.
    RegisterColor,
    /// A CCZ gate appears in a plain ADIQP body.
    CczForbidden,
    /// A CCZ gate under ADIQP* touches a black qubit.
    CczNotWhite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Qubit or gate index the violation points at.
    pub locus: Locus,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locus {
    Circuit,
    Qubit(usize),
    Gate(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    /// CZ count per black qubit.
    pub cz_degree: BTreeMap<usize, usize>,
}

impl ValidationReport {
    pub fn codes(&self) -> BTreeSet<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }
}

/// Checks every clause of the ADIQP definition.
pub fn validate_adiqp(c: &Circuit) -> ValidationReport {
    validate(c, false)
}

/// As [`validate_adiqp`], additionally allowing CCZ on three white qubits.
pub fn validate_adiqp_star(c: &Circuit) -> ValidationReport {
    validate(c, true)
}

fn validate(c: &Circuit, star: bool) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |code, locus, message: String| {
        violations.push(Violation {
            code,
            locus,
            message,
        })
    };

    if !c.sandwich {
        push(
            ViolationCode::NotSandwich,
            Locus::Circuit,
            "body is not wrapped in Hadamard layers".into(),
        );
    }
    for q in &c.qubits {
        if q.color == Color::Black && q.prep != 0 {
            push(
                ViolationCode::BlackPrep,
                Locus::Qubit(q.index),
                format!("black qubit {} prepared in |{}>", q.index, q.prep),
            );
        }
        if q.color == Color::Black && (q.role.is_input() || q.role.is_output()) {
            push(
                ViolationCode::RegisterColor,
                Locus::Qubit(q.index),
                format!("black qubit {} belongs to an input/output register", q.index),
            );
        }
    }
    let colors: Vec<Color> = c.qubits.iter().map(|q| q.color).collect();
    let color = |q: usize| colors.get(q).copied().unwrap_or(Color::White);
    for (gi, g) in c.body.iter().enumerate() {
        match g.kind {
            GateKind::H | GateKind::X => push(
                ViolationCode::NonDiagonal,
                Locus::Gate(gi),
                format!("{} is not diagonal", g.kind.name()),
            ),
            GateKind::CZ => {
                if color(g.targets[0]) == color(g.targets[1]) {
                    push(
                        ViolationCode::CzMonochrome,
                        Locus::Gate(gi),
                        format!("CZ{:?} joins two {:?} qubits", g.targets, color(g.targets[0])),
                    );
                }
            }
            GateKind::CCZ => {
                if !star {
                    push(
                        ViolationCode::CczForbidden,
                        Locus::Gate(gi),
                        "CCZ is not an ADIQP gate".into(),
                    );
                } else if g.targets.iter().any(|&q| color(q) != Color::White) {
                    push(
                        ViolationCode::CczNotWhite,
                        Locus::Gate(gi),
                        format!("CCZ{:?} touches a black qubit", g.targets),
                    );
                }
            }
            _ => {
                if color(g.targets[0]) == Color::White {
                    push(
                        ViolationCode::TOnWhite,
                        Locus::Gate(gi),
                        format!("{} on white qubit {}", g.kind.name(), g.targets[0]),
                    );
                }
            }
        }
    }
    let mut degrees = BTreeMap::new();
    for q in c.qubits.iter().filter(|q| q.color == Color::Black) {
        degrees.insert(q.index, 0usize);
    }
    for g in c.body.iter().filter(|g| g.kind == GateKind::CZ) {
        for t in &g.targets {
            if let Some(d) = degrees.get_mut(t) {
                *d += 1;
            }
        }
    }
    for (&b, &d) in &degrees {
        if d > 2 {
            push(
                ViolationCode::BlackDegree,
                Locus::Qubit(b),
                format!("black qubit {b} touches {d} CZ gates"),
            );
        }
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
        cz_degree: degrees,
    }
}

/// CZ graph of a circuit body with its white/black two-coloring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CzGraph {
    pub vertices: usize,
    /// Edges as `(min, max)` pairs, deduplicated.
    pub edges: BTreeSet<(usize, usize)>,
    /// `0` for white, `1` for black.
    pub coloring: Vec<u8>,
}

impl CzGraph {
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn is_properly_colored(&self) -> bool {
        self.edges
            .iter()
            .all(|&(a, b)| self.coloring[a] != self.coloring[b])
    }
}

/// Extracts the CZ graph of a validated circuit. A repeated CZ on the same
/// pair cancels, so only pairs hit an odd number of times become edges.
pub fn graph_of(c: &Circuit) -> Result<CzGraph> {
    let mut edges = BTreeSet::new();
    for g in c.body.iter().filter(|g| g.kind == GateKind::CZ) {
        let (a, b) = (g.targets[0].min(g.targets[1]), g.targets[0].max(g.targets[1]));
        if !edges.remove(&(a, b)) {
            edges.insert((a, b));
        }
    }
    let coloring = c
        .qubits
        .iter()
        .map(|q| match q.color {
            Color::White => 0,
            Color::Black => 1,
        })
        .collect();
    let graph = CzGraph {
        vertices: c.num_qubits(),
        edges,
        coloring,
    };
    if !graph.is_properly_colored() {
        return Err(Error::Consistency(
            "CZ graph is not bipartite under the declared coloring".into(),
        ));
    }
    Ok(graph)
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "circuit[{} white, {} black, {} gates{}]",
            self.count(Color::White),
            self.count(Color::Black),
            self.body.len(),
            if self.sandwich { ", sandwich" } else { "" }
        )
    }
}

// JSON wire format. Struct fields are declared in alphabetical order so the
// serialized key order is canonical.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    power: Option<u8>,
    targets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    body: Vec<GateJson>,
    n_black: usize,
    n_white: usize,
    #[serde(skip_serializing_if = "BTreeSet::is_empty", default)]
    outcome_flip: BTreeSet<usize>,
    #[serde(default)]
    postselect: BTreeMap<usize, u8>,
    qubits: Vec<QubitDecl>,
    sandwich: bool,
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        let body = c
            .body
            .iter()
            .map(|g| GateJson {
                kind: g.kind.name().to_string(),
                power: match g.kind {
                    GateKind::TPower(d) => Some(d),
                    _ => None,
                },
                targets: g.targets.clone(),
            })
            .collect();
        CircuitJson {
            body,
            n_black: c.count(Color::Black),
            n_white: c.count(Color::White),
            outcome_flip: c.outcome_flip.clone(),
            postselect: c.postselect.clone(),
            qubits: c.qubits.clone(),
            sandwich: c.sandwich,
        }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(raw: CircuitJson) -> Result<Self> {
        let body = raw
            .body
            .into_iter()
            .map(|g| {
                let kind = match (g.kind.as_str(), g.power) {
                    ("H", None) => GateKind::H,
                    ("T", Some(d)) => GateKind::TPower(d),
                    ("T", None) => GateKind::TPower(1),
                    ("S", None) => GateKind::S,
                    ("SDG", None) => GateKind::SDagger,
                    ("Z", None) => GateKind::Z,
                    ("X", None) => GateKind::X,
                    ("CZ", None) => GateKind::CZ,
                    ("CCZ", None) => GateKind::CCZ,
                    (k, p) => {
                        return Err(Error::Parse(format!("unknown gate {k:?} with power {p:?}")))
                    }
                };
                Ok(Gate {
                    kind,
                    targets: g.targets,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let c = Circuit {
            qubits: raw.qubits,
            sandwich: raw.sandwich,
            body,
            postselect: raw.postselect,
            outcome_flip: raw.outcome_flip,
        };
        c.check_well_formed()?;
        if c.count(Color::White) != raw.n_white || c.count(Color::Black) != raw.n_black {
            return Err(Error::Parse(format!(
                "header counts ({} white, {} black) disagree with qubit list",
                raw.n_white, raw.n_black
            )));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_white_one_black() -> Circuit {
        let mut c = Circuit::sandwich();
        c.add_qubit(Color::White, 0, Role::InputOutput);
        c.add_qubit(Color::White, 0, Role::InputOutput);
        c.add_qubit(Color::Black, 0, Role::Ancilla);
        c
    }

    #[test]
    fn empty_body_is_valid() {
        let c = two_white_one_black();
        assert!(validate_adiqp(&c).ok);
        assert!(validate_adiqp_star(&c).ok);
        let g = graph_of(&c).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn monochrome_cz() {
        let mut c = two_white_one_black();
        c.push(Gate::cz(0, 1));
        let r = validate_adiqp(&c);
        assert!(!r.ok);
        assert!(r.codes().contains(&ViolationCode::CzMonochrome));
    }

    #[test]
    fn black_degree() {
        let mut c = two_white_one_black();
        c.add_qubit(Color::White, 0, Role::Ancilla);
        for w in [0, 1, 3] {
            c.push(Gate::cz(w, 2));
        }
        let r = validate_adiqp(&c);
        assert_eq!(r.codes(), [ViolationCode::BlackDegree].into());
        assert_eq!(r.cz_degree[&2], 3);
    }

    #[test]
    fn star_permits_white_ccz_only() {
        let mut c = two_white_one_black();
        c.add_qubit(Color::White, 0, Role::Ancilla);
        c.push(Gate::ccz(0, 1, 3));
        assert!(!validate_adiqp(&c).ok);
        assert!(validate_adiqp_star(&c).ok);
        c.body[0] = Gate::ccz(0, 1, 2);
        assert_eq!(
            validate_adiqp_star(&c).codes(),
            [ViolationCode::CczNotWhite].into()
        );
    }

    #[test]
    fn cz_degree_counts() {
        let mut c = two_white_one_black();
        assert_eq!(cz_degree(&c, 2).unwrap(), 0);
        c.push(Gate::cz(0, 2));
        c.push(Gate::cz(2, 1));
        assert_eq!(cz_degree(&c, 2).unwrap(), 2);
        assert!(matches!(cz_degree(&c, 0), Err(Error::Argument(_))));
        assert!(cz_degree(&c, 9).is_err());
    }

    #[test]
    fn graph_path() {
        let mut c = Circuit::sandwich();
        let w = c.add_qubit(Color::White, 0, Role::InputOutput);
        let b1 = c.add_qubit(Color::Black, 0, Role::Ancilla);
        let b2 = c.add_qubit(Color::Black, 0, Role::Ancilla);
        c.push(Gate::cz(w, b1));
        c.push(Gate::cz(b2, w));
        let g = graph_of(&c).unwrap();
        assert_eq!(g.edges, [(0, 1), (0, 2)].into());
        assert_eq!(g.coloring, vec![0, 1, 1]);
        assert_eq!(g.neighbors(0), vec![1, 2]);
    }

    #[test]
    fn graph_detects_corruption() {
        let mut c = two_white_one_black();
        c.push(Gate::cz(0, 1));
        assert!(matches!(graph_of(&c), Err(Error::Consistency(_))));
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let mut c = two_white_one_black();
        c.push(Gate::cz(0, 2));
        c.push(Gate::t(2, 5));
        c.postselect.insert(2, 0);
        let text = c.to_json();
        let back = Circuit::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_rejects_malformed() {
        let mut c = two_white_one_black();
        c.push(Gate::cz(0, 2));
        let text = c.to_json().replace("\"CZ\"", "\"CNOT\"");
        assert!(Circuit::from_json(&text).is_err());
        let bad_target = c.to_json().replace("2\n      ]", "7\n      ]");
        assert!(Circuit::from_json(&bad_target).is_err());
    }
}
