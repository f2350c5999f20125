//! The seven postselected circuit equivalences used to drive white qubits.
//!
//! Every gadget is a sandwich circuit `H^n · D · H^n` whose diagonal body `D`
//! only uses CZ and T-power phases. Postselecting every measured qubit on `0`
//! leaves a map on the white register proportional to an ideal operator (the
//! *target channel*), with proportionality constant `2^(-a/2)` for `a`
//! postselected qubits.
//!
//! Inside the body, a black qubit `b` prepared in `|+>` and read out in the
//! `X` basis after `T^d` contributes `(1 + ω^d Z_S) / 2` (with `Z_S` the
//! product of `Z` over its CZ neighbours, `ω = e^{iπ/4}`):
//!
//! * one neighbour and `d = 6` gives `S` (the S-removal equality),
//! * two neighbours and `d = 2` gives `CZ · (S† ⊗ S†)` (the bridge),
//! * a white `w` joined to a fresh white `w'` and read out moves the state to
//!   `w'` with a Hadamard (the Hadamard gadget).
//!
//! Combining these yields `H^2 CZ H^2`, `H` and `HTH` on white qubits while
//! every black qubit touches at most two CZ gates.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Color, Gate, Role};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::sim::DenseSimulator;

/// Largest gadget circuit [`verify_gadget`] will simulate densely.
pub const MAX_GADGET_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GadgetKind {
    Bridge,
    SRemoval,
    TGadgetADQC,
    HadamardGadget,
    WhiteCZ,
    WhiteH,
    WhiteHTH,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 7] = [
        GadgetKind::Bridge,
        GadgetKind::SRemoval,
        GadgetKind::TGadgetADQC,
        GadgetKind::HadamardGadget,
        GadgetKind::WhiteCZ,
        GadgetKind::WhiteH,
        GadgetKind::WhiteHTH,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GadgetKind::Bridge => "bridge",
            GadgetKind::SRemoval => "s-removal",
            GadgetKind::TGadgetADQC => "t-gadget-adqc",
            GadgetKind::HadamardGadget => "hadamard-gadget",
            GadgetKind::WhiteCZ => "white-cz",
            GadgetKind::WhiteH => "white-h",
            GadgetKind::WhiteHTH => "white-hth",
        }
    }

    /// Gadgets meant to be embedded in ADIQP circuits (the composite ones).
    pub fn is_composite(self) -> bool {
        matches!(
            self,
            GadgetKind::WhiteCZ | GadgetKind::WhiteH | GadgetKind::WhiteHTH
        )
    }
}

/// A `Z` correction owed on a white target, expressed inside the body
/// (between the Hadamard layers).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZCorrection {
    pub targets: Vec<usize>,
}

/// A gadget bound to concrete wires.
#[derive(Clone, Debug)]
pub struct GadgetInstance {
    pub kind: GadgetKind,
    pub circuit: Circuit,
    /// White qubits carrying the logical input, in logical order.
    pub target_whites: Vec<usize>,
    /// White qubits carrying the logical output, in logical order.
    pub output_whites: Vec<usize>,
    pub ancillas: Vec<(usize, Color)>,
    /// Measured qubits and their success-branch outcome (all `0`).
    pub postselect_pattern: BTreeMap<usize, u8>,
    /// Byproduct corrections keyed by the outcome pattern over the ancillas
    /// listed in [`ancillas`](Self::ancillas). Only populated for `WhiteCZ`.
    pub byproduct: BTreeMap<Vec<u8>, ZCorrection>,
    pub output_relocation: Option<BTreeMap<usize, usize>>,
}

struct Builder {
    c: Circuit,
}

impl Builder {
    fn new() -> Self {
        Self {
            c: Circuit::sandwich(),
        }
    }

    fn white(&mut self, role: Role) -> usize {
        self.c.add_qubit(Color::White, 0, role)
    }

    fn black(&mut self) -> usize {
        self.c.add_qubit(Color::Black, 0, Role::Ancilla)
    }

    /// Black `b` joined to `neighbours`, then `T^d`.
    fn phase_black(&mut self, b: usize, neighbours: &[usize], d: u8) {
        for &w in neighbours {
            self.c.push(Gate::cz(w, b));
        }
        self.c.push(Gate::t(b, d));
    }
}

/// Builds the left-hand-side circuit of a gadget with its wiring records.
pub fn gadget(kind: GadgetKind) -> GadgetInstance {
    let mut b = Builder::new();
    let (inputs, outputs, measured): (Vec<usize>, Vec<usize>, Vec<usize>);
    let mut byproduct = BTreeMap::new();
    match kind {
        GadgetKind::Bridge => {
            let w1 = b.white(Role::InputOutput);
            let w2 = b.white(Role::InputOutput);
            let k = b.black();
            b.phase_black(k, &[w1, w2], 2);
            (inputs, outputs, measured) = (vec![w1, w2], vec![w1, w2], vec![k]);
        }
        GadgetKind::SRemoval => {
            let w = b.white(Role::InputOutput);
            let k = b.black();
            b.phase_black(k, &[w], 6);
            (inputs, outputs, measured) = (vec![w], vec![w], vec![k]);
        }
        GadgetKind::TGadgetADQC => {
            // The state passes through the black, which carries the T phase.
            let w_in = b.white(Role::Input);
            let k = b.black();
            let w_out = b.white(Role::Output);
            b.c.push(Gate::cz(w_in, k));
            b.c.push(Gate::t(k, 1));
            b.c.push(Gate::cz(k, w_out));
            (inputs, outputs, measured) = (vec![w_in], vec![w_out], vec![w_in, k]);
        }
        GadgetKind::HadamardGadget => {
            let w_in = b.white(Role::Input);
            let w_out = b.white(Role::Output);
            b.c.push(Gate::cz(w_in, w_out));
            (inputs, outputs, measured) = (vec![w_in], vec![w_out], vec![w_in]);
        }
        GadgetKind::WhiteCZ => {
            let w1 = b.white(Role::InputOutput);
            let w2 = b.white(Role::InputOutput);
            let (bridge, r1, r2) = (b.black(), b.black(), b.black());
            b.phase_black(bridge, &[w1, w2], 2);
            b.phase_black(r1, &[w1], 6);
            b.phase_black(r2, &[w2], 6);
            // Outcome v on a black flips its phase sign: the bridge then
            // leaves S⊗S and a remover leaves S†, so each white is off by Z
            // exactly when its remover disagrees with the bridge.
            for pattern in 1u8..8 {
                let v: Vec<u8> = (0..3).map(|i| pattern >> i & 1).collect();
                let mut targets = Vec::new();
                if v[0] ^ v[1] == 1 {
                    targets.push(w1);
                }
                if v[0] ^ v[2] == 1 {
                    targets.push(w2);
                }
                byproduct.insert(v, ZCorrection { targets });
            }
            byproduct.insert(vec![0, 0, 0], ZCorrection { targets: vec![] });
            (inputs, outputs, measured) = (vec![w1, w2], vec![w1, w2], vec![bridge, r1, r2]);
        }
        GadgetKind::WhiteH => {
            let w_in = b.white(Role::Input);
            let w_out = b.white(Role::Output);
            let (bridge, r_in, r_out) = (b.black(), b.black(), b.black());
            b.phase_black(bridge, &[w_in, w_out], 2);
            b.phase_black(r_in, &[w_in], 6);
            b.phase_black(r_out, &[w_out], 6);
            (inputs, outputs, measured) = (vec![w_in], vec![w_out], vec![w_in, bridge, r_in, r_out]);
        }
        GadgetKind::WhiteHTH => {
            // The ancilla white is joined to the target through a bridge and
            // carries a T and an S† black; projecting it leaves T on the
            // target.
            let w = b.white(Role::InputOutput);
            let a = b.white(Role::Ancilla);
            let (bridge, t, s) = (b.black(), b.black(), b.black());
            b.phase_black(bridge, &[w, a], 6);
            b.phase_black(t, &[a], 1);
            b.phase_black(s, &[a], 6);
            (inputs, outputs, measured) = (vec![w], vec![w], vec![a, bridge, t, s]);
        }
    }
    let mut circuit = b.c;
    let postselect_pattern: BTreeMap<usize, u8> = measured.iter().map(|&q| (q, 0)).collect();
    circuit.postselect = postselect_pattern.clone();
    let ancillas = circuit
        .qubits
        .iter()
        .filter(|q| !inputs.contains(&q.index))
        .filter(|q| !outputs.contains(&q.index) || q.color == Color::Black)
        .filter(|q| q.role == Role::Ancilla)
        .map(|q| (q.index, q.color))
        .collect();
    let output_relocation = (inputs != outputs).then(|| {
        inputs
            .iter()
            .zip(&outputs)
            .map(|(&i, &o)| (i, o))
            .collect()
    });
    GadgetInstance {
        kind,
        circuit,
        target_whites: inputs,
        output_whites: outputs,
        ancillas,
        postselect_pattern,
        byproduct,
        output_relocation,
    }
}

pub fn gadget_circuit(kind: GadgetKind) -> Circuit {
    gadget(kind).circuit
}

/// Ideal operator the success branch implements on the white register, in
/// the sandwich frame (input whites to output whites).
pub fn target_channel(kind: GadgetKind) -> Matrix {
    let h = linalg::hadamard();
    let h2 = linalg::on_all(&h, 2);
    match kind {
        GadgetKind::Bridge => {
            let sdg2 = linalg::kron(&linalg::t_power(6), &linalg::t_power(6));
            &h2 * linalg::cz() * sdg2 * &h2
        }
        GadgetKind::SRemoval => &h * linalg::t_power(2) * &h,
        GadgetKind::TGadgetADQC => linalg::t_power(1),
        GadgetKind::HadamardGadget | GadgetKind::WhiteH => h,
        GadgetKind::WhiteCZ => &h2 * linalg::cz() * &h2,
        GadgetKind::WhiteHTH => &h * linalg::t_power(1) * &h,
    }
}

/// Outcome of verifying one gadget against its target channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GadgetReport {
    pub kind: GadgetKind,
    pub qubits: usize,
    pub measured: usize,
    /// Operator-norm distance after rescaling by `2^(a/2)` and aligning the
    /// global phase.
    pub residual: f64,
    /// Success probability of the all-zero branch per computational input.
    pub success_probabilities: Vec<f64>,
    /// Expected value `2^-a`.
    pub expected_success: f64,
}

/// Postselected action of a gadget circuit for the outcome `pattern`
/// (indexed like `postselect_pattern`'s keys).
pub fn branch_action(inst: &GadgetInstance, pattern: &[u8]) -> Result<Matrix> {
    if pattern.len() != inst.postselect_pattern.len() {
        return Err(Error::Argument(format!(
            "pattern has {} bits, gadget measures {} qubits",
            pattern.len(),
            inst.postselect_pattern.len()
        )));
    }
    if inst.circuit.num_qubits() > MAX_GADGET_QUBITS {
        return Err(Error::ResourceLimit {
            what: "gadget qubit count",
            actual: inst.circuit.num_qubits(),
            limit: MAX_GADGET_QUBITS,
        });
    }
    let mut c = inst.circuit.clone();
    c.postselect = inst
        .postselect_pattern
        .keys()
        .zip(pattern)
        .map(|(&q, &b)| (q, b))
        .collect();
    DenseSimulator::with_limit(MAX_GADGET_QUBITS).action(&c, &inst.target_whites, &inst.output_whites)
}

/// Checks an instance (possibly a hand-modified one) against the target
/// channel of its kind.
pub fn verify_instance(inst: &GadgetInstance) -> Result<GadgetReport> {
    let measured = inst.postselect_pattern.len();
    let action = branch_action(inst, &vec![0; measured])?;
    let scale = (measured as f64 / 2.0).exp2();
    let target = target_channel(inst.kind);
    let residual = linalg::phase_aligned_distance(&(action.clone() * C64::new(scale, 0.0)), &target);
    let success_probabilities = (0..action.ncols())
        .map(|j| action.column(j).iter().map(|a| a.norm_sqr()).sum())
        .collect();
    Ok(GadgetReport {
        kind: inst.kind,
        qubits: inst.circuit.num_qubits(),
        measured,
        residual,
        success_probabilities,
        expected_success: (-(measured as f64)).exp2(),
    })
}

/// Dense verification of a library gadget.
pub fn verify_gadget(kind: GadgetKind) -> Result<GadgetReport> {
    verify_instance(&gadget(kind))
}

/// Z corrections that restore the target channel for a `WhiteCZ` branch with
/// the black outcomes `pattern` (bridge, first remover, second remover).
pub fn nonzero_branch_byproduct(kind: GadgetKind, pattern: &[u8]) -> Result<ZCorrection> {
    if kind != GadgetKind::WhiteCZ {
        return Err(Error::Argument(format!(
            "byproduct records exist only for white-cz, not {}",
            kind.name()
        )));
    }
    if pattern.len() != 3 || pattern.iter().any(|&b| b > 1) {
        return Err(Error::Argument(format!("pattern {pattern:?} is not 3 bits")));
    }
    let inst = gadget(kind);
    Ok(inst.byproduct[pattern].clone())
}

/// Residual of a `WhiteCZ` branch after applying its recorded correction.
///
/// A body-frame `Z` on a white is an `X` on its sandwich-frame output, so the
/// corrected branch is `X^c · A_v`.
pub fn corrected_branch_residual(pattern: &[u8]) -> Result<f64> {
    let inst = gadget(GadgetKind::WhiteCZ);
    let correction = nonzero_branch_byproduct(GadgetKind::WhiteCZ, pattern)?;
    // Postselection map keys are ordered bridge, r1, r2 by construction.
    let action = branch_action(&inst, pattern)?;
    let mut fix = linalg::identity(2);
    for t in &correction.targets {
        let pos = inst.output_whites.iter().position(|w| w == t).expect("target white");
        fix = linalg::on_qubit(&linalg::pauli_x(), pos, 2) * fix;
    }
    let corrected = fix * action * C64::new(8f64.sqrt(), 0.0);
    Ok(linalg::phase_aligned_distance(&corrected, &target_channel(GadgetKind::WhiteCZ)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate_adiqp, GateKind};

    #[test]
    fn every_gadget_matches_its_target() {
        for kind in GadgetKind::ALL {
            let r = verify_gadget(kind).unwrap();
            assert!(r.residual <= 1e-12, "{kind:?} residual {}", r.residual);
            for p in &r.success_probabilities {
                assert!((p - r.expected_success).abs() <= 1e-12, "{kind:?} success {p}");
            }
        }
    }

    #[test]
    fn resource_counts() {
        let count = |k, color| {
            gadget(k)
                .ancillas
                .iter()
                .filter(|(_, c)| *c == color)
                .count()
        };
        assert_eq!(count(GadgetKind::WhiteCZ, Color::Black), 3);
        assert_eq!(count(GadgetKind::WhiteCZ, Color::White), 0);
        for k in [GadgetKind::WhiteH, GadgetKind::WhiteHTH] {
            assert_eq!(count(k, Color::Black), 3);
        }
        assert_eq!(count(GadgetKind::WhiteHTH, Color::White), 1);
        // WhiteH's fresh white becomes the output.
        let h = gadget(GadgetKind::WhiteH);
        assert_eq!(h.circuit.count(Color::White), 2);
        assert_eq!(h.output_relocation.unwrap(), [(0, 1)].into());
        assert!(gadget(GadgetKind::WhiteHTH).output_relocation.is_none());
    }

    #[test]
    fn composite_gadgets_are_adiqp() {
        for kind in GadgetKind::ALL.into_iter().filter(|k| k.is_composite()) {
            let r = validate_adiqp(&gadget_circuit(kind));
            assert!(r.ok, "{kind:?}: {:?}", r.violations);
        }
    }

    #[test]
    fn miswired_white_cz_is_caught() {
        let mut inst = gadget(GadgetKind::WhiteCZ);
        // Attach the first remover to the second white instead.
        let g = inst
            .circuit
            .body
            .iter_mut()
            .find(|g| g.kind == GateKind::CZ && g.targets == [0, 3])
            .unwrap();
        g.targets = vec![1, 3];
        let r = verify_instance(&inst).unwrap();
        assert!(r.residual > 0.1, "residual {}", r.residual);
    }

    #[test]
    fn white_cz_byproducts() {
        assert!(nonzero_branch_byproduct(GadgetKind::WhiteCZ, &[0, 0, 0])
            .unwrap()
            .targets
            .is_empty());
        assert_eq!(
            nonzero_branch_byproduct(GadgetKind::WhiteCZ, &[1, 0, 0]).unwrap().targets,
            vec![0, 1]
        );
        for p in 1u8..8 {
            let v: Vec<u8> = (0..3).map(|i| p >> i & 1).collect();
            let r = corrected_branch_residual(&v).unwrap();
            assert!(r <= 1e-12, "pattern {v:?}: {r}");
        }
        assert!(nonzero_branch_byproduct(GadgetKind::WhiteH, &[1, 0, 0]).is_err());
        assert!(nonzero_branch_byproduct(GadgetKind::WhiteCZ, &[1, 0]).is_err());
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        for kind in GadgetKind::ALL {
            let inst = gadget(kind);
            let a = inst.postselect_pattern.len();
            let dim = 1 << inst.target_whites.len();
            let mut totals = vec![0.0; dim];
            for p in 0..1usize << a {
                let v: Vec<u8> = (0..a).map(|i| (p >> i & 1) as u8).collect();
                let m = branch_action(&inst, &v).unwrap();
                for (j, t) in totals.iter_mut().enumerate() {
                    *t += m.column(j).iter().map(|x| x.norm_sqr()).sum::<f64>();
                }
            }
            for t in totals {
                assert!((t - 1.0).abs() < 1e-12, "{kind:?}: {t}");
            }
        }
    }
}
