//! Fault-tolerant procedures as explicit leveled circuits.

mod ancilla;
mod cat;
mod css;
mod poly;
mod spread;
mod transversal;

pub use ancilla::{
    conditional_correction, encoded_cat, half_toffoli_correction_map, majority, mix_phase, toffoli_ancilla_css,
};
pub use cat::{and_into, cat_prep_verify, comparator, CatCircuit};
pub use css::{bit_stage, decode_gadget, ec_gadget, encode_gadget, prepare_s0};
pub use poly::{degree_reduction_gadget, degree_reduction_into, fourier_gadget, prepare_s0_poly, toffoli_gadget_poly};
pub use spread::{measure_spread, LocationSpread, SpreadOptions, SpreadReport};
pub use transversal::{transversal_gadget, transversal_into};

use crate::circuit::{Circuit, GateSet};
use crate::error::{Error, Result};
use crate::exec::PackedState;
use crate::qcode::{codeword, CodeKind, QuantumCode};
use crate::state::{SparseState, C64};
use std::sync::Arc;

/// What an input or output block holds.
#[derive(Debug, Clone)]
pub enum BlockSpec {
    /// A block of the given code.
    Code(Arc<QuantumCode>),
    /// m copies of one classical digit, as taken by encoding and produced by decoding.
    Repeated(usize),
}

impl BlockSpec {
    pub fn len(&self) -> usize {
        match self {
            BlockSpec::Code(c) => c.m(),
            BlockSpec::Repeated(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Block state for logical digit a.
    pub fn basis(&self, p: u32, a: u64) -> Result<SparseState> {
        match self {
            BlockSpec::Code(c) => codeword(c, a),
            BlockSpec::Repeated(n) => Ok(SparseState::basis(p, &vec![a as u32; *n])),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gadget {
    /// The logical operation implemented.
    pub name: String,
    pub set: GateSet,
    pub circuit: Circuit,
    /// Input blocks, a partition of the circuit inputs in order.
    pub inputs: Vec<Vec<usize>>,
    pub input_specs: Vec<BlockSpec>,
    pub outputs: Vec<Vec<usize>>,
    pub output_specs: Vec<BlockSpec>,
}

impl Gadget {
    pub fn p(&self) -> u32 {
        self.circuit.p()
    }

    pub fn output_wires(&self) -> Vec<usize> {
        self.outputs.concat()
    }

    pub fn check_gate_set(&self) -> Result<()> {
        self.circuit.check_gate_set(self.set)
    }

    /// Runs on a state over the concatenated input blocks.
    pub fn run(&self, input: &SparseState) -> Result<PackedState> {
        if input.n() != self.circuit.inputs() {
            return Err(Error::DimMismatch);
        }
        let mut st = PackedState::new(input)?;
        st.run(&self.circuit)?;
        Ok(st)
    }

    /// Noiseless output on the output blocks; errors if it is entangled with the ancillas.
    pub fn run_pure(&self, input: &SparseState) -> Result<SparseState> {
        self.run(input)?.pure_state(&self.output_wires())
    }

    /// Input state with every block in the given logical basis state.
    pub fn basis_input(&self, logical: &[u64]) -> Result<SparseState> {
        if logical.len() != self.input_specs.len() {
            return Err(Error::DimMismatch);
        }
        let mut st = SparseState::basis(self.p(), &[]);
        for (spec, &a) in self.input_specs.iter().zip(logical) {
            st = st.tensor(&spec.basis(self.p(), a)?);
        }
        Ok(st)
    }
}

pub fn gate_set_for(code: &QuantumCode) -> GateSet {
    if code.kind() == CodeKind::CssF2 {
        GateSet::G1
    } else {
        GateSet::G2
    }
}

/// Logical superposition sum_a alpha_a |S_a> for a block spec.
pub fn encode_block(spec: &BlockSpec, p: u32, alpha: &[C64]) -> Result<SparseState> {
    let mut out: Option<SparseState> = None;
    for (a, &al) in alpha.iter().enumerate() {
        if al.norm() == 0.0 {
            continue;
        }
        let b = spec.basis(p, a as u64)?;
        match &mut out {
            None => {
                let mut b = b;
                b.scale(al);
                out = Some(b);
            }
            Some(o) => o.add_scaled(&b, al),
        }
    }
    out.ok_or(Error::DimMismatch)
}

/// Inverse of a nonzero residue.
pub(crate) fn inv_mod(p: u32, c: u32) -> u32 {
    (1..p).find(|&x| x * c % p == 1).expect("nonzero residue")
}

/// b += c a via multiplication gates around a generalized CNOT.
pub(crate) fn scaled_cnot(circ: &mut Circuit, a: usize, b: usize, c: u32) {
    use crate::circuit::GateKind;
    let p = circ.p();
    let c = c % p;
    if c == 0 {
        return;
    }
    if c != 1 {
        circ.push(GateKind::Mul(c), &[a]);
    }
    circ.push(GateKind::GenCnot, &[a, b]);
    if c != 1 {
        circ.push(GateKind::Mul(inv_mod(p, c)), &[a]);
    }
}
