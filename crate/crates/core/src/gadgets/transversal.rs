use super::{gate_set_for, BlockSpec, Gadget};
use crate::circuit::{Circuit, GateKind};
use crate::classical::dual;
use crate::error::{Error, Result};
use crate::qcode::{make_poly_code_degree, CodeKind, QuantumCode};
use std::sync::Arc;

/// Whether C2 is the dual of C1 (needed by Hadamard and controlled phase).
fn dual_pair(code: &QuantumCode) -> bool {
    let d = dual(code.c1());
    d.dim() == code.c2().dim() && (0..d.dim()).all(|r| code.c2().contains(d.generator().row(r)))
}

/// C2 words have weight 0 mod 4 and the other words of C1 weight 3 mod 4.
fn phase_weights(code: &QuantumCode) -> bool {
    let weight = |w: &[u32]| w.iter().filter(|&&x| x != 0).count();
    let Ok(words) = code.c1().codewords() else { return false };
    words.iter().all(|w| {
        let r = weight(w) % 4;
        if code.c2().contains(w) {
            r == 0
        } else {
            r == 3
        }
    })
}

/// Appends the pit-wise form of `kind` to `blocks` (one block per gate operand).
pub fn transversal_into(circ: &mut Circuit, code: &QuantumCode, kind: GateKind, blocks: &[Vec<usize>]) -> Result<()> {
    let not_t = || Err(Error::NotTransversal(kind.name().into()));
    let arity = if kind == GateKind::Discard { 1 } else { kind.arity() };
    if blocks.len() != arity || blocks.iter().any(|b| b.len() != code.m()) {
        return Err(Error::DimMismatch);
    }
    let allowed = match code.kind() {
        CodeKind::CssF2 => match kind {
            GateKind::Not | GateKind::Cnot | GateKind::Swap | GateKind::Discard => true,
            GateKind::Hadamard | GateKind::CPhase => dual_pair(code),
            GateKind::Phase => dual_pair(code) && phase_weights(code),
            _ => false,
        },
        CodeKind::Polynomial => matches!(
            kind,
            GateKind::GenNot(_)
                | GateKind::GenCnot
                | GateKind::Swap
                | GateKind::Mul(_)
                | GateKind::PhaseRot(_)
                | GateKind::Fourier(_)
                | GateKind::Discard
        ),
        CodeKind::CssFp => matches!(kind, GateKind::GenCnot | GateKind::Swap | GateKind::Mul(_) | GateKind::Discard),
    };
    if !allowed {
        return not_t();
    }
    let p = code.p();
    let coeffs = code.interp_coeffs();
    for l in 0..code.m() {
        let t: Vec<usize> = blocks.iter().map(|b| b[l]).collect();
        match kind {
            GateKind::Phase => {
                for _ in 0..3 {
                    circ.push(kind, &t);
                }
            }
            GateKind::PhaseRot(c) => {
                let cl = coeffs.as_ref().expect("polynomial code")[l];
                let r = c * cl % p;
                if r != 0 {
                    circ.push(GateKind::PhaseRot(r), &t);
                }
            }
            GateKind::Fourier(r) => {
                let cl = coeffs.as_ref().expect("polynomial code")[l];
                circ.push(GateKind::Fourier(r * cl % p), &t);
            }
            _ => circ.push(kind, &t),
        }
    }
    Ok(())
}

/// Pit-wise gadget for `kind`. For a polynomial code `Fourier(r)` is the transversal W(w^{r c_l})
/// part of the Fourier procedure; its output block holds a degree-2d word.
pub fn transversal_gadget(code: &QuantumCode, kind: GateKind) -> Result<Gadget> {
    let m = code.m();
    let n_blocks = if kind == GateKind::Discard { 1 } else { kind.arity() };
    let mut circ = Circuit::new(code.p(), n_blocks * m);
    let blocks: Vec<Vec<usize>> = (0..n_blocks).map(|b| (b * m..(b + 1) * m).collect()).collect();
    transversal_into(&mut circ, code, kind, &blocks)?;
    let spec = BlockSpec::Code(Arc::new(code.clone()));
    let (outputs, output_specs) = match kind {
        GateKind::Discard => (Vec::new(), Vec::new()),
        GateKind::Fourier(_) => {
            let d = code.degree().expect("polynomial code");
            let wide = make_poly_code_degree(code.p(), m, m - d - 1)?;
            (blocks.clone(), vec![BlockSpec::Code(Arc::new(wide))])
        }
        _ => (blocks.clone(), vec![spec.clone(); n_blocks]),
    };
    Ok(Gadget {
        name: format!("transversal-{}", kind.name()),
        set: gate_set_for(code),
        circuit: circ,
        inputs: blocks,
        input_specs: vec![spec; n_blocks],
        outputs,
        output_specs,
    })
}
