use super::css::{decode_gadget, ec_gadget, logical_functional, prepare_s0};
use super::transversal::transversal_into;
use super::{BlockSpec, Gadget};
use crate::circuit::{Circuit, GateKind, GateSet};
use crate::error::{Error, Result};
use crate::qcode::{CodeKind, QuantumCode};
use std::sync::Arc;

/// Applies (-1)^{a (b c + d)} where a = functional . cat_block (p = 2).
pub fn mix_phase(c: &mut Circuit, cat_block: &[usize], functional: &[u32], b: usize, cc: usize, d: usize) {
    let supp: Vec<usize> = cat_block.iter().zip(functional).filter(|(_, &v)| v != 0).map(|(&w, _)| w).collect();
    let x = c.add();
    let y = c.add();
    for &w in &supp {
        c.cnot(w, x);
    }
    c.toffoli(b, cc, y);
    c.push(GateKind::CPhase, &[x, y]);
    c.push(GateKind::CPhase, &[x, d]);
    c.toffoli(b, cc, y);
    for &w in &supp {
        c.cnot(w, x);
    }
    c.discard_all(&[x, y]);
}

/// d ^= majority(a, b, c).
pub fn majority(c: &mut Circuit, a: usize, b: usize, cc: usize, d: usize) {
    c.toffoli(a, b, d);
    c.toffoli(a, cc, d);
    c.toffoli(b, cc, d);
}

/// Classical action of the correction applied to a measured half-Toffoli state: controls (x, y)
/// select identity, b += a + 1, (c += b; a += 1) or c += a + b + 1.
pub fn half_toffoli_correction_map(x: u8, y: u8, a: u8, b: u8, cc: u8) -> (u8, u8, u8) {
    match (x & 1, y & 1) {
        (0, 0) => (a, b, cc),
        (0, 1) => (a, b ^ a ^ 1, cc),
        (1, 0) => (a ^ 1, b, cc ^ b),
        _ => (a, b, cc ^ a ^ b ^ 1),
    }
}

/// Reversible circuit for `half_toffoli_correction_map`; controls are left unchanged.
pub fn conditional_correction(c: &mut Circuit, x: usize, y: usize, a: usize, b: usize, cc: usize) {
    let f01 = c.add();
    let f10 = c.add();
    let f11 = c.add();
    let flags = |c: &mut Circuit| {
        c.not(x);
        c.toffoli(x, y, f01);
        c.not(x);
        c.not(y);
        c.toffoli(x, y, f10);
        c.not(y);
        c.toffoli(x, y, f11);
    };
    flags(c);
    c.toffoli(f01, a, b);
    c.cnot(f01, b);
    c.toffoli(f10, b, cc);
    c.cnot(f10, a);
    c.toffoli(f11, a, cc);
    c.toffoli(f11, b, cc);
    c.cnot(f11, cc);
    flags(c);
    c.discard_all(&[f01, f10, f11]);
}

/// Appends the encoded cat (|S_0>^k + |S_1>^k)/sqrt 2 on `copies` fresh blocks, optionally with
/// error correction on every block.
pub fn encoded_cat(c: &mut Circuit, code: &QuantumCode, copies: usize, with_ec: bool) -> Result<Vec<Vec<usize>>> {
    if copies == 0 {
        return Err(Error::BadParams("encoded cat needs at least one block".into()));
    }
    let mut blocks = Vec::with_capacity(copies);
    for _ in 0..copies {
        blocks.push(prepare_s0(c, code)?);
    }
    transversal_into(c, code, GateKind::Hadamard, &blocks[..1])?;
    for k in 1..copies {
        transversal_into(c, code, GateKind::Cnot, &[blocks[0].clone(), blocks[k].clone()])?;
    }
    if with_ec {
        let ec = ec_gadget(code)?;
        for b in &mut blocks {
            let map = c.append(&ec.circuit, b);
            *b = ec.outputs[0].iter().map(|&w| map[w]).collect();
        }
    }
    Ok(blocks)
}

/// Preparation of the encoded Toffoli ancilla |A> = sum_{a,b} |S_a,S_b,S_ab> for a CSS code
/// over F_2: three blocks in (|A>+|B>), three encoded cats that each pick up the phase
/// separating |A> from |B>, decoding of the cats, a majority vote per coordinate, and a
/// conditional encoded NOT on the third block.
pub fn toffoli_ancilla_css(code: &QuantumCode) -> Result<Gadget> {
    if code.kind() != CodeKind::CssF2 {
        return Err(Error::Unsupported("Toffoli ancilla is built for CSS codes over F_2".into()));
    }
    let m = code.m();
    let v = logical_functional(code)?;
    let mut c = Circuit::new(2, 0);
    let mut anc = Vec::with_capacity(3);
    for _ in 0..3 {
        let b = prepare_s0(&mut c, code)?;
        transversal_into(&mut c, code, GateKind::Hadamard, std::slice::from_ref(&b))?;
        anc.push(b);
    }
    let dec = decode_gadget(code)?;
    let mut votes: Vec<Vec<usize>> = vec![Vec::new(); m];
    for _ in 0..3 {
        let cat = encoded_cat(&mut c, code, m, true)?;
        for (i, blk) in cat.iter().enumerate() {
            mix_phase(&mut c, blk, &v, anc[0][i], anc[1][i], anc[2][i]);
        }
        let mut parity: Option<Vec<usize>> = None;
        for blk in &cat {
            transversal_into(&mut c, code, GateKind::Hadamard, std::slice::from_ref(blk))?;
            let map = c.append(&dec.circuit, blk);
            let bits: Vec<usize> = dec.outputs[0].iter().map(|&w| map[w]).collect();
            match &parity {
                None => parity = Some(bits),
                Some(par) => {
                    for (&pw, &bw) in par.iter().zip(&bits) {
                        c.cnot(bw, pw);
                    }
                    c.discard_all(&bits);
                }
            }
            c.discard_all(blk);
        }
        for (i, w) in parity.expect("nonempty cat").into_iter().enumerate() {
            votes[i].push(w);
        }
    }
    for (i, vs) in votes.iter().enumerate() {
        let mu = c.add();
        majority(&mut c, vs[0], vs[1], vs[2], mu);
        c.cnot(mu, anc[2][i]);
        c.discard_all(vs);
        c.discard(mu);
    }
    let spec = BlockSpec::Code(Arc::new(code.clone()));
    Ok(Gadget {
        name: "toffoli-ancilla".into(),
        set: GateSet::G1,
        circuit: c,
        inputs: Vec::new(),
        input_specs: Vec::new(),
        outputs: anc,
        output_specs: vec![spec; 3],
    })
}
