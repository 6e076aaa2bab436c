use super::cat::{and_into, append_cat};
use super::poly::prepare_s0_poly;
use super::{gate_set_for, scaled_cnot, BlockSpec, Gadget};
use crate::circuit::{Circuit, GateSet};
use crate::classical::LinearCode;
use crate::error::{Error, Result};
use crate::qcode::{CodeKind, QuantumCode};
use std::sync::Arc;

struct Leader {
    syndrome: Vec<u32>,
    error: Vec<u32>,
    /// Beyond the correction radius, or another error of the same weight shares the syndrome.
    beyond: bool,
}

/// Whether some other error of the leader's weight has the same syndrome.
fn is_tie(code: &LinearCode, leader: &[u32], syndrome: &[u32]) -> bool {
    let m = leader.len();
    let w = leader.iter().filter(|&&x| x != 0).count();
    let p = code.field().p();
    let mut count = 0;
    let mut supp: Vec<usize> = (0..w).collect();
    loop {
        let mut vals = vec![1u32; w];
        loop {
            let mut e = vec![0u32; m];
            for (&i, &v) in supp.iter().zip(&vals) {
                e[i] = v;
            }
            if code.syndrome(&e).is_ok_and(|s| s == syndrome) {
                count += 1;
                if count > 1 {
                    return true;
                }
            }
            let Some(k) = (0..w).rev().find(|&k| vals[k] + 1 < p) else { break };
            vals[k] += 1;
            for v in &mut vals[k + 1..] {
                *v = 1;
            }
        }
        let Some(k) = (0..w).rev().find(|&k| supp[k] < m - w + k) else { return false };
        supp[k] += 1;
        for j in k + 1..w {
            supp[j] = supp[j - 1] + 1;
        }
    }
}

fn leader_table(code: &LinearCode) -> Vec<Leader> {
    let p = code.field().p() as u64;
    let r = code.parity_check().rows();
    (0..code.syndrome_count())
        .map(|idx| {
            let mut syndrome = vec![0u32; r];
            let mut x = idx;
            for j in (0..r).rev() {
                syndrome[j] = (x % p) as u32;
                x /= p;
            }
            let dec = code.decode_min_weight(&syndrome);
            let error = dec.error.to_dense(code.len());
            let beyond = dec.beyond_radius || is_tie(code, &error, &syndrome);
            Leader { error, beyond, syndrome }
        })
        .collect()
}

fn support(row: &[u32]) -> Vec<usize> {
    row.iter().enumerate().filter(|(_, &h)| h != 0).map(|(i, _)| i).collect()
}

/// target ^= [syn == sigma]; returns scratch wires left at zero.
fn indicator_into(c: &mut Circuit, syn: &[usize], sigma: &[u32], target: usize) -> Vec<usize> {
    let flip: Vec<usize> = syn.iter().zip(sigma).filter(|(_, &s)| s == 0).map(|(&w, _)| w).collect();
    for &w in &flip {
        c.not(w);
    }
    let scratch = and_into(c, syn, target, true);
    for &w in &flip {
        c.not(w);
    }
    scratch
}

/// s ^= parity of `data` on `supp`, measured through a verified cat state.
fn extract_parity(c: &mut Circuit, data: &[usize], supp: &[usize], s: usize) {
    match supp.len() {
        0 => {}
        1 => c.cnot(data[supp[0]], s),
        l => {
            let (cat, checks, work) = append_cat(c, l, l);
            c.discard_all(&work);
            for &w in &cat {
                c.h(w);
            }
            for k in 0..l {
                c.toffoli(checks[k], data[supp[k]], cat[k]);
            }
            for &w in &cat {
                c.cnot(w, s);
            }
            c.discard_all(&cat);
            c.discard_all(&checks);
        }
    }
}

/// Bit-flip correction of `data` against `code` (p = 2). One syndrome copy is measured per
/// coordinate and coordinate i is corrected from copy i alone. With `fresh`, a coordinate whose
/// syndrome has a leader beyond the correction radius is swapped with the fresh block instead.
pub fn bit_stage(c: &mut Circuit, code: &LinearCode, data: &[usize], fresh: Option<&[usize]>) {
    let m = data.len();
    let h = code.parity_check();
    let r = h.rows();
    if r == 0 {
        return;
    }
    let table = leader_table(code);
    let projecting = fresh.is_some() && table.iter().any(|l| l.beyond);
    let syn: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let s = c.add_n(r);
            for (j, &w) in s.iter().enumerate() {
                extract_parity(c, data, &support(h.row(j)), w);
            }
            s
        })
        .collect();
    let mut junk = Vec::new();
    for i in 0..m {
        let e = c.add();
        for l in table.iter().filter(|l| l.error[i] != 0 && !(projecting && l.beyond)) {
            junk.extend(indicator_into(c, &syn[i], &l.syndrome, e));
        }
        if projecting {
            let fresh = fresh.expect("projecting");
            let bad = c.add();
            for l in table.iter().filter(|l| l.beyond) {
                junk.extend(indicator_into(c, &syn[i], &l.syndrome, bad));
            }
            let ok = c.add();
            c.not(ok);
            c.cnot(bad, ok);
            c.toffoli(e, ok, data[i]);
            c.toffoli(bad, data[i], fresh[i]);
            c.toffoli(bad, fresh[i], data[i]);
            c.toffoli(bad, data[i], fresh[i]);
            junk.extend([bad, ok]);
        } else {
            c.cnot(e, data[i]);
        }
        junk.push(e);
    }
    junk.extend(syn.concat());
    c.discard_all(&junk);
}

fn require_css_f2(code: &QuantumCode) -> Result<()> {
    if code.kind() != CodeKind::CssF2 {
        return Err(Error::Unsupported(format!("{} codes have no reversible syndrome decoder here", code.kind())));
    }
    Ok(())
}

/// Appends fault-tolerant preparation of |S_0> on fresh wires: H on every qubit, then bit-flip
/// correction against C2.
pub fn prepare_s0(c: &mut Circuit, code: &QuantumCode) -> Result<Vec<usize>> {
    require_css_f2(code)?;
    let w = c.add_n(code.m());
    for &q in &w {
        c.h(q);
    }
    bit_stage(c, code.c2(), &w, None);
    Ok(w)
}

fn needs_projection(code: &LinearCode) -> bool {
    leader_table(code).iter().any(|l| l.beyond)
}

/// Error correction: bit stage against C1, then the phase stage as a bit stage against C2^perp
/// between transversal Hadamards.
pub fn ec_gadget(code: &QuantumCode) -> Result<Gadget> {
    require_css_f2(code)?;
    if code.t() == 0 {
        return Err(Error::Unsupported("code corrects no errors".into()));
    }
    let m = code.m();
    let mut c = Circuit::new(2, m);
    let data: Vec<usize> = (0..m).collect();
    let fresh_bit = if needs_projection(code.c1()) { Some(prepare_s0(&mut c, code)?) } else { None };
    let fresh_phase = if needs_projection(code.c2_dual()) {
        let f = prepare_s0(&mut c, code)?;
        for &q in &f {
            c.h(q);
        }
        Some(f)
    } else {
        None
    };
    bit_stage(&mut c, code.c1(), &data, fresh_bit.as_deref());
    for &q in &data {
        c.h(q);
    }
    bit_stage(&mut c, code.c2_dual(), &data, fresh_phase.as_deref());
    for &q in &data {
        c.h(q);
    }
    for f in [fresh_bit, fresh_phase].into_iter().flatten() {
        c.discard_all(&f);
    }
    let spec = BlockSpec::Code(Arc::new(code.clone()));
    Ok(Gadget {
        name: "ec".into(),
        set: GateSet::G1,
        circuit: c,
        inputs: vec![data.clone()],
        input_specs: vec![spec.clone()],
        outputs: vec![data],
        output_specs: vec![spec],
    })
}

fn require_one_logical(code: &QuantumCode) -> Result<()> {
    if code.logical_dim() != code.p() as u64 {
        return Err(Error::Unsupported("encoding needs exactly one logical qupit".into()));
    }
    Ok(())
}

/// |a^m> -> |a^m>|S_a>: prepare |S_0> and add a rep(1) controlled by the input digits.
pub fn encode_gadget(code: &QuantumCode) -> Result<Gadget> {
    require_one_logical(code)?;
    let m = code.m();
    let mut c = Circuit::new(code.p(), m);
    let raw: Vec<usize> = (0..m).collect();
    let block = match code.kind() {
        CodeKind::CssF2 => prepare_s0(&mut c, code)?,
        CodeKind::Polynomial => prepare_s0_poly(&mut c, code)?,
        CodeKind::CssFp => return Err(Error::Unsupported("no |S_0> preparation for this code".into())),
    };
    let rep = code.rep(1)?.to_vec();
    for l in 0..m {
        if code.kind() == CodeKind::CssF2 {
            if rep[l] != 0 {
                c.cnot(raw[l], block[l]);
            }
        } else {
            scaled_cnot(&mut c, raw[l], block[l], rep[l]);
        }
    }
    Ok(Gadget {
        name: "encode".into(),
        set: gate_set_for(code),
        circuit: c,
        inputs: vec![raw],
        input_specs: vec![BlockSpec::Repeated(m)],
        outputs: vec![block],
        output_specs: vec![BlockSpec::Code(Arc::new(code.clone()))],
    })
}

/// Linear functional v with v . x = logical value of x for x in C1.
pub(crate) fn logical_functional(code: &QuantumCode) -> Result<Vec<u32>> {
    if let Some(cl) = code.interp_coeffs() {
        return Ok(cl);
    }
    let f = code.field();
    let rep = code.rep(1)?;
    for v in code.c2_dual().codewords()? {
        let dot = v.iter().zip(rep).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
        if dot != 0 {
            let s = f.inv(dot)?;
            return Ok(v.iter().map(|&x| f.mul(x, s)).collect());
        }
    }
    Err(Error::Unsupported("no logical functional".into()))
}

/// |S_a> -> m digits all equal to a. Each output digit is computed from its own syndrome
/// measurement and classical correction (CSS over F_2) or by interpolation (polynomial codes).
pub fn decode_gadget(code: &QuantumCode) -> Result<Gadget> {
    require_one_logical(code)?;
    let m = code.m();
    let p = code.p();
    let mut c = Circuit::new(p, m);
    let data: Vec<usize> = (0..m).collect();
    let v = logical_functional(code)?;
    let out = c.add_n(m);
    match code.kind() {
        CodeKind::CssF2 => {
            let h = code.c1().parity_check();
            let table = leader_table(code.c1());
            for &o in &out {
                let syn = c.add_n(h.rows());
                for (j, &s) in syn.iter().enumerate() {
                    for q in support(h.row(j)) {
                        c.cnot(data[q], s);
                    }
                }
                let mut junk = Vec::new();
                for q in support(&v) {
                    c.cnot(data[q], o);
                    for l in table.iter().filter(|l| l.error[q] != 0) {
                        junk.extend(indicator_into(&mut c, &syn, &l.syndrome, o));
                    }
                }
                junk.extend(syn);
                c.discard_all(&junk);
            }
        }
        _ => {
            for &o in &out {
                for l in 0..m {
                    scaled_cnot(&mut c, data[l], o, v[l]);
                }
            }
        }
    }
    Ok(Gadget {
        name: "decode".into(),
        set: gate_set_for(code),
        circuit: c,
        inputs: vec![data],
        input_specs: vec![BlockSpec::Code(Arc::new(code.clone()))],
        outputs: vec![out],
        output_specs: vec![BlockSpec::Repeated(m)],
    })
}
