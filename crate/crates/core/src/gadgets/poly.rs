use super::transversal::transversal_into;
use super::{scaled_cnot, BlockSpec, Gadget};
use crate::circuit::{Circuit, GateKind, GateSet};
use crate::error::{Error, Result};
use crate::qcode::{make_poly_code_degree, CodeKind, QuantumCode};
use std::sync::Arc;

fn require_poly(code: &QuantumCode) -> Result<usize> {
    match (code.kind(), code.degree()) {
        (CodeKind::Polynomial, Some(d)) => Ok(d),
        _ => Err(Error::Unsupported("expected a polynomial code".into())),
    }
}

/// Code with the same points and twice the degree.
fn wide_code(code: &QuantumCode) -> Result<QuantumCode> {
    let d = require_poly(code)?;
    make_poly_code_degree(code.p(), code.m(), 2 * d)
}

/// Appends |S_0> on fresh wires: uniform values on the first `degree` points, the remaining
/// coordinates filled in by interpolation through zero.
pub fn prepare_s0_poly(c: &mut Circuit, code: &QuantumCode) -> Result<Vec<usize>> {
    let deg = require_poly(code)?;
    let f = code.field();
    let m = code.m();
    let w = c.add_n(m);
    for &q in &w[..deg] {
        c.push(GateKind::Fourier(1), &[q]);
    }
    // Lagrange basis over the nodes 0, 1, ..., deg, evaluated at alpha.
    let basis = |k: u32, alpha: u32| -> Result<u32> {
        let mut num = 1;
        let mut den = 1;
        for i in 0..=deg as u32 {
            if i != k {
                num = f.mul(num, f.sub(alpha, i));
                den = f.mul(den, f.sub(k, i));
            }
        }
        Ok(f.mul(num, f.inv(den)?))
    };
    for j in deg..m {
        for k in 0..deg {
            let coef = basis(k as u32 + 1, j as u32 + 1)?;
            scaled_cnot(c, w[k], w[j], coef);
        }
    }
    Ok(w)
}

/// Appends degree reduction: adds the logical value of the degree-2d block `x` to the degree-d
/// block `target`, leaving `x` unchanged. Each coordinate of `x` is opened into its own |S_0>
/// block, interpolated row by row into `target`, then closed again and discarded. `target` must
/// hold a coset superposition of C2.
pub fn degree_reduction_into(c: &mut Circuit, code: &QuantumCode, x: &[usize], target: &[usize]) -> Result<()> {
    require_poly(code)?;
    let m = code.m();
    if x.len() != m || target.len() != m {
        return Err(Error::DimMismatch);
    }
    let p = code.p();
    let coeffs = code.interp_coeffs().expect("polynomial code");
    // Blocks are handled one at a time: once wrapped, a block holds a C2 word that the target's
    // coset superposition absorbs, so it can be retired before the next one is opened.
    for (j, &xj) in x.iter().enumerate() {
        let o = prepare_s0_poly(c, code)?;
        for &q in &o {
            c.push(GateKind::GenCnot, &[xj, q]);
        }
        for i in 0..m {
            scaled_cnot(c, o[i], target[i], coeffs[j]);
        }
        c.push(GateKind::Mul(p - 1), &[xj]);
        for &q in &o {
            c.push(GateKind::GenCnot, &[xj, q]);
        }
        c.push(GateKind::Mul(p - 1), &[xj]);
        c.discard_all(&o);
    }
    Ok(())
}

fn block_spec(code: QuantumCode) -> BlockSpec {
    BlockSpec::Code(Arc::new(code))
}

/// |S'_a> -> |S'_a>|S_a> where S' is the degree-2d code on the same points.
pub fn degree_reduction_gadget(code: &QuantumCode) -> Result<Gadget> {
    let wide = wide_code(code)?;
    let m = code.m();
    let mut c = Circuit::new(code.p(), m);
    let x: Vec<usize> = (0..m).collect();
    let t = prepare_s0_poly(&mut c, code)?;
    degree_reduction_into(&mut c, code, &x, &t)?;
    Ok(Gadget {
        name: "degree-reduction".into(),
        set: GateSet::G2,
        circuit: c,
        inputs: vec![x.clone()],
        input_specs: vec![block_spec(wide.clone())],
        outputs: vec![x, t],
        output_specs: vec![block_spec(wide), block_spec(code.clone())],
    })
}

/// Logical W_1: transversal W into a degree-2d block, degree reduction into a fresh block, then
/// the old block is cleared by subtraction and discarded.
pub fn fourier_gadget(code: &QuantumCode) -> Result<Gadget> {
    require_poly(code)?;
    let m = code.m();
    let p = code.p();
    let mut c = Circuit::new(p, m);
    let x: Vec<usize> = (0..m).collect();
    transversal_into(&mut c, code, GateKind::Fourier(1), std::slice::from_ref(&x))?;
    let t = prepare_s0_poly(&mut c, code)?;
    degree_reduction_into(&mut c, code, &x, &t)?;
    for l in 0..m {
        c.push(GateKind::Mul(p - 1), &[t[l]]);
        c.push(GateKind::GenCnot, &[t[l], x[l]]);
        c.push(GateKind::Mul(p - 1), &[t[l]]);
    }
    c.discard_all(&x);
    let spec = block_spec(code.clone());
    Ok(Gadget {
        name: "fourier".into(),
        set: GateSet::G2,
        circuit: c,
        inputs: vec![x],
        input_specs: vec![spec.clone()],
        outputs: vec![t],
        output_specs: vec![spec],
    })
}

/// Logical generalized Toffoli |a,b,c> -> |a,b,c+ab>: pit-wise products into a degree-2d |S'_0>,
/// degree reduction into the third block, then the products are uncomputed.
pub fn toffoli_gadget_poly(code: &QuantumCode) -> Result<Gadget> {
    let wide = wide_code(code)?;
    let m = code.m();
    let p = code.p();
    let mut c = Circuit::new(p, 3 * m);
    let blocks: Vec<Vec<usize>> = (0..3).map(|b| (b * m..(b + 1) * m).collect()).collect();
    let (a, b, t) = (&blocks[0], &blocks[1], &blocks[2]);
    let s = prepare_s0_poly(&mut c, &wide)?;
    for l in 0..m {
        c.push(GateKind::GenToffoli, &[a[l], b[l], s[l]]);
    }
    degree_reduction_into(&mut c, code, &s, t)?;
    for l in 0..m {
        c.push(GateKind::Mul(p - 1), &[a[l]]);
        c.push(GateKind::GenToffoli, &[a[l], b[l], s[l]]);
        c.push(GateKind::Mul(p - 1), &[a[l]]);
    }
    c.discard_all(&s);
    let spec = block_spec(code.clone());
    Ok(Gadget {
        name: "toffoli".into(),
        set: GateSet::G2,
        circuit: c,
        inputs: blocks.clone(),
        input_specs: vec![spec.clone(); 3],
        outputs: blocks,
        output_specs: vec![spec; 3],
    })
}
