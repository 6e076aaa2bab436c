use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// A prepared and verified cat state (|0^l> + |1^l>)/sqrt 2.
#[derive(Debug, Clone)]
pub struct CatCircuit {
    pub circuit: Circuit,
    pub cat: Vec<usize>,
    /// One check bit per replica of the verification; 1 when the replica accepts.
    pub checks: Vec<usize>,
    /// Comparator outputs and AND scratch.
    pub work: Vec<usize>,
}

/// t ^= [a == b], built from two Toffolis and NOTs.
pub fn comparator(c: &mut Circuit, a: usize, b: usize, t: usize) {
    c.toffoli(a, b, t);
    c.not(a);
    c.not(b);
    c.toffoli(a, b, t);
    c.not(a);
    c.not(b);
}

/// t ^= AND of `inputs` with a Toffoli chain. Returns the scratch wires; with `uncompute` they
/// are restored to zero.
pub fn and_into(c: &mut Circuit, inputs: &[usize], t: usize, uncompute: bool) -> Vec<usize> {
    match inputs.len() {
        0 => {
            c.not(t);
            Vec::new()
        }
        1 => {
            c.cnot(inputs[0], t);
            Vec::new()
        }
        2 => {
            c.toffoli(inputs[0], inputs[1], t);
            Vec::new()
        }
        k => {
            let scratch = c.add_n(k - 2);
            c.toffoli(inputs[0], inputs[1], scratch[0]);
            for j in 1..k - 2 {
                c.toffoli(scratch[j - 1], inputs[j + 1], scratch[j]);
            }
            c.toffoli(scratch[k - 3], inputs[k - 1], t);
            if uncompute {
                for j in (1..k - 2).rev() {
                    c.toffoli(scratch[j - 1], inputs[j + 1], scratch[j]);
                }
                c.toffoli(inputs[0], inputs[1], scratch[0]);
            }
            scratch
        }
    }
}

/// Appends cat preparation on l fresh qubits with `replicas` independent verifications.
pub(crate) fn append_cat(c: &mut Circuit, l: usize, replicas: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let cat = c.add_n(l);
    c.h(cat[0]);
    for k in 1..l {
        c.cnot(cat[0], cat[k]);
    }
    let pairs: Vec<(usize, usize)> = (0..l.saturating_sub(1))
        .step_by(2)
        .chain((1..l.saturating_sub(1)).step_by(2))
        .map(|k| (cat[k], cat[k + 1]))
        .collect();
    let mut checks = Vec::with_capacity(replicas);
    let mut work = Vec::new();
    for _ in 0..replicas {
        let outs: Vec<usize> = pairs
            .iter()
            .map(|&(a, b)| {
                let t = c.add();
                comparator(c, a, b, t);
                t
            })
            .collect();
        let chk = c.add();
        work.extend(and_into(c, &outs, chk, false));
        work.extend(outs);
        checks.push(chk);
    }
    (cat, checks, work)
}

/// Standalone cat preparation with m verification replicas (p = 2).
pub fn cat_prep_verify(l: usize, m: usize) -> Result<CatCircuit> {
    if l < 2 || m < 2 {
        return Err(Error::BadParams(format!("cat needs l >= 2 and m >= 2, got l={l} m={m}")));
    }
    let mut circuit = Circuit::new(2, 0);
    let (cat, checks, work) = append_cat(&mut circuit, l, m);
    Ok(CatCircuit { circuit, cat, checks, work })
}
