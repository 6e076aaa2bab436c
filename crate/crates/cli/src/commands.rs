use crate::report::{Outcome, Table};
use crate::*;
use anyhow::{anyhow, bail, Context, Result};
use ftqc::circuit::{Circuit, GateKind};
use ftqc::classical::make_steane_pair;
use ftqc::concat::{simulate_r, verify_sparse_propagation, CompileOptions, EcMode};
use ftqc::exec::PackedState;
use ftqc::fault::{trial_rng, NoiseKind, RectangleTree};
use ftqc::gadgets::*;
use ftqc::layout::{assign_slots, check_adjacent, route_1d, route_gadget, verify_equivalence, LinearLayout};
use ftqc::qcode::*;
use ftqc::state::gates::{clock, shift};
use ftqc::state::{reduced_trace_distance, SparseState, C64};
use ftqc::threshold::*;
use ftqc::univ::univ_commutator_check;
use rand::Rng;
use serde_json::{json, Value};
use std::path::Path;

/// Recorded argv of a report, without its output placement options.
pub fn argv_of(report: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(report).with_context(|| format!("reading {}", report.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;
    let argv = v["argv"].as_array().ok_or_else(|| anyhow!("{} has no argv", report.display()))?;
    let argv: Vec<String> = argv.iter().map(|a| a.as_str().map(String::from).ok_or_else(|| anyhow!("argv entries must be strings"))).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(argv.len());
    let mut skip = false;
    for a in argv {
        if std::mem::take(&mut skip) {
            continue;
        }
        if a == "--out" || a == "--name" {
            skip = true;
        } else if !(a.starts_with("--out=") || a.starts_with("--name=")) {
            out.push(a);
        }
    }
    Ok(out)
}

pub fn build_code(a: &CodeArgs) -> Result<QuantumCode> {
    if let Some(f) = &a.code_file {
        let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        return Ok(QuantumCode::from_text(&text)?);
    }
    Ok(match a.kind {
        CodeKindArg::Steane => {
            let (c1, c2) = make_steane_pair();
            make_css_code(&c1, &c2)?
        }
        CodeKindArg::Poly => make_poly_code(a.p, a.d)?,
    })
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Circuit::from_text(&text)?)
}

fn summary(code: &QuantumCode) -> Value {
    json!({
        "kind": code.kind().to_string(),
        "p": code.p(),
        "m": code.m(),
        "t": code.t(),
        "logical_dim": code.logical_dim(),
        "degree": code.degree(),
        "c1_dim": code.c1().dim(),
        "c2_dim": code.c2().dim(),
    })
}

pub fn execute(cmd: &Cmd, seed: u64, dir: &Path, stem: &str) -> Result<Outcome> {
    match cmd {
        Cmd::Code(CodeCmd::Build(a)) => code_build(a, dir, stem),
        Cmd::Code(CodeCmd::Check(a)) => code_check(a),
        Cmd::Gadget(GadgetCmd::Verify(a)) => gadget_verify(a, seed),
        Cmd::Gadget(GadgetCmd::Spread(a)) => gadget_spread(a),
        Cmd::Compile(a) => compile(a, dir, stem),
        Cmd::Threshold(ThresholdCmd::Analytic(a)) => analytic(a),
        Cmd::Threshold(ThresholdCmd::Mc(a)) => mc(a, seed),
        Cmd::Route(a) => route(a, seed, dir, stem),
        Cmd::Univcheck(a) => univ(a),
        Cmd::Rerun { .. } => unreachable!("handled by the caller"),
    }
}

fn code_build(a: &CodeArgs, dir: &Path, stem: &str) -> Result<Outcome> {
    let code = build_code(a)?;
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.code.txt"));
    std::fs::write(&path, code.to_text()).with_context(|| format!("writing {}", path.display()))?;
    let mut result = summary(&code);
    result["descriptor"] = json!(path.display().to_string());
    Ok(Outcome { result, table: Table::default(), pass: true })
}

fn code_check(a: &CodeArgs) -> Result<Outcome> {
    let code = build_code(a)?;
    let (p, m) = (code.p(), code.m());
    let nested = code.c2().generator().row_vecs().iter().all(|r| code.c1().contains(r));
    let dim_ok = code.logical_dim() == (p as u64).pow((code.c1().dim() - code.c2().dim()) as u32);
    let shape_ok = code.degree().is_none_or(|d| m == 3 * d + 1);
    let orthonormal = if code.logical_dim() <= 16 {
        let words: Vec<SparseState> = (0..code.logical_dim()).map(|v| codeword(&code, v)).collect::<std::result::Result<_, _>>()?;
        words.iter().enumerate().all(|(i, x)| words.iter().enumerate().all(|(j, y)| ((x.inner(y).norm() - if i == j { 1.0 } else { 0.0 }).abs()) < 1e-10))
    } else {
        true
    };
    let block: Vec<usize> = (0..m).collect();
    let mut table = Table::new(&["position", "pauli_x", "pauli_z", "logical", "trace_distance"]);
    let mut worst: f64 = 0.0;
    let logicals: Vec<u64> = (0..code.logical_dim().min(2)).collect();
    for &v in &logicals {
        let clean = codeword(&code, v)?;
        for q in 0..m {
            for x in 0..p {
                for z in 0..p {
                    if x + z == 0 {
                        continue;
                    }
                    let mut st = clean.clone();
                    st.apply_unitary(&shift(p, x).mul(&clock(p, z)), &[q])?;
                    let out = ideal_ec(&code, &st, &block)?;
                    let d = reduced_trace_distance(&out, &block, &clean, &block);
                    worst = worst.max(d);
                    table.push(vec![json!(q), json!(x), json!(z), json!(v), json!(d)]);
                }
            }
        }
    }
    let corrects = code.t() == 0 || worst < 1e-9;
    let mut result = summary(&code);
    result["checks"] = json!({
        "c2_in_c1": nested,
        "logical_dim_matches": dim_ok,
        "length_is_3d_plus_1": shape_ok,
        "codewords_orthonormal": orthonormal,
        "single_errors_corrected": corrects,
        "worst_trace_distance": worst,
        "errors_tested": table.rows.len(),
    });
    Ok(Outcome { result, table, pass: nested && dim_ok && shape_ok && orthonormal && corrects })
}

/// Gadget and the logical gate it implements (None for error correction).
fn make_gadget(code: &QuantumCode, name: &str) -> Result<(Gadget, Option<GateKind>)> {
    let (base, param) = match name.split_once(':') {
        Some((b, v)) => (b, Some(v.parse::<u32>().with_context(|| format!("bad parameter in `{name}`"))?)),
        None => (name, None),
    };
    let need = || param.ok_or_else(|| anyhow!("`{base}` needs a parameter, e.g. {base}:1"));
    let kind = match base {
        "ec" => return Ok((ec_gadget(code)?, None)),
        "fourier" => return Ok((fourier_gadget(code)?, Some(GateKind::Fourier(1)))),
        "toffoli" => return Ok((toffoli_gadget_poly(code)?, Some(GateKind::GenToffoli))),
        "cnot" => GateKind::Cnot,
        "h" => GateKind::Hadamard,
        "not" => GateKind::Not,
        "phase" => GateKind::Phase,
        "cphase" => GateKind::CPhase,
        "gcnot" => GateKind::GenCnot,
        "gnot" => GateKind::GenNot(need()?),
        "mul" => GateKind::Mul(need()?),
        "prot" => GateKind::PhaseRot(need()?),
        _ => bail!("unknown gadget `{name}`"),
    };
    Ok((transversal_gadget(code, kind)?, Some(kind)))
}

/// Encoded image of a logical state given by its terms.
fn encode_terms(g: &Gadget, terms: &[(Vec<u8>, C64)]) -> Result<SparseState> {
    let p = g.p();
    let mut out: Option<SparseState> = None;
    for (digits, amp) in terms {
        let mut st = SparseState::basis(p, &[]);
        for (spec, &d) in g.output_specs.iter().zip(digits) {
            st = st.tensor(&spec.basis(p, d as u64)?);
        }
        match &mut out {
            None => {
                st.scale(*amp);
                out = Some(st);
            }
            Some(o) => o.add_scaled(&st, *amp),
        }
    }
    out.ok_or_else(|| anyhow!("empty logical state"))
}

/// Output of the logical gate on bare qupits.
fn logical_image(p: u32, kind: Option<GateKind>, input: &SparseState) -> Result<Vec<(Vec<u8>, C64)>> {
    let Some(kind) = kind else {
        return Ok(input.terms().to_vec());
    };
    let mut c = Circuit::new(p, input.n());
    c.try_push(kind, &(0..input.n()).collect::<Vec<_>>())?;
    let mut st = PackedState::new(input)?;
    st.run(&c)?;
    Ok(st.pure_state(&(0..input.n()).collect::<Vec<_>>())?.terms().to_vec())
}

fn gadget_verify(a: &GadgetArgs, seed: u64) -> Result<Outcome> {
    let code = build_code(&a.code)?;
    let (g, kind) = make_gadget(&code, &a.gadget)?;
    let p = g.p();
    let n = g.input_specs.len();
    if g.output_specs.len() != n || g.output_specs.iter().any(|s| matches!(s, BlockSpec::Code(c) if c.logical_dim() != code.logical_dim())) {
        bail!("gadget `{}` changes the block layout; only block-preserving gadgets are verified", a.gadget);
    }
    let dim = code.logical_dim();
    let total = dim.checked_pow(n as u32).filter(|&t| t <= 1 << 16).ok_or_else(|| anyhow!("too many logical basis inputs"))?;
    let digits_of = |mut i: u64| -> Vec<u8> {
        let mut d = vec![0u8; n];
        for x in d.iter_mut().rev() {
            *x = (i % dim) as u8;
            i /= dim;
        }
        d
    };
    let check = |logical: SparseState| -> Result<f64> {
        let input = encode_terms(&g, logical.terms())?;
        let want = encode_terms(&g, &logical_image(p, kind, &logical)?)?;
        Ok(match g.run_pure(&input) {
            Ok(out) => out.fidelity(&want),
            Err(_) => 0.0,
        })
    };
    let mut table = Table::new(&["input", "fidelity"]);
    let mut worst: f64 = 1.0;
    for i in 0..total {
        let d = digits_of(i);
        let f = check(SparseState::basis(p, &d.iter().map(|&x| x as u32).collect::<Vec<_>>()))?;
        worst = worst.min(f);
        table.push(vec![json!(d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("")), json!(f)]);
    }
    let mut rng = trial_rng(seed, 0);
    let mut sup = SparseState::from_terms(p, n, (0..total).map(|i| (digits_of(i), C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))));
    sup.normalize();
    let f = check(sup)?;
    worst = worst.min(f);
    table.push(vec![json!("random-superposition"), json!(f)]);
    Ok(Outcome {
        result: json!({ "gadget": g.name, "code": summary(&code), "inputs_checked": table.rows.len(), "min_fidelity": worst }),
        table,
        pass: worst > 1.0 - 1e-9,
    })
}

fn gadget_spread(a: &SpreadArgs) -> Result<Outcome> {
    let code = build_code(&a.gadget.code)?;
    let (g, _) = make_gadget(&code, &a.gadget.gadget)?;
    let opts = SpreadOptions { preceding_ec: a.preceding_ec, max_affected: a.max_affected, ..Default::default() };
    let rep = measure_spread(&g, &opts)?;
    let mut table = Table::new(&["gate", "kind", "max_per_block"]);
    for l in &rep.locations {
        table.push(vec![json!(l.gate), json!(l.kind), json!(l.per_block.iter().copied().max().unwrap_or(0))]);
    }
    let mut pass = a.max_l.is_none_or(|m| rep.l <= m);
    let mut result = json!({ "spread": rep });
    if a.routed {
        let (rg, r) = route_gadget(&g, None)?;
        let routed = measure_spread(&rg, &opts)?;
        pass &= routed.l <= 2 * rep.l.max(1);
        result["routed"] = json!({ "l": routed.l, "swaps": r.swaps, "restarts": r.restarts, "within_twice": routed.l <= 2 * rep.l.max(1) });
    }
    Ok(Outcome { result, table, pass })
}

fn compile(a: &CompileArgs, dir: &Path, stem: &str) -> Result<Outcome> {
    let code = build_code(&a.code)?;
    let src = read_circuit(&a.circuit)?;
    let ec = match a.ec {
        EcArg::Gadget => EcMode::Gadget,
        EcArg::Ideal => EcMode::Ideal,
        EcArg::Off => EcMode::Off,
    };
    let opts = CompileOptions { ec, boundary: !a.no_boundary, max_locations: a.max_locations };
    let sim = simulate_r(&src, &code, a.r, &opts)?;
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.circuit.txt"));
    std::fs::write(&path, sim.circuit.to_text()).with_context(|| format!("writing {}", path.display()))?;
    let mut table = Table::new(&["period", "step", "first_level", "end_level"]);
    for (i, per) in sim.periods.iter().enumerate() {
        table.push(vec![json!(i), json!(per.step), json!(per.levels.start), json!(per.levels.end)]);
    }
    let mut result = json!({
        "code": summary(&code),
        "level": sim.level,
        "wires": sim.circuit.wires(),
        "gates": sim.circuit.len(),
        "depth": sim.circuit.depth(),
        "locations": sim.locations.len(),
        "boundary_locations": sim.boundary_locations(),
        "source_locations": sim.source_locations.len(),
        "max_rectangle": sim.tree.max_rectangle(),
        "max_branching": sim.tree.max_branching(),
        "periods": sim.periods.len(),
        "circuit_file": path.display().to_string(),
    });
    let mut pass = true;
    if a.verify_propagation {
        let rep = verify_sparse_propagation(&sim)?;
        pass = rep.violations == 0;
        result["propagation"] = json!(rep);
    }
    Ok(Outcome { result, table, pass })
}

fn analytic(a: &AnalyticArgs) -> Result<Outcome> {
    let ec = eta_c(a.a, a.k)?;
    let rational = eta_c_rational(a.a, a.k).ok().map(|(n, d)| format!("{n}/{d}"));
    let general = if a.k > 0 { Some(eta_c_general(a.a, a.k)?) } else { None };
    let fixed = if a.k > 0 { Some(threshold_fixed_point(a.a, a.k)?) } else { None };
    let eps0 = a.eps0.or(a.eta);
    let rates = eps0.map(|e| effective_rate(e, a.a, a.k, a.r)).unwrap_or_default();
    let delta = a.eta.and_then(|e| delta_for(e, a.a, a.k).ok());
    let delta_small = a.eta.and_then(|e| delta_small_for(e, a.a, a.k).ok());
    let mut table = Table::new(&["r", "effective_rate", "sparse_prob_bound", "minimal_bad_bound"]);
    for r in 1..=a.r {
        let rate = rates.get(r - 1).copied();
        let bound = match (a.eta, delta) {
            (Some(e), Some(d)) => Some(sparse_prob_bound(e, d, r as u32)),
            _ => None,
        };
        let bad = if a.k > 0 { Some(minimal_bad_count(a.a, a.k, r as u32).map(|b| b.0)?) } else { None };
        table.push(vec![json!(r), json!(rate), json!(bound), json!(bad)]);
    }
    Ok(Outcome {
        result: json!({
            "params": { "A": a.a, "k": a.k, "eta": a.eta, "eps0": eps0, "r": a.r },
            "eta_c": ec,
            "eta_c_rational": rational,
            "eta_c_general": general,
            "fixed_point": fixed,
            "effective_rates": rates,
            "below_threshold": a.eta.map(|e| e < ec),
            "delta": delta,
            "delta_small": delta_small,
        }),
        table,
        pass: true,
    })
}

fn mc(a: &McArgs, seed: u64) -> Result<Outcome> {
    let tree = RectangleTree::uniform(a.a, a.r, 1);
    let noise = match a.noise {
        NoiseArg::Iid => NoiseKind::Iid,
        NoiseArg::Burst => NoiseKind::Burst { mean_burst: a.mean_burst },
    };
    let est = monte_carlo_sparseness(&tree, a.eta, a.k, a.trials, seed, noise)?;
    let (au, ku) = (a.a as u64, a.k as u64);
    let per = a.trials.div_ceil(est.blocks.len().max(1) as u64);
    let mut table = Table::new(&["trial_block", "sparse_fraction", "stderr"]);
    for (i, &f) in est.blocks.iter().enumerate() {
        let n = per.min(a.trials - i as u64 * per);
        table.push(vec![json!(i), json!(f), json!((f * (1.0 - f) / n as f64).sqrt())]);
    }
    let delta = delta_for(a.eta, au, ku).ok();
    let bound = delta.map(|d| sparse_prob_bound(a.eta, d, a.r as u32));
    // The bound assumes independent faults; burst runs only report it.
    let iid = matches!(noise, NoiseKind::Iid);
    let pass = !iid || bound.is_none_or(|b| est.estimate >= b - 3.0 * est.stderr);
    Ok(Outcome {
        result: json!({
            "params": { "A": a.a, "k": a.k, "r": a.r, "eta": a.eta, "noise": a.noise, "mean_burst": a.mean_burst },
            "eta_c": eta_c(au, ku)?,
            "eta_c_general": eta_c_general(au, ku).ok(),
            "effective_rates": effective_rate(a.eta, au, ku, a.r),
            "sparse_prob_bound": bound,
            "bound_checked": iid && bound.is_some(),
            "mc": { "estimate": est.estimate, "stderr": est.stderr, "trials": est.trials, "seed": est.seed },
        }),
        table,
        pass,
    })
}

fn route(a: &RouteArgs, seed: u64, dir: &Path, stem: &str) -> Result<Outcome> {
    let src = read_circuit(&a.circuit)?;
    let (_, n) = assign_slots(&src);
    let layout = match &a.layout {
        Some(order) => LinearLayout::new(order.clone())?,
        None => LinearLayout::identity(n),
    };
    let r = route_1d(&src, &layout)?;
    let adjacent = check_adjacent(&r.circuit, &layout).is_ok();
    let equivalent = if a.verify { Some(verify_equivalence(&src, &r, a.samples, seed)?) } else { None };
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.circuit.txt"));
    std::fs::write(&path, r.circuit.to_text()).with_context(|| format!("writing {}", path.display()))?;
    let mut table = Table::new(&["gate", "swaps"]);
    for (i, s) in r.swaps_per_gate.iter().enumerate() {
        table.push(vec![json!(i), json!(s)]);
    }
    Ok(Outcome {
        result: json!({
            "positions": n,
            "layout": layout.order(),
            "gates": r.circuit.len(),
            "depth": r.circuit.depth(),
            "swaps": r.swaps,
            "restarts": r.restarts,
            "adjacent": adjacent,
            "equivalent": equivalent,
            "circuit_file": path.display().to_string(),
        }),
        table,
        pass: adjacent && equivalent != Some(false),
    })
}

fn univ(a: &UnivArgs) -> Result<Outcome> {
    let rep = univ_commutator_check(a.p, a.i, a.n_max)?;
    Ok(Outcome { pass: rep.all_pass(), result: json!(rep), table: Table::default() })
}
