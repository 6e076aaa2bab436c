//! Acceptance criteria 1 to 12, one PASS/FAIL line each. Exits non-zero if any fails.

use anyhow::{bail, ensure, Context, Result};
use ftqc::circuit::{Circuit, GateKind};
use ftqc::classical::make_steane_pair;
use ftqc::concat::{recursive_majority, simulate_level, verify_sparse_propagation, CompileOptions, EcMode};
use ftqc::fault::{is_sparse, trial_rng, FaultPath, NoiseKind, RectangleTree};
use ftqc::gadgets::{degree_reduction_gadget, Gadget};
use ftqc::qcode::*;
use ftqc::state::{random_channel, reduced_trace_distance, SparseState, C64};
use ftqc::threshold::*;
use ftqc::univ::univ_commutator_check;
use rand::Rng;
use serde_json::Value;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

fn steane() -> QuantumCode {
    let (c1, c2) = make_steane_pair();
    make_css_code(&c1, &c2).unwrap()
}

/// Runs the binary in a scratch directory and returns its report; the run must exit 0.
fn cli(args: &[&str]) -> Result<Value> {
    let dir = tempfile::tempdir()?;
    let o = Command::new(env!("CARGO_BIN_EXE_ftqc")).args(args).arg("--out").arg(dir.path()).arg("--name").arg("r").env_remove("FTQC_OUT_DIR").output()?;
    ensure!(o.status.success(), "ftqc {} exited {:?}: {}", args.join(" "), o.status.code(), String::from_utf8_lossy(&o.stderr).trim());
    let text = std::fs::read_to_string(dir.path().join("r.json")).context("report written")?;
    Ok(serde_json::from_str(&text)?)
}

fn num(v: &Value) -> Result<f64> {
    v.as_f64().with_context(|| format!("expected a number, got {v}"))
}

fn c1() -> Result<String> {
    ensure!(eta_c_rational(100, 1)? == (1, 4950));
    let g = eta_c_general(100, 1)?;
    ensure!((g - 0.5 * (-1f64).exp() / 4950.0).abs() < 1e-12, "general {g}");
    let e = eta_c(1414, 1)?;
    ensure!((0.99e-6..=1.01e-6).contains(&e), "A=1414 gives {e}");
    let r = cli(&["threshold", "analytic", "--A", "100", "--k", "1"])?;
    ensure!(r["result"]["eta_c_rational"] == "1/4950");
    Ok(format!("eta_c(100,1) = 1/4950, general {g:.4e}, eta_c(1414,1) = {e:.4e}"))
}

fn c2() -> Result<String> {
    let s = cli(&["code", "check", "--code", "steane"])?;
    let p = cli(&["code", "check", "--code", "poly", "--p", "11", "--d", "2"])?;
    for (r, n) in [(&s, 2 * 21), (&p, 2 * 7 * 120)] {
        ensure!(r["pass"] == true, "{}", r["result"]);
        ensure!(r["result"]["checks"]["errors_tested"] == n);
    }
    // Every logical value of the qupit code, not only the two the CLI samples.
    let code = make_poly_code(11, 2)?;
    let block: Vec<usize> = (0..7).collect();
    let mut worst = 0f64;
    for a in 0..11 {
        let clean = codeword(&code, a)?;
        for q in 0..7 {
            for x in 0..11u32 {
                for z in 0..11u32 {
                    if x == 0 && z == 0 {
                        continue;
                    }
                    let mut st = clean.clone();
                    let e = ftqc::state::gates::shift(11, x).mul(&ftqc::state::gates::clock(11, z));
                    st.apply_unitary(&e, &[q])?;
                    let out = ideal_ec(&code, &st, &block)?;
                    worst = worst.max(reduced_trace_distance(&out, &block, &clean, &block));
                }
            }
        }
    }
    ensure!(worst < 1e-9, "poly worst trace distance {worst}");
    Ok(format!("steane 42 and poly(11,2) 1680 single errors corrected; all 11 logicals worst {worst:.1e}"))
}

fn c3() -> Result<String> {
    let code = steane();
    let m = code.m();
    let mut worst = 0f64;
    for seed in 0..50u64 {
        let mut rng = trial_rng(0xC3, seed);
        let alpha: Vec<C64> = (0..2).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let n = alpha.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        // sum_a alpha_a |S_a>|a>_ref, so the check covers the whole logical space.
        let mut terms = Vec::new();
        for (a, al) in alpha.iter().enumerate() {
            for (mut k, v) in codeword(&code, a as u64)?.into_terms() {
                k.push(a as u8);
                terms.push((k, v * al / n));
            }
        }
        let clean = SparseState::from_terms(2, m + 1, terms);
        let q = rng.gen_range(0..m);
        let noisy = random_channel(2, 1, seed)?.apply_sparse(&clean, &[q])?;
        let block: Vec<usize> = (0..m).collect();
        let out = ideal_ec(&code, &noisy, &block)?;
        let keep: Vec<usize> = (0..=m).collect();
        let d = reduced_trace_distance(&out, &keep, &clean, &keep);
        ensure!(d < 1e-8, "seed {seed}: {d}");
        worst = worst.max(d);
    }
    Ok(format!("50 random single-qubit channels recovered, worst {worst:.1e}"))
}

fn verified(args: &[&str]) -> Result<usize> {
    let r = cli(args)?;
    ensure!(r["pass"] == true && num(&r["result"]["min_fidelity"])? > 1.0 - 1e-9, "{}: {}", args.join(" "), r["result"]);
    Ok(r["result"]["inputs_checked"].as_u64().unwrap_or(0) as usize)
}

fn run_clean(g: &Gadget, input: &SparseState) -> Result<SparseState> {
    let st = g.run(input)?;
    ensure!(st.env_len() == 0, "ancillas stayed correlated");
    Ok(st.pure_state(&g.output_wires())?)
}

fn c4() -> Result<String> {
    let mut n = 0;
    for g in ["cnot", "h", "not", "phase", "cphase"] {
        n += verified(&["gadget", "verify", "--code", "steane", "--gadget", g])?;
    }
    for g in ["gcnot", "gnot:2", "mul:3", "prot:1", "fourier"] {
        n += verified(&["gadget", "verify", "--code", "poly", "--p", "5", "--d", "1", "--gadget", g])?;
    }
    let tof = verified(&["gadget", "verify", "--code", "poly", "--p", "5", "--d", "1", "--gadget", "toffoli"])?;
    ensure!(tof == 126, "toffoli checked {tof} inputs");
    let code = make_poly_code(5, 1)?;
    let wide = make_poly_code_degree(5, 4, 2)?;
    let g = degree_reduction_gadget(&code)?;
    g.check_gate_set()?;
    for a in 0..5 {
        let out = run_clean(&g, &codeword(&wide, a)?)?;
        let want = codeword(&wide, a)?.tensor(&codeword(&code, a)?);
        let f = out.fidelity(&want);
        ensure!(f > 1.0 - 1e-9, "degree reduction a={a}: fidelity {f}");
    }
    Ok(format!("{n} transversal/Fourier inputs, 125 Toffoli triples plus a superposition, degree reduction on 5 values"))
}

fn spread_l(r: &Value, key: &str) -> Result<u64> {
    r["result"][key]["l"].as_u64().with_context(|| format!("no {key}.l"))
}

fn c5() -> Result<String> {
    for (code, g) in [("steane", "cnot"), ("steane", "h"), ("steane", "phase"), ("poly", "gcnot"), ("poly", "mul:3")] {
        let r = cli(&["gadget", "spread", "--code", code, "--gadget", g])?;
        ensure!(spread_l(&r, "spread")? == 1, "{code} {g} spread {}", r["result"]["spread"]["l"]);
    }
    let t = Instant::now();
    let ec = cli(&["gadget", "spread", "--code", "steane", "--gadget", "ec", "--max-l", "4"])?;
    let l = spread_l(&ec, "spread")?;
    ensure!((1..=4).contains(&l) && ec["result"]["spread"]["conservative"] == 0, "steane EC l = {l}");
    let routed = cli(&["gadget", "spread", "--gadget", "cnot", "--routed"])?;
    let (u, rl) = (spread_l(&routed, "spread")?, spread_l(&routed, "routed")?);
    ensure!(rl <= 2 * u.max(1), "routed {rl} vs unrouted {u}");
    Ok(format!("transversal l = 1, steane EC l = {l} ({:.0} s), routed CNOT l = {rl}", t.elapsed().as_secs_f64()))
}

fn c6() -> Result<String> {
    let e = effective_rate(1e-4, 100, 1, 3);
    for (got, want) in e.iter().zip([4.950e-5, 1.2129e-5, 7.28e-7]) {
        ensure!(((got - want) / want).abs() < 1e-3, "{e:?}");
    }
    let c = eta_c(100, 1)?;
    ensure!(effective_rate(c, 100, 1, 5).iter().all(|v| (v - c).abs() < 1e-12));
    ensure!((threshold_fixed_point(100, 1)? - c).abs() < 1e-15);
    let up = effective_rate(1.1 * c, 100, 1, 4);
    ensure!(up.windows(2).all(|w| w[1] > w[0]), "above threshold must grow: {up:?}");
    Ok(format!("eps_1..3 = {:.4e}, {:.4e}, {:.3e}; eta_c is a fixed point", e[0], e[1], e[2]))
}

fn c7() -> Result<String> {
    let tree = RectangleTree::uniform(20, 1, 1);
    let mc = monte_carlo_sparseness(&tree, 0.01, 1, 100_000, 7, NoiseKind::Iid)?;
    let exact = 1.0 - 0.99f64.powi(20) - 20.0 * 0.01 * 0.99f64.powi(19);
    ensure!((exact - 0.01686).abs() < 1e-5);
    ensure!(((1.0 - mc.estimate) - exact).abs() < 3.0 * mc.stderr, "{mc:?}");
    let zero = monte_carlo_sparseness(&tree, 0.0, 1, 1000, 1, NoiseKind::Iid)?;
    ensure!(zero.estimate == 1.0);
    let r = cli(&["threshold", "mc", "--A", "20", "--eta", "0.01", "--trials", "100000", "--seed", "7"])?;
    ensure!(num(&r["result"]["mc"]["estimate"])? == mc.estimate, "CLI and library disagree");
    Ok(format!("non-sparse fraction {:.5} +- {:.5} vs exact {exact:.5}; eta = 0 gives 1", 1.0 - mc.estimate, mc.stderr))
}

fn c8() -> Result<String> {
    ensure!(minimal_bad_count(4, 1, 1)? == (6.0, Some(6)));
    let (b, exact) = minimal_bad_count(4, 1, 2)?;
    ensure!(exact == Some(216) && (b - 216.0).abs() < 1e-9, "({b}, {exact:?})");
    let mut prev = f64::INFINITY;
    for r in 0..6 {
        let v = correlated_bad_bound(2.0, 1e3, 100, 1, 1e-4, r)?;
        ensure!(v < prev, "bound not decreasing at r={r}");
        prev = v;
    }
    let b4 = correlated_bad_bound(2.0, 1e3, 100, 1, 1e-4, 4)?;
    ensure!((b4 - 2000.0 * 0.495f64.powi(16)).abs() < 1e-12);
    Ok(format!("brute force 6 and 216 match the bound; correlated bound decreasing, {b4:.5} at r = 4"))
}

fn c9() -> Result<String> {
    let mut c = Circuit::new(2, 3);
    c.h(0);
    c.cnot(0, 1);
    c.not(2);
    c.push(GateKind::CPhase, &[1, 2]);
    c.push(GateKind::Phase, &[0]);
    let opts = CompileOptions { ec: EcMode::Ideal, boundary: false, ..CompileOptions::default() };
    let sim = simulate_level(&c, &steane(), &opts)?;
    let rep = verify_sparse_propagation(&sim)?;
    ensure!(rep.violations == 0 && rep.single_faults > 0, "{rep:?}");
    Ok(format!("{} single faults propagated, 0 violations, max block weight {}", rep.single_faults, rep.max_block_weight))
}

/// Counts sparse flip sets checked; fails on the first that changes the decoded bit.
fn majority_holds(m: usize, r: usize, d: usize, sets: impl Iterator<Item = Vec<usize>>) -> Result<usize> {
    let n = m.pow(r as u32);
    let tree = RectangleTree::uniform(m, r, 1);
    let mut checked = 0;
    for flips in sets {
        let path = FaultPath::new(flips);
        if !is_sparse(&path, &tree, d).sparse {
            continue;
        }
        for a in 0..2u8 {
            let mut digits = vec![a; n];
            for &i in &path.indices {
                digits[i] ^= 1;
            }
            if recursive_majority(&digits, m, r)? != a {
                bail!("m={m} r={r}: flips {:?} change the decoded bit", path.indices);
            }
        }
        checked += 1;
    }
    Ok(checked)
}

fn c10() -> Result<String> {
    let mut exhaustive = 0;
    for r in 1..=2 {
        let n = 3usize.pow(r as u32);
        exhaustive += majority_holds(3, r, 1, (0..1u32 << n).map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect()))?;
    }
    let mut rng = trial_rng(0xC10, 0);
    let sets: Vec<Vec<usize>> = (0..10_000)
        .map(|_| {
            let mut flips = Vec::new();
            for blk in 0..7 {
                let k = if rng.gen_bool(0.3) { rng.gen_range(0..=7) } else { rng.gen_range(0..=3) };
                let mut pos: Vec<usize> = (0..7).collect();
                for i in 0..k {
                    let j = rng.gen_range(i..7);
                    pos.swap(i, j);
                    flips.push(blk * 7 + pos[i]);
                }
            }
            flips
        })
        .collect();
    let random = majority_holds(7, 2, 3, sets.into_iter())?;
    ensure!(random > 5000, "only {random} random sets were sparse");
    Ok(format!("{exhaustive} sparse flip sets at m = 3 (exhaustive), {random} of 10000 random sets at m = 7"))
}

fn c11() -> Result<String> {
    let mut n = 0;
    for p in [5u32, 7, 11] {
        for i in 0..p {
            let r = univ_commutator_check(p, i, 1000)?;
            ensure!(r.all_pass(), "{r:?}");
            n += 1;
        }
    }
    let r = cli(&["univcheck", "--p", "11", "--i", "4"])?;
    ensure!(r["pass"] == true);
    Ok(format!("{n} (p, i) pairs: det 1, trace formula, not a root of unity"))
}

type Criterion = (&'static str, fn() -> Result<String>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("threshold closed forms", c1),
        ("single-error correction", c2),
        ("random single-qupit channels", c3),
        ("gadget correctness", c4),
        ("gadget spread", c5),
        ("effective-rate recursion", c6),
        ("Monte Carlo sparseness", c7),
        ("bad-path counting", c8),
        ("sparse fault propagation", c9),
        ("recursive majority decoding", c10),
        ("universality eigenvalue check", c11),
    ];
    let mut passed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            bail!("panicked: {}", msg.unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => {
                println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1);
                passed.push(i + 1);
            }
            Err(e) => println!("FAIL {:>2} {name}: {e:#} [{secs:.1} s]", i + 1),
        }
    }
    // The asymptotic threshold theorem is not checkable at desk scale; it reduces to 1, 6, 7, 8 and 9.
    let chain = [1, 6, 7, 8, 9];
    let missing: Vec<_> = chain.iter().filter(|c| !passed.contains(c)).collect();
    if missing.is_empty() {
        passed.push(12);
        println!("PASS 12 threshold theorem: not desk-reproducible; its analytic chain (1, 6, 7, 8) and propagation check (9) passed");
    } else {
        println!("FAIL 12 threshold theorem: not desk-reproducible; supporting criteria {missing:?} failed");
    }
    println!("{} of 12 criteria passed", passed.len());
    if passed.len() == 12 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
