//! Threshold formulas, effective-rate recursion, bad-path combinatorics and Monte Carlo checks.
//!
//! Products of many small rates are evaluated in the log domain.

use crate::error::{Error, Result};
use crate::fault::{is_sparse, trial_rng, BurstChain, FaultPath, NoiseKind, RectangleTree};
use crate::par;
use rand::Rng;
use serde::Serialize;

/// ln C(n, k).
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// C(n, k) exactly, when it fits.
pub fn binom_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(r)
}

fn check(a: u64, k: u64) -> Result<()> {
    if a < k + 1 {
        return Err(Error::BadParams(format!("need A >= k+1, got A={a} k={k}")));
    }
    Ok(())
}

/// eta_c = C(A,k+1)^-k.
pub fn eta_c(a: u64, k: u64) -> Result<f64> {
    check(a, k)?;
    Ok((-(k as f64) * ln_binom(a, k + 1)).exp())
}

/// eta_c as the exact fraction 1 / C(A,k+1)^k, when the denominator fits.
pub fn eta_c_rational(a: u64, k: u64) -> Result<(u128, u128)> {
    check(a, k)?;
    let c = binom_exact(a, k + 1).ok_or_else(|| Error::TooLarge("binomial overflows".into()))?;
    let den = c.checked_pow(k as u32).ok_or_else(|| Error::TooLarge("denominator overflows".into()))?;
    Ok((1, den))
}

/// Threshold for general (norm-bounded) noise: 1/2 e^-k C(A,k+1)^-k.
pub fn eta_c_general(a: u64, k: u64) -> Result<f64> {
    check(a, k)?;
    if k == 0 {
        return Err(Error::BadParams("k >= 1 required".into()));
    }
    Ok((-(2f64.ln()) - k as f64 - k as f64 * ln_binom(a, k + 1)).exp())
}

/// Fixed point C(A,k+1)^(-1/k) of the effective-rate map (equal to eta_c only for k = 1).
pub fn threshold_fixed_point(a: u64, k: u64) -> Result<f64> {
    check(a, k)?;
    if k == 0 {
        return Err(Error::BadParams("k >= 1 required".into()));
    }
    Ok((-ln_binom(a, k + 1) / k as f64).exp())
}

/// max over the table of (eta' - delta) / S(delta); returns (value, argmax delta).
pub fn eta_c_universal(eta_prime: f64, table: &[(f64, f64)]) -> Result<(f64, f64)> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut best: Option<(f64, f64)> = None;
    for &(delta, s) in table {
        if delta >= eta_prime || s <= 0.0 {
            return Err(Error::BadParams(format!("table entry ({delta}, {s}) needs delta < eta' and S > 0")));
        }
        let v = (eta_prime - delta) / s;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, delta));
        }
    }
    Ok(best.expect("nonempty"))
}

/// Largest delta (to 1e-9) with base * C^factor * x^(k+1) < x^(1+delta), by bisection.
fn delta_bisect(ln_lhs: f64, ln_x: f64, hi: f64) -> f64 {
    let holds = |d: f64| ln_lhs < (1.0 + d) * ln_x;
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The delta of the sparse-probability lemma: C(A,k+1) eta^(k+1) < eta^(1+delta).
pub fn delta_for(eta: f64, a: u64, k: u64) -> Result<f64> {
    if !(eta > 0.0 && eta < eta_c(a, k)?) {
        return Err(Error::AboveThreshold);
    }
    let ln_lhs = ln_binom(a, k + 1) + (k + 1) as f64 * eta.ln();
    Ok(delta_bisect(ln_lhs, eta.ln(), (k + 1) as f64))
}

/// Closed form of `delta_for`: log(C eta^(k+1)) / log(eta) - 1.
pub fn delta_closed_form(eta: f64, a: u64, k: u64) -> f64 {
    (ln_binom(a, k + 1) + (k + 1) as f64 * eta.ln()) / eta.ln() - 1.0
}

/// The delta of the norm-bound lemma, on the base 2 eta: e C(A,k+1) (2eta)^(k+1) < (2eta)^(1+delta).
/// Kept separate from `delta_for`; the two are never interchangeable.
pub fn delta_small_for(eta: f64, a: u64, k: u64) -> Result<f64> {
    check(a, k)?;
    let x = 2.0 * eta;
    let ln_lhs = 1.0 + ln_binom(a, k + 1) + (k + 1) as f64 * x.ln();
    if !(x > 0.0 && x < 1.0 && ln_lhs < x.ln()) {
        return Err(Error::AboveThreshold);
    }
    Ok(delta_bisect(ln_lhs, x.ln(), (k + 2) as f64))
}

/// Lower bound 1 - eta^((1+delta)^r) on the probability that an r-rectangle is (r,k)-sparse.
pub fn sparse_prob_bound(eta: f64, delta: f64, r: u32) -> f64 {
    if eta <= 0.0 {
        return 1.0;
    }
    -((1.0 + delta).powi(r as i32) * eta.ln()).exp_m1()
}

/// eps_{s+1} = C(A,k+1) eps_s^(k+1), s = 0..r-1.
pub fn effective_rate(eps0: f64, a: u64, k: u64, r: usize) -> Vec<f64> {
    let lc = ln_binom(a, k + 1);
    let mut out = Vec::with_capacity(r);
    let mut e = eps0;
    for _ in 0..r {
        e = if e > 0.0 { (lc + (k + 1) as f64 * e.ln()).exp() } else { 0.0 };
        out.push(e);
    }
    out
}

/// Whether the uniform tree with leaf set `mask` is not (r,k)-sparse.
fn bad_mask(mask: u64, a: usize, r: usize, k: usize) -> bool {
    let mut flags = mask;
    let mut n = a.pow(r as u32);
    for _ in 0..r {
        let mut next = 0u64;
        let group = (1u64 << a) - 1;
        for g in 0..n / a {
            if ((flags >> (g * a)) & group).count_ones() as usize > k {
                next |= 1 << g;
            }
        }
        flags = next;
        n /= a;
    }
    flags & 1 == 1
}

/// Closed-form bound C(A,k+1)^(((k+1)^r - 1)/k) on the number of minimal bad fault paths in one
/// r-rectangle, with the exact count by enumeration over every leaf subset when A <= 5, k = 1
/// and r <= 2. At r = 0 the bound is 1.
pub fn minimal_bad_count(a: u64, k: u64, r: u32) -> Result<(f64, Option<u64>)> {
    check(a, k)?;
    if k == 0 {
        return Err(Error::BadParams("k >= 1 required".into()));
    }
    let exp = (((k + 1).pow(r) - 1) / k) as f64;
    let bound = (exp * ln_binom(a, k + 1)).exp();
    if !(a <= 5 && k == 1 && r <= 2) {
        return Ok((bound, None));
    }
    let (a, k, r) = (a as usize, k as usize, r as usize);
    let n = a.pow(r as u32);
    let size = 1usize << n;
    let mut bad = vec![0u64; size.div_ceil(64)];
    for s in 0..size {
        if bad_mask(s as u64, a, r, k) {
            bad[s / 64] |= 1 << (s % 64);
        }
    }
    let is_bad = |s: usize| bad[s / 64] >> (s % 64) & 1 == 1;
    let count = (1..size)
        .filter(|&s| is_bad(s) && (0..n).filter(|i| s >> i & 1 == 1).all(|i| !is_bad(s ^ (1 << i))))
        .count() as u64;
    Ok((bound, Some(count)))
}

/// c v (C(A,k+1)^(1/k) eta)^((k+1)^r): bound on the weight of bad paths under correlated noise.
pub fn correlated_bad_bound(c: f64, v: f64, a: u64, k: u64, eta: f64, r: u32) -> Result<f64> {
    check(a, k)?;
    if k == 0 {
        return Err(Error::BadParams("k >= 1 required".into()));
    }
    let ln_base = ln_binom(a, k + 1) / k as f64 + eta.ln();
    if !(eta > 0.0 && ln_base < 0.0) {
        return Err(Error::AboveThreshold);
    }
    Ok(((c * v).ln() + ((k + 1) as f64).powi(r as i32) * ln_base).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    /// Fraction of sampled fault paths that are (r,k)-sparse.
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    /// Sparse fraction of each of ten consecutive trial blocks.
    pub blocks: Vec<f64>,
}

/// Samples fault paths over the tree's leaves (leaf order taken as time order) and reports the
/// sparse fraction with its binomial standard error. Trial t uses RNG stream t of `seed`.
pub fn monte_carlo_sparseness(tree: &RectangleTree, eta: f64, k: usize, trials: u64, seed: u64, sampler: NoiseKind) -> Result<McEstimate> {
    if trials < 1000 {
        return Err(Error::BadParams("at least 1000 trials".into()));
    }
    let leaves = tree.leaves();
    let n = leaves.iter().max().map_or(0, |&m| m + 1);
    let chain = match sampler {
        NoiseKind::Iid => None,
        NoiseKind::Burst { mean_burst } => Some(BurstChain::new(eta, mean_burst)?),
    };
    let n_blocks = 10u64;
    let per = trials.div_ceil(n_blocks);
    let counts: Vec<(u64, u64)> = par::map_range(n_blocks as usize, |b| {
        let from = b as u64 * per;
        let to = (from + per).min(trials);
        let mut sparse = 0;
        for t in from..to {
            let mut rng = trial_rng(seed, t);
            let path = match &chain {
                None => FaultPath { indices: (0..n).filter(|_| rng.gen::<f64>() < eta).collect() },
                Some(ch) => ch.sample(n, &mut rng),
            };
            if is_sparse(&path, tree, k).sparse {
                sparse += 1;
            }
        }
        (sparse, to.saturating_sub(from))
    });
    let total: u64 = counts.iter().map(|c| c.0).sum();
    let est = total as f64 / trials as f64;
    Ok(McEstimate {
        estimate: est,
        stderr: (est * (1.0 - est) / trials as f64).sqrt(),
        trials,
        seed,
        blocks: counts.iter().filter(|c| c.1 > 0).map(|&(s, n)| s as f64 / n as f64).collect(),
    })
}
