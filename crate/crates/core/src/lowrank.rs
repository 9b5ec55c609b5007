//! Rank-2 and rank-3 graph generation from trigonometric circle and sphere
//! embeddings, swept over a parameter interval, plus the period arithmetic
//! behind the incommensurability and near-match demonstrations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SignPattern;
use crate::rank::sign_of;

/// Rule assigning the frequency vector k (and k' for the sphere embedding).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KRule {
    /// k_i = i / n for i = 1..=n, with k'_i = k_i / 2.
    IndexOverN,
    /// k_i = sqrt(p_i) over the first n primes; pairwise incommensurable
    /// entry periods.
    SqrtPrime,
}

impl KRule {
    pub fn frequencies(&self, n: usize) -> Vec<f64> {
        match self {
            KRule::IndexOverN => (1..=n).map(|i| i as f64 / n as f64).collect(),
            KRule::SqrtPrime => first_primes(n).iter().map(|&p| (p as f64).sqrt()).collect(),
        }
    }

    pub fn secondary_frequencies(&self, n: usize) -> Vec<f64> {
        self.frequencies(n).iter().map(|k| k / 2.0).collect()
    }
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if is_prime(candidate) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Rows (cos(k_i x), sin(k_i x)) on the unit circle; the Gram entries are
/// cos((k_i - k_j) x).
pub fn circle_embedding(k: &[f64], x: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k.len(), 2, |i, c| {
        let a = k[i] * x;
        if c == 0 {
            a.cos()
        } else {
            a.sin()
        }
    })
}

/// Rows (cos(k_i x) sin(k'_i x), cos(k_i x) cos(k'_i x), sin(k_i x)) on the
/// unit sphere.
pub fn sphere_embedding(k: &[f64], k_prime: &[f64], x: f64) -> Result<DMatrix<f64>> {
    if k.len() != k_prime.len() {
        return Err(Error::shape(format!(
            "frequency vectors differ in length: {} vs {}",
            k.len(),
            k_prime.len()
        )));
    }
    Ok(DMatrix::from_fn(k.len(), 3, |i, c| {
        let (a, b) = (k[i] * x, k_prime[i] * x);
        match c {
            0 => a.cos() * b.sin(),
            1 => a.cos() * b.cos(),
            _ => a.sin(),
        }
    }))
}

/// Sweep configuration: evaluate the rank-`rank` embedding at the m
/// equispaced endpoints of [a, b].
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub rank: u8,
    pub k_rule: KRule,
}

impl SweepConfig {
    pub fn new(n: usize, a: f64, b: f64, m: usize, rank: u8) -> Self {
        SweepConfig { n, a, b, m, rank, k_rule: KRule::IndexOverN }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("sweep needs at least 2 nodes"));
        }
        if self.m < 2 {
            return Err(Error::invalid("sweep needs at least 2 points"));
        }
        if !self.a.is_finite() || !self.b.is_finite() || self.a >= self.b {
            return Err(Error::invalid("sweep interval must satisfy a < b"));
        }
        if self.rank != 2 && self.rank != 3 {
            return Err(Error::invalid("sweep rank must be 2 or 3"));
        }
        Ok(())
    }
}

/// One distinct connected pattern discovered by a sweep, with the embedding
/// that witnessed it and the sweep point it first appeared at.
#[derive(Debug, Clone)]
pub struct SweepHit {
    pub pattern: SignPattern,
    pub witness: DMatrix<f64>,
    pub x: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub hits: Vec<SweepHit>,
    /// Distinct patterns discarded because their graphs were disconnected.
    pub dropped_disconnected: usize,
}

/// Evaluates the embedding at every sweep point in ascending x, takes the
/// sign of Z Zᵀ, keeps the first witness of each distinct connected pattern
/// (labeled equality on the off-diagonal key), and counts distinct
/// disconnected patterns dropped.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let k = cfg.k_rule.frequencies(cfg.n);
    let k_prime = cfg.k_rule.secondary_frequencies(cfg.n);
    let step = (cfg.b - cfg.a) / (cfg.m - 1) as f64;

    let mut seen = std::collections::HashSet::new();
    let mut dropped = std::collections::HashSet::new();
    let mut hits = Vec::new();
    for i in 0..cfg.m {
        let x = cfg.a + i as f64 * step;
        let z = match cfg.rank {
            2 => circle_embedding(&k, x),
            _ => sphere_embedding(&k, &k_prime, x)?,
        };
        let pattern = sign_of(&(&z * z.transpose()))?;
        let key = pattern.key();
        if seen.contains(&key) || dropped.contains(&key) {
            continue;
        }
        if pattern.to_graph().is_connected() {
            seen.insert(key);
            hits.push(SweepHit { pattern, witness: z, x });
        } else {
            dropped.insert(key);
        }
    }
    Ok(SweepOutput { hits, dropped_disconnected: dropped.len() })
}

/// Period of the Gram entry cos((sqrt(p) - sqrt(q)) x): 2 pi / |sqrt(p) - sqrt(q)|.
pub fn sqrt_prime_period(p: u64, q: u64) -> Result<f64> {
    if p == q {
        return Err(Error::invalid("primes must be distinct"));
    }
    if !is_prime(p) || !is_prime(q) {
        return Err(Error::invalid(format!("{p} and {q} must both be prime")));
    }
    Ok(std::f64::consts::TAU / ((p as f64).sqrt() - (q as f64).sqrt()).abs())
}

/// Positive integers (n1, n2) with |n1 t1 - n2 t2| < eps, found by the
/// pigeonhole scan over multiples of the larger period: remainders of
/// i * t_max modulo t_min are binned into ceil(t_min / eps) + 1 subintervals,
/// and a repeat bin yields the pair. Each remainder is also checked directly
/// so commensurable inputs return immediately.
pub fn near_period_match(t1: f64, t2: f64, eps: f64) -> Result<(u64, u64)> {
    if !(t1 > 0.0 && t2 > 0.0 && eps > 0.0) {
        return Err(Error::invalid("periods and eps must be positive"));
    }
    let (t_min, t_max, min_is_t1) = if t1 <= t2 { (t1, t2, true) } else { (t2, t1, false) };
    let pack = |n_min: u64, n_max: u64| {
        if min_is_t1 {
            (n_min, n_max)
        } else {
            (n_max, n_min)
        }
    };

    let bins = (t_min / eps).ceil() as usize + 1;
    let bin_width = t_min / bins as f64;
    let mut seen: Vec<Option<(u64, u64)>> = vec![None; bins + 1];
    for i in 1..=(bins as u64 + 1) {
        let multiple = i as f64 * t_max;
        let quotient = (multiple / t_min).round().max(1.0) as u64;
        let signed_rem = multiple - quotient as f64 * t_min;
        if signed_rem.abs() < eps {
            return Ok(pack(quotient, i));
        }
        let rem = multiple - (multiple / t_min).floor() * t_min;
        let bin = ((rem / bin_width) as usize).min(bins);
        if let Some((prev_i, prev_q)) = seen[bin] {
            let n_max = i - prev_i;
            let n_min = (multiple / t_min).floor() as u64 - prev_q;
            debug_assert!((n_max as f64 * t_max - n_min as f64 * t_min).abs() < eps);
            return Ok(pack(n_min, n_max));
        }
        seen[bin] = Some((i, (multiple / t_min).floor() as u64));
    }
    Err(Error::invalid(
        "pigeonhole scan exhausted, which contradicts termination; inputs may be degenerate",
    ))
}
