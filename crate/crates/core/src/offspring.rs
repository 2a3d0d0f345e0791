//! Weight sequences, the criticality solver and the offspring pair `(mu, mu_root)`
//! of a simply generated noncrossing tree, plus a pure power-law stable family.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Relative precision targeted by every truncated series in this module.
const SERIES_EPS: f64 = 1e-16;
/// Hard cap on the number of series terms.
const MAX_TERMS: usize = 200_000_000;

/// Closed-form rule behind a weight sequence `w(k), k >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightRule {
    /// `w(k) = 1` for all `k`.
    Uniform,
    /// Indicator of a finite degree set.
    Set(Vec<usize>),
    /// `w(k) = q^k`.
    Geometric(f64),
    /// `w(k) = k^{-s}`.
    Zipf(f64),
    /// Finitely supported explicit weights.
    Explicit(BTreeMap<usize, f64>),
}

/// Weight sequence of a simply generated model.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSeq {
    rule: WeightRule,
}

impl WeightSeq {
    pub fn new(rule: WeightRule) -> Result<Self> {
        match &rule {
            WeightRule::Uniform => {}
            WeightRule::Set(s) => {
                if s.is_empty() || s.contains(&0) {
                    return Err(Error::Domain(
                        "degree set must be nonempty and contain only positive degrees".into(),
                    ));
                }
            }
            WeightRule::Geometric(q) => {
                if !(q.is_finite() && *q > 0.0) {
                    return Err(Error::Domain(format!("geometric ratio {q} must be > 0")));
                }
            }
            WeightRule::Zipf(s) => {
                if !s.is_finite() {
                    return Err(Error::Domain(format!("zipf exponent {s} must be finite")));
                }
            }
            WeightRule::Explicit(map) => {
                if map.contains_key(&0) {
                    return Err(Error::Domain("weights are indexed by degree k >= 1".into()));
                }
                if map.values().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Domain("weights must be finite and nonnegative".into()));
                }
                if !map.values().any(|v| *v > 0.0) {
                    return Err(Error::Domain("at least one weight must be positive".into()));
                }
            }
        }
        let mut rule = rule;
        if let WeightRule::Set(s) = &mut rule {
            s.sort_unstable();
            s.dedup();
        }
        Ok(WeightSeq { rule })
    }

    pub fn uniform() -> Self {
        WeightSeq {
            rule: WeightRule::Uniform,
        }
    }

    pub fn indicator(set: &[usize]) -> Result<Self> {
        WeightSeq::new(WeightRule::Set(set.to_vec()))
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    /// `w(k)`; zero for `k = 0`.
    pub fn w(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match &self.rule {
            WeightRule::Uniform => 1.0,
            WeightRule::Set(s) => {
                if s.binary_search(&k).is_ok() {
                    1.0
                } else {
                    0.0
                }
            }
            WeightRule::Geometric(q) => q.powi(k as i32),
            WeightRule::Zipf(s) => (k as f64).powf(-s),
            WeightRule::Explicit(map) => map.get(&k).copied().unwrap_or(0.0),
        }
    }

    /// `ln w(k)`, or `None` when `w(k) = 0`. Avoids overflow for large `k`.
    pub fn ln_w(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        match &self.rule {
            WeightRule::Geometric(q) => Some(k as f64 * q.ln()),
            WeightRule::Zipf(s) => Some(-s * (k as f64).ln()),
            _ => {
                let v = self.w(k);
                if v > 0.0 {
                    Some(v.ln())
                } else {
                    None
                }
            }
        }
    }

    /// Largest degree with positive weight, when finite.
    pub fn max_degree(&self) -> Option<usize> {
        match &self.rule {
            WeightRule::Set(s) => s.last().copied(),
            WeightRule::Explicit(m) => m
                .iter()
                .filter(|(_, v)| **v > 0.0)
                .map(|(k, _)| *k)
                .max(),
            _ => None,
        }
    }

    /// Radius of convergence `rho = (limsup w(k)^{1/k})^{-1}`.
    pub fn radius(&self) -> f64 {
        match &self.rule {
            WeightRule::Uniform | WeightRule::Zipf(_) => 1.0,
            WeightRule::Geometric(q) => 1.0 / q,
            WeightRule::Set(_) | WeightRule::Explicit(_) => f64::INFINITY,
        }
    }

    /// Upper bound on `w(k) rho^k` over all `k` (used by the tail bounds).
    fn envelope(&self) -> f64 {
        match &self.rule {
            WeightRule::Uniform | WeightRule::Geometric(_) => 1.0,
            WeightRule::Zipf(s) => {
                if *s >= 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        }
    }

    /// `sum_{j >= 0} f(j) w(j+1) x^j` for a cubic `f` given by its coefficients.
    fn series(&self, x: f64, f: [f64; 4]) -> Result<f64> {
        let poly = |j: f64| f[0] + j * (f[1] + j * (f[2] + j * f[3]));
        if let Some(kmax) = self.max_degree() {
            let mut s = 0.0;
            for j in 0..kmax {
                if let Some(lw) = self.ln_w(j + 1) {
                    let xj = if j == 0 { 1.0 } else { (j as f64 * x.ln()).exp() };
                    s += poly(j as f64) * lw.exp() * xj;
                }
            }
            return Ok(s);
        }
        let rho = self.radius();
        if x >= rho {
            return Err(Error::Domain(format!("x = {x} >= radius {rho}")));
        }
        if x == 0.0 {
            return Ok(poly(0.0) * self.w(1));
        }
        let ratio = x / rho;
        let env = self.envelope() / rho;
        if !env.is_finite() {
            return Err(Error::Domain("no tail envelope for this weight rule".into()));
        }
        let fabs = |j: f64| f[0].abs() + j * (f[1].abs() + j * (f[2].abs() + j * f[3].abs()));
        let lnx = x.ln();
        let mut s = 0.0;
        let mut j = 0usize;
        loop {
            if let Some(lw) = self.ln_w(j + 1) {
                s += poly(j as f64) * (lw + j as f64 * lnx).exp();
            }
            j += 1;
            if j % 64 == 0 {
                // tail_{>= j} <= env * sum_{i >= j} fabs(i) ratio^i, and fabs(i) <= fabs(j) ((i+1)/(j+1))^3
                let growth = ratio * ((j as f64 + 2.0) / (j as f64 + 1.0)).powi(3);
                if growth < 1.0 {
                    let head = env * fabs(j as f64) * (j as f64 * ratio.ln()).exp();
                    let tail = head / (1.0 - growth);
                    if tail <= SERIES_EPS * s.abs() || tail < 1e-300 {
                        return Ok(s);
                    }
                }
            }
            if j >= MAX_TERMS {
                return Err(Error::DivergentNormalizer(x));
            }
        }
    }
}

impl fmt::Display for WeightSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            WeightRule::Uniform => write!(f, "uniform"),
            WeightRule::Set(s) => {
                let items: Vec<String> = s.iter().map(|k| k.to_string()).collect();
                write!(f, "set:{}", items.join(","))
            }
            WeightRule::Geometric(q) => write!(f, "geometric:{q}"),
            WeightRule::Zipf(s) => write!(f, "zipf:{s}"),
            WeightRule::Explicit(m) => {
                let obj: BTreeMap<String, f64> =
                    m.iter().map(|(k, v)| (k.to_string(), *v)).collect();
                write!(
                    f,
                    "{}",
                    serde_json::json!({ "w": obj })
                )
            }
        }
    }
}

#[derive(Deserialize)]
struct ExplicitWeights {
    w: BTreeMap<String, f64>,
}

impl FromStr for WeightSeq {
    type Err = Error;

    /// Parses `uniform`, `set:1,3`, `geometric:q`, `zipf:s` or `{"w":{"1":1.0,...}}`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let raw: ExplicitWeights =
                serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
            let mut map = BTreeMap::new();
            for (k, v) in raw.w {
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad degree key {k:?}")))?;
                map.insert(k, v);
            }
            return WeightSeq::new(WeightRule::Explicit(map));
        }
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Parse(format!("{head} needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        };
        match head {
            "uniform" => Ok(WeightSeq::uniform()),
            "set" => {
                let a = arg.ok_or_else(|| Error::Parse("set needs a degree list".into()))?;
                let degrees = a
                    .split(',')
                    .map(|d| d.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                WeightSeq::new(WeightRule::Set(degrees))
            }
            "geometric" => WeightSeq::new(WeightRule::Geometric(num(arg)?)),
            "zipf" => WeightSeq::new(WeightRule::Zipf(num(arg)?)),
            other => Err(Error::Parse(format!("unknown weight rule {other:?}"))),
        }
    }
}

/// `Psi(x) = sum k(k+1)w(k+1)x^k / sum (k+1)w(k+1)x^k` on `[0, rho)`.
pub fn psi(w: &WeightSeq, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x = {x} must be >= 0")));
    }
    if x >= w.radius() {
        return Err(Error::Domain(format!("x = {x} >= radius {}", w.radius())));
    }
    let den = w.series(x, [1.0, 1.0, 0.0, 0.0])?;
    if den == 0.0 {
        // w(k+1) = 0 for every k that contributes; only happens at x = 0 with w(1) = 0
        return Ok(if x == 0.0 { 0.0 } else { f64::NAN });
    }
    let num = w.series(x, [0.0, 1.0, 1.0, 0.0])?;
    Ok(num / den)
}

/// Options for the bisection solver.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// For infinite radius, the search doubles `x` at most this many times.
    pub max_doublings: u32,
    /// For finite radius, `Psi` is inspected up to `rho * (1 - cap_gap)`.
    pub cap_gap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_doublings: 200,
            cap_gap: 1e-6,
        }
    }
}

/// Unique `b` with `Psi(b) = 1`.
pub fn solve_critical_b(w: &WeightSeq) -> Result<f64> {
    solve_critical_b_with(w, SolverOptions::default())
}

pub fn solve_critical_b_with(w: &WeightSeq, opts: SolverOptions) -> Result<f64> {
    let rho = w.radius();
    if rho == 0.0 {
        return Err(Error::DivergentWeights);
    }
    let hi = if rho.is_infinite() {
        // Psi increases to (largest degree) - 1; it must exceed 1 strictly.
        let kmax = w.max_degree().expect("infinite radius means finite support");
        if kmax < 3 {
            return Err(Error::NoCriticalPoint(format!(
                "largest degree {kmax} < 3, so Psi stays below 1"
            )));
        }
        let mut x = 1.0;
        let mut found = None;
        for _ in 0..opts.max_doublings {
            if psi(w, x)? > 1.0 {
                found = Some(x);
                break;
            }
            x *= 2.0;
        }
        found.ok_or_else(|| Error::NoCriticalPoint("Psi did not reach 1".into()))?
    } else {
        // Series near the radius are slow, so halve the gap to it until Psi crosses 1.
        let mut gap = 0.5f64;
        loop {
            let gap_now = gap.max(opts.cap_gap);
            let x = rho * (1.0 - gap_now);
            let v = psi(w, x)?;
            if v >= 1.0 {
                break x;
            }
            if gap_now <= opts.cap_gap {
                return Err(Error::NoCriticalPoint(format!(
                    "Psi({x}) = {v} < 1 near the radius {rho}"
                )));
            }
            gap *= 0.5;
        }
    };
    let mut lo = 0.0f64;
    let mut hi = hi;
    let mut best = hi;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = psi(w, mid)?;
        best = mid;
        if v < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Discrete law on `{0, 1, 2, ...}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Pmf {
    /// Finite table indexed by `k`.
    Table(Vec<f64>),
    /// `mu(k) = a (k+1) w(k+1) b^k`.
    Offspring { w: WeightSeq, a: f64, b: f64 },
    /// `mu_root(k) = c w(k) b^k`, `k >= 1`.
    Root { w: WeightSeq, c: f64, b: f64 },
    /// `mu(k) = k^{-1-alpha} / zeta(alpha)` for `k >= 1`.
    Stable(StableOffspring),
}

impl Pmf {
    pub fn table(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("probabilities must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Pmf::Table(probs))
    }

    pub fn prob(&self, k: usize) -> f64 {
        match self {
            Pmf::Table(t) => t.get(k).copied().unwrap_or(0.0),
            Pmf::Offspring { w, a, b } => match w.ln_w(k + 1) {
                Some(lw) => a * (k as f64 + 1.0) * (lw + k as f64 * b.ln()).exp(),
                None => 0.0,
            },
            Pmf::Root { w, c, b } => {
                if k == 0 {
                    return 0.0;
                }
                match w.ln_w(k) {
                    Some(lw) => c * (lw + k as f64 * b.ln()).exp(),
                    None => 0.0,
                }
            }
            Pmf::Stable(s) => s.prob(k),
        }
    }

    /// Largest `k` with positive mass, if the support is finite.
    pub fn support_max(&self) -> Option<usize> {
        match self {
            Pmf::Table(t) => t.iter().rposition(|p| *p > 0.0),
            Pmf::Offspring { w, .. } => w.max_degree().map(|d| d - 1),
            Pmf::Root { w, .. } => w.max_degree(),
            Pmf::Stable(_) => None,
        }
    }

    /// Probabilities of `0..len`.
    pub fn tabulate(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.prob(k)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Variance; `+inf` for the heavy-tailed family.
    pub fn variance(&self) -> f64 {
        if let Pmf::Stable(_) = self {
            return f64::INFINITY;
        }
        let m = self.mean();
        self.moment(2) - m * m
    }

    fn moment(&self, p: i32) -> f64 {
        match self {
            Pmf::Table(t) => t
                .iter()
                .enumerate()
                .map(|(k, q)| q * (k as f64).powi(p))
                .sum(),
            Pmf::Offspring { w, a, b } => {
                // sum_k k^p a (k+1) w(k+1) b^k
                let f = if p == 1 {
                    [0.0, 1.0, 1.0, 0.0]
                } else {
                    [0.0, 0.0, 1.0, 1.0]
                };
                a * w.series(*b, f).unwrap_or(f64::INFINITY)
            }
            Pmf::Root { w, c, b } => {
                // sum_{k>=1} k^p c w(k) b^k = c b sum_j (j+1)^p w(j+1) b^j
                let f = if p == 1 {
                    [1.0, 1.0, 0.0, 0.0]
                } else {
                    [1.0, 2.0, 1.0, 0.0]
                };
                c * b * w.series(*b, f).unwrap_or(f64::INFINITY)
            }
            Pmf::Stable(s) => {
                if p == 1 {
                    1.0
                } else {
                    s.moment(p)
                }
            }
        }
    }

    /// Index of the stable domain: `alpha` for the power-law family, 2 otherwise.
    pub fn stable_index(&self) -> f64 {
        match self {
            Pmf::Stable(s) => s.alpha,
            _ => 2.0,
        }
    }

    /// Scaling sequence `B_n`: `sigma sqrt(n/2)` for finite variance, `n^{1/alpha}` for the
    /// power-law family.
    pub fn scaling_constant(&self, n: usize) -> f64 {
        match self {
            Pmf::Stable(s) => (n as f64).powf(1.0 / s.alpha),
            _ => self.variance().sqrt() * (n as f64 / 2.0).sqrt(),
        }
    }
}

/// Offspring pair `(mu, mu_root)` attached to a weight sequence at parameter `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringPair {
    pub b: f64,
    pub a: f64,
    pub c: f64,
    pub mu: Pmf,
    pub mu_root: Pmf,
    pub mean_mu: f64,
    pub var_mu: f64,
}

impl OffspringPair {
    /// `sum_j j mu_root(j) = bc/a`.
    pub fn root_mean(&self) -> f64 {
        self.b * self.c / self.a
    }

    /// Limit law of the root degree, `k mu_root(k) / sum_j j mu_root(j)`.
    pub fn size_biased_root(&self, k: usize) -> f64 {
        k as f64 * self.mu_root.prob(k) / self.root_mean()
    }
}

/// Builds `mu(k) = a(k+1)w(k+1)b^k` and `mu_root(k) = c w(k) b^k`.
pub fn build_pair(w: &WeightSeq, b: f64) -> Result<OffspringPair> {
    if !(b > 0.0) || b >= w.radius() {
        return Err(Error::DivergentNormalizer(b));
    }
    let za = w.series(b, [1.0, 1.0, 0.0, 0.0])?;
    let zc = b * w.series(b, [1.0, 0.0, 0.0, 0.0])?;
    if !(za.is_finite() && za > 0.0 && zc.is_finite() && zc > 0.0) {
        return Err(Error::DivergentNormalizer(b));
    }
    let a = 1.0 / za;
    let c = 1.0 / zc;
    let mu = Pmf::Offspring {
        w: w.clone(),
        a,
        b,
    };
    let mu_root = Pmf::Root {
        w: w.clone(),
        c,
        b,
    };
    let mean_mu = mu.mean();
    let var_mu = mu.variance();
    Ok(OffspringPair {
        b,
        a,
        c,
        mu,
        mu_root,
        mean_mu,
        var_mu,
    })
}

/// Critical pair of a weight sequence.
pub fn critical_pair(w: &WeightSeq) -> Result<OffspringPair> {
    let b = solve_critical_b(w)?;
    build_pair(w, b)
}

/// `mu(k) = k^{-(1+alpha)}/zeta(alpha)` for `k >= 1`, with the atom at 0 fixing mean 1.
#[derive(Clone, Debug, PartialEq)]
pub struct StableOffspring {
    pub alpha: f64,
    /// `zeta(alpha)`.
    pub normalization: f64,
    p0: f64,
}

impl StableOffspring {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Domain(format!("alpha = {alpha} not in (1, 2)")));
        }
        let z_alpha = zeta(alpha);
        let z_next = zeta(alpha + 1.0);
        Ok(StableOffspring {
            alpha,
            normalization: z_alpha,
            p0: 1.0 - z_next / z_alpha,
        })
    }

    pub fn prob(&self, k: usize) -> f64 {
        if k == 0 {
            self.p0
        } else {
            (k as f64).powf(-1.0 - self.alpha) / self.normalization
        }
    }

    /// `mu([n, inf))`.
    pub fn tail(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        zeta_tail(1.0 + self.alpha, n) / self.normalization
    }

    fn moment(&self, p: i32) -> f64 {
        // sum k^{p-1-alpha}: finite only when p < alpha
        if (p as f64) < self.alpha {
            zeta(1.0 + self.alpha - p as f64) / self.normalization
        } else {
            f64::INFINITY
        }
    }

    pub fn pmf(&self) -> Pmf {
        Pmf::Stable(self.clone())
    }
}

/// Riemann zeta for real `s > 1`, by direct summation plus an Euler-Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    zeta_tail(s, 1)
}

/// `sum_{k >= n} k^{-s}` for `s > 1`, `n >= 1`, to about 1e-13 absolute.
pub fn zeta_tail(s: f64, n: usize) -> f64 {
    assert!(s > 1.0 && n >= 1);
    const DIRECT: usize = 64;
    let mut sum = 0.0;
    for k in n..n + DIRECT {
        sum += (k as f64).powf(-s);
    }
    let big_n = (n + DIRECT) as f64;
    // sum_{k >= N} k^{-s} = N^{1-s}/(s-1) + N^{-s}/2 + sum_j B_{2j}/(2j)! (s)_{2j-1} N^{-s-2j+1}
    let mut tail = big_n.powf(1.0 - s) / (s - 1.0) + 0.5 * big_n.powf(-s);
    let bernoulli = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
    let mut fact = 1.0; // (2j)!
    let mut rising = s; // s (s+1) ... (s+2j-2)
    for (j, b2j) in bernoulli.iter().enumerate() {
        let two_j = 2 * (j + 1);
        fact *= (two_j - 1) as f64 * two_j as f64;
        tail += b2j / fact * rising * big_n.powf(-s - two_j as f64 + 1.0);
        rising *= (s + two_j as f64 - 1.0) * (s + two_j as f64);
    }
    sum + tail
}
