//! Longest-chord statistics, exact enumeration of noncrossing trees with degree
//! constraints, goodness-of-fit helpers and box-counting estimates.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::lamination::{circle_point, Lamination};
use crate::noncrossing::{extract, NoncrossingTree};
use crate::offspring::{solve_critical_b, WeightSeq};
use crate::tree::PlaneTree;

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Largest angular length `min(t - s, 1 - t + s)` among the chords.
pub fn longest_chord(chords: &[(usize, usize)], m: usize) -> Result<f64> {
    chords
        .iter()
        .map(|&(p, q)| {
            let d = p.abs_diff(q) % m;
            d.min(m - d) as f64 / m as f64
        })
        .reduce(f64::max)
        .ok_or(Error::EmptySet)
}

/// Density of the longest chord of the Brownian triangulation, supported on `[1/3, 1/2]`.
pub fn brownian_longest_chord_density(x: f64) -> f64 {
    if !(1.0 / 3.0..0.5).contains(&x) {
        return 0.0;
    }
    (3.0 * x - 1.0) / (PI * x * x * (1.0 - x).powi(2) * (1.0 - 2.0 * x).sqrt())
}

/// The density with `x = (1 - u^2)/2`, `dx = -u du`, which cancels the `(1 - 2x)^{-1/2}` pole.
fn density_in_u(u: f64) -> f64 {
    let x = 0.5 * (1.0 - u * u);
    (3.0 * x - 1.0) / (PI * x * x * (1.0 - x).powi(2))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * eps {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, eps, 50)
}

/// `P(longest chord <= x)` for the Brownian triangulation.
pub fn brownian_longest_chord_cdf(x: f64) -> f64 {
    let x = x.clamp(1.0 / 3.0, 0.5);
    let u_lo = (1.0 - 2.0 * x).sqrt();
    let u_hi = (1.0f64 / 3.0).sqrt();
    if u_lo >= u_hi {
        return 0.0;
    }
    adaptive_simpson(&density_in_u, u_lo, u_hi, 1e-13).clamp(0.0, 1.0)
}

/// Tabulated longest-chord law.
#[derive(Clone, Debug)]
pub struct ChordLengthLaw {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl ChordLengthLaw {
    pub fn tabulate(points: usize) -> Self {
        let points = points.max(2);
        let grid: Vec<f64> = (0..points)
            .map(|i| 1.0 / 3.0 + (1.0 / 6.0) * i as f64 / (points - 1) as f64)
            .collect();
        let cdf = grid.iter().map(|&x| brownian_longest_chord_cdf(x)).collect();
        ChordLengthLaw { grid, cdf }
    }

    pub fn density(&self, x: f64) -> f64 {
        brownian_longest_chord_density(x)
    }
}

/// Kolmogorov-Smirnov distance between sorted samples and a continuous cdf.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    Ok(d)
}

/// Upper-tail p-value of Pearson's statistic for counts against cell probabilities.
pub fn chi_square_pvalue(observed: &[u64], probs: &[f64]) -> (f64, f64) {
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = probs.iter().filter(|&&p| p > 0.0).count() as f64 - 1.0;
    let dist = ChiSquared::new(df.max(1.0)).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}

/// Degree constraint `A` on noncrossing trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegreeSet {
    All,
    Finite(Vec<usize>),
}

impl DegreeSet {
    pub fn finite(degrees: &[usize]) -> Result<Self> {
        let mut d = degrees.to_vec();
        d.sort_unstable();
        d.dedup();
        if d.is_empty() || d[0] == 0 {
            return Err(Error::Domain("degrees must be positive".into()));
        }
        Ok(DegreeSet::Finite(d))
    }

    pub fn contains(&self, k: usize) -> bool {
        match self {
            DegreeSet::All => k >= 1,
            DegreeSet::Finite(d) => d.binary_search(&k).is_ok(),
        }
    }

    pub fn as_slice(&self) -> Option<&[usize]> {
        match self {
            DegreeSet::All => None,
            DegreeSet::Finite(d) => Some(d),
        }
    }

    pub fn weights(&self) -> WeightSeq {
        match self {
            DegreeSet::All => WeightSeq::uniform(),
            DegreeSet::Finite(d) => WeightSeq::indicator(d).expect("validated degrees"),
        }
    }

    /// `gcd(A - 1)`.
    pub fn period(&self) -> usize {
        match self {
            DegreeSet::All => 1,
            DegreeSet::Finite(d) => d.iter().fold(0, |g, &k| gcd(g, k - 1)),
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for DegreeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeSet::All => write!(f, "all"),
            DegreeSet::Finite(d) => {
                let s: Vec<String> = d.iter().map(|k| k.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
        }
    }
}

impl FromStr for DegreeSet {
    type Err = Error;

    /// `all` (or `N`) or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") || s == "N" {
            return Ok(DegreeSet::All);
        }
        let d = s
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        DegreeSet::finite(&d)
    }
}

/// `C(3n - 3, n - 1) / (2n - 1)`.
pub fn nc_count_formula(n: usize) -> BigUint {
    assert!(n >= 1);
    let (top, k) = (3 * n - 3, n - 1);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(top - i) / BigUint::from(i + 1);
    }
    c / BigUint::from(2 * n - 1)
}

/// Exact counts `#NC_n^A` for `n = 1..=nmax` (index 0 unused and zero).
#[derive(Clone, Debug, PartialEq)]
pub struct CountTable {
    pub degrees: DegreeSet,
    pub counts: Vec<BigUint>,
}

impl CountTable {
    pub fn get(&self, n: usize) -> &BigUint {
        &self.counts[n]
    }

    /// Sizes with at least one tree.
    pub fn feasible(&self) -> Vec<usize> {
        (1..self.counts.len())
            .filter(|&n| !self.counts[n].is_zero())
            .collect()
    }
}

/// Counts by the subtree-weight recursion: a non-root vertex of degree `d` contributes the
/// factor `d` (its decorations) and the root contributes 1. With `S(x)` the weighted
/// generating function of planted subtrees, `S = x F(S)` where `F(y) = sum_{d in A} d y^{d-1}`
/// and `#NC_n = [x^{n-1}] sum_{k in A} S^k`.
pub fn count_table(nmax: usize, degrees: &DegreeSet) -> CountTable {
    let mut counts = vec![BigUint::zero(); nmax + 1];
    if nmax >= 1 {
        counts[1] = BigUint::one();
    }
    if nmax < 2 {
        return CountTable {
            degrees: degrees.clone(),
            counts,
        };
    }
    let len = nmax; // coefficients x^0 .. x^{nmax-1}
    match degrees {
        DegreeSet::All => {
            // F(y) = (1 - y)^{-2}; with P = 1/(1 - S): s_{q} = [x^{q-1}] P^2, count_n = p_{n-1}
            let mut s = vec![BigUint::zero(); len];
            let mut p = vec![BigUint::zero(); len];
            let mut g = vec![BigUint::zero(); len];
            p[0] = BigUint::one();
            g[0] = BigUint::one();
            for j in 1..len {
                s[j] = g[j - 1].clone();
                let mut pj = BigUint::zero();
                for i in 1..=j {
                    pj += &s[i] * &p[j - i];
                }
                p[j] = pj;
                let mut gj = BigUint::zero();
                for i in 0..=j / 2 {
                    let term = &p[i] * &p[j - i];
                    if 2 * i == j {
                        gj += term;
                    } else {
                        gj += term * 2u32;
                    }
                }
                g[j] = gj;
            }
            for n in 2..=nmax {
                counts[n] = p[n - 1].clone();
            }
        }
        DegreeSet::Finite(d) => {
            let top = *d.last().expect("nonempty");
            // pow[e][j] = [x^j] S^e
            let mut pow = vec![vec![BigUint::zero(); len]; top + 1];
            pow[0][0] = BigUint::one();
            let mut s = vec![BigUint::zero(); len];
            for j in 0..len {
                if j >= 1 {
                    // s_j = [x^{j-1}] F(S)
                    let mut sj = BigUint::zero();
                    for &deg in d {
                        let c = &pow[deg - 1][j - 1];
                        if !c.is_zero() {
                            sj += c * BigUint::from(deg);
                        }
                    }
                    s[j] = sj;
                    for e in 1..=top {
                        let mut acc = BigUint::zero();
                        for i in 1..=j {
                            if !s[i].is_zero() && !pow[e - 1][j - i].is_zero() {
                                acc += &s[i] * &pow[e - 1][j - i];
                            }
                        }
                        pow[e][j] = acc;
                    }
                }
            }
            for n in 2..=nmax {
                let mut c = BigUint::zero();
                for &k in d {
                    c += &pow[k][n - 1];
                }
                counts[n] = c;
            }
        }
    }
    CountTable {
        degrees: degrees.clone(),
        counts,
    }
}

/// `#NC_n^A`.
pub fn count_nc(n: usize, degrees: &DegreeSet) -> BigUint {
    if n == 0 {
        return BigUint::zero();
    }
    count_table(n, degrees).counts.swap_remove(n)
}

/// `log(x)` of a big integer without overflow.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 900;
    (x >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Asymptotic constants of `#NC_n^A ~ K rho^{n-1} n^{-3/2}` along feasible `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem5Constants {
    pub b: f64,
    pub k: f64,
    pub rho: f64,
    pub period: usize,
}

pub fn theorem5_constants(degrees: &DegreeSet) -> Result<Theorem5Constants> {
    if !degrees.contains(1) {
        return Err(Error::Domain("the degree set must contain 1".into()));
    }
    let b = solve_critical_b(&degrees.weights())?;
    // sums over k with k + 1 in A (non-root) and k in A (root)
    let kmax = match degrees {
        DegreeSet::Finite(d) => *d.last().expect("nonempty"),
        DegreeSet::All => {
            // b^k (k+1)^3 below 1e-30 relative
            let mut k = 1;
            while (k as f64 + 1.0).powi(3) * b.powi(k as i32) > 1e-30 {
                k += 1;
            }
            k
        }
    };
    let (mut s1, mut s2, mut s3, mut rho) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..=kmax {
        let kf = k as f64;
        if degrees.contains(k + 1) {
            s1 += (kf + 1.0) * b.powi(k as i32);
            s2 += (kf + 1.0) * (kf * kf - 1.0) * b.powi(k as i32);
            rho += (kf + 1.0) * b.powf(kf - 1.0);
        }
        if degrees.contains(k) {
            s3 += kf * b.powi(k as i32);
        }
    }
    let period = degrees.period();
    let k = period as f64 * (s1 / (2.0 * PI * s2)).sqrt() * s3;
    Ok(Theorem5Constants { b, k, rho, period })
}

/// Cells of a `g x g` grid over `[-1, 1]^2` crossed by the segment `a b`, as `x * g + y`.
pub(crate) fn grid_cells(a: (f64, f64), b: (f64, f64), g: usize) -> Vec<usize> {
    let cell = 2.0 / g as f64;
    let to_grid = |v: f64| ((v + 1.0) / cell).clamp(0.0, g as f64 * (1.0 - 1e-12));
    let (fx, fy) = (to_grid(a.0), to_grid(a.1));
    let (tx, ty) = (to_grid(b.0), to_grid(b.1));
    let (mut ix, mut iy) = (fx as i64, fy as i64);
    let (jx, jy) = (tx as i64, ty as i64);
    let (dx, dy) = (tx - fx, ty - fy);
    let step_x = if dx > 0.0 { 1 } else { -1 };
    let step_y = if dy > 0.0 { 1 } else { -1 };
    let boundary = |i: i64, step: i64| if step > 0 { (i + 1) as f64 } else { i as f64 };
    let mut t_max_x = if dx == 0.0 {
        f64::INFINITY
    } else {
        (boundary(ix, step_x) - fx) / dx
    };
    let mut t_max_y = if dy == 0.0 {
        f64::INFINITY
    } else {
        (boundary(iy, step_y) - fy) / dy
    };
    let t_dx = if dx == 0.0 { f64::INFINITY } else { 1.0 / dx.abs() };
    let t_dy = if dy == 0.0 { f64::INFINITY } else { 1.0 / dy.abs() };
    let g = g as i64;
    let mut out = Vec::with_capacity(((jx - ix).abs() + (jy - iy).abs() + 1) as usize);
    let limit = (jx - ix).abs() + (jy - iy).abs();
    for _ in 0..=limit {
        if (0..g).contains(&ix) && (0..g).contains(&iy) {
            out.push((ix * g + iy) as usize);
        }
        if ix == jx && iy == jy {
            break;
        }
        if t_max_x < t_max_y {
            ix += step_x;
            t_max_x += t_dx;
        } else {
            iy += step_y;
            t_max_y += t_dy;
        }
    }
    out
}

/// Number of dyadic squares of side `2^{-j}` (a `2^{j+1}` grid over `[-1, 1]^2`) met by the
/// chords, for each level, and the least-squares slope of `log2 N_j` against `j`.
pub fn box_dimension(lam: &Lamination, levels: std::ops::RangeInclusive<u32>) -> Result<(f64, Vec<u64>)> {
    let (lo, hi) = (*levels.start(), *levels.end());
    if hi < lo {
        return Err(Error::Domain("empty level range".into()));
    }
    if (1u64 << hi) > 4 * lam.resolution() as u64 || hi > 26 {
        return Err(Error::ResolutionTooFine {
            level: hi,
            m: lam.resolution(),
        });
    }
    let segs: Vec<((f64, f64), (f64, f64))> = lam
        .chords()
        .iter()
        .map(|&(p, q)| (lam.point(p), lam.point(q)))
        .collect();
    let mut counts = Vec::new();
    for j in lo..=hi {
        let g = 1usize << (j + 1);
        let cells = g * g;
        let count = if cells <= 1 << 30 {
            let mut bits = vec![0u64; cells.div_ceil(64)];
            let mut c = 0u64;
            for s in &segs {
                for id in grid_cells(s.0, s.1, g) {
                    let (w, b) = (id / 64, id % 64);
                    if bits[w] >> b & 1 == 0 {
                        bits[w] |= 1 << b;
                        c += 1;
                    }
                }
            }
            c
        } else {
            let mut ids: Vec<usize> = segs.iter().flat_map(|s| grid_cells(s.0, s.1, g)).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.len() as u64
        };
        counts.push(count);
    }
    let xs: Vec<f64> = (lo..=hi).map(|j| j as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64).log2()).collect();
    let slope = if xs.len() >= 2 {
        least_squares_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok((slope, counts))
}

/// Empirical children-count law of the non-root vertices of a batch of trees.
pub fn degree_histogram<'a, I>(trees: I) -> Result<BTreeMap<usize, f64>>
where
    I: IntoIterator<Item = &'a PlaneTree>,
{
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut total = 0u64;
    for t in trees {
        for &k in &t.kids()[1..] {
            *counts.entry(k).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyBatch);
    }
    Ok(counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect())
}

/// Same as [`degree_histogram`] on the shapes of noncrossing trees.
pub fn degree_histogram_nc(trees: &[NoncrossingTree]) -> Result<BTreeMap<usize, f64>> {
    let shapes = trees
        .iter()
        .map(|t| extract(t).map(|(s, _)| s))
        .collect::<Result<Vec<_>>>()?;
    degree_histogram(&shapes)
}

/// `1/2 sum_{k in range} |hist(k) - law(k)|`.
pub fn total_variation<F: Fn(usize) -> f64>(
    hist: &BTreeMap<usize, f64>,
    law: F,
    range: std::ops::RangeInclusive<usize>,
) -> f64 {
    0.5 * range
        .map(|k| (hist.get(&k).copied().unwrap_or(0.0) - law(k)).abs())
        .sum::<f64>()
}

/// Chord endpoints as points of the plane, for reporting.
pub fn chord_points(lam: &Lamination) -> Vec<((f64, f64), (f64, f64))> {
    lam.chords()
        .iter()
        .map(|&(p, q)| (circle_point(p, lam.resolution()), circle_point(q, lam.resolution())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_chord_examples() {
        let m = 20;
        assert_eq!(longest_chord(&[(0, m / 2)], m).unwrap(), 0.5);
        assert_eq!(longest_chord(&[(0, m / 4)], m).unwrap(), 0.25);
        assert_eq!(
            longest_chord(&[(0, 2 * m / 5), (m / 10, 9 * m / 10)], m).unwrap(),
            0.4
        );
        assert_eq!(longest_chord(&[], m), Err(Error::EmptySet));
    }

    #[test]
    fn chord_law_cdf() {
        assert_eq!(brownian_longest_chord_cdf(1.0 / 3.0), 0.0);
        assert_eq!(brownian_longest_chord_cdf(0.2), 0.0);
        assert!((brownian_longest_chord_cdf(0.5) - 1.0).abs() < 1e-8);
        let v = brownian_longest_chord_cdf(0.4);
        assert!(v > 0.0 && v < 1.0);
        assert!((v - REGRESSION_CDF_AT_0_4).abs() < 1e-9, "{v}");
        let mut prev = 0.0;
        for i in 0..=10_000 {
            let x = 1.0 / 3.0 + i as f64 / 10_000.0 / 6.0;
            let c = brownian_longest_chord_cdf(x);
            assert!(c >= prev - 1e-15);
            prev = c;
        }
        // plain midpoint rule on the original density as an independent check at 0.4
        let n = 200_000;
        let h = (0.4 - 1.0 / 3.0) / n as f64;
        let mid: f64 = (0..n)
            .map(|i| brownian_longest_chord_density(1.0 / 3.0 + (i as f64 + 0.5) * h) * h)
            .sum();
        assert!((mid - v).abs() < 1e-8);
    }

    const REGRESSION_CDF_AT_0_4: f64 = 0.078_211_491_026_780_54;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[], |x| x), Err(Error::EmptySet));
        let d = ks_distance(&[0.7, 0.7, 0.7], |x| if x >= 0.7 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(d, 1.0);
        let pts: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        assert!(ks_distance(&pts, |x| x).unwrap() <= 0.5 / 10_000.0 + 1e-12);
    }

    #[test]
    fn counts_match_formula() {
        let table = count_table(14, &DegreeSet::All);
        for n in 1..=14 {
            assert_eq!(table.counts[n], nc_count_formula(n), "n={n}");
        }
        assert_eq!(count_nc(3, &DegreeSet::All), BigUint::from(3u32));
        assert_eq!(count_nc(5, &DegreeSet::All), BigUint::from(55u32));
        assert_eq!(count_nc(1, &DegreeSet::finite(&[1, 3]).unwrap()), BigUint::one());
    }

    #[test]
    fn restricted_counts_match_enumeration() {
        for set in [vec![1, 3], vec![1, 2, 4], vec![1, 2], vec![1, 4]] {
            let d = DegreeSet::finite(&set).unwrap();
            let table = count_table(9, &d);
            for n in 1..=9 {
                let brute = crate::noncrossing::enumerate_all(n, Some(&set)).unwrap().len();
                assert_eq!(table.counts[n], BigUint::from(brute), "{set:?} n={n}");
            }
        }
        let full = count_table(9, &DegreeSet::finite(&(1..=8).collect::<Vec<_>>()).unwrap());
        assert_eq!(full.counts, count_table(9, &DegreeSet::All).counts);
    }

    #[test]
    fn theorem5_examples() {
        let c = theorem5_constants(&DegreeSet::All).unwrap();
        assert!((c.rho - 27.0 / 4.0).abs() < 1e-10);
        // K rho^{n-1} = (9 sqrt(3 pi))^{-1} (27/4)^n
        let k_closed = 1.0 / (9.0 * (3.0 * PI).sqrt());
        assert!((c.k / c.rho - k_closed).abs() < 1e-10);
        let c13 = theorem5_constants(&DegreeSet::finite(&[1, 3]).unwrap()).unwrap();
        assert!((c13.b - 3f64.powf(-0.5)).abs() < 1e-12);
        assert_eq!(c13.period, 2);
        assert!((c13.k - 4.0 / (6.0 * PI).sqrt()).abs() < 1e-10);
        assert!((c13.rho - 2.0 * 3f64.sqrt()).abs() < 1e-10);
        assert!(matches!(
            theorem5_constants(&DegreeSet::finite(&[1, 2]).unwrap()),
            Err(Error::NoCriticalPoint(_))
        ));
    }

    #[test]
    fn box_counting() {
        let diam = Lamination::new(1 << 12, vec![(0, 1 << 11)]).unwrap();
        let (slope, _) = box_dimension(&diam, 4..=10).unwrap();
        assert!((slope - 1.0).abs() < 0.05, "{slope}");
        // parallel chords {p, m - p} sweep the disk at coarse scales
        let m = 4096;
        let dense = Lamination::new(m, (1..m / 2).map(|p| (p, m - p)).collect()).unwrap();
        let (slope, _) = box_dimension(&dense, 2..=6).unwrap();
        assert!(slope > 1.8, "{slope}");
        assert!(matches!(
            box_dimension(&diam, 4..=15),
            Err(Error::ResolutionTooFine { .. })
        ));
    }

    #[test]
    fn grid_cells_cover_segment() {
        let g = 37;
        let cell = 2.0 / g as f64;
        for (a, b) in [
            ((-0.9, -0.8), (0.7, 0.95)),
            ((1.0, 0.0), (-1.0, 0.0)),
            ((0.3, -1.0), (0.3, 1.0)),
            ((0.5, 0.5), (0.5, 0.5)),
        ] {
            let cells = grid_cells(a, b, g);
            for i in 0..=1000 {
                let t = i as f64 / 1000.0;
                let (x, y) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                let on_line = |v: f64| {
                    let r = (v + 1.0) / cell;
                    (r - r.round()).abs() < 1e-9
                };
                if on_line(x) || on_line(y) {
                    continue;
                }
                let cx = (((x + 1.0) / cell) as usize).min(g - 1);
                let cy = (((y + 1.0) / cell) as usize).min(g - 1);
                assert!(cells.contains(&(cx * g + cy)), "{a:?} {b:?} t={t}");
            }
        }
    }

    #[test]
    fn histogram_examples() {
        let star = PlaneTree::new(vec![2, 0, 0]).unwrap();
        let h = degree_histogram([&star, &star]).unwrap();
        assert_eq!(h.get(&0), Some(&1.0));
        let chain = PlaneTree::chain(3);
        let h = degree_histogram([&chain]).unwrap();
        assert_eq!((h[&0], h[&1]), (0.5, 0.5));
        assert_eq!(
            degree_histogram(std::iter::empty::<&PlaneTree>()),
            Err(Error::EmptyBatch)
        );
    }

    #[test]
    fn chi_square_sanity() {
        let (_, p) = chi_square_pvalue(&[100, 100, 100], &[1.0 / 3.0; 3]);
        assert!(p > 0.99);
        let (_, p) = chi_square_pvalue(&[200, 50, 50], &[1.0 / 3.0; 3]);
        assert!(p < 1e-6);
    }
}
