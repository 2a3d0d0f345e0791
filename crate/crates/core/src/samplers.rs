//! Exact samplers for size-conditioned BGW forests and modified BGW trees, and the
//! random-walk oracles (walk pmf, Kemperman hitting times, total-size law).
//!
//! A forest of `k` trees with `T` vertices is sampled through the cycle lemma:
//! draw `T` i.i.d. offspring counts conditioned to sum to `T - k` (a bridge of the
//! Lukasiewicz walk), then rotate the bridge at one of its `k` admissible starting
//! points chosen uniformly. The bridge itself is drawn either by plain rejection or
//! by exact dyadic splitting against precomputed laws of partial sums.

use std::collections::HashMap;

use rand::Rng;

use crate::conv;
use crate::error::{Error, Result};
use crate::offspring::{OffspringPair, Pmf};
use crate::tree::PlaneTree;

/// Default cap on offspring draws spent by the rejection bridge.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Step law of the walk `S`: increments `X - 1` with `X ~ mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkLaw {
    /// `mu(0), mu(1), ...` truncated at the support cap.
    offspring: Vec<f64>,
    /// Probability mass beyond the cap.
    truncated_mass: f64,
}

impl WalkLaw {
    pub fn new(mu: &Pmf, cap: usize) -> Self {
        let offspring = mu.tabulate(cap + 1);
        let truncated_mass = (1.0 - offspring.iter().sum::<f64>()).max(0.0);
        WalkLaw {
            offspring,
            truncated_mass,
        }
    }

    pub fn from_table(probs: &[f64]) -> Result<Self> {
        let pmf = Pmf::table(probs.to_vec())?;
        Ok(WalkLaw::new(&pmf, probs.len().saturating_sub(1)))
    }

    /// `P(X = k)`, zero beyond the cap.
    pub fn offspring(&self, k: usize) -> f64 {
        self.offspring.get(k).copied().unwrap_or(0.0)
    }

    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub fn mean_increment(&self) -> f64 {
        self.offspring
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - 1.0) * p)
            .sum()
    }

    /// Law of `X_1 + ... + X_m` on `0..=cap`. Exact whenever `cap` is within the table,
    /// because offspring counts are nonnegative.
    fn sum_law(&self, m: usize, cap: usize) -> Vec<f64> {
        conv::power(&self.offspring, m, cap)
    }
}

/// `P(S_n = k)` for the walk started at 0.
pub fn walk_pmf(law: &WalkLaw, n: usize, k: i64) -> f64 {
    // S_n = k  <=>  X_1 + ... + X_n = n + k
    let target = n as i64 + k;
    if target < 0 {
        return 0.0;
    }
    let target = target as usize;
    law.sum_law(n, target)[target]
}

/// Kemperman: `P(T_{-k} = n) = (k/n) P(S_n = -k)`.
pub fn hitting_time_pmf(law: &WalkLaw, k: usize, n: usize) -> f64 {
    if k == 0 || n == 0 {
        return if k == 0 && n == 0 { 1.0 } else { 0.0 };
    }
    k as f64 / n as f64 * walk_pmf(law, n, -(k as i64))
}

/// `P(|T| = n)` under the modified BGW law with root law `mu_root`.
pub fn tree_size_pmf(pair: &OffspringPair, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let steps = n - 1;
    let law = WalkLaw::new(&pair.mu, steps);
    // P(S_{n-1} = -k) = P(X_1 + ... + X_{n-1} = n - 1 - k)
    let sums = law.sum_law(steps, steps - 1);
    (1..=steps)
        .map(|k| pair.mu_root.prob(k) * k as f64 / steps as f64 * sums[steps - k])
        .sum()
}

/// `P(Y_1 + ... + Y_m = k)` where the `Y_i` are i.i.d. total progenies of `mu`-trees.
pub fn progeny_sum_pmf(law: &WalkLaw, m: usize, k: usize) -> f64 {
    if m == 0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    // a forest of m trees with k vertices: Kemperman again
    hitting_time_pmf(law, m, k)
}

/// Largest root subtree and root degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootStats {
    /// Size of the largest subtree hanging from the root.
    pub largest: usize,
    /// Number of children of the root.
    pub root_degree: usize,
    pub n: usize,
}

pub fn root_stats(tree: &PlaneTree) -> Result<RootStats> {
    let n = tree.len();
    if n < 2 {
        return Err(Error::DegenerateTree);
    }
    let sizes = tree.subtree_sizes();
    let largest = tree
        .children_of(0, &sizes)
        .into_iter()
        .map(|c| sizes[c] + 1)
        .max()
        .expect("root has a child when n >= 2");
    Ok(RootStats {
        largest,
        root_degree: tree.root_degree(),
        n,
    })
}

/// How the conditioned offspring sequence (the bridge) is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BridgeMethod {
    /// Resample whole sequences until the sum matches.
    Rejection,
    /// Split the target recursively between dyadic halves using exact partial-sum laws.
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerOptions {
    pub method: BridgeMethod,
    /// Maximal number of offspring draws for [`BridgeMethod::Rejection`].
    pub budget: u64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            method: BridgeMethod::Dyadic,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Reusable sampler for forests of `mu`-trees with a fixed total size.
pub struct ForestSampler {
    total: usize,
    mu: Vec<f64>,
    cdf: Vec<f64>,
    /// Minimal number of positive parts summing to each value, `usize::MAX` if none.
    min_parts: Vec<usize>,
    sums: HashMap<usize, Vec<f64>>,
    opts: SamplerOptions,
}

impl ForestSampler {
    /// Prepares forests of total size `total` (any number of trees `1..=total`).
    pub fn new(mu: &Pmf, total: usize, opts: SamplerOptions) -> Result<Self> {
        if total == 0 {
            return Err(Error::Infeasible("empty forest".into()));
        }
        // targets are at most total - 1, and values above the target never occur
        let cap = total - 1;
        let table = mu.tabulate(cap + 1);
        let mut cdf = Vec::with_capacity(table.len());
        let mut acc = 0.0;
        for p in &table {
            acc += p;
            cdf.push(acc);
        }
        let min_parts = min_parts(&table, cap);
        let mut sampler = ForestSampler {
            total,
            mu: table,
            cdf,
            min_parts,
            sums: HashMap::new(),
            opts,
        };
        if opts.method == BridgeMethod::Dyadic {
            sampler.fill_sums(total);
        }
        Ok(sampler)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Whether `k` trees with `total` vertices in all can occur.
    pub fn feasible(&self, k: usize) -> bool {
        if k == 0 || k > self.total {
            return false;
        }
        if k == self.total {
            return self.mu[0] > 0.0;
        }
        self.mu[0] > 0.0 && self.min_parts[self.total - k] <= self.total
    }

    /// Law of the sum of all `total` offspring counts on `0..total`.
    pub(crate) fn total_sum_law(&mut self) -> Vec<f64> {
        self.fill_sums(self.total);
        self.sums[&self.total].clone()
    }

    fn fill_sums(&mut self, m: usize) {
        if self.sums.contains_key(&m) {
            return;
        }
        let cap = self.total - 1;
        let law = if m == 1 {
            self.mu[..=cap].to_vec()
        } else {
            let a = m / 2;
            let b = m - a;
            self.fill_sums(a);
            self.fill_sums(b);
            conv::convolve(&self.sums[&a], &self.sums[&b], cap)
        };
        self.sums.insert(m, law);
    }

    /// A forest of `k` trees.
    pub fn forest<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<Vec<PlaneTree>> {
        if !self.feasible(k) {
            return Err(Error::Infeasible(format!(
                "no forest of {k} trees with {} vertices",
                self.total
            )));
        }
        let values = self.bridge(self.total - k, rng)?;
        Ok(rotate_and_split(values, k, rng))
    }

    /// A single tree (`k = 1`).
    pub fn tree<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PlaneTree> {
        Ok(self.forest(1, rng)?.pop().expect("one tree"))
    }

    /// `total` i.i.d. offspring counts conditioned on summing to `target`.
    fn bridge<R: Rng + ?Sized>(&mut self, target: usize, rng: &mut R) -> Result<Vec<usize>> {
        match self.opts.method {
            BridgeMethod::Rejection => self.bridge_rejection(target, rng),
            BridgeMethod::Dyadic => loop {
                let mut out = Vec::with_capacity(self.total);
                self.split(self.total, target, rng, &mut out)?;
                // guards against picking a value whose probability is pure round-off
                if out.iter().all(|&v| self.mu[v] > 0.0) {
                    return Ok(out);
                }
            },
        }
    }

    fn bridge_rejection<R: Rng + ?Sized>(
        &self,
        target: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        let mut draws: u64 = 0;
        let mut attempts: u64 = 0;
        let mut out = Vec::with_capacity(self.total);
        loop {
            attempts += 1;
            out.clear();
            let mut sum = 0usize;
            let mut ok = true;
            for _ in 0..self.total {
                draws += 1;
                let u: f64 = rng.random();
                let v = self.cdf.partition_point(|&c| c <= u);
                sum += v;
                // values past the table exceed every target, so they reject too
                if v >= self.mu.len() || sum > target {
                    ok = false;
                    break;
                }
                out.push(v);
            }
            if ok && sum == target {
                return Ok(out);
            }
            if draws >= self.opts.budget {
                return Err(Error::Timeout {
                    budget: self.opts.budget,
                    attempts,
                });
            }
        }
    }

    fn split<R: Rng + ?Sized>(
        &self,
        m: usize,
        target: usize,
        rng: &mut R,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        if m == 1 {
            out.push(target);
            return Ok(());
        }
        let a = m / 2;
        let b = m - a;
        let pa = &self.sums[&a];
        let pb = &self.sums[&b];
        let weights: Vec<f64> = (0..=target).map(|r| pa[r] * pb[target - r]).collect();
        let r = pick(&weights, rng).ok_or_else(|| {
            Error::Infeasible(format!("sum of {m} offspring counts cannot equal {target}"))
        })?;
        self.split(a, r, rng, out)?;
        self.split(b, target - r, rng, out)
    }
}

/// `min_parts[s]`: fewest positive support values summing to `s`.
fn min_parts(mu: &[f64], cap: usize) -> Vec<usize> {
    let positive: Vec<usize> = (1..mu.len().min(cap + 1)).filter(|&d| mu[d] > 0.0).collect();
    if positive.first() == Some(&1) {
        return (0..=cap).collect();
    }
    let mut best = vec![usize::MAX; cap + 1];
    best[0] = 0;
    for s in 1..=cap {
        for &d in &positive {
            if d > s {
                break;
            }
            if best[s - d] != usize::MAX {
                best[s] = best[s].min(best[s - d] + 1);
            }
        }
    }
    best
}

/// Index drawn proportionally to nonnegative `weights`, `None` if they vanish.
pub(crate) fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if u < acc {
                return Some(i);
            }
        }
    }
    last
}

/// Cycle lemma: rotate a bridge summing to `T - k` so that it codes a forest of `k` trees,
/// choosing one of the `k` admissible rotations uniformly, then cut it into trees.
fn rotate_and_split<R: Rng + ?Sized>(values: Vec<usize>, k: usize, rng: &mut R) -> Vec<PlaneTree> {
    let t = values.len();
    let mut walk = Vec::with_capacity(t);
    let mut w: i64 = 0;
    for &v in &values {
        walk.push(w);
        w += v as i64 - 1;
    }
    debug_assert_eq!(w, -(k as i64));
    let low = *walk.iter().min().expect("nonempty bridge");
    let level = low + rng.random_range(0..k as i64);
    let start = walk
        .iter()
        .position(|&x| x == level)
        .expect("left-continuous walk hits every level down to its minimum");
    let mut forest = Vec::with_capacity(k);
    let mut kids = Vec::new();
    let mut height: i64 = 0;
    for i in 0..t {
        let v = values[(start + i) % t];
        kids.push(v);
        height += v as i64 - 1;
        if height < 0 {
            forest.push(PlaneTree::from_kids_unchecked(std::mem::take(&mut kids)));
            height = 0;
        }
    }
    debug_assert!(kids.is_empty());
    forest
}

/// One draw from BGW(mu) conditioned on `n` vertices.
pub fn sample_bgw_conditioned<R: Rng + ?Sized>(mu: &Pmf, n: usize, rng: &mut R) -> Result<PlaneTree> {
    ForestSampler::new(mu, n, SamplerOptions::default())?.tree(rng)
}

/// `k` independent BGW(mu) trees conditioned on `total` vertices altogether.
pub fn sample_forest<R: Rng + ?Sized>(
    mu: &Pmf,
    k: usize,
    total: usize,
    rng: &mut R,
) -> Result<Vec<PlaneTree>> {
    if k > total || k == 0 {
        return Err(Error::Infeasible(format!(
            "no forest of {k} trees with {total} vertices"
        )));
    }
    ForestSampler::new(mu, total, SamplerOptions::default())?.forest(k, rng)
}

/// Reusable sampler for BGW(mu_root, mu) conditioned on `n` vertices.
pub struct ModifiedBgwSampler {
    root_weights: Vec<f64>,
    forest: ForestSampler,
}

impl ModifiedBgwSampler {
    pub fn new(pair: &OffspringPair, n: usize, opts: SamplerOptions) -> Result<Self> {
        if n < 2 {
            return Err(Error::Infeasible(
                "the root has at least one child, so n >= 2".into(),
            ));
        }
        let steps = n - 1;
        let mut forest = ForestSampler::new(&pair.mu, steps, opts)?;
        let sums = forest.total_sum_law();
        // P(root degree = L) ~ mu_root(L) (L/(n-1)) P(S_{n-1} = -L)
        let mut root_weights = vec![0.0; steps + 1];
        for (l, w) in root_weights.iter_mut().enumerate().skip(1) {
            if forest.feasible(l) {
                *w = pair.mu_root.prob(l) * l as f64 * sums[steps - l];
            }
        }
        if !root_weights.iter().any(|w| *w > 0.0) {
            return Err(Error::Infeasible(format!(
                "no tree with {n} vertices under this offspring pair"
            )));
        }
        Ok(ModifiedBgwSampler {
            root_weights,
            forest,
        })
    }

    /// Exact root-degree law of the conditioned tree.
    pub fn root_law(&self) -> Vec<f64> {
        let total: f64 = self.root_weights.iter().sum();
        self.root_weights.iter().map(|w| w / total).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PlaneTree> {
        let l = pick(&self.root_weights, rng).expect("weights checked at construction");
        let forest = self.forest.forest(l, rng)?;
        let mut kids = Vec::with_capacity(self.forest.total() + 1);
        kids.push(l);
        for t in forest {
            kids.extend(t.into_kids());
        }
        Ok(PlaneTree::from_kids_unchecked(kids))
    }
}

/// One draw from BGW(mu_root, mu) conditioned on `n` vertices.
pub fn sample_modified_bgw<R: Rng + ?Sized>(
    pair: &OffspringPair,
    n: usize,
    rng: &mut R,
) -> Result<PlaneTree> {
    ModifiedBgwSampler::new(pair, n, SamplerOptions::default())?.sample(rng)
}

/// Exact law of BGW(mu) conditioned on `n` vertices, by enumeration (small `n` only).
pub fn exhaustive_bgw_law(mu: &Pmf, n: usize) -> Vec<(PlaneTree, f64)> {
    let trees = crate::tree::all_trees(n);
    let weights: Vec<f64> = trees
        .iter()
        .map(|t| t.kids().iter().map(|&k| mu.prob(k)).product())
        .collect();
    let total: f64 = weights.iter().sum();
    trees
        .into_iter()
        .zip(weights)
        .map(|(t, w)| (t, w / total))
        .filter(|(_, p)| *p > 0.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::{build_pair, WeightSeq};
    use crate::rng::StreamKey;

    fn eq24() -> OffspringPair {
        build_pair(&WeightSeq::uniform(), 1.0 / 3.0).unwrap()
    }

    fn coin() -> WalkLaw {
        WalkLaw::from_table(&[0.5, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn walk_examples() {
        let law = coin();
        assert!((walk_pmf(&law, 2, 0) - 0.5).abs() < 1e-15);
        assert_eq!(walk_pmf(&law, 0, 0), 1.0);
        assert_eq!(walk_pmf(&law, 3, 0), 0.0);
        assert!((hitting_time_pmf(&law, 1, 3) - 0.125).abs() < 1e-15);
        assert_eq!(hitting_time_pmf(&law, 1, 2), 0.0);
        assert!((hitting_time_pmf(&law, 1, 1) - 0.5).abs() < 1e-15);
        assert!(eq24().mu.mean() > 0.0);
        assert!(WalkLaw::new(&eq24().mu, 200).mean_increment().abs() < 1e-10);
    }

    #[test]
    fn tree_size_examples() {
        let pair = eq24();
        assert_eq!(tree_size_pmf(&pair, 1), 0.0);
        assert!((tree_size_pmf(&pair, 2) - 8.0 / 27.0).abs() < 1e-15);
        let mut prev = 0.0;
        for n in 2..40 {
            let acc: f64 = (2..=n).map(|m| tree_size_pmf(&pair, m)).sum();
            assert!(acc > prev && acc < 1.0);
            prev = acc;
        }
    }

    #[test]
    fn root_stats_examples() {
        let s = root_stats(&PlaneTree::chain(6)).unwrap();
        assert_eq!((s.largest, s.root_degree), (5, 1));
        let s = root_stats(&PlaneTree::new(vec![2, 0, 0]).unwrap()).unwrap();
        assert_eq!((s.largest, s.root_degree), (1, 2));
        let s = root_stats(&PlaneTree::new(vec![3, 1, 0, 0, 0]).unwrap()).unwrap();
        assert_eq!((s.largest, s.root_degree), (2, 3));
        assert_eq!(root_stats(&PlaneTree::singleton()), Err(Error::DegenerateTree));
    }

    #[test]
    fn sampler_edge_cases() {
        let mut rng = StreamKey::new(1).rng();
        let pair = eq24();
        assert_eq!(
            sample_bgw_conditioned(&pair.mu, 1, &mut rng).unwrap(),
            PlaneTree::singleton()
        );
        let binary = Pmf::table(vec![0.5, 0.0, 0.5]).unwrap();
        assert!(matches!(
            sample_bgw_conditioned(&binary, 2, &mut rng),
            Err(Error::Infeasible(_))
        ));
        let forest = sample_forest(&pair.mu, 4, 4, &mut rng).unwrap();
        assert_eq!(forest, vec![PlaneTree::singleton(); 4]);
        assert!(matches!(
            sample_forest(&pair.mu, 3, 2, &mut rng),
            Err(Error::Infeasible(_))
        ));
        assert_eq!(
            sample_modified_bgw(&pair, 2, &mut rng).unwrap().kids(),
            &[1, 0]
        );
    }

    #[test]
    fn forest_of_two_sizes_are_symmetric() {
        let pair = eq24();
        let mut sampler = ForestSampler::new(&pair.mu, 3, SamplerOptions::default()).unwrap();
        let mut rng = StreamKey::new(2).rng();
        let reps = 40_000;
        let mut first_small = 0;
        for _ in 0..reps {
            let f = sampler.forest(2, &mut rng).unwrap();
            assert_eq!(f.iter().map(|t| t.len()).sum::<usize>(), 3);
            if f[0].len() == 1 {
                first_small += 1;
            }
        }
        let p = first_small as f64 / reps as f64;
        assert!((p - 0.5).abs() < 4.0 * (0.25 / reps as f64).sqrt(), "{p}");
    }

    #[test]
    fn modified_three_vertex_law() {
        let pair = eq24();
        let sampler = ModifiedBgwSampler::new(&pair, 3, SamplerOptions::default()).unwrap();
        let law = sampler.root_law();
        assert!((law[1] - 2.0 / 3.0).abs() < 1e-14);
        assert!((law[2] - 1.0 / 3.0).abs() < 1e-14);
    }

    fn tv_to_exhaustive(method: BridgeMethod, n: usize, reps: usize, seed: u64) -> (f64, f64) {
        let pair = eq24();
        let law = exhaustive_bgw_law(&pair.mu, n);
        let opts = SamplerOptions {
            method,
            budget: DEFAULT_BUDGET,
        };
        let mut sampler = ForestSampler::new(&pair.mu, n, opts).unwrap();
        let mut rng = StreamKey::new(seed).rng();
        let mut counts: HashMap<PlaneTree, usize> = HashMap::new();
        for _ in 0..reps {
            *counts.entry(sampler.tree(&mut rng).unwrap()).or_default() += 1;
        }
        assert!(counts.keys().all(|t| law.iter().any(|(u, _)| u == t)));
        let tv: f64 = 0.5
            * law
                .iter()
                .map(|(t, p)| (counts.get(t).copied().unwrap_or(0) as f64 / reps as f64 - p).abs())
                .sum::<f64>();
        // E|hat p - p| <= sqrt(p(1-p)/N); sum over atoms bounds the mean TV
        let sd: f64 = 0.5
            * law
                .iter()
                .map(|(_, p)| (p * (1.0 - p) / reps as f64).sqrt())
                .sum::<f64>();
        (tv, sd)
    }

    #[test]
    fn cycle_lemma_matches_enumeration() {
        for n in 2..=6 {
            for method in [BridgeMethod::Rejection, BridgeMethod::Dyadic] {
                let (tv, sd) = tv_to_exhaustive(method, n, 20_000, n as u64);
                assert!(tv < 4.0 * sd.max(1e-3), "n={n} {method:?}: tv={tv} sd={sd}");
            }
        }
    }

    #[test]
    fn rejection_budget_times_out() {
        let pair = eq24();
        let opts = SamplerOptions {
            method: BridgeMethod::Rejection,
            budget: 10,
        };
        let mut sampler = ForestSampler::new(&pair.mu, 500, opts).unwrap();
        let mut rng = StreamKey::new(3).rng();
        assert!(matches!(sampler.tree(&mut rng), Err(Error::Timeout { .. })));
    }

    #[test]
    fn periodic_support_is_feasible_only_on_lattice() {
        // mu on {0, 2}: trees have an odd number of vertices
        let binary = Pmf::table(vec![0.5, 0.0, 0.5]).unwrap();
        let mut rng = StreamKey::new(4).rng();
        for n in [5usize, 51, 501, 5001] {
            let t = sample_bgw_conditioned(&binary, n, &mut rng).unwrap();
            assert_eq!(t.len(), n);
            assert!(t.kids().iter().all(|&k| k == 0 || k == 2));
        }
        for n in [4usize, 50, 5000] {
            assert!(sample_bgw_conditioned(&binary, n, &mut rng).is_err());
        }
    }

    #[test]
    fn large_stable_tree() {
        let mu = crate::offspring::StableOffspring::new(1.3).unwrap().pmf();
        let mut rng = StreamKey::new(5).rng();
        let t = sample_bgw_conditioned(&mu, 20_000, &mut rng).unwrap();
        assert_eq!(t.len(), 20_000);
        assert!(PlaneTree::new(t.kids().to_vec()).is_ok());
    }
}
