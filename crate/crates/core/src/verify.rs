//! Reproducible verification suites. Each suite runs one experiment and reports the
//! measured statistics next to the bounds they are checked against; randomness is
//! drawn from `seed / replica i` streams, so results do not depend on the worker count.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::iterate::{compose, sample_iterated_levels, AlphaVector, DecoratedLamination};
use crate::lamination::{
    default_delta, hausdorff_distance, is_maximal, lamination_from_tree, nc_to_lamination,
    triangulate_decorated, Lamination,
};
use crate::noncrossing::{
    all_decorations, chords_cross, embed, enumerate_all, extract, uniform_decoration, validate,
    NoncrossingTree, SimplyGeneratedSampler,
};
use crate::offspring::{build_pair, OffspringPair, Pmf, StableOffspring, WeightSeq};
use crate::par::par_map_with;
use crate::rng::StreamKey;
use crate::samplers::{
    hitting_time_pmf, progeny_sum_pmf, root_stats, tree_size_pmf, ForestSampler,
    ModifiedBgwSampler, SamplerOptions, WalkLaw,
};
use crate::stats::{
    big_ln, box_dimension, brownian_longest_chord_cdf, chi_square_pvalue, count_nc, count_table,
    degree_histogram_nc, ks_distance, longest_chord, nc_count_formula, theorem5_constants,
    total_variation, DegreeSet,
};
use crate::tree::{all_trees, PlaneTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Enumeration,
    Bijection,
    Sampler,
    Kemperman,
    SizeLaw,
    Prop23,
    LongestChord,
    Triangulation,
    Convergence,
    Degrees,
    Thm5,
    Dimension,
    Iterate,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Enumeration,
        Suite::Bijection,
        Suite::Sampler,
        Suite::Kemperman,
        Suite::SizeLaw,
        Suite::Prop23,
        Suite::LongestChord,
        Suite::Triangulation,
        Suite::Convergence,
        Suite::Degrees,
        Suite::Thm5,
        Suite::Dimension,
        Suite::Iterate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Enumeration => "enumeration",
            Suite::Bijection => "bijection",
            Suite::Sampler => "sampler",
            Suite::Kemperman => "kemperman",
            Suite::SizeLaw => "size-law",
            Suite::Prop23 => "prop23",
            Suite::LongestChord => "longest-chord",
            Suite::Triangulation => "triangulation",
            Suite::Convergence => "convergence",
            Suite::Degrees => "degrees",
            Suite::Thm5 => "thm5",
            Suite::Dimension => "dimension",
            Suite::Iterate => "iterate",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// One measured quantity and the bound it is held to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, max: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("<= {max}"),
            passed: value <= max,
        }
    }

    pub fn below(name: &str, value: f64, max: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("< {max}"),
            passed: value < max,
        }
    }

    pub fn above(name: &str, value: f64, min: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("> {min}"),
            passed: value > min,
        }
    }

    pub fn at_least(name: &str, value: f64, min: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!(">= {min}"),
            passed: value >= min,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&value),
        }
    }

    pub fn equals(name: &str, value: f64, expected: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("== {expected}"),
            passed: value == expected,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: Value,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    pub passed: bool,
}

impl Report {
    fn new(suite: Suite, seed: u64, config: Value, checks: Vec<Check>, metrics: BTreeMap<String, Value>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Report {
            suite: suite.name().into(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            checks,
            metrics,
            passed,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `check` value, panicking on an unknown name.
    pub fn value(&self, name: &str) -> f64 {
        self.check(name)
            .unwrap_or_else(|| panic!("no check {name:?} in suite {}", self.suite))
            .value
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub workers: usize,
}

/// Runs a suite with its default configuration.
pub fn run(suite: Suite, opts: RunOptions) -> Result<Report> {
    match suite {
        Suite::Enumeration => enumeration(&EnumerationConfig::default()),
        Suite::Bijection => bijection(&BijectionConfig::default()),
        Suite::Sampler => sampler(&SamplerConfig::default(), opts),
        Suite::Kemperman => kemperman(&KempermanConfig::default()),
        Suite::SizeLaw => size_law(&SizeLawConfig::default()),
        Suite::Prop23 => prop23(&Prop23Config::default(), opts),
        Suite::LongestChord => longest_chord_suite(&LongestChordConfig::default(), opts),
        Suite::Triangulation => triangulation(&TriangulationConfig::default(), opts),
        Suite::Convergence => convergence(&ConvergenceConfig::default(), opts),
        Suite::Degrees => degrees(&DegreesConfig::default(), opts),
        Suite::Thm5 => thm5(&Thm5Config::default()),
        Suite::Dimension => dimension(&DimensionConfig::default(), opts),
        Suite::Iterate => iterate(&IterateConfig::default(), opts),
    }
}

fn config_value<T: Serialize>(cfg: &T) -> Value {
    serde_json::to_value(cfg).expect("configs serialize")
}

/// The offspring pair of uniform weights at its critical point `b = 1/3`:
/// `mu(k) = 4(k+1)/3^{k+2}`, `mu_root(k) = 2/3^k`.
pub fn uniform_pair() -> OffspringPair {
    build_pair(&WeightSeq::uniform(), 1.0 / 3.0).expect("1/3 is inside the radius")
}

pub fn uniform_offspring(k: usize) -> f64 {
    4.0 * (k as f64 + 1.0) / 3f64.powi(k as i32 + 2)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// --- enumeration -----------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct EnumerationConfig {
    pub nmax: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig { nmax: 14 }
    }
}

pub fn enumeration(cfg: &EnumerationConfig) -> Result<Report> {
    let table = count_table(cfg.nmax, &DegreeSet::All);
    let mut equal = 0;
    let mut counts = Vec::new();
    for n in 1..=cfg.nmax {
        let formula = nc_count_formula(n);
        if *table.get(n) == formula && count_nc(n, &DegreeSet::All) == formula {
            equal += 1;
        }
        counts.push(formula.to_string());
    }
    let checks = vec![Check::equals("exact_equalities", equal as f64, cfg.nmax as f64)];
    let mut metrics = BTreeMap::new();
    metrics.insert("counts".into(), json!(counts));
    Ok(Report::new(Suite::Enumeration, 0, config_value(cfg), checks, metrics))
}

// --- bijection -------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BijectionConfig {
    pub nmax: usize,
}

impl Default for BijectionConfig {
    fn default() -> Self {
        BijectionConfig { nmax: 8 }
    }
}

pub fn bijection(cfg: &BijectionConfig) -> Result<Report> {
    let (mut count_mismatch, mut invalid, mut roundtrip) = (0u64, 0u64, 0u64);
    let mut per_n = Vec::new();
    for n in 1..=cfg.nmax {
        let mut seen: HashSet<NoncrossingTree> = HashSet::new();
        let mut total = 0u64;
        for tree in all_trees(n) {
            for dec in all_decorations(&tree) {
                let nc = embed(&tree, &dec)?;
                total += 1;
                if !validate(n, nc.edges()) {
                    invalid += 1;
                }
                if extract(&nc)? != (tree.clone(), dec) {
                    roundtrip += 1;
                }
                seen.insert(nc);
            }
        }
        let expected = count_nc(n, &DegreeSet::All).to_u64().expect("small");
        if seen.len() as u64 != expected || total != expected {
            count_mismatch += 1;
        }
        per_n.push(json!({"n": n, "distinct": seen.len(), "expected": expected}));
    }
    let checks = vec![
        Check::equals("sizes_with_wrong_count", count_mismatch as f64, 0.0),
        Check::equals("invalid_images", invalid as f64, 0.0),
        Check::equals("roundtrip_failures", roundtrip as f64, 0.0),
    ];
    let mut metrics = BTreeMap::new();
    metrics.insert("per_n".into(), json!(per_n));
    Ok(Report::new(Suite::Bijection, 0, config_value(cfg), checks, metrics))
}

// --- sampler exactness -----------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub draws: usize,
    pub min_pvalue: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n: 6,
            draws: 100_000,
            min_pvalue: 1e-3,
        }
    }
}

/// `reps` noncrossing trees of size `n` from the simply generated law of `w`, replica `i`
/// drawn from stream `key / replica i`.
pub fn sample_nc_batch(
    w: &WeightSeq,
    n: usize,
    reps: usize,
    key: &StreamKey,
    workers: usize,
) -> Result<Vec<NoncrossingTree>> {
    SimplyGeneratedSampler::new(w, n)?; // surface configuration errors once
    par_map_with(
        reps,
        workers,
        || SimplyGeneratedSampler::new(w, n).expect("checked above"),
        |s, i| s.sample(&mut key.replica(i as u64).rng()),
    )
    .into_iter()
    .collect()
}

pub fn sampler(cfg: &SamplerConfig, opts: RunOptions) -> Result<Report> {
    let all = enumerate_all(cfg.n, None)?;
    let index: HashMap<&NoncrossingTree, usize> = all.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let draws = sample_nc_batch(&WeightSeq::uniform(), cfg.n, cfg.draws, &StreamKey::new(opts.seed), opts.workers)?;
    let mut counts = vec![0u64; all.len()];
    for t in &draws {
        counts[index[t]] += 1;
    }
    let probs = vec![1.0 / all.len() as f64; all.len()];
    let (stat, p) = chi_square_pvalue(&counts, &probs);
    let checks = vec![Check::above("chi_square_pvalue", p, cfg.min_pvalue)];
    let mut metrics = BTreeMap::new();
    metrics.insert("cells".into(), json!(all.len()));
    metrics.insert("chi_square".into(), json!(stat));
    Ok(Report::new(Suite::Sampler, opts.seed, config_value(cfg), checks, metrics))
}

// --- Kemperman -------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct KempermanConfig {
    pub kmax: usize,
    pub nmax: usize,
    pub tolerance: f64,
}

impl Default for KempermanConfig {
    fn default() -> Self {
        KempermanConfig {
            kmax: 3,
            nmax: 12,
            tolerance: 1e-12,
        }
    }
}

/// `P(T_{-k} = n)` by summing the weights of every admissible offspring sequence.
pub fn first_passage_exhaustive(offspring: &[f64], k: usize, n: usize) -> f64 {
    fn rec(p: &[f64], k: i64, left: usize, pos: i64, weight: f64) -> f64 {
        if left == 0 {
            return if pos == -k { weight } else { 0.0 };
        }
        let r = left as i64 - 1;
        let mut total = 0.0;
        for (x, &px) in p.iter().enumerate() {
            let next = pos + x as i64 - 1;
            // can still come down to -k in r unit steps, and stays above -k until then
            if next - r > -k {
                break;
            }
            let ok = if r == 0 { next == -k } else { next > -k };
            if ok && px > 0.0 {
                total += rec(p, k, left - 1, next, weight * px);
            }
        }
        total
    }
    if n == 0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    rec(offspring, k as i64, n, 0, 1.0)
}

pub fn kemperman(cfg: &KempermanConfig) -> Result<Report> {
    let laws: Vec<(&str, Pmf)> = vec![
        ("uniform-weights", uniform_pair().mu),
        ("power-law-1.5", StableOffspring::new(1.5)?.pmf()),
    ];
    let mut checks = Vec::new();
    let mut metrics = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for (name, mu) in &laws {
        let table = mu.tabulate(cfg.nmax + 1);
        let law = WalkLaw::new(mu, cfg.nmax);
        let mut err: f64 = 0.0;
        for k in 1..=cfg.kmax {
            for n in 1..=cfg.nmax {
                let exact = first_passage_exhaustive(&table, k, n);
                err = err.max((hitting_time_pmf(&law, k, n) - exact).abs());
            }
        }
        metrics.insert(format!("max_abs_error_{name}"), json!(err));
        worst = worst.max(err);
    }
    checks.push(Check::below("max_abs_error", worst, cfg.tolerance));
    Ok(Report::new(Suite::Kemperman, 0, config_value(cfg), checks, metrics))
}

// --- tree-size local limit -------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SizeLawConfig {
    pub n: usize,
    pub rel_tolerance: f64,
}

impl Default for SizeLawConfig {
    fn default() -> Self {
        SizeLawConfig {
            n: 2000,
            rel_tolerance: 0.05,
        }
    }
}

pub fn size_law(cfg: &SizeLawConfig) -> Result<Report> {
    let pair = uniform_pair();
    let sigma2 = pair.mu.variance();
    let n = cfg.n as f64;
    let bn = (sigma2 * n / 2.0).sqrt();
    let value = n * bn * tree_size_pmf(&pair, cfg.n);
    // |Gamma(-1/2)| = 2 sqrt(pi)
    let target = pair.root_mean() / (2.0 * PI.sqrt());
    let rel = (value / target - 1.0).abs();
    let checks = vec![Check::at_most("relative_error", rel, cfg.rel_tolerance)];
    let mut metrics = BTreeMap::new();
    metrics.insert("sigma2".into(), json!(sigma2));
    metrics.insert("scaled_pmf".into(), json!(value));
    metrics.insert("limit".into(), json!(target));
    Ok(Report::new(Suite::SizeLaw, 0, config_value(cfg), checks, metrics))
}

// --- root subtrees ---------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Prop23Config {
    pub n: usize,
    pub samples: usize,
    pub kmax: usize,
    pub lmax: usize,
    pub tolerance: f64,
}

impl Default for Prop23Config {
    fn default() -> Self {
        Prop23Config {
            n: 200,
            samples: 100_000,
            kmax: 3,
            lmax: 3,
            tolerance: 0.01,
        }
    }
}

/// Limit of `P(n - 1 - M = k, N_0 = L)`: `P(Y_1 + ... + Y_{L-1} = k) P(N = L)`.
pub fn prop23_limit(pair: &OffspringPair, k: usize, l: usize) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let law = WalkLaw::new(&pair.mu, k + 1);
    progeny_sum_pmf(&law, l - 1, k) * pair.size_biased_root(l)
}

pub fn prop23(cfg: &Prop23Config, opts: RunOptions) -> Result<Report> {
    let pair = uniform_pair();
    let key = StreamKey::new(opts.seed);
    ModifiedBgwSampler::new(&pair, cfg.n, SamplerOptions::default())?;
    let draws: Vec<(usize, usize)> = par_map_with(
        cfg.samples,
        opts.workers,
        || ModifiedBgwSampler::new(&pair, cfg.n, SamplerOptions::default()).expect("checked above"),
        |s, i| -> Result<(usize, usize)> {
            let t = s.sample(&mut key.replica(i as u64).rng())?;
            let r = root_stats(&t)?;
            Ok((r.n - 1 - r.largest, r.root_degree))
        },
    )
    .into_iter()
    .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for k in 0..=cfg.kmax {
        for l in 1..=cfg.lmax {
            let hits = draws.iter().filter(|&&d| d == (k, l)).count();
            let emp = hits as f64 / cfg.samples as f64;
            let lim = prop23_limit(&pair, k, l);
            worst = worst.max((emp - lim).abs());
            cells.push(json!({"k": k, "L": l, "empirical": emp, "limit": lim}));
        }
    }
    let checks = vec![Check::at_most("max_abs_deviation", worst, cfg.tolerance)];
    let mut metrics = BTreeMap::new();
    metrics.insert("cells".into(), json!(cells));
    Ok(Report::new(Suite::Prop23, opts.seed, config_value(cfg), checks, metrics))
}

// --- longest chord ---------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct LongestChordConfig {
    pub n: usize,
    pub reps: usize,
    pub max_ks: f64,
}

impl Default for LongestChordConfig {
    fn default() -> Self {
        LongestChordConfig {
            n: 3000,
            reps: 5000,
            max_ks: 0.03,
        }
    }
}

/// Longest-chord lengths of `reps` independent simply generated trees (replica order).
pub fn longest_chord_samples(
    w: &WeightSeq,
    n: usize,
    reps: usize,
    key: &StreamKey,
    workers: usize,
) -> Result<Vec<f64>> {
    SimplyGeneratedSampler::new(w, n)?;
    par_map_with(
        reps,
        workers,
        || SimplyGeneratedSampler::new(w, n).expect("checked above"),
        |s, i| {
            let nc = s.sample(&mut key.replica(i as u64).rng())?;
            longest_chord(nc.edges(), n)
        },
    )
    .into_iter()
    .collect()
}

pub fn longest_chord_suite(cfg: &LongestChordConfig, opts: RunOptions) -> Result<Report> {
    let mut xs = longest_chord_samples(&WeightSeq::uniform(), cfg.n, cfg.reps, &StreamKey::new(opts.seed), opts.workers)?;
    xs.sort_by(f64::total_cmp);
    let ks = ks_distance(&xs, brownian_longest_chord_cdf)?;
    let checks = vec![Check::at_most("ks_distance", ks, cfg.max_ks)];
    let mut metrics = BTreeMap::new();
    metrics.insert("mean".into(), json!(mean(&xs)));
    metrics.insert("median".into(), json!(median(xs.clone())));
    Ok(Report::new(Suite::LongestChord, opts.seed, config_value(cfg), checks, metrics))
}

// --- triangulation ---------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct TriangulationConfig {
    pub exhaustive_nmax: usize,
    pub random_trees: usize,
    pub alpha: f64,
    pub nmin: usize,
    pub nmax: usize,
}

impl Default for TriangulationConfig {
    fn default() -> Self {
        TriangulationConfig {
            exhaustive_nmax: 8,
            random_trees: 100,
            alpha: 1.3,
            nmin: 100,
            nmax: 10_000,
        }
    }
}

fn brute_noncrossing(lam: &Lamination) -> bool {
    let c = lam.chords();
    (0..c.len()).all(|i| (i + 1..c.len()).all(|j| !chords_cross(c[i], c[j])))
}

/// A conditioned tree of size `n` under `mu`, from `key`.
pub fn conditioned_tree(mu: &Pmf, n: usize, key: &StreamKey) -> Result<PlaneTree> {
    ForestSampler::new(mu, n, SamplerOptions::default())?.tree(&mut key.rng())
}

pub fn triangulation(cfg: &TriangulationConfig, opts: RunOptions) -> Result<Report> {
    let (mut crossing, mut not_maximal, mut cases) = (0u64, 0u64, 0u64);
    for n in 1..=cfg.exhaustive_nmax {
        for tree in all_trees(n) {
            for dec in all_decorations(&tree) {
                let lam = triangulate_decorated(&tree, &dec)?;
                cases += 1;
                crossing += u64::from(!brute_noncrossing(&lam));
                not_maximal += u64::from(!is_maximal(&lam, &lam.endpoints()));
            }
        }
    }
    let mu = StableOffspring::new(cfg.alpha)?.pmf();
    let key = StreamKey::new(opts.seed);
    let span = cfg.nmax.saturating_sub(cfg.nmin);
    let denom = cfg.random_trees.saturating_sub(1).max(1);
    let random: Vec<(bool, bool)> = par_map_with(
        cfg.random_trees,
        opts.workers,
        || (),
        |_, i| -> Result<(bool, bool)> {
            let n = cfg.nmin + span * i / denom;
            let rkey = key.replica(i as u64);
            let tree = conditioned_tree(&mu, n, &rkey.child("tree", 0))?;
            let dec = uniform_decoration(&tree, &mut rkey.child("decoration", 0).rng());
            let lam = triangulate_decorated(&tree, &dec)?;
            Ok((lam.is_noncrossing(), is_maximal(&lam, &lam.endpoints())))
        },
    )
    .into_iter()
    .collect::<Result<_>>()?;
    for (nc, max) in &random {
        cases += 1;
        crossing += u64::from(!nc);
        not_maximal += u64::from(!max);
    }
    let checks = vec![
        Check::equals("crossing_outputs", crossing as f64, 0.0),
        Check::equals("non_maximal_outputs", not_maximal as f64, 0.0),
    ];
    let mut metrics = BTreeMap::new();
    metrics.insert("cases".into(), json!(cases));
    Ok(Report::new(Suite::Triangulation, opts.seed, config_value(cfg), checks, metrics))
}

// --- Hausdorff convergence trend -------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceConfig {
    pub alpha: f64,
    pub small_n: usize,
    pub large_n: usize,
    pub reps: usize,
    pub small_bound: f64,
    pub large_bound: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            alpha: 1.3,
            small_n: 100,
            large_n: 10_000,
            reps: 50,
            small_bound: 0.6,
            large_bound: 0.25,
        }
    }
}

/// Hausdorff distances between the uniform embedding of a stable tree and the
/// triangulation driven by the same decoration.
pub fn embedding_distances(alpha: f64, n: usize, reps: usize, key: &StreamKey, workers: usize) -> Result<Vec<f64>> {
    let mu = StableOffspring::new(alpha)?.pmf();
    ForestSampler::new(&mu, n, SamplerOptions::default())?;
    par_map_with(
        reps,
        workers,
        || ForestSampler::new(&mu, n, SamplerOptions::default()).expect("checked above"),
        |s, i| {
            let mut rng = key.replica(i as u64).rng();
            let tree = s.tree(&mut rng)?;
            let dec = uniform_decoration(&tree, &mut rng);
            let theta = nc_to_lamination(&embed(&tree, &dec)?);
            let tri = triangulate_decorated(&tree, &dec)?;
            hausdorff_distance(&theta, &tri, default_delta(n))
        },
    )
    .into_iter()
    .collect()
}

pub fn convergence(cfg: &ConvergenceConfig, opts: RunOptions) -> Result<Report> {
    let key = StreamKey::new(opts.seed);
    let small = median(embedding_distances(cfg.alpha, cfg.small_n, cfg.reps, &key.child("size", cfg.small_n as u64), opts.workers)?);
    let large = median(embedding_distances(cfg.alpha, cfg.large_n, cfg.reps, &key.child("size", cfg.large_n as u64), opts.workers)?);
    let checks = vec![
        Check::below("median_small", small, cfg.small_bound),
        Check::below("median_large", large, cfg.large_bound),
        Check::above("median_decrease", small - large, 0.0),
    ];
    Ok(Report::new(Suite::Convergence, opts.seed, config_value(cfg), checks, BTreeMap::new()))
}

// --- degree law ------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct DegreesConfig {
    pub n: usize,
    pub trees: usize,
    pub kmax: usize,
    pub max_tv: f64,
}

impl Default for DegreesConfig {
    fn default() -> Self {
        DegreesConfig {
            n: 10_000,
            trees: 10,
            kmax: 10,
            max_tv: 0.02,
        }
    }
}

pub fn degrees(cfg: &DegreesConfig, opts: RunOptions) -> Result<Report> {
    let trees = sample_nc_batch(&WeightSeq::uniform(), cfg.n, cfg.trees, &StreamKey::new(opts.seed), opts.workers)?;
    let hist = degree_histogram_nc(&trees)?;
    let tv = total_variation(&hist, uniform_offspring, 0..=cfg.kmax);
    let checks = vec![Check::at_most("total_variation", tv, cfg.max_tv)];
    let mut metrics = BTreeMap::new();
    metrics.insert("histogram".into(), json!(hist));
    Ok(Report::new(Suite::Degrees, opts.seed, config_value(cfg), checks, metrics))
}

// --- counting asymptotics --------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Thm5Config {
    pub n_all: usize,
    pub finite_degrees: Vec<usize>,
    pub finite_nmax: usize,
    pub all_window: (f64, f64),
    pub finite_window: (f64, f64),
}

impl Default for Thm5Config {
    fn default() -> Self {
        Thm5Config {
            n_all: 2000,
            finite_degrees: vec![1, 3],
            finite_nmax: 400,
            all_window: (0.98, 1.02),
            finite_window: (0.90, 1.10),
        }
    }
}

/// `#NC_n^A / (K rho^{n-1} n^{-3/2})`.
pub fn thm5_ratio(degrees: &DegreeSet, n: usize, count: &num_bigint::BigUint) -> Result<f64> {
    let c = theorem5_constants(degrees)?;
    let ln_asym = c.k.ln() + (n as f64 - 1.0) * c.rho.ln() - 1.5 * (n as f64).ln();
    Ok((big_ln(count) - ln_asym).exp())
}

pub fn thm5(cfg: &Thm5Config) -> Result<Report> {
    let all = DegreeSet::All;
    let count = count_nc(cfg.n_all, &all);
    let ratio_all = thm5_ratio(&all, cfg.n_all, &count)?;
    // the same asymptotic written as (9 sqrt(3 pi))^{-1} (27/4)^n n^{-3/2}
    let n = cfg.n_all as f64;
    let ln_closed = -(9.0 * (3.0 * PI).sqrt()).ln() + n * (27.0f64 / 4.0).ln() - 1.5 * n.ln();
    let ratio_closed = (big_ln(&count) - ln_closed).exp();

    let finite = DegreeSet::finite(&cfg.finite_degrees)?;
    let table = count_table(cfg.finite_nmax, &finite);
    let nf = *table
        .feasible()
        .last()
        .ok_or_else(|| Error::Infeasible("no feasible size".into()))?;
    let ratio_finite = thm5_ratio(&finite, nf, table.get(nf))?;
    let cf = theorem5_constants(&finite)?;
    let call = theorem5_constants(&all)?;

    let checks = vec![
        Check::within("ratio_all", ratio_all, cfg.all_window.0, cfg.all_window.1),
        Check::within("ratio_all_closed_form", ratio_closed, cfg.all_window.0, cfg.all_window.1),
        Check::within("ratio_finite", ratio_finite, cfg.finite_window.0, cfg.finite_window.1),
    ];
    let mut metrics = BTreeMap::new();
    metrics.insert("constants_all".into(), json!({"b": call.b, "K": call.k, "rho": call.rho, "period": call.period}));
    metrics.insert("constants_finite".into(), json!({"b": cf.b, "K": cf.k, "rho": cf.rho, "period": cf.period}));
    metrics.insert("finite_n".into(), json!(nf));
    Ok(Report::new(Suite::Thm5, 0, config_value(cfg), checks, metrics))
}

// --- dimension ordering ----------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct DimensionConfig {
    pub alpha: f64,
    pub n: usize,
    pub reps: usize,
    pub levels: (u32, u32),
    pub min_gap: f64,
    pub window: f64,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        DimensionConfig {
            alpha: 1.3,
            n: 200_000,
            reps: 20,
            levels: (4, 10),
            min_gap: 0.3,
            window: 0.25,
        }
    }
}

/// Box-counting slopes `(plain, triangulated)` of one stable lamination per replica.
pub fn dimension_slopes(cfg: &DimensionConfig, key: &StreamKey, workers: usize) -> Result<Vec<(f64, f64)>> {
    let mu = StableOffspring::new(cfg.alpha)?.pmf();
    ForestSampler::new(&mu, cfg.n, SamplerOptions::default())?;
    let levels = cfg.levels.0..=cfg.levels.1;
    par_map_with(
        cfg.reps,
        workers,
        || ForestSampler::new(&mu, cfg.n, SamplerOptions::default()).expect("checked above"),
        |s, i| {
            let mut rng = key.replica(i as u64).rng();
            let tree = s.tree(&mut rng)?;
            let dec = uniform_decoration(&tree, &mut rng);
            let plain = lamination_from_tree(&tree.encode());
            let tri = triangulate_decorated(&tree, &dec)?;
            Ok((box_dimension(&plain, levels.clone())?.0, box_dimension(&tri, levels.clone())?.0))
        },
    )
    .into_iter()
    .collect()
}

pub fn dimension(cfg: &DimensionConfig, opts: RunOptions) -> Result<Report> {
    let slopes = dimension_slopes(cfg, &StreamKey::new(opts.seed), opts.workers)?;
    let plain = mean(&slopes.iter().map(|s| s.0).collect::<Vec<_>>());
    let tri = mean(&slopes.iter().map(|s| s.1).collect::<Vec<_>>());
    let a = cfg.alpha;
    let checks = vec![
        Check::at_least("gap", tri - plain, cfg.min_gap),
        Check::at_most("triangulated_offset", (tri - (1.0 + 1.0 / a)).abs(), cfg.window),
        Check::at_most("plain_offset", (plain - (2.0 - 1.0 / a)).abs(), cfg.window),
    ];
    let mut metrics = BTreeMap::new();
    metrics.insert("mean_plain".into(), json!(plain));
    metrics.insert("mean_triangulated".into(), json!(tri));
    Ok(Report::new(Suite::Dimension, opts.seed, config_value(cfg), checks, metrics))
}

// --- iteration -------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct IterateConfig {
    pub exhaustive_nmax: usize,
    pub associativity_cases: usize,
    pub large_cases: usize,
    pub large_n: usize,
    pub alphas: Vec<f64>,
}

impl Default for IterateConfig {
    fn default() -> Self {
        IterateConfig {
            exhaustive_nmax: 8,
            associativity_cases: 100,
            large_cases: 100,
            large_n: 2000,
            alphas: vec![1.3, 1.6, 2.0],
        }
    }
}

/// Random tree laminations of prescribed resolutions.
struct RandomInserts {
    mu: Pmf,
    samplers: HashMap<usize, ForestSampler>,
}

impl RandomInserts {
    fn new() -> Self {
        RandomInserts {
            mu: StableOffspring::new(1.5).expect("valid index").pmf(),
            samplers: HashMap::new(),
        }
    }

    fn draw<R: Rng>(&mut self, beta: usize, rng: &mut R) -> Result<DecoratedLamination> {
        let s = match self.samplers.entry(beta) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(ForestSampler::new(&self.mu, beta, SamplerOptions::default())?)
            }
        };
        let tree = s.tree(rng)?;
        Ok(DecoratedLamination::from_lamination(lamination_from_tree(&tree.encode())))
    }

    /// Inserts into a random subset (each face with probability 1/2) of the faces.
    fn for_faces<R: Rng>(&mut self, faces: &[Vec<usize>], rng: &mut R) -> Result<BTreeMap<usize, DecoratedLamination>> {
        let mut out = BTreeMap::new();
        for (f, face) in faces.iter().enumerate() {
            if rng.random_bool(0.5) {
                out.insert(f, self.draw(face.len(), rng)?);
            }
        }
        Ok(out)
    }
}

/// Composing level 2 then level 3 versus composing the base with the precomposed inserts.
fn associativity_case<R: Rng>(ins: &mut RandomInserts, base_n: usize, rng: &mut R) -> Result<bool> {
    let base = ins.draw(base_n, rng)?;
    let level2 = ins.for_faces(&base.faces, rng)?;
    let mid = compose(&base, &level2)?;
    // origin of every face of `mid`: (base face, face of its insert)
    let mut origin = Vec::new();
    for f in 0..base.faces.len() {
        match level2.get(&f) {
            Some(d) => origin.extend((0..d.faces.len()).map(|t| (f, Some(t)))),
            None => origin.push((f, None)),
        }
    }
    let level3 = ins.for_faces(&mid.faces, rng)?;
    let two_step = compose(&mid, &level3)?;

    let mut pre = BTreeMap::new();
    for f in 0..base.faces.len() {
        let inner: BTreeMap<usize, DecoratedLamination> = level3
            .iter()
            .filter_map(|(j, e)| match origin[*j] {
                (g, Some(t)) if g == f => Some((t, e.clone())),
                _ => None,
            })
            .collect();
        match level2.get(&f) {
            Some(d) => {
                pre.insert(f, compose(d, &inner)?);
            }
            None => {
                if let Some((j, _)) = origin.iter().enumerate().find(|(_, o)| **o == (f, None)) {
                    if let Some(e) = level3.get(&j) {
                        pre.insert(f, e.clone());
                    }
                }
            }
        }
    }
    let precomposed = compose(&base, &pre)?;
    Ok(precomposed == two_step)
}

pub fn iterate(cfg: &IterateConfig, opts: RunOptions) -> Result<Report> {
    let key = StreamKey::new(opts.seed);
    let mut ins = RandomInserts::new();
    let (mut identity_fail, mut crossing, mut cases) = (0u64, 0u64, 0u64);
    let mut rng = key.child("exhaustive", 0).rng();
    for n in 3..=cfg.exhaustive_nmax {
        for tree in all_trees(n) {
            let base = DecoratedLamination::from_lamination(lamination_from_tree(&tree.encode()));
            identity_fail += u64::from(compose(&base, &BTreeMap::new())? != base);
            let inserts = ins.for_faces(&base.faces, &mut rng)?;
            let out = compose(&base, &inserts)?;
            crossing += u64::from(!brute_noncrossing(&out.lam));
            cases += 1;
        }
    }
    let alphas = AlphaVector::new(cfg.alphas.clone())?;
    let large: Vec<(bool, bool)> = par_map_with(
        cfg.large_cases,
        opts.workers,
        || (),
        |_, i| -> Result<(bool, bool)> {
            let s = sample_iterated_levels(&alphas, cfg.large_n, &key.child("large", 0).replica(i as u64))?;
            let identity = s.levels.iter().all(|l| compose(l, &BTreeMap::new()).as_ref() == Ok(l));
            Ok((identity, s.levels.iter().all(|l| l.lam.is_noncrossing())))
        },
    )
    .into_iter()
    .collect::<Result<_>>()?;
    for (id, nc) in large {
        identity_fail += u64::from(!id);
        crossing += u64::from(!nc);
        cases += 1;
    }
    let assoc: Vec<bool> = par_map_with(
        cfg.associativity_cases,
        opts.workers,
        RandomInserts::new,
        |ins, i| {
            let mut rng = key.child("associativity", 0).replica(i as u64).rng();
            let n = rng.random_range(4..=60);
            associativity_case(ins, n, &mut rng)
        },
    )
    .into_iter()
    .collect::<Result<_>>()?;
    let assoc_fail = assoc.iter().filter(|ok| !**ok).count();
    let checks = vec![
        Check::equals("identity_failures", identity_fail as f64, 0.0),
        Check::equals("crossing_compositions", crossing as f64, 0.0),
        Check::equals("associativity_failures", assoc_fail as f64, 0.0),
    ];
    let mut metrics = BTreeMap::new();
    metrics.insert("noncrossing_cases".into(), json!(cases));
    metrics.insert("associativity_cases".into(), json!(assoc.len()));
    Ok(Report::new(Suite::Iterate, opts.seed, config_value(cfg), checks, metrics))
}
