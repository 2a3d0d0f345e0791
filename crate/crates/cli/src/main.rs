use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::{json, Value};

use nclam::iterate::{dim_formula, sample_iterated_levels, AlphaVector};
use nclam::lamination::{lamination_from_tree, triangulate_decorated};
use nclam::noncrossing::{embed, uniform_decoration, SimplyGeneratedSampler};
use nclam::par::par_map_with;
use nclam::render::{render_layers, RenderStyle};
use nclam::rng::fresh_seed;
use nclam::samplers::{ForestSampler, SamplerOptions};
use nclam::stats::{
    box_dimension, brownian_longest_chord_cdf, count_table, degree_histogram, ks_distance,
    theorem5_constants, total_variation, DegreeSet,
};
use nclam::verify::{self, thm5_ratio, RunOptions, Suite};
use nclam::{Decoration, Error, Lamination, NoncrossingTree, PlaneTree, StableOffspring, StreamKey, WeightSeq};

#[derive(Parser)]
#[command(name = "nclam", version, about = "Noncrossing trees and discrete stable laminations")]
struct Cli {
    /// Master seed; a fresh one is drawn and logged when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo batches.
    #[arg(long, global = true, env = "NCLAM_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw trees, noncrossing trees or laminations (one JSON record per line).
    Sample(SampleArgs),
    /// Summary statistics of sampled objects.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Run a verification suite; exit status 1 when a check fails.
    Verify {
        suite: String,
    },
    /// Iterated stable lamination.
    Iterate {
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        n: usize,
    },
    /// SVG chord diagram of a lamination or noncrossing tree document.
    Render {
        /// Input JSON (standard input when absent).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Style overrides as JSON.
        #[arg(long)]
        style: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct LawArgs {
    /// Weight sequence: uniform, set:1,3, geometric:q, zipf:s or {"w":{...}}.
    #[arg(long, conflicts_with = "alpha")]
    weights: Option<String>,
    /// Stable index of the power-law offspring family, in (1, 2).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum What {
    Nc,
    Tree,
    Lamination,
    Triangulation,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    law: LawArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long = "as", value_enum, default_value = "nc")]
    what: What,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Longest chord of simply generated noncrossing trees, against the Brownian law.
    LongestChord {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Children-count law of non-root vertices.
    Degrees {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
    },
    /// Exact counts of noncrossing trees with degrees in a set, and the asymptotic ratio.
    Count {
        /// `all` or a comma-separated degree list containing 1.
        #[arg(long, default_value = "all")]
        degrees: String,
        #[arg(long)]
        n: usize,
    },
    /// Box-counting slopes of plain, triangulated or iterated laminations.
    Dimension {
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 4)]
        level_min: u32,
        #[arg(long, default_value_t = 10)]
        level_max: u32,
        /// Triangulate (single alpha only).
        #[arg(long)]
        triangulated: bool,
    },
}

/// Exit statuses.
const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

enum CliError {
    Config(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Lib(e) => match e {
                Error::Infeasible(_)
                | Error::NoCriticalPoint(_)
                | Error::DivergentWeights
                | Error::DivergentNormalizer(_) => EXIT_INFEASIBLE,
                Error::Timeout { .. } => EXIT_TIMEOUT,
                _ => EXIT_CONFIG,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

enum Law {
    Weights(WeightSeq),
    Stable(f64),
}

impl LawArgs {
    fn resolve(&self) -> CliResult<Law> {
        match (&self.weights, self.alpha) {
            (_, Some(a)) => {
                StableOffspring::new(a)?;
                Ok(Law::Stable(a))
            }
            (Some(w), None) => Ok(Law::Weights(w.parse()?)),
            (None, None) => Ok(Law::Weights(WeightSeq::uniform())),
        }
    }

    fn describe(&self) -> Value {
        match (&self.weights, self.alpha) {
            (_, Some(a)) => json!({"alpha": a}),
            (Some(w), None) => json!({"weights": w}),
            (None, None) => json!({"weights": "uniform"}),
        }
    }
}

/// Decorated-tree source: shapes and uniform decorations of the chosen law.
enum Source {
    Simply(SimplyGeneratedSampler),
    Stable(ForestSampler),
}

impl Source {
    fn new(law: &Law, n: usize) -> nclam::Result<Self> {
        match law {
            Law::Weights(w) => Ok(Source::Simply(SimplyGeneratedSampler::new(w, n)?)),
            Law::Stable(a) => Ok(Source::Stable(ForestSampler::new(
                &StableOffspring::new(*a)?.pmf(),
                n,
                SamplerOptions::default(),
            )?)),
        }
    }

    fn draw(&mut self, key: &StreamKey) -> nclam::Result<(PlaneTree, Decoration)> {
        let mut rng = key.rng();
        match self {
            Source::Simply(s) => s.sample_decorated(&mut rng),
            Source::Stable(s) => {
                let tree = s.tree(&mut rng)?;
                let dec = uniform_decoration(&tree, &mut rng);
                Ok((tree, dec))
            }
        }
    }
}

fn draw_batch(law: &Law, n: usize, reps: usize, key: &StreamKey, workers: usize) -> CliResult<Vec<(PlaneTree, Decoration)>> {
    if reps == 0 {
        return Err(config_err("--reps must be >= 1"));
    }
    Source::new(law, n)?;
    let out: nclam::Result<Vec<_>> = par_map_with(
        reps,
        workers,
        || Source::new(law, n).expect("checked above"),
        |s, i| s.draw(&key.replica(i as u64)),
    )
    .into_iter()
    .collect();
    Ok(out?)
}

fn chords_json(chords: &[(usize, usize)]) -> Value {
    json!(chords)
}

fn sample_record(what: What, i: usize, tree: &PlaneTree, dec: &Decoration) -> CliResult<Value> {
    let n = tree.len();
    Ok(match what {
        What::Nc => {
            let nc = embed(tree, dec)?;
            json!({"replica": i, "n": n, "edges": chords_json(nc.edges())})
        }
        What::Tree => json!({"replica": i, "kids": tree.kids(), "decoration": dec.l}),
        What::Lamination => {
            let lam = lamination_from_tree(&tree.encode());
            json!({"replica": i, "m": n, "chords": chords_json(lam.chords())})
        }
        What::Triangulation => {
            let base = lamination_from_tree(&tree.encode());
            let full = triangulate_decorated(tree, dec)?;
            json!({
                "replica": i,
                "m": n,
                "chords": chords_json(full.chords()),
                "layers": [
                    {"class": "base", "chords": chords_json(base.chords())},
                    {"class": "triangulation", "chords": chords_json(full.chords())},
                ],
            })
        }
    })
}

struct Output {
    path: Option<PathBuf>,
    buf: Vec<u8>,
}

impl Output {
    fn line(&mut self, s: &str) {
        self.buf.extend_from_slice(s.as_bytes());
        self.buf.push(b'\n');
    }

    fn json(&mut self, v: &Value) {
        let s = serde_json::to_string(v).expect("values serialize");
        self.line(&s);
    }

    fn pretty(&mut self, v: &Value) {
        let s = serde_json::to_string_pretty(v).expect("values serialize");
        self.line(&s);
    }

    fn finish(self) -> CliResult<()> {
        match self.path {
            Some(p) => fs::write(&p, &self.buf).map_err(|e| config_err(format!("{}: {e}", p.display()))),
            None => io::stdout()
                .write_all(&self.buf)
                .map_err(|e| config_err(format!("stdout: {e}"))),
        }
    }
}

fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn cmd_sample(args: &SampleArgs, key: &StreamKey, workers: usize, out: &mut Output) -> CliResult<()> {
    let law = args.law.resolve()?;
    if args.what == What::Nc && matches!(law, Law::Stable(_)) {
        info!("noncrossing trees of a stable law use the uniform embedding");
    }
    info!("sample: law {} n {} reps {}", args.law.describe(), args.n, args.reps);
    for (i, (tree, dec)) in draw_batch(&law, args.n, args.reps, key, workers)?.iter().enumerate() {
        out.json(&sample_record(args.what, i, tree, dec)?);
    }
    Ok(())
}

fn report(kind: &str, seed: u64, config: Value, body: Value) -> Value {
    json!({"report": kind, "version": version(), "seed": seed, "config": config, "result": body})
}

fn cmd_stats(cmd: &StatsCommand, key: &StreamKey, workers: usize, out: &mut Output) -> CliResult<()> {
    let seed = key.seed();
    match cmd {
        StatsCommand::LongestChord { law, n, reps, format } => {
            let lw = law.resolve()?;
            let batch = draw_batch(&lw, *n, *reps, key, workers)?;
            let xs = batch
                .iter()
                .map(|(t, d)| {
                    let nc: NoncrossingTree = embed(t, d)?;
                    nclam::stats::longest_chord(nc.edges(), *n)
                })
                .collect::<nclam::Result<Vec<f64>>>()?;
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            let ks = ks_distance(&sorted, brownian_longest_chord_cdf)?;
            let config = json!({"command": "stats longest-chord", "law": law.describe(), "n": n, "reps": reps});
            let summary = json!({"ks_distance": ks, "reference": "Brownian triangulation longest chord"});
            match format {
                Format::Csv => {
                    out.line(&format!("# nclam {} seed {seed} {config}", version()));
                    out.line(&format!("# {summary}"));
                    out.line("replica,length");
                    for (i, x) in xs.iter().enumerate() {
                        out.line(&format!("{i},{x:.9}"));
                    }
                }
                Format::Json => out.pretty(&report("longest-chord", seed, config, json!({"samples": xs, "summary": summary}))),
            }
            info!("longest chord: KS distance {ks:.5}");
        }
        StatsCommand::Degrees { law, n, reps } => {
            let lw = law.resolve()?;
            let batch = draw_batch(&lw, *n, *reps, key, workers)?;
            let hist = degree_histogram(batch.iter().map(|(t, _)| t))?;
            let mut body = json!({"histogram": hist});
            if let Law::Weights(w) = &lw {
                let pair = nclam::offspring::critical_pair(w)?;
                let kmax = hist.keys().copied().max().unwrap_or(0).max(10);
                let tv = total_variation(&hist, |k| pair.mu.prob(k), 0..=kmax);
                body["offspring_law"] = json!((0..=kmax).map(|k| pair.mu.prob(k)).collect::<Vec<_>>());
                body["total_variation"] = json!(tv);
            }
            let config = json!({"command": "stats degrees", "law": law.describe(), "n": n, "reps": reps});
            out.pretty(&report("degrees", seed, config, body));
        }
        StatsCommand::Count { degrees, n } => {
            let set: DegreeSet = degrees.parse()?;
            let table = count_table(*n, &set);
            let counts: Vec<String> = (0..=*n).map(|k| table.get(k).to_string()).collect();
            let mut body = json!({"counts": counts});
            if let Ok(c) = theorem5_constants(&set) {
                body["constants"] = json!({"b": c.b, "K": c.k, "rho": c.rho, "period": c.period});
                if let Some(&nf) = table.feasible().last() {
                    body["ratio"] = json!({"n": nf, "value": thm5_ratio(&set, nf, table.get(nf))?});
                }
            }
            let config = json!({"command": "stats count", "degrees": set.to_string(), "n": n});
            out.pretty(&report("count", 0, config, body));
        }
        StatsCommand::Dimension { alphas, n, reps, level_min, level_max, triangulated } => {
            if *reps == 0 || level_min > level_max {
                return Err(config_err("need --reps >= 1 and --level-min <= --level-max"));
            }
            let av = AlphaVector::new(alphas.clone())?;
            if *triangulated && alphas.len() != 1 {
                return Err(config_err("--triangulated takes a single alpha"));
            }
            let levels = *level_min..=*level_max;
            let slopes: Vec<f64> = par_map_with(*reps, workers, || (), |_, i| -> nclam::Result<f64> {
                let k = key.replica(i as u64);
                let lam = if *triangulated {
                    let mut s = Source::new(&Law::Stable(alphas[0]), *n)?;
                    let (t, d) = s.draw(&k)?;
                    triangulate_decorated(&t, &d)?
                } else {
                    sample_iterated_levels(&av, *n, &k)?.last().lam.clone()
                };
                Ok(box_dimension(&lam, levels.clone())?.0)
            })
            .into_iter()
            .collect::<nclam::Result<_>>()?;
            let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
            let reference = if *triangulated {
                json!({"value": 1.0 + 1.0 / alphas[0], "status": "theorem"})
            } else {
                json!({"value": dim_formula(alphas)?, "status": "conjectured"})
            };
            let config = json!({
                "command": "stats dimension", "alphas": alphas, "n": n, "reps": reps,
                "levels": [level_min, level_max], "triangulated": triangulated,
            });
            out.pretty(&report("dimension", seed, config, json!({"slopes": slopes, "mean": mean, "reference": reference})));
        }
    }
    Ok(())
}

fn cmd_iterate(alphas: &[f64], n: usize, key: &StreamKey, out: &mut Output) -> CliResult<()> {
    let av = AlphaVector::new(alphas.to_vec())?;
    let sample = sample_iterated_levels(&av, n, key)?;
    let last = sample.last();
    let layers: Vec<Value> = sample
        .levels
        .iter()
        .enumerate()
        .map(|(q, l)| json!({"class": format!("level-{}", q + 1), "chords": chords_json(l.lam.chords())}))
        .collect();
    out.json(&json!({
        "version": version(),
        "seed": key.seed(),
        "config": {"command": "iterate", "alphas": alphas, "n": n},
        "dimension_conjectured": dim_formula(alphas)?,
        "m": last.lam.resolution(),
        "chords": chords_json(last.lam.chords()),
        "layers": layers,
    }));
    Ok(())
}

/// Reads `{m, chords[, layers]}`, `{n, edges}`, or the first record of a JSON-lines file.
fn parse_drawing(text: &str) -> CliResult<(usize, Vec<(String, Vec<(usize, usize)>)>)> {
    let v: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(_) => {
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
            serde_json::from_str(first).map_err(|e| config_err(format!("input is not JSON: {e}")))?
        }
    };
    let chords = |x: &Value| -> CliResult<Vec<(usize, usize)>> {
        serde_json::from_value(x.clone()).map_err(|e| config_err(format!("bad chord list: {e}")))
    };
    if let Some(n) = v.get("n").and_then(Value::as_u64) {
        let nc = NoncrossingTree::new(n as usize, chords(&v["edges"])?)?;
        return Ok((nc.n(), vec![("base".into(), nc.edges().to_vec())]));
    }
    let m = v
        .get("m")
        .and_then(Value::as_u64)
        .ok_or_else(|| config_err("input needs `m` and `chords`, or `n` and `edges`"))? as usize;
    let all = Lamination::new(m, chords(&v["chords"])?)?;
    let mut layers = Vec::new();
    if let Some(ls) = v.get("layers").and_then(Value::as_array) {
        for l in ls {
            let class = l["class"].as_str().ok_or_else(|| config_err("layer without class"))?;
            layers.push((class.to_string(), Lamination::new(m, chords(&l["chords"])?)?.chords().to_vec()));
        }
    }
    layers.push(("base".into(), all.chords().to_vec()));
    Ok((m, layers))
}

fn cmd_render(input: Option<&PathBuf>, style: Option<&PathBuf>, out: &mut Output) -> CliResult<()> {
    let text = match input {
        Some(p) => fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(config_err)?;
            s
        }
    };
    let style: RenderStyle = match style {
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&s).map_err(|e| config_err(format!("bad style: {e}")))?
        }
        None => RenderStyle::default(),
    };
    let (m, layers) = parse_drawing(&text)?;
    let refs: Vec<(&str, &[(usize, usize)])> = layers.iter().map(|(c, ch)| (c.as_str(), ch.as_slice())).collect();
    let svg = render_layers(m, &refs, &style)?;
    out.buf.extend_from_slice(svg.as_bytes());
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    let random = !matches!(cli.command, Command::Render { .. } | Command::Stats(StatsCommand::Count { .. }));
    let seed = match cli.seed {
        Some(s) => s,
        None if random => {
            let s = fresh_seed();
            log::warn!("no --seed given; using seed {s}");
            s
        }
        None => 0,
    };
    if cli.workers == 0 {
        return Err(config_err("--workers must be >= 1"));
    }
    let key = StreamKey::new(seed);
    let mut out = Output {
        path: cli.out.clone(),
        buf: Vec::new(),
    };
    let mut status = 0;
    match &cli.command {
        Command::Sample(a) => cmd_sample(a, &key, cli.workers, &mut out)?,
        Command::Stats(s) => cmd_stats(s, &key, cli.workers, &mut out)?,
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            info!("verify {suite} seed {seed}");
            let r = verify::run(suite, RunOptions { seed, workers: cli.workers })?;
            for c in &r.checks {
                info!("{} {} = {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
            }
            out.pretty(&serde_json::to_value(&r).expect("reports serialize"));
            if !r.passed {
                status = EXIT_FAILED_CHECK;
            }
        }
        Command::Iterate { alphas, n } => cmd_iterate(alphas, *n, &key, &mut out)?,
        Command::Render { input, style } => cmd_render(input.as_ref(), style.as_ref(), &mut out)?,
    }
    out.finish()?;
    Ok(status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
