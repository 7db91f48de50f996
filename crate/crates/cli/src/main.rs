mod io;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tsicd::benchmark::{policy_label, run_benchmark, simulation_seed, BenchmarkConfig, TestKind};
use tsicd::ci::{window_embed, CiTest, FisherZ, GSquare, OracleTest, DEFAULT_ALPHA};
use tsicd::discovery::{ts_icd, DiscoveryConfig, OrderingPolicy, OrientSchedule};
use tsicd::graph::VarNames;
use tsicd::metrics::{icd_bound, tsicd_bound, BinomialMode};
use tsicd::separation::unrolled_ground_truth;
use tsicd::svar::{binarize, sample_model, simulate, ProtocolParams, SvarModel};

use crate::report::Report;

#[derive(Parser)]
#[command(name = "tsicd", version, about = "Causal discovery for time series with hidden confounders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample random SVAR models and write data, model and ground truth per seed.
    Simulate(SimulateArgs),
    /// Learn a dynamic PAG from a CSV series.
    Discover(DiscoverArgs),
    /// Repeated simulate/discover/score runs with median and MAD summaries.
    Benchmark(BenchmarkArgs),
    /// Closed-form worst-case CI-test counts.
    Bounds(BoundsArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Observed variables per time-stamp.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Model order (largest lag of the generating process).
    #[arg(long, default_value_t = 3)]
    tau: usize,
    #[arg(long, default_value_t = 0.3)]
    latent_frac: f64,
    /// Cross relations added to the autoregressive self loops.
    #[arg(long, default_value_t = 5)]
    n_extra: usize,
    #[arg(long, default_value_t = 0.3)]
    contemporaneous_frac: f64,
    /// Series length.
    #[arg(long, default_value_t = 500)]
    t: usize,
}

impl ModelArgs {
    fn params(&self) -> ProtocolParams {
        ProtocolParams {
            n_observed: self.n,
            tau: self.tau,
            latent_frac: self.latent_frac,
            n_extra: self.n_extra,
            contemporaneous_frac: self.contemporaneous_frac,
            ..ProtocolParams::default()
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Seeds: `a..b` (inclusive), `a,b,c` or a single value.
    #[arg(long, default_value = "0..9")]
    seeds: String,
    /// Median-split every column into 0/1.
    #[arg(long)]
    binary: bool,
    /// Largest lag of the ground-truth window; defaults to `--tau`.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestArg {
    Parcorr,
    Gsq,
    Oracle,
}

impl From<TestArg> for TestKind {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Parcorr => TestKind::ParCorr,
            TestArg::Gsq => TestKind::GSquare,
            TestArg::Oracle => TestKind::Oracle,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    /// Temporal edges by decreasing lag, then contemporaneous edges.
    Default,
    Swapped,
    Random,
}

fn policy(order: OrderArg, rng_seed: u64) -> OrderingPolicy {
    match order {
        OrderArg::Default => OrderingPolicy::DescendingLag,
        OrderArg::Swapped => OrderingPolicy::Swapped,
        OrderArg::Random => OrderingPolicy::Random(rng_seed),
    }
}

#[derive(Args)]
struct DiscoverArgs {
    /// CSV with a header row and one numeric column per variable.
    #[arg(long)]
    input: PathBuf,
    /// Largest lag of the window (`w`; the window covers `w + 1` stamps).
    #[arg(long, default_value_t = 2)]
    window: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "parcorr")]
    test: TestArg,
    /// Model description for `--test oracle`.
    #[arg(long, required_if_eq("test", "oracle"))]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "default")]
    order: OrderArg,
    /// Seed of the random ordering.
    #[arg(long, env = "TSICD_SEED", default_value_t = 0)]
    rng_seed: u64,
    /// Largest conditioning-set size.
    #[arg(long)]
    max_r: Option<usize>,
    /// Reorient after every sweep instead of once per iteration.
    #[arg(long)]
    orient_per_sweep: bool,
    /// Learned graph (homology representatives); stdout when omitted.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Run report; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Largest lag of the discovery window; defaults to `--tau`.
    #[arg(long)]
    window: Option<usize>,
    /// Number of repetitions.
    #[arg(long)]
    reps: Option<u64>,
    /// Seeds: `a..b` (inclusive), `a,b,c`, or a first seed combined with `--reps`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    binary: bool,
    /// Defaults to `gsq` with `--binary`, `parcorr` otherwise.
    #[arg(long, value_enum)]
    test: Option<TestArg>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// One or more orderings, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "default")]
    order: Vec<OrderArg>,
    #[arg(long, env = "TSICD_SEED", default_value_t = 0)]
    rng_seed: u64,
    #[arg(long)]
    orient_per_sweep: bool,
    /// Per-run scores as CSV.
    #[arg(long)]
    raw: Option<PathBuf>,
    /// Summary report; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rounded,
    Gamma,
}

#[derive(Args)]
struct BoundsArgs {
    /// Variables per stamp: value, list or inclusive range.
    #[arg(long, default_value = "5")]
    n: String,
    #[arg(long, default_value = "3")]
    tau: String,
    #[arg(long, default_value = "0..3")]
    r: String,
    /// Surviving edge fraction(s) in (0, 1), comma separated.
    #[arg(long, value_parser = parse_rho, value_delimiter = ',', default_value = "0.4")]
    rho: Vec<f64>,
    #[arg(long, value_enum, default_value = "rounded")]
    mode: ModeArg,
}

fn parse_rho(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("rho must lie strictly between 0 and 1, got {v}"))
    }
}

/// `a..b` (inclusive), `a,b,c` or `a`.
fn parse_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().with_context(|| format!("bad range start in {s:?}"))?;
        let b: u64 = b.trim().parse().with_context(|| format!("bad range end in {s:?}"))?;
        if a > b {
            bail!("empty range {s:?}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("bad value {t:?} in {s:?}")))
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    Ok(parse_list(s)?.into_iter().map(|v| v as usize).collect())
}

fn benchmark_seeds(seeds: Option<&str>, reps: Option<u64>) -> Result<Vec<u64>> {
    match (seeds, reps) {
        (None, None) => Ok((0..100).collect()),
        (None, Some(k)) => Ok((0..k).collect()),
        (Some(s), reps) => {
            let list = parse_list(s)?;
            match reps {
                Some(k) if list.len() == 1 => Ok((list[0]..list[0] + k).collect()),
                Some(k) if list.len() as u64 != k => {
                    bail!("--seeds lists {} seeds but --reps is {k}", list.len())
                }
                _ => Ok(list),
            }
        }
    }
}

fn test_label(t: TestKind) -> &'static str {
    match t {
        TestKind::ParCorr => "parcorr",
        TestKind::GSquare => "gsq",
        TestKind::Oracle => "oracle",
    }
}

fn schedule(per_sweep: bool) -> OrientSchedule {
    if per_sweep {
        OrientSchedule::PerSweep
    } else {
        OrientSchedule::PerIteration
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let params = a.model.params();
    let w = a.window.unwrap_or(a.model.tau);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for seed in parse_list(&a.seeds)? {
        let model = sample_model(seed, &params)?;
        let mut series = simulate(&model, a.model.t, simulation_seed(seed))?;
        if a.binary {
            series = binarize(&series);
        }
        let truth = unrolled_ground_truth(&model, w)?;
        let names = VarNames::new(series.names().to_vec());
        let stem = format!("seed{seed}");
        io::write_atomic(&a.out.join(format!("{stem}.csv")), &io::series_to_csv(&series)?)?;
        io::write_atomic(&a.out.join(format!("{stem}.model.txt")), &model.to_text())?;
        io::write_atomic(
            &a.out.join(format!("{stem}.truth.txt")),
            &truth.pag.to_text_representatives(&names),
        )?;
    }
    Ok(())
}

fn cmd_discover(a: &DiscoverArgs) -> Result<()> {
    let series = io::read_series(&a.input)?;
    let n = series.n_vars();
    let names = VarNames::new(series.names().to_vec());
    let mut config = DiscoveryConfig::new(n, a.window).with_policy(policy(a.order, a.rng_seed));
    config.alpha = a.alpha;
    config.max_r = a.max_r;
    config.orient = schedule(a.orient_per_sweep);

    let (pag, run) = match a.test {
        TestArg::Parcorr => {
            let data = window_embed(&series, a.window)?;
            ts_icd(&config, &FisherZ::new(&data, a.alpha))?
        }
        TestArg::Gsq => {
            let cat = series.to_categorical().context("the G-square test needs integer-coded columns")?;
            let data = window_embed(&cat, a.window)?;
            ts_icd(&config, &GSquare::new(&data, a.alpha))?
        }
        TestArg::Oracle => {
            let path = a.model.as_deref().expect("clap enforces --model with the oracle");
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let model = SvarModel::from_text(&text)?;
            if model.observed_vars().len() != n {
                bail!("model has {} observed variables, input has {n}", model.observed_vars().len());
            }
            let truth = unrolled_ground_truth(&model, a.window)?;
            let oracle: Box<dyn CiTest> = Box::new(OracleTest::new(truth.mag, n)?);
            ts_icd(&config, &oracle)?
        }
    };

    let graph_text = pag.to_text_representatives(&names);
    let mut rep = Report::default();
    rep.put("command", "discover")
        .put("input", a.input.display())
        .put("variables", n)
        .put("rows", series.len())
        .put("window", a.window)
        .put("test", test_label(a.test.into()))
        .put("alpha", a.alpha)
        .put("order", policy_label(config.policy))
        .put("edges", pag.minimal_edge_set().len())
        .put("iterations", run.iterations)
        .put("total_ci", run.total_ci);
    for (k, c) in run.ci_histogram.iter().enumerate() {
        rep.put(format!("ci_size_{k}"), c);
    }
    rep.put("conflicts", run.conflicts.len());
    for c in &run.conflicts {
        rep.put(
            "conflict",
            format!(
                "{:?} at {} on {}-{}: kept {:?} over {:?}",
                c.rule,
                names.node_label(c.at),
                names.node_label(c.at),
                names.node_label(c.other),
                c.existing,
                c.proposed
            ),
        );
    }
    rep.put("runtime_secs", format!("{:.6}", run.runtime_secs));
    let json = json!({
        "command": "discover",
        "variables": names_vec(&names),
        "window": a.window,
        "alpha": a.alpha,
        "order": policy_label(config.policy),
        "edges": graph_text.lines().collect::<Vec<_>>(),
        "run": serde_json::to_value(&run)?,
    });
    io::emit(a.graph.as_deref(), &graph_text)?;
    io::emit(a.report.as_deref(), &rep.render(&json))?;
    Ok(())
}

fn names_vec(names: &VarNames) -> Vec<String> {
    (0..names.len()).map(|i| names.name(i).to_string()).collect()
}

fn cmd_benchmark(a: &BenchmarkArgs) -> Result<()> {
    let test: TestKind = a.test.map_or(if a.binary { TestKind::GSquare } else { TestKind::ParCorr }, Into::into);
    if a.binary && test == TestKind::ParCorr {
        bail!("--binary data needs --test gsq or --test oracle");
    }
    let mut policies: Vec<OrderingPolicy> = a.order.iter().map(|&o| policy(o, a.rng_seed)).collect();
    policies.dedup();
    let cfg = BenchmarkConfig {
        params: a.model.params(),
        t: a.model.t,
        w: a.window.unwrap_or(a.model.tau),
        seeds: benchmark_seeds(a.seeds.as_deref(), a.reps)?,
        binary: a.binary,
        test,
        alpha: a.alpha,
        policies,
        orient: schedule(a.orient_per_sweep),
    };
    let (records, summaries) = run_benchmark(&cfg)?;

    if let Some(path) = &a.raw {
        write_raw(path, &records)?;
    }
    let mut rep = Report::default();
    rep.put("command", "benchmark")
        .put("reps", cfg.seeds.len())
        .put("n", cfg.params.n_observed)
        .put("tau", cfg.params.tau)
        .put("window", cfg.w)
        .put("t", cfg.t)
        .put("test", test_label(test))
        .put("binary", cfg.binary)
        .put("alpha", cfg.alpha)
        .put("causal_accuracy_denominator", "truth edges");
    for s in &summaries {
        let label = policy_label(s.policy);
        for (name, sp) in [
            ("f1", s.f1),
            ("causal_accuracy", s.causal_accuracy),
            ("precision", s.precision),
            ("recall", s.recall),
            ("fpr", s.fpr),
            ("fnr", s.fnr),
            ("total_ci", s.total_ci),
        ] {
            rep.put(format!("{label}.{name}"), format!("{:.4} (mad {:.4})", sp.median, sp.mad));
        }
    }
    let json = json!({
        "command": "benchmark",
        "config": serde_json::to_value(&cfg)?,
        "summaries": serde_json::to_value(&summaries)?,
    });
    io::emit(a.report.as_deref(), &rep.render(&json))
}

fn write_raw(path: &Path, records: &[tsicd::benchmark::RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "seed", "order", "tp", "fp", "fn", "tn", "f1", "causal_accuracy", "precision", "recall", "fpr", "fnr",
        "total_ci", "conflicts", "runtime_secs",
    ])?;
    for r in records {
        let c = r.confusion;
        w.write_record([
            r.seed.to_string(),
            policy_label(r.policy),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            c.tn.to_string(),
            r.f1.to_string(),
            r.causal_accuracy.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.fpr.to_string(),
            r.fnr.to_string(),
            r.total_ci.to_string(),
            r.conflicts.to_string(),
            format!("{:.6}", r.runtime_secs),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    io::write_atomic(path, &String::from_utf8(bytes)?)
}

fn cmd_bounds(a: &BoundsArgs) -> Result<()> {
    let mode = match a.mode {
        ModeArg::Rounded => BinomialMode::Rounded,
        ModeArg::Gamma => BinomialMode::Gamma,
    };
    let mut out = String::from("n\ttau\tr\trho\ticd\ttsicd\n");
    for n in parse_usize_list(&a.n)? {
        for tau in parse_usize_list(&a.tau)? {
            for r in parse_usize_list(&a.r)? {
                let icd = icd_bound(n, tau, r)?;
                for &rho in &a.rho {
                    let ts = tsicd_bound(n, tau, r, rho, mode)?;
                    out.push_str(&format!("{n}\t{tau}\t{r}\t{rho}\t{icd}\t{ts:.1}\n"));
                }
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Discover(a) => cmd_discover(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
