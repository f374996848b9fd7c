use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use kremoval::ensemble::{run_ensemble_with, EnsembleOptions, Exec};
use kremoval::identity::{run_suite, SuiteConfig};
use kremoval::process::{Process, RunConfig};
use kremoval::tail_bounds::horizon_union_bound;
use kremoval::trajectory::{curves, i0_p0, write_curves_csv, TrajectoryParams};

#[derive(Parser)]
#[command(name = "kremoval", version, about = "Random K_k-removal process: simulate, sweep, verify, tabulate")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One trial: trace (CSV or JSON) plus a JSON summary.
    Run(RunArgs),
    /// Trials over a grid of n; writes the ensemble report.
    Sweep(SweepArgs),
    /// Exact identity suites; exit code 1 on any failure.
    Verify(VerifyArgs),
    /// Trajectories and envelopes on a grid of p.
    Curves(CurveArgs),
    /// Union-bound tables at the tracking horizon.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Shared {
    /// JSON file mirroring RunConfig; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Steps between checkpoints.
    #[arg(long)]
    stride: Option<u64>,
    /// Panel size for every m.
    #[arg(long)]
    panel: Option<usize>,
    /// Stop once the edge density reaches this value.
    #[arg(long = "p-floor")]
    p_floor: Option<f64>,
    /// Thin K_n to this density first (approximation mode).
    #[arg(long = "start-density")]
    start_density: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Clone, Default)]
struct Envelope {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long)]
    gamma3: Option<f64>,
    #[arg(long)]
    gamma4: Option<f64>,
    #[arg(long)]
    gamma5: Option<f64>,
    #[arg(long)]
    gamma6: Option<f64>,
    #[arg(long)]
    gamma7: Option<f64>,
}

impl Envelope {
    fn gammas(&self) -> BTreeMap<usize, f64> {
        [self.gamma2, self.gamma3, self.gamma4, self.gamma5, self.gamma6, self.gamma7]
            .into_iter()
            .enumerate()
            .filter_map(|(j, g)| g.map(|g| (j + 2, g)))
            .collect()
    }

    fn params(&self, k: usize, n: usize, p_floor: Option<f64>) -> Result<TrajectoryParams> {
        let mut p = TrajectoryParams::defaults(k, n)?;
        if let Some(l) = self.lambda {
            p.lambda = l;
        }
        if let Some(m) = self.mu {
            p.mu = m;
        }
        for (m, g) in self.gammas() {
            if m < k {
                p.gamma.insert(m, g);
            }
        }
        if let Some(f) = p_floor {
            p.p_floor = f;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    shared: Shared,
    /// Exact min/max of R over all m-sets at each checkpoint (n <= 60).
    #[arg(long = "full-extremes")]
    full_extremes: bool,
    /// Where to write the JSON summary; stdout when --out is set, else stderr.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Dump the final graph as sorted "u v" lines.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated list of n.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    envelope: Envelope,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "max-n", default_value_t = 10)]
    max_n: usize,
    /// Comma-separated clique orders.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3, 4, 5])]
    k: Vec<usize>,
    #[arg(long = "destroying-max-n", default_value_t = 8)]
    destroying_max_n: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long = "p-floor")]
    p_floor: Option<f64>,
    #[command(flatten)]
    envelope: Envelope,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ReportArgs {
    /// Comma-separated list of n.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10_000, 100_000, 1_000_000, 10_000_000, 100_000_000])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Constant multiplying every exponent in the union bound.
    #[arg(long = "constant-c", default_value_t = 1.0)]
    constant_c: f64,
    #[command(flatten)]
    envelope: Envelope,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Builds a RunConfig from the config file (if any) with flags laid over it.
fn run_config(shared: &Shared, n: Option<usize>, full_extremes: bool) -> Result<RunConfig> {
    let mut obj: Map<String, Value> = match &shared.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            match serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))? {
                Value::Object(m) => m,
                _ => bail!("{} must hold a JSON object", path.display()),
            }
        }
        None => Map::new(),
    };
    let mut set = |key: &str, v: Value| {
        obj.insert(key.to_string(), v);
    };
    if let Some(n) = n {
        set("n", json!(n));
    }
    if let Some(k) = shared.k {
        set("k", json!(k));
    }
    if let Some(s) = shared.seed {
        set("seed", json!(s));
    }
    if let Some(s) = shared.stride {
        set("checkpoint_stride", json!(s));
    }
    if let Some(f) = shared.p_floor {
        set("stop", json!({"rule": "at_p_floor", "p_floor": f}));
    }
    if let Some(d) = shared.start_density {
        set("start_density", json!(d));
    }
    if full_extremes {
        set("record_full_extremes", json!(true));
    }
    if !obj.contains_key("n") {
        obj.insert("n".into(), json!(0));
    }
    if !obj.contains_key("k") {
        bail!("--k is required (flag or config file)");
    }
    let mut cfg: RunConfig = serde_json::from_value(Value::Object(obj)).context("invalid run configuration")?;
    if let Some(size) = shared.panel {
        cfg = cfg.with_panel_size(size);
    }
    Ok(cfg)
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let cfg = run_config(&a.shared, a.n, a.full_extremes)?;
    if cfg.n == 0 {
        bail!("--n is required (flag or config file)");
    }
    let mut p = Process::new(cfg)?;
    while p.step()?.is_some() {}
    let edges = p.graph().to_edge_list();
    let trace = p.finish();
    let format = a.shared.format.unwrap_or(Format::Csv);
    let mut out = sink(a.shared.out.as_deref())?;
    match format {
        Format::Csv => trace.write_csv(&mut out)?,
        Format::Json => writeln!(out, "{}", trace.to_json())?,
    }
    out.flush()?;
    let summary = serde_json::to_string_pretty(&trace.summary())?;
    match (&a.summary, &a.shared.out) {
        (Some(path), _) => std::fs::write(path, summary + "\n")?,
        (None, Some(_)) => writeln!(io::stdout(), "{summary}")?,
        (None, None) => eprintln!("{summary}"),
    }
    if let Some(path) = &a.edges {
        std::fs::write(path, edges)?;
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let template = run_config(&a.shared, a.n.first().copied(), false)?;
    let grid: Vec<RunConfig> = a.n.iter().map(|&n| RunConfig { n, ..template.clone() }).collect();
    let mut opts = EnsembleOptions {
        exec: if a.sequential { Exec::Sequential } else { Exec::Parallel },
        ..EnsembleOptions::default()
    };
    if let Some(l) = a.envelope.lambda {
        opts.lambda = l;
    }
    if let Some(m) = a.envelope.mu {
        opts.mu = m;
    }
    opts.gamma = a.envelope.gammas();
    if let Some(f) = a.shared.p_floor {
        opts.p_floor = f;
    }
    let report = run_ensemble_with(&grid, a.trials, a.shared.seed.unwrap_or(0), &opts)?;
    let mut out = sink(a.shared.out.as_deref())?;
    match a.shared.format.unwrap_or(Format::Json) {
        Format::Json => writeln!(out, "{}", report.to_json())?,
        Format::Csv => {
            writeln!(out, "n,k,trial,seed,M,final_edges,edges_at_stop,steps,max_step_drop_q,invariant_violations,error")?;
            for g in &report.groups {
                for r in &g.records {
                    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
                    match &r.summary {
                        Some(s) => writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{},{},",
                            g.n,
                            g.k,
                            r.trial,
                            r.seed,
                            opt(s.hitting_time),
                            opt(s.final_edges),
                            s.edges_at_stop,
                            s.steps,
                            s.max_step_drop_q,
                            s.invariant_violations
                        )?,
                        None => writeln!(
                            out,
                            "{},{},{},{},,,,,,,\"{}\"",
                            g.n,
                            g.k,
                            r.trial,
                            r.seed,
                            r.error.as_deref().unwrap_or("").replace('"', "'")
                        )?,
                    }
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let cfg = SuiteConfig {
        max_n: a.max_n,
        orders: a.k,
        destroying_max_n: a.destroying_max_n,
        seed: a.seed,
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg)?;
    let mut out = sink(a.out.as_deref())?;
    writeln!(out, "{}", report.to_json())?;
    out.flush()?;
    for r in &report.identities {
        eprintln!("{:<28} {:>9} checks  {}", r.name, r.checks, if r.failures == 0 { "ok" } else { "FAILED" });
    }
    Ok(report.passed)
}

fn cmd_curves(a: CurveArgs) -> Result<()> {
    let params = a.envelope.params(a.k, a.n, a.p_floor)?;
    let rows = curves(&params, a.points)?;
    let mut out = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => write_curves_csv(&params, &rows, &mut out)?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&json!({"params": params, "rows": rows}))?)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut tables = Vec::new();
    for &n in &a.n {
        let params = a.envelope.params(a.k, n, None)?;
        tables.push((i0_p0(&params), horizon_union_bound(&params, a.constant_c)?));
    }
    let mut out = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            writeln!(out, "n,k,p0,p0_vacuous,sigma,constant_c,m,xi,exponent_arg,ln_term,theta_exponent,ln_total,increasing_in_m")?;
            for (_, u) in &tables {
                for t in &u.terms {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        u.n,
                        u.k,
                        u.p0,
                        u.p0_vacuous,
                        u.sigma,
                        u.constant_c,
                        t.m,
                        t.xi,
                        t.exponent_arg,
                        t.ln_term,
                        t.theta_exponent,
                        u.ln_total,
                        u.increasing_in_m
                    )?;
                }
            }
        }
        Format::Json => {
            let v: Vec<Value> = tables.iter().map(|(h, u)| json!({"horizon": h, "union_bound": u})).collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(a) => cmd_run(a).map(|_| true),
        Cmd::Sweep(a) => cmd_sweep(a).map(|_| true),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Curves(a) => cmd_curves(a).map(|_| true),
        Cmd::Report(a) => cmd_report(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // `kremoval run ... | head` closes the pipe early
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
