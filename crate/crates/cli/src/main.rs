mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::{parse_grid, FileConfig};
use randhankel::asympt::{kernel_c_quad, kernel_value, ldp_rate, moderate_rate};
use randhankel::harness::{self, ExperimentConfig, ExperimentKind};
use randhankel::hankelproc::{cumulant_bound_check, exact_group_cumulants, sample_paths, ProcessParams};
use randhankel::specfun::inequalities::DEFAULT_SLACK;

#[derive(Parser)]
#[command(name = "randhankel", version, about = "Random block Hankel determinants of uniform matrix moments")]
struct Cli {
    /// One JSON record per line instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// key = value file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Limit covariance kernel, closed form next to quadrature.
    #[command(allow_negative_numbers = true)]
    Kernel {
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        t2: Option<f64>,
        #[arg(long)]
        s1: Option<f64>,
        #[arg(long)]
        s2: Option<f64>,
    },
    /// Exact cumulants of H_n(s, t) with bound checks.
    #[command(allow_negative_numbers = true)]
    Cumulants {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        max_order: Option<usize>,
    },
    /// Sample paths on a grid and write them as CSV.
    #[command(allow_negative_numbers = true)]
    Sample {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        /// Comma-separated s:t points, e.g. 0.5:1,1:1.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance experiment; exit code 0 iff it passes.
    Verify {
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the experiment's replication count.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also write the JSONL report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moderate- or large-deviation rate.
    #[command(allow_negative_numbers = true)]
    Rate {
        #[arg(long, value_enum)]
        kind: Option<RateKind>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RateKind {
    Moderate,
    Ldp,
}

impl std::str::FromStr for RateKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, false)
    }
}

enum Failure {
    Usage(String),
    Check,
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Usage(s)
    }
}

impl From<randhankel::Error> for Failure {
    fn from(e: randhankel::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Outcome {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Kernel { t1, t2, s1, s2 } => {
            let (t1, t2) = (file.require(t1, "t1")?, file.require(t2, "t2")?);
            let (s1, s2) = (file.pick(s1, "s1", 1.0)?, file.pick(s2, "s2", 1.0)?);
            let k = kernel_value(s1, t1, s2, t2)?;
            let q = kernel_c_quad(t1, t2)?;
            if cli.json {
                let rec = json!({"t1": t1, "t2": t2, "s1": s1, "s2": s2, "c": k.c, "c_quadrature": q, "limit_cov": k.limit_cov});
                writeln!(out, "{rec}")?;
            } else {
                writeln!(out, "c(t1={t1}, t2={t2})  closed form {:.10}  quadrature {:.10}", k.c, q)?;
                writeln!(out, "limit covariance (s1={s1}, s2={s2})  {:.10}", k.limit_cov)?;
            }
        }
        Command::Cumulants { n, p, s, t, max_order } => {
            let params = ProcessParams::unit(file.require(n, "n")?, file.require(p, "p")?)?;
            let (s, t) = (file.pick(s, "s", 1.0)?, file.pick(t, "t", 1.0)?);
            let max_order = file.pick(max_order, "max-order", 4)?;
            if max_order == 0 {
                return Err(Failure::Usage("--max-order must be >= 1".into()));
            }
            let mut all_pass = true;
            if !cli.json {
                writeln!(out, "{:>5} {:>22} {:>22} {:>22} {:>22} {:>22}  bounds", "order", "kappa", "S", "S'", "T", "T'")?;
            }
            for m in 1..=max_order {
                let g = exact_group_cumulants(m, &params, s, t)?;
                let report = cumulant_bound_check(m, &params, s, t, DEFAULT_SLACK)?;
                let pass = report.all_pass();
                all_pass &= pass;
                if cli.json {
                    let checks: Vec<_> = report
                        .checks
                        .iter()
                        .map(|c| json!({"name": c.name, "value": c.value, "lower": c.lower, "upper": c.upper, "holds": c.holds}))
                        .collect();
                    let rec = json!({
                        "order": m, "kappa": g.total(),
                        "groups": {"S": g.s, "S'": g.s_prime, "T": g.t, "T'": g.t_prime},
                        "bounds_pass": pass, "checks": checks,
                    });
                    writeln!(out, "{rec}")?;
                } else {
                    writeln!(
                        out,
                        "{m:>5} {:>22.15e} {:>22.15e} {:>22.15e} {:>22.15e} {:>22.15e}  {}",
                        g.total(),
                        g.s,
                        g.s_prime,
                        g.t,
                        g.t_prime,
                        if pass { "pass" } else { "FAIL" }
                    )?;
                }
            }
            if !all_pass {
                return Err(Failure::Check);
            }
        }
        Command::Sample { n, p, grid, reps, seed, out: path } => {
            let grid = parse_grid(&file.pick(grid, "grid", "1:1".to_string())?)?;
            let params = ProcessParams::new(file.require(n, "n")?, file.require(p, "p")?, grid.clone())?;
            let reps = file.pick(reps, "reps", 1000)?;
            let seed = file.pick(seed, "seed", harness::DEFAULT_SEED)?;
            let path = path.or(file.get::<PathBuf>("out")?);
            let paths = sample_paths(&params, seed, reps);
            let mut csv = String::from("replication");
            for (s, t) in &grid {
                write!(csv, ",H[{s}:{t}]").expect("string write");
            }
            csv.push('\n');
            for pp in &paths {
                write!(csv, "{}", pp.replication).expect("string write");
                for v in &pp.values {
                    write!(csv, ",{v:.16e}").expect("string write");
                }
                csv.push('\n');
            }
            let redraws: u64 = paths.iter().map(|p| p.redraws).sum();
            match path {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path)?);
                    w.write_all(csv.as_bytes())?;
                    w.flush()?;
                    if cli.json {
                        writeln!(out, "{}", json!({"rows": reps, "out": path.display().to_string(), "seed": seed, "beta_redraws": redraws}))?;
                    } else {
                        writeln!(out, "wrote {reps} replications to {} (seed {seed}, {redraws} beta redraws)", path.display())?;
                    }
                }
                None => out.write_all(csv.as_bytes())?,
            }
        }
        Command::Verify { which, seed, reps, workers, out: path } => {
            let kind = ExperimentKind::parse(&file.require(which, "which")?)?;
            let mut cfg = ExperimentConfig::default_for(kind);
            cfg.seed = file.pick(seed, "seed", cfg.seed)?;
            cfg.reps = file.pick(reps, "reps", cfg.reps)?;
            cfg.workers = workers.or(file.get("workers")?);
            let report = harness::run(&cfg)?;
            let jsonl = report.to_jsonl();
            if let Some(path) = path.or(file.get::<PathBuf>("out")?) {
                std::fs::write(&path, &jsonl)?;
            }
            if cli.json {
                out.write_all(jsonl.as_bytes())?;
            } else {
                writeln!(out, "experiment {} (seed {}, version {})", kind.name(), cfg.seed, report.version)?;
                for r in &report.records {
                    let reference = r.reference.map_or_else(|| "-".to_string(), |x| format!("{x:.8e}"));
                    let extra = match (r.se, r.pvalue) {
                        (Some(se), _) => format!("se {se:.3e}"),
                        (_, Some(pv)) => format!("p {pv:.4}"),
                        _ => String::new(),
                    };
                    let verdict = if matches!(r.rule, harness::Rule::Info) { "info" } else if r.pass { "pass" } else { "FAIL" };
                    writeln!(out, "  {:<48} {:>16.8e} {:>16} {:>14}  {verdict}", r.name, r.empirical, reference, extra)?;
                }
                for note in &report.notes {
                    writeln!(out, "  note: {note}")?;
                }
                let d = &report.diagnostics;
                writeln!(out, "  beta redraws {}, rejected replications {}", d.beta_redraws, d.rejected_replications)?;
                writeln!(out, "overall: {} ({:.2}s)", if report.pass() { "PASS" } else { "FAIL" }, report.wall_time.as_secs_f64())?;
            }
            if !report.pass() {
                return Err(Failure::Check);
            }
        }
        Command::Rate { kind, s, t, x } => {
            let kind = file.require(kind, "kind")?;
            let (s, t, x) = (file.pick(s, "s", 1.0)?, file.pick(t, "t", 1.0)?, file.require(x, "x")?);
            match kind {
                RateKind::Moderate => {
                    let v = moderate_rate(x, s, t)?;
                    if cli.json {
                        writeln!(out, "{}", json!({"kind": "moderate", "s": s, "t": t, "x": x, "rate": v}))?;
                    } else {
                        writeln!(out, "moderate rate at x={x} (s={s}, t={t}): {v:.10}")?;
                    }
                }
                RateKind::Ldp => {
                    let r = ldp_rate(x, s, t)?;
                    if cli.json {
                        let value = if r.value.is_finite() { json!(r.value) } else { json!(r.value.to_string()) };
                        writeln!(out, "{}", json!({"kind": "ldp", "s": s, "t": t, "x": x, "rate": value, "argmax_lambda": r.argmax_lambda}))?;
                    } else {
                        let arg = r.argmax_lambda.map_or_else(|| "none".to_string(), |l| format!("{l:.7}"));
                        writeln!(out, "ldp rate at x={x} (s={s}, t={t}): {:.10}  maximizer lambda* = {arg}", r.value)?;
                    }
                }
            }
        }
    }
    Ok(())
}
