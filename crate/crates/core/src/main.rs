use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use axiflow::runner::{
    check_invariants, export_plotdata, run_single, run_sweep, InitialShape, RunConfig, RunnerError, SweepConfig,
    OUT_ENV,
};
use axiflow::FlowParams;

/// Contraction of convex axially symmetric surfaces by κ_rad^α1 · κ_axi^α2.
///
/// Configuration files are JSON; `run --dump-config` prints every setting
/// with its default. Flags override the file. The output directory is taken
/// from --out, then from the AXIFLOW_OUT environment variable, then from the
/// file.
#[derive(Parser)]
#[command(name = "axiflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write series.csv, snapshots.jsonl and summary.json.
    Run(RunArgs),
    /// Run every (alpha1, alpha2) cell of a grid and write sweep.csv.
    Sweep(SweepArgs),
    /// Write plot-ready columns next to the artifacts of a finished run.
    Export(DirArgs),
    /// Re-check the invariants of a finished run from its artifacts.
    CheckInvariants(DirArgs),
}

#[derive(Args)]
struct Overrides {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial body: sphere:R[,CENTER], spheroid:AXIAL,EQUATORIAL[,CENTER] or profile:PATH[,LINE].
    #[arg(long)]
    initial: Option<String>,
    /// Uniform graph nodes (at least 50; default 400).
    #[arg(long)]
    nodes: Option<usize>,
    /// Fraction of the stable step (in (0, 1]; default 0.8).
    #[arg(long)]
    cfl: Option<f64>,
    /// Stop below this diameter (default 1% of the initial diameter).
    #[arg(long)]
    stop_diameter: Option<f64>,
    /// Stop below this volume (default 1e-6 of the initial volume).
    #[arg(long)]
    stop_volume: Option<f64>,
    /// Stop at this time (default ten times the extinction time of the smallest enclosing sphere).
    #[arg(long)]
    t_max: Option<f64>,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Overrides,
    /// Exponent of the radial curvature (default 1).
    #[arg(long)]
    alpha1: Option<f64>,
    /// Exponent of the axial curvature (default 1).
    #[arg(long)]
    alpha2: Option<f64>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Overrides,
    /// Comma-separated grid of alpha1 values.
    #[arg(long, value_delimiter = ',')]
    alpha1: Vec<f64>,
    /// Comma-separated grid of alpha2 values.
    #[arg(long, value_delimiter = ',')]
    alpha2: Vec<f64>,
    /// Worker threads (default 1).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct DirArgs {
    /// Run directory.
    #[arg(long, env = OUT_ENV, default_value = "out")]
    out: PathBuf,
}

fn parse_numbers(spec: &str, what: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in --initial {what}")))
        .collect()
}

fn parse_initial(spec: &str) -> Result<InitialShape> {
    let (kind, rest) = spec
        .split_once(':')
        .with_context(|| format!("--initial {spec:?}: expected KIND:ARGS"))?;
    match kind {
        "sphere" => match parse_numbers(rest, kind)?[..] {
            [radius] => Ok(InitialShape::Sphere { radius, center: 0.0 }),
            [radius, center] => Ok(InitialShape::Sphere { radius, center }),
            _ => bail!("--initial sphere takes R[,CENTER]"),
        },
        "spheroid" => match parse_numbers(rest, kind)?[..] {
            [axial, equatorial] => Ok(InitialShape::Spheroid {
                axial,
                equatorial,
                center: 0.0,
            }),
            [axial, equatorial, center] => Ok(InitialShape::Spheroid {
                axial,
                equatorial,
                center,
            }),
            _ => bail!("--initial spheroid takes AXIAL,EQUATORIAL[,CENTER]"),
        },
        "profile" => {
            let (path, line) = match rest.rsplit_once(',') {
                Some((p, l)) if l.trim().parse::<usize>().is_ok() => (p, l.trim().parse()?),
                _ => (rest, 0),
            };
            Ok(InitialShape::Profile {
                path: PathBuf::from(path),
                line,
            })
        }
        _ => bail!("--initial kind must be sphere, spheroid or profile, got {kind:?}"),
    }
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(s) = &self.initial {
            cfg.initial = parse_initial(s)?;
        }
        if let Some(n) = self.nodes {
            cfg.nodes = n;
        }
        if let Some(c) = self.cfl {
            cfg.cfl = c;
        }
        if let Some(d) = self.stop_diameter {
            cfg.stop.diameter_floor = Some(d);
        }
        if let Some(v) = self.stop_volume {
            cfg.stop.volume_floor = Some(v);
        }
        if let Some(t) = self.t_max {
            cfg.stop.t_max = Some(t);
        }
        Ok(())
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut cfg = match &args.common.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    args.common.apply(&mut cfg)?;
    if args.alpha1.is_some() || args.alpha2.is_some() {
        cfg.params = FlowParams::new(
            args.alpha1.unwrap_or(cfg.params.alpha1()),
            args.alpha2.unwrap_or(cfg.params.alpha2()),
        )?;
    }
    if let Some(out) = &args.common.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    if args.dump_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(ExitCode::SUCCESS);
    }
    match run_single(&cfg) {
        Ok(s) => {
            let omega = s.extinction.omega.map_or("n/a".to_string(), |w| w.to_string());
            let q = s.extinction.q.map_or("n/a".to_string(), |q| q.to_string());
            println!(
                "{}: stopped by {} at t = {} after {} steps; omega = {omega}, q = {q}",
                cfg.out.display(),
                s.stop_reason.map_or("?", |r| r.as_str()),
                s.final_time,
                s.steps
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ RunnerError::Run(_)) => {
            eprintln!("error: {e}; partial artifacts in {}", cfg.out.display());
            Ok(ExitCode::FAILURE)
        }
        Err(e) => Err(e.into()),
    }
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut cfg = match &args.common.config {
        Some(p) => SweepConfig::from_path(p)?,
        None => SweepConfig::default(),
    };
    args.common.apply(&mut cfg.template)?;
    if !args.alpha1.is_empty() {
        cfg.alpha1 = args.alpha1.clone();
    }
    if !args.alpha2.is_empty() {
        cfg.alpha2 = args.alpha2.clone();
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(out) = &args.common.out {
        cfg.out = out.clone();
    }
    let rows = run_sweep(&cfg)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    println!(
        "{}: {} cells, {failed} failed",
        cfg.out.join("sweep.csv").display(),
        rows.len()
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn export(dir: &Path) -> Result<ExitCode> {
    for path in export_plotdata(dir)? {
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn invariants(dir: &Path) -> Result<ExitCode> {
    let report = check_invariants(dir)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Export(a) => export(&a.out),
        Command::CheckInvariants(a) => invariants(&a.out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
