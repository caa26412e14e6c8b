use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use skydeploy::extraction::{extract_footprints, ExtractionConfig, Georef, RasterImage};
use skydeploy::geometry::Point2;
use skydeploy::polyfile::write_footprints;
use skydeploy::scenario::{
    records_to_bytes, run_scenario, run_sweep, summarize, summary_to_bytes, Format, RunRecord,
    RunStatus, ScenarioConfig, ScenarioKind, SweepParam, SweepSpec,
};

/// Drone base-station placement over 3D building obstacles.
#[derive(Parser)]
#[command(name = "skydeploy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Deploy(DeployArgs),
    /// Run a parameter sweep with replicated seeds.
    Sweep(SweepArgs),
    /// Trace building footprints from a map-view raster.
    Extract(ExtractArgs),
}

#[derive(Args)]
struct Output {
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Fill the wall_ms column; output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct DeployArgs {
    /// Scenario config (JSON). Missing fields take their defaults.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// sinr-threshold, drones, building-count or users.
    #[arg(long)]
    param: SweepParam,
    /// Comma-separated values, e.g. 2,4,6,8.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write per-value mean and standard deviation here.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExtractArgs {
    /// PNG or PPM map image.
    #[arg(long)]
    image: PathBuf,
    /// Meters per pixel.
    #[arg(long, allow_negative_numbers = true)]
    scale: f64,
    /// World coordinate of the image's top-left corner as `x,y`. Defaults
    /// to `0,H` so the map covers the positive quadrant.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    origin: Option<Vec<f64>>,
    /// Extraction settings (JSON); missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output polygon file (GeoJSON).
    #[arg(long)]
    out: PathBuf,
}

/// Failures the exit code distinguishes.
enum Failure {
    Config(anyhow::Error),
    Infeasible,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<skydeploy::Error> for Failure {
    fn from(e: skydeploy::Error) -> Self {
        Failure::Config(e.into())
    }
}

fn load_config(
    path: &Path,
    scenario: Option<ScenarioKind>,
    seed: Option<u64>,
) -> Result<ScenarioConfig> {
    let mut cfg =
        ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit(records: &[RunRecord], output: &Output) -> Result<()> {
    let bytes = records_to_bytes(records, output.format, output.timing)?;
    match &output.out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout()
            .write_all(&bytes)
            .context("writing stdout"),
    }
}

fn all_infeasible(records: &[RunRecord]) -> bool {
    records.iter().all(|r| r.status == RunStatus::Infeasible)
}

fn deploy(args: DeployArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config, args.scenario, args.seed)?;
    let report = run_scenario(&cfg).context("running scenario")?;
    let records = [report.record];
    emit(&records, &args.output)?;
    if all_infeasible(&records) {
        return Err(Failure::Infeasible);
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config, args.scenario, args.seed)?;
    let spec = SweepSpec {
        param: args.param,
        values: args.values,
        replications: args.reps,
    };
    let records = run_sweep(&cfg, &spec).context("running sweep")?;
    emit(&records, &args.output)?;
    if let Some(p) = &args.summary {
        let bytes = summary_to_bytes(&summarize(&records), args.output.format)?;
        std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?;
    }
    if all_infeasible(&records) {
        return Err(Failure::Infeasible);
    }
    Ok(())
}

fn extract(args: ExtractArgs) -> Result<(), Failure> {
    let cfg = match &args.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<ExtractionConfig>(&text)
                .with_context(|| format!("parsing {}", p.display()))?
        }
        None => ExtractionConfig::default(),
    };
    // placeholder georef until the image height is known
    let probe = Georef::new(args.scale, Point2::new(0.0, 0.0)).context("invalid --scale")?;
    let mut image = RasterImage::load(&args.image, probe)?;
    let origin = match args.origin.as_deref() {
        Some([x, y]) => Point2::new(*x, *y),
        Some(_) => return Err(anyhow::anyhow!("--origin takes x,y").into()),
        None => Point2::new(0.0, image.height() as f64 * args.scale),
    };
    image.georef = Georef::new(args.scale, origin).context("invalid georeference")?;
    let result = extract_footprints(&image, &cfg)?;
    write_footprints(&args.out, &result.polygons, None)?;
    eprintln!(
        "{} footprints written to {} ({} fragments discarded)",
        result.polygons.len(),
        args.out.display(),
        result.discarded.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Deploy(a) => deploy(a),
        Command::Sweep(a) => sweep(a),
        Command::Extract(a) => extract(a),
    }
}

fn main() -> ExitCode {
    // usage errors count as config errors; 2 is reserved for infeasible runs
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible) => {
            eprintln!("no feasible run");
            ExitCode::from(2)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
