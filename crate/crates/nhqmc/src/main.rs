use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use nhqmc::config::{Method, RunConfig};
use nhqmc::error::{CliError, Result};
use nhqmc::exec::Pool;
use nhqmc::{fig3, output, run, validate, Overrides};

#[derive(Parser)]
#[command(name = "nhqmc", version, about = "Monte Carlo simulation of non-Hermitian and open-system dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the kernel, quadrature and sample-count plan for a config.
    Plan(Common),
    /// Estimate the observable on the configured time grid and write a CSV.
    Run(Common),
    /// Run the invariant checks.
    Validate(Common),
    /// Run the shipped amplitude-damping Ising preset.
    #[command(name = "reproduce-fig3")]
    ReproduceFig3(Common),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
    /// Emulate `M` ancilla shots per overlap instead of exact readout.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, workers: self.workers, shots: self.shots, method: self.method }
    }

    fn load(&self) -> Result<RunConfig> {
        let path = self.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
        let mut cfg = RunConfig::load(path)?;
        self.overrides().apply(&mut cfg);
        Ok(cfg)
    }
}

fn output_paths(common: &Common, cfg: &RunConfig, default_name: &str) -> Result<(PathBuf, PathBuf)> {
    let dir = common.output.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let name = cfg.output.name.clone().unwrap_or_else(|| default_name.to_string());
    Ok((dir.join(format!("{name}.csv")), dir.join(format!("{name}.svg"))))
}

fn execute(cfg: &RunConfig, common: &Common, default_name: &str) -> Result<Vec<output::ResultRow>> {
    let pool = Pool::new(cfg.workers)?;
    let start = Instant::now();
    let out = run::run(cfg, &pool)?;
    let wall = start.elapsed().as_secs_f64();
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let (csv, svg) = output_paths(common, cfg, default_name)?;
    output::write_csv(&csv, &out.rows)?;
    eprintln!("wrote {} ({} rows, {} workers, wall time {wall:.2} s)", csv.display(), out.rows.len(), pool.workers());
    if common.svg || cfg.output.svg {
        output::svg_from_csv(&csv, &svg)?;
        eprintln!("wrote {}", svg.display());
    }
    match out.flagged() {
        0 => Ok(out.rows),
        n => Err(CliError::Guard(n)),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan(common) => {
            print!("{}", run::plan_report(&common.load()?)?);
            Ok(())
        }
        Command::Run(common) => {
            let cfg = common.load()?;
            let name = common.config.as_deref().map(stem).unwrap_or_default();
            execute(&cfg, &common, &name).map(|_| ())
        }
        Command::Validate(common) => {
            let pool = Pool::new(common.workers.unwrap_or(1))?;
            let start = Instant::now();
            let checks = validate::run_all(&pool);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed in {:.1} s", checks.len() - failed, checks.len(), start.elapsed().as_secs_f64());
            match failed {
                0 => Ok(()),
                n => Err(CliError::Validation(n)),
            }
        }
        Command::ReproduceFig3(common) => {
            let mut cfg = match &common.config {
                Some(_) => common.load()?,
                None => fig3::preset(),
            };
            common.overrides().apply(&mut cfg);
            let rows = execute(&cfg, &common, "fig3")?;
            print!("{}", fig3::report(&fig3::summarize(&rows)));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
