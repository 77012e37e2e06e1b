use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sgmlab::config::{ExperimentConfig, Mode};
use sgmlab::error::{exit, LabError};
use sgmlab::experiment::run_experiment;
use sgmlab::resolve_output_dir;
use sgmlab::sweep::{replay, sweep, DEFAULT_ALPHAS};

#[derive(Parser)]
#[command(
    name = "sgmlab",
    version,
    about = "Surface growth and modified Navier-Stokes experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Replace an existing output directory that holds a previous manifest.
    #[arg(long)]
    force: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configuration as written.
    Run(Common),
    /// Run the configuration at every alpha of a grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated alphas; fractions such as 5/3 are accepted.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHAS.map(String::from))]
        alphas: Vec<String>,
    },
    /// Regularity-monitor scan over the configured solver run.
    Scan(Common),
    /// Inequality suite over the configured solver template.
    Check(Common),
    /// Rerun a recorded manifest and compare every CSV table.
    Replay {
        /// Directory holding manifest.json, or the manifest itself.
        recorded: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        force: bool,
        /// Defaults to `<recorded>-replay`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common, mode: Option<Mode>) -> Result<(ExperimentConfig, PathBuf), LabError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(m) = mode {
        cfg.mode = m;
        cfg.validate()?;
    }
    let env = std::env::var_os("SGMLAB_OUT").map(PathBuf::from);
    let out = resolve_output_dir(common.out.as_deref(), &cfg, &common.config, env.as_deref());
    Ok((cfg, out))
}

fn single(common: &Common, mode: Option<Mode>) -> Result<u8, LabError> {
    let (cfg, out) = load(common, mode)?;
    let o = run_experiment(&cfg, &out, common.force)?;
    report(&o.dir, o.exit_code, o.manifest.error.as_deref());
    Ok(o.exit_code)
}

fn report(dir: &Path, code: u8, error: Option<&str>) {
    match error {
        Some(e) => eprintln!("{}: {e}", dir.display()),
        None if code == exit::OK => println!("{}", dir.display()),
        None => eprintln!("{}: finished with exit code {code}", dir.display()),
    }
}

fn dispatch(cmd: &Command) -> Result<u8, LabError> {
    match cmd {
        Command::Run(c) => single(c, None),
        Command::Scan(c) => single(c, Some(Mode::Scan)),
        Command::Check(c) => single(c, Some(Mode::Inequalities)),
        Command::Sweep { common, alphas } => {
            let (cfg, out) = load(common, None)?;
            let o = sweep(&cfg, alphas, &out, common.force)?;
            for item in &o.items {
                if let Some(e) = &item.manifest.error {
                    eprintln!("{}: {e}", item.dir.display());
                }
            }
            report(&o.dir, o.exit_code, None);
            Ok(o.exit_code)
        }
        Command::Replay {
            recorded,
            out,
            force,
            ..
        } => {
            let out = out.clone().unwrap_or_else(|| {
                let mut s = recorded.as_os_str().to_owned();
                s.push("-replay");
                PathBuf::from(s)
            });
            let o = replay(recorded, &out, *force)?;
            for d in &o.mismatches {
                eprintln!(
                    "mismatch {}: recorded {} replayed {}",
                    d.path,
                    d.recorded.as_deref().unwrap_or("-"),
                    d.replayed.as_deref().unwrap_or("-")
                );
            }
            println!(
                "{}: {} tables compared, {} differ",
                o.dir.display(),
                o.compared,
                o.mismatches.len()
            );
            Ok(o.exit_code())
        }
    }
}

fn jobs(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Run(c) | Command::Scan(c) | Command::Check(c) => c.jobs,
        Command::Sweep { common, .. } => common.jobs,
        Command::Replay { jobs, .. } => *jobs,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs(&cli.command) {
        pool = pool.num_threads(n.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(exit::CONFIG);
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
