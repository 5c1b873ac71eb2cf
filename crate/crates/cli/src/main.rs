use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use apdiff_cli::config::LoadedConfig;
use apdiff_cli::norms::{compute_norms, load_poly, norms_csv, NormsRequest};
use apdiff_cli::run::{run_experiment, run_many};
use apdiff_cli::verify::{check_names, run_suite, SuiteOptions, DEFAULT_SEED, SUITE_BUDGET_S};
use apdiff_cli::CliError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "apdiff", version, about = "Almost-periodic diffeomorphism toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments described by JSON config files.
    Run {
        /// Config file; repeat to run several configs on the worker pool,
        /// each into its own subdirectory of --out.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        /// Output directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite.
    Verify {
        /// Comma-separated check names.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write the report as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        /// List the check names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Norm estimates for a polynomial stored as JSON.
    Norms {
        #[arg(long)]
        input: PathBuf,
        /// Order of the C^m norm; repeatable.
        #[arg(long)]
        m: Vec<f64>,
        /// Hölder exponent of the seminorm; repeatable.
        #[arg(long)]
        gamma: Vec<f64>,
        /// Torus grid points per axis.
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        /// Use `count` uniform offsets instead of dyadic ones.
        #[arg(long)]
        uniform: Option<usize>,
        /// Add the little-Hölder profile for each gamma.
        #[arg(long)]
        profile: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    if let CliError::Solver {
        checkpoint: Some(p), ..
    } = e
    {
        eprintln!("last good state written to {}", p.display());
    }
    ExitCode::from(e.exit_code() as u8)
}

fn cmd_run(configs: Vec<PathBuf>, out: Option<PathBuf>) -> Result<(), CliError> {
    let loaded = configs
        .iter()
        .map(|p| LoadedConfig::from_path(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    if loaded.len() == 1 {
        let cfg = &loaded[0];
        let dir = out
            .or_else(|| cfg.config.output_dir.as_ref().map(|d| cfg.resolve(d)))
            .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))?;
        let summary = run_experiment(cfg, &dir)?;
        for w in &summary.warnings {
            eprintln!("warning: {w}");
        }
        println!("{} run finished in {:.2}s -> {}", summary.manifest.experiment, summary.manifest.wall_time_s, dir.display());
        return Ok(());
    }
    let out = out.ok_or_else(|| CliError::Config("several configs need --out".into()))?;
    let named: Vec<(String, LoadedConfig)> = configs
        .iter()
        .zip(loaded)
        .map(|(p, c)| (p.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()), c))
        .collect();
    let mut worst: Option<CliError> = None;
    for (name, res) in run_many(&named, &out) {
        match res {
            Ok(s) => {
                for w in &s.warnings {
                    eprintln!("warning: {name}: {w}");
                }
                println!("{name}: ok ({:.2}s)", s.manifest.wall_time_s);
            }
            Err(e) => {
                println!("{name}: {e}");
                if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                    worst = Some(e);
                }
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn cmd_verify(only: Option<String>, seed: u64, report: Option<PathBuf>) -> Result<(), CliError> {
    let start = Instant::now();
    let r = run_suite(&SuiteOptions { only, seed })?;
    for line in r.lines() {
        println!("{line}");
    }
    let total = start.elapsed().as_secs_f64();
    println!(
        "{} of {} checks passed in {total:.1}s (target {SUITE_BUDGET_S}s), seed {seed}",
        r.checks.len() - r.failed(),
        r.checks.len()
    );
    if let Some(path) = report {
        std::fs::write(&path, r.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    if r.passed() {
        Ok(())
    } else {
        Err(CliError::Verification { failed: r.failed() })
    }
}

fn cmd_norms(input: PathBuf, req: NormsRequest, out: PathBuf) -> Result<(), CliError> {
    let f = load_poly(&input)?;
    let rows = compute_norms(&f, &req)?;
    let csv = norms_csv(&rows);
    std::fs::write(&out, &csv).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    print!("{csv}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(config, out),
        Command::Verify { list: true, .. } => {
            check_names().iter().for_each(|n| println!("{n}"));
            Ok(())
        }
        Command::Verify { only, seed, report, .. } => cmd_verify(only, seed, report),
        Command::Norms {
            input,
            m,
            gamma,
            grid,
            uniform,
            profile,
            out,
        } => cmd_norms(
            input,
            NormsRequest {
                m,
                gamma,
                grid,
                uniform_offsets: uniform,
                profile,
            },
            out,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
