use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use multibump::config::RunConfig;
use multibump::io::write_outputs;
use multibump::pipeline::{run_pipeline, verify_field_file, Mode};
use multibump::report::RunReport;

/// Multi-bump solutions of -div(a grad u) = f(u) on domains where the weight `a` vanishes.
///
/// Exit status: 0 when every check passes, 1 when a hypothesis or a
/// verification check fails, 2 on errors.
#[derive(Parser, Debug)]
#[command(name = "multibump", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Largest number of components to enumerate subsets of.
    #[arg(long, global = true)]
    max_chi: Option<usize>,
    /// Grid nodes per axis, overriding `grid.resolution`.
    #[arg(short = 'n', long, global = true)]
    resolution: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the hypotheses without solving.
    Check,
    /// Solve on every component and verify all multi-bump solutions.
    Solve,
    /// Verify a CSV field against the configured problem.
    Verify { field: PathBuf },
    /// Print a stored report.
    Report {
        /// Defaults to `report.json` in the output directory.
        report: Option<PathBuf>,
    },
}

impl Cli {
    fn load_config(&self) -> Result<RunConfig> {
        let path = self.config.as_ref().context("--config is required for this command")?;
        let mut config = RunConfig::load(path)?;
        if let Some(n) = self.resolution {
            config.grid.resolution = n;
        }
        if let Some(m) = self.max_chi {
            config.enumeration.max_chi = m;
        }
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        if let Some(out) = &self.out {
            return Ok(out.clone());
        }
        match &self.config {
            Some(_) => Ok(self.load_config()?.output.dir),
            None => Ok(PathBuf::from("out")),
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Check | Command::Solve => {
            let config = cli.load_config()?;
            let mode = if matches!(cli.command, Command::Check) { Mode::Check } else { Mode::Solve };
            let mut outcome = run_pipeline(&config, mode)?;
            let report_path = write_outputs(&mut outcome, &config.output.dir, config.output.fields, config.output.vtk)?;
            print!("{}", outcome.report.render_text());
            println!("report: {}", report_path.display());
            Ok(outcome.exit_code() as u8)
        }
        Command::Verify { field } => {
            let config = cli.load_config()?;
            let check = verify_field_file(&config, field)?;
            let r = &check.report;
            println!("residual    {:.3e}  (tolerance {:.3e})", r.residual_norm, check.residual_tol);
            println!("range       [{:.6e}, {:.6e}]  (allowed slack {:.1e})", r.min_u, r.max_u, check.bound);
            println!("zero trace  {:.3e}", r.zero_trace_max);
            println!("W^1,1       {:.6e}", r.w11_seminorm);
            println!("result: {}", if r.passed() { "PASS" } else { "FAIL" });
            Ok(if r.passed() { 0 } else { 1 })
        }
        Command::Report { report } => {
            let path = match report {
                Some(p) => p.clone(),
                None => cli.out_dir()?.join("report.json"),
            };
            let report = RunReport::load(&path)?;
            print!("{}", report.render_text());
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
