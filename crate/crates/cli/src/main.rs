//! `swlw`: run, convergence, conservation and truncation experiments for the
//! coupled short-wave/long-wave solver.
//!
//! Exit status is 0 on success, 1 on a usage or configuration error and 2
//! when a solver run fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use swlw_core::harness::{self, CommandError, Profile, RowStatus};
use swlw_core::RunDiagnostics;

#[derive(Debug, Parser)]
#[command(name = "swlw", version, about = "Finite-difference experiments for the coupled Schrödinger–KdV system")]
struct Cli {
    /// Directory for CSV output (created if missing).
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    /// Suppress the summary and warnings.
    #[arg(long, global = true)]
    quiet: bool,

    /// Preset horizon and time step, overriding `T` and `tau`.
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    /// T = 1, tau = 1e-3
    Desk,
    /// T = 5, tau = 1e-4
    Paper,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Paper => Profile::Paper,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One fully discrete run; writes diagnostics and, for an exact wave, errors.
    Run { config: PathBuf },
    /// Relative errors of the exact wave across several meshes.
    Converge {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        meshes: Vec<usize>,
    },
    /// RK4 reference and fully discrete scheme side by side.
    Conserve { config: PathBuf },
    /// Untruncated run against each truncation level.
    Truncate {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swlw: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CommandError> {
    let config = match &cli.command {
        Command::Run { config } | Command::Converge { config, .. } => config,
        Command::Conserve { config } | Command::Truncate { config, .. } => config,
    };
    let cfg = harness::load_config(config, cli.profile.map(Profile::from))?;
    std::fs::create_dir_all(&cli.output_dir)
        .map_err(|e| swlw_core::Error::Io(format!("{}: {e}", cli.output_dir.display())))?;
    let out = cli.output_dir.as_path();
    let say = |line: String| {
        if !cli.quiet {
            println!("{line}");
        }
    };
    let warn = |line: String| {
        if !cli.quiet {
            eprintln!("warning: {line}");
        }
    };

    match &cli.command {
        Command::Run { .. } => {
            let s = harness::cmd_run(&cfg, out)?;
            s.warnings.iter().for_each(|w| warn(w.to_string()));
            let d = &s.diagnostics;
            say(format!(
                "J = {}, h = {:.6e}, tau = {:e}, reached t = {}",
                cfg.j,
                cfg.h(),
                cfg.solver.tau,
                s.final_state.t
            ));
            say(drift_line("mass", &d.mass));
            say(drift_line("energy", &d.energy));
            say(format!(
                "inner iterations: max {} (u), {} (v)",
                d.iterations.max_u, d.iterations.max_v
            ));
            if let Some((t, e)) = s.errors.last() {
                say(format!("relative error at t = {t}: u {:.6e}, v {:.6e}", e.err_u, e.err_v));
            }
            say(wrote(out, &cfg.outputs.diagnostics));
        }
        Command::Converge { meshes, .. } => {
            let report = harness::cmd_converge(&cfg, meshes, out)?;
            for r in &report.rows {
                say(format!(
                    "J = {:5}  h = {:.4e}  err_u = {:.6e}  err_v = {:.6e}  iters = {}  {}",
                    r.j, r.h, r.err_u, r.err_v, r.max_inner_iters, r.status
                ));
            }
            say(wrote(out, harness::CONVERGENCE_FILE));
            if let Some(r) = report.rows.iter().find(|r| r.status != RowStatus::Ok) {
                return Err(CommandError::Incomplete(format!("mesh J = {}: {}", r.j, r.status)));
            }
        }
        Command::Conserve { .. } => {
            let r = harness::cmd_conserve(&cfg, out)?;
            r.warnings.iter().for_each(|w| warn(w.to_string()));
            say(format!("rk4 (dt = {:e}):", r.rk4_dt));
            say(format!("  {}", drift_line("mass", &r.semi_discrete.mass)));
            say(format!("  {}", drift_line("energy", &r.semi_discrete.energy)));
            say(format!("fully discrete (tau = {:e}):", cfg.solver.tau));
            say(format!("  {}", drift_line("mass", &r.fully_discrete.mass)));
            say(format!("  {}", drift_line("energy", &r.fully_discrete.energy)));
            say(wrote(out, harness::CONSERVATION_FILE));
        }
        Command::Truncate { levels, .. } => {
            let r = harness::cmd_truncate(&cfg, levels, out)?;
            say(format!("untruncated max |v| = {:.6e}", r.untruncated_v_sup));
            for row in &r.rows {
                say(format!(
                    "M = {}: max |v| = {:.6e}, {}, max difference {:.6e}  {}",
                    row.level,
                    row.max_v_sup,
                    if row.active() { "truncation active" } else { "stayed below M" },
                    row.max_state_diff,
                    row.status
                ));
            }
            say(wrote(out, harness::TRUNCATION_FILE));
            if let Some(row) = r.rows.iter().find(|r| r.status != RowStatus::Ok) {
                return Err(CommandError::Incomplete(format!("level M = {}: {}", row.level, row.status)));
            }
        }
    }
    Ok(())
}

fn drift_line(name: &str, series: &[f64]) -> String {
    format!("{name} drift {:.3e} (relative)", RunDiagnostics::relative_drift(series))
}

fn wrote(dir: &Path, name: &str) -> String {
    format!("wrote {}", dir.join(name).display())
}
