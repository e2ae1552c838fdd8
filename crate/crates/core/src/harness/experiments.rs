//! The four experiment drivers behind the command line.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::dynamics::{integrate_semidiscrete, rk4_budget, step_count, ModelParams, RunDiagnostics, RunFailure, State};
use crate::error::{Error, Result};
use crate::grid::norm_inf;
use crate::oracle::{relative_l2_error, DecayWarning, FieldErrors};
use crate::solver::{self, SolverConfig};
use crate::truncation::Truncation;

use super::config::RunConfig;
use super::output::{self, real, CONVERGENCE_HEADER, TRUNCATION_HEADER};

pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const CONSERVATION_FILE: &str = "conservation.csv";
pub const TRUNCATION_FILE: &str = "truncation.csv";

/// Why a command stopped: bad input (exit 1) or a failed run (exit 2).
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(#[from] Error),
    #[error("{0}")]
    Solver(Box<RunFailure>),
    /// A sweep finished and wrote its report, but some runs failed.
    #[error("{0}")]
    Incomplete(String),
}

impl From<RunFailure> for CommandError {
    fn from(f: RunFailure) -> Self {
        CommandError::Solver(Box::new(f))
    }
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Usage(_) => 1,
            CommandError::Solver(_) | CommandError::Incomplete(_) => 2,
        }
    }
}

type CmdResult<T> = std::result::Result<T, CommandError>;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: State,
    pub diagnostics: RunDiagnostics,
    /// Relative errors at each sample time when an exact wave is configured.
    pub errors: Vec<(f64, FieldErrors)>,
    pub warnings: Vec<DecayWarning>,
}

/// One fully discrete run; writes the diagnostics CSV and, for an exact
/// wave, the error CSV. A failed run still flushes what it sampled.
pub fn cmd_run(cfg: &RunConfig, out_dir: &Path) -> CmdResult<RunSummary> {
    let (initial, warnings) = cfg.initial_state()?;
    let wave = cfg.wave();
    let mut errors = Vec::new();
    if let Some(w) = &wave {
        errors.push((initial.t, relative_l2_error(&initial, w)?));
    }
    let steps = step_count(cfg.solver.horizon, cfg.solver.tau);
    let every = cfg.outputs.sample_every;
    let mut error_failure = None;
    let result = solver::run_with(&initial, &cfg.params, &cfg.solver, every, |n, outcome| {
        if let Some(w) = &wave {
            if n % every == 0 || n == steps {
                match relative_l2_error(&outcome.state, w) {
                    Ok(e) => errors.push((outcome.state.t, e)),
                    Err(e) => {
                        error_failure.get_or_insert(e);
                    }
                }
            }
        }
    });

    let diag_path = out_dir.join(&cfg.outputs.diagnostics);
    let err_path = out_dir.join(&cfg.outputs.errors);
    match result {
        Ok((final_state, diagnostics)) => {
            output::write_diagnostics(&diag_path, &diagnostics, None)?;
            if wave.is_some() {
                output::write_errors(&err_path, &errors, None)?;
            }
            if let Some(e) = error_failure {
                return Err(e.into());
            }
            Ok(RunSummary {
                final_state,
                diagnostics,
                errors,
                warnings,
            })
        }
        Err(failure) => {
            let msg = failure.to_string();
            output::write_diagnostics(&diag_path, &failure.diagnostics, Some(&msg))?;
            if wave.is_some() {
                output::write_errors(&err_path, &errors, Some(&msg))?;
            }
            Err(failure.into())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub j: usize,
    pub h: f64,
    pub tau: f64,
    pub horizon: f64,
    pub err_u: f64,
    pub err_v: f64,
    pub max_inner_iters: usize,
    pub wall_time_s: f64,
    pub status: RowStatus,
}

impl ConvergenceRow {
    fn to_record(&self) -> Vec<String> {
        vec![
            self.j.to_string(),
            real(self.h),
            real(self.tau),
            real(self.horizon),
            real(self.err_u),
            real(self.err_v),
            self.max_inner_iters.to_string(),
            real(self.wall_time_s),
            self.status.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Coarsest mesh first.
    pub fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| b.h.total_cmp(&a.h).then(b.tau.total_cmp(&a.tau)));
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.status != RowStatus::Ok)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        output::write_rows(path, &CONVERGENCE_HEADER, self.rows.iter().map(ConvergenceRow::to_record))
    }
}

/// Final-time errors of one run of the configured exact wave.
pub fn convergence_row(cfg: &RunConfig) -> ConvergenceRow {
    let start = Instant::now();
    let mut row = ConvergenceRow {
        j: cfg.j,
        h: cfg.h(),
        tau: cfg.solver.tau,
        horizon: cfg.solver.horizon,
        err_u: f64::NAN,
        err_v: f64::NAN,
        max_inner_iters: 0,
        wall_time_s: 0.0,
        status: RowStatus::Ok,
    };
    let outcome = (|| -> std::result::Result<(State, RunDiagnostics), String> {
        let (initial, _) = cfg.initial_state().map_err(|e| e.to_string())?;
        solver::run(&initial, &cfg.params, &cfg.solver, usize::MAX).map_err(|f| {
            row.max_inner_iters = f.diagnostics.iterations.max();
            f.to_string()
        })
    })();
    match outcome {
        Ok((state, diag)) => {
            row.max_inner_iters = diag.iterations.max();
            let wave = cfg.wave().expect("checked by the caller");
            match relative_l2_error(&state, &wave) {
                Ok(e) => {
                    row.err_u = e.err_u;
                    row.err_v = e.err_v;
                }
                Err(e) => row.status = RowStatus::Failed(e.to_string()),
            }
        }
        Err(msg) => row.status = RowStatus::Failed(msg),
    }
    row.wall_time_s = start.elapsed().as_secs_f64();
    row
}

/// Runs the configured wave on every mesh in parallel and writes
/// `convergence.csv`, coarsest mesh first. Failed runs become marked rows.
pub fn cmd_converge(cfg: &RunConfig, meshes: &[usize], out_dir: &Path) -> CmdResult<ConvergenceReport> {
    let mut meshes = meshes.to_vec();
    meshes.sort_unstable();
    meshes.dedup();
    if meshes.len() < 2 {
        return Err(Error::Usage("converge needs at least two distinct mesh sizes".into()).into());
    }
    if cfg.wave().is_none() {
        return Err(Error::Usage("converge needs an exact traveling wave as initial data".into()).into());
    }
    let configs = meshes
        .iter()
        .map(|&j| cfg.with_mesh(j))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ConvergenceReport {
        rows: configs.par_iter().map(convergence_row).collect(),
    };
    report.sort();
    report.write(&out_dir.join(CONVERGENCE_FILE))?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct ConserveReport {
    pub rk4_dt: f64,
    pub semi_discrete: RunDiagnostics,
    pub fully_discrete: RunDiagnostics,
    pub warnings: Vec<DecayWarning>,
}

/// Default reference step: `τ`, shrunk to fit the RK4 budget and to divide
/// `T` evenly.
pub fn default_rk4_dt(cfg: &RunConfig) -> f64 {
    let target = cfg.solver.tau.min(0.99 * rk4_budget(&cfg.grid()));
    cfg.solver.horizon / (cfg.solver.horizon / target).ceil()
}

/// RK4 and the fully discrete scheme side by side from the same data;
/// writes `conservation.csv`.
pub fn cmd_conserve(cfg: &RunConfig, out_dir: &Path) -> CmdResult<ConserveReport> {
    let (initial, warnings) = cfg.initial_state()?;
    let dt = cfg.rk4_dt.unwrap_or_else(|| default_rk4_dt(cfg));
    let every = cfg.outputs.sample_every;
    let rk_every = ((every as f64 * cfg.solver.tau / dt).round() as usize).max(1);
    let path = out_dir.join(CONSERVATION_FILE);

    let semi = match integrate_semidiscrete(&initial, &cfg.params, dt, cfg.solver.horizon, rk_every) {
        Ok((_, d)) => d,
        Err(f) => {
            output::write_conservation(&path, &[("rk4", &f.diagnostics)], Some(&f.to_string()))?;
            return Err(f.into());
        }
    };
    let full = match solver::run(&initial, &cfg.params, &cfg.solver, every) {
        Ok((_, d)) => d,
        Err(f) => {
            output::write_conservation(
                &path,
                &[("rk4", &semi), ("fully_discrete", &f.diagnostics)],
                Some(&f.to_string()),
            )?;
            return Err(f.into());
        }
    };
    output::write_conservation(&path, &[("rk4", &semi), ("fully_discrete", &full)], None)?;
    Ok(ConserveReport {
        rk4_dt: dt,
        semi_discrete: semi,
        fully_discrete: full,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub level: f64,
    /// Largest `‖v‖_∞` of the truncated run over all steps.
    pub max_v_sup: f64,
    /// Largest nodal difference from the untruncated run over all steps.
    pub max_state_diff: f64,
    pub status: RowStatus,
}

impl TruncationRow {
    pub fn stayed_below(&self) -> bool {
        self.max_v_sup <= self.level
    }

    /// Whether the long wave entered the region where the cut-off differs
    /// from the original nonlinearity.
    pub fn active(&self) -> bool {
        !self.stayed_below()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TruncationReport {
    pub rows: Vec<TruncationRow>,
    pub untruncated_v_sup: f64,
}

struct Tracker {
    params: ModelParams,
    state: State,
    row: TruncationRow,
}

/// Runs the untruncated problem and every level in lockstep, comparing
/// states after each step; writes `truncation.csv`.
pub fn cmd_truncate(cfg: &RunConfig, levels: &[f64], out_dir: &Path) -> CmdResult<TruncationReport> {
    if levels.is_empty() {
        return Err(Error::Usage("truncate needs at least one level".into()).into());
    }
    let base = cfg.params.with_truncation(Truncation::Off);
    let (initial, _) = cfg.initial_state()?;
    let v0 = norm_inf(&initial.v);
    let mut trackers = levels
        .iter()
        .map(|&m| {
            let t = Truncation::active(m).map_err(|e| Error::Usage(format!("level {m}: {e}")))?;
            Ok(Tracker {
                params: base.with_truncation(t),
                state: initial.clone(),
                row: TruncationRow {
                    level: m,
                    max_v_sup: v0,
                    max_state_diff: 0.0,
                    status: RowStatus::Ok,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let solver_cfg: SolverConfig = cfg.solver;
    solver_cfg.validate()?;
    let steps = step_count(solver_cfg.horizon, solver_cfg.tau);
    let mut reference = initial;
    let mut untruncated_v_sup = v0;
    for n in 1..=steps {
        reference = match solver::step(&reference, &base, &solver_cfg) {
            Ok(o) => o.state,
            Err(error) => {
                return Err(RunFailure {
                    error,
                    step: n,
                    t: reference.t,
                    diagnostics: RunDiagnostics::default(),
                }
                .into())
            }
        };
        untruncated_v_sup = untruncated_v_sup.max(norm_inf(&reference.v));
        let reference = &reference;
        trackers.par_iter_mut().for_each(|tr| {
            if tr.row.status != RowStatus::Ok {
                return;
            }
            match solver::step(&tr.state, &tr.params, &solver_cfg) {
                Ok(o) => {
                    tr.state = o.state;
                    tr.row.max_v_sup = tr.row.max_v_sup.max(norm_inf(&tr.state.v));
                    let diff = tr.state.max_abs_diff(reference).expect("same grid");
                    tr.row.max_state_diff = tr.row.max_state_diff.max(diff);
                }
                Err(e) => tr.row.status = RowStatus::Failed(format!("step {n}: {e}")),
            }
        });
    }

    let report = TruncationReport {
        rows: trackers.into_iter().map(|t| t.row).collect(),
        untruncated_v_sup,
    };
    output::write_rows(
        &out_dir.join(TRUNCATION_FILE),
        &TRUNCATION_HEADER,
        report.rows.iter().map(|r| {
            vec![
                real(r.level),
                real(r.max_v_sup),
                r.stayed_below().to_string(),
                r.active().to_string(),
                real(r.max_state_diff),
                r.status.to_string(),
            ]
        }),
    )?;
    Ok(report)
}
