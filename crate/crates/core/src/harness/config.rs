//! Run configuration, read from a TOML document.
//!
//! ```toml
//! domain = [-20.0, 50.0]   # or L = 70.0 for [0, L]
//! J = 500
//! tau = 1e-3
//! T = 1.0
//!
//! [params]
//! alpha = -0.08333333333333333
//! beta = -1.0
//! gamma = -0.041666666666666664
//! lambda = 0.5             # default 1
//!
//! [truncation]             # default off
//! M = 10.0
//!
//! [solver]                 # defaults tol = 1e-6, max_iter = 50
//! tol = 1e-6
//! max_iter = 50
//!
//! [initial.traveling_wave] # or [initial] file = "state.csv" / rest = true
//! alpha = -0.08333333333333333
//! omega = 0.0
//! x0 = 15.0
//!
//! [outputs]
//! diagnostics = "diagnostics.csv"
//! errors = "errors.csv"
//! sample_every = 10
//!
//! [conserve]
//! rk4_dt = 1e-3            # default: largest step within the RK4 budget
//! ```
//!
//! Unknown keys are rejected, and every error names the offending key path.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use toml::{Table, Value};

use crate::dynamics::{ModelParams, State};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn};
use crate::oracle::{self, DecayWarning, TravelingWave};
use crate::solver::SolverConfig;
use crate::truncation::Truncation;

/// Preset horizon and time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `T = 1`, `τ = 1e-3`.
    Desk,
    /// `T = 5`, `τ = 1e-4`.
    Paper,
}

impl Profile {
    pub fn tau(self) -> f64 {
        match self {
            Profile::Desk => 1e-3,
            Profile::Paper => 1e-4,
        }
    }

    pub fn horizon(self) -> f64 {
        match self {
            Profile::Desk => 1.0,
            Profile::Paper => 5.0,
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Usage(format!("unknown profile `{other}` (expected desk or paper)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Rest,
    TravelingWave { alpha: f64, omega: f64, x0: f64 },
    /// CSV with header `j,u_re,u_im,v` and one row per node `0..=J+1`.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub diagnostics: String,
    pub errors: String,
    pub sample_every: usize,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            diagnostics: "diagnostics.csv".into(),
            errors: "errors.csv".into(),
            sample_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Physical coordinate of the left end of the window.
    pub origin: f64,
    pub length: f64,
    pub j: usize,
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub initial: InitialCondition,
    pub outputs: Outputs,
    /// Step of the semi-discrete reference run in `conserve`.
    pub rk4_dt: Option<f64>,
    /// Directory against which a relative initial-data path is resolved.
    pub base_dir: Option<PathBuf>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_with_profile(text, None)
}

/// Like [`parse_config`]; a profile supplies `tau` and `T`, overriding the
/// document.
pub fn parse_with_profile(text: &str, profile: Option<Profile>) -> Result<RunConfig> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
    let root = Section::new("", &doc);
    root.allow(&["L", "domain", "J", "tau", "T", "params", "truncation", "solver", "initial", "outputs", "conserve"])?;

    let (origin, length) = match (root.get("L"), root.get("domain")) {
        (Some(_), Some(_)) => return Err(Error::config("domain", "give either `L` or `domain`, not both")),
        (Some(_), None) => (0.0, root.positive("L")?),
        (None, Some(_)) => {
            let [a, b] = root.pair("domain")?;
            if !(b > a) {
                return Err(Error::config("domain", format!("need a < b, got [{a}, {b}]")));
            }
            (a, b - a)
        }
        (None, None) => return Err(Error::config("L", "missing domain: give `L` or `domain = [a, b]`")),
    };

    let j = root.required_usize("J")?;
    Grid::new(j, length).map_err(|e| Error::config("J", e.to_string()))?;

    let (tau, horizon) = match profile {
        Some(p) => (p.tau(), p.horizon()),
        None => (root.positive("tau")?, root.positive("T")?),
    };
    if profile.is_some() {
        // still validate whatever the document says
        for key in ["tau", "T"] {
            if root.get(key).is_some() {
                root.positive(key)?;
            }
        }
    }

    let params_tab = root.required_table("params")?;
    params_tab.allow(&["alpha", "beta", "gamma", "lambda"])?;
    let mut params = ModelParams::new(
        params_tab.required_f64("alpha")?,
        params_tab.required_f64("beta")?,
        params_tab.required_f64("gamma")?,
    );
    if let Some(lambda) = params_tab.f64("lambda")? {
        params.lambda = lambda;
    }

    if let Some(tr) = root.table("truncation")? {
        tr.allow(&["M", "mode"])?;
        match (tr.string("mode")?, tr.f64("M")?) {
            (Some("off"), None) | (None, None) => {}
            (Some("off"), Some(_)) => return Err(Error::config("truncation.M", "given together with mode = \"off\"")),
            (None | Some("active"), Some(m)) => {
                params.truncation = Truncation::active(m).map_err(|e| Error::config("truncation.M", e.to_string()))?;
            }
            (Some("active"), None) => return Err(Error::config("truncation.M", "required when mode = \"active\"")),
            (Some(other), _) => return Err(Error::config("truncation.mode", format!("expected \"off\" or \"active\", got \"{other}\""))),
        }
    }

    let mut solver = SolverConfig::new(tau, horizon);
    if let Some(s) = root.table("solver")? {
        s.allow(&["tol", "max_iter"])?;
        if s.get("tol").is_some() {
            solver.tol = s.positive("tol")?;
        }
        if let Some(n) = s.usize("max_iter")? {
            if n == 0 {
                return Err(Error::config("solver.max_iter", "must be at least 1"));
            }
            solver.max_iter = n;
        }
    }

    let init = root.required_table("initial")?;
    init.allow(&["traveling_wave", "file", "rest"])?;
    let initial = match (init.table("traveling_wave")?, init.string("file")?, init.bool("rest")?) {
        (Some(tw), None, None | Some(false)) => {
            tw.allow(&["alpha", "omega", "x0"])?;
            let alpha = tw.required_f64("alpha")?;
            let omega = tw.f64("omega")?.unwrap_or(0.0);
            let x0 = tw.f64("x0")?.unwrap_or(0.0);
            TravelingWave::new(alpha, omega, x0).map_err(|e| Error::config("initial.traveling_wave", e.to_string()))?;
            InitialCondition::TravelingWave { alpha, omega, x0 }
        }
        (None, Some(path), None | Some(false)) => InitialCondition::File(PathBuf::from(path)),
        (None, None, Some(true)) => InitialCondition::Rest,
        _ => {
            return Err(Error::config(
                "initial",
                "give exactly one of `traveling_wave`, `file` or `rest = true`",
            ))
        }
    };

    let mut outputs = Outputs::default();
    if let Some(o) = root.table("outputs")? {
        o.allow(&["diagnostics", "errors", "sample_every"])?;
        if let Some(d) = o.string("diagnostics")? {
            outputs.diagnostics = d.to_string();
        }
        if let Some(e) = o.string("errors")? {
            outputs.errors = e.to_string();
        }
        if let Some(n) = o.usize("sample_every")? {
            if n == 0 {
                return Err(Error::config("outputs.sample_every", "must be at least 1"));
            }
            outputs.sample_every = n;
        }
    }

    let mut rk4_dt = None;
    if let Some(c) = root.table("conserve")? {
        c.allow(&["rk4_dt"])?;
        if c.get("rk4_dt").is_some() {
            rk4_dt = Some(c.positive("rk4_dt")?);
        }
    }

    Ok(RunConfig {
        origin,
        length,
        j,
        params,
        solver,
        initial,
        outputs,
        rk4_dt,
        base_dir: None,
    })
}

/// Reads and parses a configuration file; relative data paths resolve
/// against its directory.
pub fn load_config(path: &Path, profile: Option<Profile>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_with_profile(&text, profile)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.j, self.length).expect("validated at parse time")
    }

    pub fn h(&self) -> f64 {
        self.grid().h()
    }

    /// Same problem on a different mesh.
    pub fn with_mesh(&self, j: usize) -> Result<Self> {
        Grid::new(j, self.length).map_err(|e| Error::Usage(format!("mesh J = {j}: {e}")))?;
        Ok(Self { j, ..self.clone() })
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.solver.tau = profile.tau();
        self.solver.horizon = profile.horizon();
        self
    }

    /// The exact wave attached to this window, if one is configured.
    pub fn wave(&self) -> Option<TravelingWave> {
        match self.initial {
            InitialCondition::TravelingWave { alpha, omega, x0 } => Some(
                TravelingWave::new(alpha, omega, x0)
                    .expect("validated at parse time")
                    .on_window(self.origin),
            ),
            _ => None,
        }
    }

    /// Initial state plus any boundary-decay warnings for an exact wave.
    pub fn initial_state(&self) -> Result<(State, Vec<DecayWarning>)> {
        let grid = self.grid();
        match &self.initial {
            InitialCondition::Rest => Ok((State::rest(grid), Vec::new())),
            InitialCondition::TravelingWave { .. } => {
                let sampled = oracle::initial_state(&self.wave().expect("wave configured"), grid)?;
                Ok((sampled.state, sampled.warnings))
            }
            InitialCondition::File(path) => {
                let path = match &self.base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Ok((read_state_csv(&path, grid)?, Vec::new()))
            }
        }
    }
}

/// Reads initial data written as `j,u_re,u_im,v`, one row per node.
pub fn read_state_csv(path: &Path, grid: Grid) -> Result<State> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["j", "u_re", "u_im", "v"] {
        return Err(Error::config("initial.file", "header must be `j,u_re,u_im,v`"));
    }
    let n = grid.nodes();
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut v = vec![0.0; n];
    let mut rows = 0;
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::config("initial.file", format!("row {}: bad number `{}`", k + 1, &record[i])))
        };
        let j: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::config("initial.file", format!("row {}: bad node index", k + 1)))?;
        if j != k {
            return Err(Error::config("initial.file", format!("row {} has node {j}, expected {k}", k + 1)));
        }
        if j >= n {
            return Err(Error::config("initial.file", format!("more than J + 2 = {n} rows")));
        }
        u[j] = Complex64::new(field(1)?, field(2)?);
        v[j] = field(3)?;
        if grid.is_ghost(j) && (u[j].norm() != 0.0 || v[j] != 0.0) {
            return Err(Error::config("initial.file", format!("node {j} is a boundary node and must be zero")));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::config("initial.file", format!("expected {n} rows, found {rows}")));
    }
    let u = GridFn::from_values(grid, u).map_err(|e| Error::config("initial.file", e.to_string()))?;
    let v = GridFn::from_values(grid, v).map_err(|e| Error::config("initial.file", e.to_string()))?;
    State::new(0.0, u, v)
}

/// One table of the document plus its key path.
struct Section<'a> {
    path: String,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn new(path: &str, table: &'a Table) -> Self {
        Self {
            path: path.to_string(),
            table,
        }
    }

    fn key(&self, name: &str) -> String {
        if self.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.path)
        }
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.table.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::config(self.key(k), "unknown key")),
            None => Ok(()),
        }
    }

    fn get(&self, name: &str) -> Option<&'a Value> {
        self.table.get(name)
    }

    fn f64(&self, name: &str) -> Result<Option<f64>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Float(x)) if x.is_finite() => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(Error::config(self.key(name), format!("expected a finite number, got {other}"))),
        }
    }

    fn required_f64(&self, name: &str) -> Result<f64> {
        self.f64(name)?
            .ok_or_else(|| Error::config(self.key(name), "missing required key"))
    }

    fn positive(&self, name: &str) -> Result<f64> {
        let x = self.required_f64(name)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Error::config(self.key(name), format!("must be positive, got {x}")))
        }
    }

    fn pair(&self, name: &str) -> Result<[f64; 2]> {
        let bad = || Error::config(self.key(name), "expected an array of two numbers");
        let Some(Value::Array(items)) = self.get(name) else {
            return Err(bad());
        };
        let nums: Vec<f64> = items
            .iter()
            .map(|v| match v {
                Value::Float(x) if x.is_finite() => Some(*x),
                Value::Integer(i) => Some(*i as f64),
                _ => None,
            })
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        <[f64; 2]>::try_from(nums).map_err(|_| bad())
    }

    fn usize(&self, name: &str) -> Result<Option<usize>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(other) => Err(Error::config(self.key(name), format!("expected a non-negative integer, got {other}"))),
        }
    }

    fn required_usize(&self, name: &str) -> Result<usize> {
        self.usize(name)?
            .ok_or_else(|| Error::config(self.key(name), "missing required key"))
    }

    fn string(&self, name: &str) -> Result<Option<&'a str>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(Error::config(self.key(name), format!("expected a string, got {other}"))),
        }
    }

    fn bool(&self, name: &str) -> Result<Option<bool>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(other) => Err(Error::config(self.key(name), format!("expected a boolean, got {other}"))),
        }
    }

    fn table(&self, name: &str) -> Result<Option<Section<'a>>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section::new(&self.key(name), t))),
            Some(_) => Err(Error::config(self.key(name), "expected a table")),
        }
    }

    fn required_table(&self, name: &str) -> Result<Section<'a>> {
        self.table(name)?
            .ok_or_else(|| Error::config(self.key(name), "missing required table"))
    }
}
