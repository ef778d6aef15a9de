//! Command-line front end: scenario files, subcommands and CSV/JSON output.

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analytic::{
    optimize_constant_control, sweep_table, tau_range, ObstacleRunParams, PhaseMode, PiecewisePath,
};
use crate::cones::{default_max_sweeps, project_configuration, DEFAULT_PROJECTION_TOL};
use crate::dynamics::{simulate_with, ControlSignal, Scheme, StepOptions, TieBreak};
use crate::geometry::{Agent, Configuration, Obstacle, Scenario};
use crate::optimality::{obstacle_candidate, simulated_candidate, verify};
use crate::vec2::Vec2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("malformed scenario {}: {source}", path.display())]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("invalid option: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] crate::Error),

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },

    #[error("cannot encode output: {0}")]
    Encode(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 1 for numerical or output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) | CliError::Write { .. } | CliError::Encode(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub radius: f64,
    pub speed: f64,
    pub target: Vec2,
    pub start: Vec2,
}

/// On-disk scenario layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub horizon: f64,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

impl ScenarioFile {
    pub fn from_scenario(sc: &Scenario) -> Self {
        ScenarioFile {
            horizon: sc.horizon(),
            agents: sc
                .agents()
                .iter()
                .zip(sc.x0().points())
                .map(|(a, start)| AgentSpec {
                    radius: a.radius,
                    speed: a.speed,
                    target: a.target,
                    start,
                })
                .collect(),
            obstacles: sc.obstacles().to_vec(),
        }
    }

    fn parts(&self) -> (Vec<Agent>, Vec<Obstacle>, Configuration) {
        let agents = self
            .agents
            .iter()
            .map(|a| Agent {
                radius: a.radius,
                speed: a.speed,
                target: a.target,
            })
            .collect();
        let starts: Vec<Vec2> = self.agents.iter().map(|a| a.start).collect();
        (
            agents,
            self.obstacles.clone(),
            Configuration::from_points(&starts),
        )
    }

    pub fn into_scenario(&self) -> crate::Result<Scenario> {
        let (agents, obstacles, x0) = self.parts();
        Scenario::new(agents, obstacles, self.horizon, x0)
    }

    /// Like [`ScenarioFile::into_scenario`] but accepts overlapping starts.
    pub fn into_scenario_allow_overlap(&self) -> crate::Result<Scenario> {
        let (agents, obstacles, x0) = self.parts();
        Scenario::new_allow_overlap(agents, obstacles, self.horizon, x0)
    }
}

fn read_scenario_file(path: &Path) -> CliResult<ScenarioFile> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a scenario, including non-overlap of the starts.
pub fn parse_scenario(path: &Path) -> CliResult<Scenario> {
    Ok(read_scenario_file(path)?.into_scenario()?)
}

pub fn scenario_to_json(sc: &Scenario) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(&ScenarioFile::from_scenario(sc))?;
    s.push('\n');
    Ok(s)
}

/// `%g`-style formatting with six significant digits.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = format_number(f)
                    .parse::<f64>()
                    .ok()
                    .and_then(serde_json::Number::from_f64)
                {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to six significant digits.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut v = serde_json::to_value(value)?;
    round_numbers(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn csv_rows(header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_number).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes to `path`, or standard output when absent.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Velocity,
    Position,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Velocity => Scheme::VelocityProjection,
            SchemeArg::Position => Scheme::PositionProjection,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for TieBreak {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Left => TieBreak::Left,
            SideArg::Right => TieBreak::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    Geometric,
}

impl From<ModeArg> for PhaseMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => PhaseMode::Paper,
            ModeArg::Geometric => PhaseMode::Geometric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    /// Closed-form three-phase path.
    Analytic,
    /// Simulated run with the scheme's own multipliers.
    Simulated,
}

/// Inclusive `A:B:STEP` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl std::str::FromStr for TauRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected A:B:STEP, got {s:?}"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        Ok(TauRange {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            step: num(parts[2])?,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "crowd-sweep",
    version,
    about = "Controlled crowd motion with obstacles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario under a constant control; CSV trajectory.
    Simulate(SimulateArgs),
    /// Optimal constant control around one obstacle; JSON.
    Analytic(AnalyticArgs),
    /// Optimal control over a range of weights; CSV table.
    Sweep(SweepArgs),
    /// Residuals of the optimality conditions on a candidate; JSON.
    Check(CheckArgs),
    /// Project the start positions onto the non-overlap set; JSON.
    Project(ProjectArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Velocity)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    pub tie_break: SideArg,
    /// Constant control applied to every agent.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub control: f64,
    /// Feasibility tolerance on the signed distances.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Paper)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    pub tie_break: SideArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "1.0:10.0:0.5")]
    pub tau_range: TauRange,
    #[arg(long, value_enum, default_value_t = ModeArg::Paper)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    pub tie_break: SideArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = SourceArg::Analytic)]
    pub source: SourceArg,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Paper)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    pub tie_break: SideArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Velocity)]
    pub scheme: SchemeArg,
    /// Constant control for simulated candidates.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub control: f64,
    /// Scale `C < 0` of the adjoint arc `q = C ẋ`.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub scale: f64,
    /// Checker tolerance; defaults to 10 h.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Analytic(a) => run_analytic(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Check(a) => run_check(a),
        Command::Project(a) => run_project(a),
    }
}

/// Runs the command and maps the outcome to an exit code, reporting errors
/// on standard error.
pub fn run_command(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn trajectory_csv(traj: &crate::dynamics::Trajectory, sc: &Scenario) -> CliResult<String> {
    let mut header = vec!["t".to_string()];
    for i in 1..=sc.agent_count() {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    header.push("min_dist".into());
    header.push("eta_sum".into());
    let eta = traj.node_multipliers();
    let mut rows = Vec::with_capacity(traj.states.len());
    for ((t, x), e) in traj.times.iter().zip(&traj.states).zip(&eta) {
        let mut row = vec![*t];
        row.extend_from_slice(x.as_slice());
        let d = sc.min_signed_distance(x)?;
        row.push(if d.is_finite() { d } else { f64::NAN });
        row.push(e.iter().sum());
        rows.push(row);
    }
    Ok(csv_rows(&header, rows))
}

fn run_simulate(a: &SimulateArgs) -> CliResult<()> {
    let sc = parse_scenario(&a.scenario)?;
    let h = positive("h", a.h)?;
    let mut opts = StepOptions::default();
    if let Some(tol) = a.tol {
        opts.tol_feas = positive("tol", tol)?;
    }
    let u = ControlSignal::constant_for(&sc, h, a.control)?;
    let traj = simulate_with(&sc, &u, a.scheme.into(), a.tie_break.into(), &opts)?;
    emit(&trajectory_csv(&traj, &sc)?, a.output.as_deref())
}

fn run_params(path: &Path, tau: f64, mode: ModeArg, side: SideArg) -> CliResult<ObstacleRunParams> {
    let sc = parse_scenario(path)?;
    Ok(ObstacleRunParams::from_scenario(
        &sc,
        tau,
        mode.into(),
        side.into(),
    )?)
}

fn run_analytic(a: &AnalyticArgs) -> CliResult<()> {
    let params = run_params(&a.scenario, a.tau, a.mode, a.tie_break)?;
    let result = optimize_constant_control(&params)?;
    emit(&to_json(&result)?, a.output.as_deref())
}

pub fn sweep_csv(rows: &[crate::analytic::SweepRow]) -> String {
    let header: Vec<String> = ["tau", "a_bar", "t1", "theta1", "J"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    csv_rows(
        &header,
        rows.iter()
            .map(|r| vec![r.tau, r.a_bar, r.t1, r.theta1, r.cost]),
    )
}

fn run_sweep(a: &SweepArgs) -> CliResult<()> {
    let params = run_params(&a.scenario, 1.0, a.mode, a.tie_break)?;
    let r = a.tau_range;
    let taus = tau_range(r.start, r.stop, r.step)?;
    let rows = sweep_table(&taus, &params)?;
    emit(&sweep_csv(&rows), a.output.as_deref())
}

fn run_check(a: &CheckArgs) -> CliResult<()> {
    let sc = parse_scenario(&a.scenario)?;
    let h = positive("h", a.h)?;
    let eps = match a.tol {
        Some(t) => positive("tol", t)?,
        None => 10.0 * h,
    };
    if !(a.scale < 0.0) {
        return Err(CliError::Usage(format!(
            "--scale must be negative, got {}",
            a.scale
        )));
    }
    let cand = match a.source {
        SourceArg::Analytic => {
            let params =
                ObstacleRunParams::from_scenario(&sc, a.tau, a.mode.into(), a.tie_break.into())?;
            let opt = optimize_constant_control(&params)?;
            let path = PiecewisePath::new(opt.a_bar, &params)?;
            obstacle_candidate(&path, &sc, h, a.scale)?
        }
        SourceArg::Simulated => {
            let u = ControlSignal::constant_for(&sc, h, a.control)?;
            let traj = simulate_with(
                &sc,
                &u,
                a.scheme.into(),
                a.tie_break.into(),
                &StepOptions::default(),
            )?;
            simulated_candidate(&traj, &u, &sc, a.scale)?
        }
    };
    let report = verify(&cand.trajectory, &cand.control, &cand.dual, &sc, eps)?;
    #[derive(Serialize)]
    struct Out<'a> {
        passed: bool,
        #[serde(flatten)]
        report: &'a crate::optimality::OptimalityReport,
    }
    let out = Out {
        passed: report.passed(),
        report: &report,
    };
    emit(&to_json(&out)?, a.output.as_deref())
}

#[derive(Debug, Serialize)]
struct ProjectOutput {
    feasible_input: bool,
    sweeps: usize,
    min_signed_distance: Option<f64>,
    positions: Vec<Vec2>,
    corrections: Vec<ProjectCorrection>,
}

#[derive(Debug, Serialize)]
struct ProjectCorrection {
    pair: String,
    amount: f64,
}

fn run_project(a: &ProjectArgs) -> CliResult<()> {
    let file = read_scenario_file(&a.scenario)?;
    let sc = file.into_scenario_allow_overlap()?;
    let tol = match a.tol {
        Some(t) => positive("tol", t)?,
        None => DEFAULT_PROJECTION_TOL,
    };
    let proj = project_configuration(sc.x0(), &sc, tol, default_max_sweeps(&sc))?;
    let d = sc.min_signed_distance(&proj.x)?;
    let out = ProjectOutput {
        feasible_input: sc.min_signed_distance(sc.x0())? >= -tol,
        sweeps: proj.sweeps,
        min_signed_distance: d.is_finite().then_some(d),
        positions: proj.x.points().collect(),
        corrections: proj
            .corrections
            .iter()
            .filter(|c| c.amount != 0.0)
            .map(|c| ProjectCorrection {
                pair: c.label.to_string(),
                amount: c.amount,
            })
            .collect(),
    };
    emit(&to_json(&out)?, a.output.as_deref())
}
