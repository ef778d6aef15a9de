//! Residual checks of the necessary optimality conditions against candidate
//! trajectories, controls and dual data.
//!
//! Every checker returns a [`ResidualReport`]: one entry per condition with
//! the largest residual, where it was attained, and a pass flag.

use serde::Serialize;

use crate::analytic::PiecewisePath;
use crate::dynamics::{ControlSignal, Trajectory, EPS_TARGET};
use crate::error::{Error, Result};
use crate::geometry::{
    unit_direction, Configuration, PairKind, PairLabel, Scenario, DEFAULT_EPS_ACTIVE,
};
use crate::vec2::Vec2;

/// Relaxation pair `w = (0, ā)`, `v = (0, 0)` of the optimality system.
/// Fixed constants: recorded, never checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationConstants {
    pub w_x: f64,
    pub v_x: f64,
    pub v_a: f64,
}

impl Default for RelaxationConstants {
    fn default() -> Self {
        RelaxationConstants {
            w_x: 0.0,
            v_x: 0.0,
            v_a: 0.0,
        }
    }
}

/// Dual data of a candidate, sampled on the trajectory's nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualArc {
    pub lambda: f64,
    pub q_x: Vec<Configuration>,
    pub p_x: Vec<Configuration>,
    pub p_a: Option<Vec<Vec<f64>>>,
    pub q_a: Option<Vec<Vec<f64>>>,
    /// `eta[k][p]` for node `k` and the trajectory's `pairs[p]`.
    pub eta: Vec<Vec<f64>>,
    pub p_terminal: Configuration,
    pub relaxation: RelaxationConstants,
}

impl DualArc {
    /// `γ([t, T])` recovered as `q^x − p^x`.
    pub fn gamma_tail(&self) -> Vec<Configuration> {
        self.q_x
            .iter()
            .zip(&self.p_x)
            .map(|(q, p)| q.axpy(-1.0, p))
            .collect()
    }

    /// Terminal multipliers (last node).
    pub fn eta_terminal(&self) -> &[f64] {
        self.eta.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Largest residual of one condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub condition: String,
    pub residual: f64,
    pub tolerance: f64,
    pub time: Option<f64>,
    pub index: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub check: String,
    pub conditions: Vec<ConditionResidual>,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.conditions
            .iter()
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    fn single(check: &str, cond: ConditionResidual) -> Self {
        ResidualReport {
            check: check.into(),
            conditions: vec![cond],
        }
    }
}

/// Tracks the max of a residual over nodes.
struct MaxTracker {
    residual: f64,
    index: Option<usize>,
}

impl MaxTracker {
    fn new() -> Self {
        MaxTracker {
            residual: 0.0,
            index: None,
        }
    }

    fn update(&mut self, value: f64, k: usize) {
        if value > self.residual || (self.index.is_none() && value >= self.residual) {
            self.residual = value;
            self.index = Some(k);
        }
    }

    fn finish(self, condition: &str, tolerance: f64, times: &[f64]) -> ConditionResidual {
        ConditionResidual {
            condition: condition.into(),
            residual: self.residual,
            tolerance,
            time: self.index.map(|k| times[k]),
            index: self.index,
            pass: self.residual <= tolerance,
        }
    }
}

fn grid_error(what: &str, got: usize, want: usize) -> Error {
    Error::InvalidArgument(format!("{what} has {got} nodes, trajectory has {want}"))
}

fn check_node_grid<T>(what: &str, data: &[T], traj: &Trajectory) -> Result<()> {
    if data.len() != traj.states.len() {
        return Err(grid_error(what, data.len(), traj.states.len()));
    }
    Ok(())
}

fn check_eta_grid(eta: &[Vec<f64>], traj: &Trajectory) -> Result<()> {
    check_node_grid("eta", eta, traj)?;
    if let Some(row) = eta.iter().find(|r| r.len() != traj.pairs.len()) {
        return Err(Error::InvalidArgument(format!(
            "eta row has {} entries, trajectory has {} pairs",
            row.len(),
            traj.pairs.len()
        )));
    }
    Ok(())
}

fn check_control_grid(u: &ControlSignal, traj: &Trajectory, sc: &Scenario) -> Result<()> {
    if u.steps() != traj.steps() || (u.h() - traj.h).abs() > 1e-12 || u.agents() != sc.agent_count()
    {
        return Err(Error::InvalidArgument(format!(
            "control grid ({} steps of {}) does not match trajectory ({} steps of {})",
            u.steps(),
            u.h(),
            traj.steps(),
            traj.h
        )));
    }
    Ok(())
}

/// Control at node `k`; the last node reuses the last step's value.
fn node_control(u: &ControlSignal, k: usize) -> &[f64] {
    u.at(k.min(u.steps() - 1))
}

/// `d(x, y) = (x − y)/‖x − y‖`, zero when the points coincide to `eps`.
fn direction_or_zero(x: Vec2, y: Vec2, eps: f64) -> Vec2 {
    if (x - y).norm() < eps {
        Vec2::ZERO
    } else {
        unit_direction(x, y).unwrap_or(Vec2::ZERO)
    }
}

/// Position of the other body of `label` relative to agent `i`.
fn partner(label: &PairLabel, i: usize, x: &Configuration, sc: &Scenario) -> Vec2 {
    match label.kind {
        PairKind::AgentAgent => x.agent(if label.i == i { label.j } else { label.i }),
        PairKind::AgentObstacle => sc.obstacles()[label.j].center,
    }
}

/// Contact reaction on agent `i`: `Σ η d(x_i, partner)`, pushing away from
/// every engaged partner.
fn reaction(i: usize, x: &Configuration, eta: &[f64], pairs: &[PairLabel], sc: &Scenario) -> Vec2 {
    let mut r = Vec2::ZERO;
    for (label, &e) in pairs.iter().zip(eta) {
        if e != 0.0 && label.involves(i) {
            r += direction_or_zero(x.agent(i), partner(label, i, x, sc), 0.0) * e;
        }
    }
    r
}

/// Multiplier of the single agent–obstacle pair from the closed-form
/// contact relation `η = ½ ā ⟨x/‖x‖, (x − x_obs)/‖x − x_obs‖⟩`, zero
/// off contact. Needs one agent, one obstacle, and the target at the origin.
pub fn recover_eta(traj: &Trajectory, control: &ControlSignal, sc: &Scenario) -> Result<Vec<f64>> {
    recover_eta_with(traj, control, sc, DEFAULT_EPS_ACTIVE)
}

pub fn recover_eta_with(
    traj: &Trajectory,
    control: &ControlSignal,
    sc: &Scenario,
    eps_active: f64,
) -> Result<Vec<f64>> {
    if sc.agent_count() != 1 || sc.obstacle_count() != 1 {
        return Err(Error::Unsupported(format!(
            "multiplier formula covers one agent and one obstacle, got {} and {}",
            sc.agent_count(),
            sc.obstacle_count()
        )));
    }
    if sc.agents()[0].target.norm() > 1e-12 {
        return Err(Error::Unsupported(
            "multiplier formula assumes the target at the origin".into(),
        ));
    }
    check_control_grid(control, traj, sc)?;
    let label = PairLabel::obstacle(0, 0);
    let obs = sc.obstacles()[0].center;
    traj.states
        .iter()
        .enumerate()
        .map(|(k, x)| {
            if label.signed_distance(x, sc)? > eps_active {
                return Ok(0.0);
            }
            let p = x.agent(0);
            let a = node_control(control, k)[0];
            let to_target = unit_direction(p, Vec2::ZERO)?;
            let normal = unit_direction(p, obs)?;
            Ok(0.5 * a * to_target.dot(normal))
        })
        .collect()
}

/// Multipliers must vanish off contact: max `η` over nodes where the pair's
/// signed distance exceeds `eps_active`.
pub fn check_complementarity(
    traj: &Trajectory,
    eta: &[Vec<f64>],
    sc: &Scenario,
    eps: f64,
) -> Result<ResidualReport> {
    check_eta_grid(eta, traj)?;
    let mut worst = MaxTracker::new();
    let mut negative = MaxTracker::new();
    for (k, (x, row)) in traj.states.iter().zip(eta).enumerate() {
        for (label, &e) in traj.pairs.iter().zip(row) {
            negative.update((-e).max(0.0), k);
            if label.signed_distance(x, sc)? > DEFAULT_EPS_ACTIVE {
                worst.update(e.abs(), k);
            }
        }
    }
    Ok(ResidualReport {
        check: "complementarity".into(),
        conditions: vec![
            worst.finish("eta = 0 off contact", eps, &traj.times),
            negative.finish("eta >= 0", eps, &traj.times),
        ],
    })
}

/// `η > 0 ⟹ ⟨q^x, x_obs − x⟩ = 0` (agent–obstacle) and
/// `⟨q^x_j − q^x_i, x_j − x_i⟩ = 0` (agent–agent), normalized by `1 + ‖q^x‖`.
pub fn check_orthogonality(
    q_x: &[Configuration],
    traj: &Trajectory,
    eta: &[Vec<f64>],
    sc: &Scenario,
    eps: f64,
) -> Result<ResidualReport> {
    check_node_grid("q_x", q_x, traj)?;
    check_eta_grid(eta, traj)?;
    let mut worst = MaxTracker::new();
    for (k, ((x, q), row)) in traj.states.iter().zip(q_x).zip(eta).enumerate() {
        for (label, &e) in traj.pairs.iter().zip(row) {
            if e <= eps {
                continue;
            }
            let inner = match label.kind {
                PairKind::AgentObstacle => q
                    .agent(label.i)
                    .dot(sc.obstacles()[label.j].center - x.agent(label.i)),
                PairKind::AgentAgent => {
                    (q.agent(label.j) - q.agent(label.i)).dot(x.agent(label.j) - x.agent(label.i))
                }
            };
            worst.update(inner.abs() / (1.0 + q.norm()), k);
        }
    }
    Ok(ResidualReport::single(
        "orthogonality",
        worst.finish("<q, contact normal> = 0 where eta > 0", eps, &traj.times),
    ))
}

/// Velocity estimates at node `k`: central, forward and backward differences
/// where available.
fn velocity_stencils(traj: &Trajectory, k: usize) -> Vec<Configuration> {
    let n = traj.states.len() - 1;
    let h = traj.h;
    let diff = |a: usize, b: usize, scale: f64| {
        Configuration(
            traj.states[a]
                .0
                .iter()
                .zip(&traj.states[b].0)
                .map(|(x, y)| (y - x) / scale)
                .collect(),
        )
    };
    let mut out = Vec::with_capacity(3);
    if k > 0 && k < n {
        out.push(diff(k - 1, k + 1, 2.0 * h));
    }
    if k < n {
        out.push(diff(k, k + 1, h));
    }
    if k > 0 {
        out.push(diff(k - 1, k, h));
    }
    out
}

/// State equation residual
/// `ẋ_i + s_i a_i d(x_i, x^tar_i) − Σ η d(x_i, partner)`.
///
/// `ẋ` is taken as the best of the central and the two one-sided difference
/// quotients at each node, so that isolated velocity jumps (contact onset,
/// release) do not register as violations.
pub fn check_dynamics(
    traj: &Trajectory,
    control: &ControlSignal,
    eta: &[Vec<f64>],
    sc: &Scenario,
    eps: f64,
) -> Result<ResidualReport> {
    check_control_grid(control, traj, sc)?;
    check_eta_grid(eta, traj)?;
    let mut worst = MaxTracker::new();
    for (k, (x, row)) in traj.states.iter().zip(eta).enumerate() {
        let a = node_control(control, k);
        let mut drift = Vec::with_capacity(sc.agent_count());
        for (i, agent) in sc.agents().iter().enumerate() {
            let d = direction_or_zero(x.agent(i), agent.target, EPS_TARGET);
            drift.push(d * (agent.speed * a[i]) - reaction(i, x, row, &traj.pairs, sc));
        }
        let best = velocity_stencils(traj, k)
            .iter()
            .map(|xdot| {
                (0..sc.agent_count())
                    .map(|i| (xdot.agent(i) + drift[i]).norm())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        worst.update(best, k);
    }
    let a_max = control.max_abs();
    let tol = eps * (1.0 + sc.max_speed() * a_max);
    Ok(ResidualReport::single(
        "dynamics",
        worst.finish("state equation", tol, &traj.times),
    ))
}

/// Control relation `λ a_i = s_i ⟨q^x_i, d(x_i, x^tar_i)⟩`, plus
/// `q^a = p^a = 0` when those arcs are supplied.
#[allow(clippy::too_many_arguments)]
pub fn check_adjoint(
    lambda: f64,
    control: &ControlSignal,
    q_x: &[Configuration],
    traj: &Trajectory,
    sc: &Scenario,
    eps: f64,
    q_a: Option<&[Vec<f64>]>,
    p_a: Option<&[Vec<f64>]>,
) -> Result<ResidualReport> {
    check_control_grid(control, traj, sc)?;
    check_node_grid("q_x", q_x, traj)?;
    let mut worst = MaxTracker::new();
    for (k, (x, q)) in traj.states.iter().zip(q_x).enumerate() {
        let a = node_control(control, k);
        for (i, agent) in sc.agents().iter().enumerate() {
            let d = direction_or_zero(x.agent(i), agent.target, EPS_TARGET);
            worst.update((lambda * a[i] - agent.speed * q.agent(i).dot(d)).abs(), k);
        }
    }
    let tol = eps * (1.0 + lambda.abs() * control.max_abs());
    let mut conditions = vec![worst.finish("lambda a = s <q, d(x, x_tar)>", tol, &traj.times)];
    for (name, arc) in [("q_a = 0", q_a), ("p_a = 0", p_a)] {
        if let Some(arc) = arc {
            check_node_grid(name, arc, traj)?;
            let mut t = MaxTracker::new();
            for (k, row) in arc.iter().enumerate() {
                t.update(row.iter().fold(0.0, |m, v| m.max(v.abs())), k);
            }
            conditions.push(t.finish(name, eps, &traj.times));
        }
    }
    Ok(ResidualReport {
        check: "adjoint".into(),
        conditions,
    })
}

/// Terminal conditions: `p^x(T) + λ (x(T) − x^tar) = Σ η(T) d(x_i, partner)`
/// per agent, `p^a(T) = 0` when supplied, and `λ + ‖p^x(T)‖ > eps`.
#[allow(clippy::too_many_arguments)]
pub fn check_transversality(
    p_terminal: &Configuration,
    lambda: f64,
    x_terminal: &Configuration,
    eta_terminal: &[f64],
    pairs: &[PairLabel],
    sc: &Scenario,
    eps: f64,
    p_a_terminal: Option<&[f64]>,
) -> Result<ResidualReport> {
    let n = sc.agent_count();
    if p_terminal.len() != 2 * n || x_terminal.len() != 2 * n || eta_terminal.len() != pairs.len() {
        return Err(Error::InvalidArgument(
            "terminal data does not match the scenario".into(),
        ));
    }
    let mut worst = MaxTracker::new();
    for (i, agent) in sc.agents().iter().enumerate() {
        let lhs = p_terminal.agent(i) + (x_terminal.agent(i) - agent.target) * lambda;
        let rhs = reaction(i, x_terminal, eta_terminal, pairs, sc);
        worst.update((lhs - rhs).norm(), i);
    }
    let times = vec![sc.horizon(); n];
    let mut conditions = vec![worst.finish("terminal adjoint", eps, &times)];
    if let Some(pa) = p_a_terminal {
        let r = pa.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        conditions.push(ConditionResidual {
            condition: "p_a(T) = 0".into(),
            residual: r,
            tolerance: eps,
            time: Some(sc.horizon()),
            index: None,
            pass: r <= eps,
        });
    }
    let margin = lambda + p_terminal.norm();
    conditions.push(ConditionResidual {
        condition: "lambda + |p(T)| > 0".into(),
        residual: (eps - margin).max(0.0),
        tolerance: 0.0,
        time: Some(sc.horizon()),
        index: None,
        pass: margin > eps,
    });
    Ok(ResidualReport {
        check: "transversality".into(),
        conditions,
    })
}

/// `γ([t, T]) = q^x − p^x` must stay constant while no pair is in contact.
pub fn check_gamma_tail(
    dual: &DualArc,
    traj: &Trajectory,
    sc: &Scenario,
    eps: f64,
) -> Result<ResidualReport> {
    check_node_grid("q_x", &dual.q_x, traj)?;
    check_node_grid("p_x", &dual.p_x, traj)?;
    let gamma = dual.gamma_tail();
    let free = traj
        .states
        .iter()
        .map(|x| Ok(sc.min_signed_distance(x)? > DEFAULT_EPS_ACTIVE))
        .collect::<Result<Vec<bool>>>()?;
    let mut worst = MaxTracker::new();
    for k in 0..gamma.len().saturating_sub(1) {
        if free[k] && free[k + 1] {
            worst.update(gamma[k].max_abs_diff(&gamma[k + 1]), k);
        }
    }
    Ok(ResidualReport::single(
        "gamma",
        worst.finish("gamma constant off contact", eps, &traj.times),
    ))
}

/// All checkers on one candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub tolerance: f64,
    pub complementarity: ResidualReport,
    pub orthogonality: ResidualReport,
    pub dynamics: ResidualReport,
    pub adjoint: ResidualReport,
    pub transversality: ResidualReport,
    pub gamma: ResidualReport,
}

impl OptimalityReport {
    pub fn reports(&self) -> [&ResidualReport; 6] {
        [
            &self.complementarity,
            &self.orthogonality,
            &self.dynamics,
            &self.adjoint,
            &self.transversality,
            &self.gamma,
        ]
    }

    pub fn passed(&self) -> bool {
        self.reports().iter().all(|r| r.passed())
    }
}

pub fn verify(
    traj: &Trajectory,
    control: &ControlSignal,
    dual: &DualArc,
    sc: &Scenario,
    eps: f64,
) -> Result<OptimalityReport> {
    let p_a_terminal = dual
        .p_a
        .as_ref()
        .and_then(|p| p.last())
        .map(|v| v.as_slice());
    Ok(OptimalityReport {
        tolerance: eps,
        complementarity: check_complementarity(traj, &dual.eta, sc, eps)?,
        orthogonality: check_orthogonality(&dual.q_x, traj, &dual.eta, sc, eps)?,
        dynamics: check_dynamics(traj, control, &dual.eta, sc, eps)?,
        adjoint: check_adjoint(
            dual.lambda,
            control,
            &dual.q_x,
            traj,
            sc,
            eps,
            dual.q_a.as_deref(),
            dual.p_a.as_deref(),
        )?,
        transversality: check_transversality(
            &dual.p_terminal,
            dual.lambda,
            traj.final_state(),
            dual.eta_terminal(),
            &traj.pairs,
            sc,
            eps,
            p_a_terminal,
        )?,
        gamma: check_gamma_tail(dual, traj, sc, eps)?,
    })
}

/// A candidate primal–dual triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub trajectory: Trajectory,
    pub control: ControlSignal,
    pub dual: DualArc,
}

/// Dual data from velocities: `q^x = C ẋ`, `λ = −C`, `p^x ≡ p^x(T) = −λ (x(T) − x^tar)`,
/// `p^a = q^a = 0`.
fn assemble_dual(
    velocities: Vec<Configuration>,
    eta: Vec<Vec<f64>>,
    traj: &Trajectory,
    sc: &Scenario,
    c: f64,
) -> DualArc {
    let lambda = -c;
    let q_x: Vec<Configuration> = velocities
        .into_iter()
        .map(|v| Configuration(v.0.iter().map(|x| c * x).collect()))
        .collect();
    let x_t = traj.final_state();
    let mut p_t = Configuration::zeros(sc.agent_count());
    for (i, agent) in sc.agents().iter().enumerate() {
        p_t.set_agent(i, (x_t.agent(i) - agent.target) * (-lambda));
    }
    let nodes = traj.states.len();
    DualArc {
        lambda,
        q_x,
        p_x: vec![p_t.clone(); nodes],
        p_a: Some(vec![vec![0.0; sc.agent_count()]; nodes]),
        q_a: Some(vec![vec![0.0; sc.agent_count()]; nodes]),
        eta,
        p_terminal: p_t,
        relaxation: RelaxationConstants::default(),
    }
}

/// Candidate from the closed-form obstacle path sampled with step `h`:
/// `η` from [`recover_eta`], `q^x = C ẋ` with the path's exact velocity.
pub fn obstacle_candidate(
    path: &PiecewisePath,
    sc: &Scenario,
    h: f64,
    c: f64,
) -> Result<Candidate> {
    let samples = path.sample(h)?;
    let states: Vec<Configuration> = samples
        .iter()
        .map(|(_, p)| Configuration::from_points(&[*p]))
        .collect();
    let velocities: Vec<Configuration> = samples
        .iter()
        .map(|(t, _)| Configuration::from_points(&[path.velocity(*t)]))
        .collect();
    let trajectory = Trajectory::from_states(h, states, sc.pairs())?;
    let control = ControlSignal::constant(h, trajectory.steps(), 1, path.a_bar)?;
    let eta_scalar = recover_eta(&trajectory, &control, sc)?;
    let eta = eta_scalar.into_iter().map(|e| vec![e]).collect();
    let dual = assemble_dual(velocities, eta, &trajectory, sc, c);
    Ok(Candidate {
        trajectory,
        control,
        dual,
    })
}

/// Candidate from a simulated run: the scheme's own multipliers and
/// `q^x = C ẋ` with per-step velocities moved to nodes.
pub fn simulated_candidate(
    traj: &Trajectory,
    control: &ControlSignal,
    sc: &Scenario,
    c: f64,
) -> Result<Candidate> {
    check_control_grid(control, traj, sc)?;
    let mut velocities = traj.velocities.clone();
    velocities.push(traj.velocities.last().cloned().unwrap_or_default());
    let dual = assemble_dual(velocities, traj.node_multipliers(), traj, sc, c);
    Ok(Candidate {
        trajectory: traj.clone(),
        control: control.clone(),
        dual,
    })
}
