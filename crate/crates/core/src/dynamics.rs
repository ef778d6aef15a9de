//! Catching-up time stepping for the controlled sweeping process, the
//! controlled desired-velocity field, contact-event extraction and the cost.

use serde::{Deserialize, Serialize};

use crate::cones::{
    default_max_sweeps, project_configuration, project_velocity, ConeConstraint, VelocityCone,
    DEFAULT_PROJECTION_TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{
    unit_direction, Configuration, PairKind, PairLabel, Scenario, DEFAULT_EPS_ACTIVE,
};
use crate::vec2::Vec2;

/// Below this distance to its target an agent's desired velocity is zero (m).
pub const EPS_TARGET: f64 = 1e-9;
/// States may penetrate by at most this much (m).
pub const DEFAULT_TOL_FEAS: f64 = 1e-7;
/// Tangential nudge for stagnation, relative to the largest agent speed.
pub const EPS_TIE_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `x_{k+1} = x_k + h Π(U)` with the projection onto the linearized
    /// admissible set at `x_k`.
    #[default]
    VelocityProjection,
    /// `x_{k+1} = P(x_k + h U)` with the local configuration projection.
    PositionProjection,
}

/// Side used to break the symmetric head-on stagnation against a contact.
/// `Left` rotates the contact normal by +90 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    Left,
    Right,
}

impl TieBreak {
    pub fn tangent(self, normal: Vec2) -> Vec2 {
        match self {
            TieBreak::Left => normal.perp(),
            TieBreak::Right => -normal.perp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub eps_active: f64,
    pub tol_feas: f64,
    pub eps_target: f64,
    pub projection_tol: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            eps_active: DEFAULT_EPS_ACTIVE,
            tol_feas: DEFAULT_TOL_FEAS,
            eps_target: EPS_TARGET,
            projection_tol: DEFAULT_PROJECTION_TOL,
        }
    }
}

/// Piecewise-constant per-agent control on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    h: f64,
    agents: usize,
    /// Step-major: `values[k * agents + i]`.
    values: Vec<f64>,
}

impl ControlSignal {
    pub fn new(h: f64, agents: usize, values: Vec<f64>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "control step must be > 0, got {h}"
            )));
        }
        if agents == 0 || !values.len().is_multiple_of(agents) {
            return Err(Error::InvalidArgument(format!(
                "{} control values do not split over {agents} agents",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "control has non-finite values".into(),
            ));
        }
        Ok(ControlSignal { h, agents, values })
    }

    /// Same value for every agent and step.
    pub fn constant(h: f64, steps: usize, agents: usize, a: f64) -> Result<Self> {
        Self::new(h, agents, vec![a; steps * agents])
    }

    /// Constant control covering `[0, horizon]` for every agent of `sc`.
    pub fn constant_for(sc: &Scenario, h: f64, a: f64) -> Result<Self> {
        let steps = step_count(sc.horizon(), h)?;
        Self::constant(h, steps, sc.agent_count(), a)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn steps(&self) -> usize {
        self.values.len() / self.agents
    }

    pub fn at(&self, step: usize) -> &[f64] {
        &self.values[step * self.agents..(step + 1) * self.agents]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Number of steps of size `h` covering `[0, horizon]`; `h` must divide the
/// horizon to within 1e-9.
pub fn step_count(horizon: f64, h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let n = (horizon / h).round();
    if n < 1.0 || (n * h - horizon).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "step {h} does not divide horizon {horizon}"
        )));
    }
    Ok(n as usize)
}

/// Simulated path: nodes, per-step velocities and per-step multipliers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<Configuration>,
    /// `(states[k+1] − states[k]) / h`.
    pub velocities: Vec<Configuration>,
    /// Constraint labels indexing the inner vectors of `multipliers`.
    pub pairs: Vec<PairLabel>,
    /// `multipliers[k][p]`: multiplier of `pairs[p]` over step `k`.
    pub multipliers: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Wraps sampled states on a uniform grid; velocities are forward
    /// differences and all multipliers zero.
    pub fn from_states(h: f64, states: Vec<Configuration>, pairs: Vec<PairLabel>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidArgument(
                "trajectory needs at least two nodes".into(),
            ));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
        }
        let times = (0..states.len()).map(|k| k as f64 * h).collect();
        let velocities = states
            .windows(2)
            .map(|w| difference_quotient(&w[0], &w[1], h))
            .collect();
        let multipliers = vec![vec![0.0; pairs.len()]; states.len() - 1];
        Ok(Trajectory {
            h,
            times,
            states,
            velocities,
            pairs,
            multipliers,
        })
    }

    pub fn steps(&self) -> usize {
        self.velocities.len()
    }

    pub fn final_state(&self) -> &Configuration {
        self.states.last().expect("non-empty trajectory")
    }

    /// Multipliers moved to nodes: node `k < n` takes step `k`, the last node
    /// repeats the last step.
    pub fn node_multipliers(&self) -> Vec<Vec<f64>> {
        let mut out = self.multipliers.clone();
        if let Some(last) = self.multipliers.last() {
            out.push(last.clone());
        }
        out
    }
}

fn difference_quotient(a: &Configuration, b: &Configuration, h: f64) -> Configuration {
    Configuration(a.0.iter().zip(&b.0).map(|(x, y)| (y - x) / h).collect())
}

/// A maximal interval during which one pair stays in contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactEvent {
    pub pair: PairLabel,
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Controlled desired velocity: block `i` is `−a_i s_i (x_i − x^tar_i)/‖x_i − x^tar_i‖`,
/// zero within [`EPS_TARGET`] of the target.
pub fn desired_velocity(x: &Configuration, a: &[f64], sc: &Scenario) -> Result<Configuration> {
    desired_velocity_with(x, a, sc, EPS_TARGET)
}

pub fn desired_velocity_with(
    x: &Configuration,
    a: &[f64],
    sc: &Scenario,
    eps_target: f64,
) -> Result<Configuration> {
    let n = sc.agent_count();
    if a.len() != n || x.len() != 2 * n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} controls and {} coordinates, got {} and {}",
            2 * n,
            a.len(),
            x.len()
        )));
    }
    let mut u = Configuration::zeros(n);
    for (i, agent) in sc.agents().iter().enumerate() {
        let p = x.agent(i);
        if (p - agent.target).norm() < eps_target {
            continue;
        }
        let d = unit_direction(p, agent.target)?;
        u.set_agent(i, d * (-a[i] * agent.speed));
    }
    Ok(u)
}

/// Result of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub x_next: Configuration,
    /// `(x_next − x_k) / h`.
    pub velocity: Configuration,
    /// One multiplier per scenario pair, canonical order.
    pub eta: Vec<f64>,
    /// Agents that received the tangential tie-break nudge.
    pub nudged: Vec<usize>,
}

/// Distance band within which a pair can be reached in one step of size `h`
/// when the desired velocity has norm `u_norm`.
pub fn contact_band(label: &PairLabel, h: f64, u_norm: f64, eps_active: f64) -> f64 {
    let grad_norm = match label.kind {
        PairKind::AgentAgent => std::f64::consts::SQRT_2,
        PairKind::AgentObstacle => 1.0,
    };
    eps_active + h * grad_norm * u_norm
}

/// Advance one step of size `h` from the feasible state `x_k`.
pub fn step(
    x_k: &Configuration,
    a_k: &[f64],
    h: f64,
    scheme: Scheme,
    sc: &Scenario,
    tie_break: TieBreak,
    opts: &StepOptions,
) -> Result<StepOutcome> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let worst = sc.min_signed_distance(x_k)?;
    if worst < -opts.tol_feas {
        return Err(Error::InvalidState(format!(
            "state penetrates by {} (tolerance {})",
            -worst, opts.tol_feas
        )));
    }
    let u = desired_velocity_with(x_k, a_k, sc, opts.eps_target)?;
    let pairs = sc.pairs();
    let eps_tie = EPS_TIE_REL * sc.max_speed();

    let (mut x_next, eta) = match scheme {
        Scheme::VelocityProjection => {
            let u_norm = u.norm();
            let mut constraints = Vec::new();
            let mut slots = Vec::new();
            for (p, label) in pairs.iter().enumerate() {
                let d = label.signed_distance(x_k, sc)?;
                if d <= contact_band(label, h, u_norm, opts.eps_active) {
                    constraints.push(ConeConstraint {
                        label: *label,
                        gradient: label.gradient(x_k, sc)?,
                        offset: d.max(0.0) / h,
                    });
                    slots.push(p);
                }
            }
            let cone = VelocityCone {
                dim: x_k.len(),
                constraints,
            };
            let proj = project_velocity(u.as_slice(), &cone)?;
            let mut eta = vec![0.0; pairs.len()];
            for (slot, e) in slots.iter().zip(&proj.eta) {
                eta[*slot] = *e;
            }
            let v = Configuration(proj.v);
            (x_k.axpy(h, &v), eta)
        }
        Scheme::PositionProjection => {
            let y = x_k.axpy(h, &u);
            let proj = project_configuration(&y, sc, opts.projection_tol, default_max_sweeps(sc))?;
            let eta = proj.corrections.iter().map(|c| c.amount / h).collect();
            (proj.x, eta)
        }
    };

    // Head-on stagnation: an agent pushed exactly into a single contact stays
    // put forever; move it tangentially by eps_tie along the chosen side.
    let mut nudged = Vec::new();
    if eps_tie > 0.0 {
        for i in 0..sc.agent_count() {
            let ui = u.agent(i);
            let ui_norm = ui.norm();
            if ui_norm == 0.0 {
                continue;
            }
            let moved = (x_next.agent(i) - x_k.agent(i)).norm();
            if moved > 1e-9 * h * ui_norm {
                continue;
            }
            let mut engaged = pairs
                .iter()
                .zip(&eta)
                .filter(|(l, e)| l.involves(i) && **e > 0.0);
            let (Some((label, _)), None) = (engaged.next(), engaged.next()) else {
                continue;
            };
            let g = label.gradient(x_k, sc)?;
            let normal = g.agent(i);
            let normal = normal * (1.0 / normal.norm());
            if ui.dot(normal) > -(1.0 - 1e-9) * ui_norm {
                continue;
            }
            x_next.add_to_agent(i, tie_break.tangent(normal) * (eps_tie * h));
            nudged.push(i);
        }
    }

    let worst = sc.min_signed_distance(&x_next)?;
    if worst < -opts.tol_feas {
        return Err(Error::Numeric(format!(
            "step left the admissible set (penetration {})",
            -worst
        )));
    }
    let velocity = difference_quotient(x_k, &x_next, h);
    Ok(StepOutcome {
        x_next,
        velocity,
        eta,
        nudged,
    })
}

/// Integrate over `[0, T]` with the control's grid step.
pub fn simulate(
    sc: &Scenario,
    u: &ControlSignal,
    scheme: Scheme,
    tie_break: TieBreak,
) -> Result<Trajectory> {
    simulate_with(sc, u, scheme, tie_break, &StepOptions::default())
}

pub fn simulate_with(
    sc: &Scenario,
    u: &ControlSignal,
    scheme: Scheme,
    tie_break: TieBreak,
    opts: &StepOptions,
) -> Result<Trajectory> {
    let h = u.h();
    let n = step_count(sc.horizon(), h)?;
    if u.steps() != n || u.agents() != sc.agent_count() {
        return Err(Error::InvalidArgument(format!(
            "control has {} steps for {} agents, expected {n} steps for {}",
            u.steps(),
            u.agents(),
            sc.agent_count()
        )));
    }
    let pairs = sc.pairs();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut velocities = Vec::with_capacity(n);
    let mut multipliers = Vec::with_capacity(n);
    let mut x = sc.x0().clone();
    for k in 0..n {
        let t = k as f64 * h;
        let out = step(&x, u.at(k), h, scheme, sc, tie_break, opts).map_err(|e| e.at_time(t))?;
        times.push(t);
        states.push(std::mem::replace(&mut x, out.x_next));
        velocities.push(out.velocity);
        multipliers.push(out.eta);
    }
    times.push(n as f64 * h);
    states.push(x);
    Ok(Trajectory {
        h,
        times,
        states,
        velocities,
        pairs,
        multipliers,
    })
}

/// Maximal node intervals with signed distance `<= eps`, per pair.
///
/// `t_exit` is the last node in contact; single-node contacts extend to the
/// following node. Runs separated by a single out-of-contact node are merged.
pub fn extract_contacts(traj: &Trajectory, sc: &Scenario, eps: f64) -> Result<Vec<ContactEvent>> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eps must be >= 0, got {eps}"
        )));
    }
    let last = traj.states.len() - 1;
    let mut events = Vec::new();
    for label in &traj.pairs {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut start: Option<usize> = None;
        for (k, x) in traj.states.iter().enumerate() {
            let touching = label.signed_distance(x, sc)? <= eps;
            match (touching, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    runs.push((s, k - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, last));
        }
        let mut merged: Vec<(usize, usize)> = Vec::new();
        for (s, e) in runs {
            match merged.last_mut() {
                Some(prev) if s - prev.1 <= 2 => prev.1 = e,
                _ => merged.push((s, e)),
            }
        }
        for (s, mut e) in merged {
            if e == s {
                if s == last {
                    continue;
                }
                e = s + 1;
            }
            events.push(ContactEvent {
                pair: *label,
                t_enter: traj.times[s],
                t_exit: traj.times[e],
            });
        }
    }
    Ok(events)
}

/// `½‖x(T) − x^tar‖² + (τ/2) ∫‖a‖²` with the left-endpoint rule on the
/// control grid (exact for piecewise-constant controls).
pub fn cost_functional(
    traj: &Trajectory,
    u: &ControlSignal,
    tau: f64,
    sc: &Scenario,
) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must be >= 0, got {tau}"
        )));
    }
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
    let x_t = traj.final_state();
    let terminal: f64 = sc
        .agents()
        .iter()
        .enumerate()
        .map(|(i, a)| (x_t.agent(i) - a.target).norm_squared())
        .sum();
    let effort: f64 = (0..u.steps())
        .map(|k| u.at(k).iter().map(|a| a * a).sum::<f64>() * u.h())
        .sum();
    Ok(0.5 * terminal + 0.5 * tau * effort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Agent, Obstacle};

    fn obstacle_scenario(start: Vec2, horizon: f64) -> Scenario {
        Scenario::new(
            vec![Agent {
                radius: 3.0,
                speed: 8.0,
                target: Vec2::ZERO,
            }],
            vec![Obstacle {
                center: Vec2::new(0.0, 24.0),
                radius: 3.0,
            }],
            horizon,
            Configuration::from_points(&[start]),
        )
        .unwrap()
    }

    fn free_scenario(start: Vec2, horizon: f64) -> Scenario {
        Scenario::new(
            vec![Agent {
                radius: 3.0,
                speed: 8.0,
                target: Vec2::ZERO,
            }],
            vec![],
            horizon,
            Configuration::from_points(&[start]),
        )
        .unwrap()
    }

    #[test]
    fn desired_velocity_values() {
        let sc = obstacle_scenario(Vec2::new(0.0, 48.0), 6.0);
        let u = desired_velocity(sc.x0(), &[1.0], &sc).unwrap();
        assert_eq!(u.0, vec![0.0, -8.0]);
        let u = desired_velocity(sc.x0(), &[2.8004], &sc).unwrap();
        assert!((u.0[1] + 22.4032).abs() < 1e-12);
        let at_target = Configuration::from_points(&[Vec2::ZERO]);
        let u = desired_velocity(&at_target, &[1.0], &sc).unwrap();
        assert_eq!(u.0, vec![0.0, 0.0]);
    }

    #[test]
    fn free_step_is_explicit_euler() {
        let sc = obstacle_scenario(Vec2::new(5.0, 48.0), 6.0);
        let opts = StepOptions::default();
        for scheme in [Scheme::VelocityProjection, Scheme::PositionProjection] {
            let out = step(sc.x0(), &[1.0], 0.01, scheme, &sc, TieBreak::Left, &opts).unwrap();
            let u = desired_velocity(sc.x0(), &[1.0], &sc).unwrap();
            let want = sc.x0().axpy(0.01, &u);
            assert!(out.x_next.max_abs_diff(&want) < 1e-14);
            assert!(out.eta.iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn head_on_contact_gets_nudged() {
        let sc = obstacle_scenario(Vec2::new(0.0, 30.0), 6.0);
        let opts = StepOptions::default();
        for (tie, sign) in [(TieBreak::Left, -1.0), (TieBreak::Right, 1.0)] {
            let out = step(
                sc.x0(),
                &[1.0],
                1e-3,
                Scheme::VelocityProjection,
                &sc,
                tie,
                &opts,
            )
            .unwrap();
            assert_eq!(out.nudged, vec![0]);
            let dx = out.x_next.agent(0) - sc.x0().agent(0);
            assert!(dx.x * sign > 0.0);
            assert!((dx.x.abs() - 8e-6 * 1e-3).abs() < 1e-18);
            assert!((out.eta[0] - 8.0).abs() < 1e-12);
        }
        let out = step(
            sc.x0(),
            &[1.0],
            1e-3,
            Scheme::PositionProjection,
            &sc,
            TieBreak::Left,
            &opts,
        )
        .unwrap();
        assert_eq!(out.nudged, vec![0]);
    }

    #[test]
    fn infeasible_state_is_rejected() {
        let sc = Scenario::new_allow_overlap(
            vec![Agent {
                radius: 3.0,
                speed: 8.0,
                target: Vec2::ZERO,
            }],
            vec![Obstacle {
                center: Vec2::new(0.0, 24.0),
                radius: 3.0,
            }],
            6.0,
            Configuration::from_points(&[Vec2::new(0.0, 29.0)]),
        )
        .unwrap();
        let err = step(
            sc.x0(),
            &[1.0],
            1e-3,
            Scheme::VelocityProjection,
            &sc,
            TieBreak::Left,
            &StepOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidState(_)));
    }

    #[test]
    fn zero_control_is_stationary() {
        let sc = obstacle_scenario(Vec2::new(0.0, 48.0), 1.0);
        let u = ControlSignal::constant_for(&sc, 0.01, 0.0).unwrap();
        for scheme in [Scheme::VelocityProjection, Scheme::PositionProjection] {
            let traj = simulate(&sc, &u, scheme, TieBreak::Left).unwrap();
            assert!(traj.states.iter().all(|x| x == sc.x0()));
            assert!(traj.multipliers.iter().flatten().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn straight_line_terminal_distance() {
        for (a, want) in [(0.5, 48.0 - 8.0 * 0.5 * 3.0), (3.0, 0.0)] {
            let sc = free_scenario(Vec2::new(0.0, 48.0), 3.0);
            let u = ControlSignal::constant_for(&sc, 0.01, a).unwrap();
            let traj = simulate(&sc, &u, Scheme::VelocityProjection, TieBreak::Left).unwrap();
            let d = traj.final_state().agent(0).norm();
            assert!((d - want).abs() < 1e-9, "a={a}: {d} vs {want}");
        }
    }

    #[test]
    fn grid_must_divide_horizon() {
        let sc = free_scenario(Vec2::new(0.0, 48.0), 1.0);
        assert!(ControlSignal::constant_for(&sc, 0.3, 1.0).is_err());
        let u = ControlSignal::constant(0.01, 50, 1, 1.0).unwrap();
        assert!(simulate(&sc, &u, Scheme::VelocityProjection, TieBreak::Left).is_err());
    }

    #[test]
    fn trajectory_invariants_in_contact() {
        let sc = obstacle_scenario(Vec2::new(0.5, 48.0), 6.0);
        let u = ControlSignal::constant_for(&sc, 1e-2, 1.0).unwrap();
        let traj = simulate(&sc, &u, Scheme::VelocityProjection, TieBreak::Left).unwrap();
        for k in 0..traj.steps() {
            assert!(traj.times[k + 1] > traj.times[k]);
            let fd = difference_quotient(&traj.states[k], &traj.states[k + 1], traj.h);
            assert!(fd.max_abs_diff(&traj.velocities[k]) < 1e-12);
            assert!(traj.multipliers[k].iter().all(|&e| e >= 0.0));
        }
        for x in &traj.states {
            assert!(sc.min_signed_distance(x).unwrap() >= -DEFAULT_TOL_FEAS);
        }
        let events = extract_contacts(&traj, &sc, 1e-6).unwrap();
        assert_eq!(events.len(), 1);
        assert!(events[0].t_enter < events[0].t_exit);
    }

    #[test]
    fn no_contact_no_events() {
        let sc = obstacle_scenario(Vec2::new(20.0, 48.0), 1.0);
        let u = ControlSignal::constant_for(&sc, 1e-2, 1.0).unwrap();
        let traj = simulate(&sc, &u, Scheme::VelocityProjection, TieBreak::Left).unwrap();
        assert!(extract_contacts(&traj, &sc, 1e-6).unwrap().is_empty());
    }

    #[test]
    fn cost_values() {
        let sc = obstacle_scenario(Vec2::new(0.0, 48.0), 6.0);
        let u = ControlSignal::constant_for(&sc, 0.01, 0.0).unwrap();
        let traj = simulate(&sc, &u, Scheme::VelocityProjection, TieBreak::Left).unwrap();
        assert_eq!(cost_functional(&traj, &u, 1.0, &sc).unwrap(), 1152.0);

        let u = ControlSignal::constant_for(&sc, 0.01, 0.5).unwrap();
        let traj = simulate(&sc, &u, Scheme::VelocityProjection, TieBreak::Left).unwrap();
        let j0 = cost_functional(&traj, &u, 0.0, &sc).unwrap();
        let term = 0.5 * traj.final_state().agent(0).norm_squared();
        assert!((j0 - term).abs() < 1e-12);
        let j2 = cost_functional(&traj, &u, 2.0, &sc).unwrap();
        assert!((j2 - j0 - 0.25 * 6.0).abs() < 1e-9);

        let short = ControlSignal::constant(0.01, 10, 1, 0.5).unwrap();
        assert!(cost_functional(&traj, &short, 1.0, &sc).is_err());
    }
}
