//! Closed-form model of one agent steering around one static disk toward a
//! target under a constant control `ā`.
//!
//! The agent travels straight to the obstacle, slides along the contact
//! circle at arc speed `ā` until the line of sight to the target becomes
//! tangent, then heads straight to the target at speed `s·ā`. Two timing
//! conventions are provided, see [`PhaseMode`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::TieBreak;
use crate::error::{Error, Result};
use crate::geometry::{unit_direction, Scenario};
use crate::vec2::Vec2;

/// Which side of the obstacle the agent goes around.
pub type Side = TieBreak;

/// How the first-contact time is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    /// `t1 = ‖x0 − x_obs‖ / (s ā)`: the full center-to-center distance.
    #[default]
    Paper,
    /// `t1 = (‖x0 − x_obs‖ − ρ) / (s ā)`: distance to actual first contact.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRunParams {
    pub x0: Vec2,
    pub x_obs: Vec2,
    pub x_tar: Vec2,
    /// Sum of agent and obstacle radii.
    pub contact_radius: f64,
    pub speed: f64,
    pub horizon: f64,
    pub tau: f64,
    pub mode: PhaseMode,
    pub side: Side,
}

impl ObstacleRunParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be > 0, got {v}"
                )))
            }
        };
        pos("contact radius", self.contact_radius)?;
        pos("speed", self.speed)?;
        pos("horizon", self.horizon)?;
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must be >= 0, got {}",
                self.tau
            )));
        }
        if (self.x_tar - self.x_obs).norm() <= self.contact_radius {
            return Err(Error::NoTangent(
                "target lies inside or on the contact circle".into(),
            ));
        }
        if (self.x0 - self.x_obs).norm() <= self.contact_radius {
            return Err(Error::InvalidArgument(
                "start lies inside or on the contact circle".into(),
            ));
        }
        Ok(())
    }

    /// Parameters for a one-agent, one-obstacle scenario.
    pub fn from_scenario(sc: &Scenario, tau: f64, mode: PhaseMode, side: Side) -> Result<Self> {
        if sc.agent_count() != 1 || sc.obstacle_count() != 1 {
            return Err(Error::Unsupported(format!(
                "closed-form model needs exactly one agent and one obstacle, got {} and {}",
                sc.agent_count(),
                sc.obstacle_count()
            )));
        }
        let agent = sc.agents()[0];
        let obs = sc.obstacles()[0];
        let p = ObstacleRunParams {
            x0: sc.x0().agent(0),
            x_obs: obs.center,
            x_tar: agent.target,
            contact_radius: agent.radius + obs.radius,
            speed: agent.speed,
            horizon: sc.horizon(),
            tau,
            mode,
            side,
        };
        p.validate()?;
        Ok(p)
    }

    fn entry_direction(&self) -> Result<Vec2> {
        unit_direction(self.x0, self.x_obs)
    }

    /// Point of first contact on the circle.
    pub fn entry_point(&self) -> Result<Vec2> {
        Ok(self.x_obs + self.entry_direction()? * self.contact_radius)
    }

    /// Tangent point on the chosen side.
    pub fn release_point(&self) -> Result<Vec2> {
        let (left, right) = tangent_points(self.x_obs, self.contact_radius, self.x_tar)?;
        Ok(match self.side {
            Side::Left => left,
            Side::Right => right,
        })
    }

    /// Angle swept on the circle from entry to release, in radians, going
    /// counter-clockwise for `Left` and clockwise for `Right`.
    pub fn swept_angle(&self) -> Result<f64> {
        let from = self.entry_direction()?;
        let to = unit_direction(self.release_point()?, self.x_obs)?;
        let ccw = from.cross(to).atan2(from.dot(to)).rem_euclid(2.0 * PI);
        let angle = match self.side {
            Side::Left => ccw,
            Side::Right => (2.0 * PI - ccw).rem_euclid(2.0 * PI),
        };
        Ok(angle)
    }

    /// `√(‖x_obs − x_tar‖² − ρ²)`, the release-to-target distance.
    pub fn tangent_length(&self) -> f64 {
        ((self.x_obs - self.x_tar).norm_squared() - self.contact_radius.powi(2)).sqrt()
    }

    /// Distance covered in the first phase under the selected mode.
    fn approach_distance(&self) -> f64 {
        let d0 = (self.x0 - self.x_obs).norm();
        match self.mode {
            PhaseMode::Paper => d0,
            PhaseMode::Geometric => d0 - self.contact_radius,
        }
    }

    fn arc(&self) -> Result<f64> {
        Ok(arc_length(
            self.swept_angle()?.to_degrees(),
            self.contact_radius,
        ))
    }

    /// `A` in `‖x(T)‖ = A − s T ā`.
    fn terminal_intercept(&self) -> Result<f64> {
        Ok(self.tangent_length() + self.approach_distance() + self.speed * self.arc()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstacleRunResult {
    pub a_bar: f64,
    pub t1: f64,
    pub theta1: f64,
    pub theta_deg: f64,
    pub arc_len: f64,
    pub x_release: Vec2,
    pub terminal_dist: f64,
    #[serde(rename = "J")]
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub a_bar: f64,
    pub t1: f64,
    pub theta1: f64,
    #[serde(rename = "J")]
    pub cost: f64,
}

/// The two points of the circle `‖p − x_obs‖ = ρ` whose tangent passes
/// through `x_tar`, returned as `(left, right)` seen from the target looking
/// at the obstacle.
pub fn tangent_points(x_obs: Vec2, rho: f64, x_tar: Vec2) -> Result<(Vec2, Vec2)> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be > 0, got {rho}"
        )));
    }
    let w = x_tar - x_obs;
    let d = w.norm();
    if d <= rho {
        return Err(Error::NoTangent(format!(
            "target at distance {d} from the center is not outside radius {rho}"
        )));
    }
    let u = w * (1.0 / d);
    let cos_a = rho / d;
    let sin_a = (1.0 - cos_a * cos_a).sqrt();
    let base = x_obs + u * (rho * cos_a);
    let off = u.perp() * (rho * sin_a);
    let (p, q) = (base + off, base - off);
    let axis = x_obs - x_tar;
    if axis.cross(p - x_tar) > 0.0 {
        Ok((p, q))
    } else {
        Ok((q, p))
    }
}

/// Angle in degrees between `entry_dir` and the direction from `x_obs` to
/// `p_release`.
pub fn contact_angle(entry_dir: Vec2, p_release: Vec2, x_obs: Vec2) -> Result<f64> {
    let n = entry_dir.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::DegenerateGeometry("zero entry direction".into()));
    }
    let r = unit_direction(p_release, x_obs)?;
    let c = (entry_dir.dot(r) / n).clamp(-1.0, 1.0);
    Ok(c.acos().to_degrees())
}

/// `π ρ θ / 180`.
pub fn arc_length(theta_deg: f64, rho: f64) -> f64 {
    PI * rho * theta_deg / 180.0
}

fn check_control(a_bar: f64) -> Result<()> {
    if a_bar.is_finite() && a_bar > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "a_bar must be > 0, got {a_bar}"
        )))
    }
}

/// First-contact and release times `(t1, ϑ1)`; arc speed is `ā`.
pub fn phase_times(a_bar: f64, params: &ObstacleRunParams) -> Result<(f64, f64)> {
    check_control(a_bar)?;
    params.validate()?;
    let t1 = params.approach_distance() / (params.speed * a_bar);
    let theta1 = t1 + params.arc()? / a_bar;
    Ok((t1, theta1))
}

/// Distance to the target at `T`, clamped at zero once the target is reached.
pub fn terminal_distance(a_bar: f64, params: &ObstacleRunParams) -> Result<f64> {
    let (_, theta1) = phase_times(a_bar, params)?;
    Ok((params.tangent_length() + (theta1 - params.horizon) * params.speed * a_bar).max(0.0))
}

/// `½ ‖x(T) − x_tar‖² + (τ/2) ā² T`.
pub fn cost_closed_form(a_bar: f64, params: &ObstacleRunParams) -> Result<f64> {
    let dist = terminal_distance(a_bar, params)?;
    Ok(0.5 * dist * dist + 0.5 * params.tau * a_bar * a_bar * params.horizon)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut guard = 0;
    while hi - lo > tol {
        guard += 1;
        if guard > 500 {
            return Err(Error::Numeric(
                "golden-section search did not shrink".into(),
            ));
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Stationary point `ā* = s A / (s² T + τ)` of the unclamped cost.
pub fn stationary_control(params: &ObstacleRunParams) -> Result<f64> {
    params.validate()?;
    let s = params.speed;
    let a = params.terminal_intercept()?;
    let denom = s * s * params.horizon + params.tau;
    Ok(s * a / denom)
}

/// Minimize the closed-form cost over constant controls `ā > 0`.
///
/// The stationary point is cross-checked against a golden-section search on
/// `[1e-3, 10 s]`.
pub fn optimize_constant_control(params: &ObstacleRunParams) -> Result<ObstacleRunResult> {
    params.validate()?;
    let a_star = stationary_control(params)?;
    let (lo, hi) = (1e-3, 10.0 * params.speed);
    if !(a_star > lo && a_star < hi) {
        return Err(Error::Numeric(format!(
            "optimal control {a_star} outside the search bracket [{lo}, {hi}]"
        )));
    }
    let a_gs = golden_section(|a| cost_closed_form(a, params), lo, hi, 1e-8)?;
    let j_star = cost_closed_form(a_star, params)?;
    let j_gs = cost_closed_form(a_gs, params)?;
    // with tau = 0 the minimizer is not unique; compare values instead
    if (a_star - a_gs).abs() > 1e-6 && j_star > j_gs + 1e-9 * (1.0 + j_gs.abs()) {
        return Err(Error::Numeric(format!(
            "closed-form optimum {a_star} disagrees with golden-section {a_gs}"
        )));
    }
    result_for(a_star, params)
}

/// Full result record for a given constant control.
pub fn result_for(a_bar: f64, params: &ObstacleRunParams) -> Result<ObstacleRunResult> {
    let (t1, theta1) = phase_times(a_bar, params)?;
    let theta = params.swept_angle()?;
    Ok(ObstacleRunResult {
        a_bar,
        t1,
        theta1,
        theta_deg: theta.to_degrees(),
        arc_len: arc_length(theta.to_degrees(), params.contact_radius),
        x_release: params.release_point()?,
        terminal_dist: terminal_distance(a_bar, params)?,
        cost: cost_closed_form(a_bar, params)?,
    })
}

/// One optimized row per `τ`, in input order.
pub fn sweep_table(taus: &[f64], params: &ObstacleRunParams) -> Result<Vec<SweepRow>> {
    taus.iter()
        .map(|&tau| {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tau must be >= 0, got {tau}"
                )));
            }
            let p = ObstacleRunParams { tau, ..*params };
            let r = optimize_constant_control(&p)?;
            Ok(SweepRow {
                tau,
                a_bar: r.a_bar,
                t1: r.t1,
                theta1: r.theta1,
                cost: r.cost,
            })
        })
        .collect()
}

/// `start, start + step, …` up to `stop` inclusive (to within half a step).
pub fn tau_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidArgument(format!(
            "empty tau range {start}:{stop}:{step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// The three-phase path for a constant control, evaluable at any time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewisePath {
    pub params: ObstacleRunParams,
    pub a_bar: f64,
    pub t1: f64,
    pub theta1: f64,
    entry: Vec2,
    entry_dir: Vec2,
    release: Vec2,
    approach_speed: f64,
    arc_angle: f64,
}

impl PiecewisePath {
    pub fn new(a_bar: f64, params: &ObstacleRunParams) -> Result<Self> {
        let (t1, theta1) = phase_times(a_bar, params)?;
        let entry = params.entry_point()?;
        let approach = (params.x0 - entry).norm();
        Ok(PiecewisePath {
            params: *params,
            a_bar,
            t1,
            theta1,
            entry,
            entry_dir: params.entry_direction()?,
            release: params.release_point()?,
            approach_speed: approach / t1,
            arc_angle: params.swept_angle()?,
        })
    }

    fn orientation(&self) -> f64 {
        match self.params.side {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    /// Position at time `t` (clamped to `[0, T]`).
    pub fn position(&self, t: f64) -> Vec2 {
        let t = t.clamp(0.0, self.params.horizon);
        let p = &self.params;
        if t <= self.t1 {
            let dir = (self.entry - p.x0) * (1.0 / (self.entry - p.x0).norm());
            return p.x0 + dir * (self.approach_speed * t);
        }
        if t <= self.theta1 {
            let phi = ((t - self.t1) * self.a_bar / p.contact_radius).min(self.arc_angle);
            return p.x_obs + self.entry_dir.rotated(self.orientation() * phi) * p.contact_radius;
        }
        let to_target = p.x_tar - self.release;
        let len = to_target.norm();
        let travelled = ((t - self.theta1) * p.speed * self.a_bar).min(len);
        self.release + to_target * (travelled / len)
    }

    /// Velocity at time `t` (left limit at phase boundaries).
    pub fn velocity(&self, t: f64) -> Vec2 {
        let p = &self.params;
        if t <= self.t1 {
            let dir = (self.entry - p.x0) * (1.0 / (self.entry - p.x0).norm());
            return dir * self.approach_speed;
        }
        if t <= self.theta1 {
            let phi = (t - self.t1) * self.a_bar / p.contact_radius;
            let radial = self.entry_dir.rotated(self.orientation() * phi);
            return radial.perp() * (self.orientation() * self.a_bar);
        }
        let to_target = p.x_tar - self.release;
        let len = to_target.norm();
        if (t - self.theta1) * p.speed * self.a_bar >= len {
            return Vec2::ZERO;
        }
        to_target * (p.speed * self.a_bar / len)
    }

    /// Nodes `k h` for `k = 0..=round(T / h)`.
    pub fn sample(&self, h: f64) -> Result<Vec<(f64, Vec2)>> {
        let n = crate::dynamics::step_count(self.params.horizon, h)?;
        Ok((0..=n)
            .map(|k| {
                let t = k as f64 * h;
                (t, self.position(t))
            })
            .collect())
    }
}

/// Sampled three-phase path on a grid of step `h`.
pub fn piecewise_trajectory(
    a_bar: f64,
    params: &ObstacleRunParams,
    h: f64,
) -> Result<Vec<(f64, Vec2)>> {
    PiecewisePath::new(a_bar, params)?.sample(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn section3(tau: f64, mode: PhaseMode, side: Side) -> ObstacleRunParams {
        ObstacleRunParams {
            x0: Vec2::new(0.0, 48.0),
            x_obs: Vec2::new(0.0, 24.0),
            x_tar: Vec2::ZERO,
            contact_radius: 6.0,
            speed: 8.0,
            horizon: 6.0,
            tau,
            mode,
            side,
        }
    }

    #[test]
    fn tangent_point_values() {
        let (l, r) = tangent_points(Vec2::new(0.0, 24.0), 6.0, Vec2::ZERO).unwrap();
        let x = 1.5 * 15f64.sqrt();
        assert!(
            (l.x + x).abs() < 1e-12 && (l.y - 22.5).abs() < 1e-12,
            "{l:?}"
        );
        assert!(
            (r.x - x).abs() < 1e-12 && (r.y - 22.5).abs() < 1e-12,
            "{r:?}"
        );
        for p in [l, r] {
            assert!(((p - Vec2::new(0.0, 24.0)).norm() - 6.0).abs() < 1e-12);
        }
        assert!(matches!(
            tangent_points(Vec2::new(0.0, 6.0), 6.0, Vec2::ZERO),
            Err(Error::NoTangent(_))
        ));
    }

    #[test]
    fn angle_and_arc() {
        let rel = Vec2::new(1.5 * 15f64.sqrt(), 22.5);
        let obs = Vec2::new(0.0, 24.0);
        let th = contact_angle(Vec2::new(0.0, 1.0), rel, obs).unwrap();
        assert!((th - 104.48).abs() < 0.005, "{th}");
        let th_l = contact_angle(Vec2::new(0.0, 1.0), Vec2::new(-rel.x, rel.y), obs).unwrap();
        assert!((th - th_l).abs() < 1e-12);
        assert_eq!(
            contact_angle(Vec2::new(0.0, 1.0), Vec2::new(0.0, 30.0), obs).unwrap(),
            0.0
        );
        assert!(contact_angle(Vec2::ZERO, rel, obs).is_err());

        assert!((arc_length(104.4775, 6.0) - 10.9411).abs() < 5e-4);
        assert_eq!(arc_length(0.0, 6.0), 0.0);
        assert!((arc_length(180.0, 1.0) - PI).abs() < 1e-15);
    }

    #[test]
    fn swept_angle_matches_contact_angle_on_symmetric_data() {
        for side in [Side::Left, Side::Right] {
            let p = section3(1.0, PhaseMode::Paper, side);
            let th = p.swept_angle().unwrap().to_degrees();
            let c =
                contact_angle(Vec2::new(0.0, 1.0), p.release_point().unwrap(), p.x_obs).unwrap();
            assert!((th - c).abs() < 1e-10);
        }
    }

    #[test]
    fn phase_time_values() {
        let p = section3(1.0, PhaseMode::Paper, Side::Left);
        let (t1, th1) = phase_times(2.8004, &p).unwrap();
        assert!((t1 - 1.0713).abs() < 2e-3, "{t1}");
        assert!((th1 - 4.9783).abs() < 2e-3, "{th1}");
        // algebraic identities of the paper-mode bookkeeping
        let arc = arc_length(p.swept_angle().unwrap().to_degrees(), 6.0);
        assert!((t1 * 8.0 * 2.8004 - 24.0).abs() < 1e-12);
        assert!(((th1 - t1) * 2.8004 - arc).abs() < 1e-12);
        let g = section3(1.0, PhaseMode::Geometric, Side::Left);
        let (t1g, _) = phase_times(2.8004, &g).unwrap();
        assert!((t1g - 18.0 / 22.4032).abs() < 1e-12);
        let (a, b) = phase_times(1e6, &p).unwrap();
        let (c, d) = phase_times(1e7, &p).unwrap();
        assert!(c < a && d < b && d < 1e-4);
        assert!(phase_times(0.0, &p).is_err());
    }

    #[test]
    fn terminal_distance_values() {
        let p = section3(1.0, PhaseMode::Paper, Side::Left);
        // A − 48 ā with A = √540 + 24 + 8·arc and the exact arc 6·acos(−1/4);
        // the rounded arc 10.9411 would give A = 134.7667 and d = 0.3501
        let arc = 6.0 * (-0.25f64).acos();
        let a_int = 540f64.sqrt() + 24.0 + 8.0 * arc;
        assert!((a_int - 134.7648).abs() < 1e-4, "{a_int}");
        let d = terminal_distance(2.8004, &p).unwrap();
        assert!((d - (a_int - 48.0 * 2.8004)).abs() < 1e-12);
        assert!((d - 0.3456).abs() < 1e-3, "{d}");
        // ϑ1 = T leaves exactly the tangent length
        let a_t = (24.0 / 8.0 + arc) / 6.0;
        let d = terminal_distance(a_t, &p).unwrap();
        assert!((d - 540f64.sqrt()).abs() < 1e-9);
        assert_eq!(terminal_distance(100.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn cost_values() {
        let p = section3(1.0, PhaseMode::Paper, Side::Left);
        assert!((cost_closed_form(2.8004, &p).unwrap() - 23.5871).abs() < 0.01);
        let p2 = section3(2.0, PhaseMode::Paper, Side::Left);
        assert!((cost_closed_form(2.7931, &p2).unwrap() - 47.052).abs() < 0.05);
        let p0 = section3(0.0, PhaseMode::Paper, Side::Left);
        assert_eq!(cost_closed_form(100.0, &p0).unwrap(), 0.0);
        assert!(cost_closed_form(-1.0, &p).is_err());
    }

    #[test]
    fn optimum_values() {
        let r = optimize_constant_control(&section3(1.0, PhaseMode::Paper, Side::Left)).unwrap();
        assert!((r.a_bar - 2.8004).abs() < 2e-3);
        assert!((r.t1 - 1.0713).abs() < 2e-3);
        assert!((r.theta1 - 4.9783).abs() < 2e-3);
        assert!((r.cost - 23.5871).abs() < 0.01);
        let r = optimize_constant_control(&section3(10.0, PhaseMode::Paper, Side::Left)).unwrap();
        assert!((r.a_bar - 2.7364).abs() < 2e-3);
        assert!((r.cost - 230.483).abs() < 0.05);

        let mut prev = f64::INFINITY;
        for tau in [0.0, 1.0, 10.0, 100.0, 1e4, 1e6] {
            let a = stationary_control(&section3(tau, PhaseMode::Paper, Side::Left)).unwrap();
            assert!(a < prev);
            prev = a;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn zero_tau_optimum_reaches_target() {
        let r = optimize_constant_control(&section3(0.0, PhaseMode::Paper, Side::Left)).unwrap();
        assert!(r.cost.abs() < 1e-18);
        assert!(r.terminal_dist.abs() < 1e-9);
    }

    #[test]
    fn sweep_rows() {
        let p = section3(1.0, PhaseMode::Paper, Side::Left);
        let rows = sweep_table(&[2.0, 4.5], &p).unwrap();
        assert!((rows[0].a_bar - 2.7931).abs() < 2e-3);
        assert!((rows[0].t1 - 1.0741).abs() < 2e-3);
        assert!((rows[0].theta1 - 4.9913).abs() < 2e-3);
        assert!((rows[0].cost - 47.052).abs() < 0.05);
        // ϑ1 = (24/8 + arc)/ā at ā* ≈ 2.7751
        assert!((rows[1].theta1 - 5.0236).abs() < 2e-3);
        assert!(sweep_table(&[-1.0], &p).is_err());
    }

    #[test]
    fn tau_ranges() {
        let t = tau_range(1.0, 10.0, 0.5).unwrap();
        assert_eq!(t.len(), 19);
        assert_eq!(t[18], 10.0);
        assert_eq!(tau_range(2.0, 2.0, 1.0).unwrap(), vec![2.0]);
        assert!(tau_range(3.0, 2.0, 1.0).is_err());
        assert!(tau_range(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn path_phases() {
        let p = section3(1.0, PhaseMode::Paper, Side::Left);
        let r = optimize_constant_control(&p).unwrap();
        let path = PiecewisePath::new(r.a_bar, &p).unwrap();
        let rel = path.position(r.theta1);
        assert!((rel.x + 1.5 * 15f64.sqrt()).abs() < 1e-9 && (rel.y - 22.5).abs() < 1e-9);
        // continuity at phase boundaries
        for tb in [r.t1, r.theta1] {
            let gap = (path.position(tb - 1e-12) - path.position(tb + 1e-12)).norm();
            assert!(gap < 1e-9, "{gap}");
        }
        // paper-mode approach speed is (d0 − ρ)/t1 = 6 ā for this data
        assert!((path.velocity(0.5).norm() - 6.0 * r.a_bar).abs() < 1e-9);
        for (t, x) in path.sample(1e-3).unwrap() {
            if t >= r.t1 && t <= r.theta1 {
                assert!(((x - p.x_obs).norm() - 6.0).abs() < 1e-9);
            }
        }
        // final point on the release–target segment
        let end = path.position(p.horizon);
        assert!((end - rel).cross(p.x_tar - rel).abs() < 1e-9);
        assert!((end - p.x_tar).norm() - r.terminal_dist < 1e-9);
    }
}
