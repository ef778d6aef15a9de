//! Admissible velocity cones and the two projections used by the time stepper:
//! velocities onto a polyhedral cone (with exact multipliers) and
//! configurations onto the non-overlap set.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{active_pairs, unit_direction, Configuration, PairKind, PairLabel, Scenario};

/// Default feasibility tolerance for [`project_configuration`] (m).
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;

/// Relative KKT tolerance every [`ProjectionResult`] is held to.
pub const KKT_TOL: f64 = 1e-8;

/// One linear constraint `⟨g, v⟩ + offset >= 0`.
///
/// `offset` is zero for the admissible cone proper; the time stepper uses a
/// positive offset `D / h` for pairs that are close but not yet touching.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeConstraint {
    pub label: PairLabel,
    pub gradient: Configuration,
    pub offset: f64,
}

/// `{v : ⟨g_k, v⟩ + b_k >= 0 for all k}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VelocityCone {
    pub dim: usize,
    pub constraints: Vec<ConeConstraint>,
}

impl VelocityCone {
    pub fn whole_space(dim: usize) -> Self {
        VelocityCone {
            dim,
            constraints: Vec::new(),
        }
    }

    /// Cone from raw gradients; labels are synthetic agent–obstacle labels
    /// `(0, k)` so that ordering follows the input order.
    pub fn from_gradients(dim: usize, gradients: Vec<Vec<f64>>) -> Result<Self> {
        let mut constraints = Vec::with_capacity(gradients.len());
        for (k, g) in gradients.into_iter().enumerate() {
            if g.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "gradient {k} has length {}, expected {dim}",
                    g.len()
                )));
            }
            if g.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "gradient {k} is not finite"
                )));
            }
            constraints.push(ConeConstraint {
                label: PairLabel::obstacle(0, k),
                gradient: Configuration(g),
                offset: 0.0,
            });
        }
        Ok(VelocityCone { dim, constraints })
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// `⟨g_k, v⟩ + b_k` for every constraint.
    pub fn slacks(&self, v: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| dot(&c.gradient.0, v) + c.offset)
            .collect()
    }
}

/// Projected velocity with per-constraint multipliers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub v: Vec<f64>,
    /// Aligned with the cone's constraints.
    pub eta: Vec<f64>,
    pub labels: Vec<PairLabel>,
    pub kkt_residual: f64,
}

impl ProjectionResult {
    /// Stationarity, dual feasibility, primal feasibility and complementarity
    /// residuals, measured independently of the solver's bookkeeping.
    pub fn kkt_residuals(&self, u: &[f64], cone: &VelocityCone) -> KktResiduals {
        let mut recon = u.to_vec();
        for (c, &e) in cone.constraints.iter().zip(&self.eta) {
            axpy_in_place(&mut recon, e, &c.gradient.0);
        }
        let stationarity = recon
            .iter()
            .zip(&self.v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let slacks = cone.slacks(&self.v);
        KktResiduals {
            stationarity,
            dual_feasibility: self.eta.iter().map(|e| (-e).max(0.0)).fold(0.0, f64::max),
            primal_feasibility: slacks.iter().map(|s| (-s).max(0.0)).fold(0.0, f64::max),
            complementarity: slacks
                .iter()
                .zip(&self.eta)
                .map(|(s, e)| (s * e).abs())
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub dual_feasibility: f64,
    pub primal_feasibility: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.dual_feasibility)
            .max(self.primal_feasibility)
            .max(self.complementarity)
    }
}

/// One constraint per pair with signed distance `<= eps_active`.
pub fn build_admissible_cone(
    x: &Configuration,
    sc: &Scenario,
    eps_active: f64,
) -> Result<VelocityCone> {
    let mut constraints = Vec::new();
    for pair in active_pairs(x, sc, eps_active)? {
        constraints.push(ConeConstraint {
            label: pair.label,
            gradient: pair.label.gradient(x, sc)?,
            offset: 0.0,
        });
    }
    Ok(VelocityCone {
        dim: x.len(),
        constraints,
    })
}

/// Euclidean projection of `u` onto the polyhedral set described by `cone`.
///
/// Dual active-set method (Goldfarb–Idnani with identity Hessian): start at
/// the unconstrained minimizer `v = u` and repeatedly add the most violated
/// constraint, dropping active constraints whose multipliers would turn
/// negative. The working set stays linearly independent, so dependent
/// gradients are handled by exchange. Ties go to the lowest constraint index.
pub fn project_velocity(u: &[f64], cone: &VelocityCone) -> Result<ProjectionResult> {
    if u.len() != cone.dim {
        return Err(Error::InvalidArgument(format!(
            "velocity has length {}, cone dimension is {}",
            u.len(),
            cone.dim
        )));
    }
    if u.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("velocity is not finite".into()));
    }
    let m = cone.len();
    let labels: Vec<PairLabel> = cone.constraints.iter().map(|c| c.label).collect();
    let u_norm = norm(u);
    if m == 0 {
        return Ok(ProjectionResult {
            v: u.to_vec(),
            eta: Vec::new(),
            labels,
            kkt_residual: 0.0,
        });
    }

    let scale = 1.0
        + u_norm
        + cone
            .constraints
            .iter()
            .map(|c| c.offset.abs())
            .fold(0.0, f64::max);
    let violation_tol = 1e-13 * scale;
    let max_iter = 50 * (m + cone.dim) + 100;

    let grads: Vec<&[f64]> = cone
        .constraints
        .iter()
        .map(|c| c.gradient.as_slice())
        .collect();
    let mut v = u.to_vec();
    let mut eta = vec![0.0; m];
    let mut active: Vec<usize> = Vec::new();
    let mut iterations = 0usize;

    loop {
        // most violated constraint outside the working set
        let mut pick: Option<(usize, f64)> = None;
        for (k, (g, c)) in grads.iter().zip(&cone.constraints).enumerate() {
            if active.contains(&k) {
                continue;
            }
            let s = dot(g, &v) + c.offset;
            if s < -violation_tol && pick.is_none_or(|(_, best)| s < best) {
                pick = Some((k, s));
            }
        }
        let Some((p, _)) = pick else { break };

        loop {
            iterations += 1;
            if iterations > max_iter {
                let res = kkt_of(u, cone, &v, &eta);
                return Err(Error::ConvergenceFailure {
                    iterations,
                    residual: res,
                });
            }
            let slack_p = dot(grads[p], &v) + cone.constraints[p].offset;
            let (r, z) = split_direction(&grads, &active, grads[p])?;
            let zz = dot(&z, &z);
            let gp2 = dot(grads[p], grads[p]);

            let full_step = if zz > 1e-14 * gp2.max(1e-300) {
                (-slack_p / zz).max(0.0)
            } else {
                f64::INFINITY
            };
            let mut partial: Option<(usize, f64)> = None;
            for (pos, &k) in active.iter().enumerate() {
                if r[pos] > 1e-14 {
                    let t = eta[k] / r[pos];
                    let better = match partial {
                        None => true,
                        Some((kb, tb)) => t < tb || (t == tb && k < active[kb]),
                    };
                    if better {
                        partial = Some((pos, t));
                    }
                }
            }
            let partial_step = partial.map_or(f64::INFINITY, |(_, t)| t);

            if !full_step.is_finite() && !partial_step.is_finite() {
                return Err(Error::Numeric(format!(
                    "constraint {} cannot be satisfied together with the working set",
                    cone.constraints[p].label
                )));
            }

            if full_step <= partial_step {
                axpy_in_place(&mut v, full_step, &z);
                for (pos, &k) in active.iter().enumerate() {
                    eta[k] = (eta[k] - full_step * r[pos]).max(0.0);
                }
                eta[p] += full_step;
                active.push(p);
                break;
            }
            let (pos_drop, t) = partial.expect("finite partial step");
            if zz > 0.0 {
                axpy_in_place(&mut v, t, &z);
            }
            for (pos, &k) in active.iter().enumerate() {
                eta[k] = (eta[k] - t * r[pos]).max(0.0);
            }
            eta[p] += t;
            let dropped = active.remove(pos_drop);
            eta[dropped] = 0.0;
        }
    }

    // rebuild v from the multipliers so stationarity holds to rounding
    let mut v_final = u.to_vec();
    for (k, g) in grads.iter().enumerate() {
        if eta[k] != 0.0 {
            axpy_in_place(&mut v_final, eta[k], g);
        }
    }
    let kkt_residual = kkt_of(u, cone, &v_final, &eta);
    if kkt_residual > KKT_TOL * (1.0 + u_norm) {
        return Err(Error::ConvergenceFailure {
            iterations,
            residual: kkt_residual,
        });
    }
    Ok(ProjectionResult {
        v: v_final,
        eta,
        labels,
        kkt_residual,
    })
}

/// Splits `g` into its component in the span of the working-set gradients
/// (coefficients `r`) and the orthogonal remainder `z`.
fn split_direction(grads: &[&[f64]], active: &[usize], g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = g.len();
    if active.is_empty() {
        return Ok((Vec::new(), g.to_vec()));
    }
    let q = active.len();
    let n = DMatrix::from_fn(dim, q, |row, col| grads[active[col]][row]);
    let gram = n.transpose() * &n;
    let rhs = n.transpose() * DVector::from_column_slice(g);
    let r = gram
        .cholesky()
        .ok_or_else(|| Error::Numeric("working-set gradients became dependent".into()))?
        .solve(&rhs);
    let z = DVector::from_column_slice(g) - &n * &r;
    Ok((r.iter().copied().collect(), z.iter().copied().collect()))
}

fn kkt_of(u: &[f64], cone: &VelocityCone, v: &[f64], eta: &[f64]) -> f64 {
    let mut recon = u.to_vec();
    for (c, &e) in cone.constraints.iter().zip(eta) {
        axpy_in_place(&mut recon, e, &c.gradient.0);
    }
    let mut res = recon
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    for (c, &e) in cone.constraints.iter().zip(eta) {
        let s = dot(&c.gradient.0, v) + c.offset;
        res = res.max((-s).max(0.0)).max((-e).max(0.0)).max((e * s).abs());
    }
    res
}

/// Amount of correction applied to one constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correction {
    pub label: PairLabel,
    pub amount: f64,
}

/// Output of [`project_configuration`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationProjection {
    pub x: Configuration,
    /// One entry per pair of the scenario, canonical order; zero if untouched.
    pub corrections: Vec<Correction>,
    pub sweeps: usize,
}

/// Local projection onto the non-overlap set by cyclic constraint-wise
/// radial corrections (Gauss–Seidel over violated pairs).
///
/// Agent–obstacle violations move the agent radially to contact; agent–agent
/// violations split the overlap equally along the line of centers.
pub fn project_configuration(
    y: &Configuration,
    sc: &Scenario,
    tol: f64,
    max_iter: usize,
) -> Result<ConfigurationProjection> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    if y.len() != 2 * sc.agent_count() {
        return Err(Error::InvalidArgument(format!(
            "configuration has {} coordinates, scenario has {} agents",
            y.len(),
            sc.agent_count()
        )));
    }
    let pairs = sc.pairs();
    let mut amounts = vec![0.0; pairs.len()];
    let mut x = y.clone();
    let mut sweeps = 0;
    loop {
        let mut changed = false;
        for (k, label) in pairs.iter().enumerate() {
            let d = label.signed_distance(&x, sc)?;
            if d >= -tol {
                continue;
            }
            changed = true;
            amounts[k] += -d;
            match label.kind {
                PairKind::AgentObstacle => {
                    let obs = sc.obstacles()[label.j];
                    let n = unit_direction(x.agent(label.i), obs.center)?;
                    let rho = sc.agents()[label.i].radius + obs.radius;
                    x.set_agent(label.i, obs.center + n * rho);
                }
                PairKind::AgentAgent => {
                    let e = unit_direction(x.agent(label.j), x.agent(label.i))?;
                    let half = -0.5 * d;
                    x.add_to_agent(label.i, -e * half);
                    x.add_to_agent(label.j, e * half);
                }
            }
        }
        if !changed {
            break;
        }
        sweeps += 1;
        if sweeps >= max_iter {
            // one last feasibility check before giving up
            let worst = sc.min_signed_distance(&x)?;
            if worst >= -tol {
                break;
            }
            return Err(Error::ConvergenceFailure {
                iterations: sweeps,
                residual: -worst,
            });
        }
    }
    Ok(ConfigurationProjection {
        x,
        corrections: pairs
            .into_iter()
            .zip(amounts)
            .map(|(label, amount)| Correction { label, amount })
            .collect(),
        sweeps,
    })
}

/// Default sweep budget: `10 · constraints + 100`.
pub fn default_max_sweeps(sc: &Scenario) -> usize {
    10 * sc.pairs().len() + 100
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy_in_place(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Agent, Obstacle};
    use crate::vec2::Vec2;

    fn cone(dim: usize, g: &[&[f64]]) -> VelocityCone {
        VelocityCone::from_gradients(dim, g.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn empty_cone_is_identity() {
        let r = project_velocity(&[1.0, -2.0, 3.0], &VelocityCone::whole_space(3)).unwrap();
        assert_eq!(r.v, vec![1.0, -2.0, 3.0]);
        assert!(r.eta.is_empty());
    }

    #[test]
    fn halfspace() {
        let r = project_velocity(&[3.0, -4.0], &cone(2, &[&[0.0, 1.0]])).unwrap();
        assert_eq!(r.v, vec![3.0, 0.0]);
        assert_eq!(r.eta, vec![4.0]);
    }

    #[test]
    fn orthant() {
        let r = project_velocity(&[-1.0, -2.0], &cone(2, &[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(r.v, vec![0.0, 0.0]);
        assert_eq!(r.eta, vec![1.0, 2.0]);
    }

    #[test]
    fn dependent_gradients_are_exchanged() {
        // 4 constraints in the plane, pairwise dependent directions
        let c = cone(2, &[&[1.0, 0.0], &[2.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let u = [-3.0, -1.0];
        let r = project_velocity(&u, &c).unwrap();
        assert!(r.v.iter().all(|x| x.abs() < 1e-12), "{:?}", r.v);
        let k = r.kkt_residuals(&u, &c);
        assert!(k.max() < 1e-12, "{k:?}");
    }

    #[test]
    fn feasible_input_passes_through() {
        let c = cone(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, -1.0]]);
        let u = [2.0, 1.0, 0.5];
        let r = project_velocity(&u, &c).unwrap();
        assert_eq!(r.v, u.to_vec());
        assert!(r.eta.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn offset_constraint() {
        let mut c = cone(2, &[&[0.0, 1.0]]);
        c.constraints[0].offset = 1.5;
        let r = project_velocity(&[0.0, -4.0], &c).unwrap();
        assert!((r.v[1] + 1.5).abs() < 1e-14);
        assert!((r.eta[0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(project_velocity(&[1.0], &cone(2, &[&[0.0, 1.0]])).is_err());
    }

    fn obstacle_scenario(start: Vec2) -> Scenario {
        Scenario::new_allow_overlap(
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
            Configuration::from_points(&[start]),
        )
        .unwrap()
    }

    #[test]
    fn admissible_cone_sizes() {
        let sc = obstacle_scenario(Vec2::new(0.0, 48.0));
        assert!(build_admissible_cone(sc.x0(), &sc, 1e-8)
            .unwrap()
            .is_empty());
        let sc = obstacle_scenario(Vec2::new(0.0, 30.0));
        assert_eq!(build_admissible_cone(sc.x0(), &sc, 1e-8).unwrap().len(), 1);

        let a = Agent {
            radius: 1.0,
            speed: 1.0,
            target: Vec2::ZERO,
        };
        let h = 3f64.sqrt();
        let x = Configuration::from_points(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, h),
        ]);
        let sc = Scenario::new_allow_overlap(vec![a; 3], vec![], 1.0, x.clone()).unwrap();
        assert_eq!(build_admissible_cone(&x, &sc, 1e-8).unwrap().len(), 3);
    }

    #[test]
    fn configuration_projection() {
        let sc = obstacle_scenario(Vec2::new(0.0, 48.0));
        let p = project_configuration(sc.x0(), &sc, 1e-10, 100).unwrap();
        assert_eq!(&p.x, sc.x0());
        assert!(p.corrections.iter().all(|c| c.amount == 0.0));

        let sc = obstacle_scenario(Vec2::new(0.0, 29.0));
        let p = project_configuration(sc.x0(), &sc, 1e-10, 100).unwrap();
        assert_eq!(p.x.agent(0), Vec2::new(0.0, 30.0));
        assert_eq!(p.corrections[0].amount, 1.0);

        let a = Agent {
            radius: 1.0,
            speed: 1.0,
            target: Vec2::ZERO,
        };
        let x = Configuration::from_points(&[Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)]);
        let sc = Scenario::new_allow_overlap(vec![a; 2], vec![], 1.0, x.clone()).unwrap();
        let p = project_configuration(&x, &sc, 1e-10, 100).unwrap();
        assert_eq!(p.x.agent(0), Vec2::new(-1.0, 0.0));
        assert_eq!(p.x.agent(1), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn configuration_projection_rejects_coincident_centers() {
        let sc = obstacle_scenario(Vec2::new(0.0, 24.0));
        assert!(matches!(
            project_configuration(sc.x0(), &sc, 1e-10, 100),
            Err(Error::DegenerateGeometry(_))
        ));
    }
}
