//! Disk geometry: scenarios, configurations, signed distances and contact
//! gradients for agent–agent and agent–obstacle pairs.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Default activation band for contacts (m).
pub const DEFAULT_EPS_ACTIVE: f64 = 1e-8;

/// One disk-shaped agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub radius: f64,
    pub speed: f64,
    pub target: Vec2,
}

/// A static disk obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

/// Flat vector of agent centers; agent `i` occupies slots `2i` and `2i + 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Configuration(pub Vec<f64>);

impl Configuration {
    pub fn zeros(agents: usize) -> Self {
        Configuration(vec![0.0; 2 * agents])
    }

    pub fn from_points(points: &[Vec2]) -> Self {
        Configuration(points.iter().flat_map(|p| [p.x, p.y]).collect())
    }

    pub fn from_vec(coords: Vec<f64>) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "configuration length {} is odd",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "configuration has non-finite entries".into(),
            ));
        }
        Ok(Configuration(coords))
    }

    pub fn agent_count(&self) -> usize {
        self.0.len() / 2
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn agent(&self, i: usize) -> Vec2 {
        Vec2::new(self.0[2 * i], self.0[2 * i + 1])
    }

    pub fn set_agent(&mut self, i: usize, p: Vec2) {
        self.0[2 * i] = p.x;
        self.0[2 * i + 1] = p.y;
    }

    pub fn add_to_agent(&mut self, i: usize, d: Vec2) {
        self.0[2 * i] += d.x;
        self.0[2 * i + 1] += d.y;
    }

    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.0.chunks_exact(2).map(|c| Vec2::new(c[0], c[1]))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Configuration) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &Configuration) -> Configuration {
        Configuration(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &Configuration) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for Configuration {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Configuration {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Validated problem data: agents, obstacles, horizon and start configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    agents: Vec<Agent>,
    obstacles: Vec<Obstacle>,
    horizon: f64,
    x0: Configuration,
}

impl Scenario {
    /// Builds a scenario, rejecting bad data and any overlap in `x0`.
    pub fn new(
        agents: Vec<Agent>,
        obstacles: Vec<Obstacle>,
        horizon: f64,
        x0: Configuration,
    ) -> Result<Self> {
        let sc = Self::new_allow_overlap(agents, obstacles, horizon, x0)?;
        sc.check_feasible(&sc.x0, 0.0)
            .map_err(|e| Error::Validation(format!("x0 is infeasible: {e}")))?;
        Ok(sc)
    }

    /// Same as [`Scenario::new`] but accepts an overlapping start.
    pub fn new_allow_overlap(
        agents: Vec<Agent>,
        obstacles: Vec<Obstacle>,
        horizon: f64,
        x0: Configuration,
    ) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::Validation("scenario has no agents".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Validation(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        for (i, a) in agents.iter().enumerate() {
            if !(a.radius.is_finite() && a.radius > 0.0) {
                return Err(Error::Validation(format!(
                    "agents[{i}].radius must be positive, got {}",
                    a.radius
                )));
            }
            if !(a.speed.is_finite() && a.speed > 0.0) {
                return Err(Error::Validation(format!(
                    "agents[{i}].speed must be positive, got {}",
                    a.speed
                )));
            }
            if !a.target.is_finite() {
                return Err(Error::Validation(format!(
                    "agents[{i}].target is not finite"
                )));
            }
        }
        for (j, o) in obstacles.iter().enumerate() {
            if !(o.radius.is_finite() && o.radius > 0.0) {
                return Err(Error::Validation(format!(
                    "obstacles[{j}].radius must be positive, got {}",
                    o.radius
                )));
            }
            if !o.center.is_finite() {
                return Err(Error::Validation(format!(
                    "obstacles[{j}].center is not finite"
                )));
            }
        }
        if x0.agent_count() != agents.len() || !x0.len().is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "x0 has {} coordinates, expected {}",
                x0.len(),
                2 * agents.len()
            )));
        }
        if x0.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("x0 is not finite".into()));
        }
        Ok(Scenario {
            agents,
            obstacles,
            horizon,
            x0,
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn x0(&self) -> &Configuration {
        &self.x0
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn obstacle_count(&self) -> usize {
        self.obstacles.len()
    }

    pub fn max_speed(&self) -> f64 {
        self.agents.iter().map(|a| a.speed).fold(0.0, f64::max)
    }

    /// Copy with a different start configuration (not re-validated for overlap).
    pub fn with_x0(&self, x0: Configuration) -> Result<Self> {
        Self::new_allow_overlap(
            self.agents.clone(),
            self.obstacles.clone(),
            self.horizon,
            x0,
        )
    }

    /// Copy with a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new_allow_overlap(
            self.agents.clone(),
            self.obstacles.clone(),
            horizon,
            self.x0.clone(),
        )
    }

    /// Every pair in canonical order.
    pub fn pairs(&self) -> Vec<PairLabel> {
        all_pairs(self.agent_count(), self.obstacle_count())
    }

    /// Errors naming the first pair whose signed distance is below `-tol`.
    pub fn check_feasible(&self, x: &Configuration, tol: f64) -> Result<()> {
        for label in self.pairs() {
            let d = label.signed_distance(x, self)?;
            if d < -tol {
                return Err(Error::Validation(format!(
                    "{label} overlaps (signed distance {d})"
                )));
            }
        }
        Ok(())
    }

    /// Smallest signed distance over all pairs; `+inf` when there are none.
    pub fn min_signed_distance(&self, x: &Configuration) -> Result<f64> {
        let mut best = f64::INFINITY;
        for label in self.pairs() {
            best = best.min(label.signed_distance(x, self)?);
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    AgentAgent,
    AgentObstacle,
}

/// Identifies one non-overlap constraint. For agent–agent pairs `i < j`;
/// for agent–obstacle pairs `i` is the agent and `j` the obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairLabel {
    pub kind: PairKind,
    pub i: usize,
    pub j: usize,
}

impl PairLabel {
    pub fn agents(i: usize, j: usize) -> Self {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        PairLabel {
            kind: PairKind::AgentAgent,
            i,
            j,
        }
    }

    pub fn obstacle(agent: usize, obstacle: usize) -> Self {
        PairLabel {
            kind: PairKind::AgentObstacle,
            i: agent,
            j: obstacle,
        }
    }

    pub fn signed_distance(&self, x: &Configuration, sc: &Scenario) -> Result<f64> {
        match self.kind {
            PairKind::AgentAgent => signed_distance_agents(x, self.i, self.j, sc),
            PairKind::AgentObstacle => signed_distance_obstacle(x, self.i, self.j, sc),
        }
    }

    pub fn gradient(&self, x: &Configuration, sc: &Scenario) -> Result<Configuration> {
        match self.kind {
            PairKind::AgentAgent => pair_gradient(x, self.i, self.j),
            PairKind::AgentObstacle => obstacle_gradient(x, self.i, self.j, sc),
        }
    }

    /// Does this constraint involve agent `k`?
    pub fn involves(&self, k: usize) -> bool {
        match self.kind {
            PairKind::AgentAgent => self.i == k || self.j == k,
            PairKind::AgentObstacle => self.i == k,
        }
    }
}

impl std::fmt::Display for PairLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            PairKind::AgentAgent => write!(f, "agent {} / agent {}", self.i, self.j),
            PairKind::AgentObstacle => write!(f, "agent {} / obstacle {}", self.i, self.j),
        }
    }
}

/// A constraint together with its signed distance at some configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPair {
    pub label: PairLabel,
    pub value: f64,
}

/// All pairs: agent–agent by `(i, j)`, then agent–obstacle by `(i, j)`.
pub fn all_pairs(agents: usize, obstacles: usize) -> Vec<PairLabel> {
    let mut out = Vec::with_capacity(agents * agents.saturating_sub(1) / 2 + agents * obstacles);
    for i in 0..agents {
        for j in i + 1..agents {
            out.push(PairLabel::agents(i, j));
        }
    }
    for i in 0..agents {
        for j in 0..obstacles {
            out.push(PairLabel::obstacle(i, j));
        }
    }
    out
}

fn check_agent(x: &Configuration, i: usize, sc: &Scenario) -> Result<()> {
    if i >= sc.agent_count() || 2 * i + 1 >= x.len() {
        return Err(Error::InvalidArgument(format!(
            "agent index {i} out of range ({} agents)",
            sc.agent_count()
        )));
    }
    Ok(())
}

/// `‖x_i − x_j‖ − (R_i + R_j)`; negative iff the disks overlap.
pub fn signed_distance_agents(x: &Configuration, i: usize, j: usize, sc: &Scenario) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "agent pair needs distinct indices, got ({i}, {j})"
        )));
    }
    check_agent(x, i, sc)?;
    check_agent(x, j, sc)?;
    let r = sc.agents[i].radius + sc.agents[j].radius;
    Ok((x.agent(i) - x.agent(j)).norm() - r)
}

/// `‖x_i − c_j‖ − (R_i + r_j)` for obstacle `j`.
pub fn signed_distance_obstacle(
    x: &Configuration,
    i: usize,
    j: usize,
    sc: &Scenario,
) -> Result<f64> {
    check_agent(x, i, sc)?;
    let obs = sc.obstacles.get(j).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "obstacle index {j} out of range ({} obstacles)",
            sc.obstacle_count()
        ))
    })?;
    Ok((x.agent(i) - obs.center).norm() - (sc.agents[i].radius + obs.radius))
}

/// `(a − b) / ‖a − b‖`.
pub fn unit_direction(a: Vec2, b: Vec2) -> Result<Vec2> {
    let d = a - b;
    let n = d.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "direction between coincident points ({}, {})",
            a.x, a.y
        )));
    }
    Ok(d * (1.0 / n))
}

/// Gradient of the agent–agent signed distance: block `i` is `−e_ij`,
/// block `j` is `+e_ij` with `e_ij = (x_j − x_i)/‖x_j − x_i‖`.
pub fn pair_gradient(x: &Configuration, i: usize, j: usize) -> Result<Configuration> {
    let n = x.agent_count();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidArgument(format!(
            "invalid agent pair ({i}, {j}) for {n} agents"
        )));
    }
    let e = unit_direction(x.agent(j), x.agent(i)).map_err(|_| {
        Error::DegenerateGeometry(format!("agents {i} and {j} have coincident centers"))
    })?;
    let mut g = Configuration::zeros(n);
    g.set_agent(i, -e);
    g.set_agent(j, e);
    Ok(g)
}

/// Gradient of the agent–obstacle signed distance; only block `i` is nonzero
/// since obstacle centers are not state variables.
pub fn obstacle_gradient(
    x: &Configuration,
    i: usize,
    j: usize,
    sc: &Scenario,
) -> Result<Configuration> {
    check_agent(x, i, sc)?;
    let obs = sc
        .obstacles
        .get(j)
        .ok_or_else(|| Error::InvalidArgument(format!("obstacle index {j} out of range")))?;
    let e = unit_direction(x.agent(i), obs.center).map_err(|_| {
        Error::DegenerateGeometry(format!(
            "agent {i} center coincides with obstacle {j} center"
        ))
    })?;
    let mut g = Configuration::zeros(x.agent_count());
    g.set_agent(i, e);
    Ok(g)
}

/// Pairs whose signed distance is `<= eps_active`, in canonical order.
pub fn active_pairs(x: &Configuration, sc: &Scenario, eps_active: f64) -> Result<Vec<ContactPair>> {
    if eps_active.is_nan() || eps_active < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eps_active must be >= 0, got {eps_active}"
        )));
    }
    let mut out = Vec::new();
    for label in sc.pairs() {
        let value = label.signed_distance(x, sc)?;
        if value <= eps_active {
            out.push(ContactPair { label, value });
        }
    }
    Ok(out)
}
