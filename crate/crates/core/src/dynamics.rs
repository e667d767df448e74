//! Discrete-time system models and rollouts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ChannelRange, NormalizationMap, Trace};

/// Built-in dynamics. All use a unit sample period scaled by `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `x' = x + v cosθ`, `y' = y + v sinθ`, `θ' = θ + w`.
    Unicycle,
    /// As [`ModelKind::Unicycle`] but with `θ' = θ + v w`.
    CurvatureUnicycle,
    /// Planar double integrator over `[x, y, vx, vy]` with input `[ux, uy]`.
    DoubleIntegrator,
    /// `x' = x + ux`, `y' = y + uy`.
    PlanarIntegrator,
}

impl ModelKind {
    pub fn state_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Unicycle | ModelKind::CurvatureUnicycle => &["x", "y", "theta"],
            ModelKind::DoubleIntegrator => &["x", "y", "vx", "vy"],
            ModelKind::PlanarIntegrator => &["x", "y"],
        }
    }

    pub fn input_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Unicycle | ModelKind::CurvatureUnicycle => &["v", "w"],
            ModelKind::DoubleIntegrator | ModelKind::PlanarIntegrator => &["ux", "uy"],
        }
    }

    pub fn state_dim(self) -> usize {
        self.state_names().len()
    }

    pub fn input_dim(self) -> usize {
        self.input_names().len()
    }

    fn step(self, dt: f64, q: &[f64], u: &[f64], next: &mut [f64]) {
        match self {
            ModelKind::Unicycle | ModelKind::CurvatureUnicycle => {
                let (v, w) = (u[0], u[1]);
                let (sin, cos) = q[2].sin_cos();
                next[0] = q[0] + dt * cos * v;
                next[1] = q[1] + dt * sin * v;
                next[2] = if self == ModelKind::Unicycle {
                    q[2] + dt * w
                } else {
                    q[2] + dt * v * w
                };
            }
            ModelKind::DoubleIntegrator => {
                next[0] = q[0] + dt * q[2];
                next[1] = q[1] + dt * q[3];
                next[2] = q[2] + dt * u[0];
                next[3] = q[3] + dt * u[1];
            }
            ModelKind::PlanarIntegrator => {
                next[0] = q[0] + dt * u[0];
                next[1] = q[1] + dt * u[1];
            }
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "unicycle" => ModelKind::Unicycle,
            "curvature_unicycle" => ModelKind::CurvatureUnicycle,
            "double_integrator" => ModelKind::DoubleIntegrator,
            "planar_integrator" => ModelKind::PlanarIntegrator,
            other => return Err(Error::InvalidModel(format!("unknown model `{other}`"))),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Unicycle => "unicycle",
            ModelKind::CurvatureUnicycle => "curvature_unicycle",
            ModelKind::DoubleIntegrator => "double_integrator",
            ModelKind::PlanarIntegrator => "planar_integrator",
        })
    }
}

/// A state component exposed as a named trace channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputChannel {
    pub state: usize,
    pub channel: String,
}

/// State sequence `q[0..=T]` in physical units.
pub type Trajectory = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    kind: ModelKind,
    dt: f64,
    q0: Vec<f64>,
    state_box: Vec<ChannelRange>,
    input_box: Vec<ChannelRange>,
    outputs: Vec<OutputChannel>,
}

impl SystemModel {
    pub fn new(
        kind: ModelKind,
        q0: Vec<f64>,
        state_box: Vec<ChannelRange>,
        input_box: Vec<ChannelRange>,
        outputs: Vec<OutputChannel>,
    ) -> Result<Self> {
        let (n, m) = (kind.state_dim(), kind.input_dim());
        if q0.len() != n || state_box.len() != n {
            return Err(Error::InvalidModel(format!(
                "{kind} has {n} states; got q0 of length {} and {} state bounds",
                q0.len(),
                state_box.len()
            )));
        }
        if input_box.len() != m {
            return Err(Error::InvalidModel(format!(
                "{kind} has {m} inputs; got {} input bounds",
                input_box.len()
            )));
        }
        for r in state_box.iter().chain(&input_box) {
            if !(r.min.is_finite() && r.max.is_finite() && r.max > r.min) {
                return Err(Error::InvalidModel(format!(
                    "bound [{}, {}] is empty or not finite",
                    r.min, r.max
                )));
            }
        }
        for (i, (&v, r)) in q0.iter().zip(&state_box).enumerate() {
            if !r.contains(v) {
                return Err(Error::StateOutOfBox {
                    index: 0,
                    component: i,
                    value: v,
                    min: r.min,
                    max: r.max,
                });
            }
        }
        if outputs.is_empty() {
            return Err(Error::InvalidModel("output map is empty".into()));
        }
        for (i, o) in outputs.iter().enumerate() {
            if o.state >= n {
                return Err(Error::InvalidModel(format!(
                    "output `{}` refers to state {} but {kind} has {n}",
                    o.channel, o.state
                )));
            }
            if outputs[..i].iter().any(|p| p.channel == o.channel) {
                return Err(Error::InvalidModel(format!(
                    "duplicate output channel `{}`",
                    o.channel
                )));
            }
        }
        Ok(Self {
            kind,
            dt: 1.0,
            q0,
            state_box,
            input_box,
            outputs,
        })
    }

    /// Outputs every state under its default name.
    pub fn with_all_outputs(
        kind: ModelKind,
        q0: Vec<f64>,
        state_box: Vec<ChannelRange>,
        input_box: Vec<ChannelRange>,
    ) -> Result<Self> {
        let outputs = kind
            .state_names()
            .iter()
            .enumerate()
            .map(|(state, name)| OutputChannel {
                state,
                channel: (*name).to_string(),
            })
            .collect();
        Self::new(kind, q0, state_box, input_box, outputs)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidModel(format!("dt must be positive, got {dt}")));
        }
        self.dt = dt;
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn state_dim(&self) -> usize {
        self.kind.state_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.kind.input_dim()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.q0
    }

    pub fn state_box(&self) -> &[ChannelRange] {
        &self.state_box
    }

    pub fn input_box(&self) -> &[ChannelRange] {
        &self.input_box
    }

    pub fn outputs(&self) -> &[OutputChannel] {
        &self.outputs
    }

    /// Physical ranges of the output channels, used to normalize traces.
    pub fn normalization(&self) -> NormalizationMap {
        let mut map = NormalizationMap::default();
        for o in &self.outputs {
            map.insert(o.channel.clone(), self.state_box[o.state]);
        }
        map
    }

    /// Clamps one flat input vector onto the input box in place.
    pub fn project_inputs(&self, flat: &mut [f64]) {
        let m = self.input_dim();
        for (i, v) in flat.iter_mut().enumerate() {
            let r = &self.input_box[i % m];
            *v = v.clamp(r.min, r.max);
        }
    }

    /// Rolls out `q[k+1] = f(q[k], u[k])` from `q0`, returning `T + 1` states.
    pub fn simulate(&self, inputs: &[Vec<f64>]) -> Result<Trajectory> {
        let m = self.input_dim();
        let mut flat = Vec::with_capacity(inputs.len() * m);
        for (k, u) in inputs.iter().enumerate() {
            if u.len() != m {
                return Err(Error::InvalidModel(format!(
                    "input {k} has {} components, expected {m}",
                    u.len()
                )));
            }
            flat.extend_from_slice(u);
        }
        self.simulate_flat(&flat)
    }

    /// As [`SystemModel::simulate`] with inputs laid out as `u[0] ++ u[1] ++ ...`.
    pub fn simulate_flat(&self, flat: &[f64]) -> Result<Trajectory> {
        let m = self.input_dim();
        if !flat.len().is_multiple_of(m) {
            return Err(Error::InvalidModel(format!(
                "flat input length {} is not a multiple of {m}",
                flat.len()
            )));
        }
        let steps = flat.len() / m;
        let mut traj = Vec::with_capacity(steps + 1);
        traj.push(self.q0.clone());
        for (k, u) in flat.chunks(m).enumerate() {
            for (c, (&v, r)) in u.iter().zip(&self.input_box).enumerate() {
                if !r.contains(v) {
                    return Err(Error::InputOutOfBox {
                        index: k,
                        component: c,
                        value: v,
                        min: r.min,
                        max: r.max,
                    });
                }
            }
            let mut next = vec![0.0; self.state_dim()];
            self.kind.step(self.dt, &traj[k], u, &mut next);
            traj.push(next);
        }
        Ok(traj)
    }

    /// First state component that leaves the state box, if any.
    pub fn check_states(&self, traj: &[Vec<f64>]) -> Result<()> {
        for (k, q) in traj.iter().enumerate() {
            for (i, (&v, r)) in q.iter().zip(&self.state_box).enumerate() {
                if !r.contains(v) {
                    return Err(Error::StateOutOfBox {
                        index: k,
                        component: i,
                        value: v,
                        min: r.min,
                        max: r.max,
                    });
                }
            }
        }
        Ok(())
    }

    /// Every state component, physical units, named by the model.
    pub fn state_trace(&self, traj: &[Vec<f64>]) -> Result<Trace> {
        Trace::new(
            self.kind.state_names().iter().map(|s| s.to_string()).collect(),
            traj.to_vec(),
        )
    }

    /// Output channels of a trajectory, normalized to `[-1, 1]`.
    pub fn to_trace(&self, traj: &[Vec<f64>]) -> Result<Trace> {
        self.check_states(traj)?;
        let channels = self.outputs.iter().map(|o| o.channel.clone()).collect();
        let rows = traj
            .iter()
            .map(|q| self.outputs.iter().map(|o| q[o.state]).collect())
            .collect();
        self.normalization().normalize(&Trace::new(channels, rows)?)
    }
}
