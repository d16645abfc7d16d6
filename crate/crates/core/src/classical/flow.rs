use serde::{Deserialize, Serialize};

use crate::error::{LmgError, Result};
use crate::ode::{integrate, OdeOptions};
use crate::spin::CouplingParams;

use super::energy::{classical_energy, energy_gradient};
use super::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-12, max_steps: 50_000_000 }
    }
}

impl FlowOptions {
    fn ode(&self) -> OdeOptions {
        OdeOptions { rtol: self.rtol, atol: self.atol, max_steps: self.max_steps, ..OdeOptions::default() }
    }
}

/// (dQ/dt, dP/dt) = (∂h/∂P, −∂h/∂Q), time in units of 1/ε0.
#[inline]
pub fn hamiltonian_rhs(c: &CouplingParams, y: &[f64; 2]) -> [f64; 2] {
    let (gq, gp) = energy_gradient(&PhasePoint { q: y[0], p: y[1] }, c);
    [gp, -gq]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// max_t |h(t) − h(0)|.
    pub max_energy_drift: f64,
    pub steps: usize,
}

/// Classical trajectory sampled at `times` (ascending, starting at the
/// initial time).
pub fn flow(start: &PhasePoint, times: &[f64], c: &CouplingParams, opts: &FlowOptions) -> Result<FlowResult> {
    let mut points = Vec::with_capacity(times.len());
    let steps = flow_with(start, times, c, opts, |_, p| points.push(*p))?;
    let h0 = classical_energy(start, c);
    let max_energy_drift = points.iter().map(|p| (classical_energy(p, c) - h0).abs()).fold(0.0, f64::max);
    Ok(FlowResult { times: times.to_vec(), points, max_energy_drift, steps })
}

/// Streaming variant: `sink(i, point)` at every output time.
pub fn flow_with<S: FnMut(usize, &PhasePoint)>(
    start: &PhasePoint,
    times: &[f64],
    c: &CouplingParams,
    opts: &FlowOptions,
    mut sink: S,
) -> Result<usize> {
    if start.radius_sqr() >= 4.0 {
        return Err(LmgError::InvalidArgument("flow start must lie strictly inside the disc".into()));
    }
    let cc = *c;
    integrate(
        move |_, y| hamiltonian_rhs(&cc, y),
        [start.q, start.p],
        times,
        &opts.ode(),
        |i, y| sink(i, &PhasePoint { q: y[0], p: y[1] }),
    )
}
