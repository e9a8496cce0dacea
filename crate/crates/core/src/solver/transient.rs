//! Second-order backward differentiation in time, first-order on the first
//! step. The two operators are factored once and reused for every step.

use std::path::Path;

use faer::linalg::solvers::PartialPivLu;
use serde::{Deserialize, Serialize};

use super::{factor, solve_with, GlobalSystem};
use crate::error::{Error, Result};
use crate::model::TimeControl;

/// Stepper state: station index, its time, and the last two unknown vectors
/// (station `n` and `n - 1`; zero before the start).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeState {
    pub n: usize,
    pub t: f64,
    pub dt: f64,
    pub current: Vec<f64>,
    pub previous: Vec<f64>,
}

impl TimeState {
    pub fn initial(t0: f64, dt: f64, size: usize) -> Self {
        Self {
            n: 0,
            t: t0,
            dt,
            current: vec![0.0; size],
            previous: vec![0.0; size],
        }
    }

    /// Writes the state as JSON.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Numerical(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Solution at one station over raw columns: values (relative to `u0`) and
/// time rates.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
    pub rates: Vec<f64>,
}

pub struct TransientRun<'a> {
    pub system: &'a GlobalSystem,
    pub state: TimeState,
    first: Option<PartialPivLu<f64>>,
    second: PartialPivLu<f64>,
}

impl<'a> TransientRun<'a> {
    pub fn new(system: &'a GlobalSystem, t0: f64, dt: f64) -> Result<Self> {
        Self::resume(system, TimeState::initial(t0, dt, system.model.num_unknowns()))
    }

    pub fn from_scenario(system: &'a GlobalSystem) -> Result<Self> {
        match system.model.scenario.time {
            TimeControl::Transient { t0, dt, .. } => Self::new(system, t0, dt),
            other => Err(Error::Validation(format!("scenario time control {other:?} is not transient"))),
        }
    }

    pub fn resume(system: &'a GlobalSystem, state: TimeState) -> Result<Self> {
        if state.current.len() != system.model.num_unknowns() || state.previous.len() != state.current.len() {
            return Err(Error::Validation(format!(
                "state of size {} for a system of {} unknowns",
                state.current.len(),
                system.model.num_unknowns()
            )));
        }
        if !(state.dt > 0.0) {
            return Err(Error::Validation(format!("time step must be positive, got {}", state.dt)));
        }
        let first = if state.n == 0 {
            Some(factor(&system.operator(1.0 / state.dt))?)
        } else {
            None
        };
        let second = factor(&system.operator(1.5 / state.dt))?;
        Ok(Self {
            system,
            state,
            first,
            second,
        })
    }

    /// Advances one station and returns it.
    pub fn step(&mut self) -> Result<Snapshot> {
        step_transient(self)
    }

    pub fn run(&mut self, steps: usize) -> Result<Vec<Snapshot>> {
        (0..steps).map(|_| self.step()).collect()
    }
}

/// One step: `(A_s + w0/Δt A_d) z_n = b(t_n) - A_d (w1 z_{n-1} + w2 z_{n-2}) / Δt`.
pub fn step_transient(run: &mut TransientRun<'_>) -> Result<Snapshot> {
    let sys = run.system;
    let st = &run.state;
    let dt = st.dt;
    let t = st.t + dt;
    let (w0, w1, w2) = if st.n == 0 { (1.0, -1.0, 0.0) } else { (1.5, -2.0, 0.5) };
    let hist: Vec<f64> = st.current.iter().zip(&st.previous).map(|(a, b)| w1 * a + w2 * b).collect();
    let mut rhs = sys.known_rhs(&sys.model.known_values(t, false));
    for (r, h) in rhs.iter_mut().zip(sys.rate_product(&hist)) {
        *r -= h / dt;
    }
    let lu = if st.n == 0 { run.first.as_ref().expect("first-step factorization") } else { &run.second };
    let z = solve_with(lu, &rhs);
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite solution at t = {t}")));
    }
    let rate_u: Vec<f64> = z.iter().zip(&hist).map(|(a, h)| (w0 * a + h) / dt).collect();
    let model = &sys.model;
    let known = model.known_values(t, false);
    let values = model.expand(&z, &known);
    let mut rates = vec![0.0; model.cols.total];
    for (u, &c) in model.unknown_cols.iter().enumerate() {
        rates[c] = rate_u[u];
    }
    let prev = std::mem::replace(&mut run.state.current, z);
    run.state.previous = prev;
    run.state.n += 1;
    run.state.t = t;
    if run.state.n == 1 {
        run.first = None;
    }
    Ok(Snapshot { t, values, rates })
}
