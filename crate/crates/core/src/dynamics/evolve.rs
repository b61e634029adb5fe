use crate::error::{Error, Result};
use crate::numkit::{norm, propagator, ComplexMat, C64};

/// Norm drift beyond which a trajectory is rejected.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// States recorded at uniformly spaced times `0, …, duration`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    /// Largest `|‖ψ(t)‖ − ‖ψ(0)‖|` over the recorded samples.
    pub max_norm_drift: f64,
    /// Integration step actually used.
    pub dt: f64,
}

/// Largest step allowed for a system whose fastest angular frequency is
/// `omega_max` rad/µs: `min(0.02/ν_max, duration/1000)`.
pub fn max_step(omega_max: f64, duration: f64) -> f64 {
    let nu_max = omega_max / std::f64::consts::TAU;
    let by_frequency = if nu_max > 0.0 { 0.02 / nu_max } else { f64::INFINITY };
    by_frequency.min(duration / 1000.0)
}

/// Integrates `i dψ/dt = H(t) ψ` with midpoint piecewise-constant propagators.
///
/// `dt` is an upper bound: the step is shrunk so an integer number of steps
/// spans each interval between the `samples` recorded times.
pub fn evolve<F>(h: F, psi0: &[C64], duration: f64, dt: f64, samples: usize) -> Result<Trajectory>
where
    F: Fn(f64) -> ComplexMat,
{
    if !(duration > 0.0) || !duration.is_finite() || !(dt > 0.0) || samples < 2 {
        return Err(Error::NumericalFailure(format!(
            "invalid integration window: duration {duration}, dt {dt}, samples {samples}"
        )));
    }
    let interval = duration / (samples - 1) as f64;
    let substeps = (interval / dt).ceil().max(1.0) as usize;
    let step = interval / substeps as f64;
    let norm0 = norm(psi0);

    let mut psi = psi0.to_vec();
    let mut times = Vec::with_capacity(samples);
    let mut states = Vec::with_capacity(samples);
    let mut drift: f64 = 0.0;
    times.push(0.0);
    states.push(psi.clone());
    for s in 1..samples {
        let start = (s - 1) as f64 * interval;
        for k in 0..substeps {
            let mid = start + (k as f64 + 0.5) * step;
            let u = propagator(&h(mid), step)?;
            psi = u.matvec(&psi);
        }
        let d = (norm(&psi) - norm0).abs();
        if !(d <= NORM_DRIFT_LIMIT) {
            return Err(Error::IntegrationUnstable(d));
        }
        drift = drift.max(d);
        times.push(s as f64 * interval);
        states.push(psi.clone());
    }
    Ok(Trajectory { times, states, max_norm_drift: drift, dt: step })
}
