//! Single-tone fit of population traces.
//!
//! The dominant frequency is seeded from a 4× zero-padded FFT with parabolic
//! peak interpolation, the linear parameters follow from least squares, and
//! all four parameters are then refined with damped Gauss-Newton
//! (Levenberg-Marquardt). Time is normalized to the trace span internally,
//! so rescaling the time axis rescales the fitted frequency and nothing else.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 32;
const MAX_ITERATIONS: usize = 200;
const CONVERGENCE: f64 = 1e-10;
const PEAK_TO_FLOOR: f64 = 10.0;

/// `P(t) ≈ offset + amplitude · cos(omega · t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Angular frequency in inverse time units of the input (rad/µs for µs).
    pub omega: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub phase: f64,
    pub residual_rms: f64,
}

impl FitResult {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (self.omega * t + self.phase).cos()
    }
}

pub fn fit_oscillation(times: &[f64], populations: &[f64]) -> Result<FitResult> {
    let n = times.len();
    if n < MIN_SAMPLES {
        return Err(Error::InvalidTrace(format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    if populations.len() != n {
        return Err(Error::InvalidTrace("times and populations differ in length".into()));
    }
    if times.iter().chain(populations).any(|v| !v.is_finite()) {
        return Err(Error::InvalidTrace("non-finite sample".into()));
    }
    let t0 = times[0];
    let span = times[n - 1] - t0;
    if span <= 0.0 {
        return Err(Error::InvalidTrace("time axis is not increasing".into()));
    }
    let step = span / (n - 1) as f64;
    for w in times.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
            return Err(Error::InvalidTrace("non-uniform sampling".into()));
        }
    }

    let tau: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mean = populations.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = populations.iter().map(|p| p - mean).collect();
    let rms = (centered.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    if rms < 1e-9 {
        return Err(Error::NoOscillation("trace is constant".into()));
    }

    let seed = fft_seed(&centered)?;
    let (offset, a, b) = linear_fit(&tau, populations, seed);
    let mut params = [offset, (a * a + b * b).sqrt(), seed, (-b).atan2(a)];
    params = levenberg_marquardt(&tau, populations, params);

    let [offset, mut amplitude, omega_tau, mut phase] = params;
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += PI;
    }
    if omega_tau < 0.0 {
        return Err(Error::NumericalFailure("refinement drove frequency negative".into()));
    }
    let residual_rms = residual(&tau, populations, &[offset, amplitude, omega_tau, phase]);
    let omega = omega_tau / span;
    let phase = wrap(phase - omega * t0);
    Ok(FitResult { omega, amplitude, offset, phase, residual_rms })
}

/// Seed angular frequency in normalized time (span = 1).
fn fft_seed(centered: &[f64]) -> Result<f64> {
    let n = centered.len();
    let len = 4 * n;
    let mut buf: Vec<Complex<f64>> = centered.iter().map(|&x| Complex::new(x, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mags: Vec<f64> = buf[..len / 2].iter().map(|z| z.norm()).collect();

    let (peak, &peak_mag) =
        mags.iter().enumerate().skip(1).max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty spectrum");
    let mut sorted = mags[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    if peak_mag < PEAK_TO_FLOOR * floor {
        return Err(Error::NoOscillation(format!("spectral peak {peak_mag:.3e} not above noise floor {floor:.3e}")));
    }

    let mut bin = peak as f64;
    if peak + 1 < mags.len() {
        let (l, c, r) = (mags[peak - 1], mags[peak], mags[peak + 1]);
        let denom = l - 2.0 * c + r;
        if denom != 0.0 {
            bin += 0.5 * (l - r) / denom;
        }
    }
    // Bin spacing is 1/(len·d) cycles per unit τ with d = 1/(n−1).
    let cycles = bin * (n - 1) as f64 / len as f64;
    if cycles < 1.0 {
        return Err(Error::NoOscillation(format!("dominant tone completes only {cycles:.2} periods in the trace")));
    }
    Ok(2.0 * PI * cycles)
}

fn linear_fit(tau: &[f64], y: &[f64], omega: f64) -> (f64, f64, f64) {
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut aty = vec![0.0; 3];
    for (&t, &v) in tau.iter().zip(y) {
        let row = [1.0, (omega * t).cos(), (omega * t).sin()];
        for i in 0..3 {
            aty[i] += row[i] * v;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    match solve(ata, aty) {
        Some(x) => (x[0], x[1], x[2]),
        None => (y.iter().sum::<f64>() / y.len() as f64, 0.0, 0.0),
    }
}

fn model(p: &[f64; 4], t: f64) -> f64 {
    p[0] + p[1] * (p[2] * t + p[3]).cos()
}

fn residual(tau: &[f64], y: &[f64], p: &[f64; 4]) -> f64 {
    let ss: f64 = tau.iter().zip(y).map(|(&t, &v)| (v - model(p, t)).powi(2)).sum();
    (ss / y.len() as f64).sqrt()
}

fn levenberg_marquardt(tau: &[f64], y: &[f64], mut p: [f64; 4]) -> [f64; 4] {
    let cost = |p: &[f64; 4]| -> f64 { tau.iter().zip(y).map(|(&t, &v)| (v - model(p, t)).powi(2)).sum() };
    let mut lambda = 1e-3;
    let mut current = cost(&p);
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = vec![vec![0.0; 4]; 4];
        let mut jtr = vec![0.0; 4];
        for (&t, &v) in tau.iter().zip(y) {
            let arg = p[2] * t + p[3];
            let (s, c) = arg.sin_cos();
            let jac = [1.0, c, -p[1] * t * s, -p[1] * s];
            let r = v - (p[0] + p[1] * c);
            for i in 0..4 {
                jtr[i] += jac[i] * r;
                for j in 0..4 {
                    jtj[i][j] += jac[i] * jac[j];
                }
            }
        }
        let mut accepted = false;
        let mut step_small = false;
        for _ in 0..20 {
            let mut damped = jtj.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(delta) = solve(damped, jtr.clone()) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2], p[3] + delta[3]];
            let trial_cost = cost(&trial);
            if trial_cost <= current {
                step_small = delta.iter().zip(&p).all(|(d, v)| d.abs() <= CONVERGENCE * (v.abs() + CONVERGENCE));
                let cost_small = current - trial_cost <= CONVERGENCE * current;
                step_small |= cost_small && current < 1e-300;
                p = trial;
                current = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || step_small {
            break;
        }
    }
    p
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            let (upper, lower) = a.split_at_mut(i);
            for (x, &y) in lower[0][k..n].iter_mut().zip(&upper[k][k..n]) {
                *x -= f * y;
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn wrap(phase: f64) -> f64 {
    let mut p = phase % (2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    } else if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_cosine() {
        let w = 2.0 * PI * 1.5;
        let t = grid(2.0, 256);
        let p: Vec<f64> = t.iter().map(|&t| 0.5 - 0.5 * (w * t).cos()).collect();
        let fit = fit_oscillation(&t, &p).unwrap();
        assert!((fit.omega - w).abs() / w < 1e-3);
        assert!((fit.amplitude - 0.5).abs() < 1e-6);
        assert!((fit.offset - 0.5).abs() < 1e-6);
        assert!(fit.residual_rms < 1e-8);
    }

    #[test]
    fn noisy_cosine() {
        let w = 2.0 * PI * 1.5;
        let t = grid(2.0, 256);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let p: Vec<f64> = t.iter().map(|&t| 0.5 - 0.5 * (w * t).cos() + noise.sample(&mut rng)).collect();
        let fit = fit_oscillation(&t, &p).unwrap();
        assert!((fit.omega - w).abs() / w < 1e-2);
    }

    #[test]
    fn constant_trace() {
        let t = grid(2.0, 256);
        let p = vec![0.3; 256];
        assert!(matches!(fit_oscillation(&t, &p), Err(Error::NoOscillation(_))));
    }

    #[test]
    fn rejects_irregular_sampling() {
        let mut t = grid(2.0, 64);
        t[10] += 1e-3;
        let p: Vec<f64> = t.iter().map(|&t| (10.0 * t).cos()).collect();
        assert!(matches!(fit_oscillation(&t, &p), Err(Error::InvalidTrace(_))));
        assert!(matches!(fit_oscillation(&t[..20], &p[..20]), Err(Error::InvalidTrace(_))));
    }

    #[test]
    fn time_rescaling() {
        let t = grid(3.0, 300);
        let p: Vec<f64> = t.iter().map(|&t| 0.4 + 0.3 * (7.3 * t + 0.4).cos()).collect();
        let base = fit_oscillation(&t, &p).unwrap();
        for &c in &[1e-3, 0.5, 2.0, 1e3] {
            let ts: Vec<f64> = t.iter().map(|x| x * c).collect();
            let fit = fit_oscillation(&ts, &p).unwrap();
            assert!((fit.omega * c - base.omega).abs() <= 1e-12 * base.omega);
        }
    }

    #[test]
    fn phase_and_offset_origin() {
        let t: Vec<f64> = (0..200).map(|i| 5.0 + 0.01 * i as f64).collect();
        let p: Vec<f64> = t.iter().map(|&t| 0.2 + 0.1 * (12.0 * t - 1.0).cos()).collect();
        let fit = fit_oscillation(&t, &p).unwrap();
        assert!((fit.omega - 12.0).abs() < 1e-8);
        assert!((fit.phase - wrap(-1.0)).abs() < 1e-8);
        assert!((fit.eval(5.5) - (0.2 + 0.1 * (12.0f64 * 5.5 - 1.0).cos())).abs() < 1e-10);
    }
}
