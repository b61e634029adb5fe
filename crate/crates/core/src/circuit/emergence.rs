use super::fock::{FockSpace, RotatingFrame};
use super::spec::{CircuitSpec, ModulationSpec, QubitDrive, Tone, PAIRS};
use crate::error::{Error, Result};
use crate::models::{diamond_hamiltonian, DiamondParams};
use crate::numkit::{bessel_j1_inverse, bessel_jn, eigh, mhz_to_angular, propagator, ComplexMat, C64};
use std::f64::consts::{PI, TAU};

/// Start phases averaged over when extracting the effective generator.
pub const START_PHASES: usize = 8;

/// Sideband orders `|n| ≤ SIDEBAND_ORDERS` kept in the dispersive shift.
const SIDEBAND_ORDERS: i32 = 24;

/// Pairs whose first sideband is resonant in the diamond scheme.
const DRIVEN_PAIRS: [(usize, usize); 2] = [(0, 1), (2, 3)];

/// Target point of the effective diamond Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiamondScheme {
    pub params: DiamondParams,
}

/// Device for the diamond scheme: `ω̄/2π = (4800, 5000, 5350, 5550)` MHz and
/// `J/2π = 5 MHz` on every ring pair. Both driven pairs sit 200 MHz apart,
/// and no low sideband of the other two pairs falls near resonance.
pub fn emergence_device() -> CircuitSpec {
    CircuitSpec { omega_q: [4800.0, 5000.0, 5350.0, 5550.0].map(mhz_to_angular), ..CircuitSpec::default_device() }
}

/// Modulation realizing the diamond Hamiltonian plus the frame it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondDrive {
    pub ms: ModulationSpec,
    /// `Δ = Ω₀ cos θ`, rad/µs.
    pub detuning: f64,
    /// `2πf`, shared by both tones, rad/µs.
    pub freq: f64,
}

/// Tones on qubits 1 and 3 that couple pairs `(2, 1)` and `(4, 3)`.
///
/// Each tone sits `2Δ` below its pair detuning and has `J·J₁(ω^T/2πf) = Ω₀ sin θ`.
/// The phases are `β₁ = π − φ` and `β₃ = φ`, which reproduce the signs of
/// the diamond matrix entries `⟨1000|H|0100⟩` and `⟨0010|H|0001⟩`.
///
/// Every mean frequency is lowered by its [`dispersive_shifts`] entry so the
/// dressed qubits sit at their idle frequencies.
pub fn diamond_modulation(cs: &CircuitSpec, scheme: &DiamondScheme) -> Result<DiamondDrive> {
    let p = &scheme.params;
    let detuning = p.detuning();
    let coupling = p.coupling().abs();
    let pair_gap = |low: usize, high: usize| -> Result<f64> {
        let gap = cs.omega_q[high] - cs.omega_q[low];
        if gap <= 0.0 {
            return Err(Error::InvalidDrive(format!("qubit {} must sit below qubit {}", low + 1, high + 1)));
        }
        Ok(gap)
    };
    let (gap12, gap34) = (pair_gap(0, 1)?, pair_gap(2, 3)?);
    if (gap12 - gap34).abs() > 1e-9 * gap12 {
        return Err(Error::InvalidDrive("pairs 12 and 34 must share one detuning".into()));
    }
    let freq = gap12 - 2.0 * detuning;
    if freq <= 0.0 {
        return Err(Error::InvalidDrive(format!("tone frequency {freq} is not positive")));
    }
    let tone = |qubit: usize, partner: usize, phase: f64| -> Result<QubitDrive> {
        let j = cs.coupling_between(qubit, partner).abs();
        if j == 0.0 {
            return Err(Error::InvalidDrive(format!("pair {}{} is uncoupled", qubit + 1, partner + 1)));
        }
        let x = bessel_j1_inverse(coupling / j)?;
        Ok(QubitDrive { qubit, mean: cs.omega_q[qubit], tones: vec![Tone { amplitude: x * freq, freq, phase }] })
    };
    let mut ms = ModulationSpec { qubits: vec![tone(0, 1, PI - p.phi)?, tone(2, 3, p.phi)?] };
    let shifts = dispersive_shifts(cs, &ms, &DRIVEN_PAIRS)?;
    for k in [1, 3] {
        ms.qubits.push(QubitDrive { qubit: k, mean: cs.omega_q[k], tones: vec![] });
    }
    for q in &mut ms.qubits {
        q.mean -= shifts[q.qubit];
    }
    Ok(DiamondDrive { ms, detuning, freq })
}

/// Second-order shift of each single excitation from the off-resonant sidebands.
///
/// A pair `(k, l)` with one qubit carrying a single tone of depth `x` hops
/// with `J Jₙ(x) e^{iνₙt}`, `νₙ = ω̄_k − ω̄_l ± n·2πf`. Each term pushes `k`
/// by `+(J Jₙ)²/νₙ` and `l` by the opposite amount. The first sideband of
/// every pair in `resonant` is skipped. At most one qubit of each pair may
/// be modulated, with at most one tone.
pub fn dispersive_shifts(cs: &CircuitSpec, ms: &ModulationSpec, resonant: &[(usize, usize)]) -> Result<[f64; 4]> {
    let means = ms.means(cs);
    let mut shifts = [0.0; 4];
    for (p, &(k, l)) in PAIRS.iter().enumerate() {
        let j = cs.coupling[p];
        if j == 0.0 {
            continue;
        }
        let tone_on = |q: usize| ms.drive(q).and_then(|d| d.tones.first().copied());
        let (tone, sign) = match (tone_on(k), tone_on(l)) {
            (Some(t), None) => (t, 1.0),
            (None, Some(t)) => (t, -1.0),
            (None, None) => (Tone { amplitude: 0.0, freq: 0.0, phase: 0.0 }, 0.0),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidDrive(format!("pair {}{} is modulated on both qubits", k + 1, l + 1)))
            }
        };
        let multi_tone = [k, l].iter().any(|&q| ms.drive(q).is_some_and(|d| d.tones.len() > 1));
        if multi_tone {
            return Err(Error::InvalidDrive(format!("pair {}{} carries more than one tone", k + 1, l + 1)));
        }
        let x = if tone.freq == 0.0 { 0.0 } else { tone.amp_over_freq() };
        let skip = resonant.contains(&(k, l)) || resonant.contains(&(l, k));
        for n in -SIDEBAND_ORDERS..=SIDEBAND_ORDERS {
            if (skip && n == 1) || (sign == 0.0 && n != 0) {
                continue;
            }
            let g = j * bessel_jn(n, x)?;
            let nu = means[k] - means[l] + sign * n as f64 * tone.freq;
            if g == 0.0 {
                continue;
            }
            if nu == 0.0 {
                return Err(Error::InvalidDrive(format!("pair {}{}: sideband {n} is resonant", k + 1, l + 1)));
            }
            shifts[k] += g * g / nu;
            shifts[l] -= g * g / nu;
        }
    }
    Ok(shifts)
}

/// Effective 4×4 generator over `periods` tone periods, in the diamond basis.
///
/// The propagator is taken in the frame rotating at the mean frequencies,
/// stripped of the modulation phase at its endpoints, moved to the frame
/// rotating at the idle frequencies `cs.omega_q`, and then into the frame
/// where each level `k` carries its diamond diagonal `d_k`:
/// `U_D = e^{−i diag(d) T} U`. With `K = (U_D − U_D†)/2i = −sin(H T)` the
/// generator is `H = −arcsin(K)/T`, valid while `‖H‖ T < π/2`. Results are
/// averaged over [`START_PHASES`] start times within one period, which
/// removes the first-order micromotion that depends on the start time.
pub fn effective_generator(cs: &CircuitSpec, drive: &DiamondDrive, periods: usize) -> Result<ComplexMat> {
    cs.validate()?;
    drive.ms.validate()?;
    let frame = RotatingFrame::new(cs, &drive.ms);
    let space = FockSpace::new(cs.levels);
    let slots = space.single_excitations();
    let tone_period = TAU / drive.freq;
    let duration = periods as f64 * tone_period;
    let means = drive.ms.means(cs);
    // Slot `s` holds qubit `3 − s`; the idle frame adds `ω_q − ω̄` per slot.
    let diag: [f64; 4] = std::array::from_fn(|slot| {
        let q = 3 - slot;
        let d = if slot % 2 == 0 { drive.detuning } else { -drive.detuning };
        d - (cs.omega_q[q] - means[q])
    });

    let steps_per_period = (tone_period * frame.frequency_scale() / (TAU * 0.02)).ceil().max(16.0) as usize;
    let dt = tone_period / steps_per_period as f64;
    let mut sum = ComplexMat::zeros(4, 4);
    for s in 0..START_PHASES {
        let t0 = s as f64 * tone_period / START_PHASES as f64;
        let mut u = ComplexMat::identity(space.dim());
        for k in 0..periods * steps_per_period {
            let mid = t0 + (k as f64 + 0.5) * dt;
            u = &propagator(&frame.at(mid), dt)? * &u;
        }
        let block = u.select(&slots, &slots);
        let kick = |t: f64, sign: f64| {
            let phases: Vec<C64> = (0..4)
                .map(|slot| {
                    let q = 3 - slot;
                    C64::from_polar(1.0, sign * drive.ms.phase_excursion(q, t))
                })
                .collect();
            diag_matrix(&phases)
        };
        let interaction = &(&kick(t0 + duration, 1.0) * &block) * &kick(t0, -1.0);
        let enter = diag_matrix(&diag.map(|d| C64::from_polar(1.0, -d * (t0 + duration))));
        let leave = diag_matrix(&diag.map(|d| C64::from_polar(1.0, d * t0)));
        let u_d = &(&enter * &interaction) * &leave;
        sum = &sum + &principal_generator(&u_d, duration)?;
    }
    Ok(sum.scale_real(1.0 / START_PHASES as f64))
}

fn diag_matrix(entries: &[C64]) -> ComplexMat {
    let n = entries.len();
    let mut m = ComplexMat::zeros(n, n);
    for (i, &z) in entries.iter().enumerate() {
        m[(i, i)] = z;
    }
    m
}

/// `H` with `U = exp(−iHT)` and spectrum of `HT` inside `(−π/2, π/2)`.
fn principal_generator(u: &ComplexMat, duration: f64) -> Result<ComplexMat> {
    let k = (u - &u.adjoint()).scale(C64::new(0.0, -0.5));
    let sd = eigh(&k.hermitian_part(), 0.0)?;
    let n = sd.dim();
    let mut scaled = sd.vectors.clone();
    for j in 0..n {
        let s = sd.values[j];
        if s.abs() >= 1.0 {
            return Err(Error::NumericalFailure(format!("propagator phase {s} outside arcsin range")));
        }
        let w = -s.asin() / duration;
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    Ok(&scaled * &sd.vectors.adjoint())
}

/// Max-norm distance between the extracted generator and the diamond matrix, relative to `Ω₀`.
pub fn emergence_error(cs: &CircuitSpec, scheme: &DiamondScheme, periods: usize) -> Result<f64> {
    let drive = diamond_modulation(cs, scheme)?;
    let h = effective_generator(cs, &drive, periods)?;
    let want = diamond_hamiltonian(&scheme.params)?;
    Ok((&h - &want).max_abs() / scheme.params.omega0)
}
