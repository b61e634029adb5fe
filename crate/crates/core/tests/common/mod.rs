//! Property checks shared by the proptest suite and the acceptance runner.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use qgtlab::circuit::{circuit_hamiltonian, CircuitSpec, FockSpace, ModulationSpec};
use qgtlab::dynamics::{drive_hamiltonian, evolve, max_step, DriveMode, DriveSpec};
use qgtlab::models::{BhzModel, BhzParams, DiamondModel, ParamHamiltonian, ParamPoint};
use qgtlab::numkit::{eigh, inner, mhz_to_angular, propagator, ComplexMat, C64};
use qgtlab::qgt::{qgt_sum_over_states, GroupBasis, QgtOptions};
use std::f64::consts::TAU;

pub type Check = Result<(), TestCaseError>;

pub trait OrFail<T> {
    fn or_fail(self) -> Result<T, TestCaseError>;
}

impl<T> OrFail<T> for qgtlab::Result<T> {
    fn or_fail(self) -> Result<T, TestCaseError> {
        self.map_err(|e| TestCaseError::fail(e.to_string()))
    }
}

/// Sixteen reals packed into a 4×4 Hermitian matrix.
pub fn hermitian(entries: &[f64]) -> ComplexMat {
    hermitian_n(4, entries)
}

/// `n²` reals packed into an `n × n` Hermitian matrix.
pub fn hermitian_n(n: usize, entries: &[f64]) -> ComplexMat {
    let mut h = ComplexMat::zeros(n, n);
    let mut it = entries.iter().copied();
    for i in 0..n {
        h[(i, i)] = C64::new(it.next().unwrap(), 0.0);
        for j in i + 1..n {
            let z = C64::new(it.next().unwrap(), it.next().unwrap());
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

pub fn hermitian_entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 16)
}

/// Random Hermitian matrices of dimension 2 to 8.
pub fn hermitian_matrix() -> impl Strategy<Value = ComplexMat> {
    (2usize..=8).prop_flat_map(|n| prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |e| hermitian_n(n, &e)))
}

fn unitarity_error(u: &ComplexMat) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMat::identity(u.rows())).max_abs()
}

/// `scaled_dt` is `‖H‖·dt`.
pub fn propagator_is_unitary(h: &ComplexMat, scaled_dt: f64) -> Check {
    let dt = scaled_dt / h.frobenius().max(1e-12);
    let u = propagator(h, dt).or_fail()?;
    let err = unitarity_error(&u);
    prop_assert!(err <= 1e-10, "‖U†U − 1‖ = {err}");
    Ok(())
}

pub fn eigh_reconstructs(h: &ComplexMat) -> Check {
    let norm = h.frobenius();
    let deg_tol = 1e-3 * norm;
    let d = eigh(h, deg_tol).or_fail()?;
    let err = (&d.reconstruct() - h).max_abs();
    prop_assert!(err <= 1e-10 * norm, "‖VΛV† − H‖ = {err}");
    let rotated = &(&d.vectors.adjoint() * h) * &d.vectors;
    for i in 0..h.rows() {
        for j in 0..h.rows() {
            if i != j {
                prop_assert!(rotated[(i, j)].norm() <= 1e-10 * norm);
            }
        }
    }
    prop_assert!(unitarity_error(&d.vectors) <= 1e-12);
    prop_assert!(d.values.windows(2).all(|w| w[0] <= w[1]));
    for (i, w) in d.values.windows(2).enumerate() {
        prop_assert_eq!(d.group_of(i) == d.group_of(i + 1), w[1] - w[0] <= deg_tol);
    }
    Ok(())
}

pub fn models_are_hermitian(theta: f64, phi: f64, kx: f64, ky: f64, bg: f64) -> Check {
    let diamond = DiamondModel::new(TAU * 6.5).eval(&DiamondModel::point(theta, phi)).or_fail()?;
    let bhz = BhzModel::new(BhzParams { hxy: 1.0, hz: 1.0, m: 2.0, bg }).eval(&BhzModel::point(kx, ky)).or_fail()?;
    prop_assert!(diamond.hermiticity_error() <= 1e-12);
    prop_assert!(bhz.hermiticity_error() <= 1e-12);
    Ok(())
}

/// Full resonant weak-drive trace of the diamond model.
pub fn driven_norm_is_conserved(theta: f64, phi: f64, two_tone: bool) -> Check {
    let omega0 = TAU * 6.5;
    let model = DiamondModel::new(omega0);
    let pt = DiamondModel::point(theta, phi);
    let mode = if two_tone { DriveMode::two("theta", "phi", 0.5) } else { DriveMode::one("theta") };
    let spec = DriveSpec::new(mode, TAU * 3.0, 2.0 * omega0);
    let h = drive_hamiltonian(&model, &pt, &spec).or_fail()?;
    let duration = 4.0;
    let mut psi0 = vec![C64::new(0.0, 0.0); 4];
    psi0[0] = C64::new(0.6, 0.0);
    psi0[2] = C64::new(0.0, 0.8);
    let traj = evolve(|t| h.at(t), &psi0, duration, max_step(h.frequency_scale(), duration), 512).or_fail()?;
    prop_assert!(traj.max_norm_drift <= 1e-8, "norm drift {}", traj.max_norm_drift);
    Ok(())
}

fn diamond_or_bhz(use_bhz: bool, a: f64, b: f64) -> (Box<dyn ParamHamiltonian>, ParamPoint, [&'static str; 2]) {
    if use_bhz {
        let model = BhzModel::new(BhzParams { hxy: 1.0, hz: 1.0, m: 2.0, bg: 0.3 });
        (Box::new(model), BhzModel::point(a, b), ["kx", "ky"])
    } else {
        (Box::new(DiamondModel::new(TAU * 6.5)), DiamondModel::point(a, b), ["theta", "phi"])
    }
}

/// Rotating the group basis transforms `Q` as `W† Q W` and leaves its traces alone.
pub fn qgt_is_gauge_covariant(use_bhz: bool, a: f64, b: f64, observable: &[f64]) -> Check {
    let (model, pt, [mu, nu]) = diamond_or_bhz(use_bhz, a, b);
    let reference = qgt_sum_over_states(model.as_ref(), &pt, mu, nu, &QgtOptions::default()).or_fail()?;
    let rotated_opts = QgtOptions { basis: GroupBasis::Diagonalizing(hermitian(observable)), ..QgtOptions::default() };
    let rotated = qgt_sum_over_states(model.as_ref(), &pt, mu, nu, &rotated_opts).or_fail()?;

    let w = &reference.basis.adjoint() * &rotated.basis;
    prop_assert!(unitarity_error(&w) <= 1e-10, "bases span different groups");
    let expected = &(&w.adjoint() * &reference.q) * &w;
    let err = (&expected - &rotated.q).max_abs();
    let scale = reference.q.max_abs().max(1.0);
    prop_assert!(err <= 1e-10 * scale, "‖W†QW − Q'‖ = {err}");
    for (x, y) in [(&reference.g, &rotated.g), (&reference.f, &rotated.f)] {
        prop_assert!((x.trace() - y.trace()).norm() <= 1e-10 * scale);
    }
    Ok(())
}

/// Lab-frame dynamics with counter-rotating terms, frequencies scaled to hundreds of MHz.
pub fn lab_frame_conserves_excitations(freqs_mhz: [f64; 4], start: usize) -> Check {
    let cs = CircuitSpec {
        omega_q: freqs_mhz.map(mhz_to_angular),
        alpha: [mhz_to_angular(-22.0); 4],
        coupling: [mhz_to_angular(5.0); 4],
        levels: 2,
    };
    let ms = ModulationSpec::none();
    let h = circuit_hamiltonian(&cs, &ms, 0.0);
    let space = FockSpace::new(cs.levels);
    let singles = space.single_excitations();
    let mut psi0 = vec![C64::new(0.0, 0.0); space.dim()];
    psi0[singles[start]] = C64::new(1.0, 0.0);
    let ratio = cs.coupling[0] / cs.omega_q.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = 1.0 - 10.0 * ratio * ratio;
    for k in 1..=40 {
        let psi = propagator(&h, 0.025 * k as f64).or_fail()?.matvec(&psi0);
        let kept: f64 = singles.iter().map(|&i| psi[i].norm_sqr()).sum();
        prop_assert!(kept >= bound, "single-excitation population {kept} below {bound}");
        prop_assert!((inner(&psi, &psi).re - 1.0).abs() <= 1e-10);
    }
    Ok(())
}
