//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use qgtlab::circuit::{bessel_operating_point, calibrate_effective, effective_coupling};
use qgtlab::dynamics::{driven_qgt, rabi_experiment, DriveMode, DriveSpec, ProtocolSpec};
use qgtlab::models::{
    BhzModel, BhzParams, BlockModel, DiamondModel, ParamHamiltonian, ParamPoint, BHZ_PAIRING, DIAMOND_PAIRING,
};
use qgtlab::numkit::{ComplexMat, C64};
use qgtlab::qgt::{qgt_finite_difference, qgt_sum_over_states, Band, QgtOptions, FD_QGT_STEP};
use qgtlab::topology::{
    chern_from_samples, chern_lattice, detg_curvature_residual, oriented_curvature, spin_chern, MetricSample,
    SphereGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

/// Ω₀/2π of the reference setting: gap 13 MHz, so A/2π = 3 MHz gives A/ω = 3/13.
const OMEGA0_MHZ: f64 = 6.5;
const AMPLITUDE_MHZ: f64 = 3.0;

fn mhz(v: f64) -> f64 {
    TAU * v
}

fn upper() -> QgtOptions {
    QgtOptions::block_basis(Band::Highest, &DIAMOND_PAIRING)
}

fn theta_grid() -> Vec<f64> {
    (1..=9).map(|k| 0.1 * k as f64 * PI).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lib<T>(r: qgtlab::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn closed_forms() -> Outcome {
    let model = DiamondModel::new(mhz(OMEGA0_MHZ));
    let mut worst: f64 = 0.0;
    for theta in theta_grid() {
        for phi in [0.0, 1.1, 4.0] {
            let pt = DiamondModel::point(theta, phi);
            let s = theta.sin();
            let quarter = |v: f64| ComplexMat::from_diag(&[v, v]);
            let mut tp = ComplexMat::zeros(2, 2);
            tp[(0, 0)] = C64::new(0.0, 0.25 * s);
            tp[(1, 1)] = C64::new(0.0, -0.25 * s);
            for (mu, nu, expected) in
                [("theta", "theta", quarter(0.25)), ("phi", "phi", quarter(0.25 * s * s)), ("theta", "phi", tp)]
            {
                let q = lib(qgt_sum_over_states(&model, &pt, mu, nu, &upper()))?.q;
                worst = worst.max((&q - &expected).max_abs());
            }
        }
    }
    check(worst <= 1e-8, format!("max |Q - closed form| = {worst:.2e} (limit 1e-8)"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let diamond = DiamondModel::new(mhz(OMEGA0_MHZ));
    let bhz = |bg| BhzModel::new(BhzParams { hxy: 1.0, hz: 1.0, m: 2.0, bg });
    let models: [(&str, Box<dyn ParamHamiltonian>, [&str; 2]); 3] = [
        ("diamond", Box::new(diamond), ["theta", "phi"]),
        ("bhz", Box::new(bhz(0.0)), ["kx", "ky"]),
        ("bhz Bg=0.3", Box::new(bhz(0.3)), ["kx", "ky"]),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, model, [mu, nu]) in &models {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let pt = if *mu == "theta" {
                DiamondModel::point(rng.random_range(0.05 * PI..0.95 * PI), rng.random_range(0.0..TAU))
            } else {
                BhzModel::point(rng.random_range(-PI..PI), rng.random_range(-PI..PI))
            };
            let opts = QgtOptions::default();
            for (a, b) in [(*mu, *mu), (*nu, *nu), (*mu, *nu)] {
                let sos = lib(qgt_sum_over_states(model.as_ref(), &pt, a, b, &opts))?.q;
                let fd = lib(qgt_finite_difference(model.as_ref(), &pt, a, b, &opts, FD_QGT_STEP))?.q;
                worst = worst.max((&sos - &fd).max_abs());
            }
        }
        ok &= worst <= 1e-6;
        lines.push(format!("{name} {worst:.1e}"));
    }
    check(ok, format!("max |FD - SOS| over 50 points: {} (limit 1e-6)", lines.join(", ")))
}

/// Deviation scaled so that 1 means the 5% relative / 0.01 absolute tolerance.
fn tolerance_ratio(measured: f64, exact: f64) -> f64 {
    (measured - exact).abs() / (0.05 * exact.abs()).max(0.01)
}

fn driven_extraction() -> Outcome {
    let model = DiamondModel::new(mhz(OMEGA0_MHZ));
    let cases: Vec<(Band, f64, usize)> = [Band::Highest, Band::Lowest]
        .into_iter()
        .flat_map(|band| theta_grid().into_iter().flat_map(move |t| (0..2).map(move |j| (band, t, j))))
        .collect();
    let worst = cases
        .par_iter()
        .map(|&(band, theta, j)| {
            let opts = QgtOptions::block_basis(band, &DIAMOND_PAIRING);
            let pt = DiamondModel::point(theta, 0.0);
            let spec = ProtocolSpec::new(mhz(AMPLITUDE_MHZ), opts.clone());
            let m = lib(driven_qgt(&model, &pt, "theta", "phi", &spec, j, 0))?;
            let exact = |mu, nu| lib(qgt_sum_over_states(&model, &pt, mu, nu, &opts));
            let (tt, pp, tp) = (exact("theta", "theta")?, exact("phi", "phi")?, exact("theta", "phi")?);
            let ratios = [
                tolerance_ratio(m.g_mumu(), tt.g[(j, j)].re),
                tolerance_ratio(m.g_nunu(), pp.g[(j, j)].re),
                tolerance_ratio(m.g_munu(), tp.g[(j, j)].re),
                tolerance_ratio(m.f_munu(), tp.f[(j, j)].re),
            ];
            let r = ratios.iter().cloned().fold(0.0, f64::max);
            Ok((r, format!("{band:?} theta={:.1}pi j={}", theta / PI, j + 1)))
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    check(
        worst.0 <= 1.0,
        format!(
            "{} cases (both levels, both j, 4 components); worst deviation {:.2} of tolerance at {}",
            cases.len(),
            worst.0,
            worst.1
        ),
    )
}

fn rabi_rate(model: &DiamondModel, amplitude: f64, detuning: f64, j: usize) -> Result<f64, String> {
    let spec = DriveSpec::new(DriveMode::one("phi"), amplitude, 1.0).with_detuning(detuning);
    let trace = lib(rabi_experiment(model, &DiamondModel::point(0.5 * PI, 0.0), &spec, &upper(), j))?;
    lib(trace.rabi_omega(detuning))
}

fn rabi_relations() -> Outcome {
    // Large gap so the counter-rotating shift stays far below 3% at A/2π = 5 MHz.
    let model = DiamondModel::new(mhz(50.0));
    let q: f64 = 0.25;
    let amps: Vec<f64> = [1.0, 2.0, 3.0, 4.0, 5.0].map(mhz).to_vec();
    let rates = amps.par_iter().map(|&a| rabi_rate(&model, a, 0.0, 0)).collect::<Result<Vec<_>, _>>()?;
    let n = amps.len() as f64;
    let (mx, my) = (amps.iter().sum::<f64>() / n, rates.iter().sum::<f64>() / n);
    let sxy: f64 = amps.iter().zip(&rates).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = amps.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = rates.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    let slope_err = (slope - q.sqrt()).abs() / q.sqrt();

    let detunings: Vec<f64> = [-5.0, -2.5, 0.0, 2.5, 5.0].map(mhz).to_vec();
    let a = mhz(AMPLITUDE_MHZ);
    let hyper = detunings
        .par_iter()
        .flat_map(|&d| (0..2).into_par_iter().map(move |j| (d, j)))
        .map(|(d, j)| {
            let expected = (a * a * q + d * d).sqrt();
            Ok((rabi_rate(&model, a, d, j)? - expected).abs() / expected)
        })
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    check(
        r2 >= 0.999 && slope_err <= 0.03 && hyper <= 0.03,
        format!(
            "R^2 = {r2:.6}, slope/sqrt(Q) - 1 = {:.2}%, worst hyperbola error {:.2}% over Delta/2pi in [-5, 5] MHz",
            100.0 * slope_err,
            100.0 * hyper
        ),
    )
}

/// Metric samples of both blocks at every grid point.
type SphereData = (SphereGrid, Vec<[MetricSample; 2]>);

/// Driven metric and curvature of both blocks over the coarse sphere grid.
fn driven_sphere() -> &'static Result<SphereData, String> {
    static DATA: OnceLock<Result<SphereData, String>> = OnceLock::new();
    DATA.get_or_init(|| {
        let model = DiamondModel::new(mhz(OMEGA0_MHZ));
        let grid = lib(SphereGrid::new(11, 4))?;
        let spec = ProtocolSpec::new(mhz(AMPLITUDE_MHZ), upper());
        let samples = grid
            .points()
            .par_iter()
            .map(|&(t, p)| {
                let pt = DiamondModel::point(t, p);
                let one = |j| -> Result<MetricSample, String> {
                    let m = lib(driven_qgt(&model, &pt, "theta", "phi", &spec, j, 0))?;
                    Ok(MetricSample { g_tt: m.g_mumu(), g_pp: m.g_nunu(), g_tp: m.g_munu(), f_tp: m.f_munu() })
                };
                Ok([one(0)?, one(1)?])
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok((grid, samples))
    })
}

fn analytic_sphere(n_theta: usize) -> Result<SphereData, String> {
    let model = DiamondModel::new(mhz(OMEGA0_MHZ));
    let grid = lib(SphereGrid::new(n_theta, 4))?;
    let samples = grid
        .points()
        .iter()
        .map(|&(t, p)| {
            let pt: ParamPoint = DiamondModel::point(t, p);
            let q = |mu, nu| lib(qgt_sum_over_states(&model, &pt, mu, nu, &upper()));
            let (tt, pp, tp) = (q("theta", "theta")?, q("phi", "phi")?, q("theta", "phi")?);
            let s = |j: usize| MetricSample {
                g_tt: tt.g[(j, j)].re,
                g_pp: pp.g[(j, j)].re,
                g_tp: tp.g[(j, j)].re,
                f_tp: tp.f[(j, j)].re,
            };
            Ok([s(0), s(1)])
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok((grid, samples))
}

fn block_cherns(grid: SphereGrid, samples: &[[MetricSample; 2]]) -> Result<[f64; 2], String> {
    let c = |b: usize| {
        let f: Vec<f64> = samples.iter().map(|s| oriented_curvature(s[b].f_tp)).collect();
        lib(chern_from_samples(grid, &f)).map(|r| r.value)
    };
    Ok([c(0)?, c(1)?])
}

fn chern_numbers() -> Outcome {
    let (grid, samples) = driven_sphere().as_ref().map_err(Clone::clone)?;
    let [cp, cm] = block_cherns(*grid, samples)?;
    let (scn, z2) = spin_chern(cp, cm);
    let (agrid, asamples) = analytic_sphere(101)?;
    let [ap, am] = block_cherns(agrid, &asamples)?;
    let ok = (cp - 1.0).abs() <= 0.05
        && (cm + 1.0).abs() <= 0.05
        && (scn - 1.0).abs() <= 0.05
        && z2.abs() <= 0.05
        && (ap - 1.0).abs() <= 1e-3
        && (am + 1.0).abs() <= 1e-3;
    check(
        ok,
        format!(
            "driven (11x4): C+ = {cp:.4}, C- = {cm:.4}, spin = {scn:.4}, C+ + C- = {z2:.4}; analytic (101x4): C+ = {ap:.6}, C- = {am:.6}"
        ),
    )
}

fn metric_relation() -> Outcome {
    let residual = |samples: &[[MetricSample; 2]]| -> Result<f64, String> {
        let flat: Vec<MetricSample> = samples.iter().flat_map(|s| s.iter().copied()).collect();
        lib(detg_curvature_residual(&flat))
    };
    let (_, asamples) = analytic_sphere(101)?;
    let analytic = residual(&asamples)?;
    let (_, dsamples) = driven_sphere().as_ref().map_err(Clone::clone)?;
    let driven = residual(dsamples)?;
    check(
        analytic <= 1e-10 && driven <= 0.05,
        format!("max |sqrt(det g) - |F|/2|: analytic {analytic:.1e} (limit 1e-10), driven {driven:.4} (limit 0.05)"),
    )
}

fn bessel_law() -> Outcome {
    let errors = [0.25, 0.5, 1.0, 1.5]
        .par_iter()
        .map(|&x| {
            let (cs, ms) = bessel_operating_point(x, 0.0);
            let measured = lib(calibrate_effective(&cs, &ms, (0, 1), None))?.coupling;
            let predicted = lib(effective_coupling(cs.coupling[0], x))?;
            Ok((x, (measured - predicted).abs() / predicted))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let list: Vec<String> = errors.iter().map(|(x, e)| format!("{x}: {:.2}%", 100.0 * e)).collect();
    check(worst <= 0.05, format!("relative error by amp/freq {} (limit 5%)", list.join(", ")))
}

fn lattice_chern() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (m, expected) in [(2.0, [-1, 1]), (-1.0, [0, 0]), (10.0, [0, 0])] {
        let params = BhzParams { hxy: 1.0, hz: 1.0, m, bg: 0.0 };
        let mut seen = Vec::new();
        for n in [32, 64, 128] {
            let c = |b| lib(chern_lattice(&BlockModel::new(BhzModel::new(params), BHZ_PAIRING, b), n)).map(|r| r.value);
            let pair = [c(0)?, c(1)?];
            ok &= pair.iter().all(|v| (v - v.round()).abs() < 1e-6);
            seen.push(pair.map(|v| v.round() as i64));
        }
        ok &= seen.iter().all(|p| *p == expected);
        parts.push(format!("M={m}: {:?}", seen[0]));
    }
    check(ok, format!("{} on nGrid 32, 64, 128", parts.join(", ")))
}

fn property_suites() -> Outcome {
    use common::*;
    let runner = |cases| {
        TestRunner::new_with_rng(
            Config { cases, ..Config::default() },
            TestRng::deterministic_rng(RngAlgorithm::ChaCha),
        )
    };
    let fail = |name: &str, e: String| format!("{name}: {e}");
    runner(256)
        .run(&(hermitian_matrix(), -10.0..10.0f64), |(h, x)| propagator_is_unitary(&h, x))
        .map_err(|e| fail("propagator unitarity", e.to_string()))?;
    runner(1000).run(&hermitian_matrix(), |h| eigh_reconstructs(&h)).map_err(|e| fail("eigh", e.to_string()))?;
    runner(64)
        .run(&(0.0..PI, 0.0..TAU, -PI..PI, -PI..PI, -1.0..1.0f64), |(t, p, kx, ky, bg)| {
            models_are_hermitian(t, p, kx, ky, bg)
        })
        .map_err(|e| fail("model hermiticity", e.to_string()))?;
    runner(12)
        .run(&(0.05..3.1f64, 0.0..TAU, any::<bool>()), |(t, p, two)| driven_norm_is_conserved(t, p, two))
        .map_err(|e| fail("norm drift", e.to_string()))?;
    runner(64)
        .run(&(any::<bool>(), 0.1..3.0f64, 0.0..TAU, hermitian_entries()), |(bhz, a, b, obs)| {
            qgt_is_gauge_covariant(bhz, a, b, &obs)
        })
        .map_err(|e| fail("gauge covariance", e.to_string()))?;
    runner(12)
        .run(&(prop::array::uniform4(480.0..510.0f64), 0usize..4), |(f, s)| lab_frame_conserves_excitations(f, s))
        .map_err(|e| fail("excitation conservation", e.to_string()))?;
    cli_determinism()?;
    Ok("unitarity, eigh (1000 matrices, dims 2-8), hermiticity, norm drift <= 1e-8, gauge covariance, excitation conservation, CLI determinism".into())
}

fn cli_determinism() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("d.toml");
    let text = "[model]\nkind = \"diamond\"\n[drive]\nsamples = 128\n[grid]\ntheta_pi = [0.4, 0.4]\ntheta_count = 1\n[noise]\nsigma = 0.02\nseed = 1\n";
    std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
    let run = |out: &str| -> Result<Vec<(String, Vec<u8>)>, String> {
        let target = dir.path().join(out);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_qgtlab"))
            .args(["drive", "--config", cfg.to_str().unwrap(), "--out", target.to_str().unwrap(), "--seed", "9"])
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("qgtlab drive exited with {status}"));
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&target)
            .map_err(|e| e.to_string())?
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        Ok(files)
    };
    if run("a")? == run("b")? {
        Ok(())
    } else {
        Err("CLI outputs differ between identical seeded runs".into())
    }
}

fn main() {
    type Criterion = (u8, &'static str, Option<Duration>, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        (1, "closed-form QGT", Some(Duration::from_secs(1)), closed_forms),
        (2, "finite difference vs sum over states", Some(Duration::from_secs(10)), oracle_equivalence),
        (3, "driven extraction", Some(Duration::from_secs(300)), driven_extraction),
        (4, "Rabi rate relations", None, rabi_relations),
        (5, "Chern numbers", None, chern_numbers),
        (6, "metric-curvature relation", None, metric_relation),
        (7, "Bessel coupling law", Some(Duration::from_secs(120)), bessel_law),
        (8, "lattice Chern oracle", None, lattice_chern),
        (9, "property suites", Some(Duration::from_secs(300)), property_suites),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = budget.is_some_and(|b| elapsed > b);
        let (pass, detail) = match outcome {
            Ok(d) if !over => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", budget.unwrap())),
            Err(d) => (false, d),
        };
        let timing = match budget {
            Some(b) => format!("{:.2} s of {} s", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.2} s", elapsed.as_secs_f64()),
        };
        println!("criterion {id} {}: {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
