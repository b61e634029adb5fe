use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

use super::config::{ChernSource, Format, Level, ResolvedModel, RunConfig};
use super::output::{Artifacts, Cell, Report, Table};
use super::svg::{Chart, Series};
use crate::circuit::{calibrate_effective, effective_coupling, CircuitSpec, ModulationSpec, QubitDrive, Tone, PAIRS};
use crate::dynamics::{driven_qgt, DrivenQgt, ProtocolSpec, RUNS};
use crate::error::{Error, Result};
use crate::models::{
    BhzModel, BlockModel, DiamondModel, Pairing, ParamHamiltonian, ParamPoint, BHZ_PAIRING, DIAMOND_PAIRING,
};
use crate::numkit::{angular_to_mhz, ComplexMat};
use crate::qgt::{qgt_sum_over_states, Band, QgtOptions};
use crate::topology::{
    chern_from_metric, chern_from_samples, chern_lattice, detg_curvature_residual, oriented_curvature, spin_chern,
    ChernResult, MetricSample, SphereGrid,
};

/// Default `θ` samples of the Chern quadrature, per source.
pub const ANALYTIC_N_THETA: usize = 101;
pub const DRIVEN_N_THETA: usize = 11;

/// Smallest denominator of the relative-error column, so an absolute error
/// of 0.01 reads as 5%.
pub const RELATIVE_ERROR_FLOOR: f64 = 0.2;

/// Result of a command: the files and, for `chern`, the Z2 gate.
#[derive(Debug)]
pub struct CommandOutput {
    pub artifacts: Artifacts,
    /// `Some((z2sum, bound))` when the Z2 bound is violated.
    pub z2_violation: Option<(f64, f64)>,
}

impl From<Artifacts> for CommandOutput {
    fn from(artifacts: Artifacts) -> Self {
        Self { artifacts, z2_violation: None }
    }
}

fn band(level: Level) -> Band {
    match level {
        Level::Upper => Band::Highest,
        Level::Lower => Band::Lowest,
    }
}

/// 1-based block holding most of the weight of column `j`.
fn block_of(basis: &ComplexMat, j: usize, pairing: &Pairing) -> usize {
    let (mut best, mut weight) = (0, -1.0);
    for b in 0..2 {
        let w: f64 = pairing.block(b).iter().map(|&i| basis[(i, j)].norm_sqr()).sum();
        if w > weight {
            best = b;
            weight = w;
        }
    }
    best + 1
}

/// Diagonal `(g_μμ, g_νν, g_μν, F_μν)` of every state in the group, plus its block.
fn geometry(
    model: &dyn ParamHamiltonian,
    pt: &ParamPoint,
    names: (&str, &str),
    opts: &QgtOptions,
    pairing: &Pairing,
) -> Result<Vec<(usize, [f64; 4])>> {
    let (mu, nu) = names;
    let qmm = qgt_sum_over_states(model, pt, mu, mu, opts)?;
    let qnn = qgt_sum_over_states(model, pt, nu, nu, opts)?;
    let qmn = qgt_sum_over_states(model, pt, mu, nu, opts)?;
    Ok((0..qmn.degeneracy())
        .map(|j| {
            let vals = [qmm.g[(j, j)].re, qnn.g[(j, j)].re, qmn.g[(j, j)].re, qmn.f[(j, j)].re];
            (block_of(&qmn.basis, j, pairing), vals)
        })
        .collect())
}

fn metadata(cfg: &RunConfig) -> Result<Value> {
    fn v<T: serde::Serialize>(x: &T) -> Result<Value> {
        serde_json::to_value(x).map_err(|e| Error::Io(e.to_string()))
    }
    Ok(json!({
        "model": v(&cfg.model)?,
        "drive": v(&cfg.drive)?,
        "grid": v(&cfg.grid)?,
        "noise": v(&cfg.noise)?,
        "chern": v(&cfg.chern)?,
        "circuit": v(&cfg.circuit)?,
    }))
}

fn diamond(model: &ResolvedModel, command: &str) -> Result<DiamondModel> {
    match model {
        ResolvedModel::Diamond(m) => Ok(m.clone()),
        _ => Err(Error::ConfigInvalid(format!("`{command}` needs model.kind = \"diamond\""))),
    }
}

/// Closed-form metric and curvature over the configured grid.
pub fn cmd_analytic(cfg: &RunConfig, formats: &[Format]) -> Result<CommandOutput> {
    let r = cfg.resolve()?;
    let level = cfg.drive.level;
    let (model, axes, names, pairing, points): (Box<dyn ParamHamiltonian>, _, _, _, Vec<(f64, f64)>) = match &r.model {
        ResolvedModel::Diamond(m) => {
            let pts = r.theta.iter().flat_map(|&t| r.phi.iter().map(move |&p| (t, p))).collect();
            (Box::new(m.clone()), ["theta", "phi"], ["g_tt", "g_pp", "g_tp", "F_tp"], DIAMOND_PAIRING, pts)
        }
        ResolvedModel::Bhz(p) => {
            let pts = r.momenta.iter().flat_map(|&x| r.momenta.iter().map(move |&y| (x, y))).collect();
            (Box::new(BhzModel::new(*p)), ["kx", "ky"], ["g_xx", "g_yy", "g_xy", "F_xy"], BHZ_PAIRING, pts)
        }
        ResolvedModel::Circuit(_) => {
            return Err(Error::ConfigInvalid("`analytic` needs model.kind = \"diamond\" or \"bhz\"".into()))
        }
    };
    let opts = QgtOptions::block_basis(band(level), &pairing);
    let rows = points
        .par_iter()
        .map(|&(a, b)| {
            let pt = ParamPoint::from_pairs([(axes[0], a), (axes[1], b)]);
            geometry(model.as_ref(), &pt, (axes[0], axes[1]), &opts, &pairing)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new("analytic", &[axes[0], axes[1], "block", "j", names[0], names[1], names[2], names[3]]);
    for (&(a, b), states) in points.iter().zip(&rows) {
        for (j, (block, v)) in states.iter().enumerate() {
            table.push(vec![
                a.into(),
                b.into(),
                (*block).into(),
                (j + 1).into(),
                v[0].into(),
                v[1].into(),
                v[2].into(),
                v[3].into(),
            ]);
        }
    }

    let mut report = Report::new("analytic", formats, metadata(cfg)?);
    report.table(&table)?;
    report.chart("analytic", || {
        let first = points[0].1;
        let mut series = Vec::new();
        for j in 0..rows[0].len() {
            let pick = |k: usize| -> Vec<(f64, f64)> {
                points.iter().zip(&rows).filter(|((_, b), _)| *b == first).map(|(&(a, _), s)| (a, s[j].1[k])).collect()
            };
            if j == 0 {
                series.push(Series::line(names[0], pick(0)));
                series.push(Series::line(names[1], pick(1)));
            }
            series.push(Series::line(&format!("{} j={}", names[3], j + 1), pick(3)));
        }
        Chart {
            title: format!("Closed-form metric and curvature, {} pair", level_name(level)),
            x_label: axes[0].into(),
            y_label: "dimensionless".into(),
            series,
            description: conventions_text(),
        }
        .render()
    });
    Ok(report.finish()?.into())
}

fn level_name(level: Level) -> &'static str {
    match level {
        Level::Upper => "upper",
        Level::Lower => "lower",
    }
}

fn conventions_text() -> String {
    super::output::conventions().iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join("; ")
}

struct DrivePoint {
    amplitude: usize,
    detuning: usize,
    theta: f64,
    phi: f64,
    j: usize,
}

/// Rabi traces, fitted rates and extracted tensor components.
pub fn cmd_drive(cfg: &RunConfig, formats: &[Format]) -> Result<CommandOutput> {
    let r = cfg.resolve()?;
    let model = diamond(&r.model, "drive")?;
    let (mu, nu) = (cfg.drive.mu.as_str(), cfg.drive.nu.as_str());
    for name in [mu, nu] {
        if !model.has_param(name) {
            return Err(Error::ConfigInvalid(format!("drive parameter `{name}` is not theta or phi")));
        }
    }
    if mu == nu {
        return Err(Error::ConfigInvalid("drive.mu and drive.nu must differ".into()));
    }
    let opts = QgtOptions::block_basis(band(cfg.drive.level), &DIAMOND_PAIRING);
    let mut points = Vec::new();
    for a in 0..r.amplitudes.len() {
        for d in 0..r.detunings.len() {
            for &theta in &r.theta {
                for &phi in &r.phi {
                    for j in 0..2 {
                        points.push(DrivePoint { amplitude: a, detuning: d, theta, phi, j });
                    }
                }
            }
        }
    }
    let results = points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let spec = ProtocolSpec {
                detuning: r.detunings[p.detuning],
                samples: cfg.drive.samples,
                duration: r.duration,
                noise: r.noise,
                ..ProtocolSpec::new(r.amplitudes[p.amplitude], opts.clone())
            };
            let pt = DiamondModel::point(p.theta, p.phi);
            let measured = driven_qgt(&model, &pt, mu, nu, &spec, p.j, idx as u64)?;
            let exact = geometry(&model, &pt, (mu, nu), &opts, &DIAMOND_PAIRING)?;
            Ok((measured, exact[p.j]))
        })
        .collect::<Result<Vec<(DrivenQgt, (usize, [f64; 4]))>>>()?;

    let lead = ["amplitude_mhz", "detuning_mhz", "theta", "phi"];
    let mut traces =
        Table::new("drive_traces", &[&lead[..], &["j", "run", "t_us", "pop_prepared", "pop_partner"]].concat());
    let mut fits = Table::new("drive_fits", &[&lead[..], &["j", "run", "rabi_mhz", "s"]].concat());
    let mut qgt = Table::new(
        "drive_qgt",
        &[
            &lead[..],
            &[
                "block",
                "j",
                "g_mumu",
                "g_nunu",
                "g_munu",
                "F_munu",
                "g_mumu_exact",
                "g_nunu_exact",
                "g_munu_exact",
                "F_munu_exact",
                "rel_error",
            ],
        ]
        .concat(),
    );
    for (p, (m, (block, exact))) in points.iter().zip(&results) {
        let head = |row: Vec<Cell>| -> Vec<Cell> {
            let mut v = vec![
                cfg.drive.amplitudes_mhz[p.amplitude].into(),
                cfg.drive.detunings_mhz[p.detuning].into(),
                p.theta.into(),
                p.phi.into(),
            ];
            v.extend(row);
            v
        };
        for (k, trace) in m.traces.iter().enumerate() {
            for (i, &t) in trace.times.iter().enumerate() {
                traces.push(head(vec![
                    (p.j + 1).into(),
                    RUNS[k].into(),
                    t.into(),
                    trace.pop_ground[i].into(),
                    trace.pop_excited[i].into(),
                ]));
            }
            fits.push(head(vec![(p.j + 1).into(), RUNS[k].into(), angular_to_mhz(m.rabi[k]).into(), m.s[k].into()]));
        }
        let got = [m.g_mumu(), m.g_nunu(), m.g_munu(), m.f_munu()];
        let rel =
            got.iter().zip(exact).map(|(g, e)| (g - e).abs() / e.abs().max(RELATIVE_ERROR_FLOOR)).fold(0.0, f64::max);
        let mut row = vec![(*block).into(), (p.j + 1).into()];
        row.extend(got.iter().map(|&v| Cell::from(v)));
        row.extend(exact.iter().map(|&v| Cell::from(v)));
        row.push(rel.into());
        qgt.push(head(row));
    }

    let mut report = Report::new("drive", formats, metadata(cfg)?);
    report.value("parameters", json!({"mu": mu, "nu": nu}));
    report.table(&fits)?;
    report.table(&qgt)?;
    if formats.contains(&Format::Csv) {
        report.artifacts.add("drive_traces.csv".into(), traces.to_csv()?);
    }
    let desc = conventions_text();
    report.chart("drive_traces", || {
        let m = &results[0].0;
        Chart {
            title: format!("Rabi traces at theta = {:.3}, j = 1", points[0].theta),
            x_label: "t (us)".into(),
            y_label: "partner population".into(),
            series: m
                .traces
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    Series::line(RUNS[k], t.times.iter().copied().zip(t.pop_excited.iter().copied()).collect())
                })
                .collect(),
            description: desc.clone(),
        }
        .render()
    });
    report.chart("drive_qgt", || {
        let sel = |j: usize, k: usize, exact: bool| -> Vec<(f64, f64)> {
            points
                .iter()
                .zip(&results)
                .filter(|(p, _)| p.amplitude == 0 && p.detuning == 0 && p.phi == points[0].phi && p.j == j)
                .map(|(p, (m, (_, e)))| {
                    let got = [m.g_mumu(), m.g_nunu(), m.g_munu(), m.f_munu()];
                    (p.theta, if exact { e[k] } else { got[k] })
                })
                .collect()
        };
        let mut series = Vec::new();
        for (k, name) in [(0, "g_mumu"), (1, "g_nunu")] {
            series.push(Series::line(&format!("{name} exact"), sel(0, k, true)));
            series.push(Series::markers(&format!("{name} driven"), sel(0, k, false)));
        }
        for j in 0..2 {
            series.push(Series::line(&format!("F j={} exact", j + 1), sel(j, 3, true)));
            series.push(Series::markers(&format!("F j={} driven", j + 1), sel(j, 3, false)));
        }
        Chart {
            title: "Driven extraction against closed forms".into(),
            x_label: "theta".into(),
            y_label: "dimensionless".into(),
            series,
            description: desc.clone(),
        }
        .render()
    });
    if r.amplitudes.len() > 1 {
        report.chart("drive_rabi", || {
            let pts: Vec<(f64, f64)> = points
                .iter()
                .zip(&results)
                .filter(|(p, _)| p.detuning == 0 && p.theta == points[0].theta && p.phi == points[0].phi && p.j == 0)
                .map(|(p, (m, _))| (cfg.drive.amplitudes_mhz[p.amplitude], angular_to_mhz(m.rabi[0])))
                .collect();
            Chart {
                title: "Rabi rate of the mu drive against amplitude".into(),
                x_label: "A (MHz)".into(),
                y_label: "Omega (MHz)".into(),
                series: vec![Series::markers("mu run", pts)],
                description: desc.clone(),
            }
            .render()
        });
    }
    Ok(report.finish()?.into())
}

/// Per-block Chern numbers, spin Chern number and the Z2 gate.
pub fn cmd_chern(cfg: &RunConfig, formats: &[Format]) -> Result<CommandOutput> {
    let r = cfg.resolve()?;
    let c = &cfg.chern;
    if !(c.z2_bound >= 0.0) {
        return Err(Error::ConfigInvalid(format!("chern.z2_bound must be non-negative, got {}", c.z2_bound)));
    }
    let mut report = Report::new("chern", formats, metadata(cfg)?);
    let desc = conventions_text();
    let (plus, minus, grid_json) = match c.source {
        ChernSource::Lattice => {
            let params = match &r.model {
                ResolvedModel::Bhz(p) => *p,
                _ => return Err(Error::ConfigInvalid("lattice source needs model.kind = \"bhz\"".into())),
            };
            let block = |b: usize| chern_lattice(&BlockModel::new(BhzModel::new(params), BHZ_PAIRING, b), c.n_grid);
            (block(0)?.with_block(1), block(1)?.with_block(2), json!({"n_grid": c.n_grid}))
        }
        ChernSource::Analytic | ChernSource::Driven => {
            let model = diamond(&r.model, "chern")?;
            let default_n = if c.source == ChernSource::Analytic { ANALYTIC_N_THETA } else { DRIVEN_N_THETA };
            let grid = SphereGrid::new(c.n_theta.unwrap_or(default_n), c.n_phi)
                .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
            let pts = grid.points();
            let opts = QgtOptions::block_basis(Band::Highest, &DIAMOND_PAIRING);
            // (block 1, block 2) metric samples per point, curvature already in QGT convention.
            let samples = pts
                .par_iter()
                .enumerate()
                .map(|(idx, &(t, p))| {
                    let pt = DiamondModel::point(t, p);
                    if c.source == ChernSource::Analytic {
                        let s = geometry(&model, &pt, ("theta", "phi"), &opts, &DIAMOND_PAIRING)?;
                        Ok(s.iter().map(|(_, v)| metric_sample(v)).collect::<Vec<_>>())
                    } else {
                        let spec = ProtocolSpec {
                            noise: r.noise,
                            duration: r.duration,
                            samples: cfg.drive.samples,
                            ..ProtocolSpec::new(r.amplitudes[0], opts.clone())
                        };
                        (0..2)
                            .map(|j| {
                                let m = driven_qgt(&model, &pt, "theta", "phi", &spec, j, (2 * idx + j) as u64)?;
                                Ok(MetricSample {
                                    g_tt: m.g_mumu(),
                                    g_pp: m.g_nunu(),
                                    g_tp: m.g_munu(),
                                    f_tp: m.f_munu(),
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    }
                })
                .collect::<Result<Vec<Vec<MetricSample>>>>()?;

            let mut curvature = Table::new("chern_curvature", &["theta", "phi", "block", "F_oriented", "sqrt_det_g"]);
            let mut results = Vec::new();
            let mut metric_json = serde_json::Map::new();
            for b in 0..2 {
                let column: Vec<MetricSample> = samples.iter().map(|s| s[b]).collect();
                let f: Vec<f64> = column.iter().map(|s| oriented_curvature(s.f_tp)).collect();
                for ((&(t, p), s), fv) in pts.iter().zip(&column).zip(&f) {
                    curvature.push(vec![t.into(), p.into(), (b + 1).into(), (*fv).into(), s.sqrt_det().ok().into()]);
                }
                results.push(chern_from_samples(grid, &f)?.with_block(b + 1));
                // Sign reference: the oriented curvature at the sample nearest the equator.
                let eq = (0..grid.n_theta)
                    .min_by(|&a, &b| (grid.theta(a) - 0.5 * PI).abs().total_cmp(&(grid.theta(b) - 0.5 * PI).abs()))
                    .unwrap_or(0);
                let metric_chern = chern_from_metric(grid, &column, f[eq * grid.n_phi])?;
                metric_json.insert(
                    format!("block{}", b + 1),
                    json!({
                        "value": metric_chern.value,
                        "method": metric_chern.method.name(),
                        "detg_residual": detg_curvature_residual(&column)?,
                    }),
                );
            }
            report.table(&curvature)?;
            report.value("metric", Value::Object(metric_json));
            let curves: Vec<Series> = (0..2)
                .map(|b| {
                    let pts: Vec<(f64, f64)> = pts
                        .iter()
                        .zip(&samples)
                        .filter(|((_, p), _)| *p == 0.0)
                        .map(|(&(t, _), s)| (t, oriented_curvature(s[b].f_tp)))
                        .collect();
                    Series::markers(&format!("block {}", b + 1), pts)
                })
                .collect();
            report.chart("chern_curvature", || {
                Chart {
                    title: "Oriented curvature at phi = 0".into(),
                    x_label: "theta".into(),
                    y_label: "F".into(),
                    series: curves,
                    description: desc.clone(),
                }
                .render()
            });
            let second = results.pop().expect("two blocks");
            let first = results.pop().expect("two blocks");
            (first, second, json!({"n_theta": grid.n_theta, "n_phi": grid.n_phi}))
        }
    };

    let (scn, z2sum) = spin_chern(plus.value, minus.value);
    let mut table = Table::new("chern", &["block", "value", "method", "grid_theta", "grid_phi"]);
    for res in [&plus, &minus] {
        table.push(chern_row(res));
    }
    report.table(&table)?;
    let pass = z2sum.abs() <= c.z2_bound;
    report.value("Cplus", json!(plus.value));
    report.value("Cminus", json!(minus.value));
    report.value("spinChern", json!(scn));
    report.value("z2sum", json!(z2sum));
    report.value("z2_bound", json!(c.z2_bound));
    report.value("z2_pass", json!(pass));
    report.value("method", json!(plus.method.name()));
    report.value("grid", grid_json);
    let artifacts = report.finish()?;
    Ok(CommandOutput { artifacts, z2_violation: (!pass).then_some((z2sum, c.z2_bound)) })
}

fn metric_sample(v: &[f64; 4]) -> MetricSample {
    MetricSample { g_tt: v[0], g_pp: v[1], g_tp: v[2], f_tp: v[3] }
}

fn chern_row(res: &ChernResult) -> Vec<Cell> {
    vec![
        res.block.unwrap_or(0).into(),
        res.value.into(),
        res.method.name().into(),
        res.grid_theta.into(),
        res.grid_phi.into(),
    ]
}

/// Bessel-law calibration table on the configured circuit.
pub fn cmd_circuit(cfg: &RunConfig, formats: &[Format]) -> Result<CommandOutput> {
    let r = cfg.resolve()?;
    let cs: CircuitSpec = match &r.model {
        ResolvedModel::Circuit(cs) => cs.clone(),
        _ => return Err(Error::ConfigInvalid("`circuit` needs model.kind = \"circuit\"".into())),
    };
    let sec = &cfg.circuit;
    let [a, b] = sec.pair;
    if !(1..=4).contains(&a) || !(1..=4).contains(&b) || a == b {
        return Err(Error::ConfigInvalid(format!("circuit.pair {:?} is not two distinct qubits 1..4", sec.pair)));
    }
    let (k, l) = (a - 1, b - 1);
    if !PAIRS.iter().any(|&(p, q)| (p, q) == (k, l) || (p, q) == (l, k)) {
        return Err(Error::ConfigInvalid(format!("qubits {a} and {b} are not ring neighbours")));
    }
    if sec.amp_over_freq.is_empty() || sec.amp_over_freq.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::ConfigInvalid("circuit.amp_over_freq must hold non-negative values".into()));
    }
    if !sec.phase.is_finite() {
        return Err(Error::ConfigInvalid("circuit.phase is not finite".into()));
    }
    let j = cs.coupling_between(k, l);
    let freq = (cs.omega_q[l] - cs.omega_q[k]).abs();
    if freq == 0.0 {
        return Err(Error::ConfigInvalid(format!("qubits {a} and {b} are degenerate")));
    }
    let rows = sec
        .amp_over_freq
        .par_iter()
        .map(|&x| {
            let ms = ModulationSpec {
                qubits: vec![QubitDrive {
                    qubit: k,
                    mean: cs.omega_q[k],
                    tones: vec![Tone { amplitude: x * freq, freq, phase: sec.phase }],
                }],
            };
            let predicted = effective_coupling(j, x)?;
            let measured = match calibrate_effective(&cs, &ms, (k, l), sec.duration_us) {
                Ok(cal) => Some(cal.coupling),
                Err(Error::NoOscillation(_)) => None,
                Err(e) => return Err(e),
            };
            Ok((x, measured, predicted))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new("circuit", &["amp_over_freq", "measured_mhz", "predicted_mhz", "rel_error"]);
    for &(x, m, p) in &rows {
        let rel = m.filter(|_| p > 0.0).map(|m| (m - p).abs() / p);
        table.push(vec![x.into(), m.map(angular_to_mhz).into(), angular_to_mhz(p).into(), rel.into()]);
    }
    let mut report = Report::new("circuit", formats, metadata(cfg)?);
    report.value("warnings", json!(cs.validity_warnings(&ModulationSpec::none())));
    report.table(&table)?;
    let desc = conventions_text();
    report.chart("circuit", || {
        let x_max = rows.iter().map(|r| r.0).fold(0.0, f64::max).max(0.1) * 1.1;
        let curve: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let x = x_max * i as f64 / 200.0;
                (x, effective_coupling(j, x).map(angular_to_mhz).unwrap_or(f64::NAN))
            })
            .collect();
        let measured: Vec<(f64, f64)> =
            rows.iter().filter_map(|&(x, m, _)| m.map(|m| (x, angular_to_mhz(m)))).collect();
        Chart {
            title: format!("Parametric exchange on pair {a}{b}"),
            x_label: "amplitude / frequency".into(),
            y_label: "coupling (MHz)".into(),
            series: vec![Series::line("|J J1(x)|", curve), Series::markers("full circuit", measured)],
            description: desc,
        }
        .render()
    });
    Ok(report.finish()?.into())
}
