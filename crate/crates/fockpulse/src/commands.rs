//! Subcommand implementations. Each writes its files into an output
//! directory and returns what it computed so callers can inspect it.

use std::path::{Path, PathBuf};

use fockpulse_core::analytic::{cascade_distribution, n_out_cascade_path};
use fockpulse_core::dynamics::uniform_grid;
use fockpulse_core::{
    build_coupling_table, compare, derived_rates, integrate, run_train, wigner_3j, wigner_6j, CouplingMode,
    CouplingTable, HalfInt, Polarization, PulseSchedule, SimulationResult, ThetaAccumulator,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{parse_scalar, set_path, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{ensure_dir, num, write_file, Table};
use crate::svg::{Axis, Plot, Series, Stroke, PALETTE};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "FOCKPULSE_THREADS";

pub struct Written {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

fn column_name(prefix: &str, m: HalfInt) -> String {
    format!("{prefix}_{m}")
}

/// `t, sigma_m..., flux, flux_over_k, n_out` for every output sample.
pub fn timeseries_table(result: &SimulationResult, k: f64) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(result.sublevels.iter().map(|m| column_name("sigma", *m)));
    header.extend(["flux", "flux_over_k", "n_out"].map(String::from));
    let mut table = Table::new(header);
    for (i, t) in result.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(result.population_row(i).iter().map(|p| num(*p)));
        row.push(num(result.flux[i]));
        row.push(num(result.flux[i] / k));
        row.push(num(result.n_out[i]));
        table.push(row);
    }
    table
}

fn validity_json(result: &SimulationResult) -> Value {
    Value::Array(
        result
            .validity
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "ratio": c.ratio,
                    "threshold": c.threshold,
                    "bound": if c.lower_bound { "min" } else { "max" },
                    "passed": c.passed,
                })
            })
            .collect(),
    )
}

fn tables_for(config: &RunConfig, schedule: &PulseSchedule) -> Result<Vec<CouplingTable>> {
    let atom = config.atom()?;
    let params = config.physical_params();
    let mode = config.options()?.mode;
    let mut tables: Vec<CouplingTable> = Vec::new();
    for p in schedule.pulses() {
        if !tables.iter().any(|t| t.polarization == p.polarization) {
            tables.push(build_coupling_table(&atom, &params, p.polarization, mode)?);
        }
    }
    Ok(tables)
}

fn summary_json(config: &RunConfig, schedule: &PulseSchedule, result: &SimulationResult) -> Result<Value> {
    let params = config.physical_params();
    let tables = tables_for(config, schedule)?;
    let rates: Vec<Value> = tables
        .iter()
        .map(|t| {
            let d = derived_rates(t, &params);
            json!({
                "polarization": t.polarization.name(),
                "effective_coupling": d.effective_coupling,
                "alpha": d.alpha,
                "gamma1_factor": d.gamma1_factor,
            })
        })
        .collect();
    let (peak_t, peak) = result.peak_flux();
    let mut summary = json!({
        "atom": config.atom()?.label,
        "n_out_final": result.final_photons(),
        "per_pulse": result.pulse_counts.iter().map(|c| json!({
            "index": c.index,
            "polarization": c.polarization.name(),
            "photons": c.photons,
        })).collect::<Vec<_>>(),
        "signal_to_noise": params.signal_to_noise(),
        "derived_rates": rates,
        "validity": validity_json(result),
        "all_valid": result.validity.all_passed(),
        "peak_flux": { "t": peak_t, "flux": peak, "flux_over_k": peak / params.k },
        "max_population_error": result.max_population_error(),
        "max_coherence": result.max_coherence,
        "integrator": {
            "accepted": result.stats.accepted,
            "rejected": result.stats.rejected,
            "evaluations": result.stats.evaluations,
        },
        "effective_config": serde_json::to_value(config).expect("config serializes"),
    });
    if result.mode == CouplingMode::Uniform && !result.spontaneous_emission {
        let alpha = tables[0].alpha.iter().copied().fold(0.0, f64::max);
        let start = result.population_row(0).iter().position(|p| *p == 1.0);
        if let Some(start) = start {
            let report = compare(result, schedule, alpha, start);
            summary["closed_form_comparison"] = json!({
                "comparable": report.comparable,
                "reason": report.reason,
                "max_abs": report.max_abs,
                "rms": report.rms,
                "n_out_max_abs": if report.n_out_max_abs.is_finite() { json!(report.n_out_max_abs) } else { Value::Null },
            });
        }
    }
    Ok(summary)
}

fn envelope_series(schedule: &PulseSchedule, times: &[f64], scale: f64) -> Vec<f64> {
    times
        .iter()
        .map(|t| schedule.active_at(*t).map_or(0.0, |i| scale * schedule.pulses()[i].shape.envelope(*t)))
        .collect()
}

fn dynamics_plot(title: &str, schedule: &PulseSchedule, result: &SimulationResult) -> Plot {
    let peak = result.flux.iter().copied().fold(0.0, f64::max);
    Plot {
        title: title.into(),
        x_label: "t (µs)".into(),
        left_label: "n_out".into(),
        right_label: Some("flux (photons/µs)".into()),
        series: vec![
            Series {
                name: "n_out".into(),
                x: result.times.clone(),
                y: result.n_out.clone(),
                color: PALETTE[0],
                stroke: Stroke::Solid,
                axis: Axis::Left,
            },
            Series {
                name: "flux".into(),
                x: result.times.clone(),
                y: result.flux.clone(),
                color: PALETTE[1],
                stroke: Stroke::Solid,
                axis: Axis::Right,
            },
            Series {
                name: "pump envelope (scaled)".into(),
                x: result.times.clone(),
                y: envelope_series(schedule, &result.times, if peak > 0.0 { peak } else { 1.0 }),
                color: PALETTE[8],
                stroke: Stroke::Dotted,
                axis: Axis::Right,
            },
        ],
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn finish(out: &Path, files: &mut Vec<PathBuf>, name: &str, bytes: &[u8]) -> Result<()> {
    let path = out.join(name);
    write_file(&path, bytes)?;
    files.push(path);
    Ok(())
}

/// Runs the configured schedule and writes `timeseries.csv`, `summary.json`
/// and `plot.svg`.
pub fn simulate(config: &RunConfig, out: &Path, svg: bool) -> Result<(SimulationResult, Written)> {
    let schedule = config.schedule()?;
    let result = integrate(&config.atom()?, &config.physical_params(), &schedule, &config.options()?)?;
    let summary = summary_json(config, &schedule, &result)?;
    ensure_dir(out)?;
    let mut files = Vec::new();
    finish(out, &mut files, "timeseries.csv", &timeseries_table(&result, config.physical_params().k).to_bytes())?;
    let summary_path = out.join("summary.json");
    write_json(&summary_path, &summary)?;
    files.push(summary_path);
    if svg {
        let plot = dynamics_plot("Photon number and flux", &schedule, &result);
        finish(out, &mut files, "plot.svg", plot.render().as_bytes())?;
    }
    Ok((result, Written { files, summary }))
}

/// Alternating σ⁺/σ⁻ train of `cycles` pulses.
pub fn train(config: &RunConfig, cycles: usize, out: &Path, svg: bool) -> Result<(SimulationResult, Written)> {
    let schedule = config.train_schedule(cycles)?;
    let result = run_train(&config.atom()?, &config.physical_params(), &schedule, &config.options()?)?;
    let mut summary = summary_json(config, &schedule, &result)?;
    let counts: Vec<f64> = result.pulse_counts.iter().map(|c| c.photons).collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let lo = counts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = counts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    summary["cycles"] = json!(cycles);
    summary["mean_per_cycle"] = json!(mean);
    summary["max_pairwise_spread"] = json!(spread);
    summary["spread_below_1e-3"] = json!(spread < 1e-3);

    let mut per_cycle = Table::new(["cycle", "polarization", "photons", "deviation_from_mean"]);
    for c in &result.pulse_counts {
        per_cycle.push(vec![
            (c.index + 1).to_string(),
            c.polarization.name().to_string(),
            num(c.photons),
            num(c.photons - mean),
        ]);
    }

    ensure_dir(out)?;
    let mut files = Vec::new();
    finish(out, &mut files, "timeseries.csv", &timeseries_table(&result, config.physical_params().k).to_bytes())?;
    finish(out, &mut files, "per_cycle.csv", &per_cycle.to_bytes())?;
    let summary_path = out.join("summary.json");
    write_json(&summary_path, &summary)?;
    files.push(summary_path);
    if svg {
        let plot = dynamics_plot("Pulse train", &schedule, &result);
        finish(out, &mut files, "plot.svg", plot.render().as_bytes())?;
    }
    Ok((result, Written { files, summary }))
}

/// Lossless cascade `P_j(t)` for the configured pulse, with uniform rates.
pub struct Distribution {
    pub times: Vec<f64>,
    pub theta: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Row-major `P_0..P_N` per sample.
    pub probabilities: Vec<Vec<f64>>,
    pub n_out: Vec<f64>,
}

pub fn analytic_distribution(config: &RunConfig) -> Result<Distribution> {
    let atom = config.atom()?;
    let shape = config.template()?;
    let steps = atom.f_ground.twice() as usize;
    let alpha = match config.theta_max {
        Some(theta) => theta / shape.area(),
        None => {
            let table = build_coupling_table(
                &atom,
                &config.physical_params(),
                config.polarization.into(),
                CouplingMode::Uniform,
            )?;
            table.alpha.iter().copied().fold(0.0, f64::max)
        }
    };
    let (start, end) = shape.support();
    let times = uniform_grid(start, end, shape.duration, config.integrator.points_per_duration);
    let theta = ThetaAccumulator::for_pulse(&shape, alpha, &times).theta;
    let probabilities =
        theta.iter().map(|th| Ok(cascade_distribution(*th, steps)?.probabilities)).collect::<Result<Vec<_>>>()?;
    let n_out = n_out_cascade_path(&theta, steps)?;
    let envelope = times.iter().map(|t| shape.envelope(*t)).collect();
    Ok(Distribution { times, theta, envelope, probabilities, n_out })
}

/// Writes `distribution.csv` and `plot.svg` for the closed-form cascade.
pub fn analytic(config: &RunConfig, out: &Path, svg: bool) -> Result<(Distribution, Written)> {
    let d = analytic_distribution(config)?;
    let levels = d.probabilities.first().map_or(1, Vec::len);
    let mut header = vec!["theta".to_string(), "t".into(), "envelope".into()];
    header.extend((0..levels).map(|j| format!("P_{j}")));
    header.push("n_out".into());
    let mut table = Table::new(header);
    for i in 0..d.times.len() {
        let mut row = vec![num(d.theta[i]), num(d.times[i]), num(d.envelope[i])];
        row.extend(d.probabilities[i].iter().map(|p| num(*p)));
        row.push(num(d.n_out[i]));
        table.push(row);
    }
    ensure_dir(out)?;
    let mut files = Vec::new();
    finish(out, &mut files, "distribution.csv", &table.to_bytes())?;
    if svg {
        let mut series: Vec<Series> = (0..levels)
            .map(|j| Series {
                name: format!("P_{j}"),
                x: d.times.clone(),
                y: d.probabilities.iter().map(|p| p[j]).collect(),
                color: PALETTE[j % PALETTE.len()],
                stroke: Stroke::Solid,
                axis: Axis::Left,
            })
            .collect();
        series.push(Series {
            name: "pump envelope".into(),
            x: d.times.clone(),
            y: d.envelope.clone(),
            color: "#000000",
            stroke: Stroke::Dotted,
            axis: Axis::Left,
        });
        let plot = Plot {
            title: "Photon-number distribution".into(),
            x_label: "t (µs)".into(),
            left_label: "probability".into(),
            right_label: None,
            series,
        };
        finish(out, &mut files, "plot.svg", plot.render().as_bytes())?;
    }
    let last = d.theta.len() - 1;
    let summary = json!({
        "levels": levels,
        "theta_final": d.theta[last],
        "n_out_final": d.n_out[last],
        "probabilities_final": d.probabilities[last],
    });
    Ok((d, Written { files, summary }))
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: Value,
    pub n_out: f64,
    pub peak_time: f64,
    pub peak_flux: f64,
    pub signal_to_noise: f64,
    pub validity: Vec<(&'static str, bool)>,
}

/// Worker count: the request (or all cores) capped by `FOCKPULSE_THREADS`.
pub fn sweep_threads(requested: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|n| *n > 0);
    let n = requested.unwrap_or(available);
    cap.map_or(n, |c| n.min(c)).max(1)
}

/// Re-runs the configuration with `path` set to each value, concurrently.
/// Rows come back in grid order.
pub fn sweep_rows(config: &RunConfig, path: &str, values: &[String], threads: usize) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let base = serde_json::to_value(config).expect("config serializes");
    let configs = values
        .iter()
        .map(|raw| {
            let value = parse_scalar(raw);
            let mut doc = base.clone();
            set_path(&mut doc, path, value.clone())?;
            let text = doc.to_string();
            let point = crate::config::parse(&text, &config.base_dir, &[])
                .map_err(|e| CliError::Config(format!("sweep value {raw:?} for {path}: {e}")))?;
            Ok((value, point))
        })
        .collect::<Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Numerical(format!("cannot start sweep workers: {e}")))?;
    pool.install(|| {
        configs
            .par_iter()
            .map(|(value, point)| {
                let schedule = point.schedule()?;
                let params = point.physical_params();
                let r = integrate(&point.atom()?, &params, &schedule, &point.options()?)?;
                let (peak_time, peak_flux) = r.peak_flux();
                Ok(SweepRow {
                    value: value.clone(),
                    n_out: r.final_photons(),
                    peak_time,
                    peak_flux,
                    signal_to_noise: params.signal_to_noise(),
                    validity: r.validity.checks.iter().map(|c| (c.name, c.passed)).collect(),
                })
            })
            .collect()
    })
}

fn value_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), num),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn sweep(
    config: &RunConfig,
    path: &str,
    values: &[String],
    threads: usize,
    out: &Path,
) -> Result<(Vec<SweepRow>, Written)> {
    let rows = sweep_rows(config, path, values, threads)?;
    let mut header = vec!["value".to_string(), "n_out".into(), "peak_time".into(), "peak_flux".into(), "r_sn".into()];
    if let Some(first) = rows.first() {
        header.extend(first.validity.iter().map(|(name, _)| name.to_string()));
    }
    header.push("all_valid".into());
    let mut table = Table::new(header);
    for r in &rows {
        let mut row =
            vec![value_cell(&r.value), num(r.n_out), num(r.peak_time), num(r.peak_flux), num(r.signal_to_noise)];
        row.extend(r.validity.iter().map(|(_, ok)| ok.to_string()));
        row.push(r.validity.iter().all(|(_, ok)| *ok).to_string());
        table.push(row);
    }
    ensure_dir(out)?;
    let mut files = Vec::new();
    finish(out, &mut files, "sweep.csv", &table.to_bytes())?;
    let summary = json!({ "parameter": path, "points": rows.len(), "threads": threads });
    Ok((rows, Written { files, summary }))
}

/// The coupling table as rows `kind, ground_m, excited_m, q, factor, value, exact_zero`.
pub fn coeffs_table(table: &CouplingTable) -> Table {
    let mut out = Table::new(["kind", "ground_m", "excited_m", "q", "factor", "value", "exact_zero"]);
    let q = table.polarization.q();
    for p in &table.pump {
        let target = p.ground + HalfInt::from_int(q);
        let kind = if table.atom.sublevel_index(target).is_ok() { "pump" } else { "cycling" };
        out.push(vec![
            kind.into(),
            p.ground.to_string(),
            p.excited.to_string(),
            q.to_string(),
            num(p.factor.value),
            num(p.rabi),
            p.factor.is_exact_zero.to_string(),
        ]);
    }
    for c in &table.cavity {
        out.push(vec![
            "cavity".into(),
            c.sublevel.to_string(),
            c.sublevel.to_string(),
            "0".into(),
            num(c.factor.value),
            num(c.coupling),
            c.factor.is_exact_zero.to_string(),
        ]);
    }
    for d in &table.decay {
        out.push(vec![
            "decay".into(),
            d.ground.to_string(),
            d.excited.to_string(),
            d.q.to_string(),
            num(d.branching),
            num(d.rate),
            d.is_exact_zero.to_string(),
        ]);
    }
    out
}

pub fn coeffs(config: &RunConfig, out: &Path) -> Result<(CouplingTable, Written)> {
    let mode = config.options()?.mode;
    let polarization: Polarization = config.polarization.into();
    let table = build_coupling_table(&config.atom()?, &config.physical_params(), polarization, mode)?;
    ensure_dir(out)?;
    let mut files = Vec::new();
    finish(out, &mut files, "coeffs.csv", &coeffs_table(&table).to_bytes())?;
    let summary = json!({
        "polarization": polarization.name(),
        "pump_rows": table.pump.len(),
        "raman_steps": table.raman_steps().count(),
        "cavity_rows": table.cavity.len(),
        "decay_rows": table.decay.len(),
    });
    Ok((table, Written { files, summary }))
}

/// Evaluates a 3-j (six arguments `j1 j2 j3 m1 m2 m3`) or 6-j symbol.
pub fn wigner(six_j: bool, args: &[String]) -> Result<(f64, bool)> {
    if args.len() != 6 {
        return Err(CliError::Config(format!("expected 6 arguments, got {}", args.len())));
    }
    let mut h = [HalfInt::ZERO; 6];
    for (slot, raw) in h.iter_mut().zip(args) {
        *slot = raw.parse().map_err(|e| CliError::Config(format!("{raw:?}: {e}")))?;
    }
    let v = if six_j {
        wigner_6j(h[0], h[1], h[2], h[3], h[4], h[5])?
    } else {
        wigner_3j(h[0], h[1], h[2], h[3], h[4], h[5])?
    };
    Ok((v.value, v.is_exact_zero))
}
