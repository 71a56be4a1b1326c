//! Acceptance suite: one pass/fail line per criterion with its runtime.
//! Exits non-zero when any criterion fails.

use std::time::{Duration, Instant};

use fockpulse::commands;
use fockpulse::config::{self, RunConfig, BUILTINS};
use fockpulse_core::{
    build_coupling_table, compare, derived_rates, integrate, run_train, wigner_3j, wigner_6j, CouplingMode, HalfInt,
    Polarization, SimulationResult,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const FIXTURE_3J: &str = include_str!("../../core/tests/fixtures/wigner_3j.tsv");
const FIXTURE_6J: &str = include_str!("../../core/tests/fixtures/wigner_6j.tsv");

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn load(name: &str, overrides: &[&str]) -> RunConfig {
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    config::load(&format!("builtin:{name}"), &overrides).expect("bundled config loads")
}

fn simulate(config: &RunConfig) -> SimulationResult {
    integrate(
        &config.atom().unwrap(),
        &config.physical_params(),
        &config.schedule().unwrap(),
        &config.options().unwrap(),
    )
    .expect("integration succeeds")
}

fn uniform_alpha(config: &RunConfig) -> f64 {
    let table = build_coupling_table(
        &config.atom().unwrap(),
        &config.physical_params(),
        Polarization::SigmaPlus,
        CouplingMode::Uniform,
    )
    .unwrap();
    table.alpha[0]
}

fn fig3_photons() -> Outcome {
    let r = simulate(&load("fig3.config", &[]));
    let n = r.final_photons();
    outcome((3.88..=3.98).contains(&n), format!("n_out(+inf) = {n:.5}"))
}

fn fig2_oracle() -> Outcome {
    let c = load("fig2.config", &[]);
    let r = simulate(&c);
    let report = compare(&r, &c.schedule().unwrap(), uniform_alpha(&c), 0);
    let top = *r.population_row(r.len() - 1).last().unwrap();
    let dev = report.max_deviation();
    outcome(
        report.comparable && dev < 1e-6 && top > 0.999,
        format!("max |P_j - closed form| = {dev:.2e}, P_4(+inf) = {top:.6}"),
    )
}

fn signal_to_noise() -> Outcome {
    let c = load("fig2.config", &[]);
    let params = c.physical_params();
    let table =
        build_coupling_table(&c.atom().unwrap(), &params, Polarization::SigmaPlus, CouplingMode::Actual).unwrap();
    let r_sn = derived_rates(&table, &params).signal_to_noise;
    outcome((r_sn - 22.7).abs() <= 0.1, format!("R_sn = {r_sn:.4}"))
}

fn conservation() -> Outcome {
    let mut worst = 0.0f64;
    for (name, _) in BUILTINS {
        for losses in ["true", "false"] {
            let set = format!("modes.spontaneous_emission={losses}");
            let r = simulate(&load(name, &[&set]));
            worst = worst.max(r.max_population_error());
        }
    }
    outcome(worst < 1e-8, format!("max |sum sigma - 1| = {worst:.2e} over {} presets x losses on/off", BUILTINS.len()))
}

fn train_invariance() -> Outcome {
    let c = load("fig3.config", &[]);
    let schedule = c.train_schedule(5).unwrap();
    let r = run_train(&c.atom().unwrap(), &c.physical_params(), &schedule, &c.options().unwrap()).unwrap();
    let counts: Vec<f64> = r.pulse_counts.iter().map(|p| p.photons).collect();
    let lo = counts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = counts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let in_range = counts.iter().all(|n| (3.88..=3.98).contains(n));
    let shown: Vec<String> = counts.iter().map(|n| format!("{n:.5}")).collect();
    outcome(
        counts.len() == 5 && hi - lo < 1e-3 && in_range,
        format!("per-cycle [{}], spread = {:.2e}", shown.join(", "), hi - lo),
    )
}

fn initial_states() -> Outcome {
    let mut ok = true;
    let mut shown = Vec::new();
    for (m, want) in [("-1", 3.0), ("0", 2.0), ("1", 1.0)] {
        let set = format!("initial_m_f=\"{m}\"");
        let n = simulate(&load("fig2.config", &[&set])).final_photons();
        ok &= (n - want).abs() < 1e-3;
        shown.push(format!("m={m}: {n:.5}"));
    }
    outcome(ok, shown.join(", "))
}

fn fixture_rows(text: &str) -> impl Iterator<Item = ([HalfInt; 6], f64, bool)> + '_ {
    text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).map(|line| {
        let f: Vec<&str> = line.split('\t').collect();
        let mut h = [HalfInt::ZERO; 6];
        for (slot, v) in h.iter_mut().zip(&f) {
            *slot = HalfInt::from_twice(v.parse().unwrap());
        }
        (h, f[6].parse().unwrap(), f[7] == "1")
    })
}

fn angular_momentum() -> Outcome {
    let mut oracle_dev = 0.0f64;
    let mut zeros_exact = true;
    for (h, want, zero) in fixture_rows(FIXTURE_3J) {
        let v = wigner_3j(h[0], h[1], h[2], h[3], h[4], h[5]).unwrap();
        oracle_dev = oracle_dev.max((v.value - want).abs());
        zeros_exact &= v.is_exact_zero == zero && (!zero || v.value == 0.0);
    }
    for (h, want, zero) in fixture_rows(FIXTURE_6J) {
        let v = wigner_6j(h[0], h[1], h[2], h[3], h[4], h[5]).unwrap();
        oracle_dev = oracle_dev.max((v.value - want).abs());
        zeros_exact &= v.is_exact_zero == zero && (!zero || v.value == 0.0);
    }

    let h = HalfInt::from_twice;
    let w3 = |a: [i32; 6]| wigner_3j(h(a[0]), h(a[1]), h(a[2]), h(a[3]), h(a[4]), h(a[5])).unwrap().value;
    let w6 = |a: [i32; 6]| wigner_6j(h(a[0]), h(a[1]), h(a[2]), h(a[3]), h(a[4]), h(a[5])).unwrap().value;
    let sign = |twice_sum: i32| if (twice_sum / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let ok = |a: i32, b: i32, c: i32| c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0;

    let cases = 1000;
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let three_j = (0..=10i32, 0..=10i32, 0..=20i32, 0..=10i32, 0..=10i32, 0..=20i32);
    let symmetric_3j = runner.run(&three_j, |(a, b, ci, xi, yi, other)| {
        let c = (a - b).abs() + 2 * (ci % ((a + b - (a - b).abs()) / 2 + 1));
        let x = -a + 2 * (xi % (a + 1));
        let y = -b + 2 * (yi % (b + 1));
        let z = -x - y;
        if z.abs() > c || c > 10 {
            return Ok(());
        }
        let v = w3([a, b, c, x, y, z]);
        let odd = sign(a + b + c);
        prop_assert!((w3([b, c, a, y, z, x]) - v).abs() < 1e-12);
        prop_assert!((w3([b, a, c, y, x, z]) - odd * v).abs() < 1e-12);
        prop_assert!((w3([a, b, c, -x, -y, -z]) - odd * v).abs() < 1e-12);
        // orthogonality in (m1, m2) against another allowed j3'
        let c2 = (a - b).abs() + 2 * (other % ((a + b - (a - b).abs()) / 2 + 1));
        if z.abs() <= c2 {
            let mut sum = 0.0;
            for m1 in (-a..=a).step_by(2) {
                let m2 = -m1 - z;
                if m2.abs() <= b {
                    sum += w3([a, b, c, m1, m2, z]) * w3([a, b, c2, m1, m2, z]);
                }
            }
            let want = if c == c2 { 1.0 } else { 0.0 };
            prop_assert!((f64::from(c + 1) * sum - want).abs() < 1e-12);
        }
        Ok(())
    });

    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let symmetric_6j = runner.run(&(prop::array::uniform6(0..=10i32), 0..=20usize), |(j, pick)| {
        let [a, b, c, d, e, f] = j;
        if !(ok(a, b, c) && ok(a, e, f) && ok(d, b, f) && ok(d, e, c)) {
            let v = wigner_6j(h(a), h(b), h(c), h(d), h(e), h(f)).unwrap();
            prop_assert!(v.is_exact_zero && v.value == 0.0);
            return Ok(());
        }
        let v = w6(j);
        prop_assert!((w6([b, a, c, e, d, f]) - v).abs() < 1e-12);
        prop_assert!((w6([a, c, b, d, f, e]) - v).abs() < 1e-12);
        prop_assert!((w6([d, e, c, a, b, f]) - v).abs() < 1e-12);
        let options: Vec<i32> = (0..=20).filter(|&z| ok(a, e, z) && ok(d, b, z)).collect();
        let f2 = options[pick % options.len()];
        let mut sum = 0.0;
        for x in ((a - b).abs()..=a + b).step_by(2) {
            sum += f64::from(x + 1) * w6([a, b, x, d, e, f]) * w6([a, b, x, d, e, f2]);
        }
        let want = if f == f2 { 1.0 } else { 0.0 };
        prop_assert!((f64::from(f + 1) * sum - want).abs() < 1e-12);
        Ok(())
    });

    let passed = oracle_dev < 1e-14 && zeros_exact && symmetric_3j.is_ok() && symmetric_6j.is_ok();
    let mut detail = format!(
        "oracle max dev = {oracle_dev:.1e}, exact zeros {}, 3-j props {}, 6-j props {} ({cases} cases each)",
        if zeros_exact { "ok" } else { "MISMATCH" },
        if symmetric_3j.is_ok() { "ok" } else { "FAILED" },
        if symmetric_6j.is_ok() { "ok" } else { "FAILED" },
    );
    if let Err(e) = &symmetric_3j {
        detail.push_str(&format!("; {e}"));
    }
    if let Err(e) = &symmetric_6j {
        detail.push_str(&format!("; {e}"));
    }
    outcome(passed, detail)
}

fn flux_properties() -> Outcome {
    let fig3 = simulate(&load("fig3.config", &[]));
    let non_negative = fig3.flux.iter().all(|f| *f >= 0.0);
    let (t_peak, _) = fig3.peak_flux();

    let c = load("fig2.config", &[]);
    let r = simulate(&c);
    let alpha = uniform_alpha(&c);
    let shape = c.template().unwrap();
    let mut identity = 0.0f64;
    for (i, t) in r.times.iter().enumerate() {
        let top = *r.population_row(i).last().unwrap();
        identity = identity.max((r.flux[i] - alpha * shape.envelope(*t) * (1.0 - top)).abs());
    }
    // flux relative to the bare pump rate once the top level is nearly full
    let mut tail = 0.0f64;
    for (i, t) in r.times.iter().enumerate() {
        let f = shape.envelope(*t);
        if *r.population_row(i).last().unwrap() > 0.999 && f > 1e-3 {
            tail = tail.max(r.flux[i] / (alpha * f));
        }
    }
    let passed = non_negative && identity < 1e-12 && tail <= 1e-3 + 1e-12 && t_peak < 0.0;
    outcome(
        passed,
        format!(
            "flux >= 0: {non_negative}, |flux - alpha f (1 - sigma_F)| = {identity:.1e}, flux/(alpha f) at sigma_F > 0.999: {tail:.1e}, Fig. 3 peak at t = {t_peak:.3} us"
        ),
    )
}

fn cesium() -> Outcome {
    let r = simulate(&load("cs_f4.config", &[]));
    let n = r.final_photons();
    outcome((n - 8.0).abs() <= 1e-3, format!("n_out(+inf) = {n:.6}"))
}

fn determinism() -> Outcome {
    let mut ok = true;
    let mut checked = 0;
    for (name, _) in BUILTINS {
        let c = load(name, &[]);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        commands::simulate(&c, a.path(), false).unwrap();
        commands::simulate(&c, b.path(), false).unwrap();
        let read = |dir: &tempfile::TempDir| std::fs::read(dir.path().join("timeseries.csv")).unwrap();
        ok &= read(&a) == read(&b);
        checked += 1;
    }
    outcome(ok, format!("{checked} presets, timeseries.csv byte-identical across two runs: {ok}"))
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "Fig. 3 reproduction", Some(Duration::from_secs(5)), fig3_photons),
        (2, "Fig. 2 oracle equivalence", Some(Duration::from_secs(2)), fig2_oracle),
        (3, "Signal-to-noise", None, signal_to_noise),
        (4, "Conservation", None, conservation),
        (5, "Train invariance", Some(Duration::from_secs(30)), train_invariance),
        (6, "Initial-state programmability", None, initial_states),
        (7, "Angular-momentum suite", None, angular_momentum),
        (8, "Flux properties", None, flux_properties),
        (9, "Cs generalization", None, cesium),
        (10, "Determinism", None, determinism),
    ];
    let mut failures = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let passed = o.passed && in_time;
        if !passed {
            failures += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" (limit {:.0} s)", l.as_secs_f64()));
        println!(
            "criterion {id:>2} {}: {name} | {} | {:.3} s{budget}",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
