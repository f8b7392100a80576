use std::fmt::Write as _;

use super::config::ExperimentConfig;
use super::{
    ExperimentArgs, Outcome, ScheduleArgs, ScheduleKind, SimulateArgs, SweepArgs, SweepMetric,
    SweepParam, VerifyArgs, EXIT_OK, EXIT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::evolve::{avg_distance, distance_integrand, Evolution, TimeSeries};
use crate::exec::{map_ordered, Execution};
use crate::models::ModelInstance;
use crate::pulses::{periodic_times, udd_times};
use crate::verify::{
    commuting_pair, fit_power_law, log_grid, random_pair, yangliu_deviation, NOISE_FLOOR,
};

/// Plain decimal with `digits` significant digits, trailing zeros dropped.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

pub fn schedule_csv(n: usize, total_time: f64, kind: ScheduleKind) -> Result<String> {
    let s = match kind {
        ScheduleKind::Udd => udd_times(n, total_time)?,
        ScheduleKind::Periodic => periodic_times(n, total_time)?,
    };
    let mut out = String::from("j,t_j\n");
    for (j, t) in s.times().iter().enumerate() {
        let _ = writeln!(out, "{},{}", j + 1, format_sig(*t, 15));
    }
    Ok(out)
}

pub(super) fn schedule(a: &ScheduleArgs) -> Outcome {
    match schedule_csv(a.n, a.total_time, a.kind) {
        Ok(csv) => Outcome::ok(csv),
        Err(e) => Outcome::usage(e),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum SeedVerdict {
    Exact,
    Slope(f64),
    Unfit(usize),
}

/// CSV, a one-line summary, and whether every seed met `slope >= n + 0.7`.
pub fn verify_csv(a: &VerifyArgs) -> Result<(String, String, bool)> {
    if a.points < 4 {
        return Err(Error::InvalidGrid(format!(
            "need at least 4 grid points, got {}",
            a.points
        )));
    }
    if a.dim == 0 || a.seeds == 0 {
        return Err(Error::InvalidGrid("dim and seeds must be positive".into()));
    }
    let grid = log_grid(a.t_min, a.t_max, a.points)?;
    let seeds: Vec<u64> = (0..a.seeds).map(|k| a.first_seed.wrapping_add(k)).collect();
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let runs = map_ordered(&seeds, exec, |&seed| {
        let (c, z) = if a.commuting_smoke {
            commuting_pair(a.dim, seed)
        } else {
            random_pair(a.dim, seed)
        };
        let devs = grid
            .iter()
            .map(|&t| yangliu_deviation(&c, &z, a.n, t))
            .collect::<Result<Vec<f64>>>()?;
        let verdict = if devs.iter().all(|&d| d <= NOISE_FLOOR) {
            SeedVerdict::Exact
        } else {
            match fit_power_law(&grid, &devs) {
                Ok(fit) => SeedVerdict::Slope(fit.slope),
                Err(Error::InsufficientFitPoints { usable }) => SeedVerdict::Unfit(usable),
                Err(e) => return Err(e),
            }
        };
        Ok((seed, devs, verdict))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let threshold = a.n as f64 + 0.7;
    let mut out = String::from("seed,T,deviation\n");
    for (seed, devs, _) in &runs {
        for (t, d) in grid.iter().zip(devs) {
            let _ = writeln!(out, "{seed},{t},{d}");
        }
    }
    let mut passed = 0;
    let mut min_slope = f64::INFINITY;
    for (seed, _, verdict) in &runs {
        match verdict {
            SeedVerdict::Exact => {
                passed += 1;
                let _ = writeln!(out, "{seed},slope,exact");
            }
            SeedVerdict::Slope(s) => {
                if *s >= threshold {
                    passed += 1;
                }
                min_slope = min_slope.min(*s);
                let _ = writeln!(out, "{seed},slope,{s}");
            }
            SeedVerdict::Unfit(usable) => {
                let _ = writeln!(out, "{seed},slope,unfit_{usable}_points");
            }
        }
    }
    let ok = passed == runs.len();
    let min_text = if min_slope.is_finite() {
        format!("{min_slope}")
    } else {
        "n/a".to_string()
    };
    let summary = format!(
        "verify: {passed}/{} seeds pass (N={}, threshold {threshold}, min slope {min_text}): {}",
        runs.len(),
        a.n,
        if ok { "PASS" } else { "FAIL" }
    );
    Ok((out, summary, ok))
}

pub(super) fn verify(a: &VerifyArgs) -> Outcome {
    match verify_csv(a) {
        Ok((csv, summary, ok)) => Outcome {
            stdout: csv,
            stderr: summary + "\n",
            code: if ok { EXIT_OK } else { EXIT_THRESHOLD },
        },
        Err(e) => Outcome::usage(e),
    }
}

fn resolve(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_env()?;
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidShape(format!("cannot read config {}: {e}", path.display()))
        })?;
        cfg.apply_file_text(&text)?;
    }
    if let Some(v) = a.model {
        cfg.model = v;
    }
    if let Some(v) = a.control {
        cfg.control = Some(v);
    }
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.total_time {
        cfg.total_time = v;
    }
    if let Some(v) = a.pulse {
        cfg.pulse = v;
    }
    if let Some(v) = a.c_ratio {
        cfg.c_ratio = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.samples {
        cfg.samples = v;
    }
    if let Some(v) = &a.initial {
        cfg.initial_state = Some(v.clone());
    }
    if let Some(v) = a.coupling {
        cfg.coupling = v;
    }
    if let Some(v) = a.bath_state {
        cfg.bath_state = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_log(a: &ExperimentArgs, model: &ModelInstance) -> Result<()> {
    if let Some(path) = &a.log_coefficients {
        std::fs::write(path, model.coefficient_log_csv())
            .map_err(|e| Error::InvalidShape(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_config(
    cfg: &ExperimentConfig,
    model: &ModelInstance,
    states: bool,
) -> Result<(TimeSeries, super::config::Prepared)> {
    let prep = cfg.prepare(model)?;
    let series = Evolution::new(model, &prep.observable, prep.schedule.clone())?
        .with_control(&prep.control)?
        .with_shape(prep.shape)
        .with_samples(cfg.samples)
        .with_states(states)
        .run(&prep.rho0)?;
    Ok((series, prep))
}

/// `t,F` (and `D_integrand` when `distance` is set) for one experiment.
pub fn simulate_csv(
    cfg: &ExperimentConfig,
    model: &ModelInstance,
    distance: bool,
) -> Result<String> {
    let (series, prep) = run_config(cfg, model, distance)?;
    let mut out = String::new();
    if distance {
        let states = series.reduced_states.as_deref().unwrap_or(&[]);
        let d = distance_integrand(states, &prep.rho_ref)?;
        out.push_str("t,F,D_integrand\n");
        for ((t, f), d) in series.times.iter().zip(&series.f_values).zip(&d) {
            let _ = writeln!(out, "{t},{f},{d}");
        }
    } else {
        out.push_str("t,F\n");
        for (t, f) in series.times.iter().zip(&series.f_values) {
            let _ = writeln!(out, "{t},{f}");
        }
    }
    Ok(out)
}

pub(super) fn simulate(a: &SimulateArgs) -> Outcome {
    let result = resolve(&a.experiment).and_then(|cfg| {
        let model = cfg.build_model();
        write_log(&a.experiment, &model)?;
        simulate_csv(&cfg, &model, a.distance)
    });
    match result {
        Ok(csv) => Outcome::ok(csv),
        Err(e) => Outcome::usage(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum SweepValue {
    Count(usize),
    Real(f64),
}

impl SweepValue {
    fn key(&self) -> f64 {
        match *self {
            SweepValue::Count(n) => n as f64,
            SweepValue::Real(x) => x,
        }
    }
}

fn parse_values(param: SweepParam, text: &str) -> Result<Vec<SweepValue>> {
    let bad = |s: &str| Error::InvalidGrid(format!("bad sweep value '{s}'"));
    let mut values = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match param {
            SweepParam::N => {
                if let Some((lo, hi)) = item.split_once("..") {
                    let lo: usize = lo.trim().parse().map_err(|_| bad(item))?;
                    let hi: usize = hi.trim().parse().map_err(|_| bad(item))?;
                    values.extend((lo..=hi).map(SweepValue::Count));
                } else {
                    values.push(SweepValue::Count(item.parse().map_err(|_| bad(item))?));
                }
            }
            _ => {
                let x: f64 = item.parse().map_err(|_| bad(item))?;
                if !(x.is_finite() && x > 0.0) {
                    return Err(bad(item));
                }
                values.push(SweepValue::Real(x));
            }
        }
    }
    if values.is_empty() {
        return Err(Error::InvalidGrid("no sweep values given".into()));
    }
    values.sort_by(|a, b| a.key().total_cmp(&b.key()));
    Ok(values)
}

/// One row per value, in ascending value order. All runs share the base
/// config's model and seed.
pub fn sweep_csv(
    base: &ExperimentConfig,
    model: &ModelInstance,
    param: SweepParam,
    values: &str,
    metric: SweepMetric,
    exec: Execution,
) -> Result<String> {
    let values = parse_values(param, values)?;
    let rows = map_ordered(&values, exec, |v| {
        let mut cfg = base.clone();
        match (param, *v) {
            (SweepParam::N, SweepValue::Count(n)) => cfg.n = n,
            (SweepParam::CRatio, SweepValue::Real(x)) => cfg.c_ratio = x,
            (SweepParam::TotalTime, SweepValue::Real(x)) => cfg.total_time = x,
            _ => unreachable!("values are parsed per parameter"),
        }
        let want_states = metric == SweepMetric::DBar;
        let (series, prep) = run_config(&cfg, model, want_states)?;
        match metric {
            SweepMetric::DBar => avg_distance(&series, &prep.rho_ref, cfg.total_time),
            SweepMetric::FinalF => Ok(series.final_f()),
        }
    });
    let mut out = match metric {
        SweepMetric::DBar => String::from("value,D_bar\n"),
        SweepMetric::FinalF => String::from("value,final_F\n"),
    };
    for (v, row) in values.iter().zip(rows) {
        let row = row?;
        match v {
            SweepValue::Count(n) => {
                let _ = writeln!(out, "{n},{row}");
            }
            SweepValue::Real(x) => {
                let _ = writeln!(out, "{x},{row}");
            }
        }
    }
    Ok(out)
}

pub(super) fn sweep(a: &SweepArgs) -> Outcome {
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = resolve(&a.experiment).and_then(|cfg| {
        let model = cfg.build_model();
        write_log(&a.experiment, &model)?;
        sweep_csv(&cfg, &model, a.param, &a.values, a.metric, exec)
    });
    match result {
        Ok(csv) => Outcome::ok(csv),
        Err(e) => Outcome::usage(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.25, 15), "0.25");
        assert_eq!(format_sig(0.75, 15), "0.75");
        assert_eq!(
            format_sig(0.1 * (std::f64::consts::PI / 8.0).sin().powi(2), 15),
            "0.0146446609406726"
        );
        assert_eq!(format_sig(1.0, 15), "1");
        assert_eq!(format_sig(123456.0, 3), "123456");
    }

    #[test]
    fn value_lists() {
        let v = parse_values(SweepParam::N, "3, 1..2,0").unwrap();
        assert_eq!(
            v,
            vec![
                SweepValue::Count(0),
                SweepValue::Count(1),
                SweepValue::Count(2),
                SweepValue::Count(3)
            ]
        );
        assert!(matches!(
            parse_values(SweepParam::N, " , "),
            Err(Error::InvalidGrid(_))
        ));
        assert!(parse_values(SweepParam::CRatio, "100,-3").is_err());
        assert!(parse_values(SweepParam::N, "1.5").is_err());
    }
}
