//! The work behind each CLI subcommand, callable without a process.

use std::path::PathBuf;

use rayon::prelude::*;

use super::config::RunSettings;
use super::csv::{self, write_file};
use super::validate::{evaluate_cells, reference_cells, summarize, CellResult, ValidationSettings};
use crate::error::{Error, Result};
use crate::fit::{eval_polynomial, fit_duration_polynomial, rmse, PROGRESSION_RATE_POINTS};
use crate::hazard::DurationHazard;
use crate::mc::{estimate_occupancy, write_path_dump, SimulationConfig};
use crate::outcomes::{build_report, sensitivity_grid, sensitivity_sweep, NamedParameters, OccupancyRow, ReportPlan};
use crate::solver::{solve, GridConfig};

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct CommandOutcome {
    pub files: Vec<PathBuf>,
    /// Human-readable summary for stdout.
    pub summary: String,
    /// Set when the command ran but its checks did not all pass.
    pub failed: bool,
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 3,
        Error::Config(_) | Error::Domain(_) | Error::Lookup(_) => 2,
        Error::Numeric(_) => 1,
    }
}

fn plan_from(settings: &RunSettings) -> ReportPlan {
    ReportPlan {
        parameter_sets: vec![NamedParameters::new("run", settings.params.clone())],
        models: settings.models.clone(),
        scenarios: settings.scenarios.clone(),
        bands: settings.bands.clone(),
        occupancy_times: settings.horizons.clone(),
        survival_horizons: settings.survival_horizons.clone(),
        step: settings.step,
        ..ReportPlan::default()
    }
}

/// Occupancy probabilities for every configured combination.
pub fn run_solve(settings: &RunSettings) -> Result<CommandOutcome> {
    let horizon = settings.horizons.iter().copied().fold(0.0, f64::max);
    let grid = GridConfig::new(settings.step, horizon)?;
    let mut jobs = Vec::new();
    for scenario in &settings.scenarios {
        for &model in &settings.models {
            for &band in &settings.bands {
                for &start in &settings.start_states {
                    jobs.push((scenario, model, band, start));
                }
            }
        }
    }
    let rows: Vec<Vec<OccupancyRow>> = jobs
        .par_iter()
        .map(|&(scenario, model, band, start)| {
            let curve = solve(start, band, &settings.params.with_model(model), scenario, &grid)?;
            settings
                .horizons
                .iter()
                .map(|&t| {
                    Ok(OccupancyRow {
                        params: "run".into(),
                        scenario: scenario.name().to_string(),
                        model,
                        band,
                        start,
                        t,
                        probabilities: curve.at(t)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<OccupancyRow> = rows.into_iter().flatten().collect();
    write_file(&settings.out_dir, "occupancy.csv", |w| {
        csv::write_occupancy(w, &rows, false)
    })?;
    Ok(CommandOutcome {
        files: vec![settings.out_dir.join("occupancy.csv")],
        summary: format!("wrote {} occupancy rows", rows.len()),
        failed: false,
    })
}

/// Survival percentages and excess deaths with years of life lost.
pub fn run_report(settings: &RunSettings) -> Result<CommandOutcome> {
    let report = build_report(&plan_from(settings));
    if let Some(f) = report.failures.first() {
        return Err(Error::Numeric(format!(
            "{} {} {}: {}",
            f.params, f.model, f.band, f.reason
        )));
    }
    write_file(&settings.out_dir, "survival.csv", |w| {
        csv::write_survival(w, &report.survival, false)
    })?;
    write_file(&settings.out_dir, "excess.csv", |w| {
        csv::write_excess(w, &report.excess, false)
    })?;
    Ok(CommandOutcome {
        files: vec![
            settings.out_dir.join("survival.csv"),
            settings.out_dir.join("excess.csv"),
        ],
        summary: format!(
            "wrote {} survival rows and {} excess rows",
            report.survival.len(),
            report.excess.len()
        ),
        failed: false,
    })
}

/// Every output row across the built-in sensitivity grid.
pub fn run_sweep(settings: &RunSettings) -> Result<CommandOutcome> {
    let grid: Vec<NamedParameters> = sensitivity_grid()
        .into_iter()
        .map(|mut n| {
            n.params.intensity_table = settings.params.intensity_table.clone();
            n
        })
        .collect();
    let report = sensitivity_sweep(&grid, &settings.scenarios, &settings.bands, settings.step)?;
    let dir = &settings.out_dir;
    write_file(dir, "sweep_occupancy.csv", |w| {
        csv::write_occupancy(w, &report.occupancy, true)
    })?;
    write_file(dir, "sweep_survival.csv", |w| {
        csv::write_survival(w, &report.survival, true)
    })?;
    write_file(dir, "sweep_excess.csv", |w| csv::write_excess(w, &report.excess, true))?;
    write_file(dir, "sweep_failures.csv", |w| csv::write_failures(w, &report.failures))?;
    let files = [
        "sweep_occupancy.csv",
        "sweep_survival.csv",
        "sweep_excess.csv",
        "sweep_failures.csv",
    ]
    .iter()
    .map(|f| dir.join(f))
    .collect();
    Ok(CommandOutcome {
        files,
        summary: format!(
            "{} parameter sets, {} excess rows, {} failed cells",
            grid.len(),
            report.excess.len(),
            report.failures.len()
        ),
        failed: !report.failures.is_empty(),
    })
}

/// Monte Carlo occupancy estimates, plus an event dump of the first `dump_paths` lives.
pub fn run_simulate(settings: &RunSettings, dump_paths: u64) -> Result<CommandOutcome> {
    let horizon = settings.horizons.iter().copied().fold(0.0, f64::max);
    let mut buf = Vec::new();
    let mut dumped = false;
    let mut outcome = CommandOutcome::default();
    for scenario in &settings.scenarios {
        for &model in &settings.models {
            for &band in &settings.bands {
                for &start in &settings.start_states {
                    let config = SimulationConfig {
                        n_paths: settings.paths,
                        seed: settings.seed,
                        start,
                        band,
                        params: settings.params.with_model(model),
                        scenario: scenario.clone(),
                        horizon,
                    };
                    let est = estimate_occupancy(&config, &settings.horizons)?;
                    csv::write_simulation_row(&mut buf, scenario.name(), model, band, start, &est)?;
                    if dump_paths > 0 && !dumped {
                        write_file(&settings.out_dir, "paths.csv", |w| {
                            write_path_dump(w, &config, dump_paths)
                        })?;
                        outcome.files.push(settings.out_dir.join("paths.csv"));
                        dumped = true;
                    }
                }
            }
        }
    }
    write_file(&settings.out_dir, "simulation.csv", |w| {
        use std::io::Write;
        writeln!(w, "{}", csv::SIMULATION_HEADER)?;
        w.write_all(&buf)?;
        Ok(())
    })?;
    outcome.files.insert(0, settings.out_dir.join("simulation.csv"));
    outcome.summary = format!("simulated {} paths per configuration", settings.paths);
    Ok(outcome)
}

/// Recompute every reference cell; `failed` is set if any cell is out of tolerance.
pub fn run_validate(step: f64, out_dir: Option<&PathBuf>) -> Result<(CommandOutcome, Vec<CellResult>)> {
    let settings = ValidationSettings {
        step,
        ..ValidationSettings::default()
    };
    let results = evaluate_cells(&reference_cells(), &settings)?;
    let mut summary = String::new();
    for (table, (pass, total)) in summarize(&results) {
        summary.push_str(&format!(
            "{table:<8} {pass:>4}/{total:<4} {}\n",
            if pass == total { "ok" } else { "FAIL" }
        ));
    }
    let failures: Vec<&CellResult> = results.iter().filter(|r| !r.pass).collect();
    summary.push_str(&format!(
        "{} of {} cells within tolerance\n",
        results.len() - failures.len(),
        results.len()
    ));
    for r in &failures {
        summary.push_str(&format!(
            "  {} {} {} {} {} {}: expected {} got {:.4}\n",
            r.cell.table,
            r.cell.scenario.label(),
            r.cell.params,
            r.cell.model,
            r.cell.band,
            r.cell.label,
            r.cell.value,
            r.computed
        ));
    }
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        write_file(dir, "validation.csv", |w| {
            use std::io::Write;
            writeln!(
                w,
                "table,scenario,params,model,age_band,quantity,expected,computed,tolerance,pass"
            )?;
            for r in &results {
                let c = &r.cell;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    c.table,
                    c.scenario.label(),
                    c.params,
                    c.model,
                    c.band,
                    c.label,
                    c.value,
                    csv::sig10(r.computed),
                    c.tolerance(),
                    r.pass
                )?;
            }
            Ok(())
        })?;
        files.push(dir.join("validation.csv"));
    }
    let failed = !failures.is_empty();
    Ok((CommandOutcome { files, summary, failed }, results))
}

/// Least-squares refit of the progression hazard at each degree.
pub fn run_fit(degrees: &[usize], settings: &RunSettings) -> Result<CommandOutcome> {
    let published = DurationHazard::semi_markov();
    let mut lines = Vec::new();
    let mut summary = String::new();
    for &degree in degrees {
        let coefficients = fit_duration_polynomial(&PROGRESSION_RATE_POINTS, degree)?;
        let max_gap = (0..=100)
            .map(|i| {
                let z = i as f64 * 0.1;
                (eval_polynomial(&coefficients, z) - published.rate(z)).abs()
            })
            .fold(0.0, f64::max);
        let fit_rmse = rmse(&coefficients, &PROGRESSION_RATE_POINTS);
        summary.push_str(&format!(
            "degree {degree}: rmse {fit_rmse:.5}, max gap to built-in curve {max_gap:.5}\n"
        ));
        for (power, c) in coefficients.iter().enumerate() {
            lines.push(format!("{degree},{power},{}", csv::sig10(*c)));
        }
    }
    write_file(&settings.out_dir, "fit.csv", |w| {
        use std::io::Write;
        writeln!(w, "degree,power,coefficient")?;
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    Ok(CommandOutcome {
        files: vec![settings.out_dir.join("fit.csv")],
        summary,
        failed: false,
    })
}
