//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::process::ExitCode;

use bcsm::fit::{eval_polynomial, fit_duration_polynomial, rmse, PROGRESSION_RATE_POINTS};
use bcsm::hazard::DurationHazard;
use bcsm::io::validate::{evaluate_cells, reference_cells, CellResult, Quantity, ValidationSettings};
use bcsm::mc::{estimate_occupancy, SimulationConfig};
use bcsm::model::{evaluate_intensity, AgeBand, ModelKind, ParameterSet, StateId, Transition};
use bcsm::outcomes::Cause;
use bcsm::scenario::{builtin_overlay, ScenarioId, ScenarioOverlay};
use bcsm::solver::{convergence_probe, solve, solve_markov, solve_semimarkov_from_onset, GridConfig, OccupancyCurve};

struct Report {
    failed: bool,
}

impl Report {
    fn line(&mut self, label: &str, pass: bool, detail: String) {
        self.failed |= !pass;
        println!("{label}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }

    /// A criterion made of sub-checks, printed under it.
    fn group(&mut self, label: &str, parts: Vec<(String, bool, String)>) {
        let pass = parts.iter().all(|p| p.1);
        self.line(label, pass, format!("{} checks", parts.len()));
        for (name, ok, detail) in parts {
            println!("    {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        }
    }
}

fn tally(results: &[&CellResult]) -> (bool, String) {
    let pass = results.iter().filter(|r| r.pass).count();
    let worst = results
        .iter()
        .map(|r| (r.computed - r.cell.value).abs() / r.cell.tolerance())
        .fold(0.0, f64::max);
    (
        pass == results.len() && !results.is_empty(),
        format!("{pass}/{} cells, worst error {worst:.2} of tolerance", results.len()),
    )
}

fn cells(results: &[CellResult], f: impl Fn(&CellResult) -> bool) -> Vec<&CellResult> {
    results.iter().filter(|r| f(r)).collect()
}

fn outcome_parts(results: &[CellResult], tables: &[&str]) -> Vec<(String, bool, String)> {
    let in_tables = |r: &CellResult| tables.contains(&r.cell.table.as_str());
    let mut parts = Vec::new();
    let mut push = |name: &str, f: &dyn Fn(&CellResult) -> bool| {
        let selected = cells(results, |r| in_tables(r) && f(r));
        if !selected.is_empty() {
            let (ok, detail) = tally(&selected);
            parts.push((name.to_string(), ok, detail));
        }
    };
    push("occupancy M", &|r| {
        matches!(r.cell.quantity, Quantity::Occupancy { .. }) && r.cell.model == ModelKind::Markov
    });
    push("occupancy SM", &|r| {
        matches!(r.cell.quantity, Quantity::Occupancy { .. }) && r.cell.model == ModelKind::SemiMarkov
    });
    push("survival M", &|r| {
        matches!(r.cell.quantity, Quantity::Survival { .. }) && r.cell.model == ModelKind::Markov
    });
    push("survival SM", &|r| {
        matches!(r.cell.quantity, Quantity::Survival { .. }) && r.cell.model == ModelKind::SemiMarkov
    });
    push("excess other-cause", &|r| {
        r.cell.quantity == Quantity::Excess(Cause::Other)
    });
    push("excess breast cancer", &|r| {
        r.cell.quantity == Quantity::Excess(Cause::Bc)
    });
    push("YLL M", &|r| {
        matches!(r.cell.quantity, Quantity::Yll(_)) && r.cell.model == ModelKind::Markov
    });
    push("YLL SM", &|r| {
        matches!(r.cell.quantity, Quantity::Yll(_)) && r.cell.model == ModelKind::SemiMarkov
    });
    parts
}

fn max_gap(a: &OccupancyCurve, b: &OccupancyCurve) -> f64 {
    a.probabilities
        .iter()
        .zip(&b.probabilities)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

fn self_convergence() -> f64 {
    let coarse = GridConfig::default();
    let fine = coarse.halved();
    let mut worst: f64 = 0.0;
    for id in ScenarioId::ALL {
        let s = builtin_overlay(id);
        for band in AgeBand::ALL {
            let p = ParameterSet::headline(ModelKind::SemiMarkov);
            for start in [StateId::NoBc, StateId::PreMetObserved, StateId::PreMetUnobserved] {
                let gap = convergence_probe(|g| solve(start, band, &p, &s, g), &coarse, &fine).unwrap();
                worst = worst.max(gap);
            }
        }
    }
    worst
}

fn property_suite() -> Vec<(String, bool, String)> {
    let grid = GridConfig::default();
    let mut conservation: f64 = 0.0;
    let mut monotone = true;
    for id in ScenarioId::ALL {
        let s = builtin_overlay(id);
        for kind in ModelKind::ALL {
            let p = ParameterSet::headline(kind);
            for band in AgeBand::ALL {
                for start in [
                    StateId::NoBc,
                    StateId::PreMetObserved,
                    StateId::PreMetUnobserved,
                    StateId::MetObserved,
                ] {
                    let c = solve(start, band, &p, &s, &grid).unwrap();
                    for row in &c.probabilities {
                        conservation = conservation.max((row.iter().sum::<f64>() - 1.0).abs());
                    }
                    monotone &= c
                        .probabilities
                        .windows(2)
                        .all(|w| w[1][4] >= w[0][4] && w[1][5] >= w[0][5]);
                }
            }
        }
    }

    let mut split_exact = true;
    for id in ScenarioId::ALL {
        let s = builtin_overlay(id);
        for alpha in [0.4, 0.6, 0.8] {
            let p = ParameterSet::new(alpha, 1.0 / 7.0, 1.0, ModelKind::Markov).unwrap();
            for band in AgeBand::ALL {
                let star = p.intensity_table.band(band).mu01 / alpha;
                for k in 0..=1000 {
                    let t = k as f64 * 0.005;
                    let rate = |j| {
                        evaluate_intensity(Transition::new(StateId::NoBc, j).unwrap(), band, t, 0.0, &p, &s).unwrap()
                    };
                    let sum = rate(StateId::PreMetObserved) + rate(StateId::PreMetUnobserved);
                    split_exact &= (sum - star).abs() <= 2.0 * f64::EPSILON * star;
                }
            }
        }
    }

    let mut collapse: f64 = 0.0;
    let markov = ParameterSet::headline(ModelKind::Markov);
    let mut constant = ParameterSet::headline(ModelKind::SemiMarkov);
    constant.progression_override = Some(DurationHazard::markov());
    for id in ScenarioId::ALL {
        let s = builtin_overlay(id);
        for band in AgeBand::ALL {
            let a = solve_markov(StateId::NoBc, band, &markov, &s, &grid).unwrap();
            let b = solve_semimarkov_from_onset(band, &constant, &s, &grid).unwrap();
            collapse = collapse.max(max_gap(&a, &b));
        }
    }

    let pre = ScenarioOverlay::pre_pandemic();
    let (m34, m35) = (0.00878_f64, 0.28060_f64);
    let exact = |t: f64| m35 / (m34 + m35) * (1.0 - (-(m34 + m35) * t).exp());
    let long = GridConfig::new(0.01, 10.0).unwrap();
    let c = solve_markov(StateId::MetObserved, AgeBand::A65to69, &markov, &pre, &long).unwrap();
    let closed = c
        .times
        .iter()
        .zip(&c.probabilities)
        .map(|(&t, p)| (p[5] - exact(t)).abs())
        .fold(0.0, f64::max);

    let err = |h: f64| {
        let c = solve_markov(
            StateId::MetObserved,
            AgeBand::A65to69,
            &markov,
            &pre,
            &GridConfig::new(h, 5.0).unwrap(),
        )
        .unwrap();
        (c.prob(5.0, StateId::DeadBc).unwrap() - exact(5.0)).abs()
    };
    let ratio = err(0.5) / err(0.25);

    vec![
        (
            "conservation".into(),
            conservation <= 1e-8,
            format!("max |sum - 1| = {conservation:.1e}"),
        ),
        (
            "absorbing states non-decreasing".into(),
            monotone,
            "every headline solve".into(),
        ),
        (
            "onset split sums to total".into(),
            split_exact,
            "all overlays, alpha in {0.4, 0.6, 0.8}".into(),
        ),
        (
            "constant-hazard collapse".into(),
            collapse <= 1e-6,
            format!("max gap {collapse:.1e}"),
        ),
        (
            "metastatic closed form".into(),
            closed <= 1e-8,
            format!("max gap {closed:.1e}"),
        ),
        (
            "RK4 error ratio".into(),
            (14.0..18.0).contains(&ratio),
            format!("{ratio:.2}"),
        ),
    ]
}

fn monte_carlo() -> (bool, String) {
    let n = 1_000_000u64;
    let mut configs = Vec::new();
    for band in AgeBand::ALL {
        configs.push((ScenarioId::PrePandemic, band));
    }
    configs.push((ScenarioId::S1, AgeBand::A65to69));
    configs.push((ScenarioId::S2, AgeBand::A65to69));
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut pass = true;
    for (seed, &(id, band)) in configs.iter().enumerate() {
        let s = builtin_overlay(id);
        for kind in ModelKind::ALL {
            let params = ParameterSet::headline(kind);
            for start in [StateId::NoBc, StateId::MetObserved] {
                let curve = solve(start, band, &params, &s, &GridConfig::default()).unwrap();
                let config = SimulationConfig {
                    n_paths: n,
                    seed: 1000 + seed as u64,
                    start,
                    band,
                    params: params.clone(),
                    scenario: s.clone(),
                    horizon: 5.0,
                };
                let est = estimate_occupancy(&config, &[1.0, 5.0]).unwrap();
                for (i, &t) in est.times.iter().enumerate() {
                    let exact = curve.at(t).unwrap();
                    let freq = est.probabilities(i);
                    for j in 0..6 {
                        let se = (exact[j] * (1.0 - exact[j]) / n as f64).sqrt();
                        let diff = (freq[j] - exact[j]).abs();
                        compared += 1;
                        if se == 0.0 {
                            pass &= diff == 0.0;
                        } else {
                            worst = worst.max(diff / se);
                            pass &= diff <= 4.0 * se;
                        }
                    }
                }
            }
        }
    }
    (
        pass,
        format!("{compared} frequencies at 10^6 paths, worst {worst:.2} SE"),
    )
}

fn polynomial_fit() -> (bool, String) {
    let c = fit_duration_polynomial(&PROGRESSION_RATE_POINTS, 4).unwrap();
    let err = rmse(&c, &PROGRESSION_RATE_POINTS);
    let published = DurationHazard::semi_markov();
    let gap = (0..=100)
        .map(|i| {
            let z = i as f64 * 0.1;
            (eval_polynomial(&c, z) - published.rate(z)).abs()
        })
        .fold(0.0, f64::max);
    (
        err <= 0.003 && gap <= 0.005,
        format!("rmse {err:.5}, max gap {gap:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut report = Report { failed: false };
    let results = evaluate_cells(&reference_cells(), &ValidationSettings::default()).expect("reference cells evaluate");

    let (ok, detail) = tally(&cells(&results, |r| {
        r.cell.table == "T4" && r.cell.model == ModelKind::Markov
    }));
    report.line("criterion 1, Markov occupancy", ok, detail);

    let probe = self_convergence();
    let (ok, detail) = tally(&cells(&results, |r| {
        r.cell.table == "T4" && r.cell.model == ModelKind::SemiMarkov
    }));
    report.line(
        "criterion 2, semi-Markov occupancy",
        ok && probe < 1e-4,
        format!("{detail}; step-halving gap {probe:.1e}"),
    );

    let (ok, detail) = tally(&cells(&results, |r| r.cell.table == "T5"));
    report.line("criterion 3, survival", ok, detail);

    report.group(
        "criterion 4, excess deaths and YLL",
        outcome_parts(&results, &["EXCESS"]),
    );
    report.group(
        "criterion 5, sensitivity tables",
        outcome_parts(&results, &["B1", "B2", "C1", "C2", "D1", "D2", "E1", "E2", "F1", "F2"]),
    );
    report.group("criterion 6, property suite", property_suite());

    let (ok, detail) = monte_carlo();
    report.line("criterion 7, Monte Carlo agreement", ok, detail);

    let (ok, detail) = polynomial_fit();
    report.line("criterion 8, polynomial fit", ok, detail);

    if report.failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
