//! Monte Carlo life histories against the deterministic solver.
//!
//! Prints each state frequency next to the solver value and the gap in
//! standard errors.

use bcsm::mc::{estimate_occupancy, sample_history, SimulationConfig};
use bcsm::model::{AgeBand, ModelKind, ParameterSet, StateId};
use bcsm::scenario::{builtin_overlay, ScenarioId};
use bcsm::solver::{solve, GridConfig};

fn main() -> bcsm::Result<()> {
    let config = SimulationConfig {
        n_paths: 200_000,
        seed: 2020,
        start: StateId::NoBc,
        band: AgeBand::A80to84,
        params: ParameterSet::headline(ModelKind::SemiMarkov),
        scenario: builtin_overlay(ScenarioId::S2),
        horizon: 5.0,
    };
    let history = sample_history(&config, 3)?;
    println!(
        "path 3: {} events, ends in state {}",
        history.events.len(),
        history.final_state()
    );

    let est = estimate_occupancy(&config, &[1.0, 5.0])?;
    let curve = solve(
        config.start,
        config.band,
        &config.params,
        &config.scenario,
        &GridConfig::default(),
    )?;
    for (i, &t) in est.times.iter().enumerate() {
        let exact = curve.at(t)?;
        let p = est.probabilities(i);
        println!("t = {t}");
        for s in StateId::ALL {
            let k = s.index();
            let se = (exact[k] * (1.0 - exact[k]) / est.n_paths as f64).sqrt();
            let z = if se > 0.0 { (p[k] - exact[k]) / se } else { 0.0 };
            println!("  p{k}: simulated {:.5}  solver {:.5}  z {z:+.2}", p[k], exact[k]);
        }
    }
    Ok(())
}
