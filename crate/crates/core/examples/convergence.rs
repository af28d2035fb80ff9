//! Step-halving checks for both solvers.

use bcsm::model::{AgeBand, ModelKind, ParameterSet, StateId};
use bcsm::scenario::{builtin_overlay, ScenarioId};
use bcsm::solver::{convergence_probe, solve, GridConfig};

fn main() -> bcsm::Result<()> {
    let s2 = builtin_overlay(ScenarioId::S2);
    for (kind, start) in [
        (ModelKind::Markov, StateId::MetObserved),
        (ModelKind::SemiMarkov, StateId::NoBc),
    ] {
        let params = ParameterSet::headline(kind);
        for h in [0.05, 0.02, 0.01] {
            let coarse = GridConfig::new(h, 5.0)?;
            let gap = convergence_probe(
                |g| solve(start, AgeBand::A85to89, &params, &s2, g),
                &coarse,
                &coarse.halved(),
            )?;
            println!("{kind} from {start}: h = {h:<5} max change on halving {gap:.2e}");
        }
    }
    Ok(())
}
