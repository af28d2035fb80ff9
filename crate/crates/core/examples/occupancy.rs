//! Five-year occupancy probabilities from State 0, both model kinds.
//!
//! Run with `cargo run --release --example occupancy`.

use bcsm::model::{AgeBand, ModelKind, ParameterSet, StateId};
use bcsm::scenario::{builtin_overlay, ScenarioId};
use bcsm::solver::{solve, GridConfig};

fn main() -> bcsm::Result<()> {
    let grid = GridConfig::default();
    for kind in ModelKind::ALL {
        let params = ParameterSet::headline(kind);
        println!("{kind}  scenario     band    p00     p01    p02    p03    p04    p05   (%)");
        for id in ScenarioId::ALL {
            let scenario = builtin_overlay(id);
            for band in AgeBand::ALL {
                let p = solve(StateId::NoBc, band, &params, &scenario, &grid)?.at(5.0)?;
                let pct: Vec<String> = p.iter().map(|x| format!("{:6.2}", 100.0 * x)).collect();
                println!("    {:<12} {band}  {}", id.label(), pct.join(" "));
            }
        }
    }
    Ok(())
}
