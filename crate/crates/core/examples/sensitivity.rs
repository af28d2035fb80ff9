//! Breast cancer excess deaths at five years across the sensitivity grid.

use bcsm::model::{AgeBand, ModelKind};
use bcsm::outcomes::{sensitivity_grid, sensitivity_sweep, Cause};
use bcsm::scenario::{builtin_overlay, ScenarioId};

fn main() -> bcsm::Result<()> {
    let scenarios = vec![builtin_overlay(ScenarioId::S1), builtin_overlay(ScenarioId::S2)];
    let grid = sensitivity_grid();
    let report = sensitivity_sweep(&grid, &scenarios, &[AgeBand::A65to69], 0.01)?;
    println!("params     S1 M    S1 SM   S2 M    S2 SM   (bc excess per 100,000, 65-69)");
    for named in &grid {
        let mut line = format!("{:<10}", named.id);
        for s in ["S1", "S2"] {
            for kind in ModelKind::ALL {
                let row = report
                    .excess_row(&named.id, s, kind, AgeBand::A65to69, Cause::Bc)
                    .expect("row exists");
                line.push_str(&format!(" {:6.2} ", row.excess));
            }
        }
        println!("{line}");
    }
    println!("failed cells: {}", report.failures.len());
    Ok(())
}
