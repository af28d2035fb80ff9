//! Excess deaths and years of life lost per 100,000 women over five years
//! of pandemic disruption, relative to the pre-pandemic projection.

use bcsm::model::{AgeBand, ModelKind, ParameterSet, StateId};
use bcsm::outcomes::{excess_deaths, years_of_life_lost, Cause, LifeTable, EXCESS_HORIZON};
use bcsm::scenario::{builtin_overlay, ScenarioId};
use bcsm::solver::{solve, GridConfig};

fn main() -> bcsm::Result<()> {
    let grid = GridConfig::default();
    let life = LifeTable::standard();
    let pre = builtin_overlay(ScenarioId::PrePandemic);
    for id in [ScenarioId::S1, ScenarioId::S2] {
        let scenario = builtin_overlay(id);
        for kind in ModelKind::ALL {
            let params = ParameterSet::headline(kind);
            let mut total_yll = [0.0; 2];
            println!("{id} {kind}: band  other  bc   yll_other  yll_bc");
            for band in AgeBand::ALL {
                let base = solve(StateId::NoBc, band, &params, &pre, &grid)?;
                let hit = solve(StateId::NoBc, band, &params, &scenario, &grid)?;
                let mut cells = Vec::new();
                let mut ylls = Vec::new();
                for (i, cause) in Cause::ALL.into_iter().enumerate() {
                    let d = excess_deaths(&base, &hit, cause, EXCESS_HORIZON)?;
                    let yll = years_of_life_lost(d, band, &life);
                    total_yll[i] += yll;
                    cells.push(format!("{:5.0}", d));
                    ylls.push(format!("{:9.0}", yll));
                }
                println!("        {band} {} {}", cells.join(" "), ylls.join(" "));
            }
            println!(
                "        all ages yll: other {:.0}, bc {:.0}",
                total_yll[0], total_yll[1]
            );
        }
    }
    Ok(())
}
