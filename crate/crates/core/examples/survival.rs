//! One-, five- and ten-year cancer survival from States 1, 2 and 3.
//!
//! The ONS measure divides out other-cause deaths; the adjusted measure
//! re-solves with other-cause exits after onset switched off.

use bcsm::model::{AgeBand, ModelKind, ParameterSet, StateId};
use bcsm::outcomes::{adjusted_survival, ons_survival, round_display};
use bcsm::scenario::ScenarioOverlay;
use bcsm::solver::{solve, GridConfig};

fn main() -> bcsm::Result<()> {
    let grid = GridConfig::new(0.01, 10.0)?;
    let pre = ScenarioOverlay::pre_pandemic();
    let band = AgeBand::A65to69;
    println!("band {band}, pre-pandemic");
    println!("start model  method     1y      5y      10y");
    for start in [StateId::PreMetObserved, StateId::PreMetUnobserved, StateId::MetObserved] {
        for kind in ModelKind::ALL {
            let params = ParameterSet::headline(kind);
            let curve = solve(start, band, &params, &pre, &grid)?;
            let mut ons = Vec::new();
            let mut adjusted = Vec::new();
            for t in [1.0, 5.0, 10.0] {
                ons.push(round_display(ons_survival(&curve, t)?, 2));
                adjusted.push(round_display(
                    adjusted_survival(start, band, &params, &pre, &grid, t)?,
                    2,
                ));
            }
            println!(
                "{start:>5} {kind:>5}  ons      {:6.2}  {:6.2}  {:6.2}",
                ons[0], ons[1], ons[2]
            );
            println!(
                "{start:>5} {kind:>5}  adjusted {:6.2}  {:6.2}  {:6.2}",
                adjusted[0], adjusted[1], adjusted[2]
            );
        }
    }
    Ok(())
}
