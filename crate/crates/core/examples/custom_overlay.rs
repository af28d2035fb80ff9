//! A user-defined scenario read from TOML, compared with the baseline.

use bcsm::io::config::{Overrides, RunConfig, RunSettings};
use bcsm::model::StateId;
use bcsm::outcomes::{excess_deaths, Cause, EXCESS_HORIZON};
use bcsm::scenario::ScenarioOverlay;
use bcsm::solver::{solve, GridConfig};

const CONFIG: &str = r#"
model = "semimarkov"
bands = ["75-79"]

[[overlays]]
name = "long-disruption"
mortality = [
  { start_month = "2020-04", end_month = "2022-04", younger = 1.15, oldest = 1.14 },
  { start_month = "2022-04", end_month = "2025-01", younger = 1.05, oldest = 1.04 },
]
diagnosis = [{ start_month = "2020-04", end_month = "2021-07", multiplier = 0.7 }]
"#;

fn main() -> bcsm::Result<()> {
    let settings = RunSettings::resolve(RunConfig::from_toml(CONFIG)?, Overrides::default())?;
    let grid = GridConfig::default();
    let params = settings.params.with_model(settings.models[0]);
    let band = settings.bands[0];
    let overlay = &settings.scenarios[0];
    let base = solve(StateId::NoBc, band, &params, &ScenarioOverlay::pre_pandemic(), &grid)?;
    let hit = solve(StateId::NoBc, band, &params, overlay, &grid)?;
    println!("{} at {band}, {}:", overlay.name(), params.model_kind);
    for cause in Cause::ALL {
        let d = excess_deaths(&base, &hit, cause, EXCESS_HORIZON)?;
        println!("  excess {cause} deaths per 100,000: {d:.1}");
    }
    Ok(())
}
