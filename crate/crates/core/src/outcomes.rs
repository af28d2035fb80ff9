//! Survival, excess deaths and years of life lost derived from occupancy
//! curves, plus the parameter sweep that produces every reported row.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::model::{AgeBand, ModelKind, ParameterSet, StateId};
use crate::scenario::{builtin_overlay, ScenarioId, ScenarioOverlay};
use crate::solver::{solve, GridConfig, OccupancyCurve};

/// Projection length used for excess deaths.
pub const EXCESS_HORIZON: f64 = 5.0;

/// Residual life expectancy at the start of each band.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeTable {
    expectancy: [f64; 5],
}

impl LifeTable {
    pub fn new(expectancy: [f64; 5]) -> Result<Self> {
        if expectancy.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return domain("life expectancies must be positive");
        }
        if expectancy.windows(2).any(|w| w[1] >= w[0]) {
            return domain("life expectancies must decrease with age");
        }
        Ok(LifeTable { expectancy })
    }

    /// England and Wales female life expectancies at ages 65, 70, 75, 80, 85.
    pub fn standard() -> Self {
        LifeTable {
            expectancy: [19.31, 15.31, 11.63, 8.44, 5.84],
        }
    }

    pub fn expectancy(&self, band: AgeBand) -> f64 {
        self.expectancy[band.index()]
    }
}

impl Default for LifeTable {
    fn default() -> Self {
        LifeTable::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cause {
    Other,
    Bc,
}

impl Cause {
    pub const ALL: [Cause; 2] = [Cause::Other, Cause::Bc];

    pub fn label(self) -> &'static str {
        match self {
            Cause::Other => "other",
            Cause::Bc => "bc",
        }
    }

    pub fn state(self) -> StateId {
        match self {
            Cause::Other => StateId::DeadOther,
            Cause::Bc => StateId::DeadBc,
        }
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurvivalMethod {
    /// Net survival with other-cause deaths divided out.
    Ons,
    /// Re-solved with no other-cause exits after onset.
    Adjusted,
}

impl SurvivalMethod {
    pub const ALL: [SurvivalMethod; 2] = [SurvivalMethod::Ons, SurvivalMethod::Adjusted];

    pub fn label(self) -> &'static str {
        match self {
            SurvivalMethod::Ons => "ons",
            SurvivalMethod::Adjusted => "adjusted",
        }
    }
}

impl fmt::Display for SurvivalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SurvivalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ons" => Ok(SurvivalMethod::Ons),
            "adjusted" => Ok(SurvivalMethod::Adjusted),
            _ => Err(Error::Lookup(format!("unknown survival method '{s}'"))),
        }
    }
}

/// Round half away from zero to `decimals` places.
pub fn round_display(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

fn check_cancer_start(start: StateId) -> Result<()> {
    match start {
        StateId::PreMetObserved | StateId::PreMetUnobserved | StateId::MetObserved => Ok(()),
        other => domain(format!("survival is defined from States 1-3, not {other}")),
    }
}

/// Cancer survival with other-cause deaths removed from the denominator, in percent.
pub fn ons_survival(curve: &OccupancyCurve, t: f64) -> Result<f64> {
    check_cancer_start(curve.start)?;
    let p = curve.at(t)?;
    let (p4, p5) = (p[StateId::DeadOther.index()], p[StateId::DeadBc.index()]);
    let alive_or_bc = 1.0 - p4;
    if alive_or_bc <= 0.0 {
        return Err(Error::Numeric(format!("everyone died of other causes by t = {t}")));
    }
    Ok(100.0 * (1.0 - p4 - p5) / alive_or_bc)
}

/// Cancer survival when the only exit after onset is breast cancer death, in percent.
pub fn adjusted_survival(
    start: StateId,
    band: AgeBand,
    params: &ParameterSet,
    scenario: &ScenarioOverlay,
    grid: &GridConfig,
    t: f64,
) -> Result<f64> {
    check_cancer_start(start)?;
    let curve = solve(start, band, &params.without_post_onset_other_cause(), scenario, grid)?;
    Ok(100.0 * (1.0 - curve.prob(t, StateId::DeadBc)?))
}

/// Scenario-minus-baseline deaths per 100,000 by time `t`, unrounded.
pub fn excess_deaths(pre: &OccupancyCurve, scenario: &OccupancyCurve, cause: Cause, t: f64) -> Result<f64> {
    if pre.start != StateId::NoBc || scenario.start != StateId::NoBc {
        return domain("excess deaths compare curves from State 0");
    }
    if pre.band != scenario.band || pre.model_kind != scenario.model_kind || pre.step != scenario.step {
        return domain("excess deaths need curves with the same band, model and step");
    }
    let k = cause.state();
    Ok(1e5 * (scenario.prob(t, k)? - pre.prob(t, k)?))
}

pub fn years_of_life_lost(excess: f64, band: AgeBand, table: &LifeTable) -> f64 {
    excess * table.expectancy(band)
}

/// A parameter set with the identifier used in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedParameters {
    pub id: String,
    pub params: ParameterSet,
}

impl NamedParameters {
    pub fn new(id: impl Into<String>, params: ParameterSet) -> Self {
        NamedParameters { id: id.into(), params }
    }
}

/// Headline values plus one-at-a-time variations of α, β and the
/// metastatic mortality scale.
pub fn sensitivity_grid() -> Vec<NamedParameters> {
    let base = ParameterSet::headline(ModelKind::Markov);
    let with = |id: &str, f: &dyn Fn(&mut ParameterSet)| {
        let mut p = base.clone();
        f(&mut p);
        NamedParameters::new(id, p)
    };
    vec![
        with("base", &|_| {}),
        with("alpha0.8", &|p| p.alpha = 0.8),
        with("alpha0.4", &|p| p.alpha = 0.4),
        with("beta0.2", &|p| p.beta = 0.2),
        with("beta0.1", &|p| p.beta = 0.1),
        with("mu35x0.8", &|p| p.mu35_scale = 0.8),
        with("mu35x1.2", &|p| p.mu35_scale = 1.2),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyRow {
    pub params: String,
    pub scenario: String,
    pub model: ModelKind,
    pub band: AgeBand,
    pub start: StateId,
    pub t: f64,
    pub probabilities: [f64; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRow {
    pub params: String,
    pub method: SurvivalMethod,
    pub model: ModelKind,
    pub band: AgeBand,
    pub start: StateId,
    pub horizon: f64,
    pub survival_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcessRow {
    pub params: String,
    pub scenario: String,
    pub model: ModelKind,
    pub band: AgeBand,
    pub cause: Cause,
    /// Unrounded, per 100,000.
    pub excess: f64,
    /// Unrounded excess times residual life expectancy.
    pub yll: f64,
}

/// A sweep cell whose solve failed; its rows are missing from the report.
#[derive(Debug, Clone, PartialEq)]
pub struct FailedCell {
    pub params: String,
    pub model: ModelKind,
    pub band: AgeBand,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeReport {
    pub occupancy: Vec<OccupancyRow>,
    pub survival: Vec<SurvivalRow>,
    pub excess: Vec<ExcessRow>,
    pub failures: Vec<FailedCell>,
}

impl OutcomeReport {
    /// All-age YLL: the sum of the band values.
    pub fn total_yll(&self, params: &str, scenario: &str, model: ModelKind, cause: Cause) -> f64 {
        self.excess
            .iter()
            .filter(|r| r.params == params && r.scenario == scenario && r.model == model && r.cause == cause)
            .map(|r| r.yll)
            .sum()
    }

    pub fn excess_row(
        &self,
        params: &str,
        scenario: &str,
        model: ModelKind,
        band: AgeBand,
        cause: Cause,
    ) -> Option<&ExcessRow> {
        self.excess.iter().find(|r| {
            r.params == params && r.scenario == scenario && r.model == model && r.band == band && r.cause == cause
        })
    }

    pub fn survival_row(
        &self,
        params: &str,
        method: SurvivalMethod,
        model: ModelKind,
        band: AgeBand,
        start: StateId,
        horizon: f64,
    ) -> Option<&SurvivalRow> {
        self.survival.iter().find(|r| {
            r.params == params
                && r.method == method
                && r.model == model
                && r.band == band
                && r.start == start
                && (r.horizon - horizon).abs() < 1e-9
        })
    }
}

/// What to compute in a report.
#[derive(Debug, Clone)]
pub struct ReportPlan {
    pub parameter_sets: Vec<NamedParameters>,
    pub models: Vec<ModelKind>,
    /// Scenarios compared against the built-in pre-pandemic baseline.
    pub scenarios: Vec<ScenarioOverlay>,
    pub bands: Vec<AgeBand>,
    pub occupancy_times: Vec<f64>,
    pub survival_horizons: Vec<f64>,
    pub step: f64,
    pub life_table: LifeTable,
}

impl Default for ReportPlan {
    fn default() -> Self {
        ReportPlan {
            parameter_sets: vec![NamedParameters::new("base", ParameterSet::headline(ModelKind::Markov))],
            models: ModelKind::ALL.to_vec(),
            scenarios: ScenarioId::ALL.iter().map(|&id| builtin_overlay(id)).collect(),
            bands: AgeBand::ALL.to_vec(),
            occupancy_times: vec![1.0, 5.0],
            survival_horizons: vec![1.0, 5.0, 10.0],
            step: 0.01,
            life_table: LifeTable::standard(),
        }
    }
}

struct CellRows {
    occupancy: Vec<OccupancyRow>,
    survival: Vec<SurvivalRow>,
    excess: Vec<ExcessRow>,
}

fn report_cell(plan: &ReportPlan, named: &NamedParameters, model: ModelKind, band: AgeBand) -> Result<CellRows> {
    let params = named.params.with_model(model);
    let pre = builtin_overlay(ScenarioId::PrePandemic);
    let max_occupancy = plan.occupancy_times.iter().copied().fold(EXCESS_HORIZON, f64::max);
    let onset_grid = GridConfig::new(plan.step, max_occupancy)?;
    let select_horizon = plan.survival_horizons.iter().copied().fold(max_occupancy, f64::max);
    let select_grid = GridConfig::new(plan.step, select_horizon)?;
    let mut rows = CellRows {
        occupancy: Vec::new(),
        survival: Vec::new(),
        excess: Vec::new(),
    };
    let baseline = solve(StateId::NoBc, band, &params, &pre, &onset_grid)?;
    for scenario in &plan.scenarios {
        let onset = if scenario == &pre {
            baseline.clone()
        } else {
            solve(StateId::NoBc, band, &params, scenario, &onset_grid)?
        };
        let mut curves = vec![onset];
        for start in [StateId::PreMetObserved, StateId::PreMetUnobserved, StateId::MetObserved] {
            curves.push(solve(start, band, &params, scenario, &select_grid)?);
        }
        for curve in &curves {
            for &t in &plan.occupancy_times {
                rows.occupancy.push(OccupancyRow {
                    params: named.id.clone(),
                    scenario: scenario.name().to_string(),
                    model,
                    band,
                    start: curve.start,
                    t,
                    probabilities: curve.at(t)?,
                });
            }
        }
        for cause in Cause::ALL {
            let excess = excess_deaths(&baseline, &curves[0], cause, EXCESS_HORIZON)?;
            rows.excess.push(ExcessRow {
                params: named.id.clone(),
                scenario: scenario.name().to_string(),
                model,
                band,
                cause,
                excess,
                yll: years_of_life_lost(excess, band, &plan.life_table),
            });
        }
    }
    for start in [StateId::PreMetObserved, StateId::PreMetUnobserved, StateId::MetObserved] {
        let curve = solve(start, band, &params, &pre, &select_grid)?;
        let adjusted = solve(
            start,
            band,
            &params.without_post_onset_other_cause(),
            &pre,
            &select_grid,
        )?;
        for &horizon in &plan.survival_horizons {
            let row = |method, survival_pct| SurvivalRow {
                params: named.id.clone(),
                method,
                model,
                band,
                start,
                horizon,
                survival_pct,
            };
            rows.survival
                .push(row(SurvivalMethod::Ons, ons_survival(&curve, horizon)?));
            let p5 = adjusted.prob(horizon, StateId::DeadBc)?;
            rows.survival.push(row(SurvivalMethod::Adjusted, 100.0 * (1.0 - p5)));
        }
    }
    Ok(rows)
}

/// Compute every row of the plan. Cells run in parallel; a failing cell is
/// recorded in `failures` and does not stop the others.
pub fn build_report(plan: &ReportPlan) -> OutcomeReport {
    let cells: Vec<(&NamedParameters, ModelKind, AgeBand)> = plan
        .parameter_sets
        .iter()
        .flat_map(|n| {
            plan.models
                .iter()
                .flat_map(move |&m| plan.bands.iter().map(move |&b| (n, m, b)))
        })
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(named, model, band)| (named, model, band, report_cell(plan, named, model, band)))
        .collect();
    let mut report = OutcomeReport::default();
    for (named, model, band, result) in results {
        match result {
            Ok(rows) => {
                report.occupancy.extend(rows.occupancy);
                report.survival.extend(rows.survival);
                report.excess.extend(rows.excess);
            }
            Err(e) => report.failures.push(FailedCell {
                params: named.id.clone(),
                model,
                band,
                reason: e.to_string(),
            }),
        }
    }
    report
}

/// Full cross-product of parameter sets, scenarios, bands and both model kinds.
pub fn sensitivity_sweep(
    grid: &[NamedParameters],
    scenarios: &[ScenarioOverlay],
    bands: &[AgeBand],
    step: f64,
) -> Result<OutcomeReport> {
    if grid.is_empty() {
        return domain("sensitivity sweep needs at least one parameter set");
    }
    let plan = ReportPlan {
        parameter_sets: grid.to_vec(),
        scenarios: scenarios.to_vec(),
        bands: bands.to_vec(),
        step,
        ..ReportPlan::default()
    };
    Ok(build_report(&plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_display(2.5, 0), 3.0);
        assert_eq!(round_display(-2.5, 0), -3.0);
        assert_eq!(round_display(95.5651, 2), 95.57);
        assert_eq!(round_display(-0.4, 0), -0.0);
    }

    #[test]
    fn life_table_validation() {
        assert!(LifeTable::new([1.0, 2.0, 3.0, 4.0, 5.0]).is_err());
        assert!(LifeTable::new([5.0, 4.0, 3.0, 2.0, 0.0]).is_err());
        assert_eq!(LifeTable::standard().expectancy(AgeBand::A80to84), 8.44);
    }

    #[test]
    fn survival_from_state_zero_is_rejected() {
        let c = solve(
            StateId::NoBc,
            AgeBand::A65to69,
            &ParameterSet::headline(ModelKind::Markov),
            &ScenarioOverlay::pre_pandemic(),
            &GridConfig::default(),
        )
        .unwrap();
        assert!(ons_survival(&c, 1.0).is_err());
    }

    #[test]
    fn ons_survival_undefined_when_all_die_of_other_causes() {
        let curve = OccupancyCurve {
            start: StateId::MetObserved,
            band: AgeBand::A65to69,
            scenario: "x".into(),
            model_kind: ModelKind::Markov,
            step: 1.0,
            times: vec![0.0, 1.0],
            probabilities: vec![[0.0, 0.0, 0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0, 1.0, 0.0]],
        };
        assert!(matches!(ons_survival(&curve, 1.0), Err(Error::Numeric(_))));
        assert_abs_diff_eq!(ons_survival(&curve, 0.0).unwrap(), 100.0);
    }

    #[test]
    fn excess_rejects_mismatched_curves() {
        let p = ParameterSet::headline(ModelKind::Markov);
        let pre = ScenarioOverlay::pre_pandemic();
        let g = GridConfig::default();
        let a = solve(StateId::NoBc, AgeBand::A65to69, &p, &pre, &g).unwrap();
        let b = solve(StateId::NoBc, AgeBand::A70to74, &p, &pre, &g).unwrap();
        let c = solve(StateId::MetObserved, AgeBand::A65to69, &p, &pre, &g).unwrap();
        assert!(excess_deaths(&a, &b, Cause::Bc, 5.0).is_err());
        assert!(excess_deaths(&a, &c, Cause::Bc, 5.0).is_err());
        assert_eq!(excess_deaths(&a, &a, Cause::Other, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn sweep_needs_parameters() {
        assert!(sensitivity_sweep(&[], &[], &AgeBand::ALL, 0.01).is_err());
    }

    #[test]
    fn failing_cells_are_flagged_not_fatal() {
        let plan = ReportPlan {
            bands: vec![AgeBand::A65to69],
            models: vec![ModelKind::Markov],
            step: 0.03,
            ..ReportPlan::default()
        };
        let report = build_report(&plan);
        assert_eq!(report.failures.len(), 1);
        assert!(report.excess.is_empty());
    }
}
