use super::{GridConfig, OccupancyCurve, TIME_EPS};
use crate::error::{domain, Error, Result};
use crate::model::{AgeBand, IntensityModel, ModelKind, ParameterSet, StateId};
use crate::scenario::ScenarioOverlay;

/// Calendar-driven rates, constant on each RK4 substep.
#[derive(Clone, Copy)]
struct CalendarRates {
    onset_observed: f64,
    onset_unobserved: f64,
    other_cause: f64,
    other_cause_post_onset: f64,
    metastatic_death: f64,
}

impl CalendarRates {
    fn at(model: &IntensityModel, t: f64) -> Self {
        CalendarRates {
            onset_observed: model.onset_observed(t),
            onset_unobserved: model.onset_unobserved(t),
            other_cause: model.other_cause(t),
            other_cause_post_onset: model.other_cause_post_onset(t),
            metastatic_death: model.metastatic_death(),
        }
    }
}

fn derivative(p: &[f64; 6], r: &CalendarRates, prog_observed: f64, prog_unobserved: f64) -> [f64; 6] {
    let CalendarRates {
        onset_observed: m01,
        onset_unobserved: m02,
        other_cause: m04,
        other_cause_post_onset: mx4,
        metastatic_death: m35,
    } = *r;
    [
        -(m01 + m02 + m04) * p[0],
        m01 * p[0] - (prog_observed + mx4) * p[1],
        m02 * p[0] - (prog_unobserved + mx4) * p[2],
        prog_observed * p[1] + prog_unobserved * p[2] - (mx4 + m35) * p[3],
        m04 * p[0] + mx4 * (p[1] + p[2] + p[3]),
        m35 * p[3],
    ]
}

fn axpy(p: &[f64; 6], a: f64, k: &[f64; 6]) -> [f64; 6] {
    std::array::from_fn(|i| p[i] + a * k[i])
}

/// RK4 with progression evaluated at `z = t`.
///
/// With a constant progression hazard this is the plain Markov system. With
/// a duration hazard it is exact only while nobody can enter States 1 or 2
/// after time zero, i.e. for starts in States 1, 2 and 3.
pub(crate) fn integrate(
    start: StateId,
    model: &IntensityModel,
    model_kind: ModelKind,
    grid: &GridConfig,
) -> Result<OccupancyCurve> {
    if start.is_absorbing() {
        return domain(format!("state {start} is absorbing"));
    }
    let breaks = model.breakpoints();
    let observed = model.observed_progression();
    let unobserved = model.unobserved_progression();
    let mut p = [0.0; 6];
    p[start.index()] = 1.0;
    let mut probabilities = Vec::with_capacity(grid.steps() + 1);
    probabilities.push(p);
    let mut cuts = Vec::new();
    for k in 0..grid.steps() {
        let (a, b) = (grid.time(k), grid.time(k + 1));
        cuts.clear();
        cuts.push(a);
        cuts.extend(breaks.iter().copied().filter(|&x| x > a + TIME_EPS && x < b - TIME_EPS));
        cuts.push(b);
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let h = t1 - t0;
            let rates = CalendarRates::at(model, 0.5 * (t0 + t1));
            let f = |t: f64, y: &[f64; 6]| derivative(y, &rates, observed.rate(t), unobserved.rate(t));
            let k1 = f(t0, &p);
            let k2 = f(t0 + 0.5 * h, &axpy(&p, 0.5 * h, &k1));
            let k3 = f(t0 + 0.5 * h, &axpy(&p, 0.5 * h, &k2));
            let k4 = f(t1, &axpy(&p, h, &k3));
            p = std::array::from_fn(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite occupancy at t = {}",
                grid.time(k + 1)
            )));
        }
        probabilities.push(p);
    }
    Ok(OccupancyCurve {
        start,
        band: model.band(),
        scenario: model.scenario().name().to_string(),
        model_kind,
        step: grid.step(),
        times: grid.times(),
        probabilities,
    })
}

/// Markov occupancy curve from any transient start state.
pub fn solve_markov(
    start: StateId,
    band: AgeBand,
    params: &ParameterSet,
    scenario: &ScenarioOverlay,
    grid: &GridConfig,
) -> Result<OccupancyCurve> {
    if !params.progression().is_constant() {
        return domain("the Markov solver needs a constant progression hazard");
    }
    let model = IntensityModel::new(band, params, scenario)?;
    integrate(start, &model, params.model_kind, grid)
}

/// Semi-Markov occupancy curve from State 1 or 2 entered at time zero.
pub fn solve_semimarkov_select(
    start: StateId,
    band: AgeBand,
    params: &ParameterSet,
    scenario: &ScenarioOverlay,
    grid: &GridConfig,
) -> Result<OccupancyCurve> {
    if !matches!(start, StateId::PreMetObserved | StateId::PreMetUnobserved) {
        return domain(format!("select solve starts in State 1 or 2, not {start}"));
    }
    let model = IntensityModel::new(band, params, scenario)?;
    integrate(start, &model, params.model_kind, grid)
}

/// Probability of still being in the select start state at time `t`,
/// from the exact integrated hazards.
pub fn select_survival(start: StateId, model: &IntensityModel, t: f64) -> Result<f64> {
    let progression = match start {
        StateId::PreMetObserved => model.observed_progression(),
        StateId::PreMetUnobserved => model.unobserved_progression(),
        _ => return domain(format!("select survival starts in State 1 or 2, not {start}")),
    };
    let other = model.integrate_calendar(0.0, t, |s| model.other_cause_post_onset(s));
    Ok((-progression.cumulative(t) - other).exp())
}
