//! Occupancy probabilities from the forward equations.
//!
//! Markov systems and select semi-Markov systems (start in State 1 or 2, so
//! duration equals elapsed time) are stepped with classic RK4. The
//! semi-Markov system from State 0 is integrated as a convolution over
//! entrant cohorts, each carrying its exact duration-survival factor.

mod convolution;
mod rk4;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hazard::DURATION_DOMAIN_END;
use crate::model::{AgeBand, IntensityModel, ModelKind, ParameterSet, StateId};
use crate::scenario::ScenarioOverlay;

pub use convolution::solve_semimarkov_from_onset;
pub use rk4::{select_survival, solve_markov, solve_semimarkov_select};

/// Two instants closer than this are treated as the same calendar point.
pub(crate) const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Trapezoid,
    #[default]
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    step: f64,
    horizon: f64,
    steps: usize,
    pub quadrature: Quadrature,
}

impl GridConfig {
    pub fn new(step: f64, horizon: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return domain(format!("step must be positive, got {step}"));
        }
        if !(horizon > 0.0 && horizon <= DURATION_DOMAIN_END + TIME_EPS) {
            return domain(format!("horizon must lie in (0, 10], got {horizon}"));
        }
        let steps = (horizon / step).round();
        if (steps * step - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return domain(format!("horizon {horizon} is not a multiple of step {step}"));
        }
        Ok(GridConfig {
            step,
            horizon,
            steps: steps as usize,
            quadrature: Quadrature::Simpson,
        })
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.step
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Same horizon with half the step.
    pub fn halved(&self) -> GridConfig {
        GridConfig {
            step: self.step / 2.0,
            steps: self.steps * 2,
            ..*self
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::new(0.01, 5.0).expect("default grid is valid")
    }
}

/// State-probability vectors on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyCurve {
    pub start: StateId,
    pub band: AgeBand,
    pub scenario: String,
    pub model_kind: ModelKind,
    pub step: f64,
    pub times: Vec<f64>,
    pub probabilities: Vec<[f64; 6]>,
}

impl OccupancyCurve {
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("curves are never empty")
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.step).round();
        if k < 0.0 || (k * self.step - t).abs() > 1e-9 || k as usize >= self.times.len() {
            return Err(Error::Domain(format!("t = {t} is not on the curve grid")));
        }
        Ok(k as usize)
    }

    /// Probability vector at a grid time.
    pub fn at(&self, t: f64) -> Result<[f64; 6]> {
        Ok(self.probabilities[self.index_of(t)?])
    }

    pub fn prob(&self, t: f64, state: StateId) -> Result<f64> {
        Ok(self.at(t)?[state.index()])
    }

    pub fn last(&self) -> [f64; 6] {
        *self.probabilities.last().expect("curves are never empty")
    }
}

/// Route to the solver appropriate for the start state and model kind.
pub fn solve(
    start: StateId,
    band: AgeBand,
    params: &ParameterSet,
    scenario: &ScenarioOverlay,
    grid: &GridConfig,
) -> Result<OccupancyCurve> {
    let constant = params.progression().is_constant();
    match (start, constant) {
        (StateId::NoBc, false) => solve_semimarkov_from_onset(band, params, scenario, grid),
        (StateId::PreMetObserved | StateId::PreMetUnobserved, false) => {
            solve_semimarkov_select(start, band, params, scenario, grid)
        }
        // State 3 exits do not depend on duration.
        (StateId::MetObserved, false) => {
            let model = IntensityModel::new(band, params, scenario)?;
            rk4::integrate(start, &model, params.model_kind, grid)
        }
        _ => solve_markov(start, band, params, scenario, grid),
    }
}

/// Largest componentwise gap between two solves on their common grid times.
pub fn convergence_probe<F>(solve_on: F, coarse: &GridConfig, fine: &GridConfig) -> Result<f64>
where
    F: Fn(&GridConfig) -> Result<OccupancyCurve>,
{
    let a = solve_on(coarse)?;
    let b = solve_on(fine)?;
    let mut worst = 0.0_f64;
    for (t, pa) in a.times.iter().zip(&a.probabilities) {
        if let Ok(pb) = b.at(*t) {
            for (x, y) in pa.iter().zip(&pb) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok(worst)
}

/// Exact running integral of a calendar rate that is constant between knots.
#[derive(Debug, Clone)]
pub(crate) struct StepIntegral {
    knots: Vec<f64>,
    rates: Vec<f64>,
    values: Vec<f64>,
}

impl StepIntegral {
    pub(crate) fn new(model: &IntensityModel, horizon: f64, rate: impl Fn(f64) -> f64) -> Result<Self> {
        let mut knots = vec![0.0];
        knots.extend(
            model
                .breakpoints()
                .into_iter()
                .filter(|&b| b > TIME_EPS && b < horizon - TIME_EPS),
        );
        knots.push(horizon);
        let mut rates = Vec::with_capacity(knots.len() - 1);
        let mut values = vec![0.0];
        for w in knots.windows(2) {
            let r = rate(0.5 * (w[0] + w[1]));
            if !r.is_finite() {
                return Err(Error::Numeric(format!("non-finite intensity {r}")));
            }
            rates.push(r);
            values.push(values.last().unwrap() + r * (w[1] - w[0]));
        }
        Ok(StepIntegral { knots, rates, values })
    }

    pub(crate) fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub(crate) fn segment(&self, t: f64) -> usize {
        self.knots[1..].partition_point(|&k| k <= t).min(self.rates.len() - 1)
    }

    pub(crate) fn rate_on(&self, segment: usize) -> f64 {
        self.rates[segment]
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.values[i] + self.rates[i] * (t - self.knots[i])
    }
}
