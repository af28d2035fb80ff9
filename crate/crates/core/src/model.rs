//! State space, age bands, parameter sets and the transition intensities.
//!
//! Every intensity used by the solvers and the simulator is resolved through
//! [`IntensityModel`], so the parametrisation (onset split, treatment ratio,
//! metastatic mortality scale) and the scenario overlay are applied in one
//! place.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hazard::DurationHazard;
use crate::scenario::ScenarioOverlay;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum StateId {
    NoBc = 0,
    PreMetObserved = 1,
    PreMetUnobserved = 2,
    MetObserved = 3,
    DeadOther = 4,
    DeadBc = 5,
}

impl StateId {
    pub const ALL: [StateId; 6] = [
        StateId::NoBc,
        StateId::PreMetObserved,
        StateId::PreMetUnobserved,
        StateId::MetObserved,
        StateId::DeadOther,
        StateId::DeadBc,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        StateId::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Domain(format!("state index {i} is not in 0..=5")))
    }

    pub fn is_absorbing(self) -> bool {
        matches!(self, StateId::DeadOther | StateId::DeadBc)
    }

    /// States reachable in one transition.
    pub fn successors(self) -> &'static [StateId] {
        use StateId::*;
        match self {
            NoBc => &[PreMetObserved, PreMetUnobserved, DeadOther],
            PreMetObserved | PreMetUnobserved => &[MetObserved, DeadOther],
            MetObserved => &[DeadOther, DeadBc],
            DeadOther | DeadBc => &[],
        }
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Overlay group used by the scenario mortality multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverlayGroup {
    Ages65To84,
    Ages85To89,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgeBand {
    A65to69,
    A70to74,
    A75to79,
    A80to84,
    A85to89,
}

impl AgeBand {
    pub const ALL: [AgeBand; 5] = [
        AgeBand::A65to69,
        AgeBand::A70to74,
        AgeBand::A75to79,
        AgeBand::A80to84,
        AgeBand::A85to89,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            AgeBand::A65to69 => "65-69",
            AgeBand::A70to74 => "70-74",
            AgeBand::A75to79 => "75-79",
            AgeBand::A80to84 => "80-84",
            AgeBand::A85to89 => "85-89",
        }
    }

    pub fn overlay_group(self) -> OverlayGroup {
        match self {
            AgeBand::A85to89 => OverlayGroup::Ages85To89,
            _ => OverlayGroup::Ages65To84,
        }
    }
}

impl fmt::Display for AgeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AgeBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace(['–', '—'], "-").replace("--", "-");
        AgeBand::ALL
            .into_iter()
            .find(|b| b.label() == norm)
            .ok_or_else(|| Error::Lookup(format!("unknown age band '{s}'")))
    }
}

/// Baseline rates for one age band, per person-year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRates {
    pub mu01: f64,
    pub mu04: f64,
    pub mu35: f64,
}

/// Age-specific onset, other-cause and metastatic death rates.
///
/// Other-cause mortality from states 1, 2 and 3 equals `mu04` and is not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityTable {
    rates: [BandRates; 5],
}

impl IntensityTable {
    pub fn new(rates: [BandRates; 5]) -> Result<Self> {
        for (band, r) in AgeBand::ALL.iter().zip(&rates) {
            for (name, v) in [("mu01", r.mu01), ("mu04", r.mu04), ("mu35", r.mu35)] {
                if !(v.is_finite() && v > 0.0) {
                    return domain(format!("{name} for {band} must be positive and finite, got {v}"));
                }
            }
        }
        Ok(IntensityTable { rates })
    }

    /// Calibrated rates for women in England, 2010–2015.
    pub fn baseline() -> Self {
        let r = |mu01, mu04, mu35| BandRates { mu01, mu04, mu35 };
        IntensityTable {
            rates: [
                r(0.00333, 0.00878, 0.28060),
                r(0.00286, 0.01521, 0.36002),
                r(0.00324, 0.02693, 0.40000),
                r(0.00355, 0.05142, 0.49711),
                r(0.00377, 0.09684, 0.50000),
            ],
        }
    }

    pub fn band(&self, band: AgeBand) -> BandRates {
        self.rates[band.index()]
    }
}

impl Default for IntensityTable {
    fn default() -> Self {
        IntensityTable::baseline()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Markov,
    SemiMarkov,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Markov, ModelKind::SemiMarkov];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Markov => "M",
            ModelKind::SemiMarkov => "SM",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" | "markov" => Ok(ModelKind::Markov),
            "sm" | "s-m" | "semimarkov" | "semi-markov" => Ok(ModelKind::SemiMarkov),
            other => Err(Error::Lookup(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    /// Observed share of cancer onset.
    pub alpha: f64,
    /// Ratio of treated to untreated progression.
    pub beta: f64,
    pub mu35_scale: f64,
    pub model_kind: ModelKind,
    pub intensity_table: IntensityTable,
    /// Replaces the progression hazard implied by `model_kind`.
    pub progression_override: Option<DurationHazard>,
    /// When false, other-cause mortality from states 1, 2 and 3 is zero.
    pub post_onset_other_cause: bool,
}

impl ParameterSet {
    pub fn new(alpha: f64, beta: f64, mu35_scale: f64, model_kind: ModelKind) -> Result<Self> {
        let p = ParameterSet {
            alpha,
            beta,
            mu35_scale,
            model_kind,
            intensity_table: IntensityTable::baseline(),
            progression_override: None,
            post_onset_other_cause: true,
        };
        p.validate()?;
        Ok(p)
    }

    /// α = 0.6, β = 1/7, baseline metastatic mortality.
    pub fn headline(model_kind: ModelKind) -> Self {
        ParameterSet::new(0.6, 1.0 / 7.0, 1.0, model_kind).expect("headline parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return domain(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return domain(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.mu35_scale > 0.0 && self.mu35_scale.is_finite()) {
            return domain(format!("mu35 scale must be positive, got {}", self.mu35_scale));
        }
        Ok(())
    }

    pub fn with_model(&self, model_kind: ModelKind) -> Self {
        ParameterSet {
            model_kind,
            ..self.clone()
        }
    }

    /// Copy with other-cause exits from the cancer states removed.
    pub fn without_post_onset_other_cause(&self) -> Self {
        ParameterSet {
            post_onset_other_cause: false,
            ..self.clone()
        }
    }

    /// Observed-state progression hazard.
    pub fn progression(&self) -> DurationHazard {
        match (&self.progression_override, self.model_kind) {
            (Some(h), _) => h.clone(),
            (None, ModelKind::Markov) => DurationHazard::markov(),
            (None, ModelKind::SemiMarkov) => DurationHazard::semi_markov(),
        }
    }
}

/// Split a diagnosed-onset rate into total onset and unobserved onset.
pub fn onset_decomposition(alpha: f64, mu01: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(mu01 > 0.0 && mu01.is_finite()) {
        return domain(format!("mu01 must be positive, got {mu01}"));
    }
    let mu_star = mu01 / alpha;
    Ok((mu_star, mu_star - mu01))
}

/// Ordered pair of states joined by an edge of the model graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    from: StateId,
    to: StateId,
}

impl Transition {
    pub fn new(from: StateId, to: StateId) -> Result<Self> {
        if from.successors().contains(&to) {
            Ok(Transition { from, to })
        } else {
            domain(format!("{from}->{to} is not a transition of the model"))
        }
    }

    pub fn from(self) -> StateId {
        self.from
    }

    pub fn to(self) -> StateId {
        self.to
    }

    pub fn all() -> Vec<Transition> {
        StateId::ALL
            .iter()
            .flat_map(|&from| from.successors().iter().map(move |&to| Transition { from, to }))
            .collect()
    }
}

/// Fully resolved intensities for one age band, parameter set and scenario.
#[derive(Debug, Clone)]
pub struct IntensityModel {
    band: AgeBand,
    alpha: f64,
    mu_star: f64,
    mu04: f64,
    mu35: f64,
    post_onset_other_cause: bool,
    observed_progression: DurationHazard,
    unobserved_progression: DurationHazard,
    scenario: ScenarioOverlay,
}

impl IntensityModel {
    pub fn new(band: AgeBand, params: &ParameterSet, scenario: &ScenarioOverlay) -> Result<Self> {
        params.validate()?;
        let base = params.intensity_table.band(band);
        let (mu_star, _) = onset_decomposition(params.alpha, base.mu01)?;
        if params.alpha * scenario.max_diagnosis_multiplier() > 1.0 {
            return domain("diagnosis multiplier pushes the observed onset share above 1");
        }
        let observed = params.progression();
        let unobserved = observed.scaled(1.0 / params.beta);
        Ok(IntensityModel {
            band,
            alpha: params.alpha,
            mu_star,
            mu04: base.mu04,
            mu35: base.mu35 * params.mu35_scale,
            post_onset_other_cause: params.post_onset_other_cause,
            observed_progression: observed,
            unobserved_progression: unobserved,
            scenario: scenario.clone(),
        })
    }

    pub fn band(&self) -> AgeBand {
        self.band
    }

    pub fn scenario(&self) -> &ScenarioOverlay {
        &self.scenario
    }

    /// Total onset rate, invariant across scenarios.
    pub fn total_onset(&self) -> f64 {
        self.mu_star
    }

    pub fn onset_observed(&self, t: f64) -> f64 {
        self.alpha * self.scenario.diagnosis_multiplier(t) * self.mu_star
    }

    pub fn onset_unobserved(&self, t: f64) -> f64 {
        self.mu_star - self.onset_observed(t)
    }

    /// Other-cause mortality from the cancer-free state.
    pub fn other_cause(&self, t: f64) -> f64 {
        self.mu04 * self.scenario.mortality_multiplier(t, self.band.overlay_group())
    }

    /// Other-cause mortality from states 1, 2 and 3.
    pub fn other_cause_post_onset(&self, t: f64) -> f64 {
        if self.post_onset_other_cause {
            self.other_cause(t)
        } else {
            0.0
        }
    }

    pub fn metastatic_death(&self) -> f64 {
        self.mu35
    }

    pub fn observed_progression(&self) -> &DurationHazard {
        &self.observed_progression
    }

    pub fn unobserved_progression(&self) -> &DurationHazard {
        &self.unobserved_progression
    }

    /// Total exit rate from the cancer-free state at calendar time `t`.
    pub fn exit_no_bc(&self, t: f64) -> f64 {
        self.onset_observed(t) + self.onset_unobserved(t) + self.other_cause(t)
    }

    /// Total exit rate from the metastatic state at calendar time `t`.
    pub fn exit_metastatic(&self, t: f64) -> f64 {
        self.other_cause_post_onset(t) + self.mu35
    }

    pub fn rate(&self, transition: Transition, t: f64, z: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return domain(format!("calendar time must be non-negative, got {t}"));
        }
        if !(z >= 0.0 && z.is_finite()) {
            return domain(format!("duration must be non-negative, got {z}"));
        }
        use StateId::*;
        Ok(match (transition.from, transition.to) {
            (NoBc, PreMetObserved) => self.onset_observed(t),
            (NoBc, PreMetUnobserved) => self.onset_unobserved(t),
            (NoBc, DeadOther) => self.other_cause(t),
            (PreMetObserved, MetObserved) => self.observed_progression.rate(z),
            (PreMetUnobserved, MetObserved) => self.unobserved_progression.rate(z),
            (PreMetObserved | PreMetUnobserved | MetObserved, DeadOther) => self.other_cause_post_onset(t),
            (MetObserved, DeadBc) => self.mu35,
            _ => unreachable!("Transition::new admits only model edges"),
        })
    }

    /// Calendar instants where a piecewise-constant intensity may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.scenario.breakpoints()
    }

    /// Exact integral over `[a, b]` of a calendar function that is constant
    /// between overlay breakpoints.
    pub fn integrate_calendar(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut lo = a;
        for &bp in self.scenario.breakpoints().iter().filter(|&&bp| bp > a && bp < b) {
            total += f(0.5 * (lo + bp)) * (bp - lo);
            lo = bp;
        }
        total + f(0.5 * (lo + b)) * (b - lo)
    }
}

/// Resolve one transition intensity at calendar time `t` and duration `z`.
pub fn evaluate_intensity(
    transition: Transition,
    band: AgeBand,
    t: f64,
    z: f64,
    params: &ParameterSet,
    scenario: &ScenarioOverlay,
) -> Result<f64> {
    IntensityModel::new(band, params, scenario)?.rate(transition, t, z)
}
