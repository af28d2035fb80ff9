//! Monte Carlo life histories under the same intensities as the solvers.
//!
//! Calendar-driven exits are sampled by inverting the piecewise-linear
//! cumulative hazard. Duration-driven progression out of States 1 and 2 is
//! sampled by thinning against the hazard's upper bound. Every path owns an
//! independent ChaCha stream keyed by `(seed, path index)`, so results do not
//! depend on thread scheduling.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::hazard::{DurationHazard, DURATION_DOMAIN_END};
use crate::model::{AgeBand, IntensityModel, ParameterSet, StateId};
use crate::scenario::ScenarioOverlay;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n_paths: u64,
    pub seed: u64,
    pub start: StateId,
    pub band: AgeBand,
    pub params: ParameterSet,
    pub scenario: ScenarioOverlay,
    pub horizon: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return domain("at least one path is required");
        }
        if !(self.horizon > 0.0 && self.horizon <= DURATION_DOMAIN_END) {
            return domain(format!("horizon must lie in (0, 10], got {}", self.horizon));
        }
        if self.start.is_absorbing() {
            return domain(format!("state {} is absorbing", self.start));
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub from: StateId,
    pub to: StateId,
}

/// Transitions of one individual up to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeHistory {
    pub start: StateId,
    pub events: Vec<Event>,
}

impl LifeHistory {
    /// State occupied at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> StateId {
        self.events
            .iter()
            .take_while(|e| e.t <= t)
            .last()
            .map_or(self.start, |e| e.to)
    }

    pub fn final_state(&self) -> StateId {
        self.events.last().map_or(self.start, |e| e.to)
    }
}

/// Reusable sampler for one configuration.
pub struct Simulator {
    model: IntensityModel,
    breaks: Vec<f64>,
    start: StateId,
    seed: u64,
    horizon: f64,
    observed_bound: f64,
    unobserved_bound: f64,
}

fn standard_exponential(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

impl Simulator {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let model = IntensityModel::new(config.band, &config.params, &config.scenario)?;
        let observed_bound = model.observed_progression().upper_bound();
        let unobserved_bound = model.unobserved_progression().upper_bound();
        Ok(Simulator {
            breaks: model.breakpoints(),
            observed_bound,
            unobserved_bound,
            model,
            start: config.start,
            seed: config.seed,
            horizon: config.horizon,
        })
    }

    fn rng(&self, path: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path);
        rng
    }

    /// First time after `t0` at which a calendar-varying exit fires, or
    /// `None` if it would fire after `until`.
    fn calendar_exit(&self, rng: &mut ChaCha8Rng, t0: f64, until: f64, rate: impl Fn(f64) -> f64) -> Option<f64> {
        let mut budget = standard_exponential(rng);
        let mut cur = t0;
        while cur < until {
            let next = self
                .breaks
                .iter()
                .copied()
                .find(|&b| b > cur)
                .map_or(until, |b| b.min(until));
            let r = rate(0.5 * (cur + next));
            let mass = r * (next - cur);
            if mass >= budget {
                return Some(cur + budget / r);
            }
            budget -= mass;
            cur = next;
        }
        None
    }

    /// Duration at which a thinned duration-hazard event fires, or `None`
    /// if it would come after `max_duration`.
    fn duration_exit(rng: &mut ChaCha8Rng, hazard: &DurationHazard, bound: f64, max_duration: f64) -> Option<f64> {
        if bound <= 0.0 {
            return None;
        }
        let mut z = 0.0;
        loop {
            z += standard_exponential(rng) / bound;
            if z >= max_duration {
                return None;
            }
            if rng.random::<f64>() * bound < hazard.rate(z) {
                return Some(z);
            }
        }
    }

    pub fn sample(&self, path: u64) -> LifeHistory {
        let mut rng = self.rng(path);
        let m = &self.model;
        let mut events = Vec::new();
        let mut state = self.start;
        let mut t = 0.0;
        loop {
            let (when, to) = match state {
                StateId::NoBc => {
                    let Some(when) = self.calendar_exit(&mut rng, t, self.horizon, |s| m.exit_no_bc(s)) else {
                        break;
                    };
                    let (a, b) = (m.onset_observed(when), m.onset_unobserved(when));
                    let u = rng.random::<f64>() * m.exit_no_bc(when);
                    let to = if u < a {
                        StateId::PreMetObserved
                    } else if u < a + b {
                        StateId::PreMetUnobserved
                    } else {
                        StateId::DeadOther
                    };
                    (when, to)
                }
                StateId::PreMetObserved | StateId::PreMetUnobserved => {
                    let other = self.calendar_exit(&mut rng, t, self.horizon, |s| m.other_cause_post_onset(s));
                    let limit = other.unwrap_or(self.horizon);
                    let (hazard, bound) = if state == StateId::PreMetObserved {
                        (m.observed_progression(), self.observed_bound)
                    } else {
                        (m.unobserved_progression(), self.unobserved_bound)
                    };
                    match Self::duration_exit(&mut rng, hazard, bound, limit - t) {
                        Some(z) => (t + z, StateId::MetObserved),
                        None => match other {
                            Some(when) => (when, StateId::DeadOther),
                            None => break,
                        },
                    }
                }
                StateId::MetObserved => {
                    let Some(when) = self.calendar_exit(&mut rng, t, self.horizon, |s| m.exit_metastatic(s)) else {
                        break;
                    };
                    let u = rng.random::<f64>() * m.exit_metastatic(when);
                    let to = if u < m.metastatic_death() {
                        StateId::DeadBc
                    } else {
                        StateId::DeadOther
                    };
                    (when, to)
                }
                StateId::DeadOther | StateId::DeadBc => break,
            };
            events.push(Event {
                t: when,
                from: state,
                to,
            });
            state = to;
            t = when;
        }
        LifeHistory {
            start: self.start,
            events,
        }
    }
}

/// One simulated life history, reproducible from `(seed, path)`.
pub fn sample_history(config: &SimulationConfig, path: u64) -> Result<LifeHistory> {
    Ok(Simulator::new(config)?.sample(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyEstimate {
    pub n_paths: u64,
    pub times: Vec<f64>,
    pub counts: Vec<[u64; 6]>,
}

impl OccupancyEstimate {
    pub fn probabilities(&self, i: usize) -> [f64; 6] {
        let n = self.n_paths as f64;
        self.counts[i].map(|c| c as f64 / n)
    }

    /// Binomial standard errors of the empirical frequencies.
    pub fn standard_errors(&self, i: usize) -> [f64; 6] {
        let n = self.n_paths as f64;
        self.probabilities(i).map(|p| (p * (1.0 - p) / n).sqrt())
    }
}

/// State frequencies at the requested times over `n_paths` simulated lives.
pub fn estimate_occupancy(config: &SimulationConfig, times: &[f64]) -> Result<OccupancyEstimate> {
    if let Some(t) = times.iter().find(|&&t| !(0.0..=config.horizon).contains(&t)) {
        return domain(format!("requested time {t} is outside [0, {}]", config.horizon));
    }
    let sim = Simulator::new(config)?;
    let counts = (0..config.n_paths)
        .into_par_iter()
        .fold(
            || vec![[0u64; 6]; times.len()],
            |mut acc, path| {
                let h = sim.sample(path);
                for (slot, &t) in acc.iter_mut().zip(times) {
                    slot[h.state_at(t).index()] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![[0u64; 6]; times.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for k in 0..6 {
                        x[k] += y[k];
                    }
                }
                a
            },
        );
    Ok(OccupancyEstimate {
        n_paths: config.n_paths,
        times: times.to_vec(),
        counts,
    })
}

/// Write the events of the first `n` paths as `path_id,t,from,to` rows.
pub fn write_path_dump<W: Write>(out: &mut W, config: &SimulationConfig, n: u64) -> Result<()> {
    let sim = Simulator::new(config)?;
    writeln!(out, "path_id,t,from,to")?;
    for path in 0..n.min(config.n_paths) {
        for e in sim.sample(path).events {
            writeln!(out, "{path},{},{},{}", e.t, e.from, e.to)?;
        }
    }
    Ok(())
}
