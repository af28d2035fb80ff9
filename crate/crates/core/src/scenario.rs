//! Calendar-time scenario overlays.
//!
//! An overlay is a set of piecewise-constant multipliers on two intensity
//! families: other-cause mortality (applied to every live state, split by
//! overlay group) and the observed share of cancer onset. Time is measured
//! in years since 2020-01-01 and every segment is half-open `[start, end)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::OverlayGroup;

/// Years since 2020-01-01 at the start of the given calendar month.
pub fn month_to_time(year: i32, month: u32) -> Result<f64> {
    if year < 2020 {
        return domain(format!("year {year} precedes the projection start"));
    }
    if !(1..=12).contains(&month) {
        return domain(format!("month {month} is not in 1..=12"));
    }
    Ok(f64::from(year - 2020) + f64::from(month - 1) / 12.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    PrePandemic,
    S1,
    S2,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 3] = [ScenarioId::PrePandemic, ScenarioId::S1, ScenarioId::S2];

    pub fn label(self) -> &'static str {
        match self {
            ScenarioId::PrePandemic => "PrePandemic",
            ScenarioId::S1 => "S1",
            ScenarioId::S2 => "S2",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pre" | "prepandemic" | "pre-pandemic" | "baseline" => Ok(ScenarioId::PrePandemic),
            "s1" => Ok(ScenarioId::S1),
            "s2" => Ok(ScenarioId::S2),
            other => Err(Error::Lookup(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Other-cause mortality multipliers over `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MortalitySegment {
    pub start: f64,
    pub end: f64,
    pub younger: f64,
    pub oldest: f64,
}

impl MortalitySegment {
    pub fn multiplier(&self, group: OverlayGroup) -> f64 {
        match group {
            OverlayGroup::Ages65To84 => self.younger,
            OverlayGroup::Ages85To89 => self.oldest,
        }
    }
}

/// Multiplier on the observed share of onset over `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisSegment {
    pub start: f64,
    pub end: f64,
    pub multiplier: f64,
}

/// Windows that parametrise the built-in pandemic schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltinWindows {
    /// Start of the excess-mortality schedule (April 2020).
    pub mortality_start: f64,
    /// Instant the first step-down (1.13 → 1.10) takes effect.
    pub first_step_down: f64,
    /// Half-open window of reduced diagnosis.
    pub diagnosis_window: (f64, f64),
}

impl Default for BuiltinWindows {
    fn default() -> Self {
        BuiltinWindows {
            mortality_start: 0.25,
            // November 2021. The December reading overstates five-year
            // other-cause deaths by ~2 per 100,000 at every age.
            first_step_down: 22.0 / 12.0,
            diagnosis_window: (0.25, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOverlay {
    name: String,
    mortality: Vec<MortalitySegment>,
    diagnosis: Vec<DiagnosisSegment>,
}

impl ScenarioOverlay {
    pub fn new(
        name: impl Into<String>,
        mut mortality: Vec<MortalitySegment>,
        mut diagnosis: Vec<DiagnosisSegment>,
    ) -> Result<Self> {
        mortality.sort_by(|a, b| a.start.total_cmp(&b.start));
        diagnosis.sort_by(|a, b| a.start.total_cmp(&b.start));
        let spans_m: Vec<_> = mortality.iter().map(|s| (s.start, s.end)).collect();
        let spans_d: Vec<_> = diagnosis.iter().map(|s| (s.start, s.end)).collect();
        check_spans(&spans_m, "mortality")?;
        check_spans(&spans_d, "diagnosis")?;
        for s in &mortality {
            if !(s.younger > 0.0 && s.oldest > 0.0 && s.younger.is_finite() && s.oldest.is_finite()) {
                return domain("mortality multipliers must be positive and finite");
            }
        }
        for s in &diagnosis {
            if !(s.multiplier > 0.0 && s.multiplier.is_finite()) {
                return domain("diagnosis multipliers must be positive and finite");
            }
        }
        Ok(ScenarioOverlay {
            name: name.into(),
            mortality,
            diagnosis,
        })
    }

    pub fn pre_pandemic() -> Self {
        builtin_overlay(ScenarioId::PrePandemic)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mortality_segments(&self) -> &[MortalitySegment] {
        &self.mortality
    }

    pub fn diagnosis_segments(&self) -> &[DiagnosisSegment] {
        &self.diagnosis
    }

    /// Other-cause mortality multiplier in force at calendar time `t`.
    pub fn mortality_multiplier(&self, t: f64, group: OverlayGroup) -> f64 {
        self.mortality
            .iter()
            .find(|s| s.start <= t && t < s.end)
            .map_or(1.0, |s| s.multiplier(group))
    }

    /// Observed-onset multiplier in force at calendar time `t`.
    pub fn diagnosis_multiplier(&self, t: f64) -> f64 {
        self.diagnosis
            .iter()
            .find(|s| s.start <= t && t < s.end)
            .map_or(1.0, |s| s.multiplier)
    }

    /// Largest diagnosis multiplier anywhere on the timeline.
    pub fn max_diagnosis_multiplier(&self) -> f64 {
        self.diagnosis.iter().map(|s| s.multiplier).fold(1.0, f64::max)
    }

    /// Sorted, de-duplicated instants at which any multiplier may change.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .mortality
            .iter()
            .flat_map(|s| [s.start, s.end])
            .chain(self.diagnosis.iter().flat_map(|s| [s.start, s.end]))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }
}

fn check_spans(spans: &[(f64, f64)], what: &str) -> Result<()> {
    for &(start, end) in spans {
        if !(start.is_finite() && end.is_finite() && start >= 0.0 && end > start) {
            return domain(format!("{what} segment [{start}, {end}) is empty or negative"));
        }
    }
    for w in spans.windows(2) {
        if w[1].0 < w[0].1 - 1e-12 {
            return domain(format!(
                "{what} segments [{}, {}) and [{}, {}) overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            ));
        }
    }
    Ok(())
}

pub fn builtin_overlay(id: ScenarioId) -> ScenarioOverlay {
    builtin_overlay_with(id, BuiltinWindows::default())
}

pub fn builtin_overlay_with(id: ScenarioId, windows: BuiltinWindows) -> ScenarioOverlay {
    let seg = |start, end, younger, oldest| MortalitySegment {
        start,
        end,
        younger,
        oldest,
    };
    let pandemic_mortality = vec![
        seg(0.0, windows.mortality_start, 1.0, 1.0),
        seg(windows.mortality_start, windows.first_step_down, 1.13, 1.12),
        seg(windows.first_step_down, 3.0, 1.10, 1.09),
        seg(3.0, 4.0, 1.07, 1.06),
        seg(4.0, 5.0, 1.04, 1.03),
    ];
    let (mortality, diagnosis) = match id {
        ScenarioId::PrePandemic => (vec![seg(0.0, 5.0, 1.0, 1.0)], Vec::new()),
        ScenarioId::S1 => (pandemic_mortality, Vec::new()),
        ScenarioId::S2 => (
            pandemic_mortality,
            vec![DiagnosisSegment {
                start: windows.diagnosis_window.0,
                end: windows.diagnosis_window.1,
                multiplier: 0.8,
            }],
        ),
    };
    ScenarioOverlay::new(id.label(), mortality, diagnosis).expect("built-in schedules are well formed")
}
