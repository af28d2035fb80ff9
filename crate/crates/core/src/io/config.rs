//! Run configuration: TOML file, command-line overrides and defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{AgeBand, ModelKind, ParameterSet, StateId};
use crate::scenario::{
    builtin_overlay, month_to_time, DiagnosisSegment, MortalitySegment, ScenarioId, ScenarioOverlay,
};

pub const DEFAULT_OUT_DIR: &str = "bcsm-out";

/// Mortality multipliers from `start_month` up to, not including, `end_month`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MortalitySpan {
    pub start_month: String,
    pub end_month: String,
    pub younger: f64,
    pub oldest: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiagnosisSpan {
    pub start_month: String,
    pub end_month: String,
    pub multiplier: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OverlayConfig {
    pub name: String,
    #[serde(default)]
    pub mortality: Vec<MortalitySpan>,
    #[serde(default)]
    pub diagnosis: Vec<DiagnosisSpan>,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    pub mu35_scale: f64,
    /// `markov`, `semimarkov` or `both`.
    pub model: String,
    /// Built-in scenario ids; ignored when `overlays` is non-empty.
    pub scenarios: Vec<String>,
    pub bands: Vec<String>,
    pub start_states: Vec<usize>,
    /// Reporting times for occupancy and simulation, in years.
    pub horizons: Vec<f64>,
    pub survival_horizons: Vec<f64>,
    pub step: f64,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub paths: u64,
    pub overlays: Vec<OverlayConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.6,
            beta: 1.0 / 7.0,
            mu35_scale: 1.0,
            model: "both".into(),
            scenarios: vec!["pre".into(), "s1".into(), "s2".into()],
            bands: AgeBand::ALL.iter().map(|b| b.label().to_string()).collect(),
            start_states: vec![0, 1, 2, 3],
            horizons: vec![1.0, 5.0],
            survival_horizons: vec![1.0, 5.0, 10.0],
            step: 0.01,
            out_dir: None,
            seed: 20200401,
            paths: 100_000,
            overlays: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub step: Option<f64>,
    pub scenario: Option<String>,
    pub model: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mu35_scale: Option<f64>,
    pub seed: Option<u64>,
    pub paths: Option<u64>,
    pub horizon: Option<f64>,
}

/// Validated, typed settings for one run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub params: ParameterSet,
    pub models: Vec<ModelKind>,
    pub scenarios: Vec<ScenarioOverlay>,
    pub bands: Vec<AgeBand>,
    pub start_states: Vec<StateId>,
    pub horizons: Vec<f64>,
    pub survival_horizons: Vec<f64>,
    pub step: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub paths: u64,
}

fn parse_month(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("month '{s}' is not YYYY-MM"));
    let (y, m) = s.split_once('-').ok_or_else(bad)?;
    let year: i32 = y.parse().map_err(|_| bad())?;
    let month: u32 = m.parse().map_err(|_| bad())?;
    month_to_time(year, month).map_err(|e| Error::Config(e.to_string()))
}

fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    match s.to_ascii_lowercase().as_str() {
        "both" => Ok(ModelKind::ALL.to_vec()),
        other => other
            .parse::<ModelKind>()
            .map(|m| vec![m])
            .map_err(|e| Error::Config(e.to_string())),
    }
}

fn overlay_from(cfg: &OverlayConfig) -> Result<ScenarioOverlay> {
    let mortality = cfg
        .mortality
        .iter()
        .map(|s| {
            Ok(MortalitySegment {
                start: parse_month(&s.start_month)?,
                end: parse_month(&s.end_month)?,
                younger: s.younger,
                oldest: s.oldest,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let diagnosis = cfg
        .diagnosis
        .iter()
        .map(|s| {
            Ok(DiagnosisSegment {
                start: parse_month(&s.start_month)?,
                end: parse_month(&s.end_month)?,
                multiplier: s.multiplier,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScenarioOverlay::new(cfg.name.clone(), mortality, diagnosis).map_err(|e| Error::Config(e.to_string()))
}

impl RunSettings {
    /// Merge file values with command-line overrides.
    pub fn resolve(file: RunConfig, cli: Overrides) -> Result<Self> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        let mut params = ParameterSet::headline(ModelKind::Markov);
        params.alpha = cli.alpha.unwrap_or(file.alpha);
        params.beta = cli.beta.unwrap_or(file.beta);
        params.mu35_scale = cli.mu35_scale.unwrap_or(file.mu35_scale);
        params.validate().map_err(cfg_err)?;

        let models = parse_models(cli.model.as_deref().unwrap_or(&file.model))?;
        let scenarios = match (&cli.scenario, file.overlays.is_empty()) {
            (Some(id), _) => vec![builtin_overlay(id.parse::<ScenarioId>().map_err(cfg_err)?)],
            (None, false) => file.overlays.iter().map(overlay_from).collect::<Result<_>>()?,
            (None, true) => file
                .scenarios
                .iter()
                .map(|s| s.parse::<ScenarioId>().map(builtin_overlay).map_err(cfg_err))
                .collect::<Result<_>>()?,
        };
        let bands = file
            .bands
            .iter()
            .map(|b| b.parse::<AgeBand>().map_err(cfg_err))
            .collect::<Result<Vec<_>>>()?;
        let start_states = file
            .start_states
            .iter()
            .map(|&i| match StateId::from_index(i) {
                Ok(s) if !s.is_absorbing() => Ok(s),
                _ => Err(Error::Config(format!("start state {i} must be one of 0, 1, 2, 3"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let horizons = match cli.horizon {
            Some(h) => vec![h],
            None => file.horizons.clone(),
        };
        let step = cli.step.unwrap_or(file.step);
        for &h in horizons.iter().chain(&file.survival_horizons) {
            // Reuses the grid rules: positive step, horizon in (0, 10] on the grid.
            crate::solver::GridConfig::new(step, h).map_err(cfg_err)?;
        }
        if models.is_empty() || scenarios.is_empty() || bands.is_empty() || horizons.is_empty() {
            return Err(Error::Config(
                "models, scenarios, bands and horizons must be non-empty".into(),
            ));
        }
        let paths = cli.paths.unwrap_or(file.paths);
        if paths == 0 {
            return Err(Error::Config("paths must be at least 1".into()));
        }
        Ok(RunSettings {
            params,
            models,
            scenarios,
            bands,
            start_states,
            horizons,
            survival_horizons: file.survival_horizons,
            step,
            out_dir: cli
                .out
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            seed: cli.seed.unwrap_or(file.seed),
            paths,
        })
    }
}
