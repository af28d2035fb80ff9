//! Regression of computed outcomes against the embedded reference tables.
//!
//! Each reference cell records its source table, scenario, parameter set,
//! model kind, band and quantity. Cells are recomputed from scratch and
//! compared within a tolerance that depends on the quantity and model kind.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AgeBand, IntensityTable, ModelKind, StateId};
use crate::outcomes::{
    excess_deaths, ons_survival, sensitivity_grid, years_of_life_lost, Cause, LifeTable, SurvivalMethod, EXCESS_HORIZON,
};
use crate::scenario::{builtin_overlay, ScenarioId};
use crate::solver::{solve, GridConfig, OccupancyCurve};

/// Reference cells, one per line: `table,scenario,params,model,age_band,quantity,value`.
pub const REFERENCE_CELLS: &str = include_str!("../../data/reference_cells.csv");

#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    /// Sum of occupancy percentages of `to` states at `t`, starting in `from`.
    Occupancy {
        from: StateId,
        to: Vec<StateId>,
        t: f64,
    },
    Survival {
        method: SurvivalMethod,
        start: StateId,
        horizon: f64,
    },
    Excess(Cause),
    Yll(Cause),
}

impl Quantity {
    fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognised quantity '{s}'"));
        let cause = |c: &str| match c {
            "other" => Ok(Cause::Other),
            "bc" => Ok(Cause::Bc),
            _ => Err(bad()),
        };
        if let Some(c) = s.strip_prefix("excess_") {
            return Ok(Quantity::Excess(cause(c)?));
        }
        if let Some(c) = s.strip_prefix("yll_") {
            return Ok(Quantity::Yll(cause(c)?));
        }
        let (head, t) = s.rsplit_once('_').ok_or_else(bad)?;
        let t: f64 = t.parse().map_err(|_| bad())?;
        let state = |c: char| {
            c.to_digit(10)
                .ok_or_else(bad)
                .and_then(|d| StateId::from_index(d as usize).map_err(|_| bad()))
        };
        for method in SurvivalMethod::ALL {
            if let Some(rest) = head.strip_prefix(&format!("{}_from", method.label())) {
                let start = state(rest.chars().next().ok_or_else(bad)?)?;
                return Ok(Quantity::Survival {
                    method,
                    start,
                    horizon: t,
                });
            }
        }
        let mut from = None;
        let mut to = Vec::new();
        for term in head.split('+') {
            let digits: Vec<char> = term.strip_prefix('p').ok_or_else(bad)?.chars().collect();
            if digits.len() != 2 {
                return Err(bad());
            }
            let f = state(digits[0])?;
            if from.is_some_and(|x| x != f) {
                return Err(bad());
            }
            from = Some(f);
            to.push(state(digits[1])?);
        }
        Ok(Quantity::Occupancy {
            from: from.ok_or_else(bad)?,
            to,
            t,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Quantity::Occupancy { .. } => "occupancy",
            Quantity::Survival { .. } => "survival",
            Quantity::Excess(_) => "excess",
            Quantity::Yll(_) => "yll",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCell {
    pub table: String,
    pub scenario: ScenarioId,
    pub params: String,
    pub model: ModelKind,
    pub band: AgeBand,
    pub label: String,
    pub quantity: Quantity,
    pub value: f64,
}

impl ReferenceCell {
    /// Allowed absolute deviation for this cell.
    pub fn tolerance(&self) -> f64 {
        match (&self.quantity, self.model) {
            (Quantity::Occupancy { .. }, ModelKind::Markov) => 0.02,
            (Quantity::Occupancy { .. }, ModelKind::SemiMarkov) => 0.05,
            (Quantity::Survival { .. }, ModelKind::Markov) => 0.05,
            (Quantity::Survival { .. }, ModelKind::SemiMarkov) => 0.10,
            (Quantity::Excess(Cause::Other), _) => 5.0,
            (Quantity::Excess(Cause::Bc), _) => 1.0,
            (Quantity::Yll(_), _) => 5.0,
        }
    }
}

pub fn parse_reference_cells(text: &str) -> Result<Vec<ReferenceCell>> {
    let cfg = |e: Error| Error::Config(e.to_string());
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Config(format!("malformed reference line '{line}'")));
            }
            Ok(ReferenceCell {
                table: f[0].to_string(),
                scenario: f[1].parse().map_err(cfg)?,
                params: f[2].to_string(),
                model: f[3].parse().map_err(cfg)?,
                band: f[4].parse().map_err(cfg)?,
                label: f[5].to_string(),
                quantity: Quantity::parse(f[5])?,
                value: f[6]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad value in '{line}'")))?,
            })
        })
        .collect()
}

pub fn reference_cells() -> Vec<ReferenceCell> {
    parse_reference_cells(REFERENCE_CELLS).expect("embedded reference cells parse")
}

#[derive(Debug, Clone)]
pub struct ValidationSettings {
    pub step: f64,
    pub intensity_table: IntensityTable,
    pub life_table: LifeTable,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        ValidationSettings {
            step: 0.01,
            intensity_table: IntensityTable::baseline(),
            life_table: LifeTable::standard(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: ReferenceCell,
    pub computed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CurveKey<'a> {
    scenario: ScenarioId,
    params: &'a str,
    model: ModelKind,
    band: AgeBand,
    start: StateId,
    adjusted: bool,
}

fn curve_keys(cell: &ReferenceCell) -> Vec<CurveKey<'_>> {
    let key = |scenario, start, adjusted| CurveKey {
        scenario,
        params: &cell.params,
        model: cell.model,
        band: cell.band,
        start,
        adjusted,
    };
    match &cell.quantity {
        Quantity::Occupancy { from, .. } => vec![key(cell.scenario, *from, false)],
        Quantity::Survival { method, start, .. } => {
            vec![key(cell.scenario, *start, *method == SurvivalMethod::Adjusted)]
        }
        Quantity::Excess(_) | Quantity::Yll(_) => vec![
            key(ScenarioId::PrePandemic, StateId::NoBc, false),
            key(cell.scenario, StateId::NoBc, false),
        ],
    }
}

/// Recompute each cell and compare with its reference value.
pub fn evaluate_cells(cells: &[ReferenceCell], settings: &ValidationSettings) -> Result<Vec<CellResult>> {
    let grid_sets: HashMap<String, _> = sensitivity_grid().into_iter().map(|n| (n.id, n.params)).collect();
    let mut keys: Vec<CurveKey> = cells.iter().flat_map(curve_keys).collect();
    keys.sort();
    keys.dedup();
    let onset_grid = GridConfig::new(settings.step, EXCESS_HORIZON)?;
    let select_grid = GridConfig::new(settings.step, 10.0)?;
    let curves: HashMap<CurveKey, OccupancyCurve> = keys
        .par_iter()
        .map(|k| {
            let base = grid_sets
                .get(k.params)
                .ok_or_else(|| Error::Lookup(format!("unknown parameter set '{}'", k.params)))?;
            let mut params = base.with_model(k.model);
            params.intensity_table = settings.intensity_table.clone();
            if k.adjusted {
                params = params.without_post_onset_other_cause();
            }
            let grid = if k.start == StateId::NoBc {
                &onset_grid
            } else {
                &select_grid
            };
            Ok((*k, solve(k.start, k.band, &params, &builtin_overlay(k.scenario), grid)?))
        })
        .collect::<Result<_>>()?;

    cells
        .iter()
        .map(|cell| {
            let keys = curve_keys(cell);
            let computed = match &cell.quantity {
                Quantity::Occupancy { to, t, .. } => {
                    let p = curves[&keys[0]].at(*t)?;
                    100.0 * to.iter().map(|s| p[s.index()]).sum::<f64>()
                }
                Quantity::Survival { method, horizon, .. } => {
                    let c = &curves[&keys[0]];
                    match method {
                        SurvivalMethod::Ons => ons_survival(c, *horizon)?,
                        SurvivalMethod::Adjusted => 100.0 * (1.0 - c.prob(*horizon, StateId::DeadBc)?),
                    }
                }
                Quantity::Excess(cause) => excess_deaths(&curves[&keys[0]], &curves[&keys[1]], *cause, EXCESS_HORIZON)?,
                Quantity::Yll(cause) => {
                    let e = excess_deaths(&curves[&keys[0]], &curves[&keys[1]], *cause, EXCESS_HORIZON)?;
                    years_of_life_lost(e, cell.band, &settings.life_table)
                }
            };
            // The slack absorbs binary representation of the printed values.
            let pass = (computed - cell.value).abs() <= cell.tolerance() + 1e-9;
            Ok(CellResult {
                cell: cell.clone(),
                computed,
                pass,
            })
        })
        .collect()
}

/// Pass and total counts per source table.
pub fn summarize(results: &[CellResult]) -> BTreeMap<String, (usize, usize)> {
    let mut out = BTreeMap::new();
    for r in results {
        let e = out.entry(r.cell.table.clone()).or_insert((0, 0));
        e.0 += r.pass as usize;
        e.1 += 1;
    }
    out
}
