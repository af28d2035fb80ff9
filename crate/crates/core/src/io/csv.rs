//! CSV emission. Fields never contain commas, so nothing is quoted; lines
//! end in `\n` and decimals use `.`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::mc::OccupancyEstimate;
use crate::model::{AgeBand, ModelKind, StateId};
use crate::outcomes::{round_display, ExcessRow, FailedCell, OccupancyRow, SurvivalRow};

pub const OCCUPANCY_HEADER: &str = "scenario,model,age_band,start_state,t_years,p0,p1,p2,p3,p4,p5";
pub const SURVIVAL_HEADER: &str = "method,model,age_band,start_state,horizon_years,survival_pct";
pub const EXCESS_HEADER: &str = "scenario,model,age_band,cause,excess_per_100k,yll_per_100k";
pub const SIMULATION_HEADER: &str =
    "scenario,model,age_band,start_state,t_years,n_paths,p0,p1,p2,p3,p4,p5,se0,se1,se2,se3,se4,se5";

/// Decimal with ten significant digits, never in exponent form.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Years as `5.0`, `0.25`.
pub fn years(t: f64) -> String {
    if t.fract() == 0.0 {
        format!("{t:.1}")
    } else {
        format!("{t}")
    }
}

/// Integer display value, half away from zero, without a negative zero.
pub fn count(x: f64) -> String {
    format!("{}", round_display(x, 0) + 0.0)
}

pub fn percent(x: f64) -> String {
    format!("{:.2}", round_display(x, 2) + 0.0)
}

fn occupancy_fields(scenario: &str, model: ModelKind, band: AgeBand, start: StateId, t: f64) -> String {
    format!("{scenario},{model},{band},{start},{}", years(t))
}

fn with_params(params: Option<&str>, line: String) -> String {
    match params {
        Some(p) => format!("{p},{line}"),
        None => line,
    }
}

fn header(params: bool, base: &str) -> String {
    if params {
        format!("params,{base}")
    } else {
        base.to_string()
    }
}

pub fn write_occupancy<W: Write>(out: &mut W, rows: &[OccupancyRow], with_params_column: bool) -> Result<()> {
    writeln!(out, "{}", header(with_params_column, OCCUPANCY_HEADER))?;
    for r in rows {
        let probs: Vec<String> = r.probabilities.iter().map(|&p| sig10(p)).collect();
        let line = format!(
            "{},{}",
            occupancy_fields(&r.scenario, r.model, r.band, r.start, r.t),
            probs.join(",")
        );
        writeln!(
            out,
            "{}",
            with_params(with_params_column.then_some(r.params.as_str()), line)
        )?;
    }
    Ok(())
}

pub fn write_survival<W: Write>(out: &mut W, rows: &[SurvivalRow], with_params_column: bool) -> Result<()> {
    writeln!(out, "{}", header(with_params_column, SURVIVAL_HEADER))?;
    for r in rows {
        let line = format!(
            "{},{},{},{},{},{}",
            r.method,
            r.model,
            r.band,
            r.start,
            r.horizon,
            percent(r.survival_pct)
        );
        writeln!(
            out,
            "{}",
            with_params(with_params_column.then_some(r.params.as_str()), line)
        )?;
    }
    Ok(())
}

pub fn write_excess<W: Write>(out: &mut W, rows: &[ExcessRow], with_params_column: bool) -> Result<()> {
    writeln!(out, "{}", header(with_params_column, EXCESS_HEADER))?;
    for r in rows {
        let line = format!(
            "{},{},{},{},{},{}",
            r.scenario,
            r.model,
            r.band,
            r.cause,
            count(r.excess),
            count(r.yll)
        );
        writeln!(
            out,
            "{}",
            with_params(with_params_column.then_some(r.params.as_str()), line)
        )?;
    }
    Ok(())
}

pub fn write_failures<W: Write>(out: &mut W, rows: &[FailedCell]) -> Result<()> {
    writeln!(out, "params,model,age_band,reason")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.params,
            r.model,
            r.band,
            r.reason.replace(',', ";")
        )?;
    }
    Ok(())
}

pub fn write_simulation_row<W: Write>(
    out: &mut W,
    scenario: &str,
    model: ModelKind,
    band: AgeBand,
    start: StateId,
    estimate: &OccupancyEstimate,
) -> Result<()> {
    for (i, &t) in estimate.times.iter().enumerate() {
        let p: Vec<String> = estimate.probabilities(i).iter().map(|&x| sig10(x)).collect();
        let se: Vec<String> = estimate.standard_errors(i).iter().map(|&x| sig10(x)).collect();
        writeln!(
            out,
            "{},{},{},{}",
            occupancy_fields(scenario, model, band, start, t),
            estimate.n_paths,
            p.join(","),
            se.join(",")
        )?;
    }
    Ok(())
}

/// Create `dir/name` and hand a buffered writer to `body`.
pub fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}
