use rayon::prelude::*;

use super::{GridConfig, OccupancyCurve, Quadrature, StepIntegral, TIME_EPS};
use crate::error::{Error, Result};
use crate::model::{AgeBand, IntensityModel, ParameterSet, StateId};
use crate::scenario::ScenarioOverlay;

impl StepIntegral {
    /// `∫₀ᵗ exp(-H(v)) dv`, exact for the piecewise-linear `H`.
    fn survival_integral(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (i, w) in self.knots().windows(2).enumerate() {
            let (a, b) = (w[0], w[1].min(t));
            if b <= a {
                break;
            }
            let rate = self.rate_on(i);
            let len = b - a;
            let head = (-self.eval(a)).exp();
            total += if rate * len < 1e-12 {
                head * len
            } else {
                head * (1.0 - (-rate * len).exp()) / rate
            };
        }
        total
    }
}

/// Semi-Markov occupancy curve from State 0.
///
/// Each onset time `u` is an entrant cohort for States 1 and 2 whose
/// duration-survival factor is known exactly; the outer integrals over `u`
/// and over arrival times in State 3 use the configured quadrature on the
/// grid refined by the overlay breakpoints.
pub fn solve_semimarkov_from_onset(
    band: AgeBand,
    params: &ParameterSet,
    scenario: &ScenarioOverlay,
    grid: &GridConfig,
) -> Result<OccupancyCurve> {
    let model = IntensityModel::new(band, params, scenario)?;
    let horizon = grid.horizon();
    let exit0 = StepIntegral::new(&model, horizon, |t| model.exit_no_bc(t))?;
    let other = StepIntegral::new(&model, horizon, |t| model.other_cause_post_onset(t))?;
    let exit3 = StepIntegral::new(&model, horizon, |t| model.exit_metastatic(t))?;
    let observed = model.observed_progression();
    let unobserved = model.unobserved_progression();

    // Nodes are grid times plus any breakpoint falling between them, so no
    // cell straddles a jump in a calendar rate.
    let mut nodes: Vec<(f64, Option<usize>)> = grid
        .times()
        .into_iter()
        .enumerate()
        .map(|(k, t)| (t, Some(k)))
        .collect();
    for &b in &exit0.knots()[1..exit0.knots().len() - 1] {
        if nodes.iter().all(|(t, _)| (t - b).abs() > TIME_EPS) {
            nodes.push((b, None));
        }
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let node_times: Vec<f64> = nodes.iter().map(|n| n.0).collect();

    // Fine points interleave nodes and cell midpoints: fine[2i] is node i.
    let mut fine = Vec::with_capacity(2 * node_times.len() - 1);
    for w in node_times.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    fine.push(*node_times.last().unwrap());

    let onset_density = |u: f64, cell_mid: f64| {
        let p00 = (-exit0.eval(u)).exp();
        (
            p00 * model.onset_observed(cell_mid),
            p00 * model.onset_unobserved(cell_mid),
        )
    };
    // (into State 1, into State 2, arrival rate into State 3) for onset at u, seen at s.
    let integrand = |u: f64, cell_mid: f64, s: f64| {
        let (d1, d2) = onset_density(u, cell_mid);
        let z = s - u;
        let stay_alive = (other.eval(u) - other.eval(s)).exp();
        let in1 = d1 * (-observed.cumulative(z)).exp() * stay_alive;
        let in2 = d2 * (-unobserved.cumulative(z)).exp() * stay_alive;
        [in1, in2, in1 * observed.rate(z) + in2 * unobserved.rate(z)]
    };
    let quadrature = grid.quadrature;
    let inner: Vec<[f64; 3]> = (0..fine.len())
        .into_par_iter()
        .map(|j| {
            let s = fine[j];
            let mut acc = [0.0; 3];
            for c in 0..j {
                let (a, b) = (fine[c], fine[c + 1]);
                let mid = 0.5 * (a + b);
                // Calendar rates come from the cell midpoint, so endpoints on a
                // breakpoint see the rate of this cell.
                let left = integrand(a, mid, s);
                let right = integrand(b, mid, s);
                let len = b - a;
                match quadrature {
                    Quadrature::Simpson => {
                        let m = integrand(mid, mid, s);
                        for i in 0..3 {
                            acc[i] += len / 6.0 * (left[i] + 4.0 * m[i] + right[i]);
                        }
                    }
                    Quadrature::Trapezoid => {
                        for i in 0..3 {
                            acc[i] += 0.5 * len * (left[i] + right[i]);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let arrival: Vec<f64> = inner.iter().map(|v| v[2]).collect();

    let m35 = model.metastatic_death();
    let g_total = |t: f64| exit3.survival_integral(t);
    let state3 = |t_index: usize| -> (f64, f64) {
        let t = node_times[t_index];
        let h3_t = exit3.eval(t);
        let g_t = g_total(t);
        let f = |fine_index: usize| {
            let s = fine[fine_index];
            let h3_s = exit3.eval(s);
            let stay = (h3_s - h3_t).exp();
            let absorbed = m35 * h3_s.exp() * (g_t - g_total(s));
            (arrival[fine_index] * stay, arrival[fine_index] * absorbed)
        };
        let (mut p3, mut p5) = (0.0, 0.0);
        for i in 0..t_index {
            let len = node_times[i + 1] - node_times[i];
            let (l3, l5) = f(2 * i);
            let (r3, r5) = f(2 * i + 2);
            match quadrature {
                Quadrature::Simpson => {
                    let (m3, m5) = f(2 * i + 1);
                    p3 += len / 6.0 * (l3 + 4.0 * m3 + r3);
                    p5 += len / 6.0 * (l5 + 4.0 * m5 + r5);
                }
                Quadrature::Trapezoid => {
                    p3 += 0.5 * len * (l3 + r3);
                    p5 += 0.5 * len * (l5 + r5);
                }
            }
        }
        (p3, p5)
    };

    let probabilities: Vec<[f64; 6]> = nodes
        .par_iter()
        .enumerate()
        .filter(|(_, n)| n.1.is_some())
        .map(|(i, &(t, _))| {
            let p0 = (-exit0.eval(t)).exp();
            let [p1, p2, _] = inner[2 * i];
            let (p3, p5) = state3(i);
            let p4 = 1.0 - p0 - p1 - p2 - p3 - p5;
            [p0, p1, p2, p3, p4, p5]
        })
        .collect();
    if probabilities.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite occupancy in convolution solve".into()));
    }
    Ok(OccupancyCurve {
        start: StateId::NoBc,
        band,
        scenario: scenario.name().to_string(),
        model_kind: params.model_kind,
        step: grid.step(),
        times: grid.times(),
        probabilities,
    })
}
