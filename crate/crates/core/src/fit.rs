//! Least-squares refit of the duration-dependent progression hazard.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};

/// Observed first-metastasis rates by years since diagnosis.
pub const PROGRESSION_RATE_POINTS: [(f64, f64); 9] = [
    (0.0, 0.0),
    (1.0, 0.03),
    (2.0, 0.04),
    (3.0, 0.03),
    (4.0, 0.024),
    (5.0, 0.021),
    (6.0, 0.02),
    (8.0, 0.0194),
    (10.0, 0.0194),
];

pub const SUPPORTED_DEGREES: [usize; 4] = [3, 4, 6, 7];

/// Unweighted least-squares polynomial, coefficients lowest order first.
pub fn fit_duration_polynomial(points: &[(f64, f64)], degree: usize) -> Result<Vec<f64>> {
    if !SUPPORTED_DEGREES.contains(&degree) {
        return domain(format!("degree {degree} is not one of {SUPPORTED_DEGREES:?}"));
    }
    if points.len() <= degree {
        return domain(format!(
            "{} points cannot determine a degree-{degree} fit",
            points.len()
        ));
    }
    if points.iter().any(|(z, r)| !z.is_finite() || !r.is_finite()) {
        return domain("fit points must be finite");
    }
    let design = DMatrix::from_fn(points.len(), degree + 1, |i, k| points[i].0.powi(k as i32));
    let rates = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let svd = design.svd(true, true);
    if svd.rank(1e-12 * svd.singular_values.max()) <= degree {
        return domain("fit points do not span enough distinct durations");
    }
    let solution = svd.solve(&rates, 1e-14).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(solution.iter().copied().collect())
}

pub fn eval_polynomial(coefficients: &[f64], z: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// Root-mean-square residual of a fitted polynomial over the points.
pub fn rmse(coefficients: &[f64], points: &[(f64, f64)]) -> f64 {
    let sse: f64 = points
        .iter()
        .map(|&(z, r)| (eval_polynomial(coefficients, z) - r).powi(2))
        .sum();
    (sse / points.len() as f64).sqrt()
}
