//! Duration-dependent progression hazard for the pre-metastatic states.
//!
//! The observed-state progression intensity depends only on the time spent
//! in the state. It is either a constant (the Markov special case) or a
//! polynomial in duration that is valid on `[0, 10]` years. Outside that
//! domain the polynomial is held at its value at 10 years, and negative
//! values are floored at zero.

use crate::error::{domain, Result};

/// Upper end of the duration domain on which the polynomial is fitted.
pub const DURATION_DOMAIN_END: f64 = 10.0;

/// Constant progression rate used for the Markov model (per person-year).
pub const MARKOV_PROGRESSION_RATE: f64 = 0.01954;

/// Quartic duration hazard, coefficients lowest order first (per person-year).
pub const PROGRESSION_POLYNOMIAL: [f64; 5] = [0.00088644, 0.04191138, -0.01574062, 0.00207282, -0.00008998];

/// Resolution of the grid scan that certifies non-negativity and the maximum.
const SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum DurationHazard {
    Constant(f64),
    Polynomial(Polynomial),
}

/// Polynomial hazard with cached shape facts from a grid scan of `[0, 10]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coefficients: Vec<f64>,
    max_on_domain: f64,
    nonnegative_on_domain: bool,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return domain("polynomial coefficients must be finite and non-empty");
        }
        let mut poly = Polynomial {
            coefficients,
            max_on_domain: 0.0,
            nonnegative_on_domain: true,
        };
        let steps = (DURATION_DOMAIN_END / SCAN_STEP).round() as usize;
        let mut max = 0.0_f64;
        let mut nonneg = true;
        for i in 0..=steps {
            let raw = poly.raw(i as f64 * SCAN_STEP);
            nonneg &= raw >= 0.0;
            max = max.max(raw);
        }
        poly.max_on_domain = max;
        poly.nonnegative_on_domain = nonneg;
        Ok(poly)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Horner evaluation without clamping or flooring.
    pub fn raw(&self, z: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// Exact antiderivative of the raw polynomial, zero at `z = 0`.
    pub fn raw_antiderivative(&self, z: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * z + c / (k as f64 + 1.0))
            * z
    }
}

impl DurationHazard {
    pub fn markov() -> Self {
        DurationHazard::Constant(MARKOV_PROGRESSION_RATE)
    }

    pub fn semi_markov() -> Self {
        DurationHazard::Polynomial(
            Polynomial::new(PROGRESSION_POLYNOMIAL.to_vec()).expect("built-in coefficients are finite"),
        )
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        Polynomial::new(coefficients).map(DurationHazard::Polynomial)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DurationHazard::Constant(_))
    }

    /// Hazard at duration `z` (clamped at 10 years, floored at 0).
    pub fn rate(&self, z: f64) -> f64 {
        match self {
            DurationHazard::Constant(r) => *r,
            DurationHazard::Polynomial(p) => p.raw(z.min(DURATION_DOMAIN_END)).max(0.0),
        }
    }

    /// Integrated hazard `∫₀ᶻ rate(v) dv`.
    ///
    /// Polynomials that stay non-negative on the fitted domain use the exact
    /// antiderivative; otherwise the floored integrand is integrated with
    /// composite Simpson on a fine grid.
    pub fn cumulative(&self, z: f64) -> f64 {
        match self {
            DurationHazard::Constant(r) => r * z,
            DurationHazard::Polynomial(p) => {
                let inside = z.min(DURATION_DOMAIN_END);
                let head = if p.nonnegative_on_domain {
                    p.raw_antiderivative(inside)
                } else {
                    floored_integral(p, inside)
                };
                let tail = if z > DURATION_DOMAIN_END {
                    (z - DURATION_DOMAIN_END) * self.rate(DURATION_DOMAIN_END)
                } else {
                    0.0
                };
                head + tail
            }
        }
    }

    /// Upper bound of the hazard over all durations, used to dominate thinning proposals.
    pub fn upper_bound(&self) -> f64 {
        match self {
            DurationHazard::Constant(r) => *r,
            // The scan grid can miss the true peak by O(step^2 * |p''|); pad slightly.
            DurationHazard::Polynomial(p) => p.max_on_domain * (1.0 + 1e-6) + 1e-12,
        }
    }

    /// Same hazard multiplied by a positive constant.
    pub fn scaled(&self, factor: f64) -> DurationHazard {
        match self {
            DurationHazard::Constant(r) => DurationHazard::Constant(r * factor),
            DurationHazard::Polynomial(p) => DurationHazard::Polynomial(Polynomial {
                coefficients: p.coefficients.iter().map(|c| c * factor).collect(),
                max_on_domain: p.max_on_domain * factor,
                nonnegative_on_domain: p.nonnegative_on_domain,
            }),
        }
    }
}

fn floored_integral(p: &Polynomial, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let n = ((z / 1e-3).ceil() as usize).max(2) & !1;
    let n = n.max(2);
    let h = z / n as f64;
    let f = |v: f64| p.raw(v).max(0.0);
    let mut sum = f(0.0) + f(z);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    sum * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_at_two_years() {
        // 0.00088644 + 0.08382276 - 0.06296248 + 0.01658256 - 0.00143968
        let h = DurationHazard::semi_markov();
        assert_abs_diff_eq!(h.rate(2.0), 0.0368896, epsilon = 1e-7);
    }

    #[test]
    fn clamped_beyond_ten_years() {
        let h = DurationHazard::semi_markov();
        assert_abs_diff_eq!(h.rate(10.0), 0.01896, epsilon = 1e-5);
        assert_eq!(h.rate(12.5), h.rate(10.0));
    }

    #[test]
    fn antiderivative_matches_simpson() {
        let h = DurationHazard::semi_markov();
        let DurationHazard::Polynomial(p) = &h else {
            unreachable!()
        };
        for z in [0.5, 2.0, 7.3, 10.0] {
            assert_abs_diff_eq!(h.cumulative(z), floored_integral(p, z), epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulative_extends_linearly_past_domain() {
        let h = DurationHazard::semi_markov();
        let extra = h.cumulative(11.0) - h.cumulative(10.0);
        assert_abs_diff_eq!(extra, h.rate(10.0), epsilon = 1e-14);
    }

    #[test]
    fn floor_applies_to_negative_polynomials() {
        let h = DurationHazard::polynomial(vec![-0.01, 0.01]).unwrap();
        assert_eq!(h.rate(0.5), 0.0);
        // ∫₁² (z - 1)/100 dz = 0.005
        assert_abs_diff_eq!(h.cumulative(2.0), 0.005, epsilon = 1e-8);
    }

    #[test]
    fn upper_bound_dominates() {
        let h = DurationHazard::semi_markov();
        let bound = h.upper_bound();
        assert!(bound > 0.03693 && bound < 0.03694, "{bound}");
        for i in 0..=100_000 {
            assert!(h.rate(i as f64 * 1e-4) <= bound);
        }
    }
}
