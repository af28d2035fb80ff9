//! Refit the duration-dependent progression hazard by least squares and
//! compare each fit with the built-in quartic.

use bcsm::fit::{eval_polynomial, fit_duration_polynomial, rmse, PROGRESSION_RATE_POINTS, SUPPORTED_DEGREES};
use bcsm::hazard::DurationHazard;

fn main() -> bcsm::Result<()> {
    let built_in = DurationHazard::semi_markov();
    for degree in SUPPORTED_DEGREES {
        let c = fit_duration_polynomial(&PROGRESSION_RATE_POINTS, degree)?;
        let gap = (0..=100)
            .map(|i| i as f64 / 10.0)
            .map(|z| (eval_polynomial(&c, z) - built_in.rate(z)).abs())
            .fold(0.0, f64::max);
        println!(
            "degree {degree}: rmse {:.5}  max gap {gap:.5}  rate(2) {:.5}",
            rmse(&c, &PROGRESSION_RATE_POINTS),
            eval_polynomial(&c, 2.0)
        );
    }
    Ok(())
}
