//! Atoms and densities: pairing, cross-correlation, convolution, derivatives.

use polycalc::distributions::{convolve, cross_correlate, delta_at, distr_derivative, pair, Distribution};
use polycalc::halfline::{build_grid, diff_fn, sample_real, QuadratureRule};
use polycalc::Complex64;

fn main() -> polycalc::Result<()> {
    let g = build_grid(1024, 40.0, QuadratureRule::Gregory)?;
    let phi = sample_real(|t| t * t * (-t).exp(), &g)?;
    let rho = Distribution::from_density(sample_real(|t| (-t).exp(), &g)?);
    let d1 = delta_at(1.0, 0)?;

    println!("<delta_1, phi> = {:.12}  (exact {:.12})", pair(&d1, &phi)?.re, (-1.0f64).exp());
    println!("<rho, phi>     = {:.12}  (exact 0.25)", pair(&rho, &phi)?.re);

    // (f * g) * phi = f * (g * phi)
    let fg = convolve(&d1, &rho)?;
    let lhs = cross_correlate(&fg, &phi)?;
    let rhs = cross_correlate(&d1, &cross_correlate(&rho, &phi)?)?;
    println!("homomorphism defect: {:.2e}", lhs.sup_distance(&rhs)?);

    // (Df) * phi = -f * (D phi)
    let f = delta_at(0.5, 1)?;
    let a = cross_correlate(&distr_derivative(&f)?, &phi)?;
    let b = cross_correlate(&f, &diff_fn(&phi)?)?;
    println!("differential defect: {:.2e}", a.axpy(Complex64::new(1.0, 0.0), &b)?.max_abs());
    Ok(())
}
