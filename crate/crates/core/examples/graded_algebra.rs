//! Symmetric polynomials of test functions and distributions up to degree 3.

use polycalc::distributions::{delta_at, Distribution};
use polycalc::fock::{boxtimes, cross_corr_poly, poly_pair, poly_shift, power_dist, power_test, PolyTest};
use polycalc::halfline::{build_grid, sample_real, QuadratureRule};
use polycalc::Complex64;

fn main() -> polycalc::Result<()> {
    let g = build_grid(512, 40.0, QuadratureRule::Gregory)?;
    let a = sample_real(|t| (-t).exp(), &g)?;
    let b = sample_real(|t| (-t * t).exp(), &g)?;

    let mut p = power_test(&a, 3);
    p.push_term(Complex64::new(0.0, 1.0), vec![a.clone(), b.clone()])?;
    println!("p has {} terms; p_2(0.5, 1.0) = {:.6}", p.term_count(), p.eval(&[0.5, 1.0]));

    let f = power_dist(&delta_at(0.25, 0)?, 3);
    let h = power_dist(&Distribution::from_density(sample_real(|t| t * (-t).exp(), &g)?), 3);
    let lhs = cross_corr_poly(&boxtimes(&f, &h)?, &p)?;
    let rhs = cross_corr_poly(&f, &cross_corr_poly(&h, &p)?)?;
    println!("K_(F*H) = K_F K_H defect: {:.2e}", lhs.sup_distance(&rhs)?);

    let shifted = cross_corr_poly(&f, &poly_shift(&p, 1.0)?)?;
    let other = poly_shift(&cross_corr_poly(&f, &p)?, 1.0)?;
    println!("shift commutation defect: {:.2e}", shifted.sup_distance(&other)?);

    let unit_pair = poly_pair(&power_dist(&Distribution::unit(), 3), &PolyTest::scalar(Complex64::new(2.0, 0.0), 3))?;
    println!("<1, 2> = {unit_pair}");
    Ok(())
}
