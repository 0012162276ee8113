//! Sampling on the half-line, the shift semigroup and quadrature rules.

use polycalc::halfline::{build_grid, diff_fn, integrate, sample_real, shift_fn, QuadratureRule};

fn main() -> polycalc::Result<()> {
    for rule in [QuadratureRule::Gregory, QuadratureRule::Trapezoid, QuadratureRule::GaussLaguerreMapped] {
        let g = build_grid(256, 40.0, rule)?;
        let phi = sample_real(|t| t * (-t).exp(), &g)?;
        println!("{rule:>22}: int t e^-t = {:.12}", integrate(&phi).re);
    }

    let g = build_grid(1024, 40.0, QuadratureRule::Gregory)?;
    let phi = sample_real(|t| (-t * t).exp(), &g)?;
    // T_a T_b = T_{a+b}
    let lhs = shift_fn(&shift_fn(&phi, 0.3)?, 0.7)?;
    let rhs = shift_fn(&phi, 1.0)?;
    println!("semigroup law defect: {:.2e}", lhs.sup_distance(&rhs)?);

    let d = diff_fn(&phi)?;
    let exact = sample_real(|t| -2.0 * t * (-t * t).exp(), &g)?;
    println!("derivative error: {:.2e}", d.sup_distance(&exact)?);
    Ok(())
}
