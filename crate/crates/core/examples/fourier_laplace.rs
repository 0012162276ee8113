//! Fourier and Laplace transforms of test functions and symbols.

use polycalc::distributions::delta_at;
use polycalc::fock::power_test;
use polycalc::halfline::{build_grid, sample_real, QuadratureRule};
use polycalc::transforms::{fourier_fn, fourier_pair_check, laplace_eval, laplace_fn, laplace_probes, FreqGrid};
use polycalc::Complex64;

fn main() -> polycalc::Result<()> {
    let g = build_grid(1024, 40.0, QuadratureRule::Gregory)?;
    let phi = sample_real(|t| (-t).exp(), &g)?;

    let xi = FreqGrid::default_grid();
    let hat = fourier_fn(&phi, &xi)?;
    for x in [0.0, 1.0, 4.0, 8.0] {
        let exact = 1.0 / Complex64::new(1.0, x);
        println!("F e^-t ({x:>3}) = {:.10}  err {:.1e}", hat.eval(x), (hat.eval(x) - exact).norm());
    }

    let (lhs, rhs) = fourier_pair_check(&delta_at(1.0, 1)?, &phi, &xi)?;
    println!("duality: {lhs:.8} vs {rhs:.8}");

    for l in laplace_probes() {
        let exact = 1.0 / (l + 1.0);
        println!("L e^-t ({l}) err {:.1e}", (laplace_fn(&phi, l)? - exact).norm());
    }
    let p = power_test(&phi, 2);
    let (l1, l2) = (Complex64::new(1.0, 1.0), Complex64::new(2.0, -1.0));
    println!("L p_2 = {:.10}, product {:.10}", laplace_eval(&p, &[l1, l2])?, 1.0 / ((l1 + 1.0) * (l2 + 1.0)));
    Ok(())
}
