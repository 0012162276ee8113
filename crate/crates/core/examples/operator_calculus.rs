//! p(A) y for scalar and Gaussian generator systems, and Phi_F.

use polycalc::distributions::delta_at;
use polycalc::fock::{power_dist, power_test};
use polycalc::halfline::{build_grid, sample_real, QuadratureRule};
use polycalc::opcalc::{calculus_apply, opshift_apply, phi_apply, FockLayout, FockState, GeneratorSystem};
use polycalc::Complex64;

fn main() -> polycalc::Result<()> {
    let g = build_grid(1024, 40.0, QuadratureRule::Gregory)?;
    let phi = sample_real(|t| (-2.0 * t).exp(), &g)?;
    let p = power_test(&phi, 2);

    let layout = FockLayout::new(12.0, vec![128, 32])?;
    let y = FockState::from_fn(&layout, Complex64::new(1.0, 0.0), |_, xi| {
        Complex64::new(xi.iter().map(|x| (-x * x / 8.0).exp()).product(), 0.0)
    });

    // A scalar generator i*mu acts as multiplication by 1 / (2 + mu) on every slot.
    let scalar = GeneratorSystem::scalar(&[vec![Complex64::new(0.0, -1.0)], vec![Complex64::new(0.0, -1.0); 2]])?;
    let out = calculus_apply(&p, &scalar, &y)?;
    println!("scalar system: ||p(A) y|| = {:.10}, y0 = {:.10}", out.norm(), out.y0());

    let gauss = GeneratorSystem::gaussian(2);
    let out = calculus_apply(&p, &gauss, &y)?;
    println!("Gaussian system: ||p(A) y|| = {:.10}", out.norm());

    // Shifting by s scales the degree-n part of this symbol by e^{-2ns}.
    let shifted = opshift_apply(&p, 0.5, &gauss, &y)?;
    println!("operator shift: ||T~_0.5 p (A) y|| = {:.10}", shifted.norm());

    let f = power_dist(&delta_at(0.5, 0)?, 2);
    let a = phi_apply(&f, &p, &gauss, &y)?;
    println!("Phi_F p: ||.|| = {:.10}, equals shift by 0.5: {:.1e}", a.norm(), a.distance(&shifted)?);
    Ok(())
}
