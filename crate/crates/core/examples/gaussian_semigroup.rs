//! The Gaussian semigroup e^{-it d^2} against its complex-variance closed form.

use polycalc::opcalc::{contraction_report, gaussian_apply, probe_states, propagated_gaussian, FockLayout, FockState, Generator1D};
use polycalc::Complex64;

fn main() -> polycalc::Result<()> {
    let layout = FockLayout::desk(2)?;
    let y = FockState::from_fn(&layout, Complex64::new(1.0, 0.0), |_, xi| {
        Complex64::new(xi.iter().map(|x| (-x * x / 2.0).exp()).product(), 0.0)
    });
    let xs = layout.coords(1);
    for t in [0.0, 0.25, 0.5, 0.75] {
        let out = gaussian_apply(&[t], &y)?;
        let err = out
            .component(1)
            .iter()
            .zip(&xs)
            .map(|(v, &x)| (v - propagated_gaussian(1.0, t, x)).norm())
            .fold(0.0, f64::max);
        println!("t = {t:.2}: ||y(t)|| = {:.14}, closed-form error {err:.1e}", out.norm());
    }
    let report = contraction_report(&Generator1D::SecondDerivative { degree: 2, axis: 0 }, &[0.1, 1.0], &probe_states(&layout))?;
    println!("contraction: max ratio {:.15}, certified {}", report.max_ratio, report.certified());
    Ok(())
}
