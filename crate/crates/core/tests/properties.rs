use std::sync::Arc;

use polycalc::distributions::{convolve, cross_correlate, delta_at, pair, Distribution};
use polycalc::fock::{boxtimes, power_dist, PolyTest};
use polycalc::halfline::{build_grid, sample_real, shift_fn, Grid, QuadratureRule};
use polycalc::harness::SuiteConfig;
use polycalc::opcalc::{calculus_apply, gaussian_apply, FockLayout, FockState, GeneratorSystem};
use polycalc::transforms::laplace_fn;
use polycalc::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fine() -> Arc<Grid> {
    build_grid(1024, 30.0, QuadratureRule::Gregory).unwrap()
}

/// Spacing 1/16, so dyadic shifts land on nodes.
fn dyadic() -> Arc<Grid> {
    build_grid(30 * 16 + 1, 30.0, QuadratureRule::Gregory).unwrap()
}

fn bump(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |t| (-((t - center) / width).powi(2)).exp()
}

fn state(layout: &Arc<FockLayout>, s: f64, tilt: f64) -> FockState {
    FockState::from_fn(layout, c(0.5, 0.0), |_, xi| {
        xi.iter().map(|x| c((-x * x / (2.0 * s)).exp(), 0.0) * c(0.0, tilt * x).exp()).product()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shift_semigroup(a in 0.0f64..3.0, b in 0.0f64..3.0, center in 2.0f64..6.0) {
        let g = fine();
        let phi = sample_real(bump(center, 1.5), &g).unwrap();
        let twice = shift_fn(&shift_fn(&phi, a).unwrap(), b).unwrap();
        let once = shift_fn(&phi, a + b).unwrap();
        prop_assert!(twice.sup_distance(&once).unwrap() < 1e-6);
        let same = shift_fn(&phi, 0.0).unwrap();
        prop_assert_eq!(same.values(), phi.values());
    }

    #[test]
    fn pairing_is_bilinear(
        a in 0.0f64..4.0, b in 0.0f64..4.0, m in 0usize..=3, k in 0usize..=3,
        x in -2.0f64..2.0, y in -2.0f64..2.0,
    ) {
        let g = fine();
        let phi = sample_real(bump(3.0, 2.0), &g).unwrap();
        let psi = sample_real(|t| (-t).exp(), &g).unwrap();
        let f = delta_at(a, m).unwrap();
        let h = Distribution::from_density(sample_real(|t| t * (-t).exp(), &g).unwrap()).add(&delta_at(b, k).unwrap()).unwrap();
        let combo = f.scale(c(x, 0.0)).add(&h.scale(c(0.0, y))).unwrap();
        // Derivative atoms amplify rounding by about h^-order.
        let cond = g.spacing().unwrap().powi(-(m.max(k) as i32));
        let lhs = pair(&combo, &phi).unwrap();
        let rhs = pair(&f, &phi).unwrap() * x + pair(&h, &phi).unwrap() * c(0.0, y);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * cond * (1.0 + rhs.norm()));
        let sum = phi.axpy(c(x, 0.0), &psi).unwrap();
        let lhs = pair(&h, &sum).unwrap();
        let rhs = pair(&h, &phi).unwrap() + pair(&h, &psi).unwrap() * x;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * cond * (1.0 + rhs.norm()));
    }

    #[test]
    fn atom_convolution_adds_locations_and_orders(
        a in 0.0f64..5.0, b in 0.0f64..5.0, m in 0usize..=3, k in 0usize..=3, w in -3.0f64..3.0,
    ) {
        prop_assume!(m + k <= 3);
        let f = delta_at(a, m).unwrap().scale(c(w, 1.0));
        let g = delta_at(b, k).unwrap();
        let h = convolve(&f, &g).unwrap();
        prop_assert_eq!(h.atoms().len(), 1);
        let atom = h.atoms()[0];
        prop_assert!((atom.location - (a + b)).abs() < 1e-12);
        prop_assert_eq!(atom.order, m + k);
        prop_assert_eq!(atom.weight, c(w, 1.0));
        prop_assert_eq!(convolve(&f, &Distribution::unit()).unwrap(), f);
    }

    #[test]
    fn cross_correlation_is_a_homomorphism_on_dyadic_atoms(
        i in 0u32..32, j in 0u32..32, u in -2.0f64..2.0, v in -2.0f64..2.0,
    ) {
        let g = dyadic();
        let phi = sample_real(bump(4.0, 1.0), &g).unwrap();
        let f = delta_at(i as f64 / 16.0, 0).unwrap().scale(c(u, 0.0)).add(&delta_at(0.5, 0).unwrap()).unwrap();
        let h = delta_at(j as f64 / 16.0, 0).unwrap().scale(c(0.0, v));
        let lhs = cross_correlate(&convolve(&f, &h).unwrap(), &phi).unwrap();
        let rhs = cross_correlate(&f, &cross_correlate(&h, &phi).unwrap()).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn boxtimes_commutes(a in 0.0f64..3.0, b in 0.0f64..3.0, m in 0usize..=1, k in 0usize..=1, x in -2.0f64..2.0) {
        let f = power_dist(&delta_at(a, m).unwrap().scale(c(x, 0.5)), 3);
        let h = power_dist(&delta_at(b, k).unwrap(), 3);
        let fh = boxtimes(&f, &h).unwrap();
        let hf = boxtimes(&h, &f).unwrap();
        prop_assert!(fh.distance(&hf).unwrap() < 1e-12);
    }

    #[test]
    fn poly_test_eval_is_symmetric(
        t in prop::array::uniform3(0.0f64..10.0), c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, r in 0.2f64..2.0,
    ) {
        let g = fine();
        let a = sample_real(|s| (-r * s).exp(), &g).unwrap();
        let b = sample_real(bump(2.0, 1.0), &g).unwrap();
        let e = sample_real(|s| s * (-s).exp(), &g).unwrap();
        let mut p = PolyTest::zero(3);
        p.push_term(c(c1, 0.0), vec![a.clone(), b.clone()]).unwrap();
        p.push_term(c(0.0, c2), vec![a, b, e]).unwrap();
        let [x, y, z] = t;
        prop_assert!((p.eval(&[x, y]) - p.eval(&[y, x])).norm() < 1e-12);
        let base = p.eval(&[x, y, z]);
        for perm in [[y, x, z], [z, y, x], [x, z, y], [y, z, x], [z, x, y]] {
            prop_assert!((p.eval(&perm) - base).norm() < 1e-12);
        }
    }

    #[test]
    fn calculus_preserves_symmetry(rate in 0.5f64..3.0, s in 0.5f64..2.0, tilt in -1.0f64..1.0) {
        let layout = FockLayout::new(12.0, vec![32, 16]).unwrap();
        let y = state(&layout, s, tilt);
        let grid = build_grid(512, 30.0, QuadratureRule::Gregory).unwrap();
        let p = polycalc::fock::power_test(&sample_real(|t| (-rate * t).exp(), &grid).unwrap(), 2);
        let out = calculus_apply(&p, &GeneratorSystem::gaussian(2), &y).unwrap();
        prop_assert!(y.symmetry_error() < 1e-14);
        prop_assert!(out.symmetry_error() < 1e-12 * out.norm());
    }

    #[test]
    fn gaussian_semigroup_conserves_norm(t in 0.0f64..0.5, u in 0.0f64..0.5, s in 0.5f64..2.0, tilt in -1.0f64..1.0) {
        let layout = FockLayout::new(12.0, vec![128, 32]).unwrap();
        let y = state(&layout, s, tilt);
        let y1 = gaussian_apply(&[t, u], &y).unwrap();
        prop_assert!((y1.norm() - y.norm()).abs() <= 1e-12 * y.norm());
        prop_assert_eq!(y1.y0(), y.y0());
    }

    #[test]
    fn laplace_of_exponential(rate in 0.3f64..3.0, re in 0.05f64..3.0, im in -2.0f64..2.0) {
        let g = build_grid(2048, 60.0, QuadratureRule::Gregory).unwrap();
        let phi = sample_real(|t| (-rate * t).exp(), &g).unwrap();
        let lambda = c(re, im);
        let got = laplace_fn(&phi, lambda).unwrap();
        let exact = (lambda + rate).inv();
        prop_assert!((got - exact).norm() <= 1e-7 * exact.norm(), "{} vs {}", got, exact);
    }

    #[test]
    fn config_round_trips_through_json(
        n in 64usize..4096, t_max in 10.0f64..80.0, degree in 1usize..=3, half in 4.0f64..20.0,
        tol in prop::option::of(1e-12f64..1e-2),
    ) {
        let mut cfg = SuiteConfig::default();
        cfg.grid.n_points = n;
        cfg.grid.t_max = t_max;
        cfg.max_degree = degree;
        cfg.space.half_width = half;
        if let Some(tol) = tol {
            cfg.tolerances.insert("fourier".into(), tol);
        }
        let text = serde_json::to_string(&cfg).unwrap();
        let back = SuiteConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
        let mut moved = cfg.clone();
        moved.output_dir = Some("elsewhere".into());
        prop_assert_eq!(moved.hash(), cfg.hash());
        moved.grid.n_points += 1;
        prop_assert_ne!(moved.hash(), cfg.hash());
    }
}
