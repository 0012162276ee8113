use polycalc::distributions::{delta_at, Atom, Density, Distribution};
use polycalc::fock::{power_dist, power_test, poly_d_dist, PolyTest};
use polycalc::halfline::{build_grid, sample_real, QuadratureRule};
use polycalc::io::*;
use polycalc::opcalc::{probe_states, FockLayout};
use polycalc::transforms::{fourier_fn, FreqGrid};
use polycalc::{Complex64, Error};

#[test]
fn test_fn_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    for rule in [QuadratureRule::Gregory, QuadratureRule::Trapezoid, QuadratureRule::GaussLaguerreMapped] {
        let g = build_grid(64, 10.0, rule).unwrap();
        let phi = sample_real(|t| (1.0 / 3.0 + t).sin() * (-t).exp(), &g).unwrap().scale(Complex64::new(0.7, -0.1));
        let path = dir.path().join(format!("phi_{rule}.csv"));
        write_test_fn(&path, &phi).unwrap();
        let back = read_test_fn(&path).unwrap();
        assert_eq!(back.values(), phi.values());
        assert!(back.grid().same_as(phi.grid()));
        assert_eq!(back.grid().rule(), rule);
    }
}

#[test]
fn freq_fn_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = build_grid(256, 20.0, QuadratureRule::Gregory).unwrap();
    let hat = fourier_fn(&sample_real(|t| (-t).exp(), &g).unwrap(), &FreqGrid::new(4.0, 65).unwrap()).unwrap();
    let path = dir.path().join("hat.csv");
    write_freq_fn(&path, &hat).unwrap();
    let back = read_freq_fn(&path).unwrap();
    assert_eq!(back.values(), hat.values());
    assert_eq!(back.grid().nodes(), hat.grid().nodes());
}

#[test]
fn distribution_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = build_grid(128, 20.0, QuadratureRule::Gregory).unwrap();
    let atoms_only = delta_at(0.5, 2).unwrap().add(&delta_at(1.25, 0).unwrap().scale(Complex64::new(0.0, 2.0))).unwrap();
    let one_density = Distribution::from_density(sample_real(|t| t * (-t).exp(), &g).unwrap());
    let shifted = Distribution::from_parts(
        vec![Atom { location: 0.1, order: 1, weight: Complex64::new(-1.0, 0.5) }],
        vec![
            Density { offset: 0.0, profile: sample_real(|t| (-t).exp(), &g).unwrap() },
            Density { offset: 2.0, profile: sample_real(|t| t * t * (-t).exp(), &g).unwrap() },
        ],
    )
    .unwrap();
    for (i, f) in [atoms_only, one_density, shifted, Distribution::zero()].iter().enumerate() {
        let path = dir.path().join(format!("f{i}.json"));
        write_distribution(&path, f).unwrap();
        assert_eq!(&read_distribution(&path).unwrap(), f, "case {i}");
    }
}

#[test]
fn poly_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let g = build_grid(128, 20.0, QuadratureRule::Gregory).unwrap();
    let a = sample_real(|t| (-t).exp(), &g).unwrap();
    let b = sample_real(|t| (-t * t).exp(), &g).unwrap();
    let mut p = power_test(&a, 3);
    p.push_term(Complex64::new(0.25, -1.0), vec![a.clone(), b.clone(), b.clone()]).unwrap();
    let path = dir.path().join("p.json");
    write_poly_test(&path, &p).unwrap();
    let back: PolyTest = read_poly_test(&path).unwrap();
    assert_eq!(back.sup_distance(&p).unwrap(), 0.0);
    assert_eq!(back.term_count(), p.term_count());

    let rho = Distribution::from_density(sample_real(|t| t * (-t).exp(), &g).unwrap());
    let f = power_dist(&rho, 2).add(&power_dist(&delta_at(1.0, 0).unwrap(), 2));
    let general = poly_d_dist(&power_dist(&delta_at(0.5, 0).unwrap(), 3)).unwrap();
    for (i, f) in [f, general].iter().enumerate() {
        let path = dir.path().join(format!("F{i}.json"));
        write_poly_dist(&path, f).unwrap();
        let back = read_poly_dist(&path).unwrap();
        assert_eq!(back.distance(f).unwrap(), 0.0, "case {i}");
        assert_eq!(back.content_hash(), f.content_hash());
    }
}

#[test]
fn fock_state_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let layout = FockLayout::new(6.0, vec![32, 8, 4]).unwrap();
    for (i, y) in probe_states(&layout).iter().enumerate() {
        let path = dir.path().join(format!("y{i}.json"));
        write_fock_state(&path, y).unwrap();
        assert_eq!(&read_fock_state(&path).unwrap(), y);
    }
    let header = std::fs::read_to_string(dir.path().join("y0.y2.csv")).unwrap();
    assert!(header.starts_with("xi1,xi2,re,im"));
}

#[test]
fn malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"atoms": [{"a": -1.0, "m": 0, "re": 1.0, "im": 0.0}], "density": null, "truncated_mass": 0.0}"#)
        .unwrap();
    assert!(read_distribution(&path).is_err());
    std::fs::write(&path, r#"{"atoms": [], "density": null, "truncated_mass": 0.0, "extra": 1}"#).unwrap();
    assert!(matches!(read_distribution(&path), Err(Error::Format { .. })));
    let csv = dir.path().join("phi.csv");
    std::fs::write(&csv, "t,re,im\n0,1,0\n").unwrap();
    assert!(read_test_fn(&csv).is_err());
    assert!(read_fock_state(&dir.path().join("missing.json")).is_err());
}
