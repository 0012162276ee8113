//! The Gaussian semigroup example: `A_{n,j} = d^2/dxi_j^2` on every component.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{power_test, PolyTest};
use crate::halfline::{build_grid, sample_real};
use crate::io::{header, write_json, write_rows};
use crate::opcalc::{calculus_apply, gaussian_apply, propagated_gaussian, FockLayout, FockState, GeneratorSystem};
use crate::Complex64;

use super::config::SuiteConfig;

/// Largest relative deviation of the norm along the raw semigroup.
pub const NORM_TOL: f64 = 1e-10;
/// Relative sup error of the calculus against the images-sum oracle.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DemoSummary {
    pub config_hash: String,
    pub times: Vec<f64>,
    pub rate: f64,
    pub variance: f64,
    pub norm_max_rel_deviation: f64,
    pub oracle_max_rel_error: f64,
    pub scalar_only_error: f64,
    pub passed: bool,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `sum_m G(t, xi + 2 L m)`: the propagated Gaussian on the periodic box.
fn periodized(variance: f64, t: f64, xi: f64, half_width: f64) -> Complex64 {
    let mut acc = propagated_gaussian(variance, t, xi);
    let peak = acc.norm().max(propagated_gaussian(variance, t, 0.0).norm());
    let mut m = 1;
    loop {
        let a = propagated_gaussian(variance, t, xi + 2.0 * half_width * m as f64);
        let b = propagated_gaussian(variance, t, xi - 2.0 * half_width * m as f64);
        acc += a + b;
        if a.norm().max(b.norm()) <= 1e-18 * peak {
            return acc;
        }
        m += 1;
    }
}

/// Runs the demo and writes its artifacts into `out`.
///
/// `slices_n{1,2}.csv` hold `|e^{-itD^2} y_n|` at each demo time, `norm_trace.csv`
/// the norm along those slices, `calculus_n{1,2}.csv` the state `p(A) y` for
/// `p = P(e^{-a t})`.
pub fn run_gaussian_demo(cfg: &SuiteConfig, out: &Path) -> Result<DemoSummary> {
    cfg.validate()?;
    if cfg.max_degree < 2 {
        return Err(Error::Configuration("the Gaussian demo needs max_degree >= 2".into()));
    }
    let d = &cfg.demo;
    let layout = FockLayout::new(cfg.space.half_width, cfg.space.nodes_per_axis[..2].to_vec())?;
    let s = d.variance;
    let y = FockState::from_fn(&layout, c(1.0), |_, xi| c(xi.iter().map(|x| (-x * x / (2.0 * s)).exp()).product()));
    let base = y.norm();

    let mut slices = [Vec::new(), Vec::new()];
    let mut trace = Vec::new();
    let mut norm_dev: f64 = 0.0;
    for &t in &d.times {
        let y1 = gaussian_apply(&[t], &y)?;
        let y2 = gaussian_apply(&[t, t], &y1)?;
        let dev = (y2.norm() - base).abs() / base;
        norm_dev = norm_dev.max(dev);
        trace.push(vec![t, y2.norm(), dev]);
        for (n, rows) in slices.iter_mut().enumerate() {
            let degree = n + 1;
            let xs = layout.coords(degree);
            let m = xs.len();
            for (idx, v) in y2.component(degree).iter().enumerate() {
                let mut row = vec![t];
                for axis in 0..degree {
                    row.push(xs[(idx / m.pow((degree - 1 - axis) as u32)) % m]);
                }
                row.push(v.norm());
                rows.push(row);
            }
        }
    }

    let grid = build_grid(cfg.grid.n_points, cfg.grid.t_max, cfg.grid.rule)?;
    let chi = sample_real(|t| (-d.rate * t).exp(), &grid)?;
    let p = power_test(&chi, 2);
    let sys = GeneratorSystem::gaussian(2);
    let result = calculus_apply(&p, &sys, &y)?;

    // Degree-one part against the brute-force time quadrature of periodized closed forms.
    let p1 = power_test(&chi, 1).with_max_degree(2);
    let got = calculus_apply(&p1, &sys, &y)?;
    let xs = layout.coords(1);
    let (ts, ws) = (grid.nodes(), grid.weights());
    let mut oracle_err: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let initial = p1.scalar_part() * (-x * x / (2.0 * s)).exp();
        let exact: Complex64 = initial + ts
            .iter()
            .zip(ws)
            .zip(chi.values())
            .map(|((&t, &w), v)| v * w * periodized(s, t, x, layout.half_width()))
            .sum::<Complex64>();
        oracle_err = oracle_err.max((got.component(1)[k] - exact).norm());
        peak = peak.max(exact.norm());
    }
    let oracle_rel = oracle_err / peak;

    let scalar = PolyTest::scalar(Complex64::new(0.5, -1.5), 2);
    let scalar_err = calculus_apply(&scalar, &sys, &y)?.distance(&y.scale(scalar.scalar_part()))?;

    std::fs::create_dir_all(out)?;
    write_rows(&out.join("slices_n1.csv"), &header(&["t", "xi", "abs"]), slices[0].drain(..))?;
    write_rows(&out.join("slices_n2.csv"), &header(&["t", "xi1", "xi2", "abs"]), slices[1].drain(..))?;
    write_rows(&out.join("norm_trace.csv"), &header(&["t", "norm", "rel_deviation"]), trace.into_iter())?;
    for degree in 1..=2 {
        let xs = layout.coords(degree);
        let m = xs.len();
        let rows = result.component(degree).iter().enumerate().map(|(idx, v)| {
            let mut row: Vec<f64> =
                (0..degree).map(|axis| xs[(idx / m.pow((degree - 1 - axis) as u32)) % m]).collect();
            row.extend([v.re, v.im, v.norm()]);
            row
        });
        let cols: &[&str] = if degree == 1 { &["xi", "re", "im", "abs"] } else { &["xi1", "xi2", "re", "im", "abs"] };
        write_rows(&out.join(format!("calculus_n{degree}.csv")), &header(cols), rows)?;
    }
    let summary = DemoSummary {
        config_hash: cfg.hash(),
        times: d.times.clone(),
        rate: d.rate,
        variance: s,
        norm_max_rel_deviation: norm_dev,
        oracle_max_rel_error: oracle_rel,
        scalar_only_error: scalar_err,
        passed: norm_dev <= NORM_TOL && oracle_rel <= ORACLE_TOL && scalar_err == 0.0,
    };
    write_json(&out.join("demo_summary.json"), &summary)?;
    Ok(summary)
}
