//! `polycalc calc`: evaluates `Phi_F (T~_s p)(A) y` for a configured quadruple.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{poly_shift, power_dist, power_test, PolyTest};
use crate::io::{read_distribution, read_fock_state, read_poly_test, write_fock_state, write_json};
use crate::opcalc::{phi_apply, FockLayout, FockState, Generator1D, GeneratorSystem};
use crate::Complex64;

use super::config::{DistSpec, PolySpec, StateSpec, SuiteConfig, SystemSpec};
use super::corpus::Corpus;

#[derive(Debug, Clone, Serialize)]
pub struct CalcSummary {
    pub config_hash: String,
    pub y0: [f64; 2],
    /// Discrete L2 norm of each component `y_1, ..., y_N`.
    pub component_norms: Vec<f64>,
    pub norm: f64,
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::Configuration(format!("unknown corpus {kind} '{name}'"))
}

pub fn run_calc(cfg: &SuiteConfig) -> Result<(FockState, CalcSummary)> {
    cfg.validate()?;
    let n = cfg.max_degree;
    let corpus = Corpus::build(cfg.grid.n_points, cfg.grid.t_max, cfg.grid.rule, cfg.corpus)?;
    let calc = &cfg.calc;
    let f = match &calc.f {
        DistSpec::Named(name) => corpus.distribution(name).ok_or_else(|| unknown("distribution", name))?.f.clone(),
        DistSpec::File { file } => read_distribution(file)?,
    };
    let p: PolyTest = match &calc.p {
        PolySpec::Power { phi } => power_test(&corpus.function(phi).ok_or_else(|| unknown("function", phi))?.phi, n),
        PolySpec::File { file } => read_poly_test(file)?,
    };
    let system = match &calc.system {
        SystemSpec::Gaussian => GeneratorSystem::gaussian(n),
        SystemSpec::Scalar(list) => GeneratorSystem::from_flat(
            list.iter().map(|&[re, im]| Generator1D::Scalar(Complex64::new(re, im))).collect(),
        )?,
    };
    let y = match &calc.state {
        StateSpec::Gaussian { variance, y0 } => {
            let layout = FockLayout::new(cfg.space.half_width, cfg.nodes_per_axis())?;
            FockState::from_fn(&layout, Complex64::new(*y0, 0.0), |_, xi| {
                Complex64::new(xi.iter().map(|x| (-x * x / (2.0 * variance)).exp()).product(), 0.0)
            })
        }
        StateSpec::File { file } => read_fock_state(file)?,
    };
    let p = if calc.shift > 0.0 { poly_shift(&p, calc.shift)? } else { p };
    let out = phi_apply(&power_dist(&f, n), &p, &system, &y)?;
    let layout = out.layout().clone();
    let component_norms = (1..=layout.max_degree())
        .map(|k| {
            let dv = layout.spacing(k).powi(k as i32);
            (out.component(k).iter().map(|v| v.norm_sqr()).sum::<f64>() * dv).sqrt()
        })
        .collect();
    let summary = CalcSummary {
        config_hash: cfg.hash(),
        y0: [out.y0().re, out.y0().im],
        component_norms,
        norm: out.norm(),
    };
    Ok((out, summary))
}

/// Writes `state.json` (with its component CSVs) and `calc_summary.json`.
pub fn write_calc(out: &Path, state: &FockState, summary: &CalcSummary) -> Result<()> {
    std::fs::create_dir_all(out)?;
    write_fock_state(&out.join("state.json"), state)?;
    write_json(&out.join("calc_summary.json"), summary)
}
