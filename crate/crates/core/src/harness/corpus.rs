//! The fixed test corpus: four test functions, five distributions, three shifts.

use std::sync::Arc;

use crate::distributions::{delta_at, Distribution};
use crate::error::Result;
use crate::halfline::{build_grid, sample_real, DecayTag, Grid, QuadratureRule, TestFn};
use crate::Complex64;

use super::config::CorpusSelection;

pub const SHIFTS: [f64; 3] = [0.0, 0.3, 1.0];

/// A named test function with its exponential-family parameter, if any
/// (`t^k e^{-t}` has `Some(k)`), used for closed-form Laplace values.
#[derive(Debug, Clone)]
pub struct NamedFn {
    pub name: &'static str,
    pub phi: TestFn,
    pub power: Option<u32>,
}

impl NamedFn {
    /// `int_0^inf t^k e^{-t} e^{-lambda t} dt = k! / (1 + lambda)^{k+1}`.
    pub fn laplace_exact(&self, lambda: Complex64) -> Option<Complex64> {
        let k = self.power?;
        let fact: f64 = (1..=k).map(f64::from).product();
        Some(Complex64::new(fact, 0.0) / (lambda + 1.0).powu(k + 1))
    }
}

#[derive(Debug, Clone)]
pub struct NamedDist {
    pub name: &'static str,
    pub f: Distribution,
    /// False when the distribution has a density.
    pub atomic: bool,
    /// False for densities not vanishing at 0, whose derivative carries a boundary atom.
    pub boundary_safe: bool,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub grid: Arc<Grid>,
    pub fns: Vec<NamedFn>,
    pub dists: Vec<NamedDist>,
}

impl Corpus {
    pub fn build(n_points: usize, t_max: f64, rule: QuadratureRule, selection: CorpusSelection) -> Result<Corpus> {
        let grid = build_grid(n_points, t_max, rule)?;
        let exp = |k: i32| move |t: f64| t.powi(k) * (-t).exp();
        let fns = vec![
            NamedFn {
                name: "exp",
                phi: sample_real(exp(0), &grid)?.with_decay_tag(DecayTag::Exponential),
                power: Some(0),
            },
            NamedFn {
                name: "t_exp",
                phi: sample_real(exp(1), &grid)?.with_decay_tag(DecayTag::Exponential),
                power: Some(1),
            },
            NamedFn {
                name: "t2_exp",
                phi: sample_real(exp(2), &grid)?.with_decay_tag(DecayTag::Exponential),
                power: Some(2),
            },
            NamedFn {
                name: "gauss",
                phi: sample_real(|t| (-t * t).exp(), &grid)?.with_decay_tag(DecayTag::Gaussian),
                power: None,
            },
        ];
        let mut dists = vec![
            NamedDist { name: "delta", f: Distribution::unit(), atomic: true, boundary_safe: true },
            NamedDist { name: "delta_1", f: delta_at(1.0, 0)?, atomic: true, boundary_safe: true },
            NamedDist { name: "delta_prime", f: delta_at(0.0, 1)?, atomic: true, boundary_safe: true },
        ];
        if selection == CorpusSelection::Standard {
            dists.push(NamedDist {
                name: "dens_exp",
                f: Distribution::from_density(sample_real(exp(0), &grid)?),
                atomic: false,
                boundary_safe: false,
            });
            dists.push(NamedDist {
                name: "dens_t_exp",
                f: Distribution::from_density(sample_real(exp(1), &grid)?),
                atomic: false,
                boundary_safe: true,
            });
        }
        Ok(Corpus { grid, fns, dists })
    }

    pub fn function(&self, name: &str) -> Option<&NamedFn> {
        self.fns.iter().find(|f| f.name == name)
    }

    pub fn distribution(&self, name: &str) -> Option<&NamedDist> {
        self.dists.iter().find(|f| f.name == name)
    }

    /// `(name, phi)` pairs, the probe set for symbol reconstruction.
    pub fn probes(&self) -> Vec<(String, TestFn)> {
        self.fns.iter().map(|f| (f.name.to_string(), f.phi.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selections() {
        let std = Corpus::build(256, 40.0, QuadratureRule::Gregory, CorpusSelection::Standard).unwrap();
        assert_eq!(std.fns.len(), 4);
        assert_eq!(std.dists.len(), 5);
        let atoms = Corpus::build(256, 40.0, QuadratureRule::Gregory, CorpusSelection::AtomsOnly).unwrap();
        assert!(atoms.dists.iter().all(|d| d.atomic));
        assert!(atoms.distribution("dens_exp").is_none());
    }

    #[test]
    fn laplace_closed_form() {
        let c = Corpus::build(256, 40.0, QuadratureRule::Gregory, CorpusSelection::Standard).unwrap();
        let l = c.function("t_exp").unwrap().laplace_exact(Complex64::new(1.0, 0.0)).unwrap();
        assert!((l.re - 0.25).abs() < 1e-15);
        assert!(c.function("gauss").unwrap().laplace_exact(Complex64::new(1.0, 0.0)).is_none());
    }
}
