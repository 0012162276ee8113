use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::Result;
use crate::opcalc::FockLayout;

use super::checks::{self, Ctx};
use super::config::{CorpusSelection, SuiteConfig};
use super::corpus::Corpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Pass iff observed <= tolerance.
    Le,
    /// Pass iff observed >= tolerance.
    Ge,
}

impl Comparison {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
        }
    }
}

type CheckFn = fn(&Ctx, CorpusSelection) -> Result<f64>;

pub struct CheckSpec {
    pub name: &'static str,
    pub group: &'static str,
    pub anchor: &'static str,
    pub default_tol: f64,
    pub comparison: Comparison,
    pub needs_densities: bool,
    run: CheckFn,
}

macro_rules! check {
    ($name:expr, $group:expr, $anchor:expr, $tol:expr, $cmp:ident, $dens:expr, $f:path) => {
        CheckSpec {
            name: $name,
            group: $group,
            anchor: $anchor,
            default_tol: $tol,
            comparison: Comparison::$cmp,
            needs_densities: $dens,
            run: |cx, _| $f(cx),
        }
    };
}

/// Every check of the suite, in report order.
pub static CHECKS: &[CheckSpec] = &[
    check!("unit.delta_star_phi", "unit", "unit delta acts as identity", 1e-12, Le, false, checks::delta_star_phi),
    check!("unit.boxtimes_atoms", "unit", "unit of the graded algebra", 1e-12, Le, false, checks::boxtimes_atoms),
    check!("unit.boxtimes_densities", "unit", "unit of the graded algebra", 1e-8, Le, true, checks::boxtimes_densities),
    check!("unit.phi_identity", "unit", "Phi of the unit is the identity", 1e-12, Le, false, checks::phi_identity),
    check!("homomorphism.one_dim_atoms", "homomorphism", "(f*g)*phi = f*(g*phi)", 1e-6, Le, false, checks::homomorphism_1d_atoms),
    check!("homomorphism.one_dim_densities", "homomorphism", "(f*g)*phi = f*(g*phi)", 1e-6, Le, true, checks::homomorphism_1d_densities),
    check!("homomorphism.poly_atoms", "homomorphism", "K of F*G = K_F K_G", 1e-6, Le, false, checks::homomorphism_poly_atoms),
    check!("homomorphism.poly_densities", "homomorphism", "K of F*G = K_F K_G", 1e-6, Le, true, checks::homomorphism_poly_densities),
    check!("commutant.one_dim", "commutant", "K_f commutes with T_s", 1e-6, Le, false, checks::commutant_1d),
    check!("commutant.poly", "commutant", "K_F commutes with tensor shifts", 1e-6, Le, false, checks::commutant_poly),
    check!("reconstruction.one_dim", "reconstruction", "<h, phi> = (K phi)(0)", 1e-6, Le, false, checks::reconstruction_1d),
    check!("reconstruction.poly", "reconstruction", "<F, p> = (F*p)(0)", 1e-6, Le, false, checks::reconstruction_poly),
    check!("differential.one_dim", "differential", "(Df)*phi + f*(D phi) = 0", 1e-4, Le, false, checks::differential_1d),
    check!("differential.poly", "differential", "(DF)*p + F*(Dp) = 0", 1e-4, Le, false, checks::differential_poly),
    check!("differential.phi", "differential", "Phi_DF + Phi_F D = 0", 1e-4, Le, false, checks::differential_phi),
    CheckSpec {
        name: "differential.halving_order",
        group: "differential",
        anchor: "stencil-limited: |log2 ratio - 4| under h -> h/2",
        default_tol: 0.5,
        comparison: Comparison::Le,
        needs_densities: false,
        run: checks::differential_order,
    },
    check!("fourier.convolution_theorem", "fourier", "F(f*g) = Ff Fg", 1e-4, Le, true, checks::convolution_theorem),
    check!("fourier.duality", "fourier", "<F'f, F phi> = 2 pi <f, phi>", 1e-4, Le, false, checks::duality),
    check!("fourier.exp_analytic", "fourier", "F e^{-t} = 1/(1 + i xi), |xi| <= 8", 1e-6, Le, false, checks::exp_analytic),
    check!("fourier.conjugate_symmetry", "fourier", "F phi(-xi) = conj F phi(xi)", 1e-10, Le, false, checks::conjugate_symmetry),
    check!("laplace.analytic", "laplace", "Laplace transform closed forms", 1e-8, Le, false, checks::laplace_analytic),
    check!("laplace.factorization", "laplace", "rank-one vs tensor quadrature", 1e-7, Le, false, checks::laplace_factorization),
    check!("laplace.injectivity", "laplace", "Laplace transform separates the corpus", 1e-6, Ge, false, checks::laplace_injectivity),
    check!("opcalc.scalar_laplace", "opcalc", "p(A) y for scalar A is Laplace of p", 1e-8, Le, false, checks::scalar_laplace),
    check!("opcalc.phi_homomorphism", "opcalc", "Phi_{F*G} = Phi_F Phi_G", 1e-6, Le, false, checks::phi_homomorphism),
    check!("opcalc.phi_commutant", "opcalc", "Phi_F commutes with operator shifts", 1e-6, Le, false, checks::phi_commutant),
    check!("opcalc.tensor_quadrature", "opcalc", "marginal factorization, n = 2", 1e-6, Le, false, checks::tensor_quadrature),
    check!("gaussian.closed_form", "gaussian", "complex-variance Gaussian propagation", 1e-6, Le, false, checks::gaussian_closed_form),
    check!("gaussian.semigroup_law", "gaussian", "T(s)T(t) = T(s + t), axes commute", 1e-10, Le, false, checks::gaussian_semigroup_law),
    check!("gaussian.norm_conservation", "gaussian", "unitary Gaussian semigroup", 1e-10, Le, false, checks::gaussian_norm),
    check!("gaussian.contraction", "gaussian", "||e^{-itA} v|| <= ||v||", 1.0 + 1e-10, Le, false, checks::gaussian_contraction),
];

/// Check names and group names accepted as tolerance override keys.
pub fn known_names() -> Vec<String> {
    let mut out: Vec<String> = CHECKS.iter().map(|c| c.name.to_string()).collect();
    for c in CHECKS {
        if !out.iter().any(|n| n == c.group) {
            out.push(c.group.to_string());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
    /// The check could not be evaluated; counts as a failure.
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TolSource {
    Default,
    Group,
    Check,
}

impl TolSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TolSource::Default => "default",
            TolSource::Group => "override:group",
            TolSource::Check => "override:check",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub group: &'static str,
    pub anchor: &'static str,
    pub observed: Option<f64>,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub tolerance_source: TolSource,
    pub status: Status,
    pub detail: String,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub config_hash: String,
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn count(&self, status: Status) -> usize {
        self.results.iter().filter(|r| r.status == status).count()
    }

    /// True iff no executed check failed or errored.
    pub fn all_passed(&self) -> bool {
        self.count(Status::Fail) == 0 && self.count(Status::Error) == 0
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn group(&self, group: &str) -> impl Iterator<Item = &CheckResult> {
        let group = group.to_string();
        self.results.iter().filter(move |r| r.group == group)
    }
}

fn tolerance_for(cfg: &SuiteConfig, spec: &CheckSpec) -> (f64, TolSource) {
    if let Some(&t) = cfg.tolerances.get(spec.name) {
        (t, TolSource::Check)
    } else if let Some(&t) = cfg.tolerances.get(spec.group) {
        (t, TolSource::Group)
    } else {
        (spec.default_tol, TolSource::Default)
    }
}

/// Runs every check once. Checks run in parallel; results keep table order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let corpus = Corpus::build(cfg.grid.n_points, cfg.grid.t_max, cfg.grid.rule, cfg.corpus)?;
    let layout = FockLayout::new(cfg.space.half_width, cfg.nodes_per_axis())?;
    let cx = Ctx { corpus, max_degree: cfg.max_degree, layout };
    let results = CHECKS.par_iter().map(|spec| run_one(cfg, &cx, spec)).collect();
    Ok(SuiteReport { config_hash: cfg.hash(), results })
}

fn run_one(cfg: &SuiteConfig, cx: &Ctx, spec: &CheckSpec) -> CheckResult {
    let (tolerance, tolerance_source) = tolerance_for(cfg, spec);
    let mut out = CheckResult {
        name: spec.name,
        group: spec.group,
        anchor: spec.anchor,
        observed: None,
        comparison: spec.comparison,
        tolerance,
        tolerance_source,
        status: Status::Skip,
        detail: String::new(),
        wall_time: Duration::ZERO,
    };
    if spec.needs_densities && cfg.corpus == CorpusSelection::AtomsOnly {
        out.detail = "corpus has no densities".into();
        return out;
    }
    let start = Instant::now();
    let value = (spec.run)(cx, cfg.corpus);
    out.wall_time = start.elapsed();
    match value {
        Ok(v) => {
            out.observed = Some(v);
            let ok = match spec.comparison {
                Comparison::Le => v <= tolerance,
                Comparison::Ge => v >= tolerance,
            };
            out.status = if ok { Status::Pass } else { Status::Fail };
        }
        Err(e) => {
            out.status = Status::Error;
            out.detail = e.to_string();
        }
    }
    out
}
