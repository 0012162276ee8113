//! Check bodies. Each returns the observed quantity compared against its tolerance.

use std::sync::Arc;

use crate::distributions::{convolve, cross_correlate, distr_derivative, pair, reconstruct_symbol, Distribution};
use crate::error::{Error, Result};
use crate::fock::{
    boxtimes, cross_corr_poly, poly_d_dist, poly_d_test, poly_pair, poly_shift, power_dist, power_test, PolyDist,
    PolyTest,
};
use crate::halfline::{diff_fn, shift_fn, TestFn};
use crate::opcalc::{
    calculus_apply, contraction_report, gaussian_apply, opshift_apply, phi_apply, probe_states,
    propagated_gaussian, FockLayout, FockState, GeneratorSystem,
};
use crate::transforms::{fourier_at, fourier_fn, fourier_pair_check, laplace_eval, laplace_fn, laplace_probes, FreqGrid};
use crate::Complex64;

use super::corpus::{Corpus, NamedDist, SHIFTS};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Shared inputs of a suite run.
pub struct Ctx {
    pub corpus: Corpus,
    pub max_degree: usize,
    pub layout: Arc<FockLayout>,
}

impl Ctx {
    fn atoms(&self) -> impl Iterator<Item = &NamedDist> {
        self.corpus.dists.iter().filter(|d| d.atomic)
    }

    fn phi(&self, name: &str) -> &TestFn {
        &self.corpus.function(name).expect("corpus function").phi
    }

    /// `0.5 + P(t e^{-t})` plus one mixed term per degree above one.
    pub fn mixed_poly(&self) -> Result<PolyTest> {
        let n = self.max_degree;
        let mut p = PolyTest::scalar(c(0.5), n).add(&power_test(self.phi("t_exp"), n))?;
        if n >= 2 {
            p.push_term(c(-1.0), vec![self.phi("exp").clone(), self.phi("gauss").clone()])?;
        }
        if n >= 3 {
            p.push_term(
                Complex64::new(0.0, 0.5),
                vec![self.phi("exp").clone(), self.phi("t_exp").clone(), self.phi("t2_exp").clone()],
            )?;
        }
        Ok(p)
    }

    fn operator_state(&self) -> FockState {
        FockState::from_fn(&self.layout, c(0.5), |_, xi| c(xi.iter().map(|x| (-x * x / 8.0).exp()).product()))
    }
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in values {
        let v = v?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

fn pairs<'a>(ds: &'a [NamedDist]) -> Vec<(&'a NamedDist, &'a NamedDist)> {
    ds.iter().flat_map(|f| ds.iter().map(move |g| (f, g))).collect()
}

// ---- unit laws

pub fn delta_star_phi(cx: &Ctx) -> Result<f64> {
    let unit = Distribution::unit();
    max_of(cx.corpus.fns.iter().map(|f| cross_correlate(&unit, &f.phi)?.sup_distance(&f.phi)))
}

fn boxtimes_unit(cx: &Ctx, f: &Distribution) -> Result<f64> {
    let n = cx.max_degree;
    let big = power_dist(f, n);
    let unit = PolyDist::unit(n);
    let one_dim = convolve(f, &Distribution::unit())?.distance(f)?;
    Ok(one_dim.max(boxtimes(&big, &unit)?.distance(&big)?).max(boxtimes(&unit, &big)?.distance(&big)?))
}

pub fn boxtimes_atoms(cx: &Ctx) -> Result<f64> {
    max_of(cx.atoms().map(|d| boxtimes_unit(cx, &d.f)))
}

pub fn boxtimes_densities(cx: &Ctx) -> Result<f64> {
    let unit = Distribution::unit();
    max_of(cx.corpus.dists.iter().filter(|d| !d.atomic).map(|d| {
        let k = cross_correlate(&d.f, &cx.corpus.fns[0].phi)?;
        let ku = cross_correlate(&convolve(&unit, &d.f)?, &cx.corpus.fns[0].phi)?;
        Ok(boxtimes_unit(cx, &d.f)?.max(k.sup_distance(&ku)?))
    }))
}

pub fn phi_identity(cx: &Ctx) -> Result<f64> {
    let sys = GeneratorSystem::gaussian(cx.max_degree);
    let y = cx.operator_state();
    let p = cx.mixed_poly()?;
    let id = phi_apply(&PolyDist::unit(cx.max_degree), &p, &sys, &y)?;
    Ok(id.distance(&calculus_apply(&p, &sys, &y)?)? / (1.0 + y.norm()))
}

// ---- homomorphism

fn homomorphism_1d(cx: &Ctx, densities: bool) -> Result<f64> {
    let ps = pairs(&cx.corpus.dists);
    max_of(ps.into_iter().filter(|(f, g)| (f.atomic && g.atomic) != densities).flat_map(|(f, g)| {
        cx.corpus.fns.iter().map(move |phi| {
            let lhs = cross_correlate(&convolve(&f.f, &g.f)?, &phi.phi)?;
            let rhs = cross_correlate(&f.f, &cross_correlate(&g.f, &phi.phi)?)?;
            lhs.sup_distance(&rhs)
        })
    }))
}

pub fn homomorphism_1d_atoms(cx: &Ctx) -> Result<f64> {
    homomorphism_1d(cx, false)
}

pub fn homomorphism_1d_densities(cx: &Ctx) -> Result<f64> {
    homomorphism_1d(cx, true)
}

fn homomorphism_poly(cx: &Ctx, densities: bool) -> Result<f64> {
    let n = cx.max_degree;
    let p = cx.mixed_poly()?;
    let ps = pairs(&cx.corpus.dists);
    max_of(ps.into_iter().filter(|(f, g)| (f.atomic && g.atomic) != densities).map(|(f, g)| {
        let (bf, bg) = (power_dist(&f.f, n), power_dist(&g.f, n));
        let lhs = cross_corr_poly(&boxtimes(&bf, &bg)?, &p)?;
        let rhs = cross_corr_poly(&bf, &cross_corr_poly(&bg, &p)?)?;
        lhs.sup_distance(&rhs)
    }))
}

pub fn homomorphism_poly_atoms(cx: &Ctx) -> Result<f64> {
    homomorphism_poly(cx, false)
}

pub fn homomorphism_poly_densities(cx: &Ctx) -> Result<f64> {
    homomorphism_poly(cx, true)
}

// ---- commutant

pub fn commutant_1d(cx: &Ctx) -> Result<f64> {
    max_of(cx.corpus.dists.iter().flat_map(|f| {
        cx.corpus.fns.iter().flat_map(move |phi| {
            SHIFTS.iter().map(move |&s| {
                let ab = cross_correlate(&f.f, &shift_fn(&phi.phi, s)?)?;
                let ba = shift_fn(&cross_correlate(&f.f, &phi.phi)?, s)?;
                ab.sup_distance(&ba)
            })
        })
    }))
}

pub fn commutant_poly(cx: &Ctx) -> Result<f64> {
    let p = cx.mixed_poly()?;
    max_of(cx.corpus.dists.iter().flat_map(|f| {
        let big = power_dist(&f.f, cx.max_degree);
        let p = &p;
        SHIFTS.iter().map(move |&s| {
            let ab = cross_corr_poly(&big, &poly_shift(p, s)?)?;
            let ba = poly_shift(&cross_corr_poly(&big, p)?, s)?;
            ab.sup_distance(&ba)
        })
    }))
}

// ---- reconstruction

pub fn reconstruction_1d(cx: &Ctx) -> Result<f64> {
    let probes = cx.corpus.probes();
    max_of(cx.corpus.dists.iter().map(|f| {
        let report = reconstruct_symbol(|phi| cross_correlate(&f.f, phi), &probes)?;
        let mut worst: f64 = 0.0;
        for ((_, phi), v) in probes.iter().zip(&report.values) {
            worst = worst.max((v - pair(&f.f, phi)?).norm());
        }
        Ok(worst)
    }))
}

pub fn reconstruction_poly(cx: &Ctx) -> Result<f64> {
    let p = cx.mixed_poly()?;
    max_of(cx.corpus.dists.iter().map(|f| {
        let big = power_dist(&f.f, cx.max_degree);
        let k = cross_corr_poly(&big, &p)?;
        let at_origin = k.scalar_part() + (1..=cx.max_degree).map(|n| k.eval(&vec![0.0; n])).sum::<Complex64>();
        Ok((at_origin - poly_pair(&big, &p)?).norm())
    }))
}

// ---- differential

fn differential_1d_error(corpus: &Corpus, atoms_only: bool) -> Result<f64> {
    max_of(corpus.dists.iter().filter(|d| d.boundary_safe && (d.atomic || !atoms_only)).flat_map(|f| {
        corpus.fns.iter().map(move |phi| {
            let d_side = cross_correlate(&distr_derivative(&f.f)?, &phi.phi)?;
            let p_side = cross_correlate(&f.f, &diff_fn(&phi.phi)?)?;
            Ok(d_side.axpy(ONE, &p_side)?.max_abs())
        })
    }))
}

pub fn differential_1d(cx: &Ctx) -> Result<f64> {
    differential_1d_error(&cx.corpus, false)
}

pub fn differential_poly(cx: &Ctx) -> Result<f64> {
    let p = cx.mixed_poly()?;
    let dp = poly_d_test(&p)?;
    max_of(cx.corpus.dists.iter().filter(|d| d.boundary_safe).map(|f| {
        let big = power_dist(&f.f, cx.max_degree);
        let d_side = cross_corr_poly(&poly_d_dist(&big)?, &p)?;
        let p_side = cross_corr_poly(&big, &dp)?;
        d_side.sup_distance(&p_side.scale(-ONE))
    }))
}

pub fn differential_phi(cx: &Ctx) -> Result<f64> {
    let sys = GeneratorSystem::gaussian(cx.max_degree);
    let y = cx.operator_state();
    let p = cx.mixed_poly()?;
    let dp = poly_d_test(&p)?;
    max_of(cx.corpus.dists.iter().filter(|d| d.boundary_safe).map(|f| {
        let big = power_dist(&f.f, cx.max_degree);
        let d_side = phi_apply(&poly_d_dist(&big)?, &p, &sys, &y)?;
        let p_side = phi_apply(&big, &dp, &sys, &y)?;
        Ok(d_side.axpy(ONE, &p_side)?.norm() / (1.0 + y.norm()))
    }))
}

/// `|log2(e_h / e_{h/2}) - 4|` for the atom part of the 1-D differential check.
pub fn differential_order(cx: &Ctx, selection: super::config::CorpusSelection) -> Result<f64> {
    let g = &cx.corpus.grid;
    let fine = Corpus::build(2 * g.n_points() - 1, g.t_max(), g.rule(), selection)?;
    let coarse_err = differential_1d_error(&cx.corpus, true)?;
    let fine_err = differential_1d_error(&fine, true)?;
    if fine_err == 0.0 || coarse_err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((coarse_err / fine_err).log2() - 4.0).abs())
}

// ---- Fourier

/// `F f(xi) = sum_atoms w (i xi)^m e^{-i a xi} + sum_densities e^{-i b xi} F rho(xi)`.
fn dist_fourier(f: &Distribution, xi: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in f.atoms() {
        acc += a.weight * (Complex64::i() * xi).powu(a.order as u32) * Complex64::from_polar(1.0, -a.location * xi);
    }
    for d in f.densities() {
        acc += Complex64::from_polar(1.0, -d.offset * xi) * fourier_at(&d.profile, xi);
    }
    acc
}

pub fn convolution_theorem(cx: &Ctx) -> Result<f64> {
    let grid = FreqGrid::default_grid();
    let ps = pairs(&cx.corpus.dists);
    max_of(ps.into_iter().filter(|(f, g)| !(f.atomic && g.atomic) && f.name <= g.name).map(|(f, g)| {
        let fg = convolve(&f.f, &g.f)?;
        let mut worst: f64 = 0.0;
        for &xi in grid.nodes() {
            let d = dist_fourier(&fg, xi) - dist_fourier(&f.f, xi) * dist_fourier(&g.f, xi);
            worst = worst.max(d.norm());
        }
        Ok(worst)
    }))
}

/// Relative error of the 2 pi duality, with the pairing floored at 1.
pub fn duality(cx: &Ctx) -> Result<f64> {
    let grid = FreqGrid::default_grid();
    max_of(cx.corpus.dists.iter().flat_map(|f| {
        let grid = &grid;
        cx.corpus.fns.iter().map(move |phi| {
            let (lhs, rhs) = fourier_pair_check(&f.f, &phi.phi, grid)?;
            Ok((lhs - rhs).norm() / rhs.norm().max(2.0 * std::f64::consts::PI))
        })
    }))
}

pub fn exp_analytic(cx: &Ctx) -> Result<f64> {
    let grid = FreqGrid::new(8.0, 161)?;
    let phi_hat = fourier_fn(cx.phi("exp"), &grid)?;
    let mut worst: f64 = 0.0;
    for (&xi, v) in grid.nodes().iter().zip(phi_hat.values()) {
        worst = worst.max((v - 1.0 / Complex64::new(1.0, xi)).norm());
    }
    Ok(worst)
}

pub fn conjugate_symmetry(cx: &Ctx) -> Result<f64> {
    let grid = FreqGrid::default_grid();
    max_of(cx.corpus.fns.iter().map(|f| {
        let mut worst: f64 = 0.0;
        for &xi in grid.nodes() {
            worst = worst.max((fourier_at(&f.phi, -xi) - fourier_at(&f.phi, xi).conj()).norm());
        }
        Ok(worst)
    }))
}

// ---- Laplace

pub fn laplace_analytic(cx: &Ctx) -> Result<f64> {
    let probes = laplace_probes();
    let exps: Vec<_> = cx.corpus.fns.iter().filter(|f| f.power.is_some()).collect();
    let mut worst: f64 = 0.0;
    for f in &exps {
        for &l in &probes {
            worst = worst.max((laplace_fn(&f.phi, l)? - f.laplace_exact(l).expect("exponential")).norm());
        }
    }
    // Power symbols: L(P(phi))_n(l_1..l_n) = prod_j L(phi)(l_j).
    for f in &exps {
        let p = power_test(&f.phi, cx.max_degree);
        for n in 1..=cx.max_degree {
            for start in 0..probes.len() {
                let ls: Vec<Complex64> = (0..n).map(|j| probes[(start + j) % probes.len()]).collect();
                let exact: Complex64 = ls.iter().map(|&l| f.laplace_exact(l).expect("exponential")).product();
                worst = worst.max((laplace_eval(&p, &ls)? - exact).norm());
            }
        }
    }
    Ok(worst)
}

/// Rank-one evaluation against the full tensor sum over grid nodes.
pub fn laplace_factorization(cx: &Ctx) -> Result<f64> {
    let g = &cx.corpus.grid;
    let (t, w) = (g.nodes(), g.weights());
    let (a, b) = (cx.phi("exp").values(), cx.phi("gauss").values());
    let mut p = PolyTest::zero(2);
    p.push_term(ONE, vec![cx.phi("exp").clone(), cx.phi("gauss").clone()])?;
    let probes = laplace_probes();
    let mut worst: f64 = 0.0;
    for (k, &l1) in probes.iter().enumerate() {
        let l2 = probes[(k + 1) % probes.len()];
        let e1: Vec<Complex64> = t.iter().zip(w).map(|(&t, &w)| w * (-l1 * t).exp()).collect();
        let e2: Vec<Complex64> = t.iter().zip(w).map(|(&t, &w)| w * (-l2 * t).exp()).collect();
        let mut brute = Complex64::new(0.0, 0.0);
        for i in 0..t.len() {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..t.len() {
                row += e2[j] * (a[i] * b[j] + b[i] * a[j]);
            }
            brute += e1[i] * row * 0.5;
        }
        worst = worst.max((laplace_eval(&p, &[l1, l2])? - brute).norm());
    }
    Ok(worst)
}

/// Smallest probe-set separation between distinct corpus functions.
pub fn laplace_injectivity(cx: &Ctx) -> Result<f64> {
    let probes = laplace_probes();
    let table: Vec<Vec<Complex64>> = cx
        .corpus
        .fns
        .iter()
        .map(|f| probes.iter().map(|&l| laplace_fn(&f.phi, l)).collect())
        .collect::<Result<_>>()?;
    let mut sep = f64::INFINITY;
    for i in 0..table.len() {
        for j in i + 1..table.len() {
            let d = table[i].iter().zip(&table[j]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            sep = sep.min(d);
        }
    }
    Ok(sep)
}

// ---- operator calculus

fn scalar_lambdas(n: usize) -> Vec<Vec<Complex64>> {
    let all = [
        vec![Complex64::new(0.0, -1.0)],
        vec![Complex64::new(0.5, -2.0), Complex64::new(-1.0, -0.5)],
        vec![Complex64::new(0.0, -0.5), Complex64::new(1.0, -1.0), Complex64::new(-0.25, -2.0)],
    ];
    all[..n].to_vec()
}

fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    crate::fock::permutations(n)
        .iter()
        .map(|p| p.iter().enumerate().map(|(j, &i)| m[i][j]).product::<Complex64>())
        .sum()
}

/// Scalar generators: the calculus multiplies the state by the symbol's Laplace transform.
pub fn scalar_laplace(cx: &Ctx) -> Result<f64> {
    let n = cx.max_degree;
    let lams = scalar_lambdas(n);
    let sys = GeneratorSystem::scalar(&lams)?;
    let y = cx.operator_state();
    let mut p = PolyTest::scalar(c(0.25), n);
    let mut expected = c(0.25);
    // e^{-it lambda} = e^{-(i lambda) t}; closed form k! / (z + 1)^{k+1}.
    let lap = |k: u32, z: Complex64| c((1..=k).map(f64::from).product()) / (z + 1.0).powu(k + 1);
    let names = ["exp", "t_exp", "t2_exp"];
    for deg in 1..=n {
        let ks: Vec<u32> = (0..deg as u32).map(|j| (j + deg as u32 - 1) % 3).collect();
        let factors = ks.iter().map(|&k| cx.phi(names[k as usize]).clone()).collect();
        let coeff = Complex64::new(1.0, -(deg as f64) / 2.0);
        p.push_term(coeff, factors)?;
        let zs: Vec<Complex64> = lams[deg - 1].iter().map(|l| Complex64::i() * l).collect();
        let m: Vec<Vec<Complex64>> = ks.iter().map(|&k| zs.iter().map(|&z| lap(k, z)).collect()).collect();
        let nf: f64 = (1..=deg).map(|j| j as f64).product();
        expected += coeff * permanent(&m) / nf;
    }
    let got = calculus_apply(&p, &sys, &y)?;
    Ok(got.distance(&y.scale(expected))? / y.norm())
}

pub fn phi_homomorphism(cx: &Ctx) -> Result<f64> {
    let n = cx.max_degree;
    let sys = GeneratorSystem::gaussian(n);
    let y = cx.operator_state();
    let p = cx.mixed_poly()?;
    let scale = 1.0 + y.norm();
    max_of(pairs(&cx.corpus.dists).into_iter().map(|(f, g)| {
        let (bf, bg) = (power_dist(&f.f, n), power_dist(&g.f, n));
        let lhs = phi_apply(&boxtimes(&bf, &bg)?, &p, &sys, &y)?;
        let rhs = phi_apply(&bf, &cross_corr_poly(&bg, &p)?, &sys, &y)?;
        Ok(lhs.distance(&rhs)? / scale)
    }))
}

pub fn phi_commutant(cx: &Ctx) -> Result<f64> {
    let n = cx.max_degree;
    let sys = GeneratorSystem::gaussian(n);
    let y = cx.operator_state();
    let p = cx.mixed_poly()?;
    let scale = 1.0 + y.norm();
    max_of(cx.corpus.dists.iter().flat_map(|f| {
        let big = power_dist(&f.f, n);
        let (p, sys, y) = (&p, &sys, &y);
        SHIFTS[1..].iter().map(move |&s| {
            let ab = phi_apply(&big, &poly_shift(p, s)?, sys, y)?;
            let ba = opshift_apply(&cross_corr_poly(&big, p)?, s, sys, y)?;
            Ok(ab.distance(&ba)? / scale)
        })
    }))
}

/// Degree-2 marginal factorization against the 16 x 16 tensor sum of semigroup orbits.
pub fn tensor_quadrature(cx: &Ctx) -> Result<f64> {
    if cx.max_degree < 2 {
        return Err(Error::Configuration("needs max_degree >= 2".into()));
    }
    let g = crate::halfline::build_grid(16, 4.0, crate::halfline::QuadratureRule::Gregory)?;
    let layout = FockLayout::new(cx.layout.half_width(), cx.layout.nodes_per_axis()[..2].to_vec())?;
    let y = FockState::from_fn(&layout, c(0.5), |_, xi| c(xi.iter().map(|x| (-x * x / 8.0).exp()).product()));
    let sys = GeneratorSystem::gaussian(2);
    let a = crate::halfline::sample_real(|t| (-t).exp(), &g)?;
    let b = crate::halfline::sample_real(|t| (-t * t).exp(), &g)?;
    let mut p = PolyTest::zero(2);
    p.push_term(ONE, vec![a.clone(), b.clone()])?;
    let got = calculus_apply(&p, &sys, &y)?;
    let (t, w) = (g.nodes(), g.weights());
    let (a1, a2) = (&sys.block(2)[0], &sys.block(2)[1]);
    let mut brute = FockState::zeros(&layout);
    for i in 0..t.len() {
        let inner = a1.apply_semigroup(t[i], &y)?;
        for j in 0..t.len() {
            let v = a2.apply_semigroup(t[j], &inner)?;
            let sym = 0.5 * (a.values()[i] * b.values()[j] + b.values()[i] * a.values()[j]);
            brute = brute.axpy(sym * w[i] * w[j], &v)?;
        }
    }
    Ok(got.distance(&brute)? / (1.0 + y.norm()))
}

// ---- Gaussian semigroup

fn desk_gaussian(cx: &Ctx) -> FockState {
    FockState::from_fn(&cx.layout, ONE, |_, xi| c(xi.iter().map(|x| (-x * x / 2.0).exp()).product()))
}

fn component_rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn gaussian_closed_form(cx: &Ctx) -> Result<f64> {
    let y = desk_gaussian(cx);
    let top = cx.max_degree.min(2);
    let mut worst: f64 = 0.0;
    for t in [0.25, 0.5, 0.75] {
        for n in 1..=top {
            let got = gaussian_apply(&vec![t; n], &y)?;
            let exact = FockState::from_fn(&cx.layout, ONE, |_, xi| {
                xi.iter().map(|&x| propagated_gaussian(1.0, t, x)).product()
            });
            worst = worst.max(component_rel_l2(got.component(n), exact.component(n)));
        }
    }
    Ok(worst)
}

pub fn gaussian_semigroup_law(cx: &Ctx) -> Result<f64> {
    let y = desk_gaussian(cx);
    let base = y.norm();
    let mut worst: f64 = 0.0;
    for n in 1..=cx.max_degree {
        let split = gaussian_apply(&vec![0.3; n], &gaussian_apply(&vec![0.2; n], &y)?)?;
        let whole = gaussian_apply(&vec![0.5; n], &y)?;
        worst = worst.max(split.distance(&whole)? / base);
    }
    let defect = GeneratorSystem::gaussian(cx.max_degree).commutation_defect(&y, &[0.1, 0.4])?;
    Ok(worst.max(defect / base))
}

pub fn gaussian_norm(cx: &Ctx) -> Result<f64> {
    let y = desk_gaussian(cx);
    let base = y.norm();
    let mut worst: f64 = 0.0;
    for n in 1..=cx.max_degree {
        for t in [0.1, 0.25, 0.5, 0.75] {
            worst = worst.max((gaussian_apply(&vec![t; n], &y)?.norm() - base).abs() / base);
        }
    }
    Ok(worst)
}

/// Largest norm ratio `||e^{-itA} v|| / ||v||` over all Gaussian generators and probes.
pub fn gaussian_contraction(cx: &Ctx) -> Result<f64> {
    let sys = GeneratorSystem::gaussian(cx.max_degree);
    let probes = probe_states(&cx.layout);
    let ts = [0.0, 0.1, 0.5, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    for n in 1..=cx.max_degree {
        for a in sys.block(n) {
            let r = contraction_report(a, &ts, &probes)?;
            worst = worst.max(r.max_ratio);
        }
    }
    Ok(worst)
}
