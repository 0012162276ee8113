//! Fourier transform on the half-line, the generalized Fourier duality,
//! factorwise transforms of polynomial test functions and Laplace values.
//!
//! `F phi(xi) = int_0^inf e^{-i t xi} phi(t) dt` is evaluated by direct
//! quadrature on the time grid against the oscillatory kernel.

use std::sync::Arc;

use num_complex::Complex64;

use crate::distributions::{pair, Distribution};
use crate::error::{Error, Result};
use crate::fock::{factorial, permutations, PolyTest};
use crate::halfline::{diff_fn_with, sample, Grid, Stencil, TestFn};

pub const DEFAULT_XI_MAX: f64 = 16.0;
pub const DEFAULT_XI_NODES: usize = 257;

/// `xi_max * h` above which a transform is reported as under-resolved.
pub const RESOLUTION_WARN: f64 = 1.0;
/// `xi_max * h` above which a transform is refused (beyond Nyquist).
pub const RESOLUTION_LIMIT: f64 = std::f64::consts::PI;

/// Order of the analytic tail model subtracted in [`fourier_pair_check`].
const TAIL_ORDER: usize = 5;
/// Decay rate of the tail model.
const TAIL_RATE: f64 = 2.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Symmetric uniform frequency grid on `[-xi_max, xi_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid {
    xi_max: f64,
    nodes: Vec<f64>,
}

impl FreqGrid {
    /// `n` must be odd so that `xi = 0` is a node.
    pub fn new(xi_max: f64, n: usize) -> Result<Arc<FreqGrid>> {
        if !(xi_max > 0.0 && xi_max.is_finite()) {
            return Err(Error::Parameter(format!("xi_max must be positive, got {xi_max}")));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::Parameter(format!("frequency grid needs an odd node count >= 3, got {n}")));
        }
        let half = (n / 2) as f64;
        let nodes = (0..n).map(|k| xi_max * (k as f64 - half) / half).collect();
        Ok(Arc::new(FreqGrid { xi_max, nodes }))
    }

    pub fn default_grid() -> Arc<FreqGrid> {
        FreqGrid::new(DEFAULT_XI_MAX, DEFAULT_XI_NODES).expect("default frequency grid is valid")
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.xi_max / (self.nodes.len() - 1) as f64
    }

    /// Trapezoid weights over the grid.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let n = self.nodes.len();
        (0..n).map(|k| if k == 0 || k == n - 1 { h / 2.0 } else { h }).collect()
    }
}

/// Sampled frequency-side function.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqFn {
    grid: Arc<FreqGrid>,
    values: Vec<Complex64>,
    resolution: f64,
}

impl FreqFn {
    pub fn from_values(grid: Arc<FreqGrid>, values: Vec<Complex64>) -> Result<FreqFn> {
        if values.len() != grid.nodes.len() {
            return Err(Error::Parameter(format!(
                "{} values for a frequency grid of {} nodes",
                values.len(),
                grid.nodes.len()
            )));
        }
        Ok(FreqFn { grid, values, resolution: 0.0 })
    }

    pub fn grid(&self) -> &Arc<FreqGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `xi_max * h` of the time grid the transform was computed on.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.resolution > RESOLUTION_WARN {
            vec![format!("oscillation under-resolved: xi_max * h = {:.3}", self.resolution)]
        } else {
            Vec::new()
        }
    }

    /// Six-point Lagrange interpolation; zero outside the grid.
    pub fn eval(&self, xi: f64) -> Complex64 {
        let nodes = &self.grid.nodes;
        let n = nodes.len();
        if xi.abs() > self.grid.xi_max * (1.0 + 1e-12) {
            return ZERO;
        }
        let h = self.grid.spacing();
        let pos = (xi + self.grid.xi_max) / h;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            return self.values[(nearest as usize).min(n - 1)];
        }
        let width = 6.min(n);
        let i = pos.floor() as usize;
        let start = (i + 1).saturating_sub(width / 2).min(n - width);
        let xs = &nodes[start..start + width];
        let mut acc = ZERO;
        for j in 0..width {
            let mut l = 1.0;
            for k in 0..width {
                if k != j {
                    l *= (xi - xs[k]) / (xs[j] - xs[k]);
                }
            }
            acc += self.values[start + j] * l;
        }
        acc
    }

    pub fn sup_distance(&self, other: &FreqFn) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("frequency functions on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// Largest node spacing of a time grid.
fn max_spacing(grid: &Grid) -> f64 {
    grid.nodes().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn check_resolution(time: &Grid, freq: &FreqGrid) -> Result<f64> {
    let r = freq.xi_max * max_spacing(time);
    if r > RESOLUTION_LIMIT {
        return Err(Error::Resolution(format!(
            "xi_max * h = {r:.3} exceeds {RESOLUTION_LIMIT:.3}; refine the time grid or lower xi_max"
        )));
    }
    Ok(r)
}

/// `int e^{-i t xi} phi(t) dt` at a single frequency.
pub fn fourier_at(phi: &TestFn, xi: f64) -> Complex64 {
    let g = phi.grid();
    g.nodes()
        .iter()
        .zip(g.weights())
        .zip(phi.values())
        .map(|((&t, &w), &v)| v * Complex64::from_polar(w, -t * xi))
        .sum()
}

/// Transform of `phi` on every node of `xi_grid`.
pub fn fourier_fn(phi: &TestFn, xi_grid: &Arc<FreqGrid>) -> Result<FreqFn> {
    let resolution = check_resolution(phi.grid(), xi_grid)?;
    let values = xi_grid.nodes.iter().map(|&xi| fourier_at(phi, xi)).collect();
    Ok(FreqFn { grid: Arc::clone(xi_grid), values, resolution })
}

/// Frequency-side representative `f^v` of a distribution, normalized so that
/// `int f^v(xi) F phi(xi) dxi = 2 pi <f, phi>`.
fn dual_symbol(f: &Distribution, xi_grid: &Arc<FreqGrid>) -> Result<Vec<Complex64>> {
    let nodes = xi_grid.nodes();
    let n = nodes.len();
    let mut out = vec![ZERO; n];
    let i = Complex64::new(0.0, 1.0);
    for a in f.atoms() {
        let sign = if a.order % 2 == 0 { 1.0 } else { -1.0 };
        for (o, &xi) in out.iter_mut().zip(nodes) {
            *o += a.weight * sign * (i * xi).powu(a.order as u32) * Complex64::from_polar(1.0, a.location * xi);
        }
    }
    for d in f.densities() {
        // int rho(u) e^{i u xi} du is the transform at -xi; the grid is symmetric.
        let rho_hat = fourier_fn(&d.profile, xi_grid)?;
        for (k, (o, &xi)) in out.iter_mut().zip(nodes).enumerate() {
            *o += rho_hat.values[n - 1 - k] * Complex64::from_polar(1.0, d.offset * xi);
        }
    }
    Ok(out)
}

/// Coefficients `c_k` of the tail model `r(t) = sum_k c_k t^k e^{-beta t} / k!`
/// matching the derivatives of `phi` at 0 up to `TAIL_ORDER`.
fn tail_model(phi: &TestFn) -> Result<Vec<Complex64>> {
    let mut derivs = vec![phi.values()[0]];
    let mut cur = phi.clone();
    for _ in 0..TAIL_ORDER {
        cur = diff_fn_with(&cur, Stencil::Sixth)?;
        derivs.push(cur.values()[0]);
    }
    let mut c: Vec<Complex64> = Vec::with_capacity(TAIL_ORDER + 1);
    for j in 0..=TAIL_ORDER {
        let mut v = derivs[j];
        for (k, ck) in c.iter().enumerate() {
            v -= ck * binomial(j, k) * (-TAIL_RATE).powi((j - k) as i32);
        }
        c.push(v);
    }
    Ok(c)
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `d^m/dt^m r(t)` for the tail model.
fn tail_derivative(c: &[Complex64], m: usize, t: f64) -> Complex64 {
    let e = (-TAIL_RATE * t).exp();
    let mut acc = ZERO;
    for (k, ck) in c.iter().enumerate() {
        // Leibniz on (t^k / k!) * e^{-beta t}.
        let mut s = 0.0;
        for i in 0..=m.min(k) {
            s += binomial(m, i) * t.powi((k - i) as i32) / factorial(k - i) * (-TAIL_RATE).powi((m - i) as i32);
        }
        acc += ck * s * e;
    }
    acc
}

/// Transform of the tail model, `sum_k c_k / (beta + i xi)^{k+1}`.
fn tail_transform(c: &[Complex64], xi: f64) -> Complex64 {
    let z = Complex64::new(TAIL_RATE, xi);
    c.iter().enumerate().map(|(k, ck)| ck / z.powu(k as u32 + 1)).sum()
}

/// Both sides of the duality `<F'f, F phi> = 2 pi <f, phi>`.
///
/// The left side is computed on the frequency side. An analytic model of the
/// boundary behaviour of `phi` is subtracted first so the remaining integrand
/// decays fast enough for a truncated frequency grid; the model's own
/// contribution is evaluated in closed form.
pub fn fourier_pair_check(f: &Distribution, phi: &TestFn, xi_grid: &Arc<FreqGrid>) -> Result<(Complex64, Complex64)> {
    let rhs = 2.0 * std::f64::consts::PI * pair(f, phi)?;
    let phi_hat = fourier_fn(phi, xi_grid)?;
    let c = tail_model(phi)?;
    let symbol = dual_symbol(f, xi_grid)?;
    let w = xi_grid.weights();
    let mut lhs = ZERO;
    for (k, &xi) in xi_grid.nodes().iter().enumerate() {
        lhs += w[k] * (phi_hat.values[k] - tail_transform(&c, xi)) * symbol[k];
    }
    let mut model_pair = ZERO;
    for a in f.atoms() {
        let sign = if a.order % 2 == 0 { 1.0 } else { -1.0 };
        model_pair += a.weight * sign * tail_derivative(&c, a.order, a.location);
    }
    if !f.densities().is_empty() {
        let r = sample(|t| tail_derivative(&c, 0, t), phi.grid())?;
        let dens = Distribution::from_parts(Vec::new(), f.densities().to_vec())?;
        model_pair += pair(&dens, &r)?;
    }
    lhs += 2.0 * std::f64::consts::PI * model_pair;
    Ok((lhs, rhs))
}

/// `c * Sym(F phi_1 (x) ... (x) F phi_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqTerm {
    pub coeff: Complex64,
    pub factors: Vec<FreqFn>,
}

/// Factorwise transform of a polynomial test function.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqPoly {
    max_degree: usize,
    degrees: Vec<Vec<FreqTerm>>,
}

impl FreqPoly {
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn terms(&self, n: usize) -> &[FreqTerm] {
        self.degrees.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Degree-`xis.len()` component at `(xi_1, ..., xi_n)`.
    pub fn eval(&self, xis: &[f64]) -> Complex64 {
        let n = xis.len();
        let perms = permutations(n);
        let norm = 1.0 / factorial(n);
        self.terms(n)
            .iter()
            .map(|term| {
                let vals: Vec<Vec<Complex64>> =
                    term.factors.iter().map(|f| xis.iter().map(|&x| f.eval(x)).collect()).collect();
                let s: Complex64 = perms
                    .iter()
                    .map(|p| p.iter().enumerate().map(|(j, &i)| vals[i][j]).product::<Complex64>())
                    .sum();
                term.coeff * s * norm
            })
            .sum()
    }
}

/// Applies the transform factor by factor; degree 0 is left untouched.
pub fn fourier_poly(p: &PolyTest, xi_grid: &Arc<FreqGrid>) -> Result<FreqPoly> {
    let mut degrees = Vec::with_capacity(p.max_degree() + 1);
    for n in 0..=p.max_degree() {
        let mut terms = Vec::new();
        for t in p.terms(n) {
            let factors = t.factors().iter().map(|phi| fourier_fn(phi, xi_grid)).collect::<Result<Vec<_>>>()?;
            terms.push(FreqTerm { coeff: t.coeff(), factors });
        }
        degrees.push(terms);
    }
    Ok(FreqPoly { max_degree: p.max_degree(), degrees })
}

/// `int e^{-lambda t} phi(t) dt`.
pub fn laplace_fn(phi: &TestFn, lambda: Complex64) -> Result<Complex64> {
    if !(lambda.re > 0.0) {
        return Err(Error::Domain(format!("Laplace argument needs Re > 0, got {lambda}")));
    }
    let g = phi.grid();
    Ok(g.nodes()
        .iter()
        .zip(g.weights())
        .zip(phi.values())
        .map(|((&t, &w), &v)| v * w * (-lambda * t).exp())
        .sum())
}

/// Laplace transform of the degree-`lambda.len()` component of `p` at `lambda`.
pub fn laplace_eval(p: &PolyTest, lambda: &[Complex64]) -> Result<Complex64> {
    if let Some(bad) = lambda.iter().find(|l| !(l.re > 0.0)) {
        return Err(Error::Domain(format!("Laplace argument needs Re > 0, got {bad}")));
    }
    let n = lambda.len();
    let perms = permutations(n);
    let norm = 1.0 / factorial(n);
    let mut acc = ZERO;
    for term in p.terms(n) {
        // m[i][j] = L(chi_i)(lambda_j)
        let m = term
            .factors()
            .iter()
            .map(|chi| lambda.iter().map(|&l| laplace_fn(chi, l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let s: Complex64 = perms.iter().map(|rho| (0..n).map(|j| m[rho[j]][j]).product::<Complex64>()).sum();
        acc += term.coeff() * s * norm;
    }
    Ok(acc)
}

/// Default probe set `{0.5, 1, 2} x {1 + i, 1 - i}`.
pub fn laplace_probes() -> Vec<Complex64> {
    let mut out = Vec::new();
    for s in [0.5, 1.0, 2.0] {
        for z in [Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)] {
            out.push(z * s);
        }
    }
    out
}

/// Integral of a frequency function with the trapezoid rule.
pub fn integrate_freq(f: &FreqFn) -> Complex64 {
    f.grid.weights().iter().zip(&f.values).map(|(w, v)| v * *w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{convolve, delta_at};
    use crate::fock::power_test;
    use crate::halfline::{build_grid, sample_real, QuadratureRule};
    use std::f64::consts::PI;

    fn grid() -> Arc<Grid> {
        build_grid(1024, 40.0, QuadratureRule::Gregory).unwrap()
    }

    #[test]
    fn exponential_transform() {
        let g = grid();
        let xg = FreqGrid::default_grid();
        let phi = sample_real(|t| (-t).exp(), &g).unwrap();
        let hat = fourier_fn(&phi, &xg).unwrap();
        assert!(hat.warnings().is_empty());
        let mut worst: f64 = 0.0;
        for (&xi, v) in xg.nodes().iter().zip(hat.values()) {
            if xi.abs() <= 8.0 {
                worst = worst.max((v - 1.0 / Complex64::new(1.0, xi)).norm());
            }
        }
        assert!(worst <= 1e-6, "{worst}");
        let zero = fourier_fn(&TestFn::zeros(&g), &xg).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));
        // conjugate symmetry for real phi
        let n = xg.nodes().len();
        for k in 0..n {
            assert!((hat.values()[k] - hat.values()[n - 1 - k].conj()).norm() <= 1e-10);
        }
    }

    #[test]
    fn resolution_limits() {
        let coarse = build_grid(64, 40.0, QuadratureRule::Gregory).unwrap();
        let phi = sample_real(|t| (-t).exp(), &coarse).unwrap();
        assert!(matches!(fourier_fn(&phi, &FreqGrid::default_grid()), Err(Error::Resolution(_))));
        let mid = build_grid(400, 40.0, QuadratureRule::Gregory).unwrap();
        let phi = sample_real(|t| (-t).exp(), &mid).unwrap();
        assert!(!fourier_fn(&phi, &FreqGrid::default_grid()).unwrap().warnings().is_empty());
    }

    #[test]
    fn convolution_theorem() {
        let g = grid();
        let xg = FreqGrid::default_grid();
        let a = sample_real(|t| (-t).exp(), &g).unwrap();
        let b = sample_real(|t| t * (-t).exp(), &g).unwrap();
        let ab = convolve(&Distribution::from_density(a.clone()), &Distribution::from_density(b.clone())).unwrap();
        let conv = &ab.densities()[0].profile;
        let lhs = fourier_fn(conv, &xg).unwrap();
        let (fa, fb) = (fourier_fn(&a, &xg).unwrap(), fourier_fn(&b, &xg).unwrap());
        for k in 0..xg.nodes().len() {
            assert!((lhs.values()[k] - fa.values()[k] * fb.values()[k]).norm() <= 1e-4);
        }
    }

    #[test]
    fn duality_examples() {
        let g = grid();
        let xg = FreqGrid::default_grid();
        let phi = sample_real(|t| (-t).exp(), &g).unwrap();
        let cases = [
            (Distribution::unit(), 2.0 * PI),
            (delta_at(1.0, 0).unwrap(), 2.0 * PI * (-1.0f64).exp()),
            (Distribution::from_density(sample_real(|t| t * (-t).exp(), &g).unwrap()), 2.0 * PI / 4.0),
            (delta_at(0.5, 1).unwrap(), 2.0 * PI * (-0.5f64).exp()),
        ];
        for (f, expect) in cases {
            let (lhs, rhs) = fourier_pair_check(&f, &phi, &xg).unwrap();
            assert!((rhs.re - expect).abs() <= 1e-6, "{rhs} vs {expect}");
            assert!((lhs - rhs).norm() <= 1e-4 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
        }
        let gauss = sample_real(|t| (-t * t).exp(), &g).unwrap();
        let f = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap())
            .add(&delta_at(1.0, 0).unwrap())
            .unwrap();
        let (lhs, rhs) = fourier_pair_check(&f, &gauss, &xg).unwrap();
        assert!((lhs - rhs).norm() <= 1e-4 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn polynomial_transform() {
        let g = grid();
        let xg = FreqGrid::default_grid();
        let phi = sample_real(|t| (-t).exp(), &g).unwrap();
        let mut p = power_test(&phi, 2);
        p = p.add(&PolyTest::scalar(Complex64::new(2.0, 0.0), 2)).unwrap();
        let fp = fourier_poly(&p, &xg).unwrap();
        assert_eq!(fp.terms(0)[0].coeff, Complex64::new(3.0, 0.0));
        for (x1, x2) in [(0.0, 1.0), (-2.5, 4.0), (7.875, -8.0)] {
            let expect = 1.0 / (Complex64::new(1.0, x1) * Complex64::new(1.0, x2));
            assert!((fp.eval(&[x1, x2]) - expect).norm() <= 1e-6);
        }

        let b = sample_real(|t| t * (-t).exp(), &g).unwrap();
        let conv = convolve(&Distribution::from_density(phi.clone()), &Distribution::from_density(b.clone()))
            .unwrap()
            .densities()[0]
            .profile
            .clone();
        let lhs = fourier_poly(&power_test(&conv, 2), &xg).unwrap();
        let fa = fourier_poly(&power_test(&phi, 2), &xg).unwrap();
        let fb = fourier_poly(&power_test(&b, 2), &xg).unwrap();
        for xs in [[0.0, 0.5], [1.0, -3.0]] {
            assert!((lhs.eval(&xs) - fa.eval(&xs) * fb.eval(&xs)).norm() <= 1e-4);
        }
    }

    #[test]
    fn laplace_examples() {
        let g = grid();
        for a in [1.0, 2.0] {
            let phi = sample_real(|t| (-a * t).exp(), &g).unwrap();
            let p = power_test(&phi, 2);
            for &l in &laplace_probes() {
                let v = laplace_eval(&p, &[l]).unwrap();
                assert!((v - 1.0 / (l + a)).norm() <= 1e-8);
            }
            let (l1, l2) = (Complex64::new(0.5, 0.5), Complex64::new(2.0, -2.0));
            let v = laplace_eval(&p, &[l1, l2]).unwrap();
            assert!((v - 1.0 / ((l1 + a) * (l2 + a))).norm() <= 1e-8);
        }
        let phi = sample_real(|t| (-1.0f64 * t).exp(), &g).unwrap();
        assert!(matches!(laplace_eval(&power_test(&phi, 1), &[Complex64::new(0.0, 1.0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn laplace_brute_force_two_dimensional() {
        let g = build_grid(256, 30.0, QuadratureRule::Gregory).unwrap();
        let a = sample_real(|t| t * (-t).exp(), &g).unwrap();
        let b = sample_real(|t| (-t * t).exp(), &g).unwrap();
        let mut p = PolyTest::zero(2);
        p.push_term(Complex64::new(1.0, 0.0), vec![a, b]).unwrap();
        let (l1, l2) = (Complex64::new(1.0, 1.0), Complex64::new(0.5, -0.5));
        let got = laplace_eval(&p, &[l1, l2]).unwrap();
        let (t, w) = (g.nodes(), g.weights());
        let mut brute = ZERO;
        for i in 0..t.len() {
            for j in 0..t.len() {
                brute += w[i] * w[j] * (-l1 * t[i] - l2 * t[j]).exp() * p.eval(&[t[i], t[j]]);
            }
        }
        assert!((got - brute).norm() <= 1e-7, "{got} vs {brute}");
    }
}
