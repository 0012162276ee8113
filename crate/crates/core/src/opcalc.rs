//! Generator systems on a truncated symmetric Fock space and the functional
//! calculus `p -> p~(A)`.
//!
//! The state space is `C (+) L2_sym(R) (+) ... (+) L2_sym(R^N)`, each component
//! sampled on the periodic box `[-L, L)^n`. A generator system is a list of
//! blocks `A_1, A_2, ...` where block `n` holds `n` commuting one-dimensional
//! generators. For a rank-1 symmetric term the `n`-fold Bochner integral
//! `int e^{-i t.A_n} p_n(t) dt` factorizes into a composition of one-parameter
//! marginals, one per slot.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fock::{cross_corr_poly, factorial, permutations, poly_shift, PolyDist, PolyTest};
use crate::halfline::TestFn;

/// Default half-width of the spatial box.
pub const DEFAULT_HALF_WIDTH: f64 = 12.0;
/// Default nodes per axis for degrees 1, 2, 3.
pub const DEFAULT_NODES: [usize; 3] = [512, 64, 32];
/// Relative amplitude below which a Fourier mode is treated as empty.
pub const CONTENT_TOL: f64 = 1e-8;
/// Slack allowed on `||e^{-itA} v|| / ||v||`.
pub const CONTRACTION_SLACK: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(b_n, e_n) = (n(n-1)/2 + 1, n(n+1)/2)`; `None` for the empty block `A_0`.
pub fn block_indices(n: usize) -> Option<(usize, usize)> {
    (n > 0).then(|| (n * (n - 1) / 2 + 1, n * (n + 1) / 2))
}

/// Spatial discretization of every Fock component.
#[derive(Debug, Clone, PartialEq)]
pub struct FockLayout {
    half_width: f64,
    nodes_per_axis: Vec<usize>,
}

impl FockLayout {
    /// `nodes_per_axis[n - 1]` is the per-axis node count of component `n`.
    pub fn new(half_width: f64, nodes_per_axis: Vec<usize>) -> Result<Arc<FockLayout>> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Parameter(format!("half-width L must be positive, got {half_width}")));
        }
        if let Some(m) = nodes_per_axis.iter().find(|&&m| m < 4) {
            return Err(Error::Parameter(format!("need >= 4 nodes per axis, got {m}")));
        }
        Ok(Arc::new(FockLayout { half_width, nodes_per_axis }))
    }

    /// Desk-scale layout up to degree `max_degree <= 3`.
    pub fn desk(max_degree: usize) -> Result<Arc<FockLayout>> {
        if max_degree > DEFAULT_NODES.len() {
            return Err(Error::Parameter(format!("desk layout covers degrees <= 3, got {max_degree}")));
        }
        FockLayout::new(DEFAULT_HALF_WIDTH, DEFAULT_NODES[..max_degree].to_vec())
    }

    pub fn max_degree(&self) -> usize {
        self.nodes_per_axis.len()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes_per_axis
    }

    /// Per-axis node count of component `n >= 1`.
    pub fn nodes(&self, n: usize) -> usize {
        self.nodes_per_axis[n - 1]
    }

    pub fn spacing(&self, n: usize) -> f64 {
        2.0 * self.half_width / self.nodes(n) as f64
    }

    /// Node coordinates `-L + k dx` of component `n`.
    pub fn coords(&self, n: usize) -> Vec<f64> {
        let dx = self.spacing(n);
        (0..self.nodes(n)).map(|k| -self.half_width + k as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self, n: usize) -> Vec<f64> {
        let m = self.nodes(n);
        let dk = PI / self.half_width;
        (0..m).map(|j| if j < m.div_ceil(2) { j as f64 * dk } else { (j as f64 - m as f64) * dk }).collect()
    }

    /// Number of samples in component `n`.
    pub fn len(&self, n: usize) -> usize {
        self.nodes(n).pow(n as u32)
    }
}

/// Element of the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    layout: Arc<FockLayout>,
    y0: Complex64,
    comps: Vec<Vec<Complex64>>,
}

impl FockState {
    pub fn zeros(layout: &Arc<FockLayout>) -> FockState {
        let comps = (1..=layout.max_degree()).map(|n| vec![ZERO; layout.len(n)]).collect();
        FockState { layout: Arc::clone(layout), y0: ZERO, comps }
    }

    /// Samples `f(n, xi)` on every component.
    pub fn from_fn<F>(layout: &Arc<FockLayout>, y0: Complex64, f: F) -> FockState
    where
        F: Fn(usize, &[f64]) -> Complex64,
    {
        let mut s = FockState::zeros(layout);
        s.y0 = y0;
        for n in 1..=layout.max_degree() {
            let coords = layout.coords(n);
            let m = coords.len();
            let mut xi = vec![0.0; n];
            for (idx, v) in s.comps[n - 1].iter_mut().enumerate() {
                let mut r = idx;
                for j in (0..n).rev() {
                    xi[j] = coords[r % m];
                    r /= m;
                }
                *v = f(n, &xi);
            }
        }
        s
    }

    /// Builds a state from raw component arrays (row-major, axis 0 slowest).
    pub fn from_parts(layout: &Arc<FockLayout>, y0: Complex64, comps: Vec<Vec<Complex64>>) -> Result<FockState> {
        if comps.len() != layout.max_degree() {
            return Err(Error::Parameter(format!(
                "{} components for a layout of degree {}",
                comps.len(),
                layout.max_degree()
            )));
        }
        for (k, c) in comps.iter().enumerate() {
            if c.len() != layout.len(k + 1) {
                return Err(Error::Parameter(format!(
                    "component {} has {} samples, expected {}",
                    k + 1,
                    c.len(),
                    layout.len(k + 1)
                )));
            }
        }
        Ok(FockState { layout: Arc::clone(layout), y0, comps })
    }

    pub fn layout(&self) -> &Arc<FockLayout> {
        &self.layout
    }

    pub fn y0(&self) -> Complex64 {
        self.y0
    }

    /// Samples of component `n >= 1`.
    pub fn component(&self, n: usize) -> &[Complex64] {
        &self.comps[n - 1]
    }

    fn check_layout(&self, other: &FockState) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::GridMismatch("states on different Fock layouts".into()));
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> FockState {
        let mut out = self.clone();
        out.y0 *= c;
        for v in out.comps.iter_mut().flatten() {
            *v *= c;
        }
        out
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &FockState) -> Result<FockState> {
        self.check_layout(other)?;
        let mut out = self.clone();
        out.y0 += c * other.y0;
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        Ok(out)
    }

    /// Discrete L2 norm `(|y0|^2 + sum_n dx^n sum |y_n|^2)^{1/2}`.
    pub fn norm(&self) -> f64 {
        let mut s = self.y0.norm_sqr();
        for (k, c) in self.comps.iter().enumerate() {
            let n = k + 1;
            let cell = self.layout.spacing(n).powi(n as i32);
            s += cell * c.iter().map(Complex64::norm_sqr).sum::<f64>();
        }
        s.sqrt()
    }

    pub fn distance(&self, other: &FockState) -> Result<f64> {
        Ok(self.axpy(-ONE, other)?.norm())
    }

    /// Largest deviation from invariance under coordinate permutations.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in self.comps.iter().enumerate() {
            let n = k + 1;
            if n < 2 {
                continue;
            }
            let m = self.layout.nodes(n);
            let perms = permutations(n);
            let mut digits = vec![0usize; n];
            for (idx, v) in c.iter().enumerate() {
                let mut r = idx;
                for j in (0..n).rev() {
                    digits[j] = r % m;
                    r /= m;
                }
                for p in &perms[1..] {
                    let permuted = p.iter().fold(0usize, |acc, &j| acc * m + digits[j]);
                    worst = worst.max((v - c[permuted]).norm());
                }
            }
        }
        worst
    }

    /// Symmetrizes every component over coordinate permutations.
    pub fn symmetrized(&self) -> FockState {
        let mut out = self.clone();
        for (k, c) in self.comps.iter().enumerate() {
            let n = k + 1;
            if n < 2 {
                continue;
            }
            let m = self.layout.nodes(n);
            let perms = permutations(n);
            let norm = 1.0 / factorial(n);
            let mut digits = vec![0usize; n];
            for (idx, o) in out.comps[k].iter_mut().enumerate() {
                let mut r = idx;
                for j in (0..n).rev() {
                    digits[j] = r % m;
                    r /= m;
                }
                let s: Complex64 = perms.iter().map(|p| c[p.iter().fold(0usize, |acc, &j| acc * m + digits[j])]).sum();
                *o = s * norm;
            }
        }
        out
    }
}

/// Applies `mult(k)` along `axis` of an `n`-dimensional periodic array.
fn apply_axis_multiplier<F>(values: &mut [Complex64], n: usize, m: usize, axis: usize, ks: &[f64], mult: F)
where
    F: Fn(f64) -> Complex64,
{
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let factors: Vec<Complex64> = ks.iter().map(|&k| mult(k) / m as f64).collect();
    let stride = m.pow((n - 1 - axis) as u32);
    let outer = values.len() / (m * stride);
    let mut line = vec![ZERO; m];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * m * stride + s;
            for (j, l) in line.iter_mut().enumerate() {
                *l = values[base + j * stride];
            }
            fwd.process(&mut line);
            for (l, f) in line.iter_mut().zip(&factors) {
                *l *= f;
            }
            inv.process(&mut line);
            for (j, l) in line.iter().enumerate() {
                values[base + j * stride] = *l;
            }
        }
    }
}

/// Largest `|k|` along `axis` carrying a mode above `CONTENT_TOL` relative amplitude.
fn content_wavenumber(values: &[Complex64], n: usize, m: usize, axis: usize, ks: &[f64]) -> f64 {
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let stride = m.pow((n - 1 - axis) as u32);
    let outer = values.len() / (m * stride);
    let mut amp = vec![0.0f64; m];
    let mut line = vec![ZERO; m];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * m * stride + s;
            for (j, l) in line.iter_mut().enumerate() {
                *l = values[base + j * stride];
            }
            fwd.process(&mut line);
            for (a, l) in amp.iter_mut().zip(&line) {
                *a = a.max(l.norm());
            }
        }
    }
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    amp.iter().zip(ks).filter(|(a, _)| **a > CONTENT_TOL * peak).map(|(_, k)| k.abs()).fold(0.0, f64::max)
}

/// One-dimensional generator with its semigroup `t -> e^{-itA}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator1D {
    /// Multiplication by `lambda` on the whole state; `e^{-it lambda}`.
    /// Contractive iff `Im lambda <= 0`.
    Scalar(Complex64),
    /// `d^2/dxi_axis^2` on component `degree`; identity on the other components.
    /// The semigroup is the Fourier multiplier `e^{i t k^2}`.
    SecondDerivative { degree: usize, axis: usize },
}

impl Generator1D {
    fn check_state(&self, v: &FockState) -> Result<()> {
        if let Generator1D::SecondDerivative { degree, axis } = *self {
            if degree == 0 || degree > v.layout.max_degree() || axis >= degree {
                return Err(Error::Configuration(format!(
                    "second derivative on axis {axis} of degree {degree} does not fit a state of degree {}",
                    v.layout.max_degree()
                )));
            }
        }
        Ok(())
    }

    /// `e^{-itA} v`.
    pub fn apply_semigroup(&self, t: f64, v: &FockState) -> Result<FockState> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("semigroup time must be finite and >= 0, got {t}")));
        }
        self.check_state(v)?;
        if t == 0.0 {
            return Ok(v.clone());
        }
        Ok(match *self {
            Generator1D::Scalar(lambda) => v.scale((-Complex64::i() * t * lambda).exp()),
            Generator1D::SecondDerivative { degree, axis } => {
                let mut out = v.clone();
                let ks = v.layout.wavenumbers(degree);
                let m = v.layout.nodes(degree);
                apply_axis_multiplier(&mut out.comps[degree - 1], degree, m, axis, &ks, |k| {
                    Complex64::from_polar(1.0, t * k * k)
                });
                out
            }
        })
    }
}

/// Quadrature nodes, weights and the largest node spacing of `chi`'s grid.
fn quad_data(chi: &TestFn) -> (Vec<f64>, Vec<Complex64>, f64) {
    let g = chi.grid();
    let wv: Vec<Complex64> = g.weights().iter().zip(chi.values()).map(|(w, v)| v * *w).collect();
    let h = g.nodes().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    (g.nodes().to_vec(), wv, h)
}

fn resolution_error(what: &str, omega: f64, h: f64) -> Error {
    Error::Resolution(format!(
        "{what}: time step {h:.4} cannot resolve oscillation frequency {omega:.4} (h * omega > pi)"
    ))
}

/// `sum_i w_i chi(t_i) e^{-i t_i A} v`, evaluated in closed form per generator kind.
pub fn marginal_apply(chi: &TestFn, a: &Generator1D, v: &FockState) -> Result<FockState> {
    a.check_state(v)?;
    let (ts, wv, h) = quad_data(chi);
    match *a {
        Generator1D::Scalar(lambda) => {
            if lambda.re.abs() * h > PI {
                return Err(resolution_error("scalar generator", lambda.re.abs(), h));
            }
            let factor: Complex64 = ts.iter().zip(&wv).map(|(&t, w)| w * (-Complex64::i() * t * lambda).exp()).sum();
            Ok(v.scale(factor))
        }
        Generator1D::SecondDerivative { degree, axis } => {
            let layout = &v.layout;
            let ks = layout.wavenumbers(degree);
            let m = layout.nodes(degree);
            let kc = content_wavenumber(&v.comps[degree - 1], degree, m, axis, &ks);
            if kc * kc * h > PI {
                return Err(resolution_error("second derivative", kc * kc, h));
            }
            let mass: Complex64 = wv.iter().sum();
            let mut out = v.scale(mass);
            // Distinct k^2 values share one multiplier.
            let mut table: HashMap<u64, Complex64> = HashMap::new();
            for &k in &ks {
                let k2 = k * k;
                table.entry(k2.to_bits()).or_insert_with(|| {
                    ts.iter().zip(&wv).map(|(&t, w)| w * Complex64::from_polar(1.0, t * k2)).sum()
                });
            }
            let mut comp = v.comps[degree - 1].clone();
            apply_axis_multiplier(&mut comp, degree, m, axis, &ks, |k| table[&(k * k).to_bits()]);
            out.comps[degree - 1] = comp;
            Ok(out)
        }
    }
}

/// Reference form of [`marginal_apply`]: the weighted sum of semigroup orbits.
pub fn marginal_apply_orbit(chi: &TestFn, a: &Generator1D, v: &FockState) -> Result<FockState> {
    let (ts, wv, _) = quad_data(chi);
    let mut acc = FockState::zeros(&v.layout);
    for (&t, w) in ts.iter().zip(&wv) {
        if *w != ZERO {
            acc = acc.axpy(*w, &a.apply_semigroup(t, v)?)?;
        }
    }
    Ok(acc)
}

/// Blocks `A_1, A_2, ...`; block `n` holds `n` generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSystem {
    blocks: Vec<Vec<Generator1D>>,
}

impl GeneratorSystem {
    pub fn new(blocks: Vec<Vec<Generator1D>>) -> Result<GeneratorSystem> {
        for (k, b) in blocks.iter().enumerate() {
            if b.len() != k + 1 {
                return Err(Error::Configuration(format!("block {} must hold {} generators, got {}", k + 1, k + 1, b.len())));
            }
        }
        Ok(GeneratorSystem { blocks })
    }

    /// Chunks the flat list `A_1, A_2, ...` into blocks by [`block_indices`].
    pub fn from_flat(flat: Vec<Generator1D>) -> Result<GeneratorSystem> {
        let mut blocks = Vec::new();
        let mut n = 1;
        while let Some((b, e)) = block_indices(n) {
            if e > flat.len() {
                break;
            }
            blocks.push(flat[b - 1..e].to_vec());
            n += 1;
        }
        if blocks.iter().map(Vec::len).sum::<usize>() != flat.len() {
            return Err(Error::Configuration(format!(
                "{} generators do not fill whole blocks (block sizes 1, 2, 3, ...)",
                flat.len()
            )));
        }
        GeneratorSystem::new(blocks)
    }

    /// Every block entry is `Scalar(lambda)` with `lambda` from `lambdas[n-1][j]`.
    pub fn scalar(lambdas: &[Vec<Complex64>]) -> Result<GeneratorSystem> {
        GeneratorSystem::new(
            lambdas.iter().map(|b| b.iter().map(|&l| Generator1D::Scalar(l)).collect()).collect(),
        )
    }

    /// The Gaussian system: block `n` is `(d^2/dxi_1^2, ..., d^2/dxi_n^2)` on component `n`.
    pub fn gaussian(max_degree: usize) -> GeneratorSystem {
        GeneratorSystem {
            blocks: (1..=max_degree)
                .map(|n| (0..n).map(|axis| Generator1D::SecondDerivative { degree: n, axis }).collect())
                .collect(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, n: usize) -> &[Generator1D] {
        &self.blocks[n - 1]
    }

    /// Largest `||A_j(t1) A_k(t2) v - A_k(t2) A_j(t1) v||` over pairs within a block.
    pub fn commutation_defect(&self, probe: &FockState, times: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for block in &self.blocks {
            for (j, a) in block.iter().enumerate() {
                for b in &block[j + 1..] {
                    for &t1 in times {
                        for &t2 in times {
                            let ab = a.apply_semigroup(t1, &b.apply_semigroup(t2, probe)?)?;
                            let ba = b.apply_semigroup(t2, &a.apply_semigroup(t1, probe)?)?;
                            worst = worst.max(ab.distance(&ba)?);
                        }
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// `p~_n(A_n) y` for a single symmetrized term, as the average over distinct
/// slot assignments of composed marginals.
fn term_apply(coeff: Complex64, factors: &[TestFn], block: &[Generator1D], y: &FockState) -> Result<FockState> {
    let n = factors.len();
    let hashes: Vec<u64> = factors.iter().map(TestFn::content_hash).collect();
    let mut assignments: Vec<(Vec<usize>, usize)> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for p in permutations(n) {
        let key: Vec<u64> = p.iter().map(|&i| hashes[i]).collect();
        match seen.get(&key) {
            Some(&pos) => assignments[pos].1 += 1,
            None => {
                seen.insert(key, assignments.len());
                assignments.push((p, 1));
            }
        }
    }
    let norm = 1.0 / factorial(n);
    let mut acc = FockState::zeros(&y.layout);
    for (p, count) in assignments {
        let mut cur = y.clone();
        for (slot, &i) in p.iter().enumerate() {
            cur = marginal_apply(&factors[i], &block[slot], &cur)?;
        }
        acc = acc.axpy(coeff * (count as f64 * norm), &cur)?;
    }
    Ok(acc)
}

/// `p_0 y + sum_{n >= 1} p~_n(A_n) y`.
pub fn calculus_apply(p: &PolyTest, system: &GeneratorSystem, y: &FockState) -> Result<FockState> {
    let top = (1..=p.max_degree()).rev().find(|&n| !p.terms(n).is_empty()).unwrap_or(0);
    if top > system.max_degree() {
        return Err(Error::Configuration(format!(
            "polynomial has degree {top} but the generator system only has {} blocks",
            system.max_degree()
        )));
    }
    let jobs: Vec<(usize, usize)> =
        (1..=top).flat_map(|n| (0..p.terms(n).len()).map(move |k| (n, k))).collect();
    let parts: Vec<FockState> = jobs
        .par_iter()
        .map(|&(n, k)| {
            let term = &p.terms(n)[k];
            term_apply(term.coeff(), term.factors(), system.block(n), y)
        })
        .collect::<Result<_>>()?;
    let mut out = y.scale(p.scalar_part());
    for part in &parts {
        out = out.axpy(ONE, part)?;
    }
    Ok(out)
}

/// Operator shift `T~_s`: the calculus of the shifted symbol.
pub fn opshift_apply(p: &PolyTest, s: f64, system: &GeneratorSystem, y: &FockState) -> Result<FockState> {
    calculus_apply(&poly_shift(p, s)?, system, y)
}

/// `Phi_F p~ = (F ⋆ p)~`.
pub fn phi_apply(f: &PolyDist, p: &PolyTest, system: &GeneratorSystem, y: &FockState) -> Result<FockState> {
    calculus_apply(&cross_corr_poly(f, p)?, system, y)
}

/// Heat kernel `g(tau, xi) = (4 pi tau)^{-1/2} e^{-xi^2 / (4 tau)}` for complex
/// `tau` with `Re tau >= 0`; `tau = -it` gives the kernel of `e^{-it d^2}`.
pub fn heat_kernel(tau: Complex64, xi: f64) -> Complex64 {
    (4.0 * PI * tau).sqrt().inv() * (-(xi * xi) / (4.0 * tau)).exp()
}

/// `e^{tau d^2}` along `axis` of component `degree` as the multiplier `e^{-tau k^2}`.
pub fn heat_apply(tau: Complex64, degree: usize, axis: usize, y: &FockState) -> Result<FockState> {
    if tau.re < 0.0 {
        return Err(Error::Domain(format!("heat time needs Re tau >= 0, got {tau}")));
    }
    Generator1D::SecondDerivative { degree, axis }.check_state(y)?;
    let mut out = y.clone();
    let ks = y.layout.wavenumbers(degree);
    let m = y.layout.nodes(degree);
    apply_axis_multiplier(&mut out.comps[degree - 1], degree, m, axis, &ks, |k| (-tau * k * k).exp());
    Ok(out)
}

/// `e^{-i t.D_n^2}` on component `n = ts.len()`: one time per coordinate.
/// Refuses times at which the state's content would travel around the box.
pub fn gaussian_apply(ts: &[f64], y: &FockState) -> Result<FockState> {
    let n = ts.len();
    if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::Domain(format!("Gaussian semigroup time must be >= 0, got {t}")));
    }
    if n == 0 {
        return Ok(y.clone());
    }
    if n > y.layout.max_degree() {
        return Err(Error::Configuration(format!("state has no component of degree {n}")));
    }
    let ks = y.layout.wavenumbers(n);
    let m = y.layout.nodes(n);
    let mut out = y.clone();
    for (axis, &t) in ts.iter().enumerate() {
        let kc = content_wavenumber(&out.comps[n - 1], n, m, axis, &ks);
        if 2.0 * kc * t > y.layout.half_width {
            return Err(Error::Resolution(format!(
                "content at |k| = {kc:.3} travels {:.3} > L = {} within t = {t}; aliasing",
                2.0 * kc * t,
                y.layout.half_width
            )));
        }
        out = Generator1D::SecondDerivative { degree: n, axis }.apply_semigroup(t, &out)?;
    }
    Ok(out)
}

/// Free-space evolution of `e^{-xi^2 / (2a)}` under `e^{-it d^2}`:
/// `(a / (a - 2it))^{1/2} e^{-xi^2 / (2 (a - 2it))}`.
pub fn propagated_gaussian(a: f64, t: f64, xi: f64) -> Complex64 {
    let sigma = Complex64::new(a, -2.0 * t);
    (a / sigma).sqrt() * (-(xi * xi) / (2.0 * sigma)).exp()
}

/// Outcome of [`contraction_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub max_ratio: f64,
    pub violations: usize,
    pub samples: usize,
}

impl ContractionReport {
    pub fn certified(&self) -> bool {
        self.violations == 0
    }
}

/// Deterministic probe states: a Gaussian, a modulated Gaussian and a
/// symmetrized product of shifted Gaussians.
pub fn probe_states(layout: &Arc<FockLayout>) -> Vec<FockState> {
    let g = |x: f64, c: f64, w: f64| (-(x - c) * (x - c) / (2.0 * w)).exp();
    vec![
        FockState::from_fn(layout, ONE, |_, xi| Complex64::new(xi.iter().map(|&x| g(x, 0.0, 2.0)).product(), 0.0)),
        FockState::from_fn(layout, Complex64::new(0.0, 1.0), |_, xi| {
            xi.iter().map(|&x| g(x, 0.5, 1.0) * Complex64::from_polar(1.0, 1.5 * x)).product()
        }),
        FockState::from_fn(layout, Complex64::new(-0.5, 0.0), |n, xi| {
            let perms = permutations(n);
            let centers = [-1.0, 0.7, 2.0];
            let s: f64 = perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(j, &i)| g(xi[j], centers[i], 1.5)).product::<f64>())
                .sum();
            Complex64::new(s / factorial(n), 0.0)
        }),
    ]
}

/// `max ||e^{-itA} v|| / ||v||` over `t_samples` and the probe states.
pub fn contraction_report(a: &Generator1D, t_samples: &[f64], probes: &[FockState]) -> Result<ContractionReport> {
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    let mut samples = 0;
    for v in probes {
        let base = v.norm();
        if base == 0.0 {
            continue;
        }
        for &t in t_samples {
            let r = a.apply_semigroup(t, v)?.norm() / base;
            max_ratio = max_ratio.max(r);
            if r > 1.0 + CONTRACTION_SLACK {
                violations += 1;
            }
            samples += 1;
        }
    }
    Ok(ContractionReport { max_ratio, violations, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{delta_at, Distribution};
    use crate::fock::{boxtimes, poly_d_dist, poly_d_test, power_dist, power_test};
    use crate::halfline::{build_grid, sample_real, Grid, QuadratureRule};
    use crate::transforms::laplace_fn;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn time_grid() -> Arc<Grid> {
        build_grid(1024, 40.0, QuadratureRule::Gregory).unwrap()
    }

    fn wide_gaussian(layout: &Arc<FockLayout>) -> FockState {
        FockState::from_fn(layout, c(0.5), |_, xi| c(xi.iter().map(|x| (-x * x / 8.0).exp()).product()))
    }

    #[test]
    fn block_index_formulas() {
        assert_eq!(block_indices(0), None);
        assert_eq!(block_indices(1), Some((1, 1)));
        assert_eq!(block_indices(2), Some((2, 3)));
        assert_eq!(block_indices(3), Some((4, 6)));
        let flat: Vec<Generator1D> = (0..6).map(|k| Generator1D::Scalar(c(k as f64))).collect();
        let sys = GeneratorSystem::from_flat(flat.clone()).unwrap();
        assert_eq!(sys.block(3), &flat[3..6]);
        assert!(GeneratorSystem::from_flat(flat[..4].to_vec()).is_err());
    }

    #[test]
    fn scalar_marginal_is_laplace() {
        let g = time_grid();
        let layout = FockLayout::new(12.0, vec![64]).unwrap();
        let v = wide_gaussian(&layout);
        let phi = sample_real(|t| t * (-t).exp(), &g).unwrap();
        let lam = Complex64::new(1.0, 1.0);
        let a = Generator1D::Scalar(-Complex64::i() * lam);
        let got = marginal_apply(&phi, &a, &v).unwrap();
        let expect = v.scale(laplace_fn(&phi, lam).unwrap());
        assert!(got.distance(&expect).unwrap() <= 1e-12);
        let zero = FockState::zeros(&layout);
        assert_eq!(marginal_apply(&phi, &a, &zero).unwrap().norm(), 0.0);
        let scaled = marginal_apply(&phi.scale(c(3.0)), &a, &v).unwrap();
        assert!(scaled.distance(&got.scale(c(3.0))).unwrap() <= 1e-12);
        let fast = Generator1D::Scalar(c(500.0));
        assert!(matches!(marginal_apply(&phi, &fast, &v), Err(Error::Resolution(_))));
    }

    #[test]
    fn fast_marginal_matches_orbit_sum() {
        let g = build_grid(64, 8.0, QuadratureRule::Gregory).unwrap();
        let layout = FockLayout::new(12.0, vec![128, 32]).unwrap();
        let v = wide_gaussian(&layout);
        let chi = sample_real(|t| (-t).exp(), &g).unwrap();
        for a in [Generator1D::SecondDerivative { degree: 1, axis: 0 }, Generator1D::SecondDerivative { degree: 2, axis: 1 }] {
            let fast = marginal_apply(&chi, &a, &v).unwrap();
            let orbit = marginal_apply_orbit(&chi, &a, &v).unwrap();
            assert!(fast.distance(&orbit).unwrap() <= 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn calculus_closed_forms() {
        let g = time_grid();
        let layout = FockLayout::new(12.0, vec![32, 16]).unwrap();
        let y = wide_gaussian(&layout);
        let sys = GeneratorSystem::gaussian(2);
        let scalar_only = PolyTest::scalar(c(2.5), 2);
        assert!(calculus_apply(&scalar_only, &sys, &y).unwrap().distance(&y.scale(c(2.5))).unwrap() <= 1e-15);

        let lams = vec![vec![Complex64::new(0.0, -1.0)], vec![Complex64::new(0.5, -2.0), Complex64::new(-1.0, -0.5)]];
        let scalar_sys = GeneratorSystem::scalar(&lams).unwrap();
        let a = sample_real(|t| (-t).exp(), &g).unwrap();
        let b = sample_real(|t| t * (-t).exp(), &g).unwrap();
        let mut p = PolyTest::scalar(c(0.25), 2);
        p.push_term(c(2.0), vec![a.clone()]).unwrap();
        p.push_term(c(-1.0), vec![a.clone(), b.clone()]).unwrap();
        let got = calculus_apply(&p, &scalar_sys, &y).unwrap();
        // e^{-it lambda} = e^{-(i lambda) t}
        let l = |lam: Complex64| Complex64::i() * lam;
        let la = |z: Complex64| 1.0 / (z + 1.0);
        let lb = |z: Complex64| 1.0 / ((z + 1.0) * (z + 1.0));
        let (z1, z2, z3) = (l(lams[0][0]), l(lams[1][0]), l(lams[1][1]));
        let factor = 0.25 + 2.0 * la(z1) - 0.5 * (la(z2) * lb(z3) + lb(z2) * la(z3));
        assert!(got.distance(&y.scale(factor)).unwrap() <= 1e-8 * y.norm());

        let too_high = power_test(&a, 3);
        assert!(matches!(calculus_apply(&too_high, &scalar_sys, &y), Err(Error::Configuration(_))));
    }

    #[test]
    fn rank_one_factorization_matches_tensor_quadrature() {
        let g = build_grid(16, 4.0, QuadratureRule::Gregory).unwrap();
        let layout = FockLayout::new(12.0, vec![32, 32]).unwrap();
        let y = wide_gaussian(&layout);
        let sys = GeneratorSystem::gaussian(2);
        let a = sample_real(|t| (-t).exp(), &g).unwrap();
        let b = sample_real(|t| (-t * t).exp(), &g).unwrap();
        let mut p = PolyTest::zero(2);
        p.push_term(c(1.0), vec![a, b]).unwrap();
        let got = calculus_apply(&p, &sys, &y).unwrap();
        let (t, w) = (g.nodes(), g.weights());
        let (a1, a2) = (&sys.block(2)[0], &sys.block(2)[1]);
        let mut brute = FockState::zeros(&layout);
        for i in 0..t.len() {
            for j in 0..t.len() {
                let v = a1.apply_semigroup(t[i], &a2.apply_semigroup(t[j], &y).unwrap()).unwrap();
                brute = brute.axpy(p.eval(&[t[i], t[j]]) * w[i] * w[j], &v).unwrap();
            }
        }
        assert!(got.distance(&brute).unwrap() <= 1e-10 * (1.0 + y.norm()));
        assert!(got.symmetry_error() <= 1e-10);
    }

    #[test]
    fn operator_shift_and_representation() {
        let g = time_grid();
        let layout = FockLayout::new(12.0, vec![32, 16]).unwrap();
        let y = wide_gaussian(&layout);
        let lams = vec![vec![Complex64::new(0.0, -1.0)], vec![Complex64::new(1.0, -1.0), Complex64::new(0.0, -2.0)]];
        let sys = GeneratorSystem::scalar(&lams).unwrap();
        let a = 1.5;
        let phi = sample_real(|t| (-a * t).exp(), &g).unwrap();
        let p = power_test(&phi, 2);
        assert_eq!(opshift_apply(&p, 0.0, &sys, &y).unwrap(), calculus_apply(&p, &sys, &y).unwrap());

        let p1 = power_test(&phi, 1).sub(&PolyTest::scalar(c(1.0), 1)).unwrap();
        let s = 0.75;
        let shifted = opshift_apply(&p1, s, &sys, &y).unwrap();
        let plain = calculus_apply(&p1, &sys, &y).unwrap();
        assert!(shifted.distance(&plain.scale(c((-a * s).exp()))).unwrap() <= 1e-8 * y.norm());

        let unit = PolyDist::unit(2);
        assert!(phi_apply(&unit, &p, &sys, &y).unwrap().distance(&calculus_apply(&p, &sys, &y).unwrap()).unwrap() <= 1e-14);

        let f = power_dist(&delta_at(1.0, 0).unwrap(), 2);
        let gd = power_dist(&Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap()), 2);
        let q = power_test(&sample_real(|t| t * t * (-t).exp(), &g).unwrap(), 2);
        let lhs = phi_apply(&boxtimes(&f, &gd).unwrap(), &q, &sys, &y).unwrap();
        let rhs = phi_apply(&f, &cross_corr_poly(&gd, &q).unwrap(), &sys, &y).unwrap();
        assert!(lhs.distance(&rhs).unwrap() <= 1e-6 * (1.0 + y.norm()));

        let d_side = phi_apply(&poly_d_dist(&f).unwrap(), &q, &sys, &y).unwrap();
        let p_side = phi_apply(&f, &poly_d_test(&q).unwrap(), &sys, &y).unwrap();
        assert!(d_side.axpy(c(1.0), &p_side).unwrap().norm() <= 1e-4 * (1.0 + y.norm()));

        for s in [0.3, 1.0] {
            let ab = phi_apply(&gd, &poly_shift(&q, s).unwrap(), &sys, &y).unwrap();
            let ba = opshift_apply(&cross_corr_poly(&gd, &q).unwrap(), s, &sys, &y).unwrap();
            assert!(ab.distance(&ba).unwrap() <= 1e-6 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn gaussian_semigroup() {
        let layout = FockLayout::desk(2).unwrap();
        let y = FockState::from_fn(&layout, c(1.0), |_, xi| c(xi.iter().map(|x| (-x * x / 2.0).exp()).product()));
        assert_eq!(gaussian_apply(&[0.0], &y).unwrap(), y);
        let t = 0.5;
        let got = gaussian_apply(&[t], &y).unwrap();
        let exact = FockState::from_fn(&layout, c(1.0), |n, xi| {
            if n == 1 {
                propagated_gaussian(1.0, t, xi[0])
            } else {
                c(xi.iter().map(|x| (-x * x / 2.0).exp()).product())
            }
        });
        assert!(got.distance(&exact).unwrap() <= 1e-6 * y.norm());
        assert!((got.norm() - y.norm()).abs() <= 1e-10 * y.norm());

        let twice = gaussian_apply(&[0.3], &gaussian_apply(&[0.2], &y).unwrap()).unwrap();
        assert!(twice.distance(&got).unwrap() <= 1e-10 * y.norm());

        let ab = gaussian_apply(&[0.2, 0.4], &y).unwrap();
        let a = Generator1D::SecondDerivative { degree: 2, axis: 0 };
        let b = Generator1D::SecondDerivative { degree: 2, axis: 1 };
        let ba = a.apply_semigroup(0.2, &b.apply_semigroup(0.4, &y).unwrap()).unwrap();
        assert!(ab.distance(&ba).unwrap() <= 1e-10 * y.norm());
        assert!(GeneratorSystem::gaussian(2).commutation_defect(&y, &[0.1, 0.7]).unwrap() <= 1e-10);

        assert!(matches!(gaussian_apply(&[-0.1], &y), Err(Error::Domain(_))));
        assert!(matches!(gaussian_apply(&[5.0], &y), Err(Error::Resolution(_))));
    }

    #[test]
    fn multiplier_equals_heat_kernel_convolution() {
        let layout = FockLayout::new(12.0, vec![256]).unwrap();
        let y = FockState::from_fn(&layout, ZERO, |_, xi| c((-(xi[0] - 0.5).powi(2) / 2.0).exp()));
        let tau = Complex64::new(0.05, -0.1);
        let got = heat_apply(tau, 1, 0, &y).unwrap();
        let xs = layout.coords(1);
        let dx = layout.spacing(1);
        let direct: Vec<Complex64> = xs
            .iter()
            .map(|&x| xs.iter().zip(y.component(1)).map(|(&e, v)| heat_kernel(tau, x - e) * v * dx).sum())
            .collect();
        let err = got.component(1).iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn contraction_reports() {
        let layout = FockLayout::new(12.0, vec![64, 16]).unwrap();
        let probes = probe_states(&layout);
        let ts = [0.0, 0.1, 0.5, 1.0, 2.0];
        let damped = contraction_report(&Generator1D::Scalar(-Complex64::i() * Complex64::new(0.5, 2.0)), &ts, &probes).unwrap();
        assert!(damped.certified() && damped.max_ratio <= 1.0);
        let unitary =
            contraction_report(&Generator1D::SecondDerivative { degree: 2, axis: 1 }, &ts, &probes).unwrap();
        assert!(unitary.certified() && (unitary.max_ratio - 1.0).abs() <= 1e-10);
        let growing = contraction_report(&Generator1D::Scalar(-Complex64::i() * c(-0.5)), &ts, &probes).unwrap();
        assert!(!growing.certified());
        for p in &probes {
            assert!(p.symmetry_error() <= 1e-12);
        }
    }
}
