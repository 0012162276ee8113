//! Graded algebras of polynomial test functions and polynomial distributions.
//!
//! A [`PolyTest`] holds, for every degree `n <= N`, a list of symmetrized
//! elementary tensors `c * Sym(phi_1 (x) ... (x) phi_n)`. A [`PolyDist`] holds
//! diagonal terms `c * f^{(x)n}`; derivatives of diagonal terms leave that
//! family and are stored as general symmetric terms `c * Sym(f_1 (x) ... (x) f_n)`.
//!
//! The product [`boxtimes`] is degreewise: `(f^n) (*) (g^n) = ((f * g)^n)`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::distributions::{convolve, cross_correlate, distr_derivative, pair, Distribution};
use crate::error::{Error, Result};
use crate::halfline::{diff_fn, shift_fn, Grid, TestFn};

/// Degree cap used when none is configured.
pub const DEFAULT_MAX_DEGREE: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `c * Sym(factors)`; factors are kept sorted by content hash.
#[derive(Debug, Clone, PartialEq)]
pub struct TestTerm {
    coeff: Complex64,
    factors: Vec<TestFn>,
}

impl TestTerm {
    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn factors(&self) -> &[TestFn] {
        &self.factors
    }

    fn key(&self) -> Vec<u64> {
        self.factors.iter().map(TestFn::content_hash).collect()
    }
}

/// Element of the graded test algebra, truncated at `max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTest {
    max_degree: usize,
    degrees: Vec<Vec<TestTerm>>,
}

/// `c * f^{(x)n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagTerm {
    coeff: Complex64,
    base: Distribution,
}

impl DiagTerm {
    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn base(&self) -> &Distribution {
        &self.base
    }
}

/// `c * Sym(f_1 (x) ... (x) f_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralTerm {
    coeff: Complex64,
    factors: Vec<Distribution>,
}

impl GeneralTerm {
    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn factors(&self) -> &[Distribution] {
        &self.factors
    }
}

/// Element of the graded distribution algebra, truncated at `max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyDist {
    max_degree: usize,
    diag: Vec<Vec<DiagTerm>>,
    general: Vec<Vec<GeneralTerm>>,
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

fn sort_by_hash<T, F: Fn(&T) -> u64>(items: &mut [T], hash: F) {
    items.sort_by_cached_key(|x| hash(x));
}

impl PolyTest {
    /// The zero element.
    pub fn zero(max_degree: usize) -> PolyTest {
        PolyTest { max_degree, degrees: vec![Vec::new(); max_degree + 1] }
    }

    /// The constant `c` (degree 0 only).
    pub fn scalar(c: Complex64, max_degree: usize) -> PolyTest {
        let mut p = PolyTest::zero(max_degree);
        p.degrees[0].push(TestTerm { coeff: c, factors: Vec::new() });
        p.normalize();
        p
    }

    /// Adds `coeff * Sym(factors)` at degree `factors.len()`.
    pub fn push_term(&mut self, coeff: Complex64, factors: Vec<TestFn>) -> Result<()> {
        let n = factors.len();
        if n > self.max_degree {
            return Err(Error::Parameter(format!(
                "term of degree {n} exceeds max_degree {}",
                self.max_degree
            )));
        }
        if let Some(first) = factors.first() {
            for f in &factors[1..] {
                first.check_same_grid(f)?;
            }
            if let Some(g) = self.grid() {
                if !g.same_as(first.grid()) {
                    return Err(Error::GridMismatch("term grid differs from existing terms".into()));
                }
            }
        }
        self.degrees[n].push(TestTerm { coeff, factors });
        self.normalize();
        Ok(())
    }

    fn normalize(&mut self) {
        for terms in &mut self.degrees {
            for t in terms.iter_mut() {
                sort_by_hash(&mut t.factors, TestFn::content_hash);
            }
            terms.sort_by_cached_key(TestTerm::key);
            let mut merged: Vec<TestTerm> = Vec::with_capacity(terms.len());
            for t in terms.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.factors == t.factors => last.coeff += t.coeff,
                    _ => merged.push(t),
                }
            }
            merged.retain(|t| t.coeff != ZERO);
            *terms = merged;
        }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Terms at degree `n` (empty beyond `max_degree`).
    pub fn terms(&self, n: usize) -> &[TestTerm] {
        self.degrees.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The degree-0 coefficient.
    pub fn scalar_part(&self) -> Complex64 {
        self.degrees[0].iter().map(|t| t.coeff).sum()
    }

    pub fn term_count(&self) -> usize {
        self.degrees.iter().map(Vec::len).sum()
    }

    /// Grid shared by all factors, if any factor exists.
    pub fn grid(&self) -> Option<&Arc<Grid>> {
        self.degrees.iter().flatten().flat_map(|t| t.factors.first()).map(TestFn::grid).next()
    }

    /// Same element viewed with a different degree cap; higher degrees are dropped.
    pub fn with_max_degree(&self, max_degree: usize) -> PolyTest {
        let mut degrees = self.degrees.clone();
        degrees.resize(max_degree + 1, Vec::new());
        PolyTest { max_degree, degrees }
    }

    pub fn scale(&self, c: Complex64) -> PolyTest {
        let mut out = self.clone();
        for t in out.degrees.iter_mut().flatten() {
            t.coeff *= c;
        }
        out.normalize();
        out
    }

    pub fn add(&self, other: &PolyTest) -> Result<PolyTest> {
        if let (Some(a), Some(b)) = (self.grid(), other.grid()) {
            if !a.same_as(b) {
                return Err(Error::GridMismatch("cannot add polynomials on different grids".into()));
            }
        }
        let n = self.max_degree.max(other.max_degree);
        let mut out = self.with_max_degree(n);
        for (k, terms) in other.degrees.iter().enumerate() {
            out.degrees[k].extend(terms.iter().cloned());
        }
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &PolyTest) -> Result<PolyTest> {
        self.add(&other.scale(-ONE))
    }

    /// Value of the degree-`ts.len()` component at `(t_1, ..., t_n)`.
    pub fn eval(&self, ts: &[f64]) -> Complex64 {
        let n = ts.len();
        let perms = permutations(n);
        let norm = 1.0 / factorial(n);
        let mut acc = ZERO;
        for term in self.terms(n) {
            let vals: Vec<Vec<Complex64>> =
                term.factors.iter().map(|f| ts.iter().map(|&t| f.eval(t)).collect()).collect();
            let s: Complex64 = perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(j, &i)| vals[i][j]).product::<Complex64>())
                .sum();
            acc += term.coeff * s * norm;
        }
        acc
    }

    /// Degree-`n` component on the grid node tuple `idx`.
    fn eval_nodes(&self, n: usize, idx: &[usize], perms: &[Vec<usize>]) -> Complex64 {
        let norm = 1.0 / factorial(n);
        self.terms(n)
            .iter()
            .map(|term| {
                let s: Complex64 = perms
                    .iter()
                    .map(|p| {
                        p.iter()
                            .enumerate()
                            .map(|(j, &i)| term.factors[i].values()[idx[j]])
                            .product::<Complex64>()
                    })
                    .sum();
                term.coeff * s * norm
            })
            .sum()
    }

    /// Max over degrees of the sup-norm difference, evaluated on the grid for
    /// degree 1 and on a strided sub-grid for higher degrees.
    pub fn sup_distance(&self, other: &PolyTest) -> Result<f64> {
        let grid = match (self.grid(), other.grid()) {
            (Some(a), Some(b)) if !a.same_as(b) => {
                return Err(Error::GridMismatch("polynomials live on different grids".into()))
            }
            (Some(a), _) | (None, Some(a)) => Some(Arc::clone(a)),
            (None, None) => None,
        };
        let mut worst = (self.scalar_part() - other.scalar_part()).norm();
        let Some(grid) = grid else { return Ok(worst) };
        let npts = grid.n_points();
        let top = self.max_degree.max(other.max_degree);
        for n in 1..=top {
            if self.terms(n).is_empty() && other.terms(n).is_empty() {
                continue;
            }
            let per_axis = match n {
                1 => npts,
                2 => 64,
                _ => 24,
            };
            let stride = npts.div_ceil(per_axis).max(1);
            let axis: Vec<usize> = (0..npts).step_by(stride).collect();
            let perms = permutations(n);
            let mut idx = vec![0usize; n];
            let mut counter = vec![0usize; n];
            loop {
                for j in 0..n {
                    idx[j] = axis[counter[j]];
                }
                let d = self.eval_nodes(n, &idx, &perms) - other.eval_nodes(n, &idx, &perms);
                worst = worst.max(d.norm());
                let mut j = 0;
                while j < n {
                    counter[j] += 1;
                    if counter[j] < axis.len() {
                        break;
                    }
                    counter[j] = 0;
                    j += 1;
                }
                if j == n {
                    break;
                }
            }
        }
        Ok(worst)
    }

    /// Largest truncation bound over all factors.
    pub fn truncation_bound(&self) -> f64 {
        self.degrees
            .iter()
            .flatten()
            .flat_map(|t| &t.factors)
            .map(TestFn::truncation_bound)
            .fold(0.0, f64::max)
    }
}

impl PolyDist {
    pub fn zero(max_degree: usize) -> PolyDist {
        PolyDist {
            max_degree,
            diag: vec![Vec::new(); max_degree + 1],
            general: vec![Vec::new(); max_degree + 1],
        }
    }

    /// The unit `(delta^{(x)n})_n`.
    pub fn unit(max_degree: usize) -> PolyDist {
        power_dist(&Distribution::unit(), max_degree)
    }

    /// Adds `coeff * base^{(x)n}`. At degree 0 the base is ignored.
    pub fn push_diag(&mut self, n: usize, coeff: Complex64, base: Distribution) -> Result<()> {
        self.check_degree(n)?;
        let base = if n == 0 { Distribution::unit() } else { base };
        self.diag[n].push(DiagTerm { coeff, base });
        self.normalize();
        Ok(())
    }

    /// Adds `coeff * Sym(factors)` as a general term.
    pub fn push_general(&mut self, coeff: Complex64, factors: Vec<Distribution>) -> Result<()> {
        let n = factors.len();
        self.check_degree(n)?;
        if n == 0 {
            self.diag[0].push(DiagTerm { coeff, base: Distribution::unit() });
        } else {
            self.general[n].push(GeneralTerm { coeff, factors });
        }
        self.normalize();
        Ok(())
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.max_degree {
            return Err(Error::Parameter(format!(
                "term of degree {n} exceeds max_degree {}",
                self.max_degree
            )));
        }
        Ok(())
    }

    fn normalize(&mut self) {
        for terms in &mut self.diag {
            terms.sort_by_cached_key(|t| t.base.content_hash());
            let mut merged: Vec<DiagTerm> = Vec::with_capacity(terms.len());
            for t in terms.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.base == t.base => last.coeff += t.coeff,
                    _ => merged.push(t),
                }
            }
            merged.retain(|t| t.coeff != ZERO && !t.base.is_zero());
            *terms = merged;
        }
        for terms in &mut self.general {
            for t in terms.iter_mut() {
                sort_by_hash(&mut t.factors, Distribution::content_hash);
            }
            terms.sort_by_cached_key(|t| t.factors.iter().map(Distribution::content_hash).collect::<Vec<_>>());
            let mut merged: Vec<GeneralTerm> = Vec::with_capacity(terms.len());
            for t in terms.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.factors == t.factors => last.coeff += t.coeff,
                    _ => merged.push(t),
                }
            }
            merged.retain(|t| t.coeff != ZERO && t.factors.iter().all(|f| !f.is_zero()));
            *terms = merged;
        }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn diag_terms(&self, n: usize) -> &[DiagTerm] {
        self.diag.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn general_terms(&self, n: usize) -> &[GeneralTerm] {
        self.general.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// True when no general terms are present.
    pub fn is_diagonal(&self) -> bool {
        self.general.iter().all(Vec::is_empty)
    }

    pub fn scalar_part(&self) -> Complex64 {
        self.diag[0].iter().map(|t| t.coeff).sum()
    }

    pub fn with_max_degree(&self, max_degree: usize) -> PolyDist {
        let mut out = self.clone();
        out.max_degree = max_degree;
        out.diag.resize(max_degree + 1, Vec::new());
        out.general.resize(max_degree + 1, Vec::new());
        out
    }

    pub fn scale(&self, c: Complex64) -> PolyDist {
        let mut out = self.clone();
        for t in out.diag.iter_mut().flatten() {
            t.coeff *= c;
        }
        for t in out.general.iter_mut().flatten() {
            t.coeff *= c;
        }
        out.normalize();
        out
    }

    pub fn add(&self, other: &PolyDist) -> PolyDist {
        let n = self.max_degree.max(other.max_degree);
        let mut out = self.with_max_degree(n);
        for (k, terms) in other.diag.iter().enumerate() {
            out.diag[k].extend(terms.iter().cloned());
        }
        for (k, terms) in other.general.iter().enumerate() {
            out.general[k].extend(terms.iter().cloned());
        }
        out.normalize();
        out
    }

    /// Termwise distance between two canonically ordered elements; infinite
    /// when the term structure differs.
    pub fn distance(&self, other: &PolyDist) -> Result<f64> {
        let n = self.max_degree.max(other.max_degree);
        let (a, b) = (self.with_max_degree(n), other.with_max_degree(n));
        let mut worst: f64 = 0.0;
        for k in 0..=n {
            if a.diag[k].len() != b.diag[k].len() || a.general[k].len() != b.general[k].len() {
                return Ok(f64::INFINITY);
            }
            for (x, y) in a.diag[k].iter().zip(&b.diag[k]) {
                worst = worst.max((x.coeff - y.coeff).norm()).max(x.base.distance(&y.base)?);
            }
            for (x, y) in a.general[k].iter().zip(&b.general[k]) {
                worst = worst.max((x.coeff - y.coeff).norm());
                for (f, g) in x.factors.iter().zip(&y.factors) {
                    worst = worst.max(f.distance(g)?);
                }
            }
        }
        Ok(worst)
    }

    pub fn content_hash(&self) -> u64 {
        let mut bytes = Vec::new();
        for (k, terms) in self.diag.iter().enumerate() {
            for t in terms {
                bytes.extend((k as u64).to_le_bytes());
                bytes.extend(t.coeff.re.to_bits().to_le_bytes());
                bytes.extend(t.coeff.im.to_bits().to_le_bytes());
                bytes.extend(t.base.content_hash().to_le_bytes());
            }
        }
        for (k, terms) in self.general.iter().enumerate() {
            for t in terms {
                bytes.extend((k as u64 | 1 << 63).to_le_bytes());
                bytes.extend(t.coeff.re.to_bits().to_le_bytes());
                bytes.extend(t.coeff.im.to_bits().to_le_bytes());
                for f in &t.factors {
                    bytes.extend(f.content_hash().to_le_bytes());
                }
            }
        }
        crate::fnv1a(bytes)
    }
}

/// `(phi^{(x)n})_{n <= N}` with unit coefficients; degree 0 is the scalar 1.
pub fn power_test(phi: &TestFn, max_degree: usize) -> PolyTest {
    let mut p = PolyTest::zero(max_degree);
    for n in 0..=max_degree {
        p.degrees[n].push(TestTerm { coeff: ONE, factors: vec![phi.clone(); n] });
    }
    p
}

/// `(f^{(x)n})_{n <= N}` with unit coefficients.
pub fn power_dist(f: &Distribution, max_degree: usize) -> PolyDist {
    let mut p = PolyDist::zero(max_degree);
    p.diag[0].push(DiagTerm { coeff: ONE, base: Distribution::unit() });
    if !f.is_zero() {
        for n in 1..=max_degree {
            p.diag[n].push(DiagTerm { coeff: ONE, base: f.clone() });
        }
    }
    p
}

/// Degreewise product `(f^n) (*) (g^n) = ((f * g)^n)`, extended bilinearly.
/// Only diagonal elements are accepted.
pub fn boxtimes(f: &PolyDist, g: &PolyDist) -> Result<PolyDist> {
    if !f.is_diagonal() || !g.is_diagonal() {
        return Err(Error::Unsupported("the degreewise product takes diagonal operands only".into()));
    }
    let n = f.max_degree.max(g.max_degree);
    let (f, g) = (f.with_max_degree(n), g.with_max_degree(n));
    let mut out = PolyDist::zero(n);
    out.diag[0].push(DiagTerm { coeff: f.scalar_part() * g.scalar_part(), base: Distribution::unit() });
    let mut cache: HashMap<(u64, u64), Distribution> = HashMap::new();
    for k in 1..=n {
        for a in &f.diag[k] {
            for b in &g.diag[k] {
                let key = (a.base.content_hash(), b.base.content_hash());
                let base = match cache.get(&key) {
                    Some(d) => d.clone(),
                    None => {
                        let d = convolve(&a.base, &b.base)?;
                        cache.insert(key, d.clone());
                        d
                    }
                };
                out.diag[k].push(DiagTerm { coeff: a.coeff * b.coeff, base });
            }
        }
    }
    out.normalize();
    Ok(out)
}

/// Memoized `f ⋆ phi` keyed by content hashes.
struct CorrCache(HashMap<(u64, u64), TestFn>);

impl CorrCache {
    fn get(&mut self, f: &Distribution, phi: &TestFn) -> Result<TestFn> {
        let key = (f.content_hash(), phi.content_hash());
        if let Some(v) = self.0.get(&key) {
            return Ok(v.clone());
        }
        let v = cross_correlate(f, phi)?;
        self.0.insert(key, v.clone());
        Ok(v)
    }
}

/// Polynomial cross-correlation `F ⋆ p`: `f^{(x)n}` acts slotwise on every
/// symmetrized term; general terms act through all slot assignments.
pub fn cross_corr_poly(f: &PolyDist, p: &PolyTest) -> Result<PolyTest> {
    let n = f.max_degree.max(p.max_degree);
    let (f, p) = (f.with_max_degree(n), p.with_max_degree(n));
    let mut out = PolyTest::zero(n);
    let c0 = f.scalar_part() * p.scalar_part();
    if c0 != ZERO {
        out.degrees[0].push(TestTerm { coeff: c0, factors: Vec::new() });
    }
    let mut cache = CorrCache(HashMap::new());
    for k in 1..=n {
        let perms = permutations(k);
        let norm = 1.0 / factorial(k);
        for term in &p.degrees[k] {
            for a in &f.diag[k] {
                let factors =
                    term.factors.iter().map(|phi| cache.get(&a.base, phi)).collect::<Result<Vec<_>>>()?;
                out.degrees[k].push(TestTerm { coeff: a.coeff * term.coeff, factors });
            }
            for g in &f.general[k] {
                for rho in &perms {
                    let factors = term
                        .factors
                        .iter()
                        .enumerate()
                        .map(|(j, phi)| cache.get(&g.factors[rho[j]], phi))
                        .collect::<Result<Vec<_>>>()?;
                    out.degrees[k].push(TestTerm { coeff: g.coeff * term.coeff * norm, factors });
                }
            }
        }
    }
    out.normalize();
    Ok(out)
}

/// `T_s^{(x)n}` on every degree: each factor is shifted by the same `s`.
pub fn poly_shift(p: &PolyTest, s: f64) -> Result<PolyTest> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!("shift must be a finite s >= 0, got {s}")));
    }
    let mut cache: HashMap<u64, TestFn> = HashMap::new();
    let mut out = p.clone();
    for term in out.degrees.iter_mut().flatten() {
        for phi in term.factors.iter_mut() {
            let key = phi.content_hash();
            let shifted = match cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let v = shift_fn(phi, s)?;
                    cache.insert(key, v.clone());
                    v
                }
            };
            *phi = shifted;
        }
    }
    out.normalize();
    Ok(out)
}

/// The derivation: each term of degree `n` becomes the sum of the `n` terms
/// with one slot differentiated. Degree 0 maps to zero.
pub fn poly_d_test(p: &PolyTest) -> Result<PolyTest> {
    let mut cache: HashMap<u64, TestFn> = HashMap::new();
    let mut out = PolyTest::zero(p.max_degree);
    for (k, terms) in p.degrees.iter().enumerate().skip(1) {
        for term in terms {
            for j in 0..k {
                let key = term.factors[j].content_hash();
                let d = match cache.get(&key) {
                    Some(v) => v.clone(),
                    None => {
                        let v = diff_fn(&term.factors[j])?;
                        cache.insert(key, v.clone());
                        v
                    }
                };
                let mut factors = term.factors.clone();
                factors[j] = d;
                out.degrees[k].push(TestTerm { coeff: term.coeff, factors });
            }
        }
    }
    out.normalize();
    Ok(out)
}

/// The derivation on distributions. Diagonal terms `c f^n` become the general
/// term `n c Sym(Df (x) f^{n-1})`.
pub fn poly_d_dist(f: &PolyDist) -> Result<PolyDist> {
    let mut out = PolyDist::zero(f.max_degree);
    for k in 1..=f.max_degree {
        for a in &f.diag[k] {
            let mut factors = vec![a.base.clone(); k];
            factors[0] = distr_derivative(&a.base)?;
            out.general[k].push(GeneralTerm { coeff: a.coeff * k as f64, factors });
        }
        for g in &f.general[k] {
            for j in 0..k {
                let mut factors = g.factors.clone();
                factors[j] = distr_derivative(&g.factors[j])?;
                out.general[k].push(GeneralTerm { coeff: g.coeff, factors });
            }
        }
    }
    out.normalize();
    Ok(out)
}

/// Graded pairing `sum_n <F_n, p_n>`.
pub fn poly_pair(f: &PolyDist, p: &PolyTest) -> Result<Complex64> {
    let n = f.max_degree.min(p.max_degree);
    let mut acc = f.scalar_part() * p.scalar_part();
    let mut cache: HashMap<(u64, u64), Complex64> = HashMap::new();
    let mut pairing = |d: &Distribution, phi: &TestFn| -> Result<Complex64> {
        let key = (d.content_hash(), phi.content_hash());
        if let Some(v) = cache.get(&key) {
            return Ok(*v);
        }
        let v = pair(d, phi)?;
        cache.insert(key, v);
        Ok(v)
    };
    for k in 1..=n {
        let perms = permutations(k);
        let norm = 1.0 / factorial(k);
        for term in &p.degrees[k] {
            for a in &f.diag[k] {
                let mut prod = a.coeff * term.coeff;
                for phi in &term.factors {
                    prod *= pairing(&a.base, phi)?;
                }
                acc += prod;
            }
            for g in &f.general[k] {
                let mut m = vec![vec![ZERO; k]; k];
                for (i, fi) in g.factors.iter().enumerate() {
                    for (j, phi) in term.factors.iter().enumerate() {
                        m[i][j] = pairing(fi, phi)?;
                    }
                }
                let permanent: Complex64 =
                    perms.iter().map(|rho| (0..k).map(|j| m[rho[j]][j]).product::<Complex64>()).sum();
                acc += g.coeff * term.coeff * permanent * norm;
            }
        }
    }
    Ok(acc)
}
