//! Distributions supported on the half-line: finitely many Dirac atoms with
//! derivative orders, plus regular densities that may start at an offset.
//!
//! A [`Density`] with offset `b` and profile `rho` denotes the function
//! `t -> rho(t - b)` for `t >= b` and zero before. Keeping the offset
//! explicit makes `delta_b * rho` exact instead of resampling a jump.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::halfline::{
    diff_fn, diff_fn_with, gauss_legendre, integrate, shift_fn, Stencil, TestFn, DEFAULT_DECAY_TOL,
};

/// Highest derivative order an atom may carry.
pub const MAX_ATOM_ORDER: usize = 3;

/// Output nodes below this index use Gauss-Legendre in density convolution.
const SHORT_INTERVAL: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub order: usize,
    pub weight: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub offset: f64,
    pub profile: TestFn,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Distribution {
    atoms: Vec<Atom>,
    densities: Vec<Density>,
    truncated_mass: f64,
}

/// Pairings of a reconstructed symbol against named probe functions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingReport {
    pub probes: Vec<String>,
    pub values: Vec<Complex64>,
}

/// The atom `weight * delta_a^{(m)}`.
pub fn delta_at(a: f64, m: usize) -> Result<Distribution> {
    Distribution::from_parts(vec![Atom { location: a, order: m, weight: Complex64::new(1.0, 0.0) }], Vec::new())
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ATOM_ORDER {
        Err(Error::Capability { order, max: MAX_ATOM_ORDER })
    } else {
        Ok(())
    }
}

impl Distribution {
    /// The convolution unit `delta_0`.
    pub fn unit() -> Distribution {
        Distribution {
            atoms: vec![Atom { location: 0.0, order: 0, weight: Complex64::new(1.0, 0.0) }],
            ..Default::default()
        }
    }

    pub fn zero() -> Distribution {
        Distribution::default()
    }

    /// A regular distribution with density `profile` starting at zero.
    pub fn from_density(profile: TestFn) -> Distribution {
        Distribution {
            densities: vec![Density { offset: 0.0, profile }],
            ..Default::default()
        }
        .normalized()
    }

    pub fn from_parts(atoms: Vec<Atom>, densities: Vec<Density>) -> Result<Distribution> {
        for a in &atoms {
            if !(a.location >= 0.0) || !a.location.is_finite() {
                return Err(Error::Support(a.location));
            }
            check_order(a.order)?;
        }
        for d in &densities {
            if !(d.offset >= 0.0) || !d.offset.is_finite() {
                return Err(Error::Support(d.offset));
            }
        }
        if let Some(first) = densities.first() {
            for d in &densities[1..] {
                first.profile.check_same_grid(&d.profile)?;
            }
        }
        Ok(Distribution { atoms, densities, truncated_mass: 0.0 }.normalized())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    /// Estimated mass discarded by truncating density convolutions at `t_max`
    /// (total minus retained mass, so it includes quadrature error).
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub(crate) fn with_truncated_mass(mut self, mass: f64) -> Self {
        self.truncated_mass = mass;
        self
    }

    pub fn is_atomic(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.densities.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.atoms.iter().map(|a| a.order).max().unwrap_or(0)
    }

    fn normalized(mut self) -> Distribution {
        self.atoms.sort_by(|x, y| x.location.total_cmp(&y.location).then(x.order.cmp(&y.order)));
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for a in self.atoms {
            match atoms.last_mut() {
                Some(last) if last.location == a.location && last.order == a.order => {
                    last.weight += a.weight
                }
                _ => atoms.push(a),
            }
        }
        atoms.retain(|a| a.weight != ZERO);
        self.atoms = atoms;

        self.densities.sort_by(|x, y| x.offset.total_cmp(&y.offset));
        let mut densities: Vec<Density> = Vec::with_capacity(self.densities.len());
        for d in self.densities {
            match densities.last_mut() {
                Some(last) if last.offset == d.offset => {
                    last.profile = last
                        .profile
                        .axpy(Complex64::new(1.0, 0.0), &d.profile)
                        .expect("densities share a grid");
                }
                _ => densities.push(d),
            }
        }
        densities.retain(|d| d.profile.max_abs() != 0.0);
        self.densities = densities;
        self
    }

    pub fn scale(&self, c: Complex64) -> Distribution {
        let atoms = self.atoms.iter().map(|a| Atom { weight: a.weight * c, ..*a }).collect();
        let densities = self
            .densities
            .iter()
            .map(|d| Density { offset: d.offset, profile: d.profile.scale(c) })
            .collect();
        Distribution { atoms, densities, truncated_mass: self.truncated_mass * c.norm() }
            .normalized()
    }

    pub fn add(&self, other: &Distribution) -> Result<Distribution> {
        if let (Some(a), Some(b)) = (self.densities.first(), other.densities.first()) {
            a.profile.check_same_grid(&b.profile)?;
        }
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut densities = self.densities.clone();
        densities.extend(other.densities.iter().cloned());
        Ok(Distribution {
            atoms,
            densities,
            truncated_mass: self.truncated_mass + other.truncated_mass,
        }
        .normalized())
    }

    /// Largest coefficient-level difference between two representations:
    /// atoms are matched on `(location, order)`, densities on offset.
    pub fn distance(&self, other: &Distribution) -> Result<f64> {
        let diff = self.add(&other.scale(Complex64::new(-1.0, 0.0)))?;
        let atoms = diff.atoms.iter().map(|a| a.weight.norm()).fold(0.0, f64::max);
        let dens = diff.densities.iter().map(|d| d.profile.max_abs()).fold(0.0, f64::max);
        Ok(atoms.max(dens))
    }

    /// Stable hash over atoms and density samples.
    pub fn content_hash(&self) -> u64 {
        let mut bytes = Vec::new();
        for a in &self.atoms {
            bytes.extend_from_slice(&a.location.to_bits().to_le_bytes());
            bytes.extend_from_slice(&(a.order as u64).to_le_bytes());
            bytes.extend_from_slice(&a.weight.re.to_bits().to_le_bytes());
            bytes.extend_from_slice(&a.weight.im.to_bits().to_le_bytes());
        }
        for d in &self.densities {
            bytes.extend_from_slice(&d.offset.to_bits().to_le_bytes());
            bytes.extend_from_slice(&d.profile.content_hash().to_le_bytes());
        }
        crate::fnv1a(bytes)
    }
}

/// Derivatives `phi, ..., phi^{(max)}` by repeated sixth-order differentiation.
fn derivative_ladder(phi: &TestFn, max: usize) -> Result<Vec<TestFn>> {
    check_order(max)?;
    let mut out = vec![phi.clone()];
    for _ in 0..max {
        let next = diff_fn_with(out.last().expect("non-empty"), Stencil::Sixth)?;
        out.push(next);
    }
    Ok(out)
}

fn sign(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `<f, phi>`.
pub fn pair(f: &Distribution, phi: &TestFn) -> Result<Complex64> {
    let ladder = derivative_ladder(phi, f.max_order())?;
    let mut acc = ZERO;
    for a in &f.atoms {
        acc += a.weight * sign(a.order) * ladder[a.order].eval(a.location);
    }
    for d in &f.densities {
        d.profile.check_same_grid(phi)?;
        let shifted = if d.offset == 0.0 { phi.clone() } else { shift_fn(phi, d.offset)? };
        acc += integrate(&d.profile.mul(&shifted)?);
    }
    Ok(acc)
}

/// Density convolution on a uniform grid, truncated at `t_max`.
/// Returns the profile and the magnitude of the truncated mass.
fn convolve_profiles(a: &TestFn, b: &TestFn) -> Result<(TestFn, f64)> {
    a.check_same_grid(b)?;
    let grid = a.grid();
    let n = grid.n_points();
    let (av, bv) = (a.values(), b.values());
    let nodes = grid.nodes();
    let (gx, gw) = gauss_legendre(8);
    let mut out = vec![ZERO; n];
    for (k, slot) in out.iter_mut().enumerate() {
        if k < SHORT_INTERVAL {
            // Too few nodes for endpoint corrections: Gauss-Legendre on
            // interpolated samples instead.
            let t = nodes[k];
            *slot = gx
                .iter()
                .zip(&gw)
                .map(|(x, w)| {
                    let u = 0.5 * t * (1.0 + x);
                    a.eval(u) * b.eval(t - u) * (0.5 * t * w)
                })
                .sum();
        } else {
            let w = grid.partial_weights(k)?;
            *slot = (0..=k).map(|j| av[j] * bv[k - j] * w[j]).sum();
        }
    }
    let profile = TestFn::from_values(Arc::clone(grid), out)
        .with_truncation_bound(a.truncation_bound() + b.truncation_bound());
    let total = integrate(a) * integrate(b);
    let kept = integrate(&profile);
    Ok((profile, (total - kept).norm()))
}

/// `f * g`.
pub fn convolve(f: &Distribution, g: &Distribution) -> Result<Distribution> {
    let mut atoms = Vec::new();
    let mut densities = Vec::new();
    let mut truncated = f.truncated_mass + g.truncated_mass;

    for x in &f.atoms {
        for y in &g.atoms {
            let order = x.order + y.order;
            check_order(order)?;
            atoms.push(Atom { location: x.location + y.location, order, weight: x.weight * y.weight });
        }
    }

    let mut atom_on_density = |atom: &Atom, d: &Density| -> Result<()> {
        let ladder = derivative_ladder(&d.profile, atom.order)?;
        let start = d.offset + atom.location;
        // D^m of a density cut off at its start picks up boundary atoms.
        for k in 0..atom.order {
            let order = atom.order - 1 - k;
            let weight = atom.weight * ladder[k].values()[0];
            atoms.push(Atom { location: start, order, weight });
        }
        densities.push(Density {
            offset: start,
            profile: ladder[atom.order].scale(atom.weight),
        });
        Ok(())
    };
    for x in &f.atoms {
        for d in &g.densities {
            atom_on_density(x, d)?;
        }
    }
    for y in &g.atoms {
        for d in &f.densities {
            atom_on_density(y, d)?;
        }
    }

    for x in &f.densities {
        for y in &g.densities {
            let (profile, lost) = convolve_profiles(&x.profile, &y.profile)?;
            truncated += lost;
            densities.push(Density { offset: x.offset + y.offset, profile });
        }
    }

    let mut out = Distribution::from_parts(atoms, densities)?;
    out.truncated_mass = truncated;
    Ok(out)
}

/// `(f * phi)(s) = <f, T_s phi>` sampled at the nodes of `phi`'s grid.
pub fn cross_correlate(f: &Distribution, phi: &TestFn) -> Result<TestFn> {
    let grid = phi.grid();
    let n = grid.n_points();
    let ladder = derivative_ladder(phi, f.max_order())?;
    let mut out = TestFn::zeros(grid);
    for a in &f.atoms {
        let shifted = shift_fn(&ladder[a.order], a.location)?;
        out = out.axpy(a.weight * sign(a.order), &shifted)?;
    }
    for d in &f.densities {
        d.profile.check_same_grid(phi)?;
        let psi = if d.offset == 0.0 { phi.clone() } else { shift_fn(phi, d.offset)? };
        let weighted: Vec<Complex64> = d
            .profile
            .values()
            .iter()
            .zip(grid.weights())
            .map(|(r, w)| r * *w)
            .collect();
        let values: Vec<Complex64> = if grid.spacing().is_some() {
            let pv = psi.values();
            (0..n).map(|k| (0..n - k).map(|i| weighted[i] * pv[i + k]).sum()).collect()
        } else {
            let nodes = grid.nodes();
            nodes
                .iter()
                .map(|&s| (0..n).map(|i| weighted[i] * psi.eval(nodes[i] + s)).sum())
                .collect()
        };
        let part = TestFn::from_values(Arc::clone(grid), values);
        out = out.axpy(Complex64::new(1.0, 0.0), &part)?;
    }
    Ok(out.with_decay_tag(phi.decay_tag()))
}

/// Generalized derivative `<Df, phi> = -<f, D phi>`.
///
/// Densities must vanish at their support start: the boundary atom that a
/// jump would produce is refused rather than silently dropped.
pub fn distr_derivative(f: &Distribution) -> Result<Distribution> {
    let mut atoms = Vec::with_capacity(f.atoms.len());
    for a in &f.atoms {
        check_order(a.order + 1)?;
        atoms.push(Atom { order: a.order + 1, ..*a });
    }
    let mut densities = Vec::with_capacity(f.densities.len());
    for d in &f.densities {
        let at_start = d.profile.values()[0].norm();
        if at_start > DEFAULT_DECAY_TOL * d.profile.max_abs().max(1.0) {
            return Err(Error::BoundaryTerm { value: at_start });
        }
        densities.push(Density { offset: d.offset, profile: diff_fn(&d.profile)? });
    }
    let mut out = Distribution::from_parts(atoms, densities)?;
    out.truncated_mass = f.truncated_mass;
    Ok(out)
}

/// Recovers the symbol `h` of a shift-commuting operator `K` through
/// `<h, phi> = (K phi)(0)`, reported as pairings against each probe.
pub fn reconstruct_symbol<K>(k: K, probes: &[(String, TestFn)]) -> Result<PairingReport>
where
    K: Fn(&TestFn) -> Result<TestFn>,
{
    let mut names = Vec::with_capacity(probes.len());
    let mut values = Vec::with_capacity(probes.len());
    for (name, probe) in probes {
        let image = k(probe).map_err(|e| Error::Operator(format!("probe {name}: {e}")))?;
        names.push(name.clone());
        values.push(image.values()[0]);
    }
    Ok(PairingReport { probes: names, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfline::{build_grid, sample_real, Grid, QuadratureRule};

    fn grid() -> Arc<Grid> {
        build_grid(1024, 40.0, QuadratureRule::Gregory).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constructors() {
        let unit = delta_at(0.0, 0).unwrap();
        assert_eq!(unit, Distribution::unit());
        assert_eq!(delta_at(1.0, 0).unwrap().atoms()[0].location, 1.0);
        assert_eq!(delta_at(0.0, 1).unwrap().atoms()[0].order, 1);
        assert!(matches!(delta_at(-0.5, 0), Err(Error::Support(_))));
        assert!(matches!(delta_at(0.0, 4), Err(Error::Capability { .. })));
    }

    #[test]
    fn merging_and_zero_removal() {
        let a = Atom { location: 1.0, order: 0, weight: c(2.0) };
        let b = Atom { location: 1.0, order: 0, weight: c(-2.0) };
        let d = Distribution::from_parts(vec![a, b], vec![]).unwrap();
        assert!(d.is_zero());
        let e = Distribution::from_parts(vec![a, a], vec![]).unwrap();
        assert_eq!(e.atoms().len(), 1);
        assert_eq!(e.atoms()[0].weight, c(4.0));
    }

    #[test]
    fn pairings() {
        let g = grid();
        let e = sample_real(|t| (-t).exp(), &g).unwrap();
        let v = pair(&Distribution::unit(), &e).unwrap();
        assert!((v - c(1.0)).norm() < 1e-14);
        let v = pair(&delta_at(1.0, 1).unwrap(), &e).unwrap();
        // fourth-order stencil: h^4 / 30 * e^-1 ~ 3e-8
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-7, "{v}");
        let f = Distribution::from_density(sample_real(|t| t * (-t).exp(), &g).unwrap());
        let v = pair(&f, &e).unwrap();
        assert!((v.re - 0.25).abs() < 1e-8, "{v}");
    }

    #[test]
    fn convolution_examples() {
        let g = grid();
        let ab = convolve(&delta_at(0.5, 0).unwrap(), &delta_at(1.25, 0).unwrap()).unwrap();
        assert_eq!(ab, delta_at(1.75, 0).unwrap());

        let f = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap())
            .add(&delta_at(2.0, 1).unwrap())
            .unwrap();
        assert_eq!(convolve(&Distribution::unit(), &f).unwrap(), f);

        let e1 = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap());
        let e2 = Distribution::from_density(sample_real(|t| (-2.0 * t).exp(), &g).unwrap());
        let conv = convolve(&e1, &e2).unwrap();
        let expect = sample_real(|t| (-t).exp() - (-2.0 * t).exp(), &g).unwrap();
        assert_eq!(conv.densities().len(), 1);
        let err = conv.densities()[0].profile.sup_distance(&expect).unwrap();
        assert!(err < 1e-6, "{err:e}");
        assert!(conv.truncated_mass() < 1e-8);
    }

    #[test]
    fn convolution_is_commutative() {
        let g = grid();
        let rho = sample_real(|t| t * (-t).exp(), &g).unwrap();
        let f = Distribution::from_density(rho).add(&delta_at(0.3, 1).unwrap()).unwrap();
        let h = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap())
            .add(&delta_at(1.0, 0).unwrap())
            .unwrap();
        let fg = convolve(&f, &h).unwrap();
        let gf = convolve(&h, &f).unwrap();
        assert!(fg.distance(&gf).unwrap() <= 1e-12);
    }

    #[test]
    fn derivative_atom_on_jump_density_gets_boundary_atom() {
        let g = grid();
        let e = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap());
        let conv = convolve(&delta_at(0.0, 1).unwrap(), &e).unwrap();
        // D(e^-t 1_{t>=0}) = -e^-t + delta
        assert_eq!(conv.atoms().len(), 1);
        assert_eq!(conv.atoms()[0].order, 0);
        assert!((conv.atoms()[0].weight - c(1.0)).norm() < 1e-15);
        let phi = sample_real(|t| (-t * t).exp(), &g).unwrap();
        // <delta' * e, phi> = -<e, phi'> computed independently
        let lhs = pair(&conv, &phi).unwrap();
        let rhs = -pair(&e, &diff_fn(&phi).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-5, "{lhs} {rhs}");
    }

    #[test]
    fn cross_correlation_examples() {
        let g = grid();
        let phi = sample_real(|t| (-t * t).exp(), &g).unwrap();
        assert_eq!(cross_correlate(&Distribution::unit(), &phi).unwrap(), phi);
        let a = 0.7;
        let out = cross_correlate(&delta_at(a, 0).unwrap(), &phi).unwrap();
        for (i, &s) in g.nodes().iter().enumerate().take(200) {
            assert!((out.values()[i].re - (-(a + s) * (a + s)).exp()).abs() < 1e-9);
        }

        let f = delta_at(1.0, 0).unwrap();
        let h = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap());
        let lhs = cross_correlate(&convolve(&f, &h).unwrap(), &phi).unwrap();
        let rhs = cross_correlate(&f, &cross_correlate(&h, &phi).unwrap()).unwrap();
        assert!(lhs.sup_distance(&rhs).unwrap() < 1e-6);
    }

    #[test]
    fn cross_correlation_intertwines_shift() {
        let g = grid();
        let phi = sample_real(|t| t * t * (-t).exp(), &g).unwrap();
        let f = Distribution::from_density(sample_real(|t| t * (-t).exp(), &g).unwrap())
            .add(&delta_at(1.0, 0).unwrap())
            .unwrap();
        for s in [0.0, 0.3, 1.0] {
            let lhs = cross_correlate(&f, &shift_fn(&phi, s).unwrap()).unwrap();
            let rhs = shift_fn(&cross_correlate(&f, &phi).unwrap(), s).unwrap();
            assert!(lhs.sup_distance(&rhs).unwrap() < 1e-6, "s = {s}");
        }
    }

    #[test]
    fn derivative_examples() {
        let g = grid();
        let d = distr_derivative(&delta_at(1.5, 0).unwrap()).unwrap();
        assert_eq!(d, delta_at(1.5, 1).unwrap());

        let f = Distribution::from_density(sample_real(|t| t * (-t).exp(), &g).unwrap());
        let df = distr_derivative(&f).unwrap();
        let expect = sample_real(|t| (1.0 - t) * (-t).exp(), &g).unwrap();
        assert!(df.densities()[0].profile.sup_distance(&expect).unwrap() < 1e-6);

        let atoms = delta_at(1.0, 0)
            .unwrap()
            .add(&delta_at(0.4, 2).unwrap().scale(c(-0.5)))
            .unwrap();
        let phi = sample_real(|t| t * t * (-t).exp(), &g).unwrap();
        let lhs = pair(&distr_derivative(&atoms).unwrap(), &phi).unwrap();
        let rhs = pair(&atoms, &diff_fn_with(&phi, Stencil::Sixth).unwrap()).unwrap();
        assert!((lhs + rhs).norm() <= 1e-8);

        let jump = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap());
        assert!(matches!(distr_derivative(&jump), Err(Error::BoundaryTerm { .. })));
        assert!(matches!(
            distr_derivative(&delta_at(0.0, 3).unwrap()),
            Err(Error::Capability { .. })
        ));
    }

    #[test]
    fn symbol_reconstruction() {
        let g = grid();
        let probes: Vec<(String, TestFn)> = vec![
            ("exp".into(), sample_real(|t| (-t).exp(), &g).unwrap()),
            ("gauss".into(), sample_real(|t| (-t * t).exp(), &g).unwrap()),
            ("t2exp".into(), sample_real(|t| t * t * (-t).exp(), &g).unwrap()),
        ];
        let id = reconstruct_symbol(|p| Ok(p.clone()), &probes).unwrap();
        for (v, (_, p)) in id.values.iter().zip(&probes) {
            assert_eq!(*v, p.values()[0]);
        }
        let a = 0.8;
        let da = delta_at(a, 0).unwrap();
        let rep = reconstruct_symbol(|p| cross_correlate(&da, p), &probes).unwrap();
        for (v, (_, p)) in rep.values.iter().zip(&probes) {
            assert!((v - pair(&da, p).unwrap()).norm() < 1e-12);
        }
        let f = Distribution::from_density(sample_real(|t| (-t).exp(), &g).unwrap());
        let rep = reconstruct_symbol(|p| cross_correlate(&f, p), &probes).unwrap();
        for (v, (_, p)) in rep.values.iter().zip(&probes) {
            assert!((v - pair(&f, p).unwrap()).norm() < 1e-6);
        }
        let failing = reconstruct_symbol(|_| Err(Error::Domain("nope".into())), &probes);
        assert!(matches!(failing, Err(Error::Operator(_))));
    }
}
