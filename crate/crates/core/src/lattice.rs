//! Periodic chain geometry: deformations, difference stencils and the
//! discrete norms `ℓ^p_ε`, `U^{1,p}` and `U^{-1,p}`.
//!
//! Sites are stored 0-based; index `i` is the lattice site `ξ ≡ i (mod N)`,
//! so site `0` and site `N` coincide. Every stencil wraps periodically.
//! Because `ε = 1/N`, any length-`N` sequence carries its own spacing and the
//! norm functions take only the sequence.

use crate::error::{BqcError, Result};

/// Relative tolerance used when deciding whether a sequence is mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// Relative tolerance on the net force accepted by [`forces_to_dual`].
pub const FORCE_BALANCE_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn prev(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

#[inline]
pub(crate) fn next(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

/// Period of the chain. The spacing is always `ε = 1/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeConfig {
    n_atoms: usize,
}

impl LatticeConfig {
    /// Smallest period on which the `y‴` and `Δ²` stencils touch distinct sites.
    pub const MIN_ATOMS: usize = 5;

    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms < Self::MIN_ATOMS {
            return Err(BqcError::InvalidLattice(format!(
                "N = {n_atoms} is below the minimum period {}",
                Self::MIN_ATOMS
            )));
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n_atoms as f64
    }

    /// Reference coordinate `x = εξ` of site `i`.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_atoms {
            return Err(BqcError::LengthMismatch {
                expected: self.n_atoms,
                got: len,
            });
        }
        Ok(())
    }
}

/// Subtracts the arithmetic mean in place.
pub fn project_mean_zero(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= mean);
}

fn mean_zero_tolerance(values: &[f64], rel: f64) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    rel * values.len() as f64 * max
}

/// N-periodic displacement with zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    values: Vec<f64>,
}

impl Displacement {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    /// Projects arbitrary site values onto the mean-zero subspace.
    pub fn project(mut values: Vec<f64>) -> Self {
        project_mean_zero(&mut values);
        Self { values }
    }

    /// Accepts values that are already mean-zero up to [`MEAN_ZERO_TOL`]
    /// and removes the residual drift.
    pub fn try_from_mean_zero(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        let tol = mean_zero_tolerance(&values, MEAN_ZERO_TOL);
        if sum.abs() > tol {
            return Err(BqcError::NotMeanZero { sum, tol });
        }
        Ok(Self::project(values))
    }

    /// Periodic antiderivative of a mean-zero strain field:
    /// `u_i - u_{i-1} = ε w_i`, then re-centred.
    pub fn from_strain(strain: &[f64]) -> Self {
        let n = strain.len();
        let eps = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &w in strain {
            acc += eps * w;
            values.push(acc);
        }
        Self::project(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `self + t·other`, re-projected.
    pub fn axpy(&self, t: f64, other: &Displacement) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + t * b)
            .collect();
        Self::project(values)
    }

    /// Discrete derivative `u'_i = (u_i - u_{i-1})/ε`.
    pub fn derivative(&self) -> Vec<f64> {
        delta(&self.values)
            .into_iter()
            .map(|d| d * self.values.len() as f64)
            .collect()
    }
}

/// Deformation `y_ξ = Fεξ + u_ξ` with macroscopic strain `F`.
///
/// Only `F` and the displacement are stored. Difference quotients are formed
/// from `u` directly so that uniform states have exactly constant strain.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformation {
    config: LatticeConfig,
    strain_f: f64,
    displacement: Displacement,
}

impl Deformation {
    pub fn uniform(config: LatticeConfig, strain_f: f64) -> Result<Self> {
        Self::new(config, strain_f, Displacement::zeros(config.n_atoms()))
    }

    pub fn new(config: LatticeConfig, strain_f: f64, displacement: Displacement) -> Result<Self> {
        config.check_len(displacement.len())?;
        if !(strain_f > 0.0) || !strain_f.is_finite() {
            return Err(BqcError::InvalidLattice(format!(
                "macroscopic strain F = {strain_f} must be positive"
            )));
        }
        Ok(Self {
            config,
            strain_f,
            displacement,
        })
    }

    pub fn config(&self) -> LatticeConfig {
        self.config
    }

    pub fn strain_f(&self) -> f64 {
        self.strain_f
    }

    pub fn displacement(&self) -> &Displacement {
        &self.displacement
    }

    pub fn with_displacement(&self, displacement: Displacement) -> Result<Self> {
        Self::new(self.config, self.strain_f, displacement)
    }

    /// `y + t·u` for a test displacement `u`.
    pub fn perturbed(&self, t: f64, direction: &Displacement) -> Result<Self> {
        self.config.check_len(direction.len())?;
        Ok(Self {
            config: self.config,
            strain_f: self.strain_f,
            displacement: self.displacement.axpy(t, direction),
        })
    }

    /// Site positions over one period.
    pub fn positions(&self) -> Vec<f64> {
        let eps = self.config.spacing();
        self.displacement
            .values()
            .iter()
            .enumerate()
            .map(|(i, u)| self.strain_f * eps * i as f64 + u)
            .collect()
    }

    pub fn min_strain(&self) -> f64 {
        diff1(self).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_admissible(&self) -> bool {
        self.min_strain() > 0.0
    }

    /// Errors on the first site with `y'_ξ ≤ 0`.
    pub fn check_admissible(&self) -> Result<Vec<f64>> {
        let strain = diff1(self);
        if let Some((site, &s)) = strain.iter().enumerate().find(|(_, s)| !(**s > 0.0)) {
            return Err(BqcError::NonpositiveStrain { site, strain: s });
        }
        Ok(strain)
    }

    /// Checks `min y' ≥ r*/2`, the regime where second-neighbour Hessian
    /// coefficients are nonnegative.
    pub fn check_inflection_floor(&self, inflection: f64) -> Result<Vec<f64>> {
        let strain = self.check_admissible()?;
        let min = strain.iter().copied().fold(f64::INFINITY, f64::min);
        let floor = 0.5 * inflection;
        if min < floor {
            return Err(BqcError::BelowInflectionFloor { min, floor });
        }
        Ok(strain)
    }
}

/// `y'_ξ = (y_ξ - y_{ξ-1})/ε`.
pub fn diff1(d: &Deformation) -> Vec<f64> {
    let f = d.strain_f();
    d.displacement()
        .derivative()
        .into_iter()
        .map(|w| f + w)
        .collect()
}

/// `y''_ξ = (y_{ξ+1} - 2y_ξ + y_{ξ-1})/ε²`.
pub fn diff2(d: &Deformation) -> Vec<f64> {
    let n = d.config().n_atoms() as f64;
    delta2(d.displacement().values())
        .into_iter()
        .map(|v| v * n * n)
        .collect()
}

/// `y'''_ξ = (y_{ξ+1} - 3y_ξ + 3y_{ξ-1} - y_{ξ-2})/ε³`.
pub fn diff3(d: &Deformation) -> Vec<f64> {
    let u = d.displacement().values();
    let n = u.len();
    let scale = (n as f64).powi(3);
    (0..n)
        .map(|i| {
            let im1 = prev(i, n);
            let im2 = prev(im1, n);
            (u[next(i, n)] - 3.0 * u[i] + 3.0 * u[im1] - u[im2]) * scale
        })
        .collect()
}

/// `s̄_ξ = (s_ξ + s_{ξ-1})/2`.
pub fn mean_seq(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    (0..n).map(|i| 0.5 * (s[i] + s[prev(i, n)])).collect()
}

/// `Δs_ξ = s_ξ - s_{ξ-1}`.
pub fn delta(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    (0..n).map(|i| s[i] - s[prev(i, n)]).collect()
}

/// `Δ²s_ξ = s_{ξ+1} - 2s_ξ + s_{ξ-1}`.
pub fn delta2(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    (0..n)
        .map(|i| s[next(i, n)] - 2.0 * s[i] + s[prev(i, n)])
        .collect()
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(BqcError::InvalidExponent(p));
    }
    Ok(())
}

/// `‖s‖_{ℓ^p_ε(P)} = (ε Σ_{ξ∈P} |s_ξ|^p)^{1/p}`, or the max over `P` when
/// `p = ∞`. `P` defaults to every site; `ε = 1/s.len()`.
pub fn lp_norm(s: &[f64], p: f64, subset: Option<&[usize]>) -> Result<f64> {
    check_exponent(p)?;
    if s.is_empty() {
        return Ok(0.0);
    }
    let eps = 1.0 / s.len() as f64;
    let mut values: Box<dyn Iterator<Item = f64>> = match subset {
        Some(idx) => Box::new(idx.iter().map(|&i| s[i].abs())),
        None => Box::new(s.iter().map(|v| v.abs())),
    };
    if p.is_infinite() {
        return Ok(values.fold(0.0, f64::max));
    }
    if p == 1.0 {
        return Ok(eps * values.sum::<f64>());
    }
    if p == 2.0 {
        return Ok((eps * values.map(|v| v * v).sum::<f64>()).sqrt());
    }
    // scale by the max to keep |s|^p representable
    let collected: Vec<f64> = values.by_ref().collect();
    let max = collected.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = collected.iter().map(|v| (v / max).powf(p)).sum();
    Ok(max * (eps * sum).powf(1.0 / p))
}

/// `‖u‖_{U^{1,p}} = ‖u'‖_{ℓ^p_ε}`.
pub fn u1p_norm(u: &Displacement, p: f64) -> Result<f64> {
    lp_norm(&u.derivative(), p, None)
}

/// Linear functional on mean-zero displacements in strain form
/// `g(u) = ε Σ T_ξ u'_ξ`. The representative `T` is kept mean-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFunctional {
    strain_rep: Vec<f64>,
}

impl DualFunctional {
    /// Canonicalises `T` by removing its mean, which does not change the
    /// functional on periodic displacements.
    pub fn from_strain_rep(mut strain_rep: Vec<f64>) -> Self {
        project_mean_zero(&mut strain_rep);
        Self { strain_rep }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            strain_rep: vec![0.0; n],
        }
    }

    pub fn strain_rep(&self) -> &[f64] {
        &self.strain_rep
    }

    pub fn len(&self) -> usize {
        self.strain_rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strain_rep.is_empty()
    }

    /// `g(u) = ε Σ T_ξ u'_ξ`.
    pub fn apply(&self, u: &Displacement) -> f64 {
        let eps = 1.0 / self.len() as f64;
        eps * self
            .strain_rep
            .iter()
            .zip(u.derivative())
            .map(|(t, w)| t * w)
            .sum::<f64>()
    }

    /// Site forces `f_ξ = (T_ξ - T_{ξ+1})/ε`, so that `g(u) = ε Σ f_ξ u_ξ`.
    pub fn site_forces(&self) -> Vec<f64> {
        let n = self.len();
        let inv_eps = n as f64;
        (0..n)
            .map(|i| (self.strain_rep[i] - self.strain_rep[next(i, n)]) * inv_eps)
            .collect()
    }

    pub fn sub(&self, other: &DualFunctional) -> Self {
        Self::from_strain_rep(
            self.strain_rep
                .iter()
                .zip(&other.strain_rep)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn norm(&self, p: f64) -> Result<f64> {
        dual_norm(self, p)
    }
}

/// `U^{-1,p}` norm: `min_c ‖T - c‖_{ℓ^p_ε}`.
///
/// Closed forms for `p ∈ {1, 2, ∞}` (median, mean, midrange); golden-section
/// search over `c ∈ [min T, max T]` otherwise.
pub fn dual_norm(g: &DualFunctional, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let t = g.strain_rep();
    if t.is_empty() {
        return Ok(0.0);
    }
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted = |c: f64| -> Vec<f64> { t.iter().map(|v| v - c).collect() };
    if p.is_infinite() {
        return Ok(0.5 * (hi - lo));
    }
    if p == 2.0 {
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        return lp_norm(&shifted(mean), 2.0, None);
    }
    if p == 1.0 {
        let mut sorted = t.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        return lp_norm(&shifted(median), 1.0, None);
    }
    let spread = hi - lo;
    if spread == 0.0 {
        return Ok(0.0);
    }
    let objective = |c: f64| lp_norm(&shifted(c), p, None).unwrap_or(f64::INFINITY);
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > 1e-12 * spread {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    Ok(objective(0.5 * (a + b)).min(fc).min(fd))
}

/// Strain representation of the dead-load pairing `u ↦ ε Σ f_ξ u_ξ`.
///
/// Requires `Σ f = 0`; builds `T_{ξ+1} = T_ξ - ε f_ξ` and removes the mean.
pub fn forces_to_dual(f: &[f64]) -> Result<DualFunctional> {
    let sum: f64 = f.iter().sum();
    let tol = mean_zero_tolerance(f, FORCE_BALANCE_TOL);
    if sum.abs() > tol {
        return Err(BqcError::NotMeanZero { sum, tol });
    }
    let n = f.len();
    let eps = 1.0 / n as f64;
    let mut t = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &fi in f {
        t.push(acc);
        acc -= eps * fi;
    }
    Ok(DualFunctional::from_strain_rep(t))
}
