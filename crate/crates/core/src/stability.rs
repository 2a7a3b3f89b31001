//! Coercivity `c(y) = inf { δ²Φ(y)[u,u] : ‖u′‖_{ℓ²_ε} = 1 }`, the stability
//! bounds built on the Hessian-coefficient gap, and critical strains.
//!
//! Everything is computed in strain coordinates `w = u′` restricted to the
//! mean-zero subspace, where the metric is the plain `ℓ²_ε` norm and the
//! quotient reduces to the smallest eigenvalue of `Zᵀ K Z`.

use nalgebra::DMatrix;

use crate::energy::{ConsistencyTerms, EnergyModel};
use crate::error::{BqcError, Result};
use crate::lattice::{Deformation, LatticeConfig};
use crate::linalg::{is_positive_definite, smallest_eigenpair, strain_form_matrix, MeanZeroBasis};

/// Largest period handled by the dense eigensolver.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Default bisection width for [`critical_strain`].
pub const DEFAULT_CRITICAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub coercivity: f64,
    /// Minimising strain mode `w = u′`, normalised to `‖w‖_{ℓ²_ε} = 1`.
    pub mode: Vec<f64>,
    /// `A̲ = min_ξ A_ξ` of the atomistic model at the same state.
    pub a_underline: f64,
    /// `None` when `min y′ < r*/2`.
    pub bound_a_priori: Option<f64>,
    pub bound_a_posteriori: Option<f64>,
}

fn projected_hessian(m: &EnergyModel, y: &Deformation, cap: usize) -> Result<(MeanZeroBasis, DMatrix<f64>)> {
    let n = m.n_atoms();
    if n > cap {
        return Err(BqcError::TooLarge { n, cap });
    }
    let coeffs = m.second_variation(y)?;
    let basis = MeanZeroBasis::new(n);
    let projected = basis.project(&strain_form_matrix(&coeffs));
    Ok((basis, projected))
}

/// Smallest eigenvalue of the Hessian form and its mode.
pub fn coercivity_constant(m: &EnergyModel, y: &Deformation) -> Result<(f64, Vec<f64>)> {
    coercivity_constant_with_cap(m, y, DEFAULT_DENSE_CAP)
}

pub fn coercivity_constant_with_cap(m: &EnergyModel, y: &Deformation, cap: usize) -> Result<(f64, Vec<f64>)> {
    let (basis, projected) = projected_hessian(m, y, cap)?;
    let (lambda, a) = smallest_eigenpair(projected);
    let scale = (m.n_atoms() as f64).sqrt();
    let mode = basis.lift(&a).into_iter().map(|w| w * scale).collect();
    Ok((lambda, mode))
}

/// Coercivity, mode and (when `min y′ ≥ r*/2`) both stability bounds.
pub fn coercivity(m: &EnergyModel, y: &Deformation) -> Result<StabilityReport> {
    let (c, mode) = coercivity_constant(m, y)?;
    let a_underline = m.reference().second_variation(y)?.min_a();
    let (bound_a_priori, bound_a_posteriori) = match gap_bound(m, y) {
        Ok(gap) => (Some(a_underline - gap), Some(c - gap)),
        Err(BqcError::BelowInflectionFloor { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(StabilityReport {
        coercivity: c,
        mode,
        a_underline,
        bound_a_priori,
        bound_a_posteriori,
    })
}

/// `c(y) > 0`, decided by a Cholesky factorisation of the projected form.
pub fn is_stable(m: &EnergyModel, y: &Deformation) -> Result<bool> {
    let (_, projected) = projected_hessian(m, y, DEFAULT_DENSE_CAP)?;
    Ok(is_positive_definite(projected))
}

fn gap_bound(m: &EnergyModel, y: &Deformation) -> Result<f64> {
    y.check_inflection_floor(m.potential().inflection())?;
    ConsistencyTerms::new(m, y)?.hessian_gap_bound()
}

/// `A̲ − 2C̄₂‖2(1 − α − β̄)‖_∞ − 2εC̄₃‖Δβ y″‖_∞ − 2ε²{C̄₃‖(1 − β_{ξ−1})y‴‖_∞
/// + C̄₄‖(1 − β)(y″)²‖_∞}`, a lower bound for the model coercivity.
/// The ghost term is `2C̄₂‖Δ²α‖_∞` for BQCE and vanishes for BQNL.
pub fn a_priori_bound(m: &EnergyModel, y: &Deformation) -> Result<f64> {
    let gap = gap_bound(m, y)?;
    Ok(m.reference().second_variation(y)?.min_a() - gap)
}

/// Model coercivity minus the same correction terms, a lower bound for the
/// atomistic coercivity.
pub fn a_posteriori_bound(m: &EnergyModel, y: &Deformation) -> Result<f64> {
    let gap = gap_bound(m, y)?;
    Ok(coercivity_constant(m, y)?.0 - gap)
}

/// Bracket `[0.9 r*, r*]`: Cauchy-Born and atomistic chains are stable at
/// the left end for the shipped potentials and unstable at `r*`.
pub fn default_bracket(m: &EnergyModel) -> (f64, f64) {
    let r = m.potential().inflection();
    (0.9 * r, r)
}

/// Final bisection bracket `[lo, hi]` with `c(y^{lo}) > 0 ≥ c(y^{hi})` and
/// `hi − lo ≤ tol`.
pub fn critical_strain_bracket(m: &EnergyModel, search: (f64, f64), tol: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = search;
    if !(tol > 0.0) || !(lo < hi) {
        return Err(BqcError::NoBracket { lo, hi });
    }
    let config = LatticeConfig::new(m.n_atoms())?;
    let stable_at = |f: f64| -> Result<bool> {
        let y = Deformation::uniform(config, f)?;
        is_stable(m, &y)
    };
    if !stable_at(lo)? || stable_at(hi)? {
        return Err(BqcError::NoBracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// `F* = inf { F : c(y^F) ≤ 0 }` by bisection to width `tol` (midpoint of
/// the final bracket).
pub fn critical_strain(m: &EnergyModel, search: (f64, f64), tol: f64) -> Result<f64> {
    let (lo, hi) = critical_strain_bracket(m, search, tol)?;
    Ok(0.5 * (lo + hi))
}
