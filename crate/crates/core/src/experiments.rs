//! Audits and sweeps: modeling-error and stability bound audits on random
//! smooth states, strain-error and critical-strain studies over blend
//! widths, and log-log rate fits.
//!
//! Sweep points run concurrently on the rayon pool; results are always
//! returned in sweep order.

use rand::Rng;
use rayon::prelude::*;

use crate::blend::{BlendFunction, BlendShape};
use crate::energy::{ConsistencyTerms, EnergyModel, ModelKind, ModelingParts};
use crate::error::{BqcError, Result};
use crate::lattice::{dual_norm, lp_norm, mean_seq, Deformation, DualFunctional, LatticeConfig};
use crate::potential::Potential;
use crate::sampling::{random_smooth_state, seeded_rng};
use crate::solve::{equilibrate, DeadLoad, SolveOptions};
use crate::stability::{coercivity, coercivity_constant, critical_strain, default_bracket};
use crate::table::Table;

/// Relative slack when comparing a quantity with a bound that can be
/// attained exactly (the ghost bound at uniform states, for instance).
pub const BOUND_RTOL: f64 = 1e-12;

fn within_bound(value: f64, bound: f64) -> bool {
    value <= bound + BOUND_RTOL * bound.abs()
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

/// Fits `ln y = slope · ln x + intercept`; needs at least three positive points.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(BqcError::InvalidFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(BqcError::InvalidFit(format!(
            "log-log fit needs positive values, got ({x}, {y})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(BqcError::InvalidFit("all abscissae coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: logs,
    })
}

/// `f(x) = a sin(2πx) + b exp(−(x − x₀)²/2w²)`, sampled and mean-projected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSpec {
    pub sin_amplitude: f64,
    pub bump_amplitude: f64,
    pub bump_width: f64,
}

impl Default for LoadSpec {
    fn default() -> Self {
        Self {
            sin_amplitude: 0.1,
            bump_amplitude: 1.0,
            bump_width: 0.05,
        }
    }
}

impl LoadSpec {
    /// The bump sits at `x₀`, the reference coordinate of `center_site`.
    pub fn sample(&self, config: LatticeConfig, center_site: usize) -> DeadLoad {
        let x0 = config.coordinate(center_site);
        let w = self.bump_width;
        DeadLoad::from_profile(config, |x| {
            // periodic distance to the bump centre
            let d = (x - x0) - (x - x0).round();
            self.sin_amplitude * (2.0 * std::f64::consts::PI * x).sin()
                + self.bump_amplitude * (-(d * d) / (2.0 * w * w)).exp()
        })
    }
}

/// Modeling-error audit at one state and exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelingAudit {
    /// `‖δΦ^a(y) − δΦ^model(y)‖_{U^{-1,p}}`.
    pub lhs: f64,
    pub rhs: f64,
    pub parts: ModelingParts,
    /// `U^{-1,p}` norm of the ghost term with the exact factor
    /// `φ′(2y′_ξ)` in place of the envelope `C̄₁`.
    pub ghost_exact: f64,
}

pub fn modeling_error_audit(m: &EnergyModel, y: &Deformation, p: f64) -> Result<ModelingAudit> {
    let reference = m.reference();
    let lhs = dual_norm(&reference.first_variation(y)?.sub(&m.first_variation(y)?), p)?;
    let terms = ConsistencyTerms::new(m, y)?;
    let parts = terms.modeling_parts(p)?;
    let strains = crate::lattice::diff1(y);
    let ghost = DualFunctional::from_strain_rep(
        terms
            .ghost
            .iter()
            .zip(&strains)
            .map(|(g, s)| g * m.potential().d1(2.0 * s))
            .collect(),
    );
    Ok(ModelingAudit {
        lhs,
        rhs: parts.total(),
        parts,
        ghost_exact: dual_norm(&ghost, p)?,
    })
}

/// Parameters of the random smooth states used by the audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSampler {
    pub strain_range: (f64, f64),
    pub amplitude_range: (f64, f64),
    pub max_modes: usize,
}

impl Default for StateSampler {
    /// Keeps `min y′ ≥ 0.7`, above `r*/2` for the shipped potentials.
    fn default() -> Self {
        Self {
            strain_range: (0.9, 1.1),
            amplitude_range: (0.01, 0.2),
            max_modes: 6,
        }
    }
}

impl StateSampler {
    /// State number `index` of the stream for `seed`; independent of any
    /// other index so that parallel sweeps stay deterministic.
    pub fn state(&self, config: LatticeConfig, seed: u64, index: usize) -> Result<Deformation> {
        let mut rng = seeded_rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64));
        let f = rng.gen_range(self.strain_range.0..=self.strain_range.1);
        let amp = rng.gen_range(self.amplitude_range.0..=self.amplitude_range.1);
        let modes = rng.gen_range(1..=self.max_modes.max(1));
        random_smooth_state(config, f, modes, amp, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub trial: usize,
    pub model: ModelKind,
    pub p: f64,
    pub audit: ModelingAudit,
}

impl AuditRow {
    pub fn holds(&self) -> bool {
        within_bound(self.audit.lhs, self.audit.rhs)
    }
}

/// Modeling-error audits of every model on `count` seeded states, for each `p`.
pub fn modeling_audit_sweep(
    models: &[EnergyModel],
    count: usize,
    seed: u64,
    ps: &[f64],
    sampler: &StateSampler,
) -> Result<Vec<AuditRow>> {
    let config = LatticeConfig::new(models.first().map_or(0, |m| m.n_atoms()))?;
    let per_trial: Vec<Result<Vec<AuditRow>>> = (0..count)
        .into_par_iter()
        .map(|trial| {
            let y = sampler.state(config, seed, trial)?;
            let mut rows = Vec::with_capacity(models.len() * ps.len());
            for m in models {
                for &p in ps {
                    rows.push(AuditRow {
                        trial,
                        model: m.kind(),
                        p,
                        audit: modeling_error_audit(m, &y, p)?,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityAuditRow {
    pub trial: usize,
    pub model: ModelKind,
    pub coercivity: f64,
    pub a_priori: f64,
    pub atomistic_coercivity: f64,
    pub a_posteriori: f64,
}

impl StabilityAuditRow {
    pub fn holds(&self) -> bool {
        within_bound(self.a_priori, self.coercivity)
            && within_bound(self.a_posteriori, self.atomistic_coercivity)
    }
}

/// Checks `c_model ≥ a priori bound` and `c_atomistic ≥ a posteriori bound`
/// on seeded states with `min y′ ≥ r*/2`.
pub fn stability_audit_sweep(
    models: &[EnergyModel],
    count: usize,
    seed: u64,
    sampler: &StateSampler,
) -> Result<Vec<StabilityAuditRow>> {
    let config = LatticeConfig::new(models.first().map_or(0, |m| m.n_atoms()))?;
    let per_trial: Vec<Result<Vec<StabilityAuditRow>>> = (0..count)
        .into_par_iter()
        .map(|trial| {
            let y = sampler.state(config, seed, trial)?;
            let atomistic = coercivity_constant(&models[0].reference(), &y)?.0;
            models
                .iter()
                .map(|m| {
                    let r = coercivity(m, &y)?;
                    let floor = || BqcError::BelowInflectionFloor {
                        min: y.min_strain(),
                        floor: 0.5 * m.potential().inflection(),
                    };
                    Ok(StabilityAuditRow {
                        trial,
                        model: m.kind(),
                        coercivity: r.coercivity,
                        a_priori: r.bound_a_priori.ok_or_else(floor)?,
                        atomistic_coercivity: atomistic,
                        a_posteriori: r.bound_a_posteriori.ok_or_else(floor)?,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Sweep over periods, blend shapes and transition widths.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: ModelKind,
    pub potential: Potential,
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub shapes: Vec<BlendShape>,
    pub strain_f: f64,
    pub load: LoadSpec,
    /// Atomistic plateau width in sites, centred at `N/2`.
    pub atomistic_width: usize,
    /// Exponent of the reported modeling-error norms.
    pub p: f64,
    pub solve: SolveOptions,
}

impl SweepSpec {
    /// The canonical study: BQCE, LJ, `N = 1024`, cubic, `k ∈ {4, 8, 16, 32}`,
    /// `F = 1`, a 33-site atomistic plateau and the default load.
    pub fn canonical(model: ModelKind) -> Self {
        Self {
            model,
            potential: Potential::lennard_jones(),
            n_list: vec![1024],
            k_list: vec![4, 8, 16, 32],
            shapes: vec![BlendShape::Cubic],
            strain_f: 1.0,
            load: LoadSpec::default(),
            atomistic_width: 33,
            p: 2.0,
            solve: SolveOptions {
                compute_coercivity: false,
                ..SolveOptions::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.k_list.is_empty() || self.shapes.is_empty() {
            return Err(BqcError::InvalidSweep("n, k and shape lists must be nonempty".into()));
        }
        if matches!(self.model, ModelKind::Custom) {
            return Err(BqcError::InvalidSweep("sweeps need a named model".into()));
        }
        for &n in &self.n_list {
            let config = LatticeConfig::new(n)?;
            for &k in &self.k_list {
                BlendFunction::build(config, BlendShape::Linear, n / 2, self.atomistic_width, k)?;
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<(usize, BlendShape, usize)> {
        let mut pts = Vec::new();
        for &n in &self.n_list {
            for shape in &self.shapes {
                for &k in &self.k_list {
                    pts.push((n, shape.clone(), k));
                }
            }
        }
        pts
    }

    fn blend(&self, n: usize, shape: &BlendShape, k: usize) -> Result<BlendFunction> {
        BlendFunction::build(LatticeConfig::new(n)?, shape.clone(), n / 2, self.atomistic_width, k)
    }
}

/// Which quantity a fit varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitVariable {
    /// Transition width `k` at fixed `N`.
    K,
    /// Spacing `ε = 1/N` at fixed `k`.
    Epsilon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupFit {
    pub variable: FitVariable,
    /// The `N` (for `K`) or `k` (for `Epsilon`) held fixed.
    pub fixed: usize,
    pub shape: String,
    pub fit: RateFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k: usize,
    pub shape: String,
    /// `‖y − y_model‖_{U^{1,2}}`.
    pub error: f64,
    pub a_underline: f64,
    pub min_strain: f64,
    /// Modeling-error bound `η` at the atomistic solution.
    pub eta: f64,
    /// `4η/A̲`.
    pub error_bound: f64,
    /// Left side of the `δ₁` condition (the Hessian-gap bound).
    pub delta1: f64,
    /// Left side of the `δ₂` condition, `ε^{−1/2} η`.
    pub delta2: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub fits: Vec<GroupFit>,
    /// Sweep index and error of the first failed point; `rows` stops there.
    pub failure: Option<(usize, BqcError)>,
}

fn group_fits<R>(
    rows: &[R],
    key: impl Fn(&R) -> (usize, usize, String, f64),
) -> Vec<GroupFit> {
    // key: (n, k, shape, value)
    let mut fits = Vec::new();
    let keyed: Vec<(usize, usize, String, f64)> = rows.iter().map(key).collect();
    let mut groups: Vec<(FitVariable, usize, String)> = Vec::new();
    for (n, k, shape, _) in &keyed {
        for g in [(FitVariable::K, *n, shape.clone()), (FitVariable::Epsilon, *k, shape.clone())] {
            if !groups.contains(&g) {
                groups.push(g);
            }
        }
    }
    for (variable, fixed, shape) in groups {
        let points: Vec<(f64, f64)> = keyed
            .iter()
            .filter(|(n, k, s, _)| {
                *s == shape
                    && match variable {
                        FitVariable::K => *n == fixed,
                        FitVariable::Epsilon => *k == fixed,
                    }
            })
            .map(|(n, k, _, v)| match variable {
                FitVariable::K => (*k as f64, *v),
                FitVariable::Epsilon => (1.0 / *n as f64, *v),
            })
            .collect();
        if let Ok(fit) = fit_rate(&points) {
            fits.push(GroupFit {
                variable,
                fixed,
                shape,
                fit,
            });
        }
    }
    fits
}

struct Reference {
    y: Deformation,
    a_underline: f64,
}

fn reference_solution(spec: &SweepSpec, n: usize) -> Result<Reference> {
    let config = LatticeConfig::new(n)?;
    let atomistic = EnergyModel::atomistic(spec.potential.clone(), config);
    let load = spec.load.sample(config, n / 2);
    let y0 = Deformation::uniform(config, spec.strain_f)?;
    let (y, _) = equilibrate(&atomistic, &load, &y0, &spec.solve)?;
    let a_underline = atomistic.second_variation(&y)?.min_a();
    if !(a_underline > 0.0) {
        return Err(BqcError::InvalidSweep(format!(
            "reference solution at N = {n} is not an elastic state (A̲ = {a_underline})"
        )));
    }
    Ok(Reference { y, a_underline })
}

/// Strain error `‖y − y_model‖_{U^{1,2}}` against the atomistic
/// equilibrium under the same load and period, for every sweep point.
pub fn convergence_study(spec: &SweepSpec) -> Result<ConvergenceStudy> {
    spec.validate()?;
    let references: Vec<Result<Reference>> = spec
        .n_list
        .par_iter()
        .map(|&n| reference_solution(spec, n))
        .collect();
    let points = spec.points();
    let results: Vec<Result<ConvergenceRow>> = points
        .par_iter()
        .map(|(n, shape, k)| {
            let idx = spec.n_list.iter().position(|m| m == n).expect("n from list");
            let reference = references[idx].as_ref().map_err(|e| e.clone())?;
            let config = LatticeConfig::new(*n)?;
            let blend = spec.blend(*n, shape, *k)?;
            let model = EnergyModel::from_kind(spec.model, spec.potential.clone(), &blend)?;
            let load = spec.load.sample(config, n / 2);
            let (y_model, report) = equilibrate(&model, &load, &reference.y, &spec.solve)?;
            let diff: Vec<f64> = crate::lattice::diff1(&reference.y)
                .iter()
                .zip(crate::lattice::diff1(&y_model))
                .map(|(a, b)| a - b)
                .collect();
            let error = lp_norm(&diff, 2.0, None)?;
            let terms = ConsistencyTerms::new(&model, &reference.y)?;
            let eta = terms.modeling_parts(2.0)?.total();
            let eps = config.spacing();
            Ok(ConvergenceRow {
                n: *n,
                k: *k,
                shape: shape.name().to_string(),
                error,
                a_underline: reference.a_underline,
                min_strain: reference.y.min_strain(),
                eta,
                error_bound: 4.0 * eta / reference.a_underline,
                delta1: terms.hessian_gap_bound()?,
                delta2: eta / eps.sqrt(),
                iterations: report.iterations,
                residual: report.residual,
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure = Some((i, e));
                break;
            }
        }
    }
    let fits = group_fits(&rows, |r| (r.n, r.k, r.shape.clone(), r.error));
    Ok(ConvergenceStudy {
        rows,
        fits,
        failure,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRow {
    pub n: usize,
    pub k: usize,
    pub shape: String,
    pub f_star: f64,
    pub f_star_cb: f64,
    /// `|F*_model − F*_cb|`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalStudy {
    pub rows: Vec<CriticalRow>,
    pub fits: Vec<GroupFit>,
    pub tol: f64,
}

impl CriticalStudy {
    /// Every row within `2·tol` of the Cauchy-Born critical strain.
    pub fn all_within_tol(&self) -> bool {
        self.rows.iter().all(|r| r.error <= 2.0 * self.tol)
    }
}

/// Critical strains of the sweep's model at every point against the
/// Cauchy-Born value on the same period.
pub fn critical_strain_study(spec: &SweepSpec, tol: f64) -> Result<CriticalStudy> {
    spec.validate()?;
    let cb: Vec<Result<f64>> = spec
        .n_list
        .par_iter()
        .map(|&n| {
            let m = EnergyModel::cauchy_born(spec.potential.clone(), LatticeConfig::new(n)?);
            critical_strain(&m, default_bracket(&m), tol)
        })
        .collect();
    let rows: Vec<Result<CriticalRow>> = spec
        .points()
        .par_iter()
        .map(|(n, shape, k)| {
            let idx = spec.n_list.iter().position(|m| m == n).expect("n from list");
            let f_star_cb = cb[idx].clone()?;
            let blend = spec.blend(*n, shape, *k)?;
            let model = EnergyModel::from_kind(spec.model, spec.potential.clone(), &blend)?;
            let f_star = critical_strain(&model, default_bracket(&model), tol)?;
            Ok(CriticalRow {
                n: *n,
                k: *k,
                shape: shape.name().to_string(),
                f_star,
                f_star_cb,
                error: (f_star - f_star_cb).abs(),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let fits = group_fits(&rows, |r| (r.n, r.k, r.shape.clone(), r.error));
    Ok(CriticalStudy { rows, fits, tol })
}

/// Ghost-force measures of a blend at the uniform state `y^F`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostRow {
    pub k: usize,
    pub shape: String,
    /// `‖Δ²α‖_{ℓ^p_ε}`.
    pub alpha_seminorm: f64,
    /// `‖Δ²γ‖_{ℓ^p_ε}`.
    pub gamma_seminorm: f64,
    /// `‖Δ²γ_J‖_{ℓ^p_ε(J)}` on the right-hand transition.
    pub transition_seminorm: f64,
    /// `|φ′(2F)| ‖Δ²γ_J‖_{ℓ^p_ε(J)}`.
    pub transition_dual: f64,
    /// `ε^{1/p} k^{1/p−2} ‖g̃″‖_{L^p}` per transition, if the shape has flat ends.
    pub transition_bound: Option<f64>,
    /// `‖δΦ(y^F)‖_{U^{-1,p}}` for the chosen model.
    pub ghost_dual_norm: f64,
}

pub fn ghost_force_row(
    kind: ModelKind,
    potential: &Potential,
    blend: &BlendFunction,
    strain_f: f64,
    p: f64,
) -> Result<GhostRow> {
    let report = blend.ghost_report(p)?;
    let transition_seminorm = blend.transition_seminorm(1, p)?;
    let model = EnergyModel::from_kind(kind, potential.clone(), blend)?;
    let y = Deformation::uniform(blend.config(), strain_f)?;
    let ghost_dual_norm = dual_norm(&model.first_variation(&y)?, p)?;
    Ok(GhostRow {
        k: blend.k(),
        shape: blend.shape().name().to_string(),
        alpha_seminorm: report.alpha_seminorm,
        gamma_seminorm: report.gamma_seminorm,
        transition_seminorm,
        transition_dual: potential.eval_derivative(1, 2.0 * strain_f)?.abs() * transition_seminorm,
        transition_bound: report.per_transition_bound,
        ghost_dual_norm,
    })
}

/// `‖δΦ(y^F)‖_{U^{-1,p}}` for each strain.
pub fn patch_test(m: &EnergyModel, strains: &[f64], p: f64) -> Result<Vec<(f64, f64)>> {
    let config = LatticeConfig::new(m.n_atoms())?;
    strains
        .iter()
        .map(|&f| {
            let y = Deformation::uniform(config, f)?;
            Ok((f, dual_norm(&m.first_variation(&y)?, p)?))
        })
        .collect()
}

/// `β̄ + α − 1`, which vanishes identically for BQNL.
pub fn patch_identity_defect(m: &EnergyModel) -> f64 {
    mean_seq(m.beta())
        .iter()
        .zip(m.alpha())
        .fold(0.0_f64, |acc, (b, a)| acc.max((b + a - 1.0).abs()))
}

fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

pub fn fit_table(fits: &[GroupFit]) -> Table {
    let mut t = Table::new("fits", &["variable", "fixed", "shape", "slope", "intercept", "r_squared", "points"]);
    for f in fits {
        let variable = match f.variable {
            FitVariable::K => "k",
            FitVariable::Epsilon => "eps",
        };
        t.push(vec![
            variable.into(),
            f.fixed.into(),
            f.shape.as_str().into(),
            f.fit.slope.into(),
            f.fit.intercept.into(),
            f.fit.r_squared.into(),
            f.fit.points.len().into(),
        ]);
    }
    t
}

pub fn audit_table(rows: &[AuditRow]) -> Table {
    let mut t = Table::new(
        "modeling_audit",
        &["trial", "model", "p", "lhs", "rhs", "ghost", "coupling", "cauchy_born", "ghost_exact", "holds"],
    );
    for r in rows {
        t.push(vec![
            r.trial.into(),
            r.model.name().into(),
            p_label(r.p).into(),
            r.audit.lhs.into(),
            r.audit.rhs.into(),
            r.audit.parts.ghost.into(),
            r.audit.parts.coupling.into(),
            r.audit.parts.cauchy_born.into(),
            r.audit.ghost_exact.into(),
            usize::from(r.holds()).into(),
        ]);
    }
    t
}

pub fn stability_audit_table(rows: &[StabilityAuditRow]) -> Table {
    let mut t = Table::new(
        "stability_audit",
        &["trial", "model", "coercivity", "a_priori", "atomistic_coercivity", "a_posteriori", "holds"],
    );
    for r in rows {
        t.push(vec![
            r.trial.into(),
            r.model.name().into(),
            r.coercivity.into(),
            r.a_priori.into(),
            r.atomistic_coercivity.into(),
            r.a_posteriori.into(),
            usize::from(r.holds()).into(),
        ]);
    }
    t
}

impl ConvergenceStudy {
    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "convergence",
            &[
                "n", "k", "shape", "error_u12", "a_underline", "min_strain", "eta", "error_bound", "delta1",
                "delta2", "iterations", "residual",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.n.into(),
                r.k.into(),
                r.shape.as_str().into(),
                r.error.into(),
                r.a_underline.into(),
                r.min_strain.into(),
                r.eta.into(),
                r.error_bound.into(),
                r.delta1.into(),
                r.delta2.into(),
                r.iterations.into(),
                r.residual.into(),
            ]);
        }
        t
    }
}

impl CriticalStudy {
    pub fn table(&self) -> Table {
        let mut t = Table::new("critical_strain", &["n", "k", "shape", "f_star", "f_star_cb", "error"]);
        for r in &self.rows {
            t.push(vec![
                r.n.into(),
                r.k.into(),
                r.shape.as_str().into(),
                r.f_star.into(),
                r.f_star_cb.into(),
                r.error.into(),
            ]);
        }
        t
    }
}

pub fn ghost_table(rows: &[GhostRow]) -> Table {
    let mut t = Table::new(
        "ghost_force",
        &[
            "k", "shape", "alpha_seminorm", "gamma_seminorm", "transition_seminorm", "transition_dual_seminorm",
            "transition_bound", "ghost_dual_norm",
        ],
    );
    for r in rows {
        t.push(vec![
            r.k.into(),
            r.shape.as_str().into(),
            r.alpha_seminorm.into(),
            r.gamma_seminorm.into(),
            r.transition_seminorm.into(),
            r.transition_dual.into(),
            r.transition_bound.unwrap_or(f64::NAN).into(),
            r.ghost_dual_norm.into(),
        ]);
    }
    t
}
