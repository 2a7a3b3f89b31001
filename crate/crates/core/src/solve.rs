//! Equilibria `δΦ(y)[u] = ⟨f, u⟩` for all mean-zero `u`, by projected
//! Newton in strain coordinates with backtracking, plus strain continuation.

use nalgebra::{Cholesky, DVector};

use crate::energy::EnergyModel;
use crate::error::{BqcError, Result};
use crate::lattice::{dual_norm, forces_to_dual, Deformation, Displacement, DualFunctional, LatticeConfig};
use crate::linalg::{smallest_eigenpair, strain_form_matrix, MeanZeroBasis};
use crate::stability::coercivity_constant;

/// Tolerance on `Σ f` relative to `N · max |f|`.
pub const LOAD_BALANCE_TOL: f64 = 1e-12;

/// Mean-zero external site forces, paired as `⟨f, u⟩ = ε Σ f_ξ u_ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeadLoad {
    values: Vec<f64>,
}

impl DeadLoad {
    pub fn zero(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn new(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = LOAD_BALANCE_TOL * values.len() as f64 * max;
        if sum.abs() > tol {
            return Err(BqcError::NotMeanZero { sum, tol });
        }
        Ok(Self { values })
    }

    /// Samples `profile(εξ)` at every site and removes the mean.
    pub fn from_profile(config: LatticeConfig, profile: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = (0..config.n_atoms())
            .map(|i| profile(config.coordinate(i)))
            .collect();
        crate::lattice::project_mean_zero(&mut values);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| t * v).collect(),
        }
    }

    /// `ε Σ f_ξ u_ξ`.
    pub fn pair(&self, u: &Displacement) -> f64 {
        let eps = 1.0 / self.values.len() as f64;
        eps * self.values.iter().zip(u.values()).map(|(f, u)| f * u).sum::<f64>()
    }

    pub fn as_dual(&self) -> Result<DualFunctional> {
        forces_to_dual(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target for `‖δΦ(y) − f‖_{U^{-1,2}}`.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Load increments `f/s, 2f/s, …, f`.
    pub continuation_steps: usize,
    /// Iterates must keep `min y′` above this; `None` means `r*/2`.
    pub admissibility_floor: Option<f64>,
    pub max_halvings: usize,
    /// Compute the coercivity of the returned state.
    pub compute_coercivity: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_iter: 50,
            continuation_steps: 1,
            admissibility_floor: None,
            max_halvings: 20,
            compute_coercivity: true,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) || self.max_iter == 0 || self.continuation_steps == 0 {
            return Err(BqcError::InvalidSweep(
                "solver tolerances and iteration counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Newton iterations summed over load steps.
    pub iterations: usize,
    pub residual: f64,
    /// Residual before each iteration of the final load step, then after the last.
    pub residual_history: Vec<f64>,
    /// Total energy `Φ(y) − ⟨f, u⟩` alongside `residual_history`.
    pub energy_history: Vec<f64>,
    pub halvings: usize,
    /// Iterations where the projected Hessian was indefinite and shifted.
    pub shifted_steps: usize,
    pub coercivity: Option<f64>,
}

fn total_energy(m: &EnergyModel, load: &DeadLoad, y: &Deformation) -> Result<f64> {
    Ok(m.value(y)? - load.pair(y.displacement()))
}

fn residual(m: &EnergyModel, target: &DualFunctional, y: &Deformation) -> Result<(Vec<f64>, f64)> {
    let r = m.first_variation(y)?.sub(target);
    let norm = dual_norm(&r, 2.0)?;
    Ok((r.strain_rep().to_vec(), norm))
}

struct StepOutcome {
    iterations: usize,
    halvings: usize,
    shifted: usize,
    residuals: Vec<f64>,
    energies: Vec<f64>,
}

fn newton(
    m: &EnergyModel,
    load: &DeadLoad,
    mut y: Deformation,
    opts: &SolveOptions,
    floor: f64,
) -> Result<(Deformation, StepOutcome)> {
    let n = m.n_atoms();
    let basis = MeanZeroBasis::new(n);
    let target = load.as_dual()?;
    let (mut r, mut res) = residual(m, &target, &y)?;
    let mut out = StepOutcome {
        iterations: 0,
        halvings: 0,
        shifted: 0,
        residuals: vec![res],
        energies: vec![total_energy(m, load, &y)?],
    };
    while res > opts.newton_tol {
        if out.iterations == opts.max_iter {
            return Err(BqcError::NoConvergence {
                iterations: out.iterations,
                residual: res,
            });
        }
        out.iterations += 1;
        let k = strain_form_matrix(&m.second_variation(&y)?);
        let mut projected = basis.project(&k);
        let rhs = -basis.restrict(&r);
        let a = match Cholesky::new(projected.clone()) {
            Some(chol) => chol.solve(&rhs),
            None => {
                out.shifted += 1;
                let (lambda, _) = smallest_eigenpair(projected.clone());
                let shift = -lambda + 1e-6 * projected.diagonal().amax().max(1.0);
                for i in 0..n - 1 {
                    projected[(i, i)] += shift;
                }
                Cholesky::new(projected)
                    .expect("shifted matrix is positive definite")
                    .solve(&rhs)
            }
        };
        let direction = Displacement::from_strain(&basis.lift(&DVector::from(a)));
        let mut t = 1.0;
        let mut accepted = None;
        let mut any_admissible = false;
        for _ in 0..=opts.max_halvings {
            let trial = y.perturbed(t, &direction)?;
            if trial.min_strain() > floor {
                any_admissible = true;
                let (r_new, res_new) = residual(m, &target, &trial)?;
                if res_new < res {
                    accepted = Some((trial, r_new, res_new));
                    break;
                }
            }
            t *= 0.5;
            out.halvings += 1;
        }
        match accepted {
            Some((trial, r_new, res_new)) => {
                y = trial;
                r = r_new;
                res = res_new;
                out.residuals.push(res);
                out.energies.push(total_energy(m, load, &y)?);
            }
            None if !any_admissible => {
                return Err(BqcError::AdmissibilityLost {
                    halvings: opts.max_halvings,
                })
            }
            None => {
                return Err(BqcError::NoConvergence {
                    iterations: out.iterations,
                    residual: res,
                })
            }
        }
    }
    Ok((y, out))
}

/// Solves `δΦ(y) = f` from `y0`, ramping the load over
/// `opts.continuation_steps` increments.
pub fn equilibrate(
    m: &EnergyModel,
    load: &DeadLoad,
    y0: &Deformation,
    opts: &SolveOptions,
) -> Result<(Deformation, SolveReport)> {
    opts.validate()?;
    y0.config().check_len(m.n_atoms())?;
    y0.config().check_len(load.values().len())?;
    y0.check_admissible()?;
    let floor = opts
        .admissibility_floor
        .unwrap_or(0.5 * m.potential().inflection());
    let mut y = y0.clone();
    let mut iterations = 0;
    let mut halvings = 0;
    let mut shifted = 0;
    let mut last = None;
    let steps = opts.continuation_steps;
    for j in 1..=steps {
        let partial = load.scaled(j as f64 / steps as f64);
        let (next, outcome) = newton(m, &partial, y, opts, floor)?;
        y = next;
        iterations += outcome.iterations;
        halvings += outcome.halvings;
        shifted += outcome.shifted;
        last = Some(outcome);
    }
    let last = last.expect("at least one load step");
    let coercivity = if opts.compute_coercivity {
        Some(coercivity_constant(m, &y)?.0)
    } else {
        None
    };
    let report = SolveReport {
        iterations,
        residual: *last.residuals.last().expect("history is nonempty"),
        residual_history: last.residuals,
        energy_history: last.energies,
        halvings,
        shifted_steps: shifted,
        coercivity,
    };
    Ok((y, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationStep {
    pub strain_f: f64,
    pub state: Deformation,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub steps: Vec<ContinuationStep>,
    /// Index into the path and error of the first failed point.
    pub failure: Option<(usize, BqcError)>,
}

/// Warm-started equilibria along a path of macroscopic strains under a
/// fixed load. Stops at the first solver failure or at the first
/// equilibrium with `c(y) ≤ 0`.
pub fn continuation(
    m: &EnergyModel,
    load: &DeadLoad,
    path: &[f64],
    opts: &SolveOptions,
) -> Result<ContinuationResult> {
    let config = LatticeConfig::new(m.n_atoms())?;
    let opts = SolveOptions {
        compute_coercivity: true,
        ..*opts
    };
    let mut steps: Vec<ContinuationStep> = Vec::with_capacity(path.len());
    let mut failure = None;
    for (i, &f) in path.iter().enumerate() {
        let u = steps
            .last()
            .map(|s| s.state.displacement().clone())
            .unwrap_or_else(|| Displacement::zeros(config.n_atoms()));
        let attempt = Deformation::new(config, f, u)
            .and_then(|y0| equilibrate(m, load, &y0, &opts));
        match attempt {
            Ok((state, report)) => {
                let c = report.coercivity.expect("coercivity requested");
                if c <= 0.0 {
                    failure = Some((i, BqcError::Unstable { coercivity: c }));
                    break;
                }
                steps.push(ContinuationStep {
                    strain_f: f,
                    state,
                    report,
                });
            }
            Err(e) => {
                failure = Some((i, e));
                break;
            }
        }
    }
    Ok(ContinuationResult { steps, failure })
}
