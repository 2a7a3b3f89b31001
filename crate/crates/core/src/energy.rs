//! The two-weight blended energy
//! `Φ_{α,β}(y) = ε Σ φ(y′_ξ) + α_ξ φ(2y′_ξ) + β_ξ φ(y′_ξ + y′_{ξ+1})`,
//! its first and second variations, and the consistency terms shared by
//! the modeling-error and stability estimates.
//!
//! Atomistic, Cauchy-Born, QCE, QNL, BQCE and BQNL are all instances.

use std::fmt;

use crate::blend::{bqce_alpha_beta, bqnl_alpha_beta, check_unit_weights, BlendFunction, BlendShape};
use crate::error::{BqcError, Result};
use crate::lattice::{
    delta, diff2, diff3, lp_norm, mean_seq, next, prev, Deformation, DualFunctional, LatticeConfig,
};
use crate::potential::Potential;

const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Atomistic,
    CauchyBorn,
    Qce,
    Qnl,
    Bqce,
    Bqnl,
    Custom,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Atomistic,
        ModelKind::CauchyBorn,
        ModelKind::Qce,
        ModelKind::Qnl,
        ModelKind::Bqce,
        ModelKind::Bqnl,
        ModelKind::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Atomistic => "atomistic",
            ModelKind::CauchyBorn => "cauchy_born",
            ModelKind::Qce => "qce",
            ModelKind::Qnl => "qnl",
            ModelKind::Bqce => "bqce",
            ModelKind::Bqnl => "bqnl",
            ModelKind::Custom => "custom_bqc",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == lower || (lower == "cb" && *k == ModelKind::CauchyBorn))
            .ok_or_else(|| {
                BqcError::InvalidWeights(format!(
                    "unknown model '{name}' (expected atomistic, cauchy_born, qce, qnl, bqce or bqnl)"
                ))
            })
    }

    /// Models whose first variation vanishes at every uniform state.
    pub fn passes_patch_test(&self) -> bool {
        matches!(
            self,
            ModelKind::Atomistic | ModelKind::CauchyBorn | ModelKind::Qnl | ModelKind::Bqnl
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `Ā_ξ` and `B̄_ξ` of `δ²Φ[u,u] = ε Σ Ā_ξ |u′_ξ|² + ε² B̄_ξ |u″_ξ|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianCoeffs {
    pub a_bar: Vec<f64>,
    pub b_bar: Vec<f64>,
}

impl HessianCoeffs {
    /// Evaluates the form on a strain field `w = u′`:
    /// `ε Σ Ā_ξ w_ξ² + B̄_ξ (w_{ξ+1} − w_ξ)²`.
    pub fn form(&self, w: &[f64]) -> f64 {
        let n = w.len();
        let eps = 1.0 / n as f64;
        eps * (0..n)
            .map(|i| {
                let d = w[next(i, n)] - w[i];
                self.a_bar[i] * w[i] * w[i] + self.b_bar[i] * d * d
            })
            .sum::<f64>()
    }

    pub fn min_a(&self) -> f64 {
        self.a_bar.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Immutable blended energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    potential: Potential,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    kind: ModelKind,
    blend: Option<BlendFunction>,
}

impl EnergyModel {
    /// Arbitrary weights in `[0, 1]`.
    pub fn custom(potential: Potential, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        Self::assemble(potential, alpha, beta, ModelKind::Custom, None)
    }

    pub fn atomistic(potential: Potential, config: LatticeConfig) -> Self {
        let n = config.n_atoms();
        Self::assemble(potential, vec![0.0; n], vec![1.0; n], ModelKind::Atomistic, None)
            .expect("atomistic weights are valid")
    }

    pub fn cauchy_born(potential: Potential, config: LatticeConfig) -> Self {
        let n = config.n_atoms();
        Self::assemble(potential, vec![1.0; n], vec![0.0; n], ModelKind::CauchyBorn, None)
            .expect("Cauchy-Born weights are valid")
    }

    /// BQCE with `γ` from the blend; a step shape gives QCE.
    pub fn bqce(potential: Potential, blend: &BlendFunction) -> Result<Self> {
        let (alpha, beta) = bqce_alpha_beta(blend.gamma());
        let kind = if matches!(blend.shape(), BlendShape::Characteristic) {
            ModelKind::Qce
        } else {
            ModelKind::Bqce
        };
        Self::assemble(potential, alpha, beta, kind, Some(blend.clone()))
    }

    /// BQNL with `η = 1 − γ` from the blend; a step shape gives QNL.
    pub fn bqnl(potential: Potential, blend: &BlendFunction) -> Result<Self> {
        let (alpha, beta) = bqnl_alpha_beta(&blend.eta());
        let kind = if matches!(blend.shape(), BlendShape::Characteristic) {
            ModelKind::Qnl
        } else {
            ModelKind::Bqnl
        };
        Self::assemble(potential, alpha, beta, kind, Some(blend.clone()))
    }

    /// QCE with the given atomistic sites (continuum everywhere else).
    pub fn qce(potential: Potential, config: LatticeConfig, atomistic: &[usize]) -> Result<Self> {
        let gamma = indicator(config, atomistic, 0.0, 1.0)?;
        let (alpha, beta) = bqce_alpha_beta(&gamma);
        Self::assemble(potential, alpha, beta, ModelKind::Qce, None)
    }

    /// QNL with `η` the indicator of the given atomistic sites.
    pub fn qnl(potential: Potential, config: LatticeConfig, atomistic: &[usize]) -> Result<Self> {
        let eta = indicator(config, atomistic, 1.0, 0.0)?;
        let (alpha, beta) = bqnl_alpha_beta(&eta);
        Self::assemble(potential, alpha, beta, ModelKind::Qnl, None)
    }

    /// BQNL directly from a per-site `η ∈ [0,1]`.
    pub fn bqnl_from_eta(potential: Potential, eta: &[f64]) -> Result<Self> {
        check_unit_weights("eta", eta)?;
        let (alpha, beta) = bqnl_alpha_beta(eta);
        Self::assemble(potential, alpha, beta, ModelKind::Bqnl, None)
    }

    /// Builds the named model on a blend layout (`atomistic` and
    /// `cauchy_born` ignore the blend).
    pub fn from_kind(kind: ModelKind, potential: Potential, blend: &BlendFunction) -> Result<Self> {
        match kind {
            ModelKind::Atomistic => Ok(Self::atomistic(potential, blend.config())),
            ModelKind::CauchyBorn => Ok(Self::cauchy_born(potential, blend.config())),
            ModelKind::Bqce | ModelKind::Qce => Self::bqce(potential, blend),
            ModelKind::Bqnl | ModelKind::Qnl => Self::bqnl(potential, blend),
            ModelKind::Custom => Err(BqcError::InvalidWeights(
                "custom models need explicit weights".into(),
            )),
        }
    }

    fn assemble(
        potential: Potential,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        kind: ModelKind,
        blend: Option<BlendFunction>,
    ) -> Result<Self> {
        let config = LatticeConfig::new(alpha.len())?;
        config.check_len(beta.len())?;
        check_unit_weights("alpha", &alpha)?;
        check_unit_weights("beta", &beta)?;
        let all = |s: &[f64], v: f64| s.iter().all(|&x| x == v);
        match kind {
            ModelKind::Atomistic if !(all(&alpha, 0.0) && all(&beta, 1.0)) => {
                return Err(BqcError::InvalidWeights("atomistic needs α ≡ 0, β ≡ 1".into()))
            }
            ModelKind::CauchyBorn if !(all(&alpha, 1.0) && all(&beta, 0.0)) => {
                return Err(BqcError::InvalidWeights("Cauchy-Born needs α ≡ 1, β ≡ 0".into()))
            }
            ModelKind::Bqnl | ModelKind::Qnl => {
                let bbar = mean_seq(&beta);
                if let Some(i) = (0..alpha.len()).find(|&i| (bbar[i] + alpha[i] - 1.0).abs() > IDENTITY_TOL) {
                    return Err(BqcError::InvalidWeights(format!(
                        "β̄ + α − 1 = {:e} at site {i}",
                        bbar[i] + alpha[i] - 1.0
                    )));
                }
            }
            _ => {}
        }
        Ok(Self {
            potential,
            alpha,
            beta,
            kind,
            blend,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn blend(&self) -> Option<&BlendFunction> {
        self.blend.as_ref()
    }

    pub fn n_atoms(&self) -> usize {
        self.alpha.len()
    }

    /// Atomistic model on the same chain and potential.
    pub fn reference(&self) -> Self {
        Self::atomistic(
            self.potential.clone(),
            LatticeConfig::new(self.n_atoms()).expect("model period is valid"),
        )
    }

    fn strains(&self, y: &Deformation) -> Result<Vec<f64>> {
        y.config().check_len(self.n_atoms())?;
        y.check_admissible()
    }

    /// Total energy over one period.
    pub fn value(&self, y: &Deformation) -> Result<f64> {
        let s = self.strains(y)?;
        let n = s.len();
        let phi = |r: f64| self.potential.phi(r);
        let sum: f64 = (0..n)
            .map(|i| {
                let s1 = s[next(i, n)];
                phi(s[i]) + self.alpha[i] * phi(2.0 * s[i]) + self.beta[i] * phi(s[i] + s1)
            })
            .sum();
        Ok(sum / n as f64)
    }

    /// Strain representation `T_ξ = φ′(y′_ξ) + 2α_ξ φ′(2y′_ξ)
    /// + β_{ξ−1} φ′(y′_{ξ−1} + y′_ξ) + β_ξ φ′(y′_ξ + y′_{ξ+1})`.
    pub fn first_variation(&self, y: &Deformation) -> Result<DualFunctional> {
        let s = self.strains(y)?;
        Ok(DualFunctional::from_strain_rep(self.raw_stress(&s)))
    }

    fn raw_stress(&self, s: &[f64]) -> Vec<f64> {
        let n = s.len();
        let d1 = |r: f64| self.potential.d1(r);
        // second-neighbour bond ξ couples strains ξ and ξ+1
        let bond: Vec<f64> = (0..n)
            .map(|i| self.beta[i] * d1(s[i] + s[next(i, n)]))
            .collect();
        (0..n)
            .map(|i| d1(s[i]) + 2.0 * self.alpha[i] * d1(2.0 * s[i]) + bond[prev(i, n)] + bond[i])
            .collect()
    }

    /// `Ā_ξ = φ″(y′_ξ) + 2β_ξ φ″(y′_ξ + y′_{ξ+1}) + 2β_{ξ−1} φ″(y′_{ξ−1} + y′_ξ)
    /// + 4α_ξ φ″(2y′_ξ)` and `B̄_ξ = −β_ξ φ″(y′_ξ + y′_{ξ+1})`.
    pub fn second_variation(&self, y: &Deformation) -> Result<HessianCoeffs> {
        let s = self.strains(y)?;
        let n = s.len();
        let d2 = |r: f64| self.potential.d2(r);
        let bond: Vec<f64> = (0..n)
            .map(|i| self.beta[i] * d2(s[i] + s[next(i, n)]))
            .collect();
        let a_bar = (0..n)
            .map(|i| d2(s[i]) + 2.0 * bond[i] + 2.0 * bond[prev(i, n)] + 4.0 * self.alpha[i] * d2(2.0 * s[i]))
            .collect();
        let b_bar = bond.into_iter().map(|b| -b).collect();
        Ok(HessianCoeffs { a_bar, b_bar })
    }

    /// Exact `max_ξ |Ā_ξ − A_ξ|` against the atomistic coefficients, and
    /// its envelope bound.
    pub fn hessian_coeff_gap(&self, y: &Deformation) -> Result<HessianGap> {
        let terms = ConsistencyTerms::new(self, y)?;
        let model = self.second_variation(y)?;
        let atomistic = self.reference().second_variation(y)?;
        let exact = model
            .a_bar
            .iter()
            .zip(&atomistic.a_bar)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        Ok(HessianGap {
            exact,
            bound: terms.hessian_gap_bound()?,
            a_underline: atomistic.min_a(),
        })
    }
}

fn indicator(config: LatticeConfig, sites: &[usize], inside: f64, outside: f64) -> Result<Vec<f64>> {
    let n = config.n_atoms();
    let mut v = vec![outside; n];
    for &i in sites {
        if i >= n {
            return Err(BqcError::InvalidWeights(format!("site {i} outside the period {n}")));
        }
        v[i] = inside;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianGap {
    pub exact: f64,
    pub bound: f64,
    /// `A̲ = min_ξ A_ξ` of the atomistic model at the same state.
    pub a_underline: f64,
}

/// Site sequences entering the consistency estimates, with the envelope
/// constants `C̄ᵢ = Cᵢ(2 min y′)`.
///
/// `ghost = 2(1 − α − β̄)`, which equals `Δ²α` for BQCE and vanishes for
/// BQNL; `coupling = Δβ·y″`; `third = (1 − β_{ξ−1}) y‴`;
/// `curvature_sq = (1 − β)(y″)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyTerms {
    pub eps: f64,
    pub c_bar: [f64; 5],
    pub ghost: Vec<f64>,
    pub coupling: Vec<f64>,
    pub third: Vec<f64>,
    pub curvature_sq: Vec<f64>,
}

impl ConsistencyTerms {
    pub fn new(model: &EnergyModel, y: &Deformation) -> Result<Self> {
        let s = model.strains(y)?;
        let n = s.len();
        let r0 = 2.0 * s.iter().copied().fold(f64::INFINITY, f64::min);
        let pot = model.potential();
        let mut c_bar = [0.0; 5];
        for (i, c) in c_bar.iter_mut().enumerate().skip(1) {
            *c = pot.envelope(i, r0)?;
        }
        let (alpha, beta) = (model.alpha(), model.beta());
        let bbar = mean_seq(beta);
        // patch-consistent tags satisfy α + β̄ = 1 exactly; only roundoff would remain
        let ghost = if model.kind().passes_patch_test() {
            vec![0.0; n]
        } else {
            (0..n).map(|i| 2.0 * (1.0 - alpha[i] - bbar[i])).collect()
        };
        let y2 = diff2(y);
        let y3 = diff3(y);
        let coupling = delta(beta).iter().zip(&y2).map(|(d, c)| d * c).collect();
        let third = (0..n).map(|i| (1.0 - beta[prev(i, n)]) * y3[i]).collect();
        let curvature_sq = (0..n).map(|i| (1.0 - beta[i]) * y2[i] * y2[i]).collect();
        Ok(Self {
            eps: 1.0 / n as f64,
            c_bar,
            ghost,
            coupling,
            third,
            curvature_sq,
        })
    }

    /// `C̄₁‖ghost‖_p`, `εC̄₂‖coupling‖_p` and
    /// `ε²{C̄₂‖third‖_p + C̄₃‖curvature_sq‖_p}`.
    pub fn modeling_parts(&self, p: f64) -> Result<ModelingParts> {
        let c = &self.c_bar;
        let e = self.eps;
        Ok(ModelingParts {
            ghost: c[1] * lp_norm(&self.ghost, p, None)?,
            coupling: e * c[2] * lp_norm(&self.coupling, p, None)?,
            cauchy_born: e * e
                * (c[2] * lp_norm(&self.third, p, None)? + c[3] * lp_norm(&self.curvature_sq, p, None)?),
        })
    }

    /// `2C̄₂‖ghost‖_∞ + 2εC̄₃‖coupling‖_∞ + 2ε²{C̄₃‖third‖_∞ + C̄₄‖curvature_sq‖_∞}`.
    pub fn hessian_gap_bound(&self) -> Result<f64> {
        let inf = f64::INFINITY;
        let c = &self.c_bar;
        let e = self.eps;
        Ok(2.0 * c[2] * lp_norm(&self.ghost, inf, None)?
            + 2.0 * e * c[3] * lp_norm(&self.coupling, inf, None)?
            + 2.0 * e * e
                * (c[3] * lp_norm(&self.third, inf, None)? + c[4] * lp_norm(&self.curvature_sq, inf, None)?))
    }
}

/// The three named contributions to the modeling-error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelingParts {
    pub ghost: f64,
    pub coupling: f64,
    pub cauchy_born: f64,
}

impl ModelingParts {
    pub fn total(&self) -> f64 {
        self.ghost + self.coupling + self.cauchy_born
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{delta2, dual_norm, Displacement};
    use crate::sampling::{random_smooth_displacement, random_smooth_state, seeded_rng};
    use approx::assert_relative_eq;

    fn cfg(n: usize) -> LatticeConfig {
        LatticeConfig::new(n).unwrap()
    }

    fn lj() -> Potential {
        Potential::lennard_jones()
    }

    fn models(n: usize, pot: &Potential) -> Vec<EnergyModel> {
        let c = cfg(n);
        let blend = BlendFunction::build(c, BlendShape::Cubic, n / 2, 5, 3).unwrap();
        let atomistic: Vec<usize> = (n / 2 - 3..=n / 2 + 3).collect();
        vec![
            EnergyModel::atomistic(pot.clone(), c),
            EnergyModel::cauchy_born(pot.clone(), c),
            EnergyModel::qce(pot.clone(), c, &atomistic).unwrap(),
            EnergyModel::qnl(pot.clone(), c, &atomistic).unwrap(),
            EnergyModel::bqce(pot.clone(), &blend).unwrap(),
            EnergyModel::bqnl(pot.clone(), &blend).unwrap(),
        ]
    }

    #[test]
    fn uniform_energy_values() {
        let pot = lj();
        for f in [0.95, 1.0, 1.2] {
            let y = Deformation::uniform(cfg(16), f).unwrap();
            let expected = pot.phi(f) + pot.phi(2.0 * f);
            for m in models(16, &pot) {
                assert_relative_eq!(m.value(&y).unwrap(), expected, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn per_atom_oracle() {
        // BQCE as ε Σ γ Φ^c_ξ + (1 − γ) Φ^a_ξ with per-atom energies
        let pot = lj();
        let n = 24;
        let c = cfg(n);
        let blend = BlendFunction::build(c, BlendShape::Quintic, 9, 3, 5).unwrap();
        let m = EnergyModel::bqce(pot.clone(), &blend).unwrap();
        let y = random_smooth_state(c, 1.02, 4, 0.1, &mut seeded_rng(1)).unwrap();
        let s = crate::lattice::diff1(&y);
        let f = |r: f64| pot.phi(r);
        let at = |i: usize| s[i % n];
        let direct: f64 = (0..n)
            .map(|i| {
                let (sm, s0, s1, s2) = (at(i + n - 1), at(i), at(i + 1), at(i + 2));
                let atom = 0.5 * (f(s0) + f(s1) + f(s0 + sm) + f(s2 + s1));
                let cont = 0.5 * (f(s0) + f(s1) + f(2.0 * s0) + f(2.0 * s1));
                let g = blend.gamma()[i];
                g * cont + (1.0 - g) * atom
            })
            .sum::<f64>()
            / n as f64;
        assert_relative_eq!(m.value(&y).unwrap(), direct, max_relative = 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pot = Potential::morse(4.0).unwrap();
        let n = 20;
        let mut rng = seeded_rng(2);
        for m in models(n, &pot) {
            let y = random_smooth_state(cfg(n), 1.0, 3, 0.08, &mut rng).unwrap();
            let g = m.first_variation(&y).unwrap();
            for _ in 0..5 {
                let u = random_smooth_displacement(cfg(n), 3, 1.0, &mut rng);
                let h = 1e-5;
                let fd = (m.value(&y.perturbed(h, &u).unwrap()).unwrap()
                    - m.value(&y.perturbed(-h, &u).unwrap()).unwrap())
                    / (2.0 * h);
                let exact = g.apply(&u);
                assert!((fd - exact).abs() <= 1e-7 * exact.abs(), "{}: {fd} {exact}", m.kind());
            }
        }
    }

    #[test]
    fn hessian_form_matches_second_differences() {
        let pot = lj();
        let n = 20;
        let mut rng = seeded_rng(4);
        for m in models(n, &pot) {
            let y = random_smooth_state(cfg(n), 1.05, 3, 0.08, &mut rng).unwrap();
            let coeffs = m.second_variation(&y).unwrap();
            let u = random_smooth_displacement(cfg(n), 3, 1.0, &mut rng);
            let h = 1e-4;
            let v = |t: f64| m.value(&y.perturbed(t, &u).unwrap()).unwrap();
            let fd = (v(h) - 2.0 * v(0.0) + v(-h)) / (h * h);
            let exact = coeffs.form(&u.derivative());
            assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "{}: {fd} {exact}", m.kind());
        }
    }

    #[test]
    fn atomistic_coefficients_at_uniform_state() {
        let pot = lj();
        let f = 1.0;
        let y = Deformation::uniform(cfg(12), f).unwrap();
        let h = EnergyModel::atomistic(pot.clone(), cfg(12)).second_variation(&y).unwrap();
        let a_f = pot.d2(f) + 4.0 * pot.d2(2.0 * f);
        for (a, b) in h.a_bar.iter().zip(&h.b_bar) {
            assert_relative_eq!(*a, a_f, max_relative = 1e-15);
            assert_relative_eq!(*b, -pot.d2(2.0 * f), max_relative = 1e-15);
        }
        let cb = EnergyModel::cauchy_born(pot, cfg(12)).second_variation(&y).unwrap();
        assert!(cb.b_bar.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn translation_invariance_and_balanced_forces() {
        let pot = lj();
        let n = 16;
        let y = random_smooth_state(cfg(n), 1.0, 3, 0.1, &mut seeded_rng(8)).unwrap();
        for m in models(n, &pot) {
            // a constant shift of u is removed by the mean projection and
            // leaves every strain unchanged
            let shifted: Vec<f64> = y.displacement().values().iter().map(|v| v + 0.37).collect();
            let y2 = y.with_displacement(Displacement::project(shifted)).unwrap();
            assert_relative_eq!(m.value(&y).unwrap(), m.value(&y2).unwrap(), max_relative = 1e-14);
            let forces = m.first_variation(&y).unwrap().site_forces();
            let scale = forces.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            assert!(forces.iter().sum::<f64>().abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn patch_test() {
        for pot in [lj(), Potential::morse(4.0).unwrap()] {
            for f in [0.9, 1.0, 1.1] {
                let y = Deformation::uniform(cfg(64), f).unwrap();
                for m in models(64, &pot) {
                    let norm = dual_norm(&m.first_variation(&y).unwrap(), 2.0).unwrap();
                    if m.kind().passes_patch_test() {
                        assert!(norm <= 1e-12, "{} {norm}", m.kind());
                    } else {
                        assert!(norm > 1e-6, "{} {norm}", m.kind());
                    }
                }
            }
        }
    }

    #[test]
    fn bqce_ghost_force_pattern() {
        // δΦ(y^F)[u] = ε Σ −Δ²α_ξ φ′(2F) u′_ξ up to a constant in T
        let pot = lj();
        let n = 64;
        let f = 1.05;
        let blend = BlendFunction::build(cfg(n), BlendShape::Cubic, 32, 9, 6).unwrap();
        let m = EnergyModel::bqce(pot.clone(), &blend).unwrap();
        let y = Deformation::uniform(cfg(n), f).unwrap();
        let t = m.first_variation(&y).unwrap();
        let expected = DualFunctional::from_strain_rep(
            delta2(m.alpha()).iter().map(|d| -d * pot.d1(2.0 * f)).collect(),
        );
        for (a, b) in t.strain_rep().iter().zip(expected.strain_rep()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn affine_hull_identity() {
        let pot = lj();
        let n = 24;
        let mut rng = seeded_rng(9);
        use rand::Rng;
        for _ in 0..10 {
            let eta: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let bqnl = EnergyModel::bqnl_from_eta(pot.clone(), &eta).unwrap();
            let y = random_smooth_state(cfg(n), 1.0, 4, 0.15, &mut rng).unwrap();
            let cb = EnergyModel::cauchy_born(pot.clone(), cfg(n)).value(&y).unwrap();
            let mut combo = (1.0 - eta.iter().sum::<f64>()) * cb;
            for (i, e) in eta.iter().enumerate() {
                let single = EnergyModel::qnl(pot.clone(), cfg(n), &[i]).unwrap();
                combo += e * single.value(&y).unwrap();
            }
            let v = bqnl.value(&y).unwrap();
            assert!((v - combo).abs() <= 1e-12 * v.abs());
        }
    }

    #[test]
    fn construction_checks() {
        let pot = lj();
        assert!(EnergyModel::custom(pot.clone(), vec![0.5; 8], vec![1.2; 8]).is_err());
        assert!(EnergyModel::custom(pot.clone(), vec![0.5; 8], vec![0.5; 7]).is_err());
        assert!(EnergyModel::qce(pot.clone(), cfg(8), &[9]).is_err());
        let y = Deformation::uniform(cfg(10), 1.0).unwrap();
        assert!(EnergyModel::atomistic(pot, cfg(8)).value(&y).is_err());
    }

    #[test]
    fn inadmissible_states_error() {
        let pot = lj();
        let n = 10;
        let mut u = vec![0.0; n];
        u[4] = -0.2;
        let y = Deformation::new(cfg(n), 1.0, Displacement::project(u)).unwrap();
        let m = EnergyModel::atomistic(pot, cfg(n));
        assert!(matches!(m.value(&y), Err(BqcError::NonpositiveStrain { .. })));
        assert!(m.first_variation(&y).is_err());
        assert!(m.second_variation(&y).is_err());
    }

    #[test]
    fn hessian_gap_examples() {
        let pot = lj();
        let n = 128;
        let blend = BlendFunction::build(cfg(n), BlendShape::Cubic, 64, 9, 8).unwrap();
        let y = Deformation::uniform(cfg(n), 1.0).unwrap();
        let bqnl = EnergyModel::bqnl(pot.clone(), &blend).unwrap();
        let gap = bqnl.hessian_coeff_gap(&y).unwrap();
        assert!(gap.exact < 1e-13 && gap.bound < 1e-13);
        let bqce = EnergyModel::bqce(pot.clone(), &blend).unwrap();
        let gap = bqce.hessian_coeff_gap(&y).unwrap();
        let d2a = delta2(bqce.alpha());
        let pattern = d2a.iter().fold(0.0_f64, |m, d| m.max((2.0 * d * pot.d2(2.0)).abs()));
        assert_relative_eq!(gap.exact, pattern, max_relative = 1e-12);
        assert!(gap.exact <= gap.bound);
        let mut rng = seeded_rng(12);
        for _ in 0..20 {
            let y = random_smooth_state(cfg(n), 1.0, 5, 0.2, &mut rng).unwrap();
            for m in [&bqce, &bqnl] {
                let g = m.hessian_coeff_gap(&y).unwrap();
                assert!(g.exact <= g.bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn ghost_term_matches_delta2_alpha_for_bqce() {
        let blend = BlendFunction::build(cfg(60), BlendShape::Quintic, 30, 7, 6).unwrap();
        let m = EnergyModel::bqce(lj(), &blend).unwrap();
        let y = Deformation::uniform(cfg(60), 1.0).unwrap();
        let terms = ConsistencyTerms::new(&m, &y).unwrap();
        for (g, d) in terms.ghost.iter().zip(delta2(m.alpha())) {
            assert!((g - d).abs() < 1e-15);
        }
    }
}
