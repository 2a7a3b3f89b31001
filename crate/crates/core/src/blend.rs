//! Blending shapes `g̃ : [0,1] → [0,1]`, their lattice samples, the (α, β)
//! weights of the blended models and the ghost-force and coupling seminorms.
//!
//! A [`BlendFunction`] always stores the continuum fraction `γ` (0 on the
//! atomistic plateau, 1 in the continuum). BQCE uses `γ` directly, BQNL
//! uses `η = 1 − γ`, so one layout drives both methods.

use crate::error::{BqcError, Result};
use crate::lattice::{delta, delta2, lp_norm, mean_seq, next, prev, Deformation, LatticeConfig};

const SHAPE_TOL: f64 = 1e-12;
const ROOT_SCAN: usize = 4096;
const QUAD_POINTS: usize = 32;

/// Dense polynomial `Σ cⱼ xʲ` (coefficients low to high).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| j as f64 * c)
                .collect(),
        )
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Roots in the open interval `(0, 1)`, found by scanning for sign
    /// changes and bisecting.
    pub fn roots_in_unit_interval(&self) -> Vec<f64> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut roots = Vec::new();
        let h = 1.0 / ROOT_SCAN as f64;
        let mut x0 = 0.0;
        let mut f0 = self.eval(0.0);
        for j in 1..=ROOT_SCAN {
            let x1 = j as f64 * h;
            let f1 = self.eval(x1);
            if f1 == 0.0 && j < ROOT_SCAN {
                roots.push(x1);
            } else if f0 != 0.0 && f0.signum() != f1.signum() && f1 != 0.0 {
                let (mut a, mut b) = (x0, x1);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if self.eval(m).signum() == f0.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    /// `‖P‖_{L^p([0,1])}` by Gauss-Legendre on the pieces between roots
    /// (`p = ∞`: max over endpoints and critical points).
    pub fn lp_norm_unit(&self, p: f64) -> f64 {
        if p.is_infinite() {
            let mut candidates = vec![0.0, 1.0];
            candidates.extend(self.derivative().roots_in_unit_interval());
            return candidates
                .into_iter()
                .map(|x| self.eval(x).abs())
                .fold(0.0, f64::max);
        }
        let mut breaks = vec![0.0];
        breaks.extend(self.roots_in_unit_interval());
        breaks.push(1.0);
        let (nodes, weights) = gauss_legendre(QUAD_POINTS);
        let mut integral = 0.0;
        for piece in breaks.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in nodes.iter().zip(&weights) {
                integral += half * w * self.eval(mid + half * x).abs().powf(p);
            }
        }
        integral.powf(1.0 / p)
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlendShape {
    /// Step `g̃ = 1` for `x > 0`: sharp interface, reproduces QCE/QNL.
    Characteristic,
    Linear,
    /// `3x² − 2x³`.
    Cubic,
    /// `10x³ − 15x⁴ + 6x⁵`.
    Quintic,
    Custom(Polynomial),
}

impl BlendShape {
    /// Validates a user polynomial: `g̃(0) = 0`, `g̃(1) = 1`, nondecreasing.
    pub fn custom(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(BqcError::InvalidShape(
                "custom shape needs finite coefficients".into(),
            ));
        }
        let poly = Polynomial::new(coeffs);
        let (g0, g1) = (poly.eval(0.0), poly.eval(1.0));
        if g0.abs() > SHAPE_TOL || (g1 - 1.0).abs() > SHAPE_TOL {
            return Err(BqcError::InvalidShape(format!(
                "custom shape must satisfy g(0) = 0, g(1) = 1; got {g0}, {g1}"
            )));
        }
        let slope = poly.derivative();
        let mut checks = slope.derivative().roots_in_unit_interval();
        checks.extend((0..=ROOT_SCAN).map(|j| j as f64 / ROOT_SCAN as f64));
        if let Some(x) = checks.into_iter().find(|&x| slope.eval(x) < -SHAPE_TOL) {
            return Err(BqcError::InvalidShape(format!(
                "custom shape decreases at x = {x}"
            )));
        }
        Ok(BlendShape::Custom(poly))
    }

    pub fn from_name(name: &str, coeffs: &[f64]) -> Result<Self> {
        let shape = match name.to_ascii_lowercase().as_str() {
            "characteristic" | "step" => BlendShape::Characteristic,
            "linear" => BlendShape::Linear,
            "cubic" => BlendShape::Cubic,
            "quintic" => BlendShape::Quintic,
            "custom" => return Self::custom(coeffs.to_vec()),
            other => {
                return Err(BqcError::InvalidShape(format!(
                    "unknown shape '{other}' (expected characteristic, linear, cubic, quintic or custom)"
                )))
            }
        };
        if !coeffs.is_empty() {
            return Err(BqcError::InvalidShape(format!(
                "shape '{name}' takes no coefficients"
            )));
        }
        Ok(shape)
    }

    pub fn name(&self) -> &'static str {
        match self {
            BlendShape::Characteristic => "characteristic",
            BlendShape::Linear => "linear",
            BlendShape::Cubic => "cubic",
            BlendShape::Quintic => "quintic",
            BlendShape::Custom(_) => "custom",
        }
    }

    /// Polynomial form on `[0, 1]`; `None` for the step.
    pub fn polynomial(&self) -> Option<Polynomial> {
        let coeffs = match self {
            BlendShape::Characteristic => return None,
            BlendShape::Linear => vec![0.0, 1.0],
            BlendShape::Cubic => vec![0.0, 0.0, 3.0, -2.0],
            BlendShape::Quintic => vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
            BlendShape::Custom(p) => return Some(p.clone()),
        };
        Some(Polynomial::new(coeffs))
    }

    /// `g̃(x)`, extended by 0 below 0 and by 1 above 1.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self.polynomial() {
            None => 1.0,
            Some(p) => p.eval(x),
        }
    }

    /// True when `g̃′(0) = g̃′(1) = 0`, the condition for the `k^{1/p−2}`
    /// ghost-force rate.
    pub fn has_flat_ends(&self) -> bool {
        match self.polynomial() {
            None => false,
            Some(p) => {
                let d = p.derivative();
                d.eval(0.0).abs() <= SHAPE_TOL && d.eval(1.0).abs() <= SHAPE_TOL
            }
        }
    }

    /// `‖g̃″‖_{L^p([0,1])}` when the extended shape has an `L^p` second
    /// derivative, i.e. for polynomial shapes with flat ends.
    pub fn second_derivative_norm(&self, p: f64) -> Option<f64> {
        if !self.has_flat_ends() {
            return None;
        }
        self.polynomial()
            .map(|g| g.derivative().derivative().lp_norm_unit(p))
    }

    /// `‖g̃′‖_{L^p([0,1])}`; `None` for the step.
    pub fn first_derivative_norm(&self, p: f64) -> Option<f64> {
        self.polynomial().map(|g| g.derivative().lp_norm_unit(p))
    }
}

/// The shape minimising `‖g̃″‖_{L²}` among flat-ended shapes.
pub fn optimal_shape() -> BlendShape {
    BlendShape::Cubic
}

/// Continuum fraction `γ` on the periodic chain with one atomistic plateau
/// and two mirrored transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendFunction {
    config: LatticeConfig,
    shape: BlendShape,
    center: usize,
    half_width: usize,
    k: usize,
    gamma: Vec<f64>,
}

/// Periodic distance between two sites.
fn periodic_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

impl BlendFunction {
    /// Plateau of `2⌊width/2⌋ + 1` sites centred at `center`, each transition
    /// `J = {i, …, i+k}` sampled as `γ(ξ) = g̃((ξ − i)/k)`.
    pub fn build(
        config: LatticeConfig,
        shape: BlendShape,
        center: usize,
        atomistic_width: usize,
        k: usize,
    ) -> Result<Self> {
        let n = config.n_atoms();
        if k == 0 {
            return Err(BqcError::GeometryDoesNotFit(
                "transition width k must be at least 1".into(),
            ));
        }
        if atomistic_width + 2 * k + 4 > n {
            return Err(BqcError::GeometryDoesNotFit(format!(
                "atomistic width {atomistic_width} + 2k ({}) + 4 exceeds N = {n}",
                2 * k
            )));
        }
        let center = center % n;
        let half_width = atomistic_width / 2;
        let gamma = (0..n)
            .map(|i| {
                let d = periodic_distance(i, center, n);
                if d <= half_width {
                    0.0
                } else {
                    shape.eval((d - half_width) as f64 / k as f64)
                }
            })
            .collect();
        Ok(Self {
            config,
            shape,
            center,
            half_width,
            k,
            gamma,
        })
    }

    pub fn config(&self) -> LatticeConfig {
        self.config
    }

    pub fn shape(&self) -> &BlendShape {
        &self.shape
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of sites on the atomistic plateau.
    pub fn plateau_sites(&self) -> usize {
        2 * self.half_width + 1
    }

    /// `k = 1` (or the step shape) jumps from 0 to 1 in one bond.
    pub fn is_degenerate(&self) -> bool {
        self.k == 1 || matches!(self.shape, BlendShape::Characteristic)
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `η = 1 − γ`, the BQNL blending function.
    pub fn eta(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| 1.0 - g).collect()
    }

    fn sites_where(&self, keep: impl Fn(f64) -> bool) -> Vec<usize> {
        (0..self.gamma.len()).filter(|&i| keep(self.gamma[i])).collect()
    }

    /// `𝒜`: `γ = 0`.
    pub fn atomistic_sites(&self) -> Vec<usize> {
        self.sites_where(|g| g == 0.0)
    }

    /// `𝒞`: `γ = 1`.
    pub fn continuum_sites(&self) -> Vec<usize> {
        self.sites_where(|g| g == 1.0)
    }

    /// `ℐ`: `0 < γ < 1`.
    pub fn interface_sites(&self) -> Vec<usize> {
        self.sites_where(|g| g > 0.0 && g < 1.0)
    }

    /// Transition windows `[J₁, J₂]`, each `k + 1` sites from `γ = 0` to
    /// `γ = 1` (J₁ listed right to left).
    pub fn transitions(&self) -> [Vec<usize>; 2] {
        let n = self.gamma.len();
        let h = self.half_width;
        let up = (0..=self.k).map(|j| (self.center + h + j) % n).collect();
        let down = (0..=self.k)
            .map(|j| (self.center + 2 * n - h - j) % n)
            .collect();
        [down, up]
    }

    /// Ghost-force seminorms at exponent `p`.
    pub fn ghost_report(&self, p: f64) -> Result<GhostReport> {
        let (alpha, _) = bqce_alpha_beta(&self.gamma);
        let alpha_seminorm = lp_norm(&delta2(&alpha), p, None)?;
        let gamma_seminorm = lp_norm(&delta2(&self.gamma), p, None)?;
        let per_transition_bound = self.shape.second_derivative_norm(p).map(|g2| {
            let eps = self.config.spacing();
            let k = self.k as f64;
            eps.powf(1.0 / p) * k.powf(1.0 / p - 2.0) * g2
        });
        Ok(GhostReport {
            alpha_seminorm,
            gamma_seminorm,
            per_transition_bound,
        })
    }

    /// `‖Δ²γ‖_{ℓ^p_ε(J)}` on a single transition window.
    pub fn transition_seminorm(&self, which: usize, p: f64) -> Result<f64> {
        let window = &self.transitions()[which.min(1)];
        lp_norm(&delta2(&self.gamma), p, Some(window))
    }

    /// Coupling seminorm `ε‖Δβ y″‖_{ℓ^p_ε}` for the given weights and its
    /// bound `2 ε^{1+1/p} k^{1/p−1} ‖g̃′‖_{L^p} ‖y″‖_{ℓ^∞(supp Δβ)}`.
    pub fn coupling_report(&self, beta: &[f64], y: &Deformation, p: f64) -> Result<CouplingReport> {
        self.config.check_len(beta.len())?;
        let value = coupling_seminorm(beta, y, p)?;
        let d_beta = delta(beta);
        let support: Vec<usize> = (0..beta.len()).filter(|&i| d_beta[i] != 0.0).collect();
        let curvature = crate::lattice::diff2(y);
        let max_curvature = lp_norm(&curvature, f64::INFINITY, Some(&support))?;
        let bound = self.shape.first_derivative_norm(p).map(|g1| {
            let eps = self.config.spacing();
            let k = self.k as f64;
            2.0 * eps.powf(1.0 + 1.0 / p) * k.powf(1.0 / p - 1.0) * g1 * max_curvature
        });
        Ok(CouplingReport { value, bound })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostReport {
    /// `‖Δ²α‖_{ℓ^p_ε}` with `α = γ̄`.
    pub alpha_seminorm: f64,
    /// `‖Δ²γ‖_{ℓ^p_ε}`.
    pub gamma_seminorm: f64,
    /// `ε^{1/p} k^{1/p−2} ‖g̃″‖_{L^p}`, one transition; `None` without flat ends.
    pub per_transition_bound: Option<f64>,
}

impl GhostReport {
    /// Both transitions together.
    pub fn total_bound(&self) -> Option<f64> {
        self.per_transition_bound.map(|b| 2.0 * b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    pub value: f64,
    pub bound: Option<f64>,
}

/// `ε‖Δβ_ξ y″_ξ‖_{ℓ^p_ε}`.
pub fn coupling_seminorm(beta: &[f64], y: &Deformation, p: f64) -> Result<f64> {
    y.config().check_len(beta.len())?;
    let eps = y.config().spacing();
    let curvature = crate::lattice::diff2(y);
    let product: Vec<f64> = delta(beta)
        .iter()
        .zip(&curvature)
        .map(|(db, c)| db * c)
        .collect();
    Ok(eps * lp_norm(&product, p, None)?)
}

/// BQCE weights: `α = γ̄`, `β_ξ = 1 − (γ_{ξ+1} + γ_{ξ−1})/2`.
pub fn bqce_alpha_beta(gamma: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = gamma.len();
    let alpha = mean_seq(gamma);
    let beta = (0..n)
        .map(|i| 1.0 - 0.5 * (gamma[next(i, n)] + gamma[prev(i, n)]))
        .collect();
    (alpha, beta)
}

/// BQNL weights: `α = 1 − η̄`, `β = η`.
pub fn bqnl_alpha_beta(eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let alpha = mean_seq(eta).into_iter().map(|m| 1.0 - m).collect();
    (alpha, eta.to_vec())
}

/// Checks every value lies in `[0, 1]`.
pub fn check_unit_weights(label: &str, values: &[f64]) -> Result<()> {
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= -SHAPE_TOL && **v <= 1.0 + SHAPE_TOL))
    {
        return Err(BqcError::InvalidWeights(format!(
            "{label}[{i}] = {v} is outside [0, 1]"
        )));
    }
    Ok(())
}
