//! Pair potentials with closed-form derivatives up to fourth order, the
//! inflection point `r*` and the derivative envelopes
//! `C_i(r₀) = sup_{r ≥ r₀} |φ⁽ⁱ⁾(r)|`.

use crate::error::{BqcError, Result};

/// Highest derivative order provided by every family.
pub const MAX_ORDER: usize = 4;

/// Grid used by [`Potential::sampled_envelope`].
pub const SAMPLE_POINTS: usize = 10_000;
pub const SAMPLE_SPAN: f64 = 1e3;
pub const SAMPLE_SAFETY: f64 = 1.01;

const INFLECTION_TOL: f64 = 1e-10;

// (-1)^i n (n+1) ... (n+i-1): coefficient of r^{-n-i} in d^i/dr^i r^{-n}
const LJ_C12: [f64; 6] = [1.0, -12.0, 156.0, -2184.0, 32760.0, -524160.0];
const LJ_C6: [f64; 6] = [1.0, -6.0, 42.0, -336.0, 3024.0, -30240.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `D[(σ/r)¹² − 2(σ/r)⁶]`
    LennardJones { depth: f64, sigma: f64 },
    /// `D[e^{−2a(r−σ)} − 2e^{−a(r−σ)}]`
    Morse { depth: f64, stiffness: f64, sigma: f64 },
}

impl Family {
    fn name(&self) -> &'static str {
        match self {
            Family::LennardJones { .. } => "lennard-jones",
            Family::Morse { .. } => "morse",
        }
    }

    // extended to order 5 so the critical points of φ⁽⁴⁾ are reachable
    fn derivative(&self, order: usize, r: f64) -> f64 {
        match *self {
            Family::LennardJones { depth, sigma } => {
                let x6 = (sigma / r).powi(6);
                let x12 = x6 * x6;
                depth * (LJ_C12[order] * x12 - 2.0 * LJ_C6[order] * x6) / r.powi(order as i32)
            }
            Family::Morse {
                depth,
                stiffness: a,
                sigma,
            } => {
                let t = (-a * (r - sigma)).exp();
                let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                let scale = depth * sign * a.powi(order as i32);
                scale * ((1u64 << order) as f64 * t * t - 2.0 * t)
            }
        }
    }

    /// Bracket `[lo, hi]` with `φ″(lo) > 0 > φ″(hi)`.
    fn inflection_bracket(&self) -> (f64, f64) {
        match *self {
            Family::LennardJones { sigma, .. } => (sigma, 2.0 * sigma),
            Family::Morse {
                stiffness, sigma, ..
            } => (sigma, sigma + 4.0_f64.ln() / stiffness),
        }
    }

    /// `C_i(r₀)` from the unique critical point of `φ⁽ⁱ⁾` on `(0, ∞)`.
    fn envelope(&self, order: usize, r0: f64) -> f64 {
        let at_r0 = self.derivative(order, r0).abs();
        match *self {
            Family::LennardJones { sigma, .. } => {
                let ratio = LJ_C12[order + 1] / (2.0 * LJ_C6[order + 1]);
                let critical = sigma * ratio.powf(1.0 / 6.0);
                if r0 < critical {
                    at_r0.max(self.derivative(order, critical).abs())
                } else {
                    at_r0
                }
            }
            Family::Morse {
                depth,
                stiffness: a,
                sigma,
            } => {
                // |φ⁽ⁱ⁾| = D aⁱ |2ⁱt² − 2t| with t = e^{−a(r−σ)} ∈ (0, t₀]
                let t0 = (-a * (r0 - sigma)).exp();
                let vertex = 1.0 / (1u64 << order) as f64;
                if t0 > vertex {
                    at_r0.max(depth * a.powi(order as i32) * vertex)
                } else {
                    at_r0
                }
            }
        }
    }
}

/// Immutable pair potential with a verified inflection point.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    family: Family,
    inflection: f64,
}

impl Potential {
    pub fn new(family: Family) -> Result<Self> {
        let positive = |label: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(BqcError::InvalidPotential(format!(
                    "{} parameter {label} = {v} must be positive",
                    family.name()
                )))
            }
        };
        match family {
            Family::LennardJones { depth, sigma } => {
                positive("depth", depth)?;
                positive("sigma", sigma)?;
            }
            Family::Morse {
                depth,
                stiffness,
                sigma,
            } => {
                positive("depth", depth)?;
                positive("stiffness", stiffness)?;
                positive("sigma", sigma)?;
            }
        }
        let inflection = bisect_inflection(&family);
        let curvature = family.derivative(2, inflection);
        let scale = family.derivative(2, family.inflection_bracket().0).abs();
        if curvature.abs() > INFLECTION_TOL * scale.max(1.0) {
            return Err(BqcError::InvalidPotential(format!(
                "φ″(r*) = {curvature:e} at r* = {inflection}"
            )));
        }
        Ok(Self { family, inflection })
    }

    /// `r⁻¹² − 2r⁻⁶`.
    pub fn lennard_jones() -> Self {
        Self::new(Family::LennardJones {
            depth: 1.0,
            sigma: 1.0,
        })
        .expect("reference Lennard-Jones parameters are valid")
    }

    /// `e^{−2a(r−1)} − 2e^{−a(r−1)}`.
    pub fn morse(stiffness: f64) -> Result<Self> {
        Self::new(Family::Morse {
            depth: 1.0,
            stiffness,
            sigma: 1.0,
        })
    }

    /// Builds a potential from a family name and positional parameters.
    ///
    /// `lj`/`lennard-jones`: `[depth, sigma]`; `morse`: `[stiffness, depth, sigma]`.
    /// Missing trailing parameters take the reference values.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let get = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let (family, max_params) = match name.to_ascii_lowercase().as_str() {
            "lj" | "lennard-jones" | "lennard_jones" => (
                Family::LennardJones {
                    depth: get(0, 1.0),
                    sigma: get(1, 1.0),
                },
                2,
            ),
            "morse" => (
                Family::Morse {
                    stiffness: get(0, 4.0),
                    depth: get(1, 1.0),
                    sigma: get(2, 1.0),
                },
                3,
            ),
            other => {
                return Err(BqcError::InvalidPotential(format!(
                    "unknown family '{other}' (expected lj or morse)"
                )))
            }
        };
        if params.len() > max_params {
            return Err(BqcError::InvalidPotential(format!(
                "{} takes at most {max_params} parameters, got {}",
                family.name(),
                params.len()
            )));
        }
        Self::new(family)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// `r*`: `φ″ > 0` on `(0, r*)` and `φ″ < 0` on `(r*, ∞)`.
    pub fn inflection(&self) -> f64 {
        self.inflection
    }

    /// `φ⁽ⁱ⁾(r)` for `i ∈ 0..=4`.
    pub fn eval_derivative(&self, order: usize, r: f64) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(BqcError::DerivativeOrder(order));
        }
        if !(r > 0.0) {
            return Err(BqcError::NonpositiveRadius(r));
        }
        Ok(self.family.derivative(order, r))
    }

    /// Unchecked evaluation for hot loops; callers guarantee `r > 0`.
    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        self.family.derivative(0, r)
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        self.family.derivative(1, r)
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        self.family.derivative(2, r)
    }

    #[inline]
    pub fn d3(&self, r: f64) -> f64 {
        self.family.derivative(3, r)
    }

    #[inline]
    pub fn d4(&self, r: f64) -> f64 {
        self.family.derivative(4, r)
    }

    fn check_envelope_args(order: usize, r0: f64) -> Result<()> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(BqcError::DerivativeOrder(order));
        }
        if !(r0 > 0.0) {
            return Err(BqcError::NonpositiveRadius(r0));
        }
        Ok(())
    }

    /// `C_i(r₀)` from the family's critical-point structure (exact).
    pub fn envelope(&self, order: usize, r0: f64) -> Result<f64> {
        Self::check_envelope_args(order, r0)?;
        Ok(self.family.envelope(order, r0))
    }

    /// `C_i(r₀)` by sampling a log grid on `[r₀, 10³ r₀]`, inflated by 1%.
    pub fn sampled_envelope(&self, order: usize, r0: f64) -> Result<f64> {
        Self::check_envelope_args(order, r0)?;
        let step = SAMPLE_SPAN.ln() / (SAMPLE_POINTS - 1) as f64;
        let max = (0..SAMPLE_POINTS)
            .map(|j| self.family.derivative(order, r0 * (step * j as f64).exp()).abs())
            .fold(0.0, f64::max);
        Ok(SAMPLE_SAFETY * max)
    }
}

fn bisect_inflection(family: &Family) -> f64 {
    let (mut lo, mut hi) = family.inflection_bracket();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if family.derivative(2, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
