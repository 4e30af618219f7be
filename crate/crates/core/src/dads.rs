//! The DADS controller: parameter validation, gain synthesis, the feedback
//! law and the deadzone update law for the dynamic gain `z`.
//!
//! The feedback is
//!
//! ```text
//! u  = -(κ + e^z)^7 (P1(y) + P2(y) y² + P3(y) y⁶) y
//! ż  = Γ e^{-z} (V(y) - ε)⁺,        V(y) = y²/2
//! ```
//!
//! where `P1..P3` must dominate the lower bounds returned by
//! [`min_gain_bounds`]. With `φ ≡ 0` the bounds are constants.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest dynamic gain accepted before the simulation aborts (`e^700` is
/// close to the f64 range).
pub const Z_MAX: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DadsError {
    #[error("invalid controller parameters: {}", format_violations(.0))]
    InvalidParams(Vec<ParamViolation>),
    #[error("safety factor must be >= 1, got {0}")]
    SafetyFactor(f64),
    #[error("phi must have at most 5 even coefficients (degree <= 8), got {0}")]
    PhiDegree(usize),
    #[error("phi coefficient {index} must be finite and non-negative, got {value}")]
    PhiCoefficient { index: usize, value: f64 },
    #[error("constant gain K{index} must be finite and positive, got {value}")]
    ConstantGain { index: usize, value: f64 },
}

fn format_violations(v: &[ParamViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// The five controller constants `ε, Γ, κ, a, C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DadsParams {
    /// Deadzone radius on `V(y)`.
    pub epsilon: f64,
    /// Adaptation rate `Γ`.
    pub gamma: f64,
    pub kappa: f64,
    pub a: f64,
    /// The decay constant `C`.
    pub c_decay: f64,
}

/// One failed predicate of [`DadsParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamViolation {
    EpsilonPositive,
    GammaPositive,
    KappaPositive,
    APositive,
    CDecayPositive,
    /// `2κ > a`
    TwoKappaExceedsA,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParamViolation::EpsilonPositive => "epsilon > 0",
            ParamViolation::GammaPositive => "gamma > 0",
            ParamViolation::KappaPositive => "kappa > 0",
            ParamViolation::APositive => "a > 0",
            ParamViolation::CDecayPositive => "c_decay > 0",
            ParamViolation::TwoKappaExceedsA => "2*kappa > a",
        };
        f.write_str(s)
    }
}

impl DadsParams {
    /// The controller constants used for the planar example: `ε = 5e-5`,
    /// `Γ = 100`, `κ = 2.1`, `a = 1`, `C = 80`.
    pub const PLANAR_EXAMPLE: DadsParams = DadsParams {
        epsilon: 5e-5,
        gamma: 100.0,
        kappa: 2.1,
        a: 1.0,
        c_decay: 80.0,
    };

    /// Checks every invariant and names each one that fails. NaN fails
    /// every positivity test.
    pub fn validate(&self) -> Result<(), Vec<ParamViolation>> {
        let mut out = Vec::new();
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.epsilon) {
            out.push(ParamViolation::EpsilonPositive);
        }
        if !positive(self.gamma) {
            out.push(ParamViolation::GammaPositive);
        }
        if !positive(self.kappa) {
            out.push(ParamViolation::KappaPositive);
        }
        if !positive(self.a) {
            out.push(ParamViolation::APositive);
        }
        if !positive(self.c_decay) {
            out.push(ParamViolation::CDecayPositive);
        }
        if !(2.0 * self.kappa > self.a) {
            out.push(ParamViolation::TwoKappaExceedsA);
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn validated(self) -> Result<Self, DadsError> {
        self.validate().map_err(DadsError::InvalidParams)?;
        Ok(self)
    }
}

/// Total validation function; see [`DadsParams::validate`].
pub fn validate_params(p: &DadsParams) -> Result<(), Vec<ParamViolation>> {
    p.validate()
}

/// The known bound function `φ(y)` of the load functional, restricted to an
/// even polynomial with non-negative coefficients:
/// `φ(y) = c0 + c2 y² + c4 y⁴ + c6 y⁶ + c8 y⁸`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhiSpec {
    coeffs: [f64; 5],
}

impl PhiSpec {
    pub const ZERO: PhiSpec = PhiSpec { coeffs: [0.0; 5] };

    /// `coeffs[k]` multiplies `y^(2k)`.
    pub fn new(coeffs: &[f64]) -> Result<Self, DadsError> {
        if coeffs.len() > 5 {
            return Err(DadsError::PhiDegree(coeffs.len()));
        }
        let mut c = [0.0; 5];
        for (i, &v) in coeffs.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(DadsError::PhiCoefficient { index: i, value: v });
            }
            c[i] = v;
        }
        Ok(PhiSpec { coeffs: c })
    }

    pub fn coeffs(&self) -> &[f64; 5] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let y2 = y * y;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * y2 + c)
    }
}

/// A triple `(P1, P2, P3)`, used both for gain values and for their lower
/// bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainTriple {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl GainTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    fn scaled(self, s: f64) -> Self {
        GainTriple {
            p1: s * self.p1,
            p2: s * self.p2,
            p3: s * self.p3,
        }
    }
}

/// Right-hand sides of the three gain inequalities evaluated at `y`.
pub fn min_gain_bounds(p: &DadsParams, phi: &PhiSpec, y: f64) -> GainTriple {
    let DadsParams {
        kappa: k,
        a,
        c_decay: c,
        ..
    } = *p;
    let ph = phi.eval(y);
    let core = k + 4.0 * a * c + 4.0 * k.powi(3) + 4.0 * a * k * ph;

    let p1 = (core + 8.0 * a * k * k) / (4.0 * a * k.powi(6));
    let p2 = (core * core / (16.0 * k) + k * k + a * a * ph * ph + 4.0 * a * a * (k.powi(3) + 1.0))
        / (4.0 * a.powi(3) * k.powi(5));
    let q = k * k + a * a * ph * ph;
    let p3 = (q * q + 16.0 * a.powi(4)) / (64.0 * a.powi(7) * k.powi(4));
    GainTriple { p1, p2, p3 }
}

/// How the gain functions are represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GainMode {
    /// Constant gains `K1, K2, K3`.
    Constant { k: [f64; 3] },
    /// `P_i(y) = safety_factor × min_gain_bounds_i(y)`.
    PhiDerived {
        params: DadsParams,
        phi: PhiSpec,
        safety_factor: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainProfile {
    mode: GainMode,
}

impl GainProfile {
    pub fn constant(k1: f64, k2: f64, k3: f64) -> Result<Self, DadsError> {
        for (i, v) in [k1, k2, k3].into_iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DadsError::ConstantGain {
                    index: i + 1,
                    value: v,
                });
            }
        }
        Ok(GainProfile {
            mode: GainMode::Constant { k: [k1, k2, k3] },
        })
    }

    /// The gains `K = (15/2, 87/2, 24)` of the planar example.
    pub fn planar_example() -> Self {
        GainProfile {
            mode: GainMode::Constant {
                k: [7.5, 43.5, 24.0],
            },
        }
    }

    pub fn mode(&self) -> &GainMode {
        &self.mode
    }

    /// 1 for constant-mode profiles.
    pub fn safety_factor(&self) -> f64 {
        match self.mode {
            GainMode::Constant { .. } => 1.0,
            GainMode::PhiDerived { safety_factor, .. } => safety_factor,
        }
    }

    pub fn eval(&self, y: f64) -> GainTriple {
        match &self.mode {
            GainMode::Constant { k } => GainTriple {
                p1: k[0],
                p2: k[1],
                p3: k[2],
            },
            GainMode::PhiDerived {
                params,
                phi,
                safety_factor,
            } => min_gain_bounds(params, phi, y).scaled(*safety_factor),
        }
    }
}

pub fn make_gain_profile(
    p: &DadsParams,
    phi: &PhiSpec,
    safety_factor: f64,
) -> Result<GainProfile, DadsError> {
    p.validate().map_err(DadsError::InvalidParams)?;
    if !(safety_factor >= 1.0 && safety_factor.is_finite()) {
        return Err(DadsError::SafetyFactor(safety_factor));
    }
    Ok(GainProfile {
        mode: GainMode::PhiDerived {
            params: *p,
            phi: *phi,
            safety_factor,
        },
    })
}

/// First sample where a gain falls below its lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainViolation {
    pub y: f64,
    /// 1, 2 or 3.
    pub index: usize,
    pub value: f64,
    pub bound: f64,
}

/// `P_i(y) - min_gain_bounds_i(y)` for each `i`.
pub fn gain_slack(g: &GainProfile, p: &DadsParams, phi: &PhiSpec, y: f64) -> [f64; 3] {
    let v = g.eval(y).as_array();
    let b = min_gain_bounds(p, phi, y).as_array();
    [v[0] - b[0], v[1] - b[1], v[2] - b[2]]
}

pub fn verify_gains(
    g: &GainProfile,
    p: &DadsParams,
    phi: &PhiSpec,
    y_samples: &[f64],
) -> Result<(), GainViolation> {
    for &y in y_samples {
        let v = g.eval(y).as_array();
        let b = min_gain_bounds(p, phi, y).as_array();
        for i in 0..3 {
            if !(v[i] >= b[i]) {
                return Err(GainViolation {
                    y,
                    index: i + 1,
                    value: v[i],
                    bound: b[i],
                });
            }
        }
    }
    Ok(())
}

/// The dynamic nonlinear damping factor `(κ + e^z)^7`.
#[inline]
pub fn damping_factor(z: f64, kappa: f64) -> f64 {
    (kappa + z.exp()).powi(7)
}

/// The feedback law.
#[inline]
pub fn control(y: f64, z: f64, p: &DadsParams, g: &GainProfile) -> f64 {
    let gains = g.eval(y);
    let y2 = y * y;
    -damping_factor(z, p.kappa) * (gains.p1 + gains.p2 * y2 + gains.p3 * y2 * y2 * y2) * y
}

/// `V(y) = y²/2`.
#[inline]
pub fn lyapunov_v(y: f64) -> f64 {
    0.5 * y * y
}

/// `ż = Γ e^{-z} (V(y) - ε)⁺`.
#[inline]
pub fn update_rate(y: f64, z: f64, p: &DadsParams) -> f64 {
    let excess = (lyapunov_v(y) - p.epsilon).max(0.0);
    if excess == 0.0 {
        return 0.0;
    }
    p.gamma * (-z).exp() * excess
}

/// `d/dt e^z = Γ (V(y) - ε)⁺`, the update law in the exponential
/// coordinate. Unlike `ż` it does not blow up as `z → -∞`.
#[inline]
pub fn gain_growth_rate(y: f64, p: &DadsParams) -> f64 {
    p.gamma * (lyapunov_v(y) - p.epsilon).max(0.0)
}

/// `g(s, l) = ((s - κ - e^l)⁺)²`.
#[inline]
pub fn g_excess(s: f64, l: f64, p: &DadsParams) -> f64 {
    let e = (s - p.kappa - l.exp()).max(0.0);
    e * e
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: DadsParams = DadsParams::PLANAR_EXAMPLE;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn planar_example_params_are_valid() {
        assert_eq!(validate_params(&P), Ok(()));
    }

    #[test]
    fn two_kappa_equal_a_is_rejected() {
        let p = DadsParams {
            kappa: 1.0,
            a: 2.0,
            ..P
        };
        assert_eq!(p.validate(), Err(vec![ParamViolation::TwoKappaExceedsA]));
    }

    #[test]
    fn zero_epsilon_is_rejected() {
        let p = DadsParams { epsilon: 0.0, ..P };
        assert_eq!(p.validate(), Err(vec![ParamViolation::EpsilonPositive]));
    }

    #[test]
    fn nan_fails_every_predicate_it_touches() {
        let p = DadsParams {
            kappa: f64::NAN,
            ..P
        };
        let v = p.validate().unwrap_err();
        assert!(v.contains(&ParamViolation::KappaPositive));
        assert!(v.contains(&ParamViolation::TwoKappaExceedsA));
    }

    #[test]
    fn planar_minimum_gains() {
        // frozen from direct arithmetic on the constant-gain inequalities
        let b = min_gain_bounds(&P, &PhiSpec::ZERO, 0.3);
        assert!(close(b.p1, 1.1497080531367387, 1e-12));
        assert!(close(b.p2, 23.776810414452573, 1e-12));
        assert!(close(b.p3, 0.028479726168623154, 1e-12));
    }

    #[test]
    fn p3_closed_form_without_phi() {
        for (k, a) in [(1.0, 0.5), (3.0, 2.0), (0.7, 1.3)] {
            let p = DadsParams { kappa: k, a, ..P };
            let expect = (k.powi(4) + 16.0 * a.powi(4)) / (64.0 * a.powi(7) * k.powi(4));
            for y in [-5.0, 0.0, 2.0] {
                assert!(close(min_gain_bounds(&p, &PhiSpec::ZERO, y).p3, expect, 1e-13));
            }
        }
    }

    #[test]
    fn example_constants_dominate_minimum() {
        let ys: Vec<f64> = (0..10_000).map(|i| -10.0 + 20.0 * i as f64 / 9_999.0).collect();
        assert!(verify_gains(&GainProfile::planar_example(), &P, &PhiSpec::ZERO, &ys).is_ok());
    }

    #[test]
    fn halved_p1_is_reported() {
        let g = GainProfile::constant(0.5 * 1.1497080531367387, 43.5, 24.0).unwrap();
        let err = verify_gains(&g, &P, &PhiSpec::ZERO, &[-1.0, 0.0, 1.0]).unwrap_err();
        assert_eq!(err.y, -1.0);
        assert_eq!(err.index, 1);
    }

    #[test]
    fn unit_safety_factor_has_zero_slack() {
        let phi = PhiSpec::new(&[0.5, 1.0]).unwrap();
        let g = make_gain_profile(&P, &phi, 1.0).unwrap();
        for y in [-3.0, -0.1, 0.0, 0.7, 4.0] {
            assert_eq!(gain_slack(&g, &P, &phi, y), [0.0; 3]);
        }
        let g2 = make_gain_profile(&P, &phi, 2.0).unwrap();
        for y in [-3.0, 0.0, 4.0] {
            let v = g2.eval(y).as_array();
            let b = min_gain_bounds(&P, &phi, y).as_array();
            for i in 0..3 {
                assert!(v[i] >= 2.0 * b[i]);
            }
        }
    }

    #[test]
    fn safety_factor_below_one_is_rejected() {
        assert_eq!(
            make_gain_profile(&P, &PhiSpec::ZERO, 0.9),
            Err(DadsError::SafetyFactor(0.9))
        );
    }

    #[test]
    fn phi_validation() {
        assert!(PhiSpec::new(&[0.0; 6]).is_err());
        assert!(PhiSpec::new(&[1.0, -1.0]).is_err());
        let phi = PhiSpec::new(&[1.0, 2.0, 0.0, 0.0, 3.0]).unwrap();
        assert_eq!(phi.eval(2.0), 1.0 + 8.0 + 3.0 * 256.0);
        assert_eq!(phi.eval(-2.0), phi.eval(2.0));
    }

    #[test]
    fn phi_makes_bounds_y_dependent() {
        let phi = PhiSpec::new(&[0.0, 1.0]).unwrap();
        let b0 = min_gain_bounds(&P, &phi, 0.0);
        let b1 = min_gain_bounds(&P, &phi, 1.0);
        assert!(b1.p1 > b0.p1 && b1.p2 > b0.p2 && b1.p3 > b0.p3);
        assert_eq!(b0, min_gain_bounds(&P, &PhiSpec::ZERO, 0.0));
    }

    #[test]
    fn control_values() {
        let g = GainProfile::planar_example();
        assert_eq!(control(0.0, 3.0, &P, &g), 0.0);
        assert!(close(control(0.1, -10.0, &P, &g), -142.93843743586328, 1e-12));
        assert_eq!(control(-0.1, -10.0, &P, &g), -control(0.1, -10.0, &P, &g));
    }

    #[test]
    fn lyapunov_values() {
        assert_eq!(lyapunov_v(0.0), 0.0);
        assert!(close(lyapunov_v(0.1), 0.005, 1e-15));
        assert_eq!(lyapunov_v(-0.37), lyapunov_v(0.37));
    }

    #[test]
    fn update_rate_values() {
        let edge = (2.0 * P.epsilon).sqrt();
        assert_eq!(update_rate(edge, 0.0, &P), 0.0);
        assert_eq!(update_rate(0.5 * edge, -4.0, &P), 0.0);
        assert!(close(update_rate(0.1, 0.0, &P), 0.495, 1e-12));
        let r0 = update_rate(0.1, 0.3, &P);
        let r1 = update_rate(0.1, 0.3 + 2f64.ln(), &P);
        assert!(close(r1, 0.5 * r0, 1e-12));
    }

    #[test]
    fn g_excess_values() {
        assert_eq!(g_excess(2.0, 0.0, &P), 0.0);
        assert_eq!(g_excess(0.0, -50.0, &P), 0.0);
        assert!(close(g_excess(20.0, -10.0, &P), 320.40837468457556, 1e-12));
    }
}
