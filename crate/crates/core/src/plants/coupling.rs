//! Coupling functions between the measured output `y` and the field.
//!
//! Every built-in coupling is linear in `y` inside the field equation,
//! `K(x, y) = k(x) y`, has a boundary gain `K₂(y) = k_b y` (transport
//! only) and a load functional `L(w, y) = ∫ ℓ(x) w(x) dx + φ(y) y` where
//! the `φ` term is optional. For the wave plant `L` integrates against `v`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::signals::Profile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Coupling {
    Zero,
    /// `K(x,y) = gain(x) y`, `K₂(y) = boundary_gain · y`,
    /// `L(w,y) = ∫ kernel·w + [φ(y) y]`. The bound contract needs
    /// `|gain| <= 1`, `|boundary_gain| <= 1` and `‖kernel‖ <= 1`.
    BoundedIntegral {
        kernel: Profile,
        gain: Profile,
        #[serde(default)]
        boundary_gain: f64,
        #[serde(default)]
        phi_term: bool,
    },
    /// `K(x,y) = (x² - x - 2p̄)/(1 + 2p̄) · y`, `L(w,y) = -∫ w`.
    HeatUnstable { p_bar: f64 },
    /// `K₁(x,y) = 2(x + c)/(θ₁,₁θ₂) · y`, `K₂ ≡ 0`, `L(w,y) = ∫ w`.
    TransportUnstable { c: f64, theta_product: f64 },
    /// `K₁ ≡ 0`, `K₂(y) = y`, `L(w,y) = ∫ w`: the field stores delayed
    /// copies of `y`.
    TransportDelay,
    /// `K(x,y) = sin(πx) y`, `L(v,φ,y) = ∫ sin(πx) v`.
    WaveUnstable,
}

/// A coupling tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    /// `k(x_i)` with `K(x_i, y) = k(x_i) y`.
    pub gain: Vec<f64>,
    /// `ℓ(x_i)`.
    pub kernel: Vec<f64>,
    pub boundary_gain: f64,
    pub phi_term: bool,
}

impl Coupling {
    pub fn gain_at(&self, x: f64) -> f64 {
        match self {
            Coupling::Zero | Coupling::TransportDelay => 0.0,
            Coupling::BoundedIntegral { gain, .. } => gain.eval(x),
            Coupling::HeatUnstable { p_bar } => (x * x - x - 2.0 * p_bar) / (1.0 + 2.0 * p_bar),
            Coupling::TransportUnstable { c, theta_product } => 2.0 * (x + c) / theta_product,
            Coupling::WaveUnstable => (PI * x).sin(),
        }
    }

    pub fn kernel_at(&self, x: f64) -> f64 {
        match self {
            Coupling::Zero => 0.0,
            Coupling::BoundedIntegral { kernel, .. } => kernel.eval(x),
            Coupling::HeatUnstable { .. } => -1.0,
            Coupling::TransportUnstable { .. } | Coupling::TransportDelay => 1.0,
            Coupling::WaveUnstable => (PI * x).sin(),
        }
    }

    pub fn boundary_gain(&self) -> f64 {
        match self {
            Coupling::BoundedIntegral { boundary_gain, .. } => *boundary_gain,
            Coupling::TransportDelay => 1.0,
            _ => 0.0,
        }
    }

    pub fn phi_term(&self) -> bool {
        matches!(self, Coupling::BoundedIntegral { phi_term: true, .. })
    }

    pub fn tabulate(&self, n: usize) -> CouplingTable {
        let xs = (0..=n).map(|i| i as f64 / n as f64);
        let (gain, kernel) = match self {
            Coupling::BoundedIntegral { kernel, gain, .. } => (gain.tabulate(n), kernel.tabulate(n)),
            _ => (
                xs.clone().map(|x| self.gain_at(x)).collect(),
                xs.map(|x| self.kernel_at(x)).collect(),
            ),
        };
        CouplingTable {
            gain,
            kernel,
            boundary_gain: self.boundary_gain(),
            phi_term: self.phi_term(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Coupling::Zero => "zero",
            Coupling::BoundedIntegral { .. } => "bounded-integral",
            Coupling::HeatUnstable { .. } => "heat-unstable",
            Coupling::TransportUnstable { .. } => "transport-unstable",
            Coupling::TransportDelay => "transport-delay",
            Coupling::WaveUnstable => "wave-unstable",
        }
    }
}
