//! Plant models: the planar ODE and the three ODE–PDE interconnections
//! (heat, transport, damped wave), discretized in space by the method of
//! lines.
//!
//! All plants share the measured equation
//!
//! ```text
//! ẏ = b(t) u + θ₂(t) L(w, y) + d(t)
//! ```
//!
//! and differ in the unmeasured state `w` and its dynamics. Discrete states
//! are flat `f64` slices with the layout
//!
//! | kind      | layout                                |
//! |-----------|---------------------------------------|
//! | planar    | `[w, y]`                              |
//! | heat      | `[w_0 .. w_N, y]`                     |
//! | transport | `[w_0 .. w_N, y]`                     |
//! | wave      | `[v_0 .. v_N, φ_0 .. φ_N, y]`         |
//!
//! The controller state `z` is appended by the simulation driver.

mod coupling;
mod field;

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dads::PhiSpec;
use crate::numerics::fd::{add_laplacian, grad_l2_sq, l2_sq, trapz_by};
use crate::signals::{Profile, Signal, SpaceTimeSignal};

pub use coupling::{Coupling, CouplingTable};
pub use field::{BoundaryTag, Field, MIN_INTERVALS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("grid needs N >= {MIN_INTERVALS} intervals, got {0}")]
    GridTooSmall(usize),
    #[error("dirichlet field has non-zero endpoint value {0}")]
    NonZeroBoundary(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("state does not match plant kind {expected}")]
    KindMismatch { expected: PlantKind },
    #[error("field has {got} intervals, expected {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("{0} field has boundary tag {1}, expected {2}")]
    WrongTag(&'static str, BoundaryTag, BoundaryTag),
    #[error("{kind} plant with coupling {coupling} has no analytic unstable solution")]
    NoUnstableInstance { kind: PlantKind, coupling: String },
    #[error("unstable instance requires {0}")]
    InstanceMismatch(String),
    #[error("b signal: {0}")]
    InputCoefficient(#[from] crate::signals::SignalError),
    #[error("coupling {coupling} cannot be used with a {kind} plant")]
    CouplingKind { coupling: String, kind: PlantKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    Planar,
    Heat,
    Transport,
    Wave,
}

impl fmt::Display for PlantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlantKind::Planar => "planar",
            PlantKind::Heat => "heat",
            PlantKind::Transport => "transport",
            PlantKind::Wave => "wave",
        })
    }
}

impl PlantKind {
    /// Length of the discrete plant state (without `z`).
    pub fn state_len(self, n: usize) -> usize {
        match self {
            PlantKind::Planar => 2,
            PlantKind::Heat | PlantKind::Transport => n + 2,
            PlantKind::Wave => 2 * n + 3,
        }
    }

    pub fn y_index(self, n: usize) -> usize {
        self.state_len(n) - 1
    }
}

/// `ẇ = -p̄ w + θ₁(t) y`, `ẏ = θ₂(t) w + b(t) u + d(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarPlant {
    pub p_bar: f64,
    pub theta1: Signal,
    pub theta2: Signal,
    pub b: Signal,
    pub d: Signal,
}

/// `w_t = p̄ w_xx + θ₁(t,x) K(x,y) + δ(t,x)` with `w(t,0) = w(t,1) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatPlant {
    pub p_bar: f64,
    pub coupling: Coupling,
    pub phi: PhiSpec,
    pub theta1: SpaceTimeSignal,
    pub delta: SpaceTimeSignal,
    pub theta2: Signal,
    pub b: Signal,
    pub d: Signal,
}

/// `w_t + c w_x = θ₁,₁(t,x) K₁(x,y) + δ(t,x)` with
/// `w(t,0) = θ₁,₂(t) K₂(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlant {
    pub c: f64,
    pub coupling: Coupling,
    pub phi: PhiSpec,
    pub theta11: SpaceTimeSignal,
    pub theta12: Signal,
    pub delta: SpaceTimeSignal,
    pub theta2: Signal,
    pub b: Signal,
    pub d: Signal,
}

/// `v_t = φ`, `φ_t = c² v_xx - σ φ + θ₁(t,x) K(x,y) + δ(t,x)` with
/// Dirichlet ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePlant {
    pub c: f64,
    pub sigma: f64,
    pub coupling: Coupling,
    pub phi: PhiSpec,
    pub theta1: SpaceTimeSignal,
    pub delta: SpaceTimeSignal,
    pub theta2: Signal,
    pub b: Signal,
    pub d: Signal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Plant {
    Planar(PlanarPlant),
    Heat(HeatPlant),
    Transport(TransportPlant),
    Wave(WavePlant),
}

/// The scalar signals every plant shares.
pub struct OutputSignals<'a> {
    pub theta2: &'a Signal,
    pub b: &'a Signal,
    pub d: &'a Signal,
}

impl Plant {
    pub fn kind(&self) -> PlantKind {
        match self {
            Plant::Planar(_) => PlantKind::Planar,
            Plant::Heat(_) => PlantKind::Heat,
            Plant::Transport(_) => PlantKind::Transport,
            Plant::Wave(_) => PlantKind::Wave,
        }
    }

    pub fn output_signals(&self) -> OutputSignals<'_> {
        let (theta2, b, d) = match self {
            Plant::Planar(p) => (&p.theta2, &p.b, &p.d),
            Plant::Heat(p) => (&p.theta2, &p.b, &p.d),
            Plant::Transport(p) => (&p.theta2, &p.b, &p.d),
            Plant::Wave(p) => (&p.theta2, &p.b, &p.d),
        };
        OutputSignals { theta2, b, d }
    }

    pub fn coupling(&self) -> Option<&Coupling> {
        match self {
            Plant::Planar(_) => None,
            Plant::Heat(p) => Some(&p.coupling),
            Plant::Transport(p) => Some(&p.coupling),
            Plant::Wave(p) => Some(&p.coupling),
        }
    }

    pub fn phi(&self) -> PhiSpec {
        match self {
            Plant::Planar(_) => PhiSpec::ZERO,
            Plant::Heat(p) => p.phi,
            Plant::Transport(p) => p.phi,
            Plant::Wave(p) => p.phi,
        }
    }

    /// Checks positivity of the physical constants, the positive floor on
    /// `b` and that the coupling is meant for this plant kind.
    pub fn validate(&self) -> Result<(), PlantError> {
        let pos = |v: f64, name: &'static str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(PlantError::NonPositive(name))
            }
        };
        match self {
            Plant::Planar(p) => pos(p.p_bar, "p_bar")?,
            Plant::Heat(p) => pos(p.p_bar, "p_bar")?,
            Plant::Transport(p) => pos(p.c, "c")?,
            Plant::Wave(p) => {
                pos(p.c, "c")?;
                pos(p.sigma, "sigma")?;
            }
        }
        self.output_signals().b.check_positive_floor()?;
        if let Some(c) = self.coupling() {
            let ok = match c {
                Coupling::Zero | Coupling::BoundedIntegral { .. } => true,
                Coupling::HeatUnstable { .. } => self.kind() == PlantKind::Heat,
                Coupling::TransportUnstable { .. } | Coupling::TransportDelay => {
                    self.kind() == PlantKind::Transport
                }
                Coupling::WaveUnstable => self.kind() == PlantKind::Wave,
            };
            if !ok {
                return Err(PlantError::CouplingKind {
                    coupling: c.name().into(),
                    kind: self.kind(),
                });
            }
        }
        Ok(())
    }

    /// Tabulates spatial profiles on an `n`-interval grid.
    pub fn discretize(&self, n: usize) -> Discretized<'_> {
        let empty = CouplingTable {
            gain: Vec::new(),
            kernel: Vec::new(),
            boundary_gain: 0.0,
            phi_term: false,
        };
        let (table, theta1_g, delta_g) = match self {
            Plant::Planar(_) => (empty, Vec::new(), Vec::new()),
            Plant::Heat(p) => (
                p.coupling.tabulate(n),
                p.theta1.space.tabulate(n),
                p.delta.space.tabulate(n),
            ),
            Plant::Transport(p) => (
                p.coupling.tabulate(n),
                p.theta11.space.tabulate(n),
                p.delta.space.tabulate(n),
            ),
            Plant::Wave(p) => (
                p.coupling.tabulate(n),
                p.theta1.space.tabulate(n),
                p.delta.space.tabulate(n),
            ),
        };
        Discretized {
            plant: self,
            n,
            h: 1.0 / n as f64,
            table,
            theta1_g,
            delta_g,
        }
    }
}

/// A plant together with its spatial tables on a fixed grid.
#[derive(Debug, Clone)]
pub struct Discretized<'a> {
    pub plant: &'a Plant,
    pub n: usize,
    pub h: f64,
    pub table: CouplingTable,
    pub theta1_g: Vec<f64>,
    pub delta_g: Vec<f64>,
}

impl Discretized<'_> {
    pub fn kind(&self) -> PlantKind {
        self.plant.kind()
    }

    pub fn state_len(&self) -> usize {
        self.kind().state_len(self.n)
    }

    pub fn y_index(&self) -> usize {
        self.kind().y_index(self.n)
    }

    /// Injected inflow value `θ₁,₂(t) K₂(y)` of the transport plant.
    #[inline]
    pub fn inflow(&self, t: f64, y: f64) -> f64 {
        match self.plant {
            Plant::Transport(p) => p.theta12.eval(t) * self.table.boundary_gain * y,
            _ => 0.0,
        }
    }

    /// Overwrites the transport inflow node with its injected value.
    pub fn pin_boundary(&self, t: f64, x: &mut [f64], y: f64) {
        if let Plant::Transport(_) = self.plant {
            x[0] = self.inflow(t, y);
        }
    }

    /// `L(w, y)` on the discrete state.
    #[inline]
    fn load(&self, x: &[f64], y: f64, first: f64) -> f64 {
        let n = self.n;
        let k = &self.table.kernel;
        let mut l = trapz_by(n, self.h, |i| {
            let w = if i == 0 { first } else { x[i] };
            k[i] * w
        });
        if self.table.phi_term {
            l += self.plant.phi().eval(y) * y;
        }
        l
    }

    /// Method-of-lines right-hand side. `y` is passed explicitly so a driver
    /// can substitute a prescribed output; `dx[y_index]` receives `ẏ`.
    pub fn rhs(&self, t: f64, x: &[f64], y: f64, u: f64, dx: &mut [f64]) {
        let n = self.n;
        let out = self.plant.output_signals();
        let load = match self.plant {
            Plant::Planar(p) => {
                let w = x[0];
                dx[0] = -p.p_bar * w + p.theta1.eval(t) * y;
                w
            }
            Plant::Heat(p) => {
                dx[..=n].fill(0.0);
                add_laplacian(&x[..=n], self.h, p.p_bar, &mut dx[..=n]);
                let th = p.theta1.time.eval(t) * y;
                let de = p.delta.time.eval(t);
                for i in 1..n {
                    dx[i] += th * self.theta1_g[i] * self.table.gain[i] + de * self.delta_g[i];
                }
                self.load(x, y, x[0])
            }
            Plant::Transport(p) => {
                let inflow = self.inflow(t, y);
                let th = p.theta11.time.eval(t) * y;
                let de = p.delta.time.eval(t);
                let c_h = p.c / self.h;
                dx[0] = 0.0;
                let mut prev = inflow;
                for i in 1..=n {
                    dx[i] = -c_h * (x[i] - prev)
                        + th * self.theta1_g[i] * self.table.gain[i]
                        + de * self.delta_g[i];
                    prev = x[i];
                }
                self.load(x, y, inflow)
            }
            Plant::Wave(p) => {
                let (v, rest) = x.split_at(n + 1);
                let ph = &rest[..=n];
                let (dv, drest) = dx.split_at_mut(n + 1);
                let dph = &mut drest[..=n];
                dv[0] = 0.0;
                dv[n] = 0.0;
                dv[1..n].copy_from_slice(&ph[1..n]);
                dph.fill(0.0);
                add_laplacian(v, self.h, p.c * p.c, dph);
                let th = p.theta1.time.eval(t) * y;
                let de = p.delta.time.eval(t);
                for i in 1..n {
                    dph[i] += -p.sigma * ph[i]
                        + th * self.theta1_g[i] * self.table.gain[i]
                        + de * self.delta_g[i];
                }
                self.load(v, y, v[0])
            }
        };
        let yi = self.y_index();
        dx[yi] = out.b.eval(t) * u + out.theta2.eval(t) * load + out.d.eval(t);
    }

    /// `‖w‖²` in the plant's state norm: `|w|²` (planar), `‖w‖²_{L²}`
    /// (heat, transport), `‖v_x‖² + ‖φ‖²` (wave).
    pub fn w_norm_sq(&self, x: &[f64]) -> f64 {
        let n = self.n;
        match self.kind() {
            PlantKind::Planar => x[0] * x[0],
            PlantKind::Heat | PlantKind::Transport => l2_sq(&x[..=n], self.h),
            PlantKind::Wave => grad_l2_sq(&x[..=n], self.h) + l2_sq(&x[n + 1..=2 * n + 1], self.h),
        }
    }
}

/// Typed plant state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PlantState {
    Planar { w: f64, y: f64 },
    Heat { w: Field, y: f64 },
    Transport { w: Field, y: f64 },
    Wave { v: Field, phi: Field, y: f64 },
}

impl PlantState {
    pub fn kind(&self) -> PlantKind {
        match self {
            PlantState::Planar { .. } => PlantKind::Planar,
            PlantState::Heat { .. } => PlantKind::Heat,
            PlantState::Transport { .. } => PlantKind::Transport,
            PlantState::Wave { .. } => PlantKind::Wave,
        }
    }

    pub fn y(&self) -> f64 {
        match self {
            PlantState::Planar { y, .. }
            | PlantState::Heat { y, .. }
            | PlantState::Transport { y, .. }
            | PlantState::Wave { y, .. } => *y,
        }
    }

    /// Grid intervals; 0 for the planar plant.
    pub fn n(&self) -> usize {
        match self {
            PlantState::Planar { .. } => 0,
            PlantState::Heat { w, .. } | PlantState::Transport { w, .. } => w.n(),
            PlantState::Wave { v, .. } => v.n(),
        }
    }

    pub fn zero(kind: PlantKind, n: usize) -> Self {
        match kind {
            PlantKind::Planar => PlantState::Planar { w: 0.0, y: 0.0 },
            PlantKind::Heat => PlantState::Heat {
                w: Field::zeros(n, BoundaryTag::DirichletBoth),
                y: 0.0,
            },
            PlantKind::Transport => PlantState::Transport {
                w: Field::zeros(n, BoundaryTag::InflowLeft),
                y: 0.0,
            },
            PlantKind::Wave => PlantState::Wave {
                v: Field::zeros(n, BoundaryTag::DirichletBoth),
                phi: Field::zeros(n, BoundaryTag::DirichletBoth),
                y: 0.0,
            },
        }
    }

    /// Checks field tags and that all fields share one grid.
    pub fn validate(&self) -> Result<(), PlantError> {
        let want = |name: &'static str, f: &Field, tag: BoundaryTag| {
            if f.tag() == tag {
                Ok(())
            } else {
                Err(PlantError::WrongTag(name, f.tag(), tag))
            }
        };
        match self {
            PlantState::Planar { .. } => Ok(()),
            PlantState::Heat { w, .. } => want("w", w, BoundaryTag::DirichletBoth),
            PlantState::Transport { w, .. } => want("w", w, BoundaryTag::InflowLeft),
            PlantState::Wave { v, phi, .. } => {
                want("v", v, BoundaryTag::DirichletBoth)?;
                want("phi", phi, BoundaryTag::DirichletBoth)?;
                if v.n() != phi.n() {
                    return Err(PlantError::GridMismatch {
                        expected: v.n(),
                        got: phi.n(),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            PlantState::Planar { w, y } => vec![*w, *y],
            PlantState::Heat { w, y } | PlantState::Transport { w, y } => {
                let mut v = w.values().to_vec();
                v.push(*y);
                v
            }
            PlantState::Wave { v, phi, y } => {
                let mut out = v.values().to_vec();
                out.extend_from_slice(phi.values());
                out.push(*y);
                out
            }
        }
    }

    pub fn from_slice(kind: PlantKind, n: usize, x: &[f64]) -> Self {
        let f = |s: &[f64], tag| Field::from_raw(s.to_vec(), tag);
        match kind {
            PlantKind::Planar => PlantState::Planar { w: x[0], y: x[1] },
            PlantKind::Heat => PlantState::Heat {
                w: f(&x[..=n], BoundaryTag::DirichletBoth),
                y: x[n + 1],
            },
            PlantKind::Transport => PlantState::Transport {
                w: f(&x[..=n], BoundaryTag::InflowLeft),
                y: x[n + 1],
            },
            PlantKind::Wave => PlantState::Wave {
                v: f(&x[..=n], BoundaryTag::DirichletBoth),
                phi: f(&x[n + 1..=2 * n + 1], BoundaryTag::DirichletBoth),
                y: x[2 * n + 2],
            },
        }
    }
}

fn rhs_typed(plant: &Plant, state: &PlantState, t: f64, u: f64) -> Result<PlantState, PlantError> {
    if state.kind() != plant.kind() {
        return Err(PlantError::KindMismatch {
            expected: plant.kind(),
        });
    }
    state.validate()?;
    let n = state.n();
    let disc = plant.discretize(n);
    let x = state.to_vec();
    let mut dx = vec![0.0; x.len()];
    disc.rhs(t, &x, state.y(), u, &mut dx);
    Ok(PlantState::from_slice(plant.kind(), n, &dx))
}

/// `(ẇ, ẏ)` of the planar plant.
pub fn planar_rhs(w: f64, y: f64, t: f64, u: f64, plant: &PlanarPlant) -> (f64, f64) {
    let wdot = -plant.p_bar * w + plant.theta1.eval(t) * y;
    let ydot = plant.theta2.eval(t) * w + plant.b.eval(t) * u + plant.d.eval(t);
    (wdot, ydot)
}

/// Semi-discrete heat right-hand side; endpoints of `ẇ` are 0.
pub fn heat_rhs(w: &Field, y: f64, t: f64, u: f64, plant: &HeatPlant) -> Result<(Field, f64), PlantError> {
    let p = Plant::Heat(plant.clone());
    match rhs_typed(&p, &PlantState::Heat { w: w.clone(), y }, t, u)? {
        PlantState::Heat { w, y } => Ok((w, y)),
        _ => unreachable!(),
    }
}

/// Semi-discrete transport right-hand side; node 0 is injected, so its
/// derivative is 0.
pub fn transport_rhs(
    w: &Field,
    y: f64,
    t: f64,
    u: f64,
    plant: &TransportPlant,
) -> Result<(Field, f64), PlantError> {
    let p = Plant::Transport(plant.clone());
    match rhs_typed(&p, &PlantState::Transport { w: w.clone(), y }, t, u)? {
        PlantState::Transport { w, y } => Ok((w, y)),
        _ => unreachable!(),
    }
}

/// Semi-discrete damped-wave right-hand side, returning `(v_t, φ_t, ẏ)`.
pub fn wave_rhs(
    v: &Field,
    phi: &Field,
    y: f64,
    t: f64,
    u: f64,
    plant: &WavePlant,
) -> Result<(Field, Field, f64), PlantError> {
    let p = Plant::Wave(plant.clone());
    let state = PlantState::Wave {
        v: v.clone(),
        phi: phi.clone(),
        y,
    };
    match rhs_typed(&p, &state, t, u)? {
        PlantState::Wave { v, phi, y } => Ok((v, phi, y)),
        _ => unreachable!(),
    }
}

/// Right-hand side for any plant on a typed state.
pub fn plant_rhs(plant: &Plant, state: &PlantState, t: f64, u: f64) -> Result<PlantState, PlantError> {
    rhs_typed(plant, state, t, u)
}

/// The exact exponentially growing open-loop solution of the built-in
/// unstable instances, sampled on an `n`-interval grid.
pub fn analytic_unstable(plant: &Plant, t: f64, n: usize) -> Result<PlantState, PlantError> {
    let no_instance = || PlantError::NoUnstableInstance {
        kind: plant.kind(),
        coupling: plant.coupling().map_or("none", Coupling::name).to_string(),
    };
    let uniform = |s: &SpaceTimeSignal| -> Option<f64> {
        match s.space {
            Profile::Const(g) => s.time.constant_value().map(|c| c * g),
            _ => None,
        }
    };
    let need = |msg: &str| PlantError::InstanceMismatch(msg.to_string());
    let et = t.exp();
    if n < MIN_INTERVALS {
        return Err(PlantError::GridTooSmall(n));
    }
    match plant {
        Plant::Heat(p) => {
            let Coupling::HeatUnstable { p_bar } = p.coupling else {
                return Err(no_instance());
            };
            let th1 = uniform(&p.theta1).ok_or_else(|| need("constant uniform theta1"))?;
            let th2 = p.theta2.constant_value().ok_or_else(|| need("constant theta2"))?;
            let target = 6.0 * (1.0 + 2.0 * p.p_bar);
            if p_bar != p.p_bar || (th1 * th2 - target).abs() > 1e-9 * target {
                return Err(need("theta1*theta2 = 6(1 + 2 p_bar) and matching p_bar"));
            }
            Ok(PlantState::Heat {
                w: Field::from_fn(n, BoundaryTag::DirichletBoth, |x| et * x * (x - 1.0)),
                y: th2 / 6.0 * et,
            })
        }
        Plant::Transport(p) => {
            let Coupling::TransportUnstable { c, theta_product } = p.coupling else {
                return Err(no_instance());
            };
            let th11 = uniform(&p.theta11).ok_or_else(|| need("constant uniform theta11"))?;
            let th2 = p.theta2.constant_value().ok_or_else(|| need("constant theta2"))?;
            if c != p.c
                || (th11 * th2 - theta_product).abs() > 1e-9 * theta_product.abs()
                || theta_product < 2.0 * (1.0 + c)
            {
                return Err(need("theta11*theta2 = theta_product >= 2(1 + c) and matching c"));
            }
            Ok(PlantState::Transport {
                w: Field::from_fn(n, BoundaryTag::InflowLeft, |x| et * x),
                y: th2 / 2.0 * et,
            })
        }
        Plant::Wave(p) => {
            if p.coupling != Coupling::WaveUnstable {
                return Err(no_instance());
            }
            let th1 = uniform(&p.theta1).ok_or_else(|| need("constant uniform theta1"))?;
            let th2 = p.theta2.constant_value().ok_or_else(|| need("constant theta2"))?;
            let target = 2.0 * (1.0 + p.sigma + PI * PI);
            if p.c != 1.0 || (th1 * th2 - target).abs() > 1e-9 * target {
                return Err(need("c = 1 and theta1*theta2 = 2(1 + sigma + pi^2)"));
            }
            let mode = Field::from_fn(n, BoundaryTag::DirichletBoth, |x| et * (PI * x).sin());
            Ok(PlantState::Wave {
                v: mode.clone(),
                phi: mode,
                y: (1.0 + p.sigma + PI * PI) / th1 * et,
            })
        }
        Plant::Planar(_) => Err(no_instance()),
    }
}

/// A random smooth field drawn as a short sine (and, off Dirichlet, cosine)
/// series with a random overall scale.
pub fn random_field<R: Rng>(rng: &mut R, n: usize, tag: BoundaryTag) -> Field {
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    let modes = 6;
    let sin: Vec<f64> = (1..=modes).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect();
    let cos: Vec<f64> = if tag == BoundaryTag::DirichletBoth {
        vec![0.0; modes + 1]
    } else {
        (0..=modes).map(|k| rng.gen_range(-1.0..1.0) / (k + 1) as f64).collect()
    };
    Field::from_fn(n, tag, |x| {
        let mut s = 0.0;
        for k in 1..=modes {
            s += sin[k - 1] * (k as f64 * PI * x).sin();
        }
        for (k, c) in cos.iter().enumerate() {
            s += c * (k as f64 * PI * x).cos();
        }
        scale * s
    })
}

/// Random plant state of the given kind.
pub fn random_state<R: Rng>(rng: &mut R, kind: PlantKind, n: usize) -> PlantState {
    let y = rng.gen_range(-10.0..10.0);
    match kind {
        PlantKind::Planar => PlantState::Planar {
            w: rng.gen_range(-10.0..10.0),
            y,
        },
        PlantKind::Heat => PlantState::Heat {
            w: random_field(rng, n, BoundaryTag::DirichletBoth),
            y,
        },
        PlantKind::Transport => PlantState::Transport {
            w: random_field(rng, n, BoundaryTag::InflowLeft),
            y,
        },
        PlantKind::Wave => PlantState::Wave {
            v: random_field(rng, n, BoundaryTag::DirichletBoth),
            phi: random_field(rng, n, BoundaryTag::DirichletBoth),
            y,
        },
    }
}

/// A sampled point where a coupling breaks its bound contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    /// `"K"`, `"K2"` or `"L"`.
    pub term: &'static str,
    pub x: Option<f64>,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Samples the coupling's bound contract
/// `|K(x,y)| <= |y|`, `|K₂(y)| <= |y|`, `|L(w,y)| <= ‖w‖ + φ(y)|y|`
/// at `samples` random points (fields from [`random_field`]) on an
/// `n`-interval grid.
pub fn bound_check<R: Rng>(
    coupling: &Coupling,
    kind: PlantKind,
    phi: &PhiSpec,
    samples: usize,
    n: usize,
    rng: &mut R,
) -> Result<(), BoundViolation> {
    const REL: f64 = 1e-12;
    if kind == PlantKind::Planar {
        // L(w,y) = w, K is the identity weight
        return Ok(());
    }
    let table = coupling.tabulate(n);
    let h = 1.0 / n as f64;
    for _ in 0..samples {
        let state = random_state(rng, kind, n);
        let y = state.y();
        let i = rng.gen_range(0..=n);
        let xi = i as f64 / n as f64;
        // off-grid point too, so the contract is checked on [0,1], not only on nodes
        let xr: f64 = rng.gen_range(0.0..=1.0);
        for x in [xi, xr] {
            let k = coupling.gain_at(x) * y;
            if k.abs() > y.abs() * (1.0 + REL) {
                return Err(BoundViolation {
                    term: "K",
                    x: Some(x),
                    y,
                    lhs: k.abs(),
                    rhs: y.abs(),
                });
            }
        }
        let kb = (table.boundary_gain * y).abs();
        if kb > y.abs() * (1.0 + REL) {
            return Err(BoundViolation {
                term: "K2",
                x: None,
                y,
                lhs: kb,
                rhs: y.abs(),
            });
        }
        let x = state.to_vec();
        let (field, norm_sq) = match &state {
            PlantState::Wave { v, phi: ph, .. } => (
                v.values().to_vec(),
                grad_l2_sq(v.values(), h) + l2_sq(ph.values(), h),
            ),
            _ => (x[..=n].to_vec(), l2_sq(&x[..=n], h)),
        };
        let mut l = trapz_by(n, h, |j| table.kernel[j] * field[j]);
        if table.phi_term {
            l += phi.eval(y) * y;
        }
        let bound = norm_sq.sqrt() + phi.eval(y) * y.abs();
        if l.abs() > bound * (1.0 + 1e-9) {
            return Err(BoundViolation {
                term: "L",
                x: None,
                y,
                lhs: l.abs(),
                rhs: bound,
            });
        }
    }
    Ok(())
}
