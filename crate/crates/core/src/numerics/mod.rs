//! Fixed-step RK4 time integration and the closed-loop simulation driver.

pub mod fd;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::certify::phi_flat;
use crate::dads::{self, DadsParams, GainProfile, Z_MAX};
use crate::plants::{BoundaryTag, Plant, PlantError, PlantKind, PlantState};
use crate::signals::Signal;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{op} needs a {expected} field, got {got}")]
    WrongBoundary {
        op: &'static str,
        expected: BoundaryTag,
        got: BoundaryTag,
    },
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("dt = {dt} exceeds the stable step {stable}")]
    StepTooLarge { dt: f64, stable: f64 },
    #[error("non-finite state component {index} at t = {t}")]
    NonFinite { t: f64, index: usize },
    #[error("initial state is a {got} state, plant is {expected}")]
    KindMismatch { expected: PlantKind, got: PlantKind },
    #[error(transparent)]
    Plant(#[from] PlantError),
}

/// Classical four-stage Runge–Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        Rk4 {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    /// Advances `x` in place from `t` to `t + dt`.
    pub fn step<F>(&mut self, mut f: F, t: f64, x: &mut [f64], dt: f64) -> Result<(), NumericsError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NumericsError::BadStep(dt));
        }
        let half = 0.5 * dt;
        f(t, x, &mut self.k1);
        for ((s, &xi), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *s = xi + half * k;
        }
        f(t + half, &self.tmp, &mut self.k2);
        for ((s, &xi), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *s = xi + half * k;
        }
        f(t + half, &self.tmp, &mut self.k3);
        for ((s, &xi), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *s = xi + dt * k;
        }
        f(t + dt, &self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += sixth * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
            if !xi.is_finite() {
                return Err(NumericsError::NonFinite { t: t + dt, index: i });
            }
        }
        Ok(())
    }
}

/// One RK4 step of `ẋ = f(t, x)`.
pub fn rk4_step<F>(f: F, state: &[f64], t: f64, dt: f64) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut x = state.to_vec();
    Rk4::new(x.len()).step(f, t, &mut x, dt)?;
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Controller {
    Dads { params: DadsParams, gains: GainProfile },
    /// `u = -k y`, `z` frozen.
    Linear { k: f64 },
    Off,
}

impl Controller {
    /// `(u, ż)` at output `y` and gain state `z`.
    #[inline]
    pub fn eval(&self, y: f64, z: f64) -> (f64, f64) {
        match self {
            Controller::Dads { params, gains } => {
                (dads::control(y, z, params, gains), dads::update_rate(y, z, params))
            }
            Controller::Linear { k } => (-k * y, 0.0),
            Controller::Off => (0.0, 0.0),
        }
    }

    /// `(u, d/dt e^z)` with the gain state given as `ζ = e^z`.
    #[inline]
    pub fn eval_exp(&self, y: f64, zeta: f64) -> (f64, f64) {
        match self {
            Controller::Dads { params, gains } => (
                dads::control(y, zeta.ln(), params, gains),
                dads::gain_growth_rate(y, params),
            ),
            Controller::Linear { k } => (-k * y, 0.0),
            Controller::Off => (0.0, 0.0),
        }
    }

    /// Magnitude of `∂u/∂y` at `(y, z)`.
    pub fn linear_gain(&self, y: f64, z: f64) -> f64 {
        match self {
            Controller::Dads { params, gains } => {
                let g = gains.eval(y);
                let y2 = y * y;
                dads::damping_factor(z, params.kappa) * (g.p1 + 3.0 * g.p2 * y2 + 7.0 * g.p3 * y2 * y2 * y2)
            }
            Controller::Linear { k } => k.abs(),
            Controller::Off => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum YSource {
    #[default]
    Free,
    /// `y(t)` is imposed instead of integrated.
    Prescribed { signal: Signal },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub plant: Plant,
    pub initial: PlantState,
    pub z0: f64,
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.initial.n()
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if self.initial.kind() != self.plant.kind() {
            return Err(NumericsError::KindMismatch {
                expected: self.plant.kind(),
                got: self.initial.kind(),
            });
        }
        self.plant.validate()?;
        self.initial.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub horizon: f64,
    pub dt: f64,
    /// Steps between recorded samples.
    pub stride: usize,
    /// Samples between stored state snapshots; 0 stores none.
    pub snapshot_stride: usize,
    pub blowup: f64,
    pub z_max: f64,
}

impl SimOptions {
    pub fn new(horizon: f64, dt: f64) -> Self {
        SimOptions {
            horizon,
            dt,
            stride: 1,
            snapshot_stride: 0,
            blowup: 1e12,
            z_max: Z_MAX,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_stride = every;
        self
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt + 1e-9).floor() as usize
    }
}

/// Explicit-stability step: diffusion and CFL limits for the PDE plants,
/// a gain-scaled cap for the planar plant.
pub fn stable_dt(scenario: &Scenario, controller: &Controller) -> f64 {
    let n = scenario.n().max(1) as f64;
    let h = 1.0 / n;
    match &scenario.plant {
        Plant::Heat(p) => 0.4 * h * h / (2.0 * p.p_bar),
        Plant::Transport(p) => 0.9 * h / p.c,
        Plant::Wave(p) => 0.9 * h / p.c,
        Plant::Planar(_) => (1e-3f64).min(0.1 / (1.0 + effective_gain(scenario, controller))),
    }
}

/// `sup b · |∂u/∂y|` at the initial state.
pub fn effective_gain(scenario: &Scenario, controller: &Controller) -> f64 {
    let b = scenario.plant.output_signals().b.sup_norm();
    b * controller.linear_gain(scenario.initial.y(), scenario.z0)
}

/// [`stable_dt`] further capped by `0.1/(1 + k_eff)` so the output
/// equation stays resolved under a large initial control gain.
pub fn auto_dt(scenario: &Scenario, controller: &Controller) -> f64 {
    stable_dt(scenario, controller).min(0.1 / (1.0 + effective_gain(scenario, controller)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    /// Plant state in the flat layout of [`PlantKind::state_len`].
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: PlantKind,
    pub n: usize,
    pub dt: f64,
    pub stride: usize,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub w_norm: Vec<f64>,
    pub phi: Vec<f64>,
    pub v: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// SHA-256 of the serialized scenario, controller and options.
    pub fingerprint: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }

    /// Snapshot closest in time to `t`.
    pub fn snapshot_near(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn snapshot_state(&self, s: &Snapshot) -> PlantState {
        PlantState::from_slice(self.kind, self.n, &s.state)
    }

    /// Index of the first sample in the final `frac` of the horizon.
    pub fn tail_start(&self, frac: f64) -> usize {
        let t0 = self.final_time() * (1.0 - frac);
        self.t.partition_point(|&t| t < t0 - 1e-12)
    }

    /// `true` iff `z` never decreases.
    pub fn z_monotone(&self) -> bool {
        self.z.windows(2).all(|w| w[1] >= w[0])
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation setup: {0}")]
    Setup(#[from] NumericsError),
    #[error("state blew up at t = {t}")]
    BlowUp { t: f64, partial: Box<Trajectory> },
    #[error("z exceeded {z_max} at t = {t}")]
    ZOverflow {
        t: f64,
        z_max: f64,
        partial: Box<Trajectory>,
    },
}

impl SimError {
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            SimError::Setup(_) => None,
            SimError::BlowUp { partial, .. } | SimError::ZOverflow { partial, .. } => Some(partial),
        }
    }
}

fn fingerprint(scenario: &Scenario, controller: &Controller, ysrc: &YSource, opts: &SimOptions) -> String {
    let json = serde_json::to_vec(&(scenario, controller, ysrc, opts)).expect("scenario serializes");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

/// Closed-loop run with the adaptive controller.
pub fn simulate(
    scenario: &Scenario,
    params: &DadsParams,
    gains: &GainProfile,
    opts: &SimOptions,
) -> Result<Trajectory, SimError> {
    let controller = Controller::Dads {
        params: *params,
        gains: *gains,
    };
    simulate_with(scenario, &controller, &YSource::Free, opts)
}

/// Uncontrolled run (`u ≡ 0`), optionally with `y` prescribed.
pub fn simulate_open_loop(scenario: &Scenario, y_source: &YSource, opts: &SimOptions) -> Result<Trajectory, SimError> {
    simulate_with(scenario, &Controller::Off, y_source, opts)
}

/// The general driver: integrates the augmented state `(plant, z)`.
///
/// The gain state is carried as `ζ = e^z` with `ζ̇ = Γ(V - ε)⁺`, which is
/// the same law without the `e^{-z}` stiffness at very negative `z`;
/// samples report `z = ln ζ`.
pub fn simulate_with(
    scenario: &Scenario,
    controller: &Controller,
    y_source: &YSource,
    opts: &SimOptions,
) -> Result<Trajectory, SimError> {
    scenario.validate()?;
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(NumericsError::BadStep(opts.dt).into());
    }
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(NumericsError::BadHorizon(opts.horizon).into());
    }
    if opts.stride == 0 {
        return Err(NumericsError::ZeroStride.into());
    }
    let stable = stable_dt(scenario, controller);
    if opts.dt > stable * (1.0 + 1e-9) {
        return Err(NumericsError::StepTooLarge { dt: opts.dt, stable }.into());
    }

    let n = scenario.n();
    let disc = scenario.plant.discretize(n);
    let len = disc.state_len();
    let yi = disc.y_index();
    let prescribed = match y_source {
        YSource::Free => None,
        YSource::Prescribed { signal } => Some(signal),
    };

    let mut x = scenario.initial.to_vec();
    x.push(scenario.z0.exp());
    if let Some(s) = prescribed {
        x[yi] = s.eval(0.0);
    }
    let y0 = x[yi];
    disc.pin_boundary(0.0, &mut x[..len], y0);

    let n_steps = opts.n_steps();
    let cap = n_steps / opts.stride + 1;
    let mut traj = Trajectory {
        kind: disc.kind(),
        n,
        dt: opts.dt,
        stride: opts.stride,
        t: Vec::with_capacity(cap),
        y: Vec::with_capacity(cap),
        z: Vec::with_capacity(cap),
        u: Vec::with_capacity(cap),
        w_norm: Vec::with_capacity(cap),
        phi: Vec::with_capacity(cap),
        v: Vec::with_capacity(cap),
        snapshots: Vec::new(),
        fingerprint: fingerprint(scenario, controller, y_source, opts),
    };
    let record = |traj: &mut Trajectory, t: f64, x: &[f64]| {
        let (y, z) = (x[yi], x[len].ln());
        traj.t.push(t);
        traj.y.push(y);
        traj.z.push(z);
        traj.u.push(controller.eval(y, z).0);
        traj.w_norm.push(disc.w_norm_sq(x).sqrt());
        traj.phi.push(phi_flat(&disc, x));
        traj.v.push(dads::lyapunov_v(y));
        let k = traj.t.len() - 1;
        if opts.snapshot_stride > 0 && k % opts.snapshot_stride == 0 {
            traj.snapshots.push(Snapshot {
                t,
                state: x[..len].to_vec(),
            });
        }
    };
    record(&mut traj, 0.0, &x);

    let rhs = |t: f64, s: &[f64], ds: &mut [f64]| {
        let y = prescribed.map_or(s[yi], |sig| sig.eval(t));
        let (u, zeta_dot) = controller.eval_exp(y, s[len]);
        disc.rhs(t, &s[..len], y, u, &mut ds[..len]);
        if prescribed.is_some() {
            ds[yi] = 0.0;
        }
        ds[len] = zeta_dot;
    };

    let mut rk = Rk4::new(len + 1);
    for k in 0..n_steps {
        let t = k as f64 * opts.dt;
        let t1 = (k + 1) as f64 * opts.dt;
        if rk.step(rhs, t, &mut x, opts.dt).is_err() {
            return Err(SimError::BlowUp {
                t: t1,
                partial: Box::new(traj),
            });
        }
        if let Some(s) = prescribed {
            x[yi] = s.eval(t1);
        }
        let y = x[yi];
        disc.pin_boundary(t1, &mut x[..len], y);
        if x[..len].iter().any(|v| v.abs() > opts.blowup) {
            return Err(SimError::BlowUp {
                t: t1,
                partial: Box::new(traj),
            });
        }
        if x[len].ln() > opts.z_max {
            return Err(SimError::ZOverflow {
                t: t1,
                z_max: opts.z_max,
                partial: Box::new(traj),
            });
        }
        if (k + 1) % opts.stride == 0 || k + 1 == n_steps {
            record(&mut traj, t1, &x);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plants::{Coupling, Field, HeatPlant, PlanarPlant, TransportPlant};
    use crate::signals::SpaceTimeSignal;

    #[test]
    fn rk4_zero_rhs_is_identity() {
        let x = rk4_step(|_, _, d: &mut [f64]| d.fill(0.0), &[1.0, -2.0], 0.0, 0.1).unwrap();
        assert_eq!(x, vec![1.0, -2.0]);
    }

    #[test]
    fn rk4_exponential() {
        let x = rk4_step(|_, s: &[f64], d: &mut [f64]| d[0] = s[0], &[1.0], 0.0, 0.1).unwrap();
        assert!((x[0] - 0.1f64.exp()).abs() < 1e-7);
        // degree-4 Taylor polynomial
        let taylor = 1.0 + 0.1 + 0.01 / 2.0 + 0.001 / 6.0 + 0.0001 / 24.0;
        assert!((x[0] - taylor).abs() < 1e-15);
    }

    #[test]
    fn rk4_linear_system_matches_taylor_of_expm() {
        // ẋ = A x with A = [[0, 1], [-2, -3]]
        let a = [[0.0, 1.0], [-2.0, -3.0]];
        let f = |_: f64, s: &[f64], d: &mut [f64]| {
            d[0] = a[0][0] * s[0] + a[0][1] * s[1];
            d[1] = a[1][0] * s[0] + a[1][1] * s[1];
        };
        let h = 0.2;
        let x0 = [1.0, 0.5];
        let x = rk4_step(f, &x0, 0.0, h).unwrap();
        let mul = |v: [f64; 2]| [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]];
        let mut term = x0;
        let mut sum = x0;
        let mut fact = 1.0;
        for k in 1..=4 {
            term = mul(term);
            fact *= k as f64;
            let c = h.powi(k) / fact;
            sum[0] += c * term[0];
            sum[1] += c * term[1];
        }
        assert!((x[0] - sum[0]).abs() < 1e-14 && (x[1] - sum[1]).abs() < 1e-14);
    }

    #[test]
    fn rk4_reports_non_finite() {
        let r = rk4_step(|_, _, d: &mut [f64]| d[0] = f64::NAN, &[0.0], 0.0, 0.1);
        assert!(matches!(r, Err(NumericsError::NonFinite { index: 0, .. })));
        assert!(matches!(
            rk4_step(|_, _, _: &mut [f64]| {}, &[0.0], 0.0, 0.0),
            Err(NumericsError::BadStep(_))
        ));
    }

    fn heat(n: usize) -> Scenario {
        Scenario {
            plant: Plant::Heat(HeatPlant {
                p_bar: 1.0,
                coupling: Coupling::Zero,
                phi: dads::PhiSpec::ZERO,
                theta1: SpaceTimeSignal::zero(),
                delta: SpaceTimeSignal::zero(),
                theta2: Signal::zero(),
                b: Signal::floor_clamp(1.0, Signal::constant(1.0)),
                d: Signal::zero(),
            }),
            initial: PlantState::zero(PlantKind::Heat, n),
            z0: 0.0,
        }
    }

    #[test]
    fn stable_dt_formulas() {
        assert!((stable_dt(&heat(100), &Controller::Off) - 2e-5).abs() < 1e-18);
        let tr = Scenario {
            plant: Plant::Transport(TransportPlant {
                c: 1.0,
                coupling: Coupling::TransportDelay,
                phi: dads::PhiSpec::ZERO,
                theta11: SpaceTimeSignal::zero(),
                theta12: Signal::constant(1.0),
                delta: SpaceTimeSignal::zero(),
                theta2: Signal::zero(),
                b: Signal::floor_clamp(1.0, Signal::constant(1.0)),
                d: Signal::zero(),
            }),
            initial: PlantState::zero(PlantKind::Transport, 100),
            z0: 0.0,
        };
        assert!((stable_dt(&tr, &Controller::Off) - 9e-3).abs() < 1e-15);
        let pl = planar_nominal();
        let c = Controller::Dads {
            params: DadsParams::PLANAR_EXAMPLE,
            gains: GainProfile::planar_example(),
        };
        assert!(stable_dt(&pl, &c) <= 1e-3);
        assert_eq!(stable_dt(&pl, &Controller::Off), 1e-3);
    }

    fn planar_nominal() -> Scenario {
        Scenario {
            plant: Plant::Planar(PlanarPlant {
                p_bar: 1.0,
                theta1: Signal::constant(10.0),
                theta2: Signal::constant(20.0),
                b: Signal::floor_clamp(0.1, Signal::constant(0.1)),
                d: Signal::zero(),
            }),
            initial: PlantState::Planar { w: -0.5, y: 0.1 },
            z0: -10.0,
        }
    }

    #[test]
    fn equilibrium_is_preserved_exactly() {
        let mut s = planar_nominal();
        s.initial = PlantState::Planar { w: 0.0, y: 0.0 };
        let tr = simulate(
            &s,
            &DadsParams::PLANAR_EXAMPLE,
            &GainProfile::planar_example(),
            &SimOptions::new(1.0, 2.5e-4),
        )
        .unwrap();
        assert!(tr.y.iter().chain(&tr.w_norm).all(|&v| v == 0.0));
        assert!(tr.z.iter().all(|&z| z == -10.0));

        let tr = simulate_open_loop(&heat(16), &YSource::Free, &SimOptions::new(0.1, 1e-4)).unwrap();
        assert!(tr.y.iter().chain(&tr.w_norm).all(|&v| v == 0.0));
    }

    #[test]
    fn sample_count_and_determinism() {
        let opts = SimOptions::new(1.0, 2.5e-4).with_stride(7);
        let p = DadsParams::PLANAR_EXAMPLE;
        let g = GainProfile::planar_example();
        let a = simulate(&planar_nominal(), &p, &g, &opts).unwrap();
        let b = simulate(&planar_nominal(), &p, &g, &opts).unwrap();
        // 4000 steps: every 7th plus the initial and final states
        assert_eq!(a.len(), 4000 / 7 + 2);
        assert_eq!(a.final_time(), 1.0);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.z_monotone());
        assert_eq!(a.fingerprint.len(), 64);
    }

    #[test]
    fn too_large_step_is_rejected() {
        let r = simulate_open_loop(&heat(100), &YSource::Free, &SimOptions::new(0.1, 1e-3));
        assert!(matches!(r, Err(SimError::Setup(NumericsError::StepTooLarge { .. }))));
    }

    #[test]
    fn blow_up_returns_partial_trajectory() {
        let mut s = planar_nominal();
        s.z0 = 0.0;
        let c = Controller::Linear { k: -1e3 };
        let mut o = SimOptions::new(50.0, 1e-4).with_stride(100);
        o.blowup = 1e6;
        match simulate_with(&s, &c, &YSource::Free, &o) {
            Err(SimError::BlowUp { partial, .. }) => assert!(!partial.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prescribed_output_is_followed() {
        let mut s = heat(16);
        s.initial = PlantState::Heat {
            w: Field::zeros(16, BoundaryTag::DirichletBoth),
            y: 0.0,
        };
        let src = YSource::Prescribed {
            signal: Signal::sin(1.0, 1.0, 0.0),
        };
        let tr = simulate_open_loop(&s, &src, &SimOptions::new(1.0, 5e-4)).unwrap();
        for (t, y) in tr.t.iter().zip(&tr.y) {
            assert_eq!(*y, t.sin());
        }
    }
}
