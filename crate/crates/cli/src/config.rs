//! Scenario configs: TOML documents with `plant`, `controller`, `initial`,
//! `numerics`, `run` and `checks` sections. Signals are written in the
//! prefix grammar of [`dads_core::signals`], e.g. `"sin(3,1,0)"`.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use dads_core::certify::{CertifyOptions, MonitorOptions, TailOptions};
use dads_core::dads::{make_gain_profile, DadsError, DadsParams, GainProfile, ParamViolation, PhiSpec};
use dads_core::numerics::{auto_dt, stable_dt, Controller, SimOptions, YSource};
use dads_core::plants::{
    analytic_unstable, BoundaryTag, Coupling, Field, HeatPlant, PlanarPlant, TransportPlant, WavePlant,
};
use dads_core::presets::delay_history;
use dads_core::signals::Profile;
use dads_core::{Plant, PlantKind, PlantState, Scenario, Signal, SpaceTimeSignal};

/// A config problem, with the 1-based line it points at when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub col: Option<usize>,
    pub msg: String,
}

impl ConfigError {
    fn new(msg: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            col: None,
            msg: msg.into(),
        }
    }

    fn at(mut self, pos: Option<(usize, usize)>) -> Self {
        if let Some((l, c)) = pos {
            self.line = Some(l);
            self.col = Some(c);
        }
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.col) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.msg),
            (Some(l), None) => write!(f, "line {l}: {}", self.msg),
            _ => f.write_str(&self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Position of `section.key` (or of the section header when `key` is
/// empty) in `src`.
pub fn locate(src: &str, section: &str, key: &str) -> Option<(usize, usize)> {
    use toml::de::{DeTable, DeValue};
    let root = DeTable::parse(src).ok()?;
    let (sk, sv) = root.get_ref().iter().find(|(k, _)| k.get_ref().as_ref() == section)?;
    if key.is_empty() {
        return Some(line_col(src, sk.span().start));
    }
    let DeValue::Table(t) = sv.get_ref() else {
        return None;
    };
    let (k, _) = t.iter().find(|(k, _)| k.get_ref().as_ref() == key)?;
    Some(line_col(src, k.span().start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    #[default]
    ClosedLoop,
    OpenLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ControllerKind {
    #[default]
    Dads,
    Linear,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum GainsKind {
    #[default]
    Constant,
    PhiDerived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum InitMode {
    #[default]
    Explicit,
    /// The analytic open-loop solution at `t0`.
    Analytic,
    /// Delay-line field filled with the prescribed output history.
    History,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    plant: RawPlant,
    controller: Option<RawController>,
    initial: RawInitial,
    numerics: RawNumerics,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    checks: RawChecks,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    kind: PlantKind,
    p_bar: Option<f64>,
    c: Option<f64>,
    sigma: Option<f64>,
    coupling: Option<Coupling>,
    theta1: Option<Signal>,
    theta1_space: Option<Profile>,
    theta11: Option<Signal>,
    theta11_space: Option<Profile>,
    theta12: Option<Signal>,
    delta: Option<Signal>,
    delta_space: Option<Profile>,
    theta2: Option<Signal>,
    b: Option<Signal>,
    d: Option<Signal>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    #[serde(default)]
    kind: ControllerKind,
    epsilon: Option<f64>,
    gamma: Option<f64>,
    kappa: Option<f64>,
    a: Option<f64>,
    c_decay: Option<f64>,
    #[serde(default)]
    gains: GainsKind,
    k: Option<[f64; 3]>,
    safety_factor: Option<f64>,
    #[serde(default)]
    phi: Vec<f64>,
    linear_gain: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    mode: InitMode,
    y: Option<f64>,
    #[serde(default)]
    z0: f64,
    #[serde(default)]
    t0: f64,
    w: Option<toml::Value>,
    v: Option<Profile>,
    phi: Option<Profile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    n: Option<usize>,
    dt: toml::Value,
    horizon: f64,
    #[serde(default = "one")]
    stride: usize,
    snapshot_stride: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    mode: RunMode,
    y: Option<Signal>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawChecks {
    transient: Option<bool>,
    z_window: Option<bool>,
    tails: Option<bool>,
    dissipation: Option<bool>,
    dichotomy: Option<bool>,
    tail_window: f64,
    tail_tol_frac: f64,
    settle_tol: f64,
    monitor_abs_tol: f64,
    monitor_h_coeff: f64,
    regulation_frac: f64,
    oracle: bool,
    oracle_tol: f64,
    delay: bool,
    delay_tol: f64,
    delay_t_min: f64,
    regulation_tol: Option<f64>,
    expect_z: Option<f64>,
    expect_z_tol: f64,
}

impl Default for RawChecks {
    fn default() -> Self {
        let c = CertifyOptions::default();
        RawChecks {
            transient: None,
            z_window: None,
            tails: None,
            dissipation: None,
            dichotomy: None,
            tail_window: c.tail.window,
            tail_tol_frac: c.tail.tol_frac,
            settle_tol: c.tail.settle_tol,
            monitor_abs_tol: c.monitor.abs_tol,
            monitor_h_coeff: c.monitor.h_coeff,
            regulation_frac: c.regulation_frac,
            oracle: false,
            oracle_tol: 1e-3,
            delay: false,
            delay_tol: 1e-2,
            delay_t_min: 1.0,
            regulation_tol: None,
            expect_z: None,
            expect_z_tol: 0.05,
        }
    }
}

/// Checks beyond the theorem certification.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraChecks {
    /// Relative L² error against the analytic unstable solution.
    pub oracle_tol: Option<f64>,
    /// Error against the delayed prescribed output, for `t > t_min`.
    pub delay: Option<(f64, f64)>,
    /// Bound on the final `|y|` and `‖w‖`.
    pub regulation_tol: Option<f64>,
    /// Expected final `z` and allowed deviation.
    pub expect_z: Option<(f64, f64)>,
}

/// A fully validated scenario ready to simulate.
#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub mode: RunMode,
    pub scenario: Scenario,
    pub controller: Controller,
    pub params: Option<DadsParams>,
    pub phi: PhiSpec,
    pub y_source: YSource,
    pub opts: SimOptions,
    pub dt_auto: bool,
    pub certify: Option<CertifyOptions>,
    pub extra: ExtraChecks,
}

impl Job {
    pub fn gains(&self) -> Option<GainProfile> {
        match &self.controller {
            Controller::Dads { gains, .. } => Some(*gains),
            _ => None,
        }
    }

    pub fn stable_dt(&self) -> f64 {
        stable_dt(&self.scenario, &self.controller)
    }

    /// Replaces the step (`None` = automatic) and re-checks stability.
    pub fn set_dt(&mut self, dt: Option<f64>) -> Result<(), ConfigError> {
        match dt {
            None => {
                self.dt_auto = true;
                self.fit_auto_dt();
            }
            Some(dt) => {
                let lim = self.stable_dt();
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(ConfigError::new(format!("dt must be positive, got {dt}")));
                }
                if dt > lim {
                    return Err(ConfigError::new(format!(
                        "dt = {dt} exceeds the stability limit {lim:e} for this scenario"
                    )));
                }
                self.opts.dt = dt;
                self.dt_auto = false;
            }
        }
        Ok(())
    }

    pub fn set_horizon(&mut self, t: f64) -> Result<(), ConfigError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::new(format!("horizon must be positive, got {t}")));
        }
        self.opts.horizon = t;
        if self.dt_auto {
            self.fit_auto_dt();
        }
        Ok(())
    }

    /// Largest step below the automatic one that divides the horizon.
    fn fit_auto_dt(&mut self) {
        let dt = auto_dt(&self.scenario, &self.controller);
        let steps = (self.opts.horizon / dt).ceil().max(1.0);
        self.opts.dt = self.opts.horizon / steps;
    }

    /// Grid intervals; 0 for the planar plant.
    pub fn n(&self) -> usize {
        self.scenario.n()
    }
}

pub fn load(path: &Path) -> Result<Job, ConfigError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    parse(&src, stem.as_deref())
}

/// Parses and validates a config; `n` overrides `numerics.n`.
pub fn parse(src: &str, default_name: Option<&str>) -> Result<Job, ConfigError> {
    parse_with(src, default_name, None)
}

pub fn parse_with(src: &str, default_name: Option<&str>, n_override: Option<usize>) -> Result<Job, ConfigError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let pos = e.span().map(|s| line_col(src, s.start));
        ConfigError::new(e.message().trim().to_string()).at(pos)
    })?;
    Builder { src }.build(raw, default_name, n_override)
}

struct Builder<'a> {
    src: &'a str,
}

impl Builder<'_> {
    fn err(&self, section: &str, key: &str, msg: impl Into<String>) -> ConfigError {
        let pos = locate(self.src, section, key).or_else(|| locate(self.src, section, ""));
        ConfigError::new(format!("{section}{}{key}: {}", if key.is_empty() { "" } else { "." }, msg.into())).at(pos)
    }

    fn build(&self, raw: RawConfig, default_name: Option<&str>, n_override: Option<usize>) -> Result<Job, ConfigError> {
        let mode = raw.run.mode;
        let ctrl = raw.controller.unwrap_or_default();
        let phi = PhiSpec::new(&ctrl.phi).map_err(|e| self.err("controller", "phi", e.to_string()))?;
        let plant = self.plant(&raw.plant, phi)?;
        let kind = plant.kind();

        let (controller, params) = match (mode, ctrl.kind) {
            (RunMode::OpenLoop, _) => (Controller::Off, None),
            (RunMode::ClosedLoop, ControllerKind::Off) => (Controller::Off, None),
            (RunMode::ClosedLoop, ControllerKind::Linear) => {
                let k = ctrl
                    .linear_gain
                    .ok_or_else(|| self.err("controller", "linear_gain", "required for a linear controller"))?;
                (Controller::Linear { k }, None)
            }
            (RunMode::ClosedLoop, ControllerKind::Dads) => {
                let (p, g) = self.dads(&ctrl, phi)?;
                (Controller::Dads { params: p, gains: g }, Some(p))
            }
        };

        let y_source = match (&raw.run.y, mode) {
            (Some(y), RunMode::OpenLoop) => YSource::Prescribed { signal: y.clone() },
            (None, _) => YSource::Free,
            (Some(_), RunMode::ClosedLoop) => {
                return Err(self.err("run", "y", "a prescribed output needs mode = \"open-loop\""))
            }
        };

        let n = match kind {
            PlantKind::Planar => 0,
            _ => n_override
                .or(raw.numerics.n)
                .ok_or_else(|| self.err("numerics", "n", "grid size is required for field plants"))?,
        };
        if kind != PlantKind::Planar && n < dads_core::plants::MIN_INTERVALS {
            return Err(self.err(
                "numerics",
                "n",
                format!("need at least {} intervals, got {n}", dads_core::plants::MIN_INTERVALS),
            ));
        }
        let initial = self.initial(&raw.initial, &plant, n, &y_source)?;
        let scenario = Scenario {
            plant,
            initial,
            z0: raw.initial.z0,
        };
        scenario.validate().map_err(|e| self.err("plant", "", e.to_string()))?;

        let num = &raw.numerics;
        if !(num.horizon > 0.0 && num.horizon.is_finite()) {
            return Err(self.err("numerics", "horizon", "must be positive"));
        }
        if num.stride == 0 {
            return Err(self.err("numerics", "stride", "must be at least 1"));
        }
        let ch = &raw.checks;
        let extra = ExtraChecks {
            oracle_tol: ch.oracle.then_some(ch.oracle_tol),
            delay: ch.delay.then_some((ch.delay_tol, ch.delay_t_min)),
            regulation_tol: ch.regulation_tol,
            expect_z: ch.expect_z.map(|z| (z, ch.expect_z_tol)),
        };
        if extra.oracle_tol.is_some() {
            analytic_unstable(&scenario.plant, 0.0, n.max(8))
                .map_err(|e| self.err("checks", "oracle", e.to_string()))?;
        }
        if extra.delay.is_some() && !matches!(y_source, YSource::Prescribed { .. }) {
            return Err(self.err("checks", "delay", "needs a prescribed output in [run]"));
        }
        let snapshots = num
            .snapshot_stride
            .unwrap_or(if extra.oracle_tol.is_some() || extra.delay.is_some() { 1 } else { 0 });
        let opts = SimOptions::new(num.horizon, 1.0)
            .with_stride(num.stride)
            .with_snapshots(snapshots);

        let certify = self.certify_options(ch, &controller)?;
        let mut job = Job {
            name: raw.name.or(default_name.map(str::to_string)).unwrap_or_else(|| "scenario".into()),
            mode,
            scenario,
            controller,
            params,
            phi,
            y_source,
            opts,
            dt_auto: false,
            certify,
            extra,
        };
        let dt = match &num.dt {
            toml::Value::String(s) if s == "auto" => None,
            toml::Value::Float(x) => Some(*x),
            toml::Value::Integer(i) => Some(*i as f64),
            other => {
                return Err(self.err("numerics", "dt", format!("expected a number or \"auto\", got {other}")))
            }
        };
        job.set_dt(dt).map_err(|e| self.err("numerics", "dt", e.msg))?;
        Ok(job)
    }

    fn certify_options(&self, ch: &RawChecks, controller: &Controller) -> Result<Option<CertifyOptions>, ConfigError> {
        let flags = [ch.transient, ch.z_window, ch.tails, ch.dissipation, ch.dichotomy];
        let dads = matches!(controller, Controller::Dads { .. });
        if !dads {
            let names = ["transient", "z_window", "tails", "dissipation", "dichotomy"];
            if let Some(i) = flags.iter().position(|f| *f == Some(true)) {
                return Err(self.err("checks", names[i], "theorem checks need a closed-loop DADS controller"));
            }
            return Ok(None);
        }
        let on = |f: Option<bool>| f.unwrap_or(true);
        Ok(Some(CertifyOptions {
            transient: on(ch.transient),
            z_window: on(ch.z_window),
            tails: on(ch.tails),
            dissipation: on(ch.dissipation),
            dichotomy: on(ch.dichotomy),
            tail: TailOptions {
                window: ch.tail_window,
                tol_frac: ch.tail_tol_frac,
                settle_tol: ch.settle_tol,
            },
            monitor: MonitorOptions {
                abs_tol: ch.monitor_abs_tol,
                h_coeff: ch.monitor_h_coeff,
            },
            regulation_frac: ch.regulation_frac,
        }))
    }

    fn dads(&self, c: &RawController, phi: PhiSpec) -> Result<(DadsParams, GainProfile), ConfigError> {
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| self.err("controller", key, "required for DADS"));
        let p = DadsParams {
            epsilon: need(c.epsilon, "epsilon")?,
            gamma: need(c.gamma, "gamma")?,
            kappa: need(c.kappa, "kappa")?,
            a: need(c.a, "a")?,
            c_decay: need(c.c_decay, "c_decay")?,
        };
        if let Err(v) = p.validate() {
            let key = match v[0] {
                ParamViolation::EpsilonPositive => "epsilon",
                ParamViolation::GammaPositive => "gamma",
                ParamViolation::KappaPositive => "kappa",
                ParamViolation::APositive => "a",
                ParamViolation::CDecayPositive => "c_decay",
                ParamViolation::TwoKappaExceedsA => "a",
            };
            let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            let msg = if v.contains(&ParamViolation::TwoKappaExceedsA) {
                format!(
                    "violated: {} (kappa = {}, a = {}, 2*kappa = {})",
                    list.join(", "),
                    p.kappa,
                    p.a,
                    2.0 * p.kappa
                )
            } else {
                format!("violated: {}", list.join(", "))
            };
            return Err(self.err("controller", key, msg));
        }
        let gains = match c.gains {
            GainsKind::Constant => {
                let k = c.k.ok_or_else(|| self.err("controller", "k", "constant gains need k = [K1, K2, K3]"))?;
                GainProfile::constant(k[0], k[1], k[2]).map_err(|e| self.err("controller", "k", e.to_string()))?
            }
            GainsKind::PhiDerived => make_gain_profile(&p, &phi, c.safety_factor.unwrap_or(1.0)).map_err(|e| {
                let key = if matches!(e, DadsError::SafetyFactor(_)) { "safety_factor" } else { "" };
                self.err("controller", key, e.to_string())
            })?,
        };
        Ok((p, gains))
    }

    fn plant(&self, r: &RawPlant, phi: PhiSpec) -> Result<Plant, ConfigError> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| self.err("plant", key, format!("required for a {} plant", r.kind)))
        };
        let sig = |s: &Option<Signal>| s.clone().unwrap_or_else(Signal::zero);
        let st = |s: &Option<Signal>, g: &Option<Profile>| {
            SpaceTimeSignal::new(sig(s), g.clone().unwrap_or(Profile::Const(1.0)))
        };
        let b = r
            .b
            .clone()
            .ok_or_else(|| self.err("plant", "b", "the input gain b is required, e.g. \"floor_clamp(1, const(1))\""))?;
        b.check_positive_floor()
            .map_err(|e| self.err("plant", "b", e.to_string()))?;
        let forbid = |present: bool, key: &str| {
            if present {
                Err(self.err("plant", key, format!("not used by a {} plant", r.kind)))
            } else {
                Ok(())
            }
        };
        let coupling = r.coupling.clone().unwrap_or(Coupling::Zero);
        let plant = match r.kind {
            PlantKind::Planar => {
                forbid(r.coupling.is_some(), "coupling")?;
                forbid(r.theta1_space.is_some(), "theta1_space")?;
                forbid(r.theta11.is_some(), "theta11")?;
                forbid(r.theta12.is_some(), "theta12")?;
                forbid(r.delta.is_some(), "delta")?;
                Plant::Planar(PlanarPlant {
                    p_bar: need(r.p_bar, "p_bar")?,
                    theta1: sig(&r.theta1),
                    theta2: sig(&r.theta2),
                    b,
                    d: sig(&r.d),
                })
            }
            PlantKind::Heat => {
                forbid(r.theta11.is_some(), "theta11")?;
                forbid(r.theta12.is_some(), "theta12")?;
                Plant::Heat(HeatPlant {
                    p_bar: need(r.p_bar, "p_bar")?,
                    coupling,
                    phi,
                    theta1: st(&r.theta1, &r.theta1_space),
                    delta: st(&r.delta, &r.delta_space),
                    theta2: sig(&r.theta2),
                    b,
                    d: sig(&r.d),
                })
            }
            PlantKind::Transport => {
                forbid(r.theta1.is_some(), "theta1")?;
                Plant::Transport(TransportPlant {
                    c: need(r.c, "c")?,
                    coupling,
                    phi,
                    theta11: st(&r.theta11, &r.theta11_space),
                    theta12: sig(&r.theta12),
                    delta: st(&r.delta, &r.delta_space),
                    theta2: sig(&r.theta2),
                    b,
                    d: sig(&r.d),
                })
            }
            PlantKind::Wave => {
                forbid(r.theta11.is_some(), "theta11")?;
                forbid(r.theta12.is_some(), "theta12")?;
                Plant::Wave(WavePlant {
                    c: need(r.c, "c")?,
                    sigma: need(r.sigma, "sigma")?,
                    coupling,
                    phi,
                    theta1: st(&r.theta1, &r.theta1_space),
                    delta: st(&r.delta, &r.delta_space),
                    theta2: sig(&r.theta2),
                    b,
                    d: sig(&r.d),
                })
            }
        };
        plant.validate().map_err(|e| self.err("plant", "", e.to_string()))?;
        Ok(plant)
    }

    fn initial(&self, r: &RawInitial, plant: &Plant, n: usize, ysrc: &YSource) -> Result<PlantState, ConfigError> {
        let kind = plant.kind();
        match r.mode {
            InitMode::Analytic => {
                return analytic_unstable(plant, r.t0, n.max(8)).map_err(|e| self.err("initial", "mode", e.to_string()))
            }
            InitMode::History => {
                let (Plant::Transport(tp), YSource::Prescribed { signal }) = (plant, ysrc) else {
                    return Err(self.err(
                        "initial",
                        "mode",
                        "history initial data needs a transport plant with a prescribed output",
                    ));
                };
                return Ok(delay_history(n, tp.c, signal));
            }
            InitMode::Explicit => {}
        }
        let y = match (r.y, ysrc) {
            (Some(y), _) => y,
            (None, YSource::Prescribed { signal }) => signal.eval(0.0),
            (None, YSource::Free) => return Err(self.err("initial", "y", "initial output is required")),
        };
        let profile = |v: &Option<toml::Value>, key: &str| -> Result<Profile, ConfigError> {
            match v {
                None => Ok(Profile::Const(0.0)),
                Some(toml::Value::String(s)) => s.parse().map_err(|e| self.err("initial", key, format!("{e}"))),
                Some(toml::Value::Float(x)) => Ok(Profile::Const(*x)),
                Some(toml::Value::Integer(i)) => Ok(Profile::Const(*i as f64)),
                Some(other) => Err(self.err("initial", key, format!("expected a number or a profile, got {other}"))),
            }
        };
        let field = |p: &Profile, tag: BoundaryTag, key: &str| -> Result<Field, ConfigError> {
            let f = Field::from_fn(n, tag, |x| p.eval(x));
            if tag == BoundaryTag::DirichletBoth && (p.eval(0.0).abs() > 1e-9 || p.eval(1.0).abs() > 1e-9) {
                return Err(self.err("initial", key, "profile must vanish at x = 0 and x = 1"));
            }
            Ok(f)
        };
        let state = match kind {
            PlantKind::Planar => {
                let w = match &r.w {
                    None => 0.0,
                    Some(toml::Value::Float(x)) => *x,
                    Some(toml::Value::Integer(i)) => *i as f64,
                    Some(_) => return Err(self.err("initial", "w", "planar state w must be a number")),
                };
                forbid_wave(self, r)?;
                PlantState::Planar { w, y }
            }
            PlantKind::Heat => {
                forbid_wave(self, r)?;
                PlantState::Heat {
                    w: field(&profile(&r.w, "w")?, BoundaryTag::DirichletBoth, "w")?,
                    y,
                }
            }
            PlantKind::Transport => {
                forbid_wave(self, r)?;
                // the inflow node is overwritten by the boundary condition
                let w = field(&profile(&r.w, "w")?, BoundaryTag::InflowLeft, "w")?;
                PlantState::Transport { w, y }
            }
            PlantKind::Wave => {
                if r.w.is_some() {
                    return Err(self.err("initial", "w", "the wave state is given by v and phi"));
                }
                let v = r.v.clone().unwrap_or(Profile::Const(0.0));
                let ph = r.phi.clone().unwrap_or(Profile::Const(0.0));
                PlantState::Wave {
                    v: field(&v, BoundaryTag::DirichletBoth, "v")?,
                    phi: field(&ph, BoundaryTag::DirichletBoth, "phi")?,
                    y,
                }
            }
        };
        Ok(state)
    }
}

fn forbid_wave(b: &Builder<'_>, r: &RawInitial) -> Result<(), ConfigError> {
    if r.v.is_some() {
        return Err(b.err("initial", "v", "only wave plants have a v component"));
    }
    if r.phi.is_some() {
        return Err(b.err("initial", "phi", "only wave plants have a phi component"));
    }
    Ok(())
}
