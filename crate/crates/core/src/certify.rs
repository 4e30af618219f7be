//! Lyapunov functionals per case, the theorem's constants and
//! trajectory-level certification of its estimates.
//!
//! Every check produces a [`CheckRecord`] whose `worst_slack` is
//! `bound - value` at the worst sample, so a negative slack is a violation.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dads::{g_excess, DadsParams};
use crate::numerics::fd::{grad_l2_sq, l2_sq, trapz_by};
use crate::numerics::Trajectory;
use crate::plants::{random_state, Discretized, Plant, PlantKind, PlantState};
use crate::signals::{Signal, SpaceTimeSignal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("state is a {got} state, plant is {expected}")]
    KindMismatch { expected: PlantKind, got: PlantKind },
    #[error("trajectory has no snapshots")]
    NoSnapshots,
    #[error(transparent)]
    Plant(#[from] crate::plants::PlantError),
}

/// Norm-equivalence constants `K₁ ‖w‖² <= Φ(w) <= K₂ ‖w‖²`, the gain `R`
/// of `θ₁` and the gain `G` of `δ` in the dissipation inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseConstants {
    pub k1: f64,
    pub k2: f64,
    pub r: f64,
    pub g_const: f64,
}

impl CaseConstants {
    pub fn planar(p_bar: f64) -> Self {
        CaseConstants {
            k1: 1.0 / p_bar,
            k2: 1.0 / p_bar,
            r: 1.0 / p_bar,
            g_const: 0.0,
        }
    }

    pub fn heat(p_bar: f64) -> Self {
        CaseConstants {
            k1: 1.0 / (2.0 * p_bar),
            k2: 1.0 / (2.0 * p_bar),
            r: 1.0 / p_bar,
            g_const: 1.0 / (p_bar * p_bar * (4.0 * PI * PI - 5.0)),
        }
    }

    pub fn transport(c: f64) -> Self {
        CaseConstants {
            k1: 2.0 / c,
            k2: 2.0 * E / c,
            r: (2.0 * E).sqrt(),
            g_const: 8.0 * E * E / (c * c),
        }
    }

    pub fn wave(c: f64, sigma: f64) -> Self {
        let c2 = c * c;
        let pi2 = PI * PI;
        let r2 = 2.0 * ((c2 + 1.0).powi(2) * pi2 + sigma * sigma) / (sigma * sigma * c2 * c2 * pi2);
        CaseConstants {
            k1: 1.0 / sigma,
            k2: (c2 + 1.0 + 2.0 * sigma * sigma / (c2 * pi2)).max(1.0 + 2.0 / c2) / sigma,
            r: r2.sqrt(),
            g_const: r2,
        }
    }

    pub fn for_plant(plant: &Plant) -> Self {
        match plant {
            Plant::Planar(p) => Self::planar(p.p_bar),
            Plant::Heat(p) => Self::heat(p.p_bar),
            Plant::Transport(p) => Self::transport(p.c),
            Plant::Wave(p) => Self::wave(p.c, p.sigma),
        }
    }
}

/// `Φ` on a flat discrete state (layout of [`PlantKind::state_len`]).
pub fn phi_flat(disc: &Discretized<'_>, x: &[f64]) -> f64 {
    let n = disc.n;
    let h = disc.h;
    match disc.plant {
        Plant::Planar(p) => x[0] * x[0] / p.p_bar,
        Plant::Heat(p) => l2_sq(&x[..=n], h) / (2.0 * p.p_bar),
        Plant::Transport(p) => {
            2.0 * E / p.c * trapz_by(n, h, |i| (-(i as f64) * h).exp() * x[i] * x[i])
        }
        Plant::Wave(p) => {
            let v = &x[..=n];
            let ph = &x[n + 1..=2 * n + 1];
            let c2 = p.c * p.c;
            let mixed = trapz_by(n, h, |i| {
                let s = ph[i] + p.sigma * v[i];
                s * s
            });
            (c2 + 1.0) / p.sigma * grad_l2_sq(v, h) + l2_sq(ph, h) / p.sigma + mixed / (p.sigma * c2)
        }
    }
}

/// The case Lyapunov functional `Φ(w)`.
pub fn phi_case(state: &PlantState, plant: &Plant) -> Result<f64, CertifyError> {
    if state.kind() != plant.kind() {
        return Err(CertifyError::KindMismatch {
            expected: plant.kind(),
            got: state.kind(),
        });
    }
    let disc = plant.discretize(state.n());
    Ok(phi_flat(&disc, &state.to_vec()))
}

/// A field violating the norm equivalence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEquivViolation {
    pub sample: usize,
    pub norm_sq: f64,
    pub phi: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Checks `K₁‖w‖² <= Φ(w) <= K₂‖w‖²` on `n_fields` random smooth fields
/// on an `n`-interval grid. Returns the smallest relative margin seen.
pub fn norm_equiv_check<R: Rng>(
    plant: &Plant,
    n_fields: usize,
    n: usize,
    rng: &mut R,
) -> Result<f64, NormEquivViolation> {
    // quadrature of smooth fields: the continuum inequality holds up to O(h²)
    let tol = 1e-9 + 10.0 / (n * n) as f64;
    let cc = CaseConstants::for_plant(plant);
    let disc = plant.discretize(n);
    let mut margin = f64::INFINITY;
    for sample in 0..n_fields {
        let x = random_state(rng, plant.kind(), n).to_vec();
        let norm_sq = disc.w_norm_sq(&x);
        let phi = phi_flat(&disc, &x);
        let (lower, upper) = (cc.k1 * norm_sq, cc.k2 * norm_sq);
        if norm_sq == 0.0 {
            continue;
        }
        let m = ((phi - lower) / lower).min((upper - phi) / upper);
        margin = margin.min(m);
        if m < -tol {
            return Err(NormEquivViolation {
                sample,
                norm_sq,
                phi,
                lower,
                upper,
            });
        }
    }
    Ok(margin)
}

/// `μ = min((2κ - a)/(2κ K₂), 2C)`.
pub fn mu_rate(p: &DadsParams, cc: &CaseConstants) -> f64 {
    ((2.0 * p.kappa - p.a) / (2.0 * p.kappa * cc.k2)).min(2.0 * p.c_decay)
}

/// Sup-norms of the inputs as read from the signal grammar. `theta1` is
/// the case norm `‖θ₁‖_U`, `delta` the `L²` norm of `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputNorms {
    pub d: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub b_inf: f64,
    pub delta: f64,
}

/// Asymptotic counterparts of [`InputNorms`]: limsups and `liminf b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputLimits {
    pub d: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub b_liminf: f64,
    pub delta: f64,
}

fn field_sup(s: &SpaceTimeSignal) -> f64 {
    s.time.sup_norm() * s.space.l2_norm()
}

fn field_limsup(s: &SpaceTimeSignal) -> f64 {
    s.time.limsup_abs() * s.space.l2_norm()
}

/// `‖(θ₁,₁, θ₁,₂)‖_U = sqrt(θ₁,₂² + (4e/c²)‖θ₁,₁‖²)`.
pub fn transport_theta1_norm(theta11_l2: f64, theta12: f64, c: f64) -> f64 {
    (theta12 * theta12 + 4.0 * E / (c * c) * theta11_l2 * theta11_l2).sqrt()
}

fn theta1_norm(plant: &Plant, of_signal: impl Fn(&Signal) -> f64, of_field: impl Fn(&SpaceTimeSignal) -> f64) -> f64 {
    match plant {
        Plant::Planar(p) => of_signal(&p.theta1),
        Plant::Heat(p) => of_field(&p.theta1),
        Plant::Transport(p) => transport_theta1_norm(of_field(&p.theta11), of_signal(&p.theta12), p.c),
        Plant::Wave(p) => of_field(&p.theta1),
    }
}

fn delta_of(plant: &Plant) -> Option<&SpaceTimeSignal> {
    match plant {
        Plant::Planar(_) => None,
        Plant::Heat(p) => Some(&p.delta),
        Plant::Transport(p) => Some(&p.delta),
        Plant::Wave(p) => Some(&p.delta),
    }
}

impl InputNorms {
    pub fn from_plant(plant: &Plant) -> Self {
        let out = plant.output_signals();
        InputNorms {
            d: out.d.sup_norm(),
            theta1: theta1_norm(plant, Signal::sup_norm, field_sup),
            theta2: out.theta2.sup_norm(),
            b_inf: out.b.inf(),
            delta: delta_of(plant).map_or(0.0, field_sup),
        }
    }
}

impl InputLimits {
    pub fn from_plant(plant: &Plant) -> Self {
        let out = plant.output_signals();
        InputLimits {
            d: out.d.limsup_abs(),
            theta1: theta1_norm(plant, Signal::limsup_abs, field_limsup),
            theta2: out.theta2.limsup_abs(),
            b_liminf: out.b.liminf(),
            delta: delta_of(plant).map_or(0.0, field_limsup),
        }
    }
}

/// The bracket shared by `Z` and `B`: `‖d‖² + g(‖θ₂‖) + g(‖θ₂‖)²` and the
/// `inf b` term with multiplier `b_mult`.
fn common_terms(p: &DadsParams, norms: &InputNorms, z0: f64, b_mult: f64) -> f64 {
    let g2 = g_excess(norms.theta2, z0, p);
    let b = norms.b_inf;
    norms.d * norms.d + g2 + g2 * g2 + b_mult * b * g_excess(1.0 / b, z0, p)
}

/// The additive constant `Z` of the transient estimate.
pub fn z_bound(p: &DadsParams, cc: &CaseConstants, norms: &InputNorms, z0: f64) -> f64 {
    let gr = g_excess(cc.r * norms.theta1, z0, p);
    cc.g_const * norms.delta * norms.delta
        + p.a / (p.kappa + z0.exp()) * (common_terms(p, norms, z0, 4.0) + gr * gr)
}

/// The planar form `Z̄`, related to [`z_bound`] by `Z = a Z̄/(κ + e^{z₀})`.
pub fn z_bar_planar(p: &DadsParams, p_bar: f64, norms: &InputNorms, z0: f64) -> f64 {
    let gr = g_excess(norms.theta1 / p_bar, z0, p);
    common_terms(p, norms, z0, 4.0) + gr * gr
}

/// Initial data entering `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub w0_norm_sq: f64,
    pub y0: f64,
}

/// The constant `B` of the gain-state window.
pub fn b_bound(p: &DadsParams, cc: &CaseConstants, norms: &InputNorms, init: &InitialData, z0: f64) -> f64 {
    let mu = mu_rate(p, cc);
    let z = z_bound(p, cc, norms, z0);
    (cc.k2 * init.w0_norm_sq + 0.5 * init.y0 * init.y0 + z / mu) / (2.0 * cc.k1)
        + common_terms(p, norms, z0, 2.0)
}

/// Upper end of the window `z₀ <= z(t) <= ·`.
pub fn z_window_upper(p: &DadsParams, cc: &CaseConstants, norms: &InputNorms, init: &InitialData, z0: f64) -> f64 {
    let b = b_bound(p, cc, norms, init, z0);
    let ez = z0.exp();
    (ez + p.gamma / (4.0 * p.c_decay) * init.y0 * init.y0
        + p.a * b * (2.0 * p.c_decay * (1.0 + ez) + p.epsilon * p.gamma)
            / (4.0 * p.c_decay * p.c_decay * p.epsilon * p.kappa.min(1.0) * (1.0 + ez)))
        .ln()
}

/// Asymptotic bound on `‖w‖`.
pub fn w_tail_bound(p: &DadsParams, cc: &CaseConstants, limits: &InputLimits) -> f64 {
    (cc.k2 / cc.k1
        * (2.0 * p.epsilon * cc.r * cc.r * limits.theta1 * limits.theta1 + cc.g_const * limits.delta * limits.delta))
        .sqrt()
}

/// `Θ₁Θ₂/(p̄ b_min)`: any linear gain above it stabilizes the
/// constant-parameter planar loop.
pub fn small_gain_threshold(theta1: f64, theta2: f64, p_bar: f64, b_min: f64) -> f64 {
    theta1 * theta2 / (p_bar * b_min)
}

/// Trace/determinant test of `[[-p̄, θ₁], [θ₂, -b k]]`.
pub fn planar_linear_hurwitz(theta1: f64, theta2: f64, p_bar: f64, b: f64, k: f64) -> bool {
    let trace = -p_bar - b * k;
    let det = p_bar * b * k - theta1 * theta2;
    trace < 0.0 && det > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A precondition of the check was not met; not a failure.
    Inconclusive,
    NotApplicable,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
            CheckStatus::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub worst_t: Option<f64>,
    pub worst_index: Option<usize>,
    pub constants: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    fn new(name: &str, tolerance: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            status: CheckStatus::Pass,
            worst_slack: f64::INFINITY,
            tolerance,
            worst_t: None,
            worst_index: None,
            constants: BTreeMap::new(),
            note: None,
        }
    }

    fn constant(mut self, k: &str, v: f64) -> Self {
        self.constants.insert(k.to_string(), v);
        self
    }

    fn observe(&mut self, i: usize, t: f64, slack: f64, tol: f64) {
        if slack + tol < self.worst_slack + self.tolerance || self.worst_index.is_none() {
            self.worst_slack = slack;
            self.tolerance = tol;
            self.worst_t = Some(t);
            self.worst_index = Some(i);
        }
    }

    fn finish(mut self) -> Self {
        if self.worst_index.is_none() {
            self.worst_slack = 0.0;
        }
        self.status = if self.worst_slack >= -self.tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// `2K₁‖w(t)‖² + y(t)² <= e^{-μt}(2K₂‖w(0)‖² + y(0)²) + 2Z/μ` at every sample.
pub fn check_transient(traj: &Trajectory, p: &DadsParams, cc: &CaseConstants, norms: &InputNorms) -> CheckRecord {
    let mu = mu_rate(p, cc);
    let z = z_bound(p, cc, norms, traj.z[0]);
    let e0 = 2.0 * cc.k2 * traj.w_norm[0].powi(2) + traj.y[0].powi(2);
    let mut rec = CheckRecord::new("transient", 0.0)
        .constant("mu", mu)
        .constant("Z", z)
        .constant("k1", cc.k1)
        .constant("k2", cc.k2);
    for i in 0..traj.len() {
        let t = traj.t[i];
        let lhs = 2.0 * cc.k1 * traj.w_norm[i].powi(2) + traj.y[i].powi(2);
        let bound = (-mu * t).exp() * e0 + 2.0 * z / mu;
        rec.observe(i, t, bound - lhs, 1e-9 * bound.abs());
    }
    rec.finish()
}

/// `z(0) <= z(t) <= ln(e^{z(0)} + Γ y(0)²/(4C) + aB(...))` at every sample.
pub fn check_z_window(traj: &Trajectory, p: &DadsParams, cc: &CaseConstants, norms: &InputNorms) -> CheckRecord {
    let z0 = traj.z[0];
    let init = InitialData {
        w0_norm_sq: traj.w_norm[0].powi(2),
        y0: traj.y[0],
    };
    let upper = z_window_upper(p, cc, norms, &init, z0);
    let mut rec = CheckRecord::new("z-window", 0.0)
        .constant("z0", z0)
        .constant("z_upper", upper)
        .constant("B", b_bound(p, cc, norms, &init, z0));
    for i in 0..traj.len() {
        let z = traj.z[i];
        rec.observe(i, traj.t[i], (z - z0).min(upper - z), 0.0);
    }
    rec.finish()
}

/// Tail settings: the window is the final `window` fraction of the
/// horizon; bounds get an extra `tol_frac` relative allowance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    pub window: f64,
    pub tol_frac: f64,
    pub settle_tol: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            window: 0.1,
            tol_frac: 0.1,
            settle_tol: 1e-3,
        }
    }
}

/// Tail maxima of `|y|` and `‖w‖` against `√(2ε)` and the `‖w‖` tail
/// bound. A satisfied bound passes regardless of settling; a violated one
/// is `Inconclusive` unless `|z(T) - z(0.8T)| < settle_tol`.
pub fn check_tails(
    traj: &Trajectory,
    p: &DadsParams,
    cc: &CaseConstants,
    limits: &InputLimits,
    opts: &TailOptions,
) -> CheckRecord {
    let y_bound = (2.0 * p.epsilon).sqrt();
    let w_bound = w_tail_bound(p, cc, limits);
    // the allowance is folded into the bounds so slack is measured against them
    let y_lim = (1.0 + opts.tol_frac) * y_bound;
    let w_lim = w_bound + opts.tol_frac * w_bound.max(y_bound);
    let last = traj.len() - 1;
    let z_settle = (traj.z[last] - traj.z[traj.tail_start(0.2)]).abs();
    let settled = z_settle < opts.settle_tol;
    let mut rec = CheckRecord::new("tails", 0.0)
        .constant("y_bound", y_bound)
        .constant("w_bound", w_bound)
        .constant("y_limit", y_lim)
        .constant("w_limit", w_lim)
        .constant("z_drift", z_settle);
    let start = traj.tail_start(opts.window);
    let (mut y_max, mut w_max) = (0.0f64, 0.0f64);
    for i in start..=last {
        y_max = y_max.max(traj.y[i].abs());
        w_max = w_max.max(traj.w_norm[i]);
        // y and w share one record: slack in units of the y limit
        let s = ((y_lim - traj.y[i].abs()) / y_lim).min((w_lim - traj.w_norm[i]) / w_lim);
        rec.observe(i, traj.t[i], s * y_lim, 0.0);
    }
    rec = rec.constant("y_tail_max", y_max).constant("w_tail_max", w_max);
    let mut rec = rec.finish();
    if rec.status == CheckStatus::Fail && !settled {
        rec.status = CheckStatus::Inconclusive;
        rec.note = Some(format!("z not settled: |z(T) - z(0.8T)| = {z_settle:.3e}"));
    }
    rec
}

/// Which branches of the regulation-or-gain-deficiency dichotomy the run
/// exhibits. The dichotomy is non-exclusive, so both may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dichotomy {
    NotApplicable,
    Regulated,
    GainDeficient,
    GainDeficientYetRegulated,
    /// Neither branch observed while the preconditions hold.
    Contradiction,
    /// Neither branch observed, but `liminf b < 1/κ` so nothing is implied.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRecord {
    pub classification: Dichotomy,
    pub regulated: bool,
    pub gain_deficient: bool,
    pub b_condition: bool,
    pub z_final: f64,
    pub gain_level: f64,
    pub parameter_level: f64,
    pub y_tail: f64,
    pub w_tail: f64,
    pub regulation_tol: f64,
}

/// Classifies the run when `d` and `δ` vanish asymptotically. Regulation
/// means tail `|y|` and `‖w‖` below `reg_frac` times their initial sizes
/// (with a floor of `reg_frac · √(2ε)`).
pub fn check_dichotomy(
    traj: &Trajectory,
    p: &DadsParams,
    cc: &CaseConstants,
    limits: &InputLimits,
    reg_frac: f64,
) -> DichotomyRecord {
    let last = traj.len() - 1;
    let start = traj.tail_start(0.1);
    let y_tail = traj.y[start..].iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let w_tail = traj.w_norm[start..].iter().fold(0.0f64, |m, &w| m.max(w));
    let floor = reg_frac * (2.0 * p.epsilon).sqrt();
    let reg_tol = (reg_frac * traj.y[0].abs().max(traj.w_norm[0])).max(floor);
    let z_final = traj.z[last];
    let gain_level = p.kappa + z_final.exp();
    let parameter_level = (cc.r * limits.theta1).max(limits.theta2);
    let regulated = y_tail <= reg_tol && w_tail <= reg_tol;
    let gain_deficient = gain_level < parameter_level;
    let b_condition = limits.b_liminf >= 1.0 / p.kappa;
    let classification = if limits.d != 0.0 || limits.delta != 0.0 {
        Dichotomy::NotApplicable
    } else {
        match (regulated, gain_deficient) {
            (true, true) => Dichotomy::GainDeficientYetRegulated,
            (true, false) => Dichotomy::Regulated,
            (false, true) => Dichotomy::GainDeficient,
            (false, false) if b_condition => Dichotomy::Contradiction,
            (false, false) => Dichotomy::Unresolved,
        }
    };
    DichotomyRecord {
        classification,
        regulated,
        gain_deficient,
        b_condition,
        z_final,
        gain_level,
        parameter_level,
        y_tail,
        w_tail,
        regulation_tol: reg_tol,
    }
}

/// Tolerance of the dissipation monitor: `abs + coeff · h^order · scale`
/// where `scale` is the local size of the terms being compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorOptions {
    pub abs_tol: f64,
    pub h_coeff: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        MonitorOptions {
            abs_tol: 1e-6,
            h_coeff: 10.0,
        }
    }
}

/// Spatial order of the discretization error in `Φ̇`.
pub fn spatial_order(kind: PlantKind) -> i32 {
    match kind {
        PlantKind::Planar => 0,
        PlantKind::Heat | PlantKind::Wave => 2,
        PlantKind::Transport => 1,
    }
}

/// Central-difference `d/dt(Φ + V) <= -μ(Φ + V) + Z` at interior samples.
pub fn monitor_dissipation(
    traj: &Trajectory,
    p: &DadsParams,
    cc: &CaseConstants,
    norms: &InputNorms,
    opts: &MonitorOptions,
) -> CheckRecord {
    let mu = mu_rate(p, cc);
    let z = z_bound(p, cc, norms, traj.z[0]);
    let h_term = if traj.kind == PlantKind::Planar {
        0.0
    } else {
        opts.h_coeff * (1.0 / traj.n as f64).powi(spatial_order(traj.kind))
    };
    let mut rec = CheckRecord::new("dissipation", opts.abs_tol)
        .constant("mu", mu)
        .constant("Z", z)
        .constant("h_slack_coeff", h_term);
    let e: Vec<f64> = traj.phi.iter().zip(&traj.v).map(|(a, b)| a + b).collect();
    for i in 1..traj.len().saturating_sub(1) {
        let de = (e[i + 1] - e[i - 1]) / (traj.t[i + 1] - traj.t[i - 1]);
        let bound = -mu * e[i] + z;
        let tol = opts.abs_tol + h_term * de.abs().max(mu * e[i]);
        rec.observe(i, traj.t[i], bound - de, tol);
    }
    rec.finish()
}

/// Relative `L²` distance between the stored snapshots and the analytic
/// unstable solution, maximised over snapshots:
/// `sqrt(‖Δfield‖² + Δy²) / sqrt(‖exact‖² + y*²)`.
pub fn oracle_error(traj: &Trajectory, plant: &Plant) -> Result<f64, CertifyError> {
    if traj.snapshots.is_empty() {
        return Err(CertifyError::NoSnapshots);
    }
    let n = traj.n;
    let h = 1.0 / n as f64;
    let yi = traj.kind.y_index(n);
    let mut worst = 0.0f64;
    for s in &traj.snapshots {
        let exact = crate::plants::analytic_unstable(plant, s.t, n)?.to_vec();
        let (mut num, mut den) = (0.0, 0.0);
        for block in (0..yi).step_by(n + 1) {
            let diff: Vec<f64> = (block..=block + n).map(|i| s.state[i] - exact[i]).collect();
            num += l2_sq(&diff, h);
            den += l2_sq(&exact[block..=block + n], h);
        }
        num += (s.state[yi] - exact[yi]).powi(2);
        den += exact[yi].powi(2);
        worst = worst.max((num / den).sqrt());
    }
    Ok(worst)
}

/// Max nodal deviation `|w(t,x) - y(t - x/c)|` over snapshots with
/// `t > t_min` for a transport run whose field carries delayed outputs.
pub fn delay_error(traj: &Trajectory, y: &Signal, c: f64, t_min: f64) -> Result<f64, CertifyError> {
    if traj.kind != PlantKind::Transport {
        return Err(CertifyError::KindMismatch {
            expected: PlantKind::Transport,
            got: traj.kind,
        });
    }
    let n = traj.n;
    let mut worst = 0.0f64;
    let mut seen = false;
    for s in traj.snapshots.iter().filter(|s| s.t > t_min) {
        seen = true;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            worst = worst.max((s.state[i] - y.eval(s.t - x / c)).abs());
        }
    }
    if !seen {
        return Err(CertifyError::NoSnapshots);
    }
    Ok(worst)
}

/// Which checks to run and with what tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub transient: bool,
    pub z_window: bool,
    pub tails: bool,
    pub dissipation: bool,
    pub dichotomy: bool,
    pub tail: TailOptions,
    pub monitor: MonitorOptions,
    pub regulation_frac: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            transient: true,
            z_window: true,
            tails: true,
            dissipation: true,
            dichotomy: true,
            tail: TailOptions::default(),
            monitor: MonitorOptions::default(),
            regulation_frac: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub case_constants: CaseConstants,
    pub norms: InputNorms,
    pub limits: InputLimits,
    pub mu: f64,
    pub z: f64,
    pub z_monotone: bool,
    pub checks: Vec<CheckRecord>,
    pub dichotomy: Option<DichotomyRecord>,
    /// No check failed and `z` never decreased.
    pub passed: bool,
}

/// Runs the selected checks on a closed-loop trajectory.
pub fn certify(traj: &Trajectory, plant: &Plant, p: &DadsParams, opts: &CertifyOptions) -> CertReport {
    let cc = CaseConstants::for_plant(plant);
    let norms = InputNorms::from_plant(plant);
    let limits = InputLimits::from_plant(plant);
    let mut checks = Vec::new();
    if opts.transient {
        checks.push(check_transient(traj, p, &cc, &norms));
    }
    if opts.z_window {
        checks.push(check_z_window(traj, p, &cc, &norms));
    }
    if opts.tails {
        checks.push(check_tails(traj, p, &cc, &limits, &opts.tail));
    }
    if opts.dissipation {
        checks.push(monitor_dissipation(traj, p, &cc, &norms, &opts.monitor));
    }
    let dichotomy = opts
        .dichotomy
        .then(|| check_dichotomy(traj, p, &cc, &limits, opts.regulation_frac));
    let z_monotone = traj.z_monotone();
    let passed = z_monotone && checks.iter().all(|c| c.status != CheckStatus::Fail);
    CertReport {
        case_constants: cc,
        norms,
        limits,
        mu: mu_rate(p, &cc),
        z: z_bound(p, &cc, &norms, traj.z[0]),
        z_monotone,
        checks,
        dichotomy,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dads::PhiSpec;
    use crate::plants::{BoundaryTag, Coupling, Field, HeatPlant, PlanarPlant, TransportPlant, WavePlant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const P: DadsParams = DadsParams::PLANAR_EXAMPLE;

    fn b1() -> Signal {
        Signal::floor_clamp(1.0, Signal::constant(1.0))
    }

    fn planar(d: Signal) -> Plant {
        Plant::Planar(PlanarPlant {
            p_bar: 1.0,
            theta1: Signal::constant(10.0),
            theta2: Signal::constant(20.0),
            b: Signal::floor_clamp(0.1, Signal::constant(0.1)),
            d,
        })
    }

    fn heat() -> Plant {
        Plant::Heat(HeatPlant {
            p_bar: 1.0,
            coupling: Coupling::Zero,
            phi: PhiSpec::ZERO,
            theta1: SpaceTimeSignal::zero(),
            delta: SpaceTimeSignal::zero(),
            theta2: Signal::zero(),
            b: b1(),
            d: Signal::zero(),
        })
    }

    fn transport(c: f64) -> Plant {
        Plant::Transport(TransportPlant {
            c,
            coupling: Coupling::Zero,
            phi: PhiSpec::ZERO,
            theta11: SpaceTimeSignal::zero(),
            theta12: Signal::zero(),
            delta: SpaceTimeSignal::zero(),
            theta2: Signal::zero(),
            b: b1(),
            d: Signal::zero(),
        })
    }

    fn wave(c: f64, sigma: f64) -> Plant {
        Plant::Wave(WavePlant {
            c,
            sigma,
            coupling: Coupling::Zero,
            phi: PhiSpec::ZERO,
            theta1: SpaceTimeSignal::zero(),
            delta: SpaceTimeSignal::zero(),
            theta2: Signal::zero(),
            b: b1(),
            d: Signal::zero(),
        })
    }

    #[test]
    fn case_constant_values() {
        let h = CaseConstants::heat(1.0);
        assert_eq!(h.k1, 0.5);
        assert!((h.g_const - 1.0 / (4.0 * PI * PI - 5.0)).abs() < 1e-16);
        let t = CaseConstants::transport(1.0);
        assert!((t.k2 - 2.0 * E).abs() < 1e-15);
        assert!((t.g_const - 8.0 * E * E).abs() < 1e-12);
        let w = CaseConstants::wave(1.0, 1.0);
        assert!((w.k2 - 3.0).abs() < 1e-15);
        assert!((w.g_const - w.r * w.r).abs() < 1e-12);
        for cc in [CaseConstants::planar(2.0), h, t, w] {
            assert!(cc.k1 > 0.0 && cc.k1 <= cc.k2 && cc.r > 0.0 && cc.g_const >= 0.0);
        }
    }

    #[test]
    fn phi_examples() {
        for p in [planar(Signal::zero()), heat(), transport(1.0), wave(1.0, 1.0)] {
            let s = PlantState::zero(p.kind(), 16);
            assert_eq!(phi_case(&s, &p).unwrap(), 0.0);
        }
        let w = Field::from_fn(100, BoundaryTag::DirichletBoth, |x| (PI * x).sin());
        let s = PlantState::Heat { w: w.clone(), y: 0.0 };
        assert!((phi_case(&s, &heat()).unwrap() - 0.25).abs() < 1e-4);
        let s = PlantState::Wave {
            v: w,
            phi: Field::zeros(100, BoundaryTag::DirichletBoth),
            y: 0.0,
        };
        assert!((phi_case(&s, &wave(1.0, 1.0)).unwrap() - (PI * PI + 0.5)).abs() < 1e-3);
        let s = PlantState::Transport {
            w: Field::from_fn(200, BoundaryTag::InflowLeft, |_| 1.0),
            y: 0.0,
        };
        let phi = phi_case(&s, &transport(1.0)).unwrap();
        assert!((phi - 3.43656365691809).abs() < 1e-4);
        assert!(2.0 <= phi && phi <= 2.0 * E);
        assert!(phi_case(&s, &heat()).is_err());
    }

    #[test]
    fn norm_equivalence_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [heat(), transport(1.0), transport(0.5), wave(1.0, 1.0), wave(2.0, 0.3)] {
            let m = norm_equiv_check(&p, 200, 100, &mut rng).unwrap();
            assert!(m > -1e-3, "{:?}: {m}", p.kind());
        }
        // heat is tight on both sides
        let m = norm_equiv_check(&heat(), 20, 50, &mut rng).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn mu_examples() {
        let mu = mu_rate(&P, &CaseConstants::planar(1.0));
        assert!((mu - 0.7619047619047619).abs() < 1e-15);
        let mut q = P;
        q.a = 2.0 * q.kappa - 1e-9;
        assert!(mu_rate(&q, &CaseConstants::planar(1.0)) < 1e-9);
        q = P;
        q.c_decay = 1e9;
        assert_eq!(mu_rate(&q, &CaseConstants::planar(1.0)), 3.2 / 4.2);
    }

    #[test]
    fn planar_constants_match_oracle() {
        let plant = planar(Signal::sin(3.0, 1.0, 0.0));
        let norms = InputNorms::from_plant(&plant);
        assert_eq!(norms.d, 3.0);
        assert_eq!(norms.b_inf, 0.1);
        let zb = z_bar_planar(&P, 1.0, &norms, -10.0);
        assert!((zb / 106910.81722079715 - 1.0).abs() < 1e-12, "{zb}");
        let cc = CaseConstants::planar(1.0);
        let z = z_bound(&P, &cc, &norms, -10.0);
        assert!((z / 50908.81236394835 - 1.0).abs() < 1e-12, "{z}");
        assert!((z - P.a * zb / (P.kappa + (-10f64).exp())).abs() < 1e-8);
        let init = InitialData { w0_norm_sq: 0.25, y0: 0.1 };
        let b = b_bound(&P, &cc, &norms, &init, -10.0);
        assert!((b / 136412.45241307368 - 1.0).abs() < 1e-12, "{b}");
    }

    #[test]
    fn z_vanishes_when_every_excess_clips() {
        let plant = Plant::Planar(PlanarPlant {
            p_bar: 1.0,
            theta1: Signal::constant(1.0),
            theta2: Signal::constant(1.0),
            b: Signal::floor_clamp(1.0, Signal::constant(1.0)),
            d: Signal::zero(),
        });
        let norms = InputNorms::from_plant(&plant);
        assert_eq!(z_bound(&P, &CaseConstants::planar(1.0), &norms, -10.0), 0.0);
    }

    #[test]
    fn z_non_increasing_in_z0() {
        let norms = InputNorms::from_plant(&planar(Signal::sin(3.0, 1.0, 0.0)));
        let cc = CaseConstants::planar(1.0);
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            let z = z_bound(&P, &cc, &norms, -10.0 + 0.25 * k as f64);
            assert!(z <= prev);
            prev = z;
        }
    }

    #[test]
    fn transport_theta1_norm_scaling() {
        assert!((transport_theta1_norm(1.0, 0.0, 1.0) - (4.0 * E).sqrt()).abs() < 1e-15);
        assert!((transport_theta1_norm(1.0, 0.0, 2.0) - E.sqrt()).abs() < 1e-15);
        assert_eq!(transport_theta1_norm(0.0, 3.0, 2.0), 3.0);
    }

    #[test]
    fn small_gain_examples() {
        assert_eq!(small_gain_threshold(10.0, 20.0, 1.0, 0.1), 2000.0);
        assert_eq!(small_gain_threshold(1.0, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(small_gain_threshold(20.0, 20.0, 1.0, 0.1), 4000.0);
        assert!(planar_linear_hurwitz(10.0, 20.0, 1.0, 0.1, 2001.0));
        assert!(!planar_linear_hurwitz(10.0, 20.0, 1.0, 0.1, 1999.0));
    }

    fn flat_traj(kind: PlantKind, len: usize) -> Trajectory {
        Trajectory {
            kind,
            n: 0,
            dt: 0.1,
            stride: 1,
            t: (0..len).map(|i| i as f64 * 0.1).collect(),
            y: vec![0.0; len],
            z: vec![-1.0; len],
            u: vec![0.0; len],
            w_norm: vec![0.0; len],
            phi: vec![0.0; len],
            v: vec![0.0; len],
            snapshots: Vec::new(),
            fingerprint: String::new(),
        }
    }

    #[test]
    fn zero_trajectory_passes_everything() {
        let plant = planar(Signal::zero());
        let tr = flat_traj(PlantKind::Planar, 50);
        let r = certify(&tr, &plant, &P, &CertifyOptions::default());
        assert!(r.passed);
        let transient = &r.checks[0];
        assert!((transient.worst_slack - 2.0 * r.z / r.mu).abs() < 1e-9);
        assert_eq!(r.dichotomy.unwrap().classification, Dichotomy::GainDeficientYetRegulated);
    }

    #[test]
    fn dichotomy_branches() {
        let cc = CaseConstants::planar(1.0);
        let mut tr = flat_traj(PlantKind::Planar, 100);
        tr.y[0] = 1.0;
        let small = InputLimits {
            d: 0.0,
            theta1: 0.5,
            theta2: 0.5,
            b_liminf: 1.0,
            delta: 0.0,
        };
        assert_eq!(check_dichotomy(&tr, &P, &cc, &small, 0.05).classification, Dichotomy::Regulated);
        tr.y.iter_mut().for_each(|y| *y = 1.0);
        assert_eq!(
            check_dichotomy(&tr, &P, &cc, &small, 0.05).classification,
            Dichotomy::Contradiction
        );
        let big = InputLimits { theta2: 20.0, ..small };
        assert_eq!(check_dichotomy(&tr, &P, &cc, &big, 0.05).classification, Dichotomy::GainDeficient);
        let dist = InputLimits { d: 3.0, ..small };
        assert_eq!(check_dichotomy(&tr, &P, &cc, &dist, 0.05).classification, Dichotomy::NotApplicable);
    }

    #[test]
    fn tails_gate_on_settling() {
        let cc = CaseConstants::planar(1.0);
        let lim = InputLimits::from_plant(&planar(Signal::zero()));
        let mut tr = flat_traj(PlantKind::Planar, 100);
        tr.y.iter_mut().for_each(|y| *y = 0.05);
        assert_eq!(check_tails(&tr, &P, &cc, &lim, &TailOptions::default()).status, CheckStatus::Fail);
        for (i, z) in tr.z.iter_mut().enumerate() {
            *z = -1.0 + 0.01 * i as f64;
        }
        assert_eq!(
            check_tails(&tr, &P, &cc, &lim, &TailOptions::default()).status,
            CheckStatus::Inconclusive
        );
        tr.y.iter_mut().for_each(|y| *y = 0.005);
        assert_eq!(check_tails(&tr, &P, &cc, &lim, &TailOptions::default()).status, CheckStatus::Pass);
    }

    #[test]
    fn monitor_flags_energy_growth() {
        let cc = CaseConstants::planar(1.0);
        let norms = InputNorms::from_plant(&Plant::Planar(PlanarPlant {
            p_bar: 1.0,
            theta1: Signal::constant(1.0),
            theta2: Signal::constant(1.0),
            b: Signal::floor_clamp(1.0, Signal::constant(1.0)),
            d: Signal::zero(),
        }));
        let mut tr = flat_traj(PlantKind::Planar, 20);
        for (i, v) in tr.v.iter_mut().enumerate() {
            *v = i as f64;
        }
        let r = monitor_dissipation(&tr, &P, &cc, &norms, &MonitorOptions::default());
        assert_eq!(r.status, CheckStatus::Fail);
        tr.v.iter_mut().for_each(|v| *v = 0.0);
        let r = monitor_dissipation(&tr, &P, &cc, &norms, &MonitorOptions::default());
        assert_eq!(r.status, CheckStatus::Pass);
    }
}
