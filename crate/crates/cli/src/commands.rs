//! The four subcommands. Each returns the process exit code: 0 when every
//! enabled check passes, 1 when one fails, 2 on a config error.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use dads_core::certify::{
    b_bound, certify, delay_error, oracle_error, planar_linear_hurwitz, small_gain_threshold, z_window_upper,
    CheckStatus, InitialData,
};
use dads_core::dads::{gain_slack, min_gain_bounds, GainMode, GainProfile};
use dads_core::numerics::{simulate_with, Controller, SimError, SimOptions, YSource};
use dads_core::{Plant, Trajectory};

use crate::config::{ConfigError, Job, RunMode};
use crate::output::{final_state, tail_summary, write_all, Report, ReportCheck};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Prints a config error the way every subcommand reports it.
pub fn config_error(path: &Path, e: &ConfigError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {}: {e}", path.display());
    EXIT_CONFIG
}

/// Runs the scenario, evaluates the checks and builds the report.
pub fn execute(job: &Job) -> Result<(Trajectory, Report), ConfigError> {
    let (tr, outcome) = match simulate_with(&job.scenario, &job.controller, &job.y_source, &job.opts) {
        Ok(tr) => (tr, "completed".to_string()),
        Err(SimError::Setup(e)) => return Err(ConfigError { line: None, col: None, msg: e.to_string() }),
        Err(e) => {
            let msg = e.to_string();
            (e.partial().cloned().expect("run error carries a partial trajectory"), msg)
        }
    };
    let plant = &job.scenario.plant;
    let mut checks = Vec::new();
    let mut constants = BTreeMap::new();
    let mut dichotomy = None;
    if outcome != "completed" {
        checks.push(ReportCheck {
            name: "simulation".into(),
            status: CheckStatus::Fail,
            pass: false,
            slack: f64::NEG_INFINITY,
            tolerance: 0.0,
            worst_t: tr.t.last().copied(),
            constants: BTreeMap::new(),
            note: Some(outcome.clone()),
        });
    }
    if let (Some(opts), Some(p)) = (&job.certify, &job.params) {
        let rep = certify(&tr, plant, p, opts);
        let init = InitialData {
            w0_norm_sq: tr.w_norm[0] * tr.w_norm[0],
            y0: tr.y[0],
        };
        let z0 = tr.z[0];
        constants.insert("mu".into(), rep.mu);
        constants.insert("Z".into(), rep.z);
        constants.insert("B".into(), b_bound(p, &rep.case_constants, &rep.norms, &init, z0));
        constants.insert(
            "z_window_upper".into(),
            z_window_upper(p, &rep.case_constants, &rep.norms, &init, z0),
        );
        constants.insert("K1".into(), rep.case_constants.k1);
        constants.insert("K2".into(), rep.case_constants.k2);
        constants.insert("R".into(), rep.case_constants.r);
        constants.insert("G".into(), rep.case_constants.g_const);
        checks.extend(rep.checks.iter().map(ReportCheck::from));
        dichotomy = rep.dichotomy;
    }
    let fin = final_state(&tr);
    if let Some(tol) = job.extra.oracle_tol {
        match oracle_error(&tr, plant) {
            Ok(e) => checks.push(ReportCheck::bound(
                "oracle",
                e,
                tol,
                Some("relative L2 error against the analytic solution".into()),
            )),
            Err(e) => checks.push(ReportCheck::bound("oracle", f64::INFINITY, tol, Some(e.to_string()))),
        }
    }
    if let (Some((tol, t_min)), YSource::Prescribed { signal }, Plant::Transport(tp)) =
        (job.extra.delay, &job.y_source, plant)
    {
        let note = format!("L2 error against y(t - x/c) for t > {t_min}");
        match delay_error(&tr, signal, tp.c, t_min) {
            Ok(e) => checks.push(ReportCheck::bound("delay", e, tol, Some(note))),
            Err(e) => checks.push(ReportCheck::bound("delay", f64::INFINITY, tol, Some(e.to_string()))),
        }
    }
    if let Some(tol) = job.extra.regulation_tol {
        let v = fin.y.abs().max(fin.w_norm);
        checks.push(ReportCheck::bound(
            "regulation",
            v,
            tol,
            Some("max(|y(T)|, ||w(T)||)".into()),
        ));
    }
    if let Some((z, tol)) = job.extra.expect_z {
        let mut c = ReportCheck::bound("settled_z", (fin.z - z).abs(), tol, Some(format!("|z(T) - ({z})|")));
        c.constants.insert("z_final".into(), fin.z);
        checks.push(c);
    }
    let z_monotone = tr.z_monotone();
    let passed = z_monotone && !checks.iter().any(ReportCheck::blocks);
    let report = Report {
        name: job.name.clone(),
        kind: plant.kind().to_string(),
        mode: match job.mode {
            RunMode::ClosedLoop => "closed-loop".into(),
            RunMode::OpenLoop => "open-loop".into(),
        },
        controller: match &job.controller {
            Controller::Dads { .. } => "dads".into(),
            Controller::Linear { k } => format!("linear(k = {k})"),
            Controller::Off => "off".into(),
        },
        fingerprint: tr.fingerprint.clone(),
        n: tr.n,
        dt: tr.dt,
        dt_auto: job.dt_auto,
        stable_dt: job.stable_dt(),
        horizon: job.opts.horizon,
        samples: tr.len(),
        outcome,
        final_state: fin,
        tail: tail_summary(&tr, 0.1),
        z_monotone,
        constants,
        checks,
        dichotomy,
        passed,
    };
    Ok((tr, report))
}

pub fn run(job: &Job, out_dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (tr, report) = match execute(job) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = write_all(out_dir, &tr, &report) {
        let _ = writeln!(err, "error: cannot write to {}: {e}", out_dir.display());
        return EXIT_FAIL;
    }
    let _ = print_summary(&report, out);
    if report.passed {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn print_summary(r: &Report, out: &mut dyn Write) -> io::Result<()> {
    writeln!(
        out,
        "{} [{} {}, n = {}, dt = {:e}{}, T = {}]: {}",
        r.name,
        r.kind,
        r.mode,
        r.n,
        r.dt,
        if r.dt_auto { " (auto)" } else { "" },
        r.horizon,
        r.outcome
    )?;
    let f = &r.final_state;
    writeln!(
        out,
        "  final: t = {}, y = {:e}, ||w|| = {:e}, z = {:.6}, u = {:e}",
        f.t, f.y, f.w_norm, f.z, f.u
    )?;
    for (k, v) in &r.constants {
        writeln!(out, "  {k:<15} {v:e}")?;
    }
    for c in &r.checks {
        writeln!(out, "  {:<12} {:<14} slack = {:e}", c.name, c.status.to_string(), c.slack)?;
    }
    if let Some(d) = &r.dichotomy {
        writeln!(out, "  dichotomy    {:?}", d.classification)?;
    }
    if !r.z_monotone {
        writeln!(out, "  z decreased along the run")?;
    }
    writeln!(out, "{}", if r.passed { "PASS" } else { "FAIL" })
}

/// Grid of `y` values for the gain table.
pub const GAIN_GRID: [f64; 7] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0];

pub fn gains(job: &Job, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (Some(p), Some(g)) = (job.params, job.gains()) else {
        let _ = writeln!(err, "error: gains needs a DADS controller section");
        return EXIT_CONFIG;
    };
    let _ = gain_table(&p, &job.phi, &g, out);
    let ok = GAIN_GRID
        .iter()
        .all(|&y| gain_slack(&g, &p, &job.phi, y).iter().all(|s| *s >= 0.0));
    if ok {
        EXIT_OK
    } else {
        let _ = writeln!(out, "chosen gains do not dominate the minima");
        EXIT_FAIL
    }
}

fn gain_table(
    p: &dads_core::DadsParams,
    phi: &dads_core::PhiSpec,
    g: &GainProfile,
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(
        out,
        "minimum gains (kappa = {}, a = {}, C = {}, phi = {:?})",
        p.kappa,
        p.a,
        p.c_decay,
        phi.coeffs()
    )?;
    writeln!(out, "{:>8} {:>16} {:>16} {:>16}", "y", "P1_min", "P2_min", "P3_min")?;
    for &y in &GAIN_GRID {
        let m = min_gain_bounds(p, phi, y);
        writeln!(out, "{y:>8} {:>16.10} {:>16.10} {:>16.10}", m.p1, m.p2, m.p3)?;
    }
    match g.mode() {
        GainMode::Constant { k } => writeln!(out, "chosen: constant ({}, {}, {})", k[0], k[1], k[2])?,
        GainMode::PhiDerived { safety_factor, .. } => writeln!(out, "chosen: phi-derived, safety factor {safety_factor}")?,
    }
    writeln!(
        out,
        "{:>8} {:>12} {:>12} {:>12} {:>14} {:>14} {:>14}",
        "y", "P1", "P2", "P3", "slack1", "slack2", "slack3"
    )?;
    for &y in &GAIN_GRID {
        let v = g.eval(y);
        let s = gain_slack(g, p, phi, y);
        writeln!(
            out,
            "{y:>8} {:>12.6} {:>12.6} {:>12.6} {:>14.6e} {:>14.6e} {:>14.6e}",
            v.p1, v.p2, v.p3, s[0], s[1], s[2]
        )?;
    }
    Ok(())
}

/// Linear feedback at `k` and DADS on the same planar scenario.
pub struct Comparison {
    pub threshold: f64,
    pub k: f64,
    pub hurwitz: bool,
    pub linear: RunSummary,
    pub dads: RunSummary,
}

pub struct RunSummary {
    pub outcome: String,
    pub y: f64,
    pub w: f64,
    pub z: f64,
    pub peak_u: f64,
}

fn summarize(r: Result<Trajectory, SimError>) -> RunSummary {
    let (tr, outcome) = match r {
        Ok(tr) => (tr, "completed".to_string()),
        Err(e) => match e.partial() {
            Some(p) => (p.clone(), e.to_string()),
            None => {
                return RunSummary {
                    outcome: e.to_string(),
                    y: f64::NAN,
                    w: f64::NAN,
                    z: f64::NAN,
                    peak_u: f64::NAN,
                }
            }
        },
    };
    let f = final_state(&tr);
    RunSummary {
        outcome,
        y: f.y,
        w: f.w_norm,
        z: f.z,
        peak_u: tr.u.iter().fold(0.0f64, |m, u| m.max(u.abs())),
    }
}

pub fn comparison(job: &Job) -> Result<Comparison, String> {
    let Plant::Planar(pp) = &job.scenario.plant else {
        return Err(format!("compare needs a planar plant, got {}", job.scenario.plant.kind()));
    };
    let (Some(params), Some(gains)) = (job.params, job.gains()) else {
        return Err("compare needs a DADS controller section".into());
    };
    let t1 = pp.theta1.sup_norm();
    let t2 = pp.theta2.sup_norm();
    let b = pp.b.inf();
    let threshold = small_gain_threshold(t1, t2, pp.p_bar, b);
    // with no interconnection any positive gain regulates
    let k = if threshold > 0.0 { 1.001 * threshold } else { 1.0 };
    let linear = Controller::Linear { k };
    let lin_opts = SimOptions {
        dt: job.opts.dt.min(dads_core::numerics::auto_dt(&job.scenario, &linear)),
        ..job.opts.clone()
    };
    let lin = simulate_with(&job.scenario, &linear, &YSource::Free, &lin_opts);
    let dads = simulate_with(
        &job.scenario,
        &Controller::Dads { params, gains },
        &YSource::Free,
        &job.opts,
    );
    Ok(Comparison {
        threshold,
        k,
        hurwitz: planar_linear_hurwitz(t1, t2, pp.p_bar, b, k),
        linear: summarize(lin),
        dads: summarize(dads),
    })
}

pub fn compare(job: &Job, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let c = match comparison(job) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let _ = (|| -> io::Result<()> {
        writeln!(out, "small-gain threshold k* = {}", c.threshold)?;
        writeln!(
            out,
            "linear gain k = {} ({})",
            c.k,
            if c.hurwitz { "Hurwitz" } else { "not Hurwitz" }
        )?;
        writeln!(
            out,
            "{:<10} {:>14} {:>14} {:>14} {:>14}  outcome",
            "controller", "y(T)", "||w(T)||", "peak |u|", "z(T)"
        )?;
        for (name, r) in [("linear", &c.linear), ("dads", &c.dads)] {
            let z = if name == "dads" { format!("{:.6}", r.z) } else { "-".into() };
            writeln!(
                out,
                "{name:<10} {:>14.6e} {:>14.6e} {:>14.6e} {z:>14}  {}",
                r.y, r.w, r.peak_u, r.outcome
            )?;
        }
        Ok(())
    })();
    EXIT_OK
}

pub fn validate(job: &Job, out: &mut dyn Write) -> i32 {
    let _ = writeln!(
        out,
        "{}: ok ({} plant, {}, n = {}, dt = {:e}{}, stable dt = {:e}, T = {}, {} steps)",
        job.name,
        job.scenario.plant.kind(),
        match job.mode {
            RunMode::ClosedLoop => "closed-loop",
            RunMode::OpenLoop => "open-loop",
        },
        job.n(),
        job.opts.dt,
        if job.dt_auto { " auto" } else { "" },
        job.stable_dt(),
        job.opts.horizon,
        job.opts.n_steps()
    );
    if let (Some(g), Some(p)) = (job.gains(), job.params) {
        let ok = GAIN_GRID
            .iter()
            .all(|&y| gain_slack(&g, &p, &job.phi, y).iter().all(|s| *s >= 0.0));
        let _ = writeln!(out, "  gains dominate the minima on the y grid: {ok}");
    }
    EXIT_OK
}
