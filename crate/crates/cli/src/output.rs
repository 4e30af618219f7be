//! Files written by `run`: the sampled trajectory as CSV, one SVG line
//! plot per channel and the JSON report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use dads_core::certify::{CheckRecord, CheckStatus, DichotomyRecord};
use dads_core::Trajectory;

pub const CSV_HEADER: &str = "t,y,z,u,w_norm,Phi,V";

/// `t,y,z,u,w_norm,Phi,V` rows in shortest round-trip form.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut s = String::with_capacity(64 * (tr.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for i in 0..tr.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            tr.t[i], tr.y[i], tr.z[i], tr.u[i], tr.w_norm[i], tr.phi[i], tr.v[i]
        );
    }
    s
}

const W: f64 = 720.0;
const H: f64 = 400.0;
const ML: f64 = 80.0;
const MR: f64 = 20.0;
const MT: f64 = 36.0;
const MB: f64 = 50.0;
const MAX_POINTS: usize = 4000;

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// A polyline of `ys` against `ts` with a frame, five ticks per axis and
/// labels. Long series are thinned to every k-th sample.
pub fn line_plot(title: &str, ylabel: &str, ts: &[f64], ys: &[f64]) -> String {
    let pts: Vec<(f64, f64)> = {
        let step = ts.len().div_ceil(MAX_POINTS).max(1);
        let mut v: Vec<(f64, f64)> = ts.iter().zip(ys).step_by(step).map(|(&t, &y)| (t, y)).collect();
        if let (Some(&t), Some(&y)) = (ts.last(), ys.last()) {
            if v.last() != Some(&(t, y)) {
                v.push((t, y));
            }
        }
        v.retain(|p| p.0.is_finite() && p.1.is_finite());
        v
    };
    let (mut t0, mut t1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(t, y) in &pts {
        t0 = t0.min(t);
        t1 = t1.max(t);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (t0, t1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if t1 <= t0 {
        t1 = t0 + 1.0;
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
        y0 -= pad;
        y1 += pad;
    }
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let sx = |t: f64| ML + (t - t0) / (t1 - t0) * pw;
    let sy = |y: f64| MT + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let t = t0 + f * (t1 - t0);
        let y = y0 + f * (y1 - y0);
        let (x, yy) = (sx(t), sy(y));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ccc"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            MT,
            MT + ph,
            MT + ph + 16.0,
            tick(t)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{ML}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#ccc"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            ML + pw,
            ML - 6.0,
            yy + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        ML + pw / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{ylabel}</text>"#,
        MT + ph / 2.0,
        MT + ph / 2.0
    );
    s.push_str(r##"<polyline fill="none" stroke="#1f5fbf" stroke-width="1.5" points=""##);
    for (i, &(t, y)) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", sx(t), sy(y));
    }
    s.push_str("\"/>\n</svg>\n");
    s
}

/// One check as it appears in `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportCheck {
    pub name: String,
    pub status: CheckStatus,
    pub pass: bool,
    pub slack: f64,
    pub tolerance: f64,
    pub worst_t: Option<f64>,
    pub constants: BTreeMap<String, f64>,
    pub note: Option<String>,
}

impl From<&CheckRecord> for ReportCheck {
    fn from(c: &CheckRecord) -> Self {
        ReportCheck {
            name: c.name.clone(),
            status: c.status,
            pass: c.status == CheckStatus::Pass,
            slack: c.worst_slack,
            tolerance: c.tolerance,
            worst_t: c.worst_t,
            constants: c.constants.clone(),
            note: c.note.clone(),
        }
    }
}

impl ReportCheck {
    /// `value <= limit`, slack `limit - value`.
    pub fn bound(name: &str, value: f64, limit: f64, note: Option<String>) -> Self {
        let slack = limit - value;
        let ok = slack >= 0.0;
        ReportCheck {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            pass: ok,
            slack,
            tolerance: limit,
            worst_t: None,
            constants: BTreeMap::from([("value".to_string(), value)]),
            note,
        }
    }

    /// Whether the check stops a run from exiting 0.
    pub fn blocks(&self) -> bool {
        matches!(self.status, CheckStatus::Fail | CheckStatus::Inconclusive)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalState {
    pub t: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
    pub w_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailSummary {
    pub from_t: f64,
    pub y_abs_max: f64,
    pub w_norm_max: f64,
    pub z_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: String,
    pub mode: String,
    pub controller: String,
    pub fingerprint: String,
    pub n: usize,
    pub dt: f64,
    pub dt_auto: bool,
    pub stable_dt: f64,
    pub horizon: f64,
    pub samples: usize,
    /// `completed`, or the reason the run stopped early.
    pub outcome: String,
    pub final_state: FinalState,
    pub tail: TailSummary,
    pub z_monotone: bool,
    /// `μ`, `Z`, `B`, the `z` window bound and the case constants.
    pub constants: BTreeMap<String, f64>,
    pub checks: Vec<ReportCheck>,
    pub dichotomy: Option<DichotomyRecord>,
    pub passed: bool,
}

pub fn final_state(tr: &Trajectory) -> FinalState {
    let i = tr.len().saturating_sub(1);
    let at = |v: &[f64]| v.get(i).copied().unwrap_or(f64::NAN);
    FinalState {
        t: at(&tr.t),
        y: at(&tr.y),
        z: at(&tr.z),
        u: at(&tr.u),
        w_norm: at(&tr.w_norm),
    }
}

pub fn tail_summary(tr: &Trajectory, frac: f64) -> TailSummary {
    let i = tr.tail_start(frac);
    let fold = |v: &[f64]| v[i..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    TailSummary {
        from_t: tr.t.get(i).copied().unwrap_or(0.0),
        y_abs_max: fold(&tr.y),
        w_norm_max: fold(&tr.w_norm),
        z_drift: tr.z.last().copied().unwrap_or(0.0) - tr.z.get(i).copied().unwrap_or(0.0),
    }
}

/// Writes `trajectory.csv`, the four plots and `report.json` into `dir`.
pub fn write_all(dir: &Path, tr: &Trajectory, report: &Report) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trajectory.csv"), trajectory_csv(tr))?;
    let plots: [(&str, &str, &[f64]); 4] = [
        ("y", "y(t)", &tr.y),
        ("w_norm", "‖w(t)‖", &tr.w_norm),
        ("z", "z(t)", &tr.z),
        ("u", "u(t)", &tr.u),
    ];
    for (file, label, data) in plots {
        let title = format!("{}: {label}", report.name);
        std::fs::write(dir.join(format!("{file}.svg")), line_plot(&title, label, &tr.t, data))?;
    }
    let json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    std::fs::write(dir.join("report.json"), json + "\n")
}
