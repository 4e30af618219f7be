use std::time::Instant;

use dads_core::certify::{certify, planar_linear_hurwitz, small_gain_threshold, CertifyOptions, CheckStatus};
use dads_core::dads::{DadsParams, GainProfile};
use dads_core::numerics::{simulate, simulate_with, Controller, SimError, SimOptions, YSource};
use dads_core::presets::planar_example_scenario;
use dads_core::Signal;

const P: DadsParams = DadsParams::PLANAR_EXAMPLE;

fn run(d: Signal, horizon: f64, dt: f64) -> dads_core::Trajectory {
    simulate(
        &planar_example_scenario(d),
        &P,
        &GainProfile::planar_example(),
        &SimOptions::new(horizon, dt).with_stride(4),
    )
    .unwrap()
}

fn last(v: &[f64]) -> f64 {
    *v.last().unwrap()
}

#[test]
fn disturbance_free_run_regulates_and_settles() {
    let t0 = Instant::now();
    let tr = run(Signal::zero(), 20.0, 2.5e-4);
    assert!(t0.elapsed().as_secs_f64() < 5.0);
    assert!(last(&tr.y).abs() <= 0.01);
    assert!(last(&tr.w_norm) <= 0.01);
    assert!((last(&tr.z) + 1.326).abs() <= 0.05, "z(T) = {}", last(&tr.z));
    // z stops moving once y enters the deadzone
    let i = tr.tail_start(0.2);
    assert!((last(&tr.z) - tr.z[i]).abs() < 1e-3);
    assert!(tr.z_monotone());
}

#[test]
fn persistent_disturbance_run_stays_in_deadzone_band() {
    let tr = run(Signal::sin(3.0, 1.0, 0.0), 20.0, 2.5e-4);
    assert!(last(&tr.y).abs() <= 0.01);
    assert!(last(&tr.w_norm) <= 0.01);
    assert!((last(&tr.z) + 1.26).abs() <= 0.05, "z(T) = {}", last(&tr.z));
    assert!(tr.z_monotone());
}

#[test]
fn long_disturbed_run_certifies() {
    let d = Signal::sin(3.0, 1.0, 0.0);
    let sc = planar_example_scenario(d);
    let tr = run(sc.plant.output_signals().d.clone(), 200.0, 2.5e-4);
    let rep = certify(&tr, &sc.plant, &P, &CertifyOptions::default());
    for c in &rep.checks {
        assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
        assert!(c.worst_slack >= 0.0, "{c:?}");
    }
}

#[test]
fn time_step_convergence_is_fourth_order() {
    // before y reaches the deadzone (t ~ 5e-3) the vector field is smooth
    let finals = |dt: f64| {
        let tr = simulate(&planar_example_scenario(Signal::zero()), &P, &GainProfile::planar_example(), &SimOptions::new(4e-3, dt)).unwrap();
        [last(&tr.y), last(&tr.w_norm), last(&tr.z)]
    };
    let a = finals(1e-4);
    let b = finals(5e-5);
    let c = finals(2.5e-5);
    let d1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    let d2: f64 = b.iter().zip(&c).map(|(x, y)| (x - y).abs()).sum();
    let ratio = d1 / d2;
    assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}, diffs {d1:e} {d2:e}");
}

#[test]
fn small_gain_baseline() {
    let k_star = small_gain_threshold(10.0, 20.0, 1.0, 0.1);
    assert_eq!(k_star, 2000.0);
    assert!(planar_linear_hurwitz(10.0, 20.0, 1.0, 0.1, 2001.0));
    assert!(!planar_linear_hurwitz(10.0, 20.0, 1.0, 0.1, 1999.0));

    let sc = planar_example_scenario(Signal::zero());
    let opts = SimOptions::new(20.0, 2e-5).with_stride(100);
    let stable = simulate_with(&sc, &Controller::Linear { k: 2001.0 }, &YSource::Free, &opts).unwrap();
    // slowest eigenvalue of the k = 2001 loop is about -5e-4
    let e0 = stable.w_norm[0].hypot(stable.y[0]);
    let e1 = last(&stable.w_norm).hypot(last(&stable.y));
    assert!(e1 < e0);
    match simulate_with(&sc, &Controller::Linear { k: 1999.0 }, &YSource::Free, &opts) {
        Ok(tr) => assert!(last(&tr.w_norm).hypot(last(&tr.y)) > e1),
        Err(SimError::BlowUp { .. }) => {}
        Err(e) => panic!("{e}"),
    }
}
