use dads_core::certify::norm_equiv_check;
use dads_core::dads::{
    control, g_excess, make_gain_profile, update_rate, verify_gains, DadsParams, GainProfile, PhiSpec,
};
use dads_core::numerics::{simulate, SimOptions};
use dads_core::plants::{bound_check, Coupling, PlantKind};
use dads_core::presets::{heat_unstable, planar_example_scenario, transport_delay, wave_unstable};
use dads_core::{PlantState, Profile, Signal};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const P: DadsParams = DadsParams::PLANAR_EXAMPLE;

fn params() -> impl Strategy<Value = DadsParams> {
    (1e-6f64..1.0, 0.1f64..1e3, 0.2f64..5.0, 0.01f64..1.0, 0.1f64..200.0).prop_map(|(eps, gamma, kappa, frac, c)| {
        DadsParams {
            epsilon: eps,
            gamma,
            kappa,
            a: 2.0 * kappa * frac * 0.999,
            c_decay: c,
        }
    })
}

fn signal() -> impl Strategy<Value = Signal> {
    let leaf = prop_oneof![
        (-10.0f64..10.0).prop_map(Signal::constant),
        (-5.0f64..5.0, 0.0f64..10.0, -3.0f64..3.0).prop_map(|(a, w, ph)| Signal::sin(a, w, ph)),
        (-5.0f64..5.0, 0.0f64..3.0).prop_map(|(a, r)| Signal::exp_decay(a, r).unwrap()),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(Signal::Sum),
            prop::collection::vec(inner.clone(), 1..3).prop_map(Signal::Product),
            (-2.0f64..2.0, inner).prop_map(|(m, s)| Signal::floor_clamp(m, s)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn deadzone_is_exact(y in -1.0f64..1.0, z in -20.0f64..20.0) {
        let rate = update_rate(y, z, &P);
        prop_assert!(rate >= 0.0);
        prop_assert_eq!(rate == 0.0, y * y <= 2.0 * P.epsilon);
    }

    #[test]
    fn g_excess_is_monotone(s in -50.0f64..50.0, ds in 0.0f64..10.0, l in -20.0f64..5.0, dl in 0.0f64..5.0) {
        prop_assert!(g_excess(s + ds, l, &P) >= g_excess(s, l, &P));
        prop_assert!(g_excess(s, l + dl, &P) <= g_excess(s, l, &P));
        prop_assert!(g_excess(s, l, &P) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn control_is_odd(y in -5.0f64..5.0, z in -15.0f64..3.0) {
        let g = GainProfile::planar_example();
        prop_assert_eq!(control(-y, z, &P, &g), -control(y, z, &P, &g));
        prop_assert!(control(y, z, &P, &g) * y <= 0.0);
    }

    #[test]
    fn derived_gains_dominate(p in params(), c1 in 0.0f64..1.0, c2 in 0.0f64..1.0, safety in 1.0f64..3.0, y in -100.0f64..100.0) {
        let phi = PhiSpec::new(&[c1, c2]).unwrap();
        let g = make_gain_profile(&p, &phi, safety).unwrap();
        prop_assert!(verify_gains(&g, &p, &phi, &[y, 0.0, -y]).is_ok());
    }

    #[test]
    fn signal_bounded_by_sup_norm(s in signal(), t in 0.0f64..1e3) {
        let v = s.eval(t);
        prop_assert!(v.abs() <= s.sup_norm() * (1.0 + 1e-12) + 1e-12);
        let r = s.range();
        prop_assert!(v >= r.lo - 1e-9 && v <= r.hi + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn z_is_monotone_along_runs(w0 in -2.0f64..2.0, y0 in -0.5f64..0.5, z0 in -12.0f64..-2.0, amp in 0.0f64..5.0) {
        let mut s = planar_example_scenario(Signal::sin(amp, 1.0, 0.0));
        s.initial = PlantState::Planar { w: w0, y: y0 };
        s.z0 = z0;
        let tr = simulate(&s, &P, &GainProfile::planar_example(), &SimOptions::new(2.0, 1e-4)).unwrap();
        prop_assert!(tr.z_monotone());
        prop_assert!(tr.z[0] == z0);
    }
}

#[test]
fn builtin_couplings_satisfy_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let phi = PhiSpec::new(&[0.5, 0.25]).unwrap();
    let cases = [
        (Coupling::Zero, PlantKind::Heat),
        (Coupling::HeatUnstable { p_bar: 1.0 }, PlantKind::Heat),
        (Coupling::HeatUnstable { p_bar: 0.1 }, PlantKind::Heat),
        (Coupling::TransportUnstable { c: 1.0, theta_product: 4.0 }, PlantKind::Transport),
        (Coupling::TransportUnstable { c: 0.5, theta_product: 3.0 }, PlantKind::Transport),
        (Coupling::TransportDelay, PlantKind::Transport),
        (Coupling::WaveUnstable, PlantKind::Wave),
        (
            Coupling::BoundedIntegral {
                kernel: Profile::Sine { mode: 2.0, amp: 1.0 },
                gain: Profile::Poly(vec![0.0, 1.0, -1.0]),
                boundary_gain: -1.0,
                phi_term: true,
            },
            PlantKind::Heat,
        ),
    ];
    for (c, kind) in &cases {
        assert_eq!(bound_check(c, *kind, &phi, 10_000, 32, &mut rng), Ok(()), "{c:?}");
    }
}

#[test]
fn norm_equivalence_holds_per_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let plants = [
        heat_unstable(1.0, 3.0),
        heat_unstable(0.2, 1.0),
        transport_delay(1.0),
        transport_delay(2.5),
        wave_unstable(1.0, 2.0),
        wave_unstable(0.3, 2.0),
    ];
    for p in &plants {
        let margin = norm_equiv_check(p, 1000, 64, &mut rng).unwrap();
        assert!(margin.is_finite(), "{:?}", p.kind());
    }
}
