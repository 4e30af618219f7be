//! Ready-made plants: the planar example and the exponentially unstable
//! open-loop instances of the heat, transport and wave interconnections.

use std::f64::consts::PI;

use crate::dads::PhiSpec;
use crate::numerics::Scenario;
use crate::plants::{
    BoundaryTag, Coupling, Field, HeatPlant, PlanarPlant, Plant, PlantState, TransportPlant, WavePlant,
};
use crate::signals::{Signal, SpaceTimeSignal};

fn unit_b() -> Signal {
    Signal::floor_clamp(1.0, Signal::constant(1.0))
}

/// `θ₁ = 10`, `θ₂ = 20`, `p̄ = 1`, `b = 0.1` with disturbance `d`.
pub fn planar_example(d: Signal) -> Plant {
    Plant::Planar(PlanarPlant {
        p_bar: 1.0,
        theta1: Signal::constant(10.0),
        theta2: Signal::constant(20.0),
        b: Signal::floor_clamp(0.1, Signal::constant(0.1)),
        d,
    })
}

/// The planar example from `(w, y, z) = (-0.5, 0.1, -10)`.
pub fn planar_example_scenario(d: Signal) -> Scenario {
    Scenario {
        plant: planar_example(d),
        initial: PlantState::Planar { w: -0.5, y: 0.1 },
        z0: -10.0,
    }
}

/// Heat plant with `K = (x² - x - 2p̄)/(1 + 2p̄) y`, `L = -∫w` and
/// `θ₁θ₂ = 6(1 + 2p̄)`, growing like `e^t`.
pub fn heat_unstable(p_bar: f64, theta1: f64) -> Plant {
    Plant::Heat(HeatPlant {
        p_bar,
        coupling: Coupling::HeatUnstable { p_bar },
        phi: PhiSpec::ZERO,
        theta1: SpaceTimeSignal::uniform(Signal::constant(theta1)),
        delta: SpaceTimeSignal::zero(),
        theta2: Signal::constant(6.0 * (1.0 + 2.0 * p_bar) / theta1),
        b: unit_b(),
        d: Signal::zero(),
    })
}

/// Transport plant with `K₁ = 2(x + c)/(θ₁,₁θ₂) y`, `K₂ = 0`, `L = ∫w`.
pub fn transport_unstable(c: f64, theta11: f64, theta2: f64) -> Plant {
    Plant::Transport(TransportPlant {
        c,
        coupling: Coupling::TransportUnstable {
            c,
            theta_product: theta11 * theta2,
        },
        phi: PhiSpec::ZERO,
        theta11: SpaceTimeSignal::uniform(Signal::constant(theta11)),
        theta12: Signal::zero(),
        delta: SpaceTimeSignal::zero(),
        theta2: Signal::constant(theta2),
        b: unit_b(),
        d: Signal::zero(),
    })
}

/// Transport plant acting as a pure delay line: `w(t, x) = y(t - x/c)`.
pub fn transport_delay(c: f64) -> Plant {
    Plant::Transport(TransportPlant {
        c,
        coupling: Coupling::TransportDelay,
        phi: PhiSpec::ZERO,
        theta11: SpaceTimeSignal::zero(),
        theta12: Signal::constant(1.0),
        delta: SpaceTimeSignal::zero(),
        theta2: Signal::zero(),
        b: unit_b(),
        d: Signal::zero(),
    })
}

/// Delay-line state whose field already holds the history `y(-x/c)`.
pub fn delay_history(n: usize, c: f64, y: &Signal) -> PlantState {
    PlantState::Transport {
        w: Field::from_fn(n, BoundaryTag::InflowLeft, |x| y.eval(-x / c)),
        y: y.eval(0.0),
    }
}

/// Wave plant (`c = 1`) with `K = sin(πx) y`, `L = ∫ sin(πx) v` and
/// `θ₁θ₂ = 2(1 + σ + π²)`.
pub fn wave_unstable(sigma: f64, theta1: f64) -> Plant {
    Plant::Wave(WavePlant {
        c: 1.0,
        sigma,
        coupling: Coupling::WaveUnstable,
        phi: PhiSpec::ZERO,
        theta1: SpaceTimeSignal::uniform(Signal::constant(theta1)),
        delta: SpaceTimeSignal::zero(),
        theta2: Signal::constant(2.0 * (1.0 + sigma + PI * PI) / theta1),
        b: unit_b(),
        d: Signal::zero(),
    })
}
