//! Deadzone-adapted disturbance suppression (DADS): an adaptive output
//! feedback with a single dynamic gain, simulated in closed loop with a
//! planar ODE plant and with heat, transport and damped-wave
//! interconnections, plus certification of the closed-loop estimates
//! along computed trajectories.
//!
//! ```
//! use dads_core::dads::{control, update_rate, DadsParams, GainProfile};
//!
//! let p = DadsParams::PLANAR_EXAMPLE;
//! let g = GainProfile::planar_example();
//! assert!(control(0.1, -10.0, &p, &g) < 0.0);
//! assert_eq!(update_rate(0.001, 0.0, &p), 0.0);
//! ```

pub mod certify;
pub mod dads;
pub mod numerics;
pub mod plants;
pub mod presets;
pub mod signals;

pub use certify::{certify, CaseConstants, CertReport, CheckRecord, CheckStatus, CertifyOptions};
pub use dads::{DadsParams, GainProfile, PhiSpec};
pub use numerics::{simulate, simulate_open_loop, simulate_with, Controller, Scenario, SimOptions, Trajectory, YSource};
pub use plants::{Plant, PlantKind, PlantState};
pub use signals::{Profile, Signal, SpaceTimeSignal};
