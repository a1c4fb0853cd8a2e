//! Translucent eavesdropping on a BB84 link with a Kerr-cell Mach-Zehnder probe.
//!
//! * [`state`]: state-vector model of the qubit and probe through the interferometer
//! * [`tap`]: closed-form detection probabilities and attack error rates
//! * [`info`]: binary-channel informations, the security criterion and its threshold
//! * [`protocol`]: seeded Monte Carlo of the full protocol with sifting and QBER estimation
//! * [`report`], [`verify`]: output rows and self-checks used by the `kerrtap` binary

pub mod error;
pub mod info;
pub mod protocol;
pub mod report;
pub mod state;
pub mod tap;
pub mod verify;

pub use error::{Error, Result};
pub use info::{
    binary_entropy, capacity, channel_metrics, threshold_alpha, ChannelMetrics, Threshold,
};
pub use protocol::{
    estimate_qber, run_bb84, run_bb84_parallel, sift, PulseRecord, RunStats, SimConfig,
};
pub use state::{Detector, KerrPhase, PairState, PolarizationAngle, PureState};
pub use tap::{
    attack_error_rates, circuit_table, closed_form_table, eve_decode, AttackErrorRates,
    ProbabilityTable,
};
