//! Seeded Monte Carlo of BB84 with the Kerr-cell tap on the line.
//!
//! Pulses are generated in fixed-size chunks. Chunk `k` draws from
//! ChaCha8 seeded with `seed` on stream `k`, and every pulse consumes the
//! same draws in the same order, so a run is reproducible bit for bit and
//! chunks can be processed in any order or in parallel.
//!
//! Angles handed to the interferometer are measured in Eve's frame: a lab
//! polarization at angle `x` enters the Kerr cell at `x - eve_frame_angle`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::io::{self, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::state::{
    joint_distribution, probe_circuit, Detector, JointDistribution, KerrPhase, PairState,
    PolarizationAngle,
};
use crate::tap::{attack_error_rates, closed_form_table, eve_decode};

/// Default chunk size of the canonical chunk plan.
pub const DEFAULT_CHUNK_SIZE: usize = 1 << 16;

/// Stream reserved for choosing the disclosed subsample.
const DISCLOSURE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_pulses: usize,
    pub alpha: f64,
    pub phi: KerrPhase,
    pub eve_frame_angle: PolarizationAngle,
    pub seed: u64,
    /// Bit flip probability on pulses Eve leaves alone.
    pub channel_flip_rate: f64,
    /// Fraction of the sifted key disclosed to estimate the QBER.
    pub sample_fraction: f64,
    pub chunk_size: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_pulses: 100_000,
            alpha: 1.0,
            phi: KerrPhase::from_radians(PI),
            eve_frame_angle: PolarizationAngle::from_radians(PI / 8.0),
            seed: 0,
            channel_flip_rate: 0.0,
            sample_fraction: 0.5,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return Err(Error::InvalidConfig("n_pulses must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk_size must be at least 1".into()));
        }
        check_unit("alpha", self.alpha)?;
        check_unit("channel_flip_rate", self.channel_flip_rate)?;
        check_unit("sample_fraction", self.sample_fraction)?;
        if self.sample_fraction == 0.0 {
            return Err(Error::InvalidConfig(
                "sample_fraction must be positive".into(),
            ));
        }
        if !self.phi.radians().is_finite() || !self.eve_frame_angle.radians().is_finite() {
            return Err(Error::InvalidConfig("angles must be finite".into()));
        }
        Ok(())
    }

    fn n_chunks(&self) -> usize {
        self.n_pulses.div_ceil(self.chunk_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Rectilinear, Basis::Diagonal];

    /// Lab angle of the bit-0 state; bit 1 sits at this plus π/2.
    pub fn lab_angle(self) -> f64 {
        match self {
            Basis::Rectilinear => 0.0,
            Basis::Diagonal => FRAC_PI_4,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::Diagonal
        } else {
            Basis::Rectilinear
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Rectilinear => "rectilinear",
            Basis::Diagonal => "diagonal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub alice_basis: Basis,
    pub alice_bit: u8,
    pub intercepted: bool,
    pub eve_detector: Option<Detector>,
    pub eve_guess: Option<u8>,
    pub bob_basis: Basis,
    pub bob_bit: u8,
    pub sifted: bool,
}

/// How a basis pair looks from inside Eve's interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOrientation {
    /// Angle of the pair member Eve labels `u`, in her frame.
    pub theta_u: PolarizationAngle,
    /// Alice's bit carried by that member.
    pub u_bit: u8,
}

/// Labels as `u` the member of `basis` that lies closer to Eve's H axis
/// (ties go to bit 0), so that a D3 click decodes to it.
pub fn pair_orientation(basis: Basis, eve_frame: PolarizationAngle) -> PairOrientation {
    let theta0 = basis.lab_angle() - eve_frame.radians();
    let theta1 = theta0 + FRAC_PI_2;
    if theta0.cos().powi(2) + 1e-12 >= theta1.cos().powi(2) {
        PairOrientation {
            theta_u: PolarizationAngle::from_radians(theta0),
            u_bit: 0,
        }
    } else {
        PairOrientation {
            theta_u: PolarizationAngle::from_radians(theta1),
            u_bit: 1,
        }
    }
}

fn eve_frame_state(basis: Basis, bit: u8, eve_frame: PolarizationAngle) -> PolarizationAngle {
    PolarizationAngle::from_radians(
        basis.lab_angle() + f64::from(bit) * FRAC_PI_2 - eve_frame.radians(),
    )
}

/// Everything a pulse needs that depends only on the configuration:
/// joint distributions for the 2 × 2 × 2 (Alice basis, bit, Bob basis)
/// cases, computed by running the interferometer.
struct ChannelModel {
    tapped: [[[JointDistribution; 2]; 2]; 2],
    orientation: [PairOrientation; 2],
}

impl ChannelModel {
    fn new(config: &SimConfig) -> Self {
        let frame = config.eve_frame_angle;
        let tapped = Basis::ALL.map(|ab| {
            [0u8, 1].map(|bit| {
                let state = probe_circuit(eve_frame_state(ab, bit, frame), config.phi);
                Basis::ALL.map(|bb| {
                    joint_distribution(&state, eve_frame_state(bb, 0, frame))
                        .expect("circuit output is at the detector stage")
                })
            })
        });
        Self {
            tapped,
            orientation: Basis::ALL.map(|b| pair_orientation(b, frame)),
        }
    }
}

fn sample_joint(dist: &JointDistribution, x: f64) -> (PairState, Detector) {
    let mut acc = 0.0;
    let outcomes = dist.outcomes();
    for (outcome, p) in outcomes {
        acc += p;
        if x < acc {
            return outcome;
        }
    }
    // rounding left x beyond the last cumulative sum
    outcomes
        .iter()
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|(o, _)| *o)
        .unwrap_or(outcomes[3].0)
}

fn simulate_pulse(config: &SimConfig, model: &ChannelModel, rng: &mut ChaCha8Rng) -> PulseRecord {
    // Fixed draw order; every draw happens whether or not it is used.
    let alice_basis = Basis::from_bit(rng.random());
    let alice_bit = u8::from(rng.random::<bool>());
    let tap_draw: f64 = rng.random();
    let bob_basis = Basis::from_bit(rng.random());
    let outcome_draw: f64 = rng.random();
    let flip_draw: f64 = rng.random();

    let intercepted = tap_draw < config.alpha;
    let (bob_bit, eve_detector, eve_guess) = if intercepted {
        let dist = &model.tapped[alice_basis.index()][alice_bit as usize][bob_basis.index()];
        let (bob, detector) = sample_joint(dist, outcome_draw);
        let bob_bit = match bob {
            PairState::U => 0,
            PairState::V => 1,
        };
        let orient = model.orientation[alice_basis.index()];
        let guess = match eve_decode(detector) {
            PairState::U => orient.u_bit,
            PairState::V => 1 - orient.u_bit,
        };
        (bob_bit, Some(detector), Some(guess))
    } else {
        let delta = eve_frame_state(alice_basis, alice_bit, PolarizationAngle::from_radians(0.0))
            .radians()
            - bob_basis.lab_angle();
        let p_zero = delta.cos().powi(2);
        let mut bit = u8::from(outcome_draw >= p_zero);
        if flip_draw < config.channel_flip_rate {
            bit ^= 1;
        }
        (bit, None, None)
    };

    PulseRecord {
        alice_basis,
        alice_bit,
        intercepted,
        eve_detector,
        eve_guess,
        bob_basis,
        bob_bit,
        sifted: alice_basis == bob_basis,
    }
}

fn run_chunk(config: &SimConfig, model: &ChannelModel, chunk: usize) -> Vec<PulseRecord> {
    let start = chunk * config.chunk_size;
    let len = config.chunk_size.min(config.n_pulses - start);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chunk as u64);
    (0..len)
        .map(|_| simulate_pulse(config, model, &mut rng))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerBasisQber {
    pub rectilinear: Option<f64>,
    pub diagonal: Option<f64>,
}

/// Aggregate of a run. Ratios are `None` when their denominator is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub n_pulses: usize,
    pub n_intercepted: usize,
    pub n_sifted: usize,
    pub n_disclosed: usize,
    pub key_length: usize,
    pub qber_estimate: Option<f64>,
    pub qber_true: Option<f64>,
    pub eve_accuracy_on_sifted: Option<f64>,
    pub per_basis_qber: PerBasisQber,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub stats: RunStats,
    pub records: Vec<PulseRecord>,
}

/// Runs the protocol chunk by chunk on the calling thread.
pub fn run_bb84(config: &SimConfig) -> Result<RunOutput> {
    config.validate()?;
    let model = ChannelModel::new(config);
    let records: Vec<PulseRecord> = (0..config.n_chunks())
        .flat_map(|k| run_chunk(config, &model, k))
        .collect();
    Ok(summarize(config, records))
}

/// Same result as [`run_bb84`], with chunks spread over the rayon pool.
pub fn run_bb84_parallel(config: &SimConfig) -> Result<RunOutput> {
    config.validate()?;
    let model = ChannelModel::new(config);
    let chunks: Vec<Vec<PulseRecord>> = (0..config.n_chunks())
        .into_par_iter()
        .map(|k| run_chunk(config, &model, k))
        .collect();
    Ok(summarize(config, chunks.concat()))
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn summarize(config: &SimConfig, records: Vec<PulseRecord>) -> RunOutput {
    let sifted = sift(&records);

    let errors = sifted.iter().filter(|r| r.alice_bit != r.bob_bit).count();
    let basis_qber = |b: Basis| {
        let in_basis = sifted.iter().filter(|r| r.alice_basis == b);
        let (n, e) = in_basis.fold((0, 0), |(n, e), r| {
            (n + 1, e + usize::from(r.alice_bit != r.bob_bit))
        });
        ratio(e, n)
    };
    let (n_tapped, eve_right) = sifted
        .iter()
        .filter(|r| r.intercepted)
        .fold((0, 0), |(n, ok), r| {
            (n + 1, ok + usize::from(r.eve_guess == Some(r.alice_bit)))
        });

    let estimate = estimate_qber(&sifted, config.sample_fraction, config.seed).ok();

    let stats = RunStats {
        n_pulses: records.len(),
        n_intercepted: records.iter().filter(|r| r.intercepted).count(),
        n_sifted: sifted.len(),
        n_disclosed: estimate.as_ref().map_or(0, |e| e.n_disclosed),
        key_length: estimate.as_ref().map_or(0, |e| e.alice_key.len()),
        qber_estimate: estimate.map(|e| e.qber),
        qber_true: ratio(errors, sifted.len()),
        eve_accuracy_on_sifted: ratio(eve_right, n_tapped),
        per_basis_qber: PerBasisQber {
            rectilinear: basis_qber(Basis::Rectilinear),
            diagonal: basis_qber(Basis::Diagonal),
        },
        seed: config.seed,
    };
    RunOutput { stats, records }
}

/// Keeps the pulses where Alice and Bob used the same basis, in order.
pub fn sift(records: &[PulseRecord]) -> Vec<PulseRecord> {
    records
        .iter()
        .filter(|r| r.alice_basis == r.bob_basis)
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QberEstimate {
    pub qber: f64,
    pub n_disclosed: usize,
    /// Undisclosed remainder of Alice's sifted key, in original order.
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
}

/// Publicly compares a random `sample_fraction` of the sifted key (at least
/// one bit) and keeps the rest as the working key.
pub fn estimate_qber(
    sifted: &[PulseRecord],
    sample_fraction: f64,
    seed: u64,
) -> Result<QberEstimate> {
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(Error::OutOfRange {
            name: "sample_fraction",
            value: sample_fraction,
        });
    }
    if sifted.is_empty() {
        return Err(Error::InsufficientData("no sifted pulses to compare"));
    }
    let n = sifted.len();
    let k = ((n as f64 * sample_fraction).ceil() as usize).clamp(1, n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DISCLOSURE_STREAM);
    let mut disclosed = vec![false; n];
    for i in index::sample(&mut rng, n, k) {
        disclosed[i] = true;
    }

    let mut mismatches = 0;
    let mut alice_key = Vec::with_capacity(n - k);
    let mut bob_key = Vec::with_capacity(n - k);
    for (r, &shown) in sifted.iter().zip(&disclosed) {
        if shown {
            mismatches += usize::from(r.alice_bit != r.bob_bit);
        } else {
            alice_key.push(r.alice_bit);
            bob_key.push(r.bob_bit);
        }
    }
    Ok(QberEstimate {
        qber: mismatches as f64 / k as f64,
        n_disclosed: k,
        alice_key,
        bob_key,
    })
}

/// Analytic expectations for a configuration, from the closed-form tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedRates {
    pub qber: f64,
    pub eve_accuracy: f64,
    pub rectilinear_qber: f64,
    pub diagonal_qber: f64,
}

pub fn expected_rates(config: &SimConfig) -> Result<ExpectedRates> {
    config.validate()?;
    let per_basis = Basis::ALL.map(|b| {
        let orient = pair_orientation(b, config.eve_frame_angle);
        attack_error_rates(&closed_form_table(orient.theta_u, config.phi), config.alpha)
            .expect("alpha validated")
    });
    let qber = |i: usize| per_basis[i].q_ab + (1.0 - config.alpha) * config.channel_flip_rate;
    let rectilinear_qber = qber(0);
    let diagonal_qber = qber(1);
    Ok(ExpectedRates {
        qber: 0.5 * (rectilinear_qber + diagonal_qber),
        eve_accuracy: 1.0 - 0.5 * (per_basis[0].q_ae + per_basis[1].q_ae),
        rectilinear_qber,
        diagonal_qber,
    })
}

pub const RECORD_HEADER: &str =
    "alice_basis,alice_bit,intercepted,eve_detector,eve_guess,bob_basis,bob_bit,sifted";

/// Writes the record dump: a header line, then one comma-separated line per pulse.
pub fn write_records<W: Write>(mut out: W, records: &[PulseRecord]) -> io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        let detector = r.eve_detector.map_or("-".to_string(), |d| d.to_string());
        let guess = r.eve_guess.map_or("-".to_string(), |g| g.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.alice_basis,
            r.alice_bit,
            u8::from(r.intercepted),
            detector,
            guess,
            r.bob_basis,
            r.bob_bit,
            u8::from(r.sifted)
        )?;
    }
    out.flush()
}
