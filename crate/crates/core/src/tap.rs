//! Closed-form detection statistics of the Kerr-cell tap and the error
//! rates it induces on the Alice-Bob, Alice-Eve and Eve-Bob channels.
//!
//! All probabilities are conditioned on which member of the pair
//! `{u at θ, v at θ + π/2}` Alice sent; Bob measures in the same pair.
//! Field names read `p<detector>_<alice><bob>`, so `p3_vu` is "Alice sent
//! v, Bob found u, the probe hit D3".

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Result};
use crate::state::{
    joint_distribution, probe_circuit, Detector, KerrPhase, PairState, PolarizationAngle,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub theta: PolarizationAngle,
    pub phi: KerrPhase,
    pub p3_uu: f64,
    pub p4_uu: f64,
    pub p3_vv: f64,
    pub p4_vv: f64,
    pub p3_uv: f64,
    pub p4_uv: f64,
    pub p3_vu: f64,
    pub p4_vu: f64,
}

impl ProbabilityTable {
    pub fn get(&self, alice: PairState, bob: PairState, detector: Detector) -> f64 {
        use Detector::*;
        use PairState::*;
        match (alice, bob, detector) {
            (U, U, D3) => self.p3_uu,
            (U, U, D4) => self.p4_uu,
            (V, V, D3) => self.p3_vv,
            (V, V, D4) => self.p4_vv,
            (U, V, D3) => self.p3_uv,
            (U, V, D4) => self.p4_uv,
            (V, U, D3) => self.p3_vu,
            (V, U, D4) => self.p4_vu,
        }
    }

    /// Total probability given Alice sent `alice`; 1 for a valid table.
    pub fn row_sum(&self, alice: PairState) -> f64 {
        PairState::ALL
            .iter()
            .flat_map(|&bob| Detector::ALL.map(|d| self.get(alice, bob, d)))
            .sum()
    }

    /// P(detector | Alice sent `alice`), marginal over Bob.
    pub fn detector_given(&self, alice: PairState, detector: Detector) -> f64 {
        PairState::ALL
            .iter()
            .map(|&bob| self.get(alice, bob, detector))
            .sum()
    }

    pub fn entries(&self) -> [f64; 8] {
        [
            self.p3_uu, self.p4_uu, self.p3_vv, self.p4_vv, self.p3_uv, self.p4_uv, self.p3_vu,
            self.p4_vu,
        ]
    }

    pub fn max_abs_diff(&self, other: &ProbabilityTable) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Detection probabilities straight from the closed forms.
pub fn closed_form_table(theta: PolarizationAngle, phi: KerrPhase) -> ProbabilityTable {
    let (s, c) = theta.radians().sin_cos();
    let (s2, c2) = (s * s, c * c);
    let cos_phi = phi.radians().cos();
    let one_minus = 1.0 - cos_phi;
    let cross = s2 * c2 * (phi.radians() / 2.0).sin().powi(2);
    ProbabilityTable {
        theta,
        phi,
        p3_uu: 0.5 * (1.0 - c2 * s2 * one_minus + c2 + cos_phi * s2),
        p4_uu: 0.5 * s2 * s2 * one_minus,
        p3_vv: 0.5 * (1.0 - c2 * s2 * one_minus + s2 + cos_phi * c2),
        p4_vv: 0.5 * c2 * c2 * one_minus,
        p3_uv: cross,
        p4_uv: cross,
        p3_vu: cross,
        p4_vu: cross,
    }
}

/// The same table obtained by running `u` and `v` through the interferometer
/// and reading out the joint Born distribution.
pub fn circuit_table(theta: PolarizationAngle, phi: KerrPhase) -> ProbabilityTable {
    let from_u = joint_distribution(&probe_circuit(theta, phi), theta)
        .expect("circuit output is at the detector stage");
    let from_v = joint_distribution(&probe_circuit(theta.orthogonal(), phi), theta)
        .expect("circuit output is at the detector stage");
    ProbabilityTable {
        theta,
        phi,
        p3_uu: from_u.u_d3,
        p4_uu: from_u.u_d4,
        p3_uv: from_u.v_d3,
        p4_uv: from_u.v_d4,
        p3_vv: from_v.v_d3,
        p4_vv: from_v.v_d4,
        p3_vu: from_v.u_d3,
        p4_vu: from_v.u_d4,
    }
}

/// Eve's guess from her detector click.
pub fn eve_decode(detector: Detector) -> PairState {
    match detector {
        Detector::D3 => PairState::U,
        Detector::D4 => PairState::V,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackErrorRates {
    /// Eve's decoding error against Alice, per intercepted pulse.
    pub q_ae: f64,
    /// Eve's decoding error against Bob's result, per intercepted sifted pulse.
    pub q_eb: f64,
    /// Bob's error per intercepted sifted pulse.
    pub q_ab_per_intercept: f64,
    pub alpha: f64,
    /// Bob's error over all sifted pulses, `alpha * q_ab_per_intercept`.
    pub q_ab: f64,
}

/// Error rates for an attack that taps a fraction `alpha` of pulses.
/// Alice's two states are taken as equally likely.
pub fn attack_error_rates(table: &ProbabilityTable, alpha: f64) -> Result<AttackErrorRates> {
    let alpha = check_unit("alpha", alpha)?;
    let t = table;
    let q_ae = (t.p3_vu + t.p3_vv + t.p4_uu + t.p4_uv) / 2.0;
    let q_ab_per_intercept = (t.p3_uv + t.p4_uv + t.p3_vu + t.p4_vu) / 2.0;

    // Eve and Bob disagree when her decode differs from his outcome.
    let mut q_eb = 0.0;
    for alice in PairState::ALL {
        for bob in PairState::ALL {
            for det in Detector::ALL {
                if eve_decode(det) != bob {
                    q_eb += t.get(alice, bob, det);
                }
            }
        }
    }
    q_eb /= 2.0;

    Ok(AttackErrorRates {
        q_ae,
        q_eb,
        q_ab_per_intercept,
        alpha,
        q_ab: alpha * q_ab_per_intercept,
    })
}
