//! Binary-channel information measures and the intercept-fraction security threshold.
//!
//! Each pairwise channel is treated as binary symmetric with the error rate
//! computed by [`crate::tap`]. Eve only learns from the pulses she taps, so
//! her informations scale with `alpha`; Bob's channel uses the diluted
//! error rate `alpha * q_ab_per_intercept` directly.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Result};
use crate::state::{KerrPhase, PolarizationAngle};
use crate::tap::{attack_error_rates, closed_form_table, AttackErrorRates};

/// Shannon entropy of a Bernoulli(q) variable in bits, with `0·log 0 = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    let q = check_unit("q", q)?;
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(q) + term(1.0 - q))
}

/// Capacity of a binary symmetric channel that delivers the right bit with
/// probability `p_success`.
pub fn capacity(p_success: f64) -> Result<f64> {
    let p = check_unit("p_success", p_success)?;
    Ok(1.0 - binary_entropy(1.0 - p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetrics {
    pub theta: PolarizationAngle,
    pub phi: KerrPhase,
    pub alpha: f64,
    pub q_ae: f64,
    pub q_eb: f64,
    pub q_ab: f64,
    pub i_ae: f64,
    pub i_ab: f64,
    pub i_eb: f64,
    /// `i_ab <= min(i_ae, i_eb)`: no sifting procedure can make the key safe.
    #[serde(rename = "unsafe")]
    pub is_unsafe: bool,
}

impl ChannelMetrics {
    pub fn from_rates(
        theta: PolarizationAngle,
        phi: KerrPhase,
        rates: &AttackErrorRates,
    ) -> Result<Self> {
        let alpha = rates.alpha;
        let i_ae = alpha * capacity(1.0 - rates.q_ae)?;
        let i_eb = alpha * capacity(1.0 - rates.q_eb)?;
        let i_ab = capacity(1.0 - rates.q_ab)?;
        Ok(Self {
            theta,
            phi,
            alpha,
            q_ae: rates.q_ae,
            q_eb: rates.q_eb,
            q_ab: rates.q_ab,
            i_ae,
            i_ab,
            i_eb,
            is_unsafe: i_ab <= i_ae.min(i_eb),
        })
    }

    /// `i_ab - min(i_ae, i_eb)`; non-positive exactly when unsafe.
    pub fn margin(&self) -> f64 {
        self.i_ab - self.i_ae.min(self.i_eb)
    }
}

pub fn channel_metrics(
    theta: PolarizationAngle,
    phi: KerrPhase,
    alpha: f64,
) -> Result<ChannelMetrics> {
    let rates = attack_error_rates(&closed_form_table(theta, phi), alpha)?;
    ChannelMetrics::from_rates(theta, phi, &rates)
}

/// Absolute tolerance on the threshold bisection.
pub const THRESHOLD_TOLERANCE: f64 = 1e-9;

const SCAN_STEPS: usize = 100;

/// Smallest tapped fraction at which the channel becomes unsafe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub alpha: f64,
    pub metrics: ChannelMetrics,
}

/// Scans `alpha` on a 0.01 grid for the first unsafe point, then bisects the
/// bracketing interval down to [`THRESHOLD_TOLERANCE`]. `None` when the
/// channel stays safe for every `alpha` in `[0, 1]`.
pub fn threshold_alpha(theta: PolarizationAngle, phi: KerrPhase) -> Option<Threshold> {
    let rates =
        attack_error_rates(&closed_form_table(theta, phi), 1.0).expect("alpha = 1 is in range");
    let metrics_at = |alpha: f64| {
        let scaled = AttackErrorRates {
            alpha,
            q_ab: alpha * rates.q_ab_per_intercept,
            ..rates
        };
        ChannelMetrics::from_rates(theta, phi, &scaled).expect("rates stay in [0, 1]")
    };

    let grid = |k: usize| k as f64 / SCAN_STEPS as f64;
    let first = (0..=SCAN_STEPS).find(|&k| metrics_at(grid(k)).is_unsafe)?;
    if first == 0 {
        return Some(Threshold {
            alpha: 0.0,
            metrics: metrics_at(0.0),
        });
    }

    let (mut lo, mut hi) = (grid(first - 1), grid(first));
    while hi - lo > THRESHOLD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if metrics_at(mid).is_unsafe {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(Threshold {
        alpha: hi,
        metrics: metrics_at(hi),
    })
}
