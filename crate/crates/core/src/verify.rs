//! Self-checks run by `kerrtap verify`: closed forms against the simulated
//! interferometer on a grid, plus the reference operating points.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::info::{capacity, channel_metrics, threshold_alpha};
use crate::state::{
    joint_distribution, probe_arms, probe_circuit, BasisLabel, KerrPhase, PairState, Polarization,
    PolarizationAngle, ProbeMode, TOLERANCE,
};
use crate::tap::{attack_error_rates, circuit_table, closed_form_table};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

fn angle(x: f64) -> PolarizationAngle {
    PolarizationAngle::from_radians(x)
}

fn phase(x: f64) -> KerrPhase {
    KerrPhase::from_radians(x)
}

struct GridSummary {
    max_diff: f64,
    max_row_err: f64,
    max_cross_spread: f64,
}

/// θ over [0, π/2] and φ over [0, 2π], `n` points each.
fn grid_summary(n: usize) -> GridSummary {
    let n = n.max(2);
    let step = |k: usize, span: f64| span * k as f64 / (n - 1) as f64;
    let per_point: Vec<(f64, f64, f64)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (theta, phi) = (angle(step(idx / n, FRAC_PI_2)), phase(step(idx % n, TAU)));
            let closed = closed_form_table(theta, phi);
            let circuit = circuit_table(theta, phi);
            let row_err = [&closed, &circuit]
                .iter()
                .flat_map(|t| PairState::ALL.map(|a| (t.row_sum(a) - 1.0).abs()))
                .fold(0.0, f64::max);
            let cross = [circuit.p3_uv, circuit.p4_uv, circuit.p3_vu, circuit.p4_vu];
            let spread = cross.iter().cloned().fold(f64::MIN, f64::max)
                - cross.iter().cloned().fold(f64::MAX, f64::min);
            (closed.max_abs_diff(&circuit), row_err, spread)
        })
        .collect();
    per_point.iter().fold(
        GridSummary {
            max_diff: 0.0,
            max_row_err: 0.0,
            max_cross_spread: 0.0,
        },
        |acc, &(d, r, s)| GridSummary {
            max_diff: acc.max_diff.max(d),
            max_row_err: acc.max_row_err.max(r),
            max_cross_spread: acc.max_cross_spread.max(s),
        },
    )
}

/// Projections of the post-Kerr state for a `|+⟩` input onto `|±⟩|p_k⟩`,
/// compared with `[|+⟩((1+e^{iφ})|p1⟩ + 2i|p2⟩) + |−⟩(1−e^{iφ})|p1⟩] / (2√2)`.
fn plus_input_error(phi: f64) -> f64 {
    let s = probe_arms(angle(FRAC_PI_4), phase(phi));
    let amp = |p, m| s.amplitude(BasisLabel::new(p, Some(m))).unwrap();
    let project =
        |sign: f64, m| (amp(Polarization::H, m) + sign * amp(Polarization::V, m)) * FRAC_1_SQRT_2;
    let e = Complex64::from_polar(1.0, phi);
    let k = 1.0 / (2.0 * 2f64.sqrt());
    let one = Complex64::new(1.0, 0.0);
    let pairs = [
        (project(1.0, ProbeMode::Arm1), (one + e) * k),
        (project(1.0, ProbeMode::Arm2), Complex64::new(0.0, 2.0) * k),
        (project(-1.0, ProbeMode::Arm1), (one - e) * k),
        (project(-1.0, ProbeMode::Arm2), Complex64::new(0.0, 0.0)),
    ];
    pairs
        .iter()
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

pub fn run_checks(grid: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let g = grid_summary(grid);
    out.push(CheckResult::new(
        "closed-form vs circuit",
        g.max_diff <= TOLERANCE,
        format!("{grid}x{grid} grid, max |diff| = {:.3e}", g.max_diff),
    ));
    out.push(CheckResult::new(
        "row sums",
        g.max_row_err <= TOLERANCE,
        format!("max |row sum - 1| = {:.3e}", g.max_row_err),
    ));
    out.push(CheckResult::new(
        "equal cross probabilities",
        g.max_cross_spread <= TOLERANCE,
        format!("max spread = {:.3e}", g.max_cross_spread),
    ));

    let c = capacity(0.75).expect("in range");
    out.push(CheckResult::new(
        "capacity(3/4)",
        (c - 0.189).abs() <= 5e-4,
        format!("{c:.6} vs 0.189"),
    ));

    let h = joint_distribution(&probe_circuit(angle(0.0), phase(PI)), angle(0.0))
        .expect("detector stage");
    let v = joint_distribution(&probe_circuit(angle(FRAC_PI_2), phase(PI)), angle(0.0))
        .expect("detector stage");
    let r0 =
        attack_error_rates(&closed_form_table(angle(0.0), phase(PI)), 1.0).expect("alpha in range");
    let ok = (h.u_d3 - 1.0).abs() <= TOLERANCE
        && (v.v_d4 - 1.0).abs() <= TOLERANCE
        && r0.q_ae.abs() <= TOLERANCE
        && r0.q_ab_per_intercept.abs() <= TOLERANCE;
    out.push(CheckResult::new(
        "H/V inputs identified",
        ok,
        format!(
            "P(H,D3) = {}, P(V,D4) = {}, q_ae = {:.1e}",
            h.u_d3, v.v_d4, r0.q_ae
        ),
    ));

    let t = closed_form_table(angle(FRAC_PI_4), phase(PI));
    let (d3, d4) = (t.p3_uu + t.p3_uv, t.p4_uu + t.p4_uv);
    let bob_err = t.p3_uv + t.p4_uv;
    let ok = [d3, d4, bob_err]
        .iter()
        .all(|x| (x - 0.5).abs() <= TOLERANCE);
    out.push(CheckResult::new(
        "diagonal input ambiguous",
        ok,
        format!("P(D3) = {d3}, P(D4) = {d4}, Bob error = {bob_err}"),
    ));

    let worst = (0..=16)
        .map(|k| plus_input_error(TAU * k as f64 / 16.0))
        .fold(0.0, f64::max);
    out.push(CheckResult::new(
        "|+> input entangled form",
        worst <= TOLERANCE,
        format!("max amplitude error = {worst:.3e}"),
    ));

    let m = channel_metrics(angle(FRAC_PI_8), phase(PI), 1.0).expect("alpha in range");
    out.push(CheckResult::new(
        "I_AE at bisecting frame",
        (m.i_ae - 0.3995).abs() <= 0.005 && (m.q_ab - 0.25).abs() <= TOLERANCE,
        format!("i_ae = {:.6}, q_ab = {}", m.i_ae, m.q_ab),
    ));

    match threshold_alpha(angle(FRAC_PI_8), phase(PI)) {
        Some(th) => out.push(CheckResult::new(
            "security threshold",
            (th.alpha - 0.755).abs() <= 1e-3 && (th.metrics.q_ab - 0.1888).abs() <= 1e-3,
            format!("alpha* = {:.6}, q_ab = {:.6}", th.alpha, th.metrics.q_ab),
        )),
        None => out.push(CheckResult::new(
            "security threshold",
            false,
            "no threshold found".into(),
        )),
    }

    out
}
