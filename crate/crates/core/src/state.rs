//! State-vector model of the transmitted polarization qubit and Eve's probe photon.
//!
//! The probe is a single vertically polarized photon, so only its spatial
//! mode is tracked. The circuit runs through four stages:
//!
//! ```text
//! Qubit ──attach_probe──▶ Input ──apply_bs1──▶ Arms ──apply_kerr──▶ Arms ──apply_bs2──▶ Detectors
//! ```
//!
//! At every stage the Hilbert space is `{H, V} ⊗ (modes of the stage)`, at
//! most four dimensional, so amplitudes are kept in a dense fixed array.
//!
//! Beam splitter conventions:
//!
//! * first splitter: `IN → (ARM1 + i·ARM2)/√2`
//! * second splitter: `ARM1 → (i·D3 + D4)/√2`, `ARM2 → (D3 + i·D4)/√2`
//!
//! With these, an undisturbed probe (`φ = 0`, or an `H` qubit) always leaves
//! through D3, and a `V` qubit with `φ = π` sends it to D4.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for normalization and probability sums throughout the crate.
pub const TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbeMode {
    In,
    Arm1,
    Arm2,
    D3,
    D4,
}

/// Output port of the second beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    D3,
    D4,
}

impl Detector {
    pub const ALL: [Detector; 2] = [Detector::D3, Detector::D4];

    pub fn mode(self) -> ProbeMode {
        match self {
            Detector::D3 => ProbeMode::D3,
            Detector::D4 => ProbeMode::D4,
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::D3 => "D3",
            Detector::D4 => "D4",
        })
    }
}

/// Member of an orthogonal polarization pair: `u` at angle θ, `v` at θ + π/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairState {
    U,
    V,
}

impl PairState {
    pub const ALL: [PairState; 2] = [PairState::U, PairState::V];
}

/// Circuit stage; determines which probe modes carry amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Polarization qubit alone, no probe attached.
    Qubit,
    Input,
    Arms,
    Detectors,
}

impl Stage {
    pub fn modes(self) -> &'static [ProbeMode] {
        match self {
            Stage::Qubit => &[],
            Stage::Input => &[ProbeMode::In],
            Stage::Arms => &[ProbeMode::Arm1, ProbeMode::Arm2],
            Stage::Detectors => &[ProbeMode::D3, ProbeMode::D4],
        }
    }

    fn modes_per_polarization(self) -> usize {
        self.modes().len().max(1)
    }

    pub fn dim(self) -> usize {
        2 * self.modes_per_polarization()
    }

    /// Labels in storage order: polarization-major, mode-minor.
    pub fn labels(self) -> Vec<BasisLabel> {
        let modes: Vec<Option<ProbeMode>> = if self.modes().is_empty() {
            vec![None]
        } else {
            self.modes().iter().copied().map(Some).collect()
        };
        [Polarization::H, Polarization::V]
            .into_iter()
            .flat_map(|p| modes.iter().map(move |&m| BasisLabel::new(p, m)))
            .collect()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Qubit => "qubit",
            Stage::Input => "input",
            Stage::Arms => "arms",
            Stage::Detectors => "detectors",
        })
    }
}

/// One product basis vector `|polarization⟩|probe⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub polarization: Polarization,
    /// `None` before the probe is attached.
    pub probe: Option<ProbeMode>,
}

impl BasisLabel {
    pub fn new(polarization: Polarization, probe: Option<ProbeMode>) -> Self {
        Self {
            polarization,
            probe,
        }
    }
}

/// Linear polarization direction θ in radians, `cos θ|H⟩ + sin θ|V⟩`.
/// Meaningful modulo π.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolarizationAngle(f64);

impl PolarizationAngle {
    pub const fn from_radians(theta: f64) -> Self {
        Self(theta)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// The angle reduced into `[0, π)`.
    pub fn reduced(self) -> f64 {
        self.0.rem_euclid(std::f64::consts::PI)
    }

    /// The orthogonal direction, θ + π/2.
    pub fn orthogonal(self) -> Self {
        Self(self.0 + std::f64::consts::FRAC_PI_2)
    }
}

/// Cross-Kerr phase φ in radians picked up by the probe when it meets a
/// `V` photon in the cell. Meaningful modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KerrPhase(f64);

impl KerrPhase {
    pub const fn from_radians(phi: f64) -> Self {
        Self(phi)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn reduced(self) -> f64 {
        self.0.rem_euclid(std::f64::consts::TAU)
    }
}

/// Normalized pure state of the qubit (and probe, once attached).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    stage: Stage,
    amps: [Complex64; 4],
}

impl PureState {
    /// Builds a state from amplitudes in [`Stage::labels`] order.
    pub fn new(stage: Stage, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != stage.dim() {
            return Err(Error::DimensionMismatch {
                stage,
                expected: stage.dim(),
                found: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let mut amps = [ZERO; 4];
        amps[..amplitudes.len()].copy_from_slice(amplitudes);
        let state = Self { stage, amps };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized(n));
        }
        Ok(state)
    }

    /// Output of a unitary acting on an already normalized state.
    fn from_unitary(stage: Stage, amps: [Complex64; 4]) -> Self {
        let state = Self { stage, amps };
        debug_assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
        state
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps[..self.stage.dim()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    fn index(&self, pol: Polarization, mode: usize) -> usize {
        let p = match pol {
            Polarization::H => 0,
            Polarization::V => 1,
        };
        p * self.stage.modes_per_polarization() + mode
    }

    fn at(&self, pol: Polarization, mode: usize) -> Complex64 {
        self.amps[self.index(pol, mode)]
    }

    /// Amplitude on `label`, or `None` if the label does not belong to this stage.
    pub fn amplitude(&self, label: BasisLabel) -> Option<Complex64> {
        let mode = match (label.probe, self.stage.modes()) {
            (None, []) => 0,
            (Some(m), modes) => modes.iter().position(|&x| x == m)?,
            (None, _) => return None,
        };
        Some(self.at(label.polarization, mode))
    }

    /// `⟨self|other⟩`; `None` when the stages differ.
    pub fn inner(&self, other: &PureState) -> Option<Complex64> {
        (self.stage == other.stage).then(|| {
            self.amplitudes()
                .iter()
                .zip(other.amplitudes())
                .map(|(a, b)| a.conj() * b)
                .sum()
        })
    }

    /// Equality up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.inner(other)
            .is_some_and(|ip| (ip.norm() - 1.0).abs() <= tol)
    }

    fn expect_stage(&self, expected: Stage) -> Result<()> {
        if self.stage == expected {
            Ok(())
        } else {
            Err(Error::WrongStage {
                expected,
                found: self.stage,
            })
        }
    }
}

/// `cos θ|H⟩ + sin θ|V⟩`.
pub fn make_qubit(theta: PolarizationAngle) -> PureState {
    let (s, c) = theta.radians().sin_cos();
    PureState::from_unitary(
        Stage::Qubit,
        [Complex64::from(c), Complex64::from(s), ZERO, ZERO],
    )
}

/// Tensors the probe photon, in the interferometer input mode, onto a bare qubit.
pub fn attach_probe(qubit: &PureState) -> Result<PureState> {
    qubit.expect_stage(Stage::Qubit)?;
    Ok(PureState::from_unitary(Stage::Input, qubit.amps))
}

/// First 50:50 beam splitter: `IN → (ARM1 + i·ARM2)/√2`.
pub fn apply_bs1(state: &PureState) -> Result<PureState> {
    state.expect_stage(Stage::Input)?;
    let h = state.amps[0] * FRAC_1_SQRT_2;
    let v = state.amps[1] * FRAC_1_SQRT_2;
    Ok(PureState::from_unitary(Stage::Arms, [h, I * h, v, I * v]))
}

/// Kerr cell on arm 1: `|V⟩|ARM1⟩` picks up `e^{iφ}`, everything else passes.
pub fn apply_kerr(state: &PureState, phi: KerrPhase) -> Result<PureState> {
    state.expect_stage(Stage::Arms)?;
    let mut amps = state.amps;
    amps[2] *= Complex64::from_polar(1.0, phi.radians());
    Ok(PureState::from_unitary(Stage::Arms, amps))
}

/// Second 50:50 beam splitter onto the detectors:
/// `ARM1 → (i·D3 + D4)/√2`, `ARM2 → (D3 + i·D4)/√2`.
pub fn apply_bs2(state: &PureState) -> Result<PureState> {
    state.expect_stage(Stage::Arms)?;
    let mut amps = [ZERO; 4];
    for (p, pol) in [Polarization::H, Polarization::V].into_iter().enumerate() {
        let a1 = state.at(pol, 0);
        let a2 = state.at(pol, 1);
        amps[2 * p] = (I * a1 + a2) * FRAC_1_SQRT_2;
        amps[2 * p + 1] = (a1 + I * a2) * FRAC_1_SQRT_2;
    }
    Ok(PureState::from_unitary(Stage::Detectors, amps))
}

/// Qubit `θ` through the first splitter and the Kerr cell.
pub fn probe_arms(theta: PolarizationAngle, phi: KerrPhase) -> PureState {
    let s = attach_probe(&make_qubit(theta)).and_then(|s| apply_bs1(&s));
    s.and_then(|s| apply_kerr(&s, phi))
        .expect("stages are sequenced correctly")
}

/// Qubit `θ` through the full interferometer, ready for readout.
pub fn probe_circuit(theta: PolarizationAngle, phi: KerrPhase) -> PureState {
    apply_bs2(&probe_arms(theta, phi)).expect("stages are sequenced correctly")
}

/// Joint Born-rule distribution of Bob's outcome and Eve's detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub u_d3: f64,
    pub u_d4: f64,
    pub v_d3: f64,
    pub v_d4: f64,
}

impl JointDistribution {
    pub fn get(&self, bob: PairState, detector: Detector) -> f64 {
        match (bob, detector) {
            (PairState::U, Detector::D3) => self.u_d3,
            (PairState::U, Detector::D4) => self.u_d4,
            (PairState::V, Detector::D3) => self.v_d3,
            (PairState::V, Detector::D4) => self.v_d4,
        }
    }

    pub fn total(&self) -> f64 {
        self.u_d3 + self.u_d4 + self.v_d3 + self.v_d4
    }

    /// Outcomes in sampling order.
    pub fn outcomes(&self) -> [((PairState, Detector), f64); 4] {
        [
            ((PairState::U, Detector::D3), self.u_d3),
            ((PairState::U, Detector::D4), self.u_d4),
            ((PairState::V, Detector::D3), self.v_d3),
            ((PairState::V, Detector::D4), self.v_d4),
        ]
    }
}

/// Bob measures polarization in the basis `{u at bob_basis, v at bob_basis + π/2}`
/// while Eve reads D3/D4.
pub fn joint_distribution(
    state: &PureState,
    bob_basis: PolarizationAngle,
) -> Result<JointDistribution> {
    state.expect_stage(Stage::Detectors)?;
    let (s, c) = bob_basis.radians().sin_cos();
    let prob = |bob: PairState, det: usize| {
        let h = state.at(Polarization::H, det);
        let v = state.at(Polarization::V, det);
        match bob {
            PairState::U => (h * c + v * s).norm_sqr(),
            PairState::V => (-h * s + v * c).norm_sqr(),
        }
    };
    Ok(JointDistribution {
        u_d3: prob(PairState::U, 0),
        u_d4: prob(PairState::U, 1),
        v_d3: prob(PairState::V, 0),
        v_d4: prob(PairState::V, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(rng: &mut impl Rng, stage: Stage) -> PureState {
        let raw: Vec<Complex64> = (0..stage.dim())
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = raw.iter().map(|a| a / norm).collect();
        PureState::new(stage, &amps).unwrap()
    }

    fn angle(x: f64) -> PolarizationAngle {
        PolarizationAngle::from_radians(x)
    }

    fn phase(x: f64) -> KerrPhase {
        KerrPhase::from_radians(x)
    }

    #[test]
    fn make_qubit_examples() {
        let h = make_qubit(angle(0.0));
        assert_eq!(h.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        let v = make_qubit(angle(FRAC_PI_2));
        assert!((v.amplitudes()[0].norm()) < TOLERANCE);
        assert!((v.amplitudes()[1] - c(1.0, 0.0)).norm() < TOLERANCE);

        let plus = make_qubit(angle(FRAC_PI_4));
        for a in plus.amplitudes() {
            assert!((a - c(FRAC_1_SQRT_2, 0.0)).norm() < TOLERANCE);
        }
    }

    #[test]
    fn attach_probe_examples() {
        let h = attach_probe(&make_qubit(angle(0.0))).unwrap();
        assert_eq!(h.stage(), Stage::Input);
        let label = BasisLabel::new(Polarization::H, Some(ProbeMode::In));
        assert_eq!(h.amplitude(label), Some(c(1.0, 0.0)));

        let plus = attach_probe(&make_qubit(angle(FRAC_PI_4))).unwrap();
        let vin = BasisLabel::new(Polarization::V, Some(ProbeMode::In));
        assert!((plus.amplitude(vin).unwrap() - c(FRAC_1_SQRT_2, 0.0)).norm() < TOLERANCE);

        assert_eq!(
            attach_probe(&h),
            Err(Error::WrongStage {
                expected: Stage::Qubit,
                found: Stage::Input
            })
        );
    }

    #[test]
    fn stage_errors() {
        let q = make_qubit(angle(0.3));
        assert!(matches!(apply_bs1(&q), Err(Error::WrongStage { .. })));
        assert!(matches!(
            apply_kerr(&q, phase(1.0)),
            Err(Error::WrongStage { .. })
        ));
        assert!(matches!(apply_bs2(&q), Err(Error::WrongStage { .. })));
        assert!(matches!(
            joint_distribution(&q, angle(0.0)),
            Err(Error::WrongStage { .. })
        ));
        let det = probe_circuit(angle(0.3), phase(1.0));
        assert!(matches!(apply_bs2(&det), Err(Error::WrongStage { .. })));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            PureState::new(Stage::Arms, &[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 4, .. })
        ));
        assert!(matches!(
            PureState::new(Stage::Qubit, &[c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::NotNormalized(_))
        ));
        assert_eq!(
            PureState::new(Stage::Qubit, &[c(f64::NAN, 0.0), c(0.0, 0.0)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn bs1_on_h() {
        let s = apply_bs1(&attach_probe(&make_qubit(angle(0.0))).unwrap()).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(
            s.amplitudes(),
            &[c(r, 0.0), c(0.0, r), c(0.0, 0.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn kerr_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_state(&mut rng, Stage::Arms);
        assert_eq!(apply_kerr(&s, phase(0.0)).unwrap(), s);

        let flipped = apply_kerr(&s, phase(PI)).unwrap();
        let v_arm1 = BasisLabel::new(Polarization::V, Some(ProbeMode::Arm1));
        assert!(
            (flipped.amplitude(v_arm1).unwrap() + s.amplitude(v_arm1).unwrap()).norm() < TOLERANCE
        );
        for label in Stage::Arms.labels().into_iter().filter(|l| *l != v_arm1) {
            assert_eq!(flipped.amplitude(label), s.amplitude(label));
        }
    }

    #[test]
    fn bs2_sends_undisturbed_probe_to_d3() {
        // (|p1⟩ + i|p2⟩)/√2 with an H qubit
        let r = FRAC_1_SQRT_2;
        let s = PureState::new(
            Stage::Arms,
            &[c(r, 0.0), c(0.0, r), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let out = apply_bs2(&s).unwrap();
        let d3 = BasisLabel::new(Polarization::H, Some(ProbeMode::D3));
        assert!((out.amplitude(d3).unwrap().norm_sqr() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn bs2_sends_phase_flipped_probe_to_d4() {
        // (−|p1⟩ + i|p2⟩)/√2 with a V qubit
        let r = FRAC_1_SQRT_2;
        let s = PureState::new(
            Stage::Arms,
            &[c(0.0, 0.0), c(0.0, 0.0), c(-r, 0.0), c(0.0, r)],
        )
        .unwrap();
        let out = apply_bs2(&s).unwrap();
        let d4 = BasisLabel::new(Polarization::V, Some(ProbeMode::D4));
        assert!((out.amplitude(d4).unwrap().norm_sqr() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn unitaries_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let input = random_state(&mut rng, Stage::Input);
            assert!((apply_bs1(&input).unwrap().norm_sqr() - 1.0).abs() < TOLERANCE);

            let arms = random_state(&mut rng, Stage::Arms);
            let phi = phase(rng.random_range(0.0..TAU));
            assert!((apply_kerr(&arms, phi).unwrap().norm_sqr() - 1.0).abs() < TOLERANCE);
            assert!((apply_bs2(&arms).unwrap().norm_sqr() - 1.0).abs() < TOLERANCE);

            let qubit = random_state(&mut rng, Stage::Qubit);
            assert!((attach_probe(&qubit).unwrap().norm_sqr() - 1.0).abs() < TOLERANCE);
        }
    }

    #[test]
    fn arms_state_matches_entangled_form() {
        // (cos θ|H⟩|p1⟩ + sin θ e^{iφ}|V⟩|p1⟩ + i(cos θ|H⟩ + sin θ|V⟩)|p2⟩)/√2
        for i in 0..=20 {
            for j in 0..=20 {
                let theta = FRAC_PI_2 * i as f64 / 20.0;
                let phi = TAU * j as f64 / 20.0;
                let s = probe_arms(angle(theta), phase(phi));
                let (st, ct) = theta.sin_cos();
                let r = FRAC_1_SQRT_2;
                let expected = [
                    c(ct * r, 0.0),
                    c(0.0, ct * r),
                    Complex64::from_polar(st * r, phi),
                    c(0.0, st * r),
                ];
                for (a, e) in s.amplitudes().iter().zip(expected) {
                    assert!((a - e).norm() < TOLERANCE, "θ={theta} φ={phi}");
                }
            }
        }
    }

    #[test]
    fn zero_phase_and_h_input_exit_d3() {
        for i in 0..=50 {
            let x = PI * i as f64 / 50.0;
            let no_kerr =
                joint_distribution(&probe_circuit(angle(x), phase(0.0)), angle(x)).unwrap();
            assert!(no_kerr.u_d4 + no_kerr.v_d4 <= TOLERANCE);

            let h =
                joint_distribution(&probe_circuit(angle(0.0), phase(2.0 * x)), angle(0.0)).unwrap();
            assert!(h.u_d4 + h.v_d4 <= TOLERANCE);
        }
    }

    #[test]
    fn joint_distribution_examples() {
        let h = joint_distribution(&probe_circuit(angle(0.0), phase(PI)), angle(0.0)).unwrap();
        assert!((h.u_d3 - 1.0).abs() < TOLERANCE);
        assert!(h.u_d4.abs() + h.v_d3.abs() + h.v_d4.abs() < TOLERANCE);

        let plus = joint_distribution(
            &probe_circuit(angle(FRAC_PI_4), phase(PI)),
            angle(FRAC_PI_4),
        )
        .unwrap();
        for (_, p) in plus.outcomes() {
            assert!((p - 0.25).abs() < TOLERANCE);
        }

        // 17/32 from expanding the amplitude of |u⟩|D3⟩ by hand
        let d = joint_distribution(
            &probe_circuit(angle(FRAC_PI_3), phase(FRAC_PI_2)),
            angle(FRAC_PI_3),
        )
        .unwrap();
        assert!((d.u_d3 - 17.0 / 32.0).abs() < TOLERANCE);
    }

    #[test]
    fn joint_distribution_is_a_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let s = random_state(&mut rng, Stage::Detectors);
            let d = joint_distribution(&s, angle(rng.random_range(0.0..PI))).unwrap();
            assert!((d.total() - 1.0).abs() < TOLERANCE);
            for (_, p) in d.outcomes() {
                assert!((0.0..=1.0 + TOLERANCE).contains(&p));
            }
        }
    }

    #[test]
    fn phase_equivalence() {
        let a = make_qubit(angle(0.4));
        let b = PureState::new(
            Stage::Qubit,
            &a.amplitudes()
                .iter()
                .map(|x| x * Complex64::from_polar(1.0, 1.3))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(a.approx_eq_up_to_phase(&b, TOLERANCE));
        assert!(!a.approx_eq_up_to_phase(&make_qubit(angle(0.5)), TOLERANCE));
        // θ and θ + π are the same polarization up to sign
        assert!(a.approx_eq_up_to_phase(&make_qubit(angle(0.4 + PI)), TOLERANCE));
    }

    #[test]
    fn labels_follow_storage_order() {
        assert_eq!(Stage::Qubit.labels().len(), 2);
        assert_eq!(
            Stage::Detectors.labels(),
            vec![
                BasisLabel::new(Polarization::H, Some(ProbeMode::D3)),
                BasisLabel::new(Polarization::H, Some(ProbeMode::D4)),
                BasisLabel::new(Polarization::V, Some(ProbeMode::D3)),
                BasisLabel::new(Polarization::V, Some(ProbeMode::D4)),
            ]
        );
        let s = make_qubit(angle(0.0));
        assert_eq!(
            s.amplitude(BasisLabel::new(Polarization::H, Some(ProbeMode::In))),
            None
        );
    }
}
