//! Flat output rows shared by `analyze` and `sweep`.

use serde::Serialize;

use crate::error::Result;
use crate::info::ChannelMetrics;
use crate::state::{KerrPhase, PolarizationAngle};
use crate::tap::{attack_error_rates, closed_form_table};

/// Column order of the sweep CSV. Stable; append new columns at the end.
pub const CSV_HEADER: &str = "theta,phi,alpha,p3_uu,p4_uu,p3_vv,p4_vv,p3_uv,p4_uv,p3_vu,p4_vu,\
q_ae,q_ab,q_eb,i_ae,i_ab,i_eb,unsafe";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputRow {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
    pub p3_uu: f64,
    pub p4_uu: f64,
    pub p3_vv: f64,
    pub p4_vv: f64,
    pub p3_uv: f64,
    pub p4_uv: f64,
    pub p3_vu: f64,
    pub p4_vu: f64,
    pub q_ae: f64,
    pub q_ab: f64,
    pub q_eb: f64,
    pub i_ae: f64,
    pub i_ab: f64,
    pub i_eb: f64,
    #[serde(rename = "unsafe")]
    pub is_unsafe: bool,
}

impl OutputRow {
    pub fn compute(theta: PolarizationAngle, phi: KerrPhase, alpha: f64) -> Result<Self> {
        let t = closed_form_table(theta, phi);
        let rates = attack_error_rates(&t, alpha)?;
        let m = ChannelMetrics::from_rates(theta, phi, &rates)?;
        Ok(Self {
            theta: theta.radians(),
            phi: phi.radians(),
            alpha,
            p3_uu: t.p3_uu,
            p4_uu: t.p4_uu,
            p3_vv: t.p3_vv,
            p4_vv: t.p4_vv,
            p3_uv: t.p3_uv,
            p4_uv: t.p4_uv,
            p3_vu: t.p3_vu,
            p4_vu: t.p4_vu,
            q_ae: m.q_ae,
            q_ab: m.q_ab,
            q_eb: m.q_eb,
            i_ae: m.i_ae,
            i_ab: m.i_ab,
            i_eb: m.i_eb,
            is_unsafe: m.is_unsafe,
        })
    }

    /// Name/value pairs in CSV column order, `unsafe` excluded.
    pub fn numeric_fields(&self) -> [(&'static str, f64); 17] {
        [
            ("theta", self.theta),
            ("phi", self.phi),
            ("alpha", self.alpha),
            ("p3_uu", self.p3_uu),
            ("p4_uu", self.p4_uu),
            ("p3_vv", self.p3_vv),
            ("p4_vv", self.p4_vv),
            ("p3_uv", self.p3_uv),
            ("p4_uv", self.p4_uv),
            ("p3_vu", self.p3_vu),
            ("p4_vu", self.p4_vu),
            ("q_ae", self.q_ae),
            ("q_ab", self.q_ab),
            ("q_eb", self.q_eb),
            ("i_ae", self.i_ae),
            ("i_ab", self.i_ab),
            ("i_eb", self.i_eb),
        ]
    }

    /// One CSV line without the trailing newline. Floats use Rust's
    /// shortest round-trip formatting; `unsafe` is 0/1.
    pub fn csv_line(&self) -> String {
        let mut fields: Vec<String> = self
            .numeric_fields()
            .iter()
            .map(|(_, v)| v.to_string())
            .collect();
        fields.push(u8::from(self.is_unsafe).to_string());
        fields.join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_8, PI};

    #[test]
    fn header_matches_fields() {
        let row = OutputRow::compute(
            PolarizationAngle::from_radians(FRAC_PI_8),
            KerrPhase::from_radians(PI),
            1.0,
        )
        .unwrap();
        let names: Vec<&str> = row.numeric_fields().iter().map(|(n, _)| *n).collect();
        assert_eq!(format!("{},unsafe", names.join(",")), CSV_HEADER);
        assert_eq!(row.csv_line().split(',').count(), 18);
        assert!(row.csv_line().ends_with(",1"));
    }

    #[test]
    fn csv_values_round_trip() {
        let row = OutputRow::compute(
            PolarizationAngle::from_radians(0.3),
            KerrPhase::from_radians(2.1),
            0.6,
        )
        .unwrap();
        let parsed: Vec<f64> = row
            .csv_line()
            .split(',')
            .take(17)
            .map(|s| s.parse().unwrap())
            .collect();
        let expected: Vec<f64> = row.numeric_fields().iter().map(|(_, v)| *v).collect();
        assert_eq!(parsed, expected);
    }
}
