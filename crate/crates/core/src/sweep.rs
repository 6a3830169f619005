//! Scenario evaluation, parameter sweeps and the plot-ready outputs.
//!
//! Numbers are written with Rust's shortest round-trip formatting, `.` as
//! the decimal separator and LF line endings. Rows always come out in input
//! order, whatever the thread count.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::array_processing::{array_factor, BeamWeights, Hypothesis};
use crate::doa::{estimate_from_signal, DoaEstimate, GammaGrid, PowerRatioCurve};
use crate::em_model::{excess_attenuation_db, occupied_signal, perturbed_ratios, signal_vector, Occupancy};
use crate::error::{ModelError, Result};
use crate::geometry::{LinkLayout, TargetSheet};
use crate::scenario::{Scenario, SweepAxis};

/// Estimate plus per-antenna attenuation for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub estimate: DoaEstimate,
    /// `A_T,dB` at each antenna, `m = -M..=M`. All zero for an empty scene.
    pub per_antenna_db: Vec<f64>,
}

/// Runs the estimator on a scenario (empty or occupied).
pub fn evaluate(scenario: &Scenario) -> Result<Evaluation> {
    evaluate_scene(
        &scenario.layout,
        scenario.target.as_ref(),
        &scenario.grid,
        scenario.sigma_n,
        scenario,
    )
}

fn evaluate_scene(
    layout: &LinkLayout,
    target: Option<&TargetSheet>,
    grid: &GammaGrid,
    sigma_n: f64,
    scenario: &Scenario,
) -> Result<Evaluation> {
    match target {
        None => {
            let s = signal_vector(layout, &Occupancy::Empty, &scenario.quadrature)?;
            Ok(Evaluation {
                estimate: estimate_from_signal(layout, &s, grid, sigma_n)?,
                per_antenna_db: vec![0.0; layout.num_antennas()],
            })
        }
        Some(sheet) => {
            let ratios = perturbed_ratios(layout, sheet, &scenario.quadrature)?;
            let per_antenna_db = ratios
                .as_slice()
                .iter()
                .map(|r| excess_attenuation_db(*r))
                .collect::<Result<Vec<_>>>()?;
            let s = occupied_signal(layout, &ratios)?;
            Ok(Evaluation {
                estimate: estimate_from_signal(layout, &s, grid, sigma_n)?,
                per_antenna_db,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: Scenario,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>, base: Scenario) -> Result<Self> {
        if base.target.is_none() {
            return Err(ModelError::MissingTarget);
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::invalid("sweep.values", "must be non-empty and finite"));
        }
        Ok(SweepSpec { axis, values, base })
    }

    /// Scene for one swept value.
    pub fn target_at(&self, value: f64) -> Result<TargetSheet> {
        let t = self.base.target.ok_or(ModelError::MissingTarget)?;
        let p = t.barycenter();
        match self.axis {
            SweepAxis::TargetY => t.moved_to(p.x, value),
            SweepAxis::TargetX => t.moved_to(value, p.y),
            SweepAxis::Theta => TargetSheet::new(t.half_width(), t.half_height(), value, p.x, p.y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<RowData, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowData {
    pub gamma_hat_rad: f64,
    pub gamma_hat_deg: f64,
    pub attenuation_db: f64,
    pub p0: f64,
    pub py: f64,
    pub per_antenna_db: Vec<f64>,
}

impl From<&Evaluation> for RowData {
    fn from(e: &Evaluation) -> Self {
        RowData {
            gamma_hat_rad: e.estimate.gamma_hat,
            gamma_hat_deg: e.estimate.gamma_hat_deg(),
            attenuation_db: e.estimate.attenuation_db,
            p0: e.estimate.p0,
            py: e.estimate.py,
            per_antenna_db: e.per_antenna_db.clone(),
        }
    }
}

pub fn run_row(spec: &SweepSpec, value: f64) -> SweepRow {
    let outcome = spec
        .target_at(value)
        .and_then(|t| {
            evaluate_scene(
                &spec.base.layout,
                Some(&t),
                &spec.base.grid,
                spec.base.sigma_n,
                &spec.base,
            )
        })
        .map(|e| RowData::from(&e))
        .map_err(|e| e.to_string());
    SweepRow { value, outcome }
}

/// Evaluates every value in parallel; output order matches `spec.values`.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    spec.values.par_iter().map(|&v| run_row(spec, v)).collect()
}

fn antenna_columns(layout: &LinkLayout) -> Vec<String> {
    layout.indices().map(|m| format!("att_db_m{m}")).collect()
}

pub fn write_sweep_csv<W: Write>(out: W, spec: &SweepSpec, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header: Vec<String> = [
        spec.axis.column(),
        "gamma_hat_rad",
        "gamma_hat_deg",
        "attenuation_db",
        "p0",
        "py",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(antenna_columns(&spec.base.layout));
    header.push("error".into());
    w.write_record(&header)?;

    let n_ant = spec.base.layout.num_antennas();
    for row in rows {
        let mut record = vec![row.value.to_string()];
        match &row.outcome {
            Ok(d) => {
                record.extend(
                    [d.gamma_hat_rad, d.gamma_hat_deg, d.attenuation_db, d.p0, d.py]
                        .iter()
                        .map(f64::to_string),
                );
                record.extend(d.per_antenna_db.iter().map(f64::to_string));
                record.push(String::new());
            }
            Err(msg) => {
                record.extend(std::iter::repeat_n(String::new(), 5 + n_ant));
                record.push(msg.clone());
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv<W: Write>(out: W, curve: &PowerRatioCurve) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["gamma_rad", "gamma_deg", "power_ratio"])?;
    for (g, r) in curve.gammas.iter().zip(&curve.ratios) {
        w.write_record([g.to_string(), g.to_degrees().to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct EstimateJson {
    gamma_hat_rad: f64,
    gamma_hat_deg: f64,
    attenuation_db: f64,
    p0: f64,
    py: f64,
}

pub fn write_estimate_json<W: Write>(mut out: W, estimate: &DoaEstimate) -> std::io::Result<()> {
    let doc = EstimateJson {
        gamma_hat_rad: estimate.gamma_hat,
        gamma_hat_deg: estimate.gamma_hat_deg(),
        attenuation_db: estimate.attenuation_db,
        p0: estimate.p0,
        py: estimate.py,
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")
}

/// `(gamma_deg, |F_a| planar, |F_a| non-planar)` with uniform weights.
pub fn array_factor_table(layout: &LinkLayout, grid: &GammaGrid) -> Result<Vec<(f64, f64, f64)>> {
    let w = BeamWeights::uniform(layout.num_antennas());
    grid.points()
        .into_iter()
        .map(|g| {
            let planar = array_factor(layout, &w, g, Hypothesis::Planar)?.norm();
            let nonplanar = array_factor(layout, &w, g, Hypothesis::NonPlanar)?.norm();
            Ok((g.to_degrees(), planar, nonplanar))
        })
        .collect()
}

pub fn write_factor_csv<W: Write>(out: W, table: &[(f64, f64, f64)]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["gamma_deg", "abs_factor_planar", "abs_factor_nonplanar"])?;
    for (g, p, n) in table {
        w.write_record([g.to_string(), p.to_string(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario::from_json_str(
            r#"{"frequency_hz": 2.4868e9, "d0_m": 5.0, "da_m": 0.06, "h_m": 0.9, "M": 2,
                "target": {"ay_m": 0.45, "az_m": 0.9, "x_m": 2.5, "y_m": 0.0}}"#,
        )
        .unwrap()
    }

    #[test]
    fn rows_follow_input_order() {
        let spec = SweepSpec::new(SweepAxis::TargetY, vec![0.4, -0.2, 0.0], base()).unwrap();
        let rows = run_sweep(&spec);
        let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
        assert_eq!(values, vec![0.4, -0.2, 0.0]);
        let reversed = SweepSpec::new(SweepAxis::TargetY, vec![0.0, -0.2, 0.4], base()).unwrap();
        let mut back = run_sweep(&reversed);
        back.reverse();
        assert_eq!(rows, back);
    }

    #[test]
    fn row_failures_are_recorded() {
        // Sheet on top of the central receiver.
        let spec = SweepSpec::new(SweepAxis::TargetX, vec![4.98, 2.5], base()).unwrap();
        let rows = run_sweep(&spec);
        assert!(rows[0].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &spec, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "target_x_m,gamma_hat_rad,gamma_hat_deg,attenuation_db,p0,py,att_db_m-2,att_db_m-1,att_db_m0,att_db_m1,att_db_m2,error"
        );
        assert!(lines[1].starts_with("4.98,,,,,,,,,,,"));
        assert!(lines[1].contains("wavelength"));
        assert!(lines[2].ends_with(','));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn theta_sweep_rotates_sheet() {
        let spec = SweepSpec::new(SweepAxis::Theta, vec![0.0, 0.5, 2.0], base()).unwrap();
        let rows = run_sweep(&spec);
        assert!(rows[0].outcome.is_ok() && rows[1].outcome.is_ok());
        assert!(rows[2].outcome.is_err());
    }

    #[test]
    fn sweep_needs_a_target() {
        let mut s = base();
        s.target = None;
        assert_eq!(
            SweepSpec::new(SweepAxis::TargetY, vec![0.0], s),
            Err(ModelError::MissingTarget)
        );
        assert!(SweepSpec::new(SweepAxis::TargetY, vec![], base()).is_err());
    }

    #[test]
    fn curve_csv_shape() {
        let mut s = base();
        s.grid = GammaGrid::new(0.0, std::f64::consts::PI, std::f64::consts::PI / 4.0).unwrap();
        let e = evaluate(&s).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &e.estimate.curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "gamma_rad,gamma_deg,power_ratio");
        assert_eq!(lines.len(), 6);
        assert!(lines[3].starts_with("1.5707963267948966,90,"));
        for line in &lines[1..] {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols[0].to_degrees(), cols[1]);
        }
    }

    #[test]
    fn estimate_json_round_trips() {
        let e = evaluate(&base()).unwrap();
        let mut buf = Vec::new();
        write_estimate_json(&mut buf, &e.estimate).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["gamma_hat_deg"].as_f64(), Some(90.0));
        assert_eq!(v["attenuation_db"].as_f64(), Some(e.estimate.attenuation_db));
        assert_eq!(v["py"].as_f64(), Some(e.estimate.py));
    }

    #[test]
    fn empty_scene_evaluates() {
        let mut s = base();
        s.target = None;
        let e = evaluate(&s).unwrap();
        assert_eq!(e.per_antenna_db, vec![0.0; 5]);
        assert_eq!(e.estimate.gamma_hat_deg(), 90.0);
    }
}
