use std::io::Write;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::runs::{EnergyTrace, ErrorReport, SimulationResult};
use super::RunConfig;
use crate::error::{Error, Result};
use crate::integrators::{
    ab_coefficients, gamma_polynomial, gamma_tilde_polynomial, AlphaPTable, MAX_GAMMA_INDEX,
};
use crate::stability::StabilityScan;

/// Seventeen significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Output(e.to_string())
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    Ok(out)
}

fn finish<W: Write>(mut out: csv::Writer<W>) -> Result<()> {
    out.flush().map_err(Error::from)
}

pub fn write_error_report_csv<W: Write>(w: W, report: &ErrorReport) -> Result<()> {
    let mut out = writer(w, &["h_coarse", "dofs", "dt", "steps", "l2_error", "rate"])?;
    for r in &report.rows {
        out.write_record([
            fmt_f64(r.h_coarse),
            r.n_dofs.to_string(),
            fmt_f64(r.dt),
            r.steps.to_string(),
            fmt_f64(r.error),
            opt(r.rate),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_stability_csv<W: Write>(w: W, scans: &[StabilityScan]) -> Result<()> {
    let mut out = writer(
        w,
        &[
            "scheme",
            "p",
            "overlap",
            "reference_dt",
            "nu",
            "stable",
            "indicator",
            "nu_max",
            "monotone",
        ],
    )?;
    for s in scans {
        for pt in &s.points {
            out.write_record([
                s.scheme.clone(),
                s.p.to_string(),
                s.overlap.to_string(),
                fmt_f64(s.reference_dt),
                fmt_f64(pt.nu),
                pt.stable.to_string(),
                fmt_f64(pt.indicator),
                fmt_f64(s.nu_max),
                s.monotone.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(out)
}

pub fn write_energy_csv<W: Write>(w: W, trace: &EnergyTrace) -> Result<()> {
    let mut out = writer(w, &["step", "t", "energy", "relative_change"])?;
    let e0 = trace.points.first().map(|p| p.energy).unwrap_or(0.0);
    for p in &trace.points {
        let rel = if e0 != 0.0 { (p.energy - e0) / e0 } else { 0.0 };
        out.write_record([
            p.step.to_string(),
            fmt_f64(p.t),
            fmt_f64(p.energy),
            fmt_f64(rel),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_simulation_csv<W: Write>(w: W, sim: &SimulationResult) -> Result<()> {
    let mut out = writer(w, &["field", "x", "numeric", "exact"])?;
    for s in &sim.samples {
        out.write_record([
            s.field.to_string(),
            fmt_f64(s.x),
            fmt_f64(s.numeric),
            opt(s.exact),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

/// `alpha_l`, `beta_{m,l}`, the `gamma_j` and `gamma_tilde_j` polynomial
/// coefficients and `alpha_j^p`, each as an exact fraction and a float.
pub fn write_coefficients_csv<W: Write>(w: W, k: usize, p: usize) -> Result<()> {
    let set = ab_coefficients(k, p)?;
    let alpha_p = AlphaPTable::generate(p)?;
    let mut out = writer(w, &["table", "k", "p", "i", "j", "exact", "value"])?;
    let mut row = |table: &str, k: String, p: String, i: usize, j: String, q: Rational64| {
        out.write_record([
            table.to_string(),
            k,
            p,
            i.to_string(),
            j,
            q.to_string(),
            fmt_f64(q.to_f64().unwrap_or(f64::NAN)),
        ])
        .map_err(csv_err)
    };
    for (l, &a) in set.alpha.iter().enumerate() {
        row("alpha", k.to_string(), String::new(), l, String::new(), a)?;
    }
    for (m, r) in set.beta.iter().enumerate() {
        for (l, &b) in r.iter().enumerate() {
            row("beta", k.to_string(), p.to_string(), m, l.to_string(), b)?;
        }
    }
    for j in 0..=MAX_GAMMA_INDEX {
        for (d, &c) in gamma_polynomial(j)?.iter().enumerate() {
            row("gamma", String::new(), String::new(), j, d.to_string(), c)?;
        }
        for (d, &c) in gamma_tilde_polynomial(j)?.iter().enumerate() {
            row(
                "gamma_tilde",
                String::new(),
                String::new(),
                j,
                d.to_string(),
                c,
            )?;
        }
    }
    for (idx, &a) in alpha_p.alpha.iter().enumerate() {
        row(
            "alpha_p",
            String::new(),
            p.to_string(),
            idx + 1,
            String::new(),
            Rational64::from_integer(a),
        )?;
    }
    finish(out)
}

/// Run manifest written next to the CSV output.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: Option<&'a RunConfig>,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub elapsed_seconds: f64,
    pub summary: serde_json::Value,
}

pub fn write_manifest<W: Write>(w: W, manifest: &Manifest<'_>) -> Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, manifest).map_err(|e| Error::Output(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{ErrorRow, RunConfig};

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn report_has_header_and_blank_first_rate() {
        let report = ErrorReport {
            rows: vec![
                ErrorRow {
                    h_coarse: 0.2,
                    n_dofs: 10,
                    dt: 0.1,
                    steps: 100,
                    error: 1e-2,
                    rate: None,
                },
                ErrorRow {
                    h_coarse: 0.1,
                    n_dofs: 20,
                    dt: 0.05,
                    steps: 200,
                    error: 2.5e-3,
                    rate: Some(2.0),
                },
            ],
            fitted_rate: 2.0,
        };
        let mut buf = Vec::new();
        write_error_report_csv(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "h_coarse,dofs,dt,steps,l2_error,rate");
        assert!(lines[1].ends_with(','));
        assert!(lines[2].ends_with("2.0000000000000000e0"));
    }

    #[test]
    fn coefficient_dump_contains_printed_rows() {
        let mut buf = Vec::new();
        write_coefficients_csv(&mut buf, 3, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("beta,3,2,0,0,17/12,"));
        assert!(text.contains("beta,3,2,1,2,2/3,"));
        assert!(text.contains("alpha_p,,2,1,,1,"));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        assert!(rdr.records().all(|r| r.unwrap().len() == 7));
    }

    #[test]
    fn manifest_is_json() {
        let cfg = RunConfig::default();
        let m = Manifest {
            tool: "ltswave",
            version: "0",
            command: "converge",
            config: Some(&cfg),
            parameters: serde_json::json!({}),
            seed: 1,
            outputs: vec!["out.csv".into()],
            elapsed_seconds: 0.5,
            summary: serde_json::Value::Null,
        };
        let mut buf = Vec::new();
        write_manifest(&mut buf, &m).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["config"]["disc"], "cg");
        assert_eq!(v["config"]["dt"]["fraction"], 0.9);
    }
}
