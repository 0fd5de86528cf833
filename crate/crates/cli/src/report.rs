//! Report emission. CSV reports start with `#` comment lines carrying the
//! command, master seed and resolved configuration (as JSON); JSON reports
//! carry the same in fields.

use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

/// A CSV row type with a fixed column order.
pub trait Row: Serialize {
    const HEADER: &'static [&'static str];
}

/// Machine-readable report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<R> {
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub rows: Vec<R>,
    /// Command-specific extras (descent histories for `optimize`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl<R: Row> Report<R> {
    pub fn new(command: &str, config: &ExperimentConfig, rows: Vec<R>) -> Self {
        Report {
            command: command.to_string(),
            seed: config.seed,
            config: config.clone(),
            rows,
            extra: None,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        writeln!(w, "# command: {}", self.command)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        csv.write_record(R::HEADER)?;
        for r in &self.rows {
            csv.serialize(r)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// Writes to `<out>/<command>.<ext>` or to stdout; returns the path.
    pub fn emit(&self) -> Result<Option<PathBuf>, CliError> {
        let format = self.config.format;
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf)?,
            Format::Json => self.write_json(&mut buf)?,
        }
        match &self.config.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let ext = match format {
                    Format::Csv => "csv",
                    Format::Json => "json",
                };
                let path = dir.join(format!("{}.{ext}", self.command));
                std::fs::write(&path, buf)?;
                Ok(Some(path))
            }
            None => {
                std::io::stdout().lock().write_all(&buf)?;
                Ok(None)
            }
        }
    }
}

/// Per-(q, ε) DE threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub protograph: String,
    pub q: u32,
    pub epsilon: f64,
    pub e_g: f64,
    pub alpha: Option<f64>,
    pub lambda: Option<u32>,
    pub iterations: usize,
    pub target_pe: f64,
    /// `None` when the target is not reached inside the bracket.
    pub threshold_db: Option<f64>,
}

impl Row for ThresholdRow {
    const HEADER: &'static [&'static str] = &[
        "protograph",
        "q",
        "epsilon",
        "e_g",
        "alpha",
        "lambda",
        "iterations",
        "target_pe",
        "threshold_db",
    ];
}

/// One simulated SNR point under one fault model, with the finite-length
/// prediction alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub protograph: String,
    pub q: u32,
    pub n: u64,
    pub epsilon: f64,
    pub e_g: f64,
    pub alpha: f64,
    pub lambda: u32,
    pub fault_model: String,
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iterations: f64,
    pub energy_measured_pj: f64,
    pub p_en_pred: f64,
    pub l_n_pred: f64,
    pub energy_pred_pj: f64,
    pub wall_time_s: f64,
}

impl Row for BerRow {
    const HEADER: &'static [&'static str] = &[
        "protograph",
        "q",
        "n",
        "epsilon",
        "e_g",
        "alpha",
        "lambda",
        "fault_model",
        "snr_db",
        "frames",
        "frame_errors",
        "bit_errors",
        "bits",
        "ber",
        "fer",
        "avg_iterations",
        "energy_measured_pj",
        "p_en_pred",
        "l_n_pred",
        "energy_pred_pj",
        "wall_time_s",
    ];
}

/// Optimum of one protograph with its two fixed-`e_g` baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRow {
    pub protograph: String,
    pub e_min_pj: f64,
    pub e_g_op: f64,
    pub q_op: u32,
    pub n_op: u64,
    pub epsilon_op: f64,
    pub alpha_op: f64,
    pub lambda_op: u32,
    pub pe_op: f64,
    pub l_n_op: f64,
    /// Best over `(q, N)` at `e_g = 1`.
    pub e_full_eg_pj: Option<f64>,
    pub q_full_eg: Option<u32>,
    pub n_full_eg: Option<u64>,
    /// Best over `q` at the largest `N` and `e_g = 1`.
    pub e_q_only_pj: Option<f64>,
    pub q_q_only: Option<u32>,
    pub n_q_only: u64,
    /// `1 - e_min / e_q_only`.
    pub gain_vs_q_only: Option<f64>,
    /// Exhaustive search optimum (when requested).
    pub e_exhaustive_pj: Option<f64>,
    pub exhaustive_agrees: Option<bool>,
}

impl Row for OptimizeRow {
    const HEADER: &'static [&'static str] = &[
        "protograph",
        "e_min_pj",
        "e_g_op",
        "q_op",
        "n_op",
        "epsilon_op",
        "alpha_op",
        "lambda_op",
        "pe_op",
        "l_n_op",
        "e_full_eg_pj",
        "q_full_eg",
        "n_full_eg",
        "e_q_only_pj",
        "q_q_only",
        "n_q_only",
        "gain_vs_q_only",
        "e_exhaustive_pj",
        "exhaustive_agrees",
    ];
}

/// Energy of one parameter set at one SNR by one evaluation route
/// (`hardware`, `simplified` or `prediction`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurveRow {
    pub protograph: String,
    pub label: String,
    pub q: u32,
    pub n: u64,
    pub e_g: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub lambda: u32,
    pub snr_db: f64,
    pub route: String,
    pub frames: u64,
    /// Simulated BER, or predicted `p_eN`.
    pub ber: f64,
    pub iterations: f64,
    pub energy_pj: f64,
}

impl Row for EnergyCurveRow {
    const HEADER: &'static [&'static str] = &[
        "protograph",
        "label",
        "q",
        "n",
        "e_g",
        "epsilon",
        "alpha",
        "lambda",
        "snr_db",
        "route",
        "frames",
        "ber",
        "iterations",
        "energy_pj",
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Header the csv crate derives from the struct's field order.
    fn derived_header<R: Row>(row: &R) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        w.serialize(row).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        text.lines().next().unwrap().to_string()
    }

    #[test]
    fn headers_match_field_order() {
        let t = ThresholdRow {
            protograph: "S17".into(),
            q: 5,
            epsilon: 0.0,
            e_g: 1.0,
            alpha: None,
            lambda: None,
            iterations: 50,
            target_pe: 1e-6,
            threshold_db: None,
        };
        assert_eq!(derived_header(&t), ThresholdRow::HEADER.join(","));
        let e = EnergyCurveRow {
            protograph: "S17".into(),
            label: "opt".into(),
            q: 5,
            n: 3160,
            e_g: 0.8,
            epsilon: 3e-5,
            alpha: 1.5,
            lambda: 1,
            snr_db: 1.45,
            route: "prediction".into(),
            frames: 0,
            ber: 1e-3,
            iterations: 10.0,
            energy_pj: 80.0,
        };
        assert_eq!(derived_header(&e), EnergyCurveRow::HEADER.join(","));
    }

    #[test]
    fn csv_has_comments_and_header() {
        let cfg = ExperimentConfig::default();
        let r: Report<ThresholdRow> = Report::new("threshold", &cfg, vec![]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command: threshold");
        assert_eq!(lines[1], "# seed: 1");
        let cfg_back: ExperimentConfig = serde_json::from_str(lines[2].strip_prefix("# config: ").unwrap()).unwrap();
        assert_eq!(cfg_back, cfg);
        assert_eq!(lines[3], ThresholdRow::HEADER.join(","));
        assert_eq!(lines.len(), 4);
    }
}
