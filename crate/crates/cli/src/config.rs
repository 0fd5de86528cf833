//! Experiment configuration: a TOML file whose keys are overridden by
//! command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ldpc_energy::decoder::Schedule;
use ldpc_energy::energy::TechModel;
use ldpc_energy::montecarlo::StopRule;
use ldpc_energy::optimizer::{eps_grid, SearchSpace, Target};
use ldpc_energy::protograph::Protograph;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Technology constants: a named preset, optionally with overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TechConfig {
    pub preset: String,
    pub epsilon0: Option<f64>,
    pub c: Option<f64>,
    pub e0_pj: Option<f64>,
}

impl Default for TechConfig {
    fn default() -> Self {
        TechConfig {
            preset: "sram65".into(),
            epsilon0: None,
            c: None,
            e0_pj: None,
        }
    }
}

impl TechConfig {
    pub fn model(&self) -> Result<TechModel, CliError> {
        let base = TechModel::preset(&self.preset)
            .ok_or_else(|| CliError::Config(format!("unknown technology preset '{}'", self.preset)))?;
        Ok(TechModel::new(
            self.epsilon0.unwrap_or(base.epsilon0),
            self.c.unwrap_or(base.c),
            self.e0_pj.unwrap_or(base.e0_pj),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetConfig {
    pub pe: f64,
    pub snr_db: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig { pe: 1e-3, snr_db: 1.45 }
    }
}

/// Optimizer grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub q_min: u32,
    pub q_max: u32,
    pub z_min: usize,
    pub z_max: usize,
    pub z_step: usize,
    pub eg_min: f64,
    pub eg_max: f64,
    pub eps_points: usize,
    /// Explicit failure probabilities; replaces the `e_g` grid when set.
    pub eps: Option<Vec<f64>>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    pub lambdas: Vec<u32>,
    pub rounds: usize,
    /// Also solve by exhaustive search and compare.
    pub exhaustive: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            q_min: 3,
            q_max: 8,
            z_min: 250,
            z_max: 2500,
            z_step: 10,
            eg_min: 0.5,
            eg_max: 1.0,
            eps_points: 40,
            eps: None,
            alpha_min: 0.1,
            alpha_max: 2.0,
            alpha_step: 0.05,
            lambdas: vec![0, 1, 2],
            rounds: 3,
            exhaustive: false,
        }
    }
}

impl SearchConfig {
    pub fn alphas(&self) -> Result<Vec<f64>, CliError> {
        if !(self.alpha_step > 0.0) || !(self.alpha_min > 0.0) || self.alpha_max < self.alpha_min {
            return Err(CliError::Config(format!(
                "bad alpha grid {}..{} step {}",
                self.alpha_min, self.alpha_max, self.alpha_step
            )));
        }
        let count = ((self.alpha_max - self.alpha_min) / self.alpha_step + 1e-9).floor() as usize;
        Ok((0..=count)
            .map(|k| {
                let a = self.alpha_min + k as f64 * self.alpha_step;
                (a * 1e9).round() / 1e9
            })
            .collect())
    }

    pub fn space(&self, tech: &TechModel, max_iters: usize) -> Result<SearchSpace, CliError> {
        if self.z_step == 0 || self.z_min == 0 || self.z_max < self.z_min {
            return Err(CliError::Config(format!(
                "bad lifting grid {}..{} step {}",
                self.z_min, self.z_max, self.z_step
            )));
        }
        let epsilons = match &self.eps {
            Some(e) => e.clone(),
            None => eps_grid(tech, self.eg_min, self.eg_max, self.eps_points),
        };
        let space = SearchSpace {
            q_min: self.q_min,
            q_max: self.q_max,
            lifting: (self.z_min..=self.z_max).step_by(self.z_step).collect(),
            eps_init: epsilons.iter().copied().fold(f64::INFINITY, f64::min),
            epsilons,
            alphas: self.alphas()?,
            lambdas: self.lambdas.clone(),
            rounds: self.rounds,
            max_iters,
        };
        space.validate()?;
        Ok(space)
    }
}

/// Decoder parameters for single-configuration commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderSection {
    pub q: Vec<u32>,
    pub eps: Option<Vec<f64>>,
    pub eg: Option<Vec<f64>>,
    /// Channel scaling; chosen by minimizing `p_eN` when absent.
    pub alpha: Option<f64>,
    pub lambda: Option<u32>,
    /// Maximum layered iterations `L`.
    pub iters: usize,
    /// Code length.
    pub n: u64,
    pub schedule: Schedule,
}

impl Default for DecoderSection {
    fn default() -> Self {
        DecoderSection {
            q: vec![5],
            eps: None,
            eg: None,
            alpha: None,
            lambda: None,
            iters: 50,
            n: 3160,
            schedule: Schedule::RowLayered,
        }
    }
}

impl DecoderSection {
    /// Failure probabilities, from `eps` or converted from `eg`
    /// (default: fault-free).
    pub fn epsilons(&self, tech: &TechModel) -> Result<Vec<f64>, CliError> {
        match (&self.eps, &self.eg) {
            (Some(_), Some(_)) => Err(CliError::Config("give either eps or eg, not both".into())),
            (Some(e), None) => Ok(e.clone()),
            (None, Some(g)) => g.iter().map(|&x| Ok(tech.epsilon_of_eg(x)?)).collect(),
            (None, None) => Ok(vec![0.0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub snr_db: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { snr_db: vec![1.45] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        let d = StopRule::default();
        MonteCarloConfig {
            min_frame_errors: d.min_frame_errors,
            max_frames: d.max_frames,
        }
    }
}

impl MonteCarloConfig {
    pub fn stop(&self) -> StopRule {
        StopRule {
            min_frame_errors: self.min_frame_errors,
            max_frames: self.max_frames,
        }
    }
}

/// Threshold search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    /// Error probability after `L` layered iterations that defines the
    /// threshold.
    pub pe: f64,
    pub lo_db: f64,
    pub hi_db: f64,
    pub resolution_db: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            pe: 1e-6,
            lo_db: -1.0,
            hi_db: 4.0,
            resolution_db: 0.005,
        }
    }
}

/// One decoder configuration of an energy curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub label: String,
    /// Defaults to the first configured protograph.
    #[serde(default)]
    pub protograph: Option<String>,
    pub q: u32,
    pub n: u64,
    pub eg: f64,
    pub alpha: f64,
    pub lambda: u32,
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Preset names or paths of protograph files.
    pub protograph: Vec<String>,
    pub tech: TechConfig,
    pub target: TargetConfig,
    pub search: SearchConfig,
    pub decoder: DecoderSection,
    pub sweep: SweepConfig,
    pub montecarlo: MonteCarloConfig,
    pub threshold: ThresholdConfig,
    pub energy_curve: Vec<ParamSet>,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Output directory; reports go to stdout when absent.
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protograph: vec!["S17".into()],
            tech: TechConfig::default(),
            target: TargetConfig::default(),
            search: SearchConfig::default(),
            decoder: DecoderSection::default(),
            sweep: SweepConfig::default(),
            montecarlo: MonteCarloConfig::default(),
            threshold: ThresholdConfig::default(),
            energy_curve: Vec::new(),
            seed: 1,
            workers: 0,
            out: None,
            format: Format::Csv,
        }
    }
}

/// Flags shared by every subcommand; each overrides the matching key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Protograph presets (S17, S36, Sm, Sc) or files, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub protograph: Vec<String>,
    /// SNR values in dB, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub snr: Vec<f64>,
    /// Quantization widths, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub q: Vec<u32>,
    /// Memory failure probabilities, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Energy factors e_g in [0, 1], comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eg: Vec<f64>,
    /// Code length N (a multiple of the protograph width).
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Channel scaling factor.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Min-Sum offset.
    #[arg(long, global = true)]
    pub lambda: Option<u32>,
    /// Maximum layered decoding iterations L.
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    /// Coordinate-descent rounds.
    #[arg(long, global = true, alias = "iterations")]
    pub rounds: Option<usize>,
    /// Also run the exhaustive search (optimize).
    #[arg(long, global = true)]
    pub exhaustive: bool,
    /// Monte-Carlo frame limit per SNR.
    #[arg(long, global = true)]
    pub max_frames: Option<u64>,
    /// Monte-Carlo frame-error target per SNR.
    #[arg(long, global = true)]
    pub min_errors: Option<u64>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Configuration file (if any) with flags applied on top.
    pub fn resolve(flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, f: &Overrides) {
        if !f.protograph.is_empty() {
            self.protograph = f.protograph.clone();
        }
        if !f.snr.is_empty() {
            self.sweep.snr_db = f.snr.clone();
            self.target.snr_db = f.snr[0];
        }
        if !f.q.is_empty() {
            self.decoder.q = f.q.clone();
            self.search.q_min = *f.q.iter().min().unwrap();
            self.search.q_max = *f.q.iter().max().unwrap();
        }
        if !f.eps.is_empty() {
            self.decoder.eps = Some(f.eps.clone());
            self.decoder.eg = None;
            self.search.eps = Some(f.eps.clone());
        }
        if !f.eg.is_empty() {
            self.decoder.eg = Some(f.eg.clone());
            self.decoder.eps = None;
            let tech = self.tech.model().unwrap_or_default();
            self.search.eps = Some(f.eg.iter().map(|&g| tech.epsilon0 * (-tech.c * g).exp()).collect());
        }
        if let Some(n) = f.n {
            self.decoder.n = n;
        }
        if let Some(a) = f.alpha {
            self.decoder.alpha = Some(a);
            (self.search.alpha_min, self.search.alpha_max) = (a, a);
        }
        if let Some(l) = f.lambda {
            self.decoder.lambda = Some(l);
            self.search.lambdas = vec![l];
        }
        if let Some(i) = f.iters {
            self.decoder.iters = i;
        }
        if let Some(r) = f.rounds {
            self.search.rounds = r;
        }
        if f.exhaustive {
            self.search.exhaustive = true;
        }
        if let Some(m) = f.max_frames {
            self.montecarlo.max_frames = m;
        }
        if let Some(m) = f.min_errors {
            self.montecarlo.min_frame_errors = m;
        }
        if let Some(s) = f.seed {
            self.seed = s;
        }
        if let Some(w) = f.workers {
            self.workers = w;
        }
        if let Some(o) = &f.out {
            self.out = Some(o.clone());
        }
        if let Some(fm) = f.format {
            self.format = fm;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.protograph.is_empty() {
            return Err(CliError::Config("no protograph given".into()));
        }
        self.tech.model()?;
        self.target()?;
        if self.decoder.iters == 0 {
            return Err(CliError::Config("iters must be at least 1".into()));
        }
        if self.decoder.q.is_empty() {
            return Err(CliError::Config("no quantization width given".into()));
        }
        if self.sweep.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(CliError::Config("SNR values must be finite".into()));
        }
        Ok(())
    }

    pub fn target(&self) -> Result<Target, CliError> {
        Ok(Target::new(self.target.pe, self.target.snr_db)?)
    }

    pub fn protographs(&self) -> Result<Vec<Protograph>, CliError> {
        self.protograph.iter().map(|s| load_protograph(s)).collect()
    }

}

/// Preset name or path of a whitespace-separated matrix file.
pub fn load_protograph(spec: &str) -> Result<Protograph, CliError> {
    if let Some(p) = Protograph::preset(spec) {
        return Ok(p);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|_| CliError::Config(format!("'{spec}' is neither a preset nor a readable protograph file")))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    Ok(Protograph::parse(name, &text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_standard_space() {
        let cfg = ExperimentConfig::default();
        let tech = cfg.tech.model().unwrap();
        let a = cfg.search.space(&tech, 50).unwrap();
        assert_eq!(a, SearchSpace::standard(&tech));
    }

    #[test]
    fn toml_round_trip_and_unknown_keys() {
        let text = r#"
            protograph = ["S36", "Sc"]
            seed = 7
            [target]
            pe = 1e-4
            [search]
            q_min = 4
            rounds = 1
            [decoder]
            q = [5, 6]
            eg = [0.8]
            [[energy_curve]]
            label = "opt"
            q = 5
            n = 3160
            eg = 0.82
            alpha = 1.7
            lambda = 1
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.protograph, vec!["S36", "Sc"]);
        assert_eq!((cfg.seed, cfg.target.pe, cfg.target.snr_db), (7, 1e-4, 1.45));
        assert_eq!((cfg.search.q_min, cfg.search.q_max, cfg.search.rounds), (4, 8, 1));
        assert_eq!(cfg.energy_curve[0].label, "opt");
        let back = ExperimentConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(matches!(ExperimentConfig::from_toml("bogus = 1"), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = ExperimentConfig::from_toml("seed = 3\n[decoder]\nalpha = 1.2\n").unwrap();
        let flags = Overrides {
            seed: Some(9),
            q: vec![4, 6],
            snr: vec![1.2, 1.4],
            alpha: Some(1.7),
            eg: vec![0.8],
            ..Overrides::default()
        };
        cfg.apply(&flags);
        assert_eq!(cfg.seed, 9);
        assert_eq!((cfg.search.q_min, cfg.search.q_max), (4, 6));
        assert_eq!(cfg.target.snr_db, 1.2);
        assert_eq!(cfg.decoder.alpha, Some(1.7));
        assert_eq!(cfg.search.alphas().unwrap(), vec![1.7]);
        let tech = cfg.tech.model().unwrap();
        let e = cfg.decoder.epsilons(&tech).unwrap();
        assert!((e[0] - tech.epsilon_of_eg(0.8).unwrap()).abs() < 1e-18);
    }

    #[test]
    fn alpha_grid() {
        let s = SearchConfig::default();
        let a = s.alphas().unwrap();
        assert_eq!(a.len(), 39);
        assert_eq!((a[0], a[18], a[38]), (0.1, 1.0, 2.0));
    }

    #[test]
    fn validation_errors() {
        let bad = ExperimentConfig {
            protograph: vec![],
            ..ExperimentConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig {
            target: TargetConfig { pe: 0.7, snr_db: 1.0 },
            ..ExperimentConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(load_protograph("no-such-file").is_err());
        assert_eq!(load_protograph("sm").unwrap().name(), "Sm");
    }
}
