//! Memory-energy model: failure probability as a function of the write
//! energy factor, and the per-information-bit energy of a decoding run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protograph::Protograph;

/// Technology constants of the fault/energy tradeoff
/// `ε = ε₀·exp(−c·e_g)`, `E_bit = e_g·E0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechModel {
    pub epsilon0: f64,
    pub c: f64,
    /// Nominal per-bit write energy in picojoules.
    pub e0_pj: f64,
}

impl Default for TechModel {
    fn default() -> Self {
        TechModel::sram65()
    }
}

impl TechModel {
    pub fn new(epsilon0: f64, c: f64, e0_pj: f64) -> Result<Self> {
        let t = TechModel { epsilon0, c, e0_pj };
        t.validate()?;
        Ok(t)
    }

    /// 65 nm SRAM constants: `ε₀ = 1/2`, `c = 12`, `E0 = 0.156 pJ`.
    pub fn sram65() -> Self {
        TechModel {
            epsilon0: 0.5,
            c: 12.0,
            e0_pj: 0.156,
        }
    }

    /// Named preset lookup.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sram65" => Some(TechModel::sram65()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon0 > 0.0 && self.epsilon0 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon0 = {} outside (0, 1]",
                self.epsilon0
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c = {} must be positive", self.c)));
        }
        if !(self.e0_pj > 0.0 && self.e0_pj.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "E0 = {} pJ must be positive",
                self.e0_pj
            )));
        }
        Ok(())
    }

    /// Memory failure probability at energy factor `e_g ∈ [0, 1]`.
    pub fn epsilon_of_eg(&self, e_g: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&e_g) {
            return Err(Error::InvalidParameter(format!("e_g = {e_g} outside [0, 1]")));
        }
        Ok(self.epsilon0 * (-self.c * e_g).exp())
    }

    /// Inverse of [`TechModel::epsilon_of_eg`]; out-of-range `ε` is clamped
    /// to the nearest end of `[0, 1]` with a warning.
    pub fn eg_of_epsilon(&self, epsilon: f64) -> f64 {
        let e_g = (self.epsilon0 / epsilon).ln() / self.c;
        if e_g.is_nan() || !(0.0..=1.0).contains(&e_g) {
            let clamped = if e_g.is_nan() || e_g < 0.0 { 0.0 } else { 1.0 };
            log::warn!("epsilon = {epsilon} outside the technology range; e_g clamped to {clamped}");
            return clamped;
        }
        e_g
    }

    /// Energy per written bit in picojoules.
    pub fn e_bit_pj(&self, e_g: f64) -> f64 {
        e_g * self.e0_pj
    }
}

/// Bits written per information bit per layered iteration, from the
/// protograph degrees:
/// `(Σ_i d_v,i (q + q_s) + (1 − R) Σ_j (2q + d_c,j − 2)) / (R n)`.
pub fn per_iteration_factor(p: &Protograph, q: u32) -> f64 {
    let d = p.degree_profile();
    let (n, m) = (p.cols() as f64, p.rows() as f64);
    let rate = (n - m) / n;
    let q = f64::from(q);
    let qs = f64::from(d.guard_bits);
    let vn: f64 = d.var_degrees.iter().map(|&dv| f64::from(dv) * (q + qs)).sum();
    let cn: f64 = d
        .check_degrees
        .iter()
        .map(|&dc| 2.0 * q + f64::from(dc) - 2.0)
        .sum();
    (vn + (1.0 - rate) * cn) / (rate * n)
}

/// Bits a row-layered decoder physically writes per information bit per
/// iteration: every edge posterior at `q + q_s` bits, plus per check the two
/// smallest magnitudes and one sign per edge.
pub fn physical_bits_per_info_bit(p: &Protograph, q: u32) -> f64 {
    let d = p.degree_profile();
    let (n, m) = (p.cols() as f64, p.rows() as f64);
    let q = f64::from(q);
    let qs = f64::from(d.guard_bits);
    let per_z: f64 = d
        .check_degrees
        .iter()
        .map(|&dc| f64::from(dc) * (q + qs) + 2.0 * (q - 1.0) + f64::from(dc))
        .sum();
    per_z / (n - m)
}

/// Itemized memory energy of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_g: f64,
    pub e_bit_pj: f64,
    /// Bits written per information bit per iteration.
    pub bits_per_iteration: f64,
    /// Average number of layered iterations.
    pub l_n: f64,
    /// Energy per information bit in picojoules.
    pub total_pj: f64,
}

/// Memory energy per information bit for `l_n` average iterations.
pub fn energy_per_info_bit(p: &Protograph, q: u32, e_g: f64, l_n: f64, tech: &TechModel) -> EnergyBreakdown {
    let bits = per_iteration_factor(p, q);
    let e_bit = tech.e_bit_pj(e_g);
    EnergyBreakdown {
        e_g,
        e_bit_pj: e_bit,
        bits_per_iteration: bits,
        l_n,
        total_pj: l_n * bits * e_bit,
    }
}

/// Energy per information bit measured from a simulator's write counter.
pub fn measured_energy_per_info_bit(bits_written: u64, info_bits: u64, e_g: f64, tech: &TechModel) -> f64 {
    bits_written as f64 * tech.e_bit_pj(e_g) / info_bits as f64
}
