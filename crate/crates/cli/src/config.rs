//! Flat TOML scenario files.
//!
//! Keys follow the symbol names of the parameter table (`P_s_t_dBm`, `N_t`,
//! `D_max`, ...). Every key has a default, so a file only lists what it
//! changes. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use urllc_core::channel::dbm_to_watt;
use urllc_core::{
    AvailabilityScenario, ChannelParams, DelayBudget, McBudget, ModeId, QosRequirement,
    SystemParams,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("cannot write config: {0}")]
    Serialize(String),
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Range,
    Availability,
    Loss,
}

/// How a range is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Full availability integral and range search.
    Integral,
    /// Loss at the shadowing quantile that leaves `1 - P_A` below it.
    Quantile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVar {
    #[serde(rename = "N_t")]
    Nt,
    #[serde(rename = "rho_c")]
    RhoC,
    #[serde(rename = "rho_d")]
    RhoD,
    #[serde(rename = "R_cell")]
    RCell,
    #[serde(rename = "D_p")]
    Dp,
    #[serde(rename = "eps_max")]
    EpsMax,
    #[serde(rename = "r")]
    R,
}

impl SweepVar {
    pub fn key(self) -> &'static str {
        match self {
            SweepVar::Nt => "N_t",
            SweepVar::RhoC => "rho_c",
            SweepVar::RhoD => "rho_d",
            SweepVar::RCell => "R_cell",
            SweepVar::Dp => "D_p",
            SweepVar::EpsMax => "eps_max",
            SweepVar::R => "r",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "P_s_t_dBm")]
    pub p_s_t_dbm: f64,
    /// Total BS power, shared evenly by the `K` subchannels.
    #[serde(rename = "P_b_t_dBm")]
    pub p_b_t_dbm: f64,
    #[serde(rename = "N0_dBm_Hz")]
    pub n0_dbm_hz: f64,
    #[serde(rename = "W_max_Hz")]
    pub w_max_hz: f64,
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "N_t")]
    pub n_t: u32,
    #[serde(rename = "T_f")]
    pub t_f: f64,
    pub b: f64,
    pub alpha: f64,
    #[serde(rename = "mu0_dB")]
    pub mu0_db: f64,
    #[serde(rename = "sigma_dB")]
    pub sigma_db: f64,
    pub r0: f64,
    pub eps_max: f64,
    #[serde(rename = "P_A")]
    pub p_a: f64,
    #[serde(rename = "D_max")]
    pub d_max: f64,
    #[serde(rename = "D_p")]
    pub d_p: f64,
    #[serde(rename = "D_b")]
    pub d_b: f64,
    /// Fixed phases; without them ranges are maximized over the splits.
    #[serde(rename = "T1", skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(rename = "T2", skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    #[serde(rename = "R_cell")]
    pub r_cell: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_d: Option<f64>,
    pub modes: Vec<String>,
    pub quantity: Quantity,
    pub method: Method,
    /// Distance for availability and loss evaluations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub sweep: SweepVar,
    pub grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facet: Option<SweepVar>,
    pub facet_grid: Vec<f64>,
    /// Adds exact-Q Monte Carlo range columns (quantile method only).
    pub mc_range: bool,
    pub mc_samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            p_s_t_dbm: 23.0,
            p_b_t_dbm: 46.0,
            n0_dbm_hz: -173.0,
            w_max_hz: 20e6,
            k: 10,
            n_t: 8,
            t_f: 1e-4,
            b: 160.0,
            alpha: 3.76,
            mu0_db: -35.3,
            sigma_db: 8.0,
            r0: 100.0,
            eps_max: 1e-7,
            p_a: 0.99999,
            d_max: 1e-3,
            d_p: 1e-4,
            d_b: 1e-4,
            t1: None,
            t2: None,
            r_cell: 250.0,
            rho_c: None,
            rho_d: None,
            modes: vec!["df_multi".to_string()],
            quantity: Quantity::Range,
            method: Method::Integral,
            r: None,
            sweep: SweepVar::Nt,
            grid: Vec::new(),
            facet: None,
            facet_grid: Vec::new(),
            mc_range: false,
            mc_samples: 100_000,
            seed: 0,
            output: None,
        }
    }
}

impl FromStr for ScenarioConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> Result<String, ConfigError> {
        if i64::try_from(self.seed).is_err() {
            return Err(field("seed", "must fit in a signed 64-bit integer"));
        }
        toml::to_string(self).map_err(|e| ConfigError::Serialize(e.to_string()))
    }

    pub fn mode_ids(&self) -> Result<Vec<ModeId>, ConfigError> {
        self.modes
            .iter()
            .map(|m| m.parse::<ModeId>().map_err(|e| field("modes", e)))
            .collect()
    }

    /// Checks the scenario values, ignoring the sweep description.
    pub fn validate_base(&self) -> Result<(), ConfigError> {
        let positive: [(&'static str, f64); 8] = [
            ("W_max_Hz", self.w_max_hz),
            ("T_f", self.t_f),
            ("b", self.b),
            ("alpha", self.alpha),
            ("sigma_dB", self.sigma_db),
            ("r0", self.r0),
            ("D_max", self.d_max),
            ("R_cell", self.r_cell),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(field(name, "must be positive and finite"));
            }
        }
        for (name, v) in [
            ("mu0_dB", self.mu0_db),
            ("P_s_t_dBm", self.p_s_t_dbm),
            ("P_b_t_dBm", self.p_b_t_dbm),
            ("N0_dBm_Hz", self.n0_dbm_hz),
        ] {
            if !v.is_finite() {
                return Err(field(name, "must be finite"));
            }
        }
        if self.k == 0 {
            return Err(field("K", "must be at least 1"));
        }
        if self.n_t == 0 {
            return Err(field("N_t", "must be at least 1"));
        }
        if !(self.eps_max > 0.0 && self.eps_max < 1.0) {
            return Err(field("eps_max", "must lie in (0, 1)"));
        }
        if !(self.p_a > 0.0 && self.p_a < 1.0) {
            return Err(field("P_A", "must lie in (0, 1)"));
        }
        for (name, v) in [("D_p", self.d_p), ("D_b", self.d_b)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(field(name, "must be non-negative"));
            }
        }
        if self.d_p + self.d_b >= self.d_max {
            return Err(field("D_max", "leaves no time for transmission after D_p and D_b"));
        }
        match (self.t1, self.t2) {
            (None, None) => {}
            (Some(t1), Some(t2)) => {
                for (name, t) in [("T1", t1), ("T2", t2)] {
                    let k = (t / self.t_f).round();
                    if !(k >= 1.0 && (t - k * self.t_f).abs() <= 1e-9 * self.t_f) {
                        return Err(field(name, "must be a positive multiple of T_f"));
                    }
                }
            }
            _ => return Err(field("T1", "T1 and T2 must be given together")),
        }
        for (name, v) in [("rho_c", self.rho_c), ("rho_d", self.rho_d)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(field(name, "must lie in [0, 1]"));
                }
            }
        }
        if let Some(r) = self.r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(field("r", "must be positive"));
            }
        }
        if i64::try_from(self.seed).is_err() {
            return Err(field("seed", "must fit in a signed 64-bit integer"));
        }
        if self.mc_samples < urllc_core::oracle::MIN_SAMPLES {
            return Err(field(
                "mc_samples",
                format!("must be at least {}", urllc_core::oracle::MIN_SAMPLES),
            ));
        }
        let modes = self.mode_ids()?;
        if modes.is_empty() {
            return Err(field("modes", "list at least one mode"));
        }
        if self.method == Method::Quantile {
            if self.quantity != Quantity::Range {
                return Err(field("method", "quantile applies to ranges only"));
            }
            if self.t1.is_none() && modes.iter().any(|m| !m.is_af()) {
                return Err(field("T1", "the quantile method needs fixed T1 and T2"));
            }
        }
        if self.mc_range {
            if self.method != Method::Quantile {
                return Err(field("mc_range", "needs method = \"quantile\""));
            }
            if let Some(m) = modes
                .iter()
                .find(|m| !matches!(m, ModeId::D2d | ModeId::DfCellular))
            {
                return Err(field(
                    "mc_range",
                    format!("Monte Carlo ranges support d2d and df_cellular, not {m}"),
                ));
            }
        }
        Ok(())
    }

    /// Full validation for a sweep.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_base()?;
        check_grid("grid", self.sweep, &self.grid)?;
        match self.facet {
            Some(f) => {
                if f == self.sweep {
                    return Err(field("facet", "must differ from the sweep variable"));
                }
                check_grid("facet_grid", f, &self.facet_grid)?;
            }
            None => {
                if !self.facet_grid.is_empty() {
                    return Err(field("facet_grid", "given without a facet"));
                }
            }
        }
        let uses_r = self.sweep == SweepVar::R || self.facet == Some(SweepVar::R);
        match self.quantity {
            Quantity::Range if uses_r => {
                Err(field("sweep", "r cannot be swept when computing ranges"))
            }
            Quantity::Availability | Quantity::Loss if !uses_r && self.r.is_none() => {
                Err(field("r", "availability and loss need a distance"))
            }
            _ => Ok(()),
        }
    }

    /// Copy with one sweep variable set to `v`.
    pub fn with_value(&self, var: SweepVar, v: f64) -> ScenarioConfig {
        let mut c = self.clone();
        match var {
            SweepVar::Nt => c.n_t = v.round() as u32,
            SweepVar::RhoC => c.rho_c = Some(v),
            SweepVar::RhoD => c.rho_d = Some(v),
            SweepVar::RCell => c.r_cell = v,
            SweepVar::Dp => c.d_p = v,
            SweepVar::EpsMax => c.eps_max = v,
            SweepVar::R => c.r = Some(v),
        }
        c
    }

    pub fn system(&self) -> SystemParams {
        SystemParams {
            p_s: dbm_to_watt(self.p_s_t_dbm),
            p_b_total: dbm_to_watt(self.p_b_t_dbm),
            n0: dbm_to_watt(self.n0_dbm_hz),
            w_total: self.w_max_hz,
            k: self.k,
            nt: self.n_t,
            t_f: self.t_f,
            b: self.b,
        }
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            alpha: self.alpha,
            mu0_db: self.mu0_db,
            sigma_db: self.sigma_db,
            r0: self.r0,
        }
    }

    pub fn scenario(&self, mode: ModeId) -> AvailabilityScenario {
        let half = 0.5 * (self.d_max - self.d_p - self.d_b);
        AvailabilityScenario {
            mode,
            channel: self.channel(),
            sys: self.system(),
            qos: QosRequirement {
                eps_max: self.eps_max,
                p_a: self.p_a,
            },
            budget: DelayBudget {
                d_max: self.d_max,
                d_p: if mode.is_af() { 0.0 } else { self.d_p },
                d_b: self.d_b,
                t1: self.t1.unwrap_or(half),
                t2: self.t2.unwrap_or(half),
            },
            r_cell: self.r_cell,
            rho_c: self.rho_c,
            rho_d: self.rho_d,
            mc: McBudget {
                samples: self.mc_samples,
                seed: self.seed,
            },
        }
    }
}

fn check_grid(name: &'static str, var: SweepVar, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(field(name, "must not be empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(field(name, "values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(field(name, "must be strictly increasing"));
    }
    let ok = |v: f64| match var {
        SweepVar::Nt => v >= 1.0 && v.fract() == 0.0,
        SweepVar::RhoC | SweepVar::RhoD => (0.0..=1.0).contains(&v),
        SweepVar::RCell | SweepVar::R => v > 0.0,
        SweepVar::Dp => v >= 0.0,
        SweepVar::EpsMax => v > 0.0 && v < 1.0,
    };
    if let Some(bad) = grid.iter().find(|v| !ok(**v)) {
        return Err(field(name, format!("{bad} is out of range for {var}")));
    }
    Ok(())
}
