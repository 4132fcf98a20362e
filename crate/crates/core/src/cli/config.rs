//! Experiment configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value      # trailing comments are allowed
//! ```
//!
//! Keys are section-less and may appear at most once. Complex channel gains
//! are written `re,im`; lists are comma separated. A run manifest uses the
//! same grammar with a few extra bookkeeping keys, so it can be fed back in
//! as a config.

use super::db_to_linear;
use crate::montecarlo::{BaselineTraining, ChannelMode, DetectorKind, ExperimentConfig, SweepAxis};
use crate::signal_model::{ChannelState, LinkParams, RcdBranch, SourceKind, DEFAULT_ETA};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Keys a manifest carries that do not affect the simulation.
const BOOKKEEPING_KEYS: [&str; 5] = ["version", "timestamp", "csv", "manifest", "plot"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.key {
            Some(k) => write!(f, "config key `{k}`: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn key_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        message: message.into(),
    }
}

/// Channel description as written in the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    Rayleigh,
    FixedRcd { rcd: f64, branch: RcdBranch },
    Fixed { h_st: Complex64, h_sr: Complex64, h_tr: Complex64, eta: f64 },
}

/// A parsed run description, kept in file units (dB) so it can be written
/// back verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub samples_per_half: usize,
    pub training_len: usize,
    pub block_len: usize,
    pub gamma_db: f64,
    pub prior_of_one: f64,
    pub source: SourceKind,
    pub noise_power: f64,
    pub channel: ChannelSpec,
    pub detectors: Vec<DetectorKind>,
    pub blocks: u64,
    pub seed: u64,
    pub baseline_training: BaselineTraining,
    pub axis: Option<SweepAxis>,
    pub values: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let link = LinkParams::default();
        let exp = ExperimentConfig::default();
        RunConfig {
            samples_per_half: link.samples_per_half,
            training_len: link.training_len,
            block_len: link.block_len,
            gamma_db: 5.0,
            prior_of_one: link.prior_of_one,
            source: exp.source_kind,
            noise_power: exp.noise_power,
            channel: ChannelSpec::Rayleigh,
            detectors: exp.detectors,
            blocks: exp.blocks,
            seed: exp.seed,
            baseline_training: exp.baseline_training,
            axis: None,
            values: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| key_err(key, format!("cannot parse `{v}`")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_num(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(key_err(key, format!("`{v}` is not finite")))
    }
}

fn parse_complex(key: &str, v: &str) -> Result<Complex64, ConfigError> {
    let (re, im) = v
        .split_once(',')
        .ok_or_else(|| key_err(key, format!("expected `re,im`, got `{v}`")))?;
    Ok(Complex64::new(
        parse_f64(key, re.trim())?,
        parse_f64(key, im.trim())?,
    ))
}

pub fn parse_values(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let vals = v
        .split(',')
        .map(|s| parse_f64(key, s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.is_empty() {
        return Err(key_err(key, "empty list"));
    }
    Ok(vals)
}

pub fn parse_axis(key: &str, v: &str) -> Result<SweepAxis, ConfigError> {
    SweepAxis::from_name(v)
        .ok_or_else(|| key_err(key, format!("unknown axis `{v}`; expected N, T, gamma_db, rcd or prior")))
}

fn split_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError {
            key: None,
            message: format!("line {}: expected `key = value`", i + 1),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError {
                key: None,
                message: format!("line {}: empty key", i + 1),
            });
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(key_err(k, "given more than once"));
        }
    }
    Ok(map)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = split_entries(text)?;
        let mut cfg = RunConfig::default();
        let mut take = |k: &str| map.remove(k);

        if let Some(v) = take("samples_per_half") {
            cfg.samples_per_half = parse_num("samples_per_half", &v)?;
        }
        if let Some(v) = take("training_len") {
            cfg.training_len = parse_num("training_len", &v)?;
        }
        if let Some(v) = take("block_len") {
            cfg.block_len = parse_num("block_len", &v)?;
        }
        if let Some(v) = take("gamma_db") {
            cfg.gamma_db = parse_f64("gamma_db", &v)?;
        }
        if let Some(v) = take("prior_of_one") {
            cfg.prior_of_one = parse_f64("prior_of_one", &v)?;
        }
        let psk_order = take("psk_order")
            .map(|v| parse_num::<u32>("psk_order", &v))
            .transpose()?;
        match take("source").as_deref() {
            None | Some("gaussian") => {
                if psk_order.is_some() {
                    return Err(key_err("psk_order", "only valid with `source = psk`"));
                }
            }
            Some("psk") => {
                cfg.source = SourceKind::ConstantModulus {
                    order: psk_order.unwrap_or(crate::signal_model::DEFAULT_PSK_ORDER),
                }
            }
            Some(other) => {
                return Err(key_err("source", format!("expected `gaussian` or `psk`, got `{other}`")))
            }
        }
        if let Some(v) = take("noise_power") {
            cfg.noise_power = parse_f64("noise_power", &v)?;
        }

        let rcd = take("rcd").map(|v| parse_f64("rcd", &v)).transpose()?;
        let branch = match take("rcd_branch").as_deref() {
            None | Some("h1_stronger") => RcdBranch::H1Stronger,
            Some("h0_stronger") => RcdBranch::H0Stronger,
            Some(other) => {
                return Err(key_err(
                    "rcd_branch",
                    format!("expected `h1_stronger` or `h0_stronger`, got `{other}`"),
                ))
            }
        };
        let gains = ["h_st", "h_sr", "h_tr"]
            .map(|k| take(k).map(|v| parse_complex(k, &v)).transpose());
        let [h_st, h_sr, h_tr] = [gains[0].clone()?, gains[1].clone()?, gains[2].clone()?];
        let eta = take("eta").map(|v| parse_f64("eta", &v)).transpose()?;
        cfg.channel = match take("channel").as_deref() {
            None | Some("rayleigh") => {
                for (k, present) in [("rcd", rcd.is_some()), ("h_tr", h_tr.is_some())] {
                    if present {
                        return Err(key_err(k, "not used by `channel = rayleigh`"));
                    }
                }
                ChannelSpec::Rayleigh
            }
            Some("fixed_rcd") => ChannelSpec::FixedRcd {
                rcd: rcd.ok_or_else(|| key_err("rcd", "required by `channel = fixed_rcd`"))?,
                branch,
            },
            Some("fixed") => {
                let need = |k: &str, x: Option<Complex64>| {
                    x.ok_or_else(|| key_err(k, "required by `channel = fixed`"))
                };
                ChannelSpec::Fixed {
                    h_st: need("h_st", h_st)?,
                    h_sr: need("h_sr", h_sr)?,
                    h_tr: need("h_tr", h_tr)?,
                    eta: eta.unwrap_or(DEFAULT_ETA),
                }
            }
            Some(other) => {
                return Err(key_err(
                    "channel",
                    format!("expected `rayleigh`, `fixed_rcd` or `fixed`, got `{other}`"),
                ))
            }
        };

        if let Some(v) = take("detectors") {
            cfg.detectors = v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    DetectorKind::from_name(s)
                        .ok_or_else(|| key_err("detectors", format!("unknown detector `{s}`")))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = take("blocks") {
            cfg.blocks = parse_num("blocks", &v)?;
        }
        if let Some(v) = take("bits") {
            if cfg.blocks != RunConfig::default().blocks {
                return Err(key_err("bits", "give either `bits` or `blocks`"));
            }
            let bits: u64 = parse_num("bits", &v)?;
            cfg.blocks = bits.div_ceil(cfg.block_len.max(1) as u64).max(1);
        }
        if let Some(v) = take("seed") {
            cfg.seed = parse_num("seed", &v)?;
        }
        cfg.baseline_training = match take("baseline_training").as_deref() {
            None | Some("data_mean") => BaselineTraining::DataMean,
            Some("pilot_midpoint") => BaselineTraining::PilotMidpoint,
            Some(other) => {
                return Err(key_err(
                    "baseline_training",
                    format!("expected `data_mean` or `pilot_midpoint`, got `{other}`"),
                ))
            }
        };
        if let Some(v) = take("axis") {
            cfg.axis = Some(parse_axis("axis", &v)?);
        }
        if let Some(v) = take("values") {
            cfg.values = Some(parse_values("values", &v)?);
        }
        for k in BOOKKEEPING_KEYS {
            map.remove(k);
        }
        if let Some(k) = map.keys().next() {
            return Err(key_err(k, "unknown key"));
        }
        cfg.experiment()?;
        Ok(cfg)
    }

    /// Library config; validation failures are attributed to a key.
    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let channel_mode = match self.channel {
            ChannelSpec::Rayleigh => ChannelMode::RayleighRandom,
            ChannelSpec::FixedRcd { rcd, branch } => ChannelMode::FixedRcd { rcd, branch },
            ChannelSpec::Fixed { h_st, h_sr, h_tr, eta } => ChannelMode::FixedChannels(
                ChannelState::new(h_st, h_sr, h_tr, eta).map_err(|e| key_err("eta", e.to_string()))?,
            ),
        };
        let cfg = ExperimentConfig {
            link: LinkParams {
                samples_per_half: self.samples_per_half,
                gamma: db_to_linear(self.gamma_db),
                prior_of_one: self.prior_of_one,
                block_len: self.block_len,
                training_len: self.training_len,
            },
            source_kind: self.source,
            noise_power: self.noise_power,
            channel_mode,
            detectors: self.detectors.clone(),
            blocks: self.blocks,
            seed: self.seed,
            baseline_training: self.baseline_training,
        };
        cfg.validate().map_err(|e| {
            let msg = e.to_string();
            let key = attribute(&msg);
            ConfigError {
                key: key.map(str::to_string),
                message: msg,
            }
        })?;
        Ok(cfg)
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("samples_per_half", self.samples_per_half.to_string());
        kv("training_len", self.training_len.to_string());
        kv("block_len", self.block_len.to_string());
        kv("gamma_db", self.gamma_db.to_string());
        kv("prior_of_one", self.prior_of_one.to_string());
        match self.source {
            SourceKind::ComplexGaussian => kv("source", "gaussian".into()),
            SourceKind::ConstantModulus { order } => {
                kv("source", "psk".into());
                kv("psk_order", order.to_string());
            }
        }
        kv("noise_power", self.noise_power.to_string());
        let c = |z: Complex64| format!("{},{}", z.re, z.im);
        match self.channel {
            ChannelSpec::Rayleigh => kv("channel", "rayleigh".into()),
            ChannelSpec::FixedRcd { rcd, branch } => {
                kv("channel", "fixed_rcd".into());
                kv("rcd", rcd.to_string());
                kv(
                    "rcd_branch",
                    match branch {
                        RcdBranch::H1Stronger => "h1_stronger",
                        RcdBranch::H0Stronger => "h0_stronger",
                    }
                    .into(),
                );
            }
            ChannelSpec::Fixed { h_st, h_sr, h_tr, eta } => {
                kv("channel", "fixed".into());
                kv("h_st", c(h_st));
                kv("h_sr", c(h_sr));
                kv("h_tr", c(h_tr));
                kv("eta", eta.to_string());
            }
        }
        let dets: Vec<&str> = self.detectors.iter().map(|d| d.name()).collect();
        kv("detectors", dets.join(","));
        kv("blocks", self.blocks.to_string());
        kv("seed", self.seed.to_string());
        kv(
            "baseline_training",
            match self.baseline_training {
                BaselineTraining::DataMean => "data_mean",
                BaselineTraining::PilotMidpoint => "pilot_midpoint",
            }
            .into(),
        );
        if let Some(a) = self.axis {
            kv("axis", a.name().into());
        }
        if let Some(v) = &self.values {
            let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            kv("values", v.join(","));
        }
        s
    }
}

/// Maps a library validation message back to the config key it concerns.
fn attribute(msg: &str) -> Option<&'static str> {
    const MAP: [(&str, &str); 10] = [
        ("`N`", "samples_per_half"),
        ("`K`", "block_len"),
        ("`prior_of_one`", "prior_of_one"),
        ("`gamma`", "gamma_db"),
        ("`Ps`", "gamma_db"),
        ("`Nw`", "noise_power"),
        ("`modulation_order`", "psk_order"),
        ("training_len", "training_len"),
        ("blocks", "blocks"),
        ("detectors", "detectors"),
    ];
    MAP.iter()
        .find(|(needle, _)| msg.contains(needle))
        .map(|&(_, k)| k)
        .or_else(|| msg.contains("rcd").then_some("rcd"))
        .or_else(|| msg.contains("RCD").then_some("rcd"))
}
