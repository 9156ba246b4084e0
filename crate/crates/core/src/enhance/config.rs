use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mask::{validate_cutoff, FilterKind};
use super::EnhanceError;

/// Parameters of the enhancement chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnhanceConfig {
    pub filter: FilterKind,
    /// Normalized radius in `(0, 1]`.
    pub cutoff: f64,
    /// Butterworth order.
    pub order: u32,
    /// Gain on the high-frequency detail added back to the image.
    pub alpha: f64,
    /// Gaussian pre-smoothing sigma in pixels; 0 disables the stage.
    pub pre_smooth: f64,
    pub brightness: f64,
    pub contrast: f64,
    pub equalize: bool,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            filter: FilterKind::Gaussian,
            cutoff: 0.3,
            order: 2,
            alpha: 1.0,
            pre_smooth: 0.0,
            brightness: 0.0,
            contrast: 1.0,
            equalize: true,
        }
    }
}

/// Keys of the flat config file; identical to the CLI flag names.
pub const CONFIG_KEYS: [&str; 8] = [
    "filter",
    "cutoff",
    "order",
    "alpha",
    "pre-smooth",
    "brightness",
    "contrast",
    "equalize",
];

impl EnhanceConfig {
    pub fn validate(&self) -> Result<(), EnhanceError> {
        validate_cutoff(self.cutoff)?;
        if self.order == 0 {
            return Err(EnhanceError::InvalidConfig("order must be >= 1".into()));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(EnhanceError::InvalidConfig(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.pre_smooth >= 0.0) || !self.pre_smooth.is_finite() {
            return Err(EnhanceError::InvalidConfig(format!(
                "pre-smooth must be >= 0, got {}",
                self.pre_smooth
            )));
        }
        if !(-1.0..=1.0).contains(&self.brightness) {
            return Err(EnhanceError::InvalidConfig(format!(
                "brightness must be in [-1, 1], got {}",
                self.brightness
            )));
        }
        if !(self.contrast > 0.0) || !self.contrast.is_finite() {
            return Err(EnhanceError::InvalidGamma(self.contrast));
        }
        Ok(())
    }

    /// Sets one `key = value` pair. Keys are the CLI flag names; `_` is
    /// accepted in place of `-`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), EnhanceError> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let bad = |what: &str| EnhanceError::InvalidConfig(format!("invalid {what} value `{value}`"));
        match key.as_str() {
            "filter" => self.filter = value.parse()?,
            "cutoff" => self.cutoff = value.parse().map_err(|_| bad("cutoff"))?,
            "order" => self.order = value.parse().map_err(|_| bad("order"))?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad("alpha"))?,
            "pre-smooth" => self.pre_smooth = value.parse().map_err(|_| bad("pre-smooth"))?,
            "brightness" => self.brightness = value.parse().map_err(|_| bad("brightness"))?,
            "contrast" => self.contrast = value.parse().map_err(|_| bad("contrast"))?,
            "equalize" => self.equalize = parse_bool(value).ok_or_else(|| bad("equalize"))?,
            other => return Err(EnhanceError::InvalidConfig(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses the `key = value` text format. Blank lines and `#` comments
    /// are ignored; missing keys keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self, EnhanceError> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                EnhanceError::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key, value)
                .map_err(|e| EnhanceError::InvalidConfig(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "filter = {}", self.filter);
        let _ = writeln!(out, "cutoff = {}", self.cutoff);
        let _ = writeln!(out, "order = {}", self.order);
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "pre-smooth = {}", self.pre_smooth);
        let _ = writeln!(out, "brightness = {}", self.brightness);
        let _ = writeln!(out, "contrast = {}", self.contrast);
        let _ = writeln!(out, "equalize = {}", self.equalize);
        out
    }

    pub fn load(path: &Path) -> Result<Self, EnhanceError> {
        let text = fs::read_to_string(path)
            .map_err(|e| EnhanceError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text)
    }
}

pub fn parse_bool(value: &str) -> Option<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}
