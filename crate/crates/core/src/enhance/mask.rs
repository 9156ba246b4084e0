//! Centered frequency-domain transfer functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EnhanceError;

/// Radial low-pass family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Ideal,
    Gaussian,
    Butterworth,
}

impl FilterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Ideal => "ideal",
            FilterKind::Gaussian => "gaussian",
            FilterKind::Butterworth => "butterworth",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = EnhanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ideal" => Ok(FilterKind::Ideal),
            "gaussian" => Ok(FilterKind::Gaussian),
            "butterworth" => Ok(FilterKind::Butterworth),
            other => Err(EnhanceError::InvalidConfig(format!("unknown filter kind `{other}`"))),
        }
    }
}

/// Where a mask came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaskOrigin {
    Radial {
        kind: FilterKind,
        cutoff: f64,
        order: u32,
    },
    /// Arbitrary values supplied by the caller.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PassBand {
    Low,
    High,
}

/// Real transfer function laid out with DC at `(H / 2, W / 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterMask {
    height: usize,
    width: usize,
    data: Vec<f64>,
    origin: MaskOrigin,
    band: PassBand,
}

impl FilterMask {
    /// Wraps caller-supplied centered values. Every value must be in `[0, 1]`.
    pub fn from_values(
        height: usize,
        width: usize,
        data: Vec<f64>,
        band: PassBand,
    ) -> Result<Self, EnhanceError> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(EnhanceError::InvalidConfig(format!(
                "mask shape {height}x{width} does not fit {} values",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(EnhanceError::InvalidConfig(format!("mask value {bad} outside [0, 1]")));
        }
        Ok(Self {
            height,
            width,
            data,
            origin: MaskOrigin::Custom,
            band,
        })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self, EnhanceError> {
        Self::from_values(height, width, vec![value; height * width], PassBand::Low)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn origin(&self) -> MaskOrigin {
        self.origin
    }

    pub fn band(&self) -> PassBand {
        self.band
    }

    /// Always true: masks are stored centered.
    pub fn is_centered(&self) -> bool {
        true
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.width + v]
    }

    pub fn dc_value(&self) -> f64 {
        self.get(self.height / 2, self.width / 2)
    }

    /// Per-bin `1 - value`, flipping the pass band.
    pub fn complement(&self) -> FilterMask {
        FilterMask {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| 1.0 - v).collect(),
            origin: self.origin,
            band: match self.band {
                PassBand::Low => PassBand::High,
                PassBand::High => PassBand::Low,
            },
        }
    }
}

/// Normalized radial distance of centered bin `(u, v)` from DC.
///
/// Each axis offset is scaled by half the axis length, so the Nyquist edge
/// of either axis sits at distance 1.
#[inline]
pub fn radial_distance(height: usize, width: usize, u: usize, v: usize) -> f64 {
    let du = (u as f64 - (height / 2) as f64) / (height as f64 / 2.0);
    let dv = (v as f64 - (width / 2) as f64) / (width as f64 / 2.0);
    (du * du + dv * dv).sqrt()
}

pub fn validate_cutoff(cutoff: f64) -> Result<(), EnhanceError> {
    if cutoff > 0.0 && cutoff <= 1.0 {
        Ok(())
    } else {
        Err(EnhanceError::InvalidCutoff(cutoff))
    }
}

/// Builds a centered low-pass mask.
///
/// * ideal: `1` if `d <= cutoff`, else `0`
/// * gaussian: `exp(-d^2 / (2 cutoff^2))`
/// * butterworth: `1 / (1 + (d / cutoff)^(2 order))`
pub fn build_lowpass(
    height: usize,
    width: usize,
    kind: FilterKind,
    cutoff: f64,
    order: u32,
) -> Result<FilterMask, EnhanceError> {
    validate_cutoff(cutoff)?;
    if height == 0 || width == 0 {
        return Err(EnhanceError::InvalidConfig(format!(
            "mask shape {height}x{width} must be positive"
        )));
    }
    if kind == FilterKind::Butterworth && order == 0 {
        return Err(EnhanceError::InvalidConfig("butterworth order must be >= 1".into()));
    }
    let mut data = Vec::with_capacity(height * width);
    for u in 0..height {
        for v in 0..width {
            let d = radial_distance(height, width, u, v);
            let value = match kind {
                FilterKind::Ideal => {
                    if d <= cutoff {
                        1.0
                    } else {
                        0.0
                    }
                }
                FilterKind::Gaussian => (-(d * d) / (2.0 * cutoff * cutoff)).exp(),
                FilterKind::Butterworth => 1.0 / (1.0 + (d / cutoff).powi(2 * order as i32)),
            };
            data.push(value);
        }
    }
    Ok(FilterMask {
        height,
        width,
        data,
        origin: MaskOrigin::Radial {
            kind,
            cutoff,
            order,
        },
        band: PassBand::Low,
    })
}

/// `H = 1 - L`, the detail-passing complement of a low-pass mask.
pub fn highpass_from_lowpass(lowpass: &FilterMask) -> FilterMask {
    lowpass.complement()
}
