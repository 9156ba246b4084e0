//! Frequency-domain enhancement.
//!
//! The chain run by [`enhance`] is, in order:
//!
//! 1. optional gaussian pre-smoothing (circular convolution via the DFT),
//! 2. a centered low-pass mask `L` from the configured family,
//! 3. the detail component `d = apply_filter(f, 1 - L)`,
//! 4. recombination `r = f + alpha * d` (unsharp masking),
//! 5. min-max normalization,
//! 6. optional histogram equalization,
//! 7. brightness / contrast.
//!
//! Every stage returns a fresh grid; inputs are never mutated.

mod config;
mod mask;
mod ops;

pub use config::{parse_bool, EnhanceConfig, CONFIG_KEYS};
pub use mask::{
    build_lowpass, highpass_from_lowpass, radial_distance, FilterKind, FilterMask, MaskOrigin,
    PassBand,
};
pub use ops::{
    adjust_brightness_contrast, apply_filter, convolve_freq, equalization_table,
    gaussian_kernel_wrapped, histogram_equalize, normalize_minmax, FLAT_SPREAD,
};

use thiserror::Error;

use crate::dft::DftError;
use crate::image_io::ImageGrid;

#[derive(Debug, Error, PartialEq)]
pub enum EnhanceError {
    #[error("cutoff must be in (0, 1], got {0}")]
    InvalidCutoff(f64),
    #[error("contrast must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("shape mismatch: image {image:?} vs {other:?}")]
    ShapeMismatch {
        image: (usize, usize),
        other: (usize, usize),
    },
    #[error("kernel {kernel:?} larger than image {image:?}")]
    KernelTooLarge {
        kernel: (usize, usize),
        image: (usize, usize),
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dft(#[from] DftError),
}

/// Runs the full enhancement chain; the output lies in `[0, 1]`.
pub fn enhance(img: &ImageGrid, cfg: &EnhanceConfig) -> Result<ImageGrid, EnhanceError> {
    cfg.validate()?;
    let (h, w) = img.shape();
    let base = if cfg.pre_smooth > 0.0 {
        let kernel = gaussian_kernel_wrapped(h, w, cfg.pre_smooth)?;
        convolve_freq(img, &kernel)?
    } else {
        img.clone()
    };

    let lowpass = build_lowpass(h, w, cfg.filter, cfg.cutoff, cfg.order)?;
    let detail = apply_filter(&base, &highpass_from_lowpass(&lowpass))?;
    let alpha = cfg.alpha;
    let sharpened = base.zip_with(&detail, |f, d| f + alpha * d);

    let mut out = normalize_minmax(&sharpened);
    if cfg.equalize {
        out = histogram_equalize(&out);
    }
    adjust_brightness_contrast(&out, cfg.brightness, cfg.contrast)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neutral() -> EnhanceConfig {
        EnhanceConfig {
            alpha: 0.0,
            pre_smooth: 0.0,
            brightness: 0.0,
            contrast: 1.0,
            equalize: false,
            ..EnhanceConfig::default()
        }
    }

    fn fixture(h: usize, w: usize) -> ImageGrid {
        ImageGrid::from_fn(h, w, |r, c| {
            let (y, x) = (r as f64 / h as f64, c as f64 / w as f64);
            0.5 + 0.3 * (6.0 * x).sin() * (4.0 * y).cos() + if (r / 3 + c / 3) % 2 == 0 { 0.1 } else { -0.1 }
        })
    }

    #[test]
    fn neutral_pipeline_is_minmax() {
        let img = fixture(12, 17);
        assert_eq!(enhance(&img, &neutral()).unwrap(), normalize_minmax(&img));
    }

    #[test]
    fn constant_input_gives_mid_gray() {
        let img = ImageGrid::filled(9, 11, 0.8);
        let cfg = EnhanceConfig {
            equalize: false,
            ..EnhanceConfig::default()
        };
        let out = enhance(&img, &cfg).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.5), "{:?}", &out.data()[..4]);
    }

    #[test]
    fn default_output_in_unit_range() {
        let img = fixture(20, 13);
        for kind in [FilterKind::Ideal, FilterKind::Gaussian, FilterKind::Butterworth] {
            let cfg = EnhanceConfig {
                filter: kind,
                pre_smooth: 1.0,
                brightness: 0.2,
                contrast: 1.5,
                alpha: 3.0,
                ..EnhanceConfig::default()
            };
            let out = enhance(&img, &cfg).unwrap();
            assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let img = fixture(4, 4);
        let cfg = EnhanceConfig {
            cutoff: 0.0,
            ..EnhanceConfig::default()
        };
        assert_eq!(enhance(&img, &cfg).unwrap_err(), EnhanceError::InvalidCutoff(0.0));
    }
}
