//! Frequency-domain filtering, convolution and the tonal stages.

use crate::dft::{center, dft_forward, dft_inverse, uncenter};
use crate::image_io::{quantize, ImageGrid};

use super::mask::FilterMask;
use super::EnhanceError;

/// Spread below which [`normalize_minmax`] treats a grid as constant.
pub const FLAT_SPREAD: f64 = 1e-12;

/// Multiplies the centered spectrum of `img` by `mask` and transforms back.
///
/// The output is not renormalized. Multiplication in the frequency domain
/// means the implied boundary model is circular.
pub fn apply_filter(img: &ImageGrid, mask: &FilterMask) -> Result<ImageGrid, EnhanceError> {
    if img.shape() != mask.shape() {
        return Err(EnhanceError::ShapeMismatch {
            image: img.shape(),
            other: mask.shape(),
        });
    }
    let mut spec = center(&dft_forward(img))?;
    for (z, &m) in spec.data_mut().iter_mut().zip(mask.data()) {
        *z *= m;
    }
    Ok(dft_inverse(&uncenter(&spec)?)?)
}

/// Circular convolution via the transform: `kernel` is zero-padded to the
/// image shape with its `(0, 0)` entry anchored at the origin.
///
/// This is true convolution (the kernel is flipped relative to the
/// cross-correlation used by the CNN layers).
pub fn convolve_freq(img: &ImageGrid, kernel: &ImageGrid) -> Result<ImageGrid, EnhanceError> {
    let (h, w) = img.shape();
    let (kh, kw) = kernel.shape();
    if kh > h || kw > w {
        return Err(EnhanceError::KernelTooLarge {
            kernel: (kh, kw),
            image: (h, w),
        });
    }
    let padded = ImageGrid::from_fn(h, w, |r, c| if r < kh && c < kw { kernel.get(r, c) } else { 0.0 });
    let mut spec = dft_forward(img);
    let kspec = dft_forward(&padded);
    for (z, k) in spec.data_mut().iter_mut().zip(kspec.data()) {
        *z *= k;
    }
    Ok(dft_inverse(&spec)?)
}

/// Normalized gaussian of standard deviation `sigma` (pixels), laid out
/// over the full `height x width` grid with its peak wrapped onto `(0, 0)`.
///
/// Truncated at `3 sigma`. Convolving with it smooths without shifting.
pub fn gaussian_kernel_wrapped(height: usize, width: usize, sigma: f64) -> Result<ImageGrid, EnhanceError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(EnhanceError::InvalidConfig(format!("smoothing sigma must be positive, got {sigma}")));
    }
    let radius = 3.0 * sigma;
    let kernel = ImageGrid::from_fn(height, width, |r, c| {
        let dr = r.min(height - r) as f64;
        let dc = c.min(width - c) as f64;
        let d2 = dr * dr + dc * dc;
        if d2 <= radius * radius {
            (-d2 / (2.0 * sigma * sigma)).exp()
        } else {
            0.0
        }
    });
    let total: f64 = kernel.data().iter().sum();
    Ok(kernel.map(|v| v / total))
}

/// Affine map onto `[0, 1]`; a flat grid (spread below `1e-12`) maps to 0.5.
pub fn normalize_minmax(img: &ImageGrid) -> ImageGrid {
    let (lo, hi) = (img.min(), img.max());
    let spread = hi - lo;
    if !(spread >= FLAT_SPREAD) {
        return img.map(|_| 0.5);
    }
    img.map(|v| (v - lo) / spread)
}

/// `clamp(contrast * (v - 0.5) + 0.5 + brightness, 0, 1)`.
pub fn adjust_brightness_contrast(
    img: &ImageGrid,
    brightness: f64,
    contrast: f64,
) -> Result<ImageGrid, EnhanceError> {
    if !(contrast > 0.0) || !contrast.is_finite() {
        return Err(EnhanceError::InvalidGamma(contrast));
    }
    // Same map, arranged so (0, 1) is bit-exact identity.
    let offset = 0.5 * (1.0 - contrast) + brightness;
    Ok(img.map(|v| (contrast * v + offset).clamp(0.0, 1.0)))
}

/// Level mapping `k -> (CDF(k) - CDF_min) / (1 - CDF_min)` over 256 levels.
///
/// Returns `None` for single-level inputs, which have nothing to equalize.
pub fn equalization_table(img: &ImageGrid) -> Option<[f64; 256]> {
    let mut hist = [0usize; 256];
    for &v in img.data() {
        hist[quantize(v) as usize] += 1;
    }
    let total = img.len() as f64;
    let mut cdf = [0.0; 256];
    let mut running = 0usize;
    for (k, &count) in hist.iter().enumerate() {
        running += count;
        cdf[k] = running as f64 / total;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0.0)?;
    if cdf_min >= 1.0 {
        return None;
    }
    let mut table = [0.0; 256];
    for (t, &c) in table.iter_mut().zip(&cdf) {
        *t = ((c - cdf_min) / (1.0 - cdf_min)).max(0.0);
    }
    Some(table)
}

/// Redistributes intensities through the cumulative histogram.
/// Constant images are returned unchanged.
pub fn histogram_equalize(img: &ImageGrid) -> ImageGrid {
    match equalization_table(img) {
        Some(table) => img.map(|v| table[quantize(v) as usize]),
        None => img.clone(),
    }
}
