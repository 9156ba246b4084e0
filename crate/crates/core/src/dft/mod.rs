//! Two-dimensional discrete Fourier transforms over [`ImageGrid`]s.
//!
//! Conventions: the forward transform is unnormalized,
//!
//! ```text
//! F(u, v) = sum_x sum_y I(x, y) exp(-i 2 pi (u x / H + v y / W))
//! ```
//!
//! with `x` the row index and `y` the column index, and the inverse carries
//! the `1 / (H W)` factor. Arbitrary (non power-of-two) sizes are handled
//! exactly; nothing is zero-padded at the image level.

mod fft;

pub use fft::FftPlan;

use num_complex::Complex64;
use thiserror::Error;

use crate::image_io::ImageGrid;

/// Largest `H * W` accepted by [`dft_naive`].
pub const NAIVE_MAX_BINS: usize = 4096;

/// Relative bound on the imaginary residue tolerated by [`dft_inverse`].
pub const IMAG_RESIDUE_REL: f64 = 1e-6;
/// Absolute floor below which the imaginary residue is treated as rounding
/// noise regardless of the real part (intensities are O(1)).
pub const IMAG_RESIDUE_ABS: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum DftError {
    #[error("invalid spectrum shape {height}x{width} for {len} bins")]
    InvalidShape {
        height: usize,
        width: usize,
        len: usize,
    },
    #[error("direct DFT limited to {NAIVE_MAX_BINS} bins, got {bins}")]
    SizeExceeded { bins: usize },
    #[error("inverse transform is not real: imaginary residue {residue:e} vs real peak {real_peak:e}")]
    NonRealResult { residue: f64, real_peak: f64 },
    #[error("spectrum is already centered")]
    AlreadyCentered,
    #[error("spectrum is not centered")]
    AlreadyUncentered,
}

/// Row-major complex frequency field.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
    dc_centered: bool,
}

impl Spectrum {
    pub fn new(
        height: usize,
        width: usize,
        data: Vec<Complex64>,
        dc_centered: bool,
    ) -> Result<Self, DftError> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(DftError::InvalidShape {
                height,
                width,
                len: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
            dc_centered,
        })
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

    pub fn is_centered(&self) -> bool {
        self.dc_centered
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.data[u * self.width + v]
    }

    /// Position of the DC bin under the current layout.
    pub fn dc_index(&self) -> (usize, usize) {
        if self.dc_centered {
            (self.height / 2, self.width / 2)
        } else {
            (0, 0)
        }
    }

    fn with_data(&self, data: Vec<Complex64>, dc_centered: bool) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data,
            dc_centered,
        }
    }

    fn map_real(&self, f: impl Fn(Complex64) -> f64) -> ImageGrid {
        ImageGrid::new(self.height, self.width, self.data.iter().map(|&z| f(z)).collect())
            .expect("spectrum shape is valid")
    }
}

/// Row transforms first, then column transforms, in place.
fn transform_2d(
    data: &mut [Complex64],
    height: usize,
    width: usize,
    inverse: bool,
) {
    let row_plan = FftPlan::new(width);
    let col_plan = FftPlan::new(height);
    let mut scratch = Vec::new();
    for row in data.chunks_exact_mut(width) {
        if inverse {
            row_plan.backward(row, &mut scratch);
        } else {
            row_plan.forward(row, &mut scratch);
        }
    }
    if height > 1 {
        let mut column = vec![Complex64::new(0.0, 0.0); height];
        for c in 0..width {
            for r in 0..height {
                column[r] = data[r * width + c];
            }
            if inverse {
                col_plan.backward(&mut column, &mut scratch);
            } else {
                col_plan.forward(&mut column, &mut scratch);
            }
            for r in 0..height {
                data[r * width + c] = column[r];
            }
        }
    }
}

/// Fast forward transform; returns an uncentered spectrum.
///
/// The row pass followed by the column pass is the per-axis factorization
/// `exp(-i2pi ux/H) * exp(-i2pi vy/W)` of the 2D kernel.
pub fn dft_forward(img: &ImageGrid) -> Spectrum {
    let (height, width) = img.shape();
    let mut data: Vec<Complex64> = img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_2d(&mut data, height, width, false);
    Spectrum {
        height,
        width,
        data,
        dc_centered: false,
    }
}

/// Inverse of a complex spectrum without the real-part check.
pub fn dft_inverse_complex(spec: &Spectrum) -> Result<Vec<Complex64>, DftError> {
    if spec.dc_centered {
        return Err(DftError::AlreadyCentered);
    }
    let mut data = spec.data.clone();
    transform_2d(&mut data, spec.height, spec.width, true);
    let scale = 1.0 / (spec.height * spec.width) as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
    Ok(data)
}

/// Inverse transform back to a real grid.
///
/// The imaginary part of the result must be rounding noise: its peak has to
/// stay below `1e-6` times the real peak (or below an absolute `1e-10`),
/// otherwise the spectrum was not conjugate-symmetric and
/// [`DftError::NonRealResult`] is returned.
pub fn dft_inverse(spec: &Spectrum) -> Result<ImageGrid, DftError> {
    let data = dft_inverse_complex(spec)?;
    let residue = data.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let real_peak = data.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if residue > IMAG_RESIDUE_REL * real_peak && residue > IMAG_RESIDUE_ABS {
        return Err(DftError::NonRealResult { residue, real_peak });
    }
    Ok(ImageGrid::new(spec.height, spec.width, data.into_iter().map(|z| z.re).collect())
        .expect("spectrum shape is valid"))
}

/// Direct `O(H^2 W^2)` evaluation of the forward definition.
///
/// Exponents are reduced modulo the axis length before scaling, so the
/// reference stays accurate to ~1e-13 at the sizes it accepts.
pub fn dft_naive(img: &ImageGrid) -> Result<Spectrum, DftError> {
    let (height, width) = img.shape();
    let bins = height * width;
    if bins > NAIVE_MAX_BINS {
        return Err(DftError::SizeExceeded { bins });
    }
    let root = |num: usize, den: usize| {
        let angle = -2.0 * std::f64::consts::PI * (num % den) as f64 / den as f64;
        Complex64::new(angle.cos(), angle.sin())
    };
    let mut data = Vec::with_capacity(bins);
    for u in 0..height {
        for v in 0..width {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..height {
                let ex = root(u * x, height);
                for y in 0..width {
                    acc += img.get(x, y) * ex * root(v * y, width);
                }
            }
            data.push(acc);
        }
    }
    Ok(Spectrum {
        height,
        width,
        data,
        dc_centered: false,
    })
}

/// Per-bin `sqrt(re^2 + im^2)`; not range-normalized.
pub fn magnitude(spec: &Spectrum) -> ImageGrid {
    spec.map_real(|z| z.re.hypot(z.im))
}

/// Per-bin `atan2(im, re)` in `(-pi, pi]`, with `phase(0) = 0`.
pub fn phase(spec: &Spectrum) -> ImageGrid {
    spec.map_real(|z| {
        if z.re == 0.0 && z.im == 0.0 {
            0.0
        } else {
            let p = z.im.atan2(z.re);
            // atan2(-0.0, negative) yields -pi; fold it onto the closed end.
            if p == -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                p
            }
        }
    })
}

fn shift(spec: &Spectrum, dr: usize, dc: usize, centered: bool) -> Spectrum {
    let (h, w) = spec.shape();
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for r in 0..h {
        let nr = (r + dr) % h;
        for c in 0..w {
            out[nr * w + (c + dc) % w] = spec.data[r * w + c];
        }
    }
    spec.with_data(out, centered)
}

/// Moves the DC bin from `(0, 0)` to `(H / 2, W / 2)` (floor division).
pub fn center(spec: &Spectrum) -> Result<Spectrum, DftError> {
    if spec.dc_centered {
        return Err(DftError::AlreadyCentered);
    }
    let (h, w) = spec.shape();
    Ok(shift(spec, h / 2, w / 2, true))
}

/// Exact inverse of [`center`] for odd and even sizes.
pub fn uncenter(spec: &Spectrum) -> Result<Spectrum, DftError> {
    if !spec.dc_centered {
        return Err(DftError::AlreadyUncentered);
    }
    let (h, w) = spec.shape();
    Ok(shift(spec, h - h / 2, w - w / 2, false))
}

/// Centered `log(1 + |F|)`, min-max normalized into `[0, 1]`.
pub fn log_magnitude_view(img: &ImageGrid) -> ImageGrid {
    let spec = dft_forward(img);
    let spec = center(&spec).expect("fresh spectrum is uncentered");
    let view = magnitude(&spec).map(f64::ln_1p);
    crate::enhance::normalize_minmax(&view)
}
