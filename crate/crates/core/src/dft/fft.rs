//! One-dimensional complex FFT for arbitrary lengths.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform.
//! Every other length goes through Bluestein's chirp-z reduction onto a
//! power-of-two circular convolution of length `m >= 2n - 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Precomputed tables for a forward transform of one length.
#[derive(Clone, Debug)]
pub struct FftPlan {
    len: usize,
    kind: PlanKind,
}

#[derive(Clone, Debug)]
enum PlanKind {
    Trivial,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

#[derive(Clone, Debug)]
struct Radix2 {
    /// `exp(-2 pi i k / n)` for `k < n / 2`.
    twiddles: Vec<Complex64>,
    levels: u32,
}

#[derive(Clone, Debug)]
struct Bluestein {
    /// `exp(-i pi k^2 / n)` for `k < n`.
    chirp: Vec<Complex64>,
    /// Forward FFT of the conjugate chirp, laid out circularly over `m`.
    filter: Vec<Complex64>,
    inner: Radix2,
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let kind = if len == 1 {
            PlanKind::Trivial
        } else if len.is_power_of_two() {
            PlanKind::Radix2(Radix2::new(len))
        } else {
            PlanKind::Bluestein(Bluestein::new(len))
        };
        Self { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place unnormalized forward transform, `X[k] = sum x[j] e^{-2 pi i jk/n}`.
    ///
    /// `scratch` is reused between calls to avoid reallocation.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match &self.kind {
            PlanKind::Trivial => {}
            PlanKind::Radix2(r) => r.run(buf),
            PlanKind::Bluestein(b) => b.run(buf, scratch),
        }
    }

    /// In-place unnormalized inverse transform (positive exponent, no `1/n`).
    pub fn backward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        conj_all(buf);
        self.forward(buf, scratch);
        conj_all(buf);
    }
}

fn conj_all(buf: &mut [Complex64]) {
    for z in buf.iter_mut() {
        z.im = -z.im;
    }
}

/// `exp(-2 pi i num / den)` with the argument reduced before scaling.
fn unit_root(num: usize, den: usize) -> Complex64 {
    let angle = -2.0 * PI * (num % den) as f64 / den as f64;
    Complex64::new(angle.cos(), angle.sin())
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        Self {
            twiddles: (0..n / 2).map(|k| unit_root(k, n)).collect(),
            levels: n.trailing_zeros(),
        }
    }

    fn run(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        let shift = usize::BITS - self.levels;
        for i in 0..n {
            let j = i.reverse_bits() >> shift;
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k^2 is reduced mod 2n so the angle stays small and exact.
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n) as u128) as usize;
                unit_root(k2, 2 * n)
            })
            .collect();
        let mut filter = vec![Complex64::new(0.0, 0.0); m];
        filter[0] = chirp[0].conj();
        for k in 1..n {
            filter[k] = chirp[k].conj();
            filter[m - k] = chirp[k].conj();
        }
        inner.run(&mut filter);
        Self {
            chirp,
            filter,
            inner,
        }
    }

    fn run(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = buf.len();
        let m = self.filter.len();
        // The zero-frequency bin is a plain sum; computing it directly keeps
        // it exactly real for real input, which the chirp path does not.
        let dc: Complex64 = buf.iter().sum();
        scratch.clear();
        scratch.resize(m, Complex64::new(0.0, 0.0));
        for k in 0..n {
            scratch[k] = buf[k] * self.chirp[k];
        }
        self.inner.run(scratch);
        for (z, f) in scratch.iter_mut().zip(&self.filter) {
            // Conjugating here turns the next forward pass into an inverse.
            *z = (*z * f).conj();
        }
        self.inner.run(scratch);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            buf[k] = scratch[k].conj() * scale * self.chirp[k];
        }
        buf[0] = dc;
    }
}
