//! Layer forward and backward passes.
//!
//! Convolution here is cross-correlation (no kernel flip), as is usual for
//! CNNs; [`crate::enhance::convolve_freq`] is the true convolution.

use rand::Rng;

use super::tensor::Tensor3;
use super::CnnError;

/// Lower bound applied to the true-class probability in [`cross_entropy`].
pub const PROB_FLOOR: f64 = 1e-12;

/// Kernels `[out][in][kh][kw]` and one bias per output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kh: usize,
    pub kw: usize,
    pub kernels: Vec<f64>,
    pub biases: Vec<f64>,
}

impl ConvParams {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kh: usize,
        kw: usize,
        kernels: Vec<f64>,
        biases: Vec<f64>,
    ) -> Result<Self, CnnError> {
        if kh % 2 == 0 || kw % 2 == 0 {
            return Err(CnnError::ShapeMismatch(format!("kernel {kh}x{kw} must have odd sides")));
        }
        if kernels.len() != out_channels * in_channels * kh * kw || biases.len() != out_channels {
            return Err(CnnError::ShapeMismatch(format!(
                "conv params {out_channels}x{in_channels}x{kh}x{kw} got {} kernel and {} bias values",
                kernels.len(),
                biases.len()
            )));
        }
        Ok(Self {
            out_channels,
            in_channels,
            kh,
            kw,
            kernels,
            biases,
        })
    }

    pub fn zeros(out_channels: usize, in_channels: usize, kh: usize, kw: usize) -> Self {
        Self::new(
            out_channels,
            in_channels,
            kh,
            kw,
            vec![0.0; out_channels * in_channels * kh * kw],
            vec![0.0; out_channels],
        )
        .expect("zero params have consistent shapes")
    }

    #[inline]
    pub fn kernel_index(&self, o: usize, i: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_channels + i) * self.kh + ky) * self.kw + kx
    }

    pub fn fan_in(&self) -> usize {
        self.in_channels * self.kh * self.kw
    }
}

/// Weights `[out][in]` and biases `[out]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub outputs: usize,
    pub inputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseParams {
    pub fn new(outputs: usize, inputs: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self, CnnError> {
        if weights.len() != outputs * inputs || biases.len() != outputs {
            return Err(CnnError::ShapeMismatch(format!(
                "dense params {outputs}x{inputs} got {} weights and {} biases",
                weights.len(),
                biases.len()
            )));
        }
        Ok(Self {
            outputs,
            inputs,
            weights,
            biases,
        })
    }

    pub fn zeros(outputs: usize, inputs: usize) -> Self {
        Self {
            outputs,
            inputs,
            weights: vec![0.0; outputs * inputs],
            biases: vec![0.0; outputs],
        }
    }
}

/// Same-padded, stride-1 cross-correlation:
/// `out[o] = sum_i x[i] * K[o][i] + B[o]`.
pub fn conv_forward(x: &Tensor3, p: &ConvParams) -> Result<Tensor3, CnnError> {
    if x.channels() != p.in_channels {
        return Err(CnnError::ChannelMismatch {
            expected: p.in_channels,
            got: x.channels(),
        });
    }
    let (_, h, w) = x.shape();
    let (py, px) = (p.kh / 2, p.kw / 2);
    let mut out = Tensor3::zeros(p.out_channels, h, w);
    let data = out.data_mut();
    for o in 0..p.out_channels {
        for y in 0..h {
            for xx in 0..w {
                let mut acc = p.biases[o];
                for i in 0..p.in_channels {
                    for ky in 0..p.kh {
                        let sy = y + ky;
                        if sy < py || sy - py >= h {
                            continue;
                        }
                        for kx in 0..p.kw {
                            let sx = xx + kx;
                            if sx < px || sx - px >= w {
                                continue;
                            }
                            acc += x.get(i, sy - py, sx - px) * p.kernels[p.kernel_index(o, i, ky, kx)];
                        }
                    }
                }
                data[(o * h + y) * w + xx] = acc;
            }
        }
    }
    Ok(out)
}

/// Gradients of a convolution with respect to its input, kernels and biases.
pub fn conv_backward(x: &Tensor3, p: &ConvParams, grad_out: &Tensor3) -> (Tensor3, ConvParams) {
    let (_, h, w) = x.shape();
    let (py, px) = (p.kh / 2, p.kw / 2);
    let mut grad_x = Tensor3::zeros(x.channels(), h, w);
    let mut grads = ConvParams::zeros(p.out_channels, p.in_channels, p.kh, p.kw);
    for o in 0..p.out_channels {
        for y in 0..h {
            for xx in 0..w {
                let g = grad_out.get(o, y, xx);
                if g == 0.0 {
                    continue;
                }
                grads.biases[o] += g;
                for i in 0..p.in_channels {
                    for ky in 0..p.kh {
                        let sy = y + ky;
                        if sy < py || sy - py >= h {
                            continue;
                        }
                        for kx in 0..p.kw {
                            let sx = xx + kx;
                            if sx < px || sx - px >= w {
                                continue;
                            }
                            let k = p.kernel_index(o, i, ky, kx);
                            let xi = x.index(i, sy - py, sx - px);
                            grads.kernels[k] += g * x.data()[xi];
                            grad_x.data_mut()[xi] += g * p.kernels[k];
                        }
                    }
                }
            }
        }
    }
    (grad_x, grads)
}

pub fn relu(x: &Tensor3) -> Tensor3 {
    x.map(|v| v.max(0.0))
}

/// Passes `grad` where the pre-activation was positive.
pub fn relu_backward(pre: &Tensor3, grad: &Tensor3) -> Tensor3 {
    let mut out = grad.clone();
    for (g, &v) in out.data_mut().iter_mut().zip(pre.data()) {
        if v <= 0.0 {
            *g = 0.0;
        }
    }
    out
}

/// Output of [`maxpool2`]: pooled values plus the flat input index that won
/// each window.
#[derive(Clone, Debug, PartialEq)]
pub struct Pooled {
    pub output: Tensor3,
    pub argmax: Vec<usize>,
}

/// Non-overlapping 2x2 max pooling. Ties go to the first element in
/// row-major window order.
pub fn maxpool2(x: &Tensor3) -> Result<Pooled, CnnError> {
    let (c, h, w) = x.shape();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(CnnError::OddDimension { height: h, width: w });
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut output = Tensor3::zeros(c, oh, ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for y in 0..oh {
            for xx in 0..ow {
                let mut best = x.index(ch, 2 * y, 2 * xx);
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = x.index(ch, 2 * y + dy, 2 * xx + dx);
                    if x.data()[idx] > x.data()[best] {
                        best = idx;
                    }
                }
                output.data_mut()[(ch * oh + y) * ow + xx] = x.data()[best];
                argmax.push(best);
            }
        }
    }
    Ok(Pooled { output, argmax })
}

/// Routes each pooled gradient back to the input position that won.
pub fn maxpool2_backward(input_shape: (usize, usize, usize), argmax: &[usize], grad: &Tensor3) -> Tensor3 {
    let (c, h, w) = input_shape;
    let mut out = Tensor3::zeros(c, h, w);
    for (&idx, &g) in argmax.iter().zip(grad.data()) {
        out.data_mut()[idx] += g;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

pub fn validate_rate(p: f64) -> Result<(), CnnError> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(CnnError::InvalidRate(p))
    }
}

/// Inverted dropout. Returns the output and the per-element multiplier
/// (`0` or `1 / (1 - p)`), which the backward pass reuses.
///
/// Elements are visited in row-major order with one uniform draw each, so
/// the mask is a deterministic function of the RNG state. With `p = 0` or
/// in eval mode no draws are made.
pub fn dropout<R: Rng + ?Sized>(
    x: &Tensor3,
    p: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<(Tensor3, Vec<f64>), CnnError> {
    validate_rate(p)?;
    if mode == Mode::Eval || p == 0.0 {
        return Ok((x.clone(), vec![1.0; x.len()]));
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..x.len())
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect();
    Ok((apply_mask(x, &mask), mask))
}

pub fn apply_mask(x: &Tensor3, mask: &[f64]) -> Tensor3 {
    let mut out = x.clone();
    for (v, m) in out.data_mut().iter_mut().zip(mask) {
        *v *= m;
    }
    out
}

/// Affine map `W x + b`.
pub fn dense_forward(x: &[f64], p: &DenseParams) -> Result<Vec<f64>, CnnError> {
    if x.len() != p.inputs {
        return Err(CnnError::ShapeMismatch(format!(
            "dense layer expects {} inputs, got {}",
            p.inputs,
            x.len()
        )));
    }
    Ok((0..p.outputs)
        .map(|o| {
            let row = &p.weights[o * p.inputs..(o + 1) * p.inputs];
            p.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        })
        .collect())
}

/// Returns `(dL/dx, parameter gradients)`.
pub fn dense_backward(x: &[f64], p: &DenseParams, grad_out: &[f64]) -> (Vec<f64>, DenseParams) {
    let mut grad_x = vec![0.0; p.inputs];
    let mut grads = DenseParams::zeros(p.outputs, p.inputs);
    for (o, &g) in grad_out.iter().enumerate() {
        grads.biases[o] = g;
        for i in 0..p.inputs {
            grads.weights[o * p.inputs + i] = g * x[i];
            grad_x[i] += g * p.weights[o * p.inputs + i];
        }
    }
    (grad_x, grads)
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    assert!(!logits.is_empty(), "softmax of an empty vector");
    let peak = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - peak).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `-ln(max(probs[true_class], 1e-12))`.
pub fn cross_entropy(probs: &[f64], true_class: usize) -> Result<f64, CnnError> {
    let p = probs.get(true_class).ok_or(CnnError::ClassOutOfRange {
        class: true_class,
        classes: probs.len(),
    })?;
    Ok(-p.max(PROB_FLOOR).ln())
}

/// Gradient of cross-entropy through softmax with respect to the logits:
/// `probs - onehot(true_class)`.
pub fn softmax_cross_entropy_grad(probs: &[f64], true_class: usize) -> Vec<f64> {
    probs
        .iter()
        .enumerate()
        .map(|(k, &p)| if k == true_class { p - 1.0 } else { p })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seeded_tensor(c: usize, h: usize, w: usize, seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::new(c, h, w, (0..c * h * w).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap()
    }

    #[test]
    fn identity_kernel_and_bias_only() {
        let x = seeded_tensor(1, 4, 5, 1);
        let id = ConvParams::new(1, 1, 1, 1, vec![1.0], vec![0.0]).unwrap();
        assert_eq!(conv_forward(&x, &id).unwrap(), x);
        let b = ConvParams::new(2, 1, 3, 3, vec![0.0; 18], vec![0.7, -0.2]).unwrap();
        let out = conv_forward(&x, &b).unwrap();
        assert!(out.data()[..20].iter().all(|&v| v == 0.7));
        assert!(out.data()[20..].iter().all(|&v| v == -0.2));
    }

    #[test]
    fn conv_matches_quadruple_loop() {
        let x = seeded_tensor(1, 5, 5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k: Vec<f64> = (0..9).map(|_| rng.random::<f64>() - 0.5).collect();
        let p = ConvParams::new(1, 1, 3, 3, k.clone(), vec![0.1]).unwrap();
        let got = conv_forward(&x, &p).unwrap();
        for y in 0..5i64 {
            for xx in 0..5i64 {
                let mut acc = 0.1;
                for ky in 0..3i64 {
                    for kx in 0..3i64 {
                        let (sy, sx) = (y + ky - 1, xx + kx - 1);
                        if (0..5).contains(&sy) && (0..5).contains(&sx) {
                            acc += x.get(0, sy as usize, sx as usize) * k[(ky * 3 + kx) as usize];
                        }
                    }
                }
                assert!((got.get(0, y as usize, xx as usize) - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conv_rejects_bad_shapes() {
        let x = seeded_tensor(2, 3, 3, 4);
        let p = ConvParams::zeros(1, 1, 3, 3);
        assert!(matches!(conv_forward(&x, &p), Err(CnnError::ChannelMismatch { .. })));
        assert!(ConvParams::new(1, 1, 2, 3, vec![0.0; 6], vec![0.0]).is_err());
    }

    #[test]
    fn relu_cases() {
        let x = Tensor3::new(1, 1, 3, vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let y = seeded_tensor(2, 3, 3, 5);
        assert_eq!(relu(&relu(&y)), relu(&y));
        let pos = y.map(f64::abs);
        assert_eq!(relu(&pos), pos);
    }

    #[test]
    fn maxpool_cases() {
        let x = Tensor3::new(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = maxpool2(&x).unwrap();
        assert_eq!(p.output.data(), &[4.0]);
        assert_eq!(p.argmax, vec![3]);

        let flat = Tensor3::filled(1, 4, 4, 0.3);
        let p = maxpool2(&flat).unwrap();
        assert!(p.output.data().iter().all(|&v| v == 0.3));
        // First element of each window wins the tie.
        assert_eq!(p.argmax, vec![0, 2, 8, 10]);

        assert!(matches!(maxpool2(&Tensor3::zeros(1, 3, 4)), Err(CnnError::OddDimension { .. })));
    }

    #[test]
    fn maxpool_matches_window_enumeration() {
        let x = seeded_tensor(1, 4, 4, 6);
        let p = maxpool2(&x).unwrap();
        for wy in 0..2 {
            for wx in 0..2 {
                let window: Vec<f64> = (0..2)
                    .flat_map(|dy| (0..2).map(move |dx| (dy, dx)))
                    .map(|(dy, dx)| x.get(0, 2 * wy + dy, 2 * wx + dx))
                    .collect();
                let best = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(p.output.get(0, wy, wx), best);
            }
        }
    }

    #[test]
    fn dropout_modes() {
        let x = seeded_tensor(1, 4, 4, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert_eq!(dropout(&x, 0.0, Mode::Train, &mut rng).unwrap().0, x);
        assert_eq!(dropout(&x, 0.0, Mode::Eval, &mut rng).unwrap().0, x);
        assert_eq!(dropout(&x, 0.7, Mode::Eval, &mut rng).unwrap().0, x);
        assert!(matches!(dropout(&x, 1.0, Mode::Train, &mut rng), Err(CnnError::InvalidRate(_))));
        assert!(matches!(dropout(&x, -0.1, Mode::Eval, &mut rng), Err(CnnError::InvalidRate(_))));

        let (_, m1) = dropout(&x, 0.5, Mode::Train, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let (_, m2) = dropout(&x, 0.5, Mode::Train, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(m1, m2);
        assert!(m1.iter().all(|&m| m == 0.0 || m == 2.0));
    }

    #[test]
    fn inverted_dropout_is_unbiased() {
        let n = 100_000;
        let x = Tensor3::filled(1, 1, n, 1.0);
        let (out, _) = dropout(&x, 0.5, Mode::Train, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        let mean = out.data().iter().sum::<f64>() / n as f64;
        // Each output is 0 or 2 with equal probability: sd 1, se 1/sqrt(n).
        let se = 1.0 / (n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn dense_cases() {
        let id = DenseParams::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(dense_forward(&[0.3, -0.4], &id).unwrap(), vec![0.3, -0.4]);
        let sum = DenseParams::new(1, 2, vec![1.0, 1.0], vec![0.0]).unwrap();
        assert_eq!(dense_forward(&[2.0, 3.0], &sum).unwrap(), vec![5.0]);
        assert!(dense_forward(&[1.0], &sum).is_err());
        assert!(DenseParams::new(1, 2, vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn dense_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w: Vec<f64> = (0..32).map(|_| rng.random::<f64>() - 0.5).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.5).collect();
        let x: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
        let p = DenseParams::new(4, 8, w.clone(), b.clone()).unwrap();
        let got = dense_forward(&x, &p).unwrap();
        for o in 0..4 {
            let mut acc = b[o];
            for i in 0..8 {
                acc += w[o * 8 + i] * x[i];
            }
            assert!((got[o] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_values() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        let s = softmax(&[1.0, 2.0, 3.0]);
        for (got, want) in s.iter().zip([0.090031, 0.244728, 0.665241]) {
            assert!((got - want).abs() < 1e-6);
        }
        let shifted = softmax(&[1001.0, 1002.0, 1003.0]);
        for (a, b) in s.iter().zip(&shifted) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_values() {
        assert_eq!(cross_entropy(&[1.0, 0.0, 0.0, 0.0], 0).unwrap(), 0.0);
        assert!((cross_entropy(&[0.25; 4], 2).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!((cross_entropy(&[0.25; 4], 2).unwrap() - 1.386294).abs() < 1e-6);
        assert!((cross_entropy(&[1.0, 0.0], 1).unwrap() - 27.631021).abs() < 1e-6);
        assert!(matches!(cross_entropy(&[0.5, 0.5], 2), Err(CnnError::ClassOutOfRange { .. })));
    }

    #[test]
    fn one_hot_softmax_gives_zero_logit_gradient() {
        assert_eq!(softmax_cross_entropy_grad(&[0.0, 1.0, 0.0, 0.0], 1), vec![0.0; 4]);
    }
}
