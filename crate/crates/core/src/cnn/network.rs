use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{
    apply_mask, conv_backward, conv_forward, cross_entropy, dense_backward, dense_forward, dropout,
    maxpool2, maxpool2_backward, relu, relu_backward, softmax, softmax_cross_entropy_grad,
    validate_rate, ConvParams, DenseParams, Mode, Pooled,
};
use super::tensor::Tensor3;
use super::CnnError;

pub const NUM_CLASSES: usize = 4;
pub const KERNEL_SIZE: usize = 3;

/// Every trainable array of the network. Also used to hold gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    pub conv1: ConvParams,
    pub conv2: ConvParams,
    pub dense: DenseParams,
}

impl Parameters {
    pub fn zeros_like(&self) -> Self {
        Self {
            conv1: ConvParams::zeros(self.conv1.out_channels, self.conv1.in_channels, self.conv1.kh, self.conv1.kw),
            conv2: ConvParams::zeros(self.conv2.out_channels, self.conv2.in_channels, self.conv2.kh, self.conv2.kw),
            dense: DenseParams::zeros(self.dense.outputs, self.dense.inputs),
        }
    }

    /// Named parameter arrays in a fixed order.
    pub fn groups(&self) -> [(&'static str, &Vec<f64>); 6] {
        [
            ("conv1.kernels", &self.conv1.kernels),
            ("conv1.biases", &self.conv1.biases),
            ("conv2.kernels", &self.conv2.kernels),
            ("conv2.biases", &self.conv2.biases),
            ("dense.weights", &self.dense.weights),
            ("dense.biases", &self.dense.biases),
        ]
    }

    pub fn groups_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 6] {
        [
            ("conv1.kernels", &mut self.conv1.kernels),
            ("conv1.biases", &mut self.conv1.biases),
            ("conv2.kernels", &mut self.conv2.kernels),
            ("conv2.biases", &mut self.conv2.biases),
            ("dense.weights", &mut self.dense.weights),
            ("dense.biases", &mut self.dense.biases),
        ]
    }

    pub fn len(&self) -> usize {
        self.groups().iter().map(|(_, v)| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_same_shape(&self, other: &Parameters) -> Result<(), CnnError> {
        for ((name, a), (_, b)) in self.groups().iter().zip(other.groups().iter()) {
            if a.len() != b.len() {
                return Err(CnnError::ShapeMismatch(format!(
                    "{name}: {} parameters vs {} gradients",
                    a.len(),
                    b.len()
                )));
            }
        }
        Ok(())
    }

    /// `self += other * scale`, elementwise.
    pub fn add_scaled(&mut self, other: &Parameters, scale: f64) -> Result<(), CnnError> {
        self.check_same_shape(other)?;
        for ((_, a), (_, b)) in self.groups_mut().into_iter().zip(other.groups()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += scale * y;
            }
        }
        Ok(())
    }
}

/// `theta <- theta - lr * grad`, elementwise.
pub fn sgd_step(params: &Parameters, grads: &Parameters, lr: f64) -> Result<Parameters, CnnError> {
    let mut next = params.clone();
    next.add_scaled(grads, -lr)?;
    Ok(next)
}

/// Architecture hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CnnShape {
    pub in_channels: usize,
    pub height: usize,
    pub width: usize,
    pub conv1_channels: usize,
    pub conv2_channels: usize,
}

impl CnnShape {
    pub fn flat_len(&self) -> usize {
        self.conv2_channels * (self.height / 4) * (self.width / 4)
    }

    fn validate(&self) -> Result<(), CnnError> {
        if self.in_channels == 0 || self.conv1_channels == 0 || self.conv2_channels == 0 {
            return Err(CnnError::ShapeMismatch("channel counts must be positive".into()));
        }
        if self.height == 0 || self.width == 0 || self.height % 4 != 0 || self.width % 4 != 0 {
            return Err(CnnError::ShapeMismatch(format!(
                "input {}x{} must be a positive multiple of 4 on both sides",
                self.height, self.width
            )));
        }
        Ok(())
    }
}

/// conv -> relu -> maxpool -> conv -> relu -> maxpool -> flatten ->
/// dropout -> dense -> softmax, with four outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroCnn {
    shape: CnnShape,
    params: Parameters,
    dropout: f64,
    seed: u64,
    /// Bumped on every parameter update; traces from older versions are
    /// rejected by [`MicroCnn::backward`].
    version: u64,
}

/// Intermediates recorded by a forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    version: u64,
    input: Tensor3,
    conv1_pre: Tensor3,
    pool1: Pooled,
    conv2_pre: Tensor3,
    pool2: Pooled,
    dropout_mask: Vec<f64>,
    dense_in: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ForwardTrace {
    pub fn dropout_mask(&self) -> &[f64] {
        &self.dropout_mask
    }

    pub fn predicted(&self) -> usize {
        argmax(&self.probs)
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn he_uniform(rng: &mut ChaCha8Rng, fan_in: usize, n: usize) -> Vec<f64> {
    let limit = (6.0 / fan_in as f64).sqrt();
    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
}

impl MicroCnn {
    /// He-uniform weights, zero biases, all drawn from `seed`.
    pub fn new(shape: CnnShape, dropout_rate: f64, seed: u64) -> Result<Self, CnnError> {
        shape.validate()?;
        validate_rate(dropout_rate)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k2 = KERNEL_SIZE * KERNEL_SIZE;
        let c1 = he_uniform(&mut rng, shape.in_channels * k2, shape.conv1_channels * shape.in_channels * k2);
        let c2 = he_uniform(&mut rng, shape.conv1_channels * k2, shape.conv2_channels * shape.conv1_channels * k2);
        let flat = shape.flat_len();
        let dw = he_uniform(&mut rng, flat, NUM_CLASSES * flat);
        let params = Parameters {
            conv1: ConvParams::new(
                shape.conv1_channels,
                shape.in_channels,
                KERNEL_SIZE,
                KERNEL_SIZE,
                c1,
                vec![0.0; shape.conv1_channels],
            )?,
            conv2: ConvParams::new(
                shape.conv2_channels,
                shape.conv1_channels,
                KERNEL_SIZE,
                KERNEL_SIZE,
                c2,
                vec![0.0; shape.conv2_channels],
            )?,
            dense: DenseParams::new(NUM_CLASSES, flat, dw, vec![0.0; NUM_CLASSES])?,
        };
        Ok(Self {
            shape,
            params,
            dropout: dropout_rate,
            seed,
            version: 0,
        })
    }

    /// Rebuilds a network from stored parameters, checking that they chain.
    pub fn from_parts(shape: CnnShape, params: Parameters, dropout_rate: f64, seed: u64) -> Result<Self, CnnError> {
        shape.validate()?;
        validate_rate(dropout_rate)?;
        let expected = MicroCnn::new(shape, 0.0, 0)?.params;
        let same = expected
            .groups()
            .iter()
            .zip(params.groups().iter())
            .all(|((_, a), (_, b))| a.len() == b.len())
            && params.conv1.kh == KERNEL_SIZE
            && params.conv2.kh == KERNEL_SIZE
            && params.conv1.in_channels == shape.in_channels
            && params.conv2.in_channels == shape.conv1_channels
            && params.dense.inputs == shape.flat_len()
            && params.dense.outputs == NUM_CLASSES;
        if !same {
            return Err(CnnError::ShapeMismatch("parameters do not match the architecture".into()));
        }
        Ok(Self {
            shape,
            params,
            dropout: dropout_rate,
            seed,
            version: 0,
        })
    }

    pub fn shape(&self) -> CnnShape {
        self.shape
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Replaces the parameters; outstanding traces become stale.
    pub fn set_params(&mut self, params: Parameters) -> Result<(), CnnError> {
        self.params.check_same_shape(&params)?;
        self.params = params;
        self.version += 1;
        Ok(())
    }

    /// One SGD update.
    pub fn apply_gradients(&mut self, grads: &Parameters, lr: f64) -> Result<(), CnnError> {
        let next = sgd_step(&self.params, grads, lr)?;
        self.set_params(next)
    }

    fn check_input(&self, x: &Tensor3) -> Result<(), CnnError> {
        let want = (self.shape.in_channels, self.shape.height, self.shape.width);
        if x.shape() != want {
            return Err(CnnError::ShapeMismatch(format!("input {:?} but network expects {:?}", x.shape(), want)));
        }
        Ok(())
    }

    /// Forward pass; train mode draws a dropout mask from `rng`.
    pub fn forward<R: Rng + ?Sized>(&self, x: &Tensor3, mode: Mode, rng: &mut R) -> Result<ForwardTrace, CnnError> {
        self.run(x, |flat| dropout(flat, self.dropout, mode, rng))
    }

    /// Forward pass with a caller-supplied dropout multiplier per feature.
    pub fn forward_with_mask(&self, x: &Tensor3, mask: &[f64]) -> Result<ForwardTrace, CnnError> {
        if mask.len() != self.shape.flat_len() {
            return Err(CnnError::ShapeMismatch(format!(
                "dropout mask has {} entries, expected {}",
                mask.len(),
                self.shape.flat_len()
            )));
        }
        self.run(x, |flat| Ok((apply_mask(flat, mask), mask.to_vec())))
    }

    fn run(
        &self,
        x: &Tensor3,
        drop: impl FnOnce(&Tensor3) -> Result<(Tensor3, Vec<f64>), CnnError>,
    ) -> Result<ForwardTrace, CnnError> {
        self.check_input(x)?;
        let conv1_pre = conv_forward(x, &self.params.conv1)?;
        let pool1 = maxpool2(&relu(&conv1_pre))?;
        let conv2_pre = conv_forward(&pool1.output, &self.params.conv2)?;
        let pool2 = maxpool2(&relu(&conv2_pre))?;
        let (dropped, dropout_mask) = drop(&pool2.output)?;
        let dense_in = dropped.into_data();
        let logits = dense_forward(&dense_in, &self.params.dense)?;
        let probs = softmax(&logits);
        Ok(ForwardTrace {
            version: self.version,
            input: x.clone(),
            conv1_pre,
            pool1,
            conv2_pre,
            pool2,
            dropout_mask,
            dense_in,
            logits,
            probs,
        })
    }

    /// Class probabilities in eval mode.
    pub fn predict(&self, x: &Tensor3) -> Result<Vec<f64>, CnnError> {
        let mut unused = ChaCha8Rng::seed_from_u64(0);
        Ok(self.forward(x, Mode::Eval, &mut unused)?.probs)
    }

    /// Cross-entropy of the trace's prediction against `true_class`.
    pub fn loss(trace: &ForwardTrace, true_class: usize) -> Result<f64, CnnError> {
        cross_entropy(&trace.probs, true_class)
    }

    /// Reverse-mode gradients of the cross-entropy loss for one sample.
    pub fn backward(&self, trace: &ForwardTrace, true_class: usize) -> Result<Parameters, CnnError> {
        if trace.version != self.version {
            return Err(CnnError::StaleIntermediates {
                trace: trace.version,
                network: self.version,
            });
        }
        if true_class >= NUM_CLASSES {
            return Err(CnnError::ClassOutOfRange {
                class: true_class,
                classes: NUM_CLASSES,
            });
        }
        let grad_logits = softmax_cross_entropy_grad(&trace.probs, true_class);
        let (grad_dense_in, dense) = dense_backward(&trace.dense_in, &self.params.dense, &grad_logits);

        let (c2, h2, w2) = trace.pool2.output.shape();
        let grad_pool2: Vec<f64> = grad_dense_in
            .iter()
            .zip(&trace.dropout_mask)
            .map(|(g, m)| g * m)
            .collect();
        let grad_pool2 = Tensor3::new(c2, h2, w2, grad_pool2)?;
        let grad_relu2 = maxpool2_backward(trace.conv2_pre.shape(), &trace.pool2.argmax, &grad_pool2);
        let grad_conv2 = relu_backward(&trace.conv2_pre, &grad_relu2);
        let (grad_pool1, conv2) = conv_backward(&trace.pool1.output, &self.params.conv2, &grad_conv2);

        let grad_relu1 = maxpool2_backward(trace.conv1_pre.shape(), &trace.pool1.argmax, &grad_pool1);
        let grad_conv1 = relu_backward(&trace.conv1_pre, &grad_relu1);
        let (_, conv1) = conv_backward(&trace.input, &self.params.conv1, &grad_conv1);

        Ok(Parameters { conv1, conv2, dense })
    }
}
