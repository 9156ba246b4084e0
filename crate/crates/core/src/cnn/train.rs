use std::io;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{cross_entropy, Mode};
use super::network::{argmax, MicroCnn, Parameters};
use super::tensor::Tensor3;
use super::CnnError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 10,
            batch_size: 8,
            seed: 0,
        }
    }
}

/// Eval-mode loss and accuracy over the whole training set after an epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

/// Mean cross-entropy and accuracy of `net` over `data` in eval mode.
pub fn evaluate(net: &MicroCnn, data: &[(Tensor3, usize)]) -> Result<(f64, f64), CnnError> {
    if data.is_empty() {
        return Err(CnnError::EmptyDataset);
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (x, y) in data {
        let probs = net.predict(x)?;
        loss += cross_entropy(&probs, *y)?;
        if argmax(&probs) == *y {
            correct += 1;
        }
    }
    Ok((loss / data.len() as f64, correct as f64 / data.len() as f64))
}

/// Minibatch SGD over seeded shuffles.
///
/// Shuffling and dropout both draw from one ChaCha stream seeded with
/// `cfg.seed`; gradients are accumulated in sample order, so identical
/// inputs give bit-identical parameter trajectories.
pub fn train(
    net: &mut MicroCnn,
    data: &[(Tensor3, usize)],
    cfg: &TrainConfig,
) -> Result<Vec<EpochStats>, CnnError> {
    if data.is_empty() {
        return Err(CnnError::EmptyDataset);
    }
    if !(cfg.learning_rate >= 0.0) || !cfg.learning_rate.is_finite() {
        return Err(CnnError::InvalidConfig(format!("learning rate {} is not usable", cfg.learning_rate)));
    }
    if cfg.batch_size == 0 {
        return Err(CnnError::InvalidConfig("batch size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut acc: Parameters = net.params().zeros_like();
            for &i in batch {
                let (x, y) = &data[i];
                let fwd = net.forward(x, Mode::Train, &mut rng)?;
                let grads = net.backward(&fwd, *y)?;
                acc.add_scaled(&grads, 1.0)?;
            }
            let mut mean = acc.zeros_like();
            mean.add_scaled(&acc, 1.0 / batch.len() as f64)?;
            net.apply_gradients(&mean, cfg.learning_rate)?;
        }
        let (loss, accuracy) = evaluate(net, data)?;
        log::debug!("epoch {epoch}: loss {loss:.6} accuracy {accuracy:.4}");
        trace.push(EpochStats { epoch, loss, accuracy });
    }
    Ok(trace)
}

/// Writes the trace as `epoch,loss,accuracy` CSV with LF endings.
pub fn write_trace_csv<W: io::Write>(trace: &[EpochStats], writer: W) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    out.write_record(["epoch", "loss", "accuracy"])?;
    for s in trace {
        out.write_record([s.epoch.to_string(), s.loss.to_string(), s.accuracy.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
