// Train the micro-CNN on a synthetic four-class problem.
//
// Each class lights up one quadrant of a 16x16 image; the network has to
// learn which one.
//
// ```bash
// cargo run -p spectra --example train_toy
// ```

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra::cnn::{evaluate, train, CnnShape, MicroCnn, Tensor3, TrainConfig};

fn quadrant_sample(class: usize, rng: &mut ChaCha8Rng) -> Tensor3 {
    let side = 16;
    let data = (0..side * side)
        .map(|i| {
            let (r, c) = (i / side, i % side);
            let quadrant = (r >= side / 2) as usize * 2 + (c >= side / 2) as usize;
            let base = if quadrant == class { 0.8 } else { 0.2 };
            base + rng.random_range(-0.1..0.1)
        })
        .collect();
    Tensor3::new(1, side, side, data).expect("16x16 sample")
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let data: Vec<(Tensor3, usize)> = (0..48).map(|i| (quadrant_sample(i % 4, &mut rng), i % 4)).collect();

    let shape = CnnShape {
        in_channels: 1,
        height: 16,
        width: 16,
        conv1_channels: 4,
        conv2_channels: 4,
    };
    let mut net = MicroCnn::new(shape, 0.1, 7)?;
    let (loss0, acc0) = evaluate(&net, &data)?;
    println!("before training: loss {loss0:.4} accuracy {acc0:.3}");

    let cfg = TrainConfig {
        learning_rate: 0.1,
        epochs: 15,
        batch_size: 8,
        seed: 7,
    };
    for stats in train(&mut net, &data, &cfg)? {
        println!("epoch {:2}: loss {:.4} accuracy {:.3}", stats.epoch, stats.loss, stats.accuracy);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
