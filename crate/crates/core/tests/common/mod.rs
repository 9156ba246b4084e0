//! Fixtures and oracles shared by the integration suites.
#![allow(dead_code)]

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra::cnn::{CnnShape, Tensor3, TrainConfig};
use spectra::image_io::{save_grayscale, ClassLabel, ImageGrid};
use spectra::metrics::PredictionRecord;

pub const FIG_4C: [[u64; 4]; 4] = [[399, 0, 0, 0], [0, 414, 0, 0], [102, 0, 273, 16], [251, 0, 53, 131]];
pub const FIG_4D: [[u64; 4]; 4] = [[379, 0, 0, 19], [0, 414, 0, 0], [15, 0, 270, 106], [19, 0, 23, 393]];

pub fn random_grid(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ImageGrid {
    ImageGrid::from_fn(h, w, |_, _| rng.random::<f64>())
}

/// Direct double sum `F(u,v) = sum f(x,y) e^{-2 pi i (ux/H + vy/W)}`.
///
/// Exponents are reduced modulo the period before the trig call so the
/// oracle does not lose accuracy on large index products.
pub fn dft_double_sum(img: &ImageGrid) -> Vec<Complex64> {
    let (h, w) = img.shape();
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..h {
                for y in 0..w {
                    let turns = ((u * x) % h) as f64 / h as f64 + ((v * y) % w) as f64 / w as f64;
                    acc += img.get(x, y) * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * turns);
                }
            }
            out[u * w + v] = acc;
        }
    }
    out
}

/// Spatial circular convolution with the kernel's (0,0) at the origin.
pub fn circular_convolve(img: &ImageGrid, kernel: &ImageGrid) -> ImageGrid {
    let (h, w) = img.shape();
    let (kh, kw) = kernel.shape();
    ImageGrid::from_fn(h, w, |r, c| {
        let mut acc = 0.0;
        for i in 0..kh {
            for j in 0..kw {
                acc += kernel.get(i, j) * img.get((r + h - i % h) % h, (c + w - j % w) % w);
            }
        }
        acc
    })
}

pub const FIXTURE_SIDE: usize = 8;
pub const FIXTURE_SAMPLES: usize = 64;
pub const FIXTURE_SEED: u64 = 2024;

/// One bright-left (class 0) or bright-right (class 1) blob image.
pub fn separable_image(class: usize, side: usize, rng: &mut ChaCha8Rng) -> ImageGrid {
    ImageGrid::from_fn(side, side, |_, c| {
        let left = c < side / 2;
        let base: f64 = if left == (class == 0) { 0.75 } else { 0.25 };
        (base + rng.random_range(-0.15..0.15)).clamp(0.0, 1.0)
    })
}

/// 64 labelled samples, classes alternating.
pub fn separable_fixture() -> Vec<(Tensor3, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    (0..FIXTURE_SAMPLES)
        .map(|i| {
            let class = i % 2;
            (Tensor3::from_grid(&separable_image(class, FIXTURE_SIDE, &mut rng)), class)
        })
        .collect()
}

pub const FIXTURE_SHAPE: CnnShape = CnnShape {
    in_channels: 1,
    height: FIXTURE_SIDE,
    width: FIXTURE_SIDE,
    conv1_channels: 4,
    conv2_channels: 4,
};
pub const FIXTURE_DROPOUT: f64 = 0.25;
pub const FIXTURE_NET_SEED: u64 = 11;
pub const FIXTURE_TRAIN: TrainConfig = TrainConfig {
    learning_rate: 0.05,
    epochs: 30,
    batch_size: 8,
    seed: 17,
};

/// Writes `<root>/{train,test}/<class>/` trees of separable images. Only the
/// first two classes receive files; the other directories stay empty.
pub fn write_separable_tree(root: &Path, per_class_train: usize, per_class_test: usize, side: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    for (split, n) in [("train", per_class_train), ("test", per_class_test)] {
        for label in ClassLabel::ALL {
            let dir = root.join(split).join(label.name());
            fs::create_dir_all(&dir).unwrap();
            if label.index() > 1 {
                continue;
            }
            for i in 0..n {
                let img = separable_image(label.index(), side, &mut rng);
                save_grayscale(&img, dir.join(format!("img_{i:03}.png"))).unwrap();
            }
        }
    }
}

/// Writes `count` small images spread across the four class directories of
/// `root`, with varied content.
pub fn write_class_tree(root: &Path, count: usize) {
    for label in ClassLabel::ALL {
        fs::create_dir_all(root.join(label.name())).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..count {
        let label = ClassLabel::from_index(i % 4).unwrap();
        let img = ImageGrid::from_fn(20 + i % 3, 24, |r, c| {
            (((r * (i + 2) + c * 5) % 19) as f64 / 18.0 * 0.8 + rng.random_range(0.0..0.2)).min(1.0)
        });
        save_grayscale(&img, root.join(label.name()).join(format!("scan_{i:02}.png"))).unwrap();
    }
}

/// Expands a confusion matrix into one record per counted item, in row-major
/// order, without scores.
pub fn records_from_matrix(rows: &[[u64; 4]; 4]) -> Vec<PredictionRecord> {
    let mut out = Vec::new();
    for (t, row) in rows.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            for i in 0..n {
                out.push(PredictionRecord {
                    id: format!("t{t}p{p}_{i}"),
                    truth: ClassLabel::from_index(t).unwrap(),
                    predicted: ClassLabel::from_index(p).unwrap(),
                    scores: None,
                });
            }
        }
    }
    out
}

pub fn records_to_csv(records: &[PredictionRecord]) -> String {
    let mut buf = Vec::new();
    spectra::metrics::write_predictions(records, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

/// Lists every regular file below `dir` as (relative path, bytes), sorted.
pub fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// Runs the CLI entry point with string arguments.
pub fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["spectra"];
    full.extend_from_slice(args);
    spectra::cli::run(full)
}

/// Largest relative disagreement between backprop and central differences
/// over every parameter, with the dropout mask held fixed. Magnitudes below
/// `1e-6` are compared on that floor instead of their own size.
pub fn gradient_check(
    net: &spectra::cnn::MicroCnn,
    x: &Tensor3,
    class: usize,
    mask: &[f64],
    step: f64,
) -> Vec<(&'static str, usize, f64, f64, f64)> {
    use spectra::cnn::{cross_entropy, MicroCnn};
    let trace = net.forward_with_mask(x, mask).unwrap();
    let grads = net.backward(&trace, class).unwrap();
    let loss_at = |params: spectra::cnn::Parameters| {
        let probe = MicroCnn::from_parts(net.shape(), params, net.dropout_rate(), net.seed()).unwrap();
        cross_entropy(&probe.forward_with_mask(x, mask).unwrap().probs, class).unwrap()
    };
    let mut out = Vec::new();
    for (g, (name, analytic)) in grads.groups().into_iter().enumerate() {
        for (i, &a) in analytic.iter().enumerate() {
            let mut plus = net.params().clone();
            plus.groups_mut()[g].1[i] += step;
            let mut minus = net.params().clone();
            minus.groups_mut()[g].1[i] -= step;
            let numeric = (loss_at(plus) - loss_at(minus)) / (2.0 * step);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            out.push((name, i, a, numeric, rel));
        }
    }
    out
}

/// Small seeded net with nonzero biases, a fixed dropout mask and an input.
pub fn gradient_fixture() -> (spectra::cnn::MicroCnn, Tensor3, usize, Vec<f64>) {
    use spectra::cnn::MicroCnn;
    let shape = CnnShape {
        in_channels: 1,
        height: 8,
        width: 8,
        conv1_channels: 2,
        conv2_channels: 2,
    };
    let net = MicroCnn::new(shape, 0.5, 31).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut params = net.params().clone();
    for (name, values) in params.groups_mut() {
        if name.ends_with("biases") {
            for v in values.iter_mut() {
                *v = rng.random_range(-0.1..0.1);
            }
        }
    }
    let net = MicroCnn::from_parts(shape, params, 0.5, 31).unwrap();
    let x = Tensor3::new(1, 8, 8, (0..64).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let mask: Vec<f64> = (0..shape.flat_len()).map(|i| if i % 3 == 1 { 0.0 } else { 2.0 }).collect();
    (net, x, 2, mask)
}
