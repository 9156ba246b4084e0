// Build the three low-pass families and check the low/high split.
//
// ```bash
// cargo run -p spectra --example filter_masks
// ```

use std::error::Error;

use spectra::enhance::{apply_filter, build_lowpass, FilterKind};
use spectra::image_io::ImageGrid;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (h, w) = (64, 80);
    let img = ImageGrid::from_fn(h, w, |r, c| ((r * 13 + c * 7) % 17) as f64 / 16.0);

    for kind in [FilterKind::Ideal, FilterKind::Gaussian, FilterKind::Butterworth] {
        for cutoff in [0.1, 0.3, 0.7] {
            let low = build_lowpass(h, w, kind, cutoff, 2)?;
            let high = low.complement();
            let smooth = apply_filter(&img, &low)?;
            let detail = apply_filter(&img, &high)?;
            let split_error = smooth.zip_with(&detail, |a, b| a + b).max_abs_diff(&img);
            let passed = low.data().iter().sum::<f64>() / (h * w) as f64;
            println!(
                "{kind:<11} cutoff {cutoff:.1}: passband {passed:.3}, detail mean {:+.1e}, split error {split_error:.1e}",
                detail.mean()
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
