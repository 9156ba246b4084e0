// Enhance a small dataset tree in parallel and inspect the run manifest.
//
// ```bash
// SPECTRA_LOG=info cargo run -p spectra --example batch_pipeline
// ```

use std::error::Error;
use std::fs;

use spectra::cli::cmd_batch;
use spectra::enhance::EnhanceConfig;
use spectra::image_io::{save_grayscale, ClassLabel, ImageGrid};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("dataset");
    let output = dir.path().join("enhanced");
    for label in ClassLabel::ALL {
        let class_dir = input.join(label.name());
        fs::create_dir_all(&class_dir)?;
        for i in 0..3 {
            let k = label.index() * 3 + i;
            let img = ImageGrid::from_fn(24, 32, |r, c| ((r * (k + 1) + c * 3) % 23) as f64 / 22.0);
            save_grayscale(&img, class_dir.join(format!("slice_{i}.png")))?;
        }
    }
    // A stray corrupt file is tallied, not fatal.
    fs::write(input.join("MildDemented").join("broken.png"), b"not a png")?;

    let manifest = cmd_batch(&input, &output, &EnhanceConfig::default(), 4, 0)?;
    println!("{} enhanced, {} failed", manifest.successes, manifest.failures);
    for failed in &manifest.failed {
        println!("  failed: {} ({})", failed.path.display(), failed.reason);
    }
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
