// Enhance a synthetic brain-like phantom and save before/after PNGs.
//
// ```bash
// cargo run -p spectra --example enhance_image
// ```

use std::error::Error;

use spectra::enhance::{enhance, EnhanceConfig, FilterKind};
use spectra::image_io::{save_grayscale, ImageGrid};

/// Two nested ellipses with a soft edge, roughly the layout of an axial slice.
fn phantom(height: usize, width: usize) -> ImageGrid {
    let (cy, cx) = (height as f64 / 2.0, width as f64 / 2.0);
    ImageGrid::from_fn(height, width, |r, c| {
        let y = (r as f64 - cy) / (0.42 * height as f64);
        let x = (c as f64 - cx) / (0.38 * width as f64);
        let d = (x * x + y * y).sqrt();
        let skull = 0.6 / (1.0 + ((d - 0.95) * 40.0).exp());
        let tissue = 0.3 / (1.0 + ((d - 0.7) * 12.0).exp());
        let ventricle = if (x * 3.0).powi(2) + (y * 1.5).powi(2) < 0.1 { -0.2 } else { 0.0 };
        (skull + tissue + ventricle).max(0.0)
    })
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let img = phantom(176, 208);
    let dir = tempfile::tempdir()?;

    let default = enhance(&img, &EnhanceConfig::default())?;
    let sharp = enhance(
        &img,
        &EnhanceConfig {
            filter: FilterKind::Butterworth,
            cutoff: 0.2,
            order: 4,
            alpha: 2.0,
            equalize: false,
            brightness: 0.05,
            contrast: 1.2,
            ..EnhanceConfig::default()
        },
    )?;

    save_grayscale(&img, dir.path().join("input.png"))?;
    save_grayscale(&default, dir.path().join("default.png"))?;
    save_grayscale(&sharp, dir.path().join("butterworth.png"))?;

    println!("input      mean {:.4} range [{:.3}, {:.3}]", img.mean(), img.min(), img.max());
    println!("default    mean {:.4} range [{:.3}, {:.3}]", default.mean(), default.min(), default.max());
    println!("butterworth mean {:.4} range [{:.3}, {:.3}]", sharp.mean(), sharp.min(), sharp.max());
    println!("wrote PNGs to {}", dir.path().display());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
