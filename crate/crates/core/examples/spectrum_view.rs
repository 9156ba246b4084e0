// Transform a sampled sinusoid and locate its spectral peaks.
//
// ```bash
// cargo run -p spectra --example spectrum_view
// ```

use std::error::Error;
use std::f64::consts::PI;

use spectra::dft::{center, dft_forward, dft_inverse, log_magnitude_view, magnitude};
use spectra::image_io::ImageGrid;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (h, w, k) = (48, 60, 5);
    // Horizontal stripes: intensity varies along rows with k cycles.
    let img = ImageGrid::from_fn(h, w, |r, _| 0.5 + 0.5 * (2.0 * PI * k as f64 * r as f64 / h as f64).cos());

    let spec = dft_forward(&img);
    let mag = magnitude(&center(&spec)?);
    let (dc_u, dc_v) = (h / 2, w / 2);
    let mut peaks: Vec<(usize, usize, f64)> = (0..h)
        .flat_map(|u| (0..w).map(move |v| (u, v)))
        .map(|(u, v)| (u, v, mag.get(u, v)))
        .filter(|&(_, _, m)| m > 1e-6)
        .collect();
    peaks.sort_by(|a, b| b.2.total_cmp(&a.2));
    println!("centered DC at ({dc_u}, {dc_v})");
    for (u, v, m) in &peaks {
        println!("  peak at ({u:2}, {v:2}) offset ({:+}, {:+}) magnitude {m:.1}", *u as i64 - dc_u as i64, *v as i64 - dc_v as i64);
    }

    let back = dft_inverse(&spec)?;
    println!("round-trip max error {:.2e}", back.max_abs_diff(&img));

    let view = log_magnitude_view(&img);
    println!("log-magnitude view {}x{} in [{}, {}]", view.height(), view.width(), view.min(), view.max());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
