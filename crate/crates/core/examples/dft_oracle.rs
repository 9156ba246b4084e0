// Compare the fast transform with the direct double sum on odd sizes.
//
// ```bash
// cargo run -p spectra --example dft_oracle
// ```

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra::dft::{dft_forward, dft_naive};
use spectra::image_io::ImageGrid;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (h, w) in [(1, 1), (3, 5), (7, 16), (13, 11), (32, 24), (45, 60)] {
        let img = ImageGrid::from_fn(h, w, |_, _| rng.random::<f64>());
        let fast = dft_forward(&img);
        let slow = dft_naive(&img)?;
        let err = fast
            .data()
            .iter()
            .zip(slow.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!("{h:2}x{w:2}: max |fast - naive| = {err:.2e}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
