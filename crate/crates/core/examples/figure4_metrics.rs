// Score the published four-class confusion matrices.
//
// ```bash
// cargo run -p spectra --example figure4_metrics
// ```

use std::error::Error;

use spectra::metrics::{report_to_json, ConfusionMatrix, MetricsReport};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let matrices = [
        ("4C", [[399, 0, 0, 0], [0, 414, 0, 0], [102, 0, 273, 16], [251, 0, 53, 131]]),
        ("4D", [[379, 0, 0, 19], [0, 414, 0, 0], [15, 0, 270, 106], [19, 0, 23, 393]]),
    ];
    for (name, rows) in matrices {
        let report = MetricsReport::from_matrix(ConfusionMatrix::four_class(rows), None)?;
        println!(
            "{name}: accuracy {:.6} BAS {:.6} MCC {:.6} macro-F1 {:.6}",
            report.accuracy, report.balanced_accuracy, report.mcc, report.macro_f1
        );
        if name == "4C" {
            print!("{}", report_to_json(&report));
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
