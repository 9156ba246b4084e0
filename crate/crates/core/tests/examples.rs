#[allow(dead_code)]
mod batch_pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/batch_pipeline.rs"));
}

#[allow(dead_code)]
mod dft_oracle {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dft_oracle.rs"));
}

#[allow(dead_code)]
mod enhance_image {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/enhance_image.rs"));
}

#[allow(dead_code)]
mod figure4_metrics {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/figure4_metrics.rs"));
}

#[allow(dead_code)]
mod filter_masks {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/filter_masks.rs"));
}

#[allow(dead_code)]
mod spectrum_view {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectrum_view.rs"));
}

#[allow(dead_code)]
mod train_toy {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/train_toy.rs"));
}

#[test]
fn batch_pipeline_example_runs() {
    batch_pipeline::run_example().expect("batch_pipeline example should run");
}

#[test]
fn dft_oracle_example_runs() {
    dft_oracle::run_example().expect("dft_oracle example should run");
}

#[test]
fn enhance_image_example_runs() {
    enhance_image::run_example().expect("enhance_image example should run");
}

#[test]
fn figure4_metrics_example_runs() {
    figure4_metrics::run_example().expect("figure4_metrics example should run");
}

#[test]
fn filter_masks_example_runs() {
    filter_masks::run_example().expect("filter_masks example should run");
}

#[test]
fn spectrum_view_example_runs() {
    spectrum_view::run_example().expect("spectrum_view example should run");
}

#[test]
fn train_toy_example_runs() {
    train_toy::run_example().expect("train_toy example should run");
}
