mod common;

use std::fs;

use proptest::prelude::*;
use spectra::image_io::{
    load_grayscale, quantize, save_grayscale, scan_dataset, ClassLabel, ImageGrid, ImageIoError, Split,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quantized_grids_survive_save_and_load(
        (h, w, bytes) in (1usize..24, 1usize..24).prop_flat_map(|(h, w)| {
            (Just(h), Just(w), prop::collection::vec(any::<u8>(), h * w))
        })
    ) {
        let img = ImageGrid::new(h, w, bytes.iter().map(|&b| b as f64 / 255.0).collect()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        save_grayscale(&img, &path).unwrap();
        let back = load_grayscale(&path).unwrap();
        prop_assert_eq!(&back, &img);
        prop_assert_eq!(back.to_bytes(), bytes);
        save_grayscale(&back, &path).unwrap();
        prop_assert_eq!(load_grayscale(&path).unwrap(), back);
    }

    #[test]
    fn quantize_is_round_half_up(v in -0.5f64..1.5) {
        let expected = (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8;
        prop_assert_eq!(quantize(v), expected);
    }
}

#[test]
fn fixture_tree_counts() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let names = ["Non_Demented", "very mild demented", "MildDemented", "moderate_demented"];
    for (name, n) in names.iter().zip([3, 2, 1, 4]) {
        fs::create_dir_all(root.join(name)).unwrap();
        for i in 0..n {
            save_grayscale(&ImageGrid::filled(4, 5, i as f64 / 4.0), root.join(name).join(format!("{i}.png"))).unwrap();
        }
    }
    fs::write(root.join("MildDemented").join("notes.txt"), "ignored").unwrap();
    fs::create_dir_all(root.join("extra")).unwrap();

    let manifest = scan_dataset(root, Split::Test).unwrap();
    assert_eq!(manifest.len(), 10);
    assert_eq!(manifest.label_counts(), [3, 2, 1, 4]);
    assert_eq!(manifest.split, Split::Test);
    let paths: Vec<_> = manifest.entries.iter().map(|e| e.path.clone()).collect();
    let mut sorted = paths.clone();
    sorted.sort();
    assert_eq!(paths, sorted);
    assert_eq!(scan_dataset(root, Split::Test).unwrap(), manifest);

    let mut csv = Vec::new();
    manifest.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("path,label_index,label_name\n"));
    assert_eq!(text.lines().count(), 11);
    assert!(!text.contains('\r'));
}

#[test]
fn missing_class_is_named() {
    let dir = tempfile::tempdir().unwrap();
    for label in &ClassLabel::ALL[..3] {
        fs::create_dir_all(dir.path().join(label.name())).unwrap();
        save_grayscale(&ImageGrid::filled(2, 2, 0.5), dir.path().join(label.name()).join("a.png")).unwrap();
    }
    match scan_dataset(dir.path(), Split::Train) {
        Err(ImageIoError::MissingClassDirectory { missing, .. }) => assert_eq!(missing, ClassLabel::ModerateDemented),
        other => panic!("expected missing class, got {other:?}"),
    }
}

#[test]
fn one_image_per_class() {
    let dir = tempfile::tempdir().unwrap();
    common::write_class_tree(dir.path(), 4);
    let manifest = scan_dataset(dir.path(), Split::Train).unwrap();
    let mut labels: Vec<_> = manifest.entries.iter().map(|e| e.label.index()).collect();
    labels.sort();
    assert_eq!(labels, vec![0, 1, 2, 3]);
    assert_eq!(manifest.label_counts(), [1, 1, 1, 1]);
}

#[test]
fn corrupt_files_are_skipped_not_listed() {
    let dir = tempfile::tempdir().unwrap();
    common::write_class_tree(dir.path(), 8);
    fs::write(dir.path().join("NonDemented").join("zz.png"), b"garbage").unwrap();
    let manifest = scan_dataset(dir.path(), Split::Train).unwrap();
    assert_eq!(manifest.len(), 8);
    assert_eq!(manifest.skipped.len(), 1);
}

#[test]
fn empty_tree_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    common::write_class_tree(dir.path(), 0);
    assert!(matches!(scan_dataset(dir.path(), Split::Train), Err(ImageIoError::EmptyDataset { .. })));
}
