use std::fs;

use proptest::prelude::*;
use tempfile::TempDir;

use svd_compare::io::{
    encode_idx_images, image_from_row, images_to_matrix, parse_idx_images, read_idx_images,
    write_pgm, DataError, IdxImageSet,
};
use svd_compare::pca::{Orientation, PcaModel};
use svd_compare::{Method, MethodParams};

fn image_set() -> impl Strategy<Value = IdxImageSet> {
    (1usize..=6, 1usize..=5, 1usize..=5).prop_flat_map(|(count, height, width)| {
        proptest::collection::vec(any::<u8>(), count * height * width).prop_map(move |pixels| {
            IdxImageSet {
                count,
                height,
                width,
                pixels,
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encode_parse_round_trip(set in image_set()) {
        prop_assert_eq!(parse_idx_images(&encode_idx_images(&set)).unwrap(), set);
    }

    #[test]
    fn every_truncation_is_rejected(set in image_set()) {
        let bytes = encode_idx_images(&set);
        for len in 0..bytes.len() {
            let err = parse_idx_images(&bytes[..len]).unwrap_err();
            prop_assert!(matches!(err, DataError::Truncated { .. }), "len {}: {:?}", len, err);
        }
    }
}

#[test]
fn identity_pca_round_trip_stays_within_one_level() {
    let dir = TempDir::new().unwrap();
    let (count, side) = (12, 3);
    let pixels: Vec<u8> = (0..count * side * side)
        .map(|k| ((k * 73 + (k / 9) * 29) % 256) as u8)
        .collect();
    let set = IdxImageSet {
        count,
        height: side,
        width: side,
        pixels,
    };
    let idx = dir.path().join("set.idx");
    fs::write(&idx, encode_idx_images(&set)).unwrap();

    let parsed = read_idx_images(&idx).unwrap();
    let a = images_to_matrix(&parsed);
    let d = side * side;
    let model = PcaModel::fit(
        &a,
        Orientation::RowsAreExamples,
        Method::Truncated,
        &MethodParams::for_columns(d),
        true,
    )
    .unwrap();
    for index in 0..count {
        let rebuilt = model.reconstruct_example(&a, index).unwrap();
        let path = dir.path().join(format!("{index}.pgm"));
        write_pgm(&image_from_row(&rebuilt, side, side).unwrap(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = format!("P5\n{side} {side}\n255\n");
        assert!(bytes.starts_with(header.as_bytes()));
        for (got, want) in bytes[header.len()..].iter().zip(set.image(index)) {
            assert!(got.abs_diff(*want) <= 1, "image {index}: {got} vs {want}");
        }
    }
}

#[test]
fn write_errors_name_the_path() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("missing").join("out.pgm");
    let image = image_from_row(&[0.0, 1.0], 1, 2).unwrap();
    match write_pgm(&image, &path) {
        Err(DataError::Io { path: p, .. }) => assert_eq!(p, path),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}
