//! Round trips and scans over random incomplete datasets.

use mipcr::data::{default_names, ColumnRole, IncompleteData, Matrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = IncompleteData> {
    (1usize..12, 2usize..6).prop_flat_map(|(n, p)| {
        (
            proptest::collection::vec(-1e6f64..1e6, n * p),
            proptest::collection::vec(proptest::bool::weighted(0.75), n * p),
        )
            .prop_filter_map("every column needs an observed cell", move |(vals, obs)| {
                let values = Matrix::from_column_slice(n, p, &vals);
                let mut mask = DMatrix::from_column_slice(n, p, &obs);
                for j in 0..p {
                    mask[(0, j)] = mask[(0, j)] || (0..n).all(|i| !mask[(i, j)]);
                }
                IncompleteData::new(values, mask, default_names(p), vec![ColumnRole::Auxiliary; p]).ok()
            })
    })
}

proptest! {
    #[test]
    fn csv_round_trip_preserves_values_and_mask(data in dataset(), token in "(NA|\\.|-999x|)") {
        let mut buf = Vec::new();
        data.write_csv(&mut buf, &token).unwrap();
        let back = IncompleteData::read_csv(buf.as_slice(), &token).unwrap();
        prop_assert_eq!(back.mask(), data.mask());
        prop_assert_eq!(back.column_names(), data.column_names());
        for i in 0..data.nrows() {
            for j in 0..data.ncols() {
                if data.is_observed(i, j) {
                    prop_assert_eq!(back.values()[(i, j)].to_bits(), data.values()[(i, j)].to_bits());
                }
            }
        }
    }

    #[test]
    fn complete_cases_match_a_row_scan(data in dataset()) {
        let scan: Vec<usize> = (0..data.nrows())
            .filter(|&i| (0..data.ncols()).all(|j| data.is_observed(i, j)))
            .collect();
        prop_assert_eq!(data.complete_case_rows(), scan);
        for j in 0..data.ncols() {
            let observed = (0..data.nrows()).filter(|&i| data.is_observed(i, j)).count();
            let prop = data.response_proportions()[j];
            prop_assert!((prop - observed as f64 / data.nrows() as f64).abs() < 1e-15);
            prop_assert_eq!(data.missing_count(j), data.nrows() - observed);
            prop_assert_eq!(data.incomplete_columns().contains(&j), observed < data.nrows());
        }
    }

    #[test]
    fn missing_cells_are_nan(data in dataset()) {
        for i in 0..data.nrows() {
            for j in 0..data.ncols() {
                prop_assert_eq!(data.values()[(i, j)].is_nan(), !data.is_observed(i, j));
            }
        }
    }
}

#[test]
fn parse_errors_carry_positions() {
    let text = "a,b\n1,2\n3,oops\n";
    let err = IncompleteData::read_csv(text.as_bytes(), "NA").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("oops"), "{msg}");
    let ragged = "a,b\n1,2\n3\n";
    assert!(IncompleteData::read_csv(ragged.as_bytes(), "NA").is_err());
    let all_missing = "a,b\nNA,1\nNA,2\n";
    assert!(IncompleteData::read_csv(all_missing.as_bytes(), "NA").is_err());
}
