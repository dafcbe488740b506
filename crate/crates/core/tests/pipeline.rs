use std::io::Write;

use dfep::data::{prepare, quantize, read_csv, read_csv_str, to_instance, CsvOptions, QuantizationSpec};
use dfep::eval::{sweep, SweepKind};
use dfep::{ImpurityFn, Rational};

fn fixture() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/patients.csv")
}

#[test]
fn fixture_loads_and_converts() {
    let raw = read_csv(&fixture(), &CsvOptions::default()).unwrap();
    assert_eq!(raw.rejected_rows, 3);
    assert_eq!(raw.feature_names, ["age", "income", "color", "flag", "site"]);
    let inst = prepare(&raw, QuantizationSpec::default(), None).unwrap();
    // `site` is constant and gets dropped.
    assert_eq!(inst.num_tests(), 4);
    assert!(inst.is_complete());
    assert_eq!(inst.num_classes(), 3);
    assert_eq!(inst.tests()[0].num_outcomes, 10);
}

#[test]
fn conversion_preserves_rows_and_labels() {
    let raw = read_csv(&fixture(), &CsvOptions::default()).unwrap();
    let q = quantize(&raw, QuantizationSpec::default()).unwrap();
    let inst = to_instance(&q, None).unwrap();
    assert_eq!(inst.num_objects(), q.rows.len());
    let counts = inst.class_counts(&inst.object_ids()).unwrap().counts;
    let expected: Vec<u64> = q.label_distribution().into_iter().map(|c| c as u64).collect();
    assert_eq!(counts, expected);
}

#[test]
fn reads_from_disk_with_custom_markers() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "a;b;y\n1;NA;p\n2;x;q\n3;z;p").unwrap();
    let opts = CsvOptions { delimiter: b';', missing: vec!["NA".into()], ..Default::default() };
    let raw = read_csv(file.path(), &opts).unwrap();
    assert_eq!((raw.rows.len(), raw.rejected_rows), (2, 1));
    assert_eq!(raw, read_csv_str(&std::fs::read_to_string(file.path()).unwrap(), &opts).unwrap());
}

#[test]
fn full_budget_sweep_reaches_zero_error() {
    let raw = read_csv(&fixture(), &CsvOptions::default()).unwrap();
    let inst = prepare(&raw, QuantizationSpec { levels: 4 }, None).unwrap();
    let grid = [Rational::from_integer(inst.num_tests() as i128)];
    let curve = sweep(&inst, &SweepKind::Budget(ImpurityFn::Pairs), &grid).unwrap();
    assert_eq!(curve.points[0].error(inst.num_objects()), Some(Rational::from_integer(0)));
}
