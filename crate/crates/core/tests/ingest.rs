use std::fs;

use bayes_robust::harness::data::{ingest_correlation_csv, parse_returns};
use bayes_robust::harness::ingest_returns_csv;
use bayes_robust::Error;

fn data_err(text: &str) -> String {
    match parse_returns(text) {
        Err(Error::Data(msg)) => msg,
        other => panic!("expected a data error, got {other:?}"),
    }
}

#[test]
fn two_by_two_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    fs::write(&path, "A,B\n0.01,0.02\n-0.01,0.00").unwrap();
    let d = ingest_returns_csv(&path).unwrap();
    assert_eq!(d.names, ["A", "B"]);
    assert_eq!(d.rows, vec![vec![0.01, 0.02], vec![-0.01, 0.0]]);
    assert_eq!(d.column(1), [0.02, 0.0]);
}

#[test]
fn empty_and_header_only() {
    assert!(data_err("").contains("empty"));
    assert!(data_err("A,B\n").contains("no data rows"));
}

#[test]
fn bad_cells_name_their_position() {
    assert!(data_err("A,B\n0.1,0.2\n0.3,x\n").contains("row 3, column 2"));
    assert!(data_err("A,B\n0.1,NaN\n").contains("row 2, column 2"));
    assert!(data_err("A,B\n0.1,\n").contains("missing"));
    assert!(data_err("A,B\n0.1,0.2,0.3\n").contains("expected 2 cells"));
}

#[test]
fn missing_file_is_io() {
    let err = ingest_returns_csv(std::path::Path::new("/nonexistent/returns.csv")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn correlation_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("c.csv");
    fs::write(&good, "A,B\n1,0.3\n0.3,1\n").unwrap();
    let (names, m) = ingest_correlation_csv(&good).unwrap();
    assert_eq!(names, ["A", "B"]);
    assert_eq!(m[(0, 1)], 0.3);
    let bad = dir.path().join("asym.csv");
    fs::write(&bad, "A,B\n1,0.3\n0.2,1\n").unwrap();
    assert!(ingest_correlation_csv(&bad).is_err());
    let rect = dir.path().join("rect.csv");
    fs::write(&rect, "A,B\n1,0.3\n").unwrap();
    assert!(ingest_correlation_csv(&rect).is_err());
}
