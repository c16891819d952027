use std::path::Path;

use niep::corpus::run_corpus;

fn dir(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

#[test]
fn shipped_corpus_passes() {
    let s = run_corpus(&dir("corpus")).unwrap();
    assert!(s.results.len() >= 15);
    assert_eq!(s.failures(), 0, "{}", s.table());
    assert_eq!(s.exit_code(), 0);
}

#[test]
fn results_are_ordered_by_name() {
    let s = run_corpus(&dir("corpus")).unwrap();
    let names: Vec<&str> = s.results.iter().map(|r| r.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn empty_directory_passes() {
    let tmp = std::env::temp_dir().join(format!("niep-empty-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let s = run_corpus(&tmp).unwrap();
    assert!(s.results.is_empty());
    assert_eq!(s.exit_code(), 0);
    assert!(s.table().contains("0 fixtures, 0 failed"));
    std::fs::remove_dir(&tmp).unwrap();
}

#[test]
fn one_perturbed_entry_fails() {
    let s = run_corpus(&dir("tests/fixtures/perturbed")).unwrap();
    assert_eq!(s.failures(), 1, "{}", s.table());
    assert_eq!(s.exit_code(), 1);
    let bad = s.results.iter().find(|r| !r.passed).unwrap();
    assert_eq!(bad.name, "perturbed_entry.fixture");
    assert!(bad.detail.contains("(4, 4)"));
}

#[test]
fn malformed_fixture_counts_as_failure() {
    let s = run_corpus(&dir("tests/fixtures/malformed")).unwrap();
    assert_eq!(s.failures(), 1);
    assert!(s.results[0].detail.contains("unknown directive"));
    assert!(run_corpus(&dir("tests/fixtures/missing")).is_err());
}
