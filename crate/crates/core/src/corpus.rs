//! Fixture files and the corpus runner.
//!
//! A fixture is a spectrum line followed by optional directives:
//!
//! ```text
//! # comment
//! 7, 3, -5, -5
//! strategy: two-positive
//! mode: exact
//! order: 1, 2, 3, 4
//! set: alpha.2=1 beta.2.3=0
//! tol: 1e-9
//! expect:
//! 0 2 5 0
//! ...
//! ```
//!
//! `expect:` takes matrix rows on the following lines, or one of `ok`,
//! `inapplicable` (exit 2) and `rejected` (exit 1) inline.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::matrix::ExactMatrix;
use crate::realize::Strategy;
use crate::runner::{parse_matrix, run, RunConfig, RunReport, EIGEN_FLOOR};
use crate::scalar::Scalar;
use crate::spectrum::Mode;
use crate::template::parse_override;

#[derive(Clone, Debug, PartialEq)]
pub enum Expect {
    Matrix(ExactMatrix),
    Ok,
    Inapplicable,
    Rejected,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub spectrum: String,
    pub strategy: Option<Strategy>,
    pub mode: Option<Mode>,
    pub order: Option<Vec<usize>>,
    pub overrides: Vec<(String, Scalar)>,
    pub tol: Option<f64>,
    pub expect: Expect,
}

impl Fixture {
    pub fn config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(self.spectrum.clone());
        cfg.strategy = self.strategy;
        cfg.mode = self.mode;
        cfg.order = self.order.clone();
        cfg.overrides = self.overrides.clone();
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        cfg
    }
}

pub fn parse_order(text: &str) -> Result<Vec<usize>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad order index {t:?}")))
        .collect()
}

pub fn parse_fixture(text: &str) -> Result<Fixture, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, spectrum) = lines.next().ok_or("fixture has no spectrum line")?;
    let mut f = Fixture {
        spectrum: spectrum.to_string(),
        strategy: None,
        mode: None,
        order: None,
        overrides: Vec::new(),
        tol: None,
        expect: Expect::Ok,
    };
    let mut rows: Option<Vec<&str>> = None;
    for (no, line) in lines {
        if let Some(rows) = rows.as_mut() {
            rows.push(line);
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| format!("line {no}: expected `key: value`"))?;
        let value = value.trim();
        let at = |e: String| format!("line {no}: {e}");
        match key.trim() {
            "strategy" => f.strategy = Some(value.parse().map_err(at)?),
            "mode" => f.mode = Some(value.parse().map_err(at)?),
            "order" => f.order = Some(parse_order(value).map_err(at)?),
            "tol" => f.tol = Some(value.parse().map_err(|_| at(format!("bad tolerance {value:?}")))?),
            "set" => {
                for item in value.split_whitespace() {
                    f.overrides.push(parse_override(item).map_err(|e| at(e.to_string()))?);
                }
            }
            "expect" => match value {
                "" => rows = Some(Vec::new()),
                "ok" => f.expect = Expect::Ok,
                "inapplicable" => f.expect = Expect::Inapplicable,
                "rejected" => f.expect = Expect::Rejected,
                other => return Err(at(format!("unknown expectation {other:?}"))),
            },
            other => return Err(at(format!("unknown directive {other:?}"))),
        }
    }
    if let Some(rows) = rows {
        f.expect = Expect::Matrix(parse_matrix(&rows.join("\n"))?);
    }
    Ok(f)
}

/// Entrywise comparison: exact, or within `tol` in float mode.
fn matrices_agree(got: &ExactMatrix, want: &ExactMatrix, float_tol: Option<f64>) -> Result<(), String> {
    if got.n() != want.n() {
        return Err(format!("size {} but expected {}", got.n(), want.n()));
    }
    for (i, j, w) in want.entries() {
        let g = got.get(i, j);
        let same = match float_tol {
            None => g == w,
            Some(tol) => (g.to_complex() - w.to_complex()).norm() <= tol,
        };
        if !same {
            return Err(format!("entry ({}, {}) is {g}, expected {w}", i + 1, j + 1));
        }
    }
    Ok(())
}

/// Runs one fixture; the string explains the verdict.
pub fn check_fixture(f: &Fixture) -> (bool, String, RunReport) {
    let cfg = f.config();
    let report = run(&cfg);
    let code = report.exit_code();
    let failure = || report.failure().map_or_else(|| "verification failed".to_string(), |e| e.message.clone());
    let (passed, detail) = match &f.expect {
        Expect::Inapplicable => (code == 2, if code == 2 { failure() } else { format!("exit {code}, expected 2") }),
        Expect::Rejected => (code == 1, if code == 1 { failure() } else { format!("exit {code}, expected 1") }),
        Expect::Ok if code == 0 => (true, "verified".to_string()),
        Expect::Matrix(want) if code == 0 => {
            let c = &report.realization().expect("exit 0 has a realization").c;
            let float_tol = report
                .spectrum
                .as_ref()
                .is_some_and(|s| s.mode == Mode::Float)
                .then(|| cfg.tol.max(EIGEN_FLOOR));
            match matrices_agree(c, want, float_tol) {
                Ok(()) => (true, "matrix matches".to_string()),
                Err(e) => (false, e),
            }
        }
        _ => (false, format!("exit {code}: {}", failure())),
    };
    (passed, detail, report)
}

#[derive(Clone, Debug)]
pub struct FixtureResult {
    pub name: String,
    pub passed: bool,
    pub exit_code: Option<i32>,
    pub strategy: Option<String>,
    pub detail: String,
    pub report: Option<RunReport>,
}

#[derive(Clone, Debug, Default)]
pub struct CorpusSummary {
    /// Ordered by file name.
    pub results: Vec<FixtureResult>,
}

impl CorpusSummary {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.passed).count()
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failures() > 0)
    }

    pub fn table(&self) -> String {
        let width = self.results.iter().map(|r| r.name.len()).max().unwrap_or(7).max(7);
        let mut out = format!("{:<width$}  result  exit  {:<34}  detail\n", "fixture", "strategy");
        for r in &self.results {
            let code = r.exit_code.map_or("-".to_string(), |c| c.to_string());
            let strategy = r.strategy.as_deref().unwrap_or("-");
            let verdict = if r.passed { "pass" } else { "FAIL" };
            out.push_str(&format!("{:<width$}  {verdict:<6}  {code:<4}  {strategy:<34}  {}\n", r.name, r.detail));
        }
        out.push_str(&format!("{} fixtures, {} failed\n", self.results.len(), self.failures()));
        out
    }
}

fn run_file(path: &Path) -> FixtureResult {
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let fail = |detail: String| FixtureResult { name: name.clone(), passed: false, exit_code: None, strategy: None, detail, report: None };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(format!("read error: {e}")),
    };
    let fixture = match parse_fixture(&text) {
        Ok(f) => f,
        Err(e) => return fail(format!("fixture error: {e}")),
    };
    let (passed, detail, report) = check_fixture(&fixture);
    FixtureResult {
        name,
        passed,
        exit_code: Some(report.exit_code()),
        strategy: report.strategy.map(|s| s.label().to_string()),
        detail,
        report: Some(report),
    }
}

/// Fixture files (`*.fixture`) in a directory, sorted by name.
pub fn fixture_paths(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "fixture"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Runs every fixture in `dir` on a small worker pool.
pub fn run_corpus(dir: &Path) -> io::Result<CorpusSummary> {
    let paths = fixture_paths(dir)?;
    let slots: Mutex<Vec<Option<FixtureResult>>> = Mutex::new(vec![None; paths.len()]);
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(paths.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = paths.get(i) else { break };
                let r = run_file(path);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    let results = slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every slot filled")).collect();
    Ok(CorpusSummary { results })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_directives_and_matrix() {
        let f = parse_fixture(
            "# swap\n1, -1\nstrategy: one-positive\nset: alpha.2=1\nexpect:\n0 1\n1 0\n",
        )
        .unwrap();
        assert_eq!(f.spectrum, "1, -1");
        assert_eq!(f.strategy, Some(Strategy::OnePositive));
        assert_eq!(f.overrides.len(), 1);
        assert_eq!(f.expect, Expect::Matrix(ExactMatrix::from_ints(&[&[0, 1], &[1, 0]])));
        let (passed, _, _) = check_fixture(&f);
        assert!(passed);
    }

    #[test]
    fn inline_expectations() {
        assert_eq!(parse_fixture("1,-1,-1\nexpect: rejected").unwrap().expect, Expect::Rejected);
        assert_eq!(parse_fixture("5,-1\n").unwrap().expect, Expect::Ok);
        assert!(parse_fixture("5,-1\nexpect: maybe").is_err());
        assert!(parse_fixture("5,-1\ncolour: red").is_err());
        assert!(parse_fixture("# only a comment\n").is_err());
    }

    #[test]
    fn wrong_matrix_fails() {
        let f = parse_fixture("1,-1\nexpect:\n0 2\n1 0\n").unwrap();
        let (passed, detail, _) = check_fixture(&f);
        assert!(!passed);
        assert!(detail.contains("(1, 2)"), "{detail}");
    }
}
