//! The realize pipeline: parse, classify, check conditions, dispatch,
//! realize, verify.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Signed;

use crate::eigen::{exact_numeric_eigenvalues, pairing_error};
use crate::error::RealizeError;
use crate::matrix::{char_poly, first_negative_entry, power_sums_matrix, similarity_transform, ExactMatrix};
use crate::poly::Polynomial;
use crate::realize::{
    realize_complex_3, realize_complex_4, realize_complex_general, realize_greedy, realize_greedy_general,
    realize_negative_layout, realize_prescribed_diagonal, Realization, Strategy,
};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use crate::spectrum::{classify, necessary_conditions, parse_spectrum_with_mode, ClassifiedSpectrum, ConditionReport, Mode};

/// Layouts tried by the permutation search before giving up.
pub const PERMUTATION_CAP: usize = 2000;

/// Floor on the eigenvalue-pairing threshold.
pub const EIGEN_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spectrum: String,
    /// `None` routes automatically.
    pub strategy: Option<Strategy>,
    /// `None` infers the mode from the input.
    pub mode: Option<Mode>,
    pub tol: f64,
    /// 1-based indices into the descending real spectrum.
    pub order: Option<Vec<usize>>,
    pub overrides: Vec<(String, Scalar)>,
    /// Defaults to `n`.
    pub jll_k: Option<usize>,
    pub jll_m: usize,
}

impl RunConfig {
    pub fn new(spectrum: impl Into<String>) -> Self {
        RunConfig {
            spectrum: spectrum.into(),
            strategy: None,
            mode: None,
            tol: 1e-9,
            order: None,
            overrides: Vec::new(),
            jll_k: None,
            jll_m: 3,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.jll_k == Some(0) || self.jll_m == 0 {
            return Err("JLL bounds must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Input,
    Conditions,
    Realization,
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
    pub error: Option<RealizeError>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { stage: Stage::Input, message: message.into(), error: None }
    }

    fn realize(e: RealizeError) -> Self {
        let stage = if e.is_input_error() { Stage::Input } else { Stage::Realization };
        Failure { stage, message: e.to_string(), error: Some(e) }
    }

    pub fn kind(&self) -> &'static str {
        match (&self.stage, &self.error) {
            (Stage::Input, _) => "input",
            (Stage::Conditions, _) => "conditions",
            (Stage::Realization, Some(e)) => error_kind(e),
            (Stage::Realization, None) => "realization",
        }
    }
}

pub fn error_kind(e: &RealizeError) -> &'static str {
    match e {
        RealizeError::WrongShape(_) => "WrongShape",
        RealizeError::InfeasibleAlphas(_) => "InfeasibleAlphas",
        RealizeError::InfeasibleDiagonal { .. } => "InfeasibleDiagonal",
        RealizeError::InfeasibleCut(_) => "InfeasibleCut",
        RealizeError::InfeasibleBeta { .. } => "InfeasibleBeta",
        RealizeError::EmptyInterval { .. } => "EmptyInterval",
        RealizeError::MethodInapplicable { .. } => "MethodInapplicable",
        RealizeError::ShapeConflict(_) => "ShapeConflict",
        RealizeError::UnknownParameter(_) => "UnknownParameter",
        RealizeError::Numeric(_) => "Numeric",
    }
}

/// Checks of a candidate matrix against the spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub tolerance: f64,
    pub real: bool,
    pub nonnegative: bool,
    pub min_entry: Option<Rational>,
    pub first_negative: Option<(usize, usize, Rational)>,
    /// `C = L·A·L⁻¹`; absent when only `C` is known.
    pub similarity: Option<bool>,
    /// `diag(A)` equals the spectrum as a multiset.
    pub diagonal: Option<bool>,
    /// Exact characteristic polynomial match; absent in float mode.
    pub char_poly: Option<bool>,
    pub eigen_residual: Option<f64>,
    pub eigen_ok: bool,
    /// `|tr(Cᵏ) − s_k|` relative to `max(1, Σ|λ|ᵏ)`, `k = 1..n`.
    pub power_sum_residuals: Vec<f64>,
    pub power_sums_ok: bool,
    pub passed: bool,
}

fn scalar_key(v: &Scalar) -> (Rational, Rational) {
    (v.re().clone(), v.im().clone())
}

fn same_multiset(a: &[Scalar], b: &[Scalar]) -> bool {
    let mut x: Vec<_> = a.iter().map(scalar_key).collect();
    let mut y: Vec<_> = b.iter().map(scalar_key).collect();
    x.sort();
    y.sort();
    x == y
}

/// Verifies `C` alone: nonnegativity, spectrum, power sums.
pub fn verify_matrix(c: &ExactMatrix, spectrum: &ClassifiedSpectrum, tol: f64) -> Verification {
    let threshold = tol.max(EIGEN_FLOOR);
    let n = c.n();
    let real = c.is_real();
    let min_entry = c.entries().map(|(_, _, v)| v.re().clone()).min();
    let first_negative = first_negative_entry(c, 0.0).map(|(i, j, v)| (i + 1, j + 1, v.re().clone()));
    let nonnegative = real && first_negative.is_none();
    let values = spectrum.values();
    let char_poly_ok = (spectrum.mode == Mode::Exact && n == spectrum.n)
        .then(|| char_poly(c) == Polynomial::from_roots(&values));

    let expected: Vec<Complex64> = if spectrum.floats.len() == spectrum.n {
        spectrum.floats.clone()
    } else {
        values.iter().map(Scalar::to_complex).collect()
    };
    let eigen_residual = if real {
        exact_numeric_eigenvalues(c, tol).ok().and_then(|eig| pairing_error(&eig, &expected))
    } else {
        None
    };
    let eigen_ok = eigen_residual.is_some_and(|r| r <= threshold);

    let traces = power_sums_matrix(c, n);
    let power_sum_residuals: Vec<f64> = (1..=n)
        .map(|k| {
            let scale: f64 = expected.iter().map(|z| z.norm().powi(k as i32)).sum::<f64>().max(1.0);
            let diff = if spectrum.mode == Mode::Exact && k <= spectrum.power_sums.len() {
                let d = &traces[k - 1] - &Scalar::real(spectrum.power_sums[k - 1].clone());
                d.to_complex().norm()
            } else {
                let s: Complex64 = expected.iter().map(|z| z.powi(k as i32)).sum();
                (traces[k - 1].to_complex() - s).norm()
            };
            diff / scale
        })
        .collect();
    let power_sums_ok = n == spectrum.n && power_sum_residuals.iter().all(|r| *r <= threshold);
    let passed = nonnegative && char_poly_ok != Some(false) && eigen_ok && power_sums_ok;
    Verification {
        tolerance: tol,
        real,
        nonnegative,
        min_entry,
        first_negative,
        similarity: None,
        diagonal: None,
        char_poly: char_poly_ok,
        eigen_residual,
        eigen_ok,
        power_sum_residuals,
        power_sums_ok,
        passed,
    }
}

/// Verifies a full realization, including `C = L·A·L⁻¹` and `diag(A)`.
pub fn verify(r: &Realization, spectrum: &ClassifiedSpectrum, tol: f64) -> Verification {
    let mut v = verify_matrix(&r.c, spectrum, tol);
    let similarity = similarity_transform(&r.l, &r.a).is_ok_and(|c| c == r.c) && r.a.is_upper_triangular();
    let diagonal = same_multiset(&r.a.diagonal(), &spectrum.values());
    v.similarity = Some(similarity);
    v.diagonal = Some(diagonal);
    v.passed &= similarity && diagonal;
    v
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Realized { realization: Box<Realization>, verification: Verification },
    Failed(Failure),
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub input: String,
    pub spectrum: Option<ClassifiedSpectrum>,
    pub conditions: Option<ConditionReport>,
    pub strategy: Option<Strategy>,
    pub outcome: Outcome,
    pub diagnostics: Vec<String>,
}

impl RunReport {
    fn failed(input: &str, failure: Failure) -> Self {
        RunReport {
            input: input.to_string(),
            spectrum: None,
            conditions: None,
            strategy: None,
            outcome: Outcome::Failed(failure),
            diagnostics: Vec::new(),
        }
    }

    pub fn realization(&self) -> Option<&Realization> {
        match &self.outcome {
            Outcome::Realized { realization, .. } => Some(realization),
            Outcome::Failed(_) => None,
        }
    }

    pub fn verification(&self) -> Option<&Verification> {
        match &self.outcome {
            Outcome::Realized { verification, .. } => Some(verification),
            Outcome::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&Failure> {
        match &self.outcome {
            Outcome::Failed(f) => Some(f),
            Outcome::Realized { .. } => None,
        }
    }

    /// 0 verified, 1 input or condition failure, 2 realization failure.
    pub fn exit_code(&self) -> i32 {
        match &self.outcome {
            Outcome::Realized { verification, .. } if verification.passed => 0,
            Outcome::Realized { .. } => 2,
            Outcome::Failed(f) => match f.stage {
                Stage::Input | Stage::Conditions => 1,
                Stage::Realization => 2,
            },
        }
    }
}

/// Automatic strategy for a spectrum in its default order.
pub fn dispatch(c: &ClassifiedSpectrum) -> Strategy {
    if !c.is_real() {
        return match c.n {
            3 => Strategy::Complex3,
            4 if c.reals.len() == 2 => Strategy::Complex4,
            _ => Strategy::ComplexGeneral,
        };
    }
    real_strategy(c.k_pos, c.n - c.k_pos, c.n)
}

fn real_strategy(k: usize, m: usize, n: usize) -> Strategy {
    if 2 * k <= n || m <= 1 {
        return match k {
            0 | 1 => Strategy::OnePositive,
            2 => Strategy::TwoPositive,
            _ => Strategy::KPositive,
        };
    }
    match m {
        2 => Strategy::TwoNegative,
        3 => Strategy::ThreeNegative,
        _ => Strategy::KNegative,
    }
}

fn count_positive(lams: &[Rational]) -> usize {
    lams.iter().take_while(|v| v.is_positive()).count()
}

/// Runs a real strategy on an explicit layout.
fn realize_real(strategy: Strategy, lams: &[Rational], overrides: &[(String, Scalar)]) -> Result<Realization, RealizeError> {
    let n = lams.len();
    let k = count_positive(lams);
    let m = n - k;
    let wrong = |what: &str| Err(RealizeError::WrongShape(format!("{} needs {what}, got k = {k}, n = {n}", strategy.id())));
    match strategy {
        Strategy::OnePositive if k == 1 => realize_greedy(lams, 1, overrides),
        Strategy::OnePositive => wrong("exactly one positive eigenvalue"),
        Strategy::TwoPositive if k == 2 && n >= 3 => realize_greedy(lams, 2, overrides),
        Strategy::TwoPositive => wrong("exactly two positive eigenvalues"),
        Strategy::KPositive if k >= 1 => realize_greedy_general(lams, k, overrides),
        Strategy::KPositive => wrong("a positive eigenvalue"),
        Strategy::TwoNegative if m == 2 => realize_negative_layout(lams, 2, overrides),
        Strategy::TwoNegative => wrong("two nonpositive eigenvalues"),
        Strategy::ThreeNegative if m == 3 => realize_negative_layout(lams, 3, overrides),
        Strategy::ThreeNegative => wrong("three nonpositive eigenvalues"),
        Strategy::KNegative if m >= 2 && 2 * k > n => realize_negative_layout(lams, m, overrides),
        Strategy::KNegative => wrong("at least two nonpositive eigenvalues and k > n/2"),
        _ => Err(RealizeError::WrongShape(format!("{} does not apply to a real spectrum", strategy.id()))),
    }
}

/// General op of the same family, when it is a different construction.
/// k-negative delegates to two- and three-negative, so only the
/// few-positive family has one.
fn family_general(strategy: Strategy) -> Option<Strategy> {
    match strategy {
        Strategy::OnePositive | Strategy::TwoPositive => Some(Strategy::KPositive),
        _ => None,
    }
}

/// A diagonal order: `lead` carries the construction, `tail` is appended
/// as a direct sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub lead: Vec<Rational>,
    pub tail: Vec<Rational>,
}

impl Layout {
    pub fn describe(&self) -> String {
        let part = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(", ");
        if self.tail.is_empty() {
            format!("({})", part(&self.lead))
        } else {
            format!("({} | {})", part(&self.lead), part(&self.tail))
        }
    }
}

/// Splits a permuted real list into leading positives and nonpositives,
/// then trailing positives.
pub fn layout_from_order(reals: &[Rational], order: &[usize]) -> Result<Layout, String> {
    let n = reals.len();
    if order.len() != n {
        return Err(format!("order has {} entries, spectrum has {n}", order.len()));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i == 0 || i > n || std::mem::replace(&mut seen[i - 1], true) {
            return Err(format!("order must be a permutation of 1..{n}"));
        }
    }
    let lams: Vec<Rational> = order.iter().map(|&i| reals[i - 1].clone()).collect();
    if lams[0] != reals[0] {
        return Err("order must start with the Perron eigenvalue".into());
    }
    let lead_pos = count_positive(&lams);
    let neg_end = lead_pos + lams[lead_pos..].iter().take_while(|v| !v.is_positive()).count();
    if lams[neg_end..].iter().any(|v| !v.is_positive()) {
        return Err("order must be positives, then nonpositives, then positives".into());
    }
    Ok(Layout { lead: lams[..neg_end].to_vec(), tail: lams[neg_end..].to_vec() })
}

/// Next lexicographic permutation in place; false after the last one.
fn next_permutation(v: &mut [Rational]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Non-default layouts: smallest positives moved to a trailing block, and
/// every distinct order of the nonpositives. At most `cap` layouts.
pub fn candidate_layouts(reals: &[Rational], cap: usize) -> Vec<Layout> {
    let k = count_positive(reals);
    let pos = &reals[..k];
    let mut negs: Vec<Rational> = reals[k..].to_vec();
    negs.sort();
    let mut perms = Vec::new();
    loop {
        perms.push(negs.clone());
        if perms.len() >= cap || !next_permutation(&mut negs) {
            break;
        }
    }
    // Descending order first: it is the default for trail = 0.
    perms.reverse();
    let mut out = Vec::new();
    for trail in 0..k {
        for perm in &perms {
            if trail == 0 && perm.as_slice() == &reals[k..] {
                continue;
            }
            let mut lead = pos[..k - trail].to_vec();
            lead.extend(perm.iter().cloned());
            out.push(Layout { lead, tail: pos[k - trail..].to_vec() });
            if out.len() >= cap {
                return out;
            }
        }
    }
    out
}

fn realize_layout(layout: &Layout, strategy: Option<Strategy>, overrides: &[(String, Scalar)]) -> Result<Realization, RealizeError> {
    let n = layout.lead.len();
    let k = count_positive(&layout.lead);
    let strategy = strategy.unwrap_or_else(|| real_strategy(k, n - k, n));
    let r = realize_real(strategy, &layout.lead, overrides)?;
    Ok(r.direct_sum(&layout.tail))
}

fn mark_permuted(mut r: Realization, layout: &Layout) -> Realization {
    r.notes.push(format!("{} on layout {}", r.strategy.label(), layout.describe()));
    r.strategy = Strategy::Permuted;
    r.params.strategy = Strategy::Permuted.label().to_string();
    r
}

fn permutation_search(c: &ClassifiedSpectrum, diagnostics: &mut Vec<String>) -> Option<Realization> {
    let layouts = candidate_layouts(&c.reals, PERMUTATION_CAP);
    let tried = layouts.len();
    for layout in &layouts {
        if let Ok(r) = realize_layout(layout, None, &[]) {
            diagnostics.push(format!("permuted layout {} is realizable", layout.describe()));
            return Some(mark_permuted(r, layout));
        }
    }
    diagnostics.push(format!("permutation search: no realizable layout among {tried} tried"));
    None
}

/// `diag.i=v` keys give the prescribed diagonal of `C`.
fn prescribed_diagonal(c: &ClassifiedSpectrum, overrides: &[(String, Scalar)]) -> Result<Realization, Failure> {
    let mut diag: BTreeMap<usize, Rational> = BTreeMap::new();
    for (key, value) in overrides {
        let idx = key.strip_prefix("diag.").and_then(|i| i.parse::<usize>().ok());
        match (idx, value.is_real()) {
            (Some(i), true) if (1..=c.n).contains(&i) => {
                diag.insert(i, value.re().clone());
            }
            _ => return Err(Failure::input(format!("prescribed-diagonal takes diag.1..diag.{} only, got {key}", c.n))),
        }
    }
    if diag.len() != c.n {
        return Err(Failure::input(format!("prescribed-diagonal needs diag.1..diag.{}", c.n)));
    }
    let d: Vec<Rational> = diag.into_values().collect();
    realize_prescribed_diagonal(c, &d).map_err(Failure::realize)
}

fn realize_complex(strategy: Strategy, c: &ClassifiedSpectrum, overrides: &[(String, Scalar)]) -> Result<Realization, RealizeError> {
    match strategy {
        Strategy::Complex3 if c.n == 3 && c.pairs.len() == 1 => {
            let pair = &c.pairs[0];
            if let Some((key, _)) = overrides.iter().find(|(k, _)| k != "l.2.1" && k != "l21") {
                return Err(RealizeError::UnknownParameter(key.clone()));
            }
            let l21 = overrides.last().filter(|(_, v)| v.is_real()).map(|(_, v)| v.re().clone());
            if !overrides.is_empty() && l21.is_none() {
                return Err(RealizeError::UnknownParameter("l.2.1".into()));
            }
            realize_complex_3(&c.perron, (&pair.re, &pair.im), l21.as_ref())
        }
        Strategy::Complex3 => Err(RealizeError::WrongShape(format!("complex-3 needs n = 3, got n = {}", c.n))),
        Strategy::Complex4 => realize_complex_4(c, overrides),
        Strategy::ComplexGeneral => realize_complex_general(c, overrides).map(|mut r| {
            r.strategy = Strategy::ComplexGeneral;
            r.params.strategy = Strategy::ComplexGeneral.label().to_string();
            r
        }),
        s => Err(RealizeError::WrongShape(format!("{} needs a real spectrum", s.id()))),
    }
}

/// Parses the spectrum text into a classified spectrum, or a failure at
/// the input or condition stage.
fn prepare(cfg: &RunConfig) -> Result<(ClassifiedSpectrum, ConditionReport, Vec<String>), Box<RunReport>> {
    if let Err(e) = cfg.validate() {
        return Err(Box::new(RunReport::failed(&cfg.spectrum, Failure::input(e))));
    }
    let input = parse_spectrum_with_mode(&cfg.spectrum, cfg.mode)
        .map_err(|e| Box::new(RunReport::failed(&cfg.spectrum, Failure::input(e.to_string()))))?;
    let unchecked = ClassifiedSpectrum::unchecked(&input.values, input.mode, input.floats.clone());
    let jll_k = cfg.jll_k.unwrap_or(unchecked.n);
    let conditions = necessary_conditions(&unchecked, jll_k, cfg.jll_m);
    let classified = classify(&input);
    let mut diagnostics = Vec::new();
    if input.mode == Mode::Float {
        diagnostics.push("float mode: eigenvalues rationalized within 1e-12".to_string());
    }
    if !conditions.jll_ok {
        diagnostics.push(format!(
            "warning: JLL inequality fails ({}); attempting anyway",
            conditions.jll_witness.as_deref().unwrap_or("unknown")
        ));
    }
    let blocking = match (&classified, conditions.blocking_ok()) {
        (Err(e), _) => Some(e.to_string()),
        (Ok(_), false) if !conditions.perron_ok => Some(format!("Perron condition fails: {}", conditions.perron_witness)),
        (Ok(_), false) => {
            let k = conditions.first_failing_power.unwrap_or(1);
            Some(format!("power sum s_{k} = {} < 0", format_rational(&conditions.power_sums[k - 1])))
        }
        (Ok(_), true) => None,
    };
    if let Some(message) = blocking {
        return Err(Box::new(RunReport {
            input: cfg.spectrum.clone(),
            spectrum: Some(unchecked),
            conditions: Some(conditions),
            strategy: None,
            outcome: Outcome::Failed(Failure { stage: Stage::Conditions, message, error: None }),
            diagnostics,
        }));
    }
    Ok((classified.expect("checked above"), conditions, diagnostics))
}

/// Full pipeline for one configuration.
pub fn run(cfg: &RunConfig) -> RunReport {
    let (c, conditions, mut diagnostics) = match prepare(cfg) {
        Ok(p) => p,
        Err(report) => return *report,
    };
    let result = realize_with_config(&c, cfg, &mut diagnostics);
    let (strategy, outcome) = match result {
        Ok(r) => {
            let verification = verify(&r, &c, cfg.tol);
            if !verification.passed {
                diagnostics.push("verification failed".to_string());
            }
            (Some(r.strategy), Outcome::Realized { realization: Box::new(r), verification })
        }
        Err((strategy, failure)) => (strategy, Outcome::Failed(failure)),
    };
    RunReport { input: cfg.spectrum.clone(), spectrum: Some(c), conditions: Some(conditions), strategy, outcome, diagnostics }
}

type Attempt = Result<Realization, (Option<Strategy>, Failure)>;

fn realize_with_config(c: &ClassifiedSpectrum, cfg: &RunConfig, diagnostics: &mut Vec<String>) -> Attempt {
    let overrides = cfg.overrides.as_slice();
    if let Some(order) = &cfg.order {
        if !c.is_real() {
            return Err((None, Failure::input("--order applies to real spectra only")));
        }
        let layout = layout_from_order(&c.reals, order).map_err(|e| (None, Failure::input(e)))?;
        let strategy = cfg.strategy.filter(|s| *s != Strategy::Permuted);
        if layout.lead == c.reals && layout.tail.is_empty() {
            return realize_layout(&layout, strategy, overrides).map_err(|e| (strategy, Failure::realize(e)));
        }
        diagnostics.push(format!("default descending order replaced by {}", layout.describe()));
        return realize_layout(&layout, strategy, overrides)
            .map(|r| mark_permuted(r, &layout))
            .map_err(|e| (Some(Strategy::Permuted), Failure::realize(e)));
    }

    match cfg.strategy {
        Some(Strategy::PrescribedDiagonal) => prescribed_diagonal(c, overrides).map_err(|f| (Some(Strategy::PrescribedDiagonal), f)),
        Some(Strategy::Permuted) => {
            if !c.is_real() {
                return Err((Some(Strategy::Permuted), Failure::input("permuted layouts apply to real spectra only")));
            }
            permutation_search(c, diagnostics).ok_or_else(|| {
                let e = RealizeError::MethodInapplicable { reason: "no permuted layout is realizable".into(), stuck_index: None };
                (Some(Strategy::Permuted), Failure::realize(e))
            })
        }
        Some(s) => {
            let r = if s.is_complex() { realize_complex(s, c, overrides) } else { realize_real(s, &c.reals, overrides) };
            r.map_err(|e| (Some(s), Failure::realize(e)))
        }
        None => auto(c, overrides, diagnostics),
    }
}

fn auto(c: &ClassifiedSpectrum, overrides: &[(String, Scalar)], diagnostics: &mut Vec<String>) -> Attempt {
    let strategy = dispatch(c);
    let first = if strategy.is_complex() {
        realize_complex(strategy, c, overrides)
    } else {
        realize_real(strategy, &c.reals, overrides)
    };
    let err = match first {
        Ok(r) => return Ok(r),
        Err(e) if e.is_input_error() => return Err((Some(strategy), Failure::realize(e))),
        Err(e) => e,
    };
    diagnostics.push(format!("{} inapplicable in the default descending order: {err}", strategy.id()));
    if let Some(general) = family_general(strategy) {
        match realize_real(general, &c.reals, overrides) {
            Ok(r) => return Ok(r),
            Err(e) => diagnostics.push(format!("{} inapplicable in the default descending order: {e}", general.id())),
        }
    }
    if c.is_real() && c.n > 1 {
        if overrides.is_empty() {
            if let Some(r) = permutation_search(c, diagnostics) {
                return Ok(r);
            }
        } else {
            diagnostics.push("permutation search skipped: parameter overrides refer to the default order".to_string());
        }
    }
    Err((Some(strategy), Failure::realize(err)))
}

/// Result of the conditions-only check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub input: String,
    pub spectrum: Option<ClassifiedSpectrum>,
    pub conditions: Option<ConditionReport>,
    /// Input or blocking-condition failure.
    pub failure: Option<Failure>,
    pub diagnostics: Vec<String>,
}

impl CheckReport {
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failure.is_some())
    }
}

/// Conditions only.
pub fn check(cfg: &RunConfig) -> CheckReport {
    match prepare(cfg) {
        Ok((c, conditions, diagnostics)) => CheckReport {
            input: cfg.spectrum.clone(),
            spectrum: Some(c),
            conditions: Some(conditions),
            failure: None,
            diagnostics,
        },
        Err(r) => CheckReport {
            failure: r.failure().cloned(),
            input: r.input,
            spectrum: r.spectrum,
            conditions: r.conditions,
            diagnostics: r.diagnostics,
        },
    }
}

/// Parses a square matrix from rows of rationals or from JSON: an array of
/// rows, or an object whose `"C"` key holds one.
pub fn parse_matrix(text: &str) -> Result<ExactMatrix, String> {
    let trimmed = text.trim_start();
    let rows: Vec<Vec<Scalar>> = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| format!("invalid JSON: {e}"))?;
        let rows = match &value {
            serde_json::Value::Object(map) => map.get("C").ok_or("JSON object has no \"C\" key")?,
            other => other,
        };
        let rows = rows.as_array().ok_or("matrix must be an array of rows")?;
        rows.iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| "matrix rows must be arrays".to_string())?
                    .iter()
                    .map(|cell| match cell {
                        serde_json::Value::String(s) => Scalar::parse(s).ok_or_else(|| format!("bad entry {s:?}")),
                        serde_json::Value::Number(x) => {
                            parse_rational(&x.to_string()).map(Scalar::real).ok_or_else(|| format!("bad entry {x}"))
                        }
                        other => Err(format!("bad entry {other}")),
                    })
                    .collect()
            })
            .collect::<Result<_, String>>()?
    } else {
        text.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.trim_matches(|c| c == '[' || c == ']')
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| Scalar::parse(t).ok_or_else(|| format!("bad entry {t:?}")))
                    .collect()
            })
            .collect::<Result<_, String>>()?
    };
    ExactMatrix::from_rows(rows).map_err(|e| e.to_string())
}

/// Checks a given matrix against the configured spectrum.
pub fn verify_given(cfg: &RunConfig, matrix: &ExactMatrix) -> Result<(ClassifiedSpectrum, Verification), Box<RunReport>> {
    let (c, _, _) = prepare(cfg)?;
    let v = verify_matrix(matrix, &c, cfg.tol);
    Ok((c, v))
}
