//! JSON and text rendering of run results.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::RealizeError;
use crate::matrix::Matrix;
use crate::realize::{CertificateLine, Realization, RealizationParams};
use crate::runner::{CheckReport, Failure, RunReport, Stage, Verification};
use crate::scalar::{format_rational, Rational, Scalar};
use crate::spectrum::{ClassifiedSpectrum, ConditionReport, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format {other:?} (json or text)")),
        }
    }
}

fn float_text(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

/// `"p/q"` or `"a+bi"` in exact mode; numbers (or `"a+bi"` with float
/// parts) in float mode.
pub fn scalar_json(v: &Scalar, mode: Mode) -> Value {
    match mode {
        Mode::Exact => Value::String(v.to_string()),
        Mode::Float => {
            let z = v.to_complex();
            complex_json(z.re, if v.is_real() { 0.0 } else { z.im })
        }
    }
}

fn complex_json(re: f64, im: f64) -> Value {
    if im == 0.0 {
        return json!(re);
    }
    let sign = if im < 0.0 { '-' } else { '+' };
    Value::String(format!("{}{sign}{}i", float_text(re), float_text(im.abs())))
}

fn rational_json(r: &Rational, mode: Mode) -> Value {
    scalar_json(&Scalar::real(r.clone()), mode)
}

pub fn matrix_json(m: &Matrix<Scalar>, mode: Mode) -> Value {
    Value::Array(m.rows().map(|row| Value::Array(row.iter().map(|v| scalar_json(v, mode)).collect())).collect())
}

pub fn spectrum_json(input: &str, c: Option<&ClassifiedSpectrum>) -> Value {
    let Some(c) = c else {
        return json!({ "input": input });
    };
    let values: Vec<Value> = match c.mode {
        Mode::Exact => c.values().iter().map(|v| Value::String(v.to_string())).collect(),
        Mode::Float => c.floats.iter().map(|z| complex_json(z.re, z.im)).collect(),
    };
    json!({ "input": input, "n": c.n, "mode": c.mode.as_str(), "values": values })
}

/// Parameter names as used by `--set`.
pub fn params_json(p: &RealizationParams, mode: Mode) -> Value {
    let mut values = Map::new();
    for (j, v) in &p.alphas {
        values.insert(format!("alpha.{j}"), rational_json(v, mode));
    }
    for ((i, j), v) in &p.betas {
        values.insert(format!("beta.{i}.{j}"), rational_json(v, mode));
    }
    for ((i, j), v) in &p.couplers {
        values.insert(format!("a.{i}.{j}"), rational_json(v, mode));
    }
    for ((i, j), v) in &p.l_free {
        values.insert(format!("l.{i}.{j}"), rational_json(v, mode));
    }
    let mut out = Map::new();
    out.insert("values".into(), Value::Object(values));
    if let Some(t) = &p.t {
        out.insert("t".into(), rational_json(t, mode));
    }
    if !p.cut_indices.is_empty() {
        out.insert("cut_indices".into(), json!(p.cut_indices));
    }
    Value::Object(out)
}

fn certificate_json(lines: &[CertificateLine]) -> Value {
    Value::Array(
        lines
            .iter()
            .map(|l| json!({ "line": l.description, "margin": l.margin.to_string(), "holds": l.holds() }))
            .collect(),
    )
}

pub fn verification_json(v: &Verification) -> Value {
    json!({
        "passed": v.passed,
        "tolerance": v.tolerance,
        "nonnegative": v.nonnegative,
        "min_entry": v.min_entry.as_ref().map(format_rational),
        "first_negative": v.first_negative.as_ref().map(|(i, j, x)| json!({ "row": i, "col": j, "value": format_rational(x) })),
        "similarity": v.similarity,
        "diagonal_matches_spectrum": v.diagonal,
        "char_poly_exact": v.char_poly,
        "eigen_residual": v.eigen_residual,
        "eigen_ok": v.eigen_ok,
        "power_sum_residuals": v.power_sum_residuals,
        "power_sums_ok": v.power_sums_ok,
    })
}

fn failure_json(f: &Failure) -> Value {
    let mut out = Map::new();
    let stage = match f.stage {
        Stage::Input => "input",
        Stage::Conditions => "conditions",
        Stage::Realization => "realization",
    };
    out.insert("stage".into(), json!(stage));
    out.insert("kind".into(), json!(f.kind()));
    out.insert("message".into(), json!(f.message));
    match &f.error {
        Some(RealizeError::EmptyInterval { param, .. } | RealizeError::InfeasibleBeta { param, .. }) => {
            out.insert("param".into(), json!(param));
        }
        Some(RealizeError::MethodInapplicable { stuck_index, .. }) => {
            out.insert("stuck_index".into(), json!(stuck_index));
        }
        Some(RealizeError::InfeasibleDiagonal { index, .. }) => {
            out.insert("index".into(), json!(index));
        }
        _ => {}
    }
    Value::Object(out)
}

pub fn run_json(r: &RunReport) -> Value {
    let mode = r.spectrum.as_ref().map_or(Mode::Exact, |c| c.mode);
    let mut out = Map::new();
    out.insert("spectrum".into(), spectrum_json(&r.input, r.spectrum.as_ref()));
    out.insert("conditions".into(), r.conditions.as_ref().map_or(Value::Null, ConditionReport::to_json));
    out.insert("strategy".into(), r.strategy.map_or(Value::Null, |s| json!(s.label())));
    match (r.realization(), r.verification(), r.failure()) {
        (Some(real), Some(v), _) => {
            out.insert("params".into(), params_json(&real.params, mode));
            out.insert("A".into(), matrix_json(&real.a, mode));
            out.insert("L".into(), matrix_json(real.l.matrix(), mode));
            out.insert("C".into(), matrix_json(&real.c, mode));
            out.insert("certificate".into(), certificate_json(&real.certificate));
            out.insert("verification".into(), verification_json(v));
            let mut diagnostics = r.diagnostics.clone();
            diagnostics.extend(real.notes.iter().cloned());
            if real.searched {
                diagnostics.push("parameters found by numeric search, verified exactly".into());
            }
            out.insert("diagnostics".into(), json!(diagnostics));
        }
        (_, _, Some(f)) => {
            out.insert("failure".into(), failure_json(f));
            out.insert("diagnostics".into(), json!(r.diagnostics));
        }
        _ => unreachable!("a report holds a realization or a failure"),
    }
    Value::Object(out)
}

pub fn check_json(r: &CheckReport) -> Value {
    let mut out = Map::new();
    out.insert("spectrum".into(), spectrum_json(&r.input, r.spectrum.as_ref()));
    out.insert("conditions".into(), r.conditions.as_ref().map_or(Value::Null, ConditionReport::to_json));
    if let Some(f) = &r.failure {
        out.insert("failure".into(), failure_json(f));
    }
    out.insert("diagnostics".into(), json!(r.diagnostics));
    Value::Object(out)
}

pub fn verify_json(input: &str, c: &ClassifiedSpectrum, m: &Matrix<Scalar>, v: &Verification) -> Value {
    json!({
        "spectrum": spectrum_json(input, Some(c)),
        "C": matrix_json(m, Mode::Exact),
        "verification": verification_json(v),
    })
}

pub fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn conditions_text(out: &mut String, c: &ConditionReport) {
    let sums: Vec<String> = c.power_sums.iter().map(format_rational).collect();
    let _ = writeln!(out, "conditions:");
    let _ = writeln!(out, "  perron      {}  ({})", ok(c.perron_ok), c.perron_witness);
    let failing = c.first_failing_power.map(|k| format!(", first failing s_{k}")).unwrap_or_default();
    let _ = writeln!(out, "  power sums  {}  s_1..s_n = {}{failing}", ok(c.power_sums_ok), sums.join(", "));
    let jll = c.jll_witness.as_deref().map(|w| format!(", {w}")).unwrap_or_default();
    let _ = writeln!(out, "  JLL         {}  (k <= {}, m <= {}{jll})", ok(c.jll_ok), c.jll_k_max, c.jll_m_max);
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn matrix_text(out: &mut String, name: &str, m: &Matrix<Scalar>, mode: Mode) {
    let _ = writeln!(out, "{name} =");
    if mode == Mode::Float {
        let cells = m.map(|v| {
            let z = v.to_complex();
            if v.is_real() {
                format!("{:.10}", z.re)
            } else {
                format!("{:.10}{:+.10}i", z.re, z.im)
            }
        });
        let _ = write!(out, "{cells}");
    } else {
        let _ = write!(out, "{m}");
    }
}

fn verification_text(out: &mut String, v: &Verification) {
    let _ = writeln!(out, "verification: {}", if v.passed { "passed" } else { "FAILED" });
    let _ = writeln!(
        out,
        "  nonnegative {}  min entry {}",
        ok(v.nonnegative),
        v.min_entry.as_ref().map(format_rational).unwrap_or_else(|| "-".into())
    );
    if let Some((i, j, x)) = &v.first_negative {
        let _ = writeln!(out, "  first negative entry ({i}, {j}) = {}", format_rational(x));
    }
    if let Some(s) = v.similarity {
        let _ = writeln!(out, "  C = L A L^-1 {}", ok(s));
    }
    if let Some(d) = v.diagonal {
        let _ = writeln!(out, "  diag(A) = spectrum {}", ok(d));
    }
    if let Some(p) = v.char_poly {
        let _ = writeln!(out, "  char poly exact {}", ok(p));
    }
    let res = v.eigen_residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
    let _ = writeln!(out, "  eigenvalue residual {res} ({})", ok(v.eigen_ok));
    let worst = v.power_sum_residuals.iter().cloned().fold(0.0f64, f64::max);
    let _ = writeln!(out, "  power sum residual {worst:.3e} ({})", ok(v.power_sums_ok));
}

pub fn run_text(r: &RunReport) -> String {
    let mut out = String::new();
    let mode = r.spectrum.as_ref().map_or(Mode::Exact, |c| c.mode);
    match &r.spectrum {
        Some(c) => {
            let _ = writeln!(out, "spectrum: {} ({}, n = {})", c.format(), c.mode.as_str(), c.n);
        }
        None => {
            let _ = writeln!(out, "spectrum: {}", r.input);
        }
    }
    if let Some(c) = &r.conditions {
        conditions_text(&mut out, c);
    }
    if let Some(s) = r.strategy {
        let _ = writeln!(out, "strategy: {s}");
    }
    if let (Some(real), Some(v)) = (r.realization(), r.verification()) {
        params_text(&mut out, real, mode);
        matrix_text(&mut out, "A", &real.a, mode);
        matrix_text(&mut out, "L", real.l.matrix(), mode);
        matrix_text(&mut out, "C", &real.c, mode);
        let _ = writeln!(out, "certificate:");
        let width = real.certificate.iter().map(|l| l.description.len()).max().unwrap_or(0);
        for l in &real.certificate {
            let _ = writeln!(out, "  {:<width$}  margin {}  {}", l.description, l.margin, ok(l.holds()));
        }
        verification_text(&mut out, v);
        for note in &real.notes {
            let _ = writeln!(out, "note: {note}");
        }
    }
    if let Some(f) = r.failure() {
        let _ = writeln!(out, "failure ({}): {}", f.kind(), f.message);
    }
    for d in &r.diagnostics {
        let _ = writeln!(out, "diagnostic: {d}");
    }
    out
}

fn params_text(out: &mut String, r: &Realization, mode: Mode) {
    let Value::Object(p) = params_json(&r.params, mode) else { return };
    let Some(Value::Object(values)) = p.get("values") else { return };
    if values.is_empty() {
        return;
    }
    let _ = writeln!(out, "params:");
    for (k, v) in values {
        let text = v.as_str().map_or_else(|| v.to_string(), str::to_string);
        let _ = writeln!(out, "  {k} = {text}");
    }
    if let Some(t) = &r.params.t {
        let _ = writeln!(out, "  t = {}", format_rational(t));
    }
}

pub fn check_text(r: &CheckReport) -> String {
    let mut out = String::new();
    match &r.spectrum {
        Some(c) => {
            let _ = writeln!(out, "spectrum: {} ({}, n = {})", c.format(), c.mode.as_str(), c.n);
        }
        None => {
            let _ = writeln!(out, "spectrum: {}", r.input);
        }
    }
    if let Some(c) = &r.conditions {
        conditions_text(&mut out, c);
    }
    if let Some(f) = &r.failure {
        let _ = writeln!(out, "failure ({}): {}", f.kind(), f.message);
    }
    for d in &r.diagnostics {
        let _ = writeln!(out, "diagnostic: {d}");
    }
    out
}

pub fn verify_text(c: &ClassifiedSpectrum, v: &Verification) -> String {
    let mut out = format!("spectrum: {} ({}, n = {})\n", c.format(), c.mode.as_str(), c.n);
    verification_text(&mut out, v);
    out
}
