//! Parsing, classification and necessary conditions for prescribed spectra.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::SpectrumError;
use crate::scalar::{format_rational, int, rationalize, Rational, Scalar};

/// Float inputs are rationalized to this absolute accuracy.
pub const RATIONALIZE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode {other:?} (exact or float)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumInput {
    /// Exact values; in float mode these are rationalizations of `floats`.
    pub values: Vec<Scalar>,
    pub floats: Vec<Complex64>,
    pub mode: Mode,
    pub source: String,
}

struct Token {
    value: Complex64,
    exact: Option<Scalar>,
}

/// Splits on commas when present, otherwise on whitespace.
fn split_tokens(text: &str) -> Vec<(usize, &str)> {
    let trimmed = text.trim().trim_start_matches(['{', '[', '(']).trim_end_matches(['}', ']', ')']);
    let offset = text.find(trimmed).unwrap_or(0);
    let mut out = Vec::new();
    if trimmed.contains(',') {
        let mut start = 0;
        for piece in trimmed.split(',') {
            out.push((offset + start, piece));
            start += piece.len() + 1;
        }
    } else {
        let mut pos = 0;
        for piece in trimmed.split_whitespace() {
            let at = trimmed[pos..].find(piece).map(|p| p + pos).unwrap_or(pos);
            out.push((offset + at, piece));
            pos = at + piece.len();
        }
    }
    out
}

fn parse_token(raw: &str) -> Option<Token> {
    let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    if let Some(x) = Scalar::parse(&s) {
        return Some(Token { value: x.to_complex(), exact: Some(x) });
    }
    // Sums of terms with sqrt factors, e.g. `-i*sqrt(3)` or `1+2√2i`.
    let mut terms = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    let chars: Vec<char> = s.chars().collect();
    for (k, &c) in chars.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && k > 0 && !matches!(chars[k - 1], 'e' | 'E' | '*' | '/') => {
                terms.push(chars[start..k].iter().collect::<String>());
                start = k;
            }
            _ => {}
        }
    }
    terms.push(chars[start..].iter().collect());
    let mut value = Complex64::new(0.0, 0.0);
    let mut exact = Some(Scalar::zero());
    for term in terms {
        let (v, e) = parse_term(&term)?;
        value += v;
        exact = match (exact, e) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
    }
    Some(Token { value, exact })
}

fn parse_term(term: &str) -> Option<(Complex64, Option<Scalar>)> {
    let (sign, mut rest) = match term.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, term.strip_prefix('+').unwrap_or(term)),
    };
    let mut mag = 1.0f64;
    let mut exact = Some(Rational::one());
    let mut imaginary = false;
    let mut seen = false;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix('*') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('i') {
            if imaginary {
                return None;
            }
            imaginary = true;
            rest = r;
            seen = true;
        } else if rest.starts_with("sqrt(") || rest.starts_with('√') {
            let (arg, r) = if let Some(r) = rest.strip_prefix("sqrt(") {
                let close = r.find(')')?;
                (&r[..close], &r[close + 1..])
            } else {
                let r = &rest['√'.len_utf8()..];
                let end = r.find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '/')).unwrap_or(r.len());
                (&r[..end], &r[end..])
            };
            let q = crate::scalar::parse_rational(arg)?;
            if q.is_negative() {
                return None;
            }
            mag *= crate::scalar::to_f64(&q).sqrt();
            exact = match (exact, rational_sqrt(&q)) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            };
            rest = r;
            seen = true;
        } else {
            let end = number_prefix(rest);
            if end == 0 {
                return None;
            }
            let q = crate::scalar::parse_rational(&rest[..end])?;
            mag *= crate::scalar::to_f64(&q);
            exact = exact.map(|a| a * q);
            rest = &rest[end..];
            seen = true;
        }
    }
    if !seen {
        return None;
    }
    let v = sign * mag;
    let exact = exact.map(|e| if sign < 0.0 { -e } else { e });
    Some(if imaginary {
        (Complex64::new(0.0, v), exact.map(|e| Scalar::new(Rational::zero(), e)))
    } else {
        (Complex64::new(v, 0.0), exact.map(Scalar::real))
    })
}

fn number_prefix(s: &str) -> usize {
    let b = s.as_bytes();
    let mut k = 0;
    while k < b.len() {
        let c = b[k] as char;
        if c.is_ascii_digit() || c == '.' || c == '/' {
            k += 1;
        } else if (c == 'e' || c == 'E') && k > 0 && k + 1 < b.len() {
            let next = b[k + 1] as char;
            if next.is_ascii_digit() || ((next == '-' || next == '+') && k + 2 < b.len()) {
                k += 2;
            } else {
                break;
            }
        } else {
            break;
        }
    }
    k
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

/// Parses a comma- or space-separated list of eigenvalues.
pub fn parse_spectrum(text: &str) -> Result<SpectrumInput, SpectrumError> {
    parse_spectrum_with_mode(text, None)
}

/// As [`parse_spectrum`], optionally forcing float mode.
pub fn parse_spectrum_with_mode(text: &str, force: Option<Mode>) -> Result<SpectrumInput, SpectrumError> {
    let mut tokens = Vec::new();
    for (position, raw) in split_tokens(text) {
        if raw.trim().is_empty() {
            if split_tokens(text).len() == 1 {
                break;
            }
            return Err(SpectrumError::Parse { position, token: raw.to_string() });
        }
        let tok = parse_token(raw).ok_or_else(|| SpectrumError::Parse { position, token: raw.trim().to_string() })?;
        tokens.push(tok);
    }
    if tokens.is_empty() {
        return Err(SpectrumError::Empty);
    }
    let all_exact = tokens.iter().all(|t| t.exact.is_some());
    let mode = match force {
        Some(Mode::Float) => Mode::Float,
        _ if !all_exact => Mode::Float,
        _ => Mode::Exact,
    };
    let floats: Vec<Complex64> = tokens.iter().map(|t| t.value).collect();
    let values: Vec<Scalar> = match mode {
        Mode::Exact => tokens.into_iter().map(|t| t.exact.expect("all exact")).collect(),
        Mode::Float => floats.iter().map(|z| rationalize_complex(*z)).collect(),
    };
    check_conjugate_closure(&values)?;
    Ok(SpectrumInput { values, floats, mode, source: text.trim().to_string() })
}

fn rationalize_complex(z: Complex64) -> Scalar {
    let re = rationalize(z.re, RATIONALIZE_TOL);
    let im = if z.im.abs() <= RATIONALIZE_TOL {
        Rational::zero()
    } else {
        let m = rationalize(z.im.abs(), RATIONALIZE_TOL);
        if z.im < 0.0 {
            -m
        } else {
            m
        }
    };
    Scalar::new(re, im)
}

fn check_conjugate_closure(values: &[Scalar]) -> Result<(), SpectrumError> {
    let mut pending: Vec<Scalar> = Vec::new();
    for v in values.iter().filter(|v| !v.is_real()) {
        match pending.iter().position(|p| p == &v.conj()) {
            Some(k) => {
                pending.remove(k);
            }
            None => pending.push(v.clone()),
        }
    }
    match pending.first() {
        Some(v) => Err(SpectrumError::ConjugateClosure { value: v.to_string() }),
        None => Ok(()),
    }
}

/// A conjugate pair `re ± im·i` with `im > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugatePair {
    pub re: Rational,
    pub im: Rational,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifiedSpectrum {
    pub n: usize,
    /// Real eigenvalues, descending.
    pub reals: Vec<Rational>,
    /// Pairs sorted by real part, descending.
    pub pairs: Vec<ConjugatePair>,
    pub perron: Rational,
    pub k_pos: usize,
    pub s1: Rational,
    /// `s_1..s_n`.
    pub power_sums: Vec<Rational>,
    pub mode: Mode,
    /// Input values as floats, in input order.
    pub floats: Vec<Complex64>,
}

pub fn classify(s: &SpectrumInput) -> Result<ClassifiedSpectrum, SpectrumError> {
    let c = ClassifiedSpectrum::unchecked(&s.values, s.mode, s.floats.clone());
    if !c.perron.is_positive() {
        return Err(SpectrumError::NoPerron(format!(
            "largest real eigenvalue {} is not positive",
            format_rational(&c.perron)
        )));
    }
    let p2 = &c.perron * &c.perron;
    for v in &s.values {
        if v.norm_sqr() > p2 {
            return Err(SpectrumError::NoPerron(format!(
                "|{v}| exceeds the largest real eigenvalue {}",
                format_rational(&c.perron)
            )));
        }
    }
    Ok(c)
}

impl ClassifiedSpectrum {
    /// Classifies without the Perron dominance check.
    pub fn unchecked(values: &[Scalar], mode: Mode, floats: Vec<Complex64>) -> Self {
        let mut reals: Vec<Rational> = values.iter().filter(|v| v.is_real()).map(|v| v.re().clone()).collect();
        reals.sort_by(|a, b| b.cmp(a));
        let mut pairs: Vec<ConjugatePair> = Vec::new();
        for v in values.iter().filter(|v| v.im().is_positive()) {
            match pairs.iter_mut().find(|p| &p.re == v.re() && &p.im == v.im()) {
                Some(p) => p.multiplicity += 1,
                None => pairs.push(ConjugatePair { re: v.re().clone(), im: v.im().clone(), multiplicity: 1 }),
            }
        }
        pairs.sort_by(|a, b| b.re.cmp(&a.re).then(b.im.cmp(&a.im)));
        let perron = reals.first().cloned().unwrap_or_else(Rational::zero);
        let k_pos = reals.iter().filter(|r| r.is_positive()).count();
        let n = values.len();
        let power_sums = power_sums(values, n);
        let s1 = power_sums.first().cloned().unwrap_or_else(Rational::zero);
        ClassifiedSpectrum { n, reals, pairs, perron, k_pos, s1, power_sums, mode, floats }
    }

    /// Exact classification of a real list.
    pub fn from_reals(values: &[Rational]) -> Result<Self, SpectrumError> {
        let scalars: Vec<Scalar> = values.iter().cloned().map(Scalar::real).collect();
        let floats = scalars.iter().map(Scalar::to_complex).collect();
        classify(&SpectrumInput { values: scalars, floats, mode: Mode::Exact, source: String::new() })
    }

    pub fn is_real(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of nonpositive reals (zeros count as nonpositive).
    pub fn k_neg(&self) -> usize {
        self.reals.len() - self.k_pos
    }

    /// Every eigenvalue: reals descending, then each pair as `re − im·i, re + im·i`.
    pub fn values(&self) -> Vec<Scalar> {
        let mut out: Vec<Scalar> = self.reals.iter().cloned().map(Scalar::real).collect();
        for p in &self.pairs {
            for _ in 0..p.multiplicity {
                out.push(Scalar::new(p.re.clone(), -p.im.clone()));
                out.push(Scalar::new(p.re.clone(), p.im.clone()));
            }
        }
        out
    }

    pub fn format(&self) -> String {
        format_values(&self.values())
    }
}

pub fn format_values(values: &[Scalar]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ClassifiedSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.format())
    }
}

/// Real parts of `Σ vᵏ` for `k = 1..=k_max` (imaginary parts cancel for
/// conjugate-closed input).
pub fn power_sums(values: &[Scalar], k_max: usize) -> Vec<Rational> {
    let mut powers: Vec<Scalar> = values.to_vec();
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k > 1 {
            for (p, v) in powers.iter_mut().zip(values) {
                *p = &*p * v;
            }
        }
        let sum = powers.iter().fold(Scalar::zero(), |acc, p| acc + p);
        out.push(sum.re().clone());
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub perron_ok: bool,
    pub perron_witness: String,
    pub power_sums_ok: bool,
    /// `s_1..s_n`.
    pub power_sums: Vec<Rational>,
    pub first_failing_power: Option<usize>,
    pub jll_ok: bool,
    pub first_failing_jll: Option<(usize, usize)>,
    pub jll_witness: Option<String>,
    pub jll_k_max: usize,
    pub jll_m_max: usize,
    pub overall: bool,
}

impl ConditionReport {
    /// Perron membership and power-sum nonnegativity; JLL failures only warn.
    pub fn blocking_ok(&self) -> bool {
        self.perron_ok && self.power_sums_ok
    }

    pub fn to_json(&self) -> Value {
        json!({
            "perron": { "ok": self.perron_ok, "witness": self.perron_witness },
            "power_sums": {
                "ok": self.power_sums_ok,
                "values": self.power_sums.iter().map(format_rational).collect::<Vec<_>>(),
                "first_failing_k": self.first_failing_power,
            },
            "jll": {
                "ok": self.jll_ok,
                "k_max": self.jll_k_max,
                "m_max": self.jll_m_max,
                "first_failing": self.first_failing_jll.map(|(k, m)| json!({ "k": k, "m": m })),
                "witness": self.jll_witness,
            },
            "overall": self.overall,
        })
    }
}

/// Perron dominance, `s_k ≥ 0` for `k = 1..n`, and `s_kᵐ ≤ n^{m−1}·s_{km}`
/// for `k ≤ jll_k_max`, `m ≤ jll_m_max`.
pub fn necessary_conditions(c: &ClassifiedSpectrum, jll_k_max: usize, jll_m_max: usize) -> ConditionReport {
    let values = c.values();
    let p2 = &c.perron * &c.perron;
    let max_mod2 = values.iter().map(Scalar::norm_sqr).max().unwrap_or_else(Rational::zero);
    let perron_ok = c.perron.is_positive() && max_mod2 <= p2;
    let perron_witness = format!(
        "perron {} squared {} vs largest squared modulus {}",
        format_rational(&c.perron),
        format_rational(&p2),
        format_rational(&max_mod2)
    );

    let n = c.n;
    let k_max = jll_k_max.max(1);
    let m_max = jll_m_max.max(1);
    let all = power_sums(&values, n.max(k_max * m_max));
    let first_failing_power = (1..=n).find(|&k| all[k - 1].is_negative());

    let nq = int(n as i64);
    let mut first_failing_jll = None;
    let mut jll_witness = None;
    'outer: for k in 1..=k_max {
        for m in 1..=m_max {
            let sk = &all[k - 1];
            let lhs = num_traits::pow(sk.clone(), m);
            let rhs = num_traits::pow(nq.clone(), m - 1) * &all[k * m - 1];
            if lhs > rhs {
                first_failing_jll = Some((k, m));
                jll_witness = Some(format!(
                    "s_{k}^{m} = {} > {n}^{} * s_{} = {}",
                    format_rational(&lhs),
                    m - 1,
                    k * m,
                    format_rational(&rhs)
                ));
                break 'outer;
            }
        }
    }
    let power_sums_ok = first_failing_power.is_none();
    let jll_ok = first_failing_jll.is_none();
    ConditionReport {
        perron_ok,
        perron_witness,
        power_sums_ok,
        power_sums: all[..n].to_vec(),
        first_failing_power,
        jll_ok,
        first_failing_jll,
        jll_witness,
        jll_k_max: k_max,
        jll_m_max: m_max,
        overall: perron_ok && power_sums_ok && jll_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn parses_real_list() {
        let s = parse_spectrum("10,-2,-2,-2,-1,-1").unwrap();
        assert_eq!(s.mode, Mode::Exact);
        assert_eq!(s.values.len(), 6);
        assert!(s.values.iter().all(Scalar::is_real));
    }

    #[test]
    fn parses_pair_and_real() {
        let s = parse_spectrum("4+3i,4-3i,12").unwrap();
        assert_eq!(s.mode, Mode::Exact);
        let c = classify(&s).unwrap();
        assert_eq!(c.pairs, vec![ConjugatePair { re: int(4), im: int(3), multiplicity: 1 }]);
        assert_eq!(c.reals, vec![int(12)]);
    }

    #[test]
    fn whitespace_and_braces() {
        let s = parse_spectrum("{6 1 1 -4 -4}").unwrap();
        assert_eq!(s.values.len(), 5);
    }

    #[test]
    fn missing_conjugate_rejected() {
        assert_eq!(
            parse_spectrum("1+2i"),
            Err(SpectrumError::ConjugateClosure { value: "1+2i".into() })
        );
    }

    #[test]
    fn parse_error_reports_position() {
        match parse_spectrum("1, x2, 3") {
            Err(SpectrumError::Parse { position, token }) => {
                assert_eq!(token, "x2");
                assert_eq!(position, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sqrt_forces_float_mode() {
        let s = parse_spectrum("12, i*sqrt(3), -i*sqrt(3), 4+3i, 4-3i").unwrap();
        assert_eq!(s.mode, Mode::Float);
        let c = classify(&s).unwrap();
        assert_eq!(c.pairs.len(), 2);
        assert!((crate::scalar::to_f64(&c.pairs[1].im) - 3f64.sqrt()).abs() < 1e-12);
        let t = parse_spectrum("12, √3i, -√3i").unwrap();
        assert_eq!(t.mode, Mode::Float);
        let exact_root = parse_spectrum("2, sqrt(4)i, -sqrt(4)i").unwrap();
        assert_eq!(exact_root.mode, Mode::Exact);
    }

    #[test]
    fn classify_counts() {
        let c = classify(&parse_spectrum("6,1,1,-4,-4").unwrap()).unwrap();
        assert_eq!((c.n, c.k_pos, c.s1.clone()), (5, 3, int(0)));
        let one = classify(&parse_spectrum("5").unwrap()).unwrap();
        assert_eq!((one.n, one.k_pos, one.perron.clone()), (1, 1, int(5)));
        let zero = classify(&parse_spectrum("3,0,-1").unwrap()).unwrap();
        assert_eq!(zero.k_pos, 1);
    }

    #[test]
    fn perron_violation() {
        assert!(matches!(classify(&parse_spectrum("1,-2").unwrap()), Err(SpectrumError::NoPerron(_))));
        assert!(matches!(classify(&parse_spectrum("2,1+5i,1-5i").unwrap()), Err(SpectrumError::NoPerron(_))));
    }

    #[test]
    fn conditions_examples() {
        let c = classify(&parse_spectrum("10,-2,-2,-2,-1,-1").unwrap()).unwrap();
        assert!(necessary_conditions(&c, 6, 3).overall);
        let bad = classify(&parse_spectrum("1,-1,-1").unwrap()).unwrap();
        let r = necessary_conditions(&bad, 3, 3);
        assert!(!r.power_sums_ok);
        assert_eq!(r.first_failing_power, Some(1));
        assert_eq!(r.power_sums[0], int(-1));
    }

    #[test]
    fn jll_failure_detected() {
        // s_1 = 1, s_2 = 1 + 2·(1/4 − 1/4)... choose a list with s_1² > n·s_2.
        let c = ClassifiedSpectrum::unchecked(
            &[Scalar::int(1), Scalar::new(rat(1, 2), int(1)), Scalar::new(rat(1, 2), int(-1))],
            Mode::Exact,
            vec![],
        );
        let r = necessary_conditions(&c, 3, 3);
        assert_eq!(r.first_failing_jll, Some((1, 2)));
        assert!(!r.overall);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn classify_idempotent_under_format(vals in proptest::collection::vec((-20i64..20, 1i64..5), 1..8)) {
                let mut vals: Vec<Rational> = vals.into_iter().map(|(p, q)| rat(p, q)).collect();
                let top = vals.iter().map(|v| v.abs()).max().unwrap() + int(1);
                vals.push(top);
                let text = vals.iter().map(format_rational).collect::<Vec<_>>().join(",");
                let a = classify(&parse_spectrum(&text).unwrap()).unwrap();
                let b = classify(&parse_spectrum(&a.format()).unwrap()).unwrap();
                prop_assert_eq!(a.reals, b.reals);
                prop_assert_eq!(a.power_sums, b.power_sums);
                prop_assert_eq!(a.k_pos, b.k_pos);
            }

            #[test]
            fn nonnegative_matrices_pass_conditions(entries in proptest::collection::vec(0u32..6, 9)) {
                let m = crate::matrix::Matrix::from_fn(3, |i, j| f64::from(entries[i * 3 + j]));
                prop_assume!(entries.iter().any(|&e| e > 0));
                let eig = crate::eigen::numeric_eigenvalues(&m, 1e-12).unwrap();
                // Float check of s_k ≥ 0 and JLL with m = 2.
                let n = 3.0;
                let s = |k: i32| eig.iter().map(|z| z.powi(k).re).sum::<f64>();
                for k in 1..=3 {
                    prop_assert!(s(k) >= -1e-7);
                    prop_assert!(s(k).powi(2) <= n * s(2 * k) + 1e-6 * (1.0 + s(2 * k).abs()));
                }
                let perron = eig.iter().filter(|z| z.im.abs() < 1e-9).map(|z| z.re).fold(f64::MIN, f64::max);
                for z in &eig {
                    prop_assert!(z.norm() <= perron + 1e-6);
                }
            }
        }
    }
}
