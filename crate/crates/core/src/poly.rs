//! Univariate characteristic polynomials and sparse multivariate polynomials
//! used to carry symbolic construction parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::matrix::Entry;
use crate::scalar::{format_rational, to_f64, Rational, Scalar};

/// Monic polynomial with coefficients `c_0..c_n` in ascending degree.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, normalizing to monic.
    pub fn monic(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        let lead = coeffs.last().cloned().unwrap_or_else(Scalar::one);
        let inv = lead.inv().expect("leading coefficient is nonzero after trimming");
        Polynomial { coeffs: coeffs.iter().map(|c| c * &inv).collect() }
    }

    /// `∏(x − r)` over the given roots.
    pub fn from_roots(roots: &[Scalar]) -> Self {
        let mut coeffs = vec![Scalar::one()];
        for r in roots {
            let mut next = vec![Scalar::zero(); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = &next[k + 1] + c;
                next[k] = &next[k] - &(c * r);
            }
            coeffs = next;
        }
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
    }
}

impl Polynomial {
    fn from_raw(coeffs: Vec<Scalar>) -> Option<Self> {
        let mut c = coeffs;
        while c.last().is_some_and(Scalar::is_zero) {
            c.pop();
        }
        (!c.is_empty()).then(|| Polynomial::monic(c))
    }

    pub fn derivative(&self) -> Vec<Scalar> {
        self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * &Scalar::int(k as i64)).collect()
    }

    /// Quotient and remainder by a monic divisor.
    fn div_rem(num: &[Scalar], den: &Polynomial) -> (Vec<Scalar>, Vec<Scalar>) {
        let d = den.degree();
        let mut rem = num.to_vec();
        if rem.len() <= d {
            return (vec![Scalar::zero()], rem);
        }
        let mut quot = vec![Scalar::zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let q = rem[k + d].clone();
            if q.is_zero() {
                continue;
            }
            for (j, c) in den.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&q * c);
            }
            quot[k] = q;
        }
        rem.truncate(d);
        (quot, rem)
    }

    fn gcd(a: &[Scalar], b: &[Scalar]) -> Polynomial {
        let one = || Polynomial { coeffs: vec![Scalar::one()] };
        let (mut x, mut y) = match (Polynomial::from_raw(a.to_vec()), Polynomial::from_raw(b.to_vec())) {
            (Some(x), y) => (x, y),
            (None, Some(y)) => return y,
            (None, None) => return one(),
        };
        while let Some(divisor) = y {
            let (_, r) = Polynomial::div_rem(&x.coeffs, &divisor);
            x = divisor;
            y = Polynomial::from_raw(r);
        }
        x
    }

    fn exact_div(num: &[Scalar], den: &Polynomial) -> Vec<Scalar> {
        let (q, r) = Polynomial::div_rem(num, den);
        debug_assert!(r.iter().all(Scalar::is_zero));
        q
    }

    /// Yun's square-free decomposition: pairs `(factor, multiplicity)` with
    /// pairwise coprime square-free factors whose product is `self`.
    pub fn square_free(&self) -> Vec<(Polynomial, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let df = self.derivative();
        let a0 = Polynomial::gcd(&self.coeffs, &df);
        let mut b = Polynomial::from_raw(Polynomial::exact_div(&self.coeffs, &a0)).expect("nonzero quotient");
        let c = Polynomial::exact_div(&df, &a0);
        let mut d = sub(&c, &b.derivative());
        let mut i = 1;
        while b.degree() > 0 {
            let a = Polynomial::gcd(&b.coeffs, &d);
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            let next_b = Polynomial::from_raw(Polynomial::exact_div(&b.coeffs, &a)).expect("nonzero quotient");
            let c = Polynomial::exact_div(&d, &a);
            d = sub(&c, &next_b.derivative());
            b = next_b;
            i += 1;
        }
        out
    }
}

fn sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(Scalar::zero);
            let y = b.get(k).cloned().unwrap_or_else(Scalar::zero);
            &x - &y
        })
        .collect()
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            let (neg, body) = if c.is_real() {
                let mag = c.re().abs();
                let text = if mag.is_one() && k > 0 { String::new() } else { format_rational(&mag) };
                (c.re().is_negative(), text)
            } else {
                (false, format!("({c})"))
            };
            let sep = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            write!(f, "{sep}{body}{mono}")?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Sorted list of `(variable, exponent)` pairs with positive exponents.
pub type Monomial = Vec<(usize, u32)>;

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Sparse polynomial in real parameters `x_0, x_1, …`.
#[derive(Clone, PartialEq)]
pub struct MultiPoly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Entry> MultiPoly<C> {
    pub fn zero() -> Self {
        MultiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_null() {
            terms.insert(Vec::new(), c);
        }
        MultiPoly { terms }
    }

    pub fn var(index: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(index, 1)], C::unit());
        MultiPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    /// The value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::null()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    /// The variable index when the polynomial is exactly `x_i`.
    pub fn as_var(&self) -> Option<usize> {
        if self.terms.len() != 1 {
            return None;
        }
        let (mono, c) = self.terms.iter().next()?;
        (mono.len() == 1 && mono[0].1 == 1 && c == &C::unit()).then(|| mono[0].0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|(_, e)| e).sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms
            .keys()
            .filter_map(|m| m.iter().find(|(v, _)| *v == var).map(|(_, e)| *e))
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.iter().map(|(v, _)| *v)).collect()
    }

    fn insert(&mut self, mono: Monomial, c: C) {
        if c.is_null() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                let sum = existing.plus(&c);
                if sum.is_null() {
                    self.terms.remove(&mono);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            out.insert(m.clone(), c.times(k));
        }
        out
    }

    /// Replaces `x_var` by a constant.
    pub fn substitute(&self, var: usize, value: &C) -> Self {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            match m.iter().position(|(v, _)| *v == var) {
                None => out.insert(m.clone(), c.clone()),
                Some(pos) => {
                    let mut factor = c.clone();
                    for _ in 0..m[pos].1 {
                        factor = factor.times(value);
                    }
                    let mut rest = m.clone();
                    rest.remove(pos);
                    out.insert(rest, factor);
                }
            }
        }
        out
    }

    /// Evaluates with every variable assigned.
    pub fn eval(&self, values: &[C]) -> C {
        let mut acc = C::null();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, e) in m {
                for _ in 0..*e {
                    term = term.times(&values[*v]);
                }
            }
            acc = acc.plus(&term);
        }
        acc
    }

    pub fn map_coeffs<D: Entry>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            out.insert(m.clone(), f(c));
        }
        out
    }
}

impl MultiPoly<Scalar> {
    pub fn re_part(&self) -> MultiPoly<Rational> {
        self.map_coeffs(|c| c.re().clone())
    }

    pub fn im_part(&self) -> MultiPoly<Rational> {
        self.map_coeffs(|c| c.im().clone())
    }
}

impl MultiPoly<Rational> {
    /// Coefficients `(a, b)` with the polynomial equal to `a·x + b`, when affine.
    pub fn affine_parts(&self) -> Option<(BTreeMap<usize, Rational>, Rational)> {
        let mut lin = BTreeMap::new();
        let mut constant = Rational::zero();
        for (m, c) in &self.terms {
            match m.as_slice() {
                [] => constant = c.clone(),
                [(v, 1)] => {
                    lin.insert(*v, c.clone());
                }
                _ => return None,
            }
        }
        Some((lin, constant))
    }

    /// Coefficients in ascending powers of `var` when it is the only variable.
    pub fn univariate_coeffs(&self, var: usize) -> Option<Vec<Rational>> {
        let mut coeffs = vec![Rational::zero(); self.degree_in(var) as usize + 1];
        for (m, c) in &self.terms {
            match m.as_slice() {
                [] => coeffs[0] = &coeffs[0] + c,
                [(v, e)] if *v == var => coeffs[*e as usize] = &coeffs[*e as usize] + c,
                _ => return None,
            }
        }
        Some(coeffs)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| m.iter().fold(to_f64(c), |acc, (v, e)| acc * x[*v].powi(*e as i32)))
            .sum()
    }

    /// Gradient evaluated at `x`, with `x.len()` components.
    pub fn grad_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for (m, c) in &self.terms {
            let c = to_f64(c);
            for (k, (v, e)) in m.iter().enumerate() {
                let mut term = c * f64::from(*e) * x[*v].powi(*e as i32 - 1);
                for (j, (w, f)) in m.iter().enumerate() {
                    if j != k {
                        term *= x[*w].powi(*f as i32);
                    }
                }
                g[*v] += term;
            }
        }
        g
    }
}

impl<C: Entry> Entry for MultiPoly<C> {
    fn null() -> Self {
        MultiPoly::zero()
    }

    fn unit() -> Self {
        MultiPoly::constant(C::unit())
    }

    fn from_int(v: i64) -> Self {
        MultiPoly::constant(C::from_int(v))
    }

    fn is_null(&self) -> bool {
        self.terms.is_empty()
    }

    fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    fn minus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.negated());
        }
        out
    }

    fn times(&self, o: &Self) -> Self {
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.insert(mono_mul(ma, mb), ca.times(cb));
            }
        }
        out
    }

    fn negated(&self) -> Self {
        self.map_coeffs(|c| c.negated())
    }

    fn try_inv(&self) -> Option<Self> {
        let c = self.as_constant()?;
        c.try_inv().map(MultiPoly::constant)
    }
}

impl<C: Entry + fmt::Display> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Vec<String> = m
                    .iter()
                    .map(|(v, e)| if *e == 1 { format!("x{v}") } else { format!("x{v}^{e}") })
                    .collect();
                if vars.is_empty() {
                    format!("{c}")
                } else {
                    format!("({c})*{}", vars.join("*"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<C: fmt::Debug> fmt::Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}
