//! Spectra with conjugate pairs: `L` carries `i` on the diagonal of each
//! pair's first row so that `C` comes out real.

use num_traits::{Signed, Zero};

use super::{finish, solve_with, Overrides, Realization, Strategy};
use crate::error::RealizeError;
use crate::interval::Policy;
use crate::scalar::{format_rational, Rational, Scalar};
use crate::spectrum::{ClassifiedSpectrum, ConjugatePair};
use crate::template::{Cell, ParamKind, Template};

/// Layout: the Perron value, then nonpositive reals coupled through row 1,
/// then each pair (ascending real part) as a 2×2 cell, then the remaining
/// positive reals as a direct sum.
fn complex_template(perron: &Rational, others: &[Rational], pairs: &[(Rational, Rational)]) -> Template {
    let nonpos: Vec<&Rational> = others.iter().filter(|r| !r.is_positive()).collect();
    let pos: Vec<&Rational> = others.iter().filter(|r| r.is_positive()).collect();
    let n = 1 + others.len() + 2 * pairs.len();
    let mut t = Template::new(n);
    t.set_const(Cell::A(0, 0), Scalar::real(perron.clone()));
    let mut idx = 1;
    for lam in nonpos {
        t.set_const(Cell::A(idx, idx), Scalar::real(lam.clone()));
        t.set_const(Cell::A(0, idx), Scalar::real(-lam.clone()));
        t.set_const(Cell::L(idx, 0), Scalar::one());
        idx += 1;
    }
    for (lam, mu) in pairs {
        let c = idx;
        let imu = Scalar::new(Rational::zero(), mu.clone());
        t.set_const(Cell::A(c, c), Scalar::new(lam.clone(), -mu.clone()));
        t.set_const(Cell::A(c, c + 1), -imu.clone());
        t.set_const(Cell::A(c + 1, c + 1), Scalar::new(lam.clone(), mu.clone()));
        t.set_const(Cell::A(0, c), imu);
        let l = t.param(format!("l.{}.1", c + 1), ParamKind::LEntry, Cell::L(c, 0), Policy::Midpoint);
        t.set(Cell::L(c, 0), l);
        t.set_const(Cell::L(c, c), Scalar::i());
        if lam.is_negative() {
            let ratio = lam / mu;
            t.set_const(Cell::L(c + 1, 0), Scalar::real(&ratio * &ratio + Rational::from_integer(1.into())));
            t.set_const(Cell::L(c + 1, c), Scalar::new(Rational::from_integer(1.into()), -ratio));
        } else {
            t.set_const(Cell::L(c + 1, 0), Scalar::one());
            t.set_const(Cell::L(c + 1, c), Scalar::one());
        }
        idx += 2;
    }
    for lam in pos {
        t.set_const(Cell::A(idx, idx), Scalar::real(lam.clone()));
        idx += 1;
    }
    t
}

fn expand(pairs: &[ConjugatePair]) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = pairs
        .iter()
        .flat_map(|p| std::iter::repeat_n((p.re.clone(), p.im.clone()), p.multiplicity))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

fn realize(c: &ClassifiedSpectrum, strategy: Strategy, overrides: &Overrides) -> Result<Realization, RealizeError> {
    if c.pairs.is_empty() {
        return Err(RealizeError::WrongShape("no conjugate pairs".into()));
    }
    if c.s1.is_negative() {
        return Err(RealizeError::WrongShape(format!("eigenvalue sum {} is negative", format_rational(&c.s1))));
    }
    let perron = c.reals.first().ok_or_else(|| RealizeError::WrongShape("no real eigenvalue".into()))?;
    let t = complex_template(perron, &c.reals[1..], &expand(&c.pairs));
    let (t, s) = solve_with(t, overrides)?;
    Ok(finish(&t, s, strategy, Vec::new()))
}

/// `σ = {λ₁, λ ± μi}`; `l21` pins the free entry of `L`.
pub fn realize_complex_3(perron: &Rational, pair: (&Rational, &Rational), l21: Option<&Rational>) -> Result<Realization, RealizeError> {
    let (lam, mu) = pair;
    if !mu.is_positive() {
        return Err(RealizeError::WrongShape("imaginary part must be positive".into()));
    }
    let values = [
        Scalar::real(perron.clone()),
        Scalar::new(lam.clone(), -mu.clone()),
        Scalar::new(lam.clone(), mu.clone()),
    ];
    let c = ClassifiedSpectrum::unchecked(&values, crate::spectrum::Mode::Exact, values.iter().map(Scalar::to_complex).collect());
    let overrides: Vec<(String, Scalar)> =
        l21.map(|v| ("l.2.1".to_string(), Scalar::real(v.clone()))).into_iter().collect();
    realize(&c, Strategy::Complex3, &overrides)
}

pub fn realize_complex_4(c: &ClassifiedSpectrum, overrides: &Overrides) -> Result<Realization, RealizeError> {
    if c.n != 4 || c.reals.len() != 2 {
        return Err(RealizeError::WrongShape(format!("needs two reals and one pair, got n = {}", c.n)));
    }
    realize(c, Strategy::Complex4, overrides)
}

pub fn realize_complex_general(c: &ClassifiedSpectrum, overrides: &Overrides) -> Result<Realization, RealizeError> {
    let strategy = match c.n {
        3 => Strategy::Complex3,
        4 if c.reals.len() == 2 => Strategy::Complex4,
        _ => Strategy::ComplexGeneral,
    };
    realize(c, strategy, overrides)
}
