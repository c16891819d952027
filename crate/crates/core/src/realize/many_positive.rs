//! Real spectra with more positive than nonpositive eigenvalues.

use super::{finish, require_nonnegative_sum, solve_with, CertificateLine, Overrides, Realization, Strategy};
use crate::error::RealizeError;
use crate::interval::Policy;
use crate::scalar::{Rational, Scalar};
use crate::spectrum::ClassifiedSpectrum;
use crate::template::{Cell, ParamKind, Template};

fn diagonal(lams: &[Rational]) -> Template {
    let mut t = Template::new(lams.len());
    for (i, lam) in lams.iter().enumerate() {
        t.set_const(Cell::A(i, i), Scalar::real(lam.clone()));
    }
    t
}

/// `−(λ_from + … + λ_to)` over 1-based inclusive bounds.
fn neg_sum(lams: &[Rational], from: usize, to: usize) -> Scalar {
    let s: Rational = if from > to { Rational::from_integer(0.into()) } else { lams[from - 1..to].iter().sum() };
    Scalar::real(-s)
}

fn l_param(t: &mut Template, i: usize, j: usize) {
    let v = t.param(format!("l.{i}.{j}"), ParamKind::LEntry, Cell::L(i - 1, j - 1), Policy::Midpoint);
    t.set(Cell::L(i - 1, j - 1), v);
}

/// Two nonpositive eigenvalues, `k = n − 2 ≥ 3` positives first.
pub(crate) fn two_negative_template(lams: &[Rational]) -> Template {
    let n = lams.len();
    let k = n - 2;
    let mut t = diagonal(lams);
    t.set_const(Cell::A(0, 1), neg_sum(lams, 2, n));
    for p in 2..=k.saturating_sub(2) {
        t.set_const(Cell::A(p - 1, p), neg_sum(lams, p + 1, n));
    }
    t.set_const(Cell::A(k - 2, k - 1), Scalar::real(-(&lams[k - 1] + &lams[n - 1])));
    t.set_const(Cell::A(k - 2, n - 2), Scalar::real(-lams[n - 2].clone()));
    let a = t.param(format!("a.{k}.{}", n - 1), ParamKind::Coupler, Cell::A(k - 1, n - 2), Policy::Midpoint);
    t.set(Cell::A(k - 1, n - 2), a);
    t.set_const(Cell::A(k - 1, n - 1), Scalar::real(-lams[n - 1].clone()));

    for r in 2..k {
        for c in 1..r {
            t.set_const(Cell::L(r - 1, c - 1), Scalar::one());
        }
    }
    for c in 1..=k - 2 {
        l_param(&mut t, k, c);
    }
    t.set_const(Cell::L(k - 1, k - 2), Scalar::one());
    for c in 1..k {
        t.set_const(Cell::L(n - 2, c - 1), Scalar::one());
    }
    for c in 1..=k - 2 {
        l_param(&mut t, n, c);
    }
    t.set_const(Cell::L(n - 1, k - 2), Scalar::one());
    t.set_const(Cell::L(n - 1, k - 1), Scalar::one());
    t
}

/// `m ≥ 3` nonpositive eigenvalues after `k = n − m` positives: a chain of
/// first-superdiagonal deficits, then one row per negative with couplers
/// to the earlier negative columns.
pub(crate) fn m_negative_template(lams: &[Rational], m: usize) -> Result<Template, RealizeError> {
    let n = lams.len();
    if m >= n || n - m <= m {
        return Err(RealizeError::ShapeConflict(format!(
            "{m} negative rows need more than {m} positive rows, have {}",
            n.saturating_sub(m)
        )));
    }
    let k = n - m;
    let mut t = diagonal(lams);
    for p in 1..=k - m {
        t.set_const(Cell::A(p - 1, p), neg_sum(lams, p + 1, n));
    }
    for q in 1..=m {
        let p = k - m + q;
        let negc = n - m + q;
        if q < m {
            let deficit = neg_sum(lams, p + 1, k) + neg_sum(lams, negc + 1, n);
            t.set_const(Cell::A(p - 1, p), deficit);
        }
        t.set_const(Cell::A(p - 1, negc - 1), Scalar::real(-lams[negc - 1].clone()));
        for j in 1..q {
            let col = n - m + j;
            let a = t.param(format!("a.{p}.{col}"), ParamKind::Coupler, Cell::A(p - 1, col - 1), Policy::Midpoint);
            t.set(Cell::A(p - 1, col - 1), a);
        }
    }
    for p in 2..=k {
        for c in 1..p {
            if p > k - m && c + 2 <= p {
                l_param(&mut t, p, c);
            } else {
                t.set_const(Cell::L(p - 1, c - 1), Scalar::one());
            }
        }
    }
    for q in 1..=m {
        let p = k - m + q;
        let r = n - m + q;
        t.set_const(Cell::L(r - 1, p - 1), Scalar::one());
        for c in 1..p {
            if q == 1 {
                l_param(&mut t, r, c);
            } else {
                let alias = t.get(Cell::L(p - 1, c - 1)).clone();
                t.set(Cell::L(r - 1, c - 1), alias);
            }
        }
    }
    Ok(t)
}

/// Realizes an explicit order with `m` trailing nonpositive eigenvalues.
pub(crate) fn realize_negative_layout(lams: &[Rational], m: usize, overrides: &Overrides) -> Result<Realization, RealizeError> {
    require_nonnegative_sum(lams)?;
    let n = lams.len();
    let (template, strategy) = match m {
        2 if n >= 5 => (two_negative_template(lams), Strategy::TwoNegative),
        2 => {
            return Err(RealizeError::ShapeConflict(format!("two negative rows need n >= 5, have n = {n}")));
        }
        3 => (m_negative_template(lams, 3)?, Strategy::ThreeNegative),
        _ => (m_negative_template(lams, m)?, Strategy::KNegative),
    };
    let (t, s) = solve_with(template, overrides)?;
    let mut lines = Vec::new();
    if m == 2 {
        let s1: Rational = lams.iter().sum();
        let c12 = s.c.get(0, 1).re().clone();
        debug_assert_eq!(c12, &lams[0] - &s1);
        lines.push(CertificateLine::exact("C(1,2) = lambda_1 - s_1 >= 0", c12));
    }
    Ok(finish(&t, s, strategy, lines))
}

fn shape(c: &ClassifiedSpectrum, m: usize, min_k: usize) -> Result<(), RealizeError> {
    if !c.is_real() {
        return Err(RealizeError::WrongShape("spectrum has non-real eigenvalues".into()));
    }
    if c.k_neg() != m || c.k_pos < min_k {
        return Err(RealizeError::WrongShape(format!(
            "needs {m} nonpositive and at least {min_k} positive eigenvalues, got {} and {}",
            c.k_neg(),
            c.k_pos
        )));
    }
    Ok(())
}

pub fn realize_two_negative(c: &ClassifiedSpectrum, overrides: &Overrides) -> Result<Realization, RealizeError> {
    shape(c, 2, 3)?;
    realize_negative_layout(&c.reals, 2, overrides)
}

pub fn realize_three_negative(c: &ClassifiedSpectrum, overrides: &Overrides) -> Result<Realization, RealizeError> {
    shape(c, 3, 4)?;
    realize_negative_layout(&c.reals, 3, overrides)
}

pub fn realize_k_negative(c: &ClassifiedSpectrum, overrides: &Overrides) -> Result<Realization, RealizeError> {
    let m = c.k_neg();
    if !c.is_real() || m < 2 || 2 * c.k_pos <= c.n {
        return Err(RealizeError::WrongShape(format!(
            "needs at least two nonpositive eigenvalues and k > n/2, got k = {}, n = {}",
            c.k_pos, c.n
        )));
    }
    realize_negative_layout(&c.reals, m, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{char_poly, is_nonnegative, ExactMatrix};
    use crate::poly::Polynomial;
    use crate::scalar::{int, rat};
    use crate::spectrum::{classify, parse_spectrum};

    fn spec(text: &str) -> ClassifiedSpectrum {
        classify(&parse_spectrum(text).unwrap()).unwrap()
    }

    fn set(pairs: &[(&str, i64, i64)]) -> Vec<(String, Scalar)> {
        pairs.iter().map(|&(k, p, q)| (k.to_string(), Scalar::frac(p, q))).collect()
    }

    fn frac_matrix(rows: &[&[(i64, i64)]]) -> ExactMatrix {
        ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, q)| Scalar::frac(p, q)).collect()).collect()).unwrap()
    }

    #[test]
    fn five_by_five_at_interval_corner() {
        let c = spec("6,1,1,-4,-4");
        let o = set(&[("a.3.4", -4, 1), ("l.3.1", 1, 2), ("l.5.1", 1, 2)]);
        let r = realize_two_negative(&c, &o).unwrap();
        let w = |v: i64| (v, 1);
        let h = (1, 2);
        let expected = frac_matrix(&[
            &[w(0), w(6), w(0), w(0), w(0)],
            &[h, w(0), w(3), w(4), w(0)],
            &[w(1), w(0), w(0), w(0), w(4)],
            &[h, w(4), w(3), w(0), w(0)],
            &[w(1), w(0), w(4), w(0), w(0)],
        ]);
        assert_eq!(r.c, expected);
        assert_eq!(char_poly(&r.c), Polynomial::from_roots(&c.values()));
        let c12 = r.certificate.iter().find(|l| l.description.starts_with("C(1,2)")).unwrap();
        assert_eq!(c12.margin, crate::interval::Num::Exact(int(6)));
    }

    #[test]
    fn free_rows_of_l() {
        let c = spec("6,1,1,-4,-4");
        let r = realize_two_negative(&c, &[]).unwrap();
        assert!(is_nonnegative(&r.c, 0.0));
        let l = r.l.matrix();
        let zero_one = |i: usize| (0..i).all(|j| l.get(i, j).is_zero() || l.get(i, j).is_one());
        let free: Vec<usize> = (0..5).filter(|&i| !zero_one(i)).map(|i| i + 1).collect();
        assert!(free.iter().all(|i| [3, 5].contains(i)));
    }

    #[test]
    fn default_search_small_cases() {
        for text in ["5,1,1,-3,-3", "6,1,1,-4,-4", "9,3,2,2,-4,-4,-4", "10,2,2,1,1,-4,-4,-4,-4"] {
            let c = spec(text);
            match realize_k_negative(&c, &[]) {
                Ok(r) => {
                    assert!(is_nonnegative(&r.c, 0.0), "{text}");
                    assert_eq!(char_poly(&r.c), Polynomial::from_roots(&c.values()), "{text}");
                }
                Err(e) => assert!(matches!(e, RealizeError::MethodInapplicable { .. } | RealizeError::EmptyInterval { .. }), "{text}: {e}"),
            }
        }
    }

    #[test]
    fn eight_by_eight_first_parameter_set() {
        let c = spec("8,2,2,2,1,-5,-5,-5");
        let o = set(&[
            ("a.4.6", -5, 1),
            ("a.5.6", 20, 7),
            ("a.5.7", -5, 1),
            ("l.3.1", 4, 5),
            ("l.4.1", 1, 4),
            ("l.4.2", 33, 70),
            ("l.5.1", 1, 20),
            ("l.6.1", 23, 70),
            ("l.6.2", 1, 2),
            ("l.7.1", 1, 4),
            ("l.7.2", 33, 70),
            ("l.8.1", 1, 20),
            ("l.8.2", 9, 70),
            ("l.8.3", 3, 7),
        ]);
        let r = realize_three_negative(&c, &o).unwrap();
        let w = |v: i64| (v, 1);
        let expected = frac_matrix(&[
            &[w(0), w(8), w(0), w(0), w(0), w(0), w(0), w(0)],
            &[w(0), w(0), w(10), w(0), w(0), w(0), w(0), w(0)],
            &[(57, 140), (13, 5), w(0), w(7), w(0), w(5), w(0), w(0)],
            &[(67, 140), (1, 14), w(0), w(0), w(4), w(0), w(5), w(0)],
            &[(19, 140), (1, 70), w(0), w(0), w(0), w(0), w(0), w(5)],
            &[(11, 20), (23, 70), w(0), w(7), w(0), w(0), w(0), w(0)],
            &[(67, 140), (1, 14), w(0), w(5), w(4), w(0), w(0), w(0)],
            &[(19, 140), (1, 70), w(0), w(0), w(5), w(0), w(0), w(0)],
        ]);
        assert_eq!(r.c, expected);
        assert_eq!(r.params.l_free.get(&(5, 2)), Some(&rat(9, 70)));
    }

    #[test]
    fn conflicting_alias_values_rejected() {
        let c = spec("8,2,2,2,1,-5,-5,-5");
        let o = set(&[("l.4.1", 1, 4), ("l.7.1", 1, 3)]);
        assert!(matches!(realize_three_negative(&c, &o), Err(RealizeError::UnknownParameter(_))));
    }

    #[test]
    fn shapes() {
        assert!(matches!(realize_two_negative(&spec("6,1,-4,-1,-1"), &[]), Err(RealizeError::WrongShape(_))));
        assert!(matches!(m_negative_template(&[int(3), int(1), int(1), int(-1), int(-1), int(-1)], 3), Err(RealizeError::ShapeConflict(_))));
    }
}
