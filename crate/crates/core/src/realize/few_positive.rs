//! Real spectra with few positive eigenvalues: the greedy row assignment.

use num_traits::{Signed, Zero};

use super::{finish, require_nonnegative_sum, solve_with, CertificateLine, Overrides, Realization, Strategy};
use crate::error::RealizeError;
use crate::interval::Policy;
use crate::matrix::Entry;
use crate::poly::MultiPoly;
use crate::scalar::{format_rational, Rational, Scalar};
use crate::spectrum::ClassifiedSpectrum;
use crate::template::{Cell, ParamKind, Poly, Solution, Template};

pub(crate) struct Greedy {
    pub template: Template,
    /// Negative columns absorbed by each positive row (0-based).
    pub groups: Vec<Vec<usize>>,
}

/// `lams` lists `k` positives first, then the nonpositive eigenvalues.
/// Negatives are handed out from the last column leftward: row `p`
/// (from `k` down to 2) takes columns until its remaining budget first
/// drops below zero, and row 1 takes the rest.
pub(crate) fn greedy_template(lams: &[Rational], k: usize, beta_policy: Policy) -> Greedy {
    let n = lams.len();
    let mut groups = vec![Vec::new(); k];
    let mut next = n;
    let mut carry = Rational::zero();
    for p in (0..k).rev() {
        let mut budget = &lams[p] - &carry;
        while next > k {
            next -= 1;
            groups[p].push(next);
            budget += &lams[next];
            if budget.is_negative() && p > 0 {
                break;
            }
        }
        if p > 0 {
            carry = -budget;
        }
    }

    let mut t = Template::new(n);
    for (i, lam) in lams.iter().enumerate() {
        t.set_const(Cell::A(i, i), Scalar::real(lam.clone()));
    }
    let owner = |i: usize| groups.iter().position(|g| g.contains(&i));
    let mut alpha: Vec<Poly> = vec![MultiPoly::zero(); n];
    for (i, slot) in alpha.iter_mut().enumerate().skip(1) {
        let cell = if i < k { Cell::A(i - 1, i) } else { Cell::A(owner(i).expect("assigned"), i) };
        *slot = t.param(format!("alpha.{}", i + 1), ParamKind::Alpha, cell, Policy::LowerBound);
    }
    for (p, g) in groups.iter().enumerate() {
        for &i in g {
            t.set(Cell::A(p, i), alpha[i].clone());
        }
    }
    let mut below: Poly = MultiPoly::zero();
    for p in (1..k).rev() {
        let mut coupler = alpha[p].plus(&below);
        for &i in &groups[p] {
            coupler = coupler.plus(&alpha[i]);
        }
        t.set(Cell::A(p - 1, p), coupler.clone());
        below = coupler;
    }
    for (p, g) in groups.iter().enumerate().skip(1) {
        let start = g.iter().copied().min().unwrap_or(n);
        for j in k..start {
            if t.get(Cell::A(p, j)).is_zero() {
                let b = t.param(format!("beta.{}.{}", p + 1, j + 1), ParamKind::Beta, Cell::A(p, j), beta_policy);
                t.set(Cell::A(p, j), b);
            }
        }
    }
    for p in 1..k {
        for c in 0..p {
            t.set_const(Cell::L(p, c), Scalar::one());
        }
    }
    for (p, g) in groups.iter().enumerate() {
        for &i in g {
            for c in 0..=p {
                t.set_const(Cell::L(i, c), Scalar::one());
            }
        }
    }
    Greedy { template: t, groups }
}

fn strategy_for(k: usize) -> Strategy {
    match k {
        0 | 1 => Strategy::OnePositive,
        2 => Strategy::TwoPositive,
        _ => Strategy::KPositive,
    }
}

fn map_error(e: RealizeError, k: usize) -> RealizeError {
    match e {
        RealizeError::EmptyInterval { param, reason } if param.starts_with("beta") => {
            RealizeError::InfeasibleBeta { param, reason }
        }
        RealizeError::EmptyInterval { param, reason } if k <= 1 => {
            RealizeError::InfeasibleAlphas(format!("{param}: {reason}"))
        }
        RealizeError::EmptyInterval { param, reason } if k == 2 => {
            RealizeError::InfeasibleCut(format!("{param}: {reason}"))
        }
        RealizeError::EmptyInterval { param, reason } => {
            let stuck = param.split('.').nth(1).and_then(|s| s.parse().ok());
            RealizeError::MethodInapplicable { reason: format!("{param}: {reason}"), stuck_index: stuck }
        }
        e => e,
    }
}

fn value(s: &Solution, name: &str) -> Rational {
    s.value(name).cloned().unwrap_or_else(Rational::zero)
}

fn certificate(lams: &[Rational], k: usize, groups: &[Vec<usize>], s: &Solution) -> Vec<CertificateLine> {
    let n = lams.len();
    let mut lines = Vec::new();
    let t: Rational = (2..=n).map(|i| value(s, &format!("alpha.{i}"))).sum();
    for i in 2..=n {
        let a = value(s, &format!("alpha.{i}"));
        lines.push(CertificateLine::exact(format!("alpha.{i} + lambda_{i} >= 0"), a + &lams[i - 1]));
    }
    if k <= 2 {
        lines.push(CertificateLine::exact("lambda_1 - t >= 0", &lams[0] - &t));
    }
    if k == 2 {
        let budget = &lams[0] - &lams[1] - &t;
        let mut sum = Rational::zero();
        for j in 3..=n {
            if let Some(b) = s.value(&format!("beta.2.{j}")) {
                let a = value(s, &format!("alpha.{j}"));
                lines.push(CertificateLine::exact(format!("-alpha.{j} <= beta.2.{j}"), b + &a));
                sum += b;
            }
        }
        lines.push(CertificateLine::exact("sum of beta.2.j <= lambda_1 - lambda_2 - t", budget - sum));
    }
    if n == 6 && k == 3 && groups.iter().all(|g| g.len() == 1) {
        let (a2, a4, a5) = (value(s, "alpha.2"), value(s, "alpha.4"), value(s, "alpha.5"));
        let (a24, a34, a35) = (value(s, "beta.2.4"), value(s, "beta.3.4"), value(s, "beta.3.5"));
        let cap = &lams[0] - &lams[1] - &t;
        let top = &a2 + &lams[1] - &lams[2];
        lines.push(CertificateLine::exact("-alpha.5 <= beta.3.5", &a35 + &a5));
        lines.push(CertificateLine::exact("beta.3.5 <= alpha.2 + lambda_2 - lambda_3", &top - &a35));
        lines.push(CertificateLine::exact("-alpha.4 <= beta.2.4", &a24 + &a4));
        lines.push(CertificateLine::exact("beta.2.4 <= lambda_1 - lambda_2 - t", &cap - &a24));
        let both = &a24 + &a34;
        lines.push(CertificateLine::exact("-alpha.4 <= beta.2.4 + beta.3.4", &both + &a4));
        lines.push(CertificateLine::exact("beta.2.4 + beta.3.4 <= lambda_1 - lambda_2 - t", &cap - &both));
    }
    lines
}

/// Greedy construction on an explicit diagonal order with `k` leading positives.
pub(crate) fn realize_greedy(lams: &[Rational], k: usize, overrides: &Overrides) -> Result<Realization, RealizeError> {
    let policy = if k == 2 { Policy::LowerBound } else { Policy::Midpoint };
    greedy(lams, k, policy, strategy_for(k), overrides)
}

/// The k-positive construction (midpoint β) on any `k`.
pub(crate) fn realize_greedy_general(lams: &[Rational], k: usize, overrides: &Overrides) -> Result<Realization, RealizeError> {
    greedy(lams, k, Policy::Midpoint, Strategy::KPositive, overrides)
}

fn greedy(
    lams: &[Rational],
    k: usize,
    policy: Policy,
    strategy: Strategy,
    overrides: &Overrides,
) -> Result<Realization, RealizeError> {
    require_nonnegative_sum(lams)?;
    let g = greedy_template(lams, k, policy);
    let (t, s) = solve_with(g.template, overrides).map_err(|e| map_error(e, k))?;
    let lines = certificate(lams, k, &g.groups, &s);
    let mut r = finish(&t, s, strategy, lines);
    r.params.cut_indices = g.groups.iter().skip(1).filter_map(|g| g.iter().min().map(|c| c + 1)).collect();
    Ok(r)
}

fn real_only(c: &ClassifiedSpectrum) -> Result<(), RealizeError> {
    if c.is_real() {
        Ok(())
    } else {
        Err(RealizeError::WrongShape("spectrum has non-real eigenvalues".into()))
    }
}

/// One positive eigenvalue; `alphas` gives `α_2..α_n` explicitly.
pub fn realize_one_positive(c: &ClassifiedSpectrum, alphas: Option<&[Rational]>) -> Result<Realization, RealizeError> {
    real_only(c)?;
    if c.k_pos > 1 {
        return Err(RealizeError::WrongShape(format!("{} positive eigenvalues", c.k_pos)));
    }
    let lams = &c.reals;
    let n = lams.len();
    let mut overrides = Vec::new();
    if let Some(alphas) = alphas {
        if alphas.len() + 1 != n {
            return Err(RealizeError::WrongShape(format!("expected {} alphas, got {}", n - 1, alphas.len())));
        }
        for (i, a) in alphas.iter().enumerate() {
            if (a + &lams[i + 1]).is_negative() {
                return Err(RealizeError::InfeasibleAlphas(format!(
                    "alpha.{} = {} is below -lambda_{} = {}",
                    i + 2,
                    format_rational(a),
                    i + 2,
                    format_rational(&-lams[i + 1].clone())
                )));
            }
            overrides.push((format!("alpha.{}", i + 2), Scalar::real(a.clone())));
        }
        let t: Rational = alphas.iter().sum();
        if t > lams[0] {
            return Err(RealizeError::InfeasibleAlphas(format!(
                "t = {} exceeds lambda_1 = {}",
                format_rational(&t),
                format_rational(&lams[0])
            )));
        }
    } else if c.s1.is_negative() {
        return Err(RealizeError::InfeasibleAlphas(format!(
            "t = -(lambda_2 + ... + lambda_n) exceeds lambda_1 (sum {})",
            format_rational(&c.s1)
        )));
    }
    realize_greedy(lams, 1, &overrides)
}

/// One positive eigenvalue with the diagonal of `C` prescribed.
pub fn realize_prescribed_diagonal(c: &ClassifiedSpectrum, diag: &[Rational]) -> Result<Realization, RealizeError> {
    real_only(c)?;
    if c.k_pos > 1 {
        return Err(RealizeError::WrongShape(format!("{} positive eigenvalues", c.k_pos)));
    }
    let lams = &c.reals;
    let n = lams.len();
    if diag.len() != n {
        return Err(RealizeError::WrongShape(format!("expected {n} diagonal entries, got {}", diag.len())));
    }
    let total: Rational = diag.iter().sum();
    if total != c.s1 {
        return Err(RealizeError::InfeasibleDiagonal {
            index: 1,
            reason: format!("diagonal sums to {}, eigenvalues to {}", format_rational(&total), format_rational(&c.s1)),
        });
    }
    let mut alphas = Vec::with_capacity(n - 1);
    for i in 1..n {
        if diag[i].is_negative() {
            return Err(RealizeError::InfeasibleDiagonal {
                index: i + 1,
                reason: format!(
                    "alpha.{} = {} is below -lambda_{}",
                    i + 1,
                    format_rational(&(&diag[i] - &lams[i])),
                    i + 1
                ),
            });
        }
        alphas.push(&diag[i] - &lams[i]);
    }
    if diag[0].is_negative() {
        return Err(RealizeError::InfeasibleDiagonal {
            index: 1,
            reason: format!("t exceeds lambda_1 by {}", format_rational(&-diag[0].clone())),
        });
    }
    let mut r = realize_one_positive(c, Some(&alphas))?;
    r.strategy = Strategy::PrescribedDiagonal;
    r.params.strategy = Strategy::PrescribedDiagonal.label().to_string();
    Ok(r)
}

pub fn realize_two_positive(c: &ClassifiedSpectrum, overrides: &Overrides) -> Result<Realization, RealizeError> {
    real_only(c)?;
    if c.k_pos != 2 || c.n < 4 {
        return Err(RealizeError::WrongShape(format!("needs two positives and n >= 4, got k = {}, n = {}", c.k_pos, c.n)));
    }
    realize_greedy(&c.reals, 2, overrides)
}

pub fn realize_k_positive(c: &ClassifiedSpectrum, overrides: &Overrides) -> Result<Realization, RealizeError> {
    real_only(c)?;
    if c.k_pos == 0 || 2 * c.k_pos > c.n {
        return Err(RealizeError::WrongShape(format!("needs 1 <= k <= n/2, got k = {}, n = {}", c.k_pos, c.n)));
    }
    realize_greedy(&c.reals, c.k_pos, overrides)
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

    fn ints(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_ints(rows)
    }

    fn check_spectrum(r: &Realization, c: &ClassifiedSpectrum) {
        assert_eq!(char_poly(&r.c), Polynomial::from_roots(&c.values()));
        assert!(is_nonnegative(&r.c, 0.0));
        assert!(r.certificate.iter().all(CertificateLine::holds), "{:?}", r.certificate);
    }

    fn ten_twos_ones() -> Vec<Rational> {
        [10, -2, -2, -2, -1, -1].iter().map(|&v| int(v)).collect()
    }

    #[test]
    fn suleimanova_default_alphas() {
        let lams = ten_twos_ones();
        let r = realize_greedy(&lams, 1, &[]).unwrap();
        assert_eq!(
            r.c,
            ints(&[
                &[2, 2, 2, 2, 1, 1],
                &[4, 0, 2, 2, 1, 1],
                &[4, 2, 0, 2, 1, 1],
                &[4, 2, 2, 0, 1, 1],
                &[3, 2, 2, 2, 0, 1],
                &[3, 2, 2, 2, 1, 0],
            ])
        );
        assert_eq!(r.params.t, Some(int(8)));
        let c = spec("10,-2,-2,-2,-1,-1");
        check_spectrum(&r, &c);
        // Descending order gives the same construction on the sorted diagonal.
        let d = realize_one_positive(&c, None).unwrap();
        check_spectrum(&d, &c);
        assert_eq!(d.diagonal(), c.reals.iter().cloned().map(Scalar::real).collect::<Vec<_>>());
    }

    #[test]
    fn two_by_two_swap() {
        let r = realize_one_positive(&spec("1,-1"), Some(&[int(1)])).unwrap();
        assert_eq!(r.c, ints(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn explicit_alpha_violations() {
        let c = spec("10,-2,-2,-2,-1,-1");
        let low = [int(1), int(2), int(2), int(1), int(1)];
        assert!(matches!(realize_one_positive(&c, Some(&low)), Err(RealizeError::InfeasibleAlphas(_))));
        let high = [int(3), int(3), int(3), int(1), int(1)];
        assert!(matches!(realize_one_positive(&c, Some(&high)), Err(RealizeError::InfeasibleAlphas(_))));
        assert!(matches!(realize_one_positive(&spec("7,3,-5,-5"), None), Err(RealizeError::WrongShape(_))));
    }

    #[test]
    fn prescribed_diagonals() {
        let lams = ten_twos_ones();
        let alphas = [rat(5, 2), rat(5, 2), rat(5, 2), int(1), int(1)];
        let o: Vec<(String, Scalar)> =
            alphas.iter().enumerate().map(|(i, a)| (format!("alpha.{}", i + 2), Scalar::real(a.clone()))).collect();
        let r = realize_greedy(&lams, 1, &o).unwrap();
        let h = |p: i64| Scalar::frac(p, 2);
        let expected: Vec<Vec<Scalar>> = [
            [1, 5, 5, 5, 2, 2],
            [5, 1, 5, 5, 2, 2],
            [5, 5, 1, 5, 2, 2],
            [5, 5, 5, 1, 2, 2],
            [3, 5, 5, 5, 0, 2],
            [3, 5, 5, 5, 2, 0],
        ]
        .iter()
        .map(|row| row.iter().map(|&v| h(v)).collect())
        .collect();
        assert_eq!(r.c, ExactMatrix::from_rows(expected).unwrap());
        assert_eq!(r.params.t, Some(rat(19, 2)));

        // Same diagonal request against the descending order.
        let c = spec("10,-2,-2,-2,-1,-1");
        let half = rat(1, 2);
        let d = [half.clone(), int(0), int(0), half.clone(), half.clone(), half];
        let r = realize_prescribed_diagonal(&c, &d).unwrap();
        let diag: Vec<Scalar> = (0..6).map(|i| r.c.get(i, i).clone()).collect();
        assert_eq!(diag, d.iter().cloned().map(Scalar::real).collect::<Vec<_>>());
        assert_eq!(r.strategy, Strategy::PrescribedDiagonal);
        check_spectrum(&r, &c);

        let r = realize_prescribed_diagonal(&spec("5,-5"), &[int(0), int(0)]).unwrap();
        assert_eq!(r.c, ints(&[&[0, 5], &[5, 0]]));
        let r = realize_prescribed_diagonal(&spec("4,-1"), &[int(3), int(0)]).unwrap();
        assert_eq!(r.c, ints(&[&[3, 1], &[4, 0]]));

        let bad = realize_prescribed_diagonal(&spec("4,-1"), &[int(4), int(-1)]);
        assert!(matches!(bad, Err(RealizeError::InfeasibleDiagonal { index: 2, .. })));
        let bad_sum = realize_prescribed_diagonal(&spec("4,-1"), &[int(1), int(1)]);
        assert!(matches!(bad_sum, Err(RealizeError::InfeasibleDiagonal { index: 1, .. })));
    }

    #[test]
    fn two_positive_default_parameters() {
        let c = spec("7,3,-5,-5");
        let r = realize_two_positive(&c, &[]).unwrap();
        assert_eq!(r.c, ints(&[&[0, 2, 5, 0], &[2, 0, 0, 5], &[5, 2, 0, 0], &[2, 5, 0, 0]]));
        assert_eq!(r.params.cut_indices, vec![4]);
        check_spectrum(&r, &c);
    }

    #[test]
    fn two_positive_oracle() {
        let c = spec("2,1,-1,-2");
        let r = realize_two_positive(&c, &[]).unwrap();
        check_spectrum(&r, &c);
    }

    fn coupled_block_c(a27: &Rational) -> ExactMatrix {
        let top = int(-1) - a27;
        let mid = int(2) + a27;
        let row = |first: Rational, second: i64, rest: [i64; 4], seventh: Rational, last: i64| {
            let mut v = vec![Scalar::real(first), Scalar::int(second)];
            v.extend(rest.iter().map(|&x| Scalar::int(x)));
            v.push(Scalar::real(seventh));
            v.push(Scalar::int(last));
            v
        };
        ExactMatrix::from_rows(vec![
            row(int(0), 1, [5, 5, 3, 3], int(2), 0),
            row(top.clone(), 0, [5, 5, 3, 3], mid.clone(), 2),
            row(int(5), 1, [0, 5, 3, 3], int(2), 0),
            row(int(5), 1, [5, 0, 3, 3], int(2), 0),
            row(int(3), 1, [5, 5, 0, 3], int(2), 0),
            row(int(3), 1, [5, 5, 3, 0], int(2), 0),
            row(int(2), 1, [5, 5, 3, 3], int(0), 0),
            row(top, 2, [5, 5, 3, 3], mid, 0),
        ])
        .unwrap()
    }

    #[test]
    fn coupled_block_parameter() {
        let lams: Vec<Rational> = [19, 1, -5, -5, -3, -3, -2, -2].iter().map(|&v| int(v)).collect();
        let c = spec("19,1,-5,-5,-3,-3,-2,-2");
        for a27 in [int(-2), rat(-3, 2), int(-1)] {
            let mut o: Vec<(String, Scalar)> = (3..=6).map(|j| (format!("beta.2.{j}"), Scalar::zero())).collect();
            o.push(("a.2.7".into(), Scalar::real(a27.clone())));
            let r = realize_greedy(&lams, 2, &o).unwrap();
            check_spectrum(&r, &c);
            assert_eq!(r.c, coupled_block_c(&a27));
            let iv = r.certificate.iter().find(|l| l.description == "-2 <= beta.2.7 <= -1");
            assert!(iv.is_some_and(CertificateLine::holds), "{:?}", r.certificate);
        }
        let o = vec![("a.2.7".to_string(), Scalar::frac(-201, 100))];
        assert!(realize_greedy(&lams, 2, &o).is_err());
        let d = realize_two_positive(&c, &[]).unwrap();
        check_spectrum(&d, &c);
    }

    #[test]
    fn three_positive_six_by_six() {
        let c = spec("6,1,1,1,-4,-4");
        let r = realize_k_positive(&c, &[]);
        // Four positives exceed n/2 here; the shape belongs to the other family.
        assert!(matches!(r, Err(RealizeError::WrongShape(_))));
        let c = spec("9,2,1,-3,-4,-5");
        let r = realize_k_positive(&c, &[]).unwrap();
        check_spectrum(&r, &c);
        assert!(r.certificate.iter().any(|l| l.description.starts_with("-alpha.5 <= beta.3.5")));
    }

    #[test]
    fn wrong_shapes() {
        assert!(matches!(realize_two_positive(&spec("5,-1,-1,-1"), &[]), Err(RealizeError::WrongShape(_))));
        assert!(matches!(realize_k_positive(&spec("5,4,3,-1"), &[]), Err(RealizeError::WrongShape(_))));
    }
}
