//! Dense square matrices, unit lower triangular similarity, and exact
//! spectral invariants.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::NumericError;
use crate::poly::Polynomial;
use crate::scalar::{int, Rational, Scalar};

/// Field-like entry type; `try_inv` returns `None` for non-invertible values.
pub trait Entry: Clone + PartialEq + fmt::Debug {
    fn null() -> Self;
    fn unit() -> Self;
    fn from_int(v: i64) -> Self;
    fn is_null(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn try_inv(&self) -> Option<Self>;
}

impl Entry for Rational {
    fn null() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_int(v: i64) -> Self {
        int(v)
    }
    fn is_null(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self.clone()
    }
    fn try_inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Entry for Scalar {
    fn null() -> Self {
        Scalar::zero()
    }
    fn unit() -> Self {
        Scalar::one()
    }
    fn from_int(v: i64) -> Self {
        Scalar::int(v)
    }
    fn is_null(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
}

impl Entry for f64 {
    fn null() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn is_null(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn try_inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

/// Row-major square matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type ExactMatrix = Matrix<Scalar>;
pub type FloatMatrix = Matrix<f64>;

impl<T> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, NumericError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(NumericError::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let n = self.n;
        self.data.iter().enumerate().map(move |(k, v)| (k / n, k % n, v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { n: self.n, data: self.data.iter().map(&mut f).collect() }
    }
}

impl<T: Entry> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix::from_fn(n, |_, _| T::null())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, |i, j| if i == j { T::unit() } else { T::null() })
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>, NumericError> {
        if self.n != other.n {
            return Err(NumericError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut out: Matrix<T> = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_null() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_null() {
                        continue;
                    }
                    let v = out.get(i, j).plus(&a.times(b));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::null(), |acc, i| acc.plus(self.get(i, i)))
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.entries().all(|(i, j, v)| j <= i || v.is_null())
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.entries().all(|(i, j, v)| j >= i || v.is_null())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(|v| v.to_string()).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.n {
            let row: Vec<String> =
                (0..self.n).map(|j| format!("{:>width$}", cells[i * self.n + j])).collect();
            writeln!(f, "[ {} ]", row.join("  "))?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.n.max(1)).take(self.n).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl Matrix<Scalar> {
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(|&v| Scalar::int(v)).collect()).collect();
        Matrix::from_rows(rows).expect("square integer matrix")
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(Scalar::is_real)
    }

    /// Converts a real exact matrix to floats.
    pub fn to_f64(&self) -> Result<FloatMatrix, NumericError> {
        if let Some((i, j, v)) = self.entries().find(|(_, _, v)| !v.is_real()) {
            return Err(NumericError::ImaginaryResidue { row: i + 1, col: j + 1, value: v.to_string() });
        }
        Ok(self.map(|v| crate::scalar::to_f64(v.re())))
    }
}

/// Lower triangular with every diagonal entry equal to 1, or to 1 or `i`
/// in complex mode.
#[derive(Clone, PartialEq, Debug)]
pub struct UnitLowerTriangular {
    m: ExactMatrix,
    complex: bool,
}

impl UnitLowerTriangular {
    pub fn new(m: ExactMatrix) -> Result<Self, NumericError> {
        for (i, j, v) in m.entries() {
            if j > i && !v.is_zero() {
                return Err(NumericError::MalformedTriangular(format!(
                    "nonzero entry {v} above the diagonal at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            if i == j && !(v.is_one() || v.is_i()) {
                return Err(NumericError::MalformedTriangular(format!(
                    "diagonal entry {v} at ({}, {}) is neither 1 nor i",
                    i + 1,
                    i + 1
                )));
            }
        }
        let complex = m.entries().any(|(_, _, v)| !v.is_real());
        Ok(UnitLowerTriangular { m, complex })
    }

    pub fn identity(n: usize) -> Self {
        UnitLowerTriangular { m: Matrix::identity(n), complex: false }
    }

    pub fn n(&self) -> usize {
        self.m.n()
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ExactMatrix {
        self.m
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }
}

/// Inverse of a lower triangular matrix with invertible diagonal, by forward
/// substitution.
pub fn lower_inverse<T: Entry>(l: &Matrix<T>) -> Result<Matrix<T>, NumericError> {
    let n = l.n();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        let d = l.get(i, i).try_inv().ok_or(NumericError::DivisionByZero)?;
        m.set(i, i, d.clone());
        for j in (0..i).rev() {
            let mut acc = T::null();
            for k in j..i {
                let lik = l.get(i, k);
                if lik.is_null() {
                    continue;
                }
                acc = acc.plus(&lik.times(m.get(k, j)));
            }
            if !acc.is_null() {
                m.set(i, j, acc.times(&d).negated());
            }
        }
    }
    Ok(m)
}

pub fn unit_lower_inverse(l: &UnitLowerTriangular) -> UnitLowerTriangular {
    let m = lower_inverse(&l.m).expect("diagonal entries 1 and i are invertible");
    UnitLowerTriangular { m, complex: l.complex }
}

/// `C = L·A·L⁻¹`; in complex mode every entry of `C` must be real.
pub fn similarity_transform(l: &UnitLowerTriangular, a: &ExactMatrix) -> Result<ExactMatrix, NumericError> {
    if l.n() != a.n() {
        return Err(NumericError::DimensionMismatch { expected: l.n(), found: a.n() });
    }
    let inv = unit_lower_inverse(l);
    let c = l.m.mul(a)?.mul(&inv.m)?;
    if l.complex {
        if let Some((i, j, v)) = c.entries().find(|(_, _, v)| !v.is_real()) {
            return Err(NumericError::ImaginaryResidue { row: i + 1, col: j + 1, value: v.to_string() });
        }
    }
    Ok(c)
}

/// `det(xI − M)` by Faddeev–LeVerrier.
pub fn char_poly(m: &ExactMatrix) -> Polynomial {
    let n = m.n();
    let mut coeffs = vec![Scalar::zero(); n + 1];
    coeffs[n] = Scalar::one();
    let mut mk: ExactMatrix = Matrix::zeros(n);
    for k in 1..=n {
        let mut next = m.mul(&mk).expect("same dimension");
        for i in 0..n {
            let v = next.get(i, i) + &coeffs[n - k + 1];
            next.set(i, i, v);
        }
        mk = next;
        let am = m.mul(&mk).expect("same dimension");
        coeffs[n - k] = -am.trace().scale(&Rational::new(1.into(), (k as i64).into()));
    }
    Polynomial::monic(coeffs)
}

/// `trace(M^k)` for `k = 1..=k_max`.
pub fn power_sums_matrix<T: Entry>(m: &Matrix<T>, k_max: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(k_max);
    let mut p = m.clone();
    for k in 1..=k_max {
        if k > 1 {
            p = p.mul(m).expect("same dimension");
        }
        out.push(p.trace());
    }
    out
}

/// Sign test used by [`first_negative_entry`].
pub trait SignCheck {
    fn violates(&self, tol: f64) -> bool;
}

impl SignCheck for Scalar {
    fn violates(&self, _tol: f64) -> bool {
        !self.is_real() || self.re().is_negative()
    }
}

impl SignCheck for Rational {
    fn violates(&self, _tol: f64) -> bool {
        self.is_negative()
    }
}

impl SignCheck for f64 {
    fn violates(&self, tol: f64) -> bool {
        *self < -tol || self.is_nan()
    }
}

/// First entry (0-based row, col) that is negative: exactly for exact
/// entries, below `-tol` for floats.
pub fn first_negative_entry<T: SignCheck + Clone>(m: &Matrix<T>, tol: f64) -> Option<(usize, usize, T)> {
    m.entries().find(|(_, _, v)| v.violates(tol)).map(|(i, j, v)| (i, j, v.clone()))
}

pub fn is_nonnegative<T: SignCheck + Clone>(m: &Matrix<T>, tol: f64) -> bool {
    first_negative_entry(m, tol).is_none()
}
