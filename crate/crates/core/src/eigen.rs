//! Floating-point eigenvalue oracle used to cross-check exact constructions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::NumericError;
use crate::matrix::{char_poly, ExactMatrix, FloatMatrix, Matrix};
use crate::poly::Polynomial;
use crate::scalar::to_f64;

/// Relative radius within which computed eigenvalues are treated as one
/// perturbed multiple eigenvalue and replaced by their mean.
pub const CLUSTER_RADIUS: f64 = 1e-4;

/// All eigenvalues of a real matrix: balancing, Hessenberg reduction and
/// shifted QR (iteration cap `500·n`), then cluster averaging so that
/// defective multiple eigenvalues are reported to working accuracy.
pub fn numeric_eigenvalues(m: &FloatMatrix, tol: f64) -> Result<Vec<Complex64>, NumericError> {
    let n = m.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = DMatrix::from_fn(n, n, |i, j| *m.get(i, j));
    balance(&mut a);
    let cap = 500 * n;
    let eps = tol.clamp(f64::EPSILON, 1e-10);
    let schur = nalgebra::linalg::Schur::try_new(a, eps, cap)
        .ok_or(NumericError::ConvergenceFailure { iterations: cap })?;
    let raw: Vec<Complex64> = schur.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect();
    Ok(average_clusters(&raw, CLUSTER_RADIUS))
}

/// Eigenvalues of an exact real matrix. The exact characteristic
/// polynomial is split into square-free factors first, so repeated and
/// defective eigenvalues come out at full accuracy.
pub fn exact_numeric_eigenvalues(m: &ExactMatrix, tol: f64) -> Result<Vec<Complex64>, NumericError> {
    if !m.is_real() {
        return Err(NumericError::ModeError("real matrix required".into()));
    }
    let mut out = Vec::with_capacity(m.n());
    for (factor, mult) in char_poly(m).square_free() {
        let roots = simple_roots(&factor, tol)?;
        for r in roots {
            out.extend(std::iter::repeat_n(r, mult));
        }
    }
    Ok(out)
}

/// Roots of a real polynomial with simple roots: companion eigenvalues
/// polished by Newton steps.
fn simple_roots(p: &Polynomial, tol: f64) -> Result<Vec<Complex64>, NumericError> {
    let c: Vec<f64> = p.coeffs().iter().map(|z| to_f64(z.re())).collect();
    let d = p.degree();
    if d == 1 {
        return Ok(vec![Complex64::new(-c[0], 0.0)]);
    }
    let companion = Matrix::from_fn(d, |i, j| {
        if j == d - 1 {
            -c[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let raw = numeric_eigenvalues(&companion, tol)?;
    let eval = |z: Complex64| c.iter().rev().fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |(v, dv), &a| (v * z + a, dv * z + v));
    Ok(raw
        .into_iter()
        .map(|mut z| {
            for _ in 0..8 {
                let (v, dv) = eval(z);
                if dv.norm() == 0.0 {
                    break;
                }
                let step = v / dv;
                z -= step;
                if step.norm() <= f64::EPSILON * z.norm().max(1.0) {
                    break;
                }
            }
            if z.im.abs() <= 1e-14 * z.norm().max(1.0) {
                z.im = 0.0;
            }
            z
        })
        .collect())
}

/// Parlett–Reinsch diagonal scaling by powers of two.
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let radix = 2.0_f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

fn average_clusters(values: &[Complex64], radius: f64) -> Vec<Complex64> {
    let n = values.len();
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let limit = radius * scale;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= limit {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sums = vec![(Complex64::new(0.0, 0.0), 0usize); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        sums[r].0 += values[i];
        sums[r].1 += 1;
    }
    (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            sums[r].0 / sums[r].1 as f64
        })
        .collect()
}

/// Largest distance in the minimum-total-distance pairing of two
/// multisets of equal size; `None` when the sizes differ.
pub fn pairing_error(computed: &[Complex64], expected: &[Complex64]) -> Option<f64> {
    let n = computed.len();
    if n != expected.len() {
        return None;
    }
    if n == 0 {
        return Some(0.0);
    }
    let cost = |i: usize, j: usize| (computed[i] - expected[j]).norm();
    if n <= 16 {
        // Bitmask assignment over expected values.
        let full = 1usize << n;
        let mut best = vec![(f64::INFINITY, 0.0f64); full];
        best[0] = (0.0, 0.0);
        for mask in 0..full {
            let (total, worst) = best[mask];
            if !total.is_finite() {
                continue;
            }
            let i = mask.count_ones() as usize;
            if i == n {
                continue;
            }
            for j in 0..n {
                if mask & (1 << j) == 0 {
                    let c = cost(i, j);
                    let next = mask | (1 << j);
                    let cand = (total + c, worst.max(c));
                    if cand.0 < best[next].0 {
                        best[next] = cand;
                    }
                }
            }
        }
        return Some(best[full - 1].1);
    }
    let key = |z: &Complex64| (z.re, z.im);
    let mut a: Vec<Complex64> = computed.to_vec();
    let mut b: Vec<Complex64> = expected.to_vec();
    a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    Some(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}
