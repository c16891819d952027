//! Dense two-phase simplex over exact rationals or floats.
//!
//! Constraints are written as `a·x + b ≥ 0` or `a·x + b = 0` with free
//! variables `x`. Bland's rule is used throughout, so the exact instance
//! always terminates.

use std::cmp::Ordering;
use std::fmt;

use crate::matrix::Entry;
use crate::scalar::Rational;

pub trait LpNum: Entry + PartialOrd + fmt::Debug {
    /// Sign of the value, treating float noise as zero.
    fn sign(&self) -> Ordering;

    fn div(&self, o: &Self) -> Self {
        self.times(&o.try_inv().expect("pivot is nonzero"))
    }

    fn is_pos(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    fn is_neg(&self) -> bool {
        self.sign() == Ordering::Less
    }

    fn is_zero_tol(&self) -> bool {
        self.sign() == Ordering::Equal
    }
}

impl LpNum for Rational {
    fn sign(&self) -> Ordering {
        self.cmp(&Entry::null())
    }
}

const FLOAT_EPS: f64 = 1e-10;

impl LpNum for f64 {
    fn sign(&self) -> Ordering {
        if *self > FLOAT_EPS {
            Ordering::Greater
        } else if *self < -FLOAT_EPS {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row<T> {
    pub coeffs: Vec<T>,
    pub constant: T,
}

#[derive(Clone, Debug)]
pub struct LinearSystem<T> {
    nvars: usize,
    ge: Vec<Row<T>>,
    eq: Vec<Row<T>>,
    contradiction: bool,
}

impl<T: LpNum> LinearSystem<T> {
    pub fn new(nvars: usize) -> Self {
        LinearSystem { nvars, ge: Vec::new(), eq: Vec::new(), contradiction: false }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Adds `coeffs·x + constant ≥ 0`.
    pub fn add_ge(&mut self, coeffs: Vec<T>, constant: T) {
        assert_eq!(coeffs.len(), self.nvars);
        if let Some(row) = self.normalize(coeffs, constant, false) {
            if !self.ge.contains(&row) {
                self.ge.push(row);
            }
        }
    }

    /// Adds `coeffs·x + constant = 0`.
    pub fn add_eq(&mut self, coeffs: Vec<T>, constant: T) {
        assert_eq!(coeffs.len(), self.nvars);
        if let Some(row) = self.normalize(coeffs, constant, true) {
            if !self.eq.contains(&row) {
                self.eq.push(row);
            }
        }
    }

    fn normalize(&mut self, coeffs: Vec<T>, constant: T, equality: bool) -> Option<Row<T>> {
        let Some(lead) = coeffs.iter().find(|c| !c.is_zero_tol()).cloned() else {
            let ok = if equality { constant.is_zero_tol() } else { !constant.is_neg() };
            if !ok {
                self.contradiction = true;
            }
            return None;
        };
        let mut scale = lead.try_inv()?;
        if scale.is_neg() && !equality {
            scale = scale.negated();
        }
        Some(Row {
            coeffs: coeffs.iter().map(|c| c.times(&scale)).collect(),
            constant: constant.times(&scale),
        })
    }

    /// Finds a feasible basis; `None` when the system is infeasible.
    pub fn prepare(&self) -> Option<Prepared<T>> {
        if self.contradiction {
            return None;
        }
        Prepared::build(self)
    }

    pub fn is_feasible(&self) -> bool {
        self.prepare().is_some()
    }
}

/// A tableau holding a basic feasible solution of a [`LinearSystem`].
#[derive(Clone, Debug)]
pub struct Prepared<T> {
    nvars: usize,
    ncols: usize,
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
}

struct Objective<T> {
    z: Vec<T>,
    value: T,
}

impl<T: LpNum> Prepared<T> {
    fn build(sys: &LinearSystem<T>) -> Option<Self> {
        let d = sys.nvars;
        let nslack = sys.ge.len();
        let m = sys.ge.len() + sys.eq.len();
        let nstruct = 2 * d + nslack;
        let ncols = nstruct + m;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let all = sys.ge.iter().map(|r| (r, true)).chain(sys.eq.iter().map(|r| (r, false)));
        for (idx, (row, is_ge)) in all.enumerate() {
            // a·u − a·v − s = −b
            let mut line = vec![T::null(); ncols];
            for k in 0..d {
                line[k] = row.coeffs[k].clone();
                line[d + k] = row.coeffs[k].negated();
            }
            if is_ge {
                line[2 * d + idx] = T::from_int(-1);
            }
            let mut b = row.constant.negated();
            if b.is_neg() {
                for v in line.iter_mut() {
                    *v = v.negated();
                }
                b = b.negated();
            }
            line[nstruct + idx] = T::unit();
            rows.push(line);
            rhs.push(b);
        }
        let mut tab = Prepared { nvars: d, ncols, rows, rhs, basis: (nstruct..ncols).collect() };

        // Phase 1: maximize −Σ artificials.
        let mut z = vec![T::null(); ncols];
        let mut value = T::null();
        for (row, b) in tab.rows.iter().zip(&tab.rhs) {
            for j in 0..nstruct {
                z[j] = z[j].minus(&row[j]);
            }
            value = value.minus(b);
        }
        let mut obj = Objective { z, value };
        tab.run(&mut obj)?;
        if obj.value.is_neg() {
            return None;
        }

        // Drive artificials out of the basis or drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= nstruct {
                match (0..nstruct).find(|&j| !tab.rows[r][j].is_zero_tol()) {
                    Some(j) => {
                        tab.pivot(r, j, None);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.rhs.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for row in tab.rows.iter_mut() {
            row.truncate(nstruct);
        }
        tab.ncols = nstruct;
        Some(tab)
    }

    fn pivot(&mut self, r: usize, j: usize, obj: Option<&mut Objective<T>>) {
        let inv = self.rows[r][j].try_inv().expect("pivot is nonzero");
        for v in self.rows[r].iter_mut() {
            if !v.is_null() {
                *v = v.times(&inv);
            }
        }
        self.rhs[r] = self.rhs[r].times(&inv);
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][j].clone();
            if f.is_null() {
                continue;
            }
            for (k, pv) in prow.iter().enumerate() {
                if !pv.is_null() {
                    self.rows[i][k] = self.rows[i][k].minus(&f.times(pv));
                }
            }
            self.rows[i][j] = T::null();
            self.rhs[i] = self.rhs[i].minus(&f.times(&prhs));
        }
        if let Some(obj) = obj {
            let f = obj.z[j].clone();
            if !f.is_null() {
                for (k, pv) in prow.iter().enumerate() {
                    if !pv.is_null() {
                        obj.z[k] = obj.z[k].minus(&f.times(pv));
                    }
                }
                obj.z[j] = T::null();
                obj.value = obj.value.minus(&f.times(&prhs));
            }
        }
        self.basis[r] = j;
    }

    /// Simplex iterations; `None` on unboundedness.
    fn run(&mut self, obj: &mut Objective<T>) -> Option<()> {
        loop {
            let Some(j) = (0..self.ncols).find(|&j| obj.z[j].is_neg()) else {
                return Some(());
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let better = match ratio.partial_cmp(&br) {
                            Some(Ordering::Less) => true,
                            Some(Ordering::Equal) => self.basis[i] < self.basis[bi],
                            _ => false,
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let (r, _) = best?;
            self.pivot(r, j, Some(obj));
        }
    }

    fn values(&self) -> Vec<T> {
        let mut y = vec![T::null(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            y[b] = self.rhs[i].clone();
        }
        (0..self.nvars).map(|k| y[k].minus(&y[self.nvars + k])).collect()
    }

    /// The current basic feasible point.
    pub fn point(&self) -> Vec<T> {
        self.values()
    }

    /// Maximizes `c·x`; `None` when unbounded.
    pub fn maximize(&self, c: &[T]) -> Option<(T, Vec<T>)> {
        let d = self.nvars;
        let mut cost = vec![T::null(); self.ncols];
        for k in 0..d {
            cost[k] = c[k].clone();
            cost[d + k] = c[k].negated();
        }
        let mut z: Vec<T> = cost.iter().map(|v| v.negated()).collect();
        let mut value = T::null();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_null() {
                continue;
            }
            for j in 0..self.ncols {
                if !self.rows[i][j].is_null() {
                    z[j] = z[j].plus(&cb.times(&self.rows[i][j]));
                }
            }
            value = value.plus(&cb.times(&self.rhs[i]));
        }
        let mut tab = self.clone();
        let mut obj = Objective { z, value };
        tab.run(&mut obj)?;
        Some((obj.value, tab.values()))
    }

    /// `(min, max)` of one variable over the feasible set; `None` marks an
    /// unbounded side.
    pub fn range(&self, var: usize) -> (Option<T>, Option<T>) {
        let mut c = vec![T::null(); self.nvars];
        c[var] = T::unit();
        let hi = self.maximize(&c).map(|(v, _)| v);
        c[var] = T::from_int(-1);
        let lo = self.maximize(&c).map(|(v, _)| v.negated());
        (lo, hi)
    }
}
