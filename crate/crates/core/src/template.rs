//! Parametric constructions: `A` and `L` with entries polynomial in free
//! real parameters, solved for an exact point where `C = L·A·L⁻¹ ≥ 0`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::error::RealizeError;
use crate::interval::{feasible_set, pick, Interval, IntervalSet, Num, Policy};
use crate::lp::LinearSystem;
use crate::matrix::{is_nonnegative, lower_inverse, similarity_transform, ExactMatrix, Matrix, UnitLowerTriangular};
use crate::poly::MultiPoly;
use crate::scalar::{format_rational, parse_rational, rationalize, to_f64, Rational, Scalar};

pub type Poly = MultiPoly<Scalar>;

/// A 0-based cell of `A` or `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    A(usize, usize),
    L(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Alpha,
    Beta,
    Coupler,
    LEntry,
}

#[derive(Clone, Debug)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub cell: Cell,
    pub policy: Policy,
    pub seed: f64,
}

#[derive(Clone, Debug)]
pub struct Template {
    n: usize,
    a: Matrix<Poly>,
    l: Matrix<Poly>,
    params: Vec<ParamSpec>,
    fixed: Vec<Option<Rational>>,
}

#[derive(Clone, Debug)]
pub struct ParamInterval {
    pub name: String,
    pub value: Rational,
    /// Feasible range of this parameter with all others held at their values.
    pub interval: Interval,
    pub fixed: bool,
}

impl ParamInterval {
    /// Distance from the value to the nearer end of its interval.
    pub fn margin(&self) -> Option<Num> {
        let v = Num::Exact(self.value.clone());
        let lo = self.interval.lo.as_ref().map(|lo| v.sub(lo));
        let hi = self.interval.hi.as_ref().map(|hi| hi.sub(&v));
        match (lo, hi) {
            (Some(a), Some(b)) => Some(if a.cmp_num(&b).is_le() { a } else { b }),
            (x, None) | (None, x) => x,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub values: Vec<Rational>,
    pub a: ExactMatrix,
    pub l: UnitLowerTriangular,
    pub c: ExactMatrix,
    pub intervals: Vec<ParamInterval>,
    /// True when the sequential pass failed and the numeric search found the point.
    pub searched: bool,
}

impl Solution {
    pub fn value(&self, name: &str) -> Option<&Rational> {
        self.intervals.iter().position(|p| p.name == name).map(|k| &self.values[k])
    }
}

#[derive(Clone, Debug)]
struct Constraint {
    row: usize,
    col: usize,
    poly: MultiPoly<Rational>,
    eq: bool,
    vars: BTreeSet<usize>,
}

enum SeqFailure {
    Empty { param: usize, reason: String },
    Stuck(Vec<Option<Rational>>),
}

fn konst(s: Scalar) -> Poly {
    MultiPoly::constant(s)
}

impl Template {
    /// Zero `A` and identity `L`.
    pub fn new(n: usize) -> Self {
        Template {
            n,
            a: Matrix::from_fn(n, |_, _| MultiPoly::zero()),
            l: Matrix::from_fn(n, |i, j| if i == j { konst(Scalar::one()) } else { MultiPoly::zero() }),
            params: Vec::new(),
            fixed: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn get(&self, cell: Cell) -> &Poly {
        match cell {
            Cell::A(i, j) => self.a.get(i, j),
            Cell::L(i, j) => self.l.get(i, j),
        }
    }

    pub fn set(&mut self, cell: Cell, value: Poly) {
        match cell {
            Cell::A(i, j) => self.a.set(i, j, value),
            Cell::L(i, j) => self.l.set(i, j, value),
        }
    }

    pub fn set_const(&mut self, cell: Cell, value: Scalar) {
        self.set(cell, konst(value));
    }

    /// Registers a parameter reported at `cell` and returns it as a polynomial.
    pub fn param(&mut self, name: impl Into<String>, kind: ParamKind, cell: Cell, policy: Policy) -> Poly {
        self.params.push(ParamSpec { name: name.into(), kind, cell, policy, seed: 0.0 });
        self.fixed.push(None);
        MultiPoly::var(self.params.len() - 1)
    }

    pub fn var(&self, name: &str) -> Option<Poly> {
        self.index_of(name).map(MultiPoly::var)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn set_policy(&mut self, index: usize, policy: Policy) {
        self.params[index].policy = policy;
    }

    pub fn set_seed(&mut self, index: usize, seed: f64) {
        self.params[index].seed = seed;
    }

    pub fn is_fixed(&self, index: usize) -> bool {
        self.fixed[index].is_some()
    }

    /// Pins a parameter; a second, different value is an error.
    pub fn fix(&mut self, index: usize, value: Rational) -> Result<(), RealizeError> {
        match &self.fixed[index] {
            Some(v) if *v != value => Err(RealizeError::UnknownParameter(format!(
                "{} given conflicting values {} and {}",
                self.params[index].name,
                format_rational(v),
                format_rational(&value)
            ))),
            _ => {
                self.fixed[index] = Some(value);
                Ok(())
            }
        }
    }

    fn param_at(&self, cell: Cell) -> Option<usize> {
        self.params.iter().position(|p| p.cell == cell).or_else(|| self.get(cell).as_var())
    }

    /// Applies a dotted `key=value` override. Lowercase keys name parameters
    /// (`alpha.j`, `beta.i.j`, `a.i.j`, `l.i.j`, 1-based); uppercase `A.i.j`
    /// and `L.i.j` replace a single off-diagonal cell with a constant.
    pub fn apply_override(&mut self, key: &str, value: &Scalar) -> Result<(), RealizeError> {
        let bad = || RealizeError::UnknownParameter(key.to_string());
        let parts: Vec<&str> = key.trim().split('.').collect();
        let idx: Vec<usize> = parts[1..]
            .iter()
            .map(|s| s.parse::<usize>().ok().filter(|&v| v >= 1 && v <= self.n))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        let head = parts[0];
        if head == "A" || head == "L" {
            let [i, j] = idx[..] else { return Err(bad()) };
            let (i, j) = (i - 1, j - 1);
            let ok = if head == "A" { i < j } else { i > j };
            if !ok {
                return Err(RealizeError::UnknownParameter(format!(
                    "{key}: only strictly {} cells can be overridden",
                    if head == "A" { "upper" } else { "lower" }
                )));
            }
            let cell = if head == "A" { Cell::A(i, j) } else { Cell::L(i, j) };
            self.set_const(cell, value.clone());
            return Ok(());
        }
        if !value.is_real() {
            return Err(RealizeError::UnknownParameter(format!("{key}: parameters are real")));
        }
        let head = match head {
            "alphas" => "alpha",
            "betas" => "beta",
            h => h,
        };
        let canonical = std::iter::once(head.to_string())
            .chain(idx.iter().map(|v| v.to_string()))
            .collect::<Vec<_>>()
            .join(".");
        let index = self.index_of(&canonical).or_else(|| match (head, &idx[..]) {
            ("alpha", [j]) => {
                self.params.iter().position(|p| p.kind == ParamKind::Alpha && matches!(p.cell, Cell::A(_, c) if c == j - 1))
            }
            ("beta", [j]) => {
                let hits: Vec<usize> = (0..self.params.len())
                    .filter(|&k| {
                        self.params[k].kind == ParamKind::Beta && matches!(self.params[k].cell, Cell::A(_, c) if c == j - 1)
                    })
                    .collect();
                (hits.len() == 1).then(|| hits[0])
            }
            ("a" | "beta", [i, j]) => self.param_at(Cell::A(i - 1, j - 1)),
            ("l", [i, j]) => self.param_at(Cell::L(i - 1, j - 1)),
            _ => None,
        });
        let index = index.ok_or_else(bad)?;
        self.fix(index, value.re().clone())
    }

    fn substituted(&self, values: &[Rational]) -> Result<(ExactMatrix, ExactMatrix), RealizeError> {
        let vals: Vec<Scalar> = values.iter().cloned().map(Scalar::real).collect();
        let a = self.a.map(|p| p.eval(&vals));
        let l = self.l.map(|p| p.eval(&vals));
        Ok((a, l))
    }

    /// `(A, L, C)` at the given parameter values.
    pub fn instantiate(&self, values: &[Rational]) -> Result<(ExactMatrix, UnitLowerTriangular, ExactMatrix), RealizeError> {
        let (a, l) = self.substituted(values)?;
        let l = UnitLowerTriangular::new(l)?;
        let c = similarity_transform(&l, &a)?;
        Ok((a, l, c))
    }

    pub fn symbolic_c(&self) -> Result<Matrix<Poly>, RealizeError> {
        let inv = lower_inverse(&self.l)?;
        Ok(self.l.mul(&self.a)?.mul(&inv)?)
    }

    fn constraints(&self) -> Result<Vec<Constraint>, RealizeError> {
        let c = self.symbolic_c()?;
        let mut out = Vec::new();
        for (i, j, e) in c.entries() {
            for (poly, eq) in [(e.re_part(), false), (e.im_part(), true)] {
                if !poly.is_zero() {
                    let vars = poly.vars();
                    out.push(Constraint { row: i, col: j, poly, eq, vars });
                }
            }
        }
        Ok(out)
    }

    fn names(&self, vars: &BTreeSet<usize>) -> String {
        vars.iter().map(|&v| self.params[v].name.as_str()).collect::<Vec<_>>().join(", ")
    }

    /// Finds exact parameter values making `C` real and nonnegative.
    pub fn solve(&self) -> Result<Solution, RealizeError> {
        let all = self.constraints()?;
        let mut cons = Vec::new();
        for con in &all {
            let mut poly = con.poly.clone();
            for (v, val) in self.fixed.iter().enumerate() {
                if let Some(val) = val {
                    if con.vars.contains(&v) {
                        poly = poly.substitute(v, val);
                    }
                }
            }
            if let Some(k) = poly.as_constant() {
                let violated = if con.eq { !k.is_zero() } else { k.is_negative() };
                if violated {
                    let what = if con.eq { "has imaginary part" } else { "is" };
                    let reason =
                        format!("entry ({}, {}) of C {what} {}", con.row + 1, con.col + 1, format_rational(&k));
                    return Err(if con.vars.is_empty() {
                        RealizeError::MethodInapplicable { reason: format!("{reason} for every parameter choice"), stuck_index: None }
                    } else {
                        RealizeError::EmptyInterval { param: self.names(&con.vars), reason }
                    });
                }
                continue;
            }
            let vars = poly.vars();
            cons.push(Constraint { poly, vars, ..con.clone() });
        }

        let (values, searched) = match self.sequential(&cons) {
            Ok(v) => match self.verified(&all, &v) {
                true => (v, false),
                false => (self.search(&cons, &all, None)?, true),
            },
            Err(SeqFailure::Empty { param, reason }) => {
                return Err(RealizeError::EmptyInterval { param: self.params[param].name.clone(), reason });
            }
            Err(SeqFailure::Stuck(partial)) => (self.search(&cons, &all, Some(&partial))?, true),
        };
        let (a, l, c) = self.instantiate(&values)?;
        let intervals = self.intervals(&all, &values);
        Ok(Solution { values, a, l, c, intervals, searched })
    }

    fn verified(&self, all: &[Constraint], values: &[Rational]) -> bool {
        satisfied(all, values)
            && self.instantiate(values).map(|(_, _, c)| c.is_real() && is_nonnegative(&c, 0.0)).unwrap_or(false)
    }

    fn sequential(&self, cons: &[Constraint]) -> Result<Vec<Rational>, SeqFailure> {
        let d = self.params.len();
        let mut values = self.fixed.clone();
        let mut cur: Vec<Constraint> = cons.to_vec();
        let mut chosen_any = false;
        for p in 0..d {
            if values[p].is_some() {
                continue;
            }
            let mut sys = LinearSystem::new(d);
            let mut rows = 0;
            let mut uni: Vec<Vec<Rational>> = Vec::new();
            let mut pure: Vec<Vec<Rational>> = Vec::new();
            for con in &cur {
                if let Some((lin, k)) = con.poly.affine_parts() {
                    let mut coeffs = vec![Rational::zero(); d];
                    for (v, c) in lin {
                        coeffs[v] = c;
                    }
                    if con.eq {
                        sys.add_eq(coeffs, k);
                    } else {
                        sys.add_ge(coeffs, k);
                    }
                    rows += 1;
                } else if con.poly.vars().len() == 1 && con.poly.vars().contains(&p) {
                    let c = con.poly.univariate_coeffs(p).expect("univariate");
                    let is_pure = con.vars.iter().all(|&v| v == p);
                    let mut add = |c: Vec<Rational>| {
                        if is_pure {
                            pure.push(c.clone());
                        }
                        uni.push(c);
                    };
                    if con.eq {
                        add(c.iter().map(|x| -x).collect());
                    }
                    add(c);
                }
            }
            let (lo, hi) = if rows == 0 {
                (None, None)
            } else {
                match sys.prepare() {
                    Some(prep) => prep.range(p),
                    None if !chosen_any => {
                        let param = self.first_infeasible_prefix(&cur).unwrap_or(p);
                        return Err(SeqFailure::Empty {
                            param,
                            reason: "the linear constraints on the entries of C have no common solution".into(),
                        });
                    }
                    None => return Err(SeqFailure::Stuck(values)),
                }
            };
            let range = IntervalSet(vec![Interval::exact(lo.clone(), hi.clone())]);
            let set = range.intersect(&feasible_set(uni.iter().map(Vec::as_slice)));
            if set.is_empty() {
                if !chosen_any || feasible_set(pure.iter().map(Vec::as_slice)).is_empty() {
                    let bound = |b: &Option<Rational>| b.as_ref().map_or("unbounded".into(), format_rational);
                    return Err(SeqFailure::Empty {
                        param: p,
                        reason: format!(
                            "linear range [{}, {}] has no point satisfying the nonlinear entries of C",
                            bound(&lo),
                            bound(&hi)
                        ),
                    });
                }
                return Err(SeqFailure::Stuck(values));
            }
            let v = pick(&set, self.params[p].policy).expect("nonempty set");
            for con in cur.iter_mut() {
                if con.poly.vars().contains(&p) {
                    con.poly = con.poly.substitute(p, &v);
                }
            }
            let mut stuck = false;
            cur.retain(|con| match con.poly.as_constant() {
                Some(k) => {
                    stuck |= if con.eq { !k.is_zero() } else { k.is_negative() };
                    false
                }
                None => true,
            });
            values[p] = Some(v);
            chosen_any = true;
            if stuck {
                return Err(SeqFailure::Stuck(values));
            }
        }
        Ok(values.into_iter().map(|v| v.expect("all assigned")).collect())
    }

    /// Smallest parameter index whose prefix of linear constraints is infeasible.
    fn first_infeasible_prefix(&self, cons: &[Constraint]) -> Option<usize> {
        let d = self.params.len();
        (0..d).find(|&p| {
            let mut sys = LinearSystem::new(d);
            for con in cons.iter().filter(|c| c.poly.vars().iter().all(|&v| v <= p)) {
                if let Some((lin, k)) = con.poly.affine_parts() {
                    let mut coeffs = vec![Rational::zero(); d];
                    for (v, c) in lin {
                        coeffs[v] = c;
                    }
                    if con.eq {
                        sys.add_eq(coeffs, k);
                    } else {
                        sys.add_ge(coeffs, k);
                    }
                }
            }
            !sys.is_feasible()
        })
    }

    fn search(&self, cons: &[Constraint], all: &[Constraint], partial: Option<&[Option<Rational>]>) -> Result<Vec<Rational>, RealizeError> {
        let d = self.params.len();
        let free: Vec<usize> = (0..d).filter(|&k| self.fixed[k].is_none()).collect();
        let base: Vec<f64> = (0..d).map(|k| self.fixed[k].as_ref().map_or(0.0, to_f64)).collect();
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if let Some(partial) = partial {
            starts.push(free.iter().map(|&k| partial[k].as_ref().map_or(self.params[k].seed, to_f64)).collect());
        }
        starts.push(free.iter().map(|&k| self.params[k].seed).collect());
        starts.push(vec![0.0; free.len()]);
        starts.push(vec![1.0; free.len()]);
        starts.dedup();
        for start in starts {
            let x = maximin(cons, &free, &base, start);
            let mut full = base.clone();
            for (slot, &k) in free.iter().enumerate() {
                full[k] = x[slot];
            }
            if cons.iter().any(|c| !c.eq && c.poly.eval_f64(&full) < -1e-9) {
                continue;
            }
            for tau in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12] {
                let values: Vec<Rational> = (0..d)
                    .map(|k| match &self.fixed[k] {
                        Some(v) => v.clone(),
                        None => rationalize(full[k], tau),
                    })
                    .collect();
                if self.verified(all, &values) {
                    return Ok(values);
                }
            }
        }
        let names = free.iter().map(|&k| self.params[k].name.as_str()).collect::<Vec<_>>().join(", ");
        Err(RealizeError::MethodInapplicable {
            reason: format!("no exact parameter point found for {{{names}}} making C nonnegative"),
            stuck_index: None,
        })
    }

    fn intervals(&self, all: &[Constraint], values: &[Rational]) -> Vec<ParamInterval> {
        (0..self.params.len())
            .map(|p| {
                let mut polys: Vec<Vec<Rational>> = Vec::new();
                for con in all.iter().filter(|c| c.vars.contains(&p)) {
                    let mut poly = con.poly.clone();
                    for &v in con.vars.iter().filter(|&&v| v != p) {
                        poly = poly.substitute(v, &values[v]);
                    }
                    if let Some(c) = poly.univariate_coeffs(p) {
                        if con.eq {
                            polys.push(c.iter().map(|x| -x).collect());
                        }
                        polys.push(c);
                    }
                }
                let set = feasible_set(polys.iter().map(Vec::as_slice));
                let interval = set.component_containing(&values[p]).cloned().unwrap_or_else(|| {
                    Interval::exact(Some(values[p].clone()), Some(values[p].clone()))
                });
                ParamInterval {
                    name: self.params[p].name.clone(),
                    value: values[p].clone(),
                    interval,
                    fixed: self.fixed[p].is_some(),
                }
            })
            .collect()
    }
}

fn satisfied(cons: &[Constraint], values: &[Rational]) -> bool {
    cons.iter().all(|con| {
        let v = con.poly.eval(values);
        if con.eq {
            v.is_zero()
        } else {
            !v.is_negative()
        }
    })
}

const SLP_MAX_ITER: usize = 200;
const SLP_MARGIN_CAP: f64 = 1.0;

/// Sequential linear programming on `max t s.t. g(x) ≥ t, h(x) = 0` over
/// the `free` variables, from `start`. Deterministic.
fn maximin(cons: &[Constraint], free: &[usize], base: &[f64], start: Vec<f64>) -> Vec<f64> {
    let f = free.len();
    let full = |x: &[f64]| {
        let mut v = base.to_vec();
        for (slot, &k) in free.iter().enumerate() {
            v[k] = x[slot];
        }
        v
    };
    let merit = |x: &[f64]| {
        let v = full(x);
        let mut worst = f64::INFINITY;
        let mut residual = 0.0;
        for c in cons {
            let g = c.poly.eval_f64(&v);
            if c.eq {
                residual += g.abs();
            } else {
                worst = worst.min(g);
            }
        }
        worst.min(SLP_MARGIN_CAP) - 10.0 * residual
    };
    let mut x = start;
    let mut best = merit(&x);
    let mut radius = 1.0f64.max(x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for _ in 0..SLP_MAX_ITER {
        if best >= SLP_MARGIN_CAP - 1e-12 || radius < 1e-10 {
            break;
        }
        let v = full(&x);
        let mut sys = LinearSystem::<f64>::new(f + 1);
        for c in cons {
            let g = c.poly.eval_f64(&v);
            let grad = c.poly.grad_f64(&v);
            let mut coeffs: Vec<f64> = free.iter().map(|&k| grad[k]).collect();
            if c.eq {
                coeffs.push(0.0);
                sys.add_eq(coeffs, g);
            } else {
                coeffs.push(-1.0);
                sys.add_ge(coeffs, g);
            }
        }
        for k in 0..f {
            let mut e = vec![0.0; f + 1];
            e[k] = -1.0;
            sys.add_ge(e.clone(), radius);
            e[k] = 1.0;
            sys.add_ge(e, radius);
        }
        let mut cap = vec![0.0; f + 1];
        cap[f] = -1.0;
        sys.add_ge(cap, SLP_MARGIN_CAP);
        let mut floor = vec![0.0; f + 1];
        floor[f] = 1.0;
        sys.add_ge(floor, 1e6);
        let step = sys.prepare().and_then(|p| {
            let mut obj = vec![0.0; f + 1];
            obj[f] = 1.0;
            p.maximize(&obj).map(|(_, y)| y)
        });
        let Some(step) = step else {
            radius /= 4.0;
            continue;
        };
        let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
        let m = merit(&trial);
        if m > best + 1e-14 {
            x = trial;
            best = m;
            radius *= 2.0;
        } else {
            radius /= 4.0;
        }
    }
    x
}

/// Parses a `key=value` override.
pub fn parse_override(text: &str) -> Result<(String, Scalar), RealizeError> {
    let bad = || RealizeError::UnknownParameter(text.to_string());
    let (k, v) = text.split_once('=').ok_or_else(bad)?;
    let v = v.trim();
    let value = Scalar::parse(v).or_else(|| parse_rational(v).map(Scalar::real)).ok_or_else(bad)?;
    Ok((k.trim().to_string(), value))
}

/// Applies overrides in order; repeated keys must agree.
pub fn apply_overrides(t: &mut Template, overrides: &[(String, Scalar)]) -> Result<(), RealizeError> {
    let mut seen: BTreeMap<&str, &Scalar> = BTreeMap::new();
    for (k, v) in overrides {
        if let Some(prev) = seen.insert(k.as_str(), v) {
            if prev != v {
                return Err(RealizeError::UnknownParameter(format!("{k} given conflicting values {prev} and {v}")));
            }
        }
        t.apply_override(k, v)?;
    }
    Ok(())
}
