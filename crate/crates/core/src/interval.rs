//! Feasible sets of one real variable under polynomial inequalities.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::eigen::numeric_eigenvalues;
use crate::matrix::Matrix;
use crate::scalar::{format_rational, int, rationalize, simplest_between, to_f64, Rational};

/// An exact rational or a floating approximation of an irrational value.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(Rational),
    Approx(f64),
}

impl Num {
    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(q) => to_f64(q),
            Num::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Num::Exact(q) => Some(q),
            Num::Approx(_) => None,
        }
    }

    pub fn cmp_num(&self, other: &Num) -> Ordering {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a.cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()).unwrap_or(Ordering::Equal),
        }
    }

    pub fn sub(&self, other: &Num) -> Num {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => Num::Exact(a - b),
            _ => Num::Approx(self.to_f64() - other.to_f64()),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Exact(q) => q.is_negative(),
            Num::Approx(x) => *x < 0.0,
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(q) => f.write_str(&format_rational(q)),
            Num::Approx(x) => write!(f, "~{x}"),
        }
    }
}

/// Closed interval; `None` marks an infinite end.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Option<Num>,
    pub hi: Option<Num>,
}

impl Interval {
    pub fn all() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn exact(lo: Option<Rational>, hi: Option<Rational>) -> Self {
        Interval { lo: lo.map(Num::Exact), hi: hi.map(Num::Exact) }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let q = Num::Exact(x.clone());
        self.lo.as_ref().is_none_or(|lo| lo.cmp_num(&q) != Ordering::Greater)
            && self.hi.as_ref().is_none_or(|hi| hi.cmp_num(&q) != Ordering::Less)
    }

    pub fn is_point(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(a), Some(b)) if a.cmp_num(b) == Ordering::Equal)
    }

    fn width(&self) -> f64 {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => b.to_f64() - a.to_f64(),
            _ => f64::INFINITY,
        }
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = max_lo(&self.lo, &other.lo);
        let hi = min_hi(&self.hi, &other.hi);
        if let (Some(a), Some(b)) = (&lo, &hi) {
            if a.cmp_num(b) == Ordering::Greater {
                return None;
            }
        }
        Some(Interval { lo, hi })
    }
}

fn max_lo(a: &Option<Num>, b: &Option<Num>) -> Option<Num> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(if x.cmp_num(y) == Ordering::Less { y.clone() } else { x.clone() }),
    }
}

fn min_hi(a: &Option<Num>, b: &Option<Num>) -> Option<Num> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(if x.cmp_num(y) == Ordering::Greater { y.clone() } else { x.clone() }),
    }
}

/// Sorted union of disjoint closed intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet(pub Vec<Interval>);

impl IntervalSet {
    pub fn all() -> Self {
        IntervalSet(vec![Interval::all()])
    }

    pub fn empty() -> Self {
        IntervalSet(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        IntervalSet(out)
    }

    pub fn component_containing(&self, x: &Rational) -> Option<&Interval> {
        self.0.iter().find(|c| c.contains(x))
    }
}

/// How a value is chosen from a feasible set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    LowerBound,
    Midpoint,
}

fn eval(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn trim(coeffs: &[Rational]) -> &[Rational] {
    let mut d = coeffs.len();
    while d > 0 && coeffs[d - 1].is_zero() {
        d -= 1;
    }
    &coeffs[..d]
}

/// Real roots of a polynomial of degree ≥ 2, exact where a nearby rational
/// is a true root.
fn real_roots(coeffs: &[Rational]) -> Vec<Num> {
    let d = coeffs.len() - 1;
    let lead = to_f64(&coeffs[d]);
    let c: Vec<f64> = coeffs.iter().map(|q| to_f64(q) / lead).collect();
    let companion = Matrix::from_fn(d, |i, j| {
        if j == d - 1 {
            -c[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let Ok(eig) = numeric_eigenvalues(&companion, 1e-14) else {
        return Vec::new();
    };
    let mut roots: Vec<Num> = Vec::new();
    for z in eig {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut x = z.re;
        for _ in 0..4 {
            let (mut p, mut dp) = (0.0, 0.0);
            for k in (0..=d).rev() {
                dp = dp * x + p;
                p = p * x + c[k];
            }
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.abs() > 1e-3 * (1.0 + x.abs()) {
                break;
            }
            x -= step;
        }
        let exact = [1e-12, 1e-9, 1e-6]
            .iter()
            .map(|&tol| rationalize(x, tol))
            .find(|q| eval(coeffs, q).is_zero());
        let root = match exact {
            Some(q) => Num::Exact(q),
            None => Num::Approx(x),
        };
        if !roots.iter().any(|r| r.cmp_num(&root) == Ordering::Equal) {
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| a.cmp_num(b));
    roots
}

fn rational_between(a: &Num, b: &Num) -> Rational {
    match (a, b) {
        (Num::Exact(x), Num::Exact(y)) => (x + y) / int(2),
        _ => {
            let (x, y) = (a.to_f64(), b.to_f64());
            let w = (y - x).abs();
            let mid = (x + y) / 2.0;
            let lo = rationalize(mid - w * 1e-3, w * 1e-4);
            let hi = rationalize(mid + w * 1e-3, w * 1e-4);
            if lo <= hi {
                simplest_between(&lo, &hi)
            } else {
                rationalize(mid, w * 1e-4)
            }
        }
    }
}

/// The set where the polynomial with ascending `coeffs` is nonnegative.
pub fn nonnegative_set(coeffs: &[Rational]) -> IntervalSet {
    let c = trim(coeffs);
    match c.len() {
        0 => return IntervalSet::all(),
        1 => return if c[0].is_negative() { IntervalSet::empty() } else { IntervalSet::all() },
        2 => {
            let root = Num::Exact(-&c[0] / &c[1]);
            return IntervalSet(vec![if c[1].is_positive() {
                Interval { lo: Some(root), hi: None }
            } else {
                Interval { lo: None, hi: Some(root) }
            }]);
        }
        _ => {}
    }
    let roots = real_roots(c);
    if roots.is_empty() {
        return if eval(c, &Rational::zero()).is_negative() { IntervalSet::empty() } else { IntervalSet::all() };
    }
    let mut pieces: Vec<Interval> = Vec::new();
    let push = |iv: Interval, pieces: &mut Vec<Interval>| {
        if let Some(last) = pieces.last_mut() {
            if let (Some(h), Some(l)) = (&last.hi, &iv.lo) {
                if h.cmp_num(l) == Ordering::Equal {
                    last.hi = iv.hi;
                    return;
                }
            }
        }
        pieces.push(iv);
    };
    let m = roots.len();
    for k in 0..=m {
        let lo = if k == 0 { None } else { Some(roots[k - 1].clone()) };
        let hi = if k == m { None } else { Some(roots[k].clone()) };
        let probe = match (&lo, &hi) {
            (None, Some(h)) => rationalize(h.to_f64() - 1.0 - h.to_f64().abs(), 0.5),
            (Some(l), None) => rationalize(l.to_f64() + 1.0 + l.to_f64().abs(), 0.5),
            (Some(l), Some(h)) => rational_between(l, h),
            (None, None) => unreachable!(),
        };
        if !eval(c, &probe).is_negative() {
            push(Interval { lo, hi }, &mut pieces);
        } else if let Some(Num::Exact(q)) = &hi {
            // An exact root is itself feasible even between negative pieces.
            push(Interval::exact(Some(q.clone()), Some(q.clone())), &mut pieces);
        }
    }
    IntervalSet(pieces)
}

/// Intersection of the nonnegative sets of several univariate polynomials.
pub fn feasible_set<'a>(polys: impl IntoIterator<Item = &'a [Rational]>) -> IntervalSet {
    let mut set = IntervalSet::all();
    for p in polys {
        set = set.intersect(&nonnegative_set(p));
        if set.is_empty() {
            break;
        }
    }
    set
}

fn nudge_inside(x: &Num, toward: f64, width: f64) -> Rational {
    match x {
        Num::Exact(q) => q.clone(),
        Num::Approx(v) => {
            let step = (width.min(1.0) * 1e-3).max(1e-12 * (1.0 + v.abs()));
            let a = v + toward * step * 1e-3;
            let b = v + toward * step;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            simplest_between(&rationalize(lo, step * 1e-4), &rationalize(hi, step * 1e-4))
        }
    }
}

/// Chooses a rational value from a component of `set` per `policy`.
pub fn pick(set: &IntervalSet, policy: Policy) -> Option<Rational> {
    let first = set.0.first()?;
    if policy == Policy::LowerBound {
        if let Some(lo) = &first.lo {
            return Some(nudge_inside(lo, 1.0, first.width()));
        }
    }
    let comp = set
        .0
        .iter()
        .fold(None::<&Interval>, |best, c| match best {
            Some(b) if b.width() >= c.width() => Some(b),
            _ => Some(c),
        })
        .expect("nonempty");
    Some(match (&comp.lo, &comp.hi) {
        (None, None) => Rational::zero(),
        (Some(lo), None) => nudge_inside(lo, 1.0, 1.0) + Rational::one(),
        (None, Some(hi)) => nudge_inside(hi, -1.0, 1.0) - Rational::one(),
        (Some(lo), Some(hi)) if comp.is_point() => nudge_inside(lo, 0.0, 0.0).min(nudge_inside(hi, 0.0, 0.0)),
        (Some(lo), Some(hi)) => rational_between(lo, hi),
    })
}
