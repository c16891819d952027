//! Realizers: build `(A, L, C)` with `C = L·A·L⁻¹ ≥ 0` for a classified spectrum.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::error::RealizeError;
use crate::interval::{Interval, Num};
use crate::matrix::{ExactMatrix, Matrix, UnitLowerTriangular};
use crate::scalar::{format_rational, Rational, Scalar};
use crate::template::{apply_overrides, Cell, ParamKind, Solution, Template};

mod complex;
mod few_positive;
mod many_positive;

pub use complex::{realize_complex_3, realize_complex_4, realize_complex_general};
pub use few_positive::{realize_k_positive, realize_one_positive, realize_prescribed_diagonal, realize_two_positive};
pub use many_positive::{realize_k_negative, realize_three_negative, realize_two_negative};

pub(crate) use few_positive::{realize_greedy, realize_greedy_general};
pub(crate) use many_positive::realize_negative_layout;

/// `key=value` parameter overrides, in command-line order.
pub type Overrides = [(String, Scalar)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    OnePositive,
    PrescribedDiagonal,
    TwoPositive,
    KPositive,
    TwoNegative,
    ThreeNegative,
    KNegative,
    Complex3,
    Complex4,
    ComplexGeneral,
    Permuted,
}

impl Strategy {
    pub const ALL: [Strategy; 11] = [
        Strategy::OnePositive,
        Strategy::PrescribedDiagonal,
        Strategy::TwoPositive,
        Strategy::KPositive,
        Strategy::TwoNegative,
        Strategy::ThreeNegative,
        Strategy::KNegative,
        Strategy::Complex3,
        Strategy::Complex4,
        Strategy::ComplexGeneral,
        Strategy::Permuted,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Strategy::OnePositive => "one-positive",
            Strategy::PrescribedDiagonal => "prescribed-diagonal",
            Strategy::TwoPositive => "two-positive",
            Strategy::KPositive => "k-positive",
            Strategy::TwoNegative => "two-negative",
            Strategy::ThreeNegative => "three-negative",
            Strategy::KNegative => "k-negative",
            Strategy::Complex3 => "complex-3",
            Strategy::Complex4 => "complex-4",
            Strategy::ComplexGeneral => "complex-general",
            Strategy::Permuted => "permuted",
        }
    }

    /// Name used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Strategy::ComplexGeneral => "complex-general (example-derived)",
            s => s.id(),
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Strategy::Complex3 | Strategy::Complex4 | Strategy::ComplexGeneral)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Strategy::ALL
            .into_iter()
            .find(|st| st.id() == s || st.label() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

/// Free quantities of a construction, keyed by 1-based positions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealizationParams {
    pub alphas: BTreeMap<usize, Rational>,
    pub betas: BTreeMap<(usize, usize), Rational>,
    pub couplers: BTreeMap<(usize, usize), Rational>,
    pub l_free: BTreeMap<(usize, usize), Rational>,
    pub cut_indices: Vec<usize>,
    pub t: Option<Rational>,
    pub strategy: String,
}

impl RealizationParams {
    fn from_solution(t: &Template, s: &Solution, strategy: Strategy) -> Self {
        let mut p = RealizationParams { strategy: strategy.label().to_string(), ..Default::default() };
        for (spec, v) in t.params().iter().zip(&s.values) {
            let (i, j) = match spec.cell {
                Cell::A(i, j) | Cell::L(i, j) => (i + 1, j + 1),
            };
            match spec.kind {
                ParamKind::Alpha => {
                    p.alphas.insert(j, v.clone());
                }
                ParamKind::Beta => {
                    p.betas.insert((i, j), v.clone());
                }
                ParamKind::Coupler => {
                    p.couplers.insert((i, j), v.clone());
                }
                ParamKind::LEntry => {
                    p.l_free.insert((i, j), v.clone());
                }
            }
        }
        if !p.alphas.is_empty() {
            p.t = Some(p.alphas.values().sum());
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty() && self.betas.is_empty() && self.couplers.is_empty() && self.l_free.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateLine {
    pub description: String,
    pub margin: Num,
}

impl CertificateLine {
    pub fn exact(description: impl Into<String>, margin: Rational) -> Self {
        CertificateLine { description: description.into(), margin: Num::Exact(margin) }
    }

    pub fn holds(&self) -> bool {
        !self.margin.is_negative()
    }
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub strategy: Strategy,
    pub a: ExactMatrix,
    pub l: UnitLowerTriangular,
    pub c: ExactMatrix,
    pub params: RealizationParams,
    pub certificate: Vec<CertificateLine>,
    /// True when parameters came from the numeric search rather than the
    /// sequential interval pass.
    pub searched: bool,
    pub notes: Vec<String>,
}

impl Realization {
    pub fn diagonal(&self) -> Vec<Scalar> {
        self.a.diagonal()
    }

    /// Appends `diag(tail)` as a direct summand.
    pub fn direct_sum(mut self, tail: &[Rational]) -> Realization {
        if tail.is_empty() {
            return self;
        }
        let n = self.a.n();
        let m = n + tail.len();
        let grow = |x: &ExactMatrix| {
            Matrix::from_fn(m, |i, j| {
                if i < n && j < n {
                    x.get(i, j).clone()
                } else if i == j {
                    Scalar::real(tail[i - n].clone())
                } else {
                    Scalar::zero()
                }
            })
        };
        self.a = grow(&self.a);
        self.c = grow(&self.c);
        let l = Matrix::from_fn(m, |i, j| {
            if i < n && j < n {
                self.l.matrix().get(i, j).clone()
            } else if i == j {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        });
        self.l = UnitLowerTriangular::new(l).expect("block unit lower triangular");
        self.notes.push(format!(
            "direct sum with diag({})",
            tail.iter().map(format_rational).collect::<Vec<_>>().join(", ")
        ));
        self
    }
}

pub(crate) fn interval_line(name: &str, iv: &Interval, margin: Option<Num>) -> Option<CertificateLine> {
    let margin = margin?;
    let text = match (&iv.lo, &iv.hi) {
        (Some(lo), Some(hi)) => format!("{lo} <= {name} <= {hi}"),
        (Some(lo), None) => format!("{lo} <= {name}"),
        (None, Some(hi)) => format!("{name} <= {hi}"),
        (None, None) => return None,
    };
    Some(CertificateLine { description: text, margin })
}

/// Builds the realization from a solved template; per-parameter interval
/// lines and the minimum entry of `C` are always recorded.
pub(crate) fn finish(
    t: &Template,
    s: Solution,
    strategy: Strategy,
    mut lines: Vec<CertificateLine>,
) -> Realization {
    for iv in &s.intervals {
        if let Some(line) = interval_line(&iv.name, &iv.interval, iv.margin()) {
            lines.push(line);
        }
    }
    let min = s.c.entries().map(|(_, _, v)| v.re().clone()).min().unwrap_or_else(Rational::zero);
    lines.push(CertificateLine::exact("min entry of C >= 0", min));
    let params = RealizationParams::from_solution(t, &s, strategy);
    Realization { strategy, a: s.a, l: s.l, c: s.c, params, certificate: lines, searched: s.searched, notes: Vec::new() }
}

pub(crate) fn solve_with(mut t: Template, overrides: &Overrides) -> Result<(Template, Solution), RealizeError> {
    apply_overrides(&mut t, overrides)?;
    let s = t.solve()?;
    Ok((t, s))
}

pub(crate) fn require_nonnegative_sum(values: &[Rational]) -> Result<(), RealizeError> {
    let s1: Rational = values.iter().sum();
    if s1.is_negative() {
        return Err(RealizeError::WrongShape(format!("eigenvalue sum {} is negative", format_rational(&s1))));
    }
    Ok(())
}
