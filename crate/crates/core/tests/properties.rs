use num_traits::Signed;
use proptest::prelude::*;
use serde_json::Value;

use niep::eigen::exact_numeric_eigenvalues;
use niep::matrix::{is_nonnegative, ExactMatrix};
use niep::realize::{realize_one_positive, Realization, Strategy as Method};
use niep::report::{params_json, run_json, to_pretty};
use niep::runner::{run, RunConfig, RunReport};
use niep::scalar::{format_rational, int, parse_rational, rat, rationalize, Rational, Scalar};
use niep::spectrum::{necessary_conditions, ClassifiedSpectrum, Mode};

fn text(values: &[Rational]) -> String {
    values.iter().map(format_rational).collect::<Vec<_>>().join(",")
}

fn entry() -> impl Strategy<Value = Rational> {
    (-9i64..=9, prop::sample::select(vec![1i64, 2, 3])).prop_map(|(p, q)| rat(p, q))
}

/// Perron value covers the negative mass, so most draws pass the conditions.
fn real_spectrum(max_rest: usize) -> impl Strategy<Value = Vec<Rational>> {
    (prop::collection::vec(entry(), 1..=max_rest), 0i64..=4).prop_map(|(mut rest, slack)| {
        let mass: Rational = rest.iter().filter(|v| v.is_negative()).map(|v| -v.clone()).sum();
        let widest = rest.iter().map(Signed::abs).max().unwrap_or_else(|| int(0));
        rest.insert(0, mass.max(widest) + int(slack));
        rest
    })
}

fn suleimanova() -> impl Strategy<Value = Vec<Rational>> {
    (prop::collection::vec((-9i64..=0, 1i64..=3), 1..=6), 0i64..=3).prop_map(|(rest, slack)| {
        let rest: Vec<Rational> = rest.into_iter().map(|(p, q)| rat(p, q)).collect();
        let mass: Rational = rest.iter().map(|v| -v.clone()).sum();
        let mut all = vec![mass + int(slack)];
        all.extend(rest);
        all
    })
}

fn realized(r: &RunReport) -> Option<&Realization> {
    r.verification().filter(|v| v.passed).and(r.realization())
}

/// `(name, lo, hi)` from certificate lines of the form `lo <= name <= hi`.
fn recorded_bounds(r: &Realization) -> Vec<(String, Rational, Rational)> {
    r.certificate
        .iter()
        .filter_map(|line| {
            let parts: Vec<&str> = line.description.split(" <= ").collect();
            let [lo, name, hi] = parts[..] else { return None };
            Some((name.to_string(), parse_rational(lo)?, parse_rational(hi)?))
        })
        .collect()
}

fn pinned_params(r: &Realization) -> Vec<(String, Scalar)> {
    let Value::Object(p) = params_json(&r.params, Mode::Exact) else { return Vec::new() };
    let Some(Value::Object(values)) = p.get("values") else { return Vec::new() };
    values
        .iter()
        .filter_map(|(k, v)| Some((k.clone(), Scalar::real(parse_rational(v.as_str()?)?))))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn realizations_satisfy_the_conditions(values in real_spectrum(6)) {
        let report = run(&RunConfig::new(text(&values)));
        if let (Some(_), Some(c)) = (realized(&report), report.spectrum.as_ref()) {
            prop_assert!(necessary_conditions(c, c.n, 3).overall, "{}", text(&values));
        }
    }

    #[test]
    fn default_alphas_give_the_trace(values in suleimanova()) {
        let c = ClassifiedSpectrum::from_reals(&values).unwrap();
        let r = realize_one_positive(&c, None).unwrap();
        prop_assert!(is_nonnegative(&r.c, 0.0));
        prop_assert_eq!(r.c.trace(), Scalar::real(c.s1.clone()));
        if c.s1 == int(0) {
            prop_assert!(r.c.diagonal().iter().all(Scalar::is_zero));
        }
        prop_assert!(r.l.matrix().diagonal().iter().all(Scalar::is_one));
        let diag: Vec<Scalar> = c.reals.iter().cloned().map(Scalar::real).collect();
        prop_assert_eq!(r.a.diagonal(), diag);
    }

    #[test]
    fn certificates_are_sound(values in real_spectrum(5)) {
        let report = run(&RunConfig::new(text(&values)));
        let Some(r) = realized(&report) else { return Ok(()) };
        if r.searched || r.strategy == Method::Permuted {
            return Ok(());
        }
        let pinned = pinned_params(r);
        let step = rat(1, 1000);
        for (name, lo, hi) in recorded_bounds(r) {
            for past in [&lo - &step, &hi + &step] {
                let mut cfg = RunConfig::new(text(&values));
                cfg.strategy = Some(r.strategy);
                cfg.overrides = pinned.iter().filter(|(k, _)| *k != name).cloned().collect();
                cfg.overrides.push((name.clone(), Scalar::real(past.clone())));
                let probe = run(&cfg);
                prop_assert!(
                    realized(&probe).is_none(),
                    "{} stays nonnegative at {} = {}", text(&values), name, format_rational(&past)
                );
            }
        }
    }

    #[test]
    fn two_negative_corner_entry(rest in prop::collection::vec(1i64..=4, 2..=4), neg in 1i64..=6, slack in 0i64..=6) {
        let mut values: Vec<Rational> = vec![int(2 * neg + slack)];
        values.extend(rest.iter().map(|&v| int(v)));
        values.extend([int(-neg), int(-neg)]);
        let mut cfg = RunConfig::new(text(&values));
        cfg.strategy = Some(Method::TwoNegative);
        let report = run(&cfg);
        if let (Some(r), Some(c)) = (realized(&report), report.spectrum.as_ref()) {
            prop_assert_eq!(r.c.get(0, 1), &Scalar::real(&c.perron - &c.s1));
            prop_assert!(c.s1 <= c.perron);
        }
    }

    #[test]
    fn complex_realizations_are_real(
        perron in 4i64..=14, re in -3i64..=3, im in 1i64..=3, extra in prop::collection::vec(-2i64..=2, 0..=2)
    ) {
        let mut parts = vec![perron.to_string(), format!("{re}+{im}i"), format!("{re}-{im}i")];
        parts.extend(extra.iter().map(i64::to_string));
        let report = run(&RunConfig::new(parts.join(",")));
        if let Some(r) = realized(&report) {
            prop_assert!(r.c.is_real());
            prop_assert!(is_nonnegative(&r.c, 0.0));
            prop_assert!(r.l.matrix().diagonal().iter().all(|d| d.is_one() || d.is_i()));
        }
    }

    #[test]
    fn spectra_of_positive_matrices_pass(entries in (2usize..=5).prop_flat_map(|n| prop::collection::vec(1i64..=6, n * n))) {
        let n = (entries.len() as f64).sqrt() as usize;
        let rows: Vec<&[i64]> = entries.chunks(n).collect();
        let m = ExactMatrix::from_ints(&rows);
        let eig = exact_numeric_eigenvalues(&m, 1e-12).unwrap();
        let values: Vec<Scalar> = eig
            .iter()
            .map(|z| {
                let im = if z.im.abs() < 1e-9 { int(0) } else { rationalize(z.im, 1e-12) };
                Scalar::new(rationalize(z.re, 1e-12), im)
            })
            .collect();
        let c = ClassifiedSpectrum::unchecked(&values, Mode::Float, eig.clone());
        let report = necessary_conditions(&c, c.n, 3);
        prop_assert!(report.overall, "{:?}: {:?}", eig, report);
    }

    #[test]
    fn json_is_deterministic(values in real_spectrum(5)) {
        let cfg = RunConfig::new(text(&values));
        prop_assert_eq!(to_pretty(&run_json(&run(&cfg))), to_pretty(&run_json(&run(&cfg))));
    }
}
