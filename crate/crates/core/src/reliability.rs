//! Exact system-reliability polynomials.
//!
//! A [`ReliabilityExpr`] stores integer coefficients `C_0..C_M` of
//!
//! ```text
//! R_S(R) = sum_i C_i * R^i * (1 - R)^(M - i)
//! ```
//!
//! where `C_i` counts the operational fault patterns with exactly `i`
//! correct modules. Two independent derivations are provided: a closed form
//! built from binomial counts of each module group, and a brute-force tally
//! over every fault pattern.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, rational_to_f64, Probability};
use crate::scheme::{Scheme, SchemeKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExprRecord", into = "ExprRecord")]
pub struct ReliabilityExpr {
    scheme: Scheme,
    coeffs: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityPoint {
    pub r_module: Probability,
    pub r_system: Probability,
}

/// Serialized form: `{scheme, m, coeffs: [C_0..C_M]}`.
#[derive(Serialize, Deserialize)]
struct ExprRecord {
    scheme: Scheme,
    m: usize,
    coeffs: Vec<u64>,
}

impl TryFrom<ExprRecord> for ReliabilityExpr {
    type Error = Error;

    fn try_from(record: ExprRecord) -> Result<Self> {
        if record.m != record.scheme.n_modules() {
            return Err(Error::Format(format!(
                "m = {} does not match scheme {}",
                record.m, record.scheme
            )));
        }
        let coeffs = record.coeffs.into_iter().map(BigUint::from).collect();
        ReliabilityExpr::from_coefficients(record.scheme, coeffs)
    }
}

impl From<ReliabilityExpr> for ExprRecord {
    fn from(expr: ReliabilityExpr) -> Self {
        ExprRecord {
            scheme: expr.scheme,
            m: expr.m(),
            coeffs: expr
                .coeffs
                .iter()
                .map(|c| c.to_u64().expect("C_i <= C(64, 32) fits in u64"))
                .collect(),
        }
    }
}

impl ReliabilityExpr {
    /// Wraps raw coefficients, checking `0 <= C_i <= binomial(M, i)`.
    pub fn from_coefficients(scheme: Scheme, coeffs: Vec<BigUint>) -> Result<Self> {
        let m = scheme.n_modules();
        if coeffs.len() != m + 1 {
            return Err(Error::Format(format!(
                "{scheme} needs {} coefficients, got {}",
                m + 1,
                coeffs.len()
            )));
        }
        for (i, c) in coeffs.iter().enumerate() {
            if *c > binomial(m, i) {
                return Err(Error::Format(format!(
                    "C_{i} = {c} exceeds binomial({m}, {i})"
                )));
            }
        }
        Ok(ReliabilityExpr { scheme, coeffs })
    }

    /// Closed-form coefficients from the group structure of the scheme.
    pub fn derive_closed_form(scheme: Scheme) -> Self {
        let k = scheme.majority_size();
        let majority: Vec<BigUint> = (0..=k)
            .map(|j| {
                if j >= scheme.majority_threshold() {
                    binomial(k, j)
                } else {
                    BigUint::zero()
                }
            })
            .collect();
        let coeffs = match scheme.kind() {
            SchemeKind::Nmr => majority,
            SchemeKind::Dmmr => {
                // 1 - (1-R)^L in the same basis: every term but l = 0.
                let l_size = scheme.minority_size();
                let minority: Vec<BigUint> = (0..=l_size)
                    .map(|l| {
                        if l == 0 {
                            BigUint::zero()
                        } else {
                            binomial(l_size, l)
                        }
                    })
                    .collect();
                convolve(&majority, &minority)
            }
        };
        ReliabilityExpr { scheme, coeffs }
    }

    /// Coefficients tallied over all `2^M` fault patterns using the
    /// scheme's operability predicate.
    pub fn derive_by_enumeration(scheme: Scheme) -> Result<Self> {
        scheme.check_enumerable()?;
        let coeffs = tally_patterns(scheme.n_modules(), |mask| scheme.is_operational_mask(mask))?;
        Ok(ReliabilityExpr { scheme, coeffs })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn m(&self) -> usize {
        self.scheme.n_modules()
    }

    /// `C_0..C_M`, indexed by correct-module count.
    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Total operational patterns, `sum_i C_i`.
    pub fn operational_patterns(&self) -> BigUint {
        self.coeffs.iter().sum()
    }

    /// Exact system reliability at the given module reliability.
    pub fn evaluate(&self, r_module: &Probability) -> ReliabilityPoint {
        let r = r_module.exact();
        let q = BigRational::one() - r;
        let m = self.m();
        let mut total = BigRational::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = num_traits::pow(r.clone(), i) * num_traits::pow(q.clone(), m - i);
            total += term * BigRational::from_integer(BigInt::from(c.clone()));
        }
        ReliabilityPoint {
            r_module: r_module.clone(),
            r_system: Probability::new(total).expect("convex combination stays in [0, 1]"),
        }
    }

    /// Floating-point evaluation.
    pub fn evaluate_f64(&self, r_module: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r_module) {
            return Err(Error::Domain(format!(
                "module reliability {r_module} is outside [0, 1]"
            )));
        }
        let m = self.m() as i32;
        let q = 1.0 - r_module;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let c = c.to_f64().unwrap_or(f64::INFINITY);
                c * r_module.powi(i as i32) * q.powi(m - i as i32)
            })
            .sum())
    }

    /// `steps` evenly spaced exact evaluations from `start` to `end` inclusive.
    pub fn curve(
        &self,
        start: &Probability,
        end: &Probability,
        steps: usize,
    ) -> Result<Vec<ReliabilityPoint>> {
        if steps < 2 {
            return Err(Error::Domain(format!(
                "a curve needs at least 2 steps, got {steps}"
            )));
        }
        if start > end {
            return Err(Error::Domain(format!(
                "range start {start} exceeds end {end}"
            )));
        }
        let span = end.exact() - start.exact();
        let last = BigRational::from_integer(BigInt::from(steps - 1));
        (0..steps)
            .map(|i| {
                let frac = BigRational::from_integer(BigInt::from(i)) / &last;
                let r = Probability::new(start.exact() + &span * frac)?;
                Ok(self.evaluate(&r))
            })
            .collect()
    }

    /// Coefficients of `R_S` in the plain power basis `sum_j a_j R^j`.
    /// Display only; the counting basis stays canonical.
    pub fn to_power_basis(&self) -> Vec<BigInt> {
        let m = self.m();
        let mut out = vec![BigInt::zero(); m + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = BigInt::from(c.clone());
            // (1-R)^(m-i) = sum_t (-1)^t C(m-i, t) R^t
            for t in 0..=(m - i) {
                let b = BigInt::from(binomial(m - i, t));
                let term = &c * b;
                if t % 2 == 0 {
                    out[i + t] += term;
                } else {
                    out[i + t] -= term;
                }
            }
        }
        out
    }
}

impl fmt::Display for ReliabilityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.m();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if !c.is_one() {
                write!(f, "{c}")?;
            }
            match i {
                0 => {}
                1 => f.write_str("R")?,
                _ => write!(f, "R^{i}")?,
            }
            match m - i {
                0 => {}
                1 => f.write_str(" (1 - R)")?,
                e => write!(f, " (1 - R)^{e}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Counts operational patterns by correct-module count for an arbitrary
/// predicate over faulty-module bitmasks.
pub fn tally_patterns<F>(n_modules: usize, operational: F) -> Result<Vec<BigUint>>
where
    F: Fn(u64) -> bool,
{
    if n_modules > crate::ENUMERATION_LIMIT {
        return Err(Error::UnsupportedSize {
            n_modules,
            limit: crate::ENUMERATION_LIMIT,
        });
    }
    let mut counts = vec![0u64; n_modules + 1];
    for mask in 0..(1u64 << n_modules) {
        if operational(mask) {
            counts[n_modules - mask.count_ones() as usize] += 1;
        }
    }
    Ok(counts.into_iter().map(BigUint::from).collect())
}

fn convolve(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    pub scheme: Scheme,
    pub r_system: Probability,
}

/// Orders schemes by descending system reliability at `r_module`. Ties go
/// to the scheme with fewer modules, then to the lexicographically smaller
/// name.
pub fn compare(exprs: &[ReliabilityExpr], r_module: &Probability) -> Result<Vec<Ranked>> {
    if exprs.is_empty() {
        return Err(Error::Domain("nothing to compare".into()));
    }
    let mut ranked: Vec<Ranked> = exprs
        .iter()
        .map(|e| Ranked {
            scheme: e.scheme(),
            r_system: e.evaluate(r_module).r_system,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.r_system
            .cmp(&a.r_system)
            .then_with(|| a.scheme.n_modules().cmp(&b.scheme.n_modules()))
            .then_with(|| a.scheme.to_string().cmp(&b.scheme.to_string()))
    });
    Ok(ranked)
}

impl ReliabilityPoint {
    pub fn r_system_f64(&self) -> f64 {
        rational_to_f64(self.r_system.exact())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::round_decimal;

    fn scheme(s: &str) -> Scheme {
        s.parse().unwrap()
    }

    fn coeffs(expr: &ReliabilityExpr) -> Vec<u64> {
        expr.coeffs().iter().map(|c| c.to_u64().unwrap()).collect()
    }

    fn p(s: &str) -> Probability {
        s.parse().unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let e = ReliabilityExpr::derive_closed_form(scheme("5-of-7"));
        assert_eq!(coeffs(&e), vec![0, 0, 0, 0, 20, 20, 7, 1]);
        let e = ReliabilityExpr::derive_closed_form(scheme("5-of-8"));
        assert_eq!(coeffs(&e), vec![0, 0, 0, 0, 30, 45, 28, 8, 1]);
        let e = ReliabilityExpr::derive_closed_form(scheme("3MR"));
        assert_eq!(coeffs(&e), vec![0, 0, 3, 1]);
    }

    #[test]
    fn enumeration_examples() {
        let e = ReliabilityExpr::derive_by_enumeration(scheme("3-of-6")).unwrap();
        assert_eq!(e.coeffs()[6], BigUint::one());
        assert_eq!(
            round_decimal(e.evaluate(&p("0.9")).r_system.exact(), 6),
            "0.971028"
        );

        let e = ReliabilityExpr::derive_by_enumeration(scheme("7MR")).unwrap();
        assert_eq!(coeffs(&e), vec![0, 0, 0, 0, 35, 21, 7, 1]);

        let e = ReliabilityExpr::derive_by_enumeration(scheme("3MR")).unwrap();
        assert_eq!(e.operational_patterns(), BigUint::from(4u32));
    }

    #[test]
    fn enumeration_size_limit() {
        assert!(matches!(
            ReliabilityExpr::derive_by_enumeration(Scheme::nmr(25).unwrap()),
            Err(Error::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn evaluation_endpoints() {
        for s in Scheme::all_up_to(11, &[3, 5]) {
            let e = ReliabilityExpr::derive_closed_form(s);
            assert_eq!(e.evaluate(&Probability::one()).r_system, Probability::one());
            assert_eq!(
                e.evaluate(&Probability::zero()).r_system,
                Probability::zero()
            );
        }
    }

    #[test]
    fn paper_values_at_point_nine() {
        let cases = [
            ("7MR", "0.997272"),
            ("9MR", "0.99910908"),
            ("5-of-7", "0.9815256"),
            ("5-of-8", "0.99044856"),
            ("3-of-6", "0.971028"),
            ("3-of-7", "0.9719028"),
        ];
        for (s, printed) in cases {
            let e = ReliabilityExpr::derive_closed_form(scheme(s));
            let places = printed.len() - 2;
            assert_eq!(
                round_decimal(e.evaluate(&p("0.9")).r_system.exact(), places),
                printed
            );
        }
    }

    #[test]
    fn float_evaluation_agrees() {
        let e = ReliabilityExpr::derive_closed_form(scheme("5-of-8"));
        assert!((e.evaluate_f64(0.9).unwrap() - 0.99044856).abs() < 1e-12);
        assert!(e.evaluate_f64(1.5).is_err());
    }

    #[test]
    fn curve_examples() {
        let e = ReliabilityExpr::derive_closed_form(scheme("7MR"));
        let pts = e.curve(&p("0"), &p("1"), 3).unwrap();
        let got: Vec<_> = pts.iter().map(|pt| pt.r_system.clone()).collect();
        assert_eq!(got, vec![p("0"), p("0.5"), p("1")]);
        assert_eq!(pts[0].r_module, p("0"));

        let pts = e.curve(&p("0.2"), &p("0.8"), 7).unwrap();
        assert_eq!(pts[0].r_module, p("0.2"));
        assert_eq!(pts[6].r_module, p("0.8"));
        assert_eq!(pts[3].r_module, p("0.5"));

        let e = ReliabilityExpr::derive_by_enumeration(scheme("3-of-6")).unwrap();
        assert_eq!(e.evaluate(&p("1/2")).r_system, p("0.4375"));
    }

    #[test]
    fn curve_errors() {
        let e = ReliabilityExpr::derive_closed_form(scheme("3MR"));
        assert!(e.curve(&p("0"), &p("1"), 1).is_err());
        assert!(e.curve(&p("0.6"), &p("0.4"), 3).is_err());
    }

    #[test]
    fn compare_examples() {
        let names = |list: &[&str], r: &str| -> Vec<String> {
            let exprs: Vec<_> = list
                .iter()
                .map(|s| ReliabilityExpr::derive_closed_form(scheme(s)))
                .collect();
            compare(&exprs, &p(r))
                .unwrap()
                .into_iter()
                .map(|x| x.scheme.to_string())
                .collect()
        };
        assert_eq!(
            names(&["7MR", "3-of-6", "5-of-7"], "0.9"),
            ["7MR", "5-of-7", "3-of-6"]
        );
        assert_eq!(
            names(&["9MR", "3-of-7", "5-of-8"], "0.9"),
            ["9MR", "5-of-8", "3-of-7"]
        );
        // all tie at 1: fewer modules first, then by name
        assert_eq!(
            names(&["9MR", "5-of-7", "3-of-6", "7MR"], "1"),
            ["3-of-6", "5-of-7", "7MR", "9MR"]
        );
        assert!(compare(&[], &p("0.9")).is_err());
    }

    #[test]
    fn power_basis_of_tmr() {
        // 3R^2 (1-R) + R^3 = 3R^2 - 2R^3
        let e = ReliabilityExpr::derive_closed_form(scheme("3MR"));
        let want: Vec<BigInt> = [0, 0, 3, -2].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(e.to_power_basis(), want);
    }

    #[test]
    fn display_matches_published_form() {
        let e = ReliabilityExpr::derive_closed_form(scheme("5-of-7"));
        assert_eq!(
            e.to_string(),
            "20R^4 (1 - R)^3 + 20R^5 (1 - R)^2 + 7R^6 (1 - R) + R^7"
        );
    }

    #[test]
    fn always_operational_predicate_sums_to_one() {
        let s = scheme("5-of-8");
        let all = tally_patterns(8, |_| true).unwrap();
        let e = ReliabilityExpr::from_coefficients(s, all).unwrap();
        for r in ["0", "0.1", "1/3", "0.9", "1"] {
            assert_eq!(e.evaluate(&p(r)).r_system, Probability::one());
        }
    }

    #[test]
    fn json_shape() {
        let e = ReliabilityExpr::derive_closed_form(scheme("3MR"));
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(text, r#"{"scheme":"3MR","m":3,"coeffs":[0,0,3,1]}"#);
        let back: ReliabilityExpr = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<ReliabilityExpr>(
            r#"{"scheme":"3MR","m":3,"coeffs":[0,0,4,1]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<ReliabilityExpr>(
            r#"{"scheme":"3MR","m":4,"coeffs":[0,0,3,1]}"#
        )
        .is_err());
    }
}
