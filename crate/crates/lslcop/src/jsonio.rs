//! JSON and CSV interchange.
//!
//! Diagonals travel as tagged JSON objects:
//! `{"type":"pwl","knots":[[0,0],…,[1,1]]}`, `{"type":"l","a":0.5}`,
//! `{"type":"u","a":0.5}`, `{"type":"power","p":1.5}`,
//! `{"type":"mo","alpha":0.3,"beta":0.7}`, and
//! `{"type":"mix","w":0.3,"left":…,"right":…}` (nested arbitrarily).
//!
//! Error split on input: anything the JSON layer cannot even parse into one
//! of these shapes is [`Error::Parse`]; knot arrays with the right JSON shape
//! but broken geometry (endpoints, ordering) are [`Error::MalformedKnots`];
//! out-of-range family parameters and mixture weights deserialize fine and
//! are left for `validate_dlsl` to report, so callers can distinguish
//! "unreadable" from "read but not a member".
//!
//! All floats are written as `{:.16e}` — 17 significant digits, enough to
//! round-trip every f64 exactly — with "." decimals, "," separators and LF
//! line endings in CSV, so identical inputs produce byte-identical files.

use std::io;

use serde::{Deserialize, Serialize};

use crate::concordance::{ConcordanceReport, RegionPoint};
use crate::diagonal::{make_pwl, Diagonal};
use crate::error::{Error, Result};
use crate::star::IterationTrace;
use crate::validate::ValidationReport;

/// Serialized form of a diagonal.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum DiagonalSpec {
    #[serde(rename = "pwl")]
    Pwl { knots: Vec<[f64; 2]> },
    #[serde(rename = "l")]
    LowerL { a: f64 },
    #[serde(rename = "u")]
    UpperU { a: f64 },
    #[serde(rename = "power")]
    Power { p: f64 },
    #[serde(rename = "mo")]
    Mo { alpha: f64, beta: f64 },
    #[serde(rename = "mix")]
    Mix {
        w: f64,
        left: Box<DiagonalSpec>,
        right: Box<DiagonalSpec>,
    },
}

impl DiagonalSpec {
    pub fn to_diagonal(&self) -> Result<Diagonal> {
        Ok(match self {
            DiagonalSpec::Pwl { knots } => {
                let pairs: Vec<(f64, f64)> = knots.iter().map(|k| (k[0], k[1])).collect();
                make_pwl(&pairs)?
            }
            // Families keep raw parameters here; the validator reports
            // out-of-range values as violations rather than read errors.
            DiagonalSpec::LowerL { a } => Diagonal::LowerL { a: *a },
            DiagonalSpec::UpperU { a } => Diagonal::UpperU { a: *a },
            DiagonalSpec::Power { p } => Diagonal::Power { p: *p },
            DiagonalSpec::Mo { alpha, beta } => Diagonal::mo_star(*alpha, *beta)
                .unwrap_or(Diagonal::MoStar {
                    alpha: *alpha,
                    beta: *beta,
                }),
            DiagonalSpec::Mix { w, left, right } => Diagonal::Mix {
                w: *w,
                left: Box::new(left.to_diagonal()?),
                right: Box::new(right.to_diagonal()?),
            },
        })
    }

    pub fn from_diagonal(d: &Diagonal) -> DiagonalSpec {
        match d {
            Diagonal::Pwl(p) => DiagonalSpec::Pwl {
                knots: p
                    .xs()
                    .iter()
                    .zip(p.ys().iter())
                    .map(|(&x, &y)| [x, y])
                    .collect(),
            },
            Diagonal::LowerL { a } => DiagonalSpec::LowerL { a: *a },
            Diagonal::UpperU { a } => DiagonalSpec::UpperU { a: *a },
            Diagonal::Power { p } => DiagonalSpec::Power { p: *p },
            Diagonal::MoStar { alpha, beta } => DiagonalSpec::Mo {
                alpha: *alpha,
                beta: *beta,
            },
            Diagonal::Mix { w, left, right } => DiagonalSpec::Mix {
                w: *w,
                left: Box::new(DiagonalSpec::from_diagonal(left)),
                right: Box::new(DiagonalSpec::from_diagonal(right)),
            },
        }
    }
}

/// Parse a diagonal from its JSON interchange form.
pub fn from_json(s: &str) -> Result<Diagonal> {
    let spec: DiagonalSpec =
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    spec.to_diagonal()
}

/// Serialize a diagonal to its JSON interchange form.
pub fn diagonal_json(d: &Diagonal) -> String {
    to_json(&DiagonalSpec::from_diagonal(d))
}

/// One float, 17 significant digits, round-trip exact.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        writer.write_all(fmt_float(value).as_bytes())
    }
}

/// Compact JSON with every float at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(out).expect("JSON output is UTF-8")
}

#[derive(Serialize)]
struct ViolationOut {
    condition: &'static str,
    witness_x: f64,
    magnitude: f64,
}

#[derive(Serialize)]
struct ValidationOut {
    is_member: bool,
    tol: f64,
    violations: Vec<ViolationOut>,
}

pub fn validation_json(r: &ValidationReport) -> String {
    to_json(&ValidationOut {
        is_member: r.is_member,
        tol: r.tol,
        violations: r
            .violations
            .iter()
            .map(|v| ViolationOut {
                condition: v.condition.as_str(),
                witness_x: v.witness_x,
                magnitude: v.magnitude,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct MeasuresOut {
    tau: f64,
    rho: f64,
    gamma: f64,
    footrule: f64,
    blomqvist: f64,
    sing: f64,
    lower_bound_ok: bool,
    upper_conjecture_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_quadrature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_quadrature: Option<f64>,
}

/// Measures report; `oracle` optionally appends midpoint-rule
/// (τ-quadrature, ρ-quadrature) cross-checks.
pub fn measures_json(r: &ConcordanceReport, oracle: Option<(f64, f64)>) -> String {
    to_json(&MeasuresOut {
        tau: r.tau,
        rho: r.rho,
        gamma: r.gamma,
        footrule: r.footrule,
        blomqvist: r.blomqvist,
        sing: r.sing,
        lower_bound_ok: r.lower_bound_ok,
        upper_conjecture_ok: r.upper_conjecture_ok,
        tau_quadrature: oracle.map(|o| o.0),
        rho_quadrature: oracle.map(|o| o.1),
    })
}

#[derive(Serialize)]
struct StarOut {
    product: DiagonalSpec,
    projection_error_bound: f64,
}

pub fn star_json(product: &Diagonal, error_bound: f64) -> String {
    to_json(&StarOut {
        product: DiagonalSpec::from_diagonal(product),
        projection_error_bound: error_bound,
    })
}

#[derive(Serialize)]
struct IterateOut {
    limit: DiagonalSpec,
    converged: bool,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    fitted_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_residual: Option<f64>,
}

pub fn iterate_json(t: &IterationTrace) -> String {
    to_json(&IterateOut {
        limit: DiagonalSpec::from_diagonal(&t.limit),
        converged: t.converged,
        iterations: t.iterations,
        fitted_a: t.fitted_a,
        fit_residual: t.fit_residual,
    })
}

fn csv_pairs(header: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (a, b) in rows {
        out.push_str(&fmt_float(a));
        out.push(',');
        out.push_str(&fmt_float(b));
        out.push('\n');
    }
    out
}

/// Sample CSV: header `u,v`.
pub fn csv_samples(points: &[(f64, f64)]) -> String {
    csv_pairs("u,v", points.iter().copied())
}

/// Conditioning-point sweep CSV for fixed y: header `x,K`.
pub fn csv_xk(xs: &[f64], ks: &[f64]) -> String {
    csv_pairs("x,K", xs.iter().copied().zip(ks.iter().copied()))
}

/// Kernel cdf sweep CSV for fixed x: header `y,K`.
pub fn csv_yk(ys: &[f64], ks: &[f64]) -> String {
    csv_pairs("y,K", ys.iter().copied().zip(ks.iter().copied()))
}

/// Iteration trace CSV: header `n,sup_delta`, n counting applications from 1.
pub fn csv_trace(sup_deltas: &[f64]) -> String {
    let mut out = String::from("n,sup_delta\n");
    for (i, &s) in sup_deltas.iter().enumerate() {
        out.push_str(&(i + 1).to_string());
        out.push(',');
        out.push_str(&fmt_float(s));
        out.push('\n');
    }
    out
}

/// Region scan CSV: header `tau,rho,source` (sources contain no commas).
pub fn csv_region(points: &[RegionPoint]) -> String {
    let mut out = String::from("tau,rho,source\n");
    for p in points {
        out.push_str(&fmt_float(p.tau));
        out.push(',');
        out.push_str(&fmt_float(p.rho));
        out.push(',');
        out.push_str(&p.source);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::{mix, non_si_example};
    use crate::validate::validate_dlsl;

    #[test]
    fn round_trip_is_exact_and_stable() {
        let mixed = mix(
            &Diagonal::lower_l(0.3).unwrap(),
            &non_si_example(),
            0.437,
        )
        .unwrap();
        for d in [
            non_si_example(),
            Diagonal::lower_l(0.1).unwrap(),
            Diagonal::upper_u(0.7).unwrap(),
            Diagonal::power(1.3).unwrap(),
            Diagonal::mo_star(0.3, 0.8).unwrap(),
            mixed,
        ] {
            let s = diagonal_json(&d);
            let back = from_json(&s).unwrap();
            assert_eq!(s, diagonal_json(&back));
            for i in 0..=64 {
                let x = i as f64 / 64.0;
                assert_eq!(d.eval(x).to_bits(), back.eval(x).to_bits(), "x={x} in {s}");
            }
        }
    }

    #[test]
    fn seventeen_digit_floats() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
        let s = diagonal_json(&Diagonal::LowerL { a: 0.1 });
        assert_eq!(s, r#"{"type":"l","a":1.0000000000000001e-1}"#);
    }

    #[test]
    fn parse_and_shape_errors_are_distinguished() {
        assert!(matches!(from_json("{nope"), Err(Error::Parse(_))));
        assert!(matches!(
            from_json(r#"{"type":"cubic","q":1}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            from_json(r#"{"type":"l"}"#),
            Err(Error::Parse(_))
        ));
        // Structurally fine JSON, geometrically broken knots.
        assert!(matches!(
            from_json(r#"{"type":"pwl","knots":[[0,0],[0.5,0.2]]}"#),
            Err(Error::MalformedKnots(_))
        ));
        // Out-of-range parameters parse; validation rejects them.
        let d = from_json(r#"{"type":"l","a":1.5}"#).unwrap();
        assert!(!validate_dlsl(&d, 1e-12).is_member);
        let d = from_json(r#"{"type":"mix","w":2.0,"left":{"type":"l","a":0.5},"right":{"type":"u","a":0.5}}"#)
            .unwrap();
        assert!(!validate_dlsl(&d, 1e-12).is_member);
    }

    #[test]
    fn mo_input_delegates_at_boundaries() {
        // α = 0 is independence; α = 1 collapses to a power diagonal.
        let d = from_json(r#"{"type":"mo","alpha":0.0,"beta":0.5}"#).unwrap();
        assert_eq!(diagonal_json(&d), diagonal_json(&Diagonal::independence()));
        let d = from_json(r#"{"type":"mo","alpha":1.0,"beta":0.5}"#).unwrap();
        assert_eq!(diagonal_json(&d), diagonal_json(&Diagonal::power(1.5).unwrap()));
    }

    #[test]
    fn report_jsons_have_contract_keys() {
        let r = crate::concordance::report(&Diagonal::lower_l(0.5).unwrap());
        let s = measures_json(&r, None);
        for key in [
            "\"tau\":", "\"rho\":", "\"gamma\":", "\"footrule\":", "\"blomqvist\":",
            "\"sing\":", "\"lower_bound_ok\":", "\"upper_conjecture_ok\":",
        ] {
            assert!(s.contains(key), "{s}");
        }
        assert!(!s.contains("quadrature"));
        let s = measures_json(&r, Some((0.0625, 0.0625)));
        assert!(s.contains("\"tau_quadrature\":") && s.contains("\"rho_quadrature\":"));

        let v = validate_dlsl(&Diagonal::LowerL { a: 1.5 }, 1e-12);
        let s = validation_json(&v);
        assert!(s.contains("\"is_member\":false"));
        assert!(s.contains("\"condition\":\"param_range\""));
    }

    #[test]
    fn csv_shapes() {
        let s = csv_samples(&[(0.25, 0.5)]);
        assert_eq!(
            s,
            "u,v\n2.5000000000000000e-1,5.0000000000000000e-1\n"
        );
        let s = csv_trace(&[0.5, 0.25]);
        assert!(s.starts_with("n,sup_delta\n1,"));
        assert!(s.lines().count() == 3 && !s.contains('\r'));
        let s = csv_region(&[crate::concordance::RegionPoint {
            tau: 0.0,
            rho: 0.0,
            source: "power:p=2".into(),
        }]);
        assert!(s.starts_with("tau,rho,source\n"));
        assert!(s.ends_with("power:p=2\n"));
    }
}
