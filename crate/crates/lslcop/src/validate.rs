//! Class membership validation.
//!
//! For piecewise-linear diagonals all four conditions reduce to segment-wise
//! polynomial inequalities in the knot coordinates:
//!
//! * δ ≤ id at knots: `y_i ≤ x_i`;
//! * non-decreasing: `y_i ≤ y_{i+1}` (with the φ-cone this also gives 0 ≤ slope ≤ 2);
//! * φ non-decreasing ⟺ each segment intercept `c ≤ 0` ⟺ `y_i·x_{i+1} ≤ x_i·y_{i+1}`;
//! * η non-increasing ⟺ `m·x + 2c ≥ 0` on each segment, binding at the left
//!   endpoint: `2·y_i·Δx ≥ x_i·Δy` (the right endpoint is checked as well).
//!
//! With `tol = 0` the comparisons run in exact big-rational arithmetic on the
//! knot values (every finite f64 is a rational), so validation is decision-
//! procedure exact. With `tol > 0` plain floating-point comparisons with the
//! given slack are used. Parametric families are certified by their parameter
//! ranges; mixtures recurse.

use num_rational::BigRational;

use crate::diagonal::{Diagonal, PwlDiagonal};

/// Which class condition a violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// δ(x) ≤ x at a knot.
    DeltaLeqIdentity,
    /// δ non-decreasing across a knot.
    NonDecreasing,
    /// Slope of a segment above 2.
    TwoLipschitz,
    /// φ = δ(x)/x decreasing across a segment.
    PhiNonDecreasing,
    /// η = δ(x)/x² increasing inside a segment.
    EtaNonIncreasing,
    /// A family parameter outside its admissible range.
    ParamRange,
    /// A mixture weight outside [0,1].
    WeightRange,
}

impl Condition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::DeltaLeqIdentity => "delta_leq_identity",
            Condition::NonDecreasing => "non_decreasing",
            Condition::TwoLipschitz => "two_lipschitz",
            Condition::PhiNonDecreasing => "phi_non_decreasing",
            Condition::EtaNonIncreasing => "eta_non_increasing",
            Condition::ParamRange => "param_range",
            Condition::WeightRange => "weight_range",
        }
    }
}

/// One failed condition with a witness point and the violation magnitude
/// (how far the offending quantity is on the wrong side, in natural units).
#[derive(Clone, Debug)]
pub struct Violation {
    pub condition: Condition,
    pub witness_x: f64,
    pub magnitude: f64,
}

/// Outcome of [`validate_dlsl`].
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub is_member: bool,
    pub tol: f64,
    pub violations: Vec<Violation>,
}

/// Default validation tolerance for a representation: exact rational
/// comparisons for PWL diagonals, 1e-12 for parametric ones (whose checks are
/// range checks on parameters).
pub fn default_tol(d: &Diagonal) -> f64 {
    match d {
        Diagonal::Pwl(_) => 0.0,
        Diagonal::Mix { left, right, .. } => default_tol(left).max(default_tol(right)),
        _ => 1e-12,
    }
}

/// Check membership of δ in the diagonal class of lower semilinear copulas.
///
/// `tol = 0` requests exact comparisons (big-rational for PWL); `tol > 0`
/// allows that much slack in every floating-point comparison.
pub fn validate_dlsl(d: &Diagonal, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    collect(d, tol, &mut violations);
    ValidationReport {
        is_member: violations.is_empty(),
        tol,
        violations,
    }
}

fn collect(d: &Diagonal, tol: f64, out: &mut Vec<Violation>) {
    match d {
        Diagonal::Pwl(p) => {
            if tol == 0.0 {
                validate_pwl_exact(p, out);
            } else {
                validate_pwl_float(p, tol, out);
            }
        }
        Diagonal::LowerL { a } | Diagonal::UpperU { a } => {
            check_range(*a, 0.0, 1.0, tol, out);
        }
        Diagonal::Power { p } => check_range(*p, 1.0, 2.0, tol, out),
        Diagonal::MoStar { alpha, beta } => {
            check_range(*alpha, 0.0, 1.0, tol, out);
            check_range(*beta, 0.0, 1.0, tol, out);
        }
        Diagonal::Mix { w, left, right } => {
            if !w.is_finite() || *w < -tol || *w > 1.0 + tol {
                out.push(Violation {
                    condition: Condition::WeightRange,
                    witness_x: *w,
                    magnitude: if *w < 0.0 { -*w } else { *w - 1.0 },
                });
            }
            collect(left, tol, out);
            collect(right, tol, out);
        }
    }
}

fn check_range(v: f64, lo: f64, hi: f64, tol: f64, out: &mut Vec<Violation>) {
    if !v.is_finite() || v < lo - tol || v > hi + tol {
        out.push(Violation {
            condition: Condition::ParamRange,
            witness_x: v,
            magnitude: if v < lo { lo - v } else { v - hi },
        });
    }
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("knot coordinates are finite")
}

fn validate_pwl_exact(p: &PwlDiagonal, out: &mut Vec<Violation>) {
    let xs = p.xs();
    let ys = p.ys();
    let n = xs.len();
    let rx: Vec<BigRational> = xs.iter().map(|&v| rat(v)).collect();
    let ry: Vec<BigRational> = ys.iter().map(|&v| rat(v)).collect();
    let two = BigRational::from_integer(2.into());

    for i in 0..n {
        if ry[i] > rx[i] {
            out.push(Violation {
                condition: Condition::DeltaLeqIdentity,
                witness_x: xs[i],
                magnitude: ys[i] - xs[i],
            });
        }
        if i + 1 < n && ry[i + 1] < ry[i] {
            out.push(Violation {
                condition: Condition::NonDecreasing,
                witness_x: xs[i + 1],
                magnitude: ys[i] - ys[i + 1],
            });
        }
    }
    for i in 0..n - 1 {
        let dx = &rx[i + 1] - &rx[i];
        let dy = &ry[i + 1] - &ry[i];
        if dy > &two * &dx {
            out.push(Violation {
                condition: Condition::TwoLipschitz,
                witness_x: xs[i],
                magnitude: (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) - 2.0,
            });
        }
        // φ non-decreasing ⟺ intercept ≤ 0 ⟺ y_i·x_{i+1} ≤ x_i·y_{i+1}.
        if &ry[i] * &rx[i + 1] > &rx[i] * &ry[i + 1] {
            out.push(Violation {
                condition: Condition::PhiNonDecreasing,
                witness_x: xs[i],
                magnitude: ys[i] / xs[i] - ys[i + 1] / xs[i + 1],
            });
        }
        // η non-increasing ⟺ m·x + 2c ≥ 0 on the segment; binding at the
        // left endpoint but both are checked: 2·y·Δx ≥ x·Δy.
        for (x, y, wx) in [(&rx[i], &ry[i], xs[i]), (&rx[i + 1], &ry[i + 1], xs[i + 1])] {
            if &two * y * &dx < x * &dy {
                let m = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                let c = ys[i] - m * xs[i];
                out.push(Violation {
                    condition: Condition::EtaNonIncreasing,
                    witness_x: wx,
                    magnitude: -(m * wx + 2.0 * c),
                });
            }
        }
    }
    dedupe(out);
}

fn validate_pwl_float(p: &PwlDiagonal, tol: f64, out: &mut Vec<Violation>) {
    let xs = p.xs();
    let ys = p.ys();
    let n = xs.len();
    for i in 0..n {
        if ys[i] > xs[i] + tol {
            out.push(Violation {
                condition: Condition::DeltaLeqIdentity,
                witness_x: xs[i],
                magnitude: ys[i] - xs[i],
            });
        }
        if i + 1 < n && ys[i + 1] < ys[i] - tol {
            out.push(Violation {
                condition: Condition::NonDecreasing,
                witness_x: xs[i + 1],
                magnitude: ys[i] - ys[i + 1],
            });
        }
    }
    for i in 0..n - 1 {
        let dx = xs[i + 1] - xs[i];
        let m = (ys[i + 1] - ys[i]) / dx;
        let c = ys[i] - m * xs[i];
        if m > 2.0 + tol {
            out.push(Violation {
                condition: Condition::TwoLipschitz,
                witness_x: xs[i],
                magnitude: m - 2.0,
            });
        }
        // First segment starts at x = 0 where c = 0 identically.
        if i > 0 {
            let phi_l = ys[i] / xs[i];
            let phi_r = ys[i + 1] / xs[i + 1];
            if phi_r < phi_l - tol {
                out.push(Violation {
                    condition: Condition::PhiNonDecreasing,
                    witness_x: xs[i],
                    magnitude: phi_l - phi_r,
                });
            }
        }
        for x in [xs[i], xs[i + 1]] {
            if m * x + 2.0 * c < -tol {
                out.push(Violation {
                    condition: Condition::EtaNonIncreasing,
                    witness_x: x,
                    magnitude: -(m * x + 2.0 * c),
                });
            }
        }
    }
    dedupe(out);
}

/// Collapse duplicate (condition, witness) pairs arising from the two-endpoint
/// η check so reports stay readable.
fn dedupe(v: &mut Vec<Violation>) {
    v.sort_by(|a, b| {
        (a.condition as u8, a.witness_x)
            .partial_cmp(&(b.condition as u8, b.witness_x))
            .unwrap()
    });
    v.dedup_by(|a, b| a.condition == b.condition && a.witness_x == b.witness_x);
}
