//! Diagonal sections of lower semilinear copulas.
//!
//! A diagonal δ: [0,1] → [0,1] generates a lower semilinear copula iff
//! δ(1) = 1, δ(x) ≤ x, and the two section ratios
//! φ(x) = δ(x)/x (non-decreasing) and η(x) = δ(x)/x² (non-increasing)
//! are monotone. Those two cone conditions imply 0 ≤ δ' ≤ 2 and
//! x² ≤ δ(x) ≤ x, so the class sits between the independence diagonal x²
//! and the comonotone diagonal x.
//!
//! Supported representations: piecewise linear (the canonical working form),
//! the lower family l_a(x) = max(ax, x²), the upper family
//! u_a(x) = x²/a for x ≤ a and x otherwise, power diagonals x^p with
//! p ∈ [1,2], the two-parameter star diagonal of Marshall–Olkin copulas,
//! and convex mixtures of any of these.

use crate::analytic::{PiecewiseFn, Term};
use crate::error::{Error, Result};

/// Width of the parameter window around α = 1/2 in which the star diagonal
/// of a Marshall–Olkin pair switches to its logarithmic normal form
/// x²·(1 − αβ·ln x − (αβθ/2)·ln²x). Inside the window the power-form
/// coefficient α²/(1−2α) exceeds ~2.5e5 and would shed precision; the
/// truncated log form is accurate to ≲ 5e-14 there.
const MO_LOG_FORM_WINDOW: f64 = 1e-6;

/// A piecewise-linear diagonal. Knot shape invariants (sorted strictly
/// increasing abscissae from 0 to 1, ordinates in [0,1], endpoints (0,0)
/// and (1,1)) are enforced at construction; class membership is not.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlDiagonal {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PwlDiagonal {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn knots(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.ys.iter().copied()).collect()
    }

    /// Shape-checked constructor used internally; public entry is [`make_pwl`].
    pub(crate) fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::MalformedKnots("x/y length mismatch".into()));
        }
        if xs.len() < 2 {
            return Err(Error::MalformedKnots("need at least 2 knots".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::MalformedKnots("non-finite knot coordinate".into()));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::MalformedKnots(
                "abscissae must be strictly increasing".into(),
            ));
        }
        if xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
            return Err(Error::MalformedKnots("abscissae must run from 0 to 1".into()));
        }
        if ys[0] != 0.0 || *ys.last().unwrap() != 1.0 {
            return Err(Error::MalformedKnots(
                "endpoint values must be δ(0)=0 and δ(1)=1".into(),
            ));
        }
        if ys.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return Err(Error::MalformedKnots("values must lie in [0,1]".into()));
        }
        Ok(PwlDiagonal { xs, ys })
    }

    /// Index of the segment [x_i, x_{i+1}) containing x (last segment is closed).
    pub(crate) fn segment(&self, x: f64) -> usize {
        if x >= 1.0 {
            return self.xs.len() - 2;
        }
        // partition_point gives the first knot > x; the segment starts one before.
        self.xs.partition_point(|k| *k <= x).max(1) - 1
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        if x == self.xs[i] {
            return self.ys[i];
        }
        if x == self.xs[i + 1] {
            return self.ys[i + 1];
        }
        let m = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + m * (x - self.xs[i])
    }

    /// Right-hand slope at x ∈ (0,1), left-hand slope at x = 1.
    pub(crate) fn slope(&self, x: f64) -> f64 {
        let i = if x >= 1.0 {
            self.xs.len() - 2
        } else {
            self.segment(x)
        };
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }
}

/// A copula diagonal in one of the supported representations.
///
/// Variants can be built directly (e.g. when deserializing); nothing about
/// the parameters is checked until [`validate_dlsl`](crate::validate_dlsl)
/// or a checked constructor is used.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagonal {
    Pwl(PwlDiagonal),
    /// l_a(x) = ax for x ≤ a, x² for x > a. l_0 is independence, l_1 comonotone.
    LowerL { a: f64 },
    /// u_a(x) = x²/a for x ≤ a, x for x > a. u_0 is comonotone, u_1 independence.
    UpperU { a: f64 },
    /// x^p with p ∈ [1,2].
    Power { p: f64 },
    /// Star diagonal of two Marshall–Olkin copulas with equal parameters:
    /// (1+c)x² − c·x^{2+θ} with c = α²/(1−2α), θ = β(1−2α)/α.
    MoStar { alpha: f64, beta: f64 },
    /// w·left + (1−w)·right.
    Mix {
        w: f64,
        left: Box<Diagonal>,
        right: Box<Diagonal>,
    },
}

/// Build a piecewise-linear diagonal from knots. Checks knot shape only;
/// class membership is the validator's job.
pub fn make_pwl(knots: &[(f64, f64)]) -> Result<Diagonal> {
    let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
    let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
    Ok(Diagonal::Pwl(PwlDiagonal::new(xs, ys)?))
}

impl Diagonal {
    /// Comonotone diagonal δ(x) = x.
    pub fn comonotone() -> Diagonal {
        Diagonal::Power { p: 1.0 }
    }

    /// Independence diagonal δ(x) = x².
    pub fn independence() -> Diagonal {
        Diagonal::Power { p: 2.0 }
    }

    pub fn lower_l(a: f64) -> Result<Diagonal> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::ParamRange(format!("lower family needs a ∈ [0,1], got {a}")));
        }
        Ok(Diagonal::LowerL { a })
    }

    pub fn upper_u(a: f64) -> Result<Diagonal> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::ParamRange(format!("upper family needs a ∈ [0,1], got {a}")));
        }
        Ok(Diagonal::UpperU { a })
    }

    pub fn power(p: f64) -> Result<Diagonal> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::ParamRange(format!("power diagonal needs p ∈ [1,2], got {p}")));
        }
        Ok(Diagonal::Power { p })
    }

    /// Diagonal of the Markov product of two Marshall–Olkin copulas with
    /// parameters (α, β) and (β, α):
    ///
    ///   δ(x) = (1+c)·x² − c·x^{2+θ},  c = α²/(1−2α),  θ = β(1−2α)/α.
    ///
    /// Degenerate parameter choices collapse to pure power diagonals, and the
    /// removable singularity at α = 1/2 is handled by [`mo_eval`].
    pub fn mo_star(alpha: f64, beta: f64) -> Result<Diagonal> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::ParamRange(format!(
                "Marshall–Olkin parameters need α, β ∈ [0,1], got ({alpha}, {beta})"
            )));
        }
        if alpha == 0.0 || beta == 0.0 {
            return Ok(Diagonal::independence());
        }
        if alpha == 1.0 {
            return Ok(Diagonal::Power { p: 2.0 - beta });
        }
        Ok(Diagonal::MoStar { alpha, beta })
    }

    /// δ(x) evaluated exactly per segment / parametric branch. `x ∈ [0,1]`.
    pub fn eval(&self, x: f64) -> f64 {
        assert!((0.0..=1.0).contains(&x), "eval: x={x} outside [0,1]");
        if x == 0.0 {
            return 0.0;
        }
        match self {
            Diagonal::Pwl(p) => p.eval(x),
            Diagonal::LowerL { a } => {
                if x <= *a {
                    a * x
                } else {
                    x * x
                }
            }
            Diagonal::UpperU { a } => {
                if x <= *a {
                    x * x / a
                } else {
                    x
                }
            }
            Diagonal::Power { p } => x.powf(*p),
            Diagonal::MoStar { alpha, beta } => mo_eval(*alpha, *beta, x),
            Diagonal::Mix { w, left, right } => w * left.eval(x) + (1.0 - w) * right.eval(x),
        }
    }

    /// λ-a.e. derivative w_δ: the right-hand slope on (0,1), the left-hand
    /// slope at x = 1. Errors at x = 0 where no one-sided version is pinned.
    pub fn w_delta(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x > 1.0 {
            return Err(Error::Domain(format!("w_delta needs x ∈ (0,1], got {x}")));
        }
        Ok(self.w_delta_inner(x))
    }

    fn w_delta_inner(&self, x: f64) -> f64 {
        match self {
            Diagonal::Pwl(p) => p.slope(x),
            Diagonal::LowerL { a } => {
                if x >= 1.0 {
                    2.0
                } else if x < *a {
                    *a
                } else {
                    2.0 * x
                }
            }
            Diagonal::UpperU { a } => {
                if x == 1.0 {
                    if *a >= 1.0 {
                        2.0
                    } else {
                        1.0
                    }
                } else if x < *a {
                    2.0 * x / a
                } else {
                    1.0
                }
            }
            Diagonal::Power { p } => p * x.powf(p - 1.0),
            Diagonal::MoStar { alpha, beta } => mo_derivative(*alpha, *beta, x),
            Diagonal::Mix { w, left, right } => {
                w * left.w_delta_inner(x) + (1.0 - w) * right.w_delta_inner(x)
            }
        }
    }

    /// φ(x) = δ(x)/x, the lower section ratio. Undefined at x = 0.
    pub fn phi(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x > 1.0 {
            return Err(Error::Domain(format!("phi needs x ∈ (0,1], got {x}")));
        }
        Ok(self.eval(x) / x)
    }

    /// η(x) = δ(x)/x², the upper section ratio. Undefined at x = 0.
    pub fn eta(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x > 1.0 {
            return Err(Error::Domain(format!("eta needs x ∈ (0,1], got {x}")));
        }
        Ok(self.eval(x) / (x * x))
    }

    /// Exact piecewise term representation (see [`crate::analytic`]).
    pub fn expr(&self) -> PiecewiseFn {
        match self {
            Diagonal::Pwl(p) => {
                let mut pieces = Vec::with_capacity(p.xs.len() - 1);
                for i in 0..p.xs.len() - 1 {
                    let m = (p.ys[i + 1] - p.ys[i]) / (p.xs[i + 1] - p.xs[i]);
                    let c = p.ys[i] - m * p.xs[i];
                    let mut terms = Vec::with_capacity(2);
                    if m != 0.0 {
                        terms.push(Term::new(m, 1.0, 0));
                    }
                    if c != 0.0 {
                        terms.push(Term::new(c, 0.0, 0));
                    }
                    pieces.push(terms);
                }
                PiecewiseFn::new(p.xs.clone(), pieces)
            }
            Diagonal::LowerL { a } => {
                if *a <= 0.0 {
                    PiecewiseFn::whole(vec![Term::new(1.0, 2.0, 0)])
                } else if *a >= 1.0 {
                    PiecewiseFn::whole(vec![Term::new(1.0, 1.0, 0)])
                } else {
                    PiecewiseFn::new(
                        vec![0.0, *a, 1.0],
                        vec![vec![Term::new(*a, 1.0, 0)], vec![Term::new(1.0, 2.0, 0)]],
                    )
                }
            }
            Diagonal::UpperU { a } => {
                if *a <= 0.0 {
                    PiecewiseFn::whole(vec![Term::new(1.0, 1.0, 0)])
                } else if *a >= 1.0 {
                    PiecewiseFn::whole(vec![Term::new(1.0, 2.0, 0)])
                } else {
                    PiecewiseFn::new(
                        vec![0.0, *a, 1.0],
                        vec![vec![Term::new(1.0 / a, 2.0, 0)], vec![Term::new(1.0, 1.0, 0)]],
                    )
                }
            }
            Diagonal::Power { p } => PiecewiseFn::whole(vec![Term::new(1.0, *p, 0)]),
            Diagonal::MoStar { alpha, beta } => PiecewiseFn::whole(mo_terms(*alpha, *beta)),
            Diagonal::Mix { w, left, right } => {
                left.expr().scale(*w).add(&right.expr().scale(1.0 - w))
            }
        }
    }

    /// Term representation of φ'(x) = (δ(x)/x)', used by the star product.
    pub fn phi_prime_expr(&self) -> PiecewiseFn {
        self.expr().shift_exp(-1.0).derivative()
    }

    /// Interior breakpoints plus 0 and 1 (analytic piece boundaries: knots of
    /// a PWL diagonal, the elbow of l_a / u_a, the union for mixtures).
    pub fn cut_points(&self) -> Vec<f64> {
        self.expr().cuts().to_vec()
    }

    /// Number of knots for PWL diagonals, None otherwise.
    pub fn knot_count(&self) -> Option<usize> {
        match self {
            Diagonal::Pwl(p) => Some(p.xs.len()),
            _ => None,
        }
    }

    pub fn as_pwl(&self) -> Option<&PwlDiagonal> {
        match self {
            Diagonal::Pwl(p) => Some(p),
            _ => None,
        }
    }
}

/// Convex mixture w·d1 + (1−w)·d2. Mixing two PWL diagonals collapses to a
/// PWL diagonal on the merged knot set (exact: both are linear between merged
/// knots); anything else stays a symbolic mixture node.
pub fn mix(d1: &Diagonal, d2: &Diagonal, w: f64) -> Result<Diagonal> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::ParamRange(format!("mixture weight must lie in [0,1], got {w}")));
    }
    if let (Diagonal::Pwl(p1), Diagonal::Pwl(p2)) = (d1, d2) {
        let mut xs: Vec<f64> = Vec::with_capacity(p1.xs.len() + p2.xs.len());
        let (mut i, mut j) = (0, 0);
        while i < p1.xs.len() || j < p2.xs.len() {
            let x = match (p1.xs.get(i), p2.xs.get(j)) {
                (Some(a), Some(b)) if a <= b => {
                    i += 1;
                    if a == b {
                        j += 1;
                    }
                    *a
                }
                (Some(_), Some(b)) => {
                    j += 1;
                    *b
                }
                (Some(a), None) => {
                    i += 1;
                    *a
                }
                (None, Some(b)) => {
                    j += 1;
                    *b
                }
                (None, None) => unreachable!(),
            };
            if xs.last() != Some(&x) {
                xs.push(x);
            }
        }
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| w * p1.eval(x) + (1.0 - w) * p2.eval(x))
            .collect();
        return Ok(Diagonal::Pwl(PwlDiagonal::new(xs, ys)?));
    }
    Ok(Diagonal::Mix {
        w,
        left: Box::new(d1.clone()),
        right: Box::new(d2.clone()),
    })
}

fn mo_eval(alpha: f64, beta: f64, x: f64) -> f64 {
    let ab = alpha * beta;
    if ab == 0.0 {
        return x * x;
    }
    let l = x.ln();
    if (1.0 - 2.0 * alpha).abs() < MO_LOG_FORM_WINDOW {
        let theta = beta * (1.0 - 2.0 * alpha) / alpha;
        return x * x * (1.0 - ab * l - 0.5 * ab * theta * l * l);
    }
    let c = alpha * alpha / (1.0 - 2.0 * alpha);
    let theta = beta * (1.0 - 2.0 * alpha) / alpha;
    // (1+c)x² − c·x^{2+θ} = x²·(1 + c·(1 − e^{θ ln x})), cancellation-free.
    x * x * (1.0 + c * (-(theta * l).exp_m1()))
}

fn mo_derivative(alpha: f64, beta: f64, x: f64) -> f64 {
    let ab = alpha * beta;
    if ab == 0.0 {
        return 2.0 * x;
    }
    let l = x.ln();
    let theta = beta * (1.0 - 2.0 * alpha) / alpha;
    if (1.0 - 2.0 * alpha).abs() < MO_LOG_FORM_WINDOW {
        return x * (2.0 - ab * (2.0 * l + 1.0) - ab * theta * (l * l + l));
    }
    let c = alpha * alpha / (1.0 - 2.0 * alpha);
    // d/dx [x²(1 + c(1 − x^θ))] = 2x(1 + c(1 − x^θ)) − αβ·x^{1+θ}.
    2.0 * x * (1.0 + c * (-(theta * l).exp_m1())) - ab * x.powf(1.0 + theta)
}

fn mo_terms(alpha: f64, beta: f64) -> Vec<Term> {
    let ab = alpha * beta;
    if ab == 0.0 {
        return vec![Term::new(1.0, 2.0, 0)];
    }
    let theta = beta * (1.0 - 2.0 * alpha) / alpha;
    if (1.0 - 2.0 * alpha).abs() < MO_LOG_FORM_WINDOW {
        let mut terms = vec![Term::new(1.0, 2.0, 0), Term::new(-ab, 2.0, 1)];
        if theta != 0.0 {
            terms.push(Term::new(-0.5 * ab * theta, 2.0, 2));
        }
        return terms;
    }
    let c = alpha * alpha / (1.0 - 2.0 * alpha);
    vec![Term::new(1.0 + c, 2.0, 0), Term::new(-c, 2.0 + theta, 0)]
}

/// The nine-knot diagonal whose copula is not stochastically increasing:
/// φ is constant on every second knot interval, so the conditional cdf
/// x ↦ K(x,[0,y]) vanishes inside those intervals and jumps up across them.
/// Knot values are dyadic rationals, hence exact in `f64`, and the exact
/// rational validation passes with margin.
pub fn non_si_example() -> Diagonal {
    make_pwl(&[
        (0.0, 0.0),
        (0.125, 0.0703125),    //  9/128, φ = 0.5625
        (0.25, 0.203125),      // 13/64,  φ = 0.8125
        (0.375, 0.3046875),    // 39/128, φ = 0.8125
        (0.5, 0.4609375),      // 59/128, φ = 0.921875
        (0.625, 0.576171875),  // 295/512, φ = 0.921875
        (0.75, 0.732421875),   // 375/512, φ = 0.9765625
        (0.875, 0.8544921875), // 875/1024, φ = 0.9765625
        (1.0, 1.0),
    ])
    .expect("fixture knots are well-formed")
}
