//! The Markov (star) product on diagonals.
//!
//! For lower semilinear copulas the Markov product S_{δ1} ∗ S_{δ2} — the
//! copula of the composed Markov kernels — is again lower semilinear, with
//! diagonal
//!
//!   (δ1 ∗ δ2)(x) = δ1(x)·δ2(x)/x + x²·∫_x^1 φ1′(u)·φ2′(u) du,
//!
//! where φ_i = δ_i / id. The comonotone diagonal is the unit and the
//! independence diagonal is null. [`StarExact`] evaluates the product
//! pointwise from the per-segment term algebra; [`star`] additionally
//! returns a class-member piecewise-linear snapshot with an error bound.
//! Repeated products contract to an idempotent — one of the upper family
//! u_a — which [`iterate_star`] tracks and fits.

use crate::analytic::PiecewiseFn;
use crate::diagonal::Diagonal;
use crate::error::{Error, Result};
use crate::project::{
    build_grid, fit_upper_u, interp_pwl, project_to_class, sup_diff_refined,
};
use crate::validate::{default_tol, validate_dlsl};

/// Exact evaluator for δ1 ∗ δ2 built from the merged piecewise expression of
/// φ1′·φ2′ with precomputed suffix integrals, so each evaluation costs one
/// partial-piece integral.
pub struct StarExact {
    d1: Diagonal,
    d2: Diagonal,
    prod: PiecewiseFn,
    suffix: Vec<f64>,
}

impl StarExact {
    /// Build the evaluator. Callers are responsible for membership of the
    /// inputs (see [`star_exact`] for the validating entry point).
    pub fn new(d1: &Diagonal, d2: &Diagonal) -> StarExact {
        let prod = d1.phi_prime_expr().mul(&d2.phi_prime_expr());
        let suffix = prod.suffix_integrals();
        StarExact {
            d1: d1.clone(),
            d2: d2.clone(),
            prod,
            suffix,
        }
    }

    /// ∫_x^1 φ1′(u)·φ2′(u) du.
    pub fn tail(&self, x: f64) -> f64 {
        self.prod.integral_from(x, &self.suffix)
    }

    /// (δ1 ∗ δ2)(x).
    pub fn eval(&self, x: f64) -> f64 {
        assert!((0.0..=1.0).contains(&x));
        if x == 0.0 {
            return 0.0;
        }
        self.d1.eval(x) * self.d2.eval(x) / x + x * x * self.tail(x)
    }

    /// The product copula surface (S_{δ1} ∗ S_{δ2})(x, y) — lower semilinear
    /// in the product diagonal.
    pub fn surface(&self, x: f64, y: f64) -> f64 {
        assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
        let t = x.max(y);
        if t == 0.0 {
            return 0.0;
        }
        x.min(y) * self.eval(t) / t
    }

    /// Break points of the product expression (union of both factors').
    pub fn cut_points(&self) -> Vec<f64> {
        self.prod.cuts().to_vec()
    }
}

/// Star product with a class-member piecewise-linear snapshot.
pub struct StarResult {
    /// Piecewise-linear class member approximating the exact product.
    pub product: Diagonal,
    /// Sup-norm bound on |exact − product|: grid modulus plus the largest
    /// clamp displacement of the class projection.
    pub error_bound: f64,
    /// The exact evaluator, for callers that need off-grid values.
    pub exact: StarExact,
}

/// Validating constructor for the exact product evaluator.
pub fn star_exact(d1: &Diagonal, d2: &Diagonal) -> Result<StarExact> {
    for d in [d1, d2] {
        if !validate_dlsl(d, default_tol(d)).is_member {
            return Err(Error::InvalidInput(
                "star product requires class members".into(),
            ));
        }
    }
    Ok(StarExact::new(d1, d2))
}

/// Structurally recognize the independence diagonal x² in any of its
/// representations (power exponent 2, family boundaries, mixtures thereof).
/// A piecewise-linear diagonal can never equal x², so knots need no check.
fn is_independence_repr(d: &Diagonal) -> bool {
    match d {
        Diagonal::Power { p } => *p == 2.0,
        Diagonal::LowerL { a } => *a == 0.0,
        Diagonal::UpperU { a } => *a == 1.0,
        Diagonal::Mix { w, left, right } => {
            (is_independence_repr(left) && is_independence_repr(right))
                || (*w == 1.0 && is_independence_repr(left))
                || (*w == 0.0 && is_independence_repr(right))
        }
        _ => false,
    }
}

/// Structurally recognize the comonotone diagonal x.
fn is_comonotone_repr(d: &Diagonal) -> bool {
    match d {
        Diagonal::Power { p } => *p == 1.0,
        Diagonal::LowerL { a } => *a == 1.0,
        Diagonal::UpperU { a } => *a == 0.0,
        Diagonal::Pwl(p) => p.xs().iter().zip(p.ys()).all(|(x, y)| x == y),
        Diagonal::Mix { w, left, right } => {
            (is_comonotone_repr(left) && is_comonotone_repr(right))
                || (*w == 1.0 && is_comonotone_repr(left))
                || (*w == 0.0 && is_comonotone_repr(right))
        }
        _ => false,
    }
}

/// Star product of two class members. The null and unit elements are
/// absorbed exactly (independence annihilates, comonotone is neutral);
/// every other product is discretized onto roughly `grid_n` knots through
/// the class-preserving projection. Either way the returned diagonal passes
/// exact validation.
pub fn star(d1: &Diagonal, d2: &Diagonal, grid_n: usize) -> Result<StarResult> {
    let exact = star_exact(d1, d2)?;
    if is_independence_repr(d1) || is_independence_repr(d2) {
        return Ok(StarResult {
            product: Diagonal::independence(),
            error_bound: 0.0,
            exact,
        });
    }
    if is_comonotone_repr(d1) || is_comonotone_repr(d2) {
        return Ok(StarResult {
            product: if is_comonotone_repr(d1) { d2 } else { d1 }.clone(),
            error_bound: 0.0,
            exact,
        });
    }
    let grid = build_grid(&exact.cut_points(), grid_n);
    let (pwl, disp) = project_to_class(|x| exact.eval(x), &grid);
    let max_gap = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    Ok(StarResult {
        product: Diagonal::Pwl(pwl),
        // The product is 2-Lipschitz, so linear interpolation is off by at
        // most the grid gap; clamping adds at most `disp`.
        error_bound: max_gap + disp,
        exact,
    })
}

/// One-shot product surface value (S_{δ1} ∗ S_{δ2})(x, y).
pub fn star_surface(d1: &Diagonal, d2: &Diagonal, x: f64, y: f64) -> Result<f64> {
    Ok(star_exact(d1, d2)?.surface(x, y))
}

/// Trace of the iteration δ, δ∗δ, δ^∗3, … towards its idempotent limit.
#[derive(Clone, Debug)]
pub struct IterationTrace {
    /// iterates[k] ≈ δ^∗(k+1); iterates[0] is the input itself.
    pub iterates: Vec<Diagonal>,
    /// sup_deltas[k] = grid sup-distance between iterates k and k+1.
    pub sup_deltas: Vec<f64>,
    pub converged: bool,
    /// Number of star applications performed.
    pub iterations: usize,
    /// The final iterate.
    pub limit: Diagonal,
    /// Parameter of the best-fitting idempotent u_a for the limit, fitted
    /// once the iteration has converged.
    pub fitted_a: Option<f64>,
    /// Sup-distance of the limit to that u_a.
    pub fit_residual: Option<f64>,
}

/// Iterate the star product of `d` with itself until consecutive iterates
/// agree to `tol` on the iterate grid (defaults elsewhere: tol 1e−8,
/// max_iter 200, grid_n 1025). Iterates are interpolated (not projected)
/// onto a fixed grid: interpolation keeps the O(h²) accuracy needed to
/// recognize the limit, which in general — like every u_a — is not itself
/// piecewise linear, at the price of the iterates being only near-members.
/// Fitting runs against the exact u_a family. Failure to converge is not an
/// error: the trace comes back with `converged = false`.
pub fn iterate_star(
    d: &Diagonal,
    tol: f64,
    max_iter: usize,
    grid_n: usize,
) -> Result<IterationTrace> {
    if !validate_dlsl(d, default_tol(d)).is_member {
        return Err(Error::InvalidInput(
            "star iteration requires a class member".into(),
        ));
    }
    let grid = build_grid(&d.cut_points(), grid_n);
    let mut iterates = vec![d.clone()];
    let mut sup_deltas = Vec::new();
    let mut current = d.clone();
    let mut converged = false;
    for _ in 0..max_iter {
        let exact = StarExact::new(&current, d);
        let next = Diagonal::Pwl(interp_pwl(|x| exact.eval(x), &grid));
        let sup = grid
            .iter()
            .map(|&x| (next.eval(x) - current.eval(x)).abs())
            .fold(0.0f64, f64::max);
        iterates.push(next.clone());
        sup_deltas.push(sup);
        current = next;
        if sup < tol {
            converged = true;
            break;
        }
    }
    let (fitted_a, fit_residual) = if converged {
        let (a, r) = fit_upper_u(&current);
        (Some(a), Some(r))
    } else {
        (None, None)
    };
    Ok(IterationTrace {
        iterations: sup_deltas.len(),
        sup_deltas,
        iterates,
        converged,
        limit: current,
        fitted_a,
        fit_residual,
    })
}

/// Whether δ ∗ δ = δ up to `tol` in sup norm, and if so the parameter of the
/// best-fitting idempotent u_a. Deliberately skips the membership gate so it
/// can judge the near-member limits produced by [`iterate_star`].
pub fn is_idempotent(d: &Diagonal, tol: f64) -> (bool, Option<f64>) {
    let exact = StarExact::new(d, d);
    let resid = sup_diff_refined(
        &|x| exact.eval(x),
        &|x| d.eval(x),
        &exact.cut_points(),
        2049,
    );
    if resid <= tol {
        (true, Some(fit_upper_u(d).0))
    } else {
        (false, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::{mix, non_si_example};

    #[test]
    fn comonotone_is_unit_and_independence_is_null() {
        let one = Diagonal::comonotone();
        let zero = Diagonal::independence();
        for d in [
            Diagonal::lower_l(0.4).unwrap(),
            Diagonal::upper_u(0.7).unwrap(),
            non_si_example(),
            Diagonal::mo_star(0.5, 0.8).unwrap(),
        ] {
            let unit = StarExact::new(&one, &d);
            let null = StarExact::new(&zero, &d);
            for i in 0..=64 {
                let x = i as f64 / 64.0;
                assert!((unit.eval(x) - d.eval(x)).abs() < 1e-14, "{d:?} x={x}");
                assert!((null.eval(x) - x * x).abs() < 1e-14, "{d:?} x={x}");
            }
        }
    }

    #[test]
    fn lower_family_self_product_closed_form() {
        for a in [0.25, 0.5, 0.8] {
            let l = Diagonal::lower_l(a).unwrap();
            let s = StarExact::new(&l, &l);
            for i in 1..=100 {
                let x = i as f64 / 100.0;
                let want = if x <= a {
                    a * a * x + (1.0 - a) * x * x
                } else {
                    x * x
                };
                assert!((s.eval(x) - want).abs() < 1e-14, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn star_is_commutative_and_dominated_by_min() {
        let pool = [
            Diagonal::lower_l(0.3).unwrap(),
            Diagonal::upper_u(0.6).unwrap(),
            Diagonal::power(1.5).unwrap(),
            non_si_example(),
            Diagonal::mo_star(0.4, 0.9).unwrap(),
        ];
        for d1 in &pool {
            for d2 in &pool {
                let ab = StarExact::new(d1, d2);
                let ba = StarExact::new(d2, d1);
                for i in 0..=50 {
                    let x = i as f64 / 50.0;
                    let v = ab.eval(x);
                    assert!((v - ba.eval(x)).abs() < 1e-13, "x={x}");
                    assert!(
                        v <= d1.eval(x).min(d2.eval(x)) + 1e-12,
                        "{d1:?} ∗ {d2:?} at {x}: {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn surface_matches_semilinear_form() {
        let d1 = Diagonal::lower_l(0.5).unwrap();
        let d2 = Diagonal::upper_u(0.5).unwrap();
        let s = StarExact::new(&d1, &d2);
        assert_eq!(s.surface(0.0, 0.7), 0.0);
        let v = s.surface(0.3, 0.8);
        assert!((v - 0.3 * s.eval(0.8) / 0.8).abs() < 1e-15);
        assert!((star_surface(&d1, &d2, 0.3, 0.8).unwrap() - v).abs() == 0.0);
    }

    #[test]
    fn snapshot_is_class_member_within_bound() {
        let d1 = non_si_example();
        let d2 = Diagonal::lower_l(0.35).unwrap();
        let r = star(&d1, &d2, 257).unwrap();
        assert!(validate_dlsl(&r.product, 0.0).is_member);
        assert!(r.error_bound < 0.01);
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!(
                (r.exact.eval(x) - r.product.eval(x)).abs() <= r.error_bound,
                "x={x}"
            );
        }
    }

    #[test]
    fn star_rejects_non_members() {
        let bad = Diagonal::LowerL { a: 1.5 };
        let ok = Diagonal::independence();
        assert!(matches!(
            star(&bad, &ok, 65),
            Err(Error::InvalidInput(_))
        ));
        assert!(star_exact(&ok, &bad).is_err());
    }

    #[test]
    fn idempotents_are_exactly_the_upper_family() {
        for a in [0.0, 0.3, 0.75, 1.0] {
            let u = Diagonal::upper_u(a).unwrap();
            let (idem, fit) = is_idempotent(&u, 1e-12);
            assert!(idem, "u_{a} must be idempotent");
            assert!((fit.unwrap() - a).abs() < 1e-6, "a={a}: {fit:?}");
        }
        for d in [
            Diagonal::lower_l(0.3).unwrap(),
            Diagonal::power(1.5).unwrap(),
            mix(&Diagonal::comonotone(), &Diagonal::independence(), 0.5).unwrap(),
            non_si_example(),
        ] {
            assert!(!is_idempotent(&d, 1e-9).0, "{d:?}");
        }
    }

    #[test]
    fn iteration_contracts_to_an_idempotent() {
        let d = Diagonal::lower_l(0.5).unwrap();
        let trace = iterate_star(&d, 1e-8, 200, 257).unwrap();
        assert!(trace.converged, "sup_deltas = {:?}", trace.sup_deltas);
        // l_a touches the identity only at 1, so the limit is independence.
        assert!(trace.fitted_a.unwrap() > 0.999, "{:?}", trace.fitted_a);
        assert!(trace.fit_residual.unwrap() < 1e-4, "{:?}", trace.fit_residual);
        assert_eq!(trace.iterates.len(), trace.iterations + 1);
        for w in trace.sup_deltas.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", trace.sup_deltas);
        }
    }

    #[test]
    fn iteration_preserves_terminal_identity_stretch() {
        // A member that already equals the identity on [a₀, 1] keeps that
        // stretch under iteration; the limit is u_{a₀}.
        let u = Diagonal::upper_u(0.6).unwrap();
        let trace = iterate_star(&u, 1e-8, 200, 257).unwrap();
        assert!(trace.converged);
        let a = trace.fitted_a.unwrap();
        assert!((a - 0.6).abs() < 1e-3, "{a}");
        assert!(trace.fit_residual.unwrap() < 1e-4);
        assert!(trace.iterations <= 3, "{}", trace.iterations);
    }

    #[test]
    fn iteration_reports_non_convergence_without_failing() {
        // One iteration cannot possibly converge for a slowly contracting
        // member; the trace must come back intact with converged = false.
        let d = Diagonal::lower_l(0.9).unwrap();
        let trace = iterate_star(&d, 1e-8, 1, 129).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.iterations, 1);
        assert!(trace.fitted_a.is_none());
    }
}
