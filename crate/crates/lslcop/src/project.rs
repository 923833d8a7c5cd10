//! Grids, piecewise-linear projections, sup-distances and the seeded
//! random diagonal generator.
//!
//! A piecewise-linear diagonal on knots 0 = x_0 < … < x_n = 1 is a class
//! member iff its φ-values are non-decreasing and obey the per-segment chord
//! cap φ_{i+1} ≤ φ_i·(2 − x_i/x_{i+1}) (the η cone). Walking φ left to right
//! inside those windows — with a backward "reachability" bound L_i ensuring
//! φ can still climb to 1 — therefore parameterizes exactly the PWL members
//! on a given grid. Both the random generator and the class-preserving
//! projection are instances of that walk with different pick rules.
//!
//! The one-sided safety margins (cap shrunk by 1e-14, L inflated by 1e-13
//! per step, ties nudged by 8e-16) keep every inequality strictly true after
//! the knot products y = x·φ are rounded, so results pass the exact rational
//! validator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagonal::{Diagonal, PwlDiagonal};
use crate::error::{Error, Result};
use crate::validate::validate_dlsl;

/// Refine a sorted cut list to roughly `n` points by uniform subdivision of
/// each gap. The cuts themselves (plus 0 and 1) always stay in the grid.
pub fn build_grid(cuts: &[f64], n: usize) -> Vec<f64> {
    let n = n.max(2);
    let mut base: Vec<f64> = cuts
        .iter()
        .copied()
        .filter(|c| c.is_finite() && (0.0..=1.0).contains(c))
        .collect();
    base.push(0.0);
    base.push(1.0);
    base.sort_by(|a, b| a.partial_cmp(b).unwrap());
    base.dedup();
    let h = 1.0 / (n as f64 - 1.0);
    let mut grid = Vec::with_capacity(n + base.len());
    for w in base.windows(2) {
        let (a, b) = (w[0], w[1]);
        grid.push(a);
        let k = ((b - a) / h).ceil() as usize;
        for j in 1..k {
            grid.push(a + (b - a) * j as f64 / k as f64);
        }
    }
    grid.push(1.0);
    grid
}

/// Walk φ-space over `xs`, picking φ_i inside the feasibility window
/// [lo_i, hi_i] via `pick`. Returns the PWL member with y_i = x_i·φ_i.
pub(crate) fn phi_chain(
    xs: &[f64],
    mut pick: impl FnMut(usize, f64, f64) -> f64,
) -> PwlDiagonal {
    let n = xs.len();
    let last = n - 1;
    // Backward reachability: smallest φ_i from which 1 is still reachable
    // under the chord caps, inflated a hair so feasibility survives rounding.
    let mut lbound = vec![1.0; n];
    for i in (1..last).rev() {
        let g = 2.0 - xs[i] / xs[i + 1];
        lbound[i] = (lbound[i + 1] / g * (1.0 + 1e-13)).min(1.0);
    }
    let mut phis: Vec<f64> = vec![0.0; n];
    phis[last] = 1.0;
    for i in 1..last {
        let (lo, hi) = if i == 1 {
            (lbound[1], 1.0)
        } else {
            let lo = phis[i - 1].max(lbound[i]);
            let cap = phis[i - 1] * (2.0 - xs[i - 1] / xs[i]) * (1.0 - 1e-14);
            (lo, cap.min(1.0).max(lo))
        };
        let mut v = pick(i, lo, hi).clamp(lo, hi);
        // Ties with the previous φ are nudged up so the rounded knot products
        // still satisfy the exact cross-multiplied monotonicity inequality.
        if i > 1 && v == phis[i - 1] && hi > v {
            v = (v * (1.0 + 8e-16)).min(hi);
        }
        phis[i] = v;
    }
    let mut ys: Vec<f64> = xs.iter().zip(phis.iter()).map(|(x, p)| x * p).collect();
    ys[0] = 0.0;
    ys[last] = 1.0;
    PwlDiagonal::new(xs.to_vec(), ys).expect("chain output is well-formed by construction")
}

/// Project an arbitrary diagonal function onto the PWL class members on
/// `grid`: interpolate where feasible, clamp into the φ windows where not.
/// Returns the member and the largest |clamp displacement| in δ-units.
pub fn project_to_class(f: impl Fn(f64) -> f64, grid: &[f64]) -> (PwlDiagonal, f64) {
    let mut max_disp = 0.0f64;
    let pwl = phi_chain(grid, |i, lo, hi| {
        let x = grid[i];
        let t = f(x) / x;
        let v = t.clamp(lo, hi);
        max_disp = max_disp.max((v - t).abs() * x);
        v
    });
    (pwl, max_disp)
}

/// Plain interpolation at grid nodes. Fast and O(h²)-accurate, but the result
/// is only a near-member: chords across strictly convex stretches overshoot
/// the η cone by O(h·x). Used for iteration where staying within O(h²) of the
/// exact trajectory matters more than exact membership.
pub fn interp_pwl(f: impl Fn(f64) -> f64, grid: &[f64]) -> PwlDiagonal {
    let mut ys: Vec<f64> = grid.iter().map(|&x| f(x).clamp(0.0, 1.0)).collect();
    ys[0] = 0.0;
    let n = ys.len();
    ys[n - 1] = 1.0;
    PwlDiagonal::new(grid.to_vec(), ys).expect("grid is a valid abscissa set")
}

/// Class-preserving PWL projection of a diagonal with roughly `n` knots.
pub fn to_pwl(d: &Diagonal, n: usize) -> (Diagonal, f64) {
    let grid = build_grid(&d.cut_points(), n);
    let (pwl, disp) = project_to_class(|x| d.eval(x), &grid);
    (Diagonal::Pwl(pwl), disp)
}

/// Deterministic random class member with `n_knots` knots (including the
/// endpoints): abscissae are uniform draws, φ-values uniform in their
/// feasibility windows. The result always passes exact validation — the
/// draw is repeated (deterministically, by advancing a sub-seed) in the
/// vanishingly rare case where rounding breaks an exact inequality.
pub fn random_dlsl(seed: u64, n_knots: usize) -> Result<Diagonal> {
    if n_knots < 2 {
        return Err(Error::ParamRange(format!(
            "random diagonal needs at least 2 knots, got {n_knots}"
        )));
    }
    for attempt in 0u64..1000 {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9E3779B97F4A7C15)));
        let k = n_knots - 2;
        let mut xs = Vec::with_capacity(n_knots);
        xs.push(0.0);
        for _ in 0..k {
            xs.push(rng.gen::<f64>());
        }
        xs.push(1.0);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if xs.windows(2).any(|w| w[1] - w[0] < 1e-4) {
            continue;
        }
        let d = Diagonal::Pwl(phi_chain(&xs, |_, lo, hi| lo + (hi - lo) * rng.gen::<f64>()));
        if validate_dlsl(&d, 0.0).is_member {
            return Ok(d);
        }
    }
    Err(Error::SearchFailure(format!(
        "random diagonal generation did not stabilize for seed {seed}"
    )))
}

/// Exact sup-distance between two PWL diagonals (the difference is PWL, so
/// the sup is attained at a union knot).
pub fn sup_dist_pwl(p1: &PwlDiagonal, p2: &PwlDiagonal) -> f64 {
    let mut best = 0.0f64;
    for &x in p1.xs().iter().chain(p2.xs().iter()) {
        best = best.max((p1.eval(x) - p2.eval(x)).abs());
    }
    best
}

/// Sup-distance of |f − g| estimated on a refined grid with a local
/// trisection polish around the coarse argmax.
pub fn sup_diff_refined(
    f: &impl Fn(f64) -> f64,
    g: &impl Fn(f64) -> f64,
    cuts: &[f64],
    n: usize,
) -> f64 {
    let grid = build_grid(cuts, n);
    let mut best = 0.0f64;
    let mut at = 0usize;
    for (i, &x) in grid.iter().enumerate() {
        let v = (f(x) - g(x)).abs();
        if v > best {
            best = v;
            at = i;
        }
    }
    let mut lo = grid[at.saturating_sub(1)];
    let mut hi = grid[(at + 1).min(grid.len() - 1)];
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let v1 = (f(m1) - g(m1)).abs();
        let v2 = (f(m2) - g(m2)).abs();
        best = best.max(v1).max(v2);
        if v1 < v2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best
}

/// Golden-section argmin of a scalar function on [lo, hi].
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Exact sup-distance between a PWL diagonal and u_a (per segment the
/// difference is linear or quadratic; candidates are endpoints and the
/// interior vertex).
pub fn sup_dist_pwl_vs_upper_u(p: &PwlDiagonal, a: f64) -> f64 {
    let u = Diagonal::UpperU { a };
    let mut best = 0.0f64;
    let xs = p.xs();
    let ys = p.ys();
    for i in 0..xs.len() - 1 {
        let m = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        let mut candidates = vec![xs[i], xs[i + 1]];
        if a > xs[i] && a < xs[i + 1] {
            candidates.push(a);
        }
        // Quadratic part x²/a on [x_i, x_{i+1}] ∩ [0, a]: vertex of mx+c−x²/a.
        if a > 0.0 {
            let v = 0.5 * m * a;
            if v > xs[i] && v < xs[i + 1] && v < a {
                candidates.push(v);
            }
        }
        for x in candidates {
            best = best.max((p.eval(x) - u.eval(x)).abs());
        }
    }
    best
}

/// Exact sup-distance between a PWL diagonal and l_a.
pub fn sup_dist_pwl_vs_lower_l(p: &PwlDiagonal, a: f64) -> f64 {
    let l = Diagonal::LowerL { a };
    let mut best = 0.0f64;
    let xs = p.xs();
    let ys = p.ys();
    for i in 0..xs.len() - 1 {
        let m = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        let mut candidates = vec![xs[i], xs[i + 1]];
        if a > xs[i] && a < xs[i + 1] {
            candidates.push(a);
        }
        // Quadratic part x² on [x_i, x_{i+1}] ∩ [a, 1]: vertex of mx+c−x².
        let v = 0.5 * m;
        if v > xs[i] && v < xs[i + 1] && v > a {
            candidates.push(v);
        }
        for x in candidates {
            best = best.max((p.eval(x) - l.eval(x)).abs());
        }
    }
    best
}

/// Sup-distance from an arbitrary diagonal to u_a.
pub fn sup_dist_to_upper_u(d: &Diagonal, a: f64) -> f64 {
    match d {
        Diagonal::Pwl(p) => sup_dist_pwl_vs_upper_u(p, a),
        _ => {
            let u = Diagonal::UpperU { a };
            let mut cuts = d.cut_points();
            cuts.push(a);
            sup_diff_refined(&|x| d.eval(x), &|x| u.eval(x), &cuts, 4097)
        }
    }
}

/// Sup-distance from an arbitrary diagonal to l_a.
pub fn sup_dist_to_lower_l(d: &Diagonal, a: f64) -> f64 {
    match d {
        Diagonal::Pwl(p) => sup_dist_pwl_vs_lower_l(p, a),
        _ => {
            let l = Diagonal::LowerL { a };
            let mut cuts = d.cut_points();
            cuts.push(a);
            sup_diff_refined(&|x| d.eval(x), &|x| l.eval(x), &cuts, 4097)
        }
    }
}

/// Best-fitting u_a (golden section on the sup-distance, which is unimodal
/// in a for class members). Returns (a, residual).
pub fn fit_upper_u(d: &Diagonal) -> (f64, f64) {
    let a = golden_min(|a| sup_dist_to_upper_u(d, a), 0.0, 1.0, 1e-10);
    (a, sup_dist_to_upper_u(d, a))
}

/// Best-fitting l_a. Returns (a, residual).
pub fn fit_lower_l(d: &Diagonal) -> (f64, f64) {
    let a = golden_min(|a| sup_dist_to_lower_l(d, a), 0.0, 1.0, 1e-10);
    (a, sup_dist_to_lower_l(d, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::{make_pwl, non_si_example};

    #[test]
    fn grid_contains_cuts_and_refines() {
        let g = build_grid(&[0.3, 0.7], 11);
        assert!(g.contains(&0.3) && g.contains(&0.7));
        assert!(g.len() >= 11);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn random_diagonals_are_exact_members() {
        for seed in 0..50 {
            let d = random_dlsl(seed, 2 + (seed as usize % 11)).unwrap();
            assert!(validate_dlsl(&d, 0.0).is_member, "seed {seed}");
        }
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_dlsl(42, 12).unwrap();
        let b = random_dlsl(42, 12).unwrap();
        assert_eq!(a, b);
        let c = random_dlsl(43, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn two_knot_random_is_the_comonotone_diagonal() {
        let d = random_dlsl(7, 2).unwrap();
        assert_eq!(d.eval(0.5), 0.5);
    }

    #[test]
    fn projection_is_class_preserving_even_for_convex_targets() {
        // x² chords violate the η cone, so this exercises the clamps.
        let pi = Diagonal::independence();
        let (proj, disp) = to_pwl(&pi, 257);
        assert!(validate_dlsl(&proj, 0.0).is_member);
        // The clamp displacement is the geometric h·x(1−x)/2 floor, ~1e-3 here.
        assert!(disp < 5e-3, "disp = {disp}");
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((proj.eval(x) - pi.eval(x)).abs() < 5e-3);
        }
    }

    #[test]
    fn projection_is_near_identity_on_members() {
        let d = non_si_example();
        let grid: Vec<f64> = d.as_pwl().unwrap().xs().to_vec();
        let (proj, disp) = project_to_class(|x| d.eval(x), &grid);
        assert!(disp < 1e-12);
        assert!(sup_dist_pwl(d.as_pwl().unwrap(), &proj) < 1e-12);
        assert!(validate_dlsl(&Diagonal::Pwl(proj), 0.0).is_member);
    }

    #[test]
    fn projected_random_members_stay_members() {
        for seed in [3u64, 17, 99] {
            let d = random_dlsl(seed, 9).unwrap();
            let (p, _) = to_pwl(&d, 513);
            assert!(validate_dlsl(&p, 0.0).is_member, "seed {seed}");
        }
    }

    #[test]
    fn exact_sup_distances() {
        let d = make_pwl(&[(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        let p = d.as_pwl().unwrap();
        // Against u_1 = x²: max over [0,.5] of |x/2 − x²| at x = 1/4 is 1/16;
        // on [.5,1] the chord 1.5x−0.5 vs x² peaks at x = 3/4 with 1/16.
        let got = sup_dist_pwl_vs_upper_u(p, 1.0);
        assert!((got - 0.0625).abs() < 1e-15, "{got}");
        let fitted = fit_upper_u(&d);
        assert!(fitted.1 <= 0.0625 + 1e-12);
    }

    #[test]
    fn fit_recovers_family_parameters() {
        let u = Diagonal::upper_u(0.3).unwrap();
        let (a, res) = fit_upper_u(&u);
        assert!((a - 0.3).abs() < 1e-6, "a = {a}");
        assert!(res < 1e-9);
        let l = Diagonal::lower_l(0.45).unwrap();
        let (a, res) = fit_lower_l(&l);
        assert!((a - 0.45).abs() < 1e-6, "a = {a}");
        assert!(res < 1e-9);
    }
}
