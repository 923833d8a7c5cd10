//! Property-based invariants over randomized class members. Each property
//! draws diagonals through the rejection generator (or a parametric family)
//! and checks a structural fact that must hold for every member.

use proptest::prelude::*;

use lslcop::concordance::{rho, tau};
use lslcop::diagonal::{mix, Diagonal};
use lslcop::lsl::{kernel_cdf, sample, singular_mass, surface};
use lslcop::oracle::checkerboard;
use lslcop::project::random_dlsl;
use lslcop::star::{star, star_exact};
use lslcop::validate::{default_tol, validate_dlsl};

/// Strategy: a random class member drawn from the cone generator or one of
/// the parametric families.
fn any_member() -> impl Strategy<Value = Diagonal> {
    prop_oneof![
        4 => (0u64..50_000, 4usize..12)
            .prop_map(|(seed, k)| random_dlsl(seed, k).expect("generator yields a member")),
        1 => (0.0f64..=1.0).prop_map(|a| Diagonal::LowerL { a }),
        1 => (0.0f64..=1.0).prop_map(|a| Diagonal::UpperU { a }),
        1 => (1.0f64..=2.0).prop_map(|p| Diagonal::Power { p }),
        1 => ((0.0f64..=1.0), (0.0f64..=1.0))
            .prop_map(|(al, be)| Diagonal::mo_star(al, be).unwrap()),
    ]
}

/// Cut-aware midpoint cells on [0,1]: uniform edges plus the diagonal's own
/// breakpoints, so piecewise-smooth integrands are hit at full order.
fn refined_cells(d: &Diagonal, n: usize) -> Vec<(f64, f64)> {
    let mut edges: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    edges.extend(d.cut_points().into_iter().filter(|c| *c > 0.0 && *c < 1.0));
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// x² ≤ δ(x) ≤ x for every member at every point.
    #[test]
    fn envelope_bounds(d in any_member(), x in 0.0f64..=1.0) {
        let v = d.eval(x);
        prop_assert!(v >= x * x - 1e-12, "δ({x}) = {v} below x²");
        prop_assert!(v <= x + 1e-12, "δ({x}) = {v} above x");
    }

    /// δ(x)/x is non-decreasing and δ(x)/x² is non-increasing.
    #[test]
    fn cone_monotonicity(d in any_member(), a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        let (pl, ph) = (d.phi(lo).unwrap(), d.phi(hi).unwrap());
        prop_assert!(ph >= pl - 1e-12, "φ decreased: φ({lo})={pl}, φ({hi})={ph}");
        let (el, eh) = (pl / lo, ph / hi);
        prop_assert!(eh <= el + 1e-12, "η increased: η({lo})={el}, η({hi})={eh}");
    }

    /// Convex combinations stay in the class.
    #[test]
    fn mix_closure(d1 in any_member(), d2 in any_member(), w in 0.0f64..=1.0) {
        let m = mix(&d1, &d2, w).unwrap();
        let rep = validate_dlsl(&m, default_tol(&m));
        prop_assert!(rep.is_member, "mix left the class: {:?}", rep.violations);
    }

    /// Star products stay in the class, never exceed either factor, and
    /// commute.
    #[test]
    fn star_closure_domination_commutativity(
        d1 in any_member(),
        d2 in any_member(),
        x in 0.0f64..=1.0,
    ) {
        let p12 = star_exact(&d1, &d2).unwrap();
        let p21 = star_exact(&d2, &d1).unwrap();
        let v = p12.eval(x);
        prop_assert!((v - p21.eval(x)).abs() <= 1e-12, "star not commutative at {x}");
        prop_assert!(v <= d1.eval(x).min(d2.eval(x)) + 1e-12, "no domination at {x}");
        prop_assert!(v >= x * x - 1e-12, "product fell below independence at {x}");
        let proj = star(&d1, &d2, 1025).unwrap().product;
        let rep = validate_dlsl(&proj, default_tol(&proj));
        prop_assert!(rep.is_member, "projected product left the class: {:?}", rep.violations);
    }

    /// Kendall's τ never exceeds Spearman's ρ on the class.
    #[test]
    fn tau_below_rho(d in any_member()) {
        prop_assert!(tau(&d) <= rho(&d) + 1e-12);
    }

    /// Samples live on the unit square and a repeated seed replays the batch
    /// bit for bit.
    #[test]
    fn sampling_range_and_determinism(d in any_member(), seed in 0u64..1000) {
        let b1 = sample(&d, 256, seed).unwrap();
        let b2 = sample(&d, 256, seed).unwrap();
        for ((u1, v1), (u2, v2)) in b1.points.iter().zip(b2.points.iter()) {
            prop_assert!((0.0..=1.0).contains(u1) && (0.0..=1.0).contains(v1));
            prop_assert!(u1.to_bits() == u2.to_bits() && v1.to_bits() == v2.to_bits());
        }
    }

    /// The checkerboard discretization has uniform margins and no negative
    /// cells: the surface is a genuine copula.
    #[test]
    fn checkerboard_margins(d in any_member()) {
        let n = 64;
        let b = checkerboard(&d, n);
        for &m in &b.mass {
            prop_assert!(m >= -1e-12, "negative cell mass {m}");
        }
        for k in 0..n {
            prop_assert!((b.row_sum(k) - 1.0 / n as f64).abs() <= 1e-12);
            prop_assert!((b.col_sum(k) - 1.0 / n as f64).abs() <= 1e-12);
        }
    }

    /// Rectangle masses of the surface are non-negative (2-increasing).
    #[test]
    fn two_increasing(
        d in any_member(),
        x1 in 0.0f64..=1.0, x2 in 0.0f64..=1.0,
        y1 in 0.0f64..=1.0, y2 in 0.0f64..=1.0,
    ) {
        let (xa, xb) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let (ya, yb) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
        let m = surface(&d, xb, yb) - surface(&d, xa, yb) - surface(&d, xb, ya)
            + surface(&d, xa, ya);
        prop_assert!(m >= -1e-12, "negative rectangle mass {m}");
    }

    /// Integrating the kernel cdf over the first coordinate recovers the
    /// surface: ∫₀ˣ K(s, [0,y]) ds = S(x, y).
    #[test]
    fn kernel_disintegration(d in any_member(), x in 0.05f64..=1.0, y in 0.05f64..=1.0) {
        let mut acc = 0.0;
        for (s, w) in refined_cells(&d, 4096) {
            if s < x {
                acc += w * kernel_cdf(&d, s, y).unwrap();
            } else {
                // partial cell straddling x
                let (lo, hi) = (s - 0.5 * w, (s + 0.5 * w).min(x));
                if hi > lo {
                    acc += (hi - lo) * kernel_cdf(&d, 0.5 * (lo + hi), y).unwrap();
                }
            }
        }
        let want = surface(&d, x, y);
        prop_assert!((acc - want).abs() <= 5e-3, "disintegration off: {acc} vs {want}");
    }

    /// The closed-form singular mass equals the integrated diagonal atom
    /// weight ∫ (2φ − w) dλ.
    #[test]
    fn singular_mass_consistency(d in any_member()) {
        let mut acc = 0.0;
        for (s, w) in refined_cells(&d, 4096) {
            acc += w * (2.0 * d.phi(s).unwrap() - d.w_delta(s).unwrap());
        }
        let closed = singular_mass(&d);
        prop_assert!((acc - closed).abs() <= 1e-4, "atom integral {acc} vs closed {closed}");
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&closed));
    }
}
