//! Closed-form concordance measures and the (τ, ρ) attainability toolkit.
//!
//! For a lower semilinear copula every classical measure reduces to one or
//! two integrals of the diagonal, all evaluated exactly by the term algebra:
//!
//!   τ = 4·∫ δ²(x)/x dx − 1          Kendall's tau
//!   ρ = 12·∫ δ(x)·x dx − 3          Spearman's rho
//!   γ = 4·∫₀^½ δ − 4·∫_½^1 δ + 8·∫_½^1 δ/x − 2   Gini's gamma
//!   f = 6·∫ δ − 2                   Spearman's footrule
//!   β = 4·δ(½) − 1                  Blomqvist's beta
//!
//! (The γ form folds the reflected term x·δ(1−x)/(1−x) onto [½, 1] by the
//! substitution x ↦ 1−x, which turns it into (1−x)·δ(x)/x = δ/x − δ.)
//!
//! Within the class, τ ≤ ρ always, with equality exactly on the lower
//! family l_a; the upper family u_a traces the curve ρ = 1 − (1−τ)^{3/2},
//! which is conjectured — not proven — to bound the region from above, so
//! it is only ever reported as a flag, never asserted.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagonal::{mix, Diagonal};
use crate::error::{Error, Result};
use crate::lsl::singular_mass;
use crate::project::{random_dlsl, sup_diff_refined};
use crate::validate::{default_tol, validate_dlsl};

/// Kendall's τ = 4·∫ δ²/x − 1.
pub fn tau(d: &Diagonal) -> f64 {
    let e = d.expr();
    4.0 * e.mul(&e).shift_exp(-1.0).integral(0.0, 1.0) - 1.0
}

/// Spearman's ρ = 12·∫ δ·x − 3.
pub fn rho(d: &Diagonal) -> f64 {
    12.0 * d.expr().shift_exp(1.0).integral(0.0, 1.0) - 3.0
}

/// Gini's γ, with the survival-diagonal integral folded onto [½, 1].
pub fn gamma(d: &Diagonal) -> f64 {
    let e = d.expr();
    let head = e.integral(0.0, 0.5);
    let tail = e.integral(0.5, 1.0);
    let ratio_tail = e.shift_exp(-1.0).integral(0.5, 1.0);
    4.0 * head - 4.0 * tail + 8.0 * ratio_tail - 2.0
}

/// Spearman's footrule f = 6·∫ δ − 2.
pub fn footrule(d: &Diagonal) -> f64 {
    6.0 * d.expr().integral(0.0, 1.0) - 2.0
}

/// Blomqvist's β = 4·δ(½) − 1.
pub fn blomqvist(d: &Diagonal) -> f64 {
    4.0 * d.eval(0.5) - 1.0
}

/// ρ-value of the conjectured upper boundary at a given τ: 1 − (1−τ)^{3/2}.
/// The upper family u_a lies exactly on this curve (τ = 1−a², ρ = 1−a³).
pub fn conjectured_rho_upper(tau: f64) -> f64 {
    1.0 - (1.0 - tau).max(0.0).powf(1.5)
}

/// All five measures, the singular mass, and the two (τ, ρ)-region flags.
#[derive(Clone, Copy, Debug)]
pub struct ConcordanceReport {
    pub tau: f64,
    pub rho: f64,
    pub gamma: f64,
    pub footrule: f64,
    pub blomqvist: f64,
    /// Mass of the singular (diagonal-concentrated) component.
    pub sing: f64,
    /// τ ≤ ρ, a theorem for this class (checked with 1e−12 slack).
    pub lower_bound_ok: bool,
    /// ρ ≤ 1 − (1−τ)^{3/2}, the conjectured upper boundary (1e−9 slack).
    /// Informational only — a `false` here would be a counterexample.
    pub upper_conjecture_ok: bool,
}

pub fn report(d: &Diagonal) -> ConcordanceReport {
    let t = tau(d);
    let r = rho(d);
    ConcordanceReport {
        tau: t,
        rho: r,
        gamma: gamma(d),
        footrule: footrule(d),
        blomqvist: blomqvist(d),
        sing: singular_mass(d),
        lower_bound_ok: t <= r + 1e-12,
        upper_conjecture_ok: r <= conjectured_rho_upper(t) + 1e-9,
    }
}

/// One point of a (τ, ρ)-region scan with a descriptor of its generator.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionPoint {
    pub tau: f64,
    pub rho: f64,
    pub source: String,
}

/// Which generators a region scan draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySelector {
    pub lower: bool,
    pub upper: bool,
    pub power: bool,
    pub mix: bool,
    pub random: bool,
}

impl Default for FamilySelector {
    fn default() -> Self {
        FamilySelector {
            lower: true,
            upper: true,
            power: true,
            mix: true,
            random: true,
        }
    }
}

impl FamilySelector {
    /// Parse a comma-separated selector like "lower,upper" or "all".
    pub fn parse(s: &str) -> Result<FamilySelector> {
        let mut sel = FamilySelector {
            lower: false,
            upper: false,
            power: false,
            mix: false,
            random: false,
        };
        for part in s.split(',') {
            match part.trim() {
                "all" => sel = FamilySelector::default(),
                "lower" => sel.lower = true,
                "upper" => sel.upper = true,
                "power" => sel.power = true,
                "mix" => sel.mix = true,
                "random" => sel.random = true,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown family '{other}' (expected lower|upper|power|mix|random|all)"
                    )))
                }
            }
        }
        Ok(sel)
    }
}

/// Emit `n` (τ, ρ) points per selected generator, sorted by (τ, ρ, source).
/// Parametric families sweep a uniform parameter grid; "mix" blends random
/// lower/upper pairs; "random" uses seeded random class members. All closed
/// form, deterministic for fixed (n, seed, families).
pub fn region_scan(n: usize, seed: u64, families: FamilySelector) -> Vec<RegionPoint> {
    let n = n.max(1);
    let mut out = Vec::new();
    let mut push = |d: &Diagonal, source: String| {
        out.push(RegionPoint {
            tau: tau(d),
            rho: rho(d),
            source,
        });
    };
    let param = |i: usize| if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
    if families.lower {
        for i in 0..n {
            let a = param(i);
            push(&Diagonal::LowerL { a }, format!("l:a={a}"));
        }
    }
    if families.upper {
        for i in 0..n {
            let a = param(i);
            push(&Diagonal::UpperU { a }, format!("u:a={a}"));
        }
    }
    if families.power {
        for i in 0..n {
            let p = 1.0 + param(i);
            push(&Diagonal::Power { p }, format!("power:p={p}"));
        }
    }
    if families.mix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..n {
            let a: f64 = rng.gen();
            let b: f64 = rng.gen();
            let w: f64 = rng.gen();
            let d = mix(&Diagonal::LowerL { a }, &Diagonal::UpperU { a: b }, w)
                .expect("weight in range");
            push(&d, format!("mix:{i}"));
        }
    }
    if families.random {
        // Decorrelate the knot-count stream from the per-member seeds.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
        for i in 0..n {
            let knots = 4 + (rng.gen::<u64>() % 9) as usize; // 4..=12
            let d = random_dlsl(seed.wrapping_add(i as u64), knots)
                .expect("random member generation");
            push(&d, format!("random:{i}"));
        }
    }
    out.sort_by(|p, q| {
        p.tau
            .total_cmp(&q.tau)
            .then(p.rho.total_cmp(&q.rho))
            .then(p.source.cmp(&q.source))
    });
    out
}

/// Strict-convexity gap of τ along a mixture: (w·τ(d1) + (1−w)·τ(d2)) −
/// τ(mix(d1,d2,w)) — strictly positive for distinct diagonals, while ρ is
/// affine along the same path.
pub fn tau_convexity_gap(d1: &Diagonal, d2: &Diagonal, w: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::ParamRange(format!(
            "convexity gap needs w ∈ (0,1), got {w}"
        )));
    }
    let mut cuts = d1.cut_points();
    cuts.extend(d2.cut_points());
    if sup_diff_refined(&|x| d1.eval(x), &|x| d2.eval(x), &cuts, 257) < 1e-12 {
        return Err(Error::DegenerateInput(
            "convexity gap needs two distinct diagonals".into(),
        ));
    }
    let chord = w * tau(d1) + (1.0 - w) * tau(d2);
    Ok(chord - tau(&mix(d1, d2, w)?))
}

/// Construct a class member whose (τ, ρ) is the arithmetic midpoint of the
/// inputs' (τ, ρ) pairs.
///
/// The half-half mixture δ₃ already has the target ρ exactly (ρ is affine)
/// but undershoots the target τ (τ is convex). Blending δ₃ towards
/// l_{ρt^{1/4}} — whose τ and ρ both equal ρt — keeps ρ pinned at ρt for
/// every blend weight while raising τ continuously up to ρt ≥ τt, so a
/// single bisection on the blend weight lands the target. When the inputs
/// share their ρ, the plain two-input mixture already pins ρ and the same
/// bisection runs on its weight instead.
pub fn midpoint_construct(d1: &Diagonal, d2: &Diagonal) -> Result<Diagonal> {
    for d in [d1, d2] {
        if !validate_dlsl(d, default_tol(d)).is_member {
            return Err(Error::InvalidInput(
                "midpoint construction requires class members".into(),
            ));
        }
    }
    let (tau1, tau2) = (tau(d1), tau(d2));
    let tau_t = 0.5 * (tau1 + tau2);
    if (rho(d1) - rho(d2)).abs() <= 1e-12 {
        // ρ is constant along the d1–d2 segment; bisect its weight on τ.
        let g = |w: f64| -> Result<f64> { Ok(tau(&mix(d1, d2, w)?) - tau_t) };
        let root = bisect_increasing(g, 0.0, 1.0, tau2 - tau_t, tau1 - tau_t)?;
        return mix(d1, d2, root);
    }
    let delta3 = mix(d1, d2, 0.5)?;
    let g0 = tau(&delta3) - tau_t;
    if g0.abs() <= 1e-12 {
        return Ok(delta3);
    }
    let rho_t = rho(&delta3); // = midpoint of the ρ's, exactly
    let pin = Diagonal::LowerL {
        a: rho_t.clamp(0.0, 1.0).powf(0.25),
    };
    let g = |alpha: f64| -> Result<f64> { Ok(tau(&mix(&pin, &delta3, alpha)?) - tau_t) };
    let g1 = g(1.0)?;
    let root = bisect_increasing(g, 0.0, 1.0, g0, g1)?;
    mix(&pin, &delta3, root)
}

/// Bisection for a sign change of `g` on [lo, hi] given the endpoint values.
/// Tolerates a flat touch at either end and converges to 1e−12 in parameter.
fn bisect_increasing(
    g: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    g_hi: f64,
) -> Result<f64> {
    if g_lo.abs() <= 1e-13 {
        return Ok(lo);
    }
    if g_hi.abs() <= 1e-13 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::SearchFailure(format!(
            "no sign change on bracket: g({lo}) = {g_lo}, g({hi}) = {g_hi}"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let val = g(mid)?;
        if val.abs() <= 1e-13 {
            return Ok(mid);
        }
        if val.signum() == g_lo.signum() {
            lo = mid;
            g_lo = val;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::non_si_example;

    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn frechet_endpoints() {
        let r = report(&Diagonal::comonotone());
        for v in [r.tau, r.rho, r.gamma, r.footrule, r.blomqvist, r.sing] {
            assert!((v - 1.0).abs() < 1e-14, "{r:?}");
        }
        let r = report(&Diagonal::independence());
        for v in [r.tau, r.rho, r.gamma, r.footrule, r.blomqvist, r.sing] {
            assert!(v.abs() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn family_closed_forms() {
        for a in [0.0f64, 0.25, 0.5, 0.9, 1.0] {
            let l = Diagonal::LowerL { a };
            assert!((tau(&l) - a.powi(4)).abs() < 1e-14, "a={a}");
            assert!((rho(&l) - a.powi(4)).abs() < 1e-14, "a={a}");
            assert!((footrule(&l) - a.powi(3)).abs() < 1e-14);
            let u = Diagonal::UpperU { a };
            assert!((tau(&u) - (1.0 - a * a)).abs() < 1e-14, "a={a}");
            assert!((rho(&u) - (1.0 - a.powi(3))).abs() < 1e-14, "a={a}");
            assert!((footrule(&u) - (1.0 - a * a)).abs() < 1e-14);
        }
        for p in [1.0f64, 1.3, 1.7, 2.0] {
            let d = Diagonal::Power { p };
            assert!((tau(&d) - (2.0 / p - 1.0)).abs() < 1e-14, "p={p}");
            assert!((rho(&d) - (12.0 / (p + 2.0) - 3.0)).abs() < 1e-14, "p={p}");
        }
        // Spot values at a = 1/2.
        let l = Diagonal::LowerL { a: 0.5 };
        assert!((gamma(&l) - 1.0 / 12.0).abs() < 1e-14);
        assert!(blomqvist(&l).abs() < 1e-15); // δ(½) = ¼
        let u = Diagonal::UpperU { a: 0.5 };
        assert!((gamma(&u) - 5.0 / 6.0).abs() < 1e-14);
        assert!((blomqvist(&u) - 1.0).abs() < 1e-15); // δ(½) = ½
    }

    #[test]
    fn gamma_matches_quadrature_of_both_diagonals() {
        use crate::lsl::surface;
        for d in [
            Diagonal::lower_l(0.37).unwrap(),
            Diagonal::upper_u(0.81).unwrap(),
            Diagonal::power(1.4).unwrap(),
            Diagonal::mo_star(0.5, 0.6).unwrap(),
            non_si_example(),
        ] {
            // Integrate piecewise with every kink of x ↦ δ(x) and of
            // x ↦ S(x, 1−x) (δ-cuts, their reflections, the min/max switch
            // at ½) on a panel boundary, so Simpson keeps its full order.
            let mut brk = d.cut_points();
            brk.extend(d.cut_points().iter().map(|c| 1.0 - c));
            brk.push(0.5);
            brk.sort_by(f64::total_cmp);
            brk.dedup();
            let split = |f: &dyn Fn(f64) -> f64| -> f64 {
                brk.windows(2)
                    .map(|w| simpson(&|x| f(x), w[0], w[1], 2048))
                    .sum()
            };
            let main = split(&|x| d.eval(x));
            let anti = split(&|x| surface(&d, x, 1.0 - x));
            let want = 4.0 * (main + anti) - 2.0;
            assert!(
                (gamma(&d) - want).abs() < 1e-8,
                "{d:?}: {} vs {want}",
                gamma(&d)
            );
        }
    }

    #[test]
    fn tau_never_exceeds_rho() {
        for d in [
            Diagonal::lower_l(0.6).unwrap(),
            Diagonal::upper_u(0.2).unwrap(),
            Diagonal::power(1.8).unwrap(),
            Diagonal::mo_star(0.3, 0.7).unwrap(),
            non_si_example(),
            mix(
                &Diagonal::lower_l(0.9).unwrap(),
                &Diagonal::upper_u(0.1).unwrap(),
                0.3,
            )
            .unwrap(),
        ] {
            let r = report(&d);
            assert!(r.lower_bound_ok, "{d:?}: {r:?}");
            assert!(r.upper_conjecture_ok, "{d:?}: {r:?}");
            for v in [r.tau, r.rho, r.gamma, r.footrule, r.blomqvist, r.sing] {
                assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{d:?}: {r:?}");
            }
        }
    }

    #[test]
    fn upper_family_sits_on_conjectured_boundary() {
        for a in [0.1f64, 0.33, 0.5, 0.92] {
            let u = Diagonal::UpperU { a };
            let gap = conjectured_rho_upper(tau(&u)) - rho(&u);
            assert!(gap.abs() < 1e-13, "a={a}: {gap}");
        }
    }

    #[test]
    fn rho_is_affine_along_mixtures() {
        let d1 = Diagonal::lower_l(0.7).unwrap();
        let d2 = Diagonal::mo_star(0.6, 0.5).unwrap();
        for w in [0.0, 0.25, 0.6, 1.0] {
            let m = mix(&d1, &d2, w).unwrap();
            let chord = w * rho(&d1) + (1.0 - w) * rho(&d2);
            assert!((rho(&m) - chord).abs() < 1e-13, "w={w}");
        }
    }

    #[test]
    fn tau_is_strictly_convex_along_mixtures() {
        let gap = tau_convexity_gap(&Diagonal::comonotone(), &Diagonal::independence(), 0.5)
            .unwrap();
        assert!(gap > 0.01, "{gap}");
        // l_a endpoints, closed-form chord.
        let gap = tau_convexity_gap(
            &Diagonal::lower_l(0.2).unwrap(),
            &Diagonal::lower_l(0.8).unwrap(),
            0.5,
        )
        .unwrap();
        assert!(gap > 0.0, "{gap}");
        assert!(matches!(
            tau_convexity_gap(&Diagonal::comonotone(), &Diagonal::comonotone(), 0.5),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            tau_convexity_gap(&Diagonal::comonotone(), &Diagonal::independence(), 1.0),
            Err(Error::ParamRange(_))
        ));
    }

    #[test]
    fn midpoint_hits_both_targets() {
        let cases = [
            (Diagonal::lower_l(0.8).unwrap(), Diagonal::upper_u(0.4).unwrap()),
            (Diagonal::comonotone(), Diagonal::independence()),
            (Diagonal::power(1.2).unwrap(), non_si_example()),
            (Diagonal::upper_u(0.9).unwrap(), Diagonal::upper_u(0.2).unwrap()),
            // Equal-ρ shortcut: ρ(l_a) = a⁴ = 1 − b³ = ρ(u_b), distinct τ.
            (
                Diagonal::lower_l((1.0f64 - 0.8f64.powi(3)).powf(0.25)).unwrap(),
                Diagonal::upper_u(0.8).unwrap(),
            ),
            // Both on the τ = ρ boundary.
            (Diagonal::lower_l(0.3).unwrap(), Diagonal::lower_l(0.7).unwrap()),
        ];
        for (d1, d2) in cases {
            let tau_t = 0.5 * (tau(&d1) + tau(&d2));
            let rho_t = 0.5 * (rho(&d1) + rho(&d2));
            let m = midpoint_construct(&d1, &d2).unwrap();
            assert!(validate_dlsl(&m, 1e-9).is_member, "{d1:?} {d2:?}");
            assert!((tau(&m) - tau_t).abs() < 1e-9, "{d1:?} {d2:?}: τ");
            assert!((rho(&m) - rho_t).abs() < 1e-9, "{d1:?} {d2:?}: ρ");
        }
        // Identical inputs short-circuit to the mixture itself.
        let d = Diagonal::lower_l(0.5).unwrap();
        let m = midpoint_construct(&d, &d).unwrap();
        assert!((tau(&m) - tau(&d)).abs() < 1e-14);
    }

    #[test]
    fn region_scan_is_sorted_deterministic_and_inside_known_bounds() {
        let scan = region_scan(16, 7, FamilySelector::default());
        assert_eq!(scan.len(), 5 * 16);
        let again = region_scan(16, 7, FamilySelector::default());
        assert_eq!(scan, again);
        for w in scan.windows(2) {
            assert!(
                w[0].tau < w[1].tau
                    || (w[0].tau == w[1].tau
                        && (w[0].rho < w[1].rho
                            || (w[0].rho == w[1].rho && w[0].source <= w[1].source)))
            );
        }
        for p in &scan {
            assert!(p.tau <= p.rho + 1e-12, "{p:?}");
            assert!(p.rho <= conjectured_rho_upper(p.tau) + 1e-9, "{p:?}");
            assert!((0.0..=1.0).contains(&p.tau) && (0.0..=1.0).contains(&p.rho));
            assert!(!p.source.contains(','), "{p:?}");
        }
        // Selector subsetting and parsing.
        let only = FamilySelector::parse("lower,power").unwrap();
        assert!(only.lower && only.power && !only.upper && !only.mix && !only.random);
        assert_eq!(region_scan(4, 0, only).len(), 8);
        assert!(FamilySelector::parse("frobnicate").is_err());
    }
}
