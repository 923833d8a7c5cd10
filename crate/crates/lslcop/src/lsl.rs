//! The lower semilinear copula S_δ generated by a diagonal, its Markov
//! kernel, singular component, sampler and positive-dependence diagnostics.
//!
//! S_δ(x,y) = y·δ(x)/x for y ≤ x and x·δ(y)/y otherwise (0/0 := 0): linear
//! in the minor coordinate below the main diagonal, hence "lower semilinear".
//! Disintegrating along the first coordinate gives the kernel
//!
//!   K(x, [0,y]) = (y/x)·w_δ(x) − (y/x²)·δ(x)   for y < x,
//!                 δ(y)/y                        for y ≥ x,
//!
//! i.e. a linear cdf piece on [0,x), an atom of mass 2δ(x)/x − w_δ(x) at
//! y = x, and the continuous tail cdf φ(y) = δ(y)/y on (x,1].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagonal::Diagonal;
use crate::error::{Error, Result};
use crate::validate::{default_tol, validate_dlsl};

/// Copula value S_δ(x, y) with the 0/0 := 0 convention.
pub fn surface(d: &Diagonal, x: f64, y: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
    let t = x.max(y);
    let m = x.min(y);
    if t == 0.0 {
        return 0.0;
    }
    m * d.eval(t) / t
}

/// Markov kernel cdf K(x, [0, y]). Conditioning requires x ∈ (0,1).
pub fn kernel_cdf(d: &Diagonal, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!(
            "kernel conditioning needs x ∈ (0,1), got {x}"
        )));
    }
    assert!((0.0..=1.0).contains(&y));
    if y >= x {
        return Ok(d.eval(y) / y);
    }
    let w = d.w_delta(x)?;
    // A cdf lives in [0,1]; the difference below can land a few ulps outside
    // when the two terms cancel (e.g. on stretches where δ(x) = x).
    Ok(((y / x) * w - (y / (x * x)) * d.eval(x)).clamp(0.0, 1.0))
}

/// The conditional distribution of the second coordinate given U = x:
/// a uniform part with cdf slope `cdf_left_slope` on [0, x), an atom at x,
/// and the tail cdf y ↦ δ(y)/y on [x, 1].
#[derive(Clone, Debug)]
pub struct ConditionalLaw {
    pub x: f64,
    pub cdf_left_slope: f64,
    pub atom_at_x: f64,
    diag: Diagonal,
}

impl ConditionalLaw {
    pub fn cdf(&self, y: f64) -> f64 {
        assert!((0.0..=1.0).contains(&y));
        if y < self.x {
            self.cdf_left_slope * y
        } else {
            self.diag.eval(y) / y
        }
    }

    /// The tail cdf y ↦ δ(y)/y, defined on [x, 1].
    pub fn tail_cdf(&self, y: f64) -> f64 {
        assert!(y >= self.x && y <= 1.0);
        self.diag.eval(y) / y
    }
}

/// Disintegrate S_δ at x ∈ (0,1).
pub fn conditional_law(d: &Diagonal, x: f64) -> Result<ConditionalLaw> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!(
            "conditional law needs x ∈ (0,1), got {x}"
        )));
    }
    let w = d.w_delta(x)?;
    let phi = d.eval(x) / x;
    Ok(ConditionalLaw {
        x,
        cdf_left_slope: (w - phi) / x,
        // Non-negative for class members; tiny negative roundoff is clamped.
        atom_at_x: (2.0 * phi - w).max(0.0),
        diag: d.clone(),
    })
}

/// Mass of the singular component concentrated on the main diagonal:
/// 2·∫ δ(x)/x dλ(x) − 1. Zero exactly for independence, one for comonotone.
pub fn singular_mass(d: &Diagonal) -> f64 {
    2.0 * d.expr().shift_exp(-1.0).integral(0.0, 1.0) - 1.0
}

/// A seeded batch of copula samples.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub n: usize,
    pub seed: u64,
    pub points: Vec<(f64, f64)>,
}

/// Draw `n` pairs from S_δ by conditional inversion: U uniform, then V from
/// the kernel at U (linear part / atom / tail, the tail by bisection of the
/// non-decreasing φ with the infimum convention on flat stretches).
pub fn sample(d: &Diagonal, n: usize, seed: u64) -> Result<SampleBatch> {
    let report = validate_dlsl(d, default_tol(d));
    if !report.is_member {
        return Err(Error::InvalidInput(
            "sampling requires a class member".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u: f64 = rng.gen();
        while u == 0.0 {
            u = rng.gen();
        }
        let p: f64 = rng.gen();
        let ev = d.eval(u);
        let phi = ev / u;
        let w = d.w_delta(u).expect("u ∈ (0,1)");
        let lin_mass = (w - phi).max(0.0);
        let v = if p < lin_mass {
            // Linear cdf piece: slope (w−φ)/u on [0, u).
            p * u / (w - phi)
        } else if p < phi {
            // Atom at the diagonal.
            u
        } else {
            // Tail: smallest y ∈ [u,1] with φ(y) ≥ p.
            let mut lo = u;
            let mut hi = 1.0;
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if d.eval(mid) / mid >= p {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        points.push((u, v));
    }
    Ok(SampleBatch { n, seed, points })
}

/// Positive quadrant dependence check on a uniform grid: S_δ(x,y) ≥ xy.
#[derive(Clone, Debug)]
pub struct PqdReport {
    pub holds: bool,
    pub worst_gap: f64,
    pub worst_point: (f64, f64),
}

pub fn check_pqd(d: &Diagonal, grid_n: usize) -> PqdReport {
    let mut worst_gap = f64::INFINITY;
    let mut worst_point = (0.0, 0.0);
    for i in 0..=grid_n {
        let x = i as f64 / grid_n as f64;
        for j in 0..=grid_n {
            let y = j as f64 / grid_n as f64;
            let gap = surface(d, x, y) - x * y;
            if gap < worst_gap {
                worst_gap = gap;
                worst_point = (x, y);
            }
        }
    }
    PqdReport {
        holds: worst_gap >= -1e-12,
        worst_gap,
        worst_point,
    }
}

/// Left tail decreasingness check: x ↦ S_δ(x,y)/x non-increasing for each y.
#[derive(Clone, Debug)]
pub struct LtdReport {
    pub holds: bool,
    pub worst_increase: f64,
    pub worst_point: (f64, f64),
}

pub fn check_ltd(d: &Diagonal, grid_n: usize) -> LtdReport {
    let mut worst = f64::NEG_INFINITY;
    let mut at = (0.0, 0.0);
    for j in 1..grid_n {
        let y = j as f64 / grid_n as f64;
        let mut prev = surface(d, 1.0 / grid_n as f64, y) * grid_n as f64;
        for i in 2..=grid_n {
            let x = i as f64 / grid_n as f64;
            let cur = surface(d, x, y) / x;
            let rise = cur - prev;
            if rise > worst {
                worst = rise;
                at = (x, y);
            }
            prev = cur;
        }
    }
    LtdReport {
        holds: worst <= 1e-12,
        worst_increase: worst,
        worst_point: at,
    }
}

/// Grid profile of x ↦ K(x, [0,y]) for a fixed y, listing the intervals on
/// which it increases — witnesses against stochastic increasingness.
#[derive(Clone, Debug)]
pub struct SiProfile {
    pub y: f64,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// Consecutive grid pairs (x_i, x_{i+1}) with K(x_{i+1}) > K(x_i).
    pub increasing: Vec<(f64, f64)>,
}

pub fn si_profile(d: &Diagonal, y: f64, grid_n: usize) -> Result<SiProfile> {
    assert!((0.0..=1.0).contains(&y));
    let mut xs = Vec::with_capacity(grid_n.saturating_sub(1));
    let mut values = Vec::with_capacity(grid_n.saturating_sub(1));
    for i in 1..grid_n {
        let x = i as f64 / grid_n as f64;
        xs.push(x);
        values.push(kernel_cdf(d, x, y)?);
    }
    let mut increasing = Vec::new();
    for i in 0..values.len().saturating_sub(1) {
        if values[i + 1] > values[i] + 1e-12 {
            increasing.push((xs[i], xs[i + 1]));
        }
    }
    Ok(SiProfile {
        y,
        xs,
        values,
        increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::non_si_example;

    #[test]
    fn surface_values() {
        let l = Diagonal::lower_l(0.5).unwrap();
        assert_eq!(surface(&l, 0.25, 0.75), 0.1875); // x·φ(y) = .25·(.5625/.75)
        let u = Diagonal::upper_u(0.5).unwrap();
        assert!((surface(&u, 0.3, 0.2) - 0.12).abs() < 1e-15); // y·φ(x)
        for d in [&l, &u, &Diagonal::independence()] {
            assert_eq!(surface(d, 0.0, 0.5), 0.0);
            assert_eq!(surface(d, 0.4, 1.0), 0.4);
            assert_eq!(surface(d, 1.0, 0.7), 0.7);
            assert_eq!(surface(d, 0.0, 0.0), 0.0);
        }
    }

    #[test]
    fn kernel_values() {
        let l = Diagonal::lower_l(0.5).unwrap();
        // y < x on the ax-branch: w = a, δ = ax ⟹ K = (y/x)a − (y/x²)ax = 0.
        assert_eq!(kernel_cdf(&l, 0.25, 0.1).unwrap(), 0.0);
        // y ≥ x: φ(y) = a for y ≤ a.
        assert_eq!(kernel_cdf(&l, 0.25, 0.4).unwrap(), 0.5);
        let u = Diagonal::upper_u(0.5).unwrap();
        assert!((kernel_cdf(&u, 0.3, 0.4).unwrap() - 0.8).abs() < 1e-15); // y/a
        assert!(kernel_cdf(&u, 0.0, 0.5).is_err());
        assert!(kernel_cdf(&u, 1.0, 0.5).is_err());
        // Total mass: K(x, [0,1]) = 1.
        assert_eq!(kernel_cdf(&u, 0.37, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn conditional_law_pieces() {
        // Independence: K(x,·) is uniform — slope 1, no atom.
        let law = conditional_law(&Diagonal::independence(), 0.4).unwrap();
        assert!((law.cdf_left_slope - 1.0).abs() < 1e-15);
        assert!(law.atom_at_x.abs() < 1e-15);
        // Comonotone: all mass in the atom.
        let law = conditional_law(&Diagonal::comonotone(), 0.4).unwrap();
        assert!(law.cdf_left_slope.abs() < 1e-15);
        assert!((law.atom_at_x - 1.0).abs() < 1e-15);
        // u_{1/2} at x = 1/4: slope w/x − δ/x² = 4 − 2 = 2, atom 0.
        let u = Diagonal::upper_u(0.5).unwrap();
        let law = conditional_law(&u, 0.25).unwrap();
        assert!((law.cdf_left_slope - 2.0).abs() < 1e-15);
        assert!(law.atom_at_x.abs() < 1e-15);
        assert!((law.cdf(0.1) - 0.2).abs() < 1e-15);
        assert!((law.tail_cdf(0.4) - 0.8).abs() < 1e-15);
        assert!(conditional_law(&u, 0.0).is_err());
    }

    #[test]
    fn singular_masses() {
        let cases = [
            (Diagonal::lower_l(0.5).unwrap(), 0.25), // a²
            (Diagonal::upper_u(0.5).unwrap(), 0.5),  // 1 − a
            (Diagonal::independence(), 0.0),
            (Diagonal::comonotone(), 1.0),
        ];
        for (d, want) in cases {
            assert!(
                (singular_mass(&d) - want).abs() < 1e-14,
                "{d:?}: {}",
                singular_mass(&d)
            );
        }
    }

    #[test]
    fn comonotone_samples_on_diagonal() {
        let batch = sample(&Diagonal::comonotone(), 200, 7).unwrap();
        for (u, v) in batch.points {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let d = Diagonal::upper_u(0.5).unwrap();
        let a = sample(&d, 100, 3).unwrap();
        let b = sample(&d, 100, 3).unwrap();
        assert_eq!(a.points, b.points);
        for (u, v) in a.points {
            assert!(u > 0.0 && u < 1.0 && (0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn sampling_rejects_non_members() {
        let d = Diagonal::LowerL { a: 2.0 };
        assert!(matches!(sample(&d, 10, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pqd_and_ltd_hold_for_members() {
        for d in [
            Diagonal::lower_l(0.3).unwrap(),
            Diagonal::upper_u(0.7).unwrap(),
            non_si_example(),
        ] {
            assert!(check_pqd(&d, 64).holds, "{d:?}");
            assert!(check_ltd(&d, 64).holds, "{d:?}");
        }
    }

    #[test]
    fn si_failure_witnessed_for_fixture() {
        // φ is constant on (1/4, 3/8], so K(·,[0,0.36]) is 0 there and jumps
        // to ≈ 0.46 at the knot 3/8: an increasing stretch at y = 0.36.
        let d = non_si_example();
        let profile = si_profile(&d, 0.36, 256).unwrap();
        assert!(
            profile
                .increasing
                .iter()
                .any(|&(a, b)| a < 0.375 && b >= 0.375),
            "{:?}",
            profile.increasing
        );
        // Comonotone and independence are SI: no increasing stretches.
        for d in [Diagonal::comonotone(), Diagonal::independence()] {
            assert!(si_profile(&d, 0.36, 256).unwrap().increasing.is_empty());
        }
    }
}
