//! Independent brute-force reference computations.
//!
//! Everything here deliberately avoids the exact term-algebra pipeline: the
//! quadratures see only pointwise `surface` / `kernel_cdf` values, the
//! checkerboard sees only surface rectangle sums, and the sample statistics
//! see only the points. The midpoint rule is used throughout — integrands
//! are bounded and piecewise smooth, and midpoints avoid conditioning at
//! x ∈ {0, 1} where the kernel is undefined.
//!
//! One accuracy caveat is inherent to kernels with a diagonal atom: the τ
//! integrand K(x,[0,y])·K(y,[0,x]) evaluated exactly on the diagonal picks
//! up the atom (K(x,[0,x]) = δ(x)/x jumps above both of its one-sided
//! limits), so the diagonal run of cells contributes a first-order bias of
//! (6·∫(δ/x)² − 2)/n on top of the usual O(1/n²) midpoint error. The bias
//! coefficient vanishes only for the independence diagonal; tests account
//! for it instead of pretending second-order convergence.

use crate::diagonal::Diagonal;
use crate::error::{Error, Result};
use crate::lsl::{kernel_cdf, surface};

/// Midpoint-rule Spearman ρ: 12·∬ S_δ − 3 over an n×n cell grid.
pub fn rho_quadrature(d: &Diagonal, n: usize) -> f64 {
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.5) / nf;
        for j in 0..n {
            let y = (j as f64 + 0.5) / nf;
            acc += surface(d, x, y);
        }
    }
    12.0 * acc / (nf * nf) - 3.0
}

/// Midpoint-rule Kendall τ: 1 − 4·∬ K(x,[0,y])·K(y,[0,x]).
///
/// Two measure-zero sets would otherwise poison the midpoint rule at first
/// order:
///
/// * the diagonal y = x, where the integrand is continuous (both one-sided
///   limits equal (w_δ − φ)·φ) but the cdf evaluated exactly there picks up
///   the conditional atom and returns φ² — a spike contributing a spurious
///   (6∫φ² − 2)/n if sampled, so diagonal nodes use the a.e.-continuous
///   representative instead;
/// * the grid lines x = c and y = c through break points c of δ, across
///   which w_δ jumps — the uniform grid is refined so cell edges land on
///   them and no cell straddles a jump.
///
/// Both adjustments only re-express the same integral; with them the rule
/// converges at its usual second order on the whole class.
pub fn tau_quadrature(d: &Diagonal, n: usize) -> f64 {
    let edges = refined_edges(d, n);
    let cells: Vec<(f64, f64)> = edges
        .windows(2)
        .map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0]))
        .collect();
    let mut acc = 0.0;
    for (i, &(x, wx)) in cells.iter().enumerate() {
        for (j, &(y, wy)) in cells.iter().enumerate() {
            let g = if i == j {
                let phi = d.phi(x).expect("midpoint is interior");
                let w = d.w_delta(x).expect("midpoint is interior");
                (w - phi) * phi
            } else {
                kernel_cdf(d, x, y).expect("midpoint is interior")
                    * kernel_cdf(d, y, x).expect("midpoint is interior")
            };
            acc += wx * wy * g;
        }
    }
    1.0 - 4.0 * acc
}

/// Uniform n-grid edges refined by the interior break points of δ.
fn refined_edges(d: &Diagonal, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut edges: Vec<f64> = (0..=n).map(|i| i as f64 / nf).collect();
    edges.extend(
        d.cut_points()
            .into_iter()
            .filter(|&c| c > 0.0 && c < 1.0),
    );
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

/// Kernel-composition star product at one point:
/// (S_{δ1} ∗ S_{δ2})(x, y) = ∫ K_{δ1}(s,[0,x])·K_{δ2}(s,[0,y]) ds by the
/// midpoint rule (the copulas are symmetric, so transposed kernels coincide).
pub fn star_kernel_quadrature(d1: &Diagonal, d2: &Diagonal, x: f64, y: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let s = (i as f64 + 0.5) / nf;
        acc += kernel_cdf(d1, s, x).expect("midpoint is interior")
            * kernel_cdf(d2, s, y).expect("midpoint is interior");
    }
    acc / nf
}

/// n×n cell masses of the copula, row-major: mass[i·n + j] is the μ-mass of
/// ((i/n,(i+1)/n] × (j/n,(j+1)/n]) with the first index on the x axis.
#[derive(Clone, Debug)]
pub struct Checkerboard {
    pub n: usize,
    pub mass: Vec<f64>,
}

/// Discretize by surface rectangle sums (exact cell masses, not a fit).
pub fn checkerboard(d: &Diagonal, n: usize) -> Checkerboard {
    let nf = n as f64;
    // Corner values S(i/n, j/n); rectangle mass by inclusion–exclusion.
    let corners: Vec<f64> = (0..=n)
        .flat_map(|i| {
            let x = i as f64 / nf;
            (0..=n).map(move |j| (x, j as f64 / nf))
        })
        .map(|(x, y)| surface(d, x, y))
        .collect();
    let c = |i: usize, j: usize| corners[i * (n + 1) + j];
    let mut mass = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            mass.push(c(i + 1, j + 1) - c(i, j + 1) - c(i + 1, j) + c(i, j));
        }
    }
    Checkerboard { n, mass }
}

impl Checkerboard {
    pub fn mass_at(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.n + j]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.mass_at(i, j)).sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.mass_at(i, j)).sum()
    }

    /// Values of the induced copula at the diagonal grid corners (k/n, k/n),
    /// k = 0..=n: cumulative mass of the lower-left k×k block.
    pub fn induced_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        // Running prefix of full rows plus the growing square's new band.
        let mut total = 0.0;
        for k in 1..=n {
            // Add the L-shaped band completing the k×k square.
            for t in 0..k {
                total += self.mass_at(k - 1, t) + self.mass_at(t, k - 1);
            }
            total -= self.mass_at(k - 1, k - 1); // counted twice
            out.push(total);
        }
        out
    }
}

/// Markov composition of two checkerboards of equal resolution:
/// mass(A ∗ B) = n · (mass A)·(mass B) as matrices, which stays doubly
/// stochastic after the same 1/n scaling.
pub fn checkerboard_compose(a: &Checkerboard, b: &Checkerboard) -> Result<Checkerboard> {
    if a.n != b.n {
        return Err(Error::ResolutionMismatch(a.n, b.n));
    }
    let n = a.n;
    let nf = n as f64;
    let mut mass = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a.mass_at(i, k);
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                mass[i * n + j] += aik * b.mass_at(k, j);
            }
        }
    }
    for m in &mut mass {
        *m *= nf;
    }
    Ok(Checkerboard { n, mass })
}

/// Kendall τ of a sample by inversion counting: sort by the first coordinate
/// and merge-count inversions of the second; τ̂ = 1 − 4·inv/(n(n−1)).
/// Assumes no ties (almost sure for continuous draws).
pub fn empirical_tau(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut vs: Vec<f64> = sorted.into_iter().map(|p| p.1).collect();
    let mut buf = vs.clone();
    let inv = count_inversions(&mut vs, &mut buf);
    1.0 - 4.0 * inv as f64 / (n as f64 * (n as f64 - 1.0))
}

fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = v.split_at_mut(mid);
    let mut inv = count_inversions(left, &mut buf[..mid]) + count_inversions(right, &mut buf[mid..]);
    let (mut i, mut j) = (0, 0);
    for slot in buf[..n].iter_mut() {
        if i < left.len() && (j >= right.len() || left[i] <= right[j]) {
            *slot = left[i];
            i += 1;
        } else {
            if i < left.len() {
                inv += (left.len() - i) as u64;
            }
            *slot = right[j];
            j += 1;
        }
    }
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Kolmogorov–Smirnov distance of a sample to the uniform law on [0,1].
pub fn ks_uniform(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        d = d.max(x - i as f64 / nf);
        d = d.max((i as f64 + 1.0) / nf - x);
    }
    d
}
