//! Bivariate lower semilinear copulas built from their diagonal sections.
//!
//! A lower semilinear copula is determined by its diagonal δ through
//!
//! ```text
//! S_δ(x, y) = min(x, y) · δ(max(x, y)) / max(x, y)        (0/0 := 0)
//! ```
//!
//! i.e. the surface is linear on the segments joining the axes to the
//! diagonal. A diagonal δ produces a copula this way exactly when, besides
//! the usual diagonal properties (δ(1) = 1, non-decreasing, 2-Lipschitz,
//! δ ≤ id), the ratio φ(x) = δ(x)/x is non-decreasing and η(x) = δ(x)/x² is
//! non-increasing. This crate models that class and the structure it
//! carries:
//!
//! * [`diagonal`] — piecewise-linear and parametric diagonals (`l_a`, `u_a`,
//!   power, Marshall–Olkin star diagonals, convex mixtures) with exact
//!   piecewise `x^s·lnᵏx` expansions used by the closed-form integrals;
//! * [`validate`] — membership checking, exact big-rational arithmetic for
//!   piecewise-linear input;
//! * [`lsl`] — the copula surface, its Markov kernel x ↦ K(x, [0, y]),
//!   conditional sampling, the singular mass along y = x, and dependence
//!   diagnostics (PQD, LTD, stochastic-increasingness profiles);
//! * [`star`] — the Markov (kernel-composition) product restricted to the
//!   class, exact products via the term algebra, projection back onto
//!   piecewise-linear members, iteration to idempotent limits (`u_a`);
//! * [`concordance`] — closed-form Kendall τ, Spearman ρ, Gini γ, Spearman
//!   footrule and Blomqvist β, the τ ≤ ρ ordering, (τ, ρ)-region scans, and
//!   a midpoint construction hitting prescribed (τ, ρ) targets;
//! * [`oracle`] — independent brute-force checks: quadrature τ/ρ, a
//!   kernel-composition star product, checkerboard discretizations, sample
//!   statistics;
//! * [`jsonio`] — deterministic JSON/CSV interchange used by the CLI.
//!
//! The naming convention follows the construction: `l_a(x) = max(ax, x²)`
//! and `u_a(x) = x²/a` for x ≤ a, `x` after, are the extreme members through
//! a given diagonal point; `power p` interpolates between the comonotone
//! diagonal (p = 1) and independence (p = 2).

pub mod analytic;
pub mod concordance;
pub mod diagonal;
pub mod error;
pub mod jsonio;
pub mod lsl;
pub mod oracle;
pub mod project;
pub mod star;
pub mod validate;

pub use concordance::{
    blomqvist, conjectured_rho_upper, footrule, gamma, midpoint_construct, region_scan, report,
    rho, tau, tau_convexity_gap, ConcordanceReport, FamilySelector, RegionPoint,
};
pub use diagonal::{make_pwl, mix, non_si_example, Diagonal, PwlDiagonal};
pub use error::{Error, Result};
pub use lsl::{
    check_ltd, check_pqd, conditional_law, kernel_cdf, sample, si_profile, singular_mass,
    surface, ConditionalLaw, LtdReport, PqdReport, SampleBatch, SiProfile,
};
pub use project::{random_dlsl, to_pwl};
pub use star::{
    is_idempotent, iterate_star, star, star_exact, star_surface, IterationTrace, StarExact,
    StarResult,
};
pub use validate::{default_tol, validate_dlsl, Condition, ValidationReport, Violation};
