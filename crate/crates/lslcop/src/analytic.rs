//! Piecewise term algebra with cancellation-safe integration.
//!
//! Every diagonal family supported by this crate is, on each of finitely many
//! intervals, a finite sum of terms `coef · x^e · ln(x)^k` with `k ∈ {0,1,2}`.
//! Products, derivatives and integrals of such sums stay in the same class,
//! which makes all concordance integrals and the star-product tail integral
//! exact per segment (up to roundoff) instead of quadrature-based.
//!
//! The three antiderivative primitives below are written around `expm1` and
//! log-ratio forms so they stay accurate when the effective exponent
//! `s = e + 1` is at or near zero (e.g. the `∫ c²/x` terms of piecewise-linear
//! segments) and when the interval is short.

/// One monomial-with-logs term `coef · x^exp · ln(x)^log_pow`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub exp: f64,
    pub log_pow: u8,
}

impl Term {
    pub fn new(coef: f64, exp: f64, log_pow: u8) -> Self {
        Term { coef, exp, log_pow }
    }

    /// Evaluate at `x ∈ (0,1]`; at `x = 0` the limit is used for positive
    /// exponents (all functions handled here vanish at the origin).
    fn eval(&self, x: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return if self.exp > 0.0 { 0.0 } else { f64::NAN };
        }
        let mut v = self.coef * x.powf(self.exp);
        if self.log_pow > 0 {
            v *= x.ln().powi(self.log_pow as i32);
        }
        v
    }

    /// ∫_p^q of this term, `0 ≤ p < q`.
    fn integral(&self, p: f64, q: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        let base = match self.log_pow {
            0 => int_pow(p, q, self.exp),
            1 => int_pow_log(p, q, self.exp),
            2 => int_pow_log2(p, q, self.exp),
            k => int_pow_logk(p, q, self.exp, k as u32),
        };
        self.coef * base
    }
}

/// `e^v (v − 1) + 1 = Σ_{k≥2} (k−1) v^k / k!` — the kernel of `∫ x^e ln x`.
fn h_fn(v: f64) -> f64 {
    if v.abs() >= 0.5 {
        return v.exp() * (v - 1.0) + 1.0;
    }
    // Series: coefficients (k−1)/k!, k = 2, 3, …
    let mut sum = 0.0;
    let mut vk = v * v; // v^k
    let mut kfact = 2.0; // k!
    for k in 2..18 {
        sum += (k as f64 - 1.0) / kfact * vk;
        vk *= v;
        kfact *= k as f64 + 1.0;
    }
    sum
}

/// `v² e^v − 2(e^v(v−1)+1) = Σ_{k≥3} (k−1)(k−2) v^k / k!` — kernel of `∫ x^e ln² x`.
fn g_fn(v: f64) -> f64 {
    if v.abs() >= 0.5 {
        return v * v * v.exp() - 2.0 * h_fn(v);
    }
    let mut sum = 0.0;
    let mut vk = v * v * v; // v^k
    let mut kfact = 6.0; // k!
    for k in 3..20 {
        let k = k as f64;
        sum += (k - 1.0) * (k - 2.0) / kfact * vk;
        vk *= v;
        kfact *= k + 1.0;
    }
    sum
}

/// ∫_p^q x^e dx with `0 ≤ p < q`, stable for all `e` including `e = −1`
/// and `e + 1` near zero. For `p = 0` the exponent must satisfy `e + 1 > 0`.
pub fn int_pow(p: f64, q: f64, e: f64) -> f64 {
    let s = e + 1.0;
    if p == 0.0 {
        debug_assert!(s > 0.0, "∫_0 x^e requires e > -1");
        return q.powf(s) / s;
    }
    if s == 0.0 {
        return (q / p).ln();
    }
    // q^s − p^s written as p^s·expm1(s·ln(q/p)) to avoid cancellation.
    let v = s * (q / p).ln();
    p.powf(s) * v.exp_m1() / s
}

/// ∫_p^q x^e ln(x) dx, same conventions as [`int_pow`].
pub fn int_pow_log(p: f64, q: f64, e: f64) -> f64 {
    let s = e + 1.0;
    if p == 0.0 {
        debug_assert!(s > 0.0);
        return q.powf(s) * (s * q.ln() - 1.0) / (s * s);
    }
    if s == 0.0 {
        // ∫ ln x / x = ln²x / 2; difference written cancellation-free.
        let lp = p.ln();
        let lr = (q / p).ln();
        return lr * (lp + 0.5 * lr);
    }
    let u = s * p.ln();
    let v = s * (q / p).ln();
    p.powf(s) * (u * v.exp_m1() + h_fn(v)) / (s * s)
}

/// ∫_p^q x^e ln²(x) dx, same conventions as [`int_pow`].
pub fn int_pow_log2(p: f64, q: f64, e: f64) -> f64 {
    let s = e + 1.0;
    if p == 0.0 {
        debug_assert!(s > 0.0);
        let lq = q.ln();
        return q.powf(s) * ((s * lq - 2.0) * s * lq + 2.0) / (s * s * s);
    }
    if s == 0.0 {
        // ∫ ln²x / x = ln³x / 3.
        let lp = p.ln();
        let lq = q.ln();
        return (lq - lp) * (lq * lq + lq * lp + lp * lp) / 3.0;
    }
    let u = s * p.ln();
    let v = s * (q / p).ln();
    p.powf(s) * (u * u * v.exp_m1() + 2.0 * u * h_fn(v) + g_fn(v)) / (s * s * s)
}

/// ∫_p^q x^e ln^k(x) dx for arbitrary `k ≥ 3` (products of log-bearing terms
/// can raise the log power past 2). Same conventions as [`int_pow`].
///
/// With s = e+1 and the substitution w = s·ln x this is
/// (E_k(s·ln q) − E_k(s·ln p)) / s^{k+1} for the antiderivative
/// E_k(w) = e^w Σ_{j≤k} (−1)^{k−j} (k!/j!) w^j of e^w w^k. Short intervals
/// (|s·ln(q/p)| < 1/2) use a termwise series for the difference instead.
pub fn int_pow_logk(p: f64, q: f64, e: f64, k: u32) -> f64 {
    let s = e + 1.0;
    let e_k = |w: f64| -> f64 {
        // e^w Σ_{j=0..k} (−1)^{k−j} (k!/j!) w^j, Horner from the top
        // coefficient down with the recurrence c_j = −(j+1)·c_{j+1}, c_k = 1.
        let mut coef = 1.0;
        let mut acc = coef;
        for j in (0..k).rev() {
            coef *= -((j + 1) as f64);
            acc = acc * w + coef;
        }
        w.exp() * acc
    };
    if p == 0.0 {
        debug_assert!(s > 0.0);
        return e_k(s * q.ln()) / s.powi(k as i32 + 1);
    }
    if s == 0.0 {
        let (lp, lq) = (p.ln(), q.ln());
        return (lq.powi(k as i32 + 1) - lp.powi(k as i32 + 1)) / (k as f64 + 1.0);
    }
    let u = s * p.ln();
    let v = s * (q / p).ln();
    if v.abs() >= 0.5 {
        return (e_k(u + v) - e_k(u)) / s.powi(k as i32 + 1);
    }
    // ∫_u^{u+v} e^w w^k dw = e^u Σ_j C(k,j) u^{k−j} I_j(v),
    // I_j(v) = ∫_0^v e^t t^j dt = Σ_{i≥0} v^{i+j+1} / (i!·(i+j+1)).
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        let mut ij = 0.0;
        let mut vt = v.powi(j as i32 + 1);
        let mut ifact = 1.0;
        for i in 0..24u32 {
            ij += vt / (ifact * (i + j + 1) as f64);
            vt *= v;
            ifact *= (i + 1) as f64;
        }
        total += binom * u.powi((k - j) as i32) * ij;
        binom *= (k - j) as f64 / (j + 1) as f64;
    }
    p.powf(s) * total / s.powi(k as i32 + 1)
}

/// A function on [0,1] given piecewise as term sums. `cuts` has one more
/// entry than `pieces`, starts at 0 and ends at 1.
#[derive(Clone, Debug)]
pub struct PiecewiseFn {
    cuts: Vec<f64>,
    pieces: Vec<Vec<Term>>,
}

impl PiecewiseFn {
    pub fn new(cuts: Vec<f64>, pieces: Vec<Vec<Term>>) -> Self {
        debug_assert!(cuts.len() == pieces.len() + 1);
        debug_assert!(cuts.first() == Some(&0.0) && cuts.last() == Some(&1.0));
        debug_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        PiecewiseFn { cuts, pieces }
    }

    /// Single piece covering all of [0,1].
    pub fn whole(terms: Vec<Term>) -> Self {
        PiecewiseFn::new(vec![0.0, 1.0], vec![terms])
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    fn piece_index(&self, x: f64) -> usize {
        // Piece i covers (cuts[i], cuts[i+1]].
        debug_assert!(x > 0.0 && x <= 1.0);
        self.cuts.partition_point(|c| *c < x) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let i = self.piece_index(x);
        self.pieces[i].iter().map(|t| t.eval(x)).sum()
    }

    /// Termwise derivative (valid in the interior of each piece).
    pub fn derivative(&self) -> PiecewiseFn {
        let pieces = self
            .pieces
            .iter()
            .map(|terms| {
                let mut out = Vec::new();
                for t in terms {
                    if t.coef == 0.0 {
                        continue;
                    }
                    if t.exp != 0.0 {
                        push_term(&mut out, Term::new(t.coef * t.exp, t.exp - 1.0, t.log_pow));
                    }
                    if t.log_pow > 0 {
                        push_term(
                            &mut out,
                            Term::new(t.coef * t.log_pow as f64, t.exp - 1.0, t.log_pow - 1),
                        );
                    }
                }
                out
            })
            .collect();
        PiecewiseFn::new(self.cuts.clone(), pieces)
    }

    /// Multiply by x^d (shift all exponents).
    pub fn shift_exp(&self, d: f64) -> PiecewiseFn {
        let pieces = self
            .pieces
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| Term::new(t.coef, t.exp + d, t.log_pow))
                    .collect()
            })
            .collect();
        PiecewiseFn::new(self.cuts.clone(), pieces)
    }

    /// Scale by a constant.
    pub fn scale(&self, c: f64) -> PiecewiseFn {
        let pieces = self
            .pieces
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| Term::new(t.coef * c, t.exp, t.log_pow))
                    .collect()
            })
            .collect();
        PiecewiseFn::new(self.cuts.clone(), pieces)
    }

    /// Pointwise sum on the merged partition.
    pub fn add(&self, other: &PiecewiseFn) -> PiecewiseFn {
        self.combine(other, |a, b| {
            let mut out = Vec::new();
            for t in a.iter().chain(b.iter()) {
                push_term(&mut out, *t);
            }
            out
        })
    }

    /// Pointwise product on the merged partition.
    pub fn mul(&self, other: &PiecewiseFn) -> PiecewiseFn {
        self.combine(other, |a, b| {
            let mut out = Vec::new();
            for s in a {
                for t in b {
                    let c = s.coef * t.coef;
                    if c != 0.0 {
                        push_term(&mut out, Term::new(c, s.exp + t.exp, s.log_pow + t.log_pow));
                    }
                }
            }
            out
        })
    }

    fn combine(
        &self,
        other: &PiecewiseFn,
        f: impl Fn(&[Term], &[Term]) -> Vec<Term>,
    ) -> PiecewiseFn {
        let cuts = merge_cuts(&self.cuts, &other.cuts);
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let a = &self.pieces[self.piece_index(mid)];
            let b = &other.pieces[other.piece_index(mid)];
            pieces.push(f(a, b));
        }
        PiecewiseFn::new(cuts, pieces)
    }

    /// ∫_lo^hi over any subinterval of [0,1].
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0);
        if lo == hi {
            return 0.0;
        }
        let mut acc = 0.0;
        for (i, terms) in self.pieces.iter().enumerate() {
            let a = self.cuts[i].max(lo);
            let b = self.cuts[i + 1].min(hi);
            if a < b {
                for t in terms {
                    acc += t.integral(a, b);
                }
            }
        }
        acc
    }

    /// `suffix[i] = ∫_{cuts[i]}^1`; one more entry than pieces (last is 0).
    ///
    /// A first piece starting at 0 may carry terms with exponent ≤ −1 (e.g.
    /// products of φ′ factors), whose improper integral from 0 diverges; its
    /// suffix entry is then +∞. Every ∫_x^1 with x > 0 stays finite because
    /// [`Self::integral_from`] only integrates the containing piece from x.
    pub fn suffix_integrals(&self) -> Vec<f64> {
        let n = self.pieces.len();
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let divergent = self.cuts[i] == 0.0
                && self.pieces[i].iter().any(|t| t.coef != 0.0 && t.exp <= -1.0);
            let piece: f64 = if divergent {
                f64::INFINITY
            } else {
                self.pieces[i]
                    .iter()
                    .map(|t| t.integral(self.cuts[i], self.cuts[i + 1]))
                    .sum()
            };
            suffix[i] = suffix[i + 1] + piece;
        }
        suffix
    }

    /// ∫_x^1 using precomputed suffix integrals.
    pub fn integral_from(&self, x: f64, suffix: &[f64]) -> f64 {
        if x >= 1.0 {
            return 0.0;
        }
        if x <= 0.0 {
            return suffix[0];
        }
        let i = self.piece_index(x);
        let head: f64 = self.pieces[i]
            .iter()
            .map(|t| t.integral(x, self.cuts[i + 1]))
            .sum();
        head + suffix[i + 1]
    }
}

fn push_term(out: &mut Vec<Term>, t: Term) {
    if t.coef == 0.0 {
        return;
    }
    for u in out.iter_mut() {
        if u.exp == t.exp && u.log_pow == t.log_pow {
            u.coef += t.coef;
            return;
        }
    }
    out.push(t);
}

fn merge_cuts(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => {
                if x <= y {
                    i += 1;
                    if x == y {
                        j += 1;
                    }
                    *x
                } else {
                    j += 1;
                    *y
                }
            }
            (Some(x), None) => {
                i += 1;
                *x
            }
            (None, Some(y)) => {
                j += 1;
                *y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}
