//! Exact rational-arithmetic polynomial tools.
//!
//! Everything here operates on `QPoly`, a dense univariate polynomial over Q
//! (coefficients converted exactly from `f64`). The main entry point is
//! [`find_negative_point`], a complete decision procedure for
//! "p(y) ≥ 0 for all y" on the real line or the half-line [0, ∞):
//! it either certifies nonnegativity or produces an exact rational witness
//! where p is negative. Sign changes of a real polynomial happen exactly at
//! its odd-multiplicity real roots, so the procedure combines a squarefree
//! decomposition (Yun) with Sturm root counting and bisection refinement.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::ToPrimitive;

/// Dense univariate polynomial over Q; `coeffs[i]` multiplies y^i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly::new(vec![])
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::new(vec![c])
    }

    /// Exact conversion; every finite f64 is a rational.
    pub fn from_f64_coeffs(coeffs: &[f64]) -> Option<Self> {
        let mut v = Vec::with_capacity(coeffs.len());
        for &c in coeffs {
            v.push(BigRational::from_float(c)?);
        }
        Some(QPoly::new(v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("QPoly is never empty")
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat(i as i64))
            .collect();
        QPoly::new(v)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        QPoly::new(v)
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        QPoly::new(v)
    }

    pub fn neg(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut v = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        QPoly::new(v)
    }

    /// p(y) -> p(-y): flips the sign of odd coefficients.
    pub fn reflect(&self) -> QPoly {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
            .collect();
        QPoly::new(v)
    }

    /// Exact euclidean division: self = q*d + r with deg r < deg d.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (QPoly::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); self.degree() - dd + 1];
        let lead = d.leading().clone();
        for k in (dd..rem.len()).rev() {
            let factor = &rem[k] / &lead;
            if factor.is_zero() {
                continue;
            }
            q[k - dd] = factor.clone();
            for j in 0..=dd {
                let t = &factor * &d.coeffs[j];
                rem[k - dd + j] -= t;
            }
        }
        rem.truncate(dd.max(1));
        (QPoly::new(q), QPoly::new(rem))
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading().clone();
        QPoly::new(self.coeffs.iter().map(|c| c / &l).collect())
    }

    /// Monic gcd by the euclidean algorithm.
    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    /// Yun's squarefree decomposition: p = c * prod f_i^i with the f_i
    /// squarefree, pairwise coprime, returned as (f_i, i) for deg f_i > 0.
    pub fn squarefree_decomposition(&self) -> Vec<(QPoly, u32)> {
        let mut out = Vec::new();
        if self.is_zero() || self.degree() == 0 {
            return out;
        }
        let dp = self.derivative();
        let a = QPoly::gcd(self, &dp);
        let mut b = self.div_rem(&a).0;
        let mut c = dp.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1u32;
        while b.degree() > 0 {
            let f = QPoly::gcd(&b, &d);
            if f.degree() > 0 {
                out.push((f.clone(), i));
            }
            b = b.div_rem(&f).0;
            c = d.div_rem(&f).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Cauchy bound: all real roots lie in (-B, B).
    pub fn cauchy_root_bound(&self) -> BigRational {
        let lead = self.leading();
        let mut m = BigRational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = (c / lead).abs();
            if r > m {
                m = r;
            }
        }
        m + BigRational::one()
    }
}

fn sign(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Scale so the leading coefficient has magnitude 1 WITHOUT flipping its
/// sign (a monic normalization would corrupt the sign variations).
fn normalize_positive(p: &QPoly) -> QPoly {
    if p.is_zero() {
        return p.clone();
    }
    let l = p.leading().abs();
    QPoly::new(p.coeffs.iter().map(|c| c / &l).collect())
}

/// Sturm chain p, p', -rem(...), ...
fn sturm_chain(p: &QPoly) -> Vec<QPoly> {
    let mut chain = vec![normalize_positive(p)];
    let dp = p.derivative();
    if dp.is_zero() {
        return chain;
    }
    chain.push(normalize_positive(&dp));
    loop {
        let n = chain.len();
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(normalize_positive(&r.neg()));
    }
    chain
}

fn variations_at(chain: &[QPoly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last = 0;
    for p in chain {
        let s = sign(&p.eval(x));
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots in (a, b]; requires p(a) != 0.
fn count_roots_in(chain: &[QPoly], a: &BigRational, b: &BigRational) -> usize {
    let va = variations_at(chain, a);
    let vb = variations_at(chain, b);
    va.saturating_sub(vb)
}

/// Shrink (lo, hi] until it contains exactly one root of the chain's polynomial.
/// Precondition: count in (lo, hi] >= 1.
fn isolate_one_root(
    chain: &[QPoly],
    mut lo: BigRational,
    mut hi: BigRational,
) -> (BigRational, BigRational) {
    loop {
        if count_roots_in(chain, &lo, &hi) == 1 {
            return (lo, hi);
        }
        let mid = (&lo + &hi) / rat(2);
        if count_roots_in(chain, &lo, &mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Given an interval (lo, hi] containing exactly one sign-change root r of p,
/// return an exact rational point where p < 0.
///
/// The interval is first refined until r is the only distinct root of p
/// inside and lo is not a root. Then either an endpoint is already negative,
/// or r coincides with hi (a rational root hit by bisection) and the witness
/// lies just beyond hi, found by a shrinking right probe.
fn negative_endpoint(
    p: &QPoly,
    odd_chain: &[QPoly],
    mut lo: BigRational,
    mut hi: BigRational,
) -> BigRational {
    let sq = {
        let g = QPoly::gcd(p, &p.derivative());
        p.div_rem(&g).0.monic()
    };
    let sq_chain = sturm_chain(&sq);
    let fractions = [(1i64, 2i64), (1, 3), (2, 3), (2, 5), (3, 5), (3, 7), (4, 7), (5, 11)];
    // refine: keep the one odd root, expel every other distinct root of p,
    // and make sure lo itself is not a root
    while count_roots_in(&sq_chain, &lo, &hi) > 1 || sign(&p.eval(&lo)) == 0 {
        let width = &hi - &lo;
        let mut mid = None;
        for (num, den) in fractions {
            let cand = &lo + &width * BigRational::new(BigInt::from(num), BigInt::from(den));
            if sign(&p.eval(&cand)) != 0 {
                mid = Some(cand);
                break;
            }
        }
        let mid = mid.unwrap_or_else(|| &lo + &width / rat(17));
        if count_roots_in(odd_chain, &lo, &mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if sign(&p.eval(&lo)) < 0 {
        return lo;
    }
    let s_hi = sign(&p.eval(&hi));
    if s_hi < 0 {
        return hi;
    }
    // p(lo) > 0 and p(hi) = 0: the root r IS hi, and the sign flips across
    // it, so p < 0 just to the right. Probe with shrinking offsets until the
    // probe interval is free of further roots.
    debug_assert_eq!(s_hi, 0, "sign must flip across the single odd root");
    let mut w = &hi - &lo;
    loop {
        let x = &hi + &w;
        if sign(&p.eval(&x)) != 0 && count_roots_in(&sq_chain, &hi, &x) == 0 {
            debug_assert!(sign(&p.eval(&x)) < 0);
            return x;
        }
        w /= rat(2);
    }
}

/// Domain on which nonnegativity is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// all real y
    Line,
    /// y in [0, +inf)
    HalfLine,
}

/// Product of the odd-multiplicity squarefree factors (the sign-change locus).
fn odd_multiplicity_part(p: &QPoly) -> QPoly {
    let mut odd = QPoly::constant(BigRational::one());
    for (f, m) in p.squarefree_decomposition() {
        if m % 2 == 1 {
            odd = odd.mul(&f);
        }
    }
    odd
}

/// Decide `p(y) >= 0` for all y in `dom`. Returns `None` when the inequality
/// holds, otherwise `Some(w)` with an exact rational witness `p(w) < 0`.
pub fn find_negative_point(p: &QPoly, dom: Domain) -> Option<BigRational> {
    match dom {
        Domain::Line => negative_point_on_line(p),
        Domain::HalfLine => negative_point_on_half_line(p),
    }
}

fn negative_point_on_line(p: &QPoly) -> Option<BigRational> {
    if p.is_zero() {
        return None;
    }
    if p.degree() == 0 {
        return if sign(p.leading()) < 0 { Some(BigRational::zero()) } else { None };
    }
    let bound = p.cauchy_root_bound() + BigRational::one();
    if sign(p.leading()) < 0 {
        // beyond the root bound the sign equals the sign of the leading term
        return Some(bound);
    }
    if p.degree() % 2 == 1 {
        return Some(-bound);
    }
    let odd = odd_multiplicity_part(p);
    if odd.degree() == 0 {
        // no sign changes anywhere and p -> +inf
        return None;
    }
    let chain = sturm_chain(&odd);
    let (lo, hi) = (-bound.clone(), bound.clone());
    if count_roots_in(&chain, &lo, &hi) == 0 {
        return None;
    }
    let (ilo, ihi) = isolate_one_root(&chain, lo, hi);
    Some(negative_endpoint(p, &chain, ilo, ihi))
}

fn negative_point_on_half_line(p: &QPoly) -> Option<BigRational> {
    if p.is_zero() {
        return None;
    }
    let at0 = p.eval(&BigRational::zero());
    if sign(&at0) < 0 {
        return Some(BigRational::zero());
    }
    // strip the root at zero: p = y^m * r with r(0) != 0
    let m = p.coeffs.iter().take_while(|c| c.is_zero()).count();
    let r = QPoly::new(p.coeffs[m..].to_vec());
    if r.degree() == 0 {
        return if sign(r.leading()) < 0 { Some(BigRational::one()) } else { None };
    }
    if sign(&r.eval(&BigRational::zero())) < 0 {
        // negative just right of the origin; halve until the exact sign shows
        let mut eps = BigRational::one();
        loop {
            if sign(&p.eval(&eps)) < 0 {
                return Some(eps);
            }
            eps /= rat(2);
        }
    }
    let bound = r.cauchy_root_bound() + BigRational::one();
    if sign(r.leading()) < 0 {
        return Some(bound);
    }
    let odd = odd_multiplicity_part(&r);
    if odd.degree() == 0 {
        return None;
    }
    let chain = sturm_chain(&odd);
    let lo = BigRational::zero();
    if count_roots_in(&chain, &lo, &bound) == 0 {
        return None;
    }
    // r(0) > 0 and a sign change exists in (0, bound): some point is negative
    let (ilo, ihi) = isolate_one_root(&chain, lo, bound);
    let w = negative_endpoint(&r, &chain, ilo, ihi);
    // sign p(w) = sign r(w) for w > 0; the refinement can only return w > 0
    // here because r(0) > 0.
    Some(w)
}

/// Convenience wrapper returning the witness as f64.
pub fn verify_nonnegative(p: &QPoly, dom: Domain) -> Result<(), f64> {
    match find_negative_point(p, dom) {
        None => Ok(()),
        Some(w) => Err(w.to_f64().unwrap_or(f64::NAN)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[f64]) -> QPoly {
        QPoly::from_f64_coeffs(coeffs).unwrap()
    }

    #[test]
    fn eval_and_derivative() {
        // p = 1 + 2y + 3y^2
        let p = poly(&[1.0, 2.0, 3.0]);
        assert_eq!(p.eval(&rat(2)), rat(17));
        let dp = p.derivative();
        assert_eq!(dp.eval(&rat(2)), rat(14));
    }

    #[test]
    fn div_rem_exact() {
        let a = poly(&[-1.0, 0.0, 0.0, 1.0]); // y^3 - 1
        let b = poly(&[-1.0, 1.0]); // y - 1
        let (q, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(q, poly(&[1.0, 1.0, 1.0]));
    }

    #[test]
    fn squarefree_decomposition_splits_multiplicities() {
        // (y-1)^2 (y+2) = y^3 - 3y + 2
        let p = poly(&[2.0, -3.0, 0.0, 1.0]);
        let dec = p.squarefree_decomposition();
        assert_eq!(dec.len(), 2);
        let mult1: Vec<_> = dec.iter().filter(|(_, m)| *m == 1).collect();
        let mult2: Vec<_> = dec.iter().filter(|(_, m)| *m == 2).collect();
        assert_eq!(mult1.len(), 1);
        assert_eq!(mult2.len(), 1);
        assert_eq!(mult1[0].0.eval(&rat(-2)), rat(0));
        assert_eq!(mult2[0].0.eval(&rat(1)), rat(0));
    }

    #[test]
    fn sturm_counts_roots() {
        // (y^2 - 4)(y^2 - 1) has roots -2, -1, 1, 2
        let p = poly(&[4.0, 0.0, -5.0, 0.0, 1.0]);
        let chain = sturm_chain(&p);
        assert_eq!(count_roots_in(&chain, &rat(-3), &rat(3)), 4);
        assert_eq!(count_roots_in(&chain, &rat(0), &rat(3)), 2);
        assert_eq!(count_roots_in(&chain, &rat(0), &rat(1)), 1);
    }

    #[test]
    fn sturm_chain_sign_preserved_under_normalization() {
        // 4y^4 - 3y^2 + 1 has no real roots; its Sturm chain contains
        // negative-leading remainders, which once (wrongly) monic-normalized
        // miscounted roots and hung isolation
        let p = poly(&[1.0, 0.0, -3.0, 0.0, 4.0]);
        let chain = sturm_chain(&p);
        assert_eq!(count_roots_in(&chain, &rat(-100), &rat(100)), 0);
        assert!(find_negative_point(&p, Domain::Line).is_none());
        // same coefficients with the constant lowered: two pairs of roots
        let p2 = poly(&[0.1, 0.0, -3.0, 0.0, 4.0]);
        let chain2 = sturm_chain(&p2);
        assert_eq!(count_roots_in(&chain2, &rat(-100), &rat(100)), 4);
        let w = find_negative_point(&p2, Domain::Line).unwrap();
        assert!(sign(&p2.eval(&w)) < 0);
    }

    #[test]
    fn nonnegative_square_is_accepted() {
        // (y^2 - 2)^2 >= 0 with an irrational double root
        let p = poly(&[4.0, 0.0, -4.0, 0.0, 1.0]);
        assert!(find_negative_point(&p, Domain::Line).is_none());
    }

    #[test]
    fn sign_change_is_witnessed() {
        // y^2 - 2 dips negative on (-sqrt2, sqrt2)
        let p = poly(&[-2.0, 0.0, 1.0]);
        let w = find_negative_point(&p, Domain::Line).unwrap();
        assert!(sign(&p.eval(&w)) < 0);
    }

    #[test]
    fn odd_multiplicity_inside_positive_polynomial() {
        // (y-1)^3 (y-3)^2 + 0: changes sign at 1 only
        let f = poly(&[-1.0, 1.0]);
        let c = f.mul(&f).mul(&f);
        let g = poly(&[-3.0, 1.0]);
        let p = c.mul(&g.mul(&g));
        let w = find_negative_point(&p, Domain::Line).unwrap();
        assert!(sign(&p.eval(&w)) < 0);
        // on the half line it is also negative (witness below y=1)
        let w2 = find_negative_point(&p, Domain::HalfLine).unwrap();
        assert!(sign(&p.eval(&w2)) < 0);
        assert!(!w2.is_negative());
    }

    #[test]
    fn half_line_ignores_negative_axis() {
        // y^3 + y: negative for y < 0 but fine on [0, inf)
        let p = poly(&[0.0, 1.0, 0.0, 1.0]);
        assert!(find_negative_point(&p, Domain::HalfLine).is_none());
        assert!(find_negative_point(&p, Domain::Line).is_some());
    }

    #[test]
    fn half_line_root_at_zero() {
        // y^2 (y - 1): negative on (0, 1)
        let p = poly(&[0.0, 0.0, -1.0, 1.0]);
        let w = find_negative_point(&p, Domain::HalfLine).unwrap();
        assert!(sign(&p.eval(&w)) < 0);
        assert!(w.is_positive());
        // y^2 (y + 1) is nonnegative on the half line
        let p2 = poly(&[0.0, 0.0, 1.0, 1.0]);
        assert!(find_negative_point(&p2, Domain::HalfLine).is_none());
    }

    #[test]
    fn zero_and_constants() {
        assert!(find_negative_point(&QPoly::zero(), Domain::Line).is_none());
        assert!(find_negative_point(&poly(&[5.0]), Domain::Line).is_none());
        assert!(find_negative_point(&poly(&[-5.0]), Domain::Line).is_some());
    }
}
