//! Polynomial representation spaces for `SL2(Z)` and the matrix-side
//! plumbing: degree-bounded polynomials in one and two variables, the
//! symmetric-power action `sym^d`, the invariant pairing `<.,.>` and the
//! antisymmetric form `<<.,.>>`, the contraction `C[X,Y]_d -> C`,
//! generator-word decomposition, and coset enumeration.
//!
//! Conventions. `S = [[0,-1],[1,0]]`, `T = [[1,1],[0,1]]`, `U = T S`.
//! The action is `sym^d(g) p = (-c X + a)^d p((d X - b) / (-c X + a))`
//! for `g = [[a,b],[c,d]]`, so `sym^d(T) p = p(X - 1)` and
//! `sym^d(S) p = (-X)^d p(-1/X)`.

use crate::num::{binomial, binomial_f, MpComplex};
use crate::{Error, Result};
use rug::{Assign, Complete, Float, Integer};

/// Polynomial of degree at most `d` with complex coefficients;
/// `coeffs[i]` is the coefficient of `X^i` and `coeffs.len() == d + 1`.
#[derive(Clone, Debug)]
pub struct PolyC {
    pub coeffs: Vec<MpComplex>,
}

impl PolyC {
    pub fn zero(prec: u32, degree_bound: usize) -> Self {
        PolyC { coeffs: vec![MpComplex::new(prec); degree_bound + 1] }
    }

    pub fn from_coeffs(coeffs: Vec<MpComplex>) -> Self {
        assert!(!coeffs.is_empty());
        PolyC { coeffs }
    }

    /// `X^i` inside the degree-`d` space.
    pub fn monomial(prec: u32, degree_bound: usize, i: usize) -> Self {
        assert!(i <= degree_bound);
        let mut p = Self::zero(prec, degree_bound);
        p.coeffs[i] = MpComplex::one(prec);
        p
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0].prec()
    }

    pub fn add(&self, other: &PolyC) -> PolyC {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        PolyC {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &PolyC) -> PolyC {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        PolyC {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, z: &MpComplex) -> PolyC {
        PolyC { coeffs: self.coeffs.iter().map(|a| a * z).collect() }
    }

    pub fn neg(&self) -> PolyC {
        PolyC { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn conj(&self) -> PolyC {
        PolyC { coeffs: self.coeffs.iter().map(|a| a.conj()).collect() }
    }

    pub fn eval(&self, x: &MpComplex) -> MpComplex {
        let mut acc = MpComplex::new(self.prec().max(x.prec()));
        for c in self.coeffs.iter().rev() {
            acc = &acc * x;
            acc += c;
        }
        acc
    }

    /// `p(X + a)` within the same degree bound (Taylor shift).
    pub fn shift(&self, a: &MpComplex) -> PolyC {
        let d = self.degree_bound();
        let prec = self.prec().max(a.prec());
        // powers of a
        let mut pows = Vec::with_capacity(d + 1);
        pows.push(MpComplex::one(prec));
        for _ in 1..=d {
            pows.push(pows.last().unwrap() * a);
        }
        let mut out = Vec::with_capacity(d + 1);
        for i in 0..=d {
            let mut acc = MpComplex::new(prec);
            for j in i..=d {
                let term = &self.coeffs[j] * &pows[j - i];
                acc += &term.scale(&binomial_f(prec, j as u32, i as u32));
            }
            out.push(acc);
        }
        PolyC { coeffs: out }
    }

    /// `p(X + n)` for integer `n`.
    pub fn shift_i64(&self, n: i64) -> PolyC {
        self.shift(&MpComplex::from_i64(self.prec(), n))
    }

    /// `sym^d(S) p`: coefficient `j` becomes `(-1)^j p_{d-j}`.
    pub fn act_s(&self) -> PolyC {
        let d = self.degree_bound();
        let mut out = Vec::with_capacity(d + 1);
        for j in 0..=d {
            let c = self.coeffs[d - j].clone();
            out.push(if j % 2 == 1 { -c } else { c });
        }
        PolyC { coeffs: out }
    }

    /// `sym^d(T^n) p = p(X - n)`.
    pub fn act_t_pow(&self, n: i64) -> PolyC {
        self.shift_i64(-n)
    }

    pub fn derivative(&self) -> PolyC {
        let d = self.degree_bound();
        let prec = self.prec();
        if d == 0 {
            return PolyC::zero(prec, 0);
        }
        let mut out = Vec::with_capacity(d);
        for i in 1..=d {
            out.push(self.coeffs[i].scale_i64(i as i64));
        }
        PolyC { coeffs: out }
    }

    pub fn norm_l2(&self) -> Float {
        let mut acc = Float::new(self.prec());
        for c in &self.coeffs {
            acc += c.norm_sqr();
        }
        acc.sqrt()
    }

    pub fn norm_f64(&self) -> f64 {
        self.norm_l2().to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Polynomial in `X` and `Y` of degree at most `d` in each variable;
/// `coeffs[i][j]` is the coefficient of `X^i Y^j`.
#[derive(Clone, Debug)]
pub struct PolyCC {
    pub coeffs: Vec<Vec<MpComplex>>,
}

impl PolyCC {
    pub fn zero(prec: u32, degree_bound: usize) -> Self {
        PolyCC { coeffs: vec![vec![MpComplex::new(prec); degree_bound + 1]; degree_bound + 1] }
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0][0].prec()
    }

    /// `p(X) q(Y)` as an element of `C[X,Y]_d`.
    pub fn outer(p: &PolyC, q: &PolyC) -> Self {
        assert_eq!(p.degree_bound(), q.degree_bound());
        let d = p.degree_bound();
        let mut out = Self::zero(p.prec().max(q.prec()), d);
        for i in 0..=d {
            for j in 0..=d {
                out.coeffs[i][j] = &p.coeffs[i] * &q.coeffs[j];
            }
        }
        out
    }

    pub fn add(&self, other: &PolyCC) -> PolyCC {
        let d = self.degree_bound();
        assert_eq!(d, other.degree_bound());
        let mut out = self.clone();
        for i in 0..=d {
            for j in 0..=d {
                out.coeffs[i][j] += &other.coeffs[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &PolyCC) -> PolyCC {
        let d = self.degree_bound();
        assert_eq!(d, other.degree_bound());
        let mut out = self.clone();
        for i in 0..=d {
            for j in 0..=d {
                out.coeffs[i][j] -= &other.coeffs[i][j];
            }
        }
        out
    }

    pub fn scale(&self, z: &MpComplex) -> PolyCC {
        PolyCC {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c * z).collect())
                .collect(),
        }
    }

    pub fn neg(&self) -> PolyCC {
        PolyCC {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| -c).collect())
                .collect(),
        }
    }

    pub fn eval(&self, x: &MpComplex, y: &MpComplex) -> MpComplex {
        let mut acc = MpComplex::new(self.prec().max(x.prec()).max(y.prec()));
        for row in self.coeffs.iter().rev() {
            let mut inner = MpComplex::new(acc.prec());
            for c in row.iter().rev() {
                inner = &inner * y;
                inner += c;
            }
            acc = &acc * x;
            acc += &inner;
        }
        acc
    }

    /// Extract the coefficient of `Y^j` as a polynomial in `X`.
    pub fn x_poly_of_y_power(&self, j: usize) -> PolyC {
        PolyC { coeffs: self.coeffs.iter().map(|row| row[j].clone()).collect() }
    }

    pub fn norm_l2(&self) -> Float {
        let mut acc = Float::new(self.prec());
        for row in &self.coeffs {
            for c in row {
                acc += c.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn norm_f64(&self) -> f64 {
        self.norm_l2().to_f64()
    }
}

/// Integer matrix `[[a,b],[c,d]]` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElem {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl GroupElem {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(Error::InvalidParameter(format!(
                "matrix [[{a},{b}],[{c},{d}]] has determinant {det}, expected 1"
            )));
        }
        Ok(GroupElem { a, b, c, d })
    }

    pub fn identity() -> Self {
        GroupElem { a: 1, b: 0, c: 0, d: 1 }
    }

    pub fn s() -> Self {
        GroupElem { a: 0, b: -1, c: 1, d: 0 }
    }

    pub fn t() -> Self {
        GroupElem { a: 1, b: 1, c: 0, d: 1 }
    }

    /// `U = T S`.
    pub fn u() -> Self {
        Self::t().mul(&Self::s())
    }

    pub fn t_pow(n: i64) -> Self {
        GroupElem { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn mul(&self, other: &GroupElem) -> GroupElem {
        GroupElem {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inv(&self) -> GroupElem {
        GroupElem { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn neg(&self) -> GroupElem {
        GroupElem { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Moebius action on the upper half-plane.
    pub fn apply(&self, tau: &MpComplex) -> MpComplex {
        let p = tau.prec();
        let num = &tau.scale_i64(self.a) + &MpComplex::from_i64(p, self.b);
        let den = &tau.scale_i64(self.c) + &MpComplex::from_i64(p, self.d);
        &num / &den
    }

    /// `c tau + d` as a complex number.
    pub fn automorphy_factor(&self, tau: &MpComplex) -> MpComplex {
        let p = tau.prec();
        &tau.scale_i64(self.c) + &MpComplex::from_i64(p, self.d)
    }
}

/// `sym^d(g) p = (-c X + a)^d p((d X - b)/(-c X + a))`, expanded exactly
/// over the integers before conversion, so large matrix entries do not
/// lose digits at fixed precision.
pub fn sym_act(gamma: &GroupElem, p: &PolyC) -> PolyC {
    let d = p.degree_bound();
    let prec = p.prec();
    if gamma.c == 0 && gamma.a == 1 {
        // T^b
        return p.act_t_pow(gamma.b);
    }
    // Integer-coefficient powers of (d X - b) and (-c X + a).
    let lin1 = [Integer::from(-gamma.b), Integer::from(gamma.d)];
    let lin2 = [Integer::from(gamma.a), Integer::from(-gamma.c)];
    let pow1 = int_linear_powers(&lin1, d);
    let pow2 = int_linear_powers(&lin2, d);
    let mut out = PolyC::zero(prec, d);
    let mut coef = Float::new(prec);
    for i in 0..=d {
        if p.coeffs[i].is_zero() {
            continue;
        }
        // (d X - b)^i (-c X + a)^{d-i}
        for (k1, c1) in pow1[i].iter().enumerate() {
            for (k2, c2) in pow2[d - i].iter().enumerate() {
                let prod = (c1 * c2).complete();
                if prod == 0 {
                    continue;
                }
                coef.assign(&prod);
                out.coeffs[k1 + k2] += &p.coeffs[i].scale(&coef);
            }
        }
    }
    out
}

fn int_linear_powers(lin: &[Integer; 2], up_to: usize) -> Vec<Vec<Integer>> {
    let mut pows: Vec<Vec<Integer>> = Vec::with_capacity(up_to + 1);
    pows.push(vec![Integer::from(1)]);
    for i in 1..=up_to {
        let prev = &pows[i - 1];
        let mut next = vec![Integer::new(); i + 1];
        for (k, c) in prev.iter().enumerate() {
            next[k] += (c * &lin[0]).complete();
            next[k + 1] += (c * &lin[1]).complete();
        }
        pows.push(next);
    }
    pows
}

/// Tensor action `sym^d(X) (x) sym^d(Y)` on `C[X,Y]_d`.
pub fn sym_act_xy(gamma: &GroupElem, p: &PolyCC) -> PolyCC {
    let d = p.degree_bound();
    let mut out = p.clone();
    // act on the X index, column by column
    for j in 0..=d {
        let col = sym_act(gamma, &out.x_poly_of_y_power(j));
        for i in 0..=d {
            out.coeffs[i][j] = col.coeffs[i].clone();
        }
    }
    // act on the Y index, row by row
    for i in 0..=d {
        let row = sym_act(gamma, &PolyC { coeffs: out.coeffs[i].clone() });
        out.coeffs[i] = row.coeffs;
    }
    out
}

/// Invariant pairing `<p, q> = sum_i (-1)^i binom(d,i)^{-1} p_i q_{d-i}`.
pub fn pair(p: &PolyC, q: &PolyC) -> Result<MpComplex> {
    let d = p.degree_bound();
    if q.degree_bound() != d {
        return Err(Error::DegreeMismatch(d, q.degree_bound()));
    }
    let prec = p.prec().max(q.prec());
    let mut acc = MpComplex::new(prec);
    for i in 0..=d {
        let mut term = &p.coeffs[i] * &q.coeffs[d - i];
        let b = Float::with_val(prec, &binomial(d as u32, i as u32));
        term.re /= &b;
        term.im /= &b;
        if i % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
    }
    Ok(acc)
}

/// Antisymmetric form `<<p, q>> = <T^{-1}.p - T.p, q>`.
pub fn pair_bb(p: &PolyC, q: &PolyC) -> Result<MpComplex> {
    let diff = p.shift_i64(1).sub(&p.shift_i64(-1));
    pair(&diff, q)
}

/// Contraction `C[X,Y]_d -> C` sending `p (x) q` to `<p, q>`.
pub fn contract(p: &PolyCC) -> MpComplex {
    let d = p.degree_bound();
    let prec = p.prec();
    let mut acc = MpComplex::new(prec);
    for i in 0..=d {
        let mut term = p.coeffs[i][d - i].clone();
        let b = Float::with_val(prec, &binomial(d as u32, i as u32));
        term.re /= &b;
        term.im /= &b;
        if i % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
    }
    acc
}

/// Factorization `sign * T^{e0} S T^{e1} S ... S T^{el}` of a group
/// element; multiplying the factors back reproduces it exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub sign: i8,
    pub exponents: Vec<i64>,
}

impl Word {
    pub fn num_s(&self) -> usize {
        self.exponents.len() - 1
    }

    /// Multiply the word back out in exact integer arithmetic.
    pub fn to_elem(&self) -> GroupElem {
        let s = GroupElem::s();
        let mut m = GroupElem::t_pow(self.exponents[0]);
        for &e in &self.exponents[1..] {
            m = m.mul(&s).mul(&GroupElem::t_pow(e));
        }
        if self.sign < 0 {
            m = m.neg();
        }
        m
    }
}

/// Euclidean factorization of `gamma` into `S`, `T` generator powers.
/// Each step peels `T^n S` with `n` the nearest integer to `a/c`, so the
/// lower-left entry at least halves and the word length is
/// `O(log max|entry|)`.
pub fn word_decompose(gamma: &GroupElem) -> Word {
    let mut exps: Vec<i64> = Vec::new();
    let mut g = *gamma;
    loop {
        if g.c == 0 {
            // g = +- T^b
            let (sign, tail) = if g.a == 1 { (1, g.b) } else { (-1, -g.b) };
            exps.push(tail);
            return Word { sign, exponents: exps };
        }
        // nearest integer to a/c
        let n = div_round_nearest(g.a, g.c);
        exps.push(n);
        // g <- S^{-1} T^{-n} g
        g = GroupElem { a: g.c, b: g.d, c: n * g.c - g.a, d: n * g.d - g.b };
    }
}

fn div_round_nearest(a: i64, c: i64) -> i64 {
    // round(a/c) with |a - n c| <= |c|/2
    let q = a.div_euclid(c);
    let r = a - q * c; // 0 <= r < |c|
    if 2 * r.abs() > c.abs() {
        q + c.signum()
    } else {
        q
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Extended Euclid: returns `(x, y)` with `c x + d y = gcd(c, d)`.
fn ext_gcd(c: i64, d: i64) -> (i64, i64) {
    if d == 0 {
        return (c.signum(), 0);
    }
    let (x1, y1) = ext_gcd(d, c.rem_euclid(d));
    (y1, x1 - (c.div_euclid(d)) * y1)
}

/// Complete a coprime bottom row `(c, d)` to a determinant-one matrix.
pub fn complete_bottom_row(c: i64, d: i64) -> GroupElem {
    debug_assert_eq!(gcd(c, d), 1);
    let (x, y) = ext_gcd(c, d);
    // c x + d y = 1, so [[y, -x], [c, d]] has determinant y d + x c = 1
    GroupElem { a: y, b: -x, c, d }
}

/// One representative per left coset `Γ_∞ \ SL2(Z)` with bottom row
/// `(c, d)`, `c >= 0`, `gcd(c, d) = 1`, `max(|c|, |d|) <= cutoff`. The
/// identity class `(0, 1)` comes first; for `c >= 1`, `d` runs over all
/// integers of absolute value at most the cutoff that are coprime to `c`.
pub fn enumerate_cosets(cutoff: i64) -> Vec<GroupElem> {
    assert!(cutoff >= 1);
    let mut out = vec![GroupElem::identity()];
    for c in 1..=cutoff {
        for d in -cutoff..=cutoff {
            if gcd(c, d) == 1 {
                out.push(complete_bottom_row(c, d));
            }
        }
    }
    out
}

/// One representative per nontrivial double coset
/// `Γ_∞ \ SL2(Z) / Γ_∞`: bottom rows `(c, d)` with `1 <= c <= cutoff`,
/// `0 <= d < c`, `gcd(c, d) = 1`.
pub fn enumerate_double_cosets(cutoff: i64) -> Vec<GroupElem> {
    assert!(cutoff >= 1);
    let mut out = Vec::new();
    for c in 1..=cutoff {
        for d in 0..c.max(1) {
            if gcd(c, d) == 1 {
                out.push(complete_bottom_row(c, d));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::euler_phi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 128;

    fn x_sq(prec: u32, d: usize) -> PolyC {
        PolyC::monomial(prec, d, 2)
    }

    fn random_poly(rng: &mut ChaCha8Rng, d: usize) -> PolyC {
        PolyC::from_coeffs(
            (0..=d)
                .map(|_| MpComplex::from_f64(P, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    fn random_elem(rng: &mut ChaCha8Rng, steps: usize) -> GroupElem {
        let mut g = GroupElem::identity();
        for _ in 0..steps {
            g = g.mul(&GroupElem::t_pow(rng.gen_range(-3..=3)));
            g = g.mul(&GroupElem::s());
        }
        g
    }

    #[test]
    fn sym_act_t_on_x_squared() {
        let p = x_sq(P, 2);
        let q = sym_act(&GroupElem::t(), &p);
        // (X-1)^2 = X^2 - 2X + 1
        assert!((q.coeffs[0].re.to_f64() - 1.0).abs() < 1e-30);
        assert!((q.coeffs[1].re.to_f64() + 2.0).abs() < 1e-30);
        assert!((q.coeffs[2].re.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn sym_act_s_on_x_squared() {
        let p = x_sq(P, 2);
        let q = sym_act(&GroupElem::s(), &p);
        // (-X)^2 (-1/X)^2 = 1
        assert!((q.coeffs[0].re.to_f64() - 1.0).abs() < 1e-30);
        assert!(q.coeffs[1].abs_f64() < 1e-30);
        assert!(q.coeffs[2].abs_f64() < 1e-30);
        // fast path agrees
        let r = p.act_s();
        for i in 0..=2 {
            assert!((&q.coeffs[i] - &r.coeffs[i]).abs_f64() < 1e-30);
        }
    }

    #[test]
    fn sym_act_composition_matches_word_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_elem(&mut rng, 4);
            let p = random_poly(&mut rng, 10);
            let direct = sym_act(&g, &p);
            // apply the word factors right-to-left
            let w = word_decompose(&g);
            let mut acc = p.clone();
            acc = acc.act_t_pow(*w.exponents.last().unwrap());
            for &e in w.exponents.iter().rev().skip(1) {
                acc = acc.act_s();
                acc = acc.act_t_pow(e);
            }
            if w.sign < 0 {
                // sym^d(-I) = id for even d
            }
            let diff = direct.sub(&acc).norm_f64();
            assert!(diff < 1e-25 * (1.0 + direct.norm_f64()), "diff {diff}");
        }
    }

    #[test]
    fn action_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let g1 = random_elem(&mut rng, 3);
            let g2 = random_elem(&mut rng, 3);
            let p = random_poly(&mut rng, 8);
            let lhs = sym_act(&g1.mul(&g2), &p);
            let rhs = sym_act(&g1, &sym_act(&g2, &p));
            assert!(lhs.sub(&rhs).norm_f64() < 1e-24 * (1.0 + lhs.norm_f64()));
        }
        let p = random_poly(&mut rng, 8);
        assert!(sym_act(&GroupElem::identity(), &p).sub(&p).norm_f64() < 1e-30);
        assert!(sym_act(&GroupElem::identity().neg(), &p).sub(&p).norm_f64() < 1e-30);
    }

    #[test]
    fn pair_basic_values() {
        // <X^d, 1> = 1 for even d
        let d = 4;
        let p = PolyC::monomial(P, d, d);
        let q = PolyC::monomial(P, d, 0);
        let v = pair(&p, &q).unwrap();
        assert!((v.re.to_f64() - 1.0).abs() < 1e-30);
        // <X, Y> at d = 2 is -1/2
        let p = PolyC::monomial(P, 2, 1);
        let v = pair(&p, &p).unwrap();
        assert!((v.re.to_f64() + 0.5).abs() < 1e-30);
    }

    #[test]
    fn pair_invariance_under_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [GroupElem::s(), GroupElem::t()] {
            for _ in 0..10 {
                let p = random_poly(&mut rng, 10);
                let q = random_poly(&mut rng, 10);
                let lhs = pair(&sym_act(&g, &p), &sym_act(&g, &q)).unwrap();
                let rhs = pair(&p, &q).unwrap();
                assert!((&lhs - &rhs).abs_f64() < 1e-12);
            }
        }
    }

    #[test]
    fn pair_bb_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = random_poly(&mut rng, 10);
            let q = random_poly(&mut rng, 10);
            let v = pair_bb(&p, &p).unwrap();
            assert!(v.abs_f64() < 1e-28);
            let a = pair_bb(&p, &q).unwrap();
            let b = pair_bb(&q, &p).unwrap();
            assert!((&a + &b).abs_f64() < 1e-25);
        }
    }

    #[test]
    fn contract_examples() {
        let d = 6;
        let xd = PolyC::monomial(P, d, d);
        let one = PolyC::monomial(P, d, 0);
        let v = contract(&PolyCC::outer(&xd, &one));
        assert!((v.re.to_f64() - 1.0).abs() < 1e-30);
        let v = contract(&PolyCC::outer(&one, &xd));
        assert!((v.re.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn contract_linear_on_rank_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let d = 10;
        let mut total = PolyCC::zero(P, d);
        let mut expect = MpComplex::new(P);
        for _ in 0..3 {
            let p = random_poly(&mut rng, d);
            let q = random_poly(&mut rng, d);
            total = total.add(&PolyCC::outer(&p, &q));
            expect += &pair(&p, &q).unwrap();
        }
        assert!((&contract(&total) - &expect).abs_f64() < 1e-25);
    }

    #[test]
    fn contract_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = 8;
        let g = random_elem(&mut rng, 4);
        let p = random_poly(&mut rng, d);
        let q = random_poly(&mut rng, d);
        let pq = PolyCC::outer(&p, &q);
        let moved = sym_act_xy(&g, &pq);
        assert!((&contract(&moved) - &contract(&pq)).abs_f64() < 1e-20);
    }

    #[test]
    fn word_roundtrip_simple() {
        let w = word_decompose(&GroupElem::t_pow(5));
        assert_eq!(w.sign, 1);
        assert_eq!(w.exponents, vec![5]);
        assert_eq!(w.to_elem(), GroupElem::t_pow(5));

        let s = GroupElem::s();
        let w = word_decompose(&s);
        assert_eq!(w.to_elem(), s);

        let w = word_decompose(&GroupElem::identity().neg());
        assert_eq!(w.to_elem(), GroupElem::identity().neg());
    }

    #[test]
    fn word_roundtrip_random_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            // build an element with entries up to ~1e6
            let mut g = GroupElem::identity();
            while g.a.abs().max(g.b.abs()).max(g.c.abs()).max(g.d.abs()) < 1_000_000 {
                g = g.mul(&GroupElem::t_pow(rng.gen_range(1..=40)));
                g = g.mul(&GroupElem::s());
            }
            let w = word_decompose(&g);
            assert_eq!(w.to_elem(), g);
            assert!(w.exponents.len() <= 64);
        }
    }

    #[test]
    fn coset_enumeration_small() {
        let reps = enumerate_cosets(1);
        let rows: Vec<(i64, i64)> = reps.iter().map(|g| (g.c, g.d)).collect();
        assert_eq!(rows, vec![(0, 1), (1, -1), (1, 0), (1, 1)]);
        for g in &reps {
            assert_eq!(g.a * g.d - g.b * g.c, 1);
        }
    }

    #[test]
    fn double_coset_enumeration() {
        let reps = enumerate_double_cosets(3);
        let rows: Vec<(i64, i64)> = reps.iter().map(|g| (g.c, g.d)).collect();
        assert_eq!(rows, vec![(1, 0), (2, 1), (3, 1), (3, 2)]);
        for cutoff in [1, 2, 5, 10, 30] {
            let count = enumerate_double_cosets(cutoff).len() as i64;
            let expect: i64 = (1..=cutoff).map(euler_phi).sum();
            assert_eq!(count, expect);
        }
        for g in enumerate_double_cosets(10) {
            assert_eq!(g.a * g.d - g.b * g.c, 1);
        }
    }

    #[test]
    fn coset_count_formula() {
        for cutoff in [1, 2, 3, 7] {
            let count = enumerate_cosets(cutoff).len() as i64;
            let mut expect = 1;
            for c in 1..=cutoff {
                for d in -cutoff..=cutoff {
                    if gcd(c, d) == 1 {
                        expect += 1;
                    }
                }
            }
            assert_eq!(count, expect);
        }
    }

    #[test]
    fn shift_and_eval_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_poly(&mut rng, 9);
        let a = MpComplex::from_f64(P, 0.3, -1.7);
        let x = MpComplex::from_f64(P, 1.1, 0.2);
        let lhs = p.shift(&a).eval(&x);
        let rhs = p.eval(&(&x + &a));
        assert!((&lhs - &rhs).abs_f64() < 1e-30);
    }
}
