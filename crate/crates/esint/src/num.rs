//! Complex scalars of runtime-configurable precision, plus the exact
//! integer/rational helpers (binomials, factorials, Bernoulli numbers)
//! the rest of the crate builds on.
//!
//! [`MpComplex`] is a pair of MPFR reals. Precision is a property of the
//! value (every constructor takes or inherits a mantissa width in bits),
//! so mixed-precision expressions resolve to the precision of their
//! operands and no global state is involved.

use rug::{float::Constant, ops::CompleteRound, Assign, Complete, Float, Integer, Rational};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Default mantissa width in bits.
pub const DEFAULT_PREC: u32 = 128;

/// Shared evaluation parameters: precision, q-truncation, coset cutoff
/// and comparison tolerance.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Mantissa bits for complex scalars. Values up to 53 select the
    /// native `f64` fast path in the Eisenstein kernels.
    pub prec: u32,
    /// Number of retained Fourier coefficients is `trunc + 1` (indices `0..=trunc`).
    pub trunc: usize,
    /// Coset cutoff: sums over `Γ_∞\SL2(Z)` style classes keep `c <= cutoff`.
    pub cutoff: i64,
    /// Relative tolerance for identity checks.
    pub tol: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { prec: DEFAULT_PREC, trunc: 64, cutoff: 4000, tol: 1e-9 }
    }
}

impl EvalConfig {
    pub fn with_prec(prec: u32) -> Self {
        EvalConfig { prec, ..Self::default() }
    }
}

/// Complex number with MPFR real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct MpComplex {
    pub re: Float,
    pub im: Float,
}

impl MpComplex {
    pub fn new(prec: u32) -> Self {
        MpComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        MpComplex { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_i64(prec: u32, n: i64) -> Self {
        MpComplex { re: Float::with_val(prec, n), im: Float::new(prec) }
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        MpComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(prec, 1)
    }

    /// The imaginary unit.
    pub fn i(prec: u32) -> Self {
        MpComplex { re: Float::new(prec), im: Float::with_val(prec, 1) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        MpComplex { re: self.re.clone(), im: (-&self.im).complete(self.prec()) }
    }

    pub fn scale(&self, x: &Float) -> Self {
        let p = self.prec();
        MpComplex { re: (&self.re * x).complete(p), im: (&self.im * x).complete(p) }
    }

    pub fn scale_f64(&self, x: f64) -> Self {
        let p = self.prec();
        MpComplex { re: (&self.re * x).complete(p), im: (&self.im * x).complete(p) }
    }

    pub fn scale_i64(&self, n: i64) -> Self {
        let p = self.prec();
        MpComplex { re: (&self.re * n).complete(p), im: (&self.im * n).complete(p) }
    }

    /// Multiply by `i` (rotate by a quarter turn).
    pub fn mul_i(&self) -> Self {
        let p = self.prec();
        MpComplex { re: (-&self.im).complete(p), im: self.re.clone() }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        (&self.re * &self.re).complete(p) + (&self.im * &self.im).complete(p)
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn inv(&self) -> Self {
        let p = self.prec();
        let ns = self.norm_sqr();
        MpComplex {
            re: (&self.re / &ns).complete(p),
            im: -(&self.im / &ns).complete(p),
        }
    }

    /// Integer power by binary exponentiation.
    pub fn powi(&self, n: i64) -> Self {
        let p = self.prec();
        if n < 0 {
            return self.inv().powi(-n);
        }
        let mut result = Self::one(p);
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Complex exponential.
    pub fn exp(&self) -> Self {
        let p = self.prec();
        let r = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        MpComplex { re: (&c * &r).complete(p), im: (&s * &r).complete(p) }
    }

    /// `e(z) = exp(2 pi i z)`, the normalized exponential of modular forms.
    pub fn e_tau(&self) -> Self {
        let p = self.prec();
        let two_pi = Float::with_val(p, Constant::Pi) * 2;
        let arg = Float::with_val(p, &self.re * &two_pi);
        let mut damp = Float::with_val(p, &self.im * &two_pi);
        damp = (-damp).exp();
        let (s, c) = arg.sin_cos(Float::new(p));
        MpComplex { re: Float::with_val(p, &c * &damp), im: Float::with_val(p, &s * &damp) }
    }

    /// Decimal rendering with the number of digits the precision supports.
    pub fn to_decimal_pair(&self) -> (String, String) {
        (float_to_decimal(&self.re), float_to_decimal(&self.im))
    }
}

/// Format a `Float` as a plain decimal/scientific string with
/// precision-matched digit count.
pub fn float_to_decimal(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let digits = (x.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
    let s = x.to_string_radix(10, Some(digits));
    s
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait<&MpComplex> for &MpComplex {
            type Output = MpComplex;
            fn $method(self, rhs: &MpComplex) -> MpComplex {
                $impl_fn(self, rhs)
            }
        }
        impl $trait<MpComplex> for MpComplex {
            type Output = MpComplex;
            fn $method(self, rhs: MpComplex) -> MpComplex {
                $impl_fn(&self, &rhs)
            }
        }
        impl $trait<&MpComplex> for MpComplex {
            type Output = MpComplex;
            fn $method(self, rhs: &MpComplex) -> MpComplex {
                $impl_fn(&self, rhs)
            }
        }
    };
}

fn add_impl(a: &MpComplex, b: &MpComplex) -> MpComplex {
    let p = a.prec().max(b.prec());
    MpComplex { re: (&a.re + &b.re).complete(p), im: (&a.im + &b.im).complete(p) }
}

fn sub_impl(a: &MpComplex, b: &MpComplex) -> MpComplex {
    let p = a.prec().max(b.prec());
    MpComplex { re: (&a.re - &b.re).complete(p), im: (&a.im - &b.im).complete(p) }
}

fn mul_impl(a: &MpComplex, b: &MpComplex) -> MpComplex {
    let p = a.prec().max(b.prec());
    let mut re = (&a.re * &b.re).complete(p);
    re -= (&a.im * &b.im).complete(p);
    let mut im = (&a.re * &b.im).complete(p);
    im += (&a.im * &b.re).complete(p);
    MpComplex { re, im }
}

fn div_impl(a: &MpComplex, b: &MpComplex) -> MpComplex {
    let p = a.prec().max(b.prec());
    let ns = b.norm_sqr();
    let mut re = (&a.re * &b.re).complete(p);
    re += (&a.im * &b.im).complete(p);
    re /= &ns;
    let mut im = (&a.im * &b.re).complete(p);
    im -= (&a.re * &b.im).complete(p);
    im /= &ns;
    MpComplex { re, im }
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl Neg for &MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        let p = self.prec();
        MpComplex { re: (-&self.re).complete(p), im: (-&self.im).complete(p) }
    }
}

impl Neg for MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        -&self
    }
}

impl AddAssign<&MpComplex> for MpComplex {
    fn add_assign(&mut self, rhs: &MpComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&MpComplex> for MpComplex {
    fn sub_assign(&mut self, rhs: &MpComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&MpComplex> for MpComplex {
    fn mul_assign(&mut self, rhs: &MpComplex) {
        let prod = mul_impl(self, rhs);
        *self = prod;
    }
}

impl fmt::Debug for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_decimal_pair();
        write!(f, "[{}, {}]", re, im)
    }
}

/// `pi` at the requested precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `2 pi i` at the requested precision.
pub fn two_pi_i(prec: u32) -> MpComplex {
    MpComplex { re: Float::new(prec), im: pi(prec) * 2 }
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}

/// Binomial coefficient as a `Float` of the given precision.
pub fn binomial_f(prec: u32, n: u32, k: u32) -> Float {
    Float::with_val(prec, &binomial(n, k))
}

/// Exact factorial.
pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

pub fn factorial_f(prec: u32, n: u32) -> Float {
    Float::with_val(prec, &factorial(n))
}

/// Bernoulli numbers `B_0..=B_n` as exact rationals, by the standard
/// recurrence `sum_{j<=m} binom(m+1, j) B_j = 0` for `m >= 1`.
pub fn bernoulli_upto(n: u32) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n as usize + 1);
    b.push(Rational::from(1));
    for m in 1..=n {
        let mut acc = Rational::new();
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from((binomial(m + 1, j as u32), Integer::from(1))) * bj;
        }
        acc /= Rational::from((Integer::from(m) + 1, Integer::from(1)));
        b.push(-acc);
    }
    b
}

/// Euler's totient by trial-division factorization; inputs stay small
/// (coset cutoffs), so no sieve is warranted.
pub fn euler_phi(mut n: i64) -> i64 {
    assert!(n >= 1);
    let mut phi = 1i64;
    let mut p = 2i64;
    while p * p <= n {
        if n % p == 0 {
            let mut pk = 1;
            while n % p == 0 {
                n /= p;
                pk *= p;
            }
            phi *= pk - pk / p;
        }
        p += 1;
    }
    if n > 1 {
        phi *= n - 1;
    }
    phi
}

/// Shared complex-scalar interface for the coset-sum kernels: one MPFR
/// implementation for configurable precision, one `f64` implementation
/// for configurations satisfied by double precision.
pub(crate) trait Cplx: Clone {
    fn zero_like(model: &Self) -> Self;
    fn from_f64s(model: &Self, re: f64, im: f64) -> Self;
    fn from_mp(model: &Self, z: &MpComplex) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale_i64(&self, k: i64) -> Self;
    fn scale_f64(&self, x: f64) -> Self;
    fn add_assign_(&mut self, o: &Self);
    /// `self += a * b`
    fn add_mul(&mut self, a: &Self, b: &Self);
    /// `e(num/den) = exp(2 pi i num/den)`
    fn e_frac(model: &Self, num: i64, den: i64) -> Self;
    /// the real rational `num/den` at the model's precision
    fn from_ratio(model: &Self, num: i64, den: i64) -> Self;
    fn abs_f64(&self) -> f64;
    fn to_mp(&self, prec: u32) -> MpComplex;
    fn powi(&self, n: i64) -> Self;
    fn inv(&self) -> Self;
}

impl Cplx for MpComplex {
    fn zero_like(model: &Self) -> Self {
        MpComplex::new(model.prec())
    }
    fn from_f64s(model: &Self, re: f64, im: f64) -> Self {
        MpComplex::from_f64(model.prec(), re, im)
    }
    fn from_mp(model: &Self, z: &MpComplex) -> Self {
        let p = model.prec();
        MpComplex { re: Float::with_val(p, &z.re), im: Float::with_val(p, &z.im) }
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale_i64(&self, k: i64) -> Self {
        MpComplex::scale_i64(self, k)
    }
    fn scale_f64(&self, x: f64) -> Self {
        MpComplex::scale_f64(self, x)
    }
    fn add_assign_(&mut self, o: &Self) {
        *self += o;
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        let p = self.prec();
        self.re += (&a.re * &b.re).complete(p);
        self.re -= (&a.im * &b.im).complete(p);
        self.im += (&a.re * &b.im).complete(p);
        self.im += (&a.im * &b.re).complete(p);
    }
    fn e_frac(model: &Self, num: i64, den: i64) -> Self {
        let p = model.prec();
        let mut arg = Float::with_val(p, Constant::Pi);
        arg *= 2 * num;
        arg /= den;
        let (s, c) = arg.sin_cos(Float::new(p));
        MpComplex { re: c, im: s }
    }
    fn from_ratio(model: &Self, num: i64, den: i64) -> Self {
        let p = model.prec();
        let mut re = Float::with_val(p, num);
        re /= den;
        MpComplex { re, im: Float::new(p) }
    }
    fn abs_f64(&self) -> f64 {
        MpComplex::abs_f64(self)
    }
    fn to_mp(&self, prec: u32) -> MpComplex {
        let mut z = MpComplex::new(prec);
        z.re.assign(&self.re);
        z.im.assign(&self.im);
        z
    }
    fn powi(&self, n: i64) -> Self {
        MpComplex::powi(self, n)
    }
    fn inv(&self) -> Self {
        MpComplex::inv(self)
    }
}

pub(crate) type C64 = num_complex::Complex64;

impl Cplx for C64 {
    fn zero_like(_model: &Self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_f64s(_model: &Self, re: f64, im: f64) -> Self {
        C64::new(re, im)
    }
    fn from_mp(_model: &Self, z: &MpComplex) -> Self {
        let (re, im) = z.to_f64_pair();
        C64::new(re, im)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale_i64(&self, k: i64) -> Self {
        self * k as f64
    }
    fn scale_f64(&self, x: f64) -> Self {
        self * x
    }
    fn add_assign_(&mut self, o: &Self) {
        *self += o;
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn e_frac(_model: &Self, num: i64, den: i64) -> Self {
        let arg = 2.0 * std::f64::consts::PI * (num as f64) / (den as f64);
        C64::new(arg.cos(), arg.sin())
    }
    fn from_ratio(_model: &Self, num: i64, den: i64) -> Self {
        C64::new(num as f64 / den as f64, 0.0)
    }
    fn abs_f64(&self) -> f64 {
        num_complex::Complex::norm(*self)
    }
    fn to_mp(&self, prec: u32) -> MpComplex {
        MpComplex::from_f64(prec, self.re, self.im)
    }
    fn powi(&self, n: i64) -> Self {
        num_complex::Complex::powi(self, n as i32)
    }
    fn inv(&self) -> Self {
        num_complex::Complex::inv(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_field_ops() {
        let p = 128;
        let a = MpComplex::from_f64(p, 3.0, 4.0);
        let b = MpComplex::from_f64(p, -1.0, 2.0);
        let prod = &a * &b;
        assert_eq!(prod.re.to_f64(), -11.0);
        assert_eq!(prod.im.to_f64(), 2.0);
        let q = &prod / &b;
        assert!((&q - &a).abs_f64() < 1e-35);
        assert!((a.abs().to_f64() - 5.0).abs() < 1e-30);
    }

    #[test]
    fn exp_and_e_tau() {
        let p = 128;
        // e(i) = exp(-2 pi)
        let tau = MpComplex::i(p);
        let q = tau.e_tau();
        let expected = (-2.0 * std::f64::consts::PI).exp();
        assert!((q.re.to_f64() - expected).abs() < 1e-15);
        assert!(q.im.to_f64().abs() < 1e-30);
        // exp(i pi) = -1
        let z = MpComplex::from_floats(Float::new(p), pi(p));
        let w = z.exp();
        assert!((w.re.to_f64() + 1.0).abs() < 1e-30);
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let p = 128;
        let z = MpComplex::from_f64(p, 0.7, -0.3);
        let mut acc = MpComplex::one(p);
        for _ in 0..7 {
            acc = &acc * &z;
        }
        assert!((&acc - &z.powi(7)).abs_f64() < 1e-35);
        let w = &z.powi(-3) * &z.powi(3);
        assert!((&w - &MpComplex::one(p)).abs_f64() < 1e-35);
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_upto(12);
        assert_eq!(b[0], Rational::from(1));
        assert_eq!(b[1], Rational::from((-1, 2)));
        assert_eq!(b[2], Rational::from((1, 6)));
        assert_eq!(b[4], Rational::from((-1, 30)));
        assert_eq!(b[6], Rational::from((1, 42)));
        assert_eq!(b[12], Rational::from((-691, 2730)));
    }

    #[test]
    fn totient_small_values() {
        let known = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (i, &v) in known.iter().enumerate() {
            assert_eq!(euler_phi(i as i64 + 1), v);
        }
    }

    #[test]
    fn e_frac_consistency() {
        let model = MpComplex::new(128);
        let z = <MpComplex as Cplx>::e_frac(&model, 3, 7);
        let third = Float::with_val(128, 3) / 7u32;
        let w = MpComplex::from_floats(third, Float::new(128)).e_tau();
        assert!((&z - &w).abs_f64() < 1e-35);
        let zf = <C64 as Cplx>::e_frac(&C64::new(0.0, 0.0), 3, 7);
        assert!((zf.re - z.re.to_f64()).abs() < 1e-14);
    }
}
