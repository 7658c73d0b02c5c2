//! Truncated Fourier expansions of level-one modular forms.
//!
//! A [`QSeries`] stores `f(τ) = sum_{n=0}^{N} c_n e(n τ)` together with
//! its weight. Products truncate to the shorter operand and add weights.
//! The module provides the classical Eisenstein series, the discriminant
//! form `Δ = (E_4^3 - E_6^2)/1728`, echelonized (Miller) bases of `M_k`
//! and `S_k` built from `E_4`, `E_6`, `Δ` monomials, point evaluation on
//! the upper half-plane, and the conjugate form `f^c`.

use crate::num::MpComplex;
use crate::{Error, Result};
use rug::{ops::Pow, Complete, Float, Integer, Rational};

/// Truncated q-expansion of a weight-`k` form.
#[derive(Clone, Debug)]
pub struct QSeries {
    pub weight: i64,
    /// `coeffs[n]` is the coefficient of `e(n τ)`; truncation is `len - 1`.
    pub coeffs: Vec<MpComplex>,
}

impl QSeries {
    pub fn zero(prec: u32, weight: i64, trunc: usize) -> Self {
        QSeries { weight, coeffs: vec![MpComplex::new(prec); trunc + 1] }
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0].prec()
    }

    pub fn is_cuspidal(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        if self.weight != other.weight {
            return Err(Error::WeightMismatch(self.weight, other.weight));
        }
        let n = self.trunc().min(other.trunc());
        Ok(QSeries {
            weight: self.weight,
            coeffs: (0..=n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect(),
        })
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add(&other.scale(&MpComplex::from_i64(other.prec(), -1)))
    }

    pub fn scale(&self, z: &MpComplex) -> QSeries {
        QSeries { weight: self.weight, coeffs: self.coeffs.iter().map(|c| c * z).collect() }
    }

    /// Cauchy product, truncated to the shorter operand; weights add.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.trunc().min(other.trunc());
        let prec = self.prec().max(other.prec());
        let mut out = vec![MpComplex::new(prec); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                let term = &self.coeffs[i] * &other.coeffs[j];
                out[i + j] += &term;
            }
        }
        QSeries { weight: self.weight + other.weight, coeffs: out }
    }

    pub fn pow(&self, e: u32) -> QSeries {
        let mut acc = QSeries {
            weight: 0,
            coeffs: {
                let mut v = vec![MpComplex::new(self.prec()); self.trunc() + 1];
                v[0] = MpComplex::one(self.prec());
                v
            },
        };
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Conjugate form: coefficients conjugated, same weight.
    pub fn conj_form(&self) -> QSeries {
        QSeries { weight: self.weight, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    /// Evaluate at `τ` in the upper half-plane.
    pub fn eval_at(&self, tau: &MpComplex) -> Result<MpComplex> {
        Ok(self.eval_at_with_tail(tau)?.0)
    }

    /// Evaluate and report the heuristic tail bound
    /// `|c_N| |q|^{N+1} / (1 - |q|)`.
    pub fn eval_at_with_tail(&self, tau: &MpComplex) -> Result<(MpComplex, f64)> {
        if !(tau.im.to_f64() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "evaluation point must lie in the upper half-plane, got Im = {}",
                tau.im.to_f64()
            )));
        }
        let q = tau.e_tau();
        let mut acc = MpComplex::new(self.prec().max(tau.prec()));
        for c in self.coeffs.iter().rev() {
            acc = &acc * &q;
            acc += c;
        }
        let qa = q.abs_f64();
        let n = self.trunc();
        let tail =
            self.coeffs[n].abs_f64() * qa.powi(n as i32 + 1) / (1.0 - qa).max(f64::MIN_POSITIVE);
        Ok((acc, tail))
    }
}

/// `σ_{power}(n)` for `n = 0..=trunc` as exact integers (index 0 unused).
fn divisor_power_sums(power: u32, trunc: usize) -> Vec<Integer> {
    let mut sums = vec![Integer::new(); trunc + 1];
    for d in 1..=trunc {
        let dp = Integer::from(d).pow(power);
        let mut m = d;
        while m <= trunc {
            sums[m] += &dp;
            m += d;
        }
    }
    sums
}

/// Classical normalized Eisenstein series
/// `E_k = 1 - (2k/B_k) sum_{n>=1} σ_{k-1}(n) q^n` for even `k >= 4`.
pub fn eisenstein_q(k: i64, trunc: usize, prec: u32) -> Result<QSeries> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "Eisenstein weight must be even and at least 4, got {k}"
        )));
    }
    let bern = crate::num::bernoulli_upto(k as u32);
    let factor = Rational::from((-2 * k, 1)) / &bern[k as usize];
    let sums = divisor_power_sums(k as u32 - 1, trunc);
    let mut coeffs = Vec::with_capacity(trunc + 1);
    coeffs.push(MpComplex::one(prec));
    for n in 1..=trunc {
        let c = (&factor * &sums[n]).complete();
        coeffs.push(MpComplex::from_floats(Float::with_val(prec, &c), Float::new(prec)));
    }
    Ok(QSeries { weight: k, coeffs })
}

/// The discriminant form `Δ = (E_4^3 - E_6^2) / 1728`.
pub fn delta_q(trunc: usize, prec: u32) -> QSeries {
    let e4 = eisenstein_q(4, trunc, prec).unwrap();
    let e6 = eisenstein_q(6, trunc, prec).unwrap();
    let num = e4.pow(3).sub(&e6.pow(2)).unwrap();
    let scale = MpComplex::from_floats(
        Float::with_val(prec, Rational::from((1, 1728))),
        Float::new(prec),
    );
    num.scale(&scale)
}

/// Dimension of `M_k` for level one: the classical case split on
/// `k mod 12` gives `floor(k/12) + 1` unless `k ≡ 2 (mod 12)`, where the
/// `+1` is dropped. Odd or negative weights give 0.
pub fn dim_modular(k: i64) -> usize {
    if k < 0 || k % 2 != 0 {
        return 0;
    }
    let q = (k / 12) as usize;
    if k % 12 == 2 {
        q
    } else {
        q + 1
    }
}

/// Dimension of the cuspidal subspace `S_k`.
pub fn dim_cusp(k: i64) -> usize {
    dim_modular(k).saturating_sub(1)
}

/// Echelonized basis of `M_k` (or `S_k`): the `i`-th returned form has
/// q-expansion `q^{j0 + i} + O(q^{j0 + dim})` with `j0 = 0` (or 1), so
/// the leading coefficients form an identity block. Built from monomials
/// `Δ^j E_4^a E_6^b`.
pub fn basis(k: i64, cuspidal: bool, trunc: usize, prec: u32) -> Vec<QSeries> {
    let dim = if cuspidal { dim_cusp(k) } else { dim_modular(k) };
    if dim == 0 {
        return Vec::new();
    }
    let j0 = if cuspidal { 1 } else { 0 };
    let delta = delta_q(trunc, prec);
    let mut gens: Vec<QSeries> = Vec::with_capacity(dim);
    for j in j0..j0 + dim {
        let r = k - 12 * (j as i64);
        let b = if r % 4 == 2 { 1 } else { 0 };
        let a = ((r - 6 * b) / 4) as u32;
        let mut g = delta.pow(j as u32);
        if a > 0 {
            g = g.mul(&eisenstein_q(4, trunc, prec).unwrap().pow(a));
        }
        if b > 0 {
            g = g.mul(&eisenstein_q(6, trunc, prec).unwrap());
        }
        g.weight = k;
        gens.push(g);
    }
    // The monomial with Δ-power j starts at q^j with coefficient 1, so the
    // system is unit triangular; eliminate upwards to reach echelon form.
    let mut echelon: Vec<Option<QSeries>> = vec![None; dim];
    for i in (0..dim).rev() {
        let mut g = gens[i].clone();
        for l in (i + 1)..dim {
            let pivot = j0 + l;
            let coef = g.coeffs[pivot].clone();
            if !coef.is_zero() {
                let correction = echelon[l].as_ref().unwrap().scale(&coef);
                g = g.sub(&correction).unwrap();
            }
        }
        echelon[i] = Some(g);
    }
    echelon.into_iter().map(|g| g.unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 128;

    #[test]
    fn eisenstein_low_weights() {
        let e4 = eisenstein_q(4, 2, P).unwrap();
        assert_eq!(e4.coeffs[0].re.to_f64(), 1.0);
        assert_eq!(e4.coeffs[1].re.to_f64(), 240.0);
        assert_eq!(e4.coeffs[2].re.to_f64(), 2160.0);
        let e6 = eisenstein_q(6, 1, P).unwrap();
        assert_eq!(e6.coeffs[1].re.to_f64(), -504.0);
        for k in [8, 10, 14, 22] {
            assert_eq!(eisenstein_q(k, 1, P).unwrap().coeffs[0].re.to_f64(), 1.0);
        }
        assert!(eisenstein_q(5, 4, P).is_err());
        assert!(eisenstein_q(2, 4, P).is_err());
    }

    #[test]
    fn delta_expansion() {
        let d = delta_q(6, P);
        assert_eq!(d.weight, 12);
        assert!(d.coeffs[0].abs_f64() < 1e-35);
        assert_eq!(d.coeffs[1].re.to_f64(), 1.0);
        assert_eq!(d.coeffs[2].re.to_f64(), -24.0);
        assert_eq!(d.coeffs[3].re.to_f64(), 252.0);
        assert_eq!(d.coeffs[4].re.to_f64(), -1472.0);
        // numerator E_4^3 - E_6^2 is cuspidal
        let e4 = eisenstein_q(4, 4, P).unwrap();
        let e6 = eisenstein_q(6, 4, P).unwrap();
        let num = e4.pow(3).sub(&e6.pow(2)).unwrap();
        assert!(num.coeffs[0].is_zero());
    }

    #[test]
    fn dimension_formula() {
        let expect = [
            (0, 1),
            (2, 0),
            (4, 1),
            (6, 1),
            (8, 1),
            (10, 1),
            (12, 2),
            (14, 1),
            (16, 2),
            (24, 3),
            (26, 2),
        ];
        for (k, d) in expect {
            assert_eq!(dim_modular(k), d, "dim M_{k}");
        }
        assert_eq!(dim_cusp(12), 1);
        assert_eq!(dim_cusp(24), 2);
        assert_eq!(dim_cusp(2), 0);
    }

    #[test]
    fn miller_bases() {
        let b12 = basis(12, true, 8, P);
        assert_eq!(b12.len(), 1);
        let d = delta_q(8, P);
        for n in 0..=8 {
            assert!((&b12[0].coeffs[n] - &d.coeffs[n]).abs_f64() < 1e-30);
        }
        let b24 = basis(24, true, 8, P);
        assert_eq!(b24.len(), 2);
        // echelon: leading block is the identity at q^1, q^2
        assert!((b24[0].coeffs[1].re.to_f64() - 1.0).abs() < 1e-30);
        assert!(b24[0].coeffs[2].abs_f64() < 1e-30);
        assert!(b24[1].coeffs[1].abs_f64() < 1e-30);
        assert!((b24[1].coeffs[2].re.to_f64() - 1.0).abs() < 1e-30);
        assert!(basis(2, false, 4, P).is_empty());
        let m24 = basis(24, false, 8, P);
        assert_eq!(m24.len(), 3);
        for (i, f) in m24.iter().enumerate() {
            for (l, c) in f.coeffs.iter().take(3).enumerate() {
                let expect = if l == i { 1.0 } else { 0.0 };
                assert!((c.re.to_f64() - expect).abs() < 1e-30, "entry ({i},{l})");
            }
        }
    }

    #[test]
    fn ring_axioms_at_truncation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rand_series = |rng: &mut ChaCha8Rng, w: i64| QSeries {
            weight: w,
            coeffs: (0..=16)
                .map(|_| MpComplex::from_f64(P, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        };
        let a = rand_series(&mut rng, 4);
        let b = rand_series(&mut rng, 6);
        let c = rand_series(&mut rng, 8);
        let assoc_l = a.mul(&b).mul(&c);
        let assoc_r = a.mul(&b.mul(&c));
        for n in 0..=16 {
            assert!((&assoc_l.coeffs[n] - &assoc_r.coeffs[n]).abs_f64() < 1e-30);
        }
        let dist_l = a.mul(&b.add(&b).unwrap());
        let dist_r = a.mul(&b).add(&a.mul(&b)).unwrap();
        for n in 0..=16 {
            assert!((&dist_l.coeffs[n] - &dist_r.coeffs[n]).abs_f64() < 1e-30);
        }
        assert_eq!(assoc_l.weight, 18);
    }

    #[test]
    fn evaluation_periodicity() {
        let d = delta_q(64, P);
        let tau = MpComplex::from_f64(P, 0.0, 1.0);
        let tau1 = MpComplex::from_f64(P, 1.0, 1.0);
        let v0 = d.eval_at(&tau).unwrap();
        let v1 = d.eval_at(&tau1).unwrap();
        assert!((&v0 - &v1).abs_f64() < 1e-30 * v0.abs_f64().max(1.0));
        assert!(d.eval_at(&MpComplex::from_f64(P, 0.3, -1.0)).is_err());
    }

    #[test]
    fn evaluation_s_modularity() {
        // Δ(-1/τ) = τ^12 Δ(τ)
        let d = delta_q(96, P);
        let tau = MpComplex::from_f64(P, 0.3, 1.2);
        let minus_inv = -tau.inv();
        let lhs = d.eval_at(&minus_inv).unwrap();
        let rhs = &tau.powi(12) * &d.eval_at(&tau).unwrap();
        assert!((&lhs - &rhs).abs_f64() < 1e-25 * rhs.abs_f64());
    }

    #[test]
    fn conjugate_form() {
        let d = delta_q(16, P);
        let dc = d.conj_form();
        for n in 0..=16 {
            assert!((&d.coeffs[n] - &dc.coeffs[n]).abs_f64() < 1e-35);
        }
        let i_d = d.scale(&MpComplex::i(P));
        let neg_i_d = d.scale(&-MpComplex::i(P));
        let conj = i_d.conj_form();
        for n in 0..=16 {
            assert!((&conj.coeffs[n] - &neg_i_d.coeffs[n]).abs_f64() < 1e-35);
        }
        // random combination over the weight-24 cusp basis
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = basis(24, true, 12, P);
        let z0 = MpComplex::from_f64(P, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let z1 = MpComplex::from_f64(P, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let f = b[0].scale(&z0).add(&b[1].scale(&z1)).unwrap();
        let fc = f.conj_form();
        for n in 0..=12 {
            assert!((&fc.coeffs[n] - &f.coeffs[n].conj()).abs_f64() < 1e-35);
        }
    }

    #[test]
    fn eval_tail_bound_reported() {
        let d = delta_q(32, P);
        let (_, tail) = d.eval_at_with_tail(&MpComplex::from_f64(P, 0.0, 2.0)).unwrap();
        assert!(tail > 0.0 && tail < 1e-80);
    }
}
