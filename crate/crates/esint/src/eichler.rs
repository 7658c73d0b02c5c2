//! Depth-one Eichler integrals and period data.
//!
//! For a cusp form `f` of weight `k` the polynomial-valued integral is
//! `I_f(τ; X) = ∫_τ^{i∞} f(z) (X - z)^{k-2} dz` and its scalar version
//! substitutes `X = τ`. All integrals to the cusp are evaluated in
//! closed form from the q-expansion: the only primitive needed is
//!
//! ```text
//! A_n(τ, m) = ∫_τ^{i∞} z^n e(m z) dz
//!           = -e(m τ) sum_{j=0..n} (n!/(n-j)!) τ^{n-j} / (2πim)^{j+1}
//! ```
//!
//! (integration by parts). Critical values `r_{f,n} = ∫_0^∞ f(it) t^n dt`
//! use the split `∫_1^∞ f(it)(t^n + i^k t^{k-2-n}) dt`, which the
//! substitution `t -> 1/t` and `f(-1/(it)) = (it)^k f(it)` justify; each
//! term is a finite incomplete-gamma sum. The period polynomial
//! `r_f = sum_n i^{1-n} binom(k-2, n) r_{f,n} X^{k-2-n}` is the value at
//! `S` of a parabolic cocycle, with `r_f = r_f^- + i r_f^+`.

use crate::algebra::{pair_bb, sym_act, GroupElem, PolyC};
use crate::cocycle::ParabolicCocycle;
use crate::num::{binomial_f, factorial_f, pi, two_pi_i, MpComplex};
use crate::qseries::QSeries;
use crate::{Error, Result};
use rug::{ops::Pow, Float};

/// Critical values and period polynomial of a cusp form.
#[derive(Clone, Debug)]
pub struct PeriodData {
    pub weight: i64,
    /// `r_{f,n}` for `n = 0..=k-2`.
    pub numbers: Vec<MpComplex>,
    /// `r_f`, degree bound `k-2`.
    pub polynomial: PolyC,
    /// Even part `r_f^+` (only even X-powers populated).
    pub plus: PolyC,
    /// Odd part `r_f^-` (only odd X-powers populated).
    pub minus: PolyC,
}

/// `A_n(τ, m)`, the tail primitive above. `m >= 1`.
pub fn tail_primitive(n: u32, m: i64, tau: &MpComplex) -> Result<MpComplex> {
    if m <= 0 {
        return Err(Error::InvalidParameter(format!("frequency must be positive, got {m}")));
    }
    let prec = tau.prec();
    let e_m_tau = tau.scale_i64(m).e_tau();
    let inv_2pim = two_pi_i(prec).scale_i64(m).inv();
    let mut sum = MpComplex::new(prec);
    // (-1)^j (n!/(n-j)!) τ^{n-j} (2πim)^{-(j+1)}
    let mut falling = Float::with_val(prec, 1);
    let mut pow_denom = inv_2pim.clone();
    for j in 0..=n {
        let term = tau.powi((n - j) as i64).scale(&falling);
        let term = &term * &pow_denom;
        if j % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        falling *= n - j;
        pow_denom = &pow_denom * &inv_2pim;
    }
    Ok(-(&e_m_tau * &sum))
}

/// Table of `A_n(τ, m)` for `n <= max_power`, `1 <= m <= max_freq`,
/// filled by the recurrence
/// `A_n = (-τ^n e(mτ) - n A_{n-1}) / (2πim)`.
pub struct TailTable {
    /// `a[m - 1][n]`
    a: Vec<Vec<MpComplex>>,
}

impl TailTable {
    pub fn new(tau: &MpComplex, max_power: u32, max_freq: usize) -> Self {
        let prec = tau.prec();
        let q = tau.e_tau();
        let tau_pows: Vec<MpComplex> = {
            let mut v = Vec::with_capacity(max_power as usize + 1);
            v.push(MpComplex::one(prec));
            for _ in 1..=max_power {
                v.push(v.last().unwrap() * tau);
            }
            v
        };
        let two_pi_i_ = two_pi_i(prec);
        let mut a = Vec::with_capacity(max_freq);
        let mut q_pow = MpComplex::one(prec);
        for m in 1..=max_freq {
            q_pow = &q_pow * &q; // e(m τ)
            let inv = two_pi_i_.scale_i64(m as i64).inv();
            let mut row = Vec::with_capacity(max_power as usize + 1);
            let mut prev = -(&q_pow * &inv);
            row.push(prev.clone());
            for n in 1..=max_power {
                let mut num = -(&tau_pows[n as usize] * &q_pow);
                num -= &prev.scale_i64(n as i64);
                prev = &num * &inv;
                row.push(prev.clone());
            }
            a.push(row);
        }
        TailTable { a }
    }

    pub fn get(&self, power: u32, freq: usize) -> &MpComplex {
        &self.a[freq - 1][power as usize]
    }
}

fn require_cuspidal(f: &QSeries) -> Result<()> {
    if !f.is_cuspidal() {
        return Err(Error::NotCuspidal);
    }
    if f.weight < 4 || f.weight % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "weight must be even and at least 4, got {}",
            f.weight
        )));
    }
    Ok(())
}

/// `I_f(τ; X)`, degree bound `k - 2`.
pub fn eichler_i(f: &QSeries, tau: &MpComplex) -> Result<PolyC> {
    require_cuspidal(f)?;
    let table = TailTable::new(tau, (f.weight - 2) as u32, f.trunc());
    Ok(eichler_i_with_table(f, &table))
}

pub(crate) fn eichler_i_with_table(f: &QSeries, table: &TailTable) -> PolyC {
    let k = f.weight;
    let d = (k - 2) as usize;
    let prec = f.prec();
    let mut out = PolyC::zero(prec, d);
    // (X - z)^{k-2} = sum_j binom(k-2, j) X^{k-2-j} (-z)^j
    for j in 0..=d {
        let mut acc = MpComplex::new(prec);
        for m in 1..=f.trunc() {
            if f.coeffs[m].is_zero() {
                continue;
            }
            acc += &(&f.coeffs[m] * table.get(j as u32, m));
        }
        let mut coef = acc.scale(&binomial_f(prec, d as u32, j as u32));
        if j % 2 == 1 {
            coef = -coef;
        }
        out.coeffs[d - j] = coef;
    }
    out
}

/// `ε_f(τ) = I_f(τ; τ)`.
pub fn eichler_scalar(f: &QSeries, tau: &MpComplex) -> Result<MpComplex> {
    Ok(eichler_i(f, tau)?.eval(tau))
}

/// Incomplete gamma of integer order:
/// `Γ(s+1, x) = s! e^{-x} sum_{j<=s} x^j / j!`.
pub fn incomplete_gamma_int(s: u32, x: &Float) -> Float {
    let prec = x.prec();
    let mut sum = Float::with_val(prec, 1);
    let mut term = Float::with_val(prec, 1);
    for j in 1..=s {
        term *= x;
        term /= j;
        sum += &term;
    }
    let e = (-x.clone()).exp();
    factorial_f(prec, s) * e * sum
}

/// `∫_1^∞ f(it) t^s dt = sum_m c_m Γ(s+1, 2πm) / (2πm)^{s+1}`.
fn upper_moment(f: &QSeries, s: u32) -> MpComplex {
    let prec = f.prec();
    let two_pi = crate::num::pi(prec) * 2;
    let mut acc = MpComplex::new(prec);
    for m in 1..=f.trunc() {
        if f.coeffs[m].is_zero() {
            continue;
        }
        let x = Float::with_val(prec, &two_pi) * m as u32;
        let g = incomplete_gamma_int(s, &x) / x.pow(s + 1);
        acc += &f.coeffs[m].scale(&g);
    }
    acc
}

/// Critical values `r_{f,n}` and the period polynomial with its parts.
pub fn periods(f: &QSeries) -> Result<PeriodData> {
    require_cuspidal(f)?;
    let k = f.weight;
    let d = (k - 2) as usize;
    let prec = f.prec();
    // i^k = (-1)^{k/2} for even k
    let i_to_k = if (k / 2) % 2 == 0 { 1i64 } else { -1 };
    let mut numbers = Vec::with_capacity(d + 1);
    for n in 0..=d {
        let direct = upper_moment(f, n as u32);
        let reflected = upper_moment(f, (d - n) as u32).scale_i64(i_to_k);
        numbers.push(&direct + &reflected);
    }
    let mut polynomial = PolyC::zero(prec, d);
    let mut plus = PolyC::zero(prec, d);
    let mut minus = PolyC::zero(prec, d);
    for n in 0..=d {
        let b = binomial_f(prec, d as u32, n as u32);
        let scaled = numbers[n].scale(&b);
        // i^{1-n}
        let rot = match (1i64 - n as i64).rem_euclid(4) {
            0 => scaled.clone(),
            1 => scaled.mul_i(),
            2 => -&scaled,
            _ => -scaled.mul_i(),
        };
        polynomial.coeffs[d - n] = rot;
        if n % 2 == 0 {
            let sign = if (n / 2) % 2 == 0 { 1 } else { -1 };
            plus.coeffs[d - n] = scaled.scale_i64(sign);
        } else {
            let sign = if ((n - 1) / 2) % 2 == 0 { 1 } else { -1 };
            minus.coeffs[d - n] = scaled.scale_i64(sign);
        }
    }
    Ok(PeriodData { weight: k, numbers, polynomial, plus, minus })
}

/// The parabolic cocycle with value `r_f` at `S`.
pub fn phi_if(f: &QSeries, tol: f64) -> Result<ParabolicCocycle> {
    let data = periods(f)?;
    ParabolicCocycle::new(data.polynomial, tol)
}

/// Definition-based evaluation `φ_{I_f}(γ) = I_f(τ) - sym(γ) I_f(γ^{-1} τ)`
/// at an interior base point; independent of `τ`.
pub fn phi_if_via_integral(f: &QSeries, gamma: &GroupElem, tau: &MpComplex) -> Result<PolyC> {
    let here = eichler_i(f, tau)?;
    let there = eichler_i(f, &gamma.inv().apply(tau))?;
    Ok(here.sub(&sym_act(gamma, &there)))
}

/// Fourier expansion of `I_f` over the periodic basis `u = X - τ`:
/// `I_f(τ; X) = sum_{n>=1} c_n(u) e(nτ)` with
/// `[u^{d-j}] c_n = binom(d,j) (-1)^j i^{j+1} j! (2πn)^{-(j+1)} a_n(f)`,
/// from `∫_τ^{i∞} (z-τ)^j e(nz) dz = e(nτ) i^{j+1} j! (2πn)^{-(j+1)}`.
pub fn eichler_i_u_qcoeffs(f: &QSeries, trunc_out: usize) -> Result<Vec<PolyC>> {
    require_cuspidal(f)?;
    if f.trunc() < trunc_out {
        return Err(Error::InvalidParameter(format!(
            "need truncation at least {trunc_out}"
        )));
    }
    let k = f.weight;
    let d = (k - 2) as usize;
    let prec = f.prec();
    let two_pi = pi(prec) * 2;
    let mut out = vec![PolyC::zero(prec, d); trunc_out + 1];
    for n in 1..=trunc_out {
        if f.coeffs[n].is_zero() {
            continue;
        }
        let base = Float::with_val(prec, &two_pi) * n as u32;
        for j in 0..=d {
            // i^{j+1} (-1)^j = i^{1-j}
            let mut c = match (1i64 - j as i64).rem_euclid(4) {
                0 => f.coeffs[n].clone(),
                1 => f.coeffs[n].mul_i(),
                2 => -&f.coeffs[n],
                _ => -f.coeffs[n].mul_i(),
            };
            let w = factorial_f(prec, j as u32) / base.clone().pow(j as u32 + 1);
            c = c.scale(&w).scale(&binomial_f(prec, d as u32, j as u32));
            out[n].coeffs[d - j] = c;
        }
    }
    Ok(out)
}

/// Petersson product recovered from period polynomials:
/// `<<r_f, conj(r_g)>> = -6 (2i)^{k-1} (f, g)`.
pub fn haberland(f: &QSeries, g: &QSeries) -> Result<MpComplex> {
    if f.weight != g.weight {
        return Err(Error::WeightMismatch(f.weight, g.weight));
    }
    require_cuspidal(f)?;
    require_cuspidal(g)?;
    let prec = f.prec();
    let k = f.weight;
    let rf = periods(f)?.polynomial;
    let rg = periods(g)?.polynomial;
    let form = pair_bb(&rf, &rg.conj())?;
    // -6 (2i)^{k-1}
    let two_i = MpComplex::from_f64(prec, 0.0, 2.0);
    let denom = two_i.powi(k - 1).scale_i64(-6);
    Ok(&form / &denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::{basis, delta_q};

    const P: u32 = 128;

    #[test]
    fn tail_primitive_base_case() {
        let tau = MpComplex::from_f64(P, 0.25, 1.5);
        for m in [1, 3] {
            let a0 = tail_primitive(0, m, &tau).unwrap();
            let expect = -(&tau.scale_i64(m).e_tau() * &two_pi_i(P).scale_i64(m).inv());
            assert!((&a0 - &expect).abs_f64() < 1e-35);
        }
        assert!(tail_primitive(2, 0, &tau).is_err());
    }

    #[test]
    fn tail_primitive_recurrence() {
        let tau = MpComplex::from_f64(P, -0.3, 0.9);
        let m = 2i64;
        let inv = two_pi_i(P).scale_i64(m).inv();
        let e_m_tau = tau.scale_i64(m).e_tau();
        for n in 1..=20u32 {
            let lhs = tail_primitive(n, m, &tau).unwrap();
            let mut rhs = -(&tau.powi(n as i64) * &e_m_tau);
            rhs -= &tail_primitive(n - 1, m, &tau).unwrap().scale_i64(n as i64);
            rhs = &rhs * &inv;
            let scale = lhs.abs_f64().max(1e-300);
            assert!((&lhs - &rhs).abs_f64() < 1e-30 * scale, "n = {n}");
        }
    }

    #[test]
    fn tail_table_matches_direct() {
        let tau = MpComplex::from_f64(P, 0.1, 1.1);
        let table = TailTable::new(&tau, 12, 8);
        for n in [0u32, 1, 5, 12] {
            for m in [1usize, 2, 8] {
                let direct = tail_primitive(n, m as i64, &tau).unwrap();
                let tabled = table.get(n, m);
                let scale = direct.abs_f64().max(1e-300);
                assert!((&direct - tabled).abs_f64() < 1e-30 * scale);
            }
        }
    }

    #[test]
    fn eichler_integral_decays_at_the_cusp() {
        let f = delta_q(64, P);
        let deep = MpComplex::from_f64(P, 0.0, 20.0);
        let val = eichler_i(&f, &deep).unwrap();
        assert!(val.norm_f64() < 1e-40);
        let scalar = eichler_scalar(&f, &deep).unwrap();
        assert!(scalar.abs_f64() < 1e-38);
    }

    #[test]
    fn eichler_scalar_is_diagonal_value() {
        let f = delta_q(64, P);
        let tau = MpComplex::from_f64(P, 0.3, 1.0);
        let poly = eichler_i(&f, &tau).unwrap();
        let lhs = eichler_scalar(&f, &tau).unwrap();
        assert!((&lhs - &poly.eval(&tau)).abs_f64() < 1e-35);
    }

    #[test]
    fn non_cusp_form_rejected() {
        let e4 = crate::qseries::eisenstein_q(4, 16, P).unwrap();
        let tau = MpComplex::from_f64(P, 0.0, 1.0);
        assert!(eichler_i(&e4, &tau).is_err());
        assert!(periods(&e4).is_err());
    }

    #[test]
    fn incomplete_gamma_values() {
        // Γ(1, x) = e^{-x}; Γ(3, x) = 2 e^{-x} (1 + x + x^2/2)
        let x = Float::with_val(P, 1.7);
        let g1 = incomplete_gamma_int(0, &x);
        let expect = Float::with_val(P, -1.7).exp();
        assert!((g1 - &expect).abs().to_f64() < 1e-35);
        let g3 = incomplete_gamma_int(2, &x);
        let poly = 1.0 + 1.7 + 1.7 * 1.7 / 2.0;
        assert!((g3.to_f64() - 2.0 * expect.to_f64() * poly).abs() < 1e-14);
    }

    #[test]
    fn period_polynomial_structure() {
        let f = delta_q(64, P);
        let data = periods(&f).unwrap();
        assert_eq!(data.numbers.len(), 11);
        // plus has only even powers, minus only odd
        for i in 0..=10 {
            if i % 2 == 1 {
                assert!(data.plus.coeffs[i].is_zero());
            } else {
                assert!(data.minus.coeffs[i].is_zero());
            }
        }
        // r = r^- + i r^+
        let recon = data.minus.add(&data.plus.scale(&MpComplex::i(P)));
        assert!(recon.sub(&data.polynomial).norm_f64() < 1e-30 * data.polynomial.norm_f64());
        // critical values of Δ are real and the first is positive
        for r in &data.numbers {
            assert!(r.im.to_f64().abs() < 1e-30);
        }
        assert!(data.numbers[0].re.to_f64() > 0.0);
    }

    #[test]
    fn period_polynomial_satisfies_relations() {
        let f = delta_q(64, P);
        let data = periods(&f).unwrap();
        let residual = ParabolicCocycle::relation_residual(&data.polynomial);
        assert!(residual < 1e-25 * data.polynomial.norm_f64(), "residual {residual}");
        // and the cocycle constructor accepts it
        let phi = phi_if(&f, 1e-9).unwrap();
        assert!(phi.eval(&GroupElem::t()).norm_f64() < 1e-30);
        let at_s = phi.eval(&GroupElem::s());
        assert!(at_s.sub(&data.polynomial).norm_f64() < 1e-30);
    }

    #[test]
    fn periods_match_integral_cocycle() {
        // r_f = I_f - sym(S) I_f(S^{-1} ·) evaluated at τ = i
        let f = delta_q(64, P);
        let tau = MpComplex::i(P);
        let via_integral = phi_if_via_integral(&f, &GroupElem::s(), &tau).unwrap();
        let r = periods(&f).unwrap().polynomial;
        let err = via_integral.sub(&r).norm_f64() / r.norm_f64();
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn boundary_element_pairs_to_zero_with_periods() {
        // e = X^d - 1 has vanishing <<e, .>> against period polynomials
        let f = delta_q(64, P);
        let r = periods(&f).unwrap().polynomial;
        let mut e = PolyC::zero(P, 10);
        e.coeffs[10] = MpComplex::one(P);
        e.coeffs[0] = -MpComplex::one(P);
        let v = pair_bb(&e, &r).unwrap();
        assert!(v.abs_f64() < 1e-25 * r.norm_f64());
    }

    #[test]
    fn haberland_positive_and_hermitian() {
        let f = delta_q(64, P);
        let h = haberland(&f, &f).unwrap();
        assert!(h.re.to_f64() > 0.0);
        assert!(h.im.to_f64().abs() < 1e-9 * h.re.to_f64());
        // Hermitian symmetry on the weight-24 pair
        let b = basis(24, true, 64, P);
        let fg = haberland(&b[0], &b[1]).unwrap();
        let gf = haberland(&b[1], &b[0]).unwrap();
        assert!((&fg - &gf.conj()).abs_f64() < 1e-9 * (1.0 + fg.abs_f64()));
    }

    #[test]
    fn definition_cocycle_matches_periods_cocycle() {
        let f = delta_q(64, P);
        let phi = phi_if(&f, 1e-9).unwrap();
        let tau = MpComplex::from_f64(P, 0.0, 2.0);
        for gamma in [
            GroupElem::u(),
            GroupElem::s().mul(&GroupElem::t_pow(-2)),
            GroupElem::t_pow(3).mul(&GroupElem::s()).mul(&GroupElem::t_pow(2)),
        ] {
            let via_integral = phi_if_via_integral(&f, &gamma, &tau).unwrap();
            let via_word = phi.eval(&gamma);
            let err = via_integral.sub(&via_word).norm_f64();
            assert!(err < 1e-8 * (1.0 + via_word.norm_f64()), "err {err}");
        }
    }
}
