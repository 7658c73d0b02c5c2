//! Depth-two iterated Eichler integrals and the vector-valued modular
//! forms they assemble into.
//!
//! `I_{f,g}(τ; X, Y) = ∫_τ^{i∞} f(z) (X-z)^{k-2} I_g(z; Y) dz` and its
//! scalar companion `ε_{f,g}(τ) = ∫_τ^{i∞} f(z) ε_g(z) dz` are computed
//! in closed form: every `Y`-coefficient of `I_g(z; Y)` is a finite sum
//! of terms `coeff · z^a e(m z)` (an [`ElementaryTermSum`]), multiplying
//! by `f` adds frequencies, and each `z^a e(M z)` re-integrates through
//! the tail primitives of [`crate::eichler`].
//!
//! Values attached to group elements (`ψ̃`, `ψ`) are computed from
//! interior-point identities only; no path ever runs into a cusp other
//! than `i∞`:
//!
//! ```text
//! ψ̃(γ)  = (I_{f,g}|(1-γ^{-1}))(τ) - φ_{I_g}(γ;Y)·(sym(γ) I_f)(γ^{-1}τ)
//! ψ(γ)  = ε_{f,g}(τ) - ε_{f,g}(γ^{-1}τ) + φ_{I_g}^v(γ)[I_f(γ^{-1}τ)]
//! ```
//!
//! both independent of the base point `τ`.

use crate::algebra::{contract, sym_act, sym_act_xy, GroupElem, PolyC, PolyCC};
use crate::cocycle::{dual_row_entry, sym_matrix, AdmissiblePair, BlockRep, CMatrix};
use crate::eichler::{eichler_i, eichler_scalar, phi_if, TailTable};
use crate::num::{binomial_f, factorial_f, two_pi_i, Cplx, MpComplex};
use crate::qseries::QSeries;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Canonical form `sum coeff · z^power · e(freq z)` with `freq >= 1`;
/// duplicate `(power, freq)` keys merge eagerly.
#[derive(Clone, Debug, Default)]
pub struct ElementaryTermSum {
    terms: BTreeMap<(u32, usize), MpComplex>,
}

impl ElementaryTermSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, power: u32, freq: usize, coeff: MpComplex) {
        assert!(freq >= 1, "cuspidal inputs guarantee frequencies >= 1");
        if coeff.is_zero() {
            return;
        }
        self.terms
            .entry((power, freq))
            .and_modify(|c| *c += &coeff)
            .or_insert(coeff);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, usize), &MpComplex)> {
        self.terms.iter()
    }

    /// Multiply each term by `z^extra`.
    pub fn shift_power(&self, extra: u32) -> Self {
        let mut out = Self::new();
        for (&(a, m), c) in &self.terms {
            out.terms.insert((a + extra, m), c.clone());
        }
        out
    }

    /// Multiply by a cuspidal q-series; frequencies add and terms beyond
    /// `max_freq` are dropped.
    pub fn mul_series(&self, f: &QSeries, max_freq: usize) -> Self {
        let mut out = Self::new();
        for (&(a, m1), c) in &self.terms {
            if m1 + 1 > max_freq {
                continue;
            }
            for m2 in 1..=(max_freq - m1).min(f.trunc()) {
                if f.coeffs[m2].is_zero() {
                    continue;
                }
                out.push(a, m1 + m2, c * &f.coeffs[m2]);
            }
        }
        out
    }

    /// Evaluate the sum at a point of the upper half-plane.
    pub fn eval(&self, z: &MpComplex) -> MpComplex {
        let prec = z.prec();
        let q = z.e_tau();
        let mut acc = MpComplex::new(prec);
        // terms iterate by (power, freq); freq ascends within each power
        // group and rewinds between groups
        let mut q_pow = MpComplex::one(prec);
        let mut cur_m = 0usize;
        for (&(a, m), c) in &self.terms {
            if m < cur_m {
                q_pow = q.powi(m as i64);
            } else {
                while cur_m < m {
                    q_pow = &q_pow * &q;
                    cur_m += 1;
                }
            }
            cur_m = m;
            acc += &(&(c * &z.powi(a as i64)) * &q_pow);
        }
        acc
    }

    /// `∫_τ^{i∞}` of the sum, every term in closed form.
    pub fn integrate(&self, table: &TailTable) -> MpComplex {
        let mut acc = match self.terms.values().next() {
            Some(c) => MpComplex::new(c.prec()),
            None => return MpComplex::new(53),
        };
        for (&(a, m), c) in &self.terms {
            acc += &(c * table.get(a, m));
        }
        acc
    }

    pub fn max_power(&self) -> u32 {
        self.terms.keys().map(|&(a, _)| a).max().unwrap_or(0)
    }

    pub fn max_freq(&self) -> usize {
        self.terms.keys().map(|&(_, m)| m).max().unwrap_or(1)
    }
}

fn require_pair(f: &QSeries, g: &QSeries) -> Result<()> {
    if f.weight != g.weight {
        return Err(Error::WeightMismatch(f.weight, g.weight));
    }
    if !f.is_cuspidal() || !g.is_cuspidal() {
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

/// The `Y^{d-j}`-coefficients of `I_g(z; Y)` as elementary term sums,
/// indexed by `j = 0..=d`: expanding the binomial and the tail
/// primitive,
/// `[Y^{d-j}] I_g = -binom(d,j) sum_{m,t} (-1)^{j+t} (j!/(j-t)!) c_m
///                   z^{j-t} e(m z) / (2πim)^{t+1}`.
pub fn eichler_term_sums(g: &QSeries) -> Result<Vec<ElementaryTermSum>> {
    if !g.is_cuspidal() {
        return Err(Error::NotCuspidal);
    }
    let d = (g.weight - 2) as usize;
    let prec = g.prec();
    let two_pi_i_ = two_pi_i(prec);
    let mut out = Vec::with_capacity(d + 1);
    for j in 0..=d {
        let mut ets = ElementaryTermSum::new();
        let b = binomial_f(prec, d as u32, j as u32);
        for m in 1..=g.trunc() {
            if g.coeffs[m].is_zero() {
                continue;
            }
            let inv = two_pi_i_.scale_i64(m as i64).inv();
            let mut pow_denom = inv.clone();
            let mut falling = rug::Float::with_val(prec, 1);
            for t in 0..=j {
                // coefficient of z^{j-t} e(mz)
                let mut coeff = (&g.coeffs[m] * &pow_denom).scale(&falling).scale(&b);
                if (j + t) % 2 == 0 {
                    coeff = -coeff;
                }
                ets.push((j - t) as u32, m, coeff);
                falling *= (j - t) as u32;
                pow_denom = &pow_denom * &inv;
            }
        }
        out.push(ets);
    }
    Ok(out)
}

/// Elementary-term form of the scalar integral `ε_g(z) = I_g(z; z)`.
pub fn scalar_eichler_term_sum(g: &QSeries) -> Result<ElementaryTermSum> {
    let d = (g.weight - 2) as usize;
    let sums = eichler_term_sums(g)?;
    let mut out = ElementaryTermSum::new();
    for (j, ets) in sums.iter().enumerate() {
        for (&(a, m), c) in ets.shift_power((d - j) as u32).iter() {
            out.push(a, m, c.clone());
        }
    }
    Ok(out)
}

/// `I_{f,g}(τ; X, Y)`, degree bound `k-2` in both variables.
pub fn eichler_ii(f: &QSeries, g: &QSeries, tau: &MpComplex) -> Result<PolyCC> {
    require_pair(f, g)?;
    let d = (f.weight - 2) as usize;
    let prec = f.prec().max(tau.prec());
    let max_freq = f.trunc() + g.trunc();
    let y_sums = eichler_term_sums(g)?;
    let f_sums: Vec<ElementaryTermSum> =
        y_sums.iter().map(|ets| ets.mul_series(f, max_freq)).collect();
    let table = TailTable::new(tau, 2 * d as u32, max_freq);
    let mut out = PolyCC::zero(prec, d);
    for (j, ets) in f_sums.iter().enumerate() {
        // X-expansion: (X-z)^{k-2} contributes binom(d,i) (-1)^i z^i X^{d-i}
        for i in 0..=d {
            let mut acc = MpComplex::new(prec);
            for (&(a, m), c) in ets.iter() {
                acc += &(c * table.get(a + i as u32, m));
            }
            let mut coef = acc.scale(&binomial_f(prec, d as u32, i as u32));
            if i % 2 == 1 {
                coef = -coef;
            }
            out.coeffs[d - i][d - j] = coef;
        }
    }
    Ok(out)
}

/// `ε_{f,g}(τ) = ∫_τ^{i∞} f(z) ε_g(z) dz`.
pub fn eichler_scalar_ii(f: &QSeries, g: &QSeries, tau: &MpComplex) -> Result<MpComplex> {
    require_pair(f, g)?;
    let max_freq = f.trunc() + g.trunc();
    let integrand = scalar_eichler_term_sum(g)?.mul_series(f, max_freq);
    let table = TailTable::new(tau, integrand.max_power(), integrand.max_freq());
    Ok(integrand.integrate(&table))
}

/// Fourier coefficients of `ε_{f,g}` through `e(n τ)`, `n <= trunc_out`,
/// together with the largest leftover coefficient of a term
/// `τ^p e(n τ)` with `p >= 1` (those cancel identically because the
/// function is 1-periodic, so the leftover is a pure consistency
/// diagnostic, relative to the largest retained coefficient).
pub fn epsilon_fg_qcoeffs(
    f: &QSeries,
    g: &QSeries,
    trunc_out: usize,
) -> Result<(Vec<MpComplex>, f64)> {
    require_pair(f, g)?;
    if f.trunc() < trunc_out || g.trunc() < trunc_out {
        return Err(Error::InvalidParameter(format!(
            "need operand truncation at least {trunc_out}"
        )));
    }
    let prec = f.prec();
    let integrand = scalar_eichler_term_sum(g)?.mul_series(f, trunc_out);
    let two_pi_i_ = two_pi_i(prec);
    // C[p][n]: coefficient of τ^p e(n τ)
    let d = (f.weight - 2) as usize;
    let mut table = vec![vec![MpComplex::new(prec); trunc_out + 1]; d + 1];
    for (&(a, m), c) in integrand.iter() {
        let inv = two_pi_i_.scale_i64(m as i64).inv();
        let mut pow_denom = inv.clone();
        let mut falling = rug::Float::with_val(prec, 1);
        // A_a(τ, m) = -e(mτ) sum_j (-1)^j (a!/(a-j)!) τ^{a-j} / (2πim)^{j+1}
        for j in 0..=a {
            let mut contrib = (c * &pow_denom).scale(&falling);
            if j % 2 == 0 {
                contrib = -contrib;
            }
            table[(a - j) as usize][m] += &contrib;
            falling *= a - j;
            pow_denom = &pow_denom * &inv;
        }
    }
    let scale = table[0].iter().map(|c| c.abs_f64()).fold(0.0f64, f64::max);
    let mut junk = 0.0f64;
    for row in table.iter().skip(1) {
        for c in row {
            junk = junk.max(c.abs_f64());
        }
    }
    Ok((table.swap_remove(0), junk / scale.max(f64::MIN_POSITIVE)))
}

/// Fourier coefficients of `ε_{f,g}` recovered from point samples on a
/// horizontal segment: `ε` is 1-periodic and decays at `i∞`, so sampling
/// at `τ_j = j/M + i y0` (`M = 2 (trunc+1)` points) and taking a
/// discrete Fourier transform isolates each frequency with aliasing
/// error of order `e^{-2π M y0}`.
pub fn epsilon_fg_qcoeffs_sampled(
    f: &QSeries,
    g: &QSeries,
    trunc_out: usize,
    y0: f64,
) -> Result<Vec<MpComplex>> {
    require_pair(f, g)?;
    let prec = f.prec();
    let m = 2 * (trunc_out + 1);
    let mut samples = Vec::with_capacity(m);
    for jj in 0..m {
        let tau = &MpComplex::from_f64(prec, 0.0, y0)
            + &MpComplex::from_ratio(&MpComplex::new(prec), jj as i64, m as i64);
        samples.push(eichler_scalar_ii(f, g, &tau)?);
    }
    let model = MpComplex::new(prec);
    let mut out = Vec::with_capacity(trunc_out + 1);
    for n in 0..=trunc_out {
        let mut acc = MpComplex::new(prec);
        for (jj, v) in samples.iter().enumerate() {
            let phase = MpComplex::e_frac(&model, -((n * jj) as i64).rem_euclid(m as i64), m as i64);
            acc += &(v * &phase);
        }
        acc = acc.scale_f64(1.0 / m as f64);
        // undo the e(n i y0) damping
        let mut lift: rug::Float = crate::num::pi(prec);
        lift *= 2 * n as u32;
        lift *= rug::Float::with_val(prec, y0);
        let lift = lift.exp();
        out.push(acc.scale(&lift));
    }
    Ok(out)
}

/// Default interior base point for group-element values.
fn default_base_point(prec: u32) -> MpComplex {
    MpComplex::i(prec)
}

/// `ψ̃_{f,g}(γ)` from the interior-point identity; `τ0 = i` when absent.
pub fn psi_tilde(
    f: &QSeries,
    g: &QSeries,
    gamma: &GroupElem,
    base: Option<&MpComplex>,
) -> Result<PolyCC> {
    require_pair(f, g)?;
    let prec = f.prec();
    let tau = base.cloned().unwrap_or_else(|| default_base_point(prec));
    let tau_back = gamma.inv().apply(&tau);
    let here = eichler_ii(f, g, &tau)?;
    let there = eichler_ii(f, g, &tau_back)?;
    let moved = sym_act_xy(gamma, &there);
    // φ(γ) I_f(γ^{-1}τ) = (sym(γ) I_f(γ^{-1}τ))(X) · φ_{I_g}(γ)(Y)
    let phi_g = phi_if(g, 1e-6)?;
    let i_f_back = eichler_i(f, &tau_back)?;
    let correction = PolyCC::outer(&sym_act(gamma, &i_f_back), &phi_g.eval(gamma));
    Ok(here.sub(&moved).sub(&correction))
}

/// `ψ_{f,g}(γ)` from the interior-point identity; `τ0 = i` when absent.
pub fn psi_scalar(
    f: &QSeries,
    g: &QSeries,
    gamma: &GroupElem,
    base: Option<&MpComplex>,
) -> Result<MpComplex> {
    require_pair(f, g)?;
    let prec = f.prec();
    let tau = base.cloned().unwrap_or_else(|| default_base_point(prec));
    let tau_back = gamma.inv().apply(&tau);
    let here = eichler_scalar_ii(f, g, &tau)?;
    let there = eichler_scalar_ii(f, g, &tau_back)?;
    let phi_g = phi_if(g, 1e-6)?;
    let dual = crate::algebra::pair(&phi_g.eval(&gamma.inv()), &eichler_i(f, &tau_back)?)?;
    Ok(&(&here - &there) + &dual)
}

/// The admissible pair `(φ_{I_f}, -φ_{I_g})` whose extension carries
/// `(ε_{f,g}, I_f, 1)`.
pub fn depth2_pair(f: &QSeries, g: &QSeries, tol: f64) -> Result<AdmissiblePair> {
    let phi_f = phi_if(f, tol)?;
    let phi_g = phi_if(g, tol)?;
    AdmissiblePair::new(phi_f, phi_g.neg(), tol)
}

/// Block matrix of the large extension at `γ`, of size
/// `(k-1)^2 + (k-1) + 1`, blocks `(sym⊗sym, φ_{I_g}·sym, ψ̃; sym, φ_{I_f}; 1)`.
pub fn rho_tilde_matrix(f: &QSeries, g: &QSeries, gamma: &GroupElem) -> Result<BlockRep> {
    require_pair(f, g)?;
    let d = (f.weight - 2) as usize;
    let w = d + 1;
    let prec = f.prec();
    let n = w * w + w + 1;
    let mut m = CMatrix::zero(prec, n, n);
    let sym = sym_matrix(gamma, d, prec);
    // top-left: sym ⊗ sym over the basis X^i Y^j, flat index i*w + j
    for i in 0..w {
        for ip in 0..w {
            if sym.get(i, ip).is_zero() {
                continue;
            }
            for j in 0..w {
                for jp in 0..w {
                    let v = sym.get(i, ip) * sym.get(j, jp);
                    m.set(i * w + j, ip * w + jp, v);
                }
            }
        }
    }
    // top-middle: column j' holds sym(γ)X^{j'} ⊗ φ_{I_g}(γ)
    let phi_g = phi_if(g, 1e-6)?;
    let pg = phi_g.eval(gamma);
    for jp in 0..w {
        for i in 0..w {
            if sym.get(i, jp).is_zero() {
                continue;
            }
            for j in 0..w {
                let v = sym.get(i, jp) * &pg.coeffs[j];
                m.set(i * w + j, w * w + jp, v);
            }
        }
    }
    // top-right: ψ̃(γ)
    let pt = psi_tilde(f, g, gamma, None)?;
    for i in 0..w {
        for j in 0..w {
            m.set(i * w + j, n - 1, pt.coeffs[i][j].clone());
        }
    }
    // middle block and its right column
    let phi_f = phi_if(f, 1e-6)?;
    let pf = phi_f.eval(gamma);
    for i in 0..w {
        for j in 0..w {
            m.set(w * w + i, w * w + j, sym.get(i, j).clone());
        }
        m.set(w * w + i, n - 1, pf.coeffs[i].clone());
    }
    m.set(n - 1, n - 1, MpComplex::one(prec));
    Ok(BlockRep { block_sizes: (w * w, w, 1), mat: m })
}

/// Which triple a transformation check exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VvmfVariant {
    /// `(I_{f,g}, I_f, 1)` under the large extension.
    Full,
    /// `(ε_{f,g}, I_f, 1)` under the contracted extension.
    Contracted,
}

/// Residuals of a modularity check at one `(γ, τ)`.
#[derive(Clone, Copy, Debug)]
pub struct VvmfReport {
    /// `‖ρ(γ^{-1}) F(γτ) - F(τ)‖_2`.
    pub transformation: f64,
    /// `|π(I_{f,g}(τ)) - ε_{f,g}(τ)|`: the pushforward sends the full
    /// triple to the contracted one.
    pub contraction: f64,
}

/// Check the weight-0 invariance `ρ(γ^{-1}) F(γτ) = F(τ)` of the
/// requested triple, and the contraction intertwining at `τ`.
pub fn vvmf_check(
    f: &QSeries,
    g: &QSeries,
    gamma: &GroupElem,
    tau: &MpComplex,
    variant: VvmfVariant,
) -> Result<VvmfReport> {
    require_pair(f, g)?;
    let prec = f.prec().max(tau.prec());
    let gamma_tau = gamma.apply(tau);
    let contraction = {
        let full = eichler_ii(f, g, tau)?;
        let scalar = eichler_scalar_ii(f, g, tau)?;
        (&contract(&full) - &scalar).abs_f64()
    };
    let transformation = match variant {
        VvmfVariant::Full => {
            let rho = rho_tilde_matrix(f, g, &gamma.inv())?;
            let here = triple_full(f, g, tau, prec)?;
            let there = triple_full(f, g, &gamma_tau, prec)?;
            let moved = rho.mat.mul_vec(&there);
            l2_distance(&moved, &here)
        }
        VvmfVariant::Contracted => {
            let pair = depth2_pair(f, g, 1e-6)?;
            let rho = pair.rho_matrix(&gamma.inv());
            let here = triple_contracted(f, g, tau, prec)?;
            let there = triple_contracted(f, g, &gamma_tau, prec)?;
            let moved = rho.mat.mul_vec(&there);
            l2_distance(&moved, &here)
        }
    };
    Ok(VvmfReport { transformation, contraction })
}

/// `(I_{f,g}, I_f, 1)` flattened at `τ`.
pub fn triple_full(
    f: &QSeries,
    g: &QSeries,
    tau: &MpComplex,
    prec: u32,
) -> Result<Vec<MpComplex>> {
    let d = (f.weight - 2) as usize;
    let w = d + 1;
    let top = eichler_ii(f, g, tau)?;
    let mid = eichler_i(f, tau)?;
    let mut v = Vec::with_capacity(w * w + w + 1);
    for i in 0..w {
        for j in 0..w {
            v.push(top.coeffs[i][j].clone());
        }
    }
    v.extend(mid.coeffs.iter().cloned());
    v.push(MpComplex::one(prec));
    Ok(v)
}

/// `(ε_{f,g}, I_f, 1)` at `τ`.
pub fn triple_contracted(
    f: &QSeries,
    g: &QSeries,
    tau: &MpComplex,
    prec: u32,
) -> Result<Vec<MpComplex>> {
    let mut v = vec![eichler_scalar_ii(f, g, tau)?];
    v.extend(eichler_i(f, tau)?.coeffs.iter().cloned());
    v.push(MpComplex::one(prec));
    Ok(v)
}

fn l2_distance(a: &[MpComplex], b: &[MpComplex]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d.abs_f64().powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Contraction intertwines the off-diagonal blocks:
/// `π ∘ (φ_{I_g}(γ)·sym(γ)) = -φ_{I_g}^v(γ)` as functionals on `C[X]_d`.
/// Returns the worst deviation over the supplied test vectors.
pub fn contraction_operator_residual(
    g: &QSeries,
    gamma: &GroupElem,
    vectors: &[PolyC],
) -> Result<f64> {
    let phi_g = phi_if(g, 1e-6)?;
    let pg = phi_g.eval(gamma);
    let pg_inv = phi_g.eval(&gamma.inv());
    let mut worst = 0.0f64;
    for v in vectors {
        let lhs = contract(&PolyCC::outer(&sym_act(gamma, v), &pg));
        let rhs = -crate::algebra::pair(&pg_inv, v)?;
        worst = worst.max((&lhs - &rhs).abs_f64());
    }
    Ok(worst)
}

/// Row vector of `φ^v`-type entries used by serializers and the CLI.
pub fn dual_row(q: &PolyC) -> Vec<MpComplex> {
    (0..=q.degree_bound()).map(|j| dual_row_entry(q, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eichler::eichler_scalar;
    use crate::qseries::delta_q;

    const P: u32 = 128;

    fn delta() -> QSeries {
        delta_q(64, P)
    }

    #[test]
    fn term_sums_reproduce_scalar_integral() {
        let g = delta();
        let z = MpComplex::from_f64(P, 0.2, 1.1);
        let ets = scalar_eichler_term_sum(&g).unwrap();
        let via_terms = ets.eval(&z);
        let direct = eichler_scalar(&g, &z).unwrap();
        let scale = direct.abs_f64().max(1e-300);
        assert!((&via_terms - &direct).abs_f64() < 1e-25 * scale);
    }

    #[test]
    fn term_sums_reproduce_polynomial_integral() {
        let g = delta();
        let z = MpComplex::from_f64(P, -0.1, 0.9);
        let sums = eichler_term_sums(&g).unwrap();
        let direct = crate::eichler::eichler_i(&g, &z).unwrap();
        for j in 0..=10usize {
            let via_terms = sums[j].eval(&z);
            let expect = &direct.coeffs[10 - j];
            let scale = expect.abs_f64().max(1e-300);
            assert!((&via_terms - expect).abs_f64() < 1e-25 * scale, "j = {j}");
        }
    }

    #[test]
    fn product_with_series_matches_pointwise() {
        let f = delta();
        let g = delta();
        let z = MpComplex::from_f64(P, 0.15, 1.3);
        let ets = scalar_eichler_term_sum(&g).unwrap();
        let prod = ets.mul_series(&f, 128);
        let lhs = prod.eval(&z);
        let rhs = &f.eval_at(&z).unwrap() * &ets.eval(&z);
        let scale = rhs.abs_f64().max(1e-300);
        assert!((&lhs - &rhs).abs_f64() < 1e-20 * scale);
    }

    #[test]
    fn deep_cusp_decay() {
        let f = delta();
        let tau = MpComplex::from_f64(P, 0.0, 15.0);
        let top = eichler_ii(&f, &f, &tau).unwrap();
        assert!(top.norm_f64() < 1e-30);
        let scalar = eichler_scalar_ii(&f, &f, &tau).unwrap();
        assert!(scalar.abs_f64() < 1e-30);
    }

    #[test]
    fn contraction_identity() {
        let f = delta();
        for tau in [MpComplex::i(P), MpComplex::from_f64(P, 0.25, 2.0)] {
            let report = vvmf_check(&f, &f, &GroupElem::t(), &tau, VvmfVariant::Full).unwrap();
            assert!(report.contraction < 1e-8, "contraction {}", report.contraction);
            assert!(report.transformation < 1e-10, "T-residual {}", report.transformation);
        }
    }

    #[test]
    fn psi_tilde_vanishes_on_t() {
        let f = delta();
        let v = psi_tilde(&f, &f, &GroupElem::t(), None).unwrap();
        assert!(v.norm_f64() < 1e-12);
    }

    #[test]
    fn psi_tilde_base_point_independent() {
        let f = delta();
        let gamma = GroupElem::s();
        let a = psi_tilde(&f, &f, &gamma, None).unwrap();
        let b2 = MpComplex::from_f64(P, 0.5, 1.5);
        let b = psi_tilde(&f, &f, &gamma, Some(&b2)).unwrap();
        let err = a.sub(&b).norm_f64();
        assert!(err < 1e-8 * (1.0 + a.norm_f64()), "err {err}");
    }

    #[test]
    fn psi_scalar_examples() {
        let f = delta();
        // parabolic elements vanish
        let v = psi_scalar(&f, &f, &GroupElem::t_pow(5), None).unwrap();
        assert!(v.abs_f64() < 1e-12);
        // value at S equals the admissible-pair seed
        let pair = depth2_pair(&f, &f, 1e-9).unwrap();
        let at_s = psi_scalar(&f, &f, &GroupElem::s(), None).unwrap();
        assert!((&at_s - pair.psi_at_s()).abs_f64() < 1e-9 * (1.0 + at_s.abs_f64()));
        // base-point independence
        let b2 = MpComplex::from_f64(P, 0.5, 1.5);
        let gamma = GroupElem::u();
        let a = psi_scalar(&f, &f, &gamma, None).unwrap();
        let b = psi_scalar(&f, &f, &gamma, Some(&b2)).unwrap();
        assert!((&a - &b).abs_f64() < 1e-9 * (1.0 + a.abs_f64()));
    }

    #[test]
    fn psi_scalar_matches_word_psi() {
        let f = delta();
        let pair = depth2_pair(&f, &f, 1e-9).unwrap();
        for gamma in [
            GroupElem::u(),
            GroupElem::s().mul(&GroupElem::t_pow(2)),
            GroupElem::t_pow(-1).mul(&GroupElem::s()).mul(&GroupElem::t_pow(3)),
        ] {
            let via_integrals = psi_scalar(&f, &f, &gamma, None).unwrap();
            let via_words = pair.psi_eval(&gamma);
            let err = (&via_integrals - &via_words).abs_f64();
            assert!(err < 1e-8 * (1.0 + via_words.abs_f64()), "err {err}");
        }
    }

    #[test]
    fn contraction_operator_identity() {
        let f = delta();
        let mut vectors = Vec::new();
        for i in 0..=10usize {
            vectors.push(PolyC::monomial(P, 10, i));
        }
        for gamma in [GroupElem::s(), GroupElem::u()] {
            let worst = contraction_operator_residual(&f, &gamma, &vectors).unwrap();
            assert!(worst < 1e-20, "worst {worst}");
        }
    }

    #[test]
    fn epsilon_coefficients_are_clean() {
        let f = delta();
        let (coeffs, junk) = epsilon_fg_qcoeffs(&f, &f, 24).unwrap();
        // periodicity forces all τ-power terms to cancel
        assert!(junk < 1e-25, "junk {junk}");
        // frequencies start at 2 for a product of two cusp forms
        assert!(coeffs[0].is_zero());
        assert!(coeffs[1].abs_f64() < 1e-30);
        assert!(coeffs[2].abs_f64() > 0.0);
        // the series reproduces ε_{f,g} at a sample point
        let tau = MpComplex::from_f64(P, 0.3, 1.4);
        let q = tau.e_tau();
        let mut acc = MpComplex::new(P);
        for c in coeffs.iter().rev() {
            acc = &acc * &q;
            acc += c;
        }
        let f64_ = delta_q(64, P);
        let direct = eichler_scalar_ii(&f64_, &f64_, &tau).unwrap();
        let err = (&acc - &direct).abs_f64() / direct.abs_f64();
        assert!(err < 1e-10, "relative error {err}");
    }
}

