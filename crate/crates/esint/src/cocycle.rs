//! Parabolic cocycles for `(1, sym^d)` and the three-step extension
//! representations built from admissible pairs.
//!
//! A parabolic cocycle `φ : SL2(Z) -> C[X]_d` vanishes on `±T^n` and is
//! determined by its value at `S`, subject to the two relations
//! `(1 + S).φ(S) = 0` and `(1 + U + U^2).φ(S) = 0` with `U = T S`.
//! Evaluation anywhere uses generator words and the cocycle relation
//! `φ(g1 g2) = g1.φ(g2) + φ(g1)`.
//!
//! A pair `(φ1, φ2)` with `<<φ1(S), φ2(S)>> = 0` is admissible; it then
//! carries a unique scalar companion `ψ` with `ψ(T) = 0`,
//! `ψ(S) = -1/2 φ2^v(S) φ1(S)` and
//! `ψ(g1 g2) = ψ(g1) + ψ(g2) + φ2^v(g1) φ1(g2)`, and the block matrices
//!
//! ```text
//!     [ 1   φ2^v(g)    ψ(g)  ]
//!     [ 0   sym^d(g)   φ1(g) ]
//!     [ 0   0          1     ]
//! ```
//!
//! define a representation on `C ⊕ C[X]_d ⊕ C`.

use crate::algebra::{pair, pair_bb, sym_act, GroupElem, PolyC, Word};
use crate::num::{binomial_f, MpComplex};
use crate::{Error, Result};
use rug::Float;

/// Parabolic cocycle stored by its value at `S`. Degree is even.
#[derive(Clone, Debug)]
pub struct ParabolicCocycle {
    value_at_s: PolyC,
}

impl ParabolicCocycle {
    /// Validate the relations `(1+S).v = 0` and `(1+U+U^2).v = 0` to the
    /// given relative tolerance and wrap the value.
    pub fn new(value_at_s: PolyC, tol: f64) -> Result<Self> {
        if value_at_s.degree_bound() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "cocycle degree must be even, got {}",
                value_at_s.degree_bound()
            )));
        }
        let scale = value_at_s.norm_f64();
        let residual = Self::relation_residual(&value_at_s);
        if residual > tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::CocycleInvalid { residual, tol: tol * scale });
        }
        Ok(ParabolicCocycle { value_at_s })
    }

    /// Residual `max(|(1+S).v|, |(1+U+U^2).v|)` of the defining relations.
    pub fn relation_residual(v: &PolyC) -> f64 {
        let s_rel = v.add(&v.act_s()).norm_f64();
        let u = GroupElem::u();
        let uv = sym_act(&u, v);
        let uuv = sym_act(&u, &uv);
        let u_rel = v.add(&uv).add(&uuv).norm_f64();
        s_rel.max(u_rel)
    }

    pub fn zero(prec: u32, degree: usize) -> Self {
        ParabolicCocycle { value_at_s: PolyC::zero(prec, degree) }
    }

    pub fn degree(&self) -> usize {
        self.value_at_s.degree_bound()
    }

    pub fn prec(&self) -> u32 {
        self.value_at_s.prec()
    }

    pub fn value_at_s(&self) -> &PolyC {
        &self.value_at_s
    }

    /// Cocycles form a vector space; negation preserves the relations.
    pub fn neg(&self) -> Self {
        ParabolicCocycle { value_at_s: self.value_at_s.neg() }
    }

    pub fn scale(&self, z: &MpComplex) -> Self {
        ParabolicCocycle { value_at_s: self.value_at_s.scale(z) }
    }

    /// `φ(S^{-1}) = -S^{-1}.φ(S)`; for even degree `sym^d(S^{-1}) = sym^d(S)`.
    pub fn value_at_s_inv(&self) -> PolyC {
        self.value_at_s.act_s().neg()
    }

    /// Evaluate the cocycle at an arbitrary group element by folding its
    /// generator word from the right: `φ(g · rest) = g.φ(rest) + φ(g)`.
    pub fn eval(&self, gamma: &GroupElem) -> PolyC {
        let word = crate::algebra::word_decompose(gamma);
        self.eval_word(&word)
    }

    pub fn eval_word(&self, word: &Word) -> PolyC {
        // Word reads T^{e0} S T^{e1} S ... S T^{el}; the sign is
        // immaterial since φ(-g) = φ(g) for even degree.
        let mut acc = PolyC::zero(self.prec(), self.degree());
        for (pos, &e) in word.exponents.iter().enumerate().rev() {
            if e != 0 && !acc.is_zero() {
                acc = acc.act_t_pow(e);
            }
            if pos > 0 {
                acc = acc.act_s().add(&self.value_at_s);
            }
        }
        acc
    }

    /// `φ^v(g)(v) = <φ(g^{-1}), v>`.
    pub fn dual_apply(&self, gamma: &GroupElem, v: &PolyC) -> Result<MpComplex> {
        if v.degree_bound() != self.degree() {
            return Err(Error::DegreeMismatch(self.degree(), v.degree_bound()));
        }
        pair(&self.eval(&gamma.inv()), v)
    }
}

/// A validated admissible pair with its `ψ`-seed.
#[derive(Clone, Debug)]
pub struct AdmissiblePair {
    pub phi1: ParabolicCocycle,
    pub phi2: ParabolicCocycle,
    psi_at_s: MpComplex,
}

impl AdmissiblePair {
    /// Check the orthogonality `<<φ1(S), φ2(S)>> = 0` (the existence
    /// criterion for the extension) and seed `ψ(S) = -1/2 φ2^v(S) φ1(S)`.
    pub fn new(phi1: ParabolicCocycle, phi2: ParabolicCocycle, tol: f64) -> Result<Self> {
        if phi1.degree() != phi2.degree() {
            return Err(Error::DegreeMismatch(phi1.degree(), phi2.degree()));
        }
        let obstruction = pair_bb(phi1.value_at_s(), phi2.value_at_s())?.abs_f64();
        let scale = phi1.value_at_s().norm_f64() * phi2.value_at_s().norm_f64();
        if obstruction > tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotAdmissible { residual: obstruction, tol: tol * scale });
        }
        // ψ(S) = -1/2 <φ2(S^{-1}), φ1(S)>
        let psi_at_s = pair(&phi2.value_at_s_inv(), phi1.value_at_s())?.scale_f64(-0.5);
        Ok(AdmissiblePair { phi1, phi2, psi_at_s })
    }

    pub fn degree(&self) -> usize {
        self.phi1.degree()
    }

    pub fn prec(&self) -> u32 {
        self.phi1.prec()
    }

    pub fn psi_at_s(&self) -> &MpComplex {
        &self.psi_at_s
    }

    /// Evaluate `ψ` by folding the generator word left to right with
    /// `ψ(pg) = ψ(p) + ψ(g) + <φ2(p^{-1}), φ1(g)>`, maintaining
    /// `φ2(prefix^{-1})` incrementally.
    pub fn psi_eval(&self, gamma: &GroupElem) -> MpComplex {
        let word = crate::algebra::word_decompose(gamma);
        self.psi_eval_word(&word)
    }

    pub fn psi_eval_word(&self, word: &Word) -> MpComplex {
        let prec = self.prec();
        let d = self.degree();
        let phi2_s_inv = self.phi2.value_at_s_inv();
        let mut psi = MpComplex::new(prec);
        // φ2(prefix^{-1}); starts at φ2(I) = 0
        let mut q2 = PolyC::zero(prec, d);
        let mut first = true;
        for &e in word.exponents.iter() {
            if !first {
                // token S
                psi += &self.psi_at_s;
                psi += &pair(&q2, self.phi1.value_at_s()).unwrap();
                q2 = q2.act_s().add(&phi2_s_inv);
            }
            first = false;
            // token T^e contributes nothing to ψ
            if e != 0 && !q2.is_zero() {
                q2 = q2.act_t_pow(-e);
            }
        }
        psi
    }

    /// Block-matrix realization of the extension at `gamma`.
    pub fn rho_matrix(&self, gamma: &GroupElem) -> BlockRep {
        let d = self.degree();
        let prec = self.prec();
        let n = d + 3;
        let mut m = CMatrix::identity(prec, n);
        // top row: 1, φ2^v(γ) against the monomial basis, ψ(γ)
        let q2 = self.phi2.eval(&gamma.inv());
        for j in 0..=d {
            m.set(0, 1 + j, dual_row_entry(&q2, j));
        }
        m.set(0, n - 1, self.psi_eval(gamma));
        // middle block: sym^d(γ); right column: φ1(γ)
        let sym = sym_matrix(gamma, d, prec);
        for i in 0..=d {
            for j in 0..=d {
                m.set(1 + i, 1 + j, sym.get(i, j).clone());
            }
        }
        let p1 = self.phi1.eval(gamma);
        for i in 0..=d {
            m.set(1 + i, n - 1, p1.coeffs[i].clone());
        }
        BlockRep { block_sizes: (1, d + 1, 1), mat: m }
    }
}

/// `<q, X^j>`: entry `j` of a dual functional written as a row vector
/// over the monomial basis.
pub(crate) fn dual_row_entry(q: &PolyC, j: usize) -> MpComplex {
    let d = q.degree_bound();
    let prec = q.prec();
    let mut entry = q.coeffs[d - j].clone();
    let b = binomial_f(prec, d as u32, j as u32);
    entry.re /= &b;
    entry.im /= &b;
    if (d - j) % 2 == 1 {
        entry = -entry;
    }
    entry
}

/// Matrix of `sym^d(γ)` over the monomial basis (column `j` holds the
/// coefficients of `sym^d(γ) X^j`).
pub fn sym_matrix(gamma: &GroupElem, d: usize, prec: u32) -> CMatrix {
    let mut m = CMatrix::zero(prec, d + 1, d + 1);
    for j in 0..=d {
        let col = sym_act(gamma, &PolyC::monomial(prec, d, j));
        for i in 0..=d {
            m.set(i, j, col.coeffs[i].clone());
        }
    }
    m
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<MpComplex>,
}

impl CMatrix {
    pub fn zero(prec: u32, rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![MpComplex::new(prec); rows * cols] }
    }

    pub fn identity(prec: u32, n: usize) -> Self {
        let mut m = Self::zero(prec, n, n);
        for i in 0..n {
            m.set(i, i, MpComplex::one(prec));
        }
        m
    }

    pub fn prec(&self) -> u32 {
        self.data[0].prec()
    }

    pub fn get(&self, i: usize, j: usize) -> &MpComplex {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: MpComplex) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let prec = self.prec().max(other.prec());
        let mut out = CMatrix::zero(prec, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let term = a * other.get(l, j);
                    out.data[i * out.cols + j] += &term;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[MpComplex]) -> Vec<MpComplex> {
        assert_eq!(self.cols, v.len());
        let prec = self.prec();
        let mut out = vec![MpComplex::new(prec); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let term = self.get(i, j) * &v[j];
                out[i] += &term;
            }
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    /// Frobenius norm.
    pub fn norm_f64(&self) -> f64 {
        let mut acc = Float::new(self.prec());
        for z in &self.data {
            acc += z.norm_sqr();
        }
        acc.sqrt().to_f64()
    }
}

/// Block upper-triangular matrix realizing an extension representation.
#[derive(Clone, Debug)]
pub struct BlockRep {
    pub block_sizes: (usize, usize, usize),
    pub mat: CMatrix,
}

impl BlockRep {
    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn mul(&self, other: &BlockRep) -> BlockRep {
        assert_eq!(self.block_sizes, other.block_sizes);
        BlockRep { block_sizes: self.block_sizes, mat: self.mat.mul(&other.mat) }
    }

    /// Frobenius distance to the identity.
    pub fn distance_from_identity(&self) -> f64 {
        self.mat.sub(&CMatrix::identity(self.mat.prec(), self.dim())).norm_f64()
    }

    /// Frobenius distance to another block matrix.
    pub fn distance(&self, other: &BlockRep) -> f64 {
        self.mat.sub(&other.mat).norm_f64()
    }

    /// Largest magnitude found in the lower-left blocks, which stay zero
    /// exactly under products.
    pub fn lower_left_leakage(&self) -> f64 {
        let (b0, b1, _) = self.block_sizes;
        let mut worst = 0.0f64;
        for i in b0..self.dim() {
            for j in 0..b0 {
                worst = worst.max(self.mat.get(i, j).abs_f64());
            }
        }
        for i in (b0 + b1)..self.dim() {
            for j in 0..(b0 + b1) {
                worst = worst.max(self.mat.get(i, j).abs_f64());
            }
        }
        worst
    }
}
