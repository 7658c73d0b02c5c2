//! Vector-valued Eisenstein series of extension type: Fourier
//! coefficients, direct coset-sum evaluation, and the `ψ`-growth scan.
//!
//! For an admissible pair the weight-`k` series of extension type has
//! components `(E_k^{[2]}, E_k^{[1]}, E_k)`, with
//!
//! ```text
//! E_k^{[1]}(τ) = sum_{Γ_∞\SL2(Z)} φ1(γ^{-1}) (cτ+d)^{-k}
//! E_k^{[2]}(τ) = sum_{Γ_∞\SL2(Z)} ψ(γ^{-1})  (cτ+d)^{-k}
//! ```
//!
//! both absolutely convergent for `k > 2 + d`. Coefficients come from
//! regrouping each sum into `T`-orbits of double cosets and applying the
//! Lipschitz summation formula
//! `sum_{m in Z} (w+m)^{-s} = ((-2πi)^s/(s-1)!) sum_{n>=1} n^{s-1} e(nw)`.
//! For the scalar component this gives
//!
//! ```text
//! c_n = ((-2πi)^k/(k-1)!) n^{k-1} sum_{(c,d)} e(nd/c) ψ(γ_{c,d}^{-1}) / c^k
//! ```
//!
//! over nontrivial double cosets; polynomial components pick up Taylor
//! shifts of `φ1(γ^{-1})` and are expanded over the periodic basis
//! `u^i = (X-τ)^i`.
//!
//! Double cosets are enumerated once by a tree walk over negative
//! continued fractions: the root is the class of `S` (bottom row
//! `(1, 0)`) and a node with bottom row `(c, e)` has children
//! `(αc + e, -c)` for `α >= 2`, each class appearing exactly once. The
//! walk carries `(φ1(N^{-1}), φ2(N^{-1}), ψ(N^{-1}))` along the tree, so
//! a node costs two Taylor shifts regardless of `α`. The per-`c` sums
//!
//! ```text
//! A_c[r]    = sum_{d0} ψ(γ^{-1}) e(r d0/c)
//! G_c[r][s] = sum_{d0} [u^s] φ1(γ^{-1})(u - d0/c) · e(r d0/c)
//! R_c[r][e] = sum_{d0} <φ2(γ^{-1}), (X + d0/c)^e> · e(r d0/c)
//! ```
//!
//! are all any coefficient assembly needs; they are reused across
//! weights and Fourier indices. Walks run either on MPFR scalars at the
//! configured precision or on `f64` when 53 bits suffice.

use crate::algebra::{complete_bottom_row, GroupElem, PolyC};
use crate::cocycle::AdmissiblePair;
use crate::num::{euler_phi, factorial_f, pi, Cplx, MpComplex, C64};
use crate::qseries::QSeries;
use crate::{Error, Result};
use rug::{ops::Pow, Float};

/// Component tag for coefficient tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EisComponent {
    /// scalar second-order component (`ψ`-weighted)
    E2,
    /// polynomial second-order component (`φ1`-weighted)
    E1,
    /// classical Eisenstein series
    Classical,
}

impl EisComponent {
    pub fn tag(&self) -> &'static str {
        match self {
            EisComponent::E2 => "E2",
            EisComponent::E1 => "E1",
            EisComponent::Classical => "cl",
        }
    }
}

/// Fourier coefficients of one component.
#[derive(Clone, Debug)]
pub enum EisCoeffs {
    Scalar(Vec<MpComplex>),
    /// polynomials in `u = X - τ`
    Poly(Vec<PolyC>),
}

/// Coefficient table with its provenance.
#[derive(Clone, Debug)]
pub struct EisCoeffTable {
    pub weight: i64,
    pub component: EisComponent,
    pub cutoff: i64,
    /// Estimated magnitude of the dropped `c > cutoff` tail at `n = 1`;
    /// the tail at index `n` scales like `tail * n^{k-1}`.
    pub tail: f64,
    /// `coeffs[n]` belongs to `e(n τ)`; index 0 is present and zero for
    /// the second-order components.
    pub coeffs: EisCoeffs,
}

impl EisCoeffTable {
    /// Evaluate the component at `τ` (scalar components only).
    pub fn eval_scalar(&self, tau: &MpComplex) -> Result<MpComplex> {
        let EisCoeffs::Scalar(coeffs) = &self.coeffs else {
            return Err(Error::InvalidParameter("polynomial-valued table".into()));
        };
        let q = tau.e_tau();
        let mut acc = MpComplex::new(tau.prec());
        for c in coeffs.iter().rev() {
            acc = &acc * &q;
            acc += c;
        }
        Ok(acc)
    }

    /// Evaluate a polynomial-valued component at `τ`, returning a
    /// polynomial in `X` (the `u = X - τ` basis is substituted back).
    pub fn eval_poly(&self, tau: &MpComplex) -> Result<PolyC> {
        let EisCoeffs::Poly(coeffs) = &self.coeffs else {
            return Err(Error::InvalidParameter("scalar-valued table".into()));
        };
        let q = tau.e_tau();
        let d = coeffs[0].degree_bound();
        let prec = tau.prec();
        let mut acc = PolyC::zero(prec, d);
        for c in coeffs.iter().rev() {
            acc = acc.scale(&q).add(c);
        }
        Ok(acc.shift(&-tau))
    }
}

/// Outcome of the `ψ`-growth scan.
#[derive(Clone, Debug)]
pub struct GrowthScan {
    /// `(c, max over d0 of |ψ(γ^{-1})|)`
    pub rows: Vec<(i64, f64)>,
    /// least-squares slope of `log max` against `log c`
    pub fitted_exponent: f64,
}

/// Per-`c` class sums produced by one tree walk, reusable across all
/// weights and Fourier indices.
pub struct EisTables {
    pub cutoff: i64,
    pub trunc: usize,
    pub degree: usize,
    pub prec: u32,
    inner: TablesEnum,
}

enum TablesEnum {
    F64(Tables<C64>),
    Mp(Tables<MpComplex>),
}

struct Tables<C: Cplx> {
    cutoff: i64,
    trunc: usize,
    degree: usize,
    /// `a[c-1][r]`, `r < min(c, trunc+1)`
    a: Vec<Vec<C>>,
    /// `g[c-1][r*(d+1) + s]`
    g: Option<Vec<Vec<C>>>,
    /// `r_[c-1][r*(d+1) + e]`
    r_: Option<Vec<Vec<C>>>,
    psi_max: Vec<f64>,
}

/// Inputs of a walk, converted once to the backend scalar.
struct WalkSeed<C: Cplx> {
    degree: usize,
    v1: Vec<C>,
    v2: Vec<C>,
    p1_root: Vec<C>,
    p2_root: Vec<C>,
    psi_root: C,
    psi_s_inv: C,
    /// dual vector: `<v2, w> = sum_j dual2[j] w[j]`
    dual2: Vec<C>,
    /// Pascal triangle as f64 (exact for the degrees in play)
    pascal: Vec<Vec<f64>>,
    /// `(-1)^i / binom(d, i)`
    inv_binom_signed: Vec<C>,
}

impl<C: Cplx> WalkSeed<C> {
    fn new(pair: &AdmissiblePair, model: &C) -> Self {
        let d = pair.degree();
        let to_c = |p: &PolyC| -> Vec<C> {
            p.coeffs.iter().map(|z| C::from_mp(model, z)).collect()
        };
        let v1 = to_c(pair.phi1.value_at_s());
        let v2 = to_c(pair.phi2.value_at_s());
        let p1_root = to_c(&pair.phi1.value_at_s_inv());
        let p2_root = to_c(&pair.phi2.value_at_s_inv());
        let s_inv = GroupElem::s().inv();
        let psi_root = C::from_mp(model, &pair.psi_eval(&s_inv));
        let psi_s_inv = psi_root.clone();
        let pascal = pascal_f64(2 * d + 2);
        let inv_binom_signed: Vec<C> = (0..=d)
            .map(|i| {
                let b = C::from_ratio(model, if i % 2 == 0 { 1 } else { -1 }, 1);
                b.scale_f64(1.0 / pascal[d][i])
            })
            .collect();
        // <v2, w> = sum_i (-1)^i binom^{-1} v2_i w_{d-i}
        //         = sum_j [(-1)^{d-j} binom(d,j)^{-1} v2_{d-j}] w_j
        let dual2: Vec<C> = (0..=d)
            .map(|j| {
                let sign = if (d - j) % 2 == 0 { 1.0 } else { -1.0 };
                v2[d - j].scale_f64(sign / pascal[d][j])
            })
            .collect();
        WalkSeed {
            degree: d,
            v1,
            v2,
            p1_root,
            p2_root,
            psi_root,
            psi_s_inv,
            dual2,
            pascal,
            inv_binom_signed,
        }
    }
}

fn pascal_f64(n: usize) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..=n {
        p[i][0] = 1.0;
        for j in 1..=i {
            p[i][j] = p[i - 1][j - 1] + if j <= i - 1 { p[i - 1][j] } else { 0.0 };
        }
    }
    p
}

/// `p(X + κ)` with precomputed κ-powers.
fn shift_poly<C: Cplx>(p: &[C], kappa_pows: &[C], pascal: &[Vec<f64>]) -> Vec<C> {
    let d = p.len() - 1;
    let mut out = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let mut acc = C::zero_like(&p[0]);
        for j in i..=d {
            let term = p[j].mul(&kappa_pows[j - i]);
            acc.add_assign_(&term.scale_f64(pascal[j][i]));
        }
        out.push(acc);
    }
    out
}

fn powers_of<C: Cplx>(kappa: &C, up_to: usize) -> Vec<C> {
    let mut pows = Vec::with_capacity(up_to + 1);
    pows.push(C::from_ratio(kappa, 1, 1));
    for _ in 1..=up_to {
        pows.push(pows.last().unwrap().mul(kappa));
    }
    pows
}

fn act_s_poly<C: Cplx>(p: &[C]) -> Vec<C> {
    let d = p.len() - 1;
    (0..=d)
        .map(|j| if j % 2 == 1 { p[d - j].neg() } else { p[d - j].clone() })
        .collect()
}

/// Node of the double-coset tree.
struct Node<C: Cplx> {
    c: i64,
    e: i64,
    p1: Vec<C>,
    p2: Vec<C>,
    psi: C,
}

/// Depth-first walk over all nontrivial double cosets with `c <= cutoff`,
/// invoking the visitor once per class.
fn walk_tree<C: Cplx>(
    seed: &WalkSeed<C>,
    cutoff: i64,
    visit: &mut impl FnMut(&Node<C>),
) {
    let root = Node {
        c: 1,
        e: 0,
        p1: seed.p1_root.clone(),
        p2: seed.p2_root.clone(),
        psi: seed.psi_root.clone(),
    };
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        visit(&node);
        // children (α c + e, -c) for α >= 2
        let mut alpha = 2i64;
        while alpha * node.c + node.e <= cutoff {
            let alpha_c = C::from_ratio(&node.psi, alpha, 1);
            let alpha_pows = powers_of(&alpha_c, seed.degree);
            let shifted1 = shift_poly(&node.p1, &alpha_pows, &seed.pascal);
            let shifted2 = shift_poly(&node.p2, &alpha_pows, &seed.pascal);
            // ψ' = ψ(S^{-1}) + ψ + <v2, T^{-α}.p1>
            let mut psi = seed.psi_s_inv.clone();
            psi.add_assign_(&node.psi);
            for (dv, w) in seed.dual2.iter().zip(&shifted1) {
                psi.add_mul(dv, w);
            }
            // p' = S^{-1}.(T^{-α}.p) + φ(S^{-1}) = act_s(shifted - v)
            let p1: Vec<C> =
                act_s_poly(&shifted1.iter().zip(&seed.v1).map(|(a, b)| a.sub(b)).collect::<Vec<_>>());
            let p2: Vec<C> =
                act_s_poly(&shifted2.iter().zip(&seed.v2).map(|(a, b)| a.sub(b)).collect::<Vec<_>>());
            stack.push(Node { c: alpha * node.c + node.e, e: -node.c, p1, p2, psi });
            alpha += 1;
        }
    }
}

fn build_tables<C: Cplx>(
    pair: &AdmissiblePair,
    model: &C,
    cutoff: i64,
    trunc: usize,
    collect_middle: bool,
) -> Tables<C> {
    let seed = WalkSeed::new(pair, model);
    let d = seed.degree;
    let mut a: Vec<Vec<C>> = (1..=cutoff)
        .map(|c| vec![C::zero_like(model); (c as usize).min(trunc + 1)])
        .collect();
    let (mut g, mut r_) = if collect_middle {
        let make = || -> Vec<Vec<C>> {
            (1..=cutoff)
                .map(|c| vec![C::zero_like(model); (c as usize).min(trunc + 1) * (d + 1)])
                .collect()
        };
        (Some(make()), Some(make()))
    } else {
        (None, None)
    };
    let mut psi_max = vec![0.0f64; cutoff as usize + 1];
    {
        let seed_ref = &seed;
        let mut visit = |node: &Node<C>| {
            let c = node.c;
            let ci = (c - 1) as usize;
            let r_len = (c as usize).min(trunc + 1);
            let z = C::e_frac(&node.psi, node.e.rem_euclid(c), c);
            // A-row
            {
                let row = &mut a[ci];
                let mut zp = C::from_ratio(&node.psi, 1, 1);
                for r in 0..r_len {
                    row[r].add_mul(&node.psi, &zp);
                    if r + 1 < r_len {
                        zp = zp.mul(&z);
                    }
                }
            }
            psi_max[c as usize] = psi_max[c as usize].max(node.psi.abs_f64());
            if let (Some(g), Some(r_)) = (g.as_mut(), r_.as_mut()) {
                // w = φ1(γ^{-1})(u - e/c)
                let kappa = C::from_ratio(&node.psi, -node.e, c);
                let kpows = powers_of(&kappa, d);
                let w = shift_poly(&node.p1, &kpows, &seed_ref.pascal);
                // Q_e = <φ2(γ^{-1}), (X + e/c)^e>
                let kappa2_pows = powers_of(&kappa.neg(), d);
                let mut q = Vec::with_capacity(d + 1);
                for ee in 0..=d {
                    let mut acc = C::zero_like(&node.psi);
                    for i in (d - ee)..=d {
                        // coefficient of Y^{d-i} in (Y + κ2)^{ee}
                        let b = seed_ref.pascal[ee][d - i];
                        if b == 0.0 {
                            continue;
                        }
                        let term =
                            node.p2[i].mul(&kappa2_pows[ee - (d - i)]).scale_f64(b);
                        acc.add_assign_(&seed_ref.inv_binom_signed[i].mul(&term));
                    }
                    q.push(acc);
                }
                let grow = &mut g[ci];
                let rrow = &mut r_[ci];
                let mut zp = C::from_ratio(&node.psi, 1, 1);
                for r in 0..r_len {
                    for s in 0..=d {
                        grow[r * (d + 1) + s].add_mul(&w[s], &zp);
                        rrow[r * (d + 1) + s].add_mul(&q[s], &zp);
                    }
                    if r + 1 < r_len {
                        zp = zp.mul(&z);
                    }
                }
            }
        };
        walk_tree(&seed, cutoff, &mut visit);
    }
    Tables { cutoff, trunc, degree: d, a, g, r_, psi_max }
}

impl EisTables {
    /// Run the double-coset walk once. `collect_middle` additionally
    /// gathers the `φ1`/`φ2` tables needed by [`EisTables::eis1_coeffs`]
    /// and [`EisTables::sub_eis_coeffs`] (they grow with
    /// `cutoff · trunc · degree`, so switch them off for scalar-only
    /// work). Precisions of at most 53 bits run on native `f64`.
    pub fn build(
        pair: &AdmissiblePair,
        cutoff: i64,
        trunc: usize,
        prec: u32,
        collect_middle: bool,
    ) -> Self {
        assert!(cutoff >= 1);
        let inner = if prec <= 53 {
            TablesEnum::F64(build_tables(
                pair,
                &C64::new(0.0, 0.0),
                cutoff,
                trunc,
                collect_middle,
            ))
        } else {
            TablesEnum::Mp(build_tables(
                pair,
                &MpComplex::new(prec),
                cutoff,
                trunc,
                collect_middle,
            ))
        };
        EisTables { cutoff, trunc, degree: pair.degree(), prec, inner }
    }

    /// Fourier coefficients of the scalar second-order component at
    /// weight `k`, summed over `c <= cutoff` (defaults to the walk
    /// cutoff; smaller values reuse the same walk for stability checks).
    pub fn eis2_coeffs(&self, k: i64, cutoff: Option<i64>) -> Result<EisCoeffTable> {
        let cut = cutoff.unwrap_or(self.cutoff);
        self.check_weight(k)?;
        if cut > self.cutoff {
            return Err(Error::InvalidParameter("cutoff exceeds walk cutoff".into()));
        }
        match &self.inner {
            TablesEnum::F64(t) => eis2_from_tables(t, k, cut, self.prec),
            TablesEnum::Mp(t) => eis2_from_tables(t, k, cut, self.prec),
        }
    }

    /// Fourier coefficients of the polynomial second-order component at
    /// weight `k`, as polynomials in `u = X - τ`.
    pub fn eis1_coeffs(&self, k: i64) -> Result<EisCoeffTable> {
        self.check_weight(k)?;
        match &self.inner {
            TablesEnum::F64(t) => eis1_from_tables(t, k, self.prec),
            TablesEnum::Mp(t) => eis1_from_tables(t, k, self.prec),
        }
    }

    /// Fourier coefficients of the two components of the `j`-seeded
    /// series of type `1 ⊞ φ2^v sym^d`: scalar top, polynomial bottom
    /// (in `u`), including the bottom constant term `u^j`.
    pub fn sub_eis_coeffs(&self, k: i64, j: usize) -> Result<(EisCoeffTable, EisCoeffTable)> {
        self.check_weight(k)?;
        if j > self.degree {
            return Err(Error::InvalidParameter(format!(
                "seed exponent {j} exceeds degree {}",
                self.degree
            )));
        }
        match &self.inner {
            TablesEnum::F64(t) => sub_eis_from_tables(t, k, j, self.prec),
            TablesEnum::Mp(t) => sub_eis_from_tables(t, k, j, self.prec),
        }
    }

    /// `max |ψ(γ^{-1})|` per `c`, with the least-squares growth exponent.
    pub fn growth_scan(&self, cutoff: Option<i64>) -> GrowthScan {
        let cut = cutoff.unwrap_or(self.cutoff).min(self.cutoff);
        let psi_max = match &self.inner {
            TablesEnum::F64(t) => &t.psi_max,
            TablesEnum::Mp(t) => &t.psi_max,
        };
        let rows: Vec<(i64, f64)> =
            (1..=cut).map(|c| (c, psi_max[c as usize])).collect();
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|(_, m)| *m > 0.0)
            .map(|&(c, m)| ((c as f64).ln(), m.ln()))
            .collect();
        GrowthScan { rows, fitted_exponent: ls_slope(&pts) }
    }

    fn check_weight(&self, k: i64) -> Result<()> {
        if k <= 2 + self.degree as i64 || k % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "weight {k} is not an even integer above {}",
                2 + self.degree
            )));
        }
        Ok(())
    }
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// `(-2πi)^s / (s-1)!` at the given precision.
pub fn lipschitz_const(prec: u32, s: i64) -> MpComplex {
    assert!(s >= 2);
    let mut arg: Float = pi(prec);
    arg *= -2;
    let minus_two_pi_i = MpComplex::from_floats(Float::new(prec), arg);
    let mut out = minus_two_pi_i.powi(s);
    let f = factorial_f(prec, (s - 1) as u32);
    out.re /= &f;
    out.im /= &f;
    out
}

fn eis2_from_tables<C: Cplx>(
    t: &Tables<C>,
    k: i64,
    cutoff: i64,
    prec: u32,
) -> Result<EisCoeffTable> {
    let n_max = t.trunc;
    let kappa = lipschitz_const(prec, k);
    let mut coeffs = vec![MpComplex::new(prec); n_max + 1];
    let model = &t.a[0][0];
    for n in 1..=n_max {
        let mut acc = C::zero_like(model);
        for c in 1..=cutoff {
            let row = &t.a[(c - 1) as usize];
            let r = (n as i64).rem_euclid(c) as usize;
            let ck = C::from_ratio(model, c, 1).powi(-k);
            acc.add_mul(&row[r.min(row.len() - 1)], &ck);
        }
        let mut v = acc.to_mp(prec);
        v = &v * &kappa;
        let npow = Float::with_val(prec, n as u32).pow((k - 1) as u32);
        coeffs[n] = v.scale(&npow);
    }
    // tail: per-c row magnitude grows like K c^{d + 1/2}; dropped part
    // sums to roughly K cutoff^{d + 3/2 - k} / (k - d - 3/2) at n = 1
    let d = t.degree as f64;
    let mut big_k = 0.0f64;
    for c in (cutoff / 2).max(1)..=cutoff {
        let amax = t.a[(c - 1) as usize].iter().map(|v| v.abs_f64()).fold(0.0, f64::max);
        big_k = big_k.max(amax / (c as f64).powf(d + 0.5));
    }
    let tail = kappa.abs_f64() * big_k * (cutoff as f64).powf(d + 1.5 - k as f64)
        / (k as f64 - d - 1.5);
    Ok(EisCoeffTable {
        weight: k,
        component: EisComponent::E2,
        cutoff,
        tail,
        coeffs: EisCoeffs::Scalar(coeffs),
    })
}

fn eis1_from_tables<C: Cplx>(t: &Tables<C>, k: i64, prec: u32) -> Result<EisCoeffTable> {
    let g = t
        .g
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("walk did not collect middle tables".into()))?;
    let d = t.degree;
    let n_max = t.trunc;
    let model = &t.a[0][0];
    // partial[s][n] = sum_c c^{-k} G_c[n mod c][s]
    let mut partial = vec![vec![C::zero_like(model); n_max + 1]; d + 1];
    for c in 1..=t.cutoff {
        let row = &g[(c - 1) as usize];
        let r_len = (c as usize).min(n_max + 1);
        let ck = C::from_ratio(model, c, 1).powi(-k);
        for n in 1..=n_max {
            let r = if (c as usize) <= n_max { n % c as usize } else { n };
            debug_assert!(r < r_len);
            for s in 0..=d {
                partial[s][n].add_mul(&row[r * (d + 1) + s], &ck);
            }
        }
    }
    let kappas: Vec<MpComplex> = (0..=d).map(|tt| lipschitz_const(prec, k - tt as i64)).collect();
    let pascal = pascal_f64(2 * d + 2);
    let mut coeffs = vec![PolyC::zero(prec, d); n_max + 1];
    for n in 1..=n_max {
        for i in 0..=d {
            let mut acc = MpComplex::new(prec);
            for tt in 0..=(d - i) {
                let s = i + tt;
                let mut term = partial[s][n].to_mp(prec);
                term = &term * &kappas[tt];
                let npow = Float::with_val(prec, n as u32).pow((k - tt as i64 - 1) as u32);
                term = term.scale(&npow);
                acc += &term.scale_f64(pascal[s][tt]);
            }
            coeffs[n].coeffs[i] = acc;
        }
    }
    let tail = 0.0; // dominated by the scalar estimate; reported there
    Ok(EisCoeffTable {
        weight: k,
        component: EisComponent::E1,
        cutoff: t.cutoff,
        tail,
        coeffs: EisCoeffs::Poly(coeffs),
    })
}

fn sub_eis_from_tables<C: Cplx>(
    t: &Tables<C>,
    k: i64,
    j: usize,
    prec: u32,
) -> Result<(EisCoeffTable, EisCoeffTable)> {
    let rtab = t
        .r_
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("walk did not collect middle tables".into()))?;
    let d = t.degree;
    let n_max = t.trunc;
    let model = &t.a[0][0];
    let pascal = pascal_f64(2 * d + 2);
    let cexp = d as i64 - 2 * j as i64 - k;
    // top: partial_e[n] = sum_c c^{d-2j-k} R_c[n mod c][e]
    let mut partial = vec![vec![C::zero_like(model); n_max + 1]; d + 1];
    for c in 1..=t.cutoff {
        let row = &rtab[(c - 1) as usize];
        let r_len = (c as usize).min(n_max + 1);
        let cw = C::from_ratio(model, c, 1).powi(cexp);
        for n in 1..=n_max {
            let r = if (c as usize) <= n_max { n % c as usize } else { n };
            debug_assert!(r < r_len);
            for e in 0..=d {
                partial[e][n].add_mul(&row[r * (d + 1) + e], &cw);
            }
        }
    }
    let mut top = vec![MpComplex::new(prec); n_max + 1];
    for n in 1..=n_max {
        let mut acc = MpComplex::new(prec);
        for s in 0..=j {
            let e = d - j + s;
            let kappa = lipschitz_const(prec, k + s as i64);
            let npow = Float::with_val(prec, n as u32).pow((k + s as i64 - 1) as u32);
            let mut term = partial[e][n].to_mp(prec);
            term = (&term * &kappa).scale(&npow).scale_f64(pascal[j][s]);
            if (j - s) % 2 == 1 {
                term = -term;
            }
            acc += &term;
        }
        top[n] = -acc;
    }
    // bottom: c-sums reduce to Ramanujan sums since the u-polynomial is
    // class-independent
    let mut bottom = vec![PolyC::zero(prec, d); n_max + 1];
    bottom[0].coeffs[j] = MpComplex::one(prec); // identity coset seed u^j
    for n in 1..=n_max {
        // w_n = sum_c c^{d-2j-k} ram_c(n)
        let mut w = Float::new(prec);
        for c in 1..=t.cutoff {
            let ram = ramanujan_sum(c, n as i64);
            if ram != 0 {
                let mut term = Float::with_val(prec, c).pow(cexp as i32);
                term *= ram;
                w += term;
            }
        }
        for s in 0..=(d - j) {
            let kappa = lipschitz_const(prec, k + j as i64 - s as i64);
            let npow = Float::with_val(prec, n as u32).pow((k + j as i64 - s as i64 - 1) as u32);
            let term = kappa.scale(&npow).scale(&w).scale_f64(pascal[d - j][s]);
            bottom[n].coeffs[d - s] = term;
        }
    }
    let top_table = EisCoeffTable {
        weight: k,
        component: EisComponent::E2,
        cutoff: t.cutoff,
        tail: 0.0,
        coeffs: EisCoeffs::Scalar(top),
    };
    let bottom_table = EisCoeffTable {
        weight: k,
        component: EisComponent::E1,
        cutoff: t.cutoff,
        tail: 0.0,
        coeffs: EisCoeffs::Poly(bottom),
    };
    Ok((top_table, bottom_table))
}

/// Ramanujan sum `sum_{d0 coprime to c} e(n d0 / c)
/// = sum_{δ | gcd(n, c)} μ(c/δ) δ`.
pub fn ramanujan_sum(c: i64, n: i64) -> i64 {
    let g = {
        let mut a = c;
        let mut b = n.abs() % c.max(1);
        while b != 0 {
            let r = a % b;
            a = b;
            b = r;
        }
        a
    };
    let mut total = 0i64;
    let mut delta = 1i64;
    while delta * delta <= g {
        if g % delta == 0 {
            total += moebius(c / delta) * delta;
            let other = g / delta;
            if other != delta {
                total += moebius(c / other) * other;
            }
        }
        delta += 1;
    }
    total
}

fn moebius(mut n: i64) -> i64 {
    let mut mu = 1i64;
    let mut p = 2i64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Truncated direct evaluation of the full triple
/// `(E_k^{[2]}, E_k^{[1]}, E_k)` at `τ`: the sum over left cosets with
/// `max(|c|, |d|) <= cutoff`, grouped by `T`-orbits so that `ψ` and
/// `φ1` evaluate once per double coset. The polynomial component is
/// returned over the monomial basis in `X`.
pub fn direct_eval(
    pair: &AdmissiblePair,
    k: i64,
    tau: &MpComplex,
    cutoff: i64,
    prec: u32,
) -> Result<(MpComplex, PolyC, MpComplex)> {
    if k % 2 != 0 || k <= 2 + pair.degree() as i64 {
        return Err(Error::InvalidParameter(format!(
            "weight {k} is not an even integer above {}",
            2 + pair.degree()
        )));
    }
    if prec <= 53 {
        direct_eval_impl(pair, k, tau, cutoff, &C64::new(0.0, 0.0), prec)
    } else {
        direct_eval_impl(pair, k, tau, cutoff, &MpComplex::new(prec), prec)
    }
}

fn direct_eval_impl<C: Cplx>(
    pair: &AdmissiblePair,
    k: i64,
    tau: &MpComplex,
    cutoff: i64,
    model: &C,
    prec: u32,
) -> Result<(MpComplex, PolyC, MpComplex)> {
    let seed = WalkSeed::new(pair, model);
    let d = seed.degree;
    let tau_c = C::from_mp(model, tau);
    let mut top = C::zero_like(model);
    let mut middle = vec![C::zero_like(model); d + 1];
    let mut bottom = C::zero_like(model);
    let pascal = pascal_f64(2 * d + 2);
    let mut visit = |node: &Node<C>| {
        let c = node.c;
        // m-range with |e + m c| <= cutoff
        let lo = (-cutoff - node.e).div_euclid(c) + i64::from((-cutoff - node.e).rem_euclid(c) != 0);
        let hi = (cutoff - node.e).div_euclid(c);
        if lo > hi {
            return;
        }
        // moments S_s = sum_m m^s (cτ + e + mc)^{-k}
        let mut moments = vec![C::zero_like(&node.psi); d + 1];
        for m in lo..=hi {
            let mut den = tau_c.scale_i64(c);
            den.add_assign_(&C::from_ratio(&node.psi, node.e + m * c, 1));
            let w = den.powi(-k);
            let mut mp = w.clone();
            for s in 0..=d {
                moments[s].add_assign_(&mp);
                if s < d {
                    mp = mp.scale_i64(m);
                }
            }
        }
        top.add_mul(&node.psi, &moments[0]);
        bottom.add_assign_(&moments[0]);
        // sum_m φ1(γ^{-1})(X + m) (cτ + e + mc)^{-k}:
        // coefficient of X^i picks binom(t, i) p1_t S_{t-i}
        for i in 0..=d {
            for t in i..=d {
                let term = node.p1[t].mul(&moments[t - i]).scale_f64(pascal[t][i]);
                middle[i].add_assign_(&term);
            }
        }
    };
    walk_tree(&seed, cutoff, &mut visit);
    // identity coset contributes (0, 0, 1)
    bottom.add_assign_(&C::from_ratio(model, 1, 1));
    let middle_poly = PolyC::from_coeffs(middle.iter().map(|z| z.to_mp(prec)).collect());
    Ok((top.to_mp(prec), middle_poly, bottom.to_mp(prec)))
}

/// Truncated direct evaluation of the `j`-seeded series of type
/// `1 ⊞ φ2^v sym^d`: `(scalar top, polynomial bottom in u = X - τ)`.
pub fn sub_eis_direct_eval(
    pair: &AdmissiblePair,
    k: i64,
    j: usize,
    tau: &MpComplex,
    cutoff: i64,
    prec: u32,
) -> Result<(MpComplex, PolyC)> {
    if prec <= 53 {
        sub_eis_direct_impl(pair, k, j, tau, cutoff, &C64::new(0.0, 0.0), prec)
    } else {
        sub_eis_direct_impl(pair, k, j, tau, cutoff, &MpComplex::new(prec), prec)
    }
}

fn sub_eis_direct_impl<C: Cplx>(
    pair: &AdmissiblePair,
    k: i64,
    j: usize,
    tau: &MpComplex,
    cutoff: i64,
    model: &C,
    prec: u32,
) -> Result<(MpComplex, PolyC)> {
    let seed = WalkSeed::new(pair, model);
    let d = seed.degree;
    let tau_c = C::from_mp(model, tau);
    let pascal = pascal_f64(2 * d + 2);
    // Lipschitz-style exponents k + off appear with off = s (top,
    // s = 0..=j) and off = j - s (bottom, s = 0..=d-j), so
    // off ∈ [min(0, 2j - d), j].
    let off_min = 0i64.min(2 * j as i64 - d as i64);
    let off_max = j as i64;
    let n_offs = (off_max - off_min) as usize + 1;
    let mut top = C::zero_like(model);
    let mut bottom = vec![C::zero_like(model); d + 1];
    bottom[j].add_assign_(&C::from_ratio(model, 1, 1)); // identity coset: u^j
    let mut visit = |node: &Node<C>| {
        let c = node.c;
        let lo = (-cutoff - node.e).div_euclid(c)
            + i64::from((-cutoff - node.e).rem_euclid(c) != 0);
        let hi = (cutoff - node.e).div_euclid(c);
        if lo > hi {
            return;
        }
        // vsums[off - off_min] = sum_m (τ + (e + mc)/c)^{-(k + off)}
        let mut vsums = vec![C::zero_like(&node.psi); n_offs];
        for m in lo..=hi {
            let mut v = tau_c.clone();
            v.add_assign_(&C::from_ratio(&node.psi, node.e + m * c, c));
            let winv = v.inv();
            let mut wp = winv.powi(k + off_min);
            for idx in 0..n_offs {
                vsums[idx].add_assign_(&wp);
                if idx + 1 < n_offs {
                    wp = wp.mul(&winv);
                }
            }
        }
        let cw = C::from_ratio(model, c, 1).powi(d as i64 - 2 * j as i64 - k);
        // top: -c^{d-2j-k} sum_s binom(j,s)(-1)^{j-s} Q_{d-j+s} V_{k+s}
        let kappa2 = C::from_ratio(&node.psi, node.e, c);
        let k2pows = powers_of(&kappa2, d);
        for s in 0..=j {
            let e = d - j + s;
            let mut q = C::zero_like(&node.psi);
            for i in (d - e)..=d {
                let b = pascal[e][d - i];
                if b == 0.0 {
                    continue;
                }
                let term = node.p2[i].mul(&k2pows[e - (d - i)]).scale_f64(b);
                q.add_assign_(&seed.inv_binom_signed[i].mul(&term));
            }
            let v = &vsums[(s as i64 - off_min) as usize];
            let mut term = q.mul(v).mul(&cw).scale_f64(pascal[j][s]);
            if (j - s) % 2 == 0 {
                term = term.neg();
            }
            top.add_assign_(&term);
        }
        // bottom: c^{d-2j-k} sum_s binom(d-j,s) u^{d-s} V_{k+j-s}
        for s in 0..=(d - j) {
            let v = &vsums[(j as i64 - s as i64 - off_min) as usize];
            let term = v.mul(&cw).scale_f64(pascal[d - j][s]);
            bottom[d - s].add_assign_(&term);
        }
    };
    walk_tree(&seed, cutoff, &mut visit);
    let bottom_poly = PolyC::from_coeffs(bottom.iter().map(|z| z.to_mp(prec)).collect());
    Ok((top.to_mp(prec), bottom_poly))
}
