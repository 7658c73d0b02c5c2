//! Saturation decompositions: express `Δ^n · (ε_{f,g}, I_f, 1)` inside
//! the graded span of vector-valued Eisenstein series, embedded
//! lower-rank Eisenstein pairs, and classical forms.
//!
//! At target weight `w` the span columns are Fourier-coefficient stacks
//! (all three components, frequencies `0..=N`) of
//!
//! - `m · E_{k'}(ρ)` for even `k'` in `[k0, w]` and `m` in a basis of
//!   `M_{w-k'}`,
//! - `ι1(m · E_{k'}(1 ⊞ φ2^v sym^d, j))` for `j = 0..=d`, embedded as
//!   `(top, bottom, 0)`,
//! - `ι2(m) = (m, 0, 0)` for `m` in a basis of `M_w`,
//!
//! and the solver ascends `n = 1, 2, ...` looking for the first
//! least-squares fit of `Δ^n · (ε_{f,g}, I_f, 1)` with small relative
//! residual. Rows are equilibrated and columns normalized before a
//! column-pivoted factorization; near-rank-deficiency is reported, since
//! Eisenstein columns of distinct weights multiplied into the same
//! weight can be nearly dependent at small truncation.

use crate::algebra::PolyC;
use crate::depth2::{depth2_pair, epsilon_fg_qcoeffs};
use crate::eichler::eichler_i_u_qcoeffs;
use crate::eisenstein::{EisCoeffTable, EisCoeffs, EisTables};
use crate::num::MpComplex;
use crate::qseries::{basis, delta_q, dim_modular, eisenstein_q, QSeries};
use crate::{Error, Result};
use rug::Float;

/// What a span column is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    /// `m · E_{k'}(ρ)`: full triple
    ExtTriple,
    /// `ι1(m · E_{k'}(1 ⊞ φ2^v sym^d, j))`
    SubPair { j: usize },
    /// `ι2(m)`
    Classical,
}

#[derive(Clone, Copy, Debug)]
pub struct ColumnDescriptor {
    pub kind: ColumnKind,
    /// Eisenstein weight `k'` (equals the target weight for `Classical`).
    pub eis_weight: i64,
    /// Index into the echelonized multiplier basis of `M_{w-k'}`.
    pub multiplier: usize,
}

/// Assembled coefficient matrix for one target weight.
pub struct SpanBasis {
    pub target_weight: i64,
    pub trunc: usize,
    pub degree: usize,
    pub descriptors: Vec<ColumnDescriptor>,
    /// Column-major stacked coefficients; see [`SpanBasis::rows`].
    pub columns: Vec<Vec<MpComplex>>,
}

impl SpanBasis {
    /// Row count: `(trunc+1)` top rows, `(trunc+1)(d+1)` middle rows
    /// (frequency-major, then `u`-power), `(trunc+1)` bottom rows.
    pub fn rows(&self) -> usize {
        (self.trunc + 1) * (self.degree + 3)
    }

    pub fn top_rows(&self) -> std::ops::Range<usize> {
        0..(self.trunc + 1)
    }

    pub fn middle_rows(&self) -> std::ops::Range<usize> {
        (self.trunc + 1)..(self.trunc + 1) * (self.degree + 2)
    }

    pub fn bottom_rows(&self) -> std::ops::Range<usize> {
        (self.trunc + 1) * (self.degree + 2)..(self.trunc + 1) * (self.degree + 3)
    }

    /// Evaluate the top component of a coefficient combination at `τ`.
    pub fn eval_top(&self, coeffs: &[MpComplex], tau: &MpComplex) -> MpComplex {
        let n1 = self.trunc + 1;
        let prec = tau.prec();
        let mut series = vec![MpComplex::new(prec); n1];
        for (x, col) in coeffs.iter().zip(&self.columns) {
            if x.is_zero() {
                continue;
            }
            for n in 0..n1 {
                series[n] += &(x * &col[n]);
            }
        }
        let q = tau.e_tau();
        let mut acc = MpComplex::new(prec);
        for c in series.iter().rev() {
            acc = &acc * &q;
            acc += c;
        }
        acc
    }
}

fn conv_scalar(m: &QSeries, coeffs: &[MpComplex], trunc: usize, prec: u32) -> Vec<MpComplex> {
    let mut out = vec![MpComplex::new(prec); trunc + 1];
    for a in 0..=trunc.min(m.trunc()) {
        if m.coeffs[a].is_zero() {
            continue;
        }
        for b in 0..=(trunc - a).min(coeffs.len() - 1) {
            out[a + b] += &(&m.coeffs[a] * &coeffs[b]);
        }
    }
    out
}

fn conv_poly(m: &QSeries, coeffs: &[PolyC], trunc: usize, degree: usize, prec: u32) -> Vec<PolyC> {
    let mut out = vec![PolyC::zero(prec, degree); trunc + 1];
    for a in 0..=trunc.min(m.trunc()) {
        if m.coeffs[a].is_zero() {
            continue;
        }
        for b in 0..=(trunc - a).min(coeffs.len() - 1) {
            out[a + b] = out[a + b].add(&coeffs[b].scale(&m.coeffs[a]));
        }
    }
    out
}

fn stack_column(
    top: &[MpComplex],
    middle: Option<&[PolyC]>,
    bottom: Option<&[MpComplex]>,
    trunc: usize,
    degree: usize,
    prec: u32,
) -> Vec<MpComplex> {
    let n1 = trunc + 1;
    let mut col = Vec::with_capacity(n1 * (degree + 3));
    for n in 0..n1 {
        col.push(top.get(n).cloned().unwrap_or_else(|| MpComplex::new(prec)));
    }
    for n in 0..n1 {
        for i in 0..=degree {
            col.push(match middle {
                Some(polys) => polys[n].coeffs[i].clone(),
                None => MpComplex::new(prec),
            });
        }
    }
    for n in 0..n1 {
        col.push(match bottom {
            Some(b) => b[n].clone(),
            None => MpComplex::new(prec),
        });
    }
    col
}

fn scalar_coeffs(table: &EisCoeffTable) -> &[MpComplex] {
    match &table.coeffs {
        EisCoeffs::Scalar(v) => v,
        EisCoeffs::Poly(_) => unreachable!(),
    }
}

fn poly_coeffs(table: &EisCoeffTable) -> &[PolyC] {
    match &table.coeffs {
        EisCoeffs::Poly(v) => v,
        EisCoeffs::Scalar(_) => unreachable!(),
    }
}

/// Build the span columns at target weight `w` from one set of walk
/// tables (which must have been built with the middle tables enabled).
pub fn assemble_span(
    tables: &EisTables,
    w: i64,
    k0: i64,
    trunc: usize,
    prec: u32,
) -> Result<SpanBasis> {
    let d = tables.degree;
    if k0 <= 2 + d as i64 {
        return Err(Error::InvalidParameter(format!(
            "k0 must exceed {}, got {k0}",
            2 + d
        )));
    }
    if trunc > tables.trunc {
        return Err(Error::InvalidParameter("truncation exceeds walk tables".into()));
    }
    let mut descriptors = Vec::new();
    let mut columns = Vec::new();
    let mut k = if k0 % 2 == 0 { k0 } else { k0 + 1 };
    while k <= w {
        let mult = basis(w - k, false, trunc, prec);
        if !mult.is_empty() {
            let e2 = tables.eis2_coeffs(k, None)?;
            let e1 = tables.eis1_coeffs(k)?;
            let ecl = eisenstein_q(k, trunc, prec)?;
            let subs: Vec<(EisCoeffTable, EisCoeffTable)> =
                (0..=d).map(|j| tables.sub_eis_coeffs(k, j)).collect::<Result<_>>()?;
            for (mi, m) in mult.iter().enumerate() {
                let top = conv_scalar(m, scalar_coeffs(&e2), trunc, prec);
                let mid = conv_poly(m, poly_coeffs(&e1), trunc, d, prec);
                let bot = conv_scalar(m, &ecl.coeffs, trunc, prec);
                columns.push(stack_column(&top, Some(&mid), Some(&bot), trunc, d, prec));
                descriptors.push(ColumnDescriptor {
                    kind: ColumnKind::ExtTriple,
                    eis_weight: k,
                    multiplier: mi,
                });
                for (j, (sub_top, sub_bottom)) in subs.iter().enumerate() {
                    let top = conv_scalar(m, scalar_coeffs(sub_top), trunc, prec);
                    let mid = conv_poly(m, poly_coeffs(sub_bottom), trunc, d, prec);
                    columns.push(stack_column(&top, Some(&mid), None, trunc, d, prec));
                    descriptors.push(ColumnDescriptor {
                        kind: ColumnKind::SubPair { j },
                        eis_weight: k,
                        multiplier: mi,
                    });
                }
            }
        }
        k += 2;
    }
    for (mi, m) in basis(w, false, trunc, prec).iter().enumerate() {
        columns.push(stack_column(&m.coeffs, None, None, trunc, d, prec));
        descriptors.push(ColumnDescriptor {
            kind: ColumnKind::Classical,
            eis_weight: w,
            multiplier: mi,
        });
    }
    if columns.is_empty() && dim_modular(w) == 0 {
        return Err(Error::InvalidParameter(format!("empty span at weight {w}")));
    }
    Ok(SpanBasis { target_weight: w, trunc, degree: d, descriptors, columns })
}

/// The stacked target `Δ^n · (ε_{f,g}, I_f, 1)` at truncation `trunc`,
/// together with the `ε`-coefficient consistency diagnostic.
pub fn saturation_target(
    f: &QSeries,
    g: &QSeries,
    n: u32,
    trunc: usize,
    prec: u32,
) -> Result<(Vec<MpComplex>, f64)> {
    let d = (f.weight - 2) as usize;
    let delta_n = delta_q(trunc, prec).pow(n);
    let (eps, junk) = epsilon_fg_qcoeffs(f, g, trunc)?;
    let top = conv_scalar(&delta_n, &eps, trunc, prec);
    let i_f = eichler_i_u_qcoeffs(f, trunc)?;
    let mid = conv_poly(&delta_n, &i_f, trunc, d, prec);
    Ok((stack_column(&top, Some(&mid), Some(&delta_n.coeffs), trunc, d, prec), junk))
}

/// Least-squares report from the pivoted factorization.
#[derive(Clone, Debug)]
pub struct LsqReport {
    pub coeffs: Vec<MpComplex>,
    /// `‖A x - b‖ / ‖b‖` in the equilibrated metric.
    pub residual: f64,
    /// Pivot magnitudes `|R_jj|` in factorization order.
    pub pivots: Vec<f64>,
    /// Smallest-to-largest pivot ratio.
    pub pivot_ratio: f64,
}

/// Column-pivoted modified Gram-Schmidt least squares. Rows are scaled
/// to unit max magnitude and columns to unit norm; the reported
/// residual and pivots refer to the scaled system, while `coeffs` are
/// unscaled.
pub fn solve_least_squares(columns: &[Vec<MpComplex>], rhs: &[MpComplex]) -> LsqReport {
    let prec = rhs
        .iter()
        .map(|z| z.prec())
        .max()
        .unwrap_or(crate::num::DEFAULT_PREC);
    let m = rhs.len();
    let n = columns.len();
    // row equilibration
    let mut row_scale = vec![0.0f64; m];
    for i in 0..m {
        let mut mx = rhs[i].abs_f64();
        for col in columns {
            mx = mx.max(col[i].abs_f64());
        }
        row_scale[i] = if mx > 0.0 { 1.0 / mx } else { 1.0 };
    }
    let scale_vec = |v: &[MpComplex]| -> Vec<MpComplex> {
        v.iter().zip(&row_scale).map(|(z, s)| z.scale_f64(*s)).collect()
    };
    let mut work: Vec<Vec<MpComplex>> = columns.iter().map(|c| scale_vec(c)).collect();
    let mut b = scale_vec(rhs);
    // column normalization
    let mut col_scale = vec![1.0f64; n];
    for (j, col) in work.iter_mut().enumerate() {
        let norm = l2(col);
        if norm > 0.0 {
            col_scale[j] = 1.0 / norm;
            for z in col.iter_mut() {
                *z = z.scale_f64(col_scale[j]);
            }
        }
    }
    let b_norm = l2(&b).max(f64::MIN_POSITIVE);
    // right-looking MGS with column pivoting
    let steps = n.min(m);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut q: Vec<Vec<MpComplex>> = Vec::with_capacity(steps);
    let mut r = vec![vec![MpComplex::new(prec); n]; steps];
    let mut pivots = Vec::with_capacity(steps);
    for step in 0..steps {
        // pick the remaining column of largest norm
        let (best, best_norm) = (step..n)
            .map(|j| (j, l2(&work[j])))
            .fold((step, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        work.swap(step, best);
        perm.swap(step, best);
        for row in r.iter_mut() {
            row.swap(step, best);
        }
        pivots.push(best_norm);
        if best_norm <= 0.0 {
            q.push(vec![MpComplex::new(prec); m]);
            continue;
        }
        let qj: Vec<MpComplex> =
            work[step].iter().map(|z| z.scale_f64(1.0 / best_norm)).collect();
        r[step][step] = MpComplex::from_f64(prec, best_norm, 0.0);
        for l in (step + 1)..n {
            let proj = dot_conj(&qj, &work[l]);
            for (wz, qz) in work[l].iter_mut().zip(&qj) {
                *wz -= &(qz * &proj);
            }
            r[step][l] = proj;
        }
        q.push(qj);
    }
    // y = Q^H b, back-substitute R x = y
    let mut x = vec![MpComplex::new(prec); n];
    let y: Vec<MpComplex> = q.iter().map(|qj| dot_conj(qj, &b)).collect();
    for step in (0..steps).rev() {
        if pivots[step] <= 0.0 {
            continue;
        }
        let mut acc = y[step].clone();
        for l in (step + 1)..n {
            acc -= &(&r[step][l] * &x[l]);
        }
        x[step] = &acc / &r[step][step];
    }
    // un-permute and un-scale
    let mut coeffs = vec![MpComplex::new(prec); n];
    for (pos, &orig) in perm.iter().enumerate() {
        coeffs[orig] = x[pos].scale_f64(col_scale[orig]);
    }
    // residual in the equilibrated metric, computed against the inputs
    for (j, col) in columns.iter().enumerate() {
        if coeffs[j].is_zero() {
            continue;
        }
        for i in 0..m {
            b[i] -= &(&col[i].scale_f64(row_scale[i]) * &coeffs[j]);
        }
    }
    let residual = l2(&b) / b_norm;
    let pmax = pivots.iter().cloned().fold(0.0f64, f64::max);
    let pmin = pivots.iter().cloned().filter(|p| *p > 0.0).fold(pmax, f64::min);
    LsqReport {
        coeffs,
        residual,
        pivots,
        pivot_ratio: if pmax > 0.0 { pmin / pmax } else { 0.0 },
    }
}

fn l2(v: &[MpComplex]) -> f64 {
    let prec = v.first().map(|z| z.prec()).unwrap_or(53);
    let mut acc = Float::new(prec);
    for z in v {
        acc += z.norm_sqr();
    }
    acc.sqrt().to_f64()
}

fn dot_conj(a: &[MpComplex], b: &[MpComplex]) -> MpComplex {
    let mut acc = MpComplex::new(a[0].prec().max(b[0].prec()));
    for (x, y) in a.iter().zip(b) {
        acc += &(&x.conj() * y);
    }
    acc
}

/// Outcome of the ascending-`n` saturation solve.
#[derive(Clone, Debug)]
pub struct SaturationResult {
    pub succeeded: bool,
    /// First `n` with relative residual below tolerance (or the best
    /// attempt when none succeeded).
    pub exponent: u32,
    pub k0: i64,
    pub trunc: usize,
    pub cutoff: i64,
    pub tol: f64,
    pub residual: f64,
    pub pivot_ratio: f64,
    pub pivots: Vec<f64>,
    pub coeffs: Vec<MpComplex>,
    pub descriptors: Vec<ColumnDescriptor>,
    /// `(n, residual)` for every attempted exponent.
    pub attempts: Vec<(u32, f64)>,
    /// `ε`-coefficient consistency diagnostic (relative size of terms
    /// that must cancel).
    pub epsilon_junk: f64,
}

/// Ascend `n = 1..=n_max` and solve `Δ^n (ε_{f,g}, I_f, 1)` against the
/// weight-`12n` span. The walk tables are built once and reused.
#[allow(clippy::too_many_arguments)]
pub fn saturate_solve(
    f: &QSeries,
    g: &QSeries,
    n_max: u32,
    k0: i64,
    trunc: usize,
    cutoff: i64,
    tol: f64,
    prec: u32,
) -> Result<SaturationResult> {
    let pair = depth2_pair(f, g, 1e-6)?;
    let d = pair.degree();
    if k0 <= 2 + d as i64 {
        return Err(Error::InvalidParameter(format!(
            "k0 must exceed {}, got {k0}",
            2 + d
        )));
    }
    let tables = EisTables::build(&pair, cutoff, trunc, prec, true);
    let mut attempts = Vec::new();
    let mut best: Option<(u32, LsqReport, SpanBasis, f64)> = None;
    for n in 1..=n_max {
        let w = 12 * n as i64;
        let span = match assemble_span(&tables, w, k0, trunc, prec) {
            Ok(s) => s,
            Err(_) => {
                attempts.push((n, f64::INFINITY));
                continue;
            }
        };
        let (target, junk) = saturation_target(f, g, n, trunc, prec)?;
        let report = solve_least_squares(&span.columns, &target);
        attempts.push((n, report.residual));
        let better = match &best {
            Some((_, b, _, _)) => report.residual < b.residual,
            None => true,
        };
        let solved = report.residual < tol;
        if better || solved {
            best = Some((n, report, span, junk));
        }
        if solved {
            break;
        }
    }
    let (exponent, report, span, junk) = best.ok_or_else(|| {
        Error::VerificationFailed("no saturation attempt could be assembled".into())
    })?;
    Ok(SaturationResult {
        succeeded: report.residual < tol,
        exponent,
        k0,
        trunc,
        cutoff,
        tol,
        residual: report.residual,
        pivot_ratio: report.pivot_ratio,
        pivots: report.pivots,
        coeffs: report.coeffs,
        descriptors: span.descriptors,
        attempts,
        epsilon_junk: junk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth2::depth2_pair;
    use crate::qseries::delta_q;

    const P: u32 = 128;

    #[test]
    fn span_column_count_at_weight_24() {
        let f = delta_q(24, P);
        let pair = depth2_pair(&f, &f, 1e-9).unwrap();
        let tables = EisTables::build(&pair, 60, 12, 53, true);
        let span = assemble_span(&tables, 24, 14, 12, P).unwrap();
        // Σ_{k' = 14, 16, ..., 24} dim M_{24-k'} (1 + 11) + dim M_24
        // = (1+1+1+1+0+1) * 12 + 3 = 63
        assert_eq!(span.columns.len(), 63);
        assert_eq!(span.descriptors.len(), 63);
        // ι2 columns live in the top block only
        for (desc, col) in span.descriptors.iter().zip(&span.columns) {
            if desc.kind == ColumnKind::Classical {
                for i in span.middle_rows().chain(span.bottom_rows()) {
                    assert!(col[i].is_zero());
                }
            }
            if let ColumnKind::SubPair { .. } = desc.kind {
                for i in span.bottom_rows() {
                    assert!(col[i].is_zero());
                }
            }
        }
    }

    #[test]
    fn least_squares_recovers_exact_combination() {
        // synthetic: 3 columns, rhs an exact combination
        let mk = |vals: [f64; 6]| -> Vec<MpComplex> {
            vals.iter().map(|v| MpComplex::from_f64(P, *v, 0.5 * v)).collect()
        };
        let c0 = mk([1.0, 2.0, -1.0, 0.5, 3.0, -2.0]);
        let c1 = mk([0.0, 1.0, 4.0, -2.0, 1.0, 1.0]);
        let c2 = mk([2.0, -1.0, 0.0, 1.0, 0.0, 2.0]);
        let x = [
            MpComplex::from_f64(P, 0.7, -0.2),
            MpComplex::from_f64(P, -1.3, 0.4),
            MpComplex::from_f64(P, 0.1, 1.1),
        ];
        let mut rhs = vec![MpComplex::new(P); 6];
        for (xc, col) in x.iter().zip([&c0, &c1, &c2]) {
            for i in 0..6 {
                rhs[i] += &(xc * &col[i]);
            }
        }
        let report = solve_least_squares(&[c0, c1, c2], &rhs);
        assert!(report.residual < 1e-30, "residual {}", report.residual);
        for (got, want) in report.coeffs.iter().zip(&x) {
            assert!((got - want).abs_f64() < 1e-25);
        }
    }

    #[test]
    fn bottom_subproblem_delta_squared() {
        // Δ^2 must decompose over the classical bottoms of the triple
        // columns alone
        let f = delta_q(24, P);
        let pair = depth2_pair(&f, &f, 1e-9).unwrap();
        let tables = EisTables::build(&pair, 40, 16, 53, true);
        let span = assemble_span(&tables, 24, 14, 16, P).unwrap();
        let delta2 = delta_q(16, P).pow(2);
        let rows = span.bottom_rows();
        let cols: Vec<Vec<MpComplex>> = span
            .columns
            .iter()
            .zip(&span.descriptors)
            .filter(|(_, d)| d.kind == ColumnKind::ExtTriple)
            .map(|(c, _)| c[rows.clone()].to_vec())
            .collect();
        assert_eq!(cols.len(), 5);
        let rhs: Vec<MpComplex> = delta2.coeffs.clone();
        let report = solve_least_squares(&cols, &rhs);
        assert!(report.residual < 1e-10, "residual {}", report.residual);
    }

    #[test]
    fn target_assembles() {
        let f = delta_q(24, P);
        let (target, junk) = saturation_target(&f, &f, 2, 24, P).unwrap();
        assert_eq!(target.len(), 25 * 13);
        assert!(junk < 1e-20, "junk {junk}");
        // bottom block is Δ^2
        let delta2 = delta_q(24, P).pow(2);
        for n in 0..=24usize {
            let got = &target[25 * 12 + n];
            assert!((got - &delta2.coeffs[n]).abs_f64() < 1e-25);
        }
    }
}
