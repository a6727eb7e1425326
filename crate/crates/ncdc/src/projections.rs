//! Constructive projection lemmas: spectral cut-offs, range fitting, and
//! controlled products.
//!
//! The basic device is the Chebyshev cut-off: for a matrix `z` and `C > 0`,
//! the spectral projection of `|z|` onto `[0, C‖z‖₂]` has operator-norm
//! control `‖zp‖∞ ≤ C‖z‖₂` while sacrificing at most `C⁻²` of the
//! normalized trace. Range fitting redirects one factor's output into
//! another projection's range without losing trace, and the inductive
//! product construction chains these through meets of projections to
//! control `‖z₁⋯z_n p‖∞ ≤ Cⁿ·Π‖zᵢ‖₂` with `tr(p) ≥ 1 − nC⁻²`.
//!
//! All `‖·‖₂` quantities are normalized Hilbert–Schmidt norms
//! `(tr|z|²/k)^{1/2}`; operator norms are largest singular values. Every
//! emitted certificate carries the measured bound so the inequalities are
//! checkable per call, and meets verify `tr(p∧q) ≥ tr(p)+tr(q)−1` as they
//! are formed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{NcError, Result};
use crate::repn::hs_norm;

/// Principal angles closer to 0 than this (cosine above `1 − 1e−8`) count
/// as a shared direction when intersecting projection ranges.
const MEET_COS_CUTOFF: f64 = 1.0 - 1e-8;

/// Relative singular-value threshold for numerical kernels and ranges.
const RANK_TOL: f64 = 1e-10;

/// An orthogonal projection together with its certificate quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCert {
    /// The projection matrix (`p² = p = p*` within 1e−10).
    pub p: DMatrix<Complex64>,
    /// Normalized trace `tr(p)/k`.
    pub trace: f64,
    /// Measured operator norm of the controlled product.
    pub bound_achieved: f64,
}

/// Serialized form; the matrix is included only on request to keep reports
/// small.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionCertDto {
    /// Normalized trace.
    pub trace: f64,
    /// Measured operator norm of the controlled product.
    pub bound_achieved: f64,
    /// Flattened projection entries as `(re, im)` rows, row-major; absent
    /// unless requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<(f64, f64)>>>,
}

impl ProjectionCert {
    fn new(p: DMatrix<Complex64>, bound_achieved: f64) -> Self {
        let trace = p.trace().re / p.nrows() as f64;
        ProjectionCert { p, trace, bound_achieved }
    }

    /// Serializable view, optionally including the matrix entries.
    pub fn to_dto(&self, include_matrix: bool) -> ProjectionCertDto {
        ProjectionCertDto {
            trace: self.trace,
            bound_achieved: self.bound_achieved,
            matrix: include_matrix.then(|| {
                (0..self.p.nrows())
                    .map(|i| {
                        (0..self.p.ncols())
                            .map(|j| (self.p[(i, j)].re, self.p[(i, j)].im))
                            .collect()
                    })
                    .collect()
            }),
        }
    }

    /// Residual `max(‖p² − p‖∞, ‖p − p*‖∞)`; small for every construction
    /// in this module.
    pub fn projection_defect(&self) -> f64 {
        let idem = &self.p * &self.p - &self.p;
        let herm = &self.p - self.p.adjoint();
        op_norm(&idem).max(op_norm(&herm))
    }
}

/// Largest singular value.
pub fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Projection onto the span of the given (not necessarily orthonormal)
/// columns, via SVD orthonormalization with relative cutoff [`RANK_TOL`].
fn proj_onto_columns(cols: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = cols.nrows();
    if cols.ncols() == 0 {
        return DMatrix::zeros(k, k);
    }
    let svd = cols.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let tol = RANK_TOL * smax.max(1e-300);
    let mut basis_cols = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > tol {
            basis_cols.push(u.column(i).clone_owned());
        }
    }
    let mut acc = DMatrix::<Complex64>::zeros(k, k);
    for b in basis_cols {
        acc += &b * b.adjoint();
    }
    acc
}

/// Orthonormal basis of a projection's range (eigenvectors with eigenvalue
/// near 1).
fn range_basis(p: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = p.nrows();
    let eig = p.clone().symmetric_eigen();
    let cols: Vec<usize> =
        (0..k).filter(|i| eig.eigenvalues[*i] > 0.5).collect();
    let mut out = DMatrix::<Complex64>::zeros(k, cols.len());
    for (j, i) in cols.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(*i));
    }
    out
}

/// Meet (range intersection) of two projections via principal angles:
/// directions whose cosine exceeds the cutoff are kept. Checks the trace
/// inequality `tr(p∧q) ≥ tr(p) + tr(q) − 1` (up to float) before returning.
pub fn meet(p: &DMatrix<Complex64>, q: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if p.nrows() != q.nrows() {
        return Err(NcError::Dimension("projection sizes differ".into()));
    }
    let k = p.nrows();
    let bp = range_basis(p);
    let bq = range_basis(q);
    if bp.ncols() == 0 || bq.ncols() == 0 {
        return Ok(DMatrix::zeros(k, k));
    }
    let m = bp.adjoint() * &bq;
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let mut shared = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s >= MEET_COS_CUTOFF {
            shared.push(i);
        }
    }
    let mut cols = DMatrix::<Complex64>::zeros(k, shared.len());
    for (j, i) in shared.iter().enumerate() {
        cols.set_column(j, &(&bp * u.column(*i)));
    }
    let out = proj_onto_columns(&cols);
    let lower = (p.trace().re + q.trace().re - k as f64) / k as f64;
    let got = out.trace().re / k as f64;
    if got < lower - 1e-8 {
        return Err(NcError::Numerical(format!(
            "projection meet lost trace: {} < {}",
            got, lower
        )));
    }
    Ok(out)
}

/// The Chebyshev cut-off: `p = 1_{[0, C‖z‖₂]}(|z|)`, guaranteeing
/// `‖zp‖∞ ≤ C‖z‖₂` and `tr(p) ≥ 1 − C⁻²`. A numerically zero `z` yields
/// the identity (everything is controlled).
pub fn cheb_projection(z: &DMatrix<Complex64>, c: f64) -> Result<ProjectionCert> {
    if c <= 0.0 {
        return Err(NcError::Range("cut-off constant C must be positive".into()));
    }
    if z.nrows() != z.ncols() {
        return Err(NcError::Dimension("cheb_projection needs a square matrix".into()));
    }
    let k = z.nrows();
    let l2 = hs_norm(z);
    if l2 == 0.0 {
        return Ok(ProjectionCert::new(DMatrix::identity(k, k), 0.0));
    }
    let svd = z.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let v = vt.adjoint();
    let cutoff = c * l2;
    let mut cols = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= cutoff {
            cols.push(v.column(i).clone_owned());
        }
    }
    let mut p = DMatrix::<Complex64>::zeros(k, k);
    for b in cols {
        p += &b * b.adjoint();
    }
    let bound = op_norm(&(z * &p));
    Ok(ProjectionCert::new(p, bound))
}

/// Range fitting: the largest-trace projection `p` with `x·p·H ⊆ q·H`,
/// namely the projection onto `ker(q^⊥ x)`. Its trace is at least `tr(q)`
/// by rank counting.
pub fn range_fit_projection(
    x: &DMatrix<Complex64>,
    q: &DMatrix<Complex64>,
) -> Result<ProjectionCert> {
    if x.nrows() != x.ncols() || q.nrows() != q.ncols() || x.nrows() != q.nrows() {
        return Err(NcError::Dimension("range_fit needs square matrices of one size".into()));
    }
    let k = x.nrows();
    let q_perp = DMatrix::identity(k, k) - q;
    let a = &q_perp * x;
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let v = vt.adjoint();
    // The kernel threshold is relative to the scale of x, not of q^⊥x:
    // when q ≈ I the compressed matrix is pure rounding noise and a
    // tolerance relative to its own largest value would reject the whole
    // (genuine) kernel.
    let x_scale = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = RANK_TOL * x_scale.max(1e-300);
    let mut p = DMatrix::<Complex64>::zeros(k, k);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol {
            let b = v.column(i);
            p += b * b.adjoint();
        }
    }
    let bound = op_norm(&(&q_perp * x * &p));
    Ok(ProjectionCert::new(p, bound))
}

/// Which side of the product the projection controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductSide {
    /// `‖z₁⋯z_n · p‖∞` is controlled.
    Right,
    /// `‖p · z₁⋯z_n‖∞` is controlled.
    Left,
    /// Split at the given index `s` (1 ≤ s < n): `p` controls
    /// `‖p·z₁⋯z_s‖∞` and `‖z_{s+1}⋯z_n·p‖∞` simultaneously.
    TwoSided(usize),
}

fn product(zs: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let mut acc = zs[0].clone();
    for z in &zs[1..] {
        acc = acc * z;
    }
    acc
}

fn right_product_projection(zs: &[DMatrix<Complex64>], c: f64) -> Result<ProjectionCert> {
    // Induction: the tail projection controls z₂⋯z_n, the head cut-off
    // controls z₁, and range fitting glues them so the norms multiply.
    if zs.len() == 1 {
        return cheb_projection(&zs[0], c);
    }
    let tail_cert = right_product_projection(&zs[1..], c)?;
    let head = cheb_projection(&zs[0], c)?;
    let tail_prod = product(&zs[1..]) * &tail_cert.p;
    let fit = range_fit_projection(&tail_prod, &head.p)?;
    let p = meet(&fit.p, &tail_cert.p)?;
    let bound = op_norm(&(product(zs) * &p));
    Ok(ProjectionCert::new(p, bound))
}

/// The controlled-product projection: for `side = Right`, a projection `p`
/// with `‖z₁⋯z_n p‖∞ ≤ Cⁿ·Π‖zᵢ‖₂` and `tr(p) ≥ 1 − n·C⁻²`, built by the
/// inductive cut-off / range-fit / meet construction. `Left` is obtained by
/// applying the right construction to the reversed adjoints; `TwoSided(s)`
/// meets a left control of the first `s` factors with a right control of
/// the rest (trace bound `1 − n·C⁻²` with the two groups' counts adding).
pub fn product_projection(
    zs: &[DMatrix<Complex64>],
    c: f64,
    side: ProductSide,
) -> Result<ProjectionCert> {
    if zs.is_empty() {
        return Err(NcError::Range("product_projection needs at least one factor".into()));
    }
    let k = zs[0].nrows();
    for z in zs {
        if z.nrows() != k || z.ncols() != k {
            return Err(NcError::Dimension("factors must be square of one size".into()));
        }
    }
    match side {
        ProductSide::Right => right_product_projection(zs, c),
        ProductSide::Left => {
            let rev_adj: Vec<DMatrix<Complex64>> =
                zs.iter().rev().map(|z| z.adjoint()).collect();
            let cert = right_product_projection(&rev_adj, c)?;
            let bound = op_norm(&(&cert.p * product(zs)));
            Ok(ProjectionCert::new(cert.p, bound))
        }
        ProductSide::TwoSided(s) => {
            if s == 0 || s >= zs.len() {
                return Err(NcError::Range(format!(
                    "two-sided split {} must satisfy 1 ≤ s < {}",
                    s,
                    zs.len()
                )));
            }
            let left = product_projection(&zs[..s], c, ProductSide::Left)?;
            let right = product_projection(&zs[s..], c, ProductSide::Right)?;
            let p = meet(&left.p, &right.p)?;
            let bound = op_norm(&(&p * product(&zs[..s])))
                .max(op_norm(&(product(&zs[s..]) * &p)));
            Ok(ProjectionCert::new(p, bound))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repn::{sample, SampleKind};
    use nalgebra::DVector;

    fn cr(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn random_matrix(k: usize, seed: u64) -> DMatrix<Complex64> {
        let xi = sample(SampleKind::GueSelfadjoint, k, 2, seed).unwrap();
        xi.mats()[0].clone() + xi.mats()[1].map(|z| z * Complex64::new(0.0, 1.0))
    }

    #[test]
    fn cheb_two_point_spectrum() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![cr(0.1), cr(10.0)]));
        let cert = cheb_projection(&z, 1.0).unwrap();
        let l2 = hs_norm(&z);
        assert!((l2 - 7.071424).abs() < 1e-4);
        assert!((cert.trace - 0.5).abs() < 1e-12);
        assert!((cert.bound_achieved - 0.1).abs() < 1e-12);
        assert!((cert.p[(0, 0)] - cr(1.0)).norm() < 1e-12);
        assert!(cert.p[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn cheb_trivial_when_norm_small() {
        // Operator norm already below C‖z‖₂ → nothing is cut.
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![cr(1.0), cr(1.0), cr(1.0)]));
        let cert = cheb_projection(&z, 2.0).unwrap();
        assert_eq!(cert.p, DMatrix::identity(3, 3));
        assert!((cert.trace - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cheb_zero_input_gives_identity() {
        let cert = cheb_projection(&DMatrix::zeros(3, 3), 1.0).unwrap();
        assert_eq!(cert.p, DMatrix::identity(3, 3));
        assert_eq!(cert.bound_achieved, 0.0);
    }

    #[test]
    fn cheb_monte_carlo_bounds() {
        let c = 2.0;
        let k = 16;
        let mut min_trace: f64 = 1.0;
        for seed in 0..1000u64 {
            let z = random_matrix(k, seed);
            let cert = cheb_projection(&z, c).unwrap();
            let l2 = hs_norm(&z);
            assert!(cert.bound_achieved <= c * l2 + 1e-9);
            assert!(cert.trace >= 1.0 - 1.0 / (c * c) - 1e-12);
            assert!(cert.projection_defect() < 1e-10);
            min_trace = min_trace.min(cert.trace);
        }
        assert!(min_trace >= 0.75);
    }

    #[test]
    fn range_fit_invertible_full_target() {
        let k = 4;
        let x = random_matrix(k, 3) + DMatrix::from_diagonal_element(k, k, cr(10.0));
        let cert = range_fit_projection(&x, &DMatrix::identity(k, k)).unwrap();
        assert_eq!(cert.p, DMatrix::identity(k, k));
    }

    #[test]
    fn range_fit_zero_source() {
        let k = 4;
        let q = DMatrix::<Complex64>::zeros(k, k);
        let cert = range_fit_projection(&DMatrix::zeros(k, k), &q).unwrap();
        assert_eq!(cert.p, DMatrix::identity(k, k));
    }

    #[test]
    fn range_fit_half_rank() {
        let k = 8;
        // x of rank k/2, q of rank k/2.
        let g = random_matrix(k, 7);
        let mut x = DMatrix::<Complex64>::zeros(k, k);
        x.view_mut((0, 0), (k / 2, k)).copy_from(&g.view((0, 0), (k / 2, k)));
        let mut q = DMatrix::<Complex64>::zeros(k, k);
        for i in 0..k / 2 {
            q[(i, i)] = cr(1.0);
        }
        let cert = range_fit_projection(&x, &q).unwrap();
        assert!(cert.trace >= 0.5 - 1e-12);
        let q_perp = DMatrix::identity(k, k) - &q;
        assert!(op_norm(&(q_perp * &x * &cert.p)) < 1e-10);
    }

    #[test]
    fn product_single_factor_is_cheb() {
        let z = random_matrix(5, 11);
        let a = product_projection(std::slice::from_ref(&z), 2.0, ProductSide::Right).unwrap();
        let b = cheb_projection(&z, 2.0).unwrap();
        assert!((&a.p - &b.p).iter().all(|w| w.norm() < 1e-12));
    }

    #[test]
    fn product_of_identities() {
        let id = DMatrix::<Complex64>::identity(4, 4);
        let cert =
            product_projection(&[id.clone(), id.clone()], 1.0, ProductSide::Right).unwrap();
        assert_eq!(cert.p, id);
    }

    #[test]
    fn product_monte_carlo_pairs() {
        let c = 3.0;
        let k = 16;
        for seed in 0..200u64 {
            let z1 = random_matrix(k, 2 * seed + 1);
            let z2 = random_matrix(k, 2 * seed + 2);
            let cert =
                product_projection(&[z1.clone(), z2.clone()], c, ProductSide::Right).unwrap();
            let bound = c * c * hs_norm(&z1) * hs_norm(&z2);
            assert!(cert.bound_achieved <= bound + 1e-8, "seed {}", seed);
            assert!(cert.trace >= 1.0 - 2.0 / (c * c) - 1e-9, "seed {}", seed);
            assert!(cert.projection_defect() < 1e-9);
        }
    }

    #[test]
    fn product_left_side() {
        let c = 3.0;
        let k = 12;
        let z1 = random_matrix(k, 101);
        let z2 = random_matrix(k, 102);
        let cert = product_projection(&[z1.clone(), z2.clone()], c, ProductSide::Left).unwrap();
        let bound = c * c * hs_norm(&z1) * hs_norm(&z2);
        assert!(op_norm(&(&cert.p * (&z1 * &z2))) <= bound + 1e-8);
        assert!(cert.trace >= 1.0 - 2.0 / (c * c) - 1e-9);
    }

    #[test]
    fn product_two_sided() {
        let c = 3.0;
        let k = 12;
        let zs: Vec<DMatrix<Complex64>> = (0..3).map(|i| random_matrix(k, 200 + i)).collect();
        let cert = product_projection(&zs, c, ProductSide::TwoSided(1)).unwrap();
        assert!(cert.trace >= 1.0 - 3.0 / (c * c) - 1e-9);
        let head = c * hs_norm(&zs[0]);
        let tail = c * c * hs_norm(&zs[1]) * hs_norm(&zs[2]);
        assert!(op_norm(&(&cert.p * &zs[0])) <= head + 1e-8);
        assert!(op_norm(&((&zs[1] * &zs[2]) * &cert.p)) <= tail + 1e-8);
    }

    #[test]
    fn meet_trace_inequality() {
        let k = 10;
        for seed in 0..50u64 {
            let p = cheb_projection(&random_matrix(k, 3 * seed), 1.5).unwrap();
            let q = cheb_projection(&random_matrix(k, 3 * seed + 1), 1.5).unwrap();
            let m = meet(&p.p, &q.p).unwrap();
            let tr = m.trace().re / k as f64;
            assert!(tr >= p.trace + q.trace - 1.0 - 1e-8);
        }
    }

    #[test]
    fn cert_serialization_flag() {
        let z = random_matrix(3, 9);
        let cert = cheb_projection(&z, 2.0).unwrap();
        let slim = serde_json::to_string(&cert.to_dto(false)).unwrap();
        let full = serde_json::to_string(&cert.to_dto(true)).unwrap();
        assert!(!slim.contains("matrix"));
        assert!(full.contains("matrix"));
    }
}

