//! Finite-dimensional evaluation of polynomials and tensor matrices.
//!
//! A representation point is a tuple `ξ = (ξ_1, …, ξ_n)` of `k×k` complex
//! matrices. Polynomials evaluate by substitution (star ↦ conjugate
//! transpose); a split tensor element `Σ λ (w ⊗ v)` evaluates to the matrix
//! of the map `η ↦ Σ λ · w(ξ) · η · v(ξ)` on `M_k` in the matrix-unit basis
//! `E_{pq}` with row-major flattening `(p,q) ↦ p·k + q` — concretely
//! `Σ λ · w(ξ) ⊗ v(ξ)ᵀ`.
//!
//! For derivatives of the map `ξ ↦ F(ξ)` as a smooth map of *real* spaces,
//! each coordinate copy of `M_k` is realified in the orthonormal basis
//! `{E_{pq}} ∪ {iE_{pq}}` (real parts first, then imaginary directions,
//! inner product `Re Tr(y*x)`). A term with conjugation flag acts by
//! `η ↦ λ w(ξ) η* v(ξ)`, which is real-linear but not complex-linear; the
//! realified block forms are assembled exactly from the term structure,
//! never by finite differences.
//!
//! [`phi_embed`] is the trace-preserving embedding of real-linear operators
//! on `M_k` into 2×2 complex block matrices: the realified space splits as
//! self-adjoint ⊕ skew-adjoint, each corner of the operator is
//! complex-linearly extended, and the corners are reassembled as an
//! `M_2(M_{k²})` block matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derivation::{partial_deriv_presplit, TensorElement, TensorMatrix};
use crate::error::{NcError, Result};
use crate::ncpoly::{Monomial, PolyTuple, Polynomial};

/// A representation point: `n` complex `k×k` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    k: usize,
    mats: Vec<DMatrix<Complex64>>,
}

impl MatrixTuple {
    /// Builds a tuple, validating that all matrices are `k×k` with finite
    /// entries.
    pub fn new(k: usize, mats: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if k == 0 {
            return Err(NcError::Range("matrix size k must be positive".into()));
        }
        if mats.is_empty() {
            return Err(NcError::Range("matrix tuple must be nonempty".into()));
        }
        for (i, m) in mats.iter().enumerate() {
            if m.nrows() != k || m.ncols() != k {
                return Err(NcError::Dimension(format!(
                    "matrix {} is {}x{}, expected {}x{}",
                    i + 1,
                    m.nrows(),
                    m.ncols(),
                    k,
                    k
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(NcError::Range(format!("matrix {} has non-finite entries", i + 1)));
            }
        }
        Ok(MatrixTuple { k, mats })
    }

    /// Matrix size.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of coordinates.
    pub fn n(&self) -> usize {
        self.mats.len()
    }

    /// Coordinate matrices.
    pub fn mats(&self) -> &[DMatrix<Complex64>] {
        &self.mats
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexMatDto {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct MatrixTupleDto {
    k: usize,
    n: usize,
    mats: Vec<ComplexMatDto>,
}

fn mat_to_dto(m: &DMatrix<Complex64>) -> ComplexMatDto {
    ComplexMatDto {
        re: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect(),
        im: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect(),
    }
}

fn dto_to_mat(dto: &ComplexMatDto) -> std::result::Result<DMatrix<Complex64>, String> {
    let rows = dto.re.len();
    if rows == 0 || dto.im.len() != rows {
        return Err("re/im grids must be nonempty with equal shape".into());
    }
    let cols = dto.re[0].len();
    if dto.re.iter().any(|r| r.len() != cols) || dto.im.iter().any(|r| r.len() != cols) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| Complex64::new(dto.re[i][j], dto.im[i][j])))
}

impl Serialize for MatrixTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixTupleDto {
            k: self.k,
            n: self.n(),
            mats: self.mats.iter().map(mat_to_dto).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let dto = MatrixTupleDto::deserialize(d)?;
        if dto.mats.len() != dto.n {
            return Err(D::Error::custom("n does not match number of matrices"));
        }
        let mats = dto
            .mats
            .iter()
            .map(|m| dto_to_mat(m).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        MatrixTuple::new(dto.k, mats).map_err(D::Error::custom)
    }
}

/// A dense complex matrix with the trace normalization it should be read
/// against (the size `k` of the underlying representation).
#[derive(Debug, Clone, PartialEq)]
pub struct BigMatrix {
    /// Dense complex entries.
    pub mat: DMatrix<Complex64>,
    /// Trace normalization parameter (`k` of the representation point).
    pub normalization: usize,
}

#[derive(Serialize, Deserialize)]
struct BigMatrixDto {
    rows: usize,
    cols: usize,
    normalization: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for BigMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = mat_to_dto(&self.mat);
        BigMatrixDto {
            rows: self.mat.nrows(),
            cols: self.mat.ncols(),
            normalization: self.normalization,
            re: dto.re,
            im: dto.im,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BigMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let dto = BigMatrixDto::deserialize(d)?;
        let mat =
            dto_to_mat(&ComplexMatDto { re: dto.re, im: dto.im }).map_err(D::Error::custom)?;
        if mat.nrows() != dto.rows || mat.ncols() != dto.cols {
            return Err(D::Error::custom("entry grid does not match rows x cols"));
        }
        Ok(BigMatrix { mat, normalization: dto.normalization })
    }
}

fn check_arity(arity: usize, xi: &MatrixTuple) -> Result<()> {
    if arity > xi.n() {
        return Err(NcError::Arity(format!(
            "polynomial arity {} exceeds tuple length {}",
            arity,
            xi.n()
        )));
    }
    Ok(())
}

/// Evaluates a word at a representation point (star ↦ adjoint).
pub fn eval_word(w: &Monomial, xi: &MatrixTuple) -> Result<DMatrix<Complex64>> {
    let k = xi.k();
    let mut acc = DMatrix::<Complex64>::identity(k, k);
    for letter in &w.0 {
        let idx = letter.gen as usize;
        if idx == 0 || idx > xi.n() {
            return Err(NcError::Arity(format!(
                "generator {} out of range for a {}-tuple",
                idx,
                xi.n()
            )));
        }
        let m = &xi.mats()[idx - 1];
        acc = if letter.starred { acc * m.adjoint() } else { acc * m };
    }
    Ok(acc)
}

/// Evaluates a polynomial at a representation point.
pub fn eval_poly(p: &Polynomial, xi: &MatrixTuple) -> Result<DMatrix<Complex64>> {
    check_arity(p.arity(), xi)?;
    let k = xi.k();
    let mut acc = DMatrix::<Complex64>::zeros(k, k);
    for (w, c) in p.terms() {
        acc += eval_word(w, xi)?.map(|z| z * c);
    }
    Ok(acc)
}

/// Evaluates a tuple entrywise.
pub fn eval_tuple(f: &PolyTuple, xi: &MatrixTuple) -> Result<Vec<DMatrix<Complex64>>> {
    f.entries().iter().map(|p| eval_poly(p, xi)).collect()
}

/// The complex matrix (one term) `w(ξ) ⊗ v(ξ)ᵀ` on flattened `M_k`.
fn term_matrix(
    w: &Monomial,
    v: &Monomial,
    lambda: Complex64,
    xi: &MatrixTuple,
) -> Result<DMatrix<Complex64>> {
    let wm = eval_word(w, xi)?;
    let vm = eval_word(v, xi)?;
    Ok(wm.kronecker(&vm.transpose()).map(|z| z * lambda))
}

/// The matrix of `η ↦ Σ λ · w(ξ) · η · v(ξ)` in the flattened matrix-unit
/// basis. Requires a fully split element (no conjugation flags).
pub fn sigma_eval(t: &TensorElement, xi: &MatrixTuple) -> Result<BigMatrix> {
    if !t.is_split() {
        return Err(NcError::Precondition(
            "sigma_eval requires a fully split tensor element".into(),
        ));
    }
    let k = xi.k();
    let mut acc = DMatrix::<Complex64>::zeros(k * k, k * k);
    for (key, c) in t.terms() {
        acc += term_matrix(&key.w, &key.v, *c, xi)?;
    }
    Ok(BigMatrix { mat: acc, normalization: k })
}

/// Block evaluation of a tensor matrix: the `(rows·k²)×(cols·k²)` matrix of
/// entrywise [`sigma_eval`] blocks. Requires fully split entries.
pub fn assemble(tm: &TensorMatrix, xi: &MatrixTuple) -> Result<BigMatrix> {
    let k = xi.k();
    let kk = k * k;
    let mut acc = DMatrix::<Complex64>::zeros(tm.rows() * kk, tm.cols() * kk);
    for i in 0..tm.rows() {
        for j in 0..tm.cols() {
            let block = sigma_eval(tm.get(i, j), xi)?;
            acc.view_mut((i * kk, j * kk), (kk, kk)).copy_from(&block.mat);
        }
    }
    Ok(BigMatrix { mat: acc, normalization: k })
}

/// Flattens a `k×k` complex matrix into the realified coordinate vector
/// `[Re vec(m); Im vec(m)]` (row-major flattening).
pub fn realify(m: &DMatrix<Complex64>) -> DVector<f64> {
    let k = m.nrows();
    let kk = k * k;
    let mut out = DVector::<f64>::zeros(2 * kk);
    for p in 0..k {
        for q in 0..k {
            out[p * k + q] = m[(p, q)].re;
            out[kk + p * k + q] = m[(p, q)].im;
        }
    }
    out
}

/// Inverse of [`realify`].
pub fn unrealify(v: &DVector<f64>, k: usize) -> DMatrix<Complex64> {
    let kk = k * k;
    DMatrix::from_fn(k, k, |p, q| Complex64::new(v[p * k + q], v[kk + p * k + q]))
}

/// Realified block of one tensor term acting on `M_k`: for flag 0 the term
/// acts complex-linearly by `N = λ·w(ξ)⊗v(ξ)ᵀ`, giving `[[C, −D], [D, C]]`
/// with `N = C + iD`; for flag 1 the action is `η ↦ N·(vec η)` *after* the
/// adjoint, i.e. `z ↦ (N·P)·conj(z)` with `P` the transpose permutation,
/// giving `[[C', D'], [D', −C']]` with `N·P = C' + iD'`.
pub fn real_block(t: &TensorElement, xi: &MatrixTuple) -> Result<DMatrix<f64>> {
    let k = xi.k();
    let kk = k * k;
    let mut out = DMatrix::<f64>::zeros(2 * kk, 2 * kk);
    for (key, c) in t.terms() {
        let n = term_matrix(&key.w, &key.v, *c, xi)?;
        let m = if key.d == 0 {
            n
        } else {
            // Column j of N·P is column perm(j) of N, perm(p·k+q) = q·k+p.
            let mut np = DMatrix::<Complex64>::zeros(kk, kk);
            for p in 0..k {
                for q in 0..k {
                    np.set_column(p * k + q, &n.column(q * k + p));
                }
            }
            np
        };
        let sign = if key.d == 0 { -1.0 } else { 1.0 };
        for r in 0..kk {
            for s in 0..kk {
                let z = m[(r, s)];
                out[(r, s)] += z.re;
                out[(r, kk + s)] += sign * z.im;
                out[(kk + r, s)] += z.im;
                out[(kk + r, kk + s)] += -sign * z.re;
            }
        }
    }
    Ok(out)
}

/// The derivative of `ξ ↦ F(ξ)` as a smooth map of real spaces: the
/// `(2pk²) × (2nk²)` real matrix whose `(i,j)` block is the realified
/// partial derivative of the `i`-th entry in variable `j`, assembled
/// exactly from the term structure.
pub fn real_derivative(f: &PolyTuple, xi: &MatrixTuple) -> Result<DMatrix<f64>> {
    check_arity(f.arity(), xi)?;
    let k = xi.k();
    let d = 2 * k * k;
    let p = f.len();
    let n = xi.n();
    let mut out = DMatrix::<f64>::zeros(p * d, n * d);
    for (i, fi) in f.entries().iter().enumerate() {
        for j in 1..=f.arity() as u32 {
            let t = partial_deriv_presplit(fi, j)?;
            let block = real_block(&t, xi)?;
            out.view_mut((i * d, (j as usize - 1) * d), (d, d)).copy_from(&block);
        }
    }
    Ok(out)
}

/// Applies a realified operator to a complex matrix.
pub fn apply_real(r: &DMatrix<f64>, z: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = z.nrows();
    unrealify(&(r * realify(z)), k)
}

/// Realified evaluation of a matrix of tensor elements: the
/// `(2·rows·k²) × (2·cols·k²)` real matrix whose `(i,j)` block is
/// [`real_block`] of the `(i,j)` entry at `xi`. The column count is the
/// operator's input arity (the matrix's `cols`), which may differ from
/// `xi.n()`; `xi` only needs enough coordinates for every generator that
/// occurs in the entries.
pub fn real_linear_matrix(tm: &TensorMatrix, xi: &MatrixTuple) -> Result<DMatrix<f64>> {
    let k = xi.k();
    let d = 2 * k * k;
    let mut out = DMatrix::<f64>::zeros(tm.rows() * d, tm.cols() * d);
    for i in 0..tm.rows() {
        for j in 0..tm.cols() {
            let block = real_block(tm.get(i, j), xi)?;
            out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
        }
    }
    Ok(out)
}

/// The trace-preserving embedding of a real-linear operator on `M_k` into a
/// `2k² × 2k²` complex matrix in 2×2 block form. The realified space splits
/// as self-adjoint ⊕ skew-adjoint; each corner of the operator is a
/// real-linear map between real forms of `M_k` and extends complex-linearly
/// to all of `M_k`. Block `(i,j)` holds the extension of
/// `x ↦ P_i(R(x))` restricted to the `j`-th real form, in the flattened
/// matrix-unit basis.
pub fn phi_embed(r: &DMatrix<f64>) -> Result<BigMatrix> {
    let dim = r.nrows();
    if r.ncols() != dim {
        return Err(NcError::Dimension("phi_embed needs a square matrix".into()));
    }
    let kk = dim / 2;
    let k = (kk as f64).sqrt().round() as usize;
    if 2 * k * k != dim {
        return Err(NcError::Dimension(format!(
            "phi_embed needs size 2k^2, got {}",
            dim
        )));
    }
    let half = Complex64::new(0.5, 0.0);
    let mihalf = Complex64::new(0.0, -0.5);
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for p in 0..k {
        for q in 0..k {
            let col = p * k + q;
            let mut zeta = DMatrix::<Complex64>::zeros(k, k);
            zeta[(p, q)] = Complex64::new(1.0, 0.0);
            let zeta_star = zeta.adjoint();
            // ζ = ξ + iη with ξ, η self-adjoint: the column of the
            // complexified operator on the self-adjoint real form.
            let xi_sa = (&zeta + &zeta_star).map(|z| z * half);
            let eta_sa = (&zeta - &zeta_star).map(|z| z * mihalf);
            // ζ = κ + iλ with κ, λ skew-adjoint: the skew real form.
            let kappa = (&zeta - &zeta_star).map(|z| z * half);
            let lambda = (&zeta + &zeta_star).map(|z| z * mihalf);
            for (j, (a, b)) in [(xi_sa, eta_sa), (kappa, lambda)].iter().enumerate() {
                let ra = apply_real(r, a);
                let rb = apply_real(r, b);
                // Project each image onto the two real forms first, then
                // take the complex combination corner by corner: block
                // (i,j) is P_i(R(ξ)) + i·P_i(R(η)), not the split of the
                // combined image.
                let i_unit = Complex64::new(0.0, 1.0);
                let ra_star = ra.adjoint();
                let rb_star = rb.adjoint();
                let top = (&ra + &ra_star).map(|z| z * half)
                    + (&rb + &rb_star).map(|z| z * half * i_unit);
                let bot = (&ra - &ra_star).map(|z| z * half)
                    + (&rb - &rb_star).map(|z| z * half * i_unit);
                for rr in 0..k {
                    for ss in 0..k {
                        out[(rr * k + ss, j * kk + col)] = top[(rr, ss)];
                        out[(kk + rr * k + ss, j * kk + col)] = bot[(rr, ss)];
                    }
                }
            }
        }
    }
    Ok(BigMatrix { mat: out, normalization: k })
}

/// Families of representation points the sampler can draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// Independent Haar-distributed unitaries (QR of a complex Gaussian
    /// with phase correction).
    HaarUnitary,
    /// Independent GUE matrices normalized so the spectrum concentrates on
    /// `[−2, 2]`.
    GueSelfadjoint,
    /// Commuting tuple: diagonal matrices with i.i.d. uniform `[0,1]`
    /// entries.
    CommutingDiagonal,
    /// Caller-supplied tuple; the library cannot fabricate one.
    User,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    // Stream-splitting rule: one generator per matrix index so tuples are
    // extendable in n without perturbing earlier coordinates.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; both uniforms drawn from the same stream.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub(crate) fn complex_gaussian_matrix(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(k, k, |_, _| Complex64::new(gaussian(rng), gaussian(rng)))
}

fn haar_unitary(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = complex_gaussian_matrix(k, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Phase correction: QR alone is not Haar; multiplying each column by
    // the phase of the corresponding diagonal of R fixes the distribution.
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn gue(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = complex_gaussian_matrix(k, rng);
    let scale = Complex64::new(1.0 / (2.0 * (k as f64).sqrt()), 0.0);
    (&g + g.adjoint()).map(|z| z * scale)
}

/// Draws a representation point. Deterministic given `(kind, k, n, seed)`;
/// matrix `j` is drawn from stream `j` of a ChaCha8 generator seeded with
/// `seed`, so extending `n` preserves earlier coordinates.
pub fn sample(kind: SampleKind, k: usize, n: usize, seed: u64) -> Result<MatrixTuple> {
    if k == 0 {
        return Err(NcError::Range("matrix size k must be positive".into()));
    }
    if n == 0 {
        return Err(NcError::Range("tuple length n must be positive".into()));
    }
    let mut mats = Vec::with_capacity(n);
    for j in 0..n {
        let mut rng = rng_for(seed, j as u64);
        let m = match kind {
            SampleKind::HaarUnitary => haar_unitary(k, &mut rng),
            SampleKind::GueSelfadjoint => gue(k, &mut rng),
            SampleKind::CommutingDiagonal => {
                let mut d = DMatrix::<Complex64>::zeros(k, k);
                for i in 0..k {
                    d[(i, i)] = Complex64::new(rng.gen::<f64>(), 0.0);
                }
                d
            }
            SampleKind::User => {
                return Err(NcError::Precondition(
                    "user tuples must be supplied by the caller".into(),
                ))
            }
        };
        mats.push(m);
    }
    MatrixTuple::new(k, mats)
}

/// `N` simultaneous unitary conjugates `U ξ U*` of a tuple, with
/// independent Haar `U` per output (stream index = output index). Each
/// output has the same *-moments as `ξ` up to float error.
pub fn conjugation_orbit(xi: &MatrixTuple, n_out: usize, seed: u64) -> Result<Vec<MatrixTuple>> {
    if n_out == 0 {
        return Err(NcError::Range("orbit count must be positive".into()));
    }
    let k = xi.k();
    let mut out = Vec::with_capacity(n_out);
    for t in 0..n_out {
        let mut rng = rng_for(seed, t as u64);
        let u = haar_unitary(k, &mut rng);
        let ua = u.adjoint();
        let mats = xi.mats().iter().map(|m| &u * m * &ua).collect();
        out.push(MatrixTuple::new(k, mats)?);
    }
    Ok(out)
}

/// Stacks the realified coordinates of a tuple into one real vector of
/// length `2nk²` (coordinate order, each coordinate as in [`realify`]).
pub fn realify_tuple(x: &MatrixTuple) -> DVector<f64> {
    let d = 2 * x.k() * x.k();
    let mut out = DVector::zeros(x.n() * d);
    for (j, m) in x.mats().iter().enumerate() {
        out.rows_mut(j * d, d).copy_from(&realify(m));
    }
    out
}

/// Inverse of [`realify_tuple`]: splits a stacked real vector back into a
/// tuple of `k×k` complex matrices.
pub fn unrealify_tuple(v: &DVector<f64>, k: usize) -> Result<MatrixTuple> {
    let d = 2 * k * k;
    if v.len() == 0 || v.len() % d != 0 {
        return Err(NcError::Dimension(format!(
            "vector length {} is not a positive multiple of 2k² = {}",
            v.len(),
            d
        )));
    }
    let mats = (0..v.len() / d)
        .map(|j| unrealify(&v.rows(j * d, d).into_owned(), k))
        .collect();
    MatrixTuple::new(k, mats)
}

/// Normalized trace `tr(m)/k`.
pub fn tr_norm(m: &DMatrix<Complex64>) -> Complex64 {
    m.trace() / Complex64::new(m.nrows() as f64, 0.0)
}

/// Normalized Hilbert–Schmidt norm `(Tr(m*m)/k)^{1/2}`.
pub fn hs_norm(m: &DMatrix<Complex64>) -> f64 {
    (m.iter().map(|z| z.norm_sqr()).sum::<f64>() / m.nrows() as f64).sqrt()
}

/// Normalized `ℓ²` distance between tuples: `(Σ_j ‖x_j − y_j‖₂²)^{1/2}`
/// with the normalized Hilbert–Schmidt norm per coordinate.
pub fn tuple_dist(x: &MatrixTuple, y: &MatrixTuple) -> Result<f64> {
    if x.k() != y.k() || x.n() != y.n() {
        return Err(NcError::Dimension("tuple shapes differ".into()));
    }
    let mut acc = 0.0;
    for (a, b) in x.mats().iter().zip(y.mats()) {
        acc += hs_norm(&(a - b)).powi(2);
    }
    Ok(acc.sqrt())
}
