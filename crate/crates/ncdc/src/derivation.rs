//! The three derivative calculi for *-polynomials.
//!
//! Values live in the algebraic tensor product `A ⊙ A^op`: finite sums
//! `Σ λ·(w ⊗ v)`, optionally composed with the conjugation `J` (adjoint map)
//! marked by a flag `d ∈ {0,1}`. As an operator on a representation space,
//! a term acts by `ξ ↦ λ · w(ξ̂) · ξ^{(d)} · v(ξ̂)` where `ξ^{(1)} = ξ*`.
//!
//! Three calculi are provided:
//! - the split derivative `d_s` (2×2 block matrix over the self-adjoint /
//!   skew-adjoint decomposition of each entry),
//! - the self-adjoint calculus `d_sa` (variables identified with their
//!   adjoints),
//! - the unitary calculus `d_u` (entries are monomials in unitaries; two
//!   independent routes are implemented and cross-checked).
//!
//! The bimodule rule is `a·(u ⊗ v)·b = (au) ⊗ (vb)`; the second tensor leg
//! multiplies in reversed order when composing elements (it lives in the
//! opposite algebra), which the arithmetic here performs on plain words.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};
use crate::ncpoly::{Letter, Monomial, PolyTuple, Polynomial, COEFF_EPS};

/// Key of one tensor term: left word, right word, conjugation flag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorKey {
    /// Left tensor leg `w`.
    pub w: Monomial,
    /// Right tensor leg `v` (stored as a plain word; the opposite-algebra
    /// reversal happens inside the arithmetic).
    pub v: Monomial,
    /// Conjugation flag: 1 means the term is composed with the adjoint map.
    pub d: u8,
}

/// A reduced element of `A ⊙ A^op` (with optional conjugation flags):
/// distinct keys with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TensorElement {
    terms: BTreeMap<TensorKey, Complex64>,
}

impl TensorElement {
    /// The zero element.
    pub fn zero() -> Self {
        TensorElement { terms: BTreeMap::new() }
    }

    /// The identity `I ⊗ I`.
    pub fn one() -> Self {
        Self::from_term(Monomial::identity(), Monomial::identity(), 0, Complex64::new(1.0, 0.0))
    }

    /// Single term `λ·(w ⊗ v)·J^d`.
    pub fn from_term(w: Monomial, v: Monomial, d: u8, lambda: Complex64) -> Self {
        let mut t = Self::zero();
        t.add_term(w, v, d, lambda);
        t
    }

    /// Elementary embedding of a pair of polynomials: `Σ c_p c_q (w_p ⊗ w_q)`.
    pub fn tensor(p: &Polynomial, q: &Polynomial) -> Self {
        let mut out = Self::zero();
        for (wp, cp) in p.terms() {
            for (wq, cq) in q.terms() {
                out.add_term(wp.clone(), wq.clone(), 0, cp * cq);
            }
        }
        out
    }

    /// Term map (reduced form).
    pub fn terms(&self) -> &BTreeMap<TensorKey, Complex64> {
        &self.terms
    }

    /// True iff zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff no term carries a conjugation flag (fully split).
    pub fn is_split(&self) -> bool {
        self.terms.keys().all(|k| k.d == 0)
    }

    /// Adds `λ·(w ⊗ v)·J^d`, keeping reduced form.
    pub fn add_term(&mut self, w: Monomial, v: Monomial, d: u8, lambda: Complex64) {
        let key = TensorKey { w, v, d };
        let entry = self.terms.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += lambda;
        if entry.re.abs() < COEFF_EPS && entry.im.abs() < COEFF_EPS {
            self.terms.remove(&key);
        }
    }

    /// Sum.
    pub fn add(&self, other: &TensorElement) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.w.clone(), k.v.clone(), k.d, *c);
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, lambda: Complex64) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(k.w.clone(), k.v.clone(), k.d, c * lambda);
        }
        out
    }

    /// Bimodule action `a·t·b = Σ λ·(a w ⊗ v b)` for words `a`, `b`.
    pub fn bimodule(&self, a: &Monomial, b: &Monomial) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(a.concat(&k.w), k.v.concat(b), k.d, *c);
        }
        out
    }

    /// Bimodule action with polynomial coefficients:
    /// `p·t·q = Σ c_p λ c_q ((w_p w) ⊗ (v w_q))`.
    pub fn bimodule_poly(&self, p: &Polynomial, q: &Polynomial) -> Self {
        let mut out = Self::zero();
        for (wp, cp) in p.terms() {
            for (k, c) in &self.terms {
                for (wq, cq) in q.terms() {
                    out.add_term(wp.concat(&k.w), k.v.concat(wq), k.d, cp * c * cq);
                }
            }
        }
        out
    }

    /// Operator composition `self ∘ other` in `A ⊙ A^op` (with conjugation
    /// flags): applying `self` after `other` to a vector `ξ` gives
    /// `w1 (w2 ξ^{(d2)} v2)^{(d1)} v1`. For `d1 = 0` this is the familiar
    /// `(w1 w2) ⊗ (v2 v1)` with flag `d2`; for `d1 = 1` the inner factor is
    /// adjointed, giving `(w1 v2*) ⊗ (w2* v1)` with flag `1−d2` and a
    /// conjugated coefficient on the inner scalar.
    pub fn compose(&self, other: &TensorElement) -> Self {
        let mut out = Self::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                if k1.d == 0 {
                    out.add_term(k1.w.concat(&k2.w), k2.v.concat(&k1.v), k2.d, c1 * c2);
                } else {
                    out.add_term(
                        k1.w.concat(&k2.v.star()),
                        k2.w.star().concat(&k1.v),
                        1 - k2.d,
                        c1 * c2.conj(),
                    );
                }
            }
        }
        out
    }

    /// Applies the confluent unitary rewrite to both legs of every term.
    pub fn unitary_reduce(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(k.w.unitary_reduce(), k.v.unitary_reduce(), k.d, *c);
        }
        out
    }

    /// Largest generator index appearing in either leg.
    pub fn max_gen(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.w.max_gen().max(k.v.max_gen()))
            .max()
            .unwrap_or(0)
    }
}

/// Block interpretation of a [`TensorMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockShape {
    /// Entries are individual tensor elements.
    #[serde(rename = "plain")]
    Plain,
    /// Rows and columns are even; consecutive 2×2 blocks carry the
    /// self-adjoint / skew-adjoint splitting.
    #[serde(rename = "2x2")]
    TwoByTwo,
}

/// A rectangular matrix with [`TensorElement`] entries (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMatrix {
    rows: usize,
    cols: usize,
    block: BlockShape,
    entries: Vec<TensorElement>,
}

impl TensorMatrix {
    /// Zero matrix of the given shape.
    pub fn zero(rows: usize, cols: usize, block: BlockShape) -> Self {
        if block == BlockShape::TwoByTwo {
            assert!(rows % 2 == 0 && cols % 2 == 0, "2x2 block shape needs even dimensions");
        }
        TensorMatrix { rows, cols, block, entries: vec![TensorElement::zero(); rows * cols] }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Block interpretation tag.
    pub fn block(&self) -> BlockShape {
        self.block
    }

    /// Entry accessor.
    pub fn get(&self, i: usize, j: usize) -> &TensorElement {
        &self.entries[i * self.cols + j]
    }

    /// Entry mutator.
    pub fn set(&mut self, i: usize, j: usize, t: TensorElement) {
        self.entries[i * self.cols + j] = t;
    }

    /// True iff every entry is fully split (no conjugation flags).
    pub fn is_split(&self) -> bool {
        self.entries.iter().all(|t| t.is_split())
    }

    /// Matrix product with tensor-element composition in each entry.
    pub fn matmul(&self, other: &TensorMatrix) -> Result<TensorMatrix> {
        if self.cols != other.rows {
            return Err(NcError::Dimension(format!(
                "tensor matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = TensorMatrix::zero(self.rows, other.cols, BlockShape::Plain);
        out.block = self.block;
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = TensorElement::zero();
                for l in 0..self.cols {
                    acc = acc.add(&self.get(i, l).compose(other.get(l, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Applies the unitary rewrite entrywise.
    pub fn unitary_reduce(&self) -> TensorMatrix {
        TensorMatrix {
            rows: self.rows,
            cols: self.cols,
            block: self.block,
            entries: self.entries.iter().map(|t| t.unitary_reduce()).collect(),
        }
    }
}

// JSON form: {"rows", "cols", "block": "plain"|"2x2",
//             "entries": [[{"terms": [{"w","v","d","re","im"}]}]]}
#[derive(Serialize, Deserialize)]
struct TermDto {
    w: String,
    v: String,
    d: u8,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct EntryDto {
    terms: Vec<TermDto>,
}

#[derive(Serialize, Deserialize)]
struct TensorMatrixDto {
    rows: usize,
    cols: usize,
    block: BlockShape,
    entries: Vec<Vec<EntryDto>>,
}

impl Serialize for TensorMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| EntryDto {
                        terms: self
                            .get(i, j)
                            .terms()
                            .iter()
                            .map(|(k, c)| TermDto {
                                w: k.w.to_string(),
                                v: k.v.to_string(),
                                d: k.d,
                                re: c.re,
                                im: c.im,
                            })
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        TensorMatrixDto { rows: self.rows, cols: self.cols, block: self.block, entries }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TensorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let dto = TensorMatrixDto::deserialize(d)?;
        if dto.entries.len() != dto.rows || dto.entries.iter().any(|r| r.len() != dto.cols) {
            return Err(D::Error::custom("entry grid does not match rows x cols"));
        }
        let mut tm = TensorMatrix::zero(dto.rows, dto.cols, dto.block);
        for (i, row) in dto.entries.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                let mut t = TensorElement::zero();
                for term in e.terms {
                    let w: Monomial = term.w.parse().map_err(D::Error::custom)?;
                    let v: Monomial = term.v.parse().map_err(D::Error::custom)?;
                    t.add_term(w, v, term.d, Complex64::new(term.re, term.im));
                }
                tm.set(i, j, t);
            }
        }
        Ok(tm)
    }
}

/// Which derivation to apply to the adjoint generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `∂(Xj) = ∂(Xj') = I ⊗ I`.
    Sa,
    /// `∂(Xj) = I ⊗ I`, `∂(Xj') = −I ⊗ I`.
    Sk,
}

/// Route used to compute the unitary calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum URoute {
    /// The (2,2) corner of `m_{f*} · (split derivative block) · m_{xj}`,
    /// simplified with the unitary rewrite.
    Definition,
    /// The per-occurrence rule: an occurrence `w1 Xj w2` contributes
    /// `w2* ⊗ w2`; an occurrence `w1 Xj' w2` contributes
    /// `−(w2* Xj) ⊗ (Xj' w2)`.
    OccurrenceRule,
}

/// The derivation value `∂_j f` for the chosen flavor: walks each word and
/// sums `±(prefix ⊗ suffix)` over occurrences of generator `j`, the sign
/// determined by the flavor and the star flag of the occurrence. Words not
/// containing generator `j` contribute nothing; the map is complex-linear
/// and satisfies the Leibniz rule for the bimodule action.
pub fn partial_deriv(f: &Polynomial, j: u32, flavor: Flavor) -> Result<TensorElement> {
    check_var(f.arity(), j)?;
    let mut out = TensorElement::zero();
    for (word, coeff) in f.terms() {
        for (pos, letter) in word.0.iter().enumerate() {
            if letter.gen != j {
                continue;
            }
            let sign = match (flavor, letter.starred) {
                (Flavor::Sa, _) => 1.0,
                (Flavor::Sk, false) => 1.0,
                (Flavor::Sk, true) => -1.0,
            };
            let prefix = Monomial(word.0[..pos].to_vec());
            let suffix = Monomial(word.0[pos + 1..].to_vec());
            out.add_term(prefix, suffix, 0, coeff * sign);
        }
    }
    Ok(out)
}

/// The real-linear partial derivative of `f` in variable `j`, before
/// splitting: occurrences of `Xj` give `(prefix ⊗ suffix)` with flag 0,
/// occurrences of `Xj'` give `(prefix ⊗ suffix)` with flag 1 (the direction
/// enters through its adjoint there). This is the form used for evaluating
/// derivatives and distance operators numerically.
pub fn partial_deriv_presplit(f: &Polynomial, j: u32) -> Result<TensorElement> {
    check_var(f.arity(), j)?;
    let mut out = TensorElement::zero();
    for (word, coeff) in f.terms() {
        for (pos, letter) in word.0.iter().enumerate() {
            if letter.gen != j {
                continue;
            }
            let prefix = Monomial(word.0[..pos].to_vec());
            let suffix = Monomial(word.0[pos + 1..].to_vec());
            out.add_term(prefix, suffix, u8::from(letter.starred), *coeff);
        }
    }
    Ok(out)
}

fn check_var(arity: usize, j: u32) -> Result<()> {
    if j == 0 || j as usize > arity {
        return Err(NcError::Arity(format!("variable index {} out of 1..={}", j, arity)));
    }
    Ok(())
}

/// The split derivative of a `m`-tuple in `n` variables: a `2m × 2n` matrix
/// whose (i,j) block is
/// `[[∂_sa f_{i,1}, ∂_sk f_{i,1}], [∂_sa f_{i,2}, ∂_sk f_{i,2}]]`
/// where `f_i = f_{i,1} + f_{i,2}` is the self-adjoint / skew-adjoint split.
pub fn d_s(f: &PolyTuple) -> Result<TensorMatrix> {
    let m = f.len();
    let n = f.arity();
    let mut out = TensorMatrix::zero(2 * m, 2 * n, BlockShape::TwoByTwo);
    for (i, fi) in f.entries().iter().enumerate() {
        let (f1, f2) = fi.sa_parts();
        for j in 1..=n as u32 {
            let col = 2 * (j as usize - 1);
            out.set(2 * i, col, partial_deriv(&f1, j, Flavor::Sa)?);
            out.set(2 * i, col + 1, partial_deriv(&f1, j, Flavor::Sk)?);
            out.set(2 * i + 1, col, partial_deriv(&f2, j, Flavor::Sa)?);
            out.set(2 * i + 1, col + 1, partial_deriv(&f2, j, Flavor::Sk)?);
        }
    }
    Ok(out)
}

/// The self-adjoint calculus: variables are identified with their adjoints
/// (star flags are stripped), and each entry must satisfy `f* = ±f` after
/// the identification. Returns the plain `m × n` matrix of derivations with
/// `∂(Xj) = I ⊗ I`.
pub fn d_sa(f: &PolyTuple) -> Result<TensorMatrix> {
    let m = f.len();
    let n = f.arity();
    let mut out = TensorMatrix::zero(m, n, BlockShape::Plain);
    for (i, fi) in f.entries().iter().enumerate() {
        let g = fi.strip_stars();
        // On self-adjoint variables the adjoint only reverses words, so
        // strip the flags that `star` re-introduces before comparing.
        let gs = g.star().strip_stars();
        let minus_g = g.scale(Complex64::new(-1.0, 0.0));
        if gs != g && gs != minus_g {
            return Err(NcError::Precondition(format!(
                "self-adjoint calculus requires f* = ±f on self-adjoint variables; entry {} fails",
                i + 1
            )));
        }
        for j in 1..=n as u32 {
            out.set(i, j as usize - 1, partial_deriv(&g, j, Flavor::Sa)?);
        }
    }
    Ok(out)
}

/// The 2×2 multiplication companion of `f`:
/// `½·[[f⊗I + I⊗f*, f⊗I − I⊗f*], [f⊗I − I⊗f*, f⊗I + I⊗f*]]`.
pub fn m_f(f: &Polynomial) -> TensorMatrix {
    let arity = f.arity();
    let one = Polynomial::one(arity);
    let half = Complex64::new(0.5, 0.0);
    let a = TensorElement::tensor(f, &one); // f ⊗ I
    let b = TensorElement::tensor(&one, &f.star()); // I ⊗ f*
    let diag = a.add(&b).scale(half);
    let off = a.add(&b.scale(Complex64::new(-1.0, 0.0))).scale(half);
    let mut out = TensorMatrix::zero(2, 2, BlockShape::TwoByTwo);
    out.set(0, 0, diag.clone());
    out.set(1, 1, diag);
    out.set(0, 1, off.clone());
    out.set(1, 0, off);
    out
}

fn single_monomial(f: &Polynomial) -> Result<Monomial> {
    let terms = f.terms();
    if terms.len() != 1 {
        return Err(NcError::Precondition(
            "unitary calculus entries must be single monomials".into(),
        ));
    }
    let (w, c) = terms.iter().next().expect("one term");
    if (c - Complex64::new(1.0, 0.0)).norm() > COEFF_EPS {
        return Err(NcError::Precondition(
            "unitary calculus entries must be monomials with coefficient 1".into(),
        ));
    }
    Ok(w.clone())
}

/// One entry of the unitary calculus via the definition route: the (2,2)
/// corner of `m_{f*} · B · m_{xj}`, where `B` is the 2×2 split-derivative
/// block of `f` in variable `j`, followed by the unitary rewrite.
fn d_u_entry_definition(f: &Polynomial, j: u32) -> Result<TensorElement> {
    let (f1, f2) = f.sa_parts();
    let mut block = TensorMatrix::zero(2, 2, BlockShape::TwoByTwo);
    block.set(0, 0, partial_deriv(&f1, j, Flavor::Sa)?);
    block.set(0, 1, partial_deriv(&f1, j, Flavor::Sk)?);
    block.set(1, 0, partial_deriv(&f2, j, Flavor::Sa)?);
    block.set(1, 1, partial_deriv(&f2, j, Flavor::Sk)?);
    let left = m_f(&f.star());
    let xj = Polynomial::gen(f.arity(), j);
    let right = m_f(&xj);
    let prod = left.matmul(&block)?.matmul(&right)?;
    Ok(prod.get(1, 1).unitary_reduce())
}

/// One entry of the unitary calculus via the occurrence rule, followed by
/// the unitary rewrite.
fn d_u_entry_occurrence(w: &Monomial, j: u32) -> TensorElement {
    let mut out = TensorElement::zero();
    for (pos, letter) in w.0.iter().enumerate() {
        if letter.gen != j {
            continue;
        }
        let suffix = Monomial(w.0[pos + 1..].to_vec());
        if !letter.starred {
            out.add_term(suffix.star(), suffix, 0, Complex64::new(1.0, 0.0));
        } else {
            let left = suffix.star().concat(&Monomial::letter(Letter::new(j, false)));
            let right = Monomial::letter(Letter::new(j, true)).concat(&suffix);
            out.add_term(left, right, 0, Complex64::new(-1.0, 0.0));
        }
    }
    out.unitary_reduce()
}

/// The unitary calculus `m × n` matrix for a tuple of *-monomials evaluated
/// at unitaries. Both routes must agree after the unitary rewrite; the
/// verification suites cross-check them.
pub fn d_u(f: &PolyTuple, route: URoute) -> Result<TensorMatrix> {
    let m = f.len();
    let n = f.arity();
    let mut out = TensorMatrix::zero(m, n, BlockShape::Plain);
    for (i, fi) in f.entries().iter().enumerate() {
        let w = single_monomial(fi)?;
        for j in 1..=n as u32 {
            let entry = match route {
                URoute::Definition => d_u_entry_definition(fi, j)?,
                URoute::OccurrenceRule => d_u_entry_occurrence(&w, j),
            };
            out.set(i, j as usize - 1, entry);
        }
    }
    Ok(out)
}

/// The signed suffix-word sum witnessing injectivity for a relator word:
/// one signed pair per occurrence of generator `j` (direct or adjoint), each
/// freely reduced, plus a pairwise-distinctness flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinnellWitness {
    /// `(sign, left, right)` triples, one per occurrence.
    pub signed_terms: Vec<(i8, Monomial, Monomial)>,
    /// True iff all `(left, right)` pairs are pairwise distinct as freely
    /// reduced words.
    pub distinct: bool,
}

/// Builds the witness sum for the word `w` and generator `j`. Errors if `w`
/// is empty or `j` does not occur in `w`.
pub fn linnell_witness(w: &Monomial, j: u32) -> Result<LinnellWitness> {
    if w.is_empty() {
        return Err(NcError::Precondition("witness word must be nonempty".into()));
    }
    let mut signed_terms: Vec<(i8, Monomial, Monomial)> = Vec::new();
    for (pos, letter) in w.0.iter().enumerate() {
        if letter.gen != j {
            continue;
        }
        let suffix = Monomial(w.0[pos + 1..].to_vec());
        if !letter.starred {
            signed_terms.push((1, suffix.star().unitary_reduce(), suffix.unitary_reduce()));
        } else {
            let left = suffix.star().concat(&Monomial::letter(Letter::new(j, false)));
            let right = Monomial::letter(Letter::new(j, true)).concat(&suffix);
            signed_terms.push((-1, left.unitary_reduce(), right.unitary_reduce()));
        }
    }
    if signed_terms.is_empty() {
        return Err(NcError::Precondition(format!("generator {} does not occur in the word", j)));
    }
    let mut distinct = true;
    for a in 0..signed_terms.len() {
        for b in a + 1..signed_terms.len() {
            if signed_terms[a].1 == signed_terms[b].1 && signed_terms[a].2 == signed_terms[b].2 {
                distinct = false;
            }
        }
    }
    Ok(LinnellWitness { signed_terms, distinct })
}
