//! Noncommutative *-polynomials over the universal unital complex *-algebra
//! on `n` indeterminates `X1, ..., Xn`.
//!
//! A *-monomial is a word in the letters `Xj` and their formal adjoints
//! `Xj'`; a *-polynomial is a finite complex linear combination of
//! *-monomials kept in reduced form: a map from distinct words to nonzero
//! coefficients. Reduced form is canonical, so equality of polynomials is
//! equality of term maps.
//!
//! Coefficients are `Complex64`. After every arithmetic operation,
//! coefficients whose real and imaginary parts are both below `COEFF_EPS`
//! in magnitude are dropped so float noise cannot break canonicity.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};

/// Coefficients with |re| and |im| both below this threshold are treated as
/// zero and removed from the term map. Chosen a few orders of magnitude above
/// f64 round-off accumulated by the degree-bounded arithmetic used here.
pub const COEFF_EPS: f64 = 1e-14;

/// One letter of a word: a generator index (1-based) and a star flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    /// Generator index in `1..=n`.
    pub gen: u32,
    /// Whether this occurrence is the formal adjoint `Xj'`.
    pub starred: bool,
}

impl Letter {
    /// The letter `Xj` (or `Xj'` if `starred`).
    pub fn new(gen: u32, starred: bool) -> Self {
        Letter { gen, starred }
    }

    /// Same generator with the star flag flipped.
    pub fn star(self) -> Self {
        Letter { gen: self.gen, starred: !self.starred }
    }
}

/// A *-monomial: a finite word of letters. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Monomial(pub Vec<Letter>);

impl Monomial {
    /// The identity monomial `I`.
    pub fn identity() -> Self {
        Monomial(Vec::new())
    }

    /// Single-letter monomial.
    pub fn letter(l: Letter) -> Self {
        Monomial(vec![l])
    }

    /// Word length (0 for the identity).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True iff this is the identity.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Adjoint of the word: reverse order and flip every star flag.
    pub fn star(&self) -> Self {
        Monomial(self.0.iter().rev().map(|l| l.star()).collect())
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Monomial) -> Self {
        let mut w = self.0.clone();
        w.extend_from_slice(&other.0);
        Monomial(w)
    }

    /// Largest generator index occurring in the word (0 for the identity).
    pub fn max_gen(&self) -> u32 {
        self.0.iter().map(|l| l.gen).max().unwrap_or(0)
    }

    /// Remove all star flags (used by the self-adjoint calculus, where the
    /// generators are their own adjoints).
    pub fn strip_stars(&self) -> Self {
        Monomial(self.0.iter().map(|l| Letter::new(l.gen, false)).collect())
    }

    /// Cancel adjacent inverse pairs `Xl Xl'` and `Xl' Xl` (for every
    /// generator) until no more cancellations apply. This is the normal form
    /// in the universal algebra generated by unitaries; the rewriting system
    /// is length-reducing and confluent, so the result is unique.
    pub fn unitary_reduce(&self) -> Self {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            match stack.last() {
                Some(&top) if top.gen == l.gen && top.starred != l.starred => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        Monomial(stack)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Degree-lexicographic: first by length, then lexicographically by
    /// (generator index, star flag). Gives deterministic printing order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for l in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "X{}", l.gen)?;
            if l.starred {
                write!(f, "'")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Monomial {
    type Err = NcError;

    /// Parses a bare monomial: whitespace-separated letters `Xj` / `Xj'`,
    /// or `I` for the identity. (Used by the tensor-matrix JSON format.)
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "I" {
            return Ok(Monomial::identity());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let rest = tok.strip_prefix('X').ok_or_else(|| NcError::Parse {
                pos: 0,
                msg: format!("expected letter 'Xj' in monomial, got {:?}", tok),
            })?;
            let (digits, starred) = match rest.strip_suffix('\'') {
                Some(d) => (d, true),
                None => (rest, false),
            };
            let gen: u32 = digits.parse().map_err(|_| NcError::Parse {
                pos: 0,
                msg: format!("bad generator index in {:?}", tok),
            })?;
            if gen == 0 {
                return Err(NcError::Parse { pos: 0, msg: "generator indices are 1-based".into() });
            }
            letters.push(Letter::new(gen, starred));
        }
        Ok(Monomial(letters))
    }
}

/// A *-polynomial in reduced form: distinct monomials with nonzero complex
/// coefficients, together with the declared arity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl Polynomial {
    /// The zero polynomial.
    pub fn zero(arity: usize) -> Self {
        Polynomial { arity, terms: BTreeMap::new() }
    }

    /// The identity polynomial `I`.
    pub fn one(arity: usize) -> Self {
        Self::from_term(arity, Monomial::identity(), Complex64::new(1.0, 0.0))
    }

    /// The generator `Xj` as a polynomial.
    pub fn gen(arity: usize, j: u32) -> Self {
        Self::from_term(
            arity,
            Monomial::letter(Letter::new(j, false)),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Single-term polynomial `c·w`.
    pub fn from_term(arity: usize, w: Monomial, c: Complex64) -> Self {
        let mut p = Polynomial::zero(arity);
        p.add_term(w, c);
        p
    }

    /// Declared arity `n`.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The reduced term map.
    pub fn terms(&self) -> &BTreeMap<Monomial, Complex64> {
        &self.terms
    }

    /// True iff zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `c·w` into the term map, keeping reduced form.
    pub fn add_term(&mut self, w: Monomial, c: Complex64) {
        let entry = self.terms.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.re.abs() < COEFF_EPS && entry.im.abs() < COEFF_EPS {
            self.terms.remove(&w);
        }
    }

    /// Adjoint: conjugate coefficients, reverse words, flip stars.
    pub fn star(&self) -> Self {
        let mut out = Polynomial::zero(self.arity);
        for (w, c) in &self.terms {
            out.add_term(w.star(), c.conj());
        }
        out
    }

    /// Sum (arities must agree).
    pub fn add(&self, other: &Polynomial) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        Ok(out)
    }

    /// Difference.
    pub fn sub(&self, other: &Polynomial) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Product (distributes and merges like terms).
    pub fn mul(&self, other: &Polynomial) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = Polynomial::zero(self.arity);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// Scalar multiple.
    pub fn scale(&self, lambda: Complex64) -> Self {
        let mut out = Polynomial::zero(self.arity);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * lambda);
        }
        out
    }

    /// Integer power (`p^0 = I`).
    pub fn pow(&self, m: u32) -> Self {
        let mut out = Polynomial::one(self.arity);
        for _ in 0..m {
            out = out.mul(self).expect("same arity");
        }
        out
    }

    /// Splits into the self-adjoint and skew-adjoint parts
    /// `f1 = (f + f*)/2`, `f2 = (f − f*)/2`, so `f = f1 + f2`,
    /// `f1* = f1`, `f2* = −f2`.
    pub fn sa_parts(&self) -> (Polynomial, Polynomial) {
        let half = Complex64::new(0.5, 0.0);
        let s = self.star();
        let f1 = self.add(&s).expect("same arity").scale(half);
        let f2 = self.sub(&s).expect("same arity").scale(half);
        (f1, f2)
    }

    /// Strip all star flags from every word (self-adjoint variables) and
    /// re-reduce.
    pub fn strip_stars(&self) -> Self {
        let mut out = Polynomial::zero(self.arity);
        for (w, c) in &self.terms {
            out.add_term(w.strip_stars(), *c);
        }
        out
    }

    /// Apply the confluent unitary rewrite `Xl Xl' → I`, `Xl' Xl → I` to
    /// every word and re-reduce.
    pub fn unitary_reduce(&self) -> Self {
        let mut out = Polynomial::zero(self.arity);
        for (w, c) in &self.terms {
            out.add_term(w.unitary_reduce(), *c);
        }
        out
    }

    /// Degree: maximal word length (0 for constants and zero).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    fn check_arity(&self, other: &Polynomial) -> Result<()> {
        if self.arity != other.arity {
            return Err(NcError::Arity(format!(
                "operand arities differ: {} vs {}",
                self.arity, other.arity
            )));
        }
        Ok(())
    }
}

fn fmt_f64(x: f64) -> String {
    // `{}` on f64 produces the shortest representation that round-trips.
    format!("{}", x)
}

/// Formats a complex coefficient so the parser reads it back exactly.
fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        fmt_f64(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_f64(c.im))
    } else if c.im < 0.0 {
        format!("{}-{}i", fmt_f64(c.re), fmt_f64(-c.im))
    } else {
        format!("{}+{}i", fmt_f64(c.re), fmt_f64(c.im))
    }
}

impl fmt::Display for Polynomial {
    /// Deterministic printing: terms in degree-lexicographic order. The
    /// output is valid input for [`parse`] and round-trips to an equal
    /// polynomial. Negative signs are always folded into the `+`/`-` term
    /// separators so coefficient literals never carry a leading minus (the
    /// grammar's complex literal `a+bi` has a nonnegative `a`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            // Normalize the sign into the separator: a term is "negative"
            // when its leading printed component would be negative.
            let negative = c.re < 0.0 || (c.re == 0.0 && c.im < 0.0);
            let mag = if negative { -*c } else { *c };
            let body = if w.is_empty() {
                fmt_coeff(mag)
            } else if mag == Complex64::new(1.0, 0.0) {
                w.to_string()
            } else {
                format!("{} {}", fmt_coeff(mag), w)
            };
            if first {
                first = false;
                if negative {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
            } else if negative {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        Ok(())
    }
}

/// A nonempty tuple of polynomials sharing one arity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTuple {
    entries: Vec<Polynomial>,
}

impl PolyTuple {
    /// Builds a tuple, validating non-emptiness and a common arity.
    pub fn new(entries: Vec<Polynomial>) -> Result<Self> {
        if entries.is_empty() {
            return Err(NcError::Precondition("PolyTuple must be nonempty".into()));
        }
        let arity = entries[0].arity();
        if entries.iter().any(|p| p.arity() != arity) {
            return Err(NcError::Arity("PolyTuple entries have mixed arities".into()));
        }
        Ok(PolyTuple { entries })
    }

    /// Tuple entries.
    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    /// Number of entries `p`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True iff empty (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Common arity `n`.
    pub fn arity(&self) -> usize {
        self.entries[0].arity()
    }

    /// The size statistics `(c, deg)` used by the quantitative bounds:
    /// per entry, `c` is the maximum over coefficient magnitudes, word
    /// lengths, and the number of reduced terms; `deg` is the maximal word
    /// length. Both are maximized over the tuple. The zero polynomial
    /// contributes `c = 0`, `deg = 0`.
    pub fn stats(&self) -> (f64, usize) {
        let mut c: f64 = 0.0;
        let mut deg: usize = 0;
        for p in &self.entries {
            let nterms = p.terms().len();
            c = c.max(nterms as f64);
            for (w, coeff) in p.terms() {
                c = c.max(coeff.norm());
                c = c.max(w.len() as f64);
                deg = deg.max(w.len());
            }
        }
        (c, deg)
    }
}

// ----------------------------------------------------------------------------
// Parser
// ----------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, arity: usize) -> Self {
        Parser { src: src.as_bytes(), pos: 0, arity }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(NcError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    /// Parses an unsigned decimal float (digits, optional fraction and
    /// exponent). Returns `None` if the cursor is not at a digit or a dot.
    fn lex_unsigned_number(&mut self) -> Option<f64> {
        let start = self.pos;
        let mut p = self.pos;
        let bytes = self.src;
        let mut saw_digit = false;
        while p < bytes.len() && bytes[p].is_ascii_digit() {
            p += 1;
            saw_digit = true;
        }
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            while p < bytes.len() && bytes[p].is_ascii_digit() {
                p += 1;
                saw_digit = true;
            }
        }
        if !saw_digit {
            self.pos = start;
            return None;
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if q < bytes.len() && bytes[q].is_ascii_digit() {
                while q < bytes.len() && bytes[q].is_ascii_digit() {
                    q += 1;
                }
                p = q;
            }
        }
        let text = std::str::from_utf8(&bytes[start..p]).ok()?;
        let value: f64 = text.parse().ok()?;
        self.pos = p;
        Some(value)
    }

    /// Parses a coefficient literal: `a`, `ai`, `a+bi`, or `a-bi`, where the
    /// complex forms are written without internal whitespace. Returns `None`
    /// (cursor unmoved) if the cursor is not at a number.
    fn lex_coeff(&mut self) -> Option<Complex64> {
        self.skip_ws();
        let start = self.pos;
        let re = self.lex_unsigned_number()?;
        // Pure imaginary: "2i".
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            return Some(Complex64::new(0.0, re));
        }
        // Attempt "a+bi"/"a-bi" fused form (no whitespace inside).
        let save = self.pos;
        if let Some(&sign) = self.src.get(self.pos) {
            if sign == b'+' || sign == b'-' {
                self.pos += 1;
                if let Some(im_mag) = self.lex_unsigned_number() {
                    if self.src.get(self.pos) == Some(&b'i') {
                        self.pos += 1;
                        let im = if sign == b'-' { -im_mag } else { im_mag };
                        return Some(Complex64::new(re, im));
                    }
                }
                self.pos = save;
            }
        }
        let _ = start;
        Some(Complex64::new(re, 0.0))
    }

    /// factor := gen adj? pow? | "(" poly ")" adj? pow? | "I"
    fn parse_factor(&mut self) -> Result<Option<Polynomial>> {
        match self.peek() {
            Some(b'X') => {
                self.pos += 1;
                let idx_start = self.pos;
                let mut idx: u64 = 0;
                let mut saw = false;
                while let Some(&d) = self.src.get(self.pos) {
                    if d.is_ascii_digit() {
                        idx = idx * 10 + u64::from(d - b'0');
                        self.pos += 1;
                        saw = true;
                    } else {
                        break;
                    }
                }
                if !saw {
                    self.pos = idx_start;
                    return self.err("expected generator index after 'X'");
                }
                if idx == 0 || idx as usize > self.arity {
                    return Err(NcError::Arity(format!(
                        "generator X{} exceeds declared arity {}",
                        idx, self.arity
                    )));
                }
                let mut p = Polynomial::gen(self.arity, idx as u32);
                p = self.parse_postfix(p)?;
                Ok(Some(p))
            }
            Some(b'I') => {
                self.pos += 1;
                let mut p = Polynomial::one(self.arity);
                p = self.parse_postfix(p)?;
                Ok(Some(p))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_poly()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                let p = self.parse_postfix(inner)?;
                Ok(Some(p))
            }
            _ => Ok(None),
        }
    }

    /// Applies trailing adjoint (`'`) and power (`^m`) markers.
    fn parse_postfix(&mut self, mut p: Polynomial) -> Result<Polynomial> {
        // Adjoint markers may stack ('' = identity on the polynomial).
        while self.src.get(self.pos) == Some(&b'\'') {
            self.pos += 1;
            p = p.star();
        }
        if self.src.get(self.pos) == Some(&b'^') {
            self.pos += 1;
            if self.src.get(self.pos) == Some(&b'-') {
                return self.err("negative powers are not supported; use the adjoint for inverses of unitaries");
            }
            let m = match self.lex_unsigned_number() {
                Some(v) if v.fract() == 0.0 && v >= 1.0 && v <= 64.0 => v as u32,
                _ => return self.err("expected positive integer exponent in 1..=64"),
            };
            p = p.pow(m);
        }
        Ok(p)
    }

    /// term := coeff? factor* (at least one of coefficient or factor).
    fn parse_term(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        let coeff = self.lex_coeff();
        let mut acc = match coeff {
            Some(c) => Polynomial::from_term(self.arity, Monomial::identity(), c),
            None => Polynomial::one(self.arity),
        };
        let mut any_factor = false;
        while let Some(f) = self.parse_factor()? {
            acc = acc.mul(&f)?;
            any_factor = true;
        }
        if coeff.is_none() && !any_factor {
            return self.err("expected a term (coefficient, generator, 'I', or '(')");
        }
        Ok(acc)
    }

    /// poly := ("-"|"+")? term (("+"|"-") term)*
    fn parse_poly(&mut self) -> Result<Polynomial> {
        let mut negate_first = false;
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                negate_first = true;
            }
            Some(b'+') => {
                self.pos += 1;
            }
            _ => {}
        }
        let mut acc = self.parse_term()?;
        if negate_first {
            acc = acc.scale(Complex64::new(-1.0, 0.0));
        }
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.add(&t)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.sub(&t)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }
}

/// Parses a *-polynomial from text.
///
/// Grammar (whitespace-insensitive except inside numeric literals):
///
/// ```text
/// poly   := ("+"|"-")? term (("+"|"-") term)*
/// term   := coeff? factor*        (at least one of the two)
/// factor := gen adj? pow? | "(" poly ")" adj? pow? | "I"
/// gen    := "X" int               (1-based, bounded by the arity)
/// adj    := "'"                   (formal adjoint)
/// pow    := "^" posint
/// coeff  := real | real "i" | real("+"|"-")real"i"   (no internal spaces)
/// ```
///
/// Juxtaposed factors multiply. Negative powers are rejected.
pub fn parse(text: &str, arity: usize) -> Result<Polynomial> {
    let mut parser = Parser::new(text, arity);
    let p = parser.parse_poly()?;
    parser.skip_ws();
    if parser.pos != parser.src.len() {
        return parser.err("unexpected trailing input");
    }
    Ok(p)
}
