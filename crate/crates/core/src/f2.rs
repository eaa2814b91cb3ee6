//! Linear algebra over the two-element field.
//!
//! Vectors are packed into `u64` words. Symplectic vectors of length `2n` use
//! the x-block-then-z-block layout: bits `0..n` hold the X part and bits
//! `n..2n` the Z part, so `⟨u,v⟩ = u_x·v_z + u_z·v_x`.
//!
//! Every basis returned by this module is in reduced row-echelon form, which
//! makes two bases of the same subspace compare equal as data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinVec {
    len: usize,
    words: Vec<u64>,
}

impl BinVec {
    pub fn zeros(len: usize) -> Self {
        BinVec {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BinVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector from the low `len` bits of `mask`, bit `i` of the mask
    /// becoming entry `i`.
    pub fn from_u64(mask: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = BinVec::zeros(len);
        if len > 0 {
            let keep = if len == WORD { u64::MAX } else { (1u64 << len) - 1 };
            v.words[0] = mask & keep;
        }
        v
    }

    /// Inverse of [`BinVec::from_u64`]; panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = BinVec::zeros(len);
        v.set(i, true);
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / WORD];
        if b {
            *w |= 1 << (i % WORD);
        } else {
            *w &= !(1 << (i % WORD));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BinVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BinVec) -> BinVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Standard dot product mod 2.
    pub fn dot(&self, other: &BinVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Index of the first set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Subvector `[start, start+len)`.
    pub fn slice(&self, start: usize, len: usize) -> BinVec {
        let mut out = BinVec::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn concat(&self, other: &BinVec) -> BinVec {
        let mut out = BinVec::zeros(self.len + other.len);
        for i in self.iter().enumerate().filter(|(_, b)| *b).map(|(i, _)| i) {
            out.set(i, true);
        }
        for i in other.iter().enumerate().filter(|(_, b)| *b).map(|(i, _)| i) {
            out.set(self.len + i, true);
        }
        out
    }

    /// Exchanges the x and z halves of a symplectic vector.
    pub fn swap_halves(&self) -> BinVec {
        let n = self.len / 2;
        self.slice(n, n).concat(&self.slice(0, n))
    }
}

impl fmt::Debug for BinVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinVec({self})")
    }
}

impl fmt::Display for BinVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BinVec::from_bools(&bits))
    }
}

/// Dense binary matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinMat {
    cols: usize,
    rows: Vec<BinVec>,
}

impl BinMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinMat {
            cols,
            rows: vec![BinVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BinMat {
            cols: n,
            rows: (0..n).map(|i| BinVec::unit(n, i)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BinVec>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(BinMat { cols, rows })
    }

    /// Parses rows like `["110", "011"]`.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.parse::<BinVec>())
            .collect::<Result<Vec<_>>>()?;
        let cols = rows.first().map_or(0, BinVec::len);
        BinMat::from_rows(cols, rows)
    }

    pub fn from_columns(rows: usize, cols: &[BinVec]) -> Result<Self> {
        let mut m = BinMat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::LengthMismatch {
                    expected: rows,
                    got: c.len(),
                });
            }
            for i in 0..rows {
                if c.get(i) {
                    m.rows[i].set(j, true);
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.rows[i].set(j, b)
    }

    pub fn row(&self, i: usize) -> &BinVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BinVec] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> BinVec {
        let mut c = BinVec::zeros(self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.get(j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn transpose(&self) -> BinMat {
        let mut t = BinMat::zeros(self.cols, self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            for j in 0..self.cols {
                if r.get(j) {
                    t.rows[j].set(i, true);
                }
            }
        }
        t
    }

    /// Matrix-vector product `A x`.
    pub fn mul_vec(&self, x: &BinVec) -> Result<BinVec> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut out = BinVec::zeros(self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(x) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &BinMat) -> Result<BinMat> {
        if other.nrows() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: other.nrows(),
            });
        }
        let mut out = BinMat::zeros(self.nrows(), other.cols);
        for (i, r) in self.rows.iter().enumerate() {
            for j in 0..self.cols {
                if r.get(j) {
                    out.rows[i].xor_assign(&other.rows[j]);
                }
            }
        }
        Ok(out)
    }

    /// Reduced row-echelon form. Returns the non-zero rows and their pivot
    /// columns.
    pub fn rref(&self) -> (Vec<BinVec>, Vec<usize>) {
        rref_rows(self.rows.clone())
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : A x = 0}`, in reduced row-echelon form.
    pub fn nullspace(&self) -> Vec<BinVec> {
        let (rows, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let basis: Vec<BinVec> = (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = BinVec::unit(self.cols, f);
                for (r, &p) in rows.iter().zip(&pivots) {
                    if r.get(f) {
                        x.set(p, true);
                    }
                }
                x
            })
            .collect();
        rref_rows(basis).0
    }
}

impl fmt::Debug for BinMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        write!(f, "BinMat{}x{}{:?}", self.nrows(), self.cols, rows)
    }
}

/// Gaussian elimination with first-nonzero pivoting, fully reduced.
fn rref_rows(mut rows: Vec<BinVec>) -> (Vec<BinVec>, Vec<usize>) {
    let cols = rows.first().map_or(0, BinVec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

fn check_lengths(vs: &[BinVec], len: usize) -> Result<()> {
    match vs.iter().find(|v| v.len() != len) {
        Some(bad) => Err(Error::LengthMismatch {
            expected: len,
            got: bad.len(),
        }),
        None => Ok(()),
    }
}

/// Canonical (RREF) basis of the span of `vs`. All vectors must share a length.
pub fn span_basis(vs: &[BinVec]) -> Result<Vec<BinVec>> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    check_lengths(vs, first.len())?;
    Ok(rref_rows(vs.to_vec()).0)
}

pub fn rank(a: &BinMat) -> usize {
    a.rank()
}

pub fn nullspace(a: &BinMat) -> Vec<BinVec> {
    a.nullspace()
}

/// Whether `v` lies in the span of the RREF basis `basis` (as returned by
/// [`span_basis`]).
pub fn in_span(basis: &[BinVec], v: &BinVec) -> bool {
    let mut r = v.clone();
    for b in basis {
        let p = b.first_one().expect("rref basis rows are nonzero");
        if r.get(p) {
            r.xor_assign(b);
        }
    }
    r.is_zero()
}

/// Basis of `span(a) ∩ span(b)`.
pub fn span_intersect(a: &[BinVec], b: &[BinVec]) -> Result<Vec<BinVec>> {
    let len = match (a.first(), b.first()) {
        (Some(x), _) | (None, Some(x)) => x.len(),
        (None, None) => return Ok(Vec::new()),
    };
    check_lengths(a, len)?;
    check_lengths(b, len)?;
    let ba = span_basis(a)?;
    let bb = span_basis(b)?;
    if ba.is_empty() || bb.is_empty() {
        return Ok(Vec::new());
    }
    // Solve Σ α_i a_i + Σ β_j b_j = 0; each solution gives Σ α_i a_i in both spans.
    let mut cols = ba.clone();
    cols.extend(bb.iter().cloned());
    let system = BinMat::from_columns(len, &cols)?;
    let witnesses: Vec<BinVec> = system
        .nullspace()
        .iter()
        .map(|sol| {
            let mut v = BinVec::zeros(len);
            for (i, a_i) in ba.iter().enumerate() {
                if sol.get(i) {
                    v.xor_assign(a_i);
                }
            }
            v
        })
        .collect();
    span_basis(&witnesses)
}

/// Symplectic form `u_x·v_z + u_z·v_x` on vectors of length `2n`.
pub fn symplectic_product(u: &BinVec, v: &BinVec) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if !u.len().is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "symplectic vectors need even length, got {}",
            u.len()
        )));
    }
    Ok(symplectic_unchecked(u, v))
}

#[inline]
pub(crate) fn symplectic_unchecked(u: &BinVec, v: &BinVec) -> bool {
    let n = u.len() / 2;
    let mut acc = false;
    for i in 0..n {
        acc ^= (u.get(i) & v.get(n + i)) ^ (u.get(n + i) & v.get(i));
    }
    acc
}

/// Basis of `{y ∈ F₂^{2n} : ⟨y,x⟩ = 0 ∀ x ∈ xs}`.
pub fn symplectic_complement(xs: &[BinVec], n: usize) -> Result<Vec<BinVec>> {
    check_lengths(xs, 2 * n)?;
    let rows: Vec<BinVec> = xs.iter().map(BinVec::swap_halves).collect();
    let m = BinMat::from_rows(2 * n, rows)?;
    Ok(m.nullspace())
}

/// All `2^r` elements of the span of `basis` (for small `r`).
pub fn enumerate_span(basis: &[BinVec], len: usize) -> Vec<BinVec> {
    let r = basis.len();
    assert!(r < 24, "span too large to enumerate");
    (0..1usize << r)
        .map(|mask| {
            let mut v = BinVec::zeros(len);
            for (i, b) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.xor_assign(b);
                }
            }
            v
        })
        .collect()
}
