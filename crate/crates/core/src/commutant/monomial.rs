//! Pauli monomials spanning the commutant of the `k`-fold Clifford action.
//!
//! A monomial is fixed by `m` independent even-weight columns `v_1..v_m ∈ F₂^k`
//! and a symmetric zero-diagonal phase matrix `M`. Its single-qubit factor is
//!
//! ```text
//! ω = 2^{-m} Σ_{P_1..P_m ∈ {I,X,Y,Z}} P_1^{⊗v_1} ··· P_m^{⊗v_m} Π_{i<j} χ(P_i,P_j)^{M_ij}
//! ```
//!
//! acting on `k` qubits (one per copy, copy 0 most significant), and the full
//! operator on `n` qubits per copy is `ω^{⊗n}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::commutant::haar::PermutationOp;
use crate::error::{Error, Result};
use crate::f2::{span_basis, BinMat, BinVec};
use crate::pauli::PauliString;
use crate::{CMat, C64};

/// Largest copy count handled by enumeration and site matrices.
pub const MAX_COPIES: usize = 6;

/// Residue guard for exponents recovered from floating-point traces.
pub const INTEGER_RESIDUE_TOL: f64 = 1e-6;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliMonomial {
    k: usize,
    columns: Vec<BinVec>,
    phases: BinMat,
}

impl PauliMonomial {
    /// Validates even column weight, independence, `m < k` and a symmetric
    /// zero-diagonal phase matrix.
    pub fn new(k: usize, columns: Vec<BinVec>, phases: BinMat) -> Result<Self> {
        if k == 0 || k > MAX_COPIES {
            return Err(Error::invalid(format!("copy count {k} outside 1..={MAX_COPIES}")));
        }
        let m = columns.len();
        if m >= k {
            return Err(Error::invalid(format!("need m < k, got m={m}, k={k}")));
        }
        for c in &columns {
            if c.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    got: c.len(),
                });
            }
            if c.weight() % 2 != 0 {
                return Err(Error::invalid(format!("column {c} has odd weight")));
            }
        }
        if span_basis(&columns)?.len() != m {
            return Err(Error::invalid("columns are not independent"));
        }
        if phases.nrows() != m || phases.ncols() != m {
            return Err(Error::invalid("phase matrix must be m x m"));
        }
        for i in 0..m {
            if phases.get(i, i) {
                return Err(Error::invalid("phase matrix must have zero diagonal"));
            }
            for j in 0..m {
                if phases.get(i, j) != phases.get(j, i) {
                    return Err(Error::invalid("phase matrix must be symmetric"));
                }
            }
        }
        Ok(PauliMonomial { k, columns, phases })
    }

    pub fn identity(k: usize) -> Result<Self> {
        PauliMonomial::new(k, Vec::new(), BinMat::zeros(0, 0))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of columns.
    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[BinVec] {
        &self.columns
    }

    /// `V` as a `k × m` matrix.
    pub fn v(&self) -> BinMat {
        BinMat::from_columns(self.k, &self.columns).expect("columns have length k")
    }

    pub fn phases(&self) -> &BinMat {
        &self.phases
    }

    /// Single-qubit factor `ω` on `2^k` dimensions.
    pub fn site_matrix(&self) -> CMat {
        let k = self.k;
        let m = self.m();
        let dim = 1usize << k;
        let mut out = CMat::zeros(dim, dim);
        let singles: [PauliString; 4] = ["I", "X", "Y", "Z"].map(|l| l.parse().unwrap());
        let weight = 1.0 / (1u64 << m) as f64;
        for assign in 0..1usize << (2 * m) {
            let letters: Vec<usize> = (0..m).map(|i| assign >> (2 * i) & 3).collect();
            let mut sign = 1.0;
            for i in 0..m {
                for j in i + 1..m {
                    if self.phases.get(i, j)
                        && !singles[letters[i]].commutes_with(&singles[letters[j]])
                    {
                        sign = -sign;
                    }
                }
            }
            let mut term = PauliString::identity(k);
            for (i, &l) in letters.iter().enumerate() {
                let mut factor = vec!['I'; k];
                for (c, f) in factor.iter_mut().enumerate() {
                    if self.columns[i].get(c) {
                        *f = ['I', 'X', 'Y', 'Z'][l];
                    }
                }
                let q: PauliString = factor.into_iter().collect::<String>().parse().unwrap();
                term = term.mul(&q).expect("same k");
            }
            let (xm, zm) = term.masks();
            let c = crate::pauli::i_pow(term.phase()) * (sign * weight);
            for b in 0..dim {
                let s = if (zm & b as u64).count_ones() % 2 == 1 { -c } else { c };
                out[((b as u64 ^ xm) as usize, b)] += s;
            }
        }
        out
    }

    /// Full operator `ω^{⊗n}` on `(C^{2^n})^{⊗k}` in copy-major order.
    pub fn full_matrix(&self, n: usize) -> Result<CMat> {
        site_power(&self.site_matrix(), self.k, n)
    }
}

/// Expands a site operator `ω` on `k` qubits to `ω^{⊗n}` reindexed so that
/// copy 0 occupies the most significant `n` bits.
pub fn site_power(site: &CMat, k: usize, n: usize) -> Result<CMat> {
    let dim = 1usize
        .checked_shl((k * n) as u32)
        .filter(|&d| d <= crate::dense::OPERATOR_DIM_LIMIT)
        .ok_or(Error::DimensionLimit {
            dim: 1usize.checked_shl((k * n) as u32).unwrap_or(usize::MAX),
            limit: crate::dense::OPERATOR_DIM_LIMIT,
        })?;
    let perm: Vec<usize> = (0..dim).map(|q| qubit_to_copy_major(q, n, k)).collect();
    let mut qubit_major = CMat::identity(1, 1);
    for _ in 0..n {
        qubit_major = qubit_major.kronecker(site);
    }
    let mut out = CMat::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            out[(perm[r], perm[c])] = qubit_major[(r, c)];
        }
    }
    Ok(out)
}

/// Maps an index whose `k`-bit blocks are per-qubit sites (qubit 0 most
/// significant) to the index with `n`-bit blocks per copy.
fn qubit_to_copy_major(idx: usize, n: usize, k: usize) -> usize {
    let mut out = 0;
    for j in 0..n {
        for c in 0..k {
            let bit = idx >> ((n - 1 - j) * k + (k - 1 - c)) & 1;
            out |= bit << ((k - 1 - c) * n + (n - 1 - j));
        }
    }
    out
}

impl fmt::Debug for PauliMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.columns.iter().map(|c| c.to_string()).collect();
        let m = self.m();
        let mut upper = String::new();
        for i in 0..m {
            for j in i + 1..m {
                upper.push(if self.phases.get(i, j) { '1' } else { '0' });
            }
        }
        write!(f, "Ω(k={}, V=[{}], M=[{}])", self.k, cols.join(","), upper)
    }
}

/// Reduced row-echelon `m × k` matrices whose rows all have even weight,
/// i.e. canonical bases of the `m`-dimensional subspaces of the even code.
fn even_rref_bases(k: usize, m: usize) -> Vec<Vec<BinVec>> {
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(m);
    choose_pivots(k, m, 0, &mut pivots, &mut out);
    out
}

fn choose_pivots(k: usize, m: usize, start: usize, pivots: &mut Vec<usize>, out: &mut Vec<Vec<BinVec>>) {
    if pivots.len() == m {
        fill_free_entries(k, pivots, out);
        return;
    }
    for p in start..k {
        pivots.push(p);
        choose_pivots(k, m, p + 1, pivots, out);
        pivots.pop();
    }
}

fn fill_free_entries(k: usize, pivots: &[usize], out: &mut Vec<Vec<BinVec>>) {
    // Free slots: row r, column c > pivots[r], c not a pivot column.
    let slots: Vec<(usize, usize)> = pivots
        .iter()
        .enumerate()
        .flat_map(|(r, &p)| {
            (p + 1..k)
                .filter(|c| !pivots.contains(c))
                .map(move |c| (r, c))
        })
        .collect();
    for mask in 0u64..1 << slots.len() {
        let mut rows: Vec<BinVec> = pivots.iter().map(|&p| BinVec::unit(k, p)).collect();
        for (s, &(r, c)) in slots.iter().enumerate() {
            if mask >> s & 1 == 1 {
                rows[r].set(c, true);
            }
        }
        if rows.iter().all(|r| r.weight() % 2 == 0) {
            out.push(rows);
        }
    }
}

/// `∏_{i=0}^{k-2} (2^i + 1)`.
pub fn commutant_dimension(k: usize) -> u64 {
    (0..k.saturating_sub(1)).map(|i| (1u64 << i) + 1).product()
}

/// One canonical representative per commutant basis element, identity first.
pub fn enumerate_monomials(k: usize) -> Result<Vec<PauliMonomial>> {
    if k == 0 || k > MAX_COPIES {
        return Err(Error::invalid(format!(
            "monomial enumeration supports k in 1..={MAX_COPIES}, got {k}"
        )));
    }
    let mut out = Vec::new();
    for m in 0..k {
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        for cols in even_rref_bases(k, m) {
            for mask in 0u64..1 << pairs.len() {
                let mut phases = BinMat::zeros(m, m);
                for (s, &(i, j)) in pairs.iter().enumerate() {
                    if mask >> s & 1 == 1 {
                        phases.set(i, j, true);
                        phases.set(j, i, true);
                    }
                }
                out.push(PauliMonomial::new(k, cols.clone(), phases)?);
            }
        }
    }
    if out.len() as u64 != commutant_dimension(k) {
        return Err(Error::consistency(format!(
            "enumerated {} monomials at k={k}, expected {}",
            out.len(),
            commutant_dimension(k)
        )));
    }
    Ok(out)
}

/// Rounds `x` to an integer, failing when the residue exceeds the guard.
pub(crate) fn guarded_integer(x: f64, what: &str) -> Result<i64> {
    let r = x.round();
    if !x.is_finite() || (x - r).abs() > INTEGER_RESIDUE_TOL {
        return Err(Error::consistency(format!("{what} = {x} is not an integer")));
    }
    Ok(r as i64)
}

/// Single-site `tr(ω†ω′)`.
pub fn site_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `α` with `tr(Ω†Ω′) = d^{k-α}`; independent of `n ≥ 1`.
pub fn alpha_from_sites(k: usize, a: &CMat, b: &CMat) -> Result<u32> {
    let tr = site_inner(a, b);
    if tr.im.abs() > INTEGER_RESIDUE_TOL || tr.re <= 0.0 {
        return Err(Error::consistency(format!(
            "monomial inner product {tr} is not a positive real"
        )));
    }
    let a = guarded_integer(k as f64 - tr.re.log2(), "alpha")?;
    u32::try_from(a).map_err(|_| Error::consistency(format!("negative alpha {a}")))
}

pub fn alpha(a: &PauliMonomial, b: &PauliMonomial, n: usize) -> Result<u32> {
    if a.k != b.k {
        return Err(Error::LengthMismatch {
            expected: a.k,
            got: b.k,
        });
    }
    if n == 0 {
        return Err(Error::invalid("alpha needs n >= 1"));
    }
    alpha_from_sites(a.k, &a.site_matrix(), &b.site_matrix())
}

/// `m_p` with `‖Ω‖₁ = d^{k-m_p}`, from the singular values of `ω`.
pub fn trace_norm_exponent(a: &PauliMonomial, n: usize) -> Result<u32> {
    if n == 0 {
        return Err(Error::invalid("trace_norm_exponent needs n >= 1"));
    }
    let norm: f64 = a.site_matrix().singular_values().iter().sum();
    let mp = guarded_integer(a.k as f64 - norm.log2(), "trace-norm exponent")?;
    u32::try_from(mp).map_err(|_| Error::consistency(format!("negative m_p {mp}")))
}

/// Indices of the monomials equal to the `k!` copy permutations, paired with
/// the permutation. Fails unless every permutation is found.
pub fn permutation_monomials(monomials: &[PauliMonomial]) -> Result<Vec<(PermutationOp, usize)>> {
    let k = monomials.first().map_or(0, PauliMonomial::k);
    let sites: Vec<CMat> = monomials.iter().map(PauliMonomial::site_matrix).collect();
    let mut out = Vec::new();
    for perm in PermutationOp::all(k, 2)? {
        let t = perm.matrix()?;
        let idx = sites
            .iter()
            .position(|s| (s - &t).iter().all(|e| e.norm() < 1e-10))
            .ok_or_else(|| Error::consistency(format!("permutation {perm:?} is not a monomial")))?;
        out.push((perm, idx));
    }
    Ok(out)
}
