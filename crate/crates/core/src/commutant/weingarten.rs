//! Gram matrices of Pauli monomials and the Clifford Weingarten twirl.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::commutant::monomial::{alpha_from_sites, enumerate_monomials, site_power, PauliMonomial};
use crate::dense::OPERATOR_DIM_LIMIT;
use crate::error::{Error, Result};
use crate::{CMat, C64};

/// Largest copy count for Gram/Weingarten tables.
pub const MAX_TABLE_COPIES: usize = 5;

/// Singular values below this fraction of the largest count as zero.
pub const PINV_RELATIVE_TOL: f64 = 1e-10;

/// Moore–Penrose pseudoinverse of a symmetric real matrix, and whether any
/// eigenvalue was truncated. Full-rank inputs are inverted by LU.
pub fn pseudo_inverse(g: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let eig = g.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cut = lmax * PINV_RELATIVE_TOL;
    let deficient = eig.eigenvalues.iter().any(|l| l.abs() <= cut);
    if !deficient {
        if let Some(inv) = g.clone().lu().try_inverse() {
            return (symmetrize(inv), false);
        }
    }
    let v = &eig.eigenvectors;
    let inv_l = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| if l.abs() > cut { 1.0 / l } else { 0.0 }));
    (symmetrize(v * inv_l * v.transpose()), deficient)
}

fn symmetrize(w: DMatrix<f64>) -> DMatrix<f64> {
    (&w + w.transpose()) * 0.5
}

/// Gram and Weingarten matrices of the monomial basis for `(k, n)`.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    pub k: usize,
    pub n: usize,
    pub monomials: Vec<PauliMonomial>,
    /// `α(Ω_a, Ω_b)`.
    pub alpha: Vec<Vec<u32>>,
    /// `G_ab = tr(Ω_a† Ω_b)/d^k = d^{-α}`.
    pub gram: DMatrix<f64>,
    /// `G⁻¹`, or the pseudoinverse when `pseudo` is set.
    pub weingarten: DMatrix<f64>,
    pub pseudo: bool,
    pub min_singular_value: f64,
}

fn check_table_args(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > MAX_TABLE_COPIES {
        return Err(Error::invalid(format!("tables support k in 1..={MAX_TABLE_COPIES}, got {k}")));
    }
    if n == 0 || n > 62 {
        return Err(Error::invalid(format!("qubit count {n} out of range")));
    }
    Ok(())
}

/// Pairwise `α` for a monomial list.
pub fn alpha_matrix(monomials: &[PauliMonomial]) -> Result<Vec<Vec<u32>>> {
    let k = monomials.first().map_or(1, PauliMonomial::k);
    let sites: Vec<CMat> = monomials.iter().map(PauliMonomial::site_matrix).collect();
    sites
        .iter()
        .map(|a| sites.iter().map(|b| alpha_from_sites(k, a, b)).collect())
        .collect()
}

/// `G_{ΩΩ′} = d^{-α(Ω,Ω′)}` over [`enumerate_monomials`].
pub fn gram_matrix(k: usize, n: usize) -> Result<DMatrix<f64>> {
    check_table_args(k, n)?;
    let alpha = alpha_matrix(&enumerate_monomials(k)?)?;
    Ok(gram_from_alpha(&alpha, n))
}

fn gram_from_alpha(alpha: &[Vec<u32>], n: usize) -> DMatrix<f64> {
    let size = alpha.len();
    DMatrix::from_fn(size, size, |i, j| (-((alpha[i][j] as f64) * n as f64)).exp2())
}

pub fn weingarten_table(k: usize, n: usize) -> Result<WeingartenTable> {
    check_table_args(k, n)?;
    let monomials = enumerate_monomials(k)?;
    let alpha = alpha_matrix(&monomials)?;
    let gram = gram_from_alpha(&alpha, n);
    let min_singular_value = gram
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let (weingarten, pseudo) = pseudo_inverse(&gram);
    Ok(WeingartenTable {
        k,
        n,
        monomials,
        alpha,
        gram,
        weingarten,
        pseudo,
        min_singular_value,
    })
}

impl WeingartenTable {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn d(&self) -> usize {
        1 << self.n
    }
}

/// Projector onto the commutant of `{U^{⊗k} : U Clifford}` on `n` qubits
/// per copy, with the monomial operators materialized once.
pub struct CliffordTwirl {
    table: WeingartenTable,
    operators: Vec<CMat>,
}

impl CliffordTwirl {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        let dim = 1usize.checked_shl((k * n) as u32).unwrap_or(usize::MAX);
        if dim > OPERATOR_DIM_LIMIT {
            return Err(Error::DimensionLimit {
                dim,
                limit: OPERATOR_DIM_LIMIT,
            });
        }
        let table = weingarten_table(k, n)?;
        let operators = table
            .monomials
            .iter()
            .map(|m| site_power(&m.site_matrix(), k, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(CliffordTwirl { table, operators })
    }

    pub fn table(&self) -> &WeingartenTable {
        &self.table
    }

    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    /// `(1/d^k) Σ_{Ω,Ω′} W_{ΩΩ′} tr(Ω†O) Ω′`.
    pub fn apply(&self, o: &CMat) -> Result<CMat> {
        let dim = self.operators[0].nrows();
        if o.nrows() != dim || o.ncols() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: o.nrows(),
            });
        }
        let overlaps: Vec<C64> = self
            .operators
            .iter()
            .map(|w| w.iter().zip(o.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() / dim as f64)
            .collect();
        let mut out = CMat::zeros(dim, dim);
        for (j, op) in self.operators.iter().enumerate() {
            let c: C64 = overlaps
                .iter()
                .enumerate()
                .map(|(i, a)| a * self.table.weingarten[(i, j)])
                .sum();
            if c.norm() > 0.0 {
                out += op * c;
            }
        }
        Ok(out)
    }
}

pub fn clifford_twirl(o: &CMat, k: usize, n: usize) -> Result<CMat> {
    CliffordTwirl::new(k, n)?.apply(o)
}

/// `U^{⊗k} O U^{†⊗k}`, applied one copy at a time.
pub fn conjugate_copies(u: &CMat, o: &CMat, k: usize) -> CMat {
    let d = u.nrows();
    let dim = o.nrows();
    let mut cur = o.clone();
    let mut next = CMat::zeros(dim, dim);
    for c in 0..k {
        let lo = d.pow((k - 1 - c) as u32);
        let hi = dim / (lo * d);
        // rows: new[(h,a,l), col] = Σ_b U[a,b] cur[(h,b,l), col]
        for col in 0..dim {
            let src = cur.column(col);
            let mut dst = next.column_mut(col);
            for h in 0..hi {
                for l in 0..lo {
                    for a in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..d {
                            acc += u[(a, b)] * src[(h * d + b) * lo + l];
                        }
                        dst[(h * d + a) * lo + l] = acc;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        // cols: new[row, (h,a,l)] = Σ_b cur[row, (h,b,l)] conj(U[a,b])
        for h in 0..hi {
            for l in 0..lo {
                for a in 0..d {
                    let dst_col = (h * d + a) * lo + l;
                    for row in 0..dim {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..d {
                            acc += cur[(row, (h * d + b) * lo + l)] * u[(a, b)].conj();
                        }
                        next[(row, dst_col)] = acc;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `(1/|G|) Σ_{U∈G} U^{⊗k} O U^{†⊗k}` over an explicit list of unitaries.
pub fn exhaustive_twirl(o: &CMat, k: usize, group: &[CMat]) -> Result<CMat> {
    let d = group
        .first()
        .ok_or_else(|| Error::invalid("empty group"))?
        .nrows();
    if d.checked_pow(k as u32) != Some(o.nrows()) {
        return Err(Error::LengthMismatch {
            expected: d.pow(k as u32),
            got: o.nrows(),
        });
    }
    let sum = group
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = CMat::zeros(o.nrows(), o.ncols());
            for u in chunk {
                acc += conjugate_copies(u, o, k);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(CMat::zeros(o.nrows(), o.ncols()), |a, b| a + b);
    Ok(sum / C64::new(group.len() as f64, 0.0))
}
