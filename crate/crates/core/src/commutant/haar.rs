//! Copy permutations and Haar twirls via the unitary Weingarten calculus.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::commutant::weingarten::pseudo_inverse;
use crate::dense::{CHOI_DIM_LIMIT, OPERATOR_DIM_LIMIT};
use crate::error::{Error, Result};
use crate::{CMat, C64};

/// Largest copy count for Haar twirls.
pub const MAX_HAAR_COPIES: usize = 4;

/// `T_π` on `(C^d)^{⊗k}`, sending the state of copy `c` to copy `π(c)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationOp {
    perm: Vec<usize>,
    d: usize,
}

impl PermutationOp {
    pub fn new(perm: Vec<usize>, d: usize) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid(format!("{perm:?} is not a permutation")));
            }
        }
        if d == 0 {
            return Err(Error::invalid("copy dimension must be positive"));
        }
        Ok(PermutationOp { perm, d })
    }

    pub fn identity(k: usize, d: usize) -> Self {
        PermutationOp {
            perm: (0..k).collect(),
            d,
        }
    }

    /// All `k!` permutations in lexicographic order, identity first.
    pub fn all(k: usize, d: usize) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        let mut p: Vec<usize> = (0..k).collect();
        loop {
            out.push(PermutationOp::new(p.clone(), d)?);
            // next lexicographic permutation
            let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else {
                break;
            };
            let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
            p.swap(i - 1, j);
            p[i..].reverse();
        }
        Ok(out)
    }

    pub fn k(&self) -> usize {
        self.perm.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.k()];
        for (c, &p) in self.perm.iter().enumerate() {
            inv[p] = c;
        }
        PermutationOp { perm: inv, d: self.d }
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &PermutationOp) -> Self {
        PermutationOp {
            perm: other.perm.iter().map(|&p| self.perm[p]).collect(),
            d: self.d,
        }
    }

    pub fn cycles(&self) -> usize {
        let mut seen = vec![false; self.k()];
        let mut count = 0;
        for s in 0..self.k() {
            if !seen[s] {
                count += 1;
                let mut c = s;
                while !seen[c] {
                    seen[c] = true;
                    c = self.perm[c];
                }
            }
        }
        count
    }

    /// Image of basis index `idx` (copy 0 is the most significant digit).
    pub fn apply_index(&self, idx: usize) -> usize {
        let k = self.k();
        let mut digits = vec![0; k];
        let mut rest = idx;
        for c in (0..k).rev() {
            digits[c] = rest % self.d;
            rest /= self.d;
        }
        let mut out_digits = vec![0; k];
        for c in 0..k {
            out_digits[self.perm[c]] = digits[c];
        }
        out_digits.iter().fold(0, |acc, &x| acc * self.d + x)
    }

    pub fn dim(&self) -> Option<usize> {
        self.d.checked_pow(self.k() as u32)
    }

    pub fn matrix(&self) -> Result<CMat> {
        let dim = self.dim().filter(|&x| x <= CHOI_DIM_LIMIT).ok_or(Error::DimensionLimit {
            dim: self.dim().unwrap_or(usize::MAX),
            limit: CHOI_DIM_LIMIT,
        })?;
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            m[(self.apply_index(i), i)] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// `tr(T_π† O)` without materializing `T_π`.
    pub fn overlap(&self, o: &CMat) -> C64 {
        (0..o.ncols()).map(|i| o[(self.apply_index(i), i)]).sum()
    }
}

/// `Λ_{πσ} = tr(T_π† T_σ) = d^{#cycles(π⁻¹σ)}` over `PermutationOp::all`.
pub fn permutation_gram(k: usize, d: usize) -> Result<DMatrix<f64>> {
    let perms = PermutationOp::all(k, d)?;
    let df = d as f64;
    Ok(DMatrix::from_fn(perms.len(), perms.len(), |i, j| {
        df.powi(perms[i].inverse().compose(&perms[j]).cycles() as i32)
    }))
}

/// Unitary Weingarten matrix `Λ⁺` (pseudoinverse when `d < k`).
pub fn unitary_weingarten(k: usize, d: usize) -> Result<(DMatrix<f64>, bool)> {
    let g = permutation_gram(k, d)?;
    Ok(pseudo_inverse(&g))
}

fn check_operator(o: &CMat, k: usize, d: usize) -> Result<()> {
    if k == 0 || k > MAX_HAAR_COPIES {
        return Err(Error::invalid(format!("Haar twirl supports k in 1..={MAX_HAAR_COPIES}")));
    }
    let dim = d.checked_pow(k as u32).unwrap_or(usize::MAX);
    if dim > OPERATOR_DIM_LIMIT {
        return Err(Error::DimensionLimit {
            dim,
            limit: OPERATOR_DIM_LIMIT,
        });
    }
    if o.nrows() != dim || o.ncols() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: o.nrows(),
        });
    }
    Ok(())
}

/// `∫ U^{⊗k} O U^{†⊗k} dU = Σ_{π,σ} (Λ⁺)_{πσ} tr(T_π† O) T_σ`.
pub fn haar_twirl(o: &CMat, k: usize, d: usize) -> Result<CMat> {
    check_operator(o, k, d)?;
    let perms = PermutationOp::all(k, d)?;
    let (wg, _) = unitary_weingarten(k, d)?;
    let overlaps: Vec<C64> = perms.iter().map(|p| p.overlap(o)).collect();
    let mut out = CMat::zeros(o.nrows(), o.ncols());
    for (s, sigma) in perms.iter().enumerate() {
        let c: C64 = overlaps
            .iter()
            .enumerate()
            .map(|(p, a)| a * wg[(p, s)])
            .sum();
        for i in 0..o.ncols() {
            out[(sigma.apply_index(i), i)] += c;
        }
    }
    Ok(out)
}

/// `(1/d^k) Σ_π tr(T_π† O) T_π`.
pub fn approx_haar_twirl(o: &CMat, k: usize, d: usize) -> Result<CMat> {
    check_operator(o, k, d)?;
    let scale = 1.0 / o.nrows() as f64;
    let mut out = CMat::zeros(o.nrows(), o.ncols());
    for p in PermutationOp::all(k, d)? {
        let c = p.overlap(o) * scale;
        for i in 0..o.ncols() {
            out[(p.apply_index(i), i)] += c;
        }
    }
    Ok(out)
}

/// Choi state of the `k`-fold Haar channel on `d`-dimensional copies:
/// `(1/D) Σ_{π,σ} (Λ⁺)_{πσ} T_σ ⊗ T_π`, `D = d^k`, system factor first.
pub fn haar_choi(k: usize, d: usize) -> Result<CMat> {
    let big = d
        .checked_pow(k as u32)
        .and_then(|x| x.checked_mul(x))
        .unwrap_or(usize::MAX);
    if big > CHOI_DIM_LIMIT {
        return Err(Error::DimensionLimit {
            dim: big,
            limit: CHOI_DIM_LIMIT,
        });
    }
    let dk = d.pow(k as u32);
    let perms = PermutationOp::all(k, d)?;
    let (wg, _) = unitary_weingarten(k, d)?;
    let mut out = CMat::zeros(big, big);
    for (p, pi) in perms.iter().enumerate() {
        for (s, sigma) in perms.iter().enumerate() {
            let w = wg[(p, s)] / dk as f64;
            if w == 0.0 {
                continue;
            }
            for a in 0..dk {
                let ra = sigma.apply_index(a);
                for b in 0..dk {
                    let rb = pi.apply_index(b);
                    out[(ra * dk + rb, a * dk + b)] += C64::new(w, 0.0);
                }
            }
        }
    }
    Ok(out)
}
