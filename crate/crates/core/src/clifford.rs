//! Clifford operators as signed symplectic tableaux.
//!
//! Column `j` of the `2n × 2n` symplectic matrix is the bit pattern of the
//! image of generator `j` under conjugation, with generators ordered
//! `X_0..X_{n-1}, Z_0..Z_{n-1}`. `signs[j]` set means the image is `-H` for the
//! Hermitian Pauli `H` of that pattern. Global phases are quotiented out.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::f2::{span_basis, symplectic_unchecked, BinMat, BinVec};
use crate::pauli::PauliString;
use crate::{CMat, C64};

/// Largest register converted to a dense matrix.
pub const DENSE_QUBIT_LIMIT: usize = 12;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CliffordOp {
    n: usize,
    symplectic: BinMat,
    signs: BinVec,
    images: Vec<PauliString>,
}

impl std::fmt::Debug for CliffordOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let imgs: Vec<String> = self.images.iter().map(|p| p.to_string()).collect();
        write!(f, "CliffordOp(n={}, images={imgs:?})", self.n)
    }
}

fn is_symplectic(s: &BinMat, n: usize) -> bool {
    let cols: Vec<BinVec> = (0..2 * n).map(|j| s.column(j)).collect();
    for i in 0..2 * n {
        for j in 0..2 * n {
            let expect = i + n == j || j + n == i;
            if symplectic_unchecked(&cols[i], &cols[j]) != expect {
                return false;
            }
        }
    }
    true
}

impl CliffordOp {
    /// Validates `Sᵀ J S = J` before accepting the tableau.
    pub fn new(symplectic: BinMat, signs: BinVec) -> Result<Self> {
        let dim = symplectic.nrows();
        if !dim.is_multiple_of(2) || symplectic.ncols() != dim {
            return Err(Error::invalid(format!(
                "symplectic matrix must be 2n x 2n, got {}x{}",
                dim,
                symplectic.ncols()
            )));
        }
        if signs.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: signs.len(),
            });
        }
        let n = dim / 2;
        if !is_symplectic(&symplectic, n) {
            return Err(Error::invalid("matrix does not preserve the symplectic form"));
        }
        let images = (0..dim)
            .map(|j| {
                let p = PauliString::from_symplectic(&symplectic.column(j))?;
                Ok(if signs.get(j) { p.negate() } else { p })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CliffordOp {
            n,
            symplectic,
            signs,
            images,
        })
    }

    /// Builds the operator from the images of `X_0..X_{n-1}, Z_0..Z_{n-1}`.
    /// Each image must be Hermitian (sign `±1`).
    pub fn from_images(images: &[PauliString]) -> Result<Self> {
        if !images.len().is_multiple_of(2) || images.is_empty() {
            return Err(Error::invalid("need images of 2n generators"));
        }
        let n = images.len() / 2;
        let mut s = BinMat::zeros(2 * n, 2 * n);
        let mut signs = BinVec::zeros(2 * n);
        for (j, p) in images.iter().enumerate() {
            if p.n() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: p.n(),
                });
            }
            if !p.is_hermitian() {
                return Err(Error::invalid(format!("image {p} is not Hermitian")));
            }
            let bits = p.symplectic();
            for i in 0..2 * n {
                s.set(i, j, bits.get(i));
            }
            signs.set(j, p.is_negative());
        }
        CliffordOp::new(s, signs)
    }

    pub fn identity(n: usize) -> Self {
        CliffordOp::new(BinMat::identity(2 * n), BinVec::zeros(2 * n)).expect("identity")
    }

    pub fn hadamard(n: usize, q: usize) -> Result<Self> {
        check_qubit(n, q)?;
        let mut imgs = generators(n);
        imgs.swap(q, n + q);
        CliffordOp::from_images(&imgs)
    }

    /// Phase gate `S = diag(1, i)`: `X ↦ Y`, `Z ↦ Z`.
    pub fn phase_s(n: usize, q: usize) -> Result<Self> {
        check_qubit(n, q)?;
        let mut imgs = generators(n);
        imgs[q] = PauliString::single(n, q, 'Y')?;
        CliffordOp::from_images(&imgs)
    }

    pub fn cnot(n: usize, control: usize, target: usize) -> Result<Self> {
        check_qubit(n, control)?;
        check_qubit(n, target)?;
        if control == target {
            return Err(Error::invalid("control and target must differ"));
        }
        let mut imgs = generators(n);
        imgs[control] = imgs[control].mul(&imgs[target])?;
        imgs[n + target] = imgs[n + target].mul(&imgs[n + control])?;
        CliffordOp::from_images(&imgs)
    }

    /// Conjugation by a Pauli `Q`: flips the sign of every generator that
    /// anticommutes with `Q`.
    pub fn pauli(q: &PauliString) -> Result<Self> {
        let imgs: Vec<PauliString> = generators(q.n())
            .into_iter()
            .map(|g| if g.commutes_with(q) { g } else { g.negate() })
            .collect();
        CliffordOp::from_images(&imgs)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symplectic(&self) -> &BinMat {
        &self.symplectic
    }

    pub fn signs(&self) -> &BinVec {
        &self.signs
    }

    /// Signed images of `X_0..X_{n-1}, Z_0..Z_{n-1}`.
    pub fn images(&self) -> &[PauliString] {
        &self.images
    }

    /// `C P C†` with exact phase.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: p.n(),
            });
        }
        let mut out = PauliString::new(
            BinVec::zeros(self.n),
            BinVec::zeros(self.n),
            p.phase(),
        )?;
        for j in 0..self.n {
            if p.x().get(j) {
                out = out.mul(&self.images[j])?;
            }
        }
        for j in 0..self.n {
            if p.z().get(j) {
                out = out.mul(&self.images[self.n + j])?;
            }
        }
        Ok(out)
    }

    /// `self ∘ first`: conjugation by `first` followed by `self`.
    pub fn compose(&self, first: &CliffordOp) -> Result<CliffordOp> {
        let imgs = first
            .images
            .iter()
            .map(|p| self.conjugate(p))
            .collect::<Result<Vec<_>>>()?;
        CliffordOp::from_images(&imgs)
    }

    pub fn inverse(&self) -> CliffordOp {
        let n = self.n;
        // S⁻¹ = J Sᵀ J over F₂
        let j = {
            let mut j = BinMat::zeros(2 * n, 2 * n);
            for i in 0..n {
                j.set(i, n + i, true);
                j.set(n + i, i, true);
            }
            j
        };
        let inv = j
            .mul(&self.symplectic.transpose())
            .and_then(|m| m.mul(&j))
            .expect("square");
        let gens = generators(n);
        let imgs: Vec<PauliString> = (0..2 * n)
            .map(|c| {
                let q = PauliString::from_symplectic(&inv.column(c)).expect("even length");
                let back = self.conjugate(&q).expect("same n");
                debug_assert_eq!(back.symplectic(), gens[c].symplectic());
                if back.is_negative() {
                    q.negate()
                } else {
                    q
                }
            })
            .collect();
        CliffordOp::from_images(&imgs).expect("inverse of a valid tableau")
    }

    /// Dense unitary realizing the tableau, up to global phase.
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.n > DENSE_QUBIT_LIMIT {
            return Err(Error::DimensionLimit {
                dim: 1 << self.n,
                limit: 1 << DENSE_QUBIT_LIMIT,
            });
        }
        let n = self.n;
        let d = 1usize << n;
        let zero_state = stabilizer_state(&self.images[n..])?;
        let mut cols: Vec<Vec<C64>> = vec![Vec::new(); d];
        cols[0] = zero_state;
        // U|x⟩ = Π_j img(X_j)^{x_j} U|0⟩, built from the column with the
        // lowest set bit cleared.
        for x in 1..d {
            let low = x.trailing_zeros() as usize;
            let qubit = n - 1 - low;
            let prev = x & (x - 1);
            cols[x] = self.images[qubit].apply(&cols[prev]);
        }
        Ok(DMatrix::from_fn(d, d, |r, c| cols[c][r]))
    }
}

fn check_qubit(n: usize, q: usize) -> Result<()> {
    if q >= n {
        return Err(Error::invalid(format!("qubit {q} out of range for n={n}")));
    }
    Ok(())
}

/// `X_0..X_{n-1}, Z_0..Z_{n-1}` as Pauli strings.
pub fn generators(n: usize) -> Vec<PauliString> {
    let mut out = Vec::with_capacity(2 * n);
    for kind in ['X', 'Z'] {
        for q in 0..n {
            out.push(PauliString::single(n, q, kind).expect("in range"));
        }
    }
    out
}

/// Amplitudes of the state stabilized by the `n` independent, commuting,
/// Hermitian `stabilizers` (global phase arbitrary).
pub fn stabilizer_state(stabilizers: &[PauliString]) -> Result<Vec<C64>> {
    let n = stabilizers.first().map_or(0, PauliString::n);
    if stabilizers.len() != n {
        return Err(Error::invalid("need exactly n stabilizer generators"));
    }
    // Eliminate on the X part; the remaining Z-type rows fix the affine support.
    let mut rows: Vec<PauliString> = stabilizers.to_vec();
    let mut r = 0;
    for q in 0..n {
        let Some(p) = (r..n).find(|&i| rows[i].x().get(q)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.x().get(q) {
                *row = row.mul(&pivot)?;
            }
        }
        r += 1;
    }
    let z_rows: Vec<BinVec> = rows[r..]
        .iter()
        .map(|p| {
            let mut aug = p.z().clone().concat(&BinVec::zeros(1));
            aug.set(n, p.is_negative());
            aug
        })
        .collect();
    let system = BinMat::from_rows(n + 1, z_rows)?;
    let (rref, pivots) = system.rref();
    if pivots.contains(&n) {
        return Err(Error::consistency("stabilizer constraints are inconsistent"));
    }
    let mut b = BinVec::zeros(n);
    for (row, &p) in rref.iter().zip(&pivots) {
        b.set(p, row.get(n));
    }
    let index: usize = (0..n).filter(|&q| b.get(q)).map(|q| 1 << (n - 1 - q)).sum();
    let d = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); d];
    amps[index] = C64::new(1.0, 0.0);
    for s in stabilizers {
        if !s.is_hermitian() {
            return Err(Error::invalid("stabilizers must be Hermitian"));
        }
        let sa = s.apply(&amps);
        for (a, t) in amps.iter_mut().zip(sa) {
            *a = (*a + t) * 0.5;
        }
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return Err(Error::consistency("projected stabilizer state vanished"));
    }
    Ok(amps.into_iter().map(|a| a / norm).collect())
}

/// Uniform random Clifford (modulo global phase).
///
/// Picks the image of `X_q` uniformly among nonzero vectors of the remaining
/// symplectic subspace and the image of `Z_q` uniformly among its partners
/// with `⟨a,b⟩ = 1`, then recurses on the symplectic complement of the pair.
/// Signs are independent fair bits.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CliffordOp> {
    if n == 0 {
        return Err(Error::invalid("random_clifford needs n >= 1"));
    }
    let dim = 2 * n;
    let mut basis: Vec<BinVec> = (0..dim).map(|i| BinVec::unit(dim, i)).collect();
    let mut s = BinMat::zeros(dim, dim);
    let combine = |basis: &[BinVec], rng: &mut R| {
        let mut v = BinVec::zeros(dim);
        for b in basis {
            if rng.random::<bool>() {
                v.xor_assign(b);
            }
        }
        v
    };
    for q in 0..n {
        let a = loop {
            let v = combine(&basis, rng);
            if !v.is_zero() {
                break v;
            }
        };
        let b = loop {
            let v = combine(&basis, rng);
            if symplectic_unchecked(&a, &v) {
                break v;
            }
        };
        for i in 0..dim {
            s.set(i, q, a.get(i));
            s.set(i, n + q, b.get(i));
        }
        let projected: Vec<BinVec> = basis
            .iter()
            .map(|w| {
                let mut w = w.clone();
                let (wb, wa) = (symplectic_unchecked(&w, &b), symplectic_unchecked(&w, &a));
                if wb {
                    w.xor_assign(&a);
                }
                if wa {
                    w.xor_assign(&b);
                }
                w
            })
            .collect();
        basis = span_basis(&projected)?;
        debug_assert_eq!(basis.len(), dim - 2 * (q + 1));
    }
    let mut signs = BinVec::zeros(dim);
    for j in 0..dim {
        signs.set(j, rng.random::<bool>());
    }
    CliffordOp::new(s, signs)
}

/// Every element of the Clifford group modulo phase, for `n ≤ 2`
/// (24 elements at `n = 1`, 11520 at `n = 2`).
pub fn enumerate_clifford_group(n: usize) -> Result<Vec<CliffordOp>> {
    if n == 0 || n > 2 {
        return Err(Error::invalid(format!(
            "exhaustive Clifford enumeration supports n in 1..=2, got {n}"
        )));
    }
    let dim = 2 * n;
    let mut out = Vec::new();
    for mask in 0u64..1 << (dim * dim) {
        let mut s = BinMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                s.set(i, j, mask >> (i * dim + j) & 1 == 1);
            }
        }
        if !is_symplectic(&s, n) {
            continue;
        }
        for sign_mask in 0u64..1 << dim {
            out.push(CliffordOp::new(s.clone(), BinVec::from_u64(sign_mask, dim))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    /// Checks `U P U† = conj(C, P)` densely, up to nothing (sign included).
    fn dense_agrees(c: &CliffordOp, q: &PauliString) -> bool {
        let u = c.to_matrix().unwrap();
        let lhs = &u * q.to_matrix() * u.adjoint();
        let rhs = c.conjugate(q).unwrap().to_matrix();
        (lhs - rhs).iter().all(|e| e.norm() < 1e-10)
    }

    #[test]
    fn identity_leaves_paulis_alone() {
        let id = CliffordOp::identity(3);
        for l in ["XYZ", "-IZI", "+iYYX"] {
            assert_eq!(id.conjugate(&p(l)).unwrap(), p(l));
        }
        let m = id.to_matrix().unwrap();
        assert!((m - CMat::identity(8, 8)).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let h = CliffordOp::hadamard(2, 0).unwrap();
        assert_eq!(h.conjugate(&p("XI")).unwrap(), p("ZI"));
        assert_eq!(h.conjugate(&p("ZI")).unwrap(), p("XI"));
        assert_eq!(h.conjugate(&p("YI")).unwrap(), p("-YI"));
        assert_eq!(h.conjugate(&p("IX")).unwrap(), p("IX"));
    }

    #[test]
    fn cnot_matrix_is_the_permutation() {
        let c = CliffordOp::cnot(2, 0, 1).unwrap();
        let u = c.to_matrix().unwrap();
        // fix global phase from the (0,0) entry
        let ph = u[(0, 0)] / u[(0, 0)].norm();
        let expect = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]];
        for r in 0..4 {
            for col in 0..4 {
                let e = C64::new(expect[r][col] as f64, 0.0);
                assert!((u[(r, col)] / ph - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_symplectic() {
        let mut s = BinMat::identity(2);
        s.set(0, 1, true);
        s.set(1, 1, false);
        s.set(1, 0, false);
        s.set(0, 0, false);
        assert!(CliffordOp::new(BinMat::zeros(2, 2), BinVec::zeros(2)).is_err());
        assert!(CliffordOp::from_images(&[p("X"), p("X")]).is_err());
        assert!(CliffordOp::from_images(&[p("iX"), p("Z")]).is_err());
    }

    #[test]
    fn gate_matrices_match_conjugation() {
        let gates = [
            CliffordOp::hadamard(3, 1).unwrap(),
            CliffordOp::phase_s(3, 2).unwrap(),
            CliffordOp::cnot(3, 2, 0).unwrap(),
            CliffordOp::pauli(&p("XYZ")).unwrap(),
        ];
        for g in &gates {
            for l in ["XII", "IZI", "IIY", "YXZ"] {
                assert!(dense_agrees(g, &p(l)), "{g:?} on {l}");
            }
        }
    }

    #[test]
    fn random_cliffords_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            for _ in 0..20 {
                let c = random_clifford(n, &mut rng).unwrap();
                assert!(is_symplectic(c.symplectic(), n));
                let u = c.to_matrix().unwrap();
                let d = 1 << n;
                let err = (&u * u.adjoint() - CMat::identity(d, d)).camax();
                assert!(err < 1e-12);
                for g in generators(n) {
                    assert!(dense_agrees(&c, &g));
                }
                let q = PauliString::from_masks(n, rng.random::<u64>() % d as u64, rng.random::<u64>() % d as u64);
                assert!(dense_agrees(&c, &q));
            }
        }
    }

    #[test]
    fn conjugation_is_a_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let c1 = random_clifford(4, &mut rng).unwrap();
            let c2 = random_clifford(4, &mut rng).unwrap();
            let q = PauliString::from_masks(4, rng.random::<u64>() % 16, rng.random::<u64>() % 16);
            let seq = c2.conjugate(&c1.conjugate(&q).unwrap()).unwrap();
            assert_eq!(c2.compose(&c1).unwrap().conjugate(&q).unwrap(), seq);
            let inv = c1.inverse();
            assert_eq!(inv.conjugate(&c1.conjugate(&q).unwrap()).unwrap(), q);
            assert_eq!(inv.compose(&c1).unwrap(), CliffordOp::identity(4));
        }
    }

    #[test]
    fn conjugation_preserves_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let c = random_clifford(5, &mut rng).unwrap();
            let a = PauliString::from_masks(5, rng.random::<u64>() % 32, rng.random::<u64>() % 32);
            let b = PauliString::from_masks(5, rng.random::<u64>() % 32, rng.random::<u64>() % 32);
            let (ca, cb) = (c.conjugate(&a).unwrap(), c.conjugate(&b).unwrap());
            assert_eq!(crate::pauli::chi(&ca, &cb).unwrap(), crate::pauli::chi(&a, &b).unwrap());
            assert!(ca.is_hermitian());
        }
    }

    #[test]
    fn group_orders() {
        assert_eq!(enumerate_clifford_group(1).unwrap().len(), 24);
        let g2 = enumerate_clifford_group(2).unwrap();
        assert_eq!(g2.len(), 11520);
        let distinct: std::collections::HashSet<_> = g2.iter().collect();
        assert_eq!(distinct.len(), 11520);
        assert!(enumerate_clifford_group(3).is_err());
    }

    #[test]
    fn single_qubit_sampling_is_uniform() {
        // χ² over the 24 cosets of C_1 / U(1) at 10^5 samples.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let group = enumerate_clifford_group(1).unwrap();
        let mut counts: HashMap<CliffordOp, usize> = HashMap::new();
        let samples = 100_000;
        for _ in 0..samples {
            *counts.entry(random_clifford(1, &mut rng).unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        assert!(group.iter().all(|g| counts.contains_key(g)));
        let expect = samples as f64 / 24.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // 23 dof: P(χ² > 49.7) ≈ 0.001
        assert!(chi2 < 49.7, "chi2 = {chi2}");
        let sigma = expect.sqrt();
        for &c in counts.values() {
            assert!((c as f64 - expect).abs() < 4.0 * sigma);
        }
    }
}
