//! Dense statevector and operator simulation for small registers.
//!
//! Basis index bit `n-1-j` holds qubit `j`. Pauli tables of length `4^n` are
//! indexed by `(xmask << n) | zmask` with masks in the same bit convention.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::{CMat, C64};

/// Largest statevector register.
pub const STATE_QUBIT_LIMIT: usize = 12;
/// Largest dimension of an explicit `k`-copy operator or Haar unitary.
pub const OPERATOR_DIM_LIMIT: usize = 256;
/// Largest Choi-vector dimension `d^{2k}`.
pub const CHOI_DIM_LIMIT: usize = 4096;
/// Largest register for `4^n` Pauli tables.
pub const PAULI_TABLE_QUBIT_LIMIT: usize = 8;

const NORM_TOL: f64 = 1e-10;

/// Dense complex operator; unitarity and hermiticity are checked on demand.
pub type DenseOperator = CMat;

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub(crate) fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Validates length `2^n` and unit norm (within `1e-10`).
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_qubits(n, STATE_QUBIT_LIMIT)?;
        if amps.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        let norm = norm_sqr(&amps).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { n, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(n: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm = norm_sqr(&amps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        for a in &mut amps {
            *a /= norm;
        }
        StateVector::new(n, amps)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n, STATE_QUBIT_LIMIT)?;
        if index >= 1 << n {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amps = vec![zero(); 1 << n];
        amps[index] = one();
        Ok(StateVector { n, amps })
    }

    pub fn zero_state(n: usize) -> Result<Self> {
        StateVector::basis(n, 0)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let amps = kron_vec(&self.amps, &other.amps);
        StateVector::new(self.n + other.n, amps)
    }

    /// `U|ψ⟩` for a dense `2^n × 2^n` matrix (renormalized to absorb rounding).
    pub fn apply(&self, u: &CMat) -> Result<StateVector> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: u.nrows(),
            });
        }
        let out = u * self.to_dvector();
        StateVector::normalized(self.n, out.as_slice().to_vec())
    }

    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        if p.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: p.n(),
            });
        }
        Ok(StateVector {
            n: self.n,
            amps: p.apply(&self.amps),
        })
    }

    /// `⟨ψ|P|ψ⟩` for a Hermitian Pauli.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if !p.is_hermitian() {
            return Err(Error::invalid(format!("{p} is not Hermitian")));
        }
        let pa = self.apply_pauli(p)?;
        let v: C64 = self
            .amps
            .iter()
            .zip(&pa.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(v.re)
    }

    /// Probability that every qubit in `qubits` reads 0.
    pub fn prob_zero_on(&self, qubits: &[usize]) -> f64 {
        let mask: usize = qubits.iter().map(|&q| 1 << (self.n - 1 - q)).sum();
        self.amps
            .iter()
            .enumerate()
            .filter(|(b, _)| b & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> CMat {
        let v = self.to_dvector();
        &v * v.adjoint()
    }
}

fn check_qubits(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::DimensionLimit {
            dim: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
            limit: 1 << limit,
        });
    }
    Ok(())
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    check_qubits(n, STATE_QUBIT_LIMIT)?;
    let amps: Vec<C64> = (0..1usize << n).map(|_| gaussian(rng)).collect();
    StateVector::normalized(n, amps)
}

/// Haar-random `d × d` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMat> {
    if d == 0 || d > OPERATOR_DIM_LIMIT {
        return Err(Error::DimensionLimit {
            dim: d,
            limit: OPERATOR_DIM_LIMIT,
        });
    }
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { one() };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    Ok(q)
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && (u * u.adjoint() - CMat::identity(u.nrows(), u.nrows())).camax() <= tol
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && (a - a.adjoint()).camax() <= tol
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `a^{⊗k}` (the `1 × 1` identity for `k = 0`).
pub fn kron_power(a: &CMat, k: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for _ in 0..k {
        out = out.kronecker(a);
    }
    out
}

/// Eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// Trace norm of a Hermitian matrix from its eigenvalues.
pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).iter().map(|l| l.abs()).sum()
}

/// Trace norm of a general matrix from its singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    a.singular_values().iter().sum()
}

/// In-place Walsh–Hadamard transform (unnormalized).
pub fn walsh_hadamard(v: &mut [f64]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn walsh_hadamard_complex(v: &mut [C64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Table index `(xmask << n) | zmask` of a Pauli (phase ignored).
pub fn pauli_index(p: &PauliString) -> usize {
    let (x, z) = p.masks();
    ((x << p.n()) | z) as usize
}

/// Hermitian Pauli with table index `idx`.
pub fn pauli_from_index(n: usize, idx: usize) -> PauliString {
    let mask = (1u64 << n) - 1;
    PauliString::from_masks(n, (idx as u64 >> n) & mask, idx as u64 & mask)
}

/// Evaluates `Σ_b f(ψ[b ⊕ x], ψ[b]) (-1)^{z·b}` times `i^{|x∧z|}` for every
/// Pauli index; shared by the expectation and Bell tables.
fn pauli_sums(psi: &StateVector, pair: impl Fn(C64, C64) -> C64) -> Result<Vec<C64>> {
    let n = psi.n;
    check_qubits(n, PAULI_TABLE_QUBIT_LIMIT)?;
    let d = 1usize << n;
    let a = &psi.amps;
    let mut out = vec![zero(); d * d];
    let mut buf = vec![zero(); d];
    for x in 0..d {
        for b in 0..d {
            buf[b] = pair(a[b ^ x], a[b]);
        }
        walsh_hadamard_complex(&mut buf);
        for z in 0..d {
            let y = (x & z).count_ones() as u8;
            out[(x << n) | z] = crate::pauli::i_pow(y) * buf[z];
        }
    }
    Ok(out)
}

/// `tr(Pψ) = ⟨ψ|P|ψ⟩` for every Hermitian Pauli, indexed as [`pauli_index`].
pub fn pauli_expectations(psi: &StateVector) -> Result<Vec<f64>> {
    Ok(pauli_sums(psi, |u, v| u.conj() * v)?
        .into_iter()
        .map(|c| c.re)
        .collect())
}

/// `p_ψ(P) = tr²(Pψ)/d`.
pub fn pauli_distribution(psi: &StateVector) -> Result<Vec<f64>> {
    let d = psi.dim() as f64;
    Ok(pauli_expectations(psi)?
        .into_iter()
        .map(|e| e * e / d)
        .collect())
}

/// Bell-basis outcome distribution `q_ψ(P) = |ψᵀ P ψ|²/d`.
pub fn bell_distribution(psi: &StateVector) -> Result<Vec<f64>> {
    let d = psi.dim() as f64;
    Ok(pauli_sums(psi, |u, v| u * v)?
        .into_iter()
        .map(|c| c.norm_sqr() / d)
        .collect())
}

/// Self-convolution `(f⋆f)(P) = Σ_Q f(Q) f(QP)` over the Pauli group modulo
/// phases, via the Walsh–Hadamard transform.
pub fn self_convolution(table: &[f64]) -> Vec<f64> {
    let mut w = table.to_vec();
    walsh_hadamard(&mut w);
    for v in &mut w {
        *v *= *v;
    }
    walsh_hadamard(&mut w);
    let len = w.len() as f64;
    w.into_iter().map(|v| (v / len).max(0.0)).collect()
}

/// Bell-measurement outcome distribution obtained by simulating the
/// measurement circuit on `ψ ⊗ ψ`: a CNOT from each qubit of the first copy
/// to its partner in the second, a Hadamard on the first, then a
/// computational-basis readout. Outcome bits `(a, b)` on pair `j` identify
/// the Bell state `(I ⊗ X^b Z^a)|Φ⁺⟩`.
pub fn bell_measurement_distribution(psi: &StateVector) -> Result<Vec<f64>> {
    let n = psi.n;
    check_qubits(2 * n, STATE_QUBIT_LIMIT)?;
    let d = 1usize << n;
    let mut v = kron_vec(&psi.amps, &psi.amps);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        let ca = 1usize << (2 * n - 1 - j);
        let tb = 1usize << (n - 1 - j);
        for idx in 0..d * d {
            if idx & ca != 0 && idx & tb == 0 {
                v.swap(idx, idx | tb);
            }
        }
        for idx in 0..d * d {
            if idx & ca == 0 {
                let (a, b) = (v[idx], v[idx | ca]);
                v[idx] = (a + b) * s;
                v[idx | ca] = (a - b) * s;
            }
        }
    }
    let mut out = vec![0.0; d * d];
    for (o, amp) in v.iter().enumerate() {
        let zmask = o >> n;
        let xmask = o & (d - 1);
        out[(xmask << n) | zmask] += amp.norm_sqr();
    }
    Ok(out)
}

/// How Bell-difference samples are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BellPath {
    /// Draw directly from the exact `(p⋆p)` table.
    Table,
    /// Two simulated Bell measurements on `ψ⊗ψ`, outcomes multiplied.
    Measurement,
}

/// Reusable Bell-difference sampler for a fixed state.
#[derive(Clone, Debug)]
pub struct BellDifferenceSampler {
    n: usize,
    path: BellPath,
    dist: WeightedIndex<f64>,
}

impl BellDifferenceSampler {
    pub fn new(psi: &StateVector, path: BellPath) -> Result<Self> {
        let table = match path {
            BellPath::Table => self_convolution(&pauli_distribution(psi)?),
            BellPath::Measurement => bell_measurement_distribution(psi)?,
        };
        let dist = WeightedIndex::new(&table)
            .map_err(|e| Error::consistency(format!("bad sampling table: {e}")))?;
        Ok(BellDifferenceSampler {
            n: psi.n,
            path,
            dist,
        })
    }

    /// Table index of one sample; the measurement path consumes four copies.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self.path {
            BellPath::Table => self.dist.sample(rng),
            BellPath::Measurement => self.dist.sample(rng) ^ self.dist.sample(rng),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliString {
        pauli_from_index(self.n, self.sample_index(rng))
    }

    /// Copies of `ψ` consumed per sample.
    pub fn copies_per_sample(&self) -> usize {
        4
    }
}

/// One phaseless Bell-difference sample from `ψ`.
pub fn bell_difference_sample<R: Rng + ?Sized>(
    psi: &StateVector,
    path: BellPath,
    rng: &mut R,
) -> Result<PauliString> {
    Ok(BellDifferenceSampler::new(psi, path)?.sample(rng))
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Empirical histogram of table indices.
pub fn histogram(samples: &[usize], len: usize) -> Vec<f64> {
    let mut h = vec![0.0; len];
    for &s in samples {
        h[s] += 1.0;
    }
    let total = samples.len() as f64;
    h.iter_mut().for_each(|v| *v /= total);
    h
}
