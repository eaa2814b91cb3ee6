//! Pauli strings with exact phase tracking.
//!
//! A [`PauliString`] stores `i^phase · X^x Z^z`, where `X^x Z^z` is the
//! site-wise product `⊗_j X^{x_j} Z^{z_j}`. Since `Y = i·XZ`, the Hermitian
//! Pauli with bit pattern `(x, z)` carries phase `#Y = |x ∧ z|`.
//!
//! Qubit `j` of an `n`-qubit register is bit `n-1-j` of a computational basis
//! index, so qubit 0 is the leftmost tensor factor.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::f2::BinVec;
use crate::{CMat, C64};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BinVec,
    z: BinVec,
    phase: u8,
}

/// `i^p` for `p mod 4`.
pub(crate) fn i_pow(p: u8) -> C64 {
    match p & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            x: BinVec::zeros(n),
            z: BinVec::zeros(n),
            phase: 0,
        }
    }

    /// `i^phase X^x Z^z`.
    pub fn new(x: BinVec, z: BinVec, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: z.len(),
            });
        }
        Ok(PauliString {
            x,
            z,
            phase: phase & 3,
        })
    }

    /// The Hermitian Pauli (`+1` sign) with the given bit parts.
    pub fn hermitian(x: BinVec, z: BinVec) -> Result<Self> {
        let mut p = PauliString::new(x, z, 0)?;
        p.phase = p.y_count() as u8 & 3;
        Ok(p)
    }

    /// Hermitian Pauli from a length-`2n` symplectic vector (x block, then z block).
    pub fn from_symplectic(v: &BinVec) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::invalid("symplectic vector must have even length"));
        }
        let n = v.len() / 2;
        PauliString::hermitian(v.slice(0, n), v.slice(n, n))
    }

    /// Hermitian Pauli from qubit bit masks (bit `n-1-j` ↔ qubit `j`).
    pub fn from_masks(n: usize, xmask: u64, zmask: u64) -> Self {
        let mut x = BinVec::zeros(n);
        let mut z = BinVec::zeros(n);
        for j in 0..n {
            let b = n - 1 - j;
            x.set(j, xmask >> b & 1 == 1);
            z.set(j, zmask >> b & 1 == 1);
        }
        PauliString::hermitian(x, z).expect("equal lengths")
    }

    /// Single-qubit Pauli `label ∈ {I,X,Y,Z}` on `qubit` of an `n`-qubit register.
    pub fn single(n: usize, qubit: usize, label: char) -> Result<Self> {
        let mut s = vec!['I'; n];
        *s.get_mut(qubit)
            .ok_or_else(|| Error::invalid(format!("qubit {qubit} out of range for n={n}")))? =
            label;
        s.into_iter().collect::<String>().parse()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &BinVec {
        &self.x
    }

    pub fn z(&self) -> &BinVec {
        &self.z
    }

    /// Exponent of `i` in the `i^phase X^x Z^z` form.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn y_count(&self) -> usize {
        (0..self.n()).filter(|&j| self.x.get(j) && self.z.get(j)).count()
    }

    /// Exponent `s` with `self = i^s · H` for the Hermitian Pauli `H` of the same bits.
    pub fn hermitian_phase(&self) -> u8 {
        (self.phase + 4 - (self.y_count() & 3) as u8) & 3
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_phase().is_multiple_of(2)
    }

    /// `true` when the operator is `-H` for Hermitian `H`.
    pub fn is_negative(&self) -> bool {
        self.hermitian_phase() == 2
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Symplectic bit vector `(x | z)`, phase discarded.
    pub fn symplectic(&self) -> BinVec {
        self.x.concat(&self.z)
    }

    /// Phaseless weight (number of non-identity sites).
    pub fn weight(&self) -> usize {
        (0..self.n()).filter(|&j| self.x.get(j) || self.z.get(j)).count()
    }

    pub fn masks(&self) -> (u64, u64) {
        let n = self.n();
        let mut xm = 0u64;
        let mut zm = 0u64;
        for j in 0..n {
            if self.x.get(j) {
                xm |= 1 << (n - 1 - j);
            }
            if self.z.get(j) {
                zm |= 1 << (n - 1 - j);
            }
        }
        (xm, zm)
    }

    pub fn negate(&self) -> Self {
        let mut p = self.clone();
        p.phase = (p.phase + 2) & 3;
        p
    }

    /// Same bits, Hermitian with `+1` sign.
    pub fn unsigned(&self) -> Self {
        PauliString::hermitian(self.x.clone(), self.z.clone()).expect("equal lengths")
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n() != other.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        // X^x1 Z^z1 X^x2 Z^z2 = (-1)^{z1·x2} X^{x1+x2} Z^{z1+z2}
        let swap = self.z.dot(&other.x) as u8;
        Ok(PauliString {
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
            phase: (self.phase + other.phase + 2 * swap) & 3,
        })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_matrix(&self) -> CMat {
        let d = 1usize << self.n();
        let (xm, zm) = self.masks();
        let c = i_pow(self.phase);
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d {
            let sign = if (zm & b as u64).count_ones() % 2 == 1 { -c } else { c };
            m[((b as u64 ^ xm) as usize, b)] = sign;
        }
        m
    }

    /// Applies the operator to an amplitude vector of length `2^n`.
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let (xm, zm) = self.masks();
        let c = i_pow(self.phase);
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (b, a) in amps.iter().enumerate() {
            let s = if (zm & b as u64).count_ones() % 2 == 1 { -c } else { c };
            out[(b as u64 ^ xm) as usize] = s * a;
        }
        out
    }
}

/// `P·Q` with exact phase.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    p.mul(q)
}

/// `χ(P,Q) = tr(PQP†Q†)/d`: `+1` when the Paulis commute, `-1` otherwise.
pub fn chi(p: &PauliString, q: &PauliString) -> Result<i8> {
    if p.n() != q.n() {
        return Err(Error::LengthMismatch {
            expected: p.n(),
            got: q.n(),
        });
    }
    Ok(if p.commutes_with(q) { 1 } else { -1 })
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.hermitian_phase() as usize];
        f.write_str(prefix)?;
        for j in 0..self.n() {
            let c = match (self.x.get(j), self.z.get(j)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses labels such as `XYZ`, `-XZ`, `+iY`. The label denotes
    /// `sign · (Hermitian Pauli)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1u8, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        let mut x = BinVec::zeros(n);
        let mut z = BinVec::zeros(n);
        for (j, c) in body.chars().enumerate() {
            match c.to_ascii_uppercase() {
                'I' => {}
                'X' => x.set(j, true),
                'Y' => {
                    x.set(j, true);
                    z.set(j, true)
                }
                'Z' => z.set(j, true),
                other => return Err(Error::invalid(format!("bad Pauli letter {other:?}"))),
            }
        }
        let mut p = PauliString::hermitian(x, z)?;
        p.phase = (p.phase + sign) & 3;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn close(a: &CMat, b: &CMat) -> bool {
        (a - b).iter().all(|e| e.norm() < 1e-12)
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let xz = pauli_mul(&p("X"), &p("Z")).unwrap();
        assert_eq!(xz, p("-iY"));
        assert_eq!(xz.x(), p("Y").x());
        assert_eq!(xz.z(), p("Y").z());
        assert!(!xz.is_hermitian());
    }

    #[test]
    fn square_is_identity() {
        for l in ["X", "Y", "Z", "XYZ", "-YY"] {
            let sq = pauli_mul(&p(l), &p(l)).unwrap();
            assert_eq!(sq, PauliString::identity(p(l).n()), "{l}");
        }
    }

    #[test]
    fn sitewise_product() {
        let r = pauli_mul(&p("XZ"), &p("ZZ")).unwrap();
        assert_eq!(r, p("-iYI"));
        assert_eq!(r.unsigned(), p("YI"));
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi(&p("X"), &p("Z")).unwrap(), -1);
        for q in ["I", "X", "Y", "Z"] {
            assert_eq!(chi(&p("I"), &p(q)).unwrap(), 1);
        }
        assert_eq!(chi(&p("XX"), &p("ZZ")).unwrap(), 1);
        assert!(chi(&p("X"), &p("XX")).is_err());
    }

    #[test]
    fn chi_matches_trace_definition() {
        let labels = ["I", "X", "Y", "Z"];
        for a in labels {
            for b in labels {
                let (pa, pb) = (p(a).to_matrix(), p(b).to_matrix());
                let tr = (&pa * &pb * pa.adjoint() * pb.adjoint()).trace() / 2.0;
                assert!((tr.re - chi(&p(a), &p(b)).unwrap() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matrices_match_textbook() {
        let y = p("Y").to_matrix();
        assert!((y[(0, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((y[(1, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        // X on qubit 0 of two qubits flips the most significant bit
        let xi = p("XI").to_matrix();
        assert_eq!(xi[(2, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn labels_roundtrip() {
        for l in ["+XYZ", "-IZ", "+iX", "-iYY"] {
            assert_eq!(p(l).to_string(), l);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (0u64..1 << n, 0u64..1 << n, 0u8..4)
            .prop_map(move |(x, z, ph)| {
                PauliString::new(BinVec::from_u64(x, n), BinVec::from_u64(z, n), ph).unwrap()
            })
    }

    proptest! {
        #[test]
        fn product_matches_dense(a in arb_pauli(3), b in arb_pauli(3)) {
            let prod = pauli_mul(&a, &b).unwrap();
            prop_assert!(close(&prod.to_matrix(), &(a.to_matrix() * b.to_matrix())));
        }

        #[test]
        fn chi_is_symmetric(a in arb_pauli(4), b in arb_pauli(4)) {
            prop_assert_eq!(chi(&a, &b).unwrap(), chi(&b, &a).unwrap());
            let sp = crate::f2::symplectic_product(&a.symplectic(), &b.symplectic()).unwrap();
            prop_assert_eq!(chi(&a, &b).unwrap(), if sp { -1 } else { 1 });
        }

        #[test]
        fn apply_matches_matrix(a in arb_pauli(3), seed in 0u64..1000) {
            let amps: Vec<C64> = (0..8).map(|i| C64::new((i as f64 + seed as f64).sin(), (i as f64 * 0.3).cos())).collect();
            let v = nalgebra::DVector::from_vec(amps.clone());
            let expect = a.to_matrix() * v;
            let got = a.apply(&amps);
            for (g, e) in got.iter().zip(expect.iter()) {
                prop_assert!((g - e).norm() < 1e-12);
            }
        }
    }
}
