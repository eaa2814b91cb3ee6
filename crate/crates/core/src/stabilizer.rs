//! Stabilizer groups of dense states.

use crate::dense::{pauli_expectations, pauli_from_index, StateVector};
use crate::error::{Error, Result};
use crate::f2::{enumerate_span, span_basis, BinVec};
use crate::pauli::PauliString;

/// Tolerance for `|⟨ψ|P|ψ⟩| = 1`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Abelian Pauli subgroup given by independent, commuting, signed generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliString>,
}

impl StabilizerGroup {
    /// Validates Hermiticity, pairwise commutation and independence.
    pub fn new(n: usize, generators: Vec<PauliString>) -> Result<Self> {
        for g in &generators {
            if g.n() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: g.n(),
                });
            }
            if !g.is_hermitian() {
                return Err(Error::invalid(format!("generator {g} is not Hermitian")));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::invalid(format!("{a} and {b} anticommute")));
                }
            }
        }
        let vecs: Vec<BinVec> = generators.iter().map(PauliString::symplectic).collect();
        if span_basis(&vecs)?.len() != generators.len() {
            return Err(Error::invalid("generators are not independent"));
        }
        Ok(StabilizerGroup { n, generators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// `log₂ |G|`.
    pub fn size_exponent(&self) -> usize {
        self.generators.len()
    }

    /// Non-stabilizerness `t = n - log₂|G|`.
    pub fn t(&self) -> usize {
        self.n - self.generators.len()
    }

    /// Phaseless symplectic vectors of all group elements.
    pub fn support(&self) -> Vec<BinVec> {
        let vecs: Vec<BinVec> = self.generators.iter().map(PauliString::symplectic).collect();
        enumerate_span(&vecs, 2 * self.n)
    }

    /// Every signed group element.
    pub fn elements(&self) -> Vec<PauliString> {
        let mut out = vec![PauliString::identity(self.n)];
        for g in &self.generators {
            let more: Vec<PauliString> = out.iter().map(|e| e.mul(g).expect("same n")).collect();
            out.extend(more);
        }
        out
    }

    /// Checks `⟨ψ|g|ψ⟩ = +1` for every generator.
    pub fn stabilizes(&self, psi: &StateVector) -> Result<bool> {
        for g in &self.generators {
            if (psi.expectation(g)? - 1.0).abs() > MEMBERSHIP_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// All Paulis with `|⟨ψ|P|ψ⟩| = 1`, as a group with signs chosen so that
/// each generator has expectation `+1`. Scans the full `4^n` table (`n ≤ 8`).
pub fn stabilizer_group_of(psi: &StateVector) -> Result<StabilizerGroup> {
    let n = psi.n();
    let table = pauli_expectations(psi)?;
    let members: Vec<(usize, f64)> = table
        .iter()
        .enumerate()
        .filter(|(_, e)| (e.abs() - 1.0).abs() <= MEMBERSHIP_TOL)
        .map(|(i, &e)| (i, e))
        .collect();
    if !members.len().is_power_of_two() {
        return Err(Error::NotStabilized(format!(
            "{} Paulis have unit expectation, not a power of two",
            members.len()
        )));
    }
    let vecs: Vec<BinVec> = members
        .iter()
        .map(|&(i, _)| pauli_from_index(n, i).symplectic())
        .collect();
    let basis = span_basis(&vecs)?;
    if 1usize << basis.len() != members.len() {
        return Err(Error::NotStabilized(
            "unit-expectation Paulis are not closed under multiplication".into(),
        ));
    }
    let generators = basis
        .iter()
        .map(|b| {
            let p = PauliString::from_symplectic(b)?;
            let e = psi.expectation(&p)?;
            Ok(if e < 0.0 { p.negate() } else { p })
        })
        .collect::<Result<Vec<_>>>()?;
    StabilizerGroup::new(n, generators)
}

/// True when `ψ` is stabilized by at least `2^{n-t}` Paulis.
pub fn is_t_compressible(psi: &StateVector, t: usize) -> Result<bool> {
    let g = stabilizer_group_of(psi)?;
    Ok(g.size_exponent() + t >= psi.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::random_clifford;
    use crate::dense::haar_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_state_group_is_all_z_strings() {
        let g = stabilizer_group_of(&StateVector::zero_state(3).unwrap()).unwrap();
        assert_eq!(g.size_exponent(), 3);
        let els = g.elements();
        assert_eq!(els.len(), 8);
        assert!(els.iter().all(|p| p.x().is_zero() && !p.is_negative()));
    }

    #[test]
    fn clifford_orbit_of_zero_has_full_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=5 {
            for _ in 0..4 {
                let c = random_clifford(n, &mut rng).unwrap();
                let psi = StateVector::zero_state(n).unwrap().apply(&c.to_matrix().unwrap()).unwrap();
                let g = stabilizer_group_of(&psi).unwrap();
                assert_eq!(g.size_exponent(), n);
                assert!(g.stabilizes(&psi).unwrap());
                for e in g.elements() {
                    assert!((psi.expectation(&e).unwrap() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn haar_state_has_trivial_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let g = stabilizer_group_of(&haar_state(4, &mut rng).unwrap()).unwrap();
            assert_eq!(g.size_exponent(), 0);
        }
    }

    #[test]
    fn factorized_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = haar_state(1, &mut rng).unwrap();
        let psi = phi.tensor(&StateVector::zero_state(3).unwrap()).unwrap();
        let g = stabilizer_group_of(&psi).unwrap();
        assert_eq!(g.elements().len(), 8);
        assert_eq!(g.t(), 1);
        assert!(is_t_compressible(&psi, 1).unwrap());
        assert!(!is_t_compressible(&psi, 0).unwrap());
    }

    #[test]
    fn rejects_anticommuting_generators() {
        let gens = vec!["XI".parse().unwrap(), "ZI".parse().unwrap()];
        assert!(StabilizerGroup::new(2, gens).is_err());
        let dep = vec!["ZI".parse().unwrap(), "-ZI".parse().unwrap()];
        assert!(StabilizerGroup::new(2, dep).is_err());
    }
}
