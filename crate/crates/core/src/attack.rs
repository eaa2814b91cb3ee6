//! Compressible states, magic compression and the Bell-difference
//! distinguisher that separates low-magic sources from Haar states.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{random_clifford, CliffordOp};
use crate::dense::{haar_state, kron_vec, BellDifferenceSampler, BellPath, StateVector};
use crate::error::{Error, Result};
use crate::f2::{span_basis, span_intersect, symplectic_complement, symplectic_product, BinVec};
use crate::pauli::PauliString;
use crate::stabilizer::{StabilizerGroup, MEMBERSHIP_TOL};
use crate::stats::{fork_seed, par_chunks, Estimate};
use crate::C64;

/// Largest register the attack tooling simulates.
pub const ATTACK_QUBIT_LIMIT: usize = 8;

fn check_register(n: usize, t: usize) -> Result<()> {
    if n == 0 || n > ATTACK_QUBIT_LIMIT {
        return Err(Error::invalid(format!("need 1 <= n <= {ATTACK_QUBIT_LIMIT}, got {n}")));
    }
    if t > n {
        return Err(Error::invalid(format!("need t <= n, got t={t}, n={n}")));
    }
    Ok(())
}

/// `C (φ_t ⊗ |0⟩^{n-t})` with `C` a uniform Clifford and `φ_t` a Haar state
/// on the first `t` qubits.
pub fn make_compressible<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> Result<StateVector> {
    check_register(n, t)?;
    let mut zeros = vec![C64::new(0.0, 0.0); 1 << (n - t)];
    zeros[0] = C64::new(1.0, 0.0);
    let amps = if t == 0 {
        zeros
    } else {
        kron_vec(haar_state(t, rng)?.amplitudes(), &zeros)
    };
    let product = StateVector::new(n, amps)?;
    product.apply(&random_clifford(n, rng)?.to_matrix()?)
}

/// Where the distinguisher's copies come from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompressibleSource {
    /// Fresh [`make_compressible`] states.
    Injected { n: usize, t: usize },
    /// Fresh Haar states; equivalent to `Injected` with `t = n`.
    Haar { n: usize },
    /// Uniform draws from a fixed list of states claimed `t`-compressible.
    States {
        n: usize,
        t: usize,
        #[serde(skip)]
        states: Vec<StateVector>,
    },
}

impl CompressibleSource {
    pub fn injected(n: usize, t: usize) -> Result<Self> {
        check_register(n, t)?;
        Ok(CompressibleSource::Injected { n, t })
    }

    pub fn haar(n: usize) -> Result<Self> {
        check_register(n, n)?;
        Ok(CompressibleSource::Haar { n })
    }

    /// A list source; `t` is the largest compression parameter found among
    /// the states.
    pub fn from_states(states: Vec<StateVector>) -> Result<Self> {
        let n = states.first().ok_or_else(|| Error::invalid("empty state list"))?.n();
        check_register(n, 0)?;
        let mut t = 0;
        for s in &states {
            if s.n() != n {
                return Err(Error::LengthMismatch { expected: n, got: s.n() });
            }
            t = t.max(n - crate::stabilizer::stabilizer_group_of(s)?.size_exponent());
        }
        Ok(CompressibleSource::States { n, t, states })
    }

    pub fn n(&self) -> usize {
        match self {
            CompressibleSource::Injected { n, .. }
            | CompressibleSource::Haar { n }
            | CompressibleSource::States { n, .. } => *n,
        }
    }

    pub fn t(&self) -> usize {
        match self {
            CompressibleSource::Injected { t, .. } | CompressibleSource::States { t, .. } => *t,
            CompressibleSource::Haar { n } => *n,
        }
    }

    pub fn emit<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StateVector> {
        match self {
            CompressibleSource::Injected { n, t } => make_compressible(*n, *t, rng),
            CompressibleSource::Haar { n } => haar_state(*n, rng),
            CompressibleSource::States { states, .. } => Ok(states[rng.random_range(0..states.len())].clone()),
        }
    }
}

/// Sign-corrects generators so each has expectation `+1` on `psi`.
fn signed_generators(psi: &StateVector, group: &StabilizerGroup) -> Result<Vec<PauliString>> {
    if group.n() != psi.n() {
        return Err(Error::LengthMismatch {
            expected: psi.n(),
            got: group.n(),
        });
    }
    group
        .generators()
        .iter()
        .map(|g| {
            let e = psi.expectation(g)?;
            if (e.abs() - 1.0).abs() > MEMBERSHIP_TOL {
                return Err(Error::NotStabilized(format!("{g} has expectation {e:.3e}")));
            }
            Ok(if e < 0.0 { g.negate() } else { g.clone() })
        })
        .collect()
}

fn sp(u: &BinVec, v: &BinVec) -> bool {
    symplectic_product(u, v).expect("equal even lengths")
}

/// Splits a basis of a symplectic subspace into hyperbolic pairs.
fn hyperbolic_pairs(mut pool: Vec<BinVec>) -> Result<Vec<(BinVec, BinVec)>> {
    let mut pairs = Vec::new();
    while let Some(a) = pool.pop() {
        let j = pool
            .iter()
            .position(|b| sp(&a, b))
            .ok_or_else(|| Error::consistency("complement is not symplectic"))?;
        let b = pool.swap_remove(j);
        for u in pool.iter_mut() {
            let ua = sp(u, &a);
            let ub = sp(u, &b);
            if ub {
                u.xor_assign(&a);
            }
            if ua {
                u.xor_assign(&b);
            }
        }
        pairs.push((a, b));
    }
    Ok(pairs)
}

/// A Clifford `C` with `C g_i C† = Z_{t+i}` for the (sign-corrected)
/// generators, so `Cψ = φ ⊗ |0⟩^{n-t}`.
pub fn compress(psi: &StateVector, group: &StabilizerGroup) -> Result<CliffordOp> {
    let n = psi.n();
    let gens = signed_generators(psi, group)?;
    let r = gens.len();
    let t = n - r;
    let gv: Vec<BinVec> = gens.iter().map(PauliString::symplectic).collect();

    // partners h_i with ⟨h_i, g_j⟩ = δ_ij
    let mut hv = Vec::with_capacity(r);
    for i in 0..r {
        let others: Vec<BinVec> = (0..r).filter(|&j| j != i).map(|j| gv[j].clone()).collect();
        // g_i lies outside span(others), so some complement vector pairs with it
        let h = symplectic_complement(&others, n)?
            .into_iter()
            .find(|v| sp(v, &gv[i]))
            .ok_or_else(|| Error::consistency("generators are dependent"))?;
        hv.push(h);
    }
    for i in 0..r {
        for j in i + 1..r {
            if sp(&hv[i], &hv[j]) {
                let gi = gv[i].clone();
                hv[j].xor_assign(&gi);
            }
        }
    }

    let mut fixed: Vec<BinVec> = gv.clone();
    fixed.extend(hv.iter().cloned());
    let pairs = if t == 0 {
        Vec::new()
    } else {
        hyperbolic_pairs(span_basis(&symplectic_complement(&fixed, n)?)?)?
    };
    if pairs.len() != t {
        return Err(Error::consistency(format!("expected {t} free pairs, found {}", pairs.len())));
    }

    let herm = |v: &BinVec| PauliString::from_symplectic(v);
    let mut xs = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    for (a, b) in &pairs {
        xs.push(herm(a)?);
        zs.push(herm(b)?);
    }
    for i in 0..r {
        xs.push(herm(&hv[i])?);
        zs.push(gens[i].clone());
    }
    xs.extend(zs);
    Ok(CliffordOp::from_images(&xs)?.inverse())
}

/// Distinguisher settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOptions {
    /// Bell-difference samples per trial.
    pub l: usize,
    /// Decision threshold; used by the thresholded statistic only.
    pub epsilon_t: f64,
    /// Report `1[stat ≥ ε_T]` instead of the raw value.
    pub thresholded: bool,
    /// Estimate `tr²(Pψ)` from this many `P⊗P` shots instead of exactly.
    pub shots: Option<usize>,
    pub path: BellPath,
}

impl AttackOptions {
    pub fn new(l: usize) -> Self {
        AttackOptions {
            l,
            epsilon_t: 0.5,
            thresholded: false,
            shots: None,
            path: BellPath::Measurement,
        }
    }

    /// Copies of the state consumed per trial.
    pub fn copies(&self) -> usize {
        4 * self.l + 2 * self.shots.unwrap_or(1)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Dimension of `span(X) ∩ X^⊥`.
    pub s_dim: usize,
    /// Selected Pauli, or `None` when the subspace is trivial.
    pub pauli: Option<String>,
    pub statistic: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttackReport {
    pub n: usize,
    pub source_t: usize,
    pub trials: usize,
    pub options: AttackOptions,
    pub copies: usize,
    pub records: Vec<TrialRecord>,
    pub mean: f64,
    pub stderr: f64,
    pub nontrivial_fraction: f64,
}

impl AttackReport {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.mean,
            stderr: self.stderr,
        }
    }
}

fn one_trial<R: Rng + ?Sized>(
    source: &CompressibleSource,
    opts: &AttackOptions,
    rng: &mut R,
) -> Result<TrialRecord> {
    let n = source.n();
    let psi = source.emit(rng)?;
    let sampler = BellDifferenceSampler::new(&psi, opts.path)?;
    let xs: Vec<BinVec> = (0..opts.l).map(|_| sampler.sample(rng).symplectic()).collect();
    let span = span_basis(&xs)?;
    let perp = symplectic_complement(&xs, n)?;
    let s = span_intersect(&span, &perp)?;
    if s.is_empty() {
        return Ok(TrialRecord {
            trial: 0,
            s_dim: 0,
            pauli: None,
            statistic: 0.0,
        });
    }
    let mask = rng.random_range(1u64..1u64 << s.len());
    let mut v = BinVec::zeros(2 * n);
    for (i, b) in s.iter().enumerate() {
        if mask >> i & 1 == 1 {
            v.xor_assign(b);
        }
    }
    let p = PauliString::from_symplectic(&v)?;
    let e = psi.expectation(&p)?;
    let exact = (e * e).min(1.0);
    let raw = match opts.shots {
        None => exact,
        Some(m) => {
            // P⊗P on two copies returns +1 with probability (1 + tr²)/2
            let plus = (0..m).filter(|_| rng.random_bool(((1.0 + exact) / 2.0).clamp(0.0, 1.0))).count();
            ((2.0 * plus as f64 - m as f64) / m as f64).clamp(0.0, 1.0)
        }
    };
    let statistic = if opts.thresholded {
        f64::from(u8::from(raw >= opts.epsilon_t))
    } else {
        raw
    };
    Ok(TrialRecord {
        trial: 0,
        s_dim: s.len(),
        pauli: Some(p.to_string()),
        statistic,
    })
}

/// Runs the Bell-difference distinguisher for `trials` independent trials.
pub fn distinguish<R: Rng + ?Sized>(
    source: &CompressibleSource,
    opts: AttackOptions,
    trials: usize,
    rng: &mut R,
) -> Result<AttackReport> {
    if opts.l == 0 {
        return Err(Error::invalid("need l >= 1"));
    }
    if opts.l >= 64 {
        return Err(Error::invalid("need l < 64"));
    }
    if opts.shots == Some(0) {
        return Err(Error::invalid("need at least one shot"));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let seed = fork_seed(rng);
    let mut records = par_chunks(seed, trials, 1, |r, _| one_trial(source, &opts, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    for (i, rec) in records.iter_mut().enumerate() {
        rec.trial = i;
    }
    let stats: Vec<f64> = records.iter().map(|r| r.statistic).collect();
    let est = Estimate::from_samples(&stats);
    let nontrivial = records.iter().filter(|r| r.s_dim > 0).count() as f64 / trials as f64;
    Ok(AttackReport {
        n: source.n(),
        source_t: source.t(),
        trials,
        options: opts,
        copies: opts.copies(),
        records,
        mean: est.value,
        stderr: if trials > 1 { est.stderr } else { f64::INFINITY },
        nontrivial_fraction: nontrivial,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdvantageRow {
    pub t: usize,
    pub l: usize,
    pub copies: usize,
    pub compressible_mean: Estimate,
    pub haar_mean: Estimate,
    pub advantage: Estimate,
    pub nontrivial_fraction: f64,
    /// `n ≥ t + 2`, the regime where the lower bound is guaranteed.
    pub guaranteed: bool,
}

/// Samples per trial `l = 3t + 2`, i.e. `12t + 10` copies in total.
pub fn samples_for(t: usize) -> usize {
    3 * t + 2
}

/// Advantage of the distinguisher against `t`-compressible sources over
/// Haar states, one row per `t`.
pub fn advantage_curve<R: Rng + ?Sized>(
    ts: &[usize],
    n: usize,
    trials: usize,
    base: AttackOptions,
    rng: &mut R,
) -> Result<Vec<AdvantageRow>> {
    let haar = CompressibleSource::haar(n)?;
    ts.iter()
        .map(|&t| {
            let opts = AttackOptions {
                l: samples_for(t),
                ..base
            };
            let src = CompressibleSource::injected(n, t)?;
            let a = distinguish(&src, opts, trials, rng)?;
            let b = distinguish(&haar, opts, trials, rng)?;
            let (ea, eb) = (a.estimate(), b.estimate());
            Ok(AdvantageRow {
                t,
                l: opts.l,
                copies: opts.copies(),
                compressible_mean: ea,
                haar_mean: eb,
                advantage: Estimate {
                    value: ea.value - eb.value,
                    stderr: (ea.stderr.powi(2) + eb.stderr.powi(2)).sqrt(),
                },
                nontrivial_fraction: a.nontrivial_fraction,
                guaranteed: n >= t + 2,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::stabilizer_group_of;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn compressible_states_have_large_groups() {
        let mut r = rng(0);
        for (n, t) in [(4, 1), (3, 0), (5, 2), (3, 3)] {
            let psi = make_compressible(n, t, &mut r).unwrap();
            let g = stabilizer_group_of(&psi).unwrap();
            assert!(g.size_exponent() >= n - t, "n={n} t={t}");
        }
        assert!(make_compressible(3, 4, &mut r).is_err());
    }

    #[test]
    fn compression_zeroes_trailing_qubits() {
        let mut r = rng(1);
        for (n, t) in [(1, 0), (3, 0), (4, 1), (5, 2), (6, 2), (2, 2)] {
            let psi = make_compressible(n, t, &mut r).unwrap();
            let g = stabilizer_group_of(&psi).unwrap();
            let c = compress(&psi, &g).unwrap();
            let out = psi.apply(&c.to_matrix().unwrap()).unwrap();
            let tail: Vec<usize> = (t..n).collect();
            assert!(out.prob_zero_on(&tail) >= 1.0 - 1e-9, "n={n} t={t}");
            let after = stabilizer_group_of(&out).unwrap();
            for q in t..n {
                let z = PauliString::single(n, q, 'Z').unwrap();
                assert!((out.expectation(&z).unwrap() - 1.0).abs() < 1e-9);
                assert!(after.elements().iter().any(|p| p.symplectic() == z.symplectic()));
            }
        }
    }

    #[test]
    fn stabilizer_state_compresses_to_zero() {
        let psi = make_compressible(3, 0, &mut rng(2)).unwrap();
        let c = compress(&psi, &stabilizer_group_of(&psi).unwrap()).unwrap();
        let out = psi.apply(&c.to_matrix().unwrap()).unwrap();
        assert!((out.amplitudes()[0].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn compress_accepts_negated_generators_and_rejects_foreign_ones() {
        let psi = make_compressible(3, 1, &mut rng(3)).unwrap();
        let g = stabilizer_group_of(&psi).unwrap();
        let neg = StabilizerGroup::new(3, g.generators().iter().map(PauliString::negate).collect()).unwrap();
        let out = psi.apply(&compress(&psi, &neg).unwrap().to_matrix().unwrap()).unwrap();
        assert!(out.prob_zero_on(&[1, 2]) >= 1.0 - 1e-9);
        let zero = StateVector::zero_state(3).unwrap();
        assert!(compress(&zero, &g).is_err() || g.stabilizes(&zero).unwrap());
    }

    #[test]
    fn stabilizer_samples_stay_in_the_group() {
        let mut r = rng(4);
        let psi = make_compressible(4, 0, &mut r).unwrap();
        let g = stabilizer_group_of(&psi).unwrap();
        let support: Vec<BinVec> = g.elements().iter().map(PauliString::symplectic).collect();
        let sampler = BellDifferenceSampler::new(&psi, BellPath::Measurement).unwrap();
        for _ in 0..200 {
            let p = sampler.sample(&mut r).symplectic();
            assert!(support.contains(&p));
        }
    }

    #[test]
    fn product_state_samples_factor_independently() {
        let mut r = rng(5);
        let phi = haar_state(2, &mut r).unwrap();
        let mut zeros = vec![C64::new(0.0, 0.0); 4];
        zeros[0] = C64::new(1.0, 0.0);
        let psi = StateVector::new(4, kron_vec(phi.amplitudes(), &zeros)).unwrap();
        let sampler = BellDifferenceSampler::new(&psi, BellPath::Table).unwrap();
        let draws = 20_000;
        let mut joint = vec![vec![0f64; 4]; 16];
        for _ in 0..draws {
            let p = sampler.sample(&mut r);
            let (x, z) = p.masks();
            // the trailing two qubits carry only Z-type factors
            assert_eq!(x & 0b11, 0);
            let head = ((x >> 2) << 2 | (z >> 2)) as usize;
            joint[head][(z & 0b11) as usize] += 1.0;
        }
        let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..4).map(|c| joint.iter().map(|r| r[c]).sum()).collect();
        let mut chi2 = 0.0;
        let mut dof = 0;
        for (i, row) in joint.iter().enumerate() {
            for (c, &obs) in row.iter().enumerate() {
                let exp = rows[i] * cols[c] / draws as f64;
                if exp > 5.0 {
                    chi2 += (obs - exp).powi(2) / exp;
                    dof += 1;
                }
            }
        }
        // generous cut: mean dof, sd √(2 dof)
        assert!(chi2 < dof as f64 + 6.0 * (2.0 * dof as f64).sqrt(), "chi2={chi2} dof={dof}");
    }

    #[test]
    fn stabilizer_source_scores_one() {
        let src = CompressibleSource::injected(6, 0).unwrap();
        let rep = distinguish(&src, AttackOptions::new(2), 50, &mut rng(6)).unwrap();
        for rec in &rep.records {
            if rec.s_dim > 0 {
                assert!((rec.statistic - 1.0).abs() < 1e-9);
            }
            assert!((0.0..=1.0).contains(&rec.statistic));
        }
        assert_eq!(rep.copies, 10);
    }

    #[test]
    fn haar_source_scores_low() {
        let rep = distinguish(&CompressibleSource::haar(6).unwrap(), AttackOptions::new(2), 100, &mut rng(7)).unwrap();
        assert!(rep.mean <= 0.05, "{}", rep.mean);
    }

    #[test]
    fn distinguish_is_reproducible() {
        let src = CompressibleSource::injected(4, 1).unwrap();
        let a = distinguish(&src, AttackOptions::new(5), 20, &mut rng(8)).unwrap();
        let b = distinguish(&src, AttackOptions::new(5), 20, &mut rng(8)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn thresholded_and_shot_noise_stay_in_unit_interval() {
        let src = CompressibleSource::injected(4, 1).unwrap();
        let mut opts = AttackOptions::new(5);
        opts.thresholded = true;
        opts.shots = Some(3);
        let rep = distinguish(&src, opts, 30, &mut rng(9)).unwrap();
        assert!(rep.records.iter().all(|r| r.statistic == 0.0 || r.statistic == 1.0));
        assert_eq!(rep.copies, 4 * 5 + 6);
    }

    #[test]
    fn nontrivial_subspace_probability_bound() {
        let (n, t) = (5, 1);
        let l = samples_for(t);
        let rep = distinguish(&CompressibleSource::injected(n, t).unwrap(), AttackOptions::new(l), 300, &mut rng(10)).unwrap();
        let bound = 1.0 - 2f64.powi(-((n - t) as i32)) - 4f64.powi(t as i32) * 0.625f64.powi(l as i32);
        let p = rep.nontrivial_fraction;
        let se = (p * (1.0 - p) / 300.0).sqrt().max(1.0 / 300.0);
        assert!(p >= bound - 3.0 * se, "p={p} bound={bound}");
    }

    #[test]
    fn haar_subspace_is_trivial_for_many_samples() {
        // S is nontrivial exactly when the samples fail to span F₂^{2n}, which
        // for near-uniform samples happens with probability about 2^{2n-l}
        let n = 6;
        let src = CompressibleSource::haar(n).unwrap();
        let rep = distinguish(&src, AttackOptions::new(2 * n + 8), 200, &mut rng(11)).unwrap();
        assert!(rep.nontrivial_fraction < 0.05, "{}", rep.nontrivial_fraction);
    }

    #[test]
    fn source_from_states_reports_compression() {
        let mut r = rng(12);
        let states = vec![make_compressible(3, 1, &mut r).unwrap(), make_compressible(3, 0, &mut r).unwrap()];
        let src = CompressibleSource::from_states(states).unwrap();
        assert_eq!(src.t(), 1);
        assert_eq!(src.n(), 3);
    }
}
