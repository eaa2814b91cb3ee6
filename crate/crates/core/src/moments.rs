//! Moment-channel distances and the decay-in-`t` experiment.
//!
//! Distances are half trace norms between Choi states. The diamond distance
//! is sandwiched between this quantity and `d^k` times it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::trace_norm_hermitian;
use crate::ensembles::{adaptive_state, choi_batches, exact_moment_choi, outer_product_batches, outer_product_exact, EnsembleSpec};
use crate::error::{Error, Result};
use crate::stats::{fork_seed, substream, Estimate};
use crate::{CMat, C64};

/// Relation between the reported proxy and the diamond distance.
pub const PROXY_NOTE: &str =
    "half trace norm of Choi states; diamond distance lies between this value and d^k times it";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    /// Independent sample batches per ensemble.
    pub batches: usize,
    /// Bootstrap replicates over those batches.
    pub replicates: usize,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            batches: 16,
            replicates: 64,
        }
    }
}

/// An averaged operator known exactly or as batch sums.
enum Averaged {
    Exact(CMat),
    Batches(Vec<(CMat, usize)>),
}

impl Averaged {
    fn mean(&self) -> CMat {
        match self {
            Averaged::Exact(m) => m.clone(),
            Averaged::Batches(b) => {
                let n: usize = b.iter().map(|x| x.1).sum();
                let dim = b[0].0.nrows();
                b.iter().fold(CMat::zeros(dim, dim), |a, (s, _)| a + s) / C64::new(n as f64, 0.0)
            }
        }
    }

    fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        match self {
            Averaged::Exact(m) => m.clone(),
            Averaged::Batches(b) => {
                let dim = b[0].0.nrows();
                let mut acc = CMat::zeros(dim, dim);
                let mut n = 0;
                for _ in 0..b.len() {
                    let (s, c) = &b[rng.random_range(0..b.len())];
                    acc += s;
                    n += c;
                }
                acc / C64::new(n as f64, 0.0)
            }
        }
    }
}

fn half_trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * trace_norm_hermitian(&(a - b))
}

/// Point estimate plus bootstrap standard error of `‖A − B‖₁/2`.
fn bootstrap_distance(a: &Averaged, b: &Averaged, replicates: usize, seed: u64) -> Estimate {
    let value = half_trace_distance(&a.mean(), &b.mean());
    if matches!((a, b), (Averaged::Exact(_), Averaged::Exact(_))) || replicates < 2 {
        return Estimate::exact(value);
    }
    let mut rng = substream(seed, u64::MAX);
    let reps: Vec<f64> = (0..replicates)
        .map(|_| half_trace_distance(&a.resample(&mut rng), &b.resample(&mut rng)))
        .collect();
    Estimate {
        value,
        stderr: Estimate::from_samples(&reps).stderr * (replicates as f64).sqrt(),
    }
}

fn averaged_choi(spec: &EnsembleSpec, k: usize, samples: usize, batches: usize, seed: u64) -> Result<Averaged> {
    if spec.is_finite() {
        return Ok(Averaged::Exact(exact_moment_choi(spec, k)?.expect("finite")));
    }
    Ok(Averaged::Batches(choi_batches(spec, k, samples, batches, seed)?))
}

/// `‖J_A − J_B‖₁/2` for the `k`-th moment Choi states with default
/// bootstrap settings. Finite ensembles enter exactly.
pub fn choi_trace_distance<R: Rng + ?Sized>(
    a: &EnsembleSpec,
    b: &EnsembleSpec,
    k: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    choi_trace_distance_with(a, b, k, samples, BootstrapOptions::default(), rng)
}

pub fn choi_trace_distance_with<R: Rng + ?Sized>(
    a: &EnsembleSpec,
    b: &EnsembleSpec,
    k: usize,
    samples: usize,
    opts: BootstrapOptions,
    rng: &mut R,
) -> Result<Estimate> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!("ensembles act on {} and {} qubits", a.n(), b.n())));
    }
    let ja = averaged_choi(a, k, samples, opts.batches, fork_seed(rng))?;
    let jb = averaged_choi(b, k, samples, opts.batches, fork_seed(rng))?;
    Ok(bootstrap_distance(&ja, &jb, opts.replicates, fork_seed(rng)))
}

/// Upper envelope `47·2^{2k−t}` on the moment distance of the diluted ensemble.
pub fn decay_envelope(k: usize, t: usize) -> f64 {
    47.0 * 2f64.powi(2 * k as i32 - t as i32)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: usize,
    pub distance: f64,
    pub stderr: f64,
    pub envelope: f64,
    pub above_floor: bool,
    pub within_envelope: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayTable {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub options: BootstrapOptions,
    /// Distance of an independent Haar estimate from the exact Haar Choi
    /// state: the finite-sample bias every row carries.
    pub reference_bias: Estimate,
    /// `reference_bias + 3σ`; rows at or below it carry no signal.
    pub floor: f64,
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `log₂ distance` against `t` over the rows
    /// above the floor, when at least two exist.
    pub slope: Option<f64>,
    /// No row above the floor exceeds an earlier such row by more than 3σ.
    pub monotone_above_floor: bool,
    pub proxy_note: String,
}

/// Options for [`decay_experiment`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    pub bootstrap: BootstrapOptions,
}

/// Distance of the diluted ensemble `C₁(U_t ⊗ I)C₂` with Haar `U_t` from
/// the exact Haar moment, for each `t` in `t_list`.
pub fn decay_experiment<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    t_list: &[usize],
    samples: usize,
    rng: &mut R,
) -> Result<DecayTable> {
    decay_experiment_with(n, k, t_list, samples, DecayOptions::default(), rng)
}

pub fn decay_experiment_with<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    t_list: &[usize],
    samples: usize,
    opts: DecayOptions,
    rng: &mut R,
) -> Result<DecayTable> {
    if t_list.is_empty() {
        return Err(Error::invalid("empty t list"));
    }
    let haar = EnsembleSpec::haar(n);
    for &t in t_list {
        EnsembleSpec::homeopathy(n, t, EnsembleSpec::haar(t.max(1))).validate()?;
    }
    let bo = opts.bootstrap;
    let exact = Averaged::Exact(
        exact_moment_choi(&haar, k)?.ok_or_else(|| Error::invalid("no exact Haar moment at this size"))?,
    );
    let reference = averaged_choi(&haar, k, samples, bo.batches, fork_seed(rng))?;
    let reference_bias = bootstrap_distance(&reference, &exact, bo.replicates, fork_seed(rng));
    drop(reference);
    let floor = reference_bias.value + 3.0 * reference_bias.stderr;

    let mut sorted = t_list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for t in sorted {
        let spec = EnsembleSpec::homeopathy(n, t, EnsembleSpec::haar(t));
        let est = averaged_choi(&spec, k, samples, bo.batches, fork_seed(rng))?;
        let d = bootstrap_distance(&est, &exact, bo.replicates, fork_seed(rng));
        let envelope = decay_envelope(k, t);
        rows.push(DecayRow {
            t,
            distance: d.value,
            stderr: d.stderr,
            envelope,
            above_floor: d.value > floor,
            within_envelope: d.value <= envelope + 3.0 * d.stderr,
        });
    }

    let live: Vec<&DecayRow> = rows.iter().filter(|r| r.above_floor).collect();
    let monotone_above_floor = live.iter().enumerate().all(|(i, a)| {
        live[i + 1..]
            .iter()
            .all(|b| b.distance <= a.distance + 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt())
    });
    let slope = (live.len() >= 2).then(|| {
        let pts: Vec<(f64, f64)> = live.iter().map(|r| (r.t as f64, r.distance.log2())).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(DecayTable {
        n,
        k,
        samples,
        options: bo,
        reference_bias,
        floor,
        rows,
        slope,
        monotone_above_floor,
        proxy_note: PROXY_NOTE.into(),
    })
}

fn averaged_adaptive(
    spec: &EnsembleSpec,
    vs: &[CMat],
    ancillas: usize,
    samples: usize,
    batches: usize,
    seed: u64,
) -> Result<Averaged> {
    let dim = 1usize << (spec.n() + ancillas);
    let f = |u: &CMat| adaptive_state(u, vs, ancillas);
    if let Some(m) = outer_product_exact(spec, dim, f)? {
        return Ok(Averaged::Exact(m));
    }
    Ok(Averaged::Batches(outer_product_batches(spec, dim, samples, batches, seed, f)?))
}

/// Trace distance between `E_A Ψ_U(V)` and `E_B Ψ_U(V)` for fixed
/// interleaved operations `V`.
pub fn adaptive_distance<R: Rng + ?Sized>(
    a: &EnsembleSpec,
    b: &EnsembleSpec,
    vs: &[CMat],
    ancillas: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!("ensembles act on {} and {} qubits", a.n(), b.n())));
    }
    if a.n() + ancillas > crate::ensembles::ADAPTIVE_QUBIT_LIMIT {
        return Err(Error::DimensionLimit {
            dim: 1 << (a.n() + ancillas),
            limit: 1 << crate::ensembles::ADAPTIVE_QUBIT_LIMIT,
        });
    }
    if vs.is_empty() {
        return Err(Error::invalid("need at least one interleaved operation"));
    }
    let opts = BootstrapOptions::default();
    let ra = averaged_adaptive(a, vs, ancillas, samples, opts.batches, fork_seed(rng))?;
    let rb = averaged_adaptive(b, vs, ancillas, samples, opts.batches, fork_seed(rng))?;
    Ok(bootstrap_distance(&ra, &rb, opts.replicates, fork_seed(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn finite_self_distance_is_exactly_zero() {
        let s = EnsembleSpec::CliffordEnumerated { n: 1 };
        let d = choi_trace_distance(&s, &s, 3, 1, &mut rng(0)).unwrap();
        assert!(d.value < 1e-12 && d.stderr == 0.0);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = EnsembleSpec::CliffordEnumerated { n: 1 };
        let b = EnsembleSpec::fixed(vec![CMat::identity(2, 2)]);
        let x = choi_trace_distance(&a, &b, 2, 1, &mut rng(1)).unwrap();
        let y = choi_trace_distance(&b, &a, 2, 1, &mut rng(2)).unwrap();
        assert!((x.value - y.value).abs() < 1e-12);
    }

    #[test]
    fn clifford_vs_haar_at_four_copies_is_positive_and_stable() {
        let a = EnsembleSpec::haar(1);
        let b = EnsembleSpec::CliffordEnumerated { n: 1 };
        let exact = 0.5
            * trace_norm_hermitian(
                &(exact_moment_choi(&a, 4).unwrap().unwrap() - exact_moment_choi(&b, 4).unwrap().unwrap()),
            );
        let x = choi_trace_distance(&a, &b, 4, 4000, &mut rng(3)).unwrap();
        let y = choi_trace_distance(&a, &b, 4, 4000, &mut rng(4)).unwrap();
        assert!(x.value > 3.0 * x.stderr && y.value > 3.0 * y.stderr);
        assert!(x.agrees_with(&y, 4.0), "{x} vs {y}");
        assert!(exact > 0.0 && (x.value - exact).abs() < 0.1, "{x} vs {exact}");
    }

    #[test]
    fn full_dilution_matches_haar_within_floor() {
        let haar = EnsembleSpec::haar(2);
        let homeo = EnsembleSpec::homeopathy(2, 2, EnsembleSpec::haar(2));
        let exact = Averaged::Exact(exact_moment_choi(&haar, 2).unwrap().unwrap());
        let opts = BootstrapOptions { batches: 16, replicates: 32 };
        let h = averaged_choi(&haar, 2, 4000, opts.batches, 10).unwrap();
        let e = averaged_choi(&homeo, 2, 4000, opts.batches, 11).unwrap();
        let dh = bootstrap_distance(&h, &exact, opts.replicates, 12);
        let de = bootstrap_distance(&e, &exact, opts.replicates, 13);
        assert!(dh.agrees_with(&de, 4.0), "{dh} vs {de}");
    }

    #[test]
    fn small_decay_table_is_well_formed() {
        let opts = DecayOptions {
            bootstrap: BootstrapOptions { batches: 8, replicates: 16 },
        };
        let table = decay_experiment_with(2, 1, &[2, 1], 2000, opts, &mut rng(5)).unwrap();
        assert_eq!(table.rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![1, 2]);
        assert!(table.rows.iter().all(|r| r.within_envelope));
        // first moments of Clifford-sandwiched ensembles are exact, so nothing rises above the bias floor
        assert!(table.rows.iter().all(|r| !r.above_floor || r.distance < table.floor + 4.0 * r.stderr));
        assert!(decay_experiment(2, 1, &[3], 10, &mut rng(0)).is_err());
    }

    #[test]
    fn decay_is_reproducible() {
        let opts = DecayOptions {
            bootstrap: BootstrapOptions { batches: 4, replicates: 4 },
        };
        let a = decay_experiment_with(2, 1, &[1, 2], 200, opts, &mut rng(6)).unwrap();
        let b = decay_experiment_with(2, 1, &[1, 2], 200, opts, &mut rng(6)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn adaptive_identity_reduces_to_first_moment() {
        let fixed = EnsembleSpec::fixed(vec![haar_unitary(2, &mut rng(7)).unwrap()]);
        let vs = vec![CMat::identity(2, 2)];
        let d = adaptive_distance(&fixed, &EnsembleSpec::CliffordEnumerated { n: 1 }, &vs, 0, 1, &mut rng(8)).unwrap();
        // U|0⟩ is pure, the Clifford average is I/2
        assert!((d.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn adaptive_full_dilution_matches_haar() {
        let mut r = rng(9);
        let vs: Vec<CMat> = (0..2).map(|_| haar_unitary(8, &mut r).unwrap()).collect();
        let a = EnsembleSpec::haar(2);
        let b = EnsembleSpec::homeopathy(2, 2, EnsembleSpec::haar(2));
        let d = adaptive_distance(&a, &b, &vs, 1, 4000, &mut r).unwrap();
        let d0 = adaptive_distance(&a, &a, &vs, 1, 4000, &mut r).unwrap();
        assert!(d.agrees_with(&d0, 4.0), "{d} vs {d0}");
    }
}
