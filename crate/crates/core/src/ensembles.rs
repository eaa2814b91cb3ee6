//! Declarative unitary ensembles and their samplers.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clifford::{enumerate_clifford_group, random_clifford};
use crate::commutant::haar::haar_choi;
use crate::dense::{haar_unitary, is_unitary, kron, kron_power, CHOI_DIM_LIMIT, OPERATOR_DIM_LIMIT};
use crate::error::{Error, Result};
use crate::stats::{fork_seed, par_chunks, Estimate};
use crate::{CMat, C64};

/// Largest register a spec may describe (dense `2^n × 2^n` sampling).
pub const MAX_ENSEMBLE_QUBITS: usize = 8;

/// A finite list of dense unitaries, serialized as rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryList(pub Vec<CMat>);

impl Serialize for UnitaryList {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<Vec<Vec<[f64; 2]>>> = self
            .0
            .iter()
            .map(|u| {
                (0..u.nrows())
                    .map(|r| (0..u.ncols()).map(|c| [u[(r, c)].re, u[(r, c)].im]).collect())
                    .collect()
            })
            .collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<Vec<[f64; 2]>>> = Vec::deserialize(d)?;
        let mut out = Vec::with_capacity(raw.len());
        for m in raw {
            let rows = m.len();
            if m.iter().any(|r| r.len() != rows) {
                return Err(serde::de::Error::custom("unitary must be square"));
            }
            out.push(DMatrix::from_fn(rows, rows, |r, c| C64::new(m[r][c][0], m[r][c][1])));
        }
        Ok(UnitaryList(out))
    }
}

/// A unitary distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    Haar { n: usize },
    CliffordUniform { n: usize },
    /// Uniform over the exhaustively listed Clifford group (`n ≤ 2`).
    CliffordEnumerated { n: usize },
    /// `C₁ (U_t ⊗ I_{n-t}) C₂` with uniform Cliffords and `U_t` from `inner`.
    Homeopathy { n: usize, t: usize, inner: Box<EnsembleSpec> },
    /// Uniform over an explicit list.
    FixedList { unitaries: UnitaryList },
}

fn dense_clifford_group(n: usize) -> Result<&'static [CMat]> {
    static ONE: OnceLock<Vec<CMat>> = OnceLock::new();
    static TWO: OnceLock<Vec<CMat>> = OnceLock::new();
    let cell = match n {
        1 => &ONE,
        2 => &TWO,
        _ => return Err(Error::invalid(format!("enumerated Clifford group needs n in 1..=2, got {n}"))),
    };
    if let Some(g) = cell.get() {
        return Ok(g);
    }
    let g = enumerate_clifford_group(n)?
        .iter()
        .map(|c| c.to_matrix())
        .collect::<Result<Vec<_>>>()?;
    Ok(cell.get_or_init(|| g))
}

/// The enumerated `n`-qubit Clifford group as dense unitaries (`n ≤ 2`).
pub fn clifford_group_matrices(n: usize) -> Result<&'static [CMat]> {
    dense_clifford_group(n)
}

impl EnsembleSpec {
    pub fn haar(n: usize) -> Self {
        EnsembleSpec::Haar { n }
    }

    pub fn clifford(n: usize) -> Self {
        EnsembleSpec::CliffordUniform { n }
    }

    pub fn homeopathy(n: usize, t: usize, inner: EnsembleSpec) -> Self {
        EnsembleSpec::Homeopathy {
            n,
            t,
            inner: Box::new(inner),
        }
    }

    pub fn fixed(unitaries: Vec<CMat>) -> Self {
        EnsembleSpec::FixedList {
            unitaries: UnitaryList(unitaries),
        }
    }

    /// Identity on `n` qubits as a one-element list.
    pub fn identity(n: usize) -> Self {
        EnsembleSpec::fixed(vec![CMat::identity(1 << n, 1 << n)])
    }

    pub fn n(&self) -> usize {
        match self {
            EnsembleSpec::Haar { n }
            | EnsembleSpec::CliffordUniform { n }
            | EnsembleSpec::CliffordEnumerated { n }
            | EnsembleSpec::Homeopathy { n, .. } => *n,
            EnsembleSpec::FixedList { unitaries } => unitaries
                .0
                .first()
                .map_or(0, |u| u.nrows().trailing_zeros() as usize),
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::Haar { n } | EnsembleSpec::CliffordUniform { n } => check_n(*n),
            EnsembleSpec::CliffordEnumerated { n } => {
                if !(1..=2).contains(n) {
                    return Err(Error::invalid(format!("clifford-enum needs n in 1..=2, got {n}")));
                }
                Ok(())
            }
            EnsembleSpec::Homeopathy { n, t, inner } => {
                check_n(*n)?;
                if *t == 0 || t > n {
                    return Err(Error::invalid(format!("homeopathy needs 1 <= t <= n, got t={t}, n={n}")));
                }
                inner.validate()?;
                if inner.n() != *t {
                    return Err(Error::invalid(format!(
                        "inner ensemble acts on {} qubits, expected t={t}",
                        inner.n()
                    )));
                }
                Ok(())
            }
            EnsembleSpec::FixedList { unitaries } => {
                let first = unitaries
                    .0
                    .first()
                    .ok_or_else(|| Error::invalid("fixed list is empty"))?;
                let d = first.nrows();
                if !d.is_power_of_two() || d > OPERATOR_DIM_LIMIT {
                    return Err(Error::invalid(format!("fixed unitaries must be 2^n x 2^n, got {d}")));
                }
                for u in &unitaries.0 {
                    if u.nrows() != d || !is_unitary(u, 1e-10) {
                        return Err(Error::invalid("fixed list entry is not a unitary of the common size"));
                    }
                }
                Ok(())
            }
        }
    }

    /// One dense unitary from the distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CMat> {
        match self {
            EnsembleSpec::Haar { n } => haar_unitary(1 << n, rng),
            EnsembleSpec::CliffordUniform { n } => random_clifford(*n, rng)?.to_matrix(),
            EnsembleSpec::CliffordEnumerated { n } => {
                let g = dense_clifford_group(*n)?;
                Ok(g[rng.random_range(0..g.len())].clone())
            }
            EnsembleSpec::Homeopathy { n, t, inner } => {
                let c2 = random_clifford(*n, rng)?.to_matrix()?;
                let ut = inner.sample(rng)?;
                let c1 = random_clifford(*n, rng)?.to_matrix()?;
                let pad = CMat::identity(1 << (n - t), 1 << (n - t));
                Ok(c1 * kron(&ut, &pad) * c2)
            }
            EnsembleSpec::FixedList { unitaries } => {
                let list = &unitaries.0;
                Ok(list[rng.random_range(0..list.len())].clone())
            }
        }
    }

    /// All elements with equal weight, for finite ensembles.
    pub fn exact_elements(&self) -> Option<Vec<CMat>> {
        match self {
            EnsembleSpec::CliffordEnumerated { n } => dense_clifford_group(*n).ok().map(<[CMat]>::to_vec),
            EnsembleSpec::FixedList { unitaries } => Some(unitaries.0.clone()),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, EnsembleSpec::CliffordEnumerated { .. } | EnsembleSpec::FixedList { .. })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ENSEMBLE_QUBITS {
        return Err(Error::invalid(format!("ensemble needs 1 <= n <= {MAX_ENSEMBLE_QUBITS}, got {n}")));
    }
    Ok(())
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSpec::Haar { n } => write!(f, "haar:{n}"),
            EnsembleSpec::CliffordUniform { n } => write!(f, "clifford:{n}"),
            EnsembleSpec::CliffordEnumerated { n } => write!(f, "clifford-enum:{n}"),
            EnsembleSpec::Homeopathy { n, t, inner } => {
                let kind = inner.to_string();
                let short = kind.split(':').next().unwrap_or("");
                if inner.n() == *t && matches!(**inner, EnsembleSpec::Haar { .. } | EnsembleSpec::CliffordUniform { .. } | EnsembleSpec::CliffordEnumerated { .. }) {
                    write!(f, "homeopathy:{n}:{t}:{short}")
                } else {
                    write!(f, "homeopathy:{n}:{t}:({kind})")
                }
            }
            EnsembleSpec::FixedList { unitaries } => {
                write!(f, "fixed:{}x{}", unitaries.0.len(), self.dim())
            }
        }
    }
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad {what} {s:?}")))
}

impl FromStr for EnsembleSpec {
    type Err = Error;

    /// Accepts a JSON spec tree or the shorthands `haar:N`, `clifford:N`,
    /// `clifford-enum:N`, `identity:N` and `homeopathy:N:T:INNER` where
    /// `INNER` is `haar`, `clifford`, `clifford-enum` or `identity` on `T`
    /// qubits.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = if s.starts_with('{') {
            serde_json::from_str(s)?
        } else {
            let parts: Vec<&str> = s.split(':').collect();
            let kind = |name: &str, n: usize| -> Result<EnsembleSpec> {
                Ok(match name {
                    "haar" => EnsembleSpec::haar(n),
                    "clifford" => EnsembleSpec::clifford(n),
                    "clifford-enum" => EnsembleSpec::CliffordEnumerated { n },
                    "identity" => EnsembleSpec::identity(n),
                    other => return Err(Error::invalid(format!("unknown ensemble kind {other:?}"))),
                })
            };
            match parts.as_slice() {
                ["homeopathy", n, t, inner] => {
                    let t = parse_usize(t, "t")?;
                    EnsembleSpec::homeopathy(parse_usize(n, "n")?, t, kind(inner, t)?)
                }
                [name, n] => {
                    let n = parse_usize(n, "n")?;
                    check_n(n)?;
                    kind(name, n)?
                }
                _ => return Err(Error::invalid(format!("cannot parse ensemble {s:?}"))),
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `E |tr(U†V)|^{2k}` with `U` and `V` from two independent streams.
pub fn frame_potential<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    k: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    spec.validate()?;
    if samples < 2 {
        return Err(Error::invalid("frame potential needs at least 2 samples"));
    }
    let seed = fork_seed(rng);
    let chunks = par_chunks(seed, samples, 4096, |r, len| -> Result<Vec<f64>> {
        let mut a = crate::stats::substream(seed ^ 0x5a5a_5a5a, r.random());
        let mut b = crate::stats::substream(seed ^ 0xa5a5_a5a5, r.random());
        (0..len)
            .map(|_| {
                let u = spec.sample(&mut a)?;
                let v = spec.sample(&mut b)?;
                let tr: C64 = u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                Ok(tr.norm_sqr().powi(k as i32))
            })
            .collect()
    });
    let mut xs = Vec::with_capacity(samples);
    for c in chunks {
        xs.extend(c?);
    }
    Ok(Estimate::from_samples(&xs))
}

/// Exact frame potential of a finite ensemble (a group is detected by the
/// single-sum shortcut only for the enumerated Clifford group).
pub fn exact_frame_potential(spec: &EnsembleSpec, k: usize) -> Result<f64> {
    match spec {
        EnsembleSpec::CliffordEnumerated { n } => {
            let g = dense_clifford_group(*n)?;
            Ok(g.iter().map(|u| u.trace().norm_sqr().powi(k as i32)).sum::<f64>() / g.len() as f64)
        }
        EnsembleSpec::FixedList { unitaries } => {
            let list = &unitaries.0;
            let mut acc = 0.0;
            for u in list {
                for v in list {
                    let tr: C64 = u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                    acc += tr.norm_sqr().powi(k as i32);
                }
            }
            Ok(acc / (list.len() * list.len()) as f64)
        }
        _ => Err(Error::invalid(format!("{spec} has no finite element list"))),
    }
}

fn choi_dims(spec: &EnsembleSpec, k: usize) -> Result<(usize, usize)> {
    let dk = spec
        .dim()
        .checked_pow(k as u32)
        .ok_or(Error::DimensionLimit { dim: usize::MAX, limit: CHOI_DIM_LIMIT })?;
    let big = dk.saturating_mul(dk);
    if k == 0 || big > CHOI_DIM_LIMIT {
        return Err(Error::DimensionLimit {
            dim: big,
            limit: CHOI_DIM_LIMIT,
        });
    }
    Ok((dk, big))
}

/// Choi vector `(U^{⊗k} ⊗ I)|Φ⁺⟩`: the row-major flattening of `U^{⊗k}`
/// divided by `√(d^k)`.
pub fn choi_vector(u: &CMat, k: usize) -> Vec<C64> {
    let uk = kron_power(u, k);
    let dk = uk.nrows();
    let s = 1.0 / (dk as f64).sqrt();
    let mut v = Vec::with_capacity(dk * dk);
    for r in 0..dk {
        for c in 0..dk {
            v.push(uk[(r, c)] * s);
        }
    }
    v
}

/// Running sum of outer products `Σ v v†`, accumulated in batches through
/// real matrix products.
#[derive(Clone, Debug)]
pub struct OuterProductSum {
    dim: usize,
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    count: usize,
    pending: Vec<Vec<C64>>,
}

const OUTER_BATCH: usize = 256;

impl OuterProductSum {
    pub fn new(dim: usize) -> Self {
        OuterProductSum {
            dim,
            re: DMatrix::zeros(dim, dim),
            im: DMatrix::zeros(dim, dim),
            count: 0,
            pending: Vec::new(),
        }
    }

    pub fn push(&mut self, v: Vec<C64>) {
        debug_assert_eq!(v.len(), self.dim);
        self.pending.push(v);
        self.count += 1;
        if self.pending.len() >= OUTER_BATCH {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let b = self.pending.len();
        let xr = DMatrix::from_fn(self.dim, b, |i, j| self.pending[j][i].re);
        let xi = DMatrix::from_fn(self.dim, b, |i, j| self.pending[j][i].im);
        // (Xr + iXi)(Xr + iXi)† = XrXrᵀ + XiXiᵀ + i(XiXrᵀ − XrXiᵀ)
        self.re.gemm(1.0, &xr, &xr.transpose(), 1.0);
        self.re.gemm(1.0, &xi, &xi.transpose(), 1.0);
        self.im.gemm(1.0, &xi, &xr.transpose(), 1.0);
        self.im.gemm(-1.0, &xr, &xi.transpose(), 1.0);
        self.pending.clear();
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The accumulated sum (not normalized).
    pub fn sum(mut self) -> CMat {
        self.flush();
        DMatrix::from_fn(self.dim, self.dim, |i, j| C64::new(self.re[(i, j)], self.im[(i, j)]))
    }
}

/// Per-batch sums of `v v†` with `v = f(U)` for sampled `U`, each batch
/// drawn from its own substream of `seed`.
pub fn outer_product_batches<F>(
    spec: &EnsembleSpec,
    dim: usize,
    samples: usize,
    batches: usize,
    seed: u64,
    f: F,
) -> Result<Vec<(CMat, usize)>>
where
    F: Fn(&CMat) -> Result<Vec<C64>> + Sync,
{
    spec.validate()?;
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let per = samples.div_ceil(batches.clamp(1, samples));
    par_chunks(seed, samples, per, |rng, len| -> Result<(CMat, usize)> {
        let mut acc = OuterProductSum::new(dim);
        for _ in 0..len {
            acc.push(f(&spec.sample(rng)?)?);
        }
        Ok((acc.sum(), len))
    })
    .into_iter()
    .collect()
}

/// Exact average of `v v†` with `v = f(U)` over a finite ensemble.
pub fn outer_product_exact<F>(spec: &EnsembleSpec, dim: usize, f: F) -> Result<Option<CMat>>
where
    F: Fn(&CMat) -> Result<Vec<C64>> + Sync,
{
    use rayon::prelude::*;
    let Some(list) = spec.exact_elements() else {
        return Ok(None);
    };
    let parts = list
        .par_chunks(512)
        .map(|ch| -> Result<CMat> {
            let mut acc = OuterProductSum::new(dim);
            for u in ch {
                acc.push(f(u)?);
            }
            Ok(acc.sum())
        })
        .collect::<Result<Vec<_>>>()?;
    let total = parts.into_iter().fold(CMat::zeros(dim, dim), |a, b| a + b);
    Ok(Some(total / C64::new(list.len() as f64, 0.0)))
}

/// Per-batch sums of Choi outer products.
pub fn choi_batches(
    spec: &EnsembleSpec,
    k: usize,
    samples: usize,
    batches: usize,
    seed: u64,
) -> Result<Vec<(CMat, usize)>> {
    spec.validate()?;
    let (_, big) = choi_dims(spec, k)?;
    outer_product_batches(spec, big, samples, batches, seed, |u| Ok(choi_vector(u, k)))
}

/// Exact Choi state of the `k`-th moment channel, when available: Haar via
/// the Weingarten calculus, finite ensembles by full enumeration.
pub fn exact_moment_choi(spec: &EnsembleSpec, k: usize) -> Result<Option<CMat>> {
    spec.validate()?;
    let (_, big) = choi_dims(spec, k)?;
    match spec {
        EnsembleSpec::Haar { n } => Ok(Some(haar_choi(k, 1 << n)?)),
        s => outer_product_exact(s, big, |u| Ok(choi_vector(u, k))),
    }
}

/// Choi state of `Φ^{(k)}`. Finite ensembles are averaged exactly; other
/// ensembles are estimated from `samples` draws.
pub fn moment_choi<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    k: usize,
    samples: usize,
    rng: &mut R,
) -> Result<CMat> {
    spec.validate()?;
    if spec.is_finite() {
        return Ok(exact_moment_choi(spec, k)?.expect("finite"));
    }
    if samples == 0 {
        return Err(Error::invalid("moment_choi needs samples >= 1"));
    }
    let seed = fork_seed(rng);
    let batches = choi_batches(spec, k, samples, 16, seed)?;
    let big = batches[0].0.nrows();
    let total = batches.into_iter().fold(CMat::zeros(big, big), |a, (b, _)| a + b);
    Ok(total / C64::new(samples as f64, 0.0))
}

/// Largest total register for adaptive output states.
pub const ADAPTIVE_QUBIT_LIMIT: usize = 8;

/// `Ψ_U(V) = U V_k ··· U V_1 |0⟩` with `U` acting on the first `n` of
/// `n + ancillas` qubits.
pub fn adaptive_state(u: &CMat, vs: &[CMat], ancillas: usize) -> Result<Vec<C64>> {
    let pad = CMat::identity(1 << ancillas, 1 << ancillas);
    let big_u = kron(u, &pad);
    let dim = big_u.nrows();
    let mut psi = nalgebra::DVector::<C64>::zeros(dim);
    psi[0] = C64::new(1.0, 0.0);
    for v in vs {
        if v.nrows() != dim || v.ncols() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: v.nrows(),
            });
        }
        psi = &big_u * (v * psi);
    }
    Ok(psi.as_slice().to_vec())
}

/// `E_U Ψ_U(V)` as a density matrix. Finite ensembles are averaged exactly.
pub fn adaptive_output_state<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    vs: &[CMat],
    ancillas: usize,
    samples: usize,
    rng: &mut R,
) -> Result<CMat> {
    spec.validate()?;
    let total = spec.n() + ancillas;
    if total > ADAPTIVE_QUBIT_LIMIT {
        return Err(Error::DimensionLimit {
            dim: 1 << total,
            limit: 1 << ADAPTIVE_QUBIT_LIMIT,
        });
    }
    if vs.is_empty() {
        return Err(Error::invalid("need at least one interleaved operation"));
    }
    let dim = 1usize << total;
    let f = |u: &CMat| adaptive_state(u, vs, ancillas);
    if let Some(exact) = outer_product_exact(spec, dim, f)? {
        return Ok(exact);
    }
    let seed = fork_seed(rng);
    let parts = outer_product_batches(spec, dim, samples, 16, seed, f)?;
    let total = parts.into_iter().fold(CMat::zeros(dim, dim), |a, (b, _)| a + b);
    Ok(total / C64::new(samples as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::trace_norm_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn parse_and_display() {
        for s in ["haar:2", "clifford:3", "clifford-enum:1", "homeopathy:5:2:haar", "homeopathy:3:1:clifford"] {
            let spec: EnsembleSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("homeopathy:3:4:haar".parse::<EnsembleSpec>().is_err());
        assert!("homeopathy:3:0:haar".parse::<EnsembleSpec>().is_err());
        assert!("clifford-enum:3".parse::<EnsembleSpec>().is_err());
        assert!("bogus:2".parse::<EnsembleSpec>().is_err());
        let json = serde_json::to_string(&EnsembleSpec::homeopathy(4, 2, EnsembleSpec::haar(2))).unwrap();
        assert_eq!(json.parse::<EnsembleSpec>().unwrap().to_string(), "homeopathy:4:2:haar");
    }

    #[test]
    fn fixed_list_roundtrips_through_json() {
        let u = haar_unitary(2, &mut rng(0)).unwrap();
        let spec = EnsembleSpec::fixed(vec![u.clone()]);
        let back: EnsembleSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn samples_are_unitary() {
        let mut r = rng(1);
        for s in ["haar:3", "clifford:3", "clifford-enum:2", "homeopathy:4:2:haar", "homeopathy:3:3:clifford"] {
            let spec: EnsembleSpec = s.parse().unwrap();
            for _ in 0..5 {
                assert!(is_unitary(&spec.sample(&mut r).unwrap(), 1e-12), "{s}");
            }
        }
    }

    #[test]
    fn frame_potential_is_reproducible() {
        let spec = EnsembleSpec::haar(1);
        let a = frame_potential(&spec, 1, 500, &mut rng(5)).unwrap();
        let b = frame_potential(&spec, 1, 500, &mut rng(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clifford_enum_frame_potentials() {
        // Clifford is an exact 3-design: FP equals the Haar value k! for d ≥ k.
        let spec = EnsembleSpec::CliffordEnumerated { n: 2 };
        assert!((exact_frame_potential(&spec, 2).unwrap() - 2.0).abs() < 1e-9);
        assert!((exact_frame_potential(&spec, 3).unwrap() - 6.0).abs() < 1e-9);
        assert!(exact_frame_potential(&spec, 4).unwrap() > 24.0 + 1.0);
    }

    #[test]
    fn homeopathy_with_identity_core_matches_clifford() {
        let spec = EnsembleSpec::homeopathy(2, 1, EnsembleSpec::identity(1));
        let fp = frame_potential(&spec, 2, 20_000, &mut rng(6)).unwrap();
        assert!(fp.within(2.0, 3.0), "{fp}");
    }

    #[test]
    fn fixed_choi_is_pure() {
        let u = haar_unitary(2, &mut rng(2)).unwrap();
        let j = moment_choi(&EnsembleSpec::fixed(vec![u.clone()]), 2, 1, &mut rng(0)).unwrap();
        assert!((j.trace().re - 1.0).abs() < 1e-9);
        assert!(((&j * &j).trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumerated_clifford_choi_matches_haar_up_to_three() {
        for k in 1..=3 {
            let c = exact_moment_choi(&EnsembleSpec::CliffordEnumerated { n: 1 }, k).unwrap().unwrap();
            let h = exact_moment_choi(&EnsembleSpec::haar(1), k).unwrap().unwrap();
            assert!((c - h).iter().all(|e| e.norm() < 1e-8), "k={k}");
        }
        // the single-qubit Clifford group is not a 4-design
        let c4 = exact_moment_choi(&EnsembleSpec::CliffordEnumerated { n: 1 }, 4).unwrap().unwrap();
        let h4 = exact_moment_choi(&EnsembleSpec::haar(1), 4).unwrap().unwrap();
        assert!(0.5 * trace_norm_hermitian(&(c4 - h4)) > 1e-3);
    }

    #[test]
    fn haar_choi_monte_carlo_agrees_with_exact() {
        let spec = EnsembleSpec::haar(2);
        let mc = moment_choi(&spec, 2, 10_000, &mut rng(3)).unwrap();
        let exact = exact_moment_choi(&spec, 2).unwrap().unwrap();
        assert!((mc.trace().re - 1.0).abs() < 1e-9);
        assert!(crate::dense::is_hermitian(&mc, 1e-12));
        let dist = 0.5 * trace_norm_hermitian(&(&mc - &exact));
        // statistical scale √(D/N) for D = 256 Choi dimensions
        assert!(dist < 5.0 * (256.0f64 / 10_000.0).sqrt(), "{dist}");
    }

    #[test]
    fn adaptive_first_moment_is_depolarized() {
        let spec = EnsembleSpec::haar(2);
        let vs = vec![CMat::identity(8, 8)];
        let rho = adaptive_output_state(&spec, &vs, 1, 20_000, &mut rng(4)).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-9);
        let mut expect = CMat::zeros(8, 8);
        for a in 0..4 {
            expect[(2 * a, 2 * a)] = C64::new(0.25, 0.0);
        }
        assert!((rho - expect).iter().all(|e| e.norm() < 0.02));
    }

    #[test]
    fn adaptive_fixed_unitary_is_pure() {
        let u = haar_unitary(2, &mut rng(7)).unwrap();
        let v = haar_unitary(4, &mut rng(8)).unwrap();
        let spec = EnsembleSpec::fixed(vec![u.clone()]);
        let rho = adaptive_output_state(&spec, &[v.clone(), v.clone()], 1, 0, &mut rng(0)).unwrap();
        let psi = adaptive_state(&u, &[v.clone(), v], 1).unwrap();
        let pv = nalgebra::DVector::from_vec(psi);
        assert!((rho - &pv * pv.adjoint()).iter().all(|e| e.norm() < 1e-12));
    }
}
