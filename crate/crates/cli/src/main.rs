//! `dilute`: seeded experiment driver writing CSV and JSON artifacts.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use dilute_core::attack::{distinguish, AttackOptions, AttackReport, CompressibleSource};
use dilute_core::commutant::{
    exhaustive_twirl, haar_twirl, vandermonde_bound_check, weingarten_table, CliffordTwirl, TableArchive,
};
use dilute_core::dense::BellPath;
use dilute_core::ensembles::{clifford_group_matrices, exact_frame_potential, frame_potential, EnsembleSpec};
use dilute_core::moments::{decay_experiment_with, BootstrapOptions, DecayOptions};
use dilute_core::{CMat, C64};

use output::Run;

const EXIT_VALIDATION: u8 = 2;
const EXIT_CONSISTENCY: u8 = 3;

#[derive(Parser)]
#[command(name = "dilute", version, about = "Clifford-diluted design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory for CSV and JSON artifacts.
    #[arg(long, env = "DILUTE_OUT_DIR", default_value = "dilute-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the Gram/Weingarten table of the k-copy Clifford commutant.
    #[command(after_help = "CSV columns (commutant.csv): index, m, columns, phases_upper, alpha_to_identity\n\
JSON (commutant.json): manifest plus the versioned table archive with bit-exact hex floats")]
    Commutant {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Estimate the frame potential E|tr(U†V)|^{2k} of an ensemble.
    #[command(after_help = "CSV columns (frame_potential.csv): spec, k, samples, seed, value, stderr, exact\n\
Ensembles: haar:N, clifford:N, clifford-enum:N, identity:N, homeopathy:N:T:INNER, or a JSON spec tree")]
    FramePotential {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Choi-state distance of the diluted ensemble from Haar as t varies.
    #[command(after_help = "CSV columns (decay.csv): t, distance, stderr, envelope, above_floor, within_envelope, samples, seed\n\
JSON (decay.json): full table with floor, reference bias, fitted slope and monotonicity flag")]
    Decay {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Values of t: `A..B` (inclusive), a comma list, or a single value.
        #[arg(long)]
        t: String,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        batches: usize,
        #[arg(long, default_value_t = 24)]
        replicates: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Bell-difference distinguisher against a compressible source and Haar states.
    #[command(after_help = "CSV columns (distinguish.csv): source, trial, s_dim, pauli, statistic\n\
JSON (distinguish.json): both reports, advantage with 95% interval, l, epsilon_t, n, t, copies (4l+2)")]
    Distinguish {
        #[arg(long, value_enum, default_value_t = SourceKind::Injected)]
        source: SourceKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Bell-difference samples per trial; defaults to 3t + 2.
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        epsilon_t: f64,
        /// Report 1[statistic ≥ ε_T] instead of the raw value.
        #[arg(long)]
        thresholded: bool,
        /// Estimate tr²(Pψ) from this many P⊗P shots.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, value_enum, default_value_t = PathKind::Measurement)]
        path: PathKind,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compare Weingarten twirls against the enumerated group and the Haar twirl.
    #[command(after_help = "CSV columns (twirl_check.csv): check, k, n, input, max_error, tolerance, expected_agree, agrees")]
    TwirlCheck {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        inputs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Row-sum bound for the inverse of M_ij = 2^{-ij}, in exact arithmetic.
    #[command(after_help = "CSV columns (vandermonde.csv): i, row_sum, bound, ratio, satisfied")]
    Vandermonde {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SourceKind {
    /// Random Clifford applied to a Haar t-qubit factor ⊗ |0⟩.
    Injected,
    Haar,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum PathKind {
    Measurement,
    Table,
}

fn parse_t_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let list = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().context("bad t range start")?;
        let b: usize = b.trim().trim_start_matches('=').parse().context("bad t range end")?;
        if a > b {
            bail!(dilute_core::Error::invalid(format!("empty t range {s}")));
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| dilute_core::Error::invalid(format!("bad t list {s:?}")))?
    };
    Ok(list)
}

fn random_operator(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    use rand::Rng;
    CMat::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn max_entry_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|e| e.norm()).fold(0.0, f64::max)
}

#[derive(Serialize)]
struct MonomialRow {
    index: usize,
    m: usize,
    columns: String,
    phases_upper: String,
    alpha_to_identity: u32,
}

fn commutant(k: usize, n: usize, out: &OutArgs) -> Result<()> {
    let run = Run::new("commutant", None, json!({ "k": k, "n": n }), &out.out)?;
    let table = weingarten_table(k, n)?;
    let archive = TableArchive::from_table(&table);
    let identity = archive
        .monomials
        .iter()
        .position(|m| m.m == 0)
        .context("identity monomial missing")?;
    let rows: Vec<MonomialRow> = archive
        .monomials
        .iter()
        .map(|m| MonomialRow {
            index: m.index,
            m: m.m,
            columns: m.columns.join(" "),
            phases_upper: m.phases_upper.clone(),
            alpha_to_identity: archive.alpha[m.index][identity],
        })
        .collect();
    run.write_csv(None, &rows)?;
    run.write_json(&archive)?;
    println!(
        "commutant k={k} n={n}: {} monomials, pseudo-inverse {}, min |eigenvalue| {:.3e}",
        table.len(),
        table.pseudo,
        table.min_singular_value
    );
    Ok(())
}

#[derive(Serialize)]
struct FrameRow {
    spec: String,
    k: usize,
    samples: usize,
    seed: u64,
    value: f64,
    stderr: f64,
    exact: Option<f64>,
}

fn frame(spec: &str, k: usize, samples: usize, seed: u64, out: &OutArgs) -> Result<()> {
    let parsed: EnsembleSpec = spec.parse()?;
    let run = Run::new(
        "frame-potential",
        Some(seed),
        json!({ "ensemble": parsed, "k": k, "samples": samples }),
        &out.out,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est = frame_potential(&parsed, k, samples, &mut rng)?;
    let exact = if parsed.is_finite() {
        Some(exact_frame_potential(&parsed, k)?)
    } else {
        None
    };
    let row = FrameRow {
        spec: parsed.to_string(),
        k,
        samples,
        seed,
        value: est.value,
        stderr: est.stderr,
        exact,
    };
    run.write_csv(None, std::slice::from_ref(&row))?;
    run.write_json(&row)?;
    println!("frame-potential {} k={k}: {est}", parsed);
    Ok(())
}

#[derive(Serialize)]
struct DecayCsvRow {
    t: usize,
    distance: f64,
    stderr: f64,
    envelope: f64,
    above_floor: bool,
    within_envelope: bool,
    samples: usize,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn decay(n: usize, k: usize, t: &str, samples: usize, seed: u64, batches: usize, replicates: usize, out: &OutArgs) -> Result<()> {
    let ts = parse_t_list(t)?;
    let opts = DecayOptions {
        bootstrap: BootstrapOptions { batches, replicates },
    };
    let run = Run::new(
        "decay",
        Some(seed),
        json!({ "n": n, "k": k, "t": ts, "samples": samples, "options": opts }),
        &out.out,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = decay_experiment_with(n, k, &ts, samples, opts, &mut rng)?;
    let rows: Vec<DecayCsvRow> = table
        .rows
        .iter()
        .map(|r| DecayCsvRow {
            t: r.t,
            distance: r.distance,
            stderr: r.stderr,
            envelope: r.envelope,
            above_floor: r.above_floor,
            within_envelope: r.within_envelope,
            samples,
            seed,
        })
        .collect();
    run.write_csv(None, &rows)?;
    run.write_json(&table)?;
    let slope = table.slope.map_or("none".to_string(), |s| format!("{s:.3}"));
    println!(
        "decay n={n} k={k}: {} rows, floor {:.5}, monotone above floor {}, slope {slope}",
        rows.len(),
        table.floor,
        table.monotone_above_floor
    );
    Ok(())
}

#[derive(Serialize)]
struct TrialCsvRow<'a> {
    source: &'a str,
    trial: usize,
    s_dim: usize,
    pauli: &'a str,
    statistic: f64,
}

#[derive(Serialize)]
struct DistinguishSummary {
    n: usize,
    t: usize,
    l: usize,
    epsilon_t: f64,
    copies: usize,
    advantage: f64,
    advantage_stderr: f64,
    advantage_ci95: [f64; 2],
    source: AttackReport,
    haar: AttackReport,
}

#[allow(clippy::too_many_arguments)]
fn distinguish_cmd(
    source: SourceKind,
    n: usize,
    t: usize,
    trials: usize,
    seed: u64,
    l: Option<usize>,
    epsilon_t: f64,
    thresholded: bool,
    shots: Option<usize>,
    path: PathKind,
    out: &OutArgs,
) -> Result<()> {
    let mut opts = AttackOptions::new(l.unwrap_or(3 * t + 2));
    opts.epsilon_t = epsilon_t;
    opts.thresholded = thresholded;
    opts.shots = shots;
    opts.path = match path {
        PathKind::Measurement => BellPath::Measurement,
        PathKind::Table => BellPath::Table,
    };
    let run = Run::new(
        "distinguish",
        Some(seed),
        json!({ "source": source, "n": n, "t": t, "trials": trials, "options": opts }),
        &out.out,
    )?;
    let src = match source {
        SourceKind::Injected => CompressibleSource::injected(n, t)?,
        SourceKind::Haar => CompressibleSource::haar(n)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = distinguish(&src, opts, trials, &mut rng)?;
    let b = distinguish(&CompressibleSource::haar(n)?, opts, trials, &mut rng)?;
    let mut rows = Vec::with_capacity(2 * trials);
    for (name, rep) in [("source", &a), ("haar", &b)] {
        for r in &rep.records {
            rows.push(TrialCsvRow {
                source: name,
                trial: r.trial,
                s_dim: r.s_dim,
                pauli: r.pauli.as_deref().unwrap_or(""),
                statistic: r.statistic,
            });
        }
    }
    run.write_csv(None, &rows)?;
    let adv = a.mean - b.mean;
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    let summary = DistinguishSummary {
        n,
        t,
        l: opts.l,
        epsilon_t,
        copies: opts.copies(),
        advantage: adv,
        advantage_stderr: se,
        advantage_ci95: [adv - 1.96 * se, adv + 1.96 * se],
        source: a,
        haar: b,
    };
    run.write_json(&summary)?;
    println!(
        "distinguish n={n} t={t} l={}: source {:.4}, haar {:.4}, advantage {adv:.4} ± {se:.4}",
        opts.l, summary.source.mean, summary.haar.mean
    );
    Ok(())
}

#[derive(Serialize)]
struct TwirlRow {
    check: &'static str,
    k: usize,
    n: usize,
    input: usize,
    max_error: f64,
    tolerance: f64,
    expected_agree: bool,
    agrees: bool,
}

fn twirl_check(k: usize, n: usize, inputs: usize, seed: u64, tolerance: f64, out: &OutArgs) -> Result<()> {
    let run = Run::new(
        "twirl-check",
        Some(seed),
        json!({ "k": k, "n": n, "inputs": inputs, "tolerance": tolerance }),
        &out.out,
    )?;
    let twirl = CliffordTwirl::new(k, n)?;
    let group = if n <= 2 { Some(clifford_group_matrices(n)?) } else { None };
    let haar_ok = k <= 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << (n * k);
    let mut rows = Vec::new();
    for input in 0..inputs {
        let o = random_operator(dim, &mut rng);
        let fast = twirl.apply(&o)?;
        if let Some(g) = group {
            let err = max_entry_diff(&fast, &exhaustive_twirl(&o, k, g)?);
            rows.push(TwirlRow {
                check: "weingarten_vs_group",
                k,
                n,
                input,
                max_error: err,
                tolerance,
                expected_agree: true,
                agrees: err <= tolerance,
            });
        }
        if haar_ok {
            let err = max_entry_diff(&fast, &haar_twirl(&o, k, 1 << n)?);
            rows.push(TwirlRow {
                check: "clifford_vs_haar",
                k,
                n,
                input,
                max_error: err,
                tolerance,
                expected_agree: k <= 3,
                agrees: err <= tolerance,
            });
        }
    }
    run.write_csv(None, &rows)?;
    run.write_json(&rows)?;
    let broken = rows.iter().filter(|r| r.expected_agree && !r.agrees).count();
    let worst = rows.iter().map(|r| r.max_error).fold(0.0, f64::max);
    println!("twirl-check k={k} n={n}: {} comparisons, {broken} unexpected mismatches, max error {worst:.2e}", rows.len());
    if broken > 0 {
        bail!(dilute_core::Error::consistency(format!("{broken} twirl comparisons exceeded {tolerance:e}")));
    }
    Ok(())
}

fn vandermonde(k: usize, out: &OutArgs) -> Result<()> {
    let run = Run::new("vandermonde", None, json!({ "k": k }), &out.out)?;
    let rep = vandermonde_bound_check(k)?;
    run.write_csv(None, &rep.rows)?;
    run.write_json(&rep)?;
    println!(
        "vandermonde k={k}: all bounds satisfied {}, max ratio {:.4}",
        rep.all_satisfied, rep.max_ratio
    );
    if !rep.all_satisfied {
        bail!(dilute_core::Error::consistency("row-sum bound violated"));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Commutant { k, n, out } => commutant(k, n, &out),
        Command::FramePotential { spec, k, samples, seed, out } => frame(&spec, k, samples, seed, &out),
        Command::Decay { n, k, t, samples, seed, batches, replicates, out } => {
            decay(n, k, &t, samples, seed, batches, replicates, &out)
        }
        Command::Distinguish { source, n, t, trials, seed, l, epsilon_t, thresholded, shots, path, out } => {
            distinguish_cmd(source, n, t, trials, seed, l, epsilon_t, thresholded, shots, path, &out)
        }
        Command::TwirlCheck { k, n, inputs, seed, tolerance, out } => twirl_check(k, n, inputs, seed, tolerance, &out),
        Command::Vandermonde { k, out } => vandermonde(k, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<dilute_core::Error>() {
                Some(core) if core.is_validation() => EXIT_VALIDATION,
                Some(_) => EXIT_CONSISTENCY,
                None if e.downcast_ref::<std::num::ParseIntError>().is_some() => EXIT_VALIDATION,
                None => EXIT_CONSISTENCY,
            };
            ExitCode::from(code)
        }
    }
}
