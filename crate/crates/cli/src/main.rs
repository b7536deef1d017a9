use std::fs::File;
use std::io::{BufWriter, ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use tensor_rank_lab::lab::io::{read_json, write_json, PencilFile, PolyFile, TensorFile};
use tensor_rank_lab::lab::report::{check_suite, SuiteOptions};
use tensor_rank_lab::lab::survey::{run_survey, write_csv, SurveyConfig};
use tensor_rank_lab::lab::gowers_bias_identity;
use tensor_rank_lab::linalg::Subspace;
use tensor_rank_lab::pencils::{self, BlockKind, Pencil};
use tensor_rank_lab::ranks::{self, Caps};
use tensor_rank_lab::{Error, FieldCtx, MultilinearForm};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_CAP_EXCEEDED: u8 = 3;

#[derive(Parser)]
#[command(name = "trlab", version, about = "Ranks of multilinear forms over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic rank, slice rank and codimension estimate of a tensor.
    Rank {
        tensor: PathBuf,
        /// Slot holding V₁ when counting the zero set.
        #[arg(long, default_value_t = 0)]
        slot: usize,
        /// Largest extension degree used by the codimension estimate.
        #[arg(long = "ext-e", default_value_t = 3)]
        ext_e: u32,
    },
    /// Write a tensor JSON file.
    Gen {
        kind: GenKind,
        /// Comma-separated slot dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Matrix pencil tools.
    Pencil {
        #[command(subcommand)]
        command: PencilCommand,
    },
    /// Run the inequality checks on a tensor.
    Verify {
        tensor: PathBuf,
        #[arg(long = "e-max", default_value_t = 3)]
        e_max: u32,
    },
    /// Compare the U_d norm of ψ(Q) with the bias of its polarization.
    Gowers {
        poly: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// Run an ensemble survey and write a CSV report.
    Survey {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Summary JSON path; defaults to the CSV path with `.summary.json`.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Diagonal,
    Random,
    Rank1,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockArg {
    Ln,
    LnTranspose,
}

#[derive(Subcommand)]
enum PencilCommand {
    /// Write a Kronecker block pencil.
    Block {
        #[arg(long, value_enum)]
        kind: BlockArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the pencil (diag(all field elements), I).
    Counterexample {
        #[arg(long)]
        q: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// rank(sA + tB) over every point of the projective line.
    Profile {
        pencil: PathBuf,
        #[arg(long = "ext-e", default_value_t = 1)]
        ext_e: u32,
    },
    /// Test whether the rank hypothesis forces B(ker A) ⊂ im A.
    Kr {
        pencil: PathBuf,
        #[arg(long = "ext-e", default_value_t = pencils::DEFAULT_EXT_E)]
        ext_e: u32,
    },
    /// Derivative test: C vanishes on the kernels of B when B + tC never gains rank.
    Claim0 {
        pencil: PathBuf,
        #[arg(long = "ext-e", default_value_t = pencils::DEFAULT_EXT_E)]
        ext_e: u32,
    },
    /// Kernel and image of a maximal-rank element of span{A, B}.
    Prop22 {
        pencil: PathBuf,
        #[arg(long = "ext-e", default_value_t = pencils::DEFAULT_EXT_E)]
        ext_e: u32,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => Ok(write_json(path, value)?),
        None => print_json(value),
    }
}

fn subspace_json(w: &Subspace) -> serde_json::Value {
    json!({
        "ambient": w.ambient(),
        "dim": w.dim(),
        "basis": (0..w.dim()).map(|i| w.basis().row(i).iter().map(|x| x.index()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn field(q: u64) -> anyhow::Result<FieldCtx> {
    Ok(FieldCtx::with_order(q)?)
}

fn load_tensor(path: &Path) -> anyhow::Result<MultilinearForm> {
    Ok(read_json::<TensorFile>(path)?.to_form()?)
}

fn load_pencil(path: &Path) -> anyhow::Result<Pencil> {
    Ok(read_json::<PencilFile>(path)?.to_pencil()?)
}

fn rank(tensor: &Path, slot: usize, ext_e: u32) -> anyhow::Result<u8> {
    let p = load_tensor(tensor)?;
    if slot >= p.arity() {
        return Err(Error::InvalidInput(format!("slot {slot} out of range for arity {}", p.arity())).into());
    }
    let caps = Caps::default();
    let rooted = p.move_slot_to_front(slot)?;
    let zero = ranks::zero_set_count(&rooted, 1, &caps)?;
    let a = ranks::analytic_rank_count(&rooted, &caps)?;
    let slice = ranks::slice_rank_exact(&p, &caps)?;
    let codim = if p.arity() >= 2 {
        match ranks::codim_estimate(&rooted, ext_e, &caps) {
            Ok(c) => Some(c),
            Err(e) if e.is_cap_exceeded() => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let schmidt = ranks::schmidt_rank(&p, &caps)?;
    print_json(&json!({
        "q": p.field().order(),
        "dims": p.dims(),
        "slot": slot,
        "zero_count": zero.count,
        "analytic_rank": a,
        "slice_rank": slice.value,
        "slice_rank_exact": slice.exact,
        "slice_rank_lower_bound": slice.lower_bound,
        "schmidt_rank": schmidt,
        "witness": slice.witness.subspaces.iter().map(subspace_json).collect::<Vec<_>>(),
        "codim_estimate": codim,
    }))?;
    Ok(0)
}

fn gen(kind: GenKind, dims: Vec<usize>, q: u64, seed: u64, output: Option<&Path>) -> anyhow::Result<u8> {
    let f = field(q)?;
    let p = match kind {
        GenKind::Diagonal => {
            let n = dims[0];
            if dims.iter().any(|&m| m != n) {
                bail!(Error::InvalidInput("diagonal forms need equal dims".into()));
            }
            MultilinearForm::diagonal(&f, n, dims.len())?
        }
        GenKind::Random => MultilinearForm::random(&f, dims, seed)?,
        GenKind::Rank1 => MultilinearForm::random_rank_one(&f, dims, seed)?,
    };
    emit(&TensorFile::from_form(&p), output)?;
    Ok(0)
}

fn pencil(cmd: PencilCommand) -> anyhow::Result<u8> {
    match cmd {
        PencilCommand::Block { kind, n, q, output } => {
            let kind = match kind {
                BlockArg::Ln => BlockKind::Ln,
                BlockArg::LnTranspose => BlockKind::LnTranspose,
            };
            let p = pencils::kronecker_block(kind, n, &field(q)?);
            emit(&PencilFile::from_pencil(&p), output.as_deref())?;
        }
        PencilCommand::Counterexample { q, output } => {
            let p = pencils::kr_counterexample(&field(q)?);
            emit(&PencilFile::from_pencil(&p), output.as_deref())?;
        }
        PencilCommand::Profile { pencil, ext_e } => {
            let prof = pencils::rank_profile(&load_pencil(&pencil)?, ext_e)?;
            let points: Vec<_> = prof
                .points
                .iter()
                .map(|(pt, r)| json!({"s": pt.s.index(), "t": pt.t.index(), "rank": r}))
                .collect();
            print_json(&json!({"extension_degree": ext_e, "points": points}))?;
        }
        PencilCommand::Kr { pencil, ext_e } => {
            let rep = pencils::kr_check(&load_pencil(&pencil)?, ext_e)?;
            print_json(&rep)?;
            if rep.is_counterexample() {
                return Ok(EXIT_CHECK_FAILED);
            }
        }
        PencilCommand::Claim0 { pencil, ext_e } => {
            let p = load_pencil(&pencil)?;
            let rep = pencils::claim0_check(p.a(), p.b(), ext_e)?;
            print_json(&rep)?;
            if !rep.pass {
                return Ok(EXIT_CHECK_FAILED);
            }
        }
        PencilCommand::Prop22 { pencil, ext_e, samples, seed } => {
            let p = load_pencil(&pencil)?;
            let l = [p.a().clone(), p.b().clone()];
            let w = pencils::prop22_reduce(&l, ext_e, samples, seed)?;
            let exact = match ranks::subspace_rank_exact(&l, &Caps::default()) {
                Ok(s) => Some(s.value),
                Err(e) if e.is_cap_exceeded() => None,
                Err(e) => return Err(e.into()),
            };
            print_json(&json!({
                "r_tilde": w.r_tilde,
                "over_extension": w.over_extension,
                "field": w.field.descriptor(),
                "w_prime": subspace_json(&w.w_prime),
                "v_prime": subspace_json(&w.v_prime),
                "certified_bound": 2 * w.r_tilde,
                "subspace_rank": exact,
            }))?;
        }
    }
    Ok(0)
}

fn verify(tensor: &Path, e_max: u32) -> anyhow::Result<u8> {
    let p = load_tensor(tensor)?;
    let opts = SuiteOptions {
        e_max,
        ..SuiteOptions::default()
    };
    let report = check_suite(&p, &opts)?;
    print_json(&report)?;
    let failed = report.checks.iter().any(|c| c.failed() && !c.heuristic);
    Ok(if failed { EXIT_CHECK_FAILED } else { 0 })
}

fn gowers(poly: &Path, d: usize) -> anyhow::Result<u8> {
    let q = read_json::<PolyFile>(poly)?.to_poly()?;
    let out = gowers_bias_identity(&q, d, &Caps::default())?;
    print_json(&out)?;
    Ok(if out.passed() { 0 } else { EXIT_CHECK_FAILED })
}

fn survey(config: &Path, output: &Path, summary: Option<PathBuf>, threads: Option<usize>) -> anyhow::Result<u8> {
    let mut cfg: SurveyConfig = read_json(config)?;
    if threads.is_some() {
        cfg.threads = threads;
    }
    let outcome = run_survey(&cfg)?;
    let file = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    write_csv(&outcome.rows, BufWriter::new(file))?;
    let summary_path = summary.unwrap_or_else(|| output.with_extension("summary.json"));
    write_json(&summary_path, &outcome.summary)?;
    print_json(&outcome.summary)?;
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Rank { tensor, slot, ext_e } => rank(&tensor, slot, ext_e),
        Command::Gen { kind, dims, q, seed, output } => gen(kind, dims, q, seed, output.as_deref()),
        Command::Pencil { command } => pencil(command),
        Command::Verify { tensor, e_max } => verify(&tensor, e_max),
        Command::Gowers { poly, d } => gowers(&poly, d),
        Command::Survey { config, output, summary, threads } => survey(&config, &output, summary, threads),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::CapExceeded { .. }) => EXIT_CAP_EXCEEDED,
        Some(Error::TheoremViolation { .. } | Error::NoWitness(_) | Error::Internal(_)) => EXIT_CHECK_FAILED,
        _ => EXIT_INVALID_INPUT,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("trlab: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
