//! The `nlswap` command-line front end.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 when an input is malformed or a flag is unknown.

use crate::boxes::{ch_value, make_pr_box, validate, BipartiteBox, SingleBox};
use crate::coupler::{apply_to_single, synthesize_coupler, verify_coupler, CouplerError, CouplerTensor};
use crate::json::{
    classification_to_json, distribution_to_json, parse_box, parse_single_box, parse_tensor, swap_outcome_to_json,
    synthesis_to_json, teleport_result_to_json, InputError,
};
use crate::polytope::{classify, Tier, TlmStatus, DEFAULT_TLM_TOL};
use crate::protocols::{
    default_step, demonstrate_inconsistencies, sweep_mixed_pairs, sweep_noisy_family_parallel, swap_with, teleport,
    verify_d1_identity, write_mixed_csv, write_sweep_csv, ProtocolError,
};
use crate::rational::{format_rational, parse_rational, Rational};
use clap::{Parser, Subcommand};
use serde_json::Value;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nlswap", version, about = "Exact non-locality swapping with genuine boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the CH value of a box.
    Ch { r#box: PathBuf },
    /// Print the polytope tier, TLM status and CH value of a box.
    Classify {
        r#box: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TLM_TOL)]
        tol: f64,
    },
    /// Solve for the canonical coupler tensor.
    Synthesize {
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Swap non-locality from two boxes onto Alice and Charlie.
    Swap {
        ab: PathBuf,
        bc: PathBuf,
        #[arg(long)]
        coupler: Option<PathBuf>,
        /// Skip the genuine-polytope membership gate.
        #[arg(long)]
        unchecked: bool,
    },
    /// Print the coupler's output distribution P(b') on one box.
    Single { r#box: PathBuf },
    /// Swap two identical noisy boxes over a grid and write CSV.
    Sweep {
        #[arg(long, default_value = "1/20")]
        step: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also write the swaps of all ordered pairs of distinct grid boxes.
        #[arg(long)]
        mixed: Option<PathBuf>,
    },
    /// Teleport a single-party box to Alice through a PR box.
    Teleport { single: PathBuf },
    /// Run the full consistency suite.
    Verify,
}

#[derive(Debug)]
enum Failure {
    Malformed(String),
    Check(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Malformed(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Malformed(_) => EXIT_MALFORMED,
            Failure::Check(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::InvalidStep(_) | ProtocolError::ThreadPool(_) => Failure::Malformed(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<CouplerError> for Failure {
    fn from(e: CouplerError) -> Self {
        Failure::Check(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Malformed(format!("{}: {e}", path.display()))
}

fn located(path: &Path, e: InputError) -> Failure {
    if e.path.is_empty() {
        Failure::Malformed(format!("{}: {}", path.display(), e.message))
    } else {
        Failure::Malformed(format!("{}: at {}: {}", path.display(), e.path, e.message))
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("{}: invalid JSON: {e}", path.display())))
}

fn read_box(path: &Path) -> Result<BipartiteBox, Failure> {
    parse_box(&read_json(path)?).map_err(|e| located(path, e))
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::Malformed(format!("write failed: {e}")))
}

fn write_output(path: Option<&Path>, out: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_failure(p, e)),
        None => out.write_all(bytes).map_err(|e| Failure::Malformed(format!("write failed: {e}"))),
    }
}

fn cmd_ch(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let bx = read_box(path)?;
    if let Some(v) = validate(&bx).first_violation() {
        return Err(Failure::Check(format!("{}: invalid box: {v}", path.display())));
    }
    emit(out, &format!("{}\n", format_rational(&ch_value(&bx))))
}

fn cmd_classify(path: &Path, tol: f64, out: &mut dyn Write) -> Result<(), Failure> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::Malformed(format!("--tol must be a non-negative number, got {tol}")));
    }
    let bx = read_box(path)?;
    let c = classify(&bx, tol);
    emit(out, &to_pretty(&classification_to_json(&c)))?;
    if c.tier == Tier::Invalid {
        let v = validate(&bx).first_violation().expect("invalid tier has a violation");
        return Err(Failure::Check(format!("{}: invalid box: {v}", path.display())));
    }
    Ok(())
}

fn cmd_synthesize(output: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let s = synthesize_coupler()?;
    write_output(output, out, to_pretty(&synthesis_to_json(&s)).as_bytes())
}

fn cmd_swap(
    ab: &Path,
    bc: &Path,
    coupler: Option<&Path>,
    unchecked: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let ab_box = read_box(ab)?;
    let bc_box = read_box(bc)?;
    let loaded;
    let t = match coupler {
        Some(p) => {
            loaded = parse_tensor(&read_json(p)?).map_err(|e| located(p, e))?;
            &loaded
        }
        None => CouplerTensor::canonical(),
    };
    let outcome = swap_with(t, &ab_box, &bc_box, !unchecked)?;
    emit(out, &to_pretty(&swap_outcome_to_json(&outcome)))
}

fn cmd_single(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let bx = read_box(path)?;
    if let Some(v) = validate(&bx).first_violation() {
        return Err(Failure::Check(format!("{}: invalid box: {v}", path.display())));
    }
    let p = apply_to_single(CouplerTensor::canonical(), &bx)?;
    emit(out, &to_pretty(&distribution_to_json(&p)))
}

fn cmd_sweep(
    step: &str,
    output: Option<&Path>,
    jobs: usize,
    mixed: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let step: Rational =
        parse_rational(step).map_err(|e| Failure::Malformed(format!("--step: {e}")))?;
    if jobs == 0 {
        return Err(Failure::Malformed("--jobs must be at least 1".into()));
    }
    let records = sweep_noisy_family_parallel(&step, DEFAULT_TLM_TOL, jobs)?;
    let mut buf = Vec::new();
    write_sweep_csv(&records, &mut buf).map_err(|e| Failure::Malformed(e.to_string()))?;
    write_output(output, out, &buf)?;
    if let Some(path) = mixed {
        let pairs = sweep_mixed_pairs(&step)?;
        let mut buf = Vec::new();
        write_mixed_csv(&pairs, &mut buf).map_err(|e| Failure::Malformed(e.to_string()))?;
        std::fs::write(path, buf).map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

fn cmd_teleport(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let sb: SingleBox = parse_single_box(&read_json(path)?).map_err(|e| located(path, e))?;
    if let Some(v) = sb.violation() {
        return Err(Failure::Check(format!("{}: invalid single box: {v}", path.display())));
    }
    let r = teleport(CouplerTensor::canonical(), &sb, &make_pr_box())?;
    emit(out, &to_pretty(&teleport_result_to_json(&r)))
}

fn verify_line(out: &mut dyn Write, passed: bool, name: &str, detail: &str) -> Result<(), Failure> {
    emit(out, &format!("[{}] {name}: {detail}\n", if passed { "PASS" } else { "FAIL" }))
}

fn cmd_verify(out: &mut dyn Write) -> Result<(), Failure> {
    let mut all = true;

    let synthesis = synthesize_coupler()?;
    let t = &synthesis.tensor;
    let ok = t == CouplerTensor::canonical();
    all &= ok;
    verify_line(
        out,
        ok,
        "synthesis",
        &format!(
            "{} equations, rank {}, solution space dim {}, observable dim {}, rule: {}",
            synthesis.equations,
            synthesis.rank,
            synthesis.solution_space_dim,
            synthesis.observable_dim,
            synthesis.canonical_rule
        ),
    )?;

    let report = verify_coupler(t);
    all &= report.all_passed();
    emit(out, &report.to_string())?;

    let ok = verify_d1_identity();
    all &= ok;
    verify_line(out, ok, "facet-centre", "both decompositions agree and force P(b'=0|PR) = 1")?;

    let inc = demonstrate_inconsistencies();
    for item in [&inc.unit_scale_coupler_on_pr, &inc.coupler_on_anti_pr] {
        // the demonstration passes when the value is flagged invalid
        let ok = !item.valid;
        all &= ok;
        verify_line(
            out,
            ok,
            "inconsistency",
            &format!("{} = {} (flagged invalid: {})", item.description, format_rational(&item.value), !item.valid),
        )?;
    }

    match sweep_noisy_family_parallel(&default_step(), DEFAULT_TLM_TOL, 1) {
        Ok(records) => {
            verify_line(out, true, "swap-law", &format!("{} grid points at step 1/20", records.len()))?;
            let mismatch = records.iter().find(|r| r.swappable != (r.tlm == TlmStatus::Violated));
            let ok = mismatch.is_none();
            all &= ok;
            let detail = match mismatch {
                None => "swappable iff TLM violated at every grid point".to_string(),
                Some(r) => format!(
                    "mismatch at xi = {}, gamma = {}: swappable = {}, tlm = {}",
                    format_rational(&r.xi),
                    format_rational(&r.gamma),
                    r.swappable,
                    r.tlm
                ),
            };
            verify_line(out, ok, "quantum-boundary", &detail)?;
        }
        Err(e) => {
            all = false;
            verify_line(out, false, "swap-law", &e.to_string())?;
        }
    }

    let mut teleport_ok = true;
    let mut detail = "all four deterministic single boxes arrive unchanged".to_string();
    for (alpha, beta) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let sb = SingleBox::local(alpha, beta);
        match teleport(t, &sb, &make_pr_box()) {
            Ok(r) if r.alice_box == sb => {}
            Ok(r) => {
                teleport_ok = false;
                detail = format!("L{alpha}{beta} arrived as {:?}", r.alice_box);
                break;
            }
            Err(e) => {
                teleport_ok = false;
                detail = format!("L{alpha}{beta}: {e}");
                break;
            }
        }
    }
    all &= teleport_ok;
    verify_line(out, teleport_ok, "teleportation", &detail)?;

    if all {
        Ok(())
    } else {
        Err(Failure::Check("verification failed".into()))
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Ch { r#box } => cmd_ch(&r#box, out),
        Command::Classify { r#box, tol } => cmd_classify(&r#box, tol, out),
        Command::Synthesize { output } => cmd_synthesize(output.as_deref(), out),
        Command::Swap { ab, bc, coupler, unchecked } => cmd_swap(&ab, &bc, coupler.as_deref(), unchecked, out),
        Command::Single { r#box } => cmd_single(&r#box, out),
        Command::Sweep { step, output, jobs, mixed } => {
            cmd_sweep(&step, output.as_deref(), jobs, mixed.as_deref(), out)
        }
        Command::Teleport { single } => cmd_teleport(&single, out),
        Command::Verify => cmd_verify(out),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_MALFORMED
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}
