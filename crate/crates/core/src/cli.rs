//! The `abm` command line.
//!
//! Exit codes: 0 on success (including budget exhaustion, which is a
//! reported outcome), 1 on domain errors, 2 on usage and parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use crate::analysis::{
    extract_clusters, falsify_robustness, Between, FalsifyResult, MetricConfig, MetricKind,
    Sampler, SilhouetteVariant, Within,
};
use crate::asm::{parse_program, parse_seq_literal, print_program, InstrDisplay};
use crate::godel::{program_decode, program_encode, seq_decode, seq_encode};
use crate::machine::{
    rnn_initial_registers, rnn_outcome, Execution, MachineKind, Outcome, Program, RegisterFile,
    RnnOutcome,
};
use crate::numeric::{Norm, Rational, VecSeq};
use crate::translate::{abacus_to_rnn, rnn_to_abacus, ShapeBound};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const BUDGET_ENV: &str = "ABM_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "abm", version, about = "Abacus and RNN register machines over exact rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a program on a sequence literal (rnn) or register values (abacus).
    Run(RunArgs),
    /// Same as `run --trace`.
    Trace(RunArgs),
    /// Compile rnn programs to abacus programs and abacus programs to rnn
    /// programs, for inputs and outputs within a shape bound.
    Translate(TranslateArgs),
    /// Print the natural number coding a sequence or a program.
    Encode(EncodeArgs),
    /// Print the sequence or program coded by a natural number.
    Decode(DecodeArgs),
    /// Distance between two sequences.
    Metric(MetricArgs),
    /// Group inputs by a machine's output and score the grouping.
    Cluster(ClusterArgs),
    /// Search for close inputs with far-apart outputs.
    Falsify(FalsifyArgs),
    /// Check built-in fixtures and, optionally, a directory of programs.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct BudgetArg {
    /// Step budget.
    #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct RunArgs {
    file: PathBuf,
    /// Input sequence literal, e.g. "[(1/2, -3)]" (rnn programs).
    #[arg(long)]
    input: Option<String>,
    /// Initial register value `i=v` (abacus programs); repeatable.
    #[arg(long = "reg", value_name = "I=V")]
    regs: Vec<String>,
    #[command(flatten)]
    budget: BudgetArg,
    /// Print every executed instruction and the registers it wrote.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct TranslateArgs {
    file: PathBuf,
    /// Target machine kind; must differ from the source kind.
    #[arg(long)]
    to: Option<MachineKind>,
    /// Longest input or output sequence handled.
    #[arg(long, default_value_t = 2)]
    max_len: usize,
    /// Largest vector arity handled.
    #[arg(long, default_value_t = 2)]
    max_arity: usize,
    /// Write the program here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct EncodeArgs {
    /// Sequence literal.
    #[arg(long)]
    seq: Option<String>,
    /// Program file.
    #[arg(long)]
    program: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    nat: BigUint,
    /// Decode as a program instead of a sequence.
    #[arg(long)]
    program: bool,
}

#[derive(Debug, Args)]
struct MetricOpts {
    #[arg(long = "metric", alias = "kind", default_value = "perturb")]
    kind: MetricKind,
    #[arg(long, default_value = "linf")]
    norm: Norm,
    /// Insertion/deletion cost for `align`.
    #[arg(long, default_value = "1")]
    indel: Rational,
}

impl MetricOpts {
    fn config(&self) -> Result<MetricConfig, CliError> {
        MetricConfig::new(self.kind, self.norm, self.indel.clone()).map_err(CliError::usage)
    }
}

#[derive(Debug, Args)]
struct MetricArgs {
    #[command(flatten)]
    metric: MetricOpts,
    /// Sequence file or literal.
    x: String,
    /// Sequence file or literal.
    y: String,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    machine: PathBuf,
    /// Directory of sequence files (one literal per line), or one such file.
    #[arg(long)]
    inputs: PathBuf,
    #[command(flatten)]
    metric: MetricOpts,
    #[arg(long)]
    dunn: bool,
    #[arg(long)]
    silhouette: bool,
    #[arg(long, default_value = "min-link")]
    between: Between,
    #[arg(long, default_value = "diameter")]
    within: Within,
    /// `min` (minimum distance) or `nearest-mean` for the silhouette b(x).
    #[arg(long, default_value = "min")]
    variant: SilhouetteVariant,
    /// Report whether the silhouette reaches this value.
    #[arg(long)]
    threshold: Option<Rational>,
    #[command(flatten)]
    budget: BudgetArg,
}

#[derive(Debug, Args)]
struct FalsifyArgs {
    #[arg(long)]
    machine: PathBuf,
    #[arg(long)]
    eps: Rational,
    #[arg(long)]
    delta: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    max_len: usize,
    #[arg(long, default_value_t = 2)]
    max_arity: usize,
    #[arg(long, default_value_t = 4)]
    magnitude: u64,
    #[arg(long, default_value_t = 8)]
    log_range: u32,
    #[command(flatten)]
    metric: MetricOpts,
    #[command(flatten)]
    budget: BudgetArg,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Also parse and re-print every `.abm` file under this directory.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn usage(e: impl ToString) -> Self {
        CliError::Usage(e.to_string())
    }

    fn domain(e: impl ToString) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

/// Runs the command line with explicit arguments and output streams,
/// returning the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => run_cmd(a, false, out),
        Command::Trace(a) => run_cmd(a, true, out),
        Command::Translate(a) => translate_cmd(a, out),
        Command::Encode(a) => encode_cmd(a, out),
        Command::Decode(a) => decode_cmd(a, out),
        Command::Metric(a) => metric_cmd(a, out),
        Command::Cluster(a) => cluster_cmd(a, out),
        Command::Falsify(a) => falsify_cmd(a, out),
        Command::Selftest(a) => selftest_cmd(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(CliError::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    main_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn io(e: std::io::Error) -> CliError {
    CliError::Domain(e.to_string())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    let text = read_text(path)?;
    parse_program(&text).map_err(|diags| {
        let lines: Vec<String> = diags
            .iter()
            .map(|d| format!("{}: {d}", path.display()))
            .collect();
        CliError::Usage(lines.join("\n"))
    })
}

fn literal(text: &str) -> Result<VecSeq, CliError> {
    parse_seq_literal(text.trim()).map_err(|e| CliError::usage(format!("`{}`: {e}", text.trim())))
}

/// A path to a file holding a literal, or the literal itself.
fn seq_arg(arg: &str) -> Result<VecSeq, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        literal(&read_text(path)?)
    } else {
        literal(arg)
    }
}

fn parse_reg(s: &str) -> Result<(usize, BigUint), CliError> {
    let bad = || CliError::usage(format!("bad register assignment `{s}` (expected I=V)"));
    let (i, v) = s.split_once('=').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
}

fn run_cmd(a: RunArgs, force_trace: bool, out: &mut dyn Write) -> CliResult {
    let program = load_program(&a.file)?;
    let budget = a.budget.budget;
    let regs = match program.kind() {
        MachineKind::Rnn => {
            if !a.regs.is_empty() {
                return Err(CliError::usage("rnn programs take --input, not --reg"));
            }
            let x = literal(a.input.as_deref().unwrap_or("[]"))?;
            rnn_initial_registers(&x)
        }
        MachineKind::Abacus => {
            if a.input.is_some() {
                return Err(CliError::usage("abacus programs take --reg, not --input"));
            }
            let mut regs = RegisterFile::new();
            for r in &a.regs {
                let (i, v) = parse_reg(r)?;
                regs.set(i, v);
            }
            regs
        }
    };
    let mut exec = Execution::new(&program, regs, budget);
    let outcome = if a.trace || force_trace {
        let mut n = 0u64;
        for entry in exec.by_ref() {
            let writes: Vec<String> = entry.writes.iter().map(|(r, v)| format!("R{r}={v}")).collect();
            writeln!(out, "{n:>6}  {:>4}  {}  {}", entry.pc, InstrDisplay(&entry.instr), writes.join(" "))
                .map_err(io)?;
            n += 1;
        }
        exec.outcome().expect("finished")
    } else {
        exec.finish()
    };
    match program.kind() {
        MachineKind::Abacus => match outcome {
            Outcome::Halted { regs, .. } => match regs.get(0) {
                Some(v) => writeln!(out, "R0={v}"),
                None => writeln!(out, "R0 empty"),
            }
            .map_err(io),
            Outcome::BudgetExceeded { steps } => {
                writeln!(out, "budget exceeded after {steps} steps").map_err(io)
            }
        },
        MachineKind::Rnn => match rnn_outcome(outcome) {
            RnnOutcome::Output { y, .. } => writeln!(out, "{y}").map_err(io),
            RnnOutcome::BudgetExceeded { steps } => {
                writeln!(out, "budget exceeded after {steps} steps").map_err(io)
            }
            RnnOutcome::HaltedMalformed { steps } => Err(CliError::domain(format!(
                "halted after {steps} steps without a well-formed output sequence"
            ))),
        },
    }
}

fn translate_cmd(a: TranslateArgs, out: &mut dyn Write) -> CliResult {
    let program = load_program(&a.file)?;
    let bound = ShapeBound::new(a.max_len, a.max_arity).map_err(CliError::usage)?;
    if a.to == Some(program.kind()) {
        return Err(CliError::usage(format!(
            "{} is already a {} program",
            a.file.display(),
            program.kind()
        )));
    }
    let compiled = match program.kind() {
        MachineKind::Rnn => rnn_to_abacus(&program, bound),
        MachineKind::Abacus => abacus_to_rnn(&program, bound),
    }
    .map_err(CliError::domain)?;
    let text = print_program(&compiled);
    let (header, body) = text.split_once('\n').expect("header line");
    let source = a.file.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let text = format!(
        "{header}\n# generated by abm translate from {source} ({} program, max-len x max-arity bound {})\n{body}",
        program.kind(),
        bound
    );
    match a.output {
        Some(path) => fs::write(&path, text).map_err(io),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn encode_cmd(a: EncodeArgs, out: &mut dyn Write) -> CliResult {
    let n = match (a.seq, a.program) {
        (Some(s), _) => seq_encode(&literal(&s)?),
        (None, Some(p)) => program_encode(&load_program(&p)?),
        (None, None) => unreachable!("clap requires one"),
    };
    writeln!(out, "{n}").map_err(io)
}

fn decode_cmd(a: DecodeArgs, out: &mut dyn Write) -> CliResult {
    if a.program {
        let p = program_decode(&a.nat).map_err(CliError::domain)?;
        out.write_all(print_program(&p).as_bytes()).map_err(io)
    } else {
        let x = seq_decode(&a.nat).map_err(CliError::domain)?;
        writeln!(out, "{x}").map_err(io)
    }
}

fn metric_cmd(a: MetricArgs, out: &mut dyn Write) -> CliResult {
    let config = a.metric.config()?;
    let x = seq_arg(&a.x)?;
    let y = seq_arg(&a.y)?;
    let d = config.distance(&x, &y).map_err(CliError::domain)?;
    writeln!(out, "{d}").map_err(io)
}

/// Every literal in `path` (one per nonblank line, `#` comments allowed),
/// reading directory entries in name order.
fn load_inputs(path: &Path) -> Result<Vec<(String, VecSeq)>, CliError> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    let mut inputs = Vec::new();
    for file in files {
        let name = file.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        for (i, line) in read_text(&file)?.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                inputs.push((format!("{name}:{}", i + 1), literal(line)?));
            }
        }
    }
    Ok(inputs)
}

fn cluster_cmd(a: ClusterArgs, out: &mut dyn Write) -> CliResult {
    let program = load_program(&a.machine)?;
    let config = a.metric.config()?;
    let inputs = load_inputs(&a.inputs)?;
    let points: Vec<VecSeq> = inputs.iter().map(|(_, x)| x.clone()).collect();
    let ex = extract_clusters(&program, &points, a.budget.budget, &config).map_err(CliError::domain)?;
    for (i, (c, y)) in ex.clustering.clusters().iter().zip(&ex.outputs).enumerate() {
        let members: Vec<String> = c.iter().map(ToString::to_string).collect();
        writeln!(out, "cluster {} -> {y}: {}", i + 1, members.join(" ")).map_err(io)?;
    }
    for (i, why) in &ex.failures {
        writeln!(out, "no output for {} {}: {why}", inputs[*i].0, inputs[*i].1).map_err(io)?;
    }
    if a.dunn {
        let d = ex.clustering.dunn(a.between, a.within).map_err(CliError::domain)?;
        writeln!(out, "dunn = {d}").map_err(io)?;
    }
    if a.silhouette || a.threshold.is_some() {
        let s = ex.clustering.silhouette_with(a.variant).map_err(CliError::domain)?;
        writeln!(out, "silhouette = {s}").map_err(io)?;
        if let Some(t) = a.threshold {
            let verdict = if s >= t { "pass" } else { "fail" };
            writeln!(out, "threshold {t}: {verdict}").map_err(io)?;
        }
    }
    Ok(())
}

fn falsify_cmd(a: FalsifyArgs, out: &mut dyn Write) -> CliResult {
    let program = load_program(&a.machine)?;
    let config = a.metric.config()?;
    let sampler = Sampler {
        seed: a.seed,
        count: a.count,
        max_len: a.max_len,
        max_arity: a.max_arity,
        magnitude: a.magnitude,
        log_range: a.log_range,
    };
    let result = falsify_robustness(&program, &config, &a.eps, &a.delta, &sampler, a.budget.budget)
        .map_err(CliError::domain)?;
    match result {
        FalsifyResult::Witness(w) => {
            writeln!(out, "witness at sample {}", w.sample).map_err(io)?;
            writeln!(out, "x    = {}", w.x).map_err(io)?;
            writeln!(out, "x'   = {}", w.x_prime).map_err(io)?;
            writeln!(out, "y    = {}", w.y).map_err(io)?;
            writeln!(out, "y'   = {}", w.y_prime).map_err(io)?;
            writeln!(out, "din  = {}", w.din).map_err(io)?;
            writeln!(out, "dout = {}", w.dout).map_err(io)
        }
        FalsifyResult::Exhausted(r) => {
            let max = r.max_dout.map_or_else(|| "none".to_string(), |d| d.to_string());
            writeln!(
                out,
                "exhausted: {} samples, {} within delta, {} compared, {} without output, max dout {max}",
                r.samples, r.candidates, r.compared, r.no_output
            )
            .map_err(io)?;
            writeln!(out, "no witness found (this is not a proof of robustness)").map_err(io)
        }
    }
}

fn selftest_checks() -> Vec<(&'static str, bool)> {
    use crate::fixtures;
    use crate::machine::{abacus_output, run_abacus, run_abacus_on, run_rnn};
    let n = |v: u64| BigUint::from(v);
    let seq = |s: &str| parse_seq_literal(s).expect("fixture literal");
    let rnn = |p: &Program, x: &str| {
        run_rnn(p, &seq(x), 10_000)
            .ok()
            .and_then(|o| o.output().map(ToString::to_string))
    };
    let add2 = run_abacus(&fixtures::add2(), RegisterFile::from_pairs([(0, 2u32), (1, 3)]), 1000)
        .ok()
        .and_then(|o| abacus_output(&o));
    let bound = ShapeBound::new(1, 1).expect("valid bound");
    let lowered = rnn_to_abacus(&fixtures::double(), bound).ok();
    let lowered_46 = lowered
        .and_then(|p| run_abacus_on(&p, n(46), DEFAULT_BUDGET).ok())
        .and_then(|o| abacus_output(&o));
    let lifted = abacus_to_rnn(&fixtures::succ(), ShapeBound::new(2, 2).expect("valid bound")).ok();
    vec![
        ("add2 on 2, 3 gives 5", add2 == Some(n(5))),
        ("double on [(1/2)] gives [(1)]", rnn(&fixtures::double(), "[(1/2)]").as_deref() == Some("[(1)]")),
        ("relu on [(-2)] gives [(0)]", rnn(&fixtures::relu1(), "[(-2)]").as_deref() == Some("[(0)]")),
        ("code of [(1/2)] is 46", seq_encode(&seq("[(1/2)]")) == n(46)),
        ("46 decodes to [(1/2)]", seq_decode(&n(46)).ok() == Some(seq("[(1/2)]"))),
        ("lowered double maps 46 to 4", lowered_46 == Some(n(4))),
        (
            "lifted successor maps [(0), (0)] to [(1)]",
            lifted.and_then(|p| rnn(&p, "[(0), (0)]")).as_deref() == Some("[(1)]"),
        ),
    ]
}

fn selftest_cmd(a: SelftestArgs, out: &mut dyn Write) -> CliResult {
    let mut failed = 0;
    for (name, ok) in selftest_checks() {
        writeln!(out, "{} {name}", if ok { "ok  " } else { "FAIL" }).map_err(io)?;
        failed += usize::from(!ok);
    }
    if let Some(dir) = a.corpus {
        let mut files = Vec::new();
        collect_abm(&dir, &mut files).map_err(io)?;
        files.sort();
        for file in files {
            let ok = fs::read_to_string(&file)
                .ok()
                .and_then(|t| parse_program(&t).ok())
                .is_some_and(|p| parse_program(&print_program(&p)).ok() == Some(p));
            writeln!(out, "{} {}", if ok { "ok  " } else { "FAIL" }, file.display()).map_err(io)?;
            failed += usize::from(!ok);
        }
    }
    if failed > 0 {
        return Err(CliError::domain(format!("{failed} self-test check(s) failed")));
    }
    Ok(())
}

fn collect_abm(dir: &Path, files: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_abm(&path, files)?;
        } else if path.extension().is_some_and(|e| e == "abm") {
            files.push(path);
        }
    }
    Ok(())
}
