use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tensorrank::approx::{
    als_cp, best_of_restarts, bregman, degeneracy_report, weak_rank2, AlsOptions, FitTrace, SquaredFrobenius,
    WeakOptions, DEFAULT_RESTARTS,
};
use tensorrank::constructions::{
    dsl_sequence, gap_sequence, leibniz_sequence, random_orbit_sample, rank_plus_one_instance,
    unit_pairs, LeibnizSpec, SequenceHandle,
};
use tensorrank::io::{read_tensor, tensor_to_json, write_json, write_tensor, AnyTensor};
use tensorrank::rank222::{reproduce_table1, table1_markdown};
use tensorrank::{
    classify222, classify_general, reduce222, DenseTensor, MultilinearMap, OrbitClass,
    Rational, RankOneSum, Scalar, Tensor, TensorError, DEFAULT_RANK_TOL, EPS_DELTA,
};

const EXIT_INPUT: u8 = 1;
const EXIT_UNCLASSIFIED: u8 = 2;

#[derive(Parser)]
#[command(name = "tensorrank", version, about = "Rank, border rank and orbit classification of small real tensors")]
#[command(after_help = "Exit codes:\n  0  success\n  1  input or parameter error\n  2  tensor not classified (multilinear rank exceeds (2,2,2))")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an order-3 tensor into its GL orbit type and print the report as JSON.
    Classify {
        path: PathBuf,
        /// Use exact rational arithmetic (implied for rational files).
        #[arg(long)]
        exact: bool,
    },
    /// Write a tensor from one of the built-in families.
    Generate(GenerateArgs),
    /// Fit a CP model by alternating least squares and report degeneracy diagnostics.
    Fit {
        path: PathBuf,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[command(flatten)]
        run: RunArgs,
        /// Independent restarts; the best final residual wins.
        #[arg(long, default_value_t = 1)]
        restarts: usize,
    },
    /// Best approximation of border rank at most 2.
    Weak2 {
        path: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Brègman divergences D(A, B) and D(B, A) for φ = ½‖·‖².
    Bregman { a: PathBuf, b: PathBuf },
    /// Recompute the orbit table of 2×2×2 tensors and print it as markdown.
    #[command(name = "reproduce-table1")]
    ReproduceTable1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-2 ALS on the canonical G3 tensor: diverging coefficients with a bounded sum.
    #[command(name = "degeneracy-demo")]
    DegeneracyDemo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Stop once a sweep changes the residual by less than tol·‖A‖ (0 runs every sweep).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// canonical:<class>, dsl, dsl-seq, leibniz, gap, rank-plus-one or random-orbit.
    kind: String,
    /// Sequence index (t = 1/n for Leibniz quotients). Families other than dsl-seq emit the limit when omitted.
    #[arg(long)]
    n: Option<u64>,
    /// Order of the Leibniz tensor.
    #[arg(long)]
    k: Option<usize>,
    /// Leibniz exponents, comma separated.
    #[arg(long)]
    a: Option<String>,
    /// Rank parameter for gap and rank-plus-one
    #[arg(long)]
    r: Option<usize>,
    /// Number of degenerate blocks for gap
    #[arg(long)]
    s: Option<usize>,
    /// Comma-separated shape for rank-plus-one.
    #[arg(long)]
    shape: Option<String>,
    /// Target orbit class for random-orbit
    #[arg(long)]
    class: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vector dimension per mode for dsl and dsl-seq.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Output file; the tensor goes to stdout when omitted. A `.witness.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Classify { path, exact } => classify(&path, exact),
        Command::Generate(args) => generate(&args).map(|_| 0),
        Command::Fit { path, rank, run, restarts } => fit(&path, rank, &run, restarts).map(|_| 0),
        Command::Weak2 { path, run, restarts } => weak2(&path, &run, restarts).map(|_| 0),
        Command::Bregman { a, b } => divergence(&a, &b).map(|_| 0),
        Command::ReproduceTable1 { out } => {
            let md = table1_markdown(&reproduce_table1()?);
            if let Some(p) = out {
                fs::write(&p, &md).with_context(|| format!("writing {}", p.display()))?;
            }
            emit(&md)?;
            Ok(0)
        }
        Command::DegeneracyDemo { seed, max_iter, trace } => degeneracy_demo(seed, max_iter, trace.as_deref()).map(|_| 0),
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &Value) -> Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(v)?))
}

fn load(path: &Path) -> Result<AnyTensor> {
    read_tensor(path).with_context(|| format!("reading {}", path.display()))
}

fn classify(path: &Path, exact: bool) -> Result<u8> {
    let input = load(path)?;
    if input.shape().len() != 3 {
        bail!("expected an order-3 tensor, got shape {:?}", input.shape());
    }
    let report = if exact || matches!(input, AnyTensor::Rational(_)) {
        report_for(&input.to_rational()?, 0.0)?
    } else {
        report_for(&input.to_f64(), EPS_DELTA)?
    };
    print_json(&report)?;
    Ok(if report["class"].is_null() { EXIT_UNCLASSIFIED } else { 0 })
}

/// 2×2×2 inputs get a reduction witness when one exists over the scalar field.
fn report_for<T: Scalar>(a: &DenseTensor<T>, tol: f64) -> Result<Value> {
    if a.shape() != [2, 2, 2] {
        return Ok(classify_general(a, tol)?.to_json());
    }
    match reduce222(a, tol) {
        Ok(r) => Ok(r.to_json()),
        Err(TensorError::NoRationalWitness(why)) => {
            let mut v = classify222(a, tol)?.to_json();
            v["witness_note"] = json!(why);
            Ok(v)
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad {what} entry '{p}'")))
        .collect()
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("{kind} needs --{flag}"))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.witness.json"))
}

fn map_json(g: &MultilinearMap<Rational>) -> Value {
    let rows = |m: &tensorrank::Matrix<Rational>| -> Vec<Vec<Value>> {
        m.to_rows().iter().map(|r| r.iter().map(Scalar::to_json).collect()).collect()
    };
    Value::Array(g.factors().iter().map(|m| json!(rows(m))).collect())
}

fn sequence_output(seq: &SequenceHandle<Rational>, n: Option<u64>) -> Result<(DenseTensor<Rational>, Value)> {
    let mut side = json!({
        "name": seq.name,
        "term_rank_bound": seq.term_rank_bound,
        "limit_rank": seq.limit_rank,
    });
    match n {
        Some(n) => {
            let t = seq.term(n)?;
            side["n"] = json!(n);
            side["witness"] = t.witness.to_json();
            Ok((t.tensor, side))
        }
        None => {
            side["n"] = Value::Null;
            Ok((seq.limit.clone(), side))
        }
    }
}

fn dsl_witness(x: &[Vec<Rational>; 3], y: &[Vec<Rational>; 3]) -> Result<RankOneSum<Rational>> {
    let shape = x.iter().map(Vec::len).collect();
    let mut w = RankOneSum::new(shape);
    for m in 0..3 {
        let vectors = (0..3).map(|i| if i == m { y[i].clone() } else { x[i].clone() }).collect();
        w.push(Rational::from_i64(1), vectors)?;
    }
    Ok(w)
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let kind = args.kind.as_str();
    let (tensor, side): (DenseTensor<Rational>, Option<Value>) = if let Some(name) = kind.strip_prefix("canonical:") {
        let class: OrbitClass = name.parse()?;
        let side = json!({
            "class": class.name(),
            "witness": class.cp_certificate::<Rational>().to_json(),
            "outer_rank": class.outer_rank(),
            "border_rank": class.border_rank(),
        });
        (class.canonical(), Some(side))
    } else {
        match kind {
            "dsl" | "dsl-seq" => {
                let (x, y) = unit_pairs::<Rational>(args.dim);
                let seq = dsl_sequence(&x, &y)?;
                if kind == "dsl" {
                    let side = json!({
                        "name": "dsl",
                        "witness": dsl_witness(&x, &y)?.to_json(),
                        "limit_rank": seq.limit_rank,
                    });
                    (seq.limit.clone(), Some(side))
                } else {
                    let (t, side) = sequence_output(&seq, Some(need(args.n, "n", kind)?))?;
                    (t, Some(side))
                }
            }
            "leibniz" => {
                let k = need(args.k, "k", kind)?;
                let a = parse_list(args.a.as_deref().ok_or_else(|| anyhow!("leibniz needs --a"))?, "exponent")?;
                let spec = LeibnizSpec::<Rational>::unit(k, a)?;
                let seq = leibniz_sequence(&spec)?;
                let (t, mut side) = sequence_output(&seq, args.n)?;
                side["limit_term_count"] = json!(spec.term_count().to_string());
                side["quotient_term_count"] = json!(spec.quotient_term_count());
                (t, Some(side))
            }
            "gap" => {
                let seq = gap_sequence::<Rational>(need(args.r, "r", kind)?, need(args.s, "s", kind)?)?;
                let (t, side) = sequence_output(&seq, args.n)?;
                (t, Some(side))
            }
            "rank-plus-one" => {
                let shape = parse_list(args.shape.as_deref().ok_or_else(|| anyhow!("rank-plus-one needs --shape"))?, "shape")?;
                let seq = rank_plus_one_instance::<Rational>(&shape, need(args.r, "r", kind)?)?;
                let (t, side) = sequence_output(&seq, args.n)?;
                (t, Some(side))
            }
            "random-orbit" => {
                let class: OrbitClass = args.class.as_deref().ok_or_else(|| anyhow!("random-orbit needs --class"))?.parse()?;
                let (t, g) = random_orbit_sample::<Rational>(class, args.seed);
                let side = json!({"class": class.name(), "seed": args.seed, "map": map_json(&g)});
                (t, Some(side))
            }
            other => bail!("unknown generator '{other}'"),
        }
    };
    match &args.out {
        Some(out) => {
            write_tensor(out, &tensor).with_context(|| format!("writing {}", out.display()))?;
            if let Some(side) = side {
                write_json(sidecar_path(out), &side)?;
            }
        }
        None => emit(&format!("{}\n", serde_json::to_string(&tensor_to_json(&tensor))?))?,
    }
    Ok(())
}

fn write_trace(path: Option<&Path>, trace: &FitTrace) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, trace.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn fit(path: &Path, rank: usize, run: &RunArgs, restarts: usize) -> Result<()> {
    let a = load(path)?.to_f64();
    let opts = AlsOptions {
        rank,
        seed: run.seed,
        max_iter: run.max_iter,
        tol: run.tol,
    };
    let (model, trace) = if restarts > 1 { best_of_restarts(&a, &opts, restarts)? } else { als_cp(&a, &opts)? };
    write_trace(run.trace.as_deref(), &trace)?;
    let report = degeneracy_report(&trace, a.norm())?;
    print_json(&json!({
        "model": model.to_json(),
        "residual": trace.final_residual(),
        "iterations": trace.len() - 1,
        "degeneracy": report,
    }))
}

fn approximant_report(b: &Tensor) -> Result<Value> {
    Ok(classify_general(b, DEFAULT_RANK_TOL)?.to_json())
}

fn weak2(path: &Path, run: &RunArgs, restarts: usize) -> Result<()> {
    let a = load(path)?.to_f64();
    let opts = WeakOptions {
        seed: run.seed,
        restarts,
        max_iter: run.max_iter,
        tol: run.tol,
    };
    let w = weak_rank2(&a, &opts)?;
    write_trace(run.trace.as_deref(), &w.trace)?;
    print_json(&json!({
        "model": w.model.to_json(),
        "residual": w.residual,
        "two_term_residual": w.two_term_residual,
        "three_term_residual": w.three_term_residual,
        "approximant": approximant_report(&w.model.evaluate())?,
    }))
}

fn divergence(a: &Path, b: &Path) -> Result<()> {
    let (a, b) = (load(a)?.to_f64(), load(b)?.to_f64());
    print_json(&json!({
        "generator": "half squared Frobenius norm",
        "d_ab": bregman(&a, &b, &SquaredFrobenius)?,
        "d_ba": bregman(&b, &a, &SquaredFrobenius)?,
    }))
}

fn degeneracy_demo(seed: u64, max_iter: usize, trace_path: Option<&Path>) -> Result<()> {
    let a = OrbitClass::G3.canonical::<f64>();
    let opts = AlsOptions { rank: 2, seed, max_iter, tol: 0.0 };
    let (_, trace) = als_cp(&a, &opts)?;
    write_trace(trace_path, &trace)?;
    let mut marks: Vec<usize> = std::iter::successors(Some(1usize), |i| i.checked_mul(10))
        .take_while(|&i| i < trace.len())
        .collect();
    marks.insert(0, 0);
    marks.push(trace.len() - 1);
    marks.dedup();
    let checkpoints: Vec<Value> = marks
        .iter()
        .map(|&i| {
            let r = &trace.records[i];
            json!({
                "iter": r.iter,
                "residual": r.residual,
                "max_lambda": r.lambdas.iter().cloned().fold(0.0, f64::max),
                "cosines": r.cosines,
            })
        })
        .collect();
    let weak = weak_rank2(&a, &WeakOptions { seed, ..Default::default() })?;
    print_json(&json!({
        "target": "G3",
        "norm": a.norm(),
        "checkpoints": checkpoints,
        "report": degeneracy_report(&trace, a.norm())?,
        "weak_rank2": {
            "residual": weak.residual,
            "approximant": approximant_report(&weak.model.evaluate())?,
        },
    }))
}
