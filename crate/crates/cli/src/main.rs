use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use gmusic_core::baselines::{alternating_projection, AltProjConfig};
use gmusic_core::cmat::{format_cmat, read_cmat, read_vector, write_cmat, write_vector};
use gmusic_core::estimators::{fourier_subspace_estimate, hankel_estimate, toeplitz_estimate, RankChoice};
use gmusic_core::harness::{
    generate_instance, preset, run_bench, to_markdown, write_csv, Observation, ProblemKind,
    ProblemSpec, TrialConfig,
};
use gmusic_core::linalg::{
    hankel_from_params, reverse_columns, singular_values, toeplitz_from_params, ComplexMatrix,
    HankelMatrix,
};
use gmusic_core::music::{detect_rank, GradientMusicConfig, DEFAULT_RANK_THETA};
use gmusic_core::torus::matching_distance_inf;
use gmusic_core::{Error, FrequencySet, Parallelism, SpectralParams, C64};

#[derive(Parser)]
#[command(name = "gmusic", version, about = "Gradient-MUSIC structured low-rank approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Low-rank Toeplitz (or Hankel) approximation of a CMAT matrix.
    Approx(ApproxArgs),
    /// Fourier subspace estimate from a single signal.
    Subspace(SubspaceArgs),
    /// Run a benchmark preset and write CSV and markdown reports.
    Bench(BenchArgs),
    /// Write a random noisy instance plus a ground-truth sidecar.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RankArgs {
    /// Model order.
    #[arg(long, conflicts_with = "auto_rank", required_unless_present = "auto_rank")]
    rank: Option<usize>,
    /// Detect the model order from the singular values.
    #[arg(long)]
    auto_rank: bool,
    /// Threshold for --auto-rank, relative to the expected signal scale.
    #[arg(long, default_value_t = DEFAULT_RANK_THETA, requires = "auto_rank")]
    theta: f64,
}

impl RankArgs {
    fn choice(&self) -> RankChoice {
        match self.rank {
            Some(r) => RankChoice::Fixed(r),
            None => RankChoice::Auto { theta: self.theta },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gmusic,
    Altproj,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Structure {
    Toeplitz,
    Hankel,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    rank: RankArgs,
    #[arg(long, value_enum, default_value = "gmusic")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "toeplitz")]
    structure: Structure,
    /// Ground-truth sidecar written by `generate`; adds errors to the output.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SubspaceArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    rank: RankArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// table1, table2, scaling-toeplitz or scaling-subspace.
    #[arg(long)]
    preset: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Run trials one after another even when built with rayon.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    md: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Toeplitz,
    Hankel,
    Subspace,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 4.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CMAT file for matrix kinds, vector file for `subspace`. The ground
    /// truth goes to `<out>.truth.json`.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Estimation(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidArgument(_) | Error::Identifiability { .. } => Failure::Usage(msg),
            Error::Parse { .. } | Error::Io(_) | Error::Csv(_) => Failure::Io(msg),
            _ => Failure::Estimation(msg),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

type Pair = [f64; 2];

fn pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Serialize, Deserialize)]
struct Truth {
    kind: String,
    n: usize,
    r: usize,
    beta: f64,
    sigma: f64,
    seed: u64,
    x: Vec<f64>,
    a: Vec<Pair>,
}

impl Truth {
    fn params(&self) -> Result<SpectralParams, Failure> {
        let a = self.a.iter().map(|p| C64::new(p[0], p[1])).collect();
        Ok(SpectralParams::new(FrequencySet::new(self.x.iter().copied())?, a)?)
    }
}

#[derive(Serialize)]
struct Errors {
    rel_error_fro: f64,
    rel_error_spec: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency_error: Option<f64>,
}

#[derive(Serialize)]
struct ApproxOutput {
    method: &'static str,
    structure: &'static str,
    rank: usize,
    /// Estimated frequencies in radians; absent for alternating projection.
    x_hat: Option<Vec<f64>>,
    a_hat: Option<Vec<Pair>>,
    /// Generating sequence of the output: `t_{-n+1..n-1}` or `h_{0..2n-2}`.
    generator: Vec<Pair>,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    errors: Option<Errors>,
}

#[derive(Serialize)]
struct SubspaceOutput {
    rank: usize,
    x_hat: Vec<f64>,
    /// Orthonormal basis of the estimated subspace, CMAT text.
    basis: String,
    warnings: Vec<String>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn approx(args: &ApproxArgs) -> Result<(), Failure> {
    let m = read_cmat(&args.input)?;
    if !m.is_square() {
        return Err(Failure::Usage(format!("input must be square, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    let truth = match &args.truth {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            let t: Truth = serde_json::from_str(&text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            if t.n != n {
                return Err(Failure::Usage(format!("truth has n = {}, input has n = {n}", t.n)));
            }
            Some(t.params()?)
        }
        None => None,
    };
    let cfg = GradientMusicConfig::default();
    let hankel = args.structure == Structure::Hankel;

    let (out, dense) = match args.method {
        MethodArg::Gmusic if hankel => {
            let est = hankel_estimate(&m, args.rank.choice(), &cfg)?;
            let dense = est.h_hat.dense();
            let out = ApproxOutput {
                method: "gradient-music",
                structure: "hankel",
                rank: est.rank,
                x_hat: Some(est.x_hat.values()),
                a_hat: Some(pairs(&est.a_hat)),
                generator: pairs(est.h_hat.generator()),
                warnings: est.warnings,
                errors: None,
            };
            (out, dense)
        }
        MethodArg::Gmusic => {
            let est = toeplitz_estimate(&m, args.rank.choice(), &cfg)?;
            let dense = est.t_hat.dense();
            let out = ApproxOutput {
                method: "gradient-music",
                structure: "toeplitz",
                rank: est.rank,
                x_hat: Some(est.x_hat.values()),
                a_hat: Some(pairs(&est.a_hat)),
                generator: pairs(est.t_hat.generator()),
                warnings: est.warnings,
                errors: None,
            };
            (out, dense)
        }
        MethodArg::Altproj => {
            let input = if hankel { reverse_columns(&m) } else { m.clone() };
            let r = match args.rank.choice() {
                RankChoice::Fixed(r) => r,
                RankChoice::Auto { theta } => {
                    match detect_rank(&singular_values(&input)?, n as f64, theta) {
                        0 => return Err(Error::NoSignal.into()),
                        r => r,
                    }
                }
            };
            let t = alternating_projection(&input, r, &AltProjConfig::default())?;
            let (dense, gen) = if hankel {
                // T J is Hankel with the same generating sequence
                let h = HankelMatrix::new(n, t.generator().to_vec())?;
                (h.dense(), pairs(h.generator()))
            } else {
                (t.dense(), pairs(t.generator()))
            };
            let out = ApproxOutput {
                method: "alt-proj",
                structure: if hankel { "hankel" } else { "toeplitz" },
                rank: r,
                x_hat: None,
                a_hat: None,
                generator: gen,
                warnings: Vec::new(),
                errors: None,
            };
            (out, dense)
        }
    };

    let mut out = out;
    if let Some(p) = truth {
        let t: ComplexMatrix = if hankel {
            hankel_from_params(n, &p)?.dense()
        } else {
            toeplitz_from_params(n, &p).dense()
        };
        let diff = dense.sub(&t)?;
        let frequency_error = match &out.x_hat {
            Some(x) if x.len() == p.x.len() => {
                Some(matching_distance_inf(&FrequencySet::new(x.iter().copied())?, &p.x)?)
            }
            _ => None,
        };
        out.errors = Some(Errors {
            rel_error_fro: diff.fro_norm() / t.fro_norm(),
            rel_error_spec: diff.spectral_norm()? / t.spectral_norm()?,
            frequency_error,
        });
    }
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    write_json(&args.out, &out)
}

fn subspace(args: &SubspaceArgs) -> Result<(), Failure> {
    let y = read_vector(&args.input)?;
    let est = fourier_subspace_estimate(&y, args.rank.choice(), &GradientMusicConfig::default())?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    let out = SubspaceOutput {
        rank: est.rank,
        x_hat: est.x_hat.values(),
        basis: format_cmat(est.u_hat.matrix()),
        warnings: est.warnings,
    };
    write_json(&args.out, &out)
}

fn bench(args: &BenchArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(Failure::Usage("--trials must be >= 1".into()));
    }
    let p = preset(&args.preset, args.trials, args.seed)?;
    let par = if args.sequential { Parallelism::Sequential } else { Parallelism::Rayon };
    let run = || run_bench(&p.specs, &p.methods, &TrialConfig::default(), par);

    #[cfg(feature = "parallel")]
    let report = match args.threads {
        Some(0) => return Err(Failure::Usage("--threads must be >= 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Failure::Usage(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    #[cfg(not(feature = "parallel"))]
    let report = {
        if args.threads.is_some_and(|k| k > 1) {
            eprintln!("warning: built without the `parallel` feature; --threads ignored");
        }
        run()?
    };

    let file = fs::File::create(&args.csv).map_err(io_err(&args.csv))?;
    write_csv(&report.records, std::io::BufWriter::new(file))?;
    fs::write(&args.md, to_markdown(&report)).map_err(io_err(&args.md))?;

    let mut failed = 0;
    for c in &report.cells {
        println!(
            "{:>14} {:>8} (n,r)=({},{}) avg error {} avg time {}",
            c.method.name(),
            c.kind.name(),
            c.n,
            c.r,
            c.avg_error.map_or("-".into(), |v| format!("{v:.3e}")),
            c.avg_time.map_or("-".into(), |v| format!("{v:.3e} s")),
        );
        for f in &c.failures {
            eprintln!("  failed {f}");
        }
        failed += c.failures.len();
    }
    if failed > 0 {
        eprintln!("{failed} trials failed; see {}", args.md.display());
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let kind = match args.kind {
        KindArg::Toeplitz => ProblemKind::Toeplitz,
        KindArg::Hankel => ProblemKind::Hankel,
        KindArg::Subspace => ProblemKind::Subspace,
    };
    let spec = ProblemSpec {
        n: args.n,
        r: args.r,
        beta: args.beta,
        sigma: args.sigma,
        trials: 1,
        master_seed: args.seed,
        kind,
    };
    let inst = generate_instance(&spec, args.seed)?;
    match &inst.observation {
        Observation::Toeplitz { observed, .. } | Observation::Hankel { observed, .. } => {
            write_cmat(&args.out, observed)?
        }
        Observation::Subspace { observed, .. } => write_vector(&args.out, observed)?,
    }
    let truth = Truth {
        kind: kind.name().to_owned(),
        n: args.n,
        r: args.r,
        beta: args.beta,
        sigma: args.sigma,
        seed: args.seed,
        x: inst.params.x.values(),
        a: pairs(&inst.params.a),
    };
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".truth.json");
    write_json(Path::new(&sidecar), &truth)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Approx(a) => approx(a),
        Command::Subspace(a) => subspace(a),
        Command::Bench(a) => bench(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Estimation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}
