//! Batch front end over the table generation, evaluation and comparison
//! library. Results go to standard output, diagnostics to standard error.
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

mod evidence;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cptgen::error::{Error, Result};
use cptgen::generate::{
    boundary_limitation, cpt_basis_least_squares, em_cpt, extract_cpt, fit_multinomial_logit,
    logit_predict, mle_cpt, potential_surge, ColumnFix, EmConfig, EmInit,
};
use cptgen::goodness::{
    cpt_euclidean, cpt_kl_divergence, cpt_shift_error, evaluate_cpt, predicted_effects,
};
use cptgen::io::{
    dedup, format_percent, load_cpt, load_observations, read_schema, save_cpt, save_observations,
    write_plot_data, write_report,
};
use cptgen::ProbVector;

use evidence::{infer_effects, parse_evidence};

#[derive(Parser)]
#[command(
    name = "cptgen",
    about = "Generate, evaluate and compare conditional probability tables of converging Bayesian subnets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a table from a training observation file.
    Generate(GenerateArgs),
    /// Score a table against a test observation file.
    Evaluate(EvaluateArgs),
    /// Compare two table files with shift, KL and Euclidean measures.
    Compare(CompareArgs),
    /// Compute effect probabilities from per-parent evidence.
    Infer(InferArgs),
    /// Drop exact duplicate observation rows, keeping first occurrences.
    Dedup(DedupArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Relative-frequency counting (hard evidence, or --rounding).
    Mle,
    /// Expectation-maximisation with fractional evidence.
    Em,
    /// Least-squares basis repaired by boundary limitation.
    RegressLimit,
    /// Least-squares basis repaired by potential surge.
    RegressSurge,
    /// Multinomial logit fit followed by column extraction.
    Logit,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Mle => "mle",
            Method::Em => "em",
            Method::RegressLimit => "regress-limit",
            Method::RegressSurge => "regress-surge",
            Method::Logit => "logit",
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Training observation CSV.
    #[arg(long)]
    train: PathBuf,
    /// Output table file.
    #[arg(long)]
    out: PathBuf,
    /// Input validation tolerance for probability rows.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Deduplicate the training rows before fitting.
    #[arg(long)]
    distinct: bool,
    /// Round soft rows to their most probable state for counting (mle).
    #[arg(long)]
    rounding: bool,
    /// Log-likelihood convergence threshold (em).
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Iteration cap; defaults to 1000 for em and 100 for logit.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Seed for random restarts (em); without it initialisation is uniform.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of em restarts, best final log-likelihood wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Ridge added to the least-squares normal matrix (regress-*).
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Ridge on the non-intercept logit coefficients.
    #[arg(long, default_value_t = 1e-8)]
    reg: f64,
    /// Gradient norm threshold for the logit fit.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Table file to score.
    #[arg(long)]
    cpt: PathBuf,
    /// Test observation CSV.
    #[arg(long)]
    test: PathBuf,
    /// Report file; omit to print the summary only.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-observation error and effect-pair CSVs next to the report.
    #[arg(long, requires = "out")]
    plot_data: bool,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// Reference table file.
    #[arg(long)]
    cpt: PathBuf,
    /// Approximation table file.
    #[arg(long)]
    cpt_b: PathBuf,
    /// Cause weight vector file (one line of comma-separated probabilities)
    /// for the KL and Euclidean measures; defaults to uniform.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct InferArgs {
    /// Table file.
    #[arg(long)]
    cpt: PathBuf,
    /// Evidence per parent, in parent order: `node=state` for hard evidence
    /// or `node=p1,p2,..` for soft evidence. The node name is informational.
    #[arg(long = "evidence", value_name = "NODE=VALUE")]
    evidence: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct DedupArgs {
    /// Observation CSV to deduplicate.
    #[arg(long)]
    train: PathBuf,
    /// Output observation CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            exit_code(&error)
        }
    }
}

fn exit_code(error: &Error) -> ExitCode {
    match error {
        Error::SingularMatrix | Error::NonConvergence { .. } | Error::EmNonConvergence(_) => {
            ExitCode::from(2)
        }
        _ => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Infer(args) => cmd_infer(args),
        Command::Dedup(args) => cmd_dedup(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let schema = read_schema(&args.train)?;
    let mut observations = load_observations(&args.train, &schema, args.tolerance)?;
    if args.distinct {
        observations = dedup(&observations);
    }
    println!("method,{}", args.method.name());
    println!("observations,{}", observations.row_count());

    let mut warning = false;
    let cpt = match args.method {
        Method::Mle => {
            let fit = mle_cpt(&observations, args.rounding)?;
            for &column in &fit.empty_columns {
                println!("fix,{},uniform_unobserved", fit.cpt.cause_labels()[column]);
            }
            fit.cpt
        }
        Method::Em => {
            let config = EmConfig {
                epsilon: args.epsilon,
                max_iterations: args.max_iter.unwrap_or(1000),
                init: args
                    .seed
                    .map(EmInit::SeededRandom)
                    .unwrap_or(EmInit::Uniform),
                restarts: args.restarts,
            };
            match em_cpt(&observations, &config) {
                Ok(fit) => fit.cpt,
                Err(Error::EmNonConvergence(fit)) => {
                    eprintln!(
                        "warning: EM stopped after {} iterations without meeting epsilon {}; writing the best table found",
                        fit.iterations, args.epsilon
                    );
                    warning = true;
                    fit.cpt
                }
                Err(other) => return Err(other),
            }
        }
        Method::RegressLimit | Method::RegressSurge => {
            let basis = cpt_basis_least_squares(&observations, args.ridge)?;
            let repaired = if args.method == Method::RegressLimit {
                boundary_limitation(&basis)
            } else {
                potential_surge(&basis)
            };
            for (column, fix) in &repaired.fixes {
                let kind = match fix {
                    ColumnFix::Clamped => "clamped",
                    ColumnFix::Shifted => "shifted",
                    ColumnFix::Uniform => "uniform",
                };
                println!("fix,{},{kind}", repaired.cpt.cause_labels()[*column]);
            }
            repaired.cpt
        }
        Method::Logit => {
            let model = fit_multinomial_logit(
                &observations,
                args.reg,
                args.max_iter.unwrap_or(100),
                args.tol,
            )?;
            let labels = observations.combined_cause_labels();
            extract_cpt(|x| logit_predict(&model, x), &labels)?
                .with_arity_profile(observations.arity_profile())?
        }
    };
    save_cpt(&cpt, &args.out)?;
    Ok(if warning {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let cpt = load_cpt(&args.cpt)?;
    let schema = read_schema(&args.test)?;
    let test = load_observations(&args.test, &schema, args.tolerance)?;
    let report = evaluate_cpt(&cpt, &test)?;
    println!(
        "diagnostic_goodness,{}",
        format_percent(report.diagnostic_goodness)
    );
    println!(
        "total_average_shift_error,{}",
        format_percent(report.total_average_shift_error)
    );
    if let Some(out) = &args.out {
        write_report(&report, out)?;
        if args.plot_data {
            let predictions = predicted_effects(&cpt, &test)?;
            write_plot_data(&report, test.effect().rows(), &predictions, out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let cpt = load_cpt(&args.cpt)?;
    let other = load_cpt(&args.cpt_b)?;
    let weights = match &args.weights {
        Some(path) => load_weights(path, cpt.cause_labels(), args.tolerance)?,
        None => ProbVector::uniform(cpt.cause_labels().to_vec())?,
    };
    println!("shift,{}", format_percent(cpt_shift_error(&cpt, &other)?));
    println!(
        "kl,{}",
        format_measure(cpt_kl_divergence(&cpt, &other, &weights)?)
    );
    println!(
        "euclidean,{}",
        format_measure(cpt_euclidean(&cpt, &other, &weights)?)
    );
    Ok(ExitCode::SUCCESS)
}

fn format_measure(value: f64) -> String {
    if value.is_infinite() {
        "inf".into()
    } else {
        format!("{value:.6}")
    }
}

fn load_weights(path: &PathBuf, cause_labels: &[String], tolerance: f64) -> Result<ProbVector> {
    let content = std::fs::read_to_string(path)?;
    let line = content.lines().next().unwrap_or("");
    let values: Vec<f64> = line
        .split(',')
        .map(|field| {
            field.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: path.clone(),
                line: 1,
                reason: format!("cannot parse weight {field:?}"),
            })
        })
        .collect::<Result<_>>()?;
    if values.len() != cause_labels.len() {
        return Err(Error::Dimension {
            what: "weight vector vs cause states",
            expected: cause_labels.len(),
            actual: values.len(),
        });
    }
    ProbVector::new(cause_labels.to_vec(), values, tolerance)
}

fn cmd_infer(args: InferArgs) -> Result<ExitCode> {
    let cpt = load_cpt(&args.cpt)?;
    let evidence = args
        .evidence
        .iter()
        .map(|arg| parse_evidence(arg))
        .collect::<Result<Vec<_>>>()?;
    let effects = infer_effects(&cpt, &evidence, args.tolerance)?;
    let line: Vec<String> = effects
        .values()
        .iter()
        .map(|&v| format_percent(v))
        .collect();
    println!("{}", line.join(","));
    Ok(ExitCode::SUCCESS)
}

fn cmd_dedup(args: DedupArgs) -> Result<ExitCode> {
    let schema = read_schema(&args.train)?;
    let observations = load_observations(&args.train, &schema, args.tolerance)?;
    let distinct = dedup(&observations);
    println!("observations,{}", observations.row_count());
    println!("distinct,{}", distinct.row_count());
    save_observations(&distinct, &args.out)?;
    Ok(ExitCode::SUCCESS)
}
