//! `semclust` command-line front end.
//!
//! Exit status: 0 success, 1 usage or validation error, 2 dataset load
//! error, 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semclust::cluster::{ClusterOptions, ClusterRecord, InconclusivePolicy};
use semclust::eval::{
    cluster_problem, evaluate_scores, load_dataset, score_dataset, top_correctness, EvaluateOptions, ScoreOptions,
};
use semclust::interp::{evaluate, inputs_from_json};
use semclust::lang::{parse_source, Program, ValidationVerdict};
use semclust::metrics::{Metric, ProbabilityMode};
use semclust::symexec::{brute_force_equivalence, check_equivalence, EquivConfig, ExecCaps, InputDomain};
use semclust::Error;

#[derive(Parser)]
#[command(name = "semclust", version, about = "Symbolic clustering and uncertainty scoring for candidate programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program on one input and print its outcome
    Run {
        file: PathBuf,
        /// Arguments as a JSON array, e.g. "[3]" or "[[1,2]]"
        #[arg(long, default_value = "[]")]
        input: String,
        /// Step budget for the run
        #[arg(long = "step-budget", alias = "budget", default_value_t = 1_000_000)]
        step_budget: u64,
    },
    /// Check two programs for bounded equivalence
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = EquivMode::Symbolic)]
        mode: EquivMode,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Cluster the responses of every problem in a dataset
    Cluster {
        dataset: PathBuf,
        /// Cluster follow-up responses as well as initial ones
        #[arg(long)]
        with_followups: bool,
        #[command(flatten)]
        bounds: Bounds,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score every problem of a dataset with one uncertainty metric
    Score {
        dataset: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Score, correlate with correctness, and fit an abstention policy
    Evaluate {
        dataset: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
        /// A response counts as correct when its pass rate exceeds this
        #[arg(long, default_value_t = 0.9)]
        correctness_threshold: f64,
        /// Cross-validation folds
        #[arg(long, default_value_t = 2)]
        folds: usize,
        /// Also fit a policy per difficulty class
        #[arg(long)]
        per_class: bool,
    },
    /// Print the test pass rate of each problem's top-ranked response
    Correctness {
        dataset: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        step_budget: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EquivMode {
    Symbolic,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Merge,
    Separate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProbArg {
    LengthNormalized,
    Raw,
}

#[derive(Args, Clone)]
struct Bounds {
    /// Scalar integers range over [-B, B]
    #[arg(long, default_value_t = 8)]
    int_bound: u32,
    /// Arrays have length 0..=L
    #[arg(long, default_value_t = 4)]
    max_array_len: u32,
    /// Array elements range over [-E, E]
    #[arg(long, default_value_t = 4)]
    elem_bound: u32,
    /// Loop iterations explored per loop entry
    #[arg(long, default_value_t = 32)]
    unroll_cap: u32,
    /// Maximum paths per program
    #[arg(long, default_value_t = 4096)]
    trace_cap: usize,
    /// Wall-clock budget per equivalence check
    #[arg(long, default_value_t = 10_000)]
    pair_timeout_ms: u64,
    /// Interpreter step budget
    #[arg(long, default_value_t = 1_000_000)]
    step_budget: u64,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Whether an inconclusive pair joins a cluster
    #[arg(long, value_enum, default_value_t = PolicyArg::Merge)]
    inconclusive_policy: PolicyArg,
    /// Concurrent problems [default: available parallelism]
    #[arg(long)]
    jobs: Option<usize>,
    /// Report path [default: next to the dataset]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Scoring {
    /// se-norm, se-uniform, mi-norm, mi-uniform, cc or llm-prob
    #[arg(long, default_value = "se-uniform")]
    metric: String,
    /// How llm-prob turns log-probabilities into a probability
    #[arg(long, value_enum, default_value_t = ProbArg::LengthNormalized)]
    mode: ProbArg,
    /// MI stabilization parameter (both terms)
    #[arg(long, default_value_t = 1e-10)]
    gamma: f64,
    /// Seed for all randomness
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    bounds: Bounds,
    #[command(flatten)]
    run: RunArgs,
}

impl Bounds {
    fn config(&self) -> EquivConfig {
        EquivConfig {
            domain: InputDomain {
                int_bound: self.int_bound,
                max_array_len: self.max_array_len,
                array_elem_bound: self.elem_bound,
            },
            caps: ExecCaps {
                unroll_cap: self.unroll_cap,
                trace_cap: self.trace_cap,
            },
            time_budget: Duration::from_millis(self.pair_timeout_ms),
            step_budget: self.step_budget,
        }
    }
}

impl RunArgs {
    fn cluster_options(&self, bounds: &Bounds) -> ClusterOptions {
        ClusterOptions {
            equiv: bounds.config(),
            policy: match self.inconclusive_policy {
                PolicyArg::Merge => InconclusivePolicy::Merge,
                PolicyArg::Separate => InconclusivePolicy::Separate,
            },
            signature: None,
        }
    }

    fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    fn out_path(&self, dataset: &Path, suffix: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let stem = dataset.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
            dataset.with_file_name(format!("{stem}.{suffix}.json"))
        })
    }
}

impl Scoring {
    fn options(&self) -> Result<ScoreOptions, Error> {
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::Usage("--gamma must be positive".into()));
        }
        Ok(ScoreOptions {
            metric: self.metric.parse::<Metric>()?,
            cluster: self.run.cluster_options(&self.bounds),
            probability_mode: match self.mode {
                ProbArg::LengthNormalized => ProbabilityMode::LengthNormalized,
                ProbArg::Raw => ProbabilityMode::Raw,
            },
            gamma: self.gamma,
            step_budget: self.bounds.step_budget,
            jobs: self.run.jobs(),
        })
    }
}

fn load_program(path: &Path) -> Result<Program, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    match parse_source(&text) {
        ValidationVerdict::Valid(p) => Ok(p),
        ValidationVerdict::Invalid(why) => Err(Error::Usage(format!("{}:{why}", path.display()))),
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run {
            file,
            input,
            step_budget,
        } => {
            let p = load_program(&file)?;
            let json: serde_json::Value =
                serde_json::from_str(&input).map_err(|e| Error::Usage(format!("--input is not JSON: {e}")))?;
            let inputs = inputs_from_json(&json, &p.param_types()).map_err(|e| Error::Usage(format!("--input: {e}")))?;
            println!("{}", evaluate(&p, &inputs, step_budget)?);
        }
        Command::Equiv { a, b, mode, bounds } => {
            let (p, q) = (load_program(&a)?, load_program(&b)?);
            let cfg = bounds.config();
            let verdict = match mode {
                EquivMode::Symbolic => check_equivalence(&p, &q, &cfg)?,
                EquivMode::Brute => brute_force_equivalence(&p, &q, cfg.domain, cfg.step_budget)?,
            };
            println!("{verdict}");
        }
        Command::Cluster {
            dataset,
            with_followups,
            bounds,
            run,
        } => {
            let problems = load_dataset(&dataset)?;
            let opts = run.cluster_options(&bounds);
            let metric = if with_followups { Metric::MiNorm } else { Metric::SeUniform };
            let mut records = Vec::with_capacity(problems.len());
            for rec in &problems {
                let c = cluster_problem(rec, metric, &opts)?;
                println!("{}: {} cluster(s) {:?}", rec.id, c.clusters.len(), c.clusters);
                records.push(ClusterRecord::new(&rec.id, &c));
            }
            let out = run.out_path(&dataset, "clusters");
            write_json(&out, &records)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Score { dataset, scoring } => {
            let problems = load_dataset(&dataset)?;
            let opts = scoring.options()?;
            let report = score_dataset(&problems, &opts)?;
            for p in &report.problems {
                println!("{}\t{}\t{}", p.problem_id, p.score, p.cluster_count);
            }
            let out = scoring.run.out_path(&dataset, &format!("{}.score", opts.metric));
            write_json(&out, &report)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Evaluate {
            dataset,
            scoring,
            correctness_threshold,
            folds,
            per_class,
        } => {
            let problems = load_dataset(&dataset)?;
            let opts = scoring.options()?;
            if folds < 2 {
                return Err(Error::Usage(format!("--folds must be at least 2, got {folds}")));
            }
            let eval_opts = EvaluateOptions {
                correctness_threshold,
                folds,
                seed: scoring.seed,
                per_class,
            };
            let report = evaluate_scores(score_dataset(&problems, &opts)?, opts.metric, &eval_opts)?;
            let s = &report.summary;
            println!("metric {} n {}", s.metric, s.n);
            println!("pearson r {:.6} p {:.6}", s.r, s.p_value);
            let a = &s.abstention;
            println!(
                "abstention threshold {:.6} accuracy {:.4} fp {:.4} fn {:.4} ({} folds, seed {}, {} samples)",
                a.threshold, a.accuracy, a.false_positive_rate, a.false_negative_rate, a.folds, a.seed, a.samples
            );
            let out = scoring.run.out_path(&dataset, &format!("{}.evaluation", opts.metric));
            write_json(&out, &report)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Correctness { dataset, step_budget } => {
            for rec in &load_dataset(&dataset)? {
                println!("{}\t{}", rec.id, top_correctness(rec, step_budget)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| execute(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Err(_) => ExitCode::from(3),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage(_) | Error::Degenerate(_) | Error::UndefinedCorrelation(_) => 1,
                Error::Load { .. } => 2,
                Error::Io(_) => 3,
            })
        }
    }
}
