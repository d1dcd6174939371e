//! Command-line front end for the boostlab experiment harness.

use std::path::PathBuf;
use std::process::ExitCode;

use boostlab::harness::{
    event_e_summary, header_meta_line, parse_seeds, run_experiment, ExperimentConfig, ExperimentKind,
    ExperimentOutcome, OutputFormat,
};
use boostlab::LabError;
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "boostlab", version, about = "Boosting under parallel query budgets: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seeds: `7`, `1,2,3` or an inclusive range `1..50`.
    #[arg(long = "seeds", visible_alias = "seed", default_value = "0")]
    seeds: String,
    /// Output file; the table goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Drop the timestamped header line so reruns are byte-identical.
    #[arg(long)]
    no_header_meta: bool,
    /// Directory for per-run JSON traces.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    /// Extra parameter, `key=value`; comma-separated values form a grid axis.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct BoostArgs {
    /// Weak-learner advantage; comma-separated values form a grid axis (as for every flag below).
    #[arg(long)]
    gamma: Option<String>,
    /// Training-set size; the domain has 2m points.
    #[arg(long)]
    m: Option<String>,
    /// Class-size budget of the finite-class dataset.
    #[arg(long)]
    d: Option<String>,
    /// finite-class, realizable-by-stumps or negated.
    #[arg(long)]
    dataset: Option<String>,
    /// Leave the concept out of the weak learner's class.
    #[arg(long)]
    exclude_concept: bool,
    /// Override the default round count.
    #[arg(long)]
    rounds: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-round sampled boosting.
    SampledBoost {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        boost: BoostArgs,
        #[arg(long)]
        sample_factor: Option<String>,
        #[arg(long)]
        retry_cap: Option<String>,
    },
    /// Fixed-weight AdaBoost, one query per round.
    Adaboost {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        boost: BoostArgs,
    },
    /// Learners against the adversarial weak learner.
    AdversarySim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        d: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        p: Option<String>,
        /// Shrink factor; derived from t and a' when omitted.
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        a_prime: Option<String>,
        #[arg(long)]
        t: Option<String>,
        /// adaboost, subset, constant or singleton.
        #[arg(long)]
        learner: Option<String>,
        #[arg(long)]
        width: Option<String>,
        #[arg(long)]
        subset_size: Option<String>,
        #[arg(long)]
        m_train: Option<String>,
        /// Allow more than 2^d hypotheses.
        #[arg(long)]
        relax_budget: bool,
        /// Write the full adversary state (including the concept) to --trace-dir.
        #[arg(long)]
        dump_state: bool,
    },
    /// Monte-Carlo check of the without-replacement tail bounds.
    TailCheck {
        #[command(flatten)]
        common: Common,
        /// bernoulli or even.
        #[arg(long)]
        population: Option<String>,
        #[arg(long)]
        pop_size: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        /// lower or upper.
        #[arg(long)]
        side: Option<String>,
        #[arg(long)]
        trials: Option<String>,
    },
    /// Generalization-bound calculators.
    BoundsTable {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        d: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        constant: Option<String>,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seeds.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
        #[arg(long)]
        no_header_meta: bool,
    },
}

fn scalar(text: &str) -> Value {
    let text = text.trim();
    if let Ok(v) = text.parse::<u64>() {
        return Value::from(v);
    }
    if let Ok(v) = text.parse::<f64>() {
        return Value::from(v);
    }
    match text {
        "true" => Value::from(true),
        "false" => Value::from(false),
        _ => Value::from(text),
    }
}

/// `a` is a scalar; `a,b,c` is a grid axis.
fn param_value(text: &str) -> Value {
    let items: Vec<Value> = text.split(',').map(scalar).collect();
    if items.len() == 1 {
        items.into_iter().next().unwrap()
    } else {
        Value::Array(items)
    }
}

struct Builder {
    cfg: ExperimentConfig,
}

impl Builder {
    fn new(kind: ExperimentKind, common: &Common) -> Result<Self, LabError> {
        let mut cfg = ExperimentConfig::new(kind, parse_seeds(&common.seeds)?);
        cfg.output.path = common.out.clone();
        cfg.output.format = common.format.parse()?;
        cfg.output.header_meta = !common.no_header_meta;
        cfg.output.trace_dir = common.trace_dir.clone();
        for p in &common.params {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| LabError::InvalidInput(format!("--param expects key=value, got {p:?}")))?;
            cfg.parameters.insert(k.trim().to_string(), param_value(v));
        }
        Ok(Self { cfg })
    }

    fn opt(mut self, key: &str, value: &Option<String>) -> Self {
        if let Some(v) = value {
            self.cfg.parameters.insert(key.to_string(), param_value(v));
        }
        self
    }

    fn flag(mut self, key: &str, on: bool, value: bool) -> Self {
        if on {
            self.cfg.parameters.insert(key.to_string(), Value::from(value));
        }
        self
    }

    fn boost(self, b: &BoostArgs) -> Self {
        self.opt("gamma", &b.gamma)
            .opt("m", &b.m)
            .opt("d", &b.d)
            .opt("dataset", &b.dataset)
            .opt("rounds", &b.rounds)
            .flag("include_concept", b.exclude_concept, false)
    }
}

fn build_config(command: Command) -> Result<ExperimentConfig, LabError> {
    let cfg = match command {
        Command::SampledBoost {
            common,
            boost,
            sample_factor,
            retry_cap,
        } => Builder::new(ExperimentKind::SampledBoost, &common)?
            .boost(&boost)
            .opt("sample_factor", &sample_factor)
            .opt("retry_cap", &retry_cap)
            .cfg,
        Command::Adaboost { common, boost } => Builder::new(ExperimentKind::Adaboost, &common)?.boost(&boost).cfg,
        Command::AdversarySim {
            common,
            m,
            d,
            gamma,
            p,
            beta,
            a_prime,
            t,
            learner,
            width,
            subset_size,
            m_train,
            relax_budget,
            dump_state,
        } => Builder::new(ExperimentKind::AdversarySim, &common)?
            .opt("m", &m)
            .opt("d", &d)
            .opt("gamma", &gamma)
            .opt("p", &p)
            .opt("beta", &beta)
            .opt("a_prime", &a_prime)
            .opt("t", &t)
            .opt("learner", &learner)
            .opt("width", &width)
            .opt("subset_size", &subset_size)
            .opt("m_train", &m_train)
            .flag("relax_budget", relax_budget, true)
            .flag("dump_state", dump_state, true)
            .cfg,
        Command::TailCheck {
            common,
            population,
            pop_size,
            q,
            rho,
            n,
            delta,
            side,
            trials,
        } => {
            let mut b = Builder::new(ExperimentKind::TailCheck, &common)?;
            if b.cfg.parameters.is_empty() {
                // flags refine the default grid rather than replace it
                b.cfg.parameters = boostlab::harness::default_tail_grid();
            }
            b.opt("population", &population)
                .opt("pop_size", &pop_size)
                .opt("q", &q)
                .opt("rho", &rho)
                .opt("n", &n)
                .opt("delta", &delta)
                .opt("side", &side)
                .opt("trials", &trials)
                .cfg
        }
        Command::BoundsTable {
            common,
            d,
            m,
            delta,
            gamma,
            constant,
        } => Builder::new(ExperimentKind::BoundsTable, &common)?
            .opt("d", &d)
            .opt("m", &m)
            .opt("delta", &delta)
            .opt("gamma", &gamma)
            .opt("constant", &constant)
            .cfg,
        Command::Run {
            config,
            seeds,
            out,
            format,
            no_header_meta,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seeds {
                cfg.seeds = parse_seeds(&s)?;
            }
            if out.is_some() {
                cfg.output.path = out;
            }
            if let Some(f) = format {
                cfg.output.format = f.parse()?;
            }
            if no_header_meta {
                cfg.output.header_meta = false;
            }
            cfg
        }
    };
    Ok(cfg)
}

fn print_table(cfg: &ExperimentConfig, outcome: &ExperimentOutcome) -> Result<(), LabError> {
    let text = match cfg.output.format {
        OutputFormat::Csv => {
            let meta = cfg.output.header_meta.then(|| header_meta_line(cfg.kind));
            outcome.table.to_csv(meta.as_deref())?
        }
        OutputFormat::Json => outcome.table.to_json(cfg.kind, None)? + "\n",
    };
    print!("{text}");
    Ok(())
}

fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, LabError> {
    let outcome = run_experiment(cfg)?;
    if cfg.output.path.is_none() {
        print_table(cfg, &outcome)?;
    }
    if cfg.kind == ExperimentKind::AdversarySim {
        for s in event_e_summary(&outcome.table)? {
            eprintln!(
                "cell {}: Pr[E] = {:.3} ({}/{}), 95% CI [{:.3}, {:.3}]",
                s.cell, s.estimate, s.hits, s.trials, s.ci_low, s.ci_high
            );
        }
    }
    if outcome.failures > 0 {
        eprintln!("{} of {} runs failed; see the status column", outcome.failures, outcome.table.rows.len());
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = build_config(cli.command).and_then(|cfg| execute(&cfg));
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e @ LabError::InvalidInput(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
