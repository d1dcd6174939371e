use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind, GridCell, OutputFormat};
use super::datasets::{synthesize_dataset, DatasetKind, DatasetSpec};
use super::output::{header_meta_line, Table};
use super::params::ParamReader;
use crate::adversary::{
    beta_from_params, run_trial, AdversaryParams, ConstantLearner, LearnerUnderTest, SingletonProber, SubsetProber,
    TruncatedAdaBoost,
};
use crate::boosters::{
    adaboost_fixed, contraction_bound, default_round_count, exponential_loss_identity_check, nominal_query_count,
    sampled_boost, BoostConfig, BoostRun,
};
use crate::error::{LabError, Result};
use crate::domain::{Label, TrainingSet};
use crate::ledger::{OracleSession, ParallelBudget};
use crate::record::ExperimentRecord;
use crate::rng::{derive_seed, derive_seed_str};
use crate::stats::{
    adaboost_generalization_bound, breiman_min_margin_bound, monte_carlo_tail_estimate, wilson_interval,
    without_replacement_tail_bound, Population, Tail,
};

type Metrics = Vec<(&'static str, Value)>;

const BOOST_COLUMNS: &[&str] = &[
    "rounds_run",
    "sample_size",
    "min_margin",
    "margin_target",
    "margin_ok",
    "identity_deviation",
    "max_z",
    "z_bound",
    "z_ok",
    "max_error",
    "total_redraws",
    "ledger_p",
    "ledger_t",
    "log10_nominal_queries",
    "training_error",
    "test_error",
];

const ADVERSARY_COLUMNS: &[&str] = &[
    "event_E",
    "test_error",
    "error_on_hidden",
    "hidden_size",
    "rounds_used",
    "max_width",
];

const TAIL_COLUMNS: &[&str] = &[
    "mu",
    "threshold",
    "analytic_bound",
    "empirical",
    "hits",
    "ci_low",
    "ci_high",
    "checked",
    "pass",
];

const BOUNDS_COLUMNS: &[&str] = &[
    "adaboost_bound",
    "breiman_at_gamma",
    "breiman_at_gamma_over_16",
    "adaboost_vacuous",
    "breiman_at_gamma_over_16_vacuous",
];

#[derive(Clone, Debug)]
struct BoostCell {
    dataset: DatasetSpec,
    sample_factor: f64,
    rounds: Option<usize>,
    retry_cap: usize,
}

#[derive(Clone, Debug)]
enum LearnerSpec {
    Adaboost,
    Subset { width: u64, subset_size: usize },
    Constant,
    Singleton,
}

#[derive(Clone, Debug)]
struct AdversaryCell {
    params: AdversaryParams,
    learner: LearnerSpec,
    /// Declared query width, enforced during the trial.
    t: u64,
    m_train: usize,
    dump_state: bool,
}

#[derive(Clone, Debug)]
struct TailCell {
    population: Population,
    n: usize,
    delta: f64,
    side: Tail,
    trials: u64,
}

#[derive(Clone, Debug)]
struct BoundsCell {
    d: u64,
    m: u64,
    delta: f64,
    gamma: f64,
    constant: f64,
}

#[derive(Clone, Debug)]
enum CellSpec {
    Boost(BoostCell),
    Adversary(AdversaryCell),
    Tail(TailCell),
    Bounds(BoundsCell),
}

fn dataset_params(r: &mut ParamReader<'_>) -> Result<DatasetSpec> {
    let kind: DatasetKind = r.string("dataset", "finite-class")?.parse()?;
    let spec = DatasetSpec {
        kind,
        m: r.usize("m", 50)?,
        d: r.u32("d", 5)?,
        gamma: r.f64("gamma", 0.2)?,
        include_concept: r.bool("include_concept", true)?,
    };
    spec.validate()?;
    Ok(spec)
}

impl LearnerSpec {
    fn build(&self, p: usize) -> Box<dyn LearnerUnderTest> {
        match *self {
            LearnerSpec::Adaboost => Box::new(TruncatedAdaBoost { rounds: p }),
            LearnerSpec::Subset { width, subset_size } => Box::new(SubsetProber {
                rounds: p,
                width,
                subset_size,
            }),
            LearnerSpec::Constant => Box::new(ConstantLearner::default()),
            LearnerSpec::Singleton => Box::new(SingletonProber),
        }
    }
}

fn parse_cell(kind: ExperimentKind, cell: &GridCell) -> Result<(CellSpec, Vec<(String, Value)>)> {
    let mut r = ParamReader::new(&cell.values);
    let spec = match kind {
        ExperimentKind::SampledBoost => {
            let dataset = dataset_params(&mut r)?;
            let cell = BoostCell {
                dataset,
                sample_factor: r.f64("sample_factor", 4.0)?,
                rounds: r.opt_usize("rounds")?,
                retry_cap: r.usize("retry_cap", 1000)?,
            };
            boost_config(&cell, 0)?.validate()?;
            CellSpec::Boost(cell)
        }
        ExperimentKind::Adaboost => {
            let dataset = dataset_params(&mut r)?;
            let rounds = r.opt_usize("rounds")?;
            if rounds == Some(0) {
                return Err(LabError::InvalidInput("rounds must be at least 1".into()));
            }
            CellSpec::Boost(BoostCell {
                dataset,
                sample_factor: 0.0,
                rounds,
                retry_cap: 0,
            })
        }
        ExperimentKind::AdversarySim => {
            let m = r.usize("m", 256)?;
            let d = r.u32("d", 4)?;
            let gamma = r.f64("gamma", 0.05)?;
            let p = r.usize("p", 1)?;
            let learner = match r.string("learner", "adaboost")?.as_str() {
                "adaboost" => LearnerSpec::Adaboost,
                "subset" => LearnerSpec::Subset {
                    width: r.u64("width", 1)?,
                    subset_size: r.usize("subset_size", 2)?,
                },
                "constant" => LearnerSpec::Constant,
                "singleton" => LearnerSpec::Singleton,
                other => return Err(LabError::InvalidInput(format!("unknown learner {other:?}"))),
            };
            // width/subset_size are recorded for every learner so columns line up
            if !matches!(learner, LearnerSpec::Subset { .. }) {
                r.u64("width", 1)?;
                r.usize("subset_size", 2)?;
            }
            let declared = learner.build(p).budget(2 * m);
            let t = r.u64("t", declared.width.max(1))?;
            let a_prime = r.f64("a_prime", 4.0)?;
            let beta = match r.opt_f64("beta")? {
                Some(beta) => beta,
                None => beta_from_params(gamma, d, t, p, a_prime),
            };
            r.set("beta", Value::from(beta));
            let relax = r.bool("relax_budget", false)?;
            let m_train = r.usize("m_train", m)?;
            let dump_state = r.bool("dump_state", false)?;
            let mut params = AdversaryParams {
                m,
                d,
                gamma,
                p,
                beta,
                enforce_hypothesis_budget: !relax,
            };
            params.validate()?;
            if relax {
                params = params.relax_hypothesis_budget();
            }
            if m_train == 0 {
                return Err(LabError::InvalidInput("m_train must be at least 1".into()));
            }
            if let LearnerSpec::Subset { subset_size: 0, .. } = learner {
                return Err(LabError::InvalidInput("subset_size must be positive".into()));
            }
            CellSpec::Adversary(AdversaryCell {
                params,
                learner,
                t,
                m_train,
                dump_state,
            })
        }
        ExperimentKind::TailCheck => {
            let kind = r.string("population", "bernoulli")?;
            let size = r.usize("pop_size", 200)?;
            let q = r.f64("q", 0.3)?;
            let rho = r.f64("rho", 1.0)?;
            let n = r.usize("n", 20)?;
            let delta = r.f64("delta", 0.3)?;
            let side = match r.string("side", "lower")?.as_str() {
                "lower" => Tail::Lower,
                "upper" => Tail::Upper,
                other => return Err(LabError::InvalidInput(format!("unknown tail side {other:?}"))),
            };
            let trials = r.u64("trials", 100_000)?;
            if size < 2 || !(0.0..=1.0).contains(&q) || !(rho > 0.0) {
                return Err(LabError::InvalidInput("need pop_size >= 2, q in [0, 1], rho > 0".into()));
            }
            let values: Vec<f64> = match kind.as_str() {
                // exactly round(q N) members carry the maximal value 1/rho
                "bernoulli" => {
                    let ones = (q * size as f64).round() as usize;
                    (0..size).map(|i| if i < ones { 1.0 / rho } else { 0.0 }).collect()
                }
                "even" => (0..size).map(|i| i as f64 / ((size - 1) as f64 * rho)).collect(),
                other => return Err(LabError::InvalidInput(format!("unknown population {other:?}"))),
            };
            let population = Population::new(values, rho)?;
            if trials == 0 {
                return Err(LabError::InvalidInput("trials must be at least 1".into()));
            }
            let mu = population.expected_sum(n);
            without_replacement_tail_bound(&population, n, delta, mu, side)?;
            CellSpec::Tail(TailCell {
                population,
                n,
                delta,
                side,
                trials,
            })
        }
        ExperimentKind::BoundsTable => {
            let cell = BoundsCell {
                d: r.u64("d", 5)?,
                m: r.u64("m", 1000)?,
                delta: r.f64("delta", 0.05)?,
                gamma: r.f64("gamma", 0.1)?,
                constant: r.f64("constant", 1.0)?,
            };
            adaboost_generalization_bound(cell.d, cell.m, cell.delta, cell.gamma, cell.constant)?;
            CellSpec::Bounds(cell)
        }
    };
    Ok((spec, r.finish()?))
}

fn boost_config(cell: &BoostCell, seed: u64) -> Result<BoostConfig> {
    Ok(BoostConfig {
        gamma: cell.dataset.gamma,
        vc_dim: cell.dataset.vc_dim(),
        sample_factor: cell.sample_factor,
        rounds: cell.rounds,
        retry_cap: cell.retry_cap,
        seed,
        record_query_keys: false,
    })
}

struct Job<'a> {
    cell: &'a GridCell,
    spec: &'a CellSpec,
    seed: u64,
}

impl Job<'_> {
    fn sub_seed(&self) -> u64 {
        derive_seed_str(self.seed, &self.cell.key)
    }

    fn trace_path(&self, dir: &Path, suffix: &str) -> PathBuf {
        dir.join(format!("cell{:04}-seed{}{suffix}.json", self.cell.index, self.seed))
    }
}

fn run_boost(job: &Job<'_>, cell: &BoostCell, sequential: bool, trace_dir: Option<&Path>) -> Result<Metrics> {
    let seed = job.sub_seed();
    let ds = synthesize_dataset(&cell.dataset, derive_seed(seed, &[0]))?;
    let gamma = cell.dataset.gamma;
    let mut session = OracleSession::new(&ds.oracle);
    let (run, n): (BoostRun, Option<usize>) = if sequential {
        let rounds = match cell.rounds {
            Some(k) => k,
            None => default_round_count(gamma, ds.sample.len())?,
        };
        (adaboost_fixed(&ds.sample, &mut session, gamma, rounds, derive_seed(seed, &[1]))?, None)
    } else {
        let mut cfg = boost_config(cell, derive_seed(seed, &[1]))?;
        cfg.record_query_keys = trace_dir.is_some();
        let n = cfg.sample_size()?;
        (sampled_boost(&ds.sample, &mut session, &cfg)?, Some(n))
    };
    let ledger = session.into_ledger();
    let deviation = exponential_loss_identity_check(&run.trace, &run.classifier, &ds.sample)?;
    let min_margin = run.trace.margins.min_margin;
    let target = gamma / 16.0;
    let z_bound = contraction_bound(gamma);
    let max_z = run.trace.max_z();
    let domain = ds.concept.len();
    let wrong = (0..domain).filter(|&x| run.classifier.predict(x) != ds.concept.label(x)).count();
    let nominal = match n {
        Some(n) => Value::from(nominal_query_count(ds.sample.len() as u64, n as u64)?.log10_multisets()),
        None => Value::Null,
    };
    if let Some(dir) = trace_dir {
        let record = ExperimentRecord::new(
            ds.concept.clone(),
            ds.sample.clone(),
            ds.oracle.class().iter().map(|h| (**h).clone()).collect(),
            ledger.clone(),
        );
        let doc = json!({ "trace": run.trace, "record": record });
        std::fs::write(job.trace_path(dir, ""), serde_json::to_string(&doc).map_err(|e| LabError::Io(e.to_string()))?)?;
    }
    Ok(vec![
        ("rounds_run", Value::from(run.classifier.len())),
        ("sample_size", n.map_or(Value::Null, Value::from)),
        ("min_margin", Value::from(min_margin)),
        ("margin_target", Value::from(target)),
        ("margin_ok", Value::from(min_margin >= target)),
        ("identity_deviation", Value::from(deviation)),
        ("max_z", Value::from(max_z)),
        ("z_bound", Value::from(z_bound)),
        ("z_ok", Value::from(max_z <= z_bound + 1e-12)),
        ("max_error", Value::from(run.trace.max_error())),
        ("total_redraws", Value::from(run.trace.total_redraws())),
        ("ledger_p", Value::from(ledger.p())),
        ("ledger_t", Value::from(ledger.t())),
        ("log10_nominal_queries", nominal),
        ("training_error", Value::from(run.classifier.training_error(&ds.sample))),
        ("test_error", Value::from(wrong as f64 / domain as f64)),
    ])
}

/// A learner held to a declared query width `t` instead of its own.
struct Declared {
    inner: Box<dyn LearnerUnderTest>,
    width: u64,
}

impl LearnerUnderTest for Declared {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn budget(&self, domain_size: usize) -> ParallelBudget {
        ParallelBudget::new(self.inner.budget(domain_size).rounds, self.width)
    }

    fn learn(
        &self,
        sample: &TrainingSet,
        domain_size: usize,
        session: &mut OracleSession<'_>,
        seed: u64,
    ) -> Result<Vec<Label>> {
        self.inner.learn(sample, domain_size, session, seed)
    }
}

fn run_adversary(job: &Job<'_>, cell: &AdversaryCell, trace_dir: Option<&Path>) -> Result<Metrics> {
    let learner = Declared {
        inner: cell.learner.build(cell.params.p),
        width: cell.t,
    };
    let (record, state) = run_trial(&cell.params, &learner, cell.m_train, job.sub_seed())?;
    if cell.dump_state {
        if let Some(dir) = trace_dir {
            let dump = serde_json::to_string(&state.dump()).map_err(|e| LabError::Io(e.to_string()))?;
            std::fs::write(job.trace_path(dir, "-adversary"), dump)?;
        }
    }
    Ok(vec![
        ("event_E", Value::from(record.event_e)),
        ("test_error", Value::from(record.test_error)),
        ("error_on_hidden", record.error_on_hidden.map_or(Value::Null, Value::from)),
        ("hidden_size", Value::from(record.hidden_size)),
        ("rounds_used", Value::from(record.rounds_used)),
        ("max_width", Value::from(record.max_width)),
    ])
}

fn run_tail(job: &Job<'_>, cell: &TailCell) -> Result<Metrics> {
    let mu = cell.population.expected_sum(cell.n);
    let bound = without_replacement_tail_bound(&cell.population, cell.n, cell.delta, mu, cell.side)?;
    let threshold = match cell.side {
        Tail::Lower => (1.0 - cell.delta) * mu,
        Tail::Upper => (1.0 + cell.delta) * mu,
    };
    let est = monte_carlo_tail_estimate(&cell.population, cell.n, threshold, cell.side, cell.trials, job.sub_seed())?;
    let checked = bound >= f64::max(1e-3, 10.0 / cell.trials as f64);
    Ok(vec![
        ("mu", Value::from(mu)),
        ("threshold", Value::from(threshold)),
        ("analytic_bound", Value::from(bound)),
        ("empirical", Value::from(est.estimate)),
        ("hits", Value::from(est.hits)),
        ("ci_low", Value::from(est.ci_low)),
        ("ci_high", Value::from(est.ci_high)),
        ("checked", Value::from(checked)),
        ("pass", Value::from(est.ci_high <= bound)),
    ])
}

fn run_bounds(cell: &BoundsCell) -> Result<Metrics> {
    let ada = adaboost_generalization_bound(cell.d, cell.m, cell.delta, cell.gamma, cell.constant)?;
    let at_gamma = breiman_min_margin_bound(cell.d, cell.m, cell.delta, cell.gamma, cell.constant)?;
    let at_sixteenth = breiman_min_margin_bound(cell.d, cell.m, cell.delta, cell.gamma / 16.0, cell.constant)?;
    Ok(vec![
        ("adaboost_bound", Value::from(ada)),
        ("breiman_at_gamma", Value::from(at_gamma)),
        ("breiman_at_gamma_over_16", Value::from(at_sixteenth)),
        ("adaboost_vacuous", Value::from(ada > 1.0)),
        ("breiman_at_gamma_over_16_vacuous", Value::from(at_sixteenth > 1.0)),
    ])
}

fn run_job(job: &Job<'_>, kind: ExperimentKind, trace_dir: Option<&Path>) -> Result<Metrics> {
    match job.spec {
        CellSpec::Boost(cell) => run_boost(job, cell, kind == ExperimentKind::Adaboost, trace_dir),
        CellSpec::Adversary(cell) => run_adversary(job, cell, trace_dir),
        CellSpec::Tail(cell) => run_tail(job, cell),
        CellSpec::Bounds(cell) => run_bounds(cell),
    }
}

fn metric_columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::SampledBoost | ExperimentKind::Adaboost => BOOST_COLUMNS,
        ExperimentKind::AdversarySim => ADVERSARY_COLUMNS,
        ExperimentKind::TailCheck => TAIL_COLUMNS,
        ExperimentKind::BoundsTable => BOUNDS_COLUMNS,
    }
}

/// The table plus how many jobs failed.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub kind: ExperimentKind,
    pub table: Table,
    pub failures: usize,
    pub written: Option<PathBuf>,
}

impl ExperimentOutcome {
    /// 0 when every job succeeded, 3 when some failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            3
        } else {
            0
        }
    }
}

/// Validates every grid cell, runs all `(cell, seed)` jobs and writes the
/// table to the configured path, if any.
///
/// Invalid configurations fail before any job runs. A failing job is
/// recorded in its row (`status` holds the error kind, `detail` the
/// message) and the run continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if cfg.seeds.is_empty() {
        return Err(LabError::InvalidInput("at least one seed is required".into()));
    }
    let grid = cfg.grid()?;
    let mut specs = Vec::with_capacity(grid.len());
    let mut param_columns: Option<Vec<String>> = None;
    for cell in &grid {
        let (spec, resolved) =
            parse_cell(cfg.kind, cell).map_err(|e| match e {
                LabError::InvalidInput(msg) => LabError::InvalidInput(format!("cell {{{}}}: {msg}", cell.key)),
                other => other,
            })?;
        let names: Vec<String> = resolved.iter().map(|(k, _)| k.clone()).collect();
        match &param_columns {
            None => param_columns = Some(names),
            Some(prev) if *prev != names => {
                return Err(LabError::InvalidInput("grid cells resolve to different parameter sets".into()))
            }
            _ => {}
        }
        specs.push((spec, resolved));
    }
    if let CellSpec::Adversary(a) = &specs[0].0 {
        if a.dump_state && cfg.output.trace_dir.is_none() {
            return Err(LabError::InvalidInput("dump_state needs output.trace_dir".into()));
        }
    }

    // claim the output and trace locations before spending time on jobs
    let mut sink = match &cfg.output.path {
        Some(path) => Some(
            File::create(path)
                .map_err(|e| LabError::InvalidInput(format!("cannot write {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let trace_dir = cfg.output.trace_dir.as_deref();
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| LabError::InvalidInput(format!("cannot create {}: {e}", dir.display())))?;
    }

    let jobs: Vec<Job<'_>> = grid
        .iter()
        .zip(&specs)
        .flat_map(|(cell, (spec, _))| cfg.seeds.iter().map(move |&seed| Job { cell, spec, seed }))
        .collect();
    let mut results: Vec<(usize, u64, Result<Metrics>)> = jobs
        .par_iter()
        .map(|job| (job.cell.index, job.seed, run_job(job, cfg.kind, trace_dir)))
        .collect();
    results.sort_by_key(|(cell, seed, _)| (*cell, *seed));

    let metrics = metric_columns(cfg.kind);
    let mut columns: Vec<String> = vec!["cell".into(), "seed".into()];
    columns.extend(param_columns.unwrap_or_default());
    columns.extend(["status".to_string(), "detail".to_string()]);
    columns.extend(metrics.iter().map(|c| c.to_string()));

    let mut failures = 0;
    let rows = results
        .into_iter()
        .map(|(cell, seed, result)| {
            let mut row = vec![Value::from(cell), Value::from(seed)];
            row.extend(specs[cell].1.iter().map(|(_, v)| v.clone()));
            match result {
                Ok(values) => {
                    let by_name: BTreeMap<&str, Value> = values.into_iter().collect();
                    row.extend([Value::from("ok"), Value::Null]);
                    row.extend(metrics.iter().map(|c| by_name.get(c).cloned().unwrap_or(Value::Null)));
                }
                Err(e) => {
                    failures += 1;
                    log::warn!("cell {cell} seed {seed}: {e}");
                    row.extend([Value::from(e.kind()), Value::from(e.to_string())]);
                    row.extend(metrics.iter().map(|_| Value::Null));
                }
            }
            row
        })
        .collect();
    let table = Table { columns, rows };

    if let Some(file) = sink.as_mut() {
        let text = match cfg.output.format {
            OutputFormat::Csv => {
                let meta = cfg.output.header_meta.then(|| header_meta_line(cfg.kind));
                table.to_csv(meta.as_deref())?
            }
            OutputFormat::Json => {
                let stamp = cfg.output.header_meta.then(|| {
                    std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .map_or(0, |d| d.as_secs())
                });
                table.to_json(cfg.kind, stamp)? + "\n"
            }
        };
        file.write_all(text.as_bytes())?;
    }
    Ok(ExperimentOutcome {
        kind: cfg.kind,
        table,
        failures,
        written: cfg.output.path.clone(),
    })
}

/// Per-cell event-E frequency over the successful rows of an
/// adversary-sim table; rows with any other status are excluded.
#[derive(Clone, Debug, PartialEq)]
pub struct EventSummary {
    pub cell: usize,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn event_e_summary(table: &Table) -> Result<Vec<EventSummary>> {
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| LabError::InvalidInput(format!("table has no {name:?} column")))
    };
    let (cell, status, event) = (col("cell")?, col("status")?, col("event_E")?);
    let mut counts: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for row in &table.rows {
        let Some(c) = row[cell].as_u64() else { continue };
        let entry = counts.entry(c as usize).or_default();
        if row[status] != "ok" {
            continue;
        }
        entry.0 += 1;
        entry.1 += u64::from(row[event] == true);
    }
    Ok(counts
        .into_iter()
        .map(|(cell, (trials, hits))| {
            let (ci_low, ci_high) = wilson_interval(hits, trials);
            EventSummary {
                cell,
                trials,
                hits,
                estimate: if trials == 0 { f64::NAN } else { hits as f64 / trials as f64 },
                ci_low,
                ci_high,
            }
        })
        .collect())
}
