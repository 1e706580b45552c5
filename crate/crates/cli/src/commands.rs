use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use jobcost_core::bench::{
    brute_force_optimum, generate_problem, generate_records, GeneratorConfig, OracleVerdict, RecordConfig,
};
use jobcost_core::cost::evaluate_cost;
use jobcost_core::io::{
    load_model, load_records, load_run_log, orchestration_report, parse_problem, save_model, save_problem,
    save_records, save_report, save_schedule, save_tune, IoError, ProblemDocument,
};
use jobcost_core::predictor::{
    build_duration_table, evaluate, fit, tune_alpha, Dataset, FeatureSchema, FitSpec, JobFeatures, PredictError,
    TuneConfig,
};
use jobcost_core::problem::ValidatedProblem;
use jobcost_core::schedule::{diagnose_infeasibility, earliest_schedule};
use jobcost_core::solver::{build_milp, extract_solution, solve, SolveOutcome, SolveStatus, SolverConfig};

use crate::{FamilyArg, GenProblemArgs, GenRecordsArgs, InOut, PredictArgs, ScheduleArgs, TrainArgs, TuneArgs};

/// A failed command: bad input (exit 2) or an answer the domain rejects (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Validation(errs) => {
                let lines: Vec<String> = errs.iter().map(|v| format!("  {v}")).collect();
                Failure::Domain(format!("problem is invalid:\n{}", lines.join("\n")))
            }
            IoError::Assignment(_) | IoError::Metric(_) => Failure::Domain(e.to_string()),
            IoError::MissingDurations => Failure::Usage(
                "problem document has no durations block; pass --model and --features to predict them".into(),
            ),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<PredictError> for Failure {
    fn from(e: PredictError) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn spec_of(family: FamilyArg, alpha: f64, l1_ratio: f64) -> FitSpec {
    match family {
        FamilyArg::Ols => FitSpec::ols(),
        FamilyArg::Ridge => FitSpec::ridge(alpha),
        FamilyArg::Lasso => FitSpec::lasso(alpha),
        FamilyArg::ElasticNet => FitSpec::elastic_net(alpha, l1_ratio),
    }
}

fn load_dataset(path: &Path) -> Result<(FeatureSchema, Dataset), Failure> {
    let records = load_records(&read(path)?)?;
    let schema = FeatureSchema::default();
    let data = Dataset::from_records(&records, &schema)?;
    Ok((schema, data))
}

fn validated(doc: &ProblemDocument) -> Result<ValidatedProblem, Failure> {
    if !doc.has_durations() {
        return Err(IoError::MissingDurations.into());
    }
    Ok(doc.to_problem().validate().map_err(IoError::from)?)
}

pub fn validate(a: &InOut) -> Outcome {
    let doc = parse_problem(&read(&a.input)?)?;
    let vp = validated(&doc)?;
    let p = vp.problem();
    write(
        &a.out,
        &format!(
            "valid: {} workflows, {} devices, {} configs, {} durations, {} precedence pairs, {} assignments\n",
            p.workflows.len(),
            p.devices.len(),
            p.configs.len(),
            p.durations.len(),
            vp.precedence_pairs().len(),
            vp.assignment_space(),
        ),
    )
}

pub fn train(a: &TrainArgs) -> Outcome {
    let (schema, data) = load_dataset(&a.io.input)?;
    let spec = spec_of(a.family, a.alpha, a.l1_ratio);
    let model = fit(&data, &spec)?;
    let m = evaluate(&model, &data)?;
    eprintln!(
        "trained {} on {} records: mae={:.6} rmse={:.6} mape={}",
        spec.family.name(),
        m.n,
        m.mae,
        m.rmse,
        m.mape.map_or("n/a".to_string(), |v| format!("{v:.6}%")),
    );
    write(&a.io.out, &save_model(&schema, &model, Some(&m)))
}

pub fn tune(a: &TuneArgs) -> Outcome {
    let (_, data) = load_dataset(&a.io.input)?;
    let cfg = TuneConfig {
        folds: a.folds,
        shuffle_seed: a.seed,
        ..TuneConfig::default()
    };
    let result = tune_alpha(&data, spec_of(a.family, 1.0, a.l1_ratio), &cfg)?;
    eprintln!(
        "best alpha {} (cv mae {:.6}) over {} candidates",
        result.best_alpha,
        result.best_score(),
        result.cv_score_by_alpha.len()
    );
    write(&a.io.out, &save_tune(&result))
}

/// Latest record per job id, used as that workflow's static features.
fn workflow_features(path: &Path) -> Result<BTreeMap<String, JobFeatures>, Failure> {
    let records = load_records(&read(path)?)?;
    Ok(records.into_iter().map(|r| (r.job_id, r.features)).collect())
}

fn predicted(doc: ProblemDocument, model_path: &Path, features_path: &Path) -> Result<ProblemDocument, Failure> {
    let m = load_model(&read(model_path)?)?;
    let features = workflow_features(features_path)?;
    let ids: Vec<String> = doc.workflows.iter().map(|w| w.id.clone()).collect();
    let table = build_duration_table(&m.model, &m.schema, &ids, &doc.configs, &features)?;
    Ok(doc.with_durations(&table))
}

pub fn predict(a: &PredictArgs) -> Outcome {
    let doc = parse_problem(&read(&a.io.input)?)?;
    let doc = predicted(doc, &a.model, &a.features)?;
    let vp = validated(&doc)?;
    write(&a.io.out, &save_problem(vp.problem()))
}

fn report_search(out: &SolveOutcome) {
    let r = &out.report;
    eprintln!(
        "status={} nodes={} pruned={} best_bound={:.6} objective={} wall_time={:.3}s",
        out.status.name(),
        r.nodes_explored,
        r.nodes_pruned,
        r.best_bound,
        out.incumbent
            .as_ref()
            .map_or("none".to_string(), |i| format!("{:.6}", i.objective)),
        r.wall_time.as_secs_f64(),
    );
}

fn infeasible(vp: &ValidatedProblem) -> Failure {
    match diagnose_infeasibility(vp) {
        Some(inf) => Failure::Domain(format!("infeasible: {inf}")),
        None => Failure::Domain("infeasible: no assignment meets every deadline".into()),
    }
}

pub fn schedule(a: &ScheduleArgs) -> Outcome {
    let doc = parse_problem(&read(&a.io.input)?)?;
    let doc = match (&a.model, &a.features) {
        (Some(model), Some(features)) => predicted(doc, model, features)?,
        _ => doc,
    };
    let vp = validated(&doc)?;
    let mut cfg = SolverConfig::default();
    if let Some(t) = a.time_limit {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Usage("--time-limit must be a positive number of seconds".into()));
        }
        cfg.time_limit = Some(t);
    }
    if let Some(n) = a.node_limit {
        cfg.node_limit = n;
    }
    if let Some(g) = a.gap {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Failure::Usage("--gap must be non-negative".into()));
        }
        cfg.absolute_gap = g;
    }
    let model = build_milp(&vp);
    let out = solve(&model, &cfg).map_err(|e| Failure::Domain(format!("solver failed: {e}")))?;
    report_search(&out);
    match out.status {
        SolveStatus::Infeasible => return Err(infeasible(&vp)),
        SolveStatus::NodeLimit | SolveStatus::TimeLimit if out.incumbent.is_none() => {
            return Err(Failure::Domain(format!(
                "{} reached before any feasible assignment was found",
                out.status.name()
            )))
        }
        SolveStatus::NodeLimit | SolveStatus::TimeLimit => {
            eprintln!("warning: {} reached; the schedule may not be optimal", out.status.name())
        }
        SolveStatus::Optimal => {}
    }
    let sol = extract_solution(&model, &out, &cfg).map_err(|e| Failure::Domain(format!("solver failed: {e}")))?;
    write(&a.io.out, &save_schedule(&sol.schedule, &sol.cost))
}

pub fn report(a: &InOut) -> Outcome {
    let log = load_run_log(&read(&a.input)?)?;
    let r = orchestration_report(&log)?;
    write(&a.out, &save_report(&r))
}

pub fn oracle(a: &InOut) -> Outcome {
    let doc = parse_problem(&read(&a.input)?)?;
    let vp = validated(&doc)?;
    let result = brute_force_optimum(&vp).map_err(|e| {
        Failure::Domain(format!("{} assignments exceed the enumeration limit", e.size))
    })?;
    eprintln!("enumerated {} assignments", result.enumerated);
    match result.verdict {
        OracleVerdict::Infeasible => Err(infeasible(&vp)),
        OracleVerdict::Optimal { assignment, .. } => {
            let s = earliest_schedule(&vp, &assignment).map_err(|e| Failure::Domain(e.to_string()))?;
            let cost = evaluate_cost(&vp, &assignment).map_err(|e| Failure::Domain(e.to_string()))?;
            write(&a.out, &save_schedule(&s, &cost))
        }
    }
}

pub fn gen_problem(a: &GenProblemArgs) -> Outcome {
    let mut cfg: GeneratorConfig = match &a.config {
        Some(path) => serde_json::from_str(&read(path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => GeneratorConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.workflows {
        cfg.workflow_count = v;
    }
    if let Some(v) = a.devices {
        cfg.device_count = v;
    }
    if let Some(v) = a.configs {
        cfg.configs_per_device = v;
    }
    if let Some(v) = a.density {
        cfg.precedence_density = v;
    }
    if let Some(v) = a.slack {
        cfg.window_slack_factor = v;
    }
    let p = generate_problem(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    write(&a.out, &save_problem(&p))
}

pub fn gen_records(a: &GenRecordsArgs) -> Outcome {
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(Failure::Usage("--noise must be non-negative".into()));
    }
    let cfg = RecordConfig {
        n: a.n,
        noise_sigma: a.noise,
        runs_per_job: a.runs_per_job,
        seed: a.seed,
        ..RecordConfig::default()
    };
    let (records, _) = generate_records(&cfg);
    write(&a.out, &save_records(&records))
}
