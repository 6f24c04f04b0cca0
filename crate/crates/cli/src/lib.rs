//! Command-line front end: argument parsing, configuration, dispatch and
//! output. [`run`] is the whole program; `main` only wires it to the
//! process.

pub mod args;
pub mod config;
pub mod output;
pub mod table_io;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use bellbench::inequality::{self, eval_ch, eval_fc, verify_theorem, InequalityId};
use bellbench::lhv::{local_bound, sample_worst, Constraint};
use bellbench::model::{AngleConfig, Axis, Setting};
use bellbench::optimize::{optimize, tied_axes, OptimizationProblem, SearchOptions};
use bellbench::simulate::{estimate_strong46, simulate, RunResult, RunSpec};
use bellbench::{ExperimentParams, InequalityReport, Source};
use clap::Parser;
use serde_json::{json, Map, Value};
use thiserror::Error;

use args::{Cli, Command, SourceArgs};
use config::{Config, SourceConfig, SourceKind};
use output::{jnum, num, report_json, report_line, reports_csv, Rendered};
use table_io::TableFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Default setting angle of the CH comparison, degrees.
pub const DEFAULT_PHI_SETTING: f64 = 22.5;
pub const DEFAULT_PAIRS: u64 = 100_000;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, config file or input table.
    #[error("config error: {0}")]
    Config(String),
    /// A valid request that failed while running.
    #[error("error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn config(err: impl ToString) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<bellbench::Error> for CliError {
    fn from(err: bellbench::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// Parse `argv`, run the command, write results to `out` and diagnostics
/// to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    match execute(cli) {
        Ok((rendered, format)) => match rendered.write(format, out) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_RUNTIME
            }
        },
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(Rendered, args::Format), CliError> {
    let format = cli.format;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        builder = builder.num_threads(threads);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    let rendered = pool.install(|| dispatch(cli.command))?;
    Ok((rendered, format))
}

fn dispatch(command: Command) -> Result<Rendered, CliError> {
    match command {
        Command::Predict {
            source,
            ineq,
            phi_setting,
            table_out,
        } => predict(&source, &ineq, phi_setting, table_out.as_deref()),
        Command::Evaluate { input, ineq } => evaluate(&input, &ineq),
        Command::Simulate {
            source,
            pairs,
            seed,
            ineq,
            counts_out,
        } => simulate_command(&source, pairs, seed, &ineq, counts_out.as_deref()),
        Command::Optimize {
            source,
            ineq,
            free,
            grid_step,
            tolerance,
        } => optimize_command(&source, ineq, free, grid_step, tolerance),
        Command::VerifyTheorem {
            u,
            v,
            samples,
            seed,
        } => verify_command(u, v, samples, seed),
        Command::LhvBound {
            functional,
            constraint,
        } => lhv_bound_command(&functional, &constraint),
        Command::LhvSample {
            functional,
            constraint,
            models,
            strategies,
            seed,
        } => lhv_sample_command(&functional, &constraint, models, strategies, seed),
    }
}

fn load_config(args: &SourceArgs) -> Result<Config, CliError> {
    match &args.config {
        Some(path) => config::load(path).map_err(CliError::Config),
        None => Ok(Config::default()),
    }
}

/// Flags win over the config file; with neither, the ideal source.
pub fn resolve_source(args: &SourceArgs, config: &Config) -> Result<Source, CliError> {
    if args.ideal {
        return Ok(Source::Ideal);
    }
    let file = config.source.unwrap_or(SourceConfig {
        kind: SourceKind::Ideal,
        eta: None,
        phi_deg: None,
        f_override: None,
    });
    if file.kind == SourceKind::Ideal
        && (file.eta.is_some() || file.phi_deg.is_some() || file.f_override.is_some())
    {
        return Err(CliError::config("an ideal source takes no eta, phi_deg or f_override"));
    }
    let eta = args.eta.or(file.eta);
    let phi = args.phi.or(file.phi_deg);
    let f_override = args.f_override.or(file.f_override);
    let (eta, phi) = match (eta, phi) {
        (None, None) if f_override.is_none() => return Ok(Source::Ideal),
        (Some(eta), Some(phi)) => (eta, phi),
        _ => return Err(CliError::config("a real source needs both eta and phi")),
    };
    let mut params = ExperimentParams::new(eta, phi).map_err(CliError::config)?;
    if let Some(f) = f_override {
        params = params.with_f_override(f).map_err(CliError::config)?;
    }
    Ok(Source::Real(params))
}

pub fn resolve_angles(
    args: &SourceArgs,
    config: &Config,
    default: Option<AngleConfig>,
) -> Result<AngleConfig, CliError> {
    if let Some(angles) = &args.angles {
        let angles: [f64; 5] = angles.as_slice().try_into().map_err(|_| {
            CliError::config(format!("--angles takes 5 values (a,b,a',b',r), got {}", angles.len()))
        })?;
        return AngleConfig::from_cli_order(angles).map_err(CliError::config);
    }
    if let Some(c) = config.angles {
        return AngleConfig::new(c.a, c.a_prime, c.b, c.b_prime, c.r).map_err(CliError::config);
    }
    default.ok_or_else(|| CliError::config("no angles given (use --angles a,b,a',b',r)"))
}

fn parse_ids(flags: &[String], config: &Config) -> Result<Option<Vec<InequalityId>>, CliError> {
    let names = if !flags.is_empty() {
        flags
    } else if let Some(names) = &config.inequalities {
        names
    } else {
        return Ok(None);
    };
    names
        .iter()
        .map(|n| n.parse().map_err(CliError::config))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn setting_map<V>(entries: impl Iterator<Item = (Setting, V)>) -> Value
where
    V: Into<Value>,
{
    let mut map = Map::new();
    for (setting, value) in entries {
        map.insert(setting.label().to_string(), value.into());
    }
    Value::Object(map)
}

fn header(text: &mut String, source: &Source, angles: &AngleConfig) {
    let _ = writeln!(text, "source       {}", output::source_text(source));
    let _ = writeln!(text, "angles       {}", output::angles_text(angles));
    let _ = writeln!(text, "differences  {}", output::differences_text(angles));
}

fn predict(
    args: &SourceArgs,
    ineq: &[String],
    phi_setting: Option<f64>,
    table_out: Option<&Path>,
) -> Result<Rendered, CliError> {
    let config = load_config(args)?;
    let source = resolve_source(args, &config)?;
    let angles = resolve_angles(args, &config, None)?;
    let ids = parse_ids(ineq, &config)?.unwrap_or_else(|| InequalityId::ALL.to_vec());
    let phi_setting = phi_setting.or(config.phi_setting).unwrap_or(DEFAULT_PHI_SETTING);

    let table = source.settings_table(&angles, &Setting::ALL)?;
    let reports = ids
        .iter()
        .map(|&id| match id {
            InequalityId::Ch47 => eval_ch(&source, phi_setting),
            InequalityId::Fc48 => eval_fc(&source),
            _ => inequality::evaluate(id, &table),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = table_out {
        table_io::write_probabilities(create(path)?, &table).map_err(|e| CliError::Runtime(e.to_string()))?;
    }

    let mut text = String::new();
    header(&mut text, &source, &angles);
    for (setting, dist) in table.iter() {
        let _ = writeln!(text, "{:<6} {}", setting.label(), output::dist_text(dist));
    }
    for report in &reports {
        let _ = writeln!(text, "{}", report_line(report));
    }
    let json = json!({
        "source": output::source_json(&source),
        "angles": output::angles_json(&angles),
        "differences": output::differences_json(&angles),
        "phi_setting": jnum(phi_setting),
        "tables": setting_map(table.iter().map(|(s, d)| (s, output::dist_json(d)))),
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    Ok(Rendered {
        text,
        json,
        csv: reports_csv(&reports),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn select(
    result: &RunResult,
    ids: Option<&[InequalityId]>,
) -> Result<Vec<InequalityReport>, CliError> {
    match ids {
        None => Ok(result.reports.clone()),
        Some(ids) => ids
            .iter()
            .map(|&id| match result.report(id) {
                Some(report) => Ok(*report),
                // not computed: surface why
                None => Err(inequality::evaluate(id, &result.empirical_table())
                    .err()
                    .map_or_else(|| CliError::Runtime(format!("{id} unavailable")), CliError::from)),
            })
            .collect(),
    }
}

fn counts_json(result: &RunResult) -> Value {
    setting_map(result.settings.iter().map(|run| {
        let rows: Vec<Value> = run.counts.entries().iter().map(|row| json!(row)).collect();
        (run.setting, Value::Array(rows))
    }))
}

fn counts_text(text: &mut String, result: &RunResult) {
    for run in &result.settings {
        let mut parts = Vec::new();
        for (i, o1) in bellbench::Outcome::ALL.iter().enumerate() {
            for (j, o2) in bellbench::Outcome::ALL.iter().enumerate() {
                parts.push(format!("n{o1}{o2}={}", run.counts.entries()[i][j]));
            }
        }
        let _ = writeln!(text, "{:<6} N={} {}", run.setting.label(), run.counts.total_pairs(), parts.join(" "));
    }
}

fn evaluate(input: &Path, ineq: &[String]) -> Result<Rendered, CliError> {
    let file = File::open(input).map_err(|e| CliError::config(format!("{}: {e}", input.display())))?;
    let table = table_io::read_table(BufReader::new(file))
        .map_err(|e| CliError::config(format!("{}: {e}", input.display())))?;
    let ids = parse_ids(ineq, &Config::default())?;

    let mut text = String::new();
    let mut json = Map::new();
    let reports = match table {
        TableFile::Counts(counts) => {
            let result = RunResult::from_counts(counts)?;
            counts_text(&mut text, &result);
            json.insert("kind".into(), "counts".into());
            json.insert("counts".into(), counts_json(&result));
            select(&result, ids.as_deref())?
        }
        TableFile::Probabilities(table) => {
            json.insert("kind".into(), "probabilities".into());
            json.insert(
                "tables".into(),
                setting_map(table.iter().map(|(s, d)| (s, output::dist_json(d)))),
            );
            match ids {
                Some(ids) => ids
                    .iter()
                    .map(|&id| inequality::evaluate(id, &table))
                    .collect::<Result<Vec<_>, _>>()?,
                None => InequalityId::TABULAR
                    .into_iter()
                    .filter(|id| id.required_settings().iter().all(|&s| table.contains(s)))
                    .filter_map(|id| match inequality::evaluate(id, &table) {
                        Err(bellbench::Error::NoRrCoincidences) => None,
                        other => Some(other),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            }
        }
    };
    if reports.is_empty() {
        return Err(CliError::Runtime("no inequality can be evaluated from this table".into()));
    }
    for report in &reports {
        let _ = writeln!(text, "{}", report_line(report));
    }
    json.insert("reports".into(), reports.iter().map(report_json).collect());
    Ok(Rendered {
        text,
        json: Value::Object(json),
        csv: reports_csv(&reports),
    })
}

fn simulate_command(
    args: &SourceArgs,
    pairs: Option<u64>,
    seed: Option<u64>,
    ineq: &[String],
    counts_out: Option<&Path>,
) -> Result<Rendered, CliError> {
    let config = load_config(args)?;
    let source = resolve_source(args, &config)?;
    let angles = resolve_angles(args, &config, None)?;
    let ids = parse_ids(ineq, &config)?;
    let run_config = config.run.unwrap_or(config::RunConfig {
        pairs_per_setting: None,
        seed: None,
    });
    let pairs = pairs.or(run_config.pairs_per_setting).unwrap_or(DEFAULT_PAIRS);
    let seed = seed.or(run_config.seed).unwrap_or(0);

    let table = source.settings_table(&angles, &Setting::ALL)?;
    let spec = RunSpec::new(pairs, seed, table).map_err(CliError::config)?;
    let result = simulate(&spec)?;
    let reports = select(&result, ids.as_deref())?;
    let strong = estimate_strong46(&result).ok();
    if let Some(path) = counts_out {
        table_io::write_counts(create(path)?, &result.counts()).map_err(|e| CliError::Runtime(e.to_string()))?;
    }

    let mut text = String::new();
    header(&mut text, &source, &angles);
    let _ = writeln!(text, "pairs        {pairs} per setting, seed {seed}");
    counts_text(&mut text, &result);
    for report in &reports {
        let _ = writeln!(text, "{}", report_line(report));
    }
    if let Some(report) = &strong {
        let _ = writeln!(text, "STRONG46 from raw counts: {}", report_line(report));
    }
    let json = json!({
        "source": output::source_json(&source),
        "angles": output::angles_json(&angles),
        "differences": output::differences_json(&angles),
        "pairs_per_setting": pairs,
        "seed": seed,
        "counts": counts_json(&result),
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
        "strong46_from_counts": strong.as_ref().map_or(Value::Null, report_json),
    });
    Ok(Rendered {
        text,
        json,
        csv: reports_csv(&reports),
    })
}

/// Orientations an inequality reads, minus those tied to `a'`.
pub fn default_free_axes(id: InequalityId) -> Vec<Axis> {
    Axis::CLI_ORDER
        .into_iter()
        .filter(|axis| !tied_axes(id).contains(axis))
        .filter(|&axis| {
            id.required_settings()
                .iter()
                .any(|s| s.axes().0 == axis || s.axes().1 == axis)
        })
        .collect()
}

fn optimize_command(
    args: &SourceArgs,
    ineq: Option<String>,
    free: Option<Vec<String>>,
    grid_step: Option<f64>,
    tolerance: Option<f64>,
) -> Result<Rendered, CliError> {
    let config = load_config(args)?;
    let source = resolve_source(args, &config)?;
    let base = resolve_angles(args, &config, Some(AngleConfig::new(0.0, 0.0, 0.0, 0.0, 0.0)?))?;
    let opt = config.optimize.clone().unwrap_or(config::OptimizeConfig {
        inequality: None,
        free: None,
        grid_step: None,
        tolerance: None,
    });
    let id: InequalityId = ineq
        .or(opt.inequality)
        .ok_or_else(|| CliError::config("no inequality given (use --ineq)"))?
        .parse()
        .map_err(CliError::config)?;
    let free = match free.or(opt.free) {
        Some(names) => names
            .iter()
            .map(|n| n.parse::<Axis>().map_err(CliError::config))
            .collect::<Result<Vec<_>, _>>()?,
        None => default_free_axes(id),
    };
    let defaults = SearchOptions::default();
    let options = SearchOptions {
        grid_step: grid_step.or(opt.grid_step).unwrap_or(defaults.grid_step),
        tolerance: tolerance.or(opt.tolerance).unwrap_or(defaults.tolerance),
    };
    let problem = OptimizationProblem::new(id, source, &free, base).map_err(CliError::config)?;
    let result = optimize(&problem, options).map_err(|e| match e {
        bellbench::Error::InvalidProblem(_) => CliError::config(e),
        other => other.into(),
    })?;

    let free_labels: Vec<&str> = problem.free.iter().map(|a| a.label()).collect();
    let mut text = String::new();
    let _ = writeln!(text, "source       {}", output::source_text(&source));
    let _ = writeln!(text, "free         {}", free_labels.join(","));
    let _ = writeln!(text, "grid         step {} tolerance {}", num(options.grid_step), num(options.tolerance));
    let _ = writeln!(text, "angles       {}", output::angles_text(&result.best_config));
    let _ = writeln!(text, "differences  {}", output::differences_text(&result.best_config));
    let _ = writeln!(text, "grid margin  {}  evaluations {}", num(result.grid_margin), result.evaluations);
    let _ = writeln!(text, "{}", report_line(&result.report));

    let json = json!({
        "source": output::source_json(&source),
        "inequality": id.name(),
        "free": free_labels,
        "grid_step": jnum(options.grid_step),
        "tolerance": jnum(options.tolerance),
        "angles": output::angles_json(&result.best_config),
        "differences": output::differences_json(&result.best_config),
        "grid_angles": output::angles_json(&result.grid_config),
        "grid_margin": jnum(result.grid_margin),
        "evaluations": result.evaluations,
        "report": report_json(&result.report),
    });
    let mut header: Vec<String> = Axis::CLI_ORDER.iter().map(|&a| output::axis_key(a).to_string()).collect();
    header.extend(output::DIFFERENCE_LABELS.iter().map(|l| l.to_string()));
    header.extend(output::REPORT_HEADER.iter().map(|h| h.to_string()));
    let mut row: Vec<String> = result.best_config.to_cli_order().iter().map(|&x| num(x)).collect();
    row.extend(result.differences.iter().map(|&d| num(d)));
    row.extend(output::report_row(&result.report));
    Ok(Rendered {
        text,
        json,
        csv: vec![header, row],
    })
}

fn verify_command(u: f64, v: f64, samples: u64, seed: u64) -> Result<Rendered, CliError> {
    let report = verify_theorem(u, v, samples, seed).map_err(CliError::config)?;
    if !report.holds {
        return Err(CliError::Runtime(format!(
            "Z < 0 found: vertex minimum {}, sampled minimum {:?}",
            num(report.min_vertex_value),
            report.min_sampled_value
        )));
    }
    let p = &report.argmin;
    let argmin = [p.x1p, p.x1m, p.x2p, p.x2m, p.y1p, p.y1m, p.y2p, p.y2m];
    let names = ["x1p", "x1m", "x2p", "x2m", "y1p", "y1m", "y2p", "y2m"];
    let sampled = report.min_sampled_value.map_or_else(|| "none".to_string(), num);

    let mut text = String::new();
    let _ = writeln!(text, "U={} V={} samples={samples} seed={seed}", num(u), num(v));
    let _ = writeln!(text, "min_vertex_value   {}", num(report.min_vertex_value));
    let _ = writeln!(text, "min_sampled_value  {sampled}");
    let _ = writeln!(
        text,
        "argmin             {}",
        names
            .iter()
            .zip(argmin)
            .map(|(n, x)| format!("{n}={}", num(x)))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(text, "holds              {}", report.holds);

    let mut argmin_json = Map::new();
    for (n, x) in names.iter().zip(argmin) {
        argmin_json.insert(n.to_string(), jnum(x));
    }
    let json = json!({
        "u": jnum(u),
        "v": jnum(v),
        "samples": samples,
        "seed": seed,
        "min_vertex_value": jnum(report.min_vertex_value),
        "min_sampled_value": report.min_sampled_value.map_or(Value::Null, jnum),
        "argmin": argmin_json,
        "holds": report.holds,
    });
    let mut header: Vec<String> = ["u", "v", "samples", "seed", "min_vertex_value", "min_sampled_value", "holds"]
        .map(String::from)
        .to_vec();
    header.extend(names.iter().map(|n| n.to_string()));
    let mut row = vec![
        num(u),
        num(v),
        samples.to_string(),
        seed.to_string(),
        num(report.min_vertex_value),
        report.min_sampled_value.map_or_else(String::new, num),
        report.holds.to_string(),
    ];
    row.extend(argmin.iter().map(|&x| num(x)));
    Ok(Rendered {
        text,
        json,
        csv: vec![header, row],
    })
}

fn parse_functional_and_constraint(
    functional: &str,
    constraint: &str,
) -> Result<(InequalityId, Constraint), CliError> {
    let id: InequalityId = functional.parse().map_err(CliError::config)?;
    if !id.is_tabular() {
        return Err(CliError::config(format!(
            "{id} has no local-model form; choose one of {}",
            InequalityId::TABULAR.map(|i| i.name().to_ascii_lowercase()).join(", ")
        )));
    }
    let constraint: Constraint = constraint.parse().map_err(CliError::config)?;
    Ok((id, constraint))
}

fn constraint_name(c: Constraint) -> &'static str {
    match c {
        Constraint::None => "none",
        Constraint::Supplementary => "supplementary",
        Constraint::Gr => "gr",
    }
}

fn lhv_bound_command(functional: &str, constraint: &str) -> Result<Rendered, CliError> {
    let (id, constraint) = parse_functional_and_constraint(functional, constraint)?;
    let bound = local_bound(id, constraint)?;
    let witness = output::strategy_text(&bound.witness);

    let mut text = String::new();
    let _ = writeln!(text, "functional  {}  constraint {}", id.name(), constraint_name(constraint));
    let _ = writeln!(
        text,
        "local bound {}  (stated {} {})",
        num(bound.value),
        id.direction().symbol(),
        num(id.bound())
    );
    let _ = writeln!(text, "witness     {witness}");
    let _ = writeln!(text, "strategies  {}", bound.strategies_checked);
    let json = json!({
        "functional": id.name(),
        "constraint": constraint_name(constraint),
        "value": jnum(bound.value),
        "stated_bound": jnum(id.bound()),
        "direction": id.direction().symbol(),
        "witness": output::strategy_json(&bound.witness),
        "strategies_checked": bound.strategies_checked,
    });
    let csv = vec![
        ["functional", "constraint", "value", "stated_bound", "direction", "witness", "strategies_checked"]
            .map(String::from)
            .to_vec(),
        vec![
            id.name().to_string(),
            constraint_name(constraint).to_string(),
            num(bound.value),
            num(id.bound()),
            id.direction().symbol().to_string(),
            witness,
            bound.strategies_checked.to_string(),
        ],
    ];
    Ok(Rendered { text, json, csv })
}

fn lhv_sample_command(
    functional: &str,
    constraint: &str,
    models: usize,
    strategies: usize,
    seed: u64,
) -> Result<Rendered, CliError> {
    let (id, constraint) = parse_functional_and_constraint(functional, constraint)?;
    if models == 0 || strategies == 0 {
        return Err(CliError::config("--models and --strategies must be at least 1"));
    }
    let summary = sample_worst(id, constraint, models, strategies, seed)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "functional  {}  constraint {}  models {models}  strategies {strategies}  seed {seed}",
        id.name(),
        constraint_name(constraint)
    );
    let _ = writeln!(text, "worst       {}", report_line(&summary.worst));
    let _ = writeln!(text, "worst seed  {}", summary.worst_model_seed);
    let json = json!({
        "functional": id.name(),
        "constraint": constraint_name(constraint),
        "models": models,
        "strategies": strategies,
        "seed": seed,
        "worst": report_json(&summary.worst),
        "worst_model_seed": summary.worst_model_seed,
    });
    let mut header: Vec<String> = ["constraint", "models", "strategies", "seed", "worst_model_seed"]
        .map(String::from)
        .to_vec();
    header.extend(output::REPORT_HEADER.iter().map(|h| h.to_string()));
    let mut row = vec![
        constraint_name(constraint).to_string(),
        models.to_string(),
        strategies.to_string(),
        seed.to_string(),
        summary.worst_model_seed.to_string(),
    ];
    row.extend(output::report_row(&summary.worst));
    Ok(Rendered {
        text,
        json,
        csv: vec![header, row],
    })
}
