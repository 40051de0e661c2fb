//! Command-line front end. Exit codes: 0 success, 1 stage failure, 2 usage or config error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nalgebra::DMatrix;

use crate::arima::{backcast_head_with, Criterion, FittedArima};
use crate::dataset::{load_csv, write_series_csv, DateWindow, MonthDate, MonthlySeries, Panel};
use crate::eval::{confusion, cross_validate, cross_validate_with, metrics, plain_kfold, ConfusionMatrix, Metrics};
use crate::featsel::{boruta, pairwise_pearson, prune_correlated, BorutaReport, CorrelationMatrix, Pruning};
use crate::models::{ModelFamily, ModelSpec, TrainedModel};
use crate::pipeline::{self, correlation_svg, importance_svg, markdown, performance_table, ModelsConfig, PipelineConfig, PipelineError, RunReport, SelectionConfig, SummaryRow};
use crate::stattests::{adf_test, default_max_lag, jarque_bera, reset_ramsey};

#[derive(Debug, Parser)]
#[command(name = "macrosig", version, about = "Recession-signal modelling on monthly macro panels")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory (stdout when a file is optional and omitted).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Pipeline config (TOML); supplies defaults for model and selection settings.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Log progress to stderr; repeat for more detail.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fill missing leading values by reverse-time ARIMA forecasts. Writes the filled CSV
    /// and, next to it, a JSON sidecar describing each fitted model.
    Backcast {
        #[arg(long)]
        input: PathBuf,
        /// Columns to fill; all columns with a missing head when omitted.
        #[arg(long)]
        column: Vec<String>,
        #[arg(long, default_value = "date")]
        date_column: String,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        #[arg(long, default_value_t = 3)]
        max_q: usize,
        #[arg(long, value_enum, default_value_t = CriterionArg::Aic)]
        criterion: CriterionArg,
    },
    /// Boruta selection followed by correlation pruning on a panel CSV.
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "Recession")]
        label: String,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Also write the correlation heatmap of the confirmed features.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Fit one model family on a panel CSV and save it as JSON.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "Recession")]
        label: String,
        #[arg(long)]
        model: ModelFamily,
    },
    /// Score saved models on a test panel, or cross-validate a family with --folds.
    Evaluate {
        #[arg(long, visible_alias = "test")]
        input: PathBuf,
        #[arg(long, default_value = "Recession")]
        label: String,
        /// Saved model; repeat to compare several.
        #[arg(long, conflicts_with = "folds")]
        model: Vec<PathBuf>,
        /// Print an Accuracy/F1 grid in percent instead of JSON.
        #[arg(long)]
        table: bool,
        /// Number of folds (stratified unless --plain).
        #[arg(long, requires = "family")]
        folds: Option<usize>,
        #[arg(long)]
        plain: bool,
        #[arg(long)]
        family: Option<ModelFamily>,
    },
    /// Diagnostic tests on CSV columns.
    #[command(subcommand)]
    Test(TestCommand),
    /// The whole pipeline from a config file.
    Run,
    /// Re-emit a saved report in another format.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
        format: ReportFormat,
        /// Model whose importances to chart (svg-importance).
        #[arg(long)]
        family: Option<ModelFamily>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TestCommand {
    /// Jarque-Bera normality test.
    Jb {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value = "date")]
        date_column: String,
    },
    /// Augmented Dickey-Fuller unit-root test (constant, no trend).
    Adf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value = "date")]
        date_column: String,
        /// Largest augmentation lag; the usual rule of thumb when omitted.
        #[arg(long)]
        max_lag: Option<usize>,
    },
    /// Ramsey RESET on an OLS fit of the response on the regressors.
    Reset {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        response: String,
        #[arg(long, required = true, num_args = 1..)]
        regressors: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
        powers: Vec<usize>,
        #[arg(long, default_value = "date")]
        date_column: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    Aic,
    Bic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormat {
    Json,
    Markdown,
    SvgImportance,
    SvgCorr,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Failure(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => CliError::Config(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| fail(format!("{}: {e}", dir.display())))?;
            }
            fs::write(p, text).map_err(|e| fail(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(fail),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load_panel(path: &Path, label: &str) -> Result<Panel, CliError> {
    Panel::load(path, label).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn load_config(common: &Common) -> Result<Option<PipelineConfig>, CliError> {
    common.config.as_deref().map(PipelineConfig::load).transpose().map_err(CliError::from)
}

#[derive(Serialize)]
struct BackcastSummary {
    series: String,
    missing_head: usize,
    /// None when the observed stretch was too short and the mean was used.
    model: Option<FittedArima>,
    filled: Vec<f64>,
}

#[derive(Serialize)]
struct SelectOutput {
    boruta: BorutaReport,
    pruning: Pruning,
    selected: Vec<String>,
    correlation: CorrelationMatrix,
}

#[derive(Serialize)]
struct Evaluation {
    family: ModelFamily,
    n: usize,
    confusion: ConfusionMatrix,
    metrics: Metrics,
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    let out = common.output.as_deref();
    match cli.command {
        Command::Backcast { input, column, date_column, max_k, max_q, criterion } => {
            let criterion = match criterion {
                CriterionArg::Aic => Criterion::Aic,
                CriterionArg::Bic => Criterion::Bic,
            };
            let series = load_csv(&input, &date_column).map_err(|e| fail(format!("{}: {e}", input.display())))?;
            if let Some(missing) = column.iter().find(|c| !series.iter().any(|s| s.name() == c.as_str())) {
                return Err(CliError::Config(format!("column '{missing}' not found in {}", input.display())));
            }
            let wanted = |s: &MonthlySeries| s.missing_head() > 0 && (column.is_empty() || column.iter().any(|c| c == s.name()));
            let mut filled = Vec::with_capacity(series.len());
            let mut summary = Vec::new();
            for s in &series {
                if !wanted(s) {
                    filled.push(s.clone());
                    continue;
                }
                let b = backcast_head_with(s, max_k, max_q, criterion).map_err(|e| fail(format!("{}: {e}", s.name())))?;
                summary.push(BackcastSummary { series: s.name().to_string(), missing_head: s.missing_head(), model: b.model.map(|m| m.model), filled: b.filled });
                filled.push(b.series);
            }
            let mut buf = Vec::new();
            write_series_csv(&mut buf, &date_column, &filled).map_err(fail)?;
            emit(out, std::str::from_utf8(&buf).expect("csv is utf-8"))?;
            match out {
                Some(p) => emit(Some(&p.with_extension("json")), &json(&summary)),
                None => {
                    eprint!("{}", json(&summary));
                    Ok(())
                }
            }
        }
        Command::Select { input, label, iterations, trees, alpha, threshold, svg } => {
            let cfg = load_config(common)?;
            let mut sel = cfg.as_ref().map_or_else(SelectionConfig::default, |c| c.selection);
            sel.n_iterations = iterations.unwrap_or(sel.n_iterations);
            sel.n_trees = trees.unwrap_or(sel.n_trees);
            sel.alpha = alpha.unwrap_or(sel.alpha);
            sel.correlation_threshold = threshold.unwrap_or(sel.correlation_threshold);
            let seed = common.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
            let bc = sel.boruta(seed);
            bc.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let panel = load_panel(&input, &label)?;
            let report = boruta(&panel, &bc).map_err(fail)?;
            let confirmed = report.confirmed();
            let pruning = prune_correlated(&panel, &confirmed, sel.correlation_threshold).map_err(fail)?;
            let correlation = pairwise_pearson(&panel.select_features(&confirmed).map_err(fail)?, true).map_err(fail)?;
            if let Some(path) = svg {
                emit(Some(&path), &correlation_svg(&correlation))?;
            }
            let selected = panel.feature_names().iter().filter(|n| pruning.kept.contains(n)).cloned().collect();
            emit(out, &json(&SelectOutput { boruta: report, pruning, selected, correlation }))
        }
        Command::Train { input, label, model } => {
            let cfg = load_config(common)?;
            let models = cfg.as_ref().map_or_else(ModelsConfig::default, |c| c.models.clone());
            let seed = common.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
            let panel = load_panel(&input, &label)?;
            let trained = TrainedModel::train(&models.spec(model), &panel, seed).map_err(fail)?;
            emit(out, &(trained.to_json() + "\n"))
        }
        Command::Evaluate { input, label, model, table, folds, plain, family } => {
            let panel = load_panel(&input, &label)?;
            if let Some(k) = folds {
                let family = family.expect("clap enforces --family with --folds");
                let cfg = load_config(common)?;
                let spec: ModelSpec = cfg.as_ref().map_or_else(ModelsConfig::default, |c| c.models.clone()).spec(family);
                let seed = common.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
                let cv = if plain {
                    let folds = plain_kfold(panel.n_rows(), k, seed).map_err(fail)?;
                    cross_validate_with(panel.features(), panel.label(), &folds, |d| {
                        let fit = spec.fit(&d.x_train, &d.y_train, seed).map_err(|e| e.to_string())?;
                        fit.classify(&d.x_test).map_err(|e| e.to_string())
                    })
                } else {
                    cross_validate(&spec, &panel, k, seed)
                }
                .map_err(fail)?;
                return if table { emit(out, &performance_table(&[SummaryRow::new(family, &cv.mean)])) } else { emit(out, &json(&cv)) };
            }
            if model.is_empty() {
                return Err(CliError::Config("evaluate needs --model, or --folds with --family".into()));
            }
            let mut results = Vec::with_capacity(model.len());
            for path in &model {
                let text = fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
                let trained = TrainedModel::from_json(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
                let pred = trained.classify(&panel).map_err(fail)?;
                let cm = confusion(panel.label(), &pred).map_err(fail)?;
                let m = metrics(&cm).map_err(fail)?;
                results.push(Evaluation { family: trained.family, n: panel.n_rows(), confusion: cm, metrics: m });
            }
            if table {
                let rows: Vec<SummaryRow> = results.iter().map(|r| SummaryRow::new(r.family, &r.metrics)).collect();
                emit(out, &performance_table(&rows))
            } else if let [one] = results.as_slice() {
                emit(out, &json(one))
            } else {
                emit(out, &json(&results))
            }
        }
        Command::Test(test) => {
            let column = |input: &Path, date_column: &str, name: &str| -> Result<Vec<f64>, CliError> {
                let series = load_csv(input, date_column).map_err(|e| fail(format!("{}: {e}", input.display())))?;
                let s = series.into_iter().find(|s| s.name() == name).ok_or_else(|| CliError::Config(format!("column '{name}' not found in {}", input.display())))?;
                Ok(s.observed().to_vec())
            };
            let text = match test {
                TestCommand::Jb { input, column: name, date_column } => json(&jarque_bera(&column(&input, &date_column, &name)?).map_err(fail)?),
                TestCommand::Adf { input, column: name, date_column, max_lag } => {
                    let v = column(&input, &date_column, &name)?;
                    let lag = max_lag.unwrap_or_else(|| default_max_lag(v.len()));
                    json(&adf_test(&v, lag).map_err(fail)?)
                }
                TestCommand::Reset { input, response, regressors, powers, date_column } => {
                    let mut names = regressors.clone();
                    names.push(response.clone());
                    let series = load_csv(&input, &date_column).map_err(|e| fail(format!("{}: {e}", input.display())))?;
                    let mut cols = Vec::with_capacity(names.len());
                    for name in &names {
                        let s = series.iter().find(|s| s.name() == name).ok_or_else(|| CliError::Config(format!("column '{name}' not found in {}", input.display())))?;
                        cols.push(s.clone());
                    }
                    let start = cols.iter().map(MonthlySeries::first_observed).max().expect("at least one column");
                    let end = cols.iter().map(MonthlySeries::end).min().expect("at least one column");
                    if end < start {
                        return Err(fail("the columns share no observed months"));
                    }
                    let months: Vec<MonthDate> = DateWindow::new(start, end).months().collect();
                    let data: Vec<Vec<f64>> = cols.iter().map(|s| months.iter().map(|&d| s.value_at(d).expect("inside the common window")).collect()).collect();
                    let y = data.last().expect("response column").clone();
                    let x = DMatrix::from_fn(months.len(), regressors.len(), |i, j| data[j][i]);
                    json(&reset_ramsey(&x, &y, &powers).map_err(fail)?)
                }
            };
            emit(out, &text)
        }
        Command::Run => {
            let Some(mut cfg) = load_config(common)? else {
                return Err(CliError::Config("run needs --config".into()));
            };
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            let report = pipeline::run(&cfg, out)?;
            for row in &report.downstream.summary {
                println!("{:<18} accuracy {:>6.2}  f1 {:>6.2}", row.name, row.accuracy_pct, row.f1_pct);
            }
            Ok(())
        }
        Command::Report { input, format, family } => {
            let text = fs::read_to_string(&input).map_err(|e| fail(format!("{}: {e}", input.display())))?;
            let report = RunReport::from_json(&text).map_err(fail)?;
            let rendered = match format {
                ReportFormat::Json => report.to_json(),
                ReportFormat::Markdown => markdown(&report),
                ReportFormat::SvgCorr => correlation_svg(&report.downstream.selection.correlation),
                ReportFormat::SvgImportance => {
                    let family = family.ok_or_else(|| CliError::Config("svg-importance needs --family".into()))?;
                    let m = report
                        .downstream
                        .models
                        .iter()
                        .find(|m| m.family == family)
                        .ok_or_else(|| fail(format!("report has no {} model", family.slug())))?;
                    importance_svg(&format!("{} variable importance", m.name), m.importances.as_deref().unwrap_or(&[]))
                }
            };
            emit(out, &rendered)
        }
    }
}

/// Parse, run and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = stderrlog::new().verbosity(1 + cli.common.verbose as usize).init();
    match execute(cli) {
        Ok(()) => 0,
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(CliError::Failure(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}
