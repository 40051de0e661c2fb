use std::fs;
use std::path::Path;

use log::info;
use rayon::prelude::*;

use super::config::{FeatureConfig, PipelineConfig};
use super::render::{correlation_svg, importance_svg, markdown};
use super::report::*;
use super::PipelineError;
use crate::arima::backcast_head_with;
use crate::dataset::{align, load_csv, spread, split, transform, write_series_csv, DateWindow, MonthlySeries, Panel, TransformSpec};
use crate::eval::{confusion, metrics};
use crate::featsel::{boruta, pairwise_pearson, prune_correlated};
use crate::models::TrainedModel;

/// Everything up to and including the train/test split.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Every CSV column after backcasting, label included.
    pub series: Vec<MonthlySeries>,
    pub panel: Panel,
    pub train: Panel,
    pub test: Panel,
    pub upstream: UpstreamReport,
}

fn features_of(config: &PipelineConfig, columns: &[String]) -> Vec<FeatureConfig> {
    if !config.features.is_empty() {
        return config.features.clone();
    }
    columns
        .iter()
        .filter(|c| **c != config.data.label)
        .map(|c| FeatureConfig { name: c.clone(), source: None, transform: TransformSpec::Level })
        .collect()
}

/// Ingest, backcast, transform, align and split. Nothing is written.
pub fn prepare(config: &PipelineConfig) -> Result<Prepared, PipelineError> {
    let input = config.input_path();
    let raw = load_csv(&input, &config.data.date_column).map_err(|e| PipelineError::Stage { stage: "ingest", message: format!("{}: {e}", input.display()) })?;
    let columns: Vec<String> = raw.iter().map(|s| s.name().to_string()).collect();
    config.validate_columns(&columns)?;
    let features = features_of(config, &columns);
    info!("ingest: {} columns, {} months", columns.len(), raw.first().map_or(0, MonthlySeries::len));

    let used: Vec<&str> = features.iter().flat_map(FeatureConfig::columns).collect();
    let bc = config.backcast;
    let filled: Vec<Result<(MonthlySeries, Option<BackcastRecord>), PipelineError>> = raw
        .par_iter()
        .map(|s| {
            if s.missing_head() == 0 || !used.contains(&s.name()) {
                return Ok((s.clone(), None));
            }
            let b = backcast_head_with(s, bc.max_k, bc.max_q, bc.criterion).map_err(|e| PipelineError::Stage { stage: "backcast", message: e.to_string() })?;
            let record = BackcastRecord {
                series: s.name().to_string(),
                missing_head: s.missing_head(),
                order: b.model.as_ref().map(|m| m.model.order),
                aic: b.model.as_ref().map(|m| m.model.aic),
                bic: b.model.as_ref().map(|m| m.model.bic),
                filled: b.filled,
            };
            Ok((b.series, Some(record)))
        })
        .collect();
    let mut series = Vec::with_capacity(raw.len());
    let mut records = Vec::new();
    for item in filled {
        let (s, r) = item?;
        series.push(s);
        records.extend(r);
    }
    for r in &records {
        info!("backcast: {} filled {} months with {:?}", r.series, r.missing_head, r.order);
    }

    let find = |name: &str| series.iter().find(|s| s.name() == name).expect("validated column");
    let tf = PipelineError::stage("transform");
    let mut built = Vec::with_capacity(features.len());
    for f in &features {
        let s = match &f.transform {
            TransformSpec::Spread { minuend, subtrahend } => spread(find(minuend), find(subtrahend), &f.name),
            spec => transform(find(f.source()), spec).map(|s| s.renamed(f.name.clone())),
        }
        .map_err(|e| tf(e.to_string()))?;
        built.push(s);
    }
    let label = find(&config.data.label);

    let covered = built.iter().chain(std::iter::once(label));
    let start = config.data.start.unwrap_or_else(|| covered.clone().map(MonthlySeries::first_observed).max().expect("label present"));
    let end = config.data.end.unwrap_or_else(|| covered.map(MonthlySeries::end).min().expect("label present"));
    let al = PipelineError::stage("align");
    if end < start {
        return Err(al(format!("no month is covered by every feature and the label ({start} > {end})")));
    }
    let panel = align(&built, label, DateWindow::new(start, end)).map_err(|e| al(e.to_string()))?;
    info!("align: {} rows x {} features, {} positive", panel.n_rows(), panel.n_features(), panel.positives());

    let (train, test) = split(&panel, &config.split.spec(config.seed)).map_err(|e| PipelineError::stage("split")(e.to_string()))?;
    let upstream = UpstreamReport {
        columns,
        backcast: records,
        features,
        window_start: start,
        window_end: end,
        n_rows: panel.n_rows(),
        n_positive: panel.positives(),
        split: SplitSummary {
            train_fraction: config.split.train_fraction,
            shuffle: config.split.shuffle,
            n_train: train.n_rows(),
            n_test: test.n_rows(),
            train_positives: train.positives(),
            test_positives: test.positives(),
        },
    };
    Ok(Prepared { series, panel, train, test, upstream })
}

/// Selection on the training rows, then every configured model trained and scored on the test rows.
pub fn run_downstream(config: &PipelineConfig, train: &Panel, test: &Panel) -> Result<(DownstreamReport, Vec<TrainedModel>), PipelineError> {
    let sel = PipelineError::stage("select");
    let b = boruta(train, &config.selection.boruta(config.seed)).map_err(|e| sel(e.to_string()))?;
    let confirmed = b.confirmed();
    info!("select: Boruta confirmed {} of {}", confirmed.len(), train.n_features());
    if confirmed.is_empty() {
        return Err(sel("Boruta confirmed no features".into()));
    }
    let confirmed_panel = train.select_features(&confirmed).map_err(|e| sel(e.to_string()))?;
    let correlation = pairwise_pearson(&confirmed_panel, true).map_err(|e| sel(e.to_string()))?;
    let pruning = prune_correlated(train, &confirmed, config.selection.correlation_threshold).map_err(|e| sel(e.to_string()))?;
    let selected: Vec<String> = train.feature_names().iter().filter(|n| pruning.kept.contains(n)).cloned().collect();
    info!("select: {} features after correlation pruning", selected.len());
    let train_sel = train.select_features(&selected).map_err(|e| sel(e.to_string()))?;
    let test_sel = test.select_features(&selected).map_err(|e| sel(e.to_string()))?;
    let selection = SelectionReport { tentative: b.tentative(), rejected: b.rejected(), boruta: b, confirmed, correlation, pruning, selected };

    let trained: Vec<Result<TrainedModel, PipelineError>> = config
        .models
        .families
        .par_iter()
        .map(|&family| {
            TrainedModel::train(&config.models.spec(family), &train_sel, config.seed)
                .map_err(|e| PipelineError::Stage { stage: "train", message: format!("{}: {e}", family.display_name()) })
        })
        .collect();
    let trained: Vec<TrainedModel> = trained.into_iter().collect::<Result<_, _>>()?;

    let ev = PipelineError::stage("evaluate");
    let mut models = Vec::with_capacity(trained.len());
    for m in &trained {
        let pred = m.classify(&test_sel).map_err(|e| ev(format!("{}: {e}", m.family.display_name())))?;
        let cm = confusion(test_sel.label(), &pred).map_err(|e| ev(e.to_string()))?;
        let met = metrics(&cm).map_err(|e| ev(e.to_string()))?;
        info!("evaluate: {} accuracy {:.4} f1 {:.4}", m.family.display_name(), met.accuracy, met.f1);
        models.push(ModelReport {
            family: m.family,
            name: m.family.display_name().to_string(),
            model_file: format!("models/{}.json", m.family.slug()),
            n_train: train_sel.n_rows(),
            n_test: test_sel.n_rows(),
            confusion: cm,
            metrics: met,
            summary: ModelSummary::of(m),
            importances: m.ranked_importances(),
        });
    }
    let summary = models
        .iter()
        .map(|r| SummaryRow::new(r.family, &r.metrics))
        .collect();
    Ok((DownstreamReport { selection, models, summary }, trained))
}

fn stages(config: &PipelineConfig, up: &UpstreamReport, down: &DownstreamReport) -> Vec<StageRecord> {
    let p = |pairs: &[(&str, String)]| pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
    let bc = config.backcast;
    let sc = config.selection;
    vec![
        StageRecord {
            stage: "ingest".into(),
            inputs: vec![config.data.input.display().to_string()],
            outputs: vec![],
            parameters: p(&[("date_column", config.data.date_column.clone()), ("label", config.data.label.clone())]),
        },
        StageRecord {
            stage: "backcast".into(),
            inputs: up.backcast.iter().map(|r| r.series.clone()).collect(),
            outputs: s(&["backcast.csv"]),
            parameters: p(&[("max_k", bc.max_k.to_string()), ("max_q", bc.max_q.to_string()), ("criterion", format!("{:?}", bc.criterion).to_lowercase())]),
        },
        StageRecord {
            stage: "transform".into(),
            inputs: s(&["backcast.csv"]),
            outputs: s(&["panel.csv"]),
            parameters: p(&[("window", format!("{}..{}", up.window_start, up.window_end)), ("features", up.features.len().to_string())]),
        },
        StageRecord {
            stage: "split".into(),
            inputs: s(&["panel.csv"]),
            outputs: s(&["train.csv", "test.csv"]),
            parameters: p(&[("train_fraction", config.split.train_fraction.to_string()), ("shuffle", config.split.shuffle.to_string()), ("seed", config.seed.to_string())]),
        },
        StageRecord {
            stage: "select".into(),
            inputs: s(&["train.csv"]),
            outputs: s(&["selection.json", "correlation.svg"]),
            parameters: p(&[
                ("n_iterations", sc.n_iterations.to_string()),
                ("n_trees", sc.n_trees.to_string()),
                ("alpha", sc.alpha.to_string()),
                ("correlation_threshold", sc.correlation_threshold.to_string()),
                ("seed", config.seed.to_string()),
            ]),
        },
        StageRecord {
            stage: "train".into(),
            inputs: s(&["train.csv", "selection.json"]),
            outputs: down.models.iter().map(|m| m.model_file.clone()).collect(),
            parameters: p(&[("families", config.models.families.iter().map(|f| f.slug()).collect::<Vec<_>>().join(",")), ("seed", config.seed.to_string())]),
        },
        StageRecord {
            stage: "evaluate".into(),
            inputs: s(&["test.csv"]),
            outputs: s(&["report.json", "report.md"]),
            parameters: p(&[("threshold", "0.5".into())]),
        },
    ]
}

fn write(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(PipelineError::io(path))
}

/// Persist every artifact of a finished run under `dir`.
pub fn write_artifacts(dir: &Path, report: &RunReport, prepared: &Prepared, models: &[TrainedModel]) -> Result<(), PipelineError> {
    let model_dir = dir.join("models");
    fs::create_dir_all(&model_dir).map_err(PipelineError::io(&model_dir))?;
    let bc_path = dir.join("backcast.csv");
    let file = fs::File::create(&bc_path).map_err(PipelineError::io(&bc_path))?;
    write_series_csv(std::io::BufWriter::new(file), &report.config.data.date_column, &prepared.series)
        .map_err(|e| PipelineError::Io { path: bc_path.display().to_string(), message: e.to_string() })?;
    for (name, panel) in [("panel.csv", &prepared.panel), ("train.csv", &prepared.train), ("test.csv", &prepared.test)] {
        let path = dir.join(name);
        panel.save(&path).map_err(|e| PipelineError::Io { path: path.display().to_string(), message: e.to_string() })?;
    }
    let selection = serde_json::to_string_pretty(&report.downstream.selection).expect("selection serializes") + "\n";
    write(&dir.join("selection.json"), &selection)?;
    write(&dir.join("correlation.svg"), &correlation_svg(&report.downstream.selection.correlation))?;
    for (m, r) in models.iter().zip(&report.downstream.models) {
        write(&dir.join(&r.model_file), &(m.to_json() + "\n"))?;
        if let Some(imp) = &r.importances {
            write(&dir.join(format!("importance_{}.svg", m.family.slug())), &importance_svg(&format!("{} variable importance", r.name), imp))?;
        }
    }
    write(&dir.join("report.json"), &report.to_json())?;
    write(&dir.join("report.md"), &markdown(report))?;
    Ok(())
}

/// The full pipeline. Config and data problems surface before anything is written.
pub fn run(config: &PipelineConfig, output: Option<&Path>) -> Result<RunReport, PipelineError> {
    let prepared = prepare(config)?;
    let (downstream, models) = run_downstream(config, &prepared.train, &prepared.test)?;
    let mut echo = config.clone();
    echo.output = ".".into();
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: config.seed,
        stages: stages(config, &prepared.upstream, &downstream),
        config: echo,
        upstream: prepared.upstream.clone(),
        downstream,
    };
    let dir = output.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir());
    write_artifacts(&dir, &report, &prepared, &models)?;
    info!("report written to {}", dir.display());
    Ok(report)
}
