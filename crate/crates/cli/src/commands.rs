use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context};
use attrib_core::baseline::{
    build_kmer_index, predict_naive_bayes, predict_similarity, KmerIndex, NaiveBayes, SortMode,
    DEFAULT_EVALUE_THRESHOLD, DEFAULT_K,
};
use attrib_core::calibration::{calibration_table, DEFAULT_BINS};
use attrib_core::data::{
    load_fasta, load_labels, load_lineage, load_metadata, load_predictions, save_predictions,
    validate, write_fasta, write_labels, CategoryId, LabelMap, LineageGraph, PredictionMatrix,
    SequenceRecord,
};
use attrib_core::ensemble::{ensemble, EnsembleSpec};
use attrib_core::prep::{
    encode_metadata, lineage_components, obfuscate_ids, pool_small_labs, split_dataset, Split,
    SplitConfig, DEFAULT_POOL_THRESHOLD, UNKNOWN_ENGINEERED,
};
use attrib_core::rank::{accuracy_curve, rank_matrix, x_metrics, DEFAULT_X_THRESHOLDS};
use attrib_core::report::{
    accuracy_curve_svg, build_report, format_leaderboard, leaderboard, reliability_svg,
    write_accuracy_curve_csv, write_leaderboard_csv, MetricReport, Provenance, ReportOptions,
};
use attrib_core::stats::{decile_groups, write_deciles_csv, Summary};
use attrib_core::Error as CoreError;
use log::{info, warn};
use serde_json::json;

use crate::config::{parse_list, Config};
use crate::{BaselineCommand, Cli, Command, Format, Inputs, Method, Mode, PrepArgs};

const DEFAULT_TOKEN_LENGTH: usize = 12;
const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Debug)]
pub enum Failure {
    /// Inputs failed validation; each line is one finding.
    Validation(Vec<String>),
    /// Bad or infeasible configuration.
    Config(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Config(_) => 3,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::from(anyhow::Error::from(e))
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let Some(core) = e.chain().find_map(|c| c.downcast_ref::<CoreError>()) else {
            return Failure::Internal(e);
        };
        match core {
            CoreError::Io { .. } | CoreError::ConstraintViolation(_) => Failure::Internal(e),
            CoreError::InfeasibleCategory { .. }
            | CoreError::InvalidArgument(_)
            | CoreError::KMismatch { .. } => Failure::Config(e),
            _ => Failure::Validation(vec![format!("error: {e:#}")]),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.into())
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn config_error(msg: impl std::fmt::Display) -> Failure {
    Failure::Config(anyhow!("{msg}"))
}

struct Ctx {
    config: Config,
    seed: Option<u64>,
    format: Option<Format>,
}

impl Ctx {
    fn opt<T: FromStr>(&self, cli: Option<T>, key: &str) -> CmdResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.config.pick(cli, key).map_err(Failure::Config)
    }

    fn path(&self, cli: Option<PathBuf>, key: &str) -> CmdResult<PathBuf> {
        self.opt(cli, key)?
            .ok_or_else(|| config_error(format!("missing --{}", key.replace('_', "-"))))
    }

    fn seed(&self) -> CmdResult<Option<u64>> {
        self.opt(self.seed, "seed")
    }

    fn require_seed(&self, what: &str) -> CmdResult<u64> {
        self.seed()?.ok_or_else(|| {
            config_error(format!("{what} is randomized and needs an explicit --seed"))
        })
    }

    fn format(&self) -> CmdResult<Option<Format>> {
        self.opt(self.format, "format")
    }
}

pub fn run(cli: Cli) -> CmdResult {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(Failure::Config)?,
        None => Config::default(),
    };
    let ctx = Ctx {
        config,
        seed: cli.seed,
        format: cli.format,
    };
    match cli.command {
        Command::Validate { inputs } => cmd_validate(&ctx, inputs),
        Command::Score {
            inputs,
            name,
            bins,
            target,
            out,
        } => cmd_score(&ctx, inputs, name, bins, target, out),
        Command::Xmetrics {
            inputs,
            thresholds,
            out,
        } => cmd_xmetrics(&ctx, inputs, thresholds, out),
        Command::Calibration { inputs, bins, out } => cmd_calibration(&ctx, inputs, bins, out),
        Command::Ensemble {
            inputs,
            output,
            weights,
        } => cmd_ensemble(inputs, output, weights),
        Command::Compare {
            reports,
            out,
            deciles,
        } => cmd_compare(&ctx, reports, out, deciles),
        Command::Prep(args) => cmd_prep(&ctx, args),
        Command::Baseline(BaselineCommand::BuildIndex {
            fasta,
            labels,
            k,
            canonical,
            out,
        }) => cmd_build_index(&ctx, fasta, labels, k, canonical, out),
        Command::Baseline(BaselineCommand::Predict {
            index,
            fasta,
            output,
            method,
            mode,
            k,
            evalue_threshold,
            alpha,
            labels,
        }) => cmd_predict(
            &ctx,
            PredictArgs {
                index,
                fasta,
                output,
                method,
                mode,
                k,
                evalue_threshold,
                alpha,
                labels,
            },
        ),
        Command::Plotdata {
            report,
            out_dir,
            svg,
        } => cmd_plotdata(&ctx, report, out_dir, svg),
    }
}

fn sink(out: Option<&Path>) -> CmdResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(out: Option<&Path>, text: &str) -> CmdResult {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> CmdResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.into()))
}

struct Loaded {
    predictions_path: PathBuf,
    labels_path: PathBuf,
    matrix: PredictionMatrix,
    labels: LabelMap,
}

/// Loads and validates a prediction/label pair; findings become exit code 2.
fn load_valid(ctx: &Ctx, inputs: Inputs) -> CmdResult<Loaded> {
    let predictions_path = ctx.path(inputs.predictions, "predictions")?;
    let labels_path = ctx.path(inputs.labels, "labels")?;
    let matrix = load_predictions(&predictions_path)?;
    let labels = load_labels(&labels_path)?;
    let report = validate(&matrix, &labels);
    if !report.ok {
        return Err(Failure::Validation(report.lines()));
    }
    Ok(Loaded {
        predictions_path,
        labels_path,
        matrix,
        labels,
    })
}

fn cmd_validate(ctx: &Ctx, inputs: Inputs) -> CmdResult {
    let loaded = load_valid(ctx, inputs)?;
    println!(
        "ok: {} sequences x {} categories",
        loaded.matrix.num_sequences(),
        loaded.matrix.num_categories()
    );
    Ok(())
}

fn cmd_score(
    ctx: &Ctx,
    inputs: Inputs,
    name: Option<String>,
    bins: Option<usize>,
    target: Option<String>,
    out: Option<PathBuf>,
) -> CmdResult {
    let loaded = load_valid(ctx, inputs)?;
    let name = match ctx.opt(name, "name")? {
        Some(n) => n,
        None => loaded
            .predictions_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "predictor".into()),
    };
    let mut options = ReportOptions::new(name);
    options.bins = ctx.opt(bins, "bins")?.unwrap_or(DEFAULT_BINS);
    options.target = ctx.opt(target, "target")?.map(CategoryId::new);
    let provenance =
        Provenance::from_files(&loaded.predictions_path, &loaded.labels_path, ctx.seed()?)?;
    let report = build_report(&loaded.matrix, &loaded.labels, &options, provenance)?;
    match ctx.format()?.unwrap_or(Format::Json) {
        Format::Json => write_text(out.as_deref(), &report.to_json()?),
        Format::Csv => {
            let mut w = sink(out.as_deref())?;
            report.write_summary_csv(&mut w)?;
            Ok(())
        }
    }
}

fn cmd_xmetrics(
    ctx: &Ctx,
    inputs: Inputs,
    thresholds: Option<String>,
    out: Option<PathBuf>,
) -> CmdResult {
    let thresholds = match ctx.opt(thresholds, "thresholds")? {
        Some(raw) => parse_list::<f64>(&raw).map_err(Failure::Config)?,
        None => DEFAULT_X_THRESHOLDS.to_vec(),
    };
    if let Some(t) = thresholds.iter().find(|&&t| !(t > 0.0 && t <= 100.0)) {
        return Err(config_error(format!("threshold {t} is outside (0, 100]")));
    }
    let loaded = load_valid(ctx, inputs)?;
    let curve = accuracy_curve(&rank_matrix(&loaded.matrix), &loaded.labels)?;
    let set = x_metrics(&curve, &thresholds);
    match ctx.format()?.unwrap_or(Format::Json) {
        Format::Json => write_text(
            out.as_deref(),
            &to_json(&json!({
                "thresholds": set.thresholds,
                "scores": set.scores,
                "accuracy_curve": curve.values(),
            }))?,
        ),
        Format::Csv => {
            let mut text = String::from("threshold,n\n");
            for (t, s) in set.thresholds.iter().zip(&set.scores) {
                text.push_str(&format!("{t},{s}\n"));
            }
            write_text(out.as_deref(), &text)
        }
    }
}

fn cmd_calibration(
    ctx: &Ctx,
    inputs: Inputs,
    bins: Option<usize>,
    out: Option<PathBuf>,
) -> CmdResult {
    let bins = ctx.opt(bins, "bins")?.unwrap_or(DEFAULT_BINS);
    if bins == 0 {
        return Err(config_error("--bins must be positive"));
    }
    let loaded = load_valid(ctx, inputs)?;
    let table = calibration_table(&loaded.matrix, &loaded.labels, bins)?;
    match ctx.format()?.unwrap_or(Format::Json) {
        Format::Json => write_text(out.as_deref(), &to_json(&table)?),
        Format::Csv => {
            let mut w = sink(out.as_deref())?;
            table.write_csv(&mut w)?;
            Ok(())
        }
    }
}

fn cmd_ensemble(inputs: Vec<PathBuf>, output: PathBuf, weights: Option<String>) -> CmdResult {
    let weights = weights
        .map(|raw| parse_list::<f64>(&raw))
        .transpose()
        .map_err(Failure::Config)?;
    let members = inputs
        .iter()
        .map(load_predictions)
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&PredictionMatrix> = members.iter().collect();
    let spec = match weights {
        Some(w) => EnsembleSpec::weighted(refs, w),
        None => EnsembleSpec::uniform(refs),
    };
    let combined = ensemble(&spec)?;
    save_predictions(&combined, &output)?;
    info!(
        "averaged {} members into {}",
        members.len(),
        output.display()
    );
    Ok(())
}

fn cmd_compare(
    ctx: &Ctx,
    paths: Vec<PathBuf>,
    out: Option<PathBuf>,
    deciles: Option<PathBuf>,
) -> CmdResult {
    let reports = paths
        .iter()
        .map(MetricReport::load)
        .collect::<Result<Vec<_>, _>>()?;
    let rows = leaderboard(&reports);
    if let Some(path) = deciles {
        let scores: Vec<(String, f64)> = rows.iter().map(|r| (r.name.clone(), r.top10)).collect();
        let groups = decile_groups(&scores, Summary::Arithmetic)?;
        write_deciles_csv(&groups, sink(Some(&path))?)?;
    }
    match ctx.format()? {
        None => write_text(out.as_deref(), &format_leaderboard(&rows)),
        Some(Format::Json) => write_text(out.as_deref(), &to_json(&rows)?),
        Some(Format::Csv) => {
            let mut w = sink(out.as_deref())?;
            write_leaderboard_csv(&rows, &mut w)?;
            Ok(())
        }
    }
}

fn apply_labs(records: &mut [SequenceRecord], labs: &LabelMap) -> CmdResult {
    for r in records.iter_mut() {
        r.lab_id = Some(labs.require(&r.sequence_id)?.as_str().to_owned());
    }
    Ok(())
}

fn cmd_prep(ctx: &Ctx, args: PrepArgs) -> CmdResult {
    let seed = ctx.require_seed("prep")?;
    let fasta = ctx.path(args.fasta, "fasta")?;
    let out_dir = ctx.path(args.out_dir, "out_dir")?;
    let threshold = ctx
        .opt(args.pool_threshold, "pool_threshold")?
        .unwrap_or(DEFAULT_POOL_THRESHOLD);
    let token_length = ctx
        .opt(args.token_length, "token_length")?
        .unwrap_or(DEFAULT_TOKEN_LENGTH);
    let mut split_config = SplitConfig::new(seed);
    if let Some(m) = ctx.opt(args.min_holdout, "min_holdout")? {
        split_config.min_holdout = m;
    }
    if let Some(m) = ctx.opt(args.min_length, "min_length")? {
        split_config.min_sequence_length = m;
    }
    if let Some(raw) = ctx.opt(args.fractions, "fractions")? {
        let f = parse_list::<f64>(&raw).map_err(Failure::Config)?;
        split_config.fractions = f
            .try_into()
            .map_err(|_| config_error("--fractions needs exactly three values"))?;
    }

    let mut records = load_fasta(&fasta)?;
    if let Some(path) = ctx.opt(args.labs, "labs")? {
        apply_labs(&mut records, &load_labels(&path)?)?;
    }
    if let Some(path) = ctx.opt(args.metadata, "metadata")? {
        let mut metadata = load_metadata(&path)?;
        for r in records.iter_mut() {
            if let Some(m) = metadata.swap_remove(&r.sequence_id) {
                r.metadata = m;
            }
        }
        for id in metadata.keys() {
            warn!("metadata row for unknown sequence `{id}` ignored");
        }
    }
    let ids: Vec<String> = records.iter().map(|r| r.sequence_id.clone()).collect();
    let graph = match ctx.opt(args.lineage, "lineage")? {
        Some(path) => load_lineage(&path, ids.iter().map(String::as_str))?,
        None => LineageGraph::new(Vec::new())?,
    };

    let pooling = pool_small_labs(&records, threshold, &CategoryId::from(UNKNOWN_ENGINEERED))?;
    let components = lineage_components(&graph, &ids)?;
    let split = split_dataset(&records, &pooling, &components, &split_config)?;
    let obfuscation = obfuscate_ids(&ids, seed, token_length)?;
    let onehot = encode_metadata(&records)?;

    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let file = |name: &str| -> CmdResult<BufWriter<File>> {
        let path = out_dir.join(name);
        Ok(BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        ))
    };
    split.write_csv(file("split.csv")?)?;
    pooling.write_csv(file("pooling.csv")?)?;
    obfuscation.write_csv(file("obfuscation.csv")?)?;
    onehot.write_csv(file("onehot.csv")?)?;

    let mut labels = LabelMap::default();
    let mut per_split: [Vec<SequenceRecord>; 3] = Default::default();
    for r in &records {
        let Some(s) = split.get(&r.sequence_id) else {
            continue;
        };
        let lab = r.lab_id.as_deref().unwrap_or_default();
        let category = pooling
            .category_of(lab)
            .ok_or_else(|| anyhow!("lab `{lab}` missing from pooling"))?;
        labels.insert(r.sequence_id.clone(), category.clone())?;
        let mut out = r.clone();
        out.lab_id = Some(category.as_str().to_owned());
        per_split[Split::ALL.iter().position(|x| *x == s).unwrap_or(0)].push(out);
    }
    write_labels(&labels, file("labels.csv")?)?;
    for (s, recs) in Split::ALL.iter().zip(&per_split) {
        write_fasta(recs, file(&format!("{}.fasta", s.as_str()))?)?;
    }

    let counts = split.counts();
    let realized = split.realized_fractions();
    match ctx.format()?.unwrap_or(Format::Json) {
        Format::Json => {
            let summary = json!({
                "seed": seed,
                "records": records.len(),
                "categories": pooling.num_categories(),
                "components": components.len(),
                "dropped": split.dropped,
                "splits": Split::ALL.iter().enumerate().map(|(i, s)| json!({
                    "split": s.as_str(),
                    "count": counts[i],
                    "fraction": realized[i],
                    "target": split.fractions_target[i],
                })).collect::<Vec<_>>(),
            });
            write_text(None, &to_json(&summary)?)
        }
        Format::Csv => {
            let mut text = String::from("split,count,fraction,target\n");
            for (i, s) in Split::ALL.iter().enumerate() {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    s.as_str(),
                    counts[i],
                    realized[i],
                    split.fractions_target[i]
                ));
            }
            write_text(None, &text)
        }
    }
}

/// Labels from a CSV if given, otherwise from FASTA headers.
fn training_labels(
    ctx: &Ctx,
    records: &[SequenceRecord],
    labels: Option<PathBuf>,
) -> CmdResult<LabelMap> {
    if let Some(path) = ctx.opt(labels, "labels")? {
        return Ok(load_labels(&path)?);
    }
    let mut map = LabelMap::default();
    for r in records {
        let lab = r
            .lab_id
            .as_deref()
            .ok_or_else(|| CoreError::MissingLabel(r.sequence_id.clone()))?;
        map.insert(r.sequence_id.clone(), CategoryId::from(lab))?;
    }
    Ok(map)
}

fn cmd_build_index(
    ctx: &Ctx,
    fasta: Option<PathBuf>,
    labels: Option<PathBuf>,
    k: Option<usize>,
    canonical: bool,
    out: PathBuf,
) -> CmdResult {
    let records = load_fasta(ctx.path(fasta, "fasta")?)?;
    let labels = training_labels(ctx, &records, labels)?;
    let k = ctx.opt(k, "k")?.unwrap_or(DEFAULT_K);
    let canonical = canonical || ctx.opt(None, "canonical")?.unwrap_or(false);
    let index = build_kmer_index(&records, &labels, k, canonical)?;
    index.save(&out)?;
    info!(
        "indexed {} sequences, {} distinct {k}-mers",
        index.len(),
        index.distinct_kmers()
    );
    Ok(())
}

struct PredictArgs {
    index: Option<PathBuf>,
    fasta: Option<PathBuf>,
    output: PathBuf,
    method: Option<Method>,
    mode: Option<Mode>,
    k: Option<usize>,
    evalue_threshold: Option<f64>,
    alpha: Option<f64>,
    labels: Option<PathBuf>,
}

fn cmd_predict(ctx: &Ctx, args: PredictArgs) -> CmdResult {
    let method = ctx
        .opt(args.method, "method")?
        .unwrap_or(Method::Similarity);
    let mode = ctx.opt(args.mode, "mode")?.unwrap_or(Mode::Stable);
    let sort_mode = match (method, mode) {
        (Method::Similarity, Mode::Unstable) => SortMode::Unstable {
            seed: ctx.require_seed("unstable sorting")?,
        },
        _ => SortMode::Stable,
    };
    let threshold = ctx
        .opt(args.evalue_threshold, "evalue_threshold")?
        .unwrap_or(DEFAULT_EVALUE_THRESHOLD);
    let index = KmerIndex::load(ctx.path(args.index, "index")?)?;
    if let Some(k) = ctx.opt(args.k, "k")? {
        if k != index.k() {
            return Err(CoreError::KMismatch {
                index: index.k(),
                requested: k,
            }
            .into());
        }
    }
    let queries = load_fasta(ctx.path(args.fasta, "fasta")?)?;
    let mut categories: BTreeSet<CategoryId> = index.categories().into_iter().collect();
    if let Some(path) = ctx.opt(args.labels, "labels")? {
        categories.extend(load_labels(&path)?.categories().into_iter().cloned());
    }
    let categories: Vec<CategoryId> = categories.into_iter().collect();
    let matrix = match method {
        Method::Similarity => {
            predict_similarity(&index, &queries, sort_mode, threshold, Some(categories))?
        }
        Method::NaiveBayes => {
            let alpha = ctx.opt(args.alpha, "alpha")?.unwrap_or(DEFAULT_ALPHA);
            let model = NaiveBayes::from_index(&index, alpha)?;
            predict_naive_bayes(&model, &queries, Some(categories))?
        }
    };
    save_predictions(&matrix, &args.output)?;
    info!(
        "wrote {} x {} predictions to {}",
        matrix.num_sequences(),
        matrix.num_categories(),
        args.output.display()
    );
    Ok(())
}

fn cmd_plotdata(ctx: &Ctx, report: PathBuf, out_dir: Option<PathBuf>, svg: bool) -> CmdResult {
    let report = MetricReport::load(&report)?;
    let out_dir = ctx
        .opt(out_dir, "out_dir")?
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let create = |name: &str| -> CmdResult<BufWriter<File>> {
        let path = out_dir.join(name);
        Ok(BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        ))
    };
    write_accuracy_curve_csv(&report, create("accuracy_curve.csv")?)?;
    report.calibration.write_csv(create("calibration.csv")?)?;
    if let Some(analysis) = &report.category_analysis {
        analysis.write_csv(create("category_analysis.csv")?)?;
    }
    if svg {
        create("accuracy_curve.svg")?.write_all(accuracy_curve_svg(&report).as_bytes())?;
        create("reliability.svg")?
            .write_all(reliability_svg(&report.name, &report.calibration).as_bytes())?;
    }
    Ok(())
}
