//! The `sparsetopic` command-line tool.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric divergence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Deserialize;

use crate::checkpoint;
use crate::corpus::{self, build_corpus, read_text_lines, split_heldout, Corpus, SplitDocument};
use crate::error::Error;
use crate::metrics::{topic_sparsity_theta, CoocStats};
use crate::model::{Regularizer, TopicModel, TrainConfig, TrainStatus, Variant};
use crate::report::{self, EvalOptions, SweepParam, SWEEP_HEADER};
use crate::synthetic::{NewsgroupLikeSpec, PlantedSpec};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

/// File names written by `train` and read back by the other subcommands.
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const TRACE_FILE: &str = "trace.csv";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const TRAIN_FILE: &str = "train.bow";
pub const TEST_OBSERVED_FILE: &str = "test_observed.bow";
pub const TEST_HELDOUT_FILE: &str = "test_heldout.bow";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("training diverged at epoch {epoch}, batch {batch}: {reason}")]
    Diverged { epoch: usize, batch: usize, reason: String },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Config(_)) => EXIT_USAGE,
            CliError::Core(
                Error::NonFiniteLoss { .. } | Error::NonFiniteGradient { .. } | Error::NumericOverflow { .. },
            ) => EXIT_DIVERGED,
            CliError::Diverged { .. } => EXIT_DIVERGED,
            CliError::Core(_) => EXIT_DATA,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "sparsetopic", version, about = "Sparse neural topic models")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write checkpoint, trace and data splits to --out.
    Train(TrainArgs),
    /// Score a checkpoint on held-out documents.
    Eval(EvalArgs),
    /// Train and evaluate once per value of gamma or the learning rate.
    Sweep(SweepArgs),
    /// Print the top words of every topic.
    Topics(TopicsArgs),
    /// Infer topic proportions for new documents.
    Infer(InferArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
}

/// Model and optimizer settings. Flags override the config file, which
/// overrides built-in defaults.
#[derive(Debug, Args)]
struct ModelArgs {
    /// TOML file with any of the settings below (snake_case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model variant [default: nsmtm].
    #[arg(long, value_enum)]
    model: Option<Variant>,
    /// Number of topics K [default: 50].
    #[arg(long)]
    topics: Option<usize>,
    /// Weight of the regularizer [default: 0.5].
    #[arg(long)]
    gamma: Option<f64>,
    /// Adam learning rate [default: 0.001].
    #[arg(long)]
    lr: Option<f64>,
    /// Passes over the training set [default: 20].
    #[arg(long)]
    epochs: Option<usize>,
    /// Minibatch size [default: 64].
    #[arg(long)]
    batch: Option<usize>,
    /// Seed for initialization, splits and training [default: 0].
    #[arg(long, env = "SPARSETOPIC_SEED")]
    seed: Option<u64>,
    /// Width of the Gaussian latent [default: 64].
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Width of topic and word embeddings [default: 128].
    #[arg(long)]
    embed_dim: Option<usize>,
    /// Encoder hidden width [default: 256].
    #[arg(long)]
    hidden: Option<usize>,
    /// Encoder dropout rate [default: 0.2].
    #[arg(long)]
    dropout: Option<f64>,
    /// Posterior regularizer [default: rw].
    #[arg(long, value_enum)]
    regularizer: Option<Regularizer>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Plain-text corpus (one document per line), or a BoW file when --vocab is given.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Vocabulary file for a BoW corpus.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Share of documents held out for testing [default: 0.1].
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Minimum corpus frequency of a term (plain-text input).
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    /// Vocabulary size cap (plain-text input).
    #[arg(long, default_value_t = 2000)]
    max_vocab: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Top words per topic used for PMI [default: 15].
    #[arg(long)]
    pmi_topn: Option<usize>,
    /// Entries at or below this count as zero in per-topic sparsity [default: 0].
    #[arg(long)]
    ts_threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Checkpoint written by train.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Observed halves of the test documents [default: next to the checkpoint].
    #[arg(long)]
    test_observed: Option<PathBuf>,
    /// Held-out halves of the test documents [default: next to the checkpoint].
    #[arg(long)]
    test_heldout: Option<PathBuf>,
    /// BoW corpus for PMI co-occurrence counts [default: the training split].
    #[arg(long)]
    reference: Option<PathBuf>,
    #[command(flatten)]
    metrics: MetricArgs,
    /// Directory for metrics.csv and metrics.txt [default: the checkpoint's].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("list").required(true).args(["gammas", "lrs"])))]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    /// Comma-separated values of gamma.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    gammas: Option<Vec<f64>>,
    /// Comma-separated learning rates.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    lrs: Option<Vec<f64>>,
    /// Output directory for sweep.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TopicsArgs {
    /// Checkpoint written by train.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Words per topic.
    #[arg(short = 'n', long = "top", default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    top: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InferArgs {
    /// Checkpoint written by train.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Plain-text documents, one per line.
    #[arg(long)]
    docs: PathBuf,
    /// Topics listed per document.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    top_topics: u64,
    /// Output directory for infer.csv and active_topics_histogram.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Five topics with disjoint 20-word supports.
    Planted,
    /// Zipfian vocabulary of 2000 terms with 20 overlapping topics.
    Newsgroups,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    /// Number of documents [default: 2000 planted, 5000 newsgroups].
    #[arg(long)]
    docs: Option<usize>,
    /// Generator seed [default: the kind's built-in seed].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the corpus files.
    #[arg(long)]
    out: PathBuf,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<Variant>,
    topics: Option<usize>,
    gamma: Option<f64>,
    lr: Option<f64>,
    epochs: Option<usize>,
    batch: Option<usize>,
    seed: Option<u64>,
    latent_dim: Option<usize>,
    embed_dim: Option<usize>,
    hidden: Option<usize>,
    dropout: Option<f64>,
    regularizer: Option<Regularizer>,
    prior_mean: Option<f64>,
    prior_std: Option<f64>,
    eps_floor: Option<f64>,
    corpus: Option<PathBuf>,
    vocab: Option<PathBuf>,
    out: Option<PathBuf>,
    test_fraction: Option<f64>,
    pmi_topn: Option<usize>,
    ts_threshold: Option<f64>,
    gammas: Option<Vec<f64>>,
    lrs: Option<Vec<f64>>,
}

fn read_file_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
}

fn train_config(args: &ModelArgs, file: &FileConfig) -> CliResult<TrainConfig> {
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        variant: args.model.or(file.model).unwrap_or(d.variant),
        topics: args.topics.or(file.topics).unwrap_or(d.topics),
        latent_dim: args.latent_dim.or(file.latent_dim).unwrap_or(d.latent_dim),
        embed_dim: args.embed_dim.or(file.embed_dim).unwrap_or(d.embed_dim),
        hidden: args.hidden.or(file.hidden).unwrap_or(d.hidden),
        gamma: args.gamma.or(file.gamma).unwrap_or(d.gamma),
        lr: args.lr.or(file.lr).unwrap_or(d.lr),
        epochs: args.epochs.or(file.epochs).unwrap_or(d.epochs),
        batch_size: args.batch.or(file.batch).unwrap_or(d.batch_size),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        prior_mean: file.prior_mean.unwrap_or(d.prior_mean),
        prior_std: file.prior_std.unwrap_or(d.prior_std),
        dropout: args.dropout.or(file.dropout).unwrap_or(d.dropout),
        eps_floor: file.eps_floor.unwrap_or(d.eps_floor),
        regularizer: args.regularizer.or(file.regularizer).unwrap_or(d.regularizer),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn existing(path: Option<&PathBuf>, what: &str) -> CliResult<PathBuf> {
    let path = path.ok_or_else(|| CliError::Usage(format!("missing {what} path")))?;
    if !path.exists() {
        return Err(CliError::Usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(path.clone())
}

fn load_corpus(data: &DataArgs, file: &FileConfig) -> CliResult<Corpus> {
    let path = existing(data.corpus.as_ref().or(file.corpus.as_ref()), "corpus")?;
    match data.vocab.as_ref().or(file.vocab.as_ref()) {
        Some(vocab) => {
            let vocab = existing(Some(vocab), "vocabulary")?;
            Ok(Corpus::read_bow(&path, &vocab)?)
        }
        None => {
            let lines = read_text_lines(&path)?;
            Ok(build_corpus(&lines, data.min_count, data.max_vocab)?)
        }
    }
}

fn output_dir(out: Option<&PathBuf>, file: &FileConfig) -> CliResult<PathBuf> {
    let dir = out.or(file.out.as_ref()).ok_or_else(|| CliError::Usage("missing --out directory".into()))?.clone();
    fs::create_dir_all(&dir).map_err(Error::from)?;
    Ok(dir)
}

fn split(corpus: &Corpus, data: &DataArgs, file: &FileConfig, seed: u64) -> CliResult<(Corpus, Vec<SplitDocument>)> {
    let fraction = data.test_fraction.or(file.test_fraction).unwrap_or(0.1);
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Usage(format!("--test-fraction {fraction} must lie in (0, 1)")));
    }
    Ok(split_heldout(corpus, fraction, seed)?)
}

fn eval_options(args: &MetricArgs, file: &FileConfig) -> CliResult<EvalOptions> {
    let d = EvalOptions::default();
    let opts = EvalOptions {
        pmi_topn: args.pmi_topn.or(file.pmi_topn).unwrap_or(d.pmi_topn),
        ts_threshold: args.ts_threshold.or(file.ts_threshold).unwrap_or(d.ts_threshold),
    };
    if opts.pmi_topn < 2 {
        return Err(CliError::Usage("--pmi-topn must be at least 2".into()));
    }
    if !opts.ts_threshold.is_finite() || opts.ts_threshold < 0.0 {
        return Err(CliError::Usage("--ts-threshold must be finite and nonnegative".into()));
    }
    Ok(opts)
}

fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Core(Error::Io(std::io::Error::other(e)))
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let file = read_file_config(args.model.config.as_deref())?;
    let cfg = train_config(&args.model, &file)?;
    let corpus = load_corpus(&args.data, &file)?;
    let out = output_dir(args.out.as_ref(), &file)?;
    let (train, test) = split(&corpus, &args.data, &file, cfg.seed)?;
    info!(
        "training {} with {} topics on {} documents ({} terms)",
        cfg.variant,
        cfg.topics,
        train.len(),
        train.vocab().len()
    );
    let run = TopicModel::train(&train, cfg.clone())?;

    write_csv(
        out.join(TRACE_FILE),
        &["epoch", "batch", "loss", "recon", "rw_term"],
        run.trace.iter().map(|r| {
            vec![
                r.epoch.to_string(),
                r.batch.to_string(),
                r.loss.to_string(),
                r.nll.to_string(),
                r.regularizer.to_string(),
            ]
        }),
    )?;
    corpus::write_vocab(train.vocab(), &out.join(VOCAB_FILE))?;
    corpus::write_bow_docs(train.docs(), &out.join(TRAIN_FILE))?;
    let (observed, heldout): (Vec<_>, Vec<_>) = test.into_iter().map(|d| (d.observed, d.heldout)).unzip();
    corpus::write_bow_docs(&observed, &out.join(TEST_OBSERVED_FILE))?;
    corpus::write_bow_docs(&heldout, &out.join(TEST_HELDOUT_FILE))?;
    let toml = toml::to_string(&cfg).map_err(|e| CliError::Core(Error::Config(e.to_string())))?;
    fs::write(out.join(CONFIG_FILE), toml).map_err(Error::from)?;
    checkpoint::save(&run.model, &out.join(CHECKPOINT_FILE))?;

    if let Some(last) = run.epoch_losses().last() {
        info!("final epoch loss {last}");
    }
    match run.status {
        TrainStatus::Completed => Ok(()),
        TrainStatus::Diverged { epoch, batch, reason } => Err(CliError::Diverged { epoch, batch, reason }),
    }
}

fn sibling(checkpoint: &Path, name: &str) -> PathBuf {
    checkpoint.parent().unwrap_or(Path::new(".")).join(name)
}

fn read_test(observed: &Path, heldout: &Path, vocab_size: usize) -> CliResult<Vec<SplitDocument>> {
    let obs = corpus::read_bow_docs(observed, vocab_size)?;
    let held = corpus::read_bow_docs(heldout, vocab_size)?;
    if obs.len() != held.len() {
        return Err(CliError::Core(Error::Split(format!(
            "{} observed halves but {} held-out halves",
            obs.len(),
            held.len()
        ))));
    }
    Ok(obs.into_iter().zip(held).map(|(observed, heldout)| SplitDocument { observed, heldout }).collect())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let ckpt = existing(Some(&args.checkpoint), "checkpoint")?;
    let model = checkpoint::load(&ckpt)?;
    let v = model.vocab().len();
    let observed =
        existing(Some(&args.test_observed.unwrap_or_else(|| sibling(&ckpt, TEST_OBSERVED_FILE))), "test set")?;
    let heldout = existing(Some(&args.test_heldout.unwrap_or_else(|| sibling(&ckpt, TEST_HELDOUT_FILE))), "test set")?;
    let reference = existing(Some(&args.reference.unwrap_or_else(|| sibling(&ckpt, TRAIN_FILE))), "reference corpus")?;
    let test = read_test(&observed, &heldout, v)?;
    let stats = CoocStats::build(&corpus::read_bow_docs(&reference, v)?, v)?;
    let opts = eval_options(&args.metrics, &FileConfig::default())?;

    let report = report::evaluate(&model, &test, &stats, opts)?;
    let out = args.out.unwrap_or_else(|| sibling(&ckpt, ""));
    fs::create_dir_all(&out).map_err(Error::from)?;
    fs::write(out.join("metrics.csv"), report.to_csv()).map_err(Error::from)?;
    fs::write(out.join("metrics.txt"), report.to_text()).map_err(Error::from)?;
    print!("{}", report.to_csv());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let file = read_file_config(args.model.config.as_deref())?;
    let (param, values) = match (args.gammas.or(file.gammas.clone()), args.lrs.or(file.lrs.clone())) {
        (Some(g), None) => (SweepParam::Gamma, g),
        (None, Some(l)) => (SweepParam::LearningRate, l),
        _ => return Err(CliError::Usage("give exactly one of --gammas and --lrs".into())),
    };
    if values.is_empty() {
        return Err(CliError::Usage("the sweep list is empty".into()));
    }
    let base = train_config(&args.model, &file)?;
    let opts = eval_options(&args.metrics, &file)?;
    let corpus = load_corpus(&args.data, &file)?;
    let out = output_dir(args.out.as_ref(), &file)?;
    let (train, test) = split(&corpus, &args.data, &file, base.seed)?;
    let rows = report::sweep(&train, &test, train.docs(), &base, param, &values, opts)?;

    let mut text = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        text.push_str(&r.csv_line());
        text.push('\n');
    }
    fs::write(out.join("sweep.csv"), &text).map_err(Error::from)?;
    print!("{text}");
    Ok(())
}

fn cmd_topics(args: TopicsArgs) -> CliResult<()> {
    let model = checkpoint::load(&existing(Some(&args.checkpoint), "checkpoint")?)?;
    let topics = model.topic_matrix()?;
    let mut rows = Vec::new();
    for k in 0..model.num_topics() {
        for (rank, (term, weight)) in model.top_words_in(&topics, k, args.top as usize)?.into_iter().enumerate() {
            rows.push(vec![k.to_string(), (rank + 1).to_string(), term, weight.to_string()]);
        }
    }
    let header = ["topic_id", "rank", "term", "weight"];
    match args.out {
        Some(path) => write_csv(path, &header, rows),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(header).map_err(csv_error)?;
            for row in rows {
                w.write_record(&row).map_err(csv_error)?;
            }
            w.flush().map_err(Error::from)?;
            Ok(())
        }
    }
}

fn cmd_infer(args: InferArgs) -> CliResult<()> {
    let model = checkpoint::load(&existing(Some(&args.checkpoint), "checkpoint")?)?;
    let lines = read_text_lines(&existing(Some(&args.docs), "documents file")?)?;
    fs::create_dir_all(&args.out).map_err(Error::from)?;
    let k = model.num_topics();
    let mut histogram = vec![0usize; k + 1];
    let mut rows = Vec::new();
    let (mut unknown, mut skipped) = (0usize, 0usize);
    for (id, tokens) in lines.iter().enumerate() {
        let (doc, dropped) = model.vocab().encode(tokens);
        unknown += dropped;
        let Some(doc) = doc else {
            warn!("document {id} has no in-vocabulary tokens; skipped");
            skipped += 1;
            continue;
        };
        let theta = model.infer_theta(&doc)?.theta;
        let mut top: Vec<usize> = theta.support().to_vec();
        top.sort_by(|&a, &b| theta.values()[b].total_cmp(&theta.values()[a]).then(a.cmp(&b)));
        top.truncate(args.top_topics as usize);
        let topk = top.iter().map(|&t| format!("{t}:{}", theta.values()[t])).collect::<Vec<_>>().join(";");
        let active = theta.support().len();
        histogram[active] += 1;
        rows.push(vec![id.to_string(), active.to_string(), topic_sparsity_theta(&theta).to_string(), topk]);
    }
    if unknown > 0 {
        info!("dropped {unknown} out-of-vocabulary tokens");
    }
    if skipped > 0 {
        warn!("skipped {skipped} documents");
    }
    write_csv(args.out.join("infer.csv"), &["doc_id", "n_active_topics", "ts_theta", "topk_topics"], rows)?;
    write_csv(
        args.out.join("active_topics_histogram.csv"),
        &["n_active_topics", "documents"],
        (1..=k).map(|n| vec![n.to_string(), histogram[n].to_string()]),
    )
}

fn write_text_corpus(corpus: &Corpus, path: &Path) -> CliResult<()> {
    let mut text = String::new();
    for doc in corpus.docs() {
        let words: Vec<&str> =
            doc.tokens().into_iter().map(|t| corpus.vocab().term(t).expect("ids come from the vocabulary")).collect();
        text.push_str(&words.join(" "));
        text.push('\n');
    }
    fs::write(path, text).map_err(Error::from)?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    fs::create_dir_all(&args.out).map_err(Error::from)?;
    let corpus = match args.kind {
        SynthKind::Planted => {
            let mut spec = PlantedSpec::default();
            spec.docs = args.docs.unwrap_or(spec.docs);
            spec.seed = args.seed.unwrap_or(spec.seed);
            let planted = spec.generate()?;
            let vocab = planted.corpus.vocab();
            write_csv(
                args.out.join("planted_topics.csv"),
                &["topic_id", "rank", "term"],
                planted.topic_words.iter().enumerate().flat_map(|(k, words)| {
                    words
                        .iter()
                        .enumerate()
                        .map(move |(r, &w)| vec![k.to_string(), (r + 1).to_string(), vocab.terms()[w].clone()])
                }),
            )?;
            planted.corpus
        }
        SynthKind::Newsgroups => {
            let mut spec = NewsgroupLikeSpec::default();
            spec.docs = args.docs.unwrap_or(spec.docs);
            spec.seed = args.seed.unwrap_or(spec.seed);
            spec.generate()?
        }
    };
    corpus.write_bow(&args.out.join("corpus.bow"), &args.out.join(VOCAB_FILE))?;
    write_text_corpus(&corpus, &args.out.join("corpus.txt"))?;
    info!("wrote {} documents to {}", corpus.len(), args.out.display());
    Ok(())
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Topics(a) => cmd_topics(a),
        Command::Infer(a) => cmd_infer(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
