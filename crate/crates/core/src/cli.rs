//! Command-line pipeline: synth, keywords, train, eval, classify, rank, report.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    classify_corpus, cross_validate, read_model, train, write_model, ClassifierKind, LabeledDataset, RelevanceModel,
    TrainConfig,
};
use crate::corpus::{keyword_filter, load_corpus, load_follower_graph, read_id_list, write_corpus, write_follower_graph, KeywordSet};
use crate::error::{Error, Result};
use crate::jsonfmt::{self, FloatStyle};
use crate::ranker::{
    build_transition, candidate_filter, connected_components, ranking_report, relevant_histogram, score_candidates,
    stats_from_labeled, twitterrank, Metric, RankConfig, RankingReport, ReportRow, TAIL_BUCKETS,
};
use crate::synthlab::{generate, SynthConfig, SEED_KEYWORDS};
use crate::text::{build_vocabulary, fold_token, tfidf_rank, ReplacementTable};

#[derive(Debug, Parser)]
#[command(name = "sensor-rank", version, about = "Relevance classification and social-sensor ranking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic harvest, training sample and follower graph.
    Synth(Options),
    /// Expand a seed keyword set by TF-IDF over the seed-filtered corpus.
    Keywords(Options),
    /// Train a relevance model on a labeled corpus.
    Train(Options),
    /// Stratified cross-validation on a labeled corpus.
    Eval(Options),
    /// Label a corpus with a trained model.
    Classify(Options),
    /// Rank candidate users of a classified corpus.
    Rank(Options),
    /// Print a top-k table from the output of `rank`.
    Report(Options),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Keywords(_) => "keywords",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Classify(_) => "classify",
            Command::Rank(_) => "rank",
            Command::Report(_) => "report",
        }
    }

    fn options(&self) -> &Options {
        match self {
            Command::Synth(o)
            | Command::Keywords(o)
            | Command::Train(o)
            | Command::Eval(o)
            | Command::Classify(o)
            | Command::Rank(o)
            | Command::Report(o) => o,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long = "min-relevant")]
    pub min_relevant: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub ngrams: Option<u8>,
    #[arg(long, value_parser = ["mnnb", "rf"])]
    pub classifier: Option<String>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "smote-percent")]
    pub smote_percent: Option<u32>,
    #[arg(long = "smote-k")]
    pub smote_k: Option<usize>,
    #[arg(long = "spread-ratio")]
    pub spread_ratio: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Users to leave out of ranking, one id per line.
    #[arg(long)]
    pub exclusions: Option<PathBuf>,
    /// Headerless `from,to` CSV of exact token replacements.
    #[arg(long)]
    pub replacements: Option<PathBuf>,
    /// Stopwords, one per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Seed keywords, one per line (built-in list when absent).
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Terms rejected from keyword expansion, one per line.
    #[arg(long = "manual-exclusions")]
    pub manual_exclusions: Option<PathBuf>,
    /// Number of keywords added by expansion.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long, value_parser = ["tr", "tf", "of"])]
    pub metric: Option<String>,
}

/// Effective settings after merging the config file with flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub exclusions: Option<PathBuf>,
    pub replacements: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub manual_exclusions: Option<PathBuf>,
    pub seed: Option<u64>,
    pub classifier: ClassifierKind,
    pub n_max: usize,
    pub alpha: f64,
    pub n_trees: usize,
    pub smote_percent: u32,
    pub smote_k: usize,
    pub spread_ratio: Option<f64>,
    pub folds: usize,
    pub top: usize,
    pub metric: Metric,
    pub rank: RankConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        PipelineConfig {
            corpus: None,
            graph: None,
            model: None,
            out: None,
            exclusions: None,
            replacements: None,
            stopwords: None,
            seeds: None,
            manual_exclusions: None,
            seed: None,
            classifier: train.classifier,
            n_max: 3,
            alpha: train.alpha,
            n_trees: train.n_trees,
            smote_percent: train.smote_percent,
            smote_k: train.smote_k,
            spread_ratio: train.spread_ratio,
            folds: 10,
            top: 10,
            metric: Metric::Tr,
            rank: RankConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Loads `options.config` (if any) and applies every flag on top.
    pub fn resolve(options: &Options) -> Result<Self> {
        let mut c = match &options.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text)?
            }
            None => PipelineConfig::default(),
        };
        let o = options.clone();
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $( if let Some(v) = o.$flag { $field = v.into(); } )*
            };
        }
        set!(
            corpus => c.corpus, graph => c.graph, model => c.model, out => c.out,
            exclusions => c.exclusions, replacements => c.replacements, stopwords => c.stopwords,
            seeds => c.seeds, manual_exclusions => c.manual_exclusions,
            gamma => c.rank.gamma, tol => c.rank.tol, max_iter => c.rank.max_iter,
            min_relevant => c.rank.min_relevant, k => c.rank.k,
            trees => c.n_trees, alpha => c.alpha, smote_percent => c.smote_percent,
            smote_k => c.smote_k, folds => c.folds, top => c.top,
        );
        if let Some(seed) = o.seed {
            c.seed = Some(seed);
        }
        if let Some(r) = o.spread_ratio {
            c.spread_ratio = Some(r);
        }
        if let Some(n) = o.ngrams {
            c.n_max = n as usize;
        }
        if let Some(kind) = &o.classifier {
            c.classifier = kind.parse()?;
        }
        if let Some(metric) = &o.metric {
            c.metric = metric.parse()?;
        }
        Ok(c)
    }

    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidArgument("a seed is required (--seed or `seed` in the config)".into()))
    }

    fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            classifier: self.classifier,
            alpha: self.alpha,
            n_trees: self.n_trees,
            smote_percent: self.smote_percent,
            smote_k: self.smote_k,
            spread_ratio: self.spread_ratio,
            seed: self.seed()?,
        })
    }

    fn out_dir(&self) -> Result<&Path> {
        let dir = self.out.as_deref().ok_or_else(|| Error::InvalidArgument("--out is required".into()))?;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(dir)
    }

    fn corpus_path(&self) -> Result<&Path> {
        self.corpus.as_deref().ok_or_else(|| Error::InvalidArgument("--corpus is required".into()))
    }

    fn table(&self) -> Result<ReplacementTable> {
        match &self.replacements {
            Some(path) => ReplacementTable::load(path),
            None => Ok(ReplacementTable::default()),
        }
    }

    fn model_path(&self) -> Result<PathBuf> {
        match (&self.model, &self.out) {
            (Some(m), _) => Ok(m.clone()),
            (None, Some(out)) => Ok(out.join("model.json")),
            (None, None) => Err(Error::InvalidArgument("--model or --out is required".into())),
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T, style: FloatStyle) -> Result<()> {
    let mut text = jsonfmt::to_string_pretty(value, style)?;
    text.push('\n');
    write_text(path, &text)
}

fn word_set(path: Option<&Path>) -> Result<HashSet<String>> {
    Ok(match path {
        Some(p) => read_id_list(p)?.iter().map(|w| fold_token(w)).collect(),
        None => HashSet::new(),
    })
}

/// Runs one parsed command.
pub fn run(cli: &Cli) -> Result<()> {
    let config = PipelineConfig::resolve(cli.command.options())?;
    match &cli.command {
        Command::Synth(_) => cmd_synth(&config),
        Command::Keywords(_) => cmd_keywords(&config).map(|report| print!("{report}")),
        Command::Train(_) => cmd_train(&config),
        Command::Eval(_) => cmd_eval(&config),
        Command::Classify(_) => cmd_classify(&config),
        Command::Rank(_) => cmd_rank(&config),
        Command::Report(_) => cmd_report(&config).map(|table| print!("{table}")),
    }
}

/// Parses `args`, runs the command and reports failures as one JSON line on
/// stderr. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let line = serde_json::json!({
                "error": e.kind(),
                "command": cli.command.name(),
                "message": e.to_string(),
            });
            eprintln!("{line}");
            1
        }
    }
}

pub fn cmd_synth(config: &PipelineConfig) -> Result<()> {
    let synth = SynthConfig {
        seed: config.seed()?,
        ..config.synth.clone()
    };
    let out = config.out_dir()?;
    let data = generate(&synth)?;
    info!("generated {} tweets, {} follow edges", data.corpus.len(), data.graph.edge_count());
    write_corpus(&out.join("harvest.jsonl"), &data.corpus)?;
    write_corpus(&out.join("gold.jsonl"), &data.labeled())?;
    write_corpus(&out.join("training.jsonl"), &data.training_corpus())?;
    write_follower_graph(&out.join("followers.csv"), &data.graph)?;
    write_json(&out.join("synth_config.json"), &synth, FloatStyle::Exact)
}

#[derive(Debug, Serialize)]
struct ScoredTerm {
    term: String,
    score: f64,
}

#[derive(Debug, Serialize)]
struct KeywordReport {
    seeds: Vec<String>,
    harvested: usize,
    candidates: Vec<ScoredTerm>,
    additions: Vec<String>,
    merged: Vec<String>,
}

/// Filters the corpus by the seed keywords, ranks its unigrams by TF-IDF and
/// adds the best `top` terms that are not seeds, stopwords or excluded.
/// Returns the JSON report printed on stdout.
pub fn cmd_keywords(config: &PipelineConfig) -> Result<String> {
    let seeds: Vec<String> = match &config.seeds {
        Some(p) => read_id_list(p)?,
        None => SEED_KEYWORDS.iter().map(|s| s.to_string()).collect(),
    };
    let seed_set = KeywordSet::new(&seeds);
    let table = config.table()?;
    let corpus = load_corpus(config.corpus_path()?)?;
    let harvest = keyword_filter(&corpus, &seed_set, &table)?;
    if harvest.is_empty() {
        return Err(Error::Empty("seed-filtered corpus"));
    }
    let stopwords = word_set(config.stopwords.as_deref())?;
    let excluded = word_set(config.manual_exclusions.as_deref())?;
    let vocab = build_vocabulary(&harvest, &table, 1)?;
    let ranked: Vec<ScoredTerm> = tfidf_rank(&harvest, &vocab, &stopwords, &table)
        .into_iter()
        .filter(|(t, _)| !seed_set.contains(t) && !excluded.contains(t))
        .map(|(term, score)| ScoredTerm { term, score })
        .collect();
    let additions: Vec<String> = ranked.iter().take(config.top).map(|s| s.term.clone()).collect();
    let mut merged = seed_set.clone();
    for a in &additions {
        merged.insert(a);
    }
    let report = KeywordReport {
        seeds: seed_set.iter().map(str::to_string).collect(),
        harvested: harvest.len(),
        candidates: ranked.into_iter().take(config.top.max(20)).collect(),
        additions,
        merged: merged.iter().map(str::to_string).collect(),
    };
    if let Some(out) = &config.out {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let list: String = report.merged.iter().map(|k| format!("{k}\n")).collect();
        write_text(&out.join("keywords.txt"), &list)?;
    }
    let mut text = jsonfmt::to_string_pretty(&report, FloatStyle::Fixed(4))?;
    text.push('\n');
    Ok(text)
}

pub fn cmd_train(config: &PipelineConfig) -> Result<()> {
    let train_config = config.train_config()?;
    let table = config.table()?;
    let corpus = load_corpus(config.corpus_path()?)?;
    let vocabulary = build_vocabulary(&corpus, &table, config.n_max)?;
    let data = LabeledDataset::from_corpus(&corpus, &vocabulary, &table)?;
    info!("training {} on {} records, {} features", train_config.classifier, data.len(), vocabulary.len());
    let model = RelevanceModel {
        classifier: train(&data, &train_config)?,
        vocabulary,
        table_digest: table.digest(),
    };
    let path = config.model_path()?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_model(&path, &model)
}

pub fn cmd_eval(config: &PipelineConfig) -> Result<()> {
    let train_config = config.train_config()?;
    let table = config.table()?;
    let corpus = load_corpus(config.corpus_path()?)?;
    let out = config.out_dir()?;
    let vocabulary = build_vocabulary(&corpus, &table, config.n_max)?;
    let data = LabeledDataset::from_corpus(&corpus, &vocabulary, &table)?;
    let report = cross_validate(&data, config.folds, &train_config, train_config.seed)?;
    info!("accuracy {:.4}, weighted F {:.4}", report.accuracy, report.weighted_f);
    write_json(&out.join("eval_report.json"), &report, FloatStyle::Fixed(4))
}

pub fn cmd_classify(config: &PipelineConfig) -> Result<()> {
    let model = read_model(&config.model_path()?)?;
    let table = config.table()?;
    let corpus = load_corpus(config.corpus_path()?)?;
    let out = config.out_dir()?;
    let labeled = classify_corpus(&model, &corpus, &table)?;
    write_corpus(&out.join("classified.jsonl"), &labeled)
}

#[derive(Debug, Serialize)]
struct HistogramRow {
    bucket: &'static str,
    users: u64,
}

#[derive(Debug, Serialize)]
struct RankSummary {
    users: usize,
    candidates: usize,
    excluded: usize,
    iterations: usize,
    final_residual: f64,
    converged: bool,
    histogram: Vec<HistogramRow>,
}

pub fn cmd_rank(config: &PipelineConfig) -> Result<()> {
    let corpus = load_corpus(config.corpus_path()?)?;
    let graph_path = config.graph.as_deref().ok_or_else(|| Error::InvalidArgument("--graph is required".into()))?;
    let graph = load_follower_graph(graph_path)?;
    let excluded: HashSet<String> = match &config.exclusions {
        Some(p) => read_id_list(p)?.into_iter().collect(),
        None => HashSet::new(),
    };
    let out = config.out_dir()?;
    let stats = stats_from_labeled(&corpus.records)?;
    let candidates = candidate_filter(&stats, &config.rank, &excluded)?;
    info!("{} candidates of {} users", candidates.len(), stats.len());
    let p = build_transition(&candidates, &graph);
    let ranks = twitterrank(&p, &candidates, &config.rank)?;
    if !ranks.converged {
        log::warn!("TwitterRank stopped after {} iterations without converging", ranks.iterations);
    }
    for metric in Metric::ALL {
        let report = ranking_report(&candidates, &ranks, metric, config.rank.k)?;
        write_text(&out.join(format!("ranking_{metric}.tsv")), &report.to_tsv())?;
        let mut json = report.to_json()?;
        json.push('\n');
        write_text(&out.join(format!("ranking_{metric}.json")), &json)?;
    }
    let ids: HashSet<String> = candidates.iter().map(|c| c.user_id.clone()).collect();
    write_json(&out.join("components.json"), &connected_components(&graph, &ids), FloatStyle::Exact)?;
    write_json(&out.join("candidates.json"), &score_candidates(&candidates, &ranks)?, FloatStyle::Exact)?;
    let histogram = relevant_histogram(stats.values());
    let summary = RankSummary {
        users: stats.len(),
        candidates: candidates.len(),
        excluded: stats
            .values()
            .filter(|s| s.relevant_count >= config.rank.min_relevant && excluded.contains(&s.user_id))
            .count(),
        iterations: ranks.iterations,
        final_residual: ranks.final_residual,
        converged: ranks.converged,
        histogram: TAIL_BUCKETS
            .iter()
            .zip(histogram)
            .map(|(&(_, _, bucket), users)| HistogramRow { bucket, users })
            .collect(),
    };
    write_json(&out.join("rank_summary.json"), &summary, FloatStyle::Exact)
}

/// Reads `candidates.json` from the output directory and renders the top-k
/// TSV table for the configured metric.
pub fn cmd_report(config: &PipelineConfig) -> Result<String> {
    let out = config.out.as_deref().ok_or_else(|| Error::InvalidArgument("--out is required".into()))?;
    let path = out.join("candidates.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut rows: Vec<ReportRow> = serde_json::from_str(&text)?;
    if config.rank.k < 1 {
        return Err(Error::InvalidArgument("report size k must be at least 1".into()));
    }
    rows.sort_by_key(|r| r.rank(config.metric));
    rows.truncate(config.rank.k);
    Ok(RankingReport {
        metric: config.metric,
        rows,
    }
    .to_tsv())
}
