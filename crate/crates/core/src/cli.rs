//! The `storyloop` command.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (bad input files or
//! arguments that parse but do not validate), 3 internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dataset::{compute_stats, load_corpus, split_corpus, CardKind, DatasetError};
use crate::metrics::{score_pair, MatchSpan, MetricConfig, PairScores, ScoreSummary, DEFAULT_ROUGE_W_ALPHA};
use crate::packing::{solve, Policy, SegmentVocabulary};
use crate::service::{serve, serve_mock, AppState, ServiceConfig, ServiceError};
use crate::text::{tokenize, Preprocessing, StopwordList, TokenSequence, TokenizerMode};
use crate::topics::{
    nearest_words, train, transition_matrix, DictionaryMatrix, EmbeddingLexicon, TopicError, TopicModelConfig,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "storyloop", version, about = "Story generation evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    /// One JSON object per line.
    Records,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score generated text against its published edit (USER, ROUGE-L, ROUGE-W).
    Metric(MetricArgs),
    /// Solve a packing policy for given segment lengths.
    Pack(PackArgs),
    /// Corpus statistics.
    Stats(StatsArgs),
    /// Token-balanced train/valid/test split.
    Split(SplitArgs),
    /// Topic model training and inspection.
    #[command(subcommand)]
    Topics(TopicsCommand),
    /// Run the HTTP frontend.
    Serve(ServeArgs),
    /// Run the deterministic mock model backend.
    MockBackend(MockArgs),
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Generated text file.
    #[arg(long, requires = "published", conflicts_with = "pairs")]
    generated: Option<PathBuf>,
    /// Published (edited) text file.
    #[arg(long, requires = "generated")]
    published: Option<PathBuf>,
    /// JSON-lines file of `{"generated": ..., "published": ...}` pairs.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Stopword list file (first line `# version: ...`).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// ROUGE-W weighting exponent.
    #[arg(long, default_value_t = DEFAULT_ROUGE_W_ALPHA)]
    alpha: f64,
    /// Apply Porter-style stemming before matching.
    #[arg(long)]
    stem: bool,
    /// Remove stopwords before ROUGE-L and ROUGE-W.
    #[arg(long)]
    rouge_remove_stopwords: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct PackArgs {
    /// Policy file; defaults to the bundled generation policy.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Available tokens per segment, e.g. `a=8,b=8`.
    #[arg(long)]
    lengths: String,
    /// Overrides the policy's budget minus reserve.
    #[arg(long)]
    budget: Option<u32>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Corpus root containing `stories/*.story`.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Train:valid:test ratios.
    #[arg(long, default_value = "8:1:1")]
    ratios: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Assignment output file (JSON); printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum TopicsCommand {
    /// Train a dictionary on entry and challenge text.
    Train(TopicsTrainArgs),
    /// Topic transition probabilities between consecutive entries of a character.
    Transitions(TopicsTransitionsArgs),
    /// Nearest lexicon words for each topic.
    Neighbors(TopicsNeighborsArgs),
}

#[derive(Debug, Args)]
struct TopicsTrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Word vectors, one `word v1 ... vd` per line.
    #[arg(long)]
    lexicon: PathBuf,
    /// Model output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = TopicModelConfig::default().topics)]
    topics: usize,
    #[arg(long, default_value_t = TopicModelConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = TopicModelConfig::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = TopicModelConfig::default().margin)]
    margin: f64,
    #[arg(long, default_value_t = TopicModelConfig::default().negatives)]
    negatives: usize,
    #[arg(long, default_value_t = TopicModelConfig::default().ortho_weight)]
    ortho_weight: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TopicsTransitionsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct TopicsNeighborsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Only this topic row.
    #[arg(long)]
    row: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Listen address; defaults to STORYLOOP_BIND or 127.0.0.1:8080.
    #[arg(long)]
    bind: Option<String>,
    /// Data directory; defaults to STORYLOOP_DATA_DIR or ./storyloop-data.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Packing policy; defaults to the bundled generation policy.
    #[arg(long)]
    policy: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MockArgs {
    #[arg(long, default_value = "127.0.0.1:8090")]
    bind: String,
}

enum Failure {
    Data(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Service(ServiceError::Storage(m)) => Failure::Internal(m),
            other => Failure::Data(other.to_string()),
        }
    }
}

macro_rules! data_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::from(Error::from(e))
            }
        }
    )*};
}
data_error_from!(DatasetError, TopicError, ServiceError, crate::packing::PackError, crate::metrics::MetricError);

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn data(msg: impl Into<String>) -> Failure {
    Failure::Data(msg.into())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(value).expect("record serializes"))
}

/// Runs the CLI on `args` (including the program name), writing to the
/// process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Metric(a) => metric(a, out),
        Command::Pack(a) => pack_cmd(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Split(a) => split(a, out),
        Command::Topics(TopicsCommand::Train(a)) => topics_train(a, out),
        Command::Topics(TopicsCommand::Transitions(a)) => topics_transitions(a, out),
        Command::Topics(TopicsCommand::Neighbors(a)) => topics_neighbors(a, out),
        Command::Serve(a) => serve_cmd(a, out),
        Command::MockBackend(a) => mock_cmd(a, out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Data(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_DATA
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "internal error: {m}");
            EXIT_INTERNAL
        }
    }
}

#[derive(Serialize)]
struct ScoreRecord {
    user: ScoreSummary,
    rouge_l: ScoreSummary,
    rouge_w: ScoreSummary,
}

#[derive(Serialize)]
struct PairRecord<'a> {
    id: &'a str,
    generated: &'a str,
    published: &'a str,
    scores: ScoreRecord,
    spans: &'a [MatchSpan],
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PairInput {
    #[serde(default)]
    id: Option<String>,
    generated: String,
    published: String,
}

fn print_scores(
    out: &mut dyn Write,
    id: &str,
    generated: &str,
    published: &str,
    scores: &PairScores,
    format: Format,
) -> std::io::Result<()> {
    match format {
        Format::Text => {
            let rows = [("user", scores.user), ("rouge_l", scores.rouge_l), ("rouge_w", scores.rouge_w)];
            for (metric, s) in rows {
                let prefix = if id.is_empty() { String::new() } else { format!("{id}\t") };
                writeln!(
                    out,
                    "{prefix}{metric:<8} precision {:.6} recall {:.6} f1 {:.6}",
                    s.precision, s.recall, s.f1
                )?;
            }
            Ok(())
        }
        Format::Records => json_line(
            out,
            &PairRecord {
                id,
                generated,
                published,
                scores: ScoreRecord {
                    user: scores.user,
                    rouge_l: scores.rouge_l,
                    rouge_w: scores.rouge_w,
                },
                spans: &scores.spans,
            },
        ),
    }
}

fn metric(a: MetricArgs, out: &mut dyn Write) -> CmdResult {
    let stopwords = match &a.stopwords {
        Some(p) => StopwordList::load(p)?,
        None => StopwordList::english(),
    };
    let config = MetricConfig {
        preprocessing: Preprocessing { stem: a.stem },
        alpha: a.alpha,
        rouge_remove_stopwords: a.rouge_remove_stopwords,
        user_remove_stopwords: false,
    };
    match (&a.generated, &a.published, &a.pairs) {
        (Some(g), Some(p), None) => {
            let (generated, published) = (read_text(g)?, read_text(p)?);
            let scores = score_pair(&generated, &published, &config, &stopwords)?;
            print_scores(out, "", &generated, &published, &scores, a.format)?;
        }
        (None, None, Some(pairs)) => {
            for (i, line) in read_text(pairs)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let at = |e: &dyn std::fmt::Display| data(format!("{} line {}: {e}", pairs.display(), i + 1));
                let pair: PairInput = serde_json::from_str(line).map_err(|e| at(&e))?;
                let id = pair.id.clone().unwrap_or_else(|| (i + 1).to_string());
                let scores = score_pair(&pair.generated, &pair.published, &config, &stopwords).map_err(|e| at(&e))?;
                print_scores(out, &id, &pair.generated, &pair.published, &scores, a.format)?;
            }
        }
        _ => return Err(data("pass --generated and --published, or --pairs")),
    }
    Ok(())
}

fn parse_lengths(s: &str) -> Result<Vec<(String, u32)>, Failure> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (name, len) = p
                .split_once('=')
                .ok_or_else(|| data(format!("expected name=length, got `{p}`")))?;
            let len: u32 = len
                .trim()
                .parse()
                .map_err(|e| data(format!("length for `{name}`: {e}")))?;
            Ok((name.trim().to_string(), len))
        })
        .collect()
}

fn pack_cmd(a: PackArgs, out: &mut dyn Write) -> CmdResult {
    let policy = match &a.policy {
        Some(p) => Policy::load(p)?,
        None => Policy::default_generation(),
    };
    let lengths = parse_lengths(&a.lengths)?;
    let mut vocab = SegmentVocabulary::default();
    let specs = policy.specs_for_lengths(&lengths, &mut vocab)?;
    let constraints = policy.constraints_for(&specs)?;
    let budget = a.budget.unwrap_or_else(|| policy.context_budget());
    let allocation = solve(&specs, &constraints, budget)?;
    match a.format {
        Format::Text => writeln!(out, "{allocation}")?,
        Format::Records => {
            for (segment, length) in &allocation.lengths {
                json_line(out, &serde_json::json!({ "segment": segment, "length": length }))?;
            }
        }
    }
    Ok(())
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load_corpus(&a.corpus)?;
    let stats = compute_stats(&corpus)?;
    match a.format {
        Format::Text => {
            writeln!(out, "stories {}", stats.stories)?;
            writeln!(out, "unique_tokens {}", stats.unique_tokens)?;
            writeln!(out, "{:<36} {:>8} {:>10} {:>12} {:>12}", "feature", "count", "total", "mean", "std_dev")?;
            for f in &stats.features {
                writeln!(
                    out,
                    "{:<36} {:>8} {:>10} {:>12.6} {:>12.6}",
                    f.feature, f.count, f.total, f.mean, f.std_dev
                )?;
            }
        }
        Format::Records => {
            for f in &stats.features {
                json_line(out, f)?;
            }
            json_line(out, &serde_json::json!({ "feature": "unique_tokens", "total": stats.unique_tokens }))?;
            for h in &stats.histograms {
                json_line(out, h)?;
            }
        }
    }
    Ok(())
}

fn parse_ratios(s: &str) -> Result<[u32; 3], Failure> {
    let parts: Vec<u32> = s
        .split(':')
        .map(|p| p.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|e| data(format!("ratios `{s}`: {e}")))?;
    <[u32; 3]>::try_from(parts).map_err(|_| data(format!("ratios `{s}`: expected three values like 8:1:1")))
}

fn split(a: SplitArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load_corpus(&a.corpus)?;
    let assignment = split_corpus(&corpus, parse_ratios(&a.ratios)?, a.seed)?;
    let json = serde_json::to_string_pretty(&assignment).expect("assignment serializes");
    match &a.out {
        Some(path) => {
            std::fs::write(path, format!("{json}\n")).map_err(|e| data(format!("{}: {e}", path.display())))?;
            let [tr, va, te] = assignment.story_counts;
            let [ttr, tva, tte] = assignment.token_ratios;
            writeln!(out, "stories train={tr} valid={va} test={te}")?;
            writeln!(out, "tokens train={ttr:.6} valid={tva:.6} test={tte:.6}")?;
        }
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}

/// Entry and challenge texts of a corpus, tokenized for the topic model.
fn topic_documents(stories: &[crate::dataset::Story]) -> Vec<TokenSequence> {
    let mut docs = Vec::new();
    for story in stories {
        for (_, entry) in story.entries() {
            docs.push(tokenize(&entry.text, TokenizerMode::Metric));
        }
        for card in story.cards.iter().filter(|c| c.kind == CardKind::Challenge) {
            docs.push(tokenize(&card.text(), TokenizerMode::Metric));
        }
    }
    docs
}

fn topics_train(a: TopicsTrainArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load_corpus(&a.corpus)?;
    let lexicon = EmbeddingLexicon::load(&a.lexicon)?;
    let config = TopicModelConfig {
        topics: a.topics,
        margin: a.margin,
        negatives: a.negatives,
        ortho_weight: a.ortho_weight,
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        seed: a.seed,
    };
    let outcome = train(&topic_documents(&corpus), &lexicon, &config)?;
    for (epoch, loss) in outcome.epoch_losses.iter().enumerate() {
        writeln!(out, "epoch {} loss {loss:.6}", epoch + 1)?;
    }
    if !outcome.skipped.is_empty() {
        writeln!(out, "skipped {} documents without known words", outcome.skipped.len())?;
    }
    std::fs::write(&a.out, outcome.model.to_text()).map_err(|e| data(format!("{}: {e}", a.out.display())))?;
    Ok(())
}

fn topics_transitions(a: TopicsTransitionsArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load_corpus(&a.corpus)?;
    let model = DictionaryMatrix::load(&a.model)?;
    let lexicon = EmbeddingLexicon::load(&a.lexicon)?;
    let t = transition_matrix(&corpus, model.matrix(), &lexicon)?;
    for rec in t.records() {
        match a.format {
            Format::Text => writeln!(out, "{} -> {} {:.6}", rec.from, rec.to, rec.probability)?,
            Format::Records => json_line(out, &rec)?,
        }
    }
    Ok(())
}

fn topics_neighbors(a: TopicsNeighborsArgs, out: &mut dyn Write) -> CmdResult {
    if a.k == 0 {
        return Err(data("--k must be at least 1"));
    }
    let model = DictionaryMatrix::load(&a.model)?;
    let lexicon = EmbeddingLexicon::load(&a.lexicon)?;
    let rows: Vec<usize> = match a.row {
        Some(r) => vec![r],
        None => (0..model.topics()).collect(),
    };
    for row in rows {
        let words = nearest_words(model.matrix(), row, &lexicon, a.k)?;
        match a.format {
            Format::Text => {
                let list: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
                writeln!(out, "{row}\t{}", list.join(" "))?;
            }
            Format::Records => {
                for (rank, (word, similarity)) in words.iter().enumerate() {
                    json_line(
                        out,
                        &serde_json::json!({ "topic": row, "rank": rank, "word": word, "similarity": similarity }),
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn init_tracing() {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .try_init();
}

fn serve_cmd(a: ServeArgs, out: &mut dyn Write) -> CmdResult {
    init_tracing();
    let mut config = ServiceConfig::from_env()?;
    if let Some(b) = &a.bind {
        config.bind = b.parse().map_err(|e| data(format!("--bind {b}: {e}")))?;
    }
    if let Some(d) = a.data_dir {
        config.data_dir = d;
    }
    if let Some(p) = &a.policy {
        config.policy = Policy::load(p)?;
    }
    let bind = config.bind;
    let (state, report) = AppState::open(config)?;
    tracing::info!(
        suggestions = report.suggestions,
        published = report.published,
        truncated_bytes = report.truncated_bytes,
        "replayed record log"
    );
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| data(format!("bind {bind}: {e}")))?;
        writeln!(out, "listening on {}", listener.local_addr()?)?;
        out.flush()?;
        serve(listener, state).await?;
        Ok(())
    })
}

fn mock_cmd(a: MockArgs, out: &mut dyn Write) -> CmdResult {
    init_tracing();
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&a.bind)
            .await
            .map_err(|e| data(format!("bind {}: {e}", a.bind)))?;
        writeln!(out, "listening on {}", listener.local_addr()?)?;
        out.flush()?;
        serve_mock(listener).await?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("storyloop").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["metric", "--generated", "x"]).0, EXIT_USAGE);
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("metric"));
    }

    #[test]
    fn missing_file_is_data_error() {
        let (code, _, err) = run_capture(&["metric", "--generated", "/nonexistent/g", "--published", "/nonexistent/p"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("/nonexistent/g"));
    }

    #[test]
    fn metric_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let g = dir.path().join("g.txt");
        std::fs::write(&g, "The storm broke over the harbor.").unwrap();
        let (code, out, _) = run_capture(&["metric", "--generated", g.to_str().unwrap(), "--published", g.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("user     precision 1.000000 recall 1.000000 f1 1.000000"), "{out}");
        let (_, rec, _) = run_capture(&[
            "metric",
            "--generated",
            g.to_str().unwrap(),
            "--published",
            g.to_str().unwrap(),
            "--format",
            "records",
        ]);
        let first: serde_json::Value = serde_json::from_str(rec.lines().next().unwrap()).unwrap();
        assert_eq!(first["scores"]["user"]["f1"], 1.0);
        assert_eq!(first["spans"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn pack_example_policy() {
        let policy = concat!(env!("CARGO_MANIFEST_DIR"), "/policies/example.pol");
        let (code, out, err) = run_capture(&["pack", "--policy", policy, "--lengths", "a=8,b=8", "--budget", "10"]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert_eq!(out.trim(), "a=6 b=4");
        let (code, _, _) = run_capture(&["pack", "--policy", policy, "--lengths", "a=x"]);
        assert_eq!(code, EXIT_DATA);
    }

    #[test]
    fn lengths_and_ratios_parse() {
        assert_eq!(parse_lengths("a=1, b=2").ok().unwrap(), vec![("a".into(), 1), ("b".into(), 2)]);
        assert!(parse_lengths("a").is_err());
        assert_eq!(parse_ratios("8:1:1").ok().unwrap(), [8, 1, 1]);
        assert!(parse_ratios("8:1").is_err());
    }
}
