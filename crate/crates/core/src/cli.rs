//! Command-line front end over the library.
//!
//! Exit codes: 0 success, 1 usage error, 2 input-format error, 3 numerical or
//! contract failure. Outputs are written to a temporary file next to the
//! destination and renamed into place only on success.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tempfile::NamedTempFile;

use crate::clustering::{AdaptivePolicy, KmeansConfig, MclConfig};
use crate::dictionary::{self, BuildConfig, BuildMode};
use crate::distill::{self, Activation, Optimizer, StudentArch, TrainConfig};
use crate::replacement::replace_stream;
use crate::store::{self, RecordCount, StreamHeader, StreamWriter};
use crate::wordsim::{self, WordPairBenchmark, WordVocabulary};
use crate::{Dtype, Error, ErrorClass, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    InputFormat = 2,
    Contract = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<ErrorClass> for ExitStatus {
    fn from(c: ErrorClass) -> Self {
        match c {
            ErrorClass::Usage => ExitStatus::Usage,
            ErrorClass::InputFormat => ExitStatus::InputFormat,
            ErrorClass::Contract => ExitStatus::Contract,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sensedict", version, about = "Multi-sense token dictionaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a token embedding stream into a sense dictionary.
    Build(BuildArgs),
    /// Replace every embedding with its nearest sense.
    Replace(ReplaceArgs),
    /// Train a student by sense classification.
    Distill(DistillArgs),
    /// Select senses with a trained student.
    Infer(InferArgs),
    /// Evaluate word senses on a word-pair similarity benchmark.
    Wordsim(WordsimArgs),
    /// Build word-level senses from a word-averaged stream.
    WordBuild(WordBuildArgs),
    /// Summarize a dictionary.
    Stats(StatsArgs),
    /// Check an embedding stream for structural errors.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Senses per token (fixed-k mode).
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u16).range(1..), conflicts_with = "adaptive")]
    k: u16,
    /// Size each token's senses from its MCL cluster count.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, default_value_t = 1.65)]
    inflation: f64,
    #[arg(long, default_value_t = 2)]
    expansion: u32,
    #[arg(long, default_value_t = 10)]
    knn: usize,
    #[arg(long, default_value_t = 900)]
    mcl_threshold: usize,
    #[arg(long, default_value_t = 0.1)]
    coef_low: f64,
    #[arg(long, default_value_t = 0.4)]
    coef_high: f64,
    #[arg(long, default_value_t = 8000)]
    max_per_token: usize,
    #[arg(long, default_value_t = Dtype::F32)]
    dtype: Dtype,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core. The output does not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct ReplaceArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// JSON fidelity report.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct DistillArgs {
    #[arg(long)]
    dict: PathBuf,
    /// Teacher embedding stream.
    #[arg(long)]
    teacher: PathBuf,
    /// Student feature stream, aligned with the teacher stream.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    batch: u32,
    /// Hidden width; 0 trains a purely linear alignment map.
    #[arg(long, default_value_t = 0)]
    hidden: usize,
    #[arg(long, default_value_t = Activation::Relu)]
    activation: Activation,
    #[arg(long, default_value = "adam")]
    optimizer: Optimizer,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Output stream of selected senses (student output for unknown tokens).
    #[arg(long)]
    out: PathBuf,
    /// Optional TSV of `record<TAB>token<TAB>sense` (`-` for unknown tokens).
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WordsimArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct WordBuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u16).range(1..))]
    k: u16,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    dict: PathBuf,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitStatus::Success,
                _ => ExitStatus::Usage,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            eprintln!("error: {e}");
            e.class().into()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Build(a) => build(a),
        Command::Replace(a) => replace(a),
        Command::Distill(a) => distill(a),
        Command::Infer(a) => infer(a),
        Command::Wordsim(a) => run_wordsim(a),
        Command::WordBuild(a) => word_build(a),
        Command::Stats(a) => run_stats(a),
        Command::Validate(a) => validate(a),
    }
}

/// Temp file in the destination's directory, renamed over it by `commit`.
struct PendingFile {
    tmp: NamedTempFile,
    dest: PathBuf,
}

impl PendingFile {
    fn new(dest: &Path) -> Result<Self> {
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        Ok(Self {
            tmp: NamedTempFile::new_in(dir)?,
            dest: dest.to_path_buf(),
        })
    }

    fn writer(&mut self) -> BufWriter<&mut File> {
        BufWriter::new(self.tmp.as_file_mut())
    }

    fn write_all(mut self, bytes: &[u8]) -> Result<Self> {
        self.tmp.as_file_mut().write_all(bytes)?;
        Ok(self)
    }

    fn commit(self) -> Result<()> {
        self.tmp.as_file().sync_all()?;
        self.tmp
            .persist(&self.dest)
            .map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}

fn build(a: BuildArgs) -> Result<()> {
    let kmeans = KmeansConfig::with_k(a.k as usize);
    let mode = if a.adaptive {
        BuildMode::Adaptive {
            policy: AdaptivePolicy {
                mcl: MclConfig {
                    inflation: a.inflation,
                    expansion: a.expansion,
                    knn: a.knn,
                    ..MclConfig::default()
                },
                threshold: a.mcl_threshold,
                coef_low: a.coef_low,
                coef_high: a.coef_high,
            },
            kmeans,
        }
    } else {
        BuildMode::FixedK(kmeans)
    };
    let config = BuildConfig {
        mode,
        max_per_token: a.max_per_token,
        seed: a.seed,
        dtype: a.dtype,
    };
    config.validate()?;

    let (header, records) = store::read_file(&a.input)?;
    eprintln!("read {} records (dim {})", records.len(), header.dim());
    let threads = if a.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        a.threads
    };
    let dict = dictionary::build_dictionary_with_threads(header.dim(), &records, &config, threads)?;
    let bytes = dictionary::to_bytes(&dict)?;
    PendingFile::new(&a.out)?.write_all(&bytes)?.commit()?;
    eprintln!("wrote {} tokens to {}", dict.len(), a.out.display());
    Ok(())
}

fn replace(a: ReplaceArgs) -> Result<()> {
    let dict = dictionary::read_file(&a.dict)?;
    let input = BufReader::new(File::open(&a.input)?);
    let mut out = PendingFile::new(&a.out)?;
    let report = {
        let mut w = out.writer();
        let r = replace_stream(&dict, input, &mut w)?;
        w.flush()?;
        r
    };
    let json = serde_json::to_vec_pretty(&report).map_err(|e| Error::Io(e.into()))?;
    let report_file = PendingFile::new(&a.report)?.write_all(&json)?;
    out.commit()?;
    report_file.commit()?;
    eprintln!(
        "replaced {} of {} records ({} fallbacks), mean squared error {:.6e}",
        report.replaced, report.records, report.fallbacks, report.mean_sq_error
    );
    Ok(())
}

fn distill(a: DistillArgs) -> Result<()> {
    let config = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch as usize,
        learning_rate: a.lr,
        seed: a.seed,
        optimizer: a.optimizer,
    };
    config.validate()?;
    let dict = dictionary::read_file(&a.dict)?;
    let (_, teacher) = store::read_file(&a.teacher)?;
    let (_, features) = store::read_file(&a.features)?;
    let arch = StudentArch {
        hidden_dim: a.hidden,
        activation: a.activation,
    };
    let outcome = distill::train(&teacher, &features, &dict, arch, &config)?;
    for s in &outcome.trace {
        eprintln!(
            "epoch {:>4}  loss {:.6}  agreement {:.4}",
            s.epoch, s.mean_loss, s.agreement
        );
    }
    if outcome.skipped > 0 {
        eprintln!(
            "skipped {} records with tokens absent from the dictionary",
            outcome.skipped
        );
    }
    let bytes = distill::to_bytes(&outcome.model)?;
    PendingFile::new(&a.out)?.write_all(&bytes)?.commit()
}

fn infer(a: InferArgs) -> Result<()> {
    let dict = dictionary::read_file(&a.dict)?;
    let model = distill::read_file(&a.model)?;
    let (header, features) = store::read_file(&a.features)?;
    let selected = distill::infer_embeddings(&model, &dict, &features)?;

    let mut out = PendingFile::new(&a.out)?;
    {
        let out_header = StreamHeader::new(
            header.dtype,
            dict.dim,
            RecordCount::Known(selected.len() as u64),
        );
        let mut w = StreamWriter::new(out.writer(), out_header)?;
        for (token, _, emb) in &selected {
            w.write(*token, emb)?;
        }
        w.finish()?;
    }
    let labels = match &a.labels {
        Some(path) => {
            let mut tsv = String::new();
            for (i, (token, label, _)) in selected.iter().enumerate() {
                let label = label.map_or_else(|| "-".to_string(), |l| l.to_string());
                tsv.push_str(&format!("{i}\t{token}\t{label}\n"));
            }
            Some(PendingFile::new(path)?.write_all(tsv.as_bytes())?)
        }
        None => None,
    };
    out.commit()?;
    if let Some(l) = labels {
        l.commit()?;
    }
    let fallbacks = selected.iter().filter(|s| s.1.is_none()).count();
    eprintln!(
        "inferred {} records ({fallbacks} fallbacks)",
        selected.len()
    );
    Ok(())
}

fn run_wordsim(a: WordsimArgs) -> Result<()> {
    let dict = dictionary::read_file(&a.dict)?;
    let vocab = WordVocabulary::read_file(&a.vocab)?;
    let bench = WordPairBenchmark::read_file(&a.pairs)?;
    let report = wordsim::evaluate(&dict, &vocab, &bench);
    let json = serde_json::to_vec_pretty(&report).map_err(|e| Error::Io(e.into()))?;
    PendingFile::new(&a.report)?.write_all(&json)?.commit()?;
    match report.spearman {
        Some(rho) => eprintln!(
            "{} pairs scored, {} missing, spearman {rho:.4}",
            report.pairs_scored, report.pairs_missing
        ),
        None => eprintln!(
            "{} pairs scored, {} missing, spearman undefined",
            report.pairs_scored, report.pairs_missing
        ),
    }
    Ok(())
}

fn word_build(a: WordBuildArgs) -> Result<()> {
    let (header, records) = store::read_file(&a.input)?;
    let dict = wordsim::build_word_senses(header.dim(), &records, a.k as usize, a.seed)?;
    let bytes = dictionary::to_bytes(&dict)?;
    PendingFile::new(&a.out)?.write_all(&bytes)?.commit()
}

fn run_stats(a: StatsArgs) -> Result<()> {
    let dict = dictionary::read_file(&a.dict)?;
    let s = dictionary::stats(&dict);
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&s).map_err(|e| Error::Io(e.into()))?
        );
    } else {
        println!("tokens            {}", s.token_count);
        println!("senses            {}", s.total_senses);
        println!(
            "max senses        {} ({} tokens)",
            s.max_senses, s.tokens_at_max
        );
        println!("storage bytes     {}", s.storage_bytes);
        println!("non-self-dominant {}", s.non_self_dominant);
        println!("histogram (senses: tokens)");
        for (senses, tokens) in &s.sense_histogram {
            println!("  {senses:>5}: {tokens}");
        }
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<()> {
    let s = store::validate_stream(BufReader::new(File::open(&a.input)?))?;
    println!(
        "records {}  distinct tokens {}  dim {}",
        s.records, s.distinct_tokens, s.dim
    );
    Ok(())
}
