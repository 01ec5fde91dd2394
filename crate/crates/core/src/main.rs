use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skiptag::features::{build_vocab, Pretrained};
use skiptag::numerics::Rng;
use skiptag::recurrent::SkipVariant;
use skiptag::tagger::TaggerConfig;
use skiptag::toolkit::{
    check_case, compare_variants, depth_sweep, load_checkpoint, load_config, load_embeddings,
    parse_corpus, save_checkpoint, write_rows, GradCheckCase, Splits, GRAD_CHECK_TOLERANCE,
};
use skiptag::training::{evaluate, init_model, train, TrainConfig};
use skiptag::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Sequence tagging with stacked bidirectional LSTMs and skip connections.
///
/// Log verbosity is read from SKIPTAG_LOG (e.g. `info`, `debug`).
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tagger and write the best-dev checkpoint and a CSV learning curve.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dev: PathBuf,
        /// key=value configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Pre-trained word vectors, `token v1 ... vD` per line.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// CSV report path [default: the checkpoint path with a .csv extension].
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the token accuracy of a checkpoint on a corpus.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Tag whitespace-tokenized sentences, one per line (`-` reads stdin).
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Finite-difference check of every gradient of a small random model.
    Gradcheck {
        #[arg(long, value_parser = parse_variant)]
        variant: SkipVariant,
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        hidden: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sentence length.
        #[arg(long, default_value_t = 5)]
        len: usize,
    },
    /// Train every skip variant with one shared configuration and seed.
    CompareVariants {
        #[command(flatten)]
        experiment: Experiment,
    },
    /// Train the configured variant at several depths.
    DepthSweep {
        /// Comma-separated layer counts.
        #[arg(long, value_delimiter = ',', required = true)]
        layers_list: Vec<usize>,
        #[command(flatten)]
        experiment: Experiment,
    },
}

#[derive(Args)]
struct Experiment {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// CSV output path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<SkipVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Error raised by the CLI itself on top of library errors.
enum Failure {
    Lib(Error),
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn configs(path: Option<&Path>) -> Result<(TaggerConfig, TrainConfig), Failure> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok((TaggerConfig::default(), TrainConfig::default())),
    }
}

fn embeddings(path: Option<&Path>, config: &TaggerConfig) -> Result<Option<Pretrained>, Failure> {
    Ok(path
        .map(|p| load_embeddings(p, config.word_dim))
        .transpose()?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Train {
            train: train_path,
            dev,
            config,
            embeddings: emb,
            out,
            report,
        } => {
            let (config, tcfg) = configs(config.as_deref())?;
            let train_corpus = parse_corpus(&train_path)?;
            let dev_corpus = parse_corpus(&dev)?;
            let pretrained = embeddings(emb.as_deref(), &config)?;
            let words = pretrained.as_ref().map(Pretrained::words);
            let vocab = build_vocab(&train_corpus, config.min_count, words)?;
            let seed = config.seed;
            let model = init_model(config, vocab, pretrained.as_ref(), &mut Rng::new(seed))?;
            let (best, summary) = train(model, &train_corpus, &dev_corpus, &tcfg)?;
            let mut stdout = io::stdout().lock();
            for r in &summary.epochs {
                let dev = r.dev_accuracy.map_or("-".to_string(), |a| a.to_string());
                let _ = writeln!(
                    stdout,
                    "epoch={} train_loss={} dev_acc={dev} seconds={:.3}",
                    r.epoch, r.train_loss, r.seconds
                );
            }
            let _ = writeln!(
                stdout,
                "best_epoch={} best_dev_acc={} updates={}",
                summary.best_epoch, summary.best_dev_accuracy, summary.updates
            );
            save_checkpoint(&best, &out)?;
            let report = report.unwrap_or_else(|| out.with_extension("csv"));
            summary.write_csv(output(Some(&report))?)?;
        }
        Command::Eval { model, corpus } => {
            let model = load_checkpoint(&model)?;
            let accuracy = evaluate(&model, &parse_corpus(&corpus)?)?;
            println!("{accuracy}");
        }
        Command::Tag { model, input } => {
            let model = load_checkpoint(&model)?;
            let reader: Box<dyn BufRead> = if input == Path::new("-") {
                Box::new(io::stdin().lock())
            } else {
                Box::new(BufReader::new(File::open(&input).map_err(|e| {
                    Error::Io {
                        path: input.clone(),
                        source: e,
                    }
                })?))
            };
            let mut out = BufWriter::new(io::stdout().lock());
            for line in reader.lines() {
                let line = line.map_err(|e| Error::Io {
                    path: input.clone(),
                    source: e,
                })?;
                let words: Vec<String> = line.split_whitespace().map(String::from).collect();
                if words.is_empty() {
                    continue;
                }
                for (w, t) in words.iter().zip(model.tag_words(&words)?) {
                    let _ = writeln!(out, "{w}\t{t}");
                }
                let _ = writeln!(out);
            }
        }
        Command::Gradcheck {
            variant,
            layers,
            hidden,
            seed,
            len,
        } => {
            if layers == 0 || hidden == 0 || len == 0 {
                return Err(Failure::Usage("layers, hidden and len must be >= 1".into()));
            }
            let report = check_case(&GradCheckCase::new(variant, layers, hidden, len, seed))?;
            println!(
                "variant={variant} layers={layers} hidden={hidden} seed={seed} entries={} max_rel_err={:e}",
                report.entries, report.max_rel_err
            );
            if report.max_rel_err.is_nan() || report.max_rel_err >= GRAD_CHECK_TOLERANCE {
                return Err(Failure::Numeric(format!(
                    "max relative error {:e} at {:?} (analytic {:e}, numeric {:e})",
                    report.max_rel_err, report.worst, report.worst_analytic, report.worst_numeric
                )));
            }
        }
        Command::CompareVariants { experiment: e } => {
            let (config, tcfg) = configs(e.config.as_deref())?;
            let (train, dev, test) = (
                parse_corpus(&e.train)?,
                parse_corpus(&e.dev)?,
                parse_corpus(&e.test)?,
            );
            let pretrained = embeddings(e.embeddings.as_deref(), &config)?;
            let data = Splits {
                train: &train,
                dev: &dev,
                test: &test,
            };
            let rows = compare_variants(&config, &tcfg, data, pretrained.as_ref())?;
            write_rows(output(e.out.as_deref())?, "variant", &rows)?;
        }
        Command::DepthSweep {
            layers_list,
            experiment: e,
        } => {
            if layers_list.contains(&0) {
                return Err(Failure::Usage("layer counts must be >= 1".into()));
            }
            let (config, tcfg) = configs(e.config.as_deref())?;
            let (train, dev, test) = (
                parse_corpus(&e.train)?,
                parse_corpus(&e.dev)?,
                parse_corpus(&e.test)?,
            );
            let pretrained = embeddings(e.embeddings.as_deref(), &config)?;
            let data = Splits {
                train: &train,
                dev: &dev,
                test: &test,
            };
            let rows = depth_sweep(&config, &layers_list, &tcfg, data, pretrained.as_ref())?;
            write_rows(output(e.out.as_deref())?, "layers", &rows)?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => EXIT_USAGE,
        Error::NonFinite(_) | Error::SvdNoConvergence(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SKIPTAG_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("gradient check failed: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
