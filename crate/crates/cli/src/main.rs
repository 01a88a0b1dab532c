use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use htmad_core::bench::{
    format_table, load_corpus_dir, run_corpus, write_csv, ApplicationProfile, BenchOptions,
    DetectorSpec, Labels,
};
use htmad_core::ingest::{
    read_records, run_multi, run_stream, CombinedRow, PipelineConfig, RecordReader,
    OUTPUT_HEADER,
};
use htmad_core::multi::MultiConfig;
use htmad_core::synth::{generate, Generator};
use htmad_core::Error;

/// Streaming anomaly detection for scalar time series.
#[derive(Parser)]
#[command(name = "htmad", version)]
struct Cli {
    /// More log output (repeatable). `HTMAD_LOG` overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one `timestamp,value` stream.
    Detect {
        /// Input CSV; stdin when omitted.
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Output CSV; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// JSON pipeline configuration.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Master seed (default 42).
        #[arg(long)]
        seed: Option<u64>,
        /// Detection threshold: flag when likelihood >= 1 - epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Fixed probation length in records. By default it is sized from
        /// the input length (capped), or the cap when reading stdin.
        #[arg(long)]
        probation: Option<usize>,
    },
    /// Score several streams and combine them into one likelihood.
    Multi {
        /// Input CSVs, one per model.
        #[arg(short, long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Threshold for the combined flag.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Smoothing kernel width in records.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Score detectors on a labeled corpus.
    Bench {
        /// Directory searched recursively for `*.csv` streams.
        #[arg(long)]
        corpus: PathBuf,
        /// Labels JSON keyed by path relative to the corpus directory.
        #[arg(long)]
        labels: PathBuf,
        /// `standard`, `reward_low_fp`, `reward_low_fn` or `all`.
        #[arg(short, long, default_value = "all")]
        profile: String,
        /// Comma-separated: htm, threshold, random, perfect, null.
        #[arg(short, long, value_delimiter = ',', default_value = "htm,threshold,random")]
        detectors: Vec<String>,
        /// Pipeline configuration for the htm detector.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the table as CSV.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads (default: available cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a synthetic stream and its labels.
    Synth {
        /// temperature, level_shift, noisy_spikes, double_spike, cyclic or noise.
        #[arg(short, long)]
        generator: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Labels JSON, keyed by the output file name.
        #[arg(short, long)]
        labels: Option<PathBuf>,
        /// Record count (generator default when omitted).
        #[arg(long)]
        len: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HTMAD_LOG", level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Detect {
            input,
            output,
            config,
            seed,
            epsilon,
            probation,
        } => detect(input, output, config, seed, epsilon, probation),
        Command::Multi {
            input,
            output,
            config,
            seed,
            epsilon,
            sigma,
        } => multi(&input, output, config, seed, epsilon, sigma),
        Command::Bench {
            corpus,
            labels,
            profile,
            detectors,
            config,
            seed,
            output,
            threads,
        } => bench(&corpus, &labels, &profile, &detectors, config, seed, output, threads),
        Command::Synth {
            generator,
            seed,
            output,
            labels,
            len,
        } => synth(&generator, seed, output, labels, len),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("htmad: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for I/O failures, 2 for bad configuration or input.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => 1,
        _ => 2,
    }
}

fn load_config(path: Option<PathBuf>, seed: Option<u64>) -> Result<PipelineConfig, Error> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::from_json(&fs::read_to_string(p)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn open_output(path: Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Data rows in a CSV file with a header, counted without parsing.
fn count_rows(path: &Path) -> io::Result<usize> {
    let mut n = 0usize;
    for line in BufReader::new(File::open(path)?).lines() {
        if !line?.trim().is_empty() {
            n += 1;
        }
    }
    Ok(n.saturating_sub(1))
}

fn detect(
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    epsilon: Option<f64>,
    probation: Option<usize>,
) -> Result<(), Error> {
    let mut cfg = load_config(config, seed)?;
    if let Some(e) = epsilon {
        cfg.likelihood.epsilon = e;
    }
    if probation.is_some() {
        cfg.probation_records = probation;
    }
    cfg.validate()?;

    let (source, known_len): (Box<dyn Read>, Option<usize>) = match &input {
        Some(p) => (Box::new(File::open(p)?), Some(count_rows(p)?)),
        None => (Box::new(io::stdin().lock()), None),
    };
    let mut reader = RecordReader::new(BufReader::new(source), cfg.row_policy);
    let mut out = csv::Writer::from_writer(open_output(output)?);
    out.write_record(OUTPUT_HEADER)?;

    let start = Instant::now();
    let summary = run_stream(&mut reader, &cfg, known_len, |o| {
        out.write_record(o.csv_fields())?;
        Ok(())
    })?;
    out.flush()?;
    let elapsed = start.elapsed().as_secs_f64();

    let ms = if summary.records > 0 {
        elapsed * 1000.0 / summary.records as f64
    } else {
        0.0
    };
    eprintln!(
        "records={} flags={} skipped={} ms_per_record={ms:.3} epsilon={:e}",
        summary.records,
        summary.flags,
        reader.skipped() + summary.rejected,
        cfg.likelihood.epsilon
    );
    Ok(())
}

fn multi(
    inputs: &[PathBuf],
    output: Option<PathBuf>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    epsilon: Option<f64>,
    sigma: Option<f64>,
) -> Result<(), Error> {
    let cfg = load_config(config, seed)?;
    let mut mcfg = match sigma {
        Some(s) => MultiConfig::with_sigma(s),
        None => cfg.multi,
    };
    if let Some(e) = epsilon {
        mcfg.epsilon = e;
    }
    let sources = inputs
        .iter()
        .map(|p| read_records(File::open(p)?, cfg.row_policy))
        .collect::<Result<Vec<_>, _>>()?;
    let cfgs = vec![cfg; sources.len()];

    let start = Instant::now();
    let rows = run_multi(&sources, &cfgs, &mcfg)?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut out = csv::Writer::from_writer(open_output(output)?);
    out.write_record(CombinedRow::header(sources.len()))?;
    for r in &rows {
        out.write_record(r.csv_fields())?;
    }
    out.flush()?;
    eprintln!(
        "models={} steps={} flags={} seconds={elapsed:.2} epsilon={:e}",
        sources.len(),
        rows.len(),
        rows.iter().filter(|r| r.flag).count(),
        mcfg.epsilon
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    corpus: &Path,
    labels: &Path,
    profile: &str,
    detectors: &[String],
    config: Option<PathBuf>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), Error> {
    let profiles = if profile == "all" {
        ApplicationProfile::all()
    } else {
        vec![ApplicationProfile::by_name(profile).ok_or_else(|| {
            Error::Parse(format!("unknown profile `{profile}`"))
        })?]
    };
    let cfg = load_config(config, seed)?;
    let detectors = detectors
        .iter()
        .map(|d| {
            DetectorSpec::by_name(d.trim()).map(|spec| match spec {
                DetectorSpec::Htm(_) => DetectorSpec::Htm(cfg.clone()),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels = Labels::from_json(&fs::read_to_string(labels)?)?;
    let streams = load_corpus_dir(corpus)?;
    log::info!("{} streams", streams.len());

    let opts = BenchOptions {
        threads,
        ..BenchOptions::default()
    };
    let reports = run_corpus(&streams, &labels, &detectors, &profiles, &opts)?;
    print!("{}", format_table(&reports));
    if let Some(p) = output {
        write_csv(&reports, File::create(p)?)?;
    }
    Ok(())
}

fn synth(
    generator: &str,
    seed: u64,
    output: Option<PathBuf>,
    labels: Option<PathBuf>,
    len: Option<usize>,
) -> Result<(), Error> {
    let gen: Generator = generator.parse()?;
    let stream = generate(gen, seed, len)?;
    if let Some(path) = labels {
        let key = output
            .as_ref()
            .and_then(|p| p.file_name())
            .map_or_else(|| format!("{gen}.csv"), |n| n.to_string_lossy().into_owned());
        let mut l = Labels::default();
        l.insert(&key, stream.windows.clone())?;
        fs::write(path, l.to_json()? + "\n")?;
    }
    htmad_core::ingest::write_records(open_output(output)?, &stream.records)
}
