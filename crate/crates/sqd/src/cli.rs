//! Command-line front end.

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use sqd_core::diagnosis::{leading_diagnoses, DiagnosisError, SearchOrder};
use sqd_core::dpi::{Dpi, DpiError};
use sqd_core::logic::Reasoner;
use sqd_core::measures::MeasureError;
use sqd_core::random::RandomDpiConfig;
use sqd_core::session::{compute_query, Oracle, Session, SessionError};
use thiserror::Error;

use crate::bench::{measure, random_corpus, summarize, write_csv, BenchError, Measurement};
use crate::format::{load_dpi, FormatError};
use crate::options::QueryOptions;
use crate::view;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Dpi(#[from] DpiError),
    #[error(transparent)]
    Diagnosis(#[from] DiagnosisError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "sqd", version, about = "Sequential model-based diagnosis with optimized queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List diagnoses of a DPI, most probable first.
    Diagnose {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        max: usize,
        /// Minimum cardinality first instead of most probable first.
        #[arg(long)]
        breadth_first: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute one optimized query for the leading diagnoses.
    Query {
        file: PathBuf,
        #[command(flatten)]
        options: QueryOptions,
        /// Print the query as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a diagnosis session. Answers come from a simulated oracle when
    /// `--actual` is given, from standard input otherwise.
    Session {
        file: PathBuf,
        /// Faulty components of the simulated system, comma separated.
        #[arg(long, value_delimiter = ',')]
        actual: Option<Vec<String>>,
        #[command(flatten)]
        options: QueryOptions,
    },
    /// Measure the three query phases and write one CSV row per run.
    Bench {
        /// DPI files to measure.
        #[arg(long)]
        dpi: Vec<PathBuf>,
        /// Number of random DPIs to generate in addition.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 30)]
        components: usize,
        #[arg(long)]
        atoms: Option<usize>,
        #[arg(long, default_value_t = 2)]
        negatives: usize,
        /// Skip random DPIs with fewer leading diagnoses.
        #[arg(long, default_value_t = 2)]
        min_diagnoses: usize,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        options: QueryOptions,
    },
    /// Serve the HTTP session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

fn set_text(dpi: &Dpi, set: &sqd_core::bits::ComponentSet) -> String {
    format!("{{{}}}", dpi.component_names(set).join(", "))
}

fn ids(v: &sqd_core::bits::IndexSet) -> String {
    let v: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn print_proposal(out: &mut dyn Write, dpi: &Dpi, options: &QueryOptions, p: &sqd_core::session::Proposal) -> std::io::Result<()> {
    let qcm = options.qcm_spec();
    writeln!(out, "partition: D+ = {}  D- = {}  D0 = {}", ids(&p.partition.dplus), ids(&p.partition.dminus), ids(&p.partition.dzero))?;
    writeln!(out, "query:")?;
    for f in &p.query.sentences {
        writeln!(out, "  {f}  (cost {})", qcm.sentence_cost(f))?;
    }
    if let Some(c) = &p.query.components {
        writeln!(out, "components: {}", set_text(dpi, c))?;
    }
    writeln!(out, "m = {:.4}  c = {}  p(t) = {:.4}", p.scores.m, p.scores.c, p.scores.p_true)?;
    writeln!(
        out,
        "reasoner calls: p1+p2 = {}, p3 = {}",
        p.stats.reasoner_calls_p1p2, p.stats.reasoner_calls_p3
    )
}

fn print_diagnoses(out: &mut dyn Write, dpi: &Dpi, d: &sqd_core::diagnosis::DiagnosisSet) -> std::io::Result<()> {
    for (i, (delta, p)) in d.diagnoses().iter().zip(d.probabilities()).enumerate() {
        writeln!(out, "D{} = {}  p = {:.4}", i + 1, set_text(dpi, delta), p)?;
    }
    Ok(())
}

fn read_answer(input: &mut dyn BufRead, out: &mut dyn Write) -> Result<bool, CliError> {
    loop {
        write!(out, "answer [t/f]: ")?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(CliError::Usage("input ended before the session converged".into()));
        }
        match line.trim() {
            "t" | "true" | "y" | "yes" => return Ok(true),
            "f" | "false" | "n" | "no" => return Ok(false),
            _ => writeln!(out, "please answer t or f")?,
        }
    }
}

fn session(
    file: &Path,
    actual: Option<&[String]>,
    options: &QueryOptions,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let dpi = load_dpi(file)?;
    let oracle = match actual {
        Some(names) => Oracle::Simulated(dpi.component_set(names.iter().map(String::as_str))?),
        None => Oracle::Interactive,
    };
    let mut s = Session::new(dpi, options.session_config()?)?;
    if let Oracle::Simulated(actual) = &oracle {
        if !sqd_core::diagnosis::explains(s.dpi(), s.reasoner(), actual) {
            return Err(SessionError::NotADiagnosis.into());
        }
    }
    while !s.is_converged() && s.history().len() < options.max_queries {
        writeln!(out, "-- round {} ({} leading diagnoses)", s.history().len() + 1, s.leading().len())?;
        print_diagnoses(out, s.dpi(), s.leading())?;
        let p = s.next_query()?.clone();
        print_proposal(out, s.dpi(), options, &p)?;
        let answer = match oracle.answer(s.dpi(), s.reasoner(), &p.query) {
            Some(a) => {
                writeln!(out, "answer: {}", if a { "t" } else { "f" })?;
                a
            }
            None => read_answer(input, out)?,
        };
        s.answer(answer)?;
    }
    match s.result() {
        Some(r) => writeln!(out, "diagnosis: {} after {} queries", set_text(s.dpi(), r), s.history().len())?,
        None => {
            writeln!(out, "not converged after {} queries; remaining:", s.history().len())?;
            print_diagnoses(out, s.dpi(), s.leading())?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    files: &[PathBuf],
    random: Option<usize>,
    config: RandomDpiConfig,
    min_diagnoses: usize,
    repeat: usize,
    out_path: Option<&Path>,
    options: &QueryOptions,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut corpus: Vec<(String, String, Dpi)> = Vec::new();
    for f in files {
        let file = f.file_name().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
        let name = file.trim_end_matches(".json").trim_end_matches(".dpi").to_string();
        corpus.push((f.display().to_string(), name, load_dpi(f)?));
    }
    if let Some(n) = random {
        for (seed, dpi) in random_corpus(&config, n, min_diagnoses, options.leading, options.seed) {
            corpus.push((format!("random:{seed}"), format!("c{}-seed{seed}", config.components), dpi));
        }
    }
    if corpus.is_empty() {
        return Err(CliError::Usage("nothing to measure; pass --dpi or --random".into()));
    }
    let mut ms: Vec<Measurement> = Vec::new();
    for (source, name, dpi) in &corpus {
        for _ in 0..repeat.max(1) {
            match measure(source, name, dpi, options) {
                Ok(m) => ms.push(m),
                Err(BenchError::TooFewDiagnoses(n)) => {
                    eprintln!("skipping {n}: fewer than two diagnoses");
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let summary = summarize(&ms);
    let lines = [
        format!("rows = {}", summary.rows),
        format!(
            "median_query_size = {}",
            summary.median_query_size.map_or_else(|| "n/a".to_string(), |m| format!("{m}"))
        ),
        format!("max_time_p1p2_ms = {:.3}", summary.max_time_p1p2_ms),
        format!("max_time_p3_ms = {:.3}", summary.max_time_p3_ms),
        format!("reasoner_calls_p1p2 = {}", summary.reasoner_calls_p1p2),
        format!("p3_ceiling_violations = {}", summary.ceiling_violations),
    ];
    match out_path {
        Some(p) => {
            write_csv(std::fs::File::create(p)?, &ms)?;
            for l in lines {
                writeln!(out, "{l}")?;
            }
        }
        None => {
            write_csv(&mut *out, &ms)?;
            for l in lines {
                eprintln!("{l}");
            }
        }
    }
    Ok(())
}

/// Runs one command. `input` supplies interactive answers.
pub fn run(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Diagnose { file, max, breadth_first, seed } => {
            let dpi = load_dpi(&file)?;
            let order = if breadth_first { SearchOrder::BreadthFirst } else { SearchOrder::UniformCostProbability };
            let d = leading_diagnoses(&dpi, &Reasoner::new(), max.max(1), order, seed)?;
            print_diagnoses(out, &dpi, &d)?;
            if !d.is_exhaustive() {
                writeln!(out, "(more diagnoses exist)")?;
            }
        }
        Command::Query { file, options, json } => {
            let dpi = load_dpi(&file)?;
            let config = options.session_config()?;
            let r = Reasoner::new();
            let d = leading_diagnoses(&dpi, &r, options.leading, SearchOrder::UniformCostProbability, options.seed)?;
            if d.len() < 2 {
                writeln!(out, "single diagnosis {}; nothing to ask", set_text(&dpi, d.get(0)))?;
                return Ok(());
            }
            let p = compute_query(&dpi, &d, &config, &r)?;
            if json {
                let body = serde_json::json!({
                    "diagnoses": view::diagnoses(&dpi, &d),
                    "proposal": view::proposal(&dpi, &config.qcm, &p),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&body)?)?;
            } else {
                print_diagnoses(out, &dpi, &d)?;
                print_proposal(out, &dpi, &options, &p)?;
            }
        }
        Command::Session { file, actual, options } => session(&file, actual.as_deref(), &options, input, out)?,
        Command::Bench { dpi, random, components, atoms, negatives, min_diagnoses, repeat, out: path, options } => {
            let config = RandomDpiConfig { components, atoms, negatives, ..RandomDpiConfig::default() };
            bench(&dpi, random, config, min_diagnoses, repeat, path.as_deref(), &options, out)?
        }
        Command::Serve { addr } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::service::serve(addr))?;
        }
    }
    Ok(())
}
