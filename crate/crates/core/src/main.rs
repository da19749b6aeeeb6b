use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ergoset::experiments::{er_sweep, rewire_experiment, ErSweepConfig, RewireConfig, SpectralRow};
use ergoset::graph::{parse_edge_list, write_edge_list, Delimiter, IngestOptions};
use ergoset::oracle::{DEFAULT_EPS, DEFAULT_MAX_STEPS};
use ergoset::step1::MetaEntry;
use ergoset::verify::{verify, VerifyOptions};
use ergoset::{
    compress_step1, partition, run_pipeline, CompressedGraph, DiGraph, Error, PipelineOptions,
    RankPolicy, SiteModel, SiteProbability,
};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "ergoset", version, about = "Ergodic-set detection and flow-preserving compression of directed networks")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Field delimiter of edge-list files.
    #[arg(long, global = true, value_enum, default_value = "whitespace")]
    delimiter: DelimiterArg,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Master seed for experiments.
    #[arg(long, global = true, env = "ERGOSET_SEED", default_value_t = 0)]
    seed: u64,
    /// Residual transient mass at which the oracle walk stops.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Oracle step limit.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum DelimiterArg {
    Whitespace,
    Comma,
}

#[derive(Clone, Copy, ValueEnum)]
enum SiteArg {
    Indegree,
    Uniform,
    Stationary,
}

#[derive(Args)]
struct CompressionArgs {
    /// Absolute singular-value threshold for the effective rank.
    #[arg(long, conflicts_with = "rank_k")]
    rank_tol: Option<f64>,
    /// Keep exactly this many singular values (lossy).
    #[arg(long)]
    rank_k: Option<usize>,
    /// Occupation model for nodes of collapsed backward sets.
    #[arg(long, value_enum, default_value = "indegree")]
    site_prob: SiteArg,
    /// Use edge weights instead of edge counts in the backward collapse.
    #[arg(long)]
    weighted_site_prob: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the forward/backward/transient partition as JSON.
    Detect {
        input: PathBuf,
        /// Directory for partition.json (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compress a graph (step 1, or both steps).
    Compress {
        input: PathBuf,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        step: u8,
        #[arg(long, default_value = "ergoset-out")]
        out: PathBuf,
        #[command(flatten)]
        compression: CompressionArgs,
    },
    /// Check a compression against brute-force walk evolution.
    Verify {
        input: PathBuf,
        /// Compressed edge list to check instead of a fresh compression.
        #[arg(long, requires = "meta_map")]
        compressed: Option<PathBuf>,
        /// meta_map.json belonging to --compressed.
        #[arg(long, requires = "compressed")]
        meta_map: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, value_enum, default_value = "indegree")]
        site_prob: SiteArg,
        #[arg(long)]
        weighted_site_prob: bool,
    },
    /// Run a numerical study.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// Ergodic-set prevalence in Erdős–Rényi digraphs.
    Er {
        /// Graph sizes.
        #[arg(long = "n", value_delimiter = ',', default_value = "100")]
        sizes: Vec<usize>,
        /// Explicit edge probabilities.
        #[arg(long = "p", value_delimiter = ',', conflicts_with_all = ["p_max", "p_steps"])]
        probabilities: Vec<f64>,
        /// Grid from --p-min to --p-max with --p-steps points.
        #[arg(long, requires = "p_steps")]
        p_max: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, requires = "p_max")]
        p_steps: Option<usize>,
        /// Log-spaced grid (needs --p-min > 0).
        #[arg(long)]
        log: bool,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Laplacian spectra of B^T B before and after rewiring each core.
    Rewire {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        swaps_per_edge: usize,
        #[arg(long)]
        zero_tol: Option<f64>,
        /// Directory for spectra.csv and rewire_stats.json (CSV to stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        compression: CompressionArgs,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse(_) => EXIT_PARSE,
                Error::Io(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = cli.global;
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if !(g.eps > 0.0) {
        return Err(Failure::Usage("--eps must be positive".into()));
    }
    let ingest = IngestOptions {
        delimiter: match g.delimiter {
            DelimiterArg::Whitespace => Delimiter::Whitespace,
            DelimiterArg::Comma => Delimiter::Comma,
        },
        default_weight: 1.0,
    };

    match cli.command {
        Command::Detect { input, out } => {
            let graph = read_graph(&input, &ingest)?;
            let json = serde_json::to_string_pretty(&partition(&graph).to_json(&graph))? + "\n";
            match out {
                Some(dir) => write(&dir, "partition.json", &json)?,
                None => print!("{json}"),
            }
        }
        Command::Compress {
            input,
            step,
            out,
            compression,
        } => {
            let graph = read_graph(&input, &ingest)?;
            let opts = pipeline_options(&compression)?;
            let part = partition(&graph);
            write(&out, "partition.json", &(serde_json::to_string_pretty(&part.to_json(&graph))? + "\n"))?;
            let report_json = if step == 1 {
                let (cg, report) = compress_step1(&graph, &part, opts.site)?;
                write_step1(&out, &graph, &cg, ingest.delimiter)?;
                serde_json::to_string_pretty(&report)?
            } else {
                let run = run_pipeline(&graph, &opts)?;
                write_step1(&out, &graph, &run.compressed, ingest.delimiter)?;
                write(&out, "B.csv", &run.mixing.to_csv())?;
                write(&out, "M_bw.csv", &run.factors.m_bw_csv(&run.mixing))?;
                write(&out, "C.csv", &run.factors.c_csv())?;
                write(&out, "M_fw.csv", &run.factors.m_fw_csv(&run.mixing))?;
                for w in &run.report.warnings {
                    eprintln!("warning: {w}");
                }
                serde_json::to_string_pretty(&run.report)?
            } + "\n";
            write(&out, "report.json", &report_json)?;
            print!("{report_json}");
        }
        Command::Verify {
            input,
            compressed,
            meta_map,
            tolerance,
            site_prob,
            weighted_site_prob,
        } => {
            if !(tolerance > 0.0) {
                return Err(Failure::Usage("--tolerance must be positive".into()));
            }
            let graph = read_graph(&input, &ingest)?;
            let site = site_probability(site_prob, weighted_site_prob);
            let cg = match (compressed, meta_map) {
                (Some(c), Some(m)) => {
                    let cgraph = read_graph(&c, &ingest)?;
                    let entries: Vec<MetaEntry> = serde_json::from_str(&fs::read_to_string(&m)?)?;
                    CompressedGraph::from_meta_map(cgraph, &graph, &entries)?
                }
                _ => compress_step1(&graph, &partition(&graph), site)?.0,
            };
            let opts = VerifyOptions {
                eps: g.eps,
                max_steps: g.max_steps,
                tolerance,
                site,
            };
            let report = verify(&graph, &cg, &opts)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.pass {
                let worst = report
                    .discrepancies
                    .first()
                    .map(|d| format!("{} at {}: expected {}, found {}", d.check, d.location, d.expected, d.found))
                    .unwrap_or_default();
                return Err(Failure::Verification(worst));
            }
        }
        Command::Experiment(Experiment::Er {
            sizes,
            probabilities,
            p_max,
            p_min,
            p_steps,
            log,
            reps,
            out,
        }) => {
            let probabilities = match (p_max, p_steps) {
                (Some(hi), Some(steps)) if log => {
                    if !(p_min > 0.0) {
                        return Err(Failure::Usage("--log needs --p-min > 0".into()));
                    }
                    ErSweepConfig::log_grid(p_min, hi, steps)
                }
                (Some(hi), Some(steps)) => ErSweepConfig::linear_grid(p_min, hi, steps),
                _ if probabilities.is_empty() => {
                    return Err(Failure::Usage("give --p or --p-max with --p-steps".into()))
                }
                _ => probabilities,
            };
            let cfg = ErSweepConfig {
                sizes,
                probabilities,
                replicates: reps,
                seed: g.seed,
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let csv = er_sweep(&cfg)?.to_csv();
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Experiment(Experiment::Rewire {
            inputs,
            swaps_per_edge,
            zero_tol,
            out,
            compression,
        }) => {
            let graphs = inputs
                .iter()
                .map(|p| Ok((p.display().to_string(), read_graph(p, &ingest)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            let cfg = RewireConfig {
                swaps_per_edge,
                seed: g.seed,
                zero_tol,
                pipeline: pipeline_options(&compression)?,
            };
            let report = rewire_experiment(&graphs, &cfg)?;
            for n in &report.notices {
                eprintln!("note: {n}");
            }
            let csv = SpectralRow::csv(&report.rows);
            match out {
                Some(dir) => {
                    write(&dir, "spectra.csv", &csv)?;
                    let json = serde_json::json!({
                        "notices": report.notices,
                        "stats": report.stats,
                    });
                    write(&dir, "rewire_stats.json", &(serde_json::to_string_pretty(&json)? + "\n"))?;
                }
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn read_graph(path: &Path, opts: &IngestOptions) -> Result<DiGraph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_edge_list(&text, opts).map_err(|e| Failure::Lib(Error::Parse(e)))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_step1(dir: &Path, g: &DiGraph, cg: &CompressedGraph, delimiter: Delimiter) -> Result<(), Failure> {
    write(dir, "compressed.edges", &write_edge_list(&cg.graph, delimiter))?;
    write(dir, "meta_map.json", &(serde_json::to_string_pretty(&cg.meta_map(g))? + "\n"))
}

fn site_probability(arg: SiteArg, weighted: bool) -> SiteProbability {
    SiteProbability {
        model: match arg {
            SiteArg::Indegree => SiteModel::InDegree,
            SiteArg::Uniform => SiteModel::Uniform,
            SiteArg::Stationary => SiteModel::Stationary,
        },
        weighted,
    }
}

fn pipeline_options(args: &CompressionArgs) -> Result<PipelineOptions, Failure> {
    let rank = match (args.rank_tol, args.rank_k) {
        (Some(t), _) if !(t > 0.0) => return Err(Failure::Usage("--rank-tol must be positive".into())),
        (Some(t), _) => RankPolicy::Absolute(t),
        (None, Some(k)) => RankPolicy::Fixed(k),
        (None, None) => RankPolicy::Numerical,
    };
    Ok(PipelineOptions {
        site: site_probability(args.site_prob, args.weighted_site_prob),
        rank,
    })
}
