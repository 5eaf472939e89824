use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phonosig::chars::Scheme;
use phonosig_cli::commands::{
    cmd_calibrate, cmd_extract, cmd_robustness, cmd_signal, CalibrateConfig, ExtractConfig, Mode,
    RobustnessConfig, RobustnessMode, SignalConfig, StatChoice, SubsetMode,
};
use phonosig_cli::CliError;

/// Phonotactic characters and phylogenetic signal.
#[derive(Parser)]
#[command(name = "phonosig", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract character matrices from a segmented wordlist TSV.
    Extract(ExtractArgs),
    /// Test each character of a matrix for phylogenetic signal.
    Signal(SignalArgs),
    /// Sweep simulated Brownian/noise mixtures through the K test.
    Calibrate(CalibrateArgs),
    /// Replicate K tests over posterior trees or doculect subsets.
    Robustness(RobustnessArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Wordlist TSV (header `doculect<TAB>form`).
    #[arg(long)]
    wordlists: PathBuf,
    /// Class map TSV (header `segment<TAB>place<TAB>major_place<TAB>manner`).
    #[arg(long)]
    classmap: Option<PathBuf>,
    /// Comma-separated modes: binary, fwd, bwd, class-fwd, class-bwd.
    #[arg(long, default_value = "binary,fwd,bwd", value_delimiter = ',')]
    modes: Vec<String>,
    /// Comma-separated schemes for class modes.
    #[arg(long, default_value = "place,major_place,manner", value_delimiter = ',')]
    schemes: Vec<String>,
    /// Directory for the CSVs and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SignalArgs {
    /// Reference tree (Newick).
    #[arg(long)]
    tree: PathBuf,
    /// Character matrix CSV.
    #[arg(long)]
    chars: PathBuf,
    /// auto (binary matrices get D, others K), k, or d.
    #[arg(long, default_value = "auto")]
    stat: String,
    #[arg(long, default_value_t = 10_000)]
    n_perm: usize,
    /// Family significance level; D classification uses alpha/2.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Usable-value floor (default: 50 for D, 20 for K).
    #[arg(long)]
    min_non_na: Option<usize>,
    /// RNG seed (required: every run is reproducible).
    #[arg(long)]
    seed: u64,
    /// Power-transform each character before the K test.
    #[arg(long)]
    normalize: bool,
    /// Keep zero frequencies instead of treating them as missing (K only).
    #[arg(long)]
    keep_zeros: bool,
    /// Report permutation p-values as (r+1)/(n+1) instead of r/n.
    #[arg(long)]
    pseudocount: bool,
    /// Doculect -> tip rename TSV.
    #[arg(long)]
    tip_map: Option<PathBuf>,
    /// Worker threads (default: PHONOSIG_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Results CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write a full-precision JSON sidecar next to the CSV.
    #[arg(long)]
    full_precision_json: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Brownian-share grid step in percentage points.
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long, default_value_t = 1000)]
    traits_per_step: usize,
    #[arg(long, default_value_t = 1000)]
    n_perm: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RobustnessArgs {
    /// Directory of Newick files (posterior mode).
    #[arg(long)]
    trees: Option<PathBuf>,
    /// Character matrix CSV (posterior mode).
    #[arg(long)]
    chars: Option<PathBuf>,
    /// every-second or middle-50 (subset mode).
    #[arg(long)]
    subset: Option<String>,
    /// Wordlist TSV (subset mode).
    #[arg(long)]
    wordlists: Option<PathBuf>,
    /// Class map TSV (subset mode with class extraction).
    #[arg(long)]
    classmap: Option<PathBuf>,
    /// Extraction mode for subset runs: binary, fwd, bwd, class-fwd, class-bwd.
    #[arg(long)]
    mode: Option<String>,
    /// Scheme for class extraction in subset runs.
    #[arg(long, default_value = "place")]
    scheme: String,
    /// Single reference tree (subset mode).
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    n_perm: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    min_non_na: Option<usize>,
    #[arg(long)]
    keep_zeros: bool,
    #[arg(long)]
    tip_map: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Extract(args) => {
            let modes = args
                .modes
                .iter()
                .map(|m| Mode::parse(m))
                .collect::<Result<Vec<_>, _>>()?;
            let schemes = args
                .schemes
                .iter()
                .map(|s| Scheme::parse(s).map_err(CliError::input))
                .collect::<Result<Vec<_>, _>>()?;
            cmd_extract(&ExtractConfig {
                wordlists: args.wordlists,
                classmap: args.classmap,
                modes,
                schemes,
                out_dir: args.out_dir,
            })
        }
        Command::Signal(args) => {
            let summary = cmd_signal(&SignalConfig {
                tree: args.tree,
                chars: args.chars,
                stat: StatChoice::parse(&args.stat)?,
                n_perm: args.n_perm,
                alpha: args.alpha,
                min_non_na: args.min_non_na,
                seed: args.seed,
                normalize: args.normalize,
                keep_zeros: args.keep_zeros,
                pseudocount: args.pseudocount,
                tip_map: args.tip_map,
                workers: args.workers,
                out: args.out,
                full_precision_json: args.full_precision_json,
            })?;
            eprintln!(
                "tested {} characters: mean {:.4}, sd {:.4}, {:.1}% significant",
                summary.n_characters, summary.mean, summary.sd, summary.pct_significant
            );
            Ok(())
        }
        Command::Calibrate(args) => {
            cmd_calibrate(&CalibrateConfig {
                tree: args.tree,
                step_pct: args.step,
                traits_per_step: args.traits_per_step,
                n_perm: args.n_perm,
                alpha: args.alpha,
                seed: args.seed,
                workers: args.workers,
                out: args.out,
            })?;
            Ok(())
        }
        Command::Robustness(args) => {
            let mode = match (&args.trees, &args.subset) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Input(
                        "--trees and --subset are mutually exclusive".into(),
                    ))
                }
                (Some(trees), None) => {
                    let chars = args.chars.clone().ok_or_else(|| {
                        CliError::Input("posterior mode needs --chars".into())
                    })?;
                    RobustnessMode::Posterior {
                        trees_dir: trees.clone(),
                        chars,
                        tip_map: args.tip_map.clone(),
                        min_non_na: args.min_non_na,
                        keep_zeros: args.keep_zeros,
                    }
                }
                (None, Some(subset)) => {
                    let wordlists = args.wordlists.clone().ok_or_else(|| {
                        CliError::Input("subset mode needs --wordlists".into())
                    })?;
                    let tree = args.tree.clone().ok_or_else(|| {
                        CliError::Input("subset mode needs --tree".into())
                    })?;
                    let mode_str = args.mode.clone().ok_or_else(|| {
                        CliError::Input("subset mode needs --mode".into())
                    })?;
                    RobustnessMode::Subset {
                        subset: SubsetMode::parse(subset)?,
                        wordlists,
                        classmap: args.classmap.clone(),
                        mode: Mode::parse(&mode_str)?,
                        scheme: Scheme::parse(&args.scheme).map_err(CliError::input)?,
                        tree,
                        min_non_na: args.min_non_na,
                        keep_zeros: args.keep_zeros,
                    }
                }
                (None, None) => {
                    return Err(CliError::Input(
                        "choose a mode: --trees DIR (posterior) or --subset MODE".into(),
                    ))
                }
            };
            cmd_robustness(&RobustnessConfig {
                mode,
                n_perm: args.n_perm,
                alpha: args.alpha,
                seed: args.seed,
                workers: args.workers,
                out: args.out,
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
