//! The four pipelines: `extract`, `signal`, `calibrate`, `robustness`.

mod calibrate;
mod extract;
mod robustness;
mod signal;

pub use calibrate::{cmd_calibrate, CalibrateConfig};
pub use extract::{cmd_extract, ExtractConfig, Mode};
pub use robustness::{
    cmd_robustness, select_subset, RobustnessConfig, RobustnessMode, SubsetMode,
};
pub use signal::{cmd_signal, SignalConfig, StatChoice};

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use phonosig::chars::{skew, CharacterMatrix, FilterOptions, FilterReport};
use phonosig::evolve::{derive_seed, TipValues};
use phonosig::signal::{fritz_purvis_d, DResult, KEngine, PermutationOptions};
use phonosig::tree::{parse_newick, PhyloTree};

use crate::fmt::sig6;
use crate::CliError;

/// Which statistic a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    K,
    D,
}

/// One tested character.
#[derive(Debug, Clone)]
pub enum CharRow {
    K {
        key: String,
        n_used: usize,
        k: f64,
        p: f64,
        significant: bool,
        lambda: Option<f64>,
    },
    D {
        result: DResult,
        skew: f64,
    },
}

impl CharRow {
    pub fn statistic(&self) -> f64 {
        match self {
            CharRow::K { k, .. } => *k,
            CharRow::D { result, .. } => result.d,
        }
    }

    /// Significant for K; classified as carrying phylogenetic signal for D.
    pub fn counts_as_significant(&self) -> bool {
        match self {
            CharRow::K { significant, .. } => *significant,
            CharRow::D { result, .. } => {
                result.classification == phonosig::signal::DClass::Phylogenetic
            }
        }
    }
}

pub fn read_tree(path: &Path) -> Result<PhyloTree, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_newick(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<CharacterMatrix, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    CharacterMatrix::read_csv(file)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Optional doculect -> tip renames (two tab-separated columns, optional
/// `doculect<TAB>tip` header row).
pub fn read_tip_map(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line.trim_end() == "doculect\ttip") {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(from), Some(to)) = (cols.next(), cols.next()) else {
            return Err(CliError::Input(format!(
                "{}: line {}: expected `doculect<TAB>tip`",
                path.display(),
                i + 1
            )));
        };
        map.insert(from.trim().to_string(), to.trim().to_string());
    }
    Ok(map)
}

/// Apply renames and confirm every doculect is a tree tip.
pub fn align_matrix_to_tree(
    matrix: CharacterMatrix,
    tree: &PhyloTree,
    tip_map: &HashMap<String, String>,
) -> Result<CharacterMatrix, CliError> {
    let doculects: Vec<String> = matrix
        .doculects()
        .iter()
        .map(|d| tip_map.get(d).cloned().unwrap_or_else(|| d.clone()))
        .collect();
    let missing: Vec<&String> = doculects
        .iter()
        .filter(|d| tree.tip_id(d).is_none())
        .collect();
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(5).map(|s| s.to_string()).collect();
        return Err(CliError::Input(format!(
            "{} doculect(s) have no matching tree tip (e.g. {}); use --tip-map to rename",
            missing.len(),
            shown.join(", ")
        )));
    }
    let mut values = Vec::with_capacity(matrix.n_doculects() * matrix.n_characters());
    for d in 0..matrix.n_doculects() {
        for c in 0..matrix.n_characters() {
            values.push(matrix.get(d, c));
        }
    }
    Ok(CharacterMatrix::new(
        matrix.kind(),
        doculects,
        matrix.keys().to_vec(),
        values,
    ))
}

/// Filter settings for a statistic: D wants 50 usable values and keeps
/// zeros (they are data); K wants 20 usable values after zeros are treated
/// as missing.
pub fn default_filters(stat: Stat, min_non_na: Option<usize>, keep_zeros: bool) -> FilterOptions {
    match stat {
        Stat::D => FilterOptions {
            min_non_na: min_non_na.unwrap_or(50),
            require_variation: true,
            drop_zeros_as_na: false,
        },
        Stat::K => FilterOptions {
            min_non_na: min_non_na.unwrap_or(20),
            require_variation: true,
            drop_zeros_as_na: !keep_zeros,
        },
    }
}

pub fn describe_filter_losses(report: &FilterReport) -> String {
    format!(
        "{} characters in, {} kept ({} below the usable-value floor, {} without variation)",
        report.input, report.kept, report.dropped_low_n, report.dropped_no_variation
    )
}

/// Settings for [`test_characters`].
#[derive(Debug, Clone, Copy)]
pub struct TestOptions {
    pub stat: Stat,
    pub n_perm: usize,
    /// Family alpha: K flags significance at `alpha`, D classifies at the
    /// Bonferroni-corrected `alpha / 2` (two null hypotheses per character).
    pub alpha: f64,
    pub seed: u64,
    pub normalize: bool,
    pub pseudocount: bool,
}

/// Run the per-character tests over a filtered matrix. Character i derives
/// its RNG stream from (seed, i), so any parallel schedule gives identical
/// results. Runs inside the current rayon pool.
pub fn test_characters(
    tree: &PhyloTree,
    matrix: &CharacterMatrix,
    opts: TestOptions,
) -> Result<Vec<CharRow>, CliError> {
    use rayon::prelude::*;

    let indices: Vec<usize> = (0..matrix.n_characters()).collect();
    indices
        .par_iter()
        .map(|&c| test_one_character(tree, matrix, c, opts))
        .collect()
}

fn test_one_character(
    tree: &PhyloTree,
    matrix: &CharacterMatrix,
    c: usize,
    opts: TestOptions,
) -> Result<CharRow, CliError> {
    let key = matrix.keys()[c].to_string();
    let column = matrix.column(c);
    let fail = |e: &dyn std::fmt::Display| CliError::Input(format!("character {key}: {e}"));

    let mut by_doculect: HashMap<&str, f64> = HashMap::new();
    let mut keep: BTreeSet<String> = BTreeSet::new();
    for (d, v) in column.iter().enumerate() {
        if let Some(v) = v {
            let id = matrix.doculects()[d].as_str();
            by_doculect.insert(id, *v);
            keep.insert(id.to_string());
        }
    }
    let n_used = keep.len();
    let pruned = tree.prune_to_tips(&keep).map_err(|e| fail(&e))?;
    let seed = derive_seed(opts.seed, c as u64);

    match opts.stat {
        Stat::D => {
            let col_skew = skew(&column).map_err(|e| fail(&e))?;
            let values: Vec<f64> = pruned
                .tip_labels()
                .iter()
                .map(|l| by_doculect[*l])
                .collect();
            let tv = TipValues::for_tree(&pruned, values).map_err(|e| fail(&e))?;
            let mut result = fritz_purvis_d(&pruned, &tv, opts.n_perm, seed, opts.alpha / 2.0)
                .map_err(|e| fail(&e))?;
            result.key = key;
            Ok(CharRow::D {
                result,
                skew: col_skew,
            })
        }
        Stat::K => {
            let mut lambda = None;
            if opts.normalize {
                let aligned: Vec<Option<f64>> = pruned
                    .tip_labels()
                    .iter()
                    .map(|l| Some(by_doculect[*l]))
                    .collect();
                let t = phonosig::chars::tukey_normalize(&aligned).map_err(|e| fail(&e))?;
                if !t.degenerate {
                    lambda = Some(t.lambda);
                    for (label, v) in pruned.tip_labels().iter().zip(&t.transformed) {
                        by_doculect.insert(label, v.expect("no NA in aligned column"));
                    }
                }
            }
            let values: Vec<f64> = pruned
                .tip_labels()
                .iter()
                .map(|l| by_doculect[*l])
                .collect();
            let tv = TipValues::for_tree(&pruned, values).map_err(|e| fail(&e))?;
            let engine = KEngine::new(&pruned).map_err(|e| fail(&e))?;
            let r = engine
                .permutation_test(
                    &tv,
                    PermutationOptions {
                        n_perm: opts.n_perm,
                        seed,
                        pseudocount: opts.pseudocount,
                    },
                    key.clone(),
                )
                .map_err(|e| fail(&e))?;
            Ok(CharRow::K {
                key,
                n_used,
                k: r.k,
                p: r.p_value,
                significant: r.p_value < opts.alpha,
                lambda,
            })
        }
    }
}

/// Mean/SD/percent-significant over a set of rows.
pub fn summarize_rows(rows: &[CharRow]) -> (f64, f64, f64) {
    let stats: Vec<f64> = rows.iter().map(|r| r.statistic()).collect();
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let sd = if stats.len() > 1 {
        (stats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let pct = 100.0 * rows.iter().filter(|r| r.counts_as_significant()).count() as f64 / n;
    (mean, sd, pct)
}

pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn pct(x: f64) -> String {
    sig6(x)
}
