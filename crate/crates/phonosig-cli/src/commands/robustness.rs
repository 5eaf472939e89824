//! `robustness`: replicate signal tests over a posterior tree sample, or
//! over doculect subsets chosen to control wordlist-size disparity.

use std::collections::HashMap;
use std::path::PathBuf;

use phonosig::chars::{
    backward_transition_matrix, binary_biphone_matrix, class_transition_matrix,
    forward_transition_matrix, read_class_maps, read_wordlists, CharacterMatrix, Direction,
    Doculect, Scheme,
};
use phonosig::evolve::derive_seed;

use crate::fmt::sig6;
use crate::{thread_pool, CliError};

use super::{
    align_matrix_to_tree, default_filters, describe_filter_losses, read_matrix, read_tip_map,
    read_tree, summarize_rows, test_characters, write_output, Mode, Stat, TestOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetMode {
    EverySecond,
    Middle50,
}

impl SubsetMode {
    pub fn parse(s: &str) -> Result<SubsetMode, CliError> {
        match s {
            "every-second" => Ok(SubsetMode::EverySecond),
            "middle-50" => Ok(SubsetMode::Middle50),
            other => Err(CliError::Input(format!(
                "unknown subset mode {other:?} (expected every-second or middle-50)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubsetMode::EverySecond => "every-second",
            SubsetMode::Middle50 => "middle-50",
        }
    }
}

#[derive(Debug, Clone)]
pub enum RobustnessMode {
    /// Re-test a character matrix over every tree in a directory
    /// (lexicographic file order defines the tree index).
    Posterior {
        trees_dir: PathBuf,
        chars: PathBuf,
        tip_map: Option<PathBuf>,
        min_non_na: Option<usize>,
        keep_zeros: bool,
    },
    /// Rank doculects by wordlist size, take a subset, re-extract and
    /// re-test, and report the subset summary beside the full-sample one.
    Subset {
        subset: SubsetMode,
        wordlists: PathBuf,
        classmap: Option<PathBuf>,
        mode: Mode,
        scheme: Scheme,
        tree: PathBuf,
        min_non_na: Option<usize>,
        keep_zeros: bool,
    },
}

#[derive(Debug, Clone)]
pub struct RobustnessConfig {
    pub mode: RobustnessMode,
    pub n_perm: usize,
    pub alpha: f64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: PathBuf,
}

pub fn cmd_robustness(cfg: &RobustnessConfig) -> Result<(), CliError> {
    if cfg.n_perm == 0 {
        return Err(CliError::Input("--n-perm must be at least 1".into()));
    }
    match &cfg.mode {
        RobustnessMode::Posterior {
            trees_dir,
            chars,
            tip_map,
            min_non_na,
            keep_zeros,
        } => posterior(cfg, trees_dir, chars, tip_map.as_deref(), *min_non_na, *keep_zeros),
        RobustnessMode::Subset {
            subset,
            wordlists,
            classmap,
            mode,
            scheme,
            tree,
            min_non_na,
            keep_zeros,
        } => subset_run(
            cfg,
            *subset,
            wordlists,
            classmap.as_deref(),
            *mode,
            *scheme,
            tree,
            *min_non_na,
            *keep_zeros,
        ),
    }
}

fn posterior(
    cfg: &RobustnessConfig,
    trees_dir: &std::path::Path,
    chars: &std::path::Path,
    tip_map: Option<&std::path::Path>,
    min_non_na: Option<usize>,
    keep_zeros: bool,
) -> Result<(), CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(trees_dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", trees_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.len() < 2 {
        return Err(CliError::Input(format!(
            "{}: need at least 2 trees, found {}",
            trees_dir.display(),
            files.len()
        )));
    }

    let matrix = read_matrix(chars)?;
    let tip_map = match tip_map {
        Some(p) => read_tip_map(p)?,
        None => HashMap::new(),
    };

    let pool = thread_pool(cfg.workers)?;
    let mut out = String::from(
        "tree_index,tree_file,n_characters,mean_k,sd_k,pct_significant\n",
    );
    let mut all_k: Vec<f64> = Vec::new();
    let mut all_sig = 0usize;
    for (t, file) in files.iter().enumerate() {
        let tree = read_tree(file)?;
        let aligned = align_matrix_to_tree(matrix.clone(), &tree, &tip_map)?;
        let (filtered, report) = aligned.filter_characters(default_filters(
            Stat::K,
            min_non_na,
            keep_zeros,
        ));
        if filtered.n_characters() == 0 {
            return Err(CliError::Empty(format!(
                "tree {}: no characters passed the filters: {}",
                file.display(),
                describe_filter_losses(&report)
            )));
        }
        let rows = pool.install(|| {
            test_characters(
                &tree,
                &filtered,
                TestOptions {
                    stat: Stat::K,
                    n_perm: cfg.n_perm,
                    alpha: cfg.alpha,
                    seed: derive_seed(cfg.seed, t as u64),
                    normalize: false,
                    pseudocount: false,
                },
            )
        })?;
        let (mean, sd, pct) = summarize_rows(&rows);
        let name = file
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push_str(&format!(
            "{t},{name},{},{},{},{}\n",
            rows.len(),
            sig6(mean),
            sig6(sd),
            sig6(pct)
        ));
        all_sig += rows.iter().filter(|r| r.counts_as_significant()).count();
        all_k.extend(rows.iter().map(|r| r.statistic()));
    }

    let n = all_k.len() as f64;
    let pooled_mean = all_k.iter().sum::<f64>() / n;
    let pooled_sd = if all_k.len() > 1 {
        (all_k.iter().map(|x| (x - pooled_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    out.push_str(&format!(
        "pooled,,{},{},{},{}\n",
        all_k.len(),
        sig6(pooled_mean),
        sig6(pooled_sd),
        sig6(100.0 * all_sig as f64 / n)
    ));
    write_output(&cfg.out, out.as_bytes())
}

/// Indices of the selected doculects (into `ds`), ranked by wordlist size.
/// Both modes keep ceil(n/2) doculects: every-second walks the ranking in
/// steps of two; middle-50 takes the central run of the ranking.
pub fn select_subset(ds: &[Doculect], mode: SubsetMode) -> Vec<usize> {
    let mut ranked: Vec<usize> = (0..ds.len()).collect();
    ranked.sort_by(|&a, &b| {
        ds[a]
            .forms
            .len()
            .cmp(&ds[b].forms.len())
            .then_with(|| ds[a].id.cmp(&ds[b].id))
    });
    let m = ds.len().div_ceil(2);
    let mut picked: Vec<usize> = match mode {
        SubsetMode::EverySecond => ranked.iter().copied().step_by(2).collect(),
        SubsetMode::Middle50 => {
            let start = (ds.len() - m) / 2;
            ranked[start..start + m].to_vec()
        }
    };
    picked.sort_unstable();
    picked
}

fn extract_matrix(
    ds: &[Doculect],
    mode: Mode,
    scheme: Scheme,
    classmap: Option<&std::path::Path>,
) -> Result<CharacterMatrix, CliError> {
    match mode {
        Mode::Binary => Ok(binary_biphone_matrix(ds)),
        Mode::Fwd => Ok(forward_transition_matrix(ds)),
        Mode::Bwd => Ok(backward_transition_matrix(ds)),
        Mode::ClassFwd | Mode::ClassBwd => {
            let path = classmap.ok_or_else(|| {
                CliError::Input("class modes need --classmap".to_string())
            })?;
            let maps = read_class_maps(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let dir = if mode == Mode::ClassFwd {
                Direction::Forward
            } else {
                Direction::Backward
            };
            class_transition_matrix(ds, maps.get(scheme), dir).map_err(CliError::input)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn subset_run(
    cfg: &RobustnessConfig,
    subset: SubsetMode,
    wordlists: &std::path::Path,
    classmap: Option<&std::path::Path>,
    mode: Mode,
    scheme: Scheme,
    tree_path: &std::path::Path,
    min_non_na: Option<usize>,
    keep_zeros: bool,
) -> Result<(), CliError> {
    let data = read_wordlists(wordlists)
        .map_err(|e| CliError::Input(format!("{}: {e}", wordlists.display())))?;
    let tree = read_tree(tree_path)?;
    let picked = select_subset(&data.doculects, subset);
    let subset_docs: Vec<Doculect> = picked.iter().map(|&i| data.doculects[i].clone()).collect();
    if subset_docs.len() < 2 {
        return Err(CliError::Input(
            "subset leaves fewer than 2 doculects".to_string(),
        ));
    }

    let stat = if mode == Mode::Binary { Stat::D } else { Stat::K };
    let pool = thread_pool(cfg.workers)?;
    let mut out = String::from(
        "sample,n_doculects,min_forms,max_forms,mean_forms,n_characters,mean_stat,sd_stat,pct_significant\n",
    );
    for (label, docs) in [
        ("full", &data.doculects),
        (subset.as_str(), &subset_docs),
    ] {
        let matrix = extract_matrix(docs, mode, scheme, classmap)?;
        let aligned = align_matrix_to_tree(matrix, &tree, &HashMap::new())?;
        let (filtered, report) =
            aligned.filter_characters(default_filters(stat, min_non_na, keep_zeros));
        if filtered.n_characters() == 0 {
            return Err(CliError::Empty(format!(
                "{label}: no characters passed the filters: {}",
                describe_filter_losses(&report)
            )));
        }
        let rows = pool.install(|| {
            test_characters(
                &tree,
                &filtered,
                TestOptions {
                    stat,
                    n_perm: cfg.n_perm,
                    alpha: cfg.alpha,
                    seed: cfg.seed,
                    normalize: false,
                    pseudocount: false,
                },
            )
        })?;
        let (mean, sd, pct) = summarize_rows(&rows);
        let sizes: Vec<usize> = docs.iter().map(|d| d.forms.len()).collect();
        let mean_forms = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        out.push_str(&format!(
            "{label},{},{},{},{},{},{},{},{}\n",
            docs.len(),
            sizes.iter().min().unwrap(),
            sizes.iter().max().unwrap(),
            sig6(mean_forms),
            rows.len(),
            sig6(mean),
            sig6(sd),
            sig6(pct)
        ));
    }
    write_output(&cfg.out, out.as_bytes())
}
