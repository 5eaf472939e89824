//! `signal`: per-character K or D tests against a reference tree.

use std::collections::HashMap;
use std::path::PathBuf;

use phonosig::chars::CharKind;
use phonosig::signal::DClass;
use serde::Serialize;

use crate::fmt::sig6;
use crate::{thread_pool, CliError};

use super::{
    align_matrix_to_tree, default_filters, describe_filter_losses, read_matrix, read_tip_map,
    read_tree, summarize_rows, test_characters, write_output, CharRow, Stat, TestOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatChoice {
    Auto,
    K,
    D,
}

impl StatChoice {
    pub fn parse(s: &str) -> Result<StatChoice, CliError> {
        match s {
            "auto" => Ok(StatChoice::Auto),
            "k" => Ok(StatChoice::K),
            "d" => Ok(StatChoice::D),
            other => Err(CliError::Input(format!(
                "unknown statistic {other:?} (expected auto, k, or d)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SignalConfig {
    pub tree: PathBuf,
    pub chars: PathBuf,
    pub stat: StatChoice,
    pub n_perm: usize,
    pub alpha: f64,
    pub min_non_na: Option<usize>,
    pub seed: u64,
    pub normalize: bool,
    pub keep_zeros: bool,
    pub pseudocount: bool,
    pub tip_map: Option<PathBuf>,
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub full_precision_json: bool,
}

#[derive(Debug)]
pub struct SignalSummary {
    pub stat: Stat,
    pub n_characters: usize,
    pub mean: f64,
    pub sd: f64,
    pub pct_significant: f64,
}

pub fn cmd_signal(cfg: &SignalConfig) -> Result<SignalSummary, CliError> {
    if cfg.n_perm == 0 {
        return Err(CliError::Input("--n-perm must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.alpha) || cfg.alpha <= 0.0 {
        return Err(CliError::Input("--alpha must lie in (0, 1)".into()));
    }
    let tree = read_tree(&cfg.tree)?;
    let matrix = read_matrix(&cfg.chars)?;
    let tip_map = match &cfg.tip_map {
        Some(p) => read_tip_map(p)?,
        None => HashMap::new(),
    };
    let matrix = align_matrix_to_tree(matrix, &tree, &tip_map)?;

    let stat = match cfg.stat {
        StatChoice::K => Stat::K,
        StatChoice::D => Stat::D,
        StatChoice::Auto => match matrix.kind() {
            CharKind::Binary => Stat::D,
            _ => Stat::K,
        },
    };
    let filters = default_filters(stat, cfg.min_non_na, cfg.keep_zeros);
    if filters.min_non_na < 2 {
        return Err(CliError::Input("--min-non-na must be at least 2".into()));
    }
    let (filtered, report) = matrix.filter_characters(filters);
    if filtered.n_characters() == 0 {
        return Err(CliError::Empty(format!(
            "no characters passed the filters: {}",
            describe_filter_losses(&report)
        )));
    }

    let pool = thread_pool(cfg.workers)?;
    let rows = pool.install(|| {
        test_characters(
            &tree,
            &filtered,
            TestOptions {
                stat,
                n_perm: cfg.n_perm,
                alpha: cfg.alpha,
                seed: cfg.seed,
                normalize: cfg.normalize,
                pseudocount: cfg.pseudocount,
            },
        )
    })?;

    let (mean, sd, pct_significant) = summarize_rows(&rows);
    let csv = render_csv(stat, &rows, cfg.normalize, mean, sd, pct_significant)?;
    write_output(&cfg.out, csv.as_bytes())?;
    if cfg.full_precision_json {
        let json = render_json(&rows)?;
        write_output(&cfg.out.with_extension("json"), json.as_bytes())?;
    }

    Ok(SignalSummary {
        stat,
        n_characters: rows.len(),
        mean,
        sd,
        pct_significant,
    })
}

fn render_csv(
    stat: Stat,
    rows: &[CharRow],
    normalize: bool,
    mean: f64,
    sd: f64,
    pct_significant: f64,
) -> Result<String, CliError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    match stat {
        Stat::K => {
            let mut header = vec!["key", "n_used", "k", "p", "significant"];
            if normalize {
                header.push("lambda");
            }
            wtr.write_record(&header).map_err(CliError::input)?;
            for row in rows {
                let CharRow::K {
                    key,
                    n_used,
                    k,
                    p,
                    significant,
                    lambda,
                } = row
                else {
                    unreachable!("stat is K");
                };
                let mut rec = vec![
                    key.clone(),
                    n_used.to_string(),
                    sig6(*k),
                    sig6(*p),
                    if *significant { "1" } else { "0" }.to_string(),
                ];
                if normalize {
                    rec.push(lambda.map(sig6).unwrap_or_default());
                }
                wtr.write_record(&rec).map_err(CliError::input)?;
            }
        }
        Stat::D => {
            wtr.write_record([
                "key",
                "n_used",
                "skew",
                "d",
                "sum_d_obs",
                "mean_sum_d_random",
                "mean_sum_d_brownian",
                "p_d_eq_0",
                "p_d_eq_1",
                "classification",
            ])
            .map_err(CliError::input)?;
            for row in rows {
                let CharRow::D { result, skew } = row else {
                    unreachable!("stat is D");
                };
                wtr.write_record([
                    result.key.clone(),
                    result.n_used.to_string(),
                    sig6(*skew),
                    sig6(result.d),
                    sig6(result.sum_d_obs),
                    sig6(result.mean_sum_d_random),
                    sig6(result.mean_sum_d_brownian),
                    sig6(result.p_d_eq_0),
                    sig6(result.p_d_eq_1),
                    result.classification.as_str().to_string(),
                ])
                .map_err(CliError::input)?;
            }
        }
    }
    let mut out = String::from_utf8(wtr.into_inner().map_err(|e| CliError::Internal(e.to_string()))?)
        .map_err(|e| CliError::Internal(e.to_string()))?;

    let label = match stat {
        Stat::K => "k",
        Stat::D => "d",
    };
    out.push_str(&format!("# characters_tested,{}\n", rows.len()));
    out.push_str(&format!("# mean_{label},{}\n", sig6(mean)));
    out.push_str(&format!("# sd_{label},{}\n", sig6(sd)));
    out.push_str(&format!("# pct_significant,{}\n", sig6(pct_significant)));
    if stat == Stat::D {
        for class in [
            DClass::OverClumped,
            DClass::Phylogenetic,
            DClass::Intermediate,
            DClass::Random,
            DClass::OverDispersed,
            DClass::Indeterminate,
        ] {
            let count = rows
                .iter()
                .filter(|r| matches!(r, CharRow::D { result, .. } if result.classification == class))
                .count();
            out.push_str(&format!("# n_{},{count}\n", class.as_str().replace('-', "_")));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct JsonKRow<'a> {
    key: &'a str,
    n_used: usize,
    k: f64,
    p: f64,
    significant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

#[derive(Serialize)]
struct JsonDRow<'a> {
    key: &'a str,
    n_used: usize,
    skew: f64,
    d: f64,
    sum_d_obs: f64,
    mean_sum_d_random: f64,
    mean_sum_d_brownian: f64,
    p_d_eq_0: f64,
    p_d_eq_1: f64,
    classification: &'a str,
}

fn render_json(rows: &[CharRow]) -> Result<String, CliError> {
    let value = match rows.first() {
        Some(CharRow::K { .. }) | None => {
            let out: Vec<JsonKRow> = rows
                .iter()
                .filter_map(|r| match r {
                    CharRow::K {
                        key,
                        n_used,
                        k,
                        p,
                        significant,
                        lambda,
                    } => Some(JsonKRow {
                        key,
                        n_used: *n_used,
                        k: *k,
                        p: *p,
                        significant: *significant,
                        lambda: *lambda,
                    }),
                    _ => None,
                })
                .collect();
            serde_json::to_string_pretty(&out)
        }
        Some(CharRow::D { .. }) => {
            let out: Vec<JsonDRow> = rows
                .iter()
                .filter_map(|r| match r {
                    CharRow::D { result, skew } => Some(JsonDRow {
                        key: &result.key,
                        n_used: result.n_used,
                        skew: *skew,
                        d: result.d,
                        sum_d_obs: result.sum_d_obs,
                        mean_sum_d_random: result.mean_sum_d_random,
                        mean_sum_d_brownian: result.mean_sum_d_brownian,
                        p_d_eq_0: result.p_d_eq_0,
                        p_d_eq_1: result.p_d_eq_1,
                        classification: result.classification.as_str(),
                    }),
                    _ => None,
                })
                .collect();
            serde_json::to_string_pretty(&out)
        }
    };
    value
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}
