//! CLI-side acceptance: the K calibration sweep (criterion 1) and run
//! determinism (criterion 7), plus exit-code and golden-output checks for
//! the pipelines. Run with `-- --nocapture` to see the PASS lines.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use phonosig::chars::write_wordlists_tsv;
use phonosig::synth::{
    doculect_ids, sampled_yule_tree, synthetic_corpus, yule_tree, CorpusOptions,
};
use phonosig::tree::write_newick;
use phonosig_cli::commands::{cmd_calibrate, CalibrateConfig};

fn pass(criterion: &str, started: Instant) {
    println!(
        "ACCEPTANCE {criterion}: PASS ({:.1}s)",
        started.elapsed().as_secs_f64()
    );
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_phonosig")
}

fn run_ok(args: &[&str]) {
    let out = Command::new(bin()).args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "phonosig {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Small deterministic corpus + matching tree for CLI fixtures.
fn small_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let ids = doculect_ids(24);
    let opts = CorpusOptions {
        pool_size: 16,
        inventory_range: (8, 14),
        form_length_range: (2, 6),
        log_size_mu: 4.6,
        log_size_sigma: 0.4,
        size_range: (40, 200),
        ..CorpusOptions::default()
    };
    let corpus = synthetic_corpus(24, 0xF1, &opts, Some(&ids));
    let tree = yule_tree(24, 1.0, 0xF2, Some(&ids)).unwrap();
    let wordlists = dir.join("wordlists.tsv");
    let tree_path = dir.join("tree.nwk");
    std::fs::write(&wordlists, write_wordlists_tsv(&corpus)).unwrap();
    std::fs::write(&tree_path, write_newick(&tree) + "\n").unwrap();
    (wordlists, tree_path)
}

#[test]
fn criterion_1_k_calibration_sweep() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    // a birth tree as a study would see it: 111 tips sampled from a larger
    // pure-birth process (complete sampling would leave sister pairs only
    // one waiting time old, and no test keeps power through those)
    let tree = sampled_yule_tree(111, 500, 1.0, 0xCAFE, None).unwrap();
    let tree_path = dir.path().join("birth111.nwk");
    std::fs::write(&tree_path, write_newick(&tree) + "\n").unwrap();

    let rows = cmd_calibrate(&CalibrateConfig {
        tree: tree_path,
        step_pct: 10,
        traits_per_step: 200,
        n_perm: 1000,
        alpha: 0.05,
        seed: 0xAC1,
        workers: None,
        out: dir.path().join("sweep.csv"),
    })
    .unwrap();
    assert_eq!(rows.len(), 11);

    let pure_bm = rows.iter().find(|r| r.p_brownian_pct == 100).unwrap();
    assert!(
        (0.85..=1.15).contains(&pure_bm.mean_k),
        "(a) mean K at 100% Brownian = {}, expected within [0.85, 1.15]",
        pure_bm.mean_k
    );

    let pure_noise = rows.iter().find(|r| r.p_brownian_pct == 0).unwrap();
    assert!(
        (2.0..=9.0).contains(&pure_noise.pct_significant),
        "(b) false positive rate at 0% Brownian = {}%, expected within [2%, 9%]",
        pure_noise.pct_significant
    );

    for row in rows.iter().filter(|r| r.p_brownian_pct >= 70) {
        assert!(
            row.pct_significant >= 99.0,
            "(c) at {}% Brownian only {}% significant, expected >= 99%",
            row.p_brownian_pct,
            row.pct_significant
        );
    }

    // mean K should climb with the Brownian share (Spearman > 0.95)
    let mut rank: Vec<usize> = (0..rows.len()).collect();
    rank.sort_by(|&a, &b| rows[a].mean_k.partial_cmp(&rows[b].mean_k).unwrap());
    let mut rho_num = 0.0;
    for (pos, &idx) in rank.iter().enumerate() {
        let d = pos as f64 - idx as f64;
        rho_num += d * d;
    }
    let n = rows.len() as f64;
    let rho = 1.0 - 6.0 * rho_num / (n * (n * n - 1.0));
    assert!(rho > 0.95, "mean K not monotone in Brownian share: rho = {rho}");

    pass("1 (K calibration sweep on a 111-tip birth tree)", started);
}

#[test]
fn criterion_7_determinism_across_runs_and_workers() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (wordlists, tree) = small_fixture(dir.path());

    // build a frequency matrix once
    let extract_dir = dir.path().join("extract");
    run_ok(&[
        "extract",
        "--wordlists",
        wordlists.to_str().unwrap(),
        "--modes",
        "fwd",
        "--out-dir",
        extract_dir.to_str().unwrap(),
    ]);
    let chars = extract_dir.join("fwd.csv");

    let signal_out: Vec<Vec<u8>> = ["s1", "s2", "s3", "s4"]
        .iter()
        .zip(["1", "1", "8", "8"])
        .map(|(name, workers)| {
            let out = dir.path().join(format!("{name}.csv"));
            run_ok(&[
                "signal",
                "--tree",
                tree.to_str().unwrap(),
                "--chars",
                chars.to_str().unwrap(),
                "--seed",
                "901",
                "--n-perm",
                "300",
                "--min-non-na",
                "10",
                "--workers",
                workers,
                "--full-precision-json",
                "--out",
                out.to_str().unwrap(),
            ]);
            let mut bytes = read(&out);
            bytes.extend(read(&out.with_extension("json")));
            bytes
        })
        .collect();
    assert_eq!(signal_out[0], signal_out[1], "signal: repeat run differed");
    assert_eq!(signal_out[0], signal_out[2], "signal: worker count changed output");
    assert_eq!(signal_out[0], signal_out[3], "signal: worker count changed output");

    let calibrate_out: Vec<Vec<u8>> = ["c1", "c2", "c3", "c4"]
        .iter()
        .zip(["1", "1", "8", "8"])
        .map(|(name, workers)| {
            let out = dir.path().join(format!("{name}.csv"));
            run_ok(&[
                "calibrate",
                "--tree",
                tree.to_str().unwrap(),
                "--step",
                "25",
                "--traits-per-step",
                "20",
                "--n-perm",
                "100",
                "--seed",
                "902",
                "--workers",
                workers,
                "--out",
                out.to_str().unwrap(),
            ]);
            read(&out)
        })
        .collect();
    assert_eq!(calibrate_out[0], calibrate_out[1], "calibrate: repeat run differed");
    assert_eq!(calibrate_out[0], calibrate_out[2], "calibrate: worker count changed output");
    assert_eq!(calibrate_out[0], calibrate_out[3], "calibrate: worker count changed output");

    pass("7 (byte-identical signal/calibrate across runs and workers 1 vs 8)", started);
}
