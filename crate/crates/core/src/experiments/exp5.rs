use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{ensure_dir, ExperimentConfig, RunManifest, HASHTAG_VARIANTS};
use crate::error::{Error, Result};
use crate::forest::load_model;
use crate::ingest::{build_observations, classify_corpus, load_corpus, CorpusClassification};
use crate::likelihood::{classify_unknown, estimate_r_literal};
use crate::netgen::load_edge_list;

/// Corpus classification results: the forest counts, the likelihood-baseline
/// counts, and the decile grid.
pub struct Exp5Output {
    pub rf_counts: [usize; 3],
    pub llh_counts: [usize; 3],
    pub classification: CorpusClassification<f64>,
    pub n_observations: usize,
    pub unclassifiable: usize,
    pub r_hat: f64,
}

/// Applies a persisted forest (trained in experiment 4) to a corpus and
/// writes the counts table, decile grid and per-ego predictions.
pub fn run_exp5(
    cfg: &ExperimentConfig,
    model_path: &Path,
    corpus_paths: &[PathBuf],
    follow_path: &Path,
    out_dir: &Path,
    command: &str,
) -> Result<Exp5Output> {
    let started = std::time::Instant::now();
    ensure_dir(out_dir)?;
    if !model_path.exists() {
        return Err(Error::MissingArtifact(format!(
            "trained forest model {} (run experiment 4 first)",
            model_path.display()
        )));
    }
    for p in corpus_paths {
        if !p.exists() {
            return Err(Error::MissingArtifact(format!("corpus file {}", p.display())));
        }
    }
    if !follow_path.exists() {
        return Err(Error::MissingArtifact(format!(
            "follow graph {}",
            follow_path.display()
        )));
    }
    let model = load_model::<f64>(model_path)?;

    let loaded = load_edge_list(follow_path)?;
    let follow: BTreeMap<String, Vec<String>> = loaded
        .graph
        .node_ids()
        .map(|u| {
            (
                loaded.labels[u].clone(),
                loaded
                    .graph
                    .neighbors(u)
                    .iter()
                    .map(|&v| loaded.labels[v].clone())
                    .collect(),
            )
        })
        .collect();
    let variants: BTreeSet<String> = HASHTAG_VARIANTS.iter().map(|s| s.to_string()).collect();
    let corpus = load_corpus(corpus_paths, &variants, &follow)?;
    let (observations, unclassifiable) = build_observations(&corpus, cfg.window_days);
    if observations.is_empty() {
        return Err(Error::Config("corpus produced no classifiable egos".into()));
    }

    let classification = classify_corpus(&model, &observations)?;
    let rf_counts = classification.counts;

    // likelihood baseline with estimated parameters
    let r_hat: f64 = estimate_r_literal(observations.iter().map(|o| &o.obs));
    let mut llh_counts = [0usize; 3];
    for o in &observations {
        let res = classify_unknown(&o.obs, r_hat)?;
        llh_counts[res.predicted.index()] += 1;
    }

    // counts table shaped like the reference summary
    let counts_path = out_dir.join("counts_table.csv");
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(&counts_path).map_err(|e| Error::io(&counts_path, e))?,
    );
    writeln!(w, "method,Sm,Cx,St").map_err(|e| Error::io(&counts_path, e))?;
    writeln!(
        w,
        "random_forest,{},{},{}",
        rf_counts[0], rf_counts[1], rf_counts[2]
    )
    .map_err(|e| Error::io(&counts_path, e))?;
    writeln!(
        w,
        "likelihood,{},{},{}",
        llh_counts[0], llh_counts[1], llh_counts[2]
    )
    .map_err(|e| Error::io(&counts_path, e))?;
    drop(w);

    let grid_path = out_dir.join("decile_grid.csv");
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(&grid_path).map_err(|e| Error::io(&grid_path, e))?,
    );
    writeln!(w, "d_beta,d_phi,count,dominant,mean_certainty")
        .map_err(|e| Error::io(&grid_path, e))?;
    for i in 0..10 {
        for j in 0..10 {
            let g = &classification.grid;
            writeln!(
                w,
                "d{},d{},{},{},{}",
                i + 1,
                j + 1,
                g.counts[i][j],
                g.dominant[i][j].map(|m| m.label().to_string()).unwrap_or_default(),
                g.mean_certainty[i][j]
            )
            .map_err(|e| Error::io(&grid_path, e))?;
        }
    }
    drop(w);

    let pred_path = out_dir.join("predictions.csv");
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(&pred_path).map_err(|e| Error::io(&pred_path, e))?,
    );
    writeln!(w, "ego,predicted,certainty,beta_hat,phi_hat")
        .map_err(|e| Error::io(&pred_path, e))?;
    for r in &classification.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.label,
            r.predicted.label(),
            r.certainty,
            r.beta_hat.map(|b| b.to_string()).unwrap_or_default(),
            r.phi_hat
        )
        .map_err(|e| Error::io(&pred_path, e))?;
    }
    drop(w);

    let mut manifest = RunManifest::new(command, 5, cfg)?;
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.outputs = vec![
        "counts_table.csv".into(),
        "decile_grid.csv".into(),
        "predictions.csv".into(),
    ];
    manifest.write(out_dir)?;

    Ok(Exp5Output {
        rf_counts,
        llh_counts,
        classification,
        n_observations: observations.len(),
        unclassifiable,
        r_hat,
    })
}
