//! Small-scale end-to-end run of the pipeline, printing headline numbers.
//! Run with `cargo run --release -p contagion-lens --example pipeline_demo`.

use contagion_lens::experiments::{self, ExperimentConfig};

fn main() -> contagion_lens::Result<()> {
    let scale: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.1);
    let mut cfg = ExperimentConfig::desk(42);
    cfg.exp1_egos_per_value = ((10_000.0 * scale) as usize).max(500);
    cfg.realisations = 2;
    cfg.train_per_class = ((6_000.0 * scale) as usize).max(300);
    cfg.test_per_class = ((2_000.0 * scale) as usize).max(100);
    cfg.exp4.train_per_class = ((2_000.0 * scale * 5.0) as usize).max(300);
    cfg.exp4.test_per_class = ((700.0 * scale * 5.0) as usize).max(100);
    cfg.exp4.sweep_train_per_class = cfg.exp4.train_per_class / 2;
    cfg.exp4.sweep_test_per_class = cfg.exp4.test_per_class / 2;
    cfg.progress = std::env::var("DEMO_PROGRESS").is_ok();

    let t0 = std::time::Instant::now();
    let exp1 = experiments::run_exp1(&cfg)?;
    println!(
        "exp1: sim mean {:.4}, theory mean {:.4}, max |diff| {:.4}, corner(0.9,0.1)={:.4}, corner(0.1,0.9)={:.4}, cx missed {}/{} [{:.1?}]",
        exp1.sim_grid.grand_mean(),
        exp1.theory_grid.grand_mean(),
        exp1.max_abs_diff,
        exp1.sim_grid.cell("0.9", "0.1").unwrap(),
        exp1.sim_grid.cell("0.1", "0.9").unwrap(),
        exp1.cx_misclassified,
        exp1.cx_total,
        t0.elapsed()
    );

    let t0 = std::time::Instant::now();
    let synth = experiments::run_synthetic(&cfg)?;
    println!(
        "exp2: llh mean {:.4} (min cell {:.4}), forest mean {:.4} (min cell {:.4}) [{:.1?}] cascades {}",
        synth.llh_known_grid.grand_mean(),
        synth.llh_known_grid.min_cell(),
        synth.forest_cell_grid.grand_mean(),
        synth.forest_cell_grid.min_cell(),
        t0.elapsed(),
        synth.cascades_total,
    );
    println!(
        "exp3: llh mean {:.4}, forest mean {:.4}, r_hat lit {:.4} alt {:.5}",
        synth.llh_est_grid.grand_mean(),
        synth.forest_global_grid.grand_mean(),
        synth.r_hat_literal,
        synth.r_hat_alt,
    );
    let beta01_llh = synth.llh_est_grid.row_mean(0);
    let beta01_forest = synth.forest_global_grid.row_mean(0);
    println!("exp3 beta=0.1 column: llh {beta01_llh:.4} vs forest {beta01_forest:.4}");
    // top-3 importance frequencies on exp2 cells
    let mut f7_hits = 0;
    let mut f8_hits = 0;
    let mut deg_hits = 0;
    for (_, imp) in &synth.importance_cells {
        let mut ranked: Vec<usize> = (0..8).collect();
        ranked.sort_by(|&a, &b| imp[b].partial_cmp(&imp[a]).unwrap());
        if ranked[..3].contains(&6) {
            f7_hits += 1;
        }
        if ranked[..3].contains(&7) {
            f8_hits += 1;
        }
        if ranked[..3].contains(&0) {
            deg_hits += 1;
        }
    }
    let cells = synth.importance_cells.len() as f64;
    println!(
        "exp2 importance top3 freq: f7 {:.2}, f8 {:.2}, degree {:.2}",
        f7_hits as f64 / cells,
        f8_hits as f64 / cells,
        deg_hits as f64 / cells
    );
    if std::env::var("DEMO_IMPORTANCE").is_ok() {
        for (key, imp) in &synth.importance_cells {
            let mut ranked: Vec<usize> = (0..8).collect();
            ranked.sort_by(|&a, &b| imp[b].partial_cmp(&imp[a]).unwrap());
            let names: Vec<String> = ranked
                .iter()
                .take(4)
                .map(|&f| format!("{}={:.3}", contagion_lens::features::FEATURE_NAMES[f], imp[f]))
                .collect();
            println!("  cell ({:.1},{:.1}): {}", key.beta, key.phi, names.join(" "));
        }
    }

    let t0 = std::time::Instant::now();
    let dir = std::env::temp_dir().join(format!("contagion-lens-demo-{}", std::process::id()));
    let exp4 = experiments::run_exp4(&cfg, &dir)?;
    println!(
        "exp4: grid mean {:.4}, waiting CV {:.3}, degree top3 {:.2} (f7 {:.2}, f8 {:.2}), instances {:?} [{:.1?}]",
        exp4.mean_accuracy,
        exp4.waiting_cv,
        exp4.degree_top3_freq,
        exp4.f7_top3_freq,
        exp4.f8_top3_freq,
        exp4.instances_collected,
        t0.elapsed()
    );
    println!("  exp4 importance cells evaluated: {}", exp4.importance_cells.len());
    for p in &exp4.sweep {
        println!(
            "  sweep q={}: sm {:.3} cx {:.3} st {:.3} acc {:.3}",
            p.quantile, p.sm_recall, p.cx_recall, p.st_recall, p.accuracy
        );
    }
    println!("  sweep spearman(q, mean sm/cx recall) = {:.3}", exp4.sweep_spearman);

    let t0 = std::time::Instant::now();
    let exp5 = experiments::run_exp5(
        &cfg,
        &dir.join("forest.json"),
        &[exp4.corpus_path.clone()],
        &exp4.follow_path,
        &dir.join("exp5"),
        "pipeline_demo",
    )?;
    println!(
        "exp5: rf counts {:?}, llh counts {:?}, obs {} (unclassifiable {}) r_hat {:.4} [{:.1?}]",
        exp5.rf_counts,
        exp5.llh_counts,
        exp5.n_observations,
        exp5.unclassifiable,
        exp5.r_hat,
        t0.elapsed()
    );
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
