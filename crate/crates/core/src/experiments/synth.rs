use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::grid::{emit_heatmap, AccuracyGrid};
use super::{ensure_dir, ExperimentConfig, RunManifest};
use crate::contagion::{simulate_network, Mechanism, NodeAssignment};
use crate::error::{Error, Result};
use crate::features::{
    extract, observation_from_cascade, write_features_csv, write_observations_csv, EgoObservation,
    FeatureRow, FeatureVector, FEATURE_NAMES,
};
use crate::forest::{
    evaluate, feature_importance, train, ConfusionMatrix, Dataset, ForestConfig, ForestModel,
};
use crate::likelihood::{classify_known, classify_unknown, estimate_params, KnownParams};
use crate::netgen::{generate, largest_connected_component, ModelSpec};
use crate::seeds;

/// One grid cell of the synthetic experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub beta: f64,
    pub phi: f64,
}

struct PoolInstance {
    obs: EgoObservation,
    features: FeatureVector<f64>,
    row_id: u64,
}

/// Everything one (cell, realisation) pair generates.
struct CellPool {
    by_class: [Vec<PoolInstance>; 3],
    r_hat_literal: f64,
    r_hat_alt: f64,
    cascades_run: usize,
}

fn build_cell_pool(cfg: &ExperimentConfig, cell_idx: usize, key: CellKey, real: usize) -> Result<CellPool> {
    let net_seed = seeds::child_seed(cfg.master_seed, &[2, cell_idx as u64, real as u64, 0]);
    let raw = generate(&cfg.network, net_seed)?;
    let g = Arc::new(largest_connected_component(&raw).graph);
    let n = g.n_nodes();
    let quota = cfg.train_per_class + cfg.test_per_class;

    let mut by_class: [Vec<PoolInstance>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut exposure_sum = 0.0f64;
    let mut exposure_n = 0usize;
    let mut st_fired = 0usize;
    let mut susceptible_steps = 0usize;
    let mut cascades_run = 0usize;

    let template: Vec<Option<NodeAssignment<f64>>> = (0..n)
        .map(|i| {
            Some(if i < n / 2 {
                NodeAssignment::Simple { beta: key.beta }
            } else {
                NodeAssignment::Complex { phi: key.phi }
            })
        })
        .collect();

    for cascade in 0..cfg.max_cascades_per_cell {
        if by_class.iter().all(|c| c.len() >= quota) {
            break;
        }
        let base = [2u64, cell_idx as u64, real as u64, cascade as u64];
        let mut assignments = template.clone();
        let mut rng = seeds::rng_for(cfg.master_seed, &[&base[..], &[1]].concat());
        assignments.shuffle(&mut rng);
        let rec = simulate_network(
            Arc::clone(&g),
            Arc::new(assignments),
            cfg.r,
            cfg.stop_fraction(),
            200_000,
            seeds::child_seed(cfg.master_seed, &[&base[..], &[2]].concat()),
        )?;
        cascades_run += 1;
        st_fired += rec.count_fired(Mechanism::St);
        susceptible_steps += rec.susceptible_node_steps();
        for node in 0..n {
            let Some(fired) = rec.fired[node] else { continue };
            let Some(obs) = observation_from_cascade(&rec, node) else {
                continue;
            };
            if obs.adoption_time > 0 {
                exposure_sum += obs.exposure_steps() as f64 / obs.adoption_time as f64;
                exposure_n += 1;
            }
            let class = fired.index();
            if by_class[class].len() < quota {
                let features = extract::<f64>(&obs)?;
                by_class[class].push(PoolInstance {
                    obs,
                    features,
                    row_id: seeds::child_seed(
                        cfg.master_seed,
                        &[2, cell_idx as u64, real as u64, cascade as u64, 9, node as u64],
                    ),
                });
            }
        }
    }

    Ok(CellPool {
        by_class,
        r_hat_literal: if exposure_n > 0 {
            exposure_sum / exposure_n as f64
        } else {
            0.0
        },
        r_hat_alt: if susceptible_steps > 0 {
            st_fired as f64 / susceptible_steps as f64
        } else {
            0.0
        },
        cascades_run,
    })
}

/// Balanced per-class train/test index split; shrinks proportionally when a
/// class pool is short of the quota.
fn split_pool(
    pool: &CellPool,
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> Result<([Vec<usize>; 3], [Vec<usize>; 3])> {
    let avail = pool.by_class.iter().map(Vec::len).min().unwrap_or(0);
    if avail < 2 {
        return Err(Error::Config(format!(
            "a class pool has only {avail} instances; cannot balance (counts {:?})",
            pool.by_class.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    let quota = train_per_class + test_per_class;
    let (train_n, test_n) = if avail >= quota {
        (train_per_class, test_per_class)
    } else {
        let mut t = ((train_per_class * avail) as f64 / quota as f64).round() as usize;
        t = t.clamp(1, avail - 1);
        (t, avail - t)
    };
    let mut train: [Vec<usize>; 3] = Default::default();
    let mut test: [Vec<usize>; 3] = Default::default();
    for class in 0..3 {
        let mut idx: Vec<usize> = (0..pool.by_class[class].len()).collect();
        let mut rng = seeds::rng_for(seed, &[3, class as u64]);
        idx.shuffle(&mut rng);
        let t = train_n.min(idx.len());
        let e = test_n.min(idx.len().saturating_sub(t));
        train[class] = idx[..t].to_vec();
        test[class] = idx[t..t + e].to_vec();
    }
    Ok((train, test))
}

impl ExperimentConfig {
    fn stop_fraction(&self) -> f64 {
        match self.network {
            // empirical substrates stop at 90% like the reference runs
            ModelSpec::EdgeList { .. } => 0.9,
            _ => 1.0,
        }
    }
}

/// Which background-rate estimator feeds the unknown-parameter classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum REstimator {
    /// Mean fraction of susceptible time spent with an infected neighbour.
    Literal,
    /// Spontaneous firings over susceptible node-steps.
    Frequency,
}

/// Per-method grid means of one synthetic run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MethodMeans {
    pub llh_known: f64,
    pub forest_cell: f64,
    pub llh_est: f64,
    pub forest_global: f64,
}

/// Output of the combined experiment-2/3 run.
pub struct SynthOutput {
    pub llh_known_grid: AccuracyGrid,
    pub forest_cell_grid: AccuracyGrid,
    pub llh_est_grid: AccuracyGrid,
    pub forest_global_grid: AccuracyGrid,
    /// Summed confusion matrices for the highlighted cells, keyed by
    /// (method, beta, phi).
    pub confusions: Vec<(String, f64, f64, ConfusionMatrix)>,
    /// Mean per-cell feature importances of the per-cell forests.
    pub importance_cells: Vec<(CellKey, [f64; 8])>,
    /// Mean per-cell importances of the global (unknown-parameter) forest,
    /// evaluated per cell on its test split.
    pub r_hat_literal: f64,
    pub r_hat_alt: f64,
    /// The last realisation's global forest (the experiment-3 model).
    pub exp3_model: ForestModel<f64>,
    /// A capped sample of labelled test observations for the CLI artifacts.
    pub sample_observations: Vec<(EgoObservation, Mechanism)>,
    /// Balanced pooled dataset (across cells) for subset searches.
    pub pooled_balanced: Dataset<f64>,
    pub cascades_total: usize,
}

pub fn run_synthetic(cfg: &ExperimentConfig) -> Result<SynthOutput> {
    let values = &cfg.grid_values;
    let cells: Vec<CellKey> = values
        .iter()
        .flat_map(|&beta| values.iter().map(move |&phi| CellKey { beta, phi }))
        .collect();
    let n_vals = values.len();
    let cell_of = |i: usize, j: usize| i * n_vals + j;

    // pools for every (cell, realisation)
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.realisations).map(move |r| (c, r)))
        .collect();
    let pools: Vec<CellPool> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let t0 = std::time::Instant::now();
            let pool = build_cell_pool(cfg, c, cells[c], r);
            if cfg.progress {
                eprintln!(
                    "exp2/3: cell beta={} phi={} realisation {r} built in {:.2?} ({} cascades)",
                    cells[c].beta,
                    cells[c].phi,
                    t0.elapsed(),
                    pool.as_ref().map(|p| p.cascades_run).unwrap_or(0)
                );
            }
            pool
        })
        .collect::<Result<Vec<_>>>()?;
    let pool_at = |c: usize, r: usize| &pools[c * cfg.realisations + r];

    let highlighted: Vec<(f64, f64)> = vec![
        (values[n_vals - 1], values[0]),
        (values[0], values[n_vals - 1]),
    ];

    let mut llh_known = vec![vec![Vec::new(); n_vals]; n_vals];
    let mut forest_cell = vec![vec![Vec::new(); n_vals]; n_vals];
    let mut llh_est = vec![vec![Vec::new(); n_vals]; n_vals];
    let mut forest_global = vec![vec![Vec::new(); n_vals]; n_vals];
    let mut confusions: std::collections::BTreeMap<(String, usize), ConfusionMatrix> =
        std::collections::BTreeMap::new();
    let mut importance_acc = vec![[0.0f64; 8]; cells.len()];
    let mut exp3_model: Option<ForestModel<f64>> = None;

    for real in 0..cfg.realisations {
        // split every cell for this realisation
        let splits: Vec<([Vec<usize>; 3], [Vec<usize>; 3])> = (0..cells.len())
            .map(|c| {
                split_pool(
                    pool_at(c, real),
                    cfg.train_per_class,
                    cfg.test_per_class,
                    seeds::child_seed(cfg.master_seed, &[4, c as u64, real as u64]),
                )
            })
            .collect::<Result<Vec<_>>>()?;

        // per-cell work: known-params likelihood, estimated likelihood and
        // the per-cell forest
        let cell_results: Vec<(f64, f64, ConfusionMatrix, ConfusionMatrix, ConfusionMatrix, [f64; 8])> =
            (0..cells.len())
                .into_par_iter()
                .map(|c| {
                    let pool = pool_at(c, real);
                    let (train_idx, test_idx) = &splits[c];
                    let key = cells[c];
                    let params = KnownParams {
                        beta: key.beta,
                        phi: key.phi,
                        r: Some(cfg.r),
                    };
                    let r_hat = match cfg.r_estimator {
                        REstimator::Literal => pool.r_hat_literal,
                        REstimator::Frequency => pool.r_hat_alt,
                    };
                    let mut cm_known = ConfusionMatrix { counts: [[0; 3]; 3] };
                    let mut cm_est = ConfusionMatrix { counts: [[0; 3]; 3] };
                    for class in 0..3 {
                        for &i in &test_idx[class] {
                            let inst = &pool.by_class[class][i];
                            let known = classify_known(&inst.obs, &params, 3)
                                .expect("validated parameters");
                            cm_known.counts[class][known.predicted.index()] += 1;
                            let est = classify_unknown(&inst.obs, r_hat)
                                .expect("validated estimates");
                            cm_est.counts[class][est.predicted.index()] += 1;
                        }
                    }

                    // per-cell forest on the balanced train split
                    let mut train_data = Dataset::of_ego_features();
                    for class in 0..3 {
                        for &i in &train_idx[class] {
                            let inst = &pool.by_class[class][i];
                            train_data.push(&inst.features, Mechanism::ALL[class], inst.row_id);
                        }
                    }
                    let mut test_data = Dataset::of_ego_features();
                    for class in 0..3 {
                        for &i in &test_idx[class] {
                            let inst = &pool.by_class[class][i];
                            test_data.push(&inst.features, Mechanism::ALL[class], inst.row_id);
                        }
                    }
                    let forest_cfg = ForestConfig {
                        n_trees: cfg.forest_trees,
                        criterion: None,
                        features_per_split: None,
                        feature_subset: None,
                        seed: seeds::child_seed(cfg.master_seed, &[5, c as u64, real as u64]),
                    };
                    let model = train(&train_data, &forest_cfg).expect("non-empty training data");
                    let (cm_forest, _) = evaluate(&model, &test_data).expect("disjoint test rows");
                    let imp = feature_importance(&model);
                    let mut imp_arr = [0.0f64; 8];
                    for (name, v) in imp {
                        let k = FEATURE_NAMES.iter().position(|&n| n == name).unwrap();
                        imp_arr[k] = v;
                    }
                    (key.beta, key.phi, cm_known, cm_est, cm_forest, imp_arr)
                })
                .collect();

        // global forest for the unknown-parameter experiment: balanced train
        // rows drawn evenly across cells, evaluated on each cell's test rows
        let mut global_train = Dataset::of_ego_features();
        let per_cell_class = cfg.train_per_class.div_ceil(cells.len()).max(1);
        for (c, (train_idx, _)) in splits.iter().enumerate() {
            let pool = pool_at(c, real);
            for class in 0..3 {
                for &i in train_idx[class].iter().take(per_cell_class) {
                    let inst = &pool.by_class[class][i];
                    global_train.push(&inst.features, Mechanism::ALL[class], inst.row_id);
                }
            }
        }
        let global_cfg = ForestConfig {
            n_trees: cfg.forest_trees,
            criterion: None,
            features_per_split: None,
            feature_subset: None,
            seed: seeds::child_seed(cfg.master_seed, &[6, real as u64]),
        };
        let global_model = train(&global_train, &global_cfg)?;

        let global_results: Vec<(usize, ConfusionMatrix)> = (0..cells.len())
            .into_par_iter()
            .map(|c| {
                let pool = pool_at(c, real);
                let (_, test_idx) = &splits[c];
                let mut test_data = Dataset::of_ego_features();
                for class in 0..3 {
                    for &i in &test_idx[class] {
                        let inst = &pool.by_class[class][i];
                        test_data.push(&inst.features, Mechanism::ALL[class], inst.row_id);
                    }
                }
                let (cm, _) = evaluate(&global_model, &test_data).expect("disjoint test rows");
                (c, cm)
            })
            .collect();

        for (c, (beta, phi, cm_known, cm_est, cm_forest, imp)) in
            cell_results.into_iter().enumerate()
        {
            let (i, j) = (c / n_vals, c % n_vals);
            debug_assert_eq!(cell_of(i, j), c);
            llh_known[i][j].push(cm_known.accuracy());
            llh_est[i][j].push(cm_est.accuracy());
            forest_cell[i][j].push(cm_forest.accuracy());
            for k in 0..8 {
                importance_acc[c][k] += imp[k];
            }
            if let Some(h) = highlighted.iter().position(|&(b, p)| b == beta && p == phi) {
                for (m, cm) in [("llh_known", cm_known), ("llh_est", cm_est), ("forest_cell", cm_forest)] {
                    let entry = confusions
                        .entry((m.to_string(), h))
                        .or_insert(ConfusionMatrix { counts: [[0; 3]; 3] });
                    for a in 0..3 {
                        for b in 0..3 {
                            entry.counts[a][b] += cm.counts[a][b];
                        }
                    }
                }
            }
        }
        for (c, cm) in global_results {
            let (i, j) = (c / n_vals, c % n_vals);
            forest_global[i][j].push(cm.accuracy());
            let key = cells[c];
            if let Some(h) = highlighted
                .iter()
                .position(|&(b, p)| b == key.beta && p == key.phi)
            {
                let entry = confusions
                    .entry(("forest_global".to_string(), h))
                    .or_insert(ConfusionMatrix { counts: [[0; 3]; 3] });
                for a in 0..3 {
                    for b in 0..3 {
                        entry.counts[a][b] += cm.counts[a][b];
                    }
                }
            }
        }
        exp3_model = Some(global_model);
    }

    // artifacts shared with downstream stages
    let sample_observations: Vec<(EgoObservation, Mechanism)> = {
        let mut rows = Vec::new();
        'outer: for class in 0..3 {
            let mut taken = 0usize;
            for c in 0..cells.len() {
                let pool = pool_at(c, 0);
                for inst in pool.by_class[class].iter().take(4) {
                    rows.push((inst.obs.clone(), Mechanism::ALL[class]));
                    taken += 1;
                    if taken >= 60 {
                        continue 'outer;
                    }
                }
            }
        }
        rows
    };
    let pooled_balanced = {
        let mut data = Dataset::of_ego_features();
        let per_cell = 3_000usize.div_ceil(cells.len());
        for c in 0..cells.len() {
            let pool = pool_at(c, 0);
            for class in 0..3 {
                for inst in pool.by_class[class].iter().take(per_cell) {
                    data.push(&inst.features, Mechanism::ALL[class], inst.row_id);
                }
            }
        }
        data
    };

    let labels = AccuracyGrid::constant_labels(values);
    let to_grid = |samples: &Vec<Vec<Vec<f64>>>| {
        AccuracyGrid::from_samples("beta", "phi", labels.clone(), labels.clone(), samples)
    };
    let mut importance_cells = Vec::with_capacity(cells.len());
    for (c, key) in cells.iter().enumerate() {
        let mut imp = importance_acc[c];
        for v in &mut imp {
            *v /= cfg.realisations as f64;
        }
        importance_cells.push((*key, imp));
    }
    let r_lit = (0..cells.len())
        .flat_map(|c| (0..cfg.realisations).map(move |r| pool_at(c, r).r_hat_literal))
        .sum::<f64>()
        / (cells.len() * cfg.realisations) as f64;
    let r_alt = (0..cells.len())
        .flat_map(|c| (0..cfg.realisations).map(move |r| pool_at(c, r).r_hat_alt))
        .sum::<f64>()
        / (cells.len() * cfg.realisations) as f64;
    let confusions = confusions
        .into_iter()
        .map(|((m, h), cm)| (m, highlighted[h].0, highlighted[h].1, cm))
        .collect();

    Ok(SynthOutput {
        llh_known_grid: to_grid(&llh_known),
        forest_cell_grid: to_grid(&forest_cell),
        llh_est_grid: to_grid(&llh_est),
        forest_global_grid: to_grid(&forest_global),
        confusions,
        importance_cells,
        r_hat_literal: r_lit,
        r_hat_alt: r_alt,
        exp3_model: exp3_model.expect("at least one realisation"),
        sample_observations,
        pooled_balanced,
        cascades_total: pools.iter().map(|p| p.cascades_run).sum(),
    })
}

fn write_confusion(cm: &ConfusionMatrix, path: &Path) -> Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "true\\pred,Sm,Cx,St").map_err(|e| Error::io(path, e))?;
    for (i, m) in Mechanism::ALL.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            m.label(),
            cm.counts[i][0],
            cm.counts[i][1],
            cm.counts[i][2]
        )
        .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn write_importance(cells: &[(CellKey, [f64; 8])], path: &Path) -> Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "beta,phi,{}", FEATURE_NAMES.join(",")).map_err(|e| Error::io(path, e))?;
    for (key, imp) in cells {
        let row: Vec<String> = imp.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{},{}", key.beta, key.phi, row.join(","))
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Runs experiments 2 and 3 and writes the artifacts for the requested id.
pub fn write_synthetic(
    cfg: &ExperimentConfig,
    experiment: u8,
    out_dir: &Path,
    command: &str,
) -> Result<SynthOutput> {
    let started = std::time::Instant::now();
    ensure_dir(out_dir)?;
    let out = run_synthetic(cfg)?;
    let mut outputs = Vec::new();
    let emit = |grid: &AccuracyGrid, name: &str, outputs: &mut Vec<String>| -> Result<()> {
        emit_heatmap(grid, out_dir.join(name))?;
        outputs.push(name.to_string());
        Ok(())
    };
    if experiment == 2 {
        emit(&out.llh_known_grid, "accuracy_grid.csv", &mut outputs)?;
        emit(&out.forest_cell_grid, "accuracy_grid_forest.csv", &mut outputs)?;
        super::emit_heatmap_svg(&out.llh_known_grid, out_dir.join("accuracy_grid.svg"))?;
        outputs.push("accuracy_grid.svg".into());
    } else {
        emit(&out.llh_est_grid, "accuracy_grid.csv", &mut outputs)?;
        emit(&out.forest_global_grid, "accuracy_grid_forest.csv", &mut outputs)?;
        crate::forest::save_model(&out.exp3_model, out_dir.join("forest.json"))?;
        outputs.push("forest.json".into());
    }
    for (method, beta, phi, cm) in &out.confusions {
        let name = format!("confusion_{method}_b{beta}_p{phi}.csv");
        write_confusion(cm, &out_dir.join(&name))?;
        outputs.push(name);
    }
    write_importance(&out.importance_cells, &out_dir.join("importance.csv"))?;
    outputs.push("importance.csv".into());

    let obs_rows: Vec<(EgoObservation, Option<Mechanism>)> = out
        .sample_observations
        .iter()
        .map(|(o, m)| (o.clone(), Some(*m)))
        .collect();
    let f = std::fs::File::create(out_dir.join("observations_test.csv"))
        .map_err(|e| Error::io(out_dir.join("observations_test.csv"), e))?;
    write_observations_csv(&obs_rows, f)?;
    outputs.push("observations_test.csv".into());
    let feature_rows: Vec<FeatureRow<f64>> = out
        .sample_observations
        .iter()
        .map(|(o, m)| {
            let (beta_hat, phi_hat) = estimate_params::<f64>(o);
            FeatureRow {
                features: extract(o).expect("observed degree >= 1"),
                label: Some(*m),
                beta_hat,
                phi_hat: Some(phi_hat),
            }
        })
        .collect();
    let f = std::fs::File::create(out_dir.join("features_test.csv"))
        .map_err(|e| Error::io(out_dir.join("features_test.csv"), e))?;
    write_features_csv(&feature_rows, f)?;
    outputs.push("features_test.csv".into());

    let mut manifest = RunManifest::new(command, experiment, cfg)?;
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.outputs = outputs;
    manifest.write(out_dir)?;
    Ok(out)
}

/// Per-network method means over repeated experiment-2/3 runs.
#[derive(Debug, Clone)]
pub struct NetworkComparison {
    pub rows: Vec<(String, MethodMeans)>,
}

impl NetworkComparison {
    /// Largest pairwise difference per method across networks.
    pub fn max_pairwise_diff(&self) -> f64 {
        let mut worst = 0.0f64;
        let extract: [fn(&MethodMeans) -> f64; 4] = [
            |m| m.llh_known,
            |m| m.forest_cell,
            |m| m.llh_est,
            |m| m.forest_global,
        ];
        for get in extract {
            for (_, a) in &self.rows {
                for (_, b) in &self.rows {
                    worst = worst.max((get(a) - get(b)).abs());
                }
            }
        }
        worst
    }
}

/// Repeats the synthetic experiments per network model and reports method
/// means. The caller supplies a (usually reduced) configuration; each spec
/// replaces the substrate while everything else stays fixed.
pub fn compare_networks(
    cfg: &ExperimentConfig,
    specs: &[(String, ModelSpec)],
) -> Result<NetworkComparison> {
    let mut rows = Vec::new();
    for (name, spec) in specs {
        let mut sub = cfg.clone();
        sub.network = spec.clone();
        if cfg.progress {
            eprintln!("compare-networks: {name}");
        }
        let out = run_synthetic(&sub)?;
        rows.push((
            name.clone(),
            MethodMeans {
                llh_known: out.llh_known_grid.grand_mean(),
                forest_cell: out.forest_cell_grid.grand_mean(),
                llh_est: out.llh_est_grid.grand_mean(),
                forest_global: out.forest_global_grid.grand_mean(),
            },
        ));
    }
    Ok(NetworkComparison { rows })
}

/// Matched-degree substrates for the robustness comparison.
pub fn default_comparison_specs() -> Vec<(String, ModelSpec)> {
    vec![
        ("er".into(), ModelSpec::Er { n: 1000, p: 0.004 }),
        ("ba".into(), ModelSpec::Ba { n: 1000, m_attach: 2 }),
        (
            "ws".into(),
            ModelSpec::Ws {
                n: 1000,
                k_ring: 4,
                rewire_p: 0.1,
            },
        ),
        (
            "sbm".into(),
            ModelSpec::Sbm {
                block_sizes: vec![250, 250, 250, 250],
                p: {
                    let p_in = 3.0 / 249.0;
                    let p_out = 1.0 / 750.0;
                    (0..4)
                        .map(|i| {
                            (0..4)
                                .map(|j| if i == j { p_in } else { p_out })
                                .collect()
                        })
                        .collect()
                },
            },
        ),
    ]
}
