use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{emit_heatmap, AccuracyGrid};
use super::{ensure_dir, spearman, ExperimentConfig, RunManifest, HASHTAG_VARIANTS};
use crate::contagion::{Mechanism, NodeAssignment};
use crate::error::{Error, Result};
use crate::features::{extract, FeatureVector, FEATURE_NAMES};
use crate::forest::{
    feature_importance, train, ConfusionMatrix, Dataset, ForestConfig, ForestModel,
};
use crate::ingest::{
    build_observations, fit_param_model, follow_graph_of, load_corpus, write_fixture_corpus,
    EmpiricalParamModel,
};
use crate::netgen::{
    degree_biased_subsample, generate, largest_connected_component, save_edge_list, GraphHeader,
    Graph, ModelSpec,
};
use crate::scalar::Real;
use crate::seeds;
use crate::tempnet::{
    action_steps, assign_activities, degree_class, observation_of, simulate_activity_driven,
    waiting_times, TemporalCascadeRecord,
};

/// Parameters of the calibration cascade that seeds the empirical fit. The
/// fixture corpus generated from it is what the parameter model is fitted
/// against, mirroring the data-derived parameterisation of the platform
/// experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedParams {
    /// Log-mean of the simple parameter at degree class 0.
    pub beta_mu0: f64,
    /// Per-class decrease of the log-mean (higher degree, smaller beta).
    pub beta_mu_slope: f64,
    pub beta_sigma: f64,
    /// Threshold draw: phi = phi_floor + phi_scale * u^2.
    pub phi_floor: f64,
    pub phi_scale: f64,
    /// Activity mean at degree class 0 and its per-class multiplier.
    pub activity_base: f64,
    pub activity_ratio: f64,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams {
            beta_mu0: -1.2,
            beta_mu_slope: 0.35,
            beta_sigma: 0.7,
            phi_floor: 0.05,
            phi_scale: 0.5,
            activity_base: 0.08,
            activity_ratio: 1.7,
        }
    }
}

/// Configuration of the activity-driven experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Exp4Config {
    pub base_network: ModelSpec,
    /// Degree-biased subsample size used as the substrate.
    pub subsample_n: usize,
    pub r: f64,
    pub stop_fraction: f64,
    pub activity_spread: f64,
    pub filter_quantile: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub max_cascades: usize,
    /// Split/training realisations for the accuracy grid.
    pub realisations: usize,
    /// Filter quantiles of the robustness sweep.
    pub sweep: Vec<f64>,
    pub sweep_train_per_class: usize,
    pub sweep_test_per_class: usize,
    pub forest_trees: usize,
    pub seed_params: SeedParams,
    /// Fixture timestamp base (epoch seconds) and seconds per event step.
    pub epoch: i64,
    pub step_secs: i64,
}

impl Exp4Config {
    pub fn desk() -> Self {
        Exp4Config {
            base_network: ModelSpec::Ba {
                n: 20_000,
                m_attach: 2,
            },
            subsample_n: 6_000,
            r: 0.005,
            stop_fraction: 0.9,
            activity_spread: 0.05,
            filter_quantile: 0.8,
            train_per_class: 2_000,
            test_per_class: 700,
            max_cascades: 30,
            realisations: 2,
            sweep: vec![0.4, 0.6, 0.8, 1.0],
            sweep_train_per_class: 1_200,
            sweep_test_per_class: 400,
            forest_trees: 100,
            seed_params: SeedParams::default(),
            epoch: 1_525_132_800, // 2018-05-01
            step_secs: 60,
        }
    }
}

/// One setting of the filter-quantile sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub quantile: f64,
    pub sm_recall: f64,
    pub cx_recall: f64,
    pub st_recall: f64,
    pub accuracy: f64,
}

/// Results of the activity-driven experiment.
pub struct Exp4Output {
    pub grid: AccuracyGrid,
    pub mean_accuracy: f64,
    pub waiting_cv: f64,
    /// value -> count histogram of pooled waiting times.
    pub waiting_histogram: Vec<(u32, usize)>,
    pub sweep: Vec<SweepPoint>,
    /// Spearman correlation between the filter quantile and the mean
    /// simple/complex recall.
    pub sweep_spearman: f64,
    /// Mean importances of the per-quintile-cell forests.
    pub importance_cells: Vec<(usize, usize, [f64; 8])>,
    pub degree_top3_freq: f64,
    pub f7_top3_freq: f64,
    pub f8_top3_freq: f64,
    pub model: ForestModel<f64>,
    pub param_model: EmpiricalParamModel<f64>,
    pub corpus_path: PathBuf,
    pub follow_path: PathBuf,
    /// Ground-truth firing mechanisms of the calibration cascade behind the
    /// fixture corpus, by node id.
    pub calibration_fired: Vec<Option<Mechanism>>,
    pub instances_collected: [usize; 3],
}

struct Exp4Instance {
    features: FeatureVector<f64>,
    label: Mechanism,
    row_id: u64,
    beta_sampled: f64,
    phi_sampled: f64,
    /// Rank-based quintiles of the sampled parameters over the pooled
    /// instance population (value quantiles collapse on atomic supports).
    q_beta: usize,
    q_phi: usize,
}

fn assign_rank_quintiles(by_class: &mut [Vec<Exp4Instance>; 3]) {
    for phi_axis in [false, true] {
        let mut items: Vec<(f64, usize, usize)> = Vec::new();
        for (c, pool) in by_class.iter().enumerate() {
            for (i, inst) in pool.iter().enumerate() {
                let v = if phi_axis { inst.phi_sampled } else { inst.beta_sampled };
                items.push((v, c, i));
            }
        }
        items.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let n = items.len();
        for (pos, &(_, c, i)) in items.iter().enumerate() {
            let q = (pos * 5 / n).min(4);
            if phi_axis {
                by_class[c][i].q_phi = q;
            } else {
                by_class[c][i].q_beta = q;
            }
        }
    }
}

fn substrate(cfg: &ExperimentConfig) -> Result<Arc<Graph>> {
    let base = generate(
        &cfg.exp4.base_network,
        seeds::child_seed(cfg.master_seed, &[40]),
    )?;
    let lcc = largest_connected_component(&base);
    let sub = degree_biased_subsample(
        &lcc.graph,
        cfg.exp4.subsample_n.min(lcc.graph.n_nodes()),
        seeds::child_seed(cfg.master_seed, &[41]),
    )?;
    Ok(Arc::new(sub.graph))
}

fn calibration_cascade(
    cfg: &ExperimentConfig,
    g: &Arc<Graph>,
) -> Result<TemporalCascadeRecord<f64>> {
    let sp = &cfg.exp4.seed_params;
    let n = g.n_nodes();
    let max_class = (0..n).map(|u| degree_class(g.degree(u))).max().unwrap_or(0);
    let means: Vec<f64> = (0..=max_class)
        .map(|c| (sp.activity_base * sp.activity_ratio.powi(c as i32)).min(1.0))
        .collect();
    let activities = assign_activities(
        g,
        &means,
        cfg.exp4.activity_spread,
        seeds::child_seed(cfg.master_seed, &[42]),
    )?;
    let mut rng = seeds::rng_for(cfg.master_seed, &[43]);
    let assignments: Vec<Option<NodeAssignment<f64>>> = (0..n)
        .map(|u| {
            let class = degree_class(g.degree(u)) as f64;
            Some(if rng.gen::<bool>() {
                let mu = sp.beta_mu0 - sp.beta_mu_slope * class;
                let beta = (mu + sp.beta_sigma * <f64 as Real>::std_normal(&mut rng))
                    .exp()
                    .clamp(1e-4, 1.0);
                NodeAssignment::Simple { beta }
            } else {
                let u: f64 = rng.gen();
                NodeAssignment::Complex {
                    phi: (sp.phi_floor + sp.phi_scale * u * u).min(1.0),
                }
            })
        })
        .collect();
    simulate_activity_driven(
        Arc::clone(g),
        Arc::new(activities.activities),
        Arc::new(assignments),
        cfg.exp4.r,
        cfg.exp4.stop_fraction,
        Some(60 * n),
        seeds::child_seed(cfg.master_seed, &[44]),
    )
}

/// Runs parameterised cascades until the per-class quotas are met, pooling
/// instances and waiting times.
fn collect_instances(
    cfg: &ExperimentConfig,
    g: &Arc<Graph>,
    model: &EmpiricalParamModel<f64>,
    quota_per_class: usize,
    tag: u64,
    pooled_waits: Option<&mut Vec<u32>>,
) -> Result<[Vec<Exp4Instance>; 3]> {
    let n = g.n_nodes();
    let max_class = (0..n).map(|u| degree_class(g.degree(u))).max().unwrap_or(0);
    let means = model.normalized_activity_means(max_class);
    let mut by_class: [Vec<Exp4Instance>; 3] = Default::default();
    let mut waits_acc = pooled_waits;

    for cascade in 0..cfg.exp4.max_cascades {
        if by_class.iter().all(|c| c.len() >= quota_per_class) {
            break;
        }
        let base = [45u64, tag, cascade as u64];
        let mut rng = seeds::rng_for(cfg.master_seed, &[&base[..], &[0]].concat());
        // every node draws both parameters; the assigned mechanism decides
        // which one is in force, the pair locates the node on the quintile
        // grid
        let mut assignments: Vec<Option<NodeAssignment<f64>>> = Vec::with_capacity(n);
        let mut sampled: Vec<(f64, f64)> = Vec::with_capacity(n);
        for u in 0..n {
            let beta = model.sample_beta(g.degree(u), &mut rng);
            let phi = model.sample_phi(&mut rng);
            sampled.push((beta, phi));
            assignments.push(Some(if rng.gen::<bool>() {
                NodeAssignment::Simple { beta }
            } else {
                NodeAssignment::Complex { phi }
            }));
        }
        let activities = assign_activities(
            g,
            &means,
            cfg.exp4.activity_spread,
            seeds::child_seed(cfg.master_seed, &[&base[..], &[1]].concat()),
        )?;
        let rec = simulate_activity_driven(
            Arc::clone(g),
            Arc::new(activities.activities),
            Arc::new(assignments),
            cfg.exp4.r,
            cfg.exp4.stop_fraction,
            Some(60 * n),
            seeds::child_seed(cfg.master_seed, &[&base[..], &[2]].concat()),
        )?;
        if let Some(waits) = waits_acc.as_deref_mut() {
            waits.extend(waiting_times(&rec));
        }
        let actions = action_steps(&rec);
        let node_results: Vec<(usize, Mechanism, FeatureVector<f64>)> = (0..n)
            .into_par_iter()
            .filter_map(|node| {
                let fired = rec.fired[node]?;
                let obs = observation_of(&rec, &actions, node)?;
                let features = extract::<f64>(&obs).ok()?;
                Some((node, fired, features))
            })
            .collect();
        for (node, fired, features) in node_results {
            let class = fired.index();
            if by_class[class].len() < quota_per_class {
                by_class[class].push(Exp4Instance {
                    features,
                    label: fired,
                    row_id: seeds::child_seed(
                        cfg.master_seed,
                        &[45, tag, cascade as u64, 9, node as u64],
                    ),
                    beta_sampled: sampled[node].0,
                    phi_sampled: sampled[node].1,
                    q_beta: 0,
                    q_phi: 0,
                });
            }
        }
        if cfg.progress {
            eprintln!(
                "exp4 tag {tag}: cascade {cascade}, pool sizes {:?}",
                by_class.iter().map(Vec::len).collect::<Vec<_>>()
            );
        }
    }
    assign_rank_quintiles(&mut by_class);
    Ok(by_class)
}

fn balanced_split(
    by_class: &[Vec<Exp4Instance>; 3],
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> ([Vec<usize>; 3], [Vec<usize>; 3]) {
    let avail = by_class.iter().map(Vec::len).min().unwrap_or(0);
    let quota = train_per_class + test_per_class;
    let (train_n, test_n) = if avail >= quota {
        (train_per_class, test_per_class)
    } else {
        let mut t = ((train_per_class * avail) as f64 / quota as f64).round() as usize;
        t = t.clamp(1, avail.saturating_sub(1).max(1));
        (t, (avail - t).max(1))
    };
    let mut train: [Vec<usize>; 3] = Default::default();
    let mut test: [Vec<usize>; 3] = Default::default();
    for class in 0..3 {
        let mut idx: Vec<usize> = (0..by_class[class].len()).collect();
        let mut rng = seeds::rng_for(seed, &[class as u64]);
        idx.shuffle(&mut rng);
        let t = train_n.min(idx.len());
        let e = test_n.min(idx.len().saturating_sub(t));
        train[class] = idx[..t].to_vec();
        test[class] = idx[t..t + e].to_vec();
    }
    (train, test)
}

/// Trains on a balanced split and returns the summed confusion matrix over
/// the test rows (pooled over realisations).
fn train_and_confuse(
    cfg: &ExperimentConfig,
    by_class: &[Vec<Exp4Instance>; 3],
    train_per_class: usize,
    test_per_class: usize,
    realisations: usize,
    tag: u64,
) -> Result<(ConfusionMatrix, ForestModel<f64>, Vec<Vec<Vec<f64>>>)> {
    if by_class.iter().all(|c| c.is_empty()) {
        return Err(Error::Config("no instances collected".into()));
    }
    let mut summed = ConfusionMatrix { counts: [[0; 3]; 3] };
    let mut cell_samples = vec![vec![Vec::new(); 5]; 5];
    let mut last_model: Option<ForestModel<f64>> = None;
    for real in 0..realisations {
        let (train_idx, test_idx) = balanced_split(
            by_class,
            train_per_class,
            test_per_class,
            seeds::child_seed(cfg.master_seed, &[46, tag, real as u64]),
        );
        let mut train_data = Dataset::of_ego_features();
        for class in 0..3 {
            for &i in &train_idx[class] {
                let inst = &by_class[class][i];
                train_data.push(&inst.features, inst.label, inst.row_id);
            }
        }
        let model = train(
            &train_data,
            &ForestConfig {
                n_trees: cfg.exp4.forest_trees,
                criterion: None,
                features_per_split: None,
                feature_subset: None,
                seed: seeds::child_seed(cfg.master_seed, &[47, tag, real as u64]),
            },
        )?;

        let mut cell_counts = vec![vec![(0usize, 0usize); 5]; 5];
        for class in 0..3 {
            for &i in &test_idx[class] {
                let inst = &by_class[class][i];
                let pred = crate::forest::predict(&model, &inst.features.as_array())?;
                summed.counts[inst.label.index()][pred.label.index()] += 1;
                let cell = &mut cell_counts[inst.q_beta][inst.q_phi];
                cell.1 += 1;
                if pred.label == inst.label {
                    cell.0 += 1;
                }
            }
        }
        for qi in 0..5 {
            for qj in 0..5 {
                let (correct, total) = cell_counts[qi][qj];
                if total > 0 {
                    cell_samples[qi][qj].push(correct as f64 / total as f64);
                }
            }
        }
        last_model = Some(model);
    }
    Ok((
        summed,
        last_model.expect("at least one realisation"),
        cell_samples,
    ))
}

pub fn run_exp4(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Exp4Output> {
    ensure_dir(out_dir)?;
    let g = substrate(cfg)?;

    // calibration cascade -> fixture corpus -> empirical parameter model
    let calibration = calibration_cascade(cfg, &g)?;
    let corpus_path = out_dir.join("corpus.jsonl");
    let follow_path = out_dir.join("follow_graph.edges");
    write_fixture_corpus(
        &calibration,
        HASHTAG_VARIANTS[0],
        cfg.exp4.epoch,
        cfg.exp4.step_secs,
        &corpus_path,
    )?;
    save_edge_list(
        &g,
        &GraphHeader {
            spec: None,
            seed: Some(cfg.master_seed),
            n_nodes: g.n_nodes(),
            n_edges: g.n_edges(),
        },
        &follow_path,
    )?;
    let variants: BTreeSet<String> = HASHTAG_VARIANTS.iter().map(|s| s.to_string()).collect();
    let corpus = load_corpus(
        &[corpus_path.clone()],
        &variants,
        &follow_graph_of(&g),
    )?;
    let (corpus_obs, _unclassifiable) = build_observations(&corpus, cfg.window_days);
    if corpus_obs.is_empty() {
        return Err(Error::Config(
            "calibration corpus produced no classifiable observations".into(),
        ));
    }
    let param_model: EmpiricalParamModel<f64> =
        fit_param_model(&corpus_obs, cfg.exp4.filter_quantile)?;

    // main run
    let mut waits: Vec<u32> = Vec::new();
    let by_class = collect_instances(
        cfg,
        &g,
        &param_model,
        cfg.exp4.train_per_class + cfg.exp4.test_per_class,
        0,
        Some(&mut waits),
    )?;
    let instances_collected = [
        by_class[0].len(),
        by_class[1].len(),
        by_class[2].len(),
    ];
    let (_, model, cell_samples) = train_and_confuse(
        cfg,
        &by_class,
        cfg.exp4.train_per_class,
        cfg.exp4.test_per_class,
        cfg.exp4.realisations,
        0,
    )?;
    let q_labels: Vec<String> = (1..=5).map(|q| format!("q{q}")).collect();
    let grid = AccuracyGrid::from_samples(
        "q_beta",
        "q_phi",
        q_labels.clone(),
        q_labels,
        &cell_samples,
    );
    let mean_accuracy = grid.grand_mean();

    // waiting-time statistics
    let wait_mean = waits.iter().map(|&w| w as f64).sum::<f64>() / waits.len().max(1) as f64;
    let wait_var = waits
        .iter()
        .map(|&w| (w as f64 - wait_mean).powi(2))
        .sum::<f64>()
        / waits.len().max(1) as f64;
    let waiting_cv = wait_var.sqrt() / wait_mean.max(f64::MIN_POSITIVE);
    let mut hist: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
    for &w in &waits {
        *hist.entry(w).or_default() += 1;
    }

    // per-quintile-cell importances
    let mut cell_members: Vec<Vec<[Vec<usize>; 3]>> = vec![
        vec![Default::default(), Default::default(), Default::default(), Default::default(), Default::default()];
        5
    ];
    for class in 0..3 {
        for (i, inst) in by_class[class].iter().enumerate() {
            cell_members[inst.q_beta][inst.q_phi][class].push(i);
        }
    }
    // fired classes skew across the parameter quintiles (high-beta cells are
    // simple-heavy), so require a usable total and two populated classes
    // rather than full balance
    let cell_jobs: Vec<(usize, usize)> = (0..5)
        .flat_map(|i| (0..5).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let sizes: Vec<usize> = cell_members[i][j].iter().map(Vec::len).collect();
            let total: usize = sizes.iter().sum();
            let populated = sizes.iter().filter(|&&s| s >= 20).count();
            total >= 90 && populated >= 2
        })
        .collect();
    let importance_cells: Vec<(usize, usize, [f64; 8])> = cell_jobs
        .par_iter()
        .map(|&(qi, qj)| {
            let mut data = Dataset::of_ego_features();
            for class in 0..3 {
                for &i in cell_members[qi][qj][class].iter().take(400) {
                    let inst = &by_class[class][i];
                    data.push(&inst.features, inst.label, inst.row_id);
                }
            }
            let model = train(
                &data,
                &ForestConfig {
                    n_trees: 50,
                    criterion: Some(crate::forest::Criterion::Gini),
                    features_per_split: None,
                    feature_subset: None,
                    seed: seeds::child_seed(cfg.master_seed, &[48, qi as u64, qj as u64]),
                },
            )
            .expect("cell has enough instances");
            let imp = feature_importance(&model);
            let mut arr = [0.0f64; 8];
            for (name, v) in imp {
                arr[FEATURE_NAMES.iter().position(|&n| n == name).unwrap()] = v;
            }
            (qi, qj, arr)
        })
        .collect();
    let top3_freq = |feature: &str| -> f64 {
        if importance_cells.is_empty() {
            return 0.0;
        }
        let f = FEATURE_NAMES.iter().position(|&n| n == feature).unwrap();
        let hits = importance_cells
            .iter()
            .filter(|(_, _, imp)| {
                let mut ranked: Vec<usize> = (0..8).collect();
                ranked.sort_by(|&a, &b| imp[b].partial_cmp(&imp[a]).unwrap());
                ranked[..3].contains(&f)
            })
            .count();
        hits as f64 / importance_cells.len() as f64
    };
    let degree_top3_freq = top3_freq("degree");
    let f7_top3_freq = top3_freq("time_since_first_nb");
    let f8_top3_freq = top3_freq("time_since_last_nb");

    // filter-quantile sweep
    let sweep: Vec<SweepPoint> = cfg
        .exp4
        .sweep
        .iter()
        .enumerate()
        .map(|(s, &q)| -> Result<SweepPoint> {
            let sweep_model: EmpiricalParamModel<f64> = fit_param_model(&corpus_obs, q)?;
            let pool = collect_instances(
                cfg,
                &g,
                &sweep_model,
                cfg.exp4.sweep_train_per_class + cfg.exp4.sweep_test_per_class,
                100 + s as u64,
                None,
            )?;
            let (cm, _, _) = train_and_confuse(
                cfg,
                &pool,
                cfg.exp4.sweep_train_per_class,
                cfg.exp4.sweep_test_per_class,
                1,
                100 + s as u64,
            )?;
            Ok(SweepPoint {
                quantile: q,
                sm_recall: cm.recall(Mechanism::Sm).unwrap_or(0.0),
                cx_recall: cm.recall(Mechanism::Cx).unwrap_or(0.0),
                st_recall: cm.recall(Mechanism::St).unwrap_or(0.0),
                accuracy: cm.accuracy(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let qs: Vec<f64> = sweep.iter().map(|p| p.quantile).collect();
    let peer_recall: Vec<f64> = sweep
        .iter()
        .map(|p| (p.sm_recall + p.cx_recall) / 2.0)
        .collect();
    let sweep_spearman = spearman(&qs, &peer_recall);

    Ok(Exp4Output {
        grid,
        mean_accuracy,
        waiting_cv,
        waiting_histogram: hist.into_iter().collect(),
        sweep,
        sweep_spearman,
        importance_cells,
        degree_top3_freq,
        f7_top3_freq,
        f8_top3_freq,
        model,
        param_model,
        corpus_path,
        follow_path,
        calibration_fired: calibration.fired.clone(),
        instances_collected,
    })
}

/// Runs experiment 4 and writes its artifacts.
pub fn write_exp4(cfg: &ExperimentConfig, out_dir: &Path, command: &str) -> Result<Exp4Output> {
    use std::io::Write;
    let started = std::time::Instant::now();
    let out = run_exp4(cfg, out_dir)?;
    emit_heatmap(&out.grid, out_dir.join("accuracy_grid.csv"))?;
    super::emit_heatmap_svg(&out.grid, out_dir.join("accuracy_grid.svg"))?;
    crate::forest::save_model(&out.model, out_dir.join("forest.json"))?;
    out.param_model.save_json(out_dir.join("param_model.json"))?;

    let wt_path = out_dir.join("waiting_times.csv");
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(&wt_path).map_err(|e| Error::io(&wt_path, e))?,
    );
    writeln!(w, "waiting_time,count").map_err(|e| Error::io(&wt_path, e))?;
    for (v, c) in &out.waiting_histogram {
        writeln!(w, "{v},{c}").map_err(|e| Error::io(&wt_path, e))?;
    }
    drop(w);

    let sweep_path = out_dir.join("filter_sweep.csv");
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(&sweep_path).map_err(|e| Error::io(&sweep_path, e))?,
    );
    writeln!(w, "quantile,sm_recall,cx_recall,st_recall,accuracy")
        .map_err(|e| Error::io(&sweep_path, e))?;
    for p in &out.sweep {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.quantile, p.sm_recall, p.cx_recall, p.st_recall, p.accuracy
        )
        .map_err(|e| Error::io(&sweep_path, e))?;
    }
    drop(w);

    let imp_path = out_dir.join("importance.csv");
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(&imp_path).map_err(|e| Error::io(&imp_path, e))?,
    );
    writeln!(w, "q_beta,q_phi,{}", FEATURE_NAMES.join(","))
        .map_err(|e| Error::io(&imp_path, e))?;
    for (qi, qj, imp) in &out.importance_cells {
        let row: Vec<String> = imp.iter().map(|v| v.to_string()).collect();
        writeln!(w, "q{},q{},{}", qi + 1, qj + 1, row.join(","))
            .map_err(|e| Error::io(&imp_path, e))?;
    }
    drop(w);

    let mut manifest = RunManifest::new(command, 4, cfg)?;
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.outputs = vec![
        "accuracy_grid.csv".into(),
        "accuracy_grid.svg".into(),
        "forest.json".into(),
        "param_model.json".into(),
        "waiting_times.csv".into(),
        "filter_sweep.csv".into(),
        "importance.csv".into(),
        "corpus.jsonl".into(),
        "follow_graph.edges".into(),
    ];
    manifest.write(out_dir)?;
    Ok(out)
}
