//! Timeline corpora and the empirical parameter model.
//!
//! A corpus is a set of line-oriented JSON timeline files
//! (`{"actor": "...", "ts": 1546300800, "hashtags": ["#..."]}`) plus a
//! follow graph. Ingestion merges each ego's followee posts into an
//! event-time stream, measures the plug-in parameters `beta_hat` and
//! `phi_hat`, and fits the degree-stratified distributions that
//! parameterise the activity-driven experiment. The real platform data is
//! not redistributable, so a fixture generator emits the same format from
//! simulated temporal cascades.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contagion::Mechanism;
use crate::error::{Error, Result};
use crate::features::{
    extract, observation_from_events, EgoEventStream, EgoObservation, FolloweePost,
};
use crate::forest::{predict, ForestModel};
use crate::netgen::Graph;
use crate::scalar::Real;
use crate::tempnet::{degree_class, TemporalCascadeRecord};

/// One normalized timeline event.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub actor: String,
    /// Epoch seconds.
    pub ts: i64,
    #[serde(default)]
    pub hashtags: Vec<String>,
}

/// An ego's merged view of the corpus: followee posts plus its own posting
/// times and adoption moment.
#[derive(Debug, Clone)]
pub struct EgoTimeline {
    pub label: String,
    pub stream: EgoEventStream,
    /// Wall-clock times of the ego's own posts (any content).
    pub ego_post_times: Vec<i64>,
}

/// Corpus ingestion summary.
#[derive(Debug)]
pub struct CorpusStreams {
    pub timelines: Vec<EgoTimeline>,
    /// Egos in the follow graph that never posted the target hashtag.
    pub egos_without_adoption: usize,
    /// Events by actors that are neither egos nor followees of any ego.
    pub unknown_actor_events: usize,
}

/// Loads timeline files and builds one event stream per adopting ego.
/// Hashtag matching is exact over the configured variant set; the adoption
/// is the ego's first matching post.
pub fn load_corpus(
    paths: &[PathBuf],
    hashtag_set: &BTreeSet<String>,
    follow_graph: &BTreeMap<String, Vec<String>>,
) -> Result<CorpusStreams> {
    let mut known: BTreeSet<&str> = BTreeSet::new();
    for (ego, followees) in follow_graph {
        known.insert(ego.as_str());
        for f in followees {
            known.insert(f.as_str());
        }
    }

    // (ts, input order, is_stimulus) per actor
    let mut by_actor: HashMap<String, Vec<(i64, usize, bool)>> = HashMap::new();
    let mut unknown_actor_events = 0usize;
    let mut order = 0usize;
    for path in paths {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let event: TimelineEvent = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("{}: {e}", path.display()),
            })?;
            if !known.contains(event.actor.as_str()) {
                unknown_actor_events += 1;
                continue;
            }
            let is_stimulus = event.hashtags.iter().any(|h| hashtag_set.contains(h));
            by_actor
                .entry(event.actor)
                .or_default()
                .push((event.ts, order, is_stimulus));
            order += 1;
        }
    }
    for posts in by_actor.values_mut() {
        posts.sort_unstable_by_key(|&(ts, ord, _)| (ts, ord));
    }

    let mut timelines = Vec::new();
    let mut egos_without_adoption = 0usize;
    for (ego_idx, (ego, followees)) in follow_graph.iter().enumerate() {
        let adoption_ts = by_actor
            .get(ego.as_str())
            .and_then(|posts| posts.iter().find(|&&(_, _, s)| s))
            .map(|&(ts, _, _)| ts);
        let Some(adoption_ts) = adoption_ts else {
            egos_without_adoption += 1;
            continue;
        };
        let mut posts: Vec<(i64, usize, FolloweePost)> = Vec::new();
        for (f_idx, f) in followees.iter().enumerate() {
            if let Some(events) = by_actor.get(f.as_str()) {
                for &(ts, ord, is_stimulus) in events {
                    posts.push((
                        ts,
                        ord,
                        FolloweePost {
                            followee: f_idx,
                            ts,
                            is_stimulus,
                        },
                    ));
                }
            }
        }
        posts.sort_unstable_by_key(|&(ts, ord, _)| (ts, ord));
        let ego_post_times = by_actor
            .get(ego.as_str())
            .map(|events| events.iter().map(|&(ts, _, _)| ts).collect())
            .unwrap_or_default();
        timelines.push(EgoTimeline {
            label: ego.clone(),
            stream: EgoEventStream {
                ego: ego_idx,
                adoption_ts,
                posts: posts.into_iter().map(|(_, _, p)| p).collect(),
                n_followees: followees.len(),
            },
            ego_post_times,
        });
    }
    Ok(CorpusStreams {
        timelines,
        egos_without_adoption,
        unknown_actor_events,
    })
}

/// An event-time observation plus what the parameter fit needs.
#[derive(Debug, Clone)]
pub struct CorpusObservation {
    pub label: String,
    pub obs: EgoObservation,
    /// Ego's own posts inside the observation window (its activity proxy).
    pub ego_posts_in_window: usize,
}

/// Builds windowed event-time observations; egos without any followee
/// activity in the window are flagged unclassifiable and dropped.
pub fn build_observations(
    streams: &CorpusStreams,
    window_days: Option<u32>,
) -> (Vec<CorpusObservation>, usize) {
    let window_secs = window_days.map(|d| d as i64 * 86_400);
    let mut out = Vec::new();
    let mut unclassifiable = 0usize;
    for tl in &streams.timelines {
        match observation_from_events(&tl.stream, window_secs) {
            Some(obs) => {
                let lo = window_secs.map(|w| tl.stream.adoption_ts - w);
                let ego_posts_in_window = tl
                    .ego_post_times
                    .iter()
                    .filter(|&&ts| ts < tl.stream.adoption_ts && lo.map_or(true, |lo| ts >= lo))
                    .count();
                out.push(CorpusObservation {
                    label: tl.label.clone(),
                    obs,
                    ego_posts_in_window,
                });
            }
            None => unclassifiable += 1,
        }
    }
    (out, unclassifiable)
}

/// Log-normal parameters fitted in log space, with the retained-sample cap.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogNormalParams<T> {
    pub mu: T,
    pub sigma: T,
    /// Largest retained raw sample; the sampler never exceeds it.
    pub cap: T,
    pub n_samples: usize,
}

/// Degree-stratified empirical parameter distributions driving the
/// activity-driven experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalParamModel<T> {
    pub filter_quantile: f64,
    /// Degree class -> fitted slot (small classes merge into neighbours).
    pub class_slot: Vec<usize>,
    pub beta_slots: Vec<LogNormalParams<T>>,
    /// Retained `phi_hat` samples (sorted); sampling draws uniformly.
    pub phi_support: Vec<T>,
    /// Mean ego posts per fitted slot (raw counts, not normalised).
    pub activity_means: Vec<T>,
    /// Number of degree classes merged away for lack of samples.
    pub merged_classes: usize,
}

fn truncate_lowest<T: Real>(mut samples: Vec<T>, quantile: f64) -> Vec<T> {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let keep = ((samples.len() as f64 * quantile).ceil() as usize).clamp(1, samples.len());
    samples.truncate(keep);
    samples
}

/// Fits the empirical model: per-degree-class log-normals for `beta_hat`
/// (log-space moment matching), the raw `phi_hat` histogram, and the
/// degree-to-activity table. Each distribution is truncated to its lowest
/// `filter_quantile` mass before fitting and sampling.
pub fn fit_param_model<T: Real>(
    observations: &[CorpusObservation],
    filter_quantile: f64,
) -> Result<EmpiricalParamModel<T>> {
    if !(filter_quantile > 0.0 && filter_quantile <= 1.0) {
        return Err(Error::Parameter(format!(
            "filter_quantile = {filter_quantile} not in (0, 1]"
        )));
    }
    let n_classes = observations
        .iter()
        .map(|o| degree_class(o.obs.degree))
        .max()
        .map_or(0, |c| c + 1);
    if n_classes == 0 {
        return Err(Error::Config("no observations to fit".into()));
    }

    let mut beta_by_class: Vec<Vec<T>> = vec![Vec::new(); n_classes];
    let mut phi_samples: Vec<T> = Vec::new();
    let mut posts_by_class: Vec<Vec<T>> = vec![Vec::new(); n_classes];
    for o in observations {
        let class = degree_class(o.obs.degree);
        let f4 = o.obs.sum_stimuli();
        if f4 >= 1 {
            beta_by_class[class].push(T::one() / T::from_f64(f4 as f64).unwrap());
        }
        // phi_hat only from adoptions whose final pre-adoption event was a
        // newly infected neighbour (zero lag to the last first-stimulus)
        if o.obs.last_infection_time() == Some(o.obs.adoption_time) {
            phi_samples
                .push(T::from_count(o.obs.n_infected_neighbors()) / T::from_count(o.obs.degree));
        }
        posts_by_class[class].push(T::from_count(o.ego_posts_in_window));
    }

    // Merge degree classes with under 10 beta samples into the next class
    // (the last one merges backward).
    const MIN_SAMPLES: usize = 10;
    let mut class_slot: Vec<usize> = (0..n_classes).collect();
    let mut merged_classes = 0usize;
    for c in 0..n_classes {
        if beta_by_class[c].len() < MIN_SAMPLES && c + 1 < n_classes {
            let moved: Vec<T> = std::mem::take(&mut beta_by_class[c]);
            let posts: Vec<T> = std::mem::take(&mut posts_by_class[c]);
            beta_by_class[c + 1].extend(moved);
            posts_by_class[c + 1].extend(posts);
            for slot in class_slot.iter_mut() {
                if *slot == c {
                    *slot = c + 1;
                }
            }
            merged_classes += 1;
        }
    }
    // backward pass for a deficient final class
    let last = n_classes - 1;
    if beta_by_class[last].len() < MIN_SAMPLES {
        if let Some(target) = (0..last)
            .rev()
            .find(|&c| beta_by_class[c].len() >= MIN_SAMPLES)
        {
            let moved: Vec<T> = std::mem::take(&mut beta_by_class[last]);
            let posts: Vec<T> = std::mem::take(&mut posts_by_class[last]);
            beta_by_class[target].extend(moved);
            posts_by_class[target].extend(posts);
            for slot in class_slot.iter_mut() {
                if *slot == last {
                    *slot = target;
                }
            }
            merged_classes += 1;
        }
    }

    let mut beta_slots = Vec::with_capacity(n_classes);
    let mut activity_means = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let samples = &beta_by_class[c];
        if samples.is_empty() {
            // slot unused after merging; keep a placeholder
            beta_slots.push(LogNormalParams {
                mu: T::zero(),
                sigma: T::zero(),
                cap: T::one(),
                n_samples: 0,
            });
        } else {
            let retained = truncate_lowest(samples.clone(), filter_quantile);
            let n = T::from_count(retained.len());
            let mu = retained.iter().map(|&x| x.ln()).sum::<T>() / n;
            let var = retained
                .iter()
                .map(|&x| {
                    let d = x.ln() - mu;
                    d * d
                })
                .sum::<T>()
                / n;
            beta_slots.push(LogNormalParams {
                mu,
                sigma: var.sqrt(),
                cap: *retained.last().unwrap(),
                n_samples: retained.len(),
            });
        }
        let posts = &posts_by_class[c];
        let mean = if posts.is_empty() {
            T::zero()
        } else {
            posts.iter().copied().sum::<T>() / T::from_count(posts.len())
        };
        activity_means.push(mean);
    }

    if phi_samples.is_empty() {
        return Err(Error::Config(
            "no adoption had a newly infected neighbour as its final event; cannot fit phi".into(),
        ));
    }
    let phi_support = truncate_lowest(phi_samples, filter_quantile);

    Ok(EmpiricalParamModel {
        filter_quantile,
        class_slot,
        beta_slots,
        phi_support,
        activity_means,
        merged_classes,
    })
}

impl<T: Real> EmpiricalParamModel<T> {
    fn slot_for_degree(&self, degree: usize) -> usize {
        let class = degree_class(degree).min(self.class_slot.len().saturating_sub(1));
        let mut slot = self.class_slot[class];
        // walk up to a populated slot if merging left this one empty
        while self.beta_slots[slot].n_samples == 0 && slot + 1 < self.beta_slots.len() {
            slot += 1;
        }
        if self.beta_slots[slot].n_samples == 0 {
            slot = (0..self.beta_slots.len())
                .rev()
                .find(|&s| self.beta_slots[s].n_samples > 0)
                .unwrap_or(0);
        }
        slot
    }

    /// Draws `beta_hat` for a node of the given degree: log-normal of its
    /// degree class, clipped into (0, min(1, cap)].
    pub fn sample_beta<R: Rng + ?Sized>(&self, degree: usize, rng: &mut R) -> T {
        let params = &self.beta_slots[self.slot_for_degree(degree)];
        let cap = params.cap.min(T::one());
        for _ in 0..1_000 {
            let draw = (params.mu + params.sigma * T::std_normal(rng)).exp();
            if draw > T::zero() && draw <= cap {
                return draw;
            }
        }
        cap
    }

    /// Draws `phi_hat` from the retained empirical support, interpolating
    /// linearly between adjacent samples so atomic histograms (ratios of
    /// small degrees) still yield a spread of thresholds.
    pub fn sample_phi<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        if self.phi_support.len() == 1 {
            return self.phi_support[0];
        }
        let u = T::unit(rng) * T::from_count(self.phi_support.len() - 1);
        let lo = u.floor().to_usize().unwrap_or(0).min(self.phi_support.len() - 2);
        let frac = u - T::from_count(lo);
        let (a, b) = (self.phi_support[lo], self.phi_support[lo + 1]);
        a + frac * (b - a)
    }

    /// Per-degree-class activity means normalised so the largest is 1,
    /// covering classes `0..=max_class` (clamped into fitted slots). Means
    /// of empty slots borrow from the slot the class merged into.
    pub fn normalized_activity_means(&self, max_class: usize) -> Vec<T> {
        let mut raw: Vec<T> = (0..=max_class)
            .map(|c| {
                let degree = crate::tempnet::degree_class_floor(c);
                let slot = self.slot_for_degree(degree);
                self.activity_means[slot]
            })
            .collect();
        let max = raw
            .iter()
            .copied()
            .fold(T::zero(), |a, b| if b > a { b } else { a });
        let floor = T::from_config(1e-3);
        if max > T::zero() {
            for v in &mut raw {
                *v = (*v / max).max(floor);
            }
        } else {
            raw = vec![T::from_config(0.5); max_class + 1];
        }
        raw
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Classification of one corpus observation.
#[derive(Debug, Clone)]
pub struct CorpusPrediction<T> {
    pub label: String,
    pub predicted: Mechanism,
    pub certainty: T,
    pub beta_hat: Option<T>,
    pub phi_hat: T,
}

/// Decile-stratified classification summary over the measured parameters.
#[derive(Debug, Clone)]
pub struct DecileGrid<T> {
    /// Internal edges (9 per axis) of the beta_hat / phi_hat deciles.
    pub beta_edges: Vec<T>,
    pub phi_edges: Vec<T>,
    pub dominant: Vec<Vec<Option<Mechanism>>>,
    pub mean_certainty: Vec<Vec<T>>,
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct CorpusClassification<T> {
    /// Predicted instances per class, indexed by [`Mechanism::index`].
    pub counts: [usize; 3],
    pub rows: Vec<CorpusPrediction<T>>,
    pub grid: DecileGrid<T>,
}

fn decile_edges<T: Real>(values: &mut [T]) -> Vec<T> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (1..10)
        .map(|d| values[(d * values.len() / 10).min(values.len() - 1)])
        .collect()
}

fn decile_of<T: Real>(edges: &[T], x: T) -> usize {
    edges.partition_point(|&e| e < x).min(9)
}

/// Classifies featurised corpus observations with a trained forest and
/// aggregates counts plus the decile grid over the measured parameters.
pub fn classify_corpus<T: Real>(
    model: &ForestModel<T>,
    observations: &[CorpusObservation],
) -> Result<CorpusClassification<T>> {
    let mut rows = Vec::with_capacity(observations.len());
    let mut counts = [0usize; 3];
    for o in observations {
        let features = extract::<T>(&o.obs)?;
        let pred = predict(model, &features.as_array())?;
        let (beta_hat, phi_hat) = crate::likelihood::estimate_params::<T>(&o.obs);
        counts[pred.label.index()] += 1;
        rows.push(CorpusPrediction {
            label: o.label.clone(),
            predicted: pred.label,
            certainty: pred.certainty,
            beta_hat,
            phi_hat,
        });
    }

    let mut betas: Vec<T> = rows.iter().filter_map(|r| r.beta_hat).collect();
    let mut phis: Vec<T> = rows
        .iter()
        .filter(|r| r.beta_hat.is_some())
        .map(|r| r.phi_hat)
        .collect();
    if betas.is_empty() {
        return Err(Error::Config("no observation carries any stimulus".into()));
    }
    let beta_edges = decile_edges(&mut betas);
    let phi_edges = decile_edges(&mut phis);
    let mut class_counts = vec![vec![[0usize; 3]; 10]; 10];
    let mut cert_sum = vec![vec![T::zero(); 10]; 10];
    for r in &rows {
        let Some(beta) = r.beta_hat else { continue };
        let (i, j) = (
            decile_of(&beta_edges, beta),
            decile_of(&phi_edges, r.phi_hat),
        );
        class_counts[i][j][r.predicted.index()] += 1;
        cert_sum[i][j] = cert_sum[i][j] + r.certainty;
    }
    let mut dominant = vec![vec![None; 10]; 10];
    let mut mean_certainty = vec![vec![T::zero(); 10]; 10];
    let mut cell_counts = vec![vec![0usize; 10]; 10];
    for i in 0..10 {
        for j in 0..10 {
            let total: usize = class_counts[i][j].iter().sum();
            cell_counts[i][j] = total;
            if total > 0 {
                let mut best = Mechanism::Sm;
                for m in [Mechanism::Cx, Mechanism::St] {
                    if class_counts[i][j][m.index()] > class_counts[i][j][best.index()] {
                        best = m;
                    }
                }
                dominant[i][j] = Some(best);
                mean_certainty[i][j] = cert_sum[i][j] / T::from_count(total);
            }
        }
    }
    Ok(CorpusClassification {
        counts,
        rows,
        grid: DecileGrid {
            beta_edges,
            phi_edges,
            dominant,
            mean_certainty,
            counts: cell_counts,
        },
    })
}

/// Writes a fixture corpus in the timeline format from a simulated temporal
/// cascade: one record per event step; posts by aware-or-detected actors
/// carry the hashtag.
pub fn write_fixture_corpus<T: Real>(
    c: &TemporalCascadeRecord<T>,
    hashtag: &str,
    epoch: i64,
    step_secs: i64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (i, &actor) in c.acting.iter().enumerate() {
        let step = (i + 1) as u32;
        let hashtags: Vec<String> = if c.is_influencing_post(step) {
            vec![hashtag.to_string()]
        } else {
            Vec::new()
        };
        let event = TimelineEvent {
            actor: actor.to_string(),
            ts: epoch + step as i64 * step_secs,
            hashtags,
        };
        serde_json::to_writer(&mut w, &event)?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Follow graph of a fixture: every node follows its neighbours.
pub fn follow_graph_of(g: &Graph) -> BTreeMap<String, Vec<String>> {
    g.node_ids()
        .map(|u| {
            (
                u.to_string(),
                g.neighbors(u).iter().map(|v| v.to_string()).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write as _;

    fn hashtags() -> BTreeSet<String> {
        [
            "#GiletsJaunes",
            "#giletsjaunes",
            "#Giletsjaunes",
            "#GiletJaune",
            "#Giletjaune",
            "#giletjaune",
            "#giletsjaune",
            "#Giletsjaune",
            "#GJ",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    fn write_corpus(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn loads_streams_and_detects_adoption() {
        let f = write_corpus(&[
            r##"{"actor":"a","ts":100,"hashtags":[]}"##,
            r##"{"actor":"b","ts":110,"hashtags":["#GJ"]}"##,
            r##"{"actor":"c","ts":120,"hashtags":["#irrelevant"]}"##,
            r##"{"actor":"ego","ts":130,"hashtags":["#giletjaune"]}"##,
            r##"{"actor":"stranger","ts":140,"hashtags":["#GJ"]}"##,
        ]);
        let mut follow = BTreeMap::new();
        follow.insert(
            "ego".to_string(),
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
        );
        let corpus = load_corpus(&[f.path().to_path_buf()], &hashtags(), &follow).unwrap();
        assert_eq!(corpus.timelines.len(), 1);
        assert_eq!(corpus.unknown_actor_events, 1);
        let tl = &corpus.timelines[0];
        assert_eq!(tl.stream.adoption_ts, 130);
        assert_eq!(tl.stream.posts.len(), 3);
        let (obs_set, unclassifiable) = build_observations(&corpus, Some(7));
        assert_eq!(unclassifiable, 0);
        let obs = &obs_set[0].obs;
        assert_eq!(obs.degree, 3);
        assert_eq!(obs.n_infected_neighbors(), 1); // only b posted a variant
        assert_eq!(obs.adoption_time, 3);
    }

    #[test]
    fn ego_without_adoption_is_excluded() {
        let f = write_corpus(&[
            r##"{"actor":"a","ts":100,"hashtags":["#GJ"]}"##,
            r##"{"actor":"ego","ts":130,"hashtags":[]}"##,
        ]);
        let mut follow = BTreeMap::new();
        follow.insert("ego".to_string(), vec!["a".to_string()]);
        let corpus = load_corpus(&[f.path().to_path_buf()], &hashtags(), &follow).unwrap();
        assert_eq!(corpus.timelines.len(), 0);
        assert_eq!(corpus.egos_without_adoption, 1);
    }

    #[test]
    fn malformed_line_reports_location() {
        let f = write_corpus(&[r##"{"actor":"a","ts":100}"##, "not json"]);
        let follow = BTreeMap::new();
        match load_corpus(&[f.path().to_path_buf()], &hashtags(), &follow) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn three_followees_one_stimulus_each() {
        let f = write_corpus(&[
            r##"{"actor":"a","ts":10,"hashtags":["#GJ"]}"##,
            r##"{"actor":"b","ts":20,"hashtags":["#GJ"]}"##,
            r##"{"actor":"c","ts":30,"hashtags":["#GJ"]}"##,
            r##"{"actor":"ego","ts":40,"hashtags":["#GJ"]}"##,
        ]);
        let mut follow = BTreeMap::new();
        follow.insert(
            "ego".to_string(),
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
        );
        let corpus = load_corpus(&[f.path().to_path_buf()], &hashtags(), &follow).unwrap();
        let (obs, _) = build_observations(&corpus, None);
        assert_eq!(obs[0].obs.n_infected_neighbors(), 3);
        assert_eq!(obs[0].obs.sum_stimuli(), 3);
    }

    fn synthetic_observation(degree: usize, stimuli: u64, zero_lag: bool) -> CorpusObservation {
        let t_a = (stimuli as u32).max(1) + 5;
        let mut times = vec![None; degree];
        let mut counts = vec![0u32; degree];
        if stimuli > 0 {
            times[0] = Some(if zero_lag { t_a } else { t_a - 2 });
            counts[0] = stimuli as u32;
        }
        CorpusObservation {
            label: "x".into(),
            obs: EgoObservation {
                ego: 0,
                degree,
                adoption_time: t_a,
                neighbor_infection_times: times,
                neighbor_stimuli: counts,
                clock: crate::features::ClockSemantics::EventTime,
            },
            ego_posts_in_window: degree,
        }
    }

    #[test]
    fn beta_contributions_are_inverse_stimulus_counts() {
        let obs: Vec<CorpusObservation> =
            (0..40).map(|_| synthetic_observation(3, 4, true)).collect();
        let model: EmpiricalParamModel<f64> = fit_param_model(&obs, 1.0).unwrap();
        // all beta_hat = 0.25: the log-normal degenerates onto it
        let slot = model.slot_for_degree(3);
        assert_relative_eq!(model.beta_slots[slot].mu, 0.25f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(model.beta_slots[slot].sigma, 0.0);
        let mut rng = crate::seeds::rng_for(1, &[]);
        let draw = model.sample_beta(3, &mut rng);
        assert_relative_eq!(draw, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn identity_filter_keeps_full_support() {
        let mut obs: Vec<CorpusObservation> = Vec::new();
        for s in 1..=20u64 {
            for _ in 0..2 {
                obs.push(synthetic_observation(4, s, true));
            }
        }
        let full: EmpiricalParamModel<f64> = fit_param_model(&obs, 1.0).unwrap();
        let trimmed: EmpiricalParamModel<f64> = fit_param_model(&obs, 0.5).unwrap();
        // truncation monotonicity: the trimmed support is a subset
        assert!(trimmed
            .phi_support
            .iter()
            .all(|p| full.phi_support.contains(p)));
        let slot = full.slot_for_degree(4);
        assert!(trimmed.beta_slots[trimmed.slot_for_degree(4)].cap <= full.beta_slots[slot].cap);
    }

    #[test]
    fn lognormal_round_trip_recovers_parameters() {
        // stimulus counts built from a known log-normal over beta_hat
        let (mu, sigma) = (-2.0f64, 0.5);
        let mut rng = crate::seeds::rng_for(77, &[]);
        let mut obs = Vec::new();
        for _ in 0..10_000 {
            let beta: f64 = (mu + sigma * <f64 as Real>::std_normal(&mut rng)).exp();
            let count = (1.0 / beta).round().max(1.0) as u64;
            obs.push(synthetic_observation(6, count, false));
        }
        let model: EmpiricalParamModel<f64> = fit_param_model(&obs, 1.0).unwrap();
        let slot = model.slot_for_degree(6);
        let fitted = &model.beta_slots[slot];
        assert!((fitted.mu - mu).abs() < 0.1, "mu {} vs {mu}", fitted.mu);
        assert!(
            (fitted.sigma - sigma).abs() < 0.1,
            "sigma {} vs {sigma}",
            fitted.sigma
        );
    }

    #[test]
    fn small_classes_merge_with_warning() {
        let mut obs: Vec<CorpusObservation> =
            (0..30).map(|_| synthetic_observation(8, 5, true)).collect();
        obs.push(synthetic_observation(1, 2, true)); // lone degree-1 ego
        let model: EmpiricalParamModel<f64> = fit_param_model(&obs, 0.8).unwrap();
        assert!(model.merged_classes > 0);
        // the degree-1 class resolves to the populated slot
        let s1 = model.slot_for_degree(1);
        assert!(model.beta_slots[s1].n_samples >= 10);
    }

    #[test]
    fn fixture_corpus_round_trips_through_ingestion() {
        use crate::contagion::NodeAssignment;
        use std::sync::Arc;
        let g = Arc::new(
            crate::netgen::generate(&crate::netgen::ModelSpec::Er { n: 150, p: 0.03 }, 5).unwrap(),
        );
        let n = g.n_nodes();
        let assignments: Vec<Option<NodeAssignment<f64>>> = (0..n)
            .map(|i| {
                Some(if i % 2 == 0 {
                    NodeAssignment::Simple { beta: 0.4 }
                } else {
                    NodeAssignment::Complex { phi: 0.2 }
                })
            })
            .collect();
        let activities = Arc::new(vec![0.5f64; n]);
        let cascade = crate::tempnet::simulate_activity_driven(
            Arc::clone(&g),
            activities,
            Arc::new(assignments),
            0.003,
            0.9,
            None,
            9,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let corpus_path = dir.path().join("fixture.jsonl");
        write_fixture_corpus(&cascade, "#GiletsJaunes", 1_526_000_000, 60, &corpus_path).unwrap();
        let follow = follow_graph_of(&g);
        let corpus = load_corpus(&[corpus_path], &hashtags(), &follow).unwrap();
        assert_eq!(corpus.unknown_actor_events, 0);

        // every ingested adoption time equals the node's detection step
        for tl in &corpus.timelines {
            let node: usize = tl.label.parse().unwrap();
            let detected = cascade.detected_time[node].expect("adopters are detected");
            let expected_ts = 1_526_000_000 + detected as i64 * 60;
            assert_eq!(tl.stream.adoption_ts, expected_ts);
        }
        // unwindowed observations exist for detected egos with active neighbours
        let (obs, _unclassifiable) = build_observations(&corpus, None);
        assert!(!obs.is_empty());
        let model: EmpiricalParamModel<f64> = fit_param_model(&obs, 0.8).unwrap();
        assert!(!model.phi_support.is_empty());
        assert!(model.phi_support.iter().all(|&p| p > 0.0 && p <= 1.0));
    }
}
