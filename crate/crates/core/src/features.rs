//! Ego-local observations and the eight classification features.
//!
//! Everything a classifier may see about an adoption lives in
//! [`EgoObservation`]: the ego degree, its adoption time, and per-neighbour
//! first-infection times and stimulus counts. Observations are built either
//! from synchronous cascade records or from event-time streams (where the
//! clock advances by one per followee post).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::contagion::{CascadeRecord, Mechanism};
use crate::error::{Error, Result};
use crate::netgen::NodeId;
use crate::scalar::Real;

/// Which clock the observation times are measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClockSemantics {
    /// Simulation steps; every infected neighbour delivers one stimulus per
    /// step, so times-since are always >= 1.
    Synchronous,
    /// Event time: one tick per followee post; times-since can be 0.
    EventTime,
}

/// The local view of one adopter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgoObservation {
    pub ego: NodeId,
    /// Number of observed neighbours.
    pub degree: usize,
    /// Ego adoption time on the observation clock.
    pub adoption_time: u32,
    /// Per-neighbour first observed infection time, `None` when the
    /// neighbour was not seen infected before the adoption.
    pub neighbor_infection_times: Vec<Option<u32>>,
    /// Per-neighbour stimulus count up to the adoption.
    pub neighbor_stimuli: Vec<u32>,
    pub clock: ClockSemantics,
}

impl EgoObservation {
    pub fn n_infected_neighbors(&self) -> usize {
        self.neighbor_infection_times.iter().flatten().count()
    }

    pub fn sum_stimuli(&self) -> u64 {
        self.neighbor_stimuli.iter().map(|&c| c as u64).sum()
    }

    pub fn first_infection_time(&self) -> Option<u32> {
        self.neighbor_infection_times.iter().flatten().min().copied()
    }

    pub fn last_infection_time(&self) -> Option<u32> {
        self.neighbor_infection_times.iter().flatten().max().copied()
    }

    /// Steps spent susceptible with at least one infected neighbour.
    pub fn exposure_steps(&self) -> u32 {
        self.first_infection_time()
            .map_or(0, |t| self.adoption_time.saturating_sub(t))
    }

    /// Infected-neighbour count at step `t` (neighbours with infection time
    /// <= t).
    pub fn infected_at(&self, t: u32) -> usize {
        self.neighbor_infection_times
            .iter()
            .flatten()
            .filter(|&&tj| tj <= t)
            .count()
    }
}

/// The eight real-valued features of the classification pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub degree: T,
    pub prop_infected: T,
    pub n_infected: T,
    pub sum_stimuli: T,
    pub mean_stimuli: T,
    pub std_stimuli: T,
    pub time_since_first: T,
    pub time_since_last: T,
}

/// Column names, in feature order.
pub const FEATURE_NAMES: [&str; 8] = [
    "degree",
    "prop_infected_nb",
    "n_infected_nb",
    "sum_stimuli",
    "mean_stimuli",
    "std_stimuli",
    "time_since_first_nb",
    "time_since_last_nb",
];

/// Sentinel for the time-since features when no neighbour was infected.
pub const NO_NEIGHBOR_SENTINEL: f64 = -1.0;

impl<T: Real> FeatureVector<T> {
    pub fn as_array(&self) -> [T; 8] {
        [
            self.degree,
            self.prop_infected,
            self.n_infected,
            self.sum_stimuli,
            self.mean_stimuli,
            self.std_stimuli,
            self.time_since_first,
            self.time_since_last,
        ]
    }

    pub fn from_array(a: [T; 8]) -> Self {
        FeatureVector {
            degree: a[0],
            prop_infected: a[1],
            n_infected: a[2],
            sum_stimuli: a[3],
            mean_stimuli: a[4],
            std_stimuli: a[5],
            time_since_first: a[6],
            time_since_last: a[7],
        }
    }
}

/// Builds the ego view of `node` from a synchronous cascade. Returns `None`
/// when the node never adopted or is the cascade seed (it has no firing
/// mechanism). Neighbour infection times are clipped to those before the
/// adoption; each infected neighbour delivers one stimulus per step.
pub fn observation_from_cascade<T: Real>(
    c: &CascadeRecord<T>,
    node: NodeId,
) -> Option<EgoObservation> {
    if c.seed_node == Some(node) {
        return None;
    }
    let t_a = c.adoption_time[node]?;
    let neighbors = c.graph.neighbors(node);
    let mut times = Vec::with_capacity(neighbors.len());
    let mut stimuli = Vec::with_capacity(neighbors.len());
    for &nb in neighbors {
        let tj = c.adoption_time[nb].filter(|&t| t < t_a);
        times.push(tj);
        stimuli.push(tj.map_or(0, |t| t_a - t));
    }
    Some(EgoObservation {
        ego: node,
        degree: neighbors.len(),
        adoption_time: t_a,
        neighbor_infection_times: times,
        neighbor_stimuli: stimuli,
        clock: ClockSemantics::Synchronous,
    })
}

/// One followee post in an ego's merged timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FolloweePost {
    /// Dense followee index within this ego's neighbourhood.
    pub followee: usize,
    /// Wall-clock timestamp (epoch seconds).
    pub ts: i64,
    /// Whether the post carries the target hashtag (a stimulus).
    pub is_stimulus: bool,
}

/// Time-ordered followee activity around one ego adoption.
#[derive(Debug, Clone)]
pub struct EgoEventStream {
    pub ego: NodeId,
    /// Wall-clock time of the ego's own adoption post.
    pub adoption_ts: i64,
    /// Followee posts sorted by timestamp (stable for ties).
    pub posts: Vec<FolloweePost>,
    pub n_followees: usize,
}

/// Builds an event-time observation from an ego's merged followee stream.
/// The event clock counts followee posts inside the window (wall-clock
/// seconds before the adoption; `None` keeps everything); the ego degree is
/// the number of followees with at least one post in the window. Returns
/// `None` when no followee was active (unclassifiable ego).
pub fn observation_from_events(
    stream: &EgoEventStream,
    window_secs: Option<i64>,
) -> Option<EgoObservation> {
    let lo = window_secs.map(|w| stream.adoption_ts - w);
    let in_window: Vec<&FolloweePost> = stream
        .posts
        .iter()
        .filter(|p| p.ts < stream.adoption_ts && lo.map_or(true, |lo| p.ts >= lo))
        .collect();
    if in_window.is_empty() {
        return None;
    }

    // Dense re-index of the followees active in the window, in ascending
    // original-index order.
    let mut active: Vec<usize> = in_window.iter().map(|p| p.followee).collect();
    active.sort_unstable();
    active.dedup();
    let slot = |f: usize| active.binary_search(&f).expect("active followee");

    let degree = active.len();
    let mut times: Vec<Option<u32>> = vec![None; degree];
    let mut stimuli: Vec<u32> = vec![0; degree];
    for (idx, post) in in_window.iter().enumerate() {
        let event_time = (idx + 1) as u32;
        if post.is_stimulus {
            let s = slot(post.followee);
            stimuli[s] += 1;
            if times[s].is_none() {
                times[s] = Some(event_time);
            }
        }
    }
    Some(EgoObservation {
        ego: stream.ego,
        degree,
        adoption_time: in_window.len() as u32,
        neighbor_infection_times: times,
        neighbor_stimuli: stimuli,
        clock: ClockSemantics::EventTime,
    })
}

/// Extracts the eight features. The mean and standard deviation of stimuli
/// average over all observed neighbours (zeros included), so
/// `mean_stimuli * degree == sum_stimuli` exactly; the std is the population
/// standard deviation. When no neighbour was infected the time-since
/// features take the sentinel value -1.
pub fn extract<T: Real>(obs: &EgoObservation) -> Result<FeatureVector<T>> {
    let k = obs.degree;
    if k == 0 {
        return Err(Error::Config("cannot extract features for degree 0".into()));
    }
    debug_assert_eq!(obs.neighbor_infection_times.len(), k);
    debug_assert_eq!(obs.neighbor_stimuli.len(), k);

    let kf = T::from_count(k);
    let f3 = obs.n_infected_neighbors();
    let f4 = obs.sum_stimuli();
    let mean = T::from_f64(f4 as f64).unwrap() / kf;
    let var = obs
        .neighbor_stimuli
        .iter()
        .map(|&c| {
            let d = T::from_f64(c as f64).unwrap() - mean;
            d * d
        })
        .sum::<T>()
        / kf;
    let sentinel = T::from_config(NO_NEIGHBOR_SENTINEL);
    let (f7, f8) = match (obs.first_infection_time(), obs.last_infection_time()) {
        (Some(first), Some(last)) => (
            T::from_f64((obs.adoption_time - first) as f64).unwrap(),
            T::from_f64((obs.adoption_time - last) as f64).unwrap(),
        ),
        _ => (sentinel, sentinel),
    };
    Ok(FeatureVector {
        degree: kf,
        prop_infected: T::from_count(f3) / kf,
        n_infected: T::from_count(f3),
        sum_stimuli: T::from_f64(f4 as f64).unwrap(),
        mean_stimuli: mean,
        std_stimuli: var.sqrt(),
        time_since_first: f7,
        time_since_last: f8,
    })
}

/// One labelled row of a feature dataset.
#[derive(Debug, Clone)]
pub struct FeatureRow<T> {
    pub features: FeatureVector<T>,
    pub label: Option<Mechanism>,
    pub beta_hat: Option<T>,
    pub phi_hat: Option<T>,
}

/// Writes a feature dataset: the eight feature columns plus `label`,
/// `beta_hat` and `phi_hat`.
pub fn write_features_csv<T: Real, W: Write>(rows: &[FeatureRow<T>], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.extend(["label", "beta_hat", "phi_hat"]);
    wtr.write_record(&header)?;
    for row in rows {
        let mut rec: Vec<String> = row.features.as_array().iter().map(|v| v.to_string()).collect();
        rec.push(row.label.map(|m| m.label().to_string()).unwrap_or_default());
        rec.push(row.beta_hat.map(|b| b.to_string()).unwrap_or_default());
        rec.push(row.phi_hat.map(|p| p.to_string()).unwrap_or_default());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))
}

pub fn read_features_csv<T: Real, R: std::io::Read>(r: R) -> Result<Vec<FeatureRow<T>>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| -> Result<T> {
            s.parse::<f64>()
                .map(|v| T::from_f64(v).unwrap())
                .map_err(|_| Error::Parse {
                    line: idx + 2,
                    message: format!("bad number {s:?}"),
                })
        };
        let mut vals = [T::zero(); 8];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = parse(&rec[i])?;
        }
        let label = match rec.get(8).unwrap_or("") {
            "" => None,
            s => Some(Mechanism::parse(s).ok_or(Error::Parse {
                line: idx + 2,
                message: format!("bad label {s:?}"),
            })?),
        };
        let opt = |i: usize| -> Result<Option<T>> {
            match rec.get(i).unwrap_or("") {
                "" => Ok(None),
                s => parse(s).map(Some),
            }
        };
        rows.push(FeatureRow {
            features: FeatureVector::from_array(vals),
            label,
            beta_hat: opt(9)?,
            phi_hat: opt(10)?,
        });
    }
    Ok(rows)
}

/// Writes observations with full neighbour timelines (the richer format the
/// likelihood classifiers need): times and stimuli are `;`-joined lists,
/// with `-` marking a never-infected neighbour.
pub fn write_observations_csv<W: Write>(
    rows: &[(EgoObservation, Option<Mechanism>)],
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["ego", "clock", "degree", "adoption_time", "nb_times", "nb_stimuli", "label"])?;
    for (obs, label) in rows {
        let times = obs
            .neighbor_infection_times
            .iter()
            .map(|t| t.map_or("-".to_string(), |x| x.to_string()))
            .collect::<Vec<_>>()
            .join(";");
        let stim = obs
            .neighbor_stimuli
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";");
        wtr.write_record([
            obs.ego.to_string(),
            match obs.clock {
                ClockSemantics::Synchronous => "sync".into(),
                ClockSemantics::EventTime => "event".into(),
            },
            obs.degree.to_string(),
            obs.adoption_time.to_string(),
            times,
            stim,
            label.map(|m| m.label().to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))
}

pub fn read_observations_csv<R: std::io::Read>(
    r: R,
) -> Result<Vec<(EgoObservation, Option<Mechanism>)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let bad = |message: String| Error::Parse { line, message };
        let ego: NodeId = rec[0].parse().map_err(|_| bad(format!("bad ego {:?}", &rec[0])))?;
        let clock = match &rec[1] {
            "sync" => ClockSemantics::Synchronous,
            "event" => ClockSemantics::EventTime,
            s => return Err(bad(format!("bad clock {s:?}"))),
        };
        let degree: usize = rec[2].parse().map_err(|_| bad("bad degree".into()))?;
        let t_a: u32 = rec[3].parse().map_err(|_| bad("bad adoption_time".into()))?;
        fn parse_list(s: &str) -> Vec<&str> {
            if s.is_empty() {
                Vec::new()
            } else {
                s.split(';').collect()
            }
        }
        let mut times = Vec::new();
        for tok in parse_list(&rec[4]) {
            times.push(match tok {
                "-" => None,
                t => Some(t.parse::<u32>().map_err(|_| bad(format!("bad time {t:?}")))?),
            });
        }
        let mut stim = Vec::new();
        for tok in parse_list(&rec[5]) {
            stim.push(tok.parse::<u32>().map_err(|_| bad(format!("bad count {tok:?}")))?);
        }
        if times.len() != degree || stim.len() != degree {
            return Err(bad(format!(
                "expected {degree} neighbour entries, got {} times and {} counts",
                times.len(),
                stim.len()
            )));
        }
        let label = match rec.get(6).unwrap_or("") {
            "" => None,
            s => Some(Mechanism::parse(s).ok_or_else(|| bad(format!("bad label {s:?}")))?),
        };
        out.push((
            EgoObservation {
                ego,
                degree,
                adoption_time: t_a,
                neighbor_infection_times: times,
                neighbor_stimuli: stim,
                clock,
            },
            label,
        ));
    }
    Ok(out)
}
