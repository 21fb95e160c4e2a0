//! Asynchronous activity-driven contagion with observable detection.
//!
//! One node acts per event step, chosen with probability proportional to its
//! activity. Infected nodes pass through two stages: aware (convinced but
//! not yet observable) and detected (first influencing post seen). The gap
//! between the two is the waiting time that biases every downstream
//! observation.

use std::sync::Arc;

use rand::Rng;

use crate::contagion::{Mechanism, NodeAssignment};
use crate::error::{Error, Result};
use crate::netgen::{Graph, NodeId};
use crate::scalar::Real;
use crate::seeds;

/// Logarithmic degree classes: 1, 2, 3-4, 5-8, 9-16, ... Keeps class counts
/// balanced on heavy-tailed degree distributions.
pub fn degree_class(k: usize) -> usize {
    match k {
        0 | 1 => 0,
        _ => (usize::BITS - (k - 1).leading_zeros()) as usize,
    }
}

/// Lower bound of a degree class, for reporting.
pub fn degree_class_floor(class: usize) -> usize {
    match class {
        0 => 1,
        c => (1 << (c - 1)) + 1,
    }
}

/// Per-node activities sampled from degree-class means.
#[derive(Debug, Clone)]
pub struct ActivityTable<T> {
    /// Mean activity per degree class, as passed in.
    pub class_means: Vec<T>,
    /// Sampled activity per node, in (0, 1].
    pub activities: Vec<T>,
}

/// Samples one activity per node from a normal centred on the node's
/// degree-class mean, re-drawing non-positive values and clipping into
/// (0, 1]. `spread = 0` degenerates to the class mean itself.
pub fn assign_activities<T: Real>(
    g: &Graph,
    class_means: &[T],
    spread: T,
    seed: u64,
) -> Result<ActivityTable<T>> {
    if spread < T::zero() {
        return Err(Error::Parameter(format!("spread = {spread} must be >= 0")));
    }
    for (c, &m) in class_means.iter().enumerate() {
        if m <= T::zero() {
            return Err(Error::Config(format!("class {c} mean {m} must be positive")));
        }
    }
    let mut rng = seeds::rng_for(seed, &[0x6163]);
    let mut activities = Vec::with_capacity(g.n_nodes());
    for node in g.node_ids() {
        let class = degree_class(g.degree(node));
        let mean = *class_means.get(class).ok_or_else(|| {
            Error::Config(format!(
                "degree class {class} (degree {}) has no configured mean",
                g.degree(node)
            ))
        })?;
        let a = if spread == T::zero() {
            mean
        } else {
            loop {
                let draw = mean + spread * T::std_normal(&mut rng);
                if draw > T::zero() {
                    break draw;
                }
            }
        };
        activities.push(a.min(T::one()));
    }
    Ok(ActivityTable {
        class_means: class_means.to_vec(),
        activities,
    })
}

/// Event log of one activity-driven cascade.
#[derive(Debug, Clone)]
pub struct TemporalCascadeRecord<T> {
    pub graph: Arc<Graph>,
    pub assignments: Arc<Vec<Option<NodeAssignment<T>>>>,
    pub activities: Arc<Vec<T>>,
    pub r: T,
    pub seed_node: NodeId,
    /// Acting node per event step; step s is `acting[s - 1]`.
    pub acting: Vec<NodeId>,
    pub aware_time: Vec<Option<u32>>,
    pub detected_time: Vec<Option<u32>>,
    pub fired: Vec<Option<Mechanism>>,
    /// Whether the stop fraction was reached before the step cap.
    pub complete: bool,
}

impl<T: Real> TemporalCascadeRecord<T> {
    pub fn n_aware(&self) -> usize {
        self.aware_time.iter().flatten().count()
    }

    /// Whether the actor's post at step `s` carried the hashtag (it was
    /// aware or detected before acting).
    pub fn is_influencing_post(&self, s: u32) -> bool {
        let actor = self.acting[(s - 1) as usize];
        self.aware_time[actor].map_or(false, |t| t < s)
    }
}

/// One event step per iteration: the acting node posts. Susceptible actors
/// draw spontaneous adoption first and otherwise re-check their threshold;
/// aware actors become detected; any post by an aware-or-detected node
/// delivers one stimulus to every neighbour, which simple neighbours answer
/// with an immediate adoption draw and complex neighbours with a threshold
/// check against the aware-or-detected fraction.
pub fn simulate_activity_driven<T: Real>(
    g: Arc<Graph>,
    activities: Arc<Vec<T>>,
    assignments: Arc<Vec<Option<NodeAssignment<T>>>>,
    r: T,
    stop_fraction: f64,
    max_steps: Option<usize>,
    seed: u64,
) -> Result<TemporalCascadeRecord<T>> {
    let n = g.n_nodes();
    if activities.len() != n {
        return Err(Error::Config("activities must cover all nodes".into()));
    }
    if assignments.len() != n || assignments.iter().any(Option::is_none) {
        return Err(Error::Config("assignments must cover all nodes".into()));
    }
    if r < T::zero() || r > T::one() {
        return Err(Error::Parameter(format!("r = {r} not in [0, 1]")));
    }
    if !(stop_fraction > 0.0 && stop_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "stop_fraction = {stop_fraction} not in (0, 1]"
        )));
    }
    let total_activity: T = activities.iter().copied().sum();
    if total_activity <= T::zero() {
        return Err(Error::Config("all activities are zero".into()));
    }

    // Cumulative activity for O(log n) weighted node selection.
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = T::zero();
    for &a in activities.iter() {
        if a < T::zero() {
            return Err(Error::Config("negative activity".into()));
        }
        acc = acc + a;
        cumulative.push(acc);
    }
    let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> NodeId {
        let x = T::unit(rng) * acc;
        // first node whose cumulative activity exceeds the draw; such a node
        // always has positive activity
        cumulative.partition_point(|&c| c <= x).min(n - 1)
    };

    let mut rng = seeds::rng_for(seed, &[0x7464]);
    let seed_node = rng.gen_range(0..n);

    let mut aware_time: Vec<Option<u32>> = vec![None; n];
    let mut detected_time: Vec<Option<u32>> = vec![None; n];
    let mut fired: Vec<Option<Mechanism>> = vec![None; n];
    let mut aware_nb_count = vec![0usize; n];

    let mut infected = 1usize; // aware or detected
    aware_time[seed_node] = Some(0);
    for &nb in g.neighbors(seed_node) {
        aware_nb_count[nb] += 1;
    }

    let stop_count = ((stop_fraction * n as f64).ceil() as usize).max(1);
    let cap = max_steps.unwrap_or(4_000 * n);
    let mut acting = Vec::new();
    let mut complete = infected >= stop_count;

    let mut step: u32 = 0;
    while (infected < stop_count) && (acting.len() < cap) {
        step += 1;
        let actor = pick(&mut rng);
        acting.push(actor);

        let actor_aware_before = aware_time[actor].map_or(false, |t| t < step);
        if !actor_aware_before && aware_time[actor].is_none() {
            // susceptible actor: spontaneous draw, then a threshold re-check
            // (its neighbourhood may have crossed since the last stimulus)
            let mut became = None;
            if T::unit(&mut rng) < r {
                became = Some(Mechanism::St);
            } else if let Some(NodeAssignment::Complex { phi }) = assignments[actor] {
                if crate::contagion::threshold_reached(aware_nb_count[actor], g.degree(actor), phi)
                {
                    became = Some(Mechanism::Cx);
                }
            }
            if let Some(mech) = became {
                aware_time[actor] = Some(step);
                fired[actor] = Some(mech);
                infected += 1;
                for &nb in g.neighbors(actor) {
                    aware_nb_count[nb] += 1;
                }
            }
            // the post itself carries no influence
        } else if actor_aware_before {
            if detected_time[actor].is_none() {
                detected_time[actor] = Some(step);
            }
            // influencing post: one stimulus to every susceptible neighbour
            let mut converted: Vec<(NodeId, Mechanism)> = Vec::new();
            for &nb in g.neighbors(actor) {
                if aware_time[nb].is_some() {
                    continue;
                }
                match assignments[nb].as_ref().unwrap() {
                    NodeAssignment::Simple { beta } => {
                        if T::unit(&mut rng) < *beta {
                            converted.push((nb, Mechanism::Sm));
                        }
                    }
                    NodeAssignment::Complex { phi } => {
                        if crate::contagion::threshold_reached(
                            aware_nb_count[nb],
                            g.degree(nb),
                            *phi,
                        ) {
                            converted.push((nb, Mechanism::Cx));
                        }
                    }
                }
            }
            for (nb, mech) in converted {
                if aware_time[nb].is_some() {
                    continue;
                }
                aware_time[nb] = Some(step);
                fired[nb] = Some(mech);
                infected += 1;
                for &nb2 in g.neighbors(nb) {
                    aware_nb_count[nb2] += 1;
                }
            }
        }
        // else: became aware at this very step; nothing more happens

        if infected >= stop_count {
            complete = true;
        }
    }

    Ok(TemporalCascadeRecord {
        graph: g,
        assignments,
        activities,
        r,
        seed_node,
        acting,
        aware_time,
        detected_time,
        fired,
        complete,
    })
}

/// Per-node action steps, for observation building.
pub fn action_steps<T: Real>(c: &TemporalCascadeRecord<T>) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); c.graph.n_nodes()];
    for (i, &actor) in c.acting.iter().enumerate() {
        out[actor].push((i + 1) as u32);
    }
    out
}

/// Builds the observable ego view of one detected adopter, mirroring the
/// platform semantics: the clock counts neighbour posts, a stimulus is a
/// neighbour post made while aware or detected, neighbours are observed
/// infected at their first influencing post, and the ego's adoption is its
/// own detection post. Returns `None` for the seed, nodes never detected,
/// or egos without active neighbours.
pub fn observation_of<T: Real>(
    c: &TemporalCascadeRecord<T>,
    actions: &[Vec<u32>],
    node: NodeId,
) -> Option<crate::features::EgoObservation> {
    if node == c.seed_node {
        return None;
    }
    let detected = c.detected_time[node]?;
    let mut posts: Vec<crate::features::FolloweePost> = Vec::new();
    for (f_idx, &nb) in c.graph.neighbors(node).iter().enumerate() {
        for &s in &actions[nb] {
            if s >= detected {
                break;
            }
            posts.push(crate::features::FolloweePost {
                followee: f_idx,
                ts: s as i64,
                is_stimulus: c.aware_time[nb].map_or(false, |t| t < s),
            });
        }
    }
    posts.sort_unstable_by_key(|p| p.ts);
    let stream = crate::features::EgoEventStream {
        ego: node,
        adoption_ts: detected as i64,
        posts,
        n_followees: c.graph.degree(node),
    };
    crate::features::observation_from_events(&stream, None)
}

/// Waiting times `detected - aware`, one per node with both set.
pub fn waiting_times<T: Real>(c: &TemporalCascadeRecord<T>) -> Vec<u32> {
    c.aware_time
        .iter()
        .zip(&c.detected_time)
        .filter_map(|(a, d)| match (a, d) {
            (Some(a), Some(d)) => Some(d - a),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{generate, ModelSpec};

    fn star(n_leaves: usize) -> Arc<Graph> {
        let edges: Vec<(NodeId, NodeId)> = (1..=n_leaves).map(|l| (0, l)).collect();
        Arc::new(Graph::from_edges(n_leaves + 1, &edges).unwrap())
    }

    #[test]
    fn degree_classes_are_log_bins() {
        assert_eq!(degree_class(1), 0);
        assert_eq!(degree_class(2), 1);
        assert_eq!(degree_class(3), 2);
        assert_eq!(degree_class(4), 2);
        assert_eq!(degree_class(5), 3);
        assert_eq!(degree_class(8), 3);
        assert_eq!(degree_class(9), 4);
        assert_eq!(degree_class_floor(3), 5);
    }

    #[test]
    fn zero_spread_returns_class_means_clipped() {
        let g = star(3);
        let table = assign_activities(&g, &[0.4f64, 0.0f64.max(0.7), 1.5], 0.0, 1).unwrap();
        // center has degree 3 (class 2), leaves degree 1 (class 0)
        assert_eq!(table.activities[0], 1.0); // clipped from 1.5
        assert!(table.activities[1..].iter().all(|&a| a == 0.4));
    }

    #[test]
    fn sampled_activities_concentrate_on_the_mean() {
        let edges: Vec<(NodeId, NodeId)> = (0..100_000).step_by(2).map(|i| (i, i + 1)).collect();
        let g = Graph::from_edges(100_000, &edges).unwrap();
        let table = assign_activities(&g, &[0.5f64], 0.1, 7).unwrap();
        let mean: f64 = table.activities.iter().sum::<f64>() / table.activities.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "sample mean {mean}");
        assert!(table.activities.iter().all(|&a| a > 0.0 && a <= 1.0));
    }

    #[test]
    fn uncovered_degree_class_is_a_config_error() {
        let g = star(8); // center degree 8 -> class 3
        assert!(matches!(
            assign_activities::<f64>(&g, &[0.5], 0.1, 1),
            Err(Error::Config(_))
        ));
    }

    fn uniform_assignments<T: Real>(n: usize, a: NodeAssignment<T>) -> Arc<Vec<Option<NodeAssignment<T>>>> {
        Arc::new(vec![Some(a); n])
    }

    #[test]
    fn lone_aware_node_detects_at_next_action() {
        // two nodes; only the seed has positive activity, so it must act at
        // step 1 and detect itself with waiting time 1.
        let g = Arc::new(Graph::from_edges(2, &[(0, 1)]).unwrap());
        for seed in 0..20 {
            let c = simulate_activity_driven(
                Arc::clone(&g),
                Arc::new(vec![1.0f64, 1.0]),
                uniform_assignments(2, NodeAssignment::Simple { beta: 0.0 }),
                0.0,
                1.0,
                Some(500),
                seed,
            )
            .unwrap();
            let s = c.seed_node;
            if let Some(d) = c.detected_time[s] {
                let w = d - c.aware_time[s].unwrap();
                assert!(w >= 1);
                // the first action of the seed detects it
                let first_action = c
                    .acting
                    .iter()
                    .position(|&a| a == s)
                    .map(|i| (i + 1) as u32);
                assert_eq!(Some(d), first_action);
            }
        }
    }

    #[test]
    fn zero_activity_node_never_detects() {
        let g = Arc::new(Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
        // node 2 never acts; it can become aware through stimuli but never
        // detected (when it happens to seed the cascade, nothing spreads)
        let mut spread_seen = false;
        for seed in 0..10 {
            let c = simulate_activity_driven(
                Arc::clone(&g),
                Arc::new(vec![1.0f64, 1.0, 0.0]),
                uniform_assignments(3, NodeAssignment::Simple { beta: 1.0 }),
                0.0,
                1.0,
                Some(2_000),
                seed,
            )
            .unwrap();
            assert_eq!(c.detected_time[2], None);
            assert!(c.acting.iter().all(|&a| a != 2));
            if c.seed_node != 2 {
                assert!(c.n_aware() >= 2);
                spread_seen = true;
            }
        }
        assert!(spread_seen);
    }

    #[test]
    fn state_machine_is_monotone_and_waiting_times_positive() {
        let g = Arc::new(generate(&ModelSpec::Er { n: 300, p: 0.015 }, 2).unwrap());
        let n = g.n_nodes();
        let assignments: Vec<Option<NodeAssignment<f64>>> = (0..n)
            .map(|i| {
                Some(if i % 2 == 0 {
                    NodeAssignment::Simple { beta: 0.4 }
                } else {
                    NodeAssignment::Complex { phi: 0.3 }
                })
            })
            .collect();
        let activities: Vec<f64> = (0..n).map(|i| 0.2 + 0.6 * ((i * 37) % 100) as f64 / 100.0).collect();
        let c = simulate_activity_driven(
            Arc::clone(&g),
            Arc::new(activities),
            Arc::new(assignments),
            0.002,
            0.9,
            None,
            11,
        )
        .unwrap();
        assert!(c.complete);
        for node in 0..n {
            if let Some(d) = c.detected_time[node] {
                assert!(c.aware_time[node].unwrap() < d);
            }
        }
        for w in waiting_times(&c) {
            assert!(w >= 1);
        }
        // ground truth: complex firings crossed their threshold
        for node in 0..n {
            if c.fired[node] == Some(Mechanism::Cx) {
                let t = c.aware_time[node].unwrap();
                let n_aware = g
                    .neighbors(node)
                    .iter()
                    .filter(|&&nb| c.aware_time[nb].is_some_and(|tn| tn < t))
                    .count();
                assert!(crate::contagion::threshold_reached(n_aware, g.degree(node), 0.3));
            }
        }
    }

    #[test]
    fn waiting_time_matches_geometric_selection_rate() {
        // isolated aware node with activity a among inert-but-active others:
        // its waiting time is geometric with p = a / total.
        let n = 50usize;
        let g = Arc::new(Graph::from_edges(n, &[(0, 1)]).unwrap());
        let mut activities = vec![1.0f64; n];
        activities[0] = 2.0_f64.min(1.0);
        let p = 1.0 / n as f64;
        let mut draws = Vec::new();
        for seed in 0..4000 {
            let c = simulate_activity_driven(
                Arc::clone(&g),
                Arc::new(activities.clone()),
                uniform_assignments(n, NodeAssignment::Simple { beta: 0.0 }),
                0.0,
                1.0,
                Some(5_000),
                seed,
            )
            .unwrap();
            let s = c.seed_node;
            if let (Some(a), Some(d)) = (c.aware_time[s], c.detected_time[s]) {
                draws.push((d - a) as f64);
            }
        }
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let expected = 1.0 / p;
        // standard error of the mean of a geometric at this sample size
        let se = (1.0f64 - p).sqrt() / p / (draws.len() as f64).sqrt();
        assert!(
            (mean - expected).abs() < 4.0 * se + 1.0,
            "mean waiting {mean} vs geometric mean {expected}"
        );
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = Arc::new(generate(&ModelSpec::Er { n: 120, p: 0.03 }, 5).unwrap());
        let n = g.n_nodes();
        let act = Arc::new(vec![0.5f64; n]);
        let asg = uniform_assignments(n, NodeAssignment::Simple { beta: 0.5 });
        let a = simulate_activity_driven(Arc::clone(&g), Arc::clone(&act), Arc::clone(&asg), 0.01, 0.9, None, 42).unwrap();
        let b = simulate_activity_driven(g, act, asg, 0.01, 0.9, None, 42).unwrap();
        assert_eq!(a.acting, b.acting);
        assert_eq!(a.aware_time, b.aware_time);
        assert_eq!(a.detected_time, b.detected_time);
    }
}
