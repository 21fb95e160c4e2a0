use std::collections::BTreeSet;

use rand::Rng;

use super::graph::{Graph, NodeId};
use crate::error::{Error, Result};

/// Degree law for star-ensemble centers.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DegreeLaw {
    /// Binomial(n, p) conditioned on k >= 1, drawn by rejection.
    TruncatedBinomial { n: u64, p: f64 },
    /// Constant degree, mostly for tests and toys.
    Fixed { k: usize },
}

impl DegreeLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            DegreeLaw::TruncatedBinomial { n, p } => {
                if *n == 0 {
                    return Err(Error::Parameter("degree law: n must be >= 1".into()));
                }
                if !(0.0..=1.0).contains(p) || *p <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "degree law: p = {p} must be in (0, 1]"
                    )));
                }
                Ok(())
            }
            DegreeLaw::Fixed { k } => {
                if *k == 0 {
                    Err(Error::Parameter("degree law: k must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// One degree draw; rejection keeps the zero-truncation exact.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            DegreeLaw::TruncatedBinomial { n, p } => {
                let dist = rand_distr::Binomial::new(*n, *p).expect("validated parameters");
                loop {
                    let k = rng.sample(dist);
                    if k > 0 {
                        return k as usize;
                    }
                }
            }
            DegreeLaw::Fixed { k } => *k,
        }
    }

    /// Probability mass function over k >= 1 (renormalised after truncation).
    pub fn pmf(&self) -> Vec<(usize, f64)> {
        match self {
            DegreeLaw::TruncatedBinomial { n, p } => {
                let n = *n as usize;
                let p = *p;
                let q = 1.0 - p;
                // Iterate the binomial pmf recursively; start from k = 0.
                let mut mass = q.powi(n as i32);
                let z = 1.0 - mass;
                let mut out = Vec::new();
                for k in 1..=n {
                    mass *= (n - k + 1) as f64 / k as f64 * (p / q);
                    let w = mass / z;
                    if w < 1e-15 && k as f64 > n as f64 * p {
                        break;
                    }
                    out.push((k, w));
                }
                let total: f64 = out.iter().map(|&(_, w)| w).sum();
                for (_, w) in &mut out {
                    *w /= total;
                }
                out
            }
            DegreeLaw::Fixed { k } => vec![(*k, 1.0)],
        }
    }
}

/// G(n, p) by geometric edge skipping; O(n + m) for sparse graphs.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    if p >= 1.0 {
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        return Graph::from_edges(n, &edges).expect("complete graph is simple");
    }
    if p > 0.0 {
        let lq = (1.0 - p).ln();
        let (mut v, mut w): (usize, i64) = (1, -1);
        while v < n {
            let r: f64 = rng.gen();
            w += 1 + ((1.0 - r).ln() / lq).floor() as i64;
            while v < n && w >= v as i64 {
                w -= v as i64;
                v += 1;
            }
            if v < n {
                edges.push((w as usize, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("skip sampling yields a simple graph")
}

/// Barabási–Albert preferential attachment: node `m_attach` connects to all
/// earlier nodes, every later node attaches to `m_attach` distinct targets
/// drawn proportionally to degree.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, m_attach: usize, rng: &mut R) -> Graph {
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(m_attach * n);
    // Endpoint pool: each node appears once per incident edge.
    let mut pool: Vec<NodeId> = Vec::with_capacity(2 * m_attach * n);
    let mut targets: Vec<NodeId> = (0..m_attach).collect();
    for u in m_attach..n {
        for &t in &targets {
            edges.push((t, u));
            pool.push(t);
            pool.push(u);
        }
        let mut picked = BTreeSet::new();
        while picked.len() < m_attach {
            picked.insert(pool[rng.gen_range(0..pool.len())]);
        }
        targets = picked.into_iter().collect();
    }
    Graph::from_edges(n, &edges).expect("attachment avoids loops and duplicates")
}

/// Watts–Strogatz ring of degree `k_ring` with per-edge rewiring.
pub fn watts_strogatz<R: Rng + ?Sized>(n: usize, k_ring: usize, rewire_p: f64, rng: &mut R) -> Graph {
    let mut nbrs: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=(k_ring / 2) {
            let v = (u + j) % n;
            nbrs[u].insert(v);
            nbrs[v].insert(u);
        }
    }
    for u in 0..n {
        for j in 1..=(k_ring / 2) {
            let v = (u + j) % n;
            if rng.gen::<f64>() >= rewire_p || !nbrs[u].contains(&v) {
                continue;
            }
            if nbrs[u].len() >= n - 1 {
                continue; // saturated; nothing to rewire to
            }
            let w = loop {
                let cand = rng.gen_range(0..n);
                if cand != u && !nbrs[u].contains(&cand) {
                    break cand;
                }
            };
            nbrs[u].remove(&v);
            nbrs[v].remove(&u);
            nbrs[u].insert(w);
            nbrs[w].insert(u);
        }
    }
    let edges: Vec<(NodeId, NodeId)> = nbrs
        .iter()
        .enumerate()
        .flat_map(|(u, set)| set.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect();
    Graph::from_edges(n, &edges).expect("rewiring preserves simplicity")
}

/// Stochastic block model over a symmetric block probability matrix.
pub fn stochastic_block<R: Rng + ?Sized>(
    block_sizes: &[usize],
    p: &[Vec<f64>],
    rng: &mut R,
) -> Graph {
    let n: usize = block_sizes.iter().sum();
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat(b).take(size));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p[block_of[u]][block_of[v]] {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("pairwise sampling is simple")
}

/// Disjoint union of stars; center degrees drawn from `degree_law`.
pub fn star_ensemble<R: Rng + ?Sized>(n_egos: usize, degree_law: &DegreeLaw, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    let mut next = 0usize;
    for _ in 0..n_egos {
        let k = degree_law.sample(rng);
        let center = next;
        for leaf in 1..=k {
            edges.push((center, center + leaf));
        }
        next += k + 1;
    }
    Graph::from_edges(next, &edges).expect("star union is simple")
}
