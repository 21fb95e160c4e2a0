//! Network substrates for the cascade experiments.
//!
//! Generators cover the models used across the experiments (Erdős–Rényi,
//! Barabási–Albert, Watts–Strogatz, stochastic block model, disjoint star
//! ensembles) plus plain edge-list files for empirical networks. All
//! generation is deterministic for a fixed `(spec, seed)` pair.

mod gen;
mod graph;
mod io;

pub use gen::DegreeLaw;
pub use graph::{
    degree_biased_subsample, largest_connected_component, Graph, NodeId, SubgraphResult,
};
pub use io::{load_edge_list, save_edge_list, GraphHeader, LoadedGraph};

use crate::error::{Error, Result};

/// Network model and its parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    /// G(n, p); the generated graph is the giant component of the raw sample.
    Er { n: usize, p: f64 },
    /// Preferential attachment, `m_attach` edges per new node.
    Ba { n: usize, m_attach: usize },
    /// Ring lattice of even degree `k_ring`, each edge rewired with `rewire_p`.
    Ws {
        n: usize,
        k_ring: usize,
        rewire_p: f64,
    },
    /// Stochastic block model with a symmetric block probability matrix.
    Sbm {
        block_sizes: Vec<usize>,
        p: Vec<Vec<f64>>,
    },
    /// Disjoint union of stars with center degrees drawn from `degree_law`.
    StarEnsemble { n_egos: usize, degree_law: DegreeLaw },
    /// Whitespace-separated edge list on disk.
    EdgeList { path: std::path::PathBuf },
}

impl ModelSpec {
    fn validate(&self) -> Result<()> {
        let prob = |p: f64, what: &str| {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                Err(Error::Parameter(format!("{what} = {p} not in [0, 1]")))
            } else {
                Ok(())
            }
        };
        match self {
            ModelSpec::Er { n, p } => {
                if *n == 0 {
                    return Err(Error::Parameter("er: n must be >= 1".into()));
                }
                prob(*p, "er: p")
            }
            ModelSpec::Ba { n, m_attach } => {
                if *m_attach == 0 {
                    return Err(Error::Parameter("ba: m_attach must be >= 1".into()));
                }
                if m_attach >= n {
                    return Err(Error::Parameter(format!(
                        "ba: m_attach = {m_attach} must be < n = {n}"
                    )));
                }
                Ok(())
            }
            ModelSpec::Ws { n, k_ring, rewire_p } => {
                if *k_ring == 0 || k_ring % 2 != 0 {
                    return Err(Error::Parameter(format!(
                        "ws: k_ring = {k_ring} must be even and >= 2"
                    )));
                }
                if k_ring >= n {
                    return Err(Error::Parameter(format!(
                        "ws: k_ring = {k_ring} must be < n = {n}"
                    )));
                }
                prob(*rewire_p, "ws: rewire_p")
            }
            ModelSpec::Sbm { block_sizes, p } => {
                if block_sizes.is_empty() || block_sizes.iter().any(|&s| s == 0) {
                    return Err(Error::Parameter("sbm: block sizes must be >= 1".into()));
                }
                let b = block_sizes.len();
                if p.len() != b || p.iter().any(|row| row.len() != b) {
                    return Err(Error::Parameter(format!(
                        "sbm: probability matrix must be {b}x{b}"
                    )));
                }
                for (i, row) in p.iter().enumerate() {
                    for (j, &pij) in row.iter().enumerate() {
                        prob(pij, "sbm: p")?;
                        if (pij - p[j][i]).abs() > 0.0 {
                            return Err(Error::Parameter(format!(
                                "sbm: p[{i}][{j}] != p[{j}][{i}]"
                            )));
                        }
                    }
                }
                Ok(())
            }
            ModelSpec::StarEnsemble { n_egos, degree_law } => {
                if *n_egos == 0 {
                    return Err(Error::Parameter("star: n_egos must be >= 1".into()));
                }
                degree_law.validate()
            }
            ModelSpec::EdgeList { .. } => Ok(()),
        }
    }
}

/// Generates the network described by `spec`. Deterministic for a fixed
/// `(spec, seed)`; for [`ModelSpec::Er`] the returned graph is the giant
/// component of the raw sample.
pub fn generate(spec: &ModelSpec, seed: u64) -> Result<Graph> {
    spec.validate()?;
    let mut rng = crate::seeds::rng_for(seed, &[0x6e65]);
    match spec {
        ModelSpec::Er { n, p } => {
            let raw = gen::erdos_renyi(*n, *p, &mut rng);
            let lcc = largest_connected_component(&raw);
            if lcc.graph.n_edges() == 0 {
                return Err(Error::Generation(format!(
                    "er (n = {n}, p = {p}): giant component has no edges"
                )));
            }
            Ok(lcc.graph)
        }
        ModelSpec::Ba { n, m_attach } => Ok(gen::barabasi_albert(*n, *m_attach, &mut rng)),
        ModelSpec::Ws { n, k_ring, rewire_p } => {
            Ok(gen::watts_strogatz(*n, *k_ring, *rewire_p, &mut rng))
        }
        ModelSpec::Sbm { block_sizes, p } => Ok(gen::stochastic_block(block_sizes, p, &mut rng)),
        ModelSpec::StarEnsemble { n_egos, degree_law } => {
            Ok(gen::star_ensemble(*n_egos, degree_law, &mut rng))
        }
        ModelSpec::EdgeList { path } => Ok(load_edge_list(path)?.graph),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_degree(g: &Graph) -> f64 {
        2.0 * g.n_edges() as f64 / g.n_nodes() as f64
    }

    #[test]
    fn er_giant_component_mean_degree_near_four() {
        // Methods-level parameterisation: (n, p) = (1000, 0.004).
        let spec = ModelSpec::Er { n: 1000, p: 0.004 };
        let mean: f64 = (0..20)
            .map(|s| mean_degree(&generate(&spec, s).unwrap()))
            .sum::<f64>()
            / 20.0;
        assert!(
            (3.6..=4.4).contains(&mean),
            "mean degree over 20 seeds = {mean}"
        );
    }

    #[test]
    fn er_is_deterministic_per_seed() {
        let spec = ModelSpec::Er { n: 300, p: 0.01 };
        let a = generate(&spec, 9).unwrap();
        let b = generate(&spec, 9).unwrap();
        assert_eq!(a.edge_set(), b.edge_set());
        let c = generate(&spec, 10).unwrap();
        assert_ne!(a.edge_set(), c.edge_set());
    }

    #[test]
    fn star_ensemble_with_unit_degree_gives_two_node_stars() {
        let spec = ModelSpec::StarEnsemble {
            n_egos: 5,
            degree_law: DegreeLaw::Fixed { k: 1 },
        };
        let g = generate(&spec, 3).unwrap();
        assert_eq!(g.n_nodes(), 10);
        assert_eq!(g.n_edges(), 5);
        assert!(g.node_ids().all(|u| g.degree(u) == 1));
    }

    #[test]
    fn truncated_binomial_sampler_matches_closed_form_mean() {
        // Closed form for the zero-truncated binomial mean: Np / (1 - (1-p)^N).
        let law = DegreeLaw::TruncatedBinomial { n: 1000, p: 0.004 };
        let expected = 1000.0 * 0.004 / (1.0 - 0.996f64.powi(1000));
        let mut rng = crate::seeds::rng_for(17, &[]);
        let samples = 100_000;
        let mut sum = 0usize;
        let mut zero_seen = false;
        for _ in 0..samples {
            let k = law.sample(&mut rng);
            zero_seen |= k == 0;
            sum += k;
        }
        let mean = sum as f64 / samples as f64;
        assert!(!zero_seen);
        assert!(
            (mean - expected).abs() < 0.03,
            "sampled mean {mean} vs closed form {expected}"
        );
        // The pmf helper must agree with the closed form too.
        let pmf_mean: f64 = law.pmf().iter().map(|&(k, w)| k as f64 * w).sum();
        assert!((pmf_mean - expected).abs() < 1e-9);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            generate(&ModelSpec::Er { n: 10, p: 1.5 }, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            generate(&ModelSpec::Ba { n: 5, m_attach: 5 }, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            generate(&ModelSpec::Er { n: 50, p: 0.0 }, 0),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn ba_ws_sbm_have_expected_scale() {
        let ba = generate(&ModelSpec::Ba { n: 500, m_attach: 2 }, 1).unwrap();
        assert_eq!(ba.n_nodes(), 500);
        assert_eq!(ba.n_edges(), 2 * (500 - 2));

        let ws = generate(
            &ModelSpec::Ws {
                n: 400,
                k_ring: 4,
                rewire_p: 0.1,
            },
            1,
        )
        .unwrap();
        assert_eq!(ws.n_nodes(), 400);
        assert_eq!(ws.n_edges(), 800);

        let sbm = generate(
            &ModelSpec::Sbm {
                block_sizes: vec![200, 200],
                p: vec![vec![0.03, 0.005], vec![0.005, 0.03]],
            },
            1,
        )
        .unwrap();
        assert_eq!(sbm.n_nodes(), 400);
        let mean = mean_degree(&sbm);
        assert!((5.0..=9.0).contains(&mean), "sbm mean degree {mean}");
    }
}
