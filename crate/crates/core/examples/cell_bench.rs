//! Timing probe for one synthetic cell pool.
use contagion_lens::contagion::{simulate_network, Mechanism, NodeAssignment};
use contagion_lens::netgen::{generate, ModelSpec};
use std::sync::Arc;

fn main() {
    let g = Arc::new(generate(&ModelSpec::Er { n: 1000, p: 0.004 }, 7).unwrap());
    println!("graph n={} m={}", g.n_nodes(), g.n_edges());
    for (beta, phi) in [(0.9, 0.1), (0.1, 0.9), (0.5, 0.5), (0.1, 0.1), (0.9, 0.9)] {
        let n = g.n_nodes();
        let assignments: Vec<Option<NodeAssignment<f64>>> = (0..n)
            .map(|i| {
                Some(if i % 2 == 0 {
                    NodeAssignment::Simple { beta }
                } else {
                    NodeAssignment::Complex { phi }
                })
            })
            .collect();
        let t0 = std::time::Instant::now();
        let mut st = 0;
        let mut horizon = 0;
        let reps = 5;
        for s in 0..reps as u64 {
            let rec = simulate_network(Arc::clone(&g), Arc::new(assignments.clone()), 0.005, 1.0, 200_000, s).unwrap();
            st += rec.count_fired(Mechanism::St);
            horizon = horizon.max(rec.horizon);
        }
        println!(
            "cell ({beta},{phi}): {:?} for {reps} cascades, st/cascade={}, max horizon={}",
            t0.elapsed(),
            st / reps as usize,
            horizon
        );
    }
}
