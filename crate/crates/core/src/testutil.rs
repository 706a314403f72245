//! Shared fixtures for unit tests.

use crate::graph::{Edge, WeightedGraph};

pub(crate) fn path_graph(n: usize) -> WeightedGraph {
    let edges = (0..n - 1)
        .map(|i| Edge {
            a: i,
            b: i + 1,
            length: 1.0,
            conductance: 1.0,
        })
        .collect();
    WeightedGraph::new(n, edges, vec![1.0; n]).unwrap()
}

pub(crate) fn two_vertex_graph() -> WeightedGraph {
    WeightedGraph::new(
        2,
        vec![Edge {
            a: 0,
            b: 1,
            length: 1.0,
            conductance: 1.0,
        }],
        vec![1.0, 1.0],
    )
    .unwrap()
}

/// Deterministic connected random graph with unit lengths and varied
/// conductances and measures.
pub(crate) fn random_graph(n: usize, seed: u64) -> WeightedGraph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push(Edge {
            a: j,
            b: i,
            length: 1.0,
            conductance: 0.5 + rng.random::<f64>(),
        });
    }
    for _ in 0..n {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b && !edges.iter().any(|e| (e.a, e.b) == (a.min(b), a.max(b))) {
            edges.push(Edge {
                a: a.min(b),
                b: a.max(b),
                length: 1.0,
                conductance: 0.5 + rng.random::<f64>(),
            });
        }
    }
    let measure = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    WeightedGraph::new(n, edges, measure).unwrap()
}
