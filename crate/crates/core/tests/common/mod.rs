#![allow(dead_code)]

use ergodic_core::{BratteliDiagram, Edge, WeightedSystem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A valid diagram: every vertex has an incoming edge (from level 1 on) and
/// an outgoing edge (below the top), plus a few extra and parallel edges.
pub fn random_diagram(rng: &mut StdRng, levels: usize, max_vertices: usize) -> BratteliDiagram {
    let sizes: Vec<usize> = (0..=levels).map(|_| rng.gen_range(1..=max_vertices)).collect();
    let mut edges = Vec::with_capacity(levels);
    for n in 1..=levels {
        let (below, above) = (sizes[n - 1], sizes[n]);
        let mut level: Vec<Edge> = (0..above).map(|w| Edge::new(rng.gen_range(0..below), w)).collect();
        for v in 0..below {
            if !level.iter().any(|e| e.source == v) {
                level.push(Edge::new(v, rng.gen_range(0..above)));
            }
        }
        for _ in 0..rng.gen_range(0..=below * above) {
            level.push(Edge::new(rng.gen_range(0..below), rng.gen_range(0..above)));
        }
        edges.push(level);
    }
    let d = BratteliDiagram::from_sizes(&sizes, edges).unwrap();
    assert!(d.is_valid());
    d
}

pub fn random_weights(rng: &mut StdRng, d: &BratteliDiagram) -> Vec<Vec<f64>> {
    d.all_edges()
        .iter()
        .map(|level| level.iter().map(|_| rng.gen_range(0.1..5.0)).collect())
        .collect()
}

pub fn random_system(rng: &mut StdRng, levels: usize, max_vertices: usize) -> WeightedSystem {
    let d = random_diagram(rng, levels, max_vertices);
    let w = random_weights(rng, &d);
    WeightedSystem::new(d, w).unwrap()
}

/// Strictly positive `size x size` matrix, row-major.
pub fn random_positive(rng: &mut StdRng, size: usize) -> Vec<f64> {
    (0..size * size).map(|_| rng.gen_range(0.05..3.0)).collect()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
