//! Standard diagram families used throughout the tests and the CLI
//! fixtures: Pascal's triangle, Fack–Maréchal systems, stationary diagrams.

use crate::cocycle::WeightedSystem;
use crate::diagram::{BratteliDiagram, Edge};
use crate::error::{invalid, Result};

/// Pascal's triangle: `V(n) = {0..=n}`, edges `j -> j` then `j -> j+1`.
pub fn pascal_diagram(levels: usize) -> BratteliDiagram {
    let sizes: Vec<usize> = (0..=levels).map(|n| n + 1).collect();
    let edges = (1..=levels)
        .map(|n| {
            (0..n)
                .flat_map(|j| [Edge::new(j, j), Edge::new(j, j + 1)])
                .collect()
        })
        .collect();
    BratteliDiagram::from_sizes(&sizes, edges).expect("pascal shape")
}

/// One vertex per level with `symbols` loops.
pub fn full_shift_diagram(symbols: usize, levels: usize) -> BratteliDiagram {
    stationary_diagram(1, &vec![(0, 0); symbols], levels)
}

/// `levels` copies of the same level graph on `vertex_count` vertices.
pub fn stationary_diagram(
    vertex_count: usize,
    edges: &[(usize, usize)],
    levels: usize,
) -> BratteliDiagram {
    let level: Vec<Edge> = edges.iter().map(|&(s, r)| Edge::new(s, r)).collect();
    BratteliDiagram::from_sizes(&vec![vertex_count; levels + 1], vec![level; levels])
        .expect("stationary shape")
}

/// Fack–Maréchal diagram with literal parallel edges: at level `n`, each
/// vertex `v` of a two-vertex level has `p[n-1]` loops to `v` and `r[n-1]`
/// edges to the other vertex.
pub fn fack_marechal_diagram(p: &[usize], r: &[usize]) -> Result<BratteliDiagram> {
    if p.len() != r.len() {
        return Err(invalid("p and r must have the same length"));
    }
    let edges = p
        .iter()
        .zip(r)
        .map(|(&pn, &rn)| {
            let mut level = Vec::with_capacity(2 * (pn + rn));
            for v in 0..2 {
                level.extend(std::iter::repeat(Edge::new(v, v)).take(pn));
                level.extend(std::iter::repeat(Edge::new(v, 1 - v)).take(rn));
            }
            level
        })
        .collect();
    BratteliDiagram::from_sizes(&vec![2; p.len() + 1], edges)
}

/// Pascal's triangle with `Φ ≡ 1`.
pub fn pascal(levels: usize) -> WeightedSystem {
    WeightedSystem::unweighted(pascal_diagram(levels)).expect("pascal is valid")
}

/// Fack–Maréchal system with one weighted edge standing in for each bundle of
/// parallel edges: the loop at `v` carries weight `p[n-1]`, the crossing edge
/// `r[n-1]`. Both give `A_n = [[p_n, r_n], [r_n, p_n]]`.
pub fn fack_marechal(p: &[f64], r: &[f64]) -> Result<WeightedSystem> {
    if p.len() != r.len() {
        return Err(invalid("p and r must have the same length"));
    }
    let diagram = stationary_diagram(2, &[(0, 0), (0, 1), (1, 1), (1, 0)], p.len());
    let weights = p.iter().zip(r).map(|(&pn, &rn)| vec![pn, rn, pn, rn]).collect();
    WeightedSystem::new(diagram, weights)
}

/// Stationary system with a fixed weight per level edge.
pub fn stationary(
    vertex_count: usize,
    edges: &[(usize, usize)],
    weights: &[f64],
    levels: usize,
) -> Result<WeightedSystem> {
    if edges.len() != weights.len() {
        return Err(invalid("one weight per edge required"));
    }
    let diagram = stationary_diagram(vertex_count, edges, levels);
    WeightedSystem::new(diagram, vec![weights.to_vec(); levels])
}

/// Stationary system with one edge `v -> w` for every pair, weighted by
/// `a[w * vertex_count + v]`, so that every `A_n` equals `a`.
pub fn stationary_complete(vertex_count: usize, a: &[f64], levels: usize) -> Result<WeightedSystem> {
    if a.len() != vertex_count * vertex_count {
        return Err(invalid("matrix must be vertex_count x vertex_count"));
    }
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for v in 0..vertex_count {
        for w in 0..vertex_count {
            edges.push((v, w));
            weights.push(a[w * vertex_count + v]);
        }
    }
    stationary(vertex_count, &edges, &weights, levels)
}

/// One vertex per level with loops weighted `weights`.
pub fn single_vertex_loops(weights: &[f64], levels: usize) -> Result<WeightedSystem> {
    stationary(1, &vec![(0, 0); weights.len()], weights, levels)
}
