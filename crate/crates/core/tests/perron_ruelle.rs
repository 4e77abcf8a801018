mod common;

use std::collections::HashMap;

use ergodic_core::contraction::{ratio_bound, variation};
use ergodic_core::linalg::mat_pow;
use ergodic_core::measures::{edge_probabilities, solve_state};
use ergodic_core::sft::{self, build_ruelle_matrix, eigen_measure, extend_cylinder_measure, Graph, WordFunction};
use ergodic_core::spectral::{perron, perron_from, primitivity_exponent};
use ergodic_core::{FinitePath, SftSystem, StateOptions};
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

fn positive_matrix(rng: &mut rand::rngs::StdRng, size: usize) -> Array2<f64> {
    Array2::from_shape_vec((size, size), common::random_positive(rng, size)).unwrap()
}

/// A primitive graph: a cycle through every vertex, one self-loop, and a
/// few random extra edges.
fn primitive_graph(rng: &mut rand::rngs::StdRng, vertices: usize) -> Graph {
    let mut edges: Vec<(usize, usize)> = (0..vertices).map(|v| (v, (v + 1) % vertices)).collect();
    edges.push((0, 0));
    for _ in 0..rng.gen_range(0..=vertices) {
        edges.push((rng.gen_range(0..vertices), rng.gen_range(0..vertices)));
    }
    Graph::from_edges(vertices, &edges).unwrap()
}

fn random_potential(rng: &mut rand::rngs::StdRng, graph: Graph, depth: usize) -> SftSystem {
    let values: HashMap<Vec<usize>, f64> =
        graph.admissible_words(depth).into_iter().map(|w| (w, rng.gen_range(0.2..3.0))).collect();
    SftSystem::new(graph, depth, &values).unwrap()
}

/// `(max r - min r) / min r` for `r = x / y`.
fn ratio_spread(x: &[f64], y: &[f64]) -> f64 {
    let r: Vec<f64> = x.iter().zip(y).map(|(a, b)| a / b).collect();
    let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
    variation(&r).unwrap() / min
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn perron_residual_and_scaling(seed in any::<u64>(), size in 1usize..6, c in 0.01f64..100.0) {
        let mut rng = common::rng(seed);
        let a = positive_matrix(&mut rng, size);
        let tol = 1e-11;
        let r = perron(&a, tol, 100_000).unwrap();
        prop_assert!(r.converged && r.residual <= tol);
        let scaled = perron(&a.mapv(|x| c * x), tol * c, 100_000).unwrap();
        prop_assert!(common::rel_diff(scaled.lambda, c * r.lambda) <= 1e-10);
        for (x, y) in scaled.left_vector.iter().zip(&r.left_vector) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        // Perron root between the smallest and largest row and column sums
        let rows: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
        let cols: Vec<f64> = a.columns().into_iter().map(|c| c.sum()).collect();
        for sums in [rows, cols] {
            let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = sums.iter().cloned().fold(0.0, f64::max);
            prop_assert!(r.lambda >= lo * (1.0 - 1e-12) && r.lambda <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn perron_start_independence(seed in any::<u64>(), size in 1usize..6) {
        let mut rng = common::rng(seed);
        let a = positive_matrix(&mut rng, size);
        let tol = 1e-12;
        let s1: Vec<f64> = (0..size).map(|_| rng.gen_range(0.01..10.0)).collect();
        let s2: Vec<f64> = (0..size).map(|_| rng.gen_range(0.01..10.0)).collect();
        let r1 = perron_from(&a, &s1, tol, 100_000).unwrap();
        let r2 = perron_from(&a, &s2, tol, 100_000).unwrap();
        for (x, y) in r1.left_vector.iter().zip(&r2.left_vector) {
            prop_assert!((x - y).abs() <= 10.0 * tol);
        }
    }

    #[test]
    fn perron_rate_follows_contraction_bound(seed in any::<u64>(), sparse in any::<bool>()) {
        let mut rng = common::rng(seed);
        let mut a = positive_matrix(&mut rng, 3);
        if sparse {
            // primitive with exponent > 1
            a[(1, 1)] = 0.0;
            a[(2, 2)] = 0.0;
            a[(1, 2)] = 0.0;
        }
        let oracle = perron(&a, 1e-15, 1_000_000).unwrap().left_vector;
        let first = perron(&a, 0.0, 0).unwrap();
        let (l, bound) = (first.exponent, first.contraction_bound);
        let initial = ratio_spread(&first.left_vector, &oracle);
        for k in 1..=6 {
            let mu = perron(&a, 0.0, k * l).unwrap().left_vector;
            let err = ratio_spread(&mu, &oracle);
            prop_assert!(err <= bound.powi(k as i32) * initial + 1e-10, "k = {}: {} > {}", k, err, bound.powi(k as i32) * initial);
        }
    }

    #[test]
    fn ruelle_scale_equivariance(seed in any::<u64>(), vertices in 1usize..4, depth in 1usize..3, c in 0.1f64..10.0) {
        let mut rng = common::rng(seed);
        let g = primitive_graph(&mut rng, vertices);
        let s = random_potential(&mut rng, g, depth);
        let scaled = SftSystem::from_fn(s.graph().clone(), depth, |w| c * s.potential(w).unwrap()).unwrap();
        let tol = 1e-12;
        let e = eigen_measure(&s, tol, 1_000_000).unwrap();
        let f = eigen_measure(&scaled, tol * c, 1_000_000).unwrap();
        prop_assert!(e.residual <= tol);
        prop_assert!((e.lambda_from_mass - e.lambda).abs() <= 1e-10 * e.lambda);
        prop_assert!(common::rel_diff(f.lambda, c * e.lambda) <= 1e-10);
        for (x, y) in e.mu.iter().zip(&f.mu) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn cylinder_masses_sum_to_one(seed in any::<u64>(), vertices in 1usize..4, depth in 1usize..3) {
        let mut rng = common::rng(seed);
        let g = primitive_graph(&mut rng, vertices);
        let s = random_potential(&mut rng, g, depth);
        let e = eigen_measure(&s, 1e-13, 1_000_000).unwrap();
        for m in 1..=5 {
            let total: f64 = s.graph().admissible_words(m).iter()
                .map(|w| extend_cylinder_measure(&s, &e, w).unwrap())
                .sum();
            prop_assert!((total - 1.0).abs() <= 1e-9, "m = {}: {}", m, total);
        }
    }

    #[test]
    fn expectation_variation_decays(seed in any::<u64>(), vertices in 1usize..4, depth in 1usize..3, fdepth in 1usize..3) {
        let mut rng = common::rng(seed);
        let g = primitive_graph(&mut rng, vertices);
        let s = random_potential(&mut rng, g, depth);
        let words = s.graph().admissible_words(fdepth).len();
        let f = WordFunction { depth: fdepth, values: (0..words).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let k = depth.max(fdepth);
        let l = build_ruelle_matrix(&s.lift(k).unwrap()).unwrap().matrix;
        let exp = primitivity_exponent(&l).unwrap().unwrap();
        let eps = ratio_bound(&mat_pow(&l, exp)).unwrap();
        let var_f = variation(&f.values).unwrap();
        let mut previous = f64::INFINITY;
        for n in fdepth..=20 {
            let e = sft::stationary_expectation(&s, &f, n).unwrap();
            let v = variation(&e.values).unwrap();
            prop_assert!(v <= (1.0 - eps).powi((n / exp) as i32) * var_f + 1e-9);
            prop_assert!(v <= previous + 1e-12);
            previous = v;
        }
    }
}

#[test]
fn unit_potential_matches_adjacency_perron() {
    let mut rng = common::rng(3);
    for vertices in 1..=4 {
        let g = primitive_graph(&mut rng, vertices);
        let s = SftSystem::from_fn(g.clone(), 1, |_| 1.0).unwrap();
        let tol = 1e-12;
        let e = eigen_measure(&s, tol, 1_000_000).unwrap();
        let p = perron(&g.adjacency().t().to_owned(), tol, 1_000_000).unwrap();
        assert!((e.lambda - p.lambda).abs() <= 1e-10, "{} vs {}", e.lambda, p.lambda);
    }
}

#[test]
fn bernoulli_expectation_converges_to_eigenmeasure() {
    let (a, b) = (0.4, 1.7);
    let s = SftSystem::edge_potential(Graph::full_shift(2), &[a, b]).unwrap();
    let f = WordFunction::from_fn(s.graph(), 1, |w| if w[0] == 0 { 1.0 } else { 0.0 });
    let e = eigen_measure(&s, 1e-14, 1000).unwrap();
    for n in [1, 5, 20] {
        for v in sft::stationary_expectation(&s, &f, n).unwrap().values {
            assert!((v - e.mu[0]).abs() <= 1e-12);
            assert!((v - a / (a + b)).abs() <= 1e-12);
        }
    }
}

#[test]
fn sft_measure_agrees_with_bratteli_encoding() {
    let mut rng = common::rng(5);
    for vertices in 1..=3 {
        let g = primitive_graph(&mut rng, vertices);
        let s = random_potential(&mut rng, g.clone(), 1);
        let e = eigen_measure(&s, 1e-14, 1_000_000).unwrap();
        let system = s.to_bratteli(80).unwrap();
        let state = solve_state(&system, &StateOptions::new(60)).unwrap();
        assert!(state.converged);
        let m = edge_probabilities(&system, &state).unwrap();
        for len in 1..=8 {
            for w in g.admissible_words(len) {
                let sft_mass = extend_cylinder_measure(&s, &e, &w).unwrap();
                let path = FinitePath::new(system.diagram(), 0, w.clone()).unwrap();
                let diagram_mass = m.cylinder_mass(&path).unwrap();
                assert!((sft_mass - diagram_mass).abs() <= 1e-8, "{w:?}: {sft_mass} vs {diagram_mass}");
            }
        }
    }
}

#[test]
fn shared_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<ergodic_core::WeightedSystem>();
    assert_send_sync::<ergodic_core::BratteliDiagram>();
    assert_send_sync::<ergodic_core::MarkovMeasure>();
    assert_send_sync::<ergodic_core::StateSequence>();
    assert_send_sync::<SftSystem>();
    assert_send_sync::<ergodic_core::RuelleMatrix>();
    assert_send_sync::<ergodic_core::Error>();
}
