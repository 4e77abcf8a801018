//! Subshifts of finite type with locally constant potentials.
//!
//! `X` is the space of one-sided edge paths of a finite graph `Γ`, `T` the
//! shift, and `g > 0` a potential depending on the first `k` edges. The
//! transfer operator
//!
//! ```text
//! (L f)(x) = Σ_{Ty = x} g(y) f(y)
//! ```
//!
//! maps functions of `k` coordinates to functions of `k - 1` coordinates, so
//! it acts as a finite matrix on admissible `k`-words.

use std::collections::HashMap;

use ndarray::Array2;
use serde::Serialize;

use crate::cocycle::WeightedSystem;
use crate::diagram::Edge;
use crate::error::{invalid, Error, Result};
use crate::families;
use crate::spectral;

/// A finite directed multigraph in which every vertex emits and receives.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(vertex_names: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = vertex_names.len();
        if n == 0 {
            return Err(invalid("graph has no vertices"));
        }
        let mut emits = vec![false; n];
        let mut receives = vec![false; n];
        for (i, e) in edges.iter().enumerate() {
            if e.source >= n || e.range >= n {
                return Err(invalid(format!("edge {i} references a missing vertex")));
            }
            emits[e.source] = true;
            receives[e.range] = true;
        }
        if let Some(v) = emits.iter().position(|b| !b) {
            return Err(invalid(format!("vertex {v} emits no edge")));
        }
        if let Some(v) = receives.iter().position(|b| !b) {
            return Err(invalid(format!("vertex {v} receives no edge")));
        }
        Ok(Graph { vertex_names, edges })
    }

    /// Vertices named `"0", "1", ...`.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Graph::new(
            (0..vertex_count).map(|i| i.to_string()).collect(),
            edges.iter().map(|&(s, r)| Edge::new(s, r)).collect(),
        )
    }

    /// One vertex, `symbols` loops.
    pub fn full_shift(symbols: usize) -> Self {
        Graph::from_edges(1, &vec![(0, 0); symbols]).expect("full shift")
    }

    /// Vertex sequences avoiding `11`: edges `0->0`, `0->1`, `1->0`.
    pub fn golden_mean() -> Self {
        Graph::from_edges(2, &[(0, 0), (0, 1), (1, 0)]).expect("golden mean")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Vertex adjacency counts, `(source, range)`.
    pub fn adjacency(&self) -> Array2<f64> {
        let n = self.vertex_count();
        let mut a = Array2::zeros((n, n));
        for e in &self.edges {
            a[(e.source, e.range)] += 1.0;
        }
        a
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&e| e < self.edges.len())
            && word.windows(2).all(|w| self.edges[w[0]].range == self.edges[w[1]].source)
    }

    /// All admissible words of `len` edges in lexicographic order.
    pub fn admissible_words(&self, len: usize) -> Vec<Vec<usize>> {
        let mut words: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &words {
                for (i, e) in self.edges.iter().enumerate() {
                    if w.last().is_none_or(|&l| self.edges[l].range == e.source) {
                        let mut x = w.clone();
                        x.push(i);
                        next.push(x);
                    }
                }
            }
            words = next;
        }
        words
    }
}

/// Graph plus a strictly positive potential on admissible `depth`-words.
#[derive(Debug, Clone, PartialEq)]
pub struct SftSystem {
    graph: Graph,
    depth: usize,
    words: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    g: Vec<f64>,
}

impl SftSystem {
    /// Every admissible `depth`-word needs a strictly positive value; keys
    /// that are not admissible words are rejected.
    pub fn new(graph: Graph, depth: usize, values: &HashMap<Vec<usize>, f64>) -> Result<Self> {
        if depth == 0 {
            return Err(invalid("potential depth must be at least 1"));
        }
        let words = graph.admissible_words(depth);
        if words.is_empty() {
            return Err(invalid(format!("no admissible words of length {depth}")));
        }
        if let Some(bad) = values.keys().find(|w| w.len() != depth || !graph.is_admissible(w)) {
            return Err(invalid(format!("potential key {bad:?} is not an admissible {depth}-word")));
        }
        let g = words
            .iter()
            .map(|w| match values.get(w) {
                Some(&x) if x.is_finite() && x > 0.0 => Ok(x),
                Some(&x) => Err(invalid(format!("potential at {w:?} is {x}; must be positive"))),
                None => Err(invalid(format!("no potential value for word {w:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Ok(SftSystem { graph, depth, words, index, g })
    }

    pub fn from_fn(graph: Graph, depth: usize, g: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let values = graph.admissible_words(depth).into_iter().map(|w| {
            let v = g(&w);
            (w, v)
        });
        SftSystem::new(graph.clone(), depth, &values.collect())
    }

    /// Depth-1 potential given per edge.
    pub fn edge_potential(graph: Graph, g: &[f64]) -> Result<Self> {
        if g.len() != graph.edges().len() {
            return Err(invalid("one potential value per edge required"));
        }
        SftSystem::from_fn(graph, 1, |w| g[w[0]])
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn word_index(&self, word: &[usize]) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// `g` on an admissible word of length at least `depth` (reads the first
    /// `depth` edges).
    pub fn potential(&self, word: &[usize]) -> Result<f64> {
        if word.len() < self.depth {
            return Err(invalid(format!("word shorter than potential depth {}", self.depth)));
        }
        self.word_index(&word[..self.depth])
            .map(|i| self.g[i])
            .ok_or_else(|| invalid(format!("word {word:?} is not admissible")))
    }

    /// Same potential read as a function of `depth >= self.depth` edges.
    pub fn lift(&self, depth: usize) -> Result<SftSystem> {
        if depth < self.depth {
            return Err(invalid(format!("cannot lift depth {} to {depth}", self.depth)));
        }
        SftSystem::from_fn(self.graph.clone(), depth, |w| self.g[self.index[&w[..self.depth]]])
    }

    /// `g_n(x) = g(x) g(Tx) ... g(T^{n-1} x)` on a word of length at least
    /// `n + depth - 1`.
    pub fn birkhoff_product(&self, word: &[usize], n: usize) -> Result<f64> {
        if word.len() + 1 < n + self.depth {
            return Err(invalid("word too short for the requested product"));
        }
        (0..n).map(|i| self.potential(&word[i..])).product()
    }

    /// Encodes a depth-1 potential as a stationary Bratteli diagram with
    /// `V(n) = Γ^0`, `E(n) = Γ^1` and `Φ = g`.
    pub fn to_bratteli(&self, levels: usize) -> Result<WeightedSystem> {
        if self.depth != 1 {
            return Err(Error::Unsupported("only depth-1 potentials map to edge weights".into()));
        }
        let edges: Vec<(usize, usize)> = self.graph.edges.iter().map(|e| (e.source, e.range)).collect();
        families::stationary(self.graph.vertex_count(), &edges, &self.g, levels)
    }
}

/// The transfer operator on functions of `depth` edges.
///
/// Rows are indexed by the output word `c`, columns by the preimage word
/// `c' = e c_1 ... c_{k-1}`, and `L[c][c'] = g(c')`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuelleMatrix {
    pub depth: usize,
    pub words: Vec<Vec<usize>>,
    pub matrix: Array2<f64>,
}

pub fn build_ruelle_matrix(system: &SftSystem) -> Result<RuelleMatrix> {
    let words = system.words();
    if words.is_empty() {
        return Err(invalid("no admissible words"));
    }
    let k = system.depth;
    let edges = system.graph.edges();
    let mut l = Array2::zeros((words.len(), words.len()));
    for (row, c) in words.iter().enumerate() {
        let entry = edges[c[0]].source;
        for (e, edge) in edges.iter().enumerate() {
            if edge.range != entry {
                continue;
            }
            let mut pre = Vec::with_capacity(k);
            pre.push(e);
            pre.extend_from_slice(&c[..k - 1]);
            let col = system.index[&pre];
            l[(row, col)] += system.g[col];
        }
    }
    Ok(RuelleMatrix { depth: k, words: words.to_vec(), matrix: l })
}

/// Solution of `L^T μ = λ μ` with `μ` a probability vector on `k`-words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenMeasure {
    pub lambda: f64,
    pub words: Vec<Vec<usize>>,
    pub mu: Vec<f64>,
    pub residual: f64,
    /// `μ(L 1) / μ(1)`.
    pub lambda_from_mass: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration for the eigenmeasure. The support of the Ruelle matrix
/// must be primitive.
pub fn eigen_measure(system: &SftSystem, tol: f64, max_iter: usize) -> Result<EigenMeasure> {
    let l = build_ruelle_matrix(system)?;
    if spectral::primitivity_exponent(&l.matrix)?.is_none() {
        return Err(Error::Unsupported("Ruelle matrix support is not primitive".into()));
    }
    let r = spectral::perron(&l.matrix, tol, max_iter)?;
    let ones = vec![1.0; l.words.len()];
    let l1 = crate::linalg::mat_vec(&l.matrix, &ones);
    let mass: f64 = r.left_vector.iter().sum();
    let lambda_from_mass = r.left_vector.iter().zip(&l1).map(|(m, x)| m * x).sum::<f64>() / mass;
    Ok(EigenMeasure {
        lambda: r.lambda,
        words: l.words,
        mu: r.left_vector,
        residual: r.residual,
        lambda_from_mass,
        iterations: r.iterations,
        converged: r.converged,
    })
}

/// `μ(Z(w))`. For `|w| >= k` this is
/// `λ^{-(m-k)} g(w_1..w_k) ... g(w_{m-k}..w_{m-1}) μ(w_{m-k+1}..w_m)`,
/// from `μ(f) = λ^{-1} μ(L f)` applied to indicator functions; shorter words
/// sum `μ` over their extensions.
pub fn extend_cylinder_measure(system: &SftSystem, eig: &EigenMeasure, word: &[usize]) -> Result<f64> {
    if !system.graph.is_admissible(word) {
        return Err(invalid(format!("word {word:?} is not admissible")));
    }
    let k = system.depth;
    if eig.mu.len() != system.words.len() {
        return Err(invalid("eigenmeasure does not match the system's words"));
    }
    let m = word.len();
    if m < k {
        return Ok(system
            .words
            .iter()
            .zip(&eig.mu)
            .filter(|(w, _)| w.starts_with(word))
            .map(|(_, x)| x)
            .sum());
    }
    let mut ln = -((m - k) as f64) * eig.lambda.ln();
    for i in 0..m - k {
        ln += system.potential(&word[i..i + k])?.ln();
    }
    let tail = system.index[&word[m - k..]];
    Ok((ln + eig.mu[tail].ln()).exp())
}

/// A function of the first `depth` edges, aligned with the admissible
/// `depth`-words in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordFunction {
    pub depth: usize,
    pub values: Vec<f64>,
}

impl WordFunction {
    pub fn from_fn(graph: &Graph, depth: usize, f: impl Fn(&[usize]) -> f64) -> Self {
        WordFunction {
            depth,
            values: graph.admissible_words(depth).iter().map(|w| f(w)).collect(),
        }
    }
}

/// `E_n(f) = L^n f / L^n 1`, evaluated as `n` steps of the Markovian kernel
/// `K_j(c, c') = L(c, c') h_{j-1}(c') / h_j(c)` with `h_j = L^j 1`.
///
/// The potential and `f` are both read on words of length `max(k, d)`; the
/// result is returned there as well. For `n >= d` it depends on `x_1..x_{k-1}`
/// only.
pub fn stationary_expectation(system: &SftSystem, f: &WordFunction, n: usize) -> Result<WordFunction> {
    let d = f.depth;
    if n < d {
        return Err(invalid(format!("need n >= depth of f ({d}), got {n}")));
    }
    let f_words = system.graph.admissible_words(d);
    if f_words.len() != f.values.len() {
        return Err(invalid(format!("{} values for {} admissible {d}-words", f.values.len(), f_words.len())));
    }
    let depth = system.depth.max(d);
    let lifted = system.lift(depth)?;
    let l = build_ruelle_matrix(&lifted)?.matrix;
    let f_index: HashMap<&[usize], usize> = f_words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let mut e: Vec<f64> = lifted.words.iter().map(|w| f.values[f_index[&w[..d]]]).collect();
    let mut h = vec![1.0; e.len()];
    for _ in 0..n {
        let mut next_h = vec![0.0; h.len()];
        let mut next_e = vec![0.0; h.len()];
        for (c, row) in l.rows().into_iter().enumerate() {
            let mut mass = 0.0;
            let mut acc = 0.0;
            for (cp, lv) in row.iter().enumerate() {
                if *lv == 0.0 {
                    continue;
                }
                let w = lv * h[cp];
                mass += w;
                acc += w * e[cp];
            }
            next_h[c] = mass;
            next_e[c] = acc / mass;
        }
        let max = next_h.iter().cloned().fold(0.0, f64::max);
        h = next_h.into_iter().map(|x| x / max).collect();
        e = next_e;
    }
    Ok(WordFunction { depth, values: e })
}

/// Structural Walters certificate for a locally constant potential of depth
/// `k`: `g_n` depends on `x_1 .. x_{n+k-1}` only, so agreement on `n + window`
/// coordinates (`window = k - 1`) forces `g_n(x) / g_n(y) = 1` exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaltersCertificate {
    pub potential_depth: usize,
    pub window: usize,
    /// Primitivity exponent of `Γ`; `None` when `Γ` is not primitive.
    pub graph_exponent: Option<usize>,
    /// Minimality (primitive `Γ`) together with the exact Walters bound.
    pub uniquely_ergodic: bool,
}

impl WaltersCertificate {
    /// Number of leading coordinates on which two points must agree for
    /// `g_n` to coincide.
    pub fn agreement_length(&self, n: usize) -> usize {
        n + self.window
    }
}

pub fn walters_check_locally_constant(system: &SftSystem) -> Result<WaltersCertificate> {
    let graph_exponent = spectral::primitivity_exponent(&system.graph.adjacency())?;
    Ok(WaltersCertificate {
        potential_depth: system.depth,
        window: system.depth - 1,
        graph_exponent,
        uniquely_ergodic: graph_exponent.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn full_shift_ruelle_matrix() {
        let (a, b) = (0.7, 1.9);
        let s = SftSystem::edge_potential(Graph::full_shift(2), &[a, b]).unwrap();
        let l = build_ruelle_matrix(&s).unwrap();
        assert_eq!(l.matrix, array![[a, b], [a, b]]);
    }

    #[test]
    fn unit_potential_gives_edge_adjacency_transpose() {
        let g = Graph::golden_mean();
        let s = SftSystem::edge_potential(g.clone(), &[1.0; 3]).unwrap();
        let l = build_ruelle_matrix(&s).unwrap().matrix;
        let edges = g.edges();
        for c in 0..3 {
            for cp in 0..3 {
                let follows = edges[cp].range == edges[c].source;
                assert_eq!(l[(c, cp)], if follows { 1.0 } else { 0.0 });
            }
        }
        // row sums are in-degrees of the source vertex
        for (c, row) in l.rows().into_iter().enumerate() {
            let indeg = edges.iter().filter(|e| e.range == edges[c].source).count();
            assert_eq!(row.sum(), indeg as f64);
        }
    }

    #[test]
    fn bernoulli_eigenmeasure() {
        let (a, b) = (0.7, 1.9);
        let s = SftSystem::edge_potential(Graph::full_shift(2), &[a, b]).unwrap();
        let e = eigen_measure(&s, 1e-13, 1000).unwrap();
        assert_relative_eq!(e.lambda, a + b, epsilon = 1e-12);
        assert_relative_eq!(e.mu[0], a / (a + b), epsilon = 1e-12);
        assert_relative_eq!(e.lambda_from_mass, e.lambda, epsilon = 1e-12);
        let w = extend_cylinder_measure(&s, &e, &[0, 1]).unwrap();
        assert_relative_eq!(w, a * b / ((a + b) * (a + b)), epsilon = 1e-12);
        assert_relative_eq!(extend_cylinder_measure(&s, &e, &[1]).unwrap(), e.mu[1], epsilon = 0.0);
    }

    #[test]
    fn uniform_full_shift() {
        let s = SftSystem::edge_potential(Graph::full_shift(3), &[1.0; 3]).unwrap();
        let e = eigen_measure(&s, 1e-13, 100).unwrap();
        assert_relative_eq!(e.lambda, 3.0, epsilon = 1e-12);
        for m in &e.mu {
            assert_relative_eq!(*m, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn golden_mean_eigenvalue() {
        let s = SftSystem::edge_potential(Graph::golden_mean(), &[1.0; 3]).unwrap();
        let e = eigen_measure(&s, 1e-13, 1000).unwrap();
        assert_relative_eq!(e.lambda, (1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-11);
    }

    #[test]
    fn non_primitive_is_unsupported() {
        let g = Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let s = SftSystem::edge_potential(g, &[1.0, 2.0]).unwrap();
        assert!(matches!(eigen_measure(&s, 1e-10, 100), Err(Error::Unsupported(_))));
    }

    #[test]
    fn potential_validation() {
        let g = Graph::golden_mean();
        let mut values: HashMap<Vec<usize>, f64> = g.admissible_words(2).into_iter().map(|w| (w, 1.0)).collect();
        assert!(SftSystem::new(g.clone(), 2, &values).is_ok());
        values.insert(vec![1, 1], 1.0); // 0->1 then 0->1 is not connected
        assert!(SftSystem::new(g.clone(), 2, &values).is_err());
        values.remove(&vec![1, 1]);
        values.remove(&vec![0, 0]);
        assert!(SftSystem::new(g.clone(), 2, &values).is_err());
        assert!(Graph::from_edges(2, &[(0, 0), (0, 1)]).is_err());
    }

    #[test]
    fn additivity_on_depth_two() {
        let g = Graph::golden_mean();
        let s = SftSystem::from_fn(g.clone(), 2, |w| 1.0 + (w[0] * 3 + w[1]) as f64 * 0.37).unwrap();
        let e = eigen_measure(&s, 1e-14, 10_000).unwrap();
        for len in 0..5 {
            for w in g.admissible_words(len) {
                let whole = extend_cylinder_measure(&s, &e, &w).unwrap();
                let parts: f64 = (0..3)
                    .filter_map(|x| {
                        let mut we = w.clone();
                        we.push(x);
                        extend_cylinder_measure(&s, &e, &we).ok()
                    })
                    .sum();
                assert!((whole - parts).abs() < 1e-10, "{w:?}: {whole} vs {parts}");
            }
        }
    }

    #[test]
    fn expectation_constant_and_depth() {
        let s = SftSystem::edge_potential(Graph::full_shift(2), &[0.3, 0.9]).unwrap();
        let c = WordFunction::from_fn(s.graph(), 1, |_| 4.0);
        for v in stationary_expectation(&s, &c, 5).unwrap().values {
            assert_relative_eq!(v, 4.0, epsilon = 1e-14);
        }
        let f = WordFunction::from_fn(s.graph(), 3, |w| w[2] as f64);
        assert!(stationary_expectation(&s, &f, 2).is_err());
    }

    #[test]
    fn walters_windows() {
        let s1 = SftSystem::edge_potential(Graph::golden_mean(), &[1.0, 2.0, 3.0]).unwrap();
        let c1 = walters_check_locally_constant(&s1).unwrap();
        assert_eq!((c1.window, c1.agreement_length(4)), (0, 4));
        assert!(c1.uniquely_ergodic);
        let s3 = s1.lift(3).unwrap();
        assert_eq!(walters_check_locally_constant(&s3).unwrap().window, 2);
        let periodic = SftSystem::edge_potential(Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap(), &[1.0, 1.0]).unwrap();
        assert!(!walters_check_locally_constant(&periodic).unwrap().uniquely_ergodic);
    }

    #[test]
    fn walters_agreement_forces_equal_products() {
        let g = Graph::golden_mean();
        let k = 3;
        let s = SftSystem::from_fn(g.clone(), k, |w| 1.0 + (w[0] + 2 * w[1] + 5 * w[2]) as f64 / 7.0).unwrap();
        let cert = walters_check_locally_constant(&s).unwrap();
        for n in 1..=3 {
            let agree = cert.agreement_length(n);
            let words = g.admissible_words(agree + 2);
            for x in &words {
                for y in words.iter().filter(|y| y[..agree] == x[..agree]) {
                    assert_eq!(s.birkhoff_product(x, n).unwrap(), s.birkhoff_product(y, n).unwrap());
                }
            }
        }
    }
}
