//! Quasi-product cocycles.
//!
//! A [`WeightedSystem`] is a valid diagram plus a strictly positive edge
//! weighting `Φ`. From it we derive, once and eagerly:
//!
//! - `A_n(w, v)`: the sum of `Φ(e)` over edges `v -> w` of `E(n)`;
//! - `u_n = A_n u_{n-1}`, `u_0 = 1`: the partition functions, i.e. the
//!   `Φ`-weighted path counts from level 0. Stored log-scaled.
//! - `B_n(w, v) = u_n(w)^{-1} A_n(w, v) u_{n-1}(v)`: the row-stochastic
//!   Markovianization.
//!
//! Normalized potentials, local potentials and the conditional expectations
//! `E_n` are all ratios of these, so the log-scales cancel.

use std::cmp::Ordering;
use std::collections::HashMap;

use ndarray::Array2;

use crate::contraction;
use crate::diagram::{BratteliDiagram, FinitePath};
use crate::error::{invalid, Result};
use crate::linalg::{mat_vec, LogVec};

#[derive(Debug, Clone)]
pub struct WeightedSystem {
    diagram: BratteliDiagram,
    phi: Vec<Vec<f64>>,
    transitions: Vec<Array2<f64>>,
    partition: Vec<LogVec>,
    /// `A_n u_{n-1}` on the mantissa of `u_{n-1}`, before rescaling.
    row_masses: Vec<Vec<f64>>,
    markov: Vec<Array2<f64>>,
}

impl WeightedSystem {
    /// `weights[n-1][e]` is `Φ` of edge `e` in `E(n)`.
    pub fn new(diagram: BratteliDiagram, weights: Vec<Vec<f64>>) -> Result<Self> {
        diagram.require_valid()?;
        if weights.len() != diagram.level_count() {
            return Err(invalid(format!(
                "{} weight levels for {} diagram levels",
                weights.len(),
                diagram.level_count()
            )));
        }
        for (i, level) in weights.iter().enumerate() {
            let n = i + 1;
            if level.len() != diagram.edges(n).len() {
                return Err(invalid(format!(
                    "level {n} has {} edges but {} weights",
                    diagram.edges(n).len(),
                    level.len()
                )));
            }
            if let Some((e, w)) = level.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
                return Err(invalid(format!("weight of edge {e} at level {n} is {w}; weights must be positive and finite")));
            }
        }

        let levels = diagram.level_count();
        let mut transitions = Vec::with_capacity(levels);
        let mut partition = Vec::with_capacity(levels + 1);
        let mut row_masses = Vec::with_capacity(levels);
        let mut markov = Vec::with_capacity(levels);
        partition.push(LogVec::ones(diagram.vertex_count(0)));
        for n in 1..=levels {
            let mut a = Array2::zeros((diagram.vertex_count(n), diagram.vertex_count(n - 1)));
            for (e, w) in diagram.edges(n).iter().zip(&weights[n - 1]) {
                a[(e.range, e.source)] += w;
            }
            let prev = &partition[n - 1];
            let raw = mat_vec(&a, &prev.mantissa);
            let next = LogVec::from_raw(raw.clone(), prev.log_scale)
                .ok_or_else(|| invalid(format!("partition function vanishes at level {n}")))?;
            markov.push(contraction::markovianize(&a, &prev.mantissa)?.into_inner());
            transitions.push(a);
            row_masses.push(raw);
            partition.push(next);
        }
        Ok(WeightedSystem {
            diagram,
            phi: weights,
            transitions,
            partition,
            row_masses,
            markov,
        })
    }

    /// `Φ ≡ 1`.
    pub fn unweighted(diagram: BratteliDiagram) -> Result<Self> {
        let weights = diagram.all_edges().iter().map(|l| vec![1.0; l.len()]).collect();
        WeightedSystem::new(diagram, weights)
    }

    pub fn diagram(&self) -> &BratteliDiagram {
        &self.diagram
    }

    pub fn level_count(&self) -> usize {
        self.diagram.level_count()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.phi
    }

    /// `Φ(e)` for edge `e` of `E(level)`.
    pub fn weight(&self, level: usize, edge: usize) -> f64 {
        self.phi[level - 1][edge]
    }

    /// `A_1, ..., A_N`.
    pub fn transition_matrices(&self) -> &[Array2<f64>] {
        &self.transitions
    }

    /// `A_n`, shape `|V(n)| x |V(n-1)|`.
    pub fn transition_matrix(&self, n: usize) -> &Array2<f64> {
        &self.transitions[n - 1]
    }

    /// `u_n`, log-scaled with max mantissa 1.
    pub fn scaled_path_sums(&self, n: usize) -> Result<&LogVec> {
        self.partition
            .get(n)
            .ok_or_else(|| invalid(format!("level {n} beyond diagram depth {}", self.level_count())))
    }

    /// `B_n`, rows summing to 1.
    pub fn markovianize(&self, n: usize) -> Result<&Array2<f64>> {
        if n == 0 || n > self.level_count() {
            return Err(invalid(format!("B_n is defined for 1 <= n <= {}", self.level_count())));
        }
        Ok(&self.markov[n - 1])
    }

    /// True when every level repeats level 1 exactly: same vertex counts,
    /// edges and weights.
    pub fn is_stationary(&self) -> bool {
        let d = &self.diagram;
        let size = d.vertex_count(0);
        (0..=d.level_count()).all(|n| d.vertex_count(n) == size)
            && (1..=d.level_count()).all(|n| d.edges(n) == d.edges(1) && self.phi[n - 1] == self.phi[0])
    }

    fn ln_phi_product(&self, path: &FinitePath) -> f64 {
        path.steps().map(|(n, e)| self.weight(n, e).ln()).sum()
    }

    fn require_root_path(&self, path: &FinitePath) -> Result<()> {
        if path.start_level != 0 {
            return Err(invalid("path must start at level 0"));
        }
        self.diagram.check_path(path)
    }

    /// `D(x, y) = Π Φ(x_i) / Π Φ(y_i)` for two paths from level 0 of equal
    /// length ending at the same vertex.
    pub fn cocycle_value(&self, x: &FinitePath, y: &FinitePath) -> Result<f64> {
        self.require_root_path(x)?;
        self.require_root_path(y)?;
        if x.len() != y.len() {
            return Err(invalid(format!("path lengths differ ({} vs {})", x.len(), y.len())));
        }
        if x.end_vertex(&self.diagram) != y.end_vertex(&self.diagram) {
            return Err(invalid("paths end at different vertices"));
        }
        Ok((self.ln_phi_product(x) - self.ln_phi_product(y)).exp())
    }

    /// `ρ_n(x) = Φ(x_1)...Φ(x_n) / u_n(r(x_n))`.
    pub fn normalized_potential(&self, x: &FinitePath) -> Result<f64> {
        self.require_root_path(x)?;
        let u = &self.partition[x.len()];
        Ok((self.ln_phi_product(x) - u.ln_at(x.end_vertex(&self.diagram))).exp())
    }

    /// `u_n(r(e))^{-1} Φ(e) u_{n-1}(s(e))` for edge `e` of `E(n)`.
    pub fn local_potential(&self, n: usize, e: usize) -> Result<f64> {
        if n == 0 || n > self.level_count() {
            return Err(invalid(format!("no edges at level {n}")));
        }
        let edge = self
            .diagram
            .edges(n)
            .get(e)
            .ok_or_else(|| invalid(format!("edge {e} does not exist at level {n}")))?;
        Ok(self.weight(n, e) * self.partition[n - 1].mantissa[edge.source] / self.row_masses[n - 1][edge.range])
    }

    /// `B_n ... B_{m+1} h` for `h` on `V(m)`.
    pub fn push_forward(&self, h: &[f64], m: usize, n: usize) -> Result<Vec<f64>> {
        if m > n || n > self.level_count() {
            return Err(invalid(format!("levels {m}..{n} out of range")));
        }
        if h.len() != self.diagram.vertex_count(m) {
            return Err(invalid(format!("vector of length {} on V({m})", h.len())));
        }
        let mut h = h.to_vec();
        for k in m + 1..=n {
            h = mat_vec(&self.markov[k - 1], &h);
        }
        Ok(h)
    }

    /// `E_n(f)` as a function on `V(n)`: for each `v`, the `ρ_n`-weighted
    /// average of `f` over length-`n` paths ending at `v`.
    ///
    /// Evaluated as `B_n ... B_{d+1}` applied to `E_d(f)`; paths are only
    /// visited at the function's own depth `d`.
    pub fn expectation(&self, f: &CylinderFunction, n: usize) -> Result<Vec<f64>> {
        let d = f.depth();
        if d > n {
            return Err(invalid(format!("function depth {d} exceeds level {n}")));
        }
        if n > self.level_count() {
            return Err(invalid(format!("level {n} beyond diagram depth {}", self.level_count())));
        }
        if d == 0 {
            return Ok(vec![f.values[0]; self.diagram.vertex_count(n)]);
        }
        let mut h = vec![0.0; self.diagram.vertex_count(d)];
        for (path, value) in f.paths.iter().zip(&f.values) {
            let mut rho = 1.0;
            for (k, e) in path.steps() {
                rho *= self.local_potential(k, e)?;
            }
            h[path.end_vertex(&self.diagram)] += rho * value;
        }
        self.push_forward(&h, d, n)
    }

    /// Telescopes the diagram along `cuts`, multiplying weights along paths.
    pub fn telescope(&self, cuts: &[usize]) -> Result<WeightedSystem> {
        let t = self.diagram.telescope(cuts)?;
        let weights = t.multiply_weights(&self.phi);
        WeightedSystem::new(t.diagram, weights)
    }
}

/// A locally constant function on the path space, given by its values on
/// the depth-`d` cylinders `Z(x_1 ... x_d)`.
///
/// Depth 0 is a constant. For `d >= 1` the values are aligned with the
/// lexicographic enumeration of paths from level 0 to level `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    depth: usize,
    paths: Vec<FinitePath>,
    values: Vec<f64>,
}

impl CylinderFunction {
    pub fn constant(c: f64) -> Self {
        CylinderFunction {
            depth: 0,
            paths: Vec::new(),
            values: vec![c],
        }
    }

    pub fn from_fn(
        diagram: &BratteliDiagram,
        depth: usize,
        cap: usize,
        f: impl Fn(&FinitePath) -> f64,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(invalid("depth-0 functions are constants; use CylinderFunction::constant"));
        }
        let paths = diagram.paths_between(0, depth, cap)?;
        let values = paths.iter().map(&f).collect();
        Ok(CylinderFunction { depth, paths, values })
    }

    /// `values` aligned with `diagram.paths_between(0, depth, ..)`.
    pub fn from_values(diagram: &BratteliDiagram, depth: usize, values: Vec<f64>) -> Result<Self> {
        if depth == 0 {
            return match values.as_slice() {
                [c] => Ok(CylinderFunction::constant(*c)),
                _ => Err(invalid("depth-0 function takes exactly one value")),
            };
        }
        let paths = diagram.paths_between(0, depth, values.len())?;
        if paths.len() != values.len() {
            return Err(invalid(format!(
                "{} values for {} depth-{depth} paths",
                values.len(),
                paths.len()
            )));
        }
        Ok(CylinderFunction { depth, paths, values })
    }

    /// Values keyed by edge-ordinal sequences; every path must be present.
    pub fn from_map(
        diagram: &BratteliDiagram,
        depth: usize,
        map: &HashMap<Vec<usize>, f64>,
        cap: usize,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(invalid("depth-0 functions are constants; use CylinderFunction::constant"));
        }
        let paths = diagram.paths_between(0, depth, cap)?;
        if let Some(extra) = map.keys().find(|k| k.len() != depth) {
            return Err(invalid(format!("key {extra:?} does not have length {depth}")));
        }
        if map.len() != paths.len() {
            let missing = paths.iter().find(|p| !map.contains_key(&p.edges));
            return Err(match missing {
                Some(p) => invalid(format!("no value for path {:?}", p.edges)),
                None => invalid(format!("{} keys for {} admissible paths", map.len(), paths.len())),
            });
        }
        let values = paths
            .iter()
            .map(|p| {
                map.get(&p.edges)
                    .copied()
                    .ok_or_else(|| invalid(format!("no value for path {:?}", p.edges)))
            })
            .collect::<Result<_>>()?;
        Ok(CylinderFunction { depth, paths, values })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn paths(&self) -> &[FinitePath] {
        &self.paths
    }

    /// `f(x)` for a path from level 0 of length at least `depth`.
    pub fn eval(&self, x: &FinitePath) -> Result<f64> {
        if self.depth == 0 {
            return Ok(self.values[0]);
        }
        if x.len() < self.depth {
            return Err(invalid(format!("path of length {} shorter than depth {}", x.len(), self.depth)));
        }
        let key = &x.edges[..self.depth];
        self.paths
            .binary_search_by(|p| p.edges.as_slice().cmp(key).then(Ordering::Equal))
            .map(|i| self.values[i])
            .map_err(|_| invalid(format!("path {key:?} is not admissible")))
    }
}
