//! Bratteli diagrams and their finite paths.
//!
//! Vertices and edges are addressed by `(level, ordinal)`. Level `n` edges
//! (the set `E(n)`) run from `V(n-1)` to `V(n)`; parallel edges are kept
//! distinct. Paths are always finite truncations.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Largest number of edges a single telescoped level may have.
pub const TELESCOPE_EDGE_CAP: usize = 1 << 20;

/// An edge of `E(n)`: `source` indexes `V(n-1)`, `range` indexes `V(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Edge {
    pub source: usize,
    pub range: usize,
}

impl Edge {
    pub fn new(source: usize, range: usize) -> Self {
        Edge { source, range }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BratteliDiagram {
    vertex_names: Vec<Vec<String>>,
    edges: Vec<Vec<Edge>>,
}

/// One broken invariant, located by level and ordinal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoLevels,
    EmptyLevel { level: usize },
    DanglingSource { level: usize, edge: usize, source: usize },
    DanglingRange { level: usize, edge: usize, range: usize },
    /// `v` in `V(level)` emits no edge into `level + 1`.
    NoOutgoingEdge { level: usize, vertex: usize },
    /// `w` in `V(level)` receives no edge.
    UnreachedVertex { level: usize, vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoLevels => write!(f, "diagram has no levels"),
            Violation::EmptyLevel { level } => write!(f, "level {level} has no vertices"),
            Violation::DanglingSource { level, edge, source } => {
                write!(f, "edge {edge} of level {level} has source {source} outside V({})", level - 1)
            }
            Violation::DanglingRange { level, edge, range } => {
                write!(f, "edge {edge} of level {level} has range {range} outside V({level})")
            }
            Violation::NoOutgoingEdge { level, vertex } => {
                write!(f, "vertex {vertex} of level {level} emits no edge")
            }
            Violation::UnreachedVertex { level, vertex } => {
                write!(f, "vertex {vertex} of level {level} receives no edge")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A connected run of edges from `start_level` to `start_level + edges.len()`.
///
/// An empty path identifies the vertex `start_vertex`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinitePath {
    pub start_level: usize,
    pub start_vertex: usize,
    /// Ordinals into `E(start_level + 1)`, `E(start_level + 2)`, ...
    pub edges: Vec<usize>,
}

impl FinitePath {
    pub fn at_vertex(level: usize, vertex: usize) -> Self {
        FinitePath {
            start_level: level,
            start_vertex: vertex,
            edges: Vec::new(),
        }
    }

    /// Builds and checks a path starting at level 0.
    pub fn from_root(diagram: &BratteliDiagram, edges: Vec<usize>) -> Result<Self> {
        FinitePath::new(diagram, 0, edges)
    }

    /// Builds and checks a nonempty path; the start vertex is read off the
    /// first edge.
    pub fn new(diagram: &BratteliDiagram, start_level: usize, edges: Vec<usize>) -> Result<Self> {
        let first = *edges
            .first()
            .ok_or_else(|| invalid("nonempty edge list required; use FinitePath::at_vertex"))?;
        let level = start_level + 1;
        if level > diagram.level_count() || first >= diagram.edges(level).len() {
            return Err(invalid(format!("edge {first} does not exist at level {level}")));
        }
        let path = FinitePath {
            start_level,
            start_vertex: diagram.edges(level)[first].source,
            edges,
        };
        diagram.check_path(&path)?;
        Ok(path)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn end_level(&self) -> usize {
        self.start_level + self.edges.len()
    }

    pub fn end_vertex(&self, diagram: &BratteliDiagram) -> usize {
        match self.edges.last() {
            Some(&e) => diagram.edges(self.end_level())[e].range,
            None => self.start_vertex,
        }
    }

    /// `(level, edge ordinal)` pairs along the path.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let base = self.start_level;
        self.edges.iter().enumerate().map(move |(i, &e)| (base + i + 1, e))
    }

    /// The first `len` edges.
    pub fn prefix(&self, len: usize) -> FinitePath {
        FinitePath {
            start_level: self.start_level,
            start_vertex: self.start_vertex,
            edges: self.edges[..len].to_vec(),
        }
    }
}

/// A telescoped diagram together with the original path behind each new edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Telescoped {
    pub diagram: BratteliDiagram,
    pub cuts: Vec<usize>,
    /// `provenance[k-1][i]` lists the original edge ordinals (levels
    /// `cuts[k-1]+1 ..= cuts[k]`) forming edge `i` of the new level `k`.
    pub provenance: Vec<Vec<Vec<usize>>>,
}

impl Telescoped {
    /// Multiplies per-level edge weights along each provenance path.
    pub fn multiply_weights(&self, weights: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.provenance
            .iter()
            .enumerate()
            .map(|(k, level)| {
                let base = self.cuts[k];
                level
                    .iter()
                    .map(|path| {
                        path.iter()
                            .enumerate()
                            .map(|(i, &e)| weights[base + i][e])
                            .product()
                    })
                    .collect()
            })
            .collect()
    }
}

impl BratteliDiagram {
    /// Assembles a diagram. `edges[n-1]` is `E(n)`, so `vertex_names` must
    /// have exactly one more level than `edges`. Everything else is checked
    /// by [`BratteliDiagram::validate`].
    pub fn new(vertex_names: Vec<Vec<String>>, edges: Vec<Vec<Edge>>) -> Result<Self> {
        if vertex_names.len() != edges.len() + 1 {
            return Err(invalid(format!(
                "{} vertex levels for {} edge levels; expected one more vertex level",
                vertex_names.len(),
                edges.len()
            )));
        }
        Ok(BratteliDiagram { vertex_names, edges })
    }

    /// Same as [`BratteliDiagram::new`] with generated names `"n:i"`.
    pub fn from_sizes(sizes: &[usize], edges: Vec<Vec<Edge>>) -> Result<Self> {
        let names = sizes
            .iter()
            .enumerate()
            .map(|(n, &s)| (0..s).map(|i| format!("{n}:{i}")).collect())
            .collect();
        BratteliDiagram::new(names, edges)
    }

    pub fn level_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self, level: usize) -> usize {
        self.vertex_names[level].len()
    }

    pub fn vertex_name(&self, level: usize, vertex: usize) -> &str {
        &self.vertex_names[level][vertex]
    }

    pub fn vertex_names(&self) -> &[Vec<String>] {
        &self.vertex_names
    }

    /// `E(level)`, for `1 <= level <= level_count`.
    pub fn edges(&self, level: usize) -> &[Edge] {
        &self.edges[level - 1]
    }

    pub fn all_edges(&self) -> &[Vec<Edge>] {
        &self.edges
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.edges.is_empty() {
            violations.push(Violation::NoLevels);
        }
        for (level, names) in self.vertex_names.iter().enumerate() {
            if names.is_empty() {
                violations.push(Violation::EmptyLevel { level });
            }
        }
        for (i, level_edges) in self.edges.iter().enumerate() {
            let level = i + 1;
            let below = self.vertex_count(level - 1);
            let here = self.vertex_count(level);
            let mut emits = vec![false; below];
            let mut receives = vec![false; here];
            for (edge, e) in level_edges.iter().enumerate() {
                if e.source >= below {
                    violations.push(Violation::DanglingSource { level, edge, source: e.source });
                } else {
                    emits[e.source] = true;
                }
                if e.range >= here {
                    violations.push(Violation::DanglingRange { level, edge, range: e.range });
                } else {
                    receives[e.range] = true;
                }
            }
            for (vertex, ok) in emits.iter().enumerate() {
                if !ok {
                    violations.push(Violation::NoOutgoingEdge { level: level - 1, vertex });
                }
            }
            for (vertex, ok) in receives.iter().enumerate() {
                if !ok {
                    violations.push(Violation::UnreachedVertex { level, vertex });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(invalid(format!(
                "diagram is not valid ({} violations, first: {v})",
                report.violations.len()
            ))),
        }
    }

    pub fn check_path(&self, path: &FinitePath) -> Result<()> {
        if path.start_level > self.level_count() {
            return Err(invalid(format!("start level {} beyond diagram", path.start_level)));
        }
        if path.end_level() > self.level_count() {
            return Err(invalid(format!(
                "path of length {} from level {} runs past level {}",
                path.len(),
                path.start_level,
                self.level_count()
            )));
        }
        if path.start_vertex >= self.vertex_count(path.start_level) {
            return Err(invalid(format!(
                "vertex {} does not exist at level {}",
                path.start_vertex, path.start_level
            )));
        }
        let mut at = path.start_vertex;
        for (level, e) in path.steps() {
            let edge = self
                .edges(level)
                .get(e)
                .ok_or_else(|| invalid(format!("edge {e} does not exist at level {level}")))?;
            if edge.source != at {
                return Err(invalid(format!(
                    "edge {e} of level {level} starts at {} but the path is at {at}",
                    edge.source
                )));
            }
            at = edge.range;
        }
        Ok(())
    }

    fn check_levels(&self, from: usize, to: usize) -> Result<()> {
        if from > to || to > self.level_count() {
            return Err(invalid(format!(
                "levels {from}..{to} not within 0..={}",
                self.level_count()
            )));
        }
        Ok(())
    }

    /// `counts[w]` = number of paths from level `from` ending at `w` in `V(to)`,
    /// saturating.
    pub fn path_counts(&self, from: usize, to: usize) -> Result<Vec<u128>> {
        self.check_levels(from, to)?;
        let mut counts = vec![1u128; self.vertex_count(from)];
        for level in from + 1..=to {
            let mut next = vec![0u128; self.vertex_count(level)];
            for e in self.edges(level) {
                next[e.range] = next[e.range].saturating_add(counts[e.source]);
            }
            counts = next;
        }
        Ok(counts)
    }

    /// All paths from level `from` ending at `end_vertex` in `V(to)`, in
    /// lexicographic order of edge ordinals. Fails with a capacity error if
    /// there are more than `cap`.
    pub fn enumerate_paths(
        &self,
        from: usize,
        to: usize,
        end_vertex: usize,
        cap: usize,
    ) -> Result<Vec<FinitePath>> {
        self.check_levels(from, to)?;
        if end_vertex >= self.vertex_count(to) {
            return Err(invalid(format!("vertex {end_vertex} does not exist at level {to}")));
        }
        let count = self.path_counts(from, to)?[end_vertex];
        if count > cap as u128 {
            return Err(Error::Capacity { what: "path enumeration", count, cap: cap as u128 });
        }
        // reach[level - from][v]: v can still reach end_vertex
        let mut reach = vec![Vec::new(); to - from + 1];
        reach[to - from] = (0..self.vertex_count(to)).map(|v| v == end_vertex).collect();
        for level in (from + 1..=to).rev() {
            let mut r = vec![false; self.vertex_count(level - 1)];
            for e in self.edges(level) {
                if reach[level - from][e.range] {
                    r[e.source] = true;
                }
            }
            reach[level - 1 - from] = r;
        }
        let mut out = Vec::with_capacity(count as usize);
        if from == to {
            out.push(FinitePath::at_vertex(to, end_vertex));
            return Ok(out);
        }
        self.walk(from, to, &|level, v| reach[level - from][v], &mut out);
        Ok(out)
    }

    /// All paths from level `from` to level `to`, any endpoints, in
    /// lexicographic order. With `from == to` this is one empty path per
    /// vertex of `V(from)`.
    pub fn paths_between(&self, from: usize, to: usize, cap: usize) -> Result<Vec<FinitePath>> {
        self.check_levels(from, to)?;
        let count = self
            .path_counts(from, to)?
            .iter()
            .fold(0u128, |a, &b| a.saturating_add(b));
        if count > cap as u128 {
            return Err(Error::Capacity { what: "path enumeration", count, cap: cap as u128 });
        }
        let mut out = Vec::with_capacity(count as usize);
        if from == to {
            out.extend((0..self.vertex_count(from)).map(|v| FinitePath::at_vertex(from, v)));
            return Ok(out);
        }
        self.walk(from, to, &|_, _| true, &mut out);
        Ok(out)
    }

    fn walk(
        &self,
        from: usize,
        to: usize,
        keep: &dyn Fn(usize, usize) -> bool,
        out: &mut Vec<FinitePath>,
    ) {
        fn rec(
            d: &BratteliDiagram,
            level: usize,
            to: usize,
            at: usize,
            stack: &mut Vec<usize>,
            start: (usize, usize),
            keep: &dyn Fn(usize, usize) -> bool,
            out: &mut Vec<FinitePath>,
        ) {
            if level > to {
                out.push(FinitePath {
                    start_level: start.0,
                    start_vertex: start.1,
                    edges: stack.clone(),
                });
                return;
            }
            for (i, e) in d.edges(level).iter().enumerate() {
                if e.source == at && keep(level, e.range) {
                    stack.push(i);
                    rec(d, level + 1, to, e.range, stack, start, keep, out);
                    stack.pop();
                }
            }
        }
        let mut stack = Vec::with_capacity(to - from);
        for (i, e) in self.edges(from + 1).iter().enumerate() {
            if keep(from + 1, e.range) {
                stack.push(i);
                rec(self, from + 2, to, e.range, &mut stack, (from, e.source), keep, out);
                stack.pop();
            }
        }
    }

    /// Contracts the diagram along `cuts = [0, n_1, n_2, ...]`: new level `k`
    /// has vertices `V(n_k)` and one edge per original path from `n_{k-1}`
    /// to `n_k`. Fails with a capacity error if a new level would have more
    /// than [`TELESCOPE_EDGE_CAP`] edges.
    pub fn telescope(&self, cuts: &[usize]) -> Result<Telescoped> {
        if cuts.first() != Some(&0) {
            return Err(invalid("cut levels must start at 0"));
        }
        if cuts.len() < 2 {
            return Err(invalid("at least two cut levels are required"));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!("cut levels {cuts:?} are not strictly increasing")));
        }
        if *cuts.last().unwrap() > self.level_count() {
            return Err(invalid(format!(
                "cut level {} exceeds level count {}",
                cuts.last().unwrap(),
                self.level_count()
            )));
        }
        let names = cuts.iter().map(|&n| self.vertex_names[n].clone()).collect();
        let mut edges = Vec::with_capacity(cuts.len() - 1);
        let mut provenance = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let paths = self.paths_between(w[0], w[1], TELESCOPE_EDGE_CAP)?;
            edges.push(
                paths
                    .iter()
                    .map(|p| Edge::new(p.start_vertex, p.end_vertex(self)))
                    .collect(),
            );
            provenance.push(paths.into_iter().map(|p| p.edges).collect());
        }
        Ok(Telescoped {
            diagram: BratteliDiagram::new(names, edges)?,
            cuts: cuts.to_vec(),
            provenance,
        })
    }
}
