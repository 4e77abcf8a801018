//! JSON file formats.
//!
//! - diagram: `{"levels": N, "vertices": [[name, ...], ...], "edges":
//!   [[{"source": i, "range": j, "weight": w}, ...], ...]}` with `N + 1`
//!   vertex levels, `N` edge levels and `weight` defaulting to 1;
//! - matrix: an array of equal-length rows;
//! - graph: `{"vertices": [name, ...], "edges": [{"source", "range"}, ...]}`,
//!   endpoints given by index or by vertex name;
//! - potential: `{"depth": k, "values": {"e1,e2,...": g}}`, keys are
//!   comma-separated edge indices;
//! - cylinder function: `{"depth": d, "values": {"i1,...,id": f}}`, keys are
//!   edge ordinals at levels `1..=d`; depth 0 uses the single key `""`.
//!
//! Parse errors carry serde_json's line and column.

use std::collections::{BTreeMap, HashMap};

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cocycle::{CylinderFunction, WeightedSystem};
use crate::diagram::{BratteliDiagram, Edge};
use crate::error::{invalid, Result};
use crate::sft::{Graph, SftSystem};

/// Upper bound on paths enumerated when loading a cylinder function.
pub const FUNCTION_PATH_CAP: usize = 1 << 20;

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub source: usize,
    pub range: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramFile {
    pub levels: usize,
    pub vertices: Vec<Vec<String>>,
    pub edges: Vec<Vec<EdgeRecord>>,
}

impl DiagramFile {
    /// The diagram as written; structural violations are left for
    /// [`BratteliDiagram::validate`].
    pub fn to_diagram(&self) -> Result<BratteliDiagram> {
        if self.vertices.len() != self.levels + 1 {
            return Err(invalid(format!(
                "\"levels\" is {} but \"vertices\" has {} levels (expected {})",
                self.levels,
                self.vertices.len(),
                self.levels + 1
            )));
        }
        if self.edges.len() != self.levels {
            return Err(invalid(format!(
                "\"levels\" is {} but \"edges\" has {} levels",
                self.levels,
                self.edges.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .map(|level| level.iter().map(|e| Edge::new(e.source, e.range)).collect())
            .collect();
        BratteliDiagram::new(self.vertices.clone(), edges)
    }

    pub fn weights(&self) -> Vec<Vec<f64>> {
        self.edges
            .iter()
            .map(|level| level.iter().map(|e| e.weight.unwrap_or(1.0)).collect())
            .collect()
    }

    pub fn to_system(&self) -> Result<WeightedSystem> {
        WeightedSystem::new(self.to_diagram()?, self.weights())
    }

    pub fn from_system(system: &WeightedSystem) -> Self {
        let d = system.diagram();
        DiagramFile {
            levels: d.level_count(),
            vertices: d.vertex_names().to_vec(),
            edges: d
                .all_edges()
                .iter()
                .zip(system.weights())
                .map(|(es, ws)| {
                    es.iter()
                        .zip(ws)
                        .map(|(e, w)| EdgeRecord { source: e.source, range: e.range, weight: Some(*w) })
                        .collect()
                })
                .collect(),
        }
    }
}

pub fn load_diagram(text: &str) -> Result<DiagramFile> {
    parse(text)
}

pub fn write_diagram(file: &DiagramFile) -> String {
    serde_json::to_string_pretty(file).expect("diagram serializes")
}

pub fn load_matrix(text: &str) -> Result<Array2<f64>> {
    let rows: Vec<Vec<f64>> = parse(text)?;
    matrix_from_rows(rows)
}

pub fn matrix_from_rows(rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(invalid("matrix is empty"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(invalid(format!("row {i} has {} entries, row 0 has {ncols}", rows[i].len())));
    }
    let nrows = rows.len();
    Ok(Array2::from_shape_vec((nrows, ncols), rows.into_iter().flatten().collect()).expect("shape checked"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEdge {
    pub source: VertexRef,
    pub range: VertexRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<Graph> {
        let resolve = |r: &VertexRef, i: usize| -> Result<usize> {
            match r {
                VertexRef::Index(v) => Ok(*v),
                VertexRef::Name(n) => self
                    .vertices
                    .iter()
                    .position(|x| x == n)
                    .ok_or_else(|| invalid(format!("edge {i} names unknown vertex {n:?}"))),
            }
        };
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| Ok(Edge::new(resolve(&e.source, i)?, resolve(&e.range, i)?)))
            .collect::<Result<Vec<_>>>()?;
        Graph::new(self.vertices.clone(), edges)
    }
}

pub fn load_graph(text: &str) -> Result<Graph> {
    parse::<GraphFile>(text)?.to_graph()
}

/// `{"depth": d, "values": {"i,j,...": x}}`, shared by potentials and
/// cylinder functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordTable {
    pub depth: usize,
    pub values: BTreeMap<String, f64>,
}

fn parse_key(key: &str) -> Result<Vec<usize>> {
    if key.trim().is_empty() {
        return Ok(Vec::new());
    }
    key.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| invalid(format!("key {key:?}: {s:?} is not an edge index")))
        })
        .collect()
}

pub fn format_key(word: &[usize]) -> String {
    word.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
}

impl WordTable {
    pub fn to_map(&self) -> Result<HashMap<Vec<usize>, f64>> {
        let mut map = HashMap::with_capacity(self.values.len());
        for (k, v) in &self.values {
            if map.insert(parse_key(k)?, *v).is_some() {
                return Err(invalid(format!("key {k:?} repeats an earlier word")));
            }
        }
        Ok(map)
    }

    pub fn to_potential(&self, graph: Graph) -> Result<SftSystem> {
        SftSystem::new(graph, self.depth, &self.to_map()?)
    }

    pub fn to_cylinder_function(&self, diagram: &BratteliDiagram) -> Result<CylinderFunction> {
        if self.depth == 0 {
            return match self.values.get("") {
                Some(c) if self.values.len() == 1 => Ok(CylinderFunction::constant(*c)),
                _ => Err(invalid("depth-0 function needs exactly the key \"\"")),
            };
        }
        CylinderFunction::from_map(diagram, self.depth, &self.to_map()?, FUNCTION_PATH_CAP)
    }
}

pub fn load_word_table(text: &str) -> Result<WordTable> {
    parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::Error;

    const DIAGRAM: &str = r#"{
        "levels": 2,
        "vertices": [["r"], ["a", "b"], ["c"]],
        "edges": [
            [{"source": 0, "range": 0, "weight": 2.0}, {"source": 0, "range": 1}],
            [{"source": 0, "range": 0}, {"source": 1, "range": 0, "weight": 0.5}]
        ]
    }"#;

    #[test]
    fn diagram_round_trip() {
        let f = load_diagram(DIAGRAM).unwrap();
        let s = f.to_system().unwrap();
        assert_eq!(s.weights(), &[vec![2.0, 1.0], vec![1.0, 0.5]]);
        let again = load_diagram(&write_diagram(&DiagramFile::from_system(&s))).unwrap();
        assert_eq!(again.to_system().unwrap().weights(), s.weights());
        assert_eq!(again.vertices, f.vertices);
    }

    #[test]
    fn diagram_errors() {
        let err = load_diagram(r#"{"levels": 1, "vertices": [["a"]], "edges": [[]]}"#)
            .unwrap()
            .to_diagram()
            .unwrap_err();
        assert!(err.to_string().contains("levels"));
        match load_diagram("{\"levels\": 1,\n \"vertices\": [[\"a\"]] x") {
            Err(Error::InvalidArgument(m)) => assert!(m.contains("line 2"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(load_diagram(r#"{"levels": 0, "vertices": [["a"]], "edges": [], "extra": 1}"#).is_err());
    }

    #[test]
    fn matrix_and_graph() {
        let m = load_matrix("[[1, 1], [1, 0]]").unwrap();
        assert_eq!(m.dim(), (2, 2));
        assert!(load_matrix("[[1, 1], [1]]").is_err());
        assert!(load_matrix("[]").is_err());
        let g = load_graph(r#"{"vertices": ["x", "y"], "edges": [
            {"source": "x", "range": "x"}, {"source": 0, "range": 1}, {"source": "y", "range": "x"}]}"#)
        .unwrap();
        let expected = Graph::new(vec!["x".into(), "y".into()], Graph::golden_mean().edges().to_vec()).unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn potential_and_function_tables() {
        let g = Graph::full_shift(2);
        let t = load_word_table(r#"{"depth": 1, "values": {"0": 0.5, "1": 2}}"#).unwrap();
        assert_eq!(t.to_potential(g.clone()).unwrap().potential(&[1]).unwrap(), 2.0);
        let bad = load_word_table(r#"{"depth": 1, "values": {"0": 0.5, "x": 2}}"#).unwrap();
        assert!(bad.to_potential(g).is_err());

        let s = families::pascal(3);
        let t = load_word_table(r#"{"depth": 1, "values": {"0": 1, "1": 0}}"#).unwrap();
        let f = t.to_cylinder_function(s.diagram()).unwrap();
        assert_eq!(f.values(), &[1.0, 0.0]);
        let c = load_word_table(r#"{"depth": 0, "values": {"": 3}}"#).unwrap();
        assert_eq!(c.to_cylinder_function(s.diagram()).unwrap(), CylinderFunction::constant(3.0));
        assert_eq!(format_key(&[3, 0, 12]), "3,0,12");
    }
}
