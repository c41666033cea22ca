//! Weighted-graph data model: validation, subgraphs, simple-cycle
//! enumeration, and canonical JSON I/O.

use crate::geom::Point;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const MAX_CYCLE_VERTICES: usize = 16;

/// An undirected edge with a prescribed length. Parallel edges are permitted,
/// loops are not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub length: f64,
}

/// A graph with ordered vertex set and ordered edge list. Edge order is part
/// of the value: files round-trip byte-identically once canonicalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Loop { edge_index: usize },
    UnknownVertex { edge_index: usize, vertex: String },
    NegativeLength { edge_index: usize },
    DuplicateVertex { vertex: String },
    NonFiniteLength { edge_index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Loop { edge_index } => write!(f, "loop at edge {edge_index}"),
            Violation::UnknownVertex { edge_index, vertex } => {
                write!(f, "edge {edge_index} references unknown vertex {vertex:?}")
            }
            Violation::NegativeLength { edge_index } => {
                write!(f, "negative length at edge {edge_index}")
            }
            Violation::DuplicateVertex { vertex } => write!(f, "duplicate vertex {vertex:?}"),
            Violation::NonFiniteLength { edge_index } => {
                write!(f, "non-finite length at edge {edge_index}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("graph too large for cycle enumeration: {vertices} vertices (limit {MAX_CYCLE_VERTICES})")]
    TooLarge { vertices: usize },
    #[error("unknown edge index {0}")]
    UnknownEdge(usize),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl WeightedGraph {
    pub fn new<V, E>(vertices: V, edges: E) -> Self
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, f64)>,
    {
        WeightedGraph {
            vertices: vertices.into_iter().map(Into::into).collect(),
            edges: edges
                .into_iter()
                .map(|(u, v, length)| Edge { u, v, length })
                .collect(),
        }
    }

    /// Convenience constructor from `&str` pairs.
    pub fn from_edges(vertices: &[&str], edges: &[(&str, &str, f64)]) -> Self {
        WeightedGraph {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            edges: edges
                .iter()
                .map(|(u, v, l)| Edge { u: u.to_string(), v: v.to_string(), length: *l })
                .collect(),
        }
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    /// All invariant violations; an empty list means the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for v in &self.vertices {
            if !seen.insert(v.clone()) {
                out.push(Violation::DuplicateVertex { vertex: v.clone() });
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.u == e.v {
                out.push(Violation::Loop { edge_index: i });
            }
            for end in [&e.u, &e.v] {
                if !seen.contains(end) {
                    out.push(Violation::UnknownVertex { edge_index: i, vertex: end.clone() });
                }
            }
            if !e.length.is_finite() {
                out.push(Violation::NonFiniteLength { edge_index: i });
            } else if e.length < 0.0 {
                out.push(Violation::NegativeLength { edge_index: i });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn require_valid(&self) -> Result<(), GraphError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(GraphError::Invalid(msgs.join("; ")))
        }
    }

    pub fn max_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Subgraph on the same vertex set keeping only the chosen edges
    /// (by index into `edges`), lengths preserved, order preserved.
    pub fn induced_sublengths(&self, edge_indices: &[usize]) -> Result<WeightedGraph, GraphError> {
        let mut edges = Vec::with_capacity(edge_indices.len());
        for &i in edge_indices {
            let e = self.edges.get(i).ok_or(GraphError::UnknownEdge(i))?;
            edges.push(e.clone());
        }
        Ok(WeightedGraph { vertices: self.vertices.clone(), edges })
    }

    /// Vertices sorted lexicographically, edge order preserved.
    pub fn canonical(&self) -> WeightedGraph {
        let mut g = self.clone();
        g.vertices.sort();
        g
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<WeightedGraph, GraphError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<WeightedGraph, GraphError> {
        WeightedGraph::from_json(&std::fs::read_to_string(path)?)
    }

    /// Every simple cycle, each reported once up to rotation and reversal.
    ///
    /// Exhaustive DFS with canonical-form deduplication over edge-index
    /// sequences; parallel edge pairs count as 2-cycles. Deterministic output:
    /// sorted by cycle length, then vertex sequence, then edge lengths.
    pub fn enumerate_simple_cycles(&self) -> Result<Vec<Cycle>, GraphError> {
        self.require_valid()?;
        let n = self.vertices.len();
        if n > MAX_CYCLE_VERTICES {
            return Err(GraphError::TooLarge { vertices: n });
        }
        let vidx: BTreeMap<&str, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        // adjacency as (neighbor, edge index)
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (ei, e) in self.edges.iter().enumerate() {
            let (a, b) = (vidx[e.u.as_str()], vidx[e.v.as_str()]);
            adj[a].push((b, ei));
            adj[b].push((a, ei));
        }

        let mut seen: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
        let mut cycles: Vec<Cycle> = Vec::new();

        // DFS from each root, only visiting vertices >= root so each cycle is
        // found at its smallest vertex.
        for root in 0..n {
            let mut path_v = vec![root];
            let mut path_e: Vec<usize> = Vec::new();
            let mut on_path = vec![false; n];
            on_path[root] = true;
            self.dfs_cycles(root, root, &adj, &mut path_v, &mut path_e, &mut on_path, &mut seen, &mut cycles);
        }

        cycles.sort_by(|a, b| {
            (a.vertices.len(), &a.vertices, &a.lengths)
                .partial_cmp(&(b.vertices.len(), &b.vertices, &b.lengths))
                .unwrap()
        });
        Ok(cycles)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_cycles(
        &self,
        root: usize,
        cur: usize,
        adj: &[Vec<(usize, usize)>],
        path_v: &mut Vec<usize>,
        path_e: &mut Vec<usize>,
        on_path: &mut [bool],
        seen: &mut std::collections::BTreeSet<Vec<usize>>,
        cycles: &mut Vec<Cycle>,
    ) {
        for &(next, ei) in &adj[cur] {
            if next < root {
                continue;
            }
            if next == root && path_v.len() >= 2 {
                // closing edge; forbid reusing the edge we arrived by (2-cycles
                // need two distinct parallel edges)
                if *path_e.last().unwrap() == ei && path_v.len() == 2 {
                    continue;
                }
                let mut key: Vec<usize> = path_e.clone();
                key.push(ei);
                let canon = canonical_edge_cycle(&key);
                if seen.insert(canon) {
                    let mut es = path_e.clone();
                    es.push(ei);
                    cycles.push(self.cycle_from(path_v, &es));
                }
                continue;
            }
            if next == root || on_path[next] {
                continue;
            }
            on_path[next] = true;
            path_v.push(next);
            path_e.push(ei);
            self.dfs_cycles(root, next, adj, path_v, path_e, on_path, seen, cycles);
            path_e.pop();
            path_v.pop();
            on_path[next] = false;
        }
    }

    fn cycle_from(&self, path_v: &[usize], path_e: &[usize]) -> Cycle {
        let names: Vec<String> = path_v.iter().map(|&i| self.vertices[i].clone()).collect();
        let lengths: Vec<f64> = path_e.iter().map(|&e| self.edges[e].length).collect();
        Cycle::canonicalized(names, lengths)
    }
}

/// Rotation+reversal canonical form of an edge-index cycle.
fn canonical_edge_cycle(edges: &[usize]) -> Vec<usize> {
    let k = edges.len();
    let mut best: Option<Vec<usize>> = None;
    let mut consider = |seq: Vec<usize>| {
        if best.as_ref().map_or(true, |b| &seq < b) {
            best = Some(seq);
        }
    };
    for start in 0..k {
        let fwd: Vec<usize> = (0..k).map(|i| edges[(start + i) % k]).collect();
        let rev: Vec<usize> = (0..k).map(|i| edges[(start + k - i) % k]).collect();
        consider(fwd);
        consider(rev);
    }
    best.unwrap()
}

/// A simple cycle as a cyclic vertex sequence plus the aligned edge lengths:
/// `lengths[i]` is the edge from `vertices[i]` to `vertices[(i + 1) % k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cycle {
    pub vertices: Vec<String>,
    pub lengths: Vec<f64>,
}

impl Cycle {
    /// Normalize rotation (smallest vertex first) and direction (lexicographically
    /// smaller neighbor second), keeping lengths aligned.
    fn canonicalized(vertices: Vec<String>, lengths: Vec<f64>) -> Cycle {
        let k = vertices.len();
        if k == 0 {
            return Cycle { vertices, lengths };
        }
        let start = (0..k).min_by_key(|&i| &vertices[i]).unwrap();
        let rotate = |dir_fwd: bool| -> (Vec<String>, Vec<f64>) {
            let mut vs = Vec::with_capacity(k);
            let mut ls = Vec::with_capacity(k);
            for i in 0..k {
                if dir_fwd {
                    vs.push(vertices[(start + i) % k].clone());
                    ls.push(lengths[(start + i) % k]);
                } else {
                    vs.push(vertices[(start + k - i) % k].clone());
                    // edge preceding the vertex in forward order
                    ls.push(lengths[(start + k - i + k - 1) % k]);
                }
            }
            (vs, ls)
        };
        let (fv, fl) = rotate(true);
        let (rv, rl) = rotate(false);
        if (&fv, &fl) <= (&rv, &rl) {
            Cycle { vertices: fv, lengths: fl }
        } else {
            Cycle { vertices: rv, lengths: rl }
        }
    }
}

/// A map from vertices to plane points. Keys are exactly the vertex set of
/// the graph the realization belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub positions: BTreeMap<String, Point>,
}

impl Realization {
    pub fn new(positions: BTreeMap<String, Point>) -> Self {
        Realization { positions }
    }

    pub fn get(&self, v: &str) -> Option<Point> {
        self.positions.get(v).copied()
    }

    /// |d(p(u), p(v)) - l(uv)| for one edge.
    pub fn edge_residual(&self, e: &Edge) -> Option<f64> {
        let pu = self.get(&e.u)?;
        let pv = self.get(&e.v)?;
        Some((pu.dist(pv) - e.length).abs())
    }

    /// Max edge residual over the whole graph; `None` if a vertex is missing.
    pub fn max_residual(&self, g: &WeightedGraph) -> Option<f64> {
        let mut m: f64 = 0.0;
        for e in &g.edges {
            m = m.max(self.edge_residual(e)?);
        }
        Some(m)
    }

    /// Defined on exactly the graph's vertex set?
    pub fn matches_vertex_set(&self, g: &WeightedGraph) -> bool {
        self.positions.len() == g.vertices.len()
            && g.vertices.iter().all(|v| self.positions.contains_key(v))
    }

    pub fn reflect_x(&self) -> Realization {
        Realization {
            positions: self.positions.iter().map(|(k, p)| (k.clone(), p.reflect_x())).collect(),
        }
    }
}

/// Gauge fix: `origin_vertex` at (0,0) and `axis_vertex` at (l(ab), 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinnedFrame {
    pub origin_vertex: String,
    pub axis_vertex: String,
}

impl PinnedFrame {
    pub fn new(origin: &str, axis: &str) -> Self {
        PinnedFrame { origin_vertex: origin.to_string(), axis_vertex: axis.to_string() }
    }

    /// The pinned edge length: requires an edge between the two pin vertices
    /// with positive length.
    pub fn pinned_length(&self, g: &WeightedGraph) -> Result<f64, GraphError> {
        let e = g
            .edges
            .iter()
            .find(|e| {
                (e.u == self.origin_vertex && e.v == self.axis_vertex)
                    || (e.v == self.origin_vertex && e.u == self.axis_vertex)
            })
            .ok_or_else(|| {
                GraphError::Invalid(format!(
                    "no edge between pin vertices {:?} and {:?}",
                    self.origin_vertex, self.axis_vertex
                ))
            })?;
        if e.length <= 0.0 {
            return Err(GraphError::Invalid("pinned edge must have positive length".into()));
        }
        Ok(e.length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(
            &["v1", "v2", "v3"],
            &[("v1", "v2", 3.0), ("v2", "v3", 4.0), ("v3", "v1", 5.0)],
        )
    }

    #[test]
    fn valid_triangle() {
        assert!(triangle().validate().is_empty());
    }

    #[test]
    fn loop_and_negative_length_are_violations() {
        let g = WeightedGraph::from_edges(&["v1", "v2"], &[("v1", "v1", 1.0), ("v1", "v2", -1.0)]);
        let v = g.validate();
        assert!(v.contains(&Violation::Loop { edge_index: 0 }));
        assert!(v.contains(&Violation::NegativeLength { edge_index: 1 }));
    }

    #[test]
    fn unknown_vertex_is_a_violation() {
        let g = WeightedGraph::from_edges(&["v1"], &[("v1", "vX", 1.0)]);
        assert_eq!(
            g.validate(),
            vec![Violation::UnknownVertex { edge_index: 0, vertex: "vX".into() }]
        );
    }

    #[test]
    fn tree_has_no_cycles() {
        let g = WeightedGraph::from_edges(
            &["a", "b", "c", "d"],
            &[("a", "b", 1.0), ("b", "c", 1.0), ("b", "d", 1.0)],
        );
        assert!(g.enumerate_simple_cycles().unwrap().is_empty());
    }

    #[test]
    fn k4_has_seven_cycles() {
        let vs = ["v1", "v2", "v3", "v4"];
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((vs[i], vs[j], 1.0));
            }
        }
        let g = WeightedGraph::from_edges(&vs, &edges);
        let cycles = g.enumerate_simple_cycles().unwrap();
        assert_eq!(cycles.len(), 7);
        let threes = cycles.iter().filter(|c| c.vertices.len() == 3).count();
        let fours = cycles.iter().filter(|c| c.vertices.len() == 4).count();
        assert_eq!((threes, fours), (4, 3));
    }

    #[test]
    fn parallel_pair_is_a_two_cycle() {
        let g = WeightedGraph::from_edges(&["a", "b"], &[("a", "b", 1.0), ("a", "b", 2.0)]);
        let cycles = g.enumerate_simple_cycles().unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec!["a", "b"]);
        let mut ls = cycles[0].lengths.clone();
        ls.sort_by(f64::total_cmp);
        assert_eq!(ls, vec![1.0, 2.0]);
    }

    #[test]
    fn cycle_enumeration_invariant_under_relabeling() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let g = WeightedGraph::from_edges(
            &["v1", "v2", "v3", "v4", "v5"],
            &[
                ("v1", "v2", 1.0),
                ("v2", "v3", 2.0),
                ("v3", "v1", 3.0),
                ("v3", "v4", 4.0),
                ("v4", "v5", 5.0),
                ("v5", "v3", 6.0),
                ("v1", "v4", 7.0),
            ],
        );
        let base = g.enumerate_simple_cycles().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let mut names = g.vertices.clone();
            names.shuffle(&mut rng);
            let rename: BTreeMap<&String, &String> = g.vertices.iter().zip(&names).collect();
            let g2 = WeightedGraph {
                vertices: names.clone(),
                edges: g
                    .edges
                    .iter()
                    .map(|e| Edge {
                        u: rename[&e.u].clone(),
                        v: rename[&e.v].clone(),
                        length: e.length,
                    })
                    .collect(),
            };
            let cycles2 = g2.enumerate_simple_cycles().unwrap();
            assert_eq!(base.len(), cycles2.len());
            // multisets of sorted-length vectors must agree
            let key = |cs: &[Cycle]| {
                let mut v: Vec<Vec<u64>> = cs
                    .iter()
                    .map(|c| {
                        let mut l: Vec<u64> = c.lengths.iter().map(|x| x.to_bits()).collect();
                        l.sort_unstable();
                        l
                    })
                    .collect();
                v.sort();
                v
            };
            assert_eq!(key(&base), key(&cycles2));
        }
    }

    #[test]
    fn consecutive_cycle_vertices_are_adjacent() {
        let g = triangle();
        for c in g.enumerate_simple_cycles().unwrap() {
            let k = c.vertices.len();
            for i in 0..k {
                let (a, b) = (&c.vertices[i], &c.vertices[(i + 1) % k]);
                assert!(g
                    .edges
                    .iter()
                    .any(|e| (&e.u == a && &e.v == b) || (&e.u == b && &e.v == a)));
            }
        }
    }

    #[test]
    fn size_limit_enforced() {
        let names: Vec<String> = (0..17).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let g = WeightedGraph::from_edges(&refs, &[]);
        assert!(matches!(g.enumerate_simple_cycles(), Err(GraphError::TooLarge { vertices: 17 })));
    }

    #[test]
    fn induced_sublengths_identity_and_empty() {
        let g = triangle();
        let all: Vec<usize> = (0..g.edges.len()).collect();
        assert_eq!(g.induced_sublengths(&all).unwrap(), g);
        let none = g.induced_sublengths(&[]).unwrap();
        assert!(none.edges.is_empty());
        assert_eq!(none.vertices, g.vertices);
        assert!(matches!(g.induced_sublengths(&[9]), Err(GraphError::UnknownEdge(9))));
    }

    #[test]
    fn json_round_trip_is_byte_identical_for_canonical_files() {
        let g = WeightedGraph::from_edges(
            &["b", "a"],
            &[("b", "a", 1.5), ("a", "b", 0.25)],
        )
        .canonical();
        let s1 = g.to_json();
        let g2 = WeightedGraph::from_json(&s1).unwrap();
        assert_eq!(g2.to_json(), s1);
    }

    #[test]
    fn unknown_json_keys_rejected() {
        let s = r#"{"vertices": ["a"], "edges": [], "extra": 1}"#;
        assert!(WeightedGraph::from_json(s).is_err());
        let s2 = r#"{"vertices": ["a", "b"], "edges": [{"u":"a","v":"b","length":1.0,"w":2}]}"#;
        assert!(WeightedGraph::from_json(s2).is_err());
    }
}
