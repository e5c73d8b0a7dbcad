//! Weighted undirected graphs with an explicit vertex ordering.
//!
//! The ordering is the index order of the vertices: vertex `i` precedes
//! vertex `j` iff `i < j`. The minimal-edge-path distance depends on it, so
//! it is carried through serialization verbatim and can be permuted with
//! [`WeightedGraph::reorder`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Position of a vertex in the graph's ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Normalized undirected edge key, `(min, max)`.
pub fn edge_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    labels: Vec<Option<String>>,
    /// Neighbour lists sorted by neighbour index.
    adjacency: Vec<Vec<(usize, T)>>,
    edges: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Build a graph on `n` vertices. Rejects self-loops, duplicate edges,
    /// non-positive weights and vertices not incident to any edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        Self::with_labels(vec![None; n], edges)
    }

    pub fn with_labels<I>(labels: Vec<Option<String>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let n = labels.len();
        let mut map = BTreeMap::new();
        for (u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { index: x, count: n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !w.is_positive() {
                return Err(Error::NonPositiveWeight {
                    u,
                    v,
                    weight: w.render(),
                });
            }
            let key = edge_key(u, v);
            if map.insert(key, w).is_some() {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(u, v), w) in &map {
            adjacency[u].push((v, w.clone()));
            adjacency[v].push((u, w.clone()));
        }
        for (i, adj) in adjacency.iter_mut().enumerate() {
            if adj.is_empty() {
                return Err(Error::IsolatedVertex(i));
            }
            adj.sort_by_key(|&(x, _)| x);
        }
        Ok(Self {
            labels,
            adjacency,
            edges: map,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count()).map(VertexId)
    }

    /// Edges as `(u, v, weight)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        self.edges.iter().map(|(&(u, v), w)| (u, v, w))
    }

    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.keys().copied().collect()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<&T> {
        self.edges.get(&edge_key(u, v))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&edge_key(u, v))
    }

    /// Neighbours of `u` in ascending index order, with edge weights.
    pub fn neighbors(&self, u: usize) -> &[(usize, T)] {
        &self.adjacency[u]
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels[v].as_deref()
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<usize> {
        if v.0 < self.vertex_count() {
            Ok(v.0)
        } else {
            Err(Error::VertexOutOfRange {
                index: v.0,
                count: self.vertex_count(),
            })
        }
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(x, _) in &self.adjacency[u] {
                    if !seen[x] {
                        seen[x] = true;
                        comp.push(x);
                        queue.push_back(x);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// True iff every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn require_connected(&self) -> Result<()> {
        let c = self.components().len();
        if c <= 1 {
            Ok(())
        } else {
            Err(Error::NotConnected { components: c })
        }
    }

    /// Induced subgraph on the largest component (ties go to the component
    /// holding the smaller vertex). Relative vertex order is preserved; the
    /// second value maps new indices to old ones.
    pub fn largest_component(&self) -> (Self, Vec<usize>) {
        let comps = self.components();
        let best = comps
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.len().cmp(&b.len()).then(j.cmp(i)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let keep = comps.into_iter().nth(best).unwrap_or_default();
        (self.induced(&keep), keep)
    }

    fn induced(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![usize::MAX; self.vertex_count()];
        for (i, &old) in keep.iter().enumerate() {
            new_index[old] = i;
        }
        let labels = keep.iter().map(|&old| self.labels[old].clone()).collect();
        let edges = self
            .edges()
            .filter(|&(u, v, _)| new_index[u] != usize::MAX && new_index[v] != usize::MAX)
            .map(|(u, v, w)| (new_index[u], new_index[v], w.clone()));
        Self::with_labels(labels, edges).expect("induced subgraph of a component is well-formed")
    }

    /// Relabel so that new vertex `i` is old vertex `order[i]`.
    pub fn reorder(&self, order: &[VertexId]) -> Result<Self> {
        let n = self.vertex_count();
        if order.len() != n {
            return Err(Error::BadOrdering(format!(
                "expected {n} entries, got {}",
                order.len()
            )));
        }
        let mut new_index = vec![usize::MAX; n];
        for (i, v) in order.iter().enumerate() {
            let old = self.check_vertex(*v)?;
            if new_index[old] != usize::MAX {
                return Err(Error::BadOrdering(format!("vertex {old} listed twice")));
            }
            new_index[old] = i;
        }
        let labels = order.iter().map(|v| self.labels[v.0].clone()).collect();
        let edges = self
            .edges()
            .map(|(u, v, w)| (new_index[u], new_index[v], w.clone()));
        Self::with_labels(labels, edges)
    }

    /// Replace every weight by `f(u, v, w)`; the result must stay positive.
    pub fn map_weights<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, &T) -> Result<T>,
    {
        let mut edges = Vec::with_capacity(self.edge_count());
        for (u, v, w) in self.edges() {
            edges.push((u, v, f(u, v, w)?));
        }
        Self::with_labels(self.labels.clone(), edges)
    }

    pub fn apply_transform(&self, t: &WeightTransform<T>) -> Result<Self> {
        self.map_weights(|u, v, w| t.apply_edge(u, v, w))
    }

    /// Same topology and ordering with weights converted to another scalar.
    pub fn convert<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Result<WeightedGraph<U>> {
        WeightedGraph::with_labels(
            self.labels.clone(),
            self.edges().map(|(u, v, w)| (u, v, f(w))),
        )
    }
}

/// An edgewise weight operator `W -> f(W)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightTransform<T> {
    Reciprocal,
    Scale(T),
    /// Explicit value per edge, keyed by `(min, max)`.
    Table(BTreeMap<(usize, usize), T>),
}

impl<T: Scalar> WeightTransform<T> {
    pub fn apply_edge(&self, u: usize, v: usize, w: &T) -> Result<T> {
        let out = match self {
            WeightTransform::Reciprocal => {
                if !w.is_positive() {
                    return Err(Error::NonPositiveWeight {
                        u,
                        v,
                        weight: w.render(),
                    });
                }
                w.recip()
            }
            WeightTransform::Scale(c) => c.clone() * w.clone(),
            WeightTransform::Table(table) => table
                .get(&edge_key(u, v))
                .cloned()
                .ok_or(Error::MissingTableEntry(u, v))?,
        };
        if !out.is_positive() {
            return Err(Error::NonPositiveWeight {
                u,
                v,
                weight: out.render(),
            });
        }
        Ok(out)
    }

    /// Table transform reproducing the weights of `g` (the identity on `g`).
    pub fn identity_table(g: &WeightedGraph<T>) -> Self {
        WeightTransform::Table(g.edges.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
    pub weight: String,
}

/// On-disk graph form. The `vertices` array order is the vertex ordering and
/// each `id` must equal its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            vertices: self
                .labels
                .iter()
                .enumerate()
                .map(|(id, label)| VertexJson {
                    id,
                    label: label.clone(),
                })
                .collect(),
            edges: self
                .edges()
                .map(|(u, v, w)| EdgeJson {
                    u,
                    v,
                    weight: w.render(),
                })
                .collect(),
        }
    }

    pub fn from_json_value(doc: &GraphJson) -> Result<Self> {
        for (pos, vx) in doc.vertices.iter().enumerate() {
            if vx.id != pos {
                return Err(Error::BadOrdering(format!(
                    "vertex at position {pos} has id {}",
                    vx.id
                )));
            }
        }
        let labels = doc.vertices.iter().map(|v| v.label.clone()).collect();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (i, e) in doc.edges.iter().enumerate() {
            let w = T::parse_scalar(&e.weight)
                .map_err(|err| Error::parse(i + 1, Some("weight".into()), err.to_string()))?;
            edges.push((e.u, e.v, w));
        }
        Self::with_labels(labels, edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        Self::from_json_value(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn square() -> WeightedGraph<Rational> {
        WeightedGraph::from_edges(
            4,
            [
                (0, 1, q(1, 1)),
                (1, 2, q(1, 1)),
                (2, 3, q(1, 1)),
                (3, 0, q(1, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn connectivity() {
        assert!(square().is_connected());
        let two = WeightedGraph::from_edges(4, [(0, 1, q(1, 1)), (2, 3, q(1, 1))]).unwrap();
        assert!(!two.is_connected());
        assert!(matches!(
            two.require_connected(),
            Err(Error::NotConnected { components: 2 })
        ));
        let one = WeightedGraph::from_edges(2, [(0, 1, q(1, 1))]).unwrap();
        assert!(one.is_connected());
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 0, q(1, 1))]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 1, q(1, 1)), (1, 0, q(2, 1))]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 1, q(0, 1))]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(3, [(0, 1, q(1, 1))]),
            Err(Error::IsolatedVertex(2))
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 5, q(1, 1))]),
            Err(Error::VertexOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn reciprocal_of_chorded_four_cycle() {
        // a=0, b=1, c=2, d=3
        let g = WeightedGraph::from_edges(
            4,
            [
                (0, 1, q(1, 1)),
                (1, 2, q(1, 1)),
                (2, 3, q(1, 1)),
                (0, 3, q(1, 2)),
            ],
        )
        .unwrap();
        let r = g.apply_transform(&WeightTransform::Reciprocal).unwrap();
        assert_eq!(r.weight(0, 3), Some(&q(2, 1)));
        assert_eq!(r.weight(1, 2), Some(&q(1, 1)));
        assert_eq!(r.apply_transform(&WeightTransform::Reciprocal).unwrap(), g);
    }

    #[test]
    fn scale_and_identity_table() {
        let g = WeightedGraph::from_edges(2, [(0, 1, q(1, 2))]).unwrap();
        let s = g.apply_transform(&WeightTransform::Scale(q(3, 1))).unwrap();
        assert_eq!(s.weight(0, 1), Some(&q(3, 2)));
        let id = WeightTransform::identity_table(&g);
        assert_eq!(g.apply_transform(&id).unwrap(), g);
        assert!(matches!(
            g.apply_transform(&WeightTransform::Scale(q(-1, 1))),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            g.apply_transform(&WeightTransform::Table(BTreeMap::new())),
            Err(Error::MissingTableEntry(0, 1))
        ));
    }

    #[test]
    fn reorder_permutes_labels_and_edges() {
        let g = WeightedGraph::with_labels(
            vec![Some("a".into()), Some("b".into()), Some("c".into())],
            [(0, 1, q(1, 1)), (1, 2, q(5, 1))],
        )
        .unwrap();
        let r = g.reorder(&[VertexId(2), VertexId(0), VertexId(1)]).unwrap();
        assert_eq!(r.label(0), Some("c"));
        assert_eq!(r.weight(0, 2), Some(&q(5, 1)));
        assert_eq!(r.weight(1, 2), Some(&q(1, 1)));
        assert!(g.reorder(&[VertexId(0), VertexId(0), VertexId(1)]).is_err());
    }

    #[test]
    fn largest_component_keeps_order() {
        let g = WeightedGraph::from_edges(5, [(0, 4, q(1, 1)), (1, 2, q(1, 1)), (2, 3, q(1, 2))])
            .unwrap();
        let (h, kept) = g.largest_component();
        assert_eq!(kept, vec![1, 2, 3]);
        assert_eq!(h.weight(1, 2), Some(&q(1, 2)));
        assert!(h.is_connected());
    }

    #[test]
    fn json_round_trip() {
        let g = WeightedGraph::with_labels(vec![Some("(60,1/4)".into()), None], [(0, 1, q(1, 3))])
            .unwrap();
        let text = g.to_json();
        assert!(text.contains("\"1/3\""));
        assert_eq!(WeightedGraph::<Rational>::from_json(&text).unwrap(), g);
        let bad = r#"{"vertices":[{"id":1},{"id":0}],"edges":[{"u":0,"v":1,"weight":"1"}]}"#;
        assert!(matches!(
            WeightedGraph::<Rational>::from_json(bad),
            Err(Error::BadOrdering(_))
        ));
    }
}
