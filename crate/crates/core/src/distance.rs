//! Path-based distances on a connected weighted graph.
//!
//! * `d1`: weight of the minimal edge path, the minimum-hop path selected by
//!   the vertex ordering.
//! * `d2`: minimum total weight over all paths.
//! * `d3`: minimum total weight over all minimum-hop paths.
//!
//! `d2 <= d3 <= d1` holds entrywise.
//!
//! ## Minimal edge path selection
//!
//! Breadth-first search from a root where the frontier is processed in
//! `(hop count, vertex index)` order. The parent of a vertex at hop `k` is
//! therefore its smallest-indexed neighbour at hop `k - 1`. A query for the
//! pair `(v, w)` always uses the tree rooted at `min(v, w)`, so `(v, w)` and
//! `(w, v)` resolve to the same path.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedGraph};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    D1,
    D2,
    D3,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [DistanceKind::D1, DistanceKind::D2, DistanceKind::D3];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::D1 => "d1",
            DistanceKind::D2 => "d2",
            DistanceKind::D3 => "d3",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(DistanceKind::D1),
            "d2" => Ok(DistanceKind::D2),
            "d3" => Ok(DistanceKind::D3),
            _ => Err(format!(
                "unknown distance kind {s:?} (expected d1, d2 or d3)"
            )),
        }
    }
}

/// A simple path from `vertices[0]` to its last element.
#[derive(Debug, Clone, PartialEq)]
pub struct PathWitness<T> {
    pub vertices: Vec<VertexId>,
    pub weight: T,
}

impl<T: Scalar> PathWitness<T> {
    pub fn hops(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Consecutive vertices adjacent, no repeats, weight equals the edge sum.
    pub fn is_valid_in(&self, g: &WeightedGraph<T>) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        if !self.vertices.iter().all(|v| seen.insert(*v)) {
            return false;
        }
        let mut total = T::zero();
        for pair in self.vertices.windows(2) {
            match g.weight(pair[0].0, pair[1].0) {
                Some(w) => total = total + w.clone(),
                None => return false,
            }
        }
        !T::EXACT || total == self.weight
    }
}

/// Hop counts from `root` and the vertices in `(hop, index)` order.
pub(crate) fn hop_layers<T: Scalar>(g: &WeightedGraph<T>, root: usize) -> (Vec<usize>, Vec<usize>) {
    let n = g.vertex_count();
    let mut hops = vec![usize::MAX; n];
    hops[root] = 0;
    let mut order = vec![root];
    let mut layer = vec![root];
    let mut depth = 0;
    while !layer.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &u in &layer {
            for &(x, _) in g.neighbors(u) {
                if hops[x] == usize::MAX {
                    hops[x] = depth;
                    next.push(x);
                }
            }
        }
        next.sort_unstable();
        order.extend_from_slice(&next);
        layer = next;
    }
    (hops, order)
}

struct SingleSource<T> {
    dist: Vec<Option<T>>,
    parent: Vec<Option<usize>>,
}

impl<T: Scalar> SingleSource<T> {
    fn path_to(&self, root: usize, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut cur = target;
        while cur != root {
            cur = self.parent[cur].expect("reachable vertex has a parent");
            path.push(cur);
        }
        path.reverse();
        path
    }
}

fn d1_tree<T: Scalar>(g: &WeightedGraph<T>, root: usize) -> SingleSource<T> {
    let n = g.vertex_count();
    let (hops, order) = hop_layers(g, root);
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut parent = vec![None; n];
    dist[root] = Some(T::zero());
    for &x in order.iter().skip(1) {
        // Neighbours are sorted, so the first one a layer closer is the smallest.
        let (p, w) = g
            .neighbors(x)
            .iter()
            .find(|(u, _)| hops[*u] + 1 == hops[x])
            .expect("BFS predecessor exists");
        let base = dist[*p].clone().expect("predecessor settled first");
        dist[x] = Some(base + w.clone());
        parent[x] = Some(*p);
    }
    SingleSource { dist, parent }
}

fn d2_tree<T: Scalar>(g: &WeightedGraph<T>, root: usize) -> SingleSource<T> {
    // Dense Dijkstra: graphs here are small and weights only PartialOrd.
    let n = g.vertex_count();
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    dist[root] = Some(T::zero());
    loop {
        let mut best: Option<usize> = None;
        for x in 0..n {
            if done[x] {
                continue;
            }
            if let Some(dx) = &dist[x] {
                match best {
                    Some(b) if dist[b].as_ref().is_some_and(|db| db <= dx) => {}
                    _ => best = Some(x),
                }
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        let du = dist[u].clone().expect("settled");
        for (x, w) in g.neighbors(u) {
            if done[*x] {
                continue;
            }
            let cand = du.clone() + w.clone();
            if dist[*x].as_ref().is_none_or(|dx| cand < *dx) {
                dist[*x] = Some(cand);
                parent[*x] = Some(u);
            }
        }
    }
    SingleSource { dist, parent }
}

fn d3_tree<T: Scalar>(g: &WeightedGraph<T>, root: usize) -> SingleSource<T> {
    let n = g.vertex_count();
    let (hops, order) = hop_layers(g, root);
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut parent = vec![None; n];
    dist[root] = Some(T::zero());
    // Layers are final once the previous layer is, so a single pass in BFS
    // order is a DP over the shortest-path DAG.
    for &x in order.iter().skip(1) {
        let mut best: Option<(usize, T)> = None;
        for (u, w) in g.neighbors(x) {
            if hops[*u] + 1 != hops[x] {
                continue;
            }
            let cand = dist[*u].clone().expect("earlier layer") + w.clone();
            if best.as_ref().is_none_or(|(_, b)| cand < *b) {
                best = Some((*u, cand));
            }
        }
        let (p, d) = best.expect("BFS predecessor exists");
        dist[x] = Some(d);
        parent[x] = Some(p);
    }
    SingleSource { dist, parent }
}

fn single_source<T: Scalar>(
    g: &WeightedGraph<T>,
    root: usize,
    kind: DistanceKind,
) -> SingleSource<T> {
    match kind {
        DistanceKind::D1 => d1_tree(g, root),
        DistanceKind::D2 => d2_tree(g, root),
        DistanceKind::D3 => d3_tree(g, root),
    }
}

/// Distance and witness path from `v` to `w` for any of the three kinds.
pub fn path<T: Scalar>(
    g: &WeightedGraph<T>,
    v: VertexId,
    w: VertexId,
    kind: DistanceKind,
) -> Result<PathWitness<T>> {
    let (a, b) = (g.check_vertex(v)?, g.check_vertex(w)?);
    let (root, target) = if a <= b { (a, b) } else { (b, a) };
    let ss = single_source(g, root, kind);
    let weight = ss.dist[target]
        .clone()
        .ok_or(Error::NotConnected { components: 2 })?;
    let mut verts = ss.path_to(root, target);
    if a > b {
        verts.reverse();
    }
    Ok(PathWitness {
        vertices: verts.into_iter().map(VertexId).collect(),
        weight,
    })
}

/// The minimal edge path from `v` to `w`.
pub fn d1_path<T: Scalar>(
    g: &WeightedGraph<T>,
    v: VertexId,
    w: VertexId,
) -> Result<PathWitness<T>> {
    path(g, v, w, DistanceKind::D1)
}

pub fn d1<T: Scalar>(g: &WeightedGraph<T>, v: VertexId, w: VertexId) -> Result<T> {
    Ok(d1_path(g, v, w)?.weight)
}

pub fn d2<T: Scalar>(g: &WeightedGraph<T>, v: VertexId, w: VertexId) -> Result<T> {
    Ok(path(g, v, w, DistanceKind::D2)?.weight)
}

pub fn d3<T: Scalar>(g: &WeightedGraph<T>, v: VertexId, w: VertexId) -> Result<T> {
    Ok(path(g, v, w, DistanceKind::D3)?.weight)
}

/// Symmetric all-pairs matrix for one distance kind.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    kind: Option<DistanceKind>,
    entries: Vec<Vec<T>>,
    labels: Vec<Option<String>>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// All-pairs distances. Each unordered pair is taken from the
    /// single-source computation rooted at its smaller vertex.
    pub fn compute(g: &WeightedGraph<T>, kind: DistanceKind) -> Result<Self> {
        g.require_connected()?;
        let n = g.vertex_count();
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let ss = single_source(g, s, kind);
                ss.dist
                    .into_iter()
                    .skip(s + 1)
                    .map(|d| d.expect("connected"))
                    .collect()
            })
            .collect();
        let mut entries = vec![vec![T::zero(); n]; n];
        for (s, row) in rows.into_iter().enumerate() {
            for (k, d) in row.into_iter().enumerate() {
                let t = s + 1 + k;
                entries[t][s] = d.clone();
                entries[s][t] = d;
            }
        }
        Ok(Self {
            kind: Some(kind),
            entries,
            labels: g.labels().to_vec(),
        })
    }

    /// Wrap a raw square matrix; no metric properties are assumed.
    pub fn from_entries(entries: Vec<Vec<T>>, kind: Option<DistanceKind>) -> Result<Self> {
        let n = entries.len();
        if let Some(row) = entries.iter().find(|r| r.len() != n) {
            return Err(Error::MismatchedInputs(format!(
                "row of length {} in a {n}x{n} matrix",
                row.len()
            )));
        }
        Ok(Self {
            kind,
            entries,
            labels: vec![None; n],
        })
    }

    pub fn kind(&self) -> Option<DistanceKind> {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, v: usize, w: usize) -> &T {
        &self.entries[v][w]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.entries
    }

    /// Vertex labels in the ordering used to build the matrix.
    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    /// Matrix of the graph reordered by `order`, mapped back to this
    /// matrix's indices: `result[order[i]][order[j]] = self[i][j]`.
    pub fn unpermute(&self, order: &[VertexId]) -> Self {
        let n = self.len();
        let mut entries = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                entries[order[i].0][order[j].0] = self.entries[i][j].clone();
            }
        }
        let mut labels = vec![None; n];
        for i in 0..n {
            labels[order[i].0] = self.labels[i].clone();
        }
        Self {
            kind: self.kind,
            entries,
            labels,
        }
    }

    /// `n` rows of `n` exact values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(Scalar::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Same layout with values rendered as floats, for plotting.
    pub fn to_heatmap_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|x| format!("{}", x.to_f64())).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv<R: Read>(reader: R, kind: Option<DistanceKind>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    T::parse_scalar(cell).map_err(|e| {
                        Error::parse(i + 1, Some(format!("column {}", j + 1)), e.to_string())
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            entries.push(row);
        }
        Self::from_entries(entries, kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleViolation<T> {
    pub v: usize,
    pub z: usize,
    pub w: usize,
    /// `d(v, w)`
    pub direct: T,
    /// `d(v, z) + d(z, w)`
    pub via: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport<T> {
    pub symmetric: bool,
    pub zero_diag: bool,
    pub triangle_violations: Vec<TriangleViolation<T>>,
}

impl<T> MetricReport<T> {
    pub fn is_metric(&self) -> bool {
        self.symmetric && self.zero_diag && self.triangle_violations.is_empty()
    }
}

/// Exhaustive check of symmetry, zero diagonal and the triangle inequality.
/// For symmetric input each violating triple is reported once, with `v < w`.
pub fn metric_check<T: Scalar>(d: &DistanceMatrix<T>) -> MetricReport<T> {
    let n = d.len();
    let symmetric = (0..n).all(|i| (0..i).all(|j| d.get(i, j) == d.get(j, i)));
    let zero_diag = (0..n).all(|i| d.get(i, i).is_zero());
    let mut triangle_violations = Vec::new();
    for v in 0..n {
        for w in 0..n {
            if v == w || (symmetric && v > w) {
                continue;
            }
            for z in 0..n {
                if z == v || z == w {
                    continue;
                }
                let via = d.get(v, z).clone() + d.get(z, w).clone();
                if *d.get(v, w) > via {
                    triangle_violations.push(TriangleViolation {
                        v,
                        z,
                        w,
                        direct: d.get(v, w).clone(),
                        via,
                    });
                }
            }
        }
    }
    MetricReport {
        symmetric,
        zero_diag,
        triangle_violations,
    }
}
