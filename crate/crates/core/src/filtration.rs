//! Vietoris-Rips (clique) filtration up to dimension 2.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::distance::{DistanceKind, DistanceMatrix};
use crate::scalar::Scalar;

/// A simplex of dimension 0, 1 or 2 on strictly increasing vertices.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Simplex {
    verts: [usize; 3],
    len: u8,
}

impl Simplex {
    pub fn vertex(v: usize) -> Self {
        Self {
            verts: [v, 0, 0],
            len: 1,
        }
    }

    pub fn edge(u: usize, v: usize) -> Self {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        assert!(a != b, "degenerate edge");
        Self {
            verts: [a, b, 0],
            len: 2,
        }
    }

    pub fn triangle(a: usize, b: usize, c: usize) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        assert!(v[0] < v[1] && v[1] < v[2], "degenerate triangle");
        Self { verts: v, len: 3 }
    }

    pub fn from_slice(vs: &[usize]) -> Option<Self> {
        match *vs {
            [a] => Some(Self::vertex(a)),
            [a, b] if a != b => Some(Self::edge(a, b)),
            [a, b, c] if a != b && b != c && a != c => Some(Self::triangle(a, b, c)),
            _ => None,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// Codimension-one faces, in lexicographic order.
    pub fn faces(&self) -> Vec<Simplex> {
        let v = self.vertices();
        match v.len() {
            2 => vec![Self::vertex(v[0]), Self::vertex(v[1])],
            3 => vec![
                Self::edge(v[0], v[1]),
                Self::edge(v[0], v[2]),
                Self::edge(v[1], v[2]),
            ],
            _ => Vec::new(),
        }
    }

    /// Endpoints of an edge.
    pub fn as_edge(&self) -> Option<(usize, usize)> {
        (self.len == 2).then(|| (self.verts[0], self.verts[1]))
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.vertices().cmp(other.vertices())
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration<T> {
    simplices: Vec<(Simplex, T)>,
    index: HashMap<Simplex, usize>,
    vertex_count: usize,
    kind: Option<DistanceKind>,
    labels: Vec<Option<String>>,
}

/// Total order used by the filtration: value, then dimension, then vertices.
fn entry_order<T: Scalar>(a: &(Simplex, T), b: &(Simplex, T)) -> Ordering {
    a.1.partial_cmp(&b.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.dim().cmp(&b.0.dim()))
        .then(a.0.cmp(&b.0))
}

impl<T: Scalar> Filtration<T> {
    /// Full clique filtration: every vertex at 0, every pair at its
    /// distance, every triple at the largest of its three distances.
    pub fn build(d: &DistanceMatrix<T>) -> Self {
        let n = d.len();
        let mut simplices = Vec::new();
        for v in 0..n {
            simplices.push((Simplex::vertex(v), T::zero()));
        }
        for u in 0..n {
            for v in u + 1..n {
                simplices.push((Simplex::edge(u, v), d.get(u, v).clone()));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let mut m = d.get(a, b).clone();
                    for x in [d.get(a, c), d.get(b, c)] {
                        if *x > m {
                            m = x.clone();
                        }
                    }
                    simplices.push((Simplex::triangle(a, b, c), m));
                }
            }
        }
        simplices.sort_by(entry_order);
        let index = simplices
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (*s, i))
            .collect();
        Self {
            simplices,
            index,
            vertex_count: n,
            kind: d.kind(),
            labels: d.labels().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplex(&self, i: usize) -> Simplex {
        self.simplices[i].0
    }

    pub fn value(&self, i: usize) -> &T {
        &self.simplices[i].1
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Simplex, T)> {
        self.simplices.iter()
    }

    pub fn position(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn kind(&self) -> Option<DistanceKind> {
        self.kind
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    /// Filtration positions of the faces of simplex `i`, ascending.
    pub fn boundary(&self, i: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self.simplices[i]
            .0
            .faces()
            .iter()
            .map(|f| self.index[f])
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Values non-decreasing, faces before cofaces, vertices at zero.
    pub fn is_valid(&self) -> bool {
        let ordered = self.simplices.windows(2).all(|w| w[0].1 <= w[1].1);
        let faces_first = (0..self.len()).all(|i| {
            self.simplices[i]
                .0
                .faces()
                .iter()
                .all(|f| self.index.get(f).is_some_and(|&j| j < i))
        });
        let vertices_zero = self
            .simplices
            .iter()
            .filter(|(s, _)| s.dim() == 0)
            .all(|(_, v)| v.is_zero());
        ordered && faces_first && vertices_zero
    }

    /// Distinct filtration values in increasing order.
    pub fn distinct_values(&self) -> Vec<T> {
        let mut out: Vec<T> = Vec::new();
        for (_, v) in &self.simplices {
            if out.last() != Some(v) {
                out.push(v.clone());
            }
        }
        out
    }

    /// One simplex per line: `value<TAB>v0[,v1[,v2]]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (s, v) in &self.simplices {
            let verts: Vec<String> = s.vertices().iter().map(usize::to_string).collect();
            out.push_str(&v.render());
            out.push('\t');
            out.push_str(&verts.join(","));
            out.push('\n');
        }
        out
    }
}
