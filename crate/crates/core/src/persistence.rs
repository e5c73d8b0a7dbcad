//! Persistent homology over Z/2 by the standard left-to-right column
//! reduction, with persistence pairs, cycle representatives and the
//! barcode/diagram outputs.
//!
//! Columns are sorted vectors of filtration positions. After reduction,
//! `R = ∂ · V` with `V` upper triangular and unit diagonal. A non-zero
//! column `j` of `R` with lowest entry `i` pairs simplex `i` (creator) with
//! simplex `j` (destroyer). For a dimension-one pair the column of `V` at
//! the creating edge is a cycle (its `R` column is zero) and is reported as
//! the representative.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};
use crate::filtration::{Filtration, Simplex};
use crate::scalar::Scalar;

/// Symmetric difference of two sorted index sets (Z/2 column addition).
fn add_column(target: &mut Vec<usize>, source: &[usize]) {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&source[j..]);
    *target = out;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    reduced: bool,
}

impl BoundaryMatrix {
    pub fn from_filtration<T: Scalar>(f: &Filtration<T>) -> Self {
        Self {
            columns: (0..f.len()).map(|i| f.boundary(i)).collect(),
            reduced: false,
        }
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Lowest non-zero row of column `j`.
    pub fn low(&self, j: usize) -> Option<usize> {
        self.columns[j].last().copied()
    }

    /// True when all non-zero columns have distinct lows.
    pub fn pivots_distinct(&self) -> bool {
        let mut seen = BTreeSet::new();
        (0..self.columns.len()).all(|j| self.low(j).is_none_or(|l| seen.insert(l)))
    }
}

/// Result of reducing a filtered boundary matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub r: BoundaryMatrix,
    /// Column `j` lists the original columns summed into `R_j`.
    pub v: Vec<Vec<usize>>,
}

impl Reduction {
    /// Recompute `∂ · V` from the filtration and compare with `R`.
    pub fn check_decomposition<T: Scalar>(&self, f: &Filtration<T>) -> bool {
        let upper_unit = self
            .v
            .iter()
            .enumerate()
            .all(|(j, col)| col.last() == Some(&j));
        upper_unit
            && self.v.iter().enumerate().all(|(j, col)| {
                let mut acc = Vec::new();
                for &k in col {
                    add_column(&mut acc, &f.boundary(k));
                }
                acc == self.r.columns[j]
            })
    }
}

/// Standard algorithm: for each column left to right, add the earlier
/// column owning the same low until the low is new or the column vanishes.
pub fn reduce<T: Scalar>(f: &Filtration<T>) -> Reduction {
    let mut r = BoundaryMatrix::from_filtration(f);
    let m = r.columns.len();
    let mut v: Vec<Vec<usize>> = (0..m).map(|j| vec![j]).collect();
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(low) = r.low(j) {
            match owner[low] {
                Some(k) => {
                    let (left, right) = r.columns.split_at_mut(j);
                    add_column(&mut right[0], &left[k]);
                    let (vl, vr) = v.split_at_mut(j);
                    add_column(&mut vr[0], &vl[k]);
                }
                None => {
                    owner[low] = Some(j);
                    break;
                }
            }
        }
    }
    r.reduced = true;
    Reduction { r, v }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth_simplex: Simplex,
    /// `None` for an essential class.
    pub death_simplex: Option<Simplex>,
    pub birth: T,
    /// `None` means `+∞`.
    pub death: Option<T>,
    /// Sorted vertex support of the representative cycle (dimension 1).
    pub cycle: Vec<usize>,
    /// Edges of the representative cycle (dimension 1).
    pub cycle_edges: Vec<Simplex>,
}

impl<T: Scalar> PersistencePair<T> {
    pub fn is_essential(&self) -> bool {
        self.death.is_none()
    }

    /// Born and killed at the same value.
    pub fn is_zero_length(&self) -> bool {
        self.death.as_ref() == Some(&self.birth)
    }

    /// `death - birth`, `None` when essential.
    pub fn persistence(&self) -> Option<T> {
        self.death.clone().map(|d| d - self.birth.clone())
    }

    /// `birth <= eps < death`.
    pub fn contains(&self, eps: &T) -> bool {
        self.birth <= *eps && self.death.as_ref().is_none_or(|d| eps < d)
    }

    pub fn birth_edge(&self) -> Option<(usize, usize)> {
        self.birth_simplex.as_edge()
    }

    /// Every vertex of the representative touches an even number of its edges.
    pub fn cycle_is_closed(&self) -> bool {
        let mut degree = std::collections::BTreeMap::<usize, usize>::new();
        for e in &self.cycle_edges {
            for &v in e.vertices() {
                *degree.entry(v).or_default() += 1;
            }
        }
        !self.cycle_edges.is_empty() && degree.values().all(|d| d % 2 == 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarcodeSet<T> {
    pub kind: Option<DistanceKind>,
    pub vertex_count: usize,
    pub labels: Vec<Option<String>>,
    /// Dimension 0 and 1 pairs, ordered by dimension then creator position.
    pub pairs: Vec<PersistencePair<T>>,
    /// Triangles that create (untracked) two-dimensional classes.
    pub unpaired_triangles: usize,
}

impl<T: Scalar> BarcodeSet<T> {
    pub fn dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Pairs with `birth < death` (essential ones included).
    pub fn proper(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> {
        self.dim(dim).filter(|p| !p.is_zero_length())
    }

    pub fn count_containing(&self, dim: usize, eps: &T) -> usize {
        self.dim(dim).filter(|p| p.contains(eps)).count()
    }

    /// Every simplex is a creator or a destroyer exactly once.
    pub fn accounts_for(&self, simplex_count: usize) -> bool {
        let finite = self.pairs.iter().filter(|p| !p.is_essential()).count();
        let essential = self.pairs.len() - finite;
        2 * finite + essential + self.unpaired_triangles == simplex_count
    }
}

/// Read off persistence pairs from a reduced matrix.
pub fn extract_pairs<T: Scalar>(f: &Filtration<T>, red: &Reduction) -> BarcodeSet<T> {
    let m = f.len();
    let mut killer: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        if let Some(i) = red.r.low(j) {
            killer[i] = Some(j);
        }
    }
    let mut pairs = Vec::new();
    let mut unpaired_triangles = 0;
    for (i, &killed_by) in killer.iter().enumerate() {
        if !red.r.columns[i].is_empty() {
            continue; // destroyer
        }
        let s = f.simplex(i);
        if s.dim() == 2 {
            unpaired_triangles += usize::from(killed_by.is_none());
            continue;
        }
        let (cycle, cycle_edges) = if s.dim() == 1 {
            let edges: Vec<Simplex> = red.v[i].iter().map(|&k| f.simplex(k)).collect();
            let verts: BTreeSet<usize> = edges.iter().flat_map(|e| e.vertices().to_vec()).collect();
            (verts.into_iter().collect(), edges)
        } else {
            (Vec::new(), Vec::new())
        };
        pairs.push(PersistencePair {
            dim: s.dim(),
            birth_simplex: s,
            death_simplex: killed_by.map(|j| f.simplex(j)),
            birth: f.value(i).clone(),
            death: killed_by.map(|j| f.value(j).clone()),
            cycle,
            cycle_edges,
        });
    }
    pairs.sort_by_key(|p| p.dim);
    BarcodeSet {
        kind: f.kind(),
        vertex_count: f.vertex_count(),
        labels: f.labels().to_vec(),
        pairs,
        unpaired_triangles,
    }
}

/// Filtration, reduction and pairing for one distance matrix.
pub fn barcode<T: Scalar>(d: &DistanceMatrix<T>) -> BarcodeSet<T> {
    let f = Filtration::build(d);
    let red = reduce(&f);
    extract_pairs(&f, &red)
}

/// Rank of a Z/2 matrix given as bit-packed rows.
fn rank_z2(mut rows: Vec<Vec<u64>>) -> usize {
    let width = rows.first().map_or(0, Vec::len) * 64;
    let mut rank = 0;
    for col in 0..width {
        let (word, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][word] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[word] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the boundary map from `dim`-simplices to `(dim-1)`-simplices,
/// both restricted to the given lists.
fn boundary_rank(lower: &[Simplex], upper: &[Simplex]) -> usize {
    if lower.is_empty() || upper.is_empty() {
        return 0;
    }
    let index: std::collections::HashMap<Simplex, usize> =
        lower.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let words = lower.len().div_ceil(64);
    let rows = upper
        .iter()
        .map(|s| {
            let mut row = vec![0u64; words];
            for face in s.faces() {
                let k = index[&face];
                row[k / 64] |= 1 << (k % 64);
            }
            row
        })
        .collect();
    rank_z2(rows)
}

/// Betti number of the complex `{σ : value(σ) <= eps}`, computed from
/// scratch by Gaussian elimination (independent of [`reduce`]).
pub fn betti_at<T: Scalar>(f: &Filtration<T>, dim: usize, eps: &T) -> usize {
    let by_dim = |k: usize| -> Vec<Simplex> {
        f.iter()
            .filter(|(s, v)| s.dim() == k && v <= eps)
            .map(|(s, _)| *s)
            .collect()
    };
    let here = by_dim(dim);
    let rank_out = if dim == 0 {
        0
    } else {
        boundary_rank(&by_dim(dim - 1), &here)
    };
    let rank_in = boundary_rank(&here, &by_dim(dim + 1));
    here.len() - rank_out - rank_in
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairJson {
    pub dim: usize,
    pub birth: String,
    /// `"inf"` for essential classes.
    pub death: String,
    pub birth_simplex: Vec<usize>,
    pub death_simplex: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cycle: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cycle_edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub zero_length: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarcodeJson {
    pub kind: Option<DistanceKind>,
    pub vertex_count: usize,
    #[serde(default)]
    pub labels: Vec<Option<String>>,
    #[serde(default)]
    pub unpaired_triangles: usize,
    pub pairs: Vec<PairJson>,
}

pub const INFINITY_TOKEN: &str = "inf";

impl<T: Scalar> BarcodeSet<T> {
    pub fn to_json_value(&self) -> BarcodeJson {
        BarcodeJson {
            kind: self.kind,
            vertex_count: self.vertex_count,
            labels: self.labels.clone(),
            unpaired_triangles: self.unpaired_triangles,
            pairs: self
                .pairs
                .iter()
                .map(|p| PairJson {
                    dim: p.dim,
                    birth: p.birth.render(),
                    death: p
                        .death
                        .as_ref()
                        .map_or_else(|| INFINITY_TOKEN.to_owned(), Scalar::render),
                    birth_simplex: p.birth_simplex.vertices().to_vec(),
                    death_simplex: p.death_simplex.map(|s| s.vertices().to_vec()),
                    cycle: p.cycle.clone(),
                    cycle_edges: p
                        .cycle_edges
                        .iter()
                        .filter_map(Simplex::as_edge)
                        .map(|(u, v)| [u, v])
                        .collect(),
                    zero_length: p.is_zero_length(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("barcode serializes")
    }

    /// `dim,birth,death` rows with float values, `inf` for essential classes.
    pub fn to_diagram_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            let death = p
                .death
                .as_ref()
                .map_or_else(|| INFINITY_TOKEN.to_owned(), |d| format!("{}", d.to_f64()));
            out.push_str(&format!("{},{},{}\n", p.dim, p.birth.to_f64(), death));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub dim: usize,
    pub birth: f64,
    pub death: Option<f64>,
}

/// Read back the output of [`BarcodeSet::to_diagram_csv`].
pub fn parse_diagram_csv(text: &str) -> Result<Vec<DiagramPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize, name: &str| {
            rec.get(k)
                .ok_or_else(|| Error::parse(line, Some(name.into()), "missing field"))
        };
        let num = |k: usize, name: &str| {
            field(k, name)?
                .parse::<f64>()
                .map_err(|_| Error::parse(line, Some(name.into()), "not a number"))
        };
        let dim = field(0, "dim")?
            .parse()
            .map_err(|_| Error::parse(line, Some("dim".into()), "not an integer"))?;
        let death = if field(2, "death")? == INFINITY_TOKEN {
            None
        } else {
            Some(num(2, "death")?)
        };
        out.push(DiagramPoint {
            dim,
            birth: num(1, "birth")?,
            death,
        });
    }
    Ok(out)
}

impl BarcodeJson {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BarcodeJson = serde_json::from_str(text)?;
        doc.to_barcode::<crate::Rational>()?;
        Ok(doc)
    }

    /// Rebuild the barcode, validating simplices and values.
    pub fn to_barcode<T: Scalar>(&self) -> Result<BarcodeSet<T>> {
        let n = self.vertex_count;
        if !self.labels.is_empty() && self.labels.len() != n {
            return Err(Error::parse(
                0,
                Some("labels".into()),
                "label count differs from vertex_count",
            ));
        }
        let simplex = |i: usize, field: &str, vs: &[usize]| {
            Simplex::from_slice(vs)
                .filter(|s| s.vertices().iter().all(|&v| v < n))
                .ok_or_else(|| Error::parse(i + 1, Some(field.into()), "malformed simplex"))
        };
        let value = |i: usize, field: &str, text: &str| {
            T::parse_scalar(text)
                .map_err(|e| Error::parse(i + 1, Some(field.into()), e.to_string()))
        };
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for (i, p) in self.pairs.iter().enumerate() {
            let birth_simplex = simplex(i, "birth_simplex", &p.birth_simplex)?;
            let death_simplex = p
                .death_simplex
                .as_deref()
                .map(|d| simplex(i, "death_simplex", d))
                .transpose()?;
            if p.dim > 1
                || birth_simplex.dim() != p.dim
                || death_simplex.is_some_and(|d| d.dim() != p.dim + 1)
            {
                return Err(Error::parse(
                    i + 1,
                    Some("dim".into()),
                    "simplex dimensions do not match",
                ));
            }
            let death = if p.death == INFINITY_TOKEN {
                None
            } else {
                Some(value(i, "death", &p.death)?)
            };
            if death.is_some() != death_simplex.is_some() {
                return Err(Error::parse(
                    i + 1,
                    Some("death".into()),
                    "death value and simplex disagree",
                ));
            }
            let cycle_edges = p
                .cycle_edges
                .iter()
                .map(|e| simplex(i, "cycle_edges", e))
                .collect::<Result<Vec<_>>>()?;
            pairs.push(PersistencePair {
                dim: p.dim,
                birth_simplex,
                death_simplex,
                birth: value(i, "birth", &p.birth)?,
                death,
                cycle: p.cycle.clone(),
                cycle_edges,
            });
        }
        Ok(BarcodeSet {
            kind: self.kind,
            vertex_count: n,
            labels: if self.labels.is_empty() {
                vec![None; n]
            } else {
                self.labels.clone()
            },
            pairs,
            unpaired_triangles: self.unpaired_triangles,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceMatrix;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_ratio(n, 1)
    }

    fn matrix(rows: &[&[i64]]) -> DistanceMatrix<Rational> {
        DistanceMatrix::from_entries(
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x)).collect())
                .collect(),
            None,
        )
        .unwrap()
    }

    fn square() -> DistanceMatrix<Rational> {
        matrix(&[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]])
    }

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut a = vec![1, 3, 5];
        add_column(&mut a, &[3, 4]);
        assert_eq!(a, vec![1, 4, 5]);
        add_column(&mut a, &[1, 4, 5]);
        assert!(a.is_empty());
    }

    #[test]
    fn single_edge_pairs_with_later_vertex() {
        let f = Filtration::build(&matrix(&[&[0, 3], &[3, 0]]));
        let red = reduce(&f);
        assert!(red.check_decomposition(&f));
        let b = extract_pairs(&f, &red);
        let h0: Vec<_> = b.dim(0).collect();
        assert_eq!(h0.len(), 2);
        let finite = h0.iter().find(|p| !p.is_essential()).unwrap();
        assert_eq!(finite.birth_simplex, Simplex::vertex(1));
        assert_eq!(finite.death, Some(q(3)));
        assert!(h0
            .iter()
            .any(|p| p.is_essential() && p.birth_simplex == Simplex::vertex(0)));
        assert_eq!(b.dim(1).count(), 0);
        assert!(b.accounts_for(f.len()));
    }

    #[test]
    fn square_barcode() {
        let f = Filtration::build(&square());
        let red = reduce(&f);
        assert!(red.r.pivots_distinct());
        assert!(red.check_decomposition(&f));
        let b = extract_pairs(&f, &red);
        let h0: Vec<_> = b.dim(0).collect();
        assert_eq!(h0.iter().filter(|p| p.death == Some(q(1))).count(), 3);
        assert_eq!(h0.iter().filter(|p| p.is_essential()).count(), 1);
        let h1: Vec<_> = b.proper(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!(h1[0].birth, q(1));
        assert_eq!(h1[0].death, Some(q(2)));
        assert_eq!(h1[0].birth_simplex, Simplex::edge(2, 3));
        assert_eq!(h1[0].cycle, vec![0, 1, 2, 3]);
        assert!(h1[0].cycle_is_closed());
        // The two diagonals open and close classes at value 2.
        assert_eq!(b.dim(1).filter(|p| p.is_zero_length()).count(), 2);
        assert!(b.accounts_for(f.len()));
    }

    #[test]
    fn square_betti_numbers() {
        let f = Filtration::build(&square());
        assert_eq!((betti_at(&f, 0, &q(0)), betti_at(&f, 1, &q(0))), (4, 0));
        assert_eq!((betti_at(&f, 0, &q(1)), betti_at(&f, 1, &q(1))), (1, 1));
        assert_eq!((betti_at(&f, 0, &q(2)), betti_at(&f, 1, &q(2))), (1, 0));
        let b = extract_pairs(&f, &reduce(&f));
        for eps in f.distinct_values() {
            for dim in 0..2 {
                assert_eq!(b.count_containing(dim, &eps), betti_at(&f, dim, &eps));
            }
        }
    }

    #[test]
    fn json_and_diagram() {
        let b = barcode(&square());
        let text = b.to_json();
        let doc = BarcodeJson::from_json(&text).unwrap();
        assert_eq!(doc, b.to_json_value());
        assert_eq!(doc.to_barcode::<Rational>().unwrap(), b);
        assert!(doc.pairs.iter().any(|p| p.death == "inf"));
        let mut broken = doc.clone();
        broken.pairs[0].birth_simplex = vec![0, 9];
        assert!(broken.to_barcode::<Rational>().is_err());
        let csv = b.to_diagram_csv();
        assert!(csv.starts_with("dim,birth,death\n"));
        assert!(csv.contains("1,1,2\n"));
        assert!(csv.contains("0,0,inf\n"));
        let rows = parse_diagram_csv(&csv).unwrap();
        assert_eq!(rows.len(), b.pairs.len());
        assert!(rows.contains(&DiagramPoint {
            dim: 1,
            birth: 1.0,
            death: Some(2.0)
        }));
    }
}
