//! Comparison of the one-dimensional barcodes produced by `d2`, `d3` and
//! `d1` on the same graph.
//!
//! Bars are identified by their birth edge. Every birth edge is an edge of
//! the graph, `B2 ⊆ B3 ⊆ B1` as edge sets, and matching bars by birth edge
//! gives injections `d2 -> d3 -> d1` that keep the birth value and never
//! shorten the bar. Only bars with `birth < death` take part; zero-length
//! pairs produced by simultaneous insertions carry no homology.
//!
//! Matches are classified as Type1 (present under all three distances),
//! Type2 (`d3` and `d1` only) or Type3 (`d1` only).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::filtration::Simplex;
use crate::graph::{GraphJson, WeightedGraph};
use crate::persistence::{BarcodeJson, BarcodeSet, PersistencePair};
use crate::scalar::Scalar;

pub type Edge = (usize, usize);

/// Birth edges of the proper one-dimensional bars.
pub fn birth_edge_set<T: Scalar>(b: &BarcodeSet<T>) -> BTreeSet<Edge> {
    b.proper(1)
        .filter_map(PersistencePair::birth_edge)
        .collect()
}

fn check_compatible<T: Scalar>(
    b2: &BarcodeSet<T>,
    b3: &BarcodeSet<T>,
    b1: &BarcodeSet<T>,
) -> Result<()> {
    if b2.vertex_count != b1.vertex_count || b3.vertex_count != b1.vertex_count {
        return Err(Error::MismatchedInputs(format!(
            "vertex counts {} / {} / {}",
            b2.vertex_count, b3.vertex_count, b1.vertex_count
        )));
    }
    if b2.labels != b1.labels || b3.labels != b1.labels {
        return Err(Error::MismatchedInputs("vertex orderings differ".into()));
    }
    for (b, want) in [
        (b2, DistanceKind::D2),
        (b3, DistanceKind::D3),
        (b1, DistanceKind::D1),
    ] {
        if b.kind.is_some_and(|k| k != want) {
            return Err(Error::MismatchedInputs(format!(
                "expected a {want} barcode, got {}",
                b.kind.map_or("?", DistanceKind::as_str)
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InclusionReport {
    /// Birth edges of `d2` bars missing from `d3`.
    pub b2_not_in_b3: Vec<Edge>,
    /// Birth edges of `d3` bars missing from `d1`.
    pub b3_not_in_b1: Vec<Edge>,
    /// Proper bar counts `[d2, d3, d1]`.
    pub cardinalities: [usize; 3],
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        let [c2, c3, c1] = self.cardinalities;
        self.b2_not_in_b3.is_empty() && self.b3_not_in_b1.is_empty() && c2 <= c3 && c3 <= c1
    }
}

/// Check `B2 ⊆ B3 ⊆ B1` and `|H1(d2)| <= |H1(d3)| <= |H1(d1)|`.
pub fn verify_inclusion<T: Scalar>(
    b2: &BarcodeSet<T>,
    b3: &BarcodeSet<T>,
    b1: &BarcodeSet<T>,
) -> Result<InclusionReport> {
    check_compatible(b2, b3, b1)?;
    let (s2, s3, s1) = (birth_edge_set(b2), birth_edge_set(b3), birth_edge_set(b1));
    Ok(InclusionReport {
        b2_not_in_b3: s2.difference(&s3).copied().collect(),
        b3_not_in_b1: s3.difference(&s1).copied().collect(),
        cardinalities: [
            b2.proper(1).count(),
            b3.proper(1).count(),
            b1.proper(1).count(),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MatchType {
    Type1,
    Type2,
    Type3,
}

impl fmt::Display for MatchType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchType::Type1 => "Type1",
            MatchType::Type2 => "Type2",
            MatchType::Type3 => "Type3",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    pub birth: T,
    pub death: Option<T>,
    pub death_simplex: Option<Simplex>,
    pub cycle: Vec<usize>,
}

impl<T: Scalar> From<&PersistencePair<T>> for Interval<T> {
    fn from(p: &PersistencePair<T>) -> Self {
        Self {
            birth: p.birth.clone(),
            death: p.death.clone(),
            death_simplex: p.death_simplex,
            cycle: p.cycle.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match<T> {
    pub kind: MatchType,
    pub birth_edge: Edge,
    pub d2: Option<Interval<T>>,
    pub d3: Option<Interval<T>>,
    pub d1: Interval<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub birth_edge: Edge,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionReport<T> {
    pub matches: Vec<Match<T>>,
    pub violations: Vec<Violation>,
    /// Birth edges carried by more than one bar in some barcode.
    pub duplicate_birth_edges: Vec<Edge>,
}

impl<T: Scalar> InjectionReport<T> {
    pub fn count(&self, kind: MatchType) -> usize {
        self.matches.iter().filter(|m| m.kind == kind).count()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `None` (infinite) sorts last.
fn death_le<T: Scalar>(a: &Option<T>, b: &Option<T>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}

/// Proper bars grouped by birth edge, each group in ascending death order.
fn group_by_birth_edge<T: Scalar>(b: &BarcodeSet<T>) -> BTreeMap<Edge, Vec<&PersistencePair<T>>> {
    let mut groups: BTreeMap<Edge, Vec<&PersistencePair<T>>> = BTreeMap::new();
    for p in b.proper(1) {
        if let Some(e) = p.birth_edge() {
            groups.entry(e).or_default().push(p);
        }
    }
    for g in groups.values_mut() {
        g.sort_by(|a, b| {
            if death_le(&a.death, &b.death) && death_le(&b.death, &a.death) {
                std::cmp::Ordering::Equal
            } else if death_le(&a.death, &b.death) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
    }
    groups
}

/// Match bars across the three barcodes by birth edge and classify them.
///
/// Fails with [`Error::UnmatchedPair`] when a `d2` or `d3` bar has no
/// counterpart with the same birth edge one step upstream. Shared birth
/// values and `death_d2 <= death_d3 <= death_d1` are checked per match and
/// reported as violations.
pub fn build_injection<T: Scalar>(
    b2: &BarcodeSet<T>,
    b3: &BarcodeSet<T>,
    b1: &BarcodeSet<T>,
) -> Result<InjectionReport<T>> {
    check_compatible(b2, b3, b1)?;
    let (g2, g3, g1) = (
        group_by_birth_edge(b2),
        group_by_birth_edge(b3),
        group_by_birth_edge(b1),
    );

    for (lower, upper) in [(&g2, &g3), (&g3, &g1)] {
        for (edge, bars) in lower {
            if upper.get(edge).map_or(0, Vec::len) < bars.len() {
                return Err(Error::UnmatchedPair(edge.0, edge.1));
            }
        }
    }

    let mut duplicate_birth_edges: BTreeSet<Edge> = BTreeSet::new();
    for g in [&g2, &g3, &g1] {
        for (edge, bars) in g {
            if bars.len() > 1 {
                duplicate_birth_edges.insert(*edge);
            }
        }
    }
    for edge in &duplicate_birth_edges {
        log::warn!(
            "birth edge ({}, {}) carries several bars; matching by ascending death",
            edge.0,
            edge.1
        );
    }

    let mut matches = Vec::new();
    let mut violations = Vec::new();
    for (edge, bars1) in &g1 {
        for (k, p1) in bars1.iter().enumerate() {
            let p3 = g3.get(edge).and_then(|g| g.get(k));
            let p2 = g2.get(edge).and_then(|g| g.get(k));
            let kind = match (p2, p3) {
                (Some(_), _) => MatchType::Type1,
                (None, Some(_)) => MatchType::Type2,
                (None, None) => MatchType::Type3,
            };
            for (name, p) in [("d2", p2), ("d3", p3)] {
                if let Some(p) = p {
                    if p.birth != p1.birth {
                        violations.push(Violation {
                            birth_edge: *edge,
                            message: format!(
                                "{name} birth {} differs from d1 birth {}",
                                p.birth.render(),
                                p1.birth.render()
                            ),
                        });
                    }
                }
            }
            let deaths = [p2.map(|p| &p.death), p3.map(|p| &p.death), Some(&p1.death)];
            let present: Vec<_> = deaths.iter().flatten().collect();
            if present.windows(2).any(|w| !death_le(w[0], w[1])) {
                violations.push(Violation {
                    birth_edge: *edge,
                    message: "deaths not ordered d2 <= d3 <= d1".into(),
                });
            }
            matches.push(Match {
                kind,
                birth_edge: *edge,
                d2: p2.map(|p| Interval::from(*p)),
                d3: p3.map(|p| Interval::from(*p)),
                d1: Interval::from(*p1),
            });
        }
    }
    // Matches listed by birth value, then type, then edge.
    matches.sort_by(|a, b| {
        a.d1.birth
            .partial_cmp(&b.d1.birth)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.kind.cmp(&b.kind))
            .then(a.birth_edge.cmp(&b.birth_edge))
    });
    Ok(InjectionReport {
        matches,
        violations,
        duplicate_birth_edges: duplicate_birth_edges.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalJson {
    pub birth: String,
    pub death: String,
    pub death_simplex: Option<Vec<usize>>,
    pub cycle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchJson {
    #[serde(rename = "type")]
    pub kind: MatchType,
    pub birth_edge: Edge,
    pub birth: String,
    pub d2: Option<IntervalJson>,
    pub d3: Option<IntervalJson>,
    pub d1: IntervalJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionReportJson {
    pub types: BTreeMap<MatchType, usize>,
    pub matches: Vec<MatchJson>,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub duplicate_birth_edges: Vec<Edge>,
}

fn render_death<T: Scalar>(d: &Option<T>) -> String {
    d.as_ref().map_or_else(
        || crate::persistence::INFINITY_TOKEN.to_owned(),
        Scalar::render,
    )
}

impl<T: Scalar> Interval<T> {
    fn to_json(&self) -> IntervalJson {
        IntervalJson {
            birth: self.birth.render(),
            death: render_death(&self.death),
            death_simplex: self.death_simplex.map(|s| s.vertices().to_vec()),
            cycle: self.cycle.clone(),
        }
    }
}

impl<T: Scalar> InjectionReport<T> {
    pub fn to_json_value(&self) -> InjectionReportJson {
        let types = [MatchType::Type1, MatchType::Type2, MatchType::Type3]
            .into_iter()
            .map(|t| (t, self.count(t)))
            .collect();
        InjectionReportJson {
            types,
            matches: self
                .matches
                .iter()
                .map(|m| MatchJson {
                    kind: m.kind,
                    birth_edge: m.birth_edge,
                    birth: m.d1.birth.render(),
                    d2: m.d2.as_ref().map(Interval::to_json),
                    d3: m.d3.as_ref().map(Interval::to_json),
                    d1: m.d1.to_json(),
                })
                .collect(),
            violations: self.violations.clone(),
            duplicate_birth_edges: self.duplicate_birth_edges.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes")
    }

    /// Overlay diagram rows `type,kind,birth,death` (float values).
    pub fn to_combined_csv(&self) -> String {
        let mut out = String::from("type,kind,birth,death\n");
        for m in &self.matches {
            let rows = [
                (DistanceKind::D2, m.d2.as_ref()),
                (DistanceKind::D3, m.d3.as_ref()),
                (DistanceKind::D1, Some(&m.d1)),
            ];
            for (kind, iv) in rows {
                if let Some(iv) = iv {
                    let death = iv
                        .death
                        .as_ref()
                        .map_or_else(|| "inf".to_owned(), |d| format!("{}", d.to_f64()));
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        m.kind,
                        kind,
                        iv.birth.to_f64(),
                        death
                    ));
                }
            }
        }
        out
    }
}

impl InjectionReportJson {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Everything needed to replay a failed check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleBundle {
    pub graph: GraphJson,
    pub barcodes: BTreeMap<DistanceKind, BarcodeJson>,
    pub failures: Vec<String>,
}

impl CounterexampleBundle {
    pub fn new<T: Scalar>(
        g: &WeightedGraph<T>,
        barcodes: &[(DistanceKind, &BarcodeSet<T>)],
        failures: Vec<String>,
    ) -> Self {
        Self {
            graph: g.to_json_value(),
            barcodes: barcodes
                .iter()
                .map(|(k, b)| (*k, b.to_json_value()))
                .collect(),
            failures,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn bar(
        edge: Edge,
        tri: [usize; 3],
        birth: Rational,
        death: Rational,
    ) -> PersistencePair<Rational> {
        PersistencePair {
            dim: 1,
            birth_simplex: Simplex::edge(edge.0, edge.1),
            death_simplex: Some(Simplex::triangle(tri[0], tri[1], tri[2])),
            birth,
            death: Some(death),
            cycle: Vec::new(),
            cycle_edges: Vec::new(),
        }
    }

    fn set(kind: DistanceKind, pairs: Vec<PersistencePair<Rational>>) -> BarcodeSet<Rational> {
        BarcodeSet {
            kind: Some(kind),
            vertex_count: 12,
            labels: vec![None; 12],
            pairs,
            unpaired_triangles: 0,
        }
    }

    /// Shape of a two-cycle row: C1 under all three distances, C2 under d1 only.
    fn two_cycle_row() -> [BarcodeSet<Rational>; 3] {
        let c1 = || bar((4, 8), [2, 7, 8], q(1, 11), q(1, 8));
        let c2 = bar((1, 11), [6, 8, 11], q(1, 5), q(1, 4));
        [
            set(DistanceKind::D2, vec![c1()]),
            set(DistanceKind::D3, vec![c1()]),
            set(DistanceKind::D1, vec![c1(), c2]),
        ]
    }

    #[test]
    fn two_cycle_row_classification() {
        let [b2, b3, b1] = two_cycle_row();
        assert_eq!(birth_edge_set(&b1).len(), 2);
        assert!(verify_inclusion(&b2, &b3, &b1).unwrap().holds());
        let r = build_injection(&b2, &b3, &b1).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.matches.len(), 2);
        assert_eq!(
            (r.matches[0].kind, r.matches[0].birth_edge),
            (MatchType::Type1, (4, 8))
        );
        assert_eq!(
            (r.matches[1].kind, r.matches[1].birth_edge),
            (MatchType::Type3, (1, 11))
        );
        let json = r.to_json_value();
        assert_eq!(json.types[&MatchType::Type1], 1);
        assert_eq!(json.types[&MatchType::Type2], 0);
        assert_eq!(json.types[&MatchType::Type3], 1);
        assert_eq!(InjectionReportJson::from_json(&r.to_json()).unwrap(), json);
        let csv = r.to_combined_csv();
        assert_eq!(csv.lines().count(), 1 + 3 + 1);
        assert!(csv.contains("Type3,d1,0.2,0.25"));
    }

    #[test]
    fn seven_bar_fixture_cardinality() {
        let pairs = (0..7)
            .map(|i| bar((i, i + 1), [i, i + 1, 11], q(1, 1), q(2, 1)))
            .collect();
        assert_eq!(birth_edge_set(&set(DistanceKind::D1, pairs)).len(), 7);
        assert!(birth_edge_set(&set(DistanceKind::D1, Vec::new())).is_empty());
    }

    #[test]
    fn empty_lower_barcodes_give_type3() {
        let [_, _, b1] = two_cycle_row();
        let r = build_injection(
            &set(DistanceKind::D2, vec![]),
            &set(DistanceKind::D3, vec![]),
            &b1,
        )
        .unwrap();
        assert!(r.matches.iter().all(|m| m.kind == MatchType::Type3));
    }

    #[test]
    fn missing_upstream_edge_is_an_error() {
        let [b2, _, b1] = two_cycle_row();
        let err = build_injection(&b2, &set(DistanceKind::D3, vec![]), &b1).unwrap_err();
        assert!(matches!(err, Error::UnmatchedPair(4, 8)));
        let r = verify_inclusion(&b2, &set(DistanceKind::D3, vec![]), &b1).unwrap();
        assert_eq!(r.b2_not_in_b3, vec![(4, 8)]);
        assert!(!r.holds());
    }

    #[test]
    fn death_order_and_birth_violations_reported() {
        let b2 = set(
            DistanceKind::D2,
            vec![bar((0, 1), [0, 1, 2], q(1, 1), q(3, 1))],
        );
        let b3 = set(
            DistanceKind::D3,
            vec![bar((0, 1), [0, 1, 2], q(1, 2), q(2, 1))],
        );
        let b1 = set(
            DistanceKind::D1,
            vec![bar((0, 1), [0, 1, 2], q(1, 1), q(2, 1))],
        );
        let r = build_injection(&b2, &b3, &b1).unwrap();
        assert_eq!(r.violations.len(), 2);
    }

    #[test]
    fn zero_length_bars_ignored() {
        let zero = bar((0, 2), [0, 1, 2], q(2, 1), q(2, 1));
        let b2 = set(DistanceKind::D2, vec![zero]);
        let b3 = set(DistanceKind::D3, vec![]);
        let b1 = set(DistanceKind::D1, vec![]);
        assert!(verify_inclusion(&b2, &b3, &b1).unwrap().holds());
        assert!(build_injection(&b2, &b3, &b1).unwrap().matches.is_empty());
    }

    #[test]
    fn duplicate_birth_edges_matched_by_death() {
        let a = || bar((0, 1), [0, 1, 2], q(1, 1), q(2, 1));
        let b = || bar((0, 1), [0, 1, 3], q(1, 1), q(3, 1));
        let b3 = set(DistanceKind::D3, vec![b(), a()]);
        let b1 = set(DistanceKind::D1, vec![a(), b()]);
        let r = build_injection(&set(DistanceKind::D2, vec![]), &b3, &b1).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.duplicate_birth_edges, vec![(0, 1)]);
        assert_eq!(r.count(MatchType::Type2), 2);
    }

    #[test]
    fn mismatched_inputs() {
        let [b2, b3, mut b1] = two_cycle_row();
        b1.vertex_count = 5;
        assert!(matches!(
            verify_inclusion(&b2, &b3, &b1),
            Err(Error::MismatchedInputs(_))
        ));
        let [b2, b3, b1] = two_cycle_row();
        assert!(matches!(
            build_injection(&b1, &b3, &b2),
            Err(Error::MismatchedInputs(_))
        ));
    }
}
