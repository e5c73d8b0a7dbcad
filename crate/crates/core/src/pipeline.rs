//! End-to-end analysis of one graph: three distance matrices, their
//! barcodes and the cross-distance comparison, rendered as named text files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distance::{metric_check, DistanceKind, DistanceMatrix, MetricReport};
use crate::error::Result;
use crate::inclusion::{build_injection, verify_inclusion, CounterexampleBundle};
use crate::persistence::{barcode, BarcodeSet};
use crate::scalar::Scalar;
use crate::{Graph, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleViolationJson {
    pub v: usize,
    pub z: usize,
    pub w: usize,
    pub direct: String,
    pub via: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricReportJson {
    pub symmetric: bool,
    pub zero_diag: bool,
    pub is_metric: bool,
    pub triangle_violations: Vec<TriangleViolationJson>,
}

impl<T: Scalar> From<&MetricReport<T>> for MetricReportJson {
    fn from(r: &MetricReport<T>) -> Self {
        Self {
            symmetric: r.symmetric,
            zero_diag: r.zero_diag,
            is_metric: r.is_metric(),
            triangle_violations: r
                .triangle_violations
                .iter()
                .map(|t| TriangleViolationJson {
                    v: t.v,
                    z: t.z,
                    w: t.w,
                    direct: t.direct.render(),
                    via: t.via.render(),
                })
                .collect(),
        }
    }
}

pub struct Analysis {
    pub graph: Graph,
    pub matrices: BTreeMap<DistanceKind, DistanceMatrix<Rational>>,
    pub barcodes: BTreeMap<DistanceKind, BarcodeSet<Rational>>,
    pub metric: BTreeMap<DistanceKind, MetricReportJson>,
    /// Output files in write order: `(file name, contents)`.
    pub files: Vec<(String, String)>,
    /// Failed invariants. Non-empty means the run should exit with status 2.
    pub violations: Vec<String>,
}

/// Run every stage on `g` and collect the output files.
pub fn analyze(g: &Graph) -> Result<Analysis> {
    g.require_connected()?;
    let mut files = vec![("graph.json".to_owned(), g.to_json())];
    let mut matrices = BTreeMap::new();
    let mut barcodes = BTreeMap::new();
    let mut metric = BTreeMap::new();
    for kind in DistanceKind::ALL {
        let m = DistanceMatrix::compute(g, kind)?;
        let b = barcode(&m);
        files.push((format!("matrix_{kind}.csv"), m.to_csv()));
        files.push((format!("heatmap_{kind}.csv"), m.to_heatmap_csv()));
        files.push((format!("barcode_{kind}.json"), b.to_json()));
        files.push((format!("diagram_{kind}.csv"), b.to_diagram_csv()));
        metric.insert(kind, MetricReportJson::from(&metric_check(&m)));
        matrices.insert(kind, m);
        barcodes.insert(kind, b);
    }
    files.push((
        "metric_report.json".to_owned(),
        serde_json::to_string_pretty(&metric).expect("metric report serializes"),
    ));

    let mut violations = Vec::new();
    let (m1, m2, m3) = (
        &matrices[&DistanceKind::D1],
        &matrices[&DistanceKind::D2],
        &matrices[&DistanceKind::D3],
    );
    let n = g.vertex_count();
    for v in 0..n {
        for w in v + 1..n {
            if !(m2.get(v, w) <= m3.get(v, w) && m3.get(v, w) <= m1.get(v, w)) {
                violations.push(format!("d2 <= d3 <= d1 fails at ({v},{w})"));
            }
        }
    }
    if !metric[&DistanceKind::D2].is_metric {
        violations.push("d2 is not a metric".into());
    }
    for (kind, b) in &barcodes {
        for p in b.proper(1) {
            if let Some((u, v)) = p.birth_edge().filter(|&(u, v)| !g.has_edge(u, v)) {
                violations.push(format!("{kind}: birth edge ({u},{v}) is not a graph edge"));
            }
        }
    }

    let (b1, b2, b3) = (
        &barcodes[&DistanceKind::D1],
        &barcodes[&DistanceKind::D2],
        &barcodes[&DistanceKind::D3],
    );
    let inclusion = verify_inclusion(b2, b3, b1)?;
    if !inclusion.holds() {
        violations.push(format!(
            "birth-edge inclusion fails: B2\\B3={:?} B3\\B1={:?}",
            inclusion.b2_not_in_b3, inclusion.b3_not_in_b1
        ));
    }
    match build_injection(b2, b3, b1) {
        Ok(report) => {
            violations.extend(
                report
                    .violations
                    .iter()
                    .map(|v| format!("injection at {:?}: {}", v.birth_edge, v.message)),
            );
            files.push(("injection_report.json".to_owned(), report.to_json()));
            files.push(("combined_diagram.csv".to_owned(), report.to_combined_csv()));
        }
        Err(e) => violations.push(format!("injection: {e}")),
    }

    if !violations.is_empty() {
        let bars: Vec<_> = barcodes.iter().map(|(k, b)| (*k, b)).collect();
        let bundle = CounterexampleBundle::new(g, &bars, violations.clone());
        files.push(("counterexample.json".to_owned(), bundle.to_json()));
    }

    Ok(Analysis {
        graph: g.clone(),
        matrices,
        barcodes,
        metric,
        files,
        violations,
    })
}

impl Analysis {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    /// Write every file into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}
