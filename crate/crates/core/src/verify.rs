//! Randomized invariant checking over families of connected graphs.
//!
//! Each trial draws a graph from a family with its own RNG seeded by
//! `seed + trial`, runs [`check_graph`] and records every failed property.
//! Trials run in parallel; results are reported in trial order so a run is
//! fully determined by its configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{d1_path, metric_check, DistanceKind, DistanceMatrix};
use crate::filtration::Filtration;
use crate::graph::{VertexId, WeightTransform, WeightedGraph};
use crate::inclusion::{build_injection, verify_inclusion, CounterexampleBundle};
use crate::music::{IngestOptions, NoteEvent, NoteSequence, Pitch};
use crate::oracle;
use crate::persistence::{betti_at, extract_pairs, reduce, BarcodeSet};
use crate::scalar::Scalar;
use crate::{Graph, Rational};

/// Largest `k` in random weights `1/k`.
pub const MAX_WEIGHT_DENOMINATOR: i64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Random spanning tree plus random extra edges.
    Random,
    Tree,
    /// Cycle graph; half of the draws use one weight on every edge.
    Cycle,
    OddCycle,
    EvenCycle,
    Complete,
    /// Graph of a random walk over a pool of notes.
    MusicChain,
    /// Rotate through the concrete families by trial index.
    All,
}

impl Family {
    const ROTATION: [Family; 5] = [
        Family::Random,
        Family::Tree,
        Family::Cycle,
        Family::Complete,
        Family::MusicChain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Tree => "tree",
            Family::Cycle => "cycle",
            Family::OddCycle => "odd-cycle",
            Family::EvenCycle => "even-cycle",
            Family::Complete => "complete",
            Family::MusicChain => "music-chain",
            Family::All => "all",
        }
    }

    fn for_trial(self, trial: usize) -> Family {
        match self {
            Family::All => Self::ROTATION[trial % Self::ROTATION.len()],
            f => f,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let all = [
            Family::Random,
            Family::Tree,
            Family::Cycle,
            Family::OddCycle,
            Family::EvenCycle,
            Family::Complete,
            Family::MusicChain,
            Family::All,
        ];
        all.into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown graph family {s:?}"))
    }
}

fn random_weight(rng: &mut impl Rng) -> Rational {
    Rational::from_ratio(1, rng.random_range(1..=MAX_WEIGHT_DENOMINATOR))
}

/// Random relabeling so structure is not aligned with the vertex ordering.
fn shuffled_labels(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

fn from_edge_list(n: usize, edges: Vec<(usize, usize, Rational)>) -> Graph {
    WeightedGraph::from_edges(n, edges).expect("generated graph is well-formed")
}

/// Draw one graph. `family` must not be [`Family::All`].
pub fn generate(family: Family, n: usize, rng: &mut impl Rng) -> Graph {
    let n = n.max(2);
    match family {
        Family::Random | Family::Tree => {
            let p = shuffled_labels(n, rng);
            let mut edges = Vec::new();
            let mut present = std::collections::BTreeSet::new();
            for i in 1..n {
                let j = rng.random_range(0..i);
                edges.push((p[i], p[j], random_weight(rng)));
                present.insert((i.min(j), i.max(j)));
            }
            if family == Family::Random {
                let density = rng.random_range(0.1..0.45);
                for i in 0..n {
                    for j in i + 1..n {
                        if !present.contains(&(i, j)) && rng.random_bool(density) {
                            edges.push((p[i], p[j], random_weight(rng)));
                        }
                    }
                }
            }
            from_edge_list(n, edges)
        }
        Family::Cycle | Family::OddCycle | Family::EvenCycle => {
            let n = match family {
                Family::OddCycle if n.is_multiple_of(2) => n + 1,
                Family::EvenCycle if !n.is_multiple_of(2) => n + 1,
                _ => n,
            }
            .max(3);
            let p = shuffled_labels(n, rng);
            let uniform = rng.random_bool(0.5).then(|| random_weight(rng));
            let edges = (0..n)
                .map(|i| {
                    let w = uniform.clone().unwrap_or_else(|| random_weight(rng));
                    (p[i], p[(i + 1) % n], w)
                })
                .collect();
            from_edge_list(n, edges)
        }
        Family::Complete => {
            // Weights within a factor of two of each other satisfy the
            // triangle inequality, so every edge is a shortest path. Without
            // that the three distances do differ on complete graphs.
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let k = rng.random_range(MAX_WEIGHT_DENOMINATOR / 2..=MAX_WEIGHT_DENOMINATOR);
                    edges.push((i, j, Rational::from_ratio(1, k)));
                }
            }
            from_edge_list(n, edges)
        }
        Family::MusicChain => loop {
            let pool: Vec<i64> = (0..n as i64).map(|i| 60 + i).collect();
            let durations = [Rational::from_ratio(1, 4), Rational::from_ratio(1, 8)];
            let len = rng.random_range(n..=3 * n);
            let mut events = Vec::with_capacity(len);
            let mut cur = rng.random_range(0..pool.len());
            for _ in 0..len {
                // Mostly stepwise motion with occasional leaps.
                if rng.random_bool(0.3) {
                    cur = rng.random_range(0..pool.len());
                } else if cur + 1 < pool.len() && (cur == 0 || rng.random_bool(0.5)) {
                    cur += 1;
                } else {
                    cur = cur.saturating_sub(1);
                }
                let dur = durations[usize::from(pool[cur] % 3 == 0)].clone();
                events
                    .push(NoteEvent::new(Pitch::Midi(pool[cur]), dur).expect("positive duration"));
            }
            if let Ok(seq) = NoteSequence::new(events) {
                if let Ok(g) = seq.build_graph(IngestOptions::default()) {
                    if g.vertex_count() >= 3 {
                        break g;
                    }
                }
            }
        },
        Family::All => generate(Family::Random, n, rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Compare against the enumeration oracle when `n` is at most this.
    pub oracle_bound: usize,
    /// Also check bar counts against rank-based Betti numbers.
    pub betti: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            oracle_bound: 10,
            betti: true,
        }
    }
}

/// Per-graph results kept for bundling.
pub struct GraphAnalysis {
    pub matrices: BTreeMap<DistanceKind, DistanceMatrix<Rational>>,
    pub barcodes: BTreeMap<DistanceKind, BarcodeSet<Rational>>,
    pub failures: Vec<String>,
}

fn all_equal<T: PartialEq>(a: &[Vec<T>], b: &[Vec<T>]) -> bool {
    a == b
}

/// Run every invariant on one graph. `family` enables the special-case
/// identities (trees, complete graphs, cycles).
pub fn check_graph(g: &Graph, family: Option<Family>, opts: CheckOptions) -> GraphAnalysis {
    let mut failures = Vec::new();
    let n = g.vertex_count();
    let mut fail = |msg: String| failures.push(msg);

    let mut matrices = BTreeMap::new();
    for kind in DistanceKind::ALL {
        match DistanceMatrix::compute(g, kind) {
            Ok(m) => {
                matrices.insert(kind, m);
            }
            Err(e) => {
                fail(format!("{kind}: {e}"));
                return GraphAnalysis {
                    matrices,
                    barcodes: BTreeMap::new(),
                    failures,
                };
            }
        }
    }
    let (m1, m2, m3) = (
        &matrices[&DistanceKind::D1],
        &matrices[&DistanceKind::D2],
        &matrices[&DistanceKind::D3],
    );

    // d2 <= d3 <= d1 entrywise.
    for v in 0..n {
        for w in 0..n {
            if !(m2.get(v, w) <= m3.get(v, w) && m3.get(v, w) <= m1.get(v, w)) {
                fail(format!(
                    "inequality fails at ({v},{w}): d2={} d3={} d1={}",
                    m2.get(v, w).render(),
                    m3.get(v, w).render(),
                    m1.get(v, w).render()
                ));
            }
        }
    }

    if n <= opts.oracle_bound {
        match oracle::brute_force_all(g, opts.oracle_bound) {
            Ok(brute) => {
                for (slot, kind) in DistanceKind::ALL.into_iter().enumerate() {
                    if !all_equal(&brute[slot], matrices[&kind].rows()) {
                        fail(format!("{kind} disagrees with path enumeration"));
                    }
                }
            }
            Err(e) => fail(format!("oracle: {e}")),
        }
    }

    let r2 = metric_check(m2);
    if !r2.is_metric() {
        fail(format!(
            "d2 is not a metric ({} triangle violations)",
            r2.triangle_violations.len()
        ));
    }
    for m in [m1, m3] {
        let r = metric_check(m);
        if !(r.symmetric && r.zero_diag) {
            fail(format!("{:?} not symmetric with zero diagonal", m.kind()));
        }
    }

    check_transforms(g, m1, &mut fail);
    check_reordering(g, m1, m2, m3, &mut fail);

    match family {
        Some(Family::Tree) | Some(Family::Complete) => {
            if !(m1.rows() == m2.rows() && m2.rows() == m3.rows()) {
                fail(format!("{}: d1, d2, d3 differ", family.unwrap()));
            }
        }
        Some(Family::Cycle) | Some(Family::OddCycle) | Some(Family::EvenCycle) => {
            if n % 2 == 1 && m1.rows() != m3.rows() {
                fail("odd cycle: d1 != d3".into());
            }
            let mut ws = g.edges().map(|(_, _, w)| w);
            let first = ws.next();
            if ws.all(|w| Some(w) == first) && !(m1.rows() == m2.rows() && m2.rows() == m3.rows()) {
                fail("uniform cycle: d1, d2, d3 differ".into());
            }
        }
        _ => {}
    }

    let mut barcodes = BTreeMap::new();
    for kind in DistanceKind::ALL {
        let f = Filtration::build(&matrices[&kind]);
        if !f.is_valid() {
            fail(format!("{kind}: filtration not ordered faces-first"));
        }
        let red = reduce(&f);
        if !red.r.pivots_distinct() {
            fail(format!("{kind}: reduced pivots collide"));
        }
        if !red.check_decomposition(&f) {
            fail(format!("{kind}: R != boundary * V"));
        }
        let b = extract_pairs(&f, &red);
        if !b.accounts_for(f.len()) {
            fail(format!("{kind}: simplex creator/destroyer count mismatch"));
        }
        if b.dim(0).filter(|p| p.is_essential()).count() != 1 {
            fail(format!("{kind}: expected one essential H0 class"));
        }
        for p in b.proper(1) {
            let (u, v) = p.birth_edge().expect("dim-1 creator is an edge");
            if !g.has_edge(u, v) {
                fail(format!("{kind}: birth edge ({u},{v}) is not a graph edge"));
            }
            if !p.cycle_is_closed() {
                fail(format!(
                    "{kind}: representative of ({u},{v}) is not a cycle"
                ));
            }
        }
        if opts.betti {
            for eps in f.distinct_values() {
                for dim in 0..2 {
                    let bars = b.count_containing(dim, &eps);
                    let betti = betti_at(&f, dim, &eps);
                    if bars != betti {
                        fail(format!(
                            "{kind}: at {} dim {dim} has {bars} bars but betti {betti}",
                            eps.render()
                        ));
                    }
                }
            }
        }
        barcodes.insert(kind, b);
    }

    let (b1, b2, b3) = (
        &barcodes[&DistanceKind::D1],
        &barcodes[&DistanceKind::D2],
        &barcodes[&DistanceKind::D3],
    );
    if matches!(family, Some(Family::Tree) | Some(Family::Complete))
        && !(b1.to_json_value().pairs == b2.to_json_value().pairs
            && b2.to_json_value().pairs == b3.to_json_value().pairs)
    {
        fail(format!("{}: barcodes differ", family.unwrap()));
    }
    match verify_inclusion(b2, b3, b1) {
        Ok(r) if r.holds() => {}
        Ok(r) => fail(format!(
            "birth-edge inclusion fails: B2\\B3={:?} B3\\B1={:?} counts={:?}",
            r.b2_not_in_b3, r.b3_not_in_b1, r.cardinalities
        )),
        Err(e) => fail(format!("inclusion: {e}")),
    }
    match build_injection(b2, b3, b1) {
        Ok(r) => {
            for v in r.violations {
                fail(format!("injection at {:?}: {}", v.birth_edge, v.message));
            }
        }
        Err(e) => fail(format!("injection: {e}")),
    }

    GraphAnalysis {
        matrices,
        barcodes,
        failures,
    }
}

/// d1 commutes with edgewise weight maps; the reciprocal is an involution.
fn check_transforms(g: &Graph, m1: &DistanceMatrix<Rational>, fail: &mut impl FnMut(String)) {
    let recip = g
        .apply_transform(&WeightTransform::Reciprocal)
        .expect("positive weights");
    if recip
        .apply_transform(&WeightTransform::Reciprocal)
        .ok()
        .as_ref()
        != Some(g)
    {
        fail("reciprocal transform is not an involution".into());
    }
    let square_plus_one = WeightTransform::Table(
        g.edges()
            .map(|(u, v, w)| ((u, v), w.clone() * w.clone() + Rational::from_ratio(1, 1)))
            .collect(),
    );
    let n = g.vertex_count();
    for (name, t) in [
        ("reciprocal", WeightTransform::Reciprocal),
        ("w^2+1", square_plus_one),
    ] {
        let h = g.apply_transform(&t).expect("positive weights");
        let mh = match DistanceMatrix::compute(&h, DistanceKind::D1) {
            Ok(m) => m,
            Err(e) => return fail(format!("{name}: {e}")),
        };
        for v in 0..n {
            for w in v + 1..n {
                let p = d1_path(g, VertexId(v), VertexId(w)).expect("connected");
                if p.weight != *m1.get(v, w) {
                    fail(format!("d1 path weight differs from matrix at ({v},{w})"));
                }
                let mut total = Rational::from_ratio(0, 1);
                for e in p.vertices.windows(2) {
                    let wt = g.weight(e[0].0, e[1].0).expect("path edge");
                    total += t.apply_edge(e[0].0, e[1].0, wt).expect("positive");
                }
                if total != *mh.get(v, w) {
                    fail(format!(
                        "{name}: d1 does not commute with the weight map at ({v},{w})"
                    ));
                }
            }
        }
    }
}

/// d2 and d3 ignore the vertex ordering; d1 stays symmetric and dominated.
fn check_reordering(
    g: &Graph,
    m1: &DistanceMatrix<Rational>,
    m2: &DistanceMatrix<Rational>,
    m3: &DistanceMatrix<Rational>,
    fail: &mut impl FnMut(String),
) {
    let n = g.vertex_count();
    let reversed: Vec<VertexId> = (0..n).rev().map(VertexId).collect();
    let rotated: Vec<VertexId> = (0..n).map(|i| VertexId((i + 1) % n)).collect();
    for order in [reversed, rotated] {
        let h = g.reorder(&order).expect("valid permutation");
        let get = |k| {
            DistanceMatrix::compute(&h, k)
                .expect("connected")
                .unpermute(&order)
        };
        let (p1, p2, p3) = (
            get(DistanceKind::D1),
            get(DistanceKind::D2),
            get(DistanceKind::D3),
        );
        if p2.rows() != m2.rows() || p3.rows() != m3.rows() {
            fail("d2/d3 depend on the vertex ordering".into());
        }
        let r = metric_check(&p1);
        if !r.symmetric {
            fail("d1 not symmetric after reordering".into());
        }
        for v in 0..n {
            for w in 0..n {
                if !(p3.get(v, w) <= p1.get(v, w)) {
                    fail(format!("d3 > d1 at ({v},{w}) after reordering"));
                }
            }
        }
        let _ = m1;
    }
}

/// Greedily delete vertices and edges and flatten weights while the graph
/// keeps failing.
pub fn shrink(g: &Graph, family: Option<Family>, opts: CheckOptions) -> Graph {
    let fails = |h: &Graph| !check_graph(h, family, opts).failures.is_empty();
    let mut best = g.clone();
    loop {
        let mut improved = false;
        for cand in shrink_candidates(&best) {
            if cand.is_connected() && fails(&cand) {
                best = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            return best;
        }
    }
}

fn shrink_candidates(g: &Graph) -> Vec<Graph> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    if n > 2 {
        for drop in 0..n {
            let labels: Vec<_> = (0..n)
                .filter(|&v| v != drop)
                .map(|v| g.labels()[v].clone())
                .collect();
            let idx = |v: usize| if v > drop { v - 1 } else { v };
            let edges = g
                .edges()
                .filter(|&(u, v, _)| u != drop && v != drop)
                .map(|(u, v, w)| (idx(u), idx(v), w.clone()));
            if let Ok(h) = WeightedGraph::with_labels(labels, edges) {
                out.push(h);
            }
        }
    }
    for (a, b, _) in g.edges() {
        let edges = g
            .edges()
            .filter(|&(u, v, _)| (u, v) != (a, b))
            .map(|(u, v, w)| (u, v, w.clone()));
        if let Ok(h) = WeightedGraph::with_labels(g.labels().to_vec(), edges) {
            out.push(h);
        }
    }
    let one = Rational::from_ratio(1, 1);
    for (a, b, w) in g.edges() {
        if *w != one {
            let edges = g.edges().map(|(u, v, x)| {
                let x = if (u, v) == (a, b) {
                    one.clone()
                } else {
                    x.clone()
                };
                (u, v, x)
            });
            if let Ok(h) = WeightedGraph::with_labels(g.labels().to_vec(), edges) {
                out.push(h);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub trials: usize,
    pub family: Family,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(skip)]
    pub check: CheckOptions,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 1000,
            family: Family::All,
            n_min: 4,
            n_max: 10,
            check: CheckOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedTrial {
    pub trial: usize,
    pub family: Family,
    pub failures: Vec<String>,
    /// Shrunk graph and its barcodes.
    pub counterexample: CounterexampleBundle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub passed: usize,
    pub per_family: BTreeMap<Family, usize>,
    /// Totals over all trials: proper H1 bars `[d2, d3, d1]`.
    pub h1_bars: [usize; 3],
    pub failed: Vec<FailedTrial>,
}

impl FuzzReport {
    pub fn is_clean(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct TrialResult {
    family: Family,
    h1: [usize; 3],
    failed: Option<FailedTrial>,
}

/// Draw the graph for one trial.
pub fn trial_graph(cfg: &FuzzConfig, trial: usize) -> (Family, Graph) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(trial as u64));
    let family = cfg.family.for_trial(trial);
    let (lo, hi) = (cfg.n_min.max(2), cfg.n_max.max(cfg.n_min.max(2)));
    let n = rng.random_range(lo..=hi);
    (family, generate(family, n, &mut rng))
}

fn run_trial(cfg: &FuzzConfig, trial: usize) -> TrialResult {
    let (family, g) = trial_graph(cfg, trial);
    let analysis = check_graph(&g, Some(family), cfg.check);
    let h1 = [DistanceKind::D2, DistanceKind::D3, DistanceKind::D1]
        .map(|k| analysis.barcodes.get(&k).map_or(0, |b| b.proper(1).count()));
    let failed = (!analysis.failures.is_empty()).then(|| {
        let small = shrink(&g, Some(family), cfg.check);
        let shrunk = check_graph(&small, Some(family), cfg.check);
        let bars: Vec<_> = shrunk.barcodes.iter().map(|(k, b)| (*k, b)).collect();
        FailedTrial {
            trial,
            family,
            failures: analysis.failures.clone(),
            counterexample: CounterexampleBundle::new(&small, &bars, shrunk.failures.clone()),
        }
    });
    TrialResult { family, h1, failed }
}

pub fn run(cfg: &FuzzConfig) -> FuzzReport {
    let results: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect();
    let mut per_family = BTreeMap::new();
    let mut h1_bars = [0; 3];
    let mut failed = Vec::new();
    for r in results {
        *per_family.entry(r.family).or_default() += 1;
        for (acc, x) in h1_bars.iter_mut().zip(r.h1) {
            *acc += x;
        }
        failed.extend(r.failed);
    }
    FuzzReport {
        config: cfg.clone(),
        passed: cfg.trials - failed.len(),
        per_family,
        h1_bars,
        failed,
    }
}
