use std::collections::BTreeMap;

use proptest::prelude::*;

use ph_metric::inclusion::{build_injection, verify_inclusion};
use ph_metric::oracle::brute_force_all;
use ph_metric::persistence::{barcode, betti_at, extract_pairs, reduce, BarcodeJson};
use ph_metric::{
    DistanceKind, Filtration, Graph, GraphF64, IngestOptions, Matrix, MatrixF64, NoteEvent,
    NoteSequence, Pitch, Rational, Scalar, VertexId, WeightTransform, WeightedGraph,
};

/// Connected graph: random spanning tree, random chords, weights `1/k`.
fn connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            let chords = proptest::collection::vec(any::<bool>(), n * (n - 1) / 2);
            let weights = proptest::collection::vec(1i64..=12, n * (n - 1) / 2);
            (Just(n), parents, chords, weights)
        })
        .prop_map(|(n, parents, chords, weights)| {
            let mut edges = BTreeMap::new();
            for (i, p) in parents.into_iter().enumerate() {
                edges.insert((p, i + 1), ());
            }
            let mut slot = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if chords[slot] && chords[(slot * 7 + 3) % chords.len()] {
                        edges.insert((u, v), ());
                    }
                    slot += 1;
                }
            }
            let list = edges
                .keys()
                .enumerate()
                .map(|(i, &(u, v))| (u, v, Rational::from_ratio(1, weights[i % weights.len()])));
            WeightedGraph::from_edges(n, list).unwrap()
        })
}

fn matrices(g: &Graph) -> [Matrix; 3] {
    DistanceKind::ALL.map(|k| Matrix::compute(g, k).unwrap())
}

fn notes() -> impl Strategy<Value = Vec<(i64, i64)>> {
    proptest::collection::vec((60i64..66, prop_oneof![Just(4i64), Just(8)]), 2..30)
}

fn sequence(raw: &[(i64, i64)]) -> Option<NoteSequence> {
    let events = raw
        .iter()
        .map(|&(p, d)| NoteEvent::new(Pitch::Midi(p), Rational::from_ratio(1, d)).unwrap())
        .collect();
    NoteSequence::new(events).ok()
}

fn weights_by_label(g: &Graph) -> BTreeMap<(String, String), Rational> {
    g.edges()
        .map(|(u, v, w)| {
            let (a, b) = (
                g.label(u).unwrap().to_owned(),
                g.label(v).unwrap().to_owned(),
            );
            (if a < b { (a, b) } else { (b, a) }, w.clone())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fast_distances_match_enumeration(g in connected_graph(8)) {
        let brute = brute_force_all(&g, 8).unwrap();
        for (i, m) in matrices(&g).iter().enumerate() {
            prop_assert_eq!(m.rows(), &brute[i][..]);
        }
    }

    #[test]
    fn distances_are_ordered(g in connected_graph(9)) {
        let [m1, m2, m3] = matrices(&g);
        let n = g.vertex_count();
        for v in 0..n {
            for w in 0..n {
                prop_assert!(m2.get(v, w) <= m3.get(v, w));
                prop_assert!(m3.get(v, w) <= m1.get(v, w));
            }
        }
    }

    #[test]
    fn reciprocal_is_an_involution(g in connected_graph(8)) {
        let r = g.apply_transform(&WeightTransform::Reciprocal).unwrap();
        prop_assert_eq!(r.apply_transform(&WeightTransform::Reciprocal).unwrap(), g);
    }

    #[test]
    fn d1_path_is_mapped_by_weight_transform(g in connected_graph(8)) {
        let r = g.apply_transform(&WeightTransform::Reciprocal).unwrap();
        let mr = Matrix::compute(&r, DistanceKind::D1).unwrap();
        let n = g.vertex_count();
        for v in 0..n {
            for w in v + 1..n {
                let p = ph_metric::distance::d1_path(&g, VertexId(v), VertexId(w)).unwrap();
                let mut total = Rational::from_ratio(0, 1);
                for e in p.vertices.windows(2) {
                    total += g.weight(e[0].0, e[1].0).unwrap().recip();
                }
                prop_assert_eq!(&total, mr.get(v, w));
            }
        }
    }

    #[test]
    fn d2_d3_ignore_vertex_ordering(g in connected_graph(8), rot in 0usize..8) {
        let n = g.vertex_count();
        let order: Vec<VertexId> = (0..n).map(|i| VertexId((i + rot) % n)).collect();
        let h = g.reorder(&order).unwrap();
        for kind in [DistanceKind::D2, DistanceKind::D3] {
            let a = Matrix::compute(&g, kind).unwrap();
            let b = Matrix::compute(&h, kind).unwrap().unpermute(&order);
            prop_assert_eq!(a.rows(), b.rows());
        }
    }

    #[test]
    fn reduction_and_betti_numbers(g in connected_graph(7)) {
        for m in matrices(&g) {
            let f = Filtration::build(&m);
            prop_assert!(f.is_valid());
            let red = reduce(&f);
            prop_assert!(red.r.pivots_distinct());
            prop_assert!(red.check_decomposition(&f));
            let b = extract_pairs(&f, &red);
            prop_assert!(b.accounts_for(f.len()));
            for eps in f.distinct_values() {
                for dim in 0..2 {
                    prop_assert_eq!(b.count_containing(dim, &eps), betti_at(&f, dim, &eps));
                }
            }
            for p in b.proper(1) {
                let (u, v) = p.birth_edge().unwrap();
                prop_assert!(g.has_edge(u, v));
                prop_assert!(p.cycle_is_closed());
            }
        }
    }

    #[test]
    fn barcodes_nest_by_birth_edge(g in connected_graph(9)) {
        let [m1, m2, m3] = matrices(&g);
        let (b1, b2, b3) = (barcode(&m1), barcode(&m2), barcode(&m3));
        let inc = verify_inclusion(&b2, &b3, &b1).unwrap();
        prop_assert!(inc.holds(), "{:?}", inc);
        let [c2, c3, c1] = inc.cardinalities;
        prop_assert!(c2 <= c3 && c3 <= c1);
        let rep = build_injection(&b2, &b3, &b1).unwrap();
        prop_assert!(rep.is_clean(), "{:?}", rep.violations);
    }

    #[test]
    fn outputs_round_trip(g in connected_graph(7)) {
        prop_assert_eq!(&Graph::from_json(&g.to_json()).unwrap(), &g);
        for m in matrices(&g) {
            let back = Matrix::from_csv(m.to_csv().as_bytes(), m.kind()).unwrap();
            prop_assert_eq!(back.rows(), m.rows());
            let b = barcode(&m);
            let doc = BarcodeJson::from_json(&b.to_json()).unwrap();
            prop_assert_eq!(doc.to_barcode::<Rational>().unwrap(), b);
        }
    }

    #[test]
    fn float_instantiation_tracks_exact(g in connected_graph(8)) {
        let gf: GraphF64 = g.convert(|w| w.to_f64()).unwrap();
        for kind in DistanceKind::ALL {
            let exact = Matrix::compute(&g, kind).unwrap();
            let approx = MatrixF64::compute(&gf, kind).unwrap();
            for (re, ra) in exact.rows().iter().zip(approx.rows()) {
                for (e, a) in re.iter().zip(ra) {
                    prop_assert!((e.to_f64() - a).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn music_graph_ignores_direction(raw in notes()) {
        if let Some(seq) = sequence(&raw) {
            let fwd: Result<Graph, _> = seq.build_graph(IngestOptions::default());
            let back: Result<Graph, _> = seq.reversed().build_graph(IngestOptions::default());
            let (fwd, back) = (fwd.unwrap(), back.unwrap());
            prop_assert_eq!(fwd.vertex_count(), back.vertex_count());
            prop_assert_eq!(weights_by_label(&fwd), weights_by_label(&back));
        }
    }

    #[test]
    fn music_graph_weights_are_reciprocal_counts(raw in notes()) {
        if let Some(seq) = sequence(&raw) {
            let g: Graph = seq.build_graph(IngestOptions::default()).unwrap();
            let ev = seq.events();
            let mut counts: BTreeMap<(String, String), i64> = BTreeMap::new();
            for pair in ev.windows(2) {
                let (a, b) = (pair[0].label(), pair[1].label());
                if a != b {
                    *counts.entry(if a < b { (a, b) } else { (b, a) }).or_default() += 1;
                }
            }
            let expect: BTreeMap<_, _> = counts
                .into_iter()
                .map(|(k, c)| (k, Rational::from_ratio(1, c)))
                .collect();
            prop_assert_eq!(weights_by_label(&g), expect);
        }
    }
}
