//! Exhaustive simple-path enumeration, used to cross-check the fast
//! distance routines on small graphs.
//!
//! Shares no code with `distance`: paths are enumerated by depth-first
//! search and each definition is applied literally to the full path set.
//! The minimal edge path is recovered by replaying the ordering rule over
//! the enumeration: among all minimum-hop paths from the smaller endpoint,
//! pick the one whose vertices, read from the far end backwards, are
//! lexicographically smallest.

use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedGraph};
use crate::scalar::Scalar;

pub const DEFAULT_BOUND: usize = 12;

#[derive(Clone)]
struct Best<T> {
    hops: usize,
    /// Reversed interior vertices of the chosen minimum-hop path.
    key: Vec<usize>,
    /// Weight of that path.
    d1: T,
    /// Cheapest minimum-hop path.
    d3: T,
    /// Cheapest path overall.
    d2: T,
}

/// Best values from `root` to every vertex, by walking every simple path.
fn enumerate_from<T: Scalar>(g: &WeightedGraph<T>, root: usize) -> Vec<Option<Best<T>>> {
    enumerate(g, root, true)
}

fn enumerate<T: Scalar>(g: &WeightedGraph<T>, root: usize, prune: bool) -> Vec<Option<Best<T>>> {
    let n = g.vertex_count();
    let mut best: Vec<Option<Best<T>>> = vec![None; n];
    let mut on_path = vec![false; n];
    let mut stack = vec![root];
    on_path[root] = true;
    walk(
        g,
        root,
        T::zero(),
        prune,
        &mut stack,
        &mut on_path,
        &mut best,
    );
    best
}

fn walk<T: Scalar>(
    g: &WeightedGraph<T>,
    u: usize,
    weight: T,
    prune: bool,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    best: &mut [Option<Best<T>>],
) {
    for (x, w) in g.neighbors(u) {
        let x = *x;
        if on_path[x] {
            continue;
        }
        let total = weight.clone() + w.clone();
        stack.push(x);
        on_path[x] = true;
        record(best, x, stack, &total);
        // A prefix beaten by a known path with fewer hops and no more weight
        // leads nowhere optimal: splicing that path in and shortcutting any
        // repeated vertex gives a walk with fewer hops and no more weight.
        let b = best[x].as_ref().expect("just recorded");
        if !(prune && b.hops < stack.len() - 1 && b.d3 <= total) {
            walk(g, x, total, prune, stack, on_path, best);
        }
        on_path[x] = false;
        stack.pop();
    }
}

fn record<T: Scalar>(best: &mut [Option<Best<T>>], target: usize, stack: &[usize], total: &T) {
    let hops = stack.len() - 1;
    let key: Vec<usize> = stack[1..stack.len() - 1].iter().rev().copied().collect();
    match &mut best[target] {
        None => {
            best[target] = Some(Best {
                hops,
                key,
                d1: total.clone(),
                d3: total.clone(),
                d2: total.clone(),
            })
        }
        Some(b) => {
            if *total < b.d2 {
                b.d2 = total.clone();
            }
            if hops < b.hops {
                b.hops = hops;
                b.key = key;
                b.d1 = total.clone();
                b.d3 = total.clone();
            } else if hops == b.hops {
                if *total < b.d3 {
                    b.d3 = total.clone();
                }
                if key < b.key {
                    b.key = key;
                    b.d1 = total.clone();
                }
            }
        }
    }
}

fn pick<T: Scalar>(b: &Best<T>, kind: DistanceKind) -> T {
    match kind {
        DistanceKind::D1 => b.d1.clone(),
        DistanceKind::D2 => b.d2.clone(),
        DistanceKind::D3 => b.d3.clone(),
    }
}

fn check_size<T: Scalar>(g: &WeightedGraph<T>, bound: usize) -> Result<()> {
    if g.vertex_count() > bound {
        return Err(Error::TooLarge {
            count: g.vertex_count(),
            bound,
        });
    }
    Ok(())
}

/// Distance between `v` and `w` by exhaustive enumeration.
pub fn brute_force_distance<T: Scalar>(
    g: &WeightedGraph<T>,
    v: VertexId,
    w: VertexId,
    kind: DistanceKind,
    bound: usize,
) -> Result<T> {
    check_size(g, bound)?;
    let (a, b) = (g.check_vertex(v)?, g.check_vertex(w)?);
    if a == b {
        return Ok(T::zero());
    }
    let (root, target) = (a.min(b), a.max(b));
    let best = enumerate_from(g, root);
    best[target]
        .as_ref()
        .map(|b| pick(b, kind))
        .ok_or(Error::NotConnected { components: 2 })
}

/// All-pairs matrices `[d1, d2, d3]` by exhaustive enumeration.
#[allow(clippy::needless_range_loop)] // fills both triangles per (root, target)
pub fn brute_force_all<T: Scalar>(g: &WeightedGraph<T>, bound: usize) -> Result<[Vec<Vec<T>>; 3]> {
    check_size(g, bound)?;
    let n = g.vertex_count();
    let mut out = [
        vec![vec![T::zero(); n]; n],
        vec![vec![T::zero(); n]; n],
        vec![vec![T::zero(); n]; n],
    ];
    for root in 0..n {
        let best = enumerate_from(g, root);
        for (target, b) in best.iter().enumerate().skip(root + 1) {
            let b = b.as_ref().ok_or(Error::NotConnected { components: 2 })?;
            for (slot, kind) in DistanceKind::ALL.into_iter().enumerate() {
                let d = pick(b, kind);
                out[slot][root][target] = d.clone();
                out[slot][target][root] = d;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightTransform;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn heavy_edge_triangle_oracle() {
        let t = WeightedGraph::from_edges(3, [(0, 1, q(1, 1)), (1, 2, q(10, 1)), (0, 2, q(1, 1))])
            .unwrap();
        let d = brute_force_distance(
            &t,
            VertexId(1),
            VertexId(2),
            DistanceKind::D2,
            DEFAULT_BOUND,
        )
        .unwrap();
        assert_eq!(d, q(2, 1));
        let d = brute_force_distance(
            &t,
            VertexId(1),
            VertexId(2),
            DistanceKind::D3,
            DEFAULT_BOUND,
        )
        .unwrap();
        assert_eq!(d, q(10, 1));
    }

    #[test]
    fn reciprocal_four_cycle_oracle() {
        let m = WeightedGraph::from_edges(
            4,
            [
                (0, 1, q(1, 1)),
                (1, 2, q(1, 1)),
                (2, 3, q(1, 1)),
                (0, 3, q(1, 2)),
            ],
        )
        .unwrap();
        let r = m.apply_transform(&WeightTransform::Reciprocal).unwrap();
        let d = brute_force_distance(
            &r,
            VertexId(0),
            VertexId(2),
            DistanceKind::D2,
            DEFAULT_BOUND,
        )
        .unwrap();
        assert_eq!(d, q(2, 1));
    }

    #[test]
    fn replays_vertex_ordering() {
        let left = WeightedGraph::from_edges(
            4,
            [
                (0, 3, q(1, 1)),
                (3, 2, q(2, 1)),
                (2, 1, q(10, 1)),
                (1, 0, q(20, 1)),
            ],
        )
        .unwrap();
        let d = brute_force_distance(
            &left,
            VertexId(2),
            VertexId(0),
            DistanceKind::D1,
            DEFAULT_BOUND,
        )
        .unwrap();
        assert_eq!(d, q(30, 1));
    }

    #[test]
    fn pruning_matches_full_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.random_range(3..8);
            let mut edges: Vec<_> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(0.4) && !edges.contains(&(u, v)) {
                        edges.push((u, v));
                    }
                }
            }
            let g = WeightedGraph::from_edges(
                n,
                edges
                    .into_iter()
                    .map(|(u, v)| (u, v, q(1, rng.random_range(1..5)))),
            )
            .unwrap();
            for root in 0..n {
                let a = enumerate(&g, root, true);
                let b = enumerate(&g, root, false);
                for t in 0..n {
                    let key = |x: &Option<Best<Rational>>| {
                        x.as_ref()
                            .map(|b| (b.hops, b.d1.clone(), b.d2.clone(), b.d3.clone()))
                    };
                    assert_eq!(key(&a[t]), key(&b[t]));
                }
            }
        }
    }

    #[test]
    fn bound_enforced() {
        let edges: Vec<_> = (0..13).map(|i| (i, i + 1, q(1, 1))).collect();
        let path = WeightedGraph::from_edges(14, edges).unwrap();
        assert!(matches!(
            brute_force_distance(
                &path,
                VertexId(0),
                VertexId(1),
                DistanceKind::D2,
                DEFAULT_BOUND
            ),
            Err(Error::TooLarge {
                count: 14,
                bound: 12
            })
        ));
        assert!(
            brute_force_distance(&path, VertexId(0), VertexId(13), DistanceKind::D2, 20).is_ok()
        );
    }
}
