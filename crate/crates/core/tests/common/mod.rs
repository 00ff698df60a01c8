//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use exact_lp::Rational;
use num_traits::{One, Zero};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rrst::separation::{Cut, CutSet};
use rrst::{EdgeId, Instance, MultiGraph};

/// Minimum spanning tree weight by Kruskal with its own union-find, for
/// checks that must not go through the library's graph code.
pub fn kruskal_weight(n: usize, edges: &[(usize, usize, Rational)]) -> Rational {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut order: Vec<&(usize, usize, Rational)> = edges.iter().collect();
    order.sort_by(|a, b| a.2.cmp(&b.2));
    let mut total = Rational::zero();
    for (u, v, w) in order {
        let (a, b) = (find(&mut parent, *u), find(&mut parent, *v));
        if a != b {
            parent[a] = b;
            total += w;
        }
    }
    total
}

/// Edge list of an instance weighted by `f` of its cost triple.
pub fn weighted_edges(inst: &Instance, f: impl Fn(&rrst::CostTriple) -> Rational) -> Vec<(usize, usize, Rational)> {
    inst.graph().edges().map(|(e, u, v)| (u, v, f(inst.cost(e)))).collect()
}

/// Spanning tree count by the Matrix-Tree theorem: the determinant of the
/// Laplacian with one row and column removed, by exact Gaussian elimination.
pub fn matrix_tree_count(n: usize, edges: &[(usize, usize)]) -> Rational {
    if n <= 1 {
        return Rational::one();
    }
    let mut a = vec![vec![Rational::zero(); n]; n];
    for &(u, v) in edges {
        if u == v {
            continue;
        }
        a[u][u] += Rational::one();
        a[v][v] += Rational::one();
        a[u][v] -= Rational::one();
        a[v][u] -= Rational::one();
    }
    let mut m: Vec<Vec<Rational>> = a[1..].iter().map(|row| row[1..].to_vec()).collect();
    let size = n - 1;
    let mut det = Rational::one();
    for col in 0..size {
        let Some(pivot) = (col..size).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..size {
            let f = &m[r][col] / &p;
            if f.is_zero() {
                continue;
            }
            let pivot_row = m[col].clone();
            for (a, b) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *a -= &f * b;
            }
        }
    }
    det
}

pub fn edge_pairs(inst: &Instance) -> Vec<(usize, usize)> {
    inst.graph().edges().map(|(_, u, v)| (u, v)).collect()
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// A random spanning tree: Kruskal under random weights.
fn random_tree(g: &MultiGraph, rng: &mut ChaCha8Rng) -> BTreeSet<EdgeId> {
    let w: BTreeMap<EdgeId, u32> = g.edge_ids().map(|e| (e, rng.gen())).collect();
    g.min_spanning_forest(|e| w[&e]).into_iter().collect()
}

/// Points of three kinds: convex combinations of spanning trees (never
/// violated), such combinations with a few raised coordinates, and
/// independent random fractions.
pub fn random_point(g: &MultiGraph, rng: &mut ChaCha8Rng) -> BTreeMap<EdgeId, Rational> {
    let mut p: BTreeMap<EdgeId, Rational> = g.edge_ids().map(|e| (e, Rational::zero())).collect();
    match rng.gen_range(0..3) {
        0 | 1 => {
            let trees = rng.gen_range(1..=3);
            let weights: Vec<i64> = (0..trees).map(|_| rng.gen_range(1..=4)).collect();
            let sum: i64 = weights.iter().sum();
            for w in weights {
                for e in random_tree(g, rng) {
                    *p.get_mut(&e).unwrap() += ratio(w, sum);
                }
            }
            let ids: Vec<EdgeId> = p.keys().copied().collect();
            if ids.len() > 1 && rng.gen_bool(0.5) {
                for _ in 0..rng.gen_range(1..=2) {
                    let e = ids[rng.gen_range(0..ids.len())];
                    let v = p.get_mut(&e).unwrap();
                    *v = (&*v + ratio(rng.gen_range(1..=3), 4)).min(Rational::one());
                }
            }
        }
        _ => {
            let q = rng.gen_range(2..=6);
            for v in p.values_mut() {
                *v = ratio(rng.gen_range(0..=q), q);
            }
        }
    }
    p
}

/// Recomputes a forest cut from its node set alone.
pub fn check_forest_certificate(cut: &Cut, g: &MultiGraph, p: &BTreeMap<EdgeId, Rational>) {
    let CutSet::Nodes(nodes) = &cut.set else {
        panic!("forest cut without a node set");
    };
    assert!(nodes.len() >= 2 && nodes.len() < g.node_count());
    assert_eq!(cut.rhs, nodes.len() - 1);
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let members: Vec<EdgeId> =
        g.edges().filter(|(_, u, v)| inside.contains(u) && inside.contains(v)).map(|(e, _, _)| e).collect();
    assert_eq!(cut.members, members);
    let lhs: Rational = members.iter().map(|e| p[e].clone()).sum();
    assert!(lhs > Rational::from_integer(cut.rhs.into()), "certificate does not hold");
    assert_eq!(cut.slack, Rational::from_integer(cut.rhs.into()) - lhs);
}
