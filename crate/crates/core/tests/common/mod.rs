//! Independent reference implementations used to check the library.
//!
//! Everything here works on dense `Vec<Vec<f64>>` matrices and plain edge
//! lists and shares no code path with the CSR kernels under test.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple graph as a set of `(u, v)` with `u < v`.
pub fn random_edges(rng: &mut impl Rng, n: usize, p: f64) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                out.insert((u, v));
            }
        }
    }
    out
}

pub fn dense_adjacency(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        if u != v {
            a[u][v] = true;
            a[v][u] = true;
        }
    }
    a
}

/// `2 e_i / (d_i (d_i - 1))` by enumerating every neighbor pair.
pub fn brute_force_lcc(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<f64> {
    let a = dense_adjacency(n, edges);
    (0..n)
        .map(|i| {
            let nbrs: Vec<usize> = (0..n).filter(|&j| a[i][j]).collect();
            let d = nbrs.len();
            if d < 2 {
                return 0.0;
            }
            let mut closed = 0u64;
            for x in 0..d {
                for y in (x + 1)..d {
                    if a[nbrs[x]][nbrs[y]] {
                        closed += 1;
                    }
                }
            }
            2.0 * closed as f64 / (d * (d - 1)) as f64
        })
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn diag(v: &[f64]) -> Dense {
    let n = v.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        out[i][i] = v[i];
    }
    out
}

/// `D^-1/2 (A + I) D^-1/2` by explicit matrix products.
pub fn dense_normalized_adjacency(n: usize, edges: &BTreeSet<(usize, usize)>) -> Dense {
    let a = dense_adjacency(n, edges);
    let mut a_hat: Dense = a
        .iter()
        .map(|r| r.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
        .collect();
    for (i, row) in a_hat.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let deg: Vec<f64> = a_hat.iter().map(|r| r.iter().sum::<f64>()).collect();
    let d_inv_sqrt = diag(&deg.iter().map(|d| 1.0 / d.sqrt()).collect::<Vec<_>>());
    matmul(&matmul(&d_inv_sqrt, &a_hat), &d_inv_sqrt)
}

/// Literal replay of the adaptive propagation loop with dense matrices:
/// `H <- (I - diag(alpha)) A H + diag(alpha) X`, snapshotting row `i` after
/// step `k_i`.
pub fn dense_adaptive_propagate(a: &Dense, x: &Dense, alpha: &[f64], k: &[usize]) -> Dense {
    let n = a.len();
    let one_minus: Vec<f64> = alpha.iter().map(|a| 1.0 - a).collect();
    let keep = diag(&one_minus);
    let tele = diag(alpha);
    let teleport_term = matmul(&tele, x);
    let max_k = k.iter().copied().max().unwrap_or(0);
    let mut out = x.clone();
    let mut h = x.clone();
    for step in 0..max_k {
        h = add(&matmul(&keep, &matmul(a, &h)), &teleport_term);
        for i in 0..n {
            if k[i] == step + 1 {
                out[i] = h[i].clone();
            }
        }
    }
    out
}

/// Label propagation with dense matrices; `seeds[i]` is the clamped class.
pub fn dense_label_propagation(
    a: &Dense,
    seeds: &[Option<usize>],
    classes: usize,
    max_iters: usize,
    tol: f64,
) -> Vec<usize> {
    let n = a.len();
    let clamp = |y: &mut Dense| {
        for i in 0..n {
            if let Some(c) = seeds[i] {
                y[i] = vec![0.0; classes];
                y[i][c] = 1.0;
            }
        }
    };
    let mut y = vec![vec![0.0; classes]; n];
    clamp(&mut y);
    for _ in 0..max_iters {
        let mut next = matmul(a, &y);
        clamp(&mut next);
        let change = next
            .iter()
            .zip(&y)
            .flat_map(|(r, s)| r.iter().zip(s).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        y = next;
        if change < tol {
            break;
        }
    }
    y.iter().map(|r| first_argmax(r)).collect()
}

pub fn first_argmax(r: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..r.len() {
        if r[c] > r[best] {
            best = c;
        }
    }
    best
}

pub fn naive_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Exhaustive kNN: full sort of all training nodes by (cosine distance, id).
pub fn brute_force_knn(x: &Dense, y: &[usize], train: &[usize], k: usize, classes: usize) -> Vec<usize> {
    x.iter()
        .map(|q| {
            let mut all: Vec<(f64, usize)> = train
                .iter()
                .map(|&i| {
                    let d = if q.iter().all(|v| *v == 0.0) || x[i].iter().all(|v| *v == 0.0) {
                        1.0
                    } else {
                        1.0 - naive_cosine(q, &x[i])
                    };
                    (d, i)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut votes = vec![0.0; classes];
            for &(_, i) in all.iter().take(k) {
                votes[y[i]] += 1.0;
            }
            first_argmax(&votes)
        })
        .collect()
}

pub fn sum_dist_2d(points: &[[f64; 2]], c: [f64; 2]) -> f64 {
    points
        .iter()
        .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
        .sum()
}

fn ternary(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// Minimum of the convex sum-of-distances objective: a coarse grid over the
/// bounding box, then nested ternary search in the best grid cell's
/// neighborhood. Returns `(point, objective)`.
pub fn grid_geometric_median_2d(points: &[[f64; 2]]) -> ([f64; 2], f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let steps = 200;
    let (dx, dy) = ((x1 - x0) / steps as f64, (y1 - y0) / steps as f64);
    let mut best = ([x0, y0], f64::MAX);
    for a in 0..=steps {
        for b in 0..=steps {
            let c = [x0 + a as f64 * dx, y0 + b as f64 * dy];
            let v = sum_dist_2d(points, c);
            if v < best.1 {
                best = (c, v);
            }
        }
    }
    let (lx, hx) = (best.0[0] - 2.0 * dx, best.0[0] + 2.0 * dx);
    let (ly, hy) = (best.0[1] - 2.0 * dy, best.0[1] + 2.0 * dy);
    let inner = |x: f64| {
        let y = ternary(ly, hy, |y| sum_dist_2d(points, [x, y]));
        sum_dist_2d(points, [x, y])
    };
    let x = ternary(lx, hx, inner);
    let y = ternary(ly, hy, |y| sum_dist_2d(points, [x, y]));
    let refined = ([x, y], sum_dist_2d(points, [x, y]));
    if refined.1 < best.1 {
        refined
    } else {
        best
    }
}
