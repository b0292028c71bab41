//! Spectral clustering: eigen-embedding by the symmetric normalized
//! Laplacian followed by k-means with k-means++ seeding.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::netgen::Network;
use crate::{Error, Result};

const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITERS: usize = 100;

/// Rows are node embeddings in the span of the `k` eigenvectors of
/// `I - D^{-1/2} A* D^{-1/2}` with the smallest eigenvalues. Isolated nodes
/// embed at the origin.
pub fn spectral_embedding(net: &Network, k: usize) -> DMatrix<f64> {
    let n = net.node_count();
    let inv_sqrt: Vec<f64> = net
        .degrees()
        .into_iter()
        .map(|d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect();
    let mut lap = DMatrix::identity(n, n);
    for &(i, j) in net.edges() {
        let v = -inv_sqrt[i] * inv_sqrt[j];
        lap[(i, j)] = v;
        lap[(j, i)] = v;
    }
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    DMatrix::from_fn(n, k, |i, c| {
        if net.degree(i) == 0 {
            0.0
        } else {
            eig.eigenvectors[(i, order[c])]
        }
    })
}

fn sq_dist(points: &DMatrix<f64>, i: usize, center: &[f64]) -> f64 {
    center
        .iter()
        .enumerate()
        .map(|(c, &v)| (points[(i, c)] - v).powi(2))
        .sum()
}

fn plus_plus_seeds<R: Rng + ?Sized>(points: &DMatrix<f64>, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let row = |i: usize| points.row(i).iter().copied().collect::<Vec<f64>>();
    let mut centers = vec![row(rng.random_range(0..n))];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    chosen = i;
                    break;
                }
                u -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(row(pick));
        let latest = centers.last().expect("just pushed");
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, latest));
        }
    }
    centers
}

fn lloyd(points: &DMatrix<f64>, mut centers: Vec<Vec<f64>>) -> (Vec<usize>, f64) {
    let (n, dim) = points.shape();
    let k = centers.len();
    let nearest = |centers: &[Vec<f64>], i: usize| {
        (0..k)
            .map(|c| (sq_dist(points, i, &centers[c]), c))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .expect("k >= 1")
    };
    let mut labels: Vec<usize> = (0..n).map(|i| nearest(&centers, i).1).collect();
    for _ in 0..KMEANS_MAX_ITERS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for c in 0..dim {
                sums[l][c] += points[(i, c)];
            }
        }
        for c in 0..k {
            // an empty cluster keeps its previous center
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = (0..n).map(|i| nearest(&centers, i).1).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let inertia = (0..n).map(|i| sq_dist(points, i, &centers[labels[i]])).sum();
    (labels, inertia)
}

/// Renumbers labels in order of first appearance.
fn canonical(labels: Vec<usize>) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .into_iter()
        .map(|l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// k-means with k-means++ seeding, best of several restarts by inertia.
pub fn kmeans<R: Rng + ?Sized>(points: &DMatrix<f64>, k: usize, rng: &mut R) -> Vec<usize> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let seeds = plus_plus_seeds(points, k, rng);
        let (labels, inertia) = lloyd(points, seeds);
        if best.as_ref().is_none_or(|(_, b)| inertia < *b) {
            best = Some((labels, inertia));
        }
    }
    canonical(best.expect("at least one restart").0)
}

/// Cluster label per node, labels numbered by first appearance.
pub fn spectral_clusters<R: Rng + ?Sized>(net: &Network, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = net.node_count();
    if k < 2 || k > n / 2 {
        return Err(Error::invalid(format!(
            "number of clusters must be in 2..={} for {n} nodes, got {k}",
            n / 2
        )));
    }
    Ok(kmeans(&spectral_embedding(net, k), k, rng))
}
