//! Lloyd's k-means with k-means++ seeding, used to split a GA population into
//! islands by fitness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Total within-cluster squared distance of the final model.
    pub inertia: f64,
    /// Inertia after every Lloyd iteration; non-increasing.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn cluster_count(&self) -> usize {
        self.centroids.len()
    }

    /// Point indices grouped by label.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.centroids.len()];
        for (i, &c) in self.labels.iter().enumerate() {
            g[c].push(i);
        }
        g
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the closest centroid; ties go to the lowest
/// index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(c, m)| (c, sq_dist(p, m)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn plus_plus_seeds<R: Rng + ?Sized>(points: &[Vec<f64>], clusters: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < clusters {
        // D^2 sampling; a zero wheel (all points on centroids) picks uniformly.
        let next = if d2.iter().all(|&d| d == 0.0) {
            rng.random_range(0..points.len())
        } else {
            let total: f64 = d2.iter().sum();
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|&d| {
                    acc += d;
                    acc > u
                })
                .unwrap_or(points.len() - 1)
        };
        centroids.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn centroid_of(points: &[Vec<f64>], members: impl Iterator<Item = usize>, dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for i in members {
        sum.iter_mut().zip(&points[i]).for_each(|(s, x)| *s += x);
        n += 1;
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    sum
}

/// Moves the point farthest from its centroid into each empty cluster, taken
/// from clusters that keep at least one member.
fn repair_empty(points: &[Vec<f64>], centroids: &mut [Vec<f64>], labels: &mut [usize]) {
    let clusters = centroids.len();
    loop {
        let mut sizes = vec![0usize; clusters];
        labels.iter().for_each(|&c| sizes[c] += 1);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let donor = (0..points.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .map(|i| (i, sq_dist(&points[i], &centroids[labels[i]])))
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
            .map(|(i, _)| i)
            .expect("more points than clusters");
        labels[donor] = empty;
        centroids[empty] = points[donor].clone();
    }
}

fn inertia(points: &[Vec<f64>], centroids: &[Vec<f64>], labels: &[usize]) -> f64 {
    points.iter().zip(labels).map(|(p, &c)| sq_dist(p, &centroids[c])).sum()
}

/// Lloyd iterations from k-means++ seeds. Stops once no centroid moves more
/// than `tol` (Euclidean) or after `max_iter` iterations.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    clusters: usize,
    max_iter: usize,
    tol: f64,
    rng: &mut R,
) -> Result<ClusterModel> {
    if clusters == 0 || points.len() < clusters {
        return Err(Error::TooFewPoints {
            points: points.len(),
            clusters,
        });
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::ShapeMismatch {
            expected: format!("{dim}-dimensional points"),
            actual: format!("{}-dimensional point", p.len()),
        });
    }
    let mut centroids = plus_plus_seeds(points, clusters, rng);
    let mut labels = vec![0usize; points.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter.max(1) {
        iterations += 1;
        for (l, p) in labels.iter_mut().zip(points) {
            *l = nearest(p, &centroids).0;
        }
        repair_empty(points, &mut centroids, &mut labels);
        let mut shift: f64 = 0.0;
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let updated = centroid_of(points, labels.iter().enumerate().filter(|(_, &l)| l == c).map(|(i, _)| i), dim);
            shift = shift.max(sq_dist(centroid, &updated).sqrt());
            *centroid = updated;
        }
        trace.push(inertia(points, &centroids, &labels));
        if shift < tol {
            break;
        }
    }
    Ok(ClusterModel {
        inertia: *trace.last().expect("at least one iteration"),
        centroids,
        labels,
        inertia_trace: trace,
        iterations,
    })
}

/// Splits a population into `clusters` islands by k-means over scalar
/// fitness. Each island lists member indices in ascending order; islands are
/// ordered by their smallest member.
pub fn partition_population<R: Rng + ?Sized>(fitness: &[f64], clusters: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if fitness.len() < clusters || clusters == 0 {
        return Err(Error::TooFewPoints {
            points: fitness.len(),
            clusters,
        });
    }
    if let Some(&bad) = fitness.iter().find(|f| !f.is_finite()) {
        return Err(Error::NonFiniteFitness(bad));
    }
    if clusters == 1 {
        return Ok(vec![(0..fitness.len()).collect()]);
    }
    let points: Vec<Vec<f64>> = fitness.iter().map(|&f| vec![f]).collect();
    let model = kmeans(&points, clusters, DEFAULT_MAX_ITER, DEFAULT_TOL, rng)?;
    let mut groups = model.groups();
    groups.sort_by_key(|g| g[0]);
    Ok(groups)
}
