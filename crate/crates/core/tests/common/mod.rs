//! Brute-force reference implementations and random instance generators.
//!
//! Everything here works from plain point lists with linear scans and full
//! sorts, and never touches the k-d tree or the incremental update.

#![allow(dead_code)]

pub mod checks;

use std::cmp::Ordering;
use std::path::PathBuf;

use enan::data_io::{load_csv, Dataset, LabelColumn};
use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Q = Ratio<i128>;

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn by_rank(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// Every point except `exclude`, sorted by (distance, id).
pub fn brute_order(points: &[Vec<f64>], query: &[f64], exclude: Option<usize>) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, p)| (i, dist2(query, p)))
        .collect();
    all.sort_by(by_rank);
    all
}

pub fn brute_knn(points: &[Vec<f64>], query: &[f64], k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
    let mut all = brute_order(points, query, exclude);
    all.truncate(k);
    all
}

/// Neighbor order of every point within the set.
pub fn all_orders(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    (0..points.len())
        .map(|i| {
            brute_order(points, &points[i], Some(i))
                .into_iter()
                .map(|n| n.0)
                .collect()
        })
        .collect()
}

/// Class-wise statistic by the direct double sum: for each class, the share
/// of (member, rank <= k) pairs whose neighbor has the member's class.
/// Neighbor lists shorter than `k` truncate both the sum and the divisor.
pub fn classwise_exact(points: &[Vec<f64>], labels: &[usize], n_classes: usize, k: usize) -> Vec<Q> {
    classwise_from_orders(&all_orders(points), labels, n_classes, k)
}

pub fn classwise_from_orders(orders: &[Vec<usize>], labels: &[usize], n_classes: usize, k: usize) -> Vec<Q> {
    let k = k.min(orders.len().saturating_sub(1));
    let mut hits = vec![0i128; n_classes];
    let mut sizes = vec![0i128; n_classes];
    for (x, order) in orders.iter().enumerate() {
        let c = labels[x];
        sizes[c] += 1;
        for &nb in order.iter().take(k) {
            if labels[nb] == c {
                hits[c] += 1;
            }
        }
    }
    (0..n_classes)
        .map(|c| {
            if sizes[c] == 0 || k == 0 {
                Q::from_integer(0)
            } else {
                Q::new(hits[c], sizes[c] * k as i128)
            }
        })
        .collect()
}

pub fn to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

pub struct EnnOracle {
    pub label: usize,
    pub base: Vec<Q>,
    /// Statistics with the query appended under each class; `None` for
    /// classes without training members.
    pub assumed: Vec<Option<Vec<Q>>>,
}

/// ENN decision by physically appending `z` (as the highest id) under each
/// candidate label and recomputing every statistic from scratch.
pub fn enn_oracle(points: &[Vec<f64>], labels: &[usize], n_classes: usize, z: &[f64], k: usize) -> EnnOracle {
    let mut aug = points.to_vec();
    aug.push(z.to_vec());
    enn_oracle_from_orders(&all_orders(points), &all_orders(&aug), labels, n_classes, k)
}

/// Same as [`enn_oracle`] with the neighbor orders of the training set and
/// of the training set plus query precomputed.
pub fn enn_oracle_from_orders(
    orders: &[Vec<usize>],
    aug_orders: &[Vec<usize>],
    labels: &[usize],
    n_classes: usize,
    k: usize,
) -> EnnOracle {
    let base = classwise_from_orders(orders, labels, n_classes, k);
    let mut sizes = vec![0usize; n_classes];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut assumed = Vec::with_capacity(n_classes);
    let mut best: Option<(usize, Q)> = None;
    for j in 0..n_classes {
        if sizes[j] == 0 {
            assumed.push(None);
            continue;
        }
        let mut aug_labels = labels.to_vec();
        aug_labels.push(j);
        let t = classwise_from_orders(aug_orders, &aug_labels, n_classes, k);
        let score: Q = t.iter().zip(&base).map(|(a, b)| a - b).sum();
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((j, score));
        }
        assumed.push(Some(t));
    }
    EnnOracle {
        label: best.expect("at least one class").0,
        base,
        assumed,
    }
}

pub struct NanOracle {
    pub lambda: usize,
    pub nan_sets: Vec<Vec<usize>>,
    pub rounds_log: Vec<usize>,
    pub hit_cap: bool,
}

fn ceil_sqrt(r: usize) -> usize {
    (1..).find(|s| s * s >= r).unwrap()
}

fn mutual_at(orders: &[Vec<usize>], i: usize, r: usize) -> Vec<usize> {
    orders[i][..r]
        .iter()
        .copied()
        .filter(|&j| orders[j][..r].contains(&i))
        .collect()
}

/// Round-by-round natural-neighbor search, recomputing every point's mutual
/// set from the full neighbor orders at each round.
pub fn nan_search_oracle(points: &[Vec<f64>], max_lambda: usize, stable: bool) -> NanOracle {
    let m = points.len();
    let orders = all_orders(points);
    let cap = max_lambda.min(m - 1);
    let mut rounds_log: Vec<usize> = Vec::new();
    let mut r = 0;
    let mut hit_cap = false;
    loop {
        r += 1;
        let zero = (0..m).filter(|&i| mutual_at(&orders, i, r).is_empty()).count();
        rounds_log.push(zero);
        if zero == 0 {
            break;
        }
        // Rounds in a row whose count equals the one before.
        let repeats = rounds_log.windows(2).rev().take_while(|w| w[0] == w[1]).count();
        if stable && repeats >= ceil_sqrt(r) {
            break;
        }
        if r == cap {
            hit_cap = true;
            break;
        }
    }
    NanOracle {
        lambda: r,
        nan_sets: (0..m).map(|i| mutual_at(&orders, i, r)).collect(),
        rounds_log,
        hit_cap,
    }
}

/// Natural-neighbor count of `q` by appending it to the training points
/// (as the highest id) and testing mutual membership at depth `lambda`.
pub fn nan_count_oracle(points: &[Vec<f64>], lambda: usize, q: &[f64]) -> usize {
    let mut aug = points.to_vec();
    aug.push(q.to_vec());
    nan_count_from_orders(&all_orders(&aug), lambda)
}

/// `aug_orders` are the orders of the training points plus the query, which
/// is the last point.
pub fn nan_count_from_orders(aug_orders: &[Vec<usize>], lambda: usize) -> usize {
    let qi = aug_orders.len() - 1;
    aug_orders[qi][..lambda]
        .iter()
        .filter(|&&j| aug_orders[j][..lambda].contains(&qi))
        .count()
}

/// One-directional count: training points whose `lambda`-NN would take `q`.
pub fn reverse_count_from_orders(aug_orders: &[Vec<usize>], lambda: usize) -> usize {
    let qi = aug_orders.len() - 1;
    (0..qi).filter(|&j| aug_orders[j][..lambda].contains(&qi)).count()
}

pub fn majority_oracle(points: &[Vec<f64>], labels: &[usize], n_classes: usize, z: &[f64], k: usize) -> usize {
    let mut votes = vec![0usize; n_classes];
    for (id, _) in brute_knn(points, z, k, None) {
        votes[labels[id]] += 1;
    }
    let top = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == top).unwrap()
}

/// End-to-end ENaN label: search, query count, fallback to lambda, decision.
pub fn enan_oracle(points: &[Vec<f64>], labels: &[usize], n_classes: usize, z: &[f64]) -> usize {
    let nan = nan_search_oracle(points, 64, true);
    let count = nan_count_oracle(points, nan.lambda, z);
    let k = if count == 0 { nan.lambda } else { count };
    enn_oracle(points, labels, n_classes, z, k).label
}

/// A random labeled instance. `grid` instances draw small integer
/// coordinates, which produces many exact distance ties and duplicates.
#[derive(Debug, Clone)]
pub struct Instance {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub queries: Vec<Vec<f64>>,
}

impl Instance {
    pub fn random(seed: u64, max_m: usize, max_d: usize, max_c: usize, n_queries: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(2..=max_m);
        let d = rng.gen_range(1..=max_d);
        let n_classes = rng.gen_range(1..=max_c);
        let grid = rng.gen_bool(0.3);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..d)
                .map(|_| {
                    if grid {
                        rng.gen_range(0..5) as f64
                    } else {
                        rng.gen_range(-10.0..10.0)
                    }
                })
                .collect()
        };
        let points: Vec<Vec<f64>> = (0..m).map(|_| draw(&mut rng)).collect();
        let labels = (0..m).map(|_| rng.gen_range(0..n_classes)).collect();
        let queries = (0..n_queries).map(|_| draw(&mut rng)).collect();
        Instance {
            points,
            labels,
            n_classes,
            queries,
        }
    }

    pub fn dataset(&self) -> Dataset {
        labeled(&self.points, &self.labels, self.n_classes)
    }
}

/// Two Gaussian clusters in `d` dimensions with centers `sep` apart.
pub fn gaussian_pair(seed: u64, per_class: usize, d: usize, sep: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for _ in 0..per_class {
            points.push(
                (0..d)
                    .map(|a| normal.sample(&mut rng) + if a == 0 { c as f64 * sep } else { 0.0 })
                    .collect(),
            );
            labels.push(c);
        }
    }
    (points, labels)
}

pub fn labeled(points: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Dataset {
    let dim = points[0].len();
    Dataset::new(
        "labeled",
        dim,
        points.concat(),
        labels.to_vec(),
        (0..n_classes).map(|c| format!("c{c}")).collect(),
    )
    .unwrap()
}

pub fn rows(ds: &Dataset) -> Vec<Vec<f64>> {
    ds.points().map(<[f64]>::to_vec).collect()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn iris() -> Dataset {
    load_csv(fixture("iris.csv"), &LabelColumn::Last, false).unwrap()
}

/// Relative closeness used for float-vs-exact comparisons.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300) || a == b
}
