//! Per-instance comparisons against the oracles, returning a description of
//! the first disagreement.

use enan::classification::{knn_classify, train_enan, train_enn_fixed, BaseStatistic};
use enan::natural_neighbor::{compute_nane, NanSearchOptions, NeighborCountRule};
use enan::spatial_index::KdTree;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub knn_queries: usize,
    pub statistics: usize,
    pub enn_decisions: usize,
    pub nan_counts: usize,
    pub searches: usize,
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close_vec(a: &[f64], b: &[Q]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, to_f64(y), 1e-9))
}

/// Random instance number `seed` (m <= 200, d <= 5, C <= 3) checked against
/// every oracle.
pub fn oracle_instance(seed: u64, tally: &mut Tally) -> Result<(), String> {
    let inst = Instance::random(seed, 200, 5, 3, 4);
    let ds = inst.dataset();
    let pts = &inst.points;
    let labels = &inst.labels;
    let c = inst.n_classes;
    let m = pts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);

    // Exact kNN, for queries and for training points excluding themselves.
    let tree = KdTree::build(ds.values(), ds.dim()).map_err(|e| e.to_string())?;
    let mut probes: Vec<(Vec<f64>, Option<usize>)> = inst.queries.iter().map(|q| (q.clone(), None)).collect();
    for _ in 0..4 {
        let i = rng.gen_range(0..m);
        probes.push((pts[i].clone(), Some(i)));
    }
    for (q, exclude) in &probes {
        let available = m - usize::from(exclude.is_some());
        for k in [1, 2, available.div_ceil(2), available, available + 3] {
            let got = tree.knn(q, k.max(1), *exclude).map_err(|e| e.to_string())?;
            let want = brute_knn(pts, q, k.max(1), *exclude);
            let got: Vec<(usize, u64)> = got.iter().map(|n| (n.id, n.dist2.to_bits())).collect();
            let want: Vec<(usize, u64)> = want.iter().map(|n| (n.0, n.1.to_bits())).collect();
            ensure!(got == want, "seed {seed}: knn k={k} exclude={exclude:?} differs");
            tally.knn_queries += 1;
        }
    }

    // Natural-neighbor search.
    let orders = all_orders(pts);
    let nan = compute_nane(&tree, &NanSearchOptions::default()).map_err(|e| e.to_string())?;
    let want = nan_search_oracle(pts, 64, true);
    ensure!(
        nan.lambda() == want.lambda,
        "seed {seed}: lambda {} vs {}",
        nan.lambda(),
        want.lambda
    );
    ensure!(
        nan.rounds_log() == want.rounds_log.as_slice(),
        "seed {seed}: rounds log differs"
    );
    ensure!(nan.hit_cap() == want.hit_cap, "seed {seed}: cap flag differs");
    for i in 0..m {
        let mut got = nan.nan_set(i).to_vec();
        got.sort_unstable();
        let mut w = want.nan_sets[i].clone();
        w.sort_unstable();
        ensure!(got == w, "seed {seed}: natural neighbors of {i} differ");
    }
    tally.searches += 1;

    // Class-wise statistics at every depth.
    let model = train_enan(ds.clone()).map_err(|e| e.to_string())?;
    let lambda = model.lambda();
    for k in 1..=lambda {
        let got = model.stats().classwise_statistic(k).map_err(|e| e.to_string())?;
        let want = classwise_from_orders(&orders, labels, c, k);
        ensure!(
            close_vec(&got, &want),
            "seed {seed}: statistic at k={k}: {got:?} vs {want:?}"
        );
        tally.statistics += 1;
    }

    let fixed_k = rng.gen_range(1..m);
    let fixed = train_enn_fixed(ds.clone(), fixed_k).map_err(|e| e.to_string())?;
    let got = fixed.stats().classwise_statistic(fixed_k).map_err(|e| e.to_string())?;
    ensure!(
        close_vec(&got, &classwise_from_orders(&orders, labels, c, fixed_k)),
        "seed {seed}: fixed-k statistic differs"
    );
    tally.statistics += 1;

    for z in &inst.queries {
        let mut aug = pts.clone();
        aug.push(z.clone());
        let aug_orders = all_orders(&aug);

        // ENN decisions at several depths.
        let mut ks = vec![1, lambda.div_ceil(2), lambda];
        ks.dedup();
        for k in ks {
            let got = model
                .core()
                .enn_explain(z, k, BaseStatistic::QueryK)
                .map_err(|e| e.to_string())?;
            let want = enn_oracle_from_orders(&orders, &aug_orders, labels, c, k);
            ensure!(
                got.label == want.label,
                "seed {seed}: ENN label at k={k}: {} vs {}",
                got.label,
                want.label
            );
            ensure!(close_vec(&got.base, &want.base), "seed {seed}: base statistic at k={k}");
            for j in 0..c {
                match (&got.assumed[j], &want.assumed[j]) {
                    (Some(g), Some(w)) => ensure!(close_vec(g, w), "seed {seed}: assumed statistic j={j} k={k}"),
                    (None, None) => {}
                    _ => return Err(format!("seed {seed}: candidate set differs at j={j}")),
                }
            }
            tally.enn_decisions += 1;
        }
        let got = fixed.predict_one(z).map_err(|e| e.to_string())?;
        let want = enn_oracle_from_orders(&orders, &aug_orders, labels, c, fixed_k).label;
        ensure!(got == want, "seed {seed}: fixed-k ENN label at k={fixed_k}");
        tally.enn_decisions += 1;

        // Query natural-neighbor counts and the end-to-end label.
        let mutual = nan
            .num_natural_neighbors(&tree, z, NeighborCountRule::Mutual)
            .map_err(|e| e.to_string())?;
        let want_mutual = nan_count_from_orders(&aug_orders, lambda);
        ensure!(
            mutual == want_mutual,
            "seed {seed}: query count {mutual} vs {want_mutual}"
        );
        let reverse = nan
            .num_natural_neighbors(&tree, z, NeighborCountRule::Reverse)
            .map_err(|e| e.to_string())?;
        ensure!(
            reverse == reverse_count_from_orders(&aug_orders, lambda),
            "seed {seed}: reverse query count differs"
        );
        tally.nan_counts += 2;

        let k_z = if want_mutual == 0 { lambda } else { want_mutual };
        let want = enn_oracle_from_orders(&orders, &aug_orders, labels, c, k_z).label;
        let got = model.predict_one(z).map_err(|e| e.to_string())?;
        ensure!(got == want, "seed {seed}: ENaN label {got} vs {want}");
        tally.enn_decisions += 1;

        let k = rng.gen_range(1..=m);
        let got = knn_classify(&tree, labels, c, z, k).map_err(|e| e.to_string())?;
        ensure!(
            got == majority_oracle(pts, labels, c, z, k),
            "seed {seed}: knn vote at k={k}"
        );
    }
    Ok(())
}

/// Structural invariants on random instance number `seed`.
pub fn invariant_instance(seed: u64) -> Result<(), String> {
    let inst = Instance::random(seed, 120, 4, 3, 6);
    let grid = inst.points.iter().flatten().all(|v| v.fract() == 0.0);
    let ds = inst.dataset();
    let model = train_enan(ds.clone()).map_err(|e| e.to_string())?;
    let lambda = model.lambda();
    let nan = model.nan_model();

    // Statistics stay in [0, 1] at every depth and under every assumption.
    for k in 1..=lambda {
        let t = model.stats().classwise_statistic(k).map_err(|e| e.to_string())?;
        ensure!(
            t.iter().all(|v| (0.0..=1.0).contains(v)),
            "seed {seed}: T out of range at k={k}"
        );
    }
    for z in &inst.queries {
        let d = model.explain(z).map_err(|e| e.to_string())?;
        for t in d.assumed.iter().flatten() {
            ensure!(
                t.iter().all(|v| (0.0..=1.0).contains(v)),
                "seed {seed}: assumed T out of range"
            );
        }
        let (_, k) = model.query_k(z).map_err(|e| e.to_string())?;
        ensure!(
            (1..=lambda).contains(&k),
            "seed {seed}: query k {k} outside 1..={lambda}"
        );
    }

    // Mutuality and count bounds.
    for i in 0..ds.len() {
        ensure!(nan.nan_set(i).len() <= lambda, "seed {seed}: count above lambda");
        for &j in nan.nan_set(i) {
            ensure!(nan.nan_set(j).contains(&i), "seed {seed}: {i} -> {j} not mutual");
        }
    }

    // Nearest-neighbor lists grow by extension.
    let tree = model.core().index();
    for z in &inst.queries {
        let full = tree.knn(z, ds.len(), None).map_err(|e| e.to_string())?;
        for k in 1..ds.len() {
            let part = tree.knn(z, k, None).map_err(|e| e.to_string())?;
            ensure!(part[..] == full[..k], "seed {seed}: knn({k}) is not a prefix");
        }
    }

    let queries: Vec<f64> = inst.queries.concat();
    let base = model.predict(&queries).map_err(|e| e.to_string())?;

    if grid {
        // Integer shifts keep every distance exact.
        let shift: Vec<f64> = (0..ds.dim()).map(|a| 3.0 + a as f64 * 7.0).collect();
        let moved = |p: &Vec<f64>| p.iter().zip(&shift).map(|(x, s)| x + s).collect::<Vec<f64>>();
        let pts: Vec<Vec<f64>> = inst.points.iter().map(moved).collect();
        let qs: Vec<f64> = inst.queries.iter().flat_map(moved).collect();
        let shifted = train_enan(labeled(&pts, &inst.labels, inst.n_classes)).map_err(|e| e.to_string())?;
        ensure!(
            shifted.lambda() == lambda,
            "seed {seed}: lambda changed under translation"
        );
        ensure!(
            shifted.predict(&qs).map_err(|e| e.to_string())? == base,
            "seed {seed}: translation changed predictions"
        );
    } else {
        // Without distance ties the point order cannot matter.
        let mut perm: Vec<usize> = (0..ds.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let pts: Vec<Vec<f64>> = perm.iter().map(|&i| inst.points[i].clone()).collect();
        let lab: Vec<usize> = perm.iter().map(|&i| inst.labels[i]).collect();
        let shuffled = train_enan(labeled(&pts, &lab, inst.n_classes)).map_err(|e| e.to_string())?;
        ensure!(
            shuffled.lambda() == lambda,
            "seed {seed}: lambda changed under permutation"
        );
        let mut a = nan.nan_counts();
        let mut b = shuffled.nan_model().nan_counts();
        a.sort_unstable();
        b.sort_unstable();
        ensure!(a == b, "seed {seed}: count multiset changed under permutation");
        ensure!(
            shuffled.predict(&queries).map_err(|e| e.to_string())? == base,
            "seed {seed}: permutation changed predictions"
        );
    }
    Ok(())
}

/// Degenerate inputs, each returning `Err` with a description on failure.
pub fn degenerate_cases() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("two points", two_points()),
        ("single class", single_class()),
        ("outlier query", outlier_query()),
        ("duplicate points", duplicates()),
        ("constant column", constant_column()),
    ]
}

fn two_points() -> Result<(), String> {
    let model = train_enan(labeled(&[vec![0.0], vec![1.0]], &[0, 1], 2)).map_err(|e| e.to_string())?;
    ensure!(model.lambda() == 1, "lambda {}", model.lambda());
    ensure!(model.nan_model().nan_counts() == vec![1, 1], "counts");
    let t = model.training_statistic();
    ensure!(t == vec![0.0, 0.0], "T {t:?}");
    let one = train_enan(labeled(&[vec![0.0], vec![1.0]], &[0, 0], 1)).map_err(|e| e.to_string())?;
    ensure!(one.training_statistic() == vec![1.0], "one-class T");
    let fixed = train_enn_fixed(labeled(&[vec![0.0], vec![1.0]], &[0, 0], 1), 1).map_err(|e| e.to_string())?;
    ensure!(
        fixed.stats().classwise_statistic(1).map_err(|e| e.to_string())? == vec![1.0],
        "fixed T"
    );
    Ok(())
}

fn single_class() -> Result<(), String> {
    let inst = Instance::random(77, 40, 3, 1, 10);
    let model = train_enan(inst.dataset()).map_err(|e| e.to_string())?;
    ensure!(model.training_statistic() == vec![1.0], "T");
    let preds = model.predict(&inst.queries.concat()).map_err(|e| e.to_string())?;
    ensure!(preds.iter().all(|&p| p == 0), "prediction not forced");
    // A declared but absent class is never predicted.
    let ds = labeled(&inst.points, &inst.labels, 3);
    let model = train_enan(ds).map_err(|e| e.to_string())?;
    let preds = model.predict(&inst.queries.concat()).map_err(|e| e.to_string())?;
    ensure!(preds.iter().all(|&p| p == 0), "absent class predicted");
    Ok(())
}

fn outlier_query() -> Result<(), String> {
    let (pts, labels) = gaussian_pair(9, 30, 2, 3.0);
    let model = train_enan(labeled(&pts, &labels, 2)).map_err(|e| e.to_string())?;
    let z = [1e6, -1e6];
    let (count, k) = model.query_k(&z).map_err(|e| e.to_string())?;
    ensure!(count == 0 && k == model.lambda(), "count {count}, k {k}");
    let want = model
        .core()
        .enn_predict(&z, model.lambda())
        .map_err(|e| e.to_string())?;
    ensure!(
        model.predict_one(&z).map_err(|e| e.to_string())? == want,
        "fallback label"
    );
    Ok(())
}

fn duplicates() -> Result<(), String> {
    let mut pts = vec![vec![1.0, 1.0]; 6];
    pts.extend(vec![vec![4.0, 4.0]; 5]);
    pts.push(vec![1.0, 1.0]);
    let labels = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
    let model = train_enan(labeled(&pts, &labels, 2)).map_err(|e| e.to_string())?;
    let preds = model.predict(&[1.0, 1.0, 4.0, 4.0]).map_err(|e| e.to_string())?;
    ensure!(preds == vec![0, 1], "predictions {preds:?}");
    let all_same = train_enan(labeled(&vec![vec![2.0]; 5], &[0, 1, 0, 1, 0], 2)).map_err(|e| e.to_string())?;
    all_same.predict_one(&[2.0]).map_err(|e| e.to_string())?;
    Ok(())
}

fn constant_column() -> Result<(), String> {
    let (pts, labels) = gaussian_pair(10, 20, 2, 4.0);
    let pts: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], 7.0, p[1]]).collect();
    let ds = labeled(&pts, &labels, 2);
    let scaled = enan::data_io::minmax_normalize(&ds);
    ensure!(scaled.points().all(|p| p[1] == 0.0), "constant column not zero");
    let model = train_enan(scaled).map_err(|e| e.to_string())?;
    model.predict_one(&[0.5, 0.0, 0.5]).map_err(|e| e.to_string())?;
    Ok(())
}
