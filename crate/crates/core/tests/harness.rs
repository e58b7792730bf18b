mod common;

use std::fs;

use common::*;
use enan::classification::{train_enan, KChoice};
use enan::data_io::stratified_kfold;
use enan::harness::{
    benchmark_datasets, evaluate_cell, export_nan_artifacts, format_cell, sweep_k, Method, Protocol, SweepMethod,
};

fn separable() -> enan::data_io::Dataset {
    let (pts, labels) = gaussian_pair(1, 40, 2, 40.0);
    labeled(&pts, &labels, 2)
}

fn all_methods() -> Vec<Method> {
    let mut m = Method::default_grid();
    m.push(Method::Knn(KChoice::Fixed(3)));
    m
}

#[test]
fn separable_data_scores_perfectly() {
    let protocol = Protocol {
        methods: all_methods(),
        ..Protocol::default()
    };
    let report = benchmark_datasets(vec![separable()], &protocol).unwrap();
    for method in all_methods() {
        assert_eq!(report.cell("labeled", method), Some((100.0, 0.0)));
    }
    assert!(report.render_text_body().contains("100.00±0.00%"));
}

#[test]
fn report_bodies_are_deterministic() {
    let protocol = Protocol::default();
    let a = benchmark_datasets(vec![iris()], &protocol).unwrap();
    let b = benchmark_datasets(vec![iris()], &protocol).unwrap();
    assert_eq!(a.render_text_body(), b.render_text_body());
    assert_eq!(a.render_csv(), b.render_csv());
    let mean = a.cell("iris", Method::Enan).unwrap().0;
    assert!((90.0..=99.0).contains(&mean), "{mean}");
}

#[test]
fn overall_row_is_the_column_mean() {
    let mut wine_like = separable();
    wine_like.set_name("sep");
    let report = benchmark_datasets(vec![iris(), wine_like], &Protocol::default()).unwrap();
    for (j, method) in report.methods().iter().enumerate() {
        let a = report.cell("iris", *method).unwrap();
        let b = report.cell("sep", *method).unwrap();
        let (m, s) = report.overall()[j].unwrap();
        assert!((m - (a.0 + b.0) / 2.0).abs() < 1e-12);
        assert!((s - (a.1 + b.1) / 2.0).abs() < 1e-12);
    }
    let text = report.render_text_body();
    let data_rows = text
        .lines()
        .filter(|l| l.starts_with("iris") || l.starts_with("sep"))
        .count();
    assert_eq!(data_rows, 2);
    assert!(text.lines().any(|l| l.starts_with("OVERALL")));
}

#[test]
fn dumps_reproduce_every_cell() {
    let report = benchmark_datasets(vec![iris()], &Protocol::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    report.write_to_dir(dir.path()).unwrap();
    for method in report.methods() {
        let mut accs = Vec::new();
        for fold in 0..10 {
            let text = fs::read_to_string(
                dir.path()
                    .join(format!("predictions_iris_{}_{fold}.csv", method.slug())),
            )
            .unwrap();
            let rows: Vec<&str> = text.lines().skip(1).collect();
            let correct = rows
                .iter()
                .filter(|r| {
                    let f: Vec<&str> = r.split(',').collect();
                    f[1] == f[2]
                })
                .count();
            accs.push(100.0 * correct as f64 / rows.len() as f64);
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        let (cell, _) = report.cell("iris", *method).unwrap();
        assert_eq!(format_cell(mean, 0.0)[..5], format_cell(cell, 0.0)[..5]);
        assert!((mean - cell).abs() < 1e-9);
    }
    for name in ["report.txt", "report.csv", "timing.csv", "folds_iris.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn failing_cell_is_marked_not_fatal() {
    // Five points in two folds leave training splits of 2-3 points, too few
    // for k = 5.
    let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
    let ds = labeled(&pts, &[0, 0, 1, 1, 0], 2);
    let protocol = Protocol {
        methods: vec![Method::Enn(KChoice::Fixed(5)), Method::Enn(KChoice::Fixed(1))],
        n_folds: 2,
        ..Protocol::default()
    };
    let report = benchmark_datasets(vec![ds], &protocol).unwrap();
    let cells = &report.datasets[0].cells;
    assert!(!cells[0].is_valid());
    assert!(cells[1].is_valid());
    assert!(report.render_text_body().contains("invalid"));
    assert_eq!(report.overall()[0], None);
}

#[test]
fn sweep_at_one_matches_the_bench_cell() {
    let ds = iris();
    let sweep = sweep_k(&ds, SweepMethod::Knn, &[1], 10, 0, false).unwrap();
    let plan = stratified_kfold(&ds, 10, 0).unwrap();
    let cell = evaluate_cell(&ds, &plan, Method::Knn(KChoice::Fixed(1)), false);
    assert_eq!(sweep.rows[0].mean, cell.mean().unwrap());
    assert_eq!(sweep.rows[0].std, cell.std().unwrap());
}

#[test]
fn sweep_series_shapes() {
    let flat = sweep_k(&separable(), SweepMethod::Enn, &[1, 2, 3], 5, 0, false).unwrap();
    assert!(flat.rows.iter().all(|r| r.mean == 100.0));

    let ks: Vec<usize> = (1..=25).collect();
    let series = sweep_k(&iris(), SweepMethod::Enn, &ks, 10, 0, false).unwrap();
    let means: Vec<f64> = series.rows.iter().map(|r| r.mean).collect();
    let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 0.0);
    let csv = series.to_csv();
    assert!(csv.starts_with('#') && csv.contains("cross-validation"));
    assert_eq!(csv.lines().nth(1), Some("k,mean,std"));
    assert_eq!(csv.lines().count(), 27);

    assert!(sweep_k(&iris(), SweepMethod::Knn, &[135], 10, 0, false).is_err());
    assert!(sweep_k(&iris(), SweepMethod::Knn, &[], 10, 0, false).is_err());
}

#[test]
fn export_two_point_model() {
    let ds = labeled(&[vec![0.0, 0.0], vec![3.0, 4.0]], &[0, 1], 2);
    let model = train_enan(ds).unwrap();
    let dir = tempfile::tempdir().unwrap();
    export_nan_artifacts(&model, dir.path()).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("nan_edges.txt")).unwrap(), "0 1 5\n");
    assert_eq!(
        fs::read_to_string(dir.path().join("nan_counts.txt")).unwrap(),
        "0 1\n1 1\n"
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("nan_meta.txt")).unwrap(),
        "lambda 1\n"
    );
}

#[test]
fn exported_counts_agree_with_edges() {
    let model = train_enan(iris()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    export_nan_artifacts(&model, dir.path()).unwrap();
    let counts = fs::read_to_string(dir.path().join("nan_counts.txt")).unwrap();
    let edges = fs::read_to_string(dir.path().join("nan_edges.txt")).unwrap();
    assert_eq!(counts.lines().count(), 150);
    let total: usize = counts
        .lines()
        .map(|l| l.split_whitespace().nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 2 * edges.lines().count());
}
