mod common;

use std::fs;

use common::bernoulli_graph;
use ldp_distance::analysis::UnreachablePolicy;
use ldp_distance::graph::{write_edge_list, Graph};
use ldp_distance::harness::{
    cmd_run, cmd_stats, cmd_sweep, write_records, ExperimentConfig, Method, TrialLabel, CSV_COLUMNS,
};

fn dataset_file(dir: &tempfile::TempDir, name: &str, g: &Graph) -> std::path::PathBuf {
    let path = dir.path().join(name);
    write_edge_list(g, fs::File::create(&path).unwrap(), Some("test graph")).unwrap();
    path
}

fn csv(records: &[ldp_distance::harness::ResultRecord]) -> String {
    let mut buf = Vec::new();
    write_records(records, &mut buf, false).unwrap();
    String::from_utf8(buf).unwrap()
}

/// 34 vertices, 474 edges: dense enough that graph aggregation works on the complement.
fn dense_social_graph() -> Graph {
    let n = 34;
    let pairs = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
    Graph::from_edges(n, pairs.take(474)).unwrap()
}

#[test]
fn noiseless_path_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        dataset: Some(dataset_file(&dir, "path.txt", &Graph::path(3))),
        method: Method::NeighAggRr,
        eps: Some(1e300),
        ..ExperimentConfig::default()
    };
    let (records, report) = cmd_run(&config).unwrap();
    assert_eq!((report.n, report.m), (3, 2));
    assert_eq!(records.len(), 1);
    assert_eq!((records[0].rmae, records[0].mre), (0.0, 0.0));
    assert_eq!(records[0].epsilon_total, 2e300);
}

#[test]
fn graph_aggregation_smoke_run_on_dense_graph() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        dataset: Some(dataset_file(&dir, "dense.txt", &dense_social_graph())),
        method: Method::GraphAggAnd,
        eps1: Some(0.8),
        repeats: 3,
        ..ExperimentConfig::default()
    };
    let (records, _) = cmd_run(&config).unwrap();
    for r in &records {
        assert!(r.rmae.is_finite() && r.mre.is_finite());
        assert!(r.gamma_bar.is_some() && r.gamma_hat.is_some() && r.p.is_some());
        assert!(r.alpha.is_none());
        assert!(r.runtime_ms.is_some());
        assert!(r.epsilon_total > 1.6);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    for method in Method::ALL {
        let config = ExperimentConfig {
            dataset: Some(dataset_file(&dir, "g.txt", &bernoulli_graph(60, 0.1, 70))),
            method,
            eps1: Some(1.0),
            eps2: Some(2.0),
            eps: Some(1.0),
            repeats: 5,
            seed: 9,
            timing: false,
            out: Some(out.clone()),
            ..ExperimentConfig::default()
        };
        cmd_run(&config).unwrap();
        let first = fs::read_to_string(&out).unwrap();
        cmd_run(&config).unwrap();
        assert_eq!(first, fs::read_to_string(&out).unwrap(), "{method}");
        assert_eq!(first.lines().count(), 6);
        assert_eq!(first.lines().next().unwrap(), CSV_COLUMNS.join(","));
    }
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        dataset: Some(dataset_file(&dir, "g.txt", &bernoulli_graph(50, 0.1, 71))),
        method: Method::NeighAggLaplace,
        eps: Some(0.5),
        repeats: 4,
        timing: false,
        ..ExperimentConfig::default()
    };
    let (run, _) = cmd_run(&config).unwrap();
    let (sweep, _) = cmd_sweep(&config, &[0.5], None).unwrap();
    assert_eq!(csv(&sweep[..4]), csv(&run));
    assert_eq!(sweep[4].trial, TrialLabel::Mean);
    assert_eq!(sweep[5].trial, TrialLabel::Sd);
}

#[test]
fn truth_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let config = ExperimentConfig {
        dataset: Some(dataset_file(&dir, "g.txt", &bernoulli_graph(40, 0.1, 72))),
        method: Method::Rnl,
        eps: Some(2.0),
        cache_dir: Some(cache.clone()),
        timing: false,
        ..ExperimentConfig::default()
    };
    let (first, _) = cmd_run(&config).unwrap();
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    let (second, _) = cmd_run(&config).unwrap();
    assert_eq!(first, second);
    let complemented = ExperimentConfig { complement: true, ..config };
    cmd_run(&complemented).unwrap();
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 2);
}

#[test]
fn unreachable_policy_changes_pair_set() {
    let dir = tempfile::tempdir().unwrap();
    let split = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
    let base = ExperimentConfig {
        dataset: Some(dataset_file(&dir, "split.txt", &split)),
        method: Method::NeighAggRr,
        eps: Some(f64::INFINITY),
        ..ExperimentConfig::default()
    };
    for policy in [UnreachablePolicy::Cap, UnreachablePolicy::Exclude] {
        let (records, _) = cmd_run(&ExperimentConfig { unreachable: policy, ..base.clone() }).unwrap();
        assert_eq!(records[0].rmae, 0.0, "{policy}");
    }
}

#[test]
fn errors_surface() {
    let dir = tempfile::tempdir().unwrap();
    let missing = ExperimentConfig {
        dataset: Some(dir.path().join("nope.txt")),
        eps: Some(1.0),
        ..ExperimentConfig::default()
    };
    assert!(cmd_run(&missing).is_err());
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 1\n1 x\n").unwrap();
    let err = cmd_run(&ExperimentConfig { dataset: Some(bad), ..missing.clone() }).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    // Calibration fails when the estimated density sits in [1/4, 1/2].
    let mid = dataset_file(&dir, "mid.txt", &bernoulli_graph(60, 0.35, 73));
    let config = ExperimentConfig {
        dataset: Some(mid),
        method: Method::GraphAggAnd,
        eps1: Some(f64::INFINITY),
        ..ExperimentConfig::default()
    };
    assert!(matches!(cmd_run(&config), Err(ldp_distance::Error::Calibration(_))));
}

#[test]
fn stats_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dataset_file(&dir, "star.txt", &Graph::star(6));
    let (stats, _) = cmd_stats(&path, Default::default()).unwrap();
    assert_eq!((stats.n, stats.m, stats.min_degree, stats.distinct_degrees), (6, 5, 1, 2));
    assert_eq!(stats.diameter, Some(2));
}
