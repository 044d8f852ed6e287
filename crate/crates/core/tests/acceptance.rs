//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The social-graph criteria read the edge list named by `LDP_FACEBOOK_EDGES`
//! (or `data/facebook_combined.txt` at the workspace root). Without it they
//! run on a generated stand-in of the same size and say so in their line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use ldp_distance::analysis::{
    min_laplace_expectation, simulate_y1, simulate_y2, summarize, MinLaplaceMethod, SimulationSpec,
    MIN_MONTE_CARLO_TRIALS,
};
use ldp_distance::graph::generate::{community_graph, gnp, CommunitySpec};
use ldp_distance::graph::{exact_all_pairs, read_edge_list_file, LoadOptions};
use ldp_distance::graph_agg::{
    aggregate_and, aggregate_and_or, alpha_for, epsilon2_for_density, run_graph_agg, run_rnl_baseline, NeighborBits,
    Variant,
};
use ldp_distance::harness::{run_trials, Dataset, ExperimentConfig, Method, ResultRecord};
use ldp_distance::mechanisms::{
    bit_flip_probability, budget_for_flip_probability, laplace_sample, noisy_degree, perturb_neighbor_bits,
    resample_probability, rr_bit, rr_distance, total_budget, Mechanism, PrivacyParams, Protocol, RngStream,
    StreamRole,
};
use ldp_distance::neigh_agg::run_neigh_agg;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn within_budget(start: Instant, limit: Duration) -> (bool, String) {
    let elapsed = start.elapsed();
    (elapsed < limit, format!("{:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn social_dataset() -> Dataset {
    let candidates = std::env::var_os("LDP_FACEBOOK_EDGES")
        .map(PathBuf::from)
        .into_iter()
        .chain([PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/facebook_combined.txt")]);
    for path in candidates {
        if path.is_file() {
            let (graph, _) = read_edge_list_file(&path, LoadOptions::default()).expect("edge list parses");
            return Dataset::from_graph("facebook", graph);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1034);
    let graph = community_graph(&CommunitySpec::social_ego_network(), &mut rng).unwrap().largest_component();
    Dataset::from_graph("stand-in", graph)
}

fn mean_of(records: &[ResultRecord], f: impl Fn(&ResultRecord) -> f64) -> f64 {
    mean(&records.iter().map(f).collect::<Vec<_>>())
}

fn naive_density_inflation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = gnp(500, 0.1, &mut rng).unwrap();
    let eps = budget_for_flip_probability(0.1).unwrap();
    let densities: Vec<f64> =
        (0..100).map(|t| run_rnl_baseline(&g, eps, &RngStream::new(101, t)).unwrap().gamma_bar).collect();
    let m = mean(&densities);
    let (fast, time) = within_budget(start, Duration::from_secs(60));
    outcome((m - 0.18).abs() <= 0.01 && fast, format!("mean density {m:.4} (gamma {:.4}), {time}", g.density().unwrap()))
}

fn calibrated_and_density() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = gnp(500, 0.1, &mut rng).unwrap();
    let gamma = g.density().unwrap();
    let params = PrivacyParams::graph(1.0, None);
    let densities: Vec<f64> = (0..50)
        .map(|t| run_graph_agg(&g, &params, Variant::AndOnly, &RngStream::new(102, t)).unwrap().gamma_bar)
        .collect();
    let rel = (mean(&densities) - gamma).abs() / gamma;
    let (fast, time) = within_budget(start, Duration::from_secs(120));
    outcome(rel < 0.05 && fast, format!("mean gamma_bar {:.4} vs gamma {gamma:.4}, rel err {rel:.4}, {time}", mean(&densities)))
}

fn and_or_degeneracy() -> Outcome {
    let mut worst = 0.0f64;
    let mut identical = true;
    for (i, gamma_hat) in [0.01, 0.05, 0.1, 0.15, 0.2, 0.24].into_iter().enumerate() {
        let eps2 = epsilon2_for_density(gamma_hat).unwrap();
        let p = bit_flip_probability(eps2);
        let alpha = alpha_for(gamma_hat, p).unwrap().alpha;
        worst = worst.max((alpha - 1.0).abs());
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let g = gnp(150, gamma_hat, &mut rng).unwrap();
        let root = RngStream::new(103, i as u64);
        let lists: Vec<NeighborBits> = (0..g.n())
            .map(|u| {
                let mut s = root.substream(StreamRole::NeighborReport, u as u64);
                perturb_neighbor_bits(&NeighborBits::from_graph(&g, u), eps2, &mut s)
            })
            .collect();
        identical &= aggregate_and_or(&lists, alpha, &mut root.curator()).unwrap() == aggregate_and(&lists).unwrap();
    }
    outcome(worst <= 1e-12 && identical, format!("max |alpha - 1| = {worst:e}, outputs identical: {identical}"))
}

fn noise_free_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for case in 0..200u64 {
        let n = rng.random_range(1..=64);
        let p = rng.random::<f64>().powi(2);
        let g = gnp(n, p, &mut rng).unwrap();
        for threshold in [3, 6, 9] {
            let truth = exact_all_pairs(&g, Some(threshold));
            for mechanism in [Mechanism::RandomizedResponse, Mechanism::Laplace] {
                let params = PrivacyParams::neighbor(f64::INFINITY, threshold, mechanism);
                if run_neigh_agg(&g, &params, &RngStream::from_seed(case)).unwrap() != truth {
                    mismatches += 1;
                }
            }
        }
    }
    let (fast, time) = within_budget(start, Duration::from_secs(60));
    outcome(mismatches == 0 && fast, format!("{mismatches} mismatching runs of 1200, {time}"))
}

fn simulator_trends() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (1..=8).map(f64::from).collect();
    let root = RngStream::from_seed(105);
    let mut y1_clamped = Vec::new();
    let mut y2 = Vec::new();
    for &eps in &grid {
        let spec = SimulationSpec::reference(eps);
        y1_clamped.push(summarize(&simulate_y1(&spec, &root).unwrap().clamped).mean);
        y2.push(summarize(&simulate_y2(&spec, &root).unwrap()).mean);
    }
    let y2_at_8 = y2[7];
    let band = (3.5..=4.5).contains(&y2_at_8);
    let y1_ok = y1_clamped.iter().all(|&m| m < 1.5);
    let drops: Vec<f64> = y2.windows(2).map(|w| w[0] - w[1]).filter(|&d| d > 0.0).collect();
    let monotone = drops.is_empty() || (drops.len() == 1 && drops[0] <= 0.05);
    let (fast, time) = within_budget(start, Duration::from_secs(300));
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    outcome(
        band && y1_ok && monotone && fast,
        format!(
            "Y2 mean at eps=8 {y2_at_8:.3} in [3.5,4.5]: {band}; Y1 clamped < 1.5: {y1_ok}; Y2 monotone: {monotone}; \
             Y2 means [{}]; Y1 clamped means [{}]; {time}",
            fmt(&y2),
            fmt(&y1_clamped)
        ),
    )
}

fn method_ordering(dataset: &Dataset) -> Outcome {
    let start = Instant::now();
    let base = ExperimentConfig { repeats: 10, seed: 106, threshold: 6, timing: false, ..ExperimentConfig::default() };
    let eps = 0.8;
    let run = |config: ExperimentConfig| run_trials(dataset, &config).unwrap();
    // Neighbor aggregation spends eps/2 per distance vector.
    let neigh = run(ExperimentConfig { method: Method::NeighAggRr, eps: Some(eps / 2.0), ..base.clone() });
    let graph = run(ExperimentConfig { method: Method::GraphAggAnd, eps1: Some(eps), ..base.clone() });
    let rnl = run(ExperimentConfig { method: Method::Rnl, eps: Some(eps), ..base });
    let (n_mre, g_mre, r_mre) = (mean_of(&neigh, |r| r.mre), mean_of(&graph, |r| r.mre), mean_of(&rnl, |r| r.mre));
    let ordered = n_mre < g_mre && g_mre < r_mre;
    let small = n_mre < 1e-2;
    let (fast, time) = within_budget(start, Duration::from_secs(900));
    outcome(
        ordered && small && fast,
        format!(
            "[{}] MRE neigh-agg-rr {n_mre:.3e}, graph-agg-and {g_mre:.3e}, rnl {r_mre:.3e}; ordered: {ordered}; \
             neigh-agg-rr < 1e-2: {small}; {time}",
            dataset.name
        ),
    )
}

fn threshold_trend(dataset: &Dataset) -> Outcome {
    let base = ExperimentConfig {
        method: Method::NeighAggRr,
        eps: Some(0.1 / 2.0),
        repeats: 5,
        seed: 107,
        timing: false,
        ..ExperimentConfig::default()
    };
    let rmae: Vec<f64> = (1..=8)
        .map(|threshold| mean_of(&run_trials(dataset, &ExperimentConfig { threshold, ..base.clone() }).unwrap(), |r| r.rmae))
        .collect();
    let rises = rmae.windows(2).filter(|w| w[1] > w[0]).count();
    outcome(
        rises <= 1,
        format!(
            "[{}] mean RMAE for T=1..8: [{}]; increases: {rises}",
            dataset.name,
            rmae.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn mechanism_statistics() -> Outcome {
    const N: usize = 1_000_000;
    let n = N as f64;
    let mut checks = Vec::new();

    let eps = 1.0;
    let mut rng = RngStream::new(108, 0);
    let flips = (0..N).filter(|_| !rr_bit(true, eps, &mut rng)).count() as f64 / n;
    let p = 1.0 / (1.0 + f64::exp(eps));
    checks.push(("rr_bit flip rate", flips, p, (p * (1.0 - p) / n).sqrt()));

    let (x, big_t) = (2u32, 6u32);
    let mut rng = RngStream::new(108, 1);
    let kept = (0..N).filter(|_| rr_distance(x, eps, big_t, &mut rng).unwrap() == x).count() as f64 / n;
    let q = resample_probability(eps, big_t);
    let keep = 1.0 - q + q / big_t as f64;
    checks.push(("rr_distance keep rate", kept, keep, (keep * (1.0 - keep) / n).sqrt()));

    let mut rng = RngStream::new(108, 2);
    let b = 2.0;
    let xs: Vec<f64> = (0..N).map(|_| laplace_sample(b, &mut rng).unwrap()).collect();
    let var = xs.iter().map(|x| x * x).sum::<f64>() / n - mean(&xs).powi(2);
    checks.push(("Laplace variance", var, 2.0 * b * b, (20.0 * b.powi(4) / n).sqrt()));

    let mut rng = RngStream::new(108, 3);
    let eps1 = 0.5;
    let ds: Vec<f64> = (0..N).map(|_| noisy_degree(40, eps1, &mut rng).unwrap() - 40.0).collect();
    let var = ds.iter().map(|x| x * x).sum::<f64>() / n - mean(&ds).powi(2);
    let s = 2.0 / eps1;
    checks.push(("noisy_degree variance", var, 2.0 * s * s, (20.0 * s.powi(4) / n).sqrt()));

    let pass = checks.iter().all(|&(_, got, want, se)| (got - want).abs() <= 3.0 * se);
    let detail = checks
        .iter()
        .map(|(name, got, want, se)| format!("{name} {got:.5} vs {want:.5} ({:+.2} se)", (got - want) / se))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn min_laplace_oracle() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2usize, 3, 5, 10] {
        let exact = min_laplace_expectation(n, 1.0, MinLaplaceMethod::ExactSeries).unwrap().value;
        let method = MinLaplaceMethod::MonteCarlo { trials: MIN_MONTE_CARLO_TRIALS, seed: 109 };
        let sampled = min_laplace_expectation(n, 1.0, method).unwrap();
        let se = sampled.std_error.unwrap();
        let closed = min_laplace_expectation(n, 1.0, MinLaplaceMethod::PaperClosedForm).unwrap().value;
        pass &= (sampled.value - exact).abs() <= 3.0 * se;
        parts.push(format!("n={n} exact {exact:.4} mc {:.4}±{se:.4} closed-form {closed:.4}", sampled.value));
    }
    outcome(pass, parts.join("; "))
}

fn privacy_accounting() -> Outcome {
    let grid = [0.05, 0.1, 0.2, 0.4, 0.8, 1.0, 2.0, 4.0, 8.0];
    let mut checked = 0;
    let mut pass = true;
    for &a in &grid {
        for &b in &grid {
            pass &= total_budget(Protocol::GraphAgg, &PrivacyParams::graph(a, Some(b))).unwrap() == 2.0 * (a + b);
            checked += 1;
        }
        let params = PrivacyParams::neighbor(a, 6, Mechanism::RandomizedResponse);
        pass &= total_budget(Protocol::NeighAgg, &params).unwrap() == 2.0 * a;
        checked += 1;
    }
    outcome(pass, format!("{checked} grid points exact"))
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let dataset = std::cell::OnceCell::new();
    let social = || dataset.get_or_init(social_dataset);
    let criteria: Vec<(&str, Check)> = vec![
        ("naive-rr-density-inflation", Box::new(naive_density_inflation)),
        ("calibrated-and-density", Box::new(calibrated_and_density)),
        ("and-or-degeneracy", Box::new(and_or_degeneracy)),
        ("noise-free-equivalence", Box::new(noise_free_equivalence)),
        ("simulator-trends", Box::new(simulator_trends)),
        ("method-ordering", Box::new(|| method_ordering(social()))),
        ("threshold-trend", Box::new(|| threshold_trend(social()))),
        ("mechanism-statistics", Box::new(mechanism_statistics)),
        ("min-laplace-oracle", Box::new(min_laplace_oracle)),
        ("privacy-accounting", Box::new(privacy_accounting)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| outcome(false, "panicked".to_string()));
        if !result.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
