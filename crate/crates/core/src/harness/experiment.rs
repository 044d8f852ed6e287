use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{truth_cache_key, TruthCache};
use crate::analysis::{evaluate, summarize, UnreachablePolicy};
use crate::error::{Error, Result};
use crate::graph::{exact_all_pairs, load_edge_list, DistanceMatrix, Graph, IngestReport, LoadOptions};
use crate::graph_agg::{run_graph_agg, run_rnl_baseline, SyntheticGraph, Variant};
use crate::mechanisms::{
    check_budget, total_budget, Mechanism, PrivacyParams, Protocol, RngStream, StreamRole, DEFAULT_THRESHOLD,
};
use crate::neigh_agg::{diameter_upper_bound, run_neigh_agg, DEFAULT_DIAMETER_SLACK};

pub const CSV_COLUMNS: [&str; 13] = [
    "dataset",
    "method",
    "epsilon_total",
    "T",
    "seed",
    "trial",
    "rmae",
    "mre",
    "runtime_ms",
    "gamma_hat",
    "gamma_bar",
    "p",
    "alpha",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GraphAggAnd,
    GraphAggAndOr,
    Rnl,
    NeighAggLaplace,
    #[default]
    NeighAggRr,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::GraphAggAnd, Method::GraphAggAndOr, Method::Rnl, Method::NeighAggLaplace, Method::NeighAggRr];

    pub fn name(self) -> &'static str {
        match self {
            Method::GraphAggAnd => "graph-agg-and",
            Method::GraphAggAndOr => "graph-agg-and-or",
            Method::Rnl => "rnl",
            Method::NeighAggLaplace => "neigh-agg-laplace",
            Method::NeighAggRr => "neigh-agg-rr",
        }
    }

    /// Whether the method produces a synthetic graph rather than distances.
    pub fn is_graph_based(self) -> bool {
        matches!(self, Method::GraphAggAnd | Method::GraphAggAndOr | Method::Rnl)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            Error::Config(format!("unknown method {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

/// Everything one `run` needs. Missing budgets are an error only for the
/// methods that use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    /// Label written to the `dataset` column; defaults to the file stem.
    pub dataset_name: Option<String>,
    pub directed: bool,
    pub complement: bool,
    pub largest_component: bool,
    pub method: Method,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub eps: Option<f64>,
    #[serde(rename = "T")]
    pub threshold: u32,
    pub seed: u64,
    pub repeats: usize,
    pub unreachable: UnreachablePolicy,
    pub out: Option<PathBuf>,
    /// Fill the `runtime_ms` column.
    pub timing: bool,
    /// Where exact distance matrices are cached; no caching when unset.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            dataset_name: None,
            directed: false,
            complement: false,
            largest_component: false,
            method: Method::default(),
            eps1: None,
            eps2: None,
            eps: None,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            repeats: 1,
            unreachable: UnreachablePolicy::default(),
            out: None,
            timing: true,
            cache_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().replace('\n', " ")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            directed: self.directed,
            take_complement: self.complement,
            largest_component: self.largest_component,
        }
    }

    /// Checks repeats, `T` and the budgets the chosen method reads.
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        self.privacy_params().check_threshold()?;
        for (name, value) in [("eps1", self.eps1), ("eps2", self.eps2), ("eps", self.eps)] {
            if let Some(v) = value {
                check_budget(name, v)?;
            }
        }
        let need = |name: &str, value: Option<f64>| {
            value.map(|_| ()).ok_or_else(|| Error::Config(format!("method {} needs --{name}", self.method)))
        };
        match self.method {
            Method::GraphAggAnd => need("eps1", self.eps1),
            Method::GraphAggAndOr => need("eps1", self.eps1).and(need("eps2", self.eps2)),
            Method::Rnl | Method::NeighAggLaplace | Method::NeighAggRr => need("eps", self.eps),
        }
    }

    pub fn privacy_params(&self) -> PrivacyParams {
        let mechanism = match self.method {
            Method::NeighAggLaplace => Mechanism::Laplace,
            _ => Mechanism::RandomizedResponse,
        };
        PrivacyParams { eps1: self.eps1, eps2: self.eps2, eps: self.eps, threshold: self.threshold, mechanism }
    }

    /// Sets the budget a sweep varies: `eps1` for graph aggregation, `eps`
    /// for the baseline and neighbor aggregation.
    pub fn with_primary_budget(&self, value: f64) -> Self {
        let mut next = self.clone();
        match self.method {
            Method::GraphAggAnd | Method::GraphAggAndOr => next.eps1 = Some(value),
            _ => next.eps = Some(value),
        }
        next
    }

    fn dataset_label(&self) -> String {
        self.dataset_name.clone().unwrap_or_else(|| {
            self.dataset
                .as_deref()
                .and_then(Path::file_stem)
                .map_or_else(|| "graph".to_string(), |s| s.to_string_lossy().into_owned())
        })
    }
}

/// A loaded graph and its exact distances (unreachable pairs are infinite).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub truth: DistanceMatrix,
}

impl Dataset {
    pub fn from_graph(name: impl Into<String>, graph: Graph) -> Self {
        let truth = exact_all_pairs(&graph, None);
        Self { name: name.into(), graph, truth }
    }
}

/// Loads `config.dataset`, using the truth cache when one is configured.
pub fn load_dataset(config: &ExperimentConfig) -> Result<(Dataset, IngestReport)> {
    let path = config.dataset.as_deref().ok_or_else(|| Error::Config("no dataset given".into()))?;
    let bytes = fs::read(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let options = config.load_options();
    let (graph, report) = load_edge_list(bytes.as_slice(), options)?;
    let truth = match &config.cache_dir {
        Some(dir) => TruthCache::new(dir).load_or_compute(&truth_cache_key(&bytes, options), &graph)?,
        None => exact_all_pairs(&graph, None),
    };
    Ok((Dataset { name: config.dataset_label(), graph, truth }, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialLabel {
    Index(usize),
    Mean,
    Sd,
}

impl fmt::Display for TrialLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialLabel::Index(k) => write!(f, "{k}"),
            TrialLabel::Mean => f.write_str("mean"),
            TrialLabel::Sd => f.write_str("sd"),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub dataset: String,
    pub method: Method,
    pub epsilon_total: f64,
    pub threshold: u32,
    pub seed: u64,
    pub trial: TrialLabel,
    pub rmae: f64,
    pub mre: f64,
    pub runtime_ms: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub gamma_bar: Option<f64>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
}

/// Shortest round-trip decimal, switching to exponent form for very large
/// or very small magnitudes.
pub(crate) fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

impl ResultRecord {
    fn fields(&self, timing: bool) -> [String; 13] {
        let opt = |v: Option<f64>| v.map_or_else(String::new, format_float);
        [
            self.dataset.clone(),
            self.method.to_string(),
            format_float(self.epsilon_total),
            self.threshold.to_string(),
            self.seed.to_string(),
            self.trial.to_string(),
            format_float(self.rmae),
            format_float(self.mre),
            if timing { opt(self.runtime_ms) } else { String::new() },
            opt(self.gamma_hat),
            opt(self.gamma_bar),
            opt(self.p),
            opt(self.alpha),
        ]
    }
}

/// Writes the header and one line per record. With `timing` off the
/// `runtime_ms` column is left empty so reruns are byte-identical.
pub fn write_records<W: Write>(records: &[ResultRecord], out: W, timing: bool) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_COLUMNS)?;
    for record in records {
        writer.write_record(record.fields(timing))?;
    }
    writer.flush()?;
    Ok(())
}

/// Estimated distances of one method run, plus the accounting it implies.
pub struct MethodOutput {
    pub estimate: DistanceMatrix,
    pub epsilon_total: f64,
    pub synthetic: Option<SyntheticGraph>,
}

/// Runs `config.method` once on `graph` with the given root stream.
pub fn run_method(graph: &Graph, config: &ExperimentConfig, rng: &RngStream) -> Result<MethodOutput> {
    let params = config.privacy_params();
    let graph_output = |synthetic: SyntheticGraph, epsilon_total: f64| MethodOutput {
        estimate: exact_all_pairs(&synthetic.graph, None),
        epsilon_total,
        synthetic: Some(synthetic),
    };
    match config.method {
        Method::GraphAggAnd | Method::GraphAggAndOr => {
            let variant = if config.method == Method::GraphAggAnd { Variant::AndOnly } else { Variant::AndOr };
            let synthetic = run_graph_agg(graph, &params, variant, rng)?;
            let used = PrivacyParams { eps2: Some(synthetic.calibration.eps2), ..params };
            let total = total_budget(Protocol::GraphAgg, &used)?;
            Ok(graph_output(synthetic, total))
        }
        Method::Rnl => {
            // Each edge is reported once, by its lower endpoint.
            let eps = params.eps()?;
            Ok(graph_output(run_rnl_baseline(graph, eps, rng)?, eps))
        }
        Method::NeighAggLaplace | Method::NeighAggRr => Ok(MethodOutput {
            estimate: run_neigh_agg(graph, &params, rng)?,
            epsilon_total: total_budget(Protocol::NeighAgg, &params)?,
            synthetic: None,
        }),
    }
}

/// `config.repeats` independent trials on an already loaded dataset. Trial
/// `k` uses the sub-stream `(Trial, k)` of `config.seed`.
pub fn run_trials(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let root = RngStream::from_seed(config.seed);
    let cap = config.threshold as f64;
    (0..config.repeats)
        .into_par_iter()
        .map(|k| {
            let start = Instant::now();
            let output = run_method(&dataset.graph, config, &root.substream(StreamRole::Trial, k as u64))?;
            let report = evaluate(&dataset.truth, &output.estimate, cap, config.unreachable)?;
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let synthetic = output.synthetic.as_ref();
            Ok(ResultRecord {
                dataset: dataset.name.clone(),
                method: config.method,
                epsilon_total: output.epsilon_total,
                threshold: config.threshold,
                seed: config.seed,
                trial: TrialLabel::Index(k),
                rmae: report.rmae,
                mre: report.mre,
                runtime_ms: config.timing.then_some(runtime_ms),
                gamma_hat: synthetic.and_then(|s| s.gamma_hat),
                gamma_bar: synthetic.map(|s| s.gamma_bar),
                p: synthetic.map(|s| s.calibration.p),
                alpha: synthetic.and_then(|s| s.calibration.alpha),
            })
        })
        .collect()
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let s = summarize(values);
    (s.mean, s.sd)
}

fn summary_rows(trials: &[ResultRecord]) -> [ResultRecord; 2] {
    let column = |f: &dyn Fn(&ResultRecord) -> f64| mean_sd(&trials.iter().map(f).collect::<Vec<_>>());
    let optional = |f: &dyn Fn(&ResultRecord) -> Option<f64>| {
        let values: Option<Vec<f64>> = trials.iter().map(f).collect();
        values.map(|v| mean_sd(&v))
    };
    let eps = column(&|r| r.epsilon_total);
    let rmae = column(&|r| r.rmae);
    let mre = column(&|r| r.mre);
    let runtime = optional(&|r| r.runtime_ms);
    let gamma_hat = optional(&|r| r.gamma_hat);
    let gamma_bar = optional(&|r| r.gamma_bar);
    let p = optional(&|r| r.p);
    let alpha = optional(&|r| r.alpha);
    let pick = |which: usize, label: TrialLabel| {
        let get = |pair: (f64, f64)| if which == 0 { pair.0 } else { pair.1 };
        ResultRecord {
            trial: label,
            // The budget column identifies the cell, so both rows carry its mean.
            epsilon_total: eps.0,
            rmae: get(rmae),
            mre: get(mre),
            runtime_ms: runtime.map(get),
            gamma_hat: gamma_hat.map(get),
            gamma_bar: gamma_bar.map(get),
            p: p.map(get),
            alpha: alpha.map(get),
            ..trials[0].clone()
        }
    };
    [pick(0, TrialLabel::Mean), pick(1, TrialLabel::Sd)]
}

fn write_out(config: &ExperimentConfig, records: &[ResultRecord]) -> Result<()> {
    if let Some(path) = &config.out {
        write_records(records, fs::File::create(path)?, config.timing)?;
    }
    Ok(())
}

/// Loads the dataset, runs every trial and writes `config.out` if set.
pub fn cmd_run(config: &ExperimentConfig) -> Result<(Vec<ResultRecord>, IngestReport)> {
    config.validate()?;
    let (dataset, report) = load_dataset(config)?;
    let records = run_trials(&dataset, config)?;
    write_out(config, &records)?;
    Ok((records, report))
}

/// Every (budget, T) cell on an already loaded dataset. Each cell yields its
/// trial rows followed by a `mean` and an `sd` row, cells in grid order.
pub fn sweep_dataset(
    dataset: &Dataset,
    config: &ExperimentConfig,
    budget_grid: &[f64],
    t_grid: Option<&[u32]>,
) -> Result<Vec<ResultRecord>> {
    if budget_grid.is_empty() || t_grid.is_some_and(<[u32]>::is_empty) {
        return Err(Error::Config("sweep grids must be non-empty".into()));
    }
    let thresholds = t_grid.map_or_else(|| vec![config.threshold], <[u32]>::to_vec);
    let mut records = Vec::new();
    for &budget in budget_grid {
        for &threshold in &thresholds {
            let cell = ExperimentConfig { threshold, ..config.with_primary_budget(budget) };
            let trials = run_trials(dataset, &cell)?;
            let summary = summary_rows(&trials);
            records.extend(trials);
            records.extend(summary);
        }
    }
    Ok(records)
}

/// [`sweep_dataset`] on `config.dataset`, writing `config.out` if set.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    budget_grid: &[f64],
    t_grid: Option<&[u32]>,
) -> Result<(Vec<ResultRecord>, IngestReport)> {
    let (dataset, report) = load_dataset(config)?;
    let records = sweep_dataset(&dataset, config, budget_grid, t_grid)?;
    write_out(config, &records)?;
    Ok((records, report))
}

/// Size, density and the quantities the neighbor protocol's round count
/// depends on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub min_degree: usize,
    pub distinct_degrees: usize,
    pub diameter_bound: u32,
    pub components: usize,
    /// Exact diameter of a connected graph.
    pub diameter: Option<u32>,
}

impl DatasetStats {
    pub fn of(graph: &Graph) -> Result<Self> {
        let components = graph.components().into_iter().max().map_or(0, |c| c + 1);
        let diameter = if graph.is_connected() {
            let d = exact_all_pairs(graph, None);
            Some(d.off_diagonal().map(|(_, _, x)| x as u32).max().unwrap_or(0))
        } else {
            None
        };
        Ok(Self {
            n: graph.n(),
            m: graph.m(),
            density: graph.density()?,
            min_degree: graph.min_degree(),
            distinct_degrees: graph.distinct_degree_count(),
            diameter_bound: diameter_upper_bound(graph, DEFAULT_DIAMETER_SLACK)?,
            components,
            diameter,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.serialize(self)?;
        writer.flush()?;
        Ok(())
    }
}

pub fn cmd_stats(path: &Path, options: LoadOptions) -> Result<(DatasetStats, IngestReport)> {
    let bytes = fs::read(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let (graph, report) = load_edge_list(bytes.as_slice(), options)?;
    Ok((DatasetStats::of(&graph)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_dataset() -> Dataset {
        Dataset::from_graph("path", Graph::path(3))
    }

    fn config(method: Method) -> ExperimentConfig {
        ExperimentConfig { method, eps: Some(f64::INFINITY), timing: false, ..ExperimentConfig::default() }
    }

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(2e300), "2e300");
        assert_eq!(format_float(1.25e-16), "1.25e-16");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("neighagg".parse::<Method>().is_err());
    }

    #[test]
    fn noiseless_neighbor_run_is_exact() {
        let records = run_trials(&path_dataset(), &config(Method::NeighAggRr)).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].rmae, 0.0);
        assert_eq!(records[0].mre, 0.0);
        assert!(records[0].gamma_bar.is_none());
    }

    #[test]
    fn missing_budget_is_a_config_error() {
        let cfg = ExperimentConfig { method: Method::GraphAggAndOr, eps1: Some(1.0), ..ExperimentConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let zero = ExperimentConfig { repeats: 0, ..config(Method::Rnl) };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn csv_has_fixed_header_and_empty_optionals() {
        let records = run_trials(&path_dataset(), &config(Method::NeighAggRr)).unwrap();
        let mut buf = Vec::new();
        write_records(&records, &mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "path,neigh-agg-rr,inf,6,0,0,0,0,,,,,");
    }

    #[test]
    fn sweep_appends_summary_rows_in_grid_order() {
        let cfg = ExperimentConfig { repeats: 2, ..config(Method::NeighAggRr) };
        let rows = sweep_dataset(&path_dataset(), &cfg, &[1.0, 2.0], Some(&[3, 4])).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 4);
        let labels: Vec<String> = rows[..4].iter().map(|r| r.trial.to_string()).collect();
        assert_eq!(labels, ["0", "1", "mean", "sd"]);
        assert_eq!(rows[4].threshold, 4);
        assert_eq!(rows[8].epsilon_total, 4.0);
        assert!(sweep_dataset(&path_dataset(), &cfg, &[], None).is_err());
    }

    #[test]
    fn toml_config_parses() {
        let cfg = ExperimentConfig::from_toml_str(
            "dataset = \"g.txt\"\nmethod = \"graph-agg-and\"\neps1 = 0.8\nT = 5\nrepeats = 3\nunreachable = \"exclude\"\n",
        )
        .unwrap();
        assert_eq!(cfg.method, Method::GraphAggAnd);
        assert_eq!(cfg.threshold, 5);
        assert_eq!(cfg.unreachable, UnreachablePolicy::Exclude);
        assert_eq!(cfg.dataset_label(), "g");
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn stats_of_a_path() {
        let stats = DatasetStats::of(&Graph::path(5)).unwrap();
        assert_eq!((stats.n, stats.m, stats.min_degree, stats.distinct_degrees), (5, 4, 1, 2));
        assert_eq!(stats.diameter, Some(4));
        assert_eq!(stats.components, 1);
        assert!(stats.diameter_bound >= 4);
    }
}
