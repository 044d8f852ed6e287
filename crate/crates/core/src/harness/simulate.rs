use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    min_laplace_expectation, simulate_y1, simulate_y2, summarize, HistogramSpec, MinLaplaceMethod, SimulationSpec,
    Summary, MIN_MONTE_CARLO_TRIALS,
};
use crate::error::{Error, Result};
use crate::mechanisms::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    Y1,
    #[default]
    Y2,
    MinLaplace,
}

impl fmt::Display for SimulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimulationMode::Y1 => "y1",
            SimulationMode::Y2 => "y2",
            SimulationMode::MinLaplace => "min-laplace",
        })
    }
}

impl FromStr for SimulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "y1" => Ok(SimulationMode::Y1),
            "y2" => Ok(SimulationMode::Y2),
            "min-laplace" | "minlaplace" => Ok(SimulationMode::MinLaplace),
            _ => Err(Error::Config(format!("unknown simulation mode {s:?} (y1|y2|min-laplace)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub mode: SimulationMode,
    pub n: usize,
    pub t: u32,
    #[serde(rename = "T")]
    pub threshold: u32,
    pub repeats: usize,
    pub eps_grid: Vec<f64>,
    pub seed: u64,
    pub histogram: HistogramSpec,
    /// Variable counts for the min-Laplace table.
    pub min_laplace_n: Vec<usize>,
    pub laplace_scale: f64,
    pub monte_carlo_trials: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let reference = SimulationSpec::reference(1.0);
        Self {
            mode: SimulationMode::default(),
            n: reference.n,
            t: reference.t,
            threshold: reference.threshold,
            repeats: reference.repeats,
            eps_grid: (1..=8).map(f64::from).collect(),
            seed: 0,
            histogram: HistogramSpec::Uniform,
            min_laplace_n: vec![2, 3, 5],
            laplace_scale: 1.0,
            monte_carlo_trials: MIN_MONTE_CARLO_TRIALS,
        }
    }
}

impl SimulateConfig {
    pub fn spec(&self, eps: f64) -> SimulationSpec {
        SimulationSpec {
            n: self.n,
            t: self.t,
            threshold: self.threshold,
            eps,
            repeats: self.repeats,
            histogram: self.histogram.clone(),
        }
    }
}

/// Summary of one simulated variable at one budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub variable: &'static str,
    pub eps: f64,
    pub n: usize,
    pub t: u32,
    #[serde(rename = "T")]
    pub threshold: u32,
    pub seed: u64,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub p05: f64,
    pub p95: f64,
}

impl SimulationRow {
    pub fn summary(&self) -> Summary {
        Summary { count: self.count, mean: self.mean, sd: self.sd, p05: self.p05, p95: self.p95 }
    }
}

/// The three ways of computing `E[min of n Laplace(0, b)]`, side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinLaplaceRow {
    pub n: usize,
    pub b: f64,
    pub exact: f64,
    pub monte_carlo: f64,
    pub monte_carlo_se: f64,
    /// Empty where the closed form is undefined (`n = 1`).
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulationOutput {
    Variables(Vec<SimulationRow>),
    MinLaplace(Vec<MinLaplaceRow>),
}

impl SimulationOutput {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        match self {
            SimulationOutput::Variables(rows) => rows.iter().try_for_each(|r| writer.serialize(r))?,
            SimulationOutput::MinLaplace(rows) => rows.iter().try_for_each(|r| writer.serialize(r))?,
        }
        writer.flush()?;
        Ok(())
    }
}

/// Runs the chosen simulator over the budget grid (or the `n` list for
/// min-Laplace). Each budget uses the same seed so rows differ only by `ε`.
pub fn cmd_simulate(config: &SimulateConfig) -> Result<SimulationOutput> {
    let root = RngStream::from_seed(config.seed);
    match config.mode {
        SimulationMode::Y1 | SimulationMode::Y2 => {
            if config.eps_grid.is_empty() {
                return Err(Error::Config("eps grid must be non-empty".into()));
            }
            let mut rows = Vec::new();
            for &eps in &config.eps_grid {
                let spec = config.spec(eps);
                spec.validate()?;
                let row = |variable, samples: &[f64]| {
                    let s = summarize(samples);
                    SimulationRow {
                        variable,
                        eps,
                        n: spec.n,
                        t: spec.t,
                        threshold: spec.threshold,
                        seed: config.seed,
                        count: s.count,
                        mean: s.mean,
                        sd: s.sd,
                        p05: s.p05,
                        p95: s.p95,
                    }
                };
                if config.mode == SimulationMode::Y1 {
                    let samples = simulate_y1(&spec, &root)?;
                    rows.push(row("y1_raw", &samples.raw));
                    rows.push(row("y1_clamped", &samples.clamped));
                } else {
                    rows.push(row("y2", &simulate_y2(&spec, &root)?));
                }
            }
            Ok(SimulationOutput::Variables(rows))
        }
        SimulationMode::MinLaplace => {
            if config.min_laplace_n.is_empty() {
                return Err(Error::Config("min-laplace needs at least one n".into()));
            }
            let b = config.laplace_scale;
            let rows = config
                .min_laplace_n
                .iter()
                .map(|&n| {
                    let exact = min_laplace_expectation(n, b, MinLaplaceMethod::ExactSeries)?;
                    let method = MinLaplaceMethod::MonteCarlo { trials: config.monte_carlo_trials, seed: config.seed };
                    let sampled = min_laplace_expectation(n, b, method)?;
                    let closed = (n > 1)
                        .then(|| min_laplace_expectation(n, b, MinLaplaceMethod::PaperClosedForm))
                        .transpose()?;
                    Ok(MinLaplaceRow {
                        n,
                        b,
                        exact: exact.value,
                        monte_carlo: sampled.value,
                        monte_carlo_se: sampled.std_error.unwrap_or(0.0),
                        closed_form: closed.map(|e| e.value),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SimulationOutput::MinLaplace(rows))
        }
    }
}
