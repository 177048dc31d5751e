//! The two function-fitting experiments: fit `x^2` or `sqrt(x)` from three
//! points by early-stopped annealing, then refine with hidden-layer noise and
//! compare errors on a 32-point grid.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::annealing::{anneal, AnnealingSchedule};
use crate::error::{Error, Result};
use crate::network::{Network, TrainingSet, WeightBounds, DEFAULT_LAYER_SIZES};
use crate::prng::Prng;
use crate::refine::{refine, NoiseSpec, Objective, RefinementTrace};

pub const DEFAULT_GRID_SIZE: usize = 32;
pub const DEFAULT_NOISE_LEVELS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetFunction {
    Square,
    Sqrt,
}

impl TargetFunction {
    pub const ALL: [TargetFunction; 2] = [TargetFunction::Square, TargetFunction::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            TargetFunction::Square => "square",
            TargetFunction::Sqrt => "sqrt",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            TargetFunction::Square => x * x,
            TargetFunction::Sqrt => x.sqrt(),
        }
    }

    /// Weight space used for each experiment.
    pub fn default_bounds(self) -> WeightBounds {
        let half = match self {
            TargetFunction::Square => 12.0,
            TargetFunction::Sqrt => 1.0,
        };
        WeightBounds::symmetric(half).expect("static bounds are valid")
    }

    /// The three training points, verbatim (the sqrt targets are rounded to
    /// two decimals and not equidistant).
    pub fn training_set(self) -> TrainingSet {
        let points = match self {
            TargetFunction::Square => vec![(0.1, 0.01), (0.5, 0.25), (0.9, 0.81)],
            TargetFunction::Sqrt => vec![(0.15, 0.38), (0.6, 0.77), (0.85, 0.92)],
        };
        TrainingSet::new(points).expect("static training points are valid")
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(TargetFunction::Square),
            "sqrt" => Ok(TargetFunction::Sqrt),
            other => Err(Error::invalid(format!(
                "unknown target function {other:?}, expected \"square\" or \"sqrt\""
            ))),
        }
    }
}

/// Training points for a function identified by name.
pub fn training_set(name: &str) -> Result<TrainingSet> {
    Ok(name.parse::<TargetFunction>()?.training_set())
}

/// `n` interior equidistant points of `[0, 1]`: `i / (n + 1)` for `i = 1..=n`.
pub fn evaluation_grid(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("evaluation grid needs at least one point"));
    }
    let denom = (n + 1) as f64;
    Ok((1..=n).map(|i| i as f64 / denom).collect())
}

/// RMS deviation from the true function over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridObjective {
    pub function: TargetFunction,
    pub grid: Vec<f64>,
}

impl GridObjective {
    pub fn new(function: TargetFunction, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invalid("evaluation grid must not be empty"));
        }
        Ok(GridObjective { function, grid })
    }

    pub fn with_size(function: TargetFunction, n: usize) -> Result<Self> {
        Self::new(function, evaluation_grid(n)?)
    }
}

impl Objective for GridObjective {
    fn error(&self, net: &Network) -> Result<f64> {
        objective(net, self.function, &self.grid)
    }

    fn eval_points(&self) -> &[f64] {
        &self.grid
    }

    fn target(&self, x: f64) -> f64 {
        self.function.eval(x)
    }
}

pub fn objective(net: &Network, function: TargetFunction, grid: &[f64]) -> Result<f64> {
    grid_rms(net, grid, |x| function.eval(x))
}

fn grid_rms(net: &Network, grid: &[f64], truth: impl Fn(f64) -> f64) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::invalid("evaluation grid must not be empty"));
    }
    let mut sum = 0.0;
    for &x in grid {
        let r = net.forward(x)? - truth(x);
        sum += r * r;
    }
    Ok((sum / grid.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub function: TargetFunction,
    pub noise_percent: f64,
    pub seed: u32,
    pub schedule: AnnealingSchedule,
    pub bounds: WeightBounds,
    pub grid_size: usize,
}

impl Scenario {
    pub fn new(function: TargetFunction, noise_percent: f64, seed: u32) -> Self {
        Scenario {
            function,
            noise_percent,
            seed,
            schedule: AnnealingSchedule::default(),
            bounds: function.default_bounds(),
            grid_size: DEFAULT_GRID_SIZE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.noise_spec().map(|_| ())
    }

    fn noise_spec(&self) -> Result<NoiseSpec> {
        if self.grid_size == 0 {
            return Err(Error::invalid("grid_size must be at least 1"));
        }
        NoiseSpec::new(self.noise_percent, self.grid_size, self.bounds)
    }
}

/// Annealed network for one (function, seed), shared by every noise level.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub network: Network,
    pub objective: GridObjective,
    pub initial_error: f64,
    /// Generator state right after training; each refinement starts from a
    /// copy of it.
    rng: Prng,
}

impl Baseline {
    pub fn train(
        function: TargetFunction,
        seed: u32,
        schedule: &AnnealingSchedule,
        bounds: &WeightBounds,
        grid_size: usize,
    ) -> Result<Self> {
        let objective = GridObjective::with_size(function, grid_size)?;
        let mut rng = Prng::new(seed);
        let start = Network::init_random(&DEFAULT_LAYER_SIZES, bounds, &mut rng)?;
        let trained = anneal(&start, &function.training_set(), schedule, bounds, &mut rng)?;
        let initial_error = objective.error(&trained.best_network)?;
        Ok(Baseline {
            network: trained.best_network,
            objective,
            initial_error,
            rng,
        })
    }

    pub fn refine(&self, noise: &NoiseSpec) -> Result<(Network, RefinementTrace)> {
        let mut rng = self.rng.clone();
        refine(&self.network, &self.objective, noise, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub initial_error: f64,
    pub final_error: f64,
    pub baseline: Network,
    pub refined: Network,
    pub trace: RefinementTrace,
    pub baseline_outputs: Vec<f64>,
    pub refined_outputs: Vec<f64>,
}

fn outputs(net: &Network, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&x| net.forward(x)).collect()
}

/// Random init, annealing on the three training points, then noise
/// refinement against the grid objective. Fully determined by the scenario.
pub fn run_scenario(s: &Scenario) -> Result<ExperimentResult> {
    s.validate()?;
    let baseline = Baseline::train(s.function, s.seed, &s.schedule, &s.bounds, s.grid_size)?;
    finish_scenario(s, &baseline)
}

fn finish_scenario(s: &Scenario, baseline: &Baseline) -> Result<ExperimentResult> {
    let (refined, trace) = baseline.refine(&s.noise_spec()?)?;
    let grid = &baseline.objective.grid;
    let final_error = baseline.objective.error(&refined)?;
    Ok(ExperimentResult {
        scenario: s.clone(),
        initial_error: baseline.initial_error,
        final_error,
        baseline_outputs: outputs(&baseline.network, grid)?,
        refined_outputs: outputs(&refined, grid)?,
        baseline: baseline.network.clone(),
        refined,
        trace,
    })
}

/// Settings shared by every cell of the error table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableConfig {
    pub functions: Vec<TargetFunction>,
    pub noise_levels: Vec<f64>,
    pub schedule: AnnealingSchedule,
    /// Applied to every function instead of its default bounds.
    pub bounds_override: Option<WeightBounds>,
    pub grid_size: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            functions: TargetFunction::ALL.to_vec(),
            noise_levels: DEFAULT_NOISE_LEVELS.to_vec(),
            schedule: AnnealingSchedule::default(),
            bounds_override: None,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

impl TableConfig {
    pub fn scenario(&self, function: TargetFunction, noise_percent: f64, seed: u32) -> Scenario {
        Scenario {
            function,
            noise_percent,
            seed,
            schedule: self.schedule,
            bounds: self
                .bounds_override
                .unwrap_or_else(|| function.default_bounds()),
            grid_size: self.grid_size,
        }
    }
}

/// A table cell. `seed == None` marks the mean over all seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub function: TargetFunction,
    pub noise_percent: f64,
    pub seed: Option<u32>,
    pub initial_error: f64,
    pub final_error: f64,
}

/// Final error per (function, noise level, seed). One baseline is trained per
/// (function, seed) and reused for every noise level. With more than one seed,
/// a mean row follows the per-seed rows of each (function, noise level).
///
/// Rows are ordered by function, then noise level, then seed, regardless of
/// how the work is scheduled.
pub fn run_table(seeds: &[u32], config: &TableConfig) -> Result<Vec<TableRow>> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    if config.noise_levels.is_empty() || config.functions.is_empty() {
        return Err(Error::invalid(
            "table needs at least one function and one noise level",
        ));
    }
    for &f in &config.functions {
        for &noise in &config.noise_levels {
            config.scenario(f, noise, seeds[0]).validate()?;
        }
    }

    let jobs: Vec<(TargetFunction, u32)> = config
        .functions
        .iter()
        .flat_map(|&f| seeds.iter().map(move |&s| (f, s)))
        .collect();

    // results[job][noise level]
    let results: Vec<Vec<ExperimentResult>> = jobs
        .par_iter()
        .map(|&(f, seed)| {
            let s0 = config.scenario(f, 0.0, seed);
            let baseline = Baseline::train(f, seed, &s0.schedule, &s0.bounds, s0.grid_size)?;
            config
                .noise_levels
                .iter()
                .map(|&noise| finish_scenario(&config.scenario(f, noise, seed), &baseline))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (fi, &f) in config.functions.iter().enumerate() {
        let per_function = &results[fi * seeds.len()..(fi + 1) * seeds.len()];
        for (ni, &noise) in config.noise_levels.iter().enumerate() {
            for (&seed, res) in seeds.iter().zip(per_function) {
                rows.push(TableRow {
                    function: f,
                    noise_percent: noise,
                    seed: Some(seed),
                    initial_error: res[ni].initial_error,
                    final_error: res[ni].final_error,
                });
            }
            if seeds.len() > 1 {
                let n = seeds.len() as f64;
                let mean = |pick: fn(&ExperimentResult) -> f64| {
                    per_function.iter().map(|r| pick(&r[ni])).sum::<f64>() / n
                };
                rows.push(TableRow {
                    function: f,
                    noise_percent: noise,
                    seed: None,
                    initial_error: mean(|r| r.initial_error),
                    final_error: mean(|r| r.final_error),
                });
            }
        }
    }
    Ok(rows)
}
