//! Monte Carlo trials and ensemble statistics.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::compression::{compress, Protocol};
use crate::lattice::{make_spec, GridSpec, ReservoirMode, Site};
use crate::loading::{load_stochastic, realized_ratio, reservoir_ratio, Occupancy};
use crate::metrics::{tally, time_of, Metrics, MoveLog, TimeModel};
use crate::postprocess::postprocess;
use crate::Result;

/// Output of planning both stages on one board.
#[derive(Clone, Debug)]
pub struct Plan {
    pub initial: Occupancy,
    pub after_compression: Occupancy,
    pub final_board: Occupancy,
    pub log: MoveLog,
    pub unfilled: Vec<Site>,
}

/// Compression followed by postprocess on a fixed board.
pub fn plan(initial: &Occupancy, spec: &GridSpec, protocol: Protocol) -> Plan {
    let mut occ = initial.clone();
    let mut log = MoveLog::new();
    compress(&mut occ, spec, protocol, &mut log);
    let after_compression = occ.clone();
    let unfilled = postprocess(&mut occ, spec, &mut log);
    Plan {
        initial: initial.clone(),
        after_compression,
        final_board: occ,
        log,
        unfilled,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    pub metrics: Metrics,
    pub realized_ratio: f64,
    pub initial_vacancies: usize,
    pub unfilled: usize,
    /// Wall-clock time of both planning stages, ms.
    pub plan_ms: f64,
}

impl TrialResult {
    #[inline]
    pub fn success(&self) -> bool {
        self.unfilled == 0
    }
}

pub fn run_trial(spec: &GridSpec, protocol: Protocol, seed: u64) -> TrialResult {
    let initial = load_stochastic(spec, seed);
    let start = Instant::now();
    let p = plan(&initial, spec, protocol);
    let plan_ms = start.elapsed().as_secs_f64() * 1e3;
    TrialResult {
        seed,
        metrics: tally(&p.log),
        realized_ratio: realized_ratio(&initial, spec),
        initial_vacancies: initial.target_vacancies(spec),
        unfilled: p.unfilled.len(),
        plan_ms,
    }
}

/// Trials for seeds `base_seed..base_seed + n`, returned in seed order.
pub fn run_trials(spec: &GridSpec, protocol: Protocol, n: usize, base_seed: u64) -> Vec<TrialResult> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| run_trial(spec, protocol, base_seed.wrapping_add(i)))
        .collect()
}

/// Mean, sample standard deviation and standard error of one quantity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                sem: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            sem: std / (n as f64).sqrt(),
        }
    }
}

/// Per-trial quantities aggregated by [`EnsembleStats`], in CSV column order.
pub const QUANTITIES: [&str; 14] = [
    "C_para", "R_para", "D_para", "C_post", "R_post", "D_post", "C", "R", "D", "M", "M_post", "D_atoms", "T_us",
    "unfilled",
];

fn quantities(t: &TrialResult, tm: &TimeModel) -> [f64; 14] {
    let m = &t.metrics;
    [
        m.c_para as f64,
        m.r_para as f64,
        m.d_para as f64,
        m.c_post as f64,
        m.r_post as f64,
        m.d_post as f64,
        m.c() as f64,
        m.r() as f64,
        m.d() as f64,
        m.m(),
        m.m_post(),
        m.d_atoms as f64,
        time_of(m, tm),
        t.unfilled as f64,
    ]
}

/// Which trials enter the per-quantity summaries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// Every trial, including those that left target vacancies unfilled.
    #[default]
    AllTrials,
    /// Only trials that filled the whole target.
    SuccessOnly,
}

impl std::str::FromStr for Conditioning {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all" => Ok(Conditioning::AllTrials),
            "success" => Ok(Conditioning::SuccessOnly),
            other => Err(crate::Error::Parse(format!("conditioning `{other}`"))),
        }
    }
}

impl std::fmt::Display for Conditioning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Conditioning::AllTrials => "all",
            Conditioning::SuccessOnly => "success",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub n_targets: usize,
    pub grid_side: usize,
    pub ratio: f64,
    pub protocol: Protocol,
    pub trials: usize,
    pub failures: usize,
    pub conditioning: Conditioning,
    /// Indexed like [`QUANTITIES`].
    pub summaries: Vec<Summary>,
    pub plan_ms_mean: f64,
}

impl EnsembleStats {
    pub fn from_trials(spec: &GridSpec, protocol: Protocol, trials: &[TrialResult], tm: &TimeModel) -> Self {
        Self::from_trials_conditioned(spec, protocol, trials, tm, Conditioning::AllTrials)
    }

    pub fn from_trials_conditioned(
        spec: &GridSpec,
        protocol: Protocol,
        trials: &[TrialResult],
        tm: &TimeModel,
        conditioning: Conditioning,
    ) -> Self {
        let ok: Vec<[f64; 14]> = trials
            .iter()
            .filter(|t| conditioning == Conditioning::AllTrials || t.success())
            .map(|t| quantities(t, tm))
            .collect();
        let summaries = (0..QUANTITIES.len())
            .map(|q| Summary::of(&ok.iter().map(|row| row[q]).collect::<Vec<_>>()))
            .collect();
        let plan_ms_mean = if trials.is_empty() {
            f64::NAN
        } else {
            trials.iter().map(|t| t.plan_ms).sum::<f64>() / trials.len() as f64
        };
        Self {
            n_targets: spec.n_targets(),
            grid_side: spec.grid_side(),
            ratio: reservoir_ratio(spec),
            protocol,
            trials: trials.len(),
            failures: trials.iter().filter(|t| !t.success()).count(),
            conditioning,
            summaries,
            plan_ms_mean,
        }
    }

    /// Summary of a quantity by its column name.
    pub fn get(&self, name: &str) -> Summary {
        let i = QUANTITIES
            .iter()
            .position(|q| *q == name)
            .unwrap_or_else(|| panic!("unknown quantity {name}"));
        self.summaries[i]
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

pub fn run_ensemble(
    spec: &GridSpec,
    protocol: Protocol,
    n_trials: usize,
    base_seed: u64,
    tm: &TimeModel,
) -> EnsembleStats {
    assert!(n_trials >= 1, "an ensemble needs at least one trial");
    let trials = run_trials(spec, protocol, n_trials, base_seed);
    EnsembleStats::from_trials(spec, protocol, &trials, tm)
}

/// Grid of sweep points.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    /// Varying target sides `L`, each with the same reservoir rule.
    TargetSides { sides: Vec<usize>, reservoir: ReservoirMode },
    /// Fixed `L`, varying grid sides `L′`.
    GridSides { target_side: usize, grid_sides: Vec<usize> },
}

impl SweepAxis {
    pub fn specs(&self, fill: f64) -> Result<Vec<GridSpec>> {
        match self {
            SweepAxis::TargetSides { sides, reservoir } => {
                sides.iter().map(|&l| make_spec(l, fill, *reservoir)).collect()
            }
            SweepAxis::GridSides {
                target_side,
                grid_sides,
            } => grid_sides
                .iter()
                .map(|&lp| make_spec(*target_side, fill, ReservoirMode::Explicit(lp)))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SweepAxis::TargetSides { sides, .. } => sides.is_empty(),
            SweepAxis::GridSides { grid_sides, .. } => grid_sides.is_empty(),
        }
    }
}

/// One [`EnsembleStats`] row per sweep point. Every point reuses the same
/// seeds.
pub fn sweep(
    axis: &SweepAxis,
    fill: f64,
    protocol: Protocol,
    n_trials: usize,
    base_seed: u64,
    tm: &TimeModel,
) -> Result<Vec<EnsembleStats>> {
    Ok(axis
        .specs(fill)?
        .iter()
        .map(|spec| run_ensemble(spec, protocol, n_trials, base_seed, tm))
        .collect())
}

/// Grid sides from the default reservoir size up to the saturated one.
pub fn reservoir_range(target_side: usize, fill: f64) -> Result<Vec<usize>> {
    let lo = make_spec(target_side, fill, ReservoirMode::Default)?.grid_side();
    let hi = make_spec(target_side, fill, ReservoirMode::Saturated)?.grid_side();
    Ok((lo..=hi.max(lo)).collect())
}
