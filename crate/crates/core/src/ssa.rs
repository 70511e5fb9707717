//! Exact simulation of the finite-`K` jump process.
//!
//! Channels: clonal birth at rate `N_ℓ(4−ℓδ)(1−K^{−α})`, mutant birth into
//! `ℓ+1` at rate `N_ℓ(4−ℓδ)K^{−α}`, death at rate `N_ℓ(1 + CN/K)` and, for
//! every pair `ℓ > ℓ'`, transfer turning an `ℓ'` individual into an `ℓ` one at
//! rate `τN_ℓN_ℓ'/N`. Mutation out of the top trait `L` is suppressed.
//!
//! Time is absolute inside the simulator. Every recorded quantity is indexed
//! by log-K time `t/log K`.

use crate::limit::LimitTrajectory;
use crate::model::{ModelError, ModelParams};
use crate::rng::{exp1, rng_for, uniform, SimRng};
use serde::{Deserialize, Serialize};

pub const DEFAULT_EVENT_BUDGET: u64 = 10_000_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("event budget of {budget} exhausted at log-K time {t_logk}")]
    Budget {
        budget: u64,
        t_logk: f64,
        partial: Box<SimTrace>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub t: f64,
    pub counts: Vec<u64>,
}

impl PopulationState {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Channel {
    CloneBirth { trait_index: usize },
    MutantBirth { from: usize },
    Death { trait_index: usize },
    /// A `recipient` individual acquires trait `donor > recipient`.
    Transfer { donor: usize, recipient: usize },
}

impl Channel {
    /// Change of the total population size.
    pub fn delta_total(&self) -> i64 {
        match self {
            Channel::CloneBirth { .. } | Channel::MutantBirth { .. } => 1,
            Channel::Death { .. } => -1,
            Channel::Transfer { .. } => 0,
        }
    }

    pub fn apply(&self, counts: &mut [u64]) {
        match *self {
            Channel::CloneBirth { trait_index } => counts[trait_index] += 1,
            Channel::MutantBirth { from } => counts[from + 1] += 1,
            Channel::Death { trait_index } => counts[trait_index] -= 1,
            Channel::Transfer { donor, recipient } => {
                counts[recipient] -= 1;
                counts[donor] += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub channels: Vec<(Channel, f64)>,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.channels.iter().map(|c| c.1).sum()
    }

    pub fn rate(&self, channel: Channel) -> f64 {
        self.channels.iter().filter(|c| c.0 == channel).map(|c| c.1).sum()
    }
}

/// Every channel with its rate. Empty when the population is extinct.
pub fn event_rates(state: &PopulationState, params: &ModelParams, k: u64) -> RateTable {
    let n = state.total();
    let mut channels = Vec::new();
    if n == 0 {
        return RateTable { channels };
    }
    let (nf, kf) = (n as f64, k as f64);
    let top = params.num_traits();
    let pk = params.mutation_probability(k);
    let death = 1.0 + params.comp() * nf / kf;
    for (ell, &c) in state.counts.iter().enumerate() {
        let c = c as f64;
        let birth = c * params.birth_rate_unchecked(ell);
        if ell < top {
            channels.push((Channel::CloneBirth { trait_index: ell }, birth * (1.0 - pk)));
            channels.push((Channel::MutantBirth { from: ell }, birth * pk));
        } else {
            channels.push((Channel::CloneBirth { trait_index: ell }, birth));
        }
        channels.push((Channel::Death { trait_index: ell }, c * death));
    }
    for donor in 1..=top {
        for recipient in 0..donor {
            let rate = params.tau() * state.counts[donor] as f64 * state.counts[recipient] as f64 / nf;
            channels.push((Channel::Transfer { donor, recipient }, rate));
        }
    }
    RateTable { channels }
}

/// Direct-method stepper working on aggregated per-trait rates, so one event
/// costs `O(L)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: ModelParams,
    k: f64,
    pk: f64,
    birth: Vec<f64>,
    weights: Vec<f64>,
    pub state: PopulationState,
    total: u64,
}

impl Stepper {
    pub fn new(params: ModelParams, k: u64, state: PopulationState) -> Result<Self, SimError> {
        if k < 2 {
            return Err(ModelError::CarryingCapacity(k).into());
        }
        if state.counts.len() != params.num_traits() + 1 {
            return Err(SimError::Config(format!(
                "state has {} traits, model has {}",
                state.counts.len(),
                params.num_traits() + 1
            )));
        }
        let birth = (0..state.counts.len()).map(|l| params.birth_rate_unchecked(l)).collect();
        let total = state.total();
        Ok(Stepper {
            params,
            k: k as f64,
            pk: params.mutation_probability(k),
            birth,
            weights: vec![0.0; 3 * state.counts.len()],
            state,
            total,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Fills per-trait weights `[birth, death, transfer-as-donor]` and returns their sum.
    fn rates(&mut self) -> f64 {
        let n = self.total as f64;
        let death = 1.0 + self.params.comp() * n / self.k;
        let tau_n = self.params.tau() / n;
        let mut below = 0u64;
        let mut sum = 0.0;
        for (ell, &c) in self.state.counts.iter().enumerate() {
            let cf = c as f64;
            let w = &mut self.weights[3 * ell..3 * ell + 3];
            w[0] = cf * self.birth[ell];
            w[1] = cf * death;
            w[2] = tau_n * cf * below as f64;
            sum += w[0] + w[1] + w[2];
            below += c;
        }
        sum
    }

    fn pick(&self, rng: &mut SimRng, total_rate: f64) -> Channel {
        let mut u = uniform(rng, total_rate);
        let mut last = None;
        for (i, &w) in self.weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            last = Some(i);
            if u < w {
                return self.channel_at(rng, i);
            }
            u -= w;
        }
        // rounding overshoot
        self.channel_at(rng, last.expect("positive total rate"))
    }

    fn channel_at(&self, rng: &mut SimRng, i: usize) -> Channel {
        let ell = i / 3;
        match i % 3 {
            0 => {
                if ell + 1 < self.state.counts.len() && rng.random_bool_f(self.pk) {
                    Channel::MutantBirth { from: ell }
                } else {
                    Channel::CloneBirth { trait_index: ell }
                }
            }
            1 => Channel::Death { trait_index: ell },
            _ => {
                let below: u64 = self.state.counts[..ell].iter().sum();
                let mut v = uniform(rng, below as f64);
                let mut last = 0;
                for (r, &c) in self.state.counts[..ell].iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    last = r;
                    if v < c as f64 {
                        return Channel::Transfer { donor: ell, recipient: r };
                    }
                    v -= c as f64;
                }
                Channel::Transfer {
                    donor: ell,
                    recipient: last,
                }
            }
        }
    }

    /// Samples the next event without applying it: `(waiting time, channel)`.
    /// `None` once the population is extinct.
    pub fn propose(&mut self, rng: &mut SimRng) -> Option<(f64, Channel)> {
        if self.total == 0 {
            return None;
        }
        let rate = self.rates();
        let dt = exp1(rng) / rate;
        Some((dt, self.pick(rng, rate)))
    }

    pub fn apply(&mut self, dt: f64, channel: Channel) {
        self.state.t += dt;
        channel.apply(&mut self.state.counts);
        self.total = (self.total as i64 + channel.delta_total()) as u64;
    }

    pub fn step(&mut self, rng: &mut SimRng) -> Option<Channel> {
        let (dt, ch) = self.propose(rng)?;
        self.apply(dt, ch);
        Some(ch)
    }
}

trait BernoulliExt {
    fn random_bool_f(&mut self, p: f64) -> bool;
}

impl BernoulliExt for SimRng {
    fn random_bool_f(&mut self, p: f64) -> bool {
        uniform(self, 1.0) < p
    }
}

/// One event from `state`. An extinct state is returned unchanged.
pub fn step(state: &PopulationState, params: &ModelParams, k: u64, rng: &mut SimRng) -> Result<PopulationState, SimError> {
    let mut s = Stepper::new(*params, k, state.clone())?;
    s.step(rng);
    Ok(s.state)
}

/// `log(1 + N_ℓ)/log K`.
pub fn exponents(counts: &[u64], k: u64) -> Vec<f64> {
    let lk = (k as f64).ln();
    counts.iter().map(|&c| (c as f64).ln_1p() / lk).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    #[serde(rename = "K")]
    pub k: u64,
    pub seed: u64,
    pub horizon_logk: f64,
    pub record_grid: Vec<f64>,
    pub replicas: usize,
    pub event_budget: u64,
    /// When set, the trace also carries the exact time average of each count
    /// over this log-K window.
    pub average_window: Option<(f64, f64)>,
}

impl SimConfig {
    pub fn new(params: ModelParams, k: u64, seed: u64, horizon_logk: f64, grid_step: f64) -> Result<Self, SimError> {
        if !(grid_step > 0.0) {
            return Err(SimError::Config("grid step must be positive".into()));
        }
        let n = (horizon_logk / grid_step + 1e-9).floor() as usize;
        Ok(SimConfig {
            params,
            k,
            seed,
            horizon_logk,
            record_grid: (0..=n).map(|i| i as f64 * grid_step).collect(),
            replicas: 1,
            event_budget: DEFAULT_EVENT_BUDGET,
            average_window: None,
        })
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.k < 2 {
            return Err(ModelError::CarryingCapacity(self.k).into());
        }
        if !(self.horizon_logk.is_finite() && self.horizon_logk >= 0.0) {
            return Err(SimError::Config("horizon must be finite and >= 0".into()));
        }
        if self.replicas == 0 {
            return Err(SimError::Config("replicas must be positive".into()));
        }
        if self.record_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SimError::Config("record grid must be strictly increasing".into()));
        }
        if let Some(&first) = self.record_grid.first() {
            if first < 0.0 {
                return Err(SimError::Config("record grid starts before 0".into()));
            }
        }
        if let Some(&last) = self.record_grid.last() {
            if last > self.horizon_logk {
                return Err(SimError::Config("record grid extends past the horizon".into()));
            }
        }
        if let Some((a, b)) = self.average_window {
            if !(0.0 <= a && a < b && b <= self.horizon_logk) {
                return Err(SimError::Config("average window must lie inside [0, horizon]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub grid: Vec<f64>,
    pub counts_at: Vec<Vec<u64>>,
    pub exponents_at: Vec<Vec<f64>>,
    pub extinction_logk: Option<f64>,
    pub events_executed: u64,
    pub time_average: Option<Vec<f64>>,
}

/// Single trajectory, replica 0 of `config.seed`.
pub fn run(config: &SimConfig) -> Result<SimTrace, SimError> {
    run_replica(config, 0)
}

pub fn run_replica(config: &SimConfig, replica: u64) -> Result<SimTrace, SimError> {
    config.validate()?;
    let mut rng = rng_for(config.seed, replica);
    let counts = config.params.initial_condition(config.k)?;
    let mut stepper = Stepper::new(config.params, config.k, PopulationState { t: 0.0, counts })?;
    let lk = (config.k as f64).ln();
    let t_end = config.horizon_logk * lk;
    let grid_abs: Vec<f64> = config.record_grid.iter().map(|g| g * lk).collect();
    let (avg_lo, avg_hi) = config.average_window.map_or((0.0, 0.0), |(a, b)| (a * lk, b * lk));
    let mut integral = vec![0.0; stepper.state.counts.len()];

    let mut trace = SimTrace {
        grid: config.record_grid.clone(),
        counts_at: Vec::with_capacity(grid_abs.len()),
        exponents_at: Vec::with_capacity(grid_abs.len()),
        extinction_logk: None,
        events_executed: 0,
        time_average: None,
    };
    let record = |trace: &mut SimTrace, counts: &[u64]| {
        trace.counts_at.push(counts.to_vec());
        trace.exponents_at.push(exponents(counts, config.k));
    };

    loop {
        let proposal = stepper.propose(&mut rng);
        let t = stepper.state.t;
        let t_next = proposal.map_or(f64::INFINITY, |(dt, _)| t + dt);
        let hold_end = t_next.min(t_end);
        while trace.counts_at.len() < grid_abs.len() && grid_abs[trace.counts_at.len()] < t_next.min(t_end + 1e-12 * lk) {
            record(&mut trace, &stepper.state.counts);
        }
        if config.average_window.is_some() {
            let overlap = hold_end.min(avg_hi) - t.max(avg_lo);
            if overlap > 0.0 {
                for (acc, &c) in integral.iter_mut().zip(&stepper.state.counts) {
                    *acc += c as f64 * overlap;
                }
            }
        }
        let Some((dt, channel)) = proposal.filter(|_| t_next <= t_end) else {
            while trace.counts_at.len() < grid_abs.len() {
                record(&mut trace, &stepper.state.counts);
            }
            break;
        };
        if trace.events_executed >= config.event_budget {
            return Err(SimError::Budget {
                budget: config.event_budget,
                t_logk: t / lk,
                partial: Box::new(trace),
            });
        }
        stepper.apply(dt, channel);
        trace.events_executed += 1;
        if stepper.total() == 0 {
            trace.extinction_logk = Some(stepper.state.t / lk);
        }
    }
    if config.average_window.is_some() {
        let span = avg_hi - avg_lo;
        trace.time_average = Some(integral.into_iter().map(|x| x / span).collect());
    }
    Ok(trace)
}

/// Per-grid-time summary over replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub grid: Vec<f64>,
    pub median: Vec<Vec<f64>>,
    pub q25: Vec<Vec<f64>>,
    pub q75: Vec<Vec<f64>>,
    /// Per-replica sup error against the reference trajectory, when one was given.
    pub sup_errors: Option<Vec<f64>>,
    pub median_sup_error: Option<f64>,
    pub extinctions: usize,
    pub events_executed: u64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Sup over grid times within `window` of `|β^K_ℓ − β_ℓ|`, all traits.
pub fn sup_error(trace: &SimTrace, reference: &LimitTrajectory, window: (f64, f64)) -> f64 {
    let mut worst: f64 = 0.0;
    for (g, row) in trace.grid.iter().zip(&trace.exponents_at) {
        if *g < window.0 || *g > window.1 {
            continue;
        }
        let Ok(beta) = reference.beta_at(*g) else { continue };
        for (x, y) in row.iter().zip(&beta) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

pub fn run_replicas(config: &SimConfig) -> Vec<Result<SimTrace, SimError>> {
    let one = |r: usize| run_replica(config, r as u64);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.replicas).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.replicas).map(one).collect()
    }
}

/// Aggregates already simulated traces.
pub fn summarize(traces: &[SimTrace], reference: Option<(&LimitTrajectory, (f64, f64))>) -> EnsembleSummary {
    let grid = traces[0].grid.clone();
    let width = traces[0].exponents_at.first().map_or(0, Vec::len);
    let mut median = Vec::with_capacity(grid.len());
    let mut q25 = Vec::with_capacity(grid.len());
    let mut q75 = Vec::with_capacity(grid.len());
    let mut column = Vec::with_capacity(traces.len());
    for g in 0..grid.len() {
        let (mut m, mut lo, mut hi) = (vec![0.0; width], vec![0.0; width], vec![0.0; width]);
        for ell in 0..width {
            column.clear();
            column.extend(traces.iter().map(|t| t.exponents_at[g][ell]));
            column.sort_by(f64::total_cmp);
            m[ell] = quantile(&column, 0.5);
            lo[ell] = quantile(&column, 0.25);
            hi[ell] = quantile(&column, 0.75);
        }
        median.push(m);
        q25.push(lo);
        q75.push(hi);
    }
    let sup_errors = reference.map(|(traj, window)| traces.iter().map(|t| sup_error(t, traj, window)).collect::<Vec<_>>());
    let median_sup_error = sup_errors.as_deref().map(self::median);
    EnsembleSummary {
        grid,
        median,
        q25,
        q75,
        sup_errors,
        median_sup_error,
        extinctions: traces.iter().filter(|t| t.extinction_logk.is_some()).count(),
        events_executed: traces.iter().map(|t| t.events_executed).sum(),
    }
}

/// Runs `config.replicas` replicas and summarizes them, optionally against a
/// limit trajectory over a log-K window.
pub fn ensemble(
    config: &SimConfig,
    reference: Option<(&LimitTrajectory, (f64, f64))>,
) -> Result<(EnsembleSummary, Vec<SimTrace>), SimError> {
    config.validate()?;
    if config.record_grid.is_empty() {
        return Err(SimError::Config("ensemble needs a nonempty record grid".into()));
    }
    let traces = run_replicas(config).into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((summarize(&traces, reference), traces))
}
