//! Deterministic large-`K` limit of the log-scale exponents `β(t)`.
//!
//! The limit is continuous and piecewise affine. It is built exactly, event by
//! event: at each slope-change time the right-derivatives are recomputed from
//! the current exponents alone, and the next slope change is the earliest of
//! four candidate families (another trait catching the dominant one, a
//! subpopulation dying out, mutation flow overtaking a trait's own growth,
//! and a dominant trait becoming resident).
//!
//! Phases `[s_{k-1}, s_k)` are delimited only by changes of the dominant
//! trait. Construction stops at a horizon, at global extinction, or at the
//! first time `T₀` where the dominant trait is ambiguous.

mod engine;

pub use engine::{Advance, Event, EventKind, ExponentState, LimitEngine, Trigger};

use crate::model::{ModelParams, Violation};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("t_max must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("non-generic parameters in strict mode: {0:?}")]
    NonGeneric(Vec<Violation>),
    #[error("non-terminating construction: more than {0} segments")]
    NonTerminating(usize),
    #[error("internal error: {0}")]
    Inconsistent(String),
    #[error("time {t} outside the constructed trajectory [0, {end}]")]
    OutOfRange { t: f64, end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    /// Absolute band for equality tests between exponents.
    pub tolerance: f64,
    /// Reject parameters violating the convergence-theorem genericity
    /// conditions instead of warning.
    pub strict: bool,
    pub max_segments: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            tolerance: 1e-9,
            strict: false,
            max_segments: 1_000_000,
        }
    }
}

/// Why a segment ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SegmentEnd {
    DominanceChange { from: usize, to: usize },
    SubpopulationExtinction { trait_index: usize },
    MutationFlowTakeover { trait_index: usize },
    DominantBecomesResident { trait_index: usize },
    GlobalExtinction,
    T0Stop,
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub beta_start: Vec<f64>,
    pub slopes: Vec<f64>,
    pub lstar: usize,
    pub resident: bool,
    pub end_event: SegmentEnd,
}

impl Segment {
    /// Affine interpolation, clamped against rounding at the ends of the segment.
    pub fn beta_at(&self, t: f64) -> Vec<f64> {
        let dt = t - self.t_start;
        self.beta_start
            .iter()
            .zip(&self.slopes)
            .map(|(b, s)| (b + s * dt).clamp(0.0, 1.0))
            .collect()
    }

    pub fn beta_end(&self) -> Vec<f64> {
        self.beta_at(self.t_end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Termination {
    Horizon { t_max: f64 },
    GlobalExtinction { time: f64 },
    T0TripleArgmax { time: f64 },
    T0ExtinctionAtTransition { time: f64 },
    /// Two-way tie at a phase boundary where neither trait can stay on top.
    T0NoAdmissibleDominant { time: f64 },
}

impl Termination {
    pub fn time(&self) -> f64 {
        match *self {
            Termination::Horizon { t_max } => t_max,
            Termination::GlobalExtinction { time }
            | Termination::T0TripleArgmax { time }
            | Termination::T0ExtinctionAtTransition { time }
            | Termination::T0NoAdmissibleDominant { time } => time,
        }
    }

    pub fn is_t0_stop(&self) -> bool {
        matches!(
            self,
            Termination::T0TripleArgmax { .. }
                | Termination::T0ExtinctionAtTransition { .. }
                | Termination::T0NoAdmissibleDominant { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTrajectory {
    pub params: ModelParams,
    pub segments: Vec<Segment>,
    /// `s_1, s_2, …`; a global extinction time counts as a phase time.
    pub phase_times: Vec<f64>,
    /// `ℓ*_1, ℓ*_2, …`; `ℓ*_k` is dominant on `[s_{k-1}, s_k)`.
    pub dominant_indices: Vec<usize>,
    pub termination: Termination,
    /// Genericity conditions violated by `params` (non-strict runs only).
    #[serde(default)]
    pub warnings: Vec<Violation>,
}

/// A trait whose exponent returns to 1 after having left it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reemergence {
    pub trait_index: usize,
    pub time: f64,
}

/// Builds the limit trajectory on `[0, t_max]`.
pub fn run(
    params: &ModelParams,
    t_max: f64,
    options: &EngineOptions,
) -> Result<LimitTrajectory, EngineError> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(EngineError::Horizon(t_max));
    }
    let report = params.genericity_check();
    let blocking: Vec<Violation> = report
        .violations
        .iter()
        .copied()
        .filter(Violation::breaks_convergence_theorem)
        .collect();
    if options.strict && !blocking.is_empty() {
        return Err(EngineError::NonGeneric(blocking));
    }

    let engine = LimitEngine::new(*params, *options);
    let mut state = engine.initial_state();
    let mut segments: Vec<Segment> = Vec::new();
    let mut phase_times = Vec::new();
    let mut dominant_indices = vec![state.lstar];
    let mut iterations = 0usize;

    let termination = loop {
        iterations += 1;
        if segments.len() >= options.max_segments || iterations > 4 * options.max_segments {
            return Err(EngineError::NonTerminating(options.max_segments));
        }
        let slopes = engine.slope_vector(&state);
        let event = engine.next_event(&state, &slopes);
        let reaches_horizon = event
            .as_ref()
            .is_none_or(|ev| state.t + ev.dt >= t_max);
        if reaches_horizon {
            if t_max > state.t {
                segments.push(Segment {
                    t_start: state.t,
                    t_end: t_max,
                    beta_start: state.beta.clone(),
                    slopes,
                    lstar: state.lstar,
                    resident: state.resident,
                    end_event: SegmentEnd::Horizon,
                });
            }
            break Termination::Horizon { t_max };
        }
        let event = event.expect("checked above");
        let end_event = segment_end(&state, &event);
        let t_start = state.t;
        let beta_start = state.beta.clone();
        let (lstar, resident) = (state.lstar, state.resident);
        let outcome = engine.advance(&state, &slopes, &event)?;
        let next = match &outcome {
            Advance::Continue { state, .. } | Advance::Stop { state, .. } => state,
        };
        if next.t > t_start {
            segments.push(Segment {
                t_start,
                t_end: next.t,
                beta_start,
                slopes,
                lstar,
                resident,
                end_event,
            });
        }
        match outcome {
            Advance::Continue {
                state: next,
                phase_change,
            } => {
                if let Some(new) = phase_change {
                    phase_times.push(next.t);
                    dominant_indices.push(new);
                }
                state = next;
            }
            Advance::Stop {
                state: next,
                termination,
            } => {
                if matches!(termination, Termination::GlobalExtinction { .. }) {
                    phase_times.push(next.t);
                } else if let Some(last) = segments.last_mut() {
                    last.end_event = SegmentEnd::T0Stop;
                }
                break termination;
            }
        }
    };

    Ok(LimitTrajectory {
        params: *params,
        segments,
        phase_times,
        dominant_indices,
        termination,
        warnings: if options.strict { Vec::new() } else { blocking },
    })
}

fn segment_end(state: &ExponentState, event: &Event) -> SegmentEnd {
    let first = |kind| event.traits_of(kind).next();
    if event.has(EventKind::GlobalExtinction) {
        SegmentEnd::GlobalExtinction
    } else if let Some(to) = first(EventKind::DominanceChange) {
        SegmentEnd::DominanceChange {
            from: state.lstar,
            to,
        }
    } else if let Some(ell) = first(EventKind::SubpopulationExtinction) {
        SegmentEnd::SubpopulationExtinction { trait_index: ell }
    } else if let Some(ell) = first(EventKind::DominantBecomesResident) {
        SegmentEnd::DominantBecomesResident { trait_index: ell }
    } else {
        SegmentEnd::MutationFlowTakeover {
            trait_index: first(EventKind::MutationFlowTakeover).unwrap_or(0),
        }
    }
}

impl LimitTrajectory {
    pub fn num_traits(&self) -> usize {
        self.params.num_traits()
    }

    /// Last constructed time.
    pub fn end_time(&self) -> f64 {
        self.termination.time()
    }

    fn locate(&self, t: f64) -> Result<Option<&Segment>, EngineError> {
        let end = self.end_time();
        if t.is_nan() || t < 0.0 {
            return Err(EngineError::OutOfRange { t, end });
        }
        if t > end {
            return match self.termination {
                Termination::GlobalExtinction { .. } => Ok(None),
                _ => Err(EngineError::OutOfRange { t, end }),
            };
        }
        let i = self.segments.partition_point(|s| s.t_end < t);
        Ok(self.segments.get(i.min(self.segments.len().saturating_sub(1))))
    }

    /// Exponents at `t`, by affine interpolation in the enclosing segment.
    pub fn beta_at(&self, t: f64) -> Result<Vec<f64>, EngineError> {
        match self.locate(t)? {
            Some(seg) => Ok(seg.beta_at(t)),
            None => Ok(vec![0.0; self.num_traits() + 1]),
        }
    }

    /// Matrix of exponents, one row per requested time.
    pub fn sample(&self, times: &[f64]) -> Result<Vec<Vec<f64>>, EngineError> {
        times.iter().map(|&t| self.beta_at(t)).collect()
    }

    /// Dominant trait and residency flag in force at `t` (right-continuous).
    pub fn regime_at(&self, t: f64) -> Result<(usize, bool), EngineError> {
        self.locate(t)?;
        let i = self.segments.partition_point(|s| s.t_end <= t);
        match self.segments.get(i).or(self.segments.last()) {
            Some(seg) if t <= self.end_time() => Ok((seg.lstar, seg.resident)),
            Some(seg) => Ok((seg.lstar, false)),
            None => Ok((0, false)),
        }
    }

    /// Largest jump of `β` across segment junctions.
    pub fn max_junction_jump(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                w[0].beta_end()
                    .iter()
                    .zip(&w[1].beta_start)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Re-emergence events in time order: trait ℓ was at 1 on a nonempty
    /// interval, dropped below 1, and came back to 1.
    pub fn reemergences(&self) -> Vec<Reemergence> {
        let tol = 1e-9;
        let n = self.num_traits() + 1;
        // 0 = never at one, 1 = at one, 2 = left one
        let mut phase = vec![0u8; n];
        let mut out = Vec::new();
        for seg in &self.segments {
            let end = seg.beta_end();
            let len = seg.t_end - seg.t_start;
            for ell in 0..n {
                let start_one = seg.beta_start[ell] >= 1.0 - tol;
                let end_one = end[ell] >= 1.0 - tol;
                match phase[ell] {
                    0 if start_one && end_one && len > 0.0 => phase[ell] = 1,
                    1 if !end_one => phase[ell] = 2,
                    2 if end_one => {
                        out.push(Reemergence {
                            trait_index: ell,
                            time: seg.t_end,
                        });
                        phase[ell] = 1;
                    }
                    _ => {}
                }
            }
        }
        out.sort_by(|a, b| a.time.total_cmp(&b.time));
        out.dedup();
        out
    }

    /// Maximal intervals on which `max_ℓ β_ℓ < 1`.
    pub fn sub_resident_intervals(&self) -> Vec<(f64, f64)> {
        let tol = 1e-9;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for seg in &self.segments {
            let mid = seg.beta_at(0.5 * (seg.t_start + seg.t_end));
            let top = mid.iter().copied().fold(0.0, f64::max);
            if top < 1.0 - tol {
                match out.last_mut() {
                    Some(last) if (last.1 - seg.t_start).abs() <= tol => last.1 = seg.t_end,
                    _ => out.push((seg.t_start, seg.t_end)),
                }
            }
        }
        out
    }
}
