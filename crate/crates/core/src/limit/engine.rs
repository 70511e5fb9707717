//! One step of the event-driven construction: effective fitness, slope
//! recursion, next slope-change time, and the state update at that time.

use super::{EngineError, EngineOptions, Termination};
use crate::model::ModelParams;
use serde::{Deserialize, Serialize};

/// Slopes and rates closer to zero than this are treated as zero.
const RATE_EPS: f64 = 1e-12;

/// Exponent vector at a slope-change time, with the current dominant trait.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentState {
    /// Time in units of `log K`.
    pub t: f64,
    pub beta: Vec<f64>,
    pub lstar: usize,
    /// True when `β_{ℓ*} = 1` and `ℓ*δ < 3`: the population is of order `K`
    /// and the resident fitness `S` applies, otherwise `Ŝ`.
    pub resident: bool,
    /// Index `k` of the current phase `[s_{k-1}, s_k)`.
    pub phase: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    /// `β_ℓ` catches `β_{ℓ*}`.
    DominanceChange,
    /// A positive `β_ℓ` hits zero.
    SubpopulationExtinction,
    /// The mutation line `β_{ℓ-1} − α` catches `β_ℓ`.
    MutationFlowTakeover,
    /// A dominant `β_{ℓ*} < 1` reaches 1.
    DominantBecomesResident,
    /// `β_{ℓ*}` hits zero.
    GlobalExtinction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    pub kind: EventKind,
    pub trait_index: usize,
}

/// Next slope change: the minimal candidate time and every trigger attaining
/// it within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub dt: f64,
    pub triggers: Vec<Trigger>,
}

impl Event {
    pub fn has(&self, kind: EventKind) -> bool {
        self.triggers.iter().any(|t| t.kind == kind)
    }

    pub fn traits_of(&self, kind: EventKind) -> impl Iterator<Item = usize> + '_ {
        self.triggers
            .iter()
            .filter(move |t| t.kind == kind)
            .map(|t| t.trait_index)
    }
}

/// Result of [`LimitEngine::advance`].
#[derive(Debug, Clone, PartialEq)]
pub enum Advance {
    Continue {
        state: ExponentState,
        /// New dominant trait when the event closed a phase.
        phase_change: Option<usize>,
    },
    Stop {
        state: ExponentState,
        termination: Termination,
    },
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dt: f64,
    /// Rate at which the gap closes; used to decide ties.
    closing_rate: f64,
    trigger: Trigger,
}

#[derive(Debug, Clone)]
pub struct LimitEngine {
    params: ModelParams,
    options: EngineOptions,
}

impl LimitEngine {
    pub fn new(params: ModelParams, options: EngineOptions) -> Self {
        LimitEngine { params, options }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    fn tol(&self) -> f64 {
        self.options.tolerance
    }

    /// State at time zero: trait 0 resident, `β_ℓ(0) = (1 − ℓα)₊`.
    pub fn initial_state(&self) -> ExponentState {
        let beta = self.params.initial_exponents();
        let mut state = ExponentState {
            t: 0.0,
            beta,
            lstar: 0,
            resident: false,
            phase: 1,
        };
        state.resident = self.is_resident(&state);
        state
    }

    fn is_resident(&self, state: &ExponentState) -> bool {
        state.beta[state.lstar] >= 1.0 - self.tol() && self.params.trait_value(state.lstar) < 3.0
    }

    /// `S̃(ℓδ; ℓ*δ)`: resident fitness `S` when the dominant trait is resident,
    /// `Ŝ` otherwise.
    pub fn effective_fitness(&self, state: &ExponentState, ell: usize) -> f64 {
        if state.resident {
            self.params.fitness_resident_unchecked(ell, state.lstar)
        } else {
            self.params.fitness_dominant_unchecked(ell, state.lstar)
        }
    }

    /// Right-derivative `Σ⁰` of every exponent.
    ///
    /// `Σ_ℓ` is the trait's own fitness, or the larger of that and `Σ_{ℓ-1}`
    /// when `β_ℓ` sits on the mutation line `β_{ℓ-1} − α`. The slope is
    /// switched off for extinct traits unless the incoming mutation flow is
    /// exactly at the activation threshold `β_{ℓ-1} = α`.
    pub fn slope_vector(&self, state: &ExponentState) -> Vec<f64> {
        let tol = self.tol();
        let alpha = self.params.alpha();
        let beta = &state.beta;
        let mut slopes = vec![0.0; beta.len()];
        for ell in 0..beta.len() {
            let own = self.effective_fitness(state, ell);
            let (sigma, active) = if ell == 0 {
                (own, beta[0] > tol)
            } else {
                let on_line = (beta[ell] - (beta[ell - 1] - alpha)).abs() <= tol;
                let sigma = if on_line { own.max(slopes[ell - 1]) } else { own };
                let active = beta[ell] > tol || (beta[ell - 1] - alpha).abs() <= tol;
                (sigma, active)
            };
            let mut s = if active { sigma } else { 0.0 };
            if beta[ell] <= tol && s < 0.0 {
                s = 0.0;
            }
            if ell == state.lstar && state.resident {
                s = 0.0;
            }
            slopes[ell] = s;
        }
        slopes
    }

    /// Earliest of the four candidate families; `None` when no exponent ever
    /// changes slope again.
    pub fn next_event(&self, state: &ExponentState, slopes: &[f64]) -> Option<Event> {
        let tol = self.tol();
        let alpha = self.params.alpha();
        let beta = &state.beta;
        let ls = state.lstar;
        let mut cands: Vec<Candidate> = Vec::new();
        let mut push = |dt: f64, closing_rate: f64, kind: EventKind, trait_index: usize| {
            cands.push(Candidate {
                dt: dt.max(0.0),
                closing_rate,
                trigger: Trigger { kind, trait_index },
            });
        };

        for ell in 0..beta.len() {
            // another exponent catches the dominant one
            if ell != ls {
                let rate = slopes[ell] - slopes[ls];
                if rate > RATE_EPS {
                    push((beta[ls] - beta[ell]) / rate, rate, EventKind::DominanceChange, ell);
                }
            }
            // a positive exponent hits zero
            if beta[ell] > tol && slopes[ell] < -RATE_EPS {
                let kind = if ell == ls {
                    EventKind::GlobalExtinction
                } else {
                    EventKind::SubpopulationExtinction
                };
                push(beta[ell] / -slopes[ell], -slopes[ell], kind, ell);
            }
            // mutation flow from ℓ-1 overtakes ℓ's own dynamics
            if ell >= 1 && ell != ls {
                let gap = beta[ell] - beta[ell - 1] + alpha;
                if gap > tol {
                    let own = if beta[ell] > tol {
                        self.effective_fitness(state, ell)
                    } else {
                        0.0
                    };
                    let rate = slopes[ell - 1] - own;
                    if rate > RATE_EPS {
                        push(gap / rate, rate, EventKind::MutationFlowTakeover, ell);
                    }
                }
            }
        }
        // the dominant exponent reaches 1
        if beta[ls] < 1.0 - tol && slopes[ls] > RATE_EPS {
            push(
                (1.0 - beta[ls]) / slopes[ls],
                slopes[ls],
                EventKind::DominantBecomesResident,
                ls,
            );
        }

        let dt = cands.iter().map(|c| c.dt).fold(f64::INFINITY, f64::min);
        if !dt.is_finite() {
            return None;
        }
        let triggers = cands
            .iter()
            .filter(|c| (c.dt - dt) * c.closing_rate <= tol)
            .map(|c| c.trigger)
            .collect();
        Some(Event { dt, triggers })
    }

    /// Moves the exponents affinely to the event time and applies the event.
    pub fn advance(
        &self,
        state: &ExponentState,
        slopes: &[f64],
        event: &Event,
    ) -> Result<Advance, EngineError> {
        let tol = self.tol();
        let alpha = self.params.alpha();
        let t = state.t + event.dt;
        let mut beta: Vec<f64> = state
            .beta
            .iter()
            .zip(slopes)
            .map(|(b, s)| b + s * event.dt)
            .collect();
        let old = state.lstar;

        if event.has(EventKind::GlobalExtinction) {
            beta.iter_mut().for_each(|b| *b = 0.0);
            let next = ExponentState {
                t,
                beta,
                lstar: old,
                resident: false,
                phase: state.phase,
            };
            return Ok(Advance::Stop {
                state: next,
                termination: Termination::GlobalExtinction { time: t },
            });
        }

        for trig in &event.triggers {
            let ell = trig.trait_index;
            if ell >= beta.len() {
                return Err(EngineError::Inconsistent(format!(
                    "trigger on trait {ell} outside 0..={}",
                    beta.len() - 1
                )));
            }
            match trig.kind {
                EventKind::DominanceChange => {
                    if ell == old {
                        return Err(EngineError::Inconsistent(
                            "dominance change onto the current dominant trait".into(),
                        ));
                    }
                    beta[ell] = beta[old];
                }
                EventKind::SubpopulationExtinction => beta[ell] = 0.0,
                EventKind::DominantBecomesResident => {
                    if ell != old {
                        return Err(EngineError::Inconsistent(format!(
                            "trait {ell} cannot become resident while {old} is dominant"
                        )));
                    }
                    beta[ell] = 1.0;
                }
                EventKind::MutationFlowTakeover | EventKind::GlobalExtinction => {}
            }
        }
        // mutation lines are snapped last, in trait order, so chains see
        // their already-snapped upstream value
        let mut lines: Vec<usize> = event.traits_of(EventKind::MutationFlowTakeover).collect();
        lines.sort_unstable();
        for ell in lines {
            if ell == 0 {
                return Err(EngineError::Inconsistent(
                    "trait 0 receives no mutants".into(),
                ));
            }
            beta[ell] = (beta[ell - 1] - alpha).max(0.0);
        }
        for b in beta.iter_mut() {
            *b = b.clamp(0.0, 1.0);
        }

        let mut next = ExponentState {
            t,
            beta,
            lstar: old,
            resident: false,
            phase: state.phase,
        };

        if !event.has(EventKind::DominanceChange) {
            next.resident = self.is_resident(&next);
            return Ok(Advance::Continue {
                state: next,
                phase_change: None,
            });
        }

        // phase boundary
        if event.has(EventKind::SubpopulationExtinction) {
            return Ok(Advance::Stop {
                state: next,
                termination: Termination::T0ExtinctionAtTransition { time: t },
            });
        }
        let top = next.beta[old];
        let tied: Vec<usize> = (0..next.beta.len())
            .filter(|&l| l != old && (next.beta[l] - top).abs() <= tol)
            .collect();
        let new = match tied.as_slice() {
            [one] => *one,
            [] => {
                return Err(EngineError::Inconsistent(format!(
                    "dominance change at t={t} but no trait ties with trait {old}"
                )))
            }
            _ => {
                return Ok(Advance::Stop {
                    state: next,
                    termination: Termination::T0TripleArgmax { time: t },
                })
            }
        };
        next.lstar = new;
        next.phase += 1;
        next.resident = self.is_resident(&next);

        // the new dominant trait must stay on top right after the switch
        let after = self.slope_vector(&next);
        let ties_overtake = (0..next.beta.len()).any(|l| {
            l != new && (next.beta[l] - next.beta[new]).abs() <= tol && after[l] > after[new] + RATE_EPS
        });
        if ties_overtake {
            return Ok(Advance::Stop {
                state: next,
                termination: Termination::T0NoAdmissibleDominant { time: t },
            });
        }
        Ok(Advance::Continue {
            state: next,
            phase_change: Some(new),
        })
    }
}
