//! Closed-form outcome criteria for `δ < τ < 3`, `δ < 4/3`.
//!
//! Along the first phases trait `kδ` becomes resident at `s_k = kα/(τ−δ)` and
//! the exponents are explicit. The minimum `m₀` reached by `β₀` decides
//! between re-emergence of trait 0 and evolutionary suicide. Nothing here
//! simulates, so the module doubles as an independent oracle for the limit
//! engine.

use crate::model::{is_near_integer, tolerant_ceil, tolerant_floor, ModelParams, Violation, INTEGER_TOLERANCE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OutcomeError {
    #[error("requires delta < tau (delta={delta}, tau={tau})")]
    TauNotAboveDelta { delta: f64, tau: f64 },
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("tau_bar is undefined when m0 <= 0 (m0={0})")]
    TauBarUndefined(f64),
    #[error("s={s} outside the closed-form validity window [0, {end}]")]
    OutsideWindow { s: f64, end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason")]
pub enum Classification {
    /// Trait 0 re-emerges first and the population stays of order `K` until then.
    ReemergenceOfZero,
    /// Trait 0 is lost and the whole population dies out before any re-emergence.
    EvolutionarySuicide,
    /// Some trait below 3 re-emerges, after a stretch where the population is `o(K)`.
    SubKReemergence,
    OutOfScope(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub k_tilde: Option<u64>,
    pub k_bar: Option<u64>,
    pub m0: Option<f64>,
    pub tau_bar: Option<f64>,
    pub classification: Classification,
    /// Set for [`Classification::SubKReemergence`]: at some time before the
    /// first re-emergence every exponent is below 1.
    pub sub_resident_phase_expected: bool,
    /// Genericity conditions of the convergence theorem that fail.
    pub warnings: Vec<Violation>,
}

impl OutcomeReport {
    pub fn in_scope(&self) -> bool {
        !matches!(self.classification, Classification::OutOfScope(_))
    }
}

/// `(k̃, k̄) = (⌈τ/δ⌉, ⌊2τ/δ⌋)`.
pub fn indices(params: &ModelParams) -> Result<(u64, u64), OutcomeError> {
    let (d, t) = (params.delta(), params.tau());
    if t - d <= INTEGER_TOLERANCE * d.max(1.0) {
        return Err(OutcomeError::TauNotAboveDelta { delta: d, tau: t });
    }
    Ok((tolerant_ceil(t / d) as u64, tolerant_floor(2.0 * t / d) as u64))
}

/// Hypotheses of the criterion, with the boundaries excluded.
fn check_scope(params: &ModelParams) -> Result<(), OutcomeError> {
    let (d, t) = (params.delta(), params.tau());
    let tol = INTEGER_TOLERANCE;
    let conds = [
        (t - d, "tau = delta", "tau < delta"),
        (3.0 - t, "tau = 3", "tau > 3"),
        (4.0 / 3.0 - d, "delta = 4/3", "delta > 4/3"),
    ];
    for (margin, on_boundary, outside) in conds {
        if margin.abs() <= tol {
            return Err(OutcomeError::OutOfScope(format!("boundary: {on_boundary}")));
        }
        if margin < 0.0 {
            return Err(OutcomeError::OutOfScope(format!("hypothesis: {outside}")));
        }
    }
    Ok(())
}

/// Start of phase `k`, `s_k = kα/(τ−δ)`.
pub fn phase_time(params: &ModelParams, k: u64) -> f64 {
    k as f64 * params.alpha() / (params.tau() - params.delta())
}

/// `1 − α(n−1)/(τ−δ)·(τ − nδ/2)`: value of `β_{k−n}` at `s_k`.
fn lag_value(params: &ModelParams, n: f64) -> f64 {
    let (a, d, t) = (params.alpha(), params.delta(), params.tau());
    1.0 - a * (n - 1.0) / (t - d) * (t - 0.5 * n * d)
}

/// Minimal value of `β₀` along the first phases.
pub fn m0(params: &ModelParams) -> Result<f64, OutcomeError> {
    check_scope(params)?;
    let (k_tilde, _) = indices(params)?;
    Ok(lag_value(params, k_tilde as f64))
}

/// Time at which `β₀` returns to 1, defined when `m₀ > 0`.
pub fn tau_bar(params: &ModelParams) -> Result<f64, OutcomeError> {
    let m = m0(params)?;
    if m <= 0.0 {
        return Err(OutcomeError::TauBarUndefined(m));
    }
    let (_, k_bar) = indices(params)?;
    let (a, d, t) = (params.alpha(), params.delta(), params.tau());
    let kb = k_bar as f64;
    Ok(phase_time(params, k_bar) + a * (kb - 1.0) / (t - d) * (t - 0.5 * kb * d) / (kb * d - t))
}

pub fn classify(params: &ModelParams) -> OutcomeReport {
    let warnings: Vec<Violation> = params
        .genericity_check()
        .violations
        .into_iter()
        .filter(Violation::breaks_convergence_theorem)
        .collect();
    let out_of_scope = |reason: String, k: Option<(u64, u64)>, m0: Option<f64>| OutcomeReport {
        k_tilde: k.map(|k| k.0),
        k_bar: k.map(|k| k.1),
        m0,
        tau_bar: None,
        classification: Classification::OutOfScope(reason),
        sub_resident_phase_expected: false,
        warnings: warnings.clone(),
    };

    if let Err(e) = check_scope(params) {
        let reason = match e {
            OutcomeError::OutOfScope(r) => r,
            other => other.to_string(),
        };
        return out_of_scope(reason, indices(params).ok(), None);
    }
    let k = indices(params).expect("tau > delta checked");
    let m = lag_value(params, k.0 as f64);
    if m.abs() <= INTEGER_TOLERANCE {
        return out_of_scope("boundary: m0 = 0".into(), Some(k), Some(m));
    }
    if m < 0.0 {
        return OutcomeReport {
            k_tilde: Some(k.0),
            k_bar: Some(k.1),
            m0: Some(m),
            tau_bar: None,
            classification: Classification::EvolutionarySuicide,
            sub_resident_phase_expected: false,
            warnings,
        };
    }
    let top = k.1 as f64 * params.delta();
    if (top - 3.0).abs() <= INTEGER_TOLERANCE {
        return out_of_scope("boundary: k_bar * delta = 3".into(), Some(k), Some(m));
    }
    let sub_k = top > 3.0;
    OutcomeReport {
        k_tilde: Some(k.0),
        k_bar: Some(k.1),
        m0: Some(m),
        tau_bar: tau_bar(params).ok(),
        classification: if sub_k {
            Classification::SubKReemergence
        } else {
            Classification::ReemergenceOfZero
        },
        sub_resident_phase_expected: sub_k,
        warnings,
    }
}

/// Right end of the window on which [`closed_form_beta`] is valid.
///
/// When `m₀ > 0` and `k̄δ < 3` this is `τ̄`, which covers the final phase
/// `[s_k̄, τ̄]`. Otherwise it is `s_{⌈3/δ⌉}`, when a trait above 3 takes over.
pub fn validity_window(params: &ModelParams) -> Result<f64, OutcomeError> {
    let m = m0(params)?;
    if m.abs() <= INTEGER_TOLERANCE {
        return Err(OutcomeError::OutOfScope("boundary: m0 = 0".into()));
    }
    let (_, k_bar) = indices(params)?;
    let k_hat = first_trait_above_three(params);
    if m > 0.0 && (k_bar as f64) * params.delta() < 3.0 {
        tau_bar(params)
    } else {
        Ok(phase_time(params, k_hat))
    }
}

fn first_trait_above_three(params: &ModelParams) -> u64 {
    let x = 3.0 / params.delta();
    if is_near_integer(x) {
        x.round() as u64 + 1
    } else {
        x.ceil() as u64
    }
}

/// Closed-form exponents at time `s` along the first phases.
pub fn closed_form_beta(params: &ModelParams, s: f64) -> Result<Vec<f64>, OutcomeError> {
    let end = validity_window(params)?;
    if !(s >= 0.0 && s <= end + INTEGER_TOLERANCE) {
        return Err(OutcomeError::OutsideWindow { s, end });
    }
    let m = m0(params)?;
    let (k_tilde, k_bar) = indices(params)?;
    let k_hat = first_trait_above_three(params);
    let (a, d, t) = (params.alpha(), params.delta(), params.tau());
    let step = a / (t - d);

    let last_phase = if m > 0.0 && (k_bar as f64) * d < 3.0 {
        k_bar
    } else {
        k_hat - 1
    };
    let k = ((s / step).floor().max(0.0) as u64).min(last_phase);
    let since = s - phase_time(params, k);
    let final_phase = m > 0.0 && k == k_bar;

    let beta = (0..=params.num_traits() as u64)
        .map(|ell| {
            if ell == k {
                return 1.0;
            }
            if ell > k {
                let v = 1.0 - (ell - k) as f64 * a + (t - d) * since;
                return v.max(0.0);
            }
            let n = (k - ell) as f64;
            let own = lag_value(params, n) - (t - n * d) * since;
            if m > 0.0 {
                if final_phase {
                    let from_zero = 1.0 - ell as f64 * a - a * (k as f64 - 1.0) / (t - d) * (t - 0.5 * k as f64 * d)
                        - (t - k as f64 * d) * since;
                    own.max(from_zero)
                } else {
                    own
                }
            } else if ell + k_tilde <= k {
                0.0
            } else {
                own.max(0.0)
            }
        })
        .collect();
    Ok(beta)
}
