//! Linear birth-death processes with time-inhomogeneous immigration.
//!
//! `Z` jumps `n → n+1` at rate `bn + K^c e^{as}` and `n → n−1` at rate `dn`,
//! started from `⌊K^β − 1⌋`. Moments, the large-`K` exponent and the
//! extinction law of the plain branching process are closed form; the
//! simulator is exact and serves as their Monte Carlo counterpart.

use crate::rng::{exp1, rng_for, uniform};
use serde::{Deserialize, Serialize};

/// Threshold used to pick the degenerate branches (`r = a`, `r = 0`, `a = 2r`).
pub const BRANCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BpiError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("event budget of {budget} exhausted at t={t}")]
    Budget { budget: u64, t: f64, count: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpiParams {
    pub b: f64,
    pub d: f64,
    pub a: f64,
    pub c: f64,
    pub beta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// With `false` the process is a plain branching process and `a`, `c` are ignored.
    #[serde(default = "yes")]
    pub immigration: bool,
}

fn yes() -> bool {
    true
}

impl BpiParams {
    pub fn validate(&self) -> Result<(), BpiError> {
        let finite = [self.b, self.d, self.a, self.c, self.beta, self.k].iter().all(|x| x.is_finite());
        if !finite {
            return Err(BpiError::Invalid("parameters must be finite".into()));
        }
        if self.b < 0.0 || self.d < 0.0 {
            return Err(BpiError::Invalid("rates b, d must be >= 0".into()));
        }
        if self.beta < 0.0 {
            return Err(BpiError::Invalid("beta must be >= 0".into()));
        }
        if self.k < 2.0 || self.k.fract() != 0.0 {
            return Err(BpiError::Invalid("K must be an integer >= 2".into()));
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.b - self.d
    }

    /// `K^c`, or 0 without immigration.
    pub fn immigration_scale(&self) -> f64 {
        if self.immigration {
            self.k.powf(self.c)
        } else {
            0.0
        }
    }

    /// `K^β − 1`, the initial value used by the moment formulas.
    pub fn initial_mean(&self) -> f64 {
        self.k.powf(self.beta) - 1.0
    }

    /// `⌊K^β − 1⌋`, snapping to the nearest integer when within rounding of it.
    pub fn initial_size(&self) -> u64 {
        let x = self.initial_mean();
        let r = x.round();
        if (x - r).abs() < 1e-9 * x.abs().max(1.0) {
            r.max(0.0) as u64
        } else {
            x.floor().max(0.0) as u64
        }
    }
}

/// `(e^{xt} − 1)/x`, equal to `t` at `x = 0`.
fn expm1_ratio(x: f64, t: f64) -> f64 {
    if x.abs() < BRANCH_TOLERANCE {
        t
    } else {
        (x * t).exp_m1() / x
    }
}

/// `(e^{xt} − 1 − xt)/x²`, equal to `t²/2` at `x = 0`.
fn expm1_second(x: f64, t: f64) -> f64 {
    let y = x * t;
    if y.abs() < 1e-4 {
        t * t * (0.5 + y / 6.0 + y * y / 24.0)
    } else {
        (y.exp_m1() - y) / (x * x)
    }
}

fn same(x: f64, y: f64) -> bool {
    (x - y).abs() < BRANCH_TOLERANCE * x.abs().max(y.abs()).max(1.0)
}

/// `E[Z_t]`.
pub fn bpi_mean(p: &BpiParams, t: f64) -> f64 {
    let (r, a) = (p.r(), p.a);
    let z0 = p.initial_mean();
    let kc = p.immigration_scale();
    if same(r, a) {
        (r * t).exp() * (z0 + kc * t)
    } else {
        // (z0 + Kc/(r−a))e^{rt} − Kc e^{at}/(r−a), written without cancellation
        z0 * (r * t).exp() + kc * (a * t).exp() * expm1_ratio(r - a, t)
    }
}

/// `Var[Z_t]`.
///
/// At `r = 0` the factor `(e^{2rt} − e^{rt})/r` is `t`; at `a = 2r` the factor
/// `(e^{at} − e^{2rt})/(a − 2r)` is its limit `t e^{2rt}`.
pub fn bpi_variance(p: &BpiParams, t: f64) -> f64 {
    let (b, d, r, a) = (p.b, p.d, p.r(), p.a);
    let z0 = p.initial_mean();
    let kc = p.immigration_scale();
    let s = b + d;
    // (e^{2rt} − e^{rt})/r
    let g = (r * t).exp() * expm1_ratio(r, t);
    let v = if same(r, a) {
        if r.abs() < BRANCH_TOLERANCE {
            (kc + 2.0 * b * z0) * t + b * kc * t * t
        } else {
            s * z0 * g + kc * g + s * kc * (r * t).exp() * expm1_second(r, t)
        }
    } else {
        // (e^{at} − e^{2rt})/(a − 2r)
        let h = (2.0 * r * t).exp() * expm1_ratio(a - 2.0 * r, t);
        s * (z0 + kc / (r - a)) * g + kc * (1.0 - s / (r - a)) * h
    };
    v.max(0.0)
}

/// Limit of `log(1 + Z_{t log K})/log K` as `K → ∞`.
pub fn bpi_limit_exponent(p: &BpiParams, t: f64) -> Result<f64, BpiError> {
    let r = p.r();
    if !p.immigration {
        if p.beta <= 0.0 {
            return Err(BpiError::OutOfScope("beta = 0 without immigration".into()));
        }
        return Ok((p.beta + r * t).max(0.0));
    }
    let (a, c, beta) = (p.a, p.c, p.beta);
    if c > beta {
        return Err(BpiError::OutOfScope(format!("c={c} > beta={beta}")));
    }
    if beta > 0.0 {
        return Ok((beta + r * t).max(c + a * t).max(0.0));
    }
    if c == 0.0 {
        return Err(BpiError::OutOfScope("beta = c = 0".into()));
    }
    // here β = 0 and c < 0
    if a > 0.0 {
        Ok((r.max(a) * (t - c.abs() / a)).max(0.0))
    } else {
        Ok(0.0)
    }
}

/// `P(T_ext > t)` for a single ancestor: `r e^{rt}/(b e^{rt} − d)`.
pub fn bp_survival(b: f64, d: f64, t: f64) -> Result<f64, BpiError> {
    if b < 0.0 || d < 0.0 || t < 0.0 {
        return Err(BpiError::Invalid("need b, d, t >= 0".into()));
    }
    let r = b - d;
    if r.abs() < BRANCH_TOLERANCE {
        return Err(BpiError::OutOfScope("critical case b = d".into()));
    }
    let v = if r > 0.0 {
        // divide through by e^{rt} to stay finite for large t
        r / (b - d * (-r * t).exp())
    } else {
        r * (r * t).exp() / (b * (r * t).exp() - d)
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Survival of the process started from `n` independent ancestors.
pub fn bp_survival_from(b: f64, d: f64, t: f64, n: u64) -> Result<f64, BpiError> {
    let q = 1.0 - bp_survival(b, d, t)?;
    Ok(1.0 - q.powf(n as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpiPath {
    /// Snapshot times in log-K units.
    pub grid: Vec<f64>,
    pub counts: Vec<u64>,
    pub terminal: u64,
    pub events: u64,
}

pub const DEFAULT_BPI_BUDGET: u64 = 1_000_000_000;

/// Exact simulation up to absolute time `t_end`, with snapshots at the given
/// absolute times (sorted, within `[0, t_end]`).
pub fn simulate_abs(
    p: &BpiParams,
    t_end: f64,
    snapshots: &[f64],
    seed: u64,
    replica: u64,
    budget: u64,
) -> Result<(u64, Vec<u64>, u64), BpiError> {
    p.validate()?;
    if !(t_end >= 0.0) {
        return Err(BpiError::Invalid("negative horizon".into()));
    }
    let mut rng = rng_for(seed, replica);
    let kc = p.immigration_scale();
    let mut n = p.initial_size();
    let mut t = 0.0;
    let mut events = 0u64;
    let mut snaps = Vec::with_capacity(snapshots.len());
    let mut next_snap = 0;
    loop {
        let lin = (p.b + p.d) * n as f64;
        let dt_lin = if lin > 0.0 { exp1(&mut rng) / lin } else { f64::INFINITY };
        // invert ∫_t^{t+u} K^c e^{as} ds = E
        let dt_imm = if kc > 0.0 {
            let e = exp1(&mut rng);
            let base = kc * (p.a * t).exp();
            if p.a.abs() < BRANCH_TOLERANCE {
                e / base
            } else {
                let arg = 1.0 + p.a * e / base;
                if arg > 0.0 {
                    arg.ln() / p.a
                } else {
                    f64::INFINITY
                }
            }
        } else {
            f64::INFINITY
        };
        let dt = dt_lin.min(dt_imm);
        let t_next = t + dt;
        while next_snap < snapshots.len() && snapshots[next_snap] < t_next.min(t_end + f64::EPSILON) {
            snaps.push(n);
            next_snap += 1;
        }
        if t_next > t_end {
            while next_snap < snapshots.len() {
                snaps.push(n);
                next_snap += 1;
            }
            return Ok((n, snaps, events));
        }
        if events >= budget {
            return Err(BpiError::Budget { budget, t, count: n });
        }
        t = t_next;
        events += 1;
        // an immigrant or a birth
        if dt_imm < dt_lin || uniform(&mut rng, p.b + p.d) < p.b {
            n += 1;
        } else {
            n -= 1;
        }
    }
}

/// Exact simulation on the log-K time scale, with snapshots every `grid_step`.
pub fn bpi_simulate(p: &BpiParams, t_end_logk: f64, grid_step: Option<f64>, seed: u64) -> Result<BpiPath, BpiError> {
    p.validate()?;
    let lk = p.k.ln();
    let grid: Vec<f64> = match grid_step {
        Some(h) if h > 0.0 => {
            let n = (t_end_logk / h + 1e-9).floor() as usize;
            (0..=n).map(|i| i as f64 * h).collect()
        }
        _ => Vec::new(),
    };
    let abs: Vec<f64> = grid.iter().map(|s| s * lk).collect();
    let (terminal, counts, events) = simulate_abs(p, t_end_logk * lk, &abs, seed, 0, DEFAULT_BPI_BUDGET)?;
    Ok(BpiPath {
        grid,
        counts,
        terminal,
        events,
    })
}
