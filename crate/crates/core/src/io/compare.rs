use super::IoError;
use crate::limit::LimitTrajectory;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub from: usize,
    pub to: usize,
    pub engine_time: f64,
    /// First upward zero of `β^K_to − β^K_from` after the previous phase time.
    pub estimate: Option<f64>,
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub window: (f64, f64),
    pub sup_error_per_trait: Vec<f64>,
    pub sup_error: f64,
    /// `(t, max_ℓ |β^K_ℓ(t) − β_ℓ(t)|)` at each grid time in the window.
    pub per_time_errors: Vec<(f64, f64)>,
    pub crossing_times: Vec<CrossingEstimate>,
    pub tolerance: f64,
    pub crossing_tolerance: Option<f64>,
    pub pass: bool,
}

fn upward_zero(grid: &[f64], diff: &[f64], from: f64, to: f64) -> Option<f64> {
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] >= from && grid[i] <= to).collect();
    idx.windows(2).find_map(|w| {
        let (i, j) = (w[0], w[1]);
        if diff[i] < 0.0 && diff[j] >= 0.0 {
            let f = -diff[i] / (diff[j] - diff[i]);
            Some(grid[i] + f * (grid[j] - grid[i]))
        } else {
            None
        }
    })
}

/// Compares finite-`K` exponents (typically replica medians) on `grid` with
/// a limit trajectory.
///
/// The sup error is taken over grid times in `window`. Crossing times are
/// estimated for every engine dominance change inside the part of the grid
/// covered by the trajectory.
pub fn compare(
    grid: &[f64],
    beta_k: &[Vec<f64>],
    trajectory: &LimitTrajectory,
    window: (f64, f64),
    tolerance: f64,
    crossing_tolerance: Option<f64>,
) -> Result<CompareReport, IoError> {
    let width = trajectory.num_traits() + 1;
    if grid.len() != beta_k.len() {
        return Err(IoError::Compare("grid and exponent rows differ in length".into()));
    }
    if beta_k.iter().any(|r| r.len() != width) {
        return Err(IoError::Compare(format!("expected {width} traits per row")));
    }
    let end = trajectory.end_time();
    let lo = window.0.max(0.0);
    let hi = window.1.min(end);
    let mut per_trait = vec![0.0f64; width];
    let mut per_time = Vec::new();
    for (t, row) in grid.iter().zip(beta_k) {
        if *t < lo || *t > hi {
            continue;
        }
        let beta = trajectory.beta_at(*t).map_err(|e| IoError::Compare(e.to_string()))?;
        let mut worst: f64 = 0.0;
        for (l, (x, y)) in row.iter().zip(&beta).enumerate() {
            let e = (x - y).abs();
            per_trait[l] = per_trait[l].max(e);
            worst = worst.max(e);
        }
        per_time.push((*t, worst));
    }
    if per_time.is_empty() {
        return Err(IoError::Compare(format!(
            "no grid time inside [{lo}, {hi}]; grid and trajectory do not overlap"
        )));
    }

    let grid_end = grid.last().copied().unwrap_or(0.0).min(end);
    let mut crossings = Vec::new();
    let mut prev = 0.0;
    for (k, &s) in trajectory.phase_times.iter().enumerate() {
        if s > grid_end {
            break;
        }
        let (Some(&from), Some(&to)) = (trajectory.dominant_indices.get(k), trajectory.dominant_indices.get(k + 1)) else {
            break;
        };
        let diff: Vec<f64> = beta_k.iter().map(|r| r[to] - r[from]).collect();
        let estimate = upward_zero(grid, &diff, prev, grid_end);
        crossings.push(CrossingEstimate {
            from,
            to,
            engine_time: s,
            estimate,
            error: estimate.map(|e| (e - s).abs()),
        });
        prev = s;
    }

    let sup = per_trait.iter().copied().fold(0.0, f64::max);
    let crossing_ok = crossing_tolerance.is_none_or(|tol| crossings.iter().all(|c| c.error.is_some_and(|e| e <= tol)));
    Ok(CompareReport {
        window: (lo, hi),
        sup_error_per_trait: per_trait,
        sup_error: sup,
        per_time_errors: per_time,
        crossing_times: crossings,
        tolerance,
        crossing_tolerance,
        pass: sup <= tolerance && crossing_ok,
    })
}
