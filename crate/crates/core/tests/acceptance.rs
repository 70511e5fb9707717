//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use hgt_core::bpi::{self, BpiParams};
use hgt_core::io::compare;
use hgt_core::limit::{self, EngineOptions, LimitTrajectory, Termination};
use hgt_core::outcome::{self, Classification};
use hgt_core::rng::rng_for;
use hgt_core::ssa::{self, PopulationState, SimConfig, Stepper};
use hgt_core::ModelParams;
use rand::Rng;
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(1e-300)
}

type Named<T> = (&'static str, fn() -> T);

fn run_engine(p: &ModelParams, t_max: f64) -> Result<LimitTrajectory, String> {
    limit::run(p, t_max, &EngineOptions::default()).map_err(|e| e.to_string())
}

fn beta_close(traj: &LimitTrajectory, t: f64, want: &[f64], what: &str) -> Result<(), String> {
    let got = traj.beta_at(t).map_err(|e| e.to_string())?;
    for (l, (g, w)) in got.iter().zip(want).enumerate() {
        check((g - w).abs() < 1e-9, format!("{what}: beta_{l}({t}) = {g}, expected {w}"))?;
    }
    Ok(())
}

fn phase_close(traj: &LimitTrajectory, k: usize, want: f64) -> Result<(), String> {
    let got = *traj
        .phase_times
        .get(k - 1)
        .ok_or_else(|| format!("s_{k} missing, have {:?}", traj.phase_times))?;
    check(rel_close(got, want, 1e-9), format!("s_{k} = {got}, expected {want}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let a = 1.0 / PI;
    let p = ModelParams::new(1.4, a, 1.5, 1.0).unwrap();
    let traj = run_engine(&p, 60.0)?;
    let s2 = 20.0 / PI;
    let expect = [10.0 / PI, s2, s2 + a / 1.3, s2 + 2.0 * a / 1.3];
    for (k, &s) in expect.iter().enumerate() {
        phase_close(&traj, k + 1, s)?;
    }
    let period = a * (10.0 + 2.0 / 1.3);
    let s = &traj.phase_times;
    check(s.len() >= 9, format!("only {} phase times before 60", s.len()))?;
    for k in 0..s.len() - 3 {
        check(
            rel_close(s[k + 3] - s[k], period, 1e-9),
            format!("s_{} - s_{} = {}, period {period}", k + 4, k + 1, s[k + 3] - s[k]),
        )?;
    }
    for i in 0..400 {
        let t = s[0] + (s[s.len() - 1] - period - s[0]) * i as f64 / 399.0;
        let x = traj.beta_at(t).unwrap();
        let y = traj.beta_at(t + period).unwrap();
        for (u, v) in x.iter().zip(&y) {
            check((u - v).abs() < 1e-9, format!("beta({t}) != beta({t}+period)"))?;
        }
    }
    let el = start.elapsed().as_secs_f64();
    check(el < 1.0, format!("runtime {el:.3}s"))?;
    Ok(format!("{} phase times, period {period:.9}, {el:.3}s", s.len()))
}

fn case_1() -> Result<(), String> {
    let p = ModelParams::new(1.4, 1.0 / PI, 1.0, 1.0).unwrap();
    let traj = run_engine(&p, 50.0)?;
    check(traj.phase_times.is_empty(), "case 1 has phase times")?;
    for t in [0.0, 1.0, 10.0, 49.0] {
        beta_close(&traj, t, &p.initial_exponents(), "case 1")?;
    }
    Ok(())
}

/// Phases 1 and 2, common to cases 2 and 3.
fn first_two_phases(traj: &LimitTrajectory, d: f64, a: f64, t: f64, what: &str) -> Result<(f64, f64), String> {
    let s1 = a / (t - d);
    let s2 = 2.0 * a / (t - d);
    phase_close(traj, 1, s1)?;
    phase_close(traj, 2, s2)?;
    beta_close(traj, s1, &[1.0, 1.0, 1.0 - a], what)?;
    beta_close(traj, s2, &[1.0 - a, 1.0, 1.0], what)?;
    Ok((s1, s2))
}

fn case_2ai() -> Result<(), String> {
    let (d, a, t) = (1.4, 1.0 / PI, 1.5);
    let traj = run_engine(&ModelParams::new(d, a, t, 1.0).unwrap(), 20.0)?;
    let (_, s2) = first_two_phases(&traj, d, a, t, "2(a)(i)")?;
    let s3 = s2 + a / (2.0 * d - t);
    phase_close(&traj, 3, s3)?;
    beta_close(&traj, s3, &[1.0, 1.0 - a * (t - d) / (2.0 * d - t), 1.0], "2(a)(i) s3")?;
    let s4 = s3 + a / (2.0 * d - t);
    phase_close(&traj, 4, s4)?;
    let mid = 0.5 * (s3 + s4);
    beta_close(
        &traj,
        mid,
        &[1.0, 1.0 - a * (t - d) / (2.0 * d - t) + (t - d) * (mid - s3), 1.0 - (2.0 * d - t) * (mid - s3)],
        "2(a)(i) phase 4",
    )?;
    beta_close(&traj, s4, &[1.0, 1.0, 1.0 - a], "2(a)(i) s4")
}

fn case_2aii() -> Result<(), String> {
    let (d, a, t) = (1.4, 1.0 / PI, 2.5);
    let traj = run_engine(&ModelParams::new(d, a, t, 1.0).unwrap(), 20.0)?;
    let (_, s2) = first_two_phases(&traj, d, a, t, "2(a)(ii)")?;
    let (u, w) = (t - d, 2.0 * d - t);
    let s3 = s2 + a / w;
    phase_close(&traj, 3, s3)?;
    beta_close(&traj, s3, &[1.0, 1.0 - a, 1.0], "2(a)(ii) s3")?;
    let s4 = s3 + a / u;
    phase_close(&traj, 4, s4)?;
    beta_close(&traj, s4, &[1.0, 1.0, 1.0 - a * w / u], "2(a)(ii) s4")?;
    let s5 = s4 + a * w / (u * u);
    phase_close(&traj, 5, s5)?;
    beta_close(&traj, s5, &[1.0 - a * w / u, 1.0, 1.0], "2(a)(ii) s5")?;
    let s6 = s5 + a / u;
    phase_close(&traj, 6, s6)?;
    beta_close(&traj, s6, &[1.0, 1.0 - a, 1.0], "2(a)(ii) s6")?;
    let period = 2.0 * a / u + a * w / (u * u);
    let s = &traj.phase_times;
    for k in 2..s.len() - 3 {
        check(rel_close(s[k + 3] - s[k], period, 1e-9), format!("2(a)(ii) period broken at s_{}", k + 1))?;
    }
    Ok(())
}

fn case_2bi() -> Result<(), String> {
    let (d, a, t) = (1.9, 0.5, 3.5);
    let traj = run_engine(&ModelParams::new(d, a, t, 1.0).unwrap(), 20.0)?;
    let (_, s2) = first_two_phases(&traj, d, a, t, "2(b)(i)")?;
    let x = 0.5;
    beta_close(
        &traj,
        s2 + x,
        &[
            (1.0 - a + (3.0 - t) * x).max(0.0),
            (1.0 - (t + d - 3.0) * x).max(1.0 - 2.0 * a + (3.0 - t) * x).max(0.0),
            1.0 - (2.0 * d - 3.0) * x,
        ],
        "2(b)(i) phase 3",
    )?;
    let s3 = s2 + 1.0 / (2.0 * d - 3.0);
    match traj.termination {
        Termination::GlobalExtinction { time } => check(rel_close(time, s3, 1e-9), format!("extinction at {time}, expected {s3}")),
        ref other => Err(format!("2(b)(i) ended with {other:?}")),
    }
}

fn case_2bii() -> Result<(), String> {
    let (d, a, t) = (1.9, 0.3, 2.2);
    let traj = run_engine(&ModelParams::new(d, a, t, 1.0).unwrap(), 20.0)?;
    let (_, s2) = first_two_phases(&traj, d, a, t, "2(b)(ii)")?;
    let w = 2.0 * d - t;
    let s3 = s2 + a / w;
    phase_close(&traj, 3, s3)?;
    let b0 = 1.0 - a * (2.0 * d - 3.0) / w;
    let b1 = (1.0 - a * (d + t - 3.0) / w).max(1.0 - a * (4.0 * d - t - 3.0) / w).max(0.0);
    beta_close(&traj, s3, &[b0, b1, b0], "2(b)(ii) s3")?;
    check(traj.dominant_indices.get(3) == Some(&0), format!("dominant after s3: {:?}", traj.dominant_indices))
}

fn case_3a() -> Result<(), String> {
    let (d, a, t) = (1.4, 1.0 / PI, 3.1);
    let traj = run_engine(&ModelParams::new(d, a, t, 1.0).unwrap(), 30.0)?;
    let (_, s2) = first_two_phases(&traj, d, a, t, "3(a)")?;
    for x in [0.1, 0.3, 1.0, 5.0, 20.0] {
        beta_close(
            &traj,
            s2 + x,
            &[
                (1.0 - a - (t - 2.0 * d) * x).max(0.0),
                (1.0 - (t - d) * x).max(1.0 - 2.0 * a - (t - 2.0 * d) * x).max(0.0),
                1.0,
            ],
            "3(a)",
        )?;
    }
    check(
        traj.dominant_indices.iter().skip(2).all(|&l| l == 2),
        format!("3(a) dominant traits {:?}", traj.dominant_indices),
    )
}

fn case_3b() -> Result<(), String> {
    let (d, a, t) = (1.9, 0.4, 4.3);
    let traj = run_engine(&ModelParams::new(d, a, t, 1.0).unwrap(), 30.0)?;
    let (_, s2) = first_two_phases(&traj, d, a, t, "3(b)")?;
    let s3 = s2 + 1.0 / (2.0 * d - 3.0);
    for x in [0.1, 0.3, 0.6, 1.0, 1.2] {
        beta_close(
            &traj,
            s2 + x,
            &[
                (1.0 - a + (3.0 - t) * x).max(0.0),
                (1.0 - (t + d - 3.0) * x).max(1.0 - 2.0 * a + (3.0 - t) * x).max(0.0),
                (1.0 - (2.0 * d - 3.0) * x).max(0.0),
            ],
            "3(b)",
        )?;
    }
    match traj.termination {
        Termination::GlobalExtinction { time } => check(rel_close(time, s3, 1e-9), format!("extinction at {time}, expected {s3}")),
        ref other => Err(format!("3(b) ended with {other:?}")),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cases: [Named<Result<(), String>>; 7] = [
        ("1", case_1),
        ("2(a)(i)", case_2ai),
        ("2(a)(ii)", case_2aii),
        ("2(b)(i)", case_2bi),
        ("2(b)(ii)", case_2bii),
        ("3(a)", case_3a),
        ("3(b)", case_3b),
    ];
    for (name, f) in cases {
        f().map_err(|e| format!("case {name}: {e}"))?;
    }
    let el = start.elapsed().as_secs_f64();
    check(el < 5.0, format!("runtime {el:.3}s"))?;
    Ok(format!("7 sub-cases, {el:.3}s"))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, t) in [(0.3, 1.0), (0.41, 2.8)] {
        let p = ModelParams::new(d, 1.0 / PI, t, 1.0).unwrap();
        let end = outcome::validity_window(&p).map_err(|e| e.to_string())?;
        let traj = run_engine(&p, end + 1.0)?;
        for i in 0..1000 {
            let s = end * i as f64 / 999.0;
            let x = traj.beta_at(s).map_err(|e| e.to_string())?;
            let y = outcome::closed_form_beta(&p, s).map_err(|e| e.to_string())?;
            for (u, v) in x.iter().zip(&y) {
                worst = worst.max((u - v).abs());
            }
        }
        let (_, k_bar) = outcome::indices(&p).unwrap();
        let k_hat = (3.0 / d).ceil() as u64;
        let last = if outcome::m0(&p).unwrap() > 0.0 { k_bar.min(k_hat) } else { k_hat - 1 };
        for k in 1..=last {
            let s = traj.phase_times[k as usize - 1];
            let want = outcome::phase_time(&p, k);
            check((s - want).abs() < 1e-9, format!("delta={d}: s_{k} = {s}, expected {want}"))?;
        }
    }
    check(worst < 1e-9, format!("max |engine - closed form| = {worst:e}"))?;
    Ok(format!("max error {worst:e}"))
}

fn criterion_4() -> Outcome {
    let a = 1.0 / PI;
    let p = ModelParams::new(0.3, a, 1.0, 1.0).unwrap();
    let r = outcome::classify(&p);
    check(r.classification == Classification::ReemergenceOfZero, format!("(0.3,1/pi,1): {:?}", r.classification))?;
    let tb = r.tau_bar.ok_or("tau_bar missing")?;
    let traj = run_engine(&p, 10.0)?;
    let back = traj
        .reemergences()
        .into_iter()
        .find(|e| e.trait_index == 0)
        .ok_or("engine: no return of beta_0 to 1")?;
    check((back.time - tb).abs() < 1e-9, format!("tau_bar {tb} vs engine {}", back.time))?;

    let p = ModelParams::new(0.41, a, 2.8, 1.0).unwrap();
    let r = outcome::classify(&p);
    check(r.classification == Classification::EvolutionarySuicide, format!("(0.41,1/pi,2.8): {:?}", r.classification))?;
    let traj = run_engine(&p, 50.0)?;
    let Termination::GlobalExtinction { time } = traj.termination else {
        return Err(format!("suicide case ended with {:?}", traj.termination));
    };
    check(traj.reemergences().is_empty(), format!("re-emergence before extinction at {time}"))?;

    let p = ModelParams::new(0.8, 0.3, 1.9, 1.0).unwrap();
    let r = outcome::classify(&p);
    check(r.classification == Classification::SubKReemergence, format!("(0.8,0.3,1.9): {:?}", r.classification))?;
    let traj = run_engine(&p, 30.0)?;
    let first = traj.reemergences().first().cloned().ok_or("no re-emergence")?;
    let sub = traj.sub_resident_intervals();
    check(
        sub.iter().any(|&(x, y)| y > x && x < first.time),
        format!("no sub-resident interval before {}: {sub:?}", first.time),
    )?;
    Ok(format!("tau_bar={tb:.9}, extinction at {time:.6}, first re-emergence {:.6}", first.time))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let p = ModelParams::new(1.4, 1.0 / PI, 1.5, 1.0).unwrap();
    let s1 = 10.0 / PI;
    let traj = run_engine(&p, 10.0)?;
    let window = (0.0, 0.9 * s1);
    let mut medians = Vec::new();
    let mut crossing = None;
    for (i, k) in [1_000u64, 10_000, 100_000].into_iter().enumerate() {
        let mut cfg = SimConfig::new(p, k, 2024 + i as u64, s1 + 0.5, 0.01).map_err(|e| e.to_string())?;
        cfg.replicas = 20;
        let (summary, _) = ssa::ensemble(&cfg, Some((&traj, window))).map_err(|e| e.to_string())?;
        medians.push(summary.median_sup_error.unwrap());
        if k == 100_000 {
            let report = compare(&summary.grid, &summary.median, &traj, window, f64::INFINITY, None)
                .map_err(|e| e.to_string())?;
            crossing = report.crossing_times.first().and_then(|c| c.estimate);
        }
    }
    let el = start.elapsed().as_secs_f64();
    let detail = format!("median sup errors {medians:?}, crossing at K=1e5 {crossing:?} vs s1={s1:.4}, {el:.0}s");
    check(medians.windows(2).all(|w| w[1] < w[0]), format!("errors not decreasing: {detail}"))?;
    let c = crossing.ok_or(format!("no crossing found: {detail}"))?;
    check((c - s1).abs() <= 0.1, format!("crossing off by {:.3}: {detail}", (c - s1).abs()))?;
    Ok(detail)
}

fn criterion_6() -> Outcome {
    let mut out = Vec::new();
    for tau in [0.0, 0.6] {
        let p = ModelParams::new(1.4, 0.8, tau, 0.5).unwrap();
        let mut cfg = SimConfig::new(p, 10_000, 77, 10.0, 1.0).map_err(|e| e.to_string())?;
        cfg.average_window = Some((2.0, 10.0));
        let trace = ssa::run(&cfg).map_err(|e| e.to_string())?;
        let avg = trace.time_average.unwrap()[0] / 10_000.0;
        let rel = (avg - 6.0).abs() / 6.0;
        out.push(format!("tau={tau}: {avg:.4}"));
        check(rel < 0.03, format!("tau={tau}: time-averaged N0/K = {avg}, off by {:.2}%", 100.0 * rel))?;
    }
    Ok(out.join(", "))
}

struct Moments {
    mean: f64,
    var: f64,
    se_mean: f64,
    se_var: f64,
}

fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    Moments {
        mean,
        var,
        se_mean: (var / n).sqrt(),
        se_var: ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).sqrt(),
    }
}

fn criterion_7() -> Outcome {
    let t = 1.5;
    let mut checked = 0;
    for k in [100.0, 1000.0] {
        for r in [-0.5, 0.0, 0.5] {
            for a in [-0.5, 0.0, 0.5] {
                // K^β = 10 keeps the initial size an exact integer
                let p = BpiParams {
                    b: 1.0 + r,
                    d: 1.0,
                    a,
                    c: 0.2,
                    beta: 1.0 / f64::log10(k),
                    k,
                    immigration: true,
                };
                let xs: Vec<f64> = (0..10_000u64)
                    .map(|i| bpi::simulate_abs(&p, t, &[], 99, i, u64::MAX).map(|x| x.0 as f64))
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?;
                let m = moments(&xs);
                let (em, ev) = (bpi::bpi_mean(&p, t), bpi::bpi_variance(&p, t));
                check(
                    (m.mean - em).abs() <= 3.0 * m.se_mean,
                    format!("K={k} r={r} a={a}: mean {} vs {em} (se {})", m.mean, m.se_mean),
                )?;
                check(
                    (m.var - ev).abs() <= 3.0 * m.se_var,
                    format!("K={k} r={r} a={a}: variance {} vs {ev} (se {})", m.var, m.se_var),
                )?;
                checked += 2;
            }
        }
    }
    // removable singularities against neighbours at distance 1e-6
    let h = 1e-6;
    let base = BpiParams {
        b: 1.5,
        d: 1.0,
        a: 0.5,
        c: 0.3,
        beta: 0.5,
        k: 100.0,
        immigration: true,
    };
    type Shift = fn(&mut BpiParams, f64);
    let singular: [(&str, BpiParams, Shift); 4] = [
        ("r=a", base, |p: &mut BpiParams, e: f64| p.a += e),
        ("r=a=0", BpiParams { b: 1.0, a: 0.0, ..base }, |p: &mut BpiParams, e: f64| p.a += e),
        ("r=0", BpiParams { b: 1.0, a: 0.7, ..base }, |p: &mut BpiParams, e: f64| {
            p.b += e / 2.0;
            p.d -= e / 2.0;
        }),
        ("a=2r", BpiParams { b: 1.25, ..base }, |p: &mut BpiParams, e: f64| p.a += e),
    ];
    // the symmetric average of the neighbours estimates the limit without the
    // first-order sensitivity to the parameter itself
    for (name, p, shift) in singular {
        let (mut lo, mut hi) = (p, p);
        shift(&mut lo, -h);
        shift(&mut hi, h);
        for (what, f) in [("mean", bpi::bpi_mean as fn(&BpiParams, f64) -> f64), ("variance", bpi::bpi_variance)] {
            let x = f(&p, 1.0);
            let limit = 0.5 * (f(&lo, 1.0) + f(&hi, 1.0));
            check(x.is_finite(), format!("{name}: {what} not finite"))?;
            check(rel_close(limit, x, 1e-6), format!("{name}: {what} {x} vs neighbours {limit}"))?;
        }
    }
    Ok(format!("{checked} moment checks, 4 singular branches"))
}

fn criterion_8() -> Outcome {
    let p = BpiParams {
        b: 1.0,
        d: 2.0,
        a: 0.0,
        c: 0.0,
        beta: 1.0,
        k: 2.0,
        immigration: false,
    };
    assert_eq!(p.initial_size(), 1);
    let n = 100_000u64;
    let mut alive = 0u64;
    for i in 0..n {
        let (z, _, _) = bpi::simulate_abs(&p, 1.0, &[], 8, i, u64::MAX).map_err(|e| e.to_string())?;
        alive += (z > 0) as u64;
    }
    let freq = alive as f64 / n as f64;
    let e = (-1f64).exp();
    let exact = e / (2.0 - e);
    let formula = bpi::bp_survival(1.0, 2.0, 1.0).map_err(|e| e.to_string())?;
    check((formula - exact).abs() < 1e-15, format!("formula {formula} vs {exact}"))?;
    check((freq - exact).abs() <= 0.004, format!("Monte Carlo {freq} vs {exact}"))?;
    Ok(format!("survival {freq:.5} vs {exact:.5}"))
}

fn criterion_9() -> Outcome {
    // fitness antisymmetry on every index pair
    for (d, t) in [(0.1, 0.3), (0.41, 2.8), (1.4, 1.5), (1.9, 4.3)] {
        let p = ModelParams::new(d, 0.5, t, 1.0).unwrap();
        let n = p.num_traits();
        for x in 0..=n {
            for y in 0..=n {
                let (u, v) = (p.fitness_resident(y, x).unwrap(), p.fitness_resident(x, y).unwrap());
                check((u + v).abs() < 1e-12, format!("S({y};{x}) + S({x};{y}) = {}", u + v))?;
            }
        }
    }
    // engine range and continuity on random generic parameters
    let mut rng = rng_for(31337, 0);
    let mut sets = 0;
    while sets < 200 {
        let p = ModelParams::new(
            rng.random_range(0.2..2.0),
            rng.random_range(0.05..0.95),
            rng.random_range(0.0..4.0),
            rng.random_range(0.5..2.0),
        )
        .unwrap();
        if !p.genericity_check().ok {
            continue;
        }
        sets += 1;
        let traj = run_engine(&p, 20.0).map_err(|e| format!("{p:?}: {e}"))?;
        let end = traj.end_time().min(20.0);
        for i in 0..=200 {
            let b = traj.beta_at((end * i as f64 / 200.0).min(end)).map_err(|e| format!("{p:?}: {e}"))?;
            check(b.iter().all(|x| (0.0..=1.0).contains(x)), format!("{p:?}: beta out of [0,1]: {b:?}"))?;
        }
        let jump = traj.max_junction_jump();
        // events closer than the engine tolerance are merged and snapped
        check(jump <= EngineOptions::default().tolerance, format!("{p:?}: jump {jump:e} between segments"))?;
    }
    // event conservation in the simulator
    let p = ModelParams::new(0.4, 0.5, 1.0, 1.0).unwrap();
    let k = 1000;
    let state = PopulationState {
        t: 0.0,
        counts: p.initial_condition(k).unwrap(),
    };
    let mut stepper = Stepper::new(p, k, state).unwrap();
    let mut rng = rng_for(5, 0);
    let mut events = 0;
    while events < 1_000_000 {
        let before = stepper.total() as i64;
        let Some(ch) = stepper.step(&mut rng) else { break };
        let after = stepper.total() as i64;
        let sum: u64 = stepper.state.counts.iter().sum();
        check(sum as i64 == after, "cached total out of sync")?;
        check((after - before).abs() <= 1 && after - before == ch.delta_total(), format!("event {ch:?} moved N by {}", after - before))?;
        events += 1;
    }
    check(events == 1_000_000, format!("population died after {events} events"))?;
    Ok("antisymmetry, 200 engine runs, 1e6 events".into())
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Named<Outcome>; 9] = [
        ("criterion 1: three-trait golden phases", criterion_1),
        ("criterion 2: three-trait branch coverage", criterion_2),
        ("criterion 3: closed-form oracle equivalence", criterion_3),
        ("criterion 4: classifier decisions", criterion_4),
        ("criterion 5: simulator convergence", criterion_5),
        ("criterion 6: resident equilibrium", criterion_6),
        ("criterion 7: BPI moments and branch continuity", criterion_7),
        ("criterion 8: extinction law", criterion_8),
        ("criterion 9: structural invariants", criterion_9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        match f() {
            Ok(detail) => println!("PASS {name} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
