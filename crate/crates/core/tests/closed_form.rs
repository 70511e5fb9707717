use hgt_core::limit::{self, EngineOptions, Termination};
use hgt_core::outcome::{self, Classification};
use hgt_core::ModelParams;
use std::f64::consts::PI;

fn check_against_closed_form(delta: f64, tau: f64) -> f64 {
    let p = ModelParams::new(delta, 1.0 / PI, tau, 1.0).unwrap();
    let end = outcome::validity_window(&p).unwrap();
    let traj = limit::run(&p, end + 1.0, &EngineOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=1000 {
        let s = end * i as f64 / 1000.0;
        let a = traj.beta_at(s).unwrap();
        let b = outcome::closed_form_beta(&p, s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

#[test]
fn engine_matches_closed_form_positive_minimum() {
    let err = check_against_closed_form(0.3, 1.0);
    assert!(err < 1e-9, "max error {err}");
}

#[test]
fn engine_matches_closed_form_negative_minimum() {
    let err = check_against_closed_form(0.41, 2.8);
    assert!(err < 1e-9, "max error {err}");
}

#[test]
fn phase_times_follow_linear_law() {
    for (delta, tau) in [(0.3, 1.0), (0.41, 2.8), (0.8, 1.9)] {
        let p = ModelParams::new(delta, 1.0 / PI, tau, 1.0).unwrap();
        let (_, k_bar) = outcome::indices(&p).unwrap();
        let k_hat = (3.0 / delta).ceil() as u64;
        let report = outcome::classify(&p);
        let last = match report.classification {
            Classification::ReemergenceOfZero => k_bar.min(k_hat),
            _ => k_hat - 1,
        };
        let traj = limit::run(&p, 20.0, &EngineOptions::default()).unwrap();
        for k in 1..=last {
            let s = traj.phase_times[k as usize - 1];
            assert!((s - outcome::phase_time(&p, k)).abs() < 1e-9, "k={k}: {s}");
        }
    }
}

#[test]
fn reemergence_time_matches_tau_bar() {
    let p = ModelParams::new(0.3, 1.0 / PI, 1.0, 1.0).unwrap();
    let tb = outcome::tau_bar(&p).unwrap();
    let traj = limit::run(&p, 10.0, &EngineOptions::default()).unwrap();
    let first = traj.reemergences().into_iter().find(|r| r.trait_index == 0).unwrap();
    assert!((first.time - tb).abs() < 1e-9, "{} vs {tb}", first.time);
}

#[test]
fn suicide_goes_extinct_without_reemergence() {
    let p = ModelParams::new(0.41, 1.0 / PI, 2.8, 1.0).unwrap();
    let traj = limit::run(&p, 50.0, &EngineOptions::default()).unwrap();
    let Termination::GlobalExtinction { time } = traj.termination else {
        panic!("{:?}", traj.termination)
    };
    assert!(traj.reemergences().iter().all(|r| r.time > time));
}

#[test]
fn sub_k_phase_before_reemergence() {
    let p = ModelParams::new(0.8, 0.3, 1.9, 1.0).unwrap();
    let traj = limit::run(&p, 30.0, &EngineOptions::default()).unwrap();
    let first = traj.reemergences().first().cloned().expect("a re-emergence");
    let sub = traj.sub_resident_intervals();
    assert!(sub.iter().any(|&(a, b)| b > a && a < first.time), "{sub:?} {first:?}");
}
