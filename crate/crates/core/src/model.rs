//! Model parameters, demographic rates and fitness functions.
//!
//! Traits live on the grid `{0, δ, 2δ, …, Lδ}` with `L = ⌊4/δ⌋` and are always
//! addressed by their integer index. Every other module reads rates through
//! this one.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Relative band used to decide whether a float is an integer.
pub const INTEGER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("delta must satisfy 0 < delta < 4, got {0}")]
    Delta(f64),
    #[error("alpha must satisfy 0 < alpha < 1, got {0}")]
    Alpha(f64),
    #[error("tau must be finite and >= 0, got {0}")]
    Tau(f64),
    #[error("C must be finite and > 0, got {0}")]
    Comp(f64),
    #[error("trait index {index} out of range 0..={max}")]
    TraitIndex { index: usize, max: usize },
    #[error("carrying capacity K must be >= 2, got {0}")]
    CarryingCapacity(u64),
}

/// `|x - round(x)| < tol * max(1, |x|)`.
pub fn is_near_integer(x: f64) -> bool {
    (x - x.round()).abs() < INTEGER_TOLERANCE * x.abs().max(1.0)
}

/// Floor that snaps values sitting within tolerance below an integer.
pub(crate) fn tolerant_floor(x: f64) -> f64 {
    if is_near_integer(x) {
        x.round()
    } else {
        x.floor()
    }
}

pub(crate) fn tolerant_ceil(x: f64) -> f64 {
    if is_near_integer(x) {
        x.round()
    } else {
        x.ceil()
    }
}

/// `sign(0) = 0`.
fn sign(d: isize) -> f64 {
    match d.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Less => -1.0,
    }
}

/// The tuple (δ, α, τ, C).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    delta: f64,
    alpha: f64,
    tau: f64,
    comp: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    delta: f64,
    alpha: f64,
    tau: f64,
    #[serde(rename = "C")]
    comp: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = ModelError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        ModelParams::new(raw.delta, raw.alpha, raw.tau, raw.comp)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            delta: p.delta,
            alpha: p.alpha,
            tau: p.tau,
            comp: p.comp,
        }
    }
}

impl ModelParams {
    pub fn new(delta: f64, alpha: f64, tau: f64, comp: f64) -> Result<Self, ModelError> {
        if !(delta > 0.0 && delta < 4.0) {
            return Err(ModelError::Delta(delta));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ModelError::Alpha(alpha));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(ModelError::Tau(tau));
        }
        if !(comp.is_finite() && comp > 0.0) {
            return Err(ModelError::Comp(comp));
        }
        Ok(ModelParams {
            delta,
            alpha,
            tau,
            comp,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Competition coefficient `C`.
    pub fn comp(&self) -> f64 {
        self.comp
    }

    /// Largest trait index `L = ⌊4/δ⌋`.
    pub fn num_traits(&self) -> usize {
        tolerant_floor(4.0 / self.delta) as usize
    }

    /// Copy with a different competition coefficient.
    pub fn with_comp(&self, comp: f64) -> Result<Self, ModelError> {
        ModelParams::new(self.delta, self.alpha, self.tau, comp)
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self, ModelError> {
        ModelParams::new(self.delta, self.alpha, tau, self.comp)
    }

    fn check(&self, ell: usize) -> Result<(), ModelError> {
        let max = self.num_traits();
        if ell > max {
            Err(ModelError::TraitIndex { index: ell, max })
        } else {
            Ok(())
        }
    }

    /// Trait value `ℓδ`.
    pub fn trait_value(&self, ell: usize) -> f64 {
        ell as f64 * self.delta
    }

    /// `b(ℓδ) = 4 − ℓδ`, clamped at zero for the grid endpoint `Lδ = 4`.
    pub fn birth_rate(&self, ell: usize) -> Result<f64, ModelError> {
        self.check(ell)?;
        Ok(self.birth_rate_unchecked(ell))
    }

    pub(crate) fn birth_rate_unchecked(&self, ell: usize) -> f64 {
        (4.0 - self.trait_value(ell)).max(0.0)
    }

    /// Invasion fitness `S(y; x) = x − y + τ·sign(y − x)` of trait `mutant` in a
    /// population at equilibrium with resident `resident`.
    pub fn fitness_resident(&self, mutant: usize, resident: usize) -> Result<f64, ModelError> {
        self.check(mutant)?;
        self.check(resident)?;
        Ok(self.fitness_resident_unchecked(mutant, resident))
    }

    pub(crate) fn fitness_resident_unchecked(&self, mutant: usize, resident: usize) -> f64 {
        if mutant == resident {
            return 0.0;
        }
        let gap = resident as isize - mutant as isize;
        gap as f64 * self.delta + self.tau * sign(-gap)
    }

    /// Fitness `Ŝ(y; x) = 3 − y + τ·sign(y − x)` in a population of size `o(K)`
    /// with dominant trait `dominant`.
    pub fn fitness_dominant(&self, mutant: usize, dominant: usize) -> Result<f64, ModelError> {
        self.check(mutant)?;
        self.check(dominant)?;
        Ok(self.fitness_dominant_unchecked(mutant, dominant))
    }

    pub(crate) fn fitness_dominant_unchecked(&self, mutant: usize, dominant: usize) -> f64 {
        let d = mutant as isize - dominant as isize;
        3.0 - self.trait_value(mutant) + self.tau * sign(d)
    }

    /// Scaled logistic equilibrium `n̄(ℓδ) = (3 − ℓδ)/C`. Negative values mean
    /// the trait cannot sustain itself alone.
    pub fn equilibrium_density(&self, ell: usize) -> Result<f64, ModelError> {
        self.check(ell)?;
        Ok((3.0 - self.trait_value(ell)) / self.comp)
    }

    /// Mutation probability per birth, `K^{-α}`.
    pub fn mutation_probability(&self, k: u64) -> f64 {
        (k as f64).powf(-self.alpha)
    }

    /// Abundances at time zero: `⌊3K/C⌋` residents at trait 0 and
    /// `⌊K^{1−ℓα}⌋` at trait ℓ for `1 ≤ ℓ ≤ ⌊1/α⌋`.
    pub fn initial_condition(&self, k: u64) -> Result<Vec<u64>, ModelError> {
        if k < 2 {
            return Err(ModelError::CarryingCapacity(k));
        }
        let kf = k as f64;
        let cutoff = tolerant_floor(1.0 / self.alpha) as usize;
        let counts = (0..=self.num_traits())
            .map(|ell| {
                if ell == 0 {
                    tolerant_floor(3.0 * kf / self.comp) as u64
                } else if ell <= cutoff {
                    tolerant_floor(kf.powf(1.0 - ell as f64 * self.alpha)).max(0.0) as u64
                } else {
                    0
                }
            })
            .collect();
        Ok(counts)
    }

    /// Limit exponents at time zero, `(1 − ℓα)·1{ℓ < 1/α}`.
    pub fn initial_exponents(&self) -> Vec<f64> {
        (0..=self.num_traits())
            .map(|ell| {
                let v = 1.0 - ell as f64 * self.alpha;
                if v > INTEGER_TOLERANCE {
                    v
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn genericity_check(&self) -> GenericityReport {
        let mut violations = Vec::new();
        let d = self.delta;
        if is_near_integer(3.0 / d) {
            violations.push(Violation::ThreeOverDeltaInteger);
        }
        if is_near_integer((self.tau + 3.0) / d) {
            violations.push(Violation::TauPlusThreeOverDeltaInteger);
        }
        if is_near_integer((self.tau - 3.0) / d) {
            violations.push(Violation::TauMinusThreeOverDeltaInteger);
        }
        if d >= 4.0 / 3.0 - INTEGER_TOLERANCE {
            violations.push(Violation::DeltaAtLeastFourThirds);
        }
        if !(d < self.tau && self.tau < 3.0) {
            violations.push(Violation::TauOutsideDeltaThree);
        }
        let ok = violations.iter().all(|v| !v.breaks_convergence_theorem());
        GenericityReport { ok, violations }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta={} alpha={} tau={} C={}",
            self.delta, self.alpha, self.tau, self.comp
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    ThreeOverDeltaInteger,
    TauPlusThreeOverDeltaInteger,
    TauMinusThreeOverDeltaInteger,
    /// Only relevant for the re-emergence criterion.
    DeltaAtLeastFourThirds,
    /// Only relevant for the re-emergence criterion.
    TauOutsideDeltaThree,
}

impl Violation {
    /// Whether the condition is a hypothesis of the convergence result
    /// (as opposed to the narrower re-emergence criterion).
    pub fn breaks_convergence_theorem(&self) -> bool {
        matches!(
            self,
            Violation::ThreeOverDeltaInteger
                | Violation::TauPlusThreeOverDeltaInteger
                | Violation::TauMinusThreeOverDeltaInteger
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Violation::ThreeOverDeltaInteger => "3/delta is an integer",
            Violation::TauPlusThreeOverDeltaInteger => "(tau+3)/delta is an integer",
            Violation::TauMinusThreeOverDeltaInteger => "(tau-3)/delta is an integer",
            Violation::DeltaAtLeastFourThirds => "delta >= 4/3",
            Violation::TauOutsideDeltaThree => "tau outside (delta, 3)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    /// True when none of the convergence-theorem conditions is violated.
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl GenericityReport {
    pub fn reemergence_criterion_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(delta: f64, alpha: f64, tau: f64, comp: f64) -> ModelParams {
        ModelParams::new(delta, alpha, tau, comp).unwrap()
    }

    #[test]
    fn birth_rates() {
        let m = p(1.4, 0.3, 1.5, 1.0);
        assert_eq!(m.birth_rate(0).unwrap(), 4.0);
        assert!((m.birth_rate(2).unwrap() - 1.2).abs() < 1e-12);
        assert!(matches!(
            m.birth_rate(3),
            Err(ModelError::TraitIndex { index: 3, max: 2 })
        ));
        let fine = p(0.1, 0.3, 0.6, 1.0);
        assert_eq!(fine.num_traits(), 40);
        assert_eq!(fine.birth_rate(40).unwrap(), 0.0);
    }

    #[test]
    fn resident_fitness_examples() {
        let m = p(1.4, 1.0 / PI, 1.5, 1.0);
        assert!((m.fitness_resident(1, 0).unwrap() - 0.1).abs() < 1e-12);
        assert!((m.fitness_resident(2, 0).unwrap() + 1.3).abs() < 1e-12);
        for l in 0..=2 {
            assert_eq!(m.fitness_resident(l, l).unwrap(), 0.0);
        }
    }

    #[test]
    fn dominant_fitness_examples() {
        let m = p(1.4, 1.0 / PI, 1.5, 1.0);
        assert!((m.fitness_dominant(0, 2).unwrap() - 1.5).abs() < 1e-12);
        assert!((m.fitness_dominant(2, 2).unwrap() - 0.2).abs() < 1e-12);
        let m = p(1.9, 0.4, 3.43, 1.0);
        assert!((m.fitness_dominant(1, 2).unwrap() + 2.33).abs() < 1e-12);
    }

    #[test]
    fn fitness_identities_on_grid() {
        for &delta in &[0.1, 0.37, 1.4, 1.9] {
            let m = p(delta, 0.3, 0.77, 1.0);
            let l = m.num_traits();
            for y in 0..=l {
                for x in 0..=l {
                    let s = m.fitness_resident(y, x).unwrap();
                    let s_rev = m.fitness_resident(x, y).unwrap();
                    assert_eq!(s + s_rev, 0.0, "antisymmetry at ({y},{x})");
                    let hat = m.fitness_dominant(y, x).unwrap();
                    let expect = s + (3.0 - m.trait_value(x));
                    assert!((hat - expect).abs() < 1e-12, "Ŝ = S + 3 − x at ({y},{x})");
                }
            }
        }
    }

    #[test]
    fn equilibria() {
        let m = p(1.9, 0.3, 1.0, 0.5);
        assert!((m.equilibrium_density(0).unwrap() - 6.0).abs() < 1e-12);
        assert!((m.equilibrium_density(2).unwrap() + 1.6).abs() < 1e-12);
        let m = p(1.5, 0.3, 1.0, 0.5);
        assert!(m.equilibrium_density(2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn initial_condition_examples() {
        let m = p(0.1, 0.5, 0.6, 0.5);
        let n = m.initial_condition(10_000).unwrap();
        assert_eq!(&n[..4], &[60_000, 100, 1, 0]);
        assert!(n[3..].iter().all(|&c| c == 0));

        let m = p(0.3, 0.9, 0.6, 1.0);
        let n = m.initial_condition(1_000_000).unwrap();
        assert!(n[0] > 0 && n[1] > 0);
        assert!(n[2..].iter().all(|&c| c == 0));

        assert_eq!(
            m.initial_condition(1),
            Err(ModelError::CarryingCapacity(1))
        );
    }

    #[test]
    fn initial_exponents_approach_limit() {
        let m = p(0.3, 1.0 / PI, 1.0, 1.0);
        let limit = m.initial_exponents();
        let mut prev = f64::INFINITY;
        for &k in &[1e4f64, 1e8, 1e16] {
            let n = m.initial_condition(k as u64).unwrap();
            let err = n
                .iter()
                .zip(&limit)
                .skip(1)
                .map(|(&c, &b)| ((1.0 + c as f64).ln() / k.ln() - b).abs())
                .fold(0.0, f64::max);
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn genericity_examples() {
        let r = p(0.1, 0.3, 0.6, 1.0).genericity_check();
        assert!(!r.ok);
        assert!(r.violations.contains(&Violation::ThreeOverDeltaInteger));

        let r = p(1.4, 0.3, 1.5, 1.0).genericity_check();
        assert!(r.ok);
        assert!(r.violations.contains(&Violation::DeltaAtLeastFourThirds));
        assert!(!r.reemergence_criterion_ok());

        let r = p(0.41, 0.3, 2.8, 1.0).genericity_check();
        assert!(r.ok);
        assert!(r.reemergence_criterion_ok());
    }

    #[test]
    fn rejects_invalid_params() {
        assert_eq!(ModelParams::new(5.0, 0.5, 1.0, 1.0), Err(ModelError::Delta(5.0)));
        assert_eq!(ModelParams::new(1.0, 1.0, 1.0, 1.0), Err(ModelError::Alpha(1.0)));
        assert_eq!(ModelParams::new(1.0, 0.5, -1.0, 1.0), Err(ModelError::Tau(-1.0)));
        assert_eq!(ModelParams::new(1.0, 0.5, 1.0, 0.0), Err(ModelError::Comp(0.0)));
    }

    #[test]
    fn json_schema() {
        let m: ModelParams =
            serde_json::from_str(r#"{"delta":1.4,"alpha":0.5,"tau":1.5,"C":0.5}"#).unwrap();
        assert_eq!(m.comp(), 0.5);
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(back, r#"{"delta":1.4,"alpha":0.5,"tau":1.5,"C":0.5}"#);
        let err = serde_json::from_str::<ModelParams>(
            r#"{"delta":1.4,"alpha":0.5,"tau":1.5,"C":0.5,"gamma":1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("gamma"));
        let err =
            serde_json::from_str::<ModelParams>(r#"{"delta":5,"alpha":0.5,"tau":1.5,"C":0.5}"#)
                .unwrap_err();
        assert!(err.to_string().contains("0 < delta < 4"));
    }
}
