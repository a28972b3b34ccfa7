use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ChainSpec;
use crate::error::{ChainError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderTarget {
    Epsilon,
    Delta,
    Coupling,
}

/// Static disorder of relative width `fraction` on the selected parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub fraction: f64,
    pub targets: Vec<DisorderTarget>,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn new(fraction: f64, targets: Vec<DisorderTarget>, seed: u64) -> Result<Self> {
        let spec = DisorderSpec { fraction, targets, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.fraction) {
            return Err(ChainError::InvalidParameter(format!(
                "disorder fraction must lie in [0, 1), got {}",
                self.fraction
            )));
        }
        Ok(())
    }

    fn targets(&self, t: DisorderTarget) -> bool {
        self.targets.contains(&t)
    }

    /// Same disorder with the seed replaced, used for ensemble members.
    pub fn with_seed(&self, seed: u64) -> Self {
        DisorderSpec { seed, ..self.clone() }
    }
}

/// Draws one static disorder realisation.
///
/// Every targeted parameter α is replaced by an independent uniform draw from
/// [(1 − d)α, (1 + d)α]. A bias sitting exactly at ε = 0 would collapse that
/// interval, so it is instead shifted by a uniform draw from [−dΔ_i, +dΔ_i].
/// Draws are taken in the order ε, Δ, K and only for targeted parameters.
pub fn sample_disorder(spec: &ChainSpec, dis: &DisorderSpec) -> ChainSpec {
    let d = dis.fraction;
    if d == 0.0 || dis.targets.is_empty() {
        return spec.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(dis.seed);
    let mut out = spec.clone();
    if dis.targets(DisorderTarget::Epsilon) {
        for (eps, &delta) in out.epsilon.iter_mut().zip(&spec.delta) {
            *eps = if *eps == 0.0 {
                rng.gen_range(-d * delta..=d * delta)
            } else {
                scaled(&mut rng, *eps, d)
            };
        }
    }
    if dis.targets(DisorderTarget::Delta) {
        for v in out.delta.iter_mut() {
            *v = scaled(&mut rng, *v, d);
        }
    }
    if dis.targets(DisorderTarget::Coupling) {
        for v in out.coupling.iter_mut() {
            *v = scaled(&mut rng, *v, d);
        }
    }
    out
}

fn scaled(rng: &mut ChaCha8Rng, alpha: f64, d: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let (a, b) = ((1.0 - d) * alpha, (1.0 + d) * alpha);
    rng.gen_range(a.min(b)..=a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use DisorderTarget::*;

    #[test]
    fn zero_fraction_is_identity() {
        let spec = ChainSpec::standard(5);
        let dis = DisorderSpec::new(0.0, vec![Epsilon, Delta, Coupling], 3).unwrap();
        assert_eq!(sample_disorder(&spec, &dis), spec);
    }

    #[test]
    fn stays_inside_interval_and_leaves_untargeted() {
        let spec = ChainSpec::standard(8);
        for seed in 0..50 {
            let dis = DisorderSpec::new(0.05, vec![Delta, Coupling], seed).unwrap();
            let out = sample_disorder(&spec, &dis);
            assert_eq!(out.epsilon, spec.epsilon);
            for (&v, &v0) in out.delta.iter().zip(&spec.delta) {
                assert!(v >= 0.95 * v0 && v <= 1.05 * v0);
            }
            for (&v, &v0) in out.coupling.iter().zip(&spec.coupling) {
                assert!(v >= 0.95 * v0 && v <= 1.05 * v0);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = ChainSpec::standard(6);
        let dis = DisorderSpec::new(0.1, vec![Epsilon, Delta, Coupling], 42).unwrap();
        assert_eq!(sample_disorder(&spec, &dis), sample_disorder(&spec, &dis));
        assert_ne!(sample_disorder(&spec, &dis), sample_disorder(&spec, &dis.with_seed(43)));
    }

    #[test]
    fn epsilon_at_degeneracy_is_shifted_additively() {
        let spec = ChainSpec::standard(6);
        let dis = DisorderSpec::new(0.05, vec![Epsilon], 9).unwrap();
        let out = sample_disorder(&spec, &dis);
        assert!(out.epsilon.iter().all(|e| e.abs() <= 0.05 * 0.1));
        assert!(out.epsilon.iter().any(|&e| e != 0.0));
        assert_eq!(out.delta, spec.delta);
    }

    #[test]
    fn empirical_mean_within_one_percent() {
        let spec = ChainSpec::homogeneous(1, 0.0, 0.1, 0.0);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|s| sample_disorder(&spec, &DisorderSpec::new(0.1, vec![Delta], s).unwrap()).delta[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.1).abs() < 0.01 * 0.1);
    }

    #[test]
    fn rejects_fraction_of_one() {
        assert!(DisorderSpec::new(1.0, vec![Delta], 0).is_err());
        assert!(DisorderSpec::new(-0.1, vec![Delta], 0).is_err());
    }
}
