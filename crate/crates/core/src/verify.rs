//! Seeded cross-check of the transform path against brute-force enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distance::{brute_force_min_distance, min_distance};
use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub min_degree: u32,
    pub max_degree: u32,
    /// Lengths are drawn from `[p + 1, p + max_extra]`.
    pub max_extra: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            min_degree: 4,
            max_degree: 12,
            max_extra: 20,
            samples: 500,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sample {
    pub poly: Gf2Poly,
    pub n: usize,
    pub fast: u32,
    pub oracle: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub samples: Vec<Sample>,
}

impl VerifyReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.fast != s.oracle)
    }

    pub fn passed(&self) -> bool {
        self.mismatches().next().is_none()
    }
}

/// The `(g, n)` pairs a config draws, in order.
pub fn sample_set(config: &VerifyConfig) -> Result<Vec<(Gf2Poly, usize)>> {
    if config.min_degree < 1 || config.min_degree > config.max_degree {
        return Err(Error::InvalidConfig(format!(
            "degree range {}..={} is empty or starts below 1",
            config.min_degree, config.max_degree
        )));
    }
    if config.max_extra < 1 {
        return Err(Error::InvalidConfig("length range must allow at least p + 1".into()));
    }
    if config.max_extra > crate::distance::MAX_BRUTE_FORCE_DIMENSION + 1 {
        return Err(Error::InvalidConfig(format!(
            "lengths beyond p + {} are too large to enumerate",
            crate::distance::MAX_BRUTE_FORCE_DIMENSION + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.samples)
        .map(|_| {
            let p = rng.gen_range(config.min_degree..=config.max_degree);
            let middle: u64 = rng.gen::<u64>() & ((1u64 << p) - 1) & !1;
            let g = Gf2Poly::new((1u64 << p) | middle | 1)?;
            let n = p as usize + rng.gen_range(1..=config.max_extra);
            Ok((g, n))
        })
        .collect()
}

pub fn verify(config: &VerifyConfig) -> Result<VerifyReport> {
    verify_with(config, min_distance)
}

/// Checks `fast` against the brute-force oracle on the seeded sample set.
pub fn verify_with<F>(config: &VerifyConfig, mut fast: F) -> Result<VerifyReport>
where
    F: FnMut(Gf2Poly, usize) -> Result<u32>,
{
    let samples = sample_set(config)?
        .into_iter()
        .map(|(poly, n)| {
            Ok(Sample {
                poly,
                n,
                fast: fast(poly, n)?,
                oracle: brute_force_min_distance(poly, n)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(VerifyReport { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_fixes_the_sample_set() {
        let cfg = VerifyConfig { samples: 50, ..Default::default() };
        assert_eq!(sample_set(&cfg).unwrap(), sample_set(&cfg).unwrap());
        let other = VerifyConfig { seed: 2, ..cfg.clone() };
        assert_ne!(sample_set(&cfg).unwrap(), sample_set(&other).unwrap());
        for (g, n) in sample_set(&cfg).unwrap() {
            let p = g.degree();
            assert!((4..=12).contains(&p));
            assert!(n > p as usize && n <= p as usize + 20);
        }
    }

    #[test]
    fn small_run_passes() {
        let cfg = VerifyConfig { samples: 60, ..Default::default() };
        assert!(verify(&cfg).unwrap().passed());
    }

    #[test]
    fn injected_fault_is_reported() {
        let cfg = VerifyConfig { samples: 20, ..Default::default() };
        let report = verify_with(&cfg, |g, n| Ok(min_distance(g, n)? + u32::from(n % 3 == 0))).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn bad_ranges_rejected() {
        assert!(sample_set(&VerifyConfig { min_degree: 9, max_degree: 4, ..Default::default() }).is_err());
        assert!(sample_set(&VerifyConfig { max_extra: 0, ..Default::default() }).is_err());
        assert!(sample_set(&VerifyConfig { max_extra: 40, ..Default::default() }).is_err());
    }
}
