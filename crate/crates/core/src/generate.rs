//! Random instance generation for the experiment harness.
//!
//! Proficiencies come from either U[0.5, 1] or an exponential with mean
//! 0.25 mapped into [0.5, 1] by rejection (redraw `0.5 + x` until it is at
//! most 1). Task utilities come from U[0, 1], U[0, 100], or are all ones
//! for homogeneous runs. Everything is deterministic given the seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::GameInstance;
use crate::rng::derive_rng;

/// Proficiency distributions used in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProficiencyDist {
    /// U[0.5, 1].
    Uniform,
    /// 0.5 + Exp(mean 0.25), redrawn until the value is at most 1.
    Exponential,
}

impl ProficiencyDist {
    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Exponential => "exponential",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "uniform" => Ok(Self::Uniform),
            "exponential" => Ok(Self::Exponential),
            other => Err(Error::InvalidParameter(format!(
                "unknown proficiency distribution '{other}'"
            ))),
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Uniform => rng.gen_range(0.5..=1.0),
            Self::Exponential => loop {
                // inverse-CDF exponential with mean 0.25
                let x = -0.25 * (1.0 - rng.gen::<f64>()).ln();
                let p = 0.5 + x;
                if p <= 1.0 {
                    return p;
                }
            },
        }
    }
}

/// Task-utility distributions used in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityDist {
    /// U[0, 1].
    Uniform01,
    /// U[0, 100].
    Uniform0To100,
    /// All ones (homogeneous).
    Constant,
}

impl UtilityDist {
    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform01 => "u01",
            Self::Uniform0To100 => "u100",
            Self::Constant => "const",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "u01" => Ok(Self::Uniform01),
            "u100" => Ok(Self::Uniform0To100),
            "const" => Ok(Self::Constant),
            other => Err(Error::InvalidParameter(format!(
                "unknown utility distribution '{other}'"
            ))),
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Uniform01 => rng.gen_range(0.0..=1.0),
            Self::Uniform0To100 => rng.gen_range(0.0..=100.0),
            Self::Constant => 1.0,
        }
    }
}

/// Draw `n` proficiencies, sorted descending; deterministic given the seed.
pub fn sample_proficiencies(n: usize, dist: ProficiencyDist, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = derive_rng(seed, &[0x7072_6f66]); // "prof"
    let mut ps: Vec<f64> = (0..n).map(|_| dist.draw(&mut rng)).collect();
    ps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(ps)
}

/// Draw `m` task utilities, sorted descending; deterministic given the seed.
pub fn sample_task_utilities(m: usize, dist: UtilityDist, seed: u64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut rng = derive_rng(seed, &[0x7574_696c]); // "util"
    let mut us: Vec<f64> = (0..m).map(|_| dist.draw(&mut rng)).collect();
    us.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(us)
}

/// A growing worker population: successive draws extend the same stream, so
/// the first `n` workers are identical across sweep points of one trial.
pub struct WorkerStream {
    dist: ProficiencyDist,
    rng: ChaCha8Rng,
    drawn: Vec<f64>,
}

impl WorkerStream {
    pub fn new(dist: ProficiencyDist, seed: u64) -> Self {
        Self { dist, rng: derive_rng(seed, &[0x7374_7265]), drawn: Vec::new() } // "stre"
    }

    /// Proficiencies of the first `n` workers of this population (unsorted,
    /// in draw order).
    pub fn prefix(&mut self, n: usize) -> &[f64] {
        while self.drawn.len() < n {
            let p = self.dist.draw(&mut self.rng);
            self.drawn.push(p);
        }
        &self.drawn[..n]
    }
}

/// Build an instance from sampled parts. Capacities default to `m` (never
/// binding) and the budget to `m`.
pub fn build_instance(
    proficiencies: &[f64],
    utilities: &[f64],
    tau: usize,
    budget: Option<usize>,
    capacity: Option<usize>,
) -> Result<GameInstance> {
    let m = utilities.len();
    let capacities = vec![capacity.unwrap_or(m); proficiencies.len()];
    GameInstance::from_parts(
        proficiencies,
        &capacities,
        utilities,
        tau,
        budget.unwrap_or(m),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proficiencies_in_range_and_sorted() {
        for dist in [ProficiencyDist::Uniform, ProficiencyDist::Exponential] {
            let ps = sample_proficiencies(200, dist, 5).unwrap();
            assert!(ps.iter().all(|&p| (0.5..=1.0).contains(&p)));
            assert!(ps.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn proficiencies_deterministic_and_reject_zero() {
        assert!(sample_proficiencies(0, ProficiencyDist::Uniform, 1).is_err());
        let a = sample_proficiencies(10, ProficiencyDist::Uniform, 1).unwrap();
        let b = sample_proficiencies(10, ProficiencyDist::Uniform, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_mean_concentrates() {
        // mean of U[0.5, 1] is 0.75, sd = 0.5 / sqrt(12)
        let trials = 40;
        let n = 250;
        let mut total = 0.0;
        for seed in 0..trials {
            total +=
                sample_proficiencies(n, ProficiencyDist::Uniform, seed).unwrap().iter().sum::<f64>();
        }
        let mean = total / (trials * n as u64) as f64;
        let sigma = 0.5 / (12.0f64 * (trials * n as u64) as f64).sqrt();
        assert!((mean - 0.75).abs() < 4.0 * sigma, "mean {mean}");
    }

    #[test]
    fn utilities_support_and_moments() {
        let us = sample_task_utilities(5, UtilityDist::Constant, 3).unwrap();
        assert!(us.iter().all(|&u| u == 1.0));

        let us = sample_task_utilities(10_000, UtilityDist::Uniform0To100, 3).unwrap();
        assert!(us.iter().all(|&u| (0.0..=100.0).contains(&u)));
        let mean = us.iter().sum::<f64>() / us.len() as f64;
        let sigma = 100.0 / (12.0f64 * 10_000.0).sqrt();
        assert!((mean - 50.0).abs() < 4.0 * sigma, "mean {mean}");

        assert!(sample_task_utilities(0, UtilityDist::Uniform01, 1).is_err());
    }

    #[test]
    fn stream_prefixes_are_stable() {
        let mut long = WorkerStream::new(ProficiencyDist::Uniform, 9);
        let first_ten: Vec<f64> = long.prefix(10).to_vec();
        let mut short = WorkerStream::new(ProficiencyDist::Uniform, 9);
        assert_eq!(&first_ten[..5], short.prefix(5));
        let mut other = WorkerStream::new(ProficiencyDist::Uniform, 10);
        assert_ne!(other.prefix(5), &first_ten[..5]);
    }

    #[test]
    fn stream_marginals_match_batch_sampler() {
        // two-sample moment comparison between the stream and the batch
        // sampler
        let mut stream_total = 0.0;
        let mut batch_total = 0.0;
        let count = 20_000usize;
        let mut stream = WorkerStream::new(ProficiencyDist::Exponential, 17);
        for &p in stream.prefix(count) {
            stream_total += p;
        }
        for chunk in 0..20u64 {
            batch_total += sample_proficiencies(count / 20, ProficiencyDist::Exponential, 100 + chunk)
                .unwrap()
                .iter()
                .sum::<f64>();
        }
        let stream_mean = stream_total / count as f64;
        let batch_mean = batch_total / count as f64;
        // truncated exponential sd is below 0.15
        let sigma = 0.15 / (count as f64).sqrt() * std::f64::consts::SQRT_2;
        assert!(
            (stream_mean - batch_mean).abs() < 4.0 * sigma,
            "stream {stream_mean} vs batch {batch_mean}"
        );
    }
}
