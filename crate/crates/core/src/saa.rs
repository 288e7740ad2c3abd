//! Monte-Carlo outcome sampling and the sample-average utility estimator.
//!
//! An [`OutcomeSamples`] cube holds `K` independent success/failure
//! realizations for every worker-task pair, drawn from each worker's
//! proficiency. [`evaluate_saa`] scores an assignment under an attack by
//! averaging, over the `K` samples, the utility of tasks whose surviving
//! workers' weighted vote comes out strictly positive.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Assignment, Attack, DecisionRule, GameInstance};
use crate::rng::derive_rng;

/// `K` sampled outcome matrices over `{+1, -1}`: `+1` means worker `w`
/// would complete task `t` correctly in sample `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSamples {
    k: usize,
    n: usize,
    m: usize,
    labels: Vec<i8>,
    seed: u64,
}

impl OutcomeSamples {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Seed the cube was drawn from, recorded for reproducibility.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Label of worker `w` on task `t` in sample `k`: `+1` or `-1`.
    #[inline]
    pub fn label(&self, k: usize, w: usize, t: usize) -> i8 {
        self.labels[(k * self.n + w) * self.m + t]
    }

    /// Fraction of `+1` labels for worker `w` across all samples and tasks.
    pub fn empirical_success_rate(&self, w: usize) -> f64 {
        let mut hits = 0usize;
        for k in 0..self.k {
            for t in 0..self.m {
                if self.label(k, w, t) == 1 {
                    hits += 1;
                }
            }
        }
        hits as f64 / (self.k * self.m) as f64
    }
}

/// Draw a `K x n x m` outcome cube, i.i.d. with `P(+1) = p_w`.
pub fn sample_outcomes(instance: &GameInstance, k: usize, seed: u64) -> Result<OutcomeSamples> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let (n, m) = (instance.n(), instance.m());
    let mut rng = derive_rng(seed, &[0x5361_6d70]); // "Samp"
    let mut labels = Vec::with_capacity(k * n * m);
    for _ in 0..k {
        for w in 0..n {
            let p = instance.proficiency(w);
            for _ in 0..m {
                labels.push(if rng.gen::<f64>() < p { 1 } else { -1 });
            }
        }
    }
    Ok(OutcomeSamples { k, n, m, labels, seed })
}

/// Sample-average estimate of the defender's utility.
///
/// For each task, each sample casts the weighted vote of the assigned,
/// non-attacked workers; the task counts in that sample when the vote is
/// strictly positive. Task utility is scaled by the fraction of winning
/// samples.
pub fn evaluate_saa(
    assignment: &Assignment,
    attack: &Attack,
    samples: &OutcomeSamples,
    rule: &DecisionRule,
    instance: &GameInstance,
) -> Result<f64> {
    let (n, m) = (instance.n(), instance.m());
    if assignment.n() != n || assignment.m() != m {
        return Err(Error::DimensionMismatch("assignment vs instance".into()));
    }
    if samples.n != n || samples.m != m {
        return Err(Error::DimensionMismatch("samples vs instance".into()));
    }
    if attack.n() != n {
        return Err(Error::DimensionMismatch("attack vs instance".into()));
    }
    if rule.len() != n {
        return Err(Error::DimensionMismatch("rule vs instance".into()));
    }
    let mut total = 0.0;
    for t in 0..m {
        let survivors: Vec<usize> = (0..n)
            .filter(|&w| assignment.assigned(w, t) && !attack.is_attacked(w))
            .collect();
        if survivors.is_empty() {
            continue;
        }
        let mut wins = 0usize;
        for k in 0..samples.k {
            let vote: f64 = survivors
                .iter()
                .map(|&w| rule.weight(w) * samples.label(k, w, t) as f64)
                .sum();
            if vote > 0.0 {
                wins += 1;
            }
        }
        total += instance.utility(t) * wins as f64 / samples.k as f64;
    }
    Ok(total)
}
