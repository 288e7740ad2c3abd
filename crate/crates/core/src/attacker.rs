//! Attacker best responses to a committed assignment.
//!
//! In the additive (single-worker-per-task) model the attacker's problem is
//! separable: disable the workers with the largest contributions. For
//! multi-worker assignments the attack value is no longer additive, so the
//! best response is found by enumerating all attack subsets against a
//! caller-supplied defender-utility evaluator.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{worker_contributions, Assignment, Attack, ContributionVector, GameInstance};

/// Largest number of attack subsets the enumerative best response accepts.
pub const ATTACK_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Best response in the additive model: disable the `min(tau, n)` workers
/// with the largest contributions, lower index first among ties.
pub fn best_response_additive(
    assignment: &Assignment,
    instance: &GameInstance,
) -> Result<Attack> {
    for t in 0..instance.m() {
        if assignment.workers_of_task(t).len() > 1 {
            return Err(Error::MultiWorkerTask(t));
        }
    }
    let contributions = worker_contributions(assignment, instance)?;
    Ok(top_contribution_attack(&contributions, instance))
}

/// The attack disabling the workers with the largest `contributions`.
pub(crate) fn top_contribution_attack(
    contributions: &ContributionVector,
    instance: &GameInstance,
) -> Attack {
    let mut order: Vec<usize> = (0..instance.n()).collect();
    // stable sort by descending contribution keeps lower indices first on ties
    order.sort_by(|&a, &b| contributions[b].partial_cmp(&contributions[a]).unwrap());
    let chosen: Vec<usize> = order.into_iter().take(instance.effective_tau()).collect();
    Attack::from_indices(instance, &chosen).expect("constructed attack is valid")
}

/// Total contribution captured by an attack: `sum over attacked workers`.
pub fn attack_value(contributions: &ContributionVector, attack: &Attack) -> f64 {
    (0..contributions.len())
        .filter(|&w| attack.is_attacked(w))
        .map(|w| contributions[w])
        .sum()
}

/// Best response by exhaustive enumeration of all `min(tau, n)`-subsets,
/// minimizing the supplied defender-utility evaluator.
///
/// Subsets are visited in lexicographic order of the attacked index set and
/// improvements must be strict, so ties resolve to the lexicographically
/// smallest attack. Returns the attack and the defender utility under it.
pub fn best_response_enumerative<F>(
    assignment: &Assignment,
    instance: &GameInstance,
    mut defender_utility: F,
) -> Result<(Attack, f64)>
where
    F: FnMut(&Assignment, &Attack) -> Result<f64>,
{
    let k = instance.effective_tau();
    let combinations = binomial(instance.n() as u128, k as u128);
    if combinations > ATTACK_ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            required: combinations,
            limit: ATTACK_ENUMERATION_LIMIT,
        });
    }
    let mut best: Option<(Attack, f64)> = None;
    for subset in (0..instance.n()).combinations(k) {
        let attack = Attack::from_indices(instance, &subset)?;
        let value = defender_utility(assignment, &attack)?;
        match &best {
            Some((_, incumbent)) if value >= *incumbent => {}
            _ => best = Some((attack, value)),
        }
    }
    best.ok_or_else(|| Error::InvalidInstance("no attack subsets".into()))
}

/// Closed-form optimum of the relaxed attacker program's dual.
///
/// For contributions `y` and attack size `tau`, the relaxation of "pick the
/// tau largest" has dual `min lambda*tau + sum(beta)` subject to
/// `lambda + beta_w >= y_w`, `beta >= 0`. The optimum is attained at
/// `lambda =` the tau-th largest contribution and `beta_w = max(0, y_w -
/// lambda)`, and equals the attacker's best-response value.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub lambda: f64,
    pub beta: Vec<f64>,
}

impl DualCertificate {
    /// Dual objective `lambda * tau + sum(beta)`.
    pub fn value(&self, tau: usize) -> f64 {
        self.lambda * tau as f64 + self.beta.iter().sum::<f64>()
    }
}

/// Build the order-statistic dual solution for the attacker relaxation.
pub fn dual_certificate(contributions: &ContributionVector, tau: usize) -> DualCertificate {
    let n = contributions.len();
    let k = tau.min(n);
    let mut sorted: Vec<f64> = contributions.as_slice().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let lambda = if k == 0 { sorted[0] } else { sorted[k - 1] };
    let beta = contributions
        .as_slice()
        .iter()
        .map(|&y| (y - lambda).max(0.0))
        .collect();
    DualCertificate { lambda, beta }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}
