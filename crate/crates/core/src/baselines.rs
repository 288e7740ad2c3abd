//! Comparison baselines and the exhaustive brute-force oracle.
//!
//! The baselines mirror common-sense assignment policies: split tasks evenly
//! over the best `k` workers, or scatter them uniformly at random. The brute
//! force searches every valid assignment and scores each under the attacker's
//! best response; it is the ground truth the solvers are verified against.

use rand::Rng;

use crate::attacker::{best_response_additive, best_response_enumerative, binomial};
use crate::error::{Error, Result};
use crate::model::{
    evaluate_additive, evaluate_majority_exact, Assignment, DecisionRule, GameInstance,
};

/// Largest search space the brute force will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// Split tasks as evenly as possible over the `k` most proficient workers.
///
/// Each of the top `k` receives `floor(m / k)` tasks; the remainder is dealt
/// one per worker starting from the least proficient of the top `k` and
/// moving up. Capacity overflow cascades to the next worker in index order
/// within the top `k`; if the whole pool is exhausted the split is
/// infeasible.
pub fn split_k(instance: &GameInstance, k: usize) -> Result<Assignment> {
    let n = instance.n();
    let m = instance.m();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={n}")));
    }
    let mut desired = vec![m / k; k];
    for j in 0..(m % k) {
        desired[k - 1 - j] += 1;
    }
    let mut counts = vec![0usize; n];
    let mut carry = 0usize;
    for w in 0..k {
        let want = desired[w] + carry;
        let take = want.min(instance.capacity(w));
        counts[w] = take;
        carry = want - take;
    }
    if carry > 0 {
        return Err(Error::InfeasibleCapacity(format!(
            "split-{k} leaves {carry} tasks over the top-{k} capacity"
        )));
    }
    Assignment::from_counts(instance, &counts)
}

/// Assign every task to a uniformly random worker with remaining capacity.
///
/// With `top_half_only` the eligible pool is the `ceil(n / 2)` most
/// proficient workers. Deterministic given the seed.
pub fn monte_carlo(instance: &GameInstance, seed: u64, top_half_only: bool) -> Result<Assignment> {
    let n = instance.n();
    let pool = if top_half_only { n.div_ceil(2) } else { n };
    let mut rng = crate::rng::derive_rng(seed, &[0x6d63]); // "mc"
    let mut remaining: Vec<usize> = (0..pool).map(|w| instance.capacity(w)).collect();
    let mut assignment = Assignment::empty(n, instance.m());
    for t in 0..instance.m() {
        let eligible: Vec<usize> = (0..pool).filter(|&w| remaining[w] > 0).collect();
        if eligible.is_empty() {
            return Err(Error::InfeasibleCapacity(format!(
                "pool capacity exhausted before task {t}"
            )));
        }
        let w = eligible[rng.gen_range(0..eligible.len())];
        assignment.set(w, t, true);
        remaining[w] -= 1;
    }
    assignment.validate(instance)?;
    Ok(assignment)
}

/// The assignment that is optimal when no attacker exists: fill workers in
/// proficiency order up to capacity until the budget runs out, one worker
/// per task. Returns the assignment and its no-attack additive utility.
pub fn nonadversarial_optimal(instance: &GameInstance) -> (Assignment, f64) {
    let mut counts = vec![0usize; instance.n()];
    let mut left = instance.budget().min(instance.m());
    for w in 0..instance.n() {
        let take = left.min(instance.capacity(w));
        counts[w] = take;
        left -= take;
        if left == 0 {
            break;
        }
    }
    let assignment = Assignment::from_counts(instance, &counts)
        .expect("greedy fill respects capacities and budget");
    let value = (0..instance.n())
        .map(|w| {
            instance.proficiency(w)
                * assignment.tasks_of_worker(w).iter().map(|&t| instance.utility(t)).sum::<f64>()
        })
        .sum();
    (assignment, value)
}

/// Exhaustive search over every valid assignment, each scored under the
/// attacker's best response.
///
/// Single-worker mode enumerates task-to-worker maps (a task may also stay
/// unassigned) under capacity and budget constraints and scores additively.
/// Multi-worker mode enumerates all binary incidence matrices within budget
/// and capacities and scores with the exact majority evaluator under the
/// enumerative best response. Ties prefer the lexicographically smallest
/// flattened incidence matrix.
pub fn brute_force_optimal(
    instance: &GameInstance,
    allow_multiworker: bool,
    rule: &DecisionRule,
) -> Result<(Assignment, f64)> {
    let space = if allow_multiworker {
        let cells = (instance.n() * instance.m()) as u128;
        (0..=instance.budget() as u128).map(|k| binomial(cells, k)).sum()
    } else {
        (instance.n() as u128 + 1).pow(instance.m() as u32)
    };
    if space > BRUTE_FORCE_LIMIT {
        return Err(Error::EnumerationLimit { required: space, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best: Option<(Assignment, f64)> = None;
    let mut consider = |assignment: &Assignment, value: f64| match &mut best {
        Some((incumbent, best_value)) => {
            if value > *best_value
                || (value == *best_value && lex_smaller(assignment.flat(), incumbent.flat()))
            {
                best = Some((assignment.clone(), value));
            }
        }
        None => best = Some((assignment.clone(), value)),
    };

    if allow_multiworker {
        let mut assignment = Assignment::empty(instance.n(), instance.m());
        let mut loads = vec![0usize; instance.n()];
        enumerate_matrices(
            instance,
            rule,
            &mut assignment,
            &mut loads,
            0,
            0,
            &mut consider,
        )?;
    } else {
        let mut choice = vec![None; instance.m()];
        let mut loads = vec![0usize; instance.n()];
        enumerate_maps(instance, &mut choice, &mut loads, 0, 0, &mut consider)?;
    }
    best.ok_or_else(|| Error::InvalidInstance("empty search space".into()))
}

/// True when `a` precedes `b` in lexicographic order over row-major bits.
fn lex_smaller(a: &[bool], b: &[bool]) -> bool {
    for (&x, &y) in a.iter().zip(b) {
        if x != y {
            return !x;
        }
    }
    false
}

fn enumerate_maps(
    instance: &GameInstance,
    choice: &mut Vec<Option<usize>>,
    loads: &mut Vec<usize>,
    task: usize,
    used: usize,
    consider: &mut impl FnMut(&Assignment, f64),
) -> Result<()> {
    if task == instance.m() {
        let mut assignment = Assignment::empty(instance.n(), instance.m());
        for (t, &c) in choice.iter().enumerate() {
            if let Some(w) = c {
                assignment.set(w, t, true);
            }
        }
        let attack = best_response_additive(&assignment, instance)?;
        let value = evaluate_additive(&assignment, &attack, instance)?;
        consider(&assignment, value);
        return Ok(());
    }
    choice[task] = None;
    enumerate_maps(instance, choice, loads, task + 1, used, consider)?;
    if used < instance.budget() {
        for w in 0..instance.n() {
            if loads[w] < instance.capacity(w) {
                choice[task] = Some(w);
                loads[w] += 1;
                enumerate_maps(instance, choice, loads, task + 1, used + 1, consider)?;
                loads[w] -= 1;
            }
        }
        choice[task] = None;
    }
    Ok(())
}

fn enumerate_matrices(
    instance: &GameInstance,
    rule: &DecisionRule,
    assignment: &mut Assignment,
    loads: &mut Vec<usize>,
    cell: usize,
    used: usize,
    consider: &mut impl FnMut(&Assignment, f64),
) -> Result<()> {
    if cell == instance.n() * instance.m() {
        let (_, value) = best_response_enumerative(assignment, instance, |a, att| {
            evaluate_majority_exact(a, att, instance, rule)
        })?;
        consider(assignment, value);
        return Ok(());
    }
    let w = cell / instance.m();
    let t = cell % instance.m();
    enumerate_matrices(instance, rule, assignment, loads, cell + 1, used, consider)?;
    if used < instance.budget() && loads[w] < instance.capacity(w) {
        assignment.set(w, t, true);
        loads[w] += 1;
        enumerate_matrices(instance, rule, assignment, loads, cell + 1, used + 1, consider)?;
        loads[w] -= 1;
        assignment.set(w, t, false);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn instance(
        ps: &[f64],
        cs: &[usize],
        us: &[f64],
        tau: usize,
        budget: usize,
    ) -> GameInstance {
        GameInstance::from_parts(ps, cs, us, tau, budget).unwrap()
    }

    #[test]
    fn split_even_division() {
        let inst = instance(&[0.9, 0.8, 0.7], &[4, 4, 4], &[1.0; 4], 1, 4);
        let a = split_k(&inst, 2).unwrap();
        assert_eq!(a.counts(), vec![2, 2, 0]);
    }

    #[test]
    fn split_remainder_goes_to_least_proficient() {
        let inst = instance(&[0.9, 0.8, 0.7], &[5, 5, 5], &[1.0; 5], 1, 5);
        let a = split_k(&inst, 2).unwrap();
        assert_eq!(a.counts(), vec![2, 3, 0]);
    }

    #[test]
    fn split_capacity_overflow_is_an_error() {
        let inst = instance(&[0.9, 0.8], &[2, 2], &[1.0; 5], 1, 5);
        assert!(matches!(split_k(&inst, 2), Err(Error::InfeasibleCapacity(_))));
    }

    #[test]
    fn split_overflow_cascades_within_pool() {
        let inst = instance(&[0.9, 0.8], &[1, 10], &[1.0; 5], 1, 5);
        let a = split_k(&inst, 2).unwrap();
        assert_eq!(a.counts(), vec![1, 4]);
    }

    #[test]
    fn split_rejects_bad_k() {
        let inst = instance(&[0.9], &[1], &[1.0], 1, 1);
        assert!(split_k(&inst, 0).is_err());
        assert!(split_k(&inst, 2).is_err());
    }

    #[test]
    fn monte_carlo_single_worker_takes_all() {
        let inst = instance(&[0.9], &[5], &[1.0; 5], 1, 5);
        let a = monte_carlo(&inst, 3, false).unwrap();
        assert_eq!(a.counts(), vec![5]);
    }

    #[test]
    fn monte_carlo_top_half_pool() {
        let inst = instance(&[0.9, 0.8, 0.7, 0.6, 0.5], &[9; 5], &[1.0; 9], 1, 9);
        for seed in 0..20 {
            let a = monte_carlo(&inst, seed, true).unwrap();
            // ceil(5/2) = 3 eligible workers
            assert_eq!(a.counts()[3], 0);
            assert_eq!(a.counts()[4], 0);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let inst = instance(&[0.9, 0.8, 0.7], &[9; 3], &[1.0; 9], 1, 9);
        let a = monte_carlo(&inst, 11, false).unwrap();
        let b = monte_carlo(&inst, 11, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_uniform_frequencies() {
        // 10^4 single-task draws over 4 free workers: each frequency within
        // 4 sigma of 2500.
        let inst = instance(&[0.9, 0.8, 0.7, 0.6], &[1; 4], &[1.0], 1, 1);
        let mut hits = [0usize; 4];
        for seed in 0..10_000u64 {
            let a = monte_carlo(&inst, seed, false).unwrap();
            for (w, &c) in a.counts().iter().enumerate() {
                if c > 0 {
                    hits[w] += 1;
                }
            }
        }
        let expected = 2500.0;
        let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for &h in &hits {
            assert!((h as f64 - expected).abs() < 4.0 * sigma, "hits = {hits:?}");
        }
    }

    #[test]
    fn monte_carlo_exhausted_pool_errors() {
        let inst = instance(&[0.9, 0.8], &[1, 1], &[1.0; 3], 1, 3);
        assert!(matches!(monte_carlo(&inst, 0, false), Err(Error::InfeasibleCapacity(_))));
    }

    #[test]
    fn nonadversarial_all_to_best_worker() {
        let inst = instance(&[0.9, 0.8], &[5, 5], &[1.0; 5], 1, 5);
        let (a, value) = nonadversarial_optimal(&inst);
        assert_eq!(a.counts(), vec![5, 0]);
        assert_abs_diff_eq!(value, 4.5, epsilon = 1e-12);
    }

    #[test]
    fn nonadversarial_greedy_fill() {
        let inst = instance(&[0.9, 0.8, 0.6], &[2, 2, 2], &[1.0; 5], 1, 5);
        let (a, value) = nonadversarial_optimal(&inst);
        assert_eq!(a.counts(), vec![2, 2, 1]);
        assert_abs_diff_eq!(value, 1.8 + 1.6 + 0.6, epsilon = 1e-12);
    }

    #[test]
    fn nonadversarial_matches_no_attack_enumeration() {
        // test-side oracle: enumerate single-worker maps, maximize the
        // no-attack additive value
        let inst = instance(&[0.9, 0.7], &[2, 2], &[1.0, 0.6, 0.4], 1, 3);
        let (_, got) = nonadversarial_optimal(&inst);
        let mut best = 0.0f64;
        for c0 in 0..3usize {
            for c1 in 0..3usize {
                for c2 in 0..3usize {
                    let choice = [c0, c1, c2];
                    let mut loads = [0usize; 2];
                    let mut value = 0.0;
                    let mut ok = true;
                    for (t, &c) in choice.iter().enumerate() {
                        if c > 0 {
                            let w = c - 1;
                            loads[w] += 1;
                            value += inst.proficiency(w) * inst.utility(t);
                        }
                    }
                    let total: usize = loads.iter().sum();
                    if total > inst.budget() {
                        ok = false;
                    }
                    for w in 0..2 {
                        if loads[w] > inst.capacity(w) {
                            ok = false;
                        }
                    }
                    if ok {
                        best = best.max(value);
                    }
                }
            }
        }
        assert_abs_diff_eq!(got, best, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_single_worker_trivial_cases() {
        let inst = instance(&[0.9], &[5], &[1.0; 5], 1, 5);
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (_, value) = brute_force_optimal(&inst, false, &rule).unwrap();
        assert_eq!(value, 0.0);

        let inst = instance(&[1.0, 1.0], &[2, 2], &[1.0, 1.0], 1, 2);
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (a, value) = brute_force_optimal(&inst, false, &rule).unwrap();
        assert_abs_diff_eq!(value, 1.0, epsilon = 1e-12);
        assert_eq!(a.counts(), vec![1, 1]);
    }

    #[test]
    fn brute_force_multiworker_never_below_single_worker() {
        let inst = instance(&[0.9, 0.7], &[2, 2], &[1.0, 0.4], 1, 2);
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (_, single) = brute_force_optimal(&inst, false, &rule).unwrap();
        let (_, multi) = brute_force_optimal(&inst, true, &rule).unwrap();
        assert!(multi >= single - 1e-9);
    }

    #[test]
    fn brute_force_respects_enumeration_limit() {
        let inst = instance(&[0.9; 10], &[20; 10], &[1.0; 20], 1, 20);
        let rule = DecisionRule::proficiency_weighted(&inst);
        assert!(matches!(
            brute_force_optimal(&inst, false, &rule),
            Err(Error::EnumerationLimit { .. })
        ));
    }
}
