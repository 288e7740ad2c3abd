//! Solvers for heterogeneous task utilities.
//!
//! The single-worker-per-task problem embeds the attacker's relaxed program
//! through its dual, giving the integer program captured by
//! [`MilpFormulation`]. [`solve_single_worker_exact`] solves it exactly with
//! depth-first branch and bound over task-to-worker choices; instances at
//! the scale this crate targets stay well within desk runtimes.
//!
//! [`greedy_multiworker_improve`] then relaxes the one-worker-per-task
//! restriction: it walks tasks from least valuable up, tentatively moving
//! each task's workers to more valuable tasks, re-deriving the attacker's
//! best response after every tentative move with the sample-average
//! estimator over one fixed outcome cube, and commits the best strict
//! improvement per worker.

use std::collections::HashMap;

use crate::attacker::{
    attack_value, best_response_additive, best_response_enumerative, dual_certificate,
};
use crate::error::{Error, Result};
use crate::model::{
    worker_contributions, Assignment, Attack, DecisionRule, GameInstance, UTILITY_TOL,
};
use crate::saa::OutcomeSamples;

/// Keep only the `budget` highest-utility tasks (`m` becomes `budget`).
pub fn restrict_top_b_tasks(instance: &GameInstance) -> GameInstance {
    let budget = instance.budget();
    instance.with_tasks(instance.tasks()[..budget].to_vec(), budget)
}

/// The integer program for the single-worker-per-task commitment, with the
/// attacker's value bounded through the dual variables `lambda`, `beta`.
///
/// The solver does not hand this to an external package; the type exists so
/// solutions can be checked against the formulation's constraint set.
#[derive(Debug, Clone)]
pub struct MilpFormulation {
    /// Objective coefficient of `s[w][t]`: `p_w * u_t`.
    pub objective: Vec<Vec<f64>>,
    n: usize,
    m: usize,
    tau: usize,
    capacities: Vec<usize>,
}

/// Values for the non-assignment variables of [`MilpFormulation`]: the
/// attacker-value bound `gamma` and the dual pair `(lambda, beta)`.
#[derive(Debug, Clone)]
pub struct MilpCertificate {
    pub gamma: f64,
    pub lambda: f64,
    pub beta: Vec<f64>,
}

impl MilpFormulation {
    pub fn from_instance(instance: &GameInstance) -> Self {
        let objective = (0..instance.n())
            .map(|w| {
                (0..instance.m())
                    .map(|t| instance.proficiency(w) * instance.utility(t))
                    .collect()
            })
            .collect();
        Self {
            objective,
            n: instance.n(),
            m: instance.m(),
            tau: instance.tau(),
            capacities: instance.workers().iter().map(|w| w.capacity).collect(),
        }
    }

    /// Check every constraint of the program against a candidate point.
    pub fn is_feasible(&self, assignment: &Assignment, cert: &MilpCertificate) -> bool {
        if assignment.n() != self.n || assignment.m() != self.m {
            return false;
        }
        if cert.beta.len() != self.n || cert.beta.iter().any(|&b| b < -UTILITY_TOL) {
            return false;
        }
        // gamma >= lambda * tau + sum(beta)
        let dual_total = cert.lambda * self.tau as f64 + cert.beta.iter().sum::<f64>();
        if cert.gamma < dual_total - UTILITY_TOL {
            return false;
        }
        // lambda + beta_w >= contribution_w
        for w in 0..self.n {
            let contribution: f64 =
                (0..self.m).filter(|&t| assignment.assigned(w, t)).map(|t| self.objective[w][t]).sum();
            if cert.lambda + cert.beta[w] < contribution - UTILITY_TOL {
                return false;
            }
            if assignment.worker_load(w) > self.capacities[w] {
                return false;
            }
        }
        // all m tasks assigned, exactly one worker each
        if assignment.total_assignments() != self.m {
            return false;
        }
        (0..self.m).all(|t| assignment.workers_of_task(t).len() == 1)
    }

    /// `sum p_w u_t s_wt - gamma`.
    pub fn objective_value(&self, assignment: &Assignment, cert: &MilpCertificate) -> f64 {
        let total: f64 = (0..self.n)
            .map(|w| {
                (0..self.m)
                    .filter(|&t| assignment.assigned(w, t))
                    .map(|t| self.objective[w][t])
                    .sum::<f64>()
            })
            .sum();
        total - cert.gamma
    }
}

/// Build the natural certificate for a single-worker assignment: `gamma` is
/// the attacker's best-response value, `lambda`/`beta` its closed-form dual.
pub fn feasibility_certificate(
    assignment: &Assignment,
    instance: &GameInstance,
) -> Result<MilpCertificate> {
    let contributions = worker_contributions(assignment, instance)?;
    let attack = best_response_additive(assignment, instance)?;
    let gamma = attack_value(&contributions, &attack);
    let dual = dual_certificate(&contributions, instance.tau());
    Ok(MilpCertificate { gamma, lambda: dual.lambda, beta: dual.beta })
}

/// Exact optimal assignment with exactly one worker per task, scored under
/// the attacker's best response.
///
/// Branch and bound over tasks in descending utility order; at each node the
/// admissible bound pairs the remaining utilities with the most proficient
/// spare capacity and subtracts the attacker's take on the partial
/// assignment, which can only grow as tasks are added.
pub fn solve_single_worker_exact(instance: &GameInstance) -> Result<(Assignment, f64)> {
    let n = instance.n();
    let m = instance.m();
    if instance.budget() != m {
        return Err(Error::InvalidParameter(
            "budget != m: apply restrict_top_b_tasks first".into(),
        ));
    }
    let total_capacity: usize = (0..n).map(|w| instance.capacity(w)).sum();
    if total_capacity < m {
        return Err(Error::InfeasibleCapacity(format!(
            "capacities hold {total_capacity} tasks, {m} required"
        )));
    }
    let mut search = SingleWorkerSearch {
        p: (0..n).map(|w| instance.proficiency(w)).collect(),
        u: (0..m).map(|t| instance.utility(t)).collect(),
        caps: (0..n).map(|w| instance.capacity(w)).collect(),
        tau: instance.effective_tau(),
        spare: (0..n).map(|w| instance.capacity(w)).collect(),
        contributions: vec![0.0; n],
        choice: vec![0; m],
        total: 0.0,
        best_value: f64::NEG_INFINITY,
        best_choice: vec![0; m],
        utility_prefix: Vec::new(),
        spare_total: total_capacity,
    };
    search.utility_prefix = {
        let mut prefix = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for t in 0..m {
            acc += search.u[t];
            prefix.push(acc);
        }
        prefix
    };
    search.seed_incumbents();
    search.dfs(0);

    let mut assignment = Assignment::empty(n, m);
    for (t, &w) in search.best_choice.iter().enumerate() {
        assignment.set(w, t, true);
    }
    assignment.validate(instance)?;
    Ok((assignment, search.best_value))
}

struct SingleWorkerSearch {
    p: Vec<f64>,
    u: Vec<f64>,
    caps: Vec<usize>,
    tau: usize,
    spare: Vec<usize>,
    contributions: Vec<f64>,
    choice: Vec<usize>,
    total: f64,
    best_value: f64,
    best_choice: Vec<usize>,
    utility_prefix: Vec<f64>,
    spare_total: usize,
}

impl SingleWorkerSearch {
    /// Warm the incumbent with complete round-robin assignments over the
    /// top-k spare workers for every k, plus a contribution-equalizing
    /// greedy (each task goes to the least-loaded eligible worker, which is
    /// roughly what survives an attack best).
    fn seed_incumbents(&mut self) {
        let n = self.p.len();
        let m = self.u.len();
        for k in 1..=n {
            let mut spare: Vec<usize> = self.caps.clone();
            let mut choice = vec![usize::MAX; m];
            let mut ok = true;
            let mut cursor = 0usize;
            for t in 0..m {
                let mut placed = false;
                for step in 0..k {
                    let w = (cursor + step) % k;
                    if spare[w] > 0 {
                        choice[t] = w;
                        spare[w] -= 1;
                        cursor = (w + 1) % k;
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    // overflow beyond the top-k pool
                    for w in k..n {
                        if spare[w] > 0 {
                            choice[t] = w;
                            spare[w] -= 1;
                            placed = true;
                            break;
                        }
                    }
                }
                if !placed {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let value = self.score(&choice);
            if value > self.best_value {
                self.best_value = value;
                self.best_choice = choice;
            }
        }
        // equalizing greedy over every prefix pool size
        for k in 1..=n {
            let mut spare: Vec<usize> = self.caps.clone();
            let mut load = vec![0.0f64; n];
            let mut choice = vec![usize::MAX; m];
            let mut ok = true;
            for t in 0..m {
                let mut pick: Option<usize> = None;
                for w in 0..n.min(k.max(1)) {
                    if spare[w] == 0 {
                        continue;
                    }
                    match pick {
                        Some(best) if load[w] >= load[best] => {}
                        _ => pick = Some(w),
                    }
                }
                if pick.is_none() {
                    for w in k..n {
                        if spare[w] > 0 {
                            pick = Some(w);
                            break;
                        }
                    }
                }
                match pick {
                    Some(w) => {
                        choice[t] = w;
                        spare[w] -= 1;
                        load[w] += self.p[w] * self.u[t];
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let value = self.score(&choice);
                if value > self.best_value {
                    self.best_value = value;
                    self.best_choice = choice;
                }
            }
        }
    }

    fn score(&self, choice: &[usize]) -> f64 {
        let mut contributions = vec![0.0; self.p.len()];
        for (t, &w) in choice.iter().enumerate() {
            contributions[w] += self.p[w] * self.u[t];
        }
        let total: f64 = contributions.iter().sum();
        contributions.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let take: f64 = contributions.iter().take(self.tau).sum();
        total - take
    }

    fn top_tau_partial(&self) -> f64 {
        let mut sorted: Vec<f64> = self.contributions.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sorted.iter().take(self.tau).sum()
    }

    /// Upper bound on the additive value of completing tasks `t..`:
    /// pair the largest remaining utilities with the most proficient spare
    /// capacity (rearrangement bound).
    fn optimistic_completion(&self, t: usize) -> f64 {
        let m = self.u.len();
        let mut start = t;
        let mut bound = 0.0;
        for w in 0..self.p.len() {
            if start >= m {
                break;
            }
            let take = self.spare[w].min(m - start);
            if take == 0 {
                continue;
            }
            bound += self.p[w] * (self.utility_prefix[start + take] - self.utility_prefix[start]);
            start += take;
        }
        bound
    }

    fn dfs(&mut self, t: usize) {
        let m = self.u.len();
        let n = self.p.len();
        if t == m {
            let value = self.total - self.top_tau_partial();
            if value > self.best_value {
                self.best_value = value;
                self.best_choice = self.choice.clone();
            }
            return;
        }
        if self.spare_total < m - t {
            return;
        }
        // two admissible views of the attacker's take on any completion:
        // it only grows from the partial top-tau, and the tau largest
        // contributions are each at least the average, so the take is at
        // least tau/n of the completed total.
        let total_ub = self.total + self.optimistic_completion(t);
        let take_lb = self.top_tau_partial().max(self.tau as f64 / n as f64 * total_ub);
        if total_ub - take_lb <= self.best_value + 1e-12 {
            return;
        }
        for w in 0..n {
            if self.spare[w] == 0 {
                continue;
            }
            // interchangeable with an already-tried worker: same
            // proficiency, load, and spare lead to the same subtree
            if (0..w).any(|v| {
                self.p[v] == self.p[w]
                    && self.spare[v] == self.spare[w]
                    && self.contributions[v] == self.contributions[w]
            }) {
                continue;
            }
            let gain = self.p[w] * self.u[t];
            self.choice[t] = w;
            self.spare[w] -= 1;
            self.spare_total -= 1;
            self.contributions[w] += gain;
            self.total += gain;
            self.dfs(t + 1);
            self.total -= gain;
            self.contributions[w] -= gain;
            self.spare_total += 1;
            self.spare[w] += 1;
        }
    }
}

/// Memoized sample-average utilities: per (task, surviving worker set) the
/// fraction of samples whose weighted vote succeeds. Valid because the
/// outcome cube and rule stay fixed for a whole improvement run.
struct SaaCache<'a> {
    samples: &'a OutcomeSamples,
    rule: &'a DecisionRule,
    instance: &'a GameInstance,
    success: HashMap<(usize, u64), f64>,
}

impl<'a> SaaCache<'a> {
    fn new(
        samples: &'a OutcomeSamples,
        rule: &'a DecisionRule,
        instance: &'a GameInstance,
    ) -> Self {
        Self { samples, rule, instance, success: HashMap::new() }
    }

    fn task_success(&mut self, t: usize, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&hit) = self.success.get(&(t, mask)) {
            return hit;
        }
        let survivors: Vec<usize> =
            (0..self.instance.n()).filter(|&w| mask & (1 << w) != 0).collect();
        let k = self.samples.k();
        let mut wins = 0usize;
        for sample in 0..k {
            let vote: f64 = survivors
                .iter()
                .map(|&w| self.rule.weight(w) * self.samples.label(sample, w, t) as f64)
                .sum();
            if vote > 0.0 {
                wins += 1;
            }
        }
        let rate = wins as f64 / k as f64;
        self.success.insert((t, mask), rate);
        rate
    }

    fn utility(&mut self, assignment: &Assignment, attack: &Attack) -> f64 {
        let mut total = 0.0;
        for t in 0..self.instance.m() {
            let mut mask = 0u64;
            for w in 0..self.instance.n() {
                if assignment.assigned(w, t) && !attack.is_attacked(w) {
                    mask |= 1 << w;
                }
            }
            total += self.instance.utility(t) * self.task_success(t, mask);
        }
        total
    }
}

/// Improve a single-worker assignment by allowing multiple workers per task.
///
/// Tasks are visited in ascending utility order; each worker currently on
/// the task is tentatively moved to every more valuable task (descending
/// utility), the attacker's best response is recomputed after each tentative
/// move with the sample-average estimator over `samples`, and the best
/// strictly-improving move is committed. The result's estimated utility
/// under best response never falls below the start's on the same samples.
pub fn greedy_multiworker_improve(
    start: &Assignment,
    instance: &GameInstance,
    rule: &DecisionRule,
    samples: &OutcomeSamples,
) -> Result<Assignment> {
    if samples.n() != instance.n() || samples.m() != instance.m() {
        return Err(Error::DimensionMismatch("samples vs instance".into()));
    }
    if instance.n() > 64 {
        return Err(Error::InvalidParameter("more than 64 workers".into()));
    }
    start.validate(instance)?;
    let n = instance.n();
    let m = instance.m();
    let mut current = start.clone();
    let mut cache = SaaCache::new(samples, rule, instance);

    let mut ascending: Vec<usize> = (0..m).collect();
    ascending.sort_by(|&a, &b| {
        instance
            .utility(a)
            .partial_cmp(&instance.utility(b))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut position = vec![0usize; m];
    for (pos, &t) in ascending.iter().enumerate() {
        position[t] = pos;
    }

    let mut util = {
        let (_, v) =
            best_response_enumerative(&current, instance, |a, att| Ok(cache.utility(a, att)))?;
        v
    };

    for &t in &ascending {
        for w in 0..n {
            if !current.assigned(w, t) {
                continue;
            }
            // candidates: tasks after t in the ascending order, visited in
            // descending utility (instance index order), skipping tasks the
            // worker is already on
            let mut best_target = t;
            let mut best_util = util;
            for target in 0..m {
                if position[target] <= position[t] || current.assigned(w, target) {
                    continue;
                }
                current.set(w, t, false);
                current.set(w, target, true);
                let (_, v) = best_response_enumerative(&current, instance, |a, att| {
                    Ok(cache.utility(a, att))
                })?;
                if v > best_util {
                    best_util = v;
                    best_target = target;
                }
                current.set(w, target, false);
                current.set(w, t, true);
            }
            if best_target != t {
                current.set(w, t, false);
                current.set(w, best_target, true);
                util = best_util;
            }
        }
    }
    Ok(current)
}
