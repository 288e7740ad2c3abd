//! Domain types and exact utility evaluators.
//!
//! A [`GameInstance`] describes workers (proficiency + capacity), tasks
//! (utility), the attack size `tau`, and the assignment budget. The defender
//! commits to an [`Assignment`]; the adversary then disables the workers in
//! an [`Attack`] and every task assigned to a disabled worker is lost.
//!
//! Two evaluators score an assignment under an attack:
//!
//! * [`evaluate_additive`] — each task has at most one worker; utility is the
//!   sum of surviving per-worker contributions.
//! * [`evaluate_majority_exact`] — tasks may have several workers; a task
//!   succeeds when the weighted majority of its surviving workers is correct.
//!   Success probability is computed by exact enumeration of outcomes.
//!
//! Disabled workers return no label at all: they are removed from a task's
//! label pool rather than counted as wrong votes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for utility comparisons throughout the crate.
pub const UTILITY_TOL: f64 = 1e-9;

/// A worker: index, probability of completing a task correctly, and the
/// maximum number of tasks it can take.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    /// Position of this worker in the caller's original input order.
    pub id: usize,
    /// Success probability, in (0, 1].
    pub proficiency: f64,
    /// Maximum number of tasks assignable to this worker, at least 1.
    pub capacity: usize,
}

impl Worker {
    pub fn new(id: usize, proficiency: f64, capacity: usize) -> Result<Self> {
        if !(proficiency > 0.0 && proficiency <= 1.0) {
            return Err(Error::InvalidInstance(format!(
                "worker {id}: proficiency {proficiency} outside (0, 1]"
            )));
        }
        if capacity == 0 {
            return Err(Error::InvalidInstance(format!("worker {id}: capacity 0")));
        }
        Ok(Self { id, proficiency, capacity })
    }
}

/// A task and the utility the defender collects if it completes correctly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    /// Position of this task in the caller's original input order.
    pub id: usize,
    /// Non-negative utility of a correct completion.
    pub utility: f64,
}

impl Task {
    pub fn new(id: usize, utility: f64) -> Result<Self> {
        if !(utility >= 0.0) {
            return Err(Error::InvalidInstance(format!(
                "task {id}: utility {utility} is negative or NaN"
            )));
        }
        Ok(Self { id, utility })
    }
}

/// A complete problem statement.
///
/// Workers are kept sorted by non-increasing proficiency and tasks by
/// non-increasing utility; the `id` fields record the permutation back to
/// the caller's input order.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    workers: Vec<Worker>,
    tasks: Vec<Task>,
    tau: usize,
    budget: usize,
}

/// On-disk form of [`GameInstance`].
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    workers: Vec<WorkerFile>,
    tasks: Vec<TaskFile>,
    tau: usize,
    budget: usize,
}

#[derive(Serialize, Deserialize)]
struct WorkerFile {
    p: f64,
    c: usize,
}

#[derive(Serialize, Deserialize)]
struct TaskFile {
    u: f64,
}

impl GameInstance {
    /// Build an instance, sorting workers and tasks into the canonical order.
    ///
    /// Sorting is stable, so among equal proficiencies (or utilities) the
    /// caller's order is preserved and recorded in the `id` fields.
    pub fn new(
        mut workers: Vec<Worker>,
        mut tasks: Vec<Task>,
        tau: usize,
        budget: usize,
    ) -> Result<Self> {
        if workers.is_empty() {
            return Err(Error::InvalidInstance("no workers".into()));
        }
        if tasks.is_empty() {
            return Err(Error::InvalidInstance("no tasks".into()));
        }
        if tau == 0 {
            return Err(Error::InvalidInstance("tau must be at least 1".into()));
        }
        if budget == 0 || budget > tasks.len() {
            return Err(Error::InvalidInstance(format!(
                "budget {budget} outside 1..={}",
                tasks.len()
            )));
        }
        workers.sort_by(|a, b| b.proficiency.partial_cmp(&a.proficiency).unwrap());
        tasks.sort_by(|a, b| b.utility.partial_cmp(&a.utility).unwrap());
        Ok(Self { workers, tasks, tau, budget })
    }

    /// Convenience constructor from raw slices; ids follow the input order.
    pub fn from_parts(
        proficiencies: &[f64],
        capacities: &[usize],
        utilities: &[f64],
        tau: usize,
        budget: usize,
    ) -> Result<Self> {
        if proficiencies.len() != capacities.len() {
            return Err(Error::DimensionMismatch(
                "proficiencies and capacities differ in length".into(),
            ));
        }
        let workers = proficiencies
            .iter()
            .zip(capacities)
            .enumerate()
            .map(|(id, (&p, &c))| Worker::new(id, p, c))
            .collect::<Result<Vec<_>>>()?;
        let tasks = utilities
            .iter()
            .enumerate()
            .map(|(id, &u)| Task::new(id, u))
            .collect::<Result<Vec<_>>>()?;
        Self::new(workers, tasks, tau, budget)
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Number of workers.
    pub fn n(&self) -> usize {
        self.workers.len()
    }

    /// Number of tasks.
    pub fn m(&self) -> usize {
        self.tasks.len()
    }

    /// Number of workers the adversary disables (may exceed `n`).
    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Attack size actually applicable to this instance: `min(tau, n)`.
    pub fn effective_tau(&self) -> usize {
        self.tau.min(self.n())
    }

    /// Maximum number of worker-task assignment pairs.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn proficiency(&self, w: usize) -> f64 {
        self.workers[w].proficiency
    }

    pub fn capacity(&self, w: usize) -> usize {
        self.workers[w].capacity
    }

    pub fn utility(&self, t: usize) -> f64 {
        self.tasks[t].utility
    }

    /// Sum of all task utilities; an upper bound for every evaluator.
    pub fn total_utility(&self) -> f64 {
        self.tasks.iter().map(|t| t.utility).sum()
    }

    /// True when all task utilities are equal within [`UTILITY_TOL`].
    pub fn is_homogeneous(&self) -> bool {
        let first = self.tasks[0].utility;
        self.tasks.iter().all(|t| (t.utility - first).abs() <= UTILITY_TOL)
    }

    /// Replace the task list (used by the normalization/restriction ops).
    pub(crate) fn with_tasks(&self, tasks: Vec<Task>, budget: usize) -> Self {
        Self { workers: self.workers.clone(), tasks, tau: self.tau, budget }
    }

    /// Parse the JSON instance format, sorting into canonical order.
    ///
    /// `id` fields record each worker's and task's position in the file, so
    /// results can be mapped back to the input order.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let workers = file
            .workers
            .iter()
            .enumerate()
            .map(|(id, w)| Worker::new(id, w.p, w.c))
            .collect::<Result<Vec<_>>>()?;
        let tasks = file
            .tasks
            .iter()
            .enumerate()
            .map(|(id, t)| Task::new(id, t.u))
            .collect::<Result<Vec<_>>>()?;
        Self::new(workers, tasks, file.tau, file.budget)
    }

    /// Serialize to the JSON instance format, in canonical (sorted) order.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            workers: self
                .workers
                .iter()
                .map(|w| WorkerFile { p: w.proficiency, c: w.capacity })
                .collect(),
            tasks: self.tasks.iter().map(|t| TaskFile { u: t.utility }).collect(),
            tau: self.tau,
            budget: self.budget,
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }
}

/// Binary worker-by-task incidence matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    n: usize,
    m: usize,
    bits: Vec<bool>,
}

impl Assignment {
    /// All-zero assignment for an `n` workers by `m` tasks instance.
    pub fn empty(n: usize, m: usize) -> Self {
        Self { n, m, bits: vec![false; n * m] }
    }

    /// Build from (worker, task) pairs, validating against the instance.
    pub fn from_pairs(instance: &GameInstance, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(instance.n(), instance.m());
        for &(w, t) in pairs {
            if w >= a.n || t >= a.m {
                return Err(Error::DimensionMismatch(format!(
                    "pair ({w}, {t}) outside {}x{}",
                    a.n, a.m
                )));
            }
            a.bits[w * a.m + t] = true;
        }
        a.validate(instance)?;
        Ok(a)
    }

    /// Single-worker-per-task assignment from per-worker task counts: worker
    /// `w` takes the next `counts[w]` tasks in task order.
    pub fn from_counts(instance: &GameInstance, counts: &[usize]) -> Result<Self> {
        if counts.len() != instance.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for {} workers",
                counts.len(),
                instance.n()
            )));
        }
        let mut a = Self::empty(instance.n(), instance.m());
        let mut next_task = 0usize;
        for (w, &count) in counts.iter().enumerate() {
            for _ in 0..count {
                if next_task >= instance.m() {
                    return Err(Error::InvalidParameter(format!(
                        "counts sum past the {} available tasks",
                        instance.m()
                    )));
                }
                a.bits[w * a.m + next_task] = true;
                next_task += 1;
            }
        }
        a.validate(instance)?;
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn assigned(&self, w: usize, t: usize) -> bool {
        self.bits[w * self.m + t]
    }

    pub fn set(&mut self, w: usize, t: usize, value: bool) {
        self.bits[w * self.m + t] = value;
    }

    /// Number of tasks assigned to worker `w`.
    pub fn worker_load(&self, w: usize) -> usize {
        self.bits[w * self.m..(w + 1) * self.m].iter().filter(|&&b| b).count()
    }

    /// Per-worker task counts.
    pub fn counts(&self) -> Vec<usize> {
        (0..self.n).map(|w| self.worker_load(w)).collect()
    }

    /// Workers assigned to task `t`.
    pub fn workers_of_task(&self, t: usize) -> Vec<usize> {
        (0..self.n).filter(|&w| self.assigned(w, t)).collect()
    }

    /// Tasks assigned to worker `w`.
    pub fn tasks_of_worker(&self, w: usize) -> Vec<usize> {
        (0..self.m).filter(|&t| self.assigned(w, t)).collect()
    }

    /// Total number of worker-task pairs.
    pub fn total_assignments(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when no task has two or more assigned workers.
    pub fn is_single_worker(&self) -> bool {
        (0..self.m).all(|t| (0..self.n).filter(|&w| self.assigned(w, t)).count() <= 1)
    }

    /// All (worker, task) pairs in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.total_assignments());
        for w in 0..self.n {
            for t in 0..self.m {
                if self.assigned(w, t) {
                    out.push((w, t));
                }
            }
        }
        out
    }

    /// Flattened row-major incidence; used for lexicographic tie-breaking.
    pub fn flat(&self) -> &[bool] {
        &self.bits
    }

    /// Check dimensions, capacities, and the assignment budget.
    pub fn validate(&self, instance: &GameInstance) -> Result<()> {
        if self.n != instance.n() || self.m != instance.m() {
            return Err(Error::DimensionMismatch(format!(
                "assignment is {}x{}, instance is {}x{}",
                self.n,
                self.m,
                instance.n(),
                instance.m()
            )));
        }
        for w in 0..self.n {
            let load = self.worker_load(w);
            if load > instance.capacity(w) {
                return Err(Error::InvalidInstance(format!(
                    "worker {w} load {load} exceeds capacity {}",
                    instance.capacity(w)
                )));
            }
        }
        if self.total_assignments() > instance.budget() {
            return Err(Error::InvalidInstance(format!(
                "{} assignments exceed budget {}",
                self.total_assignments(),
                instance.budget()
            )));
        }
        Ok(())
    }
}

/// The set of workers the adversary disables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attack {
    attacked: Vec<bool>,
}

impl Attack {
    /// The no-attack counterfactual: nobody disabled. Not a legal attacker
    /// move (the adversary always disables `min(tau, n)` workers); used to
    /// score what an assignment would earn if no attack occurred.
    pub fn none(n: usize) -> Self {
        Self { attacked: vec![false; n] }
    }

    /// Build an attack from disabled-worker indices; the count must equal
    /// `min(tau, n)` for the instance.
    pub fn from_indices(instance: &GameInstance, indices: &[usize]) -> Result<Self> {
        let mut attacked = vec![false; instance.n()];
        for &w in indices {
            if w >= instance.n() {
                return Err(Error::DimensionMismatch(format!(
                    "attacked worker {w} outside 0..{}",
                    instance.n()
                )));
            }
            if attacked[w] {
                return Err(Error::InvalidParameter(format!("worker {w} attacked twice")));
            }
            attacked[w] = true;
        }
        let expected = instance.effective_tau();
        if indices.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "attack size {} != min(tau, n) = {expected}",
                indices.len()
            )));
        }
        Ok(Self { attacked })
    }

    pub fn n(&self) -> usize {
        self.attacked.len()
    }

    pub fn is_attacked(&self, w: usize) -> bool {
        self.attacked[w]
    }

    pub fn attacked_count(&self) -> usize {
        self.attacked.iter().filter(|&&a| a).count()
    }

    /// Indices of attacked workers, ascending.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.attacked.len()).filter(|&w| self.attacked[w]).collect()
    }
}

/// Weighted-majority decision rule: a task's final label is the sign of the
/// weight-weighted sum of surviving workers' labels, with a zero sum read as
/// failure.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    weights: Vec<f64>,
}

impl DecisionRule {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter(
                "decision rule weights must be strictly positive".into(),
            ));
        }
        Ok(Self { weights })
    }

    /// The natural rule weighting each worker by its proficiency.
    pub fn proficiency_weighted(instance: &GameInstance) -> Self {
        Self { weights: instance.workers().iter().map(|w| w.proficiency).collect() }
    }

    pub fn weight(&self, w: usize) -> f64 {
        self.weights[w]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Per-worker value of disabling that worker in the additive model:
/// proficiency times the total utility of the worker's tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionVector(Vec<f64>);

impl ContributionVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum over all workers.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for ContributionVector {
    type Output = f64;

    fn index(&self, w: usize) -> &f64 {
        &self.0[w]
    }
}

/// Contribution of each worker under `assignment`: `p_w * sum of assigned
/// task utilities`. A worker with no tasks contributes 0.
pub fn worker_contributions(
    assignment: &Assignment,
    instance: &GameInstance,
) -> Result<ContributionVector> {
    check_dims(assignment, instance)?;
    let values = (0..instance.n())
        .map(|w| {
            let task_value: f64 = (0..instance.m())
                .filter(|&t| assignment.assigned(w, t))
                .map(|t| instance.utility(t))
                .sum();
            instance.proficiency(w) * task_value
        })
        .collect();
    Ok(ContributionVector(values))
}

/// Defender utility for a single-worker-per-task assignment: the sum of
/// non-attacked workers' contributions.
pub fn evaluate_additive(
    assignment: &Assignment,
    attack: &Attack,
    instance: &GameInstance,
) -> Result<f64> {
    check_dims(assignment, instance)?;
    check_attack_dims(attack, instance)?;
    for t in 0..instance.m() {
        if (0..instance.n()).filter(|&w| assignment.assigned(w, t)).count() > 1 {
            return Err(Error::MultiWorkerTask(t));
        }
    }
    let contributions = worker_contributions(assignment, instance)?;
    Ok((0..instance.n())
        .filter(|&w| !attack.is_attacked(w))
        .map(|w| contributions[w])
        .sum())
}

/// Largest per-task pool of surviving workers the exact enumerator accepts.
pub const MAJORITY_ENUMERATION_LIMIT: usize = 20;

/// Exact expected utility under weighted-majority aggregation.
///
/// Per task, the surviving (assigned and not attacked) workers each return a
/// correct label with their own proficiency; the task succeeds when the
/// weighted label sum is strictly positive. The success probability is
/// computed by enumerating all `2^k` outcomes of the `k` survivors. Attacked
/// workers return no label; a task with no survivors contributes 0.
pub fn evaluate_majority_exact(
    assignment: &Assignment,
    attack: &Attack,
    instance: &GameInstance,
    rule: &DecisionRule,
) -> Result<f64> {
    check_dims(assignment, instance)?;
    check_attack_dims(attack, instance)?;
    if rule.len() != instance.n() {
        return Err(Error::DimensionMismatch(format!(
            "rule has {} weights for {} workers",
            rule.len(),
            instance.n()
        )));
    }
    let mut total = 0.0;
    for t in 0..instance.m() {
        let survivors: Vec<usize> = (0..instance.n())
            .filter(|&w| assignment.assigned(w, t) && !attack.is_attacked(w))
            .collect();
        if survivors.is_empty() {
            continue;
        }
        if survivors.len() > MAJORITY_ENUMERATION_LIMIT {
            return Err(Error::EnumerationLimit {
                required: 1u128 << survivors.len(),
                limit: 1u128 << MAJORITY_ENUMERATION_LIMIT,
            });
        }
        total += instance.utility(t) * majority_success_probability(&survivors, instance, rule);
    }
    Ok(total)
}

/// Probability that the weighted vote of `survivors` is strictly positive.
fn majority_success_probability(
    survivors: &[usize],
    instance: &GameInstance,
    rule: &DecisionRule,
) -> f64 {
    let k = survivors.len();
    let mut success = 0.0;
    for outcome in 0u32..(1u32 << k) {
        let mut prob = 1.0;
        let mut signed = 0.0;
        for (bit, &w) in survivors.iter().enumerate() {
            let correct = outcome & (1 << bit) != 0;
            let p = instance.proficiency(w);
            if correct {
                prob *= p;
                signed += rule.weight(w);
            } else {
                prob *= 1.0 - p;
                signed -= rule.weight(w);
            }
        }
        if signed > 0.0 {
            success += prob;
        }
    }
    success
}

fn check_dims(assignment: &Assignment, instance: &GameInstance) -> Result<()> {
    if assignment.n() != instance.n() || assignment.m() != instance.m() {
        return Err(Error::DimensionMismatch(format!(
            "assignment is {}x{}, instance is {}x{}",
            assignment.n(),
            assignment.m(),
            instance.n(),
            instance.m()
        )));
    }
    Ok(())
}

fn check_attack_dims(attack: &Attack, instance: &GameInstance) -> Result<()> {
    if attack.n() != instance.n() {
        return Err(Error::DimensionMismatch(format!(
            "attack covers {} workers, instance has {}",
            attack.n(),
            instance.n()
        )));
    }
    Ok(())
}
