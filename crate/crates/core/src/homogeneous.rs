//! Exact optimal assignment for homogeneous task utilities.
//!
//! With equal task utilities an optimal commitment assigns one worker per
//! task, so an assignment reduces to a per-worker task count vector. Under
//! the attacker's best response the defender keeps the `n - tau` smallest
//! per-worker contributions, and the solver searches candidate commitments
//! worker by worker:
//!
//! For every worker `b` and count `s_b` — the candidate *best surviving*
//! contribution level `L = p_b * s_b` — the remaining workers either shield
//! (absorb one of the `tau` attacks by carrying at least `L` worth of work),
//! survive below `L`, or idle. Conditional on the level, survivors are
//! filled greedily in proficiency order, and the shield/survivor split is
//! resolved exactly by a small dynamic program over (shields used, budget
//! used). The best candidate over all `(b, s_b)` is the global optimum: any
//! assignment's outcome is reproduced by the candidate anchored at its best
//! surviving worker.
//!
//! Candidates whose level cannot beat the incumbent are pruned by two
//! admissible bounds, which keeps the search close to `O(n^2 m tau)` in
//! practice.

use crate::attacker::top_contribution_attack;
use crate::error::{Error, Result};
use crate::model::{worker_contributions, Assignment, GameInstance, Task, UTILITY_TOL};

/// Reduce a homogeneous instance to exactly `budget` tasks.
///
/// Tasks are interchangeable when utilities are equal, so the first
/// `budget` tasks are kept and `m` becomes `budget`.
pub fn normalize_homogeneous(instance: &GameInstance) -> Result<GameInstance> {
    if !instance.is_homogeneous() {
        return Err(Error::NonHomogeneousUtilities);
    }
    let budget = instance.budget();
    let tasks: Vec<Task> = instance.tasks()[..budget].to_vec();
    Ok(instance.with_tasks(tasks, budget))
}

/// Exact optimal single-worker-per-task assignment and its utility under
/// the attacker's best response.
///
/// Requires homogeneous utilities and a normalized instance (`m == budget`).
pub fn solve_homogeneous(instance: &GameInstance) -> Result<(Assignment, f64)> {
    if !instance.is_homogeneous() {
        return Err(Error::NonHomogeneousUtilities);
    }
    if instance.m() != instance.budget() {
        return Err(Error::InvalidParameter(
            "instance not normalized: m != budget (apply normalize_homogeneous)".into(),
        ));
    }
    let n = instance.n();
    let m = instance.m();
    let tau = instance.effective_tau();
    let p: Vec<f64> = instance.workers().iter().map(|w| w.proficiency).collect();
    let caps: Vec<usize> = instance.workers().iter().map(|w| w.capacity.min(m)).collect();

    // Fallback candidate: fill workers in proficiency order. When every
    // commitment is wiped out (tau >= n) this is what gets returned.
    let mut best_counts = proficiency_fill(&caps, m);
    let mut best_value = score_counts(&best_counts, &p, tau);

    // Warm start for pruning: near-even splits over the top k workers.
    for k in (tau + 1)..=n {
        if let Some(counts) = even_split(&caps, k, m) {
            let value = score_counts(&counts, &p, tau);
            if value > best_value {
                best_value = value;
                best_counts = counts;
            }
        }
    }

    if tau < n {
        let mut dp = LevelDp::new(n, m, tau);
        for b in 0..n {
            for s_b in 1..=caps[b] {
                let level = p[b] * s_b as f64;
                // every survivor contributes at most the level
                let bound_levels = (n - tau) as f64 * level;
                // anchor plus shields have a floor cost; the rest is worth
                // at most p_max per task
                let cheapest_shield = div_ceil_tol(level, p[0]);
                let spend = s_b + tau * cheapest_shield;
                if spend > m {
                    break; // cost only grows with s_b
                }
                let bound_budget = level + (m - spend) as f64 * p[0];
                if bound_levels.min(bound_budget) <= best_value + UTILITY_TOL {
                    continue;
                }
                if let Some((value, counts)) = dp.solve(&p, &caps, b, s_b, level) {
                    if value > best_value + UTILITY_TOL {
                        best_value = value;
                        best_counts = counts;
                    }
                }
            }
        }
    }

    top_up(&mut best_counts, &caps, m);
    let assignment = Assignment::from_counts(instance, &best_counts)?;
    let contributions = worker_contributions(&assignment, instance)?;
    let attack = top_contribution_attack(&contributions, instance);
    let value = (0..n)
        .filter(|&w| !attack.is_attacked(w))
        .map(|w| contributions[w])
        .sum();
    Ok((assignment, value))
}

/// Sum of the `n - tau` smallest unit-utility contributions `p_w * s_w`.
fn score_counts(counts: &[usize], p: &[f64], tau: usize) -> f64 {
    let mut contributions: Vec<f64> =
        counts.iter().zip(p).map(|(&s, &pw)| pw * s as f64).collect();
    contributions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let keep = contributions.len().saturating_sub(tau);
    contributions[..keep].iter().sum()
}

/// Fill workers in proficiency order up to capacity until `m` tasks placed.
fn proficiency_fill(caps: &[usize], m: usize) -> Vec<usize> {
    let mut counts = vec![0usize; caps.len()];
    let mut left = m;
    for (w, &cap) in caps.iter().enumerate() {
        let take = left.min(cap);
        counts[w] = take;
        left -= take;
        if left == 0 {
            break;
        }
    }
    counts
}

/// Near-even split of `m` tasks over the top `k` workers, remainder dealt
/// from the least proficient of the `k` upward, overflow cascading; `None`
/// if the prefix cannot hold all `m` tasks.
fn even_split(caps: &[usize], k: usize, m: usize) -> Option<Vec<usize>> {
    let mut counts = vec![0usize; caps.len()];
    let mut desired = vec![m / k; k];
    for j in 0..(m % k) {
        desired[k - 1 - j] += 1;
    }
    let mut carry = 0usize;
    for w in 0..k {
        let want = desired[w] + carry;
        let take = want.min(caps[w]);
        counts[w] = take;
        carry = want - take;
    }
    (carry == 0).then_some(counts)
}

/// Spend any leftover budget: extra tasks never lower the post-attack
/// utility because every order statistic of the contribution vector is
/// monotone in the counts.
fn top_up(counts: &mut [usize], caps: &[usize], m: usize) {
    let mut left = m - counts.iter().sum::<usize>();
    for w in 0..counts.len() {
        if left == 0 {
            break;
        }
        let add = left.min(caps[w] - counts[w]);
        counts[w] += add;
        left -= add;
    }
}

/// `ceil(value / p)` with the crate's utility tolerance.
fn div_ceil_tol(value: f64, p: f64) -> usize {
    ((value / p) - UTILITY_TOL).ceil().max(0.0) as usize
}

/// `floor(value / p)` with the crate's utility tolerance.
fn div_floor_tol(value: f64, p: f64) -> usize {
    ((value / p) + UTILITY_TOL).floor().max(0.0) as usize
}

const ACT_NONE: u16 = 0;
const ACT_IDLE: u16 = 1;
const ACT_SHIELD: u16 = 2;
const ACT_FULL: u16 = 3;
// partial fills encode the amount taken: ACT_PARTIAL_BASE + taken
const ACT_PARTIAL_BASE: u16 = 4;

/// Dynamic program resolving, for one candidate level, which workers shield
/// and how the surviving workers are filled.
///
/// Workers other than the anchor are processed in proficiency order. A state
/// is (shields placed, budget used, still-filling?) and carries the survivor
/// utility collected so far. Survivor fills are front-loaded: once a worker
/// takes less than its level cap, later workers may only shield or idle.
/// Budget for shields still owed is reserved through a suffix minimum-cost
/// table so a partial fill never overcommits.
struct LevelDp {
    tau: usize,
    m: usize,
    states: usize,
    cur: Vec<f64>,
    next: Vec<f64>,
    /// action[(row, state)]: how the state was reached from the row's worker
    action: Vec<u16>,
    /// predecessor budget per (row, state)
    prev_q: Vec<u32>,
    shield_cost: Vec<usize>,
    surv_cap: Vec<usize>,
    /// min_suffix_shields[row][r]: cheapest way to place r shields in the
    /// suffix starting at row; `m + 1` marks infeasible
    min_suffix_shields: Vec<usize>,
    others: Vec<usize>,
}

impl LevelDp {
    fn new(n: usize, m: usize, tau: usize) -> Self {
        let states = 2 * (tau + 1) * (m + 1);
        Self {
            tau,
            m,
            states,
            cur: vec![f64::NEG_INFINITY; states],
            next: vec![f64::NEG_INFINITY; states],
            action: vec![ACT_NONE; n * states],
            prev_q: vec![0; n * states],
            shield_cost: vec![0; n],
            surv_cap: vec![0; n],
            min_suffix_shields: vec![0; (n + 1) * (tau + 1)],
            others: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn idx(&self, open: usize, r: usize, q: usize) -> usize {
        (open * (self.tau + 1) + r) * (self.m + 1) + q
    }

    /// Solve the candidate anchored at worker `b` carrying `s_b` tasks.
    /// Returns the total utility (anchor plus survivors) and the counts.
    fn solve(
        &mut self,
        p: &[f64],
        caps: &[usize],
        b: usize,
        s_b: usize,
        level: f64,
    ) -> Option<(f64, Vec<usize>)> {
        let n = p.len();
        let (tau, m, states) = (self.tau, self.m, self.states);
        let q_stride = m + 1;
        self.others.clear();
        self.others.extend((0..n).filter(|&w| w != b));
        let rows = self.others.len();
        if rows < tau {
            return None;
        }
        for &w in &self.others {
            self.shield_cost[w] = div_ceil_tol(level, p[w]).max(1);
            self.surv_cap[w] = div_floor_tol(level, p[w]).min(caps[w]);
        }

        // cheapest placement of r shields within each suffix of `others`
        let infeasible = m + 1;
        let mss_stride = tau + 1;
        for r in 0..=tau {
            self.min_suffix_shields[rows * mss_stride + r] =
                if r == 0 { 0 } else { infeasible };
        }
        for j in (0..rows).rev() {
            let w = self.others[j];
            let feasible = self.shield_cost[w] <= caps[w];
            for r in 0..=tau {
                let mut best = self.min_suffix_shields[(j + 1) * mss_stride + r];
                if feasible && r > 0 {
                    let with = self.min_suffix_shields[(j + 1) * mss_stride + r - 1]
                        .saturating_add(self.shield_cost[w]);
                    best = best.min(with);
                }
                self.min_suffix_shields[j * mss_stride + r] = best;
            }
        }
        if self.min_suffix_shields[tau].saturating_add(s_b) > m {
            return None;
        }

        self.cur.fill(f64::NEG_INFINITY);
        let start = self.idx(1, 0, s_b);
        self.cur[start] = 0.0;
        for j in 0..rows {
            let w = self.others[j];
            self.next.fill(f64::NEG_INFINITY);
            let row_base = j * states;
            self.action[row_base..row_base + states].fill(ACT_NONE);
            let shield_feasible = self.shield_cost[w] <= caps[w];
            let cap = self.surv_cap[w];
            for open in 0..2usize {
                for r in 0..=tau {
                    let base = (open * (tau + 1) + r) * q_stride;
                    for q in s_b..=m {
                        let cur = self.cur[base + q];
                        if cur == f64::NEG_INFINITY {
                            continue;
                        }
                        // idle once filling has stopped
                        if open == 0 {
                            let idx = r * q_stride + q;
                            if cur > self.next[idx] {
                                self.next[idx] = cur;
                                self.action[row_base + idx] = ACT_IDLE;
                                self.prev_q[row_base + idx] = q as u32;
                            }
                        }
                        // shield
                        if r < tau && shield_feasible && q + self.shield_cost[w] <= m {
                            let idx =
                                (open * (tau + 1) + r + 1) * q_stride + q + self.shield_cost[w];
                            if cur > self.next[idx] {
                                self.next[idx] = cur;
                                self.action[row_base + idx] = ACT_SHIELD;
                                self.prev_q[row_base + idx] = q as u32;
                            }
                        }
                        if open == 1 {
                            // survive at the full level cap, keep filling
                            if q + cap <= m {
                                let value = cur + p[w] * cap as f64;
                                let idx = ((tau + 1) + r) * q_stride + q + cap;
                                if value > self.next[idx] {
                                    self.next[idx] = value;
                                    self.action[row_base + idx] = ACT_FULL;
                                    self.prev_q[row_base + idx] = q as u32;
                                }
                            }
                            // partial fill (possibly zero), then stop filling;
                            // reserve budget for shields still owed
                            let owed =
                                self.min_suffix_shields[(j + 1) * mss_stride + tau - r];
                            if owed <= m - q {
                                let spendable = m - q - owed;
                                let take = cap.saturating_sub(1).min(spendable);
                                let value = cur + p[w] * take as f64;
                                let idx = r * q_stride + q + take;
                                if value > self.next[idx] {
                                    self.next[idx] = value;
                                    self.action[row_base + idx] =
                                        ACT_PARTIAL_BASE + take as u16;
                                    self.prev_q[row_base + idx] = q as u32;
                                }
                            }
                        }
                    }
                }
            }
            std::mem::swap(&mut self.cur, &mut self.next);
        }

        // best final state with all shields placed
        let mut best = f64::NEG_INFINITY;
        let mut best_state = None;
        for open in 0..2usize {
            for q in s_b..=m {
                let v = self.cur[self.idx(open, tau, q)];
                if v > best {
                    best = v;
                    best_state = Some((open, q));
                }
            }
        }
        let (mut open, mut q) = best_state?;
        // walk back-pointers to recover counts
        let mut counts = vec![0usize; n];
        counts[b] = s_b;
        let mut r = tau;
        for j in (0..rows).rev() {
            let w = self.others[j];
            let state = (open * (tau + 1) + r) * q_stride + q;
            let act = self.action[j * states + state];
            let pq = self.prev_q[j * states + state] as usize;
            match act {
                ACT_IDLE => {}
                ACT_SHIELD => {
                    counts[w] = self.shield_cost[w];
                    r -= 1;
                }
                ACT_FULL => {
                    counts[w] = self.surv_cap[w];
                }
                a if a >= ACT_PARTIAL_BASE => {
                    counts[w] = (a - ACT_PARTIAL_BASE) as usize;
                    open = 1; // predecessor was still filling
                }
                _ => return None, // unreachable
            }
            q = pq;
        }
        Some((p[b] * s_b as f64 + best, counts))
    }
}
