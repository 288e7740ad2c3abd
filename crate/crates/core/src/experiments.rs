//! Reproducible experiment harness emitting machine-readable records.
//!
//! Three runners mirror the quantitative studies the solvers support:
//! baseline comparisons across attack sizes, the robustness loss of the
//! optimal homogeneous assignment when no attack occurs, and the gain from
//! allowing multiple workers per task. Trials run in parallel with
//! per-trial derived seeds, and record streams are bit-for-bit reproducible
//! from `(config, seed)` — wall-clock timing is therefore reported out of
//! band, never in the records.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacker::{best_response_additive, best_response_enumerative};
use crate::baselines::{monte_carlo, nonadversarial_optimal, split_k};
use crate::error::{Error, Result};
use crate::generate::{
    build_instance, sample_proficiencies, sample_task_utilities, ProficiencyDist, UtilityDist,
    WorkerStream,
};
use crate::heterogeneous::{
    greedy_multiworker_improve, restrict_top_b_tasks, solve_single_worker_exact,
};
use crate::homogeneous::{normalize_homogeneous, solve_homogeneous};
use crate::model::{
    evaluate_additive, evaluate_majority_exact, Assignment, Attack, DecisionRule, GameInstance,
};
use crate::rng::splitmix64;
use crate::saa::sample_outcomes;

/// Assignment method names used in records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OptHomogeneous,
    OptHetMilp,
    OptHetGreedy,
    SplitK,
    MonteCarlo,
    TopMonteCarlo,
    NonAdversarial,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::OptHomogeneous => "opt-hom",
            Self::OptHetMilp => "opt-het-milp",
            Self::OptHetGreedy => "opt-het-greedy",
            Self::SplitK => "split-k",
            Self::MonteCarlo => "mc",
            Self::TopMonteCarlo => "top-mc",
            Self::NonAdversarial => "nonadv",
        }
    }
}

/// One trial-method outcome. The `ms` column exists for wall-time but is
/// always 0 in emitted records so that identical configurations produce
/// byte-identical CSV; timing goes to logs instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub tau: usize,
    pub dist: String,
    pub method: String,
    pub utility: f64,
    pub utility_noattack: f64,
    pub ms: u64,
}

/// Derive the seed for one trial of a run.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut state = seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    splitmix64(&mut state)
}

/// Which game family a baseline comparison runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonMode {
    Homogeneous,
    Heterogeneous,
}

/// Configuration for [`run_baseline_comparison`].
#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub mode: ComparisonMode,
    pub n: usize,
    pub m: usize,
    pub taus: Vec<usize>,
    pub prof_dist: ProficiencyDist,
    pub util_dist: UtilityDist,
    pub trials: u64,
    pub seed: u64,
}

impl BaselineConfig {
    /// 50 workers and tasks, attack sizes 1..=5.
    pub fn homogeneous_default(trials: u64, seed: u64) -> Self {
        Self {
            mode: ComparisonMode::Homogeneous,
            n: 50,
            m: 50,
            taus: (1..=5).collect(),
            prof_dist: ProficiencyDist::Uniform,
            util_dist: UtilityDist::Constant,
            trials,
            seed,
        }
    }

    /// 10 workers, 15 tasks, attack sizes 1..=5.
    pub fn heterogeneous_default(trials: u64, seed: u64) -> Self {
        Self {
            mode: ComparisonMode::Heterogeneous,
            n: 10,
            m: 15,
            taus: (1..=5).collect(),
            prof_dist: ProficiencyDist::Uniform,
            util_dist: UtilityDist::Uniform01,
            trials,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.trials == 0 || self.taus.is_empty() {
            return Err(Error::InvalidConfig(
                "n, m, trials, and taus must be non-empty/positive".into(),
            ));
        }
        if self.mode == ComparisonMode::Homogeneous && self.util_dist != UtilityDist::Constant
        {
            return Err(Error::InvalidConfig(
                "homogeneous comparison requires constant utilities".into(),
            ));
        }
        Ok(())
    }

    fn dist_label(&self) -> String {
        match self.mode {
            ComparisonMode::Homogeneous => self.prof_dist.name().to_string(),
            ComparisonMode::Heterogeneous => {
                format!("{}+{}", self.prof_dist.name(), self.util_dist.name())
            }
        }
    }
}

/// Optimal method and baselines on the same instances, per trial and attack
/// size. Every method is scored under the attacker's best response and in
/// the no-attack counterfactual.
pub fn run_baseline_comparison(config: &BaselineConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let results: Result<Vec<Vec<ExperimentRecord>>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| baseline_trial(config, trial))
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

fn baseline_trial(config: &BaselineConfig, trial: u64) -> Result<Vec<ExperimentRecord>> {
    let seed = trial_seed(config.seed, trial);
    let ps = sample_proficiencies(config.n, config.prof_dist, seed)?;
    let us = sample_task_utilities(config.m, config.util_dist, seed)?;
    let dist = config.dist_label();
    let mut records = Vec::new();
    for &tau in &config.taus {
        let instance = build_instance(&ps, &us, tau, None, None)?;
        let (opt_method, opt_assignment) = match config.mode {
            ComparisonMode::Homogeneous => {
                let normalized = normalize_homogeneous(&instance)?;
                let (a, _) = solve_homogeneous(&normalized)?;
                (Method::OptHomogeneous, a)
            }
            ComparisonMode::Heterogeneous => {
                let restricted = restrict_top_b_tasks(&instance);
                let (a, _) = solve_single_worker_exact(&restricted)?;
                (Method::OptHetMilp, a)
            }
        };
        let mut push = |method: Method, assignment: &Assignment| -> Result<()> {
            let attack = best_response_additive(assignment, &instance)?;
            let utility = evaluate_additive(assignment, &attack, &instance)?;
            let noattack =
                evaluate_additive(assignment, &Attack::none(instance.n()), &instance)?;
            records.push(ExperimentRecord {
                trial,
                seed,
                n: config.n,
                m: config.m,
                tau,
                dist: dist.clone(),
                method: method.name().to_string(),
                utility,
                utility_noattack: noattack,
                ms: 0,
            });
            Ok(())
        };
        push(opt_method, &opt_assignment)?;
        let (split, _) = best_split_k(&instance)?;
        push(Method::SplitK, &split)?;
        let mc = monte_carlo(&instance, seed ^ 0x6d63, false)?;
        push(Method::MonteCarlo, &mc)?;
        let top_mc = monte_carlo(&instance, seed ^ 0x746d63, true)?;
        push(Method::TopMonteCarlo, &top_mc)?;
    }
    Ok(records)
}

/// Best split-k assignment over all k, scored under the best response.
/// Ties keep the smallest k.
pub fn best_split_k(instance: &GameInstance) -> Result<(Assignment, f64)> {
    let mut best: Option<(Assignment, f64)> = None;
    for k in 1..=instance.n() {
        let Ok(assignment) = split_k(instance, k) else { continue };
        let attack = best_response_additive(&assignment, instance)?;
        let value = evaluate_additive(&assignment, &attack, instance)?;
        match &best {
            Some((_, incumbent)) if value <= *incumbent => {}
            _ => best = Some((assignment, value)),
        }
    }
    best.ok_or_else(|| Error::InfeasibleCapacity("no feasible split-k".into()))
}

/// Configuration for [`run_robustness_loss`].
#[derive(Debug, Clone)]
pub struct LossConfig {
    pub n_list: Vec<usize>,
    pub m: usize,
    pub prof_dist: ProficiencyDist,
    pub trials: u64,
    pub seed: u64,
}

impl LossConfig {
    /// 100 tasks, worker counts 5, 10, ..., 50, attack size 1.
    pub fn default_sweep(trials: u64, seed: u64) -> Self {
        Self {
            n_list: (1..=10).map(|i| i * 5).collect(),
            m: 100,
            prof_dist: ProficiencyDist::Uniform,
            trials,
            seed,
        }
    }
}

/// Robust-versus-nonadversarial study at `tau = 1`: per trial and worker
/// count, the optimal robust assignment and the nonadversarial optimum are
/// both scored with and without the attack. Worker populations grow
/// incrementally inside a trial, so the n = 10 pool extends the n = 5 pool.
pub fn run_robustness_loss(config: &LossConfig) -> Result<Vec<ExperimentRecord>> {
    if config.trials == 0 || config.m == 0 || config.n_list.is_empty() {
        return Err(Error::InvalidConfig("trials, m, n_list must be positive".into()));
    }
    let results: Result<Vec<Vec<ExperimentRecord>>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| loss_trial(config, trial))
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

fn loss_trial(config: &LossConfig, trial: u64) -> Result<Vec<ExperimentRecord>> {
    let seed = trial_seed(config.seed, trial);
    let mut stream = WorkerStream::new(config.prof_dist, seed);
    let mut records = Vec::new();
    for &n in &config.n_list {
        let ps = stream.prefix(n).to_vec();
        let us = vec![1.0; config.m];
        let instance = build_instance(&ps, &us, 1, None, None)?;
        let (robust, robust_value) = solve_homogeneous(&instance)?;
        let robust_noattack =
            evaluate_additive(&robust, &Attack::none(instance.n()), &instance)?;
        let (nonadv, nonadv_noattack) = nonadversarial_optimal(&instance);
        let nonadv_attack = best_response_additive(&nonadv, &instance)?;
        let nonadv_value = evaluate_additive(&nonadv, &nonadv_attack, &instance)?;
        for (method, utility, noattack) in [
            (Method::OptHomogeneous, robust_value, robust_noattack),
            (Method::NonAdversarial, nonadv_value, nonadv_noattack),
        ] {
            records.push(ExperimentRecord {
                trial,
                seed,
                n,
                m: config.m,
                tau: 1,
                dist: config.prof_dist.name().to_string(),
                method: method.name().to_string(),
                utility,
                utility_noattack: noattack,
                ms: 0,
            });
        }
    }
    Ok(records)
}

/// Mean robustness loss per worker count: `1 - robust_noattack /
/// nonadversarial_noattack`, averaged over trials.
pub fn mean_robustness_loss(records: &[ExperimentRecord]) -> Vec<(usize, f64)> {
    let mut per_n: Vec<(usize, f64, u64)> = Vec::new();
    let mut trials: std::collections::HashMap<(u64, usize), (Option<f64>, Option<f64>)> =
        std::collections::HashMap::new();
    for r in records {
        let entry = trials.entry((r.trial, r.n)).or_default();
        if r.method == Method::OptHomogeneous.name() {
            entry.0 = Some(r.utility_noattack);
        } else if r.method == Method::NonAdversarial.name() {
            entry.1 = Some(r.utility_noattack);
        }
    }
    for ((_, n), (robust, nonadv)) in trials {
        if let (Some(robust), Some(nonadv)) = (robust, nonadv) {
            if nonadv > 0.0 {
                let loss = 1.0 - robust / nonadv;
                match per_n.iter_mut().find(|(nn, _, _)| *nn == n) {
                    Some((_, total, count)) => {
                        *total += loss;
                        *count += 1;
                    }
                    None => per_n.push((n, loss, 1)),
                }
            }
        }
    }
    per_n.sort_by_key(|&(n, _, _)| n);
    per_n.into_iter().map(|(n, total, count)| (n, total / count as f64)).collect()
}

/// Configuration for [`run_multiworker_improvement`].
#[derive(Debug, Clone)]
pub struct MultiworkerConfig {
    pub workers: Vec<usize>,
    pub tasks: Vec<usize>,
    pub util_dist: UtilityDist,
    pub tau: usize,
    pub saa_k: usize,
    pub trials: u64,
    pub seed: u64,
}

impl MultiworkerConfig {
    /// The single-attack grid: 2..=6 workers, 3..=6 tasks, K = 2500.
    pub fn tau1_default(trials: u64, seed: u64) -> Self {
        Self {
            workers: (2..=6).collect(),
            tasks: (3..=6).collect(),
            util_dist: UtilityDist::Uniform01,
            tau: 1,
            saa_k: 2500,
            trials,
            seed,
        }
    }

    /// The two-attack grid: 3..=6 workers, 3..=6 tasks, K = 2500.
    pub fn tau2_default(trials: u64, seed: u64) -> Self {
        Self { tau: 2, workers: (3..=6).collect(), ..Self::tau1_default(trials, seed) }
    }
}

/// Gain from allowing multiple workers per task: per cell and trial, the
/// exact single-worker optimum is improved by the sampling-guided greedy
/// and both are scored with the exact majority evaluator under the
/// enumerative best response (final scoring is exact so sampling noise is
/// not reported as improvement).
pub fn run_multiworker_improvement(config: &MultiworkerConfig) -> Result<Vec<ExperimentRecord>> {
    if config.trials == 0
        || config.saa_k == 0
        || config.workers.is_empty()
        || config.tasks.is_empty()
    {
        return Err(Error::InvalidConfig(
            "trials, saa_k, workers, tasks must be positive".into(),
        ));
    }
    let cells: Vec<(usize, usize)> = config
        .workers
        .iter()
        .flat_map(|&n| config.tasks.iter().map(move |&m| (n, m)))
        .collect();
    let jobs: Vec<(usize, usize, u64)> = cells
        .iter()
        .flat_map(|&(n, m)| (0..config.trials).map(move |t| (n, m, t)))
        .collect();
    let results: Result<Vec<Vec<ExperimentRecord>>> = jobs
        .into_par_iter()
        .map(|(n, m, trial)| multiworker_trial(config, n, m, trial))
        .collect();
    let mut flat: Vec<ExperimentRecord> = results?.into_iter().flatten().collect();
    // deterministic order: by cell then trial then method
    flat.sort_by(|a, b| {
        (a.n, a.m, a.trial, a.method.clone()).cmp(&(b.n, b.m, b.trial, b.method.clone()))
    });
    Ok(flat)
}

fn multiworker_trial(
    config: &MultiworkerConfig,
    n: usize,
    m: usize,
    trial: u64,
) -> Result<Vec<ExperimentRecord>> {
    // distinct seeds per cell so cells are independent
    let seed = trial_seed(config.seed ^ ((n as u64) << 32) ^ ((m as u64) << 16), trial);
    let ps = sample_proficiencies(n, ProficiencyDist::Uniform, seed)?;
    let us = sample_task_utilities(m, config.util_dist, seed)?;
    let instance = build_instance(&ps, &us, config.tau, None, None)?;
    let rule = DecisionRule::proficiency_weighted(&instance);
    let (start, _) = solve_single_worker_exact(&instance)?;
    let samples = sample_outcomes(&instance, config.saa_k, seed)?;
    let improved = greedy_multiworker_improve(&start, &instance, &rule, &samples)?;

    let exact_score = |assignment: &Assignment| -> Result<(f64, f64)> {
        let (_, value) = best_response_enumerative(assignment, &instance, |a, att| {
            evaluate_majority_exact(a, att, &instance, &rule)
        })?;
        let noattack =
            evaluate_majority_exact(assignment, &Attack::none(n), &instance, &rule)?;
        Ok((value, noattack))
    };
    let (v_start, na_start) = exact_score(&start)?;
    let (v_improved, na_improved) = exact_score(&improved)?;
    let dist = format!("uniform+{}", config.util_dist.name());
    Ok(vec![
        ExperimentRecord {
            trial,
            seed,
            n,
            m,
            tau: config.tau,
            dist: dist.clone(),
            method: Method::OptHetMilp.name().to_string(),
            utility: v_start,
            utility_noattack: na_start,
            ms: 0,
        },
        ExperimentRecord {
            trial,
            seed,
            n,
            m,
            tau: config.tau,
            dist,
            method: Method::OptHetGreedy.name().to_string(),
            utility: v_improved,
            utility_noattack: na_improved,
            ms: 0,
        },
    ])
}

/// Mean relative improvement of the greedy over the single-worker optimum
/// per (workers, tasks) cell. Trials whose single-worker value is below
/// `1e-12` are excluded (the ratio is undefined there).
pub fn mean_relative_improvement(records: &[ExperimentRecord]) -> Vec<((usize, usize), f64)> {
    use std::collections::HashMap;
    let mut trials: HashMap<(usize, usize, u64), (Option<f64>, Option<f64>)> = HashMap::new();
    for r in records {
        let entry = trials.entry((r.n, r.m, r.trial)).or_default();
        if r.method == Method::OptHetMilp.name() {
            entry.0 = Some(r.utility);
        } else if r.method == Method::OptHetGreedy.name() {
            entry.1 = Some(r.utility);
        }
    }
    let mut cells: HashMap<(usize, usize), (f64, u64)> = HashMap::new();
    for ((n, m, _), (start, improved)) in trials {
        if let (Some(start), Some(improved)) = (start, improved) {
            if start > 1e-12 {
                let cell = cells.entry((n, m)).or_default();
                cell.0 += (improved - start) / start;
                cell.1 += 1;
            }
        }
    }
    let mut out: Vec<((usize, usize), f64)> = cells
        .into_iter()
        .map(|(cell, (total, count))| (cell, total / count as f64))
        .collect();
    out.sort_by_key(|&((n, m), _)| (n, m));
    out
}

/// Write records as CSV with the fixed header
/// `trial,seed,n,m,tau,dist,method,utility,utility_noattack,ms`.
pub fn emit_csv<W: io::Write>(records: &[ExperimentRecord], writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    for record in records {
        csv_writer
            .serialize(record)
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    csv_writer.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

/// Records as a CSV string.
pub fn records_to_csv_string(records: &[ExperimentRecord]) -> Result<String> {
    let mut buffer = Vec::new();
    emit_csv(records, &mut buffer)?;
    String::from_utf8(buffer).map_err(|e| Error::Serialization(e.to_string()))
}

/// Parse records back from CSV.
pub fn parse_csv<R: io::Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    csv_reader
        .deserialize()
        .map(|row| row.map_err(|e| Error::Serialization(e.to_string())))
        .collect()
}
