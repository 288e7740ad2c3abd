//! Solver-versus-oracle checks beyond the unit fuzz: wider parameter
//! ranges, the structural properties of optimal assignments, and the
//! multi-worker improvement examples.

use adversarial_assignment::attacker::{
    attack_value, best_response_additive, best_response_enumerative, dual_certificate,
};
use adversarial_assignment::baselines::{brute_force_optimal, split_k};
use adversarial_assignment::heterogeneous::{
    greedy_multiworker_improve, restrict_top_b_tasks, solve_single_worker_exact,
};
use adversarial_assignment::homogeneous::{normalize_homogeneous, solve_homogeneous};
use adversarial_assignment::model::{
    evaluate_additive, evaluate_majority_exact, worker_contributions,
};
use adversarial_assignment::rng::derive_rng;
use adversarial_assignment::saa::sample_outcomes;
use adversarial_assignment::{Assignment, Attack, DecisionRule, GameInstance};
use rand::Rng;

fn random_homogeneous(rng: &mut impl Rng, n_max: usize, m_max: usize, tau_max: usize) -> GameInstance {
    let n = rng.gen_range(1..=n_max);
    let m = rng.gen_range(1..=m_max);
    let tau = rng.gen_range(1..=tau_max);
    let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=1.0)).collect();
    let cs: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=m)).collect();
    GameInstance::from_parts(&ps, &cs, &vec![1.0; m], tau, m).unwrap()
}

#[test]
fn homogeneous_solver_matches_oracle_wide_fuzz() {
    let mut rng = derive_rng(0xFEED, &[1]);
    for trial in 0..700 {
        let inst = random_homogeneous(&mut rng, 6, 8, 4);
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (_, oracle) = brute_force_optimal(&inst, false, &rule).unwrap();
        let (_, value) = solve_homogeneous(&inst).unwrap();
        assert!(
            (value - oracle).abs() <= 1e-9,
            "trial {trial}: solver {value} vs oracle {oracle} on {inst:?}"
        );
    }
}

#[test]
fn homogeneous_solver_handles_clustered_proficiencies() {
    // near-ties stress the level arithmetic
    let mut rng = derive_rng(0xFEED, &[2]);
    for trial in 0..250 {
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(2..=7);
        let tau = rng.gen_range(1..=2);
        let base: f64 = rng.gen_range(0.3..=0.9);
        let ps: Vec<f64> = (0..n)
            .map(|_| (base + rng.gen_range(-0.05..=0.05f64)).clamp(0.05, 1.0))
            .collect();
        let cs: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=m)).collect();
        let inst = GameInstance::from_parts(&ps, &cs, &vec![1.0; m], tau, m).unwrap();
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (_, oracle) = brute_force_optimal(&inst, false, &rule).unwrap();
        let (_, value) = solve_homogeneous(&inst).unwrap();
        assert!(
            (value - oracle).abs() <= 1e-9,
            "trial {trial}: solver {value} vs oracle {oracle} on {inst:?}"
        );
    }
}

#[test]
fn homogeneous_rational_ratio_proficiencies() {
    // exact integer ratios hit the ceil/floor boundaries of the level math
    let grids: &[&[f64]] = &[
        &[1.0, 0.5, 0.25],
        &[0.8, 0.4, 0.2],
        &[0.9, 0.6, 0.3],
        &[1.0, 1.0, 0.5, 0.5],
        &[0.75, 0.5, 0.25, 0.25],
    ];
    for ps in grids {
        for tau in 1..=2 {
            for m in 2..=7 {
                let cs = vec![m; ps.len()];
                let inst = GameInstance::from_parts(ps, &cs, &vec![1.0; m], tau, m).unwrap();
                let rule = DecisionRule::proficiency_weighted(&inst);
                let (_, oracle) = brute_force_optimal(&inst, false, &rule).unwrap();
                let (_, value) = solve_homogeneous(&inst).unwrap();
                assert!(
                    (value - oracle).abs() <= 1e-9,
                    "p={ps:?} tau={tau} m={m}: {value} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn optimal_value_attained_on_prefix_supports() {
    // brute force restricted to assignments whose support is a prefix of
    // the proficiency order reaches the unrestricted optimum
    let mut rng = derive_rng(0xFEED, &[3]);
    for _ in 0..120 {
        let inst = random_homogeneous(&mut rng, 4, 6, 2);
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (_, unrestricted) = brute_force_optimal(&inst, false, &rule).unwrap();
        let prefix_best = prefix_support_optimum(&inst);
        assert!(
            (unrestricted - prefix_best).abs() <= 1e-9,
            "unrestricted {unrestricted} vs prefix {prefix_best} on {inst:?}"
        );
    }
}

/// Test-side oracle: enumerate count vectors whose support is a prefix.
fn prefix_support_optimum(inst: &GameInstance) -> f64 {
    let n = inst.n();
    let m = inst.m();
    let tau = inst.effective_tau();
    let mut best = 0.0f64;
    let mut counts = vec![0usize; n];
    fn recurse(
        inst: &GameInstance,
        counts: &mut Vec<usize>,
        w: usize,
        left: usize,
        tau: usize,
        best: &mut f64,
    ) {
        if w == counts.len() {
            // prefix support check
            let mut seen_zero = false;
            for &c in counts.iter() {
                if c == 0 {
                    seen_zero = true;
                } else if seen_zero {
                    return;
                }
            }
            let mut contributions: Vec<f64> = counts
                .iter()
                .enumerate()
                .map(|(w, &c)| inst.proficiency(w) * c as f64)
                .collect();
            contributions.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let keep = contributions.len().saturating_sub(tau);
            let value: f64 = contributions[..keep].iter().sum();
            if value > *best {
                *best = value;
            }
            return;
        }
        for c in 0..=left.min(inst.capacity(w)) {
            counts[w] = c;
            recurse(inst, counts, w + 1, left - c, tau, best);
        }
        counts[w] = 0;
    }
    recurse(inst, &mut counts, 0, m, tau, &mut best);
    best
}

#[test]
fn multiworker_never_helps_on_homogeneous_tasks() {
    // single-worker sufficiency on small homogeneous instances: the
    // multi-worker optimum (majority aggregation, budget counts pairs)
    // cannot exceed the single-worker optimum
    let mut rng = derive_rng(0xFEED, &[4]);
    for trial in 0..60 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=4);
        let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..=1.0)).collect();
        let cs = vec![m; n];
        let inst = GameInstance::from_parts(&ps, &cs, &vec![1.0; m], 1, m).unwrap();
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (_, single) = brute_force_optimal(&inst, false, &rule).unwrap();
        let (_, multi) = brute_force_optimal(&inst, true, &rule).unwrap();
        assert!(
            multi <= single + 1e-9,
            "trial {trial}: multi {multi} beat single {single} on {inst:?}"
        );
        assert!(multi >= single - 1e-9, "multi is a superset search");
    }
}

#[test]
fn heterogeneous_solver_wide_fuzz() {
    let mut rng = derive_rng(0xFEED, &[5]);
    for trial in 0..250 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=6);
        let tau = rng.gen_range(1..=3);
        let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=1.0)).collect();
        let mut cs: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=m)).collect();
        while cs.iter().sum::<usize>() < m {
            let w = rng.gen_range(0..n);
            cs[w] += 1;
        }
        let us: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let inst = GameInstance::from_parts(&ps, &cs, &us, tau, m).unwrap();
        let rule = DecisionRule::proficiency_weighted(&inst);
        let (_, oracle) = brute_force_optimal(&inst, false, &rule).unwrap();
        let (_, value) = solve_single_worker_exact(&inst).unwrap();
        assert!(
            (value - oracle).abs() <= 1e-9,
            "trial {trial}: solver {value} vs oracle {oracle} on {inst:?}"
        );
    }
}

#[test]
fn restriction_to_top_budget_tasks_never_hurts() {
    let mut rng = derive_rng(0xFEED, &[6]);
    for _ in 0..80 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(2..=5);
        let budget = rng.gen_range(1..=m - 1);
        let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..=1.0)).collect();
        let cs = vec![m; n];
        let us: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let inst = GameInstance::from_parts(&ps, &cs, &us, 1, budget).unwrap();
        let rule = DecisionRule::proficiency_weighted(&inst);
        // unrestricted brute force may assign any tasks within budget
        let (_, full) = brute_force_optimal(&inst, false, &rule).unwrap();
        let restricted = restrict_top_b_tasks(&inst);
        let (_, top_b) = solve_single_worker_exact(&restricted).unwrap();
        assert!(
            top_b >= full - 1e-9,
            "restricted {top_b} below unrestricted {full} on {inst:?}"
        );
    }
}

#[test]
fn normalized_homogeneous_pipeline_on_partial_budget() {
    let inst = GameInstance::from_parts(&[0.9, 0.7], &[10, 10], &[1.0; 10], 1, 6).unwrap();
    let normalized = normalize_homogeneous(&inst).unwrap();
    assert_eq!(normalized.m(), 6);
    let (assignment, value) = solve_homogeneous(&normalized).unwrap();
    assert!(value > 0.0);
    assert_eq!(assignment.total_assignments(), 6);
}

#[test]
fn solver_dominates_every_split_k() {
    let mut rng = derive_rng(0xFEED, &[7]);
    for _ in 0..60 {
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(2..=8);
        let tau = rng.gen_range(1..=2);
        let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..=1.0)).collect();
        let cs = vec![m; n];
        let inst = GameInstance::from_parts(&ps, &cs, &vec![1.0; m], tau, m).unwrap();
        let (_, opt_value) = solve_homogeneous(&inst).unwrap();
        for k in 1..=n {
            let Ok(split) = split_k(&inst, k) else { continue };
            let attack = best_response_additive(&split, &inst).unwrap();
            let split_value = evaluate_additive(&split, &attack, &inst).unwrap();
            assert!(
                opt_value >= split_value - 1e-9,
                "split-{k} {split_value} beat optimal {opt_value} on {inst:?}"
            );
        }
    }
}

#[test]
fn duality_holds_on_random_assignments() {
    let mut rng = derive_rng(0xFEED, &[8]);
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        let tau = rng.gen_range(1..=n);
        let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=1.0)).collect();
        let cs = vec![m; n];
        let us: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let inst = GameInstance::from_parts(&ps, &cs, &us, tau, m).unwrap();
        // random single-worker assignment
        let mut assignment = Assignment::empty(n, m);
        for t in 0..m {
            if rng.gen_bool(0.8) {
                assignment.set(rng.gen_range(0..n), t, true);
            }
        }
        let contributions = worker_contributions(&assignment, &inst).unwrap();
        let attack = best_response_additive(&assignment, &inst).unwrap();
        let primal = attack_value(&contributions, &attack);
        let dual = dual_certificate(&contributions, inst.tau());
        assert!(
            (dual.value(inst.tau()) - primal).abs() <= 1e-9,
            "dual {} vs primal {primal}",
            dual.value(inst.tau())
        );
    }
}

#[test]
fn greedy_improvement_example_reaches_exact_point_eight() {
    let inst = GameInstance::from_parts(&[0.9, 0.8], &[2, 2], &[1.0, 0.5], 1, 2).unwrap();
    let (start, start_value) = solve_single_worker_exact(&inst).unwrap();
    assert!((start_value - 0.45).abs() <= 1e-9);
    let rule = DecisionRule::proficiency_weighted(&inst);
    for seed in [0u64, 1, 2, 3, 4] {
        let samples = sample_outcomes(&inst, 2500, seed).unwrap();
        let improved = greedy_multiworker_improve(&start, &inst, &rule, &samples).unwrap();
        let (_, exact) = best_response_enumerative(&improved, &inst, |a, att| {
            evaluate_majority_exact(a, att, &inst, &rule)
        })
        .unwrap();
        assert!(
            (exact - 0.8).abs() <= 1e-9,
            "seed {seed}: exact value {exact} after improvement"
        );
    }
}

#[test]
fn attacked_worker_is_inert_in_majority_aggregation() {
    let inst =
        GameInstance::from_parts(&[0.9, 0.8, 0.6], &[3, 3, 3], &[1.0, 0.7, 0.4], 1, 3)
            .unwrap();
    let rule = DecisionRule::proficiency_weighted(&inst);
    let mut base = Assignment::empty(3, 3);
    base.set(0, 0, true);
    base.set(1, 1, true);
    base.set(2, 2, true);
    let attack = Attack::from_indices(&inst, &[1]).unwrap();
    let before = evaluate_majority_exact(&base, &attack, &inst, &rule).unwrap();
    // add the attacked worker to every task: nothing changes
    let mut extended = base.clone();
    for t in 0..3 {
        extended.set(1, t, true);
    }
    let after = evaluate_majority_exact(&extended, &attack, &inst, &rule).unwrap();
    assert!((before - after).abs() <= 1e-12);
}
