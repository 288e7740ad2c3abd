// temporary timing probe, removed before release
use adversarial_assignment::experiments::*;
use adversarial_assignment::generate::*;
use adversarial_assignment::homogeneous::solve_homogeneous;
use adversarial_assignment::heterogeneous::solve_single_worker_exact;
use std::time::Instant;

#[test]
#[ignore]
fn probe_homogeneous_scale() {
    for tau in [1usize, 3, 5] {
        let ps = sample_proficiencies(50, ProficiencyDist::Uniform, 1).unwrap();
        let us = vec![1.0; 50];
        let inst = build_instance(&ps, &us, tau, None, None).unwrap();
        let start = Instant::now();
        let mut value = 0.0;
        for _ in 0..10 {
            value = solve_homogeneous(&inst).unwrap().1;
        }
        println!("n=m=50 tau={tau}: {:?} per solve, value {value}", start.elapsed() / 10);
    }
    // Table 1 scale: m = 100
    for n in [5usize, 25, 50] {
        let ps = sample_proficiencies(n, ProficiencyDist::Uniform, 2).unwrap();
        let us = vec![1.0; 100];
        let inst = build_instance(&ps, &us, 1, None, None).unwrap();
        let start = Instant::now();
        let reps = 20;
        for _ in 0..reps {
            solve_homogeneous(&inst).unwrap();
        }
        println!("n={n} m=100 tau=1: {:?} per solve", start.elapsed() / reps);
    }
}

#[test]
#[ignore]
fn probe_bnb_scale() {
    for tau in [1usize, 3, 5] {
        let mut total = std::time::Duration::ZERO;
        let mut worst = std::time::Duration::ZERO;
        for seed in 0..10u64 {
            let ps = sample_proficiencies(10, ProficiencyDist::Uniform, seed).unwrap();
            let us = sample_task_utilities(15, UtilityDist::Uniform01, seed).unwrap();
            let inst = build_instance(&ps, &us, tau, None, None).unwrap();
            let start = Instant::now();
            solve_single_worker_exact(&inst).unwrap();
            let dt = start.elapsed();
            total += dt;
            worst = worst.max(dt);
        }
        println!("bnb n=10 m=15 tau={tau}: avg {:?}, worst {:?}", total / 10, worst);
    }
}

#[test]
#[ignore]
fn probe_table1_numbers() {
    let config = LossConfig { n_list: vec![5, 50], m: 100, prof_dist: ProficiencyDist::Uniform, trials: 300, seed: 7 };
    let start = Instant::now();
    let records = run_robustness_loss(&config).unwrap();
    println!("300 trials took {:?}", start.elapsed());
    for (n, loss) in mean_robustness_loss(&records) {
        println!("n={n}: mean loss {:.2}%", loss * 100.0);
    }
}

#[test]
#[ignore]
fn probe_table2_cell() {
    let config = MultiworkerConfig {
        workers: vec![3],
        tasks: vec![5],
        util_dist: UtilityDist::Uniform01,
        tau: 1,
        saa_k: 2500,
        trials: 200,
        seed: 11,
    };
    let start = Instant::now();
    let records = run_multiworker_improvement(&config).unwrap();
    println!("200 trials took {:?}", start.elapsed());
    for ((n, m), imp) in mean_relative_improvement(&records) {
        println!("workers={n} tasks={m}: mean improvement {:.2}%", imp * 100.0);
    }
}
