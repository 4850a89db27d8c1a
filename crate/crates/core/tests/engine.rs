use krillwalk::engine::{
    level_means, simulate_trials, Limits, PruneConfig, RngContract, Runner, Simulator, TrialRecord,
};
use krillwalk::model::{OffspringLaw, StepLaw};
use krillwalk::pathlaw::{path_probability, BarrierProfile, PathQuery, TerminalCondition};

fn pemantle(horizon: usize) -> Simulator {
    Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), Limits::default())
        .unwrap()
        .with_level_count(horizon + 1)
}

fn stay_nonnegative(step: &StepLaw, n: usize) -> f64 {
    let q = PathQuery::new(step.clone(), BarrierProfile::one_sided(n, 0), TerminalCondition::AtLeast(0));
    path_probability(&q).unwrap().value()
}

#[test]
fn level_sizes_match_the_exact_series() {
    let horizon = 20;
    let sim = pemantle(horizon);
    let trials = 200_000u64;
    let mut sums = vec![0.0f64; horizon + 1];
    let mut squares = vec![0.0f64; horizon + 1];
    simulate_trials(&sim, &Runner::new(0).unwrap(), 31, 0..trials, |r| {
        for (n, &c) in r.levels.iter().enumerate() {
            sums[n] += c as f64;
            squares[n] += (c as f64).powi(2);
        }
    });
    let exact = level_means(&StepLaw::pemantle(), &OffspringLaw::constant(2), horizon).unwrap();
    for n in [1usize, 2, 5, 10, 20] {
        let mean = sums[n] / trials as f64;
        let var = squares[n] / trials as f64 - mean * mean;
        let se = (var / trials as f64).sqrt();
        assert!((mean - exact[n]).abs() < 4.0 * se, "n={n}: {mean} vs {} (se {se})", exact[n]);
    }
}

#[test]
fn spine_survival_matches_the_dp() {
    let sim = pemantle(0);
    let trials = 100_000u64;
    for n in [1usize, 5, 20, 100] {
        let alive = (0..trials)
            .filter(|&i| {
                sim.simulate_spine(&mut RngContract::new(77, i).generator(), n, None)
                    .unwrap()
                    .spine_alive
            })
            .count();
        let p = stay_nonnegative(&StepLaw::pemantle(), n);
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let freq = alive as f64 / trials as f64;
        assert!((freq - p).abs() < 4.0 * se, "n={n}: {freq} vs {p}");
    }
}

#[test]
fn single_lineage_dies_at_the_first_negative_position() {
    // with one child per node the tree is one walk, and Z - 1 counts the
    // steps taken before it first goes below 0
    let step: StepLaw = "-1:0.5,0:0.2,1:0.3".parse().unwrap();
    let sim = Simulator::new(step.clone(), OffspringLaw::constant(1), Limits::default()).unwrap();
    let trials = 100_000u64;
    let mut survive = [0u64; 6];
    for i in 0..trials {
        let r = sim.simulate_killed_tree(i, &mut RngContract::new(3, i).generator());
        assert_eq!(r.depth as u64 + 1, r.z);
        for (n, s) in survive.iter_mut().enumerate() {
            *s += (r.z > n as u64) as u64;
        }
    }
    assert_eq!(survive[0], trials);
    for n in 1..6 {
        let p = stay_nonnegative(&step, n);
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let freq = survive[n] as f64 / trials as f64;
        assert!((freq - p).abs() < 4.0 * se, "n={n}: {freq} vs {p}");
    }
}

fn collect(sim: &Simulator, threads: usize, maxbar: Option<PruneConfig>) -> Vec<TrialRecord> {
    let runner = Runner::new(threads).unwrap().with_chunk(97);
    let mut out = Vec::new();
    runner.for_each_chunk(
        0..3000,
        |range| {
            range
                .map(|i| {
                    let mut rng = RngContract::new(2024, i).generator();
                    match maxbar {
                        Some(p) => sim.simulate_maxbar(i, &mut rng, p),
                        None => sim.simulate_killed_tree(i, &mut rng),
                    }
                })
                .collect::<Vec<_>>()
        },
        |chunk| out.extend(chunk),
    );
    out
}

#[test]
fn records_do_not_depend_on_the_thread_count() {
    let sim = pemantle(8);
    let prune = PruneConfig {
        eps: 1e-3,
        frontier_budget: 300,
    };
    for mode in [None, Some(prune)] {
        let one = collect(&sim, 1, mode);
        assert_eq!(one, collect(&sim, 4, mode));
        assert!(one.iter().enumerate().all(|(i, r)| r.trial == i as u64));
    }
}

#[test]
fn pruned_maxima_agree_with_finer_re_exploration() {
    let step = StepLaw::plus_minus_one(0.005).unwrap();
    let sim = Simulator::new(step, OffspringLaw::constant(2), Limits::default()).unwrap();
    assert!(sim.certified());
    let coarse = PruneConfig {
        eps: 1e-6,
        frontier_budget: 100_000,
    };
    let fine = PruneConfig {
        eps: 1e-9,
        ..coarse
    };
    let trials = 10_000u64;
    let (mut differ, mut bias) = (0u64, 0.0f64);
    for i in 0..trials {
        let a = sim.simulate_maxbar(i, &mut RngContract::new(55, i).generator(), coarse);
        let b = sim.simulate_maxbar(i, &mut RngContract::new(55, i).generator(), fine);
        assert!(!a.budget_exceeded && !b.budget_exceeded);
        assert_eq!(a.m_living, b.m_living);
        assert!(b.m_all >= a.m_all);
        assert!(a.m_all >= a.m_living);
        differ += (a.m_all != b.m_all) as u64;
        bias += a.prune_bias_bound.unwrap();
    }
    // differences are rare events with total rate at most `bias`
    let allowed = bias + 4.0 * bias.sqrt() + 1.0;
    assert!((differ as f64) <= allowed, "{differ} differences, bias {bias}");
}

#[test]
fn critical_pruning_reports_partial_results() {
    let sim = pemantle(0);
    let prune = PruneConfig {
        eps: 1e-6,
        frontier_budget: 2_000,
    };
    let mut exceeded = 0;
    for i in 0..300 {
        let r = sim.simulate_maxbar(i, &mut RngContract::new(9, i).generator(), prune);
        assert!(r.m_all >= r.m_living);
        assert!(r.prune_bias_bound.is_some());
        exceeded += r.budget_exceeded as u32;
    }
    // the critical tree outgrows a small frontier in most trials
    assert!(exceeded > 0);
}
