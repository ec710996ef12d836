mod common;

use std::sync::Arc;

use common::{corpus, sample, TestRng};
use hyqubo::backends::{exact_solve, ExactBackend, SharedSampler};
use hyqubo::bnb::{branch_and_bound, partial_lower_bound, BnbConfig};
use hyqubo::decomposer::{clamp, qbsolv_solve, DecomposerConfig};
use hyqubo::encoders::{decode, encode};
use hyqubo::portfolio::{hss_solve, kerberos_solve, PortfolioConfig};
use hyqubo::problems::{brute, ProblemInstance, TspInstance};

fn exact() -> SharedSampler {
    Arc::new(ExactBackend)
}

#[test]
fn exact_solve_matches_truth_table() {
    for q in corpus(10, 80, 1, 12) {
        let (x, e) = q.brute_min();
        let r = exact_solve(&q.model()).unwrap();
        assert_eq!(r.sample.bits(), &x[..]);
        assert!((r.energy - e).abs() <= 1e-9);
    }
}

#[test]
fn clamp_identity_over_every_sub_assignment() {
    let mut rng = TestRng::new(20);
    for q in corpus(21, 40, 2, 10) {
        let m = q.model();
        let base = rng.bits(q.n);
        let subset: Vec<usize> = (0..q.n).filter(|_| rng.unit() < 0.5).collect();
        if subset.is_empty() {
            continue;
        }
        let (sub, remap) = clamp(&m, &sample(base.clone()), &subset).unwrap();
        assert_eq!(remap, subset);
        for mask in 0u64..(1 << subset.len()) {
            let y: Vec<u8> = (0..subset.len()).map(|k| ((mask >> k) & 1) as u8).collect();
            let mut full = base.clone();
            for (k, &v) in remap.iter().enumerate() {
                full[v] = y[k];
            }
            let got = sub.energy(&sample(y)).unwrap();
            assert!((got - q.energy(&full)).abs() <= 1e-9);
        }
    }
}

#[test]
fn qbsolv_with_whole_problem_is_exact() {
    for (k, q) in corpus(30, 30, 2, 14).into_iter().enumerate() {
        let m = q.model();
        let cfg = DecomposerConfig::default()
            .with_backend(exact())
            .with_fraction(1.0)
            .with_seed(k as u64);
        let r = qbsolv_solve(&m, &cfg).unwrap();
        assert!((r.energy - q.brute_min().1).abs() <= 1e-9);
    }
}

#[test]
fn bnb_proves_truth_table_optimum() {
    for (k, q) in corpus(40, 24, 2, 18).into_iter().enumerate() {
        let m = q.model();
        let r = branch_and_bound(&m, &BnbConfig::standard(exact(), k as u64)).unwrap();
        assert!(r.proven_optimal);
        assert_eq!(r.gap, 0.0);
        assert!((r.incumbent.energy - q.brute_min().1).abs() <= 1e-9);
    }
}

#[test]
fn partial_bound_never_exceeds_a_completion() {
    let mut rng = TestRng::new(50);
    for q in corpus(51, 100, 1, 10) {
        let m = q.model();
        let fixed: Vec<Option<bool>> = (0..q.n)
            .map(|_| match rng.below(3) {
                0 => Some(false),
                1 => Some(true),
                _ => None,
            })
            .collect();
        let bound = partial_lower_bound(&m, &fixed).unwrap();
        let free: Vec<usize> = (0..q.n).filter(|&i| fixed[i].is_none()).collect();
        let mut best = f64::INFINITY;
        for mask in 0u64..(1 << free.len()) {
            let mut x: Vec<u8> = fixed.iter().map(|f| u8::from(f == &Some(true))).collect();
            for (k, &v) in free.iter().enumerate() {
                x[v] = ((mask >> k) & 1) as u8;
            }
            best = best.min(q.energy(&x));
        }
        assert!(bound <= best + 1e-9, "bound {bound} above completion minimum {best}");
    }
}

#[test]
fn every_workflow_solves_a_small_tour() {
    let dist = vec![
        vec![0.0, 3.0, 4.0, 2.0, 7.0],
        vec![3.0, 0.0, 4.0, 6.0, 3.0],
        vec![4.0, 4.0, 0.0, 5.0, 8.0],
        vec![2.0, 6.0, 5.0, 0.0, 6.0],
        vec![7.0, 3.0, 8.0, 6.0, 0.0],
    ];
    let tsp = TspInstance::new("five", dist).unwrap();
    let optimum = brute::tsp_optimum(&tsp).1;
    let inst = ProblemInstance::Tsp(tsp);
    let (model, enc) = encode(&inst).unwrap();

    let objective = |r: &hyqubo::SampleRecord| decode(&enc, &r.sample, &inst).unwrap().objective;
    let q = qbsolv_solve(
        &model,
        &DecomposerConfig::default().with_backend(exact()).with_fraction(0.5),
    )
    .unwrap();
    let k = kerberos_solve(&model, &PortfolioConfig::standard(exact(), 3)).unwrap();
    let h = hss_solve(&model, &PortfolioConfig::standard(exact(), 3)).unwrap();
    let b = branch_and_bound(&model, &BnbConfig::standard(exact(), 3)).unwrap();
    assert!(b.proven_optimal);
    for r in [&q, &k, &h, &b.incumbent] {
        assert_eq!(objective(r), Some(optimum));
    }
}
