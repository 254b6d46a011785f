use std::collections::BTreeMap;

use qts_core::solvers::{solve_axb, solve_mixed, solve_two_term, MixedCoeffs, SolverConfig, TwoTermCoeffs};
use qts_core::tensor::{einstein_product as ep, identity_tensor, QTensor, TensorShape};
use qts_core::toolkit::{gen_consistent, gen_inconsistent, verify_solution, InstanceSpec, System, SystemKind};
use qts_core::Quaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random(rng: &mut impl Rng, rows: &[usize], cols: &[usize]) -> QTensor {
    let shape = TensorShape::new(rows.to_vec(), cols.to_vec()).unwrap();
    let data = (0..shape.len())
        .map(|_| {
            Quaternion::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
        .collect();
    QTensor::from_vec(shape, data).unwrap()
}

fn zeros(rows: &[usize], cols: &[usize]) -> QTensor {
    QTensor::zeros(TensorShape::new(rows.to_vec(), cols.to_vec()).unwrap())
}

#[test]
fn two_term_without_second_term_matches_axb() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = SolverConfig::default();
    for n in 0..20 {
        let a = random(&mut rng, &[3], &[2]);
        let b = random(&mut rng, &[2], &[3]);
        let e = if n % 2 == 0 {
            let x = random(&mut rng, &[2], &[2]);
            ep(&ep(&a, &x).unwrap(), &b).unwrap()
        } else {
            random(&mut rng, &[3], &[3])
        };
        let k = TwoTermCoeffs { a: a.clone(), b: b.clone(), c: zeros(&[3], &[2]), d: zeros(&[2], &[3]), e: e.clone() };
        let two = solve_two_term(&k, &cfg).unwrap();
        let one = solve_axb(&a, &b, &e, &cfg).unwrap();
        assert_eq!(two.consistent, one.consistent, "instance {n}");
        assert_eq!(two.consistent, n % 2 == 0);
        if one.consistent {
            let diff = two.solutions["X"].particular().max_abs_diff(one.solutions["X"].particular());
            assert!(diff < 1e-12, "instance {n}: {diff}");
            assert_eq!(two.solutions["Y"].particular().frobenius_norm(), 0.0);
        }
    }
}

#[test]
fn zero_right_hand_sides_give_zero_particulars() {
    for kind in SystemKind::ALL {
        let g = gen_consistent(&InstanceSpec::new(kind, 4)).unwrap();
        let rhs = g.system.rhs().iter().map(|e| QTensor::zeros(e.shape().clone())).collect();
        let system = g.system.with_rhs(rhs).unwrap();
        let out = system.solve(&SolverConfig::default()).unwrap();
        assert!(out.consistent, "{kind}");
        for (name, x) in out.particulars() {
            assert_eq!(x.frobenius_norm(), 0.0, "{kind} {name}");
        }
    }
}

#[test]
fn mixed_with_only_left_term_reduces_to_range_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = SolverConfig::default();
    for n in 0..10 {
        let a = random(&mut rng, &[4], &[2]);
        let inside = n % 2 == 0;
        let e = if inside {
            let x = random(&mut rng, &[2], &[3]);
            ep(&a, &x).unwrap()
        } else {
            random(&mut rng, &[4], &[3])
        };
        let k = MixedCoeffs {
            a,
            b: zeros(&[2], &[3]),
            c: zeros(&[4], &[2]),
            d: random(&mut rng, &[2], &[3]),
            f: zeros(&[4], &[1]),
            g: random(&mut rng, &[2], &[3]),
            e,
        };
        let out = solve_mixed(&k, &cfg).unwrap();
        assert_eq!(out.consistent, inside, "instance {n}: {:?}", out.condition_residuals);
    }
}

#[test]
fn identity_chain_with_doubled_rhs() {
    let kind = SystemKind::Chain;
    let i = identity_tensor(&[2]).unwrap();
    let coefficients: BTreeMap<String, QTensor> = kind.coefficient_names().into_iter().map(|n| (n, i.clone())).collect();
    let two = i.scale(2.0);
    let system = System::new(kind, coefficients, vec![two.clone(), two.clone(), two.clone(), two]).unwrap();
    let out = system.solve(&SolverConfig::default()).unwrap();
    assert!(out.consistent, "{:?}", out.condition_residuals);
    assert!(verify_solution(&system, &out.particulars()).unwrap().max_ratio() < 1e-12);
    let ones: BTreeMap<String, QTensor> = system.unknowns().keys().map(|n| (n.clone(), i.clone())).collect();
    assert!(verify_solution(&system, &ones).unwrap().max_ratio() < 1e-12);
}

#[test]
fn conditions_do_not_depend_on_rank_tolerance() {
    let loose = SolverConfig { rank_tol: 1e-10, ..SolverConfig::default() };
    let tight = SolverConfig { rank_tol: 1e-13, ..SolverConfig::default() };
    for kind in SystemKind::ALL {
        for seed in 0..5 {
            let spec = InstanceSpec::new(kind, seed);
            for system in [gen_consistent(&spec).unwrap().system, gen_inconsistent(&spec).unwrap().system] {
                let a = system.solve(&loose).unwrap();
                let b = system.solve(&tight).unwrap();
                assert_eq!(a.consistent, b.consistent, "{kind} seed {seed}");
                assert_eq!(a.condition_residuals.len(), b.condition_residuals.len());
                for (x, y) in a.condition_residuals.iter().zip(&b.condition_residuals) {
                    assert_eq!(x.label, y.label);
                    assert_eq!(x.passed, y.passed, "{kind} seed {seed} {}", x.label);
                    let gap = (x.residual - y.residual).abs();
                    assert!(gap <= 1e-10 * (1.0 + x.scale), "{kind} seed {seed} {}: {} vs {}", x.label, x.residual, y.residual);
                }
            }
        }
    }
}
