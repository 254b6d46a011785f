use super::*;
use crate::matrix::testutil::rng;
use crate::tensor::einstein_product as ep;
use crate::tensor::identity_tensor;
use crate::tensor::testutil::random_tensor;
use rand::Rng;

fn random_assignment(r: &mut impl Rng, out: &SolveOutcome) -> BTreeMap<String, QTensor> {
    out.all_slots().into_iter().map(|(n, s)| (n, random_tensor(r, &s.row_modes, &s.col_modes))).collect()
}

fn rel(lhs: &QTensor, e: &QTensor) -> f64 {
    lhs.sub(e).unwrap().frobenius_norm() / (1.0 + e.frobenius_norm())
}

#[test]
fn axb_identity_and_zero() {
    let mut r = rng(80);
    let c = random_tensor(&mut r, &[2], &[3]);
    let out = solve_axb(&identity_tensor(&[2]).unwrap(), &identity_tensor(&[3]).unwrap(), &c, &SolverConfig::default()).unwrap();
    assert!(out.consistent);
    assert!(out.solutions["X"].particular().max_abs_diff(&c) < 1e-14);

    let z = QTensor::zeros(TensorShape::new(vec![2], vec![2]).unwrap());
    let out = solve_axb(&z, &identity_tensor(&[3]).unwrap(), &c, &SolverConfig::default()).unwrap();
    assert!(!out.consistent);
    assert!(out.solutions.is_empty());
    let v: Vec<_> = out.violated().collect();
    assert_eq!(v[0].label, "R_A*C");
    assert!((v[0].residual - c.frobenius_norm()).abs() < 1e-14);
}

#[test]
fn two_term_random_consistent() {
    let mut r = rng(81);
    for _ in 0..5 {
        let a = random_tensor(&mut r, &[3], &[2]);
        let b = random_tensor(&mut r, &[2], &[3]);
        let c = random_tensor(&mut r, &[3], &[2]);
        let d = random_tensor(&mut r, &[1], &[3]);
        let x0 = random_tensor(&mut r, &[2], &[2]);
        let y0 = random_tensor(&mut r, &[2], &[1]);
        let e = ep(&ep(&a, &x0).unwrap(), &b).unwrap().add(&ep(&ep(&c, &y0).unwrap(), &d).unwrap()).unwrap();
        let k = TwoTermCoeffs { a, b, c, d, e };
        let out = solve_two_term(&k, &SolverConfig::default()).unwrap();
        assert!(out.consistent, "{:?}", out.condition_residuals);
        for _ in 0..5 {
            let s = out.instantiate(&random_assignment(&mut r, &out)).unwrap();
            assert!(rel(&two_term_lhs(&k, &s["X"], &s["Y"]).unwrap(), &k.e) < 1e-9);
        }
    }
}

#[test]
fn mixed_random_consistent() {
    let mut r = rng(82);
    for _ in 0..5 {
        let k0 = MixedCoeffs {
            a: random_tensor(&mut r, &[4], &[2]),
            b: random_tensor(&mut r, &[2], &[4]),
            c: random_tensor(&mut r, &[4], &[2]),
            d: random_tensor(&mut r, &[2], &[4]),
            f: random_tensor(&mut r, &[4], &[1]),
            g: random_tensor(&mut r, &[2], &[4]),
            e: QTensor::zeros(TensorShape::square(&[4]).unwrap()),
        };
        let [xs, ys, z1s, z2s] = k0.unknown_shapes().unwrap();
        let w: Vec<QTensor> = [xs, ys, z1s, z2s].iter().map(|s| random_tensor(&mut r, &s.row_modes, &s.col_modes)).collect();
        let e = mixed_lhs(&k0, &w[0], &w[1], &w[2], &w[3]).unwrap();
        let k = MixedCoeffs { e, ..k0 };
        let out = solve_mixed(&k, &SolverConfig::default()).unwrap();
        assert!(out.consistent, "{:?}", out.condition_residuals);
        for _ in 0..5 {
            let s = out.instantiate(&random_assignment(&mut r, &out)).unwrap();
            assert!(rel(&mixed_lhs(&k, &s["X"], &s["Y"], &s["Z1"], &s["Z2"]).unwrap(), &k.e) < 1e-9);
        }
    }
}

#[test]
fn triple_random_consistent() {
    let mut r = rng(83);
    let (i, j, kk, o, q, p) = (3, 3, 2, 2, 2, 2);
    for _ in 0..3 {
        let mut eqs = Vec::new();
        for _ in 0..3 {
            eqs.push(MixedCoeffs {
                a: random_tensor(&mut r, &[i], &[kk]),
                b: random_tensor(&mut r, &[o], &[j]),
                c: random_tensor(&mut r, &[i], &[q]),
                d: random_tensor(&mut r, &[p], &[j]),
                f: random_tensor(&mut r, &[i], &[q]),
                g: random_tensor(&mut r, &[p], &[j]),
                e: QTensor::zeros(TensorShape::new(vec![i], vec![j]).unwrap()),
            });
        }
        let z: Vec<QTensor> = (0..4).map(|_| random_tensor(&mut r, &[q], &[p])).collect();
        for (n, k) in eqs.iter_mut().enumerate() {
            let x = random_tensor(&mut r, &[kk], &[j]);
            let y = random_tensor(&mut r, &[i], &[o]);
            k.e = mixed_lhs(k, &x, &y, &z[n], &z[n + 1]).unwrap();
        }
        let eqs: [MixedCoeffs; 3] = eqs.try_into().unwrap();
        let out = solve_triple_system(&eqs, &SolverConfig::default()).unwrap();
        assert!(out.consistent, "{:?}", out.condition_residuals);
        for _ in 0..5 {
            let s = out.instantiate(&random_assignment(&mut r, &out)).unwrap();
            for (n, k) in eqs.iter().enumerate() {
                let m = n + 1;
                let lhs = mixed_lhs(k, &s[&format!("X{m}")], &s[&format!("Y{m}")], &s[&format!("Z{m}")], &s[&format!("Z{}", m + 1)]).unwrap();
                assert!(rel(&lhs, &k.e) < 1e-8, "eq {m}: {}", rel(&lhs, &k.e));
            }
        }
    }
}

#[test]
fn chain_random_consistent() {
    let mut r = rng(84);
    let (i, j, q, p) = (3, 3, 2, 2);
    for _ in 0..3 {
        let z: Vec<QTensor> = (0..5).map(|_| random_tensor(&mut r, &[q], &[p])).collect();
        let eqs: Vec<TwoTermCoeffs> = (0..4)
            .map(|k| {
                let a = random_tensor(&mut r, &[i], &[q]);
                let b = random_tensor(&mut r, &[p], &[j]);
                let c = random_tensor(&mut r, &[i], &[q]);
                let d = random_tensor(&mut r, &[p], &[j]);
                let e = ep(&ep(&a, &z[k]).unwrap(), &b).unwrap().add(&ep(&ep(&c, &z[k + 1]).unwrap(), &d).unwrap()).unwrap();
                TwoTermCoeffs { a, b, c, d, e }
            })
            .collect();
        let eqs: [TwoTermCoeffs; 4] = eqs.try_into().unwrap();
        let out = solve_chain_system(&eqs, &SolverConfig::default()).unwrap();
        assert!(out.consistent, "{:?}", out.condition_residuals);
        for _ in 0..5 {
            let s = out.instantiate(&random_assignment(&mut r, &out)).unwrap();
            for (k, c) in eqs.iter().enumerate() {
                let lhs = two_term_lhs(c, &s[&format!("Z{}", k + 1)], &s[&format!("Z{}", k + 2)]).unwrap();
                assert!(rel(&lhs, &c.e) < 1e-8, "eq {}: {}", k + 1, rel(&lhs, &c.e));
            }
        }
    }
}
