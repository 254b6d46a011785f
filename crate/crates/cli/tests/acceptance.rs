//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use qts_core::ginverse::{projector_l, projector_r, tensor_penrose, tensor_pinv};
use qts_core::matrix::{to_complex_adjoint, ComplexAdjoint, DEFAULT_RANK_TOL};
use qts_core::solvers::SolverConfig;
use qts_core::tensor::{einstein_product, identity_tensor, tensor_conj_transpose, QTensor, TensorShape};
use qts_core::toolkit::{
    gen_consistent, gen_inconsistent, oracle_solve, random_assignment, random_tensor, verify_solution, InstanceSpec, System,
    SystemKind, ORACLE_MAX_UNKNOWNS,
};
use qts_core::Quaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn random_modes(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(1..=4)).collect()
}

/// All multi-indices of `modes` in row-major order.
fn multi_indices(modes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &m in modes {
        out = out.into_iter().flat_map(|p| (0..m).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

fn naive_contraction(a: &QTensor, b: &QTensor) -> QTensor {
    let inner = multi_indices(a.col_modes());
    let shape = TensorShape::new(a.row_modes().to_vec(), b.col_modes().to_vec()).unwrap();
    QTensor::from_fn(shape, |i, k| inner.iter().fold(Quaternion::ZERO, |acc, j| acc + a.get(i, j) * b.get(j, k)))
}

fn complex_matmul(a: &ComplexAdjoint, b: &ComplexAdjoint) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.rows() * b.cols()];
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            out[i * b.cols() + j] = (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum();
        }
    }
    out
}

fn low_rank_tensor(rng: &mut impl Rng, rows: &[usize], cols: &[usize]) -> QTensor {
    let left = random_tensor(rng, TensorShape::new(rows.to_vec(), vec![2]).unwrap());
    let right = random_tensor(rng, TensorShape::new(vec![2], cols.to_vec()).unwrap());
    einstein_product(&left, &right).unwrap()
}

/// Order 2 to 6 split into row and column modes, each mode at most 4.
fn random_shape(rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
    let order = rng.random_range(2..=6);
    let split = rng.random_range(1..order);
    (random_modes(rng, split), random_modes(rng, order - split))
}

fn penrose_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let (rows, cols) = random_shape(&mut rng);
        let a = if n % 4 == 3 {
            low_rank_tensor(&mut rng, &rows, &cols)
        } else {
            random_tensor(&mut rng, TensorShape::new(rows, cols).unwrap())
        };
        let p = tensor_pinv(&a, DEFAULT_RANK_TOL).unwrap();
        worst = worst.max(tensor_penrose(&a, &p).unwrap().max() / (1.0 + a.frobenius_norm()));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-10 && secs < 10.0,
        format!("100 tensors, max residual/(1+|A|) {worst:.2e} (limit 1e-10), {secs:.2} s (limit 10 s)"),
    )
}

fn homomorphism_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let (mut mat_dev, mut naive_dev, mut chi_dev): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let n = rng.random_range(1..=2);
        let rows = random_modes(&mut rng, n);
        let n = rng.random_range(1..=2);
        let inner = random_modes(&mut rng, n);
        let n = rng.random_range(1..=2);
        let cols = random_modes(&mut rng, n);
        let a = random_tensor(&mut rng, TensorShape::new(rows, inner.clone()).unwrap());
        let b = random_tensor(&mut rng, TensorShape::new(inner, cols).unwrap());
        let ab = einstein_product(&a, &b).unwrap();
        let (ma, mb) = (a.matricize(), b.matricize());
        let prod = ma.matmul(&mb).unwrap();
        mat_dev = mat_dev.max(ab.matricize().max_abs_diff(&prod));
        naive_dev = naive_dev.max(ab.max_abs_diff(&naive_contraction(&a, &b)));

        let chi_ab = to_complex_adjoint(&prod);
        let chained = complex_matmul(&to_complex_adjoint(&ma), &to_complex_adjoint(&mb));
        for i in 0..chi_ab.rows() {
            for j in 0..chi_ab.cols() {
                chi_dev = chi_dev.max((chi_ab.get(i, j) - chained[i * chi_ab.cols() + j]).norm());
            }
        }
    }
    let worst = mat_dev.max(naive_dev).max(chi_dev);
    verdict(
        worst < 1e-12,
        format!(
            "100 pairs, max deviation: matricization {mat_dev:.2e}, index contraction {naive_dev:.2e}, complex adjoint {chi_dev:.2e} (limit 1e-12)"
        ),
    )
}

#[derive(Default)]
struct RoundTrip {
    consistent_ok: usize,
    consistent_total: usize,
    inconsistent_ok: usize,
    inconsistent_total: usize,
    oracle_agree: usize,
    oracle_total: usize,
    oracle_skipped: usize,
    worst_particular: f64,
    worst_sampled: f64,
    failures: Vec<String>,
}

impl RoundTrip {
    fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.consistent_ok == self.consistent_total
            && self.inconsistent_ok == self.inconsistent_total
            && self.oracle_agree == self.oracle_total
    }

    fn summary(&self, kind: SystemKind) -> String {
        let mut s = format!(
            "{kind}: consistent {}/{}, inconsistent {}/{}, oracle {}/{}, max particular ratio {:.2e}",
            self.consistent_ok,
            self.consistent_total,
            self.inconsistent_ok,
            self.inconsistent_total,
            self.oracle_agree,
            self.oracle_total,
            self.worst_particular
        );
        if self.worst_sampled > 0.0 {
            s += &format!(", max sampled ratio {:.2e}", self.worst_sampled);
        }
        if self.oracle_skipped > 0 {
            s += &format!(", {} over the oracle size limit", self.oracle_skipped);
        }
        if let Some(f) = self.failures.first() {
            s += &format!("; first failure: {f}");
        }
        s
    }

    fn oracle(&mut self, system: &System, solver_consistent: bool) {
        let n: usize = system.unknowns().values().map(|s| 4 * s.len()).sum();
        if n > ORACLE_MAX_UNKNOWNS {
            self.oracle_skipped += 1;
            return;
        }
        self.oracle_total += 1;
        match oracle_solve(system) {
            Ok(r) if r.consistent == solver_consistent => self.oracle_agree += 1,
            Ok(r) => self.failures.push(format!("oracle says consistent={} (residual {:.2e})", r.consistent, r.residual)),
            Err(e) => self.failures.push(format!("oracle: {e}")),
        }
    }

    /// `bound` applies to the particular solution, `samples` random slot
    /// assignments must verify to `sample_bound`.
    fn consistent(&mut self, system: &System, bound: f64, samples: usize, sample_bound: f64, seed: u64) {
        self.consistent_total += 1;
        let out = match system.solve(&SolverConfig::default()) {
            Ok(o) => o,
            Err(e) => {
                self.failures.push(format!("seed {seed}: {e}"));
                return;
            }
        };
        self.oracle(system, out.consistent);
        if !out.consistent {
            self.failures.push(format!("seed {seed}: consistent instance rejected"));
            return;
        }
        let ratio = verify_solution(system, &out.particulars()).unwrap().max_ratio();
        self.worst_particular = self.worst_particular.max(ratio);
        let mut ok = ratio < bound;
        for s in 0..samples {
            let values = out.instantiate(&random_assignment(&out.all_slots(), seed * 1000 + s as u64)).unwrap();
            let r = verify_solution(system, &values).unwrap().max_ratio();
            self.worst_sampled = self.worst_sampled.max(r);
            ok &= r < sample_bound;
        }
        if ok {
            self.consistent_ok += 1;
        } else {
            self.failures.push(format!("seed {seed}: residual above bound"));
        }
    }

    fn inconsistent(&mut self, system: &System, seed: u64) {
        self.inconsistent_total += 1;
        let out = match system.solve(&SolverConfig::default()) {
            Ok(o) => o,
            Err(e) => {
                self.failures.push(format!("seed {seed}: {e}"));
                return;
            }
        };
        self.oracle(system, out.consistent);
        let named = out.violated().any(|c| !c.label.is_empty());
        if !out.consistent && named {
            self.inconsistent_ok += 1;
        } else {
            self.failures.push(format!("seed {seed}: inconsistent instance accepted"));
        }
    }
}

fn round_trip(kind: SystemKind, count: usize, bound: f64, samples: usize, sample_bound: f64) -> RoundTrip {
    let mut rt = RoundTrip::default();
    for seed in 0..count as u64 {
        let spec = InstanceSpec::new(kind, seed);
        match gen_consistent(&spec) {
            Ok(g) => rt.consistent(&g.system, bound, samples, sample_bound, seed),
            Err(e) => rt.failures.push(format!("seed {seed}: {e}")),
        }
        match gen_inconsistent(&spec) {
            Ok(g) => rt.inconsistent(&g.system, seed),
            Err(e) => rt.failures.push(format!("seed {seed}: {e}")),
        }
    }
    rt
}

fn axb_suite() -> Verdict {
    let rt = round_trip(SystemKind::Axb, 100, 1e-9, 0, 0.0);
    verdict(rt.passed(), rt.summary(SystemKind::Axb))
}

fn two_term_and_mixed_suite() -> Verdict {
    let a = round_trip(SystemKind::TwoTerm, 50, 1e-9, 0, 0.0);
    let b = round_trip(SystemKind::Mixed, 50, 1e-9, 0, 0.0);
    verdict(a.passed() && b.passed(), format!("{}; {}", a.summary(SystemKind::TwoTerm), b.summary(SystemKind::Mixed)))
}

fn triple_suite() -> Verdict {
    let start = Instant::now();
    let rt = round_trip(SystemKind::Triple, 25, 1e-8, 20, 1e-8);
    let secs = start.elapsed().as_secs_f64();
    verdict(rt.passed() && secs < 60.0, format!("{}, {secs:.2} s (limit 60 s)", rt.summary(SystemKind::Triple)))
}

/// `A_k⋆Z_k + C_k⋆Z_{k+1}⋆D_k = E_k` with `B_k = I` and `C_k = −I`.
fn chain_specialization(seed: u64, d_identity: bool) -> std::result::Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3;
    let sq = || TensorShape::square(&[n]).unwrap();
    let id = identity_tensor(&[n]).unwrap();
    let mut coeffs = BTreeMap::new();
    for k in 1..=4 {
        coeffs.insert(format!("A{k}"), random_tensor(&mut rng, sq()));
        coeffs.insert(format!("B{k}"), id.clone());
        coeffs.insert(format!("C{k}"), id.scale(-1.0));
        coeffs.insert(format!("D{k}"), if d_identity { id.clone() } else { random_tensor(&mut rng, sq()) });
    }
    let zero_rhs = vec![QTensor::zeros(sq()); 4];
    let probe = System::new(SystemKind::Chain, coeffs, zero_rhs).map_err(|e| e.to_string())?;
    let witness: BTreeMap<String, QTensor> =
        probe.unknowns().iter().map(|(k, s)| (k.clone(), random_tensor(&mut rng, s.clone()))).collect();
    let system = probe.with_rhs(probe.apply(&witness).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let out = system.solve(&SolverConfig::default()).map_err(|e| e.to_string())?;
    let oracle = oracle_solve(&system).map_err(|e| e.to_string())?;
    if !out.consistent || !oracle.consistent {
        return Err(format!("solver {}, oracle {}", out.consistent, oracle.consistent));
    }
    let mut worst = verify_solution(&system, &out.particulars()).map_err(|e| e.to_string())?.max_ratio();
    for s in 0..5 {
        let values = out.instantiate(&random_assignment(&out.all_slots(), seed + s)).map_err(|e| e.to_string())?;
        worst = worst.max(verify_solution(&system, &values).map_err(|e| e.to_string())?.max_ratio());
    }
    Ok(worst)
}

fn chain_suite() -> Verdict {
    let rt = round_trip(SystemKind::Chain, 25, 1e-8, 20, 1e-8);
    let mut special_worst: f64 = 0.0;
    let mut special_fail = Vec::new();
    for seed in 0..10 {
        for d_identity in [true, false] {
            match chain_specialization(7000 + seed, d_identity) {
                Ok(r) => special_worst = special_worst.max(r),
                Err(e) => special_fail.push(e),
            }
        }
    }
    let special_ok = special_fail.is_empty() && special_worst < 1e-8;
    let mut detail = format!(
        "{}; B=I, C=-I specialization (D=I and random D): 20 instances, max ratio {special_worst:.2e}",
        rt.summary(SystemKind::Chain)
    );
    if let Some(f) = special_fail.first() {
        detail += &format!(", failure: {f}");
    }
    verdict(rt.passed() && special_ok, detail)
}

fn projector_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let (rows, cols) = random_shape(&mut rng);
        let a = if n % 3 == 2 {
            low_rank_tensor(&mut rng, &rows, &cols)
        } else {
            random_tensor(&mut rng, TensorShape::new(rows, cols).unwrap())
        };
        let l = projector_l(&a, DEFAULT_RANK_TOL).unwrap();
        let r = projector_r(&a, DEFAULT_RANK_TOL).unwrap();
        let checks = [
            einstein_product(&l, &l).unwrap().max_abs_diff(&l),
            einstein_product(&r, &r).unwrap().max_abs_diff(&r),
            tensor_conj_transpose(&l).max_abs_diff(&l),
            tensor_conj_transpose(&r).max_abs_diff(&r),
            einstein_product(&a, &l).unwrap().frobenius_norm(),
            einstein_product(&r, &a).unwrap().frobenius_norm(),
        ];
        worst = checks.into_iter().fold(worst, f64::max);
    }
    verdict(worst < 1e-10, format!("100 tensors, max deviation {worst:.2e} (limit 1e-10)"))
}

fn run_cli(dir: &Path, args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_qts")).current_dir(dir).args(args).env_remove("QTS_TOL").output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

/// Every CLI step of a seeded session: reports and written files, in order.
fn cli_session(dir: &Path) -> Vec<(String, i32, Vec<u8>)> {
    let mut log = Vec::new();
    let step = |log: &mut Vec<_>, args: &[&str]| {
        let (code, out) = run_cli(dir, args);
        log.push((args.join(" "), code, out));
    };
    for kind in SystemKind::ALL {
        let k = kind.as_str();
        step(&mut log, &["gen", "--kind", k, "--seed", "17", "--out", "inst.json"]);
        step(&mut log, &["solve", "inst.json", "--params", "random", "--seed", "5", "--out", "sol.json", "--report", "rep.json"]);
        step(&mut log, &["verify", "inst.json", "sol.json"]);
        step(&mut log, &["gen", "--kind", k, "--seed", "17", "--inconsistent", "--out", "bad.json"]);
        step(&mut log, &["solve", "bad.json"]);
        for f in ["inst.json", "sol.json", "rep.json", "bad.json"] {
            log.push((f.to_string(), 0, std::fs::read(dir.join(f)).unwrap_or_default()));
        }
    }
    let a = identity_tensor(&[2, 2]).unwrap();
    std::fs::write(dir.join("t.json"), serde_json::to_string(&a).unwrap()).unwrap();
    step(&mut log, &["pinv", "t.json", "--out", "p.json"]);
    log
}

fn determinism_suite() -> Verdict {
    let (d1, d2) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let first = cli_session(d1.path());
    let again = cli_session(d1.path());
    let elsewhere = cli_session(d2.path());
    let codes_ok = first.iter().all(|(_, c, _)| *c == 0 || *c == 2);
    let same = first == again && first == elsewhere;
    let mismatch = first.iter().zip(&again).find(|(a, b)| a != b).map(|(a, _)| a.0.clone());
    let mut detail = format!("{} CLI outputs compared across 3 sessions", first.len());
    if let Some(m) = mismatch {
        detail += &format!(", first difference at {m:?}");
    }
    if !codes_ok {
        detail += ", unexpected exit code";
    }
    verdict(same && codes_ok, detail)
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("Penrose equations", penrose_suite),
        ("matricization and complex adjoint homomorphisms", homomorphism_suite),
        ("A*X*B=C round trip", axb_suite),
        ("two-term and mixed round trips", two_term_and_mixed_suite),
        ("triple system", triple_suite),
        ("chain system", chain_suite),
        ("projector identities", projector_suite),
        ("deterministic CLI reports", determinism_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
