use super::*;
use crate::linalg::{frobenius_distance, gemm};
use crate::model::{init_random_params, ActivationKind};

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

fn rel(a: &Matrix, b: &Matrix) -> f64 {
    frobenius_distance(a, b).unwrap() / (1.0 + b.frobenius_norm())
}

fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
    let e = rel(a, b);
    assert!(e <= tol, "relative error {e:e} > {tol:e}\n{a:?}\nvs\n{b:?}");
}

fn approx(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
}

fn approx_vec(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        approx(*x, *y, tol);
    }
}

/// Worked instance: start from h₁ = [1, 2], Y = [[3, 0]], k₀² = 1, then add
/// h̄ = [1, 0]. R² = [[6, 1], [1, 2]].
fn worked(kind: AlgorithmKind) -> (SolverState, StepScalars) {
    let y = m(&[&[3.0, 0.0]]);
    let mut s = SolverState::init(kind, &[1.0, 2.0], &y, 1.0).unwrap();
    let step = s.add_node(&[1.0, 0.0]).unwrap();
    (s, step)
}

const W2: [f64; 2] = [3.0 / 11.0, 15.0 / 11.0];

fn q2() -> Matrix {
    m(&[&[2.0 / 11.0, -1.0 / 11.0], &[-1.0 / 11.0, 6.0 / 11.0]])
}

/// Random Gaussian-kernel problem: data X (N×K), targets Y (M×K) and node rows.
struct Problem {
    rows: Vec<Vec<f64>>,
    y: Matrix,
}

fn problem(k: usize, n: usize, mo: usize, nodes: usize, seed: u64) -> Problem {
    let data = init_random_params(k + mo, n, ActivationKind::Linear, seed ^ 0xabcdef).unwrap();
    let x = data.input_weights.top_rows(k).transpose();
    let y = Matrix::from_fn(mo, k, |i, j| {
        let xs = x.column(j);
        (xs.iter().sum::<f64>() * (i + 1) as f64).sin() + 0.1 * data.biases[j]
    });
    let params = init_random_params(nodes, n, ActivationKind::Gaussian, seed).unwrap();
    let rows = (0..nodes).map(|i| params.node_row(i, &x).unwrap()).collect();
    Problem { rows, y }
}

fn grow(kind: AlgorithmKind, p: &Problem, k0sq: f64, upto: usize) -> SolverState {
    let mut s = SolverState::init(kind, &p.rows[0], &p.y, k0sq).unwrap();
    for r in &p.rows[1..upto] {
        s.add_node(r).unwrap();
    }
    s
}

#[test]
fn solve_direct_examples() {
    let w = solve_direct(&m(&[&[1.0, 2.0]]), &m(&[&[3.0, 0.0]]), 1.0).unwrap();
    approx(w.get(0, 0), 0.5, 1e-15);
    let w = solve_direct(&m(&[&[1.0, 2.0], &[1.0, 0.0]]), &m(&[&[3.0, 0.0]]), 1.0).unwrap();
    approx_vec(&w.column(0), &[W2[0]], 1e-15);
    approx_vec(&w.column(1), &[W2[1]], 1e-15);
    let w = solve_direct(&m(&[&[1.0, 2.0], &[1.0, 0.0]]), &Matrix::zeros(2, 2), 1.0).unwrap();
    assert_eq!(w, Matrix::zeros(2, 2));
}

#[test]
fn solve_direct_rejects_nonpositive_regularization() {
    let h = m(&[&[1.0]]);
    for k in [0.0, -1.0, f64::NAN] {
        assert!(matches!(solve_direct(&h, &h, k), Err(ElmError::Domain(_))));
    }
    assert!(solve_direct(&h, &m(&[&[1.0, 2.0]]), 1.0).is_err());
}

#[test]
fn init_closed_forms() {
    let y = m(&[&[3.0, 0.0]]);
    for kind in AlgorithmKind::ALL {
        let s = init_solver(kind, &[1.0, 2.0], &y, 1.0).unwrap();
        approx(current_weights(&s).get(0, 0), 0.5, 1e-15);
        assert_eq!(s.nodes(), 1);
    }
    let s = SolverState::init(AlgorithmKind::Alg2, &[1.0, 2.0], &y, 1.0).unwrap();
    approx(s.inverse().unwrap().get(0, 0), 1.0 / 6.0, 1e-15);
    let s = SolverState::init(AlgorithmKind::Alg1, &[1.0, 2.0], &y, 1.0).unwrap();
    assert_close(&s.pseudo_inverse().unwrap(), &m(&[&[1.0 / 6.0], &[2.0 / 6.0]]), 1e-15);
    let s = SolverState::init(AlgorithmKind::Alg3, &[1.0, 2.0], &y, 1.0).unwrap();
    let (l, d) = s.ldl_factors().unwrap();
    assert_eq!(l, Matrix::identity(1));
    approx(d[0], 1.0 / 6.0, 1e-15);
}

#[test]
fn init_zero_row_and_scalar() {
    let s = SolverState::init(AlgorithmKind::Alg2, &[0.0, 0.0], &m(&[&[4.0, -1.0]]), 1.0).unwrap();
    assert_eq!(s.inverse().unwrap().get(0, 0), 1.0);
    assert_eq!(s.weights().get(0, 0), 0.0);
    let s = SolverState::init(AlgorithmKind::Alg3, &[1.0], &m(&[&[1.0]]), 1.0).unwrap();
    assert_eq!(s.weights().get(0, 0), 0.5);
}

#[test]
fn init_errors() {
    let y = m(&[&[1.0]]);
    assert!(matches!(
        SolverState::init(AlgorithmKind::Alg1, &[1.0], &y, 0.0),
        Err(ElmError::Domain(_))
    ));
    assert!(matches!(
        SolverState::init(AlgorithmKind::Alg1, &[], &Matrix::zeros(1, 0), 1.0),
        Err(ElmError::Shape { .. })
    ));
    assert!(SolverState::init(AlgorithmKind::Alg1, &[1.0, 2.0], &y, 1.0).is_err());
}

#[test]
fn compute_p_examples() {
    let s = SolverState::init(AlgorithmKind::Alg2, &[1.0, 2.0], &m(&[&[3.0, 0.0]]), 1.0).unwrap();
    assert_eq!(s.compute_p(&[1.0, 0.0]).unwrap(), vec![1.0]);
    assert_eq!(s.compute_p(&[0.0, 0.0]).unwrap(), vec![0.0]);
    assert!(s.compute_p(&[1.0]).is_err());

    let mut s = SolverState::init(AlgorithmKind::Alg2, &[1.0, 0.0], &m(&[&[1.0, 1.0]]), 1.0).unwrap();
    s.add_node(&[0.0, 1.0]).unwrap();
    assert_eq!(s.compute_p(&[0.3, -0.7]).unwrap(), vec![0.3, -0.7]);
}

#[test]
fn worked_instance_existing() {
    let (s, step) = worked(AlgorithmKind::ExistingIf);
    let b = s.pseudo_inverse().unwrap();
    assert_close(
        &b,
        &m(&[&[1.0 / 11.0, 5.0 / 11.0], &[4.0 / 11.0, -2.0 / 11.0]]),
        1e-15,
    );
    approx_vec(s.weights().row(0), &W2, 1e-15);
    approx(step.tau, 6.0 / 11.0, 1e-15);
}

#[test]
fn worked_instance_alg1() {
    let (s, step) = worked(AlgorithmKind::Alg1);
    approx(step.tau, 6.0 / 11.0, 1e-15);
    approx_vec(step.b_bar.as_ref().unwrap(), &[5.0 / 11.0, -2.0 / 11.0], 1e-15);
    approx_vec(&s.pseudo_inverse().unwrap().column(0), &[1.0 / 11.0, 4.0 / 11.0], 1e-15);
    approx_vec(&step.w_bar, &[15.0 / 11.0], 1e-15);
    approx_vec(s.weights().row(0), &W2, 1e-15);
}

#[test]
fn worked_instance_alg2() {
    let (s, step) = worked(AlgorithmKind::Alg2);
    approx(step.tau, 6.0 / 11.0, 1e-15);
    approx_vec(step.t.as_ref().unwrap(), &[-1.0 / 11.0], 1e-15);
    assert_close(s.inverse().unwrap(), &q2(), 1e-15);
    approx_vec(&step.w_bar, &[15.0 / 11.0], 1e-15);
    approx_vec(s.weights().row(0), &W2, 1e-15);
}

#[test]
fn worked_instance_alg3() {
    let (s, step) = worked(AlgorithmKind::Alg3);
    approx(step.tau, 6.0 / 11.0, 1e-15);
    approx_vec(step.t_tilde.as_ref().unwrap(), &[-1.0 / 6.0], 1e-15);
    let (l, d) = s.ldl_factors().unwrap();
    assert_close(&l, &m(&[&[1.0, -1.0 / 6.0], &[0.0, 1.0]]), 1e-15);
    approx_vec(d, &[1.0 / 6.0, 6.0 / 11.0], 1e-15);
    let dl = Matrix::from_fn(2, 2, |i, j| d[i] * l.get(j, i));
    let q = gemm(&l, &dl, &mut FlopCounter::disabled()).unwrap();
    assert_close(&q, &q2(), 1e-15);
    approx_vec(s.weights().row(0), &W2, 1e-15);
}

#[test]
fn worked_instance_baseline_and_reference() {
    let (s, step) = worked(AlgorithmKind::Baseline);
    approx_vec(s.weights().row(0), &W2, 1e-15);
    approx(step.tau, 6.0 / 11.0, 1e-14);

    let y = m(&[&[3.0, 0.0]]);
    let mut s = SolverState::init(AlgorithmKind::Alg2, &[1.0, 2.0], &y, 1.0).unwrap();
    let step = s.add_node_q_unsimplified(&[1.0, 0.0]).unwrap();
    assert_close(s.inverse().unwrap(), &q2(), 1e-15);
    approx(step.tau, 6.0 / 11.0, 1e-15);
    approx_vec(s.weights().row(0), &W2, 1e-15);
}

#[test]
fn worked_instance_weights_agree_across_solvers() {
    let (base, _) = worked(AlgorithmKind::Baseline);
    for kind in AlgorithmKind::INCREMENTAL {
        let (s, _) = worked(kind);
        let e = frobenius_distance(s.weights(), base.weights()).unwrap();
        assert!(e <= 1e-14, "{kind}: {e:e}");
    }
}

#[test]
fn zero_row_leaves_solution_unchanged() {
    let y = m(&[&[3.0, 0.0, 1.0]]);
    let k0sq = 0.5;
    for kind in AlgorithmKind::ALL {
        let mut s = SolverState::init(kind, &[1.0, 2.0, -1.0], &y, k0sq).unwrap();
        s.add_node(&[0.5, 0.1, 0.2]).unwrap();
        let before = s.clone();
        let step = s.add_node(&[0.0, 0.0, 0.0]).unwrap();
        approx(step.tau, 1.0 / k0sq, 1e-15);
        assert_eq!(step.p, vec![0.0, 0.0]);
        for c in 0..2 {
            approx_vec(&s.weights().column(c), &before.weights().column(c), 1e-14);
        }
        assert_eq!(s.weights().get(0, 2), 0.0, "{kind}");
        match kind {
            AlgorithmKind::ExistingIf | AlgorithmKind::Alg1 => {
                assert!(step.b_bar.as_ref().unwrap().iter().all(|&v| v == 0.0));
                let b = s.pseudo_inverse().unwrap();
                let b0 = before.pseudo_inverse().unwrap();
                assert_close(&b.select_columns(&[0, 1]), &b0, 1e-15);
            }
            AlgorithmKind::Alg2 => {
                assert!(step.t.as_ref().unwrap().iter().all(|&v| v == 0.0));
                let q = s.inverse().unwrap();
                assert_eq!(q.get(2, 2), 1.0 / k0sq);
                assert_close(&q.select_rows(&[0, 1]).select_columns(&[0, 1]), before.inverse().unwrap(), 0.0);
            }
            AlgorithmKind::Alg3 => {
                assert!(step.t_tilde.as_ref().unwrap().iter().all(|&v| v == 0.0));
                let (l, _) = s.ldl_factors().unwrap();
                assert_eq!(l.column(2), vec![0.0, 0.0, 1.0]);
            }
            AlgorithmKind::Baseline => {}
        }
    }
}

#[test]
fn baseline_allows_more_nodes_than_samples() {
    let y = m(&[&[2.0]]);
    let mut s = SolverState::init(AlgorithmKind::Baseline, &[1.0], &y, 1.0).unwrap();
    s.add_node(&[1.0]).unwrap();
    assert_eq!(s.gram().unwrap(), &m(&[&[2.0, 1.0], &[1.0, 2.0]]));
    // W = Y·Hᵀ·R⁻¹ = 2·[1, 1]·R⁻¹ = [2/3, 2/3]
    approx_vec(s.weights().row(0), &[2.0 / 3.0, 2.0 / 3.0], 1e-15);
}

#[test]
fn oracle_equivalence_sweep() {
    for (k, mo) in [(50, 2), (20, 1), (200, 3)] {
        let p = problem(k, 5, mo, 30, 42);
        let mut base = SolverState::init(AlgorithmKind::Baseline, &p.rows[0], &p.y, 0.1).unwrap();
        let mut states: Vec<_> = AlgorithmKind::INCREMENTAL
            .iter()
            .map(|&kind| SolverState::init(kind, &p.rows[0], &p.y, 0.1).unwrap())
            .collect();
        for r in &p.rows[1..] {
            base.add_node(r).unwrap();
            let direct = solve_direct(base.hidden(), &p.y, 0.1).unwrap();
            assert_eq!(&direct, base.weights());
            for s in &mut states {
                s.add_node(r).unwrap();
                let e = rel(s.weights(), base.weights());
                assert!(e <= 1e-10, "{} at l={}: {e:e}", s.kind(), s.nodes());
            }
        }
    }
}

#[test]
fn carried_state_invariants_hold_every_step() {
    let p = problem(60, 4, 2, 30, 7);
    let mut states: Vec<_> = [AlgorithmKind::ExistingIf, AlgorithmKind::Alg1, AlgorithmKind::Alg2, AlgorithmKind::Alg3]
        .iter()
        .map(|&kind| SolverState::init(kind, &p.rows[0], &p.y, 0.1).unwrap())
        .collect();
    for r in &p.rows[1..] {
        for s in &mut states {
            s.add_node(r).unwrap();
            let n = s.nodes();
            match s.kind() {
                AlgorithmKind::ExistingIf | AlgorithmKind::Alg1 => {
                    let b = s.pseudo_inverse().unwrap();
                    assert_eq!(b.shape(), (60, n));
                    let yb = gemm(&p.y, &b, &mut FlopCounter::disabled()).unwrap();
                    assert_close(&yb, s.weights(), 1e-10);
                }
                AlgorithmKind::Alg2 => {
                    let q = s.inverse().unwrap();
                    assert_eq!(q.shape(), (n, n));
                    assert!(frobenius_distance(q, &q.transpose()).unwrap() <= 1e-12 * q.frobenius_norm());
                }
                AlgorithmKind::Alg3 => {
                    let (l, d) = s.ldl_factors().unwrap();
                    for i in 0..n {
                        assert_eq!(l.get(i, i), 1.0);
                        for j in 0..i {
                            assert_eq!(l.get(i, j), 0.0);
                        }
                    }
                    assert!(d.iter().all(|&v| v > 0.0));
                    // L·D·Lᵀ against the direct inverse of R.
                    let r = gram(s.hidden(), 0.1);
                    let q = crate::linalg::solve_spd(&r, &Matrix::identity(n)).unwrap();
                    let dl = Matrix::from_fn(n, n, |i, j| d[i] * l.get(j, i));
                    let ldl = gemm(&l, &dl, &mut FlopCounter::disabled()).unwrap();
                    assert!(frobenius_distance(&ldl, &q).unwrap() <= 1e-9 * q.frobenius_norm());
                }
                AlgorithmKind::Baseline => unreachable!(),
            }
            assert_eq!(s.weights().shape(), (2, n));
            assert_eq!(s.hidden().shape(), (n, 60));
        }
    }
}

/// I.i.d. uniform hidden rows on [−1, 1] with matching random targets.
fn random_rows(k: usize, mo: usize, nodes: usize, seed: u64) -> Problem {
    let raw = init_random_params(nodes + mo, k, ActivationKind::Linear, seed).unwrap();
    let a = &raw.input_weights;
    Problem {
        rows: (0..nodes).map(|i| a.row(i).to_vec()).collect(),
        y: a.select_rows(&(nodes..nodes + mo).collect::<Vec<_>>()),
    }
}

fn max_q_drift(p: &Problem, k0sq: f64) -> f64 {
    let mut a = SolverState::init(AlgorithmKind::Alg2, &p.rows[0], &p.y, k0sq).unwrap();
    let mut b = a.clone();
    let mut worst = 0.0f64;
    for r in &p.rows[1..] {
        a.add_node(r).unwrap();
        b.add_node_q_unsimplified(r).unwrap();
        let (qa, qb) = (a.inverse().unwrap(), b.inverse().unwrap());
        worst = worst.max(frobenius_distance(qa, qb).unwrap() / qa.frobenius_norm());
    }
    worst
}

#[test]
fn unsimplified_recursion_tracks_simplified() {
    for seed in 0..5 {
        let drift = max_q_drift(&random_rows(100, 2, 51, seed), 0.1);
        assert!(drift <= 1e-11, "seed {seed}: {drift:e}");
    }
    let mut c = SolverState::init(AlgorithmKind::Alg3, &[1.0, 0.0], &m(&[&[1.0, 1.0]]), 0.1).unwrap();
    assert!(matches!(c.add_node_q_unsimplified(&[0.0, 1.0]), Err(ElmError::Domain(_))));
}

#[test]
fn warm_start_matches_incremental_growth() {
    let p = problem(80, 4, 2, 12, 9);
    let h = Matrix::from_rows(&p.rows[..10]).unwrap();
    for kind in AlgorithmKind::ALL {
        let mut warm = SolverState::warm_start(kind, &h, &p.y, 0.1).unwrap();
        let mut grown = grow(kind, &p, 0.1, 10);
        assert_close(warm.weights(), grown.weights(), 1e-12);
        for r in &p.rows[10..] {
            warm.add_node(r).unwrap();
            grown.add_node(r).unwrap();
        }
        assert_close(warm.weights(), grown.weights(), 1e-11);
    }
}

#[test]
fn breakdown_aborts_without_mutation() {
    let y = m(&[&[1.0, 0.0]]);
    for kind in AlgorithmKind::INCREMENTAL {
        let mut s = SolverState::init(kind, &[1.0, 0.0], &y, 1e-14).unwrap();
        let before = s.snapshot(true);
        let err = s.add_node(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, ElmError::Breakdown { node: 2, .. }), "{kind}: {err}");
        assert_eq!(s.snapshot(true), before);
        assert_eq!(s.nodes(), 1);
    }
}

#[test]
fn negative_schur_complement_is_definiteness_loss() {
    let s = SolverState::init(AlgorithmKind::Alg3, &[1.0], &m(&[&[1.0]]), 1.0).unwrap();
    assert!(matches!(
        s.schur_tau(-0.5, 1.0),
        Err(ElmError::DefinitenessLoss { node: 2, .. })
    ));
    assert!(matches!(s.schur_tau(f64::NAN, 1.0), Err(ElmError::NonFinite(_))));
    assert_eq!(s.schur_tau(0.5, 1.0).unwrap(), 2.0);
}

#[test]
fn add_node_rejects_bad_rows() {
    let mut s = SolverState::init(AlgorithmKind::Alg1, &[1.0, 2.0], &m(&[&[1.0, 1.0]]), 1.0).unwrap();
    assert!(matches!(s.add_node(&[1.0]), Err(ElmError::Shape { .. })));
    assert!(matches!(s.add_node(&[1.0, f64::INFINITY]), Err(ElmError::NonFinite(_))));
}

#[test]
fn step_flops_follow_cost_model_shape() {
    let (k, mo, l) = (300, 4, 40);
    let p = problem(k, 3, mo, l + 1, 5);
    let h = Matrix::from_rows(&p.rows[..l]).unwrap();
    let row = &p.rows[l];
    let step = |kind| {
        let mut s = SolverState::warm_start(kind, &h, &p.y, 0.1).unwrap();
        s.add_node(row).unwrap()
    };
    let (l64, k64, m64) = (l as u64, k as u64, mo as u64);
    assert_eq!(step(AlgorithmKind::Alg1).sample_flops, 6 * l64 * k64 + 2 * m64 * k64 + 2 * k64);
    assert_eq!(step(AlgorithmKind::Alg2).sample_flops, 2 * l64 * k64 + 2 * m64 * k64 + 2 * k64);
    assert_eq!(step(AlgorithmKind::Alg3).sample_flops, 2 * l64 * k64 + 2 * m64 * k64 + 2 * k64);
    assert_eq!(
        step(AlgorithmKind::ExistingIf).sample_flops,
        12 * l64 * k64 + 2 * m64 * k64 * (l64 + 1) + 2 * k64
    );
    assert_eq!(step(AlgorithmKind::Alg2).node_flops, 2 * l64 * l64 + 2 * l64 + 2 * m64 * l64);
}

#[test]
fn snapshot_json_shape() {
    let (s, _) = worked(AlgorithmKind::Alg3);
    let json = serde_json::to_value(s.snapshot(false)).unwrap();
    assert_eq!(json["kind"], "alg3");
    assert_eq!(json["l"], 2);
    assert_eq!(json["W"]["shape"], serde_json::json!([1, 2]));
    assert!(json.get("debug").is_none());
    let json = serde_json::to_value(s.snapshot(true)).unwrap();
    assert!(json["debug"]["L"].is_object());
    let back: StateSnapshot = serde_json::from_value(json).unwrap();
    assert_eq!(back.w, *s.weights());
}

#[test]
fn algorithm_names_parse() {
    for kind in AlgorithmKind::ALL {
        assert_eq!(kind.name().parse::<AlgorithmKind>().unwrap(), kind);
    }
    assert!("alg4".parse::<AlgorithmKind>().is_err());
}

#[test]
fn bordering_identities_hold_every_step() {
    let rel_vec = |a: &[f64], b: &[f64]| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        d / b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)
    };
    for seed in 0..3 {
        let p = random_rows(120, 2, 31, 50 + seed);
        let start = |kind| SolverState::init(kind, &p.rows[0], &p.y, 0.1).unwrap();
        let (mut s1, mut s2, mut s3) = (start(AlgorithmKind::Alg1), start(AlgorithmKind::Alg2), start(AlgorithmKind::Alg3));
        for row in &p.rows[1..] {
            let (h, q) = (s2.hidden().clone(), s2.inverse().unwrap().clone());
            let a1 = s1.add_node(row).unwrap();
            let a2 = s2.add_node(row).unwrap();
            let a3 = s3.add_node(row).unwrap();
            let (t, tau) = (a2.t.as_ref().unwrap(), a2.tau);
            let b_bar = a1.b_bar.as_ref().unwrap();

            let t_over_tau: Vec<f64> = t.iter().map(|v| v / tau).collect();
            assert!(rel_vec(a3.t_tilde.as_ref().unwrap(), &t_over_tau) <= 1e-11);

            let mut expected: Vec<f64> = row.iter().map(|v| tau * v).collect();
            for (i, ti) in t.iter().enumerate() {
                crate::linalg::axpy(*ti, h.row(i), &mut expected);
            }
            assert!(rel_vec(b_bar, &expected) <= 1e-11);

            // Leading columns of the new B equal HᵀQ − b̄·pᵀQ.
            let mut f = FlopCounter::disabled();
            let htq = gemm(&h.transpose(), &q, &mut f).unwrap();
            let ptq = crate::linalg::matvec(&q, &a2.p, &mut f).unwrap();
            let b_tilde = Matrix::from_fn(htq.rows(), htq.cols(), |k, i| htq.get(k, i) - b_bar[k] * ptq[i]);
            let n = h.rows();
            let b_new = s1.pseudo_inverse().unwrap().select_columns(&(0..n).collect::<Vec<_>>());
            let e = frobenius_distance(&b_new, &b_tilde).unwrap() / b_tilde.frobenius_norm();
            assert!(e <= 1e-11, "{e:e}");
        }
    }
}
