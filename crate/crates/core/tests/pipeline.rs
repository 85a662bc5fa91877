use ifelm::data::{load_csv, normalize_features, synth_dataset, write_csv, SynthKind, Task};
use ifelm::evaluation::{classification_metrics, mse, weight_output_errors};
use ifelm::model::{hidden_matrix, init_random_params, predict, ActivationKind, ElmParams};
use ifelm::solvers::{solve_direct, StateSnapshot};
use ifelm::{AlgorithmKind, Matrix, SolverState};

#[test]
fn csv_to_predictions_with_every_solver() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.csv");
    let raw = synth_dataset(SynthKind::TwoGaussians, 200, 3, 2, 12).unwrap();
    write_csv(&raw, &path, true).unwrap();

    let ds = load_csv(&path, 1, Task::Classification, true).unwrap();
    let (ds, scaling) = normalize_features(&ds).unwrap();
    assert_eq!(scaling.ranges.len(), 3);
    let params = init_random_params(40, 3, ActivationKind::Sigmoid, 3).unwrap();
    let h = hidden_matrix(&params, &ds.x).unwrap();
    let direct = solve_direct(&h, &ds.y, 0.1).unwrap();

    for kind in AlgorithmKind::ALL {
        let mut s = SolverState::init(kind, h.row(0), &ds.y, 0.1).unwrap();
        for i in 1..h.rows() {
            s.add_node(h.row(i)).unwrap();
        }
        let z = predict(s.weights(), &h).unwrap();
        let z_direct = predict(&direct, &h).unwrap();
        let (we, oe) = weight_output_errors(s.weights(), &direct, &z, &z_direct).unwrap();
        assert!(we <= 1e-9 && oe <= 1e-9, "{kind}: {we:e} {oe:e}");
        let r = classification_metrics(&z, &ds.y).unwrap();
        assert!(r.acc >= 0.95, "{kind}: {r:?}");
    }
}

#[test]
fn worked_instance_through_public_api() {
    let h = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
    let y = Matrix::from_rows(&[[3.0, 0.0]]).unwrap();
    let mut s = SolverState::warm_start(AlgorithmKind::Alg2, &h, &y, 1.0).unwrap();
    s.add_node(&[1.0, 0.0]).unwrap();
    let z = predict(s.weights(), s.hidden()).unwrap();
    let expected = [18.0 / 11.0, 6.0 / 11.0];
    for (a, b) in z.row(0).iter().zip(expected) {
        assert!((a - b).abs() <= 1e-15);
    }
    assert!(mse(&z, &y).unwrap() > 0.0);

    let snap: StateSnapshot = serde_json::from_str(&serde_json::to_string(&s.snapshot(true)).unwrap()).unwrap();
    assert_eq!(snap.w, *s.weights());
    assert_eq!(snap.l, 2);
}

#[test]
fn params_survive_json_and_regenerate_the_same_layer() {
    let ds = synth_dataset(SynthKind::SineMixture, 30, 4, 1, 2).unwrap();
    let params = init_random_params(12, 4, ActivationKind::Triangular, 6).unwrap();
    let back = ElmParams::from_json(&params.to_json().unwrap()).unwrap();
    assert_eq!(hidden_matrix(&back, &ds.x).unwrap(), hidden_matrix(&params, &ds.x).unwrap());
}
