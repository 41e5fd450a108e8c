use std::sync::Arc;
use std::time::Instant;

use blidkit::bump::ScalarCutoff;
use blidkit::cohomo::*;
use blidkit::polyalg::HomPolyMap;
use nalgebra::{DMatrix, DVector};

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

fn flat() -> ScalarFn {
    Arc::new(|x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            0.0
        } else {
            (-1.0 / r2).exp() * x[0]
        }
    })
}

#[test]
fn flat_local_solution_on_saddle() {
    let t = Instant::now();
    let split = split_hyperbolic(&diag(&[0.5, 2.0]), DEFAULT_MARGIN).unwrap();
    let local = solve_flat_local(flat(), &split, &ScalarCutoff::standard(), 1e-8).unwrap();
    let pts = ball_samples(2, 0.999 * local.radius, 300, 9);
    let stats = residual_stats(&split, &local.w, &flat(), &pts);
    println!("{local:?} {stats:?} {:?}", t.elapsed());
    assert!(stats.max_residual <= 1e-6);
}

#[test]
fn flat_local_one_sided() {
    let split = split_hyperbolic(&diag(&[0.5, 0.25]), DEFAULT_MARGIN).unwrap();
    let local = solve_flat_local(flat(), &split, &ScalarCutoff::standard(), 1e-10).unwrap();
    let x = [0.2, -0.1];
    let series = solve_series(split.matrix(), &*flat(), &x, Direction::Contraction, 1e-13).unwrap();
    assert!(((local.w)(&x) - series.value).abs() < 1e-10);
}

#[test]
fn zero_flat_term() {
    let split = split_hyperbolic(&diag(&[0.5, 2.0]), DEFAULT_MARGIN).unwrap();
    let zero: ScalarFn = Arc::new(|_: &[f64]| 0.0);
    let local = solve_flat_local(zero, &split, &ScalarCutoff::standard(), 1e-10).unwrap();
    assert_eq!((local.w)(&[0.1, 0.2]), 0.0);
}

#[test]
fn rejects_non_flat() {
    let split = split_hyperbolic(&diag(&[0.5, 2.0]), DEFAULT_MARGIN).unwrap();
    let lin: ScalarFn = Arc::new(|x: &[f64]| x[0]);
    assert!(matches!(
        solve_flat_local(lin, &split, &ScalarCutoff::standard(), 1e-8),
        Err(blidkit::Error::NotFlat { .. })
    ));
}

#[test]
fn full_pipeline_with_flat_term() {
    let t = Instant::now();
    let p2 = HomPolyMap::scalar(2, 2, &[(&[2, 0], 2.0), (&[0, 2], 2.0)]).unwrap();
    let mut problem = CohomologicalProblem::new(&diag(&[0.5, 2.0]), vec![p2], 4, 1e-6);
    problem.flat_term = Some(FlatTerm::ExpInvSq { coeff: 1.0, coord: 0 });
    problem.samples = 200;
    problem.half_width = 2.0;
    let (_, report) = solve_cohomological(&problem, 1e-10).unwrap();
    println!("{} {:?}", serde_json::to_string_pretty(&report).unwrap(), t.elapsed());
    assert!(report.passed);
}
