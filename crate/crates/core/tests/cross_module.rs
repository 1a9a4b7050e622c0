use thiele_core::algebra::{Complex64, Matrix};
use thiele_core::continual::{
    build_abstract_with, ContinualConfig, FnOperator, GridFunction, KnotPath,
};
use thiele_core::fixtures;
use thiele_core::fraction::{ArgPoint, InverseSide};
use thiele_core::functional::{build_functional, FnMatrixFunction, QuadConfig};

fn g(x: f64) -> Matrix<Complex64> {
    let v = [[1.0 + x * x, 0.5 * x + 0.3], [x * x * x - x + 0.2, 2.0 + x - 0.1 * x * x]];
    Matrix::from_fn(2, |i, j| Complex64::new(v[i][j], 0.0))
}

#[test]
fn linear_path_on_constant_knots_matches_functional_builder() {
    let n = 8;
    let xs = [0.0, 0.7, 1.3];
    let op = FnOperator::new(2, |u: &GridFunction| Ok(g(u.integral())));
    let knots: Vec<GridFunction> = xs.iter().map(|&x| GridFunction::new(vec![x; n]).unwrap()).collect();
    let cfg = ContinualConfig {
        fd: 1e-6,
        path: KnotPath::Linear { order: 32 },
        side: InverseSide::Left,
    };
    let grid = build_abstract_with(&op, &knots, &cfg).unwrap();

    let f = FnMatrixFunction::new(1, 2, |p| Ok(g(p[0])));
    let nodes: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let vector = build_functional(&f, &nodes, &QuadConfig::default()).unwrap();

    for (a, b) in grid.storeys().iter().zip(vector.storeys()) {
        let mut total = Matrix::zeros(2);
        for k in a.payload().matrices() {
            total = total.add(k).unwrap();
        }
        let c = &b.payload().matrices()[0];
        let rel = total.sub(c).unwrap().norm() / c.norm();
        assert!(rel <= 1e-8, "storey {}: {rel:e}", a.level());
    }
    for (&x, knot) in xs.iter().zip(&knots) {
        let t = grid.evaluate(&ArgPoint::Grid(knot.clone())).unwrap();
        assert!(t.sub(&g(x)).unwrap().norm() <= 1e-8);
    }
}

#[test]
fn nodal_residual_shrinks_under_refinement() {
    let coarse = fixtures::continual_run(100, 1e-6).unwrap();
    let fine = fixtures::continual_run(200, 5e-7).unwrap();
    assert!(fine.max_nodal() <= 0.6 * coarse.max_nodal());
    assert!(fine.max_nodal() <= 1e-3 * fine.scale);
}

#[test]
fn continual_endpoints_reproduce_nodal_residuals() {
    let run = fixtures::continual_run(50, 1e-6).unwrap();
    let knots = thiele_core::continual::demo_knots(50).unwrap();
    let frac = thiele_core::continual::build_abstract(&thiele_core::continual::DemoOperator, &knots, 1e-6)
        .unwrap();
    let ends = thiele_core::continual::check_continual(&frac, &thiele_core::continual::DemoOperator, &[0.0, 1.0])
        .unwrap();
    assert_eq!(ends[0].value, run.nodal[2].value);
    assert_eq!(ends[1].value, run.nodal[1].value);
}
