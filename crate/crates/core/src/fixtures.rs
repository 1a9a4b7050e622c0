//! Reference data shipped with the library: the two worked examples and the continual demo.

use std::f64::consts::PI;

use crate::algebra::{Complex64, GaussianRational, Matrix, Scalar};
use crate::continual::{self, DemoOperator, GridFunction, OperatorFunction};
use crate::error::Result;
use crate::exprlang::ExprFunction;
use crate::fraction::Residual;
use crate::io::{self, InputOptions, NodeInput, ScalarNodes, VectorInput};
use crate::scalar_builder::NodeData;

pub const EXAMPLE1_JSON: &str = include_str!("../fixtures/example1.json");
pub const EXAMPLE2_JSON: &str = include_str!("../fixtures/example2.json");
pub const CONTINUAL_JSON: &str = include_str!("../fixtures/continual.json");

fn example1(opts: InputOptions) -> ScalarNodes {
    match io::parse_node_input(EXAMPLE1_JSON, opts).expect("bundled fixture parses") {
        NodeInput::Scalar(s) => s,
        _ => unreachable!("example 1 has scalar arguments"),
    }
}

pub fn example1_exact() -> NodeData<GaussianRational> {
    match example1(InputOptions::default()) {
        ScalarNodes::Exact(d) => d,
        ScalarNodes::Float(_) => unreachable!("example 1 is stored exactly"),
    }
}

pub fn example1_float() -> NodeData<Complex64> {
    let opts = InputOptions {
        backend: Some(crate::algebra::Backend::Float),
        grid: None,
    };
    match example1(opts) {
        ScalarNodes::Float(d) => d,
        ScalarNodes::Exact(_) => unreachable!(),
    }
}

fn int<S: Scalar>(re: i32, im: i32) -> S {
    S::from_complex(Complex64::new(re as f64, im as f64)).expect("small integers are representable")
}

/// `1/(z² − 6z − 3)·[[−3 − 4z + 7z², −4i(z + 1)z], [−(z + 1)(z + 3), i(−3 + 2z + z²)]]`,
/// `None` at the roots `3 ± 2√3` of the denominator.
pub fn example1_closed_form<S: Scalar>(z: &S) -> Option<Matrix<S>> {
    let z2 = z.clone() * z.clone();
    let den = z2.clone() - int::<S>(6, 0) * z.clone() - int(3, 0);
    let inv = den.recip()?;
    let zp1 = z.clone() + int(1, 0);
    let entries = vec![
        vec![
            int::<S>(-3, 0) - int::<S>(4, 0) * z.clone() + int::<S>(7, 0) * z2.clone(),
            int::<S>(0, -4) * zp1.clone() * z.clone(),
        ],
        vec![
            -(zp1 * (z.clone() + int(3, 0))),
            int::<S>(0, 1) * (int::<S>(-3, 0) + int::<S>(2, 0) * z.clone() + z2),
        ],
    ];
    let m = Matrix::from_rows(entries).ok()?;
    Some(m.scale(&inv))
}

pub fn example2_input() -> VectorInput {
    match io::parse_node_input(EXAMPLE2_JSON, InputOptions::default()).expect("bundled fixture parses") {
        NodeInput::Vector(v) => v,
        _ => unreachable!("example 2 has vector arguments"),
    }
}

pub fn example2_function() -> ExprFunction {
    example2_input().function.to_matrix_function()
}

pub fn example2_nodes() -> Vec<Vec<f64>> {
    example2_input().nodes
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Storey-1 coefficients `(C_x, C_y)` read off the published `l_1`.
pub fn example2_l1() -> (Matrix<Complex64>, Matrix<Complex64>) {
    let cx = Matrix::from_rows(vec![vec![c(0.0), c(-2.0 / PI)], vec![c(PI / 2.0), c(0.0)]]);
    let cy = Matrix::from_rows(vec![
        vec![c(0.0), c(-2.0 / PI)],
        vec![c(0.0), c(-2.0 / (2.0 + PI))],
    ]);
    (cx.unwrap(), cy.unwrap())
}

/// Published five-decimal denominator `Δ_2`.
pub fn example2_delta(x: f64, y: f64) -> f64 {
    0.10094 * x * x - 0.45299 * x + 0.11535 * x * y - 0.07314 - 0.49946 * y + 0.01441 * y * y
}

pub fn example2_delta_grad(x: f64, y: f64) -> (f64, f64) {
    (
        2.0 * 0.10094 * x - 0.45299 + 0.11535 * y,
        0.11535 * x - 0.49946 + 2.0 * 0.01441 * y,
    )
}

/// First-order distance estimate `|Δ_2| / ‖∇Δ_2‖` to the zero set of the denominator.
pub fn example2_pole_distance(x: f64, y: f64) -> f64 {
    let (gx, gy) = example2_delta_grad(x, y);
    example2_delta(x, y).abs() / gx.hypot(gy)
}

/// Published closed form `T_2 = Δ_2⁻¹·[t_ij]`, coefficients as printed.
#[allow(clippy::approx_constant)]
pub fn example2_closed_form(x: f64, y: f64) -> Option<Matrix<Complex64>> {
    let d = example2_delta(x, y);
    if d == 0.0 {
        return None;
    }
    let t11 = 1.5708 * (0.20264 * x - 0.63662 + 0.20264 * y) * x;
    let t12 = -0.10097 * x * x + 0.49963 * x - 0.16465 * x * y - 0.07314 + 0.7008 * y
        - 0.06368 * y * y;
    let t21 = -1.5708 * (0.27184 * x + 0.146 + 0.27184 * y) * x;
    let t22 = 0.05468 * x * x - 0.30766 * x + 0.12857 * x * y - 0.07314 - 0.29734 * y
        + 0.07389 * y * y;
    Matrix::from_rows(vec![vec![c(t11 / d), c(t12 / d)], vec![c(t21 / d), c(t22 / d)]]).ok()
}

/// Radical inverse of `i` in `base`.
pub fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Probe points in `[0, π]²` from the 2-3 Halton sequence, skipping those within `min_dist`
/// of the zero set of `Δ_2`.
pub fn example2_probes(count: usize, min_dist: f64) -> Vec<(f64, f64)> {
    (1..)
        .map(|i| (PI * halton(i, 2), PI * halton(i, 3)))
        .filter(|&(x, y)| example2_pole_distance(x, y) >= min_dist)
        .take(count)
        .collect()
}

/// Points along the last continual knot where the demo is checked.
pub const CONTINUAL_XIS: [f64; 3] = [0.25, 0.5, 0.75];

/// One build of the continual demo on an `n`-cell grid.
#[derive(Debug, Clone)]
pub struct ContinualRun {
    pub n: usize,
    pub fd: f64,
    pub scale: f64,
    pub nodal: Vec<Residual>,
    pub continual: Vec<Residual>,
}

impl ContinualRun {
    pub fn max_nodal(&self) -> f64 {
        self.nodal.iter().map(|r| r.value).fold(0.0, f64::max)
    }

    pub fn max_continual(&self) -> f64 {
        self.continual.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

/// Largest norm of the operator over the knots.
pub fn operator_scale<F: OperatorFunction + ?Sized>(f: &F, knots: &[GridFunction]) -> Result<f64> {
    knots
        .iter()
        .map(|k| f.eval(k).map(|v| v.norm()))
        .try_fold(0.0_f64, |acc, v| v.map(|v| acc.max(v)))
}

pub fn continual_run(n: usize, fd: f64) -> Result<ContinualRun> {
    let knots = continual::demo_knots(n)?;
    let op = DemoOperator;
    let frac = continual::build_abstract(&op, &knots, fd)?;
    let values = knots.iter().map(|k| op.eval(k)).collect::<Result<Vec<_>>>()?;
    Ok(ContinualRun {
        n,
        fd,
        scale: operator_scale(&op, &knots)?,
        nodal: frac.verify_nodal(&values)?,
        continual: continual::check_continual(&frac, &op, &CONTINUAL_XIS)?,
    })
}
