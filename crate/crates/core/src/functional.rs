//! Fractions for matrix functions of several real variables.
//!
//! Storey `r` maps a displacement `w` to `Σ_a C_{r,a}·w_a`, where
//! `C_{r,a} = ∫₀¹ ∂_a F_r(u_{r−1} + τ(u_r − u_{r−1})) dτ` is computed with a Gauss–Legendre
//! rule. `F_1 = F`; higher level functions come from [`crate::fraction::level_value`] and
//! are differentiated by central differences.

use crate::algebra::{Complex64, Matrix};
use crate::error::{Error, Result};
use crate::fraction::{self, ArgPoint, InverseSide, Payload, Storey, ThieleFraction};
use crate::quadrature::GaussLegendre;

/// A matrix-valued function of `dim_in` real variables.
pub trait MatrixFunction: Sync {
    fn dim_in(&self) -> usize;

    fn m(&self) -> usize;

    fn eval(&self, point: &[f64]) -> Result<Matrix<Complex64>>;

    /// Analytic partial derivative along `axis`, if known.
    fn grad(&self, _point: &[f64], _axis: usize) -> Option<Result<Matrix<Complex64>>> {
        None
    }
}

impl<T: MatrixFunction + ?Sized> MatrixFunction for &T {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }

    fn m(&self) -> usize {
        (**self).m()
    }

    fn eval(&self, point: &[f64]) -> Result<Matrix<Complex64>> {
        (**self).eval(point)
    }

    fn grad(&self, point: &[f64], axis: usize) -> Option<Result<Matrix<Complex64>>> {
        (**self).grad(point, axis)
    }
}

type EvalFn = dyn Fn(&[f64]) -> Result<Matrix<Complex64>> + Send + Sync;
type GradFn = dyn Fn(&[f64], usize) -> Result<Matrix<Complex64>> + Send + Sync;

/// [`MatrixFunction`] from closures.
pub struct FnMatrixFunction {
    dim_in: usize,
    m: usize,
    eval: Box<EvalFn>,
    grad: Option<Box<GradFn>>,
}

impl FnMatrixFunction {
    pub fn new(
        dim_in: usize,
        m: usize,
        eval: impl Fn(&[f64]) -> Result<Matrix<Complex64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim_in,
            m,
            eval: Box::new(eval),
            grad: None,
        }
    }

    pub fn with_grad(
        mut self,
        grad: impl Fn(&[f64], usize) -> Result<Matrix<Complex64>> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }
}

impl MatrixFunction for FnMatrixFunction {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn m(&self) -> usize {
        self.m
    }

    fn eval(&self, point: &[f64]) -> Result<Matrix<Complex64>> {
        (self.eval)(point)
    }

    fn grad(&self, point: &[f64], axis: usize) -> Option<Result<Matrix<Complex64>>> {
        self.grad.as_ref().map(|g| g(point, axis))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub order: usize,
    /// Base finite-difference step; the step used at `p` is `fd_step · (1 + ‖p‖)`.
    pub fd_step: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            order: 32,
            fd_step: 1e-6,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Invalid(format!(
                "quadrature order must be at least 2, got {}",
                self.order
            )));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(Error::Invalid(format!(
                "finite-difference step must be positive, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }

    fn step_at(&self, p: &[f64]) -> f64 {
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.fd_step * (1.0 + norm)
    }
}

/// `∂_axis F(p)`: the analytic gradient if supplied, else a central difference.
pub fn partial_derivative<F: MatrixFunction + ?Sized>(
    f: &F,
    p: &[f64],
    axis: usize,
    q: &QuadConfig,
) -> Result<Matrix<Complex64>> {
    if axis >= p.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: axis + 1,
        });
    }
    if let Some(g) = f.grad(p, axis) {
        return g;
    }
    let h = q.step_at(p);
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[axis] += h;
    minus[axis] -= h;
    let diff = f.eval(&plus)?.sub(&f.eval(&minus)?)?;
    Ok(diff.scale(&Complex64::new(0.5 / h, 0.0)))
}

/// `∫₀¹ ∂_a G(from + τ(to − from)) dτ` for every axis `a`.
pub fn directional_integral<G: MatrixFunction + ?Sized>(
    g: &G,
    from: &[f64],
    to: &[f64],
    q: &QuadConfig,
) -> Result<Vec<Matrix<Complex64>>> {
    if from.len() != to.len() {
        return Err(Error::DimensionMismatch {
            left: from.len(),
            right: to.len(),
        });
    }
    q.validate()?;
    let rule = GaussLegendre::new(q.order)?;
    let d = from.len();
    let mut acc = vec![Matrix::zeros(g.m()); d];
    let mut point = vec![0.0; d];
    for (tau, w) in rule.pairs() {
        for (k, x) in point.iter_mut().enumerate() {
            *x = from[k] + tau * (to[k] - from[k]);
        }
        let weight = Complex64::new(w, 0.0);
        for (axis, total) in acc.iter_mut().enumerate() {
            let deriv = partial_derivative(g, &point, axis, q).map_err(|e| quad_failure(e, tau))?;
            total.add_scaled(&deriv, &weight)?;
        }
    }
    Ok(acc)
}

fn quad_failure(e: Error, tau: f64) -> Error {
    // Breakdown of a level function is reported as such, not as a quadrature problem.
    if matches!(e, Error::LevelSingular { .. }) {
        e
    } else {
        Error::QuadratureFailure {
            tau,
            source: Box::new(e),
        }
    }
}

/// Level function `F_k` of a partially built fraction, as a [`MatrixFunction`].
struct LevelFunction<'a, F: ?Sized> {
    f: &'a F,
    side: InverseSide,
    base: &'a Matrix<Complex64>,
    storeys: &'a [Storey<Complex64>],
    level: usize,
}

impl<F: MatrixFunction + ?Sized> MatrixFunction for LevelFunction<'_, F> {
    fn dim_in(&self) -> usize {
        self.f.dim_in()
    }

    fn m(&self) -> usize {
        self.f.m()
    }

    fn eval(&self, point: &[f64]) -> Result<Matrix<Complex64>> {
        let value = self.f.eval(point)?;
        fraction::level_value(
            self.side,
            self.base,
            &value,
            &ArgPoint::Vector(point.to_vec()),
            self.storeys,
            self.level,
            None,
        )
    }

    fn grad(&self, point: &[f64], axis: usize) -> Option<Result<Matrix<Complex64>>> {
        if self.level == 1 {
            self.f.grad(point, axis)
        } else {
            None
        }
    }
}

/// Builds with the left-inverse orientation, `T = F(u_0) + R⁻¹·l_1`.
pub fn build_functional<F: MatrixFunction + ?Sized>(
    f: &F,
    nodes: &[Vec<f64>],
    q: &QuadConfig,
) -> Result<ThieleFraction<Complex64>> {
    build_functional_with(f, nodes, q, InverseSide::Left)
}

pub fn build_functional_with<F: MatrixFunction + ?Sized>(
    f: &F,
    nodes: &[Vec<f64>],
    q: &QuadConfig,
    side: InverseSide,
) -> Result<ThieleFraction<Complex64>> {
    q.validate()?;
    validate_nodes(nodes, f.dim_in())?;
    let points: Vec<ArgPoint<Complex64>> = nodes.iter().cloned().map(ArgPoint::Vector).collect();
    let base = f.eval(&nodes[0])?;
    if base.dim() != f.m() {
        return Err(Error::DimensionMismatch {
            left: f.m(),
            right: base.dim(),
        });
    }
    let mut storeys: Vec<Storey<Complex64>> = Vec::with_capacity(nodes.len() - 1);
    for r in 1..nodes.len() {
        let level = LevelFunction {
            f,
            side,
            base: &base,
            storeys: &storeys,
            level: r,
        };
        let coeffs = directional_integral(&level, &nodes[r - 1], &nodes[r], q)
            .map_err(|e| label_level(e, r))?;
        let storey = Storey::new(r, points[r - 1].clone(), Payload::Vector(coeffs))?;
        storeys.push(storey);
    }
    ThieleFraction::new(side, base, points, storeys)
}

fn label_level(e: Error, r: usize) -> Error {
    match e {
        Error::LevelSingular { level, .. } => Error::LevelSingular { level, node: None },
        Error::QuadratureFailure { source, .. } if source.is_breakdown() => {
            Error::LevelSingular { level: r, node: None }
        }
        other => other,
    }
}

fn validate_nodes(nodes: &[Vec<f64>], dim: usize) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Invalid("at least one node is required".into()));
    }
    for node in nodes {
        if node.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: node.len(),
            });
        }
        if node.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("node coordinates must be finite".into()));
        }
    }
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i] == nodes[j] {
                return Err(Error::DuplicateNodes {
                    first: i,
                    second: j,
                });
            }
        }
    }
    Ok(())
}

/// Values `F(u_i)` at every node, for nodal checks.
pub fn node_values<F: MatrixFunction + ?Sized>(
    f: &F,
    nodes: &[Vec<f64>],
) -> Result<Vec<Matrix<Complex64>>> {
    nodes.iter().map(|p| f.eval(p)).collect()
}

/// Relative size of the data, `max_i ‖F(u_i)‖` (at least 1).
pub fn data_scale(values: &[Matrix<Complex64>]) -> f64 {
    values.iter().map(Matrix::norm).fold(1.0, f64::max)
}
