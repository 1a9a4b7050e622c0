//! The operator construction on grid functions, with continual knots.
//!
//! Arguments are piecewise-constant functions on `[0, 1]` with `N` cells. The family
//! `g_ξ` keeps the cells lying in `[ξ, 1]` and zeroes the rest, so that `g_0 = E`,
//! `g_1 = 0` and `g_τ g_ξ = g_{max(τ, ξ)}` hold exactly. A storey is
//!
//! ```text
//! l_k(w) = −Σ_j F_k′(tag_j)[(g_{τ_{j+1}} − g_{τ_j}) w],    τ_j = j / N,
//! ```
//!
//! a Stieltjes sum along the knot path `u_{k−1} + g_τ(u_k − u_{k−1})`. The tag averages
//! the derivative at the two path points `τ_j` and `τ_{j+1}` bracketing the step.

use crate::algebra::{Complex64, Matrix};
use crate::error::{Error, Result};
use crate::fraction::{self, ArgPoint, InverseSide, Payload, Residual, Storey, ThieleFraction};
use crate::quadrature::GaussLegendre;

/// Samples of a piecewise-constant function; sample `j` is its value on `[j/N, (j+1)/N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Invalid(format!(
                "grid functions need at least 2 cells, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "grid function samples",
            });
        }
        Ok(Self { samples })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    /// Samples `f` at the cell midpoints `(j + 1/2)/N`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(midpoints(n).map(f).collect())
    }

    /// Indicator of cell `j`.
    pub fn unit(n: usize, j: usize) -> Result<Self> {
        let mut s = vec![0.0; n];
        s[j] = 1.0;
        Self::new(s)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| a * x).collect(),
        }
    }

    /// `∫₀¹ u(t) dt`.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// `L²(0, 1)` norm.
    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.len() as f64).sqrt()
    }
}

/// Cell midpoints of an `n`-cell grid.
pub fn midpoints(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| (j as f64 + 0.5) / n as f64)
}

/// Right-truncation family `g_ξ` on an `n`-cell grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationFamily {
    n: usize,
}

impl TruncationFamily {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!("grid size must be at least 2, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether cell `j` survives `g_ξ`.
    pub fn keeps(&self, xi: f64, j: usize) -> bool {
        j as f64 / self.n as f64 >= xi
    }

    pub fn apply(&self, xi: f64, w: &GridFunction) -> Result<GridFunction> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::OutOfRange {
                name: "xi",
                value: xi,
            });
        }
        if w.len() != self.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: w.len(),
            });
        }
        Ok(GridFunction {
            samples: w
                .samples
                .iter()
                .enumerate()
                .map(|(j, &x)| if self.keeps(xi, j) { x } else { 0.0 })
                .collect(),
        })
    }
}

pub fn g_apply(fam: &TruncationFamily, xi: f64, w: &GridFunction) -> Result<GridFunction> {
    fam.apply(xi, w)
}

/// `u_prev + g_ξ(u_next − u_prev)`.
pub fn continual_knot(
    fam: &TruncationFamily,
    u_prev: &GridFunction,
    u_next: &GridFunction,
    xi: f64,
) -> Result<GridFunction> {
    u_prev.check_grid(u_next)?;
    // kept cells take u_next verbatim so the endpoints reproduce the nodes bit for bit
    let masked = fam.apply(xi, u_next)?;
    Ok(GridFunction {
        samples: (0..u_prev.len())
            .map(|j| if fam.keeps(xi, j) { masked.samples[j] } else { u_prev.samples[j] })
            .collect(),
    })
}

/// A matrix-valued operator on grid functions.
pub trait OperatorFunction: Sync {
    fn m(&self) -> usize;

    fn eval(&self, u: &GridFunction) -> Result<Matrix<Complex64>>;
}

impl<T: OperatorFunction + ?Sized> OperatorFunction for &T {
    fn m(&self) -> usize {
        (**self).m()
    }

    fn eval(&self, u: &GridFunction) -> Result<Matrix<Complex64>> {
        (**self).eval(u)
    }
}

type OpFn = dyn Fn(&GridFunction) -> Result<Matrix<Complex64>> + Send + Sync;

/// [`OperatorFunction`] from a closure.
pub struct FnOperator {
    m: usize,
    eval: Box<OpFn>,
}

impl FnOperator {
    pub fn new(
        m: usize,
        eval: impl Fn(&GridFunction) -> Result<Matrix<Complex64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            m,
            eval: Box::new(eval),
        }
    }
}

impl OperatorFunction for FnOperator {
    fn m(&self) -> usize {
        self.m
    }

    fn eval(&self, u: &GridFunction) -> Result<Matrix<Complex64>> {
        (self.eval)(u)
    }
}

/// Central-difference Gateaux derivative `F′(v)[h]` with step `fd / max(1, ‖h‖)`.
pub fn gateaux<F: OperatorFunction + ?Sized>(
    f: &F,
    v: &GridFunction,
    h: &GridFunction,
    fd: f64,
) -> Result<Matrix<Complex64>> {
    let eps = fd / h.norm().max(1.0);
    let plus = f.eval(&v.axpy(eps, h)?)?;
    let minus = f.eval(&v.axpy(-eps, h)?)?;
    Ok(plus.sub(&minus)?.scale(&Complex64::new(0.5 / eps, 0.0)))
}

/// Path point `u_prev + g_{j/N}(u_next − u_prev)`.
fn path_point(
    fam: &TruncationFamily,
    u_prev: &GridFunction,
    u_next: &GridFunction,
    j: usize,
) -> GridFunction {
    let tau = j as f64 / fam.n() as f64;
    GridFunction {
        samples: (0..fam.n())
            .map(|c| if fam.keeps(tau, c) { u_next.samples[c] } else { u_prev.samples[c] })
            .collect(),
    }
}

/// `l(w)` as the Stieltjes sum over the τ grid, evaluated directly for this `w`.
pub fn stieltjes_l<F: OperatorFunction + ?Sized>(
    level: &F,
    u_prev: &GridFunction,
    u_next: &GridFunction,
    w: &GridFunction,
    fd: f64,
) -> Result<Matrix<Complex64>> {
    u_prev.check_grid(u_next)?;
    u_prev.check_grid(w)?;
    let fam = TruncationFamily::new(w.len())?;
    let mut acc = Matrix::zeros(level.m());
    let half = Complex64::new(-0.5, 0.0);
    for j in 0..w.len() {
        // (g_{τ_{j+1}} − g_{τ_j}) w drops exactly cell j
        let step = fam
            .apply((j + 1) as f64 / w.len() as f64, w)?
            .sub(&fam.apply(j as f64 / w.len() as f64, w)?)?;
        if step.samples[j] == 0.0 {
            continue;
        }
        for tag in [j, j + 1] {
            let v = path_point(&fam, u_prev, u_next, tag);
            acc.add_scaled(&gateaux(level, &v, &step, fd)?, &half)?;
        }
    }
    Ok(acc)
}

/// How the knot path between consecutive nodes is parameterized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnotPath {
    /// `u_{k−1} + g_τ(u_k − u_{k−1})` with the truncation family.
    Truncation,
    /// `g_τ` replaced by `(1 − τ)·E`, i.e. the straight segment, integrated with an
    /// `order`-point Gauss–Legendre rule. Only the nodal conditions survive this path.
    Linear { order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinualConfig {
    pub fd: f64,
    pub path: KnotPath,
    pub side: InverseSide,
}

impl ContinualConfig {
    pub fn new(fd: f64) -> Self {
        Self {
            fd,
            path: KnotPath::Truncation,
            side: InverseSide::Right,
        }
    }
}

/// Kernel `K_j` with `l(w) = Σ_j K_j·w_j`.
pub fn kernel_table<F: OperatorFunction + ?Sized>(
    level: &F,
    u_prev: &GridFunction,
    u_next: &GridFunction,
    fd: f64,
    path: KnotPath,
) -> Result<Vec<Matrix<Complex64>>> {
    u_prev.check_grid(u_next)?;
    let n = u_prev.len();
    let fam = TruncationFamily::new(n)?;
    let diff = u_next.sub(u_prev)?;
    let mut table = Vec::with_capacity(n);
    match path {
        KnotPath::Truncation => {
            let half = Complex64::new(0.5, 0.0);
            for j in 0..n {
                let e = GridFunction::unit(n, j)?;
                let mut k = Matrix::zeros(level.m());
                for tag in [j, j + 1] {
                    let v = path_point(&fam, u_prev, u_next, tag);
                    k.add_scaled(&gateaux(level, &v, &e, fd)?, &half)?;
                }
                table.push(k);
            }
        }
        KnotPath::Linear { order } => {
            let rule = GaussLegendre::new(order)?;
            let points: Vec<(GridFunction, f64)> = rule
                .pairs()
                .map(|(s, w)| Ok((u_prev.axpy(s, &diff)?, w)))
                .collect::<Result<_>>()?;
            for j in 0..n {
                let e = GridFunction::unit(n, j)?;
                let mut k = Matrix::zeros(level.m());
                for (v, w) in &points {
                    k.add_scaled(&gateaux(level, v, &e, fd)?, &Complex64::new(*w, 0.0))?;
                }
                table.push(k);
            }
        }
    }
    Ok(table)
}

/// Level function `F_k` of a partially built fraction.
struct LevelOperator<'a, F: ?Sized> {
    f: &'a F,
    side: InverseSide,
    base: &'a Matrix<Complex64>,
    storeys: &'a [Storey<Complex64>],
    level: usize,
}

impl<F: OperatorFunction + ?Sized> OperatorFunction for LevelOperator<'_, F> {
    fn m(&self) -> usize {
        self.f.m()
    }

    fn eval(&self, u: &GridFunction) -> Result<Matrix<Complex64>> {
        let value = self.f.eval(u)?;
        fraction::level_value(
            self.side,
            self.base,
            &value,
            &ArgPoint::Grid(u.clone()),
            self.storeys,
            self.level,
            None,
        )
    }
}

/// Builds on the truncation path with the right-inverse orientation,
/// `T = F(u_0) + l_1·R⁻¹` and `F_2 = [F − F(u_0)]⁻¹·l_1`.
pub fn build_abstract<F: OperatorFunction + ?Sized>(
    f: &F,
    knots: &[GridFunction],
    fd: f64,
) -> Result<ThieleFraction<Complex64>> {
    build_abstract_with(f, knots, &ContinualConfig::new(fd))
}

pub fn build_abstract_with<F: OperatorFunction + ?Sized>(
    f: &F,
    knots: &[GridFunction],
    cfg: &ContinualConfig,
) -> Result<ThieleFraction<Complex64>> {
    if !(cfg.fd.is_finite() && cfg.fd > 0.0) {
        return Err(Error::Invalid(format!(
            "finite-difference step must be positive, got {}",
            cfg.fd
        )));
    }
    validate_knots(knots)?;
    let points: Vec<ArgPoint<Complex64>> = knots.iter().cloned().map(ArgPoint::Grid).collect();
    let base = f.eval(&knots[0])?;
    let mut storeys: Vec<Storey<Complex64>> = Vec::with_capacity(knots.len() - 1);
    for k in 1..knots.len() {
        let level = LevelOperator {
            f,
            side: cfg.side,
            base: &base,
            storeys: &storeys,
            level: k,
        };
        let table = kernel_table(&level, &knots[k - 1], &knots[k], cfg.fd, cfg.path).map_err(
            |e| match e {
                Error::LevelSingular { level, .. } => Error::LevelSingular { level, node: None },
                other => other,
            },
        )?;
        storeys.push(Storey::new(k, points[k - 1].clone(), Payload::Grid(table))?);
    }
    ThieleFraction::new(cfg.side, base, points, storeys)
}

fn validate_knots(knots: &[GridFunction]) -> Result<()> {
    let Some(first) = knots.first() else {
        return Err(Error::Invalid("at least one knot is required".into()));
    };
    for k in knots {
        first.check_grid(k)?;
    }
    for i in 0..knots.len() {
        for j in i + 1..knots.len() {
            if knots[i] == knots[j] {
                return Err(Error::DuplicateNodes {
                    first: i,
                    second: j,
                });
            }
        }
    }
    Ok(())
}

/// Residuals `‖T_n(u_{n−1,n}(ξ)) − F(u_{n−1,n}(ξ))‖` along the last continual knot.
pub fn check_continual<F: OperatorFunction + ?Sized>(
    frac: &ThieleFraction<Complex64>,
    f: &F,
    xis: &[f64],
) -> Result<Vec<Residual>> {
    let n = frac.depth();
    if n == 0 {
        return Err(Error::Invalid(
            "continual checks need at least one storey".into(),
        ));
    }
    let (ArgPoint::Grid(prev), ArgPoint::Grid(next)) = (&frac.nodes()[n - 1], &frac.nodes()[n])
    else {
        return Err(Error::KindMismatch {
            expected: "grid".into(),
            found: frac.arg_kind().to_string(),
        });
    };
    let fam = TruncationFamily::new(prev.len())?;
    Ok(xis
        .iter()
        .map(|&xi| {
            Residual::from_result((|| {
                let knot = continual_knot(&fam, prev, next, xi)?;
                let t = frac.evaluate(&ArgPoint::Grid(knot.clone()))?;
                Ok(t.sub(&f.eval(&knot)?)?.norm())
            })())
        })
        .collect())
}

/// Built-in operator
/// `F(u) = [[2 + ∫u, ∫t·u], [∫u², 1 + ∫eᵗ·u]]`, integrals over `[0, 1]` by the midpoint rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemoOperator;

impl OperatorFunction for DemoOperator {
    fn m(&self) -> usize {
        2
    }

    fn eval(&self, u: &GridFunction) -> Result<Matrix<Complex64>> {
        let n = u.len() as f64;
        let (mut s, mut st, mut s2, mut se) = (0.0, 0.0, 0.0, 0.0);
        for (t, x) in midpoints(u.len()).zip(u.samples()) {
            s += x;
            st += t * x;
            s2 += x * x;
            se += t.exp() * x;
        }
        let c = |v: f64| Complex64::new(v, 0.0);
        Matrix::from_rows(vec![
            vec![c(2.0 + s / n), c(st / n)],
            vec![c(s2 / n), c(1.0 + se / n)],
        ])
    }
}

/// Knots of the built-in demo: `0`, `t`, `sin(πt)`.
pub fn demo_knots(n: usize) -> Result<Vec<GridFunction>> {
    Ok(vec![
        GridFunction::zeros(n)?,
        GridFunction::from_fn(n, |t| t)?,
        GridFunction::from_fn(n, |t| (std::f64::consts::PI * t).sin())?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn grid(samples: &[f64]) -> GridFunction {
        GridFunction::new(samples.to_vec()).unwrap()
    }

    #[test]
    fn truncation_laws_on_small_grid() {
        let fam = TruncationFamily::new(4).unwrap();
        let w = grid(&[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(fam.apply(0.0, &w).unwrap(), w);
        assert_eq!(fam.apply(1.0, &w).unwrap(), GridFunction::zeros(4).unwrap());
        assert_eq!(fam.apply(0.5, &w).unwrap(), grid(&[0.0, 0.0, 3.0, 4.0]));
        let inner = fam.apply(0.7, &w).unwrap();
        assert_eq!(fam.apply(0.3, &inner).unwrap(), inner);
        assert!(matches!(fam.apply(1.5, &w), Err(Error::OutOfRange { .. })));
        assert!(matches!(fam.apply(0.5, &grid(&[1.0, 2.0])), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn knot_endpoints() {
        let fam = TruncationFamily::new(4).unwrap();
        let a = grid(&[0.0; 4]);
        let b = grid(&[1.0; 4]);
        assert_eq!(continual_knot(&fam, &a, &b, 0.0).unwrap(), b);
        assert_eq!(continual_knot(&fam, &a, &b, 1.0).unwrap(), a);
        assert_eq!(continual_knot(&fam, &a, &b, 0.5).unwrap(), grid(&[0.0, 0.0, 1.0, 1.0]));
        assert!(continual_knot(&fam, &a, &grid(&[1.0; 3]), 0.5).is_err());
    }

    #[test]
    fn grid_function_validation() {
        assert!(GridFunction::new(vec![1.0]).is_err());
        assert!(GridFunction::new(vec![1.0, f64::NAN]).is_err());
        let g = GridFunction::from_fn(4, |t| t).unwrap();
        assert_eq!(g.samples(), &[0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.integral(), 0.5);
    }

    fn mean_operator() -> FnOperator {
        FnOperator::new(1, |u| Ok(Matrix::diag(vec![c(u.integral())])))
    }

    #[test]
    fn stieltjes_of_zero_direction_is_zero() {
        let f = DemoOperator;
        let a = GridFunction::from_fn(8, |t| t).unwrap();
        let b = GridFunction::from_fn(8, |t| 1.0 - t * t).unwrap();
        let l = stieltjes_l(&f, &a, &b, &GridFunction::zeros(8).unwrap(), 1e-6).unwrap();
        assert_eq!(l, Matrix::zeros(2));
    }

    #[test]
    fn stieltjes_of_linear_functional_is_the_functional() {
        let f = mean_operator();
        let a = GridFunction::from_fn(16, |t| t).unwrap();
        let b = GridFunction::from_fn(16, |t| t.cos()).unwrap();
        let w = GridFunction::from_fn(16, |t| (3.0 * t).sin() - 0.2).unwrap();
        let l = stieltjes_l(&f, &a, &b, &w, 1e-6).unwrap();
        assert!((l.get(0, 0).re - w.integral()).abs() < 1e-9);
    }

    #[test]
    fn diagonal_operator_decouples() {
        let d = FnOperator::new(2, |u| {
            let s = u.integral();
            let q = u.samples().iter().map(|x| x * x).sum::<f64>() / u.len() as f64;
            Ok(Matrix::diag(vec![c(s.exp()), c(1.0 + q)]))
        });
        let e1 = FnOperator::new(1, |u| Ok(Matrix::diag(vec![c(u.integral().exp())])));
        let e2 = FnOperator::new(1, |u| {
            let q = u.samples().iter().map(|x| x * x).sum::<f64>() / u.len() as f64;
            Ok(Matrix::diag(vec![c(1.0 + q)]))
        });
        let a = GridFunction::from_fn(12, |t| t).unwrap();
        let b = GridFunction::from_fn(12, |t| 2.0 - t).unwrap();
        let w = GridFunction::from_fn(12, |t| t * t - 0.5).unwrap();
        let l = stieltjes_l(&d, &a, &b, &w, 1e-6).unwrap();
        let l1 = stieltjes_l(&e1, &a, &b, &w, 1e-6).unwrap();
        let l2 = stieltjes_l(&e2, &a, &b, &w, 1e-6).unwrap();
        assert!((l.get(0, 0) - l1.get(0, 0)).norm() < 1e-12);
        assert!((l.get(1, 1) - l2.get(0, 0)).norm() < 1e-12);
        assert_eq!(*l.get(0, 1), c(0.0));
        assert_eq!(*l.get(1, 0), c(0.0));
    }

    #[test]
    fn kernel_reproduces_direct_sum() {
        let f = DemoOperator;
        let a = GridFunction::from_fn(10, |t| t).unwrap();
        let b = GridFunction::from_fn(10, |t| (3.0 * t).sin()).unwrap();
        let w = GridFunction::from_fn(10, |t| 1.0 + t).unwrap();
        let table = kernel_table(&f, &a, &b, 1e-6, KnotPath::Truncation).unwrap();
        let mut via_kernel = Matrix::zeros(2);
        for (k, x) in table.iter().zip(w.samples()) {
            via_kernel.add_scaled(k, &c(*x)).unwrap();
        }
        let direct = stieltjes_l(&f, &a, &b, &w, 1e-6).unwrap();
        assert!(via_kernel.sub(&direct).unwrap().norm() < 1e-8);
    }

    #[test]
    fn one_storey_interpolates_second_knot() {
        let knots = demo_knots(50).unwrap()[..2].to_vec();
        let f = build_abstract(&DemoOperator, &knots, 1e-6).unwrap();
        let res = f
            .verify_nodal(&[DemoOperator.eval(&knots[0]).unwrap(), DemoOperator.eval(&knots[1]).unwrap()])
            .unwrap();
        assert_eq!(res[0].value, 0.0);
        // The trapezoidal tag is exact for the quadratic entry of this operator.
        assert!(res[1].value < 1e-8, "{}", res[1].value);
    }

    #[test]
    fn duplicate_knots_are_rejected() {
        let k = demo_knots(8).unwrap();
        let knots = vec![k[0].clone(), k[1].clone(), k[1].clone()];
        assert_eq!(
            build_abstract(&DemoOperator, &knots, 1e-6).unwrap_err(),
            Error::DuplicateNodes { first: 1, second: 2 }
        );
        let mixed = vec![k[0].clone(), GridFunction::zeros(9).unwrap()];
        assert!(matches!(build_abstract(&DemoOperator, &mixed, 1e-6), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn continual_residual_at_endpoints_matches_nodal() {
        let knots = demo_knots(40).unwrap();
        let f = build_abstract(&DemoOperator, &knots, 1e-6).unwrap();
        let values: Vec<_> = knots.iter().map(|k| DemoOperator.eval(k).unwrap()).collect();
        let nodal = f.verify_nodal(&values).unwrap();
        let cont = check_continual(&f, &DemoOperator, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(cont[0].value, nodal[2].value);
        assert_eq!(cont[1].value, nodal[1].value);
        assert!(cont[2].value.is_infinite());
        assert!(matches!(cont[2].error, Some(Error::OutOfRange { .. })));
    }
}
