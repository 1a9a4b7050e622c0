//! The n-storey fraction: data model, backward evaluation, truncation and nodal checks.

use std::fmt;

use crate::algebra::{Matrix, Scalar};
use crate::continual::GridFunction;
use crate::error::{Error, Result};

/// Side on which the inverted tail multiplies a storey's linear map.
///
/// * `Right`: `T = F(u_0) + l_1·R_2⁻¹` with `R_k = I + l_k·R_{k+1}⁻¹`; the matching level
///   functions are `F_2 = [F − F(u_0)]⁻¹·l_1` and `F_k = [F_{k−1} − I]⁻¹·l_{k−1}`.
/// * `Left`: `T = F(u_0) + R_2⁻¹·l_1` with `R_k = I + R_{k+1}⁻¹·l_k`; level functions
///   `F_2 = l_1·[F − F(u_0)]⁻¹` and `F_k = l_{k−1}·[F_{k−1} − I]⁻¹`.
///
/// Each pairing interpolates on its own; mixing them does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InverseSide {
    Right,
    Left,
}

impl InverseSide {
    pub fn as_str(self) -> &'static str {
        match self {
            InverseSide::Right => "right",
            InverseSide::Left => "left",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(InverseSide::Right),
            "left" => Ok(InverseSide::Left),
            other => Err(Error::Invalid(format!("unknown inverse side `{other}`"))),
        }
    }

    /// Product of a linear-map value with an inverted bracket, in this orientation.
    fn attach<S: Scalar>(self, map: &Matrix<S>, inverted: &Matrix<S>) -> Result<Matrix<S>> {
        match self {
            InverseSide::Right => map.mul(inverted),
            InverseSide::Left => inverted.mul(map),
        }
    }

    fn mirror(self) -> Self {
        match self {
            InverseSide::Right => InverseSide::Left,
            InverseSide::Left => InverseSide::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArgKind {
    Scalar,
    Vector(usize),
    Grid(usize),
}

impl fmt::Display for ArgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgKind::Scalar => f.write_str("scalar"),
            ArgKind::Vector(d) => write!(f, "vector({d})"),
            ArgKind::Grid(n) => write!(f, "grid({n})"),
        }
    }
}

/// A point of the argument space.
#[derive(Debug, Clone, PartialEq)]
pub enum ArgPoint<S> {
    Scalar(S),
    Vector(Vec<f64>),
    Grid(GridFunction),
}

impl<S: Scalar> ArgPoint<S> {
    pub fn kind(&self) -> ArgKind {
        match self {
            ArgPoint::Scalar(_) => ArgKind::Scalar,
            ArgPoint::Vector(v) => ArgKind::Vector(v.len()),
            ArgPoint::Grid(g) => ArgKind::Grid(g.len()),
        }
    }

    fn check_kind(&self, expected: ArgKind) -> Result<()> {
        if self.kind() == expected {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: expected.to_string(),
                found: self.kind().to_string(),
            })
        }
    }
}

/// Coefficients of a storey's linear map.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload<S> {
    /// `l(Δ) = Δ·B`.
    Scalar(Matrix<S>),
    /// `l(w) = Σ_a C_a·w_a`, one matrix per coordinate.
    Vector(Vec<Matrix<S>>),
    /// `l(w) = Σ_j K_j·w_j`, one matrix per grid cell.
    Grid(Vec<Matrix<S>>),
}

impl<S: Scalar> Payload<S> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Payload::Scalar(_) => "scalar",
            Payload::Vector(_) => "vector",
            Payload::Grid(_) => "grid",
        }
    }

    pub fn matrices(&self) -> &[Matrix<S>] {
        match self {
            Payload::Scalar(b) => std::slice::from_ref(b),
            Payload::Vector(c) | Payload::Grid(c) => c,
        }
    }

    fn kind_for(&self) -> ArgKind {
        match self {
            Payload::Scalar(_) => ArgKind::Scalar,
            Payload::Vector(c) => ArgKind::Vector(c.len()),
            Payload::Grid(k) => ArgKind::Grid(k.len()),
        }
    }
}

/// One level `l_k` of the fraction, anchored at `u_{k−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Storey<S> {
    level: usize,
    anchor: ArgPoint<S>,
    payload: Payload<S>,
}

impl<S: Scalar> Storey<S> {
    pub fn new(level: usize, anchor: ArgPoint<S>, payload: Payload<S>) -> Result<Self> {
        if level == 0 {
            return Err(Error::Invalid("storey levels start at 1".into()));
        }
        if payload.kind_for() != anchor.kind() {
            return Err(Error::KindMismatch {
                expected: anchor.kind().to_string(),
                found: payload.kind_for().to_string(),
            });
        }
        if let Some(first) = payload.matrices().first() {
            for c in payload.matrices() {
                if c.dim() != first.dim() {
                    return Err(Error::DimensionMismatch {
                        left: first.dim(),
                        right: c.dim(),
                    });
                }
            }
        }
        Ok(Self {
            level,
            anchor,
            payload,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn anchor(&self) -> &ArgPoint<S> {
        &self.anchor
    }

    pub fn payload(&self) -> &Payload<S> {
        &self.payload
    }

    fn dim(&self) -> Option<usize> {
        self.payload.matrices().first().map(Matrix::dim)
    }

    /// `l_k(u − u_{k−1})`.
    pub fn apply(&self, u: &ArgPoint<S>) -> Result<Matrix<S>> {
        u.check_kind(self.anchor.kind())?;
        let dim = self.dim().unwrap_or(0);
        match (&self.payload, u, &self.anchor) {
            (Payload::Scalar(b), ArgPoint::Scalar(z), ArgPoint::Scalar(a)) => {
                Ok(b.scale(&(z.clone() - a.clone())))
            }
            (Payload::Vector(cs), ArgPoint::Vector(x), ArgPoint::Vector(a)) => {
                let mut acc = Matrix::zeros(dim);
                for ((c, xi), ai) in cs.iter().zip(x).zip(a) {
                    acc.add_scaled(c, &S::from_f64(xi - ai)?)?;
                }
                Ok(acc)
            }
            (Payload::Grid(ks), ArgPoint::Grid(w), ArgPoint::Grid(a)) => {
                let mut acc = Matrix::zeros(dim);
                for ((k, wj), aj) in ks.iter().zip(w.samples()).zip(a.samples()) {
                    let d = wj - aj;
                    if d != 0.0 {
                        acc.add_scaled(k, &S::from_f64(d)?)?;
                    }
                }
                Ok(acc)
            }
            _ => unreachable!("kinds checked above"),
        }
    }
}

/// Residual of one interpolation check; `value` is `+∞` when evaluation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub error: Option<Error>,
}

impl Residual {
    pub fn ok(value: f64) -> Self {
        Self { value, error: None }
    }

    pub fn failed(error: Error) -> Self {
        Self {
            value: f64::INFINITY,
            error: Some(error),
        }
    }

    pub fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::ok(v),
            Err(e) => Self::failed(e),
        }
    }
}

/// The interpolant `T_n`: base value `F(u_0)`, nodes `u_0..u_n`, storeys `l_1..l_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThieleFraction<S> {
    m: usize,
    side: InverseSide,
    base: Matrix<S>,
    nodes: Vec<ArgPoint<S>>,
    storeys: Vec<Storey<S>>,
}

impl<S: Scalar> ThieleFraction<S> {
    pub fn new(
        side: InverseSide,
        base: Matrix<S>,
        nodes: Vec<ArgPoint<S>>,
        storeys: Vec<Storey<S>>,
    ) -> Result<Self> {
        let m = base.dim();
        let Some(first) = nodes.first() else {
            return Err(Error::Invalid("a fraction needs at least one node".into()));
        };
        if nodes.len() != storeys.len() + 1 {
            return Err(Error::Invalid(format!(
                "{} nodes but {} storeys",
                nodes.len(),
                storeys.len()
            )));
        }
        let kind = first.kind();
        for node in &nodes {
            node.check_kind(kind)?;
        }
        for (i, s) in storeys.iter().enumerate() {
            if s.level != i + 1 {
                return Err(Error::Invalid(format!(
                    "storey {} carries level {}",
                    i + 1,
                    s.level
                )));
            }
            if s.anchor != nodes[i] {
                return Err(Error::Invalid(format!(
                    "storey {} is not anchored at node {i}",
                    i + 1
                )));
            }
            if let Some(d) = s.dim() {
                if d != m {
                    return Err(Error::DimensionMismatch { left: m, right: d });
                }
            }
        }
        Ok(Self {
            m,
            side,
            base,
            nodes,
            storeys,
        })
    }

    /// The constant fraction `T_0 = F(u_0)`.
    pub fn constant(side: InverseSide, base: Matrix<S>, node: ArgPoint<S>) -> Self {
        Self {
            m: base.dim(),
            side,
            base,
            nodes: vec![node],
            storeys: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> InverseSide {
        self.side
    }

    pub fn arg_kind(&self) -> ArgKind {
        self.nodes[0].kind()
    }

    pub fn base(&self) -> &Matrix<S> {
        &self.base
    }

    pub fn nodes(&self) -> &[ArgPoint<S>] {
        &self.nodes
    }

    pub fn storeys(&self) -> &[Storey<S>] {
        &self.storeys
    }

    /// Number of storeys `n`.
    pub fn depth(&self) -> usize {
        self.storeys.len()
    }

    /// Backward evaluation of `T_n(u)`.
    pub fn evaluate(&self, u: &ArgPoint<S>) -> Result<Matrix<S>> {
        u.check_kind(self.arg_kind())?;
        let Some((first, rest)) = self.storeys.split_first() else {
            return Ok(self.base.clone());
        };
        let identity = Matrix::identity(self.m);
        let mut tail: Option<Matrix<S>> = None;
        for storey in rest.iter().rev() {
            let l = storey.apply(u)?;
            let r = match tail {
                None => identity.add(&l)?,
                Some(r) => {
                    let inv = invert_tail(&r, storey.level + 1)?;
                    identity.add(&self.side.attach(&l, &inv)?)?
                }
            };
            tail = Some(r);
        }
        let l1 = first.apply(u)?;
        let correction = match tail {
            None => l1,
            Some(r) => self.side.attach(&l1, &invert_tail(&r, 2)?)?,
        };
        self.base.add(&correction)
    }

    /// The `k`-storey prefix `T_k`.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: k,
                max: self.depth(),
            });
        }
        Ok(Self {
            m: self.m,
            side: self.side,
            base: self.base.clone(),
            nodes: self.nodes[..=k].to_vec(),
            storeys: self.storeys[..k].to_vec(),
        })
    }

    /// `‖T_n(u_i) − values[i]‖` for every node.
    pub fn verify_nodal(&self, values: &[Matrix<S>]) -> Result<Vec<Residual>> {
        if values.len() != self.nodes.len() {
            return Err(Error::Invalid(format!(
                "{} values for {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        Ok(self
            .nodes
            .iter()
            .zip(values)
            .map(|(u, v)| Residual::from_result(self.evaluate(u).and_then(|t| t.sub(v)).map(|d| d.norm())))
            .collect())
    }

    /// `F_k(u)` for this fraction's storeys, given `F(u)`.
    pub fn level_value(&self, f_u: &Matrix<S>, u: &ArgPoint<S>, k: usize) -> Result<Matrix<S>> {
        level_value(self.side, &self.base, f_u, u, &self.storeys, k, None)
    }
}

fn invert_tail<S: Scalar>(r: &Matrix<S>, level: usize) -> Result<Matrix<S>> {
    r.inverse().map_err(|_| Error::TailSingular { level })
}

/// Level function `F_k(u)` built from `F(u)` and the storeys `l_1..l_{k−1}`.
///
/// `base` is `F(u_0)`. `node` only labels a [`Error::LevelSingular`] failure.
pub fn level_value<S: Scalar>(
    side: InverseSide,
    base: &Matrix<S>,
    f_u: &Matrix<S>,
    u: &ArgPoint<S>,
    storeys: &[Storey<S>],
    k: usize,
    node: Option<usize>,
) -> Result<Matrix<S>> {
    if k == 0 || k > storeys.len() + 1 {
        return Err(Error::LevelOutOfRange {
            level: k,
            max: storeys.len() + 1,
        });
    }
    let identity = Matrix::identity(f_u.dim());
    let mut current = f_u.clone();
    for level in 2..=k {
        let shift = if level == 2 { base } else { &identity };
        let inv = current
            .sub(shift)?
            .inverse()
            .map_err(|_| Error::LevelSingular { level, node })?;
        let l = storeys[level - 2].apply(u)?;
        // solving T = F(u) for the tail puts the inverse on the opposite side
        current = side
            .mirror()
            .attach(&l, &inv)
            .map_err(|_| Error::LevelSingular { level, node })?;
    }
    Ok(current)
}
