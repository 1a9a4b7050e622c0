//! JSON node files and fraction files.
//!
//! Node files share `{"m", "backend", "arg_kind", ...}`:
//!
//! - `scalar`: `"nodes"` complex pairs, `"values"` matrices;
//! - `vector`: `"dim"`, `"vars"`, `"function"` (an `m×m` array of expressions) and `"nodes"`
//!   as arrays of numbers or constant expressions;
//! - `grid`: `"grid"` (cell count), `"operator"` (`"demo"`) and `"knots"` given either as
//!   expressions in `t` or as `{"N", "samples"}` objects.

use serde_json::{json, Map, Value};

use crate::algebra::{Backend, Complex64, GaussianRational, Matrix, Scalar};
use crate::continual::{DemoOperator, GridFunction};
use crate::error::{Error, Result};
use crate::exprlang::{self, MatrixExpr};
use crate::fraction::{ArgKind, ArgPoint, InverseSide, Payload, Storey, ThieleFraction};
use crate::scalar_builder::NodeData;

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Invalid(format!("missing field \"{key}\"")))
}

fn as_object(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Invalid(format!("expected a JSON object, found {}", short(v))))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Invalid(format!("\"{what}\" must be an array, found {}", short(v))))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Invalid(format!("\"{what}\" must be a non-negative integer")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Invalid(format!("\"{what}\" must be a string")))
}

fn short(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 40 {
        format!("{}...", &s[..40])
    } else {
        s
    }
}

/// A real number written as a JSON number or a constant expression such as `"pi/2"`.
pub fn real_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Invalid(format!("unrepresentable number {n}"))),
        Value::String(s) => exprlang::eval_constant(s),
        other => Err(Error::Invalid(format!(
            "expected a number or expression, found {}",
            short(other)
        ))),
    }
}

fn check_m<S: Scalar>(m: usize, values: &[Matrix<S>]) -> Result<()> {
    for v in values {
        if v.dim() != m {
            return Err(Error::DimensionMismatch {
                left: m,
                right: v.dim(),
            });
        }
    }
    Ok(())
}

/// Scalar node data under either backend.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarNodes {
    Exact(NodeData<GaussianRational>),
    Float(NodeData<Complex64>),
}

impl ScalarNodes {
    pub fn backend(&self) -> Backend {
        match self {
            ScalarNodes::Exact(_) => Backend::Exact,
            ScalarNodes::Float(_) => Backend::Float,
        }
    }
}

/// A matrix function of real variables given by expression sources.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorInput {
    pub function: MatrixExpr,
    pub nodes: Vec<Vec<f64>>,
}

/// Operators available to grid inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridOperator {
    Demo,
}

impl GridOperator {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "demo" => Ok(GridOperator::Demo),
            other => Err(Error::Invalid(format!("unknown operator \"{other}\""))),
        }
    }

    pub fn m(&self) -> usize {
        2
    }

    pub fn operator(&self) -> DemoOperator {
        DemoOperator
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridInput {
    pub operator: GridOperator,
    pub knots: Vec<GridFunction>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeInput {
    Scalar(ScalarNodes),
    Vector(VectorInput),
    Grid(GridInput),
}

impl NodeInput {
    pub fn arg_kind(&self) -> &'static str {
        match self {
            NodeInput::Scalar(_) => "scalar",
            NodeInput::Vector(_) => "vector",
            NodeInput::Grid(_) => "grid",
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            NodeInput::Scalar(s) => s.backend(),
            _ => Backend::Float,
        }
    }
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InputOptions {
    pub backend: Option<Backend>,
    pub grid: Option<usize>,
}

pub fn parse_node_input(text: &str, opts: InputOptions) -> Result<NodeInput> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed JSON: {e}")))?;
    node_input_from_json(&v, opts)
}

pub fn node_input_from_json(v: &Value, opts: InputOptions) -> Result<NodeInput> {
    let obj = as_object(v)?;
    let m = as_usize(field(obj, "m")?, "m")?;
    if m == 0 {
        return Err(Error::Invalid("\"m\" must be positive".into()));
    }
    let file_backend = match obj.get("backend") {
        Some(b) => Backend::parse(as_str(b, "backend")?)?,
        None => Backend::Float,
    };
    let backend = opts.backend.unwrap_or(file_backend);
    let kind = as_str(field(obj, "arg_kind")?, "arg_kind")?;
    match kind {
        "scalar" => {
            let nodes = as_array(field(obj, "nodes")?, "nodes")?;
            let values = as_array(field(obj, "values")?, "values")?;
            Ok(NodeInput::Scalar(match backend {
                Backend::Exact => ScalarNodes::Exact(scalar_nodes(m, nodes, values)?),
                Backend::Float => ScalarNodes::Float(scalar_nodes(m, nodes, values)?),
            }))
        }
        "vector" | "grid" if backend == Backend::Exact => Err(Error::Invalid(format!(
            "the exact backend is only available for scalar arguments, not \"{kind}\""
        ))),
        "vector" => vector_input(obj, m).map(NodeInput::Vector),
        "grid" => grid_input(obj, m, opts.grid).map(NodeInput::Grid),
        other => Err(Error::Invalid(format!("unknown arg_kind \"{other}\""))),
    }
}

fn scalar_nodes<S: Scalar>(m: usize, nodes: &[Value], values: &[Value]) -> Result<NodeData<S>> {
    let nodes = nodes.iter().map(S::from_json).collect::<Result<Vec<_>>>()?;
    let values = values
        .iter()
        .map(Matrix::from_json)
        .collect::<Result<Vec<_>>>()?;
    check_m(m, &values)?;
    NodeData::new(nodes, values)
}

fn vector_input(obj: &Map<String, Value>, m: usize) -> Result<VectorInput> {
    let dim = as_usize(field(obj, "dim")?, "dim")?;
    let vars = as_array(field(obj, "vars")?, "vars")?
        .iter()
        .map(|v| as_str(v, "vars").map(str::to_owned))
        .collect::<Result<Vec<_>>>()?;
    if vars.len() != dim {
        return Err(Error::Invalid(format!(
            "{} variable names for dimension {dim}",
            vars.len()
        )));
    }
    let rows = as_array(field(obj, "function")?, "function")?
        .iter()
        .map(|row| {
            as_array(row, "function")?
                .iter()
                .map(|e| as_str(e, "function").map(str::to_owned))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let function = MatrixExpr::parse(&rows, &vars)?;
    if function.m() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: function.m(),
        });
    }
    let nodes = as_array(field(obj, "nodes")?, "nodes")?
        .iter()
        .map(|p| vector_point(p, dim))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorInput { function, nodes })
}

fn vector_point(v: &Value, dim: usize) -> Result<Vec<f64>> {
    let p = as_array(v, "nodes")?
        .iter()
        .map(real_from_json)
        .collect::<Result<Vec<_>>>()?;
    if p.len() != dim {
        return Err(Error::Invalid(format!(
            "point {} has {} coordinates, expected {dim}",
            short(v),
            p.len()
        )));
    }
    Ok(p)
}

fn grid_input(obj: &Map<String, Value>, m: usize, grid: Option<usize>) -> Result<GridInput> {
    let operator = GridOperator::parse(as_str(field(obj, "operator")?, "operator")?)?;
    if operator.m() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: operator.m(),
        });
    }
    let n = match grid {
        Some(n) => Some(n),
        None => obj.get("grid").map(|g| as_usize(g, "grid")).transpose()?,
    };
    let knots = as_array(field(obj, "knots")?, "knots")?
        .iter()
        .map(|k| knot_from_json(k, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridInput { operator, knots })
}

fn knot_from_json(v: &Value, n: Option<usize>) -> Result<GridFunction> {
    match v {
        Value::String(src) => {
            let n = n.ok_or_else(|| {
                Error::Invalid("expression knots need a grid size (\"grid\" or --grid)".into())
            })?;
            let e = exprlang::parse(src, &["t".to_owned()])?;
            let samples = crate::continual::midpoints(n)
                .map(|t| e.eval_slice(&[t]))
                .collect::<Result<Vec<_>>>()?;
            GridFunction::new(samples)
        }
        _ => {
            let g = grid_from_json(v)?;
            match n {
                Some(n) if n != g.len() => Err(Error::GridMismatch {
                    left: n,
                    right: g.len(),
                }),
                _ => Ok(g),
            }
        }
    }
}

pub fn grid_to_json(g: &GridFunction) -> Value {
    json!({ "N": g.len(), "samples": g.samples() })
}

pub fn grid_from_json(v: &Value) -> Result<GridFunction> {
    let obj = as_object(v)?;
    let n = as_usize(field(obj, "N")?, "N")?;
    let samples = as_array(field(obj, "samples")?, "samples")?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::Invalid(format!("grid sample {} is not a number", short(x))))
        })
        .collect::<Result<Vec<_>>>()?;
    if samples.len() != n {
        return Err(Error::GridMismatch {
            left: n,
            right: samples.len(),
        });
    }
    GridFunction::new(samples)
}

pub fn point_to_json<S: Scalar>(p: &ArgPoint<S>) -> Value {
    match p {
        ArgPoint::Scalar(z) => z.to_json(),
        ArgPoint::Vector(x) => json!(x),
        ArgPoint::Grid(g) => grid_to_json(g),
    }
}

/// Reads a point of the given kind. Vector coordinates may be constant expressions.
pub fn point_from_json<S: Scalar>(v: &Value, kind: ArgKind) -> Result<ArgPoint<S>> {
    let p = match kind {
        ArgKind::Scalar => ArgPoint::Scalar(match v {
            Value::Array(_) => S::from_json(v)?,
            Value::Number(_) => S::from_json(&json!([v, 0]))?,
            Value::String(s) => scalar_from_text(s)?,
            other => {
                return Err(Error::Invalid(format!(
                    "expected a scalar point, found {}",
                    short(other)
                )))
            }
        }),
        ArgKind::Vector(d) => ArgPoint::Vector(vector_point(v, d)?),
        ArgKind::Grid(_) => ArgPoint::Grid(grid_from_json(v)?),
    };
    if p.kind() != kind {
        return Err(Error::KindMismatch {
            expected: kind.to_string(),
            found: p.kind().to_string(),
        });
    }
    Ok(p)
}

/// Real scalar from text: an exact `p/q` or integer when possible, otherwise a constant
/// expression evaluated in doubles.
fn scalar_from_text<S: Scalar>(s: &str) -> Result<S> {
    let t = s.trim();
    if let Ok(z) = S::from_json(&json!([t, "0"])) {
        return Ok(z);
    }
    S::from_f64(exprlang::eval_constant(t)?)
}

/// Parses a command-line point: JSON, or comma-separated constant expressions
/// (`re` or `re, im` for scalar arguments).
pub fn point_from_text<S: Scalar>(text: &str, kind: ArgKind) -> Result<ArgPoint<S>> {
    if let Ok(v) = serde_json::from_str::<Value>(text) {
        return point_from_json(&v, kind);
    }
    match kind {
        ArgKind::Scalar => {
            let parts: Vec<&str> = text.split(',').collect();
            let z = match parts[..] {
                [re] => scalar_from_text(re)?,
                [re, im] => {
                    let i = S::from_json(&json!(["0", "1"]))?;
                    scalar_from_text::<S>(re)? + scalar_from_text::<S>(im)? * i
                }
                _ => return Err(Error::Invalid(format!("scalar point `{text}` must be `re` or `re, im`"))),
            };
            Ok(ArgPoint::Scalar(z))
        }
        ArgKind::Vector(_) => {
            let parts: Vec<Value> = text.split(',').map(|s| json!(s.trim())).collect();
            point_from_json(&Value::Array(parts), kind)
        }
        ArgKind::Grid(_) => Err(Error::Invalid(
            "grid points must be given as {\"N\", \"samples\"} JSON".into(),
        )),
    }
}

fn kind_fields(kind: ArgKind, obj: &mut Map<String, Value>) {
    match kind {
        ArgKind::Scalar => {
            obj.insert("arg_kind".into(), json!("scalar"));
        }
        ArgKind::Vector(d) => {
            obj.insert("arg_kind".into(), json!("vector"));
            obj.insert("dim".into(), json!(d));
        }
        ArgKind::Grid(n) => {
            obj.insert("arg_kind".into(), json!("grid"));
            obj.insert("N".into(), json!(n));
        }
    }
}

pub fn fraction_to_json<S: Scalar>(f: &ThieleFraction<S>) -> Value {
    let mut obj = Map::new();
    obj.insert("m".into(), json!(f.m()));
    kind_fields(f.arg_kind(), &mut obj);
    obj.insert("backend".into(), json!(S::BACKEND.as_str()));
    obj.insert("side".into(), json!(f.side().as_str()));
    obj.insert("base".into(), f.base().to_json());
    obj.insert(
        "nodes".into(),
        Value::Array(f.nodes().iter().map(point_to_json).collect()),
    );
    let storeys = f
        .storeys()
        .iter()
        .map(|s| {
            json!({
                "level": s.level(),
                "anchor": point_to_json(s.anchor()),
                "payload_kind": s.payload().kind_name(),
                "coeffs": s.payload().matrices().iter().map(Matrix::to_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    obj.insert("storeys".into(), Value::Array(storeys));
    Value::Object(obj)
}

fn fraction_from_obj<S: Scalar>(obj: &Map<String, Value>) -> Result<ThieleFraction<S>> {
    let m = as_usize(field(obj, "m")?, "m")?;
    let kind = match as_str(field(obj, "arg_kind")?, "arg_kind")? {
        "scalar" => ArgKind::Scalar,
        "vector" => ArgKind::Vector(as_usize(field(obj, "dim")?, "dim")?),
        "grid" => ArgKind::Grid(as_usize(field(obj, "N")?, "N")?),
        other => return Err(Error::Invalid(format!("unknown arg_kind \"{other}\""))),
    };
    let side = match obj.get("side") {
        Some(s) => InverseSide::parse(as_str(s, "side")?)?,
        None => InverseSide::Left,
    };
    let base = Matrix::<S>::from_json(field(obj, "base")?)?;
    check_m(m, std::slice::from_ref(&base))?;
    let nodes = as_array(field(obj, "nodes")?, "nodes")?
        .iter()
        .map(|p| point_from_json(p, kind))
        .collect::<Result<Vec<_>>>()?;
    let storeys = as_array(field(obj, "storeys")?, "storeys")?
        .iter()
        .map(|s| {
            let s = as_object(s)?;
            let level = as_usize(field(s, "level")?, "level")?;
            let anchor = point_from_json(field(s, "anchor")?, kind)?;
            let coeffs = as_array(field(s, "coeffs")?, "coeffs")?
                .iter()
                .map(Matrix::from_json)
                .collect::<Result<Vec<_>>>()?;
            check_m(m, &coeffs)?;
            let payload = match as_str(field(s, "payload_kind")?, "payload_kind")? {
                "scalar" => {
                    let [b]: [Matrix<S>; 1] = coeffs.try_into().map_err(|_| {
                        Error::Invalid("scalar storeys carry exactly one matrix".into())
                    })?;
                    Payload::Scalar(b)
                }
                "vector" => Payload::Vector(coeffs),
                "grid" => Payload::Grid(coeffs),
                other => return Err(Error::Invalid(format!("unknown payload_kind \"{other}\""))),
            };
            Storey::new(level, anchor, payload)
        })
        .collect::<Result<Vec<_>>>()?;
    ThieleFraction::new(side, base, nodes, storeys)
}

/// A fraction under a backend chosen at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyFraction {
    Exact(ThieleFraction<GaussianRational>),
    Float(ThieleFraction<Complex64>),
}

impl AnyFraction {
    pub fn backend(&self) -> Backend {
        match self {
            AnyFraction::Exact(_) => Backend::Exact,
            AnyFraction::Float(_) => Backend::Float,
        }
    }

    pub fn arg_kind(&self) -> ArgKind {
        match self {
            AnyFraction::Exact(f) => f.arg_kind(),
            AnyFraction::Float(f) => f.arg_kind(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyFraction::Exact(f) => fraction_to_json(f),
            AnyFraction::Float(f) => fraction_to_json(f),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = as_object(v)?;
        let backend = match obj.get("backend") {
            Some(b) => Backend::parse(as_str(b, "backend")?)?,
            None => Backend::Float,
        };
        Ok(match backend {
            Backend::Exact => AnyFraction::Exact(fraction_from_obj(obj)?),
            Backend::Float => AnyFraction::Float(fraction_from_obj(obj)?),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("malformed JSON: {e}")))?;
        Self::from_json(&v)
    }
}

pub fn fraction_from_json<S: Scalar>(v: &Value) -> Result<ThieleFraction<S>> {
    let obj = as_object(v)?;
    if let Some(b) = obj.get("backend") {
        let b = Backend::parse(as_str(b, "backend")?)?;
        if b != S::BACKEND {
            return Err(Error::Invalid(format!(
                "fraction uses the {b} backend, expected {}",
                S::BACKEND
            )));
        }
    }
    fraction_from_obj(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_builder::build_scalar;

    #[test]
    fn example1_round_trip_is_bit_exact() {
        let input = parse_node_input(include_str!("../fixtures/example1.json"), InputOptions::default())
            .unwrap();
        let NodeInput::Scalar(ScalarNodes::Exact(data)) = input else {
            panic!("expected exact scalar nodes");
        };
        let f = build_scalar(&data).unwrap();
        let text = serde_json::to_string(&fraction_to_json(&f)).unwrap();
        let back = AnyFraction::parse(&text).unwrap();
        assert_eq!(back, AnyFraction::Exact(f));
        assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
    }

    #[test]
    fn float_round_trip_preserves_bits() {
        let input = parse_node_input(
            include_str!("../fixtures/example1.json"),
            InputOptions {
                backend: Some(Backend::Float),
                grid: None,
            },
        )
        .unwrap();
        let NodeInput::Scalar(ScalarNodes::Float(data)) = input else {
            panic!("expected float scalar nodes");
        };
        let f = build_scalar(&data).unwrap();
        let text = serde_json::to_string(&fraction_to_json(&f)).unwrap();
        assert_eq!(fraction_from_json::<Complex64>(&serde_json::from_str(&text).unwrap()).unwrap(), f);
    }

    #[test]
    fn example2_input_parses() {
        let input = parse_node_input(include_str!("../fixtures/example2.json"), InputOptions::default())
            .unwrap();
        let NodeInput::Vector(v) = input else {
            panic!("expected vector input");
        };
        assert_eq!(v.nodes[1], vec![std::f64::consts::FRAC_PI_2; 2]);
        assert_eq!(v.function.m(), 2);
    }

    #[test]
    fn grid_input_respects_override() {
        let input = parse_node_input(
            include_str!("../fixtures/continual.json"),
            InputOptions {
                backend: None,
                grid: Some(16),
            },
        )
        .unwrap();
        let NodeInput::Grid(g) = input else {
            panic!("expected grid input");
        };
        assert_eq!(g.knots.len(), 3);
        assert!(g.knots.iter().all(|k| k.len() == 16));
    }

    #[test]
    fn exact_backend_rejected_for_vector_input() {
        let err = parse_node_input(
            include_str!("../fixtures/example2.json"),
            InputOptions {
                backend: Some(Backend::Exact),
                grid: None,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
    }

    #[test]
    fn points_from_text() {
        assert_eq!(
            point_from_text::<GaussianRational>("1/3", ArgKind::Scalar).unwrap(),
            ArgPoint::Scalar(GaussianRational::from_ratio((1, 3), (0, 1)))
        );
        assert_eq!(
            point_from_text::<Complex64>("[1, 2]", ArgKind::Scalar).unwrap(),
            ArgPoint::Scalar(Complex64::new(1.0, 2.0))
        );
        assert_eq!(
            point_from_text::<Complex64>("pi, 1", ArgKind::Vector(2)).unwrap(),
            ArgPoint::Vector(vec![std::f64::consts::PI, 1.0])
        );
        assert!(point_from_text::<Complex64>("1", ArgKind::Vector(2)).is_err());
        assert_eq!(
            point_from_text::<GaussianRational>("1/2, -1/3", ArgKind::Scalar).unwrap(),
            ArgPoint::Scalar(GaussianRational::from_ratio((1, 2), (-1, 3)))
        );
        assert_eq!(
            point_from_text::<Complex64>("sqrt(4), pi", ArgKind::Scalar).unwrap(),
            ArgPoint::Scalar(Complex64::new(2.0, std::f64::consts::PI))
        );
        assert!(point_from_text::<Complex64>("1, 2, 3", ArgKind::Scalar).is_err());
    }
}
