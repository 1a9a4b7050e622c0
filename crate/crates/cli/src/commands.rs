use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use thiele_core::continual::{self, OperatorFunction};
use thiele_core::fixtures::CONTINUAL_XIS;
use thiele_core::functional::{self, QuadConfig};
use thiele_core::io::{self, AnyFraction, InputOptions, NodeInput, ScalarNodes};
use thiele_core::scalar_builder::build_scalar;
use thiele_core::{ArgKind, ArgPoint, Complex64, Error, Matrix, Residual, Scalar, ThieleFraction};

use crate::report::{Check, ReportFormat, RunReport};
use crate::{exit, BuildArgs, EvalArgs, NumericArgs, VerifyArgs};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_breakdown() {
        return exit::BREAKDOWN;
    }
    match e {
        Error::QuadratureFailure { .. } | Error::Domain { .. } | Error::Entry { .. } => {
            exit::BREAKDOWN
        }
        _ => exit::VALIDATION,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::new(exit_code(&e), e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::IO, format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::new(exit::IO, format!("cannot write {}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn quad_config(n: &NumericArgs) -> CliResult<QuadConfig> {
    let q = QuadConfig {
        order: n.quad_order,
        fd_step: n.fd_step,
    };
    q.validate()?;
    Ok(q)
}

/// Residual above which a float build gets a warning, relative to the data scale.
const WARN_REL: f64 = 1e-9;

fn scale_of<S: Scalar>(values: &[Matrix<S>]) -> f64 {
    values.iter().map(Matrix::norm).fold(1.0, f64::max)
}

fn residual_warnings(report: &mut RunReport, scale: f64) {
    for (i, r) in report.residuals.iter().enumerate() {
        if r.error.is_none() && r.value > WARN_REL * scale {
            report.warnings.push(format!(
                "node {i}: residual {} exceeds {WARN_REL}·scale; a level may be near-singular",
                r.value
            ));
        }
    }
}

struct Built {
    fraction: AnyFraction,
    residuals: Vec<Residual>,
    continual: Vec<(f64, Residual)>,
    scale: f64,
}

fn build_from_input(input: NodeInput, numeric: &NumericArgs) -> CliResult<Built> {
    Ok(match input {
        NodeInput::Scalar(ScalarNodes::Exact(data)) => {
            let f = build_scalar(&data)?;
            Built {
                residuals: f.verify_nodal(data.values())?,
                scale: scale_of(data.values()),
                fraction: AnyFraction::Exact(f),
                continual: Vec::new(),
            }
        }
        NodeInput::Scalar(ScalarNodes::Float(data)) => {
            let f = build_scalar(&data)?;
            Built {
                residuals: f.verify_nodal(data.values())?,
                scale: scale_of(data.values()),
                fraction: AnyFraction::Float(f),
                continual: Vec::new(),
            }
        }
        NodeInput::Vector(v) => {
            let func = v.function.to_matrix_function();
            let f = functional::build_functional(&func, &v.nodes, &quad_config(numeric)?)?;
            let values = functional::node_values(&func, &v.nodes)?;
            Built {
                residuals: f.verify_nodal(&values)?,
                scale: scale_of(&values),
                fraction: AnyFraction::Float(f),
                continual: Vec::new(),
            }
        }
        NodeInput::Grid(g) => {
            quad_config(numeric)?;
            let op = g.operator.operator();
            let f = continual::build_abstract(&op, &g.knots, numeric.fd_step)?;
            let values = g.knots.iter().map(|k| op.eval(k)).collect::<Result<Vec<_>, _>>()?;
            let cont = continual::check_continual(&f, &op, &CONTINUAL_XIS)?;
            Built {
                residuals: f.verify_nodal(&values)?,
                scale: scale_of(&values),
                fraction: AnyFraction::Float(f),
                continual: CONTINUAL_XIS.iter().copied().zip(cont).collect(),
            }
        }
    })
}

fn input_options(numeric: &NumericArgs) -> InputOptions {
    InputOptions {
        backend: numeric.backend.map(Into::into),
        grid: numeric.grid,
    }
}

pub fn build(args: &BuildArgs) -> CliResult<u8> {
    let start = Instant::now();
    let text = read_file(&args.input)?;
    let mut report = RunReport::new("build");
    report.add_input(&args.input.display().to_string(), text.as_bytes());
    let input = io::parse_node_input(&text, input_options(&args.numeric))?;
    report.backend = Some(input.backend().to_string());
    report.arg_kind = Some(input.arg_kind().to_owned());
    let built = build_from_input(input, &args.numeric)?;
    report.residuals = built.residuals;
    report.continual = built.continual;
    if built.fraction.backend() == thiele_core::Backend::Float {
        residual_warnings(&mut report, built.scale);
    }
    let mut fraction_text =
        serde_json::to_string_pretty(&built.fraction.to_json()).expect("fraction serializes");
    fraction_text.push('\n');
    report.elapsed = start.elapsed();
    let rendered = report.render(args.report);
    match &args.output {
        Some(path) => {
            write_file(path, &fraction_text)?;
            print!("{rendered}");
        }
        None => {
            print!("{fraction_text}");
            eprint!("{rendered}");
        }
    }
    Ok(exit::OK)
}

fn parse_points<S: Scalar>(args: &EvalArgs, kind: ArgKind) -> CliResult<Vec<(Value, ArgPoint<S>)>> {
    let mut points = Vec::new();
    for text in &args.at {
        let p = io::point_from_text::<S>(text, kind)?;
        points.push((io::point_to_json(&p), p));
    }
    if let Some(path) = &args.points {
        let text = read_file(path)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| {
            CliError::new(exit::VALIDATION, format!("malformed JSON in {}: {e}", path.display()))
        })?;
        let list = v.as_array().ok_or_else(|| {
            CliError::new(exit::VALIDATION, format!("{} must hold a JSON array of points", path.display()))
        })?;
        for item in list {
            let p = io::point_from_json::<S>(item, kind)?;
            points.push((io::point_to_json(&p), p));
        }
    }
    Ok(points)
}

/// Evaluates every point, fanning out over threads; results keep the input order.
fn evaluate_all<S: Scalar>(
    f: &ThieleFraction<S>,
    points: &[(Value, ArgPoint<S>)],
) -> Vec<thiele_core::Result<Matrix<S>>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    if points.len() < 2 * workers {
        return points.iter().map(|(_, p)| f.evaluate(p)).collect();
    }
    let chunk = points.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|(_, p)| f.evaluate(p)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("evaluation worker panicked"))
            .collect()
    })
}

fn eval_typed<S: Scalar>(f: &ThieleFraction<S>, args: &EvalArgs) -> CliResult<u8> {
    let points = parse_points::<S>(args, f.arg_kind())?;
    let results = evaluate_all(f, &points);
    let failed = results.iter().filter(|r| r.is_err()).count();
    let text = match args.report {
        ReportFormat::Json => {
            let items: Vec<Value> = points
                .iter()
                .zip(&results)
                .map(|((p, _), r)| match r {
                    Ok(m) => json!({ "point": p, "value": m.to_json() }),
                    Err(e) => json!({ "point": p, "error": e.to_string() }),
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&Value::Array(items)).expect("serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => points
            .iter()
            .zip(&results)
            .map(|((p, _), r)| match r {
                Ok(m) => format!("{p} -> {m}\n"),
                Err(e) => format!("{p} -> error: {e}\n"),
            })
            .collect(),
    };
    emit(args.output.as_deref(), &text)?;
    if failed > 0 {
        eprintln!("{failed} of {} points failed to evaluate", points.len());
        Ok(exit::BREAKDOWN)
    } else {
        Ok(exit::OK)
    }
}

pub fn eval(args: &EvalArgs) -> CliResult<u8> {
    let fraction = AnyFraction::parse(&read_file(&args.input)?)?;
    match &fraction {
        AnyFraction::Exact(f) => eval_typed(f, args),
        AnyFraction::Float(f) => eval_typed(f, args),
    }
}

fn check_nodes<S: Scalar>(f: &ThieleFraction<S>, nodes: &[ArgPoint<S>]) -> CliResult<()> {
    if f.nodes() != nodes {
        return Err(CliError::new(
            exit::VALIDATION,
            "the data file's nodes differ from the fraction's nodes",
        ));
    }
    Ok(())
}

fn verify_float(
    f: &ThieleFraction<Complex64>,
    input: NodeInput,
    report: &mut RunReport,
) -> CliResult<()> {
    let values = match input {
        NodeInput::Scalar(ScalarNodes::Float(data)) => {
            let nodes: Vec<_> = data.nodes().iter().cloned().map(ArgPoint::Scalar).collect();
            check_nodes(f, &nodes)?;
            data.values().to_vec()
        }
        NodeInput::Vector(v) => {
            let nodes: Vec<_> = v.nodes.iter().cloned().map(ArgPoint::Vector).collect();
            check_nodes(f, &nodes)?;
            functional::node_values(&v.function.to_matrix_function(), &v.nodes)?
        }
        NodeInput::Grid(g) => {
            let nodes: Vec<_> = g.knots.iter().cloned().map(ArgPoint::Grid).collect();
            check_nodes(f, &nodes)?;
            let op = g.operator.operator();
            let cont = continual::check_continual(f, &op, &CONTINUAL_XIS)?;
            report.continual = CONTINUAL_XIS.iter().copied().zip(cont).collect();
            g.knots.iter().map(|k| op.eval(k)).collect::<Result<Vec<_>, _>>()?
        }
        NodeInput::Scalar(ScalarNodes::Exact(_)) => unreachable!("backend forced to float"),
    };
    report.residuals = f.verify_nodal(&values)?;
    residual_warnings(report, scale_of(&values));
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> CliResult<u8> {
    let start = Instant::now();
    let frac_text = read_file(&args.input)?;
    let data_text = read_file(&args.data)?;
    let mut report = RunReport::new("verify");
    report.add_input(&args.input.display().to_string(), frac_text.as_bytes());
    report.add_input(&args.data.display().to_string(), data_text.as_bytes());
    let fraction = AnyFraction::parse(&frac_text)?;
    let grid = match fraction.arg_kind() {
        ArgKind::Grid(n) => Some(n),
        _ => None,
    };
    let opts = InputOptions {
        backend: Some(fraction.backend()),
        grid,
    };
    let input = io::parse_node_input(&data_text, opts)?;
    report.backend = Some(fraction.backend().to_string());
    report.arg_kind = Some(input.arg_kind().to_owned());
    match (&fraction, input) {
        (AnyFraction::Exact(f), NodeInput::Scalar(ScalarNodes::Exact(data))) => {
            let nodes: Vec<_> = data.nodes().iter().cloned().map(ArgPoint::Scalar).collect();
            check_nodes(f, &nodes)?;
            report.residuals = f.verify_nodal(data.values())?;
        }
        (AnyFraction::Float(f), input) => verify_float(f, input, &mut report)?,
        (AnyFraction::Exact(_), _) => {
            return Err(CliError::new(exit::VALIDATION, "exact fractions need scalar node data"))
        }
    }
    if let Some(tol) = args.tol {
        let worst = report.max_residual().unwrap_or(0.0);
        report.checks.push(Check {
            name: "nodal residuals".into(),
            passed: worst <= tol,
            detail: format!("max {worst}, tolerance {tol}"),
        });
    }
    report.elapsed = start.elapsed();
    print!("{}", report.render(args.report));
    Ok(if report.passed() { exit::OK } else { exit::CHECK_FAILED })
}
