//! Bundled examples, run end to end against their documented tolerances.

use std::time::Instant;

use thiele_core::algebra::{Complex64, GaussianRational, Matrix};
use thiele_core::fixtures::{self, CONTINUAL_XIS};
use thiele_core::fraction::Payload;
use thiele_core::functional;
use thiele_core::scalar_builder::{build_scalar, classic_thiele_oracle, NodeData};
use thiele_core::{ArgPoint, Scalar};

use crate::commands::{quad_config, CliResult};
use crate::report::{Check, RunReport};
use crate::{exit, DemoArgs, DemoName};

fn check(report: &mut RunReport, name: &str, passed: bool, detail: String) {
    report.checks.push(Check {
        name: name.to_owned(),
        passed,
        detail,
    });
}

fn rel_err(got: &Matrix<Complex64>, want: &Matrix<Complex64>) -> f64 {
    got.sub(want).map_or(f64::INFINITY, |d| d.norm() / want.norm())
}

fn example1(report: &mut RunReport) -> CliResult<()> {
    report.add_input("example1.json", fixtures::EXAMPLE1_JSON.as_bytes());
    report.backend = Some("exact".into());
    report.arg_kind = Some("scalar".into());
    let data = fixtures::example1_exact();
    let f = build_scalar(&data)?;
    report.residuals = f.verify_nodal(data.values())?;
    let worst = report.max_residual().unwrap_or(0.0);
    check(report, "nodal residuals", worst == 0.0, format!("max {worst}"));

    // Probes (k + 2i)/7 for k in -10..10, none a root of z² − 6z − 3.
    let mut mismatches = 0;
    let mut worst_rel = 0.0_f64;
    for k in -10..10 {
        let z = GaussianRational::from_ratio((k, 7), (2, 7));
        let want = fixtures::example1_closed_form(&z).expect("probe off the poles");
        let got = f.evaluate(&ArgPoint::Scalar(z))?;
        if got != want {
            mismatches += 1;
        }
        let to_float = |m: &Matrix<GaussianRational>| m.map_backend(|x| Ok(x.to_complex()));
        worst_rel = worst_rel.max(rel_err(&to_float(&got)?, &to_float(&want)?));
    }
    check(
        report,
        "closed form",
        mismatches == 0 && worst_rel <= 1e-12,
        format!("20 probes, {mismatches} exact mismatches, max rel err {worst_rel}"),
    );
    Ok(())
}

fn example2(args: &DemoArgs, report: &mut RunReport) -> CliResult<()> {
    report.add_input("example2.json", fixtures::EXAMPLE2_JSON.as_bytes());
    report.backend = Some("float".into());
    report.arg_kind = Some("vector".into());
    let f = fixtures::example2_function();
    let nodes = fixtures::example2_nodes();
    let frac = functional::build_functional(&f, &nodes, &quad_config(&args.numeric)?)?;
    let values = functional::node_values(&f, &nodes)?;
    report.residuals = frac.verify_nodal(&values)?;
    let worst = report.max_residual().unwrap_or(0.0);
    check(report, "nodal residuals", worst <= 1e-6, format!("max {worst}, tolerance 1e-6"));

    let probes = fixtures::example2_probes(100, 1e-2);
    let mut worst_rel = 0.0_f64;
    for &(x, y) in &probes {
        let want = fixtures::example2_closed_form(x, y).expect("probe off Δ_2 = 0");
        let got = frac.evaluate(&ArgPoint::Vector(vec![x, y]))?;
        worst_rel = worst_rel.max(rel_err(&got, &want));
    }
    check(
        report,
        "closed form",
        worst_rel <= 1e-3,
        format!("{} probes, max rel err {worst_rel}, tolerance 1e-3", probes.len()),
    );

    let (cx, cy) = fixtures::example2_l1();
    if let Payload::Vector(c) = frac.storeys()[0].payload() {
        let err = c[0].sub(&cx)?.max_abs().max(c[1].sub(&cy)?.max_abs());
        check(report, "storey 1 coefficients", err <= 1e-8, format!("max error {err}, tolerance 1e-8"));
    }
    Ok(())
}

fn continual(args: &DemoArgs, report: &mut RunReport) -> CliResult<()> {
    report.add_input("continual.json", fixtures::CONTINUAL_JSON.as_bytes());
    report.backend = Some("float".into());
    let n = args.numeric.grid.unwrap_or(100);
    let fd = args.numeric.fd_step;
    let coarse = fixtures::continual_run(n, fd)?;
    let fine = fixtures::continual_run(2 * n, fd / 2.0)?;
    let finest = fixtures::continual_run(4 * n, fd / 4.0)?;
    report.arg_kind = Some(format!("grid({})", finest.n));
    report.residuals = finest.nodal.clone();
    report.continual = CONTINUAL_XIS.iter().copied().zip(finest.continual.clone()).collect();
    for (i, xi) in CONTINUAL_XIS.iter().enumerate() {
        let (a, b) = (coarse.continual[i].value, fine.continual[i].value);
        let factor = b / a;
        check(
            report,
            &format!("refinement at xi {xi}"),
            factor <= 0.6,
            format!("N {n}: {a}, N {}: {b}, factor {factor}, bound 0.6", 2 * n),
        );
    }
    let bound = 1e-3 * finest.scale;
    let worst = finest.max_continual();
    check(
        report,
        "continual residual",
        worst <= bound,
        format!("N {}: max {worst}, bound {bound}", finest.n),
    );
    Ok(())
}

fn scalar_reduction(report: &mut RunReport) -> CliResult<()> {
    report.backend = Some("float".into());
    report.arg_kind = Some("scalar".into());
    // exp sampled at six points, compared against the reciprocal-difference interpolant
    let xs: Vec<f64> = (0..6).map(|k| 0.4 * k as f64).collect();
    let c = |x: f64| Complex64::new(x, 0.0);
    let data = NodeData::new(
        xs.iter().map(|&x| c(x)).collect(),
        xs.iter().map(|&x| Matrix::diag(vec![c(x.exp())])).collect(),
    )?;
    let f = build_scalar(&data)?;
    report.residuals = f.verify_nodal(data.values())?;
    let points: Vec<(Complex64, Complex64)> = xs.iter().map(|&x| (c(x), c(x.exp()))).collect();
    let mut worst = 0.0_f64;
    let probes = 50;
    for k in 0..probes {
        let z = Complex64::new(-0.5 + 0.06 * k as f64, 0.3 * ((k % 5) as f64 - 2.0));
        let a = *f.evaluate(&ArgPoint::Scalar(z))?.get(0, 0);
        let b = classic_thiele_oracle(&points, &z)?;
        worst = worst.max((a - b).norm() / b.norm());
    }
    check(
        report,
        "classic Thiele agreement",
        worst <= 1e-9,
        format!("{probes} probes, max rel err {worst}, tolerance 1e-9"),
    );

    let exact_pts = [(0, 1), (1, 2), (2, 5)];
    let q = |n: i64| GaussianRational::from_ints(n, 0);
    let qdata = NodeData::new(
        exact_pts.iter().map(|&(x, _)| q(x)).collect(),
        exact_pts.iter().map(|&(_, v)| Matrix::diag(vec![q(v)])).collect(),
    )?;
    let qf = build_scalar(&qdata)?;
    let qpoints: Vec<_> = exact_pts.iter().map(|&(x, v)| (q(x), q(v))).collect();
    let mut equal = true;
    for x in [-2, 4, 7, 10] {
        let a = qf.evaluate(&ArgPoint::Scalar(q(x)))?;
        equal &= *a.get(0, 0) == classic_thiele_oracle(&qpoints, &q(x))?;
    }
    check(
        report,
        "exact (0,1),(1,2),(2,5)",
        equal,
        "builder and oracle identical at 4 probes".into(),
    );
    Ok(())
}

pub fn run(args: &DemoArgs) -> CliResult<u8> {
    let start = Instant::now();
    let mut report = RunReport::new(match args.name {
        DemoName::Example1 => "demo example1",
        DemoName::Example2 => "demo example2",
        DemoName::Continual => "demo continual",
        DemoName::ScalarReduction => "demo scalar-reduction",
    });
    match args.name {
        DemoName::Example1 => example1(&mut report)?,
        DemoName::Example2 => example2(args, &mut report)?,
        DemoName::Continual => continual(args, &mut report)?,
        DemoName::ScalarReduction => scalar_reduction(&mut report)?,
    }
    report.elapsed = start.elapsed();
    print!("{}", report.render(args.report));
    Ok(if report.passed() { exit::OK } else { exit::CHECK_FAILED })
}
