//! Acceptance criteria 1 to 9, one PASS/FAIL line each. Runs without the
//! libtest harness so the lines are always printed and timings are not
//! disturbed by concurrent tests.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

use algapprox::approximator::screen_candidate;
use algapprox::metric::{
    delta, estimate_lojasiewicz, horn_member, horn_member_cloud, sample_points, MetricError,
    NoFilter, PointCloud, SamplerConfig, System, Target,
};
use algapprox::polycore::{parse, rat, CompiledPoly, Polynomial, Rational};
use algapprox_cli::{read_set, RunReport};
use common::*;
use num_traits::ToPrimitive;

const QUADRANT_S: f64 = 3.0;
const QUADRANT_MIN_ORDER: f64 = 3.25;
const QUADRANT_TIME: Duration = Duration::from_secs(60);
const MAX_EXPONENT: u32 = 99;
const HALF_LINE_S: f64 = 2.0;
const CALIBRATION_ORDER: f64 = 2.0;
const CALIBRATION_TOL: f64 = 0.15;
const CALIBRATION_TIME: Duration = Duration::from_secs(10);
const METRIC_TRIPLES: usize = 1000;
const METRIC_TOL: f64 = 1e-12;
const HORN_CASES: usize = 1000;
const LOJA_XX2: (f64, f64) = (0.5, 0.6);
const LOJA_X2X: (f64, f64) = (2.0, 2.3);
const GRADIENT_POLYS: usize = 100;
const GRADIENT_MAX_DEGREE: u32 = 8;
const GRADIENT_MAX_VARS: usize = 4;
const GRADIENT_REL_TOL: f64 = 1e-5;
/// Central differences are evaluated in exact arithmetic with step `1/FD_STEP_INV`.
const FD_STEP_INV: i64 = 1_000_000_000_000;
const ROUND_TRIP_POLYS: usize = 1000;
const SEED: u64 = 0xacce;

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn order(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        v => v.as_f64().expect("fitted order"),
    }
}

fn vars(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `(m, p)` from `(z^2 - x^m)^2 - y^p`.
fn nested_exponents(s: &str) -> Option<(u32, u32)> {
    let rest = s.strip_prefix("(z^2 - x^")?;
    let (m, p) = rest.split_once(")^2 - y^")?;
    Some((m.parse().ok()?, p.parse().ok()?))
}

fn approximate(dir: &Path, name: &str, job: &Value) -> Result<(i32, String, Duration), String> {
    let j = write(dir, &format!("{name}.json"), job);
    let out_path = dir.join(format!("{name}.report.json"));
    let t = Instant::now();
    let out = run(&["approximate", p(&j), "-o", p(&out_path), "--quiet"]);
    let elapsed = t.elapsed();
    let text = std::fs::read_to_string(&out_path)
        .map_err(|e| format!("no report (exit {}): {e}; {}", code(&out), stderr(&out)))?;
    Ok((code(&out), text, elapsed))
}

fn dimension_of(dir: &Path, name: &str, vs: &[&str], eqs: &[&str]) -> Result<usize, String> {
    let s = write(dir, name, &set(vs, &[(eqs, &[])]));
    let out = run(&["dimension", p(&s)]);
    stdout(&out)
        .trim()
        .parse()
        .map_err(|_| format!("dimension failed: {}", stderr(&out)))
}

fn verify(a: &Path, b: &Path, s: f64) -> (i32, Value) {
    let out = run(&["verify", p(a), p(b), "--s", &s.to_string(), "--quiet"]);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code(&out), v)
}

fn criterion_1(dir: &Path) -> Outcome {
    let (exit, text, elapsed) =
        approximate(dir, "quadrant", &job(QUADRANT.0, QUADRANT.1, QUADRANT_S))?;
    ensure(exit == 0, format!("exit code {exit}"))?;
    let report = RunReport::from_json(&text).map_err(|e| e.to_string())?;
    ensure(report.pieces.len() == 1, "expected one piece")?;
    let piece = &report.pieces[0];
    ensure(
        piece.equations.len() == 1,
        format!("{} equations", piece.equations.len()),
    )?;
    let (m, pp) = nested_exponents(&piece.structured)
        .ok_or_else(|| format!("shape mismatch: {}", piece.structured))?;
    ensure(
        m % 2 == 1 && pp % 2 == 1,
        format!("even exponent in {}", piece.structured),
    )?;
    ensure(m <= MAX_EXPONENT && pp <= MAX_EXPONENT, "exponent above 99")?;
    let v = vars(QUADRANT.0);
    let expanded = parse(&piece.equations[0], &v).map_err(|e| e.to_string())?;
    ensure(
        expanded == parse(&piece.structured, &v).map_err(|e| e.to_string())?,
        "expanded equation differs from the nested form",
    )?;
    let (ab, ba) = (
        piece.final_report.a_leq_b.fitted_order.as_f64(),
        piece.final_report.b_leq_a.fitted_order.as_f64(),
    );
    ensure(
        ab >= QUADRANT_MIN_ORDER && ba >= QUADRANT_MIN_ORDER,
        format!("orders {ab:.3} / {ba:.3}"),
    )?;
    ensure(
        piece.final_dimension.dimension == 2,
        "reported dimension is not 2",
    )?;
    let d = dimension_of(dir, "quadrant_out.json", QUADRANT.0, &[&piece.equations[0]])?;
    ensure(d == 2, format!("output dimension {d}"))?;
    ensure(elapsed <= QUADRANT_TIME, format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "{} ; orders {ab:.3} / {ba:.3} ; dimension {d} ; {elapsed:.1?}",
        piece.structured
    ))
}

fn criterion_2(dir: &Path) -> Outcome {
    let (exit, text, _) = approximate(
        dir,
        "half_line",
        &job(HALF_LINE.0, HALF_LINE.1, HALF_LINE_S),
    )?;
    ensure(exit == 0, format!("exit code {exit}"))?;
    let report = RunReport::from_json(&text).map_err(|e| e.to_string())?;
    let piece = &report.pieces[0];
    let v = vars(HALF_LINE.0);
    let got: Vec<Polynomial> = piece
        .equations
        .iter()
        .map(|e| parse(e, &v).unwrap())
        .collect();
    let want = vec![parse("x1^2 - x3^5", &v).unwrap(), parse("x2", &v).unwrap()];
    ensure(got == want, format!("equations {:?}", piece.equations))?;
    let m = piece.steps[0].chosen_m;
    ensure(m == 5, format!("chosen m = {m}"))?;
    ensure(
        piece.final_dimension.dimension == 1,
        "reported dimension is not 1",
    )?;
    let d = dimension_of(dir, "w.json", HALF_LINE.0, &["x1^2 - x3^5", "x2"])?;
    ensure(d == 1, format!("dimension of W is {d}"))?;
    let a = write(dir, "half_line_set.json", &set(HALF_LINE.0, HALF_LINE.1));
    let (exit, _) = verify(&a, &dir.join("w.json"), HALF_LINE_S);
    ensure(exit == 0, format!("verify against W exited {exit}"))?;
    Ok(format!(
        "equations {:?} ; m = {m} ; dimension 1 ; verify exit 0",
        piece.equations
    ))
}

fn criterion_3(dir: &Path) -> Outcome {
    let v = vars(HALF_LINE.0);
    let y = parse("(x1^2 + x2^2)^2 - x3^5", &v).unwrap();
    let screen = screen_candidate(std::slice::from_ref(&y), 1, &SamplerConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(
        screen.estimate.dimension == 2,
        format!("Y measured at {}", screen.estimate.dimension),
    )?;
    ensure(!screen.accepted, "Y accepted")?;
    let text = std::fs::read_to_string(dir.join("half_line.report.json"))
        .map_err(|_| "half-line report missing".to_string())?;
    let report = RunReport::from_json(&text).map_err(|e| e.to_string())?;
    let emitted = report
        .pieces
        .iter()
        .flat_map(|p| &p.equations)
        .chain(report.combined_equations.iter().flatten());
    for e in emitted {
        ensure(parse(e, &v).unwrap() != y, "pipeline emitted Y")?;
    }
    Ok("Y has dimension 2 and is rejected; not emitted".into())
}

fn criterion_4(dir: &Path) -> Outcome {
    let par = write(
        dir,
        "parabola.json",
        &set(&["x", "y"], &[(&["y - x^2"], &[])]),
    );
    let line = write(dir, "line.json", &set(&["x", "y"], &[(&["y"], &[])]));
    let t = Instant::now();
    let (pass_code, v) = verify(&par, &line, 1.5);
    let (fail_code, _) = verify(&par, &line, 2.5);
    let elapsed = t.elapsed();
    let ab = order(&v["result"]["a_leq_b"]["fitted_order"]);
    let ba = order(&v["result"]["b_leq_a"]["fitted_order"]);
    for o in [ab, ba] {
        ensure(
            (o - CALIBRATION_ORDER).abs() <= CALIBRATION_TOL,
            format!("fitted order {o:.4}"),
        )?;
    }
    ensure(pass_code == 0, format!("s = 1.5 exited {pass_code}"))?;
    ensure(fail_code == 2, format!("s = 2.5 exited {fail_code}"))?;
    ensure(elapsed <= CALIBRATION_TIME, format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "orders {ab:.4} / {ba:.4} ; exits 0 and 2 ; {elapsed:.1?}"
    ))
}

fn random_cloud(rng: &mut ChaCha8Rng) -> PointCloud {
    let n = rng.random_range(1..=30);
    let pts = (0..n)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointCloud::new(1.0, pts, "random")
}

fn hausdorff(a: &PointCloud, b: &PointCloud) -> f64 {
    delta(a, b).unwrap().max(delta(b, a).unwrap())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..METRIC_TRIPLES {
        let (a, b, c) = (
            random_cloud(&mut rng),
            random_cloud(&mut rng),
            random_cloud(&mut rng),
        );
        let (ab, ba, ac, bc) = (
            hausdorff(&a, &b),
            hausdorff(&b, &a),
            hausdorff(&a, &c),
            hausdorff(&b, &c),
        );
        ensure(
            (ab - ba).abs() <= METRIC_TOL,
            format!("asymmetry {}", (ab - ba).abs()),
        )?;
        ensure(hausdorff(&a, &a) <= METRIC_TOL, "D(A, A) > 0")?;
        ensure(
            ac <= ab + bc + METRIC_TOL,
            format!("triangle violated by {}", ac - ab - bc),
        )?;
        worst = worst.max(ac - ab - bc);
    }
    let v = vars(&["x", "y"]);
    let cusp = Target::new(
        2,
        vec![System::from_polys(
            2,
            &[parse("y^2 - x^3", &v).unwrap()],
            &[],
        )],
        "X",
    );
    let cfg = SamplerConfig {
        samples_per_radius: 200,
        ..SamplerConfig::default()
    };
    let mut violations = 0;
    for _ in 0..HORN_CASES {
        let x = loop {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 0.0 && r < 1.0 {
                break x;
            }
        };
        let sigma = rng.random_range(1.0..4.0);
        let sigma2 = sigma + rng.random_range(0.0..3.0);
        if horn_member(&x, &cusp, sigma2, &cfg) && !horn_member(&x, &cusp, sigma, &cfg) {
            violations += 1;
        }
        let cloud = random_cloud(&mut rng);
        let x3 = [x[0], x[1], 0.0];
        if horn_member_cloud(&x3, &cloud, sigma2) && !horn_member_cloud(&x3, &cloud, sigma) {
            violations += 1;
        }
    }
    ensure(
        violations == 0,
        format!("{violations} horn monotonicity violations"),
    )?;
    Ok(format!(
        "{METRIC_TRIPLES} triples, max triangle excess {worst:.2e} ; {HORN_CASES} horn cases, 0 violations"
    ))
}

fn criterion_6(dir: &Path) -> Outcome {
    let axis: (&[&str], &[&str]) = (&["x2", "x3"], &[]);
    let w: (&[&str], &[&str]) = (&["x1^2 - x3^5", "x2"], &[]);
    let half = HALF_LINE.1[0];
    let a = write(dir, "union_a.json", &set(HALF_LINE.0, &[half, axis]));
    let b = write(dir, "union_b.json", &set(HALF_LINE.0, &[w, axis]));
    let half_path = write(dir, "u_half.json", &set(HALF_LINE.0, &[half]));
    let w_path = write(dir, "u_w.json", &set(HALF_LINE.0, &[w]));
    let axis_path = write(dir, "u_axis.json", &set(HALF_LINE.0, &[axis]));
    ensure(
        verify(&half_path, &w_path, HALF_LINE_S).0 == 0,
        "half-line vs W failed",
    )?;
    ensure(
        verify(&axis_path, &axis_path, HALF_LINE_S).0 == 0,
        "x-axis vs itself failed",
    )?;
    let (exit, _) = verify(&a, &b, HALF_LINE_S);
    ensure(exit == 0, format!("union verify exited {exit}"))?;
    let (exit, text, _) = approximate(dir, "union", &job(HALF_LINE.0, &[half, axis], HALF_LINE_S))?;
    ensure(exit == 0, format!("union approximate exited {exit}"))?;
    let report = RunReport::from_json(&text).map_err(|e| e.to_string())?;
    let v = vars(HALF_LINE.0);
    let combined: Vec<CompiledPoly> = report
        .combined_equations
        .as_ref()
        .ok_or("no combined equations")?
        .iter()
        .map(|e| CompiledPoly::new(&parse(e, &v).unwrap()))
        .collect();
    let cfg = SamplerConfig::default();
    let target = read_set(&b).map_err(|e| e.to_string())?.target("union");
    let mut worst = 0.0f64;
    let mut count = 0;
    for &r in &cfg.radii {
        for x in sample_points(&target, r, &cfg, &NoFilter).points {
            count += 1;
            for f in &combined {
                worst = worst.max(f.value(&x).abs());
            }
        }
    }
    ensure(count > 0, "no samples of the union")?;
    ensure(
        worst <= cfg.on_set_tol,
        format!("combined equation reaches {worst:e}"),
    )?;
    Ok(format!(
        "union verify exit 0 ; {} product equations, max |value| {worst:.1e} on {count} samples",
        combined.len()
    ))
}

fn criterion_7() -> Outcome {
    let v = vars(&["x"]);
    let half_interval = parse("1/4 - x^2", &v).unwrap();
    let domain = Target::new(
        1,
        vec![System::from_polys(1, &[], &[half_interval])],
        "[-1/2, 1/2]",
    );
    let cfg = SamplerConfig::default();
    let est = |f: &str, g: &str| {
        estimate_lojasiewicz(
            &[parse(f, &v).unwrap()],
            &[parse(g, &v).unwrap()],
            &domain,
            &cfg,
        )
    };
    let a1 = est("x", "x^2").map_err(|e| e.to_string())?.alpha_hat;
    ensure(
        (LOJA_XX2.0..=LOJA_XX2.1).contains(&a1),
        format!("(x, x^2) gave {a1}"),
    )?;
    let a2 = est("x^2", "x").map_err(|e| e.to_string())?.alpha_hat;
    ensure(
        (LOJA_X2X.0..=LOJA_X2X.1).contains(&a2),
        format!("(x^2, x) gave {a2}"),
    )?;
    ensure(
        matches!(est("x", "1/2"), Err(MetricError::HypothesisViolated { .. })),
        "(x, 1/2) did not violate the hypothesis",
    )?;
    Ok(format!(
        "alpha {a1:.4} and {a2:.4} ; constant g violates the hypothesis"
    ))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> Polynomial {
    let v: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
    let terms = (0..rng.random_range(1..=8)).map(|_| {
        let total = rng.random_range(0..=max_degree);
        let mut e = vec![0u32; n];
        for _ in 0..total {
            e[rng.random_range(0..n)] += 1;
        }
        (e, rat(rng.random_range(-50..=50), rng.random_range(1..=12)))
    });
    Polynomial::from_terms(&v, terms).unwrap()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut tested = 0;
    while tested < GRADIENT_POLYS {
        let n = rng.random_range(1..=GRADIENT_MAX_VARS);
        let poly = random_poly(&mut rng, n, GRADIENT_MAX_DEGREE);
        if poly.degree() == 0 {
            continue;
        }
        let c = CompiledPoly::new(&poly);
        let x: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-1.0..1.0) / (n as f64).sqrt())
            .collect();
        let mut grad = vec![0.0; n];
        c.value_grad(&x, &mut grad);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let exact: Vec<Rational> = x
            .iter()
            .map(|&v| Rational::from_float(v).unwrap())
            .collect();
        let h = rat(1, FD_STEP_INV);
        let mut err = 0.0;
        for k in 0..n {
            let (mut up, mut down) = (exact.clone(), exact.clone());
            up[k] += &h;
            down[k] -= &h;
            let diff = poly.eval_exact(&up).unwrap() - poly.eval_exact(&down).unwrap();
            let fd = (diff / (&h * rat(2, 1))).to_f64().unwrap();
            err += (fd - grad[k]) * (fd - grad[k]);
        }
        let rel = err.sqrt() / norm;
        ensure(
            rel < GRADIENT_REL_TOL,
            format!("relative error {rel:e} for {poly}"),
        )?;
        worst = worst.max(rel);
        tested += 1;
    }
    for _ in 0..ROUND_TRIP_POLYS {
        let n = rng.random_range(1..=GRADIENT_MAX_VARS);
        let poly = random_poly(&mut rng, n, GRADIENT_MAX_DEGREE);
        let back = parse(&poly.to_string(), poly.vars()).map_err(|e| e.to_string())?;
        ensure(
            back == poly,
            format!("round trip changed {poly} into {back}"),
        )?;
    }
    Ok(format!(
        "max relative gradient error {worst:.2e} over {GRADIENT_POLYS} polynomials ; {ROUND_TRIP_POLYS} exact round trips"
    ))
}

fn criterion_9(dir: &Path) -> Outcome {
    let first = std::fs::read(dir.join("quadrant.report.json"))
        .map_err(|_| "criterion 1 report missing".to_string())?;
    let (_, second, _) = approximate(
        dir,
        "quadrant_again",
        &job(QUADRANT.0, QUADRANT.1, QUADRANT_S),
    )?;
    ensure(first == second.as_bytes(), "reports differ")?;
    Ok(format!("{} identical bytes", first.len()))
}

fn main() {
    let dir = TempDir::new().expect("temporary directory");
    let d = dir.path();
    let criteria: Vec<Check> = vec![
        ("quadrant pipeline", Box::new(|| criterion_1(d))),
        ("half-line regression", Box::new(|| criterion_2(d))),
        ("negative dimension control", Box::new(|| criterion_3(d))),
        ("contact-order calibration", Box::new(|| criterion_4(d))),
        ("metric properties", Box::new(criterion_5)),
        ("unions", Box::new(|| criterion_6(d))),
        ("Łojasiewicz calibration", Box::new(criterion_7)),
        ("numerics hygiene", Box::new(criterion_8)),
        ("determinism", Box::new(|| criterion_9(d))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
