use std::time::Instant;

use algapprox::approximator::{run, screen_candidate, ApproxConfig, ApproxError};
use algapprox::polycore::parse;
use algapprox::presentation::{load, PieceDocument, SetDocument};

fn set(vars: &[&str], eqs: &[&str], ineqs: &[&str], d: Option<usize>) -> SetDocument {
    SetDocument {
        variables: vars.iter().map(|s| s.to_string()).collect(),
        pieces: vec![PieceDocument {
            equations: eqs.iter().map(|s| s.to_string()).collect(),
            inequalities: ineqs.iter().map(|s| s.to_string()).collect(),
            declared_dimension: d,
        }],
        declared_dimension: None,
    }
}

#[test]
fn half_line_gets_exponent_five() {
    let t = Instant::now();
    let s = load(&set(&["x1", "x2", "x3"], &["x1", "x2"], &["x3"], None)).unwrap();
    let out = run(&s, 2.0, &ApproxConfig::default()).unwrap();
    let r = &out.pieces[0];
    eprintln!(
        "{:?} {:?} {:.1}s",
        r.steps[0].tried_ms,
        r.steps[0].failures,
        t.elapsed().as_secs_f64()
    );
    assert_eq!(r.steps[0].chosen_m, 5);
    let v = &s.variables;
    assert_eq!(
        r.equations,
        [parse("x1^2 - x3^5", v).unwrap(), parse("x2", v).unwrap()]
    );
    assert_eq!(r.final_dimension.dimension, 1);
    assert!(r.verified(), "{:?}", r.final_report);
}

#[test]
fn quadrant_gets_the_nested_shape() {
    let t = Instant::now();
    let s = load(&set(&["x", "y", "z"], &["z"], &["x", "y"], None)).unwrap();
    let out = run(&s, 3.0, &ApproxConfig::default()).unwrap();
    let r = &out.pieces[0];
    for st in &r.steps {
        eprintln!(
            "step {}: hint {:?} tried {:?} -> {} {:?}",
            st.index, st.hint_alpha, st.tried_ms, st.chosen_m, st.failures
        );
    }
    eprintln!("{} in {:.1}s", r.structured, t.elapsed().as_secs_f64());
    eprintln!("{:?}", r.final_report);
    assert_eq!(r.equations.len(), 1);
    assert_eq!(r.final_dimension.dimension, 2);
    assert!(r.verified());
}

#[test]
fn exponent_cap_below_the_threshold_exhausts_the_search() {
    let s = load(&set(&["x1", "x2", "x3"], &["x1", "x2"], &["x3"], None)).unwrap();
    let cfg = ApproxConfig {
        max_exponent: 3,
        ..ApproxConfig::default()
    };
    match run(&s, 2.0, &cfg) {
        Err(ApproxError::ExponentSearchExhausted { step: 1, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn sets_without_equations_are_open() {
    let s = load(&set(&["x"], &[], &["x"], None)).unwrap();
    assert_eq!(
        run(&s, 2.0, &ApproxConfig::default()),
        Err(ApproxError::CodimensionZero { piece: 0 })
    );
}

#[test]
fn algebraic_pieces_are_returned_unchanged() {
    let s = load(&set(&["x", "y"], &["y - x^2"], &[], None)).unwrap();
    let out = run(&s, 2.0, &ApproxConfig::default()).unwrap();
    let r = &out.pieces[0];
    assert!(r.steps.is_empty());
    assert_eq!(r.equations, s.pieces[0].equations);
    assert!(r.verified());
}

#[test]
fn redundant_equations_are_projected_with_a_ball_inequality() {
    let s = load(&set(
        &["x1", "x2", "x3"],
        &["x1", "x2", "x1 + x2"],
        &[],
        Some(1),
    ))
    .unwrap();
    let out = run(&s, 2.0, &ApproxConfig::default()).unwrap();
    let r = &out.pieces[0];
    let proj = r.projection.as_ref().unwrap();
    assert_eq!(proj.matrix.len(), 2);
    assert!(proj.ball_exponent >= 1);
    assert_eq!(r.equations.len(), 2);
    assert!(r.verified(), "{:?}", r.final_report);
}

#[test]
fn the_bad_candidate_has_dimension_two() {
    let v: Vec<String> = ["x1", "x2", "x3"].iter().map(|s| s.to_string()).collect();
    let y = parse("(x1^2 + x2^2)^2 - x3^5", &v).unwrap();
    let r = screen_candidate(&[y], 1, &Default::default()).unwrap();
    assert_eq!(r.estimate.dimension, 2);
    assert!(!r.accepted);
}
