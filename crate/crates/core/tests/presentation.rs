use algapprox::metric::SamplerConfig;
use algapprox::polycore::{rat, Polynomial, Rational};
use algapprox::presentation::{
    estimate_local_dimension, load, PieceDocument, Presentation, SetDescription, SetDocument,
};

fn set(vars: &[&str], eqs: &[&str], ineqs: &[&str]) -> SetDescription {
    load(&SetDocument {
        variables: vars.iter().map(|s| s.to_string()).collect(),
        pieces: vec![PieceDocument {
            equations: eqs.iter().map(|s| s.to_string()).collect(),
            inequalities: ineqs.iter().map(|s| s.to_string()).collect(),
            declared_dimension: None,
        }],
        declared_dimension: None,
    })
    .unwrap()
}

fn dim(s: &SetDescription) -> usize {
    estimate_local_dimension(s, &SamplerConfig::default())
        .unwrap()
        .dimension
}

#[test]
fn dimension_examples() {
    assert_eq!(dim(&set(&["x", "y"], &["y"], &[])), 1);
    assert_eq!(dim(&set(&["x", "y", "z"], &["z"], &["x", "y"])), 2);
    assert_eq!(
        dim(&set(&["x1", "x2", "x3"], &["(x1^2 + x2^2)^2 - x3^5"], &[])),
        2
    );
    assert_eq!(dim(&set(&["x1", "x2", "x3"], &["x1", "x2"], &["x3"])), 1);
}

#[test]
fn isolated_origin_has_dimension_zero() {
    let e = estimate_local_dimension(
        &set(&["x", "y"], &["x^2 + y^2"], &[]),
        &SamplerConfig::default(),
    )
    .unwrap();
    assert!(e.empty_near_origin);
    assert_eq!(e.dimension, 0);
}

fn transform(s: &SetDescription, m: &[Vec<Rational>]) -> SetDescription {
    let map = |ps: &[Polynomial]| -> Vec<Polynomial> {
        ps.iter()
            .map(|p| p.linear_substitution(m).unwrap())
            .collect()
    };
    let pieces = s
        .pieces
        .iter()
        .map(|p| {
            Presentation::new(
                p.variables.clone(),
                map(&p.equations),
                map(&p.inequalities),
                p.declared_dimension,
            )
            .unwrap()
        })
        .collect();
    SetDescription::new(pieces).unwrap()
}

#[test]
fn dimension_is_invariant_under_permutation_and_rotation() {
    let v = ["x", "y", "z"];
    let examples = [
        set(&v, &["y", "z"], &[]),
        set(&v, &["z"], &["x", "y"]),
        set(&v, &["(x^2 + y^2)^2 - z^5"], &[]),
    ];
    let perm = vec![
        vec![rat(0, 1), rat(1, 1), rat(0, 1)],
        vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        vec![rat(1, 1), rat(0, 1), rat(0, 1)],
    ];
    // Rational rotation from the Pythagorean triple (3, 4, 5).
    let rot = vec![
        vec![rat(3, 5), rat(-4, 5), rat(0, 1)],
        vec![rat(4, 5), rat(3, 5), rat(0, 1)],
        vec![rat(0, 1), rat(0, 1), rat(1, 1)],
    ];
    let rot2 = vec![
        vec![rat(1, 1), rat(0, 1), rat(0, 1)],
        vec![rat(0, 1), rat(5, 13), rat(-12, 13)],
        vec![rat(0, 1), rat(12, 13), rat(5, 13)],
    ];
    for s in &examples {
        let d = dim(s);
        assert_eq!(dim(&transform(s, &perm)), d);
        assert_eq!(dim(&transform(s, &rot)), d);
        assert_eq!(dim(&transform(&transform(s, &rot), &rot2)), d);
    }
}
