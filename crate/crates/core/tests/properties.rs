use kfield::bundles::{liouville_eval, metric_iso, inverse_iso, polysymplectic_eval, BundleTangent, Covelocity, KVelocity};
use kfield::exprlang::{parse, EvalEnv, Expr, Scope};
use kfield::geometry::MetricField;
use kfield::jets::{mu_embed, Func, Scalar, TruncatedPolynomial};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn dyadic() -> impl Strategy<Value = f64> {
    (-64i32..=64).prop_map(|v| v as f64 / 8.0)
}

fn jet(k: usize) -> impl Strategy<Value = TruncatedPolynomial> {
    prop::collection::vec(dyadic(), 1 + k + k * (k + 1) / 2)
        .prop_map(move |c| TruncatedPolynomial::new(k, 2, c).unwrap())
}

fn jet_triple() -> impl Strategy<Value = (TruncatedPolynomial, TruncatedPolynomial, TruncatedPolynomial)> {
    (1usize..=3).prop_flat_map(|k| (jet(k), jet(k), jet(k)))
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..=64).prop_map(|v| Expr::num(v as f64 / 8.0)),
        (0usize..2).prop_map(Expr::coord),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), 1i32..=3).prop_map(|(a, n)| Expr::pow(a, n)),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.prop_map(|a| Expr::call(Func::Exp, a)),
        ]
    })
}

fn unit_interval() -> impl Strategy<Value = f64> {
    -1.0f64..1.0
}

fn sphere_point() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (0.4f64..2.7, -3.0f64..3.0, prop::collection::vec(unit_interval(), 4))
        .prop_map(|(th, ph, v)| (vec![th, ph], v))
}

proptest! {
    #[test]
    fn ring_axioms_hold_exactly((a, b, c) in jet_triple()) {
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() * a.constant_like(1.0), a.clone());
        prop_assert_eq!(a.clone() - a.clone(), a.zero_like());
    }

    #[test]
    fn mu_is_a_ring_morphism((a, b, _) in jet_triple()) {
        let (ma, mb) = (mu_embed(&a).unwrap(), mu_embed(&b).unwrap());
        prop_assert_eq!(mu_embed(&(a.clone() * b.clone())).unwrap(), ma.clone() * mb.clone());
        prop_assert_eq!(mu_embed(&(a.clone() + b.clone())).unwrap(), ma.clone() + mb.clone());
        prop_assert_eq!(mu_embed(&a.constant_like(1.0)).unwrap(), ma.constant_like(1.0));
    }

    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let scope = Scope::standard(2);
        let text = e.display(&scope).to_string();
        let back = parse(&text, &scope).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn jet_constant_term_is_the_real_value(e in expr(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let real = e.eval(&EvalEnv::coords(&[x, y]));
        let vars = [
            TruncatedPolynomial::variable(2, 2, x, 0).unwrap(),
            TruncatedPolynomial::variable(2, 2, y, 1).unwrap(),
        ];
        let lifted = e.eval(&EvalEnv::coords(&vars));
        match (real, lifted) {
            (Ok(r), Ok(j)) => prop_assert_eq!(r.to_bits(), j.value().to_bits()),
            (Err(_), Err(_)) => {}
            (r, j) => prop_assert!(false, "real {:?} vs jet {:?}", r, j.map(|j| j.value())),
        }
    }

    #[test]
    fn jet_gradient_matches_central_differences(e in expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let f = |p: [f64; 2]| e.eval(&EvalEnv::coords(&p));
        let vars = [
            TruncatedPolynomial::variable(2, 1, x, 0).unwrap(),
            TruncatedPolynomial::variable(2, 1, y, 1).unwrap(),
        ];
        let h = 1e-6;
        let samples = [f([x + h, y]), f([x - h, y]), f([x, y + h]), f([x, y - h]), f([x, y])];
        prop_assume!(samples.iter().all(|s| s.as_ref().map(|v| v.abs() < 1e6).unwrap_or(false)));
        let j = e.eval(&EvalEnv::coords(&vars)).unwrap();
        let s: Vec<f64> = samples.into_iter().map(|s| s.unwrap()).collect();
        for (alpha, fd) in [(s[0] - s[1]) / (2.0 * h), (s[2] - s[3]) / (2.0 * h)].into_iter().enumerate() {
            let exact = *j.linear(alpha);
            // FD is unreliable near poles of the expression
            prop_assume!(exact.abs() < 1e3);
            prop_assert!((exact - fd).abs() <= 1e-4 * (1.0 + exact.abs()), "∂{} {} vs {}", alpha, exact, fd);
        }
    }

    #[test]
    fn metric_iso_round_trips((q, v) in sphere_point()) {
        let g = MetricField::sphere(1.3);
        let x = KVelocity::new(q, DMatrix::from_row_slice(2, 2, &v)).unwrap();
        let back = inverse_iso(&g, &metric_iso(&g, &x).unwrap()).unwrap();
        prop_assert!((back.qdot() - x.qdot()).amax() <= 1e-12);
        prop_assert_eq!(back.q(), x.q());
    }

    #[test]
    fn polysymplectic_form_is_antisymmetric_and_bilinear(
        p in prop::collection::vec(unit_interval(), 6),
        t in prop::collection::vec(unit_interval(), 27),
        c in -2.0f64..2.0,
    ) {
        let sigma = Covelocity::new(vec![0.1, 0.2, 0.3], DMatrix::from_row_slice(3, 2, &p)).unwrap();
        let tangent = |o: usize| BundleTangent::new(
            sigma.clone(),
            DVector::from_column_slice(&t[o..o + 3]),
            DMatrix::from_row_slice(3, 2, &t[o + 3..o + 9]),
        ).unwrap();
        let (d1, d2, d3) = (tangent(0), tangent(9), tangent(18));
        let w12 = polysymplectic_eval(&sigma, &d1, &d2).unwrap();
        let w21 = polysymplectic_eval(&sigma, &d2, &d1).unwrap();
        for (a, b) in w12.iter().zip(&w21) {
            prop_assert!((a + b).abs() <= 1e-14);
        }
        let combo = BundleTangent::new(sigma.clone(), d1.dq() + d3.dq().scale(c), d1.dp() + d3.dp().scale(c)).unwrap();
        let lhs = polysymplectic_eval(&sigma, &combo, &d2).unwrap();
        let w32 = polysymplectic_eval(&sigma, &d3, &d2).unwrap();
        for a in 0..2 {
            prop_assert!((lhs[a] - (w12[a] + c * w32[a])).abs() <= 1e-12);
        }
    }

    #[test]
    fn liouville_form_ignores_momentum_directions(
        p in prop::collection::vec(unit_interval(), 4),
        dq in prop::collection::vec(unit_interval(), 2),
        dp1 in prop::collection::vec(unit_interval(), 4),
        dp2 in prop::collection::vec(unit_interval(), 4),
    ) {
        let sigma = Covelocity::new(vec![0.0, 1.0], DMatrix::from_row_slice(2, 2, &p)).unwrap();
        let d = |dp: &[f64]| BundleTangent::new(sigma.clone(), DVector::from_column_slice(&dq), DMatrix::from_row_slice(2, 2, dp)).unwrap();
        prop_assert_eq!(liouville_eval(&sigma, &d(&dp1)).unwrap(), liouville_eval(&sigma, &d(&dp2)).unwrap());
    }

    #[test]
    fn k_kinetic_energy_is_slot_permutation_invariant((q, v) in sphere_point(), extra in prop::collection::vec(unit_interval(), 2)) {
        let g = MetricField::sphere(1.0);
        let qdot = DMatrix::from_row_slice(2, 3, &[v[0], v[1], extra[0], v[2], v[3], extra[1]]);
        let x = KVelocity::new(q, qdot).unwrap();
        let t = g.k_kinetic_energy(&x).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
            let tp = g.k_kinetic_energy(&x.permute_slots(&perm).unwrap()).unwrap();
            prop_assert!((t - tp).abs() <= 1e-14 * (1.0 + t.abs()));
        }
    }
}
