use kfield::dynamics::ForceField;
use kfield::geometry::{Chart, MetricField};
use kfield::solve::{flat_newton_sheet, newton_residual, Grid, Sheet};
use kfield::variational::{
    ddw_residual, hamilton_principle_defect, newton_vs_ddw_report, Bump, Potential, ProlongedVector,
};
use nalgebra::DMatrix;

fn constant_force(k: usize, entries: &[Vec<Vec<f64>>]) -> ForceField {
    let text: Vec<Vec<Vec<String>>> =
        entries.iter().map(|m| m.iter().map(|r| r.iter().map(|v| format!("{v}")).collect()).collect()).collect();
    ForceField::parse(&Chart::standard(entries.len()), k, &text).unwrap()
}

#[test]
fn newton_sheets_solve_the_traced_equations() {
    let g = MetricField::parse(
        Chart::standard(2),
        &[vec!["2".into(), "0.5".into()], vec!["0.5".into(), "1".into()]],
    )
    .unwrap();
    let f = constant_force(2, &[vec![vec![1.0, -0.5], vec![-0.5, 3.0]], vec![vec![0.0, 2.0], vec![2.0, -1.0]]]);
    // tr F = (4, -1), so U = -4 q1 + q2
    let u = Potential::parse(&Chart::standard(2), "-4*q1 + q2").unwrap();
    let grid = Grid::new(vec![-1.0, -0.5], vec![1.0, 0.5], vec![11, 9]).unwrap();
    let b = DMatrix::from_row_slice(2, 2, &[0.3, -1.0, 0.7, 0.2]);
    let sheet = flat_newton_sheet(&g, &f, &[1.0, -2.0], &b, grid).unwrap();
    let report = newton_vs_ddw_report(&g, &f, Some(&u), &sheet).unwrap();
    assert!(report.newton.max <= 1e-10, "{}", report.newton.max);
    assert!(report.ddw.max() <= 1e-8, "{}", report.ddw.max());
    assert!(report.trace_defect <= 1e-10);
}

#[test]
fn wrong_potential_breaks_only_the_traced_equations() {
    let g = MetricField::flat(1);
    let f = constant_force(2, &[vec![vec![2.0, 1.0], vec![1.0, 0.0]]]);
    let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![9, 9]).unwrap();
    let sheet = flat_newton_sheet(&g, &f, &[0.5], &DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), grid).unwrap();
    assert!(newton_residual(&g, &f, &sheet).unwrap().max <= 1e-10);
    let wrong = Potential::parse(&Chart::standard(1), "q1").unwrap();
    let r = ddw_residual(&g, &wrong, &sheet).unwrap();
    assert!((r.max_p - 3.0).abs() <= 1e-8, "{}", r.max_p);
}

/// −∫ (Σ_α ∂_α p^α + U') b v dt for a scalar sheet on the flat line, by a
/// fine trapezoid rule over the analytic integrand.
fn integrated_by_parts(div: impl Fn(f64, f64) -> f64, q: impl Fn(f64, f64) -> f64, v: impl Fn(f64) -> f64) -> f64 {
    let m = 801;
    let h = 2.0 / (m - 1) as f64;
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            let t = [-1.0 + i as f64 * h, -1.0 + j as f64 * h];
            let (b, _) = Bump::Smooth.eval(&t, &[-1.0, -1.0], &[1.0, 1.0]);
            s += h * h * div(t[0], t[1]) * b * v(q(t[0], t[1]));
        }
    }
    -s
}

#[test]
fn hamilton_principle_matches_integration_by_parts_on_quadratic_sheets() {
    let g = MetricField::flat(1);
    let u = Potential::zero();
    let v = ProlongedVector::parse(&Chart::standard(1), &["1 + q1".to_string()]).unwrap();
    let q = |a: f64, b: f64| a * a + a * b - 0.5 * b;
    let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![81, 81]).unwrap();
    let sheet = Sheet::from_fn(grid, 1, |t| Ok(vec![q(t[0], t[1])])).unwrap();
    let got = hamilton_principle_defect(&g, &u, &sheet, &v, Bump::Smooth).unwrap();
    let oracle = integrated_by_parts(|_, _| 2.0, q, |x| 1.0 + x);
    assert!(oracle.abs() > 0.1);
    assert!((got - oracle).abs() <= 1e-8, "{got} vs {oracle}");
}

#[test]
fn hamilton_principle_converges_on_cubic_sheets() {
    let g = MetricField::flat(1);
    let u = Potential::zero();
    let v = ProlongedVector::parse(&Chart::standard(1), &["1 + q1".to_string()]).unwrap();
    let q = |a: f64, b: f64| a * a * a + b;
    let oracle = integrated_by_parts(|a, _| 6.0 * a, q, |x| 1.0 + x);
    let errors: Vec<f64> = [41, 81]
        .iter()
        .map(|&m| {
            let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![m, m]).unwrap();
            let sheet = Sheet::from_fn(grid, 1, |t| Ok(vec![q(t[0], t[1])])).unwrap();
            (hamilton_principle_defect(&g, &u, &sheet, &v, Bump::Smooth).unwrap() - oracle).abs()
        })
        .collect();
    assert!(errors[1] <= 1e-2 * oracle.abs(), "{errors:?} vs {oracle}");
    assert!(errors[0] / errors[1] > 3.0, "{errors:?}");
}
