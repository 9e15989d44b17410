use std::sync::Arc;

use relaxbl_core::linalg::RMatrix;
use relaxbl_core::models::{derive_structure, JinXinModel, LinearRelaxationSystem};
use relaxbl_core::reference::*;
use relaxbl_core::schemes::{Grid1D, LinearStepper, SchemeConfig, SchemeKind};
use relaxbl_core::Error;

fn example3(eps: f64) -> LinearRelaxationSystem {
    let a = RMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]);
    let s = RMatrix::from_rows(&[[-1.0]]);
    let b = RMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 2.0]]);
    LinearRelaxationSystem::new(a, s, b, eps)
        .unwrap()
        .with_bc_data(Arc::new(|t: f64| vec![-t.sin(), 0.0]))
}

// Five-point central difference, error O(h^4).
fn d1(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-3;
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

#[test]
fn outer_parts_solve_the_equilibrium_laws() {
    // 1a/1b: u_t + a u_x = 0 with v = a u.
    for (id, a) in [("1a", -0.5), ("1b", 0.5)] {
        let s = example_closed_form(id, 1e-9).unwrap();
        for &(x, t) in &[(0.3, 0.2), (1.1, 0.5), (1.9, 0.05)] {
            let ut = d1(|tt| (s.outer)(x, tt)[0], t);
            let ux = d1(|xx| (s.outer)(xx, t)[0], x);
            assert!((ut + a * ux).abs() < 1e-8, "{id}");
            let o = (s.outer)(x, t);
            assert!((o[1] - a * o[0]).abs() < 1e-14);
        }
    }
    // 3: (u,v) transported by A11 = [[0,1],[1,0]], p = 0.
    let s = example_closed_form("3", 1e-6).unwrap();
    for &(x, t) in &[(0.3, 0.2), (0.7, 0.3)] {
        let o = (s.outer)(x, t);
        let r1 = d1(|tt| (s.outer)(x, tt)[0], t) + d1(|xx| (s.outer)(xx, t)[1], x);
        let r2 = d1(|tt| (s.outer)(x, tt)[1], t) + d1(|xx| (s.outer)(xx, t)[0], x);
        assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8 && o[2] == 0.0);
    }
}

#[test]
fn layer_parts_solve_the_layer_equations() {
    // 1a: mu_y = a mu.
    let s = example_closed_form("1a", 1e-9).unwrap();
    for &(y, t) in &[(0.0, 0.3), (1.7, 0.5), (6.0, 0.1)] {
        let my = d1(|yy| s.layer(yy, t)[0], y);
        assert!((my + 0.5 * s.layer(y, t)[0]).abs() < 1e-8);
    }
    // 3: nu_y = H nu with H = -1, mu = -(1,0) nu.
    let s = example_closed_form("3", 1e-6).unwrap();
    for &(y, t) in &[(0.0, 0.3), (2.0, 0.5)] {
        let l = s.layer(y, t);
        let ny = d1(|yy| s.layer(yy, t)[2], y);
        assert!((ny + l[2]).abs() < 1e-8);
        assert!((l[0] + l[2]).abs() < 1e-15 && l[1] == 0.0);
    }
}

#[test]
fn closed_forms_satisfy_boundary_conditions() {
    for t in [0.05f64, 0.3, 0.5] {
        let v = example_closed_form("1a", 1e-9).unwrap().eval(0.0, t);
        assert!((v[0] + v[1] - ((t / 2.0).sin() + t.sin())).abs() < 1e-14);
        let v = example_closed_form("1b", 1e-9).unwrap().eval(0.0, t);
        assert!((v[0] + v[1] + 3.0 * (t / 2.0).sin()).abs() < 1e-14);
        let v = example_closed_form("1c", 1.0).unwrap().eval(0.0, t);
        assert!((v[0] + v[1]).abs() < 1e-15);
        let v = example_closed_form("3", 1e-6).unwrap().eval(0.0, t);
        assert!((v[0] + t.sin()).abs() < 1e-14 && (v[1] + 2.0 * v[2]).abs() < 1e-14);
    }
}

#[test]
fn example_1c_is_exact() {
    let s = example_closed_form("1c", 1.0).unwrap();
    assert!(s.exact);
    let f = |u: f64| 0.5 * u;
    let forcing = |x: f64, t: f64| -1.5 * (x + t).sin();
    for &(x, t) in &[(0.2, 0.1), (1.4, 0.45), (0.9, 0.3)] {
        let (u, v) = ((s.eval(x, t))[0], (s.eval(x, t))[1]);
        let r1 = d1(|tt| s.eval(x, tt)[0], t) + d1(|xx| s.eval(xx, t)[1], x);
        let r2 = d1(|tt| s.eval(x, tt)[1], t) + d1(|xx| s.eval(xx, t)[0], x) - (f(u) - v) - forcing(x, t);
        assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8, "{r1} {r2}");
    }
}

#[test]
fn limits_on_grid_at_the_boundary() {
    let g = Grid1D::uniform(0.0, 2.0, 20).unwrap();
    let t: f64 = 0.5;
    let l = example_closed_form("1a", 1e-9).unwrap().limit_on_grid(&g, t);
    assert!((l.point(0)[0] - (2.0 * (t / 2.0).sin() + t.sin())).abs() < 1e-15);
    assert!((l.point(0)[1] + (t / 2.0).sin()).abs() < 1e-15);
    let l3 = example_closed_form("3", 1e-6).unwrap().limit_on_grid(&g, t);
    let p = l3.point(0);
    assert!((p[0] + t.sin()).abs() < 1e-15 && (p[1] + 2.0 * t.sin()).abs() < 1e-15 && (p[2] - t.sin()).abs() < 1e-15);
    assert_eq!(l3.point(3)[2], 0.0);
}

#[test]
fn jinxin_limit_matches_formula() {
    let f = |u: f64| -0.5 * u;
    let ubar = [1.0, 2.0, 3.0];
    let s = jinxin_limit_on_grid(&f, &ubar, 0.25, 0.0);
    assert_eq!(s.values, vec![1.25, -0.5, 2.0, -1.0, 3.0, -1.5]);
}

#[test]
fn linear_limit_example_3() {
    let sys = example3(1e-6);
    let d = derive_structure(&sys).unwrap();
    let t: f64 = 0.4;
    let ubar = vec![0.0, -2.0 * t.sin(), 0.1, 0.2];
    let s = linear_limit_on_grid(&d.a11_inv_a12, &ubar, &[t.sin()], t).unwrap();
    let p = s.point(0);
    assert!((p[0] + t.sin()).abs() < 1e-15 && (p[1] + 2.0 * t.sin()).abs() < 1e-15 && p[2] == t.sin());
    assert_eq!(s.point(1), &[0.1, 0.2, 0.0]);
}

#[test]
fn reduced_bc_example_3() {
    let sys = example3(1e-6);
    let d = derive_structure(&sys).unwrap();
    let red = reduced_bc_build(&sys, &d).unwrap();
    assert_eq!(red.matrix.rows(), 2);
    // Columns scale with the choice of R+^1; compare after normalizing the
    // first column to [[1/sqrt2],[1/sqrt2]] in absolute value.
    let m = &red.matrix;
    let c = std::f64::consts::FRAC_1_SQRT_2 / m[(0, 0)].abs();
    assert!((m[(0, 0)].abs() * c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    assert!((m[(1, 0)] * c - m[(0, 0)] * c).abs() < 1e-14);
    assert_eq!((m[(0, 1)], m[(1, 1)]), (-1.0, 2.0));
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    assert!(det.abs() > 1.0);

    let exact = example_closed_form("3", 1e-6).unwrap();
    for t in [0.1f64, 0.3, 0.9] {
        let o = (exact.outer)(0.0, t);
        let am = d.split_a11.l_minus.mul_vec(&o[..2]);
        let sol = red.solve(t, &am).unwrap();
        assert!((sol.nu[0] - t.sin()).abs() < 1e-10);
        assert!(sol.ubar0[0].abs() < 1e-10 && (sol.ubar0[1] + 2.0 * t.sin()).abs() < 1e-10);
    }
}

#[test]
fn reduced_bc_decoupled_case() {
    // A12 = 0, B_v = 0 = B_u K and H = 1 unstable: the nu block is L+^H alone,
    // so the system is solvable iff B_u R+^1 is invertible.
    let a = RMatrix::from_rows(&[[2.0, 0.0], [0.0, -1.0]]);
    let sys = LinearRelaxationSystem::new(a, RMatrix::from_rows(&[[-1.0]]), RMatrix::from_rows(&[[1.0, 0.0]]), 1.0)
        .unwrap()
        .with_bc_data(Arc::new(|_| vec![3.0]));
    let d = derive_structure(&sys).unwrap();
    let red = reduced_bc_build(&sys, &d).unwrap();
    assert_eq!(red.matrix.rows(), 2);
    assert_eq!(red.matrix[(0, 1)], 0.0);
    let sol = red.solve(0.0, &[]).unwrap();
    assert!((sol.ubar0[0] - 3.0).abs() < 1e-15 && sol.nu[0] == 0.0);
}

#[test]
fn equilibrium_solver_constant_and_transport() {
    let g = Grid1D::uniform(0.0, 1.0, 200).unwrap();
    let out = equilibrium_scalar_solve(&|u| -0.5 * u, &|_| -0.5, &|_| 2.0, &g, 0.3, &|_| 2.0, 0.8, &[]).unwrap();
    assert!(out[0].1.iter().all(|&u| (u - 2.0).abs() < 1e-14));

    let init = |x: f64| (2.0 * x).sin();
    let out = equilibrium_scalar_solve(&|u| 0.5 * u, &|_| 0.5, &init, &g, 0.4, &|t| (-t).sin(), 0.8, &[0.2])
        .unwrap();
    assert_eq!(out.len(), 2);
    let (t, u) = &out[1];
    let err = u
        .iter()
        .enumerate()
        .map(|(j, &v)| (v - init(g.x(j) - 0.5 * t)).abs())
        .fold(0.0, f64::max);
    assert!(err < 2.0 * g.h, "{err}");
}

#[test]
fn equilibrium_solver_rejects_sign_change() {
    let g = Grid1D::uniform(-1.0, 1.0, 50).unwrap();
    let r = equilibrium_scalar_solve(&|u| 0.5 * u * u, &|u| u, &|x| x, &g, 0.1, &|_| 0.0, 0.8, &[]);
    assert!(matches!(r, Err(Error::DegenerateSign { .. })));
}

fn example2_model() -> JinXinModel {
    JinXinModel::new(
        Arc::new(|u: f64| ((-u).exp() - 1.0) / 4.0),
        Arc::new(|u: f64| -(-u).exp() / 4.0),
        1e-6,
    )
    .with_boundary(1.0, 1.0, Arc::new(|t: f64| (2.0 * t).sin()))
}

#[test]
fn layer_amplitude_cases() {
    let m = JinXinModel::linear(-0.5, 1e-9).with_boundary(1.0, 1.0, Arc::new(|t: f64| (t / 2.0).sin() + t.sin()));
    for t in [0.1f64, 0.5] {
        let ubar0 = 2.0 * (t / 2.0).sin();
        assert!((jinxin_layer_amplitude(&m, ubar0, t).unwrap() - t.sin()).abs() < 1e-15);
    }
    let quiet = JinXinModel::linear(-0.5, 1e-9).with_boundary(1.0, 1.0, Arc::new(|_| 0.5));
    assert_eq!(jinxin_layer_amplitude(&quiet, 1.0, 0.0).unwrap(), 0.0);
    let no_bu = JinXinModel::linear(-0.5, 1e-9).with_boundary(0.0, 1.0, Arc::new(|_| 0.0));
    assert!(jinxin_layer_amplitude(&no_bu, 1.0, 0.0).is_err());

    // Example 2 with a numerically computed outer boundary value.
    let m2 = example2_model();
    let g = Grid1D::uniform(0.0, 1.0, 800).unwrap();
    let init = |x: f64| (std::f64::consts::PI * x).sin().powi(3);
    let out = equilibrium_scalar_solve(&*m2.flux, &*m2.flux_derivative, &init, &g, 0.2, &|_| 0.0, 0.8, &[]).unwrap();
    let u0 = out[0].1[0];
    let mu = jinxin_layer_amplitude(&m2, u0, 0.2).unwrap();
    let expect = (0.4f64).sin() - u0 - ((-u0).exp() - 1.0) / 4.0;
    assert!((mu - expect).abs() < 1e-15);
}

#[test]
fn layer_profile_linear_oracle() {
    let m = JinXinModel::linear(-0.5, 1e-9);
    let steps = 1000;
    let prof = jinxin_layer_profile(&m, 0.0, 0.8, 10.0, steps).unwrap();
    let err = prof
        .iter()
        .enumerate()
        .map(|(k, &v)| (v - 0.8 * (-0.5 * k as f64 * 0.01).exp()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
    assert!(jinxin_layer_profile(&m, 0.0, 0.0, 10.0, 10).unwrap().iter().all(|&v| v == 0.0));
    let pos = JinXinModel::linear(0.5, 1e-9);
    assert!(matches!(jinxin_layer_profile(&pos, 0.0, 1.0, 1.0, 10), Err(Error::InadmissibleLayer(_))));
}

#[test]
fn layer_profile_example_2_decays() {
    let m2 = example2_model();
    let prof = jinxin_layer_profile(&m2, 0.0, (0.4f64).sin(), 200.0, 4000).unwrap();
    assert!(prof.last().unwrap().abs() < 1e-12);
}

#[test]
fn layer_profile_rejects_growth() {
    // f(u) = -u + u^3 at ubar0 = 0: mu0 = 2 lies beyond the stable basin.
    let m = JinXinModel::new(Arc::new(|u: f64| -u + u * u * u), Arc::new(|u: f64| -1.0 + 3.0 * u * u), 1.0);
    assert!(matches!(jinxin_layer_profile(&m, 0.0, 2.0, 10.0, 100), Err(Error::InadmissibleLayer(_))));
}

#[test]
fn fine_mesh_reference_is_consistent() {
    // Non-stiff Example 3 variant: the classical scheme at two fine meshes.
    let sys = example3(0.5).with_init(Arc::new(|x: f64| vec![2.0 * x.sin(), 0.0, 0.0]));
    let cfg = SchemeConfig::default();
    let st = LinearStepper::new(sys, SchemeKind::Upwind, cfg.clone()).unwrap();
    let coarse = Grid1D::uniform(0.0, 1.0, 10).unwrap();
    let f1 = Grid1D::uniform(0.0, 1.0, 200).unwrap();
    let f2 = Grid1D::uniform(0.0, 1.0, 400).unwrap();
    let r1 = fine_mesh_reference(&st, &f1, &coarse, 0.2, &cfg, 0.5).unwrap();
    let r2 = fine_mesh_reference(&st, &f2, &coarse, 0.2, &cfg, 0.5).unwrap();
    let diff = r1.values.iter().zip(&r2.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 2.0 * f1.h, "{diff}");
    let bad = Grid1D::uniform(0.0, 1.0, 7).unwrap();
    assert!(matches!(fine_mesh_reference(&st, &f1, &bad, 0.2, &cfg, 0.5), Err(Error::NonNested(_))));
}
