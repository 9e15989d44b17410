use std::sync::Arc;

use proptest::prelude::*;
use relaxbl_core::linalg::*;
use relaxbl_core::models::*;
use relaxbl_core::schemes::*;

fn square(max_n: usize) -> impl Strategy<Value = RMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |d| RMatrix::from_row_major(n, n, d).unwrap())
    })
}

fn rect(rows: usize, cols: usize) -> impl Strategy<Value = RMatrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |d| RMatrix::from_row_major(rows, cols, d).unwrap())
}

fn min_gap(vals: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            g = g.min((vals[i] - vals[j]).norm());
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigen_residuals(m in square(4)) {
        let vals = eigenvalues_small(&m.to_complex()).unwrap();
        prop_assume!(min_gap(&vals) >= 1e-4);
        let cm = m.to_complex();
        let norm = m.norm_fro().max(1e-300);
        for p in eigen_small(&m).unwrap() {
            let mv = cm.mul_vec(&p.right_eigenvector);
            let res = mv
                .iter()
                .zip(&p.right_eigenvector)
                .map(|(a, b)| (a - p.eigenvalue * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(res <= 1e-10 * norm, "residual {res} for {m:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn spectral_split_blocks(m in square(4)) {
        let vals = eigenvalues_small(&m.to_complex()).unwrap();
        prop_assume!(min_gap(&vals) >= 1e-3 && vals.iter().all(|v| v.re.abs() > 1e-3));
        let sp = spectral_split(&m, DEFAULT_REALPART_TOL).unwrap();
        prop_assert_eq!(sp.n_plus() + sp.n_minus(), m.rows());
        let n = m.rows();
        let recon = &sp.r_plus.matmul(&sp.l_plus) + &sp.r_minus.matmul(&sp.l_minus);
        prop_assert!((&recon - &RMatrix::identity(n)).norm_max() <= 1e-10);
        for (r, l, stable) in [(&sp.r_minus, &sp.l_minus, true), (&sp.r_plus, &sp.l_plus, false)] {
            if r.cols() == 0 {
                continue;
            }
            let s = l.matmul(&m).matmul(r);
            let mr = m.matmul(r);
            prop_assert!((&mr - &r.matmul(&s)).norm_max() <= 1e-10 * m.norm_fro().max(1.0));
            for p in eigenvalues_small(&s.to_complex()).unwrap() {
                let ok = if stable { p.re < 0.0 } else { p.re > 0.0 };
                prop_assert!(ok);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn subspace_gap_basis_invariance(a in rect(4, 2), b in rect(4, 2), t in rect(2, 2)) {
        prop_assume!(singular_values(&a).unwrap().iter().all(|&s| s > 0.1));
        prop_assume!(singular_values(&b).unwrap().iter().all(|&s| s > 0.1));
        prop_assume!(singular_values(&t).unwrap().iter().all(|&s| s > 0.1));
        let at = a.matmul(&t);
        prop_assert!(subspace_gap(&a, &at).unwrap() <= 1e-7);
        let g1 = subspace_gap(&a, &b).unwrap();
        let g2 = subspace_gap(&at, &b).unwrap();
        let g3 = subspace_gap(&a, &b.matmul(&t)).unwrap();
        prop_assert!((g1 - g2).abs() <= 1e-10 && (g1 - g3).abs() <= 1e-10, "{g1} {g2} {g3}");
    }

    #[test]
    fn gkc_ratio_recombination(
        re in 0.01f64..10.0,
        im in -10.0f64..10.0,
        eta in 0.0f64..1e4,
        t in rect(2, 2),
    ) {
        prop_assume!(singular_values(&t).unwrap().iter().all(|&s| s > 0.1));
        let a = RMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]);
        let b = RMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 2.0]]);
        let sys = LinearRelaxationSystem::new(a, RMatrix::from_rows(&[[-1.0]]), b.clone(), 1.0).unwrap();
        let m = m_matrix(&sys, C64::new(re, im), eta).unwrap();
        let Ok(r) = unstable_subspace_complex(&m, DEFAULT_REALPART_TOL) else { return Ok(()); };
        prop_assume!(r.cols() == 2);
        let r1 = gkc_ratio_for_basis(&b, &r).unwrap();
        let r2 = gkc_ratio_for_basis(&b, &r.matmul(&t.to_complex())).unwrap();
        prop_assert!((r1 - r2).abs() <= 1e-10 * r1.abs().max(1e-3), "{r1} {r2}");
    }
}

#[test]
fn limit_pair_matches_stiff_unstable_span() {
    let ex3 = LinearRelaxationSystem::new(
        RMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]),
        RMatrix::from_rows(&[[-1.0]]),
        RMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 2.0]]),
        1e-6,
    )
    .unwrap();
    let ex5 = LinearRelaxationSystem::new(
        RMatrix::from_rows(&[[-1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]),
        RMatrix::diagonal(&[-1.0, -1.0]),
        RMatrix::from_rows(&[[0.0, 0.0, 1.0]]),
        1e-6,
    )
    .unwrap();
    for sys in [ex3, ex5] {
        let d = derive_structure(&sys).unwrap();
        let m = d.a_inv.matmul(&(&RMatrix::identity(3) - &sys.q.scale(1e8)));
        let sp = spectral_split(&m, DEFAULT_REALPART_TOL).unwrap();
        let gp = subspace_gap(&sp.r_plus, &d.r_inf_plus).unwrap();
        let gm = subspace_gap(&sp.r_minus, &d.r_inf_minus).unwrap();
        assert!(gp <= 1e-5 && gm <= 1e-5, "{gp} {gm} {:?} {:?}", sp.r_plus, d.r_inf_plus);
    }
}

fn jx_state(g: &Grid1D) -> SolutionState {
    SolutionState::from_fn(g, 2, 0.0, |x| vec![2.0 * x.sin(), -(x).sin()]).unwrap()
}

fn max_diff(a: &SolutionState, b: &SolutionState) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn nonstiff_difference_scales_with_eta() {
    let g = Grid1D::uniform(0.0, 2.0, 100).unwrap();
    let tau = 0.8 * g.h;
    let s = jx_state(&g);
    let cfg = SchemeConfig { switch_rule: SwitchRule::SmoothEta, ..SchemeConfig::default() };
    let diff = |eps: f64| {
        let m = JinXinModel::linear(-0.5, eps).with_boundary(1.0, 1.0, Arc::new(|t: f64| (t / 2.0).sin() + t.sin()));
        let up = jinxin_upwind_step(&m, &g, &s, tau, &cfg).unwrap();
        let bap = jinxin_bap_step(&m, &g, &s, tau, &cfg).unwrap();
        max_diff(&up, &bap)
    };
    let d1 = diff(1e3 * tau);
    let d2 = diff(2e3 * tau);
    assert!(d1 > 0.0 && d1 <= 1e-5, "{d1}");
    let ratio = d1 / d2;
    assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn steady_states_are_fixed_points() {
    let g = Grid1D::uniform(0.0, 1.0, 50).unwrap();
    let tau = 0.8 * g.h;
    let cfg = SchemeConfig::default();

    let f = |u: f64| ((-u).exp() - 1.0) / 4.0;
    let c = 0.4;
    for eps in [1e3, 1e-3, 1e-14] {
        let m = JinXinModel::new(Arc::new(f), Arc::new(|u: f64| -(-u).exp() / 4.0), eps)
            .with_boundary(1.0, 1.0, Arc::new(move |_| c + f(c)));
        let s = SolutionState::from_fn(&g, 2, 0.0, |_| vec![c, f(c)]).unwrap();
        assert!(max_diff(&jinxin_upwind_step(&m, &g, &s, tau, &cfg).unwrap(), &s) <= 1e-14);
        assert!(max_diff(&jinxin_bap_step(&m, &g, &s, tau, &cfg).unwrap(), &s) <= 1e-14);
    }

    let ubar = [0.3, -0.7];
    for eps in [1e3, 1e-3, 1e-14] {
        let sys = LinearRelaxationSystem::new(
            RMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]),
            RMatrix::from_rows(&[[-1.0]]),
            RMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 2.0]]),
            eps,
        )
        .unwrap()
        .with_bc_data(Arc::new(move |_| ubar.to_vec()));
        let d = derive_structure(&sys).unwrap();
        let s = SolutionState::from_fn(&g, 3, 0.0, |_| vec![ubar[0], ubar[1], 0.0]).unwrap();
        let tau = 0.8 * g.h / sys.max_speed().unwrap();
        let up = linear_upwind_step(&sys, &d.split_a, &g, &s, tau, &cfg).unwrap();
        let bap = linear_bap_step(&sys, &d, &g, &s, tau, &cfg).unwrap();
        assert!(max_diff(&up, &s) <= 1e-14 && max_diff(&bap, &s) <= 1e-14);
    }
}

#[test]
fn upwind_update_telescopes() {
    // u-row of the Jin-Xin system carries no source.
    let g = Grid1D::uniform(0.0, 1.0, 40).unwrap();
    let lam = 0.8;
    let tau = lam * g.h;
    let m = JinXinModel::linear(-0.5, 1e-3).with_boundary(1.0, 1.0, Arc::new(|t: f64| t.sin()));
    let s = SolutionState::from_fn(&g, 2, 0.0, |x| vec![(3.0 * x).cos(), x * x]).unwrap();
    let next = jinxin_upwind_step(&m, &g, &s, tau, &SchemeConfig::default()).unwrap();
    let n = g.num_points - 1;
    let lhs: f64 = (1..n).map(|j| next.point(j)[0] - s.point(j)[0]).sum();
    // Row 0 of A+ dU_- + A- dU_+ with A+- = (A +- |A|)/2 for A = [[0,1],[1,0]].
    let p = |j: usize| s.point(j);
    let rhs = -lam * 0.5 * ((p(n - 1)[0] + p(n - 1)[1] - p(0)[0] - p(0)[1]) + (-p(n)[0] + p(n)[1] + p(1)[0] - p(1)[1]));
    assert!((lhs - rhs).abs() <= 1e-13, "{lhs} {rhs}");
}
