use crate::error::{Error, Result};
use crate::models::JinXinModel;

use super::eta::{eta_for, m_eta_decompose, EtaDecomposition, Mat2};
use super::pointsolve::{solve_pair, PairRow};
use super::{check_cfl, AMode, Grid1D, RightBoundary, SchemeConfig, SchemeKind, SolutionState, Stepper};

/// `A+ = R+ L+` scaled by the positive eigenvalue of `[[0,1],[1,0]]`.
pub const JX_A_PLUS: Mat2 = [[0.5, 0.5], [0.5, 0.5]];
/// `A- = R- L-` scaled by the negative eigenvalue.
pub const JX_A_MINUS: Mat2 = [[-0.5, 0.5], [0.5, -0.5]];

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Explicit flux part `U - lambda [P+ (U_j - U_{j-1}) + P- (U_{j+1} - U_j)]`.
pub(crate) fn jx_flux_update(pp: &Mat2, pm: &Mat2, lambda: f64, um: [f64; 2], u: [f64; 2], up: [f64; 2]) -> [f64; 2] {
    let dl = [u[0] - um[0], u[1] - um[1]];
    let dr = [up[0] - u[0], up[1] - u[1]];
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = u[i] - lambda * (pp[i][0] * dl[0] + pp[i][1] * dl[1] + pm[i][0] * dr[0] + pm[i][1] * dr[1]);
    }
    out
}

/// Implicit relaxation of the v-row given `u^{n+1}`:
/// `v = (v* + kappa f(u) + tau F) / (1 + kappa)`.
pub(crate) fn jx_relax_v(model: &JinXinModel, u: f64, v_star: f64, x: f64, t: f64, tau: f64, epsilon: f64) -> f64 {
    let kappa = tau / epsilon;
    let forcing = model.forcing.as_ref().map_or(0.0, |g| g(x, t));
    (v_star + kappa * (model.flux)(u) + tau * forcing) / (1.0 + kappa)
}

fn pt(state: &SolutionState, j: usize) -> [f64; 2] {
    let p = state.point(j);
    [p[0], p[1]]
}

/// `a_j` per the configured mode; rejects zero values and, in derivative
/// mode, sign changes between neighbours.
pub(crate) fn resolve_a(model: &JinXinModel, state: &SolutionState, mode: AMode) -> Result<Vec<f64>> {
    let n = state.num_points();
    let mut a: Vec<f64> = Vec::with_capacity(n);
    for j in 0..n {
        let d = (model.flux_derivative)(state.point(j)[0]);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::DegenerateSign { index: j });
        }
        if j > 0 && d.signum() != a[j - 1].signum() {
            return Err(Error::DegenerateSign { index: j });
        }
        a.push(match mode {
            AMode::Derivative => d,
            AMode::Sign => d.signum(),
        });
    }
    Ok(a)
}

/// Per-point decompositions, reusing the previous one while `a` repeats.
struct DecompCache {
    last: Option<EtaDecomposition>,
}

impl DecompCache {
    fn get(&mut self, a: f64, eta: f64) -> Result<EtaDecomposition> {
        if let Some(d) = self.last {
            if d.a == a {
                return Ok(d);
            }
        }
        let d = m_eta_decompose(a, eta)?;
        self.last = Some(d);
        Ok(d)
    }
}

fn boundary_solve(
    model: &JinXinModel,
    c: [f64; 2],
    d: [f64; 2],
    lambda: f64,
    u0: [f64; 2],
    u1: [f64; 2],
    x0: f64,
    t_new: f64,
    tau: f64,
    config: &SchemeConfig,
) -> Result<[f64; 2]> {
    let rhs = lambda * (d[0] * (u1[0] - u0[0]) + d[1] * (u1[1] - u0[1]));
    let forcing = model.forcing.as_ref().map_or(0.0, |g| g(x0, t_new));
    let rows = [
        PairRow::relaxation(c, u0, rhs, tau, model.epsilon, forcing),
        PairRow::linear(model.bc_coeffs.0, model.bc_coeffs.1, (model.bc_data)(t_new)),
    ];
    let (u, v) = solve_pair(
        rows,
        &*model.flux,
        &*model.flux_derivative,
        u0[0],
        config.newton_tol,
        config.newton_max_iters,
    )?;
    Ok([u, v])
}

fn jinxin_step(
    model: &JinXinModel,
    grid: &Grid1D,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
    kind: SchemeKind,
) -> Result<SolutionState> {
    if state.n != 2 {
        return Err(Error::DimensionMismatch(format!("Jin-Xin state needs 2 components, got {}", state.n)));
    }
    state.check_grid(grid)?;
    check_cfl(tau, 1.0, grid.h)?;
    let np = grid.num_points;
    let lambda = tau / grid.h;
    let t_new = state.time + tau;
    let eps = model.epsilon;

    let (a, eta) = match kind {
        SchemeKind::Upwind => (Vec::new(), 0.0),
        SchemeKind::Bap => (resolve_a(model, state, config.a_mode)?, eta_for(tau, eps, config)),
    };
    let mut cache = DecompCache { last: None };

    let mut out = state.clone();
    out.time = t_new;
    let last_interior = match config.right_boundary {
        RightBoundary::Extrapolate => np - 1,
        RightBoundary::ReferenceDirichlet => np - 2,
    };
    for j in 1..=last_interior {
        let um = pt(state, j - 1);
        let u = pt(state, j);
        let up = if j + 1 < np { pt(state, j + 1) } else { u };
        let star = match kind {
            SchemeKind::Upwind => jx_flux_update(&JX_A_PLUS, &JX_A_MINUS, lambda, um, u, up),
            SchemeKind::Bap => {
                let d = cache.get(a[j], eta)?;
                jx_flux_update(&d.flux_plus(), &d.flux_minus(), lambda, um, u, up)
            }
        };
        let v = jx_relax_v(model, star[0], star[1], grid.x(j), t_new, tau, eps);
        out.point_mut(j).copy_from_slice(&[star[0], v]);
    }
    if config.right_boundary == RightBoundary::ReferenceDirichlet {
        let data = model
            .right_data
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("reference Dirichlet right boundary needs right data".into()))?;
        let r = data(t_new);
        if r.len() != 2 {
            return Err(Error::DimensionMismatch(format!("right data has {} components", r.len())));
        }
        out.point_mut(np - 1).copy_from_slice(&r);
    }

    let (c, d) = match kind {
        SchemeKind::Upwind => ([-SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]),
        SchemeKind::Bap => {
            let dec = m_eta_decompose(a[0], eta)?;
            (dec.l_minus_a_inv(), dec.l_minus)
        }
    };
    let b = boundary_solve(model, c, d, lambda, pt(state, 0), pt(state, 1), grid.x0, t_new, tau, config)?;
    out.point_mut(0).copy_from_slice(&b);
    Ok(out)
}

/// One step of the classical upwind IMEX scheme (characteristic splitting of
/// `A`, outgoing characteristic plus boundary condition at `x0`).
pub fn jinxin_upwind_step(
    model: &JinXinModel,
    grid: &Grid1D,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
) -> Result<SolutionState> {
    jinxin_step(model, grid, state, tau, config, SchemeKind::Upwind)
}

/// One step of the BAP scheme built on the eigenvectors of `M(eta)`.
pub fn jinxin_bap_step(
    model: &JinXinModel,
    grid: &Grid1D,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
) -> Result<SolutionState> {
    jinxin_step(model, grid, state, tau, config, SchemeKind::Bap)
}

#[derive(Clone, Debug)]
pub struct JinXinStepper {
    pub model: JinXinModel,
    pub scheme: SchemeKind,
    pub config: SchemeConfig,
}

impl Stepper for JinXinStepper {
    fn components(&self) -> usize {
        2
    }

    fn max_speed(&self) -> f64 {
        1.0
    }

    fn initial_state(&self, grid: &Grid1D) -> Result<SolutionState> {
        let (fu, fv) = (&self.model.init_u, &self.model.init_v);
        SolutionState::from_fn(grid, 2, 0.0, |x| vec![fu(x), fv(x)])
    }

    fn step(&self, grid: &Grid1D, state: &SolutionState, tau: f64) -> Result<SolutionState> {
        jinxin_step(&self.model, grid, state, tau, &self.config, self.scheme)
    }
}
