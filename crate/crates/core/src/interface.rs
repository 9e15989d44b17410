//! Interface problems with a piecewise-constant relaxation time `eps(x)`,
//! solved on one grid by the rewritten BAP scheme: at each point the
//! outgoing-to-the-right rows use the operators selected by `eps(x_j+)` and
//! the outgoing-to-the-left rows those selected by `eps(x_j-)`.

use crate::error::{Error, Result};
use crate::linalg::{inverse, RMatrix};
use crate::models::{derive_structure, DerivedStructure, JinXinModel, LinearRelaxationSystem};
use crate::schemes::pointsolve::{solve_pair, PairRow};
use crate::schemes::{
    check_cfl, equilibrate_rows, eta_for, flux_stencil, jx_flux_update, jx_relax_v, linear_split, m_eta_decompose,
    resolve_a, Grid1D, RightBoundary, SchemeConfig, SchemeKind, SolutionState, Stencil, Stepper, JX_A_MINUS,
    JX_A_PLUS,
};

/// Piecewise-constant `eps(x)`; the value at a breakpoint belongs to the
/// right piece.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseEpsilon {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseEpsilon {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput("relaxation times must be positive".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(eps: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![eps])
    }

    /// `left` for `x < at`, `right` for `x >= at`.
    pub fn two_piece(at: f64, left: f64, right: f64) -> Result<Self> {
        Self::new(vec![at], vec![left, right])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b <= x)]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// One-sided limits `(eps(x-), eps(x+))`.
pub fn epsilon_limits(eps: &PiecewiseEpsilon, x: f64) -> (f64, f64) {
    let right = eps.eval(x);
    let left = eps.values[eps.breakpoints.partition_point(|&b| b < x)];
    (left, right)
}

/// Grid with the one-sided relaxation times at every point.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceGrid {
    pub grid: Grid1D,
    pub eps_left: Vec<f64>,
    pub eps_right: Vec<f64>,
    /// Breakpoints after snapping to grid points.
    pub breakpoints: Vec<f64>,
}

impl InterfaceGrid {
    /// Breakpoints off the grid are moved to the nearest grid point.
    pub fn new(grid: Grid1D, eps: &PiecewiseEpsilon) -> Result<Self> {
        let mut snapped = Vec::with_capacity(eps.breakpoints.len());
        for &b in &eps.breakpoints {
            let k = ((b - grid.x0) / grid.h).round();
            let k = k.clamp(0.0, (grid.num_points - 1) as f64) as usize;
            let xb = grid.x(k);
            if (xb - b).abs() > 1e-9 * grid.h {
                log::warn!("breakpoint {b} is not on the grid; snapped to {xb}");
            }
            if snapped.last().is_some_and(|&p| p >= xb) {
                return Err(Error::InvalidInput(format!("breakpoints collapse onto x = {xb} after snapping")));
            }
            snapped.push(xb);
        }
        let pe = PiecewiseEpsilon::new(snapped.clone(), eps.values.clone())?;
        let mut eps_left = Vec::with_capacity(grid.num_points);
        let mut eps_right = Vec::with_capacity(grid.num_points);
        for j in 0..grid.num_points {
            let (l, r) = epsilon_limits(&pe, grid.x(j));
            eps_left.push(l);
            eps_right.push(r);
        }
        Ok(Self {
            grid,
            eps_left,
            eps_right,
            breakpoints: snapped,
        })
    }

    /// Indices of grid points lying on a breakpoint.
    pub fn interface_indices(&self) -> Vec<usize> {
        (0..self.grid.num_points).filter(|&j| self.eps_left[j] != self.eps_right[j]).collect()
    }
}

/// `(L-^{r}, L+^{l})` for a linear system at one point.
pub fn select_operators_linear(
    sys: &LinearRelaxationSystem,
    derived: &DerivedStructure,
    eps_left: f64,
    eps_right: f64,
    tau: f64,
    config: &SchemeConfig,
) -> Result<(RMatrix, RMatrix)> {
    let right = linear_split(sys, derived, tau, eps_right, config)?;
    let left = linear_split(sys, derived, tau, eps_left, config)?;
    Ok((right.l_minus.clone(), left.l_plus.clone()))
}

/// `(L-^{r}, L+^{l})` for the Jin-Xin model with `a` at one point.
pub fn select_operators_jinxin(
    a: f64,
    eps_left: f64,
    eps_right: f64,
    tau: f64,
    config: &SchemeConfig,
) -> Result<([f64; 2], [f64; 2])> {
    let right = m_eta_decompose(a, eta_for(tau, eps_right, config))?;
    let left = m_eta_decompose(a, eta_for(tau, eps_left, config))?;
    Ok((right.l_minus, left.l_plus))
}

fn ghost(state: &SolutionState, j: isize) -> &[f64] {
    let last = state.num_points() as isize - 1;
    state.point(j.clamp(0, last) as usize)
}

fn right_dirichlet(data: Option<&crate::models::VectorFn>, n: usize, t: f64) -> Result<Vec<f64>> {
    let data = data.ok_or_else(|| Error::InvalidInput("reference Dirichlet right boundary needs right data".into()))?;
    let r = data(t);
    if r.len() != n {
        return Err(Error::DimensionMismatch(format!("right data has {} components", r.len())));
    }
    Ok(r)
}

/// One step for the Jin-Xin interface problem. `Bap` is the rewritten scheme
/// (flux form where `eps(x_j-) = eps(x_j+)`, stacked one-sided rows
/// otherwise); `Upwind` is the classical scheme with `eps(x_j)`.
pub fn interface_step_jinxin(
    model: &JinXinModel,
    igrid: &InterfaceGrid,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
    scheme: SchemeKind,
) -> Result<SolutionState> {
    let grid = &igrid.grid;
    if state.n != 2 {
        return Err(Error::DimensionMismatch(format!("Jin-Xin state needs 2 components, got {}", state.n)));
    }
    state.check_grid(grid)?;
    check_cfl(tau, 1.0, grid.h)?;
    let np = grid.num_points;
    let lambda = tau / grid.h;
    let t_new = state.time + tau;
    let a = match scheme {
        SchemeKind::Bap => resolve_a(model, state, config.a_mode)?,
        SchemeKind::Upwind => Vec::new(),
    };
    let mut out = state.clone();
    out.time = t_new;
    let last = match config.right_boundary {
        RightBoundary::Extrapolate => np,
        RightBoundary::ReferenceDirichlet => np - 1,
    };
    for j in 0..last {
        let ji = j as isize;
        let p = |k: isize| {
            let s = ghost(state, k);
            [s[0], s[1]]
        };
        let (um, u, up) = (p(ji - 1), p(ji), p(ji + 1));
        let x = grid.x(j);
        let (el, er) = (igrid.eps_left[j], igrid.eps_right[j]);
        let new = match scheme {
            SchemeKind::Upwind => {
                let s = jx_flux_update(&JX_A_PLUS, &JX_A_MINUS, lambda, um, u, up);
                [s[0], jx_relax_v(model, s[0], s[1], x, t_new, tau, er)]
            }
            SchemeKind::Bap if el == er => {
                let d = m_eta_decompose(a[j], eta_for(tau, er, config)).map_err(|_| Error::DegenerateSign { index: j })?;
                let s = jx_flux_update(&d.flux_plus(), &d.flux_minus(), lambda, um, u, up);
                [s[0], jx_relax_v(model, s[0], s[1], x, t_new, tau, er)]
            }
            SchemeKind::Bap => {
                let dr = m_eta_decompose(a[j], eta_for(tau, er, config))?;
                let dl = m_eta_decompose(a[j], eta_for(tau, el, config))?;
                let forcing = model.forcing.as_ref().map_or(0.0, |g| g(x, t_new));
                let lr = dr.l_minus;
                let ll = dl.l_plus;
                let rhs_r = lambda * (lr[0] * (up[0] - u[0]) + lr[1] * (up[1] - u[1]));
                let rhs_l = lambda * (ll[0] * (u[0] - um[0]) + ll[1] * (u[1] - um[1]));
                let rows = [
                    PairRow::relaxation(dr.l_minus_a_inv(), u, rhs_r, tau, er, forcing),
                    PairRow::relaxation(dl.l_plus_a_inv(), u, rhs_l, tau, el, forcing),
                ];
                let (nu, nv) = solve_pair(
                    rows,
                    &*model.flux,
                    &*model.flux_derivative,
                    u[0],
                    config.newton_tol,
                    config.newton_max_iters,
                )?;
                [nu, nv]
            }
        };
        out.point_mut(j).copy_from_slice(&new);
    }
    if config.right_boundary == RightBoundary::ReferenceDirichlet {
        let r = right_dirichlet(model.right_data.as_ref(), 2, t_new)?;
        out.point_mut(np - 1).copy_from_slice(&r);
    }
    Ok(out)
}

/// Per-point operator of the linear interface scheme.
fn linear_point_operator(
    sys: &LinearRelaxationSystem,
    derived: &DerivedStructure,
    eps_left: f64,
    eps_right: f64,
    lambda: f64,
    tau: f64,
    config: &SchemeConfig,
    scheme: SchemeKind,
) -> Result<Stencil> {
    let n = sys.n;
    match scheme {
        SchemeKind::Upwind => flux_stencil(&sys.a, &derived.split_a, &sys.q, lambda, tau / eps_right),
        SchemeKind::Bap if eps_left == eps_right => {
            let split = linear_split(sys, derived, tau, eps_right, config)?;
            flux_stencil(&sys.a, &split, &sys.q, lambda, tau / eps_right)
        }
        SchemeKind::Bap => {
            let (lr, ll) = select_operators_linear(sys, derived, eps_left, eps_right, tau, config)?;
            let wr = lr.matmul(&derived.a_inv);
            let wl = ll.matmul(&derived.a_inv);
            let id = RMatrix::identity(n);
            let mut m = wr
                .matmul(&(&id - &sys.q.scale(tau / eps_right)))
                .vstack(&wl.matmul(&(&id - &sys.q.scale(tau / eps_left))));
            let nr = lr.rows();
            if m.rows() != n {
                return Err(Error::DimensionMismatch(format!("stacked interface rows: {} for {n} unknowns", m.rows())));
            }
            let zr = RMatrix::zeros(nr, n);
            let zl = RMatrix::zeros(n - nr, n);
            let raw_m = zr.vstack(&ll.scale(lambda));
            let raw_0 = (&wr + &lr.scale(lambda)).vstack(&(&wl - &ll.scale(lambda)));
            let raw_p = lr.scale(-lambda).vstack(&zl);
            let mut scale = vec![1.0; n];
            equilibrate_rows(&mut m, &mut scale);
            let scale_rows = |x: &RMatrix| {
                let mut y = x.clone();
                for i in 0..n {
                    for k in 0..n {
                        y[(i, k)] *= scale[i];
                    }
                }
                y
            };
            let minv = inverse(&m)?;
            Ok(Stencil::from_matrices(
                &minv.matmul(&scale_rows(&raw_m)),
                &minv.matmul(&scale_rows(&raw_0)),
                &minv.matmul(&scale_rows(&raw_p)),
            ))
        }
    }
}

/// One step for a linear interface problem.
pub fn interface_step_linear(
    sys: &LinearRelaxationSystem,
    derived: &DerivedStructure,
    igrid: &InterfaceGrid,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
    scheme: SchemeKind,
) -> Result<SolutionState> {
    let speed = sys.max_speed()?;
    linear_with_speed(sys, derived, igrid, state, tau, config, scheme, speed)
}

fn linear_with_speed(
    sys: &LinearRelaxationSystem,
    derived: &DerivedStructure,
    igrid: &InterfaceGrid,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
    scheme: SchemeKind,
    speed: f64,
) -> Result<SolutionState> {
    let grid = &igrid.grid;
    let n = sys.n;
    if state.n != n {
        return Err(Error::DimensionMismatch(format!("state has {} components, system {n}", state.n)));
    }
    state.check_grid(grid)?;
    check_cfl(tau, speed, grid.h)?;
    let np = grid.num_points;
    let lambda = tau / grid.h;
    let t_new = state.time + tau;

    let mut cache: Vec<((u64, u64), Stencil)> = Vec::new();
    let mut out = state.clone();
    out.time = t_new;
    let last = match config.right_boundary {
        RightBoundary::Extrapolate => np,
        RightBoundary::ReferenceDirichlet => np - 1,
    };
    let mut buf = vec![0.0; n];
    for j in 0..last {
        let key = match scheme {
            SchemeKind::Upwind => (0, igrid.eps_right[j].to_bits()),
            SchemeKind::Bap => (igrid.eps_left[j].to_bits(), igrid.eps_right[j].to_bits()),
        };
        let idx = match cache.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                let op = linear_point_operator(
                    sys,
                    derived,
                    igrid.eps_left[j],
                    igrid.eps_right[j],
                    lambda,
                    tau,
                    config,
                    scheme,
                )?;
                cache.push((key, op));
                cache.len() - 1
            }
        };
        let ji = j as isize;
        cache[idx].1.apply(ghost(state, ji - 1), ghost(state, ji), ghost(state, ji + 1), &mut buf);
        out.point_mut(j).copy_from_slice(&buf);
    }
    if config.right_boundary == RightBoundary::ReferenceDirichlet {
        let r = right_dirichlet(sys.right_data.as_ref(), n, t_new)?;
        out.point_mut(np - 1).copy_from_slice(&r);
    }
    Ok(out)
}

/// Checks that the stacked per-point matrix of the rewritten scheme is
/// nonsingular at every distinct `(eps-, eps+)` pair of the grid.
pub fn check_point_systems(
    sys: &LinearRelaxationSystem,
    derived: &DerivedStructure,
    igrid: &InterfaceGrid,
    tau: f64,
    config: &SchemeConfig,
) -> Result<()> {
    let lambda = tau / igrid.grid.h;
    let mut seen: Vec<(u64, u64)> = Vec::new();
    for j in 0..igrid.grid.num_points {
        let key = (igrid.eps_left[j].to_bits(), igrid.eps_right[j].to_bits());
        if !seen.contains(&key) {
            seen.push(key);
            linear_point_operator(
                sys,
                derived,
                igrid.eps_left[j],
                igrid.eps_right[j],
                lambda,
                tau,
                config,
                SchemeKind::Bap,
            )?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub enum InterfaceProblem {
    JinXin(JinXinModel),
    Linear {
        sys: LinearRelaxationSystem,
        derived: DerivedStructure,
    },
}

impl InterfaceProblem {
    pub fn linear(sys: LinearRelaxationSystem) -> Result<Self> {
        let derived = derive_structure(&sys)?;
        Ok(Self::Linear { sys, derived })
    }
}

#[derive(Clone, Debug)]
pub struct InterfaceStepper {
    pub problem: InterfaceProblem,
    pub igrid: InterfaceGrid,
    pub scheme: SchemeKind,
    pub config: SchemeConfig,
    speed: f64,
}

impl InterfaceStepper {
    pub fn new(problem: InterfaceProblem, igrid: InterfaceGrid, scheme: SchemeKind, config: SchemeConfig) -> Result<Self> {
        let speed = match &problem {
            InterfaceProblem::JinXin(_) => 1.0,
            InterfaceProblem::Linear { sys, .. } => sys.max_speed()?,
        };
        Ok(Self {
            problem,
            igrid,
            scheme,
            config,
            speed,
        })
    }
}

impl Stepper for InterfaceStepper {
    fn components(&self) -> usize {
        match &self.problem {
            InterfaceProblem::JinXin(_) => 2,
            InterfaceProblem::Linear { sys, .. } => sys.n,
        }
    }

    fn max_speed(&self) -> f64 {
        self.speed
    }

    fn initial_state(&self, grid: &Grid1D) -> Result<SolutionState> {
        match &self.problem {
            InterfaceProblem::JinXin(m) => SolutionState::from_fn(grid, 2, 0.0, |x| vec![(m.init_u)(x), (m.init_v)(x)]),
            InterfaceProblem::Linear { sys, .. } => SolutionState::from_fn(grid, sys.n, 0.0, |x| (sys.init)(x)),
        }
    }

    fn step(&self, grid: &Grid1D, state: &SolutionState, tau: f64) -> Result<SolutionState> {
        if *grid != self.igrid.grid {
            return Err(Error::DimensionMismatch("stepper is bound to a different grid".into()));
        }
        match &self.problem {
            InterfaceProblem::JinXin(m) => interface_step_jinxin(m, &self.igrid, state, tau, &self.config, self.scheme),
            InterfaceProblem::Linear { sys, derived } => {
                linear_with_speed(sys, derived, &self.igrid, state, tau, &self.config, self.scheme, self.speed)
            }
        }
    }
}
