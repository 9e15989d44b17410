use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::linalg::{inverse, solve_dense, spectral_split, RMatrix, SpectralSplit, DEFAULT_REALPART_TOL};
use crate::models::{derive_structure, DerivedStructure, LinearRelaxationSystem};

use super::eta::ETA_LIMIT_RATIO;
use super::{check_cfl, Grid1D, RightBoundary, SchemeConfig, SchemeKind, SolutionState, Stepper, SwitchRule};

/// Three-point update `U_j^{n+1} = C- U_{j-1} + C0 U_j + C+ U_{j+1}`
/// (row-major `n x n` blocks).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Stencil {
    n: usize,
    cm: Vec<f64>,
    c0: Vec<f64>,
    cp: Vec<f64>,
}

impl Stencil {
    pub fn from_matrices(cm: &RMatrix, c0: &RMatrix, cp: &RMatrix) -> Self {
        Self {
            n: c0.rows(),
            cm: cm.as_slice().to_vec(),
            c0: c0.as_slice().to_vec(),
            cp: cp.as_slice().to_vec(),
        }
    }

    pub fn apply(&self, um: &[f64], u: &[f64], up: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += self.cm[i * n + k] * um[k] + self.c0[i * n + k] * u[k] + self.cp[i * n + k] * up[k];
            }
            out[i] = s;
        }
    }
}

/// Flux-form interior stencil: explicit split flux with `P+- = A R+- L+-`,
/// then the implicit source `(I - kappa Q)^{-1}`.
pub(crate) fn flux_stencil(a: &RMatrix, split: &SpectralSplit, q: &RMatrix, lambda: f64, kappa: f64) -> Result<Stencil> {
    let n = a.rows();
    let pp = a.matmul(&split.projector_plus());
    let pm = a.matmul(&split.projector_minus());
    let g = inverse(&(&RMatrix::identity(n) - &q.scale(kappa)))?;
    let cm = g.matmul(&pp.scale(lambda));
    let c0 = g.matmul(&(&(&RMatrix::identity(n) - &pp.scale(lambda)) + &pm.scale(lambda)));
    let cp = g.matmul(&pm.scale(-lambda));
    Ok(Stencil::from_matrices(&cm, &c0, &cp))
}

/// Scales every row (and its right-hand side) by its largest entry.
pub(crate) fn equilibrate_rows(m: &mut RMatrix, rhs: &mut [f64]) {
    for i in 0..m.rows() {
        let s = m.row(i).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if s > 0.0 && s.is_finite() {
            for j in 0..m.cols() {
                m[(i, j)] /= s;
            }
            rhs[i] /= s;
        }
    }
}

/// Boundary solve: `n-` rows `W (I - kappa Q) U = W U0 - lambda D (U1 - U0)`
/// stacked with `B U = b`.
fn boundary_values(
    sys: &LinearRelaxationSystem,
    w: &RMatrix,
    d: &RMatrix,
    lambda: f64,
    kappa: f64,
    u0: &[f64],
    u1: &[f64],
    t_new: f64,
) -> Result<Vec<f64>> {
    let n = sys.n;
    if w.rows() + sys.b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} outgoing rows and {} boundary rows for {n} unknowns",
            w.rows(),
            sys.b.rows()
        )));
    }
    let top = w.matmul(&(&RMatrix::identity(n) - &sys.q.scale(kappa)));
    let diff: Vec<f64> = u1.iter().zip(u0).map(|(a, b)| a - b).collect();
    let wu = w.mul_vec(u0);
    let dd = d.mul_vec(&diff);
    let mut rhs: Vec<f64> = wu.iter().zip(&dd).map(|(a, b)| a - lambda * b).collect();
    let data = (sys.bc_data)(t_new);
    if data.len() != sys.b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "boundary data has {} entries, B has {} rows",
            data.len(),
            sys.b.rows()
        )));
    }
    rhs.extend_from_slice(&data);
    let mut m = top.vstack(&sys.b);
    equilibrate_rows(&mut m, &mut rhs);
    solve_dense(&m, &rhs)
}

#[derive(Clone, Copy)]
enum BoundaryForm<'a> {
    /// `W = L-`, `D = L- A`
    Characteristic,
    /// `W = L- A^{-1}`, `D = L-`
    Inverse(&'a RMatrix),
}

fn linear_step(
    sys: &LinearRelaxationSystem,
    split: &SpectralSplit,
    form: BoundaryForm<'_>,
    grid: &Grid1D,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
    max_speed: f64,
) -> Result<SolutionState> {
    let n = sys.n;
    if state.n != n {
        return Err(Error::DimensionMismatch(format!("state has {} components, system {n}", state.n)));
    }
    state.check_grid(grid)?;
    check_cfl(tau, max_speed, grid.h)?;
    let np = grid.num_points;
    let lambda = tau / grid.h;
    let kappa = tau / sys.epsilon;
    let t_new = state.time + tau;
    let stencil = flux_stencil(&sys.a, split, &sys.q, lambda, kappa)?;

    let mut out = state.clone();
    out.time = t_new;
    let last_interior = match config.right_boundary {
        RightBoundary::Extrapolate => np - 1,
        RightBoundary::ReferenceDirichlet => np - 2,
    };
    let mut buf = vec![0.0; n];
    for j in 1..=last_interior {
        let up = if j + 1 < np { state.point(j + 1) } else { state.point(j) };
        stencil.apply(state.point(j - 1), state.point(j), up, &mut buf);
        out.point_mut(j).copy_from_slice(&buf);
    }
    if config.right_boundary == RightBoundary::ReferenceDirichlet {
        let data = sys
            .right_data
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("reference Dirichlet right boundary needs right data".into()))?;
        let r = data(t_new);
        if r.len() != n {
            return Err(Error::DimensionMismatch(format!("right data has {} components", r.len())));
        }
        out.point_mut(np - 1).copy_from_slice(&r);
    }

    let (w, d) = match form {
        BoundaryForm::Characteristic => (split.l_minus.clone(), split.l_minus.matmul(&sys.a)),
        BoundaryForm::Inverse(a_inv) => (split.l_minus.matmul(a_inv), split.l_minus.clone()),
    };
    let b = boundary_values(sys, &w, &d, lambda, kappa, state.point(0), state.point(1), t_new)?;
    out.point_mut(0).copy_from_slice(&b);
    Ok(out)
}

/// One step of the upwind IMEX scheme for a linear relaxation system.
pub fn linear_upwind_step(
    sys: &LinearRelaxationSystem,
    split_a: &SpectralSplit,
    grid: &Grid1D,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
) -> Result<SolutionState> {
    let speed = sys.max_speed()?;
    linear_step(sys, split_a, BoundaryForm::Characteristic, grid, state, tau, config, speed)
}

/// Split used by the BAP scheme at a given `(tau, eps)`: the hard switch
/// selects the splits of `A` or the limit pair; the smooth rule splits
/// `M(1, eta) = A^{-1}(I - eta Q)` with `eta = (tau/eps)^p`.
pub fn linear_split<'a>(
    sys: &LinearRelaxationSystem,
    derived: &'a DerivedStructure,
    tau: f64,
    epsilon: f64,
    config: &SchemeConfig,
) -> Result<Cow<'a, SpectralSplit>> {
    match config.switch_rule {
        SwitchRule::Auto | SwitchRule::HardTauEps => Ok(if tau < epsilon {
            Cow::Borrowed(&derived.split_a)
        } else {
            Cow::Borrowed(&derived.split_inf)
        }),
        SwitchRule::SmoothEta => {
            let ratio = tau / epsilon;
            if ratio > ETA_LIMIT_RATIO {
                return Ok(Cow::Borrowed(&derived.split_inf));
            }
            let eta = ratio.powi(config.p_exponent as i32);
            if eta == 0.0 {
                return Ok(Cow::Borrowed(&derived.split_a));
            }
            let m = derived.a_inv.matmul(&(&RMatrix::identity(sys.n) - &sys.q.scale(eta)));
            Ok(Cow::Owned(spectral_split(&m, DEFAULT_REALPART_TOL)?))
        }
    }
}

/// One step of the BAP scheme for a linear relaxation system. Under the hard
/// switch with `tau < eps` this is exactly the upwind step.
pub fn linear_bap_step(
    sys: &LinearRelaxationSystem,
    derived: &DerivedStructure,
    grid: &Grid1D,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
) -> Result<SolutionState> {
    let speed = sys.max_speed()?;
    bap_with_speed(sys, derived, grid, state, tau, config, speed)
}

fn bap_with_speed(
    sys: &LinearRelaxationSystem,
    derived: &DerivedStructure,
    grid: &Grid1D,
    state: &SolutionState,
    tau: f64,
    config: &SchemeConfig,
    speed: f64,
) -> Result<SolutionState> {
    let hard = matches!(config.switch_rule, SwitchRule::Auto | SwitchRule::HardTauEps);
    if hard && tau < sys.epsilon {
        return linear_step(sys, &derived.split_a, BoundaryForm::Characteristic, grid, state, tau, config, speed);
    }
    let split = linear_split(sys, derived, tau, sys.epsilon, config)?;
    linear_step(sys, &split, BoundaryForm::Inverse(&derived.a_inv), grid, state, tau, config, speed)
}

#[derive(Clone, Debug)]
pub struct LinearStepper {
    pub sys: LinearRelaxationSystem,
    pub derived: DerivedStructure,
    pub scheme: SchemeKind,
    pub config: SchemeConfig,
    speed: f64,
}

impl LinearStepper {
    pub fn new(sys: LinearRelaxationSystem, scheme: SchemeKind, config: SchemeConfig) -> Result<Self> {
        let derived = derive_structure(&sys)?;
        let speed = sys.max_speed()?;
        Ok(Self {
            sys,
            derived,
            scheme,
            config,
            speed,
        })
    }
}

impl Stepper for LinearStepper {
    fn components(&self) -> usize {
        self.sys.n
    }

    fn max_speed(&self) -> f64 {
        self.speed
    }

    fn initial_state(&self, grid: &Grid1D) -> Result<SolutionState> {
        SolutionState::from_fn(grid, self.sys.n, 0.0, |x| (self.sys.init)(x))
    }

    fn step(&self, grid: &Grid1D, state: &SolutionState, tau: f64) -> Result<SolutionState> {
        match self.scheme {
            SchemeKind::Upwind => linear_step(
                &self.sys,
                &self.derived.split_a,
                BoundaryForm::Characteristic,
                grid,
                state,
                tau,
                &self.config,
                self.speed,
            ),
            SchemeKind::Bap => bap_with_speed(&self.sys, &self.derived, grid, state, tau, &self.config, self.speed),
        }
    }
}
