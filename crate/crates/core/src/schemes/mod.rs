//! Time stepping: the classical first-order upwind IMEX scheme and the
//! boundary asymptotic-preserving (BAP) scheme, for the Jin-Xin model and for
//! general linear relaxation systems.

mod eta;
mod jinxin;
mod linear;
pub(crate) mod pointsolve;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use eta::{eta_for, m_eta_decompose, EtaDecomposition, Mat2, ETA_LIMIT_RATIO};
pub use jinxin::{jinxin_bap_step, jinxin_upwind_step, JinXinStepper, JX_A_MINUS, JX_A_PLUS};
pub use linear::{linear_bap_step, linear_split, linear_upwind_step, LinearStepper};
pub(crate) use jinxin::{jx_flux_update, jx_relax_v, resolve_a};
pub(crate) use linear::{equilibrate_rows, flux_stencil, Stencil};

/// Uniform grid `x_j = x0 + j h`, `j = 0..num_points`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub x0: f64,
    pub h: f64,
    pub num_points: usize,
}

impl Grid1D {
    pub fn new(x0: f64, h: f64, num_points: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidInput(format!("grid needs finite x0 and h > 0, got x0 = {x0}, h = {h}")));
        }
        if num_points < 3 {
            return Err(Error::InvalidInput(format!("grid needs at least 3 points, got {num_points}")));
        }
        Ok(Self { x0, h, num_points })
    }

    /// `nx` cells on `[left, right]` (so `nx + 1` points).
    pub fn uniform(left: f64, right: f64, nx: usize) -> Result<Self> {
        if !(right > left) || nx == 0 {
            return Err(Error::InvalidInput(format!("bad interval [{left}, {right}] with {nx} cells")));
        }
        Self::new(left, (right - left) / nx as f64, nx + 1)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }

    pub fn x_last(&self) -> f64 {
        self.x(self.num_points - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.x(j)).collect()
    }

    /// Number of cells.
    pub fn nx(&self) -> usize {
        self.num_points - 1
    }
}

/// Grid function at one time level; `values` holds `n` components per point,
/// point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionState {
    pub time: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl SolutionState {
    pub fn new(time: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() % n != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not split into points of {n} components",
                values.len()
            )));
        }
        Ok(Self { time, n, values })
    }

    pub fn from_fn(grid: &Grid1D, n: usize, time: f64, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(n * grid.num_points);
        for j in 0..grid.num_points {
            let v = f(grid.x(j));
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!("initial data returned {} components, expected {n}", v.len())));
            }
            values.extend_from_slice(&v);
        }
        Ok(Self { time, n, values })
    }

    pub fn num_points(&self) -> usize {
        self.values.len() / self.n
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn point_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().skip(k).step_by(self.n).copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        if self.num_points() != grid.num_points {
            return Err(Error::DimensionMismatch(format!(
                "state has {} points, grid has {}",
                self.num_points(),
                grid.num_points
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Upwind,
    Bap,
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "upwind" => Ok(Self::Upwind),
            "bap" => Ok(Self::Bap),
            _ => Err(Error::InvalidInput(format!("unknown scheme '{s}' (expected upwind or bap)"))),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Upwind => "upwind",
            Self::Bap => "bap",
        })
    }
}

/// How `a` enters `M(eta)` on the Jin-Xin path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AMode {
    /// `a = f'(u_j)`
    Derivative,
    /// `a = sign f'(u_j)`
    Sign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RightBoundary {
    /// Dirichlet values from the problem's right data.
    ReferenceDirichlet,
    /// Ghost point `U_N = U_{N-1}`.
    Extrapolate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchRule {
    /// Smooth for the Jin-Xin model, hard for linear systems.
    Auto,
    /// `eta = (tau/eps)^p`
    SmoothEta,
    /// Pure-A operators when `tau < eps`, limit operators otherwise.
    HardTauEps,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub p_exponent: u32,
    pub a_mode: AMode,
    pub right_boundary: RightBoundary,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub switch_rule: SwitchRule,
    /// Fixed time step overriding `cfl h / max speed`.
    pub tau: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl: 0.8,
            p_exponent: 2,
            a_mode: AMode::Derivative,
            right_boundary: RightBoundary::Extrapolate,
            newton_tol: 1e-12,
            newton_max_iters: 50,
            switch_rule: SwitchRule::Auto,
            tau: None,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidInput(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if self.p_exponent < 2 {
            return Err(Error::InvalidInput(format!("p must be at least 2, got {}", self.p_exponent)));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iters == 0 {
            return Err(Error::InvalidInput("newton_tol and newton_max_iters must be positive".into()));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidInput(format!("tau must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Time step for a grid and maximal characteristic speed.
    pub fn time_step(&self, grid: &Grid1D, max_speed: f64) -> f64 {
        self.tau.unwrap_or(self.cfl * grid.h / max_speed)
    }
}

pub(crate) fn check_cfl(tau: f64, max_speed: f64, h: f64) -> Result<()> {
    let ratio = tau * max_speed / h;
    if !(tau > 0.0) || ratio > 1.0 + 1e-9 {
        return Err(Error::CflViolation { ratio, limit: 1.0 });
    }
    Ok(())
}

/// A one-step method bound to a problem.
pub trait Stepper {
    fn components(&self) -> usize;
    fn max_speed(&self) -> f64;
    fn initial_state(&self, grid: &Grid1D) -> Result<SolutionState>;
    fn step(&self, grid: &Grid1D, state: &SolutionState, tau: f64) -> Result<SolutionState>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Initial state followed by the states at the requested output times,
    /// ending with `t_final`.
    pub states: Vec<SolutionState>,
    pub tau: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &SolutionState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Integrates to `t_final` with a fixed step, shortening the last step before
/// each output time so that it is hit exactly.
pub fn run_ibvp(
    stepper: &dyn Stepper,
    grid: &Grid1D,
    t_final: f64,
    config: &SchemeConfig,
    output_times: &[f64],
) -> Result<Trajectory> {
    config.validate()?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidInput(format!("t_final must be nonnegative, got {t_final}")));
    }
    let tau = config.time_step(grid, stepper.max_speed());
    let mut state = stepper.initial_state(grid)?;
    let mut states = vec![state.clone()];
    if t_final == 0.0 {
        return Ok(Trajectory { states, tau, steps: 0 });
    }

    let mut targets: Vec<f64> = output_times.iter().copied().filter(|&t| t > 0.0 && t < t_final).collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup();
    targets.push(t_final);

    let mut steps = 0usize;
    for &target in &targets {
        let slack = 1e-12 * target.max(1.0);
        while state.time < target - slack {
            let dt = if state.time + tau >= target - slack { target - state.time } else { tau };
            let mut next = stepper.step(grid, &state, dt)?;
            steps += 1;
            if !next.is_finite() {
                return Err(Error::NonFinite { step: steps });
            }
            if (next.time - target).abs() <= slack {
                next.time = target;
            }
            state = next;
        }
        states.push(state.clone());
    }
    log::debug!("run_ibvp: {steps} steps of tau = {tau:e} to t = {t_final}");
    Ok(Trajectory { states, tau, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_uniform() {
        let g = Grid1D::uniform(0.0, 2.0, 50).unwrap();
        assert_eq!(g.num_points, 51);
        assert!((g.x_last() - 2.0).abs() < 1e-14);
        assert!(Grid1D::new(0.0, 0.0, 10).is_err());
        assert!(Grid1D::new(0.0, 0.1, 2).is_err());
    }

    #[test]
    fn state_components() {
        let g = Grid1D::uniform(0.0, 1.0, 4).unwrap();
        let s = SolutionState::from_fn(&g, 2, 0.0, |x| vec![x, -x]).unwrap();
        assert_eq!(s.num_points(), 5);
        assert_eq!(s.point(2), &[0.5, -0.5]);
        assert_eq!(s.component(1)[4], -1.0);
    }

    #[test]
    fn config_checks() {
        assert!(SchemeConfig::default().validate().is_ok());
        let bad = SchemeConfig {
            p_exponent: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!("BAP".parse::<SchemeKind>().unwrap() == SchemeKind::Bap);
        assert!("x".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn cfl_guard() {
        assert!(check_cfl(0.8, 1.0, 1.0).is_ok());
        assert!(matches!(check_cfl(1.1, 1.0, 1.0), Err(Error::CflViolation { .. })));
    }
}
