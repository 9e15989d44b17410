//! Registry of the numerical experiments: problem data, default parameters,
//! and how each one is stepped and referenced.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use relaxbl_core::interface::{InterfaceGrid, InterfaceProblem, InterfaceStepper, PiecewiseEpsilon};
use relaxbl_core::linalg::RMatrix;
use relaxbl_core::models::{JinXinModel, LinearRelaxationSystem};
use relaxbl_core::reference::{
    equilibrium_scalar_solve, example_closed_form, jinxin_layer_amplitude, jinxin_limit_on_grid, restrict,
    AsymptoticSolution,
};
use relaxbl_core::schemes::{
    run_ibvp, Grid1D, JinXinStepper, LinearStepper, RightBoundary, SchemeConfig, SchemeKind, SolutionState, Stepper,
};

use crate::error::{HarnessError, Result};

pub const EXAMPLE_IDS: [&str; 7] = ["1a", "1b", "1c", "2", "3", "4", "5"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    ClosedForm,
    FineMesh,
    AsymptoticLimit,
}

#[derive(Clone, Debug)]
pub enum ProblemDef {
    JinXin(JinXinModel),
    Linear(LinearRelaxationSystem),
    InterfaceJinXin { model: JinXinModel, eps: PiecewiseEpsilon },
    InterfaceLinear { sys: LinearRelaxationSystem, eps: PiecewiseEpsilon },
}

impl ProblemDef {
    pub fn components(&self) -> usize {
        match self {
            ProblemDef::JinXin(_) | ProblemDef::InterfaceJinXin { .. } => 2,
            ProblemDef::Linear(s) | ProblemDef::InterfaceLinear { sys: s, .. } => s.n,
        }
    }

    /// Smallest relaxation time in the problem.
    pub fn min_epsilon(&self) -> f64 {
        match self {
            ProblemDef::JinXin(m) => m.epsilon,
            ProblemDef::Linear(s) => s.epsilon,
            ProblemDef::InterfaceJinXin { eps, .. } | ProblemDef::InterfaceLinear { eps, .. } => eps.min_value(),
        }
    }

    /// Interface positions (empty for boundary problems).
    pub fn interfaces(&self) -> Vec<f64> {
        match self {
            ProblemDef::InterfaceJinXin { eps, .. } | ProblemDef::InterfaceLinear { eps, .. } => eps.breakpoints().to_vec(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Example {
    pub id: String,
    pub title: &'static str,
    pub summary: &'static str,
    pub problem: ProblemDef,
    pub domain: (f64, f64),
    pub nx: Vec<usize>,
    pub t_final: f64,
    pub cfl: f64,
    pub p: u32,
    pub tau: Option<f64>,
    pub reference: ReferenceKind,
    pub h_fine: Option<f64>,
    pub component_names: Vec<String>,
    /// Key for `example_closed_form`.
    pub closed_form: Option<String>,
}

fn names(n: &[&str]) -> Vec<String> {
    n.iter().map(|s| s.to_string()).collect()
}

fn example2_flux() -> (Arc<dyn Fn(f64) -> f64 + Send + Sync>, Arc<dyn Fn(f64) -> f64 + Send + Sync>) {
    (Arc::new(|u: f64| ((-u).exp() - 1.0) / 4.0), Arc::new(|u: f64| -(-u).exp() / 4.0))
}

/// Right-edge Dirichlet data from a closed form.
fn closed_form_edge(sol: &AsymptoticSolution, x_right: f64) -> Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync> {
    let sol = sol.clone();
    Arc::new(move |t| sol.eval(x_right, t))
}

/// Builds an example; `epsilon` overrides the relaxation time (the small
/// piece `eps0` for the interface examples).
pub fn example(id: &str, epsilon: Option<f64>) -> Result<Example> {
    let all = vec![50, 100, 200, 400, 800];
    let ex = match id {
        "1a" => {
            let eps = epsilon.unwrap_or(1e-9);
            let cf = example_closed_form("1a", eps)?;
            let model = JinXinModel::linear(-0.5, eps)
                .with_boundary(1.0, 1.0, Arc::new(|t: f64| (t / 2.0).sin() + t.sin()))
                .with_initial(Arc::new(|x: f64| 2.0 * x.sin()), Arc::new(|x: f64| -x.sin()))
                .with_right_data(closed_form_edge(&cf, 2.0));
            Example {
                id: id.into(),
                title: "linear Jin-Xin, f = -u/2, boundary layer",
                summary: "eps=1e-9, [0,2], t=0.5, cfl=0.8, p=2, N_x=50..800",
                problem: ProblemDef::JinXin(model),
                domain: (0.0, 2.0),
                nx: all,
                t_final: 0.5,
                cfl: 0.8,
                p: 2,
                tau: None,
                reference: ReferenceKind::ClosedForm,
                h_fine: None,
                component_names: names(&["u", "v"]),
                closed_form: Some("1a".into()),
            }
        }
        "1b" => {
            let eps = epsilon.unwrap_or(1e-9);
            let cf = example_closed_form("1b", eps)?;
            let model = JinXinModel::linear(0.5, eps)
                .with_boundary(1.0, 1.0, Arc::new(|t: f64| -3.0 * (t / 2.0).sin()))
                .with_initial(Arc::new(|x: f64| 2.0 * x.sin()), Arc::new(|x: f64| x.sin()))
                .with_right_data(closed_form_edge(&cf, 2.0));
            Example {
                id: id.into(),
                title: "linear Jin-Xin, f = u/2, no boundary layer",
                summary: "eps=1e-9, [0,2], t=0.5, cfl=0.8, p=2, N_x=50..800",
                problem: ProblemDef::JinXin(model),
                domain: (0.0, 2.0),
                nx: all,
                t_final: 0.5,
                cfl: 0.8,
                p: 2,
                tau: None,
                reference: ReferenceKind::ClosedForm,
                h_fine: None,
                component_names: names(&["u", "v"]),
                closed_form: Some("1b".into()),
            }
        }
        "1c" => {
            let eps = epsilon.unwrap_or(1.0);
            let cf = example_closed_form("1c", eps)?;
            let model = JinXinModel::linear(0.5, eps)
                .with_boundary(1.0, 1.0, Arc::new(|_| 0.0))
                .with_initial(Arc::new(|x: f64| x.sin()), Arc::new(|x: f64| -x.sin()))
                .with_forcing(Arc::new(|x: f64, t: f64| -1.5 * (x + t).sin()))
                .with_right_data(closed_form_edge(&cf, 2.0));
            Example {
                id: id.into(),
                title: "forced linear Jin-Xin, non-stiff, exact solution",
                summary: "eps=1, f=u/2, F=-1.5 sin(x+t), [0,2], t=0.5, cfl=0.8, p=2",
                problem: ProblemDef::JinXin(model),
                domain: (0.0, 2.0),
                nx: all,
                t_final: 0.5,
                cfl: 0.8,
                p: 2,
                tau: None,
                reference: ReferenceKind::ClosedForm,
                h_fine: None,
                component_names: names(&["u", "v"]),
                closed_form: Some("1c".into()),
            }
        }
        "2" => {
            let eps = epsilon.unwrap_or(1e-6);
            let (f, df) = example2_flux();
            let f0 = f.clone();
            let model = JinXinModel::new(f, df, eps)
                .with_boundary(1.0, 1.0, Arc::new(|t: f64| (2.0 * t).sin()))
                .with_initial(
                    Arc::new(|x: f64| (std::f64::consts::PI * x).sin().powi(3)),
                    Arc::new(move |x: f64| f0((std::f64::consts::PI * x).sin().powi(3))),
                )
                .with_right_data(Arc::new(|_| vec![0.0, 0.0]));
            Example {
                id: id.into(),
                title: "nonlinear Jin-Xin, f = (exp(-u) - 1)/4",
                summary: "eps=1e-6, [0,1], N_x=800, tau=5e-4, p=2, t=0.2",
                problem: ProblemDef::JinXin(model),
                domain: (0.0, 1.0),
                nx: vec![800],
                t_final: 0.2,
                cfl: 0.8,
                p: 2,
                tau: Some(5e-4),
                reference: ReferenceKind::AsymptoticLimit,
                h_fine: None,
                component_names: names(&["u", "v"]),
                closed_form: None,
            }
        }
        "3" => {
            let eps = epsilon.unwrap_or(1e-6);
            let cf = example_closed_form("3", eps)?;
            let sys = LinearRelaxationSystem::new(
                RMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]),
                RMatrix::from_rows(&[[-1.0]]),
                RMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 2.0]]),
                eps,
            )?
            .with_bc_data(Arc::new(|t: f64| vec![-t.sin(), 0.0]))
            .with_init(Arc::new(|x: f64| vec![2.0 * x.sin(), 0.0, 0.0]))
            .with_right_data(closed_form_edge(&cf, 0.5));
            Example {
                id: id.into(),
                title: "3x3 linear relaxation system with boundary layer",
                summary: "eps=1e-6, [0,0.5], N_x=100, tau=1e-3, p=2, t=0.3",
                problem: ProblemDef::Linear(sys),
                domain: (0.0, 0.5),
                nx: vec![100],
                t_final: 0.3,
                cfl: 0.8,
                p: 2,
                tau: Some(1e-3),
                reference: ReferenceKind::ClosedForm,
                h_fine: None,
                component_names: names(&["u", "v", "p"]),
                closed_form: Some("3".into()),
            }
        }
        "4" => {
            let eps0 = epsilon.unwrap_or(1e-3);
            let (f, df) = example2_flux();
            let f0 = f.clone();
            let model = JinXinModel::new(f, df, 1.0).with_initial(
                Arc::new(|x: f64| (std::f64::consts::PI * x).sin()),
                Arc::new(move |x: f64| f0((std::f64::consts::PI * x).sin())),
            );
            Example {
                id: id.into(),
                title: "Jin-Xin interface problem, eps = 1 | eps0",
                summary: "eps0=1e-3 (full scale 1e-4), [-1,1], N_x=100, p=4, t=0.4, fine h=1e-4 (full scale 5e-5)",
                problem: ProblemDef::InterfaceJinXin {
                    model,
                    eps: PiecewiseEpsilon::two_piece(0.0, 1.0, eps0)?,
                },
                domain: (-1.0, 1.0),
                nx: vec![100],
                t_final: 0.4,
                cfl: 0.8,
                p: 4,
                tau: None,
                reference: ReferenceKind::FineMesh,
                h_fine: Some(1e-4),
                component_names: names(&["u", "v"]),
                closed_form: None,
            }
        }
        "5" => {
            let eps0 = epsilon.unwrap_or(1e-3);
            let sys = LinearRelaxationSystem::new(
                RMatrix::from_rows(&[[-1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]),
                RMatrix::diagonal(&[-1.0, -1.0]),
                RMatrix::zeros(1, 3),
                1.0,
            )?
            .with_init(Arc::new(|x: f64| vec![(std::f64::consts::PI * x).sin(), 0.0, 0.0]));
            Example {
                id: id.into(),
                title: "3x3 linear relaxation interface problem, eps = 1 | eps0",
                summary: "eps0=1e-3 (full scale 1e-6), [-1,1], N_x=500 (full scale 2000), p=2, t=0.6, fine h=1e-4",
                problem: ProblemDef::InterfaceLinear {
                    sys,
                    eps: PiecewiseEpsilon::two_piece(0.0, 1.0, eps0)?,
                },
                domain: (-1.0, 1.0),
                nx: vec![500],
                t_final: 0.6,
                cfl: 0.8,
                p: 2,
                tau: None,
                reference: ReferenceKind::FineMesh,
                h_fine: Some(1e-4),
                component_names: names(&["u", "v", "p"]),
                closed_form: None,
            }
        }
        other => {
            return Err(HarnessError::Usage(format!(
                "unknown example '{other}' (known: {})",
                EXAMPLE_IDS.join(", ")
            )))
        }
    };
    Ok(ex)
}

impl Example {
    pub fn grid(&self, nx: usize) -> Result<Grid1D> {
        Ok(Grid1D::uniform(self.domain.0, self.domain.1, nx)?)
    }

    /// Scheme configuration with the example defaults.
    pub fn scheme_config(&self) -> SchemeConfig {
        let right = match &self.problem {
            ProblemDef::JinXin(m) if m.right_data.is_some() => RightBoundary::ReferenceDirichlet,
            ProblemDef::Linear(s) if s.right_data.is_some() => RightBoundary::ReferenceDirichlet,
            _ => RightBoundary::Extrapolate,
        };
        SchemeConfig {
            cfl: self.cfl,
            p_exponent: self.p,
            tau: self.tau,
            right_boundary: right,
            ..SchemeConfig::default()
        }
    }

    pub fn stepper(&self, grid: &Grid1D, scheme: SchemeKind, config: &SchemeConfig) -> Result<Box<dyn Stepper + Send + Sync>> {
        let config = config.clone();
        Ok(match &self.problem {
            ProblemDef::JinXin(m) => Box::new(JinXinStepper {
                model: m.clone(),
                scheme,
                config,
            }),
            ProblemDef::Linear(s) => Box::new(LinearStepper::new(s.clone(), scheme, config)?),
            ProblemDef::InterfaceJinXin { model, eps } => Box::new(InterfaceStepper::new(
                InterfaceProblem::JinXin(model.clone()),
                InterfaceGrid::new(grid.clone(), eps)?,
                scheme,
                config,
            )?),
            ProblemDef::InterfaceLinear { sys, eps } => Box::new(InterfaceStepper::new(
                InterfaceProblem::linear(sys.clone())?,
                InterfaceGrid::new(grid.clone(), eps)?,
                scheme,
                config,
            )?),
        })
    }

    /// Grid indices of interface points.
    pub fn interface_indices(&self, grid: &Grid1D) -> Vec<usize> {
        self.problem
            .interfaces()
            .iter()
            .map(|&x| ((x - grid.x0) / grid.h).round() as usize)
            .collect()
    }

    pub fn fine_grid(&self) -> Result<Grid1D> {
        let h = self
            .h_fine
            .ok_or_else(|| HarnessError::Config(format!("example {} has no fine-mesh spacing", self.id)))?;
        let nx = ((self.domain.1 - self.domain.0) / h).round() as usize;
        self.grid(nx)
    }
}

/// A fine-mesh classical-upwind run, restricted on demand.
#[derive(Clone, Debug)]
pub struct FineRun {
    pub grid: Grid1D,
    pub state: SolutionState,
}

pub fn fine_run(ex: &Example, config: &SchemeConfig, t_final: f64) -> Result<FineRun> {
    let grid = ex.fine_grid()?;
    let eps_min = ex.problem.min_epsilon();
    if grid.h >= eps_min {
        log::warn!("fine mesh h = {} does not resolve eps = {eps_min}", grid.h);
    }
    let cfg = SchemeConfig {
        tau: None,
        ..config.clone()
    };
    let st = ex.stepper(&grid, SchemeKind::Upwind, &cfg)?;
    let traj = run_ibvp(st.as_ref(), &grid, t_final, &cfg, &[])?;
    Ok(FineRun {
        grid,
        state: traj.final_state().clone(),
    })
}

/// Refinement of the equilibrium solve behind the asymptotic-limit reference.
pub const EQUILIBRIUM_REFINE: usize = 8;

/// Reference grid function at `t` for the configured reference kind.
pub fn reference_on(
    ex: &Example,
    kind: ReferenceKind,
    grid: &Grid1D,
    t: f64,
    fine: Option<&FineRun>,
) -> Result<SolutionState> {
    match kind {
        ReferenceKind::ClosedForm => {
            let key = ex
                .closed_form
                .as_deref()
                .ok_or_else(|| HarnessError::Config(format!("example {} has no closed form", ex.id)))?;
            let sol = example_closed_form(key, ex.problem.min_epsilon())?;
            Ok(sol.on_grid(grid, t))
        }
        ReferenceKind::FineMesh => {
            let fine = fine.ok_or_else(|| HarnessError::Config("fine-mesh reference requested without a fine run".into()))?;
            Ok(restrict(&fine.state, &fine.grid, grid)?)
        }
        ReferenceKind::AsymptoticLimit => {
            let ProblemDef::JinXin(model) = &ex.problem else {
                return Err(HarnessError::Config("asymptotic-limit reference is available for Jin-Xin problems".into()));
            };
            let fine = Grid1D::uniform(grid.x0, grid.x_last(), grid.nx() * EQUILIBRIUM_REFINE)?;
            // Inflow at the right edge is zero: the initial datum vanishes there.
            let out = equilibrium_scalar_solve(
                &*model.flux,
                &*model.flux_derivative,
                &*model.init_u,
                &fine,
                t,
                &|_| 0.0,
                ex.cfl,
                &[],
            )?;
            let ubar_fine = SolutionState::new(t, 1, out[0].1.clone())?;
            let ubar = restrict(&ubar_fine, &fine, grid)?.values;
            let mu0 = jinxin_layer_amplitude(model, ubar[0], t)?;
            Ok(jinxin_limit_on_grid(&*model.flux, &ubar, mu0, t))
        }
    }
}
