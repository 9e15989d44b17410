//! Single runs, convergence studies and upwind/BAP comparisons.

use std::time::Instant;

use rayon::prelude::*;

use relaxbl_core::schemes::{run_ibvp, Grid1D, SchemeKind, SolutionState};

use crate::config::Resolved;
use crate::error::{HarnessError, Result};
use crate::examples::{fine_run, reference_on, FineRun, ReferenceKind};
use crate::norms::{error_norms, fit_slope, Norms, Slope};

/// Points on each side of an interface counted as its neighbourhood.
pub const INTERFACE_HALF_WIDTH: usize = 5;

#[derive(Clone, Debug)]
pub struct RunResult {
    pub nx: usize,
    pub grid: Grid1D,
    /// States at the requested output times, ending with `t_final`.
    pub snapshots: Vec<SolutionState>,
    pub reference: SolutionState,
    pub norms: Norms,
    pub tau: f64,
    pub steps: usize,
    pub seconds: f64,
}

impl RunResult {
    pub fn final_state(&self) -> &SolutionState {
        self.snapshots.last().expect("at least the final state")
    }
}

/// Fine-mesh run when the reference needs one.
pub fn prepare_reference(res: &Resolved) -> Result<Option<FineRun>> {
    if res.example.reference != ReferenceKind::FineMesh {
        return Ok(None);
    }
    let start = Instant::now();
    let fine = fine_run(&res.example, &res.scheme_config, res.example.t_final)?;
    log::info!(
        "fine-mesh reference on {} points in {:.2} s",
        fine.grid.num_points,
        start.elapsed().as_secs_f64()
    );
    Ok(Some(fine))
}

pub fn run_single(res: &Resolved, nx: usize, scheme: SchemeKind, fine: Option<&FineRun>) -> Result<RunResult> {
    let ex = &res.example;
    let grid = ex.grid(nx)?;
    let start = Instant::now();
    let stepper = ex.stepper(&grid, scheme, &res.scheme_config)?;
    let traj = run_ibvp(stepper.as_ref(), &grid, ex.t_final, &res.scheme_config, &res.output_times)?;
    let seconds = start.elapsed().as_secs_f64();
    let final_state = traj.final_state();
    let reference = reference_on(ex, ex.reference, &grid, ex.t_final, fine)?;
    let norms = error_norms(&final_state.values, &reference.values, grid.h)?;
    Ok(RunResult {
        nx,
        snapshots: traj.states[1..].to_vec(),
        grid,
        reference,
        norms,
        tau: traj.tau,
        steps: traj.steps,
        seconds,
    })
}

/// Thread pool capped by `RELAXBL_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("RELAXBL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| HarnessError::Config(format!("RELAXBL_THREADS must be a positive integer, got '{v}'")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))
}

#[derive(Clone, Debug)]
pub struct StudyRow {
    pub nx: usize,
    pub h: f64,
    pub outcome: std::result::Result<(Norms, f64), String>,
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub example: String,
    pub scheme: SchemeKind,
    pub rows: Vec<StudyRow>,
    /// L1, L2, Linf.
    pub slopes: [Slope; 3],
}

impl ErrorReport {
    pub fn failures(&self) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }
}

pub const MIN_STUDY_RESOLUTIONS: usize = 3;

pub fn convergence_study(res: &Resolved) -> Result<ErrorReport> {
    let ex = &res.example;
    if ex.nx.len() < MIN_STUDY_RESOLUTIONS {
        return Err(HarnessError::Config(format!(
            "nx: a convergence study needs at least {MIN_STUDY_RESOLUTIONS} resolutions, got {}",
            ex.nx.len()
        )));
    }
    let fine = prepare_reference(res)?;
    let pool = thread_pool()?;
    let rows: Vec<StudyRow> = pool.install(|| {
        ex.nx
            .par_iter()
            .map(|&nx| {
                let h = (ex.domain.1 - ex.domain.0) / nx as f64;
                let outcome = run_single(res, nx, res.scheme, fine.as_ref())
                    .map(|r| (r.norms, r.seconds))
                    .map_err(|e| e.to_string());
                if let Err(e) = &outcome {
                    log::warn!("N_x = {nx}: {e}");
                }
                StudyRow { nx, h, outcome }
            })
            .collect()
    });
    let ok: Vec<(f64, Norms)> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|(n, _)| (r.h, *n)))
        .collect();
    let h: Vec<f64> = ok.iter().map(|p| p.0).collect();
    let pick = |f: fn(&Norms) -> f64| ok.iter().map(|p| f(&p.1)).collect::<Vec<_>>();
    let slopes = [
        fit_slope(&h, &pick(|n| n.l1)),
        fit_slope(&h, &pick(|n| n.l2)),
        fit_slope(&h, &pick(|n| n.linf)),
    ];
    Ok(ErrorReport {
        example: ex.id.clone(),
        scheme: res.scheme,
        rows,
        slopes,
    })
}

/// Per-component error summary of one scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeErrors {
    pub boundary: Vec<f64>,
    /// Sup over every grid point.
    pub sup: Vec<f64>,
    /// Sup over points that are neither the boundary point nor near an
    /// interface.
    pub interior_sup: Vec<f64>,
    pub interior_mean: Vec<f64>,
    /// Sup over the interface neighbourhoods (when there are interfaces).
    pub interface_sup: Option<Vec<f64>>,
    /// Error at the interface points themselves.
    pub interface_point: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub nx: usize,
    pub grid: Grid1D,
    pub reference: SolutionState,
    pub upwind: SolutionState,
    pub bap: SolutionState,
    pub upwind_errors: SchemeErrors,
    pub bap_errors: SchemeErrors,
    pub seconds: [f64; 2],
}

pub fn scheme_errors(state: &SolutionState, reference: &SolutionState, interfaces: &[usize]) -> SchemeErrors {
    let n = state.n;
    let np = state.num_points();
    let near = |j: usize| {
        interfaces
            .iter()
            .any(|&i| j + INTERFACE_HALF_WIDTH >= i && j <= i + INTERFACE_HALF_WIDTH)
    };
    let err = |j: usize, k: usize| (state.point(j)[k] - reference.point(j)[k]).abs();
    let mut out = SchemeErrors {
        boundary: (0..n).map(|k| err(0, k)).collect(),
        sup: vec![0.0; n],
        interior_sup: vec![0.0; n],
        interior_mean: vec![0.0; n],
        interface_sup: (!interfaces.is_empty()).then(|| vec![0.0; n]),
        interface_point: (!interfaces.is_empty()).then(|| vec![0.0; n]),
    };
    let mut interior_count = 0usize;
    for j in 0..np {
        let nb = near(j);
        if j > 0 && !nb {
            interior_count += 1;
        }
        for k in 0..n {
            let e = err(j, k);
            out.sup[k] = out.sup[k].max(e);
            if nb {
                if let Some(s) = out.interface_sup.as_mut() {
                    s[k] = s[k].max(e);
                }
            } else if j > 0 {
                out.interior_sup[k] = out.interior_sup[k].max(e);
                out.interior_mean[k] += e;
            }
            if interfaces.contains(&j) {
                if let Some(s) = out.interface_point.as_mut() {
                    s[k] = s[k].max(e);
                }
            }
        }
    }
    for m in &mut out.interior_mean {
        *m /= interior_count.max(1) as f64;
    }
    out
}

/// Runs both schemes on the same grid against one reference.
pub fn compare_schemes(res: &Resolved, nx: usize, fine: Option<&FineRun>) -> Result<Comparison> {
    let owned;
    let fine = match fine {
        Some(f) => Some(f),
        None => {
            owned = prepare_reference(res)?;
            owned.as_ref()
        }
    };
    let pool = thread_pool()?;
    let (up, bap) = pool.install(|| {
        rayon::join(
            || run_single(res, nx, SchemeKind::Upwind, fine),
            || run_single(res, nx, SchemeKind::Bap, fine),
        )
    });
    let (up, bap) = (up?, bap?);
    let interfaces = res.example.interface_indices(&up.grid);
    Ok(Comparison {
        nx,
        upwind_errors: scheme_errors(up.final_state(), &up.reference, &interfaces),
        bap_errors: scheme_errors(bap.final_state(), &bap.reference, &interfaces),
        seconds: [up.seconds, bap.seconds],
        upwind: up.final_state().clone(),
        bap: bap.final_state().clone(),
        reference: up.reference,
        grid: up.grid,
    })
}
