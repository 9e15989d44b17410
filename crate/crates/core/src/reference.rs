//! Reference solutions: closed-form (asymptotic or exact) solutions of the
//! example problems, the scalar equilibrium solver, boundary-layer ODE
//! machinery, the reduced boundary-condition solve and fine-mesh references.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, RMatrix};
use crate::models::{DerivedStructure, JinXinModel, LinearRelaxationSystem, VectorFn};
use crate::schemes::{run_ibvp, Grid1D, SchemeConfig, SolutionState, Stepper};

pub type FieldFn = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

/// `U(x,t) = outer(x,t) + layer_amplitude(t) exp(-layer_decay x / eps)`.
#[derive(Clone)]
pub struct AsymptoticSolution {
    pub id: String,
    pub outer: FieldFn,
    pub layer_amplitude: VectorFn,
    /// Decay rate in the stretched variable `y = x/eps`.
    pub layer_decay: f64,
    pub epsilon: f64,
    /// Whether the formula solves the relaxation system exactly.
    pub exact: bool,
}

impl fmt::Debug for AsymptoticSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsymptoticSolution")
            .field("id", &self.id)
            .field("layer_decay", &self.layer_decay)
            .field("epsilon", &self.epsilon)
            .field("exact", &self.exact)
            .finish()
    }
}

impl AsymptoticSolution {
    pub fn eval(&self, x: f64, t: f64) -> Vec<f64> {
        let mut v = (self.outer)(x, t);
        let decay = (-self.layer_decay * x / self.epsilon).exp();
        if decay > 0.0 {
            for (vi, ai) in v.iter_mut().zip((self.layer_amplitude)(t)) {
                *vi += ai * decay;
            }
        }
        v
    }

    /// Layer correction at stretched coordinate `y`.
    pub fn layer(&self, y: f64, t: f64) -> Vec<f64> {
        let decay = (-self.layer_decay * y).exp();
        (self.layer_amplitude)(t).into_iter().map(|a| a * decay).collect()
    }

    pub fn components(&self) -> usize {
        (self.outer)(0.0, 0.0).len()
    }

    /// Full formula on the grid.
    pub fn on_grid(&self, grid: &Grid1D, t: f64) -> SolutionState {
        let n = self.components();
        SolutionState::from_fn(grid, n, t, |x| self.eval(x, t)).expect("closed forms have fixed size")
    }

    /// The `eps -> 0` limit on the grid: outer values everywhere plus the
    /// layer amplitude at `x0`.
    pub fn limit_on_grid(&self, grid: &Grid1D, t: f64) -> SolutionState {
        let n = self.components();
        let mut s = SolutionState::from_fn(grid, n, t, |x| (self.outer)(x, t)).expect("closed forms have fixed size");
        for (vi, ai) in s.point_mut(0).iter_mut().zip((self.layer_amplitude)(t)) {
            *vi += ai;
        }
        s
    }
}

/// Closed-form solutions of examples `1a`, `1b`, `1c` and `3` at relaxation
/// time `epsilon`.
pub fn example_closed_form(example_id: &str, epsilon: f64) -> Result<AsymptoticSolution> {
    let id = example_id.to_string();
    let sol = match example_id {
        // f = -u/2: the layer obeys mu_y = -mu/2.
        "1a" => AsymptoticSolution {
            id,
            outer: Arc::new(|x, t| {
                let s = (x + t / 2.0).sin();
                vec![2.0 * s, -s]
            }),
            layer_amplitude: Arc::new(|t| vec![t.sin(), 0.0]),
            layer_decay: 0.5,
            epsilon,
            exact: false,
        },
        "1b" => AsymptoticSolution {
            id,
            outer: Arc::new(|x, t| {
                let s = (x - t / 2.0).sin();
                vec![2.0 * s, s]
            }),
            layer_amplitude: Arc::new(|_| vec![0.0, 0.0]),
            layer_decay: 0.0,
            epsilon,
            exact: false,
        },
        "1c" => AsymptoticSolution {
            id,
            outer: Arc::new(|x, t| {
                let s = (x + t).sin();
                vec![s, -s]
            }),
            layer_amplitude: Arc::new(|_| vec![0.0, 0.0]),
            layer_decay: 0.0,
            epsilon,
            exact: true,
        },
        "3" => AsymptoticSolution {
            id,
            outer: Arc::new(|x, t| vec![(x - t).sin() + (x + t).sin(), (x - t).sin() - (x + t).sin(), 0.0]),
            layer_amplitude: Arc::new(|t| vec![-t.sin(), 0.0, t.sin()]),
            layer_decay: 1.0,
            epsilon,
            exact: false,
        },
        other => return Err(Error::InvalidInput(format!("no closed form for example '{other}'"))),
    };
    Ok(sol)
}

/// First-order upwind solution of `u_t + f(u)_x = 0` with `f'` of one sign;
/// `inflow(t)` is imposed at the inflow end. Returns the states at the
/// requested output times (and `t_final`).
pub fn equilibrium_scalar_solve(
    flux: &dyn Fn(f64) -> f64,
    flux_derivative: &dyn Fn(f64) -> f64,
    init: &dyn Fn(f64) -> f64,
    grid: &Grid1D,
    t_final: f64,
    inflow: &dyn Fn(f64) -> f64,
    cfl: f64,
    output_times: &[f64],
) -> Result<Vec<(f64, Vec<f64>)>> {
    let np = grid.num_points;
    let mut u: Vec<f64> = (0..np).map(|j| init(grid.x(j))).collect();
    let sign = flux_derivative(u[0]).signum();
    if sign == 0.0 {
        return Err(Error::DegenerateSign { index: 0 });
    }
    let mut targets: Vec<f64> = output_times.iter().copied().filter(|&t| t > 0.0 && t < t_final).collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.push(t_final);

    let mut out = Vec::with_capacity(targets.len());
    let mut t = 0.0;
    let mut next = u.clone();
    let mut fu = vec![0.0; np];
    for &target in &targets {
        while t < target - 1e-14 * target.max(1.0) {
            let mut speed: f64 = 0.0;
            for (j, &x) in u.iter().enumerate() {
                let d = flux_derivative(x);
                if d.signum() != sign || d == 0.0 {
                    return Err(Error::DegenerateSign { index: j });
                }
                speed = speed.max(d.abs());
                fu[j] = flux(x);
            }
            let dt = (cfl * grid.h / speed).min(target - t);
            let lam = dt / grid.h;
            if sign < 0.0 {
                for j in 0..np - 1 {
                    next[j] = u[j] - lam * (fu[j + 1] - fu[j]);
                }
                next[np - 1] = inflow(t + dt);
            } else {
                next[0] = inflow(t + dt);
                for j in 1..np {
                    next[j] = u[j] - lam * (fu[j] - fu[j - 1]);
                }
            }
            std::mem::swap(&mut u, &mut next);
            t += dt;
        }
        out.push((target, u.clone()));
    }
    Ok(out)
}

/// `mu(0,t) = (b(t) - B_u ubar0 - B_v f(ubar0)) / B_u`.
pub fn jinxin_layer_amplitude(model: &JinXinModel, ubar0: f64, t: f64) -> Result<f64> {
    let (bu, bv) = model.bc_coeffs;
    if bu == 0.0 {
        return Err(Error::InvalidInput("B_u = 0: the boundary condition does not determine the layer".into()));
    }
    if !((model.flux_derivative)(ubar0) < 0.0) {
        return Err(Error::InadmissibleLayer(format!("f'({ubar0}) >= 0: no boundary layer forms")));
    }
    Ok(((model.bc_data)(t) - bu * ubar0 - bv * (model.flux)(ubar0)) / bu)
}

/// Default integration horizon `50 / |f'(ubar0)|`.
pub fn default_layer_horizon(model: &JinXinModel, ubar0: f64) -> f64 {
    50.0 / (model.flux_derivative)(ubar0).abs()
}

/// RK4 samples `mu(k y_max / steps)`, `k = 0..=steps`, of
/// `mu_y = f(ubar0 + mu) - f(ubar0)`, `mu(0) = mu0`.
pub fn jinxin_layer_profile(model: &JinXinModel, ubar0: f64, mu0: f64, y_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !((model.flux_derivative)(ubar0) < 0.0) {
        return Err(Error::InadmissibleLayer(format!("f'({ubar0}) >= 0")));
    }
    if steps == 0 || !(y_max > 0.0) {
        return Err(Error::InvalidInput("layer profile needs steps > 0 and y_max > 0".into()));
    }
    let f0 = (model.flux)(ubar0);
    let rhs = |m: f64| (model.flux)(ubar0 + m) - f0;
    let dy = y_max / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut m = mu0;
    out.push(m);
    for k in 0..steps {
        let k1 = rhs(m);
        let k2 = rhs(m + 0.5 * dy * k1);
        let k3 = rhs(m + 0.5 * dy * k2);
        let k4 = rhs(m + dy * k3);
        let next = m + dy / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() || next.abs() > m.abs() * (1.0 + 1e-12) + f64::MIN_POSITIVE {
            return Err(Error::InadmissibleLayer(format!(
                "layer datum {mu0} does not decay (|mu| grows at step {k})"
            )));
        }
        m = next;
        out.push(m);
    }
    Ok(out)
}

/// Linear system for `(alpha_+, nu(0,t))`:
/// `[[B_u R+^1, B_v - B_u A11^{-1} A12], [0, L+^H]]`.
#[derive(Clone)]
pub struct ReducedBCSystem {
    pub matrix: RMatrix,
    n_alpha: usize,
    b_u: RMatrix,
    r1_plus: RMatrix,
    r1_minus: RMatrix,
    bc_data: VectorFn,
}

impl fmt::Debug for ReducedBCSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedBCSystem").field("matrix", &self.matrix).finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBCSolution {
    pub alpha_plus: Vec<f64>,
    pub nu: Vec<f64>,
    /// `ubar(0,t) = R+^1 alpha_+ + R-^1 alpha_-`.
    pub ubar0: Vec<f64>,
}

impl ReducedBCSystem {
    pub fn rhs(&self, t: f64, alpha_minus: &[f64]) -> Vec<f64> {
        let b = (self.bc_data)(t);
        let bur = self.b_u.matmul(&self.r1_minus).mul_vec(alpha_minus);
        let mut rhs: Vec<f64> = b.iter().zip(&bur).map(|(x, y)| x - y).collect();
        rhs.resize(self.matrix.rows(), 0.0);
        rhs
    }

    pub fn solve(&self, t: f64, alpha_minus: &[f64]) -> Result<ReducedBCSolution> {
        if alpha_minus.len() != self.r1_minus.cols() {
            return Err(Error::DimensionMismatch(format!(
                "alpha_- has {} entries, expected {}",
                alpha_minus.len(),
                self.r1_minus.cols()
            )));
        }
        let x = solve_dense(&self.matrix, &self.rhs(t, alpha_minus))?;
        let alpha_plus = x[..self.n_alpha].to_vec();
        let nu = x[self.n_alpha..].to_vec();
        let up = self.r1_plus.mul_vec(&alpha_plus);
        let um = self.r1_minus.mul_vec(alpha_minus);
        let ubar0 = up.iter().zip(&um).map(|(a, b)| a + b).collect();
        Ok(ReducedBCSolution { alpha_plus, nu, ubar0 })
    }
}

pub fn reduced_bc_build(sys: &LinearRelaxationSystem, derived: &DerivedStructure) -> Result<ReducedBCSystem> {
    let k = sys.n_eq();
    let r = sys.r;
    let b_u = sys.b.block(0, 0, sys.b.rows(), k);
    let b_v = sys.b.block(0, k, sys.b.rows(), r);
    let r1p = derived.split_a11.r_plus.clone();
    let lhp = derived.split_h.l_plus.clone();
    let n_alpha = r1p.cols();
    let size = n_alpha + r;
    if sys.b.rows() + lhp.rows() != size {
        return Err(Error::DimensionMismatch(format!(
            "reduced boundary system has {} rows for {size} unknowns",
            sys.b.rows() + lhp.rows()
        )));
    }
    let mut m = RMatrix::zeros(size, size);
    m.set_block(0, 0, &b_u.matmul(&r1p));
    m.set_block(0, n_alpha, &(&b_v - &b_u.matmul(&derived.a11_inv_a12)));
    m.set_block(sys.b.rows(), n_alpha, &lhp);
    if let Err(e) = crate::linalg::Lu::new(&m) {
        log::warn!("reduced boundary system is singular: the boundary matrix likely violates the GKC");
        return Err(e);
    }
    Ok(ReducedBCSystem {
        matrix: m,
        n_alpha,
        b_u,
        r1_plus: r1p,
        r1_minus: derived.split_a11.r_minus.clone(),
        bc_data: sys.bc_data.clone(),
    })
}

/// Jin-Xin limit on the grid: `(ubar_0 + mu_0, f(ubar_0))` at `j = 0` and
/// `(ubar_j, f(ubar_j))` elsewhere.
pub fn jinxin_limit_on_grid(flux: &dyn Fn(f64) -> f64, ubar: &[f64], mu0: f64, t: f64) -> SolutionState {
    let mut values = Vec::with_capacity(2 * ubar.len());
    for (j, &u) in ubar.iter().enumerate() {
        let fu = flux(u);
        values.push(if j == 0 { u + mu0 } else { u });
        values.push(fu);
    }
    SolutionState { time: t, n: 2, values }
}

/// Linear-system limit on the grid: `(ubar_0 - A11^{-1}A12 nu_0, nu_0)` at
/// `j = 0` and `(ubar_j, 0)` elsewhere. `ubar` holds `n - r` values per point.
pub fn linear_limit_on_grid(a11_inv_a12: &RMatrix, ubar: &[f64], nu0: &[f64], t: f64) -> Result<SolutionState> {
    let k = a11_inv_a12.rows();
    let r = a11_inv_a12.cols();
    if nu0.len() != r || k == 0 || ubar.len() % k != 0 {
        return Err(Error::DimensionMismatch("limit data do not match the partition".into()));
    }
    let np = ubar.len() / k;
    let shift = a11_inv_a12.mul_vec(nu0);
    let mut values = Vec::with_capacity(np * (k + r));
    for j in 0..np {
        for i in 0..k {
            let u = ubar[j * k + i];
            values.push(if j == 0 { u - shift[i] } else { u });
        }
        for i in 0..r {
            values.push(if j == 0 { nu0[i] } else { 0.0 });
        }
    }
    SolutionState::new(t, k + r, values)
}

/// Samples a fine-grid state at the points of a nested coarse grid.
pub fn restrict(fine: &SolutionState, fine_grid: &Grid1D, coarse: &Grid1D) -> Result<SolutionState> {
    fine.check_grid(fine_grid)?;
    let ratio = coarse.h / fine_grid.h;
    let stride = ratio.round();
    let offset = (coarse.x0 - fine_grid.x0) / fine_grid.h;
    let off = offset.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-8 * ratio || (offset - off).abs() > 1e-8 * ratio.max(1.0) || off < 0.0 {
        return Err(Error::NonNested(format!(
            "coarse h = {} and x0 = {} are not aligned with fine h = {}, x0 = {}",
            coarse.h, coarse.x0, fine_grid.h, fine_grid.x0
        )));
    }
    let (stride, off) = (stride as usize, off as usize);
    let last = off + stride * (coarse.num_points - 1);
    if last >= fine_grid.num_points {
        return Err(Error::NonNested("coarse grid extends beyond the fine grid".into()));
    }
    let mut values = Vec::with_capacity(coarse.num_points * fine.n);
    for j in 0..coarse.num_points {
        values.extend_from_slice(fine.point(off + stride * j));
    }
    SolutionState::new(fine.time, fine.n, values)
}

/// Runs `stepper` (normally the classical upwind scheme) on the fine grid and
/// restricts the result at `t_final` to `coarse`.
pub fn fine_mesh_reference(
    stepper: &dyn Stepper,
    fine: &Grid1D,
    coarse: &Grid1D,
    t_final: f64,
    config: &SchemeConfig,
    eps_min: f64,
) -> Result<SolutionState> {
    if fine.h >= eps_min {
        log::warn!("fine mesh h = {} does not resolve eps = {eps_min}", fine.h);
    }
    // Fail on nesting before the expensive run.
    let probe = SolutionState::new(0.0, 1, vec![0.0; fine.num_points])?;
    restrict(&probe, fine, coarse)?;
    let traj = run_ibvp(stepper, fine, t_final, config, &[])?;
    restrict(traj.final_state(), fine, coarse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_1a_boundary_values() {
        let s = example_closed_form("1a", 1e-9).unwrap();
        let t: f64 = 0.37;
        let v = s.eval(0.0, t);
        assert!((v[0] - (2.0 * (t / 2.0).sin() + t.sin())).abs() < 1e-15);
        assert!((v[1] + (t / 2.0).sin()).abs() < 1e-15);
        assert!(example_closed_form("9", 1.0).is_err());
    }

    #[test]
    fn example_3_boundary_values() {
        let s = example_closed_form("3", 1e-6).unwrap();
        for t in [0.1f64, 0.3, 1.2] {
            let v = s.eval(0.0, t);
            assert!((v[0] + t.sin()).abs() < 1e-15);
            assert!((v[1] + 2.0 * t.sin()).abs() < 1e-15);
            assert!((v[2] - t.sin()).abs() < 1e-15);
            assert!((v[1] + 2.0 * v[2]).abs() < 1e-15);
        }
    }

    #[test]
    fn limit_with_zero_layer_is_outer() {
        let s = example_closed_form("1b", 1e-9).unwrap();
        let g = Grid1D::uniform(0.0, 2.0, 10).unwrap();
        assert_eq!(s.limit_on_grid(&g, 0.5), s.on_grid(&g, 0.5));
    }

    #[test]
    fn restrict_identity_and_nesting() {
        let g = Grid1D::uniform(0.0, 1.0, 8).unwrap();
        let s = SolutionState::from_fn(&g, 1, 0.0, |x| vec![x]).unwrap();
        assert_eq!(restrict(&s, &g, &g).unwrap(), s);
        let c = Grid1D::uniform(0.0, 1.0, 4).unwrap();
        let r = restrict(&s, &g, &c).unwrap();
        assert_eq!(r.component(0), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let bad = Grid1D::uniform(0.0, 1.0, 3).unwrap();
        assert!(matches!(restrict(&s, &g, &bad), Err(Error::NonNested(_))));
    }
}
