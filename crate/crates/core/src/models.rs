//! Problem definitions: the (nonlinear) Jin-Xin relaxation model and general
//! linear relaxation systems `U_t + A U_x = Q U / eps` with
//! `Q = diag(0, S)`, plus the matrices derived from their equilibrium and
//! boundary-layer structure.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    det, eigen_small, inverse, spectral_split, unstable_subspace_complex, CMatrix, RMatrix, Scalar, SpectralSplit, C64,
    DEFAULT_REALPART_TOL,
};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Jin-Xin model `u_t + v_x = 0`, `v_t + u_x = (f(u) - v)/eps + F(x, t)` on
/// `x > 0` with boundary condition `B_u u(0,t) + B_v v(0,t) = b(t)`.
#[derive(Clone)]
pub struct JinXinModel {
    pub flux: ScalarFn,
    pub flux_derivative: ScalarFn,
    pub epsilon: f64,
    pub bc_coeffs: (f64, f64),
    pub bc_data: ScalarFn,
    pub init_u: ScalarFn,
    pub init_v: ScalarFn,
    /// Optional forcing added to the v-equation.
    pub forcing: Option<SpaceTimeFn>,
    /// Optional Dirichlet data `(u, v)(t)` at the right end of the grid.
    pub right_data: Option<VectorFn>,
}

impl fmt::Debug for JinXinModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JinXinModel")
            .field("epsilon", &self.epsilon)
            .field("bc_coeffs", &self.bc_coeffs)
            .field("forcing", &self.forcing.is_some())
            .field("right_data", &self.right_data.is_some())
            .finish()
    }
}

impl JinXinModel {
    /// Model with zero data and boundary condition `u + v = 0`.
    pub fn new(flux: ScalarFn, flux_derivative: ScalarFn, epsilon: f64) -> Self {
        Self {
            flux,
            flux_derivative,
            epsilon,
            bc_coeffs: (1.0, 1.0),
            bc_data: Arc::new(|_| 0.0),
            init_u: Arc::new(|_| 0.0),
            init_v: Arc::new(|_| 0.0),
            forcing: None,
            right_data: None,
        }
    }

    /// Linear flux `f(u) = a u`.
    pub fn linear(a: f64, epsilon: f64) -> Self {
        Self::new(Arc::new(move |u| a * u), Arc::new(move |_| a), epsilon)
    }

    pub fn with_boundary(mut self, bu: f64, bv: f64, data: ScalarFn) -> Self {
        self.bc_coeffs = (bu, bv);
        self.bc_data = data;
        self
    }

    pub fn with_initial(mut self, u: ScalarFn, v: ScalarFn) -> Self {
        self.init_u = u;
        self.init_v = v;
        self
    }

    pub fn with_forcing(mut self, forcing: SpaceTimeFn) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_right_data(mut self, data: VectorFn) -> Self {
        self.right_data = Some(data);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Relaxation source `(f(u) - v)/eps + F(x,t)` of the v-equation for a
    /// given relaxation time.
    pub fn source(&self, u: f64, v: f64, x: f64, t: f64, epsilon: f64) -> f64 {
        let mut s = ((self.flux)(u) - v) / epsilon;
        if let Some(g) = &self.forcing {
            s += g(x, t);
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.bc_coeffs.0 == 0.0 && self.bc_coeffs.1 == 0.0 {
            return Err(Error::InvalidInput("boundary coefficients are both zero".into()));
        }
        Ok(())
    }

    /// Samples `f'` on `[lo, hi]` and returns its sign (+1 or -1) when it is
    /// single-signed there.
    pub fn flux_sign_on(&self, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        let samples = samples.max(2);
        let mut sign = 0.0;
        for k in 0..samples {
            let u = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
            let d = (self.flux_derivative)(u);
            if d == 0.0 || !d.is_finite() {
                return Err(Error::InvalidInput(format!("f'({u}) = {d} is not single-signed")));
            }
            let s = d.signum();
            if sign == 0.0 {
                sign = s;
            } else if s != sign {
                return Err(Error::InvalidInput(format!("f' changes sign on [{lo}, {hi}]")));
            }
        }
        Ok(sign)
    }
}

/// General linear relaxation system with `Q = diag(0_{n-r}, S)` and boundary
/// condition `B U(0,t) = b(t)`.
#[derive(Clone)]
pub struct LinearRelaxationSystem {
    pub n: usize,
    pub r: usize,
    pub a: RMatrix,
    pub q: RMatrix,
    pub b: RMatrix,
    pub epsilon: f64,
    pub bc_data: VectorFn,
    pub init: VectorFn,
    pub right_data: Option<VectorFn>,
}

impl fmt::Debug for LinearRelaxationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearRelaxationSystem")
            .field("n", &self.n)
            .field("r", &self.r)
            .field("a", &self.a)
            .field("q", &self.q)
            .field("b", &self.b)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

impl LinearRelaxationSystem {
    /// Builds the system from `A`, the relaxation block `S` and the boundary
    /// matrix `B`. Data default to zero.
    pub fn new(a: RMatrix, s: RMatrix, b: RMatrix, epsilon: f64) -> Result<Self> {
        let n = a.rows();
        let r = s.rows();
        if !a.is_square() || !s.is_square() || r > n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, S is {}x{}",
                a.rows(),
                a.cols(),
                s.rows(),
                s.cols()
            )));
        }
        if b.cols() != n {
            return Err(Error::DimensionMismatch(format!("B has {} columns, expected {n}", b.cols())));
        }
        let mut q = RMatrix::zeros(n, n);
        q.set_block(n - r, n - r, &s);
        let m = b.rows();
        Ok(Self {
            n,
            r,
            a,
            q,
            b,
            epsilon,
            bc_data: Arc::new(move |_| vec![0.0; m]),
            init: Arc::new(move |_| vec![0.0; n]),
            right_data: None,
        })
    }

    pub fn with_bc_data(mut self, data: VectorFn) -> Self {
        self.bc_data = data;
        self
    }

    pub fn with_init(mut self, init: VectorFn) -> Self {
        self.init = init;
        self
    }

    pub fn with_right_data(mut self, data: VectorFn) -> Self {
        self.right_data = Some(data);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_boundary(mut self, b: RMatrix, data: VectorFn) -> Self {
        self.b = b;
        self.bc_data = data;
        self
    }

    /// Number of equilibrium (conserved) components.
    pub fn n_eq(&self) -> usize {
        self.n - self.r
    }

    pub fn s(&self) -> RMatrix {
        let k = self.n_eq();
        self.q.block(k, k, self.r, self.r)
    }

    pub fn a11(&self) -> RMatrix {
        self.a.block(0, 0, self.n_eq(), self.n_eq())
    }

    pub fn a12(&self) -> RMatrix {
        self.a.block(0, self.n_eq(), self.n_eq(), self.r)
    }

    pub fn a21(&self) -> RMatrix {
        self.a.block(self.n_eq(), 0, self.r, self.n_eq())
    }

    pub fn a22(&self) -> RMatrix {
        self.a.block(self.n_eq(), self.n_eq(), self.r, self.r)
    }

    /// Largest characteristic speed `max |lambda(A)|`.
    pub fn max_speed(&self) -> Result<f64> {
        Ok(eigen_small(&self.a)?
            .iter()
            .map(|p| p.eigenvalue.norm())
            .fold(0.0, f64::max))
    }
}

/// One named validation check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Whether the check concerns the boundary matrix (irrelevant for
    /// whole-line interface problems).
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub n_plus: Option<usize>,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// All checks except those on the boundary matrix.
    pub fn structure_passed(&self) -> bool {
        self.checks.iter().filter(|c| !c.boundary).all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn real_eigenvalues_of_symmetric(m: &RMatrix) -> Result<Vec<f64>> {
    Ok(crate::linalg::eigenvalues_small(&m.to_complex())?.iter().map(|z| z.re).collect())
}

/// Checks the structural assumptions on a linear relaxation system.
pub fn validate(sys: &LinearRelaxationSystem) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String, boundary| {
        checks.push(CheckResult {
            name,
            passed,
            detail,
            boundary,
        })
    };

    let dims_ok = sys.a.is_square() && sys.q.is_square() && sys.q.rows() == sys.n && sys.r <= sys.n && sys.r >= 1;
    push("dimensions", dims_ok, format!("n = {}, r = {}", sys.n, sys.r), false);
    if !dims_ok {
        return ValidationReport { n_plus: None, checks };
    }

    let k = sys.n_eq();
    let mut off_block = 0.0f64;
    for i in 0..sys.n {
        for j in 0..sys.n {
            if i < k || j < k {
                off_block = off_block.max(sys.q[(i, j)].abs());
            }
        }
    }
    push(
        "q_block_form",
        off_block == 0.0,
        format!("max |Q| outside the S block = {off_block:e}"),
        false,
    );

    let s = sys.s();
    let sym = (&s + &s.transpose()).scale(0.5);
    match real_eigenvalues_of_symmetric(&sym) {
        Ok(ev) => {
            let mx = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            push(
                "s_negative_definite",
                mx < 0.0,
                format!("max eigenvalue of (S+S^T)/2 = {mx:e}"),
                false,
            );
        }
        Err(e) => push("s_negative_definite", false, format!("eigenvalues failed: {e}"), false),
    }

    let d = det(&sys.a).unwrap_or(0.0);
    push("a_invertible", d != 0.0, format!("det A = {d:e}"), false);
    if k > 0 {
        let d11 = det(&sys.a11()).unwrap_or(0.0);
        push("a11_invertible", d11 != 0.0, format!("det A11 = {d11:e}"), false);
    }

    let n_plus = eigen_small(&sys.a).ok().map(|pairs| pairs.iter().filter(|p| p.eigenvalue.re > 0.0).count());
    match n_plus {
        Some(np) => {
            push(
                "b_rows_match_n_plus",
                sys.b.rows() == np,
                format!("B has {} rows, A has {np} positive eigenvalues", sys.b.rows()),
                true,
            );
            if sys.b.rows() == np && np > 0 {
                let gram = sys.b.matmul(&sys.b.transpose());
                let dg = det(&gram).unwrap_or(0.0);
                push("b_full_row_rank", dg != 0.0, format!("det(B B^T) = {dg:e}"), true);
            }
        }
        None => push("b_rows_match_n_plus", false, "eigenvalues of A failed".into(), true),
    }
    ValidationReport { n_plus, checks }
}

/// Matrices derived from the block structure of a linear relaxation system.
#[derive(Clone, Debug)]
pub struct DerivedStructure {
    pub a_inv: RMatrix,
    pub split_a: SpectralSplit,
    /// `A11^{-1} A12`.
    pub a11_inv_a12: RMatrix,
    /// `X = (A22 - A21 A11^{-1} A12)^{-1}`.
    pub x_mat: RMatrix,
    /// `H = X S`, the boundary-layer ODE matrix.
    pub h: RMatrix,
    pub split_a11: SpectralSplit,
    pub split_h: SpectralSplit,
    /// `R+^inf = [[I, -A11^{-1}A12], [0, I]] diag(R+^1, R-^H)`.
    pub r_inf_plus: RMatrix,
    /// `R-^inf = [[I, -A11^{-1}A12], [0, I]] diag(R-^1, R+^H)`.
    pub r_inf_minus: RMatrix,
    /// The limit pair with its left blocks.
    pub split_inf: SpectralSplit,
}

fn block_diag(a: &RMatrix, b: &RMatrix) -> RMatrix {
    let mut m = RMatrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    m.set_block(0, 0, a);
    m.set_block(a.rows(), a.cols(), b);
    m
}

pub fn derive_structure(sys: &LinearRelaxationSystem) -> Result<DerivedStructure> {
    let report = validate(sys);
    if !report.structure_passed() {
        let msg: Vec<String> = report.failures().filter(|c| !c.boundary).map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Error::InvalidInput(format!("system fails validation ({})", msg.join("; "))));
    }
    let k = sys.n_eq();
    let r = sys.r;
    let a_inv = inverse(&sys.a)?;
    let split_a = spectral_split(&sys.a, DEFAULT_REALPART_TOL)?;
    let a11_inv = inverse(&sys.a11())?;
    let a11_inv_a12 = a11_inv.matmul(&sys.a12());
    let schur = &sys.a22() - &sys.a21().matmul(&a11_inv_a12);
    let x_mat = inverse(&schur)?;
    let h = x_mat.matmul(&sys.s());
    let split_a11 = spectral_split(&sys.a11(), DEFAULT_REALPART_TOL)?;
    let split_h = spectral_split(&h, DEFAULT_REALPART_TOL)?;

    let mut t = RMatrix::identity(k + r);
    t.set_block(0, k, &a11_inv_a12.scale(-1.0));
    let r_inf_plus = t.matmul(&block_diag(&split_a11.r_plus, &split_h.r_minus));
    let r_inf_minus = t.matmul(&block_diag(&split_a11.r_minus, &split_h.r_plus));
    let split_inf = SpectralSplit::from_right(r_inf_plus.clone(), r_inf_minus.clone())?;
    Ok(DerivedStructure {
        a_inv,
        split_a,
        a11_inv_a12,
        x_mat,
        h,
        split_a11,
        split_h,
        r_inf_plus,
        r_inf_minus,
        split_inf,
    })
}

/// `M(xi, eta) = A^{-1}(xi I - eta Q)`.
pub fn m_matrix(sys: &LinearRelaxationSystem, xi: C64, eta: f64) -> Result<CMatrix> {
    let a_inv = inverse(&sys.a)?.to_complex();
    let mut inner = sys.q.to_complex().scale(C64::from_f64(-eta));
    for i in 0..sys.n {
        inner[(i, i)] += xi;
    }
    Ok(a_inv.matmul(&inner))
}

/// `|det(B R)| / sqrt(det(R^* R))` for a basis `R` of the unstable subspace.
pub fn gkc_ratio_for_basis(b: &RMatrix, r: &CMatrix) -> Result<f64> {
    let br = b.to_complex().matmul(r);
    let num = det(&br)?.norm();
    let gram = r.adjoint().matmul(r);
    let den = det(&gram)?.norm().sqrt();
    if den == 0.0 {
        return Err(Error::RankDeficient("unstable basis is rank deficient".into()));
    }
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GkcReport {
    pub min_ratio: f64,
    /// Sample `(xi, eta)` attaining the minimum.
    pub argmin: Option<(C64, f64)>,
    pub evaluated: usize,
    /// Samples skipped because of eigenvalues on the imaginary axis (or a
    /// mismatch between the unstable dimension and the rows of `B`).
    pub skipped: Vec<(C64, f64)>,
}

/// Sampled version of the generalized Kreiss condition: the minimum over
/// `samples` of `|det(B R+^M)| / sqrt(det(R+^M* R+^M))`.
pub fn gkc_sample_ratio(sys: &LinearRelaxationSystem, samples: &[(C64, f64)]) -> Result<GkcReport> {
    let mut report = GkcReport {
        min_ratio: f64::INFINITY,
        argmin: None,
        evaluated: 0,
        skipped: Vec::new(),
    };
    for &(xi, eta) in samples {
        if !(xi.re > 0.0) || eta < 0.0 {
            return Err(Error::InvalidInput(format!("GKC sample needs Re xi > 0 and eta >= 0, got ({xi}, {eta})")));
        }
        let m = m_matrix(sys, xi, eta)?;
        let r = match unstable_subspace_complex(&m, DEFAULT_REALPART_TOL) {
            Ok(r) if r.cols() == sys.b.rows() => r,
            Ok(_) | Err(Error::CharacteristicBoundary { .. }) | Err(Error::Defective { .. }) => {
                report.skipped.push((xi, eta));
                continue;
            }
            Err(e) => return Err(e),
        };
        let ratio = gkc_ratio_for_basis(&sys.b, &r)?;
        report.evaluated += 1;
        if ratio < report.min_ratio {
            report.min_ratio = ratio;
            report.argmin = Some((xi, eta));
        }
    }
    Ok(report)
}

/// Default sample grid: 20 moduli `|xi|` log-spaced in `[1e-2, 1e2]`, 20
/// arguments in the open interval `(-pi/2, pi/2)` and 8 values of `eta`
/// (`0` and 7 log-spaced values in `[1e-2, 1e4]`).
pub fn default_gkc_samples() -> Vec<(C64, f64)> {
    let mods: Vec<f64> = (0..20).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 19.0)).collect();
    let args: Vec<f64> = (0..20)
        .map(|k| -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * (k as f64 + 0.5) / 20.0)
        .collect();
    let mut etas = vec![0.0];
    etas.extend((0..7).map(|k| 10f64.powf(-2.0 + k as f64)));
    let mut out = Vec::with_capacity(mods.len() * args.len() * etas.len());
    for &m in &mods {
        for &th in &args {
            for &eta in &etas {
                out.push((C64::from_polar(m, th), eta));
            }
        }
    }
    out
}

/// The linear Jin-Xin model `f(u) = a u` written in the variables
/// `(u, w = v - a u)`, where `Q = diag(0, -1)`. Boundary condition
/// `u + v = 0`, i.e. `(1 + a) u + w = 0`, with zero data.
pub fn jinxin_as_linear(a_const: f64, epsilon: f64) -> LinearRelaxationSystem {
    let a = RMatrix::from_rows(&[[a_const, 1.0], [1.0 - a_const * a_const, -a_const]]);
    let s = RMatrix::from_rows(&[[-1.0]]);
    let b = RMatrix::from_rows(&[[1.0 + a_const, 1.0]]);
    LinearRelaxationSystem::new(a, s, b, epsilon).expect("fixed 2x2 dimensions")
}

/// Boundary row `(B_u + a B_v, B_v)` of the Jin-Xin condition in the
/// `(u, w)` variables.
pub fn jinxin_boundary_row(a_const: f64, bu: f64, bv: f64) -> RMatrix {
    RMatrix::from_rows(&[[bu + a_const * bv, bv]])
}

/// `(u, v) -> (u, v - a u)`.
pub fn jinxin_to_equilibrium_basis(a_const: f64, u: f64, v: f64) -> (f64, f64) {
    (u, v - a_const * u)
}

/// `(u, w) -> (u, w + a u)`.
pub fn jinxin_from_equilibrium_basis(a_const: f64, u: f64, w: f64) -> (f64, f64) {
    (u, w + a_const * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subspace_gap;

    pub(crate) fn example3() -> LinearRelaxationSystem {
        let a = RMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]);
        let s = RMatrix::from_rows(&[[-1.0]]);
        let b = RMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 2.0]]);
        LinearRelaxationSystem::new(a, s, b, 1e-6).unwrap()
    }

    fn example5() -> LinearRelaxationSystem {
        let a = RMatrix::from_rows(&[[-1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let s = RMatrix::diagonal(&[-1.0, -1.0]);
        LinearRelaxationSystem::new(a, s, RMatrix::zeros(1, 3), 1e-3).unwrap()
    }

    #[test]
    fn example3_validates() {
        let rep = validate(&example3());
        assert!(rep.all_passed(), "{rep}");
        assert_eq!(rep.n_plus, Some(2));
    }

    #[test]
    fn positive_s_fails() {
        let mut sys = example3();
        sys.q[(2, 2)] = 1.0;
        let rep = validate(&sys);
        assert!(!rep.check("s_negative_definite").unwrap().passed);
    }

    #[test]
    fn singular_a_fails() {
        let a = RMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        let sys = LinearRelaxationSystem::new(a, RMatrix::from_rows(&[[-1.0]]), RMatrix::zeros(1, 2), 1.0).unwrap();
        let rep = validate(&sys);
        assert!(!rep.check("a_invertible").unwrap().passed);
    }

    #[test]
    fn b_row_mismatch_fails() {
        let mut sys = example3();
        sys.b = RMatrix::from_rows(&[[1.0, 0.0, 0.0]]);
        let rep = validate(&sys);
        assert!(!rep.check("b_rows_match_n_plus").unwrap().passed);
        assert!(rep.structure_passed());
    }

    #[test]
    fn example3_structure() {
        let d = derive_structure(&example3()).unwrap();
        assert!((&d.a11_inv_a12 - &RMatrix::column_vector(&[1.0, 0.0])).norm_max() < 1e-15);
        assert!((d.x_mat[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d.h[(0, 0)] + 1.0).abs() < 1e-15);
        assert_eq!(d.split_h.n_plus(), 0);
        assert_eq!(d.r_inf_plus.cols(), 2);
        let hs = d.x_mat.matmul(&example3().s());
        assert!((&hs - &d.h).norm_max() <= 1e-12);
    }

    #[test]
    fn example5_structure() {
        let d = derive_structure(&example5()).unwrap();
        assert!((example5().a11()[(0, 0)] + 1.0).abs() < 1e-15);
        assert_eq!(d.split_a11.n_plus(), 0);
        assert_eq!(d.split_a11.n_minus(), 1);
        assert_eq!(d.split_h.n_plus() + d.split_h.n_minus(), 2);
    }

    #[test]
    fn decoupled_case_is_block_diagonal() {
        let a = RMatrix::from_rows(&[[2.0, 0.0], [0.0, -3.0]]);
        let sys = LinearRelaxationSystem::new(a, RMatrix::from_rows(&[[-1.0]]), RMatrix::from_rows(&[[1.0, 0.0]]), 1.0).unwrap();
        let d = derive_structure(&sys).unwrap();
        // H = X S = (-1/3)(-1) > 0: unstable, so R+^inf = diag(R+^1, R-^H) = e1 only.
        assert!(d.h[(0, 0)] > 0.0);
        assert_eq!(d.r_inf_plus.cols(), 1);
        assert!(subspace_gap(&d.r_inf_plus, &RMatrix::column_vector(&[1.0, 0.0])).unwrap() < 1e-15);
        assert!(subspace_gap(&d.r_inf_minus, &RMatrix::column_vector(&[0.0, 1.0])).unwrap() < 1e-15);
    }

    #[test]
    fn jinxin_wrap_speed_and_h() {
        for a in [-0.5, 0.5, -2.0] {
            let sys = jinxin_as_linear(a, 1.0);
            assert_eq!(sys.a11()[(0, 0)], a);
            let d = derive_structure(&sys).unwrap();
            // boundary-layer rate of the wrapped system equals f' = a
            assert!((d.h[(0, 0)] - a).abs() < 1e-14);
            let speeds = sys.max_speed().unwrap();
            assert!((speeds - 1.0).abs() < 1e-12);
        }
        let degenerate = jinxin_as_linear(0.0, 1.0);
        assert!(!validate(&degenerate).check("a11_invertible").unwrap().passed);
    }

    #[test]
    fn gkc_eta_zero_is_classical_kreiss() {
        let sys = example3();
        let rep = gkc_sample_ratio(&sys, &[(C64::new(1.0, 0.0), 0.0)]).unwrap();
        let split = spectral_split(&sys.a, DEFAULT_REALPART_TOL).unwrap();
        let classical = gkc_ratio_for_basis(&sys.b, &split.r_plus.to_complex()).unwrap();
        assert!((rep.min_ratio - classical).abs() < 1e-10 * classical);
    }

    #[test]
    fn gkc_detects_annihilating_boundary() {
        let mut sys = jinxin_as_linear(-0.5, 1.0);
        let xi = C64::new(1.0, 0.0);
        let eta = 3.0;
        let r = unstable_subspace_complex(&m_matrix(&sys, xi, eta).unwrap(), 1e-10).unwrap();
        // B orthogonal to the unstable direction at this sample
        let (r0, r1) = (r[(0, 0)], r[(1, 0)]);
        let row = [-r1, r0];
        let phase = if row[0].norm() > 0.0 { row[0].conj() / row[0].norm() } else { C64::one() };
        sys.b = RMatrix::from_rows(&[[(row[0] * phase).re, (row[1] * phase).re]]);
        let rep = gkc_sample_ratio(&sys, &[(xi, eta)]).unwrap();
        assert!(rep.min_ratio < 1e-12, "{}", rep.min_ratio);
    }

    #[test]
    fn gkc_rejects_left_half_plane() {
        let sys = example3();
        assert!(gkc_sample_ratio(&sys, &[(C64::new(-1.0, 0.0), 0.0)]).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let s = default_gkc_samples();
        assert_eq!(s.len(), 20 * 20 * 8);
        assert!(s.iter().all(|(xi, eta)| xi.re > 0.0 && *eta >= 0.0));
    }

    #[test]
    fn jinxin_model_sign_check() {
        let m = JinXinModel::new(Arc::new(|u: f64| 0.25 * ((-u).exp() - 1.0)), Arc::new(|u: f64| -0.25 * (-u).exp()), 1e-6);
        assert_eq!(m.flux_sign_on(-1.0, 1.0, 50).unwrap(), -1.0);
        let q = JinXinModel::new(Arc::new(|u: f64| u * u), Arc::new(|u: f64| 2.0 * u), 1.0);
        assert!(q.flux_sign_on(-1.0, 1.0, 50).is_err());
        assert!(JinXinModel::linear(0.5, 0.0).validate().is_err());
    }
}
