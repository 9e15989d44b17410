//! Solver for the two-equation point systems of the Jin-Xin schemes. Every
//! row has the form `alpha u + beta v + gamma f(u) + delta = 0`.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PairRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl PairRow {
    /// `c . (U - U^n) + rhs - tau c_2 [(f(u) - v)/eps + forcing] = 0`.
    pub fn relaxation(c: [f64; 2], un: [f64; 2], rhs: f64, tau: f64, epsilon: f64, forcing: f64) -> Self {
        let kappa = tau / epsilon;
        Self {
            alpha: c[0],
            beta: c[1] + kappa * c[1],
            gamma: -kappa * c[1],
            delta: -(c[0] * un[0] + c[1] * un[1]) + rhs - tau * c[1] * forcing,
        }
    }

    /// `bu u + bv v = b`.
    pub fn linear(bu: f64, bv: f64, b: f64) -> Self {
        Self {
            alpha: bu,
            beta: bv,
            gamma: 0.0,
            delta: -b,
        }
    }

    fn normalized(self) -> Self {
        let m = self.alpha.abs().max(self.beta.abs()).max(self.gamma.abs());
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        Self {
            alpha: self.alpha / m,
            beta: self.beta / m,
            gamma: self.gamma / m,
            delta: self.delta / m,
        }
    }
}

/// Solves the pair for `(u, v)`: eliminates `v` with the row of larger
/// `|beta|`, then runs Newton on the scalar equation in `u`, falling back to
/// bracketing bisection.
pub(crate) fn solve_pair(
    rows: [PairRow; 2],
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    u_guess: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(f64, f64)> {
    let r = [rows[0].normalized(), rows[1].normalized()];
    let (k, o) = if r[0].beta.abs() >= r[1].beta.abs() { (0, 1) } else { (1, 0) };
    let (pk, po) = (r[k], r[o]);
    if pk.beta == 0.0 {
        return Err(Error::SingularMatrix { pivot: 0.0 });
    }
    let m = po.beta / pk.beta;
    let ca = po.alpha - m * pk.alpha;
    let cg = po.gamma - m * pk.gamma;
    let cd = po.delta - m * pk.delta;
    if ca == 0.0 && cg == 0.0 {
        return Err(Error::SingularMatrix { pivot: 0.0 });
    }
    let phi = |u: f64| ca * u + cg * f(u) + cd;
    let v_of = |u: f64| -(pk.alpha * u + pk.gamma * f(u) + pk.delta) / pk.beta;

    if cg == 0.0 {
        let u = -cd / ca;
        return Ok((u, v_of(u)));
    }

    let mut u = u_guess;
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        let val = phi(u);
        let der = ca + cg * df(u);
        if !val.is_finite() || !der.is_finite() || der == 0.0 {
            break;
        }
        let du = val / der;
        u -= du;
        if !u.is_finite() {
            break;
        }
        if du.abs() <= tol * (1.0 + u.abs()) {
            return Ok((u, v_of(u)));
        }
    }

    log::debug!("point Newton did not converge in {iters} iterations; bisecting");
    let x0 = u_guess;
    let p0 = phi(x0);
    if p0 == 0.0 {
        return Ok((x0, v_of(x0)));
    }
    let mut width = 1e-3 * (1.0 + x0.abs());
    let mut bracket = None;
    if p0.is_finite() {
        for _ in 0..80 {
            let (lo, hi) = (x0 - width, x0 + width);
            let (pl, ph) = (phi(lo), phi(hi));
            if pl.is_finite() && pl * p0 <= 0.0 {
                bracket = Some((lo, x0, pl));
                break;
            }
            if ph.is_finite() && ph * p0 <= 0.0 {
                bracket = Some((x0, hi, p0));
                break;
            }
            width *= 2.0;
        }
    }
    let Some((mut lo, mut hi, mut plo)) = bracket else {
        return Err(Error::NewtonFailure {
            iterations: iters,
            residual: phi(u).abs(),
        });
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pm = phi(mid);
        if pm == 0.0 {
            return Ok((mid, v_of(mid)));
        }
        if (pm < 0.0) == (plo < 0.0) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * (1.0 + mid.abs()) {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    Ok((u, v_of(u)))
}
