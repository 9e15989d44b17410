use crate::error::{Error, Result};

use super::{SchemeConfig, SwitchRule};

pub type Mat2 = [[f64; 2]; 2];

/// Above this `tau/eps` the limit `eta = inf` is used directly, since
/// `(tau/eps)^p` is then beyond double precision resolution of `1 + eta^{-1}`.
pub const ETA_LIMIT_RATIO: f64 = 1e8;

/// Eigen-decomposition of `M(eta) = [[-eta a, 1 + eta], [1, 0]]`, the Jin-Xin
/// matrix `A^{-1}(I - eta Q)` with `Q = [[0, 0], [a, -1]]`.
///
/// Left vectors have unit length; `[r_plus, r_minus]` is the inverse of the
/// stacked left vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaDecomposition {
    pub a: f64,
    pub eta: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub l_plus: [f64; 2],
    pub l_minus: [f64; 2],
    pub r_plus: [f64; 2],
    pub r_minus: [f64; 2],
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Closed-form eigenpairs of `M(eta)`. `eta` may be `f64::INFINITY`, which
/// yields the limit vectors.
pub fn m_eta_decompose(a: f64, eta: f64) -> Result<EtaDecomposition> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::DegenerateSign { index: 0 });
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!("eta must be nonnegative, got {eta}")));
    }
    // Characteristic polynomial: lambda^2 + a eta lambda - (1 + eta) = 0.
    // The left eigenvector for lambda is proportional to (lambda, 1 + eta).
    let (lambda_plus, lambda_minus, lp, lm);
    if eta <= 1.0 {
        let disc = (a * a * eta * eta + 4.0 * (eta + 1.0)).sqrt();
        if a < 0.0 {
            lambda_plus = (-a * eta + disc) / 2.0;
            lambda_minus = -(1.0 + eta) / lambda_plus;
        } else {
            lambda_minus = -(a * eta + disc) / 2.0;
            lambda_plus = -(1.0 + eta) / lambda_minus;
        }
        lp = [lambda_plus, 1.0 + eta];
        lm = [lambda_minus, 1.0 + eta];
    } else {
        // Rescaled by s = 1/eta: mu = lambda/eta solves mu^2 + a mu - s(1+s) = 0.
        let s = if eta.is_infinite() { 0.0 } else { 1.0 / eta };
        let d = (a * a + 4.0 * s * (1.0 + s)).sqrt();
        if a < 0.0 {
            let mu = (d - a) / 2.0;
            lambda_plus = mu * eta;
            lambda_minus = -(1.0 + s) / mu;
            lp = [mu, 1.0 + s];
            lm = [lambda_minus * s / (1.0 + s), 1.0];
        } else {
            let mu = -(a + d) / 2.0;
            lambda_minus = mu * eta;
            lambda_plus = -(1.0 + s) / mu;
            lm = [mu, 1.0 + s];
            lp = [lambda_plus * s / (1.0 + s), 1.0];
        }
    }
    let l_plus = unit(lp);
    let l_minus = unit(lm);
    let det = l_plus[0] * l_minus[1] - l_plus[1] * l_minus[0];
    let r_plus = [l_minus[1] / det, -l_minus[0] / det];
    let r_minus = [-l_plus[1] / det, l_plus[0] / det];
    Ok(EtaDecomposition {
        a,
        eta,
        lambda_plus,
        lambda_minus,
        l_plus,
        l_minus,
        r_plus,
        r_minus,
    })
}

fn outer(r: [f64; 2], l: [f64; 2]) -> Mat2 {
    [[r[0] * l[0], r[0] * l[1]], [r[1] * l[0], r[1] * l[1]]]
}

impl EtaDecomposition {
    /// `A R+ L+` with `A = [[0,1],[1,0]]`.
    pub fn flux_plus(&self) -> Mat2 {
        let p = outer(self.r_plus, self.l_plus);
        [p[1], p[0]]
    }

    /// `A R- L-`.
    pub fn flux_minus(&self) -> Mat2 {
        let p = outer(self.r_minus, self.l_minus);
        [p[1], p[0]]
    }

    /// `L- A^{-1}`.
    pub fn l_minus_a_inv(&self) -> [f64; 2] {
        [self.l_minus[1], self.l_minus[0]]
    }

    /// `L+ A^{-1}`.
    pub fn l_plus_a_inv(&self) -> [f64; 2] {
        [self.l_plus[1], self.l_plus[0]]
    }
}

/// `eta` for the Jin-Xin path under the configured switch rule.
pub fn eta_for(tau: f64, epsilon: f64, config: &SchemeConfig) -> f64 {
    let ratio = tau / epsilon;
    match config.switch_rule {
        SwitchRule::Auto | SwitchRule::SmoothEta => {
            if ratio > ETA_LIMIT_RATIO {
                f64::INFINITY
            } else {
                ratio.powi(config.p_exponent as i32)
            }
        }
        SwitchRule::HardTauEps => {
            if tau < epsilon {
                0.0
            } else {
                f64::INFINITY
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{subspace_gap, RMatrix};

    fn m(a: f64, eta: f64) -> Mat2 {
        [[-eta * a, 1.0 + eta], [1.0, 0.0]]
    }

    fn check_pairs(d: &EtaDecomposition) {
        let mm = m(d.a, d.eta);
        assert!(d.lambda_minus < 0.0 && d.lambda_plus > 0.0);
        for (r, lam) in [(d.r_plus, d.lambda_plus), (d.r_minus, d.lambda_minus)] {
            let mr = [mm[0][0] * r[0] + mm[0][1] * r[1], mm[1][0] * r[0] + mm[1][1] * r[1]];
            let scale = mm.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs())) * r[0].hypot(r[1]);
            assert!((mr[0] - lam * r[0]).abs() <= 1e-12 * scale);
            assert!((mr[1] - lam * r[1]).abs() <= 1e-12 * scale);
        }
        let lr = [
            [
                d.l_plus[0] * d.r_plus[0] + d.l_plus[1] * d.r_plus[1],
                d.l_plus[0] * d.r_minus[0] + d.l_plus[1] * d.r_minus[1],
            ],
            [
                d.l_minus[0] * d.r_plus[0] + d.l_minus[1] * d.r_plus[1],
                d.l_minus[0] * d.r_minus[0] + d.l_minus[1] * d.r_minus[1],
            ],
        ];
        assert!((lr[0][0] - 1.0).abs() < 1e-12 && lr[0][1].abs() < 1e-12);
        assert!(lr[1][0].abs() < 1e-12 && (lr[1][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_zero_is_a() {
        let d = m_eta_decompose(-0.5, 0.0).unwrap();
        assert!((d.lambda_minus + 1.0).abs() < 1e-15);
        assert!((d.lambda_plus - 1.0).abs() < 1e-15);
        let ap = d.flux_plus();
        assert!((ap[0][0] - 0.5).abs() < 1e-15 && (ap[1][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn characteristic_residual_at_100() {
        for a in [-0.5, 0.5, -1.0, 0.9] {
            let d = m_eta_decompose(a, 100.0).unwrap();
            for lam in [d.lambda_plus, d.lambda_minus] {
                let p = lam * lam + a * 100.0 * lam - 101.0;
                assert!(p.abs() <= 1e-10 * (lam * lam).max(101.0), "{a} {lam} {p}");
            }
            check_pairs(&d);
        }
    }

    #[test]
    fn invariants_across_eta() {
        for a in [-0.5, 0.5, -0.25, 1.0] {
            for eta in [0.0, 1e-6, 0.3, 1.0, 1.5, 10.0, 1e3] {
                check_pairs(&m_eta_decompose(a, eta).unwrap());
            }
        }
    }

    #[test]
    fn large_eta_limit() {
        let d = m_eta_decompose(-0.5, 1e6).unwrap();
        let lm = RMatrix::column_vector(&d.l_minus);
        assert!(subspace_gap(&lm, &RMatrix::column_vector(&[0.0, 1.0])).unwrap() <= 1e-5);
        let inf = m_eta_decompose(-0.5, f64::INFINITY).unwrap();
        assert_eq!(inf.l_minus, [0.0, 1.0]);
        assert!(inf.lambda_plus.is_infinite());
        assert!((inf.lambda_minus + 2.0).abs() < 1e-15);
        let pos = m_eta_decompose(0.5, f64::INFINITY).unwrap();
        assert_eq!(pos.l_plus, [0.0, 1.0]);
        let lm = RMatrix::column_vector(&pos.l_minus);
        assert!(subspace_gap(&lm, &RMatrix::column_vector(&[-0.5, 1.0])).unwrap() < 1e-15);
    }

    #[test]
    fn zero_a_rejected() {
        assert!(matches!(m_eta_decompose(0.0, 1.0), Err(Error::DegenerateSign { .. })));
    }

    #[test]
    fn continuity_across_rescaling() {
        let below = m_eta_decompose(-0.5, 1.0).unwrap();
        let above = m_eta_decompose(-0.5, 1.0 + 1e-12).unwrap();
        for (x, y) in below.l_minus.iter().zip(&above.l_minus) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
