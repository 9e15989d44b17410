//! Eigenpairs of matrices of size at most 4.
//!
//! Eigenvalues are the roots of the characteristic polynomial, found with the
//! Aberth–Ehrlich simultaneous iteration, then refined by inverse iteration
//! and deflated one at a time; eigenvectors are read off the null space of
//! the shifted matrix using Gaussian elimination with complete pivoting. The matrix is scaled to unit max-norm first so that tolerances
//! are relative.

use num_complex::Complex64;

use super::matrix::{vec_norm, CMatrix, Lu, RMatrix, Scalar, C64};
use crate::error::{Error, Result};

pub const MAX_ROOT_ITERATIONS: usize = 500;

/// Roots closer than this (relative to the max-norm) are treated as one
/// repeated eigenvalue.
const CLUSTER_TOL: f64 = 1e-6;

/// Post-check on `|M v - lambda v| / |M|` for simple eigenvalues.
const RESIDUAL_TOL: f64 = 1e-9;

/// Repeated roots are only resolved to about the square root of machine
/// precision, so their residual check is looser.
const CLUSTER_RESIDUAL_TOL: f64 = 1e-6;

/// Gram-Schmidt residual below which eigenvectors count as dependent.
const INDEPENDENCE_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: C64,
    /// Unit Euclidean norm.
    pub right_eigenvector: Vec<C64>,
}

/// Characteristic polynomial `det(zI - M)` in ascending coefficient order
/// (monic, `coeffs[n] == 1`), by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(m: &CMatrix) -> Vec<C64> {
    let n = m.rows();
    let mut coeffs = vec![C64::zero(); n + 1];
    coeffs[n] = C64::one();
    let mut mk = CMatrix::zeros(n, n);
    let id = CMatrix::identity(n);
    for k in 1..=n {
        let am = m.matmul(&mk);
        mk = &am + &id.scale(coeffs[n - k + 1]);
        let tr = m.matmul(&mk).trace();
        coeffs[n - k] = -tr / C64::from_f64(k as f64);
    }
    coeffs
}

fn horner(coeffs: &[C64], z: C64) -> (C64, C64, f64) {
    let n = coeffs.len() - 1;
    let mut p = coeffs[n];
    let mut dp = C64::zero();
    let mut bound = coeffs[n].norm();
    let az = z.norm();
    for i in (0..n).rev() {
        dp = dp * z + p;
        p = p * z + coeffs[i];
        bound = bound * az + coeffs[i].norm();
    }
    (p, dp, bound)
}

/// All roots of the polynomial with ascending coefficients `coeffs`
/// (leading coefficient nonzero).
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if lead == C64::zero() {
        return Err(Error::InvalidInput("leading coefficient is zero".into()));
    }
    let c: Vec<C64> = coeffs.iter().map(|&x| x / lead).collect();
    if n == 1 {
        return Ok(vec![-c[0]]);
    }

    // Fujiwara-type radius for the starting circle.
    let radius = (1..=n)
        .map(|k| c[n - k].norm().powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    if radius == 0.0 {
        return Ok(vec![C64::zero(); n]);
    }
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_ROOT_ITERATIONS {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp, bound) = horner(&c, z[k]);
            if p.norm() <= 8.0 * f64::EPSILON * bound {
                done[k] = true;
                continue;
            }
            let w = if dp == C64::zero() {
                C64::new(1e-3 * radius, 1e-3 * radius)
            } else {
                p / dp
            };
            let mut s = C64::zero();
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d != C64::zero() {
                        s += C64::one() / d;
                    }
                }
            }
            let corr = w / (C64::one() - w * s);
            z[k] -= corr;
            if corr.norm() <= 2.0 * f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ROOT_ITERATIONS,
    })
}

/// Basis of (at least) `dim` vectors for the numerical null space of `a`,
/// treating the trailing `dim` pivots of a completely pivoted elimination as
/// zero.
pub(crate) fn null_space(a: &CMatrix, dim: usize) -> Vec<Vec<C64>> {
    let n = a.rows();
    let mut u = a.clone();
    let mut colperm: Vec<usize> = (0..n).collect();
    let target_rank = n.saturating_sub(dim);
    let mut rank = 0;
    for k in 0..target_rank {
        let mut best = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = u[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (p, q, pmax) = best;
        if pmax == 0.0 {
            break;
        }
        if p != k {
            for j in 0..n {
                let t = u[(k, j)];
                u[(k, j)] = u[(p, j)];
                u[(p, j)] = t;
            }
        }
        if q != k {
            for i in 0..n {
                let t = u[(i, k)];
                u[(i, k)] = u[(i, q)];
                u[(i, q)] = t;
            }
            colperm.swap(k, q);
        }
        let pivot = u[(k, k)];
        for i in k + 1..n {
            let f = u[(i, k)] / pivot;
            if f == C64::zero() {
                continue;
            }
            for j in k..n {
                let t = u[(k, j)];
                u[(i, j)] -= f * t;
            }
        }
        rank += 1;
    }

    let mut basis = Vec::with_capacity(n - rank);
    for free in rank..n {
        let mut y = vec![C64::zero(); n];
        y[free] = C64::one();
        for i in (0..rank).rev() {
            let mut s = C64::zero();
            for j in i + 1..n {
                s += u[(i, j)] * y[j];
            }
            y[i] = -s / u[(i, i)];
        }
        let mut x = vec![C64::zero(); n];
        for (idx, &col) in colperm.iter().enumerate() {
            x[col] = y[idx];
        }
        basis.push(x);
        if basis.len() == dim.max(1) {
            break;
        }
    }
    basis
}

/// Complex Gram–Schmidt (two passes) over `vectors`; drops vectors whose
/// residual norm falls below `tol`.
pub(crate) fn gram_schmidt_complex(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let dot: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= dot * qi;
                }
            }
        }
        let nw = vec_norm(&w);
        if nw > tol {
            out.push(w.iter().map(|x| x / nw).collect());
        }
    }
    out
}

fn validate_size(rows: usize, cols: usize) -> Result<usize> {
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    if !(1..=4).contains(&rows) {
        return Err(Error::UnsupportedSize(rows));
    }
    Ok(rows)
}

/// Inverse iteration from the shift `sigma`; returns the refined eigenvalue
/// and a unit eigenvector.
fn refine(m: &CMatrix, sigma: C64) -> (C64, Vec<C64>) {
    let n = m.rows();
    let shifted = |s: C64| {
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] -= s;
        }
        a
    };
    let mut x = null_space(&shifted(sigma), 1).pop().unwrap_or_else(|| vec![C64::one(); n]);
    let nx = vec_norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut sigma = sigma;
    for _ in 0..4 {
        let Ok(lu) = Lu::new(&shifted(sigma)) else { break };
        let y = lu.solve(&x);
        let ny = vec_norm(&y);
        let d: C64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        if !ny.is_finite() || ny == 0.0 || d == C64::zero() {
            break;
        }
        let next = sigma + C64::one() / d;
        x = y.iter().map(|v| v / ny).collect();
        let done = (next - sigma).norm() <= 4.0 * f64::EPSILON * next.norm().max(1.0);
        sigma = next;
        if done {
            break;
        }
    }
    (sigma, x)
}

/// Eigenvalues by deflation: the largest root of the characteristic
/// polynomial is refined on the matrix, split off with a Householder
/// similarity, and the remaining block is treated at its own scale.
fn deflated_eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.rows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let scale = m.norm_max();
    if scale == 0.0 {
        return Ok(vec![C64::zero(); n]);
    }
    let ms = m.scale(C64::from_f64(1.0 / scale));
    let roots = polynomial_roots(&characteristic_polynomial(&ms))?;
    let top = roots
        .iter()
        .copied()
        .fold(C64::zero(), |a, b| if b.norm() > a.norm() { b } else { a });
    let (lambda, v) = refine(&ms, top);

    // H = I - 2 w w^* / (w^* w) maps v to a multiple of e1.
    let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { C64::one() };
    let mut w = v.clone();
    w[0] += phase;
    let ww: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let mut h = CMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] -= C64::from_f64(2.0 / ww) * w[i] * w[j].conj();
        }
    }
    let b = h.matmul(&ms).matmul(&h);
    let rest = deflated_eigenvalues(&b.block(1, 1, n - 1, n - 1))?;
    let mut out = Vec::with_capacity(n);
    out.push(lambda * scale);
    out.extend(rest.into_iter().map(|z| z * scale));
    Ok(out)
}

/// Eigenvalues only (no eigenvector extraction, so repeated or defective
/// eigenvalues are fine).
pub fn eigenvalues_small(m: &CMatrix) -> Result<Vec<C64>> {
    validate_size(m.rows(), m.cols())?;
    deflated_eigenvalues(m)
}

/// Full eigendecomposition of a real matrix with `1 <= n <= 4`.
pub fn eigen_small(m: &RMatrix) -> Result<Vec<EigenPair>> {
    eigen_small_complex(&m.to_complex())
}

fn residual(m: &CMatrix, lambda: C64, v: &[C64]) -> f64 {
    m.mul_vec(v)
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Near-equal roots whose individual eigenvectors are clearly independent
/// are genuinely distinct eigenvalues.
fn resolve_individually(ms: &CMatrix, cl: &[C64]) -> Option<Vec<(C64, Vec<C64>)>> {
    let mut found: Vec<(C64, Vec<C64>)> = Vec::with_capacity(cl.len());
    for &z in cl {
        let (lambda, v) = refine(ms, z);
        if residual(ms, lambda, &v) > RESIDUAL_TOL {
            return None;
        }
        found.push((lambda, v));
    }
    let vs: Vec<Vec<C64>> = found.iter().map(|p| p.1.clone()).collect();
    if gram_schmidt_complex(&vs, INDEPENDENCE_TOL).len() < cl.len() {
        return None;
    }
    Some(found)
}

/// Full eigendecomposition of a complex matrix with `1 <= n <= 4`.
pub fn eigen_small_complex(m: &CMatrix) -> Result<Vec<EigenPair>> {
    let n = validate_size(m.rows(), m.cols())?;
    let scale = m.norm_max();
    if scale == 0.0 {
        return Ok((0..n)
            .map(|i| {
                let mut e = vec![C64::zero(); n];
                e[i] = C64::one();
                EigenPair {
                    eigenvalue: C64::zero(),
                    right_eigenvector: e,
                }
            })
            .collect());
    }
    let ms = m.scale(C64::from_f64(1.0 / scale));
    let roots = deflated_eigenvalues(&ms)?;

    let mut assigned = vec![false; n];
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let mut cl = vec![roots[i]];
        for j in i + 1..n {
            if !assigned[j] && (roots[j] - roots[i]).norm() <= CLUSTER_TOL {
                assigned[j] = true;
                cl.push(roots[j]);
            }
        }
        if cl.len() > 1 {
            if let Some(found) = resolve_individually(&ms, &cl) {
                clusters.extend(found.into_iter().map(|(z, _)| vec![z]));
                continue;
            }
        }
        clusters.push(cl);
    }
    // Descending real part (ignoring rounding noise), then imaginary part.
    let key = |z: C64| ((z.re * 1e10).round() + 0.0, z.im + 0.0);
    clusters.sort_by(|a, b| {
        let (ka, kb) = (key(a[0]), key(b[0]));
        kb.0.total_cmp(&ka.0).then(kb.1.total_cmp(&ka.1))
    });

    let mut pairs = Vec::with_capacity(n);
    for cl in clusters {
        let mult = cl.len();
        let mut lambda = cl.iter().sum::<C64>() / C64::from_f64(mult as f64);
        if mult == 1 {
            let (l, v) = refine(&ms, lambda);
            if residual(&ms, l, &v) > RESIDUAL_TOL {
                return Err(Error::Defective {
                    eigenvalue: format!("{}", l * scale),
                });
            }
            pairs.push(EigenPair {
                eigenvalue: l * scale,
                right_eigenvector: v,
            });
            continue;
        }
        let mut shifted = ms.clone();
        for i in 0..n {
            shifted[(i, i)] -= lambda;
        }
        let raw = null_space(&shifted, mult);
        let basis = gram_schmidt_complex(&raw, 1e-12);
        if basis.len() < mult {
            return Err(Error::Defective {
                eigenvalue: format!("{}", lambda * scale),
            });
        }
        let basis: Vec<Vec<C64>> = basis.into_iter().take(mult).collect();
        // Rayleigh quotients pin a repeated eigenvalue better than the
        // averaged roots do.
        lambda = basis
            .iter()
            .map(|v| {
                let mv = ms.mul_vec(v);
                v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<C64>()
            })
            .sum::<C64>()
            / C64::from_f64(mult as f64);
        for v in basis {
            if residual(&ms, lambda, &v) > CLUSTER_RESIDUAL_TOL {
                return Err(Error::Defective {
                    eigenvalue: format!("{}", lambda * scale),
                });
            }
            pairs.push(EigenPair {
                eigenvalue: lambda * scale,
                right_eigenvector: v,
            });
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &RMatrix, p: &EigenPair) -> f64 {
        let mv = m.to_complex().mul_vec(&p.right_eigenvector);
        mv.iter()
            .zip(&p.right_eigenvector)
            .map(|(a, b)| (a - p.eigenvalue * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / m.norm_fro()
    }

    #[test]
    fn identity_has_double_unit_eigenvalue() {
        let pairs = eigen_small(&RMatrix::identity(2)).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!((p.eigenvalue - C64::one()).norm() < 1e-12);
        }
        let dot: C64 = pairs[0]
            .right_eigenvector
            .iter()
            .zip(&pairs[1].right_eigenvector)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn jin_xin_matrix() {
        let a = RMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let pairs = eigen_small(&a).unwrap();
        let mut ev: Vec<f64> = pairs.iter().map(|p| p.eigenvalue.re).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-13 && (ev[1] - 1.0).abs() < 1e-13);
        for p in &pairs {
            assert!(p.eigenvalue.im.abs() < 1e-13);
            assert!(residual(&a, p) < 1e-12);
        }
    }

    #[test]
    fn defective_block_is_an_error() {
        let j = RMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(eigen_small(&j), Err(Error::Defective { .. })));
    }

    #[test]
    fn rotation_gives_conjugate_pair() {
        let r = RMatrix::from_rows(&[[0.0, -2.0], [2.0, 0.0]]);
        let pairs = eigen_small(&r).unwrap();
        assert!((pairs[0].eigenvalue - C64::new(0.0, 2.0)).norm() < 1e-12, "{pairs:?}");
        assert!((pairs[1].eigenvalue - C64::new(0.0, -2.0)).norm() < 1e-12);
    }

    #[test]
    fn non_square_and_oversized_rejected() {
        assert!(matches!(eigen_small(&RMatrix::zeros(2, 3)), Err(Error::NonSquare { .. })));
        assert!(matches!(eigen_small(&RMatrix::identity(5)), Err(Error::UnsupportedSize(5))));
    }

    #[test]
    fn widely_separated_scales() {
        // M(1, eta) style spread: eigenvalues of order eta and of order one.
        let eta = 1e8;
        let a = -0.5;
        let m = RMatrix::from_rows(&[[-eta * a, 1.0 + eta], [1.0, 0.0]]);
        let pairs = eigen_small(&m).unwrap();
        for p in &pairs {
            assert!(residual(&m, p) < 1e-12);
        }
        let small = pairs.iter().map(|p| p.eigenvalue.re).fold(f64::INFINITY, |a, b| if b.abs() < a.abs() { b } else { a });
        assert!((small - 1.0 / a).abs() < 1e-6);
    }

    #[test]
    fn small_pair_beside_huge_eigenvalue() {
        // A^{-1} diag(1, 1, 1 + 1e8) with A = [[0,1,0],[1,0,1],[0,1,1]]:
        // eigenvalues near 1e8 and +-1 must stay separated.
        let ainv = RMatrix::from_rows(&[[1.0, 1.0, -1.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 1.0]]);
        let m = ainv.matmul(&RMatrix::diagonal(&[1.0, 1.0, 1.0 + 1e8]));
        let pairs = eigen_small(&m).unwrap();
        let mut small: Vec<f64> = pairs.iter().map(|p| p.eigenvalue.re).filter(|v| v.abs() < 10.0).collect();
        small.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(small.len(), 2);
        assert!((small[0] + 1.0).abs() < 1e-7 && (small[1] - 1.0).abs() < 1e-7, "{small:?}");
        for p in &pairs {
            assert!(residual(&m, p) < 1e-12);
        }
    }

    #[test]
    fn polynomial_roots_of_cubic() {
        // (z-1)(z-2)(z+3) = z^3 - 7z + 6
        let c = [6.0, -7.0, 0.0, 1.0].map(C64::from_f64);
        let mut r: Vec<f64> = polynomial_roots(&c).unwrap().iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((r[0] + 3.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12 && (r[2] - 2.0).abs() < 1e-12);
    }
}
