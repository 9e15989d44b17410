//! Invariant-subspace splits and principal angles.

use super::eigen::{eigen_small, eigen_small_complex, eigenvalues_small, gram_schmidt_complex};
use super::matrix::{inverse, vec_norm, CMatrix, RMatrix, Scalar, C64};
use crate::error::{Error, Result};

/// Default `|Re lambda|` threshold separating stable from unstable modes.
pub const DEFAULT_REALPART_TOL: f64 = 1e-10;

/// Right-unstable / right-stable blocks of a real matrix together with the
/// left blocks obtained from `[l_plus; l_minus] = [r_plus, r_minus]^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSplit {
    pub r_plus: RMatrix,
    pub r_minus: RMatrix,
    pub l_plus: RMatrix,
    pub l_minus: RMatrix,
}

impl SpectralSplit {
    /// Builds the left blocks by inverting the concatenated right blocks.
    pub fn from_right(r_plus: RMatrix, r_minus: RMatrix) -> Result<Self> {
        let n = r_plus.rows();
        if r_minus.rows() != n || r_plus.cols() + r_minus.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "right blocks {}x{} and {}x{} do not form a square basis",
                r_plus.rows(),
                r_plus.cols(),
                r_minus.rows(),
                r_minus.cols()
            )));
        }
        let l = inverse(&r_plus.hstack(&r_minus))?;
        let np = r_plus.cols();
        Ok(Self {
            l_plus: l.block(0, 0, np, n),
            l_minus: l.block(np, 0, n - np, n),
            r_plus,
            r_minus,
        })
    }

    pub fn dim(&self) -> usize {
        self.r_plus.rows()
    }

    pub fn n_plus(&self) -> usize {
        self.r_plus.cols()
    }

    pub fn n_minus(&self) -> usize {
        self.r_minus.cols()
    }

    /// `R+ L+` (projector onto the unstable subspace).
    pub fn projector_plus(&self) -> RMatrix {
        self.r_plus.matmul(&self.l_plus)
    }

    pub fn projector_minus(&self) -> RMatrix {
        self.r_minus.matmul(&self.l_minus)
    }

    /// Stacked left blocks `[l_minus; l_plus]`.
    pub fn left_minus_plus(&self) -> RMatrix {
        self.l_minus.vstack(&self.l_plus)
    }
}

/// Orthonormal basis of the column span of `m` (modified Gram–Schmidt with
/// re-orthogonalisation). Fails when the columns are numerically dependent.
pub fn orthonormalize_columns(m: &RMatrix) -> Result<RMatrix> {
    let cols = m.columns();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for c in &cols {
        let n0 = vec_norm(c);
        let mut w = c.clone();
        for _ in 0..2 {
            for q in &out {
                let dot: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= dot * qi;
                }
            }
        }
        let nw = vec_norm(&w);
        if n0 == 0.0 || nw <= 1e-12 * n0 {
            return Err(Error::RankDeficient(format!(
                "column {} is (numerically) dependent on the previous ones",
                out.len()
            )));
        }
        out.push(w.iter().map(|x| x / nw).collect());
    }
    Ok(RMatrix::from_columns(m.rows(), &out))
}

/// Splits a real square matrix into its unstable (`Re > 0`) and stable
/// (`Re < 0`) invariant subspaces. Complex-conjugate pairs contribute real
/// two-column blocks. Right blocks are orthonormal.
pub fn spectral_split(m: &RMatrix, tol_realpart: f64) -> Result<SpectralSplit> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let pairs = eigen_small(m)?;

    let mut plus: Vec<Vec<C64>> = Vec::new();
    let mut minus: Vec<Vec<C64>> = Vec::new();
    let (mut n_plus, mut n_minus) = (0, 0);
    for p in &pairs {
        if p.eigenvalue.re.abs() <= tol_realpart {
            return Err(Error::CharacteristicBoundary {
                eigenvalue: format!("{}", p.eigenvalue),
                tol: tol_realpart,
            });
        }
        // Rotate so the dominant component is real; real eigenvectors then
        // carry only rounding noise in their imaginary part.
        let v = &p.right_eigenvector;
        let k = (0..n)
            .max_by(|&i, &j| v[i].norm().partial_cmp(&v[j].norm()).unwrap())
            .unwrap_or(0);
        let phase = if v[k].norm() > 0.0 { v[k].conj() / v[k].norm() } else { C64::one() };
        let re: Vec<C64> = v.iter().map(|x| C64::from_f64((x * phase).re)).collect();
        let im: Vec<C64> = v.iter().map(|x| C64::from_f64((x * phase).im)).collect();
        if p.eigenvalue.re > 0.0 {
            n_plus += 1;
            plus.push(re);
            plus.push(im);
        } else {
            n_minus += 1;
            minus.push(re);
            minus.push(im);
        }
    }

    let realify = |cands: &[Vec<C64>], count: usize| -> Result<RMatrix> {
        let basis = gram_schmidt_complex(cands, 1e-6);
        if basis.len() < count {
            return Err(Error::RankDeficient(
                "could not assemble a real basis for an invariant subspace".into(),
            ));
        }
        let cols: Vec<Vec<f64>> = basis.iter().take(count).map(|c| c.iter().map(|z| z.re).collect()).collect();
        Ok(RMatrix::from_columns(n, &cols))
    };
    let r_plus = realify(&plus, n_plus)?;
    let r_minus = realify(&minus, n_minus)?;
    SpectralSplit::from_right(r_plus, r_minus)
}

/// Orthonormal basis (columns) of the invariant subspace of a complex matrix
/// belonging to eigenvalues with positive real part.
pub fn unstable_subspace_complex(m: &CMatrix, tol_realpart: f64) -> Result<CMatrix> {
    let pairs = eigen_small_complex(m)?;
    let mut cols = Vec::new();
    for p in &pairs {
        if p.eigenvalue.re.abs() <= tol_realpart {
            return Err(Error::CharacteristicBoundary {
                eigenvalue: format!("{}", p.eigenvalue),
                tol: tol_realpart,
            });
        }
        if p.eigenvalue.re > 0.0 {
            cols.push(p.right_eigenvector.clone());
        }
    }
    let basis = gram_schmidt_complex(&cols, 1e-10);
    if basis.len() < cols.len() {
        return Err(Error::RankDeficient("unstable eigenvectors are dependent".into()));
    }
    Ok(CMatrix::from_columns(m.rows(), &basis))
}

/// Largest principal angle (radians) between the column spans of `a` and `b`.
pub fn subspace_gap(a: &RMatrix, b: &RMatrix) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "subspace_gap of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.cols() == 0 {
        return Ok(0.0);
    }
    let qa = orthonormalize_columns(a)?;
    let qb = orthonormalize_columns(b)?;
    let cross = qa.transpose().matmul(&qb);
    let sv_cross = singular_values(&cross)?;
    let cos_min = sv_cross.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    // Small angles are resolved through the sine (residual of projecting qb
    // onto span(qa)); large ones through the cosine.
    let resid = &qb - &qa.matmul(&cross);
    let sin_max = singular_values(&resid)?.into_iter().fold(0.0, f64::max).min(1.0);
    if sin_max < std::f64::consts::FRAC_1_SQRT_2 {
        Ok(sin_max.asin())
    } else {
        Ok(cos_min.max(0.0).acos())
    }
}

/// Singular values of a small real matrix via the eigenvalues of its Gram
/// matrix.
pub fn singular_values(m: &RMatrix) -> Result<Vec<f64>> {
    let g = m.transpose().matmul(m);
    let ev = eigenvalues_small(&g.to_complex())?;
    Ok(ev.iter().map(|z| z.re.max(0.0).sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn is_parallel(a: &[f64], b: &[f64]) -> bool {
        let cross = a[0] * b[1] - a[1] * b[0];
        cross.abs() < 1e-12 * vec_norm(a) * vec_norm(b)
    }

    #[test]
    fn jin_xin_split() {
        let a = RMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let s = spectral_split(&a, DEFAULT_REALPART_TOL).unwrap();
        assert!(is_parallel(&s.r_plus.column(0), &[1.0, 1.0]));
        assert!(is_parallel(&s.r_minus.column(0), &[-1.0, 1.0]));
    }

    #[test]
    fn diagonal_split() {
        let a = RMatrix::diagonal(&[-2.0, 3.0]);
        let s = spectral_split(&a, DEFAULT_REALPART_TOL).unwrap();
        assert!(is_parallel(&s.r_minus.column(0), &[1.0, 0.0]));
        assert!(is_parallel(&s.r_plus.column(0), &[0.0, 1.0]));
        let rec = &s.projector_plus() + &s.projector_minus();
        assert!((&rec - &RMatrix::identity(2)).norm_max() < 1e-14);
    }

    #[test]
    fn characteristic_boundary_detected() {
        let a = RMatrix::diagonal(&[0.0, 1.0]);
        assert!(matches!(
            spectral_split(&a, DEFAULT_REALPART_TOL),
            Err(Error::CharacteristicBoundary { .. })
        ));
    }

    #[test]
    fn complex_pair_gives_real_block() {
        let a = RMatrix::from_rows(&[[1.0, -3.0, 0.0], [3.0, 1.0, 0.0], [0.0, 0.0, -2.0]]);
        let s = spectral_split(&a, DEFAULT_REALPART_TOL).unwrap();
        assert_eq!(s.n_plus(), 2);
        assert_eq!(s.n_minus(), 1);
        // invariance: A R+ stays in span(R+)
        let ar = a.matmul(&s.r_plus);
        let back = s.r_plus.matmul(&s.l_plus.matmul(&ar));
        assert!((&ar - &back).norm_max() < 1e-12);
    }

    #[test]
    fn gap_examples() {
        let a = RMatrix::column_vector(&[1.0, 0.0]);
        let b = RMatrix::column_vector(&[0.0, 1.0]);
        assert!((subspace_gap(&a, &b).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(subspace_gap(&a, &a).unwrap(), 0.0);
        let c = RMatrix::column_vector(&[1.0, 1.0]);
        let d = RMatrix::column_vector(&[2.0, 2.0]);
        assert!(subspace_gap(&c, &d).unwrap() < 1e-15);
    }

    #[test]
    fn gap_resolves_small_angles() {
        let t: f64 = 1e-9;
        let a = RMatrix::column_vector(&[1.0, 0.0]);
        let b = RMatrix::column_vector(&[t.cos(), t.sin()]);
        let g = subspace_gap(&a, &b).unwrap();
        assert!((g - t).abs() < 1e-15);
    }

    #[test]
    fn gap_rank_deficient() {
        let a = RMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]]);
        assert!(matches!(subspace_gap(&a, &a), Err(Error::RankDeficient(_))));
    }
}
