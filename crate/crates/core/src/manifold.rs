//! Riemannian geometry of the unit sphere: tangent projections of gradients
//! and Hessians, and eigenvalues restricted to the tangent subspace.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::StrategyProfile;

/// Projects `v` onto the tangent space at unit vector `s`: `(I - s s^T) v`.
pub fn project_tangent(s: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    v - s * s.dot(v)
}

/// Riemannian gradient of producer `i` given the Euclidean gradient.
///
/// The output is orthogonal to `s_i`.
pub fn riemannian_gradient(
    profile: &StrategyProfile,
    i: usize,
    euclid_grad: &DVector<f64>,
) -> Result<DVector<f64>> {
    let s = strategy(profile, i, euclid_grad.len())?;
    Ok(project_tangent(s, euclid_grad))
}

/// Riemannian Hessian of producer `i`:
/// `(I - s s^T) H (I - s s^T) - <s, g> (I - s s^T)`.
///
/// Symmetric, with `s_i` in its kernel.
pub fn riemannian_hessian(
    profile: &StrategyProfile,
    i: usize,
    euclid_grad: &DVector<f64>,
    euclid_hess: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let s = strategy(profile, i, euclid_grad.len())?;
    let d = s.len();
    if euclid_hess.nrows() != d || euclid_hess.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: euclid_hess.nrows(),
        });
    }
    let proj = DMatrix::identity(d, d) - s * s.transpose();
    let mut h = &proj * euclid_hess * &proj;
    h -= &proj * s.dot(euclid_grad);
    // Symmetrize away rounding; the formula is symmetric exactly.
    let ht = h.transpose();
    Ok((h + ht) * 0.5)
}

/// An orthonormal basis of the subspace orthogonal to unit vector `s`,
/// returned as the columns of a d-by-(d-1) matrix.
///
/// Uses the Householder reflector that maps `e_k -> s` (k the largest
/// component of `s`); the remaining columns of the reflector span `s`-perp.
pub fn tangent_basis(s: &DVector<f64>) -> DMatrix<f64> {
    let d = s.len();
    if d == 1 {
        return DMatrix::zeros(1, 0);
    }
    let k = s
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    // w = s - sign(s_k) e_k, reflector Q = I - 2 w w^T / (w^T w) maps
    // sign(s_k) e_k to s; its other columns are orthonormal and orthogonal
    // to s.
    let sign = if s[k] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = s.clone();
    w[k] -= sign;
    let ww = w.norm_squared();
    let mut basis = DMatrix::zeros(d, d - 1);
    let mut col = 0;
    for j in 0..d {
        if j == k {
            continue;
        }
        // column j of Q: e_j - 2 w_j w / (w^T w)
        let mut q = DVector::zeros(d);
        q[j] = 1.0;
        if ww > 0.0 {
            q.axpy(-2.0 * w[j] / ww, &w, 1.0);
        }
        basis.set_column(col, &q);
        col += 1;
    }
    basis
}

/// Eigenvalues of a symmetric matrix restricted to the tangent space at `s`,
/// computed in an explicit orthonormal tangent basis (a (d-1)-dimensional
/// problem, so the structural zero along `s` cannot leak in). Ascending order.
pub fn tangent_eigenvalues(s: &DVector<f64>, riem_hess: &DMatrix<f64>) -> Vec<f64> {
    let basis = tangent_basis(s);
    if basis.ncols() == 0 {
        return Vec::new();
    }
    let reduced = basis.transpose() * riem_hess * &basis;
    let sym = (&reduced + reduced.transpose()) * 0.5;
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.total_cmp(b));
    eigs
}

fn strategy<'a>(profile: &'a StrategyProfile, i: usize, grad_dim: usize) -> Result<&'a DVector<f64>> {
    if i >= profile.n() {
        return Err(Error::InvalidConfig(format!(
            "producer index {i} out of range for n = {}",
            profile.n()
        )));
    }
    if grad_dim != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: grad_dim,
        });
    }
    Ok(profile.strategy(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn projection_annihilates_normal_direction() {
        let prof = StrategyProfile::new(vec![v(&[0.6, 0.8])]).unwrap();
        let g = riemannian_gradient(&prof, 0, &v(&[0.6, 0.8])).unwrap();
        assert!(g.norm() < 1e-12);
    }

    #[test]
    fn projection_is_identity_on_tangent() {
        let s = v(&[0.6, 0.8]);
        let t = v(&[-0.8, 0.6]);
        let prof = StrategyProfile::new(vec![s]).unwrap();
        let g = riemannian_gradient(&prof, 0, &t).unwrap();
        assert_relative_eq!((g - t).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn projected_gradient_is_orthogonal() {
        let s = v(&[1.0 / 3.0_f64.sqrt(); 3]);
        let prof = StrategyProfile::new(vec![s.clone()]).unwrap();
        let g = riemannian_gradient(&prof, 0, &v(&[0.3, -1.2, 2.0])).unwrap();
        assert!(s.dot(&g).abs() < 1e-12);
    }

    #[test]
    fn hessian_reduction_with_zero_curvature() {
        // H = 0, g = s  => -(I - s s^T): all tangent eigenvalues -1.
        let s = v(&[0.0, 0.0, 1.0]);
        let prof = StrategyProfile::new(vec![s.clone()]).unwrap();
        let h = riemannian_hessian(&prof, 0, &s, &DMatrix::zeros(3, 3)).unwrap();
        let eigs = tangent_eigenvalues(&s, &h);
        assert_eq!(eigs.len(), 2);
        for e in eigs {
            assert_relative_eq!(e, -1.0, epsilon = 1e-12);
        }
        // g = -s flips the sign.
        let h = riemannian_hessian(&prof, 0, &(-&s), &DMatrix::zeros(3, 3)).unwrap();
        for e in tangent_eigenvalues(&s, &h) {
            assert_relative_eq!(e, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn strategy_is_in_hessian_kernel() {
        let s = v(&[0.6, 0.0, 0.8]);
        let prof = StrategyProfile::new(vec![s.clone()]).unwrap();
        let h_full = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.3, -0.1, 0.3, -1.0, 0.5, -0.1, 0.5, 0.7],
        );
        let g = v(&[0.2, 1.0, -0.4]);
        let rh = riemannian_hessian(&prof, 0, &g, &h_full).unwrap();
        assert!((&rh * &s).norm() < 1e-12);
        assert_relative_eq!((&rh - rh.transpose()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_orthogonal_to_s() {
        for dir in [
            v(&[1.0, 0.0, 0.0, 0.0]),
            v(&[-1.0, 0.0, 0.0, 0.0]),
            v(&[0.5, -0.5, 0.5, 0.5]),
        ] {
            let s = &dir / dir.norm();
            let b = tangent_basis(&s);
            assert_eq!(b.ncols(), 3);
            let gram = b.transpose() * &b;
            assert_relative_eq!(
                (gram - DMatrix::identity(3, 3)).norm(),
                0.0,
                epsilon = 1e-12
            );
            assert!((b.transpose() * &s).norm() < 1e-12);
        }
    }
}
