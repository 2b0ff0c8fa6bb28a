//! Small dense linear-algebra helpers for proposal shapes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Projection onto `{Σ symmetric : eps ≤ λ_min(Σ) ≤ λ_max(Σ) ≤ 1/eps}` by
/// clamping eigenvalues; eigenvectors are preserved.
pub fn project_spd(m: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    if is_within_spectrum_bounds(&sym, eps) {
        return sym;
    }
    let eig = sym.symmetric_eigen();
    let clamped = eig.eigenvalues.map(|l| l.clamp(eps, 1.0 / eps));
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&clamped) * q.transpose()
}

// Sufficient check: Σ − eps·I positive definite and trace ≤ 1/eps.
fn is_within_spectrum_bounds(sym: &DMatrix<f64>, eps: f64) -> bool {
    if !sym.iter().all(|v| v.is_finite()) || sym.trace() > 1.0 / eps {
        return false;
    }
    let shifted = sym - DMatrix::identity(sym.nrows(), sym.ncols()) * eps;
    shifted.cholesky().is_some()
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Cholesky(format!("matrix of order {} is not positive definite", m.nrows())))
}

/// Rank-one modification of a lower Cholesky factor in place:
/// `L' L'ᵀ = L Lᵀ + sign · v vᵀ` with `sign = ±1`. `v` is used as workspace.
///
/// Fails (leaving `l` partially modified) when a downdate would lose positive
/// definiteness; callers keep a copy if they need to roll back.
pub fn cholesky_rank_one(l: &mut DMatrix<f64>, v: &mut DVector<f64>, sign: f64) -> Result<()> {
    let n = l.nrows();
    for j in 0..n {
        let ljj = l[(j, j)];
        let vj = v[j];
        let arg = ljj * ljj + sign * vj * vj;
        if !(arg > 0.0) {
            return Err(Error::Cholesky(format!("rank-one downdate lost definiteness at column {j}")));
        }
        let r = arg.sqrt();
        let c = r / ljj;
        let s = vj / ljj;
        l[(j, j)] = r;
        for i in (j + 1)..n {
            l[(i, j)] = (l[(i, j)] + sign * s * v[i]) / c;
            v[i] = c * v[i] - s * l[(i, j)];
        }
    }
    Ok(())
}

/// `log N(z; 0, L Lᵀ)` for a lower-triangular factor `L`.
pub fn gaussian_log_density(factor: &DMatrix<f64>, z: &[f64]) -> f64 {
    let d = z.len();
    let w = factor
        .solve_lower_triangular(&DVector::from_column_slice(z))
        .expect("factor has a non-zero diagonal");
    let log_det: f64 = (0..d).map(|i| factor[(i, i)].abs().ln()).sum();
    -0.5 * w.norm_squared() - log_det - 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(d, d) * 0.1
    }

    #[test]
    fn projection_is_identity_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_spd(&mut rng, 4);
        let p = project_spd(&m, 1e-6);
        assert!((p - m).norm() < 1e-14);
    }

    #[test]
    fn projection_clamps_eigenvalues() {
        // rank one: zero eigenvalues must rise to eps
        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let m = &v * v.transpose();
        let p = project_spd(&m, 1e-3);
        let eig = p.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        assert!((min - 1e-3).abs() < 1e-12, "{min}");
        assert!((eig.eigenvalues.max() - 6.0).abs() < 1e-10);
        // too large eigenvalue is capped
        let big = DMatrix::from_diagonal(&DVector::from_vec(vec![1e9, 1.0]));
        let p = project_spd(&big, 1e-6);
        assert!((p[(0, 0)] - 1e6).abs() < 1e-6);
        assert!((p[(1, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_update_and_downdate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &sign in &[1.0, -1.0] {
            let m = random_spd(&mut rng, 5);
            let mut l = cholesky_lower(&m).unwrap();
            let v = DVector::from_fn(5, |_, _| rng.random_range(-0.2..0.2));
            let expected = &m + &v * v.transpose() * sign;
            let mut work = v.clone();
            cholesky_rank_one(&mut l, &mut work, sign).unwrap();
            assert!((&l * l.transpose() - expected).norm() < 1e-10);
            assert!(l.upper_triangle().iter().enumerate().all(|(k, &x)| k % 6 == 0 || x == 0.0));
        }
    }

    #[test]
    fn downdate_past_definiteness_fails() {
        let mut l = DMatrix::identity(2, 2);
        let mut v = DVector::from_vec(vec![1.5, 0.0]);
        assert!(cholesky_rank_one(&mut l, &mut v, -1.0).is_err());
    }

    #[test]
    fn gaussian_density_matches_scalar_formula() {
        let l = DMatrix::from_element(1, 1, 2.0);
        let v = gaussian_log_density(&l, &[1.0]);
        let expected = -0.5 * 0.25 - 2f64.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((v - expected).abs() < 1e-14);
    }
}
