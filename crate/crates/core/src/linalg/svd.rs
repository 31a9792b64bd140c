//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! Columns of a working copy `W = A V` are orthogonalized pairwise by complex
//! plane rotations until every pair is numerically orthogonal; the singular
//! values are then the column norms of `W`. Rotations act on columns only, so
//! small singular values are computed to high relative accuracy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, LinalgError};

/// Sweep budget before giving up.
pub const MAX_SWEEPS: usize = 60;

/// Sweeps stop once the rotated off-diagonal Gram mass `Σ |w_p* w_q|²`
/// drops below this multiple of `‖A‖_F⁴`.
pub const OFF_DIAGONAL_MASS_TOL: f64 = 1e-26;

/// Descending list of non-negative singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SingularValueList(Vec<f64>);

impl SingularValueList {
    /// Sorts and validates arbitrary non-negative values.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self, LinalgError> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(LinalgError::InvalidSingularValues);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `s_1`, or 0 for an empty list.
    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for SingularValueList {
    type Error = LinalgError;

    fn try_from(values: Vec<f64>) -> Result<Self, LinalgError> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0)
            || values.windows(2).any(|w| w[0] < w[1])
        {
            return Err(LinalgError::InvalidSingularValues);
        }
        Ok(Self(values))
    }
}

impl From<SingularValueList> for Vec<f64> {
    fn from(list: SingularValueList) -> Self {
        list.0
    }
}

/// Thin decomposition `A = U diag(s) V*` with `k = min(rows, cols)` columns.
///
/// Columns of `U` belonging to zero singular values are left as zero vectors;
/// they never contribute to `U diag(s) V*`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: SingularValueList,
    pub v: ComplexMatrix,
    pub sweeps: usize,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s: Vec<Complex64> = self
            .singular_values
            .values()
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        self.u
            .matmul(&ComplexMatrix::from_diag(&s))
            .and_then(|us| us.matmul(&self.v.adjoint()))
            .expect("factor shapes agree by construction")
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    a.ensure_finite()?;
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi(&a.adjoint())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
            sweeps: t.sweeps,
        });
    }
    jacobi(a)
}

pub fn svd_values(a: &ComplexMatrix) -> Result<SingularValueList, LinalgError> {
    svd(a).map(|d| d.singular_values)
}

/// Largest singular value (the `p = ∞` Schatten norm).
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64, LinalgError> {
    svd_values(a).map(|s| s.largest())
}

/// Jacobi on a tall (or square) matrix, `rows >= cols`.
fn jacobi(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    let frob2 = a.frobenius_norm().powi(2);
    let mass_tol = OFF_DIAGONAL_MASS_TOL * frob2 * frob2;
    let rel_tol = f64::EPSILON * (m.max(1) as f64);

    let mut sweeps = 0;
    let mut converged = n < 2 || frob2 == 0.0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        sweeps += 1;
        let mut mass = 0.0;
        let mut rotations = 0usize;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm_sqr(&w[p]);
                let beta = norm_sqr(&w[q]);
                let gamma = dot(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= rel_tol * (alpha * beta).sqrt() {
                    continue;
                }
                mass += g * g;
                rotations += 1;
                let (c, s) = rotation(alpha, beta, g);
                // Phase aligns gamma with the positive real axis.
                let phase = gamma.conj() / g;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        converged = rotations == 0 || mass < mass_tol;
    }

    let norms: Vec<f64> = w.iter().map(|col| norm_sqr(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u_mat = ComplexMatrix::zeros(m, n);
    let mut v_mat = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        values.push(s);
        if s > 0.0 {
            for i in 0..m {
                u_mat[(i, k)] = w[j][i] / s;
            }
        }
        for i in 0..n {
            v_mat[(i, k)] = v[j][i];
        }
    }
    Ok(Svd {
        u: u_mat,
        singular_values: SingularValueList(values),
        v: v_mat,
        sweeps,
    })
}

/// Cosine and sine that zero the (real) Gram entry `g` between columns with
/// squared norms `alpha` and `beta`.
fn rotation(alpha: f64, beta: f64, g: f64) -> (f64, f64) {
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t)
}

/// `x ← c x − s φ y`, `y ← s x + c φ y` where `φ` is a unit phase.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (head, tail) = cols.split_at_mut(q);
    let x = &mut head[p];
    let y = &mut tail[0];
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let py = phase * *yi;
        let nx = *xi * c - py * s;
        let ny = *xi * s + py * c;
        *xi = nx;
        *yi = ny;
    }
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `x* y`
fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_values() {
        let s = svd_values(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_values_are_moduli() {
        let s = svd_values(&ComplexMatrix::from_real_diag(&[3.0, -4.0])).unwrap();
        assert_eq!(s.values(), &[4.0, 3.0]);
    }

    #[test]
    fn nilpotent_two_by_two() {
        let a = ComplexMatrix::from_real_rows(&[vec![0., 2.], vec![0., 0.]]).unwrap();
        let s = svd_values(&a).unwrap();
        assert!((s.values()[0] - 2.0).abs() < 1e-15);
        assert!(s.values()[1].abs() < 1e-15);
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 5.0, 2.0]);
        assert_eq!(operator_norm(&a).unwrap(), 5.0);
    }

    #[test]
    fn wide_and_tall_agree() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1., 1.), c(2., 0.), c(0., -3.)],
            vec![c(-1., 0.5), c(0., 0.), c(4., 1.)],
        ])
        .unwrap();
        let wide = svd(&a).unwrap();
        let tall = svd(&a.adjoint()).unwrap();
        assert_eq!(wide.singular_values.len(), 2);
        for (x, y) in wide
            .singular_values
            .values()
            .iter()
            .zip(tall.singular_values.values())
        {
            assert!((x - y).abs() < 1e-13);
        }
        let r = wide.reconstruct().sub(&a).unwrap();
        assert!(r.max_abs() < 1e-13);
    }

    #[test]
    fn rank_deficient_reconstructs() {
        let u = [c(1., 0.), c(0., 2.), c(-1., 1.)];
        let v = [c(0.5, 0.), c(1., -1.), c(0., 0.), c(2., 0.)];
        let a = ComplexMatrix::outer(&u, &v);
        let d = svd(&a).unwrap();
        let s = d.singular_values.values();
        let expected = (7.0f64).sqrt() * (6.25f64).sqrt();
        assert!((s[0] - expected).abs() < 1e-13 * expected);
        assert!(s[1..].iter().all(|&x| x < 1e-13));
        assert!(d.reconstruct().sub(&a).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(svd_values(&a), Err(LinalgError::NonFinite)));
    }

    #[test]
    fn empty_matrix_has_no_values() {
        assert!(svd_values(&ComplexMatrix::zeros(0, 0)).unwrap().is_empty());
        assert!(svd_values(&ComplexMatrix::zeros(3, 0)).unwrap().is_empty());
        assert_eq!(operator_norm(&ComplexMatrix::zeros(0, 0)).unwrap(), 0.0);
    }

    #[test]
    fn singular_value_list_rejects_ascending() {
        assert!(SingularValueList::try_from(vec![1.0, 2.0]).is_err());
        assert!(SingularValueList::try_from(vec![2.0, -1.0]).is_err());
        assert!(SingularValueList::try_from(vec![2.0, 2.0, 0.0]).is_ok());
    }
}
