//! Brute-force reference computations.
//!
//! Nothing here shares a code path with the routines it is used to check:
//! products are triple loops, norms are entrywise sums, eigenvalues come from
//! characteristic polynomials, integrals from midpoint quadrature.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.cols(), b.rows());
    let mut out = ComplexMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = zero();
            for k in 0..a.cols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    let rows: Vec<Vec<Complex64>> = (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].conj()).collect())
        .collect();
    if rows.is_empty() {
        return ComplexMatrix::zeros(0, a.rows());
    }
    ComplexMatrix::from_rows(&rows).expect("rectangular")
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    let mut acc = zero();
    for i in 0..a.rows().min(a.cols()) {
        acc += a[(i, i)];
    }
    acc
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += a[(i, j)].re * a[(i, j)].re + a[(i, j)].im * a[(i, j)].im;
        }
    }
    acc.sqrt()
}

/// `Σ conj(b_ij) a_ij`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let mut acc = zero();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += b[(i, j)].conj() * a[(i, j)];
        }
    }
    acc
}

/// `(Σ |x|^p)^{1/p}` by direct summation; `p = ∞` gives the max.
pub fn lp_norm(values: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    values.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Largest singular value by power iteration on `A* A`.
pub fn power_iteration_norm(a: &ComplexMatrix, iterations: usize) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    let gram = matmul(&adjoint(a), a);
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + i as f64 * 0.37, 0.11 * i as f64))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let y: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|j| gram[(i, j)] * x[j]).sum())
            .collect();
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        x = y.into_iter().map(|z| z / norm).collect();
    }
    lambda.sqrt()
}

/// Characteristic polynomial coefficients `c_0..c_n` (monic, `c_n = 1`) by the
/// Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(h: &ComplexMatrix) -> Vec<Complex64> {
    let n = h.rows();
    assert!(h.is_square());
    let mut coeffs = vec![zero(); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = matmul(h, &m);
        for i in 0..n {
            next[(i, i)] += coeffs[n - k + 1];
        }
        m = next;
        let hm = matmul(h, &m);
        coeffs[n - k] = -trace(&hm) / k as f64;
    }
    coeffs
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = zero();
    let mut dp = zero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a monic polynomial by Aberth–Ehrlich iteration.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(coeffs, z[i]);
            if p == zero() {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-16 {
            break;
        }
    }
    z
}

/// Eigenvalues of a Hermitian matrix, descending, as real parts of the roots
/// of its characteristic polynomial.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let coeffs = characteristic_polynomial(h);
    let mut roots: Vec<f64> = polynomial_roots(&coeffs).into_iter().map(|z| z.re).collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// Squared singular values of `A` from the smaller Gram matrix.
pub fn squared_singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let gram = if a.cols() <= a.rows() {
        matmul(&adjoint(a), a)
    } else {
        matmul(a, &adjoint(a))
    };
    hermitian_eigenvalues(&gram)
}

/// Composite midpoint rule.
pub fn midpoint<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<Complex64>() * h
}

/// Unitary discrete Fourier matrix `F_{jk} = ω^{jk} / √n`, `ω = e^{-2πi/n}`.
pub fn dft(n: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(n, n);
    let scale = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        for k in 0..n {
            let theta = -std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64;
            f[(j, k)] = Complex64::from_polar(scale, theta);
        }
    }
    f
}
