//! Gaussian elimination with partial pivoting: ranks, null spaces, complements
//! and full-column-rank solves.
//!
//! Rank decisions use an absolute threshold `tol · max|a_ij|`; a column whose
//! best remaining pivot falls below it is treated as dependent.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Default relative tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Reduced row echelon form of a matrix together with its pivot columns.
#[derive(Debug, Clone)]
pub struct RowEchelon {
    pub rref: ComplexMatrix,
    /// `pivots[k]` is the column holding the leading one of row `k`.
    pub pivots: Vec<usize>,
}

impl RowEchelon {
    pub fn new(a: &ComplexMatrix, rel_tol: f64) -> Self {
        let (m, n) = a.shape();
        let threshold = rel_tol * a.max_abs();
        let mut r = a.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row == m {
                break;
            }
            let (best, best_abs) = (row..m)
                .map(|i| (i, r[(i, col)].norm()))
                .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best_abs <= threshold || best_abs == 0.0 {
                continue;
            }
            swap_rows(&mut r, row, best);
            let inv = Complex64::new(1.0, 0.0) / r[(row, col)];
            for j in 0..n {
                r[(row, j)] *= inv;
            }
            for i in 0..m {
                if i == row {
                    continue;
                }
                let f = r[(i, col)];
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let t = r[(row, j)];
                    r[(i, j)] -= f * t;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Self { rref: r, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of the null space, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<Complex64>> {
        let n = self.rref.cols();
        let free: Vec<usize> = (0..n).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Complex64::new(0.0, 0.0); n];
                x[f] = Complex64::new(1.0, 0.0);
                for (k, &pc) in self.pivots.iter().enumerate() {
                    x[pc] = -self.rref[(k, f)];
                }
                x
            })
            .collect()
    }
}

pub fn rank(a: &ComplexMatrix, rel_tol: f64) -> usize {
    RowEchelon::new(a, rel_tol).rank()
}

pub fn null_space(a: &ComplexMatrix, rel_tol: f64) -> Vec<Vec<Complex64>> {
    RowEchelon::new(a, rel_tol).null_space()
}

/// Standard basis indices `E` such that `[C | e_E]` is a basis of the ambient
/// space, for `C` of full column rank.
pub fn complement_indices(c: &ComplexMatrix, rel_tol: f64) -> Vec<usize> {
    let (m, r) = c.shape();
    let mut aug = ComplexMatrix::zeros(m, r + m);
    for i in 0..m {
        for j in 0..r {
            aug[(i, j)] = c[(i, j)];
        }
        aug[(i, r + i)] = Complex64::new(1.0, 0.0);
    }
    RowEchelon::new(&aug, rel_tol)
        .pivots
        .into_iter()
        .filter(|&p| p >= r)
        .map(|p| p - r)
        .collect()
}

/// Solves `C X = B` for `C` of full column rank whose column space contains
/// the columns of `B`. Elimination runs on the augmented matrix so identical
/// left and right blocks stay bitwise identical.
pub fn solve_full_column_rank(
    c: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<ComplexMatrix, LinalgError> {
    let (m, n) = c.shape();
    if b.rows() != m {
        return Err(LinalgError::DimensionMismatch {
            op: "solve",
            left: c.shape(),
            right: b.shape(),
        });
    }
    let k = b.cols();
    let mut aug = ComplexMatrix::zeros(m, n + k);
    for i in 0..m {
        for j in 0..n {
            aug[(i, j)] = c[(i, j)];
        }
        for j in 0..k {
            aug[(i, n + j)] = b[(i, j)];
        }
    }
    let threshold = RANK_TOL * c.max_abs();
    for col in 0..n {
        let (best, best_abs) = (col..m)
            .map(|i| (i, aug[(i, col)].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= threshold || best_abs == 0.0 {
            return Err(LinalgError::RankDeficient {
                expected: n,
                found: col,
            });
        }
        swap_rows(&mut aug, col, best);
        for i in col + 1..m {
            let f = aug[(i, col)] / aug[(col, col)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n + k {
                let t = aug[(col, j)];
                aug[(i, j)] -= f * t;
            }
        }
    }
    let mut x = ComplexMatrix::zeros(n, k);
    for j in 0..k {
        for i in (0..n).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in i + 1..n {
                acc += aug[(i, l)] * x[(l, j)];
            }
            x[(i, j)] = (aug[(i, n + j)] - acc) / aug[(i, i)];
        }
    }
    Ok(x)
}

/// Gauss–Jordan inverse of a square matrix.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut aug = ComplexMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
        aug[(i, n + i)] = Complex64::new(1.0, 0.0);
    }
    let red = RowEchelon::new(&aug, RANK_TOL);
    if red.pivots.len() < n || red.pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) {
        return Err(LinalgError::RankDeficient {
            expected: n,
            found: red.pivots.iter().filter(|&&p| p < n).count(),
        });
    }
    let mut inv = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = red.rref[(i, n + j)];
        }
    }
    Ok(inv)
}

fn swap_rows(a: &mut ComplexMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..a.cols() {
        let t = a[(i, c)];
        a[(i, c)] = a[(j, c)];
        a[(j, c)] = t;
    }
}
