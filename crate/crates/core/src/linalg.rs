//! Dense kernels for the small symmetric systems that show up in model fitting:
//! Cholesky factorization, SPD solves and inverses, and quadratic forms.
//!
//! Matrices are row-major `f64`. Vectors are plain slices.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally sized rows.
    ///
    /// # Panics
    /// If the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok(self.row_iter().map(|r| dot(r, x)).collect())
    }

    /// `Aᵀv` without forming the transpose.
    pub fn tr_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (row, &vi) in self.row_iter().zip(v) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Largest |A_ij − A_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows.min(self.cols) {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Accumulates `Σ w_i x_i x_iᵀ` one row at a time. With `weights = None`
/// every row has weight one, giving `XᵀX`.
pub fn weighted_gram(x: &Matrix, weights: Option<&[f64]>) -> Matrix {
    let p = x.cols();
    let mut g = Matrix::zeros(p, p);
    for (i, row) in x.row_iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        for a in 0..p {
            let wa = w * row[a];
            for b in 0..=a {
                g[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            g[(b, a)] = g[(a, b)];
        }
    }
    g
}

/// Lower-triangular `L` with `L Lᵀ = A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        // forward: L z = b
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.l[(i, k)] * z[k];
            }
            z[i] = s / self.l[(i, i)];
        }
        // backward: Lᵀ x = z
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * z[k];
            }
            z[i] = s / self.l[(i, i)];
        }
        Ok(z)
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // exact symmetry
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = m;
                inv[(j, i)] = m;
            }
        }
        inv
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// A pivot at or below `p · ε · max diag(A)` is treated as a loss of
/// positive definiteness.
pub fn cholesky(a: &Matrix) -> Result<Cholesky> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "matrix" });
    }
    let asym = a.asymmetry();
    if asym > 1e-10 * a.max_abs() {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let max_diag = (0..n).fold(0.0_f64, |m, i| m.max(a[(i, i)]));
    let tol = n as f64 * f64::EPSILON * max_diag;

    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(Cholesky { l })
}

pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    cholesky(a)?.solve(b)
}

pub fn spd_inverse(a: &Matrix) -> Result<Matrix> {
    Ok(cholesky(a)?.inverse())
}

/// `xᵀ A x`.
pub fn quadratic_form(a: &Matrix, x: &[f64]) -> Result<f64> {
    if !a.is_square() || a.rows() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: x.len(),
        });
    }
    let mut total = 0.0;
    for (i, row) in a.row_iter().enumerate() {
        total += x[i] * dot(row, x);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cholesky_identity() {
        let c = cholesky(&Matrix::from_rows(&[[1.0]])).unwrap();
        assert_eq!(c.factor(), &Matrix::from_rows(&[[1.0]]));
    }

    #[test]
    fn cholesky_two_by_two() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 5.0]]);
        let c = cholesky(&a).unwrap();
        assert_eq!(c.factor(), &Matrix::from_rows(&[[2.0, 0.0], [1.0, 2.0]]));
        let llt = c.factor().matmul(&c.factor().transpose()).unwrap();
        assert_eq!(llt, a);
    }

    #[test]
    fn cholesky_indefinite() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn cholesky_rejects_asymmetric_and_nan() {
        let a = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]);
        assert!(matches!(cholesky(&a), Err(Error::NotSymmetric { .. })));
        let a = Matrix::from_rows(&[[f64::NAN]]);
        assert!(matches!(cholesky(&a), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn solve_examples() {
        let x = solve_spd(&Matrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 5.0]]);
        let x = solve_spd(&a, &[6.0, 7.0]).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            solve_spd(&Matrix::from_rows(&[[2.0]]), &[3.0]).unwrap()[0],
            1.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn quadratic_form_examples() {
        assert_eq!(quadratic_form(&Matrix::identity(2), &[3.0, 4.0]).unwrap(), 25.0);
        let a = Matrix::from_rows(&[[5.0, -3.0], [-3.0, 3.0]]).scaled(1.0 / 6.0);
        assert_relative_eq!(quadratic_form(&a, &[1.0, 1.0]).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(quadratic_form(&a, &[1.0, 4.0]).unwrap(), 29.0 / 6.0, epsilon = 1e-14);
        assert!(matches!(
            quadratic_form(&a, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(spd_inverse(&Matrix::identity(2)).unwrap(), Matrix::identity(2));
        let inv = spd_inverse(&Matrix::from_rows(&[[3.0, 3.0], [3.0, 5.0]])).unwrap();
        let want = [[5.0 / 6.0, -0.5], [-0.5, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(inv[(i, j)], want[i][j], epsilon = 1e-15);
            }
        }
        let inv = spd_inverse(&Matrix::from_rows(&[[2.0, 0.0], [0.0, 4.0]])).unwrap();
        assert_relative_eq!(inv[(0, 0)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(inv[(1, 1)], 0.25, epsilon = 1e-15);
        assert_eq!(inv[(0, 1)], 0.0);
    }

    #[test]
    fn gram_matches_transpose_product() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
        assert_eq!(weighted_gram(&x, None), Matrix::from_rows(&[[3.0, 3.0], [3.0, 5.0]]));
        let g = weighted_gram(&x, Some(&[2.0, 1.0, 0.5]));
        assert_eq!(
            g,
            x.transpose()
                .matmul(&Matrix::from_fn(3, 2, |i, j| { [2.0, 1.0, 0.5][i] * x[(i, j)] }))
                .unwrap()
        );
    }
}
