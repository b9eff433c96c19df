//! Dense row-major matrices and vectors with the handful of factorizations
//! the rest of the crate needs.

use std::ops::{Deref, Index, IndexMut};

use crate::{Error, Result, Scalar};

/// Dense row-major matrix. Entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Dense vector. Entries are finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector<T>(Vec<T>);

fn check_finite<T: Scalar>(data: &[T]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

impl<T: Scalar> Vector<T> {
    pub fn new(data: Vec<T>) -> Result<Self> {
        check_finite(&data)?;
        Ok(Vector(data))
    }

    pub fn zeros(len: usize) -> Self {
        Vector(vec![T::zero(); len])
    }

    /// Wraps data produced by an internal computation that is finite by
    /// construction.
    pub(crate) fn from_raw(data: Vec<T>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Vector(data)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn dot(&self, other: &[T]) -> T {
        dot(&self.0, other)
    }

    pub fn norm1(&self) -> T {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm2_sq(&self) -> T {
        self.0.iter().map(|v| *v * *v).sum()
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn sub(&self, other: &Vector<T>) -> Result<Vector<T>> {
        if self.len() != other.len() {
            return Err(Error::dims("vector sub", self.len(), other.len()));
        }
        Ok(Vector(
            self.0.iter().zip(&other.0).map(|(a, b)| *a - *b).collect(),
        ))
    }
}

impl<T> Deref for Vector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for Vector<T> {
    type Error = Error;
    fn try_from(data: Vec<T>) -> Result<Self> {
        Vector::new(data)
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

impl<T: Scalar> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(
                "Matrix::from_vec",
                format!("{rows}x{cols} = {} entries", rows * cols),
                data.len(),
            ));
        }
        check_finite(&data)?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dims("Matrix::from_rows", cols, format!("row {i} of length {}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::from_vec(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, factor: T) -> Matrix<T> {
        Matrix::from_raw(self.rows, self.cols, self.data.iter().map(|v| *v * factor).collect())
    }

    /// Submatrix keeping the listed columns in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix<T> {
        let mut out = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            out.extend(cols.iter().map(|&j| row[j]));
        }
        Matrix::from_raw(self.rows, cols.len(), out)
    }

    /// Submatrix with the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            let row = self.row(i);
            out.extend(cols.iter().map(|&j| row[j]));
        }
        Matrix::from_raw(rows.len(), cols.len(), out)
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vector<T>> {
        if x.len() != self.cols {
            return Err(Error::dims("mul_vec", self.cols, x.len()));
        }
        Ok(Vector::from_raw(
            (0..self.rows).map(|i| dot(self.row(i), x)).collect(),
        ))
    }

    /// `selfᵀ · x`.
    pub fn t_mul_vec(&self, x: &[T]) -> Result<Vector<T>> {
        if x.len() != self.rows {
            return Err(Error::dims("t_mul_vec", self.rows, x.len()));
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == T::zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += *a * *xi;
            }
        }
        Ok(Vector::from_raw(out))
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Matrix<T> {
        let p = self.cols;
        let mut g = Matrix::zeros(p, p);
        for i in 0..self.rows {
            let row = self.row(i);
            for a in 0..p {
                let ra = row[a];
                if ra == T::zero() {
                    continue;
                }
                let grow = &mut g.data[a * p..(a + 1) * p];
                for b in a..p {
                    grow[b] += ra * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                g.data[a * p + b] = g.data[b * p + a];
            }
        }
        g
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix<T>) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense product `a · b`.
pub fn mat_mul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(Error::dims(
            "mat_mul",
            format!("b.rows = {}", a.cols),
            format!("b.rows = {}", b.rows),
        ));
    }
    let mut c = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let arow = a.row(i);
        let crow = c.row_mut(i);
        for (k, aik) in arow.iter().enumerate() {
            if *aik == T::zero() {
                continue;
            }
            for (cij, bkj) in crow.iter_mut().zip(b.row(k)) {
                *cij += *aik * *bkj;
            }
        }
    }
    Ok(c)
}

/// Upper-triangular `U` with `Uᵀ U = a`. Only the upper triangle of `a` is
/// read.
pub fn cholesky_factor<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::dims("cholesky_factor", "square matrix", format!("{}x{}", a.rows, a.cols)));
    }
    let n = a.rows;
    let mut u = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= u[(k, j)] * u[(k, j)];
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let ujj = d.sqrt();
        u[(j, j)] = ujj;
        for i in j + 1..n {
            let mut s = a[(j, i)];
            for k in 0..j {
                s -= u[(k, j)] * u[(k, i)];
            }
            u[(j, i)] = s / ujj;
        }
    }
    Ok(u)
}

/// Solves `Uᵀ z = b` for upper-triangular `U`.
pub(crate) fn solve_upper_transposed<T: Scalar>(u: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = u.rows;
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= u[(k, i)] * z[k];
        }
        z[i] = s / u[(i, i)];
    }
    z
}

/// Solves `U x = z` for upper-triangular `U`.
pub(crate) fn solve_upper<T: Scalar>(u: &Matrix<T>, z: &[T]) -> Vec<T> {
    let n = u.rows;
    let mut x = z.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= u[(i, k)] * x[k];
        }
        x[i] = s / u[(i, i)];
    }
    x
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn solve_spd<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Vector<T>> {
    if a.rows != b.len() {
        return Err(Error::dims("solve_spd", a.rows, b.len()));
    }
    let u = cholesky_factor(a)?;
    let z = solve_upper_transposed(&u, b);
    Ok(Vector::from_raw(solve_upper(&u, &z)))
}

/// Inverse of a symmetric positive definite matrix.
pub fn inverse_spd<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let u = cholesky_factor(a)?;
    let n = a.rows;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = T::zero());
        e[j] = T::one();
        let x = solve_upper(&u, &solve_upper_transposed(&u, &e));
        for i in 0..n {
            inv[(i, j)] = x[i];
        }
    }
    Ok(inv)
}

/// Maximum absolute row sum.
pub fn inf_norm<T: Scalar>(a: &Matrix<T>) -> T {
    (0..a.rows)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<T>())
        .fold(T::zero(), T::max)
}

fn check_symmetric<T: Scalar>(a: &Matrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::dims("symmetric matrix", "square", format!("{}x{}", a.rows, a.cols)));
    }
    let tol = 1e-12 * a.data.iter().fold(1.0f64, |acc, v| acc.max(v.abs().as_f64()));
    for i in 0..a.rows {
        for j in i + 1..a.cols {
            let gap = (a[(i, j)] - a[(j, i)]).abs().as_f64();
            if gap > tol {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in
/// ascending order.
pub fn eigenvalues_sym<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    check_symmetric(a)?;
    let n = a.rows;
    let mut m = a.clone();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += m[(i, i)] * m[(i, i)];
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(ev)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigen_sym<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    if a.rows == 0 {
        return Err(Error::invalid("a", "empty matrix"));
    }
    Ok(eigenvalues_sym(a)?[0])
}

/// `sign(x) · max(|x| − t, 0)`.
pub fn soft_threshold<T: Scalar>(x: T, t: T) -> T {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        T::zero()
    }
}

/// Symmetric Toeplitz covariance `T(ρ)` with entries `ρ^|i−j|`.
pub fn toeplitz<T: Scalar>(p: usize, rho: T) -> Matrix<T> {
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            m[(i, j)] = rho.powi(i.abs_diff(j) as i32);
        }
    }
    m
}
