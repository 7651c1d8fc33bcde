//! Dense matrices over the real or complex field, together with the
//! predicates and functionals everything else is built on: disjointness,
//! partial isometries, the Jordan triple product, singular values and the
//! Schatten / Ky Fan families.
//!
//! Entries are always stored as `Complex64`. A matrix tagged [`Field::Real`]
//! carries zero imaginary parts. Factorizations (SVD, Hermitian eigen) are
//! computed by `faer` and run the real routine for real matrices, so real
//! inputs produce real orthogonal factors.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::c64;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scalar field of a matrix space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("real matrix has a non-zero imaginary part")]
    NotReal,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Numerical policy threaded through every decision.
///
/// A quantity counts as zero when it is at most `residual * scale`, where the
/// scale is the product of the operands' max-norms floored at one. Numerical
/// rank keeps singular values above `rank_cut * sigma_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_cut: f64,
    pub residual: f64,
    pub sample_trials: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_cut: 1e-9,
            residual: 1e-9,
            sample_trials: 200,
        }
    }
}

impl Tolerances {
    pub fn new(rank_cut: f64, residual: f64, sample_trials: usize) -> Result<Self, MatError> {
        if !(rank_cut > 0.0 && rank_cut < 1.0) {
            return Err(MatError::InvalidParameter(format!(
                "rank_cut must lie in (0, 1), got {rank_cut}"
            )));
        }
        if !(residual > 0.0 && residual.is_finite()) {
            return Err(MatError::InvalidParameter(format!(
                "residual must be positive, got {residual}"
            )));
        }
        if sample_trials == 0 {
            return Err(MatError::InvalidParameter(
                "sample_trials must be at least 1".into(),
            ));
        }
        Ok(Tolerances {
            rank_cut,
            residual,
            sample_trials,
        })
    }

    /// Same policy with a different residual threshold.
    pub fn with_residual(self, residual: f64) -> Result<Self, MatError> {
        Tolerances::new(self.rank_cut, residual, self.sample_trials)
    }

    pub fn with_trials(self, sample_trials: usize) -> Result<Self, MatError> {
        Tolerances::new(self.rank_cut, self.residual, sample_trials)
    }

    /// `true` when `value <= residual * max(1, scale)`.
    pub fn is_negligible(&self, value: f64, scale: f64) -> bool {
        value <= self.residual * scale.max(1.0)
    }
}

/// Dense row-by-column matrix over [`Field`].
#[derive(Clone, PartialEq)]
pub struct Mat {
    data: DMatrix<Complex64>,
    field: Field,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat<{}>{}x{} ", self.field, self.rows(), self.cols())?;
        f.debug_list()
            .entries((0..self.rows()).map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.data[(i, j)];
                        if self.field == Field::Real {
                            format!("{}", z.re)
                        } else {
                            format!("{}{:+}i", z.re, z.im)
                        }
                    })
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize, field: Field) -> Self {
        Mat {
            data: DMatrix::zeros(rows, cols),
            field,
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        Mat {
            data: DMatrix::identity(n, n),
            field,
        }
    }

    /// Standard basis matrix `E_ij` (zero-based indices).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize, field: Field) -> Self {
        let mut m = Mat::zeros(rows, cols, field);
        m.data[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    /// Real matrix from row-major entries.
    pub fn real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Mat {
            data: DMatrix::from_fn(rows, cols, |i, j| {
                Complex64::new(entries[i * cols + j], 0.0)
            }),
            field: Field::Real,
        }
    }

    /// Complex matrix from row-major entries.
    pub fn complex(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Mat {
            data: DMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j]),
            field: Field::Complex,
        }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        field: Field,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let data = DMatrix::from_fn(rows, cols, |i, j| {
            let z = f(i, j);
            match field {
                Field::Real => Complex64::new(z.re, 0.0),
                Field::Complex => z,
            }
        });
        Mat { data, field }
    }

    /// Wraps an nalgebra matrix; a real tag requires vanishing imaginary parts.
    pub fn from_dmatrix(data: DMatrix<Complex64>, field: Field) -> Result<Self, MatError> {
        if field == Field::Real && data.iter().any(|z| z.im != 0.0) {
            return Err(MatError::NotReal);
        }
        Ok(Mat { data, field })
    }

    pub(crate) fn from_parts(data: DMatrix<Complex64>, field: Field) -> Self {
        Mat { data, field }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[(i, j)] = match self.field {
            Field::Real => Complex64::new(value.re, 0.0),
            Field::Complex => value,
        };
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.data
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Mat {
        Mat {
            data: self.data.adjoint(),
            field: self.field,
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat {
            data: self.data.transpose(),
            field: self.field,
        }
    }

    pub fn scale(&self, c: f64) -> Mat {
        Mat {
            data: self.data.map(|z| z * c),
            field: self.field,
        }
    }

    /// Multiplies by a field scalar. A real matrix scaled by a non-real
    /// number is promoted to the complex field.
    pub fn scale_c(&self, c: Complex64) -> Mat {
        let field = if c.im != 0.0 {
            Field::Complex
        } else {
            self.field
        };
        Mat {
            data: self.data.map(|z| z * c),
            field,
        }
    }

    /// Same entries viewed over the complex field.
    pub fn to_complex(&self) -> Mat {
        Mat {
            data: self.data.clone(),
            field: Field::Complex,
        }
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn column(&self, j: usize) -> DVector<Complex64> {
        self.data.column(j).into_owned()
    }

    /// Copy of the `nrows x ncols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Mat {
        Mat {
            data: self.data.view((r0, c0), (nrows, ncols)).into_owned(),
            field: self.field,
        }
    }

    /// Overwrites the block starting at `(r0, c0)` with `src`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Mat) {
        self.data
            .view_mut((r0, c0), (src.rows(), src.cols()))
            .copy_from(&src.data);
    }

    /// Columns picked in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Mat {
        Mat {
            data: self.data.select_columns(idx),
            field: self.field,
        }
    }

    pub fn from_columns(rows: usize, columns: &[DVector<Complex64>], field: Field) -> Mat {
        let mut data = DMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            data.set_column(j, c);
        }
        Mat::from_parts(data, field)
    }

    /// Horizontal concatenation; all parts need the same row count.
    pub fn hcat(parts: &[&Mat], rows: usize, field: Field) -> Mat {
        let cols = parts.iter().map(|p| p.cols()).sum();
        let mut out = Mat::zeros(rows, cols, field);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols();
        }
        out
    }

    /// Kronecker product with block `(i, j)` equal to `self[i, j] * other`.
    pub fn kron(&self, other: &Mat) -> Mat {
        Mat {
            data: self.data.kronecker(&other.data),
            field: join_field(self.field, other.field),
        }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[&Mat], field: Field) -> Mat {
        let rows = blocks.iter().map(|b| b.rows()).sum();
        let cols = blocks.iter().map(|b| b.cols()).sum();
        let mut out = Mat::zeros(rows, cols, field);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows();
            c0 += b.cols();
        }
        out
    }

    pub fn diag_real(values: &[f64], field: Field) -> Mat {
        let n = values.len();
        Mat::from_fn(n, n, field, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn try_mul(&self, rhs: &Mat) -> Result<Mat, MatError> {
        same_field(self, rhs)?;
        if self.cols() != rhs.rows() {
            return Err(MatError::ShapeMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Mat {
            data: &self.data * &rhs.data,
            field: self.field,
        })
    }

    pub fn try_add(&self, rhs: &Mat) -> Result<Mat, MatError> {
        same_shape_and_field(self, rhs)?;
        Ok(Mat {
            data: &self.data + &rhs.data,
            field: self.field,
        })
    }

    pub fn try_sub(&self, rhs: &Mat) -> Result<Mat, MatError> {
        same_shape_and_field(self, rhs)?;
        Ok(Mat {
            data: &self.data - &rhs.data,
            field: self.field,
        })
    }

    /// Adds `c * other` in place; shapes must agree.
    pub fn axpy(&mut self, c: Complex64, other: &Mat) {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.zip_apply(&other.data, |a, b| *a += c * b);
    }
}

fn join_field(a: Field, b: Field) -> Field {
    if a == Field::Complex || b == Field::Complex {
        Field::Complex
    } else {
        Field::Real
    }
}

pub(crate) fn same_field(a: &Mat, b: &Mat) -> Result<(), MatError> {
    if a.field != b.field {
        return Err(MatError::FieldMismatch(a.field, b.field));
    }
    Ok(())
}

pub(crate) fn same_shape_and_field(a: &Mat, b: &Mat) -> Result<(), MatError> {
    same_field(a, b)?;
    if a.shape() != b.shape() {
        return Err(MatError::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

impl<'a> Mul<&'a Mat> for &'a Mat {
    type Output = Mat;

    fn mul(self, rhs: &'a Mat) -> Mat {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl<'a> Add<&'a Mat> for &'a Mat {
    type Output = Mat;

    fn add(self, rhs: &'a Mat) -> Mat {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl<'a> Sub<&'a Mat> for &'a Mat {
    type Output = Mat;

    fn sub(self, rhs: &'a Mat) -> Mat {
        self.try_sub(rhs).expect("matrix difference")
    }
}

impl Mul<&Mat> for Mat {
    type Output = Mat;

    fn mul(self, rhs: &Mat) -> Mat {
        &self * rhs
    }
}

impl Add<&Mat> for Mat {
    type Output = Mat;

    fn add(self, rhs: &Mat) -> Mat {
        &self + rhs
    }
}

impl Sub<&Mat> for Mat {
    type Output = Mat;

    fn sub(self, rhs: &Mat) -> Mat {
        &self - rhs
    }
}

impl Neg for &Mat {
    type Output = Mat;

    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

/// Compact singular value decomposition `A = left * diag(singulars) * right^*`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: Mat,
    pub singulars: Vec<f64>,
    pub right: Mat,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singulars.len()
    }

    pub fn reconstruct(&self) -> Mat {
        let d = Mat::diag_real(&self.singulars, self.left.field());
        &(&self.left * &d) * &self.right.adjoint()
    }
}

/// Thin SVD with singular values sorted in non-increasing order (ties keep
/// their original index order).
fn to_faer_real(a: &DMatrix<Complex64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].re)
}

fn to_faer_complex(a: &DMatrix<Complex64>) -> faer::Mat<c64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        c64::new(z.re, z.im)
    })
}

fn from_faer_real(m: faer::MatRef<'_, f64>, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), cols, |i, j| Complex64::new(m[(i, j)], 0.0))
}

fn from_faer_complex(m: faer::MatRef<'_, c64>, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), cols, |i, j| {
        let z = m[(i, j)];
        Complex64::new(z.re, z.im)
    })
}

/// Thin SVD `A = U diag(s) V^*` with `min(rows, cols)` singular values,
/// sorted non-increasing (ties keep their order).
pub(crate) fn full_svd(a: &Mat) -> (DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>) {
    let h = a.rows().min(a.cols());
    let (u, s, v) = match a.field {
        Field::Real => {
            let svd = to_faer_real(&a.data).svd().expect("SVD converges");
            let s: Vec<f64> = (0..h).map(|i| svd.S()[i]).collect();
            (from_faer_real(svd.U(), h), s, from_faer_real(svd.V(), h))
        }
        Field::Complex => {
            let svd = to_faer_complex(&a.data).svd().expect("SVD converges");
            let s: Vec<f64> = (0..h).map(|i| svd.S()[i].re).collect();
            (
                from_faer_complex(svd.U(), h),
                s,
                from_faer_complex(svd.V(), h),
            )
        }
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sorted = order.iter().map(|&i| s[i]).collect();
    (u.select_columns(&order), sorted, v.select_columns(&order))
}

/// All `min(rows, cols)` singular values, non-increasing.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = match a.field {
        Field::Real => to_faer_real(&a.data)
            .singular_values()
            .expect("SVD converges"),
        Field::Complex => to_faer_complex(&a.data)
            .singular_values()
            .expect("SVD converges"),
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Compact SVD keeping singular values above `tol.rank_cut * sigma_max`.
/// The zero matrix yields empty factors.
pub fn compact_svd(a: &Mat, tol: &Tolerances) -> SvdResult {
    let (r, c) = a.shape();
    let empty = || SvdResult {
        left: Mat::zeros(r, 0, a.field),
        singulars: Vec::new(),
        right: Mat::zeros(c, 0, a.field),
    };
    if r == 0 || c == 0 || a.max_norm() == 0.0 {
        return empty();
    }
    let (u, s, v) = full_svd(a);
    let smax = s[0];
    if !(smax > 0.0 && smax.is_finite()) {
        return empty();
    }
    let k = s.iter().take_while(|&&x| x > tol.rank_cut * smax).count();
    SvdResult {
        left: Mat::from_parts(u.columns(0, k).into_owned(), a.field),
        singulars: s[..k].to_vec(),
        right: Mat::from_parts(v.columns(0, k).into_owned(), a.field),
    }
}

/// Eigen-decomposition of the Hermitian part `(A + A^*)/2` of a square
/// matrix: returns eigenvalues and a unitary whose columns are eigenvectors.
pub fn hermitian_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    assert!(a.is_square(), "hermitian_eigen needs a square matrix");
    let d = a.rows();
    let h = (&a.data + a.data.adjoint()) * Complex64::new(0.5, 0.0);
    match a.field {
        Field::Real => {
            let e = to_faer_real(&h)
                .self_adjoint_eigen(faer::Side::Lower)
                .expect("eigensolver converges");
            (
                (0..d).map(|i| e.S()[i]).collect(),
                Mat::from_parts(from_faer_real(e.U(), d), Field::Real),
            )
        }
        Field::Complex => {
            let e = to_faer_complex(&h)
                .self_adjoint_eigen(faer::Side::Lower)
                .expect("eigensolver converges");
            (
                (0..d).map(|i| e.S()[i].re).collect(),
                Mat::from_parts(from_faer_complex(e.U(), d), Field::Complex),
            )
        }
    }
}

/// Nearest unitary in Frobenius distance (the unitary polar factor).
pub fn nearest_unitary(a: &Mat) -> Mat {
    assert!(a.is_square(), "nearest_unitary needs a square matrix");
    if a.rows() == 0 {
        return a.clone();
    }
    let (u, _, v) = full_svd(a);
    Mat::from_parts(u * v.adjoint(), a.field)
}

/// `‖A^*A − I‖_max` for a square matrix, `+inf` otherwise.
pub fn unitarity_defect(a: &Mat) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let g = a.data.adjoint() * &a.data;
    let mut worst = 0.0_f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn is_unitary(a: &Mat, tol: f64) -> bool {
    unitarity_defect(a) <= tol
}

fn orthogonalize(v: &mut DVector<Complex64>, basis: &[DVector<Complex64>]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(v);
            v.axpy(-c, b, Complex64::new(1.0, 0.0));
        }
    }
}

/// Orthonormalizes the columns of `frame` and extends them to a full
/// unitary of size `frame.rows()`. Completion vectors are drawn greedily from
/// the standard basis, so real frames complete to real orthogonal matrices.
pub fn complete_to_unitary(frame: &Mat) -> Mat {
    let d = frame.rows();
    assert!(frame.cols() <= d, "more columns than the ambient dimension");
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(d);
    for j in 0..frame.cols() {
        let mut v = frame.column(j);
        orthogonalize(&mut v, &basis);
        let nrm = v.norm();
        if nrm > 0.0 {
            v.unscale_mut(nrm);
        }
        basis.push(v);
    }
    while basis.len() < d {
        let mut best: Option<(f64, DVector<Complex64>)> = None;
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = Complex64::new(1.0, 0.0);
            orthogonalize(&mut e, &basis);
            let nrm = e.norm();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, e));
            }
        }
        let (nrm, mut e) = best.expect("non-empty candidate set");
        e.unscale_mut(nrm);
        basis.push(e);
    }
    Mat::from_columns(d, &basis, frame.field)
}

/// `max(‖A^*B‖_max, ‖AB^*‖_max)`; zero exactly when `A ⊥ B`.
pub fn disjoint_residual(a: &Mat, b: &Mat) -> Result<f64, MatError> {
    same_shape_and_field(a, b)?;
    let left = a.data.adjoint() * &b.data;
    let right = &a.data * b.data.adjoint();
    let m = |x: &DMatrix<Complex64>| x.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    Ok(m(&left).max(m(&right)))
}

/// Disjointness up to `tol.residual * max(1, ‖A‖_max ‖B‖_max)`.
pub fn is_disjoint(a: &Mat, b: &Mat, tol: &Tolerances) -> Result<bool, MatError> {
    let res = disjoint_residual(a, b)?;
    Ok(tol.is_negligible(res, a.max_norm() * b.max_norm()))
}

/// `‖AA^*B + BA^*A‖_max`, which vanishes exactly on disjoint pairs.
pub fn tcp_residual(a: &Mat, b: &Mat) -> Result<f64, MatError> {
    same_shape_and_field(a, b)?;
    let aa = a.data.adjoint();
    let t = &a.data * &aa * &b.data + &b.data * &aa * &a.data;
    Ok(t.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())))
}

/// Scale used for zero tests of `tcp_residual`: `max(1, ‖A‖²‖B‖)`.
pub fn tcp_scale(a: &Mat, b: &Mat) -> f64 {
    (a.max_norm() * a.max_norm() * b.max_norm()).max(1.0)
}

/// `A A^* A`.
pub fn cube(a: &Mat) -> Mat {
    Mat {
        data: &a.data * a.data.adjoint() * &a.data,
        field: a.field,
    }
}

/// Jordan triple product `{A, B, C} = (AB^*C + CB^*A) / 2`.
pub fn jordan_triple(a: &Mat, b: &Mat, c: &Mat) -> Result<Mat, MatError> {
    same_shape_and_field(a, b)?;
    same_shape_and_field(a, c)?;
    let bs = b.data.adjoint();
    let t = (&a.data * &bs * &c.data + &c.data * &bs * &a.data) * Complex64::new(0.5, 0.0);
    Ok(Mat {
        data: t,
        field: a.field,
    })
}

pub fn is_partial_isometry(a: &Mat, tol: &Tolerances) -> bool {
    let defect = (&cube(a) - a).max_norm();
    tol.is_negligible(defect, a.max_norm())
}

/// `(Σ s_j^p)^{1/p}` over all singular values. Exponents in `(0, 1)` use
/// the same formula although it is no longer a norm there.
pub fn schatten_norm(a: &Mat, p: f64) -> Result<f64, MatError> {
    if !(p > 0.0) || p.is_nan() {
        return Err(MatError::InvalidParameter(format!(
            "Schatten exponent must be positive, got {p}"
        )));
    }
    let s = singular_values(a);
    Ok(schatten_of_values(&s, p))
}

/// Schatten functional of an explicit list of non-negative values.
pub fn schatten_of_values(values: &[f64], p: f64) -> f64 {
    let smax = values.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    if smax == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return smax;
    }
    let sum: f64 = values.iter().map(|&x| (x / smax).powf(p)).sum();
    smax * sum.powf(1.0 / p)
}

/// Sum of the `k` largest singular values, `1 <= k <= min(rows, cols)`.
pub fn kyfan_norm(a: &Mat, k: usize) -> Result<f64, MatError> {
    let h = a.rows().min(a.cols());
    if k == 0 || k > h {
        return Err(MatError::InvalidParameter(format!(
            "Ky Fan index must lie in 1..={h}, got {k}"
        )));
    }
    Ok(singular_values(a).iter().take(k).sum())
}
