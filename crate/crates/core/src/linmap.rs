//! Linear maps `M_{m,n} -> M_{r,s}` stored by their basis images.

use num_complex::Complex64;
use thiserror::Error;

use crate::matcore::{unitarity_defect, Field, Mat, MatError, Tolerances};

/// Unitarity threshold for the factors accepted by [`LinMap::conjugate`].
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinMapError {
    #[error("expected {expected} basis images, got {got}")]
    WrongImageCount { expected: usize, got: usize },
    #[error("image {index} has shape {got:?}, expected {expected:?}")]
    ImageShape {
        index: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("image {index} is over the {got} field, map is over the {expected} field")]
    ImageField {
        index: usize,
        expected: Field,
        got: Field,
    },
    #[error("dimensions must be positive")]
    EmptyDimension,
    #[error("argument does not match the map's domain: {0}")]
    Domain(MatError),
    #[error("maps have different signatures")]
    SignatureMismatch,
    #[error("conjugating factor is not unitary (defect {0:e})")]
    NotUnitary(f64),
}

/// A field-linear map `Φ: M_{m,n} -> M_{r,s}`.
///
/// `images[i * n + j]` holds `Φ(E_ij)` (zero-based), so the image list is
/// row-major over the domain basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinMap {
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    field: Field,
    images: Vec<Mat>,
}

impl LinMap {
    pub fn from_images(
        m: usize,
        n: usize,
        r: usize,
        s: usize,
        field: Field,
        images: Vec<Mat>,
    ) -> Result<Self, LinMapError> {
        if m == 0 || n == 0 || r == 0 || s == 0 {
            return Err(LinMapError::EmptyDimension);
        }
        if images.len() != m * n {
            return Err(LinMapError::WrongImageCount {
                expected: m * n,
                got: images.len(),
            });
        }
        for (index, img) in images.iter().enumerate() {
            if img.shape() != (r, s) {
                return Err(LinMapError::ImageShape {
                    index,
                    expected: (r, s),
                    got: img.shape(),
                });
            }
            if img.field() != field {
                return Err(LinMapError::ImageField {
                    index,
                    expected: field,
                    got: img.field(),
                });
            }
        }
        Ok(LinMap {
            m,
            n,
            r,
            s,
            field,
            images,
        })
    }

    /// Map determined by evaluating `f` on every basis matrix `E_ij`.
    pub fn from_fn(
        m: usize,
        n: usize,
        r: usize,
        s: usize,
        field: Field,
        mut f: impl FnMut(&Mat) -> Mat,
    ) -> Result<Self, LinMapError> {
        let mut images = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                images.push(f(&Mat::unit(m, n, i, j, field)));
            }
        }
        LinMap::from_images(m, n, r, s, field, images)
    }

    pub fn identity(m: usize, n: usize, field: Field) -> Self {
        LinMap::from_fn(m, n, m, n, field, Mat::clone).expect("identity map")
    }

    /// `A ↦ A^t` from `M_{m,n}` into `M_{n,m}`.
    pub fn transpose_map(m: usize, n: usize, field: Field) -> Self {
        LinMap::from_fn(m, n, n, m, field, Mat::transpose).expect("transpose map")
    }

    pub fn zero(m: usize, n: usize, r: usize, s: usize, field: Field) -> Self {
        LinMap::from_fn(m, n, r, s, field, |_| Mat::zeros(r, s, field)).expect("zero map")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// `(m, n, r, s, field)`.
    pub fn signature(&self) -> (usize, usize, usize, usize, Field) {
        (self.m, self.n, self.r, self.s, self.field)
    }

    pub fn images(&self) -> &[Mat] {
        &self.images
    }

    /// `Φ(E_ij)`, zero-based.
    pub fn image(&self, i: usize, j: usize) -> &Mat {
        &self.images[i * self.n + j]
    }

    pub fn image_mut(&mut self, index: usize) -> &mut Mat {
        &mut self.images[index]
    }

    /// Largest entry modulus over all basis images.
    pub fn max_norm(&self) -> f64 {
        self.images
            .iter()
            .fold(0.0_f64, |acc, m| acc.max(m.max_norm()))
    }

    pub fn apply(&self, a: &Mat) -> Result<Mat, LinMapError> {
        if a.shape() != (self.m, self.n) {
            return Err(LinMapError::Domain(MatError::ShapeMismatch {
                left: (self.m, self.n),
                right: a.shape(),
            }));
        }
        if a.field() != self.field {
            return Err(LinMapError::Domain(MatError::FieldMismatch(
                self.field,
                a.field(),
            )));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut out = Mat::zeros(self.r, self.s, self.field);
        for i in 0..self.m {
            for j in 0..self.n {
                let a_ij = a.get(i, j);
                if a_ij != zero {
                    out.axpy(a_ij, self.image(i, j));
                }
            }
        }
        Ok(out)
    }

    /// `X ↦ left · Φ(X) · right`, realized on every basis image.
    pub fn conjugate(&self, left: &Mat, right: &Mat) -> Result<LinMap, LinMapError> {
        for factor in [left, right] {
            if factor.field() != self.field {
                return Err(LinMapError::Domain(MatError::FieldMismatch(
                    self.field,
                    factor.field(),
                )));
            }
        }
        if left.shape() != (self.r, self.r) || right.shape() != (self.s, self.s) {
            return Err(LinMapError::Domain(MatError::ShapeMismatch {
                left: left.shape(),
                right: right.shape(),
            }));
        }
        let defect = unitarity_defect(left).max(unitarity_defect(right));
        if defect > UNITARY_TOL {
            return Err(LinMapError::NotUnitary(defect));
        }
        let images = self
            .images
            .iter()
            .map(|img| &(left * img) * right)
            .collect();
        Ok(LinMap { images, ..*self })
    }

    /// Restriction to `span{E_ij, E_ik, E_lj, E_lk}` viewed as a map on `M_2`.
    pub fn restrict_2x2(&self, rows: (usize, usize), cols: (usize, usize)) -> LinMap {
        let (i, l) = rows;
        let (j, k) = cols;
        let images = vec![
            self.image(i, j).clone(),
            self.image(i, k).clone(),
            self.image(l, j).clone(),
            self.image(l, k).clone(),
        ];
        LinMap {
            m: 2,
            n: 2,
            images,
            ..*self
        }
    }
}

/// Largest entrywise difference between corresponding basis images.
pub fn max_image_difference(phi: &LinMap, psi: &LinMap) -> Result<f64, LinMapError> {
    if phi.signature() != psi.signature() {
        return Err(LinMapError::SignatureMismatch);
    }
    Ok(phi
        .images
        .iter()
        .zip(&psi.images)
        .map(|(a, b)| (a - b).max_norm())
        .fold(0.0_f64, f64::max))
}

/// Equality up to `tol.residual · max(1, ‖Φ‖_max, ‖Ψ‖_max)` entrywise.
pub fn maps_equal(phi: &LinMap, psi: &LinMap, tol: &Tolerances) -> Result<bool, LinMapError> {
    let diff = max_image_difference(phi, psi)?;
    Ok(tol.is_negligible(diff, phi.max_norm().max(psi.max_norm())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_applies_to_anything() {
        let id = LinMap::identity(2, 2, Field::Real);
        let a = Mat::real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(id.apply(&a).unwrap(), a);
    }

    #[test]
    fn transpose_sends_e12_to_e21() {
        let t = LinMap::transpose_map(2, 3, Field::Real);
        let e12 = Mat::unit(2, 3, 0, 1, Field::Real);
        assert_eq!(t.apply(&e12).unwrap(), Mat::unit(3, 2, 1, 0, Field::Real));
    }

    #[test]
    fn from_images_builds_identity_transpose_and_zero() {
        let basis: Vec<Mat> = (0..2)
            .flat_map(|i| (0..2).map(move |j| Mat::unit(2, 2, i, j, Field::Real)))
            .collect();
        let id = LinMap::from_images(2, 2, 2, 2, Field::Real, basis.clone()).unwrap();
        assert_eq!(id, LinMap::identity(2, 2, Field::Real));

        let transposed: Vec<Mat> = basis.iter().map(Mat::transpose).collect();
        let t = LinMap::from_images(2, 2, 2, 2, Field::Real, transposed).unwrap();
        assert_eq!(t, LinMap::transpose_map(2, 2, Field::Real));

        let z = LinMap::from_images(
            2,
            2,
            3,
            1,
            Field::Real,
            vec![Mat::zeros(3, 1, Field::Real); 4],
        )
        .unwrap();
        assert_eq!(z.max_norm(), 0.0);
    }

    #[test]
    fn from_images_validates() {
        let img = Mat::zeros(2, 2, Field::Real);
        assert!(matches!(
            LinMap::from_images(2, 2, 2, 2, Field::Real, vec![img.clone(); 3]),
            Err(LinMapError::WrongImageCount {
                expected: 4,
                got: 3
            })
        ));
        let mut imgs = vec![img.clone(); 4];
        imgs[2] = Mat::zeros(2, 3, Field::Real);
        assert!(matches!(
            LinMap::from_images(2, 2, 2, 2, Field::Real, imgs),
            Err(LinMapError::ImageShape { index: 2, .. })
        ));
        let mut imgs = vec![img; 4];
        imgs[1] = Mat::zeros(2, 2, Field::Complex);
        assert!(matches!(
            LinMap::from_images(2, 2, 2, 2, Field::Real, imgs),
            Err(LinMapError::ImageField { index: 1, .. })
        ));
    }

    #[test]
    fn apply_checks_domain() {
        let id = LinMap::identity(2, 2, Field::Real);
        assert!(id.apply(&Mat::zeros(2, 3, Field::Real)).is_err());
        assert!(id.apply(&Mat::zeros(2, 2, Field::Complex)).is_err());
    }

    #[test]
    fn apply_is_complex_linear() {
        let phi = LinMap::from_fn(2, 2, 2, 2, Field::Complex, |e| {
            &e.transpose() + &e.scale_c(c(0.5, -1.0))
        })
        .unwrap();
        let a = Mat::complex(
            2,
            2,
            &[c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5), c(-2.0, 0.0)],
        );
        let z = c(0.3, 0.7);
        let lhs = phi.apply(&a.scale_c(z)).unwrap();
        let rhs = phi.apply(&a).unwrap().scale_c(z);
        assert!((&lhs - &rhs).max_norm() < 1e-14);
    }

    #[test]
    fn basis_images_are_returned_exactly() {
        let phi = LinMap::from_fn(2, 3, 4, 4, Field::Real, |e| {
            let mut out = Mat::zeros(4, 4, Field::Real);
            out.set_block(0, 0, e);
            out.set_block(1, 1, &e.scale(0.3));
            out
        })
        .unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let e = Mat::unit(2, 3, i, j, Field::Real);
                assert_eq!(&phi.apply(&e).unwrap(), &phi.images()[i * 3 + j]);
            }
        }
    }

    #[test]
    fn conjugate_by_identity_and_rejects_non_unitary() {
        let id = LinMap::identity(2, 2, Field::Real);
        let i2 = Mat::identity(2, Field::Real);
        assert_eq!(id.conjugate(&i2, &i2).unwrap(), id);
        let bad = i2.scale(1.5);
        assert!(matches!(
            id.conjugate(&bad, &i2),
            Err(LinMapError::NotUnitary(_))
        ));
    }

    #[test]
    fn maps_equal_examples() {
        let tol = Tolerances::default();
        let id = LinMap::identity(2, 2, Field::Real);
        let t = LinMap::transpose_map(2, 2, Field::Real);
        assert!(maps_equal(&id, &id, &tol).unwrap());
        assert!(!maps_equal(&id, &t, &tol).unwrap());
        let other = LinMap::identity(2, 3, Field::Real);
        assert_eq!(
            maps_equal(&id, &other, &tol),
            Err(LinMapError::SignatureMismatch)
        );
    }

    #[test]
    fn restriction_picks_four_images() {
        let id = LinMap::identity(3, 3, Field::Real);
        let sub = id.restrict_2x2((0, 2), (1, 2));
        assert_eq!(sub.images()[0], Mat::unit(3, 3, 0, 1, Field::Real));
        assert_eq!(sub.images()[3], Mat::unit(3, 3, 2, 2, Field::Real));
    }
}
