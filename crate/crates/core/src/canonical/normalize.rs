//! Block normal form of a disjointness preserver on `M_2`.

use std::ops::Range;

use num_complex::Complex64;

use super::{refute, DecomposeFailure, StageError, CLUSTER_GAP, SIGN_TOL};
use crate::linmap::LinMap;
use crate::matcore::{
    compact_svd, complete_to_unitary, disjoint_residual, hermitian_eigen, nearest_unitary,
    unitarity_defect, Field, Mat, Tolerances,
};

/// Simultaneous block SVD of a disjoint pair:
/// `left^* X right = diag(D1, 0)` and `left^* Y right = diag(0_k, D2, 0)`.
#[derive(Debug, Clone)]
pub struct PairBlockSvd {
    pub left: Mat,
    pub right: Mat,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

pub fn pair_block_svd(x: &Mat, y: &Mat, tol: &Tolerances) -> Result<PairBlockSvd, StageError> {
    let res = disjoint_residual(x, y)?;
    if !tol.is_negligible(res, x.max_norm() * y.max_norm()) {
        return Err(StageError::new(
            "images of E_11 and E_22 are not disjoint",
            res,
        ));
    }
    let (r, s) = x.shape();
    let field = x.field();
    let sx = compact_svd(x, tol);
    let sy = compact_svd(y, tol);
    let k = sx.rank() + sy.rank();
    if k > r || k > s {
        return Err(StageError::new(
            "combined rank exceeds the codomain",
            k as f64,
        ));
    }
    let lf = Mat::hcat(&[&sx.left, &sy.left], r, field);
    let rf = Mat::hcat(&[&sx.right, &sy.right], s, field);
    Ok(PairBlockSvd {
        left: complete_to_unitary(&lf),
        right: complete_to_unitary(&rf),
        d1: sx.singulars,
        d2: sy.singulars,
    })
}

/// Output of [`normalize_2x2`]: `left^* Φ(E_ij) right` equals
/// `normal_form_images(q1, q2, r, s)[2i + j]`.
#[derive(Debug, Clone)]
pub struct Normalized2x2 {
    pub left: Mat,
    pub right: Mat,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
}

/// The four basis images of the block normal form with `k = q1 + q2`:
/// rows and columns split as `(Q1 | Q2 | Q1 | Q2 | rest)`.
pub fn normal_form_images(q1: &[f64], q2: &[f64], r: usize, s: usize, field: Field) -> [Mat; 4] {
    let (k1, k2) = (q1.len(), q2.len());
    let k = k1 + k2;
    let mut out = [(); 4].map(|_| Mat::zeros(r, s, field));
    let c = |x: f64| Complex64::new(x, 0.0);
    for (t, &q) in q1.iter().enumerate() {
        out[0].set(t, t, c(q));
        out[1].set(t, k + t, c(q));
        out[2].set(k + t, t, c(q));
        out[3].set(k + t, k + t, c(q));
    }
    for (t, &q) in q2.iter().enumerate() {
        out[0].set(k1 + t, k1 + t, c(q));
        out[1].set(k + k1 + t, k1 + t, c(q));
        out[2].set(k1 + t, k + k1 + t, c(q));
        out[3].set(k + k1 + t, k + k1 + t, c(q));
    }
    out
}

/// Normalizes the images `[Φ(E_11), Φ(E_12), Φ(E_21), Φ(E_22)]`, which must
/// already be in the block shape produced by [`pair_block_svd`] with
/// singular values `d1`, `d2`.
///
/// On failure the witness, if any, lives in `M_2`.
pub fn normalize_2x2(
    images: &[Mat; 4],
    d1: &[f64],
    d2: &[f64],
    tol: &Tolerances,
) -> Result<Normalized2x2, DecomposeFailure> {
    normalize_core(images, d1, d2, tol).map_err(|e| {
        let (r, s) = images[0].shape();
        let phi = LinMap::from_images(2, 2, r, s, images[0].field(), images.to_vec())
            .expect("four images of one shape");
        refute(&phi, tol, 0, e)
    })
}

fn clusters(d: &[f64]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=d.len() {
        if i == d.len() || d[i - 1] - d[i] > CLUSTER_GAP * d[i - 1] {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn pad(block: &Mat, total: usize, field: Field) -> Mat {
    Mat::direct_sum(&[block, &Mat::identity(total - block.rows(), field)], field)
}

pub(super) fn normalize_core(
    images: &[Mat; 4],
    d1: &[f64],
    d2: &[f64],
    tol: &Tolerances,
) -> Result<Normalized2x2, StageError> {
    let field = images[0].field();
    let (r, s) = images[0].shape();
    let k = d1.len();
    if k != d2.len() {
        let gap = k.abs_diff(d2.len()) as f64;
        return Err(StageError::new(
            "images of E_11 and E_22 differ in rank",
            gap,
        ));
    }
    let scale = images.iter().fold(0.0_f64, |a, m| a.max(m.max_norm()));
    if k == 0 {
        if tol.is_negligible(scale, 1.0) {
            return Ok(Normalized2x2 {
                left: Mat::identity(r, field),
                right: Mat::identity(s, field),
                q1: Vec::new(),
                q2: Vec::new(),
            });
        }
        return Err(StageError::new(
            "off-diagonal images without diagonal ones",
            scale,
        ));
    }
    if 2 * k > r || 2 * k > s {
        return Err(StageError::new(
            "doubled rank exceeds the codomain",
            2.0 * k as f64,
        ));
    }
    let gap = d1
        .iter()
        .zip(d2)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    if gap > CLUSTER_GAP * d1[0] {
        return Err(StageError::new(
            "singular values of E_11 and E_22 images differ",
            gap,
        ));
    }

    let groups = clusters(d1);
    let mut alpha = vec![0.0; k];
    for g in &groups {
        let mean = d1[g.clone()].iter().chain(&d2[g.clone()]).sum::<f64>() / (2 * g.len()) as f64;
        alpha[g.clone()].iter_mut().for_each(|a| *a = mean);
    }

    // Fix the frames of the E_22 block against those of the E_11 block.
    let b = &images[1] + &images[2];
    let mut r1 = Mat::zeros(k, k, field);
    for g in &groups {
        let w = b
            .block(g.start, k + g.start, g.len(), g.len())
            .scale(1.0 / alpha[g.start]);
        let defect = unitarity_defect(&w);
        if defect > SIGN_TOL {
            return Err(StageError::new(
                "coupling block is not a scaled unitary",
                defect,
            ));
        }
        r1.set_block(g.start, g.start, &nearest_unitary(&w));
    }
    let (l1, t1) = (pad(&r1, r, field), pad(&r1, s, field));

    // Diagonalize the sign operator cluster by cluster.
    let c = &(&l1.adjoint() * &(&images[1] - &images[2])) * &t1;
    let mut r2 = Mat::zeros(k, k, field);
    let mut signs = vec![0.0; k];
    for g in &groups {
        let v = c
            .block(g.start, k + g.start, g.len(), g.len())
            .scale(1.0 / alpha[g.start]);
        let (eigs, vecs) = hermitian_eigen(&v);
        for (idx, &e) in eigs.iter().enumerate() {
            let snapped = if e > 0.0 { 1.0 } else { -1.0 };
            if (e - snapped).abs() > SIGN_TOL {
                return Err(StageError::new(
                    "sign operator has an eigenvalue off ±1",
                    (e - snapped).abs(),
                ));
            }
            signs[g.start + idx] = snapped;
        }
        let diag = Mat::diag_real(&signs[g.clone()], field);
        let off = (&(&(&vecs.adjoint() * &v) * &vecs) - &diag).max_norm();
        if off > SIGN_TOL {
            return Err(StageError::new(
                "sign operator is not diagonalizable to ±1",
                off,
            ));
        }
        r2.set_block(g.start, g.start, &vecs);
    }
    let r2r2 = Mat::direct_sum(&[&r2, &r2], field);
    let (l2, t2) = (pad(&r2r2, r, field), pad(&r2r2, s, field));

    // Positive signs first; the order of alpha within each part is kept.
    let order: Vec<usize> = (0..k)
        .filter(|&i| signs[i] > 0.0)
        .chain((0..k).filter(|&i| signs[i] < 0.0))
        .collect();
    let mut p = Mat::zeros(k, k, field);
    for (new, &old) in order.iter().enumerate() {
        p.set(old, new, Complex64::new(1.0, 0.0));
    }
    let pp = Mat::direct_sum(&[&p, &p], field);
    let (l3, t3) = (pad(&pp, r, field), pad(&pp, s, field));

    let q1: Vec<f64> = order
        .iter()
        .filter(|&&i| signs[i] > 0.0)
        .map(|&i| alpha[i])
        .collect();
    let q2: Vec<f64> = order
        .iter()
        .filter(|&&i| signs[i] < 0.0)
        .map(|&i| alpha[i])
        .collect();
    let left = &(&l1 * &l2) * &l3;
    let right = &(&t1 * &t2) * &t3;

    let expected = normal_form_images(&q1, &q2, r, s, field);
    let la = left.adjoint();
    let resid = images
        .iter()
        .zip(&expected)
        .map(|(img, e)| (&(&(&la * img) * &right) - e).max_norm())
        .fold(0.0_f64, f64::max);
    if !tol.is_negligible(resid, scale) {
        return Err(StageError::new("normal form residual", resid));
    }
    Ok(Normalized2x2 {
        left,
        right,
        q1,
        q2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{build, CanonicalForm, FailureKind};
    use crate::genfuzz::{random_disjoint_pair, random_unitary, Seed};
    use crate::matcore::is_disjoint;

    #[test]
    fn clusters_split_on_relative_gaps() {
        assert_eq!(clusters(&[3.0, 3.0, 1.0]), vec![0..2, 2..3]);
        assert_eq!(clusters(&[1.0, 1.0 - 1e-12]), vec![0..2]);
        assert_eq!(clusters(&[]), Vec::<Range<usize>>::new());
    }

    #[test]
    fn pair_block_svd_block_shape() {
        let mut rng = Seed::new(2).rng(0);
        for field in [Field::Real, Field::Complex] {
            let (x, y) = random_disjoint_pair(5, 4, field, &mut rng).unwrap();
            let pb = pair_block_svd(&x, &y, &Tolerances::default()).unwrap();
            let (k, l) = (pb.d1.len(), pb.d2.len());
            let mut dx = Mat::zeros(5, 4, field);
            dx.set_block(0, 0, &Mat::diag_real(&pb.d1, field));
            let mut dy = Mat::zeros(5, 4, field);
            dy.set_block(k, k, &Mat::diag_real(&pb.d2, field));
            let la = pb.left.adjoint();
            assert!((&(&(&la * &x) * &pb.right) - &dx).max_norm() < 1e-10);
            assert!((&(&(&la * &y) * &pb.right) - &dy).max_norm() < 1e-10);
            assert!(k + l <= 4);
        }
    }

    #[test]
    fn pair_block_svd_rejects_overlap() {
        let a = Mat::real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let b = Mat::unit(2, 2, 0, 0, Field::Real);
        assert!(pair_block_svd(&a, &b, &Tolerances::default()).is_err());
    }

    #[test]
    fn normalize_recovers_hidden_normal_form() {
        let mut rng = Seed::new(4).rng(0);
        let tol = Tolerances::default();
        for field in [Field::Real, Field::Complex] {
            let (r, s) = (7, 8);
            let c = CanonicalForm::new(
                2,
                2,
                r,
                s,
                field,
                random_unitary(r, field, &mut rng),
                random_unitary(s, field, &mut rng),
                vec![2.0, 2.0],
                vec![2.0],
            )
            .unwrap();
            let phi = build(&c);
            let pb = pair_block_svd(phi.image(0, 0), phi.image(1, 1), &tol).unwrap();
            let la = pb.left.adjoint();
            let imgs = [0, 1, 2, 3].map(|i| &(&la * &phi.images()[i]) * &pb.right);
            let nf = normalize_2x2(&imgs, &pb.d1, &pb.d2, &tol).unwrap();
            assert_eq!(nf.q1.len(), 2);
            assert_eq!(nf.q2.len(), 1);
            let expected = normal_form_images(&nf.q1, &nf.q2, r, s, field);
            for (img, e) in imgs.iter().zip(&expected) {
                let got = &(&nf.left.adjoint() * img) * &nf.right;
                assert!((&got - e).max_norm() < 1e-10);
            }
        }
    }

    #[test]
    fn normalize_failure_carries_two_by_two_witness() {
        // Φ(E_12) = Φ(E_21) = E_11 breaks the coupling between the blocks.
        let f = Field::Real;
        let imgs = [
            Mat::unit(2, 2, 0, 0, f),
            Mat::unit(2, 2, 0, 0, f),
            Mat::unit(2, 2, 0, 0, f),
            Mat::unit(2, 2, 1, 1, f),
        ];
        let tol = Tolerances::default();
        let err = normalize_2x2(&imgs, &[1.0], &[1.0], &tol).unwrap_err();
        assert_eq!(err.kind, FailureKind::NotPreserver);
        let (a, b) = err.witness.unwrap();
        assert_eq!(a.shape(), (2, 2));
        assert!(is_disjoint(&a, &b, &tol).unwrap());
    }
}
