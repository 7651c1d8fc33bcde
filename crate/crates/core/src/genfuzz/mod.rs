//! Seeded random generators and the equivalence fuzzer.
//!
//! Every generator takes an explicit RNG; [`Seed`] hands out independent
//! ChaCha streams so trial `t` of a run depends only on `(master, t)`.

mod fuzz;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::canonical::CanonicalForm;
use crate::linmap::LinMap;
use crate::matcore::{Field, Mat};

pub use fuzz::{fuzz_equivalences, fuzz_with, FuzzConfig, FuzzReport, Oracles, PropertyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed {
    pub master: u64,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed { master }
    }

    /// Independent stream number `stream` of this seed.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(stream);
        rng
    }
}

/// Log-uniform draw from `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Entries i.i.d. standard normal; complex entries have `E|z|² = 1`.
pub fn random_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    field: Field,
    rng: &mut R,
) -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows, cols, field, |_, _| match field {
        Field::Real => Complex64::new(rng.sample(StandardNormal), 0.0),
        Field::Complex => {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(h * re, h * im)
        }
    })
}

/// Haar-distributed orthogonal (real) or unitary (complex) `d × d` matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, field: Field, rng: &mut R) -> Mat {
    match field {
        Field::Real => {
            let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
            let qr = g.qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..d {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            Mat::from_fn(d, d, field, |i, j| Complex64::new(q[(i, j)], 0.0))
        }
        Field::Complex => {
            let g = random_gaussian(d, d, field, rng).into_dmatrix();
            let qr = g.qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..d {
                let z = r[(j, j)];
                if z.norm() > 0.0 {
                    let phase = z / z.norm();
                    q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
                }
            }
            Mat::from_dmatrix(q, field).expect("complex tag")
        }
    }
}

fn q_values<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    let mut q: Vec<f64> = (0..count).map(|_| log_uniform(rng, 0.1, 10.0)).collect();
    q.sort_by(|a, b| b.total_cmp(a));
    q
}

/// Canonical data with Haar frames and `q1`, `q2` diagonal entries drawn
/// log-uniformly from `[0.1, 10]`.
#[allow(clippy::too_many_arguments)]
pub fn random_canonical<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    field: Field,
    q1: usize,
    q2: usize,
    rng: &mut R,
) -> Result<CanonicalForm, GenError> {
    let a = q_values(q1, rng);
    let b = q_values(q2, rng);
    canonical_with_q(m, n, r, s, field, a, b, rng)
}

/// Canonical data with Haar frames around prescribed diagonals.
#[allow(clippy::too_many_arguments)]
pub fn canonical_with_q<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    field: Field,
    q1: Vec<f64>,
    q2: Vec<f64>,
    rng: &mut R,
) -> Result<CanonicalForm, GenError> {
    if m == 0 || n == 0 || r < q1.len() * m + q2.len() * n || s < q1.len() * n + q2.len() * m {
        return Err(GenError::Infeasible(format!(
            "q1 = {}, q2 = {} do not fit M_{{{m},{n}}} -> M_{{{r},{s}}}",
            q1.len(),
            q2.len()
        )));
    }
    let u = random_unitary(r, field, rng);
    let v = random_unitary(s, field, rng);
    CanonicalForm::new(m, n, r, s, field, u, v, q1, q2)
        .map_err(|e| GenError::InvalidParameter(e.to_string()))
}

fn need_square_part(m: usize, n: usize, need: usize) -> Result<(), GenError> {
    if m.min(n) < need {
        return Err(GenError::Infeasible(format!(
            "M_{{{m},{n}}} has fewer than {need} orthogonal directions"
        )));
    }
    Ok(())
}

/// `U diag(w) V` and `U diag(w') V` with disjoint supports, shared Haar
/// frames and log-uniform weights. Half of the draws use singleton supports.
pub fn random_disjoint_pair<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    field: Field,
    rng: &mut R,
) -> Result<(Mat, Mat), GenError> {
    need_square_part(m, n, 2)?;
    let h = m.min(n);
    let mut idx: Vec<usize> = (0..h).collect();
    idx.shuffle(rng);
    let (k1, k2) = if rng.random_bool(0.5) {
        (1, 1)
    } else {
        let k1 = rng.random_range(1..h);
        (k1, rng.random_range(1..=h - k1))
    };
    let u = random_unitary(m, field, rng);
    let v = random_unitary(n, field, rng);
    let mut d1 = Mat::zeros(m, n, field);
    let mut d2 = Mat::zeros(m, n, field);
    for &i in &idx[..k1] {
        d1.set(i, i, Complex64::new(log_uniform(rng, 0.1, 10.0), 0.0));
    }
    for &i in &idx[k1..k1 + k2] {
        d2.set(i, i, Complex64::new(log_uniform(rng, 0.1, 10.0), 0.0));
    }
    Ok((&(&u * &d1) * &v, &(&u * &d2) * &v))
}

/// Disjoint rank-one partial isometries `u_a v_a^*`, `u_b v_b^*` from shared
/// Haar frames.
pub fn random_rank_one_pair<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    field: Field,
    rng: &mut R,
) -> Result<(Mat, Mat), GenError> {
    need_square_part(m, n, 2)?;
    let u = random_unitary(m, field, rng);
    let v = random_unitary(n, field, rng).adjoint();
    let one = |j: usize| &u.block(0, j, m, 1) * &v.block(j, 0, 1, n);
    Ok((one(0), one(1)))
}

/// `U (I_rank ⊕ 0) V` with Haar `U`, `V`.
pub fn random_partial_isometry<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rank: usize,
    field: Field,
    rng: &mut R,
) -> Result<Mat, GenError> {
    need_square_part(m, n, rank)?;
    if rank == 0 {
        return Ok(Mat::zeros(m, n, field));
    }
    let u = random_unitary(m, field, rng);
    let v = random_unitary(n, field, rng);
    let mut d = Mat::zeros(m, n, field);
    for i in 0..rank {
        d.set(i, i, Complex64::new(1.0, 0.0));
    }
    Ok(&(&u * &d) * &v)
}

/// `σ1 u1 v1^* + σ2 u2 v2^*` with orthonormal Haar pairs and σ log-uniform
/// in `[0.1, 10]`.
pub fn random_rank_le2<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    field: Field,
    rng: &mut R,
) -> Result<Mat, GenError> {
    need_square_part(m, n, 2)?;
    let u = random_unitary(m, field, rng);
    let v = random_unitary(n, field, rng);
    let mut d = Mat::zeros(m, n, field);
    for i in 0..2 {
        d.set(i, i, Complex64::new(log_uniform(rng, 0.1, 10.0), 0.0));
    }
    Ok(&(&u * &d) * &v.adjoint())
}

/// Adds `eps · M` to one uniformly chosen basis image, where `M` has
/// max-norm one.
pub fn perturb<R: Rng + ?Sized>(phi: &LinMap, eps: f64, rng: &mut R) -> Result<LinMap, GenError> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(GenError::InvalidParameter(format!(
            "eps must be finite and >= 0, got {eps}"
        )));
    }
    let field = phi.field();
    let (r, s) = (phi.r(), phi.s());
    let index = rng.random_range(0..phi.m() * phi.n());
    let mut noise = Mat::from_fn(r, s, field, |_, _| {
        let re = rng.random_range(-1.0..=1.0);
        let im = match field {
            Field::Real => 0.0,
            Field::Complex => rng.random_range(-1.0..=1.0),
        };
        Complex64::new(re, im)
    });
    let nrm = noise.max_norm();
    if nrm == 0.0 {
        noise.set(0, 0, Complex64::new(1.0, 0.0));
    } else {
        noise = noise.scale(1.0 / nrm);
    }
    let mut out = phi.clone();
    out.image_mut(index).axpy(Complex64::new(eps, 0.0), &noise);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::build;
    use crate::linmap::max_image_difference;
    use crate::matcore::{
        disjoint_residual, is_partial_isometry, singular_values, unitarity_defect, Tolerances,
    };

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = Seed::new(42);
        let a: Vec<u64> = (0..4).map(|_| s.rng(3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| s.rng(3).random()).collect();
        assert_eq!(a, b);
        let x: u64 = s.rng(3).random();
        let y: u64 = s.rng(4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = Seed::new(1).rng(0);
        for d in [1, 2, 5, 9] {
            for field in [Field::Real, Field::Complex] {
                let u = random_unitary(d, field, &mut rng);
                assert!(unitarity_defect(&u) < 1e-12);
            }
        }
    }

    #[test]
    fn haar_second_moment_at_dimension_four() {
        // E|U_11|² = 1/d for Haar measure.
        let mut rng = Seed::new(7).rng(0);
        let draws = 10_000;
        for field in [Field::Real, Field::Complex] {
            let mean = (0..draws)
                .map(|_| random_unitary(4, field, &mut rng).get(0, 0).norm_sqr())
                .sum::<f64>()
                / draws as f64;
            assert!((mean - 0.25).abs() < 0.01, "{field}: {mean}");
        }
    }

    #[test]
    fn disjoint_pairs_are_disjoint_and_often_rank_one() {
        let mut rng = Seed::new(9).rng(0);
        let mut singletons = 0;
        let total = 200;
        for t in 0..total {
            let field = if t % 2 == 0 {
                Field::Real
            } else {
                Field::Complex
            };
            let (a, b) = random_disjoint_pair(4, 3, field, &mut rng).unwrap();
            let scale = a.max_norm() * b.max_norm();
            assert!(disjoint_residual(&a, &b).unwrap() <= 1e-12 * scale.max(1.0));
            let rank = |x: &Mat| singular_values(x).iter().filter(|&&v| v > 1e-9).count();
            if rank(&a) == 1 && rank(&b) == 1 {
                singletons += 1;
            }
        }
        assert!(singletons * 2 >= total);
    }

    #[test]
    fn partial_isometries_and_rank_two() {
        let mut rng = Seed::new(3).rng(0);
        let tol = Tolerances::default();
        let p = random_partial_isometry(4, 5, 3, Field::Complex, &mut rng).unwrap();
        assert!(is_partial_isometry(&p, &tol));
        let sv = singular_values(&p);
        assert!((sv[2] - 1.0).abs() < 1e-12 && sv[3] < 1e-12);
        let a = random_rank_le2(4, 4, Field::Real, &mut rng).unwrap();
        let sv = singular_values(&a);
        assert!(sv[1] >= 0.1 - 1e-12 && sv[0] <= 10.0 + 1e-12 && sv[2] < 1e-10);
        assert!(random_partial_isometry(2, 5, 3, Field::Real, &mut rng).is_err());
        assert_eq!(
            random_partial_isometry(2, 3, 0, Field::Real, &mut rng).unwrap(),
            Mat::zeros(2, 3, Field::Real)
        );
    }

    #[test]
    fn canonical_generator_respects_bounds() {
        let mut rng = Seed::new(5).rng(0);
        let c = random_canonical(2, 3, 9, 9, Field::Complex, 2, 1, &mut rng).unwrap();
        assert!(c.q1().windows(2).all(|w| w[0] >= w[1]));
        assert!(c
            .q1()
            .iter()
            .chain(c.q2())
            .all(|&q| (0.1..=10.0).contains(&q)));
        assert!(random_canonical(2, 3, 6, 9, Field::Complex, 2, 1, &mut rng).is_err());
    }

    #[test]
    fn perturb_touches_exactly_one_image() {
        let mut rng = Seed::new(6).rng(0);
        let c = random_canonical(3, 3, 4, 4, Field::Real, 1, 0, &mut rng).unwrap();
        let phi = build(&c);
        let psi = perturb(&phi, 0.1, &mut rng).unwrap();
        let changed = phi
            .images()
            .iter()
            .zip(psi.images())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, 1);
        assert!((max_image_difference(&phi, &psi).unwrap() - 0.1).abs() < 1e-15);
        assert!(perturb(&phi, -1.0, &mut rng).is_err());
    }
}
