//! The canonical form of a disjointness preserver
//!
//! ```text
//!     Φ(A) = U · diag(A ⊗ Q1, Aᵗ ⊗ Q2, 0) · V
//! ```
//!
//! with unitary `U`, `V` and positive diagonal `Q1`, `Q2` (either may be
//! empty). [`build`] turns canonical data into a [`LinMap`];
//! [`decompose`] recovers canonical data from a map, or reports why it
//! cannot, attaching a verified disjoint witness pair when the map fails to
//! preserve disjointness.
//!
//! Recovery runs in stages. The images of `E_11` and `E_22` are brought to
//! block-diagonal shape by [`pair_block_svd`]; [`normalize_2x2`] then uses
//! the images of `E_12 ± E_21` to fix the singular frames inside each
//! multiplicity cluster and to split them into the `Q1` (positive sign) and
//! `Q2` (negative sign) parts. The frames of the remaining rows and columns
//! are transported from the first row and column of images. Whatever the
//! stages produce is accepted only after `build(result)` reproduces the
//! input map.

mod normalize;
mod witness;

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linmap::{max_image_difference, LinMap};
use crate::matcore::{complete_to_unitary, unitarity_defect, Field, Mat, MatError, Tolerances};

pub use normalize::{
    normal_form_images, normalize_2x2, pair_block_svd, Normalized2x2, PairBlockSvd,
};
pub(crate) use witness::search_witness;
pub use witness::{is_witness, verify_preserver_sampled};

/// Singular values closer than this (relative) are one multiplicity cluster.
pub const CLUSTER_GAP: f64 = 1e-7;
/// Eigenvalues of the sign operator within this distance of ±1 are snapped.
pub const SIGN_TOL: f64 = 1e-6;
/// Unitarity threshold for canonical factors.
pub const FORM_UNITARY_TOL: f64 = 1e-8;
/// Orthonormality threshold for transported frames.
const FRAME_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanonicalError {
    #[error("dimensions must be positive")]
    EmptyDimension,
    #[error("q1 = {q1}, q2 = {q2} do not fit M_{{{r},{s}}} for domain M_{{{m},{n}}}")]
    DoesNotFit {
        m: usize,
        n: usize,
        r: usize,
        s: usize,
        q1: usize,
        q2: usize,
    },
    #[error("{which} has shape {got:?}, expected {expected:?}")]
    FactorShape {
        which: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("{which} is not unitary (defect {defect:e})")]
    NotUnitary { which: &'static str, defect: f64 },
    #[error("{0} entries must be positive, finite and non-increasing")]
    BadDiagonal(&'static str),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Canonical data `(U, V, Q1, Q2)` for maps `M_{m,n} -> M_{r,s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    field: Field,
    u: Mat,
    v: Mat,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

impl CanonicalForm {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        n: usize,
        r: usize,
        s: usize,
        field: Field,
        u: Mat,
        v: Mat,
        q1: Vec<f64>,
        q2: Vec<f64>,
    ) -> Result<Self, CanonicalError> {
        if m == 0 || n == 0 || r == 0 || s == 0 {
            return Err(CanonicalError::EmptyDimension);
        }
        let (k1, k2) = (q1.len(), q2.len());
        if r < k1 * m + k2 * n || s < k1 * n + k2 * m {
            return Err(CanonicalError::DoesNotFit {
                m,
                n,
                r,
                s,
                q1: k1,
                q2: k2,
            });
        }
        for (which, f, expected) in [("U", &u, (r, r)), ("V", &v, (s, s))] {
            if f.shape() != expected {
                return Err(CanonicalError::FactorShape {
                    which,
                    expected,
                    got: f.shape(),
                });
            }
            if f.field() != field {
                return Err(MatError::FieldMismatch(field, f.field()).into());
            }
            let defect = unitarity_defect(f);
            if defect > FORM_UNITARY_TOL {
                return Err(CanonicalError::NotUnitary { which, defect });
            }
        }
        for (which, q) in [("Q1", &q1), ("Q2", &q2)] {
            let positive = q.iter().all(|&x| x > 0.0 && x.is_finite());
            let sorted = q.windows(2).all(|w| w[0] >= w[1]);
            if !(positive && sorted) {
                return Err(CanonicalError::BadDiagonal(which));
            }
        }
        Ok(CanonicalForm {
            m,
            n,
            r,
            s,
            field,
            u,
            v,
            q1,
            q2,
        })
    }

    /// Canonical data of the zero map.
    pub fn zero(
        m: usize,
        n: usize,
        r: usize,
        s: usize,
        field: Field,
    ) -> Result<Self, CanonicalError> {
        CanonicalForm::new(
            m,
            n,
            r,
            s,
            field,
            Mat::identity(r, field),
            Mat::identity(s, field),
            Vec::new(),
            Vec::new(),
        )
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

    pub fn u(&self) -> &Mat {
        &self.u
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }

    pub fn q1(&self) -> &[f64] {
        &self.q1
    }

    pub fn q2(&self) -> &[f64] {
        &self.q2
    }

    /// Total multiplicity `q1 + q2`.
    pub fn k(&self) -> usize {
        self.q1.len() + self.q2.len()
    }

    pub fn is_zero_map(&self) -> bool {
        self.k() == 0
    }

    /// All entries of `Q1 ⊕ Q2`, non-increasing.
    pub fn q_multiset(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.q1.iter().chain(&self.q2).copied().collect();
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }

    /// Middle factor `diag(X ⊗ Q1, Xᵗ ⊗ Q2, 0)` of size `r × s`.
    pub fn middle(&self, x: &Mat) -> Mat {
        let field = self.field;
        let mut mid = Mat::zeros(self.r, self.s, field);
        let d1 = Mat::diag_real(&self.q1, field);
        let d2 = Mat::diag_real(&self.q2, field);
        mid.set_block(0, 0, &x.kron(&d1));
        let k1 = self.q1.len();
        mid.set_block(self.m * k1, self.n * k1, &x.transpose().kron(&d2));
        mid
    }

    /// `U · diag(X ⊗ Q1, Xᵗ ⊗ Q2, 0) · V`.
    pub fn evaluate(&self, x: &Mat) -> Result<Mat, MatError> {
        if x.shape() != (self.m, self.n) {
            return Err(MatError::ShapeMismatch {
                left: (self.m, self.n),
                right: x.shape(),
            });
        }
        if x.field() != self.field {
            return Err(MatError::FieldMismatch(self.field, x.field()));
        }
        Ok(&(&self.u * &self.middle(x)) * &self.v)
    }
}

/// The map `X ↦ U · diag(X ⊗ Q1, Xᵗ ⊗ Q2, 0) · V`.
pub fn build(c: &CanonicalForm) -> LinMap {
    LinMap::from_fn(c.m, c.n, c.r, c.s, c.field, |e| {
        c.evaluate(e).expect("basis matrix fits the form")
    })
    .expect("canonical images have the declared shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    NotPreserver,
    DegenerateDomain,
    NumericalBreakdown,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailureKind::NotPreserver => "NotPreserver",
            FailureKind::DegenerateDomain => "DegenerateDomain",
            FailureKind::NumericalBreakdown => "NumericalBreakdown",
        };
        f.write_str(s)
    }
}

/// Why [`decompose`] did not return a canonical form.
///
/// For [`FailureKind::NotPreserver`] the witness is always present: a pair
/// that is disjoint while its images are not, both under the tolerances the
/// decomposition ran with. `residual` is then the disjointness residual of
/// the images; otherwise it is the residual of the failing stage.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} ({detail}, residual {residual:e})")]
pub struct DecomposeFailure {
    pub kind: FailureKind,
    pub witness: Option<(Mat, Mat)>,
    pub residual: f64,
    pub detail: String,
}

/// A stage of the recovery pipeline did not find the structure it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: &'static str,
    pub residual: f64,
}

impl StageError {
    pub(crate) fn new(stage: &'static str, residual: f64) -> Self {
        StageError { stage, residual }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (residual {:e})", self.stage, self.residual)
    }
}

impl From<MatError> for StageError {
    fn from(_: MatError) -> Self {
        StageError::new("inconsistent shapes", f64::INFINITY)
    }
}

/// [`decompose_seeded`] with seed 0 for the randomized witness fallback.
pub fn decompose(phi: &LinMap, tol: &Tolerances) -> Result<CanonicalForm, DecomposeFailure> {
    decompose_seeded(phi, tol, 0)
}

/// Recovers `(U, V, Q1, Q2)` with `build(result) = Φ` within tolerance.
///
/// `seed` drives the random part of the witness search, which only runs
/// once recovery has failed.
pub fn decompose_seeded(
    phi: &LinMap,
    tol: &Tolerances,
    seed: u64,
) -> Result<CanonicalForm, DecomposeFailure> {
    let (m, n, r, s, field) = phi.signature();
    if m < 2 || n < 2 {
        return Err(DecomposeFailure {
            kind: FailureKind::DegenerateDomain,
            witness: None,
            residual: 0.0,
            detail: format!("domain M_{{{m},{n}}} needs at least two rows and columns"),
        });
    }
    let scale = phi.max_norm();
    if scale <= tol.residual {
        return Ok(CanonicalForm::zero(m, n, r, s, field).expect("zero form"));
    }
    let failure = match recover(phi, tol) {
        Ok(form) => {
            let diff = max_image_difference(&build(&form), phi).expect("same signature");
            if tol.is_negligible(diff, scale) {
                return Ok(form);
            }
            StageError::new("post-verification", diff)
        }
        Err(e) => e,
    };
    Err(refute(phi, tol, seed, failure))
}

/// Turns a stage failure into a verdict: a verified witness makes it
/// `NotPreserver`, otherwise it is a numerical breakdown.
pub(crate) fn refute(
    phi: &LinMap,
    tol: &Tolerances,
    seed: u64,
    failure: StageError,
) -> DecomposeFailure {
    match search_witness(phi, tol, seed, tol.sample_trials) {
        Some((a, b)) => {
            let pa = phi.apply(&a).expect("witness in domain");
            let pb = phi.apply(&b).expect("witness in domain");
            let residual = crate::matcore::disjoint_residual(&pa, &pb).expect("same shape");
            DecomposeFailure {
                kind: FailureKind::NotPreserver,
                witness: Some((a, b)),
                residual,
                detail: failure.stage.to_string(),
            }
        }
        None => DecomposeFailure {
            kind: FailureKind::NumericalBreakdown,
            witness: None,
            residual: failure.residual,
            detail: failure.stage.to_string(),
        },
    }
}

fn recover(phi: &LinMap, tol: &Tolerances) -> Result<CanonicalForm, StageError> {
    let (m, n, r, s, field) = phi.signature();
    let pb = pair_block_svd(phi.image(0, 0), phi.image(1, 1), tol)?;
    let (ul, vr) = (pb.left.adjoint(), &pb.right);
    let corner = [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(i, j)| &(&ul * phi.image(i, j)) * vr);
    let nf = normalize::normalize_core(&corner, &pb.d1, &pb.d2, tol)?;

    let (k1, k2) = (nf.q1.len(), nf.q2.len());
    let k = k1 + k2;
    if r < m * k1 + n * k2 || s < n * k1 + m * k2 {
        return Err(StageError::new("multiplicities exceed the codomain", 1.0));
    }
    let lf = &pb.left * &nf.left;
    let rf = &pb.right * &nf.right;

    // u1[i][t] ⊗ v1[j][t] carries the Q1 part of Φ(E_ij);
    // u2[j][t] ⊗ v2[i][t] carries the Q2 part.
    let mut u1 = vec![Vec::with_capacity(k1); m];
    let mut v1 = vec![Vec::with_capacity(k1); n];
    let mut u2 = vec![Vec::with_capacity(k2); n];
    let mut v2 = vec![Vec::with_capacity(k2); m];
    for t in 0..k1 {
        u1[0].push(lf.column(t));
        v1[0].push(rf.column(t));
        u1[1].push(lf.column(k + t));
        v1[1].push(rf.column(k + t));
    }
    for t in 0..k2 {
        u2[0].push(lf.column(k1 + t));
        v2[0].push(rf.column(k1 + t));
        u2[1].push(lf.column(k + k1 + t));
        v2[1].push(rf.column(k + k1 + t));
    }
    let transport = |img: &Mat, v: &DVector<Complex64>, q: f64| (img.as_dmatrix() * v).unscale(q);
    for i in 2..m {
        let img = phi.image(i, 0);
        let img_adj = img.adjoint();
        for t in 0..k1 {
            u1[i].push(transport(img, &v1[0][t], nf.q1[t]));
        }
        for t in 0..k2 {
            v2[i].push(transport(&img_adj, &u2[0][t], nf.q2[t]));
        }
    }
    for j in 2..n {
        let img = phi.image(0, j);
        let img_adj = img.adjoint();
        for t in 0..k1 {
            v1[j].push(transport(&img_adj, &u1[0][t], nf.q1[t]));
        }
        for t in 0..k2 {
            u2[j].push(transport(img, &v2[0][t], nf.q2[t]));
        }
    }

    let left_cols: Vec<_> = u1
        .into_iter()
        .flatten()
        .chain(u2.into_iter().flatten())
        .collect();
    let right_cols: Vec<_> = v1
        .into_iter()
        .flatten()
        .chain(v2.into_iter().flatten())
        .collect();
    let left = Mat::from_columns(r, &left_cols, field);
    let right = Mat::from_columns(s, &right_cols, field);
    let defect = frame_defect(&left).max(frame_defect(&right));
    if defect > FRAME_TOL {
        return Err(StageError::new(
            "transported frames are not orthonormal",
            defect,
        ));
    }
    let u = complete_to_unitary(&left);
    let v = complete_to_unitary(&right).adjoint();
    CanonicalForm::new(m, n, r, s, field, u, v, nf.q1, nf.q2)
        .map_err(|_| StageError::new("recovered data violates the form", f64::INFINITY))
}

/// `‖F^*F − I‖_max` for a frame with orthonormal columns.
fn frame_defect(frame: &Mat) -> f64 {
    let k = frame.cols();
    if k == 0 {
        return 0.0;
    }
    let g = &frame.adjoint() * frame;
    (&g - &Mat::identity(k, frame.field())).max_norm()
}
