//! Classifiers built on the canonical form.
//!
//! Each classifier first tries [`decompose`]; the verdict then follows from
//! the recovered `Q1`, `Q2` alone. An independent sampled check runs next
//! and has to agree: a `Yes` needs every sample to pass, a `No` needs a
//! concrete failing input. Disagreement is reported as
//! [`ClassifyError::NumericalBreakdown`] rather than guessed away.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{decompose_seeded, verify_preserver_sampled, CanonicalForm, FailureKind};
use crate::genfuzz::{random_gaussian, random_partial_isometry, random_rank_le2, Seed};
use crate::linmap::LinMap;
use crate::matcore::{
    cube, is_partial_isometry, jordan_triple, kyfan_norm, schatten_norm, schatten_of_values, Field,
    Mat, Tolerances,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
    Inapplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Yes => "Yes",
            Verdict::No => "No",
            Verdict::Inapplicable => "Inapplicable",
        };
        f.write_str(s)
    }
}

/// Machine-readable reason attached to a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Detail {
    QNotIdentity,
    TraceNotOne,
    KTooSmall,
    PEqualsTwo,
    RealFieldSufficientOnly,
    NotDisjointnessPreserver,
    SchattenNotOne,
    NotPartialIsometry,
}

impl Detail {
    pub fn code(&self) -> &'static str {
        match self {
            Detail::QNotIdentity => "Q_NOT_IDENTITY",
            Detail::TraceNotOne => "TRACE_NOT_ONE",
            Detail::KTooSmall => "K_TOO_SMALL",
            Detail::PEqualsTwo => "P_EQUALS_TWO",
            Detail::RealFieldSufficientOnly => "REAL_FIELD_SUFFICIENT_ONLY",
            Detail::NotDisjointnessPreserver => "NOT_DISJOINTNESS_PRESERVER",
            Detail::SchattenNotOne => "SCHATTEN_NOT_ONE",
            Detail::NotPartialIsometry => "NOT_PARTIAL_ISOMETRY",
        }
    }
}

impl fmt::Display for Detail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierVerdict {
    pub verdict: Verdict,
    /// Present for every `Yes`.
    pub certificate: Option<CanonicalForm>,
    /// Inputs exhibiting a `No`: a disjoint pair, a zero triple or a single
    /// matrix, depending on the classifier.
    pub witness: Option<Vec<Mat>>,
    pub detail: Option<Detail>,
}

impl ClassifierVerdict {
    fn yes(certificate: CanonicalForm, detail: Option<Detail>) -> Self {
        ClassifierVerdict {
            verdict: Verdict::Yes,
            certificate: Some(certificate),
            witness: None,
            detail,
        }
    }

    fn no(witness: Option<Vec<Mat>>, detail: Detail) -> Self {
        ClassifierVerdict {
            verdict: Verdict::No,
            certificate: None,
            witness,
            detail: Some(detail),
        }
    }

    fn inapplicable(witness: Option<Vec<Mat>>, detail: Detail) -> Self {
        ClassifierVerdict {
            verdict: Verdict::Inapplicable,
            certificate: None,
            witness,
            detail: Some(detail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("domain M_{{{m},{n}}} needs at least two rows and columns")]
    DegenerateDomain { m: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical breakdown: {detail} (residual {residual:e})")]
    NumericalBreakdown { detail: String, residual: f64 },
}

fn breakdown(detail: impl Into<String>, residual: f64) -> ClassifyError {
    ClassifyError::NumericalBreakdown {
        detail: detail.into(),
        residual,
    }
}

enum Structure {
    Preserver(CanonicalForm),
    Refuted(Mat, Mat),
}

fn structure(phi: &LinMap, tol: &Tolerances, seed: u64) -> Result<Structure, ClassifyError> {
    match decompose_seeded(phi, tol, seed) {
        Ok(c) => Ok(Structure::Preserver(c)),
        Err(f) => match f.kind {
            FailureKind::NotPreserver => {
                let (a, b) = f.witness.expect("refutations carry a witness");
                Ok(Structure::Refuted(a, b))
            }
            FailureKind::DegenerateDomain => Err(ClassifyError::DegenerateDomain {
                m: phi.m(),
                n: phi.n(),
            }),
            FailureKind::NumericalBreakdown => Err(breakdown(f.detail, f.residual)),
        },
    }
}

fn check_domain(phi: &LinMap) -> Result<(), ClassifyError> {
    if phi.m() < 2 || phi.n() < 2 {
        return Err(ClassifyError::DegenerateDomain {
            m: phi.m(),
            n: phi.n(),
        });
    }
    Ok(())
}

fn apply(phi: &LinMap, a: &Mat) -> Mat {
    phi.apply(a).expect("sample lies in the domain")
}

fn q_is_identity(c: &CanonicalForm, tol: &Tolerances) -> bool {
    c.q1()
        .iter()
        .chain(c.q2())
        .all(|q| (q - 1.0).abs() <= tol.residual)
}

/// Independent streams for the sampled cross-checks.
const TRIPLE_STREAM: u64 = 10;
const HOM_STREAM: u64 = 11;
const PISOM_STREAM: u64 = 12;
const SCHATTEN_STREAM: u64 = 13;
const KYFAN_STREAM: u64 = 14;

/// Does `Φ` preserve disjointness? `Yes` carries the canonical form, `No`
/// a disjoint pair with non-disjoint images.
pub fn check_disjointness_preserver(
    phi: &LinMap,
    tol: &Tolerances,
    seed: u64,
) -> Result<ClassifierVerdict, ClassifyError> {
    check_domain(phi)?;
    match structure(phi, tol, seed)? {
        Structure::Refuted(a, b) => Ok(ClassifierVerdict::no(
            Some(vec![a, b]),
            Detail::NotDisjointnessPreserver,
        )),
        Structure::Preserver(c) => {
            match verify_preserver_sampled(phi, tol.sample_trials, seed, tol) {
                (true, _) => Ok(ClassifierVerdict::yes(c, None)),
                (false, _) => Err(breakdown("sampled disjoint pair not preserved", f64::NAN)),
            }
        }
    }
}

/// Does `Φ` send triples with `{A, B, C} = 0` to triples with zero product?
///
/// A `No` carries the triple `(A, A, B)` built from a disjoint pair: its
/// triple product vanishes while that of the images does not.
pub fn check_zero_triple_preserver(
    phi: &LinMap,
    tol: &Tolerances,
    seed: u64,
) -> Result<ClassifierVerdict, ClassifyError> {
    check_domain(phi)?;
    let (m, n, _, _, field) = phi.signature();
    match structure(phi, tol, seed)? {
        Structure::Refuted(a, b) => {
            let inner = jordan_triple(&a, &a, &b).expect("same shape").max_norm();
            let (pa, pb) = (apply(phi, &a), apply(phi, &b));
            let outer = jordan_triple(&pa, &pa, &pb).expect("same shape").max_norm();
            let inner_ok = tol.is_negligible(inner, a.max_norm().powi(2) * b.max_norm());
            let outer_ok = tol.is_negligible(outer, pa.max_norm().powi(2) * pb.max_norm());
            if !inner_ok || outer_ok {
                return Err(breakdown(
                    "disjoint witness does not give a zero triple witness",
                    outer,
                ));
            }
            Ok(ClassifierVerdict::no(
                Some(vec![a.clone(), a, b]),
                Detail::NotDisjointnessPreserver,
            ))
        }
        Structure::Preserver(c) => {
            let mut rng = Seed::new(seed).rng(TRIPLE_STREAM);
            for _ in 0..tol.sample_trials {
                let (a, b, cc) = sample_zero_triple(m, n, field, &mut rng);
                let t = jordan_triple(&apply(phi, &a), &apply(phi, &b), &apply(phi, &cc))
                    .expect("same shape");
                let scale = apply(phi, &a).max_norm()
                    * apply(phi, &b).max_norm()
                    * apply(phi, &cc).max_norm();
                if !tol.is_negligible(t.max_norm(), scale) {
                    return Err(breakdown("sampled zero triple not preserved", t.max_norm()));
                }
            }
            Ok(ClassifierVerdict::yes(c, None))
        }
    }
}

/// `A`, `C` on one part of a shared singular frame and `B` on a disjoint
/// part, so `{A, B, C} = 0`.
fn sample_zero_triple<R: rand::Rng + ?Sized>(
    m: usize,
    n: usize,
    field: Field,
    rng: &mut R,
) -> (Mat, Mat, Mat) {
    use crate::genfuzz::{log_uniform, random_unitary};
    use num_complex::Complex64;
    let h = m.min(n);
    let split = rng.random_range(1..h);
    let u = random_unitary(m, field, rng);
    let v = random_unitary(n, field, rng);
    let mut diag = |lo: usize, hi: usize| {
        let mut d = Mat::zeros(m, n, field);
        for i in lo..hi {
            d.set(i, i, Complex64::new(log_uniform(rng, 0.1, 10.0), 0.0));
        }
        &(&u * &d) * &v
    };
    let a = diag(0, split);
    let c = diag(0, split);
    let b = diag(split, h);
    (a, b, c)
}

/// Is `Φ` a triple homomorphism, `Φ({A, B, C}) = {ΦA, ΦB, ΦC}`?
///
/// Holds exactly for disjointness preservers with `Q1`, `Q2` identities.
pub fn check_triple_homomorphism(
    phi: &LinMap,
    tol: &Tolerances,
    seed: u64,
) -> Result<ClassifierVerdict, ClassifyError> {
    check_domain(phi)?;
    let (m, n, _, _, field) = phi.signature();
    let c = match structure(phi, tol, seed)? {
        Structure::Refuted(a, b) => {
            return Ok(ClassifierVerdict::no(
                Some(vec![a.clone(), a, b]),
                Detail::NotDisjointnessPreserver,
            ))
        }
        Structure::Preserver(c) => c,
    };
    let cube_defect = |a: &Mat| {
        let pa = apply(phi, a);
        let lhs = apply(phi, &cube(a));
        let rhs = cube(&pa);
        let scale = lhs.max_norm().max(rhs.max_norm());
        ((&lhs - &rhs).max_norm(), scale)
    };
    if q_is_identity(&c, tol) {
        let mut rng = Seed::new(seed).rng(HOM_STREAM);
        for _ in 0..tol.sample_trials {
            let (d, scale) = match field {
                Field::Complex => cube_defect(&random_gaussian(m, n, field, &mut rng)),
                Field::Real => {
                    // the real case polarizes through A B^* A
                    let a = random_gaussian(m, n, field, &mut rng);
                    let b = random_gaussian(m, n, field, &mut rng);
                    let (pa, pb) = (apply(phi, &a), apply(phi, &b));
                    let lhs = apply(phi, &(&(&a * &b.adjoint()) * &a));
                    let rhs = &(&pa * &pb.adjoint()) * &pa;
                    ((&lhs - &rhs).max_norm(), lhs.max_norm().max(rhs.max_norm()))
                }
            };
            if !tol.is_negligible(d, scale) {
                return Err(breakdown("sampled triple product not preserved", d));
            }
        }
        return Ok(ClassifierVerdict::yes(c, None));
    }
    let e11 = Mat::unit(m, n, 0, 0, field);
    let (d, scale) = cube_defect(&e11);
    if tol.is_negligible(d, scale) {
        return Err(breakdown(
            "Q differs from the identity but E_11 is preserved",
            d,
        ));
    }
    Ok(ClassifierVerdict::no(Some(vec![e11]), Detail::QNotIdentity))
}

/// Does `Φ` send partial isometries to partial isometries? For a
/// disjointness preserver this is decided by the image of `E_11`.
pub fn check_partial_isometry_preserver(
    phi: &LinMap,
    tol: &Tolerances,
    seed: u64,
) -> Result<ClassifierVerdict, ClassifyError> {
    check_domain(phi)?;
    let (m, n, _, _, field) = phi.signature();
    let c = match structure(phi, tol, seed)? {
        Structure::Refuted(a, b) => {
            return Ok(ClassifierVerdict::no(
                Some(vec![a, b]),
                Detail::NotDisjointnessPreserver,
            ))
        }
        Structure::Preserver(c) => c,
    };
    let e11 = Mat::unit(m, n, 0, 0, field);
    if !is_partial_isometry(&apply(phi, &e11), tol) {
        return Ok(ClassifierVerdict::no(
            Some(vec![e11]),
            Detail::NotPartialIsometry,
        ));
    }
    let mut rng = Seed::new(seed).rng(PISOM_STREAM);
    let h = m.min(n);
    for _ in 0..tol.sample_trials {
        let rank = rand::Rng::random_range(&mut rng, 1..=h);
        let p = random_partial_isometry(m, n, rank, field, &mut rng).expect("rank within bounds");
        let pp = apply(phi, &p);
        if !is_partial_isometry(&pp, tol) {
            return Err(breakdown(
                "sampled partial isometry not preserved",
                (&cube(&pp) - &pp).max_norm(),
            ));
        }
    }
    Ok(ClassifierVerdict::yes(c, None))
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.max(f64::MIN_POSITIVE)
}

/// Is `Φ` an isometry for the Schatten `p`-norm? Inapplicable at `p = 2`,
/// where the answer is not decided by the canonical form.
pub fn check_schatten_isometry(
    phi: &LinMap,
    p: f64,
    tol: &Tolerances,
    seed: u64,
) -> Result<ClassifierVerdict, ClassifyError> {
    if !(p > 0.0) || p.is_nan() {
        return Err(ClassifyError::InvalidParameter(format!(
            "Schatten exponent must be positive, got {p}"
        )));
    }
    if p == 2.0 {
        return Ok(ClassifierVerdict::inapplicable(None, Detail::PEqualsTwo));
    }
    check_domain(phi)?;
    let (m, n, _, _, field) = phi.signature();
    let c = match structure(phi, tol, seed)? {
        Structure::Refuted(a, b) => {
            return Ok(ClassifierVerdict::no(
                Some(vec![a, b]),
                Detail::NotDisjointnessPreserver,
            ))
        }
        Structure::Preserver(c) => c,
    };
    let q = c.q_multiset();
    let sp = schatten_of_values(&q, p);
    let expect_yes = (sp - 1.0).abs() <= tol.residual;

    let mut rng = Seed::new(seed).rng(SCHATTEN_STREAM);
    let mut first_bad = None;
    for _ in 0..tol.sample_trials {
        let a = random_rank_le2(m, n, field, &mut rng).expect("m, n >= 2");
        let lhs = schatten_norm(&apply(phi, &a), p).expect("p > 0");
        let rhs = schatten_norm(&a, p).expect("p > 0");
        let gap = relative_gap(lhs, rhs);
        if gap > tol.residual {
            first_bad = Some((a, gap));
            break;
        }
    }
    match (expect_yes, first_bad) {
        (true, None) => Ok(ClassifierVerdict::yes(c, None)),
        (false, Some((a, _))) => Ok(ClassifierVerdict::no(Some(vec![a]), Detail::SchattenNotOne)),
        (true, Some((_, gap))) => Err(breakdown("sampled Schatten norm not preserved", gap)),
        (false, None) => Err(breakdown(
            "Schatten norm of Q differs from one but samples agree",
            (sp - 1.0).abs(),
        )),
    }
}

/// Does `F_k(Φ(A)) = F_{k'}(A)` hold for every `A` of rank at most two?
///
/// Over the complex field this is decided by `k ≥ 2(q1 + q2)` and
/// `tr(Q1 ⊕ Q2) = 1`. Over the real field only the sufficient direction is
/// known: when it applies the verdict is `Yes` with
/// [`Detail::RealFieldSufficientOnly`], otherwise `Inapplicable`.
pub fn check_kyfan_isometry(
    phi: &LinMap,
    k: usize,
    k_prime: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<ClassifierVerdict, ClassifyError> {
    let (m, n, r, s, field) = phi.signature();
    if k_prime < 2 || k_prime > m.min(n) {
        return Err(ClassifyError::InvalidParameter(format!(
            "k' must lie in 2..={}, got {k_prime}",
            m.min(n)
        )));
    }
    if k < 1 || k > r.min(s) {
        return Err(ClassifyError::InvalidParameter(format!(
            "k must lie in 1..={}, got {k}",
            r.min(s)
        )));
    }
    check_domain(phi)?;
    let structure = structure(phi, tol, seed)?;
    let sufficient = match &structure {
        Structure::Preserver(c) => {
            let trace: f64 = c.q1().iter().chain(c.q2()).sum();
            if k < 2 * c.k() {
                Err(Detail::KTooSmall)
            } else if (trace - 1.0).abs() > tol.residual {
                Err(Detail::TraceNotOne)
            } else {
                Ok(())
            }
        }
        Structure::Refuted(..) => Err(Detail::NotDisjointnessPreserver),
    };

    let mismatch = |a: &Mat| {
        let lhs = kyfan_norm(&apply(phi, a), k).expect("k in range");
        let rhs = kyfan_norm(a, k_prime).expect("k' in range");
        relative_gap(lhs, rhs)
    };
    let find_bad = || -> Option<Mat> {
        // E_11 + ε E_22 separates the multiplicity and trace conditions
        for eps in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
            let mut a = Mat::unit(m, n, 0, 0, field);
            a.set(1, 1, num_complex::Complex64::new(eps, 0.0));
            if mismatch(&a) > tol.residual {
                return Some(a);
            }
        }
        let mut rng = Seed::new(seed).rng(KYFAN_STREAM);
        (0..tol.sample_trials)
            .map(|_| random_rank_le2(m, n, field, &mut rng).expect("m, n >= 2"))
            .find(|a| mismatch(a) > tol.residual)
    };
    let bad = find_bad();

    match (structure, sufficient, field) {
        (Structure::Preserver(c), Ok(()), _) => match bad {
            None => {
                let detail = (field == Field::Real).then_some(Detail::RealFieldSufficientOnly);
                Ok(ClassifierVerdict::yes(c, detail))
            }
            Some(a) => Err(breakdown("sampled Ky Fan norm not preserved", mismatch(&a))),
        },
        (Structure::Refuted(..), Ok(()), _) => unreachable!("refuted maps fail the condition"),
        (structure, Err(detail), Field::Complex) => {
            let witness = match structure {
                Structure::Refuted(a, b) => Some(vec![a, b]),
                Structure::Preserver(_) => match bad {
                    Some(a) => Some(vec![a]),
                    None => return Err(breakdown("Ky Fan condition fails but samples agree", 0.0)),
                },
            };
            Ok(ClassifierVerdict::no(witness, detail))
        }
        (structure, Err(_), Field::Real) => {
            let witness = match structure {
                Structure::Refuted(a, b) => Some(vec![a, b]),
                Structure::Preserver(_) => bad.map(|a| vec![a]),
            };
            Ok(ClassifierVerdict::inapplicable(
                witness,
                Detail::RealFieldSufficientOnly,
            ))
        }
    }
}
