//! Randomized cross-checks between the decomposition, the classifiers and
//! direct sampling.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{canonical_with_q, log_uniform, perturb, random_disjoint_pair, random_gaussian, Seed};
use crate::canonical::{
    build, decompose_seeded, verify_preserver_sampled, CanonicalForm, DecomposeFailure, FailureKind,
};
use crate::classify::{
    check_partial_isometry_preserver, check_schatten_isometry, check_triple_homomorphism,
    check_zero_triple_preserver, ClassifierVerdict, ClassifyError, Verdict,
};
use crate::linmap::{max_image_difference, LinMap};
use crate::matcore::{
    disjoint_residual, schatten_norm, schatten_of_values, tcp_residual, tcp_scale, Field,
    Tolerances,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzConfig {
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            trials: 1000,
            max_dim: 4,
            seed: 0,
        }
    }
}

type Classifier = fn(&LinMap, &Tolerances, u64) -> Result<ClassifierVerdict, ClassifyError>;

/// The functions under test. Swapping one out lets a caller check that the
/// fuzzer notices a broken implementation.
#[derive(Clone, Copy)]
pub struct Oracles {
    pub decompose: fn(&LinMap, &Tolerances, u64) -> Result<CanonicalForm, DecomposeFailure>,
    pub zero_triple: Classifier,
    pub triple_homomorphism: Classifier,
    pub partial_isometry: Classifier,
    pub schatten: fn(&LinMap, f64, &Tolerances, u64) -> Result<ClassifierVerdict, ClassifyError>,
}

impl Default for Oracles {
    fn default() -> Self {
        Oracles {
            decompose: decompose_seeded,
            zero_triple: check_zero_triple_preserver,
            triple_homomorphism: check_triple_homomorphism,
            partial_isometry: check_partial_isometry_preserver,
            schatten: check_schatten_isometry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    pub first_counterexample: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub trials: usize,
    pub max_dim: usize,
    pub failures: usize,
    pub properties: Vec<PropertyReport>,
}

const PROPERTIES: [&str; 8] = [
    "canonical_round_trip",
    "perturbation_refuted",
    "disjoint_pairs_have_zero_tcp",
    "nonzero_tcp_for_overlapping_pairs",
    "sampled_preservation",
    "zero_triple_matches_decomposition",
    "triple_homomorphism_matches_partial_isometry",
    "schatten_matches_sampling",
];

/// Outcome of one property on one trial: `Err` holds the counterexample.
type Check = Result<(), Value>;

pub fn fuzz_equivalences(config: FuzzConfig) -> FuzzReport {
    fuzz_with(config, &Oracles::default())
}

pub fn fuzz_with(config: FuzzConfig, oracles: &Oracles) -> FuzzReport {
    let max_dim = config.max_dim.max(2);
    let outcomes: Vec<Vec<Check>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(t as u64, config.seed, max_dim, oracles))
        .collect();
    let names: &[&str] = if config.trials == 0 { &[] } else { &PROPERTIES };
    let mut properties: Vec<PropertyReport> = names
        .iter()
        .map(|name| PropertyReport {
            name: name.to_string(),
            passed: 0,
            failed: 0,
            first_counterexample: None,
        })
        .collect();
    for trial in outcomes {
        for (report, check) in properties.iter_mut().zip(trial) {
            match check {
                Ok(()) => report.passed += 1,
                Err(example) => {
                    report.failed += 1;
                    report.first_counterexample.get_or_insert(example);
                }
            }
        }
    }
    FuzzReport {
        seed: config.seed,
        trials: config.trials,
        max_dim,
        failures: properties.iter().map(|p| p.failed).sum(),
        properties,
    }
}

struct Trial {
    index: u64,
    field: Field,
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

impl Trial {
    fn describe(&self, what: impl Into<String>) -> Value {
        json!({
            "trial": self.index,
            "field": self.field,
            "m": self.m,
            "n": self.n,
            "r": self.r,
            "s": self.s,
            "q1": self.q1,
            "q2": self.q2,
            "what": what.into(),
        })
    }
}

fn run_trial(index: u64, seed: u64, max_dim: usize, oracles: &Oracles) -> Vec<Check> {
    let mut rng = Seed::new(seed).rng(index);
    let tol = Tolerances::default().with_trials(20).expect("valid");
    let field = if rng.random_bool(0.5) {
        Field::Real
    } else {
        Field::Complex
    };
    let m = rng.random_range(2..=max_dim);
    let n = rng.random_range(2..=max_dim);
    let (k1, k2) = loop {
        let k1 = rng.random_range(0..=2);
        let k2 = rng.random_range(0..=2);
        if k1 + k2 > 0 {
            break (k1, k2);
        }
    };
    let unit_q = rng.random_bool(0.5);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, k: usize| -> Vec<f64> {
        let mut q: Vec<f64> = (0..k)
            .map(|_| {
                if unit_q {
                    1.0
                } else {
                    log_uniform(rng, 0.1, 10.0)
                }
            })
            .collect();
        q.sort_by(|a, b| b.total_cmp(a));
        q
    };
    let q1 = draw(&mut rng, k1);
    let q2 = draw(&mut rng, k2);
    let r = m * k1 + n * k2 + rng.random_range(0..=1);
    let s = n * k1 + m * k2 + rng.random_range(0..=1);
    let trial = Trial {
        index,
        field,
        m,
        n,
        r,
        s,
        q1: q1.clone(),
        q2: q2.clone(),
    };
    let c = canonical_with_q(m, n, r, s, field, q1, q2, &mut rng).expect("dimensions fit");
    let phi = build(&c);
    let psi = perturb(&phi, 0.1, &mut rng).expect("eps >= 0");
    let sub = rng.random();

    vec![
        round_trip(&trial, &c, &phi, &tol, oracles, sub),
        perturbation(&trial, &psi, &tol, oracles, sub),
        disjoint_tcp(&trial, &mut rng),
        overlapping_tcp(&trial, &mut rng),
        sampled(&trial, &phi, &tol, sub),
        zero_triple(&trial, &phi, &psi, &tol, oracles, sub),
        hom_vs_pisom(&trial, &phi, unit_q, &tol, oracles, sub),
        schatten(&trial, &c, &phi, &tol, oracles, &mut rng),
    ]
}

fn round_trip(
    t: &Trial,
    c: &CanonicalForm,
    phi: &LinMap,
    tol: &Tolerances,
    o: &Oracles,
    seed: u64,
) -> Check {
    let got =
        (o.decompose)(phi, tol, seed).map_err(|e| t.describe(format!("decompose failed: {e}")))?;
    let diff = max_image_difference(&build(&got), phi).expect("same signature");
    if !tol.is_negligible(diff, phi.max_norm()) {
        return Err(t.describe(format!("rebuilt map differs by {diff:e}")));
    }
    let (a, b) = (c.q_multiset(), got.q_multiset());
    let same = a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.max(1.0));
    if !same {
        return Err(t.describe(format!("Q multiset {b:?} differs")));
    }
    Ok(())
}

fn perturbation(t: &Trial, psi: &LinMap, tol: &Tolerances, o: &Oracles, seed: u64) -> Check {
    match (o.decompose)(psi, tol, seed) {
        Ok(_) => Err(t.describe("perturbed map accepted")),
        Err(f) if f.kind == FailureKind::NotPreserver => {
            let (a, b) = f
                .witness
                .as_ref()
                .ok_or_else(|| t.describe("refutation without witness"))?;
            if crate::canonical::is_witness(psi, a, b, tol) {
                Ok(())
            } else {
                Err(t.describe("witness does not verify"))
            }
        }
        Err(_) => Ok(()),
    }
}

fn disjoint_tcp(t: &Trial, rng: &mut impl Rng) -> Check {
    let (a, b) = random_disjoint_pair(t.m, t.n, t.field, rng).expect("m, n >= 2");
    let res = tcp_residual(&a, &b).expect("same shape");
    if res > 1e-10 * tcp_scale(&a, &b) {
        return Err(t.describe(format!("tcp of a disjoint pair is {res:e}")));
    }
    Ok(())
}

fn overlapping_tcp(t: &Trial, rng: &mut impl Rng) -> Check {
    let a = random_gaussian(t.m, t.n, t.field, rng);
    let b = random_gaussian(t.m, t.n, t.field, rng);
    let scale = a.max_norm() * b.max_norm();
    let overlap = disjoint_residual(&a, &b).expect("same shape");
    if overlap > 1e-3 * scale {
        let tcp = tcp_residual(&a, &b).expect("same shape");
        if tcp <= 1e-10 * tcp_scale(&a, &b) {
            return Err(t.describe(format!("overlap {overlap:e} but tcp {tcp:e}")));
        }
    }
    Ok(())
}

fn sampled(t: &Trial, phi: &LinMap, tol: &Tolerances, seed: u64) -> Check {
    match verify_preserver_sampled(phi, 20, seed, tol) {
        (true, _) => Ok(()),
        (false, _) => Err(t.describe("built map failed sampled preservation")),
    }
}

fn verdict_of(r: Result<ClassifierVerdict, ClassifyError>) -> Result<Verdict, String> {
    r.map(|v| v.verdict).map_err(|e| e.to_string())
}

fn zero_triple(
    t: &Trial,
    phi: &LinMap,
    psi: &LinMap,
    tol: &Tolerances,
    o: &Oracles,
    seed: u64,
) -> Check {
    for (map, label) in [(phi, "built"), (psi, "perturbed")] {
        let dec = (o.decompose)(map, tol, seed);
        let Ok(v) = verdict_of((o.zero_triple)(map, tol, seed)) else {
            // breakdowns are allowed only where decompose also broke down
            if matches!(&dec, Err(f) if f.kind == FailureKind::NumericalBreakdown) {
                continue;
            }
            return Err(t.describe(format!("{label}: zero triple classifier broke down")));
        };
        if (v == Verdict::Yes) != dec.is_ok() {
            return Err(t.describe(format!("{label}: verdict {v} disagrees with decompose")));
        }
    }
    Ok(())
}

fn hom_vs_pisom(
    t: &Trial,
    phi: &LinMap,
    unit_q: bool,
    tol: &Tolerances,
    o: &Oracles,
    seed: u64,
) -> Check {
    let hom = verdict_of((o.triple_homomorphism)(phi, tol, seed)).map_err(|e| t.describe(e))?;
    let pis = verdict_of((o.partial_isometry)(phi, tol, seed)).map_err(|e| t.describe(e))?;
    if hom != pis {
        return Err(t.describe(format!(
            "triple homomorphism {hom} vs partial isometry {pis}"
        )));
    }
    if (hom == Verdict::Yes) != unit_q {
        return Err(t.describe(format!("verdict {hom} with unit Q = {unit_q}")));
    }
    Ok(())
}

fn schatten(
    t: &Trial,
    c: &CanonicalForm,
    phi: &LinMap,
    tol: &Tolerances,
    o: &Oracles,
    rng: &mut impl Rng,
) -> Check {
    let p = [1.0, 3.0, 4.0][rng.random_range(0..3)];
    // half of the trials rescale Q to have Schatten norm one
    let phi = if rng.random_bool(0.5) {
        let sp = schatten_of_values(&c.q_multiset(), p);
        let mut scaled = phi.clone();
        for i in 0..t.m * t.n {
            let img = scaled.image_mut(i);
            *img = img.scale(1.0 / sp);
        }
        scaled
    } else {
        phi.clone()
    };
    let seed = rng.random();
    let v = verdict_of((o.schatten)(&phi, p, tol, seed)).map_err(|e| t.describe(e))?;
    // direct comparison on a handful of rank-two samples
    let mut preserved = true;
    for _ in 0..20 {
        let a = super::random_rank_le2(t.m, t.n, t.field, rng).expect("m, n >= 2");
        let lhs = schatten_norm(&phi.apply(&a).expect("in domain"), p).expect("p > 0");
        let rhs = schatten_norm(&a, p).expect("p > 0");
        if (lhs - rhs).abs() > 1e-9 * rhs {
            preserved = false;
            break;
        }
    }
    if (v == Verdict::Yes) != preserved {
        return Err(t.describe(format!(
            "p = {p}: verdict {v}, sampled preservation {preserved}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_oracles_pass() {
        let report = fuzz_equivalences(FuzzConfig {
            trials: 24,
            max_dim: 3,
            seed: 1,
        });
        assert_eq!(report.failures, 0, "{report:#?}");
        assert_eq!(report.properties.len(), PROPERTIES.len());
        assert!(report.properties.iter().all(|p| p.passed == 24));
    }

    #[test]
    fn zero_trials_give_an_empty_report() {
        let report = fuzz_equivalences(FuzzConfig {
            trials: 0,
            max_dim: 3,
            seed: 0,
        });
        assert!(report.properties.is_empty());
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = FuzzConfig {
            trials: 6,
            max_dim: 3,
            seed: 9,
        };
        assert_eq!(fuzz_equivalences(cfg), fuzz_equivalences(cfg));
    }

    fn always_yes(_: &LinMap, _: &Tolerances, _: u64) -> Result<ClassifierVerdict, ClassifyError> {
        Ok(ClassifierVerdict {
            verdict: Verdict::Yes,
            certificate: None,
            witness: None,
            detail: None,
        })
    }

    #[test]
    fn broken_classifier_is_caught() {
        let oracles = Oracles {
            triple_homomorphism: always_yes,
            ..Oracles::default()
        };
        let report = fuzz_with(
            FuzzConfig {
                trials: 16,
                max_dim: 3,
                seed: 2,
            },
            &oracles,
        );
        let p = report
            .properties
            .iter()
            .find(|p| p.name == "triple_homomorphism_matches_partial_isometry")
            .unwrap();
        assert!(p.failed > 0);
        assert!(p.first_counterexample.is_some());
    }
}
