//! Searching for disjoint pairs whose images are not disjoint.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::genfuzz::{random_disjoint_pair, random_rank_one_pair, Seed};
use crate::linmap::LinMap;
use crate::matcore::{is_disjoint, Field, Mat, Tolerances};

/// `A ⊥ B` while `Φ(A) ⊥ Φ(B)` fails, both under `tol`.
pub fn is_witness(phi: &LinMap, a: &Mat, b: &Mat, tol: &Tolerances) -> bool {
    let (Ok(pa), Ok(pb)) = (phi.apply(a), phi.apply(b)) else {
        return false;
    };
    matches!(is_disjoint(a, b, tol), Ok(true)) && matches!(is_disjoint(&pa, &pb, tol), Ok(false))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Disjoint pairs in `M_2` that separate disjointness preservers from the
/// rest: the unit pairs, the rank-one families with parameter γ, and a
/// small grid of rank-one pairs built from orthogonal bases.
fn two_by_two_pairs(field: Field) -> Vec<(Mat, Mat)> {
    let mut out = vec![
        (Mat::unit(2, 2, 0, 0, field), Mat::unit(2, 2, 1, 1, field)),
        (Mat::unit(2, 2, 0, 1, field), Mat::unit(2, 2, 1, 0, field)),
    ];
    for g in [2.0, 0.5] {
        out.push((
            Mat::real(2, 2, &[g, 1.0, 1.0, 1.0 / g]),
            Mat::real(2, 2, &[1.0 / g, -1.0, -1.0, g]),
        ));
        out.push((
            Mat::real(2, 2, &[g, -1.0, 1.0, -1.0 / g]),
            Mat::real(2, 2, &[1.0 / g, 1.0, -1.0, -g]),
        ));
    }
    for pair in out.iter_mut() {
        if field == Field::Complex {
            *pair = (pair.0.to_complex(), pair.1.to_complex());
        }
    }

    let phases: &[f64] = match field {
        Field::Real => &[0.0],
        Field::Complex => &[0.0, PI / 2.0],
    };
    let mut bases = Vec::new();
    for th in [PI / 8.0, PI / 4.0, 3.0 * PI / 8.0] {
        for &ph in phases {
            let e = Complex64::from_polar(1.0, ph);
            let x = [c(th.cos(), 0.0), e * th.sin()];
            let y = [-e.conj() * th.sin(), c(th.cos(), 0.0)];
            bases.push((x, y));
        }
    }
    let outer = |x: &[Complex64; 2], y: &[Complex64; 2]| {
        Mat::from_fn(2, 2, field, |i, j| x[i] * y[j].conj())
    };
    for (x, xp) in &bases {
        for (y, yp) in &bases {
            out.push((outer(x, y), outer(xp, yp)));
        }
    }
    out
}

fn embed(small: &Mat, m: usize, n: usize, rows: (usize, usize), cols: (usize, usize)) -> Mat {
    let mut out = Mat::zeros(m, n, small.field());
    let ri = [rows.0, rows.1];
    let cj = [cols.0, cols.1];
    for a in 0..2 {
        for b in 0..2 {
            out.set(ri[a], cj[b], small.get(a, b));
        }
    }
    out
}

fn outer_real(x: &[(usize, f64)], y: &[(usize, f64)], m: usize, n: usize, field: Field) -> Mat {
    let mut out = Mat::zeros(m, n, field);
    for &(i, a) in x {
        for &(j, b) in y {
            out.set(i, j, out.get(i, j) + c(a * b, 0.0));
        }
    }
    out
}

/// Disjoint pairs on three distinct indices `0, j, l` of the square part.
fn three_index_pairs(m: usize, n: usize, field: Field, j: usize, l: usize) -> Vec<(Mat, Mat)> {
    let o = |x: &[(usize, f64)], y: &[(usize, f64)]| outer_real(x, y, m, n, field);
    let sum = [(0, 1.0), (j, 1.0), (l, 1.0)];
    let x5 = [(j, 1.0), (l, -1.0)];
    let jl = [(j, 1.0), (l, 1.0)];
    let x6 = &o(&[(0, 1.0)], &jl) - &o(&jl, &[(0, 1.0)]);
    vec![
        (
            o(&sum, &sum),
            o(
                &[(0, 2.0), (j, -1.0), (l, -1.0)],
                &[(0, 2.0), (j, -1.0), (l, -1.0)],
            ),
        ),
        (
            o(&sum, &[(0, -1.0), (j, -1.0), (l, 1.0)]),
            o(
                &[(0, 1.0), (j, 1.0), (l, -2.0)],
                &[(0, 1.0), (j, 1.0), (l, 2.0)],
            ),
        ),
        (o(&x5, &x5), x6),
    ]
}

/// Structured candidates first, then `random_trials` random disjoint pairs.
pub(crate) fn search_witness(
    phi: &LinMap,
    tol: &Tolerances,
    seed: u64,
    random_trials: usize,
) -> Option<(Mat, Mat)> {
    let (m, n, _, _, field) = phi.signature();
    if m < 2 || n < 2 {
        return None;
    }
    let hit = |a: Mat, b: Mat| is_witness(phi, &a, &b, tol).then_some((a, b));
    let small = two_by_two_pairs(field);

    for (a, b) in &small {
        if let Some(w) = hit(
            embed(a, m, n, (0, 1), (0, 1)),
            embed(b, m, n, (0, 1), (0, 1)),
        ) {
            return Some(w);
        }
    }
    if let Some(w) = unit_pair_witness(phi, tol) {
        return Some(w);
    }
    for i in 0..m {
        for l in i + 1..m {
            for j in 0..n {
                for k in j + 1..n {
                    for (a, b) in &small {
                        let w = hit(
                            embed(a, m, n, (i, l), (j, k)),
                            embed(b, m, n, (i, l), (j, k)),
                        );
                        if w.is_some() {
                            return w;
                        }
                    }
                }
            }
        }
    }
    let h = m.min(n);
    if h >= 3 {
        for j in 1..h - 1 {
            for (a, b) in three_index_pairs(m, n, field, j, h - 1) {
                if let Some(w) = hit(a, b) {
                    return Some(w);
                }
            }
        }
    }
    let mut rng = Seed::new(seed).rng(0);
    for t in 0..random_trials {
        let (a, b) = if t % 2 == 0 {
            random_rank_one_pair(m, n, field, &mut rng)
        } else {
            random_disjoint_pair(m, n, field, &mut rng)
        }
        .expect("domain has at least two rows and columns");
        if let Some(w) = hit(a, b) {
            return Some(w);
        }
    }
    None
}

/// Pairs `(E_ij, E_kl)` with `i ≠ k` and `j ≠ l`, in row-major order.
fn unit_pair_witness(phi: &LinMap, tol: &Tolerances) -> Option<(Mat, Mat)> {
    let (m, n, _, _, field) = phi.signature();
    for p in 0..m * n {
        for q in p + 1..m * n {
            let (i, j, k, l) = (p / n, p % n, q / n, q % n);
            if i == k || j == l {
                continue;
            }
            if matches!(
                is_disjoint(phi.image(i, j), phi.image(k, l), tol),
                Ok(false)
            ) {
                return Some((Mat::unit(m, n, i, j, field), Mat::unit(m, n, k, l, field)));
            }
        }
    }
    None
}

/// Checks disjointness preservation on the unit pairs and on `trials`
/// random disjoint rank-one partial isometry pairs. Returns the first
/// violating pair, if any.
pub fn verify_preserver_sampled(
    phi: &LinMap,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> (bool, Option<(Mat, Mat)>) {
    let (m, n, _, _, field) = phi.signature();
    if m < 2 || n < 2 {
        return (true, None);
    }
    if let Some(w) = unit_pair_witness(phi, tol) {
        return (false, Some(w));
    }
    let mut rng = Seed::new(seed).rng(1);
    for _ in 0..trials {
        let (a, b) = random_rank_one_pair(m, n, field, &mut rng).expect("m, n >= 2");
        if is_witness(phi, &a, &b, tol) {
            return (false, Some((a, b)));
        }
    }
    (true, None)
}
