//! Upper bounds on the polynomial numerical index of `(X, Y)` relative to
//! `Q`, spear-type margins, and bounds coming from operators on `Y`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{poly_norm, poly_norm_seeded, Maximizer, OptimConfig, Status};
use crate::poly::{compose_linear, random_poly, HomPoly, LinOp, Term};
use crate::range::{RadiusConfig, RadiusEngine};
use crate::spaces::{face_sup, lp_norm, Field, SpaceDescriptor, FACE_TOL};

/// Candidates whose estimated norm is below this are skipped.
const DEGENERATE_NORM: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexSample {
    pub id: String,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexEstimate {
    pub upper_bound: f64,
    pub argmin_poly: HomPoly,
    pub argmin_id: String,
    pub samples: usize,
    pub per_sample: Vec<IndexSample>,
    /// Certified norm gap of the minimising candidate, when its norm was
    /// grid-certified. The bound holds up to this relative slack.
    pub norm_gap: Option<f64>,
}

/// `inf v_Q(P)` over unit `P`, bounded above by random and structured
/// candidates.
pub fn index_upper_bound(
    q: &HomPoly,
    n_samples: usize,
    seed: u64,
    cfg: &RadiusConfig,
) -> Result<IndexEstimate> {
    index_upper_bound_with(q, &[], n_samples, seed, cfg)
}

/// As [`index_upper_bound`], with additional named candidates tried first.
pub fn index_upper_bound_with(
    q: &HomPoly,
    extra: &[(String, HomPoly)],
    n_samples: usize,
    seed: u64,
    cfg: &RadiusConfig,
) -> Result<IndexEstimate> {
    let engine = RadiusEngine::new(q, cfg)?;
    let mut candidates: Vec<(String, HomPoly)> = extra.to_vec();
    candidates.extend(structured_candidates(q)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n_samples {
        let p = random_poly(q.degree(), *q.domain(), *q.codomain(), &mut rng)?;
        candidates.push((format!("random:{i}"), p));
    }
    index_from_candidates(&engine, candidates)
}

fn index_from_candidates(
    engine: &RadiusEngine,
    candidates: Vec<(String, HomPoly)>,
) -> Result<IndexEstimate> {
    let optim = &engine.config().optim;
    let scored: Vec<Option<(f64, HomPoly, Option<f64>)>> = candidates
        .par_iter()
        .map(|(_, p)| -> Result<_> {
            let norm = poly_norm(p, optim)?;
            if norm.value <= DEGENERATE_NORM {
                return Ok(None);
            }
            let unit = p.scale_real(1.0 / norm.value);
            let radius = engine.attainment(&unit)?.value;
            let gap = match norm.status {
                Status::GridCertified => norm.gap.map(|g| g / norm.value),
                Status::Heuristic => None,
            };
            Ok(Some((radius, unit, gap)))
        })
        .collect::<Result<_>>()?;
    // reduce in candidate order so ties resolve the same way every run
    let mut per_sample = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, HomPoly, String, Option<f64>)> = None;
    for ((id, _), s) in candidates.into_iter().zip(scored) {
        let Some((radius, unit, gap)) = s else { continue };
        per_sample.push(IndexSample {
            id: id.clone(),
            radius,
        });
        if best.as_ref().is_none_or(|b| radius < b.0) {
            best = Some((radius, unit, id, gap));
        }
    }
    let (upper_bound, argmin_poly, argmin_id, norm_gap) = best.ok_or_else(|| {
        Error::InvalidArgument("no non-degenerate candidate polynomial".into())
    })?;
    Ok(IndexEstimate {
        upper_bound,
        argmin_poly,
        argmin_id,
        samples: per_sample.len(),
        per_sample,
        norm_gap,
    })
}

/// Compositions of `Q` with coordinate permutations and sign changes on
/// either side, plus quarter-turn rotations of a real Euclidean codomain.
fn structured_candidates(q: &HomPoly) -> Result<Vec<(String, HomPoly)>> {
    let y = *q.codomain();
    let m = y.dim();
    let mut out = Vec::new();
    for perm in permutations(m, 4) {
        if perm.iter().enumerate().all(|(i, &j)| i == j) {
            continue;
        }
        let t = permutation_op(y, &perm, &vec![1.0; m])?;
        out.push((format!("swap:{perm:?}"), compose_linear(&t, q)?));
    }
    for signs in sign_patterns(m, 4) {
        let t = permutation_op(y, &(0..m).collect::<Vec<_>>(), &signs)?;
        out.push((format!("signs:{signs:?}"), compose_linear(&t, q)?));
    }
    let n = q.domain().dim();
    for perm in permutations(n, 4) {
        if perm.iter().enumerate().all(|(i, &j)| i == j) {
            continue;
        }
        out.push((format!("input_swap:{perm:?}"), permute_inputs(q, &perm)?));
    }
    if let Some(j) = quarter_turn(&y) {
        out.push(("rotation:quarter_turn".into(), compose_linear(&j, q)?));
    }
    Ok(out)
}

/// Block-diagonal quarter turns on a real Euclidean space of even
/// dimension; these have numerical radius zero.
fn quarter_turn(y: &SpaceDescriptor) -> Option<LinOp> {
    let n = y.dim();
    if y.field() != Field::Real || y.p().value() != 2.0 || !n.is_multiple_of(2) {
        return None;
    }
    let mut t = LinOp::identity(*y);
    for b in (0..n).step_by(2) {
        t = LinOp::rotation(*y, b, b + 1, std::f64::consts::FRAC_PI_2)
            .ok()?
            .compose(&t)
            .ok()?;
    }
    Some(t)
}

fn permutation_op(space: SpaceDescriptor, perm: &[usize], signs: &[f64]) -> Result<LinOp> {
    let n = space.dim();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, &j) in perm.iter().enumerate() {
        m[j][i] = Complex64::new(signs[i], 0.0);
    }
    LinOp::new(m, space)
}

fn permute_inputs(q: &HomPoly, perm: &[usize]) -> Result<HomPoly> {
    let terms = q
        .terms()
        .iter()
        .map(|t| {
            let mut alpha = vec![0; t.alpha.len()];
            for (i, &j) in perm.iter().enumerate() {
                alpha[j] = t.alpha[i];
            }
            Term::new(t.out, alpha, t.coeff)
        })
        .collect();
    HomPoly::new(q.degree(), *q.domain(), *q.codomain(), terms)
}

/// All permutations of `0..n` in lexicographic order when `n ≤ max_full`,
/// otherwise the transpositions.
fn permutations(n: usize, max_full: usize) -> Vec<Vec<usize>> {
    if n > max_full {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut p: Vec<usize> = (0..n).collect();
                p.swap(i, j);
                out.push(p);
            }
        }
        return out;
    }
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// Sign vectors other than all-plus: every pattern when `n ≤ max_full`,
/// otherwise single flips.
fn sign_patterns(n: usize, max_full: usize) -> Vec<Vec<f64>> {
    if n > max_full {
        return (0..n)
            .map(|i| (0..n).map(|j| if i == j { -1.0 } else { 1.0 }).collect())
            .collect();
    }
    (1..1usize << n)
        .map(|code| {
            (0..n)
                .map(|j| if (code >> j) & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpearReport {
    pub lambda: f64,
    pub worst_margin: f64,
    pub worst_poly: HomPoly,
    pub margins: Vec<f64>,
}

/// Scales at which `P` is tested: the defining inequality is required for
/// every polynomial, in particular for small multiples of `P`.
const SPEAR_SCALES: [f64; 7] = [
    1.0,
    0.25,
    0.0625,
    0.015625,
    0.00390625,
    0.0009765625,
    0.000244140625,
];

/// `min_s max_θ ‖Q + θ·sP‖ − ‖Q‖ − λ·s‖P‖` over the scales `s` above.
///
/// A negative value shows that the index of `Q` is below `λ`. The norms
/// of `Q` and `P` are engine estimates; `P = 0` gives exactly 0.
pub fn spear_margin_for(q: &HomPoly, p: &HomPoly, lambda: f64, cfg: &RadiusConfig) -> Result<f64> {
    check_lambda(lambda)?;
    if p.is_zero() {
        return Ok(0.0);
    }
    let optim = &cfg.optim;
    let nq = poly_norm(q, optim)?;
    let np = poly_norm(p, optim)?;
    let mut worst = f64::INFINITY;
    for &s in &SPEAR_SCALES {
        let sp = p.scale_real(s);
        let seeds = vec![nq.maximizer.0.clone(), np.maximizer.0.clone()];
        let top = max_over_circle(q, &sp, &seeds, optim, cfg.theta_points)?;
        worst = worst.min(top - nq.value - lambda * s * np.value);
    }
    Ok(worst)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda = {lambda} must lie in (0, 1]")))
    }
}

/// `max_θ ‖Q + θP‖` over `θ = ±1` (real) or the unit circle (complex; a
/// grid followed by golden-section refinement).
fn max_over_circle(
    q: &HomPoly,
    p: &HomPoly,
    seeds: &[Vec<Complex64>],
    optim: &OptimConfig,
    theta_points: usize,
) -> Result<f64> {
    let norm_with = |theta: Complex64| -> Result<f64> {
        let r = q.add_scaled(theta, p)?;
        Ok(poly_norm_seeded(&r, seeds, optim)?.value)
    };
    let norm_at = |phi: f64| norm_with(Complex64::from_polar(1.0, phi));
    match q.field() {
        Field::Real => {
            let a = norm_with(Complex64::new(1.0, 0.0))?;
            let b = norm_with(Complex64::new(-1.0, 0.0))?;
            Ok(a.max(b))
        }
        Field::Complex => {
            let step = std::f64::consts::TAU / theta_points as f64;
            let vals: Vec<f64> = (0..theta_points)
                .map(|j| norm_at(step * j as f64))
                .collect::<Result<_>>()?;
            let j = (0..vals.len())
                .max_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(b.cmp(&a)))
                .expect("theta_points ≥ 1");
            let mut best = vals[j];
            let (mut a, mut b) = (step * j as f64 - step, step * j as f64 + step);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = b - g * (b - a);
            let mut x2 = a + g * (b - a);
            let mut f1 = norm_at(x1)?;
            let mut f2 = norm_at(x2)?;
            for _ in 0..40 {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = norm_at(x2)?;
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = norm_at(x1)?;
                }
                best = best.max(f1).max(f2);
            }
            Ok(best)
        }
    }
}

/// Spear margins of `trials` random unit polynomials.
pub fn spear_margin(
    q: &HomPoly,
    trials: usize,
    lambda: f64,
    seed: u64,
    cfg: &RadiusConfig,
) -> Result<SpearReport> {
    check_lambda(lambda)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margins = Vec::with_capacity(trials);
    let mut worst: Option<(f64, HomPoly)> = None;
    for _ in 0..trials {
        let p = random_poly(q.degree(), *q.domain(), *q.codomain(), &mut rng)?;
        let n = poly_norm(&p, &cfg.optim)?.value;
        let p = if n > DEGENERATE_NORM { p.scale_real(1.0 / n) } else { p };
        let m = spear_margin_for(q, &p, lambda, cfg)?;
        margins.push(m);
        if worst.as_ref().is_none_or(|w| m < w.0) {
            worst = Some((m, p));
        }
    }
    let (worst_margin, worst_poly) = worst.expect("trials ≥ 1");
    Ok(SpearReport {
        lambda,
        worst_margin,
        worst_poly,
        margins,
    })
}

/// `v(T) = sup{|x*(Tx)| : ‖x‖ = 1, x*(x) = 1}`.
pub fn op_numerical_radius(t: &LinOp, cfg: &OptimConfig) -> Result<f64> {
    let space = *t.space();
    let l: f64 = t.matrix().iter().flatten().map(|z| z.norm()).sum::<f64>() * space.dim() as f64;
    let m = Maximizer::new(space, cfg)
        .lipschitz(2.0 * l)
        .phase_invariant(true)
        .run(|x| {
            let tx = t.apply_raw(x);
            face_sup(&space, x, &tx, FACE_TOL).map_or(0.0, |(_, v)| v.norm())
        })?;
    Ok(m.value)
}

/// `‖T‖ = sup_{‖x‖=1} ‖Tx‖`.
pub fn op_norm(t: &LinOp, cfg: &OptimConfig) -> Result<f64> {
    let space = *t.space();
    let m = Maximizer::new(space, cfg)
        .phase_invariant(true)
        .run(|x| lp_norm(space.p(), &t.apply_raw(x)))?;
    Ok(m.value)
}

/// `v(T) / ‖T∘Q‖`, an upper bound on the index of `Q`.
pub fn operator_bound(q: &HomPoly, t: &LinOp, cfg: &OptimConfig) -> Result<f64> {
    let tq = compose_linear(t, q)?;
    let n = poly_norm(&tq, cfg)?.value;
    if n <= DEGENERATE_NORM {
        return Err(Error::DegenerateComposition { norm: n });
    }
    Ok(op_numerical_radius(t, cfg)? / n)
}

/// Search quarter turns, plane rotations and signed permutations of `Y`
/// for an operator with `v(T) ≤ eps` and `‖T‖ ≥ 1 − eps`.
pub fn zero_radius_witness_search(
    y: &SpaceDescriptor,
    eps: f64,
    cfg: &OptimConfig,
) -> Result<Option<LinOp>> {
    let n = y.dim();
    let mut family: Vec<LinOp> = Vec::new();
    if let Some(j) = quarter_turn(y) {
        family.push(j);
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in 1..64 {
                let angle = k as f64 * std::f64::consts::PI / 32.0;
                family.push(LinOp::rotation(*y, i, j, angle)?);
            }
        }
    }
    if n <= 4 {
        for perm in permutations(n, 4) {
            for code in 0..1usize << n {
                let signs: Vec<f64> = (0..n)
                    .map(|j| if (code >> j) & 1 == 1 { -1.0 } else { 1.0 })
                    .collect();
                family.push(permutation_op(*y, &perm, &signs)?);
            }
        }
    }
    let probes = crate::spaces::sample_sphere(y, 64, cfg.seed);
    for t in family {
        // cheap rejection before the full search
        let quick = probes.iter().any(|x| {
            let tx = t.apply_raw(x.coords());
            face_sup(y, x.coords(), &tx, FACE_TOL).is_some_and(|(_, v)| v.norm() > eps)
        });
        if quick {
            continue;
        }
        if op_numerical_radius(&t, cfg)? <= eps && op_norm(&t, cfg)? >= 1.0 - eps {
            return Ok(Some(t));
        }
    }
    Ok(None)
}
