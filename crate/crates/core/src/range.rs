//! Numerical range and radius of `P` relative to a norm-one `Q`.
//!
//! Three estimators are provided and cross-checked:
//!
//! * attainment: sup of `|y*(P(x))|` over `x` with `‖Q(x)‖ = 1` and `y*`
//!   in the norming face of `Q(x)`;
//! * δ-ladder: `v_δ(P) = sup |y*(P(x))|` over unit pairs with
//!   `Re y*(Q(x)) ≥ 1 − δ`, for a decreasing list of δ;
//! * limit formula: `max_θ lim_{α→0+} (‖Q + αθP‖ − ‖Q‖)/α`.
//!
//! A [`RadiusEngine`] holds everything that depends on `Q` only, so many
//! `P` can be measured against the same `Q` cheaply.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{
    local_ascent, near_maximizers, poly_norm, poly_norm_seeded, NormEstimate, OptimConfig,
};
use crate::poly::HomPoly;
use crate::spaces::{
    ascent_functional, dot, face_sup, lp_norm, norming_functionals_tol, DualVector, Field,
    SpaceDescriptor, Vector,
};

/// Relative tolerance for deciding the norming face of `Q(x)` on the
/// attainment set.
pub const FACE_TOL: f64 = 1e-8;

/// Directions used when sweeping the complex unit circle in the δ-slice.
const SLICE_THETAS: usize = 16;

/// Attainment points kept for the slice sweep.
const SLICE_ATTAIN_CAP: usize = 512;

/// Candidates whose circle direction is refined beyond the coarse sweep.
const REFINE_TOP: usize = 8;

/// Levels at which joint ascent over `(x, y*)` adds points to the slice
/// candidate set. They do not depend on the δ being evaluated, which keeps
/// every ladder monotone.
const JOINT_LEVELS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusConfig {
    pub optim: OptimConfig,
    /// Level defining the attainment set `‖Q(x)‖ ≥ 1 − eta`.
    pub eta: f64,
    /// Allowed gap between the attainment value and the smallest-δ ladder
    /// value before the estimate is flagged.
    pub cross_tol: f64,
    pub delta_ladder: Vec<f64>,
    /// Points on the complex unit circle for the limit formula.
    pub theta_points: usize,
}

impl Default for RadiusConfig {
    fn default() -> Self {
        RadiusConfig {
            optim: OptimConfig::default(),
            eta: 1e-6,
            cross_tol: 5e-3,
            delta_ladder: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            theta_points: 64,
        }
    }
}

impl RadiusConfig {
    pub fn validate(&self) -> Result<()> {
        self.optim.validate()?;
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidArgument("eta must lie in (0, 1)".into()));
        }
        if self.cross_tol.is_nan() || self.cross_tol <= 0.0 {
            return Err(Error::InvalidArgument("cross_tol must be positive".into()));
        }
        if self.delta_ladder.is_empty() {
            return Err(Error::InvalidArgument("delta ladder is empty".into()));
        }
        if self.delta_ladder.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return Err(Error::InvalidArgument(
                "delta ladder entries must lie in (0, 1)".into(),
            ));
        }
        if self.delta_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "delta ladder must be strictly decreasing".into(),
            ));
        }
        if self.theta_points == 0 {
            return Err(Error::InvalidArgument("theta_points must be positive".into()));
        }
        Ok(())
    }
}

/// A unit pair `(x, y*)` with `residual = 1 − Re y*(Q(x))` and
/// `value = y*(P(x))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessPair {
    pub x: Vector,
    pub y_star: DualVector,
    pub residual: f64,
    pub value: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DeltaLadder,
    Attainment,
    LimitFormula,
}

/// One rung of a ladder: `level` is δ for the δ-ladder and α for the
/// limit formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderEntry {
    pub level: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusEstimate {
    pub value: f64,
    pub method: Method,
    pub witness: Option<WitnessPair>,
    pub ladder: Vec<LadderEntry>,
    /// Set when the estimator's own convergence checks were not met.
    pub flagged: bool,
    /// `|attainment − smallest-δ ladder value|` (numerical radius only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder_gap: Option<f64>,
    /// Bound on the error caused by discretising the unit circle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_error_bound: Option<f64>,
}

impl RadiusEstimate {
    fn new(value: f64, method: Method) -> Self {
        RadiusEstimate {
            value,
            method,
            witness: None,
            ladder: Vec::new(),
            flagged: false,
            ladder_gap: None,
            theta_error_bound: None,
        }
    }
}

/// Witness values in the δ-slice and their convex hull.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeCloud {
    pub points: Vec<Complex64>,
    /// Counter-clockwise hull vertices; `[min, max]` for real fields.
    pub hull: Vec<Complex64>,
    pub delta: f64,
    pub radius: f64,
}

impl RangeCloud {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for z in &self.points {
            s.push_str(&format!("{},{}\n", z.re, z.im));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("clouds always serialise")
    }
}

/// Everything about `Q` that the estimators reuse.
pub struct RadiusEngine {
    q: HomPoly,
    cfg: RadiusConfig,
    norm: NormEstimate,
    attained: bool,
    attain: Vec<Vec<Complex64>>,
    q_attain: Vec<Vec<Complex64>>,
    slice: Vec<Vec<Complex64>>,
    q_slice: Vec<Vec<Complex64>>,
}

impl RadiusEngine {
    pub fn new(q: &HomPoly, cfg: &RadiusConfig) -> Result<Self> {
        cfg.validate()?;
        let norm = poly_norm(q, &cfg.optim)?;
        let near = near_maximizers(q, cfg.eta, &cfg.optim, &norm)?;
        let attain = near.points;
        let q_attain: Vec<_> = attain.iter().map(|x| q.eval(x)).collect();

        let stride = attain.len().div_ceil(SLICE_ATTAIN_CAP).max(1);
        let mut slice: Vec<Vec<Complex64>> = attain.iter().step_by(stride).cloned().collect();
        slice.push(norm.maximizer.0.clone());
        slice.extend(near.top);
        let q_slice = slice.iter().map(|x| q.eval(x)).collect();
        Ok(RadiusEngine {
            q: q.clone(),
            cfg: cfg.clone(),
            norm,
            attained: near.attained,
            attain,
            q_attain,
            slice,
            q_slice,
        })
    }

    pub fn q(&self) -> &HomPoly {
        &self.q
    }

    pub fn config(&self) -> &RadiusConfig {
        &self.cfg
    }

    pub fn q_norm(&self) -> &NormEstimate {
        &self.norm
    }

    /// Points with `‖Q(x)‖ ≥ 1 − eta`; empty when `Q` does not reach that
    /// level.
    pub fn attainment_set(&self) -> &[Vec<Complex64>] {
        &self.attain
    }

    fn check_pair(&self, p: &HomPoly) -> Result<()> {
        if p.degree() != self.q.degree()
            || p.domain() != self.q.domain()
            || p.codomain() != self.q.codomain()
        {
            return Err(Error::InvalidPoly(
                "P and Q must have the same degree, domain and codomain".into(),
            ));
        }
        Ok(())
    }

    fn codomain(&self) -> &SpaceDescriptor {
        self.q.codomain()
    }

    fn witness(&self, x: &[Complex64], qx: &[Complex64], b: Vec<Complex64>, px: &[Complex64]) -> WitnessPair {
        // adding +0 turns -0 into +0 so reports do not carry signed zeros
        let clean = |z: Complex64| Complex64::new(z.re + 0.0, z.im + 0.0);
        WitnessPair {
            x: Vector(x.iter().map(|&z| clean(z)).collect()),
            residual: 1.0 - dot(&b, qx).re + 0.0,
            value: clean(dot(&b, px)),
            y_star: DualVector(b.into_iter().map(clean).collect()),
        }
    }

    /// Sup of `|y*(P(x))|` over the attainment set and the norming faces of
    /// `Q(x)`, refined along continuum components.
    fn attainment_unit(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        self.check_pair(p)?;
        if !self.attained {
            return Err(Error::NoAttainment {
                estimate: self.norm.value,
                eta: self.cfg.eta,
            });
        }
        let y = *self.codomain();
        let scored: Vec<f64> = self
            .attain
            .par_iter()
            .zip(&self.q_attain)
            .map(|(x, qx)| {
                face_sup(&y, qx, &p.eval(x), FACE_TOL)
                    .map_or(0.0, |(_, v)| v.norm())
            })
            .collect();
        let best = argmax(&scored).expect("attainment set is non-empty");

        // polish the leading points while keeping ‖Q(x)‖ from dropping
        let mut order: Vec<usize> = (0..scored.len()).collect();
        order.sort_by(|&a, &b| scored[b].total_cmp(&scored[a]).then(a.cmp(&b)));
        let mut starts: Vec<usize> = Vec::new();
        for i in order {
            if starts.len() == 4 {
                break;
            }
            let far = starts.iter().all(|&j| {
                self.attain[i]
                    .iter()
                    .zip(&self.attain[j])
                    .any(|(a, b)| (a - b).norm() > 1e-2)
            });
            if far {
                starts.push(i);
            }
        }
        let domain = *self.q.domain();
        let q_codomain = y.p();
        let refined: Vec<(Vec<Complex64>, f64)> = starts
            .par_iter()
            .map(|&i| {
                let floor = lp_norm(q_codomain, &self.q_attain[i]) - 1e-13;
                let f = |x: &[Complex64]| {
                    let qx = self.q.eval(x);
                    if lp_norm(q_codomain, &qx) < floor {
                        return f64::NEG_INFINITY;
                    }
                    face_sup(&y, &qx, &p.eval(x), FACE_TOL).map_or(0.0, |(_, v)| v.norm())
                };
                local_ascent(&domain, &f, self.attain[i].clone(), scored[i], &self.cfg.optim)
            })
            .collect();
        let mut x = self.attain[best].clone();
        let mut value = scored[best];
        for (xr, v) in refined {
            if v > value {
                value = v;
                x = xr;
            }
        }
        if y.field() == Field::Real {
            // report the representative of ±x whose last nonzero coordinate is positive
            if x.iter().rev().find(|c| c.re != 0.0).is_some_and(|c| c.re < 0.0) {
                x.iter_mut().for_each(|c| *c = -*c);
            }
        }
        let qx = self.q.eval(&x);
        let px = p.eval(&x);
        let (b, val) = face_sup(&y, &qx, &px, FACE_TOL).expect("attainment point has Q(x) ≠ 0");
        let mut est = RadiusEstimate::new(val.norm(), Method::Attainment);
        est.witness = Some(self.witness(&x, &qx, b, &px));
        Ok(est)
    }

    fn check_slice(&self, delta: f64) -> Result<()> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1)")));
        }
        if self.norm.value < 1.0 - delta {
            return Err(Error::EmptySlice {
                delta,
                estimate: self.norm.value,
            });
        }
        Ok(())
    }

    fn thetas(&self, count: usize) -> Vec<Complex64> {
        match self.q.field() {
            Field::Real => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            Field::Complex => (0..count)
                .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / count as f64))
                .collect(),
        }
    }

    /// Best witness at one `x` for the slice `Re y*(Q(x)) ≥ 1 − delta`.
    fn slice_best(
        &self,
        qx: &[Complex64],
        px: &[Complex64],
        delta: f64,
        refine: bool,
    ) -> Option<(Vec<Complex64>, Complex64)> {
        self.slice_best_with(qx, px, delta, refine, SLICE_THETAS)
    }

    fn slice_best_with(
        &self,
        qx: &[Complex64],
        px: &[Complex64],
        delta: f64,
        refine: bool,
        n_thetas: usize,
    ) -> Option<(Vec<Complex64>, Complex64)> {
        let y = self.codomain();
        let c = 1.0 - delta;
        let mut best: Option<(Vec<Complex64>, Complex64, f64)> = None;
        let mut consider = |theta: Complex64| -> Option<f64> {
            let b = slice_functional(y, qx, px, theta, c)?;
            let v = dot(&b, px);
            let h = (theta * v).re;
            if best.as_ref().is_none_or(|(_, bv, _)| v.norm() > bv.norm()) {
                best = Some((b, v, h));
            }
            Some(h)
        };
        let thetas = self.thetas(n_thetas);
        let hs: Vec<f64> = thetas
            .iter()
            .map(|&t| consider(t).unwrap_or(f64::NEG_INFINITY))
            .collect();
        if hs.iter().all(|h| *h == f64::NEG_INFINITY) {
            return None;
        }
        if refine && self.q.field() == Field::Complex {
            let j = argmax(&hs).expect("non-empty");
            let step = std::f64::consts::TAU / n_thetas as f64;
            let phi0 = step * j as f64;
            golden_max(phi0 - step, phi0 + step, 40, |phi| {
                consider(Complex64::from_polar(1.0, phi)).unwrap_or(f64::NEG_INFINITY)
            });
        }
        best.map(|(b, v, _)| (b, v))
    }

    /// Witness candidates `x` for the δ-slice: a subsample of the
    /// attainment set, the best pool points by `‖Q(x)‖`, and the results of
    /// joint ascent at fixed levels.
    fn slice_points(&self, p: &HomPoly) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
        let mut xs = self.slice.clone();
        let mut qs = self.q_slice.clone();
        let y = *self.codomain();
        let qp = y.p();
        let domain = *self.q.domain();
        let mut cfg = self.cfg.optim.clone();
        cfg.tol = cfg.tol.max(1e-9);
        cfg.max_iters = cfg.max_iters.min(300);
        let extra: Vec<Vec<Complex64>> = JOINT_LEVELS
            .par_iter()
            .flat_map_iter(|&level| {
                let c = 1.0 - level;
                let mut scored: Vec<(usize, f64, Complex64)> = Vec::new();
                for (i, (x, qx)) in self.slice.iter().zip(&self.q_slice).enumerate() {
                    if lp_norm(qp, qx) < c {
                        continue;
                    }
                    if let Some((_, v)) = self.slice_best_with(qx, &p.eval(x), level, false, 8) {
                        scored.push((i, v.norm(), v));
                    }
                }
                scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                scored.truncate(2);
                scored
                    .into_iter()
                    .map(|(i, v, val)| {
                        let theta = if v > 0.0 { val.conj() / v } else { Complex64::new(1.0, 0.0) };
                        let f = |x: &[Complex64]| {
                            let qx = self.q.eval(x);
                            let px = p.eval(x);
                            match slice_functional(&y, &qx, &px, theta, c) {
                                Some(b) => (theta * dot(&b, &px)).re,
                                None => f64::NEG_INFINITY,
                            }
                        };
                        let start = self.slice[i].clone();
                        let f0 = f(&start);
                        local_ascent(&domain, &f, start, f0, &cfg).0
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        for x in extra {
            qs.push(self.q.eval(&x));
            xs.push(x);
        }
        (xs, qs)
    }

    fn v_delta_on(
        &self,
        p: &HomPoly,
        xs: &[Vec<Complex64>],
        qs: &[Vec<Complex64>],
        delta: f64,
    ) -> Option<WitnessPair> {
        let y = *self.codomain();
        let c = 1.0 - delta;
        let better = |a: &WitnessPair, b: &Option<WitnessPair>| {
            a.residual <= delta && b.as_ref().is_none_or(|b| a.value.norm() > b.value.norm())
        };
        let sweep = |i: usize, refine: bool| -> Option<WitnessPair> {
            let (x, qx) = (&xs[i], &qs[i]);
            if lp_norm(y.p(), qx) < c {
                return None;
            }
            let px = p.eval(x);
            let mut best = None;
            if let Some((b, _)) = self.slice_best(qx, &px, delta, refine) {
                let w = self.witness(x, qx, b, &px);
                if better(&w, &best) {
                    best = Some(w);
                }
            }
            if let Some((b, _)) = face_sup(&y, qx, &px, FACE_TOL) {
                let w = self.witness(x, qx, b, &px);
                if better(&w, &best) {
                    best = Some(w);
                }
            }
            best
        };
        let coarse: Vec<Option<WitnessPair>> =
            (0..xs.len()).into_par_iter().map(|i| sweep(i, false)).collect();
        let mut found = coarse.clone();
        if self.q.field() == Field::Complex {
            // refine the circle direction only where it can matter
            let mut order: Vec<usize> = (0..xs.len()).filter(|&i| coarse[i].is_some()).collect();
            let score = |i: usize| coarse[i].as_ref().map_or(0.0, |w| w.value.norm());
            order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
            order.truncate(REFINE_TOP);
            let refined: Vec<(usize, Option<WitnessPair>)> =
                order.into_par_iter().map(|i| (i, sweep(i, true))).collect();
            for (i, w) in refined {
                if let Some(w) = w {
                    if better(&w, &found[i]) {
                        found[i] = Some(w);
                    }
                }
            }
        }
        let mut best: Option<WitnessPair> = None;
        for w in found.into_iter().flatten() {
            if better(&w, &best) {
                best = Some(w);
            }
        }
        best
    }

    /// `v_δ(P)` as an attained lower bound.
    fn v_delta_unit(&self, p: &HomPoly, delta: f64) -> Result<RadiusEstimate> {
        self.check_pair(p)?;
        self.check_slice(delta)?;
        let (xs, qs) = self.slice_points(p);
        let w = self
            .v_delta_on(p, &xs, &qs, delta)
            .ok_or(Error::EmptySlice {
                delta,
                estimate: self.norm.value,
            })?;
        let mut est = RadiusEstimate::new(w.value.norm(), Method::DeltaLadder);
        est.ladder.push(LadderEntry {
            level: delta,
            value: est.value,
        });
        est.witness = Some(w);
        Ok(est)
    }

    /// The configured δ-ladder. Each rung also counts the witnesses of all
    /// smaller δ, which belong to its slice as well.
    fn delta_ladder_unit(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        self.check_pair(p)?;
        let deltas = &self.cfg.delta_ladder;
        self.check_slice(*deltas.first().expect("validated non-empty"))?;
        let (xs, qs) = self.slice_points(p);
        let mut rungs: Vec<Option<WitnessPair>> = deltas
            .iter()
            .map(|&d| {
                if self.norm.value < 1.0 - d {
                    None
                } else {
                    self.v_delta_on(p, &xs, &qs, d)
                }
            })
            .collect();
        for i in (0..rungs.len().saturating_sub(1)).rev() {
            let smaller = rungs[i + 1].clone();
            if let Some(s) = smaller {
                if rungs[i].as_ref().is_none_or(|w| s.value.norm() > w.value.norm()) {
                    rungs[i] = Some(s);
                }
            }
        }
        let ladder: Vec<LadderEntry> = deltas
            .iter()
            .zip(&rungs)
            .filter_map(|(&d, w)| {
                w.as_ref().map(|w| LadderEntry {
                    level: d,
                    value: w.value.norm(),
                })
            })
            .collect();
        let last = rungs
            .iter()
            .rev()
            .flatten()
            .next()
            .cloned()
            .ok_or(Error::EmptySlice {
                delta: *deltas.last().expect("validated non-empty"),
                estimate: self.norm.value,
            })?;
        let mut est = RadiusEstimate::new(last.value.norm(), Method::DeltaLadder);
        est.flagged = rungs.last().is_none_or(|w| w.is_none());
        est.witness = Some(last);
        est.ladder = ladder;
        Ok(est)
    }

    /// Attainment value with the δ-ladder attached as a cross-check.
    fn numerical_radius_unit(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        let mut est = self.attainment_unit(p)?;
        let ladder = self.delta_ladder_unit(p)?;
        let gap = (est.value - ladder.value).abs();
        if gap > 10.0 * self.cfg.cross_tol {
            return Err(Error::Inconsistent {
                attainment: est.value,
                ladder: ladder.value,
                tolerance: self.cfg.cross_tol,
            });
        }
        est.flagged = gap > self.cfg.cross_tol;
        est.ladder_gap = Some(gap);
        est.ladder = ladder.ladder;
        Ok(est)
    }

    /// `max_θ lim_{α→0+} (‖Q + αθP‖ − ‖Q‖)/α` with two-point Richardson
    /// extrapolation over `α = 10⁻²·2^{-j}`.
    fn limit_unit(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        self.check_pair(p)?;
        if p.is_zero() {
            return Ok(RadiusEstimate::new(0.0, Method::LimitFormula));
        }
        let thetas = self.thetas(self.cfg.theta_points);
        let n_q = self.norm.value;
        let y = *self.codomain();
        let mut cfg = self.cfg.optim.clone();
        cfg.restarts = cfg.restarts.min(4);

        let stride = self.attain.len().div_ceil(SLICE_ATTAIN_CAP).max(1);
        let sample: Vec<(usize, Complex64)> = (0..self.attain.len())
            .step_by(stride)
            .map(|i| {
                let v = face_sup(&y, &self.q_attain[i], &p.eval(&self.attain[i]), FACE_TOL)
                    .map_or(Complex64::new(0.0, 0.0), |(_, v)| v);
                (i, v)
            })
            .collect();
        let seeds_for = |theta: Complex64| -> Vec<Vec<Complex64>> {
            let mut s = sample.clone();
            s.sort_by(|a, b| (theta * b.1).re.total_cmp(&(theta * a.1).re).then(a.0.cmp(&b.0)));
            let mut out: Vec<Vec<Complex64>> = vec![self.norm.maximizer.0.clone()];
            for (i, _) in s {
                if out.len() >= 6 {
                    break;
                }
                let x = &self.attain[i];
                if out.iter().all(|o| o.iter().zip(x).any(|(a, b)| (a - b).norm() > 1e-2)) {
                    out.push(x.clone());
                }
            }
            out
        };
        let quotient = |theta: Complex64, alpha: f64, seeds: &[Vec<Complex64>]| -> Result<(f64, Vec<Complex64>)> {
            let r = self.q.add_scaled(theta * alpha, p)?;
            let est = poly_norm_seeded(&r, seeds, &cfg)?;
            Ok(((est.value - n_q) / alpha, est.maximizer.0))
        };

        const ALPHA0: f64 = 1e-2;
        const ALPHA_MIN: f64 = 1e-8;
        const STABLE: f64 = 1e-7;

        // first quotient for every direction, then the full ladder for the
        // promising ones
        let first: Vec<(f64, Vec<Vec<Complex64>>)> = thetas
            .par_iter()
            .map(|&t| {
                let seeds = seeds_for(t);
                let (d, _) = quotient(t, ALPHA0, &seeds)?;
                Ok((d, seeds))
            })
            .collect::<Result<_>>()?;
        let d0: Vec<f64> = first.iter().map(|f| f.0).collect();
        let top = d0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut chosen: Vec<usize> = (0..thetas.len()).filter(|&j| d0[j] >= top - 0.05).collect();
        chosen.sort_by(|&a, &b| d0[b].total_cmp(&d0[a]).then(a.cmp(&b)));
        chosen.truncate(8);

        struct Run {
            value: f64,
            flagged: bool,
            ladder: Vec<LadderEntry>,
        }
        let runs: Vec<Run> = chosen
            .par_iter()
            .map(|&j| {
                let theta = thetas[j];
                let mut seeds = first[j].1.clone();
                let mut ds = vec![d0[j]];
                let mut rs: Vec<f64> = Vec::new();
                let mut ladder = Vec::new();
                let mut alpha = ALPHA0;
                let mut stable = None;
                while alpha / 2.0 >= ALPHA_MIN {
                    alpha /= 2.0;
                    let (d, x) = quotient(theta, alpha, &seeds)?;
                    seeds.insert(0, x);
                    seeds.truncate(8);
                    let r = 2.0 * d - ds[ds.len() - 1];
                    ds.push(d);
                    ladder.push(LadderEntry { level: alpha, value: r });
                    if let Some(&prev) = rs.last() {
                        if (r - prev).abs() <= STABLE {
                            stable = Some(r);
                            rs.push(r);
                            break;
                        }
                    }
                    rs.push(r);
                }
                let (value, flagged) = match stable {
                    Some(r) => (r, false),
                    None => {
                        let k = (1..rs.len())
                            .min_by(|&a, &b| {
                                (rs[a] - rs[a - 1]).abs().total_cmp(&(rs[b] - rs[b - 1]).abs())
                            })
                            .unwrap_or(0);
                        (rs.get(k).copied().unwrap_or(ds[0]), true)
                    }
                };
                Ok(Run {
                    value,
                    flagged,
                    ladder,
                })
            })
            .collect::<Result<_>>()?;
        let best = runs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.value.total_cmp(&b.1.value).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .expect("at least one direction");
        let run = &runs[best];
        let value = run.value.max(0.0);
        let mut est = RadiusEstimate::new(value, Method::LimitFormula);
        est.flagged = run.flagged;
        est.ladder = run.ladder.clone();
        if self.q.field() == Field::Complex {
            let n = self.cfg.theta_points as f64;
            est.theta_error_bound = Some(value * (1.0 - (std::f64::consts::PI / n).cos()));
        }
        Ok(est)
    }

    /// Sup of `|y*(P(x))|` over the attainment set and the norming faces of
    /// `Q(x)`.
    pub fn attainment(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        self.at_unit_scale(p, |u| self.attainment_unit(u))
    }

    /// `v_δ(P)` as an attained lower bound.
    pub fn v_delta(&self, p: &HomPoly, delta: f64) -> Result<RadiusEstimate> {
        self.at_unit_scale(p, |u| self.v_delta_unit(u, delta))
    }

    /// The configured δ-ladder, monotone in δ.
    pub fn delta_ladder(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        self.at_unit_scale(p, |u| self.delta_ladder_unit(u))
    }

    /// Attainment value with the δ-ladder attached as a cross-check.
    pub fn numerical_radius(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        self.at_unit_scale(p, |u| self.numerical_radius_unit(u))
    }

    /// `max_θ lim_{α→0+} (‖Q + αθP‖ − ‖Q‖)/α`.
    pub fn limit(&self, p: &HomPoly) -> Result<RadiusEstimate> {
        self.at_unit_scale(p, |u| self.limit_unit(u))
    }

    /// Runs `f` on `P` scaled to unit coefficient mass and scales the
    /// result back, so that every estimator is exactly equivariant under
    /// `P ↦ cP` up to rounding.
    fn at_unit_scale(
        &self,
        p: &HomPoly,
        f: impl FnOnce(&HomPoly) -> Result<RadiusEstimate>,
    ) -> Result<RadiusEstimate> {
        let s = p.coeff_l1();
        if s == 0.0 || !s.is_finite() {
            return f(p);
        }
        let mut est = f(&p.scale_real(1.0 / s))?;
        est.value *= s;
        for e in &mut est.ladder {
            e.value *= s;
        }
        if let Some(w) = &mut est.witness {
            w.value *= s;
        }
        est.ladder_gap = est.ladder_gap.map(|g| g * s);
        est.theta_error_bound = est.theta_error_bound.map(|g| g * s);
        Ok(est)
    }

    /// Witness values `y*(P(x))` from the δ-slice, with their convex hull.
    pub fn range_cloud(&self, p: &HomPoly, delta: f64, count: usize, seed: u64) -> Result<RangeCloud> {
        self.check_pair(p)?;
        self.check_slice(delta)?;
        if count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        let y = *self.codomain();
        let c = 1.0 - delta;
        let (xs, qs) = self.slice_points(p);
        let radius = self
            .v_delta_on(p, &xs, &qs, delta)
            .ok_or(Error::EmptySlice {
                delta,
                estimate: self.norm.value,
            })?
            .value
            .norm();
        let thetas = self.thetas(SLICE_THETAS);
        let per_x: Vec<Vec<Complex64>> = xs
            .par_iter()
            .zip(&qs)
            .map(|(x, qx)| {
                let mut vals = Vec::new();
                let nq = lp_norm(y.p(), qx);
                if nq < c {
                    return vals;
                }
                let px = p.eval(x);
                if let Ok(faces) = norming_functionals_tol(&y, qx, 64, FACE_TOL) {
                    for b in faces {
                        if 1.0 - dot(&b.0, qx).re <= delta {
                            vals.push(dot(&b.0, &px));
                        }
                    }
                }
                for &t in &thetas {
                    if let Some(b) = slice_functional(&y, qx, &px, t, c) {
                        if 1.0 - dot(&b, qx).re <= delta {
                            vals.push(dot(&b, &px));
                        }
                    }
                }
                vals
            })
            .collect();
        let mut all: Vec<Complex64> = per_x.into_iter().flatten().collect();
        all.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        all.dedup_by(|a, b| (*a - *b).norm() <= 1e-12);
        if all.is_empty() {
            return Err(Error::EmptySlice {
                delta,
                estimate: self.norm.value,
            });
        }
        let hull = convex_hull(&all, y.field());
        let mut points: Vec<Complex64> = hull.clone();
        let mut rest: Vec<Complex64> = all
            .into_iter()
            .filter(|z| !hull.contains(z))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rest.shuffle(&mut rng);
        points.extend(rest);
        points.truncate(count);
        Ok(RangeCloud {
            points,
            hull,
            delta,
            radius,
        })
    }
}

fn argmax(v: &[f64]) -> Option<usize> {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a)))
}

fn golden_max(mut a: f64, mut b: f64, iters: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        x1
    } else {
        x2
    }
}

/// The functional maximising `Re θ·b(w)` over `‖b‖ ≤ 1`, `Re b(u) ≥ c`.
///
/// Uses the dual problem `min_{μ≥0} ‖θw + μu‖ − μc`: the right derivative
/// in `μ` is `Re b⁺(u) − c` with `b⁺` the ascent functional of
/// `θw + μu`, found by bisection; the two bracketing functionals are then
/// mixed so that the constraint holds. `None` when `‖u‖ < c`.
pub(crate) fn slice_functional(
    space: &SpaceDescriptor,
    u: &[Complex64],
    w: &[Complex64],
    theta: Complex64,
    c: f64,
) -> Option<Vec<Complex64>> {
    let p = space.p();
    let nu = lp_norm(p, u);
    if nu == 0.0 || nu < c {
        return None;
    }
    let target = (c + 1e-12).min(nu);
    let tw: Vec<Complex64> = w.iter().map(|z| theta * z).collect();
    let grad = |mu: f64| {
        let z: Vec<Complex64> = tw.iter().zip(u).map(|(a, b)| a + b * mu).collect();
        let b = ascent_functional(space, &z, u);
        let g = dot(&b, u).re;
        (b, g)
    };
    let (b0, g0) = grad(0.0);
    if g0 >= target {
        return Some(b0);
    }
    let (mut lo, mut b_lo, mut g_lo) = (0.0, b0, g0);
    let mut hi = 1.0;
    let (mut b_hi, mut g_hi);
    loop {
        let (b, g) = grad(hi);
        if g >= target {
            b_hi = b;
            g_hi = g;
            break;
        }
        lo = hi;
        b_lo = b;
        g_lo = g;
        hi *= 2.0;
        if hi > 1e16 {
            return Some(ascent_functional(space, u, u));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        let (b, g) = grad(mid);
        if g >= target {
            hi = mid;
            b_hi = b;
            g_hi = g;
        } else {
            lo = mid;
            b_lo = b;
            g_lo = g;
        }
    }
    let lam = if g_hi > g_lo {
        ((g_hi - target) / (g_hi - g_lo)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut b: Vec<Complex64> = b_lo
        .iter()
        .zip(&b_hi)
        .map(|(l, h)| l * lam + h * (1.0 - lam))
        .collect();
    let nb = lp_norm(p.conjugate(), &b);
    if nb > 1.0 {
        for z in b.iter_mut() {
            *z /= nb;
        }
    }
    Some(b)
}

/// Convex hull of points in the plane (counter-clockwise, no collinear
/// vertices); for real fields the interval `[min, max]`.
pub fn convex_hull(points: &[Complex64], field: Field) -> Vec<Complex64> {
    if points.is_empty() {
        return Vec::new();
    }
    if field == Field::Real {
        let lo = points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        return if lo == hi {
            vec![Complex64::new(lo, 0.0)]
        } else {
            vec![Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
        };
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| {
        (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
    };
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for &pt in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0 {
            hull.pop();
        }
        hull.push(pt);
    }
    let lower = hull.len() + 1;
    for &pt in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0 {
            hull.pop();
        }
        hull.push(pt);
    }
    hull.pop();
    hull
}

/// Whether `z` lies in the hull returned by [`convex_hull`], up to `slack`.
pub fn hull_contains(hull: &[Complex64], z: Complex64, field: Field, slack: f64) -> bool {
    match (field, hull.len()) {
        (_, 0) => false,
        (_, 1) => (z - hull[0]).norm() <= slack,
        (Field::Real, _) => z.re >= hull[0].re - slack && z.re <= hull[1].re + slack,
        (Field::Complex, 2) => {
            let (a, b) = (hull[0], hull[1]);
            let d = b - a;
            let t = (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (a + d * t - z).norm() <= slack
        }
        (Field::Complex, n) => (0..n).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            let edge = b - a;
            let cross = edge.re * (z.im - a.im) - edge.im * (z.re - a.re);
            cross >= -slack * edge.norm()
        }),
    }
}

/// `v_δ(P)` relative to `Q`.
pub fn v_delta(p: &HomPoly, q: &HomPoly, delta: f64, cfg: &RadiusConfig) -> Result<RadiusEstimate> {
    RadiusEngine::new(q, cfg)?.v_delta(p, delta)
}

/// Attainment estimate of `v_Q(P)` with the δ-ladder attached.
pub fn numerical_radius(p: &HomPoly, q: &HomPoly, cfg: &RadiusConfig) -> Result<RadiusEstimate> {
    RadiusEngine::new(q, cfg)?.numerical_radius(p)
}

/// Limit-formula estimate of `v_Q(P)`.
pub fn radius_via_limit(p: &HomPoly, q: &HomPoly, cfg: &RadiusConfig) -> Result<RadiusEstimate> {
    RadiusEngine::new(q, cfg)?.limit(p)
}

pub fn range_cloud(
    p: &HomPoly,
    q: &HomPoly,
    delta: f64,
    count: usize,
    seed: u64,
    cfg: &RadiusConfig,
) -> Result<RangeCloud> {
    RadiusEngine::new(q, cfg)?.range_cloud(p, delta, count, seed)
}
