//! Global maximisation over unit spheres of `ℓ_p^n`.
//!
//! Every search starts from a candidate pool: a dense parametric grid when
//! the sphere has real dimension at most 3, plus seeded random points and
//! any caller-supplied seeds. The best, mutually separated candidates are
//! then polished by a finite-difference ascent followed by a pattern
//! search, both working in real ambient coordinates with radial
//! projection back onto the sphere.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::HomPoly;
use crate::spaces::{lp_norm, normalize, sample_sphere, Exponent, Field, SpaceDescriptor, Vector};

/// Values this close to 1 count as exact maximisers of a norm-one `Q`.
const EXACT_SLACK: f64 = 1e-12;

/// Grid points per axis are capped so that a grid has at most about
/// 2^18 points per face.
const GRID_BUDGET_LOG2: f64 = 18.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol: f64,
    pub seed: u64,
    pub grid_resolution: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            restarts: 16,
            max_iters: 2000,
            step_init: 0.05,
            tol: 1e-13,
            seed: 0,
            grid_resolution: 4096,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::InvalidArgument("step_init must be positive".into()));
        }
        if self.grid_resolution < 2 {
            return Err(Error::InvalidArgument(
                "grid_resolution must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    GridCertified,
    Heuristic,
}

/// Best value after each polished restart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Maximum {
    pub point: Vector,
    pub value: f64,
    pub status: Status,
    /// `L·h` when a grid was used and a Lipschitz bound was supplied.
    pub gap: Option<f64>,
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub maximizer: Vector,
    pub status: Status,
    pub gap: Option<f64>,
    pub lipschitz: f64,
    pub trace: Vec<TraceEntry>,
}

/// Builder for a single maximisation run.
pub struct Maximizer {
    space: SpaceDescriptor,
    cfg: OptimConfig,
    lipschitz: Option<f64>,
    phase_invariant: bool,
    use_grid: bool,
    random_points: Option<usize>,
    seeds: Vec<Vec<Complex64>>,
}

impl Maximizer {
    pub fn new(space: SpaceDescriptor, cfg: &OptimConfig) -> Self {
        Maximizer {
            space,
            cfg: cfg.clone(),
            lipschitz: None,
            phase_invariant: false,
            use_grid: true,
            random_points: None,
            seeds: Vec::new(),
        }
    }

    /// Lipschitz bound of the objective, used for the certified gap.
    pub fn lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    /// Declare `f(c·x) = f(x)` for unit scalars `c`; the grid then only
    /// covers one representative per scalar orbit.
    pub fn phase_invariant(mut self, yes: bool) -> Self {
        self.phase_invariant = yes;
        self
    }

    pub fn grid(mut self, yes: bool) -> Self {
        self.use_grid = yes;
        self
    }

    pub fn grid_resolution(mut self, res: usize) -> Self {
        self.cfg.grid_resolution = res;
        self
    }

    pub fn random_points(mut self, n: usize) -> Self {
        self.random_points = Some(n);
        self
    }

    /// Extra starting points; each is projected onto the sphere and always
    /// polished.
    pub fn seeds(mut self, seeds: impl IntoIterator<Item = Vec<Complex64>>) -> Self {
        let p = self.space.p();
        self.seeds.extend(seeds.into_iter().filter_map(|mut x| {
            (x.len() == self.space.dim() && normalize(p, &mut x).is_some()).then_some(x)
        }));
        self
    }

    pub(crate) fn pool(&self) -> Pool {
        let grid = (self.use_grid && self.space.sphere_dim() <= 3)
            .then(|| Grid::new(&self.space, self.cfg.grid_resolution, self.phase_invariant));
        let n_random = self
            .random_points
            .unwrap_or((16 * self.cfg.restarts).max(64));
        let mut extra = self.seeds.clone();
        extra.extend(
            sample_sphere(&self.space, n_random, self.cfg.seed)
                .into_iter()
                .map(|v| v.0),
        );
        Pool {
            n_seeds: self.seeds.len(),
            grid,
            extra,
        }
    }

    pub fn run<F>(&self, f: F) -> Result<Maximum>
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        self.cfg.validate()?;
        let pool = self.pool();
        let values = pool.evaluate(&f)?;
        let mut starts: Vec<usize> = (0..pool.n_seeds).collect();
        starts.extend(select_separated(
            &pool,
            &values,
            self.cfg.restarts,
            1e-2,
            f64::NEG_INFINITY,
            |i| i >= pool.n_seeds,
        ));

        let bad = AtomicBool::new(false);
        let guarded = |x: &[Complex64]| {
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                bad.store(true, Ordering::Relaxed);
                f64::NEG_INFINITY
            }
        };
        let polished: Vec<(Vec<Complex64>, f64)> = starts
            .par_iter()
            .map(|&i| local_ascent(&self.space, &guarded, pool.point(i), values[i], &self.cfg))
            .collect();
        if bad.load(Ordering::Relaxed) {
            // replay serially so the reported point does not depend on scheduling
            for &i in &starts {
                let hit = Mutex::new(None);
                let probe = |x: &[Complex64]| {
                    let v = f(x);
                    if v.is_finite() {
                        return v;
                    }
                    let mut h = hit.lock().expect("probe lock");
                    if h.is_none() {
                        *h = Some(x.to_vec());
                    }
                    f64::NEG_INFINITY
                };
                local_ascent(&self.space, &probe, pool.point(i), values[i], &self.cfg);
                if let Some(point) = hit.into_inner().expect("probe lock") {
                    return Err(Error::NonFiniteObjective { point });
                }
            }
        }

        let best_pool = (0..values.len())
            .max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a)))
            .expect("pool is never empty");
        let mut point = pool.point(best_pool);
        let mut value = values[best_pool];
        let mut trace = Vec::with_capacity(polished.len());
        for (restart, (x, v)) in polished.into_iter().enumerate() {
            if v > value {
                value = v;
                point = x;
            }
            trace.push(TraceEntry {
                restart,
                best: value,
            });
        }
        let (status, gap) = match &pool.grid {
            Some(g) => (
                Status::GridCertified,
                self.lipschitz.map(|l| l * g.spacing()),
            ),
            None => (Status::Heuristic, None),
        };
        Ok(Maximum {
            point: Vector(point),
            value,
            status,
            gap,
            trace,
        })
    }
}

/// Maximise `f` over the unit sphere of `space`.
pub fn maximize_on_sphere<F>(space: &SpaceDescriptor, f: F, cfg: &OptimConfig) -> Result<Maximum>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    Maximizer::new(*space, cfg).run(f)
}

pub(crate) fn norm_objective(p: &HomPoly) -> impl Fn(&[Complex64]) -> f64 + Sync + '_ {
    let q = p.codomain().p();
    move |x: &[Complex64]| lp_norm(q, &p.eval(x))
}

/// `‖P‖ = sup_{‖x‖=1} ‖P(x)‖`, as an attained lower bound.
pub fn poly_norm(p: &HomPoly, cfg: &OptimConfig) -> Result<NormEstimate> {
    let lipschitz = p.lipschitz_bound();
    let m = Maximizer::new(*p.domain(), cfg)
        .lipschitz(lipschitz)
        .phase_invariant(true)
        .run(norm_objective(p))?;
    Ok(NormEstimate {
        value: m.value,
        maximizer: m.point,
        status: m.status,
        gap: m.gap,
        lipschitz,
        trace: m.trace,
    })
}

/// `‖P‖` from caller-supplied seeds plus a coarse grid; used where many
/// nearby polynomials are normed in a row.
pub fn poly_norm_seeded(
    p: &HomPoly,
    seeds: &[Vec<Complex64>],
    cfg: &OptimConfig,
) -> Result<NormEstimate> {
    let lipschitz = p.lipschitz_bound();
    let coarse = coarse_resolution(p.domain());
    let m = Maximizer::new(*p.domain(), cfg)
        .lipschitz(lipschitz)
        .phase_invariant(true)
        .grid_resolution(cfg.grid_resolution.min(coarse))
        .random_points(32)
        .seeds(seeds.iter().cloned())
        .run(norm_objective(p))?;
    Ok(NormEstimate {
        value: m.value,
        maximizer: m.point,
        status: m.status,
        gap: m.gap,
        lipschitz,
        trace: m.trace,
    })
}

fn coarse_resolution(space: &SpaceDescriptor) -> usize {
    match space.sphere_dim() {
        0 | 1 => 256,
        2 => 64,
        _ => 16,
    }
}

/// Unit vectors with `‖Q(x)‖ ≥ 1 − eta`, deduplicated at distance `10·eta`.
///
/// Grid points that are exact maximisers are kept as they are, so
/// continuum attainment sets (for instance whole faces of an `ℓ_∞`
/// sphere) are sampled at grid density. Remaining near-maximal
/// candidates are polished to local maxima first. On complex
/// two-dimensional domains the grid covers one representative per phase
/// orbit `{c·x : |c| = 1}`, which leaves `‖Q(x)‖` unchanged.
pub fn near_maximizer_set(q: &HomPoly, eta: f64, cfg: &OptimConfig) -> Result<Vec<Vector>> {
    check_eta(eta)?;
    cfg.validate()?;
    let est = poly_norm(q, cfg)?;
    let near = near_maximizers(q, eta, cfg, &est)?;
    if !near.attained {
        return Err(Error::NoAttainment {
            estimate: est.value,
            eta,
        });
    }
    Ok(near.points.into_iter().map(Vector).collect())
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eta = {eta} must lie in (0, 1)")))
    }
}

/// Output of the near-maximiser sweep.
pub(crate) struct NearMax {
    /// Whether the estimated norm reaches `1 − eta`.
    pub attained: bool,
    /// Points with `‖Q(x)‖ ≥ 1 − eta` (empty unless `attained`).
    pub points: Vec<Vec<Complex64>>,
    /// The best separated pool points by `‖Q(x)‖`, regardless of level.
    pub top: Vec<Vec<Complex64>>,
}

pub(crate) fn near_maximizers(
    q: &HomPoly,
    eta: f64,
    cfg: &OptimConfig,
    est: &NormEstimate,
) -> Result<NearMax> {
    check_eta(eta)?;
    let domain = *q.domain();
    let reduce = domain.field() == Field::Complex && domain.dim() == 2;
    let f = norm_objective(q);
    let m = Maximizer::new(domain, cfg)
        .phase_invariant(reduce)
        .seeds([est.maximizer.0.clone()]);
    let pool = m.pool();
    let values = pool.evaluate(&f)?;
    let top = select_separated(&pool, &values, 128, 1e-3, f64::NEG_INFINITY, |_| true)
        .into_iter()
        .map(|i| pool.point(i))
        .collect();
    let attained = est.value >= 1.0 - eta;
    if !attained {
        return Ok(NearMax {
            attained,
            points: Vec::new(),
            top,
        });
    }

    let exact: Vec<usize> = (0..pool.len())
        .filter(|&i| values[i] >= 1.0 - EXACT_SLACK)
        .collect();
    let starts = select_separated(&pool, &values, 256, 1e-2, 1.0 - 0.05, |i| {
        values[i] < 1.0 - EXACT_SLACK
    });
    let polished: Vec<(Vec<Complex64>, f64)> = starts
        .par_iter()
        .map(|&i| local_ascent(&domain, &f, pool.point(i), values[i], cfg))
        .collect();

    let mut dedup = Dedup::new(10.0 * eta, domain.field());
    let mut points = Vec::new();
    for i in exact {
        let x = pool.point(i);
        if dedup.insert(&x) {
            points.push(x);
        }
    }
    for (x, v) in polished {
        if v >= 1.0 - eta && dedup.insert(&x) {
            points.push(x);
        }
    }
    Ok(NearMax {
        attained,
        points,
        top,
    })
}

/// Candidate points: caller seeds, an optional grid, then random samples.
pub(crate) struct Pool {
    n_seeds: usize,
    grid: Option<Grid>,
    extra: Vec<Vec<Complex64>>,
}

impl Pool {
    pub(crate) fn len(&self) -> usize {
        self.extra.len() + self.grid.as_ref().map_or(0, Grid::len)
    }

    /// Seeds first, then grid points, then random points.
    pub(crate) fn point(&self, i: usize) -> Vec<Complex64> {
        if i < self.n_seeds {
            return self.extra[i].clone();
        }
        let g = self.grid.as_ref().map_or(0, Grid::len);
        if i < self.n_seeds + g {
            return self.grid.as_ref().expect("index inside grid").point(i - self.n_seeds);
        }
        self.extra[i - g].clone()
    }

    pub(crate) fn evaluate<F>(&self, f: &F) -> Result<Vec<f64>>
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        let values: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| f(&self.point(i)))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObjective {
                point: self.point(i),
            });
        }
        Ok(values)
    }
}

/// Indices of the best candidates (values above `floor`, passing `keep`),
/// greedily accepted in decreasing value order when at least `sep` away
/// (max-norm over real coordinates) from all previously accepted ones.
pub(crate) fn select_separated(
    pool: &Pool,
    values: &[f64],
    count: usize,
    sep: f64,
    floor: f64,
    keep: impl Fn(usize) -> bool,
) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] >= floor && keep(i))
        .collect();
    let by_value = |a: &usize, b: &usize| values[*b].total_cmp(&values[*a]).then(a.cmp(b));
    let shortlist = (64 * count).max(1024);
    if idx.len() > shortlist {
        idx.select_nth_unstable_by(shortlist, by_value);
        idx.truncate(shortlist);
    }
    idx.sort_by(by_value);
    let mut chosen: Vec<(usize, Vec<Complex64>)> = Vec::with_capacity(count);
    for i in idx {
        if chosen.len() == count {
            break;
        }
        let x = pool.point(i);
        if chosen.iter().all(|(_, y)| max_dist(&x, y) >= sep) {
            chosen.push((i, x));
        }
    }
    chosen.into_iter().map(|(i, _)| i).collect()
}

fn max_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.re - y.re).abs().max((x.im - y.im).abs()))
        .fold(0.0, f64::max)
}

/// Approximate-radius deduplication through a uniform cell hash.
pub(crate) struct Dedup {
    r: f64,
    complex: bool,
    cells: HashMap<Vec<i64>, Vec<Vec<f64>>>,
}

impl Dedup {
    pub(crate) fn new(r: f64, field: Field) -> Self {
        Dedup {
            r,
            complex: field == Field::Complex,
            cells: HashMap::new(),
        }
    }

    /// Returns `false` when a stored point lies within `r`.
    pub(crate) fn insert(&mut self, x: &[Complex64]) -> bool {
        let coords = to_real(x, self.complex);
        let cell: Vec<i64> = coords.iter().map(|c| (c / self.r).floor() as i64).collect();
        let d = cell.len();
        let n_neighbours = 3usize.pow(d as u32);
        let mut key = cell.clone();
        for code in 0..n_neighbours {
            let mut c = code;
            for j in 0..d {
                key[j] = cell[j] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(pts) = self.cells.get(&key) {
                let near = pts.iter().any(|p| {
                    p.iter()
                        .zip(&coords)
                        .all(|(a, b)| (a - b).abs() < self.r)
                });
                if near {
                    return false;
                }
            }
        }
        self.cells.entry(cell).or_default().push(coords);
        true
    }
}

pub(crate) fn to_real(x: &[Complex64], complex: bool) -> Vec<f64> {
    if complex {
        x.iter().flat_map(|z| [z.re, z.im]).collect()
    } else {
        x.iter().map(|z| z.re).collect()
    }
}

pub(crate) fn from_real(r: &[f64], complex: bool) -> Vec<Complex64> {
    if complex {
        r.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
    } else {
        r.iter().map(|&a| Complex64::new(a, 0.0)).collect()
    }
}

/// Local ascent from `x0`: finite-difference gradient steps, then a
/// Hooke–Jeeves pattern search down to step `cfg.tol`. Non-finite
/// objective values are treated as rejections.
pub(crate) fn local_ascent(
    space: &SpaceDescriptor,
    f: &(dyn Fn(&[Complex64]) -> f64 + Sync),
    x0: Vec<Complex64>,
    f0: f64,
    cfg: &OptimConfig,
) -> (Vec<Complex64>, f64) {
    let complex = space.field() == Field::Complex;
    let p = space.p();
    let eval = |r: &[f64]| -> Option<(Vec<f64>, f64)> {
        let mut x = from_real(r, complex);
        normalize(p, &mut x)?;
        let v = f(&x);
        v.is_finite().then(|| (to_real(&x, complex), v))
    };
    let mut r = to_real(&x0, complex);
    let mut fr = if f0.is_finite() { f0 } else { f64::NEG_INFINITY };
    let d = r.len();

    let mut t = cfg.step_init;
    for _ in 0..(cfg.max_iters / 20).max(1) {
        let g = fd_gradient(&eval, &r);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(gn > 0.0 && gn.is_finite()) {
            break;
        }
        let mut improved = false;
        while t >= cfg.tol {
            let cand: Vec<f64> = r.iter().zip(&g).map(|(a, b)| a + t * b / gn).collect();
            match eval(&cand) {
                Some((rc, v)) if v > fr => {
                    r = rc;
                    fr = v;
                    t *= 2.0;
                    improved = true;
                    break;
                }
                _ => t *= 0.5,
            }
        }
        if !improved {
            break;
        }
    }

    let mut s = cfg.step_init;
    let mut iters = 0;
    while s >= cfg.tol && iters < cfg.max_iters {
        iters += 1;
        let base = r.clone();
        let mut moved = false;
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let mut cand = r.clone();
                cand[j] += sign * s;
                if let Some((rc, v)) = eval(&cand) {
                    if v > fr {
                        r = rc;
                        fr = v;
                        moved = true;
                        break;
                    }
                }
            }
        }
        if complex {
            // phase rotations keep every modulus, so they move along the
            // tori where coordinate steps leave the sphere
            for j in 0..d / 2 {
                for sign in [1.0, -1.0] {
                    let (sn, cs) = (sign * s).sin_cos();
                    let mut cand = r.clone();
                    let (a, b) = (r[2 * j], r[2 * j + 1]);
                    cand[2 * j] = a * cs - b * sn;
                    cand[2 * j + 1] = a * sn + b * cs;
                    if let Some((rc, v)) = eval(&cand) {
                        if v > fr {
                            r = rc;
                            fr = v;
                            moved = true;
                            break;
                        }
                    }
                }
            }
        }
        if moved {
            // pattern move along the accumulated displacement
            let cand: Vec<f64> = r.iter().zip(&base).map(|(a, b)| 2.0 * a - b).collect();
            if let Some((rc, v)) = eval(&cand) {
                if v > fr {
                    r = rc;
                    fr = v;
                }
            }
        } else {
            s *= 0.5;
        }
    }
    (from_real(&r, complex), fr)
}

type SphereEval<'a> = dyn Fn(&[f64]) -> Option<(Vec<f64>, f64)> + 'a;

fn fd_gradient(eval: &SphereEval<'_>, r: &[f64]) -> Vec<f64> {
    let scale = r.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let h = 1e-6 * scale;
    let mut g = vec![0.0; r.len()];
    let mut probe = r.to_vec();
    for j in 0..r.len() {
        probe[j] = r[j] + h;
        let up = eval(&probe).map(|(_, v)| v);
        probe[j] = r[j] - h;
        let down = eval(&probe).map(|(_, v)| v);
        probe[j] = r[j];
        g[j] = match (up, down) {
            (Some(a), Some(b)) => (a - b) / (2.0 * h),
            _ => 0.0,
        };
    }
    g
}

/// Parametric grids on low-dimensional spheres.
///
/// Real spheres are covered through the faces of the cube `‖x‖_∞ = 1`
/// projected radially; complex ones through the faces `|z_a| = 1` of the
/// polydisc with polar coordinates on the free coordinate.
pub(crate) enum Grid {
    Points(Vec<Vec<Complex64>>),
    RealFaces {
        p: Exponent,
        n: usize,
        m: usize,
        faces: Vec<(usize, f64)>,
    },
    Circle {
        m: usize,
    },
    ComplexFaces {
        p: Exponent,
        mr: usize,
        mphi: usize,
        mrot: usize,
    },
}

fn axis_points(res: usize, d: usize) -> usize {
    if d <= 1 {
        return res;
    }
    let cap = 2f64.powf(GRID_BUDGET_LOG2 / d as f64).floor() as usize;
    res.min(cap)
}

impl Grid {
    pub(crate) fn new(space: &SpaceDescriptor, res: usize, invariant: bool) -> Grid {
        let n = space.dim();
        let one = Complex64::new(1.0, 0.0);
        match space.field() {
            Field::Real if n == 1 => {
                if invariant {
                    Grid::Points(vec![vec![one]])
                } else {
                    Grid::Points(vec![vec![one], vec![-one]])
                }
            }
            Field::Real => {
                let signs: &[f64] = if invariant { &[1.0] } else { &[1.0, -1.0] };
                let faces = (0..n)
                    .flat_map(|a| signs.iter().map(move |&s| (a, s)))
                    .collect();
                Grid::RealFaces {
                    p: space.p(),
                    n,
                    // odd counts keep the face centre (and the axes) on the grid
                    m: axis_points(res, n - 1) + 1,
                    faces,
                }
            }
            Field::Complex if n == 1 => {
                if invariant {
                    Grid::Points(vec![vec![one]])
                } else {
                    Grid::Circle { m: res }
                }
            }
            Field::Complex => {
                let d = if invariant { 2 } else { 3 };
                let m = axis_points(res, d);
                Grid::ComplexFaces {
                    p: space.p(),
                    mr: m + 1,
                    mphi: m,
                    mrot: if invariant { 1 } else { m },
                }
            }
        }
    }

    pub(crate) fn len(&self) -> usize {
        match self {
            Grid::Points(v) => v.len(),
            Grid::RealFaces { n, m, faces, .. } => faces.len() * m.pow(*n as u32 - 1),
            Grid::Circle { m } => *m,
            Grid::ComplexFaces { mr, mphi, mrot, .. } => 2 * mr * mphi * mrot,
        }
    }

    pub(crate) fn point(&self, mut i: usize) -> Vec<Complex64> {
        match self {
            Grid::Points(v) => v[i].clone(),
            Grid::RealFaces { p, n, m, faces } => {
                let per_face = m.pow(*n as u32 - 1);
                let (a, s) = faces[i / per_face];
                i %= per_face;
                let mut x = vec![Complex64::new(0.0, 0.0); *n];
                for (j, xj) in x.iter_mut().enumerate() {
                    if j == a {
                        *xj = Complex64::new(s, 0.0);
                    } else {
                        let t = -1.0 + 2.0 * (i % m) as f64 / (*m - 1) as f64;
                        *xj = Complex64::new(t, 0.0);
                        i /= m;
                    }
                }
                normalize(*p, &mut x).expect("face points are non-zero");
                x
            }
            Grid::Circle { m } => {
                let phi = std::f64::consts::TAU * i as f64 / *m as f64;
                vec![Complex64::from_polar(1.0, phi)]
            }
            Grid::ComplexFaces { p, mr, mphi, mrot } => {
                let per_face = mr * mphi * mrot;
                let a = i / per_face;
                i %= per_face;
                let r = (i % mr) as f64 / (*mr - 1) as f64;
                i /= mr;
                let phi = std::f64::consts::TAU * (i % mphi) as f64 / *mphi as f64;
                i /= mphi;
                let psi = std::f64::consts::TAU * i as f64 / *mrot as f64;
                let fixed = Complex64::from_polar(1.0, psi);
                let free = Complex64::from_polar(r, phi + psi);
                let mut x = if a == 0 {
                    vec![fixed, free]
                } else {
                    vec![free, fixed]
                };
                normalize(*p, &mut x).expect("face points are non-zero");
                x
            }
        }
    }

    /// Bound on the distance from any sphere point (or, for reduced grids,
    /// its orbit) to the nearest grid point.
    pub(crate) fn spacing(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Grid::Points(_) => 0.0,
            Grid::RealFaces { n, m, .. } => 2.0 * *n as f64 / (*m - 1) as f64,
            Grid::Circle { m } => PI / *m as f64,
            Grid::ComplexFaces { mr, mphi, mrot, .. } => {
                let rot = if *mrot > 1 { PI / *mrot as f64 } else { 0.0 };
                4.0 * (0.5 / (*mr - 1) as f64 + PI / *mphi as f64 + rot)
            }
        }
    }
}
