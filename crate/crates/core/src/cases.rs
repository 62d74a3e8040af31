//! Catalogue of worked examples with known answers.
//!
//! Each case declares its quantities up front, with the expected value,
//! tolerance and where the value comes from. [`run_case`] computes the
//! quantities and compares.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::index::{
    index_upper_bound, index_upper_bound_with, op_numerical_radius, operator_bound,
    spear_margin_for,
};
use crate::optim::{poly_norm, Status};
use crate::poly::{direct_sum, random_poly, HomPoly, LinOp, SumKind, SumRecipe, Term};
use crate::range::{RadiusConfig, RadiusEngine};
use crate::spaces::{Field, SpaceDescriptor};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated and proved in the literature for this example.
    Literature,
    /// Immediate from the definitions.
    Elementary,
    /// Checked by an independent brute-force computation.
    Oracle,
}

/// `num / (den · √root)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exact {
    pub num: i64,
    pub den: i64,
    pub root: u32,
}

impl Exact {
    pub const ZERO: Exact = Exact::ratio(0, 1);
    pub const ONE: Exact = Exact::ratio(1, 1);

    pub const fn ratio(num: i64, den: i64) -> Exact {
        Exact { num, den, root: 1 }
    }

    pub const fn over_root(num: i64, den: i64, root: u32) -> Exact {
        Exact { num, den, root }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / (self.den as f64 * (self.root as f64).sqrt())
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.den, self.root) {
            (1, 1) => write!(f, "{}", self.num),
            (d, 1) => write!(f, "{}/{}", self.num, d),
            (1, r) => write!(f, "{}/sqrt({})", self.num, r),
            (d, r) => write!(f, "{}/({}*sqrt({}))", self.num, d, r),
        }
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    /// `|computed − value| ≤ tolerance`.
    Near { value: Exact, tolerance: f64 },
    /// `computed ≤ bound + tolerance`.
    AtMost { bound: Exact, tolerance: f64 },
}

impl Expected {
    pub fn accepts(&self, computed: f64) -> bool {
        match *self {
            Expected::Near { value, tolerance } => (computed - value.value()).abs() <= tolerance,
            Expected::AtMost { bound, tolerance } => computed <= bound.value() + tolerance,
        }
    }

    fn near(value: Exact, tolerance: f64) -> Expected {
        Expected::Near { value, tolerance }
    }

    fn at_most(bound: Exact, tolerance: f64) -> Expected {
        Expected::AtMost { bound, tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Declared {
    pub quantity: String,
    pub expected: Expected,
    pub provenance: Provenance,
}

fn declare(quantity: impl Into<String>, expected: Expected, provenance: Provenance) -> Declared {
    Declared {
        quantity: quantity.into(),
        expected,
        provenance,
    }
}

type Runner = fn(&RadiusConfig) -> Result<Vec<f64>>;

#[derive(Clone)]
pub struct CaseSpec {
    pub name: &'static str,
    pub summary: &'static str,
    /// Smallest grid resolution the case is run with.
    pub grid_resolution: usize,
    pub declared: Vec<Declared>,
    run: Runner,
}

impl fmt::Debug for CaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CaseSpec")
            .field("name", &self.name)
            .field("declared", &self.declared)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantityReport {
    pub quantity: String,
    pub computed: f64,
    pub expected: Expected,
    pub expected_value: f64,
    pub provenance: Provenance,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub pass: bool,
    pub quantities: Vec<QuantityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl CaseReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const SCALAR_DEGREES: [u32; 6] = [1, 2, 3, 4, 5, 6];
pub const LPSQ_EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];
const SCALAR_TRIALS: usize = 100;

/// `x ↦ (x_1^k, …, x_n^k)` on `ℓ_p^n`.
pub fn diagonal_power(field: Field, p: f64, n: usize, k: u32) -> Result<HomPoly> {
    let s = SpaceDescriptor::new(field, p, n)?;
    let terms = (0..n)
        .map(|i| {
            let mut alpha = vec![0; n];
            alpha[i] = k;
            Term::real(i, &alpha, 1.0)
        })
        .collect();
    HomPoly::new(k, s, s, terms)
}

/// `(x_1, x_2) ↦ (x_2^k, x_1^k)` on `ℓ_p^2`.
pub fn swapped_power(field: Field, p: f64, k: u32) -> Result<HomPoly> {
    let s = SpaceDescriptor::new(field, p, 2)?;
    HomPoly::new(
        k,
        s,
        s,
        vec![Term::real(0, &[0, k], 1.0), Term::real(1, &[k, 0], 1.0)],
    )
}

/// `(x_1²/2 + 2x_1x_2, −x_2²/2 − x_1x_2)` on real `ℓ_1^2`: norm one,
/// radius 1/2 relative to the diagonal squares.
pub fn l1_half_radius_poly() -> HomPoly {
    let s = SpaceDescriptor::real(1.0, 2).expect("valid space");
    HomPoly::new(
        2,
        s,
        s,
        vec![
            Term::real(0, &[2, 0], 0.5),
            Term::real(0, &[1, 1], 2.0),
            Term::real(1, &[0, 2], -0.5),
            Term::real(1, &[1, 1], -1.0),
        ],
    )
    .expect("valid polynomial")
}

/// `(x_1²x_2 − x_2³, 0)` on real `ℓ_∞^2`: norm one, radius `2/(3√3)`
/// relative to the diagonal cubes.
pub fn linf_cubic_poly() -> HomPoly {
    let s = SpaceDescriptor::real(f64::INFINITY, 2).expect("valid space");
    HomPoly::new(
        3,
        s,
        s,
        vec![Term::real(0, &[2, 1], 1.0), Term::real(0, &[0, 3], -1.0)],
    )
    .expect("valid polynomial")
}

/// A random polynomial divided by its estimated norm.
pub fn random_unit_poly(
    degree: u32,
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
    rng: &mut ChaCha8Rng,
    cfg: &RadiusConfig,
) -> Result<HomPoly> {
    loop {
        let p = random_poly(degree, domain, codomain, rng)?;
        let n = poly_norm(&p, &cfg.optim)?.value;
        if n > 1e-6 {
            return Ok(p.scale_real(1.0 / n));
        }
    }
}

fn fields() -> [Field; 2] {
    [Field::Real, Field::Complex]
}

fn field_name(f: Field) -> &'static str {
    match f {
        Field::Real => "real",
        Field::Complex => "complex",
    }
}

pub fn case_catalog() -> Vec<CaseSpec> {
    use Provenance::*;
    let mut scalar = Vec::new();
    for f in fields() {
        for k in SCALAR_DEGREES {
            let tag = format!("{}, k = {k}", field_name(f));
            scalar.push(declare(
                format!("max |radius − 1| over {SCALAR_TRIALS} random unit P ({tag})"),
                Expected::near(Exact::ZERO, 1e-9),
                Literature,
            ));
            scalar.push(declare(
                format!("index upper bound ({tag})"),
                Expected::near(Exact::ONE, 1e-9),
                Literature,
            ));
        }
    }

    let mut lpsq = Vec::new();
    for p in LPSQ_EXPONENTS {
        for k in lpsq_degrees(p) {
            let tag = format!("p = {p}, k = {k}");
            lpsq.push(declare(format!("norm of swapped powers ({tag})"), Expected::near(Exact::ONE, 1e-6), Literature));
            lpsq.push(declare(format!("numerical radius of swapped powers ({tag})"), Expected::at_most(Exact::ZERO, 1e-6), Literature));
            lpsq.push(declare(format!("index upper bound ({tag})"), Expected::at_most(Exact::ZERO, 1e-6), Literature));
        }
    }

    let two_over_three_root_three = Exact::over_root(2, 3, 3);
    vec![
        CaseSpec {
            name: "scalar_k",
            summary: "Q(a) = a^k on the scalar field: every unit P has radius 1",
            grid_resolution: 4096,
            declared: scalar,
            run: run_scalar,
        },
        CaseSpec {
            name: "l1sq_k2",
            summary: "diagonal squares on real l1^2 with a norm-one P of radius 1/2",
            grid_resolution: 4096,
            declared: vec![
                declare("norm of P", Expected::near(Exact::ONE, 1e-6), Literature),
                declare("norm of P is grid-certified", Expected::near(Exact::ONE, 0.0), Elementary),
                declare("attainment radius", Expected::near(Exact::ratio(1, 2), 1e-9), Literature),
                declare("numerical radius", Expected::near(Exact::ratio(1, 2), 1e-6), Literature),
                declare("limit-formula radius", Expected::near(Exact::ratio(1, 2), 5e-3), Literature),
                declare("index upper bound", Expected::at_most(Exact::ratio(1, 2), 1e-6), Literature),
                declare("spear margin of P at lambda = 3/4", Expected::at_most(Exact::ZERO, 0.0), Oracle),
            ],
            run: run_l1sq,
        },
        CaseSpec {
            name: "lpsq_k_ge_p",
            summary: "diagonal k-th powers on real lp^2 with k >= p: the coordinate swap has radius 0",
            grid_resolution: 4096,
            declared: lpsq,
            run: run_lpsq,
        },
        CaseSpec {
            name: "linf_sq_k3_real",
            summary: "diagonal cubes on real linf^2 with a norm-one P of radius 2/(3 sqrt 3)",
            grid_resolution: 4096,
            declared: vec![
                declare("norm of P", Expected::near(Exact::ONE, 1e-6), Literature),
                declare("numerical radius", Expected::near(two_over_three_root_three, 1e-6), Literature),
                declare("witness |x_1|", Expected::near(Exact::ONE, 1e-4), Literature),
                declare("witness x_2", Expected::near(Exact::over_root(1, 1, 3), 1e-4), Literature),
                declare("index upper bound", Expected::at_most(two_over_three_root_three, 1e-6), Literature),
            ],
            run: run_linf_cubic,
        },
        CaseSpec {
            name: "rotation_codomain",
            summary: "a quarter turn of Euclidean R^2 has numerical radius 0, forcing index 0",
            grid_resolution: 4096,
            declared: vec![
                declare("numerical radius of the quarter turn", Expected::at_most(Exact::ZERO, 1e-9), Oracle),
                declare("operator bound for diagonal squares on l2^2", Expected::at_most(Exact::ZERO, 1e-6), Literature),
                declare("max index upper bound over 10 random Q", Expected::at_most(Exact::ZERO, 1e-3), Literature),
            ],
            run: run_rotation,
        },
        CaseSpec {
            name: "linf_sum_embedding",
            summary: "P(x, w) = (R(x), 0) on an linf sum has the radius of R on its summand",
            grid_resolution: 4096,
            declared: vec![
                declare("norm of the direct sum", Expected::near(Exact::ONE, 1e-6), Elementary),
                declare("max |embedded − component radius| over 5 random R", Expected::near(Exact::ZERO, 5e-3), Literature),
            ],
            run: run_linf_sum,
        },
    ]
}

pub fn lpsq_degrees(p: f64) -> [u32; 2] {
    let k = p.ceil() as u32;
    [k, k + 1]
}

/// Runs a catalogue case. `wall_time_s` is always filled in; callers
/// decide whether to keep it.
pub fn run_case(name: &str, cfg: &RadiusConfig) -> Result<CaseReport> {
    let case = case_catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownCase(name.to_string()))?;
    let mut cfg = cfg.clone();
    cfg.optim.grid_resolution = cfg.optim.grid_resolution.max(case.grid_resolution);
    cfg.validate()?;
    let start = Instant::now();
    let computed = (case.run)(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    debug_assert_eq!(computed.len(), case.declared.len());
    let quantities: Vec<QuantityReport> = case
        .declared
        .into_iter()
        .zip(computed)
        .map(|(d, c)| QuantityReport {
            pass: d.expected.accepts(c),
            expected_value: match d.expected {
                Expected::Near { value, .. } => value.value(),
                Expected::AtMost { bound, .. } => bound.value(),
            },
            quantity: d.quantity,
            computed: c,
            expected: d.expected,
            provenance: d.provenance,
        })
        .collect();
    Ok(CaseReport {
        name: case.name.to_string(),
        pass: quantities.iter().all(|q| q.pass),
        quantities,
        wall_time_s: Some(wall),
    })
}

fn run_scalar(cfg: &RadiusConfig) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.optim.seed);
    let mut out = Vec::new();
    for f in fields() {
        let s = SpaceDescriptor::new(f, 2.0, 1)?;
        for k in SCALAR_DEGREES {
            let q = HomPoly::new(k, s, s, vec![Term::real(0, &[k], 1.0)])?;
            let engine = RadiusEngine::new(&q, cfg)?;
            let mut worst: f64 = 0.0;
            for _ in 0..SCALAR_TRIALS {
                let p = random_unit_poly(k, s, s, &mut rng, cfg)?;
                worst = worst.max((engine.attainment(&p)?.value - 1.0).abs());
            }
            out.push(worst);
            out.push(index_upper_bound(&q, 20, cfg.optim.seed, cfg)?.upper_bound);
        }
    }
    Ok(out)
}

fn run_l1sq(cfg: &RadiusConfig) -> Result<Vec<f64>> {
    let q = diagonal_power(Field::Real, 1.0, 2, 2)?;
    let p = l1_half_radius_poly();
    let norm = poly_norm(&p, &cfg.optim)?;
    let engine = RadiusEngine::new(&q, cfg)?;
    let index = index_upper_bound_with(&q, &[("l1_half_radius".into(), p.clone())], 20, cfg.optim.seed, cfg)?;
    Ok(vec![
        norm.value,
        if norm.status == Status::GridCertified { 1.0 } else { 0.0 },
        engine.attainment(&p)?.value,
        engine.numerical_radius(&p)?.value,
        engine.limit(&p)?.value,
        index.upper_bound,
        spear_margin_for(&q, &p, 0.75, cfg)?,
    ])
}

fn run_lpsq(cfg: &RadiusConfig) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for p in LPSQ_EXPONENTS {
        for k in lpsq_degrees(p) {
            let q = diagonal_power(Field::Real, p, 2, k)?;
            let swap = swapped_power(Field::Real, p, k)?;
            let engine = RadiusEngine::new(&q, cfg)?;
            out.push(poly_norm(&swap, &cfg.optim)?.value);
            out.push(engine.numerical_radius(&swap)?.value);
            out.push(index_upper_bound(&q, 4, cfg.optim.seed, cfg)?.upper_bound);
        }
    }
    Ok(out)
}

fn run_linf_cubic(cfg: &RadiusConfig) -> Result<Vec<f64>> {
    let q = diagonal_power(Field::Real, f64::INFINITY, 2, 3)?;
    let p = linf_cubic_poly();
    let engine = RadiusEngine::new(&q, cfg)?;
    let est = engine.numerical_radius(&p)?;
    let x = &est.witness.as_ref().expect("attainment witness").x.0;
    let index = index_upper_bound_with(&q, &[("linf_cubic".into(), p.clone())], 4, cfg.optim.seed, cfg)?;
    Ok(vec![
        poly_norm(&p, &cfg.optim)?.value,
        est.value,
        x[0].norm(),
        x[1].re,
        index.upper_bound,
    ])
}

fn run_rotation(cfg: &RadiusConfig) -> Result<Vec<f64>> {
    let e2 = SpaceDescriptor::real(2.0, 2)?;
    let rot = LinOp::rotation(e2, 0, 1, std::f64::consts::FRAC_PI_2)?;
    let q = diagonal_power(Field::Real, 2.0, 2, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.optim.seed);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let p = [1.0, 2.0, f64::INFINITY][i % 3];
        let domain = SpaceDescriptor::real(p, 2)?;
        let qi = random_unit_poly(2 + (i as u32 % 2), domain, e2, &mut rng, cfg)?;
        worst = worst.max(index_upper_bound(&qi, 0, cfg.optim.seed, cfg)?.upper_bound);
    }
    Ok(vec![
        op_numerical_radius(&rot, &cfg.optim)?,
        operator_bound(&q, &rot, &cfg.optim)?,
        worst,
    ])
}

/// Two summands on `ℓ_∞`: a random norm-one quadratic on `ℓ_∞^2` and
/// `a ↦ a²` on ℝ.
pub fn linf_sum_pair(rng: &mut ChaCha8Rng, cfg: &RadiusConfig) -> Result<(HomPoly, HomPoly)> {
    let x1 = SpaceDescriptor::real(f64::INFINITY, 2)?;
    let q1 = random_unit_poly(2, x1, x1, rng, cfg)?;
    let r1 = SpaceDescriptor::real(f64::INFINITY, 1)?;
    let q2 = HomPoly::new(2, r1, r1, vec![Term::real(0, &[2], 1.0)])?;
    let q = direct_sum(&SumRecipe {
        kind: SumKind::EllInf,
        summands: vec![q1.clone(), q2],
    })?;
    Ok((q1, q))
}

/// `(x, w) ↦ (R(x), 0)` for `R` on the first summand of `sum`.
pub fn embed_first(r: &HomPoly, sum: &HomPoly) -> Result<HomPoly> {
    let n = sum.domain().dim();
    let terms = r
        .terms()
        .iter()
        .map(|t| {
            let mut alpha = t.alpha.clone();
            alpha.resize(n, 0);
            Term::new(t.out, alpha, t.coeff)
        })
        .collect();
    HomPoly::new(r.degree(), *sum.domain(), *sum.codomain(), terms)
}

fn run_linf_sum(cfg: &RadiusConfig) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.optim.seed);
    let (q1, q) = linf_sum_pair(&mut rng, cfg)?;
    let sum_engine = RadiusEngine::new(&q, cfg)?;
    let part_engine = RadiusEngine::new(&q1, cfg)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let r = random_unit_poly(2, *q1.domain(), *q1.codomain(), &mut rng, cfg)?;
        let embedded = sum_engine.numerical_radius(&embed_first(&r, &q)?)?.value;
        let component = part_engine.numerical_radius(&r)?.value;
        worst = worst.max((embedded - component).abs());
    }
    Ok(vec![sum_engine.q_norm().value, worst])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn catalog_contract() {
        let cat = case_catalog();
        assert!(cat.len() >= 5);
        assert!(cat.iter().any(|c| c.name == "l1sq_k2"));
        let mut names: Vec<_> = cat.iter().map(|c| c.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cat.len());
    }

    #[test]
    fn exact_values() {
        assert_eq!(Exact::ratio(1, 2).value(), 0.5);
        assert!((Exact::over_root(2, 3, 3).value() - 0.384_900_179_459_750_5).abs() < 1e-15);
        assert_eq!(Exact::over_root(2, 3, 3).to_string(), "2/(3*sqrt(3))");
        assert_eq!(Exact::ratio(1, 2).to_string(), "1/2");
        assert_eq!(Exact::ONE.to_string(), "1");
    }

    #[test]
    fn expectations() {
        let e = Expected::near(Exact::ratio(1, 2), 1e-9);
        assert!(e.accepts(0.5 + 5e-10));
        assert!(!e.accepts(0.5 + 2e-9));
        let e = Expected::at_most(Exact::ZERO, 1e-6);
        assert!(e.accepts(-1.0));
        assert!(!e.accepts(2e-6));
    }

    #[test]
    fn unknown_case_is_an_error() {
        assert!(matches!(
            run_case("no_such_case", &RadiusConfig::default()),
            Err(Error::UnknownCase(_))
        ));
    }

    #[test]
    fn embedding_keeps_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = RadiusConfig::default();
        let (q1, q) = linf_sum_pair(&mut rng, &cfg).unwrap();
        let e = embed_first(&q1, &q).unwrap();
        let x = [Complex64::new(0.3, 0.0), Complex64::new(-0.7, 0.0), Complex64::new(0.9, 0.0)];
        let a = e.eval(&x);
        let b = q1.eval(&x[..2]);
        assert_eq!(&a[..2], &b[..]);
        assert_eq!(a[2], Complex64::new(0.0, 0.0));
    }
}
