//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use polyrad::cases::{
    diagonal_power, embed_first, l1_half_radius_poly, linf_cubic_poly, linf_sum_pair,
    lpsq_degrees, random_unit_poly, swapped_power, LPSQ_EXPONENTS,
};
use polyrad::index::{index_upper_bound, index_upper_bound_with, op_numerical_radius};
use polyrad::optim::{poly_norm, Status};
use polyrad::poly::{compose_linear, direct_sum, HomPoly, LinOp, SumKind, SumRecipe, Term};
use polyrad::range::{RadiusConfig, RadiusEngine};
use polyrad::spaces::{Field, SpaceDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPONENTS: [f64; 3] = [1.0, 2.0, f64::INFINITY];

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Check {
            pass: true,
            detail: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl AsRef<str>) {
        if !ok {
            self.pass = false;
        }
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
        if !ok {
            self.detail.push_str(" [violated]");
        }
    }
}

fn cfg() -> RadiusConfig {
    RadiusConfig::default()
}

fn random_space(rng: &mut ChaCha8Rng, field: Field) -> SpaceDescriptor {
    let p = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
    SpaceDescriptor::new(field, p, 2).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng) -> Field {
    if rng.random_bool(0.5) {
        Field::Real
    } else {
        Field::Complex
    }
}

fn random_op(space: SpaceDescriptor, rng: &mut ChaCha8Rng) -> LinOp {
    let n = space.dim();
    let complex = space.field() == Field::Complex;
    let m = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re = rng.random_range(-1.0..1.0);
                    let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    LinOp::new(m, space).unwrap()
}

fn scalar_index() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_v, mut worst_idx): (f64, f64) = (0.0, 0.0);
    for field in [Field::Real, Field::Complex] {
        let s = SpaceDescriptor::new(field, 2.0, 1).unwrap();
        for k in 1..=6 {
            let q = HomPoly::new(k, s, s, vec![Term::real(0, &[k], 1.0)]).unwrap();
            let engine = RadiusEngine::new(&q, &cfg).unwrap();
            for _ in 0..100 {
                let p = random_unit_poly(k, s, s, &mut rng, &cfg).unwrap();
                worst_v = worst_v.max((engine.attainment(&p).unwrap().value - 1.0).abs());
            }
            let idx = index_upper_bound(&q, 10, k as u64, &cfg).unwrap();
            worst_idx = worst_idx.max((idx.upper_bound - 1.0).abs());
        }
    }
    c.require(worst_v <= 1e-9, format!("max |v - 1| = {worst_v:.2e} (tol 1e-9)"));
    c.require(worst_idx <= 1e-9, format!("max |index bound - 1| = {worst_idx:.2e} (tol 1e-9)"));
    c
}

fn l1_square() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let q = diagonal_power(Field::Real, 1.0, 2, 2).unwrap();
    let p = l1_half_radius_poly();
    let norm = poly_norm(&p, &cfg.optim).unwrap();
    c.require(
        (norm.value - 1.0).abs() <= 1e-6 && norm.status == Status::GridCertified,
        format!("|P| = {:.12} ({:?})", norm.value, norm.status),
    );
    let engine = RadiusEngine::new(&q, &cfg).unwrap();
    let a = engine.attainment(&p).unwrap().value;
    c.require((a - 0.5).abs() <= 1e-9, format!("attainment = {a:.12}"));
    let l = engine.limit(&p).unwrap().value;
    c.require((l - 0.5).abs() <= 5e-3, format!("limit = {l:.9}"));
    let idx = index_upper_bound_with(&q, &[("l1_half_radius".into(), p)], 10, 2, &cfg).unwrap();
    c.require(
        idx.upper_bound <= 0.5 + 1e-6,
        format!("index bound = {:.12}", idx.upper_bound),
    );
    c
}

fn lp_square() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    for p in LPSQ_EXPONENTS {
        for k in lpsq_degrees(p) {
            let q = diagonal_power(Field::Real, p, 2, k).unwrap();
            let swap = swapped_power(Field::Real, p, k).unwrap();
            let n = poly_norm(&swap, &cfg.optim).unwrap().value;
            let engine = RadiusEngine::new(&q, &cfg).unwrap();
            let v = engine.numerical_radius(&swap).unwrap().value;
            let idx = index_upper_bound(&q, 2, 3, &cfg).unwrap().upper_bound;
            c.require(
                (n - 1.0).abs() <= 1e-6 && v <= 1e-6 && idx <= 1e-6,
                format!("p={p} k={k}: |P|={n:.9} v={v:.1e} index<={idx:.1e}"),
            );
        }
    }
    c
}

fn linf_cubic() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let q = diagonal_power(Field::Real, f64::INFINITY, 2, 3).unwrap();
    let p = linf_cubic_poly();
    let engine = RadiusEngine::new(&q, &cfg).unwrap();
    let est = engine.numerical_radius(&p).unwrap();
    let exact = 2.0 / (3.0 * 3f64.sqrt());
    c.require(
        (est.value - exact).abs() <= 1e-6,
        format!("v = {:.12} (exact {exact:.12})", est.value),
    );
    let x = &est.witness.as_ref().unwrap().x.0;
    let ok = (x[0].norm() - 1.0).abs() <= 1e-4 && (x[1].norm() - 1.0 / 3f64.sqrt()).abs() <= 1e-4;
    c.require(ok, format!("witness = ({:.6}, {:.6})", x[0].re, x[1].re));
    c
}

fn composition_bound() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut violations, mut worst) = (0, f64::NEG_INFINITY);
    // 40 norm-one Q, each paired with 5 operators on its codomain
    for _ in 0..40 {
        let field = random_field(&mut rng);
        let x = random_space(&mut rng, field);
        let y = random_space(&mut rng, field);
        let k = rng.random_range(2..=3);
        let q = random_unit_poly(k, x, y, &mut rng, &cfg).unwrap();
        let engine = RadiusEngine::new(&q, &cfg).unwrap();
        for _ in 0..5 {
            let t = random_op(y, &mut rng);
            let tq = compose_linear(&t, &q).unwrap();
            let lhs = engine.numerical_radius(&tq).unwrap().value;
            let rhs = op_numerical_radius(&t, &cfg.optim).unwrap();
            worst = worst.max(lhs - rhs);
            if lhs > rhs + 1e-6 {
                violations += 1;
            }
        }
    }
    c.require(
        violations == 0,
        format!("200 pairs, {violations} violations, max v_Q(TQ) - v(T) = {worst:.2e}"),
    );
    c
}

fn estimator_agreement() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_limit, mut worst_ladder): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let field = random_field(&mut rng);
        let x = random_space(&mut rng, field);
        let y = random_space(&mut rng, field);
        let k = rng.random_range(2..=3);
        let q = random_unit_poly(k, x, y, &mut rng, &cfg).unwrap();
        let p = random_unit_poly(k, x, y, &mut rng, &cfg).unwrap();
        let engine = RadiusEngine::new(&q, &cfg).unwrap();
        let a = engine.attainment(&p).unwrap().value;
        let l = engine.limit(&p).unwrap().value;
        let d = engine.v_delta(&p, 1e-6).unwrap().value;
        worst_limit = worst_limit.max((a - l).abs());
        worst_ladder = worst_ladder.max((a - d).abs());
    }
    c.require(worst_limit <= 5e-3, format!("max |attain - limit| = {worst_limit:.2e}"));
    c.require(worst_ladder <= 5e-3, format!("max |attain - ladder(1e-6)| = {worst_ladder:.2e}"));
    c
}

fn rotation_codomain() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let e2 = SpaceDescriptor::real(2.0, 2).unwrap();
    let rot = LinOp::rotation(e2, 0, 1, std::f64::consts::FRAC_PI_2).unwrap();
    let v = op_numerical_radius(&rot, &cfg.optim).unwrap();
    c.require(v <= 1e-9, format!("v(quarter turn) = {v:.1e}"));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let x = SpaceDescriptor::real(EXPONENTS[i % 3], 2).unwrap();
        let q = random_unit_poly(2 + (i as u32 % 2), x, e2, &mut rng, &cfg).unwrap();
        worst = worst.max(index_upper_bound(&q, 0, 0, &cfg).unwrap().upper_bound);
    }
    c.require(worst <= 1e-3, format!("max index bound over 10 Q = {worst:.1e}"));
    c
}

fn direct_sums() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let (q1, q) = linf_sum_pair(&mut rng, &cfg).unwrap();
        let sum_engine = RadiusEngine::new(&q, &cfg).unwrap();
        let part_engine = RadiusEngine::new(&q1, &cfg).unwrap();
        for _ in 0..5 {
            let r = random_unit_poly(2, *q1.domain(), *q1.codomain(), &mut rng, &cfg).unwrap();
            let embedded = sum_engine.numerical_radius(&embed_first(&r, &q).unwrap()).unwrap();
            let component = part_engine.numerical_radius(&r).unwrap();
            worst = worst.max((embedded.value - component.value).abs());
        }
    }
    c.require(worst <= 5e-3, format!("20 R: max |embedded - component| = {worst:.2e}"));

    let mut worst_norm: f64 = 0.0;
    for (i, kind) in [SumKind::EllInf, SumKind::Ell1, SumKind::EllP(2.0)].into_iter().enumerate() {
        let p = kind.exponent();
        let field = if i == 2 { Field::Complex } else { Field::Real };
        let blocks: Vec<HomPoly> = [1, 2]
            .into_iter()
            .map(|n| {
                let s = SpaceDescriptor::new(field, p, n).unwrap();
                random_unit_poly(2, s, s, &mut rng, &cfg).unwrap()
            })
            .collect();
        let sum = direct_sum(&SumRecipe {
            kind,
            summands: blocks,
        })
        .unwrap();
        let n = poly_norm(&sum, &cfg.optim).unwrap().value;
        worst_norm = worst_norm.max((n - 1.0).abs());
    }
    c.require(worst_norm <= 1e-6, format!("direct sums: max ||sum| - 1| = {worst_norm:.1e}"));
    c
}

fn invariants() -> Check {
    let cfg = cfg();
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut homog, mut mono, mut self_v, mut below_norm): (f64, f64, f64, f64) =
        (0.0, f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY);
    // 20 Q with 5 P each: 100 instances per property
    for _ in 0..20 {
        let field = random_field(&mut rng);
        let x = random_space(&mut rng, field);
        let y = random_space(&mut rng, field);
        let k = rng.random_range(2..=3);
        let q = random_unit_poly(k, x, y, &mut rng, &cfg).unwrap();
        let engine = RadiusEngine::new(&q, &cfg).unwrap();
        for _ in 0..5 {
            let p = random_poly_scaled(&q, &mut rng, &cfg);
            let v = engine.numerical_radius(&p).unwrap();
            let coeff = match field {
                Field::Real => Complex64::new(rng.random_range(-3.0..3.0), 0.0),
                Field::Complex => Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
            };
            let vc = engine.numerical_radius(&p.scale(coeff).unwrap()).unwrap().value;
            homog = homog.max((vc - coeff.norm() * v.value).abs());
            for w in v.ladder.windows(2) {
                // ladder is listed from the largest δ down
                mono = mono.max(w[1].value - w[0].value);
            }
            let n = poly_norm(&p, &cfg.optim).unwrap().value;
            below_norm = below_norm.max(v.value - n);
            let vq = engine.attainment(&q).unwrap().value;
            self_v = self_v.max((vq - 1.0).abs());
        }
    }
    c.require(homog <= 1e-9, format!("homogeneity {homog:.1e}"));
    c.require(mono <= 1e-9, format!("delta-monotonicity {mono:.1e}"));
    c.require(self_v <= 1e-9, format!("|v_Q(Q) - 1| {self_v:.1e}"));
    c.require(below_norm <= 1e-6, format!("v - |P| {below_norm:.1e}"));
    c
}

/// A random polynomial with norm between 0.5 and 2.
fn random_poly_scaled(q: &HomPoly, rng: &mut ChaCha8Rng, cfg: &RadiusConfig) -> HomPoly {
    let p = random_unit_poly(q.degree(), *q.domain(), *q.codomain(), rng, cfg).unwrap();
    p.scale_real(rng.random_range(0.5..2.0))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check, Option<f64>);
    let criteria: [Criterion; 9] = [
        ("scalar index is one", scalar_index, Some(5.0)),
        ("l1^2 quadratic example", l1_square, Some(30.0)),
        ("lp^2 swapped powers have radius zero", lp_square, Some(60.0)),
        ("real linf^2 cubic example", linf_cubic, Some(30.0)),
        ("v_Q(T o Q) <= v(T)", composition_bound, None),
        ("estimator agreement", estimator_agreement, None),
        ("rotation codomain", rotation_codomain, None),
        ("direct-sum mechanism", direct_sums, None),
        ("property invariants", invariants, None),
    ];
    let mut failed = 0;
    for (i, (title, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut check = run();
        let secs = start.elapsed().as_secs_f64();
        if let Some(limit) = budget {
            check.require(secs < *limit, format!("runtime {secs:.1}s (limit {limit}s)"));
        } else {
            check.require(true, format!("runtime {secs:.1}s"));
        }
        let tag = if check.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {tag} {title}: {}", i + 1, check.detail);
        if !check.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
