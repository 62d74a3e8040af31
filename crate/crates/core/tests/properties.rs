use num_complex::Complex64;
use polyrad::cases::random_unit_poly;
use polyrad::index::{index_upper_bound, index_upper_bound_with, operator_bound, spear_margin_for};
use polyrad::optim::{poly_norm, OptimConfig, Status};
use polyrad::poly::{
    compose_linear, direct_sum, multi_indices, HomPoly, LinOp, SumKind, SumRecipe, Term,
};
use polyrad::range::{numerical_radius, radius_via_limit, RadiusConfig, RadiusEngine};
use polyrad::spaces::{
    lp_norm, norm, norming_functionals, pair, sample_sphere, DualVector, Field, SpaceDescriptor,
    Vector,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

fn field_of(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

fn scalar(rng: &mut ChaCha8Rng, field: Field, range: f64) -> Complex64 {
    let re = rng.random_range(-range..range);
    let im = match field {
        Field::Real => 0.0,
        Field::Complex => rng.random_range(-range..range),
    };
    Complex64::new(re, im)
}

fn small_int(rng: &mut ChaCha8Rng, field: Field) -> Complex64 {
    let re = rng.random_range(-4..=4) as f64;
    let im = match field {
        Field::Real => 0.0,
        Field::Complex => rng.random_range(-4..=4) as f64,
    };
    Complex64::new(re, im)
}

fn vector(rng: &mut ChaCha8Rng, field: Field, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| scalar(rng, field, 2.0)).collect()
}

/// Integer coefficients, so sums and products of a few of them are exact.
fn int_poly(rng: &mut ChaCha8Rng, k: u32, x: SpaceDescriptor, y: SpaceDescriptor) -> HomPoly {
    let mut terms = Vec::new();
    for out in 0..y.dim() {
        for alpha in multi_indices(x.dim(), k) {
            terms.push(Term::new(out, alpha, small_int(rng, x.field())));
        }
    }
    HomPoly::new(k, x, y, terms).unwrap()
}

/// A random instance on two-dimensional domains and codomains with
/// `p ∈ {1, 2, ∞}`.
fn desk_pair(seed: u64, cfg: &RadiusConfig) -> (HomPoly, HomPoly) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = field_of(rng.random_bool(0.5));
    let ps = [1.0, 2.0, f64::INFINITY];
    let x = SpaceDescriptor::new(field, ps[rng.random_range(0..3)], 2).unwrap();
    let y = SpaceDescriptor::new(field, ps[rng.random_range(0..3)], 2).unwrap();
    let k = rng.random_range(2..=3);
    let q = random_unit_poly(k, x, y, &mut rng, cfg).unwrap();
    let p = random_unit_poly(k, x, y, &mut rng, cfg).unwrap();
    (q, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn holder_inequality(seed: u64, pi in 0..EXPONENTS.len(), n in 1usize..5, complex: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(complex);
        let s = SpaceDescriptor::new(field, EXPONENTS[pi], n).unwrap();
        let y = Vector(vector(&mut rng, field, n));
        let b = DualVector(vector(&mut rng, field, n));
        let lhs = pair(&b, &y).unwrap().norm();
        let rhs = lp_norm(s.dual().p(), b.coords()) * norm(&s, &y).unwrap();
        prop_assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn norming_functionals_norm(seed: u64, pi in 0..EXPONENTS.len(), n in 1usize..5, complex: bool, zeros in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(complex);
        let s = SpaceDescriptor::new(field, EXPONENTS[pi], n).unwrap();
        let mut y = vector(&mut rng, field, n);
        for c in y.iter_mut().take(zeros.min(n - 1)) {
            *c = Complex64::new(0.0, 0.0);
        }
        let y = Vector(y);
        let ny = norm(&s, &y).unwrap();
        for b in norming_functionals(&s, &y, None).unwrap() {
            let v = pair(&b, &y).unwrap();
            prop_assert!((v - Complex64::new(ny, 0.0)).norm() <= 1e-12 * ny.max(1.0));
            prop_assert!((lp_norm(s.dual().p(), b.coords()) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn dual_round_trip(pi in 0..EXPONENTS.len(), n in 1usize..6, complex: bool) {
        let s = SpaceDescriptor::new(field_of(complex), EXPONENTS[pi], n).unwrap();
        prop_assert_eq!(s.dual().dual(), s);
    }

    #[test]
    fn evaluation_is_homogeneous(seed: u64, k in 1u32..5, n in 1usize..4, complex: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(complex);
        let s = SpaceDescriptor::new(field, 2.0, n).unwrap();
        let p = polyrad::poly::random_poly(k, s, s, &mut rng).unwrap();
        let x = Vector(vector(&mut rng, field, n));
        let t = scalar(&mut rng, field, 2.0);
        let lhs = p.evaluate(&x.scaled(t)).unwrap();
        let rhs = p.evaluate(&x).unwrap().scaled(t.powu(k));
        let scale = lp_norm(polyrad::spaces::Exponent::INFINITY, rhs.coords()).max(1.0);
        for (a, b) in lhs.coords().iter().zip(rhs.coords()) {
            prop_assert!((a - b).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn adjoint_is_linear_exactly(seed: u64, k in 1u32..4, complex: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(complex);
        let x = SpaceDescriptor::new(field, 1.0, 2).unwrap();
        let y = SpaceDescriptor::new(field, f64::INFINITY, 3).unwrap();
        let p = int_poly(&mut rng, k, x, y);
        let q = int_poly(&mut rng, k, x, y);
        let a = small_int(&mut rng, field);
        let ys = DualVector((0..3).map(|_| small_int(&mut rng, field)).collect());
        let zs = DualVector((0..3).map(|_| small_int(&mut rng, field)).collect());
        let combo = DualVector(ys.coords().iter().zip(zs.coords()).map(|(u, v)| a * u + v).collect());
        let lhs = p.adjoint_apply(&combo).unwrap();
        let rhs = p.adjoint_apply(&ys).unwrap().scale(a).unwrap().add(&p.adjoint_apply(&zs).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);

        // (Q + aP)* = Q* + aP*
        let lhs = q.add_scaled(a, &p).unwrap().adjoint_apply(&ys).unwrap();
        let rhs = q.adjoint_apply(&ys).unwrap().add_scaled(a, &p.adjoint_apply(&ys).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn direct_sum_is_blockwise(seed: u64, kind in 0usize..3, complex: bool, k in 1u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(complex);
        let kind = [SumKind::EllInf, SumKind::Ell1, SumKind::EllP(3.0)][kind];
        let p = kind.exponent();
        let dims = [1usize, 2, 1];
        let blocks: Vec<HomPoly> = dims
            .iter()
            .map(|&n| {
                let s = SpaceDescriptor::new(field, p, n).unwrap();
                polyrad::poly::random_poly(k, s, s, &mut rng).unwrap()
            })
            .collect();
        let sum = direct_sum(&SumRecipe { kind, summands: blocks.clone() }).unwrap();
        let x = vector(&mut rng, field, 4);
        let got = sum.evaluate(&Vector(x.clone())).unwrap();
        let mut want = Vec::new();
        let mut at = 0;
        for (b, n) in blocks.iter().zip(dims) {
            want.extend(b.evaluate(&Vector(x[at..at + n].to_vec())).unwrap().0);
            at += n;
        }
        prop_assert_eq!(got.0, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_estimates_are_deterministic_and_certified(seed: u64, pi in 0..EXPONENTS.len(), complex: bool, k in 1u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(complex);
        let s = SpaceDescriptor::new(field, EXPONENTS[pi], 2).unwrap();
        let p = polyrad::poly::random_poly(k, s, s, &mut rng).unwrap();
        let cfg = OptimConfig { grid_resolution: 512, ..OptimConfig::default() };
        let a = poly_norm(&p, &cfg).unwrap();
        let b = poly_norm(&p, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.status, Status::GridCertified);
        let fine = poly_norm(&p, &OptimConfig { grid_resolution: 1024, ..cfg }).unwrap();
        prop_assert!((fine.value - a.value).abs() <= a.gap.unwrap());
        // attained values are lower bounds on every sampled point
        for x in sample_sphere(&s, 64, seed) {
            let v = norm(&s, &p.evaluate(&x).unwrap()).unwrap();
            prop_assert!(v <= a.value + 1e-9 * a.value.max(1.0), "{v} > {}", a.value);
        }
    }

    #[test]
    fn radius_is_bounded_and_homogeneous(seed: u64) {
        let cfg = RadiusConfig::default();
        let (q, p) = desk_pair(seed, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let engine = RadiusEngine::new(&q, &cfg).unwrap();
        let v = engine.numerical_radius(&p).unwrap();
        prop_assert!(v.value >= 0.0);
        prop_assert!(v.value <= poly_norm(&p, &cfg.optim).unwrap().value + 1e-6);
        let c = scalar(&mut rng, q.field(), 3.0);
        let vc = engine.numerical_radius(&p.scale(c).unwrap()).unwrap();
        prop_assert!((vc.value - c.norm() * v.value).abs() <= 1e-9, "{} vs {}", vc.value, c.norm() * v.value);
        for w in v.ladder.windows(2) {
            prop_assert!(w[1].value <= w[0].value + 1e-9);
        }
        prop_assert!((engine.attainment(&q).unwrap().value - 1.0).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn extra_candidates_never_raise_the_bound(seed: u64) {
        let cfg = RadiusConfig::default();
        let (q, p) = desk_pair(seed, &cfg);
        let base = index_upper_bound(&q, 2, seed, &cfg).unwrap();
        let more = index_upper_bound_with(&q, &[("extra".into(), p)], 2, seed, &cfg).unwrap();
        prop_assert!(more.upper_bound <= base.upper_bound);
        prop_assert_eq!(more.samples, base.samples + 1);
        let min = base.per_sample.iter().map(|s| s.radius).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min, base.upper_bound);
        prop_assert!(base.upper_bound >= 0.0 && base.upper_bound <= 1.0 + 1e-6);
    }

    #[test]
    fn spear_margin_is_negative_above_the_bound(seed: u64, gap in 2.5e-3f64..0.5) {
        let cfg = RadiusConfig::default();
        let (q, _) = desk_pair(seed, &cfg);
        let est = index_upper_bound(&q, 2, seed, &cfg).unwrap();
        let lambda = est.upper_bound + gap;
        prop_assume!(lambda <= 1.0);
        let m = spear_margin_for(&q, &est.argmin_poly, lambda, &cfg).unwrap();
        prop_assert!(m < 0.0, "margin {m} at lambda {lambda}, bound {}", est.upper_bound);
    }

    #[test]
    fn operator_bounds_dominate_the_index_bound(seed: u64) {
        let cfg = RadiusConfig::default();
        let (q, _) = desk_pair(seed, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = *q.codomain();
        let mut extra = Vec::new();
        let mut best = f64::INFINITY;
        for i in 0..3 {
            let m = (0..2).map(|_| (0..2).map(|_| scalar(&mut rng, y.field(), 1.0)).collect()).collect();
            let t = LinOp::new(m, y).unwrap();
            best = best.min(operator_bound(&q, &t, &cfg.optim).unwrap());
            extra.push((format!("op:{i}"), compose_linear(&t, &q).unwrap()));
        }
        let est = index_upper_bound_with(&q, &extra, 0, seed, &cfg).unwrap();
        prop_assert!(est.upper_bound <= best + 5e-3, "{} > {best}", est.upper_bound);
    }

    /// For scalar codomains `Q*` is determined by the image of `1`, and the
    /// norm of `Q* + αθP*` is the norm of that image; the limit formula on
    /// the adjoint pair must reproduce the radius of `(P, Q)`.
    #[test]
    fn adjoint_pair_has_the_same_radius(seed: u64, k in 1u32..4, pi in 0usize..3, complex: bool) {
        let cfg = RadiusConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(complex);
        let x = SpaceDescriptor::new(field, [1.0, 2.0, f64::INFINITY][pi], 2).unwrap();
        let y = SpaceDescriptor::new(field, 2.0, 1).unwrap();
        let q = random_unit_poly(k, x, y, &mut rng, &cfg).unwrap();
        let p = random_unit_poly(k, x, y, &mut rng, &cfg).unwrap();
        let one = DualVector(vec![Complex64::new(1.0, 0.0)]);
        let (qa, pa) = (q.adjoint_apply(&one).unwrap(), p.adjoint_apply(&one).unwrap());
        let direct = numerical_radius(&p, &q, &cfg).unwrap().value;
        let adjoint = radius_via_limit(&pa, &qa, &cfg).unwrap().value;
        prop_assert!((direct - adjoint).abs() <= 5e-3, "{direct} vs {adjoint}");
    }
}
