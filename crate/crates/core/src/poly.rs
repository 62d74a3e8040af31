//! Homogeneous polynomials between `ℓ_p` spaces in sparse monomial form.
//!
//! Coordinate `j` of `P(x)` is `Σ c_α x^α` over the terms with `out = j`.
//! Terms are kept canonical: sorted by output index then multi-index
//! (lexicographic), no zero coefficients, no duplicate keys.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{DualVector, Field, SpaceDescriptor, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub out: usize,
    pub alpha: Vec<u32>,
    pub coeff: Complex64,
}

impl Term {
    pub fn new(out: usize, alpha: Vec<u32>, coeff: Complex64) -> Self {
        Term { out, alpha, coeff }
    }

    pub fn real(out: usize, alpha: &[u32], coeff: f64) -> Self {
        Term {
            out,
            alpha: alpha.to_vec(),
            coeff: Complex64::new(coeff, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoly", into = "RawPoly")]
pub struct HomPoly {
    degree: u32,
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
    terms: Vec<Term>,
}

impl HomPoly {
    /// Validate and canonicalise. Exactly-zero coefficients are dropped.
    pub fn new(
        degree: u32,
        domain: SpaceDescriptor,
        codomain: SpaceDescriptor,
        terms: Vec<Term>,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidPoly("degree must be at least 1".into()));
        }
        if domain.field() != codomain.field() {
            return Err(Error::FieldMismatch(
                "domain and codomain must share the scalar field".into(),
            ));
        }
        let mut map = BTreeMap::new();
        for t in terms {
            if t.out >= codomain.dim() {
                return Err(Error::InvalidPoly(format!(
                    "output index {} out of range for codomain dimension {}",
                    t.out,
                    codomain.dim()
                )));
            }
            if t.alpha.len() != domain.dim() {
                return Err(Error::InvalidPoly(format!(
                    "multi-index {:?} has length {}, domain dimension is {}",
                    t.alpha,
                    t.alpha.len(),
                    domain.dim()
                )));
            }
            if t.alpha.iter().sum::<u32>() != degree {
                return Err(Error::InvalidPoly(format!(
                    "multi-index {:?} does not sum to degree {degree}",
                    t.alpha
                )));
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidPoly(format!(
                    "non-finite coefficient for output {} and multi-index {:?}",
                    t.out, t.alpha
                )));
            }
            if domain.field() == Field::Real && t.coeff.im != 0.0 {
                return Err(Error::FieldMismatch(
                    "real polynomial with a non-real coefficient".into(),
                ));
            }
            let key = (t.out, t.alpha.clone());
            if map.insert(key, t.coeff).is_some() {
                return Err(Error::InvalidPoly(format!(
                    "duplicate term for output {} and multi-index {:?}",
                    t.out, t.alpha
                )));
            }
        }
        Ok(Self::from_map(degree, domain, codomain, map))
    }

    fn from_map(
        degree: u32,
        domain: SpaceDescriptor,
        codomain: SpaceDescriptor,
        map: BTreeMap<(usize, Vec<u32>), Complex64>,
    ) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|((out, alpha), coeff)| Term {
                out,
                alpha,
                coeff: Complex64::new(coeff.re + 0.0, coeff.im + 0.0),
            })
            .collect();
        HomPoly {
            degree,
            domain,
            codomain,
            terms,
        }
    }

    pub fn zero(degree: u32, domain: SpaceDescriptor, codomain: SpaceDescriptor) -> Result<Self> {
        HomPoly::new(degree, domain, codomain, Vec::new())
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn domain(&self) -> &SpaceDescriptor {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceDescriptor {
        &self.codomain
    }

    pub fn field(&self) -> Field {
        self.domain.field()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ |c_α|` over all terms.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// A Lipschitz bound for `x ↦ ‖P(x)‖` on the unit sphere:
    /// `k · Σ|c_α| · n^k`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.degree as f64 * self.coeff_l1() * (self.domain.dim() as f64).powi(self.degree as i32)
    }

    pub fn evaluate(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: x.dim(),
            });
        }
        if let Some(index) = x
            .coords()
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Vector(self.eval(x.coords())))
    }

    pub(crate) fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.codomain.dim()];
        self.eval_into(x, &mut out);
        out
    }

    pub(crate) fn eval_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let k = self.degree as usize;
        let stride = k + 1;
        let mut pows = vec![Complex64::new(1.0, 0.0); x.len() * stride];
        for (i, &xi) in x.iter().enumerate() {
            for e in 1..=k {
                pows[i * stride + e] = pows[i * stride + e - 1] * xi;
            }
        }
        for z in out.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        for t in &self.terms {
            let mut m = t.coeff;
            for (i, &a) in t.alpha.iter().enumerate() {
                if a > 0 {
                    m *= pows[i * stride + a as usize];
                }
            }
            out[t.out] += m;
        }
    }

    fn check_same_shape(&self, other: &HomPoly) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::InvalidPoly(format!(
                "degree mismatch: {} vs {}",
                self.degree, other.degree
            )));
        }
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::InvalidPoly(
                "polynomials act between different spaces".into(),
            ));
        }
        Ok(())
    }

    fn to_map(&self) -> BTreeMap<(usize, Vec<u32>), Complex64> {
        self.terms
            .iter()
            .map(|t| ((t.out, t.alpha.clone()), t.coeff))
            .collect()
    }

    /// `self + a·other`, coefficient by coefficient.
    pub fn add_scaled(&self, a: Complex64, other: &HomPoly) -> Result<HomPoly> {
        self.check_same_shape(other)?;
        self.check_scalar(a)?;
        let mut map = self.to_map();
        for t in &other.terms {
            *map.entry((t.out, t.alpha.clone()))
                .or_insert(Complex64::new(0.0, 0.0)) += a * t.coeff;
        }
        Ok(Self::from_map(self.degree, self.domain, self.codomain, map))
    }

    pub fn add(&self, other: &HomPoly) -> Result<HomPoly> {
        self.add_scaled(Complex64::new(1.0, 0.0), other)
    }

    pub fn scale(&self, a: Complex64) -> Result<HomPoly> {
        self.check_scalar(a)?;
        let map = self
            .terms
            .iter()
            .map(|t| ((t.out, t.alpha.clone()), a * t.coeff))
            .collect();
        Ok(Self::from_map(self.degree, self.domain, self.codomain, map))
    }

    pub fn scale_real(&self, a: f64) -> HomPoly {
        self.scale(Complex64::new(a, 0.0))
            .expect("real scalars are valid in every field")
    }

    fn check_scalar(&self, a: Complex64) -> Result<()> {
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::InvalidArgument("non-finite scalar".into()));
        }
        if self.field() == Field::Real && a.im != 0.0 {
            return Err(Error::FieldMismatch(
                "complex scalar applied to a real polynomial".into(),
            ));
        }
        Ok(())
    }

    /// The scalar polynomial `y* ∘ P`.
    pub fn adjoint_apply(&self, y_star: &DualVector) -> Result<HomPoly> {
        if y_star.dim() != self.codomain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.codomain.dim(),
                got: y_star.dim(),
            });
        }
        for &b in y_star.coords() {
            self.check_scalar(b)?;
        }
        let mut map = BTreeMap::new();
        for t in &self.terms {
            *map.entry((0, t.alpha.clone()))
                .or_insert(Complex64::new(0.0, 0.0)) += y_star.0[t.out] * t.coeff;
        }
        let scalar = self.codomain.with_dim(1)?;
        Ok(Self::from_map(self.degree, self.domain, scalar, map))
    }
}

/// A square matrix acting on an `ℓ_p^n` space.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp {
    matrix: Vec<Vec<Complex64>>,
    space: SpaceDescriptor,
}

impl LinOp {
    pub fn new(matrix: Vec<Vec<Complex64>>, space: SpaceDescriptor) -> Result<Self> {
        let n = space.dim();
        if matrix.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.len(),
            });
        }
        for row in &matrix {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for z in row {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::InvalidArgument("non-finite matrix entry".into()));
                }
                if space.field() == Field::Real && z.im != 0.0 {
                    return Err(Error::FieldMismatch(
                        "complex matrix entry on a real space".into(),
                    ));
                }
            }
        }
        Ok(LinOp { matrix, space })
    }

    pub fn real(rows: &[&[f64]], space: SpaceDescriptor) -> Result<Self> {
        let matrix = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        LinOp::new(matrix, space)
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        let n = space.dim();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        LinOp { matrix, space }
    }

    pub fn zero(space: SpaceDescriptor) -> Self {
        let n = space.dim();
        LinOp {
            matrix: vec![vec![Complex64::new(0.0, 0.0); n]; n],
            space,
        }
    }

    /// Planar rotation by `angle` in coordinates `(i, j)`, identity elsewhere.
    pub fn rotation(space: SpaceDescriptor, i: usize, j: usize, angle: f64) -> Result<Self> {
        let n = space.dim();
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidArgument(format!(
                "rotation plane ({i}, {j}) invalid in dimension {n}"
            )));
        }
        let mut op = LinOp::identity(space);
        let (s, c) = angle.sin_cos();
        op.matrix[i][i] = Complex64::new(c, 0.0);
        op.matrix[i][j] = Complex64::new(-s, 0.0);
        op.matrix[j][i] = Complex64::new(s, 0.0);
        op.matrix[j][j] = Complex64::new(c, 0.0);
        Ok(op)
    }

    pub fn diag(space: SpaceDescriptor, d: &[Complex64]) -> Result<Self> {
        let n = space.dim();
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d.len(),
            });
        }
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (i, &v) in d.iter().enumerate() {
            m[i][i] = v;
        }
        LinOp::new(m, space)
    }

    pub fn matrix(&self) -> &[Vec<Complex64>] {
        &self.matrix
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: v.dim(),
            });
        }
        Ok(Vector(self.apply_raw(v.coords())))
    }

    pub(crate) fn apply_raw(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn compose(&self, other: &LinOp) -> Result<LinOp> {
        if self.space != other.space {
            return Err(Error::InvalidArgument("operators act on different spaces".into()));
        }
        let n = self.space.dim();
        let m = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|l| self.matrix[i][l] * other.matrix[l][j]).sum())
                    .collect()
            })
            .collect();
        Ok(LinOp {
            matrix: m,
            space: self.space,
        })
    }
}

/// The polynomial `x ↦ T(P(x))`.
pub fn compose_linear(t: &LinOp, p: &HomPoly) -> Result<HomPoly> {
    if t.space != p.codomain {
        return Err(Error::DimensionMismatch {
            expected: p.codomain.dim(),
            got: t.space.dim(),
        });
    }
    let mut map = BTreeMap::new();
    for term in &p.terms {
        for (i, row) in t.matrix.iter().enumerate() {
            let a = row[term.out];
            if a != Complex64::new(0.0, 0.0) {
                *map.entry((i, term.alpha.clone()))
                    .or_insert(Complex64::new(0.0, 0.0)) += a * term.coeff;
            }
        }
    }
    Ok(HomPoly::from_map(p.degree, p.domain, p.codomain, map))
}

/// Outer norm used to glue the blocks of a direct sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumKind {
    EllInf,
    Ell1,
    EllP(f64),
}

impl SumKind {
    pub fn exponent(self) -> f64 {
        match self {
            SumKind::EllInf => f64::INFINITY,
            SumKind::Ell1 => 1.0,
            SumKind::EllP(p) => p,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SumRecipe {
    pub kind: SumKind,
    pub summands: Vec<HomPoly>,
}

/// The blockwise polynomial `(x_1, …, x_m) ↦ (Q_1(x_1), …, Q_m(x_m))`.
///
/// The glued spaces must again be `ℓ_p` spaces, so every block space is
/// either one-dimensional or already carries the outer exponent.
pub fn direct_sum(recipe: &SumRecipe) -> Result<HomPoly> {
    let summands = &recipe.summands;
    if summands.len() < 2 {
        return Err(Error::InvalidArgument(
            "a direct sum needs at least two summands".into(),
        ));
    }
    let p = recipe.kind.exponent();
    let first = &summands[0];
    let field = first.field();
    for q in summands {
        if q.degree != first.degree {
            return Err(Error::InvalidPoly(format!(
                "summands have mixed degrees {} and {}",
                first.degree, q.degree
            )));
        }
        if q.field() != field {
            return Err(Error::FieldMismatch("summands over different fields".into()));
        }
        for s in [&q.domain, &q.codomain] {
            if s.dim() > 1 && s.p().value() != p {
                return Err(Error::InvalidSpace(format!(
                    "block space {s} is not compatible with an outer exponent {p}"
                )));
            }
        }
    }
    let n: usize = summands.iter().map(|q| q.domain.dim()).sum();
    let m: usize = summands.iter().map(|q| q.codomain.dim()).sum();
    let domain = SpaceDescriptor::new(field, p, n)?;
    let codomain = SpaceDescriptor::new(field, p, m)?;
    let mut map = BTreeMap::new();
    let (mut dx, mut dy) = (0, 0);
    for q in summands {
        for t in &q.terms {
            let mut alpha = vec![0; n];
            alpha[dx..dx + q.domain.dim()].copy_from_slice(&t.alpha);
            map.insert((dy + t.out, alpha), t.coeff);
        }
        dx += q.domain.dim();
        dy += q.codomain.dim();
    }
    Ok(HomPoly::from_map(first.degree, domain, codomain, map))
}

/// All multi-indices of length `n` summing to `k`, in lexicographic order.
pub fn multi_indices(n: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in 0..=k {
            prefix.push(a);
            rec(n, k - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// A polynomial with an independent Gaussian coefficient on every monomial
/// of every output coordinate (complex Gaussians have unit variance).
pub fn random_poly<R: Rng + ?Sized>(
    degree: u32,
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
    rng: &mut R,
) -> Result<HomPoly> {
    let complex = domain.field() == Field::Complex;
    let alphas = multi_indices(domain.dim(), degree);
    let mut terms = Vec::with_capacity(alphas.len() * codomain.dim());
    for out in 0..codomain.dim() {
        for alpha in &alphas {
            let re: f64 = StandardNormal.sample(rng);
            let coeff = if complex {
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) / 2f64.sqrt()
            } else {
                Complex64::new(re, 0.0)
            };
            terms.push(Term::new(out, alpha.clone(), coeff));
        }
    }
    HomPoly::new(degree, domain, codomain, terms)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    out: usize,
    alpha: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoly {
    field: Field,
    degree: u32,
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
    terms: Vec<RawTerm>,
}

impl TryFrom<RawPoly> for HomPoly {
    type Error = Error;

    fn try_from(raw: RawPoly) -> Result<Self> {
        if raw.domain.field() != raw.field || raw.codomain.field() != raw.field {
            return Err(Error::FieldMismatch(
                "spaces disagree with the declared field".into(),
            ));
        }
        let terms = raw
            .terms
            .into_iter()
            .map(|t| Term::new(t.out, t.alpha, Complex64::new(t.re, t.im)))
            .collect();
        HomPoly::new(raw.degree, raw.domain, raw.codomain, terms)
    }
}

impl From<HomPoly> for RawPoly {
    fn from(p: HomPoly) -> Self {
        RawPoly {
            field: p.field(),
            degree: p.degree,
            domain: p.domain,
            codomain: p.codomain,
            terms: p
                .terms
                .into_iter()
                .map(|t| RawTerm {
                    out: t.out,
                    alpha: t.alpha,
                    re: t.coeff.re,
                    im: t.coeff.im,
                })
                .collect(),
        }
    }
}

impl HomPoly {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Canonical pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polynomials always serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn l1() -> SpaceDescriptor {
        SpaceDescriptor::real(1.0, 2).unwrap()
    }

    fn example_l1() -> HomPoly {
        HomPoly::new(
            2,
            l1(),
            l1(),
            vec![
                Term::real(0, &[2, 0], 0.5),
                Term::real(0, &[1, 1], 2.0),
                Term::real(1, &[0, 2], -0.5),
                Term::real(1, &[1, 1], -1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let p = example_l1();
        let y = p.evaluate(&Vector::real(&[0.5, 0.5])).unwrap();
        assert_eq!(y, Vector::real(&[0.625, -0.375]));
        assert_eq!(p.evaluate(&l1().zero()).unwrap(), l1().zero());

        for k in 1..=4 {
            let s = SpaceDescriptor::real(1.5, 2).unwrap();
            let swap = HomPoly::new(
                k,
                s,
                s,
                vec![Term::real(0, &[0, k], 1.0), Term::real(1, &[k, 0], 1.0)],
            )
            .unwrap();
            let y = swap.evaluate(&Vector::real(&[1.0, 0.0])).unwrap();
            assert_eq!(y, Vector::real(&[0.0, 1.0]));
        }
    }

    #[test]
    fn terms_are_canonical() {
        let p = HomPoly::new(
            2,
            l1(),
            l1(),
            vec![
                Term::real(1, &[1, 1], 3.0),
                Term::real(0, &[1, 1], 1.0),
                Term::real(0, &[0, 2], 0.0),
                Term::real(0, &[2, 0], 2.0),
            ],
        )
        .unwrap();
        let keys: Vec<_> = p.terms().iter().map(|t| (t.out, t.alpha.clone())).collect();
        assert_eq!(keys, vec![(0, vec![1, 1]), (0, vec![2, 0]), (1, vec![1, 1])]);
    }

    #[test]
    fn rejects_malformed_terms() {
        let bad = [
            vec![Term::real(2, &[2, 0], 1.0)],
            vec![Term::real(0, &[1, 0], 1.0)],
            vec![Term::real(0, &[2, 0, 0], 1.0)],
            vec![Term::real(0, &[2, 0], 1.0), Term::real(0, &[2, 0], 2.0)],
            vec![Term::new(0, vec![2, 0], c(0.0, 1.0))],
            vec![Term::real(0, &[2, 0], f64::NAN)],
        ];
        for terms in bad {
            assert!(HomPoly::new(2, l1(), l1(), terms).is_err());
        }
    }

    #[test]
    fn adjoint_examples() {
        let p = example_l1();
        let q = p.adjoint_apply(&DualVector::real(&[1.0, 0.0])).unwrap();
        assert_eq!(q.codomain().dim(), 1);
        assert_eq!(
            q.terms(),
            &[Term::real(0, &[1, 1], 2.0), Term::real(0, &[2, 0], 0.5)]
        );
        assert!(p.adjoint_apply(&DualVector::real(&[0.0, 0.0])).unwrap().is_zero());
        assert!(p.adjoint_apply(&DualVector::real(&[1.0])).is_err());
    }

    #[test]
    fn compose_examples() {
        let p = example_l1();
        assert_eq!(compose_linear(&LinOp::identity(l1()), &p).unwrap(), p);
        assert!(compose_linear(&LinOp::zero(l1()), &p).unwrap().is_zero());

        let e2 = SpaceDescriptor::real(2.0, 2).unwrap();
        let q = HomPoly::new(
            2,
            e2,
            e2,
            vec![Term::real(0, &[2, 0], 1.0), Term::real(1, &[0, 2], 1.0)],
        )
        .unwrap();
        let rot = LinOp::rotation(e2, 0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        let r = compose_linear(&rot, &q).unwrap();
        let x = Vector::real(&[0.3, -0.7]);
        let y = r.evaluate(&x).unwrap();
        assert!((y.0[0].re + 0.49).abs() < 1e-15 && (y.0[1].re - 0.09).abs() < 1e-15);
    }

    #[test]
    fn direct_sum_examples() {
        let k1 = SpaceDescriptor::real(1.0, 1).unwrap();
        let sq = HomPoly::new(2, k1, k1, vec![Term::real(0, &[2], 1.0)]).unwrap();
        let q = direct_sum(&SumRecipe {
            kind: SumKind::Ell1,
            summands: vec![sq.clone(), sq.clone()],
        })
        .unwrap();
        let expected = HomPoly::new(
            2,
            l1(),
            l1(),
            vec![Term::real(0, &[2, 0], 1.0), Term::real(1, &[0, 2], 1.0)],
        )
        .unwrap();
        assert_eq!(q, expected);

        let cube = HomPoly::new(3, k1, k1, vec![Term::real(0, &[3], 1.0)]).unwrap();
        let q = direct_sum(&SumRecipe {
            kind: SumKind::EllInf,
            summands: vec![cube.clone(), cube.clone()],
        })
        .unwrap();
        assert!(q.domain().p().is_infinite() && q.codomain().dim() == 2);

        assert!(direct_sum(&SumRecipe {
            kind: SumKind::EllInf,
            summands: vec![cube.clone()],
        })
        .is_err());
        assert!(direct_sum(&SumRecipe {
            kind: SumKind::EllInf,
            summands: vec![cube, sq],
        })
        .is_err());
    }

    #[test]
    fn multi_index_count() {
        // C(n + k - 1, k)
        assert_eq!(multi_indices(2, 3).len(), 4);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(1, 5), vec![vec![5]]);
        assert_eq!(multi_indices(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = SpaceDescriptor::complex(f64::INFINITY, 2).unwrap();
        let p = random_poly(3, s, s, &mut rng).unwrap();
        let text = p.to_json();
        let back = HomPoly::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);

        let minimal = r#"{"field":"real","degree":1,"domain":{"field":"real","p":2,"dim":1},
            "codomain":{"field":"real","p":2,"dim":1},"terms":[{"out":0,"alpha":[1],"re":2.0}]}"#;
        let p = HomPoly::from_json(minimal).unwrap();
        assert_eq!(p.terms()[0].coeff, c(2.0, 0.0));

        let mixed = minimal.replacen(r#""field":"real""#, r#""field":"complex""#, 1);
        assert!(HomPoly::from_json(&mixed).is_err());
    }
}
