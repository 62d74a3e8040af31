//! Finite-dimensional `ℓ_p^n` spaces over ℝ or ℂ.
//!
//! Vectors and dual vectors are stored as complex coordinates; real spaces
//! simply keep every imaginary part at zero. Dual vectors act through the
//! bilinear pairing `b(y) = Σ b_i y_i` (no conjugation).

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of extreme points `norming_functionals` will enumerate.
pub const MAX_EXTREME_POINTS: usize = 1 << 20;

/// Relative tolerance used to decide which coordinates are zero (p = 1) or
/// tie for the maximum modulus (p = ∞) in the public face enumeration.
pub const FACE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Real dimension of one scalar.
    pub fn real_dim(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// An exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidSpace(format!("exponent p = {p} is not in [1, ∞]")));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.is_one() {
            Exponent::INFINITY
        } else if self.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(1.0 + 1.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// `ℓ_p^dim` over a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct SpaceDescriptor {
    field: Field,
    p: Exponent,
    dim: usize,
}

impl SpaceDescriptor {
    pub fn new(field: Field, p: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        Ok(SpaceDescriptor {
            field,
            p: Exponent::new(p)?,
            dim,
        })
    }

    pub fn real(p: f64, dim: usize) -> Result<Self> {
        Self::new(Field::Real, p, dim)
    }

    pub fn complex(p: f64, dim: usize) -> Result<Self> {
        Self::new(Field::Complex, p, dim)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The dual space `ℓ_q^dim`.
    pub fn dual(&self) -> SpaceDescriptor {
        SpaceDescriptor {
            field: self.field,
            p: self.p.conjugate(),
            dim: self.dim,
        }
    }

    /// Same field and exponent, different dimension.
    pub fn with_dim(&self, dim: usize) -> Result<SpaceDescriptor> {
        SpaceDescriptor::new(self.field, self.p.value(), dim)
    }

    /// Real dimension of the unit sphere as a manifold.
    pub fn sphere_dim(&self) -> usize {
        self.dim * self.field.real_dim() - 1
    }

    pub fn zero(&self) -> Vector {
        Vector(vec![Complex64::new(0.0, 0.0); self.dim])
    }

    pub fn check_vector(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        check_finite(v)?;
        if self.field == Field::Real {
            if let Some(index) = v.iter().position(|z| z.im != 0.0) {
                return Err(Error::FieldMismatch(format!(
                    "coordinate {index} of a real vector has a non-zero imaginary part"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} l_{}^{}", self.field, self.p, self.dim)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawExponent {
    Number(f64),
    Named(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    field: Field,
    p: RawExponent,
    dim: usize,
}

impl TryFrom<RawSpace> for SpaceDescriptor {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        let p = match raw.p {
            RawExponent::Number(p) => p,
            RawExponent::Named(s) if s == "inf" => f64::INFINITY,
            RawExponent::Named(s) => {
                return Err(Error::InvalidSpace(format!("unrecognised exponent `{s}`")))
            }
        };
        SpaceDescriptor::new(raw.field, p, raw.dim)
    }
}

impl From<SpaceDescriptor> for RawSpace {
    fn from(s: SpaceDescriptor) -> Self {
        let p = if s.p.is_infinite() {
            RawExponent::Named("inf".into())
        } else {
            RawExponent::Number(s.p.value())
        };
        RawSpace {
            field: s.field,
            p,
            dim: s.dim,
        }
    }
}

/// A point of `ℓ_p^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vector(pub Vec<Complex64>);

/// A functional on `ℓ_p^n`, stored by its coefficients in `ℓ_q^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualVector(pub Vec<Complex64>);

macro_rules! coord_vector {
    ($name:ident) => {
        impl $name {
            pub fn new(coords: Vec<Complex64>) -> Self {
                $name(coords)
            }

            pub fn real(coords: &[f64]) -> Self {
                $name(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            }

            pub fn coords(&self) -> &[Complex64] {
                &self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn scaled(&self, t: Complex64) -> Self {
                $name(self.0.iter().map(|&z| z * t).collect())
            }
        }

        impl From<Vec<Complex64>> for $name {
            fn from(coords: Vec<Complex64>) -> Self {
                $name(coords)
            }
        }
    };
}

coord_vector!(Vector);
coord_vector!(DualVector);

fn check_finite(v: &[Complex64]) -> Result<()> {
    match v.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `‖v‖_p`.
pub fn norm(space: &SpaceDescriptor, v: &Vector) -> Result<f64> {
    if v.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: v.dim(),
        });
    }
    check_finite(v.coords())?;
    Ok(lp_norm(space.p(), v.coords()))
}

/// `‖·‖_p` of raw coordinates, without validation.
pub fn lp_norm(p: Exponent, v: &[Complex64]) -> f64 {
    if p.is_infinite() {
        return v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    if p.is_one() {
        return v.iter().map(|z| z.norm()).sum();
    }
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let p = p.value();
    let s: f64 = if p == 2.0 {
        v.iter().map(|z| (z.norm() / scale).powi(2)).sum()
    } else {
        v.iter().map(|z| (z.norm() / scale).powf(p)).sum()
    };
    scale * s.powf(1.0 / p)
}

/// The bilinear action `y*(y) = Σ b_i y_i`.
pub fn pair(y_star: &DualVector, y: &Vector) -> Result<Complex64> {
    if y_star.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: y_star.dim(),
            got: y.dim(),
        });
    }
    check_finite(y_star.coords())?;
    check_finite(y.coords())?;
    Ok(dot(y_star.coords(), y.coords()))
}

pub(crate) fn dot(b: &[Complex64], y: &[Complex64]) -> Complex64 {
    b.iter().zip(y).map(|(b, y)| b * y).sum()
}

/// `conj(z)/|z|`, the unit scalar `c` with `c·z = |z|`; `None` at zero.
pub(crate) fn conj_phase(z: Complex64) -> Option<Complex64> {
    let r = z.norm();
    (r > 0.0).then(|| z.conj() / r)
}

/// `z/|z|`, or 1 at zero.
pub(crate) fn phase_or_one(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Extreme points of the face `{b : ‖b‖_q = 1, b(y) = ‖y‖_p}`.
///
/// For `1 < p < ∞` the face is a single point. For `p = 1` there is one
/// extreme point per sign pattern on the zero coordinates of `y` (signs
/// `±1` over ℝ, the four units `±1, ±i` over ℂ). For `p = ∞` the extreme
/// points are `conj-phase(y_j)·e_j` over the maximum-modulus coordinates.
/// `cap` defaults to `2^dim`; anything above `2^20` is rejected.
pub fn norming_functionals(
    space: &SpaceDescriptor,
    y: &Vector,
    cap: Option<usize>,
) -> Result<Vec<DualVector>> {
    space.check_vector(y.coords())?;
    let cap = match cap {
        Some(c) if c > MAX_EXTREME_POINTS => return Err(Error::CapTooLarge(c)),
        Some(c) => c,
        None => 1usize
            .checked_shl(space.dim() as u32)
            .unwrap_or(MAX_EXTREME_POINTS)
            .min(MAX_EXTREME_POINTS),
    };
    norming_functionals_tol(space, y.coords(), cap, FACE_TOL)
}

pub(crate) fn norming_functionals_tol(
    space: &SpaceDescriptor,
    y: &[Complex64],
    cap: usize,
    tol: f64,
) -> Result<Vec<DualVector>> {
    let ny = lp_norm(space.p(), y);
    if ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    let zero = Complex64::new(0.0, 0.0);
    let p = space.p();
    if p.is_infinite() {
        let out = y
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() >= ny * (1.0 - tol))
            .take(cap)
            .map(|(j, &z)| {
                let mut b = vec![zero; y.len()];
                b[j] = conj_phase(z).expect("argmax coordinate is non-zero");
                DualVector(b)
            })
            .collect();
        return Ok(out);
    }
    if p.is_one() {
        let mut base = vec![zero; y.len()];
        let mut free = Vec::new();
        for (i, &z) in y.iter().enumerate() {
            if z.norm() > ny * tol {
                base[i] = conj_phase(z).expect("support coordinate is non-zero");
            } else {
                free.push(i);
            }
        }
        let units: &[Complex64] = match space.field() {
            Field::Real => &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            Field::Complex => &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0),
            ],
        };
        let radix = units.len();
        let total = radix
            .checked_pow(free.len() as u32)
            .unwrap_or(usize::MAX)
            .min(cap);
        let mut out = Vec::with_capacity(total);
        for mut code in 0..total {
            let mut b = base.clone();
            // the last free coordinate varies fastest
            for &i in free.iter().rev() {
                b[i] = units[code % radix];
                code /= radix;
            }
            out.push(DualVector(b));
        }
        return Ok(out);
    }
    Ok(vec![DualVector(smooth_norming(p, y, ny))])
}

fn smooth_norming(p: Exponent, y: &[Complex64], ny: f64) -> Vec<Complex64> {
    let pm1 = p.value() - 1.0;
    y.iter()
        .map(|&z| match conj_phase(z) {
            Some(c) => c * (z.norm() / ny).powf(pm1),
            None => Complex64::new(0.0, 0.0),
        })
        .collect()
}

/// The element of the norming face of `u` that maximises `|b(w)|`, with the
/// attained pairing `b(w)`.
///
/// Exact over the whole face, including the circle-valued free coordinates
/// of complex `p = 1` faces. Returns `None` when `u = 0`.
pub(crate) fn face_sup(
    space: &SpaceDescriptor,
    u: &[Complex64],
    w: &[Complex64],
    tol: f64,
) -> Option<(Vec<Complex64>, Complex64)> {
    let p = space.p();
    let nu = lp_norm(p, u);
    if nu == 0.0 {
        return None;
    }
    let zero = Complex64::new(0.0, 0.0);
    if p.is_infinite() {
        let mut best: Option<(usize, Complex64, Complex64)> = None;
        for (j, &z) in u.iter().enumerate() {
            if z.norm() >= nu * (1.0 - tol) {
                let c = conj_phase(z).expect("argmax coordinate is non-zero");
                let val = c * w[j];
                if best.is_none_or(|(_, _, v)| val.norm() > v.norm()) {
                    best = Some((j, c, val));
                }
            }
        }
        let (j, c, val) = best.expect("the maximum is always attained");
        let mut b = vec![zero; u.len()];
        b[j] = c;
        return Some((b, val));
    }
    if p.is_one() {
        let mut b = vec![zero; u.len()];
        let mut free = Vec::new();
        let mut fixed = zero;
        for (i, &z) in u.iter().enumerate() {
            if z.norm() > nu * tol {
                b[i] = conj_phase(z).expect("support coordinate is non-zero");
                fixed += b[i] * w[i];
            } else {
                free.push(i);
            }
        }
        let rot = phase_or_one(fixed);
        for i in free {
            b[i] = rot * conj_phase(w[i]).unwrap_or(Complex64::new(1.0, 0.0));
        }
        let val = dot(&b, w);
        return Some((b, val));
    }
    let b = smooth_norming(p, u, nu);
    let val = dot(&b, w);
    Some((b, val))
}

/// Among the norming functionals of `z`, the one maximising `Re b(u)`.
///
/// This is the right derivative selection for `μ ↦ ‖z + μu‖`. Faces are
/// taken exactly (no tolerance). When `z = 0` every unit functional norms
/// `z`, so the norming functional of `u` is returned.
pub(crate) fn ascent_functional(
    space: &SpaceDescriptor,
    z: &[Complex64],
    u: &[Complex64],
) -> Vec<Complex64> {
    let p = space.p();
    let nz = lp_norm(p, z);
    let zero = Complex64::new(0.0, 0.0);
    if nz == 0.0 {
        let nu = lp_norm(p, u);
        if nu == 0.0 {
            let mut b = vec![zero; u.len()];
            b[0] = Complex64::new(1.0, 0.0);
            return b;
        }
        return ascent_functional(space, u, u);
    }
    if p.is_infinite() {
        let mut best: Option<(usize, Complex64, f64)> = None;
        for (j, &zj) in z.iter().enumerate() {
            if zj.norm() == nz {
                let c = conj_phase(zj).expect("argmax coordinate is non-zero");
                let gain = (c * u[j]).re;
                if best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((j, c, gain));
                }
            }
        }
        let (j, c, _) = best.expect("the maximum is always attained");
        let mut b = vec![zero; z.len()];
        b[j] = c;
        return b;
    }
    if p.is_one() {
        return z
            .iter()
            .zip(u)
            .map(|(&zi, &ui)| {
                conj_phase(zi)
                    .or_else(|| conj_phase(ui))
                    .unwrap_or(Complex64::new(1.0, 0.0))
            })
            .collect();
    }
    smooth_norming(p, z, nz)
}

/// Radially project onto the unit sphere; `None` for the zero vector.
pub(crate) fn normalize(p: Exponent, v: &mut [Complex64]) -> Option<()> {
    let n = lp_norm(p, v);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    for z in v.iter_mut() {
        *z /= n;
    }
    Some(())
}

/// Deterministic sample of unit vectors.
///
/// Random points are Gaussian draws normalised onto the sphere. For `p = 1`
/// and `p = ∞` up to half of the sample is taken from the extreme points of
/// the ball (sign vertices first for `p = ∞`, `±e_i` first for `p = 1`).
pub fn sample_sphere(space: &SpaceDescriptor, count: usize, seed: u64) -> Vec<Vector> {
    let structured = structured_points(space);
    let n_structured = structured.len().min(count / 2);
    let mut out: Vec<Vector> = structured.into_iter().take(n_structured).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let mut v: Vec<Complex64> = (0..space.dim())
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = match space.field() {
                    Field::Real => 0.0,
                    Field::Complex => StandardNormal.sample(&mut rng),
                };
                Complex64::new(re, im)
            })
            .collect();
        if normalize(space.p(), &mut v).is_some() {
            out.push(Vector(v));
        }
    }
    out
}

fn structured_points(space: &SpaceDescriptor) -> Vec<Vector> {
    let p = space.p();
    if !(p.is_one() || p.is_infinite()) {
        return Vec::new();
    }
    let n = space.dim();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let axes = (0..n).flat_map(|i| {
        [1.0, -1.0].map(|s| {
            let mut v = vec![zero; n];
            v[i] = one * s;
            Vector(v)
        })
    });
    let n_vertices = 1usize << n.min(6);
    let vertices = (0..n_vertices).map(|code| {
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| if (code >> i) & 1 == 1 { -one } else { one })
            .collect();
        normalize(p, &mut v).expect("vertex is non-zero");
        Vector(v)
    });
    if p.is_infinite() {
        vertices.chain(axes).collect()
    } else {
        axes.chain(vertices).collect()
    }
}
