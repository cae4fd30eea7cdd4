//! Ambient-space arithmetic, subsets, and truncated ℓ^p coefficient vectors.
//!
//! Every point lives in a finite-dimensional real or complex space. Real
//! spaces reuse the complex code path with zero imaginary parts; the
//! [`ScalarField`] tag only records which one a point belongs to.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// Slack applied to the inequalities of membership predicates, so that
/// points on the boundary of a closed set are accepted.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Default minimum separation of sampled pairs used for difference quotients.
pub const DEFAULT_MIN_SEP: f64 = 1e-6;

/// Attempts per pair before [`sample_pairs`] gives up.
const PAIR_RETRY_BUDGET: usize = 1_000;

/// RNG handed to subset samplers.
pub type SampleRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl ScalarField {
    fn join(self, other: ScalarField) -> ScalarField {
        if self == ScalarField::Complex || other == ScalarField::Complex {
            ScalarField::Complex
        } else {
            ScalarField::Real
        }
    }
}

/// An element of the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<Complex64>,
    field: ScalarField,
}

impl Point {
    pub fn new(coords: Vec<Complex64>, field: ScalarField) -> Result<Self> {
        if coords.is_empty() {
            return Err(FrameError::DimensionMismatch { expected: 1, got: 0 });
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FrameError::NonFinite("point coordinates".into()));
        }
        Ok(Self { coords, field })
    }

    /// Real point; panics on an empty slice.
    pub fn real(coords: &[f64]) -> Self {
        assert!(!coords.is_empty(), "point needs at least one coordinate");
        Self {
            coords: coords.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            field: ScalarField::Real,
        }
    }

    pub fn complex(coords: Vec<Complex64>) -> Self {
        assert!(!coords.is_empty(), "point needs at least one coordinate");
        Self {
            coords,
            field: ScalarField::Complex,
        }
    }

    pub fn real_scalar(x: f64) -> Self {
        Self::real(&[x])
    }

    pub fn complex_scalar(z: Complex64) -> Self {
        Self::complex(vec![z])
    }

    pub fn zeros(dim: usize, field: ScalarField) -> Self {
        assert!(dim >= 1, "point needs at least one coordinate");
        Self {
            coords: vec![Complex64::new(0.0, 0.0); dim],
            field,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    /// First coordinate; convenient for scalar (dimension-1) spaces.
    pub fn first(&self) -> Complex64 {
        self.coords[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: Complex64) -> Point {
        Point {
            coords: self.coords.iter().map(|z| z * c).collect(),
            field: if c.im == 0.0 {
                self.field
            } else {
                ScalarField::Complex
            },
        }
    }

    /// `self + c * other`
    pub fn axpy(&self, c: Complex64, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in axpy");
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + c * b)
                .collect(),
            field: self.field.join(other.field),
        }
    }

    /// The direct-sum element `self ⊕ other`.
    pub fn concat(&self, other: &Point) -> Point {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Point {
            coords,
            field: self.field.join(other.field),
        }
    }

    /// Inverse of [`Point::concat`]: splits after the first `at` coordinates.
    pub fn split(&self, at: usize) -> (Point, Point) {
        assert!(at >= 1 && at < self.dim(), "split index out of range");
        (
            Point {
                coords: self.coords[..at].to_vec(),
                field: self.field,
            },
            Point {
                coords: self.coords[at..].to_vec(),
                field: self.field,
            },
        )
    }

    /// Largest coordinate-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
    }
}

impl Mul<Complex64> for &Point {
    type Output = Point;
    fn mul(self, rhs: Complex64) -> Point {
        self.scale(rhs)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if self.field == ScalarField::Real {
                write!(f, "{}", z.re)?;
            } else {
                write!(f, "{}", z)?;
            }
        }
        write!(f, ")")
    }
}

/// Norm on the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AmbientNorm {
    /// `(Σ|x_i|^q)^{1/q}`, `1 <= q < ∞`.
    Lp { q: f64 },
    Sup,
    /// Norm of a direct sum `x ⊕ y`: `(‖x‖^p + ‖y‖^p)^{1/p}` with the
    /// component norms given by `left` and `right`.
    PSum {
        left_dim: usize,
        left: Box<AmbientNorm>,
        right: Box<AmbientNorm>,
        p: f64,
    },
}

impl AmbientNorm {
    pub fn euclidean() -> Self {
        AmbientNorm::Lp { q: 2.0 }
    }

    pub fn norm(&self, x: &Point) -> f64 {
        self.norm_of(x.coords())
    }

    fn norm_of(&self, coords: &[Complex64]) -> f64 {
        match self {
            AmbientNorm::Lp { q } => lp_sum(coords.iter().map(|z| z.norm()), *q),
            AmbientNorm::Sup => coords.iter().map(|z| z.norm()).fold(0.0, f64::max),
            AmbientNorm::PSum {
                left_dim,
                left,
                right,
                p,
            } => {
                let (l, r) = coords.split_at(*left_dim);
                lp_sum([left.norm_of(l), right.norm_of(r)].into_iter(), *p)
            }
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        self.norm(&(x - y))
    }
}

impl fmt::Display for AmbientNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientNorm::Lp { q } => write!(f, "l{}", q),
            AmbientNorm::Sup => write!(f, "sup"),
            AmbientNorm::PSum { left, right, p, .. } => {
                write!(f, "{}-sum({}, {})", p, left, right)
            }
        }
    }
}

fn lp_sum(moduli: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 1.0 {
        moduli.sum()
    } else {
        moduli.map(|m| m.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

type Predicate = dyn Fn(&Point) -> bool + Send + Sync;
type Sampler = dyn Fn(&mut SampleRng) -> Point + Send + Sync;

struct SubsetInner {
    ambient_dim: usize,
    field: ScalarField,
    norm: AmbientNorm,
    contains: Box<Predicate>,
    sampler: Box<Sampler>,
    description: String,
}

/// A subset `M` of the ambient space, given by a membership predicate and a
/// seeded sampler. Cheap to clone.
#[derive(Clone)]
pub struct SubsetSpec {
    inner: Arc<SubsetInner>,
}

impl SubsetSpec {
    /// The predicate is expected to apply [`MEMBERSHIP_TOL`] itself; the
    /// sampler must only produce members.
    pub fn new<C, S>(
        description: impl Into<String>,
        ambient_dim: usize,
        field: ScalarField,
        norm: AmbientNorm,
        contains: C,
        sampler: S,
    ) -> Self
    where
        C: Fn(&Point) -> bool + Send + Sync + 'static,
        S: Fn(&mut SampleRng) -> Point + Send + Sync + 'static,
    {
        Self {
            inner: Arc::new(SubsetInner {
                ambient_dim,
                field,
                norm,
                contains: Box::new(contains),
                sampler: Box::new(sampler),
                description: description.into(),
            }),
        }
    }

    /// `M ⊕ N` with the p-sum norm.
    pub fn direct_sum(&self, other: &SubsetSpec, p: f64) -> SubsetSpec {
        let (left, right) = (self.clone(), other.clone());
        let (left2, right2) = (self.clone(), other.clone());
        let split = self.ambient_dim();
        SubsetSpec::new(
            format!("({}) ⊕ ({})", self.description(), other.description()),
            self.ambient_dim() + other.ambient_dim(),
            self.field().join(other.field()),
            AmbientNorm::PSum {
                left_dim: split,
                left: Box::new(self.norm().clone()),
                right: Box::new(other.norm().clone()),
                p,
            },
            move |z| {
                let (x, y) = z.split(split);
                left.contains(&x) && right.contains(&y)
            },
            move |rng| {
                let x = left2.sample(rng);
                let y = right2.sample(rng);
                x.concat(&y)
            },
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim
    }

    pub fn field(&self) -> ScalarField {
        self.inner.field
    }

    pub fn norm(&self) -> &AmbientNorm {
        &self.inner.norm
    }

    pub fn description(&self) -> &str {
        &self.inner.description
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.inner.ambient_dim && x.is_finite() && (self.inner.contains)(x)
    }

    pub fn sample(&self, rng: &mut SampleRng) -> Point {
        (self.inner.sampler)(rng)
    }

    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        self.inner.norm.distance(x, y)
    }

    pub fn norm_of(&self, x: &Point) -> f64 {
        self.inner.norm.norm(x)
    }

    /// Membership check that reports which point failed.
    pub fn require(&self, x: &Point, what: &str) -> Result<()> {
        if x.dim() != self.ambient_dim() {
            return Err(FrameError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: x.dim(),
            });
        }
        if self.contains(x) {
            Ok(())
        } else {
            Err(FrameError::NotInSubset {
                what: format!("{} = {}", what, x),
                subset: self.description().to_string(),
            })
        }
    }

    /// Two subsets are treated as the same when they describe the same set
    /// in the same ambient space with the same norm.
    pub fn same_as(&self, other: &SubsetSpec) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.ambient_dim() == other.ambient_dim()
                && self.description() == other.description()
                && self.norm() == other.norm())
    }
}

impl fmt::Debug for SubsetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubsetSpec")
            .field("description", &self.inner.description)
            .field("ambient_dim", &self.inner.ambient_dim)
            .field("norm", &self.inner.norm)
            .finish()
    }
}

/// `count` points of `M`, deterministic in `seed`.
pub fn sample_points(m: &SubsetSpec, count: usize, seed: u64) -> Result<Vec<Point>> {
    let mut rng = SampleRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = m.sample(&mut rng);
            m.require(&x, "sampled point").map(|_| x)
        })
        .collect()
}

/// `count` pairs of points of `M` at distance at least `min_sep`.
///
/// Pairs are drawn sequentially from one stream, so a call with a larger
/// `count` extends the list produced with a smaller one.
pub fn sample_pairs(
    m: &SubsetSpec,
    count: usize,
    seed: u64,
    min_sep: f64,
) -> Result<Vec<(Point, Point)>> {
    if !(min_sep > 0.0) {
        return Err(FrameError::Precondition(format!(
            "min_sep must be positive, got {min_sep}"
        )));
    }
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    for k in 0..count {
        let mut found = None;
        for _ in 0..PAIR_RETRY_BUDGET {
            let x = m.sample(&mut rng);
            let y = m.sample(&mut rng);
            if m.distance(&x, &y) >= min_sep {
                found = Some((x, y));
                break;
            }
        }
        let (x, y) = found.ok_or_else(|| {
            FrameError::SamplerExhausted(format!(
                "no pair with separation >= {min_sep} in `{}` after {PAIR_RETRY_BUDGET} draws (pair {k})",
                m.description()
            ))
        })?;
        m.require(&x, "sampled point")?;
        m.require(&y, "sampled point")?;
        pairs.push((x, y));
    }
    Ok(pairs)
}

/// A truncated ℓ^p coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqVec {
    entries: Vec<Complex64>,
    p: f64,
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(FrameError::InvalidExponent(p))
    }
}

impl SeqVec {
    pub fn new(entries: Vec<Complex64>, p: f64) -> Result<Self> {
        check_exponent(p)?;
        if entries.is_empty() {
            return Err(FrameError::EmptySequence);
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FrameError::NonFinite("sequence entries".into()));
        }
        Ok(Self { entries, p })
    }

    pub fn from_real(entries: &[f64], p: f64) -> Result<Self> {
        Self::new(
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            p,
        )
    }

    pub fn zeros(len: usize, p: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], p)
    }

    /// The canonical basis vector `e_n` (1-based) of length `len`.
    pub fn basis_vector(n: usize, len: usize, p: f64) -> Result<Self> {
        if n == 0 || n > len {
            return Err(FrameError::IndexOutOfRange { index: n, len });
        }
        let mut v = Self::zeros(len, p)?;
        v.entries[n - 1] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// The coordinate functional `ζ_n` (1-based).
    pub fn coordinate(&self, n: usize) -> Result<Complex64> {
        if n == 0 || n > self.len() {
            return Err(FrameError::IndexOutOfRange {
                index: n,
                len: self.len(),
            });
        }
        Ok(self.entries[n - 1])
    }

    pub fn lp_norm(&self) -> f64 {
        lp_sum(self.entries.iter().map(|z| z.norm()), self.p)
    }

    /// `self + c * other`; panics on a length mismatch.
    pub fn axpy(&self, c: Complex64, other: &SeqVec) -> SeqVec {
        assert_eq!(self.len(), other.len(), "length mismatch in axpy");
        SeqVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + c * b)
                .collect(),
            p: self.p,
        }
    }

    pub fn scale(&self, c: Complex64) -> SeqVec {
        SeqVec {
            entries: self.entries.iter().map(|z| z * c).collect(),
            p: self.p,
        }
    }

    pub fn max_abs_diff(&self, other: &SeqVec) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &SeqVec {
    type Output = SeqVec;
    fn add(self, rhs: &SeqVec) -> SeqVec {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &SeqVec {
    type Output = SeqVec;
    fn sub(self, rhs: &SeqVec) -> SeqVec {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
    }
}

/// `(Σ|a_n|^p)^{1/p}`
pub fn lp_norm(v: &SeqVec) -> f64 {
    v.lp_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn lp_norm_examples() {
        assert_eq!(lp_norm(&SeqVec::zeros(5, 1.0).unwrap()), 0.0);
        assert_eq!(lp_norm(&SeqVec::from_real(&[3.0, 4.0], 2.0).unwrap()), 5.0);
        assert_eq!(
            lp_norm(&SeqVec::from_real(&[1.0, -2.0, 3.0], 1.0).unwrap()),
            6.0
        );
    }

    #[test]
    fn basis_vector_examples() {
        let e1 = SeqVec::basis_vector(1, 3, 2.0).unwrap();
        assert_eq!(e1.entries(), &[c(1.0), c(0.0), c(0.0)]);
        let e3 = SeqVec::basis_vector(3, 3, 2.0).unwrap();
        assert_eq!(e3.entries(), &[c(0.0), c(0.0), c(1.0)]);
        assert_eq!(
            SeqVec::basis_vector(4, 3, 2.0),
            Err(FrameError::IndexOutOfRange { index: 4, len: 3 })
        );
        assert!(SeqVec::basis_vector(0, 3, 2.0).is_err());
    }

    #[test]
    fn coordinate_examples() {
        let v = SeqVec::from_real(&[5.0, 7.0], 1.0).unwrap();
        assert_eq!(v.coordinate(2).unwrap(), c(7.0));
        let e2 = SeqVec::basis_vector(2, 4, 1.0).unwrap();
        assert_eq!(e2.coordinate(2).unwrap(), c(1.0));
        assert_eq!(e2.coordinate(3).unwrap(), c(0.0));
        assert!(e2.coordinate(5).is_err());
    }

    #[test]
    fn seqvec_rejects_bad_exponent_and_empty() {
        assert_eq!(
            SeqVec::zeros(3, 0.5),
            Err(FrameError::InvalidExponent(0.5))
        );
        assert!(SeqVec::zeros(3, f64::INFINITY).is_err());
        assert_eq!(SeqVec::zeros(0, 1.0), Err(FrameError::EmptySequence));
        assert!(SeqVec::from_real(&[f64::NAN], 1.0).is_err());
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(Point::new(vec![Complex64::new(f64::INFINITY, 0.0)], ScalarField::Real).is_err());
        assert!(Point::new(vec![], ScalarField::Real).is_err());
    }

    #[test]
    fn psum_norm_combines_components() {
        let norm = AmbientNorm::PSum {
            left_dim: 1,
            left: Box::new(AmbientNorm::Lp { q: 1.0 }),
            right: Box::new(AmbientNorm::Lp { q: 1.0 }),
            p: 2.0,
        };
        assert_eq!(norm.norm(&Point::real(&[3.0, -4.0])), 5.0);
        assert_eq!(AmbientNorm::Sup.norm(&Point::real(&[3.0, -4.0])), 4.0);
    }

    fn unit_interval() -> SubsetSpec {
        use rand::Rng;
        SubsetSpec::new(
            "[0, 1]",
            1,
            ScalarField::Real,
            AmbientNorm::Lp { q: 1.0 },
            |x| {
                let z = x.first();
                z.im.abs() <= MEMBERSHIP_TOL
                    && z.re >= -MEMBERSHIP_TOL
                    && z.re <= 1.0 + MEMBERSHIP_TOL
            },
            |rng| Point::real_scalar(rng.gen::<f64>()),
        )
    }

    #[test]
    fn sample_pairs_contract() {
        let m = unit_interval();
        assert!(sample_pairs(&m, 0, 7, DEFAULT_MIN_SEP).unwrap().is_empty());
        let a = sample_pairs(&m, 50, 7, 0.1).unwrap();
        let b = sample_pairs(&m, 50, 7, 0.1).unwrap();
        assert_eq!(a, b);
        for (x, y) in &a {
            assert!(m.contains(x) && m.contains(y));
            assert!(m.distance(x, y) >= 0.1);
        }
        let longer = sample_pairs(&m, 80, 7, 0.1).unwrap();
        assert_eq!(&longer[..50], &a[..]);
    }

    #[test]
    fn sample_pairs_exhaustion() {
        let m = unit_interval();
        let err = sample_pairs(&m, 1, 3, 2.0).unwrap_err();
        assert!(matches!(err, FrameError::SamplerExhausted(_)));
        assert!(sample_pairs(&m, 1, 3, 0.0).is_err());
    }

    fn seqvec_strategy(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), len)
    }

    fn to_seq(v: &[(f64, f64)], p: f64) -> SeqVec {
        SeqVec::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect(), p).unwrap()
    }

    proptest! {
        #[test]
        fn lp_norm_triangle_and_homogeneity(
            u in seqvec_strategy(6),
            v in seqvec_strategy(6),
            p in 1.0f64..6.0,
            alpha in (-10.0f64..10.0, -10.0f64..10.0),
        ) {
            let (u, v) = (to_seq(&u, p), to_seq(&v, p));
            let sum = &u + &v;
            let scale = 1.0 + u.lp_norm() + v.lp_norm();
            prop_assert!(sum.lp_norm() <= u.lp_norm() + v.lp_norm() + 1e-12 * scale);
            let a = Complex64::new(alpha.0, alpha.1);
            let lhs = u.scale(a).lp_norm();
            let rhs = a.norm() * u.lp_norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn coordinate_is_linear(
            u in prop::collection::vec(-1000i32..1000, 5),
            v in prop::collection::vec(-1000i32..1000, 5),
            alpha in -50i32..50,
            beta in -50i32..50,
            n in 1usize..=5,
        ) {
            // integer-valued data keeps every product and sum exact
            let u = SeqVec::from_real(&u.iter().map(|&x| x as f64).collect::<Vec<_>>(), 1.0).unwrap();
            let v = SeqVec::from_real(&v.iter().map(|&x| x as f64).collect::<Vec<_>>(), 1.0).unwrap();
            let (a, b) = (c(alpha as f64), c(beta as f64));
            let combo = &u.scale(a) + &v.scale(b);
            prop_assert_eq!(
                combo.coordinate(n).unwrap(),
                a * u.coordinate(n).unwrap() + b * v.coordinate(n).unwrap()
            );
        }

        #[test]
        fn basis_vectors_are_biorthogonal(len in 1usize..12, k in 1usize..12, n in 1usize..12) {
            prop_assume!(k <= len && n <= len);
            let e = SeqVec::basis_vector(k, len, 1.0).unwrap();
            let expected = if k == n { 1.0 } else { 0.0 };
            prop_assert_eq!(e.coordinate(n).unwrap(), c(expected));
        }
    }
}
