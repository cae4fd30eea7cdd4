//! The frame data model and its structural maps.
//!
//! A [`Frame`] pairs `N` scalar-valued Lipschitz maps `f_n` on a subset `M`
//! with `N` points `τ_n ∈ M`. From these come the analysis map
//! `θ_f x = (f_n(x))_n`, the synthesis operator `θ_τ a = Σ a_n τ_n` and the
//! frame map `S = θ_τ θ_f`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::solver::{solve_damped, Inversion, SolverCfg};
use crate::spaces::{check_exponent, Point, SampleRng, SeqVec, SubsetSpec};

/// Draws per random probe before giving up on landing in `M`.
const PROBE_RETRY_BUDGET: usize = 200;

type ScalarFn = dyn Fn(&Point) -> Result<Complex64> + Send + Sync;
type TailFn = dyn Fn(&Point) -> f64 + Send + Sync;

/// A scalar-valued map on `M`, optionally with a known Lipschitz constant.
#[derive(Clone)]
pub struct LipMap {
    eval: Arc<ScalarFn>,
    claimed_lip: Option<f64>,
    label: String,
}

impl LipMap {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&Point) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            claimed_lip: None,
            label: label.into(),
        }
    }

    /// Wraps an infallible map.
    pub fn from_fn<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&Point) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(label, move |x| Ok(eval(x)))
    }

    pub fn zero() -> Self {
        Self::from_fn("0", |_| Complex64::new(0.0, 0.0)).with_claimed_lip(0.0)
    }

    pub fn with_claimed_lip(mut self, lip: f64) -> Self {
        self.claimed_lip = Some(lip);
        self
    }

    pub fn eval(&self, x: &Point) -> Result<Complex64> {
        let v = (self.eval)(x)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(FrameError::Evaluation(format!(
                "map `{}` is not finite at {}",
                self.label, x
            )))
        }
    }

    pub fn claimed_lip(&self) -> Option<f64> {
        self.claimed_lip
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for LipMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipMap")
            .field("label", &self.label)
            .field("claimed_lip", &self.claimed_lip)
            .finish()
    }
}

/// What a frame claims to be. Only certification may upgrade it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindHint {
    /// approximate Schauder frame
    Asf,
    /// Schauder frame (frame map is the identity)
    Sf,
    /// Bessel sequence
    Bs,
    Unverified,
}

/// A Lipschitz p-ASF candidate truncated to `N` terms.
#[derive(Clone)]
pub struct Frame {
    subset: SubsetSpec,
    p: f64,
    maps: Vec<LipMap>,
    vectors: Vec<Point>,
    tail: Arc<TailFn>,
    kind_hint: KindHint,
    label: String,
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("label", &self.label)
            .field("subset", &self.subset)
            .field("p", &self.p)
            .field("N", &self.maps.len())
            .field("vectors", &self.vectors)
            .field("kind_hint", &self.kind_hint)
            .finish()
    }
}

impl Frame {
    /// Validates `len(maps) = len(vectors) >= 1`, `1 <= p < ∞` and `τ_n ∈ M`.
    /// The tail bound defaults to 0 (exact finite frame).
    pub fn new(subset: SubsetSpec, p: f64, maps: Vec<LipMap>, vectors: Vec<Point>) -> Result<Self> {
        check_exponent(p)?;
        if maps.is_empty() {
            return Err(FrameError::EmptySequence);
        }
        if maps.len() != vectors.len() {
            return Err(FrameError::LengthMismatch {
                expected: maps.len(),
                got: vectors.len(),
            });
        }
        for (n, tau) in vectors.iter().enumerate() {
            subset.require(tau, &format!("τ_{}", n + 1))?;
        }
        Ok(Self {
            subset,
            p,
            maps,
            vectors,
            tail: Arc::new(|_| 0.0),
            kind_hint: KindHint::Unverified,
            label: "frame".into(),
        })
    }

    pub fn with_tail_bound<T>(mut self, tail: T) -> Self
    where
        T: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        self.tail = Arc::new(tail);
        self
    }

    pub fn with_kind_hint(mut self, kind: KindHint) -> Self {
        self.kind_hint = kind;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same vectors and subset, new maps.
    pub fn with_maps(&self, maps: Vec<LipMap>) -> Result<Frame> {
        if maps.len() != self.len() {
            return Err(FrameError::LengthMismatch {
                expected: self.len(),
                got: maps.len(),
            });
        }
        let mut out = self.clone();
        out.maps = maps;
        out.kind_hint = KindHint::Unverified;
        Ok(out)
    }

    pub fn subset(&self) -> &SubsetSpec {
        &self.subset
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Truncation length `N`.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.subset.ambient_dim()
    }

    pub fn maps(&self) -> &[LipMap] {
        &self.maps
    }

    pub fn vectors(&self) -> &[Point] {
        &self.vectors
    }

    pub fn kind_hint(&self) -> KindHint {
        self.kind_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Bound on the norm of the omitted series tail `Σ_{n>N} f_n(x) τ_n`.
    pub fn tail_bound(&self, x: &Point) -> f64 {
        (self.tail)(x).max(0.0)
    }

    /// Checks that `other` has the same subset, exponent and length.
    pub fn require_compatible(&self, other: &Frame) -> Result<()> {
        if !self.subset.same_as(&other.subset) {
            return Err(FrameError::FrameMismatch(format!(
                "subsets differ: `{}` vs `{}`",
                self.subset.description(),
                other.subset.description()
            )));
        }
        if self.p != other.p {
            return Err(FrameError::FrameMismatch(format!(
                "exponents differ: {} vs {}",
                self.p, other.p
            )));
        }
        if self.len() != other.len() {
            return Err(FrameError::FrameMismatch(format!(
                "lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// `θ_f x = (f_n(x))_n` for `x ∈ M`.
    pub fn analysis(&self, x: &Point) -> Result<SeqVec> {
        self.subset.require(x, "x")?;
        self.analysis_unchecked(x)
    }

    /// `θ_f` evaluated without the membership check; used on iterates and
    /// partial sums that may leave `M`.
    pub(crate) fn analysis_unchecked(&self, x: &Point) -> Result<SeqVec> {
        let entries = self
            .maps
            .iter()
            .map(|f| f.eval(x))
            .collect::<Result<Vec<_>>>()?;
        SeqVec::new(entries, self.p)
    }

    /// `θ_τ a = Σ a_n τ_n`, evaluated in the ambient space.
    pub fn synthesis(&self, a: &SeqVec) -> Result<Point> {
        if a.len() != self.len() {
            return Err(FrameError::LengthMismatch {
                expected: self.len(),
                got: a.len(),
            });
        }
        if a.p() != self.p {
            return Err(FrameError::ExponentMismatch {
                expected: self.p,
                got: a.p(),
            });
        }
        Ok(self.combine(a.entries()))
    }

    fn combine(&self, coeffs: &[Complex64]) -> Point {
        coeffs
            .iter()
            .zip(&self.vectors)
            .fold(Point::zeros(self.dim(), self.subset.field()), |acc, (c, tau)| {
                acc.axpy(*c, tau)
            })
    }

    /// `S x = θ_τ θ_f x`.
    pub fn frame_map(&self, x: &Point) -> Result<Point> {
        let a = self.analysis(x)?;
        self.synthesis(&a)
    }

    /// `S x = Σ f_n(x) τ_n`, accumulated one term at a time without forming
    /// the coefficient vector.
    pub fn frame_map_termwise(&self, x: &Point) -> Result<Point> {
        self.subset.require(x, "x")?;
        let mut acc = Point::zeros(self.dim(), self.subset.field());
        for (f, tau) in self.maps.iter().zip(&self.vectors) {
            acc = acc.axpy(f.eval(x)?, tau);
        }
        Ok(acc)
    }

    pub(crate) fn frame_map_unchecked(&self, x: &Point) -> Result<Point> {
        let a = self.analysis_unchecked(x)?;
        Ok(self.combine(a.entries()))
    }

    /// `S^{-1} y`, found by damped fixed-point iteration.
    pub fn invert_frame_map(&self, y: &Point, cfg: &SolverCfg) -> Result<Point> {
        self.invert_frame_map_with_stats(y, cfg).map(|inv| inv.point)
    }

    /// Like [`Frame::invert_frame_map`], also reporting iteration count and
    /// final residual. Iterates may leave `M`; the limit may not.
    pub fn invert_frame_map_with_stats(&self, y: &Point, cfg: &SolverCfg) -> Result<Inversion> {
        if y.dim() != self.dim() {
            return Err(FrameError::DimensionMismatch {
                expected: self.dim(),
                got: y.dim(),
            });
        }
        let inv = solve_damped(
            |x| self.frame_map_unchecked(x),
            y,
            self.subset.norm(),
            cfg,
            |x| self.tail_bound(x),
        )?;
        self.subset.require(&inv.point, "S^{-1} y")?;
        Ok(inv)
    }

    /// `Σ f_n(x) S^{-1} τ_n`.
    pub fn reconstruct(&self, x: &Point, cfg: &SolverCfg) -> Result<Point> {
        let a = self.analysis(x)?;
        let mut acc = Point::zeros(self.dim(), self.subset.field());
        for (c, tau) in a.entries().iter().zip(&self.vectors) {
            let dual_vec = self.invert_frame_map(tau, cfg)?;
            acc = acc.axpy(*c, &dual_vec);
        }
        Ok(acc)
    }

    /// `P a = θ_f S^{-1} θ_τ a`, a projection onto `θ_f(M)`.
    pub fn coefficient_projection(&self, a: &SeqVec, cfg: &SolverCfg) -> Result<SeqVec> {
        let y = self.synthesis(a)?;
        let x = self.invert_frame_map(&y, cfg)?;
        self.analysis(&x)
    }

    /// Coefficient vectors whose synthesis lies in `M`: all `N` basis
    /// vectors followed by `count` random ones. Deterministic in `seed`.
    pub fn probe_coefficients(&self, count: usize, seed: u64) -> Result<Vec<SeqVec>> {
        let n = self.len();
        let mut probes = (1..=n)
            .map(|k| SeqVec::basis_vector(k, n, self.p))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = SampleRng::seed_from_u64(seed);
        for _ in 0..count {
            probes.push(self.random_probe(&mut rng)?);
        }
        Ok(probes)
    }

    /// `t θ_f(x) + (1 − t) e_k + noise`, redrawn until the synthesis lands in `M`.
    fn random_probe(&self, rng: &mut SampleRng) -> Result<SeqVec> {
        let n = self.len();
        for attempt in 0..PROBE_RETRY_BUDGET {
            let x = self.subset.sample(rng);
            let t: f64 = rng.gen();
            let k = rng.gen_range(1..=n);
            let noise_scale = if attempt < PROBE_RETRY_BUDGET / 2 { 0.05 } else { 0.0 };
            let base = self
                .analysis_unchecked(&x)?
                .scale(Complex64::new(t, 0.0))
                .axpy(Complex64::new(1.0 - t, 0.0), &SeqVec::basis_vector(k, n, self.p)?);
            let noise = SeqVec::new(
                (0..n)
                    .map(|_| Complex64::new(noise_scale * rng.gen_range(-1.0..1.0), 0.0))
                    .collect(),
                self.p,
            )?;
            let a = &base + &noise;
            if self.subset.contains(&self.combine(a.entries())) {
                return Ok(a);
            }
        }
        Err(FrameError::SamplerExhausted(format!(
            "no probe coefficient vector with synthesis in `{}`",
            self.subset.description()
        )))
    }
}
