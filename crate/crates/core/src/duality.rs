//! Canonical duals, dual verification, and the parametrisation of all duals
//! by a Lipschitz map `U: M → ℓ^p` and a linear map `V: ℓ^p → X`.
//!
//! For a frame `(f, τ)` with frame map `S`, every dual `(g, ω)` has the form
//!
//! ```text
//! g_n = f_n S⁻¹ + ζ_n U − f_n S⁻¹ θ_τ U
//! ω_n = S⁻¹ τ_n + V e_n − V θ_f S⁻¹ τ_n
//! ```
//!
//! and `U = 0, V = 0` gives the canonical dual `(f_n S⁻¹, S⁻¹ τ_n)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FrameError, Result};
use crate::frame::{Frame, KindHint, LipMap};
use crate::solver::{solve_damped, SolverCfg};
use crate::spaces::{sample_points, Point, ScalarField, SeqVec};

/// Seeded starting points used to probe invertibility of the composite map.
const INVERTIBILITY_PROBES: usize = 20;
const INVERTIBILITY_SEED: u64 = 0x1f2e3d;
/// Relative distance allowed between a probe point and its recovered preimage.
const INVERTIBILITY_TOL: f64 = 1e-6;
/// Samples and tolerance of the duality postcondition in [`dual_from_parameters`].
const DUAL_CHECK_SAMPLES: usize = 20;
const DUAL_CHECK_SEED: u64 = 0x5eed;
const DUAL_CHECK_TOL: f64 = 1e-8;
const CACHE_CAPACITY: usize = 1 << 16;

/// `S⁻¹` of a frame with a memo cache keyed on the exact bits of the argument.
pub struct FrameInverse {
    frame: Frame,
    cfg: SolverCfg,
    cache: Mutex<HashMap<Vec<u64>, Point>>,
}

impl FrameInverse {
    pub fn new(frame: Frame, cfg: SolverCfg) -> Self {
        Self {
            frame,
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn key(y: &Point) -> Vec<u64> {
        y.coords()
            .iter()
            .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
            .collect()
    }

    pub fn apply(&self, y: &Point) -> Result<Point> {
        let key = Self::key(y);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let x = self.frame.invert_frame_map(y, &self.cfg)?;
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, x.clone());
        Ok(x)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }
}

type PointToSeq = dyn Fn(&Point) -> Result<SeqVec> + Send + Sync;
type SeqToPoint = dyn Fn(&SeqVec) -> Result<Point> + Send + Sync;

/// A Lipschitz map `U: M → ℓ^p`.
#[derive(Clone)]
pub struct LipOperatorU {
    eval: Arc<PointToSeq>,
    label: String,
}

impl LipOperatorU {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&Point) -> Result<SeqVec> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            label: label.into(),
        }
    }

    pub fn zero(len: usize, p: f64) -> Self {
        Self::new("0", move |_| SeqVec::zeros(len, p))
    }

    /// `U = θ_f`.
    pub fn analysis_of(frame: &Frame) -> Self {
        let frame = frame.clone();
        Self::new(format!("θ_f of {}", frame.label()), move |x| frame.analysis(x))
    }

    /// `U = θ_f S⁻¹`, the analysis map of the canonical dual.
    pub fn canonical_analysis(frame: &Frame, cfg: &SolverCfg) -> Self {
        let inverse = Arc::new(FrameInverse::new(frame.clone(), *cfg));
        Self::new(format!("θ_f S⁻¹ of {}", frame.label()), move |x| {
            let y = inverse.apply(x)?;
            inverse.frame().analysis(&y)
        })
    }

    pub fn eval(&self, x: &Point) -> Result<SeqVec> {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for LipOperatorU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipOperatorU").field("label", &self.label).finish()
    }
}

/// A linear map `V: ℓ^p → X` stored as a `dim × N` matrix whose n-th
/// column is `V e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOperatorV {
    matrix: DMatrix<Complex64>,
    label: String,
}

impl LinOperatorV {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FrameError::NonFinite("operator matrix".into()));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn zero(dim: usize, len: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, len),
            label: "0".into(),
        }
    }

    /// Matrix with columns `points[n]`.
    pub fn from_columns(points: &[Point], label: impl Into<String>) -> Result<Self> {
        let dim = points.first().map_or(0, Point::dim);
        let matrix = DMatrix::from_fn(dim, points.len(), |i, j| points[j].coords()[i]);
        Self::new(matrix, label)
    }

    /// `V = θ_τ`.
    pub fn synthesis_of(frame: &Frame) -> Self {
        Self::from_columns(frame.vectors(), format!("θ_τ of {}", frame.label()))
            .expect("frame vectors are finite")
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `V e_n` (1-based).
    pub fn column(&self, n: usize) -> Result<Point> {
        if n == 0 || n > self.matrix.ncols() {
            return Err(FrameError::IndexOutOfRange {
                index: n,
                len: self.matrix.ncols(),
            });
        }
        let coords: Vec<Complex64> = self.matrix.column(n - 1).iter().copied().collect();
        Point::new(coords, self.field())
    }

    fn field(&self) -> ScalarField {
        if self.matrix.iter().all(|z| z.im == 0.0) {
            ScalarField::Real
        } else {
            ScalarField::Complex
        }
    }

    pub fn apply(&self, a: &SeqVec) -> Result<Point> {
        if a.len() != self.matrix.ncols() {
            return Err(FrameError::LengthMismatch {
                expected: self.matrix.ncols(),
                got: a.len(),
            });
        }
        let coords: Vec<Complex64> = (0..self.matrix.nrows())
            .map(|i| {
                a.entries()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| self.matrix[(i, j)] * c)
                    .sum()
            })
            .collect();
        let field = if self.field() == ScalarField::Real && a.entries().iter().all(|z| z.im == 0.0) {
            ScalarField::Real
        } else {
            ScalarField::Complex
        };
        Point::new(coords, field)
    }
}

/// A general coefficient-to-point map `ℓ^p → X`; the left inverses of `θ_f`
/// are linear only when `S⁻¹` is.
#[derive(Clone)]
pub struct CoefficientMap {
    eval: Arc<SeqToPoint>,
    label: String,
}

impl CoefficientMap {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&SeqVec) -> Result<Point> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            label: label.into(),
        }
    }

    pub fn eval(&self, a: &SeqVec) -> Result<Point> {
        (self.eval)(a)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Matrix of the map evaluated on the basis vectors; meaningful only
    /// when the map is linear.
    pub fn to_matrix(&self, len: usize, p: f64) -> Result<LinOperatorV> {
        let columns = (1..=len)
            .map(|n| self.eval(&SeqVec::basis_vector(n, len, p)?))
            .collect::<Result<Vec<_>>>()?;
        LinOperatorV::from_columns(&columns, format!("matrix of {}", self.label))
    }
}

impl fmt::Debug for CoefficientMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientMap").field("label", &self.label).finish()
    }
}

/// `({f_n S⁻¹}, {S⁻¹ τ_n})`. `S⁻¹` is evaluated lazily through the solver,
/// memoised per argument.
pub fn canonical_dual(frame: &Frame, cfg: &SolverCfg) -> Result<Frame> {
    let inverse = Arc::new(FrameInverse::new(frame.clone(), *cfg));
    let vectors = frame
        .vectors()
        .iter()
        .map(|tau| inverse.apply(tau))
        .collect::<Result<Vec<_>>>()?;
    let maps = (0..frame.len())
        .map(|n| {
            let inverse = Arc::clone(&inverse);
            let f = frame.maps()[n].clone();
            LipMap::new(format!("{} ∘ S⁻¹", f.label()), move |x| f.eval(&inverse.apply(x)?))
        })
        .collect();
    let source = frame.clone();
    Ok(Frame::new(frame.subset().clone(), frame.p(), maps, vectors)?
        .with_tail_bound(move |x| source.tail_bound(x))
        .with_kind_hint(KindHint::Unverified)
        .with_label(format!("canonical dual of {}", frame.label())))
}

/// Largest sampled values of `‖θ_τ θ_g x − x‖` and `‖θ_ω θ_f x − x‖`.
pub fn duality_defect(f: &Frame, g: &Frame, samples: usize, seed: u64) -> Result<(f64, f64)> {
    f.require_compatible(g)?;
    let m = f.subset();
    let mut worst = (0.0f64, 0.0f64);
    for x in sample_points(m, samples, seed)? {
        let via_g = f.synthesis(&g.analysis(&x)?)?;
        let via_f = g.synthesis(&f.analysis(&x)?)?;
        worst.0 = worst.0.max(m.distance(&via_g, &x));
        worst.1 = worst.1.max(m.distance(&via_f, &x));
    }
    Ok(worst)
}

/// True iff both mixed compositions reproduce every sampled `x` to `tol`.
pub fn is_dual(f: &Frame, g: &Frame, samples: usize, seed: u64, tol: f64) -> Result<bool> {
    let (a, b) = duality_defect(f, g, samples, seed)?;
    Ok(a <= tol && b <= tol)
}

/// `R = θ_f S⁻¹ + (I − θ_f S⁻¹ θ_τ) U`, a Lipschitz right inverse of `θ_τ`.
pub fn right_inverse_family(frame: &Frame, u: &LipOperatorU, cfg: &SolverCfg) -> Result<LipOperatorU> {
    let inverse = Arc::new(FrameInverse::new(frame.clone(), *cfg));
    let u = u.clone();
    let label = format!("right inverse of θ_τ from U = {}", u.label());
    Ok(LipOperatorU::new(label, move |x| {
        let frame = inverse.frame();
        let canonical = frame.analysis(&inverse.apply(x)?)?;
        let ux = u.eval(x)?;
        let projected = frame.analysis(&inverse.apply(&frame.synthesis(&ux)?)?)?;
        Ok(&(&canonical + &ux) - &projected)
    }))
}

/// `L = S⁻¹ θ_τ + V (I − θ_f S⁻¹ θ_τ)`, a left inverse of `θ_f`.
pub fn left_inverse_family(frame: &Frame, v: &LinOperatorV, cfg: &SolverCfg) -> Result<CoefficientMap> {
    if v.matrix().shape() != (frame.dim(), frame.len()) {
        return Err(FrameError::Precondition(format!(
            "V must be {}x{}, got {}x{}",
            frame.dim(),
            frame.len(),
            v.matrix().nrows(),
            v.matrix().ncols()
        )));
    }
    let inverse = Arc::new(FrameInverse::new(frame.clone(), *cfg));
    let v = v.clone();
    let label = format!("left inverse of θ_f from V = {}", v.label());
    Ok(CoefficientMap::new(label, move |a| {
        let frame = inverse.frame();
        let base = inverse.apply(&frame.synthesis(a)?)?;
        let correction = &v.apply(a)? - &v.apply(&frame.analysis(&base)?)?;
        Ok(&base + &correction)
    }))
}

/// The dual frame determined by `(U, V)`.
///
/// Checks that `V e_n ∈ M` and `VU(x) ∈ M` on samples, that
/// `S⁻¹ + VU − V θ_f S⁻¹ θ_τ U` can be inverted from seeded starting
/// points, and that the result is a dual of `frame` on samples.
pub fn dual_from_parameters(
    frame: &Frame,
    u: &LipOperatorU,
    v: &LinOperatorV,
    cfg: &SolverCfg,
) -> Result<Frame> {
    let (dim, len, p) = (frame.dim(), frame.len(), frame.p());
    if v.matrix().shape() != (dim, len) {
        return Err(FrameError::Precondition(format!(
            "V must be {dim}x{len}, got {}x{}",
            v.matrix().nrows(),
            v.matrix().ncols()
        )));
    }
    let m = frame.subset();
    for n in 1..=len {
        m.require(&v.column(n)?, &format!("V e_{n}"))
            .map_err(|e| FrameError::Precondition(e.to_string()))?;
    }
    let probes = sample_points(m, INVERTIBILITY_PROBES, INVERTIBILITY_SEED)?;
    for x in &probes {
        m.require(&v.apply(&u.eval(x)?)?, "VU x")
            .map_err(|e| FrameError::Precondition(e.to_string()))?;
    }

    let inverse = Arc::new(FrameInverse::new(frame.clone(), *cfg));

    // ω_n = S⁻¹τ_n + V e_n − V θ_f S⁻¹ τ_n
    let vectors = frame
        .vectors()
        .iter()
        .enumerate()
        .map(|(n, tau)| {
            let s_inv_tau = inverse.apply(tau)?;
            let correction = &v.column(n + 1)? - &v.apply(&frame.analysis(&s_inv_tau)?)?;
            Ok(&s_inv_tau + &correction)
        })
        .collect::<Result<Vec<_>>>()?;

    // g_n(x) = f_n(S⁻¹x) + ζ_n(Ux) − f_n(S⁻¹ θ_τ U x)
    let maps = (0..len)
        .map(|n| {
            let inverse = Arc::clone(&inverse);
            let f = frame.maps()[n].clone();
            let u = u.clone();
            LipMap::new(format!("g_{}", n + 1), move |x| {
                let ux = u.eval(x)?;
                let base = f.eval(&inverse.apply(x)?)?;
                let lifted = inverse.apply(&inverse.frame().synthesis(&ux)?)?;
                Ok(base + ux.coordinate(n + 1)? - f.eval(&lifted)?)
            })
        })
        .collect();

    // composite W = S⁻¹ + VU − V θ_f S⁻¹ θ_τ U must be invertible
    let composite = |x: &Point| -> Result<Point> {
        let ux = u.eval(x)?;
        let lifted = inverse.apply(&frame.synthesis(&ux)?)?;
        let correction = &v.apply(&ux)? - &v.apply(&frame.analysis(&lifted)?)?;
        Ok(&inverse.apply(x)? + &correction)
    };
    for x in &probes {
        let y = composite(x)?;
        let recovered = solve_damped(composite, &y, m.norm(), cfg, |_| 0.0).map_err(|e| {
            FrameError::NotInvertible(format!(
                "S⁻¹ + VU − Vθ_f S⁻¹θ_τ U failed to invert at {y}: {e}"
            ))
        })?;
        let miss = m.distance(&recovered.point, x);
        if miss > INVERTIBILITY_TOL * (1.0 + m.norm_of(x)) {
            return Err(FrameError::NotInvertible(format!(
                "S⁻¹ + VU − Vθ_f S⁻¹θ_τ U is not injective: {x} and {} share the image {y}",
                recovered.point
            )));
        }
    }

    let source = frame.clone();
    let dual = Frame::new(m.clone(), p, maps, vectors)?
        .with_tail_bound(move |x| source.tail_bound(x))
        .with_label(format!(
            "dual of {} from U = {}, V = {}",
            frame.label(),
            u.label(),
            v.label()
        ));
    let (left, right) = duality_defect(frame, &dual, DUAL_CHECK_SAMPLES, DUAL_CHECK_SEED)?;
    if left > DUAL_CHECK_TOL || right > DUAL_CHECK_TOL {
        return Err(FrameError::Precondition(format!(
            "parameters do not yield a dual: defects {left:e}, {right:e}"
        )));
    }
    Ok(dual)
}
