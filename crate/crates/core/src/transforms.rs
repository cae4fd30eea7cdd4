//! Similarity, orthogonality, interpolation and direct sums of frames.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::duality::FrameInverse;
use crate::error::{FrameError, Result};
use crate::frame::{Frame, KindHint, LipMap};
use crate::solver::SolverCfg;
use crate::spaces::{sample_points, Point};

type PointMap = dyn Fn(&Point) -> Result<Point> + Send + Sync;

/// Sample count and seed used by [`apply_similarity`] to check `T(M) ⊆ M`.
const RANGE_CHECK_SAMPLES: usize = 64;
const RANGE_CHECK_SEED: u64 = 0xa11ce;

/// An invertible bi-Lipschitz map `M → M`, with its inverse when known.
#[derive(Clone)]
pub struct BiLipMap {
    forward: Arc<PointMap>,
    inverse: Option<Arc<PointMap>>,
    label: String,
}

impl BiLipMap {
    pub fn new<F>(label: impl Into<String>, forward: F) -> Self
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        Self {
            forward: Arc::new(forward),
            inverse: None,
            label: label.into(),
        }
    }

    pub fn with_inverse<G>(mut self, inverse: G) -> Self
    where
        G: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn identity() -> Self {
        Self::new("I", |x| Ok(x.clone())).with_inverse(|x| Ok(x.clone()))
    }

    /// `x ↦ c·x`.
    pub fn scalar(c: Complex64) -> Self {
        Self::new(format!("{c}·I"), move |x| Ok(x.scale(c))).with_inverse(move |x| Ok(x.scale(1.0 / c)))
    }

    pub fn from_linear(map: &AmbientLinMap) -> Self {
        let forward = map.clone();
        let mut out = Self::new(format!("linear {}", map.label()), move |x| forward.apply(x));
        if let Ok(inv) = map.inverse() {
            out.inverse = Some(Arc::new(move |x| inv.apply(x)));
        }
        out
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        (self.forward)(x)
    }

    pub fn apply_inverse(&self, x: &Point) -> Result<Point> {
        match &self.inverse {
            Some(inv) => inv(x),
            None => Err(FrameError::Precondition(format!(
                "no inverse known for `{}`",
                self.label
            ))),
        }
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &BiLipMap) -> BiLipMap {
        let (f, g) = (self.clone(), other.clone());
        let mut out = BiLipMap::new(format!("{} ∘ {}", self.label, other.label), move |x| {
            f.apply(&g.apply(x)?)
        });
        if self.has_inverse() && other.has_inverse() {
            let (f, g) = (self.clone(), other.clone());
            out.inverse = Some(Arc::new(move |x| g.apply_inverse(&f.apply_inverse(x)?)));
        }
        out
    }
}

impl fmt::Debug for BiLipMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BiLipMap")
            .field("label", &self.label)
            .field("has_inverse", &self.inverse.is_some())
            .finish()
    }
}

/// A bounded linear operator on the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientLinMap {
    matrix: DMatrix<Complex64>,
    label: String,
}

impl AmbientLinMap {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(FrameError::Precondition(format!(
                "ambient operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FrameError::NonFinite("ambient operator".into()));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim) * c,
            label: format!("{c}·I"),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim() {
            return Err(FrameError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let coords: Vec<Complex64> = (0..self.dim())
            .map(|i| x.coords().iter().enumerate().map(|(j, z)| self.matrix[(i, j)] * z).sum())
            .collect();
        let field = if self.matrix.iter().all(|z| z.im == 0.0) {
            x.field()
        } else {
            crate::spaces::ScalarField::Complex
        };
        Point::new(coords, field)
    }

    pub fn inverse(&self) -> Result<AmbientLinMap> {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| FrameError::NotInvertible(format!("operator `{}`", self.label)))?;
        AmbientLinMap::new(inv, format!("({})⁻¹", self.label))
    }

    /// Largest singular value; the operator norm for the Euclidean norm.
    pub fn spectral_norm(&self) -> f64 {
        self.matrix
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(0.0, |a: f64, &b| a.max(b))
    }
}

/// Sampling parameters shared by the precondition checks of this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckCfg {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckCfg {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 0,
            tol: 1e-10,
        }
    }
}

fn require_maps_into(
    frame: &Frame,
    name: &str,
    map: impl Fn(&Point) -> Result<Point>,
    samples: &[Point],
) -> Result<()> {
    for x in samples {
        let y = map(x)?;
        if !frame.subset().contains(&y) {
            return Err(FrameError::Precondition(format!(
                "{name} does not map M into M: {name}({x}) = {y}"
            )));
        }
    }
    Ok(())
}

/// `g_n = f_n ∘ T_{f,g}`, `ω_n = T_{τ,ω} τ_n`.
pub fn apply_similarity(frame: &Frame, tfg: &BiLipMap, ttw: &AmbientLinMap) -> Result<Frame> {
    let samples = sample_points(frame.subset(), RANGE_CHECK_SAMPLES, RANGE_CHECK_SEED)?;
    require_maps_into(frame, "T_{f,g}", |x| tfg.apply(x), &samples)?;
    require_maps_into(frame, "T_{τ,ω}", |x| ttw.apply(x), &samples)?;
    let vectors = frame
        .vectors()
        .iter()
        .map(|tau| ttw.apply(tau))
        .collect::<Result<Vec<_>>>()?;
    let maps = frame
        .maps()
        .iter()
        .map(|f| {
            let (f, t) = (f.clone(), tfg.clone());
            LipMap::new(format!("{} ∘ {}", f.label(), t.label()), move |x| f.eval(&t.apply(x)?))
        })
        .collect();
    let scale = ttw.spectral_norm();
    let (source, t) = (frame.clone(), tfg.clone());
    Ok(Frame::new(frame.subset().clone(), frame.p(), maps, vectors)?
        .with_tail_bound(move |x| match t.apply(x) {
            Ok(y) => scale * source.tail_bound(&y),
            Err(_) => scale * source.tail_bound(x),
        })
        .with_kind_hint(KindHint::Unverified)
        .with_label(format!(
            "similar to {} via ({}, {})",
            frame.label(),
            tfg.label(),
            ttw.label()
        )))
}

/// The similarity maps recovered from a pair of frames.
#[derive(Debug, Clone)]
pub struct RecoveredSimilarity {
    /// `T_{f,g} = S_{f,τ}⁻¹ θ_τ θ_g`, with inverse `S_{g,ω}⁻¹ θ_ω θ_f`.
    pub analysis_map: BiLipMap,
    /// `T_{τ,ω} = θ_ω θ_f S_{f,τ}⁻¹`, with inverse `θ_τ θ_g S_{g,ω}⁻¹`.
    pub synthesis_map: BiLipMap,
}

/// Builds `T_{f,g}` and `T_{τ,ω}` from the frames alone. When `g` really is
/// similar to `f` these are the unique maps realising the similarity.
pub fn recover_similarity(f: &Frame, g: &Frame, cfg: &SolverCfg) -> Result<RecoveredSimilarity> {
    f.require_compatible(g)?;
    cfg.validate()?;
    let f_inv = Arc::new(FrameInverse::new(f.clone(), *cfg));
    let g_inv = Arc::new(FrameInverse::new(g.clone(), *cfg));

    let (fi, gg) = (Arc::clone(&f_inv), g.clone());
    let (gi, ff) = (Arc::clone(&g_inv), f.clone());
    let analysis_map = BiLipMap::new("S_f⁻¹ θ_τ θ_g", move |x| {
        fi.apply(&fi.frame().synthesis(&gg.analysis(x)?)?)
    })
    .with_inverse(move |x| gi.apply(&gi.frame().synthesis(&ff.analysis(x)?)?));

    let (fi, gg) = (Arc::clone(&f_inv), g.clone());
    let (gi, ff) = (Arc::clone(&g_inv), f.clone());
    let synthesis_map = BiLipMap::new("θ_ω θ_f S_f⁻¹", move |x| {
        gg.synthesis(&fi.frame().analysis(&fi.apply(x)?)?)
    })
    .with_inverse(move |x| ff.synthesis(&gi.frame().analysis(&gi.apply(x)?)?));

    Ok(RecoveredSimilarity {
        analysis_map,
        synthesis_map,
    })
}

/// Largest sampled defects of `g_n = f_n ∘ T_{f,g}` and `ω_n = T_{τ,ω} τ_n`.
pub fn similarity_defect(
    f: &Frame,
    g: &Frame,
    tfg: &BiLipMap,
    ttw: &BiLipMap,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    f.require_compatible(g)?;
    let mut maps = 0.0f64;
    for x in sample_points(f.subset(), samples, seed)? {
        let tx = tfg.apply(&x)?;
        for (fn_, gn) in f.maps().iter().zip(g.maps()) {
            maps = maps.max((gn.eval(&x)? - fn_.eval(&tx)?).norm());
        }
    }
    let mut vectors = 0.0f64;
    for (tau, omega) in f.vectors().iter().zip(g.vectors()) {
        vectors = vectors.max(f.subset().distance(&ttw.apply(tau)?, omega));
    }
    Ok((maps, vectors))
}

/// True iff `(tfg, ttw)` carry `f` onto `g` on samples, to `tol`.
pub fn verify_similarity(
    f: &Frame,
    g: &Frame,
    tfg: &BiLipMap,
    ttw: &BiLipMap,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    let (a, b) = similarity_defect(f, g, tfg, ttw, samples, seed)?;
    Ok(a <= tol && b <= tol)
}

/// Largest sampled difference between `P_{f,τ} a` and `P_{g,ω} a` (in ℓ^p)
/// over the probe vectors of `f`.
pub fn projection_gap(f: &Frame, g: &Frame, n_probes: usize, seed: u64, cfg: &SolverCfg) -> Result<f64> {
    f.require_compatible(g)?;
    let mut worst = 0.0f64;
    for a in f.probe_coefficients(n_probes, seed)? {
        let pf = f.coefficient_projection(&a, cfg)?;
        let pg = g.coefficient_projection(&a, cfg)?;
        worst = worst.max((&pf - &pg).lp_norm());
    }
    Ok(worst)
}

/// `P_{f,τ} = P_{g,ω}` on probe vectors, to `tol`.
pub fn projections_equal(
    f: &Frame,
    g: &Frame,
    n_probes: usize,
    seed: u64,
    tol: f64,
    cfg: &SolverCfg,
) -> Result<bool> {
    Ok(projection_gap(f, g, n_probes, seed, cfg)? <= tol)
}

/// Largest sampled norms of `θ_τ θ_g x` and `θ_ω θ_f x`.
pub fn orthogonality_defect(f: &Frame, g: &Frame, samples: usize, seed: u64) -> Result<(f64, f64)> {
    f.require_compatible(g)?;
    let m = f.subset();
    let mut worst = (0.0f64, 0.0f64);
    for x in sample_points(m, samples, seed)? {
        worst.0 = worst.0.max(m.norm_of(&f.synthesis(&g.analysis(&x)?)?));
        worst.1 = worst.1.max(m.norm_of(&g.synthesis(&f.analysis(&x)?)?));
    }
    Ok(worst)
}

/// Both mixed compositions vanish on samples, to `tol`.
pub fn is_orthogonal(f: &Frame, g: &Frame, samples: usize, seed: u64, tol: f64) -> Result<bool> {
    let (a, b) = orthogonality_defect(f, g, samples, seed)?;
    Ok(a <= tol && b <= tol)
}

fn require_schauder(frame: &Frame, name: &str, samples: &[Point], tol: f64) -> Result<()> {
    for x in samples {
        let err = frame.subset().distance(&frame.frame_map(x)?, x);
        if err > tol + frame.tail_bound(x) {
            return Err(FrameError::Precondition(format!(
                "{name} is not a Schauder frame: ‖Sx − x‖ = {err:e} at {x}"
            )));
        }
    }
    Ok(())
}

/// `({f_n A + g_n B}, {C τ_n + D ω_n})` for orthogonal Schauder frames `f`,
/// `g` and maps with `CA + DB = I` on `M`.
///
/// Every hypothesis is checked on samples; the first failure is returned as
/// a precondition error naming it.
#[allow(clippy::too_many_arguments)]
pub fn interpolate(
    f: &Frame,
    g: &Frame,
    a: &BiLipMap,
    b: &BiLipMap,
    c: &AmbientLinMap,
    d: &AmbientLinMap,
    check: &CheckCfg,
) -> Result<Frame> {
    f.require_compatible(g)?;
    let samples = sample_points(f.subset(), check.samples, check.seed)?;

    let (left, right) = orthogonality_defect(f, g, check.samples, check.seed)?;
    if left > check.tol || right > check.tol {
        return Err(FrameError::Precondition(format!(
            "frames are not orthogonal: mixed compositions reach {:e}",
            left.max(right)
        )));
    }
    require_schauder(f, "F", &samples, check.tol)?;
    require_schauder(g, "G", &samples, check.tol)?;
    require_maps_into(f, "A", |x| a.apply(x), &samples)?;
    require_maps_into(f, "B", |x| b.apply(x), &samples)?;
    require_maps_into(f, "C", |x| c.apply(x), &samples)?;
    require_maps_into(f, "D", |x| d.apply(x), &samples)?;
    for x in &samples {
        let combined = &c.apply(&a.apply(x)?)? + &d.apply(&b.apply(x)?)?;
        let err = f.subset().distance(&combined, x);
        if err > check.tol {
            return Err(FrameError::Precondition(format!(
                "CA + DB != I: ‖CAx + DBx − x‖ = {err:e} at {x}"
            )));
        }
    }

    let maps = f
        .maps()
        .iter()
        .zip(g.maps())
        .map(|(fn_, gn)| {
            let (fn_, gn, a, b) = (fn_.clone(), gn.clone(), a.clone(), b.clone());
            LipMap::new(format!("{}∘A + {}∘B", fn_.label(), gn.label()), move |x| {
                Ok(fn_.eval(&a.apply(x)?)? + gn.eval(&b.apply(x)?)?)
            })
        })
        .collect();
    let vectors = f
        .vectors()
        .iter()
        .zip(g.vectors())
        .map(|(tau, omega)| Ok(&c.apply(tau)? + &d.apply(omega)?))
        .collect::<Result<Vec<_>>>()?;
    let (cn, dn) = (c.spectral_norm(), d.spectral_norm());
    let (ff, gg, aa, bb) = (f.clone(), g.clone(), a.clone(), b.clone());
    let out = Frame::new(f.subset().clone(), f.p(), maps, vectors)?
        .with_tail_bound(move |x| {
            let ta = aa.apply(x).map_or(0.0, |y| ff.tail_bound(&y));
            let tb = bb.apply(x).map_or(0.0, |y| gg.tail_bound(&y));
            cn * ta + dn * tb
        })
        .with_kind_hint(KindHint::Unverified)
        .with_label(format!(
            "interpolation of {} and {} by ({}, {}, {}, {})",
            f.label(),
            g.label(),
            a.label(),
            b.label(),
            c.label(),
            d.label()
        ));
    for x in &samples {
        let err = out.subset().distance(&out.frame_map(x)?, x);
        if err > check.tol + out.tail_bound(x) {
            return Err(FrameError::Precondition(format!(
                "interpolated frame map is not the identity: error {err:e} at {x}"
            )));
        }
    }
    Ok(out.with_kind_hint(KindHint::Sf))
}

/// [`direct_sum_with`] under the default check configuration.
pub fn direct_sum(f: &Frame, g: &Frame) -> Result<Frame> {
    direct_sum_with(f, g, &CheckCfg::default())
}

/// `({f_n ⊕ g_n}, {τ_n ⊕ ω_n})` on `M ⊕ M` with the p-sum norm, where
/// `(f ⊕ g)(x ⊕ y) = f(x) + g(y)`.
pub fn direct_sum_with(f: &Frame, g: &Frame, check: &CheckCfg) -> Result<Frame> {
    f.require_compatible(g)?;
    let (left, right) = orthogonality_defect(f, g, check.samples, check.seed)?;
    if left > check.tol || right > check.tol {
        return Err(FrameError::Precondition(format!(
            "direct sum needs orthogonal frames: mixed compositions reach {:e}",
            left.max(right)
        )));
    }
    let split = f.dim();
    let subset = f.subset().direct_sum(g.subset(), f.p());
    let maps = f
        .maps()
        .iter()
        .zip(g.maps())
        .map(|(fn_, gn)| {
            let (fn_, gn) = (fn_.clone(), gn.clone());
            LipMap::new(format!("{} ⊕ {}", fn_.label(), gn.label()), move |z| {
                let (x, y) = z.split(split);
                Ok(fn_.eval(&x)? + gn.eval(&y)?)
            })
        })
        .collect();
    let vectors = f
        .vectors()
        .iter()
        .zip(g.vectors())
        .map(|(tau, omega)| tau.concat(omega))
        .collect();
    let (ff, gg) = (f.clone(), g.clone());
    let kind = if f.kind_hint() == KindHint::Sf && g.kind_hint() == KindHint::Sf {
        KindHint::Sf
    } else {
        KindHint::Unverified
    };
    Ok(Frame::new(subset, f.p(), maps, vectors)?
        .with_tail_bound(move |z| {
            let (x, y) = z.split(split);
            ff.tail_bound(&x) + gg.tail_bound(&y)
        })
        .with_kind_hint(kind)
        .with_label(format!("{} ⊕ {}", f.label(), g.label())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::certify_frame;
    use crate::fixtures::{disc_frame, linear_frame, orthogonal_pair};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn doubling() -> Frame {
        linear_frame(&DMatrix::from_element(1, 1, c(2.0)), &DMatrix::from_element(1, 1, c(1.0)), 2.0)
            .unwrap()
    }

    fn half_step() -> SolverCfg {
        SolverCfg::default().with_damping(0.5)
    }

    #[test]
    fn identity_similarity_is_trivial() {
        let f = disc_frame(10);
        let g = apply_similarity(&f, &BiLipMap::identity(), &AmbientLinMap::identity(1)).unwrap();
        assert_eq!(g.vectors(), f.vectors());
        for x in sample_points(f.subset(), 20, 1).unwrap() {
            assert_eq!(f.analysis(&x).unwrap(), g.analysis(&x).unwrap());
        }
    }

    #[test]
    fn similarity_on_doubling_frame() {
        let f = doubling();
        let g = apply_similarity(&f, &BiLipMap::scalar(c(0.5)), &AmbientLinMap::scalar(1, c(2.0))).unwrap();
        let x = Point::real_scalar(3.0);
        assert_eq!(g.maps()[0].eval(&x).unwrap(), c(3.0));
        assert_eq!(g.vectors()[0], Point::real_scalar(2.0));
        assert_eq!(g.frame_map(&x).unwrap(), Point::real_scalar(6.0));
    }

    #[test]
    fn similarity_rejects_leaving_the_disc() {
        let f = disc_frame(5);
        let err = apply_similarity(&f, &BiLipMap::identity(), &AmbientLinMap::scalar(1, c(2.0))).unwrap_err();
        assert!(matches!(err, FrameError::Precondition(_) | FrameError::NotInSubset { .. }));
    }

    #[test]
    fn recovery_of_identity_and_scalings() {
        let f = doubling();
        let cfg = half_step();
        let same = recover_similarity(&f, &f, &cfg).unwrap();
        for x in sample_points(f.subset(), 50, 2).unwrap() {
            assert!(same.analysis_map.apply(&x).unwrap().max_abs_diff(&x) <= 1e-12);
            assert!(same.synthesis_map.apply(&x).unwrap().max_abs_diff(&x) <= 1e-12);
        }
        let g = apply_similarity(&f, &BiLipMap::scalar(c(0.5)), &AmbientLinMap::scalar(1, c(2.0))).unwrap();
        let rec = recover_similarity(&f, &g, &cfg).unwrap();
        for x in sample_points(f.subset(), 50, 3).unwrap() {
            let half = x.scale(c(0.5));
            let double = x.scale(c(2.0));
            assert!(rec.analysis_map.apply(&x).unwrap().max_abs_diff(&half) <= 1e-8);
            assert!(rec.synthesis_map.apply(&x).unwrap().max_abs_diff(&double) <= 1e-8);
            assert!(rec.analysis_map.apply_inverse(&half).unwrap().max_abs_diff(&x) <= 1e-8);
        }
    }

    #[test]
    fn orthogonal_pair_recovers_zero_maps_and_fails_verification() {
        let (f, g) = orthogonal_pair();
        let rec = recover_similarity(&f, &g, &SolverCfg::default()).unwrap();
        for x in sample_points(f.subset(), 20, 4).unwrap() {
            assert_eq!(rec.analysis_map.apply(&x).unwrap().first(), c(0.0));
        }
        assert!(!verify_similarity(&f, &g, &rec.analysis_map, &rec.synthesis_map, 20, 4, 1e-6).unwrap());
    }

    #[test]
    fn similar_frame_is_schauder_iff_maps_compose_to_identity() {
        let (f, _) = orthogonal_pair();
        let samples = sample_points(f.subset(), 100, 12).unwrap();
        for (t, w, schauder) in [(0.5, 2.0, true), (0.5, 1.0, false), (-4.0, -0.25, true)] {
            let g = apply_similarity(&f, &BiLipMap::scalar(c(t)), &AmbientLinMap::scalar(1, c(w))).unwrap();
            for x in &samples {
                // S_g = T_{τ,ω} S_f T_{f,g}
                let transported = f.frame_map(&x.scale(c(t))).unwrap().scale(c(w));
                assert!(g.frame_map(x).unwrap().max_abs_diff(&transported) <= 1e-12);
            }
            let is_identity = samples
                .iter()
                .all(|x| g.frame_map(x).unwrap().max_abs_diff(x) <= 1e-12);
            assert_eq!(is_identity, schauder, "t = {t}, w = {w}");
            assert_eq!((t * w - 1.0f64).abs() <= 1e-12, schauder);
        }
    }

    #[test]
    fn projection_equality() {
        let f = doubling();
        let cfg = half_step();
        assert!(projections_equal(&f, &f, 32, 1, 1e-12, &cfg).unwrap());
        let g = apply_similarity(&f, &BiLipMap::scalar(c(0.5)), &AmbientLinMap::scalar(1, c(2.0))).unwrap();
        assert!(projections_equal(&f, &g, 32, 1, 1e-8, &cfg).unwrap());
        let (p, q) = orthogonal_pair();
        assert!(!projections_equal(&p, &q, 32, 1, 1e-8, &SolverCfg::default()).unwrap());
    }

    #[test]
    fn orthogonality_examples() {
        let (f, g) = orthogonal_pair();
        assert!(is_orthogonal(&f, &g, 100, 1, 0.0).unwrap());
        assert!(!is_orthogonal(&f, &f, 100, 1, 1e-6).unwrap());
        let d = doubling();
        let similar = apply_similarity(&d, &BiLipMap::scalar(c(0.5)), &AmbientLinMap::scalar(1, c(2.0))).unwrap();
        assert!(!is_orthogonal(&d, &similar, 100, 1, 1e-6).unwrap());
        assert!(matches!(
            is_orthogonal(&f, &disc_frame(2), 5, 1, 1e-6),
            Err(FrameError::FrameMismatch(_))
        ));
    }

    fn scalar_quad(a: f64, b: f64, cc: f64, d: f64) -> (BiLipMap, BiLipMap, AmbientLinMap, AmbientLinMap) {
        (
            BiLipMap::scalar(c(a)),
            BiLipMap::scalar(c(b)),
            AmbientLinMap::scalar(1, c(cc)),
            AmbientLinMap::scalar(1, c(d)),
        )
    }

    #[test]
    fn interpolation_examples() {
        let (f, g) = orthogonal_pair();
        let check = CheckCfg::default();

        let (a, b, cc, d) = scalar_quad(1.0, 1.0, 0.5, 0.5);
        let h = interpolate(&f, &g, &a, &b, &cc, &d, &check).unwrap();
        for x in sample_points(f.subset(), 200, 9).unwrap() {
            assert!(h.frame_map(&x).unwrap().max_abs_diff(&x) <= 1e-10);
        }
        assert_eq!(h.kind_hint(), KindHint::Sf);

        let (a, b, cc, d) = scalar_quad(1.0, 7.0, 1.0, 0.0);
        let h = interpolate(&f, &g, &a, &b, &cc, &d, &check).unwrap();
        assert_eq!(h.vectors(), f.vectors());
        for x in sample_points(f.subset(), 50, 10).unwrap() {
            assert!(h.frame_map(&x).unwrap().max_abs_diff(&x) <= 1e-12);
        }

        let (a, b, cc, d) = scalar_quad(1.0, 1.0, 1.0, 1.0);
        let err = interpolate(&f, &g, &a, &b, &cc, &d, &check).unwrap_err();
        assert!(matches!(&err, FrameError::Precondition(m) if m.contains("CA + DB")), "{err}");
    }

    #[test]
    fn interpolation_requires_orthogonality() {
        let (f, _) = orthogonal_pair();
        let (a, b, cc, d) = scalar_quad(1.0, 1.0, 0.5, 0.5);
        let err = interpolate(&f, &f, &a, &b, &cc, &d, &CheckCfg::default()).unwrap_err();
        assert!(matches!(&err, FrameError::Precondition(m) if m.contains("orthogonal")));
    }

    #[test]
    fn interpolation_output_certifies_as_identity() {
        let (f, g) = orthogonal_pair();
        let (a, b, cc, d) = scalar_quad(1.0, 1.0, 0.5, 0.5);
        let h = interpolate(&f, &g, &a, &b, &cc, &d, &CheckCfg::default()).unwrap();
        let report = certify_frame(&h, 500, 8, 2).unwrap();
        assert!((report.a_hat - 1.0).abs() <= 1e-6);
        assert!((report.b_hat - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn direct_sum_examples() {
        let (f, g) = orthogonal_pair();
        let sum = direct_sum(&f, &g).unwrap();
        assert_eq!(sum.dim(), 2);
        let z = Point::real(&[3.0, 5.0]);
        assert_eq!(sum.frame_map(&z).unwrap(), z);
        let zero = Point::real(&[0.0, 0.0]);
        assert_eq!(sum.frame_map(&zero).unwrap(), zero);
        let report = certify_frame(&sum, 1_000, 8, 3).unwrap();
        assert!((report.a_hat - 1.0).abs() <= 1e-9);
        assert!((report.b_hat - 1.0).abs() <= 1e-9);
        assert!(report.notes.contains("sum"));

        let err = direct_sum(&f, &f).unwrap_err();
        assert!(matches!(err, FrameError::Precondition(_)));
    }
}
