//! Worked-example frames with closed-form oracles, and the string ids the
//! CLI uses to name them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::error::{FrameError, Result};
use crate::frame::{Frame, KindHint, LipMap};
use crate::spaces::{AmbientNorm, Point, ScalarField, SubsetSpec, MEMBERSHIP_TOL};

/// Half-width of the sampling box used for linear frames on the whole space.
pub const LINEAR_SAMPLE_RADIUS: f64 = 10.0;

/// Frame on the disc `M = {z ∈ ℂ : |z| ≤ ½|z+1|}` (centre 1/3, radius 2/3)
/// with `f_n(z) = (z/(1+z))^n`, `τ_n = 1`, `p = 1`.
///
/// The frame map is the identity on `M`. Since `|z/(1+z)| ≤ 1/2` on `M`,
/// the omitted tail is bounded by `2^{-N}`.
pub fn disc_frame(n: usize) -> Frame {
    assert!(n >= 1, "disc frame needs N >= 1");
    let subset = disc_subset();
    let maps = (1..=n)
        .map(|k| {
            let lip = 2.25 * k as f64 * 2f64.powi(1 - k as i32);
            LipMap::from_fn(format!("(z/(1+z))^{k}"), move |x: &Point| {
                let z = x.first();
                (z / (z + 1.0)).powi(k as i32)
            })
            .with_claimed_lip(lip)
        })
        .collect();
    let vectors = vec![Point::complex_scalar(Complex64::new(1.0, 0.0)); n];
    let tail = 2f64.powi(-(n as i32));
    Frame::new(subset, 1.0, maps, vectors)
        .expect("disc fixture is well-formed")
        .with_tail_bound(move |_| tail)
        .with_kind_hint(KindHint::Sf)
        .with_label(format!("disc:N={n}"))
}

pub fn disc_subset() -> SubsetSpec {
    SubsetSpec::new(
        "{z ∈ C : |z| <= |z+1|/2}",
        1,
        ScalarField::Complex,
        AmbientNorm::Lp { q: 1.0 },
        |x| {
            let z = x.first();
            z.norm() <= 0.5 * (z + 1.0).norm() + MEMBERSHIP_TOL
        },
        |rng| {
            // polar parametrisation of the disc centred at 1/3 with radius 2/3
            let r = (2.0 / 3.0) * rng.gen::<f64>().sqrt();
            let theta = 2.0 * PI * rng.gen::<f64>();
            Point::complex_scalar(Complex64::new(1.0 / 3.0 + r * theta.cos(), r * theta.sin()))
        },
    )
}

/// `t^k / k!`, accumulated as a product of `t / j` factors.
fn scaled_power(t: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * t / j as f64)
}

/// Frame on `M = [1, ∞)` with `f_1 ≡ 1`, `f_{k+1}(x) = (log x)^k / k!`,
/// `τ_n = 1`, `p = 1`. Sampling is restricted to the window `[1, right_end]`.
///
/// The tail `Σ_{k≥N} (log x)^k/k!` is bounded by the Lagrange remainder
/// `e^{max(log x, 0)} |log x|^N / N!`.
pub fn log_frame(n: usize, right_end: f64) -> Result<Frame> {
    if n == 0 {
        return Err(FrameError::EmptySequence);
    }
    if !(right_end > 1.0 && right_end.is_finite()) {
        return Err(FrameError::Precondition(format!(
            "log fixture window must have right end > 1, got {right_end}"
        )));
    }
    let subset = SubsetSpec::new(
        format!("[1, inf) sampled on [1, {right_end}]"),
        1,
        ScalarField::Real,
        AmbientNorm::Lp { q: 1.0 },
        |x| {
            let z = x.first();
            z.im.abs() <= MEMBERSHIP_TOL && z.re >= 1.0 - MEMBERSHIP_TOL
        },
        move |rng| Point::real_scalar(rng.gen_range(1.0..=right_end)),
    );
    let maps = (0..n)
        .map(|k| {
            // sup over [1, ∞) of (log x)^{k-1} / ((k-1)! x), attained at log x = k - 1
            let lip = match k {
                0 => 0.0,
                _ => scaled_power(k as f64 - 1.0, k - 1) * (-(k as f64 - 1.0)).exp(),
            };
            LipMap::new(format!("(log x)^{k}/{k}!"), move |x: &Point| {
                let z = x.first();
                if z.re <= 0.0 {
                    return Err(FrameError::Evaluation(format!(
                        "log of non-positive argument {}",
                        z.re
                    )));
                }
                Ok(Complex64::new(scaled_power(z.re.ln(), k), 0.0))
            })
            .with_claimed_lip(lip)
        })
        .collect();
    let vectors = vec![Point::real_scalar(1.0); n];
    Ok(Frame::new(subset, 1.0, maps, vectors)?
        .with_tail_bound(move |x| {
            let t = x.first().re.max(f64::MIN_POSITIVE).ln();
            t.max(0.0).exp() * scaled_power(t.abs(), n)
        })
        .with_kind_hint(KindHint::Sf)
        .with_label(format!("log:N={n},right={right_end}")))
}

/// Whole space `K^dim` with the Euclidean norm, sampled in a box.
pub fn whole_space(dim: usize, field: ScalarField) -> SubsetSpec {
    let name = match field {
        ScalarField::Real => "R",
        ScalarField::Complex => "C",
    };
    SubsetSpec::new(
        format!("{name}^{dim}"),
        dim,
        field,
        AmbientNorm::euclidean(),
        move |x| field == ScalarField::Complex || x.coords().iter().all(|z| z.im.abs() <= MEMBERSHIP_TOL),
        move |rng| {
            let coords = (0..dim)
                .map(|_| {
                    let re = rng.gen_range(-LINEAR_SAMPLE_RADIUS..LINEAR_SAMPLE_RADIUS);
                    let im = match field {
                        ScalarField::Real => 0.0,
                        ScalarField::Complex => rng.gen_range(-LINEAR_SAMPLE_RADIUS..LINEAR_SAMPLE_RADIUS),
                    };
                    Complex64::new(re, im)
                })
                .collect();
            Point::new(coords, field).expect("finite sample")
        },
    )
}

fn is_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Linear frame `f_n = ζ_n U`, `τ_n = V e_n` on the whole space, so that
/// `S = VU`. `u` is `N × dim`, `v` is `dim × N`.
pub fn linear_frame(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>, p: f64) -> Result<Frame> {
    let (n, dim) = u.shape();
    if n == 0 || dim == 0 {
        return Err(FrameError::EmptySequence);
    }
    if v.shape() != (dim, n) {
        return Err(FrameError::Precondition(format!(
            "V must be {dim}x{n} to match U ({n}x{dim}), got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    if u.iter().chain(v.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(FrameError::NonFinite("linear frame matrices".into()));
    }
    let vu = v * u;
    let sv = vu.clone().svd(false, false).singular_values;
    let (smin, smax) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if !(smin > 1e-12 * smax.max(1.0)) {
        return Err(FrameError::NotInvertible(format!(
            "VU has smallest singular value {smin:e}"
        )));
    }
    let field = if is_real(u) && is_real(v) {
        ScalarField::Real
    } else {
        ScalarField::Complex
    };
    let subset = whole_space(dim, field);
    let maps = (0..n)
        .map(|row| {
            let coeffs: Vec<Complex64> = u.row(row).iter().copied().collect();
            let lip = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            LipMap::from_fn(format!("row {} of U", row + 1), move |x: &Point| {
                coeffs.iter().zip(x.coords()).map(|(a, b)| a * b).sum()
            })
            .with_claimed_lip(lip)
        })
        .collect();
    let vectors = (0..n)
        .map(|col| Point::new(v.column(col).iter().copied().collect(), field))
        .collect::<Result<Vec<_>>>()?;
    let identity = DMatrix::<Complex64>::identity(dim, dim);
    let kind = if (&vu - &identity).iter().all(|z| z.norm() <= 1e-12) {
        KindHint::Sf
    } else {
        KindHint::Asf
    };
    Ok(Frame::new(subset, p, maps, vectors)?
        .with_kind_hint(kind)
        .with_label(format!("linear:U={},V={}", format_matrix(u), format_matrix(v))))
}

/// Two mutually orthogonal Schauder frames on `ℝ` with `N = 2`, `p = 1`:
/// `F = ((x, 0), (1, 0))` and `G = ((0, x), (0, 1))`.
pub fn orthogonal_pair() -> (Frame, Frame) {
    let col = |a: f64, b: f64| DMatrix::from_row_slice(2, 1, &[Complex64::new(a, 0.0), Complex64::new(b, 0.0)]);
    let row = |a: f64, b: f64| DMatrix::from_row_slice(1, 2, &[Complex64::new(a, 0.0), Complex64::new(b, 0.0)]);
    let f = linear_frame(&col(1.0, 0.0), &row(1.0, 0.0), 1.0)
        .expect("orthogonal pair F")
        .with_label("orthopair.F");
    let g = linear_frame(&col(0.0, 1.0), &row(0.0, 1.0), 1.0)
        .expect("orthogonal pair G")
        .with_label("orthopair.G");
    (f, g)
}

/// `(a b;c d)` with real entries printed plainly and complex ones as `re+imi`.
pub fn format_matrix(m: &DMatrix<Complex64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    if z.im == 0.0 {
                        format!("{}", z.re)
                    } else {
                        format!("{}{:+}i", z.re, z.im)
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    format!("({})", rows.join(";"))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixtureParseError {
    #[error("unknown fixture `{0}` (expected disc, log, linear or orthopair)")]
    UnknownFixture(String),
    #[error("fixture `{fixture}` does not take parameter `{param}`")]
    UnknownParam { fixture: String, param: String },
    #[error("fixture `{fixture}` requires parameter `{param}`")]
    MissingParam { fixture: String, param: String },
    #[error("bad value for `{param}`: {message}")]
    BadValue { param: String, message: String },
}

/// A named fixture with its parameters, e.g. `disc:N=30`.
#[derive(Debug, Clone, PartialEq)]
pub enum FixtureId {
    Disc { n: usize },
    Log { n: usize, right: f64 },
    Linear { u: DMatrix<Complex64>, v: DMatrix<Complex64>, p: f64 },
    OrthoPair,
}

/// What a fixture id builds.
#[derive(Debug, Clone)]
pub enum Fixture {
    Single(Frame),
    Pair(Frame, Frame),
}

impl Fixture {
    /// The frame a single-frame pipeline runs on (the first of a pair).
    pub fn primary(&self) -> &Frame {
        match self {
            Fixture::Single(f) | Fixture::Pair(f, _) => f,
        }
    }
}

pub const DEFAULT_DISC_N: usize = 30;
pub const DEFAULT_LOG_N: usize = 40;
pub const DEFAULT_LOG_RIGHT: f64 = 10.0;
pub const DEFAULT_LINEAR_P: f64 = 2.0;

impl FixtureId {
    pub fn build(&self) -> Result<Fixture> {
        Ok(match self {
            FixtureId::Disc { n } => {
                if *n == 0 {
                    return Err(FrameError::EmptySequence);
                }
                Fixture::Single(disc_frame(*n))
            }
            FixtureId::Log { n, right } => Fixture::Single(log_frame(*n, *right)?),
            FixtureId::Linear { u, v, p } => Fixture::Single(linear_frame(u, v, *p)?),
            FixtureId::OrthoPair => {
                let (f, g) = orthogonal_pair();
                Fixture::Pair(f, g)
            }
        })
    }

    /// The same fixture family with truncation length `n`, where that makes sense.
    pub fn with_len(&self, n: usize) -> Option<FixtureId> {
        match self {
            FixtureId::Disc { .. } => Some(FixtureId::Disc { n }),
            FixtureId::Log { right, .. } => Some(FixtureId::Log { n, right: *right }),
            _ => None,
        }
    }
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureId::Disc { n } => write!(f, "disc:N={n}"),
            FixtureId::Log { n, right } => write!(f, "log:N={n},right={right}"),
            FixtureId::Linear { u, v, p } => {
                write!(f, "linear:U={},V={},p={p}", format_matrix(u), format_matrix(v))
            }
            FixtureId::OrthoPair => write!(f, "orthopair"),
        }
    }
}

/// Splits `a=1,b=(1,2;3,4)` at commas that start a new `key=` and are not
/// inside parentheses.
fn split_params(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b',' if depth == 0 && starts_with_key(&s[i + 1..]) => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn starts_with_key(s: &str) -> bool {
    let s = s.trim_start();
    match s.find('=') {
        Some(eq) if eq > 0 => s[..eq].chars().all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

fn parse_number<T: FromStr>(param: &str, value: &str) -> std::result::Result<T, FixtureParseError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| FixtureParseError::BadValue {
        param: param.into(),
        message: format!("`{value}`: {e}"),
    })
}

/// Parses `(a b;c d)`: rows separated by `;`, entries by spaces or commas.
pub fn parse_matrix(param: &str, value: &str) -> std::result::Result<DMatrix<Complex64>, FixtureParseError> {
    let body = value.trim();
    let body = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .unwrap_or(body);
    let rows: Vec<Vec<f64>> = body
        .split(';')
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| parse_number::<f64>(param, t))
                .collect()
        })
        .collect::<std::result::Result<_, _>>()?;
    let ncols = rows.first().map_or(0, Vec::len);
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(FixtureParseError::BadValue {
            param: param.into(),
            message: format!("`{value}` is not a non-empty rectangular matrix"),
        });
    }
    let flat: Vec<Complex64> = rows.iter().flatten().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

impl FromStr for FixtureId {
    type Err = FixtureParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((name, rest)) => (name.trim(), rest.trim()),
            None => (s, ""),
        };
        let mut params: Vec<(String, String)> = Vec::new();
        if !rest.is_empty() {
            for part in split_params(rest) {
                let (k, v) = part.split_once('=').ok_or_else(|| FixtureParseError::BadValue {
                    param: part.into(),
                    message: "expected key=value".into(),
                })?;
                params.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let unknown = |param: &str| FixtureParseError::UnknownParam {
            fixture: name.into(),
            param: param.into(),
        };
        match name {
            "disc" => {
                let mut n = DEFAULT_DISC_N;
                for (k, v) in &params {
                    match k.as_str() {
                        "N" | "n" => n = parse_number(k, v)?,
                        _ => return Err(unknown(k)),
                    }
                }
                Ok(FixtureId::Disc { n })
            }
            "log" => {
                let (mut n, mut right) = (DEFAULT_LOG_N, DEFAULT_LOG_RIGHT);
                for (k, v) in &params {
                    match k.as_str() {
                        "N" | "n" => n = parse_number(k, v)?,
                        "right" => right = parse_number(k, v)?,
                        _ => return Err(unknown(k)),
                    }
                }
                Ok(FixtureId::Log { n, right })
            }
            "linear" => {
                let (mut u, mut v, mut p) = (None, None, DEFAULT_LINEAR_P);
                for (k, val) in &params {
                    match k.as_str() {
                        "U" => u = Some(parse_matrix(k, val)?),
                        "V" => v = Some(parse_matrix(k, val)?),
                        "p" => p = parse_number(k, val)?,
                        _ => return Err(unknown(k)),
                    }
                }
                let missing = |param: &str| FixtureParseError::MissingParam {
                    fixture: "linear".into(),
                    param: param.into(),
                };
                Ok(FixtureId::Linear {
                    u: u.ok_or_else(|| missing("U"))?,
                    v: v.ok_or_else(|| missing("V"))?,
                    p,
                })
            }
            "orthopair" => match params.first() {
                Some((k, _)) => Err(unknown(k)),
                None => Ok(FixtureId::OrthoPair),
            },
            other => Err(FixtureParseError::UnknownFixture(other.into())),
        }
    }
}
