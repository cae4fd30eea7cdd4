//! The `lipframe` command line: resolve a fixture or frame file, run one
//! pipeline, write a JSON report.
//!
//! Exit codes: 0 pass, 1 failed verdict, 2 parse or validation error,
//! 3 violated precondition, 4 numerical failure.

mod file;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::certify::{certify_frame, CertificationReport};
use crate::duality::{canonical_dual, duality_defect};
use crate::error::FrameError;
use crate::fixtures::{Fixture, FixtureId};
use crate::frame::Frame;
use crate::solver::SolverCfg;
use crate::spaces::{sample_points, Point};
use crate::transforms::{
    direct_sum_with, interpolate, orthogonality_defect, projection_gap, recover_similarity,
    similarity_defect, AmbientLinMap, BiLipMap, CheckCfg,
};

pub use file::{parse_frame_file, parse_frame_str};

pub const SEED_ENV: &str = "LIPFRAME_SEED";

/// Tolerance for `a_dual ≈ 1/b` and `b_dual ≈ 1/a`.
const RECIPROCITY_TOL: f64 = 1e-6;
/// Recovered-map samples echoed in similarity reports.
const MAP_SAMPLES: usize = 5;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Frame(FrameError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io(_) => 2,
            CliError::Frame(e) if e.is_numerical() => 4,
            CliError::Frame(FrameError::InvalidConfig(_) | FrameError::InvalidExponent(_)) => 2,
            CliError::Frame(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Frame(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        CliError::Frame(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Certify,
    Dual,
    Similarity,
    Orthogonality,
    Interpolate,
    DirectSum,
    ReconstructSweep,
}

#[derive(Debug, Parser)]
#[command(name = "lipframe", version, about = "Certify and transform Lipschitz p-approximate Schauder frames")]
pub struct Args {
    pub command: Command,
    /// Fixture id (disc:N=30, log:N=40,right=10, linear:U=(..),V=(..), orthopair) or a JSON frame file
    #[arg(long)]
    pub fixture: String,
    #[arg(long, default_value_t = 10_000)]
    pub n_pairs: usize,
    #[arg(long, default_value_t = 16)]
    pub n_probes: usize,
    /// Overridden by LIPFRAME_SEED when set
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Damping of the fixed-point solver
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Sample count for identity and orthogonality checks
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Truncation lengths for reconstruct-sweep
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,30")]
    pub ns: Vec<usize>,
    /// Scalars a,b,c,d for interpolate
    #[arg(long, value_delimiter = ',', default_value = "1,1,0.5,0.5", allow_hyphen_values = true)]
    pub coeffs: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub fixture: String,
    pub n_pairs: usize,
    pub n_probes: usize,
    pub seed: u64,
    pub tol: f64,
    pub solver: SolverCfg,
    pub samples: usize,
    pub ns: Vec<usize>,
    pub coeffs: Vec<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Validates `args`; `env_seed` (the raw value of `LIPFRAME_SEED`) wins over `--seed`.
    pub fn from_args(args: Args, env_seed: Option<&str>) -> Result<Self, CliError> {
        let seed = match env_seed {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|e| CliError::Parse(format!("{SEED_ENV}=`{s}`: {e}")))?,
            None => args.seed,
        };
        let solver = SolverCfg {
            damping: args.lambda,
            max_iter: args.max_iter,
            ..SolverCfg::default()
        };
        solver.validate()?;
        if !(args.tol.is_finite() && args.tol >= 0.0) {
            return Err(CliError::Parse(format!("--tol {} must be finite and >= 0", args.tol)));
        }
        if args.n_pairs == 0 || args.n_probes == 0 || args.samples == 0 {
            return Err(CliError::Parse("--n-pairs, --n-probes and --samples must be >= 1".into()));
        }
        if args.coeffs.len() != 4 {
            return Err(CliError::Parse(format!(
                "--coeffs takes four scalars a,b,c,d, got {}",
                args.coeffs.len()
            )));
        }
        if args.ns.is_empty() || args.ns.contains(&0) {
            return Err(CliError::Parse("--ns must list positive lengths".into()));
        }
        Ok(Self {
            command: args.command,
            fixture: args.fixture,
            n_pairs: args.n_pairs,
            n_probes: args.n_probes,
            seed,
            tol: args.tol,
            solver,
            samples: args.samples,
            ns: args.ns,
            coeffs: args.coeffs,
            out: args.out,
        })
    }
}

/// One named frame source: a fixture id, or a JSON file when the argument
/// names an existing file.
#[derive(Debug, Clone)]
pub enum FrameSource {
    Fixture(FixtureId),
    File(PathBuf),
}

impl FrameSource {
    pub fn resolve(arg: &str) -> Result<Self, CliError> {
        let path = Path::new(arg);
        if path.is_file() {
            return Ok(FrameSource::File(path.to_path_buf()));
        }
        arg.parse::<FixtureId>()
            .map(FrameSource::Fixture)
            .map_err(|e| CliError::Parse(format!("--fixture `{arg}`: {e}")))
    }

    pub fn build(&self) -> Result<Fixture, CliError> {
        match self {
            FrameSource::Fixture(id) => Ok(id.build()?),
            FrameSource::File(path) => Ok(Fixture::Single(parse_frame_file(path)?)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub passed: bool,
    pub payload: Payload,
    pub wall_time: f64,
    pub version: String,
}

impl RunReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Certify {
        report: CertificationReport,
    },
    Dual {
        frame: CertificationReport,
        dual: CertificationReport,
        duality_defect: [f64; 2],
        is_dual: bool,
        reciprocity_gap: f64,
    },
    Similarity {
        target: String,
        map_defect: f64,
        vector_defect: f64,
        verified: bool,
        projection_gap: f64,
        projections_equal: bool,
        orthogonality_defect: [f64; 2],
        samples: Vec<MapSample>,
    },
    Orthogonality {
        target: String,
        orthogonality_defect: [f64; 2],
        orthogonal: bool,
    },
    Interpolate {
        identity_error: f64,
        report: CertificationReport,
    },
    DirectSum {
        identity_error: f64,
        report: CertificationReport,
    },
    ReconstructSweep {
        rows: Vec<SweepRow>,
    },
}

/// A point and its images under the recovered similarity maps, as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct MapSample {
    pub x: Vec<[f64; 2]>,
    pub t_fg: Vec<[f64; 2]>,
    pub t_tw: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub max_error: f64,
    pub mean_error: f64,
    pub samples: usize,
    /// `2·max tail + solver tolerance` over the samples.
    pub bound: f64,
}

fn coords(x: &Point) -> Vec<[f64; 2]> {
    x.coords().iter().map(|z| [z.re, z.im]).collect()
}

fn max_identity_error(frame: &Frame, samples: &[Point]) -> Result<(f64, f64), FrameError> {
    let mut worst = 0.0f64;
    let mut slack = 0.0f64;
    for x in samples {
        let err = frame.subset().distance(&frame.frame_map(x)?, x);
        if err - frame.tail_bound(x) > worst - slack {
            slack = frame.tail_bound(x);
        }
        worst = worst.max(err);
    }
    Ok((worst, slack))
}

fn need_pair(fixture: &Fixture, command: &str) -> Result<(Frame, Frame), CliError> {
    match fixture {
        Fixture::Pair(f, g) => Ok((f.clone(), g.clone())),
        Fixture::Single(_) => Err(CliError::Frame(FrameError::Precondition(format!(
            "{command} needs a pair fixture such as orthopair"
        )))),
    }
}

/// Second frame for two-frame commands: the pair partner, or the canonical
/// dual of a single frame.
fn partner(fixture: &Fixture, cfg: &SolverCfg) -> Result<(Frame, Frame, String), CliError> {
    match fixture {
        Fixture::Pair(f, g) => Ok((f.clone(), g.clone(), g.label().to_string())),
        Fixture::Single(f) => {
            let g = canonical_dual(f, cfg)?;
            let label = g.label().to_string();
            Ok((f.clone(), g, label))
        }
    }
}

fn reconstruction_row(frame: &Frame, cfg: &RunConfig) -> Result<SweepRow, CliError> {
    let points = sample_points(frame.subset(), cfg.samples, cfg.seed)?;
    let mut max_error = 0.0f64;
    let mut total = 0.0;
    let mut max_tail = 0.0f64;
    for x in &points {
        let err = frame.subset().distance(&frame.reconstruct(x, &cfg.solver)?, x);
        max_error = max_error.max(err);
        total += err;
        max_tail = max_tail.max(frame.tail_bound(x));
    }
    Ok(SweepRow {
        n: frame.len(),
        max_error,
        mean_error: total / points.len() as f64,
        samples: points.len(),
        bound: 2.0 * max_tail + cfg.solver.residual_tol,
    })
}

fn run_payload(cfg: &RunConfig, source: &FrameSource) -> Result<(Payload, bool), CliError> {
    let fixture = source.build()?;
    let solver = &cfg.solver;
    Ok(match cfg.command {
        Command::Certify => {
            let report = certify_frame(fixture.primary(), cfg.n_pairs, cfg.n_probes, cfg.seed)?;
            let passed = report.verdict.passed();
            (Payload::Certify { report }, passed)
        }
        Command::Dual => {
            let f = fixture.primary();
            let g = canonical_dual(f, solver)?;
            let (d0, d1) = duality_defect(f, &g, cfg.samples, cfg.seed)?;
            let is_dual = d0 <= cfg.tol && d1 <= cfg.tol;
            let frame = certify_frame(f, cfg.n_pairs, cfg.n_probes, cfg.seed)?;
            let dual = certify_frame(&g, cfg.n_pairs, cfg.n_probes, cfg.seed)?;
            let reciprocity_gap = if frame.verdict.passed() && dual.a_hat > 0.0 {
                (dual.a_hat - 1.0 / frame.b_hat)
                    .abs()
                    .max((dual.b_hat - 1.0 / frame.a_hat).abs())
            } else {
                f64::INFINITY
            };
            let passed = is_dual && reciprocity_gap <= RECIPROCITY_TOL;
            (
                Payload::Dual {
                    frame,
                    dual,
                    duality_defect: [d0, d1],
                    is_dual,
                    reciprocity_gap,
                },
                passed,
            )
        }
        Command::Similarity => {
            let (f, g, target) = partner(&fixture, solver)?;
            let rec = recover_similarity(&f, &g, solver)?;
            let (map_defect, vector_defect) =
                similarity_defect(&f, &g, &rec.analysis_map, &rec.synthesis_map, cfg.samples, cfg.seed)?;
            let verified = map_defect <= cfg.tol && vector_defect <= cfg.tol;
            let gap = projection_gap(&f, &g, cfg.n_probes, cfg.seed, solver)?;
            let (o0, o1) = orthogonality_defect(&f, &g, cfg.samples, cfg.seed)?;
            let samples = sample_points(f.subset(), MAP_SAMPLES, cfg.seed)?
                .iter()
                .map(|x| {
                    Ok(MapSample {
                        x: coords(x),
                        t_fg: coords(&rec.analysis_map.apply(x)?),
                        t_tw: coords(&rec.synthesis_map.apply(x)?),
                    })
                })
                .collect::<Result<Vec<_>, FrameError>>()?;
            let projections_equal = gap <= cfg.tol;
            (
                Payload::Similarity {
                    target,
                    map_defect,
                    vector_defect,
                    verified,
                    projection_gap: gap,
                    projections_equal,
                    orthogonality_defect: [o0, o1],
                    samples,
                },
                verified && projections_equal,
            )
        }
        Command::Orthogonality => {
            let (f, g, target) = partner(&fixture, solver)?;
            let (o0, o1) = orthogonality_defect(&f, &g, cfg.samples, cfg.seed)?;
            let orthogonal = o0 <= cfg.tol && o1 <= cfg.tol;
            (
                Payload::Orthogonality {
                    target,
                    orthogonality_defect: [o0, o1],
                    orthogonal,
                },
                orthogonal,
            )
        }
        Command::Interpolate => {
            let (f, g) = need_pair(&fixture, "interpolate")?;
            let real = |x: f64| Complex64::new(x, 0.0);
            let [a, b, c, d] = [cfg.coeffs[0], cfg.coeffs[1], cfg.coeffs[2], cfg.coeffs[3]];
            let dim = f.dim();
            let check = CheckCfg {
                samples: cfg.samples,
                seed: cfg.seed,
                tol: cfg.tol,
            };
            let h = interpolate(
                &f,
                &g,
                &BiLipMap::scalar(real(a)),
                &BiLipMap::scalar(real(b)),
                &AmbientLinMap::scalar(dim, real(c)),
                &AmbientLinMap::scalar(dim, real(d)),
                &check,
            )?;
            let points = sample_points(h.subset(), cfg.samples, cfg.seed)?;
            let (identity_error, slack) = max_identity_error(&h, &points)?;
            let report = certify_frame(&h, cfg.n_pairs, cfg.n_probes, cfg.seed)?;
            let passed = identity_error <= cfg.tol + slack && report.verdict.passed();
            (Payload::Interpolate { identity_error, report }, passed)
        }
        Command::DirectSum => {
            let (f, g) = need_pair(&fixture, "direct-sum")?;
            let check = CheckCfg {
                samples: cfg.samples,
                seed: cfg.seed,
                tol: cfg.tol,
            };
            let sum = direct_sum_with(&f, &g, &check)?;
            let points = sample_points(sum.subset(), cfg.samples, cfg.seed)?;
            let (identity_error, slack) = max_identity_error(&sum, &points)?;
            let report = certify_frame(&sum, cfg.n_pairs, cfg.n_probes, cfg.seed)?;
            let passed = identity_error <= cfg.tol + slack && report.verdict.passed();
            (Payload::DirectSum { identity_error, report }, passed)
        }
        Command::ReconstructSweep => {
            let mut rows = Vec::new();
            match source {
                FrameSource::Fixture(id) if id.with_len(1).is_some() => {
                    for &n in &cfg.ns {
                        let id = id.with_len(n).expect("family fixture");
                        let frame = id.build()?.primary().clone();
                        rows.push(reconstruction_row(&frame, cfg)?);
                    }
                }
                _ => rows.push(reconstruction_row(fixture.primary(), cfg)?),
            }
            let passed = rows.iter().all(|r| r.max_error <= r.bound);
            (Payload::ReconstructSweep { rows }, passed)
        }
    })
}

/// Runs the configured pipeline. Errors carry their exit code.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let source = FrameSource::resolve(&cfg.fixture)?;
    let (payload, passed) = run_payload(cfg, &source)?;
    Ok(RunReport {
        config: cfg.clone(),
        passed,
        payload,
        wall_time: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// `N,max_error,mean_error,samples`
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("N,max_error,mean_error,samples\n");
    for r in rows {
        out.push_str(&format!("{},{:e},{:e},{}\n", r.n, r.max_error, r.mean_error, r.samples));
    }
    out
}

fn write_outputs(report: &RunReport, out: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    std::fs::write(out, report.to_json()).map_err(io)?;
    if let Payload::ReconstructSweep { rows } = &report.payload {
        std::fs::write(out.with_extension("csv"), sweep_csv(rows)).map_err(io)?;
    }
    Ok(())
}

fn summary(report: &RunReport) -> String {
    let c = &report.config;
    let mut lines = vec![format!(
        "{} on {} (seed {})",
        serde_json::to_value(c.command).map(|v| v.as_str().unwrap_or("").to_string()).unwrap_or_default(),
        c.fixture,
        c.seed
    )];
    let cert = |r: &CertificationReport| {
        format!(
            "a_hat {:.12} b_hat {:.12} c_hat {:.6} d_hat {:.12} verdict {}",
            r.a_hat,
            r.b_hat,
            r.c_hat,
            r.d_hat,
            serde_json::to_value(r.verdict).map(|v| v.as_str().unwrap_or("").to_string()).unwrap_or_default()
        )
    };
    match &report.payload {
        Payload::Certify { report } => lines.push(cert(report)),
        Payload::Dual {
            dual,
            duality_defect,
            is_dual,
            reciprocity_gap,
            ..
        } => {
            lines.push(format!("dual: {}", cert(dual)));
            lines.push(format!(
                "is_dual {is_dual} (defects {:e}, {:e}), reciprocity gap {reciprocity_gap:e}",
                duality_defect[0], duality_defect[1]
            ));
        }
        Payload::Similarity {
            target,
            map_defect,
            vector_defect,
            verified,
            projection_gap,
            ..
        } => lines.push(format!(
            "against {target}: verified {verified} (defects {map_defect:e}, {vector_defect:e}), projection gap {projection_gap:e}"
        )),
        Payload::Orthogonality {
            target,
            orthogonality_defect,
            orthogonal,
        } => lines.push(format!(
            "against {target}: orthogonal {orthogonal} (defects {:e}, {:e})",
            orthogonality_defect[0], orthogonality_defect[1]
        )),
        Payload::Interpolate { identity_error, report } | Payload::DirectSum { identity_error, report } => {
            lines.push(format!("max |Sx - x| {identity_error:e}"));
            lines.push(cert(report));
        }
        Payload::ReconstructSweep { rows } => {
            lines.push("N  max_error  mean_error  bound".into());
            for r in rows {
                lines.push(format!("{}  {:e}  {:e}  {:e}", r.n, r.max_error, r.mean_error, r.bound));
            }
        }
    }
    lines.push(if report.passed { "PASS".into() } else { "FAIL".into() });
    lines.join("\n")
}

/// Parses `argv`, runs, writes the report and prints a summary. Returns the exit code.
pub fn main_with<I, T>(argv: I, env_seed: Option<&str>) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = RunConfig::from_args(args, env_seed).and_then(|cfg| {
        let report = run(&cfg)?;
        if let Some(out) = &cfg.out {
            write_outputs(&report, out)?;
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            println!("{}", summary(&report));
            if report.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("lipframe: {e}");
            e.exit_code()
        }
    }
}

pub fn main_from_env() -> u8 {
    let seed = std::env::var(SEED_ENV).ok();
    main_with(std::env::args_os(), seed.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(argv: &[&str]) -> RunConfig {
        let args = Args::try_parse_from(std::iter::once("lipframe").chain(argv.iter().copied())).unwrap();
        RunConfig::from_args(args, None).unwrap()
    }

    #[test]
    fn env_seed_overrides_flag() {
        let args = Args::try_parse_from(["lipframe", "certify", "--fixture", "disc", "--seed", "3"]).unwrap();
        assert_eq!(RunConfig::from_args(args, Some("9")).unwrap().seed, 9);
        let args = Args::try_parse_from(["lipframe", "certify", "--fixture", "disc", "--seed", "3"]).unwrap();
        assert_eq!(RunConfig::from_args(args, None).unwrap().seed, 3);
        let args = Args::try_parse_from(["lipframe", "certify", "--fixture", "disc"]).unwrap();
        assert_eq!(RunConfig::from_args(args, Some("x")).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn bad_fixture_and_solver_are_parse_errors() {
        let mut cfg = config(&["certify", "--fixture", "nope:N=3"]);
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 2);
        cfg.fixture = "disc:N=3".into();
        assert!(run(&cfg).is_ok());
        let args = Args::try_parse_from(["lipframe", "dual", "--fixture", "disc", "--lambda", "0"]).unwrap();
        assert_eq!(RunConfig::from_args(args, None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn singular_linear_fixture_exits_3() {
        let cfg = config(&["certify", "--fixture", "linear:U=(1),V=(0)"]);
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("not invertible"));
    }

    #[test]
    fn interpolate_rejects_bad_coefficients() {
        let cfg = config(&["interpolate", "--fixture", "orthopair", "--coeffs", "1,1,1,1", "--n-pairs", "100"]);
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 3);
        let cfg = config(&["interpolate", "--fixture", "disc:N=5", "--n-pairs", "100"]);
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn non_convergence_exits_4() {
        let cfg = config(&["dual", "--fixture", "linear:U=(2),V=(1)", "--max-iter", "20", "--n-pairs", "50"]);
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn sweep_rows_follow_ns() {
        let cfg = config(&["reconstruct-sweep", "--fixture", "disc", "--ns", "5,10", "--samples", "50"]);
        let report = run(&cfg).unwrap();
        let Payload::ReconstructSweep { rows } = &report.payload else {
            panic!("wrong payload")
        };
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![5, 10]);
        assert!(report.passed);
        assert!(sweep_csv(rows).starts_with("N,max_error,mean_error,samples\n5,"));
    }
}
