//! Damped fixed-point inversion of (near-identity) bi-Lipschitz maps.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::spaces::{AmbientNorm, Point};

/// Number of consecutive residual increases that counts as divergence.
const DIVERGENCE_RUN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverCfg {
    /// Step size λ in `x ← x − λ(Sx − y)`.
    pub damping: f64,
    pub max_iter: usize,
    pub residual_tol: f64,
}

impl Default for SolverCfg {
    fn default() -> Self {
        Self {
            damping: 1.0,
            max_iter: 1_000,
            residual_tol: 1e-12,
        }
    }
}

impl SolverCfg {
    pub fn new(damping: f64, max_iter: usize, residual_tol: f64) -> Result<Self> {
        let cfg = Self {
            damping,
            max_iter,
            residual_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_damping(mut self, damping: f64) -> Self {
        self.damping = damping;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return Err(FrameError::InvalidConfig(format!(
                "damping must be positive, got {}",
                self.damping
            )));
        }
        if !(self.residual_tol > 0.0) {
            return Err(FrameError::InvalidConfig(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(FrameError::InvalidConfig("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of a successful inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub point: Point,
    /// Number of evaluations of the forward map, including the final one.
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `map(x) = y` by `x ← x − λ(map(x) − y)` starting from `x = y`.
///
/// Stops once `‖map(x) − y‖ <= residual_tol + slack(x)`. `slack` lets a
/// truncated map stop at the accuracy its own truncation allows.
pub fn solve_damped<F, T>(
    map: F,
    y: &Point,
    norm: &AmbientNorm,
    cfg: &SolverCfg,
    slack: T,
) -> Result<Inversion>
where
    F: Fn(&Point) -> Result<Point>,
    T: Fn(&Point) -> f64,
{
    cfg.validate()?;
    let step = num_complex::Complex64::new(-cfg.damping, 0.0);
    let mut x = y.clone();
    let mut prev = f64::INFINITY;
    let mut growth = 0;
    for k in 1..=cfg.max_iter {
        let r = &map(&x)? - y;
        let res = norm.norm(&r);
        if !res.is_finite() {
            return Err(FrameError::Divergence {
                iteration: k,
                residual: res,
            });
        }
        if res <= cfg.residual_tol + slack(&x) {
            return Ok(Inversion {
                point: x,
                iterations: k,
                residual: res,
            });
        }
        if res > prev {
            growth += 1;
            if growth >= DIVERGENCE_RUN {
                return Err(FrameError::Divergence {
                    iteration: k,
                    residual: res,
                });
            }
        } else {
            growth = 0;
        }
        prev = res;
        x = x.axpy(step, &r);
    }
    Err(FrameError::NoConvergence {
        iterations: cfg.max_iter,
        residual: prev,
    })
}
