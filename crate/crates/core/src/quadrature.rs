//! Log-domain quadrature for the unimodal integrands behind the exact Bayes
//! factors.
//!
//! The integrand is supplied as `f(x) = ln h(x)` on the whole real line. The
//! mode is located by a coarse scan followed by golden-section refinement,
//! the integration window is cut where `f` falls 60 nats below the mode, and
//! composite 10-point Gauss–Legendre rules are applied with panel doubling
//! until the log result stabilises.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convergence controls for the exact mixture and intrinsic Bayes factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Successive refinements must agree within `rel_tol * max(1, |log I|)`.
    pub rel_tol: f64,
    /// Maximum number of panel doublings.
    pub max_refinements: u32,
    /// Panels used by the first pass.
    pub initial_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_refinements: 20, initial_panels: 64 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::domain(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_refinements < 1 {
            return Err(Error::domain("max_refinements must be at least 1"));
        }
        if self.initial_panels < 1 {
            return Err(Error::domain("initial_panels must be at least 1"));
        }
        Ok(())
    }
}

// Published 20-digit values; the extra digits are harmless.
#[allow(clippy::excessive_precision)]
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_21,
    0.433_395_394_129_247_19,
    0.679_409_568_299_024_41,
    0.865_063_366_688_984_51,
    0.973_906_528_517_171_72,
];
#[allow(clippy::excessive_precision)]
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_36,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_59,
    0.066_671_344_308_688_14,
];

/// Depth (in nats below the mode) at which the integrand is truncated.
const WINDOW_DEPTH: f64 = 60.0;
const SCAN_STEP: f64 = 0.5;
const MAX_SCAN_STEPS: usize = 100_000;

/// `ln ∫ exp(f(x)) dx` over the real line for a unimodal log-integrand that
/// tends to `-inf` in both directions. `start` is a guess near the mode.
pub fn log_integrate_real_line<F: Fn(f64) -> f64>(f: F, start: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let (lo, hi, mode) = locate_window(&f, start)?;
    let mut panels = spec.initial_panels;
    let mut prev = composite(&f, lo, hi, panels, mode);
    let mut change = f64::INFINITY;
    for _ in 0..spec.max_refinements {
        panels *= 2;
        let next = composite(&f, lo, hi, panels, mode);
        change = (next - prev).abs();
        if change <= spec.rel_tol * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergence { last_change: change, tolerance: spec.rel_tol })
}

/// Returns the integration window and the log-integrand's maximum.
fn locate_window<F: Fn(f64) -> f64>(f: &F, start: f64) -> Result<(f64, f64, f64)> {
    let f0 = f(start);
    if f0.is_nan() {
        return Err(Error::domain(format!("log-integrand is NaN at {start}")));
    }
    let (mut best_x, mut best_f) = (start, f0);
    let walk = |dir: f64, best_x: &mut f64, best_f: &mut f64| -> Result<f64> {
        let mut x = start;
        for _ in 0..MAX_SCAN_STEPS {
            x += dir * SCAN_STEP;
            let fx = f(x);
            if fx > *best_f {
                *best_x = x;
                *best_f = fx;
            } else if !(fx >= *best_f - WINDOW_DEPTH) {
                return Ok(x);
            }
        }
        Err(Error::domain("log-integrand does not decay; integral diverges"))
    };
    let right = walk(1.0, &mut best_x, &mut best_f)?;
    let left = walk(-1.0, &mut best_x, &mut best_f)?;
    if !best_f.is_finite() {
        return Err(Error::domain("log-integrand has no finite maximum"));
    }

    // The grid maximum can sit far below a narrow peak; refine it.
    let (mut a, mut b) = ((best_x - SCAN_STEP).max(left), (best_x + SCAN_STEP).min(right));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let (mode_x, mode_f) = [(best_x, best_f), (c, fc), (d, fd)]
        .into_iter()
        .filter(|p| p.1.is_finite())
        .fold((best_x, best_f), |acc, p| if p.1 > acc.1 { p } else { acc });

    // Tighten both window edges to the WINDOW_DEPTH contour.
    let cut = mode_f - WINDOW_DEPTH;
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if f(mid) >= cut {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    Ok((edge(mode_x, left), edge(mode_x, right), mode_f))
}

fn composite<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize, shift: f64) -> f64 {
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            sum += w * ((f(mid - half * x) - shift).exp() + (f(mid + half * x) - shift).exp());
        }
    }
    shift + (sum * half).ln()
}
