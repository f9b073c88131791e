//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SimpsonOptions {
    /// Relative tolerance on the whole integral.
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub max_depth: u32,
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        SimpsonOptions {
            rel_tol: 1e-8,
            max_subdivisions: 1_000_000,
            max_depth: 60,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error_estimate: f64,
    pub subdivisions: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]`.
///
/// The absolute tolerance is `rel_tol` times a coarse estimate of the
/// integral's magnitude, split between halves on every bisection.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: SimpsonOptions) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error_estimate: 0.0, subdivisions: 0 });
    }
    // seed with a few panels so narrow features near one end are not missed
    const SEED_PANELS: usize = 16;
    let h = (b - a) / SEED_PANELS as f64;
    let mut stack = Vec::with_capacity(64);
    let mut coarse = 0.0;
    for k in 0..SEED_PANELS {
        let pa = a + h * k as f64;
        let pb = if k + 1 == SEED_PANELS { b } else { a + h * (k + 1) as f64 };
        let (fa, fm, fb) = (f(pa), f(0.5 * (pa + pb)), f(pb));
        let whole = simpson(pa, pb, fa, fm, fb);
        coarse += whole.abs();
        stack.push(Panel { a: pa, b: pb, fa, fm, fb, whole, tol: 0.0, depth: 0 });
    }
    let total_tol = opts.rel_tol * coarse.max(f64::MIN_POSITIVE);
    for p in &mut stack {
        p.tol = total_tol * (p.b - p.a).abs() / (b - a).abs();
    }

    let mut value = 0.0;
    let mut error = 0.0;
    let mut subdivisions = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if !delta.is_finite() {
            return Err(Error::Quadrature { achieved: f64::INFINITY, subdivisions });
        }
        if delta.abs() <= 15.0 * p.tol || p.depth >= opts.max_depth {
            value += left + right + delta / 15.0;
            error += delta.abs() / 15.0;
            continue;
        }
        subdivisions += 1;
        if subdivisions > opts.max_subdivisions {
            // remaining panels contribute their current estimates to the reported error
            let rest: f64 = stack.iter().map(|q| q.whole.abs()).sum::<f64>() + delta.abs();
            return Err(Error::Quadrature {
                achieved: (error + rest) / (value.abs() + left.abs() + right.abs()).max(f64::MIN_POSITIVE),
                subdivisions,
            });
        }
        let tol = p.tol / 2.0;
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth: p.depth + 1 });
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth: p.depth + 1 });
    }
    Ok(Integral { value, error_estimate: error, subdivisions })
}
