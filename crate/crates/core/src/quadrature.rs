//! Adaptive Simpson quadrature.

use num_complex::Complex64 as C64;

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const MAX_SUBDIVISIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub subdivisions: usize,
    /// False when the subdivision cap was hit before every panel converged.
    pub converged: bool,
}

struct Budget {
    used: usize,
    cap: usize,
    exhausted: bool,
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, subdivisions: 0, converged: true };
    }
    // Seed on a uniform partition so oscillatory integrands are not
    // mistaken for flat ones by a single coarse Simpson estimate.
    const SEED_PANELS: usize = 64;
    let mut budget = Budget { used: SEED_PANELS, cap: MAX_SUBDIVISIONS, exhausted: false };
    let h = (b - a) / SEED_PANELS as f64;
    let panel_tol = tol / SEED_PANELS as f64;
    let mut total = 0.0;
    for k in 0..SEED_PANELS {
        let lo = a + h * k as f64;
        let hi = if k + 1 == SEED_PANELS { b } else { lo + h };
        let (flo, fhi) = (f(lo), f(hi));
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = simpson(lo, hi, flo, fmid, fhi);
        total += refine(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, 48, &mut budget);
    }
    Quadrature { value: total, subdivisions: budget.used, converged: !budget.exhausted }
}

/// Complex integrand, real and imaginary parts integrated separately.
pub fn adaptive_simpson_complex(f: impl Fn(f64) -> C64, a: f64, b: f64, tol: f64) -> (C64, bool) {
    let re = adaptive_simpson(|x| f(x).re, a, b, tol / 2.0);
    let im = adaptive_simpson(|x| f(x).im, a, b, tol / 2.0);
    (C64::new(re.value, im.value), re.converged && im.converged)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut Budget,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 || budget.used >= budget.cap {
        if delta.abs() > 15.0 * tol {
            budget.exhausted = true;
        }
        return left + right + delta / 15.0;
    }
    budget.used += 1;
    refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, budget)
        + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, budget)
}
