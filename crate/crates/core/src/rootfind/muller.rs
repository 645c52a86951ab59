use super::{RootResult, RootfindError};
use crate::types::C64;

/// Extra iterations taken after the tolerance is first met.
const POLISH_STEPS: usize = 2;

fn median(mut v: [f64; 3]) -> f64 {
    v.sort_by(f64::total_cmp);
    v[1]
}

/// Muller's method from three distinct seeds.
///
/// Convergence is declared once `|f(z)| <= tol * scale`, `scale` being the
/// median of `|f|` over the seeds, so the test (and every iterate) is
/// unchanged when `f` is multiplied by a constant. A couple of polishing
/// steps follow. If the iteration stalls at round-off level before reaching
/// the tolerance the best iterate is returned with `converged = false`.
pub fn muller<F>(mut f: F, seeds: [C64; 3], tol: f64, max_iter: usize) -> Result<RootResult, RootfindError>
where
    F: FnMut(C64) -> C64,
{
    let [mut x0, mut x1, mut x2] = seeds;
    if x0 == x1 || x1 == x2 || x0 == x2 {
        return Err(RootfindError::BadSeeds);
    }
    let (mut f0, mut f1, mut f2) = (f(x0), f(x1), f(x2));
    let mut scale = median([f0.norm(), f1.norm(), f2.norm()]);
    if scale == 0.0 || !scale.is_finite() {
        scale = f0.norm().max(f1.norm()).max(f2.norm());
        if scale == 0.0 || !scale.is_finite() {
            scale = 1.0;
        }
    }

    let mut best = (x2, f2.norm());
    for (x, fx) in [(x0, f0), (x1, f1)] {
        if fx.norm() < best.1 {
            best = (x, fx.norm());
        }
    }
    let mut polish_left: Option<usize> = None;

    for iter in 1..=max_iter {
        if f2.norm() == 0.0 {
            return Ok(RootResult { root: x2, residual: 0.0, iterations: iter - 1, converged: true });
        }
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let d1 = (f1 - f0) / h1;
        let d2 = (f2 - f1) / h2;
        let a = (d2 - d1) / (h2 + h1);
        let b = a * h2 + d2;
        let disc = (b * b - a * f2 * 4.0).sqrt();
        let den = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        if den.norm() == 0.0 || !den.is_finite() {
            if best.1 <= tol * scale {
                break;
            }
            return Err(RootfindError::DegenerateStep { at: x2 });
        }
        let dz = -f2 * 2.0 / den;
        let x3 = x2 + dz;
        let f3 = f(x3);
        if !f3.is_finite() {
            return Err(RootfindError::DegenerateStep { at: x3 });
        }
        if f3.norm() < best.1 {
            best = (x3, f3.norm());
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = x3;
        f2 = f3;

        if let Some(left) = polish_left.as_mut() {
            if *left == 0 {
                return Ok(finish(best, scale, tol, iter));
            }
            *left -= 1;
        } else if best.1 <= tol * scale {
            polish_left = Some(POLISH_STEPS - 1);
        }

        let stalled = dz.norm() <= 4.0 * f64::EPSILON * x2.norm().max(f64::MIN_POSITIVE);
        if stalled || x1 == x2 {
            return Ok(finish(best, scale, tol, iter));
        }
    }
    if best.1 <= tol * scale {
        return Ok(finish(best, scale, tol, max_iter));
    }
    Err(RootfindError::NoConvergence { iterations: max_iter, last: best.0, residual: best.1 / scale })
}

fn finish(best: (C64, f64), scale: f64, tol: f64, iterations: usize) -> RootResult {
    let residual = best.1 / scale;
    RootResult { root: best.0, residual, iterations, converged: residual <= tol }
}

/// `f(z) / Π (z - r)` over already-found roots, so Muller does not return
/// to them.
pub fn deflate<'a, F>(f: F, found: &'a [C64]) -> impl Fn(C64) -> C64 + 'a
where
    F: Fn(C64) -> C64 + 'a,
{
    move |z| {
        let mut v = f(z);
        for r in found {
            v /= z - r;
        }
        v
    }
}
