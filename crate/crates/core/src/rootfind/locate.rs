use std::f64::consts::PI;

use super::muller::{deflate, muller};
use super::{RootResult, RootfindError};
use crate::types::{ComplexBox, C64};

/// Settings for [`find_roots_in_box`].
#[derive(Debug, Clone, Copy)]
pub struct BoxSearch {
    pub tol: f64,
    pub max_iter: usize,
    /// Samples per edge before adaptive refinement of the phase walk.
    pub samples_per_side: usize,
    /// Cells are subdivided until they hold one root or reach this depth.
    pub max_depth: usize,
}

impl Default for BoxSearch {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100, samples_per_side: 24, max_depth: 12 }
    }
}

const MAX_PHASE_STEP: f64 = PI / 4.0;
const MAX_BISECTIONS: usize = 14;

fn phase_walk<F: Fn(C64) -> C64>(f: &F, a: C64, fa: C64, b: C64, fb: C64, depth: usize) -> Result<f64, RootfindError> {
    let d = (fb / fa).arg();
    if d.abs() <= MAX_PHASE_STEP || depth >= MAX_BISECTIONS {
        return Ok(d);
    }
    let m = (a + b) * 0.5;
    let fm = f(m);
    if fm.norm() == 0.0 || !fm.is_finite() {
        return Err(RootfindError::ZeroOnContour { at: m });
    }
    Ok(phase_walk(f, a, fa, m, fm, depth + 1)? + phase_walk(f, m, fm, b, fb, depth + 1)?)
}

/// Number of zeros minus poles of `f` inside the box (argument principle,
/// counter-clockwise walk with adaptive refinement of large phase jumps).
pub fn winding_number<F: Fn(C64) -> C64>(f: &F, bbox: &ComplexBox, samples_per_side: usize) -> Result<i64, RootfindError> {
    if !bbox.is_valid() {
        return Err(RootfindError::InvalidRegion);
    }
    let corners = [
        C64::new(bbox.re_min, bbox.im_min),
        C64::new(bbox.re_max, bbox.im_min),
        C64::new(bbox.re_max, bbox.im_max),
        C64::new(bbox.re_min, bbox.im_max),
    ];
    let n = samples_per_side.max(2);
    let mut pts = Vec::with_capacity(4 * n + 1);
    for s in 0..4 {
        let (p, q) = (corners[s], corners[(s + 1) % 4]);
        for k in 0..n {
            pts.push(p + (q - p) * (k as f64 / n as f64));
        }
    }
    pts.push(corners[0]);
    let vals: Vec<C64> = pts.iter().map(|&z| f(z)).collect();
    if let Some(i) = vals.iter().position(|v| v.norm() == 0.0 || !v.is_finite()) {
        return Err(RootfindError::ZeroOnContour { at: pts[i] });
    }
    let mut total = 0.0;
    for i in 0..pts.len() - 1 {
        total += phase_walk(f, pts[i], vals[i], pts[i + 1], vals[i + 1], 0)?;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Split fraction slightly off the midpoint so that symmetric root sets do
/// not land on cell edges.
const SPLIT: f64 = 0.5 + 0.5 / (7.0 * PI);

fn subdivide(b: &ComplexBox) -> [ComplexBox; 4] {
    let xm = b.re_min + SPLIT * b.width();
    let ym = b.im_min + (1.0 - SPLIT) * b.height();
    [
        ComplexBox::new(b.re_min, xm, b.im_min, ym),
        ComplexBox::new(xm, b.re_max, b.im_min, ym),
        ComplexBox::new(b.re_min, xm, ym, b.im_max),
        ComplexBox::new(xm, b.re_max, ym, b.im_max),
    ]
}

fn grown(b: &ComplexBox, frac: f64) -> ComplexBox {
    let dx = frac * b.width();
    let dy = frac * b.height();
    ComplexBox::new(b.re_min - dx, b.re_max + dx, b.im_min - dy, b.im_max + dy)
}

/// Muller from seeds near the cell centre, deflating roots already found in
/// the cell. Fails if an iterate escapes the (slightly grown) cell.
fn solve_cell<F: Fn(C64) -> C64>(f: &F, cell: &ComplexBox, count: usize, opts: &BoxSearch) -> Result<Vec<RootResult>, RootfindError> {
    let c = cell.center();
    let (w, h) = (cell.width(), cell.height());
    let region = grown(cell, 0.05);
    let mut local: Vec<C64> = Vec::new();
    let mut out = Vec::new();
    for _ in 0..count {
        let seeds = [c + C64::new(-0.1 * w, -0.05 * h), c + C64::new(0.12 * w, 0.0), c + C64::new(0.0, 0.15 * h)];
        let r = {
            let g = deflate(f, &local);
            muller(&g, seeds, opts.tol, opts.max_iter)?
        };
        if !region.contains(r.root) {
            return Err(RootfindError::NoConvergence { iterations: r.iterations, last: r.root, residual: r.residual });
        }
        local.push(r.root);
        out.push(r);
    }
    Ok(out)
}

fn search<F: Fn(C64) -> C64>(
    f: &F,
    cell: &ComplexBox,
    count: i64,
    depth: usize,
    opts: &BoxSearch,
    out: &mut Vec<RootResult>,
) -> Result<(), RootfindError> {
    if count <= 0 {
        return Ok(());
    }
    if count == 1 || depth >= opts.max_depth {
        match solve_cell(f, cell, count as usize, opts) {
            Ok(found) => {
                out.extend(found);
                return Ok(());
            }
            Err(e) if depth >= opts.max_depth => return Err(e),
            // seeds too far from the root for this cell size: refine
            Err(_) => {}
        }
    }
    for child in subdivide(cell) {
        let n = winding_number(f, &child, opts.samples_per_side)?;
        search(f, &child, n, depth + 1, opts, out)?;
    }
    Ok(())
}

/// All zeros of an analytic `f` inside `bbox`.
///
/// The box is subdivided until each cell encloses a single zero (argument
/// principle), and each zero is then polished with Muller. Poles inside the
/// box are not supported: the winding number counts zeros minus poles.
pub fn find_roots_in_box<F: Fn(C64) -> C64>(f: &F, bbox: &ComplexBox, opts: &BoxSearch) -> Result<Vec<RootResult>, RootfindError> {
    let total = winding_number(f, bbox, opts.samples_per_side)?;
    let mut out = Vec::new();
    search(f, bbox, total, 0, opts, &mut out)?;
    let scale = bbox.width().max(bbox.height());
    let mut unique: Vec<RootResult> = Vec::new();
    for r in out {
        if !bbox.contains(r.root) {
            continue;
        }
        if unique.iter().all(|u| (u.root - r.root).norm() > 1e-9 * scale) {
            unique.push(r);
        }
    }
    unique.sort_by(|a, b| a.root.re.total_cmp(&b.root.re).then(a.root.im.total_cmp(&b.root.im)));
    Ok(unique)
}
