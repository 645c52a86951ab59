use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RootfindError;
use crate::types::C64;

#[derive(Debug, Clone, Copy)]
pub struct BeynOptions {
    pub quadrature_points: usize,
    pub probe_columns: usize,
    /// Singular values below `rank_tol * sigma_max` are treated as zero.
    pub rank_tol: f64,
    /// Allowed drift of each eigenvalue, relative to the contour radius, when
    /// the quadrature is halved.
    pub stability_tol: f64,
    pub seed: u64,
}

impl Default for BeynOptions {
    fn default() -> Self {
        Self { quadrature_points: 64, probe_columns: 4, rank_tol: 1e-10, stability_tol: 1e-4, seed: 7 }
    }
}

fn probe_block(n: usize, l: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, l, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Eigenvalues enclosed by the circle from the moment pair `(A0, A1)`.
fn extract(a0: &DMatrix<C64>, a1: &DMatrix<C64>, center: C64, radius: f64, opts: &BeynOptions) -> Result<Vec<C64>, RootfindError> {
    let l = a0.ncols();
    let svd = a0.clone().svd(true, true);
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(Vec::new());
    }
    // nalgebra does not sort singular values
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let rank = order.iter().filter(|&&i| sigma[i] > opts.rank_tol * smax).count();
    if rank == 0 {
        return Ok(Vec::new());
    }
    if rank >= l {
        return Err(RootfindError::RankOverflow { rank });
    }
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let keep = &order[..rank];
    let u0 = DMatrix::from_fn(u.nrows(), rank, |r, c| u[(r, keep[c])]);
    let w0 = DMatrix::from_fn(l, rank, |r, c| v_t[(keep[c], r)].conj());
    let sinv = DMatrix::from_fn(rank, rank, |r, c| if r == c { C64::new(1.0 / sigma[keep[r]], 0.0) } else { C64::new(0.0, 0.0) });
    let b = u0.adjoint() * a1 * w0 * sinv;
    let eig = b.eigenvalues().ok_or(RootfindError::QuadratureSuspect { deviation: f64::NAN })?;
    let mut out: Vec<C64> = eig.iter().copied().filter(|z| (z - center).norm() < radius).collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Contour-integral eigenvalue solver for an analytic matrix family `F`.
///
/// Trapezoidal quadrature of `F(z)^{-1} V` and `z F(z)^{-1} V` on the
/// circle, followed by a rank-revealing SVD and a small dense eigenproblem.
/// Results are checked against the same computation on every other node;
/// if they drift by more than `stability_tol * radius` the call fails with
/// `QuadratureSuspect`. The returned values are meant as Muller seeds.
pub fn beyn<F>(f: F, center: C64, radius: f64, opts: &BeynOptions) -> Result<Vec<C64>, RootfindError>
where
    F: Fn(C64) -> DMatrix<C64> + Sync,
{
    let n_q = opts.quadrature_points.max(8) & !1;
    let probe_n = f(center).nrows();
    let v = probe_block(probe_n, opts.probe_columns, opts.seed);

    let solves: Vec<Result<(C64, DMatrix<C64>), RootfindError>> = (0..n_q)
        .into_par_iter()
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n_q as f64;
            let e = C64::from_polar(radius, t);
            let z = center + e;
            let lu = f(z).lu();
            let x = lu.solve(&v).ok_or(RootfindError::SingularOnContour { at: z })?;
            Ok((e, x))
        })
        .collect();
    let mut nodes = Vec::with_capacity(n_q);
    for s in solves {
        nodes.push(s?);
    }

    let moments = |stride: usize| {
        let count = n_q / stride;
        let mut a0 = DMatrix::<C64>::zeros(probe_n, v.ncols());
        let mut a1 = a0.clone();
        for (e, x) in nodes.iter().step_by(stride) {
            let w = *e / count as f64;
            a0 += x * w;
            a1 += x * (w * (center + e));
        }
        (a0, a1)
    };

    let (a0, a1) = moments(1);
    let full = extract(&a0, &a1, center, radius, opts)?;
    let (h0, h1) = moments(2);
    let half = extract(&h0, &h1, center, radius, opts).unwrap_or_default();
    let mut deviation: f64 = if half.len() == full.len() { 0.0 } else { f64::INFINITY };
    for z in &full {
        let d = half.iter().map(|h| (h - z).norm()).fold(f64::INFINITY, f64::min);
        deviation = deviation.max(d);
    }
    if deviation > opts.stability_tol * radius {
        return Err(RootfindError::QuadratureSuspect { deviation });
    }
    Ok(full)
}
