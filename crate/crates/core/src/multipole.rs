//! Two-disk multipole solver: the cavity disk at the origin and a small disk
//! particle centered at `(L, 0)`, coupled through Graf's addition theorem.
//! Its resonances serve as the exact reference for the asymptotic formulas.
//!
//! Unknowns are outgoing multipole amplitudes only; interior coefficients
//! are eliminated through the single-disk (Mie) relations. Every row is
//! multiplied by its Mie denominator so the system is analytic in `omega`.
//! The geometry is symmetric about the x-axis, so amplitudes split into the
//! two mirror classes `c_{-n} = ±(-1)^n c_n` (cosine/sine families).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::cavity2d::{dispersion, Parity};
use crate::rootfind::{beyn, muller, BeynOptions, RootResult, RootfindError};
use crate::specfun::{bessel_j_seq, hankel1_seq, SpecfunError};
use crate::types::{Medium, C64, I};


/// Muller tolerance for oracle roots.
pub const ORACLE_TOL: f64 = 1e-14;
/// Largest accepted root movement when both truncations grow by two.
pub const STABILITY_TOL: f64 = 1e-8;
/// `|H_n / (R H_n')|` below which a root is rejected as a Hankel zero.
pub const SPURIOUS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultipoleError {
    #[error("Mie denominator of order {m} vanishes at omega = {omega}")]
    PoleOfDenominator { m: i64, omega: C64 },
    #[error("point at distance {distance} is outside the re-expansion disk of radius {limit}")]
    ValidityViolation { distance: f64, limit: f64 },
    #[error("invalid two-disk geometry: {0}")]
    InvalidGeometry(String),
    #[error("Muller did not converge from {seed}")]
    NoConvergence { seed: C64 },
    #[error("root {root} moved by {change:e} under truncation refinement")]
    UnstableRoot { root: C64, change: f64 },
    #[error("root {root} sits on a Hankel zero")]
    SpuriousRoot { root: C64 },
    #[error("determinant overflow at omega = {omega}")]
    Overflow { omega: C64 },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Root(#[from] RootfindError),
}

/// Numerator and denominator of the single-disk response
/// `s_m = -num/den` for orders `0..=nmax`.
fn mie_parts(radius: f64, interior: &Medium, exterior: &Medium, nmax: usize, omega: C64) -> Result<Vec<(C64, C64)>, MultipoleError> {
    let ki = interior.wavenumber(omega);
    let ke = exterior.wavenumber(omega);
    let ji = bessel_j_seq(nmax + 1, ki * radius)?;
    let je = bessel_j_seq(nmax + 1, ke * radius)?;
    let he = hankel1_seq(nmax + 1, ke * radius)?;
    let ai = ki / interior.eps;
    let ae = ke / exterior.eps;
    Ok((0..=nmax)
        .map(|n| {
            let num = if interior == exterior {
                C64::new(0.0, 0.0)
            } else {
                ai * ji.deriv(n) * je.value(n) - ae * ji.value(n) * je.deriv(n)
            };
            let den = ai * ji.deriv(n) * he.value(n) - ae * ji.value(n) * he.deriv(n);
            (num, den)
        })
        .collect())
}

/// Response `s_m` of a homogeneous disk: an incident `J_m e^{i m theta}`
/// produces the outgoing `s_m H_m e^{i m theta}`.
pub fn mie_coeff(radius: f64, interior: &Medium, exterior: &Medium, m: i64, omega: C64) -> Result<C64, MultipoleError> {
    let n = m.unsigned_abs() as usize;
    let (num, den) = mie_parts(radius, interior, exterior, n, omega)?[n];
    if den.norm() == 0.0 || den.norm() <= 1e-300 || !(num / den).is_finite() {
        return Err(MultipoleError::PoleOfDenominator { m, omega });
    }
    Ok(-num / den)
}

/// Graf re-expansion of outgoing waves centered at `from` in regular waves
/// centered at `to`. Entry `(m + dst_max, n + src_max)` is `T_{mn}` with
/// `H_n(omega |x - from|) e^{i n theta_from} = Σ_m T_{mn} J_m(omega |x - to|) e^{i m theta_to}`
/// for `|x - to| < |from - to|`.
#[derive(Debug, Clone)]
pub struct Translation {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub omega: C64,
    pub src_max: usize,
    pub dst_max: usize,
    pub matrix: DMatrix<C64>,
}

fn separation(from: [f64; 2], to: [f64; 2]) -> (f64, f64) {
    let dx = from[0] - to[0];
    let dy = from[1] - to[1];
    (dx.hypot(dy), dy.atan2(dx))
}

/// `T_{mn} = H_{n-m}(omega d) e^{i (n-m)(phi + pi)}` where `(d, phi)` is the
/// polar form of `from - to`.
pub fn graf_translate(from: [f64; 2], to: [f64; 2], omega: C64, src_max: usize, dst_max: usize) -> Result<Translation, MultipoleError> {
    let (d, phi) = separation(from, to);
    if d == 0.0 {
        return Err(MultipoleError::ValidityViolation { distance: 0.0, limit: 0.0 });
    }
    let h = hankel1_seq(src_max + dst_max, omega * d)?;
    let rows = 2 * dst_max + 1;
    let cols = 2 * src_max + 1;
    let matrix = DMatrix::from_fn(rows, cols, |i, j| {
        let m = i as i64 - dst_max as i64;
        let n = j as i64 - src_max as i64;
        let k = n - m;
        h.value_signed(k) * (I * (k as f64 * (phi + PI))).exp()
    });
    Ok(Translation { from, to, omega, src_max, dst_max, matrix })
}

/// Regular-to-regular re-expansion (valid everywhere):
/// `J_n(omega |x - from|) e^{i n theta_from} = Σ_m R_{mn} J_m(omega |x - to|) e^{i m theta_to}`
/// with `R_{mn} = J_{n-m}(omega d) e^{i (n-m)(phi + pi)}`.
pub fn graf_regular(from: [f64; 2], to: [f64; 2], omega: C64, src_max: usize, dst_max: usize) -> Result<DMatrix<C64>, MultipoleError> {
    let (d, phi) = separation(from, to);
    let j = bessel_j_seq(src_max + dst_max, omega * d)?;
    Ok(DMatrix::from_fn(2 * dst_max + 1, 2 * src_max + 1, |i, jj| {
        let m = i as i64 - dst_max as i64;
        let n = jj as i64 - src_max as i64;
        let k = n - m;
        j.value_signed(k) * (I * (k as f64 * (phi + PI))).exp()
    }))
}

impl Translation {
    /// Evaluate `Σ_n src_n H_n(...)` at `x` through the regular expansion.
    pub fn eval_regular(&self, src: &[C64], x: [f64; 2]) -> Result<C64, MultipoleError> {
        let (limit, _) = separation(self.from, self.to);
        let (r, theta) = separation(x, self.to);
        if r >= limit {
            return Err(MultipoleError::ValidityViolation { distance: r, limit });
        }
        let coeffs = &self.matrix * nalgebra::DVector::from_column_slice(src);
        let j = bessel_j_seq(self.dst_max, self.omega * r)?;
        Ok((0..coeffs.len())
            .map(|i| {
                let m = i as i64 - self.dst_max as i64;
                coeffs[i] * j.value_signed(m) * (I * (m as f64 * theta)).exp()
            })
            .sum())
    }
}

/// Cavity disk at the origin plus a disk particle centered at `(l, 0)`,
/// exterior medium vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDiskGeometry {
    pub radius: f64,
    pub cavity: Medium,
    pub l: f64,
    pub particle_radius: f64,
    pub particle: Medium,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

impl TwoDiskGeometry {
    pub fn side(&self) -> Result<Side, MultipoleError> {
        let ok = self.radius > 0.0 && self.particle_radius > 0.0 && self.l >= 0.0;
        if ok && self.l > self.radius + self.particle_radius {
            Ok(Side::Outside)
        } else if ok && self.l + self.particle_radius < self.radius {
            Ok(Side::Inside)
        } else {
            Err(MultipoleError::InvalidGeometry(format!(
                "R = {}, particle radius {} at L = {}: disks overlap",
                self.radius, self.particle_radius, self.l
            )))
        }
    }
}

/// Truncation orders: cavity amplitudes `-n1..=n1`, particle `-n2..=n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub n1: usize,
    pub n2: usize,
}

impl Truncation {
    /// `n1 = m + 12`, `n2 = 6`.
    pub fn for_order(m: u32) -> Self {
        Self { n1: m as usize + 12, n2: 6 }
    }

    /// Starting point of the automatic ladder: the cavity series for a
    /// particle a distance `|L - R|` from the wall only starts converging
    /// beyond order `~ R / |L - R|`.
    pub fn for_geometry(m: u32, geom: &TwoDiskGeometry) -> Self {
        let near = (2.0 * geom.radius / (geom.l - geom.radius).abs()).ceil();
        let n1 = if near.is_finite() { (near as usize).min(MAX_N1 / 2) } else { MAX_N1 / 2 };
        Self { n1: n1.max(m as usize + 12), n2: 6 }
    }

    pub fn refined(self) -> Self {
        Self { n1: self.n1 + 2, n2: self.n2 + 2 }
    }
}

/// Orders up to which the direct sequences are used; beyond, ratio
/// recurrences in log form (no overflow at any order).
const DIRECT_MAX: usize = 40;

/// Cylinder function of orders `0..=nmax` at one argument as complex
/// logarithms of the values plus logarithmic derivatives `f'/f`.
struct LogCyl {
    log: Vec<C64>,
    dlog: Vec<C64>,
}

/// `J_n` via the backward ratio recurrence `J_n/J_{n-1} = 1/(2n/z - J_{n+1}/J_n)`.
fn log_bessel_j(nmax: usize, z: C64) -> Result<LogCyl, MultipoleError> {
    let top = nmax + 40 + 2 * z.norm().ceil() as usize;
    let mut ratio = vec![C64::new(0.0, 0.0); nmax + 2];
    let mut next = C64::new(0.0, 0.0);
    for n in (1..=top).rev() {
        next = (C64::new(2.0 * n as f64, 0.0) / z - next).inv();
        if n <= nmax + 1 {
            ratio[n] = next;
        }
    }
    let direct = bessel_j_seq(nmax.min(DIRECT_MAX), z)?;
    let mut log = Vec::with_capacity(nmax + 1);
    let mut dlog = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let v = if n <= DIRECT_MAX { direct.value(n) } else { C64::new(0.0, 0.0) };
        if n <= DIRECT_MAX && v.norm() > 1e-250 {
            log.push(v.ln());
            dlog.push(direct.deriv(n) / v);
        } else {
            let prev = log[n - 1];
            log.push(prev + ratio[n].ln());
            dlog.push(ratio[n].inv() - n as f64 / z);
        }
    }
    Ok(LogCyl { log, dlog })
}

/// `H^(1)_n` via the forward recurrence of `H_n/H_{n-1}`.
fn log_hankel1(nmax: usize, z: C64) -> Result<LogCyl, MultipoleError> {
    let direct = hankel1_seq(nmax.min(DIRECT_MAX), z)?;
    let mut log = Vec::with_capacity(nmax + 1);
    let mut dlog = Vec::with_capacity(nmax + 1);
    let mut q = C64::new(0.0, 0.0); // H_n / H_{n-1}
    for n in 0..=nmax {
        if n <= DIRECT_MAX && direct.value(n).norm() < 1e250 {
            let v = direct.value(n);
            if n > 0 {
                q = v / direct.value(n - 1);
            }
            log.push(v.ln());
            dlog.push(direct.deriv(n) / v);
        } else {
            q = C64::new(2.0 * (n - 1) as f64, 0.0) / z - q.inv();
            let prev = log[n - 1];
            log.push(prev + q.ln());
            dlog.push(q.inv() - n as f64 / z);
        }
    }
    Ok(LogCyl { log, dlog })
}

/// The two-disk system in structured form. Both self-blocks are diagonal:
/// cavity rows `d1_m c_m + Σ_n b_mn d_n = 0`, particle rows
/// `d2_m d_m + Σ_n c_mn c_n = 0`.
#[derive(Debug, Clone)]
struct Coupled {
    d1: Vec<C64>,
    b: DMatrix<C64>,
    d2: Vec<C64>,
    c: DMatrix<C64>,
}

impl Coupled {
    fn dense(&self) -> DMatrix<C64> {
        let (s1, s2) = (self.d1.len(), self.d2.len());
        let mut a = DMatrix::zeros(s1 + s2, s1 + s2);
        for (i, v) in self.d1.iter().enumerate() {
            a[(i, i)] = *v;
        }
        for (i, v) in self.d2.iter().enumerate() {
            a[(s1 + i, s1 + i)] = *v;
        }
        a.view_mut((0, s1), (s1, s2)).copy_from(&self.b);
        a.view_mut((s1, 0), (s2, s1)).copy_from(&self.c);
        a
    }

    /// Restriction to one mirror class.
    fn project(&self, trunc: Truncation, parity: Parity) -> Coupled {
        let cav = block_basis(trunc.n1, parity);
        let par = block_basis(trunc.n2, parity);
        let comb = |m: &DMatrix<C64>, row: usize, (col, partner): (usize, Option<(usize, f64)>)| {
            m[(row, col)] + partner.map_or(C64::new(0.0, 0.0), |(pc, w)| m[(row, pc)] * w)
        };
        Coupled {
            d1: cav.iter().map(|&(p, _)| self.d1[p]).collect(),
            b: DMatrix::from_fn(cav.len(), par.len(), |i, j| comb(&self.b, cav[i].0, par[j])),
            d2: par.iter().map(|&(p, _)| self.d2[p]).collect(),
            c: DMatrix::from_fn(par.len(), cav.len(), |i, j| comb(&self.c, par[i].0, cav[j])),
        }
    }
}

/// Particle outside. Unknowns are surface values `c_n H_n(omega R)` and
/// `d_n H_n(omega rho)`; cavity rows are divided by `J_n(k R)`, particle rows
/// by `J_n(k_p rho)`. Every entry is then O(n) or decays like `(R/L)^n`, at
/// the price of poles where those Bessel factors vanish (real `k R` only).
fn outside_system(geom: &TwoDiskGeometry, omega: C64, trunc: Truncation) -> Result<Coupled, MultipoleError> {
    let Truncation { n1, n2 } = trunc;
    let (r, rho, l) = (geom.radius, geom.particle_radius, geom.l);
    let kc = geom.cavity.wavenumber(omega);
    let kp = geom.particle.wavenumber(omega);
    let (ac, ap) = (kc / geom.cavity.eps, kp / geom.particle.eps);
    let j_cav = log_bessel_j(n1, kc * r)?;
    let j_out = log_bessel_j(n1, omega * r)?;
    let h_out = log_hankel1(n1, omega * r)?;
    let j_par = log_bessel_j(n2, kp * rho)?;
    let j_pout = log_bessel_j(n2, omega * rho)?;
    let h_pout = log_hankel1(n2, omega * rho)?;
    let h_l = log_hankel1(n1 + n2, omega * l)?;
    let sign = |k: i64| if k % 2 == 0 { 1.0 } else { -1.0 };
    // H_k(omega L) for signed k
    let hl = |k: i64| (h_l.log[k.unsigned_abs() as usize], if k < 0 { sign(k) } else { 1.0 });
    let (s1, s2) = (2 * n1 + 1, 2 * n2 + 1);
    let ord = |i: usize, nmax: usize| i as i64 - nmax as i64;

    let mut d1 = Vec::with_capacity(s1);
    let mut b = DMatrix::zeros(s1, s2);
    for i in 0..s1 {
        let m = ord(i, n1);
        let u = m.unsigned_abs() as usize;
        d1.push(ac * j_cav.dlog[u] - omega * h_out.dlog[u]);
        let mix = ac * j_cav.dlog[u] - omega * j_out.dlog[u];
        for j in 0..s2 {
            let n = ord(j, n2);
            // T12_mn = H_{n-m}(omega L) (-1)^{n-m}
            let (lh, sg) = hl(n - m);
            let mag = (j_out.log[u] + lh - h_pout.log[n.unsigned_abs() as usize]).exp();
            b[(i, j)] = mix * mag * (sg * sign(n - m));
        }
    }
    let mut d2 = Vec::with_capacity(s2);
    let mut c = DMatrix::zeros(s2, s1);
    for i in 0..s2 {
        let m = ord(i, n2);
        let u = m.unsigned_abs() as usize;
        d2.push(ap * j_par.dlog[u] - omega * h_pout.dlog[u]);
        // identical media: the particle is invisible, exactly
        let mix = if geom.particle == Medium::vacuum() { C64::new(0.0, 0.0) } else { ap * j_par.dlog[u] - omega * j_pout.dlog[u] };
        for j in 0..s1 {
            let n = ord(j, n1);
            // T21_mn = H_{n-m}(omega L)
            let (lh, sg) = hl(n - m);
            let mag = (j_pout.log[u] + lh - h_out.log[n.unsigned_abs() as usize]).exp();
            c[(i, j)] = mix * mag * sg;
        }
    }
    Ok(Coupled { d1, b, d2, c })
}

/// Particle inside. Unknowns `a` (regular field in the cavity medium) and
/// `d`; rows `F a + G (U d) = 0`, `den2 d + num2 (V a) = 0` with `F` the
/// cavity dispersion function and `G` its Hankel counterpart.
fn inside_system(geom: &TwoDiskGeometry, omega: C64, trunc: Truncation) -> Result<Coupled, MultipoleError> {
    let Truncation { n1, n2 } = trunc;
    let (s1, s2) = (2 * n1 + 1, 2 * n2 + 1);
    let kh = geom.cavity.wavenumber(omega);
    let p2 = mie_parts(geom.particle_radius, &geom.particle, &geom.cavity, n2, omega)?;
    let kr = kh * geom.radius;
    let wr = omega * geom.radius;
    let j_in = bessel_j_seq(n1 + 1, kr)?;
    let h_in = hankel1_seq(n1 + 1, kr)?;
    let h_out = hankel1_seq(n1 + 1, wr)?;
    let jl = bessel_j_seq(n1 + n2, kh * geom.l)?;
    let ai = kh / geom.cavity.eps;
    let ord = |i: usize, nmax: usize| i as i64 - nmax as i64;
    let mut d1 = Vec::with_capacity(s1);
    let mut b = DMatrix::zeros(s1, s2);
    for i in 0..s1 {
        let m = ord(i, n1);
        let u = m.unsigned_abs() as usize;
        d1.push(ai * j_in.deriv(u) * h_out.value(u) - omega * j_in.value(u) * h_out.deriv(u));
        let g = ai * h_in.deriv(u) * h_out.value(u) - omega * h_in.value(u) * h_out.deriv(u);
        for j in 0..s2 {
            b[(i, j)] = g * jl.value_signed(m - ord(j, n2));
        }
    }
    let mut d2 = Vec::with_capacity(s2);
    let mut c = DMatrix::zeros(s2, s1);
    for i in 0..s2 {
        let m = ord(i, n2);
        let (num, den) = p2[m.unsigned_abs() as usize];
        d2.push(den);
        for j in 0..s1 {
            c[(i, j)] = num * jl.value_signed(ord(j, n1) - m);
        }
    }
    Ok(Coupled { d1, b, d2, c })
}

fn coupled(geom: &TwoDiskGeometry, omega: C64, trunc: Truncation) -> Result<Coupled, MultipoleError> {
    match geom.side()? {
        Side::Outside => outside_system(geom, omega, trunc),
        Side::Inside => inside_system(geom, omega, trunc),
    }
}

/// Full (both mirror classes) system matrix at `omega`, cavity unknowns
/// `-n1..=n1` first, then particle unknowns `-n2..=n2`.
pub fn system_matrix(geom: &TwoDiskGeometry, omega: C64, trunc: Truncation) -> Result<DMatrix<C64>, MultipoleError> {
    Ok(coupled(geom, omega, trunc)?.dense())
}

/// Mirror class of amplitudes: `Cos` is `c_{-n} = (-1)^n c_n`, `Sin` is
/// `c_{-n} = -(-1)^n c_n`.
fn block_basis(nmax: usize, parity: Parity) -> Vec<(usize, Option<(usize, f64)>)> {
    // (index of c_n, partner index and weight), n = 0 only for Cos
    let start = if parity == Parity::Cos { 0 } else { 1 };
    let sigma = if parity == Parity::Cos { 1.0 } else { -1.0 };
    (start..=nmax)
        .map(|n| {
            let pos = nmax + n;
            if n == 0 {
                (pos, None)
            } else {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                (pos, Some((nmax - n, sigma * sign)))
            }
        })
        .collect()
}

/// System restricted to one mirror class.
pub fn block_matrix(geom: &TwoDiskGeometry, omega: C64, trunc: Truncation, parity: Parity) -> Result<DMatrix<C64>, MultipoleError> {
    Ok(coupled(geom, omega, trunc)?.project(trunc, parity).dense())
}

/// Determinant of one mirror block with row and column scalings frozen at
/// `anchor`, so the function stays analytic in `omega`. Evaluated through
/// the Schur complement on the (small) particle block.
pub struct BlockDeterminant {
    geom: TwoDiskGeometry,
    trunc: Truncation,
    parity: Parity,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl BlockDeterminant {
    pub fn new(geom: TwoDiskGeometry, trunc: Truncation, parity: Parity, anchor: C64) -> Result<Self, MultipoleError> {
        let p = coupled(&geom, anchor, trunc)?.project(trunc, parity);
        let (s1, s2) = (p.d1.len(), p.d2.len());
        let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
        let mut row_scale: Vec<f64> = (0..s1).map(|i| inv_or_one(p.d1[i].norm().max(max(&mut p.b.row(i).iter().map(|v| v.norm()))))).collect();
        row_scale.extend((0..s2).map(|i| inv_or_one(p.d2[i].norm().max(max(&mut p.c.row(i).iter().map(|v| v.norm()))))));
        let mut col_scale: Vec<f64> = (0..s1)
            .map(|j| inv_or_one((row_scale[j] * p.d1[j].norm()).max(max(&mut (0..s2).map(|i| row_scale[s1 + i] * p.c[(i, j)].norm())))))
            .collect();
        col_scale.extend(
            (0..s2).map(|j| inv_or_one((row_scale[s1 + j] * p.d2[j].norm()).max(max(&mut (0..s1).map(|i| row_scale[i] * p.b[(i, j)].norm()))))),
        );
        Ok(Self { geom, trunc, parity, row_scale, col_scale })
    }

    pub fn matrix(&self, omega: C64) -> Result<DMatrix<C64>, MultipoleError> {
        let mut b = block_matrix(&self.geom, omega, self.trunc, self.parity)?;
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                b[(i, j)] *= self.row_scale[i] * self.col_scale[j];
            }
        }
        Ok(b)
    }

    pub fn eval(&self, omega: C64) -> Result<C64, MultipoleError> {
        let p = coupled(&self.geom, omega, self.trunc)?.project(self.trunc, self.parity);
        let (s1, s2) = (p.d1.len(), p.d2.len());
        let d = if p.d1.iter().any(|v| v.norm() == 0.0) {
            self.matrix(omega)?.lu().determinant()
        } else {
            // det = prod(d1) det(D2 - C D1^{-1} B), with the frozen scalings
            let mut front = C64::new(1.0, 0.0);
            for (i, v) in p.d1.iter().enumerate() {
                front *= v * (self.row_scale[i] * self.col_scale[i]);
            }
            let schur = DMatrix::from_fn(s2, s2, |k, l| {
                let mut v = if k == l { p.d2[k] } else { C64::new(0.0, 0.0) };
                for n in 0..s1 {
                    v -= p.c[(k, n)] * p.b[(n, l)] / p.d1[n];
                }
                v * (self.row_scale[s1 + k] * self.col_scale[s1 + l])
            });
            front * schur.lu().determinant()
        };
        if !d.is_finite() {
            return Err(MultipoleError::Overflow { omega });
        }
        Ok(d)
    }
}

fn inv_or_one(x: f64) -> f64 {
    if x > 0.0 && x.is_finite() {
        1.0 / x
    } else {
        1.0
    }
}

/// A determinant root of one mirror block that passed both filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRoot {
    pub result: RootResult,
    pub parity: Parity,
    pub trunc: Truncation,
    /// Root movement under `(n1 + 2, n2 + 2)`.
    pub stability: f64,
}

fn refine(geom: &TwoDiskGeometry, trunc: Truncation, parity: Parity, seed: C64) -> Result<RootResult, MultipoleError> {
    let det = BlockDeterminant::new(*geom, trunc, parity, seed)?;
    let f = |w: C64| det.eval(w).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let h = 1e-4 * seed.norm().max(1e-2);
    let seeds = [seed, seed + h, seed + I * h];
    match muller(f, seeds, ORACLE_TOL, 100) {
        Ok(r) => Ok(r),
        // Residual floor reached: accept the stagnated iterate, the
        // stability filter below decides.
        Err(RootfindError::NoConvergence { last, residual, iterations }) if residual < 1e-8 => {
            Ok(RootResult { root: last, residual, iterations, converged: false })
        }
        Err(RootfindError::DegenerateStep { .. }) | Err(RootfindError::NoConvergence { .. }) => {
            Err(MultipoleError::NoConvergence { seed })
        }
        Err(e) => Err(e.into()),
    }
}

fn is_spurious(geom: &TwoDiskGeometry, trunc: Truncation, omega: C64) -> Result<bool, MultipoleError> {
    let h = log_hankel1(trunc.n1 + 1, omega * geom.radius)?;
    Ok(h.dlog.iter().any(|g| (g * geom.radius).inv().norm() < SPURIOUS_TOL))
}

/// Root of one mirror block from `seed`, with the truncation-stability and
/// spurious-root filters applied.
pub fn two_disk_block_root(geom: &TwoDiskGeometry, parity: Parity, seed: C64, trunc: Truncation) -> Result<OracleRoot, MultipoleError> {
    let r = refine(geom, trunc, parity, seed)?;
    if is_spurious(geom, trunc, r.root)? {
        return Err(MultipoleError::SpuriousRoot { root: r.root });
    }
    let finer = refine(geom, trunc.refined(), parity, r.root)?;
    let change = (finer.root - r.root).norm();
    if change >= STABILITY_TOL {
        return Err(MultipoleError::UnstableRoot { root: r.root, change });
    }
    Ok(OracleRoot { result: r, parity, trunc, stability: change })
}

/// Perturbed resonances near `seed`: one root per mirror class (the sine
/// class is skipped when the seed mode has `m = 0`, signalled by
/// `include_sin = false`). Roots failing a filter are dropped; if none
/// survive the first failure is returned.
pub fn two_disk_resonances(geom: &TwoDiskGeometry, seed: C64, trunc: Truncation, include_sin: bool) -> Result<Vec<OracleRoot>, MultipoleError> {
    let classes: &[Parity] = if include_sin { &[Parity::Cos, Parity::Sin] } else { &[Parity::Cos] };
    let mut roots = Vec::new();
    let mut first_err = None;
    for &p in classes {
        match two_disk_block_root(geom, p, seed, trunc) {
            Ok(r) => roots.push(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (roots.is_empty(), first_err) {
        (true, Some(e)) => Err(e),
        _ => Ok(roots),
    }
}

/// Largest cavity truncation the automatic ladder tries.
pub const MAX_N1: usize = 12_800;

/// Root of one mirror block with the cavity truncation doubled from the
/// [`Truncation::for_geometry`] start until successive roots agree to
/// [`STABILITY_TOL`].
pub fn two_disk_block_root_auto(geom: &TwoDiskGeometry, parity: Parity, seed: C64, m: u32) -> Result<OracleRoot, MultipoleError> {
    geom.side()?;
    let mut trunc = Truncation::for_geometry(m, geom);
    let mut prev = refine(geom, trunc, parity, seed)?;
    loop {
        let next_trunc = Truncation { n1: 2 * trunc.n1, ..trunc };
        let next = refine(geom, next_trunc, parity, prev.root)?;
        let change = (next.root - prev.root).norm();
        if change < STABILITY_TOL {
            return two_disk_block_root(geom, parity, next.root, next_trunc);
        }
        if 2 * next_trunc.n1 > MAX_N1 {
            return Err(MultipoleError::UnstableRoot { root: next.root, change });
        }
        trunc = next_trunc;
        prev = next;
    }
}

/// [`two_disk_resonances`] with automatic truncation for angular order `m`.
pub fn two_disk_resonances_auto(geom: &TwoDiskGeometry, seed: C64, m: u32) -> Result<Vec<OracleRoot>, MultipoleError> {
    let classes: &[Parity] = if m > 0 { &[Parity::Cos, Parity::Sin] } else { &[Parity::Cos] };
    let mut roots = Vec::new();
    let mut first_err = None;
    for &p in classes {
        match two_disk_block_root_auto(geom, p, seed, m) {
            Ok(r) => roots.push(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (roots.is_empty(), first_err) {
        (true, Some(e)) => Err(e),
        _ => Ok(roots),
    }
}

/// Coarse roots of one block inside a circle (contour-integral eigensolver
/// on the frozen-scaled block), each refined by Muller and filtered.
pub fn two_disk_contour(
    geom: &TwoDiskGeometry,
    parity: Parity,
    center: C64,
    radius: f64,
    trunc: Truncation,
    opts: &BeynOptions,
) -> Result<Vec<(C64, OracleRoot)>, MultipoleError> {
    let det = BlockDeterminant::new(*geom, trunc, parity, center)?;
    let n = block_matrix(geom, center, trunc, parity)?.nrows();
    let f = |w: C64| det.matrix(w).unwrap_or_else(|_| DMatrix::from_element(n, n, C64::new(f64::NAN, f64::NAN)));
    let coarse = beyn(f, center, radius, opts)?;
    coarse.into_iter().map(|c| Ok((c, two_disk_block_root(geom, parity, c, trunc)?))).collect()
}

/// Isolated-cavity limit: roots of the cavity dispersion relation refined
/// from `seed` (used to cross-check the single-disk poles).
pub fn single_disk_root(m: u32, medium: &Medium, radius: f64, seed: C64) -> Result<RootResult, MultipoleError> {
    let f = |w: C64| dispersion(m, medium, radius, w).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let h = 1e-4 * seed.norm().max(1e-2);
    Ok(muller(f, [seed, seed + h, seed + I * h], ORACLE_TOL, 100)?)
}
