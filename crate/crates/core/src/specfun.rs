//! Cylinder and spherical Bessel/Hankel functions of complex argument.
//!
//! Integer orders only. `J_n` comes from Miller's backward recurrence,
//! normalized with the generating-function identity
//! `exp(±iz) = J_0 + 2 Σ (±i)^n J_n`, the sign chosen so the left side does
//! not decay (no cancellation for large `|Im z|`). `Y_0`, `Y_1` follow from
//! the Neumann series over the same `J` table and higher orders from forward
//! recurrence. Near the real axis `H1 = J + iY`. For `Im z > 1`, where `H1`
//! is exponentially small against `J`, `H1_0'/H1_0` comes from Steed's
//! continued fraction and `H1_0` from the Wronskian; for `Im z < -1` the
//! small solution is `H2` instead and `H1 = 2J - conj(H1(conj z))`.
//!
//! Branch cut of `Y` and `H1`: the negative real axis (principal `ln z`).

use std::f64::consts::PI;

use thiserror::Error;

use crate::types::{C64, I};

/// Largest `|z|` inside the validated envelope.
pub const MAX_ABS_ARG: f64 = 100.0;
/// Largest `|Im z|` inside the validated envelope.
pub const MAX_ABS_IMAG: f64 = 20.0;
/// Largest order inside the validated envelope.
pub const MAX_ORDER: usize = 200;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Above this imaginary part `H1` is computed without forming `J + iY`.
const H1_DIRECT_IMAG: f64 = 1.0;
const RESCALE_ABOVE: f64 = 1e200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J,
    Y,
    H1,
}

/// Value of a Bessel-type function and its derivative with respect to the
/// argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylValue {
    pub value: C64,
    pub derivative: C64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("argument {z} is zero or lies on the branch cut")]
    Domain { z: C64 },
    #[error("order {order} at z = {z} is outside the validated accuracy envelope")]
    LossOfAccuracy { order: usize, z: C64 },
}

/// Values and derivatives for consecutive orders `0..=nmax` at one argument.
#[derive(Debug, Clone)]
pub struct CylSeq {
    values: Vec<C64>,
    derivs: Vec<C64>,
}

impl CylSeq {
    pub fn nmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, n: usize) -> C64 {
        self.values[n]
    }

    pub fn deriv(&self, n: usize) -> C64 {
        self.derivs[n]
    }

    pub fn get(&self, n: usize) -> CylValue {
        CylValue { value: self.values[n], derivative: self.derivs[n] }
    }

    /// Value at a signed integer order via `f_{-n} = (-1)^n f_n`, valid for
    /// `J`, `Y` and `H1`.
    pub fn value_signed(&self, n: i64) -> C64 {
        let v = self.values[n.unsigned_abs() as usize];
        if n < 0 && n % 2 != 0 {
            -v
        } else {
            v
        }
    }

    pub fn deriv_signed(&self, n: i64) -> C64 {
        let v = self.derivs[n.unsigned_abs() as usize];
        if n < 0 && n % 2 != 0 {
            -v
        } else {
            v
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

fn check_envelope(nmax: usize, z: C64) -> Result<(), SpecfunError> {
    if nmax > MAX_ORDER || z.norm() > MAX_ABS_ARG || z.im.abs() > MAX_ABS_IMAG || !z.is_finite() {
        return Err(SpecfunError::LossOfAccuracy { order: nmax, z });
    }
    Ok(())
}

fn check_singular_domain(z: C64) -> Result<(), SpecfunError> {
    if z == C64::new(0.0, 0.0) || (z.im == 0.0 && z.re < 0.0) {
        return Err(SpecfunError::Domain { z });
    }
    Ok(())
}

fn check_finite(values: &[C64], z: C64) -> Result<(), SpecfunError> {
    if let Some(order) = values.iter().position(|v| !v.is_finite()) {
        return Err(SpecfunError::LossOfAccuracy { order, z });
    }
    Ok(())
}

/// `f_n' = f_{n-1} - (n/z) f_n`, `f_0' = -f_1`; `values` holds orders
/// `0..=nmax+1`.
fn derivatives_from_recurrence(values: &[C64], z: C64, nmax: usize) -> Vec<C64> {
    let mut d = Vec::with_capacity(nmax + 1);
    d.push(-values[1]);
    for n in 1..=nmax {
        d.push(values[n - 1] - values[n] * (n as f64) / z);
    }
    d
}

/// Full Miller table `J_0..J_top` with `top >= nmax`.
fn miller_j_table(nmax: usize, z: C64) -> Vec<C64> {
    let az = z.norm();
    // Forward-run the recurrence from past the turning point until the
    // dominant solution has grown enough to make the start error negligible.
    let n0 = nmax.max(az.ceil() as usize) + 1;
    let mut p_prev = C64::new(0.0, 0.0);
    let mut p = C64::new(1.0, 0.0);
    let mut n = n0;
    while p.norm() < 1e20 && n < n0 + 10_000 {
        let p_next = p * (2.0 * n as f64) / z - p_prev;
        p_prev = p;
        p = p_next;
        n += 1;
    }
    let top = n + 5;

    let mut f = vec![C64::new(0.0, 0.0); top + 2];
    f[top] = C64::new(1e-30, 0.0);
    for k in (1..=top).rev() {
        f[k - 1] = f[k] * (2.0 * k as f64) / z - f[k + 1];
        if f[k - 1].norm() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            for v in f[k - 1..].iter_mut() {
                *v *= s;
            }
        }
    }
    f.truncate(top + 1);

    // exp(s i z) = f_0 + 2 Σ (s i)^n f_n with s = ±1 so the left side does not decay.
    let unit = if z.im <= 0.0 { I } else { -I };
    let mut sum = f[0];
    let mut phase = C64::new(1.0, 0.0);
    for v in f.iter().skip(1) {
        phase *= unit;
        sum += *v * phase * 2.0;
    }
    // divide through the modulus first: |sum|^2 may overflow
    let scale = sum.norm();
    let norm = (unit * z).exp() / (sum / scale) / scale;
    for v in f.iter_mut() {
        *v *= norm;
    }
    f
}

fn j_table(nmax: usize, z: C64) -> Vec<C64> {
    if z.norm() == 0.0 {
        let mut t = vec![C64::new(0.0, 0.0); nmax + 2];
        t[0] = C64::new(1.0, 0.0);
        return t;
    }
    miller_j_table(nmax + 1, z)
}

/// `J_0..=J_nmax` with derivatives.
pub fn bessel_j_seq(nmax: usize, z: C64) -> Result<CylSeq, SpecfunError> {
    check_envelope(nmax, z)?;
    let mut table = j_table(nmax, z);
    let derivs = if z.norm() == 0.0 {
        let mut d = vec![C64::new(0.0, 0.0); nmax + 1];
        if nmax >= 1 {
            d[1] = C64::new(0.5, 0.0);
        }
        d
    } else {
        derivatives_from_recurrence(&table, z, nmax)
    };
    table.truncate(nmax + 1);
    check_finite(&table, z)?;
    Ok(CylSeq { values: table, derivs })
}

/// `Y_0, Y_1` from the Neumann series over a full `J` table.
fn neumann_y01(j: &[C64], z: C64) -> (C64, C64) {
    let log_term = (z * 0.5).ln() + EULER_GAMMA;
    let mut s0 = C64::new(0.0, 0.0);
    let mut s1 = C64::new(0.0, 0.0);
    let mut k = 1usize;
    while 2 * k + 1 < j.len() {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        s0 += j[2 * k] * (sign / k as f64);
        s1 += (j[2 * k - 1] - j[2 * k + 1]) * (sign / k as f64);
        k += 1;
    }
    let y0 = (log_term * j[0]) * (2.0 / PI) - s0 * (4.0 / PI);
    let y1 = (log_term * j[1]) * (2.0 / PI) - j[0] / z * (2.0 / PI) + s1 * (2.0 / PI);
    (y0, y1)
}

fn forward_fill(first: C64, second: C64, z: C64, count: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    out.push(first);
    if count > 1 {
        out.push(second);
    }
    for n in 1..count.saturating_sub(1) {
        let next = out[n] * (2.0 * n as f64) / z - out[n - 1];
        out.push(next);
    }
    out
}

/// `Y_0..=Y_nmax` with derivatives.
pub fn bessel_y_seq(nmax: usize, z: C64) -> Result<CylSeq, SpecfunError> {
    check_envelope(nmax, z)?;
    check_singular_domain(z)?;
    let y = if z.im.abs() > H1_DIRECT_IMAG {
        // Y = (H1 - J)/i has no cancellation off the real axis, while the
        // forward recurrence on Y alone does.
        let j = miller_j_table(nmax + 1, z);
        let h = hankel1_table(nmax, z);
        h.iter().zip(&j).map(|(hv, jv)| (*hv - *jv) * (-I)).collect()
    } else {
        let j = miller_j_table(nmax + 1, z);
        let (y0, y1) = neumann_y01(&j, z);
        forward_fill(y0, y1, z, nmax + 2)
    };
    check_finite(&y, z)?;
    let derivs = derivatives_from_recurrence(&y, z, nmax);
    let mut values = y;
    values.truncate(nmax + 1);
    Ok(CylSeq { values, derivs })
}

/// Steed's continued fraction for `H1_0'(z)/H1_0(z)`.
fn hankel0_log_derivative(z: C64) -> C64 {
    const TINY: f64 = 1e-30;
    let tiny = C64::new(TINY, 0.0);
    let mut f = tiny;
    let mut c = f;
    let mut d = C64::new(0.0, 0.0);
    for k in 1..20_000usize {
        let a = {
            let h = (2 * k - 1) as f64 * 0.5;
            C64::new(h * h, 0.0)
        };
        let b = (z + I * k as f64) * 2.0;
        d = b + a * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    -(z * 2.0).inv() + I + I / z * f
}

/// Upper half plane, `Im z > 1`: `H1` is the recessive solution in `z` but
/// dominant in the order, so forward recurrence from `H1_0, H1_1` is stable.
fn hankel1_upper(j: &[C64], nmax: usize, z: C64) -> Vec<C64> {
    // Wronskian J_0 H_0' - J_0' H_0 = 2i/(pi z), with J_0' = -J_1.
    let r = hankel0_log_derivative(z);
    let h0 = (I * 2.0 / (PI * z)) / (j[0] * r + j[1]);
    forward_fill(h0, -r * h0, z, nmax + 2)
}

fn hankel1_table(nmax: usize, z: C64) -> Vec<C64> {
    let j = miller_j_table(nmax + 1, z);
    if z.im > H1_DIRECT_IMAG {
        hankel1_upper(&j, nmax, z)
    } else if z.im < -H1_DIRECT_IMAG {
        // Deep in the lower half plane H1 ~ 2J up to the exponentially
        // small H2, and forward recurrence on H1 itself is unstable for
        // orders below |z|. H2(z) = conj(H1(conj z)).
        let zc = z.conj();
        let jc: Vec<C64> = j.iter().map(|v| v.conj()).collect();
        let h2 = hankel1_upper(&jc, nmax, zc);
        j.iter().zip(h2).map(|(jv, h2v)| *jv * 2.0 - h2v.conj()).collect()
    } else {
        let (y0, y1) = neumann_y01(&j, z);
        forward_fill(j[0] + I * y0, j[1] + I * y1, z, nmax + 2)
    }
}

/// `H1_0..=H1_nmax` with derivatives.
pub fn hankel1_seq(nmax: usize, z: C64) -> Result<CylSeq, SpecfunError> {
    check_envelope(nmax, z)?;
    check_singular_domain(z)?;
    let h = hankel1_table(nmax, z);
    check_finite(&h, z)?;
    let derivs = derivatives_from_recurrence(&h, z, nmax);
    let mut values = h;
    values.truncate(nmax + 1);
    Ok(CylSeq { values, derivs })
}

/// `J_n` and `H1_n` sharing one Miller table.
pub fn bessel_j_hankel1_seq(nmax: usize, z: C64) -> Result<(CylSeq, CylSeq), SpecfunError> {
    Ok((bessel_j_seq(nmax, z)?, hankel1_seq(nmax, z)?))
}

/// Single-order evaluation.
pub fn cyl_bessel(kind: BesselKind, order: usize, z: C64) -> Result<CylValue, SpecfunError> {
    let seq = match kind {
        BesselKind::J => bessel_j_seq(order, z)?,
        BesselKind::Y => bessel_y_seq(order, z)?,
        BesselKind::H1 => hankel1_seq(order, z)?,
    };
    Ok(seq.get(order))
}

/// Spherical Hankel function of the first kind from its closed form
/// `h_n(z) = (-i)^{n+1} e^{iz}/z Σ_k (i/(2z))^k (n+k)!/(k!(n-k)!)`.
fn sph_hankel1_value(n: usize, z: C64) -> C64 {
    let x = I / (z * 2.0);
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..=n {
        // (n+k)!/(k!(n-k)!) from the k-1 coefficient
        let ratio = ((n + k) * (n - k + 1)) as f64 / k as f64;
        term = term * x * ratio;
        sum += term;
    }
    let phase = (-I).powu(n as u32 + 1);
    phase * (I * z).exp() / z * sum
}

/// Spherical Hankel function `h_n^(1)(z)` and its derivative.
pub fn sph_hankel1(order: usize, z: C64) -> Result<CylValue, SpecfunError> {
    if z.norm() == 0.0 {
        return Err(SpecfunError::Domain { z });
    }
    if order > MAX_ORDER || !z.is_finite() {
        return Err(SpecfunError::LossOfAccuracy { order, z });
    }
    let value = sph_hankel1_value(order, z);
    let derivative = if order == 0 {
        -sph_hankel1_value(1, z)
    } else {
        sph_hankel1_value(order - 1, z) - value * ((order + 1) as f64) / z
    };
    if !value.is_finite() || !derivative.is_finite() {
        return Err(SpecfunError::LossOfAccuracy { order, z });
    }
    Ok(CylValue { value, derivative })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn j0_at_origin() {
        let v = cyl_bessel(BesselKind::J, 0, c(0.0, 0.0)).unwrap();
        assert_eq!(v.value, c(1.0, 0.0));
        assert_eq!(v.derivative, c(0.0, 0.0));
        let v1 = cyl_bessel(BesselKind::J, 1, c(0.0, 0.0)).unwrap();
        assert_eq!(v1.derivative, c(0.5, 0.0));
    }

    #[test]
    fn singular_kinds_reject_origin_and_cut() {
        assert!(matches!(cyl_bessel(BesselKind::Y, 0, c(0.0, 0.0)), Err(SpecfunError::Domain { .. })));
        assert!(matches!(cyl_bessel(BesselKind::H1, 2, c(-1.0, 0.0)), Err(SpecfunError::Domain { .. })));
        // just off the cut is fine
        assert!(cyl_bessel(BesselKind::H1, 2, c(-1.0, -1e-3)).is_ok());
    }

    #[test]
    fn outside_envelope_is_reported() {
        assert!(matches!(
            cyl_bessel(BesselKind::J, 3, c(150.0, 0.0)),
            Err(SpecfunError::LossOfAccuracy { .. })
        ));
        assert!(matches!(
            cyl_bessel(BesselKind::H1, 3, c(5.0, -25.0)),
            Err(SpecfunError::LossOfAccuracy { .. })
        ));
        assert!(matches!(
            hankel1_seq(MAX_ORDER + 1, c(5.0, 0.0)),
            Err(SpecfunError::LossOfAccuracy { .. })
        ));
    }

    #[test]
    fn j_real_argument_is_real() {
        let s = bessel_j_seq(10, c(7.3, 0.0)).unwrap();
        for n in 0..=10 {
            assert!(s.value(n).im.abs() <= 1e-14 * s.value(n).norm().max(1e-300));
            assert!(s.deriv(n).im.abs() <= 1e-14 * s.deriv(n).norm().max(1e-300));
        }
    }

    #[test]
    fn h0_tiny_argument_follows_log_singularity() {
        let z = c(1e-6, 0.0);
        let h = cyl_bessel(BesselKind::H1, 0, z).unwrap().value;
        let expected = c(1.0, (2.0 / PI) * ((z.re / 2.0).ln() + EULER_GAMMA));
        assert!((h - expected).norm() < 1e-10);
    }

    #[test]
    fn sph_hankel_closed_forms() {
        let h0 = sph_hankel1(0, c(1.0, 0.0)).unwrap();
        assert!((h0.value - c(1f64.sin(), -1f64.cos())).norm() < 1e-15);
        let h0 = sph_hankel1(0, c(2.0, 0.0)).unwrap();
        let ratio = h0.derivative / h0.value;
        assert!((ratio - c(-1.0, 2.0) / 2.0).norm() < 1e-14);
        let z = c(1.0, 0.0);
        let h1 = sph_hankel1(1, z).unwrap();
        let expected = -(I * z).exp() * (z + I) / (z * z);
        assert!((h1.value - expected).norm() < 1e-15);
        assert!(matches!(sph_hankel1(0, c(0.0, 0.0)), Err(SpecfunError::Domain { .. })));
    }

    #[test]
    fn signed_orders_follow_reflection() {
        let s = hankel1_seq(4, c(2.5, -0.3)).unwrap();
        assert_eq!(s.value_signed(-3), -s.value(3));
        assert_eq!(s.value_signed(-2), s.value(2));
    }
}
