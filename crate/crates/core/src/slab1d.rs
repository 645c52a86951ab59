//! Open 1D slab cavity `(a, b)`: resonances, the exact resonance of the
//! cavity with a thin inserted layer (transfer matrices), and the
//! first-order shift formula.
//!
//! Field equation `(1/eps) u'' + omega^2 mu u = 0` inside, with outgoing
//! conditions `(1/eps_m) u' + i omega u = 0` at `a` and
//! `(1/eps_m) u' - i omega u = 0` at `b`.

use thiserror::Error;

use crate::rootfind::{find_roots_in_box, muller, BoxSearch, RootResult, RootfindError};
use crate::types::{ComplexBox, Medium, C64, I};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlabError {
    #[error("invalid cavity: need a < b and nonzero material constants")]
    InvalidCavity,
    #[error("n/eps_m = {beta}: the boundary reflection coefficient is degenerate")]
    SingularContrast { beta: C64 },
    #[error("particle layer [{lo}, {hi}] does not fit inside the cavity")]
    RegionCollapse { lo: f64, hi: f64 },
    #[error("shift denominator vanishes ({value:e}); the mode is not generic")]
    DegenerateDenominator { value: C64 },
    #[error("search box must lie in the open lower half plane")]
    InvalidBox,
    #[error(transparent)]
    Root(#[from] RootfindError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabCavity {
    pub a: f64,
    pub b: f64,
    pub medium: Medium,
}

impl SlabCavity {
    pub fn new(a: f64, b: f64, medium: Medium) -> Result<Self, SlabError> {
        let zero = C64::new(0.0, 0.0);
        if !(b > a) || medium.eps == zero || medium.mu == zero {
            return Err(SlabError::InvalidCavity);
        }
        Ok(Self { a, b, medium })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// `beta = n / eps_m`, the impedance ratio at the walls.
    pub fn beta(&self) -> C64 {
        self.medium.index() / self.medium.eps
    }

    /// `rho = (beta + 1)/(beta - 1)`; resonances solve `exp(2 i n omega L) = rho^2`.
    pub fn reflection_ratio(&self) -> Result<C64, SlabError> {
        let beta = self.beta();
        if (beta - 1.0).norm() < 1e-14 || (beta + 1.0).norm() < 1e-14 {
            return Err(SlabError::SingularContrast { beta });
        }
        Ok((beta + 1.0) / (beta - 1.0))
    }

    /// Closed-form resonance `q`: `omega_q = (ln rho^2 + 2 pi i q) / (2 i n L)`.
    pub fn resonance_closed_form(&self, q: i64) -> Result<C64, SlabError> {
        let rho = self.reflection_ratio()?;
        let n = self.medium.index();
        let num = (rho * rho).ln() + I * (2.0 * std::f64::consts::PI * q as f64);
        Ok(num / (I * n * 2.0 * self.length()))
    }
}

/// A resonance with its field `u0 = A e^{i n w x} + B e^{-i n w x}`, scaled so
/// that the bilinear integral of `u0^2` over `(a, b)` is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabMode {
    pub cavity: SlabCavity,
    pub omega0: C64,
    pub coeffs: (C64, C64),
    /// Bilinear `∫_a^b u0^2 dx` of the stored coefficients (one up to round-off).
    pub norm: C64,
}

impl SlabMode {
    fn from_omega(cavity: SlabCavity, omega0: C64) -> Result<Self, SlabError> {
        let rho = cavity.reflection_ratio()?;
        let kn = cavity.medium.index() * omega0;
        // wall condition at a: A e^{ikn a}(beta+1) = B e^{-ikn a}(beta-1)
        let a_coef = C64::new(1.0, 0.0);
        let b_coef = a_coef * (I * kn * 2.0 * cavity.a).exp() * rho;
        let raw = Self { cavity, omega0, coeffs: (a_coef, b_coef), norm: C64::new(1.0, 0.0) };
        let s = raw.bilinear_norm().sqrt();
        let mut mode = Self { coeffs: (a_coef / s, b_coef / s), ..raw };
        mode.norm = mode.bilinear_norm();
        Ok(mode)
    }

    fn wavenumber(&self) -> C64 {
        self.cavity.medium.index() * self.omega0
    }

    pub fn value(&self, x: f64) -> C64 {
        let k = self.wavenumber();
        self.coeffs.0 * (I * k * x).exp() + self.coeffs.1 * (-I * k * x).exp()
    }

    pub fn derivative(&self, x: f64) -> C64 {
        let k = self.wavenumber();
        I * k * (self.coeffs.0 * (I * k * x).exp() - self.coeffs.1 * (-I * k * x).exp())
    }

    /// Closed-form bilinear `∫_a^b u0^2`.
    pub fn bilinear_norm(&self) -> C64 {
        let k = self.wavenumber();
        let (a, b) = (self.cavity.a, self.cavity.b);
        let (ca, cb) = self.coeffs;
        let e2 = |x: f64| (I * k * 2.0 * x).exp();
        let int_plus = (e2(b) - e2(a)) / (I * k * 2.0);
        let int_minus = (e2(-b) - e2(-a)) / (-I * k * 2.0);
        ca * ca * int_plus + cb * cb * int_minus + ca * cb * 2.0 * (b - a)
    }

    /// `|(1/eps) u' + i w u|(a)` and `|(1/eps) u' - i w u|(b)`.
    pub fn boundary_residuals(&self) -> (f64, f64) {
        let eps = self.cavity.medium.eps;
        let (a, b) = (self.cavity.a, self.cavity.b);
        let ra = self.derivative(a) / eps + I * self.omega0 * self.value(a);
        let rb = self.derivative(b) / eps - I * self.omega0 * self.value(b);
        (ra.norm(), rb.norm())
    }
}

/// Thin layer `(x0 - delta/2, x0 + delta/2)` of a different material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabParticle {
    pub x0: f64,
    pub delta: f64,
    pub material: Medium,
}

impl SlabParticle {
    fn check_inside(&self, cavity: &SlabCavity) -> Result<(), SlabError> {
        let lo = self.x0 - 0.5 * self.delta;
        let hi = self.x0 + 0.5 * self.delta;
        if !(self.delta > 0.0) || self.delta >= cavity.length() || lo <= cavity.a || hi >= cavity.b {
            return Err(SlabError::RegionCollapse { lo, hi });
        }
        Ok(())
    }
}

fn char_function(cavity: &SlabCavity, omega: C64) -> C64 {
    let rho = cavity.reflection_ratio().unwrap_or(C64::new(f64::NAN, 0.0));
    let n = cavity.medium.index();
    (I * n * omega * 2.0 * cavity.length()).exp() - rho * rho
}

/// All resonances of the empty cavity inside `search`.
pub fn slab_resonances(cavity: &SlabCavity, search: &ComplexBox) -> Result<Vec<SlabMode>, SlabError> {
    if !search.is_valid() || search.im_max >= 0.0 {
        return Err(SlabError::InvalidBox);
    }
    cavity.reflection_ratio()?;
    let f = |w: C64| char_function(cavity, w);
    let roots = find_roots_in_box(&f, search, &BoxSearch { tol: 1e-13, ..Default::default() })?;
    roots.into_iter().map(|r| SlabMode::from_omega(*cavity, r.root)).collect()
}

/// Propagate `(u, (1/eps) u')` across a homogeneous layer of width `len`.
fn transfer(state: (C64, C64), medium: &Medium, omega: C64, len: f64) -> (C64, C64) {
    let (u, w) = state;
    let k = medium.wavenumber(omega);
    let kl = k * len;
    let (c, s) = (kl.cos(), kl.sin());
    // sin(kl)/k stays finite as k -> 0
    let sinc_len = if kl.norm() < 1e-8 { C64::new(len, 0.0) } else { s / k };
    (c * u + medium.eps * sinc_len * w, -(k / medium.eps) * s * u + c * w)
}

/// Outgoing-condition mismatch at `b` after shooting from `a` through the
/// three-layer stack; its zeros are the perturbed resonances.
pub fn slab_exact_function(cavity: &SlabCavity, particle: &SlabParticle, omega: C64) -> C64 {
    let lo = particle.x0 - 0.5 * particle.delta;
    let hi = particle.x0 + 0.5 * particle.delta;
    let start = (C64::new(1.0, 0.0), -I * omega);
    let s = transfer(start, &cavity.medium, omega, lo - cavity.a);
    let s = transfer(s, &particle.material, omega, hi - lo);
    let (u, w) = transfer(s, &cavity.medium, omega, cavity.b - hi);
    w - I * omega * u
}

/// Resonance of the cavity containing `particle`, by Muller from `seed`.
pub fn slab_perturbed_exact(cavity: &SlabCavity, particle: &SlabParticle, seed: C64) -> Result<RootResult, SlabError> {
    particle.check_inside(cavity)?;
    let h = 1e-3 * seed.norm().max(1.0);
    let seeds = [seed, seed + h, seed + I * h];
    let r = muller(|w| slab_exact_function(cavity, particle, w), seeds, 1e-12, 200)?;
    Ok(r)
}

/// `alpha = 1 - eps_c/eps_m`.
pub fn contrast_alpha(host: &Medium, particle: &Medium) -> C64 {
    C64::new(1.0, 0.0) - particle.eps / host.eps
}

fn shift_parts(mode: &SlabMode, particle: &SlabParticle) -> (C64, C64, C64) {
    let m = mode.cavity.medium;
    let c = particle.material;
    let w0 = mode.omega0;
    let alpha = contrast_alpha(&m, &c);
    let u = mode.value(particle.x0);
    let du = mode.derivative(particle.x0);
    let numerator = alpha * du * du - w0 * w0 * m.eps * (c.mu - m.mu) * u * u;
    let volume = w0 * m.mu * m.eps * mode.bilinear_norm() * 2.0;
    let (a, b) = (mode.cavity.a, mode.cavity.b);
    let radiation = I * m.eps * (mode.value(a) * mode.value(a) + mode.value(b) * mode.value(b));
    (numerator, volume, radiation)
}

/// First-order shift `omega_1` with `omega_delta ≈ omega_0 + delta * omega_1`:
///
/// `omega_1 = [alpha u0'(x0)^2 - omega_0^2 eps_m (mu_c - mu_m) u0(x0)^2]
///            / [2 omega_0 mu_m eps_m ∫ u0^2 + i eps_m (u0(a)^2 + u0(b)^2)]`,
/// `alpha = 1 - eps_c/eps_m`.
pub fn slab_shift(mode: &SlabMode, particle: &SlabParticle) -> Result<C64, SlabError> {
    let (num, vol, rad) = shift_parts(mode, particle);
    let den = vol + rad;
    let scale = vol.norm().max(rad.norm());
    if den.norm() <= 1e-13 * scale || den.norm() == 0.0 {
        return Err(SlabError::DegenerateDenominator { value: den });
    }
    Ok(num / den)
}

/// The same formula with the radiation term dropped from the denominator,
/// i.e. the closed-cavity approximation. Kept for comparison.
pub fn slab_shift_closed_cavity(mode: &SlabMode, particle: &SlabParticle) -> Result<C64, SlabError> {
    let (num, vol, _) = shift_parts(mode, particle);
    if vol.norm() == 0.0 {
        return Err(SlabError::DegenerateDenominator { value: vol });
    }
    Ok(num / vol)
}
