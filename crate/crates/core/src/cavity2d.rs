//! Disk cavity of radius `R` in vacuum: resonances from the capacity-operator
//! dispersion relation, mode fields inside and outside the disk, and the
//! first-order shift/splitting formulas for small particles.
//!
//! Field equation `div((1/eps) grad u) + omega^2 mu u = 0`, outgoing at
//! infinity. On the boundary `(1/eps_m) du/dr = T_omega[u]` where the
//! capacity operator acts on `e^{i m theta}` as multiplication by
//! `z_m = omega H_m'(omega R) / H_m(omega R)`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, Matrix2, Vector2};
use thiserror::Error;

use crate::polarization::{pt_disk, pt_ellipse, pt_numeric, BoundaryCurve, PolarizationError, PolarizationTensor};
use crate::rootfind::{find_roots_in_box, BoxSearch, RootfindError};
use crate::specfun::{bessel_j_seq, hankel1_seq, sph_hankel1, SpecfunError};
use crate::types::{sqrt_near, ComplexBox, Material, Medium, C64};

/// Relative size `|H_m / (R H_m')|` below which a root is taken to sit on a
/// zero of the Hankel denominator.
pub const SPURIOUS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CavityError {
    #[error("dimension must be 2 or 3, got {d}")]
    InvalidDimension { d: usize },
    #[error("Hankel denominator vanishes at omega = {omega}")]
    PoleOfSymbol { omega: C64 },
    #[error("roots {roots:?} coincide with Hankel zeros and were rejected")]
    SpuriousRoot { roots: Vec<C64> },
    #[error("no resonance in the search box")]
    EmptyBox,
    #[error("search box must lie in the open lower half plane")]
    InvalidBox,
    #[error("invalid mode set: {0}")]
    InvalidModes(String),
    #[error("invalid particle scenario: {0}")]
    InvalidScenario(String),
    #[error("shift denominator vanishes ({value:e})")]
    DegenerateDenominator { value: C64 },
    #[error("branch {branch} has zero sensitivity; the size is unobservable")]
    ZeroSensitivity { branch: usize },
    #[error("candidates {best} and {runner_up} are within 1% discrepancy")]
    TieAmbiguity { best: usize, runner_up: usize, table: Vec<(usize, f64)> },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Root(#[from] RootfindError),
    #[error(transparent)]
    Polarization(#[from] PolarizationError),
}

/// Fourier symbol of the capacity operator and its frequency derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityCoeff {
    pub z: C64,
    pub dz_domega: C64,
}

/// `z_m(omega, R)` and `d z_m / d omega` for the disk (`d = 2`, any signed
/// `m`) or the ball (`d = 3`, `m >= 0`, spherical Hankel functions).
///
/// With `x = omega R` and `g = h'(x)/h(x)`, Bessel's equation gives
/// `dz/domega = -x (1 + g^2) + m^2/x` in 2D and
/// `-g - x (1 + g^2) + m (m+1)/x` in 3D.
pub fn capacity_coeff(d: usize, m: i64, omega: C64, radius: f64) -> Result<CapacityCoeff, CavityError> {
    let x = omega * radius;
    let (h, dh) = match d {
        2 => {
            let n = m.unsigned_abs() as usize;
            let v = hankel1_seq(n, x)?.get(n);
            (v.value, v.derivative)
        }
        3 => {
            if m < 0 {
                return Err(CavityError::InvalidModes(format!("spherical order {m} < 0")));
            }
            let v = sph_hankel1(m as usize, x)?;
            (v.value, v.derivative)
        }
        _ => return Err(CavityError::InvalidDimension { d }),
    };
    if h.norm() <= 1e-14 * dh.norm() || h.norm() == 0.0 {
        return Err(CavityError::PoleOfSymbol { omega });
    }
    let g = dh / h;
    let mf = m as f64;
    let dz = match d {
        2 => -x * (g * g + 1.0) + mf * mf / x,
        _ => -g - x * (g * g + 1.0) + mf * (mf + 1.0) / x,
    };
    Ok(CapacityCoeff { z: omega * g, dz_domega: dz })
}

/// Angular factor of a mode: `cos(m theta)` or `sin(m theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    fn angular(self, m: f64, theta: f64) -> (f64, f64) {
        let (s, c) = (m * theta).sin_cos();
        match self {
            Parity::Cos => (c, -m * s),
            Parity::Sin => (s, m * c),
        }
    }
}

/// `F_m(omega) = (1/eps_m) k J_m'(kR) H_m(omega R) - omega J_m(kR) H_m'(omega R)`.
pub fn dispersion(m: u32, medium: &Medium, radius: f64, omega: C64) -> Result<C64, CavityError> {
    let (f, _) = dispersion_parts(m, medium, radius, omega)?;
    Ok(f)
}

/// Dispersion value and the magnitude of its two terms (its natural scale).
fn dispersion_parts(m: u32, medium: &Medium, radius: f64, omega: C64) -> Result<(C64, f64), CavityError> {
    let n = m as usize;
    let k = medium.wavenumber(omega);
    let j = bessel_j_seq(n + 1, k * radius)?.get(n);
    let h = hankel1_seq(n + 1, omega * radius)?.get(n);
    let a = k / medium.eps * j.derivative * h.value;
    let b = omega * j.value * h.derivative;
    Ok((a - b, a.norm() + b.norm()))
}

/// One member of a cavity resonance: `u0 = c J_m(k r) {cos, sin}(m theta)`
/// inside the disk, continued outside by the outgoing Hankel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMode {
    pub m: u32,
    pub omega0: C64,
    /// Interior wavenumber `omega0 sqrt(eps_m mu_m)`.
    pub k: C64,
    pub radius: f64,
    pub medium: Medium,
    /// Amplitude; `disk_modes` picks it so that `∫ u0^2 = 1` (bilinear).
    pub c: C64,
    pub parity: Parity,
}

/// Value and Cartesian gradient of a mode field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeValue {
    pub value: C64,
    pub gradient: [C64; 2],
}

impl DiskMode {
    /// Build the mode at a known root of the dispersion relation, bilinearly
    /// normalized.
    pub fn new(m: u32, omega0: C64, medium: Medium, radius: f64, parity: Parity) -> Result<Self, CavityError> {
        if m == 0 && parity == Parity::Sin {
            return Err(CavityError::InvalidModes("m = 0 has no sine member".into()));
        }
        let k = medium.wavenumber(omega0);
        let mut mode = Self { m, omega0, k, radius, medium, c: C64::new(1.0, 0.0), parity };
        mode.c = C64::new(1.0, 0.0) / mode.bilinear_norm()?.sqrt();
        Ok(mode)
    }

    pub fn partner(&self) -> Option<Self> {
        match (self.m, self.parity) {
            (0, _) => None,
            (_, Parity::Cos) => Some(Self { parity: Parity::Sin, ..*self }),
            (_, Parity::Sin) => Some(Self { parity: Parity::Cos, ..*self }),
        }
    }

    /// The degenerate `(cos, sin)` pair, or the single `m = 0` mode.
    pub fn family(&self) -> Vec<Self> {
        let cos = Self { parity: Parity::Cos, ..*self };
        match cos.partner() {
            Some(sin) => vec![cos, sin],
            None => vec![cos],
        }
    }

    fn angular_measure(&self) -> f64 {
        if self.m == 0 {
            2.0 * PI
        } else {
            PI
        }
    }

    /// `∫_0^R J_m(kr)^2 r dr` by Lommel's closed form.
    pub fn radial_integral(&self) -> Result<C64, CavityError> {
        let n = self.m as usize;
        let kr = self.k * self.radius;
        let j = bessel_j_seq(n + 1, kr)?.get(n);
        let mf = self.m as f64;
        let r2 = self.radius * self.radius;
        Ok((j.derivative * j.derivative + (C64::new(1.0, 0.0) - mf * mf / (kr * kr)) * j.value * j.value) * (0.5 * r2))
    }

    /// Bilinear `∫_Omega u0^2` for the stored amplitude.
    pub fn bilinear_norm(&self) -> Result<C64, CavityError> {
        Ok(self.c * self.c * self.angular_measure() * self.radial_integral()?)
    }

    /// `|F_m(omega0)|` relative to the size of its two terms.
    pub fn dispersion_residual(&self) -> Result<f64, CavityError> {
        let (f, scale) = dispersion_parts(self.m, &self.medium, self.radius, self.omega0)?;
        Ok(f.norm() / scale)
    }

    /// Field value and gradient. Outside the disk the field is
    /// `c J_m(kR)/H_m(omega0 R) H_m(omega0 r)` times the angular factor.
    pub fn eval(&self, point: [f64; 2]) -> Result<ModeValue, CavityError> {
        let n = self.m as usize;
        let mf = self.m as f64;
        let r = point[0].hypot(point[1]);
        if r == 0.0 {
            let zero = C64::new(0.0, 0.0);
            let value = if n == 0 { self.c } else { zero };
            // J_1(kr) cos(theta) ~ (k/2) x near the origin
            let g = if n == 1 { self.c * self.k * 0.5 } else { zero };
            let gradient = match (n, self.parity) {
                (1, Parity::Cos) => [g, zero],
                (1, Parity::Sin) => [zero, g],
                _ => [zero, zero],
            };
            return Ok(ModeValue { value, gradient });
        }
        let theta = point[1].atan2(point[0]);
        let (radial, dradial) = if r <= self.radius {
            let j = bessel_j_seq(n + 1, self.k * r)?.get(n);
            (self.c * j.value, self.c * self.k * j.derivative)
        } else {
            let jr = bessel_j_seq(n + 1, self.k * self.radius)?.value(n);
            let hr = hankel1_seq(n + 1, self.omega0 * self.radius)?.value(n);
            let h = hankel1_seq(n + 1, self.omega0 * r)?.get(n);
            let a = self.c * jr / hr;
            (a * h.value, a * self.omega0 * h.derivative)
        };
        let (ang, dang) = self.parity.angular(mf, theta);
        let (s, c) = theta.sin_cos();
        let dr = dradial * ang;
        let dt = radial * dang / r;
        Ok(ModeValue { value: radial * ang, gradient: [dr * c - dt * s, dr * s + dt * c] })
    }
}

/// Field value and gradient of `mode` at `point`.
pub fn mode_eval(mode: &DiskMode, point: [f64; 2]) -> Result<ModeValue, CavityError> {
    mode.eval(point)
}

/// Roots found in a box, split into accepted modes and rejected loci.
#[derive(Debug, Clone)]
pub struct ModeSearch {
    /// Accepted roots; `(cos, sin)` members for `m >= 1`.
    pub modes: Vec<DiskMode>,
    /// Roots rejected as Hankel zeros.
    pub spurious: Vec<C64>,
}

/// Locate all roots of `F_m` in `search` (argument principle + Muller) and
/// classify them.
pub fn disk_mode_search(m: u32, medium: Medium, radius: f64, search: &ComplexBox) -> Result<ModeSearch, CavityError> {
    if !search.is_valid() || search.im_max >= 0.0 {
        return Err(CavityError::InvalidBox);
    }
    let f = |w: C64| dispersion(m, &medium, radius, w).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let roots = find_roots_in_box(&f, search, &BoxSearch { tol: 1e-13, ..Default::default() })?;
    let n = m as usize;
    let mut out = ModeSearch { modes: Vec::new(), spurious: Vec::new() };
    for r in roots {
        let h = hankel1_seq(n + 1, r.root * radius)?.get(n);
        if h.value.norm() < SPURIOUS_TOL * radius * h.derivative.norm() {
            out.spurious.push(r.root);
            continue;
        }
        let mode = DiskMode::new(m, r.root, medium, radius, Parity::Cos)?;
        out.modes.extend(mode.family());
    }
    Ok(out)
}

/// Cavity resonances of angular order `m` inside `search`.
pub fn disk_modes(m: u32, medium: Medium, radius: f64, search: &ComplexBox) -> Result<Vec<DiskMode>, CavityError> {
    let found = disk_mode_search(m, medium, radius, search)?;
    match (found.modes.is_empty(), found.spurious.is_empty()) {
        (false, _) => Ok(found.modes),
        (true, false) => Err(CavityError::SpuriousRoot { roots: found.spurious }),
        (true, true) => Err(CavityError::EmptyBox),
    }
}

/// Reference shape `B` of a particle; the particle is `center + delta B`.
#[derive(Debug, Clone, PartialEq)]
pub enum ParticleShape {
    Disk { radius: f64 },
    Ellipse { semi_axes: (f64, f64), angle: f64 },
    Curve(BoundaryCurve),
}

impl ParticleShape {
    pub fn unit_disk() -> Self {
        ParticleShape::Disk { radius: 1.0 }
    }

    /// Polarization tensor of `B` (not scaled by `delta`).
    pub fn tensor(&self, k: C64) -> Result<PolarizationTensor, PolarizationError> {
        match self {
            ParticleShape::Disk { radius } => pt_disk(k, *radius),
            ParticleShape::Ellipse { semi_axes, angle } => pt_ellipse(k, *semi_axes, *angle),
            ParticleShape::Curve(c) => pt_numeric(c, k),
        }
    }

    /// Largest distance from the reference center to the shape.
    pub fn extent(&self) -> f64 {
        match self {
            ParticleShape::Disk { radius } => *radius,
            ParticleShape::Ellipse { semi_axes, .. } => semi_axes.0.max(semi_axes.1),
            ParticleShape::Curve(c) => c.points.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max),
        }
    }

    pub fn rotated(&self, phi: f64) -> Self {
        match self {
            ParticleShape::Disk { .. } => self.clone(),
            ParticleShape::Ellipse { semi_axes, angle } => ParticleShape::Ellipse { semi_axes: *semi_axes, angle: angle + phi },
            ParticleShape::Curve(c) => ParticleShape::Curve(c.rotated(phi)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleScenario {
    pub shape: ParticleShape,
    pub center: [f64; 2],
    pub delta: f64,
    pub material: Material,
    pub placement: Placement,
}

impl ParticleScenario {
    /// Disk particle of radius `delta` at `center`.
    pub fn disk(center: [f64; 2], delta: f64, material: Medium, placement: Placement) -> Self {
        Self { shape: ParticleShape::unit_disk(), center, delta, material: material.into(), placement }
    }

    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let [x, y] = self.center;
        Self { shape: self.shape.rotated(phi), center: [c * x - s * y, s * x + c * y], ..self.clone() }
    }

    /// Check the particle sits on the declared side of `|x| = radius`.
    /// Tangency is allowed for exterior particles.
    pub fn validate(&self, radius: f64) -> Result<(), CavityError> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(CavityError::InvalidScenario(format!("delta = {} must be positive", self.delta)));
        }
        let dist = self.center[0].hypot(self.center[1]);
        let reach = self.delta * self.shape.extent();
        let ok = match self.placement {
            Placement::Interior => dist + reach < radius,
            Placement::Exterior => dist - reach >= radius * (1.0 - 1e-12),
        };
        if !ok {
            return Err(CavityError::InvalidScenario(format!(
                "{:?} particle at distance {dist} with reach {reach} does not fit radius {radius}",
                self.placement
            )));
        }
        Ok(())
    }
}

/// Splitting eigenvalues and predicted perturbed resonances.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPrediction {
    /// Eigenvalues of `matrix`, ordered to follow the input modes.
    pub eta: Vec<C64>,
    /// `Den^{-1} N`, normalized by `delta_ref^2`.
    pub matrix: DMatrix<C64>,
    /// `sqrt(omega0^2 + delta_ref^2 eta_j)`, the root continuous from `omega0`.
    pub omega_pred: Vec<C64>,
    pub delta_ref: f64,
}

fn check_modes(modes: &[DiskMode]) -> Result<(), CavityError> {
    match modes {
        [_] => Ok(()),
        [a, b] if a.m == b.m && a.omega0 == b.omega0 && a.parity != b.parity && a.radius == b.radius && a.medium == b.medium => Ok(()),
        [_, _] => Err(CavityError::InvalidModes("a pair must be the (cos, sin) members of one resonance".into())),
        _ => Err(CavityError::InvalidModes(format!("expected 1 or 2 modes, got {}", modes.len()))),
    }
}

/// Diagonal of the shift denominator, one entry per mode:
/// `mu_m ∫ u_p^2 + (1/(2 omega0)) ∫_{∂Omega} (d_omega T)[u_p] u_p`.
/// Off-diagonal entries vanish by angular orthogonality.
fn denominators(modes: &[DiskMode]) -> Result<Vec<C64>, CavityError> {
    let mut out = Vec::with_capacity(modes.len());
    for mode in modes {
        let n = mode.m as usize;
        let jr = bessel_j_seq(n + 1, mode.k * mode.radius)?.value(n);
        let cap = capacity_coeff(2, mode.m as i64, mode.omega0, mode.radius)?;
        let volume = mode.medium.mu * mode.bilinear_norm()?;
        let trace = mode.c * mode.c * jr * jr * (mode.angular_measure() * mode.radius);
        let boundary = cap.dz_domega * trace / (mode.omega0 * 2.0);
        let value = volume + boundary;
        if value.norm() <= 1e-12 * (volume.norm() + boundary.norm()) {
            return Err(CavityError::DegenerateDenominator { value });
        }
        out.push(value);
    }
    Ok(out)
}

/// Numerator contribution of one particle, scaled by `delta^2`:
/// `(1/eps_h) grad v_p . M grad v_q - omega0^2 (mu_c - mu_h) |D| v_p v_q`.
fn numerator(modes: &[DiskMode], s: &ParticleScenario) -> Result<DMatrix<C64>, CavityError> {
    let omega0 = modes[0].omega0;
    let host = match s.placement {
        Placement::Interior => modes[0].medium,
        Placement::Exterior => Medium::vacuum(),
    };
    let particle = s.material.medium_at(omega0.re);
    let contrast = host.eps / particle.eps;
    let scale = s.delta * s.delta;
    let tensor = s.shape.tensor(contrast)?;
    let mt = tensor.as_matrix2() * C64::new(scale, 0.0);
    let area = tensor.shape_area * scale;
    let fields: Vec<ModeValue> = modes.iter().map(|m| m.eval(s.center)).collect::<Result<_, _>>()?;
    let n = modes.len();
    let mut out = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            let gp = Vector2::new(fields[p].gradient[0], fields[p].gradient[1]);
            let gq = Vector2::new(fields[q].gradient[0], fields[q].gradient[1]);
            let grad = gp.dot(&(mt * gq)) / host.eps;
            let mass = omega0 * omega0 * (particle.mu - host.mu) * area * fields[p].value * fields[q].value;
            out[(p, q)] = grad - mass;
        }
    }
    Ok(out)
}

/// Eigenvalues of a 1×1 or 2×2 matrix, ordered so that each follows the
/// basis vector its eigenvector is closest to.
fn ordered_eigenvalues(a: &DMatrix<C64>) -> Vec<C64> {
    if a.nrows() == 1 {
        return vec![a[(0, 0)]];
    }
    let m = Matrix2::new(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let off = m[(0, 1)].norm() + m[(1, 0)].norm();
    if off == 0.0 {
        return vec![m[(0, 0)], m[(1, 1)]];
    }
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let disc = (half_tr * half_tr - m.determinant()).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let vec_for = |l: C64| {
        let v1 = Vector2::new(m[(0, 1)], l - m[(0, 0)]);
        let v2 = Vector2::new(l - m[(1, 1)], m[(1, 0)]);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        let nrm = v.norm();
        if nrm == 0.0 {
            Vector2::new(1.0, 0.0)
        } else {
            Vector2::new(v[0].norm() / nrm, v[1].norm() / nrm)
        }
    };
    let (v1, v2) = (vec_for(l1), vec_for(l2));
    if v1[0] * v1[0] + v2[1] * v2[1] >= v1[1] * v1[1] + v2[0] * v2[0] {
        vec![l1, l2]
    } else {
        vec![l2, l1]
    }
}

/// First-order splitting of a resonance by a set of particles.
///
/// `modes` is a single mode or a degenerate `(cos, sin)` pair. Contributions
/// of all particles are summed entrywise (each weighted by
/// `(delta_i/delta_ref)^2`, with `delta_ref` the first particle's size)
/// before the eigen-decomposition.
pub fn shift_matrix(modes: &[DiskMode], scenarios: &[ParticleScenario]) -> Result<ShiftPrediction, CavityError> {
    check_modes(modes)?;
    for s in scenarios {
        s.validate(modes[0].radius)?;
    }
    shift_matrix_unchecked(modes, scenarios)
}

fn shift_matrix_unchecked(modes: &[DiskMode], scenarios: &[ParticleScenario]) -> Result<ShiftPrediction, CavityError> {
    let first = scenarios.first().ok_or_else(|| CavityError::InvalidScenario("no particles".into()))?;
    let delta_ref = first.delta;
    let den = denominators(modes)?;
    let n = modes.len();
    let mut num = DMatrix::zeros(n, n);
    for s in scenarios {
        num += numerator(modes, s)?;
    }
    let mut matrix = num / C64::new(delta_ref * delta_ref, 0.0);
    for (p, d) in den.iter().enumerate() {
        let inv = C64::new(1.0, 0.0) / d;
        for q in 0..n {
            matrix[(p, q)] *= inv;
        }
    }
    let eta = ordered_eigenvalues(&matrix);
    let omega0 = modes[0].omega0;
    // omega0 + x / (omega0 + sqrt(omega0^2 + x)): no cancellation, exact at x = 0
    let omega_pred = eta
        .iter()
        .map(|e| {
            let x = e * (delta_ref * delta_ref);
            omega0 + x / (omega0 + sqrt_near(omega0 * omega0 + x, omega0))
        })
        .collect();
    Ok(ShiftPrediction { eta, matrix, omega_pred, delta_ref })
}

/// Result of a size inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeEstimate {
    pub delta: f64,
    /// Branch whose eigenvalue phase best matches the measurement.
    pub branch: usize,
}

/// Recover `delta` from one measured resonance `omega_delta` near the
/// modes' `omega0`: `delta = (|omega_delta^2 - omega0^2| / |eta_j|)^{1/2}`.
///
/// The template's `delta` is only used to evaluate `eta` (which is
/// independent of it); its center and shape are kept fixed.
pub fn invert_size(measured: C64, modes: &[DiskMode], template: &ParticleScenario) -> Result<SizeEstimate, CavityError> {
    check_modes(modes)?;
    let pred = shift_matrix_unchecked(modes, std::slice::from_ref(template))?;
    let omega0 = modes[0].omega0;
    let shift = measured * measured - omega0 * omega0;
    let branch = if shift.norm() == 0.0 {
        0
    } else {
        let phase_gap = |e: &C64| if e.norm() == 0.0 { f64::INFINITY } else { (shift / e).arg().abs() };
        (0..pred.eta.len()).min_by(|&a, &b| phase_gap(&pred.eta[a]).total_cmp(&phase_gap(&pred.eta[b]))).unwrap_or(0)
    };
    let eta = pred.eta[branch];
    if eta.norm() == 0.0 || !eta.is_finite() {
        return Err(CavityError::ZeroSensitivity { branch });
    }
    Ok(SizeEstimate { delta: (shift.norm() / eta.norm()).sqrt(), branch })
}

/// `n` identical particles at the vertices of a regular `n`-gon outside the
/// disk, each tangent to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct NgonFamily {
    pub shape: ParticleShape,
    pub delta: f64,
    pub material: Material,
    /// Angle of the first vertex.
    pub phase: f64,
}

impl NgonFamily {
    pub fn scenarios(&self, n: usize, radius: f64) -> Vec<ParticleScenario> {
        let dist = radius + self.delta * self.shape.extent();
        (0..n)
            .map(|j| {
                let a = self.phase + 2.0 * PI * j as f64 / n as f64;
                let base = ParticleScenario {
                    shape: self.shape.clone(),
                    center: [dist, 0.0],
                    delta: self.delta,
                    material: self.material.clone(),
                    placement: Placement::Exterior,
                };
                base.rotated(a)
            })
            .collect()
    }
}

/// Measured perturbed resonances of one cavity resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMeasurement {
    /// The single mode or degenerate pair.
    pub modes: Vec<DiskMode>,
    /// One measured value per branch.
    pub measured: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountEstimate {
    pub n: usize,
    /// `(candidate, discrepancy)` for every candidate.
    pub table: Vec<(usize, f64)>,
}

/// Squared mismatch between predicted and measured branches, minimized
/// over the branch assignment.
fn branch_discrepancy(pred: &[C64], meas: &[C64]) -> f64 {
    let direct: f64 = pred.iter().zip(meas).map(|(p, m)| (p - m).norm_sqr()).sum();
    if pred.len() == 2 && meas.len() == 2 {
        let swapped = (pred[0] - meas[1]).norm_sqr() + (pred[1] - meas[0]).norm_sqr();
        direct.min(swapped)
    } else {
        direct
    }
}

/// Forward prediction of every branch for `n` particles of the family.
pub fn count_forward(modes: &[DiskMode], family: &NgonFamily, n: usize) -> Result<Vec<C64>, CavityError> {
    let scenarios = family.scenarios(n, modes[0].radius);
    Ok(shift_matrix(modes, &scenarios)?.omega_pred)
}

/// Pick the particle count minimizing `Σ |omega_pred - omega_meas|^2` over
/// all measured modes and branches.
pub fn invert_count(
    measurements: &[CountMeasurement],
    family: &NgonFamily,
    candidates: RangeInclusive<usize>,
) -> Result<CountEstimate, CavityError> {
    let distinct: Vec<C64> = measurements.iter().map(|m| m.modes[0].omega0).fold(Vec::new(), |mut acc, w| {
        if !acc.contains(&w) {
            acc.push(w);
        }
        acc
    });
    if distinct.len() < 2 {
        return Err(CavityError::InvalidModes("counting needs at least two distinct resonances".into()));
    }
    let mut table = Vec::new();
    for n in candidates.filter(|&n| n >= 1) {
        let mut total = 0.0;
        for meas in measurements {
            let pred = count_forward(&meas.modes, family, n)?;
            total += branch_discrepancy(&pred, &meas.measured);
        }
        table.push((n, total));
    }
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| table[a].1.total_cmp(&table[b].1));
    let best = *order.first().ok_or_else(|| CavityError::InvalidScenario("empty candidate range".into()))?;
    if let Some(&second) = order.get(1) {
        let (b, s) = (table[best].1, table[second].1);
        if s - b <= 0.01 * s {
            return Err(CavityError::TieAmbiguity { best: table[best].0, runner_up: table[second].0, table });
        }
    }
    Ok(CountEstimate { n: table[best].0, table })
}
