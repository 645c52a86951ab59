//! Small value types shared by every solver in the crate.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Permittivity / permeability pair. Both are complex so that lossy and
/// plasmonic (negative permittivity) materials are representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub eps: C64,
    pub mu: C64,
}

impl Medium {
    pub fn new(eps: C64, mu: C64) -> Self {
        Self { eps, mu }
    }

    pub fn real(eps: f64, mu: f64) -> Self {
        Self::new(C64::new(eps, 0.0), C64::new(mu, 0.0))
    }

    pub fn vacuum() -> Self {
        Self::real(1.0, 1.0)
    }

    /// Refractive index `sqrt(eps * mu)`, principal branch.
    pub fn index(&self) -> C64 {
        (self.eps * self.mu).sqrt()
    }

    pub fn wavenumber(&self, omega: C64) -> C64 {
        omega * self.index()
    }
}

/// A particle material whose permittivity may depend on frequency.
///
/// Dispersive materials are described by a caller-supplied table of
/// `(frequency, permittivity)` samples, linearly interpolated in the real
/// frequency. The shift formulas evaluate the material at `Re(omega0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Constant(Medium),
    Tabulated {
        mu: C64,
        /// Samples sorted by frequency.
        eps_table: Vec<(f64, C64)>,
    },
}

impl Material {
    pub fn medium_at(&self, frequency: f64) -> Medium {
        match self {
            Material::Constant(m) => *m,
            Material::Tabulated { mu, eps_table } => Medium::new(interpolate(eps_table, frequency), *mu),
        }
    }
}

impl From<Medium> for Material {
    fn from(m: Medium) -> Self {
        Material::Constant(m)
    }
}

fn interpolate(table: &[(f64, C64)], x: f64) -> C64 {
    match table {
        [] => C64::new(f64::NAN, f64::NAN),
        [only] => only.1,
        _ => {
            let idx = table.partition_point(|(f, _)| *f < x).clamp(1, table.len() - 1);
            let (x0, y0) = table[idx - 1];
            let (x1, y1) = table[idx];
            let t = (x - x0) / (x1 - x0);
            y0 + (y1 - y0) * t
        }
    }
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ComplexBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn is_valid(&self) -> bool {
        self.re_max > self.re_min && self.im_max > self.im_min
    }
}

/// Complex square root continued from `reference`: of the two roots of
/// `w`, return the one closest to `reference`.
pub fn sqrt_near(w: C64, reference: C64) -> C64 {
    let r = w.sqrt();
    if (r - reference).norm() <= (-r - reference).norm() {
        r
    } else {
        -r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_material_interpolates_linearly() {
        let mat = Material::Tabulated {
            mu: C64::new(1.0, 0.0),
            eps_table: vec![(1.0, C64::new(-2.0, 0.1)), (3.0, C64::new(0.0, 0.3))],
        };
        let m = mat.medium_at(2.0);
        assert!((m.eps - C64::new(-1.0, 0.2)).norm() < 1e-15);
        // clamped extrapolation uses the end segment
        let m = mat.medium_at(3.0);
        assert!((m.eps - C64::new(0.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn sqrt_near_picks_continuous_branch() {
        let w = C64::new(-4.0, -1e-9);
        let r = sqrt_near(w, C64::new(0.0, 2.0));
        assert!(r.im > 0.0);
    }
}
