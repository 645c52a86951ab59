//! Polarization tensors `M(k, B)` of small inclusions.
//!
//! `k` is the contrast seen by the inclusion: `eps_m/eps_c` inside the
//! cavity, `1/eps_c` outside it. Closed forms cover disks, ellipses and
//! spheres; arbitrary smooth planar shapes go through the Neumann–Poincaré
//! operator `K*`, discretized with the Nyström method:
//!
//! `M_ij = ∫_{∂B} x_i φ_j dσ`,  `(λ I - K*) φ_j = ν_j`,  `λ = (k+1)/(2(k-1))`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, Matrix2};
use thiserror::Error;

use crate::types::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolarizationError {
    #[error("contrast k = {k} sits on a plasmonic pole of the closed form")]
    SingularContrast { k: C64 },
    #[error("lambda = {lambda} is within {distance:e} of a Neumann-Poincare eigenvalue near {eigenvalue}")]
    NearSingularOperator { lambda: C64, eigenvalue: C64, distance: f64 },
    #[error("bad curve: {0}")]
    BadCurve(String),
    #[error("curve file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

/// `d×d` polarization tensor together with the inclusion's measure `|B|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationTensor {
    pub matrix: DMatrix<C64>,
    pub shape_area: f64,
}

impl PolarizationTensor {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Upper-left 2×2 block as a fixed-size matrix (the planar case).
    pub fn as_matrix2(&self) -> Matrix2<C64> {
        Matrix2::new(self.matrix[(0, 0)], self.matrix[(0, 1)], self.matrix[(1, 0)], self.matrix[(1, 1)])
    }

    /// `R(θ) M R(θ)^T` (planar tensors only).
    pub fn rotated(&self, theta: f64) -> Self {
        let r = rotation(theta);
        let m = r * self.as_matrix2() * r.transpose();
        Self { matrix: DMatrix::from_iterator(2, 2, m.iter().copied()), shape_area: self.shape_area }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        worst
    }
}

fn rotation(theta: f64) -> Matrix2<C64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0))
}

fn pole_guard(den: C64, k: C64) -> Result<(), PolarizationError> {
    if den.norm() <= 1e-14 * (1.0 + k.norm()) {
        return Err(PolarizationError::SingularContrast { k });
    }
    Ok(())
}

/// Disk of the given radius: `M = 2|B| (k-1)/(k+1) I`.
pub fn pt_disk(k: C64, radius: f64) -> Result<PolarizationTensor, PolarizationError> {
    pole_guard(k + 1.0, k)?;
    let area = PI * radius * radius;
    let s = (k - 1.0) / (k + 1.0) * (2.0 * area);
    Ok(PolarizationTensor { matrix: DMatrix::from_diagonal_element(2, 2, s), shape_area: area })
}

/// Ellipse with semi-axes `(p, q)` rotated by `rotation` radians.
pub fn pt_ellipse(k: C64, semi_axes: (f64, f64), rotation_angle: f64) -> Result<PolarizationTensor, PolarizationError> {
    let (p, q) = semi_axes;
    let d1 = k * q + p;
    let d2 = k * p + q;
    pole_guard(d1, k)?;
    pole_guard(d2, k)?;
    let area = PI * p * q;
    let pre = (k - 1.0) * area;
    let diag = Matrix2::new(pre * (p + q) / d1, C64::new(0.0, 0.0), C64::new(0.0, 0.0), pre * (p + q) / d2);
    let r = rotation(rotation_angle);
    let m = r * diag * r.transpose();
    Ok(PolarizationTensor { matrix: DMatrix::from_iterator(2, 2, m.iter().copied()), shape_area: area })
}

/// Ball in three dimensions: `M = 3|B| (k-1)/(k+2) I`.
pub fn pt_sphere(k: C64, radius: f64) -> Result<PolarizationTensor, PolarizationError> {
    pole_guard(k + 2.0, k)?;
    let vol = 4.0 / 3.0 * PI * radius.powi(3);
    let s = (k - 1.0) / (k + 2.0) * (3.0 * vol);
    Ok(PolarizationTensor { matrix: DMatrix::from_diagonal_element(3, 3, s), shape_area: vol })
}

/// Samples of a closed planar curve for periodic trapezoidal quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub t: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    /// Unit outward normals.
    pub normals: Vec<[f64; 2]>,
    /// Arclength quadrature weights.
    pub weights: Vec<f64>,
    /// Signed curvature, when the parametrization supplies it.
    pub curvature: Option<Vec<f64>>,
}

impl BoundaryCurve {
    /// Sample a counter-clockwise `2π`-periodic parametrization
    /// `t -> (x(t), x'(t), x''(t))` at `n` equispaced nodes.
    pub fn from_parametric<F>(n: usize, f: F) -> Self
    where
        F: Fn(f64) -> ([f64; 2], [f64; 2], [f64; 2]),
    {
        let mut c = Self { t: vec![], points: vec![], normals: vec![], weights: vec![], curvature: Some(vec![]) };
        let h = 2.0 * PI / n as f64;
        for i in 0..n {
            let t = i as f64 * h;
            let (x, dx, ddx) = f(t);
            let speed = dx[0].hypot(dx[1]);
            c.t.push(t);
            c.points.push(x);
            c.normals.push([dx[1] / speed, -dx[0] / speed]);
            c.weights.push(speed * h);
            if let Some(k) = c.curvature.as_mut() {
                k.push((dx[0] * ddx[1] - dx[1] * ddx[0]) / speed.powi(3));
            }
        }
        c
    }

    pub fn circle(radius: f64, n: usize) -> Self {
        Self::ellipse((radius, radius), 0.0, n)
    }

    pub fn ellipse(semi_axes: (f64, f64), rotation_angle: f64, n: usize) -> Self {
        let (p, q) = semi_axes;
        let (s, c) = rotation_angle.sin_cos();
        let rot = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
        Self::from_parametric(n, |t| {
            let (st, ct) = t.sin_cos();
            (rot([p * ct, q * st]), rot([-p * st, q * ct]), rot([-p * ct, -q * st]))
        })
    }

    /// Smooth kite `(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
    pub fn kite(n: usize) -> Self {
        Self::from_parametric(n, |t| {
            let (st, ct) = t.sin_cos();
            let (s2, c2) = (2.0 * t).sin_cos();
            ([ct + 0.65 * c2 - 0.65, 1.5 * st], [-st - 1.3 * s2, 1.5 * ct], [-ct - 2.6 * c2, -1.5 * st])
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Enclosed area via `∫ x·ν dσ = 2|B|`.
    pub fn area(&self) -> f64 {
        0.5 * self
            .points
            .iter()
            .zip(&self.normals)
            .zip(&self.weights)
            .map(|((x, n), w)| (x[0] * n[0] + x[1] * n[1]) * w)
            .sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            t: self.t.clone(),
            points: self.points.iter().map(|p| [p[0] * s, p[1] * s]).collect(),
            normals: self.normals.clone(),
            weights: self.weights.iter().map(|w| w * s).collect(),
            curvature: self.curvature.as_ref().map(|k| k.iter().map(|v| v / s).collect()),
        }
    }

    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let rot = |v: &[f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
        Self {
            t: self.t.clone(),
            points: self.points.iter().map(rot).collect(),
            normals: self.normals.iter().map(rot).collect(),
            weights: self.weights.clone(),
            curvature: self.curvature.clone(),
        }
    }

    /// Closure, orientation and simplicity checks.
    pub fn validate(&self) -> Result<(), PolarizationError> {
        let n = self.len();
        if n < 8 {
            return Err(PolarizationError::BadCurve(format!("{n} samples are too few")));
        }
        if self.normals.len() != n || self.weights.len() != n || self.t.len() != n {
            return Err(PolarizationError::BadCurve("column lengths differ".into()));
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(PolarizationError::BadCurve("non-positive quadrature weight".into()));
        }
        let seg = |i: usize| {
            let (a, b) = (self.points[i], self.points[(i + 1) % n]);
            (b[0] - a[0]).hypot(b[1] - a[1])
        };
        let typical = (0..n - 1).map(seg).fold(0.0, f64::max);
        if seg(n - 1) > 3.0 * typical {
            return Err(PolarizationError::BadCurve("curve is not closed".into()));
        }
        if self.area() <= 0.0 {
            return Err(PolarizationError::BadCurve("normals point inward (clockwise orientation)".into()));
        }
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[(i + 1) % n]);
            let tangent = [b[0] - a[0], b[1] - a[1]];
            let nrm = self.normals[i];
            // outward normal is the tangent turned clockwise
            if tangent[1] * nrm[0] - tangent[0] * nrm[1] < 0.0 {
                return Err(PolarizationError::BadCurve(format!("normal {i} is inconsistent with the traversal")));
            }
        }
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(self.points[i], self.points[(i + 1) % n], self.points[j], self.points[(j + 1) % n]) {
                    return Err(PolarizationError::BadCurve(format!("segments {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }

    /// Plain-text table `t x y nx ny w` under a `# curve d=2 N=<count>` header.
    pub fn to_text(&self) -> String {
        let mut s = format!("# curve d=2 N={}\n", self.len());
        for i in 0..self.len() {
            let (p, n) = (self.points[i], self.normals[i]);
            let _ = writeln!(s, "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}", self.t[i], p[0], p[1], n[0], n[1], self.weights[i]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, PolarizationError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(PolarizationError::Parse { line: 1, message: "empty file".into() })?;
        let count = parse_header(header)?;
        let mut c = Self { t: vec![], points: vec![], normals: vec![], weights: vec![], curvature: None };
        for (idx, line) in lines {
            if line.trim_start().starts_with('#') {
                continue;
            }
            let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| PolarizationError::Parse { line: idx + 1, message: e.to_string() })?;
            if vals.len() != 6 {
                return Err(PolarizationError::Parse { line: idx + 1, message: format!("expected 6 columns, found {}", vals.len()) });
            }
            c.t.push(vals[0]);
            c.points.push([vals[1], vals[2]]);
            c.normals.push([vals[3], vals[4]]);
            c.weights.push(vals[5]);
        }
        if c.len() != count {
            return Err(PolarizationError::Parse { line: 1, message: format!("header announces {count} rows, found {}", c.len()) });
        }
        Ok(c)
    }

    pub fn read(path: &Path) -> Result<Self, PolarizationError> {
        let text = std::fs::read_to_string(path).map_err(|e| PolarizationError::Io(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), PolarizationError> {
        std::fs::write(path, self.to_text()).map_err(|e| PolarizationError::Io(format!("{}: {e}", path.display())))
    }
}

fn parse_header(line: &str) -> Result<usize, PolarizationError> {
    let bad = |m: &str| PolarizationError::Parse { line: 1, message: m.to_string() };
    let body = line.trim().strip_prefix('#').ok_or_else(|| bad("missing '# curve' header"))?;
    let mut words = body.split_whitespace();
    if words.next() != Some("curve") {
        return Err(bad("missing '# curve' header"));
    }
    let mut count = None;
    for w in words {
        if let Some(d) = w.strip_prefix("d=") {
            if d != "2" {
                return Err(bad("only d=2 curves are supported"));
            }
        } else if let Some(n) = w.strip_prefix("N=") {
            count = Some(n.parse::<usize>().map_err(|e| bad(&e.to_string()))?);
        }
    }
    count.ok_or_else(|| bad("header lacks N=<count>"))
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Nyström matrix of `K*`, kernel `<x - y, ν_x> / (2π |x - y|^2)`.
///
/// The diagonal is the curvature limit `κ/(4π)` when curvature is known;
/// otherwise it is fixed by the identity `∫ K*(x, y) dσ(x) = 1/2`.
pub fn np_matrix(curve: &BoundaryCurve) -> DMatrix<f64> {
    let n = curve.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let (x, nu) = (curve.points[i], curve.normals[i]);
        for j in 0..n {
            if i == j {
                continue;
            }
            let y = curve.points[j];
            let d = [x[0] - y[0], x[1] - y[1]];
            let r2 = d[0] * d[0] + d[1] * d[1];
            a[(i, j)] = (d[0] * nu[0] + d[1] * nu[1]) / (2.0 * PI * r2) * curve.weights[j];
        }
    }
    match &curve.curvature {
        Some(kappa) => {
            for i in 0..n {
                a[(i, i)] = kappa[i] / (4.0 * PI) * curve.weights[i];
            }
        }
        None => {
            for j in 0..n {
                let off: f64 = (0..n).filter(|&i| i != j).map(|i| curve.weights[i] * a[(i, j)] / curve.weights[j]).sum();
                a[(j, j)] = 0.5 - off;
            }
        }
    }
    a
}

/// Smallest-magnitude eigenvalue of a complex matrix by inverse iteration
/// through an existing LU factorization.
fn smallest_eigenvalue(lu: &nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>, n: usize) -> Option<C64> {
    let mut v = nalgebra::DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 + (i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()));
    v /= C64::new(v.norm(), 0.0);
    let mut mu = C64::new(0.0, 0.0);
    for _ in 0..30 {
        let w = lu.solve(&v)?;
        let nrm = w.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return None;
        }
        // Rayleigh-type estimate of the eigenvalue of A^{-1}
        mu = v.dotc(&w);
        v = w / C64::new(nrm, 0.0);
    }
    Some(mu.inv())
}

/// Absolute distance below which `λ` is treated as an NP eigenvalue.
pub const NP_SINGULAR_TOL: f64 = 1e-9;

/// Polarization tensor of the planar shape bounded by `curve`.
pub fn pt_numeric(curve: &BoundaryCurve, k: C64) -> Result<PolarizationTensor, PolarizationError> {
    curve.validate()?;
    let n = curve.len();
    let area = curve.area();
    if k == C64::new(1.0, 0.0) {
        return Ok(PolarizationTensor { matrix: DMatrix::zeros(2, 2), shape_area: area });
    }
    let lambda = (k + 1.0) / ((k - 1.0) * 2.0);
    let kstar = np_matrix(curve);
    let a = DMatrix::<C64>::from_fn(n, n, |i, j| {
        let diag = if i == j { lambda } else { C64::new(0.0, 0.0) };
        diag - kstar[(i, j)]
    });
    let lu = a.lu();
    if let Some(mu) = smallest_eigenvalue(&lu, n) {
        if mu.norm() < NP_SINGULAR_TOL {
            return Err(PolarizationError::NearSingularOperator { lambda, eigenvalue: lambda - mu, distance: mu.norm() });
        }
    }
    let rhs = DMatrix::<C64>::from_fn(n, 2, |i, j| C64::new(curve.normals[i][j], 0.0));
    let phi = lu.solve(&rhs).ok_or(PolarizationError::NearSingularOperator { lambda, eigenvalue: lambda, distance: 0.0 })?;
    let m = DMatrix::<C64>::from_fn(2, 2, |i, j| {
        (0..n).map(|l| phi[(l, j)] * (curve.points[l][i] * curve.weights[l])).sum()
    });
    Ok(PolarizationTensor { matrix: m, shape_area: area })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_contrast_gives_zero() {
        let m = pt_disk(C64::new(1.0, 0.0), 0.7).unwrap();
        assert_eq!(m.matrix, DMatrix::zeros(2, 2));
    }

    #[test]
    fn disk_pole() {
        assert!(matches!(pt_disk(C64::new(-1.0, 0.0), 1.0), Err(PolarizationError::SingularContrast { .. })));
    }

    #[test]
    fn circle_area_and_kstar_constant() {
        let c = BoundaryCurve::circle(2.0, 64);
        assert!((c.area() - 4.0 * PI).abs() < 1e-12);
        let a = np_matrix(&c);
        // K* on the circle has constant kernel 1/(4πR)
        let w = c.weights[0];
        assert!((a[(3, 17)] - w / (8.0 * PI)).abs() < 1e-14);
        assert!((a[(5, 5)] - w / (8.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn clockwise_curve_is_rejected() {
        let mut c = BoundaryCurve::circle(1.0, 32);
        c.points.reverse();
        c.normals.reverse();
        for n in c.normals.iter_mut() {
            *n = [-n[0], -n[1]];
        }
        assert!(matches!(c.validate(), Err(PolarizationError::BadCurve(_))));
    }
}
