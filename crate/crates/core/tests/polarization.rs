use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use resoshift::polarization::{
    pt_disk, pt_ellipse, pt_numeric, pt_sphere, BoundaryCurve, PolarizationError, PolarizationTensor,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn max_diff(a: &PolarizationTensor, b: &PolarizationTensor) -> f64 {
    (&a.matrix - &b.matrix).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn max_abs(a: &PolarizationTensor) -> f64 {
    a.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn disk_k3_is_pi_identity() {
    let m = pt_disk(c(3.0), 1.0).unwrap();
    assert!((m.matrix[(0, 0)] - c(PI)).norm() < 1e-15);
    assert!((m.matrix[(1, 1)] - c(PI)).norm() < 1e-15);
    assert_eq!(m.matrix[(0, 1)], c(0.0));
    let numeric = pt_numeric(&BoundaryCurve::circle(1.0, 256), c(3.0)).unwrap();
    assert!(max_diff(&m, &numeric) < 1e-8);
}

#[test]
fn disk_large_contrast_limit() {
    let m = pt_disk(c(1e8), 0.5).unwrap();
    let limit = 2.0 * PI * 0.25;
    assert!(((m.matrix[(0, 0)].re - limit) / limit).abs() < 1e-6);
}

#[test]
fn ellipse_reduces_to_disk() {
    for k in [c(3.0), C64::new(-2.5, 0.4), c(0.1)] {
        let e = pt_ellipse(k, (0.7, 0.7), 0.3).unwrap();
        let d = pt_disk(k, 0.7).unwrap();
        assert!(max_diff(&e, &d) < 1e-14);
    }
}

#[test]
fn ellipse_matches_nystrom() {
    let e = pt_ellipse(c(3.0), (2.0, 1.0), 0.0).unwrap();
    let n = pt_numeric(&BoundaryCurve::ellipse((2.0, 1.0), 0.0, 256), c(3.0)).unwrap();
    assert!(max_diff(&e, &n) < 1e-6 * max_abs(&e));
    let e = pt_ellipse(C64::new(-3.0, 0.5), (1.0, 0.4), 0.9).unwrap();
    let n = pt_numeric(&BoundaryCurve::ellipse((1.0, 0.4), 0.9, 256), C64::new(-3.0, 0.5)).unwrap();
    assert!(max_diff(&e, &n) < 1e-6 * max_abs(&e));
}

#[test]
fn ellipse_rotation_identity() {
    let theta = PI / 5.0;
    let m0 = pt_ellipse(c(3.0), (2.0, 1.0), 0.0).unwrap();
    let mt = pt_ellipse(c(3.0), (2.0, 1.0), theta).unwrap();
    assert!(max_diff(&mt, &m0.rotated(theta)) < 1e-12);
}

#[test]
fn ellipse_plasmonic_poles() {
    // p + k q = 0 at k = -p/q
    assert!(matches!(pt_ellipse(c(-2.0), (2.0, 1.0), 0.0), Err(PolarizationError::SingularContrast { .. })));
    assert!(matches!(pt_ellipse(c(-0.5), (2.0, 1.0), 0.0), Err(PolarizationError::SingularContrast { .. })));
}

#[test]
fn kite_is_symmetric_and_converged() {
    let k = c(2.0);
    let m1 = pt_numeric(&BoundaryCurve::kite(256), k).unwrap();
    let m2 = pt_numeric(&BoundaryCurve::kite(512), k).unwrap();
    assert!(m1.max_asymmetry() < 1e-10 * max_abs(&m1));
    assert!(max_diff(&m1, &m2) < 1e-6 * max_abs(&m1));
}

#[test]
fn kite_without_curvature_uses_column_identity() {
    let k = c(2.0);
    let exact = pt_numeric(&BoundaryCurve::kite(256), k).unwrap();
    let mut curve = BoundaryCurve::kite(256);
    curve.curvature = None;
    let fallback = pt_numeric(&curve, k).unwrap();
    assert!(max_diff(&exact, &fallback) < 1e-8 * max_abs(&exact));
}

#[test]
fn contrast_near_one_gives_tiny_tensor() {
    let curve = BoundaryCurve::circle(1.0, 128);
    let m = pt_numeric(&curve, c(1.0 + 1e-12)).unwrap();
    assert!(max_abs(&m) < 1e-9 * m.shape_area);
}

#[test]
fn disk_blow_up_is_simple_pole() {
    let curve = BoundaryCurve::circle(1.0, 128);
    let mut closed = Vec::new();
    let mut numeric = Vec::new();
    for j in 2..=5 {
        for sign in [-1.0, 1.0] {
            let k = c(-1.0 + sign * 10f64.powi(-j));
            let norm = |m: &PolarizationTensor| m.matrix.map(|v| v.norm()).norm();
            closed.push(norm(&pt_disk(k, 1.0).unwrap()) * (k + 1.0).norm());
            numeric.push(norm(&pt_numeric(&curve, k).unwrap()) * (k + 1.0).norm());
        }
    }
    for v in closed.iter().chain(&numeric) {
        assert!((v / closed[0] - 1.0).abs() < 0.05);
    }
}

#[test]
fn np_eigenvalue_is_detected() {
    // on the circle every non-constant harmonic has NP eigenvalue 0: lambda = 0 at k = -1
    let curve = BoundaryCurve::circle(1.0, 64);
    let e = pt_numeric(&curve, c(-1.0));
    assert!(matches!(e, Err(PolarizationError::NearSingularOperator { .. })));
}

#[test]
fn sphere_closed_form() {
    let m = pt_sphere(c(3.0), 1.0).unwrap();
    let vol = 4.0 / 3.0 * PI;
    assert!((m.matrix[(2, 2)] - c(3.0 * vol * 2.0 / 5.0)).norm() < 1e-14);
    assert!(matches!(pt_sphere(c(-2.0), 1.0), Err(PolarizationError::SingularContrast { .. })));
}

#[test]
fn curve_file_round_trip() {
    let curve = BoundaryCurve::kite(64);
    let text = curve.to_text();
    assert!(text.starts_with("# curve d=2 N=64\n"));
    let back = BoundaryCurve::from_text(&text).unwrap();
    assert_eq!(back.len(), 64);
    for i in 0..64 {
        assert_eq!(back.points[i], curve.points[i]);
        assert_eq!(back.weights[i], curve.weights[i]);
    }
    let dir = std::env::temp_dir().join(format!("resoshift-curve-{}.txt", std::process::id()));
    curve.write(&dir).unwrap();
    let again = BoundaryCurve::read(&dir).unwrap();
    std::fs::remove_file(&dir).ok();
    assert_eq!(again.normals, back.normals);
}

#[test]
fn malformed_curve_files() {
    assert!(matches!(BoundaryCurve::from_text("0 1 0 1 0 0.1\n"), Err(PolarizationError::Parse { .. })));
    assert!(matches!(BoundaryCurve::from_text("# curve d=2 N=2\n0 1 0 1 0 0.1\n"), Err(PolarizationError::Parse { .. })));
    assert!(matches!(BoundaryCurve::from_text("# curve d=2 N=1\n0 1 0 1 0\n"), Err(PolarizationError::Parse { .. })));
}

#[test]
fn open_and_self_intersecting_curves_are_bad() {
    let mut half = BoundaryCurve::circle(1.0, 64);
    half.t.truncate(32);
    half.points.truncate(32);
    half.normals.truncate(32);
    half.weights.truncate(32);
    half.curvature = None;
    assert!(matches!(pt_numeric(&half, c(3.0)), Err(PolarizationError::BadCurve(_))));

    // figure-eight (lemniscate of Gerono): crosses itself at the origin
    let eight = BoundaryCurve::from_parametric(64, |t| {
        let (s, co) = t.sin_cos();
        let (s2, c2) = (2.0 * t).sin_cos();
        ([co, 0.5 * s2], [-s, c2], [-co, -2.0 * s2])
    });
    assert!(matches!(eight.validate(), Err(PolarizationError::BadCurve(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn numeric_tensor_scales_with_area(s in 0.2f64..3.0, kr in -5.0f64..5.0, ki in -1.0f64..1.0) {
        let k = C64::new(kr, ki);
        prop_assume!((k + 1.0).norm() > 0.2 && (k - 1.0).norm() > 1e-3);
        let base = pt_numeric(&BoundaryCurve::kite(128), k).unwrap();
        let big = pt_numeric(&BoundaryCurve::kite(128).scaled(s), k).unwrap();
        let expect = base.matrix.map(|v| v * (s * s));
        let err = (&big.matrix - expect).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9 * max_abs(&big));
    }

    #[test]
    fn numeric_tensor_is_rotation_equivariant(theta in 0.0f64..(2.0 * PI), kr in 0.05f64..8.0) {
        let k = c(kr);
        prop_assume!((kr - 1.0).abs() > 1e-3);
        let base = pt_numeric(&BoundaryCurve::kite(128), k).unwrap();
        let turned = pt_numeric(&BoundaryCurve::kite(128).rotated(theta), k).unwrap();
        prop_assert!(max_diff(&turned, &base.rotated(theta)) < 1e-9 * max_abs(&base));
    }

    #[test]
    fn tensors_are_symmetric(p in 0.3f64..2.0, q in 0.3f64..2.0, theta in 0.0f64..PI, kr in -6.0f64..6.0, ki in -2.0f64..2.0) {
        let k = C64::new(kr, ki);
        prop_assume!((k * q + p).norm() > 1e-2 && (k * p + q).norm() > 1e-2);
        let m = pt_ellipse(k, (p, q), theta).unwrap();
        prop_assert!(m.max_asymmetry() <= 1e-12 * max_abs(&m).max(1e-300));
        let z: DMatrix<C64> = m.matrix.clone() - m.matrix.transpose();
        prop_assert!(z.iter().all(|v| v.norm() <= 1e-12 * max_abs(&m).max(1e-300)));
    }
}
