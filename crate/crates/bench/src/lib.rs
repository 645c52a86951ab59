//! Fixtures shared by the benchmarks: the default disk cavity, its m = 1
//! resonance, and a tangent particle a small gap away.

use resoshift::cavity2d::{DiskMode, Parity, ParticleScenario, Placement};
use resoshift::multipole::TwoDiskGeometry;
use resoshift::{Medium, C64};

pub const OMEGA0: C64 = C64::new(4.250755867232418, -1.468777917384384);

pub fn cavity_medium() -> Medium {
    Medium::real(0.2, 1.0)
}

pub fn mode_pair() -> Vec<DiskMode> {
    DiskMode::new(1, OMEGA0, cavity_medium(), 1.0, Parity::Cos).expect("known resonance").family()
}

/// Disk particle of radius `delta` centered at `(1 + 2 delta, 0)`.
pub fn particle(delta: f64) -> ParticleScenario {
    ParticleScenario::disk([1.0 + 2.0 * delta, 0.0], delta, cavity_medium(), Placement::Exterior)
}

pub fn geometry(delta: f64) -> TwoDiskGeometry {
    TwoDiskGeometry { radius: 1.0, cavity: cavity_medium(), l: 1.0 + 2.0 * delta, particle_radius: delta, particle: cavity_medium() }
}
