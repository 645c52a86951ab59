use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Debug;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use resoshift::cavity2d::{
    count_forward, disk_modes, invert_count, invert_size, shift_matrix, CavityError, CountMeasurement, DiskMode, NgonFamily, Parity,
    ParticleScenario, ParticleShape, Placement,
};
use resoshift::multipole::{
    single_disk_root, two_disk_block_root_auto, MultipoleError, OracleRoot, TwoDiskGeometry, MAX_N1, ORACLE_TOL, SPURIOUS_TOL,
    STABILITY_TOL,
};
use resoshift::polarization::{pt_numeric, BoundaryCurve, PolarizationError, PolarizationTensor};
use resoshift::slab1d::{slab_perturbed_exact, slab_resonances, slab_shift, SlabCavity, SlabError, SlabMode, SlabParticle};
use resoshift::{ComplexBox, Material, Medium, C64};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{
    format_complex, CavitySpec, ConfigError, ModeSpec, ParticleSpec, PlacementSpec, PtMethod, ScenarioConfig, ShapeSpec, SweepParameter,
    SweepSpec, Task,
};
use crate::table::{Cell, ResultTable};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    Multipole(#[from] MultipoleError),
    #[error(transparent)]
    Slab(#[from] SlabError),
    #[error(transparent)]
    Polarization(#[from] PolarizationError),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
    #[error("thread pool: {0}")]
    Threads(String),
}

/// `Outer(Inner(Leaf { .. }))` -> `Outer::Inner::Leaf`.
fn variant_path<T: Debug>(e: &T) -> String {
    let dbg = format!("{e:?}");
    let mut parts = Vec::new();
    let mut rest = dbg.as_str();
    loop {
        let end = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
        parts.push(&rest[..end]);
        match rest[end..].strip_prefix('(') {
            Some(r) if r.starts_with(|c: char| c.is_ascii_uppercase()) => rest = r,
            _ => break,
        }
    }
    parts.join("::")
}

impl RunError {
    /// Type and variant of the underlying error, e.g. `CavityError::EmptyBox`.
    pub fn variant(&self) -> String {
        match self {
            RunError::Config(e) => format!("ConfigError::{}", variant_path(e)),
            RunError::Cavity(e) => format!("CavityError::{}", variant_path(e)),
            RunError::Multipole(e) => format!("MultipoleError::{}", variant_path(e)),
            RunError::Slab(e) => format!("SlabError::{}", variant_path(e)),
            RunError::Polarization(e) => format!("PolarizationError::{}", variant_path(e)),
            RunError::Output { .. } => "OutputError".into(),
            RunError::Threads(_) => "ThreadPoolError".into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Cap on sweep parallelism; `None` uses every core.
    pub threads: Option<usize>,
}

fn c1() -> C64 {
    C64::new(1.0, 0.0)
}

fn nan() -> f64 {
    f64::NAN
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Cos => "cos",
        Parity::Sin => "sin",
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn oracle_notes(t: &mut ResultTable) {
    t.note(
        "truncation",
        format!(
            "cavity orders doubled from max(m+12, ceil(2R/|L-R|)) until roots agree to {STABILITY_TOL:e} (cap {MAX_N1}), then +2 check; particle orders 6"
        ),
    );
    t.note("tolerances", format!("muller {ORACLE_TOL:e}; stability {STABILITY_TOL:e}; spurious {SPURIOUS_TOL:e}; box search 1e-13"));
}

enum Cavity {
    Disk { radius: f64, medium: Medium },
    Slab(SlabCavity),
}

fn cavity(cfg: &ScenarioConfig) -> Result<Cavity, RunError> {
    Ok(match cfg.cavity {
        CavitySpec::Disk { radius, eps, mu } => Cavity::Disk { radius, medium: Medium::new(eps.0, mu.0) },
        CavitySpec::Slab { a, b, eps, mu } => Cavity::Slab(SlabCavity::new(a, b, Medium::new(eps.0, mu.0))?),
    })
}

fn material(p: &ParticleSpec) -> Material {
    match (&p.eps, &p.eps_table) {
        (_, Some(t)) => Material::Tabulated { mu: p.mu.0, eps_table: t.iter().map(|(f, e)| (*f, e.0)).collect() },
        (Some(e), None) => Medium::new(e.0, p.mu.0).into(),
        (None, None) => Medium::new(C64::new(f64::NAN, 0.0), p.mu.0).into(),
    }
}

fn constant_medium(p: &ParticleSpec) -> Medium {
    Medium::new(p.eps.map_or(C64::new(f64::NAN, 0.0), |e| e.0), p.mu.0)
}

fn shape(spec: &ShapeSpec, base: &Path) -> Result<ParticleShape, RunError> {
    Ok(match spec {
        ShapeSpec::Disk { radius } => ParticleShape::Disk { radius: *radius },
        ShapeSpec::Ellipse { semi_axes, angle } => ParticleShape::Ellipse { semi_axes: (semi_axes[0], semi_axes[1]), angle: *angle },
        ShapeSpec::Kite { nodes } => ParticleShape::Curve(BoundaryCurve::kite(*nodes)),
        ShapeSpec::Curve { path } => ParticleShape::Curve(BoundaryCurve::read(&base.join(path))?),
    })
}

fn scenario(p: &ParticleSpec, radius: f64, base: &Path) -> Result<ParticleScenario, RunError> {
    let center = [p.center[0], p.center[1]];
    let placement = match p.placement {
        Some(PlacementSpec::Interior) => Placement::Interior,
        Some(PlacementSpec::Exterior) => Placement::Exterior,
        None if center[0].hypot(center[1]) < radius => Placement::Interior,
        None => Placement::Exterior,
    };
    Ok(ParticleScenario { shape: shape(&p.shape, base)?, center, delta: p.delta, material: material(p), placement })
}

fn checked(s: ParticleScenario, radius: f64, path: &str) -> Result<ParticleScenario, RunError> {
    s.validate(radius).map_err(|e| ConfigError::invalid(path, e.to_string()))?;
    Ok(s)
}

fn slab_particle(p: &ParticleSpec) -> SlabParticle {
    SlabParticle { x0: p.center[0], delta: p.delta, material: constant_medium(p) }
}

fn search_box(b: &[f64; 4]) -> ComplexBox {
    ComplexBox::new(b[0], b[1], b[2], b[3])
}

/// The `(cos, sin)` family (or the single `m = 0` mode) selected by `spec`.
fn disk_family(spec: &ModeSpec, radius: f64, medium: Medium, path: &str) -> Result<Vec<DiskMode>, RunError> {
    let m = spec.m.unwrap_or(0);
    if let Some(seed) = spec.seed {
        let r = single_disk_root(m, &medium, radius, seed.0)?;
        return Ok(DiskMode::new(m, r.root, medium, radius, Parity::Cos)?.family());
    }
    let b = spec.search_box.ok_or_else(|| ConfigError::invalid(format!("{path}.search_box"), "required"))?;
    let all = disk_modes(m, medium, radius, &search_box(&b))?;
    let mut distinct: Vec<C64> = all.iter().filter(|d| d.parity == Parity::Cos).map(|d| d.omega0).collect();
    distinct.sort_by(|a, b| a.re.total_cmp(&b.re));
    let chosen = *distinct
        .get(spec.index)
        .ok_or_else(|| ConfigError::invalid(format!("{path}.index"), format!("only {} resonance(s) in the box", distinct.len())))?;
    Ok(all.into_iter().filter(|d| d.omega0 == chosen).collect())
}

fn slab_mode(spec: &ModeSpec, cav: &SlabCavity) -> Result<SlabMode, RunError> {
    let b = spec.search_box.ok_or_else(|| ConfigError::invalid("mode.search_box", "required"))?;
    let mut all = slab_resonances(cav, &search_box(&b))?;
    all.sort_by(|a, b| a.omega0.re.total_cmp(&b.omega0.re));
    let n = all.len();
    all.into_iter()
        .nth(spec.index)
        .ok_or_else(|| ConfigError::invalid("mode.index", format!("only {n} resonance(s) in the box")).into())
}

fn mode_spec(cfg: &ScenarioConfig) -> Result<&ModeSpec, RunError> {
    cfg.mode.as_ref().ok_or_else(|| ConfigError::invalid("mode", "required for this task").into())
}

fn shift_sq(w: C64, w0: C64) -> f64 {
    (w * w - w0 * w0).norm()
}

fn geometry(radius: f64, medium: Medium, s: &ParticleScenario, p: &ParticleSpec) -> TwoDiskGeometry {
    let r = match p.shape {
        ShapeSpec::Disk { radius } => radius,
        _ => f64::NAN,
    };
    TwoDiskGeometry {
        radius,
        cavity: medium,
        l: s.center[0].hypot(s.center[1]),
        particle_radius: s.delta * r,
        particle: constant_medium(p),
    }
}

/// Oracle roots in `(cos, sin)` order.
fn oracle_roots(geom: &TwoDiskGeometry, family: &[DiskMode]) -> Result<Vec<OracleRoot>, MultipoleError> {
    family.iter().map(|mode| two_disk_block_root_auto(geom, mode.parity, mode.omega0, mode.m)).collect()
}

/// Run `task` on a validated config. `raw` is the config file's bytes,
/// hashed into the provenance block.
pub fn run(cfg: &ScenarioConfig, task: Task, raw: &[u8], opts: &RunOptions) -> Result<ResultTable, RunError> {
    cfg.validate(task)?;
    let mut table = match task {
        Task::Modes => modes(cfg)?,
        Task::Shift => shift(cfg)?,
        Task::Oracle => oracle(cfg)?,
        Task::Sweep => sweep(cfg, opts)?,
        Task::Pt => pt(cfg)?,
        Task::InvertSize => size(cfg)?,
        Task::InvertCount => count(cfg)?,
    };
    let mut head = ResultTable::default();
    head.note("resoshift", env!("CARGO_PKG_VERSION"));
    head.note("task", task.name());
    head.note("config_sha256", sha256_hex(raw));
    head.provenance.append(&mut table.provenance);
    table.provenance = head.provenance;
    Ok(table)
}

fn modes(cfg: &ScenarioConfig) -> Result<ResultTable, RunError> {
    let spec = mode_spec(cfg)?;
    match cavity(cfg)? {
        Cavity::Disk { radius, medium } => {
            let m = spec.m.unwrap_or(0);
            let found = match (spec.seed, spec.search_box) {
                (None, Some(b)) => disk_modes(m, medium, radius, &search_box(&b))?,
                _ => disk_family(spec, radius, medium, "mode")?,
            };
            let mut t = ResultTable::new(&["m", "parity", "re_omega0", "im_omega0", "dispersion_residual"]);
            for d in found {
                t.push(vec![
                    (d.m as i64).into(),
                    parity_name(d.parity).into(),
                    d.omega0.re.into(),
                    d.omega0.im.into(),
                    d.dispersion_residual()?.into(),
                ]);
            }
            t.note("tolerances", "box search 1e-13; seed refinement 1e-14");
            Ok(t)
        }
        Cavity::Slab(cav) => {
            let b = spec.search_box.ok_or_else(|| ConfigError::invalid("mode.search_box", "required"))?;
            let mut all = slab_resonances(&cav, &search_box(&b))?;
            all.sort_by(|a, b| a.omega0.re.total_cmp(&b.omega0.re));
            let mut t = ResultTable::new(&["index", "re_omega0", "im_omega0", "boundary_residual"]);
            for (i, m) in all.iter().enumerate() {
                let (ra, rb) = m.boundary_residuals();
                t.push(vec![i.into(), m.omega0.re.into(), m.omega0.im.into(), ra.max(rb).into()]);
            }
            t.note("tolerances", "box search 1e-13");
            Ok(t)
        }
    }
}

fn shift(cfg: &ScenarioConfig) -> Result<ResultTable, RunError> {
    let spec = mode_spec(cfg)?;
    match cavity(cfg)? {
        Cavity::Disk { radius, medium } => {
            let family = disk_family(spec, radius, medium, "mode")?;
            let scns = cfg
                .particles
                .iter()
                .enumerate()
                .map(|(i, p)| checked(scenario(p, radius, &cfg.base_dir)?, radius, &format!("particles[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let pred = shift_matrix(&family, &scns)?;
            let w0 = family[0].omega0;
            let mut t = ResultTable::new(&["branch", "re_omega0", "im_omega0", "re_eta", "im_eta", "re_omega_pred", "im_omega_pred", "shift_asym"]);
            for (j, (eta, w)) in pred.eta.iter().zip(&pred.omega_pred).enumerate() {
                let eta = eta * pred.delta_ref * pred.delta_ref;
                t.push(vec![
                    (j + 1).into(),
                    w0.re.into(),
                    w0.im.into(),
                    eta.re.into(),
                    eta.im.into(),
                    w.re.into(),
                    w.im.into(),
                    shift_sq(*w, w0).into(),
                ]);
            }
            t.note("shift", "eta includes delta^2; shift_asym = |omega_pred^2 - omega0^2|");
            Ok(t)
        }
        Cavity::Slab(cav) => {
            let mode = slab_mode(spec, &cav)?;
            let w0 = mode.omega0;
            let mut t = ResultTable::new(&["particle", "re_omega0", "im_omega0", "re_omega1", "im_omega1", "re_omega_pred", "im_omega_pred"]);
            for (i, p) in cfg.particles.iter().enumerate() {
                let w1 = slab_shift(&mode, &slab_particle(p))?;
                let w = w0 + w1 * p.delta;
                t.push(vec![i.into(), w0.re.into(), w0.im.into(), w1.re.into(), w1.im.into(), w.re.into(), w.im.into()]);
            }
            t.note("shift", "omega_pred = omega0 + delta * omega1, each particle alone");
            Ok(t)
        }
    }
}

fn oracle(cfg: &ScenarioConfig) -> Result<ResultTable, RunError> {
    let spec = mode_spec(cfg)?;
    let p = &cfg.particles[0];
    match cavity(cfg)? {
        Cavity::Disk { radius, medium } => {
            let family = disk_family(spec, radius, medium, "mode")?;
            let s = checked(scenario(p, radius, &cfg.base_dir)?, radius, "particles[0]")?;
            let geom = geometry(radius, medium, &s, p);
            let mut t = ResultTable::new(&["parity", "re_omega", "im_omega", "n1", "n2", "stability", "residual"]);
            for r in oracle_roots(&geom, &family)? {
                t.push(vec![
                    parity_name(r.parity).into(),
                    r.result.root.re.into(),
                    r.result.root.im.into(),
                    r.trunc.n1.into(),
                    r.trunc.n2.into(),
                    r.stability.into(),
                    r.result.residual.into(),
                ]);
            }
            oracle_notes(&mut t);
            Ok(t)
        }
        Cavity::Slab(cav) => {
            let mode = slab_mode(spec, &cav)?;
            let r = slab_perturbed_exact(&cav, &slab_particle(p), mode.omega0)?;
            let mut t = ResultTable::new(&["re_omega", "im_omega", "residual", "iterations"]);
            t.push(vec![r.root.re.into(), r.root.im.into(), r.residual.into(), r.iterations.into()]);
            t.note("tolerances", "transfer-matrix muller 1e-12");
            Ok(t)
        }
    }
}

/// Asymptotic and (optionally) reference shifts for one sweep value.
struct SweepRow {
    asym: [f64; 2],
    oracle: Option<[f64; 2]>,
    status: String,
}

impl SweepRow {
    fn failed(status: String, with_oracle: bool) -> Self {
        Self { asym: [nan(); 2], oracle: with_oracle.then_some([nan(); 2]), status }
    }
}

fn pad2(v: impl IntoIterator<Item = f64>) -> [f64; 2] {
    let mut out = [nan(); 2];
    for (o, x) in out.iter_mut().zip(v) {
        *o = x;
    }
    out
}

/// Particle spec with the swept parameter set to `v`.
fn swept(base: &ParticleSpec, sweep: &SweepSpec, radius: f64, v: f64) -> ParticleSpec {
    let mut p = base.clone();
    let dir = |p: &ParticleSpec| -> Vec<f64> {
        let n = p.center.iter().map(|c| c * c).sum::<f64>().sqrt();
        p.center.iter().map(|c| c / n).collect()
    };
    match sweep.parameter {
        SweepParameter::Delta => {
            p.delta = v;
            if let Some(off) = sweep.center_offset {
                let u = dir(base);
                p.center = u.iter().map(|c| c * (radius + off * v)).collect();
            }
        }
        SweepParameter::Z => {
            let u = dir(base);
            p.center = u.iter().map(|c| c * v).collect();
        }
        SweepParameter::EpsC => p.eps = Some(crate::config::Cx(C64::new(v, 0.0))),
        SweepParameter::InvEpsC => p.eps = Some(crate::config::Cx(C64::new(1.0 / v, 0.0))),
    }
    p
}

fn sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ResultTable, RunError> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| ConfigError::invalid("sweep", "required"))?;
    let values = spec.values.expand();
    let base = &cfg.particles[0];
    let soft = matches!(spec.parameter, SweepParameter::EpsC | SweepParameter::InvEpsC);
    let with_oracle = spec.oracle;
    let mode = mode_spec(cfg)?;

    let cav = cavity(cfg)?;
    let (w0, rows): (C64, Vec<Result<SweepRow, RunError>>) = match &cav {
        Cavity::Disk { radius, medium } => {
            let (radius, medium) = (*radius, *medium);
            let family = disk_family(mode, radius, medium, "mode")?;
            let w0 = family[0].omega0;
            let particles: Vec<ParticleSpec> = values.iter().map(|&v| swept(base, spec, radius, v)).collect();
            let scns = particles
                .iter()
                .enumerate()
                .map(|(i, p)| checked(scenario(p, radius, &cfg.base_dir)?, radius, &format!("sweep.values[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let row = |(p, s): (&ParticleSpec, &ParticleScenario)| -> Result<SweepRow, RunError> {
                let pred = shift_matrix(&family, std::slice::from_ref(s))?;
                let asym = pad2(pred.omega_pred.iter().map(|w| shift_sq(*w, w0)));
                let oracle = if with_oracle {
                    let roots = oracle_roots(&geometry(radius, medium, s, p), &family)?;
                    Some(pad2(roots.iter().map(|r| shift_sq(r.result.root, w0))))
                } else {
                    None
                };
                Ok(SweepRow { asym, oracle, status: "ok".into() })
            };
            let rows = parallel(opts, || particles.par_iter().zip(scns.par_iter()).map(row).collect())?;
            (w0, rows)
        }
        Cavity::Slab(sc) => {
            if spec.center_offset.is_some() {
                return Err(ConfigError::invalid("sweep.center_offset", "not used for the slab cavity").into());
            }
            let m = slab_mode(mode, sc)?;
            let w0 = m.omega0;
            let particles: Vec<ParticleSpec> = values.iter().map(|&v| swept(base, spec, 0.0, v)).collect();
            let row = |p: &ParticleSpec| -> Result<SweepRow, RunError> {
                let sp = slab_particle(p);
                let w1 = slab_shift(&m, &sp)?;
                let asym = [(w1 * p.delta).norm(), nan()];
                let oracle = if with_oracle {
                    let r = slab_perturbed_exact(sc, &sp, w0)?;
                    Some([(r.root - w0).norm(), nan()])
                } else {
                    None
                };
                Ok(SweepRow { asym, oracle, status: "ok".into() })
            };
            let rows = parallel(opts, || particles.par_iter().map(row).collect())?;
            (w0, rows)
        }
    };

    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        match r {
            Ok(r) => out.push(r),
            Err(e) if soft && !matches!(e, RunError::Config(_)) => out.push(SweepRow::failed(e.variant(), with_oracle)),
            Err(e) => return Err(e),
        }
    }

    let branches = if matches!(cav, Cavity::Slab(_)) { 1 } else { 2 };
    let mut cols: Vec<String> = vec![spec.parameter.name().into(), "re_omega0".into(), "im_omega0".into()];
    let numbered = |stem: &str| -> Vec<String> {
        if branches == 1 {
            vec![stem.to_string()]
        } else {
            (1..=branches).map(|j| format!("{stem}_{j}")).collect()
        }
    };
    cols.extend(numbered("shift_asym"));
    if with_oracle {
        cols.extend(numbered("shift_oracle"));
        cols.extend(numbered("rel_err"));
    }
    if soft {
        cols.push("peak".into());
        cols.push("status".into());
    }
    let peak = soft
        .then(|| {
            out.iter().enumerate().filter(|(_, r)| r.asym[0].is_finite()).max_by(|a, b| a.1.asym[0].total_cmp(&b.1.asym[0])).map(|(i, _)| i)
        })
        .flatten();

    let mut t = ResultTable { columns: cols, ..Default::default() };
    for (i, (v, r)) in values.iter().zip(&out).enumerate() {
        let mut row: Vec<Cell> = vec![(*v).into(), w0.re.into(), w0.im.into()];
        row.extend(r.asym[..branches].iter().map(|&x| Cell::from(x)));
        if let Some(o) = r.oracle {
            row.extend(o[..branches].iter().map(|&x| Cell::from(x)));
            row.extend((0..branches).map(|j| Cell::from((r.asym[j] - o[j]) / o[j])));
        }
        if soft {
            row.push((usize::from(peak == Some(i))).into());
            row.push(r.status.clone().into());
        }
        t.push(row);
    }
    if branches == 2 {
        t.note("shift", "|omega^2 - omega0^2| per branch (1 = cos, 2 = sin); rel_err = (asym - oracle) / oracle");
    } else {
        t.note("shift", "|omega - omega0|; rel_err = (asym - oracle) / oracle");
    }
    if with_oracle && branches == 2 {
        oracle_notes(&mut t);
    }
    Ok(t)
}

fn parallel<T: Send>(opts: &RunOptions, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| RunError::Threads(e.to_string()))?;
    Ok(pool.install(f))
}

fn pt(cfg: &ScenarioConfig) -> Result<ResultTable, RunError> {
    let spec = cfg.pt.as_ref().ok_or_else(|| ConfigError::invalid("pt", "required"))?;
    let k = spec.contrast.0;
    let (tensor, method): (PolarizationTensor, &str) = match (&spec.shape, spec.method) {
        (ShapeSpec::Disk { radius }, PtMethod::Numeric) => (pt_numeric(&BoundaryCurve::circle(*radius, spec.nodes), k)?, "numeric"),
        (ShapeSpec::Ellipse { semi_axes, angle }, PtMethod::Numeric) => {
            (pt_numeric(&BoundaryCurve::ellipse((semi_axes[0], semi_axes[1]), *angle, spec.nodes), k)?, "numeric")
        }
        (s @ (ShapeSpec::Disk { .. } | ShapeSpec::Ellipse { .. }), PtMethod::Auto) => (shape(s, &cfg.base_dir)?.tensor(k)?, "closed form"),
        (s, _) => (shape(s, &cfg.base_dir)?.tensor(k)?, "numeric"),
    };
    let mut t = ResultTable::new(&["i", "j", "re", "im"]);
    for i in 0..tensor.dim() {
        for j in 0..tensor.dim() {
            let v = tensor.matrix[(i, j)];
            t.push(vec![i.into(), j.into(), v.re.into(), v.im.into()]);
        }
    }
    t.note("method", method);
    t.note("contrast", format_complex(k));
    t.note("shape_area", crate::table::format_float(tensor.shape_area));
    Ok(t)
}

fn size(cfg: &ScenarioConfig) -> Result<ResultTable, RunError> {
    let spec = cfg.invert_size.as_ref().ok_or_else(|| ConfigError::invalid("invert_size", "required"))?;
    let Cavity::Disk { radius, medium } = cavity(cfg)? else {
        return Err(ConfigError::invalid("cavity.type", "size inversion needs the disk cavity").into());
    };
    let family = disk_family(mode_spec(cfg)?, radius, medium, "mode")?;
    let p = &cfg.particles[0];
    let template = checked(scenario(p, radius, &cfg.base_dir)?, radius, "particles[0]")?;
    let measured: Vec<C64> = if spec.from_oracle {
        oracle_roots(&geometry(radius, medium, &template, p), &family)?.iter().map(|r| r.result.root).collect()
    } else {
        spec.measured.iter().map(|c| c.0).collect()
    };
    let mut cols = vec!["measurement", "re_measured", "im_measured", "delta_est", "branch"];
    if spec.from_oracle {
        cols.extend(["delta_true", "rel_err"]);
    }
    let mut t = ResultTable::new(&cols);
    for (i, w) in measured.iter().enumerate() {
        let est = invert_size(*w, &family, &template)?;
        let mut row: Vec<Cell> = vec![i.into(), w.re.into(), w.im.into(), est.delta.into(), (est.branch + 1).into()];
        if spec.from_oracle {
            row.extend([Cell::from(p.delta), Cell::from((est.delta - p.delta) / p.delta)]);
        }
        t.push(row);
    }
    if spec.from_oracle {
        oracle_notes(&mut t);
    }
    Ok(t)
}

fn count(cfg: &ScenarioConfig) -> Result<ResultTable, RunError> {
    let spec = cfg.invert_count.as_ref().ok_or_else(|| ConfigError::invalid("invert_count", "required"))?;
    let Cavity::Disk { radius, medium } = cavity(cfg)? else {
        return Err(ConfigError::invalid("cavity.type", "count inversion needs the disk cavity").into());
    };
    let p = &cfg.particles[0];
    let family = NgonFamily {
        shape: shape(&p.shape, &cfg.base_dir)?,
        delta: p.delta,
        material: material(p),
        phase: p.center[1].atan2(p.center[0]),
    };
    let families = spec
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| disk_family(m, radius, medium, &format!("invert_count.modes[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let measured: Vec<Vec<C64>> = match (&spec.measured, spec.true_count) {
        (Some(meas), _) => meas.iter().map(|v| v.iter().map(|c| c.0).collect()).collect(),
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut out = Vec::new();
            for modes in &families {
                let w0 = modes[0].omega0;
                let clean = count_forward(modes, &family, n)?;
                out.push(
                    clean
                        .into_iter()
                        .map(|w| {
                            let a: f64 = rng.sample(StandardNormal);
                            let b: f64 = rng.sample(StandardNormal);
                            let xi = C64::new(a, b) * FRAC_1_SQRT_2;
                            w0 + (w - w0) * (c1() + xi * spec.noise)
                        })
                        .collect(),
                );
            }
            out
        }
        (None, None) => return Err(ConfigError::invalid("invert_count.measured", "required").into()),
    };
    for (i, (m, f)) in measured.iter().zip(&families).enumerate() {
        if m.len() != f.len() {
            return Err(ConfigError::invalid(format!("invert_count.measured[{i}]"), format!("expected {} branch value(s)", f.len())).into());
        }
    }
    let meas: Vec<CountMeasurement> = families.into_iter().zip(measured).map(|(modes, measured)| CountMeasurement { modes, measured }).collect();
    let [lo, hi] = spec.candidates;
    let est = invert_count(&meas, &family, lo..=hi)?;
    let mut t = ResultTable::new(&["n", "discrepancy", "selected"]);
    for (n, d) in est.table {
        t.push(vec![n.into(), d.into(), usize::from(n == est.n).into()]);
    }
    if spec.true_count.is_some() {
        t.note("noise", format!("relative {} on each shift, complex normal, ChaCha8 seed {}", spec.noise, spec.seed));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_paths() {
        assert_eq!(variant_path(&CavityError::EmptyBox), "EmptyBox");
        assert_eq!(variant_path(&CavityError::ZeroSensitivity { branch: 1 }), "ZeroSensitivity");
        let nested = CavityError::Polarization(PolarizationError::Io("x".into()));
        assert_eq!(variant_path(&nested), "Polarization::Io");
    }
}
