//! JSON scenario configuration. See `docs/config.md` for the schema.

use std::fmt;
use std::path::{Path, PathBuf};

use resoshift::C64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    /// Schema violation; `path` is the JSON field path, e.g. `particles[0].eps`.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { path: path.into(), message: message.into() }
    }
}

/// A complex number written as `"re+imj"` (`"4.25-1.47j"`, `"0.2"`, `"-2j"`).
/// Plain JSON numbers are accepted for real values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx(pub C64);

pub fn parse_complex(text: &str) -> Result<C64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("`{text}` is not a complex number of the form re+imj");
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('j') else {
        return Ok(C64::new(num(&s)?, 0.0));
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let im = &body[i..];
            let im = if im == "+" || im == "-" { format!("{im}1") } else { im.to_string() };
            Ok(C64::new(num(&body[..i])?, num(&im)?))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                b => num(b)?,
            };
            Ok(C64::new(0.0, im))
        }
    }
}

pub fn format_complex(z: C64) -> String {
    format!("{}{}{}j", z.re, if z.im.is_sign_negative() { "" } else { "+" }, z.im)
}

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(self.0))
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Cx;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a complex number string \"re+imj\" or a real number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Cx, E> {
                parse_complex(v).map(Cx).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cx, E> {
                Ok(Cx(C64::new(v, 0.0)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cx, E> {
                Ok(Cx(C64::new(v as f64, 0.0)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cx, E> {
                Ok(Cx(C64::new(v as f64, 0.0)))
            }
        }
        d.deserialize_any(V)
    }
}

fn one() -> Cx {
    Cx(C64::new(1.0, 0.0))
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Modes,
    Shift,
    Oracle,
    Sweep,
    Pt,
    InvertSize,
    InvertCount,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Modes => "modes",
            Task::Shift => "shift",
            Task::Oracle => "oracle",
            Task::Sweep => "sweep",
            Task::Pt => "pt",
            Task::InvertSize => "invert-size",
            Task::InvertCount => "invert-count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CavitySpec {
    Disk {
        #[serde(default = "unit")]
        radius: f64,
        eps: Cx,
        #[serde(default = "one")]
        mu: Cx,
    },
    Slab {
        a: f64,
        b: f64,
        eps: Cx,
        #[serde(default = "one")]
        mu: Cx,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Disk {
        #[serde(default = "unit")]
        radius: f64,
    },
    Ellipse {
        semi_axes: [f64; 2],
        #[serde(default)]
        angle: f64,
    },
    Kite {
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    /// Curve file in the polarization module's text format; relative paths
    /// resolve against the config file's directory.
    Curve { path: PathBuf },
}

fn default_nodes() -> usize {
    256
}

impl Default for ShapeSpec {
    fn default() -> Self {
        ShapeSpec::Disk { radius: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementSpec {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    #[serde(default)]
    pub shape: ShapeSpec,
    /// `[x, y]` for the disk cavity, `[x0]` for the slab.
    pub center: Vec<f64>,
    pub delta: f64,
    #[serde(default)]
    pub eps: Option<Cx>,
    /// `[[frequency, "eps"], ...]`, sorted by frequency; replaces `eps`.
    #[serde(default)]
    pub eps_table: Option<Vec<(f64, Cx)>>,
    #[serde(default = "one")]
    pub mu: Cx,
    /// Defaults to the side of the cavity boundary the center lies on.
    #[serde(default)]
    pub placement: Option<PlacementSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    /// Angular order (disk cavity only).
    #[serde(default)]
    pub m: Option<u32>,
    /// `[re_min, re_max, im_min, im_max]`.
    #[serde(default)]
    pub search_box: Option<[f64; 4]>,
    #[serde(default)]
    pub seed: Option<Cx>,
    /// Which resonance in the box, counted by increasing real part.
    #[serde(default)]
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Delta,
    Z,
    EpsC,
    InvEpsC,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Delta => "delta",
            SweepParameter::Z => "z",
            SweepParameter::EpsC => "eps_c",
            SweepParameter::InvEpsC => "inv_eps_c",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Linspace { linspace: (f64, f64, usize) },
    Logspace { logspace: (f64, f64, usize) },
}

impl Values {
    pub fn expand(&self) -> Vec<f64> {
        let grid = |a: f64, b: f64, n: usize| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        };
        match self {
            Values::List(v) => v.clone(),
            Values::Linspace { linspace: (a, b, n) } => grid(*a, *b, *n),
            Values::Logspace { logspace: (a, b, n) } => grid(a.log10(), b.log10(), *n).into_iter().map(|e| 10f64.powf(e)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Values,
    /// Also compute the multipole (disk) or transfer-matrix (slab) reference.
    #[serde(default)]
    pub oracle: bool,
    /// For `delta` sweeps: keep the particle `center_offset * delta` away
    /// from the cavity boundary along its center direction.
    #[serde(default)]
    pub center_offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtMethod {
    Auto,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtSpec {
    pub shape: ShapeSpec,
    /// Contrast `k`.
    pub contrast: Cx,
    /// `auto` uses the closed form for disks and ellipses.
    #[serde(default = "auto")]
    pub method: PtMethod,
    /// Quadrature nodes when a disk or ellipse is discretized.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn auto() -> PtMethod {
    PtMethod::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSizeSpec {
    #[serde(default)]
    pub measured: Vec<Cx>,
    /// Use the multipole resonances of `particles[0]` as the measurements.
    #[serde(default)]
    pub from_oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertCountSpec {
    /// At least two distinct resonances.
    pub modes: Vec<ModeSpec>,
    /// One list of measured branches per entry of `modes`.
    #[serde(default)]
    pub measured: Option<Vec<Vec<Cx>>>,
    /// Synthesize the measurements from this many particles instead.
    #[serde(default)]
    pub true_count: Option<usize>,
    /// Relative complex Gaussian noise on each synthesized shift.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    /// Inclusive `[min, max]` particle counts to try.
    pub candidates: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Optional; must match the subcommand when given.
    #[serde(default)]
    pub task: Option<Task>,
    pub cavity: CavitySpec,
    #[serde(default)]
    pub mode: Option<ModeSpec>,
    #[serde(default)]
    pub particles: Vec<ParticleSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub pt: Option<PtSpec>,
    #[serde(default)]
    pub invert_size: Option<InvertSizeSpec>,
    #[serde(default)]
    pub invert_count: Option<InvertCountSpec>,
    /// Output CSV path; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Directory relative curve paths resolve against (not part of the JSON).
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_slice(bytes);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::invalid(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        de.end().map_err(|e| ConfigError::invalid("<root>", e.to_string()))?;
        Ok(cfg)
    }

    /// Read and parse; also returns the raw bytes for hashing.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let mut cfg = Self::from_slice(&bytes)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, bytes))
    }

    fn is_disk(&self) -> bool {
        matches!(self.cavity, CavitySpec::Disk { .. })
    }

    /// Check everything the chosen task needs, before any numerics run.
    pub fn validate(&self, task: Task) -> Result<(), ConfigError> {
        if let Some(t) = self.task {
            if t != task {
                return Err(ConfigError::invalid("task", format!("config is for `{}` but `{}` was requested", t.name(), task.name())));
            }
        }
        self.validate_cavity()?;
        for (i, p) in self.particles.iter().enumerate() {
            self.validate_particle(p, &format!("particles[{i}]"))?;
        }
        let need_mode = !matches!(task, Task::Pt | Task::InvertCount);
        match &self.mode {
            Some(m) => self.validate_mode(m, "mode")?,
            None if need_mode => return Err(ConfigError::invalid("mode", "required for this task")),
            None => {}
        }
        let need_particles = matches!(task, Task::Shift | Task::Oracle | Task::Sweep | Task::InvertSize | Task::InvertCount);
        if need_particles && self.particles.is_empty() {
            return Err(ConfigError::invalid("particles", "at least one particle is required for this task"));
        }
        match task {
            Task::Modes | Task::Shift => Ok(()),
            Task::Oracle => self.validate_single_disk_particle("particles"),
            Task::Sweep => self.validate_sweep(),
            Task::Pt => self.validate_pt(),
            Task::InvertSize => self.validate_invert_size(),
            Task::InvertCount => self.validate_invert_count(),
        }
    }

    fn validate_cavity(&self) -> Result<(), ConfigError> {
        match &self.cavity {
            CavitySpec::Disk { radius, .. } if !(*radius > 0.0 && radius.is_finite()) => {
                Err(ConfigError::invalid("cavity.radius", "must be positive"))
            }
            CavitySpec::Slab { a, b, .. } if !(a < b) => Err(ConfigError::invalid("cavity.b", "must exceed cavity.a")),
            _ => Ok(()),
        }
    }

    fn validate_particle(&self, p: &ParticleSpec, path: &str) -> Result<(), ConfigError> {
        if !(p.delta > 0.0 && p.delta.is_finite()) {
            return Err(ConfigError::invalid(format!("{path}.delta"), "must be positive"));
        }
        let dim = if self.is_disk() { 2 } else { 1 };
        if p.center.len() != dim || p.center.iter().any(|c| !c.is_finite()) {
            return Err(ConfigError::invalid(format!("{path}.center"), format!("expected {dim} finite coordinate(s)")));
        }
        match (&p.eps, &p.eps_table) {
            (Some(_), None) => {}
            (None, Some(t)) if !t.is_empty() && t.windows(2).all(|w| w[0].0 < w[1].0) => {}
            (None, Some(_)) => return Err(ConfigError::invalid(format!("{path}.eps_table"), "must be non-empty and sorted by frequency")),
            _ => return Err(ConfigError::invalid(format!("{path}.eps"), "exactly one of `eps` and `eps_table` is required")),
        }
        if !self.is_disk() {
            if !matches!(p.shape, ShapeSpec::Disk { .. }) {
                return Err(ConfigError::invalid(format!("{path}.shape"), "slab particles are layers; omit the shape"));
            }
            if p.eps_table.is_some() {
                return Err(ConfigError::invalid(format!("{path}.eps_table"), "slab particles take a constant `eps`"));
            }
        }
        validate_shape(&p.shape, &format!("{path}.shape"))
    }

    fn validate_mode(&self, m: &ModeSpec, path: &str) -> Result<(), ConfigError> {
        if self.is_disk() && m.m.is_none() {
            return Err(ConfigError::invalid(format!("{path}.m"), "required for the disk cavity"));
        }
        match (&m.search_box, &m.seed) {
            (Some(b), None) => {
                if !(b[0] < b[1] && b[2] < b[3] && b[3] < 0.0) {
                    return Err(ConfigError::invalid(
                        format!("{path}.search_box"),
                        "need re_min < re_max and im_min < im_max < 0 (resonances lie in the lower half plane)",
                    ));
                }
                Ok(())
            }
            (None, Some(_)) if self.is_disk() => Ok(()),
            (None, Some(_)) => Err(ConfigError::invalid(format!("{path}.search_box"), "slab modes are selected by search box")),
            _ => Err(ConfigError::invalid(format!("{path}.search_box"), "exactly one of `search_box` and `seed` is required")),
        }
    }

    fn validate_single_disk_particle(&self, path: &str) -> Result<(), ConfigError> {
        if self.particles.len() != 1 {
            return Err(ConfigError::invalid(path, "the reference solver takes exactly one particle"));
        }
        if !self.is_disk() {
            return Ok(());
        }
        let p = &self.particles[0];
        if !matches!(p.shape, ShapeSpec::Disk { .. }) {
            return Err(ConfigError::invalid(format!("{path}[0].shape"), "the multipole reference needs a disk particle"));
        }
        if p.eps_table.is_some() {
            return Err(ConfigError::invalid(format!("{path}[0].eps_table"), "the multipole reference needs a constant `eps`"));
        }
        if p.center[1] != 0.0 || p.center[0] < 0.0 {
            return Err(ConfigError::invalid(format!("{path}[0].center"), "the multipole reference needs the particle on the positive x-axis"));
        }
        Ok(())
    }

    fn validate_sweep(&self) -> Result<(), ConfigError> {
        let s = self.sweep.as_ref().ok_or_else(|| ConfigError::invalid("sweep", "required for this task"))?;
        if self.particles.len() != 1 {
            return Err(ConfigError::invalid("particles", "a sweep varies exactly one particle"));
        }
        let values = s.values.expand();
        if values.is_empty() {
            return Err(ConfigError::invalid("sweep.values", "no values"));
        }
        if let Values::Logspace { logspace: (a, b, _) } = s.values {
            if !(a > 0.0 && b > 0.0) {
                return Err(ConfigError::invalid("sweep.values.logspace", "endpoints must be positive"));
            }
        }
        let p = &self.particles[0];
        for (i, v) in values.iter().enumerate() {
            let bad = match s.parameter {
                SweepParameter::Delta => !(*v > 0.0),
                SweepParameter::Z => !v.is_finite() || !self.is_disk(),
                SweepParameter::EpsC | SweepParameter::InvEpsC => *v == 0.0 || !v.is_finite(),
            };
            if bad {
                return Err(ConfigError::invalid(format!("sweep.values[{i}]"), format!("{v} is not valid for `{}`", s.parameter.name())));
            }
        }
        if matches!(s.parameter, SweepParameter::EpsC | SweepParameter::InvEpsC) && p.eps_table.is_some() {
            return Err(ConfigError::invalid("particles[0].eps_table", "a permittivity sweep needs a constant `eps`"));
        }
        if s.center_offset.is_some() && s.parameter != SweepParameter::Delta {
            return Err(ConfigError::invalid("sweep.center_offset", "only applies to `delta` sweeps"));
        }
        if self.is_disk() && p.center[0] == 0.0 && p.center[1] == 0.0 && (s.center_offset.is_some() || s.parameter == SweepParameter::Z) {
            return Err(ConfigError::invalid("particles[0].center", "must not be the origin when the sweep moves the particle"));
        }
        if s.oracle {
            self.validate_single_disk_particle("particles")?;
        }
        Ok(())
    }

    fn validate_pt(&self) -> Result<(), ConfigError> {
        let p = self.pt.as_ref().ok_or_else(|| ConfigError::invalid("pt", "required for this task"))?;
        if p.nodes < 8 {
            return Err(ConfigError::invalid("pt.nodes", "need at least 8 nodes"));
        }
        validate_shape(&p.shape, "pt.shape")
    }

    fn validate_invert_size(&self) -> Result<(), ConfigError> {
        if !self.is_disk() {
            return Err(ConfigError::invalid("cavity.type", "size inversion is implemented for the disk cavity"));
        }
        let s = self.invert_size.as_ref().ok_or_else(|| ConfigError::invalid("invert_size", "required for this task"))?;
        match (s.measured.is_empty(), s.from_oracle) {
            (false, false) => Ok(()),
            (true, true) => self.validate_single_disk_particle("particles"),
            _ => Err(ConfigError::invalid("invert_size.measured", "give `measured` values or set `from_oracle`, not both")),
        }
    }

    fn validate_invert_count(&self) -> Result<(), ConfigError> {
        if !self.is_disk() {
            return Err(ConfigError::invalid("cavity.type", "count inversion is implemented for the disk cavity"));
        }
        let c = self.invert_count.as_ref().ok_or_else(|| ConfigError::invalid("invert_count", "required for this task"))?;
        if c.modes.len() < 2 {
            return Err(ConfigError::invalid("invert_count.modes", "need at least two resonances"));
        }
        for (i, m) in c.modes.iter().enumerate() {
            self.validate_mode(m, &format!("invert_count.modes[{i}]"))?;
        }
        match (&c.measured, c.true_count) {
            (Some(meas), None) => {
                if meas.len() != c.modes.len() {
                    return Err(ConfigError::invalid("invert_count.measured", "one list per entry of `modes`"));
                }
            }
            (None, Some(n)) if n >= 1 => {}
            (None, Some(_)) => return Err(ConfigError::invalid("invert_count.true_count", "must be at least 1")),
            _ => return Err(ConfigError::invalid("invert_count.measured", "exactly one of `measured` and `true_count` is required")),
        }
        if !(c.noise >= 0.0 && c.noise.is_finite()) {
            return Err(ConfigError::invalid("invert_count.noise", "must be non-negative"));
        }
        let [lo, hi] = c.candidates;
        if lo == 0 || lo > hi {
            return Err(ConfigError::invalid("invert_count.candidates", "need 1 <= min <= max"));
        }
        if self.particles.len() != 1 {
            return Err(ConfigError::invalid("particles", "the counting family is described by exactly one particle"));
        }
        Ok(())
    }
}

fn validate_shape(shape: &ShapeSpec, path: &str) -> Result<(), ConfigError> {
    match shape {
        ShapeSpec::Disk { radius } if !(*radius > 0.0) => Err(ConfigError::invalid(format!("{path}.radius"), "must be positive")),
        ShapeSpec::Ellipse { semi_axes, .. } if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) => {
            Err(ConfigError::invalid(format!("{path}.semi_axes"), "must be positive"))
        }
        ShapeSpec::Kite { nodes } if *nodes < 8 => Err(ConfigError::invalid(format!("{path}.nodes"), "need at least 8 nodes")),
        _ => Ok(()),
    }
}
