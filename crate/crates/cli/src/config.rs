//! Scenario files: flat `key = value` lines, `#` comments, dotted sections.
//!
//! ```text
//! # elliptic cylinder
//! body.J = 0.4486 0.3943 0.0772
//! body.rho = -0.0140 0.1044 0.4989
//! equilibria.per_interval = 100
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use pend3d::dynamics::Model;
use pend3d::integrate::{IntegratorConfig, Method};
use pend3d::reduction::Quadrature;
use pend3d::{BodyParams, Mat3, Rotation, Vec3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Task {
    #[default]
    Simulate,
    Equilibria,
    Linearize,
    Poincare,
    Reconstruct,
    Phase,
}

impl Task {
    pub const ALL: [Task; 6] =
        [Task::Simulate, Task::Equilibria, Task::Linearize, Task::Poincare, Task::Reconstruct, Task::Phase];

    pub fn name(self) -> &'static str {
        match self {
            Task::Simulate => "simulate",
            Task::Equilibria => "equilibria",
            Task::Linearize => "linearize",
            Task::Poincare => "poincare",
            Task::Reconstruct => "reconstruct",
            Task::Phase => "phase",
        }
    }

    pub fn from_name(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Body as written in the file, before any axis reordering.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    pub j: Mat3,
    pub m: f64,
    pub g: f64,
    pub rho: Vec3,
    pub balanced: bool,
}

/// Signed axis permutation `P` (det +1) that sorts a diagonal inertia into
/// `J₁ ≥ J₂ ≥ J₃`. Body vectors map as `x ↦ Px`, attitudes as `R ↦ RPᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reordering {
    pub order: [usize; 3],
    pub p: Mat3,
}

impl Reordering {
    fn for_diagonal(d: [f64; 3]) -> Option<Reordering> {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
        if order == [0, 1, 2] {
            return None;
        }
        let mut p = Mat3::zeros();
        for (row, &axis) in order.iter().enumerate() {
            p[(row, axis)] = 1.0;
        }
        if p.determinant() < 0.0 {
            p.row_mut(2).neg_mut();
        }
        Some(Reordering { order, p })
    }

    pub fn vector(&self, x: &Vec3) -> Vec3 {
        self.p * x
    }

    /// Inverse of [`Reordering::vector`].
    pub fn vector_back(&self, x: &Vec3) -> Vec3 {
        self.p.transpose() * x
    }

    pub fn attitude(&self, r: &Mat3) -> Mat3 {
        r * self.p.transpose()
    }

    pub fn inertia(&self, j: &Mat3) -> Mat3 {
        self.p * j * self.p.transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub r: Mat3,
    pub omega: Vec3,
    /// Draw `R₀` and `ω₀` from the seeded generator instead.
    pub random: bool,
    /// Largest component of a random `ω₀` (rad/s).
    pub random_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriaSpec {
    pub per_interval: usize,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizeSpec {
    pub fd_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSpec {
    pub energies: Vec<f64>,
    /// `ω₀ = c·direction` with `c` chosen to hit each energy from `R₀`.
    pub direction: Vec3,
    pub max_crossings: usize,
    pub crossing_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructSpec {
    pub quadrature: Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpec {
    /// Axis of the circular loop on S².
    pub center: Vec3,
    pub colatitude: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub task: Task,
    pub body: BodySpec,
    pub initial: InitialSpec,
    pub integrator: IntegratorConfig,
    pub simulate_model: Model,
    pub equilibria: EquilibriaSpec,
    pub linearize: LinearizeSpec,
    pub poincare: PoincareSpec,
    pub reconstruct: ReconstructSpec,
    pub phase: PhaseSpec,
    pub seed: u64,
    /// Derived from `body`; `None` when the inertia is already sorted or
    /// not diagonal.
    pub reordering: Option<Reordering>,
    params: BodyParams,
}

impl Scenario {
    /// Body in the frame of the file.
    pub fn params(&self) -> &BodyParams {
        &self.params
    }

    /// Body with its axes sorted `J₁ ≥ J₂ ≥ J₃`.
    pub fn sorted_params(&self) -> BodyParams {
        match &self.reordering {
            Some(r) => {
                let j = r.inertia(self.params.j());
                let (m, g) = (self.params.m(), self.params.g());
                if self.params.is_balanced() {
                    BodyParams::balanced(j, m, g)
                } else {
                    BodyParams::new(j, m, g, r.vector(self.params.rho()))
                }
                .expect("a signed permutation preserves validity")
            }
            None => self.params.clone(),
        }
    }

    pub fn initial_attitude(&self) -> Rotation {
        Rotation::new(self.initial.r).expect("validated at parse time")
    }

    pub fn warnings(&self) -> Vec<String> {
        match &self.reordering {
            Some(r) => vec![format!(
                "inertia is not sorted J1 >= J2 >= J3; equilibria are enumerated with body axes reordered as ({}, {}, {}) and reported in the file frame",
                r.order[0] + 1,
                r.order[1] + 1,
                r.order[2] + 1
            )],
            None => Vec::new(),
        }
    }
}

const KEYS: &[&str] = &[
    "task",
    "seed",
    "body.J",
    "body.m",
    "body.g",
    "body.rho",
    "body.balanced",
    "initial.R",
    "initial.omega",
    "initial.random",
    "initial.random_scale",
    "integrator.method",
    "integrator.h",
    "integrator.T",
    "integrator.renormalize_every",
    "integrator.sample_every",
    "simulate.model",
    "equilibria.per_interval",
    "equilibria.model",
    "linearize.fd_step",
    "poincare.energies",
    "poincare.direction",
    "poincare.max_crossings",
    "poincare.crossing_tol",
    "reconstruct.quadrature",
    "phase.center",
    "phase.colatitude",
    "phase.points",
];

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    entries: BTreeMap<String, Entry>,
}

impl Fields {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        e.value
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| ConfigError::Parse {
                    line: e.line,
                    message: format!("`{key}`: `{tok}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn scalar(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.numbers(key)? {
            None => Ok(default),
            Some(v) if v.len() == 1 => finite(key, v[0]),
            Some(v) => Err(invalid(key, format!("expected one number, got {}", v.len()))),
        }
    }

    fn vec3(&self, key: &str, default: Vec3) -> Result<Vec3, ConfigError> {
        match self.numbers(key)? {
            None => Ok(default),
            Some(v) if v.len() == 3 => {
                for &x in &v {
                    finite(key, x)?;
                }
                Ok(Vec3::new(v[0], v[1], v[2]))
            }
            Some(v) => Err(invalid(key, format!("expected three numbers, got {}", v.len()))),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let Some(e) = self.raw(key) else { return Ok(default) };
        e.value.parse::<usize>().map_err(|_| ConfigError::Parse {
            line: e.line,
            message: format!("`{key}`: `{}` is not a non-negative integer", e.value),
        })
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        let Some(e) = self.raw(key) else { return Ok(false) };
        match e.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(ConfigError::Parse { line: e.line, message: format!("`{key}`: `{other}` is not true/false") }),
        }
    }

    fn word<T>(&self, key: &str, default: T, lookup: impl Fn(&str) -> Option<T>, expected: &str) -> Result<T, ConfigError> {
        let Some(e) = self.raw(key) else { return Ok(default) };
        lookup(&e.value).ok_or_else(|| invalid(key, format!("unknown value `{}` (expected {expected})", e.value)))
    }
}

fn finite(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, "value must be finite"))
    }
}

fn tokenize(text: &str) -> Result<Fields, ConfigError> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse { line, message: "expected `key = value`".into() });
        };
        let (key, value) = (key.trim(), value.trim());
        let well_formed = !key.is_empty()
            && key.split('.').all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
        if !well_formed {
            return Err(ConfigError::Parse { line, message: format!("malformed key `{key}`") });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("`{key}` has no value") });
        }
        if !KEYS.contains(&key) {
            return Err(invalid(key, "unknown key"));
        }
        if entries.insert(key.to_string(), Entry { line, value: value.to_string() }).is_some() {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    Ok(Fields { entries })
}

fn model_from_name(s: &str) -> Option<Model> {
    match s {
        "full" => Some(Model::Full),
        "lp" => Some(Model::Lp),
        "lr" => Some(Model::Lr),
        _ => None,
    }
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Full => "full",
        Model::Lp => "lp",
        Model::Lr => "lr",
    }
}

fn quadrature_from_name(s: &str) -> Option<Quadrature> {
    match s {
        "trapezoid" => Some(Quadrature::Trapezoid),
        "simpson" => Some(Quadrature::Simpson),
        _ => None,
    }
}

fn quadrature_name(q: Quadrature) -> &'static str {
    match q {
        Quadrature::Trapezoid => "trapezoid",
        Quadrature::Simpson => "simpson",
    }
}

fn inertia(fields: &Fields) -> Result<Mat3, ConfigError> {
    let key = "body.J";
    let v = fields.numbers(key)?.ok_or_else(|| invalid(key, "missing (three diagonal moments or nine entries)"))?;
    for &x in &v {
        finite(key, x)?;
    }
    let j = match v.len() {
        3 => Mat3::from_diagonal(&Vec3::new(v[0], v[1], v[2])),
        9 => Mat3::from_row_slice(&v),
        n => return Err(invalid(key, format!("expected 3 or 9 numbers, got {n}"))),
    };
    if (j - j.transpose()).abs().max() > 1e-12 * j.abs().max() {
        return Err(invalid(key, "inertia matrix must be symmetric"));
    }
    if j.cholesky().is_none() {
        return Err(invalid(key, "inertia matrix must be positive definite"));
    }
    Ok(j)
}

fn body(fields: &Fields) -> Result<BodySpec, ConfigError> {
    let j = inertia(fields)?;
    let m = fields.scalar("body.m", 1.0)?;
    if m <= 0.0 {
        return Err(invalid("body.m", format!("mass must be positive, got {m}")));
    }
    let g = fields.scalar("body.g", 9.81)?;
    if g < 0.0 {
        return Err(invalid("body.g", format!("gravity must be non-negative, got {g}")));
    }
    let balanced = fields.flag("body.balanced")?;
    let rho = fields.vec3("body.rho", Vec3::zeros())?;
    if balanced && rho != Vec3::zeros() {
        return Err(invalid("body.rho", "must be zero (or omitted) for a balanced body"));
    }
    if !balanced && rho == Vec3::zeros() {
        return Err(invalid("body.rho", "center-of-mass offset is zero; set body.balanced = true for a balanced body"));
    }
    Ok(BodySpec { j, m, g, rho, balanced })
}

fn attitude(fields: &Fields) -> Result<Mat3, ConfigError> {
    let key = "initial.R";
    let Some(v) = fields.numbers(key)? else { return Ok(Mat3::identity()) };
    if v.len() != 9 {
        return Err(invalid(key, format!("expected nine numbers (row-major), got {}", v.len())));
    }
    for &x in &v {
        finite(key, x)?;
    }
    let r = Mat3::from_row_slice(&v);
    Rotation::new(r).map_err(|e| invalid(key, e.to_string()))?;
    Ok(r)
}

/// Parses and validates a scenario; keys left out take their defaults.
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let f = tokenize(text)?;
    let task = f.word("task", Task::Simulate, Task::from_name, "simulate|equilibria|linearize|poincare|reconstruct|phase")?;
    let seed = match f.raw("seed") {
        None => 0,
        Some(e) => e.value.parse::<u64>().map_err(|_| ConfigError::Parse {
            line: e.line,
            message: format!("`seed`: `{}` is not an unsigned integer", e.value),
        })?,
    };
    let body = body(&f)?;

    let initial = InitialSpec {
        r: attitude(&f)?,
        omega: f.vec3("initial.omega", Vec3::zeros())?,
        random: f.flag("initial.random")?,
        random_scale: f.scalar("initial.random_scale", 1.0)?,
    };
    if initial.random_scale < 0.0 {
        return Err(invalid("initial.random_scale", "must be non-negative"));
    }

    let defaults = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        method: f.word("integrator.method", defaults.method, Method::from_name, "rk4-projected|liegroup-rk2|liegroup-rk4")?,
        h: f.scalar("integrator.h", defaults.h)?,
        t_end: f.scalar("integrator.T", defaults.t_end)?,
        renormalize_every: f.count("integrator.renormalize_every", defaults.renormalize_every)?,
        sample_every: f.count("integrator.sample_every", defaults.sample_every)?,
    };
    integrator.validate().map_err(|e| invalid("integrator", e.to_string()))?;

    let simulate_model = f.word("simulate.model", Model::Full, model_from_name, "full|lp|lr")?;

    let equilibria = EquilibriaSpec {
        per_interval: f.count("equilibria.per_interval", 100)?,
        model: f.word("equilibria.model", Model::Lp, model_from_name, "lp|lr")?,
    };
    if equilibria.model == Model::Full {
        return Err(invalid("equilibria.model", "equilibria are enumerated on the reduced models (lp or lr)"));
    }
    if equilibria.per_interval == 0 {
        return Err(invalid("equilibria.per_interval", "must be positive"));
    }

    let linearize = LinearizeSpec { fd_step: f.scalar("linearize.fd_step", 1e-6)? };
    if !(1e-7..=1e-4).contains(&linearize.fd_step) {
        return Err(invalid("linearize.fd_step", "must lie in [1e-7, 1e-4]"));
    }

    let energies = match f.numbers("poincare.energies")? {
        None => vec![-2.65, 0.0, 2.03, 8.83, 11.95],
        Some(v) => {
            for &x in &v {
                finite("poincare.energies", x)?;
            }
            v
        }
    };
    let poincare = PoincareSpec {
        energies,
        direction: f.vec3("poincare.direction", Vec3::new(1.0, 1.0, 1.0))?,
        max_crossings: f.count("poincare.max_crossings", 2000)?,
        crossing_tol: f.scalar("poincare.crossing_tol", 1e-10)?,
    };
    if poincare.direction == Vec3::zeros() {
        return Err(invalid("poincare.direction", "must be nonzero"));
    }
    if poincare.crossing_tol <= 0.0 {
        return Err(invalid("poincare.crossing_tol", "must be positive"));
    }

    let reconstruct = ReconstructSpec {
        quadrature: f.word("reconstruct.quadrature", Quadrature::Trapezoid, quadrature_from_name, "trapezoid|simpson")?,
    };

    let phase = PhaseSpec {
        center: f.vec3("phase.center", Vec3::z())?,
        colatitude: f.scalar("phase.colatitude", 0.5)?,
        points: f.count("phase.points", 2000)?,
    };
    if phase.center == Vec3::zeros() {
        return Err(invalid("phase.center", "must be nonzero"));
    }
    if !(phase.colatitude > 0.0 && phase.colatitude < std::f64::consts::PI) {
        return Err(invalid("phase.colatitude", "must lie in (0, pi)"));
    }
    if phase.points < 8 {
        return Err(invalid("phase.points", "at least 8 points are needed"));
    }

    let reordering = if body.j.is_diagonal() {
        Reordering::for_diagonal([body.j[(0, 0)], body.j[(1, 1)], body.j[(2, 2)]])
    } else {
        None
    };
    let params = if body.balanced {
        BodyParams::balanced(body.j, body.m, body.g)
    } else {
        BodyParams::new(body.j, body.m, body.g, body.rho)
    }
    .map_err(|e| invalid("body", e.to_string()))?;

    Ok(Scenario {
        task,
        body,
        initial,
        integrator,
        simulate_model,
        equilibria,
        linearize,
        poincare,
        reconstruct,
        phase,
        seed,
        reordering,
        params,
    })
}

fn numbers<'a>(xs: impl IntoIterator<Item = &'a f64>) -> String {
    xs.into_iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

fn row_major(m: &Mat3) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

/// Canonical text form; every key is written out.
pub fn render(s: &Scenario) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
    kv("task", s.task.name().into());
    kv("seed", s.seed.to_string());
    if s.body.j.is_diagonal() {
        kv("body.J", numbers(s.body.j.diagonal().iter()));
    } else {
        kv("body.J", numbers(&row_major(&s.body.j)));
    }
    kv("body.m", format!("{:?}", s.body.m));
    kv("body.g", format!("{:?}", s.body.g));
    kv("body.rho", numbers(s.body.rho.iter()));
    kv("body.balanced", s.body.balanced.to_string());
    kv("initial.R", numbers(&row_major(&s.initial.r)));
    kv("initial.omega", numbers(s.initial.omega.iter()));
    kv("initial.random", s.initial.random.to_string());
    kv("initial.random_scale", format!("{:?}", s.initial.random_scale));
    kv("integrator.method", s.integrator.method.name().into());
    kv("integrator.h", format!("{:?}", s.integrator.h));
    kv("integrator.T", format!("{:?}", s.integrator.t_end));
    kv("integrator.renormalize_every", s.integrator.renormalize_every.to_string());
    kv("integrator.sample_every", s.integrator.sample_every.to_string());
    kv("simulate.model", model_name(s.simulate_model).into());
    kv("equilibria.per_interval", s.equilibria.per_interval.to_string());
    kv("equilibria.model", model_name(s.equilibria.model).into());
    kv("linearize.fd_step", format!("{:?}", s.linearize.fd_step));
    kv("poincare.energies", numbers(&s.poincare.energies));
    kv("poincare.direction", numbers(s.poincare.direction.iter()));
    kv("poincare.max_crossings", s.poincare.max_crossings.to_string());
    kv("poincare.crossing_tol", format!("{:?}", s.poincare.crossing_tol));
    kv("reconstruct.quadrature", quadrature_name(s.reconstruct.quadrature).into());
    kv("phase.center", numbers(s.phase.center.iter()));
    kv("phase.colatitude", format!("{:?}", s.phase.colatitude));
    kv("phase.points", s.phase.points.to_string());
    out
}

trait IsDiagonal {
    fn is_diagonal(&self) -> bool;
}

impl IsDiagonal for Mat3 {
    fn is_diagonal(&self) -> bool {
        (0..3).all(|i| (0..3).all(|k| i == k || self[(i, k)] == 0.0))
    }
}
