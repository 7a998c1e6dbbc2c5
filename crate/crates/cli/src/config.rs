//! TOML run configuration.
//!
//! Parsing happens in three passes so that a broken file reports as much as
//! possible at once: unknown keys (all of them, with suggestions), then
//! types, then value ranges (again all of them).
//!
//! Lengths, interval ends and angles may be written as numbers or as
//! multiples of pi, e.g. `"2pi"`, `"-pi/4"`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use tdsr_core::{
    AdaptiveParams, DomainSpec, EnergySlope, ModelKind, ModelSpec, Schedule, SolverControls, StudyPlan, TimeStepping,
};

use crate::error::ConfigError;
use crate::init::{Crystallites, InitialCondition, Profile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub domain: DomainSection,
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// `"periodic"` or `"neumann"`.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, deserialize_with = "scalar_opt", skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, deserialize_with = "scalar_opt", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, deserialize_with = "scalar_opt", skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub final_time: f64,
    /// Accuracy order 1..=3.
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_substeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSection {
    pub dt_min: f64,
    pub dt_max: f64,
    pub gamma: f64,
    /// `"backward-difference"` (default) or `"dissipation"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_picard: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_newton: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_streak: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// `"profile"`, `"random"` or `"crystallites"`.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<[f64; 2]>>,
    #[serde(
        default,
        deserialize_with = "scalar_vec_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub ladder: Vec<f64>,
    pub reference_dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_picard_tol: Option<f64>,
}

/// Command-line values that replace the file's.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub order: Option<usize>,
    pub theta: Option<f64>,
    pub dt: Option<f64>,
}

pub const DEFAULT_THETA: f64 = 1e4;
pub const DEFAULT_OUTPUT: &str = "out";

const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["model", "domain", "time", "solver", "initial", "output", "study"]),
    (
        "model",
        &["kind", "epsilon_sq", "s", "theta", "sigma", "delta", "dealias"],
    ),
    ("domain", &["type", "length", "nodes", "a", "b", "degree"]),
    (
        "time",
        &[
            "final_time",
            "order",
            "dt",
            "bootstrap_substeps",
            "snapshots",
            "adaptive",
        ],
    ),
    ("time.adaptive", &["dt_min", "dt_max", "gamma", "slope"]),
    (
        "solver",
        &[
            "picard_tol",
            "max_picard",
            "newton_tol",
            "max_newton",
            "divergence_streak",
        ],
    ),
    (
        "initial",
        &[
            "type",
            "name",
            "amplitude",
            "mean",
            "centers",
            "angles",
            "block",
            "background",
        ],
    ),
    ("output", &["dir", "seed"]),
    (
        "study",
        &["ladder", "reference_dt", "reference_order", "reference_picard_tol"],
    ),
];

fn scalar_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let raw = Option::<Scalar>::deserialize(d)?;
    raw.map(|s| s.value().map_err(serde::de::Error::custom)).transpose()
}

fn scalar_vec_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    let raw = Option::<Vec<Scalar>>::deserialize(d)?;
    raw.map(|v| {
        v.into_iter()
            .map(|s| s.value().map_err(serde::de::Error::custom))
            .collect()
    })
    .transpose()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn value(self) -> Result<f64, String> {
        match self {
            Scalar::Int(i) => Ok(i as f64),
            Scalar::Float(f) => Ok(f),
            Scalar::Text(t) => {
                parse_scalar(&t).ok_or_else(|| format!("cannot read `{t}` as a number or multiple of pi"))
            }
        }
    }
}

/// `"1.5"`, `"pi"`, `"2pi"`, `"-pi/4"`, `"0.5 pi"`.
pub fn parse_scalar(text: &str) -> Option<f64> {
    let t: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let Some(at) = t.find("pi") else {
        return t.parse().ok();
    };
    let coef = match t[..at].trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let rest = &t[at + 2..];
    let div = match rest {
        "" => 1.0,
        r => r.strip_prefix('/')?.parse::<f64>().ok()?,
    };
    Some(coef * std::f64::consts::PI / div)
}

/// 1-based line of `key` inside `[section]` (or of the header itself when
/// `key` is empty).
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if let Some(h) = l.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = h.trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some(rest) = l.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn suggest(word: &str, options: &[&str]) -> Option<String> {
    options
        .iter()
        .map(|o| (strsim::levenshtein(word, o), *o))
        .filter(|(d, o)| *d <= 2.max(o.len() / 3))
        .min()
        .map(|(_, o)| o.to_string())
}

fn unknown_keys(text: &str, table: &toml::Table, section: &str, out: &mut Vec<String>) {
    let known = SCHEMA
        .iter()
        .find(|(s, _)| *s == section)
        .map(|(_, k)| *k)
        .unwrap_or(&[]);
    for (key, value) in table {
        if !known.contains(&key.as_str()) {
            let place = if section.is_empty() {
                "top level".to_string()
            } else {
                format!("[{section}]")
            };
            let line = locate(text, section, key)
                .or_else(|| locate(text, &join(section, key), ""))
                .map(|l| format!(" (line {l})"))
                .unwrap_or_default();
            let hint = suggest(key, known)
                .map(|s| format!(", did you mean `{s}`?"))
                .unwrap_or_default();
            out.push(format!("unknown key `{key}` at {place}{line}{hint}"));
            continue;
        }
        if let toml::Value::Table(inner) = value {
            unknown_keys(text, inner, &join(section, key), out);
        }
    }
}

fn join(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Parses and validates.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg = Self::parse_unvalidated(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Key and type checks only.
    pub fn parse_unvalidated(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut unknown = Vec::new();
        unknown_keys(text, &table, "", &mut unknown);
        if !unknown.is_empty() {
            return Err(ConfigError::Invalid(unknown));
        }
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.output.seed = Some(seed);
        }
        if let Some(out) = &o.out {
            self.output.dir = Some(out.clone());
        }
        if let Some(order) = o.order {
            self.time.order = order;
        }
        if let Some(theta) = o.theta {
            self.model.theta = Some(theta);
        }
        if let Some(dt) = o.dt {
            self.time.dt = Some(dt);
            self.time.adaptive = None;
        }
    }

    pub fn kind(&self) -> Option<ModelKind> {
        self.model.kind.parse().ok()
    }

    pub fn seed(&self) -> u64 {
        self.output.seed.unwrap_or(0)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
    }

    /// Every violated constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let kind = match self.kind() {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                let hint = suggest(&self.model.kind, &names)
                    .map(|s| format!(", did you mean `{s}`?"))
                    .unwrap_or_default();
                out.push(format!(
                    "model.kind `{}` is not one of {}{hint}",
                    self.model.kind,
                    names.join(", ")
                ));
                None
            }
        };
        if let Some(kind) = kind {
            if kind != ModelKind::Pfc && self.model.epsilon_sq.is_none() {
                out.push(format!("model.epsilon_sq is required for {kind}"));
            }
            let domain = self.domain_spec_checked(&mut out);
            if let Some(domain) = domain {
                out.extend(self.model_spec_with(kind, domain).violations());
            }
        } else {
            self.domain_spec_checked(&mut out);
        }

        let t = &self.time;
        if !(t.final_time.is_finite() && t.final_time >= 0.0) {
            out.push(format!("time.final_time must be >= 0, got {}", t.final_time));
        }
        if !(1..=3).contains(&t.order) {
            out.push(format!("time.order must be 1, 2 or 3, got {}", t.order));
        }
        match (&t.dt, &t.adaptive) {
            (Some(_), Some(_)) => out.push("give either time.dt or [time.adaptive], not both".into()),
            (None, None) => out.push("one of time.dt or [time.adaptive] is required".into()),
            (Some(dt), None) if !(dt.is_finite() && *dt > 0.0) => {
                out.push(format!("time.dt must be positive, got {dt}"))
            }
            (None, Some(a)) => {
                if let Err(e) = AdaptiveParams::new(a.dt_min, a.dt_max, a.gamma) {
                    out.push(format!("time.adaptive: {}", e.0));
                }
                if let Some(s) = &a.slope {
                    if !["backward-difference", "dissipation"].contains(&s.as_str()) {
                        out.push(format!(
                            "time.adaptive.slope must be backward-difference or dissipation, got `{s}`"
                        ));
                    }
                }
            }
            _ => {}
        }
        if t.snapshots.windows(2).any(|w| w[1] < w[0]) {
            out.push("time.snapshots must be ascending".into());
        }
        if t.snapshots.iter().any(|&s| !(0.0..=t.final_time).contains(&s)) {
            out.push("time.snapshots must lie in [0, final_time]".into());
        }

        let s = &self.solver;
        for (name, v) in [("picard_tol", s.picard_tol), ("newton_tol", s.newton_tol)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    out.push(format!("solver.{name} must be positive, got {v}"));
                }
            }
        }
        for (name, v) in [
            ("max_picard", s.max_picard),
            ("max_newton", s.max_newton),
            ("divergence_streak", s.divergence_streak),
        ] {
            if v == Some(0) {
                out.push(format!("solver.{name} must be at least 1"));
            }
        }

        if let Err(e) = self.initial_condition() {
            out.extend(e);
        }

        if let Some(study) = &self.study {
            if study.ladder.len() < 3 {
                out.push(format!(
                    "study.ladder needs at least 3 step sizes, got {}",
                    study.ladder.len()
                ));
            }
            if study.ladder.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
                out.push("study.ladder entries must be positive".into());
            }
            if !(study.reference_dt.is_finite() && study.reference_dt > 0.0) {
                out.push(format!(
                    "study.reference_dt must be positive, got {}",
                    study.reference_dt
                ));
            }
            if let Some(o) = study.reference_order {
                if !(1..=3).contains(&o) {
                    out.push(format!("study.reference_order must be 1, 2 or 3, got {o}"));
                }
            }
            if let Some(tol) = study.reference_picard_tol {
                if !(tol.is_finite() && tol > 0.0) {
                    out.push(format!("study.reference_picard_tol must be positive, got {tol}"));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    fn domain_spec_checked(&self, out: &mut Vec<String>) -> Option<DomainSpec> {
        let d = &self.domain;
        match d.kind.as_str() {
            "periodic" => {
                let (Some(length), Some(nodes)) = (d.length, d.nodes) else {
                    out.push("periodic domain needs `length` and `nodes`".into());
                    return None;
                };
                if d.a.is_some() || d.b.is_some() || d.degree.is_some() {
                    out.push("periodic domain does not take `a`, `b` or `degree`".into());
                }
                if !(length.is_finite() && length > 0.0) {
                    out.push(format!("domain.length must be positive, got {length}"));
                }
                if nodes < 8 || nodes % 2 != 0 {
                    out.push(format!("domain.nodes must be even and >= 8, got {nodes}"));
                }
                Some(DomainSpec::Periodic { length, nodes })
            }
            "neumann" => {
                let (Some(a), Some(b), Some(degree)) = (d.a, d.b, d.degree) else {
                    out.push("neumann domain needs `a`, `b` and `degree`".into());
                    return None;
                };
                if d.length.is_some() || d.nodes.is_some() {
                    out.push("neumann domain does not take `length` or `nodes`".into());
                }
                if !(a.is_finite() && b.is_finite() && a < b) {
                    out.push(format!("domain interval [{a}, {b}] is empty or not finite"));
                }
                if degree < 4 {
                    out.push(format!("domain.degree must be at least 4, got {degree}"));
                }
                Some(DomainSpec::Neumann { a, b, degree })
            }
            other => {
                out.push(format!("domain.type must be periodic or neumann, got `{other}`"));
                None
            }
        }
    }

    pub fn domain_spec(&self) -> Result<DomainSpec, ConfigError> {
        let mut out = Vec::new();
        match self.domain_spec_checked(&mut out) {
            Some(d) if out.is_empty() => Ok(d),
            _ => Err(ConfigError::Invalid(out)),
        }
    }

    fn model_spec_with(&self, kind: ModelKind, domain: DomainSpec) -> ModelSpec {
        let m = &self.model;
        let base = match kind {
            ModelKind::Pfc => ModelSpec::pfc(m.sigma.unwrap_or(1.0), m.delta.unwrap_or(0.025), domain),
            _ => ModelSpec::new(kind, m.epsilon_sq.unwrap_or(f64::NAN), domain),
        };
        let s = m.s.unwrap_or_else(|| kind.default_s(base.delta));
        base.with_s(s)
            .with_theta(m.theta.unwrap_or(DEFAULT_THETA))
            .with_dealias(m.dealias.unwrap_or(true))
    }

    pub fn model_spec(&self) -> Result<ModelSpec, ConfigError> {
        let kind = self
            .kind()
            .ok_or_else(|| ConfigError::Invalid(vec![format!("unknown model kind `{}`", self.model.kind)]))?;
        Ok(self.model_spec_with(kind, self.domain_spec()?))
    }

    pub fn controls(&self) -> SolverControls {
        let d = SolverControls::default();
        let s = &self.solver;
        SolverControls {
            picard_tol: s.picard_tol.unwrap_or(d.picard_tol),
            max_picard: s.max_picard.unwrap_or(d.max_picard),
            newton_tol: s.newton_tol.unwrap_or(d.newton_tol),
            max_newton: s.max_newton.unwrap_or(d.max_newton),
            divergence_streak: s.divergence_streak.unwrap_or(d.divergence_streak),
            ..d
        }
    }

    pub fn schedule(&self) -> Schedule {
        let t = &self.time;
        let stepping = match (&t.adaptive, t.dt) {
            (Some(a), _) => {
                let slope = match a.slope.as_deref() {
                    Some("dissipation") => EnergySlope::Dissipation,
                    _ => EnergySlope::BackwardDifference,
                };
                TimeStepping::Adaptive(AdaptiveParams {
                    dt_min: a.dt_min,
                    dt_max: a.dt_max,
                    gamma: a.gamma,
                    slope,
                })
            }
            (None, dt) => TimeStepping::Fixed {
                dt: dt.unwrap_or(f64::NAN),
            },
        };
        Schedule {
            final_time: t.final_time,
            order: t.order.saturating_sub(1),
            stepping,
            snapshot_times: t.snapshots.clone(),
            bootstrap_substeps: t.bootstrap_substeps.unwrap_or(0),
        }
    }

    pub fn study_plan(&self) -> Result<StudyPlan, ConfigError> {
        let study = self
            .study
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid(vec!["a [study] section is required for converge".into()]))?;
        Ok(StudyPlan {
            base: self.schedule(),
            ladder: study.ladder.clone(),
            reference_dt: study.reference_dt,
            reference_order: study.reference_order.unwrap_or(3).saturating_sub(1),
            reference_picard_tol: study.reference_picard_tol,
        })
    }

    /// The initial condition descriptor, or every problem with it.
    pub fn initial_condition(&self) -> Result<InitialCondition, Vec<String>> {
        let i = &self.initial;
        let mut errs = Vec::new();
        let ic = match i.kind.as_str() {
            "profile" => match i.name.as_deref() {
                None => {
                    errs.push("initial.name is required for a profile".into());
                    None
                }
                Some(name) => match name.parse::<Profile>() {
                    Ok(p) => Some(InitialCondition::Profile(p)),
                    Err(_) => {
                        let names: Vec<&str> = Profile::ALL.iter().map(|p| p.name()).collect();
                        let hint = suggest(name, &names)
                            .map(|s| format!(", did you mean `{s}`?"))
                            .unwrap_or_default();
                        errs.push(format!("unknown profile `{name}`; known: {}{hint}", names.join(", ")));
                        None
                    }
                },
            },
            "random" => {
                let amplitude = i.amplitude.unwrap_or(f64::NAN);
                if !(amplitude.is_finite() && amplitude > 0.0) {
                    errs.push(format!(
                        "initial.amplitude must be positive, got {}",
                        i.amplitude.map_or("nothing".into(), |a| a.to_string())
                    ));
                }
                let mean = i.mean.unwrap_or(0.0);
                if !mean.is_finite() {
                    errs.push("initial.mean must be finite".into());
                }
                Some(InitialCondition::Random { amplitude, mean })
            }
            "crystallites" => {
                let centers = i.centers.clone().unwrap_or_default();
                let angles = i.angles.clone().unwrap_or_default();
                if centers.is_empty() {
                    errs.push("initial.centers must list at least one block center".into());
                }
                if centers.len() != angles.len() {
                    errs.push(format!(
                        "initial.angles has {} entries for {} centers",
                        angles.len(),
                        centers.len()
                    ));
                }
                let c = Crystallites {
                    centers,
                    angles,
                    block: i.block.unwrap_or(40.0),
                    background: i.background.unwrap_or(0.285),
                };
                match self.domain.length {
                    Some(length) if self.domain.kind == "periodic" => errs.extend(c.violations(length)),
                    _ => errs.push("crystallites need a periodic domain".into()),
                }
                Some(InitialCondition::Crystallites(c))
            }
            other => {
                errs.push(format!(
                    "initial.type must be profile, random or crystallites, got `{other}`"
                ));
                None
            }
        };
        match ic {
            Some(ic) if errs.is_empty() => Ok(ic),
            _ => Err(errs),
        }
    }
}
