//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment; lists are comma
//! separated. Unknown keys are rejected with the closest known key as a
//! suggestion.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use bqc_core::blend::{BlendFunction, BlendShape};
use bqc_core::energy::ModelKind;
use bqc_core::experiments::LoadSpec;
use bqc_core::lattice::LatticeConfig;
use bqc_core::potential::Potential;
use bqc_core::solve::SolveOptions;
use bqc_core::stability::DEFAULT_CRITICAL_TOL;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    Invalid { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ConfigError::Invalid { key, message } => write!(f, "key '{key}': {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Energy,
    Equilibrate,
    GhostForce,
    CriticalStrain,
    ModelingAudit,
    Convergence,
    PatchTest,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Energy,
        Subcommand::Equilibrate,
        Subcommand::GhostForce,
        Subcommand::CriticalStrain,
        Subcommand::ModelingAudit,
        Subcommand::Convergence,
        Subcommand::PatchTest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Energy => "energy",
            Subcommand::Equilibrate => "equilibrate",
            Subcommand::GhostForce => "ghost-force",
            Subcommand::CriticalStrain => "critical-strain",
            Subcommand::ModelingAudit => "modeling-audit",
            Subcommand::Convergence => "convergence",
            Subcommand::PatchTest => "patch-test",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    fn needs_seed(&self) -> bool {
        matches!(self, Subcommand::ModelingAudit)
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every accepted key with its documentation line.
pub const KEYS: &[(&str, &str)] = &[
    ("subcommand", "operation to run; must agree with the command line if given"),
    ("potential", "lj or morse"),
    ("potential_params", "lj: depth, sigma; morse: stiffness, depth, sigma"),
    ("model", "atomistic, cauchy_born, qce, qnl, bqce or bqnl"),
    ("n", "number of atoms per period"),
    ("f", "macroscopic strain F"),
    ("blend_shape", "characteristic, linear, cubic, quintic or custom"),
    ("blend_coeffs", "monomial coefficients of a custom shape"),
    ("k", "transition width in sites"),
    ("atomistic_width", "atomistic plateau width in sites"),
    ("center", "plateau centre site (default n/2)"),
    ("p", "norm exponent, a number ≥ 1 or inf"),
    ("p_list", "exponents for modeling-audit"),
    ("n_list", "periods for sweeps (default n)"),
    ("k_list", "transition widths for sweeps (default k)"),
    ("shapes", "blend shapes for sweeps (default blend_shape)"),
    ("models", "models for modeling-audit (default bqce, bqnl)"),
    ("strain_list", "strains for patch-test (default 0.9, 1.0, 1.1)"),
    ("load_a", "amplitude of the sine part of the dead load"),
    ("load_b", "amplitude of the bump part of the dead load"),
    ("load_w", "width of the load bump"),
    ("state_amplitude", "strain amplitude of the random state for energy"),
    ("state_modes", "Fourier modes of random states"),
    ("samples", "number of random states for modeling-audit"),
    ("seed", "seed for every randomized experiment"),
    ("newton_tol", "Newton residual tolerance"),
    ("max_iter", "Newton iteration cap"),
    ("continuation_steps", "load ramp steps"),
    ("max_halvings", "backtracking halvings per step"),
    ("critical_tol", "bisection tolerance for critical strains"),
    ("output", "CSV output path (default <subcommand>.csv)"),
    ("emit_plot_data", "also write two-column .dat files"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct BlendSpec {
    pub shape: BlendShape,
    pub k: usize,
    pub atomistic_width: usize,
    /// `None` centres the plateau at `n/2`.
    pub center: Option<usize>,
}

impl BlendSpec {
    pub fn center_for(&self, n: usize) -> usize {
        self.center.unwrap_or(n / 2)
    }

    pub fn build(&self, n: usize, shape: &BlendShape, k: usize) -> bqc_core::Result<BlendFunction> {
        BlendFunction::build(LatticeConfig::new(n)?, shape.clone(), self.center_for(n), self.atomistic_width, k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub potential: Potential,
    pub model: ModelKind,
    pub n: usize,
    pub strain_f: f64,
    pub blend: BlendSpec,
    pub p: f64,
    pub p_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub shapes: Vec<BlendShape>,
    pub models: Vec<ModelKind>,
    pub strain_list: Vec<f64>,
    pub load: LoadSpec,
    pub state_amplitude: f64,
    pub state_modes: usize,
    pub samples: usize,
    pub seed: Option<u64>,
    pub solve: SolveOptions,
    pub critical_tol: f64,
    pub output: PathBuf,
    pub emit_plot_data: bool,
}

/// Raw `key → (line, value)` pairs; later entries replace earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

fn suggestion(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|(k, _)| (*k, strsim::levenshtein(key, k)))
        .filter(|(k, d)| *d <= 3.max(k.len() / 3))
        .min_by_key(|(_, d)| *d)
        .map(|(k, _)| k)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: idx + 1,
                message: format!("expected 'key = value', found '{content}'"),
            })?;
            raw.insert(key.trim(), value.trim(), idx + 1)?;
        }
        Ok(raw)
    }

    /// Applies a `key=value` override; line 0 marks command-line input.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: 0,
            message: format!("override '{assignment}' is not of the form key=value"),
        })?;
        self.insert(key.trim(), value.trim(), 0)
    }

    fn insert(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: "empty key".into(),
            });
        }
        if !KEYS.iter().any(|(k, _)| *k == key) {
            let hint = suggestion(key).map_or(String::new(), |s| format!("; did you mean '{s}'?"));
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key '{key}'{hint}"),
            });
        }
        self.entries.insert(key.to_string(), (line, value.to_string()));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn typed<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => parse(v).map(Some).ok_or_else(|| {
                let at = if *line == 0 { "command line".to_string() } else { format!("line {line}") };
                invalid(key, format!("expected {what}, found '{v}' ({at})"))
            }),
        }
    }

    fn list<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<Vec<T>>, ConfigError> {
        self.typed(
            key,
            |v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(&parse)
                    .collect::<Option<Vec<T>>>()
                    .filter(|l| !l.is_empty())
            },
            &format!("a comma-separated list of {what}"),
        )
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse().ok().filter(|v: &f64| v.is_finite())
}

fn parse_usize(s: &str) -> Option<usize> {
    s.parse().ok()
}

fn parse_p(s: &str) -> Option<f64> {
    if s.eq_ignore_ascii_case("inf") {
        Some(f64::INFINITY)
    } else {
        parse_f64(s).filter(|p| *p >= 1.0)
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn shape_named(name: &str, coeffs: &[f64], key: &str) -> Result<BlendShape, ConfigError> {
    let coeffs: &[f64] = if name.eq_ignore_ascii_case("custom") { coeffs } else { &[] };
    BlendShape::from_name(name, coeffs).map_err(|e| invalid(key, e.to_string()))
}

fn model_named(name: &str, key: &str) -> Result<ModelKind, ConfigError> {
    ModelKind::from_name(name).map_err(|e| invalid(key, e.to_string()))
}

/// Parses and validates `text` for `subcommand` with the given overrides.
pub fn load_config(text: &str, subcommand: Option<Subcommand>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut raw = RawConfig::parse(text)?;
    for o in overrides {
        raw.set(o)?;
    }
    resolve(&raw, subcommand)
}

/// Text-only entry point; the subcommand must come from the `subcommand` key.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    load_config(text, None, &[])
}

pub fn resolve(raw: &RawConfig, subcommand: Option<Subcommand>) -> Result<RunConfig, ConfigError> {
    let from_file = match raw.get("subcommand") {
        Some(name) => Some(Subcommand::from_name(name).ok_or_else(|| {
            let names: Vec<&str> = Subcommand::ALL.iter().map(|s| s.name()).collect();
            invalid("subcommand", format!("unknown subcommand '{name}' (expected one of {})", names.join(", ")))
        })?),
        None => None,
    };
    let subcommand = match (subcommand, from_file) {
        (Some(a), Some(b)) if a != b => {
            return Err(invalid("subcommand", format!("config says '{b}' but '{a}' was requested")))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(invalid("subcommand", "no subcommand given")),
    };

    let params = raw.list("potential_params", parse_f64, "numbers")?.unwrap_or_default();
    let potential = Potential::from_name(raw.get("potential").unwrap_or("lj"), &params)
        .map_err(|e| invalid("potential", e.to_string()))?;
    let model = model_named(raw.get("model").unwrap_or("bqce"), "model")?;
    let n = raw.typed("n", parse_usize, "a positive integer")?.unwrap_or(256);
    LatticeConfig::new(n).map_err(|e| invalid("n", e.to_string()))?;
    let strain_f = raw
        .typed("f", |s| parse_f64(s).filter(|v| *v > 0.0), "a positive number")?
        .unwrap_or(1.0);

    let coeffs = raw.list("blend_coeffs", parse_f64, "numbers")?.unwrap_or_default();
    let shape = shape_named(raw.get("blend_shape").unwrap_or("cubic"), &coeffs, "blend_shape")?;
    let k = raw.typed("k", parse_usize, "a positive integer")?.unwrap_or(8);
    let atomistic_width = raw.typed("atomistic_width", parse_usize, "an integer")?.unwrap_or(33);
    let center = raw.typed("center", parse_usize, "a site index")?;
    let blend = BlendSpec {
        shape: shape.clone(),
        k,
        atomistic_width,
        center,
    };

    let p = raw.typed("p", parse_p, "a number ≥ 1 or inf")?.unwrap_or(2.0);
    let p_list = raw
        .list("p_list", parse_p, "numbers ≥ 1 or inf")?
        .unwrap_or_else(|| vec![1.0, 2.0, f64::INFINITY]);
    let n_list = raw.list("n_list", parse_usize, "integers")?.unwrap_or_else(|| vec![n]);
    let k_list = raw.list("k_list", parse_usize, "integers")?.unwrap_or_else(|| vec![k]);
    let shapes = match raw.get("shapes") {
        Some(v) => v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| shape_named(s, &coeffs, "shapes"))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![shape],
    };
    if shapes.is_empty() {
        return Err(invalid("shapes", "empty list"));
    }
    let models = match raw.get("models") {
        Some(v) => v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| model_named(s, "models"))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![ModelKind::Bqce, ModelKind::Bqnl],
    };
    let strain_list = raw
        .list("strain_list", |s| parse_f64(s).filter(|v| *v > 0.0), "positive numbers")?
        .unwrap_or_else(|| vec![0.9, 1.0, 1.1]);

    let defaults = LoadSpec::default();
    let load = LoadSpec {
        sin_amplitude: raw.typed("load_a", parse_f64, "a number")?.unwrap_or(defaults.sin_amplitude),
        bump_amplitude: raw.typed("load_b", parse_f64, "a number")?.unwrap_or(defaults.bump_amplitude),
        bump_width: raw
            .typed("load_w", |s| parse_f64(s).filter(|v| *v > 0.0), "a positive number")?
            .unwrap_or(defaults.bump_width),
    };

    let solve_defaults = SolveOptions::default();
    let solve = SolveOptions {
        newton_tol: raw
            .typed("newton_tol", |s| parse_f64(s).filter(|v| *v > 0.0), "a positive number")?
            .unwrap_or(solve_defaults.newton_tol),
        max_iter: raw.typed("max_iter", parse_usize, "an integer")?.unwrap_or(solve_defaults.max_iter),
        continuation_steps: raw
            .typed("continuation_steps", |s| parse_usize(s).filter(|v| *v > 0), "a positive integer")?
            .unwrap_or(solve_defaults.continuation_steps),
        max_halvings: raw
            .typed("max_halvings", parse_usize, "an integer")?
            .unwrap_or(solve_defaults.max_halvings),
        ..solve_defaults
    };

    let config = RunConfig {
        subcommand,
        potential,
        model,
        n,
        strain_f,
        blend,
        p,
        p_list,
        n_list,
        k_list,
        shapes,
        models,
        strain_list,
        load,
        state_amplitude: raw
            .typed("state_amplitude", |s| parse_f64(s).filter(|v| *v >= 0.0), "a nonnegative number")?
            .unwrap_or(0.0),
        state_modes: raw
            .typed("state_modes", |s| parse_usize(s).filter(|v| *v > 0), "a positive integer")?
            .unwrap_or(4),
        samples: raw.typed("samples", parse_usize, "an integer")?.unwrap_or(100),
        seed: raw.typed("seed", |s| s.parse().ok(), "an unsigned integer")?,
        solve,
        critical_tol: raw
            .typed("critical_tol", |s| parse_f64(s).filter(|v| *v > 0.0), "a positive number")?
            .unwrap_or(DEFAULT_CRITICAL_TOL),
        output: raw
            .get("output")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", subcommand.name()))),
        emit_plot_data: raw.typed("emit_plot_data", parse_bool, "true or false")?.unwrap_or(false),
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.subcommand.needs_seed() && self.seed.is_none() {
            return Err(invalid("seed", format!("'{}' draws random states and needs a seed", self.subcommand)));
        }
        if self.state_amplitude > 0.0 && self.seed.is_none() {
            return Err(invalid("seed", "a random state (state_amplitude > 0) needs a seed"));
        }
        if matches!(self.model, ModelKind::Custom) {
            return Err(invalid("model", "custom weights cannot be given in a config"));
        }
        for &n in &self.n_list {
            LatticeConfig::new(n).map_err(|e| invalid("n_list", e.to_string()))?;
        }
        let key = if self.k_list == [self.blend.k] { "k" } else { "k_list" };
        let mut ns = self.n_list.clone();
        if !ns.contains(&self.n) {
            ns.push(self.n);
        }
        for &n in &ns {
            for &k in &self.k_list {
                for shape in &self.shapes {
                    self.blend.build(n, shape, k).map_err(|e| invalid(key, e.to_string()))?;
                }
            }
        }
        Ok(())
    }
}
