//! INI-style run configuration and its merge with command-line flags.
//!
//! ```ini
//! [system]
//! name = oscillator1        # or any name together with `f`
//! f = "(k*v^2 - a^2)*x/(1 + k*x^2)"
//!
//! [params]
//! k = 1
//! a = 1
//!
//! [domain]
//! x = [-2, 2]
//! v = [-0.99, 0.99]
//!
//! [task]
//! mu = "1/(1 + k*x^2)"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use ini::{Ini, ParseOption};
use serde::Serialize;

use crate::catalog;
use crate::expr::{Bindings, Domain, Interval, DEFAULT_SEED};
use crate::geometry::Sode;

pub const SEED_ENV: &str = "MFORGE_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error("unknown section [{0}]; expected system, params, domain or task")]
    Section(String),
    #[error("`{0}` is not of the form NAME=VALUE")]
    Assignment(String),
    #[error("parameter `{name}`: `{value}` is not a number")]
    Number { name: String, value: String },
    #[error("interval for `{var}`: {message}")]
    Interval { var: String, message: String },
    #[error("seed `{0}` is not an unsigned integer")]
    Seed(String),
    #[error("no system given; use --system NAME (oscillator1, oscillator2, harmonic) or --f EXPR")]
    NoSystem,
    #[error("custom system needs a domain interval for `{0}`")]
    MissingInterval(&'static str),
    #[error("catalog system `{system}` has no parameter `{name}`")]
    UnknownParam { system: String, name: String },
    #[error("missing task value `{0}`")]
    Missing(String),
    #[error("task value `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{0}")]
    System(String),
}

/// Raw, unvalidated values from a config file or flags. Later layers win.
#[derive(Clone, Debug, Default)]
pub struct Layer {
    pub name: Option<String>,
    pub f: Option<String>,
    pub params: BTreeMap<String, String>,
    pub domain: BTreeMap<String, String>,
    pub task: BTreeMap<String, String>,
    pub seed: Option<String>,
}

impl Layer {
    pub fn from_file(path: &Path) -> Result<Layer, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        Layer::parse(&text).map_err(|e| match e {
            ConfigError::Syntax { message, .. } => ConfigError::Syntax { path: shown, message },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Layer, ConfigError> {
        let opt = ParseOption { enabled_quote: true, enabled_escape: false, ..ParseOption::default() };
        let ini = Ini::load_from_str_opt(text, opt)
            .map_err(|e| ConfigError::Syntax { path: "<config>".into(), message: e.to_string() })?;
        let mut layer = Layer::default();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let (key, value) = (key.trim().to_string(), value.trim().to_string());
                match section.map(str::trim) {
                    Some("system") if key == "name" => layer.name = Some(value),
                    Some("system") if key == "f" => layer.f = Some(value),
                    Some("system") => return Err(ConfigError::Assignment(format!("[system] {key}"))),
                    Some("params") => {
                        layer.params.insert(key, value);
                    }
                    Some("domain") => {
                        layer.domain.insert(key, value);
                    }
                    Some("task") if key == "seed" => layer.seed = Some(value),
                    Some("task") => {
                        layer.task.insert(key, value);
                    }
                    Some(other) => return Err(ConfigError::Section(other.to_string())),
                    None => return Err(ConfigError::Section(String::new())),
                }
            }
        }
        Ok(layer)
    }

    pub fn merge(mut self, over: Layer) -> Layer {
        self.name = over.name.or(self.name);
        self.f = over.f.or(self.f);
        self.params.extend(over.params);
        self.domain.extend(over.domain);
        self.task.extend(over.task);
        self.seed = over.seed.or(self.seed);
        self
    }
}

/// Splits `NAME=VALUE`.
pub fn assignment(s: &str) -> Result<(String, String), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Assignment(s.to_string())),
    }
}

/// Parses `[lo, hi]`.
pub fn interval(var: &str, s: &str) -> Result<Interval, ConfigError> {
    let bad = |message: String| ConfigError::Interval { var: var.to_string(), message };
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| bad(format!("`{s}` is not of the form [lo, hi]")))?;
    let (lo, hi) = inner.split_once(',').ok_or_else(|| bad(format!("`{s}` needs two bounds")))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(format!("`{}` is not a number", t.trim())));
    Interval::new(num(lo)?, num(hi)?).map_err(|e| bad(e.to_string()))
}

fn number(name: &str, s: &str) -> Result<f64, ConfigError> {
    s.parse().map_err(|_| ConfigError::Number { name: name.to_string(), value: s.to_string() })
}

/// A fully resolved run: the system, the task values and the seed.
#[derive(Clone, Debug)]
pub struct Config {
    pub system: Sode,
    /// Set when the system came from the built-in catalog.
    pub catalog: Option<String>,
    pub task: BTreeMap<String, String>,
    pub seed: u64,
}

/// Echo of the resolved system for reports.
#[derive(Clone, Debug, Serialize)]
pub struct SystemEcho {
    pub name: String,
    #[serde(rename = "F")]
    pub f: String,
    pub params: Bindings,
    pub domain: BTreeMap<String, [f64; 2]>,
}

impl Config {
    /// Resolves a layer; `env_seed` is the value of `MFORGE_SEED`, if set.
    /// Precedence for the seed is flag or file, then environment, then the default.
    pub fn resolve(layer: Layer, env_seed: Option<String>) -> Result<Config, ConfigError> {
        let seed = match layer.seed.or(env_seed) {
            Some(s) => parse_seed(&s)?,
            None => DEFAULT_SEED,
        };
        let mut params = Bindings::new();
        for (k, v) in &layer.params {
            params.insert(k.clone(), number(k, v)?);
        }
        let mut overrides = Vec::new();
        for (var, text) in &layer.domain {
            overrides.push((var.as_str(), interval(var, text)?));
        }
        let (mut system, catalog) = match (&layer.f, &layer.name) {
            (Some(f), name) => {
                let mut domain = Domain::new();
                for (var, iv) in &overrides {
                    domain.set(var, *iv);
                }
                for var in ["x", "v"] {
                    if domain.get(var).is_none() {
                        return Err(ConfigError::MissingInterval(var));
                    }
                }
                let name = name.as_deref().unwrap_or("custom");
                let s = Sode::parse(name, f, params, domain).map_err(|e| ConfigError::System(e.to_string()))?;
                (s, None)
            }
            (None, Some(name)) => {
                if let Some(p) = params.keys().find(|p| !catalog_params(name).contains(&p.as_str())) {
                    return Err(ConfigError::UnknownParam { system: name.clone(), name: p.clone() });
                }
                let k = params.get("k").copied().unwrap_or(1.0);
                let a = params.get("a").copied().unwrap_or(1.0);
                let s = catalog::system(name, k, a).map_err(|e| ConfigError::System(e.to_string()))?;
                (s, Some(name.clone()))
            }
            (None, None) => return Err(ConfigError::NoSystem),
        };
        if catalog.is_some() {
            for (var, iv) in overrides {
                system.domain.set(var, iv);
            }
        }
        Ok(Config { system, catalog, task: layer.task, seed })
    }

    pub fn echo(&self) -> SystemEcho {
        SystemEcho {
            name: self.system.name.clone(),
            f: self.system.f.to_string(),
            params: self.system.params.clone(),
            domain: self.system.domain.iter().map(|(v, iv)| (v.to_string(), [iv.lo, iv.hi])).collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.task.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn number(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            Some(s) => s.parse().map_err(|_| ConfigError::Invalid { key: key.into(), message: format!("`{s}` is not a number") }),
            None => Ok(default),
        }
    }
}

fn catalog_params(name: &str) -> &'static [&'static str] {
    match name {
        "harmonic" => &["a"],
        _ => &["k", "a"],
    }
}

fn parse_seed(s: &str) -> Result<u64, ConfigError> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| ConfigError::Seed(s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = r#"
# oscillator with a restricted domain
[system]
name = oscillator1

[params]
k = -0.25   # inline comment
a = 1

[domain]
x = [-1.5, 1.5]

[task]
mu = "1/(1 + k*x^2)"
seed = 0x2A
"#;

    #[test]
    fn parses_sections_quotes_and_comments() {
        let layer = Layer::parse(FILE).unwrap();
        assert_eq!(layer.name.as_deref(), Some("oscillator1"));
        assert_eq!(layer.params["k"], "-0.25");
        assert_eq!(layer.task["mu"], "1/(1 + k*x^2)");
        let cfg = Config::resolve(layer, None).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.system.params["k"], -0.25);
        let x = cfg.system.domain.get("x").unwrap();
        assert_eq!((x.lo, x.hi), (-1.5, 1.5));
    }

    #[test]
    fn flags_override_file_and_env_only_beats_default() {
        let file = Layer::parse(FILE).unwrap();
        let flags = Layer { params: [("k".into(), "2".into())].into(), seed: Some("7".into()), ..Layer::default() };
        let cfg = Config::resolve(file.merge(flags), Some("9".into())).unwrap();
        assert_eq!((cfg.system.params["k"], cfg.seed), (2.0, 7));
        let bare = Layer { name: Some("harmonic".into()), ..Layer::default() };
        assert_eq!(Config::resolve(bare.clone(), Some("9".into())).unwrap().seed, 9);
        assert_eq!(Config::resolve(bare, None).unwrap().seed, DEFAULT_SEED);
    }

    #[test]
    fn custom_system_needs_x_and_v_intervals() {
        let mut layer = Layer { f: Some("-x".into()), ..Layer::default() };
        layer.domain.insert("x".into(), "[-1, 1]".into());
        assert!(matches!(Config::resolve(layer.clone(), None), Err(ConfigError::MissingInterval("v"))));
        layer.domain.insert("v".into(), "[-1, 1]".into());
        assert_eq!(Config::resolve(layer, None).unwrap().system.name, "custom");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(interval("x", "-1, 1").is_err());
        assert!(interval("x", "[1, -1]").is_err());
        assert!(interval("x", "[a, 1]").is_err());
        assert!(matches!(Layer::parse("[solver]\nx = 1"), Err(ConfigError::Section(_))));
        assert!(assignment("k").is_err());
        let stray = Layer { name: Some("harmonic".into()), params: [("k".into(), "1".into())].into(), ..Layer::default() };
        assert!(matches!(Config::resolve(stray, None), Err(ConfigError::UnknownParam { .. })));
        let bad_seed = Layer { name: Some("harmonic".into()), ..Layer::default() };
        assert!(matches!(Config::resolve(bad_seed, Some("x".into())), Err(ConfigError::Seed(_))));
    }
}
