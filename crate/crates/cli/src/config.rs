//! Run configuration: TOML with one table per block, unknown keys rejected.
//!
//! Environment variables `CRESTWAVE_<BLOCK>_<KEY>` override file values
//! before validation, e.g. `CRESTWAVE_PHYSICS_SIGMA=1e-3`. Values are parsed
//! as TOML literals, falling back to plain strings.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crestwave::initial_data::CrestSpec;
use crestwave::waterwave::StepperConfig;

pub const ENV_PREFIX: &str = "CRESTWAVE_";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridBlock,
    pub data: DataBlock,
    pub physics: PhysicsBlock,
    pub stepper: StepperConfig,
    pub output: OutputBlock,
    pub study: StudyBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub n_points: usize,
    pub length: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock {
            n_points: 256,
            length: 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    #[default]
    Flat,
    Crest,
    Smooth,
    RandomSmooth,
    Checkpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataBlock {
    pub kind: DataKind,
    pub nu: f64,
    pub delta: f64,
    /// `[re, im]` amplitude of the single-mode `Z̄_t`.
    pub velocity_amplitude: [f64; 2],
    pub velocity_mode: i64,
    /// Poisson mollification scale applied to the initial data (0 leaves it unchanged).
    pub epsilon: f64,
    /// `[k, re, im]` triples of `log Z_{,α'}` (smooth data).
    pub log_zp: Vec<[f64; 3]>,
    /// `[k, re, im]` triples of `Z̄_t` (smooth data).
    pub zt_bar: Vec<[f64; 3]>,
    /// Highest mode and coefficient scale for seeded random smooth data.
    pub random_modes: i64,
    pub random_amplitude: f64,
    pub checkpoint: Option<PathBuf>,
}

impl Default for DataBlock {
    fn default() -> Self {
        let crest = CrestSpec::default();
        DataBlock {
            kind: DataKind::Flat,
            nu: crest.nu,
            delta: crest.delta,
            velocity_amplitude: [crest.velocity_amplitude.re, crest.velocity_amplitude.im],
            velocity_mode: crest.velocity_mode,
            epsilon: 0.0,
            log_zp: Vec::new(),
            zt_bar: Vec::new(),
            random_modes: 4,
            random_amplitude: 0.1,
            checkpoint: None,
        }
    }
}

impl DataBlock {
    pub fn crest_spec(&self) -> CrestSpec {
        CrestSpec {
            nu: self.nu,
            delta: self.delta,
            velocity_amplitude: Complex64::new(
                self.velocity_amplitude[0],
                self.velocity_amplitude[1],
            ),
            velocity_mode: self.velocity_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsBlock {
    pub sigma: f64,
    pub t_final: f64,
    pub max_steps: usize,
}

impl Default for PhysicsBlock {
    fn default() -> Self {
        PhysicsBlock {
            sigma: 0.0,
            t_final: 0.1,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: PathBuf,
    /// Energy families for `simulate`; empty means `sigma`, plus `high` and
    /// `aux` when σ = 0.
    pub families: Vec<String>,
    pub record_interval: usize,
    /// Write a checkpoint every this many steps (0 disables).
    pub checkpoint_interval: usize,
    /// Fixed step size for `simulate`; 0 selects the adaptive stable step.
    pub fixed_dt: f64,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            directory: PathBuf::from("crestwave-out"),
            families: Vec::new(),
            record_interval: 10,
            checkpoint_interval: 0,
            fixed_dt: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyBlock {
    pub sigma_list: Vec<f64>,
    pub epsilon_list: Vec<f64>,
    /// When set, each ε gets `σ = sigma_ratio · ε^{3/2}` instead of `sigma_list`.
    pub sigma_ratio: Option<f64>,
    /// Concurrent runs in a sweep; 0 uses every available core.
    pub jobs: usize,
}

impl Default for StudyBlock {
    fn default() -> Self {
        StudyBlock {
            sigma_list: vec![1e-3, 1e-4, 1e-5],
            epsilon_list: vec![0.1],
            sigma_ratio: None,
            jobs: 0,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(String),
    Invalid(Vec<String>),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse(m) => write!(f, "{m}"),
            ConfigError::Invalid(v) => {
                writeln!(f, "{} configuration error(s):", v.len())?;
                for m in v {
                    writeln!(f, "  - {m}")?;
                }
                Ok(())
            }
        }
    }
}

/// Reads, overrides from `env`, and validates a config file.
pub fn parse_config(path: &Path, env: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    let mut cfg = parse_config_str(&text, env)?;
    // relative checkpoint paths are taken from the config's directory
    if let (Some(ck), Some(dir)) = (cfg.data.checkpoint.as_mut(), path.parent()) {
        if ck.is_relative() {
            *ck = dir.join(&*ck);
        }
    }
    let errs = validate(&cfg);
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}

/// Parses and applies overrides without the file-system checks of [`validate`].
pub fn parse_config_str(text: &str, env: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    apply_env(&mut doc, env)?;
    toml::Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
}

const BLOCKS: [&str; 6] = ["grid", "data", "physics", "stepper", "output", "study"];

fn apply_env(doc: &mut toml::Table, env: &[(String, String)]) -> Result<(), ConfigError> {
    for (name, raw) in env {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let rest = rest.to_ascii_lowercase();
        let Some(block) = BLOCKS.iter().find(|b| rest.starts_with(&format!("{b}_"))) else {
            return Err(ConfigError::Parse(format!(
                "environment override {name} names no config block"
            )));
        };
        let key = &rest[block.len() + 1..];
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.clone()));
        let table = doc
            .entry(block.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match table.as_table_mut() {
            Some(t) => {
                t.insert(key.to_string(), value);
            }
            None => return Err(ConfigError::Parse(format!("[{block}] is not a table"))),
        }
    }
    Ok(())
}

/// Every violated range or reference, not just the first.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut errs = Vec::new();
    let mut check = |ok: bool, msg: String| {
        if !ok {
            errs.push(msg);
        }
    };
    let g = &cfg.grid;
    check(
        g.n_points >= 8 && g.n_points % 2 == 0,
        format!(
            "grid.n_points must be even and at least 8, got {}",
            g.n_points
        ),
    );
    check(
        g.length.is_finite() && g.length > 0.0,
        format!("grid.length must be positive, got {}", g.length),
    );

    let d = &cfg.data;
    match d.kind {
        DataKind::Crest => {
            if let Err(e) = d.crest_spec().validate() {
                check(false, format!("data: {e}"));
            }
            check(
                d.epsilon >= 0.0 && d.epsilon.is_finite(),
                format!("data.epsilon must be non-negative, got {}", d.epsilon),
            );
        }
        DataKind::Smooth => {
            for [k, re, im] in d.log_zp.iter().chain(&d.zt_bar) {
                check(
                    k.fract() == 0.0 && *k < 0.0 && re.is_finite() && im.is_finite(),
                    format!("data smooth modes need a negative integer k and finite coefficients, got [{k}, {re}, {im}]"),
                );
            }
        }
        DataKind::RandomSmooth => {
            check(
                d.random_modes >= 1,
                format!(
                    "data.random_modes must be at least 1, got {}",
                    d.random_modes
                ),
            );
            check(
                d.random_amplitude >= 0.0 && d.random_amplitude < 1.0,
                format!(
                    "data.random_amplitude must lie in [0, 1), got {}",
                    d.random_amplitude
                ),
            );
        }
        DataKind::Checkpoint => match &d.checkpoint {
            None => check(
                false,
                "data.kind = \"checkpoint\" needs data.checkpoint".into(),
            ),
            Some(p) => check(
                p.is_file(),
                format!("data.checkpoint {} does not exist", p.display()),
            ),
        },
        DataKind::Flat => {}
    }

    let p = &cfg.physics;
    check(
        p.sigma >= 0.0 && p.sigma.is_finite(),
        format!("physics.sigma must be non-negative, got {}", p.sigma),
    );
    check(
        p.t_final >= 0.0 && p.t_final.is_finite(),
        format!("physics.t_final must be non-negative, got {}", p.t_final),
    );
    check(
        p.max_steps >= 1,
        "physics.max_steps must be at least 1".into(),
    );

    if let Err(e) = cfg.stepper.validate() {
        check(false, format!("stepper: {e}"));
    }

    let o = &cfg.output;
    check(
        o.record_interval >= 1,
        "output.record_interval must be at least 1".into(),
    );
    check(
        o.fixed_dt >= 0.0 && o.fixed_dt.is_finite(),
        format!("output.fixed_dt must be non-negative, got {}", o.fixed_dt),
    );
    for f in &o.families {
        check(
            matches!(f.as_str(), "sigma" | "high" | "aux"),
            format!("output.families entry {f:?} is not one of sigma, high, aux"),
        );
    }

    let s = &cfg.study;
    for (i, v) in s.sigma_list.iter().enumerate() {
        check(
            *v >= 0.0 && v.is_finite(),
            format!("study.sigma_list[{i}] must be non-negative, got {v}"),
        );
    }
    for (i, v) in s.epsilon_list.iter().enumerate() {
        check(
            *v > 0.0 && v.is_finite(),
            format!("study.epsilon_list[{i}] must be positive, got {v}"),
        );
    }
    if let Some(r) = s.sigma_ratio {
        check(
            r > 0.0 && r.is_finite(),
            format!("study.sigma_ratio must be positive, got {r}"),
        );
    }
    errs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse_config_str("", &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(validate(&cfg).is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config_str("[physics]\nsigmaa = 1.0\n", &[]).unwrap_err();
        assert!(err.to_string().contains("sigmaa"), "{err}");
        assert!(parse_config_str("[plotting]\n", &[]).is_err());
    }

    #[test]
    fn every_violation_is_reported() {
        let text = "[data]\nkind = \"crest\"\nnu = 0.7\n[study]\nsigma_list = [1e-3, -1.0]\n[grid]\nn_points = 7\n";
        let cfg = parse_config_str(text, &[]).unwrap();
        let errs = validate(&cfg);
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("nu")));
        assert!(errs.iter().any(|e| e.contains("sigma_list[1]")));
        assert!(errs.iter().any(|e| e.contains("n_points")));
    }

    #[test]
    fn environment_overrides_apply() {
        let env = vec![
            ("CRESTWAVE_PHYSICS_SIGMA".to_string(), "0.25".to_string()),
            ("CRESTWAVE_DATA_KIND".to_string(), "crest".to_string()),
            (
                "CRESTWAVE_STUDY_EPSILON_LIST".to_string(),
                "[0.2, 0.1]".to_string(),
            ),
            ("UNRELATED".to_string(), "x".to_string()),
        ];
        let cfg = parse_config_str("[physics]\nsigma = 0.1\n", &env).unwrap();
        assert_eq!(cfg.physics.sigma, 0.25);
        assert_eq!(cfg.data.kind, DataKind::Crest);
        assert_eq!(cfg.study.epsilon_list, vec![0.2, 0.1]);
        let bad = vec![("CRESTWAVE_NOPE_X".to_string(), "1".to_string())];
        assert!(parse_config_str("", &bad).is_err());
    }
}
