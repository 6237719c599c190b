//! Sweep configuration: a flat, line-oriented `key = value` format with
//! `[section]` headers. Comments start with `#`. All validation errors are
//! collected and reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    HaldaneChern,
    WindingMap,
    Lyapunov,
    AmorphousChern,
    IndexCheck,
    Geomid,
    ManybodyPairing,
    LevelStats,
}

pub const EXPERIMENT_NAMES: [(&str, Experiment); 8] = [
    ("haldane_chern", Experiment::HaldaneChern),
    ("winding_map", Experiment::WindingMap),
    ("lyapunov", Experiment::Lyapunov),
    ("amorphous_chern", Experiment::AmorphousChern),
    ("index_check", Experiment::IndexCheck),
    ("geomid", Experiment::Geomid),
    ("manybody_pairing", Experiment::ManybodyPairing),
    ("level_stats", Experiment::LevelStats),
];

impl Experiment {
    pub fn parse(name: &str) -> Option<Experiment> {
        EXPERIMENT_NAMES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, e)| *e)
    }

    pub fn name(&self) -> &'static str {
        EXPERIMENT_NAMES
            .iter()
            .find(|(_, e)| e == self)
            .map(|(n, _)| *n)
            .unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct GridAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![0.5 * (self.min + self.max)];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub experiment: Experiment,
    /// numeric model parameters, e.g. t2, w, n1
    pub params: BTreeMap<String, f64>,
    /// free-form string parameters, e.g. kernel mode, ensemble kind
    pub options: BTreeMap<String, String>,
    pub grid: Vec<GridAxis>,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
}

impl SweepConfig {
    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn option<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.options.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    pub fn grid_points(&self) -> Vec<Vec<(String, f64)>> {
        match self.grid.len() {
            0 => vec![Vec::new()],
            1 => self.grid[0]
                .values()
                .into_iter()
                .map(|v| vec![(self.grid[0].name.clone(), v)])
                .collect(),
            _ => {
                let mut out = Vec::new();
                for a in self.grid[0].values() {
                    for b in self.grid[1].values() {
                        out.push(vec![
                            (self.grid[0].name.clone(), a),
                            (self.grid[1].name.clone(), b),
                        ]);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Parse { line: usize, column: usize, msg: String },
    Semantic(Vec<String>),
    Io(std::io::Error),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, column, msg } => {
                write!(f, "parse error at line {line}, column {column}: {msg}")
            }
            ConfigError::Semantic(errors) => {
                writeln!(f, "{} configuration error(s):", errors.len())?;
                for e in errors {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
            ConfigError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses the raw text into `section.key -> value` pairs.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut section = String::new();
    let mut out = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(ConfigError::Parse {
                    line: ln + 1,
                    column: raw.len(),
                    msg: "unterminated section header".into(),
                });
            }
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(ConfigError::Parse {
                line: ln + 1,
                column: 1,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: ln + 1,
                column: 1,
                msg: "empty key".into(),
            });
        }
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        out.insert(full, value.to_string());
    }
    Ok(out)
}

/// Parses and semantically validates a config; all semantic errors are
/// reported at once.
pub fn validate_config_text(text: &str) -> Result<SweepConfig, ConfigError> {
    let pairs = parse_pairs(text)?;
    let mut errors = Vec::new();

    let experiment = match pairs.get("experiment.name") {
        None => {
            errors.push("missing [experiment] name".to_string());
            None
        }
        Some(name) => match Experiment::parse(name) {
            Some(e) => Some(e),
            None => {
                let valid: Vec<&str> = EXPERIMENT_NAMES.iter().map(|(n, _)| *n).collect();
                errors.push(format!(
                    "unknown experiment `{name}`; valid names: {}",
                    valid.join(", ")
                ));
                None
            }
        },
    };

    let mut params = BTreeMap::new();
    let mut options = BTreeMap::new();
    for (k, v) in &pairs {
        if let Some(name) = k.strip_prefix("model.") {
            match v.parse::<f64>() {
                Ok(x) => {
                    params.insert(name.to_string(), x);
                }
                Err(_) => errors.push(format!("model.{name}: `{v}` is not a number")),
            }
        } else if let Some(name) = k.strip_prefix("options.") {
            options.insert(name.to_string(), v.clone());
        }
    }

    // grid axes: axis / min / max / count, optionally suffixed 2
    let mut grid = Vec::new();
    for suffix in ["", "2"] {
        let axis_key = format!("grid.axis{suffix}");
        if let Some(name) = pairs.get(&axis_key) {
            let getf = |field: &str, errors: &mut Vec<String>| -> Option<f64> {
                let key = format!("grid.{field}{suffix}");
                match pairs.get(&key) {
                    None => {
                        errors.push(format!("missing {key}"));
                        None
                    }
                    Some(v) => match v.parse::<f64>() {
                        Ok(x) => Some(x),
                        Err(_) => {
                            errors.push(format!("{key}: `{v}` is not a number"));
                            None
                        }
                    },
                }
            };
            let min = getf("min", &mut errors);
            let max = getf("max", &mut errors);
            let count = match pairs.get(&format!("grid.count{suffix}")) {
                None => {
                    errors.push(format!("missing grid.count{suffix}"));
                    None
                }
                Some(v) => match v.parse::<usize>() {
                    Ok(0) => {
                        errors.push(format!("grid.count{suffix} must be >= 1"));
                        None
                    }
                    Ok(c) => Some(c),
                    Err(_) => {
                        errors.push(format!("grid.count{suffix}: `{v}` is not an integer"));
                        None
                    }
                },
            };
            if let (Some(min), Some(max), Some(count)) = (min, max, count) {
                grid.push(GridAxis { name: name.clone(), min, max, count });
            }
        }
    }

    let seeds: Vec<u64> = match pairs.get("run.seeds") {
        None => {
            errors.push("missing run.seeds".to_string());
            Vec::new()
        }
        Some(v) => {
            let mut out = Vec::new();
            for tok in v.split(',') {
                match tok.trim().parse::<u64>() {
                    Ok(s) => out.push(s),
                    Err(_) => errors.push(format!("run.seeds: `{}` is not a seed", tok.trim())),
                }
            }
            if out.is_empty() {
                errors.push("run.seeds must be non-empty".to_string());
            }
            out
        }
    };

    let output = PathBuf::from(
        pairs
            .get("run.output")
            .cloned()
            .unwrap_or_else(|| "nci-out.jsonl".to_string()),
    );
    for (k, v) in &pairs {
        if let Some(name) = k.strip_prefix("run.") {
            if name != "seeds" && name != "output" {
                options.insert(name.to_string(), v.clone());
            }
        }
    }

    // per-experiment semantic checks
    if let Some(exp) = experiment {
        let need = |key: &str, errors: &mut Vec<String>, params: &BTreeMap<String, f64>| {
            if !params.contains_key(key) {
                errors.push(format!("{} requires model.{key}", exp.name()));
            }
        };
        match exp {
            Experiment::HaldaneChern => {
                need("n1", &mut errors, &params);
                need("n2", &mut errors, &params);
                need("t2", &mut errors, &params);
                if grid.is_empty() {
                    errors.push("haldane_chern needs a fermi_energy grid axis".into());
                } else if grid[0].name != "fermi_energy" {
                    errors.push(format!(
                        "haldane_chern sweeps fermi_energy, got axis `{}`",
                        grid[0].name
                    ));
                }
                let mode = options.get("kernel").map(|s| s.as_str()).unwrap_or("minimal_image");
                if mode != "minimal_image" && mode != "roots_of_unity" {
                    errors.push(format!("unknown kernel mode `{mode}`"));
                }
            }
            Experiment::WindingMap => {
                need("n", &mut errors, &params);
                if grid.len() != 2 {
                    errors.push("winding_map needs two grid axes (w, m)".into());
                }
            }
            Experiment::Lyapunov => {
                if grid.is_empty() {
                    errors.push("lyapunov needs at least one grid axis".into());
                }
            }
            Experiment::AmorphousChern => {
                need("count", &mut errors, &params);
                need("theta", &mut errors, &params);
                need("decay", &mut errors, &params);
                if grid.is_empty() || grid[0].name != "fermi_fraction" {
                    errors.push("amorphous_chern sweeps fermi_fraction in (0, 1)".into());
                }
            }
            Experiment::IndexCheck => {
                need("radius", &mut errors, &params);
                need("t2", &mut errors, &params);
            }
            Experiment::Geomid => {
                let kind = options.get("ensemble").map(|s| s.as_str()).unwrap_or("continuum");
                if !["continuum", "square", "rsa"].contains(&kind) {
                    errors.push(format!(
                        "geomid ensemble must be continuum, square or rsa, got `{kind}`"
                    ));
                }
            }
            Experiment::ManybodyPairing => {
                need("disk_radius", &mut errors, &params);
                need("t2", &mut errors, &params);
            }
            Experiment::LevelStats => {
                let src = options.get("source").map(|s| s.as_str()).unwrap_or("poisson");
                if !["poisson", "gue", "haldane"].contains(&src) {
                    errors.push(format!(
                        "level_stats source must be poisson, gue or haldane, got `{src}`"
                    ));
                }
            }
        }
    }

    if !errors.is_empty() {
        return Err(ConfigError::Semantic(errors));
    }
    Ok(SweepConfig {
        experiment: experiment.unwrap(),
        params,
        options,
        grid,
        seeds,
        output,
    })
}

pub fn validate_config_file(path: &std::path::Path) -> Result<SweepConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    validate_config_text(&text)
}
