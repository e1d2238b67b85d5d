//! Flat `key = value` run configuration.
//!
//! ```text
//! # radial run, m = 2
//! m = 2
//! dim = 2
//! t_end = 200
//! snapshot_times = 50, 100, 200
//! ```
//!
//! Unknown keys are errors. Every key has a default, listed by
//! [`RunConfig::keys`]; [`RunConfig::render`] writes the complete effective
//! configuration back in the same format.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::sim::{InitialData, SimConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {detail}")]
    Value { line: usize, key: String, detail: String },
    #[error("initial data table {path}: {detail}")]
    Table { path: PathBuf, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Shape of the initial density.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialShape {
    Plateau,
    /// Two-column CSV `r,u`, resolved relative to the config file.
    Table(PathBuf),
}

/// Everything a `simulate` run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: f64,
    pub dim: u32,
    pub dr: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    pub r_max: Option<f64>,
    pub initial: InitialShape,
    pub plateau_radius: f64,
    pub plateau_height: f64,
    pub snapshot_times: Vec<f64>,
    pub u_tol: f64,
    pub series_dt: f64,
    pub hdot_window: f64,
    pub warmup: f64,
    /// Bracket width for the minimal-speed solve.
    pub speed_tol: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        let (plateau_radius, plateau_height) = match sim.initial {
            InitialData::Plateau { radius, height } => (radius, height),
            InitialData::Tabulated { .. } => (1.0, 1.0),
        };
        RunConfig {
            m: sim.m,
            dim: sim.dim,
            dr: sim.dr,
            cfl_safety: sim.cfl_safety,
            t_end: sim.t_end,
            r_max: sim.r_max,
            initial: InitialShape::Plateau,
            plateau_radius,
            plateau_height,
            snapshot_times: sim.snapshot_times,
            u_tol: sim.u_tol,
            series_dt: sim.series_dt,
            hdot_window: sim.hdot_window,
            warmup: sim.warmup,
            speed_tol: sim.speed_tol,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Key name, default as written, description.
const KEYS: &[(&str, &str, &str)] = &[
    ("m", "2", "porous-medium exponent, > 1"),
    ("dim", "1", "spatial dimension N"),
    ("dr", "0.05", "radial grid spacing"),
    ("cfl_safety", "0.9", "fraction of the explicit stability limit"),
    ("t_end", "200", "final time"),
    ("r_max", "auto", "domain radius; auto = support + c t_end + 10"),
    ("initial", "plateau", "plateau, or a path to an r,u CSV table"),
    ("plateau_radius", "1", "radius of the initial plateau"),
    ("plateau_height", "1", "height of the initial plateau"),
    ("snapshot_times", "", "comma-separated snapshot times"),
    ("u_tol", "1e-10", "density threshold for the front"),
    ("series_dt", "0.1", "spacing of series rows"),
    ("hdot_window", "1", "width of the centered difference for hdot"),
    ("warmup", "10", "series rows start at this time"),
    ("speed_tol", "1e-10", "bracket width of the minimal-speed solve"),
    ("out_dir", "out", "output directory"),
];

/// `value` relative to `base`, without a leading `./`.
fn resolve(base: &Path, value: &str) -> PathBuf {
    if base.as_os_str().is_empty() || base == Path::new(".") {
        PathBuf::from(value)
    } else {
        base.join(value)
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("not a finite number".into())
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse_f64)
        .collect()
}

/// Shortest round-trip form, so echoed values parse back bit-identically.
fn fmt_f64(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e9) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl RunConfig {
    /// `(key, default, description)` for every accepted key.
    pub fn keys() -> &'static [(&'static str, &'static str, &'static str)] {
        KEYS
    }

    /// Parse config text. Relative paths, including the default `out_dir`,
    /// are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&(name, _, _)) = KEYS.iter().find(|k| k.0 == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if seen.contains(&name) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(name);
            cfg.set(name, value, base).map_err(|detail| ConfigError::Value {
                line,
                key: key.to_string(),
                detail,
            })?;
        }
        if !seen.contains(&"out_dir") {
            cfg.out_dir = resolve(base, "out");
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> std::result::Result<(), String> {
        match key {
            "m" => self.m = parse_f64(value)?,
            "dim" => self.dim = value.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            "dr" => self.dr = parse_f64(value)?,
            "cfl_safety" => self.cfl_safety = parse_f64(value)?,
            "t_end" => self.t_end = parse_f64(value)?,
            "r_max" => {
                self.r_max = if value == "auto" { None } else { Some(parse_f64(value)?) };
            }
            "initial" => {
                self.initial = if value == "plateau" {
                    InitialShape::Plateau
                } else if value.is_empty() {
                    return Err("empty value".into());
                } else {
                    InitialShape::Table(resolve(base, value))
                };
            }
            "plateau_radius" => self.plateau_radius = parse_f64(value)?,
            "plateau_height" => self.plateau_height = parse_f64(value)?,
            "snapshot_times" => self.snapshot_times = parse_list(value)?,
            "u_tol" => self.u_tol = parse_f64(value)?,
            "series_dt" => self.series_dt = parse_f64(value)?,
            "hdot_window" => self.hdot_window = parse_f64(value)?,
            "warmup" => self.warmup = parse_f64(value)?,
            "speed_tol" => self.speed_tol = parse_f64(value)?,
            "out_dir" => {
                if value.is_empty() {
                    return Err("empty value".into());
                }
                self.out_dir = resolve(base, value);
            }
            _ => unreachable!("key table and setter out of sync"),
        }
        Ok(())
    }

    /// Complete effective configuration in the input format.
    pub fn render(&self) -> String {
        let mut out = String::from("# effective configuration\n");
        let list = self.snapshot_times.iter().map(|&t| fmt_f64(t)).collect::<Vec<_>>().join(", ");
        for &(key, _, doc) in KEYS {
            let value = match key {
                "m" => fmt_f64(self.m),
                "dim" => self.dim.to_string(),
                "dr" => fmt_f64(self.dr),
                "cfl_safety" => fmt_f64(self.cfl_safety),
                "t_end" => fmt_f64(self.t_end),
                "r_max" => self.r_max.map_or("auto".into(), fmt_f64),
                "initial" => match &self.initial {
                    InitialShape::Plateau => "plateau".into(),
                    InitialShape::Table(p) => p.display().to_string(),
                },
                "plateau_radius" => fmt_f64(self.plateau_radius),
                "plateau_height" => fmt_f64(self.plateau_height),
                "snapshot_times" => list.clone(),
                "u_tol" => fmt_f64(self.u_tol),
                "series_dt" => fmt_f64(self.series_dt),
                "hdot_window" => fmt_f64(self.hdot_window),
                "warmup" => fmt_f64(self.warmup),
                "speed_tol" => fmt_f64(self.speed_tol),
                "out_dir" => self.out_dir.display().to_string(),
                _ => unreachable!(),
            };
            let _ = writeln!(out, "# {doc}\n{key} = {value}");
        }
        out
    }

    /// Simulator configuration; reads the initial table if one is named.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let initial = match &self.initial {
            InitialShape::Plateau => InitialData::Plateau {
                radius: self.plateau_radius,
                height: self.plateau_height,
            },
            InitialShape::Table(path) => read_table(path)?,
        };
        Ok(SimConfig {
            m: self.m,
            dim: self.dim,
            dr: self.dr,
            cfl_safety: self.cfl_safety,
            t_end: self.t_end,
            r_max: self.r_max,
            initial,
            snapshot_times: self.snapshot_times.clone(),
            u_tol: self.u_tol,
            series_dt: self.series_dt,
            hdot_window: self.hdot_window,
            warmup: self.warmup,
            speed_tol: self.speed_tol,
        })
    }
}

fn read_table(path: &Path) -> Result<InitialData> {
    let err = |detail: String| ConfigError::Table {
        path: path.to_path_buf(),
        detail,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("r,u") {
        return Err(err("expected header `r,u`".into()));
    }
    let (mut r, mut u) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| err(format!("line {}: expected two fields", n + 2)))?;
        r.push(parse_f64(a.trim()).map_err(|e| err(format!("line {}: {e}", n + 2)))?);
        u.push(parse_f64(b.trim()).map_err(|e| err(format!("line {}: {e}", n + 2)))?);
    }
    Ok(InitialData::Tabulated { r, u })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = RunConfig::parse("# nothing\n\n", Path::new(".")).unwrap();
        assert_eq!(cfg, RunConfig::default());
        let cfg = RunConfig::parse("", Path::new("/runs")).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("/runs/out"));
    }

    #[test]
    fn values_and_comments() {
        let text = "m = 3  # slow diffusion\ndim=2\nsnapshot_times = 50, 100,200\nr_max = 400\n";
        let cfg = RunConfig::parse(text, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.m, 3.0);
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.snapshot_times, vec![50.0, 100.0, 200.0]);
        assert_eq!(cfg.r_max, Some(400.0));
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/out"));
    }

    #[test]
    fn unknown_and_duplicate_keys_fail() {
        assert!(matches!(
            RunConfig::parse("mm = 2\n", Path::new(".")),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("m = 2\nm = 3\n", Path::new(".")),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("m 2\n", Path::new(".")),
            Err(ConfigError::Syntax { line: 1 })
        ));
        assert!(matches!(
            RunConfig::parse("dr = fast\n", Path::new(".")),
            Err(ConfigError::Value { line: 1, .. })
        ));
    }

    #[test]
    fn render_parses_back() {
        let cfg = RunConfig {
            m: 1.5,
            dim: 3,
            dr: 0.1 + 0.2,
            snapshot_times: vec![10.0, 12.5],
            r_max: Some(123.0),
            out_dir: PathBuf::from("/tmp/run"),
            ..RunConfig::default()
        };
        let text = cfg.render();
        let back = RunConfig::parse(&text, Path::new("/elsewhere")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_key_has_a_default_that_parses() {
        let text: String = KEYS
            .iter()
            .filter(|k| !k.1.is_empty())
            .map(|(k, d, _)| format!("{k} = {d}\n"))
            .collect();
        let cfg = RunConfig::parse(&text, Path::new(".")).unwrap();
        assert_eq!(cfg, RunConfig::default());
    }
}
