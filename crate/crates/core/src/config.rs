//! Run configuration in a flat `key = value` format.
//!
//! Lines starting with `#` and blank lines are ignored. Every key can also be
//! given on the command line; settings applied later win.

use std::path::{Path, PathBuf};

use crate::compression::{Parallelism, Protocol};
use crate::ensemble::Conditioning;
use crate::error::{Error, Result};
use crate::lattice::{make_spec, GridSpec, ReservoirMode};
use crate::metrics::TimeModel;

/// Recognized keys, in dump order.
pub const KEYS: [&str; 16] = [
    "L",
    "reservoir",
    "p",
    "protocol",
    "continuous_release",
    "trials",
    "seed",
    "t1_us",
    "l_um",
    "v_um_per_ms",
    "out_dir",
    "trials_csv",
    "stats_csv",
    "schedule_json",
    "timing",
    "conditioning",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub target_side: usize,
    pub reservoir: ReservoirMode,
    pub fill: f64,
    pub parallelism: Parallelism,
    pub continuous_release: bool,
    pub trials: usize,
    pub seed: u64,
    pub t1_us: f64,
    pub spacing_um: f64,
    pub speed_um_per_ms: f64,
    /// Base directory for relative output paths; the CLI falls back to an
    /// environment variable and then the working directory.
    pub out_dir: Option<PathBuf>,
    pub trials_csv: PathBuf,
    pub stats_csv: PathBuf,
    pub schedule_json: Option<PathBuf>,
    /// Record wall-clock planning time in the CSVs. Off by default so that
    /// reruns produce identical files.
    pub timing: bool,
    pub conditioning: Conditioning,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tm = TimeModel::default();
        Self {
            target_side: 14,
            reservoir: ReservoirMode::Default,
            fill: 0.5,
            parallelism: Parallelism::Full,
            continuous_release: false,
            trials: 2000,
            seed: 0,
            t1_us: tm.t1_us,
            spacing_um: tm.spacing_um,
            speed_um_per_ms: tm.speed_um_per_ms,
            out_dir: None,
            trials_csv: "trials.csv".into(),
            stats_csv: "stats.csv".into(),
            schedule_json: None,
            timing: false,
            conditioning: Conditioning::AllTrials,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}`: invalid value `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "L" => self.target_side = parse_num(key, value)?,
            "reservoir" => self.reservoir = value.parse()?,
            "p" => self.fill = parse_num(key, value)?,
            "protocol" => self.parallelism = value.parse()?,
            "continuous_release" => self.continuous_release = parse_bool(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "t1_us" => self.t1_us = parse_num(key, value)?,
            "l_um" => self.spacing_um = parse_num(key, value)?,
            "v_um_per_ms" => self.speed_um_per_ms = parse_num(key, value)?,
            "out_dir" => self.out_dir = opt_path(value),
            "trials_csv" => self.trials_csv = value.into(),
            "stats_csv" => self.stats_csv = value.into(),
            "schedule_json" => self.schedule_json = opt_path(value),
            "timing" => self.timing = parse_bool(key, value)?,
            "conditioning" => self.conditioning = value.parse()?,
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Text form of one key.
    pub fn get(&self, key: &str) -> Option<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        Some(match key {
            "L" => self.target_side.to_string(),
            "reservoir" => self.reservoir.to_string(),
            "p" => self.fill.to_string(),
            "protocol" => self.parallelism.to_string(),
            "continuous_release" => self.continuous_release.to_string(),
            "trials" => self.trials.to_string(),
            "seed" => self.seed.to_string(),
            "t1_us" => self.t1_us.to_string(),
            "l_um" => self.spacing_um.to_string(),
            "v_um_per_ms" => self.speed_um_per_ms.to_string(),
            "out_dir" => path(&self.out_dir),
            "trials_csv" => self.trials_csv.display().to_string(),
            "stats_csv" => self.stats_csv.display().to_string(),
            "schedule_json" => path(&self.schedule_json),
            "timing" => self.timing.to_string(),
            "conditioning" => self.conditioning.to_string(),
            _ => return None,
        })
    }

    /// Every key, one `key = value` line each; [`RunConfig::parse`] reads it back.
    pub fn dump(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).unwrap()))
            .collect()
    }

    pub fn protocol(&self) -> Protocol {
        Protocol::new(self.parallelism).with_continuous_release(self.continuous_release)
    }

    pub fn time_model(&self) -> Result<TimeModel> {
        TimeModel::new(self.t1_us, self.spacing_um, self.speed_um_per_ms).ok_or_else(|| {
            Error::InvalidSpec("t1_us, l_um and v_um_per_ms must be positive and finite".into())
        })
    }

    /// Checks everything a run needs and returns its geometry.
    pub fn validate(&self) -> Result<GridSpec> {
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be at least 1".into()));
        }
        self.time_model()?;
        make_spec(self.target_side, self.fill, self.reservoir)
    }

    /// Resolves an output path against `out_dir`, falling back to `fallback_dir`.
    pub fn resolve(&self, path: &Path, fallback_dir: &Path) -> PathBuf {
        if path.is_absolute() {
            return path.to_path_buf();
        }
        self.out_dir.as_deref().unwrap_or(fallback_dir).join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_load_round_trip() {
        let mut cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.dump()).unwrap(), cfg);
        cfg.target_side = 22;
        cfg.reservoir = ReservoirMode::Explicit(40);
        cfg.fill = 0.55;
        cfg.parallelism = Parallelism::Single;
        cfg.continuous_release = true;
        cfg.t1_us = 12.5;
        cfg.out_dir = Some("/tmp/x".into());
        cfg.schedule_json = Some("sched.json".into());
        cfg.timing = true;
        cfg.conditioning = Conditioning::SuccessOnly;
        assert_eq!(RunConfig::parse(&cfg.dump()).unwrap(), cfg);
    }

    #[test]
    fn later_settings_win() {
        let mut cfg = RunConfig::parse("# comment\nL = 6\n\ntrials=3\n").unwrap();
        assert_eq!((cfg.target_side, cfg.trials), (6, 3));
        cfg.set("L", "10").unwrap();
        assert_eq!(cfg.target_side, 10);
    }

    #[test]
    fn invalid_input_rejected() {
        assert!(RunConfig::parse("L 6").is_err());
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("p = half").is_err());
        assert!(RunConfig::parse("p = 1.5").unwrap().validate().is_err());
        assert!(RunConfig::parse("trials = 0").unwrap().validate().is_err());
        assert!(RunConfig::parse("v_um_per_ms = 0").unwrap().validate().is_err());
        assert!(RunConfig::parse("reservoir = 5").unwrap().validate().is_err());
    }
}
