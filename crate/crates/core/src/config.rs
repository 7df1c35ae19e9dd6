//! Project configuration: `putforge.toml` at the project root, with
//! command-line overrides layered on top.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::analysis::DEFAULT_ASSERTIONS;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::generate::{render, DEFAULT_ROW_CAP};
use crate::instrument::DEFAULT_MAX_RECORDS;
use crate::runner::DEFAULT_TIMEOUT;

pub const CONFIG_FILE: &str = "putforge.toml";
pub const DEFAULT_TEST_COMMAND: &str = "cargo test";

/// A duration written as seconds (`30`, `0.5`) or with a unit (`"500ms"`, `"2m"`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DurationSetting {
    Seconds(u64),
    Fractional(f64),
    Text(String),
}

impl DurationSetting {
    pub fn to_duration(&self) -> Result<Duration> {
        let invalid = |what: &str| Error::Config(format!("invalid duration `{what}`"));
        match self {
            DurationSetting::Seconds(s) => Ok(Duration::from_secs(*s)),
            DurationSetting::Fractional(s) => Duration::try_from_secs_f64(*s).map_err(|_| invalid(&s.to_string())),
            DurationSetting::Text(text) => {
                let t = text.trim();
                let split = t.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(t.len());
                let (number, unit) = t.split_at(split);
                let value: f64 = number.parse().map_err(|_| invalid(text))?;
                let secs = match unit.trim() {
                    "" | "s" => value,
                    "ms" => value / 1000.0,
                    "m" | "min" => value * 60.0,
                    _ => return Err(invalid(text)),
                };
                Duration::try_from_secs_f64(secs).map_err(|_| invalid(text))
            }
        }
    }
}

/// Every setting optional: the shape of both the file and the overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub workspace: Option<PathBuf>,
    pub workload_command: Option<String>,
    pub test_command: Option<String>,
    pub adapter: Option<String>,
    pub assertion_allow_list: Option<Vec<String>>,
    pub provider_row_cap: Option<usize>,
    pub per_row_timeout: Option<DurationSetting>,
    pub retries: Option<u32>,
    pub jobs: Option<usize>,
    pub parallel_rows: Option<bool>,
    pub max_records_per_target: Option<u64>,
    pub per_site_variants: Option<bool>,
    pub exclude: Option<Vec<String>>,
}

impl Settings {
    pub fn parse(text: &str, label: &Path) -> Result<Settings> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", label.display(), e.message())))
    }

    /// `other` wins wherever it sets a value.
    pub fn overlay(self, other: Settings) -> Settings {
        Settings {
            workspace: other.workspace.or(self.workspace),
            workload_command: other.workload_command.or(self.workload_command),
            test_command: other.test_command.or(self.test_command),
            adapter: other.adapter.or(self.adapter),
            assertion_allow_list: other.assertion_allow_list.or(self.assertion_allow_list),
            provider_row_cap: other.provider_row_cap.or(self.provider_row_cap),
            per_row_timeout: other.per_row_timeout.or(self.per_row_timeout),
            retries: other.retries.or(self.retries),
            jobs: other.jobs.or(self.jobs),
            parallel_rows: other.parallel_rows.or(self.parallel_rows),
            max_records_per_target: other.max_records_per_target.or(self.max_records_per_target),
            per_site_variants: other.per_site_variants.or(self.per_site_variants),
            exclude: other.exclude.or(self.exclude),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub project_root: PathBuf,
    pub workspace: PathBuf,
    pub workload_command: Option<String>,
    pub test_command: String,
    pub adapter: String,
    pub assertion_allow_list: Vec<String>,
    pub provider_row_cap: usize,
    pub per_row_timeout: Duration,
    pub retries: u32,
    pub jobs: usize,
    pub parallel_rows: bool,
    pub max_records_per_target: u64,
    pub per_site_variants: bool,
    pub exclude: Vec<String>,
}

impl Config {
    /// Reads `putforge.toml` from the project root (or `config_file`), if
    /// present, applies `overrides` and validates the result.
    pub fn load(project_root: &Path, config_file: Option<&Path>, overrides: Settings) -> Result<Config> {
        if !project_root.is_dir() {
            return Err(Error::Config(format!("project root {} is not a directory", project_root.display())));
        }
        let root = fsutil::absolute(project_root);
        let file = match config_file {
            Some(path) => {
                if !path.is_file() {
                    return Err(Error::Config(format!("config file {} not found", path.display())));
                }
                Some(path.to_path_buf())
            }
            None => Some(root.join(CONFIG_FILE)).filter(|p| p.is_file()),
        };
        let settings = match file {
            Some(path) => Settings::parse(&fsutil::read(&path)?, &path)?,
            None => Settings::default(),
        };
        Config::from_settings(&root, settings.overlay(overrides))
    }

    pub fn from_settings(project_root: &Path, s: Settings) -> Result<Config> {
        let root = fsutil::absolute(project_root);
        let workspace = match s.workspace {
            Some(w) if w.is_absolute() => w,
            Some(w) => root.join(w),
            None => root.join("target").join("putforge"),
        };
        let config = Config {
            workspace: fsutil::absolute(&workspace),
            workload_command: s.workload_command.filter(|c| !c.trim().is_empty()),
            test_command: s.test_command.unwrap_or_else(|| DEFAULT_TEST_COMMAND.to_owned()),
            adapter: s.adapter.unwrap_or_else(|| render::LIBTEST_ADAPTER.to_owned()),
            assertion_allow_list: s
                .assertion_allow_list
                .unwrap_or_else(|| DEFAULT_ASSERTIONS.iter().map(|a| a.to_string()).collect()),
            provider_row_cap: s.provider_row_cap.unwrap_or(DEFAULT_ROW_CAP),
            per_row_timeout: match s.per_row_timeout {
                Some(t) => t.to_duration()?,
                None => DEFAULT_TIMEOUT,
            },
            retries: s.retries.unwrap_or(0),
            jobs: s
                .jobs
                .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
            parallel_rows: s.parallel_rows.unwrap_or(false),
            max_records_per_target: s.max_records_per_target.unwrap_or(DEFAULT_MAX_RECORDS),
            per_site_variants: s.per_site_variants.unwrap_or(false),
            exclude: s.exclude.unwrap_or_default(),
            project_root: root,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.project_root.is_dir() {
            return Err(Error::Config(format!("project root {} is not a directory", self.project_root.display())));
        }
        if fsutil::same_path(&self.project_root, &self.workspace) {
            return Err(Error::Config("workspace must differ from the project root".into()));
        }
        render::check_adapter(&self.adapter)?;
        if self.test_command.trim().is_empty() {
            return Err(Error::Config("test_command is empty".into()));
        }
        if self.assertion_allow_list.is_empty() {
            return Err(Error::Config("assertion_allow_list is empty".into()));
        }
        let positive = [
            ("provider_row_cap", self.provider_row_cap as u128),
            ("per_row_timeout", self.per_row_timeout.as_nanos()),
            ("jobs", self.jobs as u128),
            ("max_records_per_target", self.max_records_per_target as u128),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let c = Config::load(dir.path(), None, Settings::default()).unwrap();
        assert_eq!(c.workspace, fsutil::absolute(dir.path()).join("target/putforge"));
        assert_eq!(c.test_command, "cargo test");
        assert_eq!(c.adapter, "rust-libtest");
        assert_eq!(c.provider_row_cap, 10_000);
        assert_eq!(c.per_row_timeout, Duration::from_secs(30));
        assert_eq!(c.retries, 0);
        assert!(c.assertion_allow_list.contains(&"assert_eq".to_owned()));
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        fsutil::write(
            &dir.path().join(CONFIG_FILE),
            "workspace = \"out\"\nworkload_command = \"cargo run\"\nper_row_timeout = \"500ms\"\nretries = 2\n",
        )
        .unwrap();
        let c = Config::load(
            dir.path(),
            None,
            Settings {
                retries: Some(1),
                ..Settings::default()
            },
        )
        .unwrap();
        assert_eq!(c.workspace, fsutil::absolute(dir.path()).join("out"));
        assert_eq!(c.workload_command.as_deref(), Some("cargo run"));
        assert_eq!(c.per_row_timeout, Duration::from_millis(500));
        assert_eq!(c.retries, 1);
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let load = |s: Settings| Config::load(dir.path(), None, s);
        assert!(matches!(
            load(Settings {
                adapter: Some("junit".into()),
                ..Settings::default()
            }),
            Err(Error::UnknownAdapter(_))
        ));
        assert!(matches!(
            load(Settings {
                workspace: Some(".".into()),
                ..Settings::default()
            }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            load(Settings {
                provider_row_cap: Some(0),
                ..Settings::default()
            }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            load(Settings {
                per_row_timeout: Some(DurationSetting::Seconds(0)),
                ..Settings::default()
            }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Config::load(&dir.path().join("missing"), None, Settings::default()),
            Err(Error::Config(_))
        ));
        fsutil::write(&dir.path().join(CONFIG_FILE), "bogus_key = 1\n").unwrap();
        assert!(matches!(load(Settings::default()), Err(Error::Config(_))));
    }

    #[test]
    fn durations() {
        assert_eq!(DurationSetting::Fractional(0.25).to_duration().unwrap(), Duration::from_millis(250));
        assert_eq!(DurationSetting::Text("2m".into()).to_duration().unwrap(), Duration::from_secs(120));
        assert!(DurationSetting::Text("abc".into()).to_duration().is_err());
    }
}
