use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{LeapError, Result};

/// Every key a config file may set.
pub const KEYS: &[&str] = &[
    "backend",
    "cols",
    "color_mode",
    "darken",
    "emit_class",
    "enhance",
    "fps",
    "frames",
    "groups",
    "height",
    "infer_ms",
    "jitter_ms",
    "k",
    "manifest",
    "mode",
    "n",
    "out",
    "overlay_ms",
    "postprocess_ms",
    "preprocess_ms",
    "queue_depth",
    "read_ms",
    "report",
    "rows",
    "seed",
    "size",
    "sink",
    "source",
    "threshold",
    "timing_mode",
    "variants",
    "width",
    "write_ms",
];

/// Flat `key=value` settings: a config file overlaid by command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key=value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LeapError::Configuration(format!("line {}: expected key=value", n + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(LeapError::Configuration(format!("line {}: unknown key `{k}`", n + 1)));
            }
            if values.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(LeapError::Configuration(format!("line {}: `{k}` set twice", n + 1)));
            }
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| LeapError::Configuration(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Overrides `key` when a flag was given.
    pub fn set(&mut self, key: &str, flag: Option<impl Display>) {
        debug_assert!(KEYS.contains(&key), "{key}");
        if let Some(v) = flag {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| LeapError::Configuration(format!("bad value `{v}` for {key}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| LeapError::Configuration(format!("missing required setting `{key}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut s = Settings::parse("# run\nmode = sync\n\nframes=50\n").unwrap();
        assert_eq!(s.raw("mode"), Some("sync"));
        assert_eq!(s.get::<u64>("frames").unwrap(), Some(50));
        s.set("frames", Some(7));
        s.set("mode", None::<&str>);
        assert_eq!(s.get_or::<u64>("frames", 0).unwrap(), 7);
        assert_eq!(s.raw("mode"), Some("sync"));
        assert_eq!(s.get_or::<f64>("fps", 30.0).unwrap(), 30.0);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(Settings::parse("mode sync").is_err());
        assert!(Settings::parse("colour=red").is_err());
        assert!(Settings::parse("mode=sync\nmode=async").is_err());
    }

    #[test]
    fn bad_values_are_configuration_errors() {
        let s = Settings::parse("frames=lots").unwrap();
        assert!(matches!(s.get::<u64>("frames"), Err(LeapError::Configuration(_))));
        assert!(s.require::<u32>("rows").is_err());
    }
}
