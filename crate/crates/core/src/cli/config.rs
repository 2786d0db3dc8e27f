//! Flat `key = value` configuration with one optional section per subcommand.
//!
//! ```text
//! # comments start with '#'
//! seed = 7
//!
//! [phase-sweep]
//! alphas = 0.5, 3, 4
//! ladder = 100, 400
//! ```
//!
//! Keys before the first section apply to every subcommand; section keys
//! override them for that subcommand only.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = || format!("{origin}:{}", i + 1);
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("{}: unterminated section header", at())))?
                    .trim();
                if !super::SUBCOMMANDS.contains(&name) {
                    return Err(Error::Config(format!("{}: unknown section [{name}]", at())));
                }
                cfg.sections.entry(name.to_string()).or_default();
                section = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}: expected `key = value`", at())))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Config(format!("{}: empty key", at())));
            }
            let map = match &section {
                Some(s) => cfg.sections.get_mut(s).expect("section registered above"),
                None => &mut cfg.global,
            };
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("{}: key `{k}` given twice", at())));
            }
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.global {
            s.push_str(&format!("{k} = {v}\n"));
        }
        for (name, map) in &self.sections {
            s.push_str(&format!("\n[{name}]\n"));
            for (k, v) in map {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s
    }

    /// Global keys overlaid with the subcommand's section.
    pub fn merged(&self, subcommand: &str) -> BTreeMap<String, String> {
        let mut m = self.global.clone();
        if let Some(sec) = self.sections.get(subcommand) {
            m.extend(sec.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        m
    }
}

/// Typed, tracked access to the effective settings of one subcommand. Keys
/// that no accessor asked for are rejected by [`Settings::finish`].
#[derive(Debug)]
pub struct Settings {
    subcommand: &'static str,
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Settings {
    pub fn new(subcommand: &'static str, values: BTreeMap<String, String>) -> Self {
        Settings {
            subcommand,
            values,
            used: RefCell::new(BTreeSet::new()),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    fn bad(&self, key: &str, raw: &str, what: &str) -> Error {
        Error::Config(format!(
            "{}: key `{key}`: cannot read {raw:?} as {what}",
            self.subcommand
        ))
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(r) => r.parse().map_err(|_| self.bad(key, r, std::any::type_name::<T>())),
        }
    }

    pub fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(r) => r
                .parse()
                .map(Some)
                .map_err(|_| self.bad(key, r, std::any::type_name::<T>())),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(default),
            Some(r) => r
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| self.bad(key, r, "a comma-separated list")))
                .collect(),
        }
    }

    pub fn finish(self) -> Result<()> {
        let used = self.used.into_inner();
        let unknown: Vec<&String> = self.values.keys().filter(|k| !used.contains(*k)).collect();
        if let Some(k) = unknown.first() {
            return Err(Error::Config(format!("{}: unknown key `{k}`", self.subcommand)));
        }
        Ok(())
    }
}
