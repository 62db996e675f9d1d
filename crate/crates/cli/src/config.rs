//! `key = value` configuration files.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use m2r_core::rules::DeprecationSwitch;
use m2r_core::{DialectId, RuleId};

use crate::CliError;

/// Name of the configuration file read from the working directory when
/// `--config` is not given.
pub const DEFAULT_CONFIG: &str = "m2r.conf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text or json)")),
        }
    }
}

pub fn parse_profile(s: &str) -> Result<DialectId, String> {
    match s {
        "revised" => Ok(DialectId::Revised),
        "legacy" => Ok(DialectId::Legacy),
        other => Err(format!("unknown profile `{other}` (expected legacy or revised)")),
    }
}

/// Rule ids may be written with or without the `M2R-` prefix.
pub fn parse_rule(s: &str) -> Result<RuleId, String> {
    let s = s.trim();
    let full = if s.starts_with("M2R-") {
        s.to_string()
    } else {
        format!("M2R-{s}")
    };
    RuleId::from_str(&full).map_err(|_| format!("unknown rule id `{s}`"))
}

pub fn parse_rules(s: &str) -> Result<BTreeSet<RuleId>, String> {
    list(s).iter().map(|r| parse_rule(r)).collect()
}

fn list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

/// Settings a config file may supply; `None` leaves the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub profile: Option<DialectId>,
    pub enable_rules: Option<BTreeSet<RuleId>>,
    pub disable_rules: BTreeSet<RuleId>,
    pub enable_deprecated: Option<DeprecationSwitch>,
    pub format: Option<Format>,
    pub source_dirs: Vec<PathBuf>,
    pub extensions: Option<Vec<String>>,
    pub external_modules: BTreeSet<String>,
    pub assume_trunc_is_conversion: Option<bool>,
    pub private_imports_as_errors: Option<bool>,
}

pub fn parse_config(text: &str, path: &Path) -> Result<FileConfig, CliError> {
    let mut c = FileConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| CliError::Config {
            path: path.to_path_buf(),
            line,
            message,
        };
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(format!("expected `key = value`, found `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "profile" => c.profile = Some(parse_profile(value).map_err(err)?),
            "enable_rules" => c.enable_rules = Some(parse_rules(value).map_err(err)?),
            "disable_rules" => c.disable_rules = parse_rules(value).map_err(err)?,
            "enable_deprecated" => {
                c.enable_deprecated = Some(match parse_bool(value) {
                    Ok(true) => DeprecationSwitch::All,
                    Ok(false) => DeprecationSwitch::Off,
                    Err(_) => DeprecationSwitch::Rules(parse_rules(value).map_err(err)?),
                })
            }
            "format" => c.format = Some(value.parse().map_err(err)?),
            "source_dirs" => c.source_dirs = list(value).into_iter().map(PathBuf::from).collect(),
            "extensions" => {
                c.extensions = Some(
                    list(value)
                        .into_iter()
                        .map(|e| e.trim_start_matches('.').to_string())
                        .collect(),
                )
            }
            "external_modules" => c.external_modules = list(value).into_iter().collect(),
            "assume_trunc_is_conversion" => c.assume_trunc_is_conversion = Some(parse_bool(value).map_err(err)?),
            "private_imports_as_errors" => c.private_imports_as_errors = Some(parse_bool(value).map_err(err)?),
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(c)
}

/// Read `explicit`, or the default file if it exists.
pub fn load_config(explicit: Option<&Path>) -> Result<FileConfig, CliError> {
    let (path, required) = match explicit {
        Some(p) => (p.to_path_buf(), true),
        None => (PathBuf::from(DEFAULT_CONFIG), false),
    };
    match std::fs::read_to_string(&path) {
        Ok(text) => parse_config(&text, &path),
        Err(_) if !required => Ok(FileConfig::default()),
        Err(e) => Err(CliError::Usage(format!("cannot read config {}: {e}", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FileConfig, CliError> {
        parse_config(text, Path::new("m2r.conf"))
    }

    #[test]
    fn keys_and_comments() {
        let c = parse(
            "# project settings\nprofile = legacy\nenable_deprecated = M2R-S01  # arrays only\n\
             extensions = .def, mod, .mi\nexternal_modules = InOut, Storage\nformat=json\n",
        )
        .unwrap();
        assert_eq!(c.profile, Some(DialectId::Legacy));
        assert_eq!(
            c.enable_deprecated,
            Some(DeprecationSwitch::Rules([RuleId::S01].into_iter().collect()))
        );
        assert_eq!(c.extensions, Some(vec!["def".into(), "mod".into(), "mi".into()]));
        assert_eq!(c.external_modules.len(), 2);
        assert_eq!(c.format, Some(Format::Json));
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let e = parse("profile = revised\n\ncolour = blue\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("colour") && msg.contains(":3:"), "{msg}");
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(parse("profile = modern").is_err());
        assert!(parse("disable_rules = M2R-Z99").is_err());
        assert!(parse("just words").is_err());
    }

    #[test]
    fn rule_prefix_is_optional() {
        assert_eq!(parse_rule("L01"), Ok(RuleId::L01));
        assert_eq!(parse_rule("M2R-P04"), Ok(RuleId::P04));
        assert!(parse_rule("X").is_err());
    }
}
