//! The `m2r` command: `check` reports diagnostics, `fix` applies the
//! available fixes.
//!
//! Exit status is 0 when nothing at error or warning severity remains, 1
//! when such diagnostics were reported, and 2 for usage, configuration or
//! I/O failures and for fixes that do not settle within the pass limit.

pub mod config;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use m2r_core::project::{load_project, ProjectOptions};
use m2r_core::rules::{DeprecationSwitch, RuleConfig};
use m2r_core::transform::{fix_project, write_atomically};
use m2r_core::{Diagnostic, DialectId, RuleId};

use config::{load_config, parse_profile, parse_rule, parse_rules, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}:{line}: {message}", path.display())]
    Config { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error("fixes still pending after {0} passes; the text was left at the last pass")]
    NotConverged(usize),
}

#[derive(Debug, Parser)]
#[command(name = "m2r", version, about = "Lint and migrate ISO Modula-2 sources to the revised dialect")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report diagnostics.
    Check(CommonArgs),
    /// Apply fixes in place, as a diff, or to standard output.
    Fix {
        #[command(flatten)]
        common: CommonArgs,
        /// Print a unified diff; leave files untouched.
        #[arg(long, conflicts_with = "stdout")]
        dry_run: bool,
        /// Print the fixed text of each file; leave files untouched.
        #[arg(long)]
        stdout: bool,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Language profile to check against.
    #[arg(long, value_parser = parse_profile)]
    profile: Option<DialectId>,
    /// Run only these rules (repeatable, comma-separated).
    #[arg(long = "enable-rule", value_delimiter = ',', value_parser = parse_rule)]
    enable_rule: Vec<RuleId>,
    /// Do not run these rules (repeatable, comma-separated).
    #[arg(long = "disable-rule", value_delimiter = ',', value_parser = parse_rule)]
    disable_rule: Vec<RuleId>,
    /// Accept deprecated constructs with a warning; optionally only for
    /// the listed rules.
    #[arg(long, num_args = 0..=1, require_equals = true, value_name = "RULES")]
    enable_deprecated: Option<Option<String>>,
    /// Report format.
    #[arg(long)]
    format: Option<Format>,
    /// Offer `x :: CARDINAL` for `TRUNC(x)`.
    #[arg(long)]
    assume_trunc_is_conversion: bool,
    /// Report imports of PRIVATETO modules by non-clients as errors.
    #[arg(long)]
    private_imports_as_errors: bool,
    /// Configuration file (default: m2r.conf, if present).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Files or directories to process.
    paths: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FixMode {
    InPlace,
    DryRun,
    Stdout,
}

/// Everything a run needs, after merging defaults, the config file and
/// flags.
#[derive(Debug, Clone)]
struct RunConfig {
    rules: RuleConfig,
    format: Format,
    fix: Option<FixMode>,
    paths: Vec<PathBuf>,
    project: ProjectOptions,
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (common, fix) = match cli.command {
        Command::Check(c) => (c, None),
        Command::Fix { common, dry_run, stdout } => {
            let mode = if dry_run {
                FixMode::DryRun
            } else if stdout {
                FixMode::Stdout
            } else {
                FixMode::InPlace
            };
            (common, Some(mode))
        }
    };
    let file = load_config(common.config.as_deref())?;

    let profile = common.profile.or(file.profile).unwrap_or(DialectId::Revised);
    let mut rules = if profile == DialectId::Legacy {
        RuleConfig::legacy()
    } else {
        RuleConfig::default()
    };
    rules.enabled = if common.enable_rule.is_empty() {
        file.enable_rules
    } else {
        Some(common.enable_rule.into_iter().collect())
    };
    rules.disabled = file.disable_rules;
    rules.disabled.extend(common.disable_rule);
    rules.deprecated = match common.enable_deprecated {
        Some(None) => DeprecationSwitch::All,
        Some(Some(list)) => DeprecationSwitch::Rules(parse_rules(&list).map_err(CliError::Usage)?),
        None => file.enable_deprecated.unwrap_or_default(),
    };
    rules.assume_trunc_is_conversion =
        common.assume_trunc_is_conversion || file.assume_trunc_is_conversion.unwrap_or(false);
    rules.private_imports_as_errors =
        common.private_imports_as_errors || file.private_imports_as_errors.unwrap_or(false);

    let mut paths = common.paths;
    if paths.is_empty() {
        paths = file.source_dirs;
    }
    if paths.is_empty() {
        paths.push(PathBuf::from("."));
    }
    let mut project = ProjectOptions {
        profile,
        external_modules: file.external_modules,
        ..ProjectOptions::default()
    };
    if let Some(ext) = file.extensions {
        project.extensions = ext;
    }
    Ok(RunConfig {
        rules,
        format: common.format.or(file.format).unwrap_or_default(),
        fix,
        paths,
        project,
    })
}

fn render(format: Format, diags: &[Diagnostic]) -> String {
    match format {
        Format::Text => report::text(diags),
        Format::Json => report::json(diags),
    }
}

fn status(diags: &[Diagnostic]) -> i32 {
    if diags.iter().any(Diagnostic::is_blocking) {
        1
    } else {
        0
    }
}

fn execute(config: RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    let model = load_project(&config.paths, config.project.clone());
    let Some(mode) = config.fix else {
        let diags = model.check(&config.rules);
        out.write_all(render(config.format, &diags).as_bytes()).map_err(io)?;
        return Ok(status(&diags));
    };

    let outcome = fix_project(model, &config.rules);
    match mode {
        FixMode::DryRun => {
            for c in &outcome.changes {
                out.write_all(c.diff().as_bytes()).map_err(io)?;
            }
        }
        FixMode::Stdout => {
            for c in &outcome.changes {
                out.write_all(c.fixed.text.as_bytes()).map_err(io)?;
            }
        }
        FixMode::InPlace => {
            for c in &outcome.changes {
                write_atomically(&c.path, &c.fixed)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", c.path.display())))?;
            }
        }
    }
    for path in &outcome.rejected {
        writeln!(err, "m2r: {}: fixes withheld; applying them would break the text", path.display()).map_err(io)?;
    }
    let remaining: Vec<Diagnostic> = outcome.remaining.clone();
    let report = render(config.format, &remaining);
    if mode == FixMode::InPlace {
        out.write_all(report.as_bytes()).map_err(io)?;
    } else {
        err.write_all(report.as_bytes()).map_err(io)?;
    }
    if !outcome.converged {
        return Err(CliError::NotConverged(outcome.passes));
    }
    Ok(status(&remaining))
}

/// Run with explicit output streams; returns the exit status.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = resolve(cli).and_then(|c| execute(c, out, err));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "m2r: {e}");
            2
        }
    }
}

/// Run against the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run_with(args, &mut out, &mut err);
    let _ = out.flush();
    code
}
