use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use similar::TextDiff;

use crate::diagnostic::{Diagnostic, RuleId};
use crate::lexer::DialectProfile;
use crate::project::{encode_source, ProjectModel, SourceText};
use crate::rules::RuleConfig;
use crate::syntax::parse_source;

use super::{apply_edits, plan_edits, DroppedFix};

/// Upper bound on check-and-fix rounds.
pub const MAX_PASSES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileChange {
    pub path: PathBuf,
    pub original: SourceText,
    pub fixed: SourceText,
}

impl FileChange {
    pub fn diff(&self) -> String {
        unified_diff(&self.path, &self.original.text, &self.fixed.text)
    }
}

#[derive(Debug, Clone)]
pub struct FixOutcome {
    pub changes: Vec<FileChange>,
    /// Diagnostics of the final text.
    pub remaining: Vec<Diagnostic>,
    /// Fixes that lost to an overlapping fix in the last pass that had any.
    pub dropped: Vec<DroppedFix>,
    /// Files whose fixes were abandoned because they broke the text.
    pub rejected: Vec<PathBuf>,
    pub passes: usize,
    /// False if fixes were still being produced after `MAX_PASSES`.
    pub converged: bool,
    /// The model of the final text.
    pub model: ProjectModel,
}

/// Count of front-end errors (lexical and syntax) in `text`.
fn front_errors(text: &str, profile: &DialectProfile) -> usize {
    let (_, diags) = parse_source(text, profile);
    diags
        .iter()
        .filter(|d| matches!(d.rule, RuleId::LexError | RuleId::SyntaxError))
        .count()
}

/// Check, apply the planned fixes, and repeat until no fix remains.
///
/// A file whose edited text would have more lexical or syntax errors than
/// before keeps its previous text and takes no further fixes.
pub fn fix_project(model: ProjectModel, config: &RuleConfig) -> FixOutcome {
    let options = model.options.clone();
    let profile = DialectProfile::for_id(options.profile);
    let originals: BTreeMap<PathBuf, SourceText> =
        model.units.iter().map(|u| (u.path.clone(), u.text.clone())).collect();
    let mut current = originals.clone();
    let mut frozen: BTreeSet<PathBuf> = BTreeSet::new();
    let mut dropped = Vec::new();
    let mut model = model;
    let mut passes = 0;
    let mut converged = false;
    let mut remaining;
    loop {
        remaining = model.check(config);
        let fixable: Vec<Diagnostic> = remaining
            .iter()
            .filter(|d| d.fix.is_some() && !frozen.contains(&d.file))
            .cloned()
            .collect();
        let planned = plan_edits(&fixable, config);
        if planned.is_empty() {
            converged = true;
            break;
        }
        if passes == MAX_PASSES {
            break;
        }
        passes += 1;
        dropped = planned.dropped.clone();
        let mut changed = false;
        for script in &planned.scripts {
            let Some(text) = current.get(&script.file) else {
                continue;
            };
            let next = match apply_edits(&text.text, script) {
                Ok(next) => next,
                Err(_) => {
                    frozen.insert(script.file.clone());
                    continue;
                }
            };
            if front_errors(&next, &profile) > front_errors(&text.text, &profile) {
                frozen.insert(script.file.clone());
                continue;
            }
            if next != text.text {
                let updated = text.with_text(next);
                current.insert(script.file.clone(), updated);
                changed = true;
            }
        }
        if !changed {
            converged = frozen.is_empty();
            break;
        }
        let files = current.iter().map(|(p, t)| (p.clone(), t.clone())).collect();
        let io = model.diagnostics.iter().filter(|d| d.rule == RuleId::IoError).cloned().collect::<Vec<_>>();
        model = ProjectModel::from_sources(files, options.clone());
        model.diagnostics.extend(io);
    }
    let changes = current
        .into_iter()
        .filter(|(p, t)| originals[p] != *t)
        .map(|(path, fixed)| FileChange {
            original: originals[&path].clone(),
            path,
            fixed,
        })
        .collect();
    FixOutcome {
        changes,
        remaining,
        dropped,
        rejected: frozen.into_iter().collect(),
        passes,
        converged,
        model,
    }
}

/// Unified diff of one file, `a/` and `b/` prefixed.
pub fn unified_diff(path: &Path, old: &str, new: &str) -> String {
    let name = path.display().to_string();
    TextDiff::from_lines(old, new)
        .unified_diff()
        .context_radius(3)
        .header(&format!("a/{name}"), &format!("b/{name}"))
        .to_string()
}

/// Replace `path` by way of a temporary file in the same directory, so
/// readers see either the old or the new contents.
pub fn write_atomically(path: &Path, text: &SourceText) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&encode_source(text))?;
    tmp.as_file().sync_all()?;
    if let Ok(meta) = std::fs::metadata(path) {
        std::fs::set_permissions(tmp.path(), meta.permissions())?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::project::ProjectOptions;

    fn project(files: &[(&str, &str)]) -> ProjectModel {
        let files = files
            .iter()
            .map(|(p, s)| (PathBuf::from(p), SourceText::utf8(*s)))
            .collect();
        ProjectModel::from_sources(files, ProjectOptions::default())
    }

    #[test]
    fn nested_fixes_converge() {
        let src = "MODULE M; VAR i: INTEGER; c: CARDINAL; BEGIN i := INT(CARD(VAL(CARDINAL, i))) END M.";
        let out = fix_project(project(&[("M.mod", src)]), &RuleConfig::default());
        assert!(out.converged);
        assert!(out.passes >= 2);
        assert_eq!(
            out.changes[0].fixed.text,
            "MODULE M; VAR i: INTEGER; c: CARDINAL; BEGIN i := ((i :: CARDINAL) :: CARDINAL) :: INTEGER END M."
        );
        assert!(out.remaining.is_empty(), "{:#?}", out.remaining);
    }

    #[test]
    fn second_run_changes_nothing() {
        let src = "MODULE M; VAR s: BITSET; BEGIN IF ~(s = {}) & (1 <> 2) THEN s := s - {1B} END END M.";
        let first = fix_project(project(&[("M.mod", src)]), &RuleConfig::default());
        let fixed = first.changes[0].fixed.text.clone();
        let second = fix_project(project(&[("M.mod", &fixed)]), &RuleConfig::default());
        assert!(second.changes.is_empty());
        assert_eq!(second.passes, 0);
    }

    #[test]
    fn legacy_profile_fixes_nothing() {
        let src = "MODULE M; BEGIN IF a <> b THEN END END M.";
        let out = fix_project(project(&[("M.mod", src)]), &RuleConfig::legacy());
        assert!(out.changes.is_empty());
        assert!(out.converged);
    }

    #[test]
    fn diff_and_atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("M.mod");
        std::fs::write(&path, "old\n").unwrap();
        write_atomically(&path, &SourceText::utf8("new\n")).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new\n");
        let d = unified_diff(Path::new("M.mod"), "a\nold\n", "a\nnew\n");
        assert!(d.starts_with("--- a/M.mod\n+++ b/M.mod\n"));
        assert!(d.contains("-old\n+new\n"));
    }
}
