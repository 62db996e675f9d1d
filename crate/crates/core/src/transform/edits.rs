use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::diagnostic::{Diagnostic, RuleId};
use crate::rules::RuleConfig;
use crate::span::SourceSpan;

use super::TransformError;

/// Replace the bytes covered by `span` with `replacement`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub span: SourceSpan,
    pub replacement: String,
}

impl Edit {
    pub fn new(span: SourceSpan, replacement: impl Into<String>) -> Self {
        Edit {
            span,
            replacement: replacement.into(),
        }
    }

    fn conflicts_with(&self, other: &Edit) -> bool {
        let (a, b) = (&self.span, &other.span);
        if a.is_empty() || b.is_empty() {
            a.start <= b.end && b.start <= a.end
        } else {
            a.overlaps(b)
        }
    }
}

/// The edits that resolve one diagnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixPlan {
    pub edits: Vec<Edit>,
    pub note: Option<String>,
}

impl FixPlan {
    /// Builds a plan, sorting its edits. Returns `None` if any two edits
    /// overlap.
    pub fn new(mut edits: Vec<Edit>) -> Option<Self> {
        edits.sort_by_key(|e| (e.span.start, e.span.end));
        let disjoint = edits
            .windows(2)
            .all(|w| !w[0].conflicts_with(&w[1]));
        disjoint.then_some(FixPlan { edits, note: None })
    }

    pub fn single(span: SourceSpan, replacement: impl Into<String>) -> Self {
        FixPlan {
            edits: vec![Edit::new(span, replacement)],
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn conflicts_with(&self, accepted: &[Edit]) -> bool {
        self.edits
            .iter()
            .any(|e| accepted.iter().any(|a| e.conflicts_with(a)))
    }

    fn extent(&self) -> usize {
        match (self.edits.first(), self.edits.last()) {
            (Some(first), Some(last)) => last.span.end - first.span.start,
            _ => 0,
        }
    }
}

/// All accepted edits for one file, sorted and pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EditScript {
    pub file: PathBuf,
    pub edits: Vec<Edit>,
}

impl EditScript {
    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }
}

/// A fix that lost an overlap conflict in this pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedFix {
    pub file: PathBuf,
    pub rule: RuleId,
    pub span: SourceSpan,
    pub blocked_by: RuleId,
}

#[derive(Debug, Clone, Default)]
pub struct PlannedEdits {
    pub scripts: Vec<EditScript>,
    pub dropped: Vec<DroppedFix>,
}

impl PlannedEdits {
    pub fn is_empty(&self) -> bool {
        self.scripts.iter().all(EditScript::is_empty)
    }

    pub fn for_file(&self, file: &std::path::Path) -> Option<&EditScript> {
        self.scripts.iter().find(|s| s.file == file)
    }
}

/// Collect the fixes of enabled rules into one script per file.
///
/// Fixes are taken in rule priority order, innermost first within a rule;
/// a fix that overlaps one already taken is dropped and left for the next
/// pass to re-derive.
pub fn plan_edits(diagnostics: &[Diagnostic], config: &RuleConfig) -> PlannedEdits {
    let mut by_file: BTreeMap<&PathBuf, Vec<&Diagnostic>> = BTreeMap::new();
    for d in diagnostics {
        if d.fix.is_some() && config.is_enabled(d.rule) {
            by_file.entry(&d.file).or_default().push(d);
        }
    }
    let mut planned = PlannedEdits::default();
    for (file, mut diags) in by_file {
        diags.sort_by_key(|d| {
            let fix = d.fix.as_ref().expect("filtered above");
            (d.rule.fix_priority(), fix.extent(), d.span.start)
        });
        let mut accepted: Vec<Edit> = Vec::new();
        let mut owners: Vec<RuleId> = Vec::new();
        for d in diags {
            let fix = d.fix.as_ref().expect("filtered above");
            if fix.conflicts_with(&accepted) {
                let blocked_by = accepted
                    .iter()
                    .zip(&owners)
                    .find(|(a, _)| fix.edits.iter().any(|e| e.conflicts_with(a)))
                    .map(|(_, r)| *r)
                    .unwrap_or(d.rule);
                planned.dropped.push(DroppedFix {
                    file: file.clone(),
                    rule: d.rule,
                    span: d.span,
                    blocked_by,
                });
                continue;
            }
            for e in &fix.edits {
                accepted.push(e.clone());
                owners.push(d.rule);
            }
        }
        accepted.sort_by_key(|e| (e.span.start, e.span.end));
        planned.scripts.push(EditScript {
            file: file.clone(),
            edits: accepted,
        });
    }
    planned
}

/// Apply a script to the text it was planned against. Bytes outside the
/// edited spans are copied unchanged.
pub fn apply_edits(source: &str, script: &EditScript) -> Result<String, TransformError> {
    let mut out = String::with_capacity(source.len());
    let mut cursor = 0;
    for edit in &script.edits {
        let (start, end) = (edit.span.start, edit.span.end);
        if start > end || end > source.len() {
            return Err(TransformError::SpanOutOfBounds {
                start,
                end,
                len: source.len(),
            });
        }
        if start < cursor {
            return Err(TransformError::OverlappingEdits { offset: start });
        }
        if !source.is_char_boundary(start) || !source.is_char_boundary(end) {
            return Err(TransformError::SpanOutOfBounds {
                start,
                end,
                len: source.len(),
            });
        }
        out.push_str(&source[cursor..start]);
        out.push_str(&edit.replacement);
        cursor = end;
    }
    out.push_str(&source[cursor..]);
    Ok(out)
}
