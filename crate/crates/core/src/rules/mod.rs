//! The rule catalogue.
//!
//! Each rule reports one diagnostic per occurrence of the facility it
//! targets. Severity depends on the profile and the rule's action: under
//! the legacy profile every catalogue rule is advisory except D01.

mod config;
mod conversion;
mod lexical;
mod semantic;
mod structure;

pub use config::{DeprecationSwitch, RuleConfig};
pub use structure::check_private_imports;

use std::path::Path;

use crate::diagnostic::{sort_diagnostics, Action, Diagnostic, RuleId, Severity};
use crate::lexer::{Token, TriviaKind};
use crate::sema::ScopedSymbols;
use crate::span::SourceSpan;
use crate::syntax::CompilationUnit;
use crate::transform::FixPlan;

/// Everything the per-file rules look at.
#[derive(Debug, Clone, Copy)]
pub struct RuleInput<'a> {
    pub path: &'a Path,
    pub source: &'a str,
    pub tokens: &'a [Token],
    pub unit: &'a CompilationUnit,
    pub symbols: &'a ScopedSymbols,
}

impl RuleInput<'_> {
    pub(crate) fn text(&self, span: SourceSpan) -> &str {
        &self.source[span.start..span.end]
    }

    /// True if a comment or pragma lies inside `span` but outside every
    /// span in `keep`; such text would be lost by replacing `span`.
    pub(crate) fn loses_comments(&self, span: SourceSpan, keep: &[SourceSpan]) -> bool {
        self.tokens.iter().any(|t| {
            t.leading_trivia.iter().any(|tr| {
                tr.kind != TriviaKind::Whitespace
                    && span.contains(&tr.span)
                    && !keep.iter().any(|k| k.contains(&tr.span))
            })
        })
    }
}

/// A rule hit before profile policy is applied.
#[derive(Debug, Clone)]
pub(crate) struct Finding {
    pub rule: RuleId,
    pub action: Action,
    pub span: SourceSpan,
    pub message: String,
    pub fix: Option<FixPlan>,
    /// Severity for rules whose action does not fix it (warnings, D01).
    pub base: Severity,
    /// Force info severity (e.g. L03 without type evidence).
    pub advisory: bool,
}

impl Finding {
    pub fn new(rule: RuleId, action: Action, span: SourceSpan, message: impl Into<String>) -> Self {
        Finding {
            rule,
            action,
            span,
            message: message.into(),
            fix: None,
            base: Severity::Warning,
            advisory: false,
        }
    }

    pub fn fix(mut self, fix: Option<FixPlan>) -> Self {
        self.fix = fix;
        self
    }

    pub fn base(mut self, severity: Severity) -> Self {
        self.base = severity;
        self
    }

    pub fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }
}

/// Severity of a finding under `config`.
pub fn policy_severity(rule: RuleId, action: Action, base: Severity, config: &RuleConfig) -> Severity {
    if !config.is_revised() {
        return if rule == RuleId::D01 { base } else { Severity::Info };
    }
    match action {
        Action::Removal | Action::Change => Severity::Error,
        Action::Deprecation if config.deprecated.covers(rule) => Severity::Warning,
        Action::Deprecation => Severity::Error,
        Action::Acceptance => Severity::Info,
        Action::Warning => {
            if rule == RuleId::S04 && base == Severity::Warning && config.private_imports_as_errors {
                Severity::Error
            } else {
                base
            }
        }
    }
}

pub(crate) fn finalize(findings: Vec<Finding>, path: &Path, config: &RuleConfig) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = findings
        .into_iter()
        .filter(|f| config.is_enabled(f.rule))
        .map(|f| {
            let severity = if f.advisory {
                Severity::Info
            } else {
                policy_severity(f.rule, f.action, f.base, config)
            };
            let mut d = Diagnostic::new(f.rule, severity, f.action, f.span, f.message).with_file(path);
            if config.is_revised() {
                d.fix = f.fix;
            }
            d
        })
        .collect();
    sort_diagnostics(&mut out);
    out
}

/// Run every enabled per-file rule over one analyzed unit.
pub fn run_rules(input: &RuleInput<'_>, config: &RuleConfig) -> Vec<Diagnostic> {
    let mut findings = Vec::new();
    lexical::synonyms(input, &mut findings);
    lexical::octal_literals(input, &mut findings);
    lexical::set_difference(input, &mut findings);
    structure::long_arrays(input, &mut findings);
    structure::local_modules(input, &mut findings);
    structure::pragmas(input, &mut findings);
    conversion::conversion_functions(input, config, &mut findings);
    semantic::imported_writes(input, &mut findings);
    semantic::shift_casts(input, &mut findings);
    semantic::variant_records(input, &mut findings);
    if !config.is_revised() {
        semantic::revised_constructs(input, &mut findings);
    }
    finalize(findings, input.path, config)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::lexer::{tokenize, DialectProfile};
    use crate::sema::build_symbols;
    use crate::syntax::parse_compilation_unit;

    pub fn check(src: &str, config: &RuleConfig) -> Vec<Diagnostic> {
        let profile = DialectProfile::for_id(config.profile);
        let lexed = tokenize(src, &profile);
        assert!(lexed.errors.is_empty(), "{:?}", lexed.errors);
        let (unit, diags) = parse_compilation_unit(&lexed.tokens);
        let syntax: Vec<_> = diags.iter().filter(|d| !d.rule.is_catalogue()).collect();
        assert!(syntax.is_empty(), "{syntax:#?}");
        let symbols = build_symbols(&unit, &profile, None);
        let input = RuleInput {
            path: Path::new("t.mod"),
            source: src,
            tokens: &lexed.tokens,
            unit: &unit,
            symbols: &symbols,
        };
        run_rules(&input, config)
    }

    pub fn revised(src: &str) -> Vec<Diagnostic> {
        check(src, &RuleConfig::default())
    }

    pub fn legacy(src: &str) -> Vec<Diagnostic> {
        check(src, &RuleConfig::legacy())
    }

    pub fn of(diags: &[Diagnostic], rule: RuleId) -> Vec<Diagnostic> {
        diags.iter().filter(|d| d.rule == rule).cloned().collect()
    }

    /// Apply every fix of `diags` to `src` (they must not overlap).
    pub fn fixed(src: &str, diags: &[Diagnostic]) -> String {
        let planned = crate::transform::plan_edits(diags, &RuleConfig::default());
        match planned.scripts.first() {
            Some(script) => crate::transform::apply_edits(src, script).unwrap(),
            None => src.to_string(),
        }
    }
}
