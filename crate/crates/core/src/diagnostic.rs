//! Findings reported by every stage of the pipeline.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::span::SourceSpan;
use crate::transform::FixPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the revision treats the facility a diagnostic points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Warning,
    Change,
    Deprecation,
    Removal,
    /// The construct is accepted by the revised language (and only there).
    Acceptance,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Warning => "warning",
            Action::Change => "change",
            Action::Deprecation => "deprecation",
            Action::Removal => "removal",
            Action::Acceptance => "acceptance",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! rule_ids {
    ($($variant:ident => ($id:literal, $title:literal),)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RuleId {
            $($variant,)*
        }

        impl RuleId {
            pub const ALL: &'static [RuleId] = &[$(RuleId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RuleId::$variant => $id,)*
                }
            }

            pub fn title(self) -> &'static str {
                match self {
                    $(RuleId::$variant => $title,)*
                }
            }
        }

        impl FromStr for RuleId {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($id => Ok(RuleId::$variant),)*
                    other => Err(format!("unknown rule id `{other}`")),
                }
            }
        }
    };
}

rule_ids! {
    L01 => ("M2R-L01", "synonym symbol"),
    L02 => ("M2R-L02", "octal literal"),
    L03 => ("M2R-L03", "set difference written as minus"),
    S01 => ("M2R-S01", "long-form multi-dimensional array"),
    S03 => ("M2R-S03", "local module"),
    S04 => ("M2R-S04", "private-use module import"),
    S05 => ("M2R-S05", "foreign definition module directive"),
    P04 => ("M2R-P04", "removed conversion function"),
    M04 => ("M2R-M04", "write to imported variable"),
    M05 => ("M2R-M05", "cast clutter around SHIFT"),
    M06 => ("M2R-M06", "variant record"),
    D01 => ("M2R-D01", "revised-only construct in legacy source"),
    LexError => ("M2R-X01", "lexical error"),
    SyntaxError => ("M2R-X02", "syntax error"),
    IoError => ("M2R-X03", "unreadable file"),
    ProjectStructure => ("M2R-X04", "module structure"),
    DuplicateDeclaration => ("M2R-X05", "duplicate declaration"),
}

impl RuleId {
    /// Rules of the migration catalogue, as opposed to front-end failures.
    pub fn is_catalogue(self) -> bool {
        !matches!(
            self,
            RuleId::LexError
                | RuleId::SyntaxError
                | RuleId::IoError
                | RuleId::ProjectStructure
                | RuleId::DuplicateDeclaration
        )
    }

    /// Order in which overlapping fixes win: lower applies first.
    pub fn fix_priority(self) -> u8 {
        match self {
            RuleId::L01 => 0,
            RuleId::L02 => 1,
            RuleId::L03 => 2,
            RuleId::P04 => 3,
            RuleId::S01 => 4,
            RuleId::M05 => 5,
            RuleId::M06 => 6,
            _ => u8::MAX,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: RuleId,
    pub severity: Severity,
    pub action: Action,
    pub span: SourceSpan,
    pub message: String,
    pub fix: Option<FixPlan>,
    pub file: PathBuf,
}

impl Diagnostic {
    pub fn new(
        rule: RuleId,
        severity: Severity,
        action: Action,
        span: SourceSpan,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            rule,
            severity,
            action,
            span,
            message: message.into(),
            fix: None,
            file: PathBuf::new(),
        }
    }

    pub fn error(rule: RuleId, span: SourceSpan, message: impl Into<String>) -> Self {
        Self::new(rule, Severity::Error, Action::Warning, span, message)
    }

    pub fn with_fix(mut self, fix: FixPlan) -> Self {
        self.fix = Some(fix);
        self
    }

    pub fn with_file(mut self, file: impl Into<PathBuf>) -> Self {
        self.file = file.into();
        self
    }

    pub fn is_blocking(&self) -> bool {
        matches!(self.severity, Severity::Error | Severity::Warning)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {} [{}] {}",
            self.file.display(),
            self.span.start_line,
            self.span.start_col,
            self.severity,
            self.rule,
            self.message
        )
    }
}

/// Canonical report order: file, then span start, then rule.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (&a.file, a.span.start, a.span.end, a.rule, &a.message)
            .cmp(&(&b.file, b.span.start, b.span.end, b.rule, &b.message))
    });
}
