//! Linter and source-to-source migrator from ISO Modula-2 (IS 10514-1) to
//! the revised dialect.

pub mod diagnostic;
pub mod lexer;
pub mod project;
pub mod rules;
pub mod sema;
pub mod span;
pub mod syntax;
pub mod transform;

pub use diagnostic::{Action, Diagnostic, RuleId, Severity};
pub use lexer::{DialectId, DialectProfile};
pub use span::SourceSpan;
