//! Turning diagnostics into text edits.

mod edits;
mod fix;
mod variant;

pub use edits::{apply_edits, plan_edits, DroppedFix, Edit, EditScript, FixPlan, PlannedEdits};
pub use fix::{fix_project, unified_diff, write_atomically, FileChange, FixOutcome, MAX_PASSES};
pub use variant::{transform_variant_record, NotFixable, VariantRewrite};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("edit {start}..{end} lies outside the {len}-byte source")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("edits overlap at byte {offset}")]
    OverlappingEdits { offset: usize },
}
