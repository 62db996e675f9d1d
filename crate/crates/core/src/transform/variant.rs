use std::collections::BTreeSet;

use thiserror::Error;

use crate::rules::RuleInput;
use crate::sema::Root;
use crate::span::SourceSpan;
use crate::syntax::visit::{self, Visitor};
use crate::syntax::{DeclKind, Declaration, Designator, FieldItem, RecordType, Selector, TypeKind};

use super::FixPlan;

/// Why a variant record cannot be rewritten mechanically.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotFixable {
    #[error("the record is not the whole right-hand side of a type declaration")]
    Anonymous,
    #[error("the record already has a base type")]
    HasBase,
    #[error("the record has more than one variant part")]
    MultipleVariantParts,
    #[error("a variant contains a nested variant part")]
    Nested,
    #[error("the variant part has an ELSE arm")]
    ElsePart,
    #[error("variant labels must each be a single identifier")]
    LabelNotIdentifier,
    #[error("the generated name `{0}` is already in use")]
    Collision(String),
    #[error("comments inside the declaration would be lost")]
    Comments,
}

/// The replacement declarations for one variant record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantRewrite {
    pub declarations: Vec<String>,
    pub fix: FixPlan,
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn fields_text(input: &RuleInput<'_>, fields: &[FieldItem]) -> String {
    let parts: Vec<String> = fields
        .iter()
        .filter_map(|f| match f {
            FieldItem::Fixed { names, ty, .. } => Some(format!(
                "{} : {}",
                names.iter().map(|n| n.name.as_str()).collect::<Vec<_>>().join(", "),
                input.text(ty.span)
            )),
            FieldItem::Variant(_) => None,
        })
        .collect();
    if parts.is_empty() {
        String::new()
    } else {
        format!("{} ", parts.join("; "))
    }
}

fn field_type_spans(fields: &[FieldItem], out: &mut Vec<SourceSpan>) {
    for f in fields {
        match f {
            FieldItem::Fixed { ty, .. } => out.push(ty.span),
            FieldItem::Variant(v) => {
                for arm in &v.variants {
                    field_type_spans(&arm.fields, out);
                }
            }
        }
    }
}

/// Rewrite `Name = RECORD ... CASE ... END END;` as a base record with no
/// variant fields plus one extension per arm, named `Name` followed by
/// the capitalized label.
pub fn transform_variant_record(decl: &Declaration, input: &RuleInput<'_>) -> Result<VariantRewrite, NotFixable> {
    let DeclKind::Type { name, ty } = &decl.kind else {
        return Err(NotFixable::Anonymous);
    };
    let TypeKind::Record(rec) = &ty.kind else {
        return Err(NotFixable::Anonymous);
    };
    check_simple(rec)?;
    let vp = rec.variant_part().ok_or(NotFixable::Anonymous)?;

    let mut names = BTreeSet::new();
    let mut arms = Vec::new();
    for v in &vp.variants {
        let label = match v.labels.as_slice() {
            [l] => l.as_qualident().filter(|q| q.is_simple()),
            _ => None,
        }
        .ok_or(NotFixable::LabelNotIdentifier)?;
        let generated = format!("{}{}", name.name, capitalize(&label.first().name));
        if generated == name.name || input.symbols.declares(&generated) || !names.insert(generated.clone()) {
            return Err(NotFixable::Collision(generated));
        }
        arms.push((generated, &v.fields));
    }

    let mut keep = Vec::new();
    field_type_spans(&rec.fields, &mut keep);
    if input.loses_comments(decl.span, &keep) {
        return Err(NotFixable::Comments);
    }

    let mut declarations = vec![format!(
        "{} = RECORD (NIL) {}END;",
        name.name,
        fields_text(input, &rec.fields)
    )];
    for (generated, fields) in &arms {
        declarations.push(format!(
            "{generated} = RECORD ({}) {}END;",
            name.name,
            fields_text(input, fields)
        ));
    }

    let line_start = input.source[..decl.span.start].rfind('\n').map_or(0, |i| i + 1);
    let prefix = &input.source[line_start..decl.span.start];
    let separator = if prefix.chars().all(|c| c == ' ' || c == '\t') {
        format!("\n{prefix}")
    } else {
        " ".to_string()
    };
    let fix = FixPlan::single(decl.span, declarations.join(&separator));
    let fix = match &vp.tag_field {
        Some(tag) => {
            let sites = tag_uses(input, &tag.name);
            let mut note = format!(
                "tag field `{}` is dropped; rewrite code that selects on it as CASE type guards",
                tag.name
            );
            if !sites.is_empty() {
                let at: Vec<String> = sites.iter().map(|s| s.to_string()).collect();
                note.push_str(&format!("; uses at {}", at.join(", ")));
            }
            fix.with_note(note)
        }
        None => fix.with_note("rewrite code that depends on the overlay as CASE type guards"),
    };
    Ok(VariantRewrite { declarations, fix })
}

fn check_simple(rec: &RecordType) -> Result<(), NotFixable> {
    if rec.base.is_some() {
        return Err(NotFixable::HasBase);
    }
    if rec.variant_parts().count() > 1 {
        return Err(NotFixable::MultipleVariantParts);
    }
    let Some(vp) = rec.variant_part() else {
        return Ok(());
    };
    if vp.variants.iter().any(|v| v.nested().is_some()) {
        return Err(NotFixable::Nested);
    }
    if vp.else_part.is_some() {
        return Err(NotFixable::ElsePart);
    }
    Ok(())
}

/// Every designator that selects a field named `tag`.
fn tag_uses(input: &RuleInput<'_>, tag: &str) -> Vec<SourceSpan> {
    struct V<'a, 'b> {
        input: &'a RuleInput<'b>,
        tag: &'a str,
        sites: Vec<SourceSpan>,
    }
    impl Visitor for V<'_, '_> {
        fn visit_designator(&mut self, d: &Designator) {
            let hit = d.head.parts[1..].iter().find(|p| p.name == self.tag).map(|p| p.span).or_else(|| {
                d.selectors.iter().find_map(|s| match s {
                    Selector::Field(f) if f.name == self.tag => Some(f.span),
                    _ => None,
                })
            });
            let hit = hit.or_else(|| match self.input.symbols.designator_root(d) {
                Root::WithField { field, .. } if field == self.tag => Some(d.head.first().span),
                _ => None,
            });
            if let Some(s) = hit {
                self.sites.push(s);
            }
            visit::walk_designator(self, d);
        }
    }
    let mut v = V {
        input,
        tag,
        sites: Vec::new(),
    };
    visit::walk_unit(&mut v, input.unit);
    v.sites
}
