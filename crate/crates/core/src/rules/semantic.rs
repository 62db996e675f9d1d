use std::collections::HashSet;

use crate::diagnostic::{Action, RuleId, Severity};
use crate::lexer::{DialectId, REVISED_ADDITIONS};
use crate::sema::{
    classify_nil_compatibility, find_imported_writes, find_nil_sites, NilCompatibility, Origin, SymbolKind,
    Target, TypeClass,
};
use crate::span::SourceSpan;
use crate::syntax::visit::{self, Visitor};
use crate::syntax::*;
use crate::transform::{transform_variant_record, Edit, FixPlan, NotFixable};

use super::{Finding, RuleInput};

/// M04: assignments and `VAR` arguments that write imported variables.
pub(super) fn imported_writes(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    for w in find_imported_writes(input.unit, input.symbols) {
        let how = if w.via_var_param {
            "passing it as a VAR argument"
        } else {
            "assigning to it"
        };
        out.push(Finding::new(
            RuleId::M04,
            Action::Deprecation,
            w.span,
            format!(
                "`{}.{}` is imported; {how} is deprecated; export a procedure from `{}` that updates it",
                w.module, w.name, w.module
            ),
        ));
    }
}

/// The member of `SYSTEM` that `d` names, if it does.
fn system_member<'a>(input: &'a RuleInput<'_>, d: &'a Designator) -> Option<&'a str> {
    if !d.selectors.is_empty() {
        return None;
    }
    let scope = input.symbols.scope_at(d.span.start);
    let (r, rest) = input.symbols.resolve_prefix(scope, &d.head.parts)?;
    let sym = r.symbol();
    match rest {
        [] if r.table.module == "SYSTEM" => Some(&sym.name),
        [] => match &sym.origin {
            Origin::Imported { module } if module == "SYSTEM" => Some(&sym.name),
            _ => None,
        },
        [member] if matches!(&sym.target, Some(Target::Module(m)) if m == "SYSTEM") => Some(&member.name),
        _ => None,
    }
}

fn is_bitset_family(input: &RuleInput<'_>, q: &QualIdent) -> bool {
    let scope = input.symbols.scope_at(q.span.start);
    let info = input.symbols.named_type_info(scope, q);
    if info.class == TypeClass::Set {
        return true;
    }
    let n = &q.last().name;
    info.class == TypeClass::Unknown
        && n.strip_prefix("BITSET").is_some_and(|d| d.bytes().all(|b| b.is_ascii_digit()))
}

/// `CAST(T, x)` split into its parts.
fn as_cast<'a>(input: &RuleInput<'_>, e: &'a Expr) -> Option<(&'a QualIdent, &'a Expr)> {
    let ExprKind::Call { callee, args } = &e.kind else {
        return None;
    };
    if system_member(input, callee) != Some("CAST") {
        return None;
    }
    match args.as_slice() {
        [t, x] => match t.as_designator() {
            Some(d) if d.selectors.is_empty() => Some((&d.head, x)),
            _ => None,
        },
        _ => None,
    }
}

/// M05: `CAST(T, SHIFT(CAST(BITSET, e), n))` and `CAST` to the operand's
/// own type.
pub(super) fn shift_casts(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    struct V<'a, 'b> {
        input: &'a RuleInput<'b>,
        out: &'a mut Vec<Finding>,
        inner: HashSet<usize>,
    }
    impl Visitor for V<'_, '_> {
        fn visit_expr(&mut self, e: &Expr) {
            if !self.inner.contains(&e.span.start) {
                if let Some((t, x)) = as_cast(self.input, e) {
                    if !self.shift_pattern(e, t, x) {
                        self.identity(e, t, x);
                    }
                }
            }
            visit::walk_expr(self, e);
        }
    }
    impl V<'_, '_> {
        fn canonical(&self, t: &QualIdent) -> Option<String> {
            let scope = self.input.symbols.scope_at(t.span.start);
            self.input.symbols.named_type_info(scope, t).canonical
        }

        fn shift_pattern(&mut self, outer: &Expr, t: &QualIdent, x: &Expr) -> bool {
            let shift = x.strip_parens();
            let ExprKind::Call { callee, args } = &shift.kind else {
                return false;
            };
            if system_member(self.input, callee) != Some("SHIFT") || args.len() != 2 {
                return false;
            }
            let Some((b, e)) = as_cast(self.input, &args[0]) else {
                return false;
            };
            if !is_bitset_family(self.input, b) {
                return false;
            }
            self.inner.insert(args[0].span.start);
            let e = e.strip_parens();
            let e_type = self.input.symbols.expr_info(e).canonical;
            let same_type = match (self.canonical(t), &e_type) {
                (Some(a), Some(b)) => a == *b,
                _ => true,
            };
            let keeps = [shift.span];
            let fix = if !same_type
                || self.input.loses_comments(outer.span, &keeps)
                || self.input.loses_comments(args[0].span, &[e.span])
            {
                None
            } else {
                FixPlan::new(vec![
                    Edit::new(between(outer.span, shift.span, true), ""),
                    Edit::new(args[0].span, self.input.text(e.span)),
                    Edit::new(between(outer.span, shift.span, false), ""),
                ])
            };
            let message = if same_type {
                format!(
                    "SHIFT accepts whole numbers directly; the casts through `{}` are unnecessary",
                    b.dotted()
                )
            } else {
                format!(
                    "SHIFT accepts whole numbers directly, but the operand is not a `{}`; remove the casts by hand",
                    t.dotted()
                )
            };
            self.out
                .push(Finding::new(RuleId::M05, Action::Acceptance, outer.span, message).fix(fix));
            true
        }

        fn identity(&mut self, outer: &Expr, t: &QualIdent, x: &Expr) {
            let x = x.strip_parens();
            let (Some(target), Some(source)) = (self.canonical(t), self.input.symbols.expr_info(x).canonical) else {
                return;
            };
            if target != source {
                return;
            }
            let fix = if self.input.loses_comments(outer.span, &[x.span]) {
                None
            } else {
                let text = self.input.text(x.span);
                let text = if x.is_primary() {
                    text.to_string()
                } else {
                    format!("({text})")
                };
                Some(FixPlan::single(outer.span, text))
            };
            self.out.push(
                Finding::new(
                    RuleId::M05,
                    Action::Acceptance,
                    outer.span,
                    format!("CAST to `{}` is redundant; the operand already has that type", t.dotted()),
                )
                .fix(fix),
            );
        }
    }
    visit::walk_unit(
        &mut V {
            input,
            out,
            inner: HashSet::new(),
        },
        input.unit,
    );
}

/// The part of `outer` before (`before = true`) or after `inner`.
fn between(outer: SourceSpan, inner: SourceSpan, before: bool) -> SourceSpan {
    if before {
        SourceSpan {
            end: inner.start,
            end_line: inner.start_line,
            end_col: inner.start_col,
            ..outer
        }
    } else {
        SourceSpan {
            start: inner.end,
            start_line: inner.end_line,
            start_col: inner.end_col,
            ..outer
        }
    }
}

/// M06: records with a variant part.
pub(super) fn variant_records(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    struct V<'a, 'b> {
        input: &'a RuleInput<'b>,
        out: &'a mut Vec<Finding>,
        handled: HashSet<usize>,
    }
    impl V<'_, '_> {
        fn report(&mut self, span: SourceSpan, result: Result<FixPlan, NotFixable>) {
            let base = "variant records are removed; declare an extensible record per variant";
            let (message, fix) = match result {
                Ok(fix) => (base.to_string(), Some(fix)),
                Err(why) => (format!("{base} (not fixed automatically: {why})"), None),
            };
            self.out
                .push(Finding::new(RuleId::M06, Action::Removal, span, message).fix(fix));
        }
    }
    impl Visitor for V<'_, '_> {
        fn visit_decl(&mut self, d: &Declaration) {
            if let DeclKind::Type { ty, .. } = &d.kind {
                if let TypeKind::Record(rec) = &ty.kind {
                    if rec.variant_part().is_some() {
                        self.handled.insert(ty.span.start);
                        let result = transform_variant_record(d, self.input).map(|r| r.fix);
                        self.report(d.span, result);
                    }
                }
            }
            visit::walk_decl(self, d);
        }

        fn visit_type(&mut self, t: &TypeExpr) {
            if let TypeKind::Record(rec) = &t.kind {
                if rec.variant_part().is_some() && !self.handled.contains(&t.span.start) {
                    self.report(t.span, Err(NotFixable::Anonymous));
                }
            }
            visit::walk_type(self, t);
        }
    }
    visit::walk_unit(
        &mut V {
            input,
            out,
            handled: HashSet::new(),
        },
        input.unit,
    );
}

/// D01: revised-language constructs in code checked against the legacy
/// profile.
pub(super) fn revised_constructs(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    struct V<'a, 'b> {
        input: &'a RuleInput<'b>,
        out: &'a mut Vec<Finding>,
    }
    impl V<'_, '_> {
        fn push(&mut self, span: SourceSpan, message: String) {
            self.out.push(
                Finding::new(RuleId::D01, Action::Acceptance, span, message).base(Severity::Error),
            );
        }

        fn revised_name(&mut self, q: &QualIdent) {
            let name = &q.first().name;
            if !q.is_simple() || !REVISED_ADDITIONS.contains(&name.as_str()) {
                return;
            }
            let scope = self.input.symbols.scope_at(q.span.start);
            if self.input.symbols.lookup(scope, name).is_none() {
                self.push(q.span, format!("`{name}` is not a legacy pervasive identifier"));
            }
        }
    }
    impl Visitor for V<'_, '_> {
        fn visit_expr(&mut self, e: &Expr) {
            match &e.kind {
                ExprKind::TypeConversion { op_span, target, .. } => {
                    self.push(*op_span, "the conversion operator `::` is not available in the legacy language".into());
                    self.revised_name(target);
                }
                ExprKind::Binary {
                    op: BinaryOp::Diff,
                    op_span,
                    ..
                } => self.push(*op_span, "set difference `\\` is not available in the legacy language".into()),
                _ => {}
            }
            visit::walk_expr(self, e);
        }

        fn visit_type(&mut self, t: &TypeExpr) {
            match &t.kind {
                TypeKind::Record(RecordType { base: Some(_), .. }) => {
                    self.push(t.span, "extensible records are not available in the legacy language".into())
                }
                TypeKind::Named(q) => self.revised_name(q),
                _ => {}
            }
            visit::walk_type(self, t);
        }

        fn visit_stmt(&mut self, s: &Stmt) {
            if let StmtKind::Case { arms, .. } = &s.kind {
                for label in arms.iter().flat_map(|a| &a.labels) {
                    let Some(q) = label.as_qualident() else {
                        continue;
                    };
                    let scope = self.input.symbols.scope_at(q.span.start);
                    let is_type = self
                        .input
                        .symbols
                        .resolve_qualident(scope, q)
                        .is_some_and(|r| r.symbol().kind == SymbolKind::Type);
                    if is_type {
                        self.push(label.span, "type-guard CASE labels are not available in the legacy language".into());
                    }
                }
            }
            visit::walk_stmt(self, s);
        }
    }
    let mut v = V { input, out };
    visit::walk_unit(&mut v, input.unit);
    for id in &input.symbols.unresolved {
        if REVISED_ADDITIONS.contains(&id.name.as_str()) {
            v.push(id.span, format!("`{}` is not a legacy pervasive identifier", id.name));
        }
    }
    for site in find_nil_sites(input.unit, input.symbols) {
        if classify_nil_compatibility(site.other, DialectId::Legacy) == NilCompatibility::LegacyRestricted {
            out.push(
                Finding::new(
                    RuleId::D01,
                    Action::Acceptance,
                    site.span,
                    "NIL is compatible with opaque and procedure types only in the revised language",
                )
                .base(Severity::Info),
            );
        }
    }
}
