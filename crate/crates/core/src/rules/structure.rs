use std::collections::BTreeMap;

use crate::diagnostic::{Action, Diagnostic, RuleId, Severity};
use crate::lexer::{Trivia, TriviaKind};
use crate::project::ProjectModel;
use crate::span::SourceSpan;
use crate::syntax::visit::{self, Visitor};
use crate::syntax::{parse_module_pragmas, DeclKind, Declaration, TypeExpr, TypeKind, UnitKind};
use crate::transform::{Edit, FixPlan};

use super::{finalize, Finding, RuleConfig, RuleInput};

/// S01: `ARRAY a OF ARRAY b OF T`.
pub(super) fn long_arrays(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    struct V<'a, 'b> {
        input: &'a RuleInput<'b>,
        out: &'a mut Vec<Finding>,
        inner: Vec<SourceSpan>,
    }
    impl Visitor for V<'_, '_> {
        fn visit_type(&mut self, t: &TypeExpr) {
            if let TypeKind::Array { element, .. } = &t.kind {
                if matches!(element.kind, TypeKind::Array { .. }) && !self.inner.contains(&t.span) {
                    self.chain(t);
                }
            }
            visit::walk_type(self, t);
        }
    }
    impl V<'_, '_> {
        fn chain(&mut self, head: &TypeExpr) {
            let mut links = Vec::new();
            let mut t = head;
            while let TypeKind::Array {
                dimensions, element, ..
            } = &t.kind
            {
                let TypeKind::Array { dimensions: inner, .. } = &element.kind else {
                    break;
                };
                let (Some(last), Some(first)) = (dimensions.last(), inner.first()) else {
                    break;
                };
                links.push(SourceSpan {
                    start: last.span.end,
                    end: first.span.start,
                    start_line: last.span.end_line,
                    start_col: last.span.end_col,
                    end_line: first.span.start_line,
                    end_col: first.span.start_col,
                });
                self.inner.push(element.span);
                t = element;
            }
            let fix = if links.iter().any(|l| self.input.loses_comments(*l, &[])) {
                None
            } else {
                FixPlan::new(links.iter().map(|l| Edit::new(*l, ", ")).collect())
            };
            let dims = links.len() + 1;
            let message = format!("nested ARRAY ... OF ARRAY is deprecated; list all {dims} index types in one ARRAY");
            let message = if links.is_empty() || fix.is_some() {
                message
            } else {
                format!("{message} (not fixed automatically: comments between the index types)")
            };
            self.out
                .push(Finding::new(RuleId::S01, Action::Deprecation, head.span, message).fix(fix));
        }
    }
    visit::walk_unit(
        &mut V {
            input,
            out,
            inner: Vec::new(),
        },
        input.unit,
    );
}

/// S03: every local module declaration.
pub(super) fn local_modules(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    struct V<'a>(&'a mut Vec<Finding>);
    impl Visitor for V<'_> {
        fn visit_decl(&mut self, d: &Declaration) {
            if let DeclKind::Module(m) = &d.kind {
                let span = d.span.head().cover(m.name.span);
                self.0.push(Finding::new(
                    RuleId::S03,
                    Action::Deprecation,
                    span,
                    format!("local module `{}` is deprecated; move it to a separate library module", m.name.name),
                ));
            }
            visit::walk_decl(self, d);
        }
    }
    visit::walk_unit(&mut V(out), input.unit);
}

/// S04 and S05 problems found while decoding header pragmas.
pub(super) fn pragmas(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    let trivia: Vec<Trivia> = input
        .unit
        .pragmas
        .iter()
        .map(|p| Trivia {
            kind: TriviaKind::Pragma,
            span: p.span,
            text: p.text.clone(),
        })
        .collect();
    let (_, diags) = parse_module_pragmas(input.unit, &trivia);
    out.extend(
        diags
            .into_iter()
            .map(|d| Finding::new(d.rule, d.action, d.span, d.message).base(d.severity)),
    );
}

/// S04: imports of a `PRIVATETO` module by a module it does not list.
pub fn check_private_imports(project: &ProjectModel, config: &RuleConfig) -> Vec<Diagnostic> {
    let mut per_file: BTreeMap<usize, Vec<Finding>> = BTreeMap::new();
    for edge in &project.graph.edges {
        let Some(clients) = project.private_clients(&edge.module) else {
            continue;
        };
        let unit = &project.units[edge.from].unit;
        let importer = &unit.name.name;
        let admitted = unit.kind == UnitKind::Implementation && clients.contains(importer);
        if admitted || *importer == edge.module {
            continue;
        }
        let listed = clients.iter().cloned().collect::<Vec<_>>().join(", ");
        per_file.entry(edge.from).or_default().push(
            Finding::new(
                RuleId::S04,
                Action::Warning,
                edge.span,
                format!(
                    "`{}` is private to the implementation of {listed}; this {} may not import it",
                    edge.module,
                    unit.kind.as_str()
                ),
            )
            .base(Severity::Warning),
        );
    }
    per_file
        .into_iter()
        .flat_map(|(i, f)| finalize(f, &project.units[i].path, config))
        .collect()
}
