use std::collections::HashSet;

use crate::diagnostic::{Action, RuleId};
use crate::lexer::REMOVED_CONVERSIONS;
use crate::sema::{Origin, Root};
use crate::syntax::visit::{self, Visitor};
use crate::syntax::{Designator, Expr, ExprKind};
use crate::transform::FixPlan;

use super::{Finding, RuleConfig, RuleInput};

/// Target type of the one-argument conversions.
fn target_of(name: &str) -> Option<&'static str> {
    Some(match name {
        "INT" => "INTEGER",
        "CARD" => "CARDINAL",
        "FLOAT" => "REAL",
        "LFLOAT" => "LONGREAL",
        "TRUNC" => "CARDINAL",
        _ => return None,
    })
}

/// The pervasive conversion function `callee` names, if any.
fn removed_conversion<'a>(input: &RuleInput<'_>, callee: &'a Designator) -> Option<&'a str> {
    if !callee.head.is_simple() || !callee.selectors.is_empty() {
        return None;
    }
    let name = callee.head.first().name.as_str();
    if !REMOVED_CONVERSIONS.contains(&name) {
        return None;
    }
    match input.symbols.designator_root(callee) {
        Root::Symbol(r) if r.symbol().origin == Origin::Pervasive => Some(name),
        _ => None,
    }
}

/// P04: `INT`, `CARD`, `FLOAT`, `LFLOAT`, `TRUNC` and `VAL`.
pub(super) fn conversion_functions(input: &RuleInput<'_>, config: &RuleConfig, out: &mut Vec<Finding>) {
    struct V<'a, 'b> {
        input: &'a RuleInput<'b>,
        config: &'a RuleConfig,
        out: &'a mut Vec<Finding>,
        conversion_operands: HashSet<usize>,
    }
    impl Visitor for V<'_, '_> {
        fn visit_expr(&mut self, e: &Expr) {
            match &e.kind {
                ExprKind::TypeConversion { operand, .. } => {
                    self.conversion_operands.insert(operand.span.start);
                }
                ExprKind::Call { callee, args } => {
                    if let Some(name) = removed_conversion(self.input, callee) {
                        let finding = self.finding(e, name, args);
                        self.out.push(finding);
                    }
                }
                _ => {}
            }
            visit::walk_expr(self, e);
        }
    }
    impl V<'_, '_> {
        fn finding(&self, call: &Expr, name: &str, args: &[Expr]) -> Finding {
            let (operand, target) = match (name, args) {
                ("VAL", [t, x]) => match t.as_designator() {
                    Some(d) if d.selectors.is_empty() => (Some(x), Some(d.head.dotted())),
                    _ => (Some(x), None),
                },
                ("VAL", _) => (None, None),
                (_, [x]) => (Some(x), target_of(name).map(str::to_string)),
                _ => (None, None),
            };
            let trunc_blocked = name == "TRUNC" && !self.config.assume_trunc_is_conversion;
            let mut fix = None;
            let mut why = None;
            if let (Some(x), Some(t)) = (operand, &target) {
                let keep: Vec<_> = args.iter().map(|a| a.span).collect();
                if trunc_blocked {
                    why = Some("TRUNC truncates toward zero; confirm the conversion is intended");
                } else if self.input.loses_comments(call.span, &keep) {
                    why = Some("comments inside the call");
                } else {
                    let text = self.input.text(x.span);
                    let operand = if x.is_primary() {
                        text.to_string()
                    } else {
                        format!("({text})")
                    };
                    let mut replacement = format!("{operand} :: {t}");
                    if self.conversion_operands.contains(&call.span.start) {
                        replacement = format!("({replacement})");
                    }
                    fix = Some(FixPlan::single(call.span, replacement));
                }
            }
            let mut message = match &target {
                Some(t) => format!("`{name}` is removed; use the conversion operator `:: {t}`"),
                None => format!("`{name}` is removed; use the conversion operator `::`"),
            };
            if let Some(why) = why {
                message.push_str(&format!(" (not fixed automatically: {why})"));
            }
            Finding::new(RuleId::P04, Action::Removal, call.span, message).fix(fix)
        }
    }
    visit::walk_unit(
        &mut V {
            input,
            config,
            out,
            conversion_operands: HashSet::new(),
        },
        input.unit,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::test_support::*;

    fn fix_one(expr: &str) -> String {
        let src = format!("MODULE M; VAR x, a, b: INTEGER; r: REAL; c: CARDINAL; BEGIN x := {expr} END M.");
        let d = of(&revised(&src), RuleId::P04);
        let out = fixed(&src, &d);
        let start = out.find(":= ").unwrap() + 3;
        let end = out.rfind(" END M.").unwrap();
        out[start..end].to_string()
    }

    #[test]
    fn conversion_table() {
        assert_eq!(fix_one("INT(r)"), "r :: INTEGER");
        assert_eq!(fix_one("CARD(x)"), "x :: CARDINAL");
        assert_eq!(fix_one("FLOAT(c)"), "c :: REAL");
        assert_eq!(fix_one("LFLOAT(c)"), "c :: LONGREAL");
        assert_eq!(fix_one("VAL(INTEGER, c)"), "c :: INTEGER");
    }

    #[test]
    fn operands_are_parenthesized_when_needed() {
        assert_eq!(fix_one("INT(a + b)"), "(a + b) :: INTEGER");
        assert_eq!(fix_one("INT(-a)"), "(-a) :: INTEGER");
        assert_eq!(fix_one("INT((a))"), "(a) :: INTEGER");
        assert_eq!(fix_one("INT(r) :: CARDINAL"), "(r :: INTEGER) :: CARDINAL");
        assert_eq!(fix_one("-INT(r) * 2"), "-r :: INTEGER * 2");
    }

    #[test]
    fn trunc_needs_assumption() {
        let src = "MODULE M; VAR c: CARDINAL; r: REAL; BEGIN c := TRUNC(r) END M.";
        let d = of(&revised(src), RuleId::P04);
        assert_eq!(d.len(), 1);
        assert!(d[0].fix.is_none());
        let config = RuleConfig {
            assume_trunc_is_conversion: true,
            ..RuleConfig::default()
        };
        let d = of(&check(src, &config), RuleId::P04);
        assert_eq!(fixed(src, &d), "MODULE M; VAR c: CARDINAL; r: REAL; BEGIN c := r :: CARDINAL END M.");
    }

    #[test]
    fn shadowed_names_are_not_conversions() {
        let src = "MODULE M; PROCEDURE INT(x: REAL): INTEGER; BEGIN RETURN 0 END INT;
VAR i: INTEGER; BEGIN i := INT(1.0) END M.";
        assert!(of(&revised(src), RuleId::P04).is_empty());
    }

    #[test]
    fn comments_block_fix() {
        let src = "MODULE M; VAR i: INTEGER; BEGIN i := INT( (* why *) 1.5) END M.";
        let d = of(&revised(src), RuleId::P04);
        assert!(d[0].fix.is_none());
        let src = "MODULE M; VAR i: INTEGER; BEGIN i := INT(1.5 (* ok *) + 2.0) END M.";
        let d = of(&revised(src), RuleId::P04);
        assert!(d[0].fix.is_some());
    }
}
