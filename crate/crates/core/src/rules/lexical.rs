use crate::diagnostic::{Action, RuleId};
use crate::lexer::{LiteralValue, TokenKind};
use crate::sema::{set_typedness, SetTypedness};
use crate::syntax::visit::{self, Visitor};
use crate::syntax::{BinaryOp, Expr, ExprKind};
use crate::transform::FixPlan;

use super::{Finding, RuleInput};

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// L01: `&`, `~`, `<>`, `!` and `@`.
pub(super) fn synonyms(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    let bytes = input.source.as_bytes();
    for t in input.tokens {
        let Some(symbol) = t.kind.synonym_replacement() else {
            continue;
        };
        let mut text = symbol.to_string();
        if symbol.bytes().all(is_word_byte) {
            // `a&b` must not become `aANDb`.
            if t.span.start > 0 && is_word_byte(bytes[t.span.start - 1]) {
                text.insert(0, ' ');
            }
            if bytes.get(t.span.end).copied().is_some_and(is_word_byte) {
                text.push(' ');
            }
        }
        out.push(
            Finding::new(
                RuleId::L01,
                Action::Removal,
                t.span,
                format!("`{}` is no longer a synonym; write `{symbol}`", t.text),
            )
            .fix(Some(FixPlan::single(t.span, text))),
        );
    }
}

/// Spelling of an octal whole number in the revised language.
pub fn octal_whole_replacement(value: u64) -> String {
    if value <= 255 {
        let hex = format!("{value:X}H");
        if hex.as_bytes()[0].is_ascii_alphabetic() {
            format!("0{hex}")
        } else {
            hex
        }
    } else {
        value.to_string()
    }
}

/// L02: `377B` and `101C`.
pub(super) fn octal_literals(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    for t in input.tokens {
        let (replacement, what) = match (t.kind, &t.value) {
            (TokenKind::Integer(crate::lexer::Radix::Octal), Some(LiteralValue::Whole(v))) => {
                (octal_whole_replacement(*v), "octal number")
            }
            (TokenKind::CharCode, Some(LiteralValue::Char(c))) => (format!("CHR({c})"), "octal character code"),
            _ => continue,
        };
        out.push(
            Finding::new(
                RuleId::L02,
                Action::Removal,
                t.span,
                format!("{what} `{}` is no longer accepted; write `{replacement}`", t.text),
            )
            .fix(Some(FixPlan::single(t.span, replacement))),
        );
    }
}

/// L03: `-` between sets.
pub(super) fn set_difference(input: &RuleInput<'_>, out: &mut Vec<Finding>) {
    struct V<'a, 'b> {
        input: &'a RuleInput<'b>,
        out: &'a mut Vec<Finding>,
    }
    impl Visitor for V<'_, '_> {
        fn visit_expr(&mut self, e: &Expr) {
            if let ExprKind::Binary {
                op: BinaryOp::Sub,
                lhs,
                rhs,
                op_span,
            } = &e.kind
            {
                let l = set_typedness(lhs, self.input.symbols);
                let r = set_typedness(rhs, self.input.symbols);
                use SetTypedness::*;
                match (l, r) {
                    (IsSet, IsSet) => self.out.push(
                        Finding::new(
                            RuleId::L03,
                            Action::Change,
                            *op_span,
                            "set difference is written `\\`; `-` applies to numbers only",
                        )
                        .fix(Some(FixPlan::single(*op_span, "\\"))),
                    ),
                    (NotSet, _) | (_, NotSet) => {}
                    _ => self.out.push(
                        Finding::new(
                            RuleId::L03,
                            Action::Change,
                            *op_span,
                            "operand types unknown; if this `-` is a set difference, write `\\`",
                        )
                        .advisory(),
                    ),
                }
            }
            visit::walk_expr(self, e);
        }
    }
    visit::walk_unit(&mut V { input, out }, input.unit);
}
