//! Parser for the union of the legacy and revised grammars.

pub mod ast;
mod parser;
mod pragma;
pub mod shape;
pub mod visit;

pub use ast::*;
pub use parser::{parse_compilation_unit, parse_expression};
pub use pragma::{parse_module_pragmas, KNOWN_FOREIGN_APIS};

use crate::diagnostic::{Diagnostic, RuleId};
use crate::lexer::{tokenize, DialectProfile, Lexed};

/// Lex errors as diagnostics.
pub fn lex_diagnostics(lexed: &Lexed) -> Vec<Diagnostic> {
    lexed
        .errors
        .iter()
        .map(|e| Diagnostic::error(RuleId::LexError, e.span, e.message.clone()))
        .collect()
}

/// Tokenize and parse in one step; lexical errors come first in the
/// returned diagnostics.
pub fn parse_source(source: &str, profile: &DialectProfile) -> (CompilationUnit, Vec<Diagnostic>) {
    let lexed = tokenize(source, profile);
    let mut diags = lex_diagnostics(&lexed);
    let (unit, syntax) = parse_compilation_unit(&lexed.tokens);
    diags.extend(syntax);
    (unit, diags)
}

#[cfg(test)]
mod tests {
    use super::shape::{expr_shape, type_shape, unit_shape, ShapeOptions};
    use super::*;
    use crate::lexer::DialectProfile;

    fn parse(src: &str) -> (CompilationUnit, Vec<Diagnostic>) {
        parse_source(src, &DialectProfile::revised())
    }

    fn parse_ok(src: &str) -> CompilationUnit {
        let (u, d) = parse(src);
        assert!(d.is_empty(), "unexpected diagnostics for {src:?}: {d:#?}");
        u
    }

    fn expr(src: &str) -> (Expr, Vec<Diagnostic>) {
        let lexed = tokenize(src, &DialectProfile::revised());
        parse_expression(&lexed.tokens)
    }

    fn exact(src: &str) -> String {
        let (e, d) = expr(src);
        assert!(d.is_empty(), "{src}: {d:?}");
        expr_shape(&e, ShapeOptions::EXACT)
    }

    fn first_type(u: &CompilationUnit) -> &TypeExpr {
        u.declarations
            .iter()
            .find_map(|d| match &d.kind {
                DeclKind::Type { ty, .. } => Some(ty),
                _ => None,
            })
            .expect("a type declaration")
    }

    #[test]
    fn minimal_program_module() {
        let u = parse_ok("MODULE M; END M.");
        assert_eq!(u.kind, UnitKind::Program);
        assert_eq!(u.name.name, "M");
        assert!(u.imports.is_empty());
        assert!(u.declarations.is_empty());
        assert!(u.body.is_none());
    }

    #[test]
    fn end_name_must_match() {
        let (_, d) = parse("MODULE M; END N.");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("does not match"));
    }

    #[test]
    fn short_array_form() {
        let u = parse_ok("MODULE M; TYPE Matrix = ARRAY [0 .. Cols], [0 .. Rows] OF REAL; END M.");
        match &first_type(&u).kind {
            TypeKind::Array { dimensions, long_form, element } => {
                assert_eq!(dimensions.len(), 2);
                assert_eq!(long_form, &[false, false]);
                assert!(matches!(element.kind, TypeKind::Named(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn long_array_form_is_flagged_on_both_levels() {
        let u = parse_ok("MODULE M; TYPE Matrix = ARRAY [0..C] OF ARRAY [0..R] OF REAL; END M.");
        match &first_type(&u).kind {
            TypeKind::Array { dimensions, long_form, element } => {
                assert_eq!(dimensions.len(), 1);
                assert_eq!(long_form, &[true]);
                match &element.kind {
                    TypeKind::Array { dimensions, long_form, .. } => {
                        assert_eq!(dimensions.len(), 1);
                        assert_eq!(long_form, &[true]);
                    }
                    other => panic!("{other:?}"),
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn array_forms_share_canonical_shape() {
        let a = parse_ok("MODULE M; TYPE T = ARRAY [0..C] OF ARRAY [0..R] OF REAL; END M.");
        let b = parse_ok("MODULE M; TYPE T = ARRAY [0..C], [0..R] OF REAL; END M.");
        assert_ne!(
            type_shape(first_type(&a), ShapeOptions::EXACT),
            type_shape(first_type(&b), ShapeOptions::EXACT)
        );
        assert_eq!(
            unit_shape(&a, ShapeOptions::CANONICAL),
            unit_shape(&b, ShapeOptions::CANONICAL)
        );
    }

    #[test]
    fn not_binds_looser_than_conversion() {
        assert_eq!(exact("NOT x :: BOOLEAN"), "(NOT (:: x BOOLEAN))");
        let (a, _) = expr("NOT x :: BOOLEAN");
        let (b, _) = expr("NOT (x :: BOOLEAN)");
        assert_eq!(
            expr_shape(&a, ShapeOptions::CANONICAL),
            expr_shape(&b, ShapeOptions::CANONICAL)
        );
    }

    #[test]
    fn conversion_does_not_chain() {
        let (_, d) = expr("x :: T :: U");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("do not chain"));
        assert_eq!(exact("(x :: T) :: U"), "(:: (paren (:: x T)) U)");
    }

    #[test]
    fn conversion_target_may_be_qualified() {
        assert_eq!(exact("a :: M.T"), "(:: a M.T)");
    }

    #[test]
    fn conversion_is_not_a_statement() {
        let (_, d) = parse("MODULE M; BEGIN a :: T := 1 END M.");
        assert!(!d.is_empty());
    }

    #[test]
    fn operator_precedence_levels() {
        assert_eq!(exact("a + b * c"), "(+ a (* b c))");
        assert_eq!(exact("a * b + c"), "(+ (* a b) c)");
        assert_eq!(exact("a = b + c"), "(= a (+ b c))");
        assert_eq!(exact("a OR b AND c"), "(OR a (AND b c))");
        assert_eq!(exact("NOT a AND b"), "(AND (NOT a) b)");
        assert_eq!(exact("-a * b"), "(neg (* a b))");
        assert_eq!(exact("a \\ b * c"), "(\\ a (* b c))");
        assert_eq!(exact("x :: T * y"), "(* (:: x T) y)");
        assert_eq!(exact("a IN s"), "(IN a s)");
        assert_eq!(exact("f(x) :: CARDINAL"), "(:: (call f x) CARDINAL)");
        assert_eq!(exact("a MOD b REM c"), "(REM (MOD a b) c)");
    }

    #[test]
    fn synonyms_parse_like_their_canonical_forms() {
        let lexed = tokenize("~a & b # c", &DialectProfile::legacy());
        let (a, d) = parse_expression(&lexed.tokens);
        assert!(d.is_empty());
        let (b, _) = expr("NOT a AND b # c");
        assert_eq!(
            expr_shape(&a, ShapeOptions::EXACT),
            expr_shape(&b, ShapeOptions::EXACT)
        );
        let lexed = tokenize("a <> b", &DialectProfile::legacy());
        let (c, _) = parse_expression(&lexed.tokens);
        assert_eq!(expr_shape(&c, ShapeOptions::EXACT), "(# a b)");
    }

    #[test]
    fn record_with_nil_base() {
        let u = parse_ok("MODULE M; TYPE Shape = RECORD (NIL) x, y : REAL END; END M.");
        match &first_type(&u).kind {
            TypeKind::Record(r) => {
                assert!(matches!(r.base, Some(BaseType::Nil(_))));
                assert_eq!(r.fields.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn record_with_named_base() {
        let u = parse_ok("MODULE M; TYPE C = RECORD (G.Shape) r : REAL END; END M.");
        match &first_type(&u).kind {
            TypeKind::Record(r) => match &r.base {
                Some(BaseType::Named(q)) => assert_eq!(q.dotted(), "G.Shape"),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn variant_record_structure() {
        let u = parse_ok(
            "MODULE M; TYPE S = RECORD x: REAL; CASE kind: Tag OF a: i: INTEGER | b: r: REAL \
             ELSE z: CHAR END END; END M.",
        );
        let TypeKind::Record(r) = &first_type(&u).kind else { panic!() };
        let v = r.variant_part().unwrap();
        assert_eq!(v.tag_field.as_ref().unwrap().name, "kind");
        assert_eq!(v.tag_type.dotted(), "Tag");
        assert_eq!(v.variants.len(), 2);
        assert!(v.else_part.is_some());
    }

    #[test]
    fn variant_without_tag_field_and_empty_arms() {
        let u = parse_ok("MODULE M; TYPE S = RECORD CASE : Tag OF | a: i: INTEGER | END END; END M.");
        let TypeKind::Record(r) = &first_type(&u).kind else { panic!() };
        let v = r.variant_part().unwrap();
        assert!(v.tag_field.is_none());
        assert_eq!(v.variants.len(), 1);
    }

    #[test]
    fn statements_of_all_forms() {
        let src = "MODULE M;
VAR i: INTEGER; p: POINTER TO R;
BEGIN
  i := 0;
  IF i = 0 THEN INC(i) ELSIF i > 1 THEN DEC(i) ELSE i := 2 END;
  CASE i OF 1: i := 1 | 2..3, 5: i := 2 ELSE END;
  WHILE i < 10 DO INC(i) END;
  REPEAT DEC(i) UNTIL i = 0;
  LOOP EXIT END;
  FOR i := 1 TO 10 BY 2 DO END;
  WITH p^ DO x := 1 END;
  a[i, 2].f^.g := {1, 3..5};
  Proc;
  RETURN
EXCEPT
  RETRY
FINALLY
  i := 0
END M.";
        let u = parse_ok(src);
        let body = u.body.as_ref().unwrap();
        assert_eq!(body.statements.len(), 11);
        assert!(body.except.is_some());
        assert!(body.finally.is_some());
    }

    #[test]
    fn procedures_and_local_modules() {
        let src = "MODULE M;
PROCEDURE P(VAR a: ARRAY OF CHAR; b, c: INTEGER): BOOLEAN;
  VAR x: INTEGER;
BEGIN RETURN TRUE END P;
PROCEDURE Q; FORWARD;
MODULE Inner;
  IMPORT P;
  EXPORT QUALIFIED v;
  VAR v: INTEGER;
BEGIN v := 0 END Inner;
END M.";
        let u = parse_ok(src);
        assert_eq!(u.declarations.len(), 3);
        let DeclKind::Procedure(p) = &u.declarations[0].kind else { panic!() };
        assert_eq!(p.params.len(), 2);
        assert!(p.params[0].var);
        assert_eq!(p.params[0].ty.open_dims, 1);
        assert_eq!(p.result.as_ref().unwrap().dotted(), "BOOLEAN");
        let DeclKind::Procedure(q) = &u.declarations[1].kind else { panic!() };
        assert!(q.forward);
        let DeclKind::Module(m) = &u.declarations[2].kind else { panic!() };
        assert_eq!(m.name.name, "Inner");
        assert!(m.export.as_ref().unwrap().qualified);
    }

    #[test]
    fn definition_module_headings_and_opaque_types() {
        let src = "DEFINITION MODULE D;
FROM Storage IMPORT ALLOCATE;
IMPORT SYSTEM;
TYPE Handle; Proc = PROCEDURE (VAR INTEGER, CHAR): BOOLEAN;
CONST Max = 10;
VAR count: CARDINAL;
PROCEDURE Open(name: ARRAY OF CHAR): Handle;
END D.";
        let u = parse_ok(src);
        assert_eq!(u.kind, UnitKind::Definition);
        assert_eq!(u.imports.len(), 2);
        let opaque = u
            .declarations
            .iter()
            .filter(|d| matches!(&d.kind, DeclKind::Type { ty, .. } if ty.kind == TypeKind::Opaque))
            .count();
        assert_eq!(opaque, 1);
        assert!(u.body.is_none());
    }

    #[test]
    fn designator_head_is_longest_dotted_prefix() {
        let (e, _) = expr("M.r.f[1].g^");
        let d = e.as_designator().unwrap();
        assert_eq!(d.head.dotted(), "M.r.f");
        assert_eq!(d.selectors.len(), 3);
    }

    #[test]
    fn set_constructors() {
        assert_eq!(exact("BITSET{0, 1}"), "(set BITSET 0 1)");
        assert_eq!(exact("{}"), "(set)");
        assert_eq!(exact("{a..b}"), "(set a..b)");
    }

    #[test]
    fn recovery_reports_and_continues() {
        let src = "MODULE M;
VAR x: INTEGER;
BEGIN
  x := ;
  x := 1 2;
  IF x THEN x := 1 END;
  ) ;
  x := 3
END M.";
        let (u, d) = parse(src);
        assert!(d.len() >= 3, "{d:#?}");
        let body = u.body.unwrap();
        assert!(body
            .statements
            .iter()
            .any(|s| matches!(&s.kind, StmtKind::If { .. })));
        assert!(matches!(
            &body.statements.last().unwrap().kind,
            StmtKind::Assign { .. }
        ));
    }

    #[test]
    fn declaration_recovery() {
        let (u, d) = parse("MODULE M; VAR a: ; b: INTEGER; 42; CONST c = 1; END M.");
        assert!(!d.is_empty());
        assert!(u
            .declarations
            .iter()
            .any(|d| matches!(&d.kind, DeclKind::Const { name, .. } if name.name == "c")));
    }

    #[test]
    fn trailing_text_is_reported() {
        let (_, d) = parse("MODULE M; END M. junk");
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn child_spans_nest_in_parent_spans() {
        let src = "MODULE M; BEGIN x := a + b * (c - d) END M.";
        let u = parse_ok(src);
        let StmtKind::Assign { value, .. } = &u.body.as_ref().unwrap().statements[0].kind else {
            panic!()
        };
        fn check(e: &Expr) {
            let mut children = Vec::new();
            match &e.kind {
                ExprKind::Binary { lhs, rhs, .. } => children.extend([&**lhs, &**rhs]),
                ExprKind::Paren(inner) => children.push(&**inner),
                _ => {}
            }
            for c in children {
                assert!(e.span.contains(&c.span), "{:?} !⊇ {:?}", e.span, c.span);
                check(c);
            }
        }
        assert_eq!(&src[value.span.start..value.span.end], "a + b * (c - d)");
        check(value);
    }

    #[test]
    fn case_type_labels_are_kept_as_designators() {
        let u = parse_ok("MODULE M; BEGIN CASE r OF | Circle : x := 1 | G.Square : x := 2 END END M.");
        let StmtKind::Case { arms, .. } = &u.body.as_ref().unwrap().statements[0].kind else {
            panic!()
        };
        assert_eq!(arms[1].labels[0].as_qualident().unwrap().dotted(), "G.Square");
    }

    #[test]
    fn module_pragmas_are_attached() {
        let u = parse_ok("DEFINITION MODULE L; <*PRIVATETO=App*> (* c *) <*INLINE*> END L.");
        assert_eq!(u.pragmas.len(), 2);
        assert_eq!(u.pragmas[0].kind, PragmaKind::PrivateTo);
        assert_eq!(u.pragmas[1].kind, PragmaKind::Other);
    }
}
