use crate::span::SourceSpan;
use crate::syntax::visit::{self, Visitor};
use crate::syntax::*;

use super::{Origin, Root, ScopedSymbols, SymbolKind, TypeClass};

/// A statement that writes to a variable imported from another module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteSite {
    pub span: SourceSpan,
    pub module: String,
    pub name: String,
    /// The write happens by passing the variable to a `VAR` parameter.
    pub via_var_param: bool,
}

/// Assignments (and `VAR` arguments, when the callee is known) whose
/// target's root variable is imported.
///
/// Writes through a pointer dereference change the referenced object,
/// not the imported variable, and are not reported.
pub fn find_imported_writes(unit: &CompilationUnit, symbols: &ScopedSymbols) -> Vec<WriteSite> {
    let mut f = WriteFinder {
        symbols,
        sites: Vec::new(),
    };
    visit::walk_unit(&mut f, unit);
    f.sites
}

struct WriteFinder<'a> {
    symbols: &'a ScopedSymbols,
    sites: Vec<WriteSite>,
}

impl WriteFinder<'_> {
    fn imported_root(&self, d: &Designator) -> Option<(String, String)> {
        if d.selectors.iter().any(|s| matches!(s, Selector::Deref(_))) {
            return None;
        }
        match self.symbols.designator_root(d) {
            Root::Symbol(_) => {
                let scope = self.symbols.scope_at(d.span.start);
                let first = self.symbols.lookup(scope, &d.head.first().name)?;
                let first = self.symbols.resolve_alias(first);
                let sym = first.symbol();
                match &sym.origin {
                    Origin::Imported { module } => {
                        if sym.kind == SymbolKind::Module {
                            // `M.v`: the member is what gets written.
                            let member = d.head.parts.get(1)?;
                            let writable = match self.symbols.resolve_prefix(scope, &d.head.parts[..2]) {
                                Some((m, [])) => matches!(m.symbol().kind, SymbolKind::Var | SymbolKind::Import),
                                _ => true,
                            };
                            writable.then(|| (module.clone(), member.name.clone()))
                        } else if matches!(sym.kind, SymbolKind::Var | SymbolKind::Import) {
                            Some((module.clone(), sym.name.clone()))
                        } else {
                            None
                        }
                    }
                    Origin::Local if first.table.module != self.symbols.module => {
                        // Declared in another module's definition part.
                        (sym.kind == SymbolKind::Var)
                            .then(|| (first.table.module.clone(), sym.name.clone()))
                    }
                    _ => None,
                }
            }
            Root::WithField { region, .. } => {
                let w = &self.symbols.withs[region];
                self.imported_root(&w.designator)
            }
            Root::WithUnknown | Root::Unresolved => None,
        }
    }

    fn record(&mut self, d: &Designator, span: SourceSpan, via_var_param: bool) {
        if let Some((module, name)) = self.imported_root(d) {
            self.sites.push(WriteSite {
                span,
                module,
                name,
                via_var_param,
            });
        }
    }

    fn call(&mut self, callee: &Designator, args: &[Expr]) {
        let Some(modes) = self.symbols.callee_var_params(callee) else {
            return;
        };
        for (arg, var) in args.iter().zip(modes) {
            if !var {
                continue;
            }
            if let Some(d) = arg.strip_parens().as_designator() {
                self.record(d, arg.span, true);
            }
        }
    }
}

impl Visitor for WriteFinder<'_> {
    fn visit_stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Assign { target, .. } => self.record(target, s.span, false),
            StmtKind::Call {
                callee,
                args: Some(args),
            } => self.call(callee, args),
            StmtKind::For { var, .. } => {
                let d = Designator {
                    head: QualIdent {
                        parts: vec![var.clone()],
                        span: var.span,
                    },
                    selectors: Vec::new(),
                    span: var.span,
                };
                self.record(&d, s.span, false);
            }
            _ => {}
        }
        visit::walk_stmt(self, s);
    }

    fn visit_expr(&mut self, e: &Expr) {
        if let ExprKind::Call { callee, args } = &e.kind {
            self.call(callee, args);
        }
        visit::walk_expr(self, e);
    }
}

/// An assignment or comparison with `NIL` on one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilSite {
    pub span: SourceSpan,
    pub other: TypeClass,
}

pub fn find_nil_sites(unit: &CompilationUnit, symbols: &ScopedSymbols) -> Vec<NilSite> {
    struct F<'a> {
        symbols: &'a ScopedSymbols,
        sites: Vec<NilSite>,
    }
    impl F<'_> {
        fn is_nil(&self, e: &Expr) -> bool {
            match e.strip_parens().as_designator() {
                Some(d) if d.head.is_simple() && d.selectors.is_empty() && d.head.first().name == "NIL" => {
                    matches!(self.symbols.designator_root(d), Root::Symbol(r) if r.symbol().origin == Origin::Pervasive)
                }
                _ => false,
            }
        }
    }
    impl Visitor for F<'_> {
        fn visit_stmt(&mut self, s: &Stmt) {
            if let StmtKind::Assign { target, value } = &s.kind {
                if self.is_nil(value) {
                    let other = self.symbols.designator_type_info(target).class;
                    self.sites.push(NilSite { span: s.span, other });
                }
            }
            visit::walk_stmt(self, s);
        }

        fn visit_expr(&mut self, e: &Expr) {
            if let ExprKind::Binary {
                op: BinaryOp::Eq | BinaryOp::Ne,
                lhs,
                rhs,
                ..
            } = &e.kind
            {
                let other = if self.is_nil(rhs) {
                    Some(lhs)
                } else if self.is_nil(lhs) {
                    Some(rhs)
                } else {
                    None
                };
                if let Some(o) = other {
                    let class = self.symbols.expr_info(o).class;
                    self.sites.push(NilSite { span: e.span, other: class });
                }
            }
            visit::walk_expr(self, e);
        }
    }
    let mut f = F {
        symbols,
        sites: Vec::new(),
    };
    visit::walk_unit(&mut f, unit);
    f.sites
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::DialectProfile;
    use crate::sema::tests::symbols;

    fn writes(src: &str) -> Vec<(String, String, bool)> {
        let (u, s) = symbols(src, &DialectProfile::revised());
        find_imported_writes(&u, &s)
            .into_iter()
            .map(|w| (w.module, w.name, w.via_var_param))
            .collect()
    }

    fn w(m: &str, n: &str, var: bool) -> (String, String, bool) {
        (m.into(), n.into(), var)
    }

    #[test]
    fn assignment_to_imported_variable() {
        assert_eq!(
            writes("MODULE P; FROM M IMPORT v; BEGIN v := 1 END P."),
            [w("M", "v", false)]
        );
    }

    #[test]
    fn read_is_not_a_write() {
        assert!(writes("MODULE P; FROM M IMPORT v; VAR x: INTEGER; BEGIN x := v END P.").is_empty());
    }

    #[test]
    fn qualified_root_is_imported() {
        assert_eq!(writes("MODULE P; IMPORT M; BEGIN M.v := 1 END P."), [w("M", "v", false)]);
    }

    /// Hand-classified designator-root forms.
    #[test]
    fn designator_root_forms() {
        let src = "MODULE P;
FROM M IMPORT v, rec, ptr, Proc;
IMPORT N;
VAR local: INTEGER; lr: RECORD f: INTEGER END;
PROCEDURE Q(VAR a: INTEGER; b: INTEGER); BEGIN END Q;
BEGIN
  v := 1;
  rec.f := 2;
  rec.arr[3] := 4;
  ptr^ := 5;
  ptr^.f := 6;
  N.w := 7;
  N.r.f := 8;
  local := v;
  lr.f := 9;
  Q(v, v);
  Q(local, v);
  INC(v);
  INCL(N.s, 3);
  Proc(v);
  FOR v := 1 TO 2 DO END;
  WITH rec DO f := 1 END;
  WITH unknownThing DO v := 1 END
END P.";
        assert_eq!(
            writes(src),
            [
                w("M", "v", false),
                w("M", "rec", false),
                w("M", "rec", false),
                w("N", "w", false),
                w("N", "r", false),
                w("M", "v", true),
                w("M", "v", true),
                w("N", "s", true),
                w("M", "v", false),
            ]
        );
    }

    #[test]
    fn local_and_pervasive_roots_are_never_reported() {
        let src = "MODULE P; VAR a: INTEGER;
MODULE L; EXPORT b; VAR b: INTEGER; END L;
BEGIN a := 1; b := 2; INC(a) END P.";
        assert!(writes(src).is_empty());
    }

    #[test]
    fn nil_sites_classify_other_side() {
        let src = "MODULE P; TYPE Pr = PROCEDURE (INTEGER); VAR pv: Pr; q: POINTER TO INTEGER;
BEGIN pv := NIL; IF q = NIL THEN END; IF NIL # pv THEN END END P.";
        let (u, s) = symbols(src, &DialectProfile::revised());
        let classes: Vec<_> = find_nil_sites(&u, &s).into_iter().map(|n| n.other).collect();
        assert_eq!(classes, [TypeClass::Procedure, TypeClass::Pointer, TypeClass::Procedure]);
    }
}
