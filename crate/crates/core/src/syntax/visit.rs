//! Pre-order traversal over the AST. Override a `visit_*` method and call
//! the matching `walk_*` function to keep descending.

use super::ast::*;

pub trait Visitor {
    fn visit_decl(&mut self, d: &Declaration) {
        walk_decl(self, d)
    }
    fn visit_type(&mut self, t: &TypeExpr) {
        walk_type(self, t)
    }
    fn visit_stmt(&mut self, s: &Stmt) {
        walk_stmt(self, s)
    }
    fn visit_expr(&mut self, e: &Expr) {
        walk_expr(self, e)
    }
    fn visit_designator(&mut self, d: &Designator) {
        walk_designator(self, d)
    }
}

pub fn walk_unit<V: Visitor + ?Sized>(v: &mut V, u: &CompilationUnit) {
    for d in &u.declarations {
        v.visit_decl(d);
    }
    if let Some(b) = &u.body {
        walk_body(v, b);
    }
}

pub fn walk_body<V: Visitor + ?Sized>(v: &mut V, b: &Body) {
    for sec in b.sections() {
        walk_stmts(v, sec);
    }
}

pub fn walk_stmts<V: Visitor + ?Sized>(v: &mut V, stmts: &[Stmt]) {
    for s in stmts {
        v.visit_stmt(s);
    }
}

pub fn walk_decl<V: Visitor + ?Sized>(v: &mut V, d: &Declaration) {
    match &d.kind {
        DeclKind::Const { value, .. } => v.visit_expr(value),
        DeclKind::Type { ty, .. } | DeclKind::Var { ty, .. } => v.visit_type(ty),
        DeclKind::Procedure(p) => {
            for d in &p.declarations {
                v.visit_decl(d);
            }
            if let Some(b) = &p.body {
                walk_body(v, b);
            }
        }
        DeclKind::Module(m) => {
            for d in &m.declarations {
                v.visit_decl(d);
            }
            if let Some(b) = &m.body {
                walk_body(v, b);
            }
        }
        DeclKind::Error => {}
    }
}

pub fn walk_type<V: Visitor + ?Sized>(v: &mut V, t: &TypeExpr) {
    match &t.kind {
        TypeKind::Subrange { low, high, .. } => {
            v.visit_expr(low);
            v.visit_expr(high);
        }
        TypeKind::Array { dimensions, element, .. } => {
            for d in dimensions {
                v.visit_type(d);
            }
            v.visit_type(element);
        }
        TypeKind::Record(r) => walk_fields(v, &r.fields),
        TypeKind::Set { base, .. } => v.visit_type(base),
        TypeKind::Pointer(to) => v.visit_type(to),
        TypeKind::Named(_)
        | TypeKind::Enumeration(_)
        | TypeKind::Procedure { .. }
        | TypeKind::Opaque
        | TypeKind::Error => {}
    }
}

fn walk_fields<V: Visitor + ?Sized>(v: &mut V, fields: &[FieldItem]) {
    for f in fields {
        match f {
            FieldItem::Fixed { ty, .. } => v.visit_type(ty),
            FieldItem::Variant(vp) => {
                for arm in &vp.variants {
                    walk_labels(v, &arm.labels);
                    walk_fields(v, &arm.fields);
                }
                if let Some(e) = &vp.else_part {
                    walk_fields(v, e);
                }
            }
        }
    }
}

fn walk_labels<V: Visitor + ?Sized>(v: &mut V, labels: &[CaseLabel]) {
    for l in labels {
        v.visit_expr(&l.low);
        if let Some(h) = &l.high {
            v.visit_expr(h);
        }
    }
}

pub fn walk_stmt<V: Visitor + ?Sized>(v: &mut V, s: &Stmt) {
    match &s.kind {
        StmtKind::Assign { target, value } => {
            v.visit_designator(target);
            v.visit_expr(value);
        }
        StmtKind::Call { callee, args } => {
            v.visit_designator(callee);
            for a in args.iter().flatten() {
                v.visit_expr(a);
            }
        }
        StmtKind::If { branches, else_branch } => {
            for (c, body) in branches {
                v.visit_expr(c);
                walk_stmts(v, body);
            }
            if let Some(e) = else_branch {
                walk_stmts(v, e);
            }
        }
        StmtKind::Case { selector, arms, else_branch } => {
            v.visit_expr(selector);
            for arm in arms {
                walk_labels(v, &arm.labels);
                walk_stmts(v, &arm.body);
            }
            if let Some(e) = else_branch {
                walk_stmts(v, e);
            }
        }
        StmtKind::While { cond, body } | StmtKind::Repeat { body, cond } => {
            v.visit_expr(cond);
            walk_stmts(v, body);
        }
        StmtKind::Loop { body } => walk_stmts(v, body),
        StmtKind::For { from, to, by, body, .. } => {
            v.visit_expr(from);
            v.visit_expr(to);
            if let Some(b) = by {
                v.visit_expr(b);
            }
            walk_stmts(v, body);
        }
        StmtKind::With { designator, body } => {
            v.visit_designator(designator);
            walk_stmts(v, body);
        }
        StmtKind::Return(Some(e)) => v.visit_expr(e),
        StmtKind::Return(None) | StmtKind::Exit | StmtKind::Retry | StmtKind::Error => {}
    }
}

pub fn walk_designator<V: Visitor + ?Sized>(v: &mut V, d: &Designator) {
    for s in &d.selectors {
        if let Selector::Index(ix, _) = s {
            for e in ix {
                v.visit_expr(e);
            }
        }
    }
}

pub fn walk_expr<V: Visitor + ?Sized>(v: &mut V, e: &Expr) {
    match &e.kind {
        ExprKind::Designator(d) => v.visit_designator(d),
        ExprKind::Call { callee, args } => {
            v.visit_designator(callee);
            for a in args {
                v.visit_expr(a);
            }
        }
        ExprKind::SetConstructor { elements, .. } => {
            for el in elements {
                v.visit_expr(&el.low);
                if let Some(h) = &el.high {
                    v.visit_expr(h);
                }
            }
        }
        ExprKind::Unary { operand, .. } => v.visit_expr(operand),
        ExprKind::Binary { lhs, rhs, .. } => {
            v.visit_expr(lhs);
            v.visit_expr(rhs);
        }
        ExprKind::TypeConversion { operand, .. } => v.visit_expr(operand),
        ExprKind::Paren(inner) => v.visit_expr(inner),
        ExprKind::Literal { .. } | ExprKind::Error => {}
    }
}
