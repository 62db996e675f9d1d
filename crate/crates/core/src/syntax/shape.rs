//! Span-free S-expression rendering of syntax trees, for comparing trees
//! structurally.

use std::fmt::Write;

use super::ast::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShapeOptions {
    /// Render `(e)` as `e`.
    pub ignore_parens: bool,
    /// Render nested `ARRAY a OF ARRAY b OF T` as `ARRAY a, b OF T` and
    /// omit long-form flags.
    pub flatten_arrays: bool,
}

impl ShapeOptions {
    pub const EXACT: ShapeOptions = ShapeOptions {
        ignore_parens: false,
        flatten_arrays: false,
    };
    pub const CANONICAL: ShapeOptions = ShapeOptions {
        ignore_parens: true,
        flatten_arrays: true,
    };
}

pub fn expr_shape(e: &Expr, opts: ShapeOptions) -> String {
    let mut w = Shaper { out: String::new(), opts };
    w.expr(e);
    w.out
}

pub fn type_shape(t: &TypeExpr, opts: ShapeOptions) -> String {
    let mut w = Shaper { out: String::new(), opts };
    w.ty(t);
    w.out
}

pub fn unit_shape(u: &CompilationUnit, opts: ShapeOptions) -> String {
    let mut w = Shaper { out: String::new(), opts };
    w.unit(u);
    w.out
}

struct Shaper {
    out: String,
    opts: ShapeOptions,
}

impl Shaper {
    fn open(&mut self, head: &str) {
        self.out.push('(');
        self.out.push_str(head);
    }

    fn close(&mut self) {
        self.out.push(')');
    }

    fn atom(&mut self, s: &str) {
        self.out.push(' ');
        self.out.push_str(s);
    }

    fn sp(&mut self) {
        self.out.push(' ');
    }

    fn unit(&mut self, u: &CompilationUnit) {
        let head = match u.kind {
            UnitKind::Definition => "definition",
            UnitKind::Implementation => "implementation",
            UnitKind::Program => "program",
        };
        self.open(head);
        self.atom(&u.name.name);
        for p in &u.pragmas {
            self.atom(&format!("{:?}", p.text));
        }
        for i in &u.imports {
            self.sp();
            self.import(i);
        }
        for d in &u.declarations {
            self.sp();
            self.decl(d);
        }
        if let Some(b) = &u.body {
            self.sp();
            self.body(b);
        }
        self.close();
    }

    fn import(&mut self, i: &Import) {
        match i {
            Import::From { module, names, .. } => {
                self.open("from");
                self.atom(&module.name);
                self.idents(names);
            }
            Import::Modules { modules, .. } => {
                self.open("import");
                self.idents(modules);
            }
        }
        self.close();
    }

    fn idents(&mut self, names: &[Ident]) {
        for n in names {
            self.atom(&n.name);
        }
    }

    fn decl(&mut self, d: &Declaration) {
        match &d.kind {
            DeclKind::Const { name, value } => {
                self.open("const");
                self.atom(&name.name);
                self.sp();
                self.expr(value);
            }
            DeclKind::Type { name, ty } => {
                self.open("type");
                self.atom(&name.name);
                self.sp();
                self.ty(ty);
            }
            DeclKind::Var { names, ty } => {
                self.open("var");
                self.idents(names);
                self.sp();
                self.ty(ty);
            }
            DeclKind::Procedure(p) => {
                self.open("procedure");
                self.atom(&p.name.name);
                for fp in &p.params {
                    self.open(if fp.var { " (var" } else { " (value" });
                    self.idents(&fp.names);
                    self.sp();
                    self.formal(&fp.ty);
                    self.close();
                }
                if let Some(r) = &p.result {
                    self.atom(&format!(":{}", r.dotted()));
                }
                if p.forward {
                    self.atom("forward");
                }
                for d in &p.declarations {
                    self.sp();
                    self.decl(d);
                }
                if let Some(b) = &p.body {
                    self.sp();
                    self.body(b);
                }
            }
            DeclKind::Module(m) => {
                self.open("module");
                self.atom(&m.name.name);
                for i in &m.imports {
                    self.sp();
                    self.import(i);
                }
                if let Some(e) = &m.export {
                    self.open(if e.qualified { " (export-qualified" } else { " (export" });
                    self.idents(&e.names);
                    self.close();
                }
                for d in &m.declarations {
                    self.sp();
                    self.decl(d);
                }
                if let Some(b) = &m.body {
                    self.sp();
                    self.body(b);
                }
            }
            DeclKind::Error => self.open("error"),
        }
        self.close();
    }

    fn formal(&mut self, f: &FormalType) {
        for _ in 0..f.open_dims {
            self.out.push_str("open-array ");
        }
        self.out.push_str(&f.name.dotted());
    }

    fn body(&mut self, b: &Body) {
        self.open("body");
        self.stmts(&b.statements);
        for (label, sec) in [
            ("except", &b.except),
            ("finally", &b.finally),
            ("finally-except", &b.finally_except),
        ] {
            if let Some(s) = sec {
                self.open(&format!(" ({label}"));
                self.stmts(s);
                self.close();
            }
        }
        self.close();
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.sp();
            self.stmt(s);
        }
    }

    fn block(&mut self, head: &str, stmts: &[Stmt]) {
        self.open(&format!(" ({head}"));
        self.stmts(stmts);
        self.close();
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                self.open(":=");
                self.sp();
                self.designator(target);
                self.sp();
                self.expr(value);
            }
            StmtKind::Call { callee, args } => {
                self.open("call");
                self.sp();
                self.designator(callee);
                for a in args.iter().flatten() {
                    self.sp();
                    self.expr(a);
                }
            }
            StmtKind::If { branches, else_branch } => {
                self.open("if");
                for (c, body) in branches {
                    self.sp();
                    self.expr(c);
                    self.block("then", body);
                }
                if let Some(e) = else_branch {
                    self.block("else", e);
                }
            }
            StmtKind::Case { selector, arms, else_branch } => {
                self.open("case");
                self.sp();
                self.expr(selector);
                for arm in arms {
                    self.open(" (arm");
                    self.labels(&arm.labels);
                    self.stmts(&arm.body);
                    self.close();
                }
                if let Some(e) = else_branch {
                    self.block("else", e);
                }
            }
            StmtKind::While { cond, body } => {
                self.open("while");
                self.sp();
                self.expr(cond);
                self.stmts(body);
            }
            StmtKind::Repeat { body, cond } => {
                self.open("repeat");
                self.stmts(body);
                self.sp();
                self.expr(cond);
            }
            StmtKind::Loop { body } => {
                self.open("loop");
                self.stmts(body);
            }
            StmtKind::For { var, from, to, by, body } => {
                self.open("for");
                self.atom(&var.name);
                self.sp();
                self.expr(from);
                self.sp();
                self.expr(to);
                if let Some(b) = by {
                    self.sp();
                    self.expr(b);
                }
                self.stmts(body);
            }
            StmtKind::With { designator, body } => {
                self.open("with");
                self.sp();
                self.designator(designator);
                self.stmts(body);
            }
            StmtKind::Return(v) => {
                self.open("return");
                if let Some(v) = v {
                    self.sp();
                    self.expr(v);
                }
            }
            StmtKind::Exit => self.open("exit"),
            StmtKind::Retry => self.open("retry"),
            StmtKind::Error => self.open("error"),
        }
        self.close();
    }

    fn labels(&mut self, labels: &[CaseLabel]) {
        self.open(" (labels");
        for l in labels {
            self.sp();
            self.expr(&l.low);
            if let Some(h) = &l.high {
                self.out.push_str("..");
                self.expr(h);
            }
        }
        self.close();
    }

    fn ty(&mut self, t: &TypeExpr) {
        match &t.kind {
            TypeKind::Named(q) => self.out.push_str(&q.dotted()),
            TypeKind::Subrange { base, low, high } => {
                self.open("range");
                if let Some(b) = base {
                    self.atom(&b.dotted());
                }
                self.sp();
                self.expr(low);
                self.sp();
                self.expr(high);
                self.close();
            }
            TypeKind::Enumeration(names) => {
                self.open("enum");
                self.idents(names);
                self.close();
            }
            TypeKind::Array { dimensions, element, long_form } => {
                self.open("array");
                let mut dims: Vec<&TypeExpr> = dimensions.iter().collect();
                let mut elem: &TypeExpr = element;
                if self.opts.flatten_arrays {
                    while let TypeKind::Array { dimensions, element, .. } = &elem.kind {
                        dims.extend(dimensions.iter());
                        elem = element;
                    }
                }
                self.out.push_str(" (");
                for (i, d) in dims.iter().enumerate() {
                    if i > 0 {
                        self.sp();
                    }
                    self.ty(d);
                }
                self.out.push(')');
                if !self.opts.flatten_arrays {
                    let flags: Vec<&str> =
                        long_form.iter().map(|&f| if f { "long" } else { "short" }).collect();
                    self.atom(&format!("[{}]", flags.join(" ")));
                }
                self.sp();
                self.ty(elem);
                self.close();
            }
            TypeKind::Record(r) => {
                self.open("record");
                match &r.base {
                    Some(BaseType::Nil(_)) => self.atom("(base NIL)"),
                    Some(BaseType::Named(q)) => self.atom(&format!("(base {})", q.dotted())),
                    None => {}
                }
                self.fields(&r.fields);
                self.close();
            }
            TypeKind::Set { packed, base } => {
                self.open(if *packed { "packedset" } else { "set" });
                self.sp();
                self.ty(base);
                self.close();
            }
            TypeKind::Pointer(to) => {
                self.open("pointer");
                self.sp();
                self.ty(to);
                self.close();
            }
            TypeKind::Procedure { params, var_params, result } => {
                self.open("proc-type");
                for (p, v) in params.iter().zip(var_params) {
                    self.sp();
                    if *v {
                        self.out.push_str("var ");
                    }
                    self.formal(p);
                }
                if let Some(r) = result {
                    self.atom(&format!(":{}", r.dotted()));
                }
                self.close();
            }
            TypeKind::Opaque => self.out.push_str("opaque"),
            TypeKind::Error => self.out.push_str("(error)"),
        }
    }

    fn fields(&mut self, fields: &[FieldItem]) {
        for f in fields {
            match f {
                FieldItem::Fixed { names, ty, .. } => {
                    self.open(" (field");
                    self.idents(names);
                    self.sp();
                    self.ty(ty);
                    self.close();
                }
                FieldItem::Variant(v) => {
                    self.open(" (variant");
                    if let Some(tag) = &v.tag_field {
                        self.atom(&tag.name);
                    }
                    self.atom(&format!(":{}", v.tag_type.dotted()));
                    for arm in &v.variants {
                        self.open(" (arm");
                        self.labels(&arm.labels);
                        self.fields(&arm.fields);
                        self.close();
                    }
                    if let Some(e) = &v.else_part {
                        self.open(" (else");
                        self.fields(e);
                        self.close();
                    }
                    self.close();
                }
            }
        }
    }

    fn designator(&mut self, d: &Designator) {
        if d.selectors.is_empty() {
            self.out.push_str(&d.head.dotted());
            return;
        }
        self.open("sel");
        self.atom(&d.head.dotted());
        for s in &d.selectors {
            match s {
                Selector::Field(f) => self.atom(&format!(".{}", f.name)),
                Selector::Index(ix, _) => {
                    self.open(" (index");
                    for e in ix {
                        self.sp();
                        self.expr(e);
                    }
                    self.close();
                }
                Selector::Deref(_) => self.atom("^"),
            }
        }
        self.close();
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Literal { text, .. } => self.out.push_str(text),
            ExprKind::Designator(d) => self.designator(d),
            ExprKind::Call { callee, args } => {
                self.open("call");
                self.sp();
                self.designator(callee);
                for a in args {
                    self.sp();
                    self.expr(a);
                }
                self.close();
            }
            ExprKind::SetConstructor { type_name, elements } => {
                self.open("set");
                if let Some(t) = type_name {
                    self.atom(&t.dotted());
                }
                for el in elements {
                    self.sp();
                    self.expr(&el.low);
                    if let Some(h) = &el.high {
                        self.out.push_str("..");
                        self.expr(h);
                    }
                }
                self.close();
            }
            ExprKind::Unary { op, operand, .. } => {
                let head = match op {
                    UnaryOp::Not => "NOT",
                    UnaryOp::Neg => "neg",
                    UnaryOp::Plus => "pos",
                };
                self.open(head);
                self.sp();
                self.expr(operand);
                self.close();
            }
            ExprKind::Binary { op, lhs, rhs, .. } => {
                self.open(op.symbol());
                self.sp();
                self.expr(lhs);
                self.sp();
                self.expr(rhs);
                self.close();
            }
            ExprKind::TypeConversion { operand, target, .. } => {
                self.open("::");
                self.sp();
                self.expr(operand);
                self.atom(&target.dotted());
                self.close();
            }
            ExprKind::Paren(inner) => {
                if self.opts.ignore_parens {
                    self.expr(inner);
                } else {
                    self.open("paren");
                    self.sp();
                    self.expr(inner);
                    self.close();
                }
            }
            ExprKind::Error => {
                let _ = write!(self.out, "(error)");
            }
        }
    }
}
