use crate::lexer::DialectId;
use crate::syntax::*;

use super::{Origin, Root, ScopeId, ScopedSymbols, SymRef, SymbolKind, MODULE_SCOPE};

/// Coarse classification of a type; enough to tell sets from non-sets and
/// to find pointer-like types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeClass {
    Set,
    Whole,
    Real,
    Char,
    Boolean,
    Enumeration,
    Pointer,
    Opaque,
    Procedure,
    Record,
    Array,
    Other,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeInfo {
    pub class: TypeClass,
    /// Name of the type after resolving aliases: a pervasive spelling or
    /// `Module.Name`. Absent for anonymous types.
    pub canonical: Option<String>,
}

impl TypeInfo {
    pub const UNKNOWN: TypeInfo = TypeInfo {
        class: TypeClass::Unknown,
        canonical: None,
    };

    fn class(class: TypeClass) -> Self {
        TypeInfo {
            class,
            canonical: None,
        }
    }

    fn builtin(name: &str) -> Self {
        TypeInfo {
            class: builtin_class(name),
            canonical: Some(name.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetTypedness {
    IsSet,
    NotSet,
    Unknown,
}

fn builtin_class(name: &str) -> TypeClass {
    match name {
        "BITSET" => TypeClass::Set,
        "INTEGER" | "CARDINAL" | "LONGINT" | "LONGCARD" => TypeClass::Whole,
        "REAL" | "LONGREAL" => TypeClass::Real,
        "CHAR" | "UNICHAR" => TypeClass::Char,
        "BOOLEAN" => TypeClass::Boolean,
        "PROC" => TypeClass::Procedure,
        "ADDRESS" => TypeClass::Pointer,
        "COMPLEX" | "LONGCOMPLEX" | "PROTECTION" | "WORD" | "BYTE" | "LOC" => TypeClass::Other,
        _ => TypeClass::Unknown,
    }
}

/// A type expression together with where its names are resolved.
#[derive(Clone, Copy)]
enum Ty<'a> {
    Expr {
        table: &'a ScopedSymbols,
        scope: ScopeId,
        expr: &'a TypeExpr,
    },
    Builtin(&'a str),
    Unknown,
}

const MAX_DEPTH: usize = 32;

impl ScopedSymbols {
    fn type_of_name<'a>(&'a self, scope: ScopeId, q: &QualIdent) -> (Ty<'a>, Option<String>) {
        let Some(r) = self.resolve_qualident(scope, q) else {
            return (Ty::Unknown, None);
        };
        sym_as_type(r)
    }

    /// Resolve named aliases; returns the structural type and the last
    /// type name passed through.
    fn expand<'a>(&'a self, ty: Ty<'a>) -> (Ty<'a>, Option<String>) {
        let mut ty = ty;
        let mut name = None;
        for _ in 0..MAX_DEPTH {
            match ty {
                Ty::Expr {
                    table,
                    scope,
                    expr:
                        TypeExpr {
                            kind: TypeKind::Named(q),
                            ..
                        },
                } => {
                    let (next, n) = table.type_of_name(scope, q);
                    if n.is_some() {
                        name = n;
                    }
                    ty = next;
                }
                Ty::Builtin(b) => return (ty, Some(b.to_string())),
                _ => return (ty, name),
            }
        }
        (Ty::Unknown, None)
    }

    fn info(&self, ty: Ty<'_>, depth: usize) -> TypeInfo {
        let (ty, name) = self.expand(ty);
        let class = match ty {
            Ty::Builtin(b) => return TypeInfo::builtin(b),
            Ty::Unknown => TypeClass::Unknown,
            Ty::Expr { table, scope, expr } => match &expr.kind {
                TypeKind::Named(_) => TypeClass::Unknown,
                TypeKind::Subrange { base: Some(b), .. } => {
                    let (t, _) = table.type_of_name(scope, b);
                    self.info(t, depth + 1).class
                }
                TypeKind::Subrange { low, .. } => table.expr_info_in(scope, low, depth + 1).class,
                TypeKind::Enumeration(_) => TypeClass::Enumeration,
                TypeKind::Array { .. } => TypeClass::Array,
                TypeKind::Record(_) => TypeClass::Record,
                TypeKind::Set { .. } => TypeClass::Set,
                TypeKind::Pointer(_) => TypeClass::Pointer,
                TypeKind::Procedure { .. } => TypeClass::Procedure,
                TypeKind::Opaque => TypeClass::Opaque,
                TypeKind::Error => TypeClass::Unknown,
            },
        };
        TypeInfo {
            class,
            canonical: name,
        }
    }

    fn field_of<'a>(&'a self, ty: Ty<'a>, field: &str, depth: usize) -> Ty<'a> {
        if depth > MAX_DEPTH {
            return Ty::Unknown;
        }
        let (ty, _) = self.expand(ty);
        let Ty::Expr {
            table,
            scope,
            expr:
                TypeExpr {
                    kind: TypeKind::Record(r),
                    ..
                },
        } = ty
        else {
            return Ty::Unknown;
        };
        if let Some(found) = find_field(&r.fields, field) {
            return Ty::Expr {
                table,
                scope,
                expr: found,
            };
        }
        if let Some(BaseType::Named(q)) = &r.base {
            let (base, _) = table.type_of_name(scope, q);
            return table.field_of(base, field, depth + 1);
        }
        Ty::Unknown
    }

    fn field_names(&self, ty: Ty<'_>, out: &mut Vec<String>, depth: usize) -> bool {
        if depth > MAX_DEPTH {
            return false;
        }
        let (ty, _) = self.expand(ty);
        let Ty::Expr {
            table,
            scope,
            expr:
                TypeExpr {
                    kind: TypeKind::Record(r),
                    ..
                },
        } = ty
        else {
            return false;
        };
        collect_field_names(&r.fields, out);
        match &r.base {
            Some(BaseType::Named(q)) => {
                let (base, _) = table.type_of_name(scope, q);
                table.field_names(base, out, depth + 1)
            }
            _ => true,
        }
    }

    /// Field names visible inside the `WITH` region `i`; `None` when the
    /// record type is not known.
    pub(super) fn with_fields(&self, i: usize) -> Option<Vec<String>> {
        let w = &self.withs[i];
        let ty = self.designator_ty(&w.designator, 0);
        let mut out = Vec::new();
        self.field_names(ty, &mut out, 0).then_some(out)
    }

    fn select<'a>(&'a self, mut ty: Ty<'a>, fields: &[Ident], selectors: &'a [Selector]) -> Ty<'a> {
        for f in fields {
            ty = self.field_of(ty, &f.name, 0);
        }
        for s in selectors {
            ty = match s {
                Selector::Field(f) => self.field_of(ty, &f.name, 0),
                Selector::Index(ix, _) => {
                    let mut t = ty;
                    let mut remaining = ix.len();
                    while remaining > 0 {
                        let (expanded, _) = self.expand(t);
                        match expanded {
                            Ty::Expr {
                                table,
                                scope,
                                expr:
                                    TypeExpr {
                                        kind:
                                            TypeKind::Array {
                                                dimensions,
                                                element,
                                                ..
                                            },
                                        ..
                                    },
                            } => {
                                let used = remaining.min(dimensions.len());
                                remaining -= used;
                                t = if used == dimensions.len() {
                                    Ty::Expr {
                                        table,
                                        scope,
                                        expr: element,
                                    }
                                } else {
                                    // Partially indexed multi-dimensional array;
                                    // the remainder is still an array.
                                    return Ty::Unknown;
                                };
                            }
                            _ => return Ty::Unknown,
                        }
                    }
                    t
                }
                Selector::Deref(_) => match self.expand(ty).0 {
                    Ty::Expr {
                        table,
                        scope,
                        expr:
                            TypeExpr {
                                kind: TypeKind::Pointer(to),
                                ..
                            },
                    } => Ty::Expr {
                        table,
                        scope,
                        expr: to,
                    },
                    _ => Ty::Unknown,
                },
            };
        }
        ty
    }

    fn designator_ty<'a>(&'a self, d: &'a Designator, depth: usize) -> Ty<'a> {
        if depth > MAX_DEPTH {
            return Ty::Unknown;
        }
        match self.designator_root(d) {
            Root::Symbol(_) => {
                let scope = self.scope_at(d.span.start);
                let Some((r, rest)) = self.resolve_prefix(scope, &d.head.parts) else {
                    return Ty::Unknown;
                };
                let start = sym_value_type(r);
                self.select(start, rest, &d.selectors)
            }
            Root::WithField { region, field } => {
                let w = &self.withs[region];
                let rec = self.designator_ty(&w.designator, depth + 1);
                let start = self.field_of(rec, &field, 0);
                self.select(start, &d.head.parts[1..], &d.selectors)
            }
            Root::WithUnknown | Root::Unresolved => Ty::Unknown,
        }
    }

    /// Type facts about `e`, evaluated in the scope it appears in.
    pub fn expr_info(&self, e: &Expr) -> TypeInfo {
        self.expr_info_in(self.scope_at(e.span.start), e, 0)
    }

    fn expr_info_in(&self, scope: ScopeId, e: &Expr, depth: usize) -> TypeInfo {
        if depth > MAX_DEPTH {
            return TypeInfo::UNKNOWN;
        }
        match &e.kind {
            ExprKind::Literal { kind, text } => TypeInfo::class(match kind {
                LiteralKind::Whole => TypeClass::Whole,
                LiteralKind::Real => TypeClass::Real,
                LiteralKind::CharCode => TypeClass::Char,
                LiteralKind::String if text.len() == 3 => TypeClass::Char,
                LiteralKind::String => TypeClass::Other,
            }),
            ExprKind::SetConstructor { .. } => TypeInfo::class(TypeClass::Set),
            ExprKind::Designator(d) => self.designator_info(scope, d, depth),
            ExprKind::Call { callee, args } => self.call_info(scope, callee, args, depth),
            ExprKind::Unary { op, operand, .. } => match op {
                UnaryOp::Not => TypeInfo::builtin("BOOLEAN"),
                _ => self.expr_info_in(scope, operand, depth + 1),
            },
            ExprKind::Binary { op, lhs, rhs, .. } => {
                if op.is_relation() {
                    return TypeInfo::builtin("BOOLEAN");
                }
                match op {
                    BinaryOp::Div | BinaryOp::Mod | BinaryOp::Rem => TypeInfo::class(TypeClass::Whole),
                    BinaryOp::And | BinaryOp::Or => TypeInfo::builtin("BOOLEAN"),
                    BinaryOp::Diff => TypeInfo::class(TypeClass::Set),
                    _ => {
                        let l = self.expr_info_in(scope, lhs, depth + 1);
                        let r = self.expr_info_in(scope, rhs, depth + 1);
                        combine_arith(l, r)
                    }
                }
            }
            ExprKind::TypeConversion { target, .. } => {
                let (t, _) = self.type_of_name(scope, target);
                self.info(t, depth + 1)
            }
            ExprKind::Paren(inner) => self.expr_info_in(scope, inner, depth + 1),
            ExprKind::Error => TypeInfo::UNKNOWN,
        }
    }

    fn designator_info(&self, scope: ScopeId, d: &Designator, depth: usize) -> TypeInfo {
        if let Root::Symbol(_) = self.designator_root(d) {
            if let Some((r, rest)) = self.resolve_prefix(scope, &d.head.parts) {
                let sym = r.symbol();
                if rest.is_empty() && d.selectors.is_empty() {
                    match sym.kind {
                        SymbolKind::Const => {
                            if sym.origin == Origin::Pervasive {
                                return match sym.name.as_str() {
                                    "TRUE" | "FALSE" => TypeInfo::builtin("BOOLEAN"),
                                    "NIL" => TypeInfo::class(TypeClass::Pointer),
                                    _ => TypeInfo::class(TypeClass::Other),
                                };
                            }
                            return match &sym.value {
                                Some(v) => r.table.expr_info_in(sym.scope, v, depth + 1),
                                None => TypeInfo::UNKNOWN,
                            };
                        }
                        SymbolKind::Procedure => return TypeInfo::class(TypeClass::Procedure),
                        SymbolKind::Type | SymbolKind::Module | SymbolKind::Import => {
                            return TypeInfo::UNKNOWN
                        }
                        _ => {}
                    }
                }
            }
        }
        let ty = self.designator_ty(d, depth);
        self.info(ty, depth + 1)
    }

    fn call_info(&self, scope: ScopeId, callee: &Designator, args: &[Expr], depth: usize) -> TypeInfo {
        let Some((r, rest)) = self.resolve_prefix(scope, &callee.head.parts) else {
            return TypeInfo::UNKNOWN;
        };
        let sym = r.symbol();
        let pervasive = sym.origin == Origin::Pervasive
            || (sym.kind == SymbolKind::Procedure
                && matches!(&sym.origin, Origin::Imported { module } if module == "SYSTEM"));
        if rest.is_empty() && callee.selectors.is_empty() && pervasive {
            if let Some(info) = self.builtin_call(scope, &sym.name, args, depth) {
                return info;
            }
        }
        // Resolving the name of a type used as a function (a type transfer).
        if sym.kind == SymbolKind::Type && rest.is_empty() && callee.selectors.is_empty() {
            let (t, n) = sym_as_type(r);
            let mut info = self.info(t, depth + 1);
            if info.canonical.is_none() {
                info.canonical = n;
            }
            return info;
        }
        if sym.kind == SymbolKind::Procedure && rest.is_empty() && callee.selectors.is_empty() {
            return match sym.signature.as_ref().and_then(|s| s.result.as_ref()) {
                Some(q) => {
                    let (t, _) = r.table.type_of_name(sym.scope, q);
                    r.table.info(t, depth + 1)
                }
                None => TypeInfo::UNKNOWN,
            };
        }
        // Call through a procedure-typed designator.
        let ty = self.designator_ty(callee, depth);
        match self.expand(ty).0 {
            Ty::Expr {
                table,
                scope,
                expr:
                    TypeExpr {
                        kind: TypeKind::Procedure { result: Some(q), .. },
                        ..
                    },
            } => {
                let (t, _) = table.type_of_name(scope, q);
                table.info(t, depth + 1)
            }
            _ => TypeInfo::UNKNOWN,
        }
    }

    fn builtin_call(&self, scope: ScopeId, name: &str, args: &[Expr], depth: usize) -> Option<TypeInfo> {
        let type_arg = |i: usize| -> TypeInfo {
            match args.get(i).and_then(|a| a.as_designator()) {
                Some(d) if d.selectors.is_empty() => {
                    let (t, _) = self.type_of_name(scope, &d.head);
                    self.info(t, depth + 1)
                }
                _ => TypeInfo::UNKNOWN,
            }
        };
        Some(match name {
            "ORD" | "SIZE" | "HIGH" | "LENGTH" | "CARD" | "TRUNC" | "TSIZE" => TypeInfo::builtin("CARDINAL"),
            "INT" => TypeInfo::builtin("INTEGER"),
            "CHR" | "CAP" => TypeInfo::builtin("CHAR"),
            "UCHR" => TypeInfo::builtin("UNICHAR"),
            "FLOAT" => TypeInfo::builtin("REAL"),
            "LFLOAT" => TypeInfo::builtin("LONGREAL"),
            "ODD" => TypeInfo::builtin("BOOLEAN"),
            "ADR" | "ADDADR" | "SUBADR" | "MAKEADR" => TypeInfo::builtin("ADDRESS"),
            "VAL" | "CAST" | "MAX" | "MIN" => type_arg(0),
            "ABS" | "SHIFT" | "ROTATE" => match args.first() {
                Some(a) => self.expr_info_in(scope, a, depth + 1),
                None => TypeInfo::UNKNOWN,
            },
            _ => return None,
        })
    }

    /// Type facts of the type named by `q` at `scope`.
    pub fn named_type_info(&self, scope: ScopeId, q: &QualIdent) -> TypeInfo {
        let (t, _) = self.type_of_name(scope, q);
        self.info(t, 0)
    }

    /// Type facts of a designator used as a value.
    pub fn designator_type_info(&self, d: &Designator) -> TypeInfo {
        self.designator_info(self.scope_at(d.span.start), d, 0)
    }

    /// Parameter passing modes of the procedure a call designator names,
    /// when its signature is known.
    pub fn callee_var_params(&self, callee: &Designator) -> Option<Vec<bool>> {
        let scope = self.scope_at(callee.span.start);
        let (r, rest) = self.resolve_prefix(scope, &callee.head.parts)?;
        let sym = r.symbol();
        if rest.is_empty() && callee.selectors.is_empty() {
            if sym.origin == Origin::Pervasive {
                return match sym.name.as_str() {
                    "INC" | "DEC" | "INCL" | "EXCL" | "NEW" | "DISPOSE" => Some(vec![true, false]),
                    _ => Some(Vec::new()),
                };
            }
            if sym.kind == SymbolKind::Procedure {
                return sym
                    .signature
                    .as_ref()
                    .map(|s| s.params.iter().map(|p| p.var).collect());
            }
        }
        let ty = self.designator_ty(callee, 0);
        match self.expand(ty).0 {
            Ty::Expr {
                expr:
                    TypeExpr {
                        kind: TypeKind::Procedure { var_params, .. },
                        ..
                    },
                ..
            } => Some(var_params.clone()),
            _ => None,
        }
    }
}

fn sym_as_type(r: SymRef<'_>) -> (Ty<'_>, Option<String>) {
    let sym = r.symbol();
    if sym.kind != SymbolKind::Type {
        return (Ty::Unknown, None);
    }
    match &sym.ty {
        Some(expr) => {
            let name = if sym.scope == MODULE_SCOPE {
                format!("{}.{}", r.table.module, sym.name)
            } else {
                format!("{}.{}#{}", r.table.module, sym.name, sym.scope)
            };
            (
                Ty::Expr {
                    table: r.table,
                    scope: sym.scope,
                    expr,
                },
                Some(name),
            )
        }
        None => (Ty::Builtin(&sym.name), Some(sym.name.clone())),
    }
}

fn sym_value_type(r: SymRef<'_>) -> Ty<'_> {
    let sym = r.symbol();
    match (&sym.kind, &sym.ty) {
        (SymbolKind::Var | SymbolKind::Param { .. } | SymbolKind::EnumConst, Some(expr)) => Ty::Expr {
            table: r.table,
            scope: sym.scope,
            expr,
        },
        _ => Ty::Unknown,
    }
}

fn find_field<'a>(fields: &'a [FieldItem], name: &str) -> Option<&'a TypeExpr> {
    for f in fields {
        match f {
            FieldItem::Fixed { names, ty, .. } => {
                if names.iter().any(|n| n.name == name) {
                    return Some(ty);
                }
            }
            FieldItem::Variant(v) => {
                if v.tag_field.as_ref().is_some_and(|t| t.name == name) {
                    return None;
                }
                for arm in &v.variants {
                    if let Some(t) = find_field(&arm.fields, name) {
                        return Some(t);
                    }
                }
                if let Some(e) = &v.else_part {
                    if let Some(t) = find_field(e, name) {
                        return Some(t);
                    }
                }
            }
        }
    }
    None
}

fn collect_field_names(fields: &[FieldItem], out: &mut Vec<String>) {
    for f in fields {
        match f {
            FieldItem::Fixed { names, .. } => out.extend(names.iter().map(|n| n.name.clone())),
            FieldItem::Variant(v) => {
                if let Some(t) = &v.tag_field {
                    out.push(t.name.clone());
                }
                for arm in &v.variants {
                    collect_field_names(&arm.fields, out);
                }
                if let Some(e) = &v.else_part {
                    collect_field_names(e, out);
                }
            }
        }
    }
}

fn combine_arith(l: TypeInfo, r: TypeInfo) -> TypeInfo {
    use TypeClass::*;
    match (l.class, r.class) {
        (Set, Set) => {
            if l.canonical == r.canonical {
                l
            } else {
                TypeInfo::class(Set)
            }
        }
        (Unknown, _) | (_, Unknown) => {
            // One non-set operand rules out a set operation.
            let known = if l.class == Unknown { &r } else { &l };
            if known.class == Set || known.class == Unknown {
                TypeInfo::UNKNOWN
            } else {
                TypeInfo::class(known.class)
            }
        }
        (Set, _) | (_, Set) => TypeInfo::UNKNOWN,
        _ if l == r => l,
        (a, _) => TypeInfo::class(a),
    }
}

/// Whether `e` is provably a set, provably not a set, or neither.
pub fn set_typedness(e: &Expr, symbols: &ScopedSymbols) -> SetTypedness {
    match symbols.expr_info(e).class {
        TypeClass::Set => SetTypedness::IsSet,
        TypeClass::Unknown => SetTypedness::Unknown,
        _ => SetTypedness::NotSet,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NilCompatibility {
    Allowed,
    /// Accepted by the revised language only.
    LegacyRestricted,
    /// The other side is not pointer-like (or its type is unknown).
    NotApplicable,
}

/// Compatibility of `NIL` with a value of class `other`.
pub fn classify_nil_compatibility(other: TypeClass, profile: DialectId) -> NilCompatibility {
    match (other, profile) {
        (TypeClass::Pointer, _) => NilCompatibility::Allowed,
        (TypeClass::Opaque | TypeClass::Procedure, DialectId::Revised) => NilCompatibility::Allowed,
        (TypeClass::Opaque | TypeClass::Procedure, DialectId::Legacy) => NilCompatibility::LegacyRestricted,
        _ => NilCompatibility::NotApplicable,
    }
}
