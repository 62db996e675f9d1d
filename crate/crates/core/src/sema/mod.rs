//! Scoped symbol tables and the few type facts the rules rely on.

mod types;
mod writes;

pub use types::{classify_nil_compatibility, set_typedness, NilCompatibility, SetTypedness, TypeClass, TypeInfo};
pub use writes::{find_imported_writes, find_nil_sites, NilSite, WriteSite};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::diagnostic::{Diagnostic, RuleId};
use crate::lexer::DialectProfile;
use crate::span::SourceSpan;
use crate::syntax::visit::{self, Visitor};
use crate::syntax::*;

pub type ScopeId = usize;
pub type SymbolId = usize;

/// The pervasive scope is always scope 0.
pub const PERVASIVE_SCOPE: ScopeId = 0;
/// The module scope of the unit is always scope 1.
pub const MODULE_SCOPE: ScopeId = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    Pervasive,
    Module,
    Procedure,
    LocalModule,
}

#[derive(Debug, Clone)]
pub struct Scope {
    pub kind: ScopeKind,
    pub name: String,
    pub span: Option<SourceSpan>,
    pub parent: Option<ScopeId>,
    pub names: BTreeMap<String, SymbolId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Const,
    Type,
    Var,
    Param { var: bool },
    Procedure,
    Module,
    EnumConst,
    /// Imported name whose defining module is not loaded.
    Import,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Local,
    Imported { module: String },
    Pervasive,
}

/// Where an alias symbol points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// `IMPORT M`: the module itself.
    Module(String),
    /// `FROM M IMPORT name`.
    Member { module: String, name: String },
    /// A name looked up in another scope of this unit (local-module
    /// import and export).
    Scope { scope: ScopeId, name: String },
    /// A local module, for qualified access to its exports.
    LocalModule(ScopeId),
}

#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub var: bool,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone)]
pub struct Signature {
    pub params: Vec<ParamSpec>,
    pub result: Option<QualIdent>,
}

#[derive(Debug, Clone)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    pub origin: Origin,
    pub span: SourceSpan,
    pub scope: ScopeId,
    /// Declared type; for type symbols, the definition.
    pub ty: Option<TypeExpr>,
    pub value: Option<Expr>,
    pub signature: Option<Signature>,
    pub target: Option<Target>,
    forward: bool,
}

/// A `WITH` statement body, for resolving field names used inside it.
#[derive(Debug, Clone)]
pub struct WithRegion {
    pub body: SourceSpan,
    pub designator: Designator,
    pub scope: ScopeId,
}

/// Symbol tables of one compilation unit.
#[derive(Debug, Clone)]
pub struct ScopedSymbols {
    pub module: String,
    pub unit_kind: UnitKind,
    pub profile: DialectProfile,
    pub scopes: Vec<Scope>,
    pub symbols: Vec<Symbol>,
    pub withs: Vec<WithRegion>,
    /// Definition modules of imported modules that were available.
    pub imports: BTreeMap<String, Arc<ScopedSymbols>>,
    /// For an implementation module, its own definition part.
    pub own_definition: Option<Arc<ScopedSymbols>>,
    /// Identifier uses that resolve to nothing.
    pub unresolved: Vec<Ident>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Access to the symbol tables of other modules' definition parts.
pub trait DefinitionSource {
    fn definition(&self, module: &str) -> Option<Arc<ScopedSymbols>>;
}

/// A symbol together with the table that owns it.
#[derive(Debug, Clone, Copy)]
pub struct SymRef<'a> {
    pub table: &'a ScopedSymbols,
    pub id: SymbolId,
}

impl<'a> SymRef<'a> {
    pub fn symbol(&self) -> &'a Symbol {
        &self.table.symbols[self.id]
    }
}

/// What the first identifier of a designator refers to.
#[derive(Debug, Clone)]
pub enum Root<'a> {
    Symbol(SymRef<'a>),
    /// A field of the record named by the enclosing `WITH`.
    WithField { region: usize, field: String },
    /// Inside a `WITH` whose record type is unknown.
    WithUnknown,
    Unresolved,
}

pub const PERVASIVE_TYPES: &[&str] = &[
    "BITSET", "BOOLEAN", "CARDINAL", "CHAR", "COMPLEX", "INTEGER", "LONGCOMPLEX", "LONGINT",
    "LONGREAL", "PROC", "PROTECTION", "REAL", "LONGCARD", "UNICHAR",
];
pub const PERVASIVE_CONSTS: &[&str] = &["FALSE", "TRUE", "NIL", "INTERRUPTIBLE", "UNINTERRUPTIBLE"];

/// Build the symbol tables of `unit`. Imports are resolved through
/// `project` when given; otherwise imported names stay unresolved.
pub fn build_symbols(
    unit: &CompilationUnit,
    profile: &DialectProfile,
    project: Option<&dyn DefinitionSource>,
) -> ScopedSymbols {
    let mut b = Builder {
        t: ScopedSymbols {
            module: unit.name.name.clone(),
            unit_kind: unit.kind,
            profile: profile.clone(),
            scopes: Vec::new(),
            symbols: Vec::new(),
            withs: Vec::new(),
            imports: BTreeMap::new(),
            own_definition: None,
            unresolved: Vec::new(),
            diagnostics: Vec::new(),
        },
        project,
    };
    b.pervasives(profile);
    let module = b.scope(ScopeKind::Module, &unit.name.name, Some(unit.span), Some(PERVASIVE_SCOPE));
    debug_assert_eq!(module, MODULE_SCOPE);
    if unit.kind == UnitKind::Implementation {
        if let Some(p) = project {
            b.t.own_definition = p.definition(&unit.name.name);
        }
    }
    b.imports(module, &unit.imports, false);
    b.block(module, &unit.declarations);
    let mut table = b.t;
    let mut uses = UseCollector {
        table: &table,
        unresolved: Vec::new(),
        withs: Vec::new(),
    };
    visit::walk_unit(&mut uses, unit);
    let (unresolved, withs) = (uses.unresolved, uses.withs);
    table.unresolved = unresolved;
    table.withs = withs;
    table
}

struct Builder<'p> {
    t: ScopedSymbols,
    project: Option<&'p dyn DefinitionSource>,
}

impl Builder<'_> {
    fn scope(&mut self, kind: ScopeKind, name: &str, span: Option<SourceSpan>, parent: Option<ScopeId>) -> ScopeId {
        self.t.scopes.push(Scope {
            kind,
            name: name.to_string(),
            span,
            parent,
            names: BTreeMap::new(),
        });
        self.t.scopes.len() - 1
    }

    fn pervasives(&mut self, profile: &DialectProfile) {
        let root = self.scope(ScopeKind::Pervasive, "", None, None);
        let mut names: Vec<&str> = profile
            .pervasive_idents
            .iter()
            .chain(profile.removed_pervasives.iter())
            .copied()
            .collect();
        names.sort_unstable();
        names.dedup();
        for name in names {
            let kind = if PERVASIVE_TYPES.contains(&name) {
                SymbolKind::Type
            } else if PERVASIVE_CONSTS.contains(&name) {
                SymbolKind::Const
            } else {
                SymbolKind::Procedure
            };
            self.insert(root, Symbol {
                name: name.to_string(),
                kind,
                origin: Origin::Pervasive,
                span: SourceSpan::default(),
                scope: root,
                ty: None,
                value: None,
                signature: None,
                target: None,
                forward: false,
            });
        }
    }

    fn insert(&mut self, scope: ScopeId, sym: Symbol) -> SymbolId {
        if let Some(&prev) = self.t.scopes[scope].names.get(&sym.name) {
            let old = &self.t.symbols[prev];
            let completes_forward = old.forward && sym.kind == SymbolKind::Procedure;
            if !completes_forward {
                let msg = format!(
                    "`{}` is already declared in this scope (line {})",
                    sym.name, old.span.start_line
                );
                self.t
                    .diagnostics
                    .push(Diagnostic::error(RuleId::DuplicateDeclaration, sym.span, msg));
                return prev;
            }
        }
        let id = self.t.symbols.len();
        self.t.scopes[scope].names.insert(sym.name.clone(), id);
        self.t.symbols.push(sym);
        id
    }

    fn local(&mut self, scope: ScopeId, name: &Ident, kind: SymbolKind) -> Symbol {
        let _ = self;
        Symbol {
            name: name.name.clone(),
            kind,
            origin: Origin::Local,
            span: name.span,
            scope,
            ty: None,
            value: None,
            signature: None,
            target: None,
            forward: false,
        }
    }

    fn load(&mut self, module: &str) -> bool {
        if self.t.imports.contains_key(module) {
            return true;
        }
        match self.project.and_then(|p| p.definition(module)) {
            Some(defs) => {
                self.t.imports.insert(module.to_string(), defs);
                true
            }
            None => false,
        }
    }

    fn imports(&mut self, scope: ScopeId, imports: &[Import], local_module: bool) {
        for imp in imports {
            match imp {
                Import::From { module, names, .. } => {
                    let loaded = self.load(&module.name);
                    for n in names {
                        let mut sym = self.local(scope, n, SymbolKind::Import);
                        sym.origin = Origin::Imported {
                            module: module.name.clone(),
                        };
                        sym.target = Some(Target::Member {
                            module: module.name.clone(),
                            name: n.name.clone(),
                        });
                        if loaded {
                            if let Some(kind) = self.member_kind(&module.name, &n.name) {
                                sym.kind = kind;
                            }
                        } else if let Some(kind) = system_member_kind(&module.name, &n.name) {
                            sym.kind = kind;
                        }
                        self.insert(scope, sym);
                    }
                }
                Import::Modules { modules, .. } => {
                    for m in modules {
                        let mut sym = self.local(scope, m, SymbolKind::Module);
                        if local_module {
                            let parent = self.t.scopes[scope].parent.unwrap_or(MODULE_SCOPE);
                            sym.target = Some(Target::Scope {
                                scope: parent,
                                name: m.name.clone(),
                            });
                            sym.kind = SymbolKind::Import;
                        } else {
                            self.load(&m.name);
                            sym.origin = Origin::Imported {
                                module: m.name.clone(),
                            };
                            sym.target = Some(Target::Module(m.name.clone()));
                        }
                        self.insert(scope, sym);
                    }
                }
            }
        }
    }

    fn member_kind(&self, module: &str, name: &str) -> Option<SymbolKind> {
        let defs = self.t.imports.get(module)?;
        let id = *defs.scopes[MODULE_SCOPE].names.get(name)?;
        let sym = &defs.symbols[id];
        Some(match sym.kind {
            SymbolKind::Param { .. } => SymbolKind::Var,
            k => k,
        })
    }

    fn block(&mut self, scope: ScopeId, decls: &[Declaration]) {
        for d in decls {
            match &d.kind {
                DeclKind::Const { name, value } => {
                    let mut s = self.local(scope, name, SymbolKind::Const);
                    s.value = Some(value.clone());
                    self.insert(scope, s);
                }
                DeclKind::Type { name, ty } => {
                    let mut s = self.local(scope, name, SymbolKind::Type);
                    s.ty = Some(ty.clone());
                    self.insert(scope, s);
                    let named = TypeExpr {
                        kind: TypeKind::Named(QualIdent {
                            parts: vec![name.clone()],
                            span: name.span,
                        }),
                        span: name.span,
                    };
                    self.enum_consts(scope, ty, &named);
                    if let TypeKind::Procedure { .. } = ty.kind {
                        let sig = proc_type_signature(ty);
                        let id = self.t.scopes[scope].names[&name.name];
                        self.t.symbols[id].signature = sig;
                    }
                }
                DeclKind::Var { names, ty } => {
                    for n in names {
                        let mut s = self.local(scope, n, SymbolKind::Var);
                        s.ty = Some(ty.clone());
                        self.insert(scope, s);
                    }
                    self.enum_consts(scope, ty, ty);
                }
                DeclKind::Procedure(p) => self.procedure(scope, d.span, p),
                DeclKind::Module(m) => self.local_module(scope, d.span, m),
                DeclKind::Error => {}
            }
        }
    }

    fn enum_consts(&mut self, scope: ScopeId, ty: &TypeExpr, typed_as: &TypeExpr) {
        if let TypeKind::Enumeration(items) = &ty.kind {
            for i in items {
                let mut s = self.local(scope, i, SymbolKind::EnumConst);
                s.ty = Some(typed_as.clone());
                self.insert(scope, s);
            }
        }
    }

    fn procedure(&mut self, scope: ScopeId, span: SourceSpan, p: &ProcedureDecl) {
        let mut params = Vec::new();
        for fp in &p.params {
            for _ in &fp.names {
                params.push(ParamSpec {
                    var: fp.var,
                    ty: formal_to_type(&fp.ty),
                });
            }
        }
        let mut s = self.local(scope, &p.name, SymbolKind::Procedure);
        s.signature = Some(Signature {
            params,
            result: p.result.clone(),
        });
        s.forward = p.forward;
        self.insert(scope, s);
        if !p.has_block {
            return;
        }
        let inner = self.scope(ScopeKind::Procedure, &p.name.name, Some(span), Some(scope));
        for fp in &p.params {
            for n in &fp.names {
                let mut s = self.local(inner, n, SymbolKind::Param { var: fp.var });
                s.ty = Some(formal_to_type(&fp.ty));
                self.insert(inner, s);
            }
        }
        self.block(inner, &p.declarations);
    }

    fn local_module(&mut self, scope: ScopeId, span: SourceSpan, m: &LocalModule) {
        let inner = self.scope(ScopeKind::LocalModule, &m.name.name, Some(span), Some(scope));
        let mut s = self.local(scope, &m.name, SymbolKind::Module);
        s.target = Some(Target::LocalModule(inner));
        self.insert(scope, s);
        self.imports(inner, &m.imports, true);
        self.block(inner, &m.declarations);
        if let Some(export) = &m.export {
            if !export.qualified {
                for n in &export.names {
                    let mut s = self.local(scope, n, SymbolKind::Import);
                    s.target = Some(Target::Scope {
                        scope: inner,
                        name: n.name.clone(),
                    });
                    if let Some(&id) = self.t.scopes[inner].names.get(&n.name) {
                        s.kind = self.t.symbols[id].kind;
                    }
                    self.insert(scope, s);
                }
            }
        }
    }
}

/// Known members of the pseudo-module `SYSTEM` when no definition file
/// for it is loaded.
fn system_member_kind(module: &str, name: &str) -> Option<SymbolKind> {
    if module != "SYSTEM" {
        return None;
    }
    match name {
        "ADDRESS" | "WORD" | "BYTE" | "LOC" => Some(SymbolKind::Type),
        "CAST" | "SHIFT" | "ROTATE" | "ADR" | "TSIZE" | "ADDADR" | "SUBADR" | "DIFADR"
        | "MAKEADR" => Some(SymbolKind::Procedure),
        _ => None,
    }
}

fn formal_to_type(f: &FormalType) -> TypeExpr {
    let elem = TypeExpr {
        kind: TypeKind::Named(f.name.clone()),
        span: f.span,
    };
    (0..f.open_dims).fold(elem, |element, _| TypeExpr {
        kind: TypeKind::Array {
            dimensions: vec![TypeExpr {
                kind: TypeKind::Named(QualIdent {
                    parts: vec![Ident {
                        name: "CARDINAL".into(),
                        span: f.span.head(),
                    }],
                    span: f.span.head(),
                }),
                span: f.span.head(),
            }],
            element: Box::new(element),
            long_form: vec![false],
        },
        span: f.span,
    })
}

fn proc_type_signature(ty: &TypeExpr) -> Option<Signature> {
    match &ty.kind {
        TypeKind::Procedure {
            params,
            var_params,
            result,
        } => Some(Signature {
            params: params
                .iter()
                .zip(var_params)
                .map(|(p, &var)| ParamSpec {
                    var,
                    ty: formal_to_type(p),
                })
                .collect(),
            result: result.clone(),
        }),
        _ => None,
    }
}

impl ScopedSymbols {
    /// Innermost scope whose text contains `offset`.
    pub fn scope_at(&self, offset: usize) -> ScopeId {
        let mut best = MODULE_SCOPE;
        let mut best_len = usize::MAX;
        for (id, s) in self.scopes.iter().enumerate().skip(MODULE_SCOPE) {
            if let Some(sp) = s.span {
                if sp.start <= offset && offset < sp.end.max(sp.start + 1) && sp.len() <= best_len {
                    best = id;
                    best_len = sp.len();
                }
            }
        }
        best
    }

    /// Look `name` up from `scope` outwards. Local modules are closed:
    /// from inside one, lookup continues at the pervasive scope.
    pub fn lookup(&self, scope: ScopeId, name: &str) -> Option<SymRef<'_>> {
        let mut s = scope;
        loop {
            if let Some(&id) = self.scopes[s].names.get(name) {
                return Some(SymRef { table: self, id });
            }
            match self.scopes[s].kind {
                ScopeKind::Pervasive => return None,
                ScopeKind::LocalModule => s = PERVASIVE_SCOPE,
                ScopeKind::Module => {
                    if let Some(def) = &self.own_definition {
                        if let Some(&id) = def.scopes[MODULE_SCOPE].names.get(name) {
                            let sym = &def.symbols[id];
                            if sym.origin == Origin::Local {
                                return Some(SymRef { table: def, id });
                            }
                        }
                    }
                    s = PERVASIVE_SCOPE;
                }
                ScopeKind::Procedure => s = self.scopes[s].parent.unwrap_or(PERVASIVE_SCOPE),
            }
        }
    }

    /// Follow import and export aliases to the declaring symbol.
    /// Unloaded imports stay as they are.
    pub fn resolve_alias<'a>(&'a self, mut r: SymRef<'a>) -> SymRef<'a> {
        for _ in 0..32 {
            let next = match &r.symbol().target {
                Some(Target::Member { module, name }) => r
                    .table
                    .imports
                    .get(module)
                    .and_then(|d| d.scopes[MODULE_SCOPE].names.get(name).map(|&id| SymRef { table: d, id })),
                Some(Target::Scope { scope, name }) => r.table.lookup(*scope, name),
                _ => None,
            };
            match next {
                Some(n) => r = n,
                None => return r,
            }
        }
        r
    }

    /// The module of an `IMPORT M` symbol or a local module, as a table
    /// and scope for member lookup.
    fn module_members<'a>(&'a self, r: SymRef<'a>) -> Option<(&'a ScopedSymbols, ScopeId)> {
        match &r.symbol().target {
            Some(Target::Module(m)) => r.table.imports.get(m).map(|d| (&**d, MODULE_SCOPE)),
            Some(Target::LocalModule(s)) => Some((r.table, *s)),
            _ => None,
        }
    }

    /// Resolve a qualified identifier such as `M.T`.
    pub fn resolve_qualident(&self, scope: ScopeId, q: &QualIdent) -> Option<SymRef<'_>> {
        let (r, rest) = self.resolve_prefix(scope, &q.parts)?;
        rest.is_empty().then_some(r)
    }

    /// Resolve the module-qualified prefix of `parts`; returns the symbol
    /// and the parts left over (record fields).
    pub fn resolve_prefix<'a, 'p>(
        &'a self,
        scope: ScopeId,
        parts: &'p [Ident],
    ) -> Option<(SymRef<'a>, &'p [Ident])> {
        let first = self.lookup(scope, &parts[0].name)?;
        let mut r = self.resolve_alias(first);
        let mut i = 1;
        while i < parts.len() {
            let Some((table, s)) = r.table.module_members(r) else {
                break;
            };
            let &id = table.scopes[s].names.get(&parts[i].name)?;
            r = table.resolve_alias(SymRef { table, id });
            i += 1;
        }
        Some((r, &parts[i..]))
    }

    /// What the head of a designator at `offset` refers to, taking
    /// enclosing `WITH` statements into account.
    pub fn designator_root(&self, d: &Designator) -> Root<'_> {
        let offset = d.span.start;
        let name = &d.head.first().name;
        for (i, w) in self.withs.iter().enumerate().rev() {
            if !w.body.contains(&d.span) {
                continue;
            }
            match self.with_fields(i) {
                Some(fields) if fields.iter().any(|f| f == name) => {
                    return Root::WithField {
                        region: i,
                        field: name.clone(),
                    }
                }
                Some(_) => {}
                None => return Root::WithUnknown,
            }
        }
        let scope = self.scope_at(offset);
        match self.lookup(scope, name) {
            Some(r) => Root::Symbol(self.resolve_alias(r)),
            None => Root::Unresolved,
        }
    }

    /// Symbols declared directly in `scope`, in name order.
    pub fn symbols_in(&self, scope: ScopeId) -> impl Iterator<Item = &Symbol> {
        self.scopes[scope].names.values().map(|&id| &self.symbols[id])
    }

    /// Is `name` declared anywhere in this unit (any scope)?
    pub fn declares(&self, name: &str) -> bool {
        self.scopes
            .iter()
            .skip(MODULE_SCOPE)
            .any(|s| s.names.contains_key(name))
    }
}

struct UseCollector<'a> {
    table: &'a ScopedSymbols,
    unresolved: Vec<Ident>,
    withs: Vec<WithRegion>,
}

impl Visitor for UseCollector<'_> {
    fn visit_stmt(&mut self, s: &Stmt) {
        if let StmtKind::With { designator, body } = &s.kind {
            self.visit_designator(designator);
            if let (Some(first), Some(last)) = (body.first(), body.last()) {
                self.withs.push(WithRegion {
                    body: first.span.cover(last.span),
                    designator: designator.clone(),
                    scope: self.table.scope_at(s.span.start),
                });
            }
            visit::walk_stmts(self, body);
            return;
        }
        if let StmtKind::For { var, .. } = &s.kind {
            let scope = self.table.scope_at(var.span.start);
            if self.table.lookup(scope, &var.name).is_none() {
                self.unresolved.push(var.clone());
            }
        }
        visit::walk_stmt(self, s);
    }

    fn visit_designator(&mut self, d: &Designator) {
        let in_with = self.withs.iter().any(|w| w.body.contains(&d.span));
        let scope = self.table.scope_at(d.span.start);
        if !in_with && self.table.lookup(scope, &d.head.first().name).is_none() {
            self.unresolved.push(d.head.first().clone());
        }
        visit::walk_designator(self, d);
    }
}
