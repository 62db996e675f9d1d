//! Span-annotated abstract syntax tree for one compilation unit.

use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

/// `A.B.C`; the parts are kept separately because a prefix may name a
/// module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualIdent {
    pub parts: Vec<Ident>,
    pub span: SourceSpan,
}

impl QualIdent {
    pub fn first(&self) -> &Ident {
        &self.parts[0]
    }

    pub fn last(&self) -> &Ident {
        self.parts.last().expect("qualident has at least one part")
    }

    pub fn is_simple(&self) -> bool {
        self.parts.len() == 1
    }

    pub fn dotted(&self) -> String {
        self.parts
            .iter()
            .map(|p| p.name.as_str())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    Definition,
    Implementation,
    Program,
}

impl UnitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Definition => "definition module",
            UnitKind::Implementation => "implementation module",
            UnitKind::Program => "program module",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationUnit {
    pub kind: UnitKind,
    pub name: Ident,
    pub pragmas: Vec<ModulePragma>,
    pub imports: Vec<Import>,
    pub declarations: Vec<Declaration>,
    pub body: Option<Body>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PragmaKind {
    PrivateTo,
    Ffi,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulePragma {
    pub kind: PragmaKind,
    /// Client modules named by `PRIVATETO`.
    pub client_modules: Vec<Ident>,
    /// API name given to `FFI`, without quotes.
    pub foreign_api: String,
    /// The pragma exactly as written, delimiters included.
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Import {
    /// `FROM M IMPORT a, b;`
    From {
        module: Ident,
        names: Vec<Ident>,
        span: SourceSpan,
    },
    /// `IMPORT M, N;`
    Modules { modules: Vec<Ident>, span: SourceSpan },
}

impl Import {
    pub fn span(&self) -> SourceSpan {
        match self {
            Import::From { span, .. } | Import::Modules { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Export {
    pub qualified: bool,
    pub names: Vec<Ident>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeclKind {
    Const {
        name: Ident,
        value: Expr,
    },
    /// `ty` is `TypeKind::Opaque` for `TYPE T;` in a definition module.
    Type {
        name: Ident,
        ty: TypeExpr,
    },
    Var {
        names: Vec<Ident>,
        ty: TypeExpr,
    },
    Procedure(ProcedureDecl),
    Module(LocalModule),
    /// Unparseable text skipped by error recovery.
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureDecl {
    pub name: Ident,
    pub params: Vec<FormalParam>,
    pub result: Option<QualIdent>,
    pub forward: bool,
    pub declarations: Vec<Declaration>,
    pub body: Option<Body>,
    /// False for headings in definition modules and forward declarations.
    pub has_block: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormalParam {
    pub var: bool,
    pub names: Vec<Ident>,
    pub ty: FormalType,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalType {
    /// Number of `ARRAY OF` prefixes.
    pub open_dims: usize,
    pub name: QualIdent,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalModule {
    pub name: Ident,
    pub imports: Vec<Import>,
    pub export: Option<Export>,
    pub declarations: Vec<Declaration>,
    pub body: Option<Body>,
}

/// `BEGIN ... [EXCEPT ...] [FINALLY ... [EXCEPT ...]] END`
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Body {
    pub statements: Vec<Stmt>,
    pub except: Option<Vec<Stmt>>,
    pub finally: Option<Vec<Stmt>>,
    pub finally_except: Option<Vec<Stmt>>,
}

impl Body {
    pub fn sections(&self) -> impl Iterator<Item = &Vec<Stmt>> {
        std::iter::once(&self.statements)
            .chain(self.except.iter())
            .chain(self.finally.iter())
            .chain(self.finally_except.iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeExpr {
    pub kind: TypeKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeKind {
    Named(QualIdent),
    Subrange {
        base: Option<QualIdent>,
        low: Box<Expr>,
        high: Box<Expr>,
    },
    Enumeration(Vec<Ident>),
    /// `long_form[i]` is set when this `ARRAY` is written as an element of,
    /// or with an element of, another `ARRAY ... OF` in the nested style.
    Array {
        dimensions: Vec<TypeExpr>,
        element: Box<TypeExpr>,
        long_form: Vec<bool>,
    },
    Record(RecordType),
    Set {
        packed: bool,
        base: Box<TypeExpr>,
    },
    Pointer(Box<TypeExpr>),
    Procedure {
        params: Vec<FormalType>,
        var_params: Vec<bool>,
        result: Option<QualIdent>,
    },
    Opaque,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordType {
    pub base: Option<BaseType>,
    pub fields: Vec<FieldItem>,
}

impl RecordType {
    pub fn variant_parts(&self) -> impl Iterator<Item = &VariantPart> {
        self.fields.iter().filter_map(|f| match f {
            FieldItem::Variant(v) => Some(v),
            FieldItem::Fixed { .. } => None,
        })
    }

    pub fn variant_part(&self) -> Option<&VariantPart> {
        self.variant_parts().next()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseType {
    Nil(SourceSpan),
    Named(QualIdent),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldItem {
    Fixed {
        names: Vec<Ident>,
        ty: TypeExpr,
        span: SourceSpan,
    },
    Variant(VariantPart),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantPart {
    pub tag_field: Option<Ident>,
    pub tag_type: QualIdent,
    pub variants: Vec<Variant>,
    pub else_part: Option<Vec<FieldItem>>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub labels: Vec<CaseLabel>,
    pub fields: Vec<FieldItem>,
    pub span: SourceSpan,
}

impl Variant {
    pub fn nested(&self) -> Option<&VariantPart> {
        self.fields.iter().find_map(|f| match f {
            FieldItem::Variant(v) => Some(v),
            FieldItem::Fixed { .. } => None,
        })
    }
}

/// A case label or label range (`a`, `1 .. 9`).
#[derive(Debug, Clone, PartialEq)]
pub struct CaseLabel {
    pub low: Expr,
    pub high: Option<Expr>,
    pub span: SourceSpan,
}

impl CaseLabel {
    /// The label's qualified identifier when it is nothing else; such a
    /// label may turn out to name a type (a type-guard arm).
    pub fn as_qualident(&self) -> Option<&QualIdent> {
        if self.high.is_some() {
            return None;
        }
        match &self.low.kind {
            ExprKind::Designator(d) if d.selectors.is_empty() => Some(&d.head),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        target: Designator,
        value: Expr,
    },
    Call {
        callee: Designator,
        args: Option<Vec<Expr>>,
    },
    If {
        branches: Vec<(Expr, Vec<Stmt>)>,
        else_branch: Option<Vec<Stmt>>,
    },
    Case {
        selector: Expr,
        arms: Vec<CaseArm>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Repeat {
        body: Vec<Stmt>,
        cond: Expr,
    },
    Loop {
        body: Vec<Stmt>,
    },
    For {
        var: Ident,
        from: Expr,
        to: Expr,
        by: Option<Expr>,
        body: Vec<Stmt>,
    },
    With {
        designator: Designator,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Exit,
    Retry,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseArm {
    pub labels: Vec<CaseLabel>,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

/// `head {selector}`. The head is the longest dotted prefix; whether its
/// later parts name a module member or record fields is for sema to decide.
#[derive(Debug, Clone, PartialEq)]
pub struct Designator {
    pub head: QualIdent,
    pub selectors: Vec<Selector>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Field(Ident),
    Index(Vec<Expr>, SourceSpan),
    Deref(SourceSpan),
}

impl Selector {
    pub fn span(&self) -> SourceSpan {
        match self {
            Selector::Field(i) => i.span,
            Selector::Index(_, s) | Selector::Deref(s) => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiteralKind {
    Whole,
    Real,
    CharCode,
    String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    Add,
    Sub,
    Or,
    /// `\`, set difference.
    Diff,
    Mul,
    RealDiv,
    Div,
    Mod,
    Rem,
    And,
}

impl BinaryOp {
    pub fn is_relation(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq
                | BinaryOp::Ne
                | BinaryOp::Lt
                | BinaryOp::Le
                | BinaryOp::Gt
                | BinaryOp::Ge
                | BinaryOp::In
        )
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "#",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::In => "IN",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Or => "OR",
            BinaryOp::Diff => "\\",
            BinaryOp::Mul => "*",
            BinaryOp::RealDiv => "/",
            BinaryOp::Div => "DIV",
            BinaryOp::Mod => "MOD",
            BinaryOp::Rem => "REM",
            BinaryOp::And => "AND",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetElement {
    pub low: Expr,
    pub high: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal {
        kind: LiteralKind,
        text: String,
    },
    Designator(Designator),
    Call {
        callee: Designator,
        args: Vec<Expr>,
    },
    SetConstructor {
        type_name: Option<QualIdent>,
        elements: Vec<SetElement>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
        op_span: SourceSpan,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        op_span: SourceSpan,
    },
    /// `operand :: target`
    TypeConversion {
        operand: Box<Expr>,
        target: QualIdent,
        op_span: SourceSpan,
    },
    Paren(Box<Expr>),
    Error,
}

impl Expr {
    /// True for the forms that may stand as the left operand of `::`
    /// without parentheses.
    pub fn is_primary(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Literal { .. }
                | ExprKind::Designator(_)
                | ExprKind::Call { .. }
                | ExprKind::SetConstructor { .. }
                | ExprKind::Paren(_)
        )
    }

    pub fn strip_parens(&self) -> &Expr {
        let mut e = self;
        while let ExprKind::Paren(inner) = &e.kind {
            e = inner;
        }
        e
    }

    pub fn as_designator(&self) -> Option<&Designator> {
        match &self.kind {
            ExprKind::Designator(d) => Some(d),
            _ => None,
        }
    }
}
