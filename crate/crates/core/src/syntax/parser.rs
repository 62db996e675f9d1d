use crate::diagnostic::{Diagnostic, RuleId};
use crate::lexer::{Keyword, Token, TokenKind, TriviaKind};
use crate::span::SourceSpan;

use super::ast::*;
use super::pragma::parse_module_pragmas;

/// Parse a whole compilation unit. An AST is always produced; syntax
/// errors are returned as diagnostics and the parser resynchronises at
/// statement and declaration boundaries.
pub fn parse_compilation_unit(tokens: &[Token]) -> (CompilationUnit, Vec<Diagnostic>) {
    assert!(
        tokens.last().is_some_and(|t| t.kind == TokenKind::Eof),
        "token list must end with Eof"
    );
    let mut p = Parser::new(tokens);
    let mut unit = p.unit();
    let header_trivia = p.header_trivia.take().unwrap_or_default();
    let (pragmas, pragma_diags) = parse_module_pragmas(&unit, &header_trivia);
    unit.pragmas = pragmas;
    let mut diags = p.diags;
    diags.extend(pragma_diags);
    (unit, diags)
}

/// Parse a single expression (used by tests and tools that work on
/// expression snippets). Trailing tokens are reported as an error.
pub fn parse_expression(tokens: &[Token]) -> (Expr, Vec<Diagnostic>) {
    let mut p = Parser::new(tokens);
    let e = p.expr();
    if !p.at(TokenKind::Eof) {
        let sp = p.peek().span;
        p.error(sp, format!("unexpected {} after expression", p.peek().kind));
    }
    (e, p.diags)
}

pub(super) struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    prev: SourceSpan,
    diags: Vec<Diagnostic>,
    last_error_at: Option<usize>,
    header_trivia: Option<Vec<crate::lexer::Trivia>>,
    unit_kind: UnitKind,
}

const STMT_END: &[TokenKind] = &[
    TokenKind::Semicolon,
    TokenKind::Keyword(Keyword::End),
    TokenKind::Keyword(Keyword::Else),
    TokenKind::Keyword(Keyword::Elsif),
    TokenKind::Keyword(Keyword::Until),
    TokenKind::Keyword(Keyword::Except),
    TokenKind::Keyword(Keyword::Finally),
    TokenKind::Bar,
    TokenKind::Eof,
];

const DECL_START: &[TokenKind] = &[
    TokenKind::Keyword(Keyword::Const),
    TokenKind::Keyword(Keyword::Type),
    TokenKind::Keyword(Keyword::Var),
    TokenKind::Keyword(Keyword::Procedure),
    TokenKind::Keyword(Keyword::Module),
    TokenKind::Keyword(Keyword::Begin),
    TokenKind::Keyword(Keyword::End),
    TokenKind::Eof,
];

const EXPR_SYNC: &[TokenKind] = &[
    TokenKind::Semicolon,
    TokenKind::RParen,
    TokenKind::RBracket,
    TokenKind::RBrace,
    TokenKind::Comma,
    TokenKind::Bar,
    TokenKind::Colon,
    TokenKind::DotDot,
    TokenKind::Keyword(Keyword::End),
    TokenKind::Keyword(Keyword::Then),
    TokenKind::Keyword(Keyword::Do),
    TokenKind::Keyword(Keyword::Of),
    TokenKind::Keyword(Keyword::To),
    TokenKind::Keyword(Keyword::By),
    TokenKind::Keyword(Keyword::Else),
    TokenKind::Keyword(Keyword::Elsif),
    TokenKind::Keyword(Keyword::Until),
    TokenKind::Eof,
];

impl<'t> Parser<'t> {
    pub(super) fn new(tokens: &'t [Token]) -> Self {
        Parser {
            tokens,
            pos: 0,
            prev: tokens.first().map(|t| t.span.head()).unwrap_or_default(),
            diags: Vec::new(),
            last_error_at: None,
            header_trivia: None,
            unit_kind: UnitKind::Program,
        }
    }

    // ---- token plumbing -------------------------------------------------

    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_nth(&self, n: usize) -> &'t Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().is(kind)
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.peek().is_keyword(kw)
    }

    fn at_any(&self, kinds: &[TokenKind]) -> bool {
        kinds.iter().any(|&k| self.at(k))
    }

    fn bump(&mut self) -> &'t Token {
        let tok = self.peek();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
            self.prev = tok.span;
        }
        tok
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        self.eat(TokenKind::Keyword(kw))
    }

    fn expect(&mut self, kind: TokenKind) -> bool {
        if self.eat(kind) {
            return true;
        }
        let found = self.peek();
        let msg = format!("expected {kind}, found {}", describe(found));
        self.error(found.span, msg);
        false
    }

    fn expect_kw(&mut self, kw: Keyword) -> bool {
        self.expect(TokenKind::Keyword(kw))
    }

    fn error(&mut self, span: SourceSpan, msg: impl Into<String>) {
        // One report per position keeps cascades readable.
        if self.last_error_at == Some(span.start) {
            return;
        }
        self.last_error_at = Some(span.start);
        self.diags
            .push(Diagnostic::error(RuleId::SyntaxError, span, msg));
    }

    fn start(&self) -> SourceSpan {
        self.peek().span
    }

    fn span_from(&self, start: SourceSpan) -> SourceSpan {
        if self.prev.end < start.start || self.prev == start.head() {
            start.head()
        } else {
            start.cover(self.prev)
        }
    }

    fn ident(&mut self) -> Option<Ident> {
        if self.at(TokenKind::Ident) {
            let t = self.bump();
            Some(Ident {
                name: t.text.clone(),
                span: t.span,
            })
        } else {
            let found = self.peek();
            let msg = format!("expected identifier, found {}", describe(found));
            self.error(found.span, msg);
            None
        }
    }

    fn ident_or_missing(&mut self) -> Ident {
        self.ident().unwrap_or_else(|| Ident {
            name: String::new(),
            span: self.peek().span.head(),
        })
    }

    fn ident_list(&mut self) -> Vec<Ident> {
        let mut out = Vec::new();
        if let Some(i) = self.ident() {
            out.push(i);
        }
        while self.eat(TokenKind::Comma) {
            match self.ident() {
                Some(i) => out.push(i),
                None => break,
            }
        }
        out
    }

    fn qualident(&mut self) -> Option<QualIdent> {
        let first = self.ident()?;
        let mut parts = vec![first];
        while self.at(TokenKind::Dot) && self.peek_nth(1).is(TokenKind::Ident) {
            self.bump();
            parts.push(self.ident()?);
        }
        let span = parts[0].span.cover(parts.last().unwrap().span);
        Some(QualIdent { parts, span })
    }

    /// Skip tokens until one of `stops` (not consumed). Always consumes at
    /// least one token unless already at a stop or at end of input.
    fn recover(&mut self, stops: &[TokenKind]) {
        let before = self.pos;
        while !self.at_any(stops) && !self.at(TokenKind::Eof) {
            self.bump();
        }
        if self.pos == before && !self.at(TokenKind::Eof) && !self.at_any(stops) {
            self.bump();
        }
    }

    // ---- compilation units ----------------------------------------------

    fn unit(&mut self) -> CompilationUnit {
        let start = self.start();
        let kind = if self.eat_kw(Keyword::Definition) {
            UnitKind::Definition
        } else if self.eat_kw(Keyword::Implementation) {
            UnitKind::Implementation
        } else {
            UnitKind::Program
        };
        self.unit_kind = kind;
        self.expect_kw(Keyword::Module);
        let name = self.ident_or_missing();
        if kind != UnitKind::Definition && self.at(TokenKind::LBracket) {
            self.bump();
            self.expr();
            self.expect(TokenKind::RBracket);
        }
        if self.expect(TokenKind::Semicolon) {
            let trivia = self
                .peek()
                .leading_trivia
                .iter()
                .filter(|t| t.kind == TriviaKind::Pragma)
                .cloned()
                .collect();
            self.header_trivia = Some(trivia);
        }
        let imports = self.imports();
        let declarations = self.declarations(kind == UnitKind::Definition);
        let body = if kind == UnitKind::Definition {
            if self.at_kw(Keyword::Begin) {
                let sp = self.start();
                self.error(sp, "definition modules have no body");
                self.bump();
                self.statement_seq();
            }
            None
        } else {
            self.body()
        };
        self.expect_kw(Keyword::End);
        self.end_name(&name);
        self.expect(TokenKind::Dot);
        if !self.at(TokenKind::Eof) {
            let sp = self.start();
            self.error(sp, "unexpected text after end of module");
            while !self.at(TokenKind::Eof) {
                self.bump();
            }
        }
        CompilationUnit {
            kind,
            name,
            pragmas: Vec::new(),
            imports,
            declarations,
            body,
            span: self.span_from(start),
        }
    }

    fn end_name(&mut self, name: &Ident) {
        if let Some(end) = self.ident() {
            if end.name != name.name && !name.name.is_empty() {
                self.error(
                    end.span,
                    format!("`END {}` does not match `{}`", end.name, name.name),
                );
            }
        }
    }

    fn imports(&mut self) -> Vec<Import> {
        let mut out = Vec::new();
        loop {
            let start = self.start();
            if self.eat_kw(Keyword::From) {
                let module = self.ident_or_missing();
                self.expect_kw(Keyword::Import);
                let names = self.ident_list();
                if !self.expect(TokenKind::Semicolon) {
                    self.recover(&[TokenKind::Semicolon]);
                    self.eat(TokenKind::Semicolon);
                }
                out.push(Import::From {
                    module,
                    names,
                    span: self.span_from(start),
                });
            } else if self.eat_kw(Keyword::Import) {
                let modules = self.ident_list();
                if !self.expect(TokenKind::Semicolon) {
                    self.recover(&[TokenKind::Semicolon]);
                    self.eat(TokenKind::Semicolon);
                }
                out.push(Import::Modules {
                    modules,
                    span: self.span_from(start),
                });
            } else {
                return out;
            }
        }
    }

    fn export(&mut self) -> Option<Export> {
        let start = self.start();
        if !self.eat_kw(Keyword::Export) {
            return None;
        }
        let qualified = self.eat_kw(Keyword::Qualified);
        let names = self.ident_list();
        self.expect(TokenKind::Semicolon);
        Some(Export {
            qualified,
            names,
            span: self.span_from(start),
        })
    }

    fn body(&mut self) -> Option<Body> {
        let mut body = Body::default();
        let mut present = false;
        if self.eat_kw(Keyword::Begin) {
            present = true;
            body.statements = self.statement_seq();
        }
        if self.eat_kw(Keyword::Except) {
            present = true;
            body.except = Some(self.statement_seq());
        }
        if self.eat_kw(Keyword::Finally) {
            present = true;
            body.finally = Some(self.statement_seq());
            if self.eat_kw(Keyword::Except) {
                body.finally_except = Some(self.statement_seq());
            }
        }
        present.then_some(body)
    }

    // ---- declarations ----------------------------------------------------

    fn declarations(&mut self, definition: bool) -> Vec<Declaration> {
        let mut out = Vec::new();
        loop {
            if self.at_kw(Keyword::Const) {
                self.bump();
                while self.at(TokenKind::Ident) {
                    out.push(self.const_decl());
                }
            } else if self.at_kw(Keyword::Type) {
                self.bump();
                while self.at(TokenKind::Ident) {
                    out.push(self.type_decl());
                }
            } else if self.at_kw(Keyword::Var) {
                self.bump();
                while self.at(TokenKind::Ident) {
                    out.push(self.var_decl());
                }
            } else if self.at_kw(Keyword::Procedure) {
                out.push(self.procedure_decl(definition));
            } else if self.at_kw(Keyword::Module) && !definition {
                out.push(self.local_module());
            } else if self.at_any(&[
                TokenKind::Keyword(Keyword::Begin),
                TokenKind::Keyword(Keyword::End),
                TokenKind::Keyword(Keyword::Except),
                TokenKind::Keyword(Keyword::Finally),
                TokenKind::Eof,
            ]) {
                return out;
            } else {
                let start = self.start();
                let msg = format!("expected a declaration, found {}", describe(self.peek()));
                self.error(start, msg);
                self.recover(DECL_START);
                out.push(Declaration {
                    kind: DeclKind::Error,
                    span: self.span_from(start),
                });
            }
        }
    }

    /// Terminating `;` of a declaration, with resync on failure.
    fn decl_semicolon(&mut self) {
        if self.expect(TokenKind::Semicolon) {
            return;
        }
        let mut stops = DECL_START.to_vec();
        stops.push(TokenKind::Semicolon);
        self.recover(&stops);
        self.eat(TokenKind::Semicolon);
    }

    fn const_decl(&mut self) -> Declaration {
        let start = self.start();
        let name = self.ident_or_missing();
        self.expect(TokenKind::Equal);
        let value = self.expr();
        self.decl_semicolon();
        Declaration {
            kind: DeclKind::Const { name, value },
            span: self.span_from(start),
        }
    }

    fn type_decl(&mut self) -> Declaration {
        let start = self.start();
        let name = self.ident_or_missing();
        let ty = if self.eat(TokenKind::Equal) {
            self.type_expr()
        } else {
            if self.unit_kind != UnitKind::Definition || !self.at(TokenKind::Semicolon) {
                self.expect(TokenKind::Equal);
            }
            TypeExpr {
                kind: TypeKind::Opaque,
                span: name.span,
            }
        };
        self.decl_semicolon();
        Declaration {
            kind: DeclKind::Type { name, ty },
            span: self.span_from(start),
        }
    }

    fn var_decl(&mut self) -> Declaration {
        let start = self.start();
        let names = self.ident_list();
        // Machine address `[addr]` after a variable name.
        if self.at(TokenKind::LBracket) {
            self.bump();
            self.expr();
            self.expect(TokenKind::RBracket);
        }
        self.expect(TokenKind::Colon);
        let ty = self.type_expr();
        self.decl_semicolon();
        Declaration {
            kind: DeclKind::Var { names, ty },
            span: self.span_from(start),
        }
    }

    fn procedure_decl(&mut self, definition: bool) -> Declaration {
        let start = self.start();
        self.expect_kw(Keyword::Procedure);
        let name = self.ident_or_missing();
        let mut params = Vec::new();
        let mut result = None;
        if self.eat(TokenKind::LParen) {
            if !self.at(TokenKind::RParen) {
                loop {
                    params.push(self.formal_param());
                    if !self.eat(TokenKind::Semicolon) {
                        break;
                    }
                }
            }
            if !self.expect(TokenKind::RParen) {
                self.recover(&[TokenKind::RParen, TokenKind::Semicolon]);
                self.eat(TokenKind::RParen);
            }
            if self.eat(TokenKind::Colon) {
                result = self.qualident();
            }
        }
        self.decl_semicolon();
        let mut decl = ProcedureDecl {
            name,
            params,
            result,
            forward: false,
            declarations: Vec::new(),
            body: None,
            has_block: false,
        };
        if definition {
            return Declaration {
                kind: DeclKind::Procedure(decl),
                span: self.span_from(start),
            };
        }
        if self.eat_kw(Keyword::Forward) {
            decl.forward = true;
            self.decl_semicolon();
            return Declaration {
                kind: DeclKind::Procedure(decl),
                span: self.span_from(start),
            };
        }
        decl.has_block = true;
        decl.declarations = self.declarations(false);
        decl.body = self.body();
        self.expect_kw(Keyword::End);
        let name = decl.name.clone();
        self.end_name(&name);
        self.decl_semicolon();
        Declaration {
            kind: DeclKind::Procedure(decl),
            span: self.span_from(start),
        }
    }

    fn formal_param(&mut self) -> FormalParam {
        let start = self.start();
        let var = self.eat_kw(Keyword::Var);
        let names = self.ident_list();
        self.expect(TokenKind::Colon);
        let ty = self.formal_type();
        FormalParam {
            var,
            names,
            ty,
            span: self.span_from(start),
        }
    }

    fn formal_type(&mut self) -> FormalType {
        let start = self.start();
        let mut open_dims = 0;
        while self.at_kw(Keyword::Array) && self.peek_nth(1).is_keyword(Keyword::Of) {
            self.bump();
            self.bump();
            open_dims += 1;
        }
        let name = self.qualident().unwrap_or_else(|| missing_qualident(self.peek().span));
        FormalType {
            open_dims,
            name,
            span: self.span_from(start),
        }
    }

    fn local_module(&mut self) -> Declaration {
        let start = self.start();
        self.expect_kw(Keyword::Module);
        let name = self.ident_or_missing();
        if self.at(TokenKind::LBracket) {
            self.bump();
            self.expr();
            self.expect(TokenKind::RBracket);
        }
        self.decl_semicolon();
        let imports = self.imports();
        let export = self.export();
        let declarations = self.declarations(false);
        let body = self.body();
        self.expect_kw(Keyword::End);
        self.end_name(&name);
        self.decl_semicolon();
        Declaration {
            kind: DeclKind::Module(LocalModule {
                name,
                imports,
                export,
                declarations,
                body,
            }),
            span: self.span_from(start),
        }
    }

    // ---- types -------------------------------------------------------------

    fn type_expr(&mut self) -> TypeExpr {
        let start = self.start();
        let kind = if self.at(TokenKind::Ident) {
            let name = self.qualident().expect("at identifier");
            if self.at(TokenKind::LBracket) {
                self.subrange(Some(name))
            } else {
                TypeKind::Named(name)
            }
        } else if self.at(TokenKind::LBracket) {
            self.subrange(None)
        } else if self.eat(TokenKind::LParen) {
            let names = self.ident_list();
            self.expect(TokenKind::RParen);
            TypeKind::Enumeration(names)
        } else if self.at_kw(Keyword::Array) {
            self.array_type()
        } else if self.at_kw(Keyword::Record) {
            self.record_type()
        } else if self.at_kw(Keyword::Set) || self.at_kw(Keyword::Packedset) {
            let packed = self.bump().is_keyword(Keyword::Packedset);
            self.expect_kw(Keyword::Of);
            TypeKind::Set {
                packed,
                base: Box::new(self.type_expr()),
            }
        } else if self.eat_kw(Keyword::Pointer) {
            self.expect_kw(Keyword::To);
            TypeKind::Pointer(Box::new(self.type_expr()))
        } else if self.eat_kw(Keyword::Procedure) {
            self.procedure_type()
        } else {
            let msg = format!("expected a type, found {}", describe(self.peek()));
            self.error(start, msg);
            if !self.at_any(EXPR_SYNC) {
                self.bump();
            }
            TypeKind::Error
        };
        TypeExpr {
            kind,
            span: self.span_from(start),
        }
    }

    fn subrange(&mut self, base: Option<QualIdent>) -> TypeKind {
        self.expect(TokenKind::LBracket);
        let low = self.expr();
        self.expect(TokenKind::DotDot);
        let high = self.expr();
        self.expect(TokenKind::RBracket);
        TypeKind::Subrange {
            base,
            low: Box::new(low),
            high: Box::new(high),
        }
    }

    fn array_type(&mut self) -> TypeKind {
        self.expect_kw(Keyword::Array);
        let mut dimensions = vec![self.type_expr()];
        while self.eat(TokenKind::Comma) {
            dimensions.push(self.type_expr());
        }
        self.expect_kw(Keyword::Of);
        let mut element = self.type_expr();
        let nested = if let TypeKind::Array { long_form, .. } = &mut element.kind {
            long_form.iter_mut().for_each(|f| *f = true);
            true
        } else {
            false
        };
        let long_form = vec![nested; dimensions.len()];
        TypeKind::Array {
            dimensions,
            element: Box::new(element),
            long_form,
        }
    }

    fn record_type(&mut self) -> TypeKind {
        self.expect_kw(Keyword::Record);
        let base = if self.eat(TokenKind::LParen) {
            let base = if self.at(TokenKind::Ident) && self.peek().text == "NIL" {
                BaseType::Nil(self.bump().span)
            } else {
                BaseType::Named(
                    self.qualident()
                        .unwrap_or_else(|| missing_qualident(self.peek().span)),
                )
            };
            self.expect(TokenKind::RParen);
            Some(base)
        } else {
            None
        };
        let fields = self.field_list_seq();
        self.expect_kw(Keyword::End);
        TypeKind::Record(RecordType { base, fields })
    }

    fn field_list_seq(&mut self) -> Vec<FieldItem> {
        let mut out = Vec::new();
        loop {
            if self.eat(TokenKind::Semicolon) {
                continue;
            }
            if self.at(TokenKind::Ident) {
                let start = self.start();
                let names = self.ident_list();
                self.expect(TokenKind::Colon);
                let ty = self.type_expr();
                out.push(FieldItem::Fixed {
                    names,
                    ty,
                    span: self.span_from(start),
                });
            } else if self.at_kw(Keyword::Case) {
                out.push(FieldItem::Variant(self.variant_part()));
            } else if self.at_any(&[
                TokenKind::Keyword(Keyword::End),
                TokenKind::Keyword(Keyword::Else),
                TokenKind::Bar,
                TokenKind::Eof,
            ]) {
                return out;
            } else {
                let sp = self.start();
                let msg = format!("expected a field list, found {}", describe(self.peek()));
                self.error(sp, msg);
                self.recover(&[
                    TokenKind::Semicolon,
                    TokenKind::Keyword(Keyword::End),
                    TokenKind::Keyword(Keyword::Else),
                    TokenKind::Bar,
                ]);
            }
            if !self.at(TokenKind::Semicolon) {
                return out;
            }
        }
    }

    fn variant_part(&mut self) -> VariantPart {
        let start = self.start();
        self.expect_kw(Keyword::Case);
        let mut tag_field = None;
        if self.at(TokenKind::Ident) && self.peek_nth(1).is(TokenKind::Colon) {
            tag_field = self.ident();
        }
        self.expect(TokenKind::Colon);
        let tag_type = self
            .qualident()
            .unwrap_or_else(|| missing_qualident(self.peek().span));
        self.expect_kw(Keyword::Of);
        let mut variants = Vec::new();
        loop {
            if !self.at(TokenKind::Bar)
                && !self.at_kw(Keyword::Else)
                && !self.at_kw(Keyword::End)
                && !self.at(TokenKind::Eof)
            {
                let vstart = self.start();
                let labels = self.case_labels();
                self.expect(TokenKind::Colon);
                let fields = self.field_list_seq();
                variants.push(Variant {
                    labels,
                    fields,
                    span: self.span_from(vstart),
                });
            }
            if !self.eat(TokenKind::Bar) {
                break;
            }
        }
        let else_part = if self.eat_kw(Keyword::Else) {
            Some(self.field_list_seq())
        } else {
            None
        };
        self.expect_kw(Keyword::End);
        VariantPart {
            tag_field,
            tag_type,
            variants,
            else_part,
            span: self.span_from(start),
        }
    }

    fn procedure_type(&mut self) -> TypeKind {
        let mut params = Vec::new();
        let mut var_params = Vec::new();
        let mut result = None;
        if self.eat(TokenKind::LParen) {
            if !self.at(TokenKind::RParen) {
                loop {
                    var_params.push(self.eat_kw(Keyword::Var));
                    params.push(self.formal_type());
                    if !self.eat(TokenKind::Comma) {
                        break;
                    }
                }
            }
            self.expect(TokenKind::RParen);
            if self.eat(TokenKind::Colon) {
                result = self.qualident();
            }
        }
        TypeKind::Procedure {
            params,
            var_params,
            result,
        }
    }

    // ---- statements --------------------------------------------------------

    fn statement_seq(&mut self) -> Vec<Stmt> {
        let mut out = Vec::new();
        loop {
            if let Some(s) = self.statement() {
                out.push(s);
            }
            if self.eat(TokenKind::Semicolon) {
                continue;
            }
            if self.at_any(STMT_END) {
                return out;
            }
            let sp = self.start();
            let msg = format!("expected ';', found {}", describe(self.peek()));
            self.error(sp, msg);
            self.recover(STMT_END);
            let skipped = Stmt {
                kind: StmtKind::Error,
                span: self.span_from(sp),
            };
            out.push(skipped);
            if !self.eat(TokenKind::Semicolon) && self.at_any(STMT_END) {
                return out;
            }
        }
    }

    fn statement(&mut self) -> Option<Stmt> {
        let start = self.start();
        let tok = self.peek();
        let kind = match tok.kind.canonical() {
            TokenKind::Ident => self.assign_or_call(),
            TokenKind::Keyword(Keyword::If) => self.if_stmt(),
            TokenKind::Keyword(Keyword::Case) => self.case_stmt(),
            TokenKind::Keyword(Keyword::While) => {
                self.bump();
                let cond = self.expr();
                self.expect_kw(Keyword::Do);
                let body = self.statement_seq();
                self.expect_kw(Keyword::End);
                StmtKind::While { cond, body }
            }
            TokenKind::Keyword(Keyword::Repeat) => {
                self.bump();
                let body = self.statement_seq();
                self.expect_kw(Keyword::Until);
                let cond = self.expr();
                StmtKind::Repeat { body, cond }
            }
            TokenKind::Keyword(Keyword::Loop) => {
                self.bump();
                let body = self.statement_seq();
                self.expect_kw(Keyword::End);
                StmtKind::Loop { body }
            }
            TokenKind::Keyword(Keyword::For) => self.for_stmt(),
            TokenKind::Keyword(Keyword::With) => {
                self.bump();
                let designator = self.designator();
                self.expect_kw(Keyword::Do);
                let body = self.statement_seq();
                self.expect_kw(Keyword::End);
                StmtKind::With { designator, body }
            }
            TokenKind::Keyword(Keyword::Return) => {
                self.bump();
                let value = if self.at_any(STMT_END) {
                    None
                } else {
                    Some(self.expr())
                };
                StmtKind::Return(value)
            }
            TokenKind::Keyword(Keyword::Exit) => {
                self.bump();
                StmtKind::Exit
            }
            TokenKind::Keyword(Keyword::Retry) => {
                self.bump();
                StmtKind::Retry
            }
            _ if self.at_any(STMT_END) => return None,
            _ => {
                let msg = format!("expected a statement, found {}", describe(tok));
                self.error(start, msg);
                self.recover(STMT_END);
                StmtKind::Error
            }
        };
        Some(Stmt {
            kind,
            span: self.span_from(start),
        })
    }

    fn assign_or_call(&mut self) -> StmtKind {
        let target = self.designator();
        if self.eat(TokenKind::Assign) {
            let value = self.expr();
            return StmtKind::Assign { target, value };
        }
        if self.at(TokenKind::Equal) {
            let sp = self.start();
            self.error(sp, "expected ':=' (found '=')");
            self.bump();
            let value = self.expr();
            return StmtKind::Assign { target, value };
        }
        let args = if self.at(TokenKind::LParen) {
            Some(self.actual_params())
        } else {
            None
        };
        if !self.at_any(STMT_END) {
            let sp = self.start();
            let msg = format!("expected ':=' or ';', found {}", describe(self.peek()));
            self.error(sp, msg);
        }
        StmtKind::Call {
            callee: target,
            args,
        }
    }

    fn if_stmt(&mut self) -> StmtKind {
        self.expect_kw(Keyword::If);
        let mut branches = Vec::new();
        let cond = self.expr();
        self.expect_kw(Keyword::Then);
        branches.push((cond, self.statement_seq()));
        while self.eat_kw(Keyword::Elsif) {
            let cond = self.expr();
            self.expect_kw(Keyword::Then);
            branches.push((cond, self.statement_seq()));
        }
        let else_branch = if self.eat_kw(Keyword::Else) {
            Some(self.statement_seq())
        } else {
            None
        };
        self.expect_kw(Keyword::End);
        StmtKind::If {
            branches,
            else_branch,
        }
    }

    fn case_stmt(&mut self) -> StmtKind {
        self.expect_kw(Keyword::Case);
        let selector = self.expr();
        self.expect_kw(Keyword::Of);
        let mut arms = Vec::new();
        loop {
            if !self.at(TokenKind::Bar)
                && !self.at_kw(Keyword::Else)
                && !self.at_kw(Keyword::End)
                && !self.at(TokenKind::Eof)
            {
                let start = self.start();
                let labels = self.case_labels();
                self.expect(TokenKind::Colon);
                let body = self.statement_seq();
                arms.push(CaseArm {
                    labels,
                    body,
                    span: self.span_from(start),
                });
            }
            if !self.eat(TokenKind::Bar) {
                break;
            }
        }
        let else_branch = if self.eat_kw(Keyword::Else) {
            Some(self.statement_seq())
        } else {
            None
        };
        self.expect_kw(Keyword::End);
        StmtKind::Case {
            selector,
            arms,
            else_branch,
        }
    }

    fn case_labels(&mut self) -> Vec<CaseLabel> {
        let mut out = Vec::new();
        loop {
            let start = self.start();
            let low = self.expr();
            let high = if self.eat(TokenKind::DotDot) {
                Some(self.expr())
            } else {
                None
            };
            out.push(CaseLabel {
                low,
                high,
                span: self.span_from(start),
            });
            if !self.eat(TokenKind::Comma) {
                return out;
            }
        }
    }

    fn for_stmt(&mut self) -> StmtKind {
        self.expect_kw(Keyword::For);
        let var = self.ident_or_missing();
        self.expect(TokenKind::Assign);
        let from = self.expr();
        self.expect_kw(Keyword::To);
        let to = self.expr();
        let by = if self.eat_kw(Keyword::By) {
            Some(self.expr())
        } else {
            None
        };
        self.expect_kw(Keyword::Do);
        let body = self.statement_seq();
        self.expect_kw(Keyword::End);
        StmtKind::For {
            var,
            from,
            to,
            by,
            body,
        }
    }

    fn designator(&mut self) -> Designator {
        let start = self.start();
        let head = self
            .qualident()
            .unwrap_or_else(|| missing_qualident(self.peek().span));
        let mut selectors = Vec::new();
        loop {
            if self.at(TokenKind::Dot) && self.peek_nth(1).is(TokenKind::Ident) {
                self.bump();
                let field = self.ident_or_missing();
                selectors.push(Selector::Field(field));
            } else if self.at(TokenKind::LBracket) {
                let sstart = self.start();
                self.bump();
                let mut indices = vec![self.expr()];
                while self.eat(TokenKind::Comma) {
                    indices.push(self.expr());
                }
                self.expect(TokenKind::RBracket);
                selectors.push(Selector::Index(indices, self.span_from(sstart)));
            } else if self.at(TokenKind::Caret) {
                let sp = self.bump().span;
                selectors.push(Selector::Deref(sp));
            } else {
                break;
            }
        }
        Designator {
            head,
            selectors,
            span: self.span_from(start),
        }
    }

    fn actual_params(&mut self) -> Vec<Expr> {
        self.expect(TokenKind::LParen);
        let mut args = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                args.push(self.expr());
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        if !self.expect(TokenKind::RParen) {
            self.recover(&[TokenKind::RParen, TokenKind::Semicolon]);
            self.eat(TokenKind::RParen);
        }
        args
    }

    // ---- expressions -----------------------------------------------------

    pub(super) fn expr(&mut self) -> Expr {
        let start = self.start();
        let lhs = self.simple_expr();
        let op = match self.peek().kind.canonical() {
            TokenKind::Equal => BinaryOp::Eq,
            TokenKind::Hash => BinaryOp::Ne,
            TokenKind::Less => BinaryOp::Lt,
            TokenKind::LessEqual => BinaryOp::Le,
            TokenKind::Greater => BinaryOp::Gt,
            TokenKind::GreaterEqual => BinaryOp::Ge,
            TokenKind::Keyword(Keyword::In) => BinaryOp::In,
            _ => return lhs,
        };
        let op_span = self.bump().span;
        let rhs = self.simple_expr();
        Expr {
            kind: ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                op_span,
            },
            span: self.span_from(start),
        }
    }

    fn simple_expr(&mut self) -> Expr {
        let start = self.start();
        let sign = match self.peek().kind {
            TokenKind::Minus => Some(UnaryOp::Neg),
            TokenKind::Plus => Some(UnaryOp::Plus),
            _ => None,
        };
        let mut lhs = if let Some(op) = sign {
            let op_span = self.bump().span;
            let operand = self.term();
            Expr {
                kind: ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                    op_span,
                },
                span: self.span_from(start),
            }
        } else {
            self.term()
        };
        loop {
            let op = match self.peek().kind.canonical() {
                TokenKind::Plus => BinaryOp::Add,
                TokenKind::Minus => BinaryOp::Sub,
                TokenKind::Backslash => BinaryOp::Diff,
                TokenKind::Keyword(Keyword::Or) => BinaryOp::Or,
                _ => return lhs,
            };
            let op_span = self.bump().span;
            let rhs = self.term();
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                    op_span,
                },
                span: self.span_from(start),
            };
        }
    }

    fn term(&mut self) -> Expr {
        let start = self.start();
        let mut lhs = self.factor();
        loop {
            let op = match self.peek().kind.canonical() {
                TokenKind::Star => BinaryOp::Mul,
                TokenKind::Slash => BinaryOp::RealDiv,
                TokenKind::Keyword(Keyword::Div) => BinaryOp::Div,
                TokenKind::Keyword(Keyword::Mod) => BinaryOp::Mod,
                TokenKind::Keyword(Keyword::Rem) => BinaryOp::Rem,
                TokenKind::Keyword(Keyword::And) => BinaryOp::And,
                _ => return lhs,
            };
            let op_span = self.bump().span;
            let rhs = self.factor();
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                    op_span,
                },
                span: self.span_from(start),
            };
        }
    }

    /// `NOT` binds looser than `::`, so `NOT x :: T` is `NOT (x :: T)`.
    fn factor(&mut self) -> Expr {
        let start = self.start();
        if self.at(TokenKind::Keyword(Keyword::Not)) {
            let op_span = self.bump().span;
            let operand = self.factor();
            return Expr {
                kind: ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                    op_span,
                },
                span: self.span_from(start),
            };
        }
        let operand = self.primary();
        if !self.at(TokenKind::ColonColon) {
            return operand;
        }
        let op_span = self.bump().span;
        let target = self
            .qualident()
            .unwrap_or_else(|| missing_qualident(self.peek().span));
        let conv = Expr {
            kind: ExprKind::TypeConversion {
                operand: Box::new(operand),
                target,
                op_span,
            },
            span: self.span_from(start),
        };
        if self.at(TokenKind::ColonColon) {
            let sp = self.start();
            self.error(
                sp,
                "type conversions do not chain; parenthesize the inner conversion",
            );
            self.bump();
            self.qualident();
            return Expr {
                kind: ExprKind::Error,
                span: self.span_from(start),
            };
        }
        conv
    }

    fn primary(&mut self) -> Expr {
        let start = self.start();
        let tok = self.peek();
        let kind = match tok.kind.canonical() {
            TokenKind::Integer(_) | TokenKind::Real | TokenKind::CharCode | TokenKind::String => {
                self.bump();
                let kind = match tok.kind {
                    TokenKind::Integer(_) => LiteralKind::Whole,
                    TokenKind::Real => LiteralKind::Real,
                    TokenKind::CharCode => LiteralKind::CharCode,
                    _ => LiteralKind::String,
                };
                ExprKind::Literal {
                    kind,
                    text: tok.text.clone(),
                }
            }
            TokenKind::Ident => {
                let designator = self.designator();
                if self.at(TokenKind::LBrace) && designator.selectors.is_empty() {
                    let elements = self.set_elements();
                    ExprKind::SetConstructor {
                        type_name: Some(designator.head),
                        elements,
                    }
                } else if self.at(TokenKind::LParen) {
                    let args = self.actual_params();
                    ExprKind::Call {
                        callee: designator,
                        args,
                    }
                } else {
                    ExprKind::Designator(designator)
                }
            }
            TokenKind::LBrace => ExprKind::SetConstructor {
                type_name: None,
                elements: self.set_elements(),
            },
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr();
                if !self.expect(TokenKind::RParen) {
                    self.recover(&[TokenKind::RParen, TokenKind::Semicolon]);
                    self.eat(TokenKind::RParen);
                }
                ExprKind::Paren(Box::new(inner))
            }
            TokenKind::Error => {
                self.bump();
                ExprKind::Error
            }
            _ => {
                let msg = format!("expected an expression, found {}", describe(tok));
                self.error(start, msg);
                if !self.at_any(EXPR_SYNC) {
                    self.bump();
                }
                ExprKind::Error
            }
        };
        Expr {
            kind,
            span: self.span_from(start),
        }
    }

    fn set_elements(&mut self) -> Vec<SetElement> {
        self.expect(TokenKind::LBrace);
        let mut out = Vec::new();
        if !self.at(TokenKind::RBrace) {
            loop {
                let low = self.expr();
                let high = if self.eat(TokenKind::DotDot) {
                    Some(self.expr())
                } else {
                    None
                };
                out.push(SetElement { low, high });
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        if !self.expect(TokenKind::RBrace) {
            self.recover(&[TokenKind::RBrace, TokenKind::Semicolon]);
            self.eat(TokenKind::RBrace);
        }
        out
    }
}

fn missing_qualident(at: SourceSpan) -> QualIdent {
    let span = at.head();
    QualIdent {
        parts: vec![Ident {
            name: String::new(),
            span,
        }],
        span,
    }
}

fn describe(tok: &Token) -> String {
    match tok.kind {
        TokenKind::Eof => "end of file".to_string(),
        TokenKind::Ident => format!("identifier `{}`", tok.text),
        _ => format!("`{}`", tok.text),
    }
}
