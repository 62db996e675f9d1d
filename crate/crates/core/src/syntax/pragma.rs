use crate::diagnostic::{Action, Diagnostic, RuleId, Severity};
use crate::lexer::{tokenize, DialectProfile, Token, TokenKind, Trivia, TriviaKind};
use crate::span::SourceSpan;

use super::ast::{CompilationUnit, Ident, ModulePragma, PragmaKind, UnitKind};

/// Foreign API spellings that need no warning.
pub const KNOWN_FOREIGN_APIS: &[&str] = &["ASM", "C", "Fortran", "Pascal"];

/// Interpret the pragmas that follow a module header.
///
/// `PRIVATETO` and `FFI` are decoded; every other pragma is kept as
/// `PragmaKind::Other` with its text untouched.
pub fn parse_module_pragmas(
    unit: &CompilationUnit,
    trivia: &[Trivia],
) -> (Vec<ModulePragma>, Vec<Diagnostic>) {
    let mut pragmas = Vec::new();
    let mut diags = Vec::new();
    for t in trivia.iter().filter(|t| t.kind == TriviaKind::Pragma) {
        let pragma = decode(t, &mut diags);
        if pragma.kind != PragmaKind::Other && unit.kind != UnitKind::Definition {
            let (rule, name) = match pragma.kind {
                PragmaKind::PrivateTo => (RuleId::S04, "PRIVATETO"),
                _ => (RuleId::S05, "FFI"),
            };
            diags.push(Diagnostic::new(
                rule,
                Severity::Info,
                Action::Warning,
                t.span,
                format!(
                    "{name} is only recognised after the header of a definition module; \
                     it has no effect in this {}",
                    unit.kind.as_str()
                ),
            ));
        }
        pragmas.push(pragma);
    }
    (pragmas, diags)
}

fn decode(t: &Trivia, diags: &mut Vec<Diagnostic>) -> ModulePragma {
    let mut pragma = ModulePragma {
        kind: PragmaKind::Other,
        client_modules: Vec::new(),
        foreign_api: String::new(),
        text: t.text.clone(),
        span: t.span,
    };
    let Some(interior) = t
        .text
        .strip_prefix("<*")
        .and_then(|s| s.strip_suffix("*>"))
    else {
        return pragma;
    };
    let origin = SourceSpan {
        start: t.span.start + 2,
        end: t.span.start + 2,
        start_line: t.span.start_line,
        start_col: t.span.start_col + 2,
        end_line: t.span.start_line,
        end_col: t.span.start_col + 2,
    };
    let lexed = tokenize(interior, &DialectProfile::revised());
    let tokens: Vec<Token> = lexed
        .tokens
        .into_iter()
        .map(|mut tok| {
            tok.span = tok.span.offset_by(&origin);
            tok
        })
        .collect();
    let head = match tokens.first() {
        Some(tok) if tok.kind == TokenKind::Ident => tok,
        _ => return pragma,
    };
    match head.text.as_str() {
        "PRIVATETO" => {
            pragma.kind = PragmaKind::PrivateTo;
            match private_to_clients(&tokens[1..]) {
                Ok(clients) => pragma.client_modules = clients,
                Err(msg) => diags.push(malformed(RuleId::S04, t.span, msg)),
            }
        }
        "FFI" => {
            pragma.kind = PragmaKind::Ffi;
            match ffi_api(&tokens[1..]) {
                Ok(api) => {
                    if !KNOWN_FOREIGN_APIS.contains(&api.as_str()) {
                        diags.push(Diagnostic::new(
                            RuleId::S05,
                            Severity::Warning,
                            Action::Warning,
                            t.span,
                            format!(
                                "unknown foreign API \"{api}\" (known: {})",
                                KNOWN_FOREIGN_APIS.join(", ")
                            ),
                        ));
                    }
                    pragma.foreign_api = api;
                }
                Err(msg) => diags.push(malformed(RuleId::S05, t.span, msg)),
            }
        }
        _ => {}
    }
    pragma
}

fn malformed(rule: RuleId, span: SourceSpan, msg: String) -> Diagnostic {
    Diagnostic::new(rule, Severity::Warning, Action::Warning, span, msg)
}

fn private_to_clients(rest: &[Token]) -> Result<Vec<Ident>, String> {
    let mut it = rest.iter().filter(|t| t.kind != TokenKind::Eof).peekable();
    if !it.next().is_some_and(|t| t.kind == TokenKind::Equal) {
        return Err("malformed PRIVATETO pragma: expected `=` and a client module list".into());
    }
    let mut clients = Vec::new();
    loop {
        match it.next() {
            Some(t) if t.kind == TokenKind::Ident => clients.push(Ident {
                name: t.text.clone(),
                span: t.span,
            }),
            Some(t) => {
                return Err(format!(
                    "malformed PRIVATETO pragma: expected a module name, found `{}`",
                    t.text
                ))
            }
            None if clients.is_empty() => {
                return Err("malformed PRIVATETO pragma: the client module list is empty".into())
            }
            None => {
                return Err("malformed PRIVATETO pragma: trailing `,` in client list".into())
            }
        }
        match it.next() {
            None => return Ok(clients),
            Some(t) if t.kind == TokenKind::Comma => {}
            Some(t) => {
                return Err(format!(
                    "malformed PRIVATETO pragma: unexpected `{}` in client list",
                    t.text
                ))
            }
        }
    }
}

fn ffi_api(rest: &[Token]) -> Result<String, String> {
    let body: Vec<&Token> = rest.iter().filter(|t| t.kind != TokenKind::Eof).collect();
    match body.as_slice() {
        [eq, s] if eq.kind == TokenKind::Equal && s.kind == TokenKind::String => {
            let api = &s.text[1..s.text.len() - 1];
            if api.is_empty() {
                Err("malformed FFI pragma: the foreign API name is empty".into())
            } else {
                Ok(api.to_string())
            }
        }
        [eq, s] if eq.kind == TokenKind::Equal && s.kind == TokenKind::Ident => Err(format!(
            "malformed FFI pragma: the foreign API name must be quoted, as in \"{}\"",
            s.text
        )),
        _ => Err("malformed FFI pragma: expected `= \"api\"`".into()),
    }
}
