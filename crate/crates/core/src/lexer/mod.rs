//! Lossless tokenizer.
//!
//! Every byte of the input ends up either in a token's text or in the
//! leading trivia (whitespace, comments, pragmas) of the token after it.
//! Trivia that trails the last real token is attached to the final
//! [`TokenKind::Eof`] token, so [`render_tokens`] reproduces the input.

mod dialect;
mod token;

pub use dialect::{DialectId, DialectProfile, BASE_PERVASIVES, REMOVED_CONVERSIONS, REVISED_ADDITIONS};
pub use token::{Keyword, LiteralValue, Radix, Token, TokenKind, Trivia, TriviaKind};

use std::fmt;

use crate::span::{LineIndex, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexErrorKind {
    UnterminatedString,
    UnterminatedComment,
    UnterminatedPragma,
    MalformedLiteral,
    IllegalCharacter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub kind: LexErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Result of tokenizing one file. `tokens` is always complete (ending in
/// `Eof`) even when `errors` is non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub errors: Vec<LexError>,
}

impl Lexed {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn tokenize(source: &str, profile: &DialectProfile) -> Lexed {
    let mut lexer = Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        lines: LineIndex::new(source),
        errors: Vec::new(),
    };
    let mut tokens = Vec::new();
    loop {
        let trivia = lexer.trivia();
        let mut token = lexer.next_token();
        token.leading_trivia = trivia;
        token.dialect_foreign = !profile.enables(token.kind);
        let done = token.kind == TokenKind::Eof;
        tokens.push(token);
        if done {
            break;
        }
    }
    Lexed {
        tokens,
        errors: lexer.errors,
    }
}

/// Concatenate trivia and token text back into source form.
pub fn render_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for tok in tokens {
        for t in &tok.leading_trivia {
            out.push_str(&t.text);
        }
        out.push_str(&tok.text);
    }
    out
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    lines: LineIndex,
    errors: Vec<LexError>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> u8 {
        self.peek_at(0)
    }

    fn peek_at(&self, offset: usize) -> u8 {
        self.bytes.get(self.pos + offset).copied().unwrap_or(0)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn span(&self, start: usize) -> SourceSpan {
        self.lines.span(start, self.pos)
    }

    fn error(&mut self, kind: LexErrorKind, start: usize, message: impl Into<String>) {
        let span = self.span(start);
        self.errors.push(LexError {
            kind,
            span,
            message: message.into(),
        });
    }

    fn trivia(&mut self) -> Vec<Trivia> {
        let mut out = Vec::new();
        loop {
            let start = self.pos;
            let kind = if self.peek().is_ascii_whitespace() {
                while !self.at_end() && self.peek().is_ascii_whitespace() {
                    self.pos += 1;
                }
                TriviaKind::Whitespace
            } else if self.peek() == b'(' && self.peek_at(1) == b'*' {
                self.comment();
                TriviaKind::Comment
            } else if self.peek() == b'<' && self.peek_at(1) == b'*' {
                self.pragma();
                TriviaKind::Pragma
            } else {
                return out;
            };
            out.push(Trivia {
                kind,
                span: self.span(start),
                text: self.src[start..self.pos].to_string(),
            });
        }
    }

    fn comment(&mut self) {
        let start = self.pos;
        self.pos += 2;
        let mut depth = 1usize;
        while !self.at_end() {
            if self.peek() == b'(' && self.peek_at(1) == b'*' {
                depth += 1;
                self.pos += 2;
            } else if self.peek() == b'*' && self.peek_at(1) == b')' {
                depth -= 1;
                self.pos += 2;
                if depth == 0 {
                    return;
                }
            } else {
                self.pos += 1;
            }
        }
        self.error(LexErrorKind::UnterminatedComment, start, "unterminated comment");
    }

    fn pragma(&mut self) {
        let start = self.pos;
        self.pos += 2;
        while !self.at_end() {
            match self.peek() {
                b'*' if self.peek_at(1) == b'>' => {
                    self.pos += 2;
                    return;
                }
                q @ (b'"' | b'\'') => {
                    self.pos += 1;
                    while !self.at_end() && self.peek() != q && self.peek() != b'\n' {
                        self.pos += 1;
                    }
                    if self.peek() == q {
                        self.pos += 1;
                    }
                }
                _ => self.pos += 1,
            }
        }
        self.error(LexErrorKind::UnterminatedPragma, start, "unterminated pragma");
    }

    fn token(&self, kind: TokenKind, start: usize, value: Option<LiteralValue>) -> Token {
        Token {
            kind,
            span: self.span(start),
            text: self.src[start..self.pos].to_string(),
            leading_trivia: Vec::new(),
            value,
            dialect_foreign: false,
        }
    }

    fn next_token(&mut self) -> Token {
        let start = self.pos;
        if self.at_end() {
            return self.token(TokenKind::Eof, start, None);
        }
        let b = self.peek();
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.peek().is_ascii_alphanumeric() || self.peek() == b'_' {
                self.pos += 1;
            }
            let text = &self.src[start..self.pos];
            let kind = crate::lexer::Keyword::lookup(text)
                .map(TokenKind::Keyword)
                .unwrap_or(TokenKind::Ident);
            return self.token(kind, start, None);
        }
        if b.is_ascii_digit() {
            return self.number();
        }
        if b == b'\'' || b == b'"' {
            return self.string(b);
        }
        use TokenKind::*;
        let two = [b, self.peek_at(1)];
        let (kind, len) = match &two {
            b":=" => (Assign, 2),
            b"::" => (ColonColon, 2),
            b"<=" => (LessEqual, 2),
            b">=" => (GreaterEqual, 2),
            b"<>" => (NotEqualSynonym, 2),
            b".." => (DotDot, 2),
            _ => match b {
                b'+' => (Plus, 1),
                b'-' => (Minus, 1),
                b'*' => (Star, 1),
                b'/' => (Slash, 1),
                b'\\' => (Backslash, 1),
                b':' => (Colon, 1),
                b'=' => (Equal, 1),
                b'#' => (Hash, 1),
                b'<' => (Less, 1),
                b'>' => (Greater, 1),
                b'&' => (AndSynonym, 1),
                b'~' => (NotSynonym, 1),
                b'|' => (Bar, 1),
                b'!' => (BarSynonym, 1),
                b'^' => (Caret, 1),
                b'@' => (CaretSynonym, 1),
                b'.' => (Dot, 1),
                b',' => (Comma, 1),
                b';' => (Semicolon, 1),
                b'(' => (LParen, 1),
                b')' => (RParen, 1),
                b'[' => (LBracket, 1),
                b']' => (RBracket, 1),
                b'{' => (LBrace, 1),
                b'}' => (RBrace, 1),
                _ => {
                    let ch = self.src[start..].chars().next().unwrap_or('\u{0}');
                    self.pos += ch.len_utf8();
                    self.error(
                        LexErrorKind::IllegalCharacter,
                        start,
                        format!("illegal character {ch:?}"),
                    );
                    return self.token(Error, start, None);
                }
            },
        };
        self.pos += len;
        self.token(kind, start, None)
    }

    fn string(&mut self, quote: u8) -> Token {
        let start = self.pos;
        self.pos += 1;
        while !self.at_end() && self.peek() != quote && self.peek() != b'\n' {
            self.pos += 1;
        }
        if self.peek() != quote {
            self.error(LexErrorKind::UnterminatedString, start, "unterminated string");
            return self.token(TokenKind::Error, start, None);
        }
        self.pos += 1;
        let contents = self.src[start + 1..self.pos - 1].to_string();
        self.token(TokenKind::String, start, Some(LiteralValue::Str(contents)))
    }

    /// Scans the whole alphanumeric run first and classifies it by its last
    /// character, so `0BEH` is one hexadecimal literal rather than `0B`
    /// followed by `EH`.
    fn number(&mut self) -> Token {
        let start = self.pos;
        while self.peek().is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let run = &self.src[start..self.pos];
        if run.bytes().all(|c| c.is_ascii_digit()) {
            if self.peek() == b'.' && self.peek_at(1) != b'.' {
                return self.real(start);
            }
            return self.whole(start, run, 10, TokenKind::Integer(Radix::Decimal));
        }
        let (digits, suffix) = run.split_at(run.len() - 1);
        let octal = digits.bytes().all(|c| (b'0'..=b'7').contains(&c));
        match suffix {
            "H" if digits.bytes().all(|c| c.is_ascii_digit() || (b'A'..=b'F').contains(&c)) => {
                self.whole(start, digits, 16, TokenKind::Integer(Radix::Hexadecimal))
            }
            "B" if octal => self.whole(start, digits, 8, TokenKind::Integer(Radix::Octal)),
            "C" if octal => self.whole(start, digits, 8, TokenKind::CharCode),
            _ => {
                self.error(
                    LexErrorKind::MalformedLiteral,
                    start,
                    format!("malformed number literal `{run}`"),
                );
                self.token(TokenKind::Error, start, None)
            }
        }
    }

    fn whole(&mut self, start: usize, digits: &str, radix: u32, kind: TokenKind) -> Token {
        let value = match u64::from_str_radix(digits, radix) {
            Ok(v) => v,
            Err(_) => {
                self.error(
                    LexErrorKind::MalformedLiteral,
                    start,
                    format!("literal `{}` is too large", &self.src[start..self.pos]),
                );
                return self.token(TokenKind::Error, start, None);
            }
        };
        let value = if kind == TokenKind::CharCode {
            match u32::try_from(value) {
                Ok(c) => LiteralValue::Char(c),
                Err(_) => {
                    self.error(LexErrorKind::MalformedLiteral, start, "character code is too large");
                    return self.token(TokenKind::Error, start, None);
                }
            }
        } else {
            LiteralValue::Whole(value)
        };
        self.token(kind, start, Some(value))
    }

    fn real(&mut self, start: usize) -> Token {
        self.pos += 1;
        while self.peek().is_ascii_digit() {
            self.pos += 1;
        }
        if self.peek() == b'E' {
            self.pos += 1;
            if matches!(self.peek(), b'+' | b'-') {
                self.pos += 1;
            }
            if !self.peek().is_ascii_digit() {
                while self.peek().is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                self.error(LexErrorKind::MalformedLiteral, start, "malformed real literal");
                return self.token(TokenKind::Error, start, None);
            }
            while self.peek().is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.peek().is_ascii_alphanumeric() {
            while self.peek().is_ascii_alphanumeric() {
                self.pos += 1;
            }
            self.error(LexErrorKind::MalformedLiteral, start, "malformed real literal");
            return self.token(TokenKind::Error, start, None);
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) => self.token(TokenKind::Real, start, Some(LiteralValue::Real(v))),
            Err(_) => {
                self.error(LexErrorKind::MalformedLiteral, start, "malformed real literal");
                self.token(TokenKind::Error, start, None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src, &DialectProfile::legacy())
            .tokens
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    /// Base-8 digits to value, independent of `from_str_radix`.
    fn octal_oracle(digits: &str) -> u64 {
        digits
            .bytes()
            .rev()
            .enumerate()
            .map(|(i, d)| u64::from(d - b'0') * 8u64.pow(i as u32))
            .sum()
    }

    #[test]
    fn synonym_not_equal_is_foreign_in_revised() {
        let lexed = tokenize("a <> b", &DialectProfile::revised());
        assert!(lexed.is_clean());
        let t = &lexed.tokens;
        assert_eq!(t[0].kind, TokenKind::Ident);
        assert_eq!(t[1].kind, TokenKind::NotEqualSynonym);
        assert_eq!(t[1].text, "<>");
        assert!(t[1].dialect_foreign);
        assert!(!t[0].dialect_foreign);
        assert_eq!(t[2].text, "b");
        let legacy = tokenize("a <> b", &DialectProfile::legacy());
        assert!(!legacy.tokens[1].dialect_foreign);
    }

    #[test]
    fn empty_input_has_only_eof() {
        let lexed = tokenize("", &DialectProfile::revised());
        assert_eq!(lexed.tokens.len(), 1);
        assert_eq!(lexed.tokens[0].kind, TokenKind::Eof);
        assert!(lexed.is_clean());
    }

    #[test]
    fn octal_whole_and_char_values() {
        let lexed = tokenize("377B 41C 0FFH", &DialectProfile::revised());
        let t = &lexed.tokens;
        assert_eq!(t[0].kind, TokenKind::Integer(Radix::Octal));
        assert_eq!(t[0].value, Some(LiteralValue::Whole(255)));
        assert!(t[0].dialect_foreign);
        assert_eq!(t[1].kind, TokenKind::CharCode);
        assert_eq!(t[1].value, Some(LiteralValue::Char(33)));
        assert_eq!(t[2].kind, TokenKind::Integer(Radix::Hexadecimal));
        assert_eq!(t[2].value, Some(LiteralValue::Whole(255)));
        assert!(!t[2].dialect_foreign);
    }

    #[test]
    fn octal_literals_match_oracle() {
        let profile = DialectProfile::legacy();
        for n in 0..=0o77777u64 {
            let digits = format!("{n:o}");
            let lexed = tokenize(&format!("{digits}B"), &profile);
            assert_eq!(
                lexed.tokens[0].value,
                Some(LiteralValue::Whole(octal_oracle(&digits)))
            );
        }
    }

    #[test]
    fn hex_with_b_digit_is_one_literal() {
        let lexed = tokenize("0BEH", &DialectProfile::legacy());
        assert_eq!(lexed.tokens.len(), 2);
        assert_eq!(lexed.tokens[0].kind, TokenKind::Integer(Radix::Hexadecimal));
        assert_eq!(lexed.tokens[0].value, Some(LiteralValue::Whole(190)));
        let lexed = tokenize("1BH 0CH", &DialectProfile::legacy());
        assert_eq!(lexed.tokens[0].value, Some(LiteralValue::Whole(0x1B)));
        assert_eq!(lexed.tokens[1].value, Some(LiteralValue::Whole(0x0C)));
    }

    #[test]
    fn malformed_literal_reports_and_continues() {
        let lexed = tokenize("0GH + 8B x", &DialectProfile::legacy());
        assert_eq!(lexed.errors.len(), 2);
        assert!(lexed.errors.iter().all(|e| e.kind == LexErrorKind::MalformedLiteral));
        assert_eq!(lexed.errors[0].span.len(), 3);
        assert_eq!(
            kinds("0GH + 8B x"),
            [
                TokenKind::Error,
                TokenKind::Plus,
                TokenKind::Error,
                TokenKind::Ident,
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn reals_and_ranges() {
        assert_eq!(
            kinds("1..10"),
            [
                TokenKind::Integer(Radix::Decimal),
                TokenKind::DotDot,
                TokenKind::Integer(Radix::Decimal),
                TokenKind::Eof
            ]
        );
        let lexed = tokenize("1.5E+3 2.", &DialectProfile::legacy());
        assert_eq!(lexed.tokens[0].value, Some(LiteralValue::Real(1500.0)));
        assert_eq!(lexed.tokens[1].value, Some(LiteralValue::Real(2.0)));
    }

    #[test]
    fn nested_comment_is_single_trivia() {
        let src = "(* a (* b *) *)x";
        let lexed = tokenize(src, &DialectProfile::revised());
        assert!(lexed.is_clean());
        let x = &lexed.tokens[0];
        assert_eq!(x.leading_trivia.len(), 1);
        assert_eq!(x.leading_trivia[0].kind, TriviaKind::Comment);
        assert_eq!(x.leading_trivia[0].text, "(* a (* b *) *)");
        assert_eq!(render_tokens(&lexed.tokens), src);
    }

    #[test]
    fn leading_trivia_concatenation() {
        let lexed = tokenize("  x", &DialectProfile::revised());
        assert_eq!(lexed.tokens[0].leading_trivia[0].text, "  ");
        assert_eq!(render_tokens(&lexed.tokens[..1]), "  x");
    }

    #[test]
    fn pragma_is_trivia_of_next_token() {
        let lexed = tokenize("; <*PRIVATETO=A*>\nFROM", &DialectProfile::revised());
        let from = &lexed.tokens[1];
        assert!(from.is_keyword(Keyword::From));
        let pragma = from
            .leading_trivia
            .iter()
            .find(|t| t.kind == TriviaKind::Pragma)
            .unwrap();
        assert_eq!(pragma.text, "<*PRIVATETO=A*>");
    }

    #[test]
    fn errors_for_unterminated_forms() {
        let e = tokenize("x := 'abc\ny", &DialectProfile::legacy());
        assert_eq!(e.errors[0].kind, LexErrorKind::UnterminatedString);
        assert_eq!(e.tokens.last().unwrap().kind, TokenKind::Eof);
        assert_eq!(render_tokens(&e.tokens), "x := 'abc\ny");
        let e = tokenize("x (* (* *)", &DialectProfile::legacy());
        assert_eq!(e.errors[0].kind, LexErrorKind::UnterminatedComment);
        assert_eq!(render_tokens(&e.tokens), "x (* (* *)");
        let e = tokenize("x $ y", &DialectProfile::legacy());
        assert_eq!(e.errors[0].kind, LexErrorKind::IllegalCharacter);
        assert_eq!(e.errors[0].span.start, 2);
        let e = tokenize("<* FFI", &DialectProfile::legacy());
        assert_eq!(e.errors[0].kind, LexErrorKind::UnterminatedPragma);
    }

    #[test]
    fn high_bytes_only_inside_comments_and_strings() {
        let src = "(* grüße *) s := \"naïve\"; é";
        let lexed = tokenize(src, &DialectProfile::legacy());
        assert_eq!(lexed.errors.len(), 1);
        assert_eq!(lexed.errors[0].kind, LexErrorKind::IllegalCharacter);
        assert_eq!(render_tokens(&lexed.tokens), src);
    }

    #[test]
    fn spans_match_text_lengths_and_positions() {
        let lexed = tokenize("MODULE M;\n  x := 1", &DialectProfile::revised());
        for t in &lexed.tokens {
            assert_eq!(t.span.len(), t.text.len());
        }
        let assign = &lexed.tokens[4];
        assert_eq!(assign.text, ":=");
        assert_eq!((assign.span.start_line, assign.span.start_col), (2, 5));
    }

    #[test]
    fn value_presence_follows_kind() {
        let lexed = tokenize("x 1 2.0 'a' 7C + \"s\"", &DialectProfile::legacy());
        for t in &lexed.tokens {
            assert_eq!(t.value.is_some(), t.kind.is_literal(), "{:?}", t.kind);
        }
    }

    #[test]
    fn synonym_table_is_exactly_five_pairs() {
        let all = TokenKind::all();
        let synonyms: Vec<_> = all.iter().filter(|k| k.is_synonym()).collect();
        assert_eq!(synonyms.len(), 5);
        let replacements: Vec<_> = TokenKind::SYNONYMS.iter().map(|s| s.2).collect();
        assert_eq!(replacements, ["|", "^", "#", "AND", "NOT"]);
        for k in all.iter().filter(|k| !k.is_synonym()) {
            assert_eq!(k.canonical(), *k);
        }
    }
}
