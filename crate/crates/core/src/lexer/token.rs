use std::fmt;

use crate::span::SourceSpan;

macro_rules! keywords {
    ($($variant:ident => $text:literal,)*) => {
        /// Reserved words of the base language.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Keyword {
            $($variant,)*
        }

        impl Keyword {
            pub const ALL: &'static [Keyword] = &[$(Keyword::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Keyword::$variant => $text,)*
                }
            }

            pub fn lookup(text: &str) -> Option<Keyword> {
                match text {
                    $($text => Some(Keyword::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

keywords! {
    And => "AND",
    Array => "ARRAY",
    Begin => "BEGIN",
    By => "BY",
    Case => "CASE",
    Const => "CONST",
    Definition => "DEFINITION",
    Div => "DIV",
    Do => "DO",
    Else => "ELSE",
    Elsif => "ELSIF",
    End => "END",
    Except => "EXCEPT",
    Exit => "EXIT",
    Export => "EXPORT",
    Finally => "FINALLY",
    For => "FOR",
    Forward => "FORWARD",
    From => "FROM",
    If => "IF",
    Implementation => "IMPLEMENTATION",
    Import => "IMPORT",
    In => "IN",
    Loop => "LOOP",
    Mod => "MOD",
    Module => "MODULE",
    Not => "NOT",
    Of => "OF",
    Or => "OR",
    Packedset => "PACKEDSET",
    Pointer => "POINTER",
    Procedure => "PROCEDURE",
    Qualified => "QUALIFIED",
    Record => "RECORD",
    Rem => "REM",
    Repeat => "REPEAT",
    Retry => "RETRY",
    Return => "RETURN",
    Set => "SET",
    Then => "THEN",
    To => "TO",
    Type => "TYPE",
    Until => "UNTIL",
    Var => "VAR",
    While => "WHILE",
    With => "WITH",
}

/// Base of a whole-number literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Radix {
    Decimal,
    Hexadecimal,
    Octal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Ident,
    Keyword(Keyword),
    /// Whole-number literal: `12`, `0FFH`, `377B`.
    Integer(Radix),
    Real,
    /// Octal character code literal: `41C`.
    CharCode,
    String,
    Plus,
    Minus,
    Star,
    Slash,
    Backslash,
    Assign,
    Colon,
    ColonColon,
    Equal,
    Hash,
    /// `<>`
    NotEqualSynonym,
    Less,
    LessEqual,
    Greater,
    GreaterEqual,
    /// `&`
    AndSynonym,
    /// `~`
    NotSynonym,
    Bar,
    /// `!`
    BarSynonym,
    Caret,
    /// `@`
    CaretSynonym,
    Dot,
    DotDot,
    Comma,
    Semicolon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    /// Text that could not be lexed; a `LexError` covers the same span.
    Error,
    /// End of input. Its text is empty; its trivia holds whatever followed
    /// the final token.
    Eof,
}

impl TokenKind {
    /// Every token kind, for building dialect token sets.
    pub fn all() -> Vec<TokenKind> {
        use TokenKind::*;
        let mut kinds = vec![
            Ident,
            Integer(Radix::Decimal),
            Integer(Radix::Hexadecimal),
            Integer(Radix::Octal),
            Real,
            CharCode,
            String,
            Plus,
            Minus,
            Star,
            Slash,
            Backslash,
            Assign,
            Colon,
            ColonColon,
            Equal,
            Hash,
            NotEqualSynonym,
            Less,
            LessEqual,
            Greater,
            GreaterEqual,
            AndSynonym,
            NotSynonym,
            Bar,
            BarSynonym,
            Caret,
            CaretSynonym,
            Dot,
            DotDot,
            Comma,
            Semicolon,
            LParen,
            RParen,
            LBracket,
            RBracket,
            LBrace,
            RBrace,
            Error,
            Eof,
        ];
        kinds.extend(crate::lexer::Keyword::ALL.iter().map(|&k| Keyword(k)));
        kinds
    }

    /// The five lexical alternatives and the symbol each one stands for.
    pub const SYNONYMS: [(TokenKind, TokenKind, &'static str); 5] = [
        (TokenKind::BarSynonym, TokenKind::Bar, "|"),
        (TokenKind::CaretSynonym, TokenKind::Caret, "^"),
        (TokenKind::NotEqualSynonym, TokenKind::Hash, "#"),
        (TokenKind::AndSynonym, TokenKind::Keyword(Keyword::And), "AND"),
        (TokenKind::NotSynonym, TokenKind::Keyword(Keyword::Not), "NOT"),
    ];

    pub fn is_synonym(self) -> bool {
        Self::SYNONYMS.iter().any(|(syn, _, _)| *syn == self)
    }

    /// Spelling of the preferred symbol for a synonym token.
    pub fn synonym_replacement(self) -> Option<&'static str> {
        Self::SYNONYMS
            .iter()
            .find(|(syn, _, _)| *syn == self)
            .map(|(_, _, text)| *text)
    }

    /// Maps synonym kinds onto the kind they stand for; identity otherwise.
    pub fn canonical(self) -> TokenKind {
        Self::SYNONYMS
            .iter()
            .find(|(syn, _, _)| *syn == self)
            .map(|(_, canon, _)| *canon)
            .unwrap_or(self)
    }

    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::Integer(_) | TokenKind::Real | TokenKind::CharCode | TokenKind::String
        )
    }

    pub fn is_octal(self) -> bool {
        matches!(self, TokenKind::Integer(Radix::Octal) | TokenKind::CharCode)
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        let s = match self {
            Ident => "identifier",
            Keyword(k) => k.as_str(),
            Integer(_) => "whole number",
            Real => "real number",
            CharCode => "character code",
            String => "string",
            Plus => "'+'",
            Minus => "'-'",
            Star => "'*'",
            Slash => "'/'",
            Backslash => "'\\'",
            Assign => "':='",
            Colon => "':'",
            ColonColon => "'::'",
            Equal => "'='",
            Hash => "'#'",
            NotEqualSynonym => "'<>'",
            Less => "'<'",
            LessEqual => "'<='",
            Greater => "'>'",
            GreaterEqual => "'>='",
            AndSynonym => "'&'",
            NotSynonym => "'~'",
            Bar => "'|'",
            BarSynonym => "'!'",
            Caret => "'^'",
            CaretSynonym => "'@'",
            Dot => "'.'",
            DotDot => "'..'",
            Comma => "','",
            Semicolon => "';'",
            LParen => "'('",
            RParen => "')'",
            LBracket => "'['",
            RBracket => "']'",
            LBrace => "'{'",
            RBrace => "'}'",
            Error => "invalid token",
            Eof => "end of file",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LiteralValue {
    Whole(u64),
    Char(u32),
    Real(f64),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriviaKind {
    Whitespace,
    Comment,
    Pragma,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trivia {
    pub kind: TriviaKind,
    pub span: SourceSpan,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
    pub text: String,
    pub leading_trivia: Vec<Trivia>,
    pub value: Option<LiteralValue>,
    /// Set when the token kind is not part of the dialect it was lexed for.
    pub dialect_foreign: bool,
}

impl Token {
    pub fn is(&self, kind: TokenKind) -> bool {
        self.kind.canonical() == kind
    }

    pub fn is_keyword(&self, kw: Keyword) -> bool {
        self.is(TokenKind::Keyword(kw))
    }

    pub fn has_comment_trivia(&self) -> bool {
        self.leading_trivia
            .iter()
            .any(|t| t.kind != TriviaKind::Whitespace)
    }

    /// Start of this token's leading trivia (or of the token itself when
    /// it has none).
    pub fn full_start(&self) -> usize {
        self.leading_trivia
            .first()
            .map(|t| t.span.start)
            .unwrap_or(self.span.start)
    }
}
