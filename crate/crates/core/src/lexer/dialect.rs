use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::token::{Radix, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DialectId {
    /// IS 10514-1 as published.
    Legacy,
    /// The revised language.
    Revised,
}

impl fmt::Display for DialectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DialectId::Legacy => "legacy",
            DialectId::Revised => "revised",
        })
    }
}

impl FromStr for DialectId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "legacy" => Ok(DialectId::Legacy),
            "revised" => Ok(DialectId::Revised),
            other => Err(format!("unknown profile `{other}` (expected `legacy` or `revised`)")),
        }
    }
}

/// Pervasive identifiers of the base standard.
pub const BASE_PERVASIVES: &[&str] = &[
    "ABS", "BITSET", "BOOLEAN", "CAP", "CARD", "CARDINAL", "CHAR", "CHR", "CMPLX", "COMPLEX",
    "DEC", "DISPOSE", "EXCL", "FALSE", "FLOAT", "HALT", "HIGH", "IM", "INC", "INCL", "INT",
    "INTEGER", "INTERRUPTIBLE", "LENGTH", "LFLOAT", "LONGCOMPLEX", "LONGINT", "LONGREAL",
    "MAX", "MIN", "NEW", "NIL", "ODD", "ORD", "PROC", "PROTECTION", "RE", "REAL", "SIZE",
    "TRUE", "TRUNC", "UNINTERRUPTIBLE", "VAL",
];

/// Pervasives introduced by the revision.
pub const REVISED_ADDITIONS: &[&str] = &["LONGCARD", "UNICHAR", "UCHR"];

/// Conversion functions dropped by the revision.
pub const REMOVED_CONVERSIONS: &[&str] = &["INT", "CARD", "FLOAT", "LFLOAT", "TRUNC", "VAL"];

/// Lexical and pervasive configuration of one dialect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialectProfile {
    pub id: DialectId,
    pub enabled_tokens: BTreeSet<TokenKind>,
    pub pervasive_idents: BTreeSet<&'static str>,
    pub removed_pervasives: BTreeSet<&'static str>,
}

impl DialectProfile {
    pub fn legacy() -> Self {
        let enabled_tokens = TokenKind::all()
            .into_iter()
            .filter(|k| !matches!(k, TokenKind::ColonColon | TokenKind::Backslash))
            .collect();
        DialectProfile {
            id: DialectId::Legacy,
            enabled_tokens,
            pervasive_idents: BASE_PERVASIVES.iter().copied().collect(),
            removed_pervasives: BTreeSet::new(),
        }
    }

    pub fn revised() -> Self {
        let enabled_tokens = TokenKind::all()
            .into_iter()
            .filter(|k| !k.is_synonym())
            .filter(|k| !matches!(k, TokenKind::Integer(Radix::Octal) | TokenKind::CharCode))
            .collect();
        let removed_pervasives: BTreeSet<_> = REMOVED_CONVERSIONS.iter().copied().collect();
        let pervasive_idents = BASE_PERVASIVES
            .iter()
            .copied()
            .filter(|p| !removed_pervasives.contains(p))
            .chain(REVISED_ADDITIONS.iter().copied())
            .collect();
        DialectProfile {
            id: DialectId::Revised,
            enabled_tokens,
            pervasive_idents,
            removed_pervasives,
        }
    }

    pub fn for_id(id: DialectId) -> Self {
        match id {
            DialectId::Legacy => Self::legacy(),
            DialectId::Revised => Self::revised(),
        }
    }

    pub fn enables(&self, kind: TokenKind) -> bool {
        self.enabled_tokens.contains(&kind)
    }

    /// True when `name` is predefined in this dialect, including removed
    /// conversion functions (still resolvable so they can be reported).
    pub fn is_pervasive(&self, name: &str) -> bool {
        self.pervasive_idents.contains(name) || self.removed_pervasives.contains(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legacy_enables_synonyms_and_octal_but_not_revised_operators() {
        let p = DialectProfile::legacy();
        for (syn, _, _) in TokenKind::SYNONYMS {
            assert!(p.enables(syn));
        }
        assert!(p.enables(TokenKind::Integer(Radix::Octal)));
        assert!(p.enables(TokenKind::CharCode));
        assert!(!p.enables(TokenKind::ColonColon));
        assert!(!p.enables(TokenKind::Backslash));
    }

    #[test]
    fn revised_profile_contents() {
        let p = DialectProfile::revised();
        for (syn, _, _) in TokenKind::SYNONYMS {
            assert!(!p.enables(syn));
        }
        assert!(!p.enables(TokenKind::Integer(Radix::Octal)));
        assert!(!p.enables(TokenKind::CharCode));
        assert!(p.enables(TokenKind::ColonColon));
        assert!(p.enables(TokenKind::Backslash));
        for add in ["LONGCARD", "UNICHAR", "UCHR"] {
            assert!(p.pervasive_idents.contains(add));
        }
        let removed: Vec<_> = p.removed_pervasives.iter().copied().collect();
        assert_eq!(removed, ["CARD", "FLOAT", "INT", "LFLOAT", "TRUNC", "VAL"]);
        assert!(p.is_pervasive("VAL"));
        assert!(p.is_pervasive("CHR"));
        assert!(p.is_pervasive("ORD"));
    }
}
