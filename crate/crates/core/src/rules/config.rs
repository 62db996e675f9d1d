use std::collections::BTreeSet;

use crate::diagnostic::RuleId;
use crate::lexer::DialectId;

/// Which deprecated facilities are re-enabled (reported as warnings
/// instead of errors).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DeprecationSwitch {
    #[default]
    Off,
    All,
    Rules(BTreeSet<RuleId>),
}

impl DeprecationSwitch {
    pub fn covers(&self, rule: RuleId) -> bool {
        match self {
            DeprecationSwitch::Off => false,
            DeprecationSwitch::All => true,
            DeprecationSwitch::Rules(set) => set.contains(&rule),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConfig {
    pub profile: DialectId,
    /// When set, only these catalogue rules run.
    pub enabled: Option<BTreeSet<RuleId>>,
    pub disabled: BTreeSet<RuleId>,
    pub deprecated: DeprecationSwitch,
    pub assume_trunc_is_conversion: bool,
    pub private_imports_as_errors: bool,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            profile: DialectId::Revised,
            enabled: None,
            disabled: BTreeSet::new(),
            deprecated: DeprecationSwitch::Off,
            assume_trunc_is_conversion: false,
            private_imports_as_errors: false,
        }
    }
}

impl RuleConfig {
    pub fn legacy() -> Self {
        RuleConfig {
            profile: DialectId::Legacy,
            ..RuleConfig::default()
        }
    }

    /// Front-end diagnostics cannot be disabled.
    pub fn is_enabled(&self, rule: RuleId) -> bool {
        if !rule.is_catalogue() {
            return true;
        }
        !self.disabled.contains(&rule)
            && self.enabled.as_ref().is_none_or(|set| set.contains(&rule))
    }

    pub fn is_revised(&self) -> bool {
        self.profile == DialectId::Revised
    }
}
