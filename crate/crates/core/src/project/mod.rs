//! Loading a source tree: files, module index, import graph and symbol
//! tables resolved across definition modules.

mod load;

pub use load::{decode_source, encode_source, load_project, read_sources, SourceText};

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use crate::diagnostic::{sort_diagnostics, Action, Diagnostic, RuleId, Severity};
use crate::lexer::{tokenize, DialectId, DialectProfile, Token};
use crate::rules::{check_private_imports, run_rules, RuleConfig, RuleInput};
use crate::sema::{build_symbols, DefinitionSource, ScopedSymbols};
use crate::span::SourceSpan;
use crate::syntax::{lex_diagnostics, parse_compilation_unit, CompilationUnit, DeclKind, Declaration, Import, ModulePragma, PragmaKind, UnitKind};

#[derive(Debug, Clone)]
pub struct ProjectOptions {
    pub profile: DialectId,
    /// File extensions (without the dot) that hold Modula-2 source.
    pub extensions: Vec<String>,
    /// Modules supplied outside the tree; never matched to project files.
    pub external_modules: BTreeSet<String>,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions {
            profile: DialectId::Revised,
            extensions: vec!["def".into(), "mod".into()],
            external_modules: BTreeSet::new(),
        }
    }
}

/// One parsed file.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: PathBuf,
    pub text: SourceText,
    pub tokens: Vec<Token>,
    pub unit: CompilationUnit,
    pub symbols: Arc<ScopedSymbols>,
    /// Lexical, syntax and declaration errors.
    pub diagnostics: Vec<Diagnostic>,
}

impl SourceUnit {
    pub fn source(&self) -> &str {
        &self.text.text
    }

    pub fn name(&self) -> &str {
        &self.unit.name.name
    }
}

/// Where each module's parts live, as indices into `ProjectModel::units`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModuleEntry {
    pub definition: Option<usize>,
    /// The implementation or program module.
    pub implementation: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ModuleIndex {
    pub modules: BTreeMap<String, ModuleEntry>,
}

impl ModuleIndex {
    pub fn get(&self, name: &str) -> Option<&ModuleEntry> {
        self.modules.get(name)
    }
}

/// Unit `from` imports module `module`; `span` is its first import.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportEdge {
    pub from: usize,
    pub module: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default)]
pub struct ImportGraph {
    pub edges: Vec<ImportEdge>,
}

impl ImportGraph {
    pub fn imports_of(&self, unit: usize) -> impl Iterator<Item = &ImportEdge> {
        self.edges.iter().filter(move |e| e.from == unit)
    }
}

#[derive(Debug, Clone)]
pub struct ProjectModel {
    pub options: ProjectOptions,
    pub units: Vec<SourceUnit>,
    pub index: ModuleIndex,
    pub graph: ImportGraph,
    /// Header pragmas of every definition module, by module name.
    pub pragma_index: BTreeMap<String, Vec<ModulePragma>>,
    /// Problems with the tree itself: unreadable files, duplicate modules.
    pub diagnostics: Vec<Diagnostic>,
}

struct Definitions<'a> {
    tables: &'a BTreeMap<String, Arc<ScopedSymbols>>,
    external: &'a BTreeSet<String>,
}

impl DefinitionSource for Definitions<'_> {
    fn definition(&self, module: &str) -> Option<Arc<ScopedSymbols>> {
        if self.external.contains(module) {
            return None;
        }
        self.tables.get(module).cloned()
    }
}

impl ProjectModel {
    /// Build a model from files already in memory.
    pub fn from_sources(files: Vec<(PathBuf, SourceText)>, options: ProjectOptions) -> Self {
        let profile = DialectProfile::for_id(options.profile);
        let mut files = files;
        files.sort_by(|a, b| a.0.cmp(&b.0));
        let parsed: Vec<_> = files
            .into_par_iter()
            .map(|(path, text)| {
                let lexed = tokenize(&text.text, &profile);
                let mut diags = lex_diagnostics(&lexed);
                let (unit, syntax) = parse_compilation_unit(&lexed.tokens);
                diags.extend(syntax.into_iter().filter(|d| !d.rule.is_catalogue()));
                (path, text, lexed.tokens, unit, diags)
            })
            .collect();

        let mut diagnostics = Vec::new();
        let mut index = ModuleIndex::default();
        for (i, (path, _, _, unit, _)) in parsed.iter().enumerate() {
            let entry = index.modules.entry(unit.name.name.clone()).or_default();
            let slot = if unit.kind == UnitKind::Definition {
                &mut entry.definition
            } else {
                &mut entry.implementation
            };
            match slot {
                Some(first) => diagnostics.push(
                    Diagnostic::error(
                        RuleId::ProjectStructure,
                        unit.name.span,
                        format!(
                            "{} `{}` is also defined in {}",
                            unit.kind.as_str(),
                            unit.name.name,
                            parsed[*first].0.display()
                        ),
                    )
                    .with_file(path),
                ),
                None => *slot = Some(i),
            }
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if stem != unit.name.name && !unit.name.name.is_empty() {
                    diagnostics.push(
                        Diagnostic::new(
                            RuleId::ProjectStructure,
                            Severity::Warning,
                            Action::Warning,
                            unit.name.span,
                            format!("module `{}` is in a file named `{stem}`", unit.name.name),
                        )
                        .with_file(path),
                    );
                }
            }
        }

        // Definition modules first, each after the definitions it imports.
        let mut tables: BTreeMap<String, Arc<ScopedSymbols>> = BTreeMap::new();
        let mut symbols: Vec<Option<Arc<ScopedSymbols>>> = vec![None; parsed.len()];
        let order = definition_order(&parsed.iter().map(|p| &p.3).collect::<Vec<_>>(), &index);
        for i in order {
            let unit = &parsed[i].3;
            let source = Definitions {
                tables: &tables,
                external: &options.external_modules,
            };
            let table = Arc::new(build_symbols(unit, &profile, Some(&source)));
            tables.insert(unit.name.name.clone(), table.clone());
            symbols[i] = Some(table);
        }
        let source = Definitions {
            tables: &tables,
            external: &options.external_modules,
        };
        let rest: Vec<(usize, Arc<ScopedSymbols>)> = parsed
            .par_iter()
            .enumerate()
            .filter(|(i, _)| symbols[*i].is_none())
            .map(|(i, p)| (i, Arc::new(build_symbols(&p.3, &profile, Some(&source)))))
            .collect();
        for (i, t) in rest {
            symbols[i] = Some(t);
        }

        let units: Vec<SourceUnit> = parsed
            .into_iter()
            .zip(symbols)
            .map(|((path, text, tokens, unit, mut diags), symbols)| {
                let symbols = symbols.expect("every unit has a table");
                diags.extend(symbols.diagnostics.iter().cloned());
                let diagnostics = diags.into_iter().map(|d| d.with_file(&path)).collect();
                SourceUnit {
                    path,
                    text,
                    tokens,
                    unit,
                    symbols,
                    diagnostics,
                }
            })
            .collect();

        let mut graph = ImportGraph::default();
        for (i, u) in units.iter().enumerate() {
            for (module, span) in imported_modules(&u.unit, &u.symbols) {
                graph.edges.push(ImportEdge { from: i, module, span });
            }
        }
        let pragma_index = index
            .modules
            .iter()
            .filter_map(|(name, e)| e.definition.map(|d| (name.clone(), units[d].unit.pragmas.clone())))
            .filter(|(_, p)| !p.is_empty())
            .collect();

        sort_diagnostics(&mut diagnostics);
        ProjectModel {
            options,
            units,
            index,
            graph,
            pragma_index,
            diagnostics,
        }
    }

    /// Modules a `PRIVATETO` module admits, or `None` if it is unrestricted.
    pub fn private_clients(&self, module: &str) -> Option<BTreeSet<String>> {
        if self.options.external_modules.contains(module) {
            return None;
        }
        let mut clients = None::<BTreeSet<String>>;
        for p in self.pragma_index.get(module)? {
            if p.kind == PragmaKind::PrivateTo {
                clients
                    .get_or_insert_with(BTreeSet::new)
                    .extend(p.client_modules.iter().map(|c| c.name.clone()));
            }
        }
        clients
    }

    pub fn unit_by_path(&self, path: &std::path::Path) -> Option<&SourceUnit> {
        self.units.iter().find(|u| u.path == path)
    }

    /// Every diagnostic for the project under `config`, in report order.
    pub fn check(&self, config: &RuleConfig) -> Vec<Diagnostic> {
        let mut out = self.diagnostics.clone();
        let per_file: Vec<Vec<Diagnostic>> = self
            .units
            .par_iter()
            .map(|u| {
                let input = RuleInput {
                    path: &u.path,
                    source: u.source(),
                    tokens: &u.tokens,
                    unit: &u.unit,
                    symbols: &u.symbols,
                };
                let mut d = u.diagnostics.clone();
                d.extend(run_rules(&input, config));
                d
            })
            .collect();
        out.extend(per_file.into_iter().flatten());
        out.extend(check_private_imports(self, config));
        sort_diagnostics(&mut out);
        out
    }
}

/// Distinct modules `unit` imports, with the span of the first import.
/// Imports inside local modules count when they name no local entity.
fn imported_modules(unit: &CompilationUnit, symbols: &ScopedSymbols) -> Vec<(String, SourceSpan)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut add = |name: &str, span: SourceSpan| {
        if seen.insert(name.to_string()) {
            out.push((name.to_string(), span));
        }
    };
    for i in &unit.imports {
        match i {
            Import::From { module, span, .. } => add(&module.name, *span),
            Import::Modules { modules, span } => modules.iter().for_each(|m| add(&m.name, *span)),
        }
    }
    fn local(decls: &[Declaration], symbols: &ScopedSymbols, add: &mut dyn FnMut(&str, SourceSpan)) {
        for d in decls {
            let (imports, inner) = match &d.kind {
                DeclKind::Module(m) => (m.imports.as_slice(), &m.declarations),
                DeclKind::Procedure(p) => (&[][..], &p.declarations),
                _ => continue,
            };
            for i in imports {
                match i {
                    Import::From { module, span, .. } if !symbols.declares(&module.name) => add(&module.name, *span),
                    Import::Modules { modules, span } => modules
                        .iter()
                        .filter(|m| !symbols.declares(&m.name))
                        .for_each(|m| add(&m.name, *span)),
                    _ => {}
                }
            }
            local(inner, symbols, add);
        }
    }
    local(&unit.declarations, symbols, &mut add);
    out
}

/// Indices of definition modules, dependencies first. Cycles are broken
/// at the point they are found.
fn definition_order(units: &[&CompilationUnit], index: &ModuleIndex) -> Vec<usize> {
    fn visit(i: usize, units: &[&CompilationUnit], index: &ModuleIndex, state: &mut [u8], out: &mut Vec<usize>) {
        if state[i] != 0 {
            return;
        }
        state[i] = 1;
        for imp in &units[i].imports {
            let names: Vec<&str> = match imp {
                Import::From { module, .. } => vec![&module.name],
                Import::Modules { modules, .. } => modules.iter().map(|m| m.name.as_str()).collect(),
            };
            for n in names {
                if let Some(d) = index.get(n).and_then(|e| e.definition) {
                    visit(d, units, index, state, out);
                }
            }
        }
        state[i] = 2;
        out.push(i);
    }
    let mut state = vec![0u8; units.len()];
    let mut out = Vec::new();
    for entry in index.modules.values() {
        if let Some(d) = entry.definition {
            visit(d, units, index, &mut state, &mut out);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(files: &[(&str, &str)]) -> ProjectModel {
        let files = files
            .iter()
            .map(|(p, s)| (PathBuf::from(p), SourceText::utf8(*s)))
            .collect();
        ProjectModel::from_sources(files, ProjectOptions::default())
    }

    #[test]
    fn index_and_cross_module_resolution() {
        let m = model(&[
            ("A.def", "DEFINITION MODULE A; VAR v: INTEGER; TYPE S = BITSET; END A."),
            ("B.mod", "MODULE B; FROM A IMPORT v, S; VAR s: S; BEGIN s := s - s; v := 1 END B."),
        ]);
        assert_eq!(m.index.get("A").unwrap().definition, Some(0));
        assert_eq!(m.index.get("B").unwrap().implementation, Some(1));
        assert!(m.diagnostics.is_empty());
        let d = m.check(&RuleConfig::default());
        let rules: Vec<_> = d.iter().map(|d| d.rule).collect();
        assert_eq!(rules, [RuleId::L03, RuleId::M04]);
        assert!(d[0].fix.is_some(), "set type resolved through A");
    }

    #[test]
    fn duplicate_modules_name_both_paths() {
        let m = model(&[("x/A.mod", "MODULE A; END A."), ("y/A.mod", "MODULE A; END A.")]);
        assert_eq!(m.diagnostics.len(), 1);
        let d = &m.diagnostics[0];
        assert_eq!(d.rule, RuleId::ProjectStructure);
        assert_eq!(d.file, PathBuf::from("y/A.mod"));
        assert!(d.message.contains("x/A.mod"));
    }

    #[test]
    fn file_name_mismatch_is_a_warning() {
        let m = model(&[("Other.mod", "MODULE A; END A.")]);
        assert_eq!(m.diagnostics[0].severity, Severity::Warning);
    }

    #[test]
    fn import_edges_are_distinct_per_unit() {
        let m = model(&[(
            "P.mod",
            "MODULE P; FROM A IMPORT x; FROM A IMPORT y; IMPORT B, A;
MODULE L; IMPORT x; FROM C IMPORT z; END L; END P.",
        )]);
        let names: Vec<_> = m.graph.edges.iter().map(|e| e.module.as_str()).collect();
        assert_eq!(names, ["A", "B", "C"]);
    }

    #[test]
    fn private_imports() {
        let m = model(&[
            ("Priv.def", "DEFINITION MODULE Priv; <* PRIVATETO = Friend *> END Priv."),
            ("Priv.mod", "IMPLEMENTATION MODULE Priv; END Priv."),
            ("Friend.def", "DEFINITION MODULE Friend; IMPORT Priv; END Friend."),
            ("Friend.mod", "IMPLEMENTATION MODULE Friend; IMPORT Priv; END Friend."),
            ("Stranger.mod", "MODULE Stranger; IMPORT Priv; END Stranger."),
        ]);
        let d: Vec<_> = m.check(&RuleConfig::default()).into_iter().filter(|d| d.rule == RuleId::S04).collect();
        let files: Vec<_> = d.iter().map(|d| d.file.to_str().unwrap()).collect();
        assert_eq!(files, ["Friend.def", "Stranger.mod"]);
        assert_eq!(d[0].severity, Severity::Warning);
        let strict = RuleConfig {
            private_imports_as_errors: true,
            ..RuleConfig::default()
        };
        let d: Vec<_> = m.check(&strict).into_iter().filter(|d| d.rule == RuleId::S04).collect();
        assert_eq!(d[0].severity, Severity::Error);
    }

    #[test]
    fn external_modules_are_not_resolved() {
        let files = vec![
            (PathBuf::from("A.def"), SourceText::utf8("DEFINITION MODULE A; TYPE S = BITSET; END A.")),
            (PathBuf::from("B.mod"), SourceText::utf8("MODULE B; FROM A IMPORT S; VAR s: S; BEGIN s := s - s END B.")),
        ];
        let options = ProjectOptions {
            external_modules: ["A".to_string()].into_iter().collect(),
            ..ProjectOptions::default()
        };
        let m = ProjectModel::from_sources(files, options);
        let d = m.check(&RuleConfig::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Info, "set type unknown without A");
    }
}
