use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::diagnostic::{Diagnostic, RuleId};
use crate::span::SourceSpan;

use super::{ProjectModel, ProjectOptions};

/// File contents and how they were encoded on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceText {
    pub text: String,
    /// Read as Latin-1 because the bytes were not valid UTF-8.
    pub latin1: bool,
}

impl SourceText {
    pub fn utf8(text: impl Into<String>) -> Self {
        SourceText {
            text: text.into(),
            latin1: false,
        }
    }

    /// The same encoding with new contents.
    pub fn with_text(&self, text: String) -> Self {
        SourceText {
            text,
            latin1: self.latin1,
        }
    }
}

pub fn decode_source(bytes: Vec<u8>) -> SourceText {
    match String::from_utf8(bytes) {
        Ok(text) => SourceText::utf8(text),
        Err(e) => SourceText {
            text: e.into_bytes().iter().map(|&b| b as char).collect(),
            latin1: true,
        },
    }
}

/// Bytes to write back; Latin-1 input stays Latin-1 where it can.
pub fn encode_source(text: &SourceText) -> Vec<u8> {
    if text.latin1 && text.text.chars().all(|c| (c as u32) < 256) {
        text.text.chars().map(|c| c as u8).collect()
    } else {
        text.text.as_bytes().to_vec()
    }
}

fn io_error(path: &Path, message: String) -> Diagnostic {
    let start = SourceSpan {
        start_line: 1,
        start_col: 1,
        end_line: 1,
        end_col: 1,
        ..SourceSpan::default()
    };
    Diagnostic::error(RuleId::IoError, start, message).with_file(path)
}

/// Source files under `roots`, sorted by path. Directories are searched
/// for the given extensions; files named directly are always taken.
pub fn read_sources(roots: &[PathBuf], extensions: &[String]) -> (Vec<(PathBuf, SourceText)>, Vec<Diagnostic>) {
    let mut paths = Vec::new();
    let mut diags = Vec::new();
    for root in roots {
        if root.is_file() {
            paths.push(root.clone());
            continue;
        }
        if !root.exists() {
            diags.push(io_error(root, format!("{}: no such file or directory", root.display())));
            continue;
        }
        for entry in WalkDir::new(root).sort_by_file_name() {
            match entry {
                Ok(e) if e.file_type().is_file() => {
                    let ext = e.path().extension().and_then(|x| x.to_str()).unwrap_or("");
                    if extensions.iter().any(|x| x == ext) {
                        paths.push(e.into_path());
                    }
                }
                Ok(_) => {}
                Err(err) => {
                    let p = err.path().unwrap_or(root).to_path_buf();
                    diags.push(io_error(&p, format!("{}: {err}", p.display())));
                }
            }
        }
    }
    paths.sort();
    paths.dedup();
    let read: Vec<_> = paths
        .into_par_iter()
        .map(|p| match std::fs::read(&p) {
            Ok(bytes) => Ok((p, decode_source(bytes))),
            Err(e) => Err(io_error(&p, format!("{}: {e}", p.display()))),
        })
        .collect();
    let mut files = Vec::new();
    for r in read {
        match r {
            Ok(f) => files.push(f),
            Err(d) => diags.push(d),
        }
    }
    (files, diags)
}

/// Read and analyze every source file under `roots`.
pub fn load_project(roots: &[PathBuf], options: ProjectOptions) -> ProjectModel {
    let (files, io) = read_sources(roots, &options.extensions);
    let mut model = ProjectModel::from_sources(files, options);
    model.diagnostics.extend(io);
    crate::diagnostic::sort_diagnostics(&mut model.diagnostics);
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latin1_round_trip() {
        let bytes = b"(* caf\xe9 *) MODULE M; END M.".to_vec();
        let t = decode_source(bytes.clone());
        assert!(t.latin1);
        assert!(t.text.contains('\u{e9}'));
        assert_eq!(encode_source(&t), bytes);
        let u = decode_source("é".as_bytes().to_vec());
        assert!(!u.latin1);
    }

    #[test]
    fn reads_sorted_sources_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("sub/B.mod"), "MODULE B; END B.").unwrap();
        std::fs::write(dir.path().join("A.def"), "DEFINITION MODULE A; END A.").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let (files, diags) = read_sources(&[dir.path().to_path_buf()], &["def".into(), "mod".into()]);
        assert!(diags.is_empty());
        let names: Vec<_> = files.iter().map(|f| f.0.strip_prefix(dir.path()).unwrap().to_path_buf()).collect();
        assert_eq!(names, [PathBuf::from("A.def"), PathBuf::from("sub/B.mod")]);
    }

    #[test]
    fn missing_root_is_reported() {
        let (files, diags) = read_sources(&[PathBuf::from("/nonexistent/m2r")], &["mod".into()]);
        assert!(files.is_empty());
        assert_eq!(diags[0].rule, RuleId::IoError);
    }
}
