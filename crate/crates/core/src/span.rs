use std::fmt;

/// A region of source text: byte offsets plus 1-based line/column bounds.
///
/// Columns count bytes from the start of the line. `end_line`/`end_col`
/// name the position just past the last byte, so an empty span has equal
/// start and end positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Smallest span containing both `self` and `other`.
    pub fn cover(self, other: SourceSpan) -> SourceSpan {
        let (start, start_line, start_col) = if other.start < self.start {
            (other.start, other.start_line, other.start_col)
        } else {
            (self.start, self.start_line, self.start_col)
        };
        let (end, end_line, end_col) = if other.end > self.end {
            (other.end, other.end_line, other.end_col)
        } else {
            (self.end, self.end_line, self.end_col)
        };
        SourceSpan {
            start,
            end,
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &SourceSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Zero-width span at the start of `self`.
    pub fn head(self) -> SourceSpan {
        SourceSpan {
            end: self.start,
            end_line: self.start_line,
            end_col: self.start_col,
            ..self
        }
    }

    /// Re-base a span computed over a substring that began at `origin`
    /// in the enclosing text.
    pub fn offset_by(self, origin: &SourceSpan) -> SourceSpan {
        let shift = |line: u32, col: u32| {
            if line == 1 {
                (origin.start_line, origin.start_col + col - 1)
            } else {
                (origin.start_line + line - 1, col)
            }
        };
        let (start_line, start_col) = shift(self.start_line, self.start_col);
        let (end_line, end_col) = shift(self.end_line, self.end_col);
        SourceSpan {
            start: self.start + origin.start,
            end: self.end + origin.start,
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start_line, self.start_col)
    }
}

/// Line-start table for turning byte offsets back into line/column pairs.
#[derive(Debug, Clone)]
pub struct LineIndex {
    line_starts: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(
            text.bytes()
                .enumerate()
                .filter(|&(_, b)| b == b'\n')
                .map(|(i, _)| i + 1),
        );
        LineIndex {
            line_starts,
            len: text.len(),
        }
    }

    pub fn position(&self, offset: usize) -> (u32, u32) {
        let offset = offset.min(self.len);
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        ((line + 1) as u32, (offset - self.line_starts[line] + 1) as u32)
    }

    pub fn span(&self, start: usize, end: usize) -> SourceSpan {
        let (start_line, start_col) = self.position(start);
        let (end_line, end_col) = self.position(end);
        SourceSpan {
            start,
            end,
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }
}
