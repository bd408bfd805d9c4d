//! Source positions for diagnostics.

/// 1-based line/column position. `Span::default()` (0:0) means "unknown".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Span {
        Span { line, col }
    }

    pub fn is_known(&self) -> bool {
        self.line != 0
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Spans for a parsed program.
///
/// Expression spans are stored in pre-order; a consumer walking the same
/// tree pre-order (children left to right) sees the matching span at each
/// node. Indices follow declaration order, which `bind_class_table`
/// preserves.
#[derive(Debug, Clone, Default)]
pub struct SpanMap {
    /// One span per class declaration.
    pub classes: Vec<Span>,
    /// Per class, one span per method header.
    pub methods: Vec<Vec<Span>>,
    /// Per class, per method, pre-order spans of the body expression.
    pub bodies: Vec<Vec<Vec<Span>>>,
    /// Pre-order spans of the main expression.
    pub main: Vec<Span>,
}

impl SpanMap {
    pub fn class_span(&self, class_idx: usize) -> Span {
        self.classes.get(class_idx).copied().unwrap_or_default()
    }

    pub fn method_span(&self, class_idx: usize, method_idx: usize) -> Span {
        self.methods
            .get(class_idx)
            .and_then(|m| m.get(method_idx))
            .copied()
            .unwrap_or_default()
    }

    pub fn body_spans(&self, class_idx: usize, method_idx: usize) -> &[Span] {
        self.bodies
            .get(class_idx)
            .and_then(|m| m.get(method_idx))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}
