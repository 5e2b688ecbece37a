use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// 1-based line and column, columns counted in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub const START: Pos = Pos { line: 1, column: 1 };
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: u32,
    pub column: u32,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: Pos, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, line: pos.line, column: pos.column, code, message: message.into() }
    }

    pub fn warning(pos: Pos, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, line: pos.line, column: pos.column, code, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    /// `line:col: severity[code]: message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}[{}]: {}", self.line, self.column, self.severity, self.code, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Diagnostic codes. Stable; tests and corpus annotations refer to them.
pub mod codes {
    pub const NO_ROLES: &str = "E001";
    pub const BAD_CHAR: &str = "E002";
    pub const UNEXPECTED: &str = "E003";
    pub const UNKNOWN_KEYWORD: &str = "E004";
    pub const UNEXPECTED_EOF: &str = "E005";
    pub const INT_RANGE: &str = "E006";
    pub const BAD_DURATION: &str = "E007";
    pub const BAD_BYTE: &str = "E008";
    pub const LED_RANGE: &str = "E009";
    pub const PAYLOAD_TOO_LONG: &str = "E010";
    pub const DUPLICATE_ATOM: &str = "E011";
    pub const DUPLICATE_ROLE: &str = "E012";
    pub const EMPTY_BLOCK: &str = "E013";
    pub const REPEAT_ZERO: &str = "E014";
    pub const DEPTH: &str = "E015";
    pub const RESERVED_NAME: &str = "E016";
    pub const UNKNOWN_MOTION: &str = "E017";
    pub const UNDEFINED_ROLE: &str = "E020";
    pub const UNCAST_ROLE: &str = "W001";
    pub const UNREACHABLE: &str = "W002";
}
