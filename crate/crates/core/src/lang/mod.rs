//! SnipLang: the small imperative language candidate snippets are written in.
//!
//! ```text
//! program := "fn" IDENT "(" [param ("," param)*] ")" "->" type block
//! param   := IDENT ":" type
//! type    := "int" | "bool" | "[int]"
//! block   := "{" stmt* "}"
//! stmt    := "let" IDENT "=" expr ";" | IDENT "=" expr ";"
//!          | IDENT "[" expr "]" "=" expr ";"
//!          | "if" expr block ["else" block]
//!          | "while" expr block
//!          | "for" IDENT "in" expr ".." expr block
//!          | "return" expr ";"
//! ```
//!
//! Expressions use, from loosest to tightest: `||`, `&&`, comparisons,
//! `+ -`, `* / %`, unary `- !`. Division truncates toward zero and `%`
//! takes the sign of the dividend. `&&` and `||` short-circuit.

mod ast;
mod lexer;
mod parser;
mod pretty;
mod validate;

use std::fmt;

pub use ast::*;
pub use parser::parse_program;
pub use pretty::{expr as pretty_expr, pretty_print};
pub use validate::{always_returns, validate};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SourceSnippet {
    pub id: String,
    pub text: String,
}

impl SourceSnippet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        SourceSnippet {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationVerdict {
    Valid(Program),
    Invalid(String),
}

impl ValidationVerdict {
    pub fn program(&self) -> Option<&Program> {
        match self {
            ValidationVerdict::Valid(p) => Some(p),
            ValidationVerdict::Invalid(_) => None,
        }
    }
}

/// Parses and validates snippet text. Never fails: problems are reported
/// as [`ValidationVerdict::Invalid`] with a `line:col` prefixed reason.
pub fn parse(snippet: &SourceSnippet) -> ValidationVerdict {
    parse_source(&snippet.text)
}

pub fn parse_source(text: &str) -> ValidationVerdict {
    match parse_program(text).and_then(|p| validate(&p).map(|()| p)) {
        Ok(p) => ValidationVerdict::Valid(p),
        Err(e) => ValidationVerdict::Invalid(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invalid_reason(src: &str) -> String {
        match parse_source(src) {
            ValidationVerdict::Invalid(r) => r,
            ValidationVerdict::Valid(p) => panic!("expected invalid, got {p:?}"),
        }
    }

    #[test]
    fn identity_program_is_valid() {
        let v = parse_source("fn f(x: int) -> int { return x; }");
        let p = v.program().expect("valid");
        assert_eq!(p.name, "f");
        assert_eq!(p.params.len(), 1);
        assert_eq!(p.return_type, SnipType::Int);
    }

    #[test]
    fn undeclared_identifier() {
        let r = invalid_reason("fn f(x: int) -> int { return y; }");
        assert!(r.contains("undeclared identifier `y`"), "{r}");
        assert!(r.starts_with("1:30"), "{r}");
    }

    #[test]
    fn missing_return_on_some_path() {
        let r = invalid_reason("fn f(x: int) -> int { if x > 0 { return 1; } }");
        assert!(r.contains("missing return on some path"), "{r}");
    }

    #[test]
    fn loop_then_return_is_accepted() {
        assert!(parse_source("fn f(x: int) -> int { while true {} return 0; }").program().is_some());
    }

    #[test]
    fn shadowing_rejected_but_sibling_scopes_fine() {
        let r = invalid_reason("fn f(x: int) -> int { if true { let x = 1; } return x; }");
        assert!(r.contains("already declared"), "{r}");
        let ok = "fn f(x: int) -> int { if x > 0 { let y = 1; } else { let y = 2; } return x; }";
        assert!(parse_source(ok).program().is_some());
    }

    #[test]
    fn type_errors() {
        assert!(invalid_reason("fn f(x: int) -> bool { return x; }").contains("returned value must be bool"));
        assert!(invalid_reason("fn f(x: bool) -> int { return x + 1; }").contains("left operand of `+`"));
        assert!(invalid_reason("fn f(x: int) -> int { return x[0]; }").contains("cannot be indexed"));
        assert!(invalid_reason("fn f(a: [int]) -> int { for i in 0..len(a) { i = 2; } return 0; }")
            .contains("loop variable"));
    }

    #[test]
    fn pretty_print_round_trips_nested_control_flow() {
        let src = "fn g(a: [int], k: int) -> int { let s = 0; for i in 0..len(a) { if a[i] % 2 == 0 && !(k < 0) { s = s + a[i] * (k - 1); } else { if a[i] > 3 { s = s - -a[i]; } } } while s > 10 { s = s / 2; } return s - (1 - 2); }";
        let p = parse_source(src).program().cloned().unwrap();
        let text = pretty_print(&p);
        let q = parse_source(&text).program().cloned().unwrap();
        assert_eq!(p, q);
        assert_eq!(pretty_print(&q), text);
    }

    #[test]
    fn pretty_print_identity() {
        let p = parse_source("fn   f( x :int )->int{return x;}").program().cloned().unwrap();
        assert_eq!(pretty_print(&p), "fn f(x: int) -> int {\n    return x;\n}\n");
    }
}
