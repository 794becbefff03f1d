//! Front end for the WHILE language: lexing, parsing, printing, validation
//! and loop unrolling.

mod ast;
mod lexer;
mod parser;
mod printer;
mod unroll;
mod validate;

pub use ast::*;
pub use parser::{parse, parse_expr, parse_pred};
pub use printer::{expr_str, pred_str, pred_str_with, print, print_with, PrintOptions};
pub use unroll::unroll;
pub use validate::{validate, Backend, Violation, ViolationKind};

use std::fmt;

/// Syntax error with the position of the offending token and the set of
/// tokens that would have been accepted there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub fn new(span: Span, expected: Vec<String>, found: impl Into<String>) -> Self {
        ParseError { span, expected, found: found.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}: expected ", self.span)?;
        match self.expected.as_slice() {
            [] => write!(f, "nothing")?,
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

impl std::error::Error for ParseError {}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "int f(int x, int y) { if (x >= 5) { z := x + 1; } else { z := y + 1; } return z; }";

    #[test]
    fn parses_branch_with_relation() {
        let p = parse(FIG1).unwrap();
        let StmtKind::If { cond, then_block, else_block } = &p.body[0].kind else {
            panic!("expected if")
        };
        let PredKind::Rel(RelOp::Ge, lhs, rhs) = &cond.kind else { panic!("expected >=") };
        assert_eq!(lhs.kind, ExprKind::Var("x".into()));
        assert_eq!(rhs.kind, ExprKind::Num(5));
        assert_eq!(then_block.len(), 1);
        assert_eq!(else_block.len(), 1);
    }

    #[test]
    fn parses_copy_and_loop() {
        let p = parse("int f(int x) { z := x; while (x < 3) { x := x + 1; } return z; }").unwrap();
        assert!(matches!(&p.body[0].kind, StmtKind::Assign { var, expr, .. }
            if var == "z" && expr.kind == ExprKind::Var("x".into())));
        assert!(matches!(p.body[1].kind, StmtKind::While { .. }));
    }

    #[test]
    fn positions_are_recorded() {
        let p = parse("int f(int x) {\n  z := x;\n}").unwrap();
        assert_eq!(p.body[0].span, Span::new(2, 3));
    }

    #[test]
    fn error_reports_position_and_expected() {
        let e = parse("int f(int x) { z := ; }").unwrap_err();
        assert_eq!(e.span, Span::new(1, 21));
        assert!(e.expected.iter().any(|s| s.contains("number")));
        assert!(e.to_string().contains("1:21"));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a + b * c - d").unwrap();
        assert_eq!(expr_str(&e), "a + b * c - d");
        let e = parse_expr("a - (b - c)").unwrap();
        assert_eq!(expr_str(&e), "a - (b - c)");
        let p = parse_pred("a < 1 or b < 2 and c < 3").unwrap();
        assert!(matches!(p.kind, PredKind::Or(..)));
    }

    #[test]
    fn parenthesized_expression_on_relation_lhs() {
        let p = parse_pred("(x + 1) * 2 >= y").unwrap();
        assert!(matches!(p.kind, PredKind::Rel(RelOp::Ge, ..)));
        let p = parse_pred("(x >= 1)").unwrap();
        assert!(matches!(p.kind, PredKind::Rel(RelOp::Ge, ..)));
    }

    #[test]
    fn equality_is_desugared_and_resugared() {
        let p = parse_pred("x == 3").unwrap();
        assert!(matches!(p.kind, PredKind::And(..)));
        assert_eq!(pred_str(&p), "x == 3");
        let plain = PrintOptions { resugar_equality: false };
        assert_eq!(pred_str_with(&p, plain), "(x <= 3) and (x >= 3)");
        let n = parse_pred("x != 3").unwrap();
        assert!(matches!(n.kind, PredKind::Not(..)));
        assert_eq!(pred_str(&n), "x != 3");
    }

    #[test]
    fn print_assignment() {
        let p = parse("int f(int x) { z := x + 1; }").unwrap();
        assert!(print(&p).contains("    z := x + 1;\n"));
    }

    #[test]
    fn round_trip_fixed_point() {
        let p = parse(FIG1).unwrap();
        let once = print(&p);
        let again = print(&parse(&once).unwrap());
        assert_eq!(once, again);
        assert!(parse(&once).unwrap().same_structure(&p));
    }

    #[test]
    fn pointer_forms() {
        let p = parse("int f(int x, int* a) { *a := x / 2; int z := *a; b := &z; return z; }").unwrap();
        assert!(p.params[1].is_pointer);
        assert!(p.body.iter().all(Stmt::is_pointer_stmt));
    }

    #[test]
    fn return_must_be_last() {
        assert!(parse("int f(int x) { return x; z := 1; }").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse("int f(int x) { // note\n /* block */ z := x; }").unwrap();
        assert_eq!(p.body.len(), 1);
    }
}
