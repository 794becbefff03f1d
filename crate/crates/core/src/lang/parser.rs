//! Recursive-descent parser. `and` binds tighter than `or`; both are
//! left-associative. `==`/`!=` are desugared on the spot.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub fn parse(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let prog = p.program()?;
    p.expect(&Tok::Eof)?;
    Ok(prog)
}

/// Parse a standalone predicate (used by target specs and tests).
pub fn parse_pred(src: &str) -> Result<Pred, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let pred = p.pred()?;
    p.expect(&Tok::Eof)?;
    Ok(pred)
}

/// Parse a standalone expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect(&Tok::Eof)?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::new(
            self.span(),
            expected.iter().map(|s| format!("`{s}`")).collect(),
            self.peek().describe(),
        )
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<Span, ParseError> {
        if self.peek() == t {
            Ok(self.advance().span)
        } else {
            Err(self.error(&[t.text()]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.advance().span;
                Ok((s, span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let span = self.expect(&Tok::Int)?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                self.expect(&Tok::Int)?;
                let is_pointer = self.eat(&Tok::Star);
                let (pname, _) = self.ident()?;
                params.push(Param { name: pname, is_pointer });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::LBrace)?;
        let mut body = Vec::new();
        let mut ret = None;
        loop {
            match self.peek() {
                Tok::RBrace => break,
                Tok::Return => {
                    self.advance();
                    ret = Some(self.expr()?);
                    self.expect(&Tok::Semi)?;
                    if self.peek() != &Tok::RBrace {
                        return Err(self.error(&["}"]));
                    }
                    break;
                }
                _ => body.push(self.stmt()?),
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(Program { name, params, body, ret, span })
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        self.expect(&Tok::LBrace)?;
        let mut out = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return Err(self.error(&["}"]));
            }
            out.push(self.stmt()?);
        }
        self.advance();
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::If => {
                self.advance();
                self.expect(&Tok::LParen)?;
                let cond = self.pred()?;
                self.expect(&Tok::RParen)?;
                let then_block = self.block()?;
                let else_block = if self.eat(&Tok::Else) { self.block()? } else { Vec::new() };
                Ok(Stmt::new(StmtKind::If { cond, then_block, else_block }, span))
            }
            Tok::While => {
                self.advance();
                self.expect(&Tok::LParen)?;
                let cond = self.pred()?;
                self.expect(&Tok::RParen)?;
                let body = self.block()?;
                Ok(Stmt::new(StmtKind::While { cond, body }, span))
            }
            Tok::Star => {
                self.advance();
                let (ptr, _) = self.ident()?;
                self.expect(&Tok::Assign)?;
                let expr = self.expr()?;
                self.expect(&Tok::Semi)?;
                Ok(Stmt::new(StmtKind::DerefWrite { ptr, expr }, span))
            }
            Tok::Int => {
                self.advance();
                let (var, _) = self.ident()?;
                self.assignment_rhs(var, true, span)
            }
            Tok::Ident(var) => {
                self.advance();
                self.assignment_rhs(var, false, span)
            }
            _ => Err(self.error(&["identifier", "*", "int", "if", "while", "return", "}"])),
        }
    }

    fn assignment_rhs(&mut self, var: String, decl: bool, span: Span) -> Result<Stmt, ParseError> {
        self.expect(&Tok::Assign)?;
        let kind = match self.peek().clone() {
            Tok::Amp if !decl => {
                self.advance();
                let (target, _) = self.ident()?;
                StmtKind::AddrOf { var, target }
            }
            Tok::Star => {
                self.advance();
                let (ptr, _) = self.ident()?;
                StmtKind::DerefRead { var, ptr, decl }
            }
            _ => StmtKind::Assign { var, expr: self.expr()?, decl },
        };
        self.expect(&Tok::Semi)?;
        Ok(Stmt::new(kind, span))
    }

    pub(crate) fn pred(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.pred_and()?;
        while self.peek() == &Tok::Or {
            let span = self.advance().span;
            let rhs = self.pred_and()?;
            lhs = Pred::new(PredKind::Or(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn pred_and(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.pred_unary()?;
        while self.peek() == &Tok::And {
            let span = self.advance().span;
            let rhs = self.pred_unary()?;
            lhs = Pred::new(PredKind::And(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn pred_unary(&mut self) -> Result<Pred, ParseError> {
        let span = self.span();
        match self.peek() {
            Tok::Bang => {
                self.advance();
                let inner = self.pred_unary()?;
                Ok(Pred::new(PredKind::Not(Box::new(inner)), span))
            }
            Tok::True => {
                self.advance();
                Ok(Pred::new(PredKind::True, span))
            }
            Tok::False => {
                self.advance();
                Ok(Pred::new(PredKind::False, span))
            }
            Tok::LParen => {
                // Either a parenthesized predicate or a relation whose left
                // operand starts with a parenthesized expression.
                let save = self.pos;
                self.advance();
                if let Ok(p) = self.pred() {
                    if self.peek() == &Tok::RParen {
                        self.advance();
                        if !self.at_expr_continuation() {
                            return Ok(p);
                        }
                    }
                }
                self.pos = save;
                self.relation()
            }
            _ => self.relation(),
        }
    }

    fn at_expr_continuation(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Plus
                | Tok::Minus
                | Tok::Star
                | Tok::Slash
                | Tok::Lt
                | Tok::Le
                | Tok::Gt
                | Tok::Ge
                | Tok::EqEq
                | Tok::Ne
        )
    }

    fn relation(&mut self) -> Result<Pred, ParseError> {
        let lhs = self.expr()?;
        let span = self.span();
        let tok = self.peek().clone();
        let op = match tok {
            Tok::Lt => Some(RelOp::Lt),
            Tok::Le => Some(RelOp::Le),
            Tok::Gt => Some(RelOp::Gt),
            Tok::Ge => Some(RelOp::Ge),
            Tok::EqEq | Tok::Ne => None,
            _ => return Err(self.error(&["<", "<=", ">", ">=", "==", "!="])),
        };
        self.advance();
        let rhs = self.expr()?;
        Ok(match op {
            Some(op) => Pred::rel(op, lhs, rhs, span),
            None => {
                let eq = Pred::new(
                    PredKind::And(
                        Box::new(Pred::rel(RelOp::Le, lhs.clone(), rhs.clone(), span)),
                        Box::new(Pred::rel(RelOp::Ge, lhs, rhs, span)),
                    ),
                    span,
                );
                if tok == Tok::Ne {
                    Pred::new(PredKind::Not(Box::new(eq)), span)
                } else {
                    eq
                }
            }
        })
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let span = self.advance().span;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs, span);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            let span = self.advance().span;
            let rhs = self.atom()?;
            lhs = Expr::bin(op, lhs, rhs, span);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(Expr::var(name, span))
            }
            Tok::Num(n) => {
                self.advance();
                Ok(Expr::num(n, span))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error(&["identifier", "number", "("])),
        }
    }
}
