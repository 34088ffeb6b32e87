//! Recursive-descent parser for terms, scalars, bases and types.

use crate::basis::{phi_minus, phi_plus, psi_minus, psi_plus, Basis, OrthoBasis};
use crate::scalar::Scalar;
use crate::term::{canonicalize, name, Expr, TermDist};
use crate::types::Type;

use super::lexer::{tokenize, Span, Tok, Token};
use super::{Env, ParseError};

type PResult<T> = Result<T, ParseError>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    env: Env,
    /// Binder names in scope, innermost last.
    scope: Vec<String>,
}

impl Parser {
    pub(crate) fn new(src: &str, env: &Env) -> PResult<Parser> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            env: env.clone(),
            scope: Vec::new(),
        })
    }

    pub(crate) fn env_mut(&mut self) -> &mut Env {
        &mut self.env
    }

    pub(crate) fn into_env(self) -> Env {
        self.env
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    /// Span of the most recently consumed token.
    pub(crate) fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn error_at(&self, span: Span, message: impl Into<String>) -> ParseError {
        ParseError {
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    pub(crate) fn unexpected(&self, what: &str) -> ParseError {
        self.error_at(self.span(), format!("expected {what}, found {}", self.peek()))
    }

    pub(crate) fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    pub(crate) fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn expect_eof(&self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    // Scalars.

    fn scalar_sum(&mut self) -> PResult<Scalar> {
        let mut acc = self.scalar_product()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc += self.scalar_product()?;
            } else if self.eat(&Tok::Minus) {
                acc = acc - self.scalar_product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn scalar_product(&mut self) -> PResult<Scalar> {
        let mut acc = self.scalar_unary()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = acc * self.scalar_unary()?;
            } else if self.eat(&Tok::Slash) {
                let span = self.span();
                let d = self.scalar_unary()?;
                if d.is_zero() {
                    return Err(self.error_at(span, "division by zero"));
                }
                acc = acc / d;
            } else {
                return Ok(acc);
            }
        }
    }

    fn scalar_unary(&mut self) -> PResult<Scalar> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.scalar_unary()?);
        }
        self.scalar_atom()
    }

    fn scalar_atom(&mut self) -> PResult<Scalar> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(x) => {
                self.bump();
                Ok(Scalar::real(x))
            }
            Tok::Ident(s) if s == "i" => {
                self.bump();
                Ok(Scalar::I)
            }
            Tok::Ident(s) if s == "sqrt2" => {
                self.bump();
                Ok(Scalar::real(std::f64::consts::SQRT_2))
            }
            Tok::Ident(s) if s == "pi" => {
                self.bump();
                Ok(Scalar::real(std::f64::consts::PI))
            }
            Tok::Ident(s) if s == "e" && *self.peek_at(1) == Tok::Caret => {
                self.bump();
                self.bump();
                let z = self.scalar_atom()?;
                let v = z.complex().exp();
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(self.error_at(span, "exponent overflows"));
                }
                Ok(Scalar::new(v.re, v.im))
            }
            Tok::LParen => {
                self.bump();
                let s = self.scalar_sum()?;
                self.expect(&Tok::RParen)?;
                Ok(s)
            }
            _ => Err(self.unexpected("scalar")),
        }
    }

    /// Coefficient prefix `scalar *` of a summand, restoring the position
    /// when the tokens do not form one.
    fn coefficient(&mut self) -> Option<Scalar> {
        let start = self.pos;
        let Ok(mut c) = self.scalar_unary() else {
            self.pos = start;
            return None;
        };
        loop {
            let before = self.pos;
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    match self.scalar_unary() {
                        Ok(f) => c = c * f,
                        Err(_) => {
                            self.pos = before;
                            break;
                        }
                    }
                }
                Tok::Slash => {
                    self.bump();
                    match self.scalar_unary() {
                        Ok(f) if !f.is_zero() => c = c / f,
                        _ => {
                            self.pos = start;
                            return None;
                        }
                    }
                }
                _ => break,
            }
        }
        if self.eat(&Tok::Star) {
            Some(c)
        } else {
            self.pos = start;
            None
        }
    }

    // Terms.

    pub(crate) fn term(&mut self) -> PResult<Expr> {
        let mut parts = vec![self.summand()?];
        loop {
            if self.eat(&Tok::Plus) {
                parts.push(self.summand()?);
            } else if self.eat(&Tok::Minus) {
                let s = self.summand()?;
                parts.push(Expr::Scale(-Scalar::ONE, Box::new(s)));
            } else {
                break;
            }
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Sum(parts)
        })
    }

    fn summand(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            let s = self.summand()?;
            return Ok(Expr::Scale(-Scalar::ONE, Box::new(s)));
        }
        if let Some(c) = self.coefficient() {
            let s = self.summand()?;
            return Ok(Expr::Scale(c, Box::new(s)));
        }
        self.app()
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ket(_) | Tok::KetPlus | Tok::KetMinus | Tok::Bell(_) | Tok::Ident(_) | Tok::LParen
        )
    }

    fn starts_binder(&self) -> bool {
        matches!(self.peek(), Tok::Backslash | Tok::Let | Tok::Case)
    }

    fn app(&mut self) -> PResult<Expr> {
        if self.starts_binder() {
            return self.binder();
        }
        let mut acc = self.atom()?;
        loop {
            if self.starts_atom() {
                let a = self.atom()?;
                acc = Expr::App(Box::new(acc), Box::new(a));
            } else if self.starts_binder() {
                let a = self.binder()?;
                return Ok(Expr::App(Box::new(acc), Box::new(a)));
            } else {
                return Ok(acc);
            }
        }
    }

    fn binder(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Backslash => self.lambda(),
            Tok::Let => self.let_pair(),
            Tok::Case => self.case(),
            _ => Err(self.unexpected("binder")),
        }
    }

    fn lambda(&mut self) -> PResult<Expr> {
        self.expect(&Tok::Backslash)?;
        let x = self.ident()?;
        self.expect(&Tok::Colon)?;
        let b = self.basis()?;
        self.expect(&Tok::Dot)?;
        self.scope.push(x.clone());
        let body = self.term();
        self.scope.pop();
        Ok(Expr::Lam(name(&x), b, Box::new(body?)))
    }

    fn let_pair(&mut self) -> PResult<Expr> {
        self.expect(&Tok::Let)?;
        self.expect(&Tok::LParen)?;
        let x_span = self.span();
        let x = self.ident()?;
        self.expect(&Tok::Colon)?;
        let bx = self.basis()?;
        self.expect(&Tok::Comma)?;
        let y = self.ident()?;
        if x == y {
            return Err(self.error_at(x_span, format!("duplicate binder `{x}`")));
        }
        self.expect(&Tok::Colon)?;
        let by = self.basis()?;
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::Eq)?;
        let scrutinee = self.term()?;
        self.expect(&Tok::In)?;
        self.scope.push(x.clone());
        self.scope.push(y.clone());
        let body = self.term();
        self.scope.truncate(self.scope.len() - 2);
        Ok(Expr::Let {
            vars: (name(&x), name(&y)),
            bases: (bx, by),
            scrutinee: Box::new(scrutinee),
            body: Box::new(body?),
        })
    }

    fn case(&mut self) -> PResult<Expr> {
        let case_span = self.span();
        self.expect(&Tok::Case)?;
        let scrutinee = self.term()?;
        self.expect(&Tok::Of)?;
        self.expect(&Tok::LBrace)?;
        let mut patterns = Vec::new();
        let mut branches = Vec::new();
        loop {
            patterns.push(self.closed_value()?);
            self.expect(&Tok::Arrow)?;
            branches.push(self.term()?);
            if !self.eat(&Tok::Bar) {
                break;
            }
        }
        self.expect(&Tok::RBrace)?;
        let patterns =
            OrthoBasis::new(patterns).map_err(|e| self.error_at(case_span, format!("invalid case patterns: {e}")))?;
        Ok(Expr::Case {
            scrutinee: Box::new(scrutinee),
            patterns,
            branches,
        })
    }

    /// A closed value distribution, as used in patterns and inline bases.
    fn closed_value(&mut self) -> PResult<TermDist> {
        let span = self.span();
        let saved = std::mem::take(&mut self.scope);
        let e = self.term();
        self.scope = saved;
        let v = canonicalize(&e?);
        if !v.is_value() || !v.is_closed() {
            return Err(self.error_at(span, "expected a closed value"));
        }
        Ok(v)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ket(bits) => {
                self.bump();
                Ok(Expr::Dist(TermDist::ket(&bits)))
            }
            Tok::KetPlus => {
                self.bump();
                Ok(Expr::Dist(TermDist::plus()))
            }
            Tok::KetMinus => {
                self.bump();
                Ok(Expr::Dist(TermDist::minus()))
            }
            Tok::Bell(k) => {
                self.bump();
                let v = [phi_plus, phi_minus, psi_plus, psi_minus][k]();
                Ok(Expr::Dist(v))
            }
            Tok::Number(0.0) => {
                self.bump();
                Ok(Expr::Zero)
            }
            Tok::Ident(s) => {
                self.bump();
                if self.scope.contains(&s) {
                    Ok(Expr::Var(name(&s)))
                } else if let Some(d) = self.env.defs.get(&s) {
                    Ok(Expr::Dist(d.clone()))
                } else {
                    Ok(Expr::Var(name(&s)))
                }
            }
            Tok::LParen => {
                self.bump();
                let mut items = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.term()?);
                }
                self.expect(&Tok::RParen)?;
                let mut acc = items.pop().unwrap();
                while let Some(l) = items.pop() {
                    acc = Expr::Pair(Box::new(l), Box::new(acc));
                }
                Ok(acc)
            }
            _ => Err(self.error_at(span, format!("expected term, found {}", self.peek()))),
        }
    }

    // Bases and types.

    pub(crate) fn basis(&mut self) -> PResult<Basis> {
        if self.eat(&Tok::AbsBasis) {
            return Ok(Basis::Abs);
        }
        self.ortho_basis().map(Basis::Ortho)
    }

    pub(crate) fn ortho_basis(&mut self) -> PResult<OrthoBasis> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                self.env
                    .bases
                    .get(&s)
                    .cloned()
                    .ok_or_else(|| self.error_at(span, format!("unknown basis `{s}`")))
            }
            Tok::LBrace => {
                self.bump();
                let mut elements = vec![self.closed_value()?];
                while self.eat(&Tok::Comma) {
                    elements.push(self.closed_value()?);
                }
                self.expect(&Tok::RBrace)?;
                OrthoBasis::new(elements).map_err(|e| self.error_at(span, format!("invalid basis: {e}")))
            }
            Tok::AbsBasis => Err(self.error_at(span, "`@fun` is not an orthonormal basis")),
            _ => Err(self.unexpected("basis")),
        }
    }

    pub(crate) fn ty(&mut self) -> PResult<Type> {
        let lhs = self.ty_product()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.ty()?;
            return Ok(Type::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_product(&mut self) -> PResult<Type> {
        let lhs = self.ty_unary()?;
        if self.eat(&Tok::Star) {
            let rhs = self.ty_product()?;
            return Ok(Type::product(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_unary(&mut self) -> PResult<Type> {
        match self.peek() {
            Tok::Hash => {
                self.bump();
                Ok(Type::sharp(self.ty_unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let b = self.ortho_basis()?;
                self.expect(&Tok::RBracket)?;
                Ok(Type::basis(b))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.unexpected("type")),
        }
    }
}

pub fn parse_term(src: &str) -> PResult<TermDist> {
    parse_term_in(src, &Env::default())
}

pub fn parse_term_in(src: &str, env: &Env) -> PResult<TermDist> {
    let mut p = Parser::new(src, env)?;
    let e = p.term()?;
    p.expect_eof()?;
    Ok(canonicalize(&e))
}

pub fn parse_type(src: &str) -> PResult<Type> {
    parse_type_in(src, &Env::default())
}

pub fn parse_type_in(src: &str, env: &Env) -> PResult<Type> {
    let mut p = Parser::new(src, env)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_basis(src: &str, env: &Env) -> PResult<Basis> {
    let mut p = Parser::new(src, env)?;
    let b = p.basis()?;
    p.expect_eof()?;
    Ok(b)
}

pub fn parse_scalar(src: &str) -> PResult<Scalar> {
    let env = Env::default();
    let mut p = Parser::new(src, &env)?;
    let s = p.scalar_sum()?;
    p.expect_eof()?;
    Ok(s)
}
