use std::collections::BTreeMap;

use super::ast::*;
use super::{RuleError, RuleSet};
use crate::extractor::{Column, ColumnType};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(i64),
    Param(String),
    Directive(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Turnstile,
    Bang,
    At,
    Underscore,
    Op(CmpOp),
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    file: &'a str,
}

impl<'a> Lexer<'a> {
    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> RuleError {
        RuleError::Syntax { file: self.file.to_string(), line, column: col, message: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), RuleError> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'/'), Some(b'/')) => {
                    while !matches!(self.peek(), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let (l, c) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.err(l, c, "unterminated block comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn next(&mut self) -> Result<Spanned, RuleError> {
        self.skip_trivia()?;
        let (line, col) = (self.line, self.col);
        let tok = match self.peek() {
            None => Tok::Eof,
            Some(c) if c.is_ascii_alphabetic() => Tok::Ident(self.ident()),
            Some(b'_') => {
                if matches!(self.peek2(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    Tok::Ident(self.ident())
                } else {
                    self.bump();
                    Tok::Underscore
                }
            }
            Some(c) if c.is_ascii_digit() || (c == b'-' && matches!(self.peek2(), Some(d) if d.is_ascii_digit())) => {
                let start = self.pos;
                self.bump();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let (neg, body) = match text.strip_prefix('-') {
                    Some(b) => (true, b),
                    None => (false, text),
                };
                let value = match body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
                    Some(hex) => i64::from_str_radix(hex, 16),
                    None => body.parse::<i64>(),
                }
                .map_err(|_| self.err(line, col, format!("bad number '{text}'")))?;
                Tok::Num(if neg { -value } else { value })
            }
            Some(b'"') => {
                self.bump();
                let mut bytes = Vec::new();
                loop {
                    match self.bump() {
                        None | Some(b'\n') => return Err(self.err(line, col, "unterminated string")),
                        Some(b'"') => break,
                        Some(b'\\') => match self.bump() {
                            Some(b'n') => bytes.push(b'\n'),
                            Some(b't') => bytes.push(b'\t'),
                            Some(b'r') => bytes.push(b'\r'),
                            Some(b'"') => bytes.push(b'"'),
                            Some(b'\\') => bytes.push(b'\\'),
                            _ => return Err(self.err(self.line, self.col, "bad escape in string")),
                        },
                        Some(c) => bytes.push(c),
                    }
                }
                Tok::Str(String::from_utf8(bytes).map_err(|_| self.err(line, col, "invalid UTF-8 in string"))?)
            }
            Some(b'$') => {
                self.bump();
                let name = self.ident();
                if name.is_empty() {
                    return Err(self.err(line, col, "expected parameter name after '$'"));
                }
                Tok::Param(name)
            }
            Some(b'.') if matches!(self.peek2(), Some(c) if c.is_ascii_alphabetic()) => {
                self.bump();
                Tok::Directive(self.ident())
            }
            Some(c) => {
                self.bump();
                match (c, self.peek()) {
                    (b'(', _) => Tok::LParen,
                    (b')', _) => Tok::RParen,
                    (b',', _) => Tok::Comma,
                    (b'.', _) => Tok::Dot,
                    (b'@', _) => Tok::At,
                    (b':', Some(b'-')) => {
                        self.bump();
                        Tok::Turnstile
                    }
                    (b':', _) => Tok::Colon,
                    (b'!', Some(b'=')) => {
                        self.bump();
                        Tok::Op(CmpOp::Ne)
                    }
                    (b'!', _) => Tok::Bang,
                    (b'=', _) => Tok::Op(CmpOp::Eq),
                    (b'<', Some(b'=')) => {
                        self.bump();
                        Tok::Op(CmpOp::Le)
                    }
                    (b'<', _) => Tok::Op(CmpOp::Lt),
                    (b'>', Some(b'=')) => {
                        self.bump();
                        Tok::Op(CmpOp::Ge)
                    }
                    (b'>', _) => Tok::Op(CmpOp::Gt),
                    _ => return Err(self.err(line, col, format!("unexpected character '{}'", c as char))),
                }
            }
        };
        Ok(Spanned { tok, line, col })
    }
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    file: &'a str,
    params: &'a BTreeMap<String, i64>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn err_here(&self, msg: impl Into<String>) -> RuleError {
        let s = &self.toks[self.pos];
        RuleError::Syntax { file: self.file.to_string(), line: s.line, column: s.col, message: msg.into() }
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), RuleError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, RuleError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            other => Err(self.err_here(format!("expected {what}, found {}", describe(&other)))),
        }
    }

    fn decl(&mut self, set: &mut RuleSet) -> Result<(), RuleError> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let name = self.ident("predicate name")?;
        self.expect(Tok::LParen, "'('")?;
        let mut cols = Vec::new();
        loop {
            let cname = self.ident("column name")?;
            self.expect(Tok::Colon, "':'")?;
            let tname = self.ident("column type")?;
            let ty =
                ColumnType::parse(&tname).ok_or_else(|| self.err_here(format!("unknown column type '{tname}'")))?;
            cols.push(Column::new(&cname, ty));
            match self.advance() {
                Tok::Comma => continue,
                Tok::RParen => break,
                other => return Err(self.err_here(format!("expected ',' or ')', found {}", describe(&other)))),
            }
        }
        if let Some(existing) = set.declarations.get(&name) {
            if !same_shape(existing, &cols) {
                return Err(RuleError::ConflictingDeclaration {
                    predicate: name,
                    file: format!("{}:{line}:{col}", self.file),
                });
            }
        }
        set.declarations.insert(name, cols);
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, RuleError> {
        match self.advance() {
            Tok::Str(s) => Ok(Expr::Sym(s)),
            Tok::Num(n) => Ok(Expr::Num(n)),
            Tok::Underscore => Ok(Expr::Wildcard),
            Tok::Param(p) => match self.params.get(&p) {
                Some(v) => Ok(Expr::Num(*v)),
                None => {
                    self.pos -= 1;
                    Err(self.err_here(format!("unknown parameter ${p}")))
                }
            },
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Ok(Expr::Var(name));
                }
                let b = Builtin::from_name(&name).ok_or_else(|| {
                    self.err_here(format!("'{name}' is not a builtin function (cat, band, add, sub)"))
                })?;
                self.advance();
                let args = self.args()?;
                let ok = match b {
                    Builtin::Cat => args.len() >= 2,
                    _ => args.len() == 2,
                };
                if !ok {
                    self.pos -= 1;
                    return Err(self.err_here(format!("wrong number of arguments to {name}")));
                }
                Ok(Expr::Call(b, args))
            }
            other => {
                self.pos -= 1;
                Err(self.err_here(format!("expected a term, found {}", describe(&other))))
            }
        }
    }

    /// Parses `expr, expr, ... )` after an opening parenthesis.
    fn args(&mut self) -> Result<Vec<Expr>, RuleError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.advance();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.advance() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(args),
                other => {
                    self.pos -= 1;
                    return Err(self.err_here(format!("expected ',' or ')', found {}", describe(&other))));
                }
            }
        }
    }

    fn atom(&mut self) -> Result<Atom, RuleError> {
        let predicate = self.ident("predicate name")?;
        if Builtin::from_name(&predicate).is_some() {
            self.pos -= 1;
            return Err(self.err_here(format!("builtin '{predicate}' used as a predicate")));
        }
        self.expect(Tok::LParen, "'('")?;
        let args = self.args()?;
        if args.is_empty() {
            self.pos -= 1;
            return Err(self.err_here("predicates need at least an ID column"));
        }
        Ok(Atom { predicate, args })
    }

    fn literal(&mut self) -> Result<Literal, RuleError> {
        if *self.peek() == Tok::Bang {
            self.advance();
            return Ok(Literal::Neg(self.atom()?));
        }
        if let (Tok::Ident(name), Tok::LParen) = (self.peek(), self.peek_at(1)) {
            if Builtin::from_name(name).is_none() {
                return Ok(Literal::Pos(self.atom()?));
            }
        }
        let lhs = self.expr()?;
        let op = match self.advance() {
            Tok::Op(op) => op,
            other => {
                self.pos -= 1;
                return Err(self.err_here(format!("expected a comparison operator, found {}", describe(&other))));
            }
        };
        let rhs = self.expr()?;
        Ok(Literal::Cmp(lhs, op, rhs))
    }

    fn rule(&mut self, name: Option<String>) -> Result<Rule, RuleError> {
        let start = self.pos;
        let head = self.atom()?;
        let mut body = Vec::new();
        if *self.peek() == Tok::Turnstile {
            self.advance();
            loop {
                body.push(self.literal()?);
                match self.advance() {
                    Tok::Comma => continue,
                    Tok::Dot => break,
                    other => {
                        self.pos -= 1;
                        return Err(self.err_here(format!("expected ',' or '.', found {}", describe(&other))));
                    }
                }
            }
        } else {
            self.expect(Tok::Dot, "':-' or '.'")?;
        }
        let name = match name.or_else(|| name_from_head(&head)) {
            Some(n) => n,
            None => {
                self.pos = start;
                return Err(self.err_here("rule has no @name annotation and its ID expression names no rule"));
            }
        };
        if !is_rule_name(&name) {
            self.pos = start;
            return Err(self.err_here(format!("invalid rule name '{name}'")));
        }
        Ok(Rule { name, head, body })
    }
}

fn same_shape(a: &[Column], b: &[Column]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.ty == y.ty)
}

/// Rule name implied by a head ID of the form `cat("NAME", "[", ...)` or
/// `cat("NAME[", ...)`.
pub fn name_from_head(head: &Atom) -> Option<String> {
    match head.args.first()? {
        Expr::Call(Builtin::Cat, args) => match args.first()? {
            Expr::Sym(s) => {
                let n = s.strip_suffix('[').unwrap_or(s);
                Some(n.to_string()).filter(|n| !n.is_empty())
            }
            _ => None,
        },
        _ => None,
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Str(s) => quote_sym(s),
        Tok::Num(n) => n.to_string(),
        Tok::Param(p) => format!("${p}"),
        Tok::Directive(d) => format!(".{d}"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::Colon => "':'".into(),
        Tok::Turnstile => "':-'".into(),
        Tok::Bang => "'!'".into(),
        Tok::At => "'@'".into(),
        Tok::Underscore => "'_'".into(),
        Tok::Op(op) => format!("'{}'", op.symbol()),
        Tok::Eof => "end of input".into(),
    }
}

pub(super) fn parse(text: &str, file: &str, params: &BTreeMap<String, i64>) -> Result<RuleSet, RuleError> {
    let mut lexer = Lexer { src: text.as_bytes(), pos: 0, line: 1, col: 1, file };
    let mut toks = Vec::new();
    loop {
        let t = lexer.next()?;
        let end = t.tok == Tok::Eof;
        toks.push(t);
        if end {
            break;
        }
    }
    let mut p = Parser { toks, pos: 0, file, params };
    let mut set = RuleSet::default();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Directive(d) if d == "decl" => {
                p.advance();
                p.decl(&mut set)?;
            }
            Tok::Directive(d) => return Err(p.err_here(format!("unknown directive .{d}"))),
            Tok::At => {
                p.advance();
                let key = p.ident("annotation name")?;
                if key != "name" {
                    p.pos -= 1;
                    return Err(p.err_here(format!("unknown annotation @{key}")));
                }
                p.expect(Tok::LParen, "'('")?;
                let name = p.ident("rule name")?;
                p.expect(Tok::RParen, "')'")?;
                let rule = p.rule(Some(name))?;
                set.add_rule(rule, file)?;
            }
            _ => {
                let rule = p.rule(None)?;
                set.add_rule(rule, file)?;
            }
        }
    }
    for rule in &set.rules {
        super::check_range_restriction(rule)?;
    }
    Ok(set)
}
