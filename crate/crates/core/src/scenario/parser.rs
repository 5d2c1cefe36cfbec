//! Recursive-descent parser for scenario files.

use crate::exterior::chart::{Cmp, CoordKind};

use super::ast::{Arg, BinOp, Located, LocusDecl, RegionAtom, SExpr, Scenario, Stmt};
use super::error::ParseError;
use super::lexer::{tokenize, Tok, Token};

pub fn parse(src: &str) -> Result<Scenario, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { src, tokens, pos: 0 };
    let title = src
        .lines()
        .find_map(|l| l.trim().strip_prefix("# title:").map(|t| t.trim().to_string()));
    let mut statements = Vec::new();
    loop {
        p.skip_newlines();
        if p.peek() == &Tok::Eof {
            break;
        }
        let line = p.cur().line;
        let stmt = p.statement()?;
        statements.push(Located { line, stmt });
        match p.peek() {
            Tok::Newline | Tok::Eof => {}
            _ => return Err(p.error("unexpected token after statement", &["end of line"])),
        }
    }
    Ok(Scenario { title, statements })
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

const STATEMENT_HEADS: [&str; 10] =
    ["chart", "use", "region", "param", "bump", "form", "spinor", "map", "manifold", "expect"];

impl<'a> Parser<'a> {
    fn cur(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str, expected: &[&str]) -> ParseError {
        let t = self.cur();
        ParseError::new(t.line, t.col, &format!("{msg}, found {}", t.tok), expected.iter().map(|s| s.to_string()).collect())
    }

    fn skip_newlines(&mut self) {
        while self.peek() == &Tok::Newline {
            self.bump();
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`"), &[&format!("`{s}`")]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&format!("expected {what}"), &[what])),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    /// Items separated by commas or newlines inside braces.
    fn block<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        loop {
            while self.peek() == &Tok::Newline || self.is_sym(",") {
                self.bump();
            }
            if self.eat_sym("}") {
                return Ok(out);
            }
            if self.peek() == &Tok::Eof {
                return Err(self.error("unclosed block", &["`}`"]));
            }
            out.push(item(self)?);
            if !(self.peek() == &Tok::Newline || self.is_sym(",") || self.is_sym("}")) {
                return Err(self.error("expected separator", &["`,`", "end of line", "`}`"]));
            }
        }
    }

    fn key_value(&mut self) -> Result<(String, SExpr), ParseError> {
        let k = self.ident("key")?;
        self.expect_sym("=")?;
        Ok((k, self.expr()?))
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let head = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return Err(self.error("expected a statement", &STATEMENT_HEADS)),
        };
        match head.as_str() {
            "chart" => {
                self.bump();
                let name = self.ident("chart name")?;
                let coords = self.block(|p| {
                    let c = p.ident("coordinate name")?;
                    p.expect_sym(":")?;
                    let kind_tok = p.cur().clone();
                    let k = p.ident("coordinate kind")?;
                    let kind = CoordKind::from_keyword(&k).ok_or_else(|| {
                        ParseError::new(
                            kind_tok.line,
                            kind_tok.col,
                            &format!("unknown coordinate kind `{k}`"),
                            vec!["real".into(), "radial".into(), "angle".into(), "complex".into()],
                        )
                    })?;
                    Ok((c, kind))
                })?;
                Ok(Stmt::Chart { name, coords })
            }
            "use" => {
                self.bump();
                Ok(Stmt::Use(self.ident("chart name")?))
            }
            "region" => {
                self.bump();
                let name = self.ident("region name")?;
                let chart = if self.keyword("on") { Some(self.ident("chart name")?) } else { None };
                let constraints = self.block(|p| p.region_atom())?;
                Ok(Stmt::Region { name, chart, constraints })
            }
            "param" => {
                self.bump();
                let name = self.ident("parameter name")?;
                self.expect_sym("=")?;
                Ok(Stmt::Param { name, value: self.expr()? })
            }
            "bump" => {
                self.bump();
                self.expect_sym("(")?;
                let name = self.ident("bump name")?;
                self.expect_sym(";")?;
                self.ident("bump variable")?;
                if !(self.eat_sym("<=") || self.eat_sym("<")) {
                    return Err(self.error("expected the zero region", &["`<=`"]));
                }
                let zero_below = self.expr()?;
                self.expect_sym(";")?;
                self.ident("bump variable")?;
                if !(self.eat_sym(">=") || self.eat_sym(">")) {
                    return Err(self.error("expected the one region", &["`>=`"]));
                }
                let one_above = self.expr()?;
                self.expect_sym(")")?;
                Ok(Stmt::Bump { name, zero_below, one_above })
            }
            "form" => {
                self.bump();
                let name = self.ident("form name")?;
                let chart = if self.keyword("on") { Some(self.ident("chart name")?) } else { None };
                self.expect_sym("=")?;
                Ok(Stmt::Form { name, chart, value: self.expr()? })
            }
            "spinor" => {
                self.bump();
                let name = self.ident("spinor name")?;
                let chart = if self.keyword("on") { Some(self.ident("chart name")?) } else { None };
                self.expect_sym("=")?;
                let value = self.expr()?;
                let options = if self.keyword("with") { self.block(|p| p.key_value())? } else { vec![] };
                Ok(Stmt::Spinor { name, chart, value, options })
            }
            "map" => {
                self.bump();
                let name = self.ident("map name")?;
                self.expect_sym(":")?;
                let source = self.ident("source chart")?;
                self.expect_sym("->")?;
                let target = self.ident("target chart")?;
                let images = self.block(|p| p.key_value())?;
                let domain = if self.keyword("domain") { Some(self.ident("region name")?) } else { None };
                Ok(Stmt::Map { name, source, target, images, domain })
            }
            "manifold" => {
                self.bump();
                let name = self.ident("manifold name")?;
                let mut fields = Vec::new();
                let mut loci = Vec::new();
                self.block(|p| {
                    if p.keyword("locus") {
                        let lname = p.ident("locus name")?;
                        let lf = p.block(|q| q.key_value())?;
                        loci.push(LocusDecl { name: lname, fields: lf });
                    } else {
                        fields.push(p.key_value()?);
                    }
                    Ok(())
                })?;
                Ok(Stmt::Manifold { name, fields, loci })
            }
            "expect" => {
                self.bump();
                let key = self.ident("expectation key")?;
                self.expect_sym("=")?;
                match self.peek().clone() {
                    Tok::Raw(v) => {
                        self.bump();
                        Ok(Stmt::Expect { key, value: v })
                    }
                    _ => Err(self.error("expected a value", &["value"])),
                }
            }
            _ => self.command(),
        }
    }

    fn region_atom(&mut self) -> Result<RegionAtom, ParseError> {
        let modulus = self.eat_sym("|");
        let coord = self.ident("coordinate")?;
        if modulus {
            self.expect_sym("|")?;
        }
        let cmp = match self.peek() {
            Tok::Sym("<") => Cmp::Lt,
            Tok::Sym("<=") => Cmp::Le,
            Tok::Sym(">") => Cmp::Gt,
            Tok::Sym(">=") => Cmp::Ge,
            _ => return Err(self.error("expected a comparison", &["`<`", "`<=`", "`>`", "`>=`"])),
        };
        self.bump();
        Ok(RegionAtom { modulus, coord, cmp, value: self.expr()? })
    }

    /// Command names may contain hyphens written without spaces.
    fn command(&mut self) -> Result<Stmt, ParseError> {
        let first = self.bump();
        let Tok::Ident(mut name) = first.tok else { unreachable!() };
        let mut end = first.end;
        while self.is_sym("-") && self.cur().start == end {
            let dash = self.cur().clone();
            if let Tok::Ident(next) = self.peek_at(1).clone() {
                if self.tokens[self.pos + 1].start == dash.end {
                    name.push('-');
                    name.push_str(&next);
                    self.bump();
                    end = self.bump().end;
                    continue;
                }
            }
            break;
        }
        let mut positional = Vec::new();
        let mut named = Vec::new();
        loop {
            match self.peek() {
                Tok::Newline | Tok::Eof => break,
                Tok::Ident(_) if self.peek_at(1) == &Tok::Sym("=") => named.push(self.key_value()?),
                _ => {
                    if !named.is_empty() {
                        return Err(self.error("positional argument after named ones", &["key = value"]));
                    }
                    positional.push(self.expr()?);
                }
            }
        }
        Ok(Stmt::Command { name, positional, named })
    }

    pub fn expr(&mut self) -> Result<SExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.term()?;
            lhs = SExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<SExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("^") => BinOp::Wedge,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = SExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<SExpr, ParseError> {
        if self.eat_sym("-") {
            return Ok(SExpr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat_sym("**") {
            let neg = self.eat_sym("-");
            match self.peek().clone() {
                Tok::Num(n) if !n.contains('.') => {
                    self.bump();
                    let k: i64 = n.parse().map_err(|_| self.error("exponent out of range", &["integer"]))?;
                    return Ok(SExpr::Pow(Box::new(base), if neg { -k } else { k }));
                }
                _ => return Err(self.error("expected an integer exponent", &["integer"])),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SExpr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(SExpr::Num(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(SExpr::Str(s))
            }
            Tok::Ident(name) => {
                let end = self.bump().end;
                // a call needs `(` right after the name; `f (x)` is two arguments
                if self.is_sym("(") && self.cur().start == end {
                    self.bump();
                    let args = self.args()?;
                    Ok(SExpr::Call(name, args))
                } else {
                    Ok(SExpr::Ident(name))
                }
            }
            Tok::Sym("(") => {
                self.bump();
                self.skip_newlines();
                let e = self.expr()?;
                self.skip_newlines();
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    while self.peek() == &Tok::Newline || self.is_sym(",") {
                        self.bump();
                    }
                    if self.eat_sym("]") {
                        return Ok(SExpr::List(items));
                    }
                    if self.peek() == &Tok::Eof {
                        return Err(self.error("unclosed list", &["`]`"]));
                    }
                    items.push(self.expr()?);
                }
            }
            Tok::Sym("{") => Ok(SExpr::Record(self.block(|p| p.key_value())?)),
            Tok::Sym("<") => {
                let open = self.bump();
                let start = open.end;
                loop {
                    match self.peek() {
                        Tok::Sym(">") => break,
                        Tok::Newline | Tok::Eof => return Err(self.error("unclosed group literal", &["`>`"])),
                        _ => {
                            self.bump();
                        }
                    }
                }
                let close = self.bump();
                let text = self.src[start..close.start].split_whitespace().collect::<Vec<_>>().join(" ");
                Ok(SExpr::Group(text))
            }
            _ => Err(self.error(
                "expected an expression",
                &["number", "name", "string", "`(`", "`[`", "`{`", "`<`", "`-`"],
            )),
        }
    }

    fn args(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut out = Vec::new();
        self.skip_newlines();
        if self.eat_sym(")") {
            return Ok(out);
        }
        loop {
            self.skip_newlines();
            let name = match (self.peek().clone(), self.peek_at(1)) {
                (Tok::Ident(n), Tok::Sym("=")) => {
                    self.bump();
                    self.bump();
                    Some(n)
                }
                _ => None,
            };
            out.push(Arg { name, value: self.expr()? });
            self.skip_newlines();
            if self.eat_sym(")") {
                return Ok(out);
            }
            if !self.eat_sym(",") {
                return Err(self.error("expected `,` or `)`", &["`,`", "`)`"]));
            }
        }
    }
}
