//! Syntax tree of scenario files.

use crate::exterior::chart::{Cmp, CoordKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Wedge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Wedge => "^",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: SExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    Num(String),
    Ident(String),
    Str(String),
    /// Group presentation literal, whitespace-normalised text between `<` and `>`.
    Group(String),
    Neg(Box<SExpr>),
    Bin(BinOp, Box<SExpr>, Box<SExpr>),
    Pow(Box<SExpr>, i64),
    Call(String, Vec<Arg>),
    List(Vec<SExpr>),
    Record(Vec<(String, SExpr)>),
}

impl SExpr {
    pub fn ident(&self) -> Option<&str> {
        match self {
            SExpr::Ident(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionAtom {
    pub modulus: bool,
    pub coord: String,
    pub cmp: Cmp,
    pub value: SExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocusDecl {
    pub name: String,
    pub fields: Vec<(String, SExpr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Chart { name: String, coords: Vec<(String, CoordKind)> },
    Use(String),
    Region { name: String, chart: Option<String>, constraints: Vec<RegionAtom> },
    Param { name: String, value: SExpr },
    Bump { name: String, zero_below: SExpr, one_above: SExpr },
    Form { name: String, chart: Option<String>, value: SExpr },
    Spinor { name: String, chart: Option<String>, value: SExpr, options: Vec<(String, SExpr)> },
    Map { name: String, source: String, target: String, images: Vec<(String, SExpr)>, domain: Option<String> },
    Manifold { name: String, fields: Vec<(String, SExpr)>, loci: Vec<LocusDecl> },
    Command { name: String, positional: Vec<SExpr>, named: Vec<(String, SExpr)> },
    Expect { key: String, value: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Located {
    pub line: usize,
    pub stmt: Stmt,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Scenario {
    pub title: Option<String>,
    pub statements: Vec<Located>,
}

impl Scenario {
    /// Statements without positions, for structural comparison.
    pub fn stmts(&self) -> Vec<&Stmt> {
        self.statements.iter().map(|l| &l.stmt).collect()
    }
}
