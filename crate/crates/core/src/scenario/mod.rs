//! A small language for scripted checks.

pub mod ast;
pub mod corpus;
pub mod error;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod resolve;
pub mod runner;

pub use ast::{Located, SExpr, Scenario, Stmt};
pub use error::{ParseError, ScenarioError};
pub use parser::parse;
pub use printer::{print_expr, print_scenario, print_stmt};
pub use resolve::Env;
pub use runner::{parse_scenario, resolve, run, run_source, verify_all, Report};
