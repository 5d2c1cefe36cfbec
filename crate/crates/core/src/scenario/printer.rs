//! Pretty-printer; its output parses back to the same statements.

use std::fmt::Write;

use super::ast::{Arg, LocusDecl, SExpr, Scenario, Stmt};

pub fn print_expr(e: &SExpr) -> String {
    match e {
        SExpr::Num(n) => n.clone(),
        SExpr::Ident(s) => s.clone(),
        SExpr::Str(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        SExpr::Group(g) => format!("< {g} >"),
        SExpr::Neg(a) => format!("-{}", print_expr(a)),
        SExpr::Bin(op, a, b) => format!("({} {} {})", print_expr(a), op.symbol(), print_expr(b)),
        SExpr::Pow(a, k) => format!("{}**{k}", atomic(a)),
        SExpr::Call(f, args) => format!("{f}({})", print_args(args)),
        SExpr::List(items) => format!("[{}]", items.iter().map(print_expr).collect::<Vec<_>>().join(", ")),
        SExpr::Record(kv) => format!("{{{}}}", print_kv(kv)),
    }
}

/// Wrap anything that is not already an atom, so `**` binds as printed.
fn atomic(e: &SExpr) -> String {
    match e {
        SExpr::Neg(_) | SExpr::Pow(..) => format!("({})", print_expr(e)),
        _ => print_expr(e),
    }
}

fn print_args(args: &[Arg]) -> String {
    args.iter()
        .map(|a| match &a.name {
            Some(n) => format!("{n} = {}", print_expr(&a.value)),
            None => print_expr(&a.value),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_kv(kv: &[(String, SExpr)]) -> String {
    kv.iter().map(|(k, v)| format!("{k} = {}", print_expr(v))).collect::<Vec<_>>().join(", ")
}

fn on(chart: &Option<String>) -> String {
    chart.as_ref().map(|c| format!(" on {c}")).unwrap_or_default()
}

pub fn print_stmt(s: &Stmt) -> String {
    match s {
        Stmt::Chart { name, coords } => {
            let cs: Vec<String> = coords.iter().map(|(n, k)| format!("{n}: {}", k.keyword())).collect();
            format!("chart {name} {{ {} }}", cs.join(", "))
        }
        Stmt::Use(c) => format!("use {c}"),
        Stmt::Region { name, chart, constraints } => {
            let cs: Vec<String> = constraints
                .iter()
                .map(|a| {
                    let q = if a.modulus { format!("|{}|", a.coord) } else { a.coord.clone() };
                    format!("{q} {} {}", a.cmp.symbol(), print_expr(&a.value))
                })
                .collect();
            format!("region {name}{} {{ {} }}", on(chart), cs.join(", "))
        }
        Stmt::Param { name, value } => format!("param {name} = {}", print_expr(value)),
        Stmt::Bump { name, zero_below, one_above } => {
            format!("bump({name}; t <= {}; t >= {})", print_expr(zero_below), print_expr(one_above))
        }
        Stmt::Form { name, chart, value } => format!("form {name}{} = {}", on(chart), print_expr(value)),
        Stmt::Spinor { name, chart, value, options } => {
            let mut s = format!("spinor {name}{} = {}", on(chart), print_expr(value));
            if !options.is_empty() {
                let _ = write!(s, " with {{\n{}\n}}", indent_kv(options));
            }
            s
        }
        Stmt::Map { name, source, target, images, domain } => {
            let mut s = format!("map {name} : {source} -> {target} {{\n{}\n}}", indent_kv(images));
            if let Some(d) = domain {
                let _ = write!(s, " domain {d}");
            }
            s
        }
        Stmt::Manifold { name, fields, loci } => {
            let mut s = format!("manifold {name} {{\n");
            if !fields.is_empty() {
                s.push_str(&indent_kv(fields));
                s.push('\n');
            }
            for LocusDecl { name, fields } in loci {
                let _ = writeln!(s, "  locus {name} {{ {} }}", print_kv(fields));
            }
            s.push('}');
            s
        }
        Stmt::Command { name, positional, named } => {
            let mut parts = vec![name.clone()];
            parts.extend(positional.iter().map(|e| match e {
                SExpr::Neg(_) => format!("({})", print_expr(e)),
                _ => print_expr(e),
            }));
            parts.extend(named.iter().map(|(k, v)| format!("{k} = {}", print_expr(v))));
            parts.join(" ")
        }
        Stmt::Expect { key, value } => format!("expect {key} = {value}"),
    }
}

fn indent_kv(kv: &[(String, SExpr)]) -> String {
    kv.iter().map(|(k, v)| format!("  {k} = {}", print_expr(v))).collect::<Vec<_>>().join("\n")
}

pub fn print_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    if let Some(t) = &s.title {
        let _ = writeln!(out, "# title: {t}");
    }
    for l in &s.statements {
        out.push_str(&print_stmt(&l.stmt));
        out.push('\n');
    }
    out
}
