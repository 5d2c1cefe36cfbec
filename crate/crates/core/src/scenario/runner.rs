//! Executing scenarios and rendering reports.

use std::fmt::Write;

use crate::exterior::chart::{Chart, Point, Region};
use crate::exterior::equality::{form_equal, regular_points, SampleConfig};
use crate::exterior::expr::Expr;
use crate::exterior::form::MixedForm;
use crate::exterior::map::CoordinateMap;
use crate::exterior::section::GeneralizedSection;
use crate::gcs::integrable::{check_integrable, Integrability};
use crate::gcs::piecewise::{assemble_piecewise, Overlap, Piece};
use crate::gcs::spinor::{check_nondegenerate, check_stable, normalized, type_at, verdict_text, SpinorStructure};
use crate::topology::{
    apply_branched_cover, apply_cover, apply_gluck, apply_luttinger, classify_simply_connected_5, components_report,
    realize_genus, riemann_hurwitz_check, smale_barden_k, validate_surgery_params, BranchComponent, BranchingData,
    ManifoldDescriptor, Pi1, Spin, SurgeryOptions,
};

use super::ast::{SExpr, Scenario, Stmt};
use super::error::ScenarioError;
use super::parser::parse;
use super::resolve::{parse_group, Env};

/// Ordered key/value results of one command.
pub type Values = Vec<(String, String)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Flagged,
    Fail,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Flagged => "flagged",
            Status::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub line: usize,
    pub key: String,
    pub expected: String,
    pub actual: Option<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutcome {
    pub line: usize,
    pub name: String,
    pub source: String,
    pub values: Values,
    pub assertions: Vec<Assertion>,
    /// Set when the command failed and no expectation accounted for it.
    pub unexpected_error: Option<String>,
    pub flags: Vec<String>,
}

impl CommandOutcome {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn status(&self) -> Status {
        if self.unexpected_error.is_some() || self.assertions.iter().any(|a| !a.passed) {
            Status::Fail
        } else if !self.flags.is_empty() {
            Status::Flagged
        } else {
            Status::Pass
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub samples: usize,
    pub commands: Vec<CommandOutcome>,
    pub warnings: Vec<String>,
    pub config_error: Option<String>,
}

impl Report {
    pub fn assertion_count(&self) -> usize {
        self.commands.iter().map(|c| c.assertions.len()).sum()
    }

    pub fn failures(&self) -> usize {
        self.commands
            .iter()
            .map(|c| c.assertions.iter().filter(|a| !a.passed).count() + usize::from(c.unexpected_error.is_some()))
            .sum()
    }

    /// 0 when everything passed, 1 on a failed assertion, 2 on a parse or
    /// configuration error.
    pub fn exit_code(&self) -> i32 {
        if self.config_error.is_some() {
            2
        } else if self.failures() > 0 {
            1
        } else {
            0
        }
    }

    pub fn status(&self) -> &'static str {
        match self.exit_code() {
            0 => "pass",
            1 => "fail",
            _ => "error",
        }
    }

    /// Human-readable text followed by a `key: value` block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.scenario);
        let _ = writeln!(out, "seed {}, {} samples", self.seed, self.samples);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if let Some(e) = &self.config_error {
            let _ = writeln!(out, "error: {e}");
        }
        for c in &self.commands {
            let _ = writeln!(out, "[{}] line {}: {}", c.status().as_str(), c.line, c.source);
            for (k, v) in &c.values {
                let _ = writeln!(out, "    {k} = {v}");
            }
            for f in &c.flags {
                let _ = writeln!(out, "    flag: {f}");
            }
            for a in &c.assertions {
                let mark = if a.passed { "ok" } else { "FAILED" };
                let actual = a.actual.as_deref().unwrap_or("<missing>");
                if a.passed {
                    let _ = writeln!(out, "    expect {} = {} ... {mark}", a.key, a.expected);
                } else {
                    let _ = writeln!(out, "    expect {} = {} ... {mark} (got {actual})", a.key, a.expected);
                }
            }
            if let Some(e) = &c.unexpected_error {
                let _ = writeln!(out, "    unexpected error: {e}");
            }
        }
        out.push_str("--- machine ---\n");
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "samples: {}", self.samples);
        for (i, c) in self.commands.iter().enumerate() {
            let n = i + 1;
            let _ = writeln!(out, "command.{n}.name: {}", c.name);
            let _ = writeln!(out, "command.{n}.line: {}", c.line);
            let _ = writeln!(out, "command.{n}.status: {}", c.status().as_str());
            for (k, v) in &c.values {
                let _ = writeln!(out, "command.{n}.{k}: {v}");
            }
        }
        let _ = writeln!(out, "warnings: {}", self.warnings.len());
        let _ = writeln!(out, "assertions: {}", self.assertion_count());
        let _ = writeln!(out, "failures: {}", self.failures());
        let _ = writeln!(out, "status: {}", self.status());
        out
    }
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parse and run `src`; parse errors become a configuration error.
pub fn run_source(src: &str, fallback_name: &str, cfg: &SampleConfig) -> Report {
    match parse(src) {
        Ok(s) => run(&s, fallback_name, cfg),
        Err(e) => Report {
            scenario: fallback_name.into(),
            seed: cfg.seed,
            samples: cfg.samples,
            commands: vec![],
            warnings: vec![],
            config_error: Some(ScenarioError::from(e).to_string()),
        },
    }
}

/// Execute declarations and commands in order.
pub fn run(scenario: &Scenario, fallback_name: &str, cfg: &SampleConfig) -> Report {
    let mut report = Report {
        scenario: scenario.title.clone().unwrap_or_else(|| fallback_name.to_string()),
        seed: cfg.seed,
        samples: cfg.samples,
        commands: vec![],
        warnings: vec![],
        config_error: None,
    };
    let mut env = Env::default();
    let mut pending_error: Option<String> = None;
    let mut error_accounted = false;
    let close = |report: &mut Report, pending: &mut Option<String>, accounted: bool| {
        if let Some(e) = pending.take() {
            if !accounted {
                if let Some(c) = report.commands.last_mut() {
                    c.unexpected_error = Some(e);
                }
            }
        }
    };
    for l in &scenario.statements {
        match &l.stmt {
            Stmt::Expect { key, value } => {
                let Some(c) = report.commands.last_mut() else {
                    report.config_error = Some(format!("line {}: `expect` before any command", l.line));
                    return report;
                };
                if key == "ok" || key == "error" {
                    error_accounted = true;
                }
                let actual = c.get(key).map(|s| s.to_string());
                let passed = actual.as_deref().map(normalize_ws) == Some(normalize_ws(value));
                c.assertions.push(Assertion {
                    line: l.line,
                    key: key.clone(),
                    expected: value.clone(),
                    actual,
                    passed,
                });
            }
            Stmt::Command { name, positional, named } => {
                close(&mut report, &mut pending_error, error_accounted);
                error_accounted = false;
                let mut flags = Vec::new();
                let values = match execute(&mut env, name, positional, named, cfg, &mut flags) {
                    Ok(mut v) => {
                        v.insert(0, ("ok".into(), "true".into()));
                        v
                    }
                    Err(e) => {
                        pending_error = Some(e.clone());
                        vec![("ok".into(), "false".into()), ("error".into(), e)]
                    }
                };
                let source = super::printer::print_stmt(&l.stmt);
                report.commands.push(CommandOutcome {
                    line: l.line,
                    name: name.clone(),
                    source,
                    values,
                    assertions: vec![],
                    unexpected_error: None,
                    flags,
                });
            }
            decl => {
                close(&mut report, &mut pending_error, error_accounted);
                error_accounted = false;
                if let Err(e) = env.declare(decl, l.line, cfg) {
                    report.warnings.append(&mut env.warnings);
                    report.config_error = Some(e.to_string());
                    return report;
                }
            }
        }
    }
    close(&mut report, &mut pending_error, error_accounted);
    report.warnings.append(&mut env.warnings);
    report
}

struct Args<'a> {
    env: &'a Env,
    command: &'a str,
    positional: &'a [SExpr],
    named: &'a [(String, SExpr)],
}

impl<'a> Args<'a> {
    fn get(&self, key: &str) -> Option<&'a SExpr> {
        self.named.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn need(&self, key: &str) -> Result<&'a SExpr, String> {
        self.get(key).ok_or_else(|| format!("`{}` needs `{key} = ...`", self.command))
    }

    fn pos(&self, i: usize) -> Result<&'a SExpr, String> {
        self.positional.get(i).ok_or_else(|| format!("`{}` needs argument {}", self.command, i + 1))
    }

    fn pos_name(&self, i: usize) -> Result<&'a str, String> {
        self.pos(i)?.ident().ok_or_else(|| format!("argument {} of `{}` must be a name", i + 1, self.command))
    }

    fn int(&self, key: &str) -> Result<i64, String> {
        self.env.integer(self.need(key)?)
    }

    fn int_or(&self, key: &str, default: i64) -> Result<i64, String> {
        self.get(key).map(|e| self.env.integer(e)).transpose().map(|v| v.unwrap_or(default))
    }

    fn ident(&self, key: &str) -> Result<Option<&'a str>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.ident().map(Some).ok_or_else(|| format!("`{key}` must be a name")),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, String> {
        match self.ident(key)? {
            None => Ok(None),
            Some("true") | Some("spin") => Ok(Some(true)),
            Some("false") | Some("nonspin") => Ok(Some(false)),
            Some(o) => Err(format!("`{key}` must be true or false, got `{o}`")),
        }
    }

    fn list(&self, key: &str) -> Result<&'a [SExpr], String> {
        match self.get(key) {
            None => Ok(&[]),
            Some(SExpr::List(xs)) => Ok(xs),
            Some(_) => Err(format!("`{key}` must be a list")),
        }
    }

    fn int_list(&self, key: &str) -> Result<Vec<i64>, String> {
        self.list(key)?.iter().map(|e| self.env.integer(e)).collect()
    }

    fn cfg(&self, base: &SampleConfig) -> Result<SampleConfig, String> {
        let n = self.int_or("samples", base.samples as i64)?;
        if n < 1 {
            return Err("`samples` must be positive".into());
        }
        Ok(base.with_samples(n as usize))
    }
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn yes(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn execute(
    env: &mut Env,
    name: &str,
    positional: &[SExpr],
    named: &[(String, SExpr)],
    base: &SampleConfig,
    flags: &mut Vec<String>,
) -> Result<Values, String> {
    let snapshot = env.clone();
    let a = Args { env: &snapshot, command: name, positional, named };
    let cfg = a.cfg(base)?;
    match name {
        "verify-spinor" => verify_spinor(&a, &cfg),
        "type" => type_cmd(&a, &cfg),
        "stable" => {
            let s = snapshot.spinor(a.pos_name(0)?)?;
            let w = witnesses(&a, s.chart())?;
            let r = check_stable(s, &w, &cfg).map_err(|e| e.to_string())?;
            Ok(vec![
                kv("stable", yes(r.stable)),
                kv("locus", r.locus_label()),
                kv("points", r.points_checked),
                kv("method", r.method),
            ])
        }
        "integrable" => {
            let s = snapshot.spinor(a.pos_name(0)?)?;
            Ok(integrability_values(&check_integrable(s, &cfg).map_err(|e| e.to_string())?))
        }
        "nondegenerate" => {
            let s = snapshot.spinor(a.pos_name(0)?)?;
            let p = snapshot.point(a.need("at")?, s.chart())?;
            let (ok, method) = check_nondegenerate(s, &p, cfg.tolerance).map_err(|e| e.to_string())?;
            Ok(vec![kv("nondegenerate", yes(ok)), kv("method", format!("{method:?}").to_lowercase())])
        }
        "equal" => equal_cmd(&a, &cfg),
        "assemble" => assemble_cmd(&a, &cfg),
        "domain" => {
            let m = snapshot.map(a.pos_name(0)?)?;
            let n = m.check_domain(&cfg).map_err(|e| e.to_string())?;
            Ok(vec![kv("checked", n)])
        }
        "validate-params" => {
            let p = snapshot.params_from(named)?;
            Ok(match validate_surgery_params(p) {
                Ok(c) => {
                    let rows: Vec<String> =
                        c.matrix.iter().map(|r| format!("[{}, {}, {}]", r[0], r[1], r[2])).collect();
                    vec![kv("valid", "true"), kv("det", c.det), kv("matrix", format!("[{}]", rows.join(", ")))]
                }
                Err(v) => vec![kv("valid", "false"), kv("det", p.det()), kv("violation", v)],
            })
        }
        "surgery" | "gluck" => {
            let m = snapshot.manifold(a.pos_name(0)?)?;
            let locus = a.ident("locus")?.ok_or("`locus = ...` is required")?;
            let p = snapshot.params_from(named)?;
            let opts = SurgeryOptions {
                spin_after: match a.boolean("spin")? {
                    None => None,
                    Some(true) => Some(Spin::Spin),
                    Some(false) => Some(Spin::NonSpin),
                },
                name: a.ident("as")?.map(|s| s.to_string()),
            };
            let out = if name == "surgery" {
                apply_luttinger(m, locus, p, &opts)
            } else {
                apply_gluck(m, locus, p, &opts)
            }
            .map_err(|e| e.to_string())?;
            Ok(store(env, out, &a, flags)?)
        }
        "cover" => {
            let m = snapshot.manifold(a.pos_name(0)?)?;
            let sub = a.get("subgroup").map(|g| snapshot.group(g)).transpose()?;
            let out = apply_cover(m, a.int("degree")?, sub).map_err(|e| e.to_string())?;
            Ok(store(env, out, &a, flags)?)
        }
        "branched-cover" => {
            let m = snapshot.manifold(a.pos_name(0)?)?;
            let d = a.int("degree")?;
            if d < 1 {
                return Err(format!("degree {d} < 1"));
            }
            let mut components = Vec::new();
            for c in a.list("branch")? {
                let SExpr::Record(kv) = c else { return Err("branch entries are {locus = .., indices = [..]}".into()) };
                let get = |k: &str| kv.iter().find(|(n, _)| n == k).map(|(_, v)| v);
                let locus = get("locus").and_then(|e| e.ident()).ok_or("branch entry needs `locus`")?;
                let indices = match get("indices") {
                    Some(SExpr::List(xs)) => xs
                        .iter()
                        .map(|x| snapshot.integer(x).and_then(|v| u32::try_from(v).map_err(|e| e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?,
                    _ => return Err("branch entry needs `indices = [..]`".into()),
                };
                components.push(BranchComponent { locus: locus.into(), indices });
            }
            let data = BranchingData { degree: d as u32, components };
            let out = apply_branched_cover(m, &data).map_err(|e| e.to_string())?;
            Ok(store(env, out, &a, flags)?)
        }
        "report" => {
            let m = snapshot.manifold(a.pos_name(0)?)?;
            let mut v = describe(m, flags);
            let r = components_report(m).map_err(|e| e.to_string())?;
            v.push(kv("notes", r.notes.join("; ")));
            Ok(v)
        }
        "classify5" => {
            let k = match a.get("k") {
                Some(e) => snapshot.integer(e)?,
                None => smale_barden_k(a.int("b2")?, a.int("genus")?),
            };
            let spin = a.boolean("spin")?.ok_or("`spin = true|false` is required")?;
            let torsion: Vec<u64> = a.int_list("torsion")?.into_iter().map(|t| t as u64).collect();
            let n = classify_simply_connected_5(k, spin, &torsion).map_err(|e| e.to_string())?;
            Ok(vec![kv("k", k), kv("name", n)])
        }
        "riemann-hurwitz" => {
            let gc = a.int("cover")?;
            let gb = a.int("base")?;
            match a.get("degree") {
                Some(d) => {
                    let d = snapshot.integer(d)?;
                    Ok(match riemann_hurwitz_check(gc, gb, d, &a.int_list("indices")?) {
                        Ok(()) => vec![kv("holds", "true")],
                        Err(e) => vec![kv("holds", "false"), kv("violation", e)],
                    })
                }
                None => Ok(match realize_genus(gc, gb) {
                    Some((d, idx)) => vec![kv("realizable", "true"), kv("degree", d), kv("indices", fmt_list(&idx))],
                    None => vec![kv("realizable", "false")],
                }),
            }
        }
        "abelianize" => {
            let g = match a.pos(0)? {
                SExpr::Group(text) => parse_group(text)?,
                SExpr::Ident(n) => match &snapshot.manifold(n)?.pi1 {
                    Pi1::Known(g) => g.clone(),
                    Pi1::Unknown(why) => return Err(format!("π₁ of `{n}` is unknown ({why})")),
                },
                _ => return Err("`abelianize` takes a group or a manifold".into()),
            };
            let words = a
                .list("quotient")?
                .iter()
                .map(|w| match w {
                    SExpr::Str(s) => g.parse_word(s).map_err(|e| e.to_string()),
                    _ => Err("quotient words are quoted".to_string()),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let g = if words.is_empty() { g } else { g.quotient(&words) };
            let ab = g.abelianization();
            Ok(vec![
                kv("group", g),
                kv("abelianization", &ab),
                kv("rank", ab.rank),
                kv("torsion", fmt_list(&ab.torsion)),
            ])
        }
        other => Err(format!("unknown command `{other}`")),
    }
}

fn fmt_list<T: ToString>(xs: &[T]) -> String {
    format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn store(env: &mut Env, mut m: ManifoldDescriptor, a: &Args, flags: &mut Vec<String>) -> Result<Values, String> {
    if let Some(n) = a.ident("as")? {
        m.name = n.to_string();
    }
    let v = describe(&m, flags);
    env.manifolds.insert(m.name.clone(), m);
    Ok(v)
}

pub fn describe(m: &ManifoldDescriptor, flags: &mut Vec<String>) -> Values {
    let mut v = vec![
        kv("name", &m.name),
        kv("dim", m.dim),
        kv("chi", m.chi),
        kv("signature", &m.signature),
        kv("spin", m.spin),
    ];
    match &m.pi1 {
        Pi1::Known(g) => {
            let ab = g.abelianization();
            v.push(kv("pi1", g));
            v.push(kv("abelianization", &ab));
            v.push(kv("pi1_rank", ab.rank));
            v.push(kv("pi1_torsion", fmt_list(&ab.torsion)));
        }
        Pi1::Unknown(why) => {
            v.push(kv("pi1", "unknown"));
            flags.push(format!("π₁ unknown: {why}"));
        }
    }
    if let Some(h) = &m.h2 {
        v.push(kv("b2", h.rank));
    }
    v.push(kv("components", m.components.len()));
    let labels: Vec<String> = m.components.iter().map(|c| c.label.to_string()).collect();
    let b1: Vec<u32> = m.components.iter().map(|c| c.b1()).collect();
    v.push(kv("labels", labels.join(", ")));
    v.push(kv("b1", fmt_list(&b1)));
    v.push(kv("heterogeneous", yes(m.heterogeneous())));
    if !m.provenance.is_empty() {
        v.push(kv("provenance", m.provenance.join("; ")));
    }
    v
}

fn fmt_section(s: &GeneralizedSection) -> String {
    let chart = s.chart();
    let mut parts: Vec<String> = s
        .x
        .components()
        .iter()
        .map(|(slot, c)| format!("({c})·∂{}", chart.slots[*slot].var))
        .collect();
    if !s.xi.is_zero() {
        parts.push(format!("({})", s.xi));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn integrability_values(r: &Integrability) -> Values {
    match r {
        Integrability::Certified { certificate, verdict, solved } => vec![
            kv("integrable", "true"),
            kv("certificate", fmt_section(certificate)),
            kv("certificate_source", if *solved { "solved" } else { "supplied" }),
            kv("residual", verdict_text(verdict)),
        ],
        Integrability::Infeasible { reason } => vec![kv("integrable", "false"), kv("reason", reason)],
    }
}

fn witnesses(a: &Args, chart: &Chart) -> Result<Vec<Point>, String> {
    a.list("witnesses")?.iter().map(|w| a.env.point(w, chart)).collect()
}

fn verify_spinor(a: &Args, cfg: &SampleConfig) -> Result<Values, String> {
    let s = a.env.spinor(a.pos_name(0)?)?;
    let mut v = vec![kv("h_closed", "true"), kv("hints", if s.hints.is_some() { "verified" } else { "none" })];
    v.extend(integrability_values(&check_integrable(s, cfg).map_err(|e| e.to_string())?));
    let st = check_stable(s, &witnesses(a, s.chart())?, cfg).map_err(|e| e.to_string())?;
    v.push(kv("stable", yes(st.stable)));
    v.push(kv("locus", st.locus_label()));
    Ok(v)
}

fn region_arg(a: &Args, key: &str, default: &Region) -> Result<Region, String> {
    match a.ident(key)? {
        Some(r) => a.env.region(r),
        None => Ok(default.clone()),
    }
}

/// Types at one point, or at sampled points with some coordinates fixed.
fn type_cmd(a: &Args, cfg: &SampleConfig) -> Result<Values, String> {
    let s = a.env.spinor(a.pos_name(0)?)?;
    let chart = s.chart();
    let fixed = match a.get("at") {
        Some(e) => a.env.point_values(e, chart)?,
        None => vec![],
    };
    let region = region_arg(a, "on", &s.region)?;
    let all_fixed = chart.coords.iter().all(|c| fixed.iter().any(|(n, _)| n == &c.name));
    let points = if all_fixed && a.get("samples").is_none() {
        vec![chart.point(&fixed).map_err(|e| e.to_string())?]
    } else {
        let coeffs: Vec<&Expr> = s.rho.terms().values().collect();
        regular_points(chart, &region, &fixed, &coeffs, cfg.samples, cfg).map_err(|e| e.to_string())?
    };
    let mut types = Vec::new();
    for p in &points {
        types.push(type_at(&s.rho, p, cfg.tolerance).map_err(|e| e.to_string())?);
    }
    let mut distinct = types.clone();
    distinct.sort();
    distinct.dedup();
    let shown: Vec<String> = distinct.iter().map(|t| t.to_string()).collect();
    Ok(vec![kv("type", shown.join(", ")), kv("points", points.len())])
}

/// An operand of `equal`: a form, a spinor (its ρ), or an expression.
fn operand(a: &Args, e: &SExpr, chart_hint: Option<&std::sync::Arc<Chart>>) -> Result<(MixedForm, Region), String> {
    if let Some(n) = e.ident() {
        if let Some(s) = a.env.spinors.get(n) {
            return Ok((s.rho.clone(), s.region.clone()));
        }
        if let Some(f) = a.env.forms.get(n) {
            return Ok((f.clone(), Region::default()));
        }
    }
    let chart = match chart_hint {
        Some(c) => c.clone(),
        None => a.env.chart_or_current(&a.ident("chart")?.map(|s| s.to_string()))?,
    };
    Ok((a.env.form(e, &chart)?, Region::default()))
}

fn equal_cmd(a: &Args, cfg: &SampleConfig) -> Result<Values, String> {
    let (mut x, rx) = operand(a, a.pos(0)?, None)?;
    let (mut y, _) = operand(a, a.pos(1)?, Some(&x.chart().clone()))?;
    if a.boolean("projective")?.unwrap_or(false) {
        x = normalized(&x).map_err(|e| e.to_string())?;
        y = normalized(&y).map_err(|e| e.to_string())?;
    }
    let region = region_arg(a, "on", &rx)?;
    let v = form_equal(&x, &y, &region, cfg).map_err(|e| e.to_string())?;
    Ok(vec![kv("equal", yes(v.holds())), kv("verdict", verdict_text(&v))])
}

fn assemble_cmd(a: &Args, cfg: &SampleConfig) -> Result<Values, String> {
    let mut pieces = Vec::new();
    for p in a.list("pieces")? {
        let n = p.ident().ok_or("pieces are spinor names")?;
        let s: &SpinorStructure = a.env.spinor(n)?;
        pieces.push(Piece { name: n.into(), spinor: s.clone() });
    }
    let mut overlaps = Vec::new();
    for o in a.list("overlaps")? {
        let SExpr::Record(kv) = o else { return Err("overlaps are records".into()) };
        let get = |k: &str| kv.iter().find(|(n, _)| n == k).and_then(|(_, v)| v.ident());
        let need = |k: &str| get(k).ok_or_else(|| format!("overlap needs `{k}`"));
        let pa = need("a")?;
        let pb = need("b")?;
        let map = |key: &str, piece: &str| -> Result<CoordinateMap, String> {
            match get(key) {
                Some(m) => a.env.map(m).cloned(),
                None => Ok(CoordinateMap::identity(a.env.spinor(piece)?.chart())),
            }
        };
        overlaps.push(Overlap {
            name: get("name").unwrap_or("overlap").into(),
            a: pa.into(),
            b: pb.into(),
            map_a: map("map_a", pa)?,
            map_b: map("map_b", pb)?,
            region: match get("region") {
                Some(r) => a.env.region(r)?,
                None => Region::default(),
            },
            required: get("required") != Some("false"),
        });
    }
    let out = assemble_piecewise(pieces, overlaps, cfg).map_err(|e| e.to_string())?;
    let ov: Vec<String> = out
        .results
        .iter()
        .map(|r| format!("{}: {}", r.name, if r.agrees() { "agree" } else { "differ" }))
        .collect();
    Ok(vec![
        kv("agree", yes(out.results.iter().all(|r| r.agrees()))),
        kv("overlaps", ov.join("; ")),
        kv("locus", out.locus().join("; ")),
        kv("pieces", out.pieces.len()),
    ])
}

/// Resolve declarations only (no commands).
pub fn resolve(scenario: &Scenario, cfg: &SampleConfig) -> Result<Env, ScenarioError> {
    let mut env = Env::default();
    for l in &scenario.statements {
        if !matches!(l.stmt, Stmt::Command { .. } | Stmt::Expect { .. }) {
            env.declare(&l.stmt, l.line, cfg)?;
        }
    }
    Ok(env)
}

/// Parse, then statically check that every name used by a command is
/// declared somewhere before it.
pub fn parse_scenario(src: &str) -> Result<Scenario, ScenarioError> {
    let s = parse(src)?;
    let mut declared: Vec<String> = Vec::new();
    for l in &s.statements {
        match &l.stmt {
            Stmt::Chart { name, .. }
            | Stmt::Region { name, .. }
            | Stmt::Param { name, .. }
            | Stmt::Bump { name, .. }
            | Stmt::Form { name, .. }
            | Stmt::Spinor { name, .. }
            | Stmt::Map { name, .. }
            | Stmt::Manifold { name, .. } => declared.push(name.clone()),
            Stmt::Use(c) => {
                if !declared.contains(c) {
                    return Err(ScenarioError::semantic(l.line, format!("unknown chart `{c}`")));
                }
            }
            Stmt::Command { name, positional, named } => {
                let takes_object = !matches!(
                    name.as_str(),
                    "validate-params" | "classify5" | "riemann-hurwitz" | "abelianize" | "equal"
                );
                if takes_object {
                    if let Some(n) = positional.first().and_then(|e| e.ident()) {
                        if !declared.iter().any(|d| d == n) {
                            return Err(ScenarioError::semantic(l.line, format!("`{name}`: unknown name `{n}`")));
                        }
                    }
                }
                if let Some((_, SExpr::Ident(n))) = named.iter().find(|(k, _)| k == "as") {
                    declared.push(n.clone());
                }
            }
            Stmt::Expect { .. } => {}
        }
    }
    Ok(s)
}

/// Verify every spinor of a scenario (or only `only`).
pub fn verify_all(scenario: &Scenario, only: Option<&str>, cfg: &SampleConfig) -> Result<Report, ScenarioError> {
    let env = resolve(scenario, cfg)?;
    let mut report = Report {
        scenario: scenario.title.clone().unwrap_or_else(|| "scenario".into()),
        seed: cfg.seed,
        samples: cfg.samples,
        commands: vec![],
        warnings: env.warnings.clone(),
        config_error: None,
    };
    if let Some(n) = only {
        env.spinor(n).map_err(|m| ScenarioError::semantic(0, m))?;
    }
    for (name, _) in env.spinors.iter().filter(|(n, _)| only.is_none_or(|o| o == n.as_str())) {
        let pos = [SExpr::Ident(name.clone())];
        let a = Args { env: &env, command: "verify-spinor", positional: &pos, named: &[] };
        let (values, err) = match verify_spinor(&a, cfg) {
            Ok(mut v) => {
                v.insert(0, kv("ok", "true"));
                (v, None)
            }
            Err(e) => (vec![kv("ok", "false"), kv("error", &e)], Some(e)),
        };
        report.commands.push(CommandOutcome {
            line: 0,
            name: "verify-spinor".into(),
            source: format!("verify-spinor {name}"),
            values,
            assertions: vec![],
            unexpected_error: err,
            flags: vec![],
        });
    }
    Ok(report)
}
