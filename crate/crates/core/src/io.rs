//! Line-oriented text formats for graphs, MDPs, sqrt-sum instances,
//! controllers, reduction bundles and verification reports.
//!
//! Every format is UTF-8, one record per line, with `#` starting a comment.
//! Numbers may be written as decimals or as exact `p/q` rationals.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mdp::{validate_mdp, BlindController, Mdp};
use crate::oracles::verify::{VerificationReport, Verdict};
use crate::rational::{self, format_rational, parse_rational, Rational};
use crate::reductions::{ReductionInstance, ReductionKind, ReductionMeta, SqrtSumInstance};

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v = if tok.contains('/') {
        parse_rational(tok).map(|r| rational::to_f64(&r))
    } else {
        tok.parse::<f64>().ok()
    };
    match v {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("`{tok}` is not a finite number"))),
    }
}

fn parse_u64(tok: &str, line: usize, what: &str) -> Result<u64> {
    if tok.starts_with('-') {
        return Err(Error::parse(line, format!("{what} must be nonnegative, got {tok}")));
    }
    tok.parse()
        .map_err(|_| Error::parse(line, format!("{what}: `{tok}` is not a nonnegative integer")))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    parse_u64(tok, line, what).map(|v| v as usize)
}

fn strip_comment(raw: &str) -> &str {
    match raw.find('#') {
        Some(i) => raw[..i].trim(),
        None => raw.trim(),
    }
}

/// Nonblank lines with comments removed, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty())
}

fn last_line(text: &str) -> usize {
    text.lines().count().max(1)
}

#[derive(Debug)]
struct Section<'a> {
    name: &'a str,
    line: usize,
    inline: Vec<&'a str>,
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn is_header(line: &str) -> bool {
    line.starts_with(|c: char| c.is_ascii_alphabetic()) && line.contains(':')
}

/// Splits `name: values` headers and the numeric rows that follow them.
fn sections(text: &str) -> Result<Vec<Section<'_>>> {
    let mut out: Vec<Section> = Vec::new();
    for (line, l) in content_lines(text) {
        if is_header(l) {
            let (name, rest) = l.split_once(':').expect("header has a colon");
            let name = name.trim();
            if let Some(prev) = out.iter().find(|s| s.name == name) {
                return Err(Error::parse(
                    line,
                    format!("duplicate section `{name}` (first on line {})", prev.line),
                ));
            }
            out.push(Section {
                name,
                line,
                inline: rest.split_whitespace().collect(),
                rows: Vec::new(),
            });
        } else {
            match out.last_mut() {
                Some(s) => s.rows.push((line, l.split_whitespace().collect())),
                None => return Err(Error::parse(line, "data before any section header")),
            }
        }
    }
    Ok(out)
}

struct Sections<'a> {
    list: Vec<Section<'a>>,
    end: usize,
}

impl<'a> Sections<'a> {
    fn new(text: &'a str) -> Result<Self> {
        Ok(Sections {
            list: sections(text)?,
            end: last_line(text),
        })
    }

    fn get(&self, name: &str) -> Option<&Section<'a>> {
        self.list.iter().find(|s| s.name == name)
    }

    fn require(&self, name: &str) -> Result<&Section<'a>> {
        self.get(name)
            .ok_or_else(|| Error::parse(self.end, format!("missing section `{name}`")))
    }

    fn reject_unknown(&self, known: impl Fn(&str) -> bool) -> Result<()> {
        match self.list.iter().find(|s| !known(s.name)) {
            Some(s) => Err(Error::parse(s.line, format!("unknown section `{}`", s.name))),
            None => Ok(()),
        }
    }
}

impl Section<'_> {
    /// The single value of a `name: value` line.
    fn scalar(&self) -> Result<&str> {
        if !self.rows.is_empty() {
            return Err(Error::parse(
                self.rows[0].0,
                format!("unexpected row after `{}:`", self.name),
            ));
        }
        match self.inline.as_slice() {
            [v] => Ok(v),
            [] => Err(Error::parse(self.line, format!("`{}:` needs a value", self.name))),
            _ => Err(Error::parse(self.line, format!("`{}:` takes one value", self.name))),
        }
    }

    /// Values on the header line, or on the single line below it.
    fn list(&self) -> Result<(usize, &[&str])> {
        match (self.inline.is_empty(), self.rows.as_slice()) {
            (false, []) => Ok((self.line, &self.inline)),
            (true, [(line, row)]) => Ok((*line, row)),
            (true, []) => Ok((self.line, &[])),
            _ => Err(Error::parse(
                self.rows.first().map_or(self.line, |r| r.0),
                format!("`{}:` takes a single line of values", self.name),
            )),
        }
    }

    fn matrix(&self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        if !self.inline.is_empty() {
            return Err(Error::parse(
                self.line,
                format!("`{}:` rows start on the next line", self.name),
            ));
        }
        if self.rows.len() < rows {
            let line = self.rows.last().map_or(self.line, |r| r.0);
            return Err(Error::parse(
                line,
                format!(
                    "section `{}` ends after {} of {rows} rows",
                    self.name,
                    self.rows.len()
                ),
            ));
        }
        if self.rows.len() > rows {
            return Err(Error::parse(
                self.rows[rows].0,
                format!("section `{}` has more than {rows} rows", self.name),
            ));
        }
        let mut m = DMatrix::zeros(rows, cols);
        for (i, (line, row)) in self.rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::parse(
                    *line,
                    format!("expected {cols} values, found {}", row.len()),
                ));
            }
            for (j, tok) in row.iter().enumerate() {
                m[(i, j)] = parse_f64(tok, *line)?;
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------- graphs

/// Parses a DIMACS-style graph: `p edge <n> <m>` followed by `e <u> <v>`
/// lines with 1-based endpoints. `c` lines are comments.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let (g, warnings) = parse_graph_with_warnings(text)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(g)
}

/// Like [`parse_graph`], returning the warnings instead of logging them.
pub fn parse_graph_with_warnings(text: &str) -> Result<(Graph, Vec<String>)> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (line, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks[0] {
            "c" => {}
            "p" => {
                if header.is_some() {
                    return Err(Error::parse(line, "second `p` header"));
                }
                if toks.len() != 4 || toks[1] != "edge" {
                    return Err(Error::parse(line, "malformed header, expected `p edge <n> <m>`"));
                }
                let n = parse_usize(toks[2], line, "vertex count")?;
                let m = parse_usize(toks[3], line, "edge count")?;
                if n == 0 {
                    return Err(Error::parse(line, "graph needs at least one vertex"));
                }
                header = Some((line, n, m));
            }
            "e" => {
                let Some((_, n, _)) = header else {
                    return Err(Error::parse(line, "edge before the `p edge` header"));
                };
                if toks.len() != 3 {
                    return Err(Error::parse(line, "malformed edge, expected `e <u> <v>`"));
                }
                let u = parse_usize(toks[1], line, "vertex")?;
                let v = parse_usize(toks[2], line, "vertex")?;
                for w in [u, v] {
                    if w == 0 || w > n {
                        return Err(Error::parse(line, format!("vertex {w} out of range 1..={n}")));
                    }
                }
                if u == v {
                    return Err(Error::parse(line, format!("self-loop on vertex {u}")));
                }
                let key = (u.min(v) - 1, u.max(v) - 1);
                if let Some(first) = seen.get(&key) {
                    warnings.push(format!(
                        "line {line}: duplicate edge {{{u}, {v}}} (first on line {first}) ignored"
                    ));
                } else {
                    seen.insert(key, line);
                }
                edges.push(key);
            }
            other => return Err(Error::parse(line, format!("unknown record type `{other}`"))),
        }
    }
    let Some((hline, n, m)) = header else {
        return Err(Error::parse(last_line(text), "missing `p edge <n> <m>` header"));
    };
    if edges.len() != m {
        warnings.push(format!(
            "line {hline}: header declares {m} edges, found {} edge lines",
            edges.len()
        ));
    }
    Ok((Graph::new(n, edges)?, warnings))
}

pub fn serialize_graph(g: &Graph) -> String {
    let mut s = format!("p edge {} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "e {} {}", u + 1, v + 1);
    }
    s
}

// ------------------------------------------------------------------- MDPs

const MDP_SECTIONS: [&str; 5] = ["gamma", "n", "k", "mu", "cost"];

fn trans_name(a: usize) -> String {
    format!("trans a={}", a + 1)
}

fn is_trans_section(name: &str) -> bool {
    name.strip_prefix("trans a=")
        .is_some_and(|i| i.parse::<usize>().is_ok())
}

fn mdp_from_sections(sec: &Sections) -> Result<Mdp> {
    let gamma_sec = sec.require("gamma")?;
    let gamma_tok = gamma_sec.scalar()?;
    let (gamma, gamma_exact) = if gamma_tok.contains('/') {
        let r = parse_rational(gamma_tok)
            .ok_or_else(|| Error::parse(gamma_sec.line, format!("`{gamma_tok}` is not a rational")))?;
        (rational::to_f64(&r), Some(r))
    } else {
        (parse_f64(gamma_tok, gamma_sec.line)?, None)
    };
    if !(gamma > 0.0 && gamma < 1.0) || gamma_exact.as_ref().is_some_and(|r| !rational::is_open_unit(r)) {
        return Err(Error::parse(gamma_sec.line, format!("gamma = {gamma_tok} is not in (0, 1)")));
    }

    let n_sec = sec.require("n")?;
    let n = parse_usize(n_sec.scalar()?, n_sec.line, "n")?;
    let k_sec = sec.require("k")?;
    let k = parse_usize(k_sec.scalar()?, k_sec.line, "k")?;
    if n == 0 {
        return Err(Error::parse(n_sec.line, "MDP has no states"));
    }
    if k == 0 {
        return Err(Error::parse(k_sec.line, "MDP has no actions"));
    }

    let mu_sec = sec.require("mu")?;
    let (mu_line, mu_toks) = mu_sec.list()?;
    if mu_toks.len() != n {
        return Err(Error::parse(
            mu_line,
            format!("mu has {} entries, expected {n}", mu_toks.len()),
        ));
    }
    let mu = DVector::from_vec(
        mu_toks
            .iter()
            .map(|t| parse_f64(t, mu_line))
            .collect::<Result<Vec<_>>>()?,
    );
    let cost_sec = sec.require("cost")?;
    let cost = cost_sec.matrix(n, k)?;
    let mut trans = Vec::with_capacity(k);
    let mut lines: HashMap<String, usize> = HashMap::new();
    for a in 0..k {
        let name = trans_name(a);
        let t = sec.require(&name)?;
        trans.push(t.matrix(n, n)?);
        lines.insert(name, t.line);
    }
    if let Some(extra) = sec
        .list
        .iter()
        .find(|s| is_trans_section(s.name) && !lines.contains_key(s.name))
    {
        return Err(Error::parse(
            extra.line,
            format!("`{}` but k = {k}", extra.name),
        ));
    }

    let m = Mdp::from_parts_unchecked(gamma, gamma_exact, mu, cost, trans);
    let report = validate_mdp(&m);
    if let Some(first) = report.violations.first() {
        let section = first.path.split(" column").next().unwrap_or(&first.path);
        let line = match section {
            "mu" => mu_line,
            "cost" => cost_sec.line,
            "gamma" => gamma_sec.line,
            s => lines.get(s).copied().unwrap_or(gamma_sec.line),
        };
        return Err(Error::parse(line, report.to_string()));
    }
    Ok(m)
}

pub fn parse_mdp(text: &str) -> Result<Mdp> {
    let sec = Sections::new(text)?;
    sec.reject_unknown(|s| MDP_SECTIONS.contains(&s) || is_trans_section(s))?;
    mdp_from_sections(&sec)
}

/// Reads a plain MDP file, or the MDP inside a reduction bundle.
pub fn parse_any_mdp(text: &str) -> Result<Mdp> {
    let sec = Sections::new(text)?;
    if BUNDLE_SECTIONS.iter().any(|s| sec.get(s).is_some()) {
        parse_bundle(text).map(|b| b.mdp)
    } else {
        parse_mdp(text)
    }
}

fn write_row<'a>(s: &mut String, values: impl Iterator<Item = &'a f64>) {
    let row: Vec<String> = values.map(|&v| format_f64(v)).collect();
    s.push_str(&row.join(" "));
    s.push('\n');
}

pub fn serialize_mdp(m: &Mdp) -> String {
    let mut s = String::new();
    let gamma = match m.gamma_exact() {
        Some(r) => format_rational(r),
        None => format_f64(m.gamma()),
    };
    let _ = writeln!(s, "gamma: {gamma}");
    let _ = writeln!(s, "n: {}", m.n());
    let _ = writeln!(s, "k: {}", m.k());
    s.push_str("mu: ");
    write_row(&mut s, m.mu().iter());
    s.push_str("cost:\n");
    for row in m.cost().row_iter() {
        write_row(&mut s, row.iter());
    }
    for (a, t) in m.transitions().iter().enumerate() {
        let _ = writeln!(s, "{}:", trans_name(a));
        for row in t.row_iter() {
            write_row(&mut s, row.iter());
        }
    }
    s
}

// --------------------------------------------------------------- sqrt-sum

pub fn parse_sqrtsum(text: &str) -> Result<SqrtSumInstance> {
    let sec = Sections::new(text)?;
    sec.reject_unknown(|s| s == "c" || s == "d")?;
    let c_sec = sec.require("c")?;
    let (line, toks) = c_sec.list()?;
    if toks.is_empty() {
        return Err(Error::parse(line, "c needs at least one integer"));
    }
    let c = toks
        .iter()
        .map(|t| parse_u64(t, line, "c"))
        .collect::<Result<Vec<_>>>()?;
    let d_sec = sec.require("d")?;
    let d = parse_u64(d_sec.scalar()?, d_sec.line, "d")?;
    SqrtSumInstance::new(c, d).map_err(|e| Error::parse(line, e.to_string()))
}

pub fn serialize_sqrtsum(inst: &SqrtSumInstance) -> String {
    let c: Vec<String> = inst.c.iter().map(u64::to_string).collect();
    format!("c: {}\nd: {}\n", c.join(" "), inst.d)
}

// ------------------------------------------------------------ controllers

/// Parses `pi: <k numbers>`. The entries must already sum to one; nothing
/// is renormalized.
pub fn parse_controller(text: &str) -> Result<BlindController> {
    let sec = Sections::new(text)?;
    sec.reject_unknown(|s| s == "pi")?;
    let pi_sec = sec.require("pi")?;
    let (line, toks) = pi_sec.list()?;
    if toks.is_empty() {
        return Err(Error::parse(line, "pi needs at least one entry"));
    }
    let pi = toks
        .iter()
        .map(|t| parse_f64(t, line))
        .collect::<Result<Vec<_>>>()?;
    BlindController::new(pi).map_err(|e| Error::parse(line, e.to_string()))
}

pub fn serialize_controller(pi: &BlindController) -> String {
    let mut s = String::from("pi: ");
    write_row(&mut s, pi.as_slice().iter());
    s
}

// ---------------------------------------------------------------- bundles

const BUNDLE_SECTIONS: [&str; 3] = ["target", "kind", "meta"];

fn meta_fields<'a>(sec: &Section<'a>) -> Result<HashMap<&'a str, &'a str>> {
    let mut out = HashMap::new();
    for tok in &sec.inline {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(sec.line, format!("meta field `{tok}` is not key=value")))?;
        if out.insert(k, v).is_some() {
            return Err(Error::parse(sec.line, format!("meta field `{k}` repeated")));
        }
    }
    Ok(out)
}

fn meta_rational(fields: &HashMap<&str, &str>, key: &str, line: usize) -> Result<Rational> {
    let v = fields
        .get(key)
        .ok_or_else(|| Error::parse(line, format!("meta is missing `{key}`")))?;
    parse_rational(v).ok_or_else(|| Error::parse(line, format!("meta `{key}={v}` is not a rational")))
}

/// Parses an MDP file followed by `target:`, `kind:` and `meta:` lines.
pub fn parse_bundle(text: &str) -> Result<ReductionInstance> {
    let sec = Sections::new(text)?;
    sec.reject_unknown(|s| MDP_SECTIONS.contains(&s) || BUNDLE_SECTIONS.contains(&s) || is_trans_section(s))?;
    let mdp = mdp_from_sections(&sec)?;

    let t = sec.require("target")?;
    let tok = t.scalar()?;
    let target =
        parse_rational(tok).ok_or_else(|| Error::parse(t.line, format!("`{tok}` is not a rational")))?;

    let kind_sec = sec.require("kind")?;
    let meta_sec = sec.require("meta")?;
    let fields = meta_fields(meta_sec)?;
    let line = meta_sec.line;
    let meta = match kind_sec.scalar()? {
        "stable_set" => {
            let j = fields
                .get("j")
                .ok_or_else(|| Error::parse(line, "meta is missing `j`"))
                .and_then(|v| parse_usize(v, line, "j"))?;
            ReductionMeta::StableSet {
                j,
                gamma: meta_rational(&fields, "gamma", line)?,
            }
        }
        "sqrt_sum" => {
            let c = fields
                .get("c")
                .ok_or_else(|| Error::parse(line, "meta is missing `c`"))?
                .split(',')
                .map(|v| parse_u64(v, line, "c"))
                .collect::<Result<Vec<_>>>()?;
            let d = fields
                .get("d")
                .ok_or_else(|| Error::parse(line, "meta is missing `d`"))
                .and_then(|v| parse_u64(v, line, "d"))?;
            ReductionMeta::SqrtSum {
                c,
                d,
                epsilon: meta_rational(&fields, "epsilon", line)?,
                gamma: meta_rational(&fields, "gamma", line)?,
            }
        }
        other => {
            return Err(Error::parse(
                kind_sec.line,
                format!("unknown kind `{other}`, expected stable_set or sqrt_sum"),
            ))
        }
    };
    let gamma = match &meta {
        ReductionMeta::StableSet { gamma, .. } | ReductionMeta::SqrtSum { gamma, .. } => gamma,
    };
    if mdp.gamma_exact() != Some(gamma) {
        return Err(Error::parse(line, "meta gamma differs from the MDP's gamma"));
    }
    Ok(ReductionInstance { mdp, target, meta })
}

pub fn serialize_bundle(inst: &ReductionInstance) -> String {
    let mut s = serialize_mdp(&inst.mdp);
    let _ = writeln!(s, "target: {}", format_rational(&inst.target));
    let _ = writeln!(s, "kind: {}", inst.kind().as_str());
    match &inst.meta {
        ReductionMeta::StableSet { j, gamma } => {
            let _ = writeln!(s, "meta: j={j} gamma={}", format_rational(gamma));
        }
        ReductionMeta::SqrtSum { c, d, epsilon, gamma } => {
            let c: Vec<String> = c.iter().map(u64::to_string).collect();
            let _ = writeln!(
                s,
                "meta: c={} d={d} epsilon={} gamma={}",
                c.join(","),
                format_rational(epsilon),
                format_rational(gamma)
            );
        }
    }
    s
}

// ---------------------------------------------------------------- reports

pub fn serialize_report(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "id: {}", r.id);
    let _ = writeln!(s, "kind: {}", r.kind.as_str());
    let _ = writeln!(s, "verdict: {}", r.verdict.as_str());
    let _ = writeln!(s, "oracle: {}", format_f64(r.oracle_value));
    if let Some(e) = &r.oracle_exact {
        let _ = writeln!(s, "oracle_exact: {}", format_rational(e));
    }
    let _ = writeln!(s, "optimizer: {}", format_f64(r.optimizer_value));
    let _ = writeln!(s, "gap: {}", format_f64(r.gap));
    let _ = writeln!(s, "tolerance: {}", format_f64(r.tolerance));
    let _ = writeln!(s, "target: {}", format_rational(&r.target));
    let _ = writeln!(s, "decision: {}", if r.decision { "YES" } else { "NO" });
    s.push_str("witness: ");
    write_row(&mut s, r.witness.iter());
    for f in &r.flags {
        let _ = writeln!(s, "flag: {f}");
    }
    s
}

/// Reads a report back. Field order is free; `flag:` may repeat.
pub fn parse_report(text: &str) -> Result<VerificationReport> {
    let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
    let mut flags = Vec::new();
    for (line, l) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (key, value) = l
            .split_once(':')
            .ok_or_else(|| Error::parse(line, "expected `key: value`"))?;
        let value = value.trim();
        if key == "flag" {
            flags.push(value.to_string());
        } else if fields.insert(key, (line, value)).is_some() {
            return Err(Error::parse(line, format!("duplicate field `{key}`")));
        }
    }
    let end = last_line(text);
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| Error::parse(end, format!("missing field `{k}`")))
    };
    let num = |k: &str| get(k).and_then(|(line, v)| parse_f64(v, line));
    let rat = |k: &str| {
        get(k).and_then(|(line, v)| {
            parse_rational(v).ok_or_else(|| Error::parse(line, format!("`{v}` is not a rational")))
        })
    };

    let (kline, kind) = get("kind")?;
    let kind = match kind {
        "stable_set" => ReductionKind::StableSet,
        "sqrt_sum" => ReductionKind::SqrtSum,
        other => return Err(Error::parse(kline, format!("unknown kind `{other}`"))),
    };
    let (vline, v) = get("verdict")?;
    let verdict: Verdict = v.parse().map_err(|e: String| Error::parse(vline, e))?;
    let (dline, d) = get("decision")?;
    let decision = match d {
        "YES" => true,
        "NO" => false,
        other => return Err(Error::parse(dline, format!("decision `{other}` is not YES or NO"))),
    };
    let (wline, w) = get("witness")?;
    let witness = w
        .split_whitespace()
        .map(|t| parse_f64(t, wline))
        .collect::<Result<Vec<_>>>()?;
    let oracle_exact = match fields.contains_key("oracle_exact") {
        true => Some(rat("oracle_exact")?),
        false => None,
    };
    if let Some((line, key)) = fields
        .iter()
        .map(|(k, (line, _))| (*line, *k))
        .filter(|(_, k)| !REPORT_FIELDS.contains(k))
        .min()
    {
        return Err(Error::parse(line, format!("unknown field `{key}`")));
    }
    Ok(VerificationReport {
        id: get("id")?.1.to_string(),
        kind,
        oracle_value: num("oracle")?,
        oracle_exact,
        optimizer_value: num("optimizer")?,
        witness,
        gap: num("gap")?,
        tolerance: num("tolerance")?,
        verdict,
        target: rat("target")?,
        decision,
        flags,
    })
}

const REPORT_FIELDS: [&str; 11] = [
    "id",
    "kind",
    "verdict",
    "oracle",
    "oracle_exact",
    "optimizer",
    "gap",
    "tolerance",
    "target",
    "decision",
    "witness",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::reductions::{sqrtsum_to_blind, stableset_to_blind};
    use nalgebra::{dmatrix, dvector};

    const K33: &str = "\
c complete bipartite graph K3,3
c sides {1,2,3} and {4,5,6}
c every vertex has degree 3
c
p edge 6 9
e 1 4
e 1 5
e 1 6
e 2 4
e 2 5
e 2 6
e 3 4
e 3 5
e 3 6
c end
";

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("not a parse error: {other}"),
        }
    }

    #[test]
    fn graphs() {
        let g = parse_graph("p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(g, Graph::complete(3));
        assert_eq!(line_of(parse_graph("p edge 2 1\ne 1 1\n").unwrap_err()), 2);
        assert_eq!(K33.lines().count(), 15);
        let g = parse_graph(K33).unwrap();
        assert_eq!((g.n(), g.edge_count()), (6, 9));
        assert!(g.is_cubic());
        assert_eq!(parse_graph(&serialize_graph(&g)).unwrap(), g);
    }

    #[test]
    fn graph_errors_and_warnings() {
        let (g, w) = parse_graph_with_warnings("p edge 3 3\ne 1 2\ne 2 1\ne 2 3\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("duplicate"));
        assert_eq!(line_of(parse_graph("p edge 3 1\n\ne 1 4\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_graph("p graph 3 1\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_graph("e 1 2\n").unwrap_err()), 1);
        assert!(parse_graph("c nothing\n").is_err());
    }

    fn two_state() -> Mdp {
        Mdp::new(
            0.5,
            dvector![0.8, 0.2],
            dmatrix![-0.8, -0.8; -0.2, -0.2],
            vec![dmatrix![1.0, 0.0; 0.0, 1.0], dmatrix![0.0, 1.0; 1.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn mdp_round_trip() {
        let m = two_state();
        assert_eq!(parse_mdp(&serialize_mdp(&m)).unwrap(), m);
        let tiny = Mdp::new(0.1, dvector![1.0], dmatrix![0.3], vec![dmatrix![1.0]]).unwrap();
        assert_eq!(parse_mdp(&serialize_mdp(&tiny)).unwrap(), tiny);
    }

    #[test]
    fn mdp_layout() {
        let text = "\
# identity and swap
gamma: 1/2
n: 2
k: 2
mu: 0.8 0.2
cost:
-0.8 -0.8
-0.2 -0.2
trans a=1:
1 0
0 1
trans a=2:
0 1
1 0
";
        let m = parse_mdp(text).unwrap();
        assert_eq!(m.gamma_exact(), Some(&ratio(1, 2)));
        assert_eq!(m.trans(1)[(0, 1)], 1.0);
        assert_eq!(serialize_mdp(&m), text.replace("# identity and swap\n", ""));
    }

    #[test]
    fn mdp_errors_carry_lines() {
        let base = serialize_mdp(&two_state());
        let truncated: String = base.lines().take(11).map(|l| format!("{l}\n")).collect();
        let e = parse_mdp(&truncated).unwrap_err();
        assert!(e.to_string().contains("trans a=2"), "{e}");

        let bad_col = base.replacen("trans a=2:\n0 1\n1 0", "trans a=2:\n0 1\n1 0.5", 1);
        let e = parse_mdp(&bad_col).unwrap_err();
        assert!(e.to_string().contains("sums to 1.5"), "{e}");
        assert_eq!(line_of(e), 11);

        let bad_mu = base.replacen("mu: 0.8 0.2", "mu: 0.8 0.1", 1);
        assert_eq!(line_of(parse_mdp(&bad_mu).unwrap_err()), 4);
        let bad_gamma = base.replacen("gamma: 0.5", "gamma: 1", 1);
        assert_eq!(line_of(parse_mdp(&bad_gamma).unwrap_err()), 1);
        let short_row = base.replacen("-0.2 -0.2", "-0.2", 1);
        assert_eq!(line_of(parse_mdp(&short_row).unwrap_err()), 7);
        let unknown = format!("{base}extra: 1\n");
        assert_eq!(line_of(parse_mdp(&unknown).unwrap_err()), 14);
    }

    #[test]
    fn bundles() {
        let inst = sqrtsum_to_blind(&SqrtSumInstance::new(vec![4, 9], 5).unwrap()).unwrap();
        let text = serialize_bundle(&inst);
        assert!(text.starts_with("gamma: 24/25\n"));
        assert!(text.contains("target: 25/52\n"));
        assert!(text.contains("meta: c=4,9 d=5 epsilon=24 gamma=24/25\n"));
        assert_eq!(parse_bundle(&text).unwrap(), inst);

        let inst = stableset_to_blind(&Graph::complete(4), 1, &ratio(9, 10)).unwrap();
        let text = serialize_bundle(&inst);
        assert!(text.contains("target: 10/9\n"));
        assert!(text.contains("meta: j=1 gamma=9/10\n"));
        assert_eq!(parse_bundle(&text).unwrap(), inst);

        let plain = serialize_mdp(&inst.mdp);
        assert!(parse_bundle(&plain).unwrap_err().to_string().contains("target"));
        assert!(parse_mdp(&text).is_err());
    }

    #[test]
    fn sqrtsum_and_controllers() {
        let i = parse_sqrtsum("c: 4 9\nd: 5\n").unwrap();
        assert_eq!((i.c.clone(), i.d), (vec![4, 9], 5));
        assert_eq!(parse_sqrtsum(&serialize_sqrtsum(&i)).unwrap(), i);
        assert_eq!(line_of(parse_sqrtsum("c: 4 -9\nd: 5\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_sqrtsum("c:\nd: 5\n").unwrap_err()), 1);

        let pi = parse_controller("pi: 0.5 0.5").unwrap();
        assert_eq!(pi, BlindController::uniform(2));
        let e = parse_controller("pi: 0.5 0.6").unwrap_err();
        assert!(e.to_string().contains("1.1"), "{e}");
        assert!(parse_controller("pi: 1.5 -0.5").is_err());
        assert!(parse_controller("pi:").is_err());
        let p = BlindController::new(vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(parse_controller(&serialize_controller(&p)).unwrap(), p);
    }

    #[test]
    fn reports() {
        let r = VerificationReport {
            id: "k33".into(),
            kind: ReductionKind::StableSet,
            oracle_value: 11.0 / 27.0,
            oracle_exact: Some(ratio(11, 27)),
            optimizer_value: 0.40740740740741,
            witness: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0],
            gap: 3.7e-15,
            tolerance: 1e-6,
            verdict: Verdict::Match,
            target: ratio(11, 27),
            decision: true,
            flags: vec!["one".into(), "two: with colon".into()],
        };
        assert_eq!(parse_report(&serialize_report(&r)).unwrap(), r);
    }

    #[test]
    fn number_formatting() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e20, 0.0, 123456.789] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_f64(1.0), "1");
        assert_eq!(parse_f64("1/3", 1).unwrap(), 1.0 / 3.0);
        assert!(parse_f64("inf", 1).is_err());
        assert!(parse_f64("NaN", 1).is_err());
    }
}
