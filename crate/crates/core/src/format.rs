//! Line-based text formats for graphs and QAP instances.
//!
//! Graphs: `n <count>`, then `e <u> <v> [weight]` and `c <v> <colour>` lines.
//! QAP instances: `qap <n>`, then `q <v> <v'> <w> <w'> <value>` lines.
//! `#` starts a comment in both.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num::Zero;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::qap::QapInstance;
use crate::rational::{format_rational, parse_rational, Rational};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_index(line: usize, field: &str, n: usize) -> Result<usize> {
    let v: usize = field
        .parse()
        .map_err(|_| parse_err(line, format!("expected a vertex index, found `{field}`")))?;
    if v >= n {
        return Err(parse_err(line, format!("vertex {v} out of range for order {n}")));
    }
    Ok(v)
}

fn parse_header<'a>(lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>, keyword: &str) -> Result<usize> {
    let (line, fields) = lines
        .next()
        .ok_or_else(|| parse_err(1, format!("missing `{keyword} <count>` header")))?;
    if fields.len() != 2 || fields[0] != keyword {
        return Err(parse_err(line, format!("expected `{keyword} <count>` header")));
    }
    fields[1]
        .parse()
        .map_err(|_| parse_err(line, format!("invalid order `{}`", fields[1])))
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines, "n")?;
    let mut edges: Vec<(usize, usize, usize, Option<Rational>)> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut colours: BTreeMap<usize, u32> = BTreeMap::new();
    for (line, fields) in lines {
        match fields[0] {
            "e" if fields.len() == 3 || fields.len() == 4 => {
                let u = parse_index(line, fields[1], n)?;
                let v = parse_index(line, fields[2], n)?;
                if u == v {
                    return Err(parse_err(line, format!("self-loop at vertex {u}")));
                }
                if !seen.insert((u.min(v), u.max(v))) {
                    return Err(parse_err(line, format!("duplicate edge {u} {v}")));
                }
                let weight = match fields.get(3) {
                    Some(w) => {
                        let w = parse_rational(w).map_err(|e| parse_err(line, e.to_string()))?;
                        if w.is_zero() {
                            return Err(parse_err(line, "edge weight must be nonzero"));
                        }
                        Some(w)
                    }
                    None => None,
                };
                edges.push((line, u, v, weight));
            }
            "c" if fields.len() == 3 => {
                let v = parse_index(line, fields[1], n)?;
                let c: u32 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(line, format!("invalid colour `{}`", fields[2])))?;
                if colours.insert(v, c).is_some() {
                    return Err(parse_err(line, format!("vertex {v} coloured twice")));
                }
            }
            "e" | "c" => return Err(parse_err(line, format!("wrong number of fields for `{}`", fields[0]))),
            other => return Err(parse_err(line, format!("unknown line type `{other}`"))),
        }
    }
    let weighted = edges.iter().any(|e| e.3.is_some());
    let mut g = Graph::empty(n);
    for (line, u, v, w) in edges {
        let added = if weighted {
            g.add_weighted_edge(u, v, w.unwrap_or_else(|| Rational::from_integer(1.into())))
        } else {
            g.add_edge(u, v)
        };
        added.map_err(|e| parse_err(line, e.to_string()))?;
    }
    if !colours.is_empty() {
        let mut all = vec![0; n];
        for (v, c) in colours {
            all[v] = c;
        }
        g = g.with_colours(all)?;
    }
    Ok(g)
}

pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    if let Some(colours) = g.colours() {
        for (v, c) in colours.iter().enumerate() {
            writeln!(out, "c {v} {c}").unwrap();
        }
    }
    for (u, v) in g.edges() {
        if g.is_weighted() {
            writeln!(out, "e {u} {v} {}", format_rational(&g.weight(u, v))).unwrap();
        } else {
            writeln!(out, "e {u} {v}").unwrap();
        }
    }
    out
}

pub fn parse_qap(text: &str) -> Result<QapInstance> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines, "qap")?;
    let mut entries = BTreeMap::new();
    for (line, fields) in lines {
        if fields[0] != "q" || fields.len() != 6 {
            return Err(parse_err(line, "expected `q <v> <v'> <w> <w'> <value>`"));
        }
        let mut idx = [0; 4];
        for (slot, field) in idx.iter_mut().zip(&fields[1..5]) {
            *slot = parse_index(line, field, n)?;
        }
        let value = parse_rational(fields[5]).map_err(|e| parse_err(line, e.to_string()))?;
        if entries.insert(idx, value).is_some() {
            return Err(parse_err(line, "coefficient listed twice"));
        }
    }
    QapInstance::from_entries(n, entries)
}

pub fn serialize_qap(q: &QapInstance) -> String {
    let mut out = format!("qap {}\n", q.n());
    for ([v, vp, w, wp], c) in q.nonzero_entries() {
        writeln!(out, "q {v} {vp} {w} {wp} {}", format_rational(&c)).unwrap();
    }
    out
}

pub fn read_graph(path: impl AsRef<std::path::Path>) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn read_qap(path: impl AsRef<std::path::Path>) -> Result<QapInstance> {
    parse_qap(&std::fs::read_to_string(path)?)
}
