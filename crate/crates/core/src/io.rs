//! Text formats. Files use 1-based vertex ids; everything in memory is 0-based.
//!
//! ```text
//! hyg <n> <m> <k>        xor <n> <m> <k>
//! 1 2                    +1 1 2
//! ```

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Sign, XorInstance};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct Header {
    n: u32,
    m: usize,
    k: usize,
}

fn parse_header(line: Option<&str>, tag: &str) -> Result<Header> {
    let line = line.ok_or_else(|| parse_err(1, "missing header"))?;
    let tok: Vec<&str> = line.split_whitespace().collect();
    if tok.len() != 4 || tok[0] != tag {
        return Err(parse_err(1, format!("expected header `{tag} <n> <m> <k>`, found `{line}`")));
    }
    let num = |s: &str, what: &str| -> Result<u64> {
        s.parse().map_err(|_| parse_err(1, format!("{what} `{s}` is not a non-negative integer")))
    };
    let n = num(tok[1], "n")?;
    let m = num(tok[2], "m")?;
    let k = num(tok[3], "k")?;
    if n > u32::MAX as u64 {
        return Err(parse_err(1, "n too large"));
    }
    if k == 0 {
        return Err(parse_err(1, "k must be positive"));
    }
    Ok(Header { n: n as u32, m: m as usize, k: k as usize })
}

fn parse_clause(tokens: &[&str], h: &Header, line: usize) -> Result<Vec<u32>> {
    if tokens.len() != h.k {
        return Err(parse_err(line, format!("expected {} vertices, found {}", h.k, tokens.len())));
    }
    let mut e = Vec::with_capacity(h.k);
    for t in tokens {
        let v: u64 = t
            .parse()
            .map_err(|_| parse_err(line, format!("vertex `{t}` is not a positive integer")))?;
        if v == 0 || v > h.n as u64 {
            return Err(parse_err(line, format!("vertex {v} outside 1..={}", h.n)));
        }
        e.push(v as u32 - 1);
    }
    e.sort_unstable();
    if let Some(w) = e.windows(2).find(|w| w[0] == w[1]) {
        return Err(parse_err(line, format!("vertex {} repeated in a clause", w[0] + 1)));
    }
    Ok(e)
}

/// Data lines with their 1-based line numbers; trailing blank lines are ignored.
fn body(text: &str) -> (Option<&str>, Vec<(usize, &str)>) {
    let mut lines = text.lines();
    let header = lines.next();
    let mut rest: Vec<(usize, &str)> = lines.enumerate().map(|(i, l)| (i + 2, l)).collect();
    while rest.last().is_some_and(|(_, l)| l.trim().is_empty()) {
        rest.pop();
    }
    (header, rest)
}

fn check_count(h: &Header, found: usize, last_line: usize) -> Result<()> {
    if found != h.m {
        return Err(parse_err(
            last_line,
            format!("header promises {} clauses, found {found}", h.m),
        ));
    }
    Ok(())
}

pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let (header, lines) = body(text);
    let h = parse_header(header, "hyg")?;
    let mut edges = Vec::with_capacity(h.m);
    for &(no, l) in &lines {
        let tok: Vec<&str> = l.split_whitespace().collect();
        edges.push(parse_clause(&tok, &h, no)?);
    }
    check_count(&h, edges.len(), lines.last().map_or(1, |x| x.0))?;
    Hypergraph::new(h.n, h.k, edges)
}

pub fn parse_xor(text: &str) -> Result<XorInstance> {
    let (header, lines) = body(text);
    let h = parse_header(header, "xor")?;
    let mut edges = Vec::with_capacity(h.m);
    let mut signs: Vec<Sign> = Vec::with_capacity(h.m);
    for &(no, l) in &lines {
        let tok: Vec<&str> = l.split_whitespace().collect();
        let (sign, rest) = tok
            .split_first()
            .ok_or_else(|| parse_err(no, "empty clause line"))?;
        signs.push(match *sign {
            "+1" | "1" => 1,
            "-1" => -1,
            other => return Err(parse_err(no, format!("sign `{other}` is not +1 or -1"))),
        });
        edges.push(parse_clause(rest, &h, no)?);
    }
    check_count(&h, edges.len(), lines.last().map_or(1, |x| x.0))?;
    XorInstance::new(Hypergraph::new(h.n, h.k, edges)?, signs)
}

pub fn hypergraph_to_string(h: &Hypergraph) -> String {
    let mut out = format!("hyg {} {} {}\n", h.n(), h.m(), h.k());
    for e in h.edges() {
        let line: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn xor_to_string(inst: &XorInstance) -> String {
    let h = inst.hypergraph();
    let mut out = format!("xor {} {} {}\n", h.n(), h.m(), h.k());
    for (e, &b) in h.edges().iter().zip(inst.signs()) {
        let line: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(out, "{} {}", if b > 0 { "+1" } else { "-1" }, line.join(" ")).unwrap();
    }
    out
}

/// SHA-256 of the canonical text of an instance, in hex.
pub fn instance_digest(inst: &XorInstance) -> String {
    hex::encode(Sha256::digest(xor_to_string(inst).as_bytes()))
}
