//! Line-oriented text format for explicit hypothesis spaces.
//!
//! ```text
//! # comment
//! k=3 n=4 dim=1
//! weights 0.25 0.25 0.25 0.25
//! 1 1 2 3
//! 2 1 2 3
//! ```
//!
//! The `weights` row is optional (uniform otherwise) and so is `dim=`.

use std::fmt::Write as _;

use super::{Domain, Hypothesis, HypothesisSpace, Label};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_space(text: &str) -> Result<(Domain, HypothesisSpace)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let (mut k, mut n, mut dim) = (None, None, None);
    for field in header.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| parse_err(hline, format!("header field `{field}` is not key=value")))?;
        let v: usize = val
            .parse()
            .map_err(|_| parse_err(hline, format!("`{val}` is not an integer")))?;
        match key {
            "k" => k = Some(v),
            "n" => n = Some(v),
            "dim" => dim = Some(v),
            _ => return Err(parse_err(hline, format!("unknown header key `{key}`"))),
        }
    }
    let k = k.ok_or_else(|| parse_err(hline, "header lacks k="))?;
    let k = Label::try_from(k).map_err(|_| parse_err(hline, "k too large"))?;
    let n = n.ok_or_else(|| parse_err(hline, "header lacks n="))?;

    let mut weights = None;
    let mut hyps = Vec::new();
    for (ln, line) in lines {
        let mut toks = line.split_whitespace().peekable();
        if toks.peek() == Some(&"weights") {
            toks.next();
            if weights.is_some() || !hyps.is_empty() {
                return Err(parse_err(ln, "weights row must come once, before label rows"));
            }
            let w: Vec<f64> = toks
                .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad weight `{t}`"))))
                .collect::<Result<_>>()?;
            if w.len() != n {
                return Err(parse_err(ln, format!("{} weights for n={n}", w.len())));
            }
            weights = Some(w);
            continue;
        }
        let row: Vec<Label> = toks
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad label `{t}`"))))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(parse_err(ln, format!("{} labels for n={n}", row.len())));
        }
        hyps.push(Hypothesis::new(row));
    }
    let dom = match weights {
        Some(w) => Domain::new(w)?,
        None => Domain::uniform(n)?,
    };
    let space = HypothesisSpace::new(k, hyps, dim)?;
    Ok((dom, space))
}

pub fn write_space(dom: &Domain, space: &HypothesisSpace) -> String {
    let mut out = format!("k={} n={}", space.k(), space.domain_size());
    if let Some(d) = space.natarajan_dim() {
        let _ = write!(out, " dim={d}");
    }
    out.push('\n');
    if !dom.is_uniform() {
        out.push_str("weights");
        for w in dom.weights() {
            let _ = write!(out, " {w:?}");
        }
        out.push('\n');
    }
    for h in space.hypotheses() {
        let row: Vec<String> = h.labels().iter().map(|l| l.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
