//! Run transcripts: a sectioned text form and a JSON form with the same
//! field names.
//!
//! ```text
//! [hypergraph]
//! m 4
//! e 1 2 3
//! [params]
//! n 1
//! pipeline kmt
//! [packing]
//! part anchor=1 0:1
//! [scheme]
//! rows 1
//! row 1 1
//! [key]
//! rows 0
//! [audit]
//! method rank
//! ...
//! ```
//!
//! Bit strings list coordinates in canonical order. Rates are `p/q`.
//! Parsing checks the field names in `[audit]` but drops the values, since
//! audits are recomputed from the rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::audit::{AuditMethod, AuditReport};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::hypergraph::{EdgeCopy, Hypergraph, Vertex};
use crate::packing::{PartLabel, PlanPart};
use crate::protocol::{KeySpec, LinearScheme, SchemeRow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub pipeline: String,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingSection {
    pub parts: Vec<PlanPart>,
    /// Edge reuse numbers, when the plan came from the 3-uniform assembler.
    pub reuse: Option<Vec<u32>>,
}

/// Everything a re-audit needs, plus the audit that was run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub hypergraph: Hypergraph,
    pub params: Params,
    pub packing: Option<PackingSection>,
    pub scheme: LinearScheme,
    pub key: KeySpec,
    pub audit: Option<AuditReport>,
}

fn yes(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn part_line(part: &PlanPart) -> String {
    let mut s = format!("part anchor={}", part.label.anchor);
    if let Some(c) = part.label.cycle {
        let _ = write!(s, " cycle={c}");
    }
    for c in &part.copies {
        let _ = write!(s, " {c}");
    }
    s
}

/// The `[audit]` section body.
pub fn audit_text(a: &AuditReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method {}", a.method);
    // Sampling alone never proves a verdict; it only fails to refute one.
    let evidence = match a.method {
        AuditMethod::MonteCarlo => "consistent_with",
        _ => "proved",
    };
    let _ = writeln!(s, "evidence {evidence}");
    let _ = writeln!(s, "recoverable {}", yes(a.recoverable));
    for d in &a.party_diagnostics {
        let _ = writeln!(s, "diagnostic {d}");
    }
    let _ = writeln!(s, "secret {}", yes(a.secret));
    let _ = writeln!(s, "uniform {}", yes(a.uniform));
    let _ = writeln!(s, "key_bits {}", a.key_bits);
    let _ = writeln!(s, "n {}", a.n);
    let _ = writeln!(s, "rate {}", a.rate);
    if let Some(c) = a.capacity {
        let _ = writeln!(s, "capacity {c}");
    }
    if let Some(g) = a.capacity_gap {
        let _ = writeln!(s, "capacity_gap {g}");
    }
    if let Some(r) = a.realizations {
        let _ = writeln!(s, "realizations {r}");
    }
    if let Some(n) = a.samples {
        let _ = writeln!(s, "samples {n}");
    }
    if let Some(seed) = a.seed {
        let _ = writeln!(s, "seed {seed}");
    }
    for f in &a.flags {
        let _ = writeln!(s, "flag {f}");
    }
    s
}

impl Transcript {
    pub fn to_text(&self) -> String {
        let mut s = String::from("[hypergraph]\n");
        s.push_str(&self.hypergraph.to_string());
        let _ = writeln!(
            s,
            "[params]\nn {}\npipeline {}",
            self.params.n, self.params.pipeline
        );
        for note in &self.params.notes {
            let _ = writeln!(s, "note {note}");
        }
        if let Some(p) = &self.packing {
            s.push_str("[packing]\n");
            for part in &p.parts {
                let _ = writeln!(s, "{}", part_line(part));
            }
            if let Some(reuse) = &p.reuse {
                let t: Vec<String> = reuse.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "reuse {}", t.join(" "));
            }
        }
        let _ = writeln!(s, "[scheme]\nrows {}", self.scheme.len());
        for row in self.scheme.rows() {
            let _ = writeln!(s, "row {} {}", row.sender, row.mask);
        }
        let _ = writeln!(s, "[key]\nrows {}", self.key.len());
        for row in self.key.rows().rows() {
            let _ = writeln!(s, "row {row}");
        }
        if let Some(a) = &self.audit {
            s.push_str("[audit]\n");
            s.push_str(&audit_text(a));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let json = TranscriptJson {
            hypergraph: self.hypergraph.clone(),
            params: self.params.clone(),
            packing: self.packing.as_ref().map(|p| PackingJson {
                parts: p
                    .parts
                    .iter()
                    .map(|part| PartJson {
                        anchor: part.label.anchor,
                        cycle: part.label.cycle,
                        copies: part.copies.iter().map(|c| c.to_string()).collect(),
                    })
                    .collect(),
                reuse: p.reuse.clone(),
            }),
            scheme: SchemeJson {
                rows: self.scheme.rows().to_vec(),
            },
            key: KeyJson {
                rows: self.key.rows().rows().to_vec(),
            },
            audit: self.audit.clone(),
        };
        let mut s = serde_json::to_string_pretty(&json).expect("transcript serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Transcript> {
        let j: TranscriptJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let n = j.params.n;
        let h = j.hypergraph;
        let packing = match j.packing {
            None => None,
            Some(p) => Some(PackingSection {
                parts: p
                    .parts
                    .into_iter()
                    .map(|part| {
                        Ok(PlanPart {
                            label: PartLabel {
                                anchor: part.anchor,
                                cycle: part.cycle,
                            },
                            copies: part
                                .copies
                                .iter()
                                .map(|c| {
                                    parse_copy(c).map_err(|m| Error::Parse {
                                        line: 0,
                                        message: m,
                                    })
                                })
                                .collect::<Result<_>>()?,
                        })
                    })
                    .collect::<Result<_>>()?,
                reuse: p.reuse,
            }),
        };
        let width = n as usize * h.edge_count();
        let scheme = LinearScheme::new(h.clone(), n, j.scheme.rows)?;
        let key = KeySpec::new_unchecked(h.clone(), n, BitMatrix::from_rows(width, j.key.rows)?)?;
        Ok(Transcript {
            hypergraph: h,
            params: j.params,
            packing,
            scheme,
            key,
            audit: j.audit,
        })
    }

    /// Parses the text form. Errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Transcript> {
        Parser::new(text).run()
    }
}

#[derive(Serialize, Deserialize)]
struct PartJson {
    anchor: Vertex,
    cycle: Option<u32>,
    copies: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct PackingJson {
    parts: Vec<PartJson>,
    reuse: Option<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct SchemeJson {
    rows: Vec<SchemeRow>,
}

#[derive(Serialize, Deserialize)]
struct KeyJson {
    rows: Vec<BitVector>,
}

#[derive(Serialize, Deserialize)]
struct TranscriptJson {
    hypergraph: Hypergraph,
    params: Params,
    packing: Option<PackingJson>,
    scheme: SchemeJson,
    key: KeyJson,
    audit: Option<AuditReport>,
}

fn parse_copy(token: &str) -> std::result::Result<EdgeCopy, String> {
    let (e, c) = token
        .split_once(':')
        .ok_or_else(|| format!("expected edge:copy, got {token:?}"))?;
    let edge = e
        .parse()
        .map_err(|_| format!("bad edge index in {token:?}"))?;
    let copy: u32 = c
        .parse()
        .map_err(|_| format!("bad copy index in {token:?}"))?;
    if copy == 0 {
        return Err(format!("copy indices start at 1, got {token:?}"));
    }
    Ok(EdgeCopy::new(edge, copy))
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        let all: Vec<&str> = text.lines().collect();
        Parser {
            lines: all
                .iter()
                .enumerate()
                .map(|(k, l)| (k + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
                .collect(),
            pos: 0,
            last_line: all.len(),
        }
    }

    fn err(line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Line number of the next line, or one past the end.
    fn here(&self) -> usize {
        self.lines.get(self.pos).map_or(self.last_line + 1, |l| l.0)
    }

    fn header(&mut self, name: &str) -> Result<()> {
        match self.lines.get(self.pos) {
            Some(&(_, l)) if l == format!("[{name}]") => {
                self.pos += 1;
                Ok(())
            }
            Some(&(n, l)) => Err(Self::err(n, format!("expected [{name}], found {l:?}"))),
            None => Err(Self::err(self.here(), format!("missing [{name}] section"))),
        }
    }

    fn peek_header(&self, name: &str) -> bool {
        self.lines
            .get(self.pos)
            .is_some_and(|&(_, l)| l == format!("[{name}]"))
    }

    /// Lines up to the next section header.
    fn body(&mut self) -> Vec<(usize, &'a str)> {
        let start = self.pos;
        while self
            .lines
            .get(self.pos)
            .is_some_and(|&(_, l)| !l.starts_with('['))
        {
            self.pos += 1;
        }
        self.lines[start..self.pos].to_vec()
    }

    fn keyword<'b>(line: usize, text: &'b str, key: &str) -> Result<&'b str> {
        match text.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.trim()),
            _ if text == key => Ok(""),
            _ => Err(Self::err(
                line,
                format!("expected `{key} ...`, found {text:?}"),
            )),
        }
    }

    /// `rows N` followed by exactly `N` row lines.
    fn rows(&mut self, section: &str) -> Result<Vec<(usize, &'a str)>> {
        let body = self.body();
        let end = self.here();
        let Some(&(n, first)) = body.first() else {
            return Err(Self::err(
                end,
                format!("[{section}] is missing its `rows` line"),
            ));
        };
        let count: usize = Self::keyword(n, first, "rows")?
            .parse()
            .map_err(|_| Self::err(n, "row count must be a non-negative integer"))?;
        let rows: Vec<(usize, &str)> = body[1..].to_vec();
        if rows.len() < count {
            return Err(Self::err(
                end,
                format!("[{section}] declares {count} rows but has {}", rows.len()),
            ));
        }
        if rows.len() > count {
            return Err(Self::err(
                rows[count].0,
                format!("[{section}] declares {count} rows; this one is extra"),
            ));
        }
        rows.iter()
            .map(|&(l, t)| Ok((l, Self::keyword(l, t, "row")?)))
            .collect()
    }

    fn run(mut self) -> Result<Transcript> {
        self.header("hypergraph")?;
        let hg_lines = self.body();
        let first = hg_lines.first().map_or(self.here(), |l| l.0);
        let hg_text: String = hg_lines.iter().map(|(_, l)| format!("{l}\n")).collect();
        let h: Hypergraph = hg_text.parse().map_err(|e| match e {
            Error::Parse { line, message } => {
                let at = hg_lines.get(line.wrapping_sub(1)).map_or(first, |l| l.0);
                Self::err(at, message)
            }
            other => Self::err(first, other.to_string()),
        })?;

        self.header("params")?;
        let mut n = None;
        let mut pipeline = String::new();
        let mut notes = Vec::new();
        for (l, t) in self.body() {
            let (k, v) = t.split_once(' ').unwrap_or((t, ""));
            match k {
                "n" => {
                    n = Some(
                        v.parse::<u32>()
                            .ok()
                            .filter(|&n| n > 0)
                            .ok_or_else(|| Self::err(l, "n must be a positive integer"))?,
                    )
                }
                "pipeline" => pipeline = v.to_string(),
                "note" => notes.push(v.to_string()),
                other => return Err(Self::err(l, format!("unknown parameter {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| Self::err(self.here(), "[params] is missing `n`"))?;
        let width = n as usize * h.edge_count();

        let mut packing = None;
        if self.peek_header("packing") {
            self.header("packing")?;
            let mut parts = Vec::new();
            let mut reuse = None;
            for (l, t) in self.body() {
                let mut tokens = t.split_whitespace();
                match tokens.next() {
                    Some("part") => {
                        let mut anchor = None;
                        let mut cycle = None;
                        let mut copies = Vec::new();
                        for tok in tokens {
                            if let Some(v) = tok.strip_prefix("anchor=") {
                                anchor = Some(v.parse().map_err(|_| Self::err(l, "bad anchor"))?);
                            } else if let Some(v) = tok.strip_prefix("cycle=") {
                                cycle = Some(v.parse().map_err(|_| Self::err(l, "bad cycle id"))?);
                            } else {
                                copies.push(parse_copy(tok).map_err(|m| Self::err(l, m))?);
                            }
                        }
                        let anchor = anchor.ok_or_else(|| Self::err(l, "part without anchor="))?;
                        parts.push(PlanPart {
                            label: PartLabel { anchor, cycle },
                            copies,
                        });
                    }
                    Some("reuse") => {
                        reuse = Some(
                            tokens
                                .map(|x| x.parse::<u32>())
                                .collect::<std::result::Result<Vec<_>, _>>()
                                .map_err(|_| Self::err(l, "bad reuse number"))?,
                        );
                    }
                    _ => return Err(Self::err(l, format!("unexpected packing line {t:?}"))),
                }
            }
            packing = Some(PackingSection { parts, reuse });
        }

        self.header("scheme")?;
        let mut rows = Vec::new();
        for (l, t) in self.rows("scheme")? {
            let (sender, bits) = t
                .split_once(' ')
                .ok_or_else(|| Self::err(l, "expected `row <sender> <bits>`"))?;
            let sender: Vertex = sender.parse().map_err(|_| Self::err(l, "bad sender"))?;
            let mask: BitVector = bits
                .trim()
                .parse()
                .map_err(|e: Error| Self::err(l, e.to_string()))?;
            if mask.width() != width {
                return Err(Self::err(
                    l,
                    format!("row has {} bits, expected {width}", mask.width()),
                ));
            }
            rows.push((l, SchemeRow { sender, mask }));
        }
        let mut checked = Vec::with_capacity(rows.len());
        for (l, row) in rows {
            LinearScheme::new(h.clone(), n, vec![row.clone()])
                .map_err(|e| Self::err(l, e.to_string()))?;
            checked.push(row);
        }
        let scheme = LinearScheme::new(h.clone(), n, checked)?;

        self.header("key")?;
        let mut key_rows = BitMatrix::new(width);
        for (l, t) in self.rows("key")? {
            let v: BitVector = t.parse().map_err(|e: Error| Self::err(l, e.to_string()))?;
            key_rows.push(v).map_err(|e| Self::err(l, e.to_string()))?;
        }
        let key = KeySpec::new_unchecked(h.clone(), n, key_rows)?;

        if self.peek_header("audit") {
            self.header("audit")?;
            const KEYS: [&str; 15] = [
                "method",
                "evidence",
                "recoverable",
                "diagnostic",
                "secret",
                "uniform",
                "key_bits",
                "n",
                "rate",
                "capacity",
                "capacity_gap",
                "realizations",
                "samples",
                "seed",
                "flag",
            ];
            for (l, t) in self.body() {
                let k = t.split_whitespace().next().unwrap_or("");
                if !KEYS.contains(&k) {
                    return Err(Self::err(l, format!("unknown audit field {k:?}")));
                }
            }
        }
        if let Some(&(l, t)) = self.lines.get(self.pos) {
            return Err(Self::err(l, format!("unexpected line {t:?}")));
        }
        Ok(Transcript {
            hypergraph: h,
            params: Params { n, pipeline, notes },
            packing,
            scheme,
            key,
            audit: None,
        })
    }
}
