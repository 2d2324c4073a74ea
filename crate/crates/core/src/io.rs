//! Reading profiles and apportionment problems, and rendering traces.
//!
//! Profiles come as JSON, `{"candidates": [...], "rounds": [[...], ...],
//! "repeat": bool}`, or as CSV with one row of integer scores per round and
//! an optional header row of candidate names. Machine formats write exact
//! values as strings (`"3/10"`, `"12"`); decimals appear only next to them.

use crate::apportionment::{ApportionmentProblem, Method};
use crate::error::{Error, Result};
use crate::modified::ModifiedTrace;
use crate::original::OriginalTrace;
use crate::profile::{default_labels, Profile, Round, Rounds};
use crate::scalar::{parse_rational, Rational, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::{self, Write as _};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!("unknown output format {s:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

fn parse_error(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parses a JSON or CSV profile. JSON is recognized by a leading `{`.
pub fn parse_profile(bytes: &[u8]) -> Result<Profile> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_error(format!("input is not UTF-8: {e}")))?;
    if text.trim_start().starts_with('{') {
        parse_json_profile(text)
    } else {
        parse_csv_profile(text)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    candidates: Option<Vec<String>>,
    rounds: Vec<Vec<Value>>,
    #[serde(default)]
    repeat: bool,
}

fn json_score(cell: &Value, round: usize, candidate: usize) -> Result<BigInt> {
    let at = || format!("round {round}, candidate {candidate}");
    let n = match cell {
        Value::Number(n) => {
            if let Some(v) = n.as_i64() {
                BigInt::from(v)
            } else if let Some(v) = n.as_u64() {
                BigInt::from(v)
            } else {
                return Err(parse_error(format!("score is not an integer, {}", at())));
            }
        }
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| parse_error(format!("score is not an integer, {}", at())))?,
        _ => return Err(parse_error(format!("score is not an integer, {}", at()))),
    };
    if n.is_negative() {
        return Err(parse_error(format!("negative score, {}", at())));
    }
    Ok(n)
}

/// Validates raw score rows and assembles the profile. Rows and columns in
/// messages count from 1.
fn build_profile(candidates: Option<Vec<String>>, rows: Vec<Vec<BigInt>>, repeat: bool) -> Result<Profile> {
    if rows.is_empty() {
        return Err(parse_error("profile has no rounds"));
    }
    let m = candidates.as_ref().map_or(rows[0].len(), Vec::len);
    let mut rounds = Vec::with_capacity(rows.len());
    for (r, row) in rows.into_iter().enumerate() {
        if row.is_empty() {
            return Err(parse_error(format!("empty round {}", r + 1)));
        }
        if row.len() != m {
            return Err(parse_error(format!(
                "round {} has {} scores, expected {m}",
                r + 1,
                row.len()
            )));
        }
        let round = Round::new(row).map_err(|e| parse_error(format!("round {}: {e}", r + 1)))?;
        rounds.push(round);
    }
    let candidates = candidates.unwrap_or_else(|| default_labels(m));
    let rounds = if repeat {
        if rounds.len() != 1 {
            return Err(parse_error("a repeated profile must have exactly one round"));
        }
        Rounds::Fixed(rounds.pop().unwrap())
    } else {
        Rounds::Varying(rounds)
    };
    Profile::new(candidates, rounds)
}

fn parse_json_profile(text: &str) -> Result<Profile> {
    let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| parse_error(format!("invalid profile JSON: {e}")))?;
    let mut rows = Vec::with_capacity(doc.rounds.len());
    for (r, cells) in doc.rounds.iter().enumerate() {
        let row = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| json_score(cell, r + 1, c + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    build_profile(doc.candidates, rows, doc.repeat)
}

fn parse_csv_profile(text: &str) -> Result<Profile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut candidates = None;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(format!("invalid CSV: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let is_header = line == 0 && record.iter().any(|c| c.parse::<BigInt>().is_err());
        if is_header {
            candidates = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let r = rows.len() + 1;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let n: BigInt = cell
                    .parse()
                    .map_err(|_| parse_error(format!("score is not an integer, round {r}, candidate {}", c + 1)))?;
                if n.is_negative() {
                    return Err(parse_error(format!("negative score, round {r}, candidate {}", c + 1)));
                }
                Ok(n)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    build_profile(candidates, rows, false)
}

/// Writes a profile so that [`parse_profile`] reads it back unchanged. CSV
/// cannot mark a round as repeated, so fixed profiles need JSON.
pub fn render_profile(profile: &Profile, format: Format) -> Result<String> {
    let rows: Vec<&Round> = match profile.rounds() {
        Rounds::Fixed(r) => vec![r],
        Rounds::Varying(rs) => rs.iter().collect(),
    };
    match format {
        Format::Json => {
            let rounds: Vec<Vec<Value>> = rows
                .iter()
                .map(|r| r.scores().iter().map(int_value).collect())
                .collect();
            let doc = json!({
                "candidates": profile.candidates(),
                "rounds": rounds,
                "repeat": profile.is_fixed(),
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("JSON value")))
        }
        Format::Csv | Format::Text => {
            if profile.is_fixed() {
                return Err(Error::Validation("a fixed profile can only be written as JSON".into()));
            }
            let mut w = csv_writer();
            w.write_record(profile.candidates()).map_err(csv_error)?;
            for r in rows {
                w.write_record(r.scores().iter().map(|s| s.to_string()))
                    .map_err(csv_error)?;
            }
            finish_csv(w)
        }
    }
}

/// A JSON number when it fits in 64 bits, a decimal string otherwise.
fn int_value(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(n.to_string()),
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Invariant(format!("CSV output failed: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Invariant(format!("CSV output failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

/// `x` rounded half away from zero to `places` decimals.
pub fn decimal(x: &Rational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = x * Rational::from_integer(scale.clone());
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let rounded = if scaled.is_negative() {
        -(-scaled + half).floor().to_integer()
    } else {
        (scaled + half).floor().to_integer()
    };
    let negative = rounded.is_negative();
    let (int, frac) = rounded.abs().div_rem(&scale);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{:0>places$}", frac.to_string())
    }
}

/// Rendering of a voting trace in one of the output formats.
pub trait RenderTrace {
    fn render(&self, format: Format) -> String;
}

pub fn render_trace<R: RenderTrace + ?Sized>(trace: &R, format: Format) -> String {
    trace.render(format)
}

/// Right-aligned text table. Cells of the argmax get a trailing `*`.
fn text_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header);
    for row in rows {
        line(row);
    }
    out
}

fn mark(cell: String, winner: bool) -> String {
    if winner {
        cell + "*"
    } else {
        cell + " "
    }
}

impl RenderTrace for OriginalTrace {
    fn render(&self, format: Format) -> String {
        let names = &self.candidates;
        match format {
            Format::Text => {
                let mut header = vec!["t".to_string()];
                header.extend(names.iter().map(|n| format!("{n} ")));
                header.push("winner".into());
                header.push("cost".into());
                let rows: Vec<Vec<String>> = self
                    .records
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.t.to_string()];
                        row.extend(
                            r.sigma
                                .iter()
                                .enumerate()
                                .map(|(j, s)| mark(s.to_string(), j == r.winner.0)),
                        );
                        row.push(names[r.winner.0].clone());
                        row.push(r.cost.to_string());
                        row
                    })
                    .collect();
                text_table(&header, &rows)
            }
            Format::Csv => {
                let mut w = csv_writer();
                let mut header = vec!["t".to_string()];
                header.extend(names.iter().map(|n| format!("votes_{n}")));
                header.extend(names.iter().map(|n| format!("sigma_{n}")));
                header.push("winner".into());
                header.push("cost".into());
                w.write_record(&header).expect("in-memory CSV");
                for r in &self.records {
                    let mut row = vec![r.t.to_string()];
                    row.extend(r.round.scores().iter().map(|s| s.to_string()));
                    row.extend(r.sigma.iter().map(|s| s.to_string()));
                    row.push(names[r.winner.0].clone());
                    row.push(r.cost.to_string());
                    w.write_record(&row).expect("in-memory CSV");
                }
                finish_csv(w).expect("in-memory CSV")
            }
            Format::Json => {
                let rounds: Vec<Value> = self
                    .records
                    .iter()
                    .map(|r| {
                        json!({
                            "t": r.t,
                            "votes": r.round.scores().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                            "sigma": r.sigma.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                            "winner": names[r.winner.0],
                            "cost": r.cost.to_string(),
                        })
                    })
                    .collect();
                let doc = json!({
                    "method": "original",
                    "candidates": names,
                    "rounds": rounds,
                    "wins": self.wins,
                });
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("JSON value"))
            }
        }
    }
}

/// Least common multiple of the voter counts, when every score is an
/// integer multiple of its inverse and the factor stays readable.
fn common_scale<T: Scalar>(trace: &ModifiedTrace<T>) -> Option<BigInt> {
    if !T::EXACT {
        return None;
    }
    let mut l = BigInt::one();
    for r in &trace.records {
        l = l.lcm(r.round.voters());
        for s in &r.scores {
            l = l.lcm(s.to_rational().denom());
        }
    }
    (l <= BigInt::from(1_000_000_000u64)).then_some(l)
}

impl<T: Scalar> RenderTrace for ModifiedTrace<T> {
    fn render(&self, format: Format) -> String {
        let names = &self.candidates;
        match format {
            Format::Text => {
                let scale = common_scale(self);
                let cell = |s: &T| match &scale {
                    Some(l) => (s.to_rational() * Rational::from_integer(l.clone()))
                        .to_integer()
                        .to_string(),
                    None => s.to_string(),
                };
                let mut header = vec!["t".to_string()];
                header.extend(names.iter().map(|n| format!("{n} ")));
                header.push("winner".into());
                let rows: Vec<Vec<String>> = self
                    .records
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.t.to_string()];
                        row.extend(r.scores.iter().enumerate().map(|(j, s)| mark(cell(s), j == r.winner.0)));
                        row.push(names[r.winner.0].clone());
                        row
                    })
                    .collect();
                let mut out = String::new();
                if let Some(l) = scale.filter(|l| !l.is_one()) {
                    let _ = writeln!(out, "scores multiplied by {l}");
                }
                out + &text_table(&header, &rows)
            }
            Format::Csv => {
                let mut w = csv_writer();
                let mut header = vec!["t".to_string()];
                header.extend(names.iter().map(|n| format!("s_{n}")));
                header.extend(names.iter().map(|n| format!("decimal_{n}")));
                header.push("winner".into());
                w.write_record(&header).expect("in-memory CSV");
                for r in &self.records {
                    let mut row = vec![r.t.to_string()];
                    row.extend(r.scores.iter().map(|s| s.to_string()));
                    row.extend(r.scores.iter().map(|s| decimal(&s.to_rational(), 6)));
                    row.push(names[r.winner.0].clone());
                    w.write_record(&row).expect("in-memory CSV");
                }
                finish_csv(w).expect("in-memory CSV")
            }
            Format::Json => {
                let rounds: Vec<Value> = self
                    .records
                    .iter()
                    .map(|r| {
                        json!({
                            "t": r.t,
                            "votes": r.round.scores().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                            "scores": r.scores.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                            "winner": names[r.winner.0],
                        })
                    })
                    .collect();
                let doc = json!({
                    "method": "modified",
                    "candidates": names,
                    "rounds": rounds,
                    "wins": self.wins,
                });
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("JSON value"))
            }
        }
    }
}

/// Apportionment input: vote counts or exact shares, a house size, and
/// optionally a method.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<u64>>,
    /// Fractions such as `"79/98"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<Vec<String>>,
    pub seats: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

impl ProblemInput {
    pub fn problem(&self) -> Result<ApportionmentProblem<Rational>> {
        match (&self.votes, &self.shares) {
            (Some(v), None) => ApportionmentProblem::from_votes(v, self.seats),
            (None, Some(s)) => {
                let shares = s
                    .iter()
                    .enumerate()
                    .map(|(i, x)| parse_rational(x).map_err(|e| parse_error(format!("share of party {}: {e}", i + 1))))
                    .collect::<Result<Vec<_>>>()?;
                ApportionmentProblem::new(shares, self.seats)
            }
            _ => Err(parse_error("give exactly one of \"votes\" and \"shares\"")),
        }
    }
}

pub fn parse_problem(bytes: &[u8]) -> Result<ProblemInput> {
    serde_json::from_slice(bytes).map_err(|e| parse_error(format!("invalid problem JSON: {e}")))
}
