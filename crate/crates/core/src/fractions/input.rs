//! Reading summand systems from text or JSON.
//!
//! Text: one `x p` pair per line, `#` comments, and optional `summand [n]`
//! lines opening a block repeated n times. JSON: `{"summands": [{"atoms":
//! [[x, p], ...], "repeat": n}, ...]}`, a bare list of such blocks, or a single
//! block. Numbers may be decimals or `num/den` strings; decimals are read
//! exactly, so all data ends up rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde_json::Value;

use super::{DiscreteDistribution, SummandSystem};
use crate::error::{Error, Result};

fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exponent - frac.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = if scale >= 0 {
        Pow::pow(ten, scale as u32)
    } else {
        BigRational::one() / Pow::pow(ten, (-scale) as u32)
    };
    let v = BigRational::from_integer(n) * factor;
    Some(if negative { -v } else { v })
}

/// Parses `a`, `a/b`, or a decimal with optional exponent into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a number: '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_decimal(n).ok_or_else(bad)?;
            let d = parse_decimal(d).ok_or_else(bad)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in '{s}'")));
            }
            Ok(n / d)
        }
        None => parse_decimal(s).ok_or_else(bad),
    }
}

type Block = (Vec<(BigRational, BigRational)>, usize);

fn build(blocks: Vec<Block>) -> Result<SummandSystem<BigRational>> {
    if blocks.iter().all(|b| b.0.is_empty()) {
        return Err(Error::Parse("no atoms".into()));
    }
    let mut out = Vec::with_capacity(blocks.len());
    for (atoms, repeat) in blocks {
        if atoms.is_empty() {
            return Err(Error::Parse("summand without atoms".into()));
        }
        out.push((DiscreteDistribution::centered(atoms)?, repeat));
    }
    SummandSystem::new(out)
}

/// Reads the text format.
pub fn parse_text(src: &str) -> Result<SummandSystem<BigRational>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (no, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0].eq_ignore_ascii_case("summand") {
            let repeat = match fields.get(1) {
                Some(n) => n
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: bad repeat count '{n}'", no + 1)))?,
                None => 1,
            };
            blocks.push((Vec::new(), repeat));
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected 'x p', got '{line}'", no + 1)));
        }
        let x = parse_rational(fields[0]).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
        let p = parse_rational(fields[1]).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
        if blocks.is_empty() {
            blocks.push((Vec::new(), 1));
        }
        blocks.last_mut().expect("block exists").0.push((x, p));
    }
    build(blocks)
}

fn number(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

fn json_block(v: &Value) -> Result<Block> {
    let atoms = v
        .get("atoms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("summand needs an 'atoms' array".into()))?;
    let mut out = Vec::with_capacity(atoms.len());
    for a in atoms {
        let (x, p) = match a {
            Value::Array(pair) if pair.len() == 2 => (number(&pair[0])?, number(&pair[1])?),
            Value::Object(_) => (
                number(a.get("x").ok_or_else(|| Error::Parse("atom needs 'x'".into()))?)?,
                number(a.get("p").ok_or_else(|| Error::Parse("atom needs 'p'".into()))?)?,
            ),
            other => return Err(Error::Parse(format!("bad atom {other}"))),
        };
        out.push((x, p));
    }
    let repeat = match v.get("repeat") {
        None => 1,
        Some(r) => r
            .as_u64()
            .ok_or_else(|| Error::Parse(format!("bad repeat count {r}")))? as usize,
    };
    Ok((out, repeat))
}

/// Reads the JSON format.
pub fn parse_json(src: &str) -> Result<SummandSystem<BigRational>> {
    let v: Value = serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
    let list = match &v {
        Value::Array(items) => items.clone(),
        Value::Object(_) => match v.get("summands") {
            Some(Value::Array(items)) => items.clone(),
            Some(_) => return Err(Error::Parse("'summands' must be an array".into())),
            None => vec![v.clone()],
        },
        _ => return Err(Error::Parse("expected an object or array".into())),
    };
    build(list.iter().map(json_block).collect::<Result<_>>()?)
}

/// JSON when the document starts with `{` or `[`, text otherwise.
pub fn parse_system(src: &str) -> Result<SummandSystem<BigRational>> {
    match src.trim_start().chars().next() {
        Some('{') | Some('[') => parse_json(src),
        Some(_) => parse_text(src),
        None => Err(Error::Parse("empty input".into())),
    }
}
