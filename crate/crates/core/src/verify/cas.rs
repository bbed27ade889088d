//! Scripts for Macaulay2 and Singular that re-check the radical equality
//! with a real Groebner engine, and a reader for the polynomial lists they
//! contain.
//!
//! Radical membership of `g` in `J` is tested the Rabinowitsch way: `g` lies
//! in `sqrt(J)` iff `1` lies in `J + (1 - t g)`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

use crate::mpoly::{Monomial, Polynomial};
use crate::srideal::cycle_ideal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CasFormat {
    Macaulay2,
    Singular,
}

impl FromStr for CasFormat {
    type Err = CasError;

    fn from_str(s: &str) -> Result<Self, CasError> {
        match s.to_ascii_lowercase().as_str() {
            "macaulay2" | "m2" => Ok(CasFormat::Macaulay2),
            "singular" => Ok(CasFormat::Singular),
            _ => Err(CasError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CasError {
    #[error("unknown CAS format {0:?} (expected macaulay2 or singular)")]
    UnknownFormat(String),
    #[error("need at least 3 variables, got {0}")]
    TooFewVariables(u32),
    #[error("polynomials disagree on the ring")]
    MixedRings,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn var_name(format: CasFormat, i: u32) -> String {
    match format {
        CasFormat::Macaulay2 => format!("x_{i}"),
        CasFormat::Singular => format!("x({i})"),
    }
}

fn write_monomial(out: &mut String, format: CasFormat, m: &Monomial) {
    for (k, (i, e)) in m.factors().iter().enumerate() {
        if k > 0 {
            out.push('*');
        }
        out.push_str(&var_name(format, *i));
        if *e != BigUint::from(1u32) {
            let _ = write!(out, "^{e}");
        }
    }
}

fn write_poly(out: &mut String, format: CasFormat, f: &Polynomial) {
    if f.is_zero() {
        out.push('0');
        return;
    }
    for (k, (m, c)) in f.terms().iter().enumerate() {
        if k > 0 {
            out.push_str(" + ");
        }
        match (*c, m.is_one()) {
            (c, true) => {
                let _ = write!(out, "{c}");
            }
            (1, false) => write_monomial(out, format, m),
            (c, false) => {
                let _ = write!(out, "{c}*");
                write_monomial(out, format, m);
            }
        }
    }
}

/// A self-contained script: the ring over `F_p` with an extra variable `t`,
/// the ideal `F` of the given polynomials, `I_n`, and one radical-membership
/// query per generator of `I_n`.
pub fn export_cas(
    fs: &[Polynomial],
    n: u32,
    p: u32,
    format: CasFormat,
) -> Result<String, CasError> {
    if n < 3 {
        return Err(CasError::TooFewVariables(n));
    }
    if fs.iter().any(|f| f.characteristic() != p || f.arity() != n) {
        return Err(CasError::MixedRings);
    }
    let ideal = cycle_ideal(n).map_err(|_| CasError::TooFewVariables(n))?;
    let mut out = String::new();
    match format {
        CasFormat::Macaulay2 => {
            let _ = writeln!(out, "-- {} polynomials in x_1..x_{n} over ZZ/{p}", fs.len());
            let _ = writeln!(out, "-- g is in radical(F) iff 1 is in F + (1 - t*g)");
            let _ = writeln!(out, "R = ZZ/{p}[x_1..x_{n}, t];");
            out.push_str("F = ideal(\n");
            for (k, f) in fs.iter().enumerate() {
                out.push_str("  ");
                write_poly(&mut out, format, f);
                out.push_str(if k + 1 < fs.len() { ",\n" } else { "\n" });
            }
            out.push_str(");\n");
            out.push_str("I = ideal(");
            for (k, g) in ideal.generators().iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_monomial(&mut out, format, g);
            }
            out.push_str(");\n");
            out.push_str("inRadicalF = g -> isSubset(ideal(1_R), F + ideal(1 - t*g));\n");
            for g in ideal.generators() {
                let mut name = String::new();
                write_monomial(&mut name, format, g);
                let _ = writeln!(out, "print(\"{name} \" | toString inRadicalF({name}));");
            }
        }
        CasFormat::Singular => {
            let _ = writeln!(
                out,
                "// {} polynomials in x(1)..x({n}) over GF({p})",
                fs.len()
            );
            let _ = writeln!(out, "// g is in radical(F) iff 1 is in F + (1 - t*g)");
            let _ = writeln!(out, "ring R = {p},(x(1..{n}),t),dp;");
            out.push_str("ideal F =\n");
            for (k, f) in fs.iter().enumerate() {
                out.push_str("  ");
                write_poly(&mut out, format, f);
                out.push_str(if k + 1 < fs.len() { ",\n" } else { ";\n" });
            }
            if fs.is_empty() {
                out.push_str("  0;\n");
            }
            out.push_str("ideal I = ");
            for (k, g) in ideal.generators().iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_monomial(&mut out, format, g);
            }
            out.push_str(";\n");
            out.push_str("proc inRadicalF(poly g)\n{\n  ideal J = F, 1 - t*g;\n  return(reduce(1, std(J)) == 0);\n}\n");
            for g in ideal.generators() {
                let mut name = String::new();
                write_monomial(&mut name, format, g);
                let _ = writeln!(out, "print(\"{name} \" + string(inRadicalF({name})));");
            }
        }
    }
    Ok(out)
}

/// Everything [`parse_cas`] recovers from a script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasScript {
    pub format: CasFormat,
    pub p: u32,
    pub n: u32,
    pub polys: Vec<Polynomial>,
}

fn perr(line: usize, msg: impl Into<String>) -> CasError {
    CasError::Parse {
        line: line + 1,
        msg: msg.into(),
    }
}

fn parse_var(format: CasFormat, s: &str) -> Option<u32> {
    match format {
        CasFormat::Macaulay2 => s.strip_prefix("x_")?.parse().ok(),
        CasFormat::Singular => s.strip_prefix("x(")?.strip_suffix(')')?.parse().ok(),
    }
}

fn parse_poly(
    format: CasFormat,
    p: u32,
    n: u32,
    text: &str,
    line: usize,
) -> Result<Polynomial, CasError> {
    let text = text.trim();
    if text == "0" {
        return Ok(Polynomial::zero(p, n));
    }
    let mut terms = Vec::new();
    for term in text.split(" + ") {
        let mut coeff: u32 = 1;
        let mut pairs: Vec<(u32, BigUint)> = Vec::new();
        for factor in term.trim().split('*') {
            if let Ok(c) = factor.parse::<u32>() {
                coeff = c;
                continue;
            }
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (
                    b,
                    e.parse::<BigUint>()
                        .map_err(|_| perr(line, format!("bad exponent in {factor:?}")))?,
                ),
                None => (factor, BigUint::from(1u32)),
            };
            let var = parse_var(format, base)
                .ok_or_else(|| perr(line, format!("bad factor {factor:?}")))?;
            pairs.push((var, exp));
        }
        terms.push((Monomial::from_pairs(pairs), coeff as u64));
    }
    Polynomial::from_terms(p, n, terms).map_err(|e| perr(line, e.to_string()))
}

/// Reads back the ring and the polynomial list of a script written by
/// [`export_cas`].
pub fn parse_cas(text: &str) -> Result<CasScript, CasError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut ring: Option<(CasFormat, u32, u32)> = None;
    let mut start = None;
    for (k, l) in lines.iter().enumerate() {
        if let Some(rest) = l.strip_prefix("R = ZZ/") {
            let (p, rest) = rest
                .split_once("[x_1..x_")
                .ok_or_else(|| perr(k, "bad ring line"))?;
            let (n, _) = rest
                .split_once(',')
                .ok_or_else(|| perr(k, "bad ring line"))?;
            let p = p.parse().map_err(|_| perr(k, "bad characteristic"))?;
            let n = n.parse().map_err(|_| perr(k, "bad variable count"))?;
            ring = Some((CasFormat::Macaulay2, p, n));
        } else if let Some(rest) = l.strip_prefix("ring R = ") {
            let (p, rest) = rest
                .split_once(",(x(1..")
                .ok_or_else(|| perr(k, "bad ring line"))?;
            let (n, _) = rest
                .split_once(')')
                .ok_or_else(|| perr(k, "bad ring line"))?;
            let p = p.parse().map_err(|_| perr(k, "bad characteristic"))?;
            let n = n.parse().map_err(|_| perr(k, "bad variable count"))?;
            ring = Some((CasFormat::Singular, p, n));
        } else if *l == "F = ideal(" || *l == "ideal F =" {
            start = Some(k + 1);
            break;
        }
    }
    let (format, p, n) = ring.ok_or_else(|| perr(0, "no ring declaration"))?;
    let start = start.ok_or_else(|| perr(0, "no polynomial list"))?;
    let mut polys = Vec::new();
    for (k, l) in lines.iter().enumerate().skip(start) {
        let l = l.trim();
        if format == CasFormat::Macaulay2 && l == ");" {
            return Ok(CasScript {
                format,
                p,
                n,
                polys,
            });
        }
        let (body, last) = match l.strip_suffix(',') {
            Some(b) => (b, false),
            None => match (format, l.strip_suffix(';')) {
                (CasFormat::Singular, Some(b)) => (b, true),
                _ => (l, format == CasFormat::Macaulay2),
            },
        };
        if format == CasFormat::Singular && last && body.trim() == "0" && polys.is_empty() {
            return Ok(CasScript {
                format,
                p,
                n,
                polys,
            });
        }
        polys.push(parse_poly(format, p, n, body, k)?);
        if last && format == CasFormat::Singular {
            return Ok(CasScript {
                format,
                p,
                n,
                polys,
            });
        }
    }
    Err(perr(lines.len(), "unterminated polynomial list"))
}
