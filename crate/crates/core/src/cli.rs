//! Command-line front end and the JSON generator-set format.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or input
//! error, 3 a construction invariant was violated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::field_of_size;
use crate::lift::{
    build_chain_with, linear_rows_from_tilde, CoeffTable, LiftArtifacts, LiftPolicy, Mode,
    StructuredGenerators,
};
use crate::mpoly::{Monomial, PolyMatrix, Polynomial};
use crate::schedule::{make_minimal, validate, Schedule};
use crate::verify::{
    conditions_check, export_cas, membership_check, resultant_checks, sweep_cap,
    trivial_solution_probe, variety_equality, CasFormat, CheckResult, VerificationReport,
};

pub const FORMAT_VERSION: &str = "ngon-generators/1";

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONSTRUCTION: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Construction(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    BadFile { path: PathBuf, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Construction(_) => EXIT_CONSTRUCTION,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FileError {
    #[error("json: {0}")]
    Json(String),
    #[error("unsupported format {0:?}")]
    Version(String),
    #[error("{0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// JSON shapes

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDto {
    pub coeff: u32,
    /// `[variable, exponent]` pairs, exponents as decimal strings.
    pub exps: Vec<(u32, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDto {
    pub arity: u32,
    pub terms: Vec<TermDto>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDto {
    pub r: BTreeMap<u32, String>,
    pub s: BTreeMap<u32, String>,
    pub gamma: BTreeMap<u32, Vec<String>>,
    pub delta: BTreeMap<u32, String>,
    pub alpha: BTreeMap<u32, String>,
    pub beta: BTreeMap<u32, String>,
    pub lambda: BTreeMap<u32, String>,
    pub epsilon: BTreeMap<u32, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDto {
    pub e1: String,
    pub e2: String,
    /// Rows `i = 1..=n-2`, columns `j = 2..=n-2`.
    pub table: Vec<Vec<PolyDto>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactsDto {
    pub a1_prime: Vec<PolyDto>,
    pub a2_prime: Vec<PolyDto>,
    pub d: Vec<PolyDto>,
    pub b2_prime: PolyDto,
    pub tilde: Vec<PolyDto>,
    pub cofactors: Vec<PolyDto>,
    pub delta_bar_first: PolyDto,
    pub delta_bar_last: PolyDto,
    pub resultant: PolyDto,
    pub remainder: PolyDto,
    pub delta: String,
    pub alpha: String,
    pub ps: String,
    pub ps_next: String,
    pub gamma1_next: String,
    pub pure_sign: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSetDto {
    pub format: String,
    pub p: u32,
    #[serde(rename = "N")]
    pub top: u32,
    pub level: u32,
    pub mode: String,
    pub policy: String,
    pub schedule: ScheduleDto,
    pub generators: Vec<PolyDto>,
    pub structure: StructureDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifacts: Option<ArtifactsDto>,
    /// Violations let through while building the file (see `--allow-deviations`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deviations: Vec<String>,
}

/// A generator set as read from or written to disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSetFile {
    pub schedule: Schedule,
    pub mode: Mode,
    pub policy: LiftPolicy,
    pub generators: StructuredGenerators,
    pub artifacts: Option<LiftArtifacts>,
    pub deviations: Vec<String>,
}

fn big_str(x: &BigUint) -> String {
    x.to_str_radix(10)
}

fn parse_big(s: &str, what: &str) -> Result<BigUint, FileError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0'))
    {
        return Err(FileError::Invalid(format!(
            "{what}: {s:?} is not a canonical decimal"
        )));
    }
    s.parse()
        .map_err(|_| FileError::Invalid(format!("{what}: bad integer {s:?}")))
}

pub fn poly_to_dto(f: &Polynomial) -> PolyDto {
    PolyDto {
        arity: f.arity(),
        terms: f
            .terms()
            .iter()
            .map(|(m, c)| TermDto {
                coeff: *c,
                exps: m.factors().iter().map(|(v, e)| (*v, big_str(e))).collect(),
            })
            .collect(),
    }
}

pub fn poly_from_dto(d: &PolyDto, p: u32) -> Result<Polynomial, FileError> {
    let mut terms = Vec::with_capacity(d.terms.len());
    for t in &d.terms {
        if t.coeff == 0 || t.coeff >= p {
            return Err(FileError::Invalid(format!(
                "coefficient {} not in 1..{p}",
                t.coeff
            )));
        }
        let mut pairs = Vec::with_capacity(t.exps.len());
        for (v, e) in &t.exps {
            let e = parse_big(e, "exponent")?;
            if e == BigUint::ZERO {
                return Err(FileError::Invalid(format!("zero exponent on x_{v}")));
            }
            if let Some((last, _)) = pairs.last() {
                if last >= v {
                    return Err(FileError::Invalid(
                        "variables not strictly increasing".into(),
                    ));
                }
            }
            pairs.push((*v, e));
        }
        terms.push((Monomial::from_pairs(pairs), t.coeff as u64));
    }
    let f =
        Polynomial::from_terms(p, d.arity, terms).map_err(|e| FileError::Invalid(e.to_string()))?;
    if &poly_to_dto(&f) != d {
        return Err(FileError::Invalid(
            "terms are not in canonical order".into(),
        ));
    }
    Ok(f)
}

fn polys_from(ds: &[PolyDto], p: u32) -> Result<Vec<Polynomial>, FileError> {
    ds.iter().map(|d| poly_from_dto(d, p)).collect()
}

fn map_str(m: &BTreeMap<u32, BigUint>) -> BTreeMap<u32, String> {
    m.iter().map(|(k, v)| (*k, big_str(v))).collect()
}

fn map_big(m: &BTreeMap<u32, String>, what: &str) -> Result<BTreeMap<u32, BigUint>, FileError> {
    m.iter()
        .map(|(k, v)| Ok((*k, parse_big(v, what)?)))
        .collect()
}

pub fn schedule_to_dto(s: &Schedule) -> ScheduleDto {
    ScheduleDto {
        r: map_str(&s.r),
        s: map_str(&s.s),
        gamma: s
            .gamma
            .iter()
            .map(|(k, row)| (*k, row.iter().map(big_str).collect()))
            .collect(),
        delta: map_str(&s.delta),
        alpha: map_str(&s.alpha),
        beta: map_str(&s.beta),
        lambda: map_str(&s.lambda),
        epsilon: map_str(&s.epsilon),
    }
}

pub fn schedule_from_dto(d: &ScheduleDto, p: u32, top: u32) -> Result<Schedule, FileError> {
    let mut gamma = BTreeMap::new();
    for (k, row) in &d.gamma {
        let row: Result<Vec<_>, _> = row.iter().map(|g| parse_big(g, "gamma")).collect();
        gamma.insert(*k, row?);
    }
    let s = Schedule {
        p,
        top,
        r: map_big(&d.r, "r")?,
        s: map_big(&d.s, "s")?,
        gamma,
        delta: map_big(&d.delta, "delta")?,
        alpha: map_big(&d.alpha, "alpha")?,
        beta: map_big(&d.beta, "beta")?,
        lambda: map_big(&d.lambda, "lambda")?,
        epsilon: map_big(&d.epsilon, "epsilon")?,
    };
    for n in 5..=top {
        let complete = s.r.contains_key(&(n - 1))
            && [&s.s, &s.delta, &s.alpha, &s.beta, &s.lambda, &s.epsilon]
                .iter()
                .all(|m| m.contains_key(&n))
            && s.gamma.get(&n).is_some_and(|g| g.len() == (n - 3) as usize);
        if !complete {
            return Err(FileError::Invalid(format!(
                "schedule snapshot incomplete at level {n}"
            )));
        }
    }
    Ok(s)
}

impl GeneratorSetFile {
    pub fn to_dto(&self) -> GeneratorSetDto {
        let g = &self.generators;
        GeneratorSetDto {
            format: FORMAT_VERSION.into(),
            p: self.schedule.p,
            top: self.schedule.top,
            level: g.level,
            mode: self.mode.as_str().into(),
            policy: match self.policy {
                LiftPolicy::Strict => "strict".into(),
                LiftPolicy::Record => "record".into(),
            },
            schedule: schedule_to_dto(&self.schedule),
            generators: g.polys.iter().map(poly_to_dto).collect(),
            structure: StructureDto {
                e1: big_str(&g.e1),
                e2: big_str(&g.e2),
                table: g
                    .table
                    .rows()
                    .iter()
                    .map(|row| row.iter().map(poly_to_dto).collect())
                    .collect(),
            },
            artifacts: self.artifacts.as_ref().map(|a| ArtifactsDto {
                a1_prime: a.a1_prime.iter().map(poly_to_dto).collect(),
                a2_prime: a.a2_prime.iter().map(poly_to_dto).collect(),
                d: a.d.iter().map(poly_to_dto).collect(),
                b2_prime: poly_to_dto(&a.b2_prime),
                tilde: a.tilde.iter().map(poly_to_dto).collect(),
                cofactors: a.cofactors.iter().map(poly_to_dto).collect(),
                delta_bar_first: poly_to_dto(&a.delta_bar_first),
                delta_bar_last: poly_to_dto(&a.delta_bar_last),
                resultant: poly_to_dto(&a.resultant),
                remainder: poly_to_dto(&a.remainder),
                delta: big_str(&a.delta),
                alpha: big_str(&a.alpha),
                ps: big_str(&a.ps),
                ps_next: big_str(&a.ps_next),
                gamma1_next: big_str(&a.gamma1_next),
                pure_sign: a.pure_sign,
            }),
            deviations: self.deviations.clone(),
        }
    }

    pub fn from_dto(d: &GeneratorSetDto) -> Result<Self, FileError> {
        if d.format != FORMAT_VERSION {
            return Err(FileError::Version(d.format.clone()));
        }
        let p = d.p;
        let n = d.level;
        if !crate::gf::is_prime(p as u64) {
            return Err(FileError::Invalid(format!("{p} is not prime")));
        }
        if n < 5 || n > d.top {
            return Err(FileError::Invalid(format!(
                "level {n} outside 5..={}",
                d.top
            )));
        }
        let schedule = schedule_from_dto(&d.schedule, p, d.top)?;
        let mode: Mode = d.mode.parse().map_err(FileError::Invalid)?;
        let policy = match d.policy.as_str() {
            "strict" => LiftPolicy::Strict,
            "record" => LiftPolicy::Record,
            other => return Err(FileError::Invalid(format!("unknown policy {other:?}"))),
        };
        let params = schedule
            .level(n)
            .map_err(|e| FileError::Invalid(e.to_string()))?;
        let polys = polys_from(&d.generators, p)?;
        if polys.iter().any(|f| f.arity() != n) {
            return Err(FileError::Invalid(format!(
                "generators must have arity {n}"
            )));
        }
        let table = &d.structure.table;
        if table.len() != (n - 2) as usize || table.iter().any(|r| r.len() != (n - 3) as usize) {
            return Err(FileError::Invalid(format!(
                "coefficient table must be {} x {}",
                n - 2,
                n - 3
            )));
        }
        let rows: Result<Vec<_>, _> = table.iter().map(|r| polys_from(r, p)).collect();
        let rows = rows?;
        if rows.iter().flatten().any(|f| f.arity() != n) {
            return Err(FileError::Invalid(format!(
                "table entries must have arity {n}"
            )));
        }
        let generators = StructuredGenerators {
            p,
            level: n,
            polys,
            table: CoeffTable::new(n, p, rows),
            e1: parse_big(&d.structure.e1, "e1")?,
            e2: parse_big(&d.structure.e2, "e2")?,
            lambda: params.lambda,
            alpha: params.alpha,
            gamma: params.gamma,
            delta: params.delta,
            epsilon: params.epsilon,
        };
        let artifacts = match &d.artifacts {
            None => None,
            Some(a) => Some(artifacts_from_dto(a, p, n)?),
        };
        Ok(GeneratorSetFile {
            schedule,
            mode,
            policy,
            generators,
            artifacts,
            deviations: d.deviations.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_dto()).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FileError> {
        let dto: GeneratorSetDto =
            serde_json::from_str(text).map_err(|e| FileError::Json(e.to_string()))?;
        Self::from_dto(&dto)
    }
}

fn artifacts_from_dto(a: &ArtifactsDto, p: u32, n: u32) -> Result<LiftArtifacts, FileError> {
    if n < 6 {
        return Err(FileError::Invalid("level 5 has no lift artifacts".into()));
    }
    let width = (n - 3) as usize;
    let tilde = polys_from(&a.tilde, p)?;
    let cofactors = polys_from(&a.cofactors, p)?;
    if tilde.len() != width || cofactors.len() != width {
        return Err(FileError::Invalid(format!(
            "artifacts need {width} tilde forms and cofactors"
        )));
    }
    if tilde.iter().any(|f| f.arity() != 2 * n - 3) {
        return Err(FileError::Invalid(format!(
            "tilde forms must have arity {}",
            2 * n - 3
        )));
    }
    let one_arity = |fs: &[&Polynomial]| fs.iter().all(|f| f.arity() == n);
    let a1_prime = polys_from(&a.a1_prime, p)?;
    let a2_prime = polys_from(&a.a2_prime, p)?;
    let d = polys_from(&a.d, p)?;
    let b2_prime = poly_from_dto(&a.b2_prime, p)?;
    let delta_bar_first = poly_from_dto(&a.delta_bar_first, p)?;
    let delta_bar_last = poly_from_dto(&a.delta_bar_last, p)?;
    let resultant = poly_from_dto(&a.resultant, p)?;
    let remainder = poly_from_dto(&a.remainder, p)?;
    let mut all: Vec<&Polynomial> = vec![
        &b2_prime,
        &delta_bar_first,
        &delta_bar_last,
        &resultant,
        &remainder,
    ];
    all.extend(cofactors.iter().chain(&a1_prime).chain(&a2_prime).chain(&d));
    if !one_arity(&all) {
        return Err(FileError::Invalid(format!(
            "artifact polynomials must have arity {n}"
        )));
    }
    if a.pure_sign == 0 || a.pure_sign >= p {
        return Err(FileError::Invalid(
            "pure_sign must be a nonzero residue".into(),
        ));
    }
    let rows = linear_rows_from_tilde(&tilde, n).map_err(|e| FileError::Invalid(e.to_string()))?;
    let matrix = PolyMatrix::from_rows(rows).map_err(|e| FileError::Invalid(e.to_string()))?;
    Ok(LiftArtifacts {
        level: n,
        p,
        a1_prime,
        a2_prime,
        d,
        b2_prime,
        tilde,
        matrix,
        cofactors,
        delta_bar_first,
        delta_bar_last,
        resultant,
        remainder,
        delta: parse_big(&a.delta, "delta")?,
        alpha: parse_big(&a.alpha, "alpha")?,
        ps: parse_big(&a.ps, "ps")?,
        ps_next: parse_big(&a.ps_next, "ps_next")?,
        gamma1_next: parse_big(&a.gamma1_next, "gamma1_next")?,
        pure_sign: a.pure_sign,
        deviations: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Commands

#[derive(Debug, Parser)]
#[command(
    name = "ngon",
    version,
    about = "Generators up to radical for the Stanley-Reisner ideal of the n-gon in characteristic p"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exponent ledger and its validation report.
    Schedule(ScheduleArgs),
    /// Build the generators of one level and write them as JSON.
    Construct(ConstructArgs),
    /// Run checks on a generator file.
    Verify(VerifyArgs),
    /// Write a Macaulay2 or Singular script for a generator file.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long = "N")]
    pub top: u32,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long = "N")]
    pub top: u32,
    /// Target level, 5 <= n <= N.
    #[arg(long)]
    pub n: u32,
    /// carried or literal.
    #[arg(long, default_value = "carried")]
    pub mode: String,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include the data of the last lift (needed by the resultant and probe checks).
    #[arg(long)]
    pub artifacts: bool,
    /// Record violations of the remainder's pure-power membership instead of aborting.
    #[arg(long)]
    pub allow_deviations: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Field sizes, e.g. 2,4,16.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub fields: Vec<u64>,
    /// all, or a list of membership, conditions, variety, resultant, probe.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub checks: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per field for the probe.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// macaulay2 or singular.
    #[arg(long)]
    pub format: String,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut String) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            stdout.push_str(text);
            Ok(())
        }
    }
}

pub fn load_file(path: &Path) -> Result<GeneratorSetFile, CliError> {
    GeneratorSetFile::from_json(&read(path)?).map_err(|e| CliError::BadFile {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn short(x: &BigUint) -> String {
    if x.bits() <= 64 {
        x.to_string()
    } else {
        format!("<{} bits>", x.bits())
    }
}

pub fn schedule_text(s: &Schedule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p = {}, N = {}", s.p, s.top);
    let rs: Vec<String> = (4..=s.top).map(|n| format!("r[{n}]={}", s.r[&n])).collect();
    let _ = writeln!(out, "{}", rs.join("  "));
    for n in s.levels() {
        let gamma: Vec<String> = s.gamma[&n].iter().map(short).collect();
        let _ = writeln!(
            out,
            "n={n}: s={} delta={} alpha={} beta={} lambda={} epsilon={} gamma=({})",
            s.s[&n],
            short(&s.delta[&n]),
            short(&s.alpha[&n]),
            short(&s.beta[&n]),
            short(&s.lambda[&n]),
            short(&s.epsilon[&n]),
            gamma.join(",")
        );
    }
    let report = validate(s);
    out.push_str(&report.to_string());
    let mut labels: Vec<&str> = Vec::new();
    for c in &report.checks {
        if !labels.contains(&c.label) {
            labels.push(c.label);
        }
    }
    for label in labels {
        let fails: Vec<String> = report
            .checks
            .iter()
            .filter(|c| c.label == label && !c.pass)
            .map(|c| c.level.to_string())
            .collect();
        let strict = if label == "(10)" { " strict" } else { "" };
        if fails.is_empty() {
            let _ = writeln!(out, "{label}{strict}: pass");
        } else {
            let _ = writeln!(out, "{label}{strict}: FAIL at n={}", fails.join(","));
        }
    }
    out
}

#[derive(Serialize)]
struct ScheduleJson<'a> {
    p: u32,
    #[serde(rename = "N")]
    top: u32,
    schedule: ScheduleDto,
    checks: Vec<ScheduleCheckJson<'a>>,
}

#[derive(Serialize)]
struct ScheduleCheckJson<'a> {
    label: &'a str,
    level: u32,
    pass: bool,
    detail: &'a str,
}

fn cmd_schedule(a: &ScheduleArgs, stdout: &mut String) -> Result<u8, CliError> {
    let s = make_minimal(a.p, a.top).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.json {
        let report = validate(&s);
        let doc = ScheduleJson {
            p: s.p,
            top: s.top,
            schedule: schedule_to_dto(&s),
            checks: report
                .checks
                .iter()
                .map(|c| ScheduleCheckJson {
                    label: c.label,
                    level: c.level,
                    pass: c.pass,
                    detail: &c.detail,
                })
                .collect(),
        };
        stdout.push_str(&serde_json::to_string_pretty(&doc).expect("plain data serializes"));
        stdout.push('\n');
    } else {
        stdout.push_str(&schedule_text(&s));
    }
    Ok(EXIT_OK)
}

/// Builds the file for `construct`; also used by tests.
pub fn construct_file(
    p: u32,
    top: u32,
    n: u32,
    mode: Mode,
    policy: LiftPolicy,
    with_artifacts: bool,
) -> Result<(GeneratorSetFile, Vec<String>), CliError> {
    let s = make_minimal(p, top).map_err(|e| CliError::Usage(e.to_string()))?;
    if n < 5 || n > top {
        return Err(CliError::Usage(format!(
            "level n={n} must satisfy 5 <= n <= N={top}"
        )));
    }
    let chain =
        build_chain_with(&s, n, mode, policy).map_err(|e| CliError::Construction(e.to_string()))?;
    let mut stats = Vec::new();
    let mut deviations = Vec::new();
    for g in &chain.levels {
        let terms: Vec<String> = g.polys.iter().map(|f| f.len().to_string()).collect();
        stats.push(format!(
            "level {}: {} generators, {} terms ({})",
            g.level,
            g.polys.len(),
            g.total_terms(),
            terms.join(",")
        ));
    }
    for a in &chain.artifacts {
        deviations.extend(a.deviations.iter().map(|d| d.to_string()));
    }
    let artifacts = if with_artifacts {
        chain.artifacts.last().cloned()
    } else {
        None
    };
    let file = GeneratorSetFile {
        schedule: s,
        mode,
        policy,
        generators: chain.top().clone(),
        artifacts,
        deviations,
    };
    Ok((file, stats))
}

fn cmd_construct(
    a: &ConstructArgs,
    stdout: &mut String,
    stderr: &mut String,
) -> Result<u8, CliError> {
    let mode: Mode = a.mode.parse().map_err(CliError::Usage)?;
    let policy = if a.allow_deviations {
        LiftPolicy::Record
    } else {
        LiftPolicy::Strict
    };
    let (file, stats) = construct_file(a.p, a.top, a.n, mode, policy, a.artifacts)?;
    for line in &stats {
        let _ = writeln!(stderr, "{line}");
    }
    for d in &file.deviations {
        let _ = writeln!(stderr, "deviation: {d}");
    }
    let _ = writeln!(stderr, "{} generators", file.generators.polys.len());
    write_out(a.out.as_deref(), &file.to_json(), stdout)?;
    Ok(EXIT_OK)
}

const CHECK_NAMES: [&str; 5] = ["membership", "conditions", "variety", "resultant", "probe"];

/// Runs the selected checks on a loaded file. `explicit` is false when the
/// selection came from `all`, in which case checks needing absent artifacts
/// are reported as skipped rather than rejected.
pub fn verify_file(
    file: &GeneratorSetFile,
    fields: &[u64],
    checks: &[&str],
    explicit: bool,
    seed: u64,
    trials: usize,
) -> Result<VerificationReport, CliError> {
    let g = &file.generators;
    let n = g.level;
    let p = g.p;
    let mut fds = Vec::new();
    for &q in fields {
        fds.push(field_of_size(p as u64, q).map_err(|e| CliError::Usage(e.to_string()))?);
    }
    let needs_artifacts = checks.iter().any(|c| *c == "resultant" || *c == "probe");
    if explicit && needs_artifacts && file.artifacts.is_none() {
        return Err(CliError::Usage(
            "resultant and probe checks need a file written with --artifacts".into(),
        ));
    }
    let mut report = VerificationReport::default();
    for check in checks {
        match *check {
            "membership" => report.push(membership_check(&g.polys, n)),
            "conditions" => report.extend(conditions_check(g)),
            "variety" => {
                for fd in &fds {
                    match variety_equality(&g.polys, n, fd) {
                        Ok(v) => report.push(v.to_check()),
                        Err(e) => report.push(CheckResult::skipped("variety", n, e.to_string())),
                    }
                }
            }
            "resultant" => match &file.artifacts {
                Some(a) => report.extend(resultant_checks(a)),
                None => report.push(CheckResult::skipped(
                    "resultant",
                    n,
                    "file has no lift artifacts",
                )),
            },
            "probe" => match &file.artifacts {
                Some(a) => {
                    for fd in &fds {
                        match trivial_solution_probe(a, fd, trials, seed) {
                            Ok(o) => report.push(o.to_check()),
                            Err(e) => report.push(CheckResult::skipped("probe", n, e.to_string())),
                        }
                    }
                }
                None => report.push(CheckResult::skipped(
                    "probe",
                    n,
                    "file has no lift artifacts",
                )),
            },
            other => return Err(CliError::Usage(format!("unknown check {other:?}"))),
        }
    }
    Ok(report)
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut String, stderr: &mut String) -> Result<u8, CliError> {
    let file = load_file(&a.input)?;
    let explicit = !a.checks.iter().any(|c| c == "all");
    let checks: Vec<&str> = if explicit {
        a.checks.iter().map(String::as_str).collect()
    } else {
        CHECK_NAMES.to_vec()
    };
    if let Some(bad) = checks.iter().find(|c| !CHECK_NAMES.contains(c)) {
        return Err(CliError::Usage(format!("unknown check {bad:?}")));
    }
    let started = Instant::now();
    let report = verify_file(&file, &a.fields, &checks, explicit, a.seed, a.trials)?;
    let _ = writeln!(
        stderr,
        "verified in {:.3} s (sweep cap {})",
        started.elapsed().as_secs_f64(),
        sweep_cap()
    );
    let _ = writeln!(stdout, "{report}");
    if let Some(path) = &a.report {
        let mut text = serde_json::to_string_pretty(&report).expect("plain data serializes");
        text.push('\n');
        write_out(Some(path), &text, stdout)?;
    }
    Ok(if report.ok() { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_export(a: &ExportArgs, stdout: &mut String) -> Result<u8, CliError> {
    let format: CasFormat = a
        .format
        .parse()
        .map_err(|e: crate::verify::CasError| CliError::Usage(e.to_string()))?;
    let file = load_file(&a.input)?;
    let g = &file.generators;
    let text =
        export_cas(&g.polys, g.level, g.p, format).map_err(|e| CliError::Usage(e.to_string()))?;
    write_out(a.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

/// Captured output of one invocation.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(cli: &Cli) -> Outcome {
    let mut out = Outcome::default();
    let result = match &cli.command {
        Command::Schedule(a) => cmd_schedule(a, &mut out.stdout),
        Command::Construct(a) => cmd_construct(a, &mut out.stdout, &mut out.stderr),
        Command::Verify(a) => cmd_verify(a, &mut out.stdout, &mut out.stderr),
        Command::Export(a) => cmd_export(a, &mut out.stdout),
    };
    match result {
        Ok(code) => out.code = code,
        Err(e) => {
            let _ = writeln!(out.stderr, "error: {e}");
            out.code = e.exit_code();
        }
    }
    out
}

/// Parses `args` (program name first) and runs; clap usage errors map to 2.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let mut out = Outcome {
                code,
                ..Outcome::default()
            };
            if e.use_stderr() {
                out.stderr = text;
            } else {
                out.stdout = text;
            }
            out
        }
    }
}

pub fn main_with_args() -> ExitCode {
    use std::io::Write;
    let out = run_args(std::env::args_os());
    // A closed pipe downstream is not our failure.
    let _ = std::io::stdout().lock().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().lock().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code)
}
