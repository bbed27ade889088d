//! Decidable checks on a generator set: termwise membership in `I_n`,
//! zero-set equality over small finite fields, the resultant identities of
//! a lift, and a probe of the resultant's defining property.
//!
//! Equality of zero sets over a few `F_q` is a necessary condition for the
//! radical equality over the algebraic closure, not a proof of it; the
//! [`cas`] scripts cover the certified route.

pub mod cas;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{enumerate_points_capped, Element, FieldDescriptor, GfError, DEFAULT_SWEEP_CAP};
use crate::lift::{check_conditions, y_index, LiftArtifacts, StructuredGenerators};
use crate::mpoly::{pure_power_gens, Membership, Monomial, PolyMatrix, Polynomial};
use crate::srideal::{cycle_ideal, expected_variety_count, in_variety};

pub use cas::{export_cas, parse_cas, CasError, CasFormat, CasScript};

/// Environment variable overriding [`DEFAULT_SWEEP_CAP`].
pub const SWEEP_CAP_ENV: &str = "NGON_SWEEP_CAP";

/// The sweep cap from the environment, or the default.
pub fn sweep_cap() -> u64 {
    std::env::var(SWEEP_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SWEEP_CAP)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("polynomials live in characteristic {poly}, field has characteristic {field}")]
    Characteristic { poly: u32, field: u32 },
    #[error("expected polynomials in {expected} variables, got {got}")]
    Arity { expected: u32, got: u32 },
    #[error("need at least 3 vertices, got {0}")]
    TooFewVertices(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckResult {
    pub name: String,
    pub level: u32,
    pub status: Status,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Element codes of a counterexample point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CheckResult {
    fn new(name: impl Into<String>, level: u32, status: Status, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            level,
            status,
            detail: detail.into(),
            field: None,
            witness: None,
            point: None,
            sweep: None,
            seed: None,
        }
    }

    pub fn pass(name: impl Into<String>, level: u32, detail: impl Into<String>) -> Self {
        Self::new(name, level, Status::Pass, detail)
    }

    pub fn fail(name: impl Into<String>, level: u32, detail: impl Into<String>) -> Self {
        Self::new(name, level, Status::Fail, detail)
    }

    pub fn skipped(name: impl Into<String>, level: u32, detail: impl Into<String>) -> Self {
        Self::new(name, level, Status::Skipped, detail)
    }

    fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    fn with_field(mut self, q: u32) -> Self {
        self.field = Some(q);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = CheckResult>) {
        self.checks.extend(cs);
    }

    /// No check failed. Skipped checks neither pass nor fail.
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn find(&self, name: &str) -> impl Iterator<Item = &CheckResult> + '_ {
        let name = name.to_string();
        self.checks.iter().filter(move |c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            };
            write!(f, "[{tag}] n={} {}", c.level, c.name)?;
            if let Some(q) = c.field {
                write!(f, " F_{q}")?;
            }
            write!(f, ": {}", c.detail)?;
            if let Some(w) = &c.witness {
                write!(f, " [witness {w}]")?;
            }
            if let Some(pt) = &c.point {
                write!(f, " [point {pt:?}]")?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "{} passed, {} failed, {} skipped",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skipped)
        )
    }
}

/// Every `f_i` lies in `I_n`, decided term by term.
pub fn membership_check(fs: &[Polynomial], n: u32) -> CheckResult {
    let ideal = match cycle_ideal(n) {
        Ok(i) => i,
        Err(e) => return CheckResult::fail("membership", n, e.to_string()),
    };
    for (i, f) in fs.iter().enumerate() {
        if f.arity() != n {
            return CheckResult::fail(
                "membership",
                n,
                format!("f_{} has {} variables, expected {n}", i + 1, f.arity()),
            );
        }
        if let Membership::Outside { witness } = ideal.contains(f) {
            return CheckResult::fail("membership", n, format!("f_{} is not in I_{n}", i + 1))
                .with_witness(witness.to_string());
        }
    }
    CheckResult::pass(
        "membership",
        n,
        format!("{} polynomials in I_{n} termwise", fs.len()),
    )
}

/// The conditions report of `g` folded into one check per condition.
pub fn conditions_check(g: &StructuredGenerators) -> Vec<CheckResult> {
    let rep = check_conditions(g);
    let mut out = Vec::new();
    let mut seen = Vec::new();
    for c in &rep.checks {
        if !seen.contains(&c.condition) {
            seen.push(c.condition);
        }
    }
    for cond in seen {
        let name = format!("conditions.{}", cond.label());
        let entries: Vec<_> = rep.checks.iter().filter(|c| c.condition == cond).collect();
        match entries.iter().find(|c| !c.pass) {
            None => out.push(CheckResult::pass(
                name,
                g.level,
                format!("{} entries", entries.len()),
            )),
            Some(bad) => {
                let fails = entries.iter().filter(|c| !c.pass).count();
                let mut r = CheckResult::fail(
                    name,
                    g.level,
                    format!(
                        "{fails} of {} entries fail; first: {}",
                        entries.len(),
                        bad.what
                    ),
                );
                if let Some(w) = &bad.witness {
                    r = r.with_witness(w.clone());
                }
                out.push(r);
            }
        }
    }
    out
}

/// A point where the zero set of the `f_i` and `V(I_n)` disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarietyMismatch {
    pub index: u64,
    pub point: Vec<Element>,
    /// Whether every `f_i` vanishes at the point.
    pub generators_vanish: bool,
    /// Whether the point lies on `V(I_n)`.
    pub on_variety: bool,
    /// First `f_i` (1-based) not vanishing, when the point is on `V(I_n)`.
    pub nonzero_generator: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarietyOutcome {
    pub n: u32,
    pub q: u32,
    pub points: u64,
    pub zero_count: u64,
    pub expected_count: u64,
    pub mismatch: Option<VarietyMismatch>,
}

impl VarietyOutcome {
    pub fn equal(&self) -> bool {
        self.mismatch.is_none() && self.zero_count == self.expected_count
    }

    pub fn to_check(&self) -> CheckResult {
        let name = "variety";
        let mut r = match &self.mismatch {
            None if self.equal() => CheckResult::pass(
                name,
                self.n,
                format!(
                    "{} common zeros = |V(I_{})(F_{})| over {} points (finite-field evidence, not a proof over the closure)",
                    self.zero_count, self.n, self.q, self.points
                ),
            ),
            None => CheckResult::fail(
                name,
                self.n,
                format!(
                    "{} common zeros but |V(I_{})(F_{})| = {}",
                    self.zero_count, self.n, self.q, self.expected_count
                ),
            ),
            Some(m) => {
                let what = if m.on_variety {
                    format!(
                        "point on V(I_{}) where f_{} does not vanish",
                        self.n,
                        m.nonzero_generator.unwrap_or(0)
                    )
                } else {
                    format!("common zero of the f_i outside V(I_{})", self.n)
                };
                let mut r = CheckResult::fail(name, self.n, what);
                r.point = Some(m.point.iter().map(|e| e.code()).collect());
                r
            }
        };
        r.sweep = Some(self.points);
        r.with_field(self.q)
    }
}

#[derive(Default)]
struct SweepAcc {
    zeros: u64,
    first: Option<VarietyMismatch>,
}

impl SweepAcc {
    fn merge(mut self, other: SweepAcc) -> SweepAcc {
        self.zeros += other.zeros;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(if a.index <= b.index { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

const SWEEP_CHUNK: u64 = 1 << 12;

/// Compares `{z in F_q^n : all f_i(z) = 0}` with `V(I_n)(F_q)` point by
/// point, under the given sweep cap.
pub fn variety_equality_capped(
    fs: &[Polynomial],
    n: u32,
    fd: &FieldDescriptor,
    cap: u64,
) -> Result<VarietyOutcome, VerifyError> {
    if n < 3 {
        return Err(VerifyError::TooFewVertices(n));
    }
    for f in fs {
        if f.characteristic() != fd.p() {
            return Err(VerifyError::Characteristic {
                poly: f.characteristic(),
                field: fd.p(),
            });
        }
        if f.arity() != n {
            return Err(VerifyError::Arity {
                expected: n,
                got: f.arity(),
            });
        }
    }
    let space = enumerate_points_capped(fd, n as usize, cap)?;
    let compiled: Vec<_> = fs
        .iter()
        .map(|f| f.compile(fd).expect("characteristic checked"))
        .collect();
    let chunks = space.len().div_ceil(SWEEP_CHUNK);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = SweepAcc::default();
            let end = ((c + 1) * SWEEP_CHUNK).min(space.len());
            for index in c * SWEEP_CHUNK..end {
                let point = space.point(index);
                let nonzero = compiled.iter().position(|g| !g.eval(fd, &point).is_zero());
                let vanish = nonzero.is_none();
                acc.zeros += vanish as u64;
                let on = in_variety(&point, n);
                if vanish != on && acc.first.is_none() {
                    acc.first = Some(VarietyMismatch {
                        index,
                        point,
                        generators_vanish: vanish,
                        on_variety: on,
                        nonzero_generator: nonzero.map(|i| i + 1),
                    });
                }
            }
            acc
        })
        .reduce(SweepAcc::default, SweepAcc::merge);
    Ok(VarietyOutcome {
        n,
        q: fd.q(),
        points: space.len(),
        zero_count: acc.zeros,
        expected_count: expected_variety_count(n, fd.q() as u64),
        mismatch: acc.first,
    })
}

pub fn variety_equality(
    fs: &[Polynomial],
    n: u32,
    fd: &FieldDescriptor,
) -> Result<VarietyOutcome, VerifyError> {
    variety_equality_capped(fs, n, fd, sweep_cap())
}

/// Re-evaluates a reported mismatch from scratch, with the unreduced
/// exponents. True if the discrepancy is real.
pub fn replay_mismatch(fs: &[Polynomial], n: u32, fd: &FieldDescriptor, point: &[Element]) -> bool {
    let vanish = fs
        .iter()
        .all(|f| f.evaluate(fd, point).map(|v| v.is_zero()).unwrap_or(false));
    vanish != in_variety(point, n)
}

fn membership_result(
    name: &str,
    level: u32,
    what: String,
    f: &Polynomial,
    gens: &[Monomial],
    vars: std::ops::RangeInclusive<u32>,
    needed: &BigUint,
) -> CheckResult {
    match f.in_monomial_ideal(gens) {
        Membership::Member => CheckResult::pass(name, level, what),
        Membership::Outside { witness } => {
            let attained = f.pure_power_floor(vars);
            let floor = attained
                .as_ref()
                .map(|x| x.to_string())
                .unwrap_or_else(|| "-".into());
            let short = attained
                .filter(|x| x < needed)
                .map(|x| format!(" (short by {})", needed - x))
                .unwrap_or_default();
            CheckResult::fail(
                name,
                level,
                format!("{what}: attained exponent {floor}{short}"),
            )
            .with_witness(witness.to_string())
        }
    }
}

/// The matrix `B` with its last row replaced by fresh indeterminates
/// `T_1..T_{n-3}`, placed after the `x`-variables.
fn matrix_with_t_row(art: &LiftArtifacts) -> Result<(PolyMatrix, Polynomial), String> {
    let n = art.level;
    let m = art.matrix.rows();
    let arity = n + m as u32;
    let mut rows = Vec::with_capacity(m);
    for r in 0..m - 1 {
        let row: Result<Vec<_>, _> = art
            .matrix
            .row(r)
            .iter()
            .map(|e| e.with_arity(arity))
            .collect();
        rows.push(row.map_err(|e| e.to_string())?);
    }
    rows.push(
        (1..=m as u32)
            .map(|k| Polynomial::var(art.p, arity, n + k))
            .collect(),
    );
    let mut expected = Polynomial::zero(art.p, arity);
    for (k, d) in art.cofactors.iter().enumerate() {
        let term = d
            .with_arity(arity)
            .and_then(|d| d.mul(&Polynomial::var(art.p, arity, n + k as u32 + 1)))
            .map_err(|e| e.to_string())?;
        expected = expected.add(&term).map_err(|e| e.to_string())?;
    }
    let b = PolyMatrix::from_rows(rows).map_err(|e| e.to_string())?;
    Ok((b, expected))
}

/// The symbolic identities of one lift: `det B = sum Delta_k T_k`, the
/// Laplace identities, the split of `Delta_1` and `Delta_{n-3}`, and the
/// decomposition of `S`.
pub fn resultant_checks(art: &LiftArtifacts) -> Vec<CheckResult> {
    let n = art.level;
    let width = (n - 3) as usize;
    let mut out = Vec::new();
    let fail = |name: &str, e: String| CheckResult::fail(name, n, format!("arithmetic error: {e}"));

    match matrix_with_t_row(art).and_then(|(b, expected)| {
        b.determinant()
            .map(|d| d == expected)
            .map_err(|e| e.to_string())
    }) {
        Ok(true) => out.push(CheckResult::pass(
            "resultant.det_with_t",
            n,
            "first-column expansion of B with a T row equals sum Delta_k T_k",
        )),
        Ok(false) => out.push(CheckResult::fail(
            "resultant.det_with_t",
            n,
            "first-column expansion of B with a T row differs from sum Delta_k T_k",
        )),
        Err(e) => out.push(fail("resultant.det_with_t", e)),
    }

    let assignment: BTreeMap<u32, Polynomial> = (2..=n - 2)
        .map(|j| (y_index(n, j), art.cofactors[(j - 2) as usize].clone()))
        .collect();
    let mut bad = Vec::new();
    for k in 2..=width {
        match art.tilde[k - 1].substitute(&assignment, n) {
            Ok(v) if v.is_zero() => {}
            Ok(v) => bad.push((k, v.terms()[0].0.to_string())),
            Err(e) => bad.push((k, e.to_string())),
        }
    }
    match bad.first() {
        None => out.push(CheckResult::pass(
            "resultant.laplace",
            n,
            format!("f~_k(Delta) = 0 for k = 2..{}", n - 3),
        )),
        Some((k, w)) => out.push(
            CheckResult::fail("resultant.laplace", n, format!("f~_{k}(Delta) != 0"))
                .with_witness(w.clone()),
        ),
    }

    let delta_gens = pure_power_gens(3..=n - 2, &art.delta);
    for (name, idx, head, stored) in [
        (
            "resultant.cofactor_first",
            0usize,
            art.delta_first_head(),
            &art.delta_bar_first,
        ),
        (
            "resultant.cofactor_last",
            width - 1,
            art.delta_last_head(),
            &art.delta_bar_last,
        ),
    ] {
        let bar = match art.cofactors[idx].sub(&head) {
            Ok(b) => b,
            Err(e) => {
                out.push(fail(name, e.to_string()));
                continue;
            }
        };
        if &bar != stored {
            out.push(CheckResult::fail(
                name,
                n,
                format!("stored Delta-bar_{} is stale", idx + 1),
            ));
            continue;
        }
        out.push(membership_result(
            name,
            n,
            format!(
                "Delta_{} - {head} in (x_3^delta..x_{}^delta)",
                idx + 1,
                n - 2
            ),
            &bar,
            &delta_gens,
            3..=n - 2,
            &art.delta,
        ));
    }

    match art.tilde[0].substitute(&assignment, n) {
        Ok(s) if s == art.resultant => out.push(CheckResult::pass(
            "resultant.s_substitution",
            n,
            "S = f~_1(Delta_1..Delta_{n-3})",
        )),
        Ok(_) => out.push(CheckResult::fail(
            "resultant.s_substitution",
            n,
            "stored S differs from f~_1(Delta)",
        )),
        Err(e) => out.push(fail("resultant.s_substitution", e.to_string())),
    }

    let pure = art.pure_term();
    let tail = art.tail_term();
    match art
        .resultant
        .sub(&art.remainder)
        .and_then(|d| d.sub(&pure))
        .and_then(|d| d.sub(&tail))
    {
        Ok(d) if d.is_zero() => out.push(CheckResult::pass(
            "resultant.s_identity",
            n,
            format!("S = F + {pure} + {tail}"),
        )),
        Ok(d) => out.push(
            CheckResult::fail(
                "resultant.s_identity",
                n,
                format!("S - F - {pure} - {tail} != 0"),
            )
            .with_witness(d.terms()[0].0.to_string()),
        ),
        Err(e) => out.push(fail("resultant.s_identity", e.to_string())),
    }

    // F again, through the split cofactors instead of subtraction.
    let mut split = assignment;
    split.insert(y_index(n, 2), art.delta_bar_first.clone());
    split.insert(y_index(n, n - 2), art.delta_bar_last.clone());
    match art.tilde[0].substitute(&split, n) {
        Ok(f) if f == art.remainder => out.push(CheckResult::pass(
            "resultant.f_route",
            n,
            "F = f~_1(Delta-bar_1, Delta_2, .., Delta-bar_{n-3})",
        )),
        Ok(_) => out.push(CheckResult::fail(
            "resultant.f_route",
            n,
            "F differs from f~_1 at the split cofactors",
        )),
        Err(e) => out.push(fail("resultant.f_route", e.to_string())),
    }

    let ideal = cycle_ideal(n).expect("n >= 6");
    out.push(match ideal.contains(&art.remainder) {
        Membership::Member => CheckResult::pass("resultant.f_in_ideal", n, format!("F in I_{n}")),
        Membership::Outside { witness } => {
            CheckResult::fail("resultant.f_in_ideal", n, format!("F not in I_{n}"))
                .with_witness(witness.to_string())
        }
    });
    let ad = &art.alpha * &art.delta;
    out.push(membership_result(
        "resultant.f_alpha_delta",
        n,
        format!("F in (x_3^(alpha delta)..x_{}^(alpha delta))", n - 2),
        &art.remainder,
        &pure_power_gens(3..=n - 2, &ad),
        3..=n - 2,
        &ad,
    ));
    out
}

/// A form in `x, y` with the `x`-part evaluated at one point: pairs of
/// coefficient and reduced `y`-exponents (0-based `y` slots).
type YForm = Vec<(Element, Vec<(usize, u32)>)>;

struct SplitForm {
    parts: Vec<(Vec<(usize, u32)>, crate::mpoly::CompiledPoly)>,
}

fn split_form(f: &Polynomial, n: u32, fd: &FieldDescriptor) -> SplitForm {
    let mut groups: BTreeMap<Vec<(usize, u32)>, Vec<(Monomial, u64)>> = BTreeMap::new();
    for (mono, c) in f.terms() {
        let (xs, ys) = mono.split_at_var(n);
        let key: Vec<(usize, u32)> = ys
            .factors()
            .iter()
            .map(|(v, e)| ((v - n - 1) as usize, fd.reduce_exponent(e)))
            .collect();
        groups.entry(key).or_default().push((xs, *c as u64));
    }
    let parts = groups
        .into_iter()
        .map(|(key, terms)| {
            let coeff = Polynomial::from_terms(f.characteristic(), n, terms).expect("x-part fits");
            (key, coeff.compile(fd).expect("same characteristic"))
        })
        .collect();
    SplitForm { parts }
}

impl SplitForm {
    fn at(&self, fd: &FieldDescriptor, x: &[Element]) -> YForm {
        self.parts
            .iter()
            .map(|(key, c)| (c.eval(fd, x), key.clone()))
            .filter(|(c, _)| !c.is_zero())
            .collect()
    }
}

fn eval_y(fd: &FieldDescriptor, form: &YForm, y: &[Element]) -> Element {
    let mut acc = Element::ZERO;
    for (c, ys) in form {
        let mut t = *c;
        for &(v, e) in ys {
            t = fd.mul(t, fd.pow_u64(y[v], e as u64));
            if t.is_zero() {
                break;
            }
        }
        acc = fd.add(acc, t);
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub level: u32,
    pub q: u32,
    pub seed: u64,
    pub requested: usize,
    pub sampled: usize,
    pub skipped_zero_s: usize,
    /// `(x, y)` with `S(x) != 0`, `y != 0` and every `f~_k(x, y) = 0`.
    pub counterexample: Option<(Vec<Element>, Vec<Element>)>,
}

impl ProbeOutcome {
    pub fn to_check(&self) -> CheckResult {
        let mut r = match &self.counterexample {
            Some((x, y)) => {
                let mut r = CheckResult::fail(
                    "probe",
                    self.level,
                    format!("nontrivial common zero y = {:?} of the f~_k at x with S(x) != 0", codes(y)),
                );
                r.point = Some(codes(x));
                r
            }
            None if self.sampled < self.requested => CheckResult::fail(
                "probe",
                self.level,
                format!(
                    "only {} of {} samples had S(x) != 0 ({} skipped)",
                    self.sampled, self.requested, self.skipped_zero_s
                ),
            ),
            None => CheckResult::pass(
                "probe",
                self.level,
                format!(
                    "{} x-points with S(x) != 0 admit only y = 0 ({} samples with S(x) = 0 skipped)",
                    self.sampled, self.skipped_zero_s
                ),
            ),
        };
        r.seed = Some(self.seed);
        r.sweep = Some(self.sampled as u64);
        r.with_field(self.q)
    }
}

fn codes(v: &[Element]) -> Vec<u32> {
    v.iter().map(|e| e.code()).collect()
}

/// Samples `trials` points `x` with `S(x) != 0` and checks, by enumerating
/// `F_q^{n-3}`, that the specialised forms `f~_k(x, y)` share no zero
/// besides `y = 0`.
pub fn trivial_solution_probe_capped(
    art: &LiftArtifacts,
    fd: &FieldDescriptor,
    trials: usize,
    seed: u64,
    cap: u64,
) -> Result<ProbeOutcome, VerifyError> {
    let n = art.level;
    if fd.p() != art.p {
        return Err(VerifyError::Characteristic {
            poly: art.p,
            field: fd.p(),
        });
    }
    let yspace = enumerate_points_capped(fd, (n - 3) as usize, cap)?;
    let s = art.resultant.compile(fd).expect("characteristic checked");
    let forms: Vec<SplitForm> = art.tilde.iter().map(|f| split_form(f, n, fd)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = trials.saturating_mul(100).max(100);
    let mut xs = Vec::with_capacity(trials);
    let mut skipped = 0;
    for _ in 0..max_attempts {
        if xs.len() == trials {
            break;
        }
        let x: Vec<Element> = (0..n).map(|_| Element(rng.gen_range(0..fd.q()))).collect();
        if s.eval(fd, &x).is_zero() {
            skipped += 1;
        } else {
            xs.push(x);
        }
    }

    let found = xs
        .par_iter()
        .map(|x| {
            let special: Vec<YForm> = forms.iter().map(|f| f.at(fd, x)).collect();
            (1..yspace.len()).find_map(|idx| {
                let y = yspace.point(idx);
                special
                    .iter()
                    .all(|f| eval_y(fd, f, &y).is_zero())
                    .then(|| (x.clone(), y))
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();

    Ok(ProbeOutcome {
        level: n,
        q: fd.q(),
        seed,
        requested: trials,
        sampled: xs.len(),
        skipped_zero_s: skipped,
        counterexample: found,
    })
}

pub fn trivial_solution_probe(
    art: &LiftArtifacts,
    fd: &FieldDescriptor,
    trials: usize,
    seed: u64,
) -> Result<ProbeOutcome, VerifyError> {
    trivial_solution_probe_capped(art, fd, trials, seed, sweep_cap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::field_make;
    use crate::lift::{base5, build_chain, Mode};
    use crate::schedule::make_minimal;

    fn level6() -> crate::lift::Chain {
        build_chain(&make_minimal(2, 6).unwrap(), 6, Mode::Carried).unwrap()
    }

    #[test]
    fn membership_examples() {
        let chain = level6();
        assert!(membership_check(&chain.top().polys, 6).passed());
        let edge = Polynomial::monomial(2, 5, Monomial::from_pairs([(1u32, 1u32), (2, 1)]));
        let r = membership_check(&[edge], 5);
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.witness.as_deref(), Some("x_1*x_2"));
        assert!(membership_check(&[], 5).passed());
    }

    #[test]
    fn variety_examples() {
        let s = make_minimal(2, 6).unwrap();
        let g = base5(&s).unwrap();
        let f2 = field_make(2, 1).unwrap();
        let out = variety_equality(&g.polys, 5, &f2).unwrap();
        assert!(out.equal());
        assert_eq!((out.points, out.zero_count), (32, 11));

        let f4 = field_make(2, 2).unwrap();
        let out = variety_equality(&level6().top().polys, 6, &f4).unwrap();
        assert!(out.equal(), "{:?}", out);
        assert_eq!((out.points, out.zero_count), (4096, 73));

        let x1 = Polynomial::var(2, 4, 1);
        let out = variety_equality(std::slice::from_ref(&x1), 4, &f2).unwrap();
        // The sweep reports the first disagreement in odometer order: x_1
        // vanishes on (0,1,0,1), which is off V(I_4).
        let m = out.mismatch.clone().unwrap();
        assert_eq!(
            m.point,
            vec![Element(0), Element(1), Element(0), Element(1)]
        );
        assert!(!m.on_variety && m.generators_vanish);
        assert!(replay_mismatch(std::slice::from_ref(&x1), 4, &f2, &m.point));
        let edge = [Element(1), Element(1), Element(0), Element(0)];
        assert!(replay_mismatch(&[x1], 4, &f2, &edge));
        assert_eq!(out.to_check().status, Status::Fail);
    }

    #[test]
    fn sweep_cap_is_enforced() {
        let f4 = field_make(2, 2).unwrap();
        let err = variety_equality_capped(&[], 6, &f4, 1000).unwrap_err();
        assert!(matches!(
            err,
            VerifyError::Field(GfError::SweepTooLarge { .. })
        ));
    }

    #[test]
    fn level_six_resultant() {
        let chain = level6();
        let art = &chain.artifacts[0];
        let checks = resultant_checks(art);
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
        assert!(art.delta_bar_last.is_zero());
    }

    #[test]
    fn level_six_probe() {
        let chain = level6();
        let f4 = field_make(2, 2).unwrap();
        let out = trivial_solution_probe(&chain.artifacts[0], &f4, 100, 0).unwrap();
        assert_eq!(out.sampled, 100);
        assert!(out.counterexample.is_none());
        assert!(out.to_check().passed());
        let again = trivial_solution_probe(&chain.artifacts[0], &f4, 100, 0).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn skipped_is_not_pass() {
        let mut rep = VerificationReport::default();
        rep.push(CheckResult::skipped("probe", 6, "no artifacts"));
        assert!(rep.ok());
        assert_eq!(rep.count(Status::Pass), 0);
        rep.push(CheckResult::fail("membership", 6, "x"));
        assert!(!rep.ok());
    }
}
