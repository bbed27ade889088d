//! The exponent ledger that drives the construction: for levels `n = 5..=N`
//! the integers `r, s, gamma, delta, alpha, beta, lambda, epsilon`, plus
//! `r` at level 4.
//!
//! Every value is an unbounded natural. Construction (`make_minimal`,
//! `make_custom`) never rejects a ledger that breaks the required
//! inequalities; `validate` reports on them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::gf::is_prime;
use crate::mpoly::p_power_exponent;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("top level N must be at least 6, got {0}")]
    TopLevelTooSmall(u32),
    #[error("no value of r supplied for level {0}")]
    MissingR(u32),
    #[error("gamma at level {level} has {got} entries, expected {expected}")]
    GammaLength {
        level: u32,
        got: usize,
        expected: usize,
    },
    #[error("schedule has no level {level} (levels 5..={top})")]
    MissingLevel { level: u32, top: u32 },
}

/// How `p^{s[n]} - p^{r[n]}` is shared out over `gamma[n][2..]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaRule {
    /// As even as possible; the first `remainder` entries get one extra.
    EvenSplit,
    /// Whole rows given per level, `gamma[n][1]` included.
    Explicit(BTreeMap<u32, Vec<BigUint>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub p: u32,
    pub top: u32,
    /// Levels `4..=top`.
    pub r: BTreeMap<u32, BigUint>,
    /// The remaining maps cover levels `5..=top`.
    pub s: BTreeMap<u32, BigUint>,
    pub gamma: BTreeMap<u32, Vec<BigUint>>,
    pub delta: BTreeMap<u32, BigUint>,
    pub alpha: BTreeMap<u32, BigUint>,
    pub beta: BTreeMap<u32, BigUint>,
    pub lambda: BTreeMap<u32, BigUint>,
    pub epsilon: BTreeMap<u32, BigUint>,
}

/// The parameters of a single level, cloned out of a [`Schedule`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelParams {
    pub level: u32,
    pub r: BigUint,
    pub s: BigUint,
    pub gamma: Vec<BigUint>,
    pub delta: BigUint,
    pub alpha: BigUint,
    pub beta: BigUint,
    pub lambda: BigUint,
    pub epsilon: BigUint,
}

fn pow(p: u32, e: &BigUint) -> BigUint {
    let e: u32 = e
        .try_into()
        .expect("exponent of an exponent fits in 32 bits");
    BigUint::from(p).pow(e)
}

fn even_split(p: u32, level: u32, r: &BigUint, s: &BigUint) -> Vec<BigUint> {
    let first = pow(p, r);
    let total = pow(p, s);
    let parts = (level - 4) as usize;
    let rest = total - &first;
    let base = &rest / parts;
    let extra: usize = (&rest % parts)
        .try_into()
        .expect("remainder below part count");
    let mut row = vec![first];
    row.extend((0..parts).map(|i| {
        if i < extra {
            &base + 1u32
        } else {
            base.clone()
        }
    }));
    row
}

/// The smallest ledger allowed: `r[N] = 1`, `r[n-1] = 2 r[n] + N + 1`,
/// evenly split gammas, `lambda[5] = delta[5] + 1` and
/// `epsilon[5] = alpha[5] delta[5] + 1`.
pub fn make_minimal(p: u32, top: u32) -> Result<Schedule, ScheduleError> {
    if !is_prime(p as u64) {
        return Err(ScheduleError::NotPrime(p));
    }
    if top < 6 {
        return Err(ScheduleError::TopLevelTooSmall(top));
    }
    let mut r = BTreeMap::new();
    r.insert(top, BigUint::one());
    for n in (5..=top).rev() {
        let next = BigUint::from(2u32) * &r[&n] + top + 1u32;
        r.insert(n - 1, next);
    }
    let delta5 = pow(p, &r[&4]);
    let alpha5 = pow(p, &r[&5]);
    let lambda5 = &delta5 + 1u32;
    let epsilon5 = &alpha5 * &delta5 + 1u32;
    make_custom(p, top, r, GammaRule::EvenSplit, lambda5, epsilon5)
}

/// Fills in a ledger from free choices. Only structural problems are errors.
pub fn make_custom(
    p: u32,
    top: u32,
    r: BTreeMap<u32, BigUint>,
    gamma_rule: GammaRule,
    lambda5: BigUint,
    epsilon5: BigUint,
) -> Result<Schedule, ScheduleError> {
    if top < 6 {
        return Err(ScheduleError::TopLevelTooSmall(top));
    }
    for n in 4..=top {
        if !r.contains_key(&n) {
            return Err(ScheduleError::MissingR(n));
        }
    }
    let mut sched = Schedule {
        p,
        top,
        r: r.into_iter()
            .filter(|(n, _)| (4..=top).contains(n))
            .collect(),
        s: BTreeMap::new(),
        gamma: BTreeMap::new(),
        delta: BTreeMap::new(),
        alpha: BTreeMap::new(),
        beta: BTreeMap::new(),
        lambda: BTreeMap::new(),
        epsilon: BTreeMap::new(),
    };
    for n in 5..=top {
        let s = &sched.r[&n] + top;
        let row = match &gamma_rule {
            GammaRule::EvenSplit => even_split(p, n, &sched.r[&n], &s),
            GammaRule::Explicit(rows) => rows.get(&n).cloned().unwrap_or_default(),
        };
        if row.len() != (n - 3) as usize {
            return Err(ScheduleError::GammaLength {
                level: n,
                got: row.len(),
                expected: (n - 3) as usize,
            });
        }
        sched.s.insert(n, s);
        sched.gamma.insert(n, row);
        sched.delta.insert(n, pow(p, &sched.r[&(n - 1)]));
    }
    sched.alpha.insert(5, pow(p, &sched.r[&5]));
    sched.beta.insert(5, BigUint::one());
    sched.lambda.insert(5, lambda5);
    sched.epsilon.insert(5, epsilon5);
    for n in 6..=top {
        let prev_alpha = sched.alpha[&(n - 1)].clone();
        let ps_prev = pow(p, &sched.s[&(n - 1)]);
        sched.alpha.insert(n, &prev_alpha * &ps_prev);
        let beta = &sched.beta[&(n - 1)] * &sched.lambda[&(n - 1)];
        sched.beta.insert(n, beta);
        sched.lambda.insert(n, prev_alpha.clone());
        // A ledger breaking the r-chain can make this negative; clamp to zero
        // and let `validate` flag inequality (11).
        let gap = if sched.delta[&(n - 1)] > ps_prev {
            &sched.delta[&(n - 1)] - &ps_prev
        } else {
            BigUint::zero()
        };
        sched.epsilon.insert(n, prev_alpha * gap);
    }
    Ok(sched)
}

impl Schedule {
    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        5..=self.top
    }

    /// `p^e` in this schedule's characteristic.
    pub fn p_pow(&self, e: &BigUint) -> BigUint {
        pow(self.p, e)
    }

    pub fn level(&self, n: u32) -> Result<LevelParams, ScheduleError> {
        if !(5..=self.top).contains(&n) {
            return Err(ScheduleError::MissingLevel {
                level: n,
                top: self.top,
            });
        }
        Ok(LevelParams {
            level: n,
            r: self.r[&n].clone(),
            s: self.s[&n].clone(),
            gamma: self.gamma[&n].clone(),
            delta: self.delta[&n].clone(),
            alpha: self.alpha[&n].clone(),
            beta: self.beta[&n].clone(),
            lambda: self.lambda[&n].clone(),
            epsilon: self.epsilon[&n].clone(),
        })
    }
}

/// One line of a [`ScheduleReport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleCheck {
    /// Which requirement: `"(1)"`, `"(2)"`, `"(9)"`, `"(10)"`, `"(11)"`,
    /// `"lambda5"`, `"epsilon5"` or `"p-power"`.
    pub label: &'static str,
    pub level: u32,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScheduleReport {
    pub checks: Vec<ScheduleCheck>,
}

impl ScheduleReport {
    pub fn all_pass(&self, label: &str) -> bool {
        self.checks
            .iter()
            .filter(|c| c.label == label)
            .all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ScheduleCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find(&self, label: &str, level: u32) -> Option<&ScheduleCheck> {
        self.checks
            .iter()
            .find(|c| c.label == label && c.level == level)
    }
}

impl fmt::Display for ScheduleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            writeln!(f, "{:>9} n={:<3} {verdict}  {}", c.label, c.level, c.detail)?;
        }
        Ok(())
    }
}

fn describe(x: &BigUint) -> String {
    if x.bits() <= 64 {
        x.to_string()
    } else {
        format!("<{} bits>", x.bits())
    }
}

/// Checks the ledger against the requirements the construction relies on.
/// Never fails; every requirement becomes a line in the report.
pub fn validate(s: &Schedule) -> ScheduleReport {
    let mut checks = Vec::new();
    let mut push = |label, level, pass, detail: String| {
        checks.push(ScheduleCheck {
            label,
            level,
            pass,
            detail,
        })
    };
    let top = s.top;
    for n in 5..=top {
        let bound = BigUint::from(2u32) * &s.r[&n] + top;
        push(
            "(1)",
            n,
            s.r[&(n - 1)] > bound,
            format!("r[{}]={} > 2r[{n}]+N={}", n - 1, s.r[&(n - 1)], bound),
        );
    }
    for n in 5..=top {
        let row = &s.gamma[&n];
        let sum: BigUint = row.iter().sum();
        let target = s.p_pow(&s.s[&n]);
        let first_ok = row[0] == s.p_pow(&s.r[&n]);
        let min_ok = row.iter().all(|g| *g >= row[0]);
        let positive = row.iter().all(|g| !g.is_zero());
        push(
            "(2)",
            n,
            sum == target && first_ok && min_ok && positive,
            format!(
                "sum gamma = {} vs p^s = {}; gamma_1 = p^r: {first_ok}; gamma_1 minimal: {min_ok}",
                describe(&sum),
                describe(&target)
            ),
        );
    }
    for n in 6..=top {
        push(
            "(9)",
            n,
            s.delta[&(n - 1)] > s.delta[&n],
            format!(
                "delta[{}]={} > delta[{n}]={}",
                n - 1,
                describe(&s.delta[&(n - 1)]),
                describe(&s.delta[&n])
            ),
        );
    }
    for n in 6..=top {
        let (l, d) = (&s.lambda[&n], &s.delta[&n]);
        let detail = if l == d {
            format!(
                "lambda[{n}] = delta[{n}] = {} (strict inequality fails)",
                describe(l)
            )
        } else {
            format!("lambda[{n}]={} > delta[{n}]={}", describe(l), describe(d))
        };
        push("(10)", n, l > d, detail);
    }
    for n in 5..=top {
        let ad = &s.alpha[&n] * &s.delta[&n];
        push(
            "(11)",
            n,
            s.epsilon[&n] > ad,
            format!(
                "epsilon[{n}]={} > alpha*delta={}",
                describe(&s.epsilon[&n]),
                describe(&ad)
            ),
        );
    }
    push(
        "lambda5",
        5,
        s.lambda[&5] > s.delta[&5],
        format!(
            "lambda[5]={} > delta[5]={}",
            describe(&s.lambda[&5]),
            describe(&s.delta[&5])
        ),
    );
    push(
        "epsilon5",
        5,
        s.epsilon[&5] > &s.alpha[&5] * &s.delta[&5],
        format!("epsilon[5]={}", describe(&s.epsilon[&5])),
    );
    for n in 5..=top {
        let ok = p_power_exponent(&s.alpha[&n], s.p).is_some();
        push(
            "p-power",
            n,
            ok,
            format!("alpha[{n}] = {}", describe(&s.alpha[&n])),
        );
    }
    ScheduleReport { checks }
}
