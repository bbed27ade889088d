//! The recursive construction.
//!
//! A [`StructuredGenerators`] at level `m` holds `m - 2` polynomials in
//! `x_1..x_m` together with the coefficient table that exhibits their shape:
//!
//! ```text
//! h_1     = A[1][2] x_2^E1 + sum_{j=3}^{m-2} A[1][j] x_j^lambda
//! h_2     = A[2][2] x_2^E2 + sum_{j=3}^{m-2} A[2][j] x_j
//! h_i     =                  sum_{j=3}^{m-2} A[i][j] x_j           3 <= i <= m-3
//! h_{m-2} =                  sum_{j=3}^{m-2} A[m-2][j] x_j^alpha + x_1 x_{m-1}^alpha
//! ```
//!
//! [`base5`] gives level 5 and [`lift_once`] passes from level `n - 1` to
//! level `n`: the first `n - 3` new generators are the old ones plus a pure
//! `x_n`-power times a variable, and the last is obtained from the resultant
//! of an auxiliary system in new variables `y_2..y_{n-2}`, computed by
//! substituting the last-row cofactors of its linear part into its one
//! nonlinear form.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::mpoly::{pure_power_gens, Membership, Monomial, PolyError, PolyMatrix, Polynomial};
use crate::schedule::{LevelParams, Schedule, ScheduleError};
use crate::srideal::{cycle_ideal, CycleIdeal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("polynomial arithmetic: {0}")]
    Poly(#[from] PolyError),
    #[error("level {level}: h_{index} does not match its coefficient table")]
    FlattenMismatch { level: u32, index: usize },
    #[error("level {level}: stored {name} disagrees with the schedule")]
    ParamMismatch { level: u32, name: &'static str },
    #[error("level {level}: cannot lift to {target} (schedule covers up to {top})")]
    OutOfRange { level: u32, target: u32, top: u32 },
    #[error("level {level}: remainder F leaves {ideal} at term {witness}")]
    RemainderMembership {
        level: u32,
        ideal: &'static str,
        witness: String,
    },
    #[error("level {level}: {what}: {source}")]
    Decompose {
        level: u32,
        what: &'static str,
        source: PolyError,
    },
    #[error("level {level}: auxiliary form {form} is not linear in y_2..y_{{n-2}}")]
    NotLinear { level: u32, form: usize },
}

/// How the exponent of `x_2` in the new first generator is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `alpha * E1`, where `E1` is the exponent actually carried by `h_1`.
    Carried,
    /// `alpha * lambda * beta` from the ledger, as the closed form reads.
    Literal,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Carried => "carried",
            Mode::Literal => "literal",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "carried" => Ok(Mode::Carried),
            "literal" => Ok(Mode::Literal),
            other => Err(format!(
                "unknown mode {other:?} (expected carried or literal)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coefficients `A[i][j]` for `i = 1..=m-2`, `j = 2..=m-2`. Positions the
/// shape leaves out (e.g. `A[3][2]`, or anything past the table) read as
/// zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTable {
    level: u32,
    rows: Vec<Vec<Polynomial>>,
    zero: Polynomial,
}

impl CoeffTable {
    pub fn new(level: u32, p: u32, rows: Vec<Vec<Polynomial>>) -> Self {
        debug_assert_eq!(rows.len(), (level - 2) as usize);
        debug_assert!(rows.iter().all(|r| r.len() == (level - 3) as usize));
        CoeffTable {
            level,
            rows,
            zero: Polynomial::zero(p, level),
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn get(&self, i: u32, j: u32) -> &Polynomial {
        if i < 1 || j < 2 || i > self.level - 2 || j > self.level - 2 {
            return &self.zero;
        }
        &self.rows[(i - 1) as usize][(j - 2) as usize]
    }

    pub fn rows(&self) -> &[Vec<Polynomial>] {
        &self.rows
    }

    pub fn set(&mut self, i: u32, j: u32, value: Polynomial) {
        self.rows[(i - 1) as usize][(j - 2) as usize] = value;
    }
}

/// A level-`m` generator set together with the data that exhibits its shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredGenerators {
    pub p: u32,
    pub level: u32,
    /// `h_1..h_{m-2}` in `x_1..x_m`.
    pub polys: Vec<Polynomial>,
    pub table: CoeffTable,
    /// Exponents of `x_2` in `h_1` and `h_2`.
    pub e1: BigUint,
    pub e2: BigUint,
    /// Exponent of `x_j` in `h_1`.
    pub lambda: BigUint,
    /// Exponent of `x_j` (and of `x_{m-1}` in the tail) in `h_{m-2}`.
    pub alpha: BigUint,
    pub gamma: Vec<BigUint>,
    pub delta: BigUint,
    pub epsilon: BigUint,
}

fn xv(p: u32, arity: u32, i: u32) -> Polynomial {
    Polynomial::var(p, arity, i)
}

fn xpow(p: u32, arity: u32, i: u32, e: &BigUint) -> Polynomial {
    Polynomial::var_pow(p, arity, i, e.clone())
}

impl StructuredGenerators {
    /// Reassembles `h_1..h_{m-2}` from the coefficient table.
    pub fn flatten(&self) -> Result<Vec<Polynomial>, PolyError> {
        let (p, m) = (self.p, self.level);
        let a = &self.table;
        let mut out = Vec::with_capacity((m - 2) as usize);
        let mut h1 = a.get(1, 2).mul(&xpow(p, m, 2, &self.e1))?;
        for j in 3..=m - 2 {
            h1 = h1.add(&a.get(1, j).mul(&xpow(p, m, j, &self.lambda))?)?;
        }
        out.push(h1);
        let mut h2 = a.get(2, 2).mul(&xpow(p, m, 2, &self.e2))?;
        for j in 3..=m - 2 {
            h2 = h2.add(&a.get(2, j).mul(&xv(p, m, j))?)?;
        }
        out.push(h2);
        for i in 3..=m - 3 {
            let mut hi = Polynomial::zero(p, m);
            for j in 3..=m - 2 {
                hi = hi.add(&a.get(i, j).mul(&xv(p, m, j))?)?;
            }
            out.push(hi);
        }
        let mut last = Polynomial::monomial(
            p,
            m,
            Monomial::from_pairs([(1, BigUint::one()), (m - 1, self.alpha.clone())]),
        );
        for j in 3..=m - 2 {
            last = last.add(&a.get(m - 2, j).mul(&xpow(p, m, j, &self.alpha))?)?;
        }
        out.push(last);
        Ok(out)
    }

    /// Index of the first `h_i` that differs from its reassembly.
    pub fn flatten_mismatch(&self) -> Result<Option<usize>, PolyError> {
        let flat = self.flatten()?;
        if flat.len() != self.polys.len() {
            return Ok(Some(flat.len().min(self.polys.len()) + 1));
        }
        Ok(flat
            .iter()
            .zip(&self.polys)
            .position(|(a, b)| a != b)
            .map(|i| i + 1))
    }

    /// `b_i = A[i][i+1] - x_m^{gamma_i}` for `i = 1..=m-3`.
    pub fn b(&self, i: u32) -> Result<Polynomial, PolyError> {
        let m = self.level;
        self.table
            .get(i, i + 1)
            .sub(&xpow(self.p, m, m, &self.gamma[(i - 1) as usize]))
    }

    pub fn total_terms(&self) -> usize {
        self.polys.iter().map(Polynomial::len).sum()
    }

    fn matches(&self, params: &LevelParams) -> Result<(), LiftError> {
        let level = self.level;
        let checks: [(&'static str, bool); 5] = [
            ("lambda", self.lambda == params.lambda),
            ("alpha", self.alpha == params.alpha),
            ("gamma", self.gamma == params.gamma),
            ("delta", self.delta == params.delta),
            ("epsilon", self.epsilon == params.epsilon),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(LiftError::ParamMismatch { level, name }),
            None => Ok(()),
        }
    }
}

/// Everything computed along one lift from level `n - 1` to level `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftArtifacts {
    /// The new level `n`.
    pub level: u32,
    pub p: u32,
    /// `a'_{1,j} = A[1][j] x_j^{lambda-1}` for `j = 3..=n-3`.
    pub a1_prime: Vec<Polynomial>,
    /// `a'_{2,j} = A[2][j] + d_j x_2^E2 x_j^{delta-1}` for `j = 3..=n-2`, so that
    /// `h_2 = sum_j a'_{2,j} x_j`.
    pub a2_prime: Vec<Polynomial>,
    /// `d_j` for `j = 3..=n-2`, with `A[2][2] = sum d_j x_j^delta`.
    pub d: Vec<Polynomial>,
    pub b2_prime: Polynomial,
    /// The auxiliary forms in `x_1..x_n, y_2..y_{n-2}`; `y_j` is variable
    /// `n + j - 1`.
    pub tilde: Vec<Polynomial>,
    /// Coefficient rows of the linear forms with a placeholder last row.
    pub matrix: PolyMatrix,
    /// `Delta_1..Delta_{n-3}`.
    pub cofactors: Vec<Polynomial>,
    pub delta_bar_first: Polynomial,
    pub delta_bar_last: Polynomial,
    pub resultant: Polynomial,
    pub remainder: Polynomial,
    /// `delta` and `alpha` of level `n - 1`.
    pub delta: BigUint,
    pub alpha: BigUint,
    /// `p^s` of level `n - 1` and `p^{s'}` of level `n`.
    pub ps: BigUint,
    pub ps_next: BigUint,
    /// `gamma'_1`.
    pub gamma1_next: BigUint,
    /// Coefficient of the pure `x_n`-power in `Delta_1` (and in `S`): the
    /// diagonal product sits `n - 4` transpositions away from the identity,
    /// so this is `(-1)^n`, which is `1` in characteristic 2.
    pub pure_sign: u32,
    /// Violations let through under [`LiftPolicy::Record`].
    pub deviations: Vec<LiftError>,
}

impl LiftArtifacts {
    pub fn tilde_arity(&self) -> u32 {
        2 * self.level - 3
    }

    /// Variable index of `y_j`.
    pub fn y(&self, j: u32) -> u32 {
        y_index(self.level, j)
    }

    /// Exponent of the pure `x_n`-power split off the resultant:
    /// `gamma'_1 + alpha (p^{s'} - gamma'_1)`.
    pub fn pure_exponent(&self) -> BigUint {
        &self.gamma1_next + &self.alpha * (&self.ps_next - &self.gamma1_next)
    }

    /// Exponent of `x_{n-1}` in the tail `x_1 x_{n-1}^{alpha p^s}`.
    pub fn tail_exponent(&self) -> BigUint {
        &self.alpha * &self.ps
    }

    pub fn pure_term(&self) -> Polynomial {
        Polynomial::term(
            self.p,
            self.level,
            self.pure_sign as u64,
            Monomial::var_pow(self.level, self.pure_exponent()),
        )
    }

    /// `sigma x_n^{p^{s'} - gamma'_1}`, the part split off `Delta_1`.
    pub fn delta_first_head(&self) -> Polynomial {
        Polynomial::term(
            self.p,
            self.level,
            self.pure_sign as u64,
            Monomial::var_pow(self.level, &self.ps_next - &self.gamma1_next),
        )
    }

    /// `x_{n-1}^{p^s}`, the part split off `Delta_{n-3}`.
    pub fn delta_last_head(&self) -> Polynomial {
        xpow(self.p, self.level, self.level - 1, &self.ps)
    }

    pub fn tail_term(&self) -> Polynomial {
        Polynomial::monomial(
            self.p,
            self.level,
            Monomial::from_pairs([(1, BigUint::one()), (self.level - 1, self.tail_exponent())]),
        )
    }
}

pub fn y_index(n: u32, j: u32) -> u32 {
    n + j - 1
}
/// Recovers the matrix rows of a lift from its auxiliary forms: row `i` holds
/// the `x`-coefficients of `y_2..y_{n-2}` in form `i + 1`, which must be linear
/// in `y`; a zero placeholder row is appended last.
pub fn linear_rows_from_tilde(
    tilde: &[Polynomial],
    n: u32,
) -> Result<Vec<Vec<Polynomial>>, LiftError> {
    let width = (n - 3) as usize;
    let mut rows = Vec::with_capacity(width);
    for (form, f) in tilde.iter().enumerate().skip(1) {
        let mut parts: Vec<Vec<(Monomial, u64)>> = vec![Vec::new(); width];
        for (m, c) in f.terms() {
            let (x, yv) = m.split_at_var(n);
            let linear = match yv.factors() {
                [(v, e)] if e.is_one() && *v >= y_index(n, 2) && *v <= y_index(n, n - 2) => {
                    Some(*v)
                }
                _ => None,
            };
            let Some(v) = linear else {
                return Err(LiftError::NotLinear {
                    level: n,
                    form: form + 1,
                });
            };
            parts[(v - y_index(n, 2)) as usize].push((x, *c as u64));
        }
        let row: Result<Vec<_>, _> = parts
            .into_iter()
            .map(|ts| Polynomial::from_terms(f.characteristic(), n, ts))
            .collect();
        rows.push(row?);
    }
    rows.push(vec![Polynomial::zero(tilde[0].characteristic(), n); width]);
    Ok(rows)
}

/// The level-5 generators
/// `x_5^{g1} x_2 + x_1 x_3^lambda`, `x_4^lambda x_2 + x_5^{g2} x_3`,
/// `x_1 x_4^alpha`.
pub fn base5(s: &Schedule) -> Result<StructuredGenerators, LiftError> {
    let params = s.level(5)?;
    let p = s.p;
    let m = 5;
    let rows = vec![
        vec![xpow(p, m, 5, &params.gamma[0]), xv(p, m, 1)],
        vec![
            xpow(p, m, 4, &params.lambda),
            xpow(p, m, 5, &params.gamma[1]),
        ],
        vec![Polynomial::zero(p, m), Polynomial::zero(p, m)],
    ];
    let mut g = StructuredGenerators {
        p,
        level: m,
        polys: Vec::new(),
        table: CoeffTable::new(m, p, rows),
        e1: BigUint::one(),
        e2: BigUint::one(),
        lambda: params.lambda,
        alpha: params.alpha,
        gamma: params.gamma,
        delta: params.delta,
        epsilon: params.epsilon,
    };
    g.polys = g.flatten()?;
    Ok(g)
}

fn embed(f: &Polynomial, arity: u32) -> Result<Polynomial, PolyError> {
    f.with_arity(arity)
}

/// What to do when `F` misses `(x_3^{alpha delta}, ..., x_{n-2}^{alpha delta})`.
///
/// That membership is what makes the extracted coefficients keep their
/// `x_j^epsilon` factors; the new generators themselves only need `F` in
/// `I_n` and divisible termwise by some `x_j^{alpha'}`, which are always
/// enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LiftPolicy {
    #[default]
    Strict,
    /// Keep going and list the violation in [`LiftArtifacts::deviations`].
    Record,
}

/// One step of the recursion: from `g` at level `n - 1` to level `n`.
pub fn lift_once(
    g: &StructuredGenerators,
    s: &Schedule,
    mode: Mode,
) -> Result<(StructuredGenerators, LiftArtifacts), LiftError> {
    lift_once_with(g, s, mode, LiftPolicy::Strict)
}

pub fn lift_once_with(
    g: &StructuredGenerators,
    s: &Schedule,
    mode: Mode,
    policy: LiftPolicy,
) -> Result<(StructuredGenerators, LiftArtifacts), LiftError> {
    let m = g.level;
    let n = m + 1;
    if n < 6 || n > s.top {
        return Err(LiftError::OutOfRange {
            level: m,
            target: n,
            top: s.top,
        });
    }
    let cur = s.level(m)?;
    let next = s.level(n)?;
    g.matches(&cur)?;
    if let Some(index) = g.flatten_mismatch()? {
        return Err(LiftError::FlattenMismatch { level: m, index });
    }

    let p = s.p;
    let tn = 2 * n - 3;
    let y = |j: u32| y_index(n, j);
    let a = |i: u32, j: u32| embed(g.table.get(i, j), n);
    let lam_minus_1 = &cur.lambda - 1u32;
    let delta = &cur.delta;
    let alpha = &cur.alpha;
    let ps = s.p_pow(&cur.s);
    let ps_next = s.p_pow(&next.s);
    let gamma_next = &next.gamma;

    // A[2][2] = sum_{j=3}^{n-2} d_j x_j^delta
    let d = a(2, 2)?
        .decompose_pure_power(3..=n - 2, delta)
        .map_err(|source| LiftError::Decompose {
            level: n,
            what: "A[2][2] over x_j^delta",
            source,
        })?;
    let dj = |j: u32| &d[(j - 3) as usize];

    let mut a1_prime = Vec::new();
    for j in 3..=n - 3 {
        a1_prime.push(a(1, j)?.mul(&xpow(p, n, j, &lam_minus_1))?);
    }
    let x2_e2 = xpow(p, n, 2, &g.e2);
    let delta_minus_1 = delta - 1u32;
    let mut a2_prime = Vec::new();
    for j in 3..=n - 2 {
        let extra = dj(j).mul(&x2_e2)?.mul(&xpow(p, n, j, &delta_minus_1))?;
        a2_prime.push(a(2, j)?.add(&extra)?);
    }
    let b2_prime = a2_prime[0].sub(&xpow(p, n, n - 1, &cur.gamma[1]))?;
    let xn = |i: usize| xpow(p, n, n, &gamma_next[i - 1]);

    // Coefficient rows c_{i,j}, i = 2..=n-3, j = 2..=n-2.
    let width = (n - 3) as usize;
    let mut crow: Vec<Vec<Polynomial>> = Vec::new();
    {
        let mut row = vec![Polynomial::zero(p, n); width];
        row[0] = a(1, 2)?;
        for j in 3..=n - 3 {
            row[(j - 2) as usize] = a1_prime[(j - 3) as usize].clone();
        }
        row[1] = row[1].add(&xn(2))?;
        crow.push(row);
    }
    {
        let mut row = vec![Polynomial::zero(p, n); width];
        for j in 3..=n - 2 {
            row[(j - 2) as usize] = a2_prime[(j - 3) as usize].clone();
        }
        row[2] = row[2].add(&xn(3))?;
        crow.push(row);
    }
    for i in 4..=n - 3 {
        let mut row = vec![Polynomial::zero(p, n); width];
        for j in 3..=n - 3 {
            row[(j - 2) as usize] = a(i - 1, j)?;
        }
        let k = (i + 1 - 2) as usize;
        row[k] = row[k].add(&xn(i as usize))?;
        crow.push(row);
    }

    // Auxiliary forms in x_1..x_n, y_2..y_{n-2}.
    let lift_x = |f: &Polynomial| embed(f, tn);
    let ypow = |j: u32, e: &BigUint| xpow(p, tn, y(j), e);
    let mut tilde = Vec::with_capacity(width);
    {
        let mut f1 = lift_x(&xn(1))?.mul(&ypow(2, alpha))?;
        for j in 3..=n - 3 {
            f1 = f1.add(&lift_x(&a(n - 3, j)?)?.mul(&ypow(j, alpha))?)?;
        }
        f1 = f1.add(&xv(p, tn, 1).mul(&ypow(n - 2, alpha))?)?;
        tilde.push(f1);
    }
    for row in &crow {
        let mut fi = Polynomial::zero(p, tn);
        for (k, c) in row.iter().enumerate() {
            fi = fi.add(&lift_x(c)?.mul(&xv(p, tn, y(k as u32 + 2)))?)?;
        }
        tilde.push(fi);
    }

    let mut mrows = crow.clone();
    mrows.push(vec![Polynomial::zero(p, n); width]);
    let matrix = PolyMatrix::from_rows(mrows)?;
    let cofactors = matrix.det_cofactors_last_row()?;

    let assignment: BTreeMap<u32, Polynomial> = (2..=n - 2)
        .map(|j| (y(j), cofactors[(j - 2) as usize].clone()))
        .collect();
    let resultant = tilde[0].substitute(&assignment, n)?;

    let gamma1_next = gamma_next[0].clone();
    let pure_sign = if n.is_multiple_of(2) { 1 } else { p - 1 };
    let mut art = LiftArtifacts {
        level: n,
        p,
        a1_prime,
        a2_prime,
        d: d.clone(),
        b2_prime,
        tilde,
        matrix,
        delta_bar_first: Polynomial::zero(p, n),
        delta_bar_last: Polynomial::zero(p, n),
        cofactors,
        resultant,
        remainder: Polynomial::zero(p, n),
        delta: delta.clone(),
        alpha: alpha.clone(),
        ps: ps.clone(),
        ps_next,
        gamma1_next,
        pure_sign,
        deviations: Vec::new(),
    };
    art.delta_bar_first = art.cofactors[0].sub(&art.delta_first_head())?;
    art.delta_bar_last = art.cofactors[width - 1].sub(&art.delta_last_head())?;
    let pure = art.pure_term();
    art.remainder = art.resultant.sub(&pure)?.sub(&art.tail_term())?;

    let ideal_n = cycle_ideal(n).expect("n >= 6");
    if let Membership::Outside { witness } = ideal_n.contains(&art.remainder) {
        return Err(LiftError::RemainderMembership {
            level: n,
            ideal: "I_n",
            witness: witness.to_string(),
        });
    }
    let ad = alpha * delta;
    if let Membership::Outside { witness } = art
        .remainder
        .in_monomial_ideal(&pure_power_gens(3..=n - 2, &ad))
    {
        let err = LiftError::RemainderMembership {
            level: n,
            ideal: "(x_3^{alpha delta}, ..., x_{n-2}^{alpha delta})",
            witness: witness.to_string(),
        };
        match policy {
            LiftPolicy::Strict => return Err(err),
            LiftPolicy::Record => art.deviations.push(err),
        }
    }

    // The new generators, straight from their defining formulas.
    let new_e1 = match mode {
        Mode::Carried => alpha * &g.e1,
        Mode::Literal => alpha * &cur.lambda * &cur.beta,
    };
    let h = |i: u32| embed(&g.polys[(i - 1) as usize], n);
    let mut polys = Vec::with_capacity((n - 2) as usize);
    polys.push(h(n - 3)?.add(&xn(1).mul(&xpow(p, n, 2, &new_e1))?)?);
    for i in 2..=n - 3 {
        polys.push(h(i - 1)?.add(&xn(i as usize).mul(&xv(p, n, i + 1))?)?);
    }
    polys.push(art.resultant.sub(&pure)?);

    // The new coefficient table.
    let new_alpha = alpha * &ps;
    let mut rows: Vec<Vec<Polynomial>> = Vec::with_capacity((n - 2) as usize);
    {
        let mut row = vec![Polynomial::zero(p, n); width];
        row[0] = xn(1);
        for j in 3..=n - 3 {
            row[(j - 2) as usize] = a(n - 3, j)?;
        }
        row[width - 1] = xv(p, n, 1);
        rows.push(row);
    }
    rows.extend(crow);
    let last = art
        .remainder
        .decompose_pure_power(3..=n - 2, &new_alpha)
        .map_err(|source| LiftError::Decompose {
            level: n,
            what: "F over x_j^{alpha'}",
            source,
        })?;
    let mut row = vec![Polynomial::zero(p, n)];
    row.extend(last);
    rows.push(row);

    let lifted = StructuredGenerators {
        p,
        level: n,
        polys,
        table: CoeffTable::new(n, p, rows),
        e1: new_e1,
        e2: g.e1.clone(),
        lambda: alpha.clone(),
        alpha: new_alpha,
        gamma: next.gamma.clone(),
        delta: next.delta.clone(),
        epsilon: next.epsilon.clone(),
    };
    lifted.matches(&next)?;
    if let Some(index) = lifted.flatten_mismatch()? {
        return Err(LiftError::FlattenMismatch { level: n, index });
    }
    Ok((lifted, art))
}

/// The full tower from level 5 up to `target`.
#[derive(Debug, Clone)]
pub struct Chain {
    pub mode: Mode,
    pub levels: Vec<StructuredGenerators>,
    /// `artifacts[k]` produced `levels[k + 1]`.
    pub artifacts: Vec<LiftArtifacts>,
}

impl Chain {
    pub fn top(&self) -> &StructuredGenerators {
        self.levels.last().expect("chain starts at level 5")
    }

    pub fn level(&self, n: u32) -> Option<&StructuredGenerators> {
        self.levels.iter().find(|g| g.level == n)
    }

    pub fn artifacts_for(&self, n: u32) -> Option<&LiftArtifacts> {
        self.artifacts.iter().find(|a| a.level == n)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("chain aborted while building level {level}: {source}")]
pub struct ChainError {
    pub level: u32,
    pub source: LiftError,
}

pub fn build_chain(s: &Schedule, target: u32, mode: Mode) -> Result<Chain, ChainError> {
    build_chain_with(s, target, mode, LiftPolicy::Strict)
}

pub fn build_chain_with(
    s: &Schedule,
    target: u32,
    mode: Mode,
    policy: LiftPolicy,
) -> Result<Chain, ChainError> {
    if target < 5 || target > s.top {
        return Err(ChainError {
            level: target,
            source: LiftError::OutOfRange {
                level: 5,
                target,
                top: s.top,
            },
        });
    }
    let base = base5(s).map_err(|source| ChainError { level: 5, source })?;
    let mut chain = Chain {
        mode,
        levels: vec![base],
        artifacts: Vec::new(),
    };
    for n in 6..=target {
        let (next, art) = lift_once_with(chain.top(), s, mode, policy)
            .map_err(|source| ChainError { level: n, source })?;
        chain.levels.push(next);
        chain.artifacts.push(art);
    }
    Ok(chain)
}

/// Which structural condition a [`ConditionCheck`] is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// `A[i][i+1] = x_m^{gamma_i} + b_i` with `b_i` in `(x_3^delta..x_{m-1}^delta)`.
    I,
    /// Off-diagonal memberships in `(x_3^delta..x_{m-1}^delta)` and the
    /// decomposition of `A[2][2]`.
    II,
    /// `A[m-2][j]` in `I_m` and in `(x_3^epsilon..x_{m-2}^epsilon)`.
    III,
    /// Generators agree with their coefficient table; `x_2`-exponents positive.
    Shape,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::I => "I",
            Condition::II => "II",
            Condition::III => "III",
            Condition::Shape => "shape",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub i: u32,
    pub j: u32,
    pub pass: bool,
    pub what: String,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditionReport {
    pub level: u32,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn passes(&self, cond: Condition) -> bool {
        self.checks
            .iter()
            .filter(|c| c.condition == cond)
            .all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            write!(
                f,
                "level {} ({}) i={} j={} {verdict}: {}",
                self.level,
                c.condition.label(),
                c.i,
                c.j,
                c.what
            )?;
            if let Some(w) = &c.witness {
                write!(f, " [witness {w}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Verifies conditions (I), (II), (III) and the shape of `g`, termwise.
pub fn check_conditions(g: &StructuredGenerators) -> ConditionReport {
    let m = g.level;
    let mut checks = Vec::new();
    let mut record = |condition, i, j, what: String, result: Result<Membership, String>| {
        let (pass, witness) = match result {
            Ok(Membership::Member) => (true, None),
            Ok(Membership::Outside { witness }) => (false, Some(witness.to_string())),
            Err(e) => (false, Some(e)),
        };
        checks.push(ConditionCheck {
            condition,
            i,
            j,
            pass,
            what,
            witness,
        });
    };

    let shape = match g.flatten_mismatch() {
        Ok(None) => Ok(Membership::Member),
        Ok(Some(i)) => Err(format!("h_{i} differs from its reassembly")),
        Err(e) => Err(e.to_string()),
    };
    record(
        Condition::Shape,
        0,
        0,
        "generators match coefficient table".into(),
        shape,
    );
    let positive = if g.e1.is_zero() || g.e2.is_zero() {
        Err(format!("E1={} E2={}", g.e1, g.e2))
    } else {
        Ok(Membership::Member)
    };
    record(
        Condition::Shape,
        0,
        0,
        "x_2 exponents positive".into(),
        positive,
    );

    let delta_gens = pure_power_gens(3..=m - 1, &g.delta);
    for i in 1..=m - 3 {
        let res = g
            .b(i)
            .map(|b| b.in_monomial_ideal(&delta_gens))
            .map_err(|e| e.to_string());
        record(
            Condition::I,
            i,
            i + 1,
            format!("b_{i} in (x_3^delta..x_{}^delta)", m - 1),
            res,
        );
    }

    for i in 2..=m - 3 {
        for j in 3..=m - 2 {
            if j == i + 1 {
                continue;
            }
            let res = Ok(g.table.get(i, j).in_monomial_ideal(&delta_gens));
            record(
                Condition::II,
                i,
                j,
                format!("A[{i}][{j}] in (x_3^delta..x_{}^delta)", m - 1),
                res,
            );
        }
    }
    let d_res = match g.table.get(2, 2).decompose_pure_power(3..=m - 1, &g.delta) {
        Ok(_) => Ok(Membership::Member),
        Err(PolyError::NotDecomposable { term, .. }) => Err(term),
        Err(e) => Err(e.to_string()),
    };
    record(
        Condition::II,
        2,
        2,
        format!("A[2][2] = sum_{{j=3}}^{} d_j x_j^delta", m - 1),
        d_res,
    );

    let ideal: CycleIdeal = cycle_ideal(m).expect("m >= 5");
    let eps_gens = pure_power_gens(3..=m - 2, &g.epsilon);
    for j in 3..=m - 2 {
        let coeff = g.table.get(m - 2, j);
        record(
            Condition::III,
            m - 2,
            j,
            format!("A[{}][{j}] in I_{m}", m - 2),
            Ok(ideal.contains(coeff)),
        );
        record(
            Condition::III,
            m - 2,
            j,
            format!("A[{}][{j}] in (x_3^epsilon..x_{}^epsilon)", m - 2, m - 2),
            Ok(coeff.in_monomial_ideal(&eps_gens)),
        );
    }
    ConditionReport { level: m, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::make_minimal;

    fn mono(pairs: &[(u32, BigUint)]) -> Monomial {
        Monomial::from_pairs(pairs.iter().cloned())
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn two_pow(t: u32) -> BigUint {
        BigUint::one() << t
    }

    fn poly(n: u32, terms: &[&[(u32, BigUint)]]) -> Polynomial {
        Polynomial::from_terms(2, n, terms.iter().map(|t| (mono(t), 1))).unwrap()
    }

    #[test]
    fn base_case_p2_n6() {
        let s = make_minimal(2, 6).unwrap();
        let g = base5(&s).unwrap();
        let lam = two_pow(25) + 1u32;
        assert_eq!(
            g.polys[0],
            poly(
                5,
                &[
                    &[(2, big(1)), (5, big(512))],
                    &[(1, big(1)), (3, lam.clone())]
                ]
            )
        );
        assert_eq!(
            g.polys[1],
            poly(
                5,
                &[&[(2, big(1)), (4, lam)], &[(3, big(1)), (5, big(32256))]]
            )
        );
        assert_eq!(g.polys[2], poly(5, &[&[(1, big(1)), (4, big(512))]]));
        let rep = check_conditions(&g);
        assert!(rep.all_pass(), "{rep}");
    }

    #[test]
    fn level_six_generators() {
        let s = make_minimal(2, 6).unwrap();
        let chain = build_chain(&s, 6, Mode::Carried).unwrap();
        let g = chain.top();
        let lam = two_pow(25) + 1u32;
        let t25 = two_pow(25);
        assert_eq!(g.polys.len(), 4);
        assert_eq!(
            g.polys[0],
            poly(
                6,
                &[&[(1, big(1)), (4, big(512))], &[(2, big(512)), (6, big(2))]]
            )
        );
        assert_eq!(
            g.polys[1],
            poly(
                6,
                &[
                    &[(2, big(1)), (5, big(512))],
                    &[(1, big(1)), (3, lam.clone())],
                    &[(3, big(1)), (6, big(63))],
                ]
            )
        );
        assert_eq!(
            g.polys[2],
            poly(
                6,
                &[
                    &[(2, big(1)), (4, lam.clone())],
                    &[(3, big(1)), (5, big(32256))],
                    &[(4, big(1)), (6, big(63))],
                ]
            )
        );
        let art = &chain.artifacts[0];
        assert_eq!(art.cofactors[2], Polynomial::var_pow(2, 6, 5, two_pow(15)));
        assert!(art.delta_bar_last.is_zero());

        let a = big(512);
        // h_2 = a'_{2,3} x_3 + a'_{2,4} x_4 forces a'_{2,4} = x_2 x_4^{2^25}.
        let e3 = &a * &t25;
        let e4 = &a * &t25;
        let e6 = &a * big(63);
        let f4 = poly(
            6,
            &[
                &[
                    (1, a.clone()),
                    (2, a.clone()),
                    (3, e3.clone()),
                    (4, e4.clone()),
                    (6, big(2)),
                ],
                &[(1, a.clone()), (3, e3), (6, &e6 + 2u32)],
                &[(2, a.clone()), (4, e4), (6, &e6 + 2u32)],
                &[(1, big(1)), (5, two_pow(24))],
            ],
        );
        assert_eq!(g.polys[3], f4);
        let rep = check_conditions(g);
        assert!(rep.all_pass(), "{rep}");
    }

    #[test]
    fn corrupted_b1_fails_condition_one() {
        let s = make_minimal(2, 6).unwrap();
        let mut g = base5(&s).unwrap();
        let bad = g
            .table
            .get(1, 2)
            .add(&Polynomial::var_pow(2, 5, 3, &g.delta - 1u32))
            .unwrap();
        g.table.set(1, 2, bad);
        g.polys = g.flatten().unwrap();
        let rep = check_conditions(&g);
        let fail: Vec<_> = rep.failures().collect();
        assert_eq!(fail.len(), 1);
        assert_eq!(fail[0].condition, Condition::I);
        assert_eq!(fail[0].i, 1);
        let expect = Monomial::var_pow(3, &g.delta - 1u32).to_string();
        assert_eq!(fail[0].witness.as_deref(), Some(expect.as_str()));
    }

    #[test]
    fn stale_polys_are_rejected() {
        let s = make_minimal(2, 6).unwrap();
        let mut g = base5(&s).unwrap();
        g.polys[1] = g.polys[1].add(&Polynomial::var(2, 5, 1)).unwrap();
        assert!(!check_conditions(&g).passes(Condition::Shape));
        assert_eq!(
            lift_once(&g, &s, Mode::Carried).unwrap_err(),
            LiftError::FlattenMismatch { level: 5, index: 2 }
        );
    }

    #[test]
    fn target_bounds() {
        let s = make_minimal(2, 6).unwrap();
        assert_eq!(build_chain(&s, 5, Mode::Carried).unwrap().levels.len(), 1);
        assert!(build_chain(&s, 7, Mode::Carried).is_err());
        assert!(build_chain(&s, 4, Mode::Carried).is_err());
    }
}
