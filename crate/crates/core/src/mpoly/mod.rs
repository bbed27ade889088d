//! Sparse multivariate polynomials over a prime field `F_p` with exponents of
//! unbounded size.
//!
//! Terms are kept in descending lexicographic order with no zero
//! coefficients, so equality is structural and serialization is canonical.
//! Because every coefficient lies in `F_p`, raising to a power `p^t` is
//! termwise (`Polynomial::frobenius`), which is what keeps the huge powers in
//! the lifting construction cheap.

mod eval;
mod matrix;
mod monomial;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

pub use eval::CompiledPoly;
pub use matrix::PolyMatrix;
pub use monomial::Monomial;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(u32, u32),
    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u32, u32),
    #[error("variable x_{var} out of range for arity {arity}")]
    VariableOutOfRange { var: u32, arity: u32 },
    #[error("variable x_{0} has no assignment")]
    Unassigned(u32),
    #[error("point has {got} coordinates, polynomial arity is {expected}")]
    PointArity { expected: u32, got: usize },
    #[error("term {term} is divisible by no x_j^{exp} for j in {lo}..={hi}")]
    NotDecomposable {
        term: String,
        exp: BigUint,
        lo: u32,
        hi: u32,
    },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
}

/// Returns `t` with `e = p^t`, if there is one.
pub fn p_power_exponent(e: &BigUint, p: u32) -> Option<u64> {
    if e.is_zero() {
        return None;
    }
    if p == 2 {
        let t = e.trailing_zeros()?;
        return (e.count_ones() == 1).then_some(t);
    }
    let mut x = e.clone();
    let mut t = 0;
    let p = BigUint::from(p);
    while !x.is_one() {
        if !(&x % &p).is_zero() {
            return None;
        }
        x /= &p;
        t += 1;
    }
    Some(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    p: u32,
    arity: u32,
    /// Strictly descending by monomial, coefficients in `1..p`.
    terms: Vec<(Monomial, u32)>,
}

impl Polynomial {
    pub fn zero(p: u32, arity: u32) -> Self {
        Polynomial {
            p,
            arity,
            terms: Vec::new(),
        }
    }

    pub fn one(p: u32, arity: u32) -> Self {
        Self::constant(p, arity, 1)
    }

    pub fn constant(p: u32, arity: u32, c: u64) -> Self {
        let c = (c % p as u64) as u32;
        let terms = if c == 0 {
            Vec::new()
        } else {
            vec![(Monomial::one(), c)]
        };
        Polynomial { p, arity, terms }
    }

    /// The single term `c * mono`. Panics if `mono` mentions a variable past
    /// `arity`.
    pub fn term(p: u32, arity: u32, c: u64, mono: Monomial) -> Self {
        assert!(
            mono.max_var() <= arity,
            "x_{} out of range for arity {arity}",
            mono.max_var()
        );
        let c = (c % p as u64) as u32;
        let terms = if c == 0 { Vec::new() } else { vec![(mono, c)] };
        Polynomial { p, arity, terms }
    }

    pub fn monomial(p: u32, arity: u32, mono: Monomial) -> Self {
        Self::term(p, arity, 1, mono)
    }

    pub fn var(p: u32, arity: u32, index: u32) -> Self {
        Self::monomial(p, arity, Monomial::var(index))
    }

    pub fn var_pow(p: u32, arity: u32, index: u32, exp: impl Into<BigUint>) -> Self {
        Self::monomial(p, arity, Monomial::var_pow(index, exp))
    }

    /// Collects arbitrary terms: coefficients are reduced mod `p`, repeated
    /// monomials combined and zeros dropped.
    pub fn from_terms<I>(p: u32, arity: u32, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Monomial, u64)>,
    {
        let mut acc: HashMap<Monomial, u64> = HashMap::new();
        for (mono, c) in terms {
            if mono.max_var() > arity {
                return Err(PolyError::VariableOutOfRange {
                    var: mono.max_var(),
                    arity,
                });
            }
            let slot = acc.entry(mono).or_insert(0);
            *slot = (*slot + c % p as u64) % p as u64;
        }
        Ok(Self::from_map(p, arity, acc))
    }

    fn from_map(p: u32, arity: u32, acc: HashMap<Monomial, u64>) -> Self {
        let mut terms: Vec<(Monomial, u32)> = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(m, c)| (m, c as u32))
            .collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Polynomial { p, arity, terms }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    /// Terms in canonical (descending lex) order.
    pub fn terms(&self) -> &[(Monomial, u32)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> u32 {
        self.terms
            .binary_search_by(|(m, _)| mono.cmp(m))
            .map_or(0, |pos| self.terms[pos].1)
    }

    /// The same polynomial viewed in a ring with `arity` variables.
    pub fn with_arity(&self, arity: u32) -> Result<Self, PolyError> {
        if let Some(bad) = self
            .terms
            .iter()
            .map(|(m, _)| m.max_var())
            .find(|&v| v > arity)
        {
            return Err(PolyError::VariableOutOfRange { var: bad, arity });
        }
        Ok(Polynomial {
            p: self.p,
            arity,
            terms: self.terms.clone(),
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<(), PolyError> {
        if self.p != other.p {
            return Err(PolyError::CharacteristicMismatch(self.p, other.p));
        }
        if self.arity != other.arity {
            return Err(PolyError::ArityMismatch(self.arity, other.arity));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = (a[i].1 + b[j].1) % self.p;
                    if c != 0 {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(Polynomial {
            p: self.p,
            arity: self.arity,
            terms: out,
        })
    }

    pub fn neg(&self) -> Self {
        self.scale(self.p as u64 - 1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> Self {
        let c = (c % self.p as u64) as u32;
        if c == 0 {
            return Self::zero(self.p, self.arity);
        }
        Polynomial {
            p: self.p,
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), (a * c) % self.p))
                .collect(),
        }
    }

    /// Product with `c * mono`; lex order is compatible with multiplication
    /// so no re-sort is needed.
    pub fn mul_term(&self, mono: &Monomial, c: u32) -> Self {
        let c = c % self.p;
        if c == 0 {
            return Self::zero(self.p, self.arity);
        }
        Polynomial {
            p: self.p,
            arity: self.arity.max(mono.max_var()),
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.mul(mono), ((*a as u64 * c as u64) % self.p as u64) as u32))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.p, self.arity));
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return Ok(self.mul_term(m, *c));
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return Ok(other.mul_term(m, *c));
        }
        let p = self.p as u64;
        let mut acc: HashMap<Monomial, u64> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let slot = acc.entry(ma.mul(mb)).or_insert(0);
                *slot = (*slot + *ca as u64 * *cb as u64) % p;
            }
        }
        Ok(Self::from_map(self.p, self.arity, acc))
    }

    /// `self^(p^t)`: every exponent is multiplied by `p^t` and coefficients,
    /// being in `F_p`, are fixed.
    pub fn frobenius(&self, t: u64) -> Self {
        let factor = BigUint::from(self.p).pow(t as u32);
        self.exponent_scale(&factor)
    }

    fn exponent_scale(&self, factor: &BigUint) -> Self {
        Polynomial {
            p: self.p,
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.pow(factor), *c))
                .collect(),
        }
    }

    /// `self^e`. Pure `p`-powers go through [`Self::frobenius`]; other
    /// exponents by square-and-multiply.
    pub fn power(&self, e: &BigUint) -> Self {
        if e.is_zero() {
            return Self::one(self.p, self.arity);
        }
        if let Some(t) = p_power_exponent(e, self.p) {
            return self.exponent_scale(&BigUint::from(self.p).pow(t as u32));
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            let c = mod_pow(*c as u64, e, self.p as u64) as u32;
            return Polynomial {
                p: self.p,
                arity: self.arity,
                terms: vec![(m.pow(e), c)],
            };
        }
        let mut acc = Self::one(self.p, self.arity);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).expect("same ring");
            if e.bit(i) {
                acc = acc.mul(self).expect("same ring");
            }
        }
        acc
    }

    /// Simultaneous substitution `x_v -> assignment[v]`. Variables without an
    /// assignment are kept and must fit in `target_arity`; every assigned
    /// polynomial must have arity `target_arity`.
    pub fn substitute(
        &self,
        assignment: &BTreeMap<u32, Polynomial>,
        target_arity: u32,
    ) -> Result<Self, PolyError> {
        for image in assignment.values() {
            if image.p != self.p {
                return Err(PolyError::CharacteristicMismatch(self.p, image.p));
            }
            if image.arity != target_arity {
                return Err(PolyError::ArityMismatch(image.arity, target_arity));
            }
        }
        // Group by the substituted part so each distinct power product of
        // images is expanded once.
        let mut groups: BTreeMap<Monomial, Vec<(Monomial, u64)>> = BTreeMap::new();
        for (mono, c) in &self.terms {
            let mut kept = Vec::new();
            let mut replaced = Vec::new();
            for (v, e) in mono.factors() {
                if assignment.contains_key(v) {
                    replaced.push((*v, e.clone()));
                } else if *v <= target_arity {
                    kept.push((*v, e.clone()));
                } else {
                    return Err(PolyError::Unassigned(*v));
                }
            }
            groups
                .entry(Monomial::from_pairs(replaced))
                .or_default()
                .push((Monomial::from_pairs(kept), *c as u64));
        }
        let mut powers: HashMap<(u32, BigUint), Polynomial> = HashMap::new();
        let mut out = Self::zero(self.p, target_arity);
        for (replaced, kept) in groups {
            let mut product = Self::one(self.p, target_arity);
            for (v, e) in replaced.factors() {
                let key = (*v, e.clone());
                if !powers.contains_key(&key) {
                    powers.insert(key.clone(), assignment[v].power(e));
                }
                product = product.mul(&powers[&key])?;
            }
            let cofactor = Self::from_terms(self.p, target_arity, kept)?;
            out = out.add(&cofactor.mul(&product)?)?;
        }
        Ok(out)
    }

    /// Membership in the monomial ideal generated by `gens`; decided
    /// termwise. On failure reports the first term (in canonical order) that
    /// no generator divides.
    pub fn in_monomial_ideal(&self, gens: &[Monomial]) -> Membership {
        for (mono, _) in &self.terms {
            if !gens.iter().any(|g| g.divides(mono)) {
                return Membership::Outside {
                    witness: mono.clone(),
                };
            }
        }
        Membership::Member
    }

    /// The largest `d` with `self` in `(x_j^d : j in vars)`: the minimum over
    /// terms of the largest exponent among `vars`. `None` for zero, which
    /// lies in every such ideal.
    pub fn pure_power_floor(&self, vars: RangeInclusive<u32>) -> Option<BigUint> {
        self.terms
            .iter()
            .map(|(mono, _)| {
                vars.clone()
                    .filter_map(|j| mono.exponent(j).cloned())
                    .max()
                    .unwrap_or_default()
            })
            .min()
    }

    /// Writes `self = sum_j c_j x_j^d` over `j` in `vars`, putting each term
    /// with the smallest index whose `d`-th power divides it.
    pub fn decompose_pure_power(
        &self,
        vars: RangeInclusive<u32>,
        d: &BigUint,
    ) -> Result<Vec<Polynomial>, PolyError> {
        let (lo, hi) = (*vars.start(), *vars.end());
        let width = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
        let mut buckets: Vec<Vec<(Monomial, u32)>> = vec![Vec::new(); width];
        for (mono, c) in &self.terms {
            let slot = vars.clone().find_map(|j| {
                let divisor = Monomial::var_pow(j, d.clone());
                mono.div(&divisor).map(|q| (j, q))
            });
            match slot {
                Some((j, q)) => buckets[(j - lo) as usize].push((q, *c)),
                None => {
                    return Err(PolyError::NotDecomposable {
                        term: mono.to_string(),
                        exp: d.clone(),
                        lo,
                        hi,
                    })
                }
            }
        }
        // Division by a fixed monomial preserves the order within a bucket.
        Ok(buckets
            .into_iter()
            .map(|terms| Polynomial {
                p: self.p,
                arity: self.arity,
                terms,
            })
            .collect())
    }

    /// Largest variable index that actually occurs.
    pub fn max_var(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.max_var())
            .max()
            .unwrap_or(0)
    }

    /// Bit length of the largest exponent occurring.
    pub fn max_exponent_bits(&self) -> u64 {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.factors().iter().map(|(_, e)| e.bits()))
            .max()
            .unwrap_or(0)
    }
}

fn mod_pow(base: u64, e: &BigUint, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    let b = base % m;
    for i in (0..e.bits()).rev() {
        acc = acc * acc % m;
        if e.bit(i) {
            acc = acc * b % m;
        }
    }
    acc
}

/// Result of a termwise monomial-ideal membership test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Member,
    Outside { witness: Monomial },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }

    pub fn witness(&self) -> Option<&Monomial> {
        match self {
            Membership::Member => None,
            Membership::Outside { witness } => Some(witness),
        }
    }
}

/// The generators `x_j^d` for `j` in `vars`.
pub fn pure_power_gens(vars: RangeInclusive<u32>, d: &BigUint) -> Vec<Monomial> {
    vars.map(|j| Monomial::var_pow(j, d.clone())).collect()
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match (*c, m.is_one()) {
                (c, true) => write!(f, "{c}")?,
                (1, false) => write!(f, "{m}")?,
                (c, false) => write!(f, "{c}*{m}")?,
            }
        }
        Ok(())
    }
}
