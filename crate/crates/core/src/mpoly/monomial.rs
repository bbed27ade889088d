use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// A power product `x_{i_1}^{e_1} ... x_{i_r}^{e_r}` with variables indexed
/// from 1 and exponents of unbounded size.
///
/// Stored sparse: indices strictly increasing, no zero exponents. The empty
/// monomial is `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(u32, BigUint)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(index: u32) -> Self {
        Self::var_pow(index, BigUint::one())
    }

    pub fn var_pow(index: u32, exp: impl Into<BigUint>) -> Self {
        assert!(index >= 1, "variables are indexed from 1");
        let exp = exp.into();
        if exp.is_zero() {
            return Self::one();
        }
        Monomial(vec![(index, exp)])
    }

    /// Builds a monomial from arbitrary `(index, exponent)` pairs, merging
    /// repeated indices and dropping zero exponents.
    pub fn from_pairs<I, E>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (u32, E)>,
        E: Into<BigUint>,
    {
        let mut v: Vec<(u32, BigUint)> = pairs.into_iter().map(|(i, e)| (i, e.into())).collect();
        v.sort_by_key(|(i, _)| *i);
        let mut out: Vec<(u32, BigUint)> = Vec::with_capacity(v.len());
        for (i, e) in v {
            assert!(i >= 1, "variables are indexed from 1");
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += e,
                _ => out.push((i, e)),
            }
        }
        out.retain(|(_, e)| !e.is_zero());
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(u32, BigUint)] {
        &self.0
    }

    pub fn exponent(&self, index: u32) -> Option<&BigUint> {
        self.0
            .binary_search_by_key(&index, |(i, _)| *i)
            .ok()
            .map(|pos| &self.0[pos].1)
    }

    pub fn max_var(&self) -> u32 {
        self.0.last().map_or(0, |(i, _)| *i)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|(i, _)| *i)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, &a[i].1 + &b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Every exponent multiplied by `factor` (the monomial raised to `factor`).
    pub fn pow(&self, factor: &BigUint) -> Monomial {
        if factor.is_zero() {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(i, e)| (*i, e * factor)).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        let mut rest = other.0.iter();
        'outer: for (i, e) in &self.0 {
            for (j, f) in rest.by_ref() {
                if j == i {
                    if f < e {
                        return false;
                    }
                    continue 'outer;
                }
                if j > i {
                    return false;
                }
            }
            return false;
        }
        true
    }

    /// `self / divisor`, or `None` when the division is not exact.
    pub fn div(&self, divisor: &Monomial) -> Option<Monomial> {
        if !divisor.divides(self) {
            return None;
        }
        let mut out = Vec::with_capacity(self.0.len());
        for (i, e) in &self.0 {
            match divisor.exponent(*i) {
                Some(d) if d == e => {}
                Some(d) => out.push((*i, e - d)),
                None => out.push((*i, e.clone())),
            }
        }
        Some(Monomial(out))
    }

    /// Splits into the part on variables `<= boundary` and the rest.
    pub fn split_at_var(&self, boundary: u32) -> (Monomial, Monomial) {
        let cut = self.0.partition_point(|(i, _)| *i <= boundary);
        (
            Monomial(self.0[..cut].to_vec()),
            Monomial(self.0[cut..].to_vec()),
        )
    }

    /// Renames variables through `f`, which must be strictly increasing on
    /// the support.
    pub fn map_vars(&self, f: impl Fn(u32) -> u32) -> Monomial {
        let out: Vec<(u32, BigUint)> = self.0.iter().map(|(i, e)| (f(*i), e.clone())).collect();
        debug_assert!(out.windows(2).all(|w| w[0].0 < w[1].0));
        Monomial(out)
    }
}

/// Lexicographic order on exponent vectors with `x_1 > x_2 > ...`.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        for k in 0..a.len().min(b.len()) {
            let ((i, e), (j, f)) = (&a[k], &b[k]);
            if i != j {
                // The smaller index is present in one and absent in the other.
                return j.cmp(i);
            }
            match e.cmp(f) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (i, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if e.is_one() {
                write!(f, "x_{i}")?;
            } else {
                write!(f, "x_{i}^{e}")?;
            }
        }
        Ok(())
    }
}
