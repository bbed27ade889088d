//! Finite fields `F_{p^k}` small enough to enumerate.
//!
//! Elements are encoded as integers `0..q`: the base-`p` digits of the code
//! are the coefficients (constant term first) of the residue polynomial
//! modulo a fixed irreducible polynomial. Codes `0..p` are therefore the
//! prime subfield, which is how polynomial coefficients embed.
//!
//! Multiplication goes through log/antilog tables over a primitive element,
//! so exponents of any size are reduced modulo `q - 1` before use.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Largest field size `field_make` will build tables for.
pub const DEFAULT_FIELD_CAP: u64 = 1 << 20;

/// Largest point sweep `enumerate_points` will agree to produce.
pub const DEFAULT_SWEEP_CAP: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field size {p}^{k} exceeds the enumeration cap {cap}")]
    FieldTooLarge { p: u64, k: u32, cap: u64 },
    #[error("{q} is not a power of the characteristic {p}")]
    NotAPrimePower { q: u64, p: u64 },
    #[error("sweep of {q}^{n} points exceeds the cap {cap}")]
    SweepTooLarge { q: u64, n: usize, cap: u64 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Element of a [`FieldDescriptor`], stored as its canonical code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Element(pub u32);

impl Element {
    pub const ZERO: Element = Element(0);
    pub const ONE: Element = Element(1);

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone)]
pub struct FieldDescriptor {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, constant term first, length `k + 1`.
    modulus: Vec<u32>,
    generator: Element,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldDescriptor {}

/// Builds `F_{p^k}` with the default enumeration cap.
pub fn field_make(p: u64, k: u32) -> Result<FieldDescriptor, GfError> {
    FieldDescriptor::with_cap(p, k, DEFAULT_FIELD_CAP)
}

/// Builds the field of size `q`, which must be a power of `p`.
pub fn field_of_size(p: u64, q: u64) -> Result<FieldDescriptor, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    let mut k = 0;
    let mut acc = 1u64;
    while acc < q {
        acc = acc.saturating_mul(p);
        k += 1;
    }
    if acc != q || k == 0 {
        return Err(GfError::NotAPrimePower { q, p });
    }
    field_make(p, k)
}

impl FieldDescriptor {
    pub fn with_cap(p: u64, k: u32, cap: u64) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if k == 0 {
            return Err(GfError::ZeroDegree);
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= cap && q <= u32::MAX as u64)
            .ok_or(GfError::FieldTooLarge { p, k, cap })?;
        let p = p as u32;
        let q = q as u32;
        let modulus = first_irreducible(p, k);
        let mut fd = FieldDescriptor {
            p,
            k,
            q,
            modulus,
            generator: Element::ONE,
            exp: Vec::new(),
            log: Vec::new(),
        };
        fd.generator = fd.find_generator();
        fd.build_tables();
        Ok(fd)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The primitive element used for the log tables.
    pub fn generator(&self) -> Element {
        self.generator
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.q).map(Element)
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_prime_field(&self, c: u64) -> Element {
        Element((c % self.p as u64) as u32)
    }

    pub fn add(&self, a: Element, b: Element) -> Element {
        if self.p == 2 {
            return Element(a.0 ^ b.0);
        }
        if self.k == 1 {
            return Element((a.0 + b.0) % self.p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        while x > 0 || y > 0 {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        Element(out)
    }

    pub fn neg(&self, a: Element) -> Element {
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        while x > 0 {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        Element(out)
    }

    pub fn sub(&self, a: Element, b: Element) -> Element {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a.0 == 0 || b.0 == 0 {
            return Element::ZERO;
        }
        let order = self.q - 1;
        let l = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % order as u64;
        Element(self.exp[l as usize])
    }

    pub fn inv(&self, a: Element) -> Option<Element> {
        if a.0 == 0 {
            return None;
        }
        let order = self.q - 1;
        let l = (order - self.log[a.0 as usize]) % order;
        Some(Element(self.exp[l as usize]))
    }

    /// Discrete log to the base [`Self::generator`]; `None` for zero.
    pub fn log(&self, a: Element) -> Option<u32> {
        (a.0 != 0).then(|| self.log[a.0 as usize])
    }

    pub fn exp(&self, l: u64) -> Element {
        Element(self.exp[(l % (self.q as u64 - 1)) as usize])
    }

    pub fn pow_u64(&self, x: Element, e: u64) -> Element {
        if e == 0 {
            return Element::ONE;
        }
        if x.0 == 0 {
            return Element::ZERO;
        }
        let order = (self.q - 1) as u64;
        let l = (self.log[x.0 as usize] as u64 * (e % order)) % order;
        Element(self.exp[l as usize])
    }

    /// `x^e` for an exponent of any size. Nonzero bases reduce `e` modulo
    /// `q - 1`; `0^0 = 1` so that absent variables evaluate to one.
    pub fn pow_big(&self, x: Element, e: &BigUint) -> Element {
        if e.is_zero() {
            return Element::ONE;
        }
        if x.0 == 0 {
            return Element::ZERO;
        }
        let order = (self.q - 1) as u64;
        let reduced = (e % order).to_u64().expect("residue fits");
        self.pow_u64(x, reduced)
    }

    /// Reduces a positive exponent to `1..=q-1` without changing `x^e` for any
    /// `x`, zero included. Zero maps to zero.
    pub fn reduce_exponent(&self, e: &BigUint) -> u32 {
        if e.is_zero() {
            return 0;
        }
        let order = (self.q - 1) as u64;
        let r = ((e - 1u32) % order).to_u64().expect("residue fits");
        (r + 1) as u32
    }

    fn digits(&self, mut a: u32) -> Vec<u32> {
        let mut d = vec![0; self.k as usize];
        for slot in d.iter_mut() {
            *slot = a % self.p;
            a /= self.p;
        }
        d
    }

    fn undigits(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    /// Multiplication by polynomial arithmetic, used to build the tables.
    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            let k = self.k;
            let reduce = self.undigits(&self.modulus[..k as usize]);
            let (mut a, mut b, mut out) = (a, b, 0u32);
            while b > 0 {
                if b & 1 == 1 {
                    out ^= a;
                }
                b >>= 1;
                a <<= 1;
                if a >> k & 1 == 1 {
                    a ^= 1 << k;
                    a ^= reduce;
                }
            }
            return out;
        }
        let da = self.digits(a);
        let db = self.digits(b);
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * self.k as usize];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let k = self.k as usize;
        for top in (k..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            for (i, &m) in self.modulus.iter().enumerate() {
                let idx = top - k + i;
                prod[idx] = (prod[idx] + (p - c) * m as u64) % p;
            }
        }
        let low: Vec<u32> = prod[..k].iter().map(|&c| c as u32).collect();
        self.undigits(&low)
    }

    fn slow_pow(&self, x: u32, mut e: u64) -> u32 {
        let mut base = x;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn find_generator(&self) -> Element {
        let order = (self.q - 1) as u64;
        let factors = prime_factors(order);
        (1..self.q)
            .find(|&g| factors.iter().all(|&l| self.slow_pow(g, order / l) != 1))
            .map(Element)
            .expect("the multiplicative group of a finite field is cyclic")
    }

    fn build_tables(&mut self) {
        let order = (self.q - 1) as usize;
        let mut exp = vec![0u32; order];
        let mut log = vec![0u32; self.q as usize];
        let mut cur = 1u32;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = cur;
            log[cur as usize] = i as u32;
            cur = self.slow_mul(cur, self.generator.0);
        }
        debug_assert_eq!(cur, 1);
        self.exp = exp;
        self.log = log;
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Remainder of `a` modulo the monic `m` over `F_p` (coefficient vectors,
/// constant term first).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let dm = m.len() - 1;
    let p = p as u64;
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] % p;
        if c != 0 {
            for (i, &mc) in m.iter().enumerate() {
                let idx = top - dm + i;
                r[idx] = (r[idx] + (p - c) * mc as u64) % p;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| (c % p) as u32).collect()
}

fn monic_of_degree(p: u32, d: u32, code: u64) -> Vec<u32> {
    let mut out = Vec::with_capacity(d as usize + 1);
    let mut c = code;
    for _ in 0..d {
        out.push((c % p as u64) as u32);
        c /= p as u64;
    }
    out.push(1);
    out
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = (f.len() - 1) as u32;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d);
        for code in 0..count {
            let g = monic_of_degree(p, d, code);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// First monic irreducible of degree `k`, scanning lower coefficients as a
/// base-`p` counter from zero.
fn first_irreducible(p: u32, k: u32) -> Vec<u32> {
    let count = (p as u64).pow(k);
    (0..count)
        .map(|code| monic_of_degree(p, k, code))
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

/// The points of `F_q^n` in odometer order (last coordinate fastest).
#[derive(Debug, Clone)]
pub struct PointSpace {
    q: u32,
    n: usize,
    total: u64,
}

impl PointSpace {
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn point(&self, mut index: u64) -> Vec<Element> {
        let mut out = vec![Element::ZERO; self.n];
        for slot in out.iter_mut().rev() {
            *slot = Element((index % self.q as u64) as u32);
            index /= self.q as u64;
        }
        out
    }

    pub fn index_of(&self, point: &[Element]) -> u64 {
        point
            .iter()
            .fold(0, |acc, e| acc * self.q as u64 + e.0 as u64)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<Element>> + '_ {
        (0..self.total).map(move |i| self.point(i))
    }
}

pub fn enumerate_points(fd: &FieldDescriptor, n: usize) -> Result<PointSpace, GfError> {
    enumerate_points_capped(fd, n, DEFAULT_SWEEP_CAP)
}

pub fn enumerate_points_capped(
    fd: &FieldDescriptor,
    n: usize,
    cap: u64,
) -> Result<PointSpace, GfError> {
    let q = fd.q as u64;
    let total = q
        .checked_pow(n as u32)
        .filter(|&t| t <= cap)
        .ok_or(GfError::SweepTooLarge { q, n, cap })?;
    Ok(PointSpace { q: fd.q, n, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn naive_pow(fd: &FieldDescriptor, x: Element, e: &BigUint) -> Element {
        let mut acc = Element::ONE;
        for i in (0..e.bits()).rev() {
            acc = fd.mul(acc, acc);
            if e.bit(i) {
                acc = fd.mul(acc, x);
            }
        }
        acc
    }

    #[test]
    fn small_fields() {
        let f2 = field_make(2, 1).unwrap();
        assert_eq!(f2.elements().count(), 2);
        let f4 = field_make(2, 2).unwrap();
        assert_eq!(f4.q(), 4);
        assert_eq!(f4.pow_u64(f4.generator(), 3), Element::ONE);
        assert_ne!(f4.pow_u64(f4.generator(), 1), Element::ONE);
        let f9 = field_make(3, 2).unwrap();
        assert_eq!(f9.elements().count(), 9);
    }

    #[test]
    fn moduli_are_fixed() {
        assert_eq!(field_make(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(field_make(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(field_make(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(field_make(5, 1).unwrap().modulus(), &[0, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(field_make(4, 1), Err(GfError::NotPrime(4)));
        assert_eq!(field_make(2, 0), Err(GfError::ZeroDegree));
        assert!(matches!(
            field_make(2, 21),
            Err(GfError::FieldTooLarge { .. })
        ));
        assert!(matches!(
            field_of_size(2, 6),
            Err(GfError::NotAPrimePower { .. })
        ));
        assert_eq!(field_of_size(3, 9).unwrap().k(), 2);
    }

    #[test]
    fn field_axioms_exhaustive_f8_f9() {
        for (p, k) in [(2, 3), (3, 2), (5, 1)] {
            let fd = field_make(p, k).unwrap();
            for a in fd.elements() {
                assert_eq!(fd.add(a, fd.neg(a)), Element::ZERO);
                if !a.is_zero() {
                    assert_eq!(fd.mul(a, fd.inv(a).unwrap()), Element::ONE);
                }
                for b in fd.elements() {
                    assert_eq!(fd.mul(a, b), Element(fd.slow_mul(a.0, b.0)));
                    for c in fd.elements() {
                        let lhs = fd.mul(a, fd.add(b, c));
                        let rhs = fd.add(fd.mul(a, b), fd.mul(a, c));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn pow_big_examples() {
        let f4 = field_make(2, 2).unwrap();
        let g = f4.generator();
        let e = BigUint::one() << 25u32;
        assert_eq!(f4.pow_big(g, &e), f4.mul(g, g));
        assert_eq!(f4.pow_big(g, &e), naive_pow(&f4, g, &e));
        let f8 = field_make(2, 3).unwrap();
        assert_eq!(
            f8.pow_big(Element::ZERO, &BigUint::from(7u32)),
            Element::ZERO
        );
        assert_eq!(f8.pow_big(Element::ZERO, &BigUint::zero()), Element::ONE);
        let f2 = field_make(2, 1).unwrap();
        assert_eq!(
            f2.pow_big(Element::ONE, &(BigUint::one() << 342u32)),
            Element::ONE
        );
    }

    #[test]
    fn reduced_exponent_agrees_everywhere() {
        let f9 = field_make(3, 2).unwrap();
        for e in [1u64, 2, 8, 9, 16, 17, 1 << 40] {
            let e = BigUint::from(e);
            let r = f9.reduce_exponent(&e);
            assert!((1..=8).contains(&r));
            for x in f9.elements() {
                assert_eq!(f9.pow_big(x, &e), f9.pow_u64(x, r as u64));
            }
        }
    }

    #[test]
    fn frobenius_has_order_k() {
        for (p, k) in [(2, 4), (3, 3), (7, 2)] {
            let fd = field_make(p, k).unwrap();
            let pe = BigUint::from(p);
            for x in fd.elements() {
                let mut y = x;
                for _ in 0..k {
                    y = fd.pow_big(y, &pe);
                }
                assert_eq!(y, x);
            }
        }
    }

    #[test]
    fn point_counts() {
        let f2 = field_make(2, 1).unwrap();
        let f4 = field_make(2, 2).unwrap();
        assert_eq!(enumerate_points(&f2, 5).unwrap().len(), 32);
        assert_eq!(enumerate_points(&f4, 6).unwrap().len(), 4096);
        let space = enumerate_points(&f2, 9).unwrap();
        assert_eq!(space.iter().count(), 512);
        let mut seen: Vec<u64> = space.iter().map(|pt| space.index_of(&pt)).collect();
        seen.dedup();
        assert_eq!(seen, (0..512).collect::<Vec<_>>());
        assert!(matches!(
            enumerate_points(&f4, 12),
            Err(GfError::SweepTooLarge { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn slow_pow(fd: &FieldDescriptor, x: Element, e: &BigUint) -> Element {
            let mut acc = 1;
            for i in (0..e.bits()).rev() {
                acc = fd.slow_mul(acc, acc);
                if e.bit(i) {
                    acc = fd.slow_mul(acc, x.0);
                }
            }
            Element(acc)
        }

        fn field() -> impl Strategy<Value = FieldDescriptor> {
            prop::sample::select(vec![
                (2u64, 1u32),
                (2, 2),
                (2, 3),
                (2, 4),
                (3, 1),
                (3, 2),
                (5, 2),
                (7, 1),
            ])
            .prop_map(|(p, k)| field_make(p, k).unwrap())
        }

        proptest! {
            #[test]
            fn pow_big_matches_unreduced(fd in field(), x in 0u32..64, bytes in prop::collection::vec(any::<u8>(), 0..50)) {
                let x = Element(x % fd.q());
                let e = BigUint::from_bytes_le(&bytes);
                prop_assert_eq!(fd.pow_big(x, &e), slow_pow(&fd, x, &e));
            }

            #[test]
            fn exponents_add(fd in field(), x in 1u32..64, a in prop::collection::vec(any::<u8>(), 0..50), b in prop::collection::vec(any::<u8>(), 0..50)) {
                let x = Element(1 + x % (fd.q() - 1));
                let (a, b) = (BigUint::from_bytes_le(&a), BigUint::from_bytes_le(&b));
                prop_assert_eq!(fd.pow_big(x, &(&a + &b)), fd.mul(fd.pow_big(x, &a), fd.pow_big(x, &b)));
            }

            #[test]
            fn field_laws(fd in field(), a in 0u32..64, b in 0u32..64, c in 0u32..64) {
                let q = fd.q();
                let (a, b, c) = (Element(a % q), Element(b % q), Element(c % q));
                prop_assert_eq!(fd.mul(a, b), fd.mul(b, a));
                prop_assert_eq!(fd.add(fd.add(a, b), c), fd.add(a, fd.add(b, c)));
                prop_assert_eq!(fd.mul(fd.mul(a, b), c), fd.mul(a, fd.mul(b, c)));
                prop_assert_eq!(fd.mul(a, fd.add(b, c)), fd.add(fd.mul(a, b), fd.mul(a, c)));
                prop_assert_eq!(fd.sub(fd.add(a, b), b), a);
                if let Some(ai) = fd.inv(a) {
                    prop_assert_eq!(fd.mul(a, ai), Element::ONE);
                }
                // Frobenius is additive.
                let p = BigUint::from(fd.p());
                prop_assert_eq!(fd.pow_big(fd.add(a, b), &p), fd.add(fd.pow_big(a, &p), fd.pow_big(b, &p)));
            }
        }
    }
}
