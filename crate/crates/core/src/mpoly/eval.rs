use std::collections::HashMap;

use super::{PolyError, Polynomial};
use crate::gf::{Element, FieldDescriptor};

/// A polynomial specialised to one field: exponents reduced into
/// `1..=q-1` and coefficients embedded, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    arity: usize,
    terms: Vec<(Element, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, fd: &FieldDescriptor, point: &[Element]) -> Element {
        debug_assert_eq!(point.len(), self.arity);
        let order = fd.q() as u64 - 1;
        let mut acc = Element::ZERO;
        'terms: for (c, factors) in &self.terms {
            let mut l = fd.log(*c).expect("stored coefficients are nonzero") as u64;
            for &(v, e) in factors {
                match fd.log(point[v]) {
                    Some(lv) => l += lv as u64 * e as u64,
                    None => continue 'terms,
                }
            }
            acc = fd.add(acc, fd.exp(l % order.max(1)));
        }
        acc
    }
}

impl Polynomial {
    /// Reduces exponents for `fd` and merges terms that become equal.
    pub fn compile(&self, fd: &FieldDescriptor) -> Result<CompiledPoly, PolyError> {
        if fd.p() != self.p {
            return Err(PolyError::CharacteristicMismatch(self.p, fd.p()));
        }
        let mut merged: HashMap<Vec<(usize, u32)>, Element> = HashMap::new();
        let mut order: Vec<Vec<(usize, u32)>> = Vec::new();
        for (mono, c) in &self.terms {
            let key: Vec<(usize, u32)> = mono
                .factors()
                .iter()
                .map(|(v, e)| (*v as usize - 1, fd.reduce_exponent(e)))
                .collect();
            let coeff = fd.from_prime_field(*c as u64);
            match merged.get_mut(&key) {
                Some(slot) => *slot = fd.add(*slot, coeff),
                None => {
                    order.push(key.clone());
                    merged.insert(key, coeff);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|key| {
                let c = merged[&key];
                (!c.is_zero()).then_some((c, key))
            })
            .collect();
        Ok(CompiledPoly {
            arity: self.arity as usize,
            terms,
        })
    }

    /// Value at `point` in `F_{p^k}`; exponents go through `pow_big`.
    pub fn evaluate(&self, fd: &FieldDescriptor, point: &[Element]) -> Result<Element, PolyError> {
        if fd.p() != self.p {
            return Err(PolyError::CharacteristicMismatch(self.p, fd.p()));
        }
        if point.len() != self.arity as usize {
            return Err(PolyError::PointArity {
                expected: self.arity,
                got: point.len(),
            });
        }
        let mut acc = Element::ZERO;
        for (mono, c) in &self.terms {
            let mut t = fd.from_prime_field(*c as u64);
            for (v, e) in mono.factors() {
                t = fd.mul(t, fd.pow_big(point[*v as usize - 1], e));
            }
            acc = fd.add(acc, t);
        }
        Ok(acc)
    }
}
