//! The `n`-gon as a one-dimensional simplicial complex and its
//! Stanley-Reisner ideal `I_n`, with vertices `x_1..x_n` in cyclic order.

use thiserror::Error;

use crate::gf::{enumerate_points_capped, Element, FieldDescriptor, GfError, DEFAULT_SWEEP_CAP};
use crate::mpoly::{Membership, Monomial, Polynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("a cycle needs at least 3 vertices, got {0}")]
    TooFewVertices(u32),
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleIdeal {
    n: u32,
    generators: Vec<Monomial>,
}

/// Whether vertices `i != j` of the `n`-cycle share an edge.
pub fn adjacent(i: u32, j: u32, n: u32) -> bool {
    let d = i.abs_diff(j);
    d == 1 || d == n - 1
}

pub fn cycle_ideal(n: u32) -> Result<CycleIdeal, IdealError> {
    if n < 3 {
        return Err(IdealError::TooFewVertices(n));
    }
    let generators = if n == 3 {
        vec![Monomial::from_pairs([(1u32, 1u32), (2, 1), (3, 1)])]
    } else {
        let mut gens = Vec::with_capacity((n * (n - 3) / 2) as usize);
        for i in 1..=n {
            for j in i + 2..=n {
                if !adjacent(i, j, n) {
                    gens.push(Monomial::from_pairs([(i, 1u32), (j, 1)]));
                }
            }
        }
        gens
    };
    Ok(CycleIdeal { n, generators })
}

/// `height I_n = n - 2`.
pub fn height(n: u32) -> u32 {
    n - 2
}

impl CycleIdeal {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn generators(&self) -> &[Monomial] {
        &self.generators
    }

    pub fn generator_polys(&self, p: u32) -> Vec<Polynomial> {
        self.generators
            .iter()
            .map(|m| Polynomial::monomial(p, self.n, m.clone()))
            .collect()
    }

    pub fn contains(&self, f: &Polynomial) -> Membership {
        f.in_monomial_ideal(&self.generators)
    }

    /// Termwise test for a single monomial.
    pub fn contains_monomial(&self, m: &Monomial) -> bool {
        self.generators.iter().any(|g| g.divides(m))
    }
}

/// Whether `point` lies on `V(I_n)`: its support is empty, a vertex, or an
/// edge of the cycle. For `n = 3` every support short of all three vertices
/// is a face.
pub fn in_variety(point: &[Element], n: u32) -> bool {
    debug_assert_eq!(point.len(), n as usize);
    let support: Vec<u32> = point
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_zero())
        .map(|(i, _)| i as u32 + 1)
        .collect();
    match support.as_slice() {
        [] | [_] => true,
        [i, j] => n == 3 || adjacent(*i, *j, n),
        _ => false,
    }
}

/// `|V(I_n)(F_q)| = 1 + n(q-1) + n(q-1)^2` for `n >= 4`.
pub fn expected_variety_count(n: u32, q: u64) -> u64 {
    let n = n as u64;
    if n == 3 {
        return q * q * q - (q - 1).pow(3);
    }
    1 + n * (q - 1) + n * (q - 1) * (q - 1)
}

/// All rational points of `V(I_n)` over `fd`, found by evaluating the
/// generators at every point of `F_q^n`.
pub fn variety_points(n: u32, fd: &FieldDescriptor) -> Result<Vec<Vec<Element>>, IdealError> {
    variety_points_capped(n, fd, DEFAULT_SWEEP_CAP)
}

pub fn variety_points_capped(
    n: u32,
    fd: &FieldDescriptor,
    cap: u64,
) -> Result<Vec<Vec<Element>>, IdealError> {
    let ideal = cycle_ideal(n)?;
    let space = enumerate_points_capped(fd, n as usize, cap)?;
    let gens: Vec<_> = ideal
        .generator_polys(fd.p())
        .iter()
        .map(|g| g.compile(fd).expect("same characteristic"))
        .collect();
    Ok(space
        .iter()
        .filter(|pt| gens.iter().all(|g| g.eval(fd, pt).is_zero()))
        .collect())
}
