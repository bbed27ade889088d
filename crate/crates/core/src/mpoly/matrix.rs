use std::collections::HashMap;

use super::{PolyError, Polynomial};

/// Dense grid of polynomials sharing one ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn from_rows(rows: Vec<Vec<Polynomial>>) -> Result<Self, PolyError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        let mut ring: Option<(u32, u32)> = None;
        for row in rows {
            if row.len() != ncols {
                return Err(PolyError::NotSquare {
                    rows: nrows,
                    cols: row.len(),
                });
            }
            for e in row {
                match ring {
                    None => ring = Some((e.characteristic(), e.arity())),
                    Some((p, a)) => {
                        if e.characteristic() != p {
                            return Err(PolyError::CharacteristicMismatch(p, e.characteristic()));
                        }
                        if e.arity() != a {
                            return Err(PolyError::ArityMismatch(a, e.arity()));
                        }
                    }
                }
                entries.push(e);
            }
        }
        Ok(PolyMatrix {
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Polynomial {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Polynomial] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    fn ring(&self) -> (u32, u32) {
        let e = &self.entries[0];
        (e.characteristic(), e.arity())
    }

    fn require_square(&self) -> Result<(), PolyError> {
        if self.rows != self.cols || self.rows == 0 {
            return Err(PolyError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// Signed minors along the last row: with the last row replaced by
    /// indeterminates `T_1..T_m`, `det = sum_k cofactors[k] * T_k`. The
    /// entries of the last row are ignored.
    ///
    /// Minors of the top rows are built up by Laplace expansion along their
    /// bottom row and memoized on the column subset.
    pub fn det_cofactors_last_row(&self) -> Result<Vec<Polynomial>, PolyError> {
        self.require_square()?;
        let (p, arity) = self.ring();
        let m = self.rows;
        let mut memo: HashMap<u32, Polynomial> = HashMap::new();
        memo.insert(0, Polynomial::one(p, arity));
        // Column subsets of size t hold the minor of rows 0..t.
        for t in 1..m {
            let subsets: Vec<u32> = (0u32..1 << m)
                .filter(|s| s.count_ones() as usize == t)
                .collect();
            for s in subsets {
                let mut acc = Polynomial::zero(p, arity);
                for (pos, c) in (0..m).filter(|c| s >> c & 1 == 1).enumerate() {
                    let entry = self.get(t - 1, c);
                    if entry.is_zero() {
                        continue;
                    }
                    let rest = &memo[&(s & !(1 << c))];
                    if rest.is_zero() {
                        continue;
                    }
                    let mut term = entry.mul(rest)?;
                    if (t - 1 + pos) % 2 == 1 {
                        term = term.neg();
                    }
                    acc = acc.add(&term)?;
                }
                memo.insert(s, acc);
            }
        }
        let full = (1u32 << m) - 1;
        Ok((0..m)
            .map(|k| {
                let minor = &memo[&(full & !(1 << k))];
                if (m - 1 + k) % 2 == 1 {
                    minor.neg()
                } else {
                    minor.clone()
                }
            })
            .collect())
    }

    /// Determinant by Laplace expansion along the first column, memoized on
    /// the set of rows still available. Deliberately a different route from
    /// [`Self::det_cofactors_last_row`].
    pub fn determinant(&self) -> Result<Polynomial, PolyError> {
        self.require_square()?;
        let (p, arity) = self.ring();
        let m = self.rows;
        let mut memo: HashMap<u32, Polynomial> = HashMap::new();
        self.det_cols_from(0, (1u32 << m) - 1, p, arity, &mut memo)
    }

    fn det_cols_from(
        &self,
        col: usize,
        rows: u32,
        p: u32,
        arity: u32,
        memo: &mut HashMap<u32, Polynomial>,
    ) -> Result<Polynomial, PolyError> {
        if rows == 0 {
            return Ok(Polynomial::one(p, arity));
        }
        if let Some(hit) = memo.get(&rows) {
            return Ok(hit.clone());
        }
        let mut acc = Polynomial::zero(p, arity);
        for (pos, r) in (0..self.rows).filter(|r| rows >> r & 1 == 1).enumerate() {
            let entry = self.get(r, col);
            if entry.is_zero() {
                continue;
            }
            let rest = self.det_cols_from(col + 1, rows & !(1 << r), p, arity, memo)?;
            let mut term = entry.mul(&rest)?;
            if pos % 2 == 1 {
                term = term.neg();
            }
            acc = acc.add(&term)?;
        }
        memo.insert(rows, acc.clone());
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::Monomial;
    use num_bigint::BigUint;
    use num_traits::One;

    fn xp(i: u32, e: impl Into<BigUint>) -> Polynomial {
        Polynomial::var_pow(2, 6, i, e)
    }

    #[test]
    fn one_by_one() {
        let m = PolyMatrix::from_rows(vec![vec![Polynomial::zero(2, 6)]]).unwrap();
        assert_eq!(
            m.det_cofactors_last_row().unwrap(),
            vec![Polynomial::one(2, 6)]
        );
    }

    #[test]
    fn three_by_three_level_six_shape() {
        let two25 = BigUint::one() << 25u32;
        let zero = Polynomial::zero(2, 6);
        let a12 = xp(5, 512u32);
        let c23 = Polynomial::monomial(
            2,
            6,
            Monomial::from_pairs([(1u32, BigUint::one()), (3, two25.clone())]),
        )
        .add(&xp(6, 63u32))
        .unwrap();
        let a23 = xp(5, 32256u32);
        let c34 = Polynomial::monomial(
            2,
            6,
            Monomial::from_pairs([(2u32, BigUint::one()), (4, two25)]),
        )
        .add(&xp(6, 63u32))
        .unwrap();
        let m = PolyMatrix::from_rows(vec![
            vec![a12, c23.clone(), zero.clone()],
            vec![zero.clone(), a23, c34.clone()],
            vec![zero.clone(), zero.clone(), zero],
        ])
        .unwrap();
        let cof = m.det_cofactors_last_row().unwrap();
        assert_eq!(cof[2], xp(5, 1u32 << 15));
        assert_eq!(cof[0], c23.mul(&c34).unwrap());
        assert!(cof[0]
            .terms()
            .iter()
            .any(|(mono, _)| *mono == Monomial::var_pow(6, 126u32)));
    }

    #[test]
    fn not_square() {
        let row = vec![Polynomial::zero(2, 1), Polynomial::zero(2, 1)];
        let m = PolyMatrix::from_rows(vec![row]).unwrap();
        assert!(matches!(
            m.det_cofactors_last_row(),
            Err(PolyError::NotSquare { .. })
        ));
        assert!(matches!(m.determinant(), Err(PolyError::NotSquare { .. })));
    }

    mod props {
        use super::*;
        use crate::mpoly::tests::props::poly;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            /// Putting a copy of row `r` in the last row gives a zero
            /// determinant, so `sum_k B[r][k] cofactor_k = 0`; with the true
            /// last row it gives the determinant.
            #[test]
            fn repeated_row_cofactor_law(entries in prop::collection::vec(poly(3, 3), 9), r in 0usize..2) {
                let rows: Vec<Vec<Polynomial>> = entries.chunks(3).map(|c| c.to_vec()).collect();
                let m = PolyMatrix::from_rows(rows.clone()).unwrap();
                let cof = m.det_cofactors_last_row().unwrap();
                let dot = |row: &[Polynomial]| {
                    let mut acc = Polynomial::zero(3, 3);
                    for (a, c) in row.iter().zip(&cof) {
                        acc = acc.add(&a.mul(c).unwrap()).unwrap();
                    }
                    acc
                };
                prop_assert!(dot(&rows[r]).is_zero());
                prop_assert_eq!(dot(&rows[2]), m.determinant().unwrap());
            }
        }
    }
}
