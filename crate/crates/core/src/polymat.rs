//! Matrices over `F_2[X]`: lifting, exact determinants, minors.
//!
//! Transfer matrices live their first life over a field; before the
//! coprime search they are lifted entrywise into the polynomial ring and
//! their determinants are taken exactly. Degrees stay desk-scale (at most
//! a few hundred), so fraction-free elimination with exact divisions is
//! plenty.

use crate::field::{Field, FieldElem};
use crate::gf2poly::BinPoly;
use crate::{Error, Result};

/// A dense matrix of binary polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BinPoly>,
}

impl PolyMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: vec![BinPoly::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BinPoly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        PolyMatrix { rows, cols, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { BinPoly::one() } else { BinPoly::zero() })
    }

    /// Entrywise residue lift of a field matrix; every entry has degree
    /// below the field's extension degree.
    pub fn lift(m: &[Vec<FieldElem>]) -> Result<PolyMatrix> {
        let rows = m.len();
        let cols = m.first().map_or(0, |r| r.len());
        if m.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix".into()));
        }
        Ok(Self::from_fn(rows, cols, |i, j| m[i][j].to_binpoly()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BinPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BinPoly) {
        self.entries[i * self.cols + j] = v;
    }

    /// Exact determinant over `F_2[X]`.
    ///
    /// Cofactor expansion up to 4x4, fraction-free elimination above:
    /// each Bareiss step divides by the previous pivot, and over an
    /// integral domain that division is exact, keeping intermediate
    /// degrees bounded by minors of the original matrix.
    pub fn det(&self) -> Result<BinPoly> {
        if self.rows != self.cols {
            return Err(Error::NonSquare);
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BinPoly::one());
        }
        if n <= 4 {
            return Ok(det_cofactor(&self.entries, n));
        }
        let mut m = self.entries.clone();
        let at = |m: &Vec<BinPoly>, i: usize, j: usize| m[i * n + j].clone();
        let mut prev = BinPoly::one();
        for r in 0..n - 1 {
            if at(&m, r, r).is_zero() {
                let swap = (r + 1..n).find(|&i| !at(&m, i, r).is_zero());
                match swap {
                    // char 2: row swaps do not change the determinant
                    Some(i) => {
                        for j in 0..n {
                            m.swap(r * n + j, i * n + j);
                        }
                    }
                    None => return Ok(BinPoly::zero()),
                }
            }
            let pivot = at(&m, r, r);
            for i in r + 1..n {
                for j in r + 1..n {
                    let num = pivot.mul(&at(&m, i, j)).add(&at(&m, i, r).mul(&at(&m, r, j)));
                    let (q, rem) = num.divmod(&prev)?;
                    if !rem.is_zero() {
                        return Err(Error::Inconsistent(
                            "inexact division in fraction-free elimination".into(),
                        ));
                    }
                    m[i * n + j] = q;
                }
                m[i * n + r] = BinPoly::zero();
            }
            prev = pivot;
        }
        Ok(at(&m, n - 1, n - 1))
    }
}

fn det_cofactor(entries: &[BinPoly], n: usize) -> BinPoly {
    if n == 1 {
        return entries[0].clone();
    }
    let mut acc = BinPoly::zero();
    for j in 0..n {
        let e = &entries[j];
        if e.is_zero() {
            continue;
        }
        let mut sub = Vec::with_capacity((n - 1) * (n - 1));
        for i in 1..n {
            for jj in 0..n {
                if jj != j {
                    sub.push(entries[i * n + jj].clone());
                }
            }
        }
        acc = acc.add(&e.mul(&det_cofactor(&sub, n - 1)));
    }
    acc
}

/// Finds row and column index sets of size `target_rank` whose square
/// submatrix is invertible over the field.
///
/// Pivots are chosen greedily scanning rows then columns in ascending
/// order, so the selected minor is reproducible run to run.
pub fn find_full_rank_submatrix(
    m: &[Vec<FieldElem>],
    target_rank: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("ragged matrix".into()));
    }
    let field = match m.first().and_then(|r| r.first()) {
        Some(e) => e.field().clone(),
        None => {
            if target_rank == 0 {
                return Ok((Vec::new(), Vec::new()));
            }
            return Err(Error::RankDeficient { want: target_rank, got: 0 });
        }
    };
    for row in m {
        for e in row {
            if e.field() != &field {
                return Err(Error::FieldMismatch);
            }
        }
    }
    let bits: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|e| e.bits()).collect()).collect();
    match select_pivots(&field, &bits, target_rank) {
        Some((mut rs, mut cs)) => {
            rs.sort_unstable();
            cs.sort_unstable();
            Ok((rs, cs))
        }
        None => Err(Error::RankDeficient {
            want: target_rank,
            got: rank_bits(&field, bits),
        }),
    }
}

/// Greedy pivot selection on a bit matrix; `None` when fewer than `need`
/// pivots exist.
pub(crate) fn select_pivots(
    field: &Field,
    m: &[Vec<u64>],
    need: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut work: Vec<Vec<u64>> = m.to_vec();
    let rows = work.len();
    let cols = work.first().map_or(0, |r| r.len());
    let mut used_r = Vec::new();
    let mut used_c = Vec::new();
    for _ in 0..need {
        let mut piv = None;
        'scan: for i in 0..rows {
            if used_r.contains(&i) {
                continue;
            }
            for j in 0..cols {
                if !used_c.contains(&j) && work[i][j] != 0 {
                    piv = Some((i, j));
                    break 'scan;
                }
            }
        }
        let (pi, pj) = piv?;
        used_r.push(pi);
        used_c.push(pj);
        let inv = field.inv_bits(work[pi][pj]).expect("pivot is nonzero");
        for i in 0..rows {
            if used_r.contains(&i) || work[i][pj] == 0 {
                continue;
            }
            let factor = field.mul_bits(work[i][pj], inv);
            for j in 0..cols {
                let sub = field.mul_bits(factor, work[pi][j]);
                work[i][j] = field.add_bits(work[i][j], sub);
            }
        }
    }
    Some((used_r, used_c))
}

/// Inverse of a square bit matrix over the field; `None` when singular.
pub(crate) fn inverse_bits(field: &Field, m: &[Vec<u64>]) -> Option<Vec<Vec<u64>>> {
    let n = m.len();
    let mut work: Vec<Vec<u64>> = m.to_vec();
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| work[i][col] != 0)?;
        work.swap(col, p);
        inv.swap(col, p);
        let scale = field.inv_bits(work[col][col]).ok()?;
        for j in 0..n {
            work[col][j] = field.mul_bits(work[col][j], scale);
            inv[col][j] = field.mul_bits(inv[col][j], scale);
        }
        for i in 0..n {
            if i == col || work[i][col] == 0 {
                continue;
            }
            let factor = work[i][col];
            for j in 0..n {
                let w = field.mul_bits(factor, work[col][j]);
                work[i][j] = field.add_bits(work[i][j], w);
                let v = field.mul_bits(factor, inv[col][j]);
                inv[i][j] = field.add_bits(inv[i][j], v);
            }
        }
    }
    Some(inv)
}

/// Rank of a bit matrix over the field.
pub(crate) fn rank_bits(field: &Field, mut m: Vec<Vec<u64>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for j in 0..cols {
        let Some(p) = (rank..rows).find(|&i| m[i][j] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let inv = field.inv_bits(m[rank][j]).expect("nonzero pivot");
        for i in 0..rows {
            if i != rank && m[i][j] != 0 {
                let factor = field.mul_bits(m[i][j], inv);
                for jj in 0..cols {
                    let sub = field.mul_bits(factor, m[rank][jj]);
                    m[i][jj] = field.add_bits(m[i][jj], sub);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Where the cost of enumerating minors of a rank-`m` witness peaks:
/// `ceil(n/2)+1` for `n >= 2`, and `1` for `n = 1`. Matches the brute
/// force argmax of `C(n,m) * m^3`.
pub fn argmax_minor_cost(n: usize) -> Result<usize> {
    if n < 1 {
        return Err(Error::InvalidArgument("argmax_minor_cost needs n >= 1".into()));
    }
    if n == 1 {
        Ok(1)
    } else {
        Ok(n.div_ceil(2) + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn p(s: &str) -> BinPoly {
        s.parse().unwrap()
    }

    #[test]
    fn det_small_cases() {
        assert_eq!(PolyMatrix::identity(3).det().unwrap(), BinPoly::one());
        let m = PolyMatrix::from_fn(2, 2, |i, j| if i == j { p("X") } else { p("1") });
        // frozen from the 2x2 cofactor oracle: X*X + 1*1
        assert_eq!(m.det().unwrap(), p("X^2+1"));
        let mut rep = PolyMatrix::zero(3, 3);
        for j in 0..3 {
            rep.set(0, j, p("X+1"));
            rep.set(1, j, p("X+1"));
            rep.set(2, j, p("X^2"));
        }
        assert_eq!(rep.det().unwrap(), BinPoly::zero());
        assert!(PolyMatrix::zero(2, 3).det().is_err());
    }

    #[test]
    fn det_bareiss_matches_cofactor() {
        // deterministic pseudo-random 5x5 and 6x6 with entry degrees <= 4
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for n in [5usize, 6] {
            for _ in 0..8 {
                let m = PolyMatrix::from_fn(n, n, |_, _| BinPoly::from_bits(next() & 0x1f));
                let fast = m.det().unwrap();
                let slow = det_cofactor(
                    &(0..n * n)
                        .map(|i| m.entries[i].clone())
                        .collect::<Vec<_>>(),
                    n,
                );
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn lift_examples() {
        let f = Field::new(5, p("X^5+X^2+1")).unwrap();
        let m = vec![vec![f.from_power(1)], vec![f.from_power(18)]];
        let lifted = PolyMatrix::lift(&m).unwrap();
        assert_eq!(lifted.get(0, 0), &p("X"));
        assert_eq!(lifted.get(1, 0), &p("X+1"));
    }

    /// Lifting then reducing commutes with the field determinant.
    #[test]
    fn lift_det_commutes() {
        let f = Field::new(5, p("X^5+X^2+1")).unwrap();
        let m: Vec<Vec<FieldElem>> = (0..3)
            .map(|i| (0..3).map(|j| f.from_power((7 * i + 11 * j + 1) as u64)).collect())
            .collect();
        // field determinant by cofactor over the field
        let fd = {
            let d = |a: &FieldElem, b: &FieldElem, c: &FieldElem, dd: &FieldElem| {
                a.mul(dd).unwrap().add(&b.mul(c).unwrap()).unwrap()
            };
            let m00 = d(&m[1][1], &m[1][2], &m[2][1], &m[2][2]);
            let m01 = d(&m[1][0], &m[1][2], &m[2][0], &m[2][2]);
            let m02 = d(&m[1][0], &m[1][1], &m[2][0], &m[2][1]);
            m[0][0]
                .mul(&m00)
                .unwrap()
                .add(&m[0][1].mul(&m01).unwrap())
                .unwrap()
                .add(&m[0][2].mul(&m02).unwrap())
                .unwrap()
        };
        let lifted_det = PolyMatrix::lift(&m).unwrap().det().unwrap();
        assert_eq!(f.reduce(&lifted_det), fd);
    }

    #[test]
    fn full_rank_submatrix_examples() {
        let f = Field::new(3, p("X^3+X+1")).unwrap();
        let id: Vec<Vec<FieldElem>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { f.one() } else { f.zero() }).collect())
            .collect();
        assert_eq!(
            find_full_rank_submatrix(&id, 3).unwrap(),
            (vec![0, 1, 2], vec![0, 1, 2])
        );
        let ones = vec![vec![f.one(), f.one()], vec![f.one(), f.one()]];
        assert_eq!(find_full_rank_submatrix(&ones, 1).unwrap(), (vec![0], vec![0]));
        assert!(matches!(
            find_full_rank_submatrix(&ones, 2),
            Err(Error::RankDeficient { want: 2, got: 1 })
        ));
    }

    #[test]
    fn full_rank_submatrix_random() {
        // a 4x6 of rank 4 over GF(8); validate the returned minor by rank
        let f = Field::new(3, p("X^3+X+1")).unwrap();
        let m: Vec<Vec<FieldElem>> = (0..4)
            .map(|i| {
                (0..6)
                    .map(|j| f.from_power((3 * i as u64 + 5 * j as u64) % 7).clone())
                    .collect()
            })
            .collect();
        // make it genuinely rank 4 by planting distinct pivots
        let mut m = m;
        for i in 0..4 {
            m[i][i] = f.from_power(i as u64 + 1);
            for jj in 0..i {
                m[i][jj] = f.zero();
            }
        }
        let (rs, cs) = find_full_rank_submatrix(&m, 4).unwrap();
        assert_eq!(rs.len(), 4);
        assert_eq!(cs.len(), 4);
        let sub: Vec<Vec<u64>> = rs
            .iter()
            .map(|&i| cs.iter().map(|&j| m[i][j].bits()).collect())
            .collect();
        assert_eq!(rank_bits(&f, sub), 4);
    }

    fn binom(n: u128, k: u128) -> u128 {
        if k > n {
            return 0;
        }
        let mut acc = 1u128;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }

    #[test]
    fn argmax_matches_brute_force() {
        assert_eq!(argmax_minor_cost(1).unwrap(), 1);
        assert_eq!(argmax_minor_cost(4).unwrap(), 3);
        assert_eq!(argmax_minor_cost(5).unwrap(), 4);
        for n in 1..=40usize {
            let brute = (0..=n)
                .max_by_key(|&m| binom(n as u128, m as u128) * (m as u128).pow(3))
                .unwrap();
            assert_eq!(argmax_minor_cost(n).unwrap(), brute, "n={n}");
        }
        assert!(argmax_minor_cost(0).is_err());
    }
}
