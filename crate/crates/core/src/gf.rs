//! Arithmetic in GF(2^m) for `m ≤ 8` and Gaussian elimination over it.

use rand::Rng;

use crate::error::{Error, Result};

/// Primitive polynomials for m = 1..=8, including the leading bit.
const PRIMITIVE: [u16; 9] = [0, 0b11, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011, 0b1000_1001, 0b1_0001_1101];

#[derive(Clone, Debug)]
pub struct Field {
    q: usize,
    exp: Vec<u8>,
    log: Vec<u8>,
}

impl Field {
    /// `q` must be a power of two between 2 and 256.
    pub fn new(q: usize) -> Result<Self> {
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(Error::Field(format!("field size {q} is not a power of two in 2..=256")));
        }
        let m = q.trailing_zeros() as usize;
        let order = q - 1;
        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0u8; q];
        let mut x: u16 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            *e = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= PRIMITIVE[m];
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Field { q, exp, log })
    }

    pub fn size(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse");
        let order = self.q - 1;
        self.exp[(order - self.log[a as usize] as usize) % order]
    }

    pub fn div(&self, a: u8, b: u8) -> u8 {
        self.mul(a, self.inv(b))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        rng.random_range(0..self.q) as u8
    }

    /// `dst += c · src`.
    #[inline]
    pub fn axpy(&self, dst: &mut [u8], c: u8, src: &[u8]) {
        if c == 0 {
            return;
        }
        let lc = self.log[c as usize] as usize;
        for (d, &s) in dst.iter_mut().zip(src) {
            if s != 0 {
                *d ^= self.exp[lc + self.log[s as usize] as usize];
            }
        }
    }

    pub fn scale(&self, v: &mut [u8], c: u8) {
        for x in v.iter_mut() {
            *x = self.mul(*x, c);
        }
    }
}

/// Incremental row reduction of `coeffs · x = payload` over `n` unknowns,
/// kept in reduced row-echelon form.
#[derive(Clone, Debug)]
pub struct Eliminator {
    n: usize,
    /// `pivot_row[c]`: index into `rows` of the row whose pivot is column `c`.
    pivot_row: Vec<Option<usize>>,
    rows: Vec<(Vec<u8>, Vec<u8>)>,
}

impl Eliminator {
    pub fn new(n: usize) -> Self {
        Eliminator { n, pivot_row: vec![None; n], rows: Vec::new() }
    }

    pub fn unknowns(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.n
    }

    /// Adds one equation; returns whether it raised the rank.
    pub fn insert(&mut self, field: &Field, mut coeffs: Vec<u8>, mut payload: Vec<u8>) -> bool {
        debug_assert_eq!(coeffs.len(), self.n);
        for c in 0..self.n {
            let f = coeffs[c];
            if f == 0 {
                continue;
            }
            if let Some(r) = self.pivot_row[c] {
                let (rc, rp) = &self.rows[r];
                field.axpy(&mut coeffs, f, rc);
                field.axpy(&mut payload, f, rp);
            }
        }
        let Some(pivot) = coeffs.iter().position(|&c| c != 0) else {
            return false;
        };
        let inv = field.inv(coeffs[pivot]);
        field.scale(&mut coeffs, inv);
        field.scale(&mut payload, inv);
        for (rc, rp) in self.rows.iter_mut() {
            let f = rc[pivot];
            if f != 0 {
                field.axpy(rc, f, &coeffs);
                field.axpy(rp, f, &payload);
            }
        }
        self.pivot_row[pivot] = Some(self.rows.len());
        self.rows.push((coeffs, payload));
        true
    }

    /// The unknowns, once the system has full rank.
    pub fn solution(&self) -> Option<Vec<Vec<u8>>> {
        if !self.is_complete() {
            return None;
        }
        Some(
            self.pivot_row
                .iter()
                .map(|r| self.rows[r.expect("full rank")].1.clone())
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GfSolution {
    pub rank: usize,
    /// One payload per unknown, present when `rank` equals the number of
    /// unknowns.
    pub solution: Option<Vec<Vec<u8>>>,
}

/// Solves `matrix · x = rhs` where each row of `rhs` is a payload vector.
pub fn gf_solve(field: &Field, matrix: &[Vec<u8>], rhs: &[Vec<u8>], unknowns: usize) -> Result<GfSolution> {
    if matrix.len() != rhs.len() {
        return Err(Error::Field("matrix and right-hand side differ in row count".into()));
    }
    let width = rhs.first().map_or(0, Vec::len);
    let mut elim = Eliminator::new(unknowns);
    for (row, b) in matrix.iter().zip(rhs) {
        if row.len() != unknowns || b.len() != width {
            return Err(Error::Field("ragged matrix".into()));
        }
        if row.iter().chain(b).any(|&x| x as usize >= field.size()) {
            return Err(Error::Field(format!("entry outside GF({})", field.size())));
        }
        elim.insert(field, row.clone(), b.clone());
    }
    Ok(GfSolution { rank: elim.rank(), solution: elim.solution() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_axioms() {
        for q in [2, 4, 16, 256] {
            let f = Field::new(q).unwrap();
            for a in 1..q as u16 {
                let a = a as u8;
                assert_eq!(f.mul(a, f.inv(a)), 1);
                for b in 0..q as u16 {
                    let b = b as u8;
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                }
            }
            // Multiplicative group is cyclic of order q - 1.
            let distinct: std::collections::HashSet<u8> = f.exp[..q - 1].iter().copied().collect();
            assert_eq!(distinct.len(), q - 1);
        }
        assert!(Field::new(3).is_err());
        assert!(Field::new(512).is_err());
    }

    #[test]
    fn distributive() {
        let f = Field::new(256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
            assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
        }
    }

    #[test]
    fn identity_solves() {
        let f = Field::new(256).unwrap();
        let n = 5;
        let m: Vec<Vec<u8>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8).collect()).collect();
        let sol = gf_solve(&f, &m, &m, n).unwrap();
        assert_eq!(sol.rank, n);
        assert_eq!(sol.solution.unwrap(), m);
    }

    #[test]
    fn duplicated_row_loses_rank() {
        let f = Field::new(256).unwrap();
        let m = vec![vec![1, 2, 3], vec![4, 5, 6], vec![1, 2, 3]];
        let b = vec![vec![0], vec![0], vec![0]];
        let sol = gf_solve(&f, &m, &b, 3).unwrap();
        assert_eq!(sol.rank, 2);
        assert!(sol.solution.is_none());
    }

    #[test]
    fn recovers_random_payloads() {
        let f = Field::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 12;
        let x: Vec<Vec<u8>> = (0..n).map(|_| (0..4).map(|_| f.random(&mut rng)).collect()).collect();
        let mut elim = Eliminator::new(n);
        while !elim.is_complete() {
            let c: Vec<u8> = (0..n).map(|_| f.random(&mut rng)).collect();
            let mut p = vec![0u8; 4];
            for (ci, xi) in c.iter().zip(&x) {
                f.axpy(&mut p, *ci, xi);
            }
            elim.insert(&f, c, p);
        }
        assert_eq!(elim.solution().unwrap(), x);
    }
}
