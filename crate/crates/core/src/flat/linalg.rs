//! Small dense exact linear algebra over Q and Z.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactnum::Rational;

pub type QMat = Vec<Vec<Rational>>;
pub type ZVec = Vec<BigInt>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn identity(n: usize) -> QMat {
    (0..n)
        .map(|i| (0..n).map(|j| rat((i == j) as i64)).collect())
        .collect()
}

pub fn from_int(m: &[Vec<i64>]) -> QMat {
    m.iter()
        .map(|r| r.iter().map(|&x| rat(x)).collect())
        .collect()
}

pub fn transpose(a: &QMat) -> QMat {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(Rational::zero(), |acc, k| {
                        if r[k].is_zero() {
                            acc
                        } else {
                            acc + &r[k] * &b[k][j]
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &QMat, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn sub(a: &QMat, b: &QMat) -> QMat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `v^T A v`.
pub fn quad(a: &QMat, v: &[Rational]) -> Rational {
    dot(v, &mat_vec(a, v))
}

/// Reduced row echelon form and pivot columns.
fn rref(a: &QMat) -> (QMat, Vec<usize>) {
    let mut m = a.clone();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    (m, pivots)
}

pub fn rank(a: &QMat) -> usize {
    rref(a).1.len()
}

/// Basis of `{x : A x = 0}`.
pub fn kernel(a: &QMat, cols: usize) -> Vec<Vec<Rational>> {
    let (m, pivots) = rref(a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn inverse(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let aug: QMat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| rat((i == j) as i64)));
            row
        })
        .collect();
    let (m, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn is_integral(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_integer())
}

pub fn to_zvec(v: &[Rational]) -> Option<ZVec> {
    v.iter()
        .map(|x| x.is_integer().then(|| x.to_integer()))
        .collect()
}

pub fn to_i64(v: &[BigInt]) -> Vec<i64> {
    v.iter()
        .map(|x| x.to_i64().expect("small integer"))
        .collect()
}

pub fn zq(v: &[BigInt]) -> Vec<Rational> {
    v.iter()
        .map(|x| Rational::from_integer(x.clone()))
        .collect()
}

/// Rows scaled by the common denominator so that they become integral.
pub fn clear_denominators(a: &QMat) -> Vec<ZVec> {
    let mut den = BigInt::one();
    for r in a {
        for x in r {
            den = den.lcm(x.denom());
        }
    }
    a.iter()
        .map(|r| r.iter().map(|x| (x * &den).to_integer()).collect())
        .collect()
}

/// A sublattice of `Z^n` held as an echelon basis (rows).
#[derive(Clone, Debug)]
pub struct IntLattice {
    dim: usize,
    rows: Vec<ZVec>,
    pivots: Vec<usize>,
}

impl IntLattice {
    pub fn from_generators(gens: &[ZVec], dim: usize) -> Self {
        let mut rows: Vec<ZVec> = gens
            .iter()
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .cloned()
            .collect();
        let mut basis = Vec::new();
        let mut pivots = Vec::new();
        for c in 0..dim {
            loop {
                let nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
                if nz.len() <= 1 {
                    break;
                }
                let piv = *nz
                    .iter()
                    .min_by_key(|&&i| rows[i][c].abs())
                    .expect("nonempty");
                for &i in &nz {
                    if i != piv {
                        let f = &rows[i][c] / &rows[piv][c];
                        let prow = rows[piv].clone();
                        for (x, y) in rows[i].iter_mut().zip(&prow) {
                            *x -= &f * y;
                        }
                    }
                }
            }
            if let Some(i) = (0..rows.len()).find(|&i| !rows[i][c].is_zero()) {
                let mut r = rows.remove(i);
                if r[c].is_negative() {
                    r.iter_mut().for_each(|x| *x = -x.clone());
                }
                basis.push(r);
                pivots.push(c);
            }
            rows.retain(|r| r.iter().any(|x| !x.is_zero()));
        }
        IntLattice {
            dim,
            rows: basis,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[ZVec] {
        &self.rows
    }

    /// Pivot entries; for a full-rank lattice their product is the index.
    pub fn diagonal(&self) -> Vec<BigInt> {
        self.rows
            .iter()
            .zip(&self.pivots)
            .map(|(r, &p)| r[p].clone())
            .collect()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v = v.to_vec();
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            let (q, rem) = v[p].div_rem(&r[p]);
            if !rem.is_zero() {
                return false;
            }
            if !q.is_zero() {
                for (x, y) in v.iter_mut().zip(r) {
                    *x -= &q * y;
                }
            }
        }
        v.iter().all(Zero::is_zero)
    }

    pub fn contains_rational(&self, v: &[Rational]) -> bool {
        to_zvec(v).is_some_and(|z| self.contains(&z))
    }
}

/// Unimodular `U` with `R U = [H | 0]`, `H` square lower triangular with
/// nonzero diagonal, for an integer matrix `R` of full row rank.
pub fn column_hermite(r: &[ZVec]) -> Vec<ZVec> {
    let d = r.len();
    let n = r[0].len();
    let mut m: Vec<ZVec> = r.to_vec();
    let mut u: Vec<ZVec> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    let col_op = |m: &mut Vec<ZVec>, u: &mut Vec<ZVec>, dst: usize, src: usize, f: &BigInt| {
        for row in m.iter_mut() {
            let t = &row[src] * f;
            row[dst] -= t;
        }
        for row in u.iter_mut() {
            let t = &row[src] * f;
            row[dst] -= t;
        }
    };
    let swap = |m: &mut Vec<ZVec>, u: &mut Vec<ZVec>, a: usize, b: usize| {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
        for row in u.iter_mut() {
            row.swap(a, b);
        }
    };
    for i in 0..d {
        loop {
            let nz: Vec<usize> = (i..n).filter(|&j| !m[i][j].is_zero()).collect();
            if nz.is_empty() {
                panic!("matrix is not of full row rank");
            }
            let piv = *nz.iter().min_by_key(|&&j| m[i][j].abs()).expect("nonempty");
            if nz.len() == 1 {
                swap(&mut m, &mut u, i, piv);
                break;
            }
            for &j in &nz {
                if j != piv {
                    let f = &m[i][j] / &m[i][piv];
                    col_op(&mut m, &mut u, j, piv, &f);
                }
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> ZVec {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_and_rank() {
        let a = from_int(&[vec![1, 2, 3], vec![2, 4, 6]]);
        assert_eq!(rank(&a), 1);
        let k = kernel(&a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(mat_vec(&a, v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let a = from_int(&[vec![2, 1], vec![1, 1]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert!(inverse(&from_int(&[vec![1, 2], vec![2, 4]])).is_none());
    }

    #[test]
    fn lattice_membership() {
        let l = IntLattice::from_generators(&[z(&[2, 0]), z(&[1, 3])], 2);
        assert_eq!(l.rank(), 2);
        let idx: BigInt = l.diagonal().iter().product();
        assert_eq!(idx, BigInt::from(6));
        assert!(l.contains(&z(&[3, 3])));
        assert!(l.contains(&z(&[0, 6])));
        assert!(!l.contains(&z(&[1, 0])));
        assert!(!l.contains(&z(&[0, 3])));
    }

    #[test]
    fn hermite_kernel_split() {
        let r = vec![z(&[2, 4, 6]), z(&[0, 1, 1])];
        let u = column_hermite(&r);
        let uq: QMat = u.iter().map(|row| zq(row)).collect();
        let rq: QMat = r.iter().map(|row| zq(row)).collect();
        let prod = mat_mul(&rq, &uq);
        for row in &prod {
            assert!(row[2].is_zero());
        }
        let det = inverse(&uq).unwrap();
        assert!(det.iter().all(|row| is_integral(row)));
    }
}
