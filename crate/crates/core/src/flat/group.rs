use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::{
    self, clear_denominators, column_hermite, from_int, identity, inverse, is_integral, kernel,
    mat_mul, mat_vec, rank, sub, transpose, IntLattice, QMat, ZVec,
};
use crate::exactnum::{format_rational, parse_rational, Rational};
use crate::{Error, Result};

const MAX_POINT_GROUP: usize = 4096;

/// An affine motion `x -> B x + b` in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Motion {
    pub b_mat: Vec<Vec<i64>>,
    pub b: Vec<Rational>,
}

impl Motion {
    pub fn identity(n: usize) -> Self {
        Motion {
            b_mat: (0..n)
                .map(|i| (0..n).map(|j| (i == j) as i64).collect())
                .collect(),
            b: vec![Rational::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn compose(&self, other: &Motion) -> Motion {
        let n = self.dim();
        let b_mat = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.b_mat[i][k] * other.b_mat[k][j]).sum())
                    .collect()
            })
            .collect();
        let mut b = mat_vec(&from_int(&self.b_mat), &other.b);
        for (x, y) in b.iter_mut().zip(&self.b) {
            *x += y;
        }
        Motion { b_mat, b }
    }

    /// Translation part reduced into `[0, 1)^n`.
    pub fn reduced(mut self) -> Motion {
        for x in self.b.iter_mut() {
            *x = &*x - x.floor();
        }
        self
    }

    pub fn b_q(&self) -> QMat {
        from_int(&self.b_mat)
    }
}

/// A Bieberbach group given by a Gram matrix and generators; the lattice
/// `Z^n` of translations is implicit.
#[derive(Clone, Debug)]
pub struct BieberbachGroup {
    pub dim: usize,
    pub gram: QMat,
    pub generators: Vec<Motion>,
    cosets: Vec<Motion>,
    /// Which generator (or product) first produced each coset.
    origin: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RatLit {
    Int(i64),
    Str(String),
}

impl RatLit {
    fn value(&self) -> Result<Rational> {
        match self {
            RatLit::Int(x) => Ok(linalg::rat(*x)),
            RatLit::Str(s) => parse_rational(s),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GeneratorFile {
    #[serde(rename = "B")]
    b_mat: Vec<Vec<i64>>,
    b: Vec<RatLit>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GroupFile {
    dim: usize,
    gram: Vec<Vec<RatLit>>,
    generators: Vec<GeneratorFile>,
}

impl BieberbachGroup {
    /// Builds the group and its coset representatives. Structural problems
    /// (shapes, non-invertible `B`, infinite point group, extra translations)
    /// are errors; geometric conditions are left to [`validate`].
    pub fn new(dim: usize, gram: QMat, generators: Vec<Motion>) -> Result<Self> {
        let bad = |s: String| Error::InvalidBieberbach(s);
        if dim == 0 {
            return Err(bad("dimension must be positive".into()));
        }
        if gram.len() != dim || gram.iter().any(|r| r.len() != dim) {
            return Err(bad(format!("gram must be {dim}x{dim}")));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.b_mat.len() != dim || g.b_mat.iter().any(|r| r.len() != dim) || g.b.len() != dim {
                return Err(bad(format!(
                    "generator {i}: shape does not match dim {dim}"
                )));
            }
            match inverse(&g.b_q()) {
                Some(inv) if inv.iter().all(|r| is_integral(r)) => {}
                _ => return Err(bad(format!("generator {i}: B is not invertible over Z"))),
            }
        }
        let (cosets, origin) = close(dim, &generators)?;
        Ok(BieberbachGroup {
            dim,
            gram,
            generators,
            cosets,
            origin,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroupFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let gram = file
            .gram
            .iter()
            .map(|r| r.iter().map(RatLit::value).collect::<Result<Vec<_>>>())
            .collect::<Result<QMat>>()?;
        let generators = file
            .generators
            .iter()
            .map(|g| {
                Ok(Motion {
                    b_mat: g.b_mat.clone(),
                    b: g.b.iter().map(RatLit::value).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.dim, gram, generators)
    }

    pub fn to_json(&self) -> String {
        let file = GroupFile {
            dim: self.dim,
            gram: self
                .gram
                .iter()
                .map(|r| r.iter().map(|x| RatLit::Str(format_rational(x))).collect())
                .collect(),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorFile {
                    b_mat: g.b_mat.clone(),
                    b: g.b
                        .iter()
                        .map(|x| RatLit::Str(format_rational(x)))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    /// Coset representatives `(B, b)` of `Gamma / Z^n`, identity first.
    pub fn cosets(&self) -> &[Motion] {
        &self.cosets
    }

    pub fn point_group(&self) -> Vec<Vec<Vec<i64>>> {
        self.cosets.iter().map(|c| c.b_mat.clone()).collect()
    }

    pub fn coset_of(&self, b_mat: &[Vec<i64>]) -> Option<usize> {
        self.cosets.iter().position(|c| c.b_mat == b_mat)
    }

    fn describe(&self, coset: usize) -> String {
        match self.origin[coset] {
            Some(g) => format!("generator {g}"),
            None => format!(
                "point-group element {coset} (B = {:?})",
                self.cosets[coset].b_mat
            ),
        }
    }

    /// Square torus `Z^n`.
    pub fn torus(n: usize) -> Self {
        Self::new(n, identity(n), Vec::new()).expect("torus")
    }

    pub fn klein_bottle() -> Self {
        let g = Motion {
            b_mat: vec![vec![1, 0], vec![0, -1]],
            b: vec![Rational::new(1.into(), 2.into()), Rational::zero()],
        };
        Self::new(2, identity(2), vec![g]).expect("klein bottle")
    }

    /// The 3-dimensional flat manifold with holonomy `Z/2`.
    pub fn dicosm() -> Self {
        let g = Motion {
            b_mat: vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
            b: vec![
                Rational::new(1.into(), 2.into()),
                Rational::zero(),
                Rational::zero(),
            ],
        };
        Self::new(3, identity(3), vec![g]).expect("dicosm")
    }

    /// Hantzsche-Wendt manifold, holonomy `Z/2 x Z/2`.
    pub fn hantzsche_wendt() -> Self {
        let h = Rational::new(1.into(), 2.into());
        let z = Rational::zero();
        let a = Motion {
            b_mat: vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
            b: vec![h.clone(), h.clone(), z.clone()],
        };
        let b = Motion {
            b_mat: vec![vec![-1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]],
            b: vec![z, h.clone(), h],
        };
        Self::new(3, identity(3), vec![a, b]).expect("hantzsche-wendt")
    }
}

fn close(dim: usize, gens: &[Motion]) -> Result<(Vec<Motion>, Vec<Option<usize>>)> {
    let mut cosets = vec![Motion::identity(dim)];
    let mut origin = vec![None];
    let mut index: HashMap<Vec<Vec<i64>>, usize> = HashMap::new();
    index.insert(cosets[0].b_mat.clone(), 0);
    let mut queue = vec![0usize];
    // generators seed the table so they can be named in reports
    for (gi, g) in gens.iter().enumerate() {
        let m = g.clone().reduced();
        if let Some(&i) = index.get(&m.b_mat) {
            if cosets[i].b != m.b {
                return Err(Error::InvalidBieberbach(format!(
                    "generator {gi}: translation lattice is larger than Z^{dim}"
                )));
            }
            continue;
        }
        index.insert(m.b_mat.clone(), cosets.len());
        queue.push(cosets.len());
        cosets.push(m);
        origin.push(Some(gi));
    }
    while let Some(i) = queue.pop() {
        for g in gens {
            let m = cosets[i].compose(g).reduced();
            match index.get(&m.b_mat) {
                Some(&j) => {
                    if cosets[j].b != m.b {
                        return Err(Error::InvalidBieberbach(
                            "translation lattice is larger than Z^n: two elements share a \
                             linear part with translations differing by a non-lattice vector"
                                .into(),
                        ));
                    }
                }
                None => {
                    if cosets.len() >= MAX_POINT_GROUP {
                        return Err(Error::InvalidBieberbach("point group is not finite".into()));
                    }
                    index.insert(m.b_mat.clone(), cosets.len());
                    queue.push(cosets.len());
                    cosets.push(m);
                    origin.push(None);
                }
            }
        }
    }
    Ok((cosets, origin))
}

/// `G`-orthogonal projection data onto `ker(B - I)`.
#[derive(Clone, Debug)]
pub(crate) struct Projection {
    /// Coordinates of `p_B(u)` in the kernel basis: `R u`.
    pub r: QMat,
    /// Gram matrix of the kernel basis.
    pub h: QMat,
}

impl Projection {
    pub fn new(gram: &QMat, b: &QMat) -> Self {
        let n = gram.len();
        let k = kernel(&sub(b, &identity(n)), n);
        let kt: QMat = k;
        let kmat = transpose(&kt);
        let ktg = mat_mul(&kt, gram);
        let h = mat_mul(&ktg, &kmat);
        let r = if kt.is_empty() {
            Vec::new()
        } else {
            mat_mul(&inverse(&h).expect("gram is definite"), &ktg)
        };
        Projection { r, h }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn length_squared(&self, u: &[Rational]) -> Rational {
        let y = mat_vec(&self.r, u);
        linalg::quad(&self.h, &y)
    }
}

/// Saturated integer basis of `ker(A)` (columns returned as rows), for an
/// integer matrix `A`.
pub(crate) fn integer_kernel(a: &[Vec<i64>], n: usize) -> Vec<ZVec> {
    let rows: Vec<ZVec> = a
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let echelon = IntLattice::from_generators(&rows, n);
    let r = echelon.rank();
    if r == 0 {
        return (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect();
    }
    let u = column_hermite(echelon.basis());
    (r..n)
        .map(|c| u.iter().map(|row| row[c].clone()).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub subject: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub point_group_order: usize,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn positive_definite(g: &QMat) -> bool {
    let n = g.len();
    let symmetric = (0..n).all(|i| (0..n).all(|j| g[i][j] == g[j][i]));
    // leading principal minors via elimination pivots
    let mut m = g.clone();
    for i in 0..n {
        if !m[i][i].is_positive() {
            return false;
        }
        for r in i + 1..n {
            let f = &m[r][i] / &m[i][i];
            for c in i..n {
                let t = &f * &m[i][c];
                m[r][c] -= t;
            }
        }
    }
    symmetric
}

/// Whether some element of the coset of `(B, b)` fixes a point, i.e.
/// `p_B(b) in p_B(Z^n)`.
pub(crate) fn coset_has_fixed_point(proj: &Projection, b: &[Rational]) -> bool {
    if proj.dim() == 0 {
        return true;
    }
    let cols = transpose(&proj.r);
    let mut all = cols.clone();
    all.push(mat_vec(&proj.r, b));
    let scaled = clear_denominators(&all);
    let n = scaled.len() - 1;
    let lattice = IntLattice::from_generators(&scaled[..n], proj.dim());
    lattice.contains(&scaled[n])
}

/// Checks isometry, orthogonality of kernel and image, integrality of the
/// fixed lattice, and torsion-freeness for every point-group element.
pub fn validate(g: &BieberbachGroup) -> ValidationReport {
    let mut checks = Vec::new();
    let n = g.dim;
    let pd = positive_definite(&g.gram);
    checks.push(Check {
        name: "gram".into(),
        subject: "gram matrix".into(),
        pass: pd,
        detail: if pd {
            "symmetric positive definite"
        } else {
            "not symmetric positive definite"
        }
        .into(),
    });
    if !pd {
        return ValidationReport {
            valid: false,
            point_group_order: g.cosets.len(),
            checks,
        };
    }
    for (i, c) in g.cosets.iter().enumerate().skip(1) {
        let subject = g.describe(i);
        let bq = c.b_q();
        let iso = mat_mul(&mat_mul(&transpose(&bq), &g.gram), &bq) == g.gram;
        checks.push(Check {
            name: "isometry".into(),
            subject: subject.clone(),
            pass: iso,
            detail: if iso { "B^T G B = G" } else { "B^T G B != G" }.into(),
        });

        let bmi = sub(&bq, &identity(n));
        let ker = kernel(&bmi, n);
        let cross = mat_mul(&mat_mul(&transpose(&bmi), &g.gram), &transpose(&ker));
        let orth = ker.is_empty() || cross.iter().flatten().all(Zero::is_zero);
        checks.push(Check {
            name: "kernel_orthogonal_image".into(),
            subject: subject.clone(),
            pass: orth,
            detail: format!(
                "dim ker(B - I) = {}, rank(B - I) = {}",
                ker.len(),
                rank(&bmi)
            ),
        });

        let b_minus_i: Vec<Vec<i64>> = c
            .b_mat
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(s, &x)| x - (r == s) as i64)
                    .collect()
            })
            .collect();
        let zker = integer_kernel(&b_minus_i, n);
        let zrank = linalg::rank(&zker.iter().map(|v| linalg::zq(v)).collect());
        let lattice_ok = zrank == ker.len();
        checks.push(Check {
            name: "fixed_lattice_rank".into(),
            subject: subject.clone(),
            pass: lattice_ok,
            detail: format!("rank(Z^n cap ker) = {zrank}"),
        });

        let torsion_free = if orth && iso {
            !coset_has_fixed_point(&Projection::new(&g.gram, &bq), &c.b)
        } else {
            false
        };
        checks.push(Check {
            name: "torsion_free".into(),
            subject,
            pass: torsion_free,
            detail: if torsion_free {
                "p_B(b + lambda) != 0 on the coset".into()
            } else if ker.is_empty() {
                "ker(B - I) = 0: the element has a fixed point".into()
            } else {
                "p_B(b + lambda) = 0 for some lattice vector: fixed point exists".into()
            },
        });
    }
    let valid = checks.iter().all(|c| c.pass);
    ValidationReport {
        valid,
        point_group_order: g.cosets.len(),
        checks,
    }
}

/// `B^{-1}` of an integer unimodular matrix.
pub(crate) fn int_inverse(b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inv = inverse(&from_int(b)).expect("unimodular");
    inv.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    assert!(x.denom().is_one());
                    i64::try_from(x.to_integer()).expect("small")
                })
                .collect()
        })
        .collect()
}
