use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::group::{int_inverse, BieberbachGroup, Projection};
use super::linalg::{
    self, clear_denominators, column_hermite, from_int, identity, inverse, mat_mul, mat_vec, rank,
    sub, to_i64, to_zvec, transpose, zq, IntLattice, QMat, ZVec,
};
use crate::exactnum::Rational;
use crate::wavetrace::Decision;
use crate::{Error, Result};

/// One closed-geodesic component: a conjugacy class of elements
/// `(B, b + lambda)` of the deck group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatComponent {
    #[serde(rename = "B_index")]
    pub coset: usize,
    /// Representative lattice vector `lambda`.
    pub lambda: Vec<i64>,
    #[serde(with = "rational_vec")]
    pub translation: Vec<Rational>,
    #[serde(with = "rational_str")]
    pub length_squared: Rational,
    pub fix_dim: usize,
    /// Number of translation classes `lambda mod (B - I) Z^n` merged into
    /// this component.
    pub class_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentGroup {
    #[serde(rename = "B_index")]
    pub coset: usize,
    pub fix_dim: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatLengthEntry {
    #[serde(with = "rational_str")]
    pub length_squared: Rational,
    pub length_float: f64,
    pub components: Vec<ComponentGroup>,
    pub decision: Decision,
    pub detail: Vec<FlatComponent>,
}

impl FlatLengthEntry {
    pub fn multiplicity(&self) -> usize {
        self.components.iter().map(|c| c.count).sum()
    }
}

pub(crate) mod rational_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::exactnum::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod rational_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::exactnum::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Per-coset data for the enumeration.
struct CosetData {
    proj: Projection,
    /// Basis of a complement to `K = image(B - I) cap Z^n` (rows).
    complement: Vec<ZVec>,
    /// Representatives of `K / (B - I) Z^n`.
    k_reps: Vec<ZVec>,
    /// `(B - I) Z^n`.
    image: IntLattice,
}

fn coset_data(g: &BieberbachGroup, coset: usize) -> CosetData {
    let n = g.dim;
    let bq = g.cosets()[coset].b_q();
    let proj = Projection::new(&g.gram, &bq);
    let d = proj.dim();
    let bmi = sub(&bq, &identity(n));
    let image_gens: Vec<ZVec> = transpose(&bmi)
        .iter()
        .map(|c| to_zvec(c).expect("integer"))
        .collect();
    let image = IntLattice::from_generators(&image_gens, n);

    let (complement, k_basis) = if d == 0 {
        (Vec::new(), identity_z(n))
    } else {
        let u = column_hermite(&clear_denominators(&proj.r));
        let col = |c: usize| -> ZVec { u.iter().map(|row| row[c].clone()).collect() };
        ((0..d).map(col).collect(), (d..n).map(col).collect())
    };

    // coordinates of (B - I) e_j in the K basis
    let k_reps = if k_basis.is_empty() {
        vec![vec![BigInt::zero(); n]]
    } else {
        let kq: QMat = k_basis.iter().map(|v| zq(v)).collect();
        let kmat = transpose(&kq);
        // left inverse of the K basis restricted to its span
        let gram_k = mat_mul(&kq, &kmat);
        let left = mat_mul(&inverse(&gram_k).expect("independent"), &kq);
        let coords: Vec<ZVec> = image_gens
            .iter()
            .map(|v| to_zvec(&mat_vec(&left, &zq(v))).expect("image lies in K"))
            .collect();
        let sub_lattice = IntLattice::from_generators(&coords, k_basis.len());
        let diag = sub_lattice.diagonal();
        assert_eq!(diag.len(), k_basis.len());
        let mut reps = vec![vec![0i64; k_basis.len()]];
        for (i, dd) in diag.iter().enumerate() {
            let m = dd.to_i64().expect("small index");
            reps = reps
                .into_iter()
                .flat_map(|r| {
                    (0..m).map(move |t| {
                        let mut r = r.clone();
                        r[i] = t;
                        r
                    })
                })
                .collect();
        }
        reps.iter()
            .map(|t| {
                let mut v = vec![BigInt::zero(); n];
                for (ti, kv) in t.iter().zip(&k_basis) {
                    for (x, y) in v.iter_mut().zip(kv) {
                        *x += y * ti;
                    }
                }
                v
            })
            .collect()
    };

    CosetData {
        proj,
        complement,
        k_reps,
        image,
    }
}

fn identity_z(n: usize) -> Vec<ZVec> {
    (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect()
}

/// Integer points `c` with `(c - z)^T A (c - z) <= r2`, `A` positive
/// definite; float Cholesky bounds with slack, exact filtering.
fn ellipsoid_points(a: &QMat, z: &[Rational], r2: &Rational) -> Vec<Vec<i64>> {
    let d = a.len();
    if d == 0 {
        return vec![Vec::new()];
    }
    let af = DMatrix::from_fn(d, d, |i, j| a[i][j].to_f64().expect("finite"));
    let chol = af.cholesky().expect("positive definite").l().transpose();
    let zf: Vec<f64> = z.iter().map(|x| x.to_f64().expect("finite")).collect();
    let bound = r2.to_f64().expect("finite") * (1.0 + 1e-9) + 1e-9;
    let mut out = Vec::new();
    let mut c = vec![0i64; d];
    fn rec(
        i: usize,
        budget: f64,
        chol: &DMatrix<f64>,
        zf: &[f64],
        c: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let d = zf.len();
        let t: f64 = (i + 1..d)
            .map(|j| chol[(i, j)] * (c[j] as f64 - zf[j]))
            .sum();
        let rii = chol[(i, i)];
        let centre = zf[i] - t / rii;
        let half = budget.max(0.0).sqrt() / rii;
        let lo = (centre - half).floor() as i64 - 1;
        let hi = (centre + half).ceil() as i64 + 1;
        for v in lo..=hi {
            c[i] = v;
            let s = rii * (v as f64 - zf[i]) + t;
            let rest = budget - s * s;
            if rest < -1e-6 * (1.0 + budget.abs()) {
                continue;
            }
            if i == 0 {
                out.push(c.clone());
            } else {
                rec(i - 1, rest, chol, zf, c, out);
            }
        }
    }
    rec(d - 1, bound, &chol, &zf, &mut c, &mut out);
    out.retain(|p| {
        let diff: Vec<Rational> = p
            .iter()
            .zip(z)
            .map(|(&x, zi)| linalg::rat(x) - zi)
            .collect();
        &linalg::quad(a, &diff) <= r2
    });
    out
}

#[derive(Clone, Debug)]
struct Hit {
    coset: usize,
    lambda: ZVec,
    length_squared: Rational,
}

fn coset_hits(g: &BieberbachGroup, coset: usize, data: &CosetData, r2: &Rational) -> Vec<Hit> {
    let d = data.proj.dim();
    if d == 0 {
        return Vec::new();
    }
    let b = &g.cosets()[coset].b;
    let cmat = transpose(&data.complement.iter().map(|v| zq(v)).collect());
    let m = mat_mul(&data.proj.r, &cmat);
    let y = mat_vec(&data.proj.r, b);
    let a = mat_mul(&mat_mul(&transpose(&m), &data.proj.h), &m);
    let minv = inverse(&m).expect("complement maps onto the kernel");
    let z: Vec<Rational> = mat_vec(&minv, &y).into_iter().map(|x| -x).collect();
    let mut hits = Vec::new();
    for c in ellipsoid_points(&a, &z, r2) {
        let mut base = vec![BigInt::zero(); g.dim];
        for (ci, cv) in c.iter().zip(&data.complement) {
            for (x, y) in base.iter_mut().zip(cv) {
                *x += y * ci;
            }
        }
        let mut u = zq(&base);
        for (x, y) in u.iter_mut().zip(b) {
            *x += y;
        }
        let len2 = data.proj.length_squared(&u);
        if len2.is_zero() {
            continue;
        }
        for rep in &data.k_reps {
            let lambda: ZVec = base.iter().zip(rep).map(|(x, y)| x + y).collect();
            hits.push(Hit {
                coset,
                lambda,
                length_squared: len2.clone(),
            });
        }
    }
    hits
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let r = self.find(self.0[i]);
            self.0[i] = r;
        }
        self.0[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// `alpha (B_i, b_i + lambda) alpha^{-1}` written as `(B_j, b_j + lambda')`.
fn conjugate(g: &BieberbachGroup, alpha: usize, coset: usize, lambda: &ZVec) -> (usize, ZVec) {
    let a = &g.cosets()[alpha];
    let gamma = &g.cosets()[coset];
    let a_inv = int_inverse(&a.b_mat);
    let aq = a.b_q();
    let b_new = mat_mul(&mat_mul(&aq, &gamma.b_q()), &from_int(&a_inv));
    let b_new_int: Vec<Vec<i64>> = b_new
        .iter()
        .map(|r| to_i64(&to_zvec(r).expect("integer")))
        .collect();
    let j = g
        .coset_of(&b_new_int)
        .expect("point group is closed under conjugation");
    let mut t: Vec<Rational> = gamma.b.iter().zip(zq(lambda)).map(|(x, y)| x + y).collect();
    t = mat_vec(&aq, &t);
    let ba = mat_vec(&b_new, &a.b);
    for ((x, ai), bai) in t.iter_mut().zip(&a.b).zip(&ba) {
        *x += ai;
        *x -= bai;
    }
    let lambda_new: Vec<Rational> = t.iter().zip(&g.cosets()[j].b).map(|(x, y)| x - y).collect();
    (
        j,
        to_zvec(&lambda_new).expect("conjugate stays in the coset"),
    )
}

fn group_hits(g: &BieberbachGroup, data: &[CosetData], hits: &[Hit]) -> Vec<FlatComponent> {
    let mut uf = UnionFind((0..hits.len()).collect());
    for (i, h) in hits.iter().enumerate() {
        for alpha in 0..g.cosets().len() {
            let (j, lam) = conjugate(g, alpha, h.coset, &h.lambda);
            let target = hits.iter().position(|o| {
                o.coset == j && {
                    let diff: ZVec = lam.iter().zip(&o.lambda).map(|(x, y)| x - y).collect();
                    data[j].image.contains(&diff)
                }
            });
            let k = target.expect("conjugate of a hit is a hit of the same length");
            uf.union(i, k);
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..hits.len() {
        let r = uf.find(i);
        classes.entry(r).or_default().push(i);
    }
    classes
        .values()
        .map(|members| {
            let h = &hits[members[0]];
            let translation = g.cosets()[h.coset]
                .b
                .iter()
                .zip(zq(&h.lambda))
                .map(|(x, y)| x + y)
                .collect();
            FlatComponent {
                coset: h.coset,
                lambda: to_i64(&h.lambda),
                translation,
                length_squared: h.length_squared.clone(),
                fix_dim: data[h.coset].proj.dim(),
                class_size: members.len(),
            }
        })
        .collect()
}

fn max_length_squared(max_length: f64) -> Result<Rational> {
    if !(max_length > 0.0 && max_length.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "max_length must be positive and finite, got {max_length}"
        )));
    }
    let m = Rational::from_float(max_length).expect("finite");
    Ok(&m * &m)
}

fn assemble(g: &BieberbachGroup, data: &[CosetData], hits: Vec<Hit>) -> Vec<FlatLengthEntry> {
    let mut by_length: BTreeMap<Rational, Vec<Hit>> = BTreeMap::new();
    for h in hits {
        by_length
            .entry(h.length_squared.clone())
            .or_default()
            .push(h);
    }
    by_length
        .into_iter()
        .map(|(len2, hs)| {
            let mut detail = group_hits(g, data, &hs);
            detail.sort_by(|a, b| (a.coset, &a.lambda).cmp(&(b.coset, &b.lambda)));
            let mut groups: BTreeMap<usize, ComponentGroup> = BTreeMap::new();
            for c in &detail {
                groups
                    .entry(c.coset)
                    .or_insert(ComponentGroup {
                        coset: c.coset,
                        fix_dim: c.fix_dim,
                        count: 0,
                    })
                    .count += 1;
            }
            FlatLengthEntry {
                length_float: len2.to_f64().expect("finite").sqrt(),
                length_squared: len2,
                components: groups.into_values().collect(),
                decision: Decision::Nonzero,
                detail,
            }
        })
        .collect()
}

/// Closed-geodesic lengths up to `max_length` with their components grouped
/// by deck-group conjugacy, sorted by length. Every entry is `NONZERO`:
/// flat Morse indices vanish, so leading sums have no cancellation.
pub fn length_spectrum_flat(g: &BieberbachGroup, max_length: f64) -> Result<Vec<FlatLengthEntry>> {
    let r2 = max_length_squared(max_length)?;
    let cosets = g.cosets().len();
    let data: Vec<CosetData> = (0..cosets)
        .into_par_iter()
        .map(|i| coset_data(g, i))
        .collect();
    let hits: Vec<Hit> = (0..cosets)
        .into_par_iter()
        .map(|i| coset_hits(g, i, &data[i], &r2))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(assemble(g, &data, hits))
}

/// Reference enumeration over every `lambda` in the box `[-radius, radius]^n`,
/// deduplicated modulo `(B - I) Z^n`. Returns, per squared length, the number
/// of translation classes for each coset.
pub fn brute_force_spectrum(
    g: &BieberbachGroup,
    max_length: f64,
    radius: i64,
) -> Result<BTreeMap<Rational, BTreeMap<usize, usize>>> {
    let r2 = max_length_squared(max_length)?;
    let n = g.dim;
    let mut out: BTreeMap<Rational, BTreeMap<usize, usize>> = BTreeMap::new();
    for (i, c) in g.cosets().iter().enumerate() {
        let proj = Projection::new(&g.gram, &c.b_q());
        if proj.dim() == 0 {
            continue;
        }
        let image_gens: Vec<ZVec> = transpose(&sub(&c.b_q(), &identity(n)))
            .iter()
            .map(|v| to_zvec(v).expect("integer"))
            .collect();
        let image = IntLattice::from_generators(&image_gens, n);
        let mut found: Vec<(Rational, ZVec)> = Vec::new();
        let side = (2 * radius + 1) as usize;
        for idx in 0..side.pow(n as u32) {
            let mut rest = idx;
            let lambda: ZVec = (0..n)
                .map(|_| {
                    let v = (rest % side) as i64 - radius;
                    rest /= side;
                    BigInt::from(v)
                })
                .collect();
            let u: Vec<Rational> = c.b.iter().zip(zq(&lambda)).map(|(x, y)| x + y).collect();
            let len2 = proj.length_squared(&u);
            if len2.is_zero() || len2 > r2 {
                continue;
            }
            let dup = found.iter().any(|(l, other)| {
                *l == len2 && {
                    let diff: ZVec = lambda.iter().zip(other).map(|(x, y)| x - y).collect();
                    image.contains(&diff)
                }
            });
            if !dup {
                found.push((len2, lambda));
            }
        }
        for (len2, _) in found {
            *out.entry(len2).or_default().entry(i).or_default() += 1;
        }
    }
    Ok(out)
}

/// Translation-class counts of an enumerated spectrum, in the shape returned
/// by [`brute_force_spectrum`].
pub fn class_counts(spectrum: &[FlatLengthEntry]) -> BTreeMap<Rational, BTreeMap<usize, usize>> {
    spectrum
        .iter()
        .map(|e| {
            let mut m: BTreeMap<usize, usize> = BTreeMap::new();
            for c in &e.detail {
                *m.entry(c.coset).or_default() += c.class_size;
            }
            (e.length_squared.clone(), m)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanEntry {
    #[serde(rename = "B_index")]
    pub coset: usize,
    pub fix_dim: usize,
    pub kernel_dim: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatCleanReport {
    #[serde(with = "rational_str")]
    pub length_squared: Rational,
    pub entries: Vec<CleanEntry>,
    pub pass: bool,
}

/// `dim ker` of `(X, Y) -> ((B - I) X + B Y, (B - I) Y)`; scaling `Y` by the
/// length does not change the rank. Also returns `dim ker(B - I)`.
pub fn linearized_kernel(b_mat: &[Vec<i64>]) -> (usize, usize) {
    let n = b_mat.len();
    let bq = from_int(b_mat);
    let bmi = sub(&bq, &identity(n));
    let block: QMat = (0..2 * n)
        .map(|i| {
            (0..2 * n)
                .map(|j| match (i < n, j < n) {
                    (true, true) => bmi[i][j].clone(),
                    (true, false) => bq[i][j - n].clone(),
                    (false, true) => Rational::zero(),
                    (false, false) => bmi[i - n][j - n].clone(),
                })
                .collect()
        })
        .collect();
    (2 * n - rank(&block), n - rank(&bmi))
}

pub fn cleanliness_diagnostic(g: &BieberbachGroup, entry: &FlatLengthEntry) -> FlatCleanReport {
    let entries: Vec<CleanEntry> = entry
        .components
        .iter()
        .map(|c| {
            let (kernel_dim, fix) = linearized_kernel(&g.cosets()[c.coset].b_mat);
            CleanEntry {
                coset: c.coset,
                fix_dim: c.fix_dim,
                kernel_dim,
                pass: kernel_dim == fix && fix == c.fix_dim,
            }
        })
        .collect();
    FlatCleanReport {
        length_squared: entry.length_squared.clone(),
        pass: entries.iter().all(|e| e.pass),
        entries,
    }
}

/// `det` of the Gram matrix of `Z^n cap ker(B - I)`, the squared covolume of
/// the fixed torus directions.
pub fn fixed_lattice_gram_det(g: &BieberbachGroup, coset: usize) -> Rational {
    let n = g.dim;
    let b = &g.cosets()[coset].b_mat;
    let bmi: Vec<Vec<i64>> = b
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(s, &x)| x - (r == s) as i64)
                .collect()
        })
        .collect();
    let basis: QMat = super::group::integer_kernel(&bmi, n)
        .iter()
        .map(|v| zq(v))
        .collect();
    let gram = mat_mul(&mat_mul(&basis, &g.gram), &transpose(&basis));
    determinant(&gram)
}

fn determinant(a: &QMat) -> Rational {
    let n = a.len();
    let mut m = a.clone();
    let mut det = linalg::rat(1);
    for i in 0..n {
        let Some(p) = (i..n).find(|&r| !m[r][i].is_zero()) else {
            return Rational::zero();
        };
        if p != i {
            m.swap(p, i);
            det = -det;
        }
        det *= &m[i][i];
        for r in i + 1..n {
            let f = &m[r][i] / &m[i][i];
            for c in i..n {
                let t = &f * &m[i][c];
                m[r][c] -= t;
            }
        }
    }
    det
}
