//! Lens spaces `L(q; p_1, ..., p_n)`, the `~(l)` relation on rotation
//! exponents, and the fixed-point components of the geodesic flow.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::exactnum::{dist_q, mod_inverse};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LensSpace {
    q: u32,
    p: Vec<u32>,
    original_p: Vec<i64>,
    normalizer: u32,
}

impl LensSpace {
    /// Validates and normalises so that `p_1 = 1`.
    pub fn new(q: u32, p: &[i64]) -> Result<Self> {
        if q <= 2 {
            return Err(Error::InvalidLens(format!("q must exceed 2, got {q}")));
        }
        if p.len() < 2 {
            return Err(Error::InvalidLens(format!(
                "need at least two rotation exponents, got {}",
                p.len()
            )));
        }
        for &pi in p {
            if num_integer::gcd(pi.rem_euclid(q as i64), q as i64) != 1 {
                return Err(Error::InvalidLens(format!(
                    "exponent {pi} is not coprime to q = {q}"
                )));
            }
        }
        let normalizer = mod_inverse(p[0], q as i64).expect("checked coprime") as u32;
        let normalized = p
            .iter()
            .map(|&pi| (pi * normalizer as i64).rem_euclid(q as i64) as u32)
            .collect();
        Ok(LensSpace {
            q,
            p: normalized,
            original_p: p.to_vec(),
            normalizer,
        })
    }

    pub fn homogeneous(q: u32, n: usize) -> Result<Self> {
        Self::new(q, &vec![1; n])
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Normalised exponents, reduced into `1..q`, with `p[0] == 1`.
    pub fn p(&self) -> &[u32] {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn original_p(&self) -> &[i64] {
        &self.original_p
    }

    /// The unit the input exponents were multiplied by.
    pub fn normalizer(&self) -> u32 {
        self.normalizer
    }

    pub fn is_homogeneous(&self) -> bool {
        self.p.iter().all(|&pi| pi == 1 || pi == self.q - 1)
    }

    /// Period of the geodesic flow in units of `2 pi / q`.
    pub fn period_index(&self) -> u64 {
        if self.q % 2 == 0 {
            self.q as u64 / 2
        } else {
            self.q as u64
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI * self.period_index() as f64 / self.q as f64
    }

    /// Largest admissible `l` for a short geodesic.
    pub fn max_l(&self) -> u32 {
        self.period_index() as u32 - 1
    }

    pub fn check_l(&self, l: u32) -> Result<()> {
        if l == 0 || l > self.max_l() {
            return Err(Error::LengthIndexOutOfRange {
                l,
                q: self.q,
                max: self.max_l(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for LensSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.p.iter().map(u32::to_string).collect();
        write!(f, "L({};{})", self.q, ps.join(","))
    }
}

/// An exact length `tau = 2 pi * index / q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tau {
    pub index: u64,
    pub q: u32,
}

impl Tau {
    pub fn value(&self) -> f64 {
        2.0 * PI * self.index as f64 / self.q as f64
    }

    /// `(l, winding)` relative to the flow period of `lens`.
    pub fn split(&self, lens: &LensSpace) -> (u32, u32) {
        let per = lens.period_index();
        ((self.index % per) as u32, (self.index / per) as u32)
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = num_integer::gcd(self.index, self.q as u64);
        let (a, b) = (self.index / g, self.q as u64 / g);
        match (a, b) {
            (1, 1) => write!(f, "2pi"),
            (a, 1) => write!(f, "{a}*2pi"),
            (1, b) => write!(f, "2pi/{b}"),
            (a, b) => write!(f, "{a}*2pi/{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivPartition {
    pub q: u32,
    pub l: u32,
    /// Zero-based coordinate indices, each class sorted, classes ordered by
    /// their smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Canonical realizer of each class, in `1..=q/2`.
    pub realizers: Vec<u32>,
}

impl EquivPartition {
    pub fn class_size(&self, r: usize) -> usize {
        self.classes[r].len()
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.contains(&i))
            .expect("classes partition the coordinates")
    }
}

/// Solution `k` of `p_j k = l (mod q)`.
fn solve_k(pj: u32, l: u32, q: u32) -> u32 {
    let inv = mod_inverse(pj as i64, q as i64).expect("unit");
    ((inv * l as i64).rem_euclid(q as i64)) as u32
}

/// Whether `p_i k = +-l (mod q)`.
pub(crate) fn realizes(pi: u32, k: u32, l: u32, q: u32) -> bool {
    let r = (pi as u64 * k as u64 % q as u64) as u32;
    r == l % q || (r + l % q) % q == 0
}

pub fn partition(lens: &LensSpace, l: u32) -> Result<EquivPartition> {
    lens.check_l(l)?;
    let q = lens.q;
    let n = lens.n();
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    let mut realizers = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let k = solve_k(lens.p[i], l, q);
        let members: Vec<usize> = (i..n)
            .filter(|&j| !assigned[j] && realizes(lens.p[j], k, l, q))
            .collect();
        for &j in &members {
            assigned[j] = true;
        }
        realizers.push(k.min(q - k));
        classes.push(members);
    }
    Ok(EquivPartition {
        q,
        l,
        classes,
        realizers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Orientation {
    pub fn sign(self) -> i8 {
        match self {
            Orientation::Plus => 1,
            Orientation::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Orientation::Plus => Orientation::Minus,
            Orientation::Minus => Orientation::Plus,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Plus => "+",
            Orientation::Minus => "-",
        })
    }
}

/// One connected component of `Fix(Phi_tau)` at a short length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicComponent {
    pub tau: Tau,
    pub l: u32,
    pub winding: u32,
    pub class_index: usize,
    pub members: Vec<usize>,
    pub orientation: Orientation,
    /// `2m - 1`.
    pub dim: u32,
    /// `k_r` for `+`, `q - k_r` for `-`.
    pub realizer_k: u32,
    /// Per-coordinate block signs of `J_l` (orientation included).
    pub j_signs: Vec<i8>,
}

impl GeodesicComponent {
    pub fn m(&self) -> usize {
        self.members.len()
    }

    pub fn tau_value(&self) -> f64 {
        self.tau.value()
    }

    /// The deck element `T^k` closing the geodesic at this winding.
    ///
    /// For even `q` every exponent is odd, so `T^{q/2} = -Id` and each
    /// extra half-period composes the realizer with `q/2`.
    pub fn effective_k(&self, lens: &LensSpace) -> u32 {
        let q = lens.q;
        if q % 2 == 0 {
            ((self.realizer_k as u64 + self.winding as u64 * (q as u64 / 2)) % q as u64) as u32
        } else {
            self.realizer_k
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LengthKind {
    Short {
        l: u32,
        winding: u32,
    },
    /// A multiple of the flow period: every unit vector is fixed.
    Full {
        multiple: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrumEntry {
    pub tau: Tau,
    pub kind: LengthKind,
    /// Empty for full lengths, where the fixed set is the whole unit
    /// tangent bundle.
    pub components: Vec<GeodesicComponent>,
}

/// Block signs of `J_l`, where block `i` uses the realizer of its own class.
pub fn j_signs(lens: &LensSpace, part: &EquivPartition) -> Vec<i8> {
    let q = lens.q;
    (0..lens.n())
        .map(|i| {
            let k = part.realizers[part.class_of(i)];
            let r = (lens.p[i] as u64 * k as u64 % q as u64) as u32;
            if r == part.l {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// The `2n x 2n` operator `J_l`: block `i` is `s_i [[0,-1],[1,0]]`, negated
/// for the reversed orientation.
pub fn j_operator(
    lens: &LensSpace,
    part: &EquivPartition,
    class_index: usize,
    orientation: Orientation,
) -> Result<DMatrix<f64>> {
    if class_index >= part.classes.len() {
        return Err(Error::ClassIndexOutOfRange(class_index, part.classes.len()));
    }
    let signs = j_signs(lens, part);
    Ok(j_matrix(&signs, orientation.sign()))
}

pub(crate) fn j_matrix(signs: &[i8], orient: i8) -> DMatrix<f64> {
    let n = signs.len();
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for (i, &s) in signs.iter().enumerate() {
        let s = (s * orient) as f64;
        j[(2 * i + 1, 2 * i)] = s;
        j[(2 * i, 2 * i + 1)] = -s;
    }
    j
}

/// Both orientations of every class at `tau = winding * P + 2 pi l / q`.
pub fn components(lens: &LensSpace, l: u32, winding: u32) -> Result<Vec<GeodesicComponent>> {
    let part = partition(lens, l)?;
    let signs = j_signs(lens, &part);
    let q = lens.q;
    let tau = Tau {
        index: winding as u64 * lens.period_index() + l as u64,
        q,
    };
    let mut out = Vec::with_capacity(2 * part.classes.len());
    for (r, members) in part.classes.iter().enumerate() {
        let k = part.realizers[r];
        for orientation in [Orientation::Plus, Orientation::Minus] {
            let o = orientation.sign();
            out.push(GeodesicComponent {
                tau,
                l,
                winding,
                class_index: r,
                members: members.clone(),
                orientation,
                dim: 2 * members.len() as u32 - 1,
                realizer_k: if o > 0 { k } else { q - k },
                j_signs: signs.iter().map(|s| s * o).collect(),
            });
        }
    }
    Ok(out)
}

pub fn length_spectrum(lens: &LensSpace, max_length: f64) -> Vec<LengthSpectrumEntry> {
    let q = lens.q;
    let unit = 2.0 * PI / q as f64;
    let max_index = ((max_length / unit) * (1.0 + 1e-12) + 1e-9).floor();
    if !(max_index >= 1.0) {
        return Vec::new();
    }
    let per = lens.period_index();
    (1..=max_index as u64)
        .map(|index| {
            let tau = Tau { index, q };
            let (l, winding) = tau.split(lens);
            if l == 0 {
                LengthSpectrumEntry {
                    tau,
                    kind: LengthKind::Full {
                        multiple: (index / per) as u32,
                    },
                    components: Vec::new(),
                }
            } else {
                LengthSpectrumEntry {
                    tau,
                    kind: LengthKind::Short { l, winding },
                    components: components(lens, l, winding).expect("l in range"),
                }
            }
        })
        .collect()
}

/// Whether a winding-0 component is not an iterate of a shorter closed
/// geodesic through the same points.
///
/// It is an iterate exactly when for some proper divisor `l'` of `l` a
/// single deck element `k'` satisfies `p_i k' = s_i l'` on every member,
/// i.e. the operators `J_{l'}` and `J_l` agree on the class subsphere.
pub fn is_primitive(lens: &LensSpace, c: &GeodesicComponent) -> Result<bool> {
    if c.winding > 0 {
        return Err(Error::IteratedComponent(c.winding));
    }
    let q = lens.q as i64;
    for lp in (1..c.l).filter(|d| c.l % d == 0) {
        let first = c.members[0];
        let target = (c.j_signs[first] as i64 * lp as i64).rem_euclid(q);
        let inv = mod_inverse(lens.p[first] as i64, q).expect("unit");
        let kp = (inv * target).rem_euclid(q);
        let all = c
            .members
            .iter()
            .all(|&i| (lens.p[i] as i64 * kp - c.j_signs[i] as i64 * lp as i64).rem_euclid(q) == 0);
        if all {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sanity predicate used by tests: every member has `cos(2 pi p_i k / q)`
/// equal to `cos(2 pi l / q)`.
pub fn realizer_is_consistent(lens: &LensSpace, part: &EquivPartition) -> bool {
    part.classes.iter().zip(&part.realizers).all(|(cls, &k)| {
        cls.iter()
            .all(|&i| dist_q(lens.p[i] as i64 * k as i64, lens.q) == dist_q(part.l as i64, lens.q))
    })
}
