//! Leading wave invariants on lens spaces and the exact test for their
//! cancellation.
//!
//! At a short length `tau` every component of maximal dimension contributes
//! `i^{-sigma} (1/2pi) * dg * vol`. All such components share `m` and `tau`,
//! so the common positive factor is stripped and what remains is
//! `sum_j eps_j prod_{i outside class j} 1 / (2|cos(2 pi k_j p_i / q) - cos tau|)`,
//! whose vanishing is decided in `Q(zeta_q)`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactnum::{
    compare_cos, cos_as_cyclo, is_prime, mod_inverse, CosSymbol, CycloNumber, Rational,
};
use crate::lens::{
    components, GeodesicComponent, LengthKind, LengthSpectrumEntry, LensSpace, Orientation, Tau,
};
use crate::morse::{index_full, index_short};
use crate::{Error, Result};

/// One factor `2|cos(2 pi k p_i / q) - cos tau|` of the DG product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosGap {
    pub index: usize,
    pub kp: CosSymbol,
    pub tau: CosSymbol,
}

impl CosGap {
    pub fn value(&self) -> f64 {
        2.0 * (self.kp.to_f64() - self.tau.to_f64()).abs()
    }

    /// `2|cos a - cos b|` as the exact element `+-(z^a + z^-a - z^b - z^-b)`.
    pub fn exact(&self) -> CycloNumber {
        let diff = cos_as_cyclo(&self.kp)
            .try_sub(&cos_as_cyclo(&self.tau))
            .expect("same conductor")
            .scale(&Rational::from_integer(2.into()));
        match compare_cos(&self.kp, &self.tau).expect("same conductor") {
            Ordering::Greater => diff,
            Ordering::Less => diff.neg(),
            Ordering::Equal => unreachable!("outside coordinate cannot share cos tau"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityScalar {
    pub tau: Tau,
    pub m: usize,
    pub factors: Vec<CosGap>,
    pub float_value: f64,
}

/// `tau^{-1/2} (2|sin tau|)^{-(m-1)} prod_{i outside} (2|cos(2 pi k p_i/q) - cos tau|)^{-1}`.
pub fn dg_scalar(lens: &LensSpace, c: &GeodesicComponent) -> Result<DensityScalar> {
    let q = lens.q();
    let tau_sym = CosSymbol::new(c.tau.index as i64, q);
    if tau_sym.residue() == 0 || 2 * tau_sym.residue() == q {
        return Err(Error::FullLength);
    }
    let k = c.effective_k(lens) as i64;
    let factors: Vec<CosGap> = (0..lens.n())
        .filter(|i| !c.members.contains(i))
        .map(|i| CosGap {
            index: i,
            kp: CosSymbol::new(k * lens.p()[i] as i64, q),
            tau: tau_sym,
        })
        .collect();
    let tau = c.tau.value();
    let m = c.m();
    let mut value = tau.powf(-0.5) * (2.0 * tau.sin().abs()).powi(-(m as i32 - 1));
    for f in &factors {
        value /= f.value();
    }
    Ok(DensityScalar {
        tau: c.tau,
        m,
        factors,
        float_value: value,
    })
}

/// `vol(S^{2m-1}) = 2 pi^m / (m-1)!`.
pub fn sphere_volume(m: usize) -> f64 {
    let fact: f64 = (1..m).map(|i| i as f64).product();
    2.0 * PI.powi(m as i32) / fact
}

/// Sasaki volume of the component: the `J`-graph over the class sphere is
/// stretched by `sqrt 2` in the `2m - 2` directions transverse to the flow,
/// then divided by the free `Z_q` action.
pub fn component_volume(lens: &LensSpace, c: &GeodesicComponent) -> f64 {
    volume_for(c.m(), lens.q())
}

pub fn volume_for(m: usize, q: u32) -> f64 {
    2f64.powi(m as i32 - 1) * sphere_volume(m) / q as f64
}

fn volume_symbol(m: usize, q: u32) -> String {
    format!("2^{}*2pi^{}/({}!*{})", m - 1, m, m - 1, q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveTerm {
    pub class: usize,
    pub orientation: Orientation,
    pub morse_index: u32,
    pub sign: i8,
    pub dg: f64,
    pub volume: f64,
    pub amplitude_float: f64,
    pub amplitude_symbolic: String,
    pub factors: Vec<CosGap>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveTermSum {
    pub q: u32,
    pub tau: Tau,
    pub kind: LengthKind,
    pub max_dim: u32,
    pub m: usize,
    pub terms: Vec<WaveTerm>,
    /// `(class, dim)` of components below the maximal dimension; they do
    /// not enter the leading coefficient.
    pub excluded: Vec<(usize, u32)>,
}

impl WaveTermSum {
    pub fn float_sum(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.sign as f64 * t.amplitude_float)
            .sum()
    }
}

pub fn leading_sum(lens: &LensSpace, entry: &LengthSpectrumEntry) -> Result<WaveTermSum> {
    if let LengthKind::Full { .. } = entry.kind {
        return Ok(WaveTermSum {
            q: lens.q(),
            tau: entry.tau,
            kind: entry.kind.clone(),
            max_dim: 4 * lens.n() as u32 - 3,
            m: lens.n(),
            terms: Vec::new(),
            excluded: Vec::new(),
        });
    }
    sum_over(lens, entry.tau, entry.kind.clone(), &entry.components)
}

fn sum_over(
    lens: &LensSpace,
    tau: Tau,
    kind: LengthKind,
    comps: &[GeodesicComponent],
) -> Result<WaveTermSum> {
    let max_dim = comps.iter().map(|c| c.dim).max().unwrap_or(0);
    let m = (max_dim as usize + 1) / 2;
    let mut terms = Vec::new();
    let mut excluded = Vec::new();
    for c in comps {
        if c.dim < max_dim {
            if c.orientation == Orientation::Plus {
                excluded.push((c.class_index, c.dim));
            }
            continue;
        }
        let morse = index_short(lens, c)?;
        let dg = dg_scalar(lens, c)?;
        let volume = component_volume(lens, c);
        let gaps: Vec<String> = dg
            .factors
            .iter()
            .map(|f| format!("(2|{}-{}|)^-1", f.kp, f.tau))
            .collect();
        let mut symbolic = format!(
            "(1/2pi)*tau^(-1/2)*(2|sin tau|)^-{}*{}",
            m - 1,
            volume_symbol(m, lens.q())
        );
        for g in gaps {
            symbolic.push('*');
            symbolic.push_str(&g);
        }
        terms.push(WaveTerm {
            class: c.class_index,
            orientation: c.orientation,
            morse_index: morse.total,
            sign: morse.phase_sign(),
            dg: dg.float_value,
            volume,
            amplitude_float: dg.float_value * volume / (2.0 * PI),
            amplitude_symbolic: symbolic,
            factors: dg.factors,
        });
    }
    Ok(WaveTermSum {
        q: lens.q(),
        tau,
        kind,
        max_dim,
        m,
        terms,
        excluded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Nonzero,
    Zero,
}

pub const ZERO_LABEL: &str = "leading-order cancellation — singularity undetermined";

/// `sum_j eps_j / P_j` with `P_j = prod` of exact gaps, cleared of
/// denominators: `sum_j eps_j prod_{j' != j} P_{j'}`.
pub fn exact_numerator(sum: &WaveTermSum) -> CycloNumber {
    let q = sum.q;
    let products: Vec<CycloNumber> = sum
        .terms
        .iter()
        .map(|t| {
            t.factors.iter().fold(CycloNumber::one(q), |acc, f| {
                acc.try_mul(&f.exact()).expect("same conductor")
            })
        })
        .collect();
    let mut total = CycloNumber::zero(q);
    for (j, t) in sum.terms.iter().enumerate() {
        let mut term = CycloNumber::from_integer(q, t.sign as i64);
        for (jp, p) in products.iter().enumerate() {
            if jp != j {
                term = term.try_mul(p).expect("same conductor");
            }
        }
        total = total.try_add(&term).expect("same conductor");
    }
    total
}

pub fn cancellation_decision(sum: &WaveTermSum) -> Decision {
    if matches!(sum.kind, LengthKind::Full { .. }) {
        return Decision::Nonzero;
    }
    if exact_numerator(sum).is_zero() {
        Decision::Zero
    } else {
        Decision::Nonzero
    }
}

/// Whether `cos(2pi pl/q) - cos(2pi pk/q) - cos(2pi l/q) + cos(2pi k/q)`
/// vanishes in `Q(zeta_q)`, with `k = l p^{-1} mod q`.
pub fn lemma_check(q: u32, p: i64, l: u32) -> Result<bool> {
    if q % 2 == 0 || !is_prime(q) {
        return Err(Error::NotOddPrime(q));
    }
    let inv = mod_inverse(p, q as i64)
        .ok_or_else(|| Error::InvalidArgument(format!("{p} is not a unit mod {q}")))?;
    if l == 0 || l >= q {
        return Err(Error::LengthIndexOutOfRange { l, q, max: q - 1 });
    }
    let l = l as i64;
    let k = (inv * l).rem_euclid(q as i64);
    let c = |a: i64| cos_as_cyclo(&CosSymbol::new(a, q));
    let x = c(p * l)
        .try_sub(&c(p * k))
        .and_then(|x| x.try_sub(&c(l)))
        .and_then(|x| x.try_add(&c(k)))?;
    Ok(x.is_zero())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub class: usize,
    pub orientation: Orientation,
    pub sign: i8,
    pub amplitude_float: f64,
    pub amplitude_symbolic: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub q: u32,
    pub p: Vec<u32>,
    pub l: u32,
    pub winding: u32,
    pub tau: f64,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub terms: Vec<TermReport>,
}

impl DecisionReport {
    pub fn new(lens: &LensSpace, sum: &WaveTermSum, decision: Decision) -> Self {
        let (l, winding) = sum.tau.split(lens);
        DecisionReport {
            q: lens.q(),
            p: lens.p().to_vec(),
            l,
            winding,
            tau: sum.tau.value(),
            decision,
            label: (decision == Decision::Zero).then(|| ZERO_LABEL.to_string()),
            terms: sum
                .terms
                .iter()
                .map(|t| TermReport {
                    class: t.class,
                    orientation: t.orientation,
                    sign: t.sign,
                    amplitude_float: t.amplitude_float,
                    amplitude_symbolic: t.amplitude_symbolic.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub n: usize,
    pub q_min: u32,
    pub q_max: u32,
    pub prime_only: bool,
    pub lenses_examined: usize,
    pub lengths_examined: usize,
    pub findings: Vec<DecisionReport>,
}

/// Exponent tuples `(1, p_2 <= ... <= p_n)` with each `p_i` a unit in
/// `1..=q/2`; sign changes and permutations of coordinates are isometries.
pub fn search_exponents(q: u32, n: usize) -> Vec<Vec<i64>> {
    let units: Vec<i64> = (1..=q as i64 / 2)
        .filter(|&a| num_integer::gcd(a, q as i64) == 1)
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![1i64];
    fn rec(units: &[i64], start: usize, n: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..units.len() {
            cur.push(units[i]);
            rec(units, i, n, cur, out);
            cur.pop();
        }
    }
    rec(&units, 0, n, &mut cur, &mut out);
    out
}

/// Decision at every short length of one period. Iterates repeat the
/// winding-0 decision: the extra conjugate points shift every index equally
/// and the gaps `|cos(2 pi k p_i/q) - cos tau|` are unchanged.
pub fn decide_lens(lens: &LensSpace) -> Result<Vec<(WaveTermSum, Decision)>> {
    (1..=lens.max_l())
        .map(|l| {
            let comps = components(lens, l, 0)?;
            let tau = comps[0].tau;
            let sum = sum_over(lens, tau, LengthKind::Short { l, winding: 0 }, &comps)?;
            let d = cancellation_decision(&sum);
            Ok((sum, d))
        })
        .collect()
}

pub fn cancellation_search(
    n: usize,
    q_min: u32,
    q_max: u32,
    prime_only: bool,
) -> Result<SearchReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    let cells: Vec<(u32, Vec<i64>)> = (q_min.max(3)..=q_max)
        .filter(|&q| !prime_only || is_prime(q))
        .flat_map(|q| search_exponents(q, n).into_iter().map(move |p| (q, p)))
        .collect();
    let results: Vec<(usize, Vec<DecisionReport>)> = cells
        .par_iter()
        .map(|(q, p)| {
            let lens = LensSpace::new(*q, p)?;
            let decided = decide_lens(&lens)?;
            let count = decided.len();
            let hits = decided
                .into_iter()
                .filter(|(_, d)| *d == Decision::Zero)
                .map(|(s, d)| DecisionReport::new(&lens, &s, d))
                .collect();
            Ok((count, hits))
        })
        .collect::<Result<_>>()?;
    let lengths_examined = results.iter().map(|r| r.0).sum();
    let mut findings: Vec<DecisionReport> = results.into_iter().flat_map(|r| r.1).collect();
    findings.sort_by(|a, b| (a.q, &a.p, a.l, a.winding).cmp(&(b.q, &b.p, b.l, b.winding)));
    Ok(SearchReport {
        n,
        q_min,
        q_max,
        prime_only,
        lenses_examined: cells.len(),
        lengths_examined,
        findings,
    })
}

/// Sign and total index of a full-length entry.
pub fn full_length_sign(lens: &LensSpace, multiple: u32) -> Result<i8> {
    Ok(index_full(lens, multiple)?.phase_sign())
}
