//! Laplace multiplicities of lens spaces and the Gaussian-smoothed wave trace.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub q: u32,
    pub p: Vec<i64>,
    pub cutoff: usize,
    /// `m_k` for `k = 0..=cutoff`, eigenvalue `k(k + 2n - 2)`.
    pub multiplicities: Vec<u128>,
}

impl SpectrumTable {
    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        eigenvalue(self.n(), k)
    }
}

pub fn eigenvalue(n: usize, k: usize) -> f64 {
    (k * (k + 2 * n - 2)) as f64
}

fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of degree-`k` harmonic polynomials on `R^{2n}`.
pub fn sphere_multiplicity(n: usize, k: usize) -> u128 {
    let d = 2 * n as u128;
    let k = k as u128;
    let all = binomial(k + d - 1, d - 1);
    let lower = if k >= 2 {
        binomial(k + d - 3, d - 1)
    } else {
        0
    };
    all - lower
}

/// Exact multiplicities by counting invariant monomials.
///
/// The coordinates `z_i, conj(z_i)` carry characters `+-p_i` of `Z/q`; a DP
/// over the group ring counts monomials of each degree by total weight.
/// Invariant harmonics of degree `k` number `I_k - I_{k-2}`, since
/// `|x|^2` is invariant. `q = 1, 2` are accepted as degenerate inputs.
pub fn laplace_multiplicities(q: u32, p: &[i64], cutoff: usize) -> Result<SpectrumTable> {
    if q == 0 || p.is_empty() {
        return Err(Error::InvalidArgument(
            "need q >= 1 and at least one exponent".into(),
        ));
    }
    let qu = q as usize;
    let mut counts = vec![vec![0u128; qu]; cutoff + 1];
    counts[0][0] = 1;
    for &pi in p {
        for w in [pi, -pi] {
            let w = w.rem_euclid(q as i64) as usize;
            for d in 1..=cutoff {
                let (lo, hi) = counts.split_at_mut(d);
                let prev = &lo[d - 1];
                for (r, c) in hi[0].iter_mut().enumerate() {
                    *c += prev[(r + qu - w) % qu];
                }
            }
        }
    }
    let n = p.len();
    let inv: Vec<u128> = counts.iter().map(|c| c[0]).collect();
    let mut mult = Vec::with_capacity(cutoff + 1);
    for k in 0..=cutoff {
        let lower = if k >= 2 { inv[k - 2] } else { 0 };
        if inv[k] < lower || inv[k] - lower > sphere_multiplicity(n, k) {
            return Err(Error::NonIntegral {
                k,
                residual: f64::NAN,
            });
        }
        mult.push(inv[k] - lower);
    }
    if mult[0] != 1 {
        return Err(Error::NonIntegral {
            k: 0,
            residual: f64::NAN,
        });
    }
    Ok(SpectrumTable {
        q,
        p: p.to_vec(),
        cutoff,
        multiplicities: mult,
    })
}

/// Character-average cross-check:
/// `m_k = (1/q) sum_j [h_k - h_{k-2}](eigenvalues of T^j)` in floating point,
/// rounded with an integrality check.
pub fn laplace_multiplicities_float(q: u32, p: &[i64], cutoff: usize) -> Result<Vec<u128>> {
    let per_j: Vec<Vec<Complex64>> = (0..q)
        .into_par_iter()
        .map(|j| {
            let mut h = vec![Complex64::new(0.0, 0.0); cutoff + 1];
            h[0] = Complex64::new(1.0, 0.0);
            for &pi in p {
                for s in [1i64, -1] {
                    let a = (s * pi * j as i64).rem_euclid(q as i64);
                    let lam = Complex64::from_polar(1.0, 2.0 * PI * a as f64 / q as f64);
                    for d in 1..=cutoff {
                        let prev = h[d - 1];
                        h[d] += lam * prev;
                    }
                }
            }
            h
        })
        .collect();
    (0..=cutoff)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for h in &per_j {
                acc += h[k]
                    - if k >= 2 {
                        h[k - 2]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
            }
            acc /= q as f64;
            let rounded = acc.re.round();
            let residual = (acc - Complex64::new(rounded, 0.0)).norm();
            if residual > 0.25 || rounded < 0.0 {
                return Err(Error::NonIntegral { k, residual });
            }
            Ok(rounded as u128)
        })
        .collect()
}

/// Smallest `K` with `exp(-eps^2 lambda_K / 2) < 1e-16`.
pub fn required_cutoff(n: usize, epsilon: f64) -> usize {
    let bound = 2.0 * (1e16f64).ln() / (epsilon * epsilon);
    let mut k = 0usize;
    while eigenvalue(n, k) <= bound {
        k += 1;
    }
    k
}

/// `S_eps(t) = sum_k m_k exp(-eps^2 lambda_k / 2) exp(-i t sqrt(lambda_k))`.
pub fn smoothed_trace(
    table: &SpectrumTable,
    epsilon: f64,
    grid: &[f64],
) -> Result<Vec<(f64, Complex64)>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let required = required_cutoff(table.n(), epsilon);
    if table.cutoff < required {
        return Err(Error::InsufficientCutoff {
            given: table.cutoff,
            required,
            epsilon,
        });
    }
    let terms: Vec<(f64, f64)> = table
        .multiplicities
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(k, &m)| {
            let lam = table.eigenvalue(k);
            (
                m as f64 * (-epsilon * epsilon * lam / 2.0).exp(),
                lam.sqrt(),
            )
        })
        .collect();
    Ok(grid
        .par_iter()
        .map(|&t| {
            let s: Complex64 = terms
                .iter()
                .map(|&(w, f)| Complex64::from_polar(w, -t * f))
                .sum();
            (t, s)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakThresholds {
    /// Grid steps a local maximum may sit from a predicted length.
    pub window: usize,
    /// Minimum ratio `|S_eps'| / |S_eps|` at a length when `eps' < eps`.
    pub growth: f64,
    /// Controls must keep successive ratios within `[1/f, f]`.
    pub control_factor: f64,
}

impl Default for PeakThresholds {
    fn default() -> Self {
        PeakThresholds {
            window: 1,
            growth: 1.0,
            control_factor: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakEntry {
    pub tau: f64,
    pub predicted: bool,
    pub pass: bool,
    /// `|S_eps|` at the grid point nearest `tau`, per epsilon.
    pub peak_values: Vec<f64>,
    /// Whether a local maximum lies within the window, per epsilon
    /// (always true for controls).
    pub local_max: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub epsilons: Vec<f64>,
    pub grid_points: usize,
    pub thresholds: PeakThresholds,
    pub entries: Vec<PeakEntry>,
    pub pass: bool,
}

/// Uniform grid `t_i = (i + 1) 2 pi / G`, `i = 0..G`, covering `(0, 2 pi]`.
pub fn default_grid(points: usize) -> Vec<f64> {
    let h = 2.0 * PI / points as f64;
    (1..=points).map(|i| i as f64 * h).collect()
}

/// Checks every predicted length for a growing local maximum of `|S_eps|`
/// and every midpoint between consecutive lengths for boundedness.
pub fn peak_report(
    table: &SpectrumTable,
    predicted: &[f64],
    epsilons: &[f64],
    grid_points: usize,
    thresholds: PeakThresholds,
) -> Result<PeakReport> {
    if epsilons.len() < 2 {
        return Err(Error::InvalidArgument("need at least two epsilons".into()));
    }
    if grid_points < 3 {
        return Err(Error::InvalidArgument(
            "grid needs at least 3 points".into(),
        ));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let grid = default_grid(grid_points);
    let h = 2.0 * PI / grid_points as f64;
    let abs: Vec<Vec<f64>> = eps
        .iter()
        .map(|&e| {
            smoothed_trace(table, e, &grid).map(|v| v.into_iter().map(|(_, s)| s.norm()).collect())
        })
        .collect::<Result<_>>()?;
    let nearest = |t: f64| -> usize {
        ((t / h).round() as i64 - 1).clamp(0, grid_points as i64 - 1) as usize
    };
    let is_local_max = |s: &[f64], i: usize| -> bool {
        let left = i == 0 || s[i] >= s[i - 1];
        let right = i + 1 == s.len() || s[i] >= s[i + 1];
        left && right
    };

    let mut lengths: Vec<f64> = predicted.to_vec();
    lengths.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut entries = Vec::new();
    for &tau in &lengths {
        let j = nearest(tau);
        let lo = j.saturating_sub(thresholds.window);
        let hi = (j + thresholds.window).min(grid_points - 1);
        let local_max: Vec<bool> = abs
            .iter()
            .map(|s| (lo..=hi).any(|i| is_local_max(s, i)))
            .collect();
        let peak_values: Vec<f64> = abs.iter().map(|s| s[j]).collect();
        let growing = peak_values
            .windows(2)
            .all(|w| w[1] > thresholds.growth * w[0]);
        entries.push(PeakEntry {
            tau,
            predicted: true,
            pass: growing && local_max.iter().all(|&b| b),
            peak_values,
            local_max,
        });
    }
    for w in lengths.windows(2) {
        let tau = (w[0] + w[1]) / 2.0;
        let j = nearest(tau);
        let values: Vec<f64> = abs.iter().map(|s| s[j]).collect();
        let f = thresholds.control_factor;
        let bounded = values.windows(2).all(|v| {
            let r = v[1] / v[0];
            r >= 1.0 / f && r <= f
        });
        entries.push(PeakEntry {
            tau,
            predicted: false,
            pass: bounded,
            local_max: vec![true; values.len()],
            peak_values: values,
        });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(PeakReport {
        epsilons: eps,
        grid_points,
        thresholds,
        entries,
        pass,
    })
}
