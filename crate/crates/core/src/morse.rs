//! Morse indices of closed geodesics on lens spaces.
//!
//! `total = ind_omega + mu_tau - kernel_term + concavity`, where `ind_omega`
//! counts conjugate points of the sphere (at multiples of `pi`, each with
//! multiplicity `2n - 2`) strictly before `tau`.

use serde::{Deserialize, Serialize};

use crate::exactnum::{dist_q, sin_sign};
use crate::lens::{GeodesicComponent, LensSpace};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseBreakdown {
    pub ind_omega: u32,
    /// `(2n - 2)(floor(tau/pi) - 1)`: the alternative reading of the
    /// fixed-endpoint index, kept for comparison only.
    pub ind_omega_alt: i64,
    pub mu_tau: u32,
    pub kernel_term: u32,
    pub concavity: u32,
    pub total: u32,
}

impl MorseBreakdown {
    /// `i^{-total}`, which is real because `total` is even.
    pub fn phase_sign(&self) -> i8 {
        debug_assert!(self.total % 2 == 0);
        if (self.total / 2) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Total if `ind_omega_alt` were used instead.
    pub fn total_alt(&self) -> i64 {
        self.ind_omega_alt + self.mu_tau as i64 - self.kernel_term as i64 + self.concavity as i64
    }
}

/// Index at `tau = multiple * P` where every unit vector is fixed.
pub fn index_full(lens: &LensSpace, multiple: u32) -> Result<MorseBreakdown> {
    if multiple == 0 {
        return Err(Error::InvalidArgument("multiple must be at least 1".into()));
    }
    let d = 2 * lens.n() as u32 - 2;
    let conj = if lens.q() % 2 == 0 {
        multiple - 1
    } else {
        2 * multiple - 1
    };
    Ok(MorseBreakdown {
        ind_omega: d * conj,
        ind_omega_alt: (d * conj) as i64,
        mu_tau: d,
        kernel_term: d,
        concavity: 0,
        total: d * conj,
    })
}

/// `2 #{i : cos(2 pi k p_i / q) / sin tau > cos tau / sin tau}`, decided by
/// residue distances.
pub fn concavity_index(lens: &LensSpace, c: &GeodesicComponent) -> Result<u32> {
    let q = lens.q();
    let n_idx = c.tau.index as i64;
    let s = sin_sign(n_idx, q);
    if s == 0 {
        return Err(Error::FullLength);
    }
    let k = c.effective_k(lens) as i64;
    let d_tau = dist_q(n_idx, q);
    let count = lens
        .p()
        .iter()
        .filter(|&&pi| {
            let d = dist_q(k * pi as i64, q);
            if s > 0 {
                d < d_tau
            } else {
                d > d_tau
            }
        })
        .count();
    Ok(2 * count as u32)
}

pub fn index_short(lens: &LensSpace, c: &GeodesicComponent) -> Result<MorseBreakdown> {
    let concavity = concavity_index(lens, c)?;
    let d = 2 * lens.n() as i64 - 2;
    let floor_tau_over_pi = (2 * c.tau.index / lens.q() as u64) as i64;
    let ind_omega = (d * floor_tau_over_pi) as u32;
    Ok(MorseBreakdown {
        ind_omega,
        ind_omega_alt: d * (floor_tau_over_pi - 1),
        mu_tau: 0,
        kernel_term: 0,
        concavity,
        total: ind_omega + concavity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lens::{components, length_spectrum, LensSpace};

    fn lens(q: u32, p: &[i64]) -> LensSpace {
        LensSpace::new(q, p).unwrap()
    }

    #[test]
    fn full_lengths() {
        let odd = lens(5, &[1, 2]);
        let even = lens(4, &[1, 1]);
        assert_eq!(index_full(&odd, 1).unwrap().total, 2);
        assert_eq!(index_full(&even, 1).unwrap().total, 0);
        assert_eq!(index_full(&lens(7, &[1, 2, 3]), 2).unwrap().total, 12);
        let b = index_full(&odd, 3).unwrap();
        assert_eq!((b.mu_tau, b.kernel_term, b.concavity), (2, 2, 0));
        assert!(index_full(&odd, 0).is_err());
    }

    #[test]
    fn l52_concavity() {
        let ls = lens(5, &[1, 2]);
        for c in components(&ls, 2, 0).unwrap() {
            assert_eq!(concavity_index(&ls, &c).unwrap(), 2);
            let b = index_short(&ls, &c).unwrap();
            assert_eq!(b.total, 2);
            assert_eq!(b.phase_sign(), -1);
        }
        let totals: Vec<Vec<u32>> = (1..=4)
            .map(|l| {
                components(&ls, l, 0)
                    .unwrap()
                    .iter()
                    .map(|c| index_short(&ls, c).unwrap().total)
                    .collect()
            })
            .collect();
        assert_eq!(totals, vec![vec![0; 4], vec![2; 4], vec![2; 4], vec![4; 4]]);
    }

    #[test]
    fn iterate_example() {
        let ls = lens(5, &[1, 2]);
        for c in components(&ls, 1, 1).unwrap() {
            let b = index_short(&ls, &c).unwrap();
            assert_eq!((b.ind_omega, b.concavity, b.total), (4, 0, 4));
            assert_eq!(b.ind_omega_alt, 2);
        }
    }

    #[test]
    fn systole_has_index_zero() {
        for q in 3..=30u32 {
            for p2 in 1..q {
                let Ok(ls) = LensSpace::new(q, &[1, p2 as i64, 1]) else {
                    continue;
                };
                for c in components(&ls, 1, 0).unwrap() {
                    assert_eq!(index_short(&ls, &c).unwrap().total, 0, "{ls}");
                }
            }
        }
    }

    #[test]
    fn parity_orientation_and_growth_exhaustive() {
        for q in 3..=30u32 {
            let units: Vec<i64> = (1..q as i64)
                .filter(|&a| num_integer::gcd(a, q as i64) == 1)
                .collect();
            let mut lenses = Vec::new();
            for &a in &units {
                lenses.push(vec![1, a]);
                for &b in units.iter().filter(|&&b| b >= a) {
                    lenses.push(vec![1, a, b]);
                }
            }
            for p in lenses {
                let ls = lens(q, &p);
                for entry in length_spectrum(&ls, 3.0 * ls.period()) {
                    for pair in entry.components.chunks(2) {
                        let a = index_short(&ls, &pair[0]).unwrap();
                        let b = index_short(&ls, &pair[1]).unwrap();
                        assert_eq!(a.total % 2, 0);
                        assert_eq!(a.concavity % 2, 0);
                        assert_eq!(a, b, "{ls} {}", entry.tau);
                        let next = components(&ls, pair[0].l, pair[0].winding + 1).unwrap();
                        let c = next
                            .iter()
                            .find(|c| c.class_index == pair[0].class_index)
                            .unwrap();
                        assert!(index_short(&ls, c).unwrap().total >= a.total);
                    }
                }
            }
        }
    }

    #[test]
    fn homogeneous_components_share_index() {
        for q in 3..=20 {
            let h = LensSpace::homogeneous(q, 3).unwrap();
            for entry in length_spectrum(&h, 2.0 * h.period()) {
                let t: Vec<u32> = entry
                    .components
                    .iter()
                    .map(|c| index_short(&h, c).unwrap().total)
                    .collect();
                assert!(t.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }
}
