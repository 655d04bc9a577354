use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CycloNumber, Rational};
use crate::{Error, Result};

/// Distance of `x` from the nearest multiple of `q`.
pub fn dist_q(x: i64, q: u32) -> u32 {
    let r = x.rem_euclid(q as i64) as u32;
    r.min(q - r)
}

/// Sign of `sin(2 pi x / q)`: +1, -1, or 0.
pub fn sin_sign(x: i64, q: u32) -> i8 {
    let r = 2 * x.rem_euclid(q as i64) as u64;
    let q = q as u64;
    if r == 0 || r == q {
        0
    } else if r < q {
        1
    } else {
        -1
    }
}

/// The symbol `cos(2 pi a / q)`, normalised so that `0 <= a <= q/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CosSymbol {
    a: u32,
    q: u32,
}

impl CosSymbol {
    pub fn new(a: i64, q: u32) -> Self {
        assert!(q >= 1, "conductor must be positive");
        CosSymbol { a: dist_q(a, q), q }
    }

    pub fn residue(&self) -> u32 {
        self.a
    }

    pub fn conductor(&self) -> u32 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        (2.0 * std::f64::consts::PI * self.a as f64 / self.q as f64).cos()
    }
}

impl fmt::Display for CosSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cos(2pi*{}/{})", self.a, self.q)
    }
}

/// Exact order of `cos(2 pi a / q)` against `cos(2 pi b / q)`.
///
/// Cosine is strictly decreasing on `[0, pi]`, so the symbol closer to a
/// multiple of `q` is the larger one.
pub fn compare_cos(a: &CosSymbol, b: &CosSymbol) -> Result<Ordering> {
    if a.q != b.q {
        return Err(Error::ConductorMismatch(a.q, b.q));
    }
    Ok(b.a.cmp(&a.a))
}

/// `(zeta^a + zeta^{-a}) / 2`.
pub fn cos_as_cyclo(c: &CosSymbol) -> CycloNumber {
    let a = c.a as i64;
    let two = CycloNumber::zeta_pow(c.q, a)
        .try_add(&CycloNumber::zeta_pow(c.q, -a))
        .expect("same conductor");
    two.scale(&Rational::new(1.into(), 2.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cos_values() {
        assert!(cos_as_cyclo(&CosSymbol::new(0, 7)).is_one());
        assert_eq!(
            cos_as_cyclo(&CosSymbol::new(4, 8)),
            CycloNumber::from_integer(8, -1)
        );
        let c = cos_as_cyclo(&CosSymbol::new(1, 5)).embed();
        assert!((c.re - 0.309_016_994_374_947_4).abs() < 1e-12);
        assert!(c.im.abs() < 1e-12);
        for q in 3..=30u32 {
            for a in 0..q as i64 {
                let s = CosSymbol::new(a, q);
                assert!((cos_as_cyclo(&s).embed().re - s.to_f64()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compare_examples() {
        let c = |a, q| CosSymbol::new(a, q);
        assert_eq!(compare_cos(&c(1, 5), &c(2, 5)).unwrap(), Ordering::Greater);
        assert_eq!(compare_cos(&c(3, 5), &c(8, 5)).unwrap(), Ordering::Equal);
        assert_eq!(compare_cos(&c(3, 7), &c(4, 7)).unwrap(), Ordering::Equal);
        assert!(compare_cos(&c(1, 5), &c(1, 7)).is_err());
    }

    #[test]
    fn sin_signs() {
        assert_eq!(sin_sign(1, 5), 1);
        assert_eq!(sin_sign(3, 5), -1);
        assert_eq!(sin_sign(2, 4), 0);
        assert_eq!(sin_sign(-1, 6), -1);
        assert_eq!(sin_sign(10, 5), 0);
    }

    proptest! {
        #[test]
        fn compare_matches_floats(q in 2u32..60, a in -200i64..200, b in -200i64..200) {
            let (x, y) = (CosSymbol::new(a, q), CosSymbol::new(b, q));
            let (fx, fy) = (x.to_f64(), y.to_f64());
            prop_assume!((fx - fy).abs() > 1e-9);
            let expect = if fx > fy { Ordering::Greater } else { Ordering::Less };
            prop_assert_eq!(compare_cos(&x, &y).unwrap(), expect);
        }
    }
}
