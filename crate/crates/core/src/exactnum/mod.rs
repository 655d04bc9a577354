//! Exact arithmetic used by every decision path in the crate.
//!
//! Rationals are `num_rational::BigRational`. Elements of the cyclotomic field
//! Q(zeta_q) are kept in the power basis modulo the q-th cyclotomic polynomial,
//! reduced eagerly, so equality and zero tests are coefficient scans.

mod cos;
mod cyclo;

pub use cos::{compare_cos, cos_as_cyclo, dist_q, sin_sign, CosSymbol};
pub use cyclo::{cyclotomic_polynomial, euler_phi, CycloNumber};

/// Arbitrary-precision reduced fraction with positive denominator.
pub type Rational = num_rational::BigRational;

/// Parses `"p/q"` or `"p"` into a [`Rational`].
pub fn parse_rational(s: &str) -> crate::Result<Rational> {
    let s = s.trim();
    s.parse::<Rational>()
        .map_err(|e| crate::Error::Parse(format!("bad rational {s:?}: {e}")))
}

/// `"p/q"` form, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &num_bigint::BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Inverse of `a` modulo `q`, if it exists.
pub fn mod_inverse(a: i64, q: i64) -> Option<i64> {
    let (g, x, _) = ext_gcd(a.rem_euclid(q), q);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(q))
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings() {
        let r = parse_rational("-6/4").unwrap();
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7");
        assert!(parse_rational("1/x").is_err());
    }

    #[test]
    fn inverses_mod_q() {
        assert_eq!(mod_inverse(2, 5), Some(3));
        assert_eq!(mod_inverse(-1, 7), Some(6));
        assert_eq!(mod_inverse(2, 4), None);
    }

    #[test]
    fn primes() {
        let ps: Vec<u32> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
