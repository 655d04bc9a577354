use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;
use crate::{Error, Result};

/// Per-conductor data: the cyclotomic polynomial and reduced powers of zeta.
#[derive(Debug)]
struct Field {
    q: u32,
    /// Monic, ascending coefficients, length `phi + 1`.
    phi_poly: Vec<BigInt>,
    /// `zeta^a mod Phi_q` for `a in 0..q`, each of length `phi`.
    powers: Vec<Vec<BigInt>>,
}

impl Field {
    fn degree(&self) -> usize {
        self.phi_poly.len() - 1
    }

    /// Reduces an integer polynomial of any length modulo `Phi_q`.
    fn reduce(&self, mut poly: Vec<BigInt>) -> Vec<BigInt> {
        let d = self.degree();
        if poly.len() > d {
            for top in (d..poly.len()).rev() {
                if poly[top].is_zero() {
                    continue;
                }
                let c = std::mem::take(&mut poly[top]);
                let base = top - d;
                for (j, pj) in self.phi_poly[..d].iter().enumerate() {
                    if !pj.is_zero() {
                        poly[base + j] -= &c * pj;
                    }
                }
            }
            poly.truncate(d);
        }
        poly.resize(d, BigInt::zero());
        poly
    }
}

fn field(q: u32) -> Arc<Field> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().unwrap().get(&q) {
        return f.clone();
    }
    let phi_poly = cyclotomic_polynomial(q);
    let mut f = Field {
        q,
        phi_poly,
        powers: Vec::new(),
    };
    let d = f.degree();
    let mut powers = Vec::with_capacity(q as usize);
    for a in 0..q as usize {
        let mut mono = vec![BigInt::zero(); a.max(d) + 1];
        mono[a] = BigInt::one();
        powers.push(f.reduce(mono));
    }
    f.powers = powers;
    let f = Arc::new(f);
    cache.lock().unwrap().insert(q, f.clone());
    f
}

/// Ascending integer coefficients of the q-th cyclotomic polynomial, obtained
/// by dividing `x^q - 1` by `Phi_d` for every proper divisor `d` of `q`.
pub fn cyclotomic_polynomial(q: u32) -> Vec<BigInt> {
    assert!(q >= 1, "conductor must be positive");
    let mut poly = vec![BigInt::zero(); q as usize + 1];
    poly[0] = BigInt::from(-1);
    poly[q as usize] = BigInt::one();
    for d in 1..q {
        if q % d == 0 {
            poly = divide_monic(&poly, &cyclotomic_polynomial(d));
        }
    }
    poly
}

fn divide_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    quot
}

pub fn euler_phi(q: u32) -> usize {
    (1..=q)
        .filter(|&k| super::gcd_u64(k as u64, q as u64) == 1)
        .count()
}

/// An element of Q(zeta_q) in canonical form.
///
/// Stored as an integer coefficient vector over a common positive denominator
/// with no common factor, which makes the representation unique.
#[derive(Clone)]
pub struct CycloNumber {
    field: Arc<Field>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycloNumber {
    fn from_parts(field: Arc<Field>, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut x = CycloNumber { field, num, den };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -std::mem::take(&mut self.den);
            for c in &mut self.num {
                *c = -std::mem::take(c);
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if self.num.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
            return;
        }
        if !g.is_one() {
            self.den /= &g;
            for c in &mut self.num {
                *c /= &g;
            }
        }
    }

    pub fn zero(q: u32) -> Self {
        let f = field(q);
        let d = f.degree();
        CycloNumber {
            field: f,
            num: vec![BigInt::zero(); d],
            den: BigInt::one(),
        }
    }

    pub fn one(q: u32) -> Self {
        Self::from_integer(q, 1)
    }

    pub fn from_integer(q: u32, n: i64) -> Self {
        Self::from_rational(q, &Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: u32, r: &Rational) -> Self {
        let f = field(q);
        let mut num = vec![BigInt::zero(); f.degree()];
        num[0] = r.numer().clone();
        Self::from_parts(f, num, r.denom().clone())
    }

    /// `zeta_q^a` for any integer exponent.
    pub fn zeta_pow(q: u32, a: i64) -> Self {
        let f = field(q);
        let idx = a.rem_euclid(q as i64) as usize;
        let num = f.powers[idx].clone();
        CycloNumber {
            field: f,
            num,
            den: BigInt::one(),
        }
    }

    /// `sum_i coeffs[i] * zeta_q^i`, reduced.
    pub fn from_coeffs(q: u32, coeffs: &[Rational]) -> Self {
        let f = field(q);
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let mut acc = vec![BigInt::zero(); f.degree()];
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scaled = c.numer() * (&den / c.denom());
            for (a, p) in acc.iter_mut().zip(&f.powers[i % q as usize]) {
                if !p.is_zero() {
                    *a += &scaled * p;
                }
            }
        }
        Self::from_parts(f, acc, den)
    }

    pub fn conductor(&self) -> u32 {
        self.field.q
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// Power-basis coefficients, `length == euler_phi(q)`.
    pub fn coeffs(&self) -> Vec<Rational> {
        self.num
            .iter()
            .map(|c| Rational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field.q != other.field.q {
            return Err(Error::ConductorMismatch(self.field.q, other.field.q));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let l = self.den.lcm(&other.den);
        let sa = &l / &self.den;
        let sb = &l / &other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * &sa + b * &sb)
            .collect();
        Ok(Self::from_parts(self.field.clone(), num, l))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CycloNumber {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.field.q));
        }
        let d = self.degree();
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let num = self.field.reduce(prod);
        Ok(Self::from_parts(
            self.field.clone(),
            num,
            &self.den * &other.den,
        ))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let num = self.num.iter().map(|c| c * r.numer()).collect();
        Self::from_parts(self.field.clone(), num, &self.den * r.denom())
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x]
    /// against the cyclotomic polynomial.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero(self.field.q));
        }
        let a: Vec<Rational> = self.coeffs();
        let m: Vec<Rational> = self
            .field
            .phi_poly
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        // Invariant: s * a == r (mod m)
        let (mut r0, mut r1) = (trim(m), trim(a));
        let (mut s0, mut s1) = (Vec::<Rational>::new(), vec![Rational::one()]);
        while !(r1.len() == 1) {
            let (quo, rem) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&quo, &s1));
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
            if r1.is_empty() {
                // gcd is non-constant: impossible for a nonzero element of a field
                return Err(Error::DivisionByZero(self.field.q));
            }
        }
        let c = r1[0].clone();
        let inv: Vec<Rational> = s1.iter().map(|x| x / &c).collect();
        Ok(Self::from_coeffs(self.field.q, &inv))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.try_mul(&other.inverse()?)
    }

    /// Complex value under `zeta_q -> exp(2 pi i / q)`.
    pub fn embed(&self) -> Complex64 {
        let q = self.field.q as f64;
        let den = to_f64(&self.den);
        self.num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let ang = 2.0 * std::f64::consts::PI * i as f64 / q;
                Complex64::from_polar(to_f64(c) / den, ang)
            })
            .sum()
    }
}

fn to_f64(x: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    trim(out)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    if rem.len() < b.len() {
        return (Vec::new(), trim(rem));
    }
    let lead = b[db].clone();
    let mut quo = vec![Rational::zero(); rem.len() - db];
    for i in (0..quo.len()).rev() {
        let c = &rem[i + db] / &lead;
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[i + j] -= &c * bj;
        }
        quo[i] = c;
    }
    (trim(quo), trim(rem))
}

impl PartialEq for CycloNumber {
    fn eq(&self, other: &Self) -> bool {
        self.field.q == other.field.q && self.den == other.den && self.num == other.num
    }
}

impl Eq for CycloNumber {}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloNumber(q={}, {})", self.field.q, self)
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => super::format_rational(c),
                1 => format!("{}*z", super::format_rational(c)),
                _ => format!("{}*z^{}", super::format_rational(c), i),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(q: u32, a: i64) -> CycloNumber {
        CycloNumber::zeta_pow(q, a)
    }

    fn sum(xs: &[CycloNumber]) -> CycloNumber {
        xs.iter()
            .skip(1)
            .fold(xs[0].clone(), |acc, x| acc.try_add(x).unwrap())
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        let as_i64 = |q| -> Vec<i64> {
            cyclotomic_polynomial(q)
                .iter()
                .map(|c| num_traits::ToPrimitive::to_i64(c).unwrap())
                .collect()
        };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(2), vec![1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(6), vec![1, -1, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        for q in 1..=60 {
            assert_eq!(cyclotomic_polynomial(q).len() - 1, euler_phi(q), "q={q}");
        }
    }

    #[test]
    fn phi5_relation() {
        let s = sum(&[z(5, 1), z(5, 2), z(5, 3), z(5, 4)]);
        assert_eq!(s, CycloNumber::from_integer(5, -1));
        let full = s.try_add(&CycloNumber::one(5)).unwrap();
        assert!(full.is_zero());
    }

    #[test]
    fn zeta_times_its_conjugate_is_one() {
        for q in 3..=30 {
            assert!(z(q, 1).try_mul(&z(q, q as i64 - 1)).unwrap().is_one());
        }
    }

    #[test]
    fn square_of_imaginary_element() {
        let x = z(5, 1).try_sub(&z(5, 4)).unwrap();
        let sq = x.try_mul(&x).unwrap();
        let s = (2.0 * std::f64::consts::PI / 5.0).sin();
        let expected = -4.0 * s * s;
        assert!((sq.embed().re - expected).abs() < 1e-12);
        assert!(sq.embed().im.abs() < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        assert!(CycloNumber::one(7).inverse().unwrap().is_one());
        assert_eq!(z(9, 1).inverse().unwrap(), z(9, 8));
        let x = CycloNumber::from_integer(5, 2)
            .try_sub(&z(5, 1))
            .unwrap()
            .try_sub(&z(5, 4))
            .unwrap();
        let r = x.inverse().unwrap();
        assert!(x.try_mul(&r).unwrap().is_one());
        assert!(matches!(
            CycloNumber::zero(5).inverse(),
            Err(Error::DivisionByZero(5))
        ));
    }

    #[test]
    fn zero_tests() {
        assert!(!z(5, 1).try_sub(&z(5, 2)).unwrap().is_zero());
        // zeta^{pl} - zeta^{pk} + zeta^k - zeta^l + conjugates, q=7, p=3, l=1, k=5
        let (q, p, l, k) = (7u32, 3i64, 1i64, 5i64);
        let parts = [
            z(q, p * l),
            z(q, p * k).neg(),
            z(q, k),
            z(q, l).neg(),
            z(q, -p * l),
            z(q, -p * k).neg(),
            z(q, -k),
            z(q, -l).neg(),
        ];
        let a = sum(&parts);
        assert!(!a.is_zero());
        assert!(a.embed().norm() > 0.1);
    }

    #[test]
    fn conductor_mismatch_is_an_error() {
        assert_eq!(
            z(5, 1).try_add(&z(7, 1)),
            Err(Error::ConductorMismatch(5, 7))
        );
        assert!(z(5, 1).try_mul(&z(6, 1)).is_err());
    }

    #[test]
    fn coeff_length_matches_degree() {
        for q in [3u32, 4, 8, 12, 15, 30] {
            assert_eq!(z(q, 2).coeffs().len(), euler_phi(q));
        }
    }

    fn arb_element() -> impl Strategy<Value = CycloNumber> {
        (3u32..=30).prop_flat_map(|q| {
            proptest::collection::vec((-5i64..=5, 1i64..=4), q as usize).prop_map(move |cs| {
                let coeffs: Vec<Rational> = cs
                    .iter()
                    .map(|&(n, d)| Rational::new(n.into(), d.into()))
                    .collect();
                CycloNumber::from_coeffs(q, &coeffs)
            })
        })
    }

    fn arb_triple() -> impl Strategy<Value = (CycloNumber, CycloNumber, CycloNumber)> {
        (3u32..=30).prop_flat_map(|q| {
            let one = move || {
                proptest::collection::vec(-4i64..=4, q as usize).prop_map(move |cs| {
                    let coeffs: Vec<Rational> = cs
                        .iter()
                        .map(|&n| Rational::from_integer(n.into()))
                        .collect();
                    CycloNumber::from_coeffs(q, &coeffs)
                })
            };
            (one(), one(), one())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn ring_axioms((x, y, w) in arb_triple()) {
            prop_assert_eq!(x.try_add(&y).unwrap(), y.try_add(&x).unwrap());
            prop_assert_eq!(x.try_mul(&y).unwrap(), y.try_mul(&x).unwrap());
            prop_assert_eq!(
                x.try_mul(&y).unwrap().try_mul(&w).unwrap(),
                x.try_mul(&y.try_mul(&w).unwrap()).unwrap()
            );
            prop_assert_eq!(
                x.try_mul(&y.try_add(&w).unwrap()).unwrap(),
                x.try_mul(&y).unwrap().try_add(&x.try_mul(&w).unwrap()).unwrap()
            );
        }

        #[test]
        fn field_inverse(x in arb_element()) {
            prop_assume!(!x.is_zero());
            prop_assert!(x.try_mul(&x.inverse().unwrap()).unwrap().is_one());
        }

        #[test]
        fn embedding_is_multiplicative((x, y, _w) in arb_triple()) {
            let lhs = x.try_mul(&y).unwrap().embed();
            let rhs = x.embed() * y.embed();
            let scale = 1.0 + rhs.norm();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * scale);
        }

        #[test]
        fn self_difference_vanishes(x in arb_element()) {
            prop_assert!(x.try_sub(&x).unwrap().is_zero());
        }
    }
}
