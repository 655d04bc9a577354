//! Fixed-point arithmetic with about 210 decimal digits, used to evaluate
//! stripped leading sums independently of the cyclotomic field.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactnum::CosSymbol;
use crate::wavetrace::WaveTermSum;

/// Fractional bits; `2^-700 ~ 1e-210`.
pub const FRAC_BITS: u64 = 700;

fn one() -> BigInt {
    BigInt::one() << FRAC_BITS
}

fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> FRAC_BITS
}

fn div(a: &BigInt, b: &BigInt) -> BigInt {
    (a << FRAC_BITS) / b
}

/// `atan(1/n)` by its alternating series.
fn atan_inv(n: u64) -> BigInt {
    let n = BigInt::from(n);
    let n2 = &n * &n;
    let mut power = one() / &n;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &n2;
        k += 1;
    }
    sum
}

/// `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi() -> &'static BigInt {
    static PI: OnceLock<BigInt> = OnceLock::new();
    PI.get_or_init(|| atan_inv(5) * 16 - atan_inv(239) * 4)
}

/// `cos(2 pi a / q)` with the residue reduced into `[0, q/2]`.
pub fn cos_symbol(c: &CosSymbol) -> BigInt {
    let x = (pi() * BigInt::from(2 * c.residue() as u64)) / BigInt::from(c.conductor());
    let x2 = mul(&x, &x);
    let mut term = one();
    let mut sum = one();
    let mut k = 1u64;
    loop {
        term = -mul(&term, &x2) / BigInt::from((2 * k - 1) * (2 * k));
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    sum
}

/// `sum_j eps_j prod_i 1 / (2|cos a - cos b|)`, the leading sum with its
/// common positive factor removed.
pub fn stripped_sum(sum: &WaveTermSum) -> BigInt {
    let two = BigInt::from(2);
    let mut total = BigInt::zero();
    for t in &sum.terms {
        let mut value = one();
        for f in &t.factors {
            let gap = ((cos_symbol(&f.kp) - cos_symbol(&f.tau)) * &two).abs();
            value = div(&value, &gap);
        }
        if t.sign < 0 {
            total -= value;
        } else {
            total += value;
        }
    }
    total
}

pub fn to_f64(x: &BigInt) -> f64 {
    let shift = FRAC_BITS - 60;
    (x >> shift).to_f64().unwrap_or(f64::NAN) / 2f64.powi(60)
}

/// `|x| < 10^-50`.
pub fn is_negligible(x: &BigInt) -> bool {
    let threshold = one() / BigInt::from(10u32).pow(50);
    x.abs() < threshold
}
