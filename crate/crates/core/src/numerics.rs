//! Multiprecision complex helpers on top of `rug`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};

/// Working precision in bits for the requested number of decimal digits.
pub fn prec_bits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 32
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// exp(2πi k / n).
pub fn root_of_unity(n: u64, k: i64, prec: u32) -> Complex {
    let k = k.rem_euclid(n as i64);
    let angle = pi(prec) * 2u32 * Float::with_val(prec, k) / Float::with_val(prec, n);
    let (s, c) = angle.sin_cos(Float::new(prec));
    Complex::with_val(prec, (c, s))
}

pub fn two_pi_i(prec: u32) -> Complex {
    Complex::with_val(prec, (0, pi(prec) * 2u32))
}

pub fn bigint_to_integer(v: &BigInt) -> Integer {
    match v.to_i64() {
        Some(s) => Integer::from(s),
        None => Integer::from_str_radix(&v.to_str_radix(32), 32).expect("valid digits"),
    }
}

pub fn bigint_to_float(v: &BigInt, prec: u32) -> Float {
    Float::with_val(prec, bigint_to_integer(v))
}

pub fn rational_to_float(q: &BigRational, prec: u32) -> Float {
    bigint_to_float(q.numer(), prec) / bigint_to_float(q.denom(), prec)
}

/// Relative difference |a - b| / max(|a|, |b|), zero when both vanish.
pub fn rel_err(a: &Complex, b: &Complex) -> f64 {
    let prec = a.prec().0.max(b.prec().0);
    let diff = Float::with_val(prec, Complex::with_val(prec, a - b).abs_ref());
    let na = Float::with_val(prec, a.abs_ref());
    let nb = Float::with_val(prec, b.abs_ref());
    let scale = if na > nb { na } else { nb };
    if scale.is_zero() {
        return diff.to_f64();
    }
    (diff / scale).to_f64()
}

pub fn abs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn cpow_i(z: &Complex, e: i64) -> Complex {
    let prec = z.prec().0;
    if e >= 0 {
        Complex::with_val(prec, z.pow(e as u32))
    } else {
        let inv = Complex::with_val(prec, 1) / z;
        Complex::with_val(prec, inv.pow((-e) as u32))
    }
}

/// Complex number to a `[re, im]` pair of decimal strings for reports.
pub fn to_strings(z: &Complex, digits: usize) -> [String; 2] {
    [
        z.real().to_string_radix(10, Some(digits)),
        z.imag().to_string_radix(10, Some(digits)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        let prec = prec_bits(40);
        let z = root_of_unity(6, 1, prec);
        let z6 = cpow_i(&z, 6);
        assert!(rel_err(&z6, &Complex::with_val(prec, 1)) < 1e-40);
        let zi = cpow_i(&z, -1);
        assert!(rel_err(&zi, &root_of_unity(6, 5, prec)) < 1e-40);
    }
}
