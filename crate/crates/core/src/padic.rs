//! Finite-precision p-adic coefficient rings Z/p^M[ζ_{p^n}].
//!
//! Elements are coordinate vectors in the power basis 1, ζ, …, ζ^{φ(p^n)-1}
//! with entries reduced mod p^M.  Roots of unity of order prime to p come
//! from Teichmüller lifts, so every root of unity of order dividing
//! (p-1)p^n is available.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{is_prime, primitive_root};
use crate::cyclo::Cyclo;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PRing {
    pub p: u64,
    /// Precision exponent M: arithmetic is modulo p^M.
    pub prec: u32,
    /// Cyclotomic level n: the ring contains ζ_{p^n}.
    pub level: u32,
    pub modulus: u64,
    dim: usize,
    order: usize,
    /// p^{n-1}, the stride of the cyclotomic relation.
    stride: usize,
    /// Teichmüller lift of the least primitive root mod p.
    teich: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PElem(pub Vec<u64>);

/// Largest M with p^M < 2^63, capped at 20.
pub fn default_precision(p: u64) -> u32 {
    let mut m = 0u32;
    let mut acc: u128 = 1;
    while m < 20 && acc * (p as u128) < (1u128 << 63) {
        acc *= p as u128;
        m += 1;
    }
    m
}

/// Sum of two residues mod m.
fn addm(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

fn subm(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 {
        return a * b % m;
    }
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

impl PRing {
    pub fn new(p: u64, prec: u32, level: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Unsupported(format!("{p} is not prime")));
        }
        if prec == 0 {
            return Err(Error::PrecisionExhausted("precision exponent must be positive".into()));
        }
        let mut modulus: u128 = 1;
        for _ in 0..prec {
            modulus *= p as u128;
            if modulus >= 1u128 << 63 {
                return Err(Error::PrecisionTooLarge(format!("{p}^{prec}")));
            }
        }
        let order = (p as usize).pow(level);
        let (dim, stride) = if level == 0 { (1, 1) } else { (order / p as usize * (p as usize - 1), order / p as usize) };
        if order > 1 << 16 {
            return Err(Error::PrecisionTooLarge(format!("cyclotomic level {p}^{level}")));
        }
        let modulus = modulus as u64;
        let g = if p == 2 { 1 } else { primitive_root(p) };
        let mut teich = g % modulus;
        for _ in 0..prec {
            teich = powmod(teich, p, modulus);
        }
        Ok(PRing { p, prec, level, modulus, dim, order, stride, teich })
    }

    /// Same prime and precision, different cyclotomic level.
    pub fn with_level(&self, level: u32) -> Result<Self> {
        PRing::new(self.p, self.prec, level)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// p^n, the order of ζ.
    pub fn zeta_order(&self) -> usize {
        self.order
    }

    pub fn zero(&self) -> PElem {
        PElem(vec![0; self.dim])
    }

    pub fn one(&self) -> PElem {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> PElem {
        let mut e = self.zero();
        e.0[0] = (v as i128).rem_euclid(self.modulus as i128) as u64;
        e
    }

    pub fn from_bigint(&self, v: &BigInt) -> PElem {
        let m = BigInt::from(self.modulus);
        let r = v.mod_floor(&m);
        self.from_int(r.to_i64().expect("reduced below 2^63"))
    }

    /// Rational number a/b with b a p-adic unit.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<PElem> {
        let d = den.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap_or(0);
        let inv = self.inv_scalar(d).ok_or_else(|| Error::CoefficientNotIntegral(0))?;
        Ok(self.scale(&self.from_bigint(num), inv))
    }

    pub fn inv_scalar(&self, a: u64) -> Option<u64> {
        let (g, x, _) = crate::arith::egcd(a as i128, self.modulus as i128);
        if g != 1 {
            return None;
        }
        Some(x.rem_euclid(self.modulus as i128) as u64)
    }

    pub fn is_zero(&self, a: &PElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &PElem, b: &PElem) -> PElem {
        let m = self.modulus;
        PElem(a.0.iter().zip(&b.0).map(|(&x, &y)| addm(x, y, m)).collect())
    }

    pub fn sub(&self, a: &PElem, b: &PElem) -> PElem {
        let m = self.modulus;
        PElem(a.0.iter().zip(&b.0).map(|(&x, &y)| subm(x, y, m)).collect())
    }

    pub fn neg(&self, a: &PElem) -> PElem {
        let m = self.modulus;
        PElem(a.0.iter().map(|&x| subm(0, x, m)).collect())
    }

    pub fn add_assign(&self, a: &mut PElem, b: &PElem) {
        let m = self.modulus;
        for (x, &y) in a.0.iter_mut().zip(&b.0) {
            *x = addm(*x, y, m);
        }
    }

    pub fn scale(&self, a: &PElem, s: u64) -> PElem {
        let m = self.modulus;
        let s = s % m;
        PElem(a.0.iter().map(|&x| mulmod(x, s, m)).collect())
    }

    pub fn scale_int(&self, a: &PElem, s: i64) -> PElem {
        self.scale(a, (s as i128).rem_euclid(self.modulus as i128) as u64)
    }

    /// Reduce a vector of length < 2·order (exponents of ζ) to the power basis.
    fn reduce_wide(&self, mut w: Vec<u128>) -> PElem {
        let m = self.modulus as u128;
        if self.level == 0 {
            let s = w.iter().fold(0u128, |acc, &x| (acc + x % m) % m);
            return PElem(vec![s as u64]);
        }
        for x in w.iter_mut() {
            *x %= m;
        }
        // ζ^order = 1 first.
        let order = self.order;
        for e in (order..w.len()).rev() {
            let c = w[e] % m;
            w[e] = 0;
            w[e - order] = (w[e - order] + c) % m;
        }
        w.resize(order, 0);
        // ζ^{dim + r} = -Σ_{i<p-1} ζ^{r + i·stride}.
        for e in (self.dim..order).rev() {
            let c = w[e] % m;
            if c == 0 {
                continue;
            }
            w[e] = 0;
            let r = e - self.dim;
            for i in 0..(self.p as usize - 1) {
                let t = r + i * self.stride;
                w[t] = (w[t] % m + m - c) % m;
            }
        }
        PElem(w[..self.dim].iter().map(|&x| (x % m) as u64).collect())
    }

    pub fn mul(&self, a: &PElem, b: &PElem) -> PElem {
        let m = self.modulus;
        if self.level == 0 {
            return PElem(vec![mulmod(a.0[0], b.0[0], m)]);
        }
        let mut w = vec![0u128; 2 * self.dim - 1];
        // Unreduced products cannot overflow when dim·m² fits in a u128.
        let lazy = (m as u128).checked_mul(m as u128).map_or(false, |sq| sq <= u128::MAX / self.dim as u128);
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                if lazy {
                    w[i + j] += x as u128 * y as u128;
                } else if y != 0 {
                    w[i + j] += mulmod(x, y, m) as u128;
                }
            }
        }
        self.reduce_wide(w)
    }

    pub fn pow(&self, a: &PElem, mut e: u64) -> PElem {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    /// ζ^k.
    pub fn zeta_pow(&self, k: i64) -> PElem {
        self.mul_zeta_pow(&self.one(), k)
    }

    /// a·ζ^k, computed as a coordinate shift.
    pub fn mul_zeta_pow(&self, a: &PElem, k: i64) -> PElem {
        let mut out = self.zero();
        self.add_mul_zeta_pow(&mut out, a, k);
        out
    }

    /// out += a·ζ^k without allocating.
    pub fn add_mul_zeta_pow(&self, out: &mut PElem, a: &PElem, k: i64) {
        let m = self.modulus;
        if self.level == 0 {
            self.add_assign(out, a);
            return;
        }
        let order = self.order;
        let k = k.rem_euclid(order as i64) as usize;
        let out = &mut out.0;
        for (i, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = (i + k) % order;
            if e < self.dim {
                out[e] = addm(out[e], c, m);
            } else {
                let r = e - self.dim;
                for j in 0..(self.p as usize - 1) {
                    let t = r + j * self.stride;
                    out[t] = subm(out[t], c, m);
                }
            }
        }
    }

    /// a ← b - a.
    pub fn rsub_assign(&self, a: &mut PElem, b: &PElem) {
        let m = self.modulus;
        for (x, &y) in a.0.iter_mut().zip(&b.0) {
            *x = subm(y, *x, m);
        }
    }

    /// Galois action ζ ↦ ζ^u for u prime to p.
    pub fn galois(&self, a: &PElem, u: i64) -> PElem {
        let mut acc = self.zero();
        for (i, &c) in a.0.iter().enumerate() {
            if c != 0 {
                let z = self.scale(&self.zeta_pow(u * i as i64), c);
                self.add_assign(&mut acc, &z);
            }
        }
        acc
    }

    /// A root of unity of order `n`, which must divide (p-1)·p^level.
    /// The choice is coherent: root(n)^(n/d) = root(d).
    pub fn root_of_unity(&self, n: u64) -> Result<PElem> {
        let full = (self.p - 1) * self.order as u64;
        if n == 0 || full % n != 0 {
            return Err(Error::CyclotomicLevelTooSmall { have: self.level, need: self.level + 1 });
        }
        let gen = self.scale(&self.zeta_pow(1), self.teich);
        Ok(self.pow(&gen, full / n))
    }

    /// Teichmüller representative of a mod p.
    pub fn teichmuller(&self, a: u64) -> u64 {
        let mut x = a % self.modulus;
        for _ in 0..self.prec {
            x = powmod(x, self.p, self.modulus);
        }
        x
    }

    /// Image of a cyclotomic number; its conductor must divide (p-1)p^level
    /// and its denominator must be prime to p.
    pub fn from_cyclo(&self, c: &Cyclo) -> Result<PElem> {
        let n = c.conductor();
        let root = self.root_of_unity(n).map_err(|_| {
            Error::Unsupported(format!("Q(ζ_{n}) does not embed at level {}^{}", self.p, self.level))
        })?;
        let d = c.denominator().mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap_or(0);
        let inv = self.inv_scalar(d).ok_or(Error::CoefficientNotIntegral(0))?;
        let mut acc = self.zero();
        let mut zpow = self.one();
        for a in c.numerators() {
            if !a.is_zero() {
                let t = self.scale(&zpow, self.from_bigint(a).0[0]);
                self.add_assign(&mut acc, &t);
            }
            zpow = self.mul(&zpow, &root);
        }
        Ok(self.scale(&acc, inv))
    }

    /// Minimum p-adic valuation of the coordinates (prec when zero).
    pub fn valuation(&self, a: &PElem) -> u32 {
        a.0.iter().map(|&c| self.val_scalar(c)).min().unwrap_or(self.prec)
    }

    pub fn val_scalar(&self, mut c: u64) -> u32 {
        if c == 0 {
            return self.prec;
        }
        let mut v = 0;
        while c % self.p == 0 {
            c /= self.p;
            v += 1;
        }
        v
    }

    /// a / p^n after checking divisibility; the result is meaningful
    /// modulo p^{M-n} only.
    pub fn div_p_pow(&self, a: &PElem, n: u32) -> Result<PElem> {
        let pn = self.p.pow(n);
        let mut out = Vec::with_capacity(self.dim);
        for &c in &a.0 {
            if c % pn != 0 {
                return Err(Error::DivisionNotExact(n));
            }
            out.push(c / pn);
        }
        Ok(PElem(out))
    }

    /// Congruence modulo p^digits.
    pub fn eq_mod(&self, a: &PElem, b: &PElem, digits: u32) -> bool {
        let pd = self.p.pow(digits.min(self.prec));
        a.0.iter().zip(&b.0).all(|(&x, &y)| x % pd == y % pd)
    }

    pub fn reduce_mod(&self, a: &PElem, digits: u32) -> PElem {
        let pd = self.p.pow(digits.min(self.prec));
        PElem(a.0.iter().map(|&x| x % pd).collect())
    }

    /// Embed an element of a lower level ring (ζ_{p^k} ↦ ζ^{p^{n-k}}).
    pub fn lift_from(&self, lower: &PRing, a: &PElem) -> PElem {
        assert!(lower.level <= self.level && lower.p == self.p);
        let step = (self.order / lower.order.max(1)) as i64;
        let mut acc = self.zero();
        for (i, &c) in a.0.iter().enumerate() {
            if c != 0 {
                let t = self.scale(&self.zeta_pow(step * i as i64), c);
                self.add_assign(&mut acc, &t);
            }
        }
        acc
    }

    /// A p-adic square root of a unit square, by Hensel lifting from `seed`.
    pub fn hensel_sqrt(&self, a: i64, seed: u64) -> Result<u64> {
        let m = self.modulus as i128;
        let a = (a as i128).rem_euclid(m);
        let mut x = seed as i128 % m;
        if (x * x - a).rem_euclid(self.p as i128) != 0 || x % self.p as i128 == 0 {
            return Err(Error::NoSolution(format!("{seed} is not a square root of {a} mod {}", self.p)));
        }
        for _ in 0..=self.prec.ilog2() + 1 {
            let inv2x = self.inv_scalar(((2 * x) % m) as u64).ok_or(Error::DivisionNotExact(1))? as i128;
            let fx = (mulmod(x as u64, x as u64, self.modulus) as i128 - a).rem_euclid(m);
            x = (x - mulmod(fx as u64, inv2x as u64, self.modulus) as i128).rem_euclid(m);
        }
        Ok(x as u64)
    }

    /// Signed representative of a scalar, for display.
    pub fn signed(&self, c: u64) -> i128 {
        let m = self.modulus as i128;
        let c = c as i128;
        if c > m / 2 {
            c - m
        } else {
            c
        }
    }

    pub fn describe(&self, a: &PElem) -> String {
        let terms: Vec<String> = a
            .0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| if i == 0 { format!("{}", self.signed(c)) } else { format!("{}·ζ^{i}", self.signed(c)) })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_has_exact_order() {
        for (p, n) in [(3u64, 2u32), (5, 2), (7, 1), (2, 3)] {
            let r = PRing::new(p, 6, n).unwrap();
            let z = r.zeta_pow(1);
            let ord = r.zeta_order() as u64;
            assert_eq!(r.pow(&z, ord), r.one());
            assert_ne!(r.pow(&z, ord / p), r.one());
        }
    }

    #[test]
    fn roots_of_unity_coherent() {
        let r = PRing::new(5, 8, 2).unwrap();
        let full = 4 * 25;
        let g = r.root_of_unity(full).unwrap();
        assert_ne!(r.pow(&g, full / 2), r.one());
        assert_ne!(r.pow(&g, full / 5), r.one());
        assert_eq!(r.pow(&g, full), r.one());
        let w = r.root_of_unity(4).unwrap();
        assert_eq!(r.pow(&w, 4), r.one());
        assert_ne!(r.pow(&w, 2), r.one());
    }

    #[test]
    fn cyclo_embedding_is_a_ring_map() {
        let r = PRing::new(3, 8, 2).unwrap();
        let a = Cyclo::zeta_pow(9, 2) + Cyclo::from_int(3);
        let b = Cyclo::zeta_pow(18, 5) - Cyclo::zeta_pow(3, 1);
        let lhs = r.from_cyclo(&(&a * &b)).unwrap();
        let rhs = r.mul(&r.from_cyclo(&a).unwrap(), &r.from_cyclo(&b).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn precision_limit() {
        assert!(PRing::new(11, 20, 0).is_err());
        assert_eq!(default_precision(11), 18);
        assert_eq!(default_precision(3), 20);
        assert!(PRing::new(11, default_precision(11), 1).is_ok());
    }

    #[test]
    fn hensel() {
        let r = PRing::new(11, 10, 0).unwrap();
        let x = r.hensel_sqrt(-7, 2).unwrap();
        assert_eq!(mulmod(x, x, r.modulus), r.from_int(-7).0[0]);
        assert_eq!(x % 11, 2);
    }
}
