//! Exact arithmetic in cyclotomic fields Q(ζ_n).
//!
//! An element is an integer vector over the power basis 1, ζ, …, ζ^{φ(n)-1}
//! with one positive common denominator.  Elements of different fields are
//! combined in Q(ζ_lcm).

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::Complex;

use crate::arith::{divisors, euler_phi, factor, kronecker};

/// A rational number of turns, i.e. the root of unity e(t).
pub type Turn = Ratio<i64>;

pub fn turn(num: i64, den: i64) -> Turn {
    let t = Ratio::new(num, den);
    let f = t.floor();
    t - f
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of Φ_n, constant term first.
pub fn cyclotomic_poly(n: u64) -> Arc<Vec<i64>> {
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Φ_d for every proper divisor d.
    let mut num: Vec<i64> = vec![0; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let phi_d = cyclotomic_poly(d);
        num = exact_div(&num, &phi_d);
    }
    let out = Arc::new(num);
    cyclotomic_cache().lock().unwrap().insert(n, out.clone());
    out
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

#[derive(Clone)]
pub struct Cyclo {
    n: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

impl Cyclo {
    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Cyclo { n: 1, num: vec![BigInt::from(v)], den: BigInt::one() }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Cyclo { n: 1, num: vec![v], den: BigInt::one() }
    }

    pub fn from_rational(q: &BigRational) -> Self {
        Cyclo { n: 1, num: vec![q.numer().clone()], den: q.denom().clone() }
    }

    /// ζ_n^k.
    pub fn zeta_pow(n: u64, k: i64) -> Self {
        let mut g = vec![BigInt::zero(); n as usize];
        g[k.rem_euclid(n as i64) as usize] = BigInt::one();
        Self::from_group_ring(n, g, BigInt::one())
    }

    /// The root of unity e(t).
    pub fn root(t: Turn) -> Self {
        let t = turn(*t.numer(), *t.denom());
        Self::zeta_pow(*t.denom() as u64, *t.numer())
    }

    /// Element Σ g_i ζ_n^i / den given by a vector of length n.
    pub fn from_group_ring(n: u64, mut g: Vec<BigInt>, den: BigInt) -> Self {
        assert_eq!(g.len() as u64, n);
        let phi = cyclotomic_poly(n);
        let deg = phi.len() - 1;
        for i in (deg..g.len()).rev() {
            if g[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut g[i]);
            for (j, &pj) in phi.iter().enumerate().take(deg) {
                if pj != 0 {
                    g[i - deg + j] -= &c * pj;
                }
            }
        }
        g.truncate(deg);
        let mut out = Cyclo { n, num: g, den };
        out.normalize();
        out
    }

    /// Fast path for integer group-ring vectors (e.g. Gauss sums).
    pub fn from_group_ring_i64(n: u64, g: &[i64]) -> Self {
        let phi = cyclotomic_poly(n);
        let deg = phi.len() - 1;
        let mut w: Vec<i128> = g.iter().map(|&x| x as i128).collect();
        for i in (deg..w.len()).rev() {
            let c = w[i];
            if c == 0 {
                continue;
            }
            w[i] = 0;
            for (j, &pj) in phi.iter().enumerate().take(deg) {
                if pj != 0 {
                    w[i - deg + j] -= c * pj as i128;
                }
            }
        }
        w.truncate(deg);
        let mut out = Cyclo { n, num: w.into_iter().map(BigInt::from).collect(), den: BigInt::one() };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in self.num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            self.den /= &g;
            for c in self.num.iter_mut() {
                *c /= &g;
            }
        }
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
        }
    }

    pub fn conductor(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.num.len()
    }

    /// Coefficients over the power basis of Q(ζ_n).
    pub fn coefficients(&self) -> Vec<BigRational> {
        self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect()
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    /// Re-express in Q(ζ_m) for a multiple m of the conductor.
    pub fn lift(&self, m: u64) -> Self {
        if m == self.n {
            return self.clone();
        }
        assert!(m % self.n == 0, "lift target must be a multiple of the conductor");
        let step = (m / self.n) as usize;
        let mut g = vec![BigInt::zero(); m as usize];
        for (i, c) in self.num.iter().enumerate() {
            g[i * step] = c.clone();
        }
        Self::from_group_ring(m, g, self.den.clone())
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let m = num_integer::lcm(self.n, other.n);
        (self.lift(m), other.lift(m))
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num.iter().skip(1).all(|c| c.is_zero()) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = Cyclo {
            n: self.n,
            num: self.num.iter().map(|c| c * q.numer()).collect(),
            den: &self.den * q.denom(),
        };
        out.normalize();
        out
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(k)))
    }

    /// Image under ζ ↦ ζ^a with gcd(a, n) = 1.
    pub fn galois(&self, a: i64) -> Self {
        let n = self.n as i64;
        let mut g = vec![BigInt::zero(); self.n as usize];
        for (i, c) in self.num.iter().enumerate() {
            let k = (i as i64 * a).rem_euclid(n) as usize;
            g[k] += c;
        }
        Self::from_group_ring(self.n, g, self.den.clone())
    }

    /// Complex conjugate under every embedding.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Cyclo::one();
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = &r * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        r
    }

    /// Norm down to Q.
    pub fn norm(&self) -> BigRational {
        let n = self.n;
        let mut prod = Cyclo::one();
        for a in 1..n.max(2) {
            if num_integer::gcd(a, n) == 1 {
                prod = &prod * &self.galois(a as i64);
            }
        }
        prod.as_rational().expect("norm is rational")
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.n;
        let mut others = Cyclo::one();
        for a in 2..n {
            if num_integer::gcd(a, n) == 1 {
                others = &others * &self.galois(a as i64);
            }
        }
        let norm = (&others * self).as_rational()?;
        Some(others.scale(&norm.recip()))
    }

    /// √n for an integer n, taking the root with positive imaginary part
    /// (or positive real part when n > 0) under ζ_m ↦ e(1/m).
    pub fn sqrt_int(n: i64) -> Self {
        if n == 0 {
            return Cyclo::zero();
        }
        let mut square = 1i64;
        let mut core = n.signum();
        for (l, e) in factor(n.unsigned_abs()) {
            square *= (l as i64).pow(e / 2);
            if e % 2 == 1 {
                core *= l as i64;
            }
        }
        let root = match core {
            1 => Cyclo::one(),
            -1 => Cyclo::zeta_pow(4, 1),
            _ => {
                // quadratic Gauss sum of discriminant D is √D or i√|D|
                let (disc, half) = if core.rem_euclid(4) == 1 { (core, false) } else { (4 * core, true) };
                let m = disc.unsigned_abs();
                let g: Vec<i64> = (0..m).map(|a| kronecker(disc as i128, a) as i64).collect();
                let mut gs = Cyclo::from_group_ring_i64(m, &g);
                if half {
                    gs = gs.scale(&BigRational::new(BigInt::one(), BigInt::from(2)));
                }
                let (re, im) = gs.to_c64();
                if im < -1e-9 || (im.abs() < 1e-9 && re < 0.0) {
                    -gs
                } else {
                    gs
                }
            }
        };
        root.scale_int(square)
    }

    /// Image under the embedding ζ_n ↦ exp(2πi/n).
    pub fn to_complex(&self, prec: u32) -> Complex {
        let zeta = crate::numerics::root_of_unity(self.n, 1, prec);
        let mut acc = Complex::new(prec);
        for c in self.num.iter().rev() {
            acc *= &zeta;
            acc += crate::numerics::bigint_to_float(c, prec);
        }
        let den = crate::numerics::bigint_to_float(&self.den, prec);
        acc / den
    }

    pub fn to_c64(&self) -> (f64, f64) {
        let z = self.to_complex(80);
        (z.real().to_f64(), z.imag().to_f64())
    }

    /// Largest absolute value of any numerator coefficient, as f64.
    pub fn height(&self) -> f64 {
        let m = self.num.iter().map(|c| c.abs()).max().unwrap_or_default();
        m.to_f64().unwrap_or(f64::INFINITY) / self.den.to_f64().unwrap_or(1.0)
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.common(other);
        a.den == b.den && a.num == b.num
    }
}

impl Eq for Cyclo {}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{q}");
        }
        let mut parts = Vec::new();
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            parts.push(match i {
                0 => format!("{c}"),
                1 => format!("{c}*z{}", self.n),
                _ => format!("{c}*z{}^{i}", self.n),
            });
        }
        if self.den.is_one() {
            write!(f, "{}", parts.join(" + "))
        } else {
            write!(f, "({})/{}", parts.join(" + "), self.den)
        }
    }
}

impl Add for &Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        let (a, b) = self.common(rhs);
        let num = a
            .num
            .iter()
            .zip(&b.num)
            .map(|(x, y)| x * &b.den + y * &a.den)
            .collect();
        let mut out = Cyclo { n: a.n, num, den: &a.den * &b.den };
        out.normalize();
        out
    }
}

impl Sub for &Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        self + &(-rhs)
    }
}

impl Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        Cyclo { n: self.n, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}

impl Mul for &Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        if self.n == 1 || rhs.n == 1 {
            let (s, v) = if self.n == 1 { (self, rhs) } else { (rhs, self) };
            let mut out = Cyclo {
                n: v.n,
                num: v.num.iter().map(|c| c * &s.num[0]).collect(),
                den: &v.den * &s.den,
            };
            out.normalize();
            return out;
        }
        let (a, b) = self.common(rhs);
        let n = a.n as usize;
        let mut g = vec![BigInt::zero(); n];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                if !y.is_zero() {
                    g[(i + j) % n] += x * y;
                }
            }
        }
        Cyclo::from_group_ring(a.n, g, &a.den * &b.den)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Cyclo {
            type Output = Cyclo;
            fn $m(self, rhs: Cyclo) -> Cyclo {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        -&self
    }
}

/// Number of basis coordinates of Q(ζ_n).
pub fn field_degree(n: u64) -> u64 {
    euler_phi(n)
}
