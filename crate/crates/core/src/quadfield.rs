//! Imaginary quadratic fields, orders R_c = Z + cR, proper ideals as lattices
//! and binary quadratic forms, ring class groups, and CM points.
//!
//! Field elements are written (a + bω)/den with ω = (d_M + √d_M)/2.

use std::collections::HashMap;
use std::fmt;

use rug::{Complex, Float};
use serde::Serialize;

use crate::abgroup::{structure, AbelianStructure};
use crate::arith::{egcd, euler_phi, factor, gcd, is_squarefree, isqrt, kronecker, lcm, sqrt_mod_prime};
use crate::error::{Error, Result};

pub const DEFAULT_ENUM_BOUND: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ImagQuadField {
    pub d_m: i64,
    pub d0: i64,
    pub h: u64,
    pub w: u32,
}

/// How a rational prime decomposes in the field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// The field element (a + bω)/den, kept with den > 0 and gcd(a, b, den) = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct KElem {
    pub a: i128,
    pub b: i128,
    pub den: i128,
}

impl KElem {
    pub fn new(a: i128, b: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let s = if den < 0 { -1 } else { 1 };
        let g = gcd(gcd(a, b), den);
        KElem { a: s * a / g, b: s * b / g, den: s * den / g }
    }

    pub fn int(a: i128) -> Self {
        KElem { a, b: 0, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn scale_int(&self, k: i128) -> Self {
        KElem::new(self.a * k, self.b * k, self.den)
    }

    pub fn add(&self, o: &KElem) -> Self {
        KElem::new(self.a * o.den + o.a * self.den, self.b * o.den + o.b * self.den, self.den * o.den)
    }

    pub fn sub(&self, o: &KElem) -> Self {
        self.add(&o.scale_int(-1))
    }
}

impl ImagQuadField {
    pub fn new(d_m: i64) -> Result<Self> {
        if !is_fundamental(d_m) {
            return Err(Error::InvalidDiscriminant(d_m));
        }
        let d0 = if d_m % 4 == 0 { -d_m / 4 } else { -d_m };
        let w = match d_m {
            -3 => 6,
            -4 => 4,
            _ => 2,
        };
        let h = reduced_forms(d_m as i128, DEFAULT_ENUM_BOUND)?.len() as u64;
        Ok(ImagQuadField { d_m, d0, h, w })
    }

    fn d(&self) -> i128 {
        self.d_m as i128
    }

    /// Norm of ω, i.e. (d² - d)/4.
    pub fn omega_norm(&self) -> i128 {
        (self.d() * self.d() - self.d()) / 4
    }

    pub fn mul(&self, x: &KElem, y: &KElem) -> KElem {
        let n = self.omega_norm();
        let a = x.a * y.a - x.b * y.b * n;
        let b = x.a * y.b + x.b * y.a + x.b * y.b * self.d();
        KElem::new(a, b, x.den * y.den)
    }

    pub fn conj(&self, x: &KElem) -> KElem {
        KElem::new(x.a + x.b * self.d(), -x.b, x.den)
    }

    /// Norm as a fraction (numerator, denominator).
    pub fn norm(&self, x: &KElem) -> (i128, i128) {
        let num = x.a * x.a + x.a * x.b * self.d() + x.b * x.b * self.omega_norm();
        let den = x.den * x.den;
        let g = gcd(num, den);
        (num / g, den / g)
    }

    pub fn inv(&self, x: &KElem) -> KElem {
        assert!(!x.is_zero(), "inverse of zero");
        let (nn, nd) = self.norm(x);
        let c = self.conj(x);
        KElem::new(c.a * nd, c.b * nd, c.den * nn)
    }

    pub fn div(&self, x: &KElem, y: &KElem) -> KElem {
        self.mul(x, &self.inv(y))
    }

    pub fn pow(&self, x: &KElem, e: i64) -> KElem {
        let base = if e < 0 { self.inv(x) } else { *x };
        let mut r = KElem::int(1);
        for _ in 0..e.unsigned_abs() {
            r = self.mul(&r, &base);
        }
        r
    }

    /// Sign of the imaginary part.
    pub fn im_sign(&self, x: &KElem) -> i32 {
        x.b.signum() as i32
    }

    /// √(-d0) expressed in the ω basis.
    pub fn sqrt_neg_d0(&self) -> KElem {
        if self.d_m % 4 == 0 {
            KElem::new(-self.d() / 2, 1, 1)
        } else {
            KElem::new(-self.d(), 2, 1)
        }
    }

    /// Coordinates (x, y) with element = x + y√(-d0).
    pub fn sqrt_coords(&self, e: &KElem) -> ((i128, i128), (i128, i128)) {
        // ω = d/2 + (1/2)√d and √d = s√(-d0) with s = 2 if 4 | d else 1.
        let s = if self.d_m % 4 == 0 { 2 } else { 1 };
        let xn = 2 * e.a + e.b * self.d();
        let xd = 2 * e.den;
        let yn = e.b * s;
        let yd = 2 * e.den;
        let gx = gcd(xn, xd);
        let gy = gcd(yn, yd);
        ((xn / gx, xd / gx), (yn / gy, yd / gy))
    }

    pub fn omega_complex(&self, prec: u32) -> Complex {
        let re = Float::with_val(prec, self.d_m) / 2u32;
        let im = Float::with_val(prec, -self.d_m).sqrt() / 2u32;
        Complex::with_val(prec, (re, im))
    }

    pub fn to_complex(&self, x: &KElem, prec: u32) -> Complex {
        let w = self.omega_complex(prec);
        let mut z = Complex::with_val(prec, &w * Float::with_val(prec, x.b));
        z += Float::with_val(prec, x.a);
        z / Float::with_val(prec, x.den)
    }

    /// The same embedding as [`Self::to_complex`], landing in Q(ζ_|d|).
    pub fn to_cyclo(&self, x: &KElem) -> crate::cyclo::Cyclo {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        let sd = crate::cyclo::Cyclo::sqrt_int(self.d_m);
        let q = |n: i128, d: i128| BigRational::new(BigInt::from(n), BigInt::from(d));
        let rat = crate::cyclo::Cyclo::from_rational(&q(2 * x.a + x.b * self.d(), 2 * x.den));
        &rat + &sd.scale(&q(x.b, 2 * x.den))
    }

    pub fn splitting(&self, l: u64) -> Splitting {
        match kronecker(self.d(), l) {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    }

    /// Units of the maximal order.
    pub fn units(&self) -> Vec<KElem> {
        match self.d_m {
            -4 => vec![KElem::int(1), KElem::new(2, 1, 1), KElem::int(-1), KElem::new(-2, -1, 1)],
            -3 => {
                // 2 + ω = (1 + √-3)/2 generates the sixth roots of unity
                let z = KElem::new(2, 1, 1);
                let mut out = vec![KElem::int(1)];
                for _ in 1..6 {
                    let last = *out.last().unwrap();
                    out.push(self.mul(&last, &z));
                }
                out
            }
            _ => vec![KElem::int(1), KElem::int(-1)],
        }
    }

    pub fn maximal_order(&self) -> QuadOrder {
        QuadOrder { field: *self, conductor: 1 }
    }

    pub fn order(&self, c: u64) -> QuadOrder {
        QuadOrder { field: *self, conductor: c }
    }
}

fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuadOrder {
    pub field: ImagQuadField,
    pub conductor: u64,
}

impl QuadOrder {
    pub fn discriminant(&self) -> i128 {
        let c = self.conductor as i128;
        c * c * self.field.d_m as i128
    }

    /// The order itself as a lattice with oriented basis (cω, 1).
    pub fn lattice(&self) -> Lattice {
        Lattice { w1: KElem::new(0, self.conductor as i128, 1), w2: KElem::int(1) }
    }

    pub fn unit_ideal(&self) -> ProperIdeal {
        ProperIdeal { field: self.field, conductor: self.conductor, lattice: self.lattice() }
    }
}

/// Primitive positive-definite binary quadratic form ax² + bxy + cy².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Form {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl Form {
    pub fn disc(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn identity(disc: i128) -> Form {
        let b = disc.rem_euclid(2);
        Form { a: 1, b, c: (b * b - disc) / 4 }
    }

    pub fn eval(&self, x: i128, y: i128) -> i128 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_reduced(&self) -> bool {
        self.b.abs() <= self.a
            && self.a <= self.c
            && (self.b >= 0 || (self.b.abs() != self.a && self.a != self.c))
    }

    fn normalize(&self) -> Form {
        let two_a = 2 * self.a;
        let mut r = self.b.rem_euclid(two_a);
        if r > self.a {
            r -= two_a;
        }
        let c = (r * r - self.disc()) / (4 * self.a);
        Form { a: self.a, b: r, c }
    }

    pub fn reduce(&self) -> Form {
        let mut f = self.normalize();
        while f.a > f.c {
            f = Form { a: f.c, b: -f.b, c: f.a }.normalize();
        }
        if f.a == f.c && f.b < 0 {
            f.b = -f.b;
        }
        f
    }

    pub fn inverse(&self) -> Form {
        Form { a: self.a, b: -self.b, c: self.c }.reduce()
    }

    /// Gauss composition followed by reduction.
    pub fn compose(&self, other: &Form) -> Form {
        let disc = self.disc();
        debug_assert_eq!(disc, other.disc());
        let (f1, f2) = if self.a > other.a { (other, self) } else { (self, other) };
        let (a1, b1) = (f1.a, f1.b);
        let (a2, b2, c2) = (f2.a, f2.b, f2.c);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let (g, u, _v) = egcd(a2, a1);
            (u, g)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let (g, u, v) = egcd(s, d);
            (u, -v, g)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (b3 * b3 - disc) / (4 * a3);
        Form { a: a3, b: b3, c: c3 }.reduce()
    }

    pub fn pow(&self, e: u64) -> Form {
        let mut r = Form::identity(self.disc());
        let mut b = *self;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.compose(&b);
            }
            b = b.compose(&b);
            e >>= 1;
        }
        r
    }

    /// The form f(x·col0 + y·col1) for an integer matrix [[x, u], [y, v]].
    pub fn transform(&self, m: [[i128; 2]; 2]) -> Form {
        let [[p, q], [r, s]] = m;
        let a = self.eval(p, r);
        let c = self.eval(q, s);
        let b = 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s;
        Form { a, b, c }
    }
}

/// All reduced primitive positive-definite forms of discriminant `disc`.
pub fn reduced_forms(disc: i128, bound: u64) -> Result<Vec<Form>> {
    if disc.unsigned_abs() > bound as u128 {
        return Err(Error::BoundExceeded(format!("|disc| = {} > {bound}", disc.abs())));
    }
    let mut out = Vec::new();
    let amax = isqrt((disc.unsigned_abs()) / 3) as i128;
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (a == c && b < 0) {
                continue;
            }
            if gcd(gcd(a, b), c) != 1 {
                continue;
            }
            out.push(Form { a, b, c });
        }
    }
    Ok(out)
}

/// A rank-two lattice Zω₁ + Zω₂ in the field with Im(ω₁/ω₂) > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Lattice {
    pub w1: KElem,
    pub w2: KElem,
}

/// Canonical Hermite form: the lattice Z·p/D + Z·(q + rω)/D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LatticeKey {
    pub p: i128,
    pub q: i128,
    pub r: i128,
    pub den: i128,
}

fn hnf(vectors: &[(i128, i128)], den: i128) -> LatticeKey {
    let mut g_a = 0i128;
    let mut rv: Option<(i128, i128)> = None;
    for &(x, y) in vectors {
        if y == 0 {
            g_a = gcd(g_a, x);
            continue;
        }
        match rv {
            None => rv = Some((x, y)),
            Some((rx, ry)) => {
                let (g, s, t) = egcd(ry, y);
                let new = (s * rx + t * x, g);
                let kill_x = (y / g) * rx - (ry / g) * x;
                g_a = gcd(g_a, kill_x);
                rv = Some(new);
            }
        }
    }
    let (mut qx, mut r) = rv.expect("lattice has rank two");
    if r < 0 {
        qx = -qx;
        r = -r;
    }
    assert!(g_a > 0, "lattice has rank two");
    let p = g_a;
    let q = qx.rem_euclid(p);
    let g = gcd(gcd(gcd(p, q), r), den);
    LatticeKey { p: p / g, q: q / g, r: r / g, den: den / g }
}

impl Lattice {
    pub fn from_key(k: &LatticeKey) -> Lattice {
        Lattice { w1: KElem::new(k.q, k.r, k.den), w2: KElem::new(k.p, 0, k.den) }
    }

    fn from_generators(gens: &[KElem]) -> Lattice {
        Lattice::from_key(&Lattice::key_of(gens))
    }

    fn key_of(gens: &[KElem]) -> LatticeKey {
        let den = gens.iter().fold(1i128, |acc, g| lcm(acc, g.den));
        let vecs: Vec<(i128, i128)> = gens.iter().map(|g| (g.a * (den / g.den), g.b * (den / g.den))).collect();
        hnf(&vecs, den)
    }

    pub fn key(&self) -> LatticeKey {
        Lattice::key_of(&[self.w1, self.w2])
    }

    pub fn same_as(&self, other: &Lattice) -> bool {
        self.key() == other.key()
    }

    /// Make the basis oriented by flipping ω₁ if needed.
    pub fn oriented(field: &ImagQuadField, w1: KElem, w2: KElem) -> Lattice {
        let t = field.div(&w1, &w2);
        if field.im_sign(&t) < 0 {
            Lattice { w1: w1.scale_int(-1), w2 }
        } else {
            Lattice { w1, w2 }
        }
    }

    pub fn tau(&self, field: &ImagQuadField) -> KElem {
        field.div(&self.w1, &self.w2)
    }

    pub fn mul(&self, field: &ImagQuadField, other: &Lattice) -> Lattice {
        Lattice::from_generators(&[
            field.mul(&self.w1, &other.w1),
            field.mul(&self.w1, &other.w2),
            field.mul(&self.w2, &other.w1),
            field.mul(&self.w2, &other.w2),
        ])
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        Lattice::from_generators(&[self.w1, self.w2, other.w1, other.w2])
    }

    pub fn scale(&self, field: &ImagQuadField, x: &KElem) -> Lattice {
        Lattice::oriented(field, field.mul(&self.w1, x), field.mul(&self.w2, x))
    }

    pub fn conj(&self, field: &ImagQuadField) -> Lattice {
        Lattice { w1: field.conj(&self.w2), w2: field.conj(&self.w1) }
    }

    /// Whether `x` lies in the lattice.
    pub fn contains(&self, x: &KElem) -> bool {
        let k = self.key();
        // x = (X + Yω)/den_x; need integers m, n with x = m p/D + n (q + rω)/D.
        let d = lcm(k.den, x.den);
        let (xa, xb) = (x.a * (d / x.den), x.b * (d / x.den));
        let s = d / k.den;
        let (p, q, r) = (k.p * s, k.q * s, k.r * s);
        if xb % r != 0 {
            return false;
        }
        let n = xb / r;
        (xa - n * q) % p == 0
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        self.contains(&other.w1) && self.contains(&other.w2)
    }

    /// Covolume relative to the maximal order, as a fraction.
    pub fn covolume(&self) -> (i128, i128) {
        let k = self.key();
        let num = k.p * k.r;
        let den = k.den * k.den;
        let g = gcd(num, den);
        (num / g, den / g)
    }

    /// Primitive form (A, B, C) with Aτ² + Bτ + C = 0, A > 0, for τ = ω₁/ω₂.
    pub fn form(&self, field: &ImagQuadField) -> Form {
        let t = self.tau(field);
        let d = field.d_m as i128;
        let tr = 2 * t.a + t.b * d;
        let nm = t.a * t.a + t.a * t.b * d + t.b * t.b * field.omega_norm();
        let (a, b, c) = (t.den * t.den, -t.den * tr, nm);
        let g = gcd(gcd(a, b), c);
        Form { a: a / g, b: b / g, c: c / g }
    }

    /// Apply [[a, b], [c, d]] to the basis: (ω₁, ω₂) ↦ (aω₁ + bω₂, cω₁ + dω₂).
    pub fn act(&self, m: [[i128; 2]; 2]) -> Lattice {
        let [[a, b], [c, d]] = m;
        Lattice {
            w1: self.w1.scale_int(a).add(&self.w2.scale_int(b)),
            w2: self.w1.scale_int(c).add(&self.w2.scale_int(d)),
        }
    }

    /// Exact reduction of τ to the standard fundamental domain.  Returns the
    /// new basis and the SL₂(Z) matrix applied.
    pub fn reduce(&self, field: &ImagQuadField) -> (Lattice, [[i128; 2]; 2]) {
        let mut lat = *self;
        let mut g = [[1i128, 0], [0, 1]];
        loop {
            let f = lat.form(field);
            // τ = (-B + √D)/(2A): translate so that -A < B <= A.
            let two_a = 2 * f.a;
            let mut r = f.b.rem_euclid(two_a);
            if r > f.a {
                r -= two_a;
            }
            let n = (f.b - r) / two_a;
            if n != 0 {
                let t = [[1, n], [0, 1]];
                lat = lat.act(t);
                g = matmul(t, g);
            }
            let f = lat.form(field);
            if f.a > f.c || (f.a == f.c && f.b < 0) {
                let s = [[0, -1], [1, 0]];
                lat = lat.act(s);
                g = matmul(s, g);
                continue;
            }
            break;
        }
        (lat, g)
    }
}

pub fn matmul(x: [[i128; 2]; 2], y: [[i128; 2]; 2]) -> [[i128; 2]; 2] {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// A lattice whose multiplier ring is R_c.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProperIdeal {
    pub field: ImagQuadField,
    pub conductor: u64,
    pub lattice: Lattice,
}

impl ProperIdeal {
    /// Wrap a lattice, checking its multiplier ring.
    pub fn new(field: ImagQuadField, lattice: Lattice) -> ProperIdeal {
        let f = lattice.form(&field);
        let ratio = f.disc() / field.d_m as i128;
        let c = isqrt(ratio as u128) as u64;
        debug_assert_eq!((c as i128) * (c as i128), ratio);
        ProperIdeal { field, conductor: c, lattice }
    }

    /// The lattice [A, (-B + √D)/2] attached to a primitive form.
    pub fn from_form(field: ImagQuadField, f: &Form) -> ProperIdeal {
        let ratio = f.disc() / field.d_m as i128;
        let c = isqrt(ratio as u128) as i128;
        let d = field.d_m as i128;
        let w1 = KElem::new((-f.b - c * d) / 2, c, 1);
        let w2 = KElem::int(f.a);
        ProperIdeal { field, conductor: c as u64, lattice: Lattice { w1, w2 } }
    }

    pub fn order(&self) -> QuadOrder {
        self.field.order(self.conductor)
    }

    pub fn form(&self) -> Form {
        self.lattice.form(&self.field)
    }

    pub fn reduced_form(&self) -> Form {
        self.form().reduce()
    }

    pub fn mul(&self, other: &ProperIdeal) -> ProperIdeal {
        ProperIdeal::new(self.field, self.lattice.mul(&self.field, &other.lattice))
    }

    pub fn scale(&self, x: &KElem) -> ProperIdeal {
        ProperIdeal { lattice: self.lattice.scale(&self.field, x), ..*self }
    }

    pub fn conj(&self) -> ProperIdeal {
        ProperIdeal { lattice: self.lattice.conj(&self.field), ..*self }
    }

    /// Norm relative to the order (index for integral ideals).
    pub fn norm(&self) -> (i128, i128) {
        let (n, d) = self.lattice.covolume();
        let c = self.conductor as i128;
        let g = gcd(n, d * c);
        (n / g, d * c / g)
    }

    pub fn is_integral(&self) -> bool {
        let o = self.order().lattice();
        o.contains_lattice(&self.lattice)
    }

    /// Conductor of the multiplier ring computed from the lattice stabilizer.
    pub fn multiplier_conductor(&self) -> u64 {
        let f = &self.field;
        // cω stabilizes the lattice iff c is a multiple of the conductor.
        let stab = |c: u64| {
            let x = KElem::new(0, c as i128, 1);
            let l = self.lattice;
            l.contains(&f.mul(&x, &l.w1)) && l.contains(&f.mul(&x, &l.w2))
        };
        let bound = {
            let disc = self.form().disc();
            isqrt((disc / f.d_m as i128) as u128) as u64
        };
        (1..=bound.max(1)).find(|&c| stab(c)).unwrap_or(bound)
    }

    /// Generator β of an ideal that is principal for its order.
    pub fn principal_generator(&self) -> Option<KElem> {
        let (red, _) = self.lattice.reduce(&self.field);
        let f = red.form(&self.field);
        (f == Form::identity(f.disc())).then_some(red.w2)
    }
}

impl fmt::Display for ProperIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ((a1, b1), (c1, d1)) = self.field.sqrt_coords(&self.lattice.w1);
        let ((a2, b2), (c2, d2)) = self.field.sqrt_coords(&self.lattice.w2);
        write!(
            f,
            "[{a1}/{b1} + {c1}/{d1}·√-{d0}, {a2}/{b2} + {c2}/{d2}·√-{d0}]",
            d0 = self.field.d0
        )
    }
}

/// Euler function of the ideal cR of the maximal order.
pub fn phi_m(field: &ImagQuadField, c: u64) -> u64 {
    factor(c)
        .into_iter()
        .map(|(l, e)| {
            let n = l.pow(2 * e);
            match field.splitting(l) {
                Splitting::Split => n / (l * l) * (l - 1) * (l - 1),
                Splitting::Inert => n / (l * l) * (l * l - 1),
                Splitting::Ramified => n / l * (l - 1),
            }
        })
        .product()
}

/// |Cl(R_{c p^n})| = 2 h φ_M(cpⁿ) / (w φ_Q(cpⁿ)); at conductor one this is h.
pub fn class_number_formula(field: &ImagQuadField, c: u64, p: u64, n: u32) -> Result<u64> {
    if field.splitting(p) != Splitting::Split || p == 2 {
        return Err(Error::NonSplitPrime(p));
    }
    if gcd(c as i128, p as i128) != 1 {
        return Err(Error::ConductorMismatch(format!("gcd({c}, {p}) != 1")));
    }
    let m = c * p.pow(n);
    if m == 1 {
        return Ok(field.h);
    }
    let num = 2 * field.h * phi_m(field, m);
    let den = field.w as u64 * euler_phi(m);
    if num % den != 0 {
        return Err(Error::NonIntegralResult(format!("{num}/{den}")));
    }
    Ok(num / den)
}

/// The primes above an odd split p: returns (𝔭̄, 𝔭) where 𝔭 = (p, √-d0 - x)
/// and x is the least non-negative square root of -d0 mod p.
pub fn split_prime(field: &ImagQuadField, p: u64) -> Result<(ProperIdeal, ProperIdeal)> {
    if p == 2 || field.splitting(p) != Splitting::Split {
        return Err(Error::NonSplitPrime(p));
    }
    let x = sqrt_mod_prime(-(field.d0 as i128), p).ok_or(Error::NonSplitPrime(p))? as i128;
    let s = field.sqrt_neg_d0();
    let mk = |g: KElem| {
        let pe = KElem::int(p as i128);
        let om = KElem::new(0, 1, 1);
        let lat = Lattice::from_generators(&[pe, field.mul(&pe, &om), g, field.mul(&g, &om)]);
        ProperIdeal::new(*field, lat)
    };
    let pp = mk(s.sub(&KElem::int(x)));
    let pbar = mk(s.add(&KElem::int(x)));
    Ok((pbar, pp))
}

/// Prime ideals of the maximal order above l.  For split l the order is
/// (𝔩̄, 𝔩) as in [`split_prime`] when l is odd.
pub fn primes_above(field: &ImagQuadField, l: u64) -> Vec<ProperIdeal> {
    if l != 2 && field.splitting(l) == Splitting::Split {
        let (a, b) = split_prime(field, l).expect("split");
        return vec![a, b];
    }
    let pe = KElem::int(l as i128);
    let om = KElem::new(0, 1, 1);
    match field.splitting(l) {
        Splitting::Inert => vec![ProperIdeal::new(*field, Lattice::from_generators(&[pe, field.mul(&pe, &om)]))],
        _ => {
            let d = field.d_m as i128;
            let li = l as i128;
            let mut out = Vec::new();
            for r in 0..li {
                if (r * r - d * r + field.omega_norm()).rem_euclid(li) == 0 {
                    let g = KElem::new(-r, 1, 1);
                    let lat = Lattice::from_generators(&[pe, field.mul(&pe, &om), g, field.mul(&g, &om)]);
                    out.push(ProperIdeal::new(*field, lat));
                }
            }
            out
        }
    }
}

/// Intersection of an ideal of the maximal order with R_c, for ideals prime to c.
pub fn restrict_to_order(a: &ProperIdeal, c: u64) -> ProperIdeal {
    // 𝔞 ∩ R_c = 𝔞 ∩ (Z + cR); for 𝔞 prime to c this is proper of conductor c.
    let k = a.lattice.key();
    assert_eq!(k.den, 1, "integral ideal expected");
    let cc = c as i128;
    // Elements x + yω of 𝔞 with c | y: sublattice of index c when gcd(r, c) = 1.
    let gens = [
        KElem::int(k.p),
        KElem::new(k.q * cc, k.r * cc, 1),
        KElem::new(k.p * cc, 0, 1),
    ];
    let lat = Lattice::from_generators(&gens);
    let out = ProperIdeal::new(a.field, lat);
    debug_assert_eq!(out.conductor, c);
    out
}

#[derive(Clone, Debug)]
pub struct RingClassGroup {
    pub order: QuadOrder,
    pub forms: Vec<Form>,
    index: HashMap<Form, usize>,
    pub identity: usize,
    pub structure: AbelianStructure,
}

impl RingClassGroup {
    pub fn size(&self) -> usize {
        self.forms.len()
    }

    pub fn generators(&self) -> Vec<Form> {
        self.structure.generators.iter().map(|&i| self.forms[i]).collect()
    }

    pub fn generator_orders(&self) -> &[u64] {
        &self.structure.orders
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.index[&self.forms[i].compose(&self.forms[j])]
    }

    pub fn inv(&self, i: usize) -> usize {
        self.index[&self.forms[i].inverse()]
    }

    pub fn class_of_form(&self, f: &Form) -> Option<usize> {
        self.index.get(&f.reduce()).copied()
    }

    pub fn class_of(&self, a: &ProperIdeal) -> Result<usize> {
        if a.conductor != self.order.conductor {
            return Err(Error::ConductorMismatch(format!(
                "ideal has conductor {}, group has {}",
                a.conductor, self.order.conductor
            )));
        }
        self.class_of_form(&a.form())
            .ok_or_else(|| Error::InternalMismatch("reduced form not in table".into()))
    }

    pub fn representative(&self, i: usize) -> ProperIdeal {
        ProperIdeal::from_form(self.order.field, &self.forms[i])
    }

    pub fn dlog(&self, i: usize) -> &[u64] {
        &self.structure.dlog[i]
    }
}

pub fn enumerate_class_group(order: &QuadOrder, bound: u64) -> Result<RingClassGroup> {
    let disc = order.discriminant();
    let forms = reduced_forms(disc, bound)?;
    let index: HashMap<Form, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let identity = index[&Form::identity(disc)];
    let st = structure(forms.len(), identity, |i, j| index[&forms[i].compose(&forms[j])]);
    Ok(RingClassGroup { order: *order, forms, index, identity, structure: st })
}

/// Image of a proper R_{c'} class in Cl(R_c) for c | c'.
pub fn project_class(a: &ProperIdeal, target: &QuadOrder) -> Result<ProperIdeal> {
    if a.conductor % target.conductor != 0 || a.field != target.field {
        return Err(Error::ConductorMismatch(format!(
            "cannot project conductor {} to {}",
            a.conductor, target.conductor
        )));
    }
    let lat = a.lattice.mul(&a.field, &target.lattice());
    let out = ProperIdeal::new(a.field, lat);
    if out.conductor != target.conductor {
        return Err(Error::ConductorMismatch("projection is not proper".into()));
    }
    Ok(out)
}

/// Integral representative of a form class whose norm is prime to `m`.
pub fn prime_to(field: &ImagQuadField, f: &Form, m: u64) -> ProperIdeal {
    let m = m as i128;
    let mut best: Option<(i128, [[i128; 2]; 2])> = None;
    for radius in 1i128..64 {
        for x in -radius..=radius {
            for y in 0..=radius {
                if (x.abs() != radius && y != radius) || gcd(x, y) != 1 {
                    continue;
                }
                let v = f.eval(x, y);
                if gcd(v, m) != 1 {
                    continue;
                }
                let (_, s, t) = egcd(x, y);
                // [[x, -t], [y, s]] has determinant xs + ty = 1.
                let mat = [[x, -t], [y, s]];
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, mat));
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    let (_, mat) = best.expect("forms represent values prime to any modulus");
    let g = f.transform(mat);
    ProperIdeal::from_form(*field, &g)
}

/// Representatives A_j of Cl(R_c), integral with norm prime to p·c.
pub fn coset_representatives(field: &ImagQuadField, c: u64, p: u64, bound: u64) -> Result<Vec<ProperIdeal>> {
    if gcd(c as i128, p as i128) != 1 {
        return Err(Error::ConductorMismatch(format!("gcd({c}, {p}) != 1")));
    }
    if field.splitting(p) != Splitting::Split {
        return Err(Error::NonSplitPrime(p));
    }
    let g = enumerate_class_group(&field.order(c), bound)?;
    Ok((0..g.size()).map(|i| prime_to(field, &g.forms[i], p * c)).collect())
}

/// τ and ω₂ of a lattice after exact reduction to the fundamental domain.
#[derive(Clone, Debug)]
pub struct CmPoint {
    pub tau: Complex,
    pub omega2: Complex,
    pub basis: Lattice,
    pub word: [[i128; 2]; 2],
}

pub fn cm_point(a: &ProperIdeal, prec: u32) -> CmPoint {
    let (red, word) = a.lattice.reduce(&a.field);
    let w1 = a.field.to_complex(&red.w1, prec);
    let w2 = a.field.to_complex(&red.w2, prec);
    CmPoint { tau: w1 / &w2, omega2: w2, basis: red, word }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields() {
        let k = ImagQuadField::new(-23).unwrap();
        assert_eq!((k.h, k.w, k.d0), (3, 2, 23));
        assert_eq!(ImagQuadField::new(-4).unwrap().w, 4);
        assert!(ImagQuadField::new(-12).is_err());
        assert!(ImagQuadField::new(-5).is_err());
        assert_eq!(ImagQuadField::new(-20).unwrap().h, 2);
    }

    #[test]
    fn d23_group() {
        let k = ImagQuadField::new(-23).unwrap();
        let g = enumerate_class_group(&k.maximal_order(), DEFAULT_ENUM_BOUND).unwrap();
        assert_eq!(g.size(), 3);
        assert_eq!(g.generator_orders(), &[3]);
        let mut fs = g.forms.clone();
        fs.sort();
        assert_eq!(
            fs,
            vec![Form { a: 1, b: 1, c: 6 }, Form { a: 2, b: -1, c: 3 }, Form { a: 2, b: 1, c: 3 }]
        );
    }

    #[test]
    fn split_labels() {
        let k = ImagQuadField::new(-7).unwrap();
        let (pbar, p) = split_prime(&k, 11).unwrap();
        // 𝔭 = (11, √-7 - 2)
        let g = k.sqrt_neg_d0().sub(&KElem::int(2));
        assert!(p.lattice.contains(&g));
        assert!(!pbar.lattice.contains(&g));
        assert_eq!(p.norm(), (11, 1));
        let prod = p.mul(&pbar);
        assert!(prod.lattice.same_as(&k.maximal_order().lattice().scale(&k, &KElem::int(11))));
        let i = ImagQuadField::new(-4).unwrap();
        let (_, p5) = split_prime(&i, 5).unwrap();
        assert!(p5.lattice.contains(&i.sqrt_neg_d0().sub(&KElem::int(2))));
        assert_eq!(split_prime(&i, 7).unwrap_err(), Error::NonSplitPrime(7));
    }

    #[test]
    fn form_lattice_roundtrip() {
        let k = ImagQuadField::new(-7).unwrap();
        let g = enumerate_class_group(&k.order(11), DEFAULT_ENUM_BOUND).unwrap();
        assert_eq!(g.size(), 10);
        for (i, f) in g.forms.iter().enumerate() {
            let a = g.representative(i);
            assert_eq!(a.form(), *f);
            assert_eq!(a.multiplier_conductor(), 11);
            for (j, f2) in g.forms.iter().enumerate() {
                let b = g.representative(j);
                assert_eq!(a.mul(&b).reduced_form(), f.compose(f2));
            }
        }
    }

    #[test]
    fn cm_points() {
        let prec = 128;
        let i = ImagQuadField::new(-4).unwrap();
        let pt = cm_point(&i.maximal_order().unit_ideal(), prec);
        assert!(pt.tau.real().clone().abs() < 1e-30);
        assert!((pt.tau.imag().clone() - 1u32).abs() < 1e-30);
        let k3 = ImagQuadField::new(-3).unwrap();
        let pt = cm_point(&k3.maximal_order().unit_ideal(), prec);
        let want_im = Float::with_val(prec, 3).sqrt() / 2u32;
        assert!((pt.tau.imag().clone() - want_im).abs() < 1e-30);
        assert!((pt.tau.real().clone().abs() - 0.5f64).abs() < 1e-30);
    }
}
