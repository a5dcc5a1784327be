//! Truncated q-expansions with exact cyclotomic coefficients.
//!
//! Every series carries its truncation: `coeffs[n]` is a(n) for n ≤ D and
//! operations only ever read indices they can justify.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{factor, gcd, is_prime, isqrt, kronecker, primes_up_to};
use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::heckechar::{DirichletChar, HeckeCharacter};
use crate::quadfield::{ImagQuadField, KElem};

#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub weight: u32,
    pub level: u64,
    pub nebentypus: DirichletChar,
    /// a(0), ..., a(D).
    pub coeffs: Vec<Cyclo>,
}

impl QExpansion {
    pub fn new(weight: u32, level: u64, nebentypus: DirichletChar, coeffs: Vec<Cyclo>) -> Self {
        assert!(!coeffs.is_empty());
        QExpansion { weight, level, nebentypus, coeffs }
    }

    /// Series with trivial character from a(1), a(2), ... as integers.
    pub fn from_ints(weight: u32, level: u64, a: &[i64]) -> Self {
        let mut coeffs = vec![Cyclo::zero()];
        coeffs.extend(a.iter().map(|&x| Cyclo::from_int(x)));
        QExpansion::new(weight, level, DirichletChar::trivial(level.max(1)), coeffs)
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Cyclo {
        &self.coeffs[n]
    }

    pub fn is_cusp(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    pub fn truncate(&self, d: usize) -> QExpansion {
        let d = d.min(self.truncation());
        QExpansion { coeffs: self.coeffs[..=d].to_vec(), ..self.clone() }
    }

    fn with_coeffs(&self, coeffs: Vec<Cyclo>) -> QExpansion {
        QExpansion { coeffs, ..self.clone() }
    }

    /// ψ(p) p^{k-1} as an exact number.
    pub fn hecke_constant(&self, p: u64) -> Cyclo {
        let pk = BigInt::from(p).pow(self.weight.saturating_sub(1));
        self.nebentypus.value(p as i128).scale(&BigRational::from_integer(pk))
    }

    pub fn scale(&self, c: &Cyclo) -> QExpansion {
        self.with_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &QExpansion) -> QExpansion {
        let d = self.truncation().min(other.truncation());
        self.with_coeffs((0..=d).map(|n| &self.coeffs[n] + &other.coeffs[n]).collect())
    }

    pub fn sub(&self, other: &QExpansion) -> QExpansion {
        let d = self.truncation().min(other.truncation());
        self.with_coeffs((0..=d).map(|n| &self.coeffs[n] - &other.coeffs[n]).collect())
    }

    /// Complex coefficients at working precision.
    pub fn complex_coeffs(&self, prec: u32) -> Vec<rug::Complex> {
        self.coeffs.iter().map(|c| c.to_complex(prec)).collect()
    }
}

/// a'(j) = a(jp), valid to ⌊D/p⌋.
pub fn hecke_u(f: &QExpansion, p: u64) -> QExpansion {
    let p = p as usize;
    let d = f.truncation() / p;
    f.with_coeffs((0..=d).map(|j| f.coeffs[j * p].clone()).collect())
}

/// a'(jp) = a(j), zero elsewhere; valid to p·D + p - 1 but capped at D.
pub fn hecke_v(f: &QExpansion, p: u64) -> QExpansion {
    hecke_v_to(f, p, f.truncation())
}

/// V_p with an explicit output truncation, capped at what the input supports.
pub fn hecke_v_to(f: &QExpansion, p: u64, cap: usize) -> QExpansion {
    let p = p as usize;
    let d = cap.min(p * f.truncation() + p - 1);
    let coeffs = (0..=d)
        .map(|j| if j % p == 0 { f.coeffs[j / p].clone() } else { Cyclo::zero() })
        .collect();
    QExpansion { level: f.level * p as u64, ..f.with_coeffs(coeffs) }
}

/// T_p = U_p + ψ(p) p^{k-1} V_p, valid to ⌊D/p⌋.
pub fn hecke_t(f: &QExpansion, p: u64) -> QExpansion {
    let u = hecke_u(f, p);
    let v = hecke_v(f, p).scale(&f.hecke_constant(p));
    QExpansion { level: f.level, ..u.add(&v) }
}

/// Remove every coefficient at an index divisible by p.  Both f|(1 - U_pV_p)
/// and f|(1 - T_pV_p + ψ(p)p^{k-1}V_p²) are formed and compared.
pub fn p_deplete(f: &QExpansion, p: u64) -> Result<QExpansion> {
    let pu = p as usize;
    let direct: Vec<Cyclo> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, a)| if j % pu == 0 { Cyclo::zero() } else { a.clone() })
        .collect();
    let d = f.truncation();
    let first = f.sub(&hecke_v_to(&hecke_u(f, p), p, d));
    let tv = hecke_v_to(&hecke_t(f, p), p, d);
    let vv = hecke_v(&hecke_v(f, p), p).scale(&f.hecke_constant(p));
    let second = f.sub(&tv).add(&vv);
    for j in 0..=d {
        if first.coeffs[j] != direct[j] || second.coeffs[j] != direct[j] {
            return Err(Error::InternalMismatch(format!("depletion formulas disagree at q^{j}")));
        }
    }
    let level = f.level * if f.level % p == 0 { p } else { p * p };
    Ok(QExpansion { level, ..f.with_coeffs(direct) })
}

/// a'(j) = φ(j) a(j) for a function φ on Z/NZ given by its values.
pub fn twist(f: &QExpansion, phi: &[Cyclo]) -> QExpansion {
    let n = phi.len();
    f.with_coeffs(f.coeffs.iter().enumerate().map(|(j, a)| a * &phi[j % n]).collect())
}

/// Twist by a Dirichlet character, recording level N·q² and character ψφ².
pub fn twist_char(f: &QExpansion, phi: &DirichletChar) -> QExpansion {
    let vals: Vec<Cyclo> = (0..phi.modulus as i128).map(|x| phi.value(x)).collect();
    let mut g = twist(f, &vals);
    let q = phi.modulus;
    g.level = f.level * q * q;
    let m = num_integer::lcm(f.nebentypus.modulus, q);
    g.nebentypus = f.nebentypus.lift(m).mul(&phi.lift(m)).mul(&phi.lift(m));
    g
}

/// How to pick α among the two Satake roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RootChoice {
    /// Positive imaginary part, or the larger real root when both are real.
    UpperHalf,
    /// The other root.
    LowerHalf,
}

#[derive(Clone, Debug)]
pub struct Eigenform {
    pub base: QExpansion,
    pub newform_level: u64,
    /// Atkin–Lehner eigenvalue when supplied by the input file.
    pub atkin_lehner: Option<i64>,
    /// Primes at which the form has been stabilized, with the root used.
    pub stabilized: BTreeMap<u64, RootChoice>,
}

/// √q for a rational q, inside a cyclotomic field.
pub fn sqrt_rational(q: &BigRational) -> Result<Cyclo> {
    let n = q.numer() * q.denom();
    let n = n
        .to_i64()
        .ok_or_else(|| Error::Unsupported("square root argument out of range".into()))?;
    let den = BigRational::new(BigInt::one(), q.denom().clone());
    Ok(Cyclo::sqrt_int(n).scale(&den))
}

/// Roots of Y² - aY + c with a, c rational, ordered by `choice`.
fn quadratic_roots(a: &Cyclo, c: &Cyclo, choice: RootChoice) -> Result<(Cyclo, Cyclo)> {
    let (Some(ar), Some(cr)) = (a.as_rational(), c.as_rational()) else {
        return Err(Error::Unsupported("Satake roots need rational a(l) and ψ(l)".into()));
    };
    let disc = &ar * &ar - BigRational::from_integer(BigInt::from(4)) * &cr;
    let s = sqrt_rational(&disc)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let r1 = (a + &s).scale(&half);
    let r2 = (a - &s).scale(&half);
    let (re1, im1) = r1.to_c64();
    let (re2, im2) = r2.to_c64();
    let upper_first = im1 > im2 + 1e-12 || ((im1 - im2).abs() <= 1e-12 && re1 >= re2);
    let (u, l) = if upper_first { (r1, r2) } else { (r2, r1) };
    Ok(match choice {
        RootChoice::UpperHalf => (u, l),
        RootChoice::LowerHalf => (l, u),
    })
}

impl Eigenform {
    pub fn new(base: QExpansion) -> Self {
        let newform_level = base.level;
        Eigenform { base, newform_level, atkin_lehner: None, stabilized: BTreeMap::new() }
    }

    pub fn weight(&self) -> u32 {
        self.base.weight
    }

    pub fn a(&self, n: usize) -> &Cyclo {
        self.base.coeff(n)
    }

    /// l^{(k-1)/2}.
    pub fn normalizer(&self, l: u64) -> Cyclo {
        Cyclo::sqrt_int(
            (l as i64)
                .checked_pow(self.weight() - 1)
                .expect("normalizer fits in i64"),
        )
    }

    /// (α_l, β_l) with α + β = a(l)/l^{(k-1)/2} and αβ = ψ(l); β = 0 at l | N₀.
    pub fn satake(&self, l: u64, choice: RootChoice) -> Result<(Cyclo, Cyclo)> {
        let norm_inv = self
            .normalizer(l)
            .inverse()
            .ok_or_else(|| Error::InternalMismatch("zero normalizer".into()))?;
        let al = self.a(l as usize);
        if self.newform_level % l == 0 {
            return Ok((al * &norm_inv, Cyclo::zero()));
        }
        let (y1, y2) = quadratic_roots(al, &self.base.hecke_constant(l), choice)?;
        Ok((&y1 * &norm_inv, &y2 * &norm_inv))
    }

    /// The roots α l^{(k-1)/2}, β l^{(k-1)/2} of Y² - a(l)Y + ψ(l)l^{k-1}.
    pub fn hecke_roots(&self, l: u64, choice: RootChoice) -> Result<(Cyclo, Cyclo)> {
        let al = self.a(l as usize);
        if self.newform_level % l == 0 {
            return Ok((al.clone(), Cyclo::zero()));
        }
        quadratic_roots(al, &self.base.hecke_constant(l), choice)
    }
}

/// Fails with VanishingSplitCoefficient if a(l) = 0 at some split l in the list.
pub fn check_split_nonvanishing(f0: &Eigenform, field: &ImagQuadField, primes: &[u64]) -> Result<()> {
    for &l in primes {
        if field.splitting(l) == crate::quadfield::Splitting::Split && f0.a(l as usize).is_zero() {
            return Err(Error::VanishingSplitCoefficient(l));
        }
    }
    Ok(())
}

/// f with a(l, f) = α_l l^{(k-1)/2} at l ∈ S, l ∤ N₀, rebuilt multiplicatively.
pub fn stabilize(f0: &Eigenform, primes: &[u64], choice: RootChoice) -> Result<Eigenform> {
    let mut roots: BTreeMap<u64, Cyclo> = BTreeMap::new();
    let mut level = f0.base.level;
    for &l in primes {
        if f0.newform_level % l == 0 || roots.contains_key(&l) {
            continue;
        }
        let (y, _) = f0.hecke_roots(l, choice)?;
        roots.insert(l, y);
        level *= l;
    }
    if roots.is_empty() {
        return Ok(f0.clone());
    }
    let d = f0.base.truncation();
    let mut coeffs = vec![Cyclo::zero(); d + 1];
    if d >= 1 {
        coeffs[1] = f0.a(1).clone();
    }
    for (n, slot) in coeffs.iter_mut().enumerate().skip(2) {
        let mut acc = Cyclo::one();
        for (l, e) in factor(n as u64) {
            let le = l.pow(e) as usize;
            let part = match roots.get(&l) {
                Some(y) => y.pow(e),
                None => f0.a(le).clone(),
            };
            acc = &acc * &part;
        }
        *slot = acc;
    }
    let mut out = f0.clone();
    out.base = QExpansion { level, ..f0.base.with_coeffs(coeffs) };
    for &l in roots.keys() {
        out.stabilized.insert(l, choice);
    }
    Ok(out)
}

/// θ(χ) = Σ_𝔞 χ(𝔞) q^{N𝔞} over integral ideals prime to the conductor, for a
/// character of type (κ, 0).  Coefficients land in Q(ζ) via the field embedding.
pub fn theta_series(chi: &HeckeCharacter, d: usize) -> Result<QExpansion> {
    let field = chi.field;
    if chi.kappa.1 != 0 || chi.kappa.0 < 0 {
        return Err(Error::TypeMismatch(format!("theta series needs type (κ, 0), got {:?}", chi.kappa)));
    }
    let mut coeffs = vec![Cyclo::zero(); d + 1];
    for (n, beta) in principal_ideals_up_to(&field, d as u64) {
        let ideal = field.maximal_order().unit_ideal().scale(&beta);
        if let Some((alg, t)) = chi.eval_parts(&ideal)? {
            let v = &field.to_cyclo(&alg) * &Cyclo::root(t);
            coeffs[n as usize] = &coeffs[n as usize] + &v;
        }
    }
    let cond = chi.conductor_c();
    let level = field.d_m.unsigned_abs() * cond * cond;
    let kappa = chi.kappa.0 as u32;
    let neb = DirichletChar::trivial(level);
    Ok(QExpansion::new(kappa + 1, level, neb, coeffs))
}

/// Ideal counts a(n) = Σ_{d | n} (d_M / d) of the trivial-character theta series.
pub fn ideal_counts(field: &ImagQuadField, d: usize) -> QExpansion {
    let mut coeffs = vec![Cyclo::zero(); d + 1];
    for m in 1..=d {
        let c: i64 = (1..=m)
            .filter(|x| m % x == 0)
            .map(|x| kronecker(field.d_m as i128, x as u64) as i64)
            .sum();
        coeffs[m] = Cyclo::from_int(c);
    }
    QExpansion::new(1, field.d_m.unsigned_abs(), DirichletChar::trivial(field.d_m.unsigned_abs()), coeffs)
}

/// One generator per principal integral ideal of norm ≤ bound (class number one).
pub fn principal_ideals_up_to(field: &ImagQuadField, bound: u64) -> Vec<(u64, KElem)> {
    let d = field.d_m as i128;
    let nw = field.omega_norm();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    // N(x + yω) = (x + yd/2)² + y²|d|/4 ≤ bound
    let ymax = isqrt((4 * bound as u128) / d.unsigned_abs()) as i128 + 1;
    for y in -ymax..=ymax {
        let center = -(y * d) / 2;
        let xr = isqrt(bound as u128) as i128 + 2;
        for x in center - xr..=center + xr {
            let n = x * x + x * y * d + y * y * nw;
            if n == 0 || n > bound as i128 {
                continue;
            }
            let beta = KElem::new(x, y, 1);
            let key = unit_normal(field, &beta);
            if seen.insert(key) {
                out.push((n as u64, key));
            }
        }
    }
    out.sort();
    out
}

fn unit_normal(field: &ImagQuadField, beta: &KElem) -> KElem {
    field.units().iter().map(|u| field.mul(u, beta)).max().unwrap()
}

/// Spot checks that a coefficient list is multiplicative and satisfies the
/// Hecke recursion at good primes.
pub fn validate_eigen(f: &QExpansion) -> Result<()> {
    let d = f.truncation() as u64;
    let mut pairs = Vec::new();
    'outer: for m in 2..=d {
        for n in (m + 1)..=d {
            if m * n > d {
                break;
            }
            if gcd(m as i128, n as i128) == 1 {
                pairs.push((m, n));
                if pairs.len() >= 20 {
                    break 'outer;
                }
            }
        }
    }
    for (m, n) in pairs {
        if f.coeffs[(m * n) as usize] != f.coeff(m as usize) * f.coeff(n as usize) {
            return Err(Error::MultiplicativityError(m * n, m, n));
        }
    }
    for p in primes_up_to(isqrt(d as u128) as u64) {
        if f.level % p == 0 || !is_prime(p) {
            continue;
        }
        let c = f.hecke_constant(p);
        let mut pr = p;
        let mut r = 1u32;
        while pr * p <= d {
            let prev = if r == 1 { Cyclo::one() } else { f.coeff((pr / p) as usize).clone() };
            let want = &(f.coeff(p as usize) * f.coeff(pr as usize)) - &(&c * &prev);
            if f.coeffs[(pr * p) as usize] != want {
                return Err(Error::RecursionError(p, r + 1));
            }
            pr *= p;
            r += 1;
        }
    }
    Ok(())
}

pub fn is_zero_series(f: &QExpansion) -> bool {
    f.coeffs.iter().all(|c| c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hecke_operators() {
        let f = QExpansion::from_ints(2, 1, &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let u = hecke_u(&f, 3);
        assert_eq!(u.truncation(), 3);
        assert_eq!(u.coeffs[1..], [3, 6, 9].map(Cyclo::from_int));
        let g = QExpansion::from_ints(2, 1, &[5, 7]);
        let v = hecke_v(&g, 2);
        assert_eq!(v.coeffs[1..=2], [0, 5].map(Cyclo::from_int));
    }

    #[test]
    fn depletion() {
        let f = QExpansion::from_ints(2, 1, &(1..=20).collect::<Vec<_>>());
        let d = p_deplete(&f, 2).unwrap();
        for j in 1..=20 {
            let want = if j % 2 == 0 { 0 } else { j as i64 };
            assert_eq!(d.coeffs[j], Cyclo::from_int(want));
        }
        let dd = p_deplete(&d, 2).unwrap();
        assert_eq!(dd.coeffs, d.coeffs);
    }

    #[test]
    fn quadratic_twist() {
        let f = QExpansion::from_ints(2, 1, &[4, 5, 6]);
        let phi = DirichletChar::from_generators(3, &[(2, crate::cyclo::turn(1, 2))]).unwrap();
        let g = twist_char(&f, &phi);
        assert_eq!(g.coeffs[1..], [4, -5, 0].map(Cyclo::from_int));
    }

    #[test]
    fn satake_vanishing_ap() {
        let mut coeffs = vec![0i64; 12];
        coeffs[0] = 1;
        let f = Eigenform::new(QExpansion::from_ints(2, 11, &coeffs));
        let (a, b) = f.satake(3, RootChoice::UpperHalf).unwrap();
        assert_eq!(a, Cyclo::zeta_pow(4, 1));
        assert_eq!(b, -Cyclo::zeta_pow(4, 1));
        let g = stabilize(&f, &[3], RootChoice::UpperHalf).unwrap();
        assert_eq!(g.a(3), &(&Cyclo::zeta_pow(4, 1) * &Cyclo::sqrt_int(3)));
        let (a11, b11) = f.satake(11, RootChoice::UpperHalf).unwrap();
        assert!(a11.is_zero() && b11.is_zero());
        assert!(stabilize(&f, &[], RootChoice::UpperHalf).unwrap().base == f.base);
    }

    #[test]
    fn theta_gaussian() {
        let k = ImagQuadField::new(-4).unwrap();
        let chi = HeckeCharacter::new(k, (0, 0), None).unwrap();
        let t = theta_series(&chi, 5).unwrap();
        assert_eq!(t.coeffs[1..], [1, 1, 0, 1, 2].map(Cyclo::from_int));
        let counts = ideal_counts(&k, 5);
        assert_eq!(counts.coeffs, t.coeffs);
        let k3 = ImagQuadField::new(-3).unwrap();
        let chi = HeckeCharacter::new(k3, (0, 0), None).unwrap();
        let t = theta_series(&chi, 30).unwrap();
        assert_eq!(t.coeffs[1], Cyclo::one());
        assert_eq!(t.coeffs, ideal_counts(&k3, 30).coeffs);
    }

    #[test]
    fn multiplicativity_violation() {
        let mut a: Vec<i64> = vec![1, -2, -1, 2, 1, 2, -2, 0, -2, -2];
        assert!(validate_eigen(&QExpansion::from_ints(2, 11, &a)).is_ok());
        a[5] = 3;
        assert_eq!(
            validate_eigen(&QExpansion::from_ints(2, 11, &a)),
            Err(Error::MultiplicativityError(6, 2, 3))
        );
    }
}
