//! Measures on Z_p through their Amice transforms Φ(t) = Σ c_n T^n, T = t - 1.
//!
//! A series is either a polynomial (the measure has finitely many nonzero
//! Mahler coefficients, so every operation below is exact) or a truncation of
//! an integral power series.  Truncated series lose trailing coefficients
//! whenever an operation needs coefficients beyond the truncation; each series
//! records how many p-adic digits of its coefficients are meaningful.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{euler_phi, mod_pow, primitive_root, stirling2_row};
use crate::error::{Error, Result};
use crate::heckechar::DirichletChar;
use crate::padic::{PElem, PRing};
use crate::qexp::QExpansion;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSeries {
    pub ring: PRing,
    pub coeffs: Vec<PElem>,
    /// Number of meaningful p-adic digits in every coefficient.
    pub prec: u32,
    /// True when all coefficients past the truncation vanish.
    pub polynomial: bool,
}

/// A ring element known modulo p^prec.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Approx {
    pub value: PElem,
    pub prec: u32,
}

impl Approx {
    pub fn agrees(&self, ring: &PRing, other: &Approx) -> bool {
        ring.eq_mod(&self.value, &other.value, self.prec.min(other.prec))
    }
}

/// A function on Z/p^n Z with values in the coefficient ring.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocallyConstantFn {
    /// Exponent n of the level p^n.
    pub level: u32,
    pub values: Vec<PElem>,
}

impl MeasureSeries {
    pub fn new(ring: &PRing, coeffs: Vec<PElem>, polynomial: bool) -> Self {
        let coeffs = if coeffs.is_empty() { vec![ring.zero()] } else { coeffs };
        MeasureSeries { ring: ring.clone(), coeffs, prec: ring.prec, polynomial }
    }

    pub fn from_ints(ring: &PRing, c: &[i64]) -> Self {
        Self::new(ring, c.iter().map(|&x| ring.from_int(x)).collect(), true)
    }

    pub fn zero(ring: &PRing) -> Self {
        Self::new(ring, vec![], true)
    }

    /// The Dirac measure at j, i.e. Φ = t^j.
    pub fn dirac(ring: &PRing, j: u64) -> Self {
        let mut e = vec![ring.zero(); j as usize + 1];
        e[j as usize] = ring.one();
        Self::from_t_basis(ring, &e)
    }

    /// D, the index of the last stored coefficient.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> PElem {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.ring.zero())
    }

    fn canonical(mut self) -> Self {
        let r = self.ring.clone();
        for c in self.coeffs.iter_mut() {
            *c = r.reduce_mod(c, self.prec);
        }
        self
    }

    pub fn add(&self, other: &MeasureSeries) -> MeasureSeries {
        let r = &self.ring;
        let len = if self.polynomial && other.polynomial {
            self.coeffs.len().max(other.coeffs.len())
        } else {
            let a = if self.polynomial { usize::MAX } else { self.coeffs.len() };
            let b = if other.polynomial { usize::MAX } else { other.coeffs.len() };
            a.min(b)
        };
        let coeffs = (0..len).map(|k| r.add(&self.coeff(k), &other.coeff(k))).collect();
        MeasureSeries { ring: r.clone(), coeffs, prec: self.prec.min(other.prec), polynomial: self.polynomial && other.polynomial }
            .canonical()
    }

    pub fn scale(&self, c: &PElem) -> MeasureSeries {
        let r = &self.ring;
        MeasureSeries { coeffs: self.coeffs.iter().map(|x| r.mul(x, c)).collect(), ..self.clone() }.canonical()
    }

    pub fn scale_int(&self, c: i64) -> MeasureSeries {
        self.scale(&self.ring.from_int(c))
    }

    /// Equality within the common precision and common known range.
    pub fn congruent(&self, other: &MeasureSeries) -> bool {
        let digits = self.prec.min(other.prec);
        let len = match (self.polynomial, other.polynomial) {
            (true, true) => self.coeffs.len().max(other.coeffs.len()),
            (true, false) => other.coeffs.len(),
            (false, true) => self.coeffs.len(),
            (false, false) => self.coeffs.len().min(other.coeffs.len()),
        };
        (0..len).all(|k| self.ring.eq_mod(&self.coeff(k), &other.coeff(k), digits))
    }

    /// Coefficients in the monomial basis t^j (polynomials only).
    pub fn to_t_basis(&self) -> Result<Vec<PElem>> {
        if !self.polynomial {
            return Err(Error::Unsupported("t-basis of a truncated power series".into()));
        }
        // Horner in T = t - 1, multiplying by (t - 1) at each step.
        let r = &self.ring;
        let mut acc: Vec<PElem> = vec![];
        for c in self.coeffs.iter().rev() {
            let mut next = vec![r.zero(); acc.len() + 1];
            for (j, a) in acc.iter().enumerate() {
                next[j + 1] = r.add(&next[j + 1], a);
                next[j] = r.sub(&next[j], a);
            }
            next[0] = r.add(&next[0], c);
            acc = next;
        }
        Ok(acc)
    }

    /// Φ = Σ e_j t^j.
    pub fn from_t_basis(ring: &PRing, e: &[PElem]) -> Self {
        let mut acc: Vec<PElem> = vec![];
        for c in e.iter().rev() {
            let mut next = vec![ring.zero(); acc.len() + 1];
            for (j, a) in acc.iter().enumerate() {
                next[j] = ring.add(&next[j], a);
                next[j + 1] = ring.add(&next[j + 1], a);
            }
            next[0] = ring.add(&next[0], c);
            acc = next;
        }
        Self::new(ring, acc, true)
    }

    /// Same series over a ring of higher cyclotomic level.
    pub fn lift(&self, ring: &PRing) -> MeasureSeries {
        let coeffs = self.coeffs.iter().map(|c| ring.lift_from(&self.ring, c)).collect();
        MeasureSeries { ring: ring.clone(), coeffs, prec: self.prec, polynomial: self.polynomial }
    }
}

fn require_level(ring: &PRing, n: u32) -> Result<()> {
    if ring.level < n {
        return Err(Error::CyclotomicLevelTooSmall { have: ring.level, need: n });
    }
    Ok(())
}

/// Valuation denominator of ζ_{p^n} - 1.
fn ram_index(p: u64, n: u32) -> usize {
    if n == 0 {
        1
    } else {
        euler_phi(p.pow(n)) as usize
    }
}

impl LocallyConstantFn {
    pub fn size(&self, ring: &PRing) -> usize {
        ring.p.pow(self.level) as usize
    }

    pub fn constant(ring: &PRing, c: PElem) -> Self {
        LocallyConstantFn { level: 0, values: vec![ring.reduce_mod(&c, ring.prec)] }
    }

    /// Indicator of b + p^n Z_p.
    pub fn indicator(ring: &PRing, n: u32, b: i64) -> Self {
        let size = ring.p.pow(n) as i64;
        let b = b.rem_euclid(size) as usize;
        let values = (0..size as usize).map(|x| if x == b { ring.one() } else { ring.zero() }).collect();
        LocallyConstantFn { level: n, values }
    }

    /// Indicator of Z_p^×.
    pub fn units(ring: &PRing) -> Self {
        let p = ring.p as usize;
        let values = (0..p).map(|x| if x == 0 { ring.zero() } else { ring.one() }).collect();
        LocallyConstantFn { level: 1, values }
    }

    /// A Dirichlet character of p-power modulus, extended by zero.
    pub fn from_dirichlet(ring: &PRing, chi: &DirichletChar) -> Result<Self> {
        let q = chi.modulus;
        let mut n = 0;
        let mut t = q;
        while t % ring.p == 0 {
            t /= ring.p;
            n += 1;
        }
        if t != 1 {
            return Err(Error::Unsupported(format!("modulus {q} is not a power of {}", ring.p)));
        }
        let values = (0..q as i128).map(|x| ring.from_cyclo(&chi.value(x))).collect::<Result<Vec<_>>>()?;
        Ok(LocallyConstantFn { level: n, values })
    }

    pub fn eval(&self, ring: &PRing, x: i64) -> PElem {
        let size = self.size(ring) as i64;
        self.values[x.rem_euclid(size) as usize].clone()
    }

    /// The same function viewed at level n ≥ self.level.
    pub fn at_level(&self, ring: &PRing, n: u32) -> Self {
        assert!(n >= self.level);
        let size = ring.p.pow(n) as i64;
        LocallyConstantFn { level: n, values: (0..size).map(|x| self.eval(ring, x)).collect() }
    }

    pub fn mul(&self, ring: &PRing, other: &Self) -> Self {
        let n = self.level.max(other.level);
        let a = self.at_level(ring, n);
        let b = other.at_level(ring, n);
        LocallyConstantFn { level: n, values: a.values.iter().zip(&b.values).map(|(x, y)| ring.mul(x, y)).collect() }
    }

    /// φ⁻(x) = φ(-x).
    pub fn reflect(&self, ring: &PRing) -> Self {
        let size = self.size(ring) as i64;
        LocallyConstantFn { level: self.level, values: (0..size).map(|x| self.eval(ring, -x)).collect() }
    }
}

/// All Dirichlet characters modulo p^n (p odd) with values in the ring, as
/// functions extended by zero.  Index a sends the generator g to R^a where R
/// is the ring's root of unity of order φ(p^n).
pub fn dirichlet_characters(ring: &PRing, n: u32) -> Result<Vec<LocallyConstantFn>> {
    let p = ring.p;
    if p == 2 {
        return Err(Error::Unsupported("characters modulo powers of 2".into()));
    }
    if n == 0 {
        return Ok(vec![LocallyConstantFn::constant(ring, ring.one())]);
    }
    require_level(ring, n - 1)?;
    let q = p.pow(n);
    let order = euler_phi(q);
    let mut g = primitive_root(p);
    if n >= 2 && mod_pow(g as i128, p - 1, (p * p) as i128) == 1 {
        g += p;
    }
    let mut dlog = vec![None; q as usize];
    let mut x = 1u64;
    for e in 0..order {
        dlog[x as usize] = Some(e);
        x = x * g % q;
    }
    let root = ring.root_of_unity(order)?;
    let powers: Vec<PElem> = {
        let mut v = Vec::with_capacity(order as usize);
        let mut acc = ring.one();
        for _ in 0..order {
            v.push(acc.clone());
            acc = ring.mul(&acc, &root);
        }
        v
    };
    Ok((0..order)
        .map(|a| LocallyConstantFn {
            level: n,
            values: dlog
                .iter()
                .map(|d| match d {
                    Some(e) => powers[((a * e) % order) as usize].clone(),
                    None => ring.zero(),
                })
                .collect(),
        })
        .collect())
}

/// Φ(ζ t) as a T-series, where ζ = ζ_L^e for the ring's level L.
fn substitute_root(ring: &PRing, coeffs: &[PElem], e: i64) -> Vec<PElem> {
    let d = coeffs.len() - 1;
    let mut acc = Vec::with_capacity(d + 1);
    acc.push(coeffs[d].clone());
    let mut za = ring.zero();
    for c in coeffs[..d].iter().rev() {
        // acc ← (ζ(1+T) - 1)·acc + c, from the top degree down.
        acc.push(ring.zero());
        for j in (0..acc.len() - 1).rev() {
            za.0.iter_mut().for_each(|x| *x = 0);
            ring.add_mul_zeta_pow(&mut za, &acc[j], e);
            ring.add_assign(&mut acc[j + 1], &za);
            ring.rsub_assign(&mut acc[j], &za);
        }
        ring.add_assign(&mut acc[0], c);
    }
    acc
}

/// Φ(ζ_{p^n}^u t) for every u mod p^n, shared by all functions of level n.
pub struct ShiftTable {
    pub level: u32,
    pub shifted: Vec<Vec<PElem>>,
}

pub fn shift_table(mu: &MeasureSeries, n: u32) -> Result<ShiftTable> {
    let ring = &mu.ring;
    require_level(ring, n)?;
    let size = ring.p.pow(n) as i64;
    let step = ring.p.pow(ring.level - n) as i64;
    let shifted = (0..size).into_par_iter().map(|u| substitute_root(ring, &mu.coeffs, u * step)).collect();
    Ok(ShiftTable { level: n, shifted })
}

/// Σ_b φ(b) ζ_{p^n}^{-bu} for each u.
fn fourier_weights(ring: &PRing, phi: &LocallyConstantFn) -> Vec<PElem> {
    let n = phi.level;
    let size = ring.p.pow(n) as i64;
    let step = ring.p.pow(ring.level - n) as i64;
    (0..size)
        .map(|u| {
            let mut w = ring.zero();
            for b in 0..size {
                let v = &phi.values[b as usize];
                if !ring.is_zero(v) {
                    let t = ring.mul_zeta_pow(v, -b * u * step);
                    ring.add_assign(&mut w, &t);
                }
            }
            w
        })
        .collect()
}

/// [φ]Φ(t) = p^{-n} Σ_b φ(b) Σ_ζ ζ^{-b} Φ(ζt).
pub fn act(phi: &LocallyConstantFn, mu: &MeasureSeries) -> Result<MeasureSeries> {
    let table = shift_table(mu, phi.level)?;
    act_with(&table, phi, mu)
}

pub fn act_with(table: &ShiftTable, phi: &LocallyConstantFn, mu: &MeasureSeries) -> Result<MeasureSeries> {
    let ring = &mu.ring;
    let n = phi.level;
    if table.level != n {
        return Err(Error::InternalMismatch(format!("shift table of level {} used at level {n}", table.level)));
    }
    if mu.prec <= n {
        return Err(Error::PrecisionExhausted(format!("{} digits cannot absorb division by p^{n}", mu.prec)));
    }
    let d = mu.truncation();
    // Dropped terms c_i (i > D) contribute at valuation ≥ (i - k)/φ(p^n).
    let lost = if mu.polynomial || n == 0 { 0 } else { ram_index(ring.p, n) * mu.prec as usize };
    if lost > d {
        return Err(Error::PrecisionExhausted(format!("truncation {d} too short for level {n}")));
    }
    let len = d + 1 - lost;
    let weights = fourier_weights(ring, phi);
    let pn_digits = mu.prec;
    let coeffs = (0..len)
        .into_par_iter()
        .map(|k| {
            let mut s = ring.zero();
            for (w, sh) in weights.iter().zip(&table.shifted) {
                if !ring.is_zero(w) {
                    ring.add_assign(&mut s, &ring.mul(w, &sh[k]));
                }
            }
            let s = ring.reduce_mod(&s, pn_digits);
            ring.div_p_pow(&s, n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureSeries { ring: ring.clone(), coeffs, prec: mu.prec - n, polynomial: mu.polynomial }.canonical())
}

/// (1 + T) d/dT, i.e. t d/dt.  A truncated series loses its last coefficient.
pub fn theta(mu: &MeasureSeries) -> MeasureSeries {
    let r = &mu.ring;
    let d = mu.truncation();
    let len = if mu.polynomial { d + 1 } else { d.max(1) };
    let coeffs = (0..len)
        .map(|k| {
            let a = r.scale(&mu.coeff(k + 1), (k + 1) as u64);
            let b = r.scale(&mu.coeff(k), k as u64);
            r.add(&a, &b)
        })
        .collect();
    MeasureSeries { coeffs, ..mu.clone() }.canonical()
}

/// ∫ x^m dμ = (t d/dt)^m Φ at t = 1, cross-checked against Σ c_n S(m,n) n!.
pub fn moment(mu: &MeasureSeries, m: usize) -> Result<Approx> {
    let r = &mu.ring;
    if mu.prec == 0 {
        return Err(Error::PrecisionExhausted("no significant digits left".into()));
    }
    if !mu.polynomial && m > mu.truncation() {
        return Err(Error::PrecisionExhausted(format!("moment {m} beyond truncation {}", mu.truncation())));
    }
    let mut s = mu.clone();
    for _ in 0..m {
        s = theta(&s);
    }
    let direct = s.coeff(0);
    let stirling = stirling2_row(m);
    let mut fact = BigInt::from(1);
    let mut alt = r.zero();
    for (n, sn) in stirling.iter().enumerate() {
        if n > 0 {
            fact *= n;
        }
        if n > mu.truncation() {
            break;
        }
        let w = r.from_bigint(&(sn * &fact));
        alt = r.add(&alt, &r.mul(&w, &mu.coeffs[n]));
    }
    if !r.eq_mod(&direct, &alt, mu.prec) {
        return Err(Error::InternalMismatch(format!("moment {m}: derivative and Stirling routes disagree")));
    }
    Ok(Approx { value: r.reduce_mod(&direct, mu.prec), prec: mu.prec })
}

/// Φ(ζ_{p^n}^u) for a polynomial, or a truncated series with enough terms.
fn eval_at_root(mu: &MeasureSeries, n: u32, u: i64) -> Result<Approx> {
    let r = &mu.ring;
    require_level(r, n)?;
    let e = u * r.p.pow(r.level - n) as i64;
    let z1 = r.sub(&r.zeta_pow(e), &r.one());
    let mut acc = r.zero();
    for c in mu.coeffs.iter().rev() {
        acc = r.add(&r.mul(&acc, &z1), c);
    }
    let prec = if mu.polynomial || n == 0 {
        mu.prec
    } else {
        (((mu.truncation() + 1) / ram_index(r.p, n)) as u32).min(mu.prec)
    };
    if prec == 0 {
        return Err(Error::PrecisionExhausted(format!("truncation {} too short to evaluate at ζ_{}^{u}", mu.truncation(), r.p.pow(n))));
    }
    Ok(Approx { value: r.reduce_mod(&acc, prec), prec })
}

/// ∫ φ(x) x^m dμ, computed as moment(act(φ, μ), m) and, independently, by
/// averaging (t d/dt)^m Φ over the roots of unity.
pub fn twisted_moment(mu: &MeasureSeries, phi: &LocallyConstantFn, m: usize) -> Result<Approx> {
    twisted_moment_with(&shift_table(mu, phi.level)?, mu, phi, m)
}

/// `twisted_moment` with a precomputed shift table of level `phi.level`.
pub fn twisted_moment_with(table: &ShiftTable, mu: &MeasureSeries, phi: &LocallyConstantFn, m: usize) -> Result<Approx> {
    let first = moment(&act_with(table, phi, mu)?, m)?;
    let r = &mu.ring;
    let n = phi.level;
    let mut derived = mu.clone();
    for _ in 0..m {
        derived = theta(&derived);
    }
    let size = r.p.pow(n) as i64;
    let weights = fourier_weights(r, phi);
    let mut s = r.zero();
    let mut prec = derived.prec;
    for u in 0..size {
        let v = eval_at_root(&derived, n, u)?;
        prec = prec.min(v.prec);
        s = r.add(&s, &r.mul(&weights[u as usize], &v.value));
    }
    if prec <= n {
        return Err(Error::PrecisionExhausted(format!("{prec} digits cannot absorb division by p^{n}")));
    }
    let second = Approx { value: r.reduce_mod(&r.div_p_pow(&r.reduce_mod(&s, prec), n)?, prec - n), prec: prec - n };
    if !first.agrees(r, &second) {
        return Err(Error::InternalMismatch(format!("twisted moment {m}: the two routes disagree")));
    }
    Ok(if first.prec <= second.prec { first } else { second })
}

/// μ(b + p^n Z_p) = p^{-n} Σ_ζ ζ^{-b} Φ(ζ).
pub fn ball_measure(mu: &MeasureSeries, n: u32, b: i64) -> Result<Approx> {
    let r = &mu.ring;
    let size = r.p.pow(n) as i64;
    let step = r.p.pow(r.level.saturating_sub(n)) as i64;
    let mut s = r.zero();
    let mut prec = mu.prec;
    for u in 0..size {
        let v = eval_at_root(mu, n, u)?;
        prec = prec.min(v.prec);
        s = r.add(&s, &r.mul_zeta_pow(&v.value, -b * u * step));
    }
    if prec <= n {
        return Err(Error::PrecisionExhausted(format!("{prec} digits cannot absorb division by p^{n}")));
    }
    let q = r.div_p_pow(&r.reduce_mod(&s, prec), n)?;
    Ok(Approx { value: r.reduce_mod(&q, prec - n), prec: prec - n })
}

pub fn restrict_to_units(mu: &MeasureSeries) -> Result<MeasureSeries> {
    act(&LocallyConstantFn::units(&mu.ring), mu)
}

pub fn is_unit_supported(mu: &MeasureSeries) -> Result<bool> {
    Ok(restrict_to_units(mu)?.congruent(mu))
}

/// Φ(t^{p^n}).  Polynomials keep every term; truncated series keep their
/// truncation, which loses nothing because t^{p^n} - 1 = O(T).
pub fn frobenius_substitute(mu: &MeasureSeries, n: u32) -> MeasureSeries {
    let r = &mu.ring;
    let pn = r.p.pow(n) as usize;
    let d = mu.truncation();
    let cap = if mu.polynomial { d * pn + 1 } else { d + 1 };
    // S = (1+T)^{p^n} - 1.
    let mut s = vec![0u64; pn + 1];
    s[0] = 1;
    for i in 1..=pn {
        for j in (1..=i).rev() {
            s[j] = (s[j] + s[j - 1]) % r.modulus;
        }
    }
    s[0] = 0;
    let mut acc: Vec<PElem> = vec![mu.coeffs[d].clone()];
    for c in mu.coeffs[..d].iter().rev() {
        let mut next = vec![r.zero(); (acc.len() + pn).min(cap)];
        for (i, a) in acc.iter().enumerate() {
            if r.is_zero(a) {
                continue;
            }
            for (j, &sj) in s.iter().enumerate().skip(1) {
                if i + j < next.len() && sj != 0 {
                    let t = r.scale(a, sj);
                    r.add_assign(&mut next[i + j], &t);
                }
            }
        }
        r.add_assign(&mut next[0], c);
        acc = next;
    }
    MeasureSeries { coeffs: acc, ..mu.clone() }.canonical()
}

/// Φ(ζ_{p^n}^u).
pub fn verschiebung_root_evaluate(mu: &MeasureSeries, u: i64, n: u32) -> Result<Approx> {
    eval_at_root(mu, n, u)
}

/// How the q-model identifies the Serre–Tate variable with q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// t ↔ q: Φ(ζ^u t) models f|(1, u/p^n), q^j ↦ ζ^{ju} q^j.
    Direct,
    /// t ↔ q^{-1}: Φ(ζ^u t) models f|(1, -u/p^n), the geometric sign.
    Reflected,
}

/// Coefficients a(0..=D) of f in the ring.
pub fn ring_coeffs(f: &QExpansion, ring: &PRing) -> Result<Vec<PElem>> {
    f.coeffs
        .iter()
        .enumerate()
        .map(|(j, a)| ring.from_cyclo(a).map_err(|e| match e {
            Error::CoefficientNotIntegral(_) => Error::CoefficientNotIntegral(j),
            other => other,
        }))
        .collect()
}

/// Φ = Σ a(j) t^{±j}.  The reflected model is an infinite series, stored to
/// `len` coefficients.
pub fn q_model_from_coeffs(ring: &PRing, a: &[PElem], orientation: Orientation, len: usize) -> MeasureSeries {
    match orientation {
        Orientation::Direct => MeasureSeries::from_t_basis(ring, a),
        Orientation::Reflected => {
            // Horner in u = t^{-1} = Σ (-T)^k.
            let mut acc = vec![ring.zero(); len];
            for c in a.iter().rev() {
                let mut next = vec![ring.zero(); len];
                let mut run = ring.zero();
                for k in 0..len {
                    run = ring.sub(&acc[k], &run);
                    next[k] = run.clone();
                }
                // run_k = Σ_{i≤k} (-1)^{k-i} acc_i.
                ring.add_assign(&mut next[0], c);
                acc = next;
            }
            MeasureSeries::new(ring, acc, false)
        }
    }
}

/// Length that keeps D coefficients exact through act at the ring's level.
pub fn reflected_length(ring: &PRing, d: usize) -> usize {
    d + 1 + ram_index(ring.p, ring.level) * ring.prec as usize
}

pub fn q_model_measure(f: &QExpansion, ring: &PRing, orientation: Orientation) -> Result<MeasureSeries> {
    let a = ring_coeffs(f, ring)?;
    let len = reflected_length(ring, f.truncation());
    Ok(q_model_from_coeffs(ring, &a, orientation, len))
}

/// Coefficientwise twist j ↦ φ(j) a(j).
pub fn twist_coeffs(ring: &PRing, a: &[PElem], phi: &LocallyConstantFn) -> Vec<PElem> {
    a.iter().enumerate().map(|(j, x)| ring.mul(x, &phi.eval(ring, j as i64))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub tag: String,
    pub lambda_hat: PElem,
    pub measure: MeasureSeries,
}

/// dμ_j = λ̂(A_j⁻¹)·dμ_{f^{(p)}, A_j}; every component must live on Z_p^×.
/// In the q-model all classes share the same underlying series.
pub fn assemble_cuspidal_measure(
    f_depleted: &QExpansion,
    ring: &PRing,
    lambda_hat: &[(String, PElem)],
) -> Result<Vec<Component>> {
    let base = q_model_measure(f_depleted, ring, Orientation::Direct)?;
    let mut out = Vec::with_capacity(lambda_hat.len());
    for (j, (tag, l)) in lambda_hat.iter().enumerate() {
        let measure = base.scale(l);
        if !is_unit_supported(&measure)? {
            return Err(Error::NotDepleted(j));
        }
        out.push(Component { tag: tag.clone(), lambda_hat: l.clone(), measure });
    }
    Ok(out)
}

/// Σ_j ξ_j ∫ φ(z) z^m dμ_j(z), the class-by-class expansion of ∫ ξ dμ_f
/// for ξ(A_j⁻¹ z) = ξ_j φ(z) z^m.
pub fn integrate(components: &[Component], class_values: &[PElem], phi: &LocallyConstantFn, m: usize) -> Result<Approx> {
    if components.len() != class_values.len() {
        return Err(Error::IncompleteRepresentatives(format!(
            "{} components, {} class values",
            components.len(),
            class_values.len()
        )));
    }
    let ring = &components.first().ok_or_else(|| Error::IncompleteRepresentatives("no components".into()))?.measure.ring;
    let mut acc = ring.zero();
    let mut prec = ring.prec;
    for (c, x) in components.iter().zip(class_values) {
        let v = twisted_moment(&c.measure, phi, m)?;
        prec = prec.min(v.prec);
        acc = ring.add(&acc, &ring.mul(x, &v.value));
    }
    Ok(Approx { value: ring.reduce_mod(&acc, prec), prec })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, m: u32, n: u32) -> PRing {
        PRing::new(p, m, n).unwrap()
    }

    #[test]
    fn dirac_moments() {
        let r = ring(5, 6, 0);
        let t = MeasureSeries::dirac(&r, 1);
        for m in 0..10 {
            assert_eq!(moment(&t, m).unwrap().value, r.one());
        }
        let t3 = MeasureSeries::dirac(&r, 3);
        for m in 0..8 {
            assert_eq!(moment(&t3, m).unwrap().value, r.from_int(3i64.pow(m as u32)));
        }
    }

    #[test]
    fn stirling_oracle() {
        // Φ = 1 + T + T²: ∫x² = Σ c_n S(2,n) n! = 0 + 1·1·1 + 1·1·2 = 3.
        let r = ring(5, 6, 0);
        let mu = MeasureSeries::from_ints(&r, &[1, 1, 1]);
        assert_eq!(moment(&mu, 2).unwrap().value, r.from_int(3));
    }

    #[test]
    fn act_on_monomials() {
        let r = ring(3, 8, 2);
        let chars = dirichlet_characters(&r, 2).unwrap();
        for j in 0..12u64 {
            let mu = MeasureSeries::dirac(&r, j);
            for phi in &chars {
                let got = act(phi, &mu).unwrap();
                let want = MeasureSeries::dirac(&r, j).scale(&phi.eval(&r, j as i64));
                assert!(got.congruent(&want));
            }
        }
        let one = LocallyConstantFn::constant(&r, r.one());
        let mu = MeasureSeries::from_ints(&r, &[3, -1, 4, 1, -5, 9]);
        assert!(act(&one, &mu).unwrap().congruent(&mu));
    }

    #[test]
    fn indicator_localizes_dirac() {
        let r = ring(5, 6, 1);
        let t = MeasureSeries::dirac(&r, 1);
        for b in 0..5 {
            let got = act(&LocallyConstantFn::indicator(&r, 1, b), &t).unwrap();
            let want = if b == 1 { t.clone() } else { MeasureSeries::zero(&r) };
            assert!(got.congruent(&want), "b = {b}");
        }
    }

    #[test]
    fn unit_restriction() {
        let r = ring(5, 6, 1);
        let tp = MeasureSeries::dirac(&r, 5);
        assert!(restrict_to_units(&tp).unwrap().congruent(&MeasureSeries::zero(&r)));
        let both = MeasureSeries::dirac(&r, 1).add(&tp);
        assert!(restrict_to_units(&both).unwrap().congruent(&MeasureSeries::dirac(&r, 1)));
        assert!(!is_unit_supported(&both).unwrap());
        assert!(is_unit_supported(&MeasureSeries::dirac(&r, 7)).unwrap());
        let z = twisted_moment(&tp, &LocallyConstantFn::units(&r), 0).unwrap();
        assert!(r.is_zero(&z.value));
    }

    #[test]
    fn frobenius_and_roots() {
        let r = ring(3, 6, 2);
        let t = MeasureSeries::dirac(&r, 1);
        let f = frobenius_substitute(&t, 1);
        assert!(f.congruent(&MeasureSeries::dirac(&r, 3)));
        let z = verschiebung_root_evaluate(&t, 1, 1).unwrap();
        assert_eq!(z.value, r.zeta_pow(3));
        let c = MeasureSeries::from_ints(&r, &[7]);
        assert!(frobenius_substitute(&c, 2).congruent(&c));
        assert_eq!(verschiebung_root_evaluate(&c, 2, 2).unwrap().value, r.from_int(7));
    }

    #[test]
    fn reflected_model_matches_negative_dirac() {
        // t^{-1} is the Dirac mass at -1: moments (-1)^m.
        let r = ring(3, 8, 1);
        let mu = q_model_from_coeffs(&r, &[r.zero(), r.one()], Orientation::Reflected, 30);
        for m in 0..6 {
            let want = if m % 2 == 0 { r.one() } else { r.from_int(-1) };
            assert_eq!(moment(&mu, m).unwrap().value, want);
        }
    }

    #[test]
    fn character_table_is_multiplicative() {
        let r = ring(5, 6, 1);
        let chars = dirichlet_characters(&r, 2).unwrap();
        assert_eq!(chars.len(), 20);
        for chi in chars.iter().take(6) {
            for a in 1..25i64 {
                for b in 1..25i64 {
                    let lhs = chi.eval(&r, a * b);
                    let rhs = r.mul(&chi.eval(&r, a), &chi.eval(&r, b));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}
